//! Stock triangulations used by the built-in examples and tests.

use crate::simplicial::SimplicialComplex;

/// Circle as a k-gon, vertices `0..k`, k >= 3.
pub fn circle(k: usize) -> SimplicialComplex {
    assert!(k >= 3, "polygon circle needs at least 3 vertices");
    let verts: Vec<u64> = (0..k as u64).collect();
    let edges: Vec<Vec<u64>> = (0..k)
        .map(|i| vec![i as u64, ((i + 1) % k) as u64])
        .collect();
    SimplicialComplex::from_simplices(verts, &edges).unwrap()
}

fn torus_vertex(m: usize, n: usize, i: usize, j: usize) -> u64 {
    ((i % m) * n + (j % n)) as u64
}

/// Torus as an m x n grid with the diagonal triangulation; m, n >= 3.
pub fn grid_torus(m: usize, n: usize) -> SimplicialComplex {
    assert!(m >= 3 && n >= 3, "grid torus needs m, n >= 3");
    let verts: Vec<u64> = (0..(m * n) as u64).collect();
    let mut tris = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = |a: usize, b: usize| torus_vertex(m, n, i + a, j + b);
            tris.push(vec![v(0, 0), v(1, 0), v(1, 1)]);
            tris.push(vec![v(0, 0), v(0, 1), v(1, 1)]);
        }
    }
    SimplicialComplex::from_simplices(verts, &tris).unwrap()
}

/// Vertex permutation of `grid_torus(m, n)` shifting the first coordinate.
pub fn torus_shift(m: usize, n: usize, shift: usize) -> Vec<usize> {
    (0..m * n)
        .map(|v| {
            let (i, j) = (v / n, v % n);
            torus_vertex(m, n, i + shift, j) as usize
        })
        .collect()
}

/// 3-torus on an l x m x n periodic grid, six tetrahedra per cube
/// (Freudenthal); l, m, n >= 3.
pub fn grid_torus3(l: usize, m: usize, n: usize) -> SimplicialComplex {
    assert!(l >= 3 && m >= 3 && n >= 3, "grid 3-torus needs l, m, n >= 3");
    let vid = |x: usize, y: usize, z: usize| ((x % l) * m * n + (y % m) * n + (z % n)) as u64;
    let verts: Vec<u64> = (0..(l * m * n) as u64).collect();
    let mut tets = Vec::new();
    let units = [[1usize, 0, 0], [0, 1, 0], [0, 0, 1]];
    let perms = [
        [0usize, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for x in 0..l {
        for y in 0..m {
            for z in 0..n {
                for p in &perms {
                    let mut cur = [x, y, z];
                    let mut tet = vec![vid(cur[0], cur[1], cur[2])];
                    for &axis in p {
                        cur[0] += units[axis][0];
                        cur[1] += units[axis][1];
                        cur[2] += units[axis][2];
                        tet.push(vid(cur[0], cur[1], cur[2]));
                    }
                    tets.push(tet);
                }
            }
        }
    }
    SimplicialComplex::from_simplices(verts, &tets).unwrap()
}

/// Cylinder over an m-gon with h strips; boundary circles at levels 0 and h.
/// Vertex (i, level) has label `level * m + i`.
pub fn cylinder(m: usize, h: usize) -> SimplicialComplex {
    assert!(m >= 3 && h >= 1);
    let vid = |i: usize, level: usize| (level * m + (i % m)) as u64;
    let verts: Vec<u64> = (0..(m * (h + 1)) as u64).collect();
    let mut tris = Vec::new();
    for level in 0..h {
        for i in 0..m {
            tris.push(vec![vid(i, level), vid(i + 1, level), vid(i + 1, level + 1)]);
            tris.push(vec![vid(i, level), vid(i, level + 1), vid(i + 1, level + 1)]);
        }
    }
    SimplicialComplex::from_simplices(verts, &tris).unwrap()
}

/// The 5-vertex Moebius band (non-orientable, one boundary circle).
pub fn moebius() -> SimplicialComplex {
    let tris = vec![
        vec![0, 1, 2],
        vec![1, 2, 3],
        vec![2, 3, 4],
        vec![0, 3, 4],
        vec![0, 1, 4],
    ];
    SimplicialComplex::from_simplices(vec![0, 1, 2, 3, 4], &tris).unwrap()
}

/// Boundary of the tetrahedron: the minimal 2-sphere.
pub fn sphere2() -> SimplicialComplex {
    let tris = vec![
        vec![0, 1, 2],
        vec![0, 1, 3],
        vec![0, 2, 3],
        vec![1, 2, 3],
    ];
    SimplicialComplex::from_simplices(vec![0, 1, 2, 3], &tris).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::CoefficientRing;

    #[test]
    fn euler_characteristics() {
        assert_eq!(circle(5).cochain_complex().euler_from_ranks(), 0);
        assert_eq!(grid_torus(4, 3).cochain_complex().euler_from_ranks(), 0);
        assert_eq!(grid_torus3(3, 3, 3).cochain_complex().euler_from_ranks(), 0);
        assert_eq!(sphere2().cochain_complex().euler_from_ranks(), 2);
        assert_eq!(moebius().cochain_complex().euler_from_ranks(), 0);
    }

    #[test]
    fn torus_integral_cohomology() {
        let t = grid_torus(4, 3).cochain_complex();
        let h: Vec<_> = (0..=2)
            .map(|k| t.cohomology(k, CoefficientRing::Integers).unwrap())
            .collect();
        assert_eq!(h[0].free_rank, 1);
        assert_eq!(h[1].free_rank, 2);
        assert_eq!(h[2].free_rank, 1);
        assert!(h.iter().all(|g| g.torsion.is_empty()));
    }

    #[test]
    fn three_torus_betti_numbers() {
        let t = grid_torus3(3, 3, 3).cochain_complex();
        let b: Vec<usize> = (0..=3)
            .map(|k| {
                t.cohomology(k, CoefficientRing::Rationals)
                    .unwrap()
                    .free_rank
            })
            .collect();
        assert_eq!(b, vec![1, 3, 3, 1]);
    }

    #[test]
    fn cylinder_is_a_homotopy_circle() {
        let c = cylinder(4, 2).cochain_complex();
        assert_eq!(
            c.cohomology(1, CoefficientRing::Integers).unwrap().free_rank,
            1
        );
        assert!(c
            .cohomology(2, CoefficientRing::Integers)
            .unwrap()
            .is_zero());
    }
}
