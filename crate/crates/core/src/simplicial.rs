//! Oriented simplicial complexes.
//!
//! Simplices are stored as strictly increasing vertex tuples; the canonical
//! orientation of a simplex is the increasing order, and faces carry the
//! alternating incidence signs of that convention. Values on a simplex with
//! reversed orientation are the negatives of the stored ones, so all maps
//! that move simplices track a permutation sign.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::complex::FiniteComplex;
use crate::error::{Error, Result};
use crate::matrix::SparseMat;
use crate::rat::rat_int;

/// Sign of the permutation sorting `v`; `None` if entries repeat.
pub fn sort_sign(v: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut w: Vec<usize> = v.to_vec();
    let mut sign = 1i64;
    // insertion sort, counting swaps
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            w.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for i in 1..w.len() {
        if w[i - 1] == w[i] {
            return None;
        }
    }
    Some((w, sign))
}

#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    /// external vertex labels; internal vertex `i` is `labels[i]`
    labels: Vec<u64>,
    label_index: HashMap<u64, usize>,
    /// simplices[k]: sorted list of increasing (k+1)-tuples of internal vertices
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Builds the downward closure of the given simplices. Vertex labels are
    /// external names; all faces are generated automatically.
    pub fn from_simplices(labels: Vec<u64>, top: &[Vec<u64>]) -> Result<Self> {
        let mut label_index = HashMap::new();
        for (i, &l) in labels.iter().enumerate() {
            if label_index.insert(l, i).is_some() {
                return Err(Error::Validation(format!("duplicate vertex label {l}")));
            }
        }
        let mut sets: Vec<std::collections::BTreeSet<Vec<usize>>> = Vec::new();
        let push = |sets: &mut Vec<std::collections::BTreeSet<Vec<usize>>>, s: Vec<usize>| {
            let k = s.len() - 1;
            while sets.len() <= k {
                sets.push(Default::default());
            }
            sets[k].insert(s);
        };
        // every vertex is a 0-simplex
        for i in 0..labels.len() {
            push(&mut sets, vec![i]);
        }
        for t in top {
            let internal: Result<Vec<usize>> = t
                .iter()
                .map(|l| {
                    label_index
                        .get(l)
                        .copied()
                        .ok_or_else(|| Error::Validation(format!("unknown vertex label {l}")))
                })
                .collect();
            let mut s = internal?;
            s.sort_unstable();
            s.dedup();
            if s.len() != t.len() {
                return Err(Error::Validation(format!(
                    "degenerate simplex {t:?} (repeated vertices)"
                )));
            }
            // all sub-tuples are faces
            let n = s.len();
            for mask in 1u64..(1 << n) {
                let face: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                push(&mut sets, face);
            }
        }
        let simplices: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|list| {
                list.iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i))
                    .collect()
            })
            .collect();
        Ok(SimplicialComplex {
            labels,
            label_index,
            simplices,
            index,
        })
    }

    pub fn point() -> Self {
        SimplicialComplex::from_simplices(vec![0], &[]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn vertex_label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn vertex_by_label(&self, label: u64) -> Option<usize> {
        self.label_index.get(&label).copied()
    }

    pub fn n_cells(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn total_cells(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn simplex(&self, k: usize, idx: usize) -> &[usize] {
        &self.simplices[k][idx]
    }

    pub fn simplices_of_dim(&self, k: usize) -> &[Vec<usize>] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn index_of(&self, k: usize, simplex: &[usize]) -> Option<usize> {
        self.index.get(k)?.get(simplex).copied()
    }

    /// External identifier of a simplex: its vertex labels joined by `-`.
    pub fn simplex_id(&self, k: usize, idx: usize) -> String {
        self.simplices[k][idx]
            .iter()
            .map(|&v| self.labels[v].to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Parses an external simplex identifier into (dimension, index).
    pub fn parse_simplex_id(&self, id: &str) -> Result<(usize, usize)> {
        let verts: Result<Vec<usize>> = id
            .split('-')
            .map(|t| {
                let l: u64 = t
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad simplex id `{id}`")))?;
                self.vertex_by_label(l)
                    .ok_or_else(|| Error::Parse(format!("unknown vertex {l} in `{id}`")))
            })
            .collect();
        let mut v = verts?;
        v.sort_unstable();
        let k = v.len() - 1;
        let idx = self
            .index_of(k, &v)
            .ok_or_else(|| Error::Parse(format!("simplex `{id}` not in complex")))?;
        Ok((k, idx))
    }

    /// Faces of the `idx`-th `k`-simplex with incidence signs `(-1)^i`.
    pub fn faces_with_signs(&self, k: usize, idx: usize) -> Vec<(usize, i64)> {
        if k == 0 {
            return Vec::new();
        }
        let s = &self.simplices[k][idx];
        (0..s.len())
            .map(|i| {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v)
                    .collect();
                let fi = self.index_of(k - 1, &face).expect("face closure");
                (fi, if i % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    /// Coboundary matrix `delta_k : C^k -> C^{k+1}`.
    pub fn coboundary_matrix(&self, k: usize) -> SparseMat {
        let rows = self.n_cells(k + 1);
        let cols = self.n_cells(k);
        let mut m = SparseMat::zeros(rows, cols);
        for tau in 0..rows {
            for (face, sign) in self.faces_with_signs(k + 1, tau) {
                m.add_to(tau, face, rat_int(sign));
            }
        }
        m
    }

    /// The full simplicial cochain complex with simplex-id labels.
    pub fn cochain_complex(&self) -> FiniteComplex {
        let d = self.dim();
        let ranks: Vec<usize> = (0..=d).map(|k| self.n_cells(k)).collect();
        let diffs: Vec<SparseMat> = (0..=d).map(|k| self.coboundary_matrix(k)).collect();
        let labels: Vec<Vec<String>> = (0..=d)
            .map(|k| (0..self.n_cells(k)).map(|i| self.simplex_id(k, i)).collect())
            .collect();
        FiniteComplex::new(ranks, diffs)
            .expect("simplicial coboundary squares to zero")
            .with_labels(labels)
    }

    /// Connected components: vertex -> component id (0-based, by least vertex).
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in self.simplices_of_dim(1) {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut c = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = c;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        stack.push(w);
                    }
                }
            }
            c += 1;
        }
        comp
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// JSON form: vertex label list plus simplex lists per dimension. Lower
/// faces are implied; listing them is allowed but redundant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: Vec<u64>,
    #[serde(default)]
    pub simplices: BTreeMap<String, Vec<Vec<u64>>>,
}

impl SimplicialComplex {
    pub fn to_json(&self) -> ComplexJson {
        let mut simplices = BTreeMap::new();
        for k in 1..=self.dim() {
            if self.n_cells(k) == 0 {
                continue;
            }
            let list: Vec<Vec<u64>> = self
                .simplices_of_dim(k)
                .iter()
                .map(|s| s.iter().map(|&v| self.labels[v]).collect())
                .collect();
            simplices.insert(k.to_string(), list);
        }
        ComplexJson {
            vertices: self.labels.clone(),
            simplices,
        }
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        let mut top: Vec<Vec<u64>> = Vec::new();
        for (k, list) in &j.simplices {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension key `{k}`")))?;
            for s in list {
                if s.len() != k + 1 {
                    return Err(Error::Parse(format!(
                        "simplex {s:?} listed under dimension {k}"
                    )));
                }
                top.push(s.clone());
            }
        }
        SimplicialComplex::from_simplices(j.vertices.clone(), &top)
    }
}
