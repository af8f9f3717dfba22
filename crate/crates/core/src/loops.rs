//! The loop orbifold and its surfaces: equivariant simplicial maps from
//! free Gamma-spaces over circles and surfaces into the acted manifold,
//! with the orientation bookkeeping behind transgression and transport.
//!
//! A loop carries a Gamma-invariant fundamental cycle of its total space;
//! a surface carries a relative fundamental chain with
//! `boundary [P] = sum incoming - sum outgoing` under the stored boundary
//! embeddings. Gluing is by explicit simplicial identification.

use std::fmt;

use num_traits::Signed;

use crate::action::{EquivariantComplex, GroupAction, SimplicialMap};
use crate::cochain::{boundary, Chain};
use crate::cycles::{fundamental_cycle, relative_fundamental_chain, OrientationSeed};
use crate::error::{Error, Result};
use crate::group::Homomorphism;
use crate::rat::rat_int;
use crate::simplicial::{sort_sign, SimplicialComplex};

#[derive(Debug, Clone)]
pub enum LoopViolation {
    ActionInvalid { detail: String },
    FreeActionViolation { tau: String, simplex: String },
    NotClosedCircleBundle { detail: String },
    NotTransitiveOnComponents,
    EquivarianceViolation { tau: String, vertex: u64 },
    MapInvalid { detail: String },
    CycleInvalid { detail: String },
}

impl fmt::Display for LoopViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopViolation::ActionInvalid { detail } => write!(f, "invalid action: {detail}"),
            LoopViolation::FreeActionViolation { tau, simplex } => {
                write!(f, "element {tau} fixes simplex {simplex}")
            }
            LoopViolation::NotClosedCircleBundle { detail } => {
                write!(f, "total space is not a closed circle bundle: {detail}")
            }
            LoopViolation::NotTransitiveOnComponents => {
                write!(f, "Gamma is not transitive on components (quotient disconnected)")
            }
            LoopViolation::EquivarianceViolation { tau, vertex } => {
                write!(f, "map is not equivariant at vertex {vertex} under {tau}")
            }
            LoopViolation::MapInvalid { detail } => write!(f, "invalid map: {detail}"),
            LoopViolation::CycleInvalid { detail } => write!(f, "invalid cycle: {detail}"),
        }
    }
}

/// Free simplicial action check: no nonidentity element carries a simplex
/// onto itself (as a set).
fn free_action_violations(action: &GroupAction) -> Vec<LoopViolation> {
    let mut out = Vec::new();
    for tau in action.group.elements() {
        if tau == action.group.identity() {
            continue;
        }
        for k in 0..=action.complex.dim() {
            for idx in 0..action.complex.n_cells(k) {
                let (img, _) = action.simplex_image(tau, k, idx);
                if img == idx {
                    out.push(LoopViolation::FreeActionViolation {
                        tau: action.group.name(tau).to_string(),
                        simplex: action.complex.simplex_id(k, idx),
                    });
                }
            }
        }
    }
    out
}

/// Orbits of components under the action; `Some(reachable)` if transitive
/// from the least component.
fn component_transitive(action: &GroupAction) -> bool {
    let comps = action.complex.components();
    let n_comp = comps.iter().copied().max().map_or(0, |m| m + 1);
    if n_comp == 0 {
        return false;
    }
    // component image under each element
    let mut rep = vec![0usize; n_comp];
    for v in (0..comps.len()).rev() {
        rep[comps[v]] = v;
    }
    let mut reach = vec![false; n_comp];
    reach[0] = true;
    let mut frontier = vec![0usize];
    while let Some(c) = frontier.pop() {
        for g in action.group.elements() {
            let img = comps[action.vertex_maps[g][rep[c]]];
            if !reach[img] {
                reach[img] = true;
                frontier.push(img);
            }
        }
    }
    reach.into_iter().all(|b| b)
}

/// Pushforward of a chain along a simplicial automorphism.
fn push_chain(action: &GroupAction, tau: usize, z: &Chain) -> Chain {
    let mut out = Chain::zero(z.degree);
    for (&i, v) in z.support() {
        let (img, sign) = action.simplex_image(tau, z.degree, i);
        out.add_to(img, v * rat_int(sign));
    }
    out
}

/// Gamma-invariant orientation cycle/chain. Each component is oriented by
/// propagation; a sign per component is then chosen so that every group
/// element carries the chain to itself, starting from the seeded component
/// with `+1` and spreading through the orbit. A sign conflict means some
/// deck transformation reverses orientation.
fn invariant_chain(
    action: &GroupAction,
    d: usize,
    relative: bool,
    seed: Option<OrientationSeed>,
) -> Result<Chain> {
    let base = if relative {
        relative_fundamental_chain(&action.complex, d, seed)?
    } else {
        fundamental_cycle(&action.complex, d, seed)?
    };
    let comps = action.complex.components();
    let comp_of_cell = |idx: usize| comps[action.complex.simplex(d, idx)[0]];
    let n_comp = comps.iter().copied().max().map_or(0, |m| m + 1);
    if n_comp <= 1 {
        return check_invariant(action, base);
    }
    let mut parts: Vec<Chain> = vec![Chain::zero(d); n_comp];
    for (&i, v) in base.support() {
        parts[comp_of_cell(i)].set(i, v.clone());
    }
    let mut eps: Vec<Option<i64>> = vec![None; n_comp];
    for root in 0..n_comp {
        if eps[root].is_some() {
            continue;
        }
        eps[root] = Some(1);
        let mut queue = vec![root];
        while let Some(c) = queue.pop() {
            let e_c = eps[c].unwrap();
            for tau in action.group.elements() {
                let pushed = push_chain(action, tau, &parts[c]);
                let Some((&cell, _)) = pushed.support().next() else {
                    continue;
                };
                let c2 = comp_of_cell(cell);
                let sigma = if pushed == parts[c2] {
                    1
                } else if pushed == parts[c2].neg() {
                    -1
                } else {
                    return Err(Error::NonOrientable(
                        "action does not carry component orientations to each other".into(),
                    ));
                };
                let want = e_c * sigma;
                match eps[c2] {
                    None => {
                        eps[c2] = Some(want);
                        queue.push(c2);
                    }
                    Some(e) if e != want => {
                        return Err(Error::NonOrientable(format!(
                            "element {} reverses the orientation between components",
                            action.group.name(tau)
                        )));
                    }
                    _ => {}
                }
            }
        }
    }
    let mut chain = Chain::zero(d);
    for (c, part) in parts.iter().enumerate() {
        let e = eps[c].unwrap_or(1);
        for (&i, v) in part.support() {
            chain.set(i, v * rat_int(e));
        }
    }
    check_invariant(action, chain)
}

fn check_invariant(action: &GroupAction, chain: Chain) -> Result<Chain> {
    for tau in action.group.elements() {
        if push_chain(action, tau, &chain) != chain {
            return Err(Error::NonOrientable(format!(
                "element {} reverses the orientation chain",
                action.group.name(tau)
            )));
        }
    }
    Ok(chain)
}

/// A loop of the orbifold `[M/G]`: an equivariant map from a free
/// Gamma-space over the circle.
#[derive(Debug, Clone)]
pub struct OrbifoldLoop {
    /// Gamma acting freely on the total space `Q`
    pub gamma_action: GroupAction,
    pub target: EquivariantComplex,
    /// `phi : Q -> M`
    pub map: SimplicialMap,
    /// `phi_# : Gamma -> G`
    pub phi_sharp: Homomorphism,
    /// Gamma-invariant fundamental cycle `[Q]`
    pub cycle: Chain,
}

impl OrbifoldLoop {
    pub fn new(
        gamma_action: GroupAction,
        target: EquivariantComplex,
        vertices: Vec<usize>,
        phi_sharp: Vec<usize>,
        seed: Option<OrientationSeed>,
    ) -> Result<Self> {
        let map = SimplicialMap::new(&gamma_action.complex, target.complex(), vertices)
            .map_err(|e| Error::InvalidLoop(e.to_string()))?;
        let phi_sharp = Homomorphism::new(&gamma_action.group, target.group(), phi_sharp)
            .map_err(|e| Error::InvalidLoop(e.to_string()))?;
        let cycle = invariant_chain(&gamma_action, 1, false, seed)
            .map_err(|e| Error::InvalidLoop(e.to_string()))?;
        let l = OrbifoldLoop {
            gamma_action,
            target,
            map,
            phi_sharp,
            cycle,
        };
        let report = l.validate();
        if let Some(v) = report.first() {
            return Err(Error::InvalidLoop(v.to_string()));
        }
        Ok(l)
    }

    /// Same loop data with a caller-supplied fundamental cycle (used when a
    /// surface dictates the boundary orientation).
    pub fn with_cycle(mut self, cycle: Chain) -> Result<Self> {
        self.cycle = cycle;
        let report = self.validate();
        if let Some(v) = report.first() {
            return Err(Error::InvalidLoop(v.to_string()));
        }
        Ok(self)
    }

    pub fn gamma(&self) -> &crate::group::FiniteGroup {
        &self.gamma_action.group
    }

    pub fn total_space(&self) -> &SimplicialComplex {
        &self.gamma_action.complex
    }

    /// Every structural invariant, with witnesses.
    pub fn validate(&self) -> Vec<LoopViolation> {
        let mut out = Vec::new();
        for v in self.gamma_action.validate() {
            out.push(LoopViolation::ActionInvalid {
                detail: v.to_string(),
            });
        }
        if !out.is_empty() {
            return out;
        }
        out.extend(free_action_violations(&self.gamma_action));
        let q = &self.gamma_action.complex;
        if q.dim() != 1 {
            out.push(LoopViolation::NotClosedCircleBundle {
                detail: format!("total space has dimension {}", q.dim()),
            });
            return out;
        }
        // closed 1-pseudomanifold: every vertex lies on exactly two edges
        let mut degree = vec![0usize; q.vertex_count()];
        for e in q.simplices_of_dim(1) {
            degree[e[0]] += 1;
            degree[e[1]] += 1;
        }
        if let Some(v) = degree.iter().position(|&d| d != 2) {
            out.push(LoopViolation::NotClosedCircleBundle {
                detail: format!("vertex {} lies on {} edges", q.vertex_label(v), degree[v]),
            });
        }
        if !component_transitive(&self.gamma_action) {
            out.push(LoopViolation::NotTransitiveOnComponents);
        }
        // equivariance over phi_sharp
        let tgt = self.target.complex();
        for tau in self.gamma_action.group.elements() {
            let g = self.phi_sharp.apply(tau);
            for x in 0..q.vertex_count() {
                let lhs = self.map.vertices[self.gamma_action.vertex_maps[tau][x]];
                let rhs = self.target.action.vertex_maps[g][self.map.vertices[x]];
                if lhs != rhs {
                    out.push(LoopViolation::EquivarianceViolation {
                        tau: self.gamma_action.group.name(tau).to_string(),
                        vertex: q.vertex_label(x),
                    });
                }
            }
        }
        let _ = tgt;
        // cycle: +-1 on every edge, closed, invariant
        let mut covered = vec![false; q.n_cells(1)];
        for (&i, v) in self.cycle.support() {
            covered[i] = true;
            if v.abs() != rat_int(1) {
                out.push(LoopViolation::CycleInvalid {
                    detail: format!("coefficient {} on edge {}", v, q.simplex_id(1, i)),
                });
            }
        }
        if covered.iter().any(|&c| !c) {
            out.push(LoopViolation::CycleInvalid {
                detail: "cycle does not cover every edge".into(),
            });
        }
        match boundary(q, &self.cycle) {
            Ok(b) if b.is_zero() => {}
            _ => out.push(LoopViolation::CycleInvalid {
                detail: "cycle has nonzero boundary".into(),
            }),
        }
        for tau in self.gamma_action.group.elements() {
            if push_chain(&self.gamma_action, tau, &self.cycle) != self.cycle {
                out.push(LoopViolation::CycleInvalid {
                    detail: format!(
                        "cycle is not invariant under {}",
                        self.gamma_action.group.name(tau)
                    ),
                });
            }
        }
        out
    }

    /// The right G-action on loops: `(phi.h)(x) = phi(x).h` and
    /// `phi_# -> h^{-1} phi_# h`.
    pub fn act(&self, h: usize) -> Result<OrbifoldLoop> {
        let g_action = &self.target.action;
        let vertices: Vec<usize> = self
            .map
            .vertices
            .iter()
            .map(|&v| g_action.vertex_maps[h][v])
            .collect();
        let phi_sharp: Vec<usize> = (0..self.gamma_action.group.order())
            .map(|tau| self.target.group().conj(self.phi_sharp.apply(tau), h))
            .collect();
        let out = OrbifoldLoop {
            gamma_action: self.gamma_action.clone(),
            target: self.target.clone(),
            map: SimplicialMap { vertices },
            phi_sharp: Homomorphism::new(&self.gamma_action.group, self.target.group(), phi_sharp)
                .map_err(|e| Error::InvalidLoop(e.to_string()))?,
            cycle: self.cycle.clone(),
        };
        let report = out.validate();
        if let Some(v) = report.first() {
            return Err(Error::InvalidLoop(v.to_string()));
        }
        Ok(out)
    }

    /// Loops agree as maps: same total space data, map and homomorphism.
    pub fn same_map(&self, other: &OrbifoldLoop) -> bool {
        self.map.vertices == other.map.vertices
            && self.phi_sharp.values() == other.phi_sharp.values()
            && self.cycle == other.cycle
    }
}

/// A boundary circle of a surface: the loop plus the vertex embedding of
/// its total space into the surface total space.
#[derive(Debug, Clone)]
pub struct BoundaryLoop {
    pub loop_: OrbifoldLoop,
    /// loop total-space vertex -> surface total-space vertex
    pub embedding: Vec<usize>,
}

impl BoundaryLoop {
    /// Image of the loop's fundamental cycle in the surface's edge basis.
    fn embedded_cycle(&self, surface: &SimplicialComplex) -> Result<Chain> {
        let q = self.loop_.total_space();
        let mut out = Chain::zero(1);
        for (&i, v) in self.loop_.cycle.support() {
            let e = q.simplex(1, i);
            let img = [self.embedding[e[0]], self.embedding[e[1]]];
            let (sorted, sign) = sort_sign(&img).ok_or_else(|| {
                Error::InvalidSurface("degenerate boundary embedding".into())
            })?;
            let idx = surface.index_of(1, &sorted).ok_or_else(|| {
                Error::InvalidSurface("boundary loop edge missing from surface".into())
            })?;
            out.add_to(idx, v * rat_int(sign));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum SurfaceViolation {
    Loop { which: String, violation: String },
    ActionInvalid { detail: String },
    FreeActionViolation { tau: String, simplex: String },
    NotSurfaceWithBoundary { detail: String },
    EquivarianceViolation { tau: String, vertex: u64 },
    BoundaryEmbedding { which: String, detail: String },
    BoundaryDecomposition { detail: String },
    ChainInvalid { detail: String },
    GammaMismatch { which: String },
}

impl fmt::Display for SurfaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceViolation::Loop { which, violation } => {
                write!(f, "boundary loop {which}: {violation}")
            }
            SurfaceViolation::ActionInvalid { detail } => write!(f, "invalid action: {detail}"),
            SurfaceViolation::FreeActionViolation { tau, simplex } => {
                write!(f, "element {tau} fixes simplex {simplex}")
            }
            SurfaceViolation::NotSurfaceWithBoundary { detail } => {
                write!(f, "not a surface with boundary: {detail}")
            }
            SurfaceViolation::EquivarianceViolation { tau, vertex } => {
                write!(f, "map not equivariant at vertex {vertex} under {tau}")
            }
            SurfaceViolation::BoundaryEmbedding { which, detail } => {
                write!(f, "boundary embedding {which}: {detail}")
            }
            SurfaceViolation::BoundaryDecomposition { detail } => {
                write!(f, "boundary decomposition: {detail}")
            }
            SurfaceViolation::ChainInvalid { detail } => {
                write!(f, "fundamental chain: {detail}")
            }
            SurfaceViolation::GammaMismatch { which } => {
                write!(f, "boundary loop {which} has mismatched Gamma or phi_#")
            }
        }
    }
}

/// A surface of the loop orbifold: an equivariant map from a free
/// Gamma-space over a compact oriented surface with boundary.
#[derive(Debug, Clone)]
pub struct OrbifoldSurface {
    pub gamma_action: GroupAction,
    pub target: EquivariantComplex,
    /// `Phi : P -> M`
    pub map: SimplicialMap,
    pub phi_sharp: Homomorphism,
    pub incoming: Vec<BoundaryLoop>,
    pub outgoing: Vec<BoundaryLoop>,
    /// relative fundamental chain `[P]`
    pub chain: Chain,
}

impl OrbifoldSurface {
    /// Builds a surface, deriving the boundary loop orientations from the
    /// relative fundamental chain so that
    /// `boundary [P] = sum incoming - sum outgoing` holds on the nose.
    /// Each boundary circle is given by its loop data (with an arbitrary
    /// provisional cycle) plus the embedding.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma_action: GroupAction,
        target: EquivariantComplex,
        vertices: Vec<usize>,
        phi_sharp: Vec<usize>,
        incoming: Vec<BoundaryLoop>,
        outgoing: Vec<BoundaryLoop>,
        seed: Option<OrientationSeed>,
    ) -> Result<Self> {
        let map = SimplicialMap::new(&gamma_action.complex, target.complex(), vertices)
            .map_err(|e| Error::InvalidSurface(e.to_string()))?;
        let phi_sharp = Homomorphism::new(&gamma_action.group, target.group(), phi_sharp)
            .map_err(|e| Error::InvalidSurface(e.to_string()))?;
        let chain = invariant_chain(&gamma_action, 2, true, seed)
            .map_err(|e| Error::InvalidSurface(e.to_string()))?;
        let bd = boundary(&gamma_action.complex, &chain)
            .map_err(|e| Error::InvalidSurface(e.to_string()))?;
        // reorient each boundary loop from the induced boundary
        let fix = |bl: BoundaryLoop, sign: i64, complex: &SimplicialComplex| -> Result<BoundaryLoop> {
            let q = bl.loop_.total_space().clone();
            let mut cyc = Chain::zero(1);
            for i in 0..q.n_cells(1) {
                let e = q.simplex(1, i);
                let img = [bl.embedding[e[0]], bl.embedding[e[1]]];
                let (sorted, s) = sort_sign(&img)
                    .ok_or_else(|| Error::InvalidSurface("degenerate embedding".into()))?;
                let idx = complex.index_of(1, &sorted).ok_or_else(|| {
                    Error::InvalidSurface("boundary edge missing from surface".into())
                })?;
                cyc.set(i, bd.get(idx) * rat_int(s * sign));
            }
            let fixed = bl.loop_.clone().with_cycle(cyc)?;
            Ok(BoundaryLoop {
                loop_: fixed,
                embedding: bl.embedding,
            })
        };
        let complex = gamma_action.complex.clone();
        let incoming = incoming
            .into_iter()
            .map(|bl| fix(bl, 1, &complex))
            .collect::<Result<Vec<_>>>()?;
        let outgoing = outgoing
            .into_iter()
            .map(|bl| fix(bl, -1, &complex))
            .collect::<Result<Vec<_>>>()?;
        let s = OrbifoldSurface {
            gamma_action,
            target,
            map,
            phi_sharp,
            incoming,
            outgoing,
            chain,
        };
        let report = s.validate();
        if let Some(v) = report.first() {
            return Err(Error::InvalidSurface(v.to_string()));
        }
        Ok(s)
    }

    pub fn gamma_order(&self) -> usize {
        self.gamma_action.group.order()
    }

    pub fn is_closed(&self) -> bool {
        self.incoming.is_empty() && self.outgoing.is_empty()
    }

    pub fn validate(&self) -> Vec<SurfaceViolation> {
        let mut out = Vec::new();
        for v in self.gamma_action.validate() {
            out.push(SurfaceViolation::ActionInvalid {
                detail: v.to_string(),
            });
        }
        if !out.is_empty() {
            return out;
        }
        for v in free_action_violations(&self.gamma_action) {
            if let LoopViolation::FreeActionViolation { tau, simplex } = v {
                out.push(SurfaceViolation::FreeActionViolation { tau, simplex });
            }
        }
        let p = &self.gamma_action.complex;
        if p.dim() != 2 {
            out.push(SurfaceViolation::NotSurfaceWithBoundary {
                detail: format!("total space has dimension {}", p.dim()),
            });
            return out;
        }
        // every edge on one or two triangles
        let mut cofaces = vec![0usize; p.n_cells(1)];
        for t in 0..p.n_cells(2) {
            for (e, _) in p.faces_with_signs(2, t) {
                cofaces[e] += 1;
            }
        }
        if let Some(e) = cofaces.iter().position(|&c| c == 0 || c > 2) {
            out.push(SurfaceViolation::NotSurfaceWithBoundary {
                detail: format!(
                    "edge {} lies on {} triangles",
                    p.simplex_id(1, e),
                    cofaces[e]
                ),
            });
            return out;
        }
        // equivariance of the map
        for tau in self.gamma_action.group.elements() {
            let g = self.phi_sharp.apply(tau);
            for x in 0..p.vertex_count() {
                let lhs = self.map.vertices[self.gamma_action.vertex_maps[tau][x]];
                let rhs = self.target.action.vertex_maps[g][self.map.vertices[x]];
                if lhs != rhs {
                    out.push(SurfaceViolation::EquivarianceViolation {
                        tau: self.gamma_action.group.name(tau).to_string(),
                        vertex: p.vertex_label(x),
                    });
                }
            }
        }
        // chain: +-1 on every triangle, invariant
        let mut covered = vec![false; p.n_cells(2)];
        for (&i, v) in self.chain.support() {
            covered[i] = true;
            if v.abs() != rat_int(1) {
                out.push(SurfaceViolation::ChainInvalid {
                    detail: format!("coefficient {v} on triangle {}", p.simplex_id(2, i)),
                });
            }
        }
        if covered.iter().any(|&c| !c) {
            out.push(SurfaceViolation::ChainInvalid {
                detail: "chain does not cover every triangle".into(),
            });
        }
        for tau in self.gamma_action.group.elements() {
            if push_chain(&self.gamma_action, tau, &self.chain) != self.chain {
                out.push(SurfaceViolation::ChainInvalid {
                    detail: format!(
                        "chain not invariant under {}",
                        self.gamma_action.group.name(tau)
                    ),
                });
            }
        }
        // boundary loops: validity, Gamma and phi_# agreement, embeddings
        let bd = match boundary(p, &self.chain) {
            Ok(b) => b,
            Err(e) => {
                out.push(SurfaceViolation::ChainInvalid {
                    detail: e.to_string(),
                });
                return out;
            }
        };
        let mut expected = bd.clone();
        let mut seen_edges: std::collections::BTreeSet<usize> = Default::default();
        for (list, sign, tag) in [
            (&self.incoming, 1i64, "incoming"),
            (&self.outgoing, -1i64, "outgoing"),
        ] {
            for (n, bl) in list.iter().enumerate() {
                let which = format!("{tag} #{n}");
                for v in bl.loop_.validate() {
                    out.push(SurfaceViolation::Loop {
                        which: which.clone(),
                        violation: v.to_string(),
                    });
                }
                if bl.loop_.gamma() != &self.gamma_action.group
                    || bl.loop_.phi_sharp.values() != self.phi_sharp.values()
                {
                    out.push(SurfaceViolation::GammaMismatch {
                        which: which.clone(),
                    });
                }
                let q = bl.loop_.total_space();
                if bl.embedding.len() != q.vertex_count() {
                    out.push(SurfaceViolation::BoundaryEmbedding {
                        which: which.clone(),
                        detail: "embedding length mismatch".into(),
                    });
                    continue;
                }
                // equivariant embedding commuting with the maps to M
                for tau in self.gamma_action.group.elements() {
                    for x in 0..q.vertex_count() {
                        let lhs = bl.embedding[bl.loop_.gamma_action.vertex_maps[tau][x]];
                        let rhs = self.gamma_action.vertex_maps[tau][bl.embedding[x]];
                        if lhs != rhs {
                            out.push(SurfaceViolation::BoundaryEmbedding {
                                which: which.clone(),
                                detail: format!("not equivariant at vertex {x}"),
                            });
                        }
                    }
                }
                for x in 0..q.vertex_count() {
                    if self.map.vertices[bl.embedding[x]] != bl.loop_.map.vertices[x] {
                        out.push(SurfaceViolation::BoundaryEmbedding {
                            which: which.clone(),
                            detail: format!("map disagrees at vertex {x}"),
                        });
                    }
                }
                match bl.embedded_cycle(p) {
                    Ok(c) => {
                        for (&e, v) in c.support() {
                            if !seen_edges.insert(e) {
                                out.push(SurfaceViolation::BoundaryDecomposition {
                                    detail: format!(
                                        "edge {} covered by two boundary loops",
                                        p.simplex_id(1, e)
                                    ),
                                });
                            }
                            expected.add_to(e, -(v * rat_int(sign)));
                        }
                    }
                    Err(e) => out.push(SurfaceViolation::BoundaryEmbedding {
                        which: which.clone(),
                        detail: e.to_string(),
                    }),
                }
            }
        }
        if !expected.is_zero() {
            out.push(SurfaceViolation::BoundaryDecomposition {
                detail: "boundary of [P] differs from incoming - outgoing".into(),
            });
        }
        out
    }
}

/// Checks that `ident` is a Gamma-equivariant orientation-compatible
/// simplicial isomorphism between the total spaces of an outgoing and an
/// incoming loop, commuting with the maps to `M` and matching `phi_#`.
fn check_gluing_map(out_bl: &BoundaryLoop, in_bl: &BoundaryLoop, ident: &[usize]) -> Result<()> {
    let q_out = out_bl.loop_.total_space();
    let q_in = in_bl.loop_.total_space();
    if out_bl.loop_.gamma() != in_bl.loop_.gamma()
        || out_bl.loop_.phi_sharp.values() != in_bl.loop_.phi_sharp.values()
    {
        return Err(Error::BoundaryMismatch(
            "gluing loops carry different Gamma data".into(),
        ));
    }
    if ident.len() != q_out.vertex_count() {
        return Err(Error::BoundaryMismatch("identification length mismatch".into()));
    }
    let mut seen = vec![false; q_in.vertex_count()];
    for &v in ident {
        if v >= q_in.vertex_count() || seen[v] {
            return Err(Error::BoundaryMismatch(
                "identification is not a vertex bijection".into(),
            ));
        }
        seen[v] = true;
    }
    if q_out.vertex_count() != q_in.vertex_count() {
        return Err(Error::BoundaryMismatch("circle lengths differ".into()));
    }
    // simplicial in both directions is implied for degree-1 bijections that
    // carry edges to edges
    let mut pushed_cycle = Chain::zero(1);
    for (&i, val) in out_bl.loop_.cycle.support() {
        let e = q_out.simplex(1, i);
        let img = [ident[e[0]], ident[e[1]]];
        let (sorted, s) =
            sort_sign(&img).ok_or_else(|| Error::BoundaryMismatch("degenerate gluing".into()))?;
        let idx = q_in
            .index_of(1, &sorted)
            .ok_or_else(|| Error::BoundaryMismatch("gluing does not carry edges to edges".into()))?;
        pushed_cycle.add_to(idx, val * rat_int(s));
    }
    if pushed_cycle != in_bl.loop_.cycle {
        return Err(Error::BoundaryMismatch(
            "gluing reverses the boundary orientation".into(),
        ));
    }
    for tau in 0..out_bl.loop_.gamma().order() {
        for x in 0..q_out.vertex_count() {
            let lhs = ident[out_bl.loop_.gamma_action.vertex_maps[tau][x]];
            let rhs = in_bl.loop_.gamma_action.vertex_maps[tau][ident[x]];
            if lhs != rhs {
                return Err(Error::BoundaryMismatch(
                    "gluing is not Gamma-equivariant".into(),
                ));
            }
        }
    }
    for x in 0..q_out.vertex_count() {
        if out_bl.loop_.map.vertices[x] != in_bl.loop_.map.vertices[ident[x]] {
            return Err(Error::BoundaryMismatch(
                "gluing does not commute with the maps to M".into(),
            ));
        }
    }
    Ok(())
}

/// Relabeling helper: build the glued complex and data from two surfaces
/// and the vertex identification `merge: s2-vertex -> new id`.
fn assemble_glued(
    s1: &OrbifoldSurface,
    s2: &OrbifoldSurface,
    out_index: usize,
    in_index: usize,
    ident: &[usize],
) -> Result<OrbifoldSurface> {
    let p1 = &s1.gamma_action.complex;
    let p2 = &s2.gamma_action.complex;
    let out_bl = &s1.outgoing[out_index];
    let in_bl = &s2.incoming[in_index];
    // s2 vertex -> new vertex id
    let n1 = p1.vertex_count();
    let mut merge: Vec<Option<usize>> = vec![None; p2.vertex_count()];
    for (x, &q_in_v) in ident.iter().enumerate() {
        // out-loop vertex x is identified with in-loop vertex q_in_v
        merge[in_bl.embedding[q_in_v]] = Some(out_bl.embedding[x]);
    }
    let mut next = n1;
    let mut s2_map = Vec::with_capacity(p2.vertex_count());
    for m in merge.iter() {
        match m {
            Some(v) => s2_map.push(*v),
            None => {
                s2_map.push(next);
                next += 1;
            }
        }
    }
    // labels: keep s1 labels, shift fresh s2 labels past the s1 range
    let mut labels: Vec<u64> = (0..n1).map(|v| p1.vertex_label(v)).collect();
    let max1 = labels.iter().copied().max().unwrap_or(0);
    let mut fresh_labels: Vec<u64> = Vec::new();
    for v in 0..p2.vertex_count() {
        if s2_map[v] >= n1 {
            fresh_labels.push(max1 + 1 + p2.vertex_label(v));
        }
    }
    labels.extend(fresh_labels);
    let relabel = |v_new: usize, labels: &Vec<u64>| labels[v_new];
    let mut tris: Vec<Vec<u64>> = Vec::new();
    for t in 0..p1.n_cells(2) {
        tris.push(p1.simplex(2, t).iter().map(|&v| relabel(v, &labels)).collect());
    }
    for t in 0..p2.n_cells(2) {
        tris.push(
            p2.simplex(2, t)
                .iter()
                .map(|&v| relabel(s2_map[v], &labels))
                .collect(),
        );
    }
    let glued = SimplicialComplex::from_simplices(labels.clone(), &tris)?;
    if glued.n_cells(2) != p1.n_cells(2) + p2.n_cells(2) {
        return Err(Error::BoundaryMismatch(
            "gluing identifies interior triangles".into(),
        ));
    }
    // translate an old vertex id to the glued complex's internal id
    let tr1: Vec<usize> = (0..n1)
        .map(|v| glued.vertex_by_label(labels[v]).unwrap())
        .collect();
    let tr2: Vec<usize> = (0..p2.vertex_count())
        .map(|v| glued.vertex_by_label(labels[s2_map[v]]).unwrap())
        .collect();
    // Gamma action and map on the glued complex
    let gamma = s1.gamma_action.group.clone();
    let mut vertex_maps = Vec::new();
    for tau in gamma.elements() {
        let mut m = vec![0usize; glued.vertex_count()];
        for v in 0..n1 {
            m[tr1[v]] = tr1[s1.gamma_action.vertex_maps[tau][v]];
        }
        for v in 0..p2.vertex_count() {
            m[tr2[v]] = tr2[s2.gamma_action.vertex_maps[tau][v]];
        }
        vertex_maps.push(m);
    }
    let mut phi = vec![0usize; glued.vertex_count()];
    for v in 0..n1 {
        phi[tr1[v]] = s1.map.vertices[v];
    }
    for v in 0..p2.vertex_count() {
        phi[tr2[v]] = s2.map.vertices[v];
    }
    let action = GroupAction::new(glued, gamma, vertex_maps)
        .map_err(|e| Error::BoundaryMismatch(e.to_string()))?;
    // boundary loops: everything except the glued pair
    let carry = |bl: &BoundaryLoop, tr: &[usize]| BoundaryLoop {
        loop_: bl.loop_.clone(),
        embedding: bl.embedding.iter().map(|&v| tr[v]).collect(),
    };
    let mut incoming: Vec<BoundaryLoop> = s1.incoming.iter().map(|b| carry(b, &tr1)).collect();
    incoming.extend(
        s2.incoming
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != in_index)
            .map(|(_, b)| carry(b, &tr2)),
    );
    let mut outgoing: Vec<BoundaryLoop> = s1
        .outgoing
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != out_index)
        .map(|(_, b)| carry(b, &tr1))
        .collect();
    outgoing.extend(s2.outgoing.iter().map(|b| carry(b, &tr2)));
    // fundamental chain: the sum of both, in the new triangle indexing
    let mut chain = Chain::zero(2);
    let complex = action.complex.clone();
    for (&t, v) in s1.chain.support() {
        let img: Vec<usize> = p1.simplex(2, t).iter().map(|&x| tr1[x]).collect();
        let (sorted, sign) = sort_sign(&img).expect("vertex maps are injective");
        let idx = complex.index_of(2, &sorted).expect("triangle present");
        chain.add_to(idx, v * rat_int(sign));
    }
    for (&t, v) in s2.chain.support() {
        let img: Vec<usize> = p2.simplex(2, t).iter().map(|&x| tr2[x]).collect();
        let (sorted, sign) = sort_sign(&img).expect("vertex maps are injective");
        let idx = complex.index_of(2, &sorted).expect("triangle present");
        chain.add_to(idx, v * rat_int(sign));
    }
    let s = OrbifoldSurface {
        gamma_action: action,
        target: s1.target.clone(),
        map: SimplicialMap { vertices: phi },
        phi_sharp: s1.phi_sharp.clone(),
        incoming,
        outgoing,
        chain,
    };
    let report = s.validate();
    if let Some(v) = report.first() {
        return Err(Error::BoundaryMismatch(format!("glued surface invalid: {v}")));
    }
    Ok(s)
}

/// Concatenation: glue the `out_index`-th outgoing circle of `s1` to the
/// `in_index`-th incoming circle of `s2` along `ident` (a vertex map from
/// the outgoing loop's total space to the incoming loop's).
pub fn glue(
    s1: &OrbifoldSurface,
    out_index: usize,
    s2: &OrbifoldSurface,
    in_index: usize,
    ident: &[usize],
) -> Result<OrbifoldSurface> {
    if out_index >= s1.outgoing.len() || in_index >= s2.incoming.len() {
        return Err(Error::BoundaryMismatch("boundary index out of range".into()));
    }
    if s1.gamma_action.group != s2.gamma_action.group
        || s1.phi_sharp.values() != s2.phi_sharp.values()
    {
        return Err(Error::BoundaryMismatch(
            "surfaces carry different Gamma data".into(),
        ));
    }
    check_gluing_map(&s1.outgoing[out_index], &s2.incoming[in_index], ident)?;
    assemble_glued(s1, s2, out_index, in_index, ident)
}

/// Self-gluing of an outgoing to an incoming circle of the same surface.
pub fn self_glue(
    s: &OrbifoldSurface,
    out_index: usize,
    in_index: usize,
    ident: &[usize],
) -> Result<OrbifoldSurface> {
    if out_index >= s.outgoing.len() || in_index >= s.incoming.len() {
        return Err(Error::BoundaryMismatch("boundary index out of range".into()));
    }
    let out_bl = &s.outgoing[out_index];
    let in_bl = &s.incoming[in_index];
    check_gluing_map(out_bl, in_bl, ident)?;
    let p = &s.gamma_action.complex;
    // union-find style relabel: in-loop vertices collapse onto out-loop ones
    let mut merge: Vec<usize> = (0..p.vertex_count()).collect();
    for (x, &q_in_v) in ident.iter().enumerate() {
        let from = in_bl.embedding[q_in_v];
        let to = out_bl.embedding[x];
        if from == to {
            return Err(Error::BoundaryMismatch(
                "self-gluing identifies a circle with itself".into(),
            ));
        }
        merge[from] = to;
    }
    // resolve chains (no deep chains expected, but be safe)
    let resolve = |mut v: usize, merge: &[usize]| {
        while merge[v] != v {
            v = merge[v];
        }
        v
    };
    let mut labels: Vec<u64> = Vec::new();
    let mut new_id: Vec<Option<usize>> = vec![None; p.vertex_count()];
    let mut count = 0usize;
    for v in 0..p.vertex_count() {
        if resolve(v, &merge) == v {
            new_id[v] = Some(count);
            labels.push(p.vertex_label(v));
            count += 1;
        }
    }
    let idx_of = |v: usize, new_id: &Vec<Option<usize>>| new_id[resolve(v, &merge)].unwrap();
    let mut tris: Vec<Vec<u64>> = Vec::new();
    for t in 0..p.n_cells(2) {
        tris.push(
            p.simplex(2, t)
                .iter()
                .map(|&v| labels[idx_of(v, &new_id)])
                .collect(),
        );
    }
    let glued = SimplicialComplex::from_simplices(labels.clone(), &tris)?;
    if glued.n_cells(2) != p.n_cells(2) {
        return Err(Error::BoundaryMismatch(
            "self-gluing identifies interior triangles".into(),
        ));
    }
    let tr: Vec<usize> = (0..p.vertex_count())
        .map(|v| glued.vertex_by_label(labels[idx_of(v, &new_id)]).unwrap())
        .collect();
    let gamma = s.gamma_action.group.clone();
    let mut vertex_maps = Vec::new();
    for tau in gamma.elements() {
        let mut m = vec![usize::MAX; glued.vertex_count()];
        for v in 0..p.vertex_count() {
            let src = tr[v];
            let dst = tr[s.gamma_action.vertex_maps[tau][v]];
            if m[src] != usize::MAX && m[src] != dst {
                return Err(Error::BoundaryMismatch(
                    "self-gluing is not compatible with the Gamma action".into(),
                ));
            }
            m[src] = dst;
        }
        vertex_maps.push(m);
    }
    let mut phi = vec![usize::MAX; glued.vertex_count()];
    for v in 0..p.vertex_count() {
        let dst = self_map_check(&mut phi, tr[v], s.map.vertices[v])?;
        let _ = dst;
    }
    let action = GroupAction::new(glued, gamma, vertex_maps)
        .map_err(|e| Error::BoundaryMismatch(e.to_string()))?;
    let carry = |bl: &BoundaryLoop| BoundaryLoop {
        loop_: bl.loop_.clone(),
        embedding: bl.embedding.iter().map(|&v| tr[v]).collect(),
    };
    let incoming: Vec<BoundaryLoop> = s
        .incoming
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != in_index)
        .map(|(_, b)| carry(b))
        .collect();
    let outgoing: Vec<BoundaryLoop> = s
        .outgoing
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != out_index)
        .map(|(_, b)| carry(b))
        .collect();
    let complex = action.complex.clone();
    let mut chain = Chain::zero(2);
    for (&t, v) in s.chain.support() {
        let img: Vec<usize> = p.simplex(2, t).iter().map(|&x| tr[x]).collect();
        let (sorted, sign) = sort_sign(&img)
            .ok_or_else(|| Error::BoundaryMismatch("gluing degenerates a triangle".into()))?;
        let idx = complex.index_of(2, &sorted).expect("triangle present");
        chain.add_to(idx, v * rat_int(sign));
    }
    let out = OrbifoldSurface {
        gamma_action: action,
        target: s.target.clone(),
        map: SimplicialMap { vertices: phi },
        phi_sharp: s.phi_sharp.clone(),
        incoming,
        outgoing,
        chain,
    };
    let report = out.validate();
    if let Some(v) = report.first() {
        return Err(Error::BoundaryMismatch(format!(
            "self-glued surface invalid: {v}"
        )));
    }
    Ok(out)
}

fn self_map_check(phi: &mut [usize], idx: usize, val: usize) -> Result<usize> {
    if phi[idx] != usize::MAX && phi[idx] != val {
        return Err(Error::BoundaryMismatch(
            "self-gluing does not commute with the map to M".into(),
        ));
    }
    phi[idx] = val;
    Ok(val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::library;
    use crate::shapes;

    use crate::library::twisted_loop;

    #[test]
    fn constant_loop_on_a_point_orbifold() {
        let target = library::pt_mod_z2();
        let q = shapes::circle(3);
        let gamma = GroupAction::trivial(q);
        let l = OrbifoldLoop::new(gamma, target, vec![0, 0, 0], vec![0], None).unwrap();
        assert!(l.validate().is_empty());
    }

    #[test]
    fn hexagon_double_cover_loop() {
        // Gamma = Z2 rotating a hexagon by 3; target circle(6) with the
        // antipode; phi the identity, phi_# the identity homomorphism
        let m = shapes::circle(6);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![(0..6).collect(), (0..6).map(|v| (v + 3) % 6).collect()];
        let target = EquivariantComplex::new(GroupAction::new(m, g, maps).unwrap());
        let q = shapes::circle(6);
        let gq = FiniteGroup::cyclic(2);
        let qmaps = vec![(0..6).collect(), (0..6).map(|v| (v + 3) % 6).collect()];
        let gamma = GroupAction::new(q, gq, qmaps).unwrap();
        let l = OrbifoldLoop::new(gamma, target, (0..6).collect(), vec![0, 1], None).unwrap();
        assert!(l.validate().is_empty());
        assert!(!l.cycle.is_zero());
    }

    #[test]
    fn fixed_vertex_breaks_freeness() {
        let m = shapes::circle(6);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![(0..6).collect(), (0..6).map(|v| (v + 3) % 6).collect()];
        let target = EquivariantComplex::new(GroupAction::new(m.clone(), g.clone(), maps).unwrap());
        // a Z2 "action" on the hexagon fixing vertices 0 and 3: swap 1,2 and 4,5
        let q = shapes::circle(6);
        let bad = vec![(0..6).collect::<Vec<_>>(), vec![0, 2, 1, 3, 5, 4]];
        match GroupAction::new(q, g, bad) {
            Ok(action) => {
                let l = OrbifoldLoop {
                    gamma_action: action.clone(),
                    target,
                    map: SimplicialMap {
                        vertices: (0..6).collect(),
                    },
                    phi_sharp: Homomorphism::new(
                        &action.group,
                        &FiniteGroup::cyclic(2),
                        vec![0, 1],
                    )
                    .unwrap(),
                    cycle: fundamental_cycle(&action.complex, 1, None).unwrap(),
                };
                assert!(l
                    .validate()
                    .iter()
                    .any(|v| matches!(v, LoopViolation::FreeActionViolation { .. })));
            }
            Err(_) => {
                // the swap is not even a simplicial automorphism of the
                // hexagon, which is an acceptable earlier failure
            }
        }
    }

    #[test]
    fn act_on_loop_is_a_right_action() {
        let target = library::torus_z2();
        let l = twisted_loop(&target, 0);
        let g_count = target.group().order();
        for h in 0..g_count {
            for h2 in 0..g_count {
                let lhs = l.act(h).unwrap().act(h2).unwrap();
                let rhs = l.act(target.group().mul(h, h2)).unwrap();
                assert!(lhs.same_map(&rhs));
            }
        }
        let e = target.group().identity();
        assert!(l.act(e).unwrap().same_map(&l));
    }

    use crate::library::torus_cylinder;

    #[test]
    fn cylinder_surface_validates() {
        let target = library::torus_z2();
        let s = torus_cylinder(&target, 0, 1);
        assert!(s.validate().is_empty());
        assert_eq!(s.chain.support().count(), 6);
    }

    #[test]
    fn glue_two_cylinders() {
        let target = library::torus_z2();
        let s1 = torus_cylinder(&target, 0, 1);
        let s2 = torus_cylinder(&target, 1, 1);
        let glued = glue(&s1, 0, &s2, 0, &[0, 1, 2]).unwrap();
        assert!(glued.validate().is_empty());
        assert_eq!(glued.chain.support().count(), 12);
        assert_eq!(glued.incoming.len(), 1);
        assert_eq!(glued.outgoing.len(), 1);
    }

    #[test]
    fn self_glue_full_wrap_cylinder_into_torus() {
        let target = library::torus_z2();
        let s = torus_cylinder(&target, 0, 4);
        // ends are both the column-0 meridian
        let closed = self_glue(&s, 0, 0, &[0, 1, 2]).unwrap();
        assert!(closed.is_closed());
        assert!(closed.validate().is_empty());
        assert_eq!(closed.chain.support().count(), 24);
    }

    #[test]
    fn gluing_rejects_mismatched_orientation() {
        let target = library::torus_z2();
        let s1 = torus_cylinder(&target, 0, 1);
        let s2 = torus_cylinder(&target, 1, 1);
        // reflecting the circle reverses orientation
        let err = glue(&s1, 0, &s2, 0, &[0, 2, 1]);
        assert!(err.is_err());
    }

    #[test]
    fn identity_torus_closed_surface() {
        let target = library::torus_z2();
        let p = shapes::grid_torus(4, 3);
        let gamma = GroupAction::trivial(p);
        let s = OrbifoldSurface::new(
            gamma,
            target.clone(),
            (0..12).collect(),
            vec![0],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        assert!(s.is_closed());
        assert!(s.validate().is_empty());
    }

    #[test]
    fn twisted_torus_closed_surface() {
        // P = T^2 with Gamma = Z2 acting by the deck shift, Phi = id,
        // phi_# = id: the twisted-sector torus
        let target = library::torus_z2();
        let p = shapes::grid_torus(4, 3);
        let g = FiniteGroup::cyclic(2);
        let maps = vec![shapes::torus_shift(4, 3, 0), shapes::torus_shift(4, 3, 2)];
        let gamma = GroupAction::new(p, g, maps).unwrap();
        let s = OrbifoldSurface::new(
            gamma,
            target.clone(),
            (0..12).collect(),
            vec![0, 1],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        assert!(s.validate().is_empty());
    }
}
