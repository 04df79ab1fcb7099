//! Element and node reordering strategies.
//!
//! Four element-ordering strategies are supported: `none` keeps the source
//! order, `conn` and `dist` are greedy node walks (by connection count and
//! by distance to a reference point), and `sfc` buckets element centroids
//! into a bounding-box grid walked along a generalized Hilbert curve. The
//! SFC strategy re-numbers nodes afterwards in element-traversal order,
//! sorted by ascending degree within each element's group of new nodes.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SemError};
use crate::mesh::{color_elements, SemMesh};
use crate::sfc::gilbert_curve;

/// Position `i` holds the old index placed at new position `i`.
pub type Permutation = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    None,
    Conn,
    Dist,
    Sfc,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::None, Strategy::Conn, Strategy::Dist, Strategy::Sfc];

    pub fn token(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Conn => "conn",
            Strategy::Dist => "dist",
            Strategy::Sfc => "sfc",
        }
    }
}

impl FromStr for Strategy {
    type Err = SemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Strategy::None),
            "conn" => Ok(Strategy::Conn),
            "dist" => Ok(Strategy::Dist),
            "sfc" => Ok(Strategy::Sfc),
            other => Err(SemError::Config(format!(
                "unknown strategy '{other}' (expected none|conn|dist|sfc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SfcGrid {
    pub w_b: u32,
    pub h_b: u32,
    pub w_s: f64,
    pub h_s: f64,
    pub origin: [f64; 2],
}

/// Bounding-box grid per the reordering recipe: w_b = ceil(sqrt(n_e)) and
/// h_b = ceil(sqrt(n_e)/r) with r the bbox aspect ratio; `alt_proportions`
/// swaps in w_b = ceil(sqrt(n_e)*r), h_b = ceil(sqrt(n_e)).
pub fn sfc_grid(mesh: &SemMesh, alt_proportions: bool) -> SfcGrid {
    let n_e = mesh.num_elements() as f64;
    let bb = mesh.bbox;
    let r = if bb.height > 0.0 && bb.width > 0.0 { bb.width / bb.height } else { 1.0 };
    let (wf, hf) = if alt_proportions {
        (n_e.sqrt() * r, n_e.sqrt())
    } else {
        (n_e.sqrt(), n_e.sqrt() / r)
    };
    let w_b = (wf.ceil() as u32).max(1);
    let h_b = (hf.ceil() as u32).max(1);
    SfcGrid {
        w_b,
        h_b,
        w_s: if bb.width > 0.0 { w_b as f64 / bb.width } else { 0.0 },
        h_s: if bb.height > 0.0 { h_b as f64 / bb.height } else { 0.0 },
        origin: [bb.x0, bb.x1],
    }
}

impl SfcGrid {
    pub fn cell_of(&self, centroid: [f64; 2]) -> (u32, u32) {
        let ix = ((centroid[0] - self.origin[0]) * self.w_s) as u32;
        let iy = ((centroid[1] - self.origin[1]) * self.h_s) as u32;
        (ix.min(self.w_b - 1), iy.min(self.h_b - 1))
    }
}

/// SFC element ordering: walk the generalized Hilbert curve over the
/// bounding-box grid and emit each cell's elements in their prior relative
/// order.
pub fn order_elements_hilbert(mesh: &SemMesh) -> Result<Permutation> {
    order_elements_hilbert_with(mesh, false).map(|(p, _)| p)
}

pub fn order_elements_hilbert_with(
    mesh: &SemMesh,
    alt_proportions: bool,
) -> Result<(Permutation, SfcGrid)> {
    let n_e = mesh.num_elements();
    if n_e == 0 {
        return Err(SemError::EmptyMesh);
    }
    let grid = sfc_grid(mesh, alt_proportions);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); (grid.w_b * grid.h_b) as usize];
    for e in 0..n_e {
        let (ix, iy) = grid.cell_of(mesh.centroid(e));
        buckets[(iy * grid.w_b + ix) as usize].push(e as u32);
    }
    let path = gilbert_curve(grid.w_b, grid.h_b)?;
    let mut perm = Vec::with_capacity(n_e);
    for &(ix, iy) in &path.cells {
        perm.extend_from_slice(&buckets[(iy * grid.w_b + ix) as usize]);
    }
    debug_assert_eq!(perm.len(), n_e);
    Ok((perm, grid))
}

enum WalkCriterion<'a> {
    Degree(&'a [u32]),
    Distance(Vec<f64>),
}

impl WalkCriterion<'_> {
    fn score(&self, nu: usize) -> f64 {
        match self {
            WalkCriterion::Degree(deg) => deg[nu] as f64,
            WalkCriterion::Distance(d) => d[nu],
        }
    }
}

/// Greedy node walk shared by the `conn` and `dist` strategies: start at the
/// criterion-global minimizer, repeatedly move to the unvisited neighbor
/// minimizing the criterion (ties by lowest node index), restarting at the
/// unvisited global minimizer when stuck. Emits elements in first-containing
/// order as nodes are visited.
fn node_walk(mesh: &SemMesh, criterion: WalkCriterion) -> (Permutation, Permutation) {
    let n = mesh.num_global_nodes();
    let n_e = mesh.num_elements();
    let (aoff, adj) = mesh.node_adjacency();
    let (noff, nelems) = mesh.node_elements();

    // Nodes ranked by (criterion, index) for the start and restart rule.
    let mut ranked: Vec<u32> = (0..n as u32).collect();
    ranked.sort_by(|&a, &b| {
        criterion
            .score(a as usize)
            .partial_cmp(&criterion.score(b as usize))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rank_cursor = 0usize;

    let mut node_perm = Vec::with_capacity(n);
    let mut elem_perm = Vec::with_capacity(n_e);
    let mut node_seen = vec![false; n];
    let mut elem_seen = vec![false; n_e];

    let mut current: Option<usize> = None;
    while node_perm.len() < n {
        let nu = match current {
            Some(nu) => nu,
            None => {
                while node_seen[ranked[rank_cursor] as usize] {
                    rank_cursor += 1;
                }
                ranked[rank_cursor] as usize
            }
        };
        node_seen[nu] = true;
        node_perm.push(nu as u32);
        for &e in &nelems[noff[nu] as usize..noff[nu + 1] as usize] {
            if !elem_seen[e as usize] {
                elem_seen[e as usize] = true;
                elem_perm.push(e);
            }
        }
        // Best unvisited neighbor.
        let mut best: Option<(f64, u32)> = None;
        for &nb in &adj[aoff[nu] as usize..aoff[nu + 1] as usize] {
            if node_seen[nb as usize] {
                continue;
            }
            let s = criterion.score(nb as usize);
            if best.map_or(true, |(bs, bi)| s < bs || (s == bs && nb < bi)) {
                best = Some((s, nb));
            }
        }
        current = best.map(|(_, nb)| nb as usize);
    }
    (elem_perm, node_perm)
}

pub fn order_by_node_connectivity(mesh: &SemMesh) -> (Permutation, Permutation) {
    node_walk(mesh, WalkCriterion::Degree(&mesh.node_degree))
}

pub fn order_by_node_distance(mesh: &SemMesh, reference: [f64; 2]) -> (Permutation, Permutation) {
    let distances = mesh
        .global_nodes
        .iter()
        .map(|p| (p[0] - reference[0]).hypot(p[1] - reference[1]))
        .collect();
    node_walk(mesh, WalkCriterion::Distance(distances))
}

/// Default reference point for the `dist` strategy: lower-left bbox corner.
pub fn default_reference(mesh: &SemMesh) -> [f64; 2] {
    [mesh.bbox.x0, mesh.bbox.x1]
}

/// Node renumbering that follows the (already final) element order: per
/// element, the not-yet-numbered nodes are appended sorted by ascending
/// degree, ties by ascending old index.
pub fn order_nodes_elementwise(mesh: &SemMesh) -> Permutation {
    let n = mesh.num_global_nodes();
    let npe = mesh.nodes_per_element();
    let mut perm = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut group: Vec<u32> = Vec::with_capacity(npe);
    for e in 0..mesh.num_elements() {
        group.clear();
        for &nu in mesh.element_nodes(e) {
            if !seen[nu as usize] {
                seen[nu as usize] = true;
                group.push(nu);
            }
        }
        group.sort_by_key(|&nu| (mesh.node_degree[nu as usize], nu));
        perm.extend_from_slice(&group);
    }
    perm
}

pub fn identity(n: usize) -> Permutation {
    (0..n as u32).collect()
}

/// Seeded random element permutation (benchmark baseline).
pub fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut perm = identity(n);
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

pub fn validate(perm: &[u32], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(SemError::InvalidPermutation { expected: n, got: perm.len() });
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i as usize >= n || seen[i as usize] {
            return Err(SemError::InvalidPermutation { expected: n, got: perm.len() });
        }
        seen[i as usize] = true;
    }
    Ok(())
}

/// Inverse permutation: maps old index -> new index.
pub fn invert(perm: &[u32]) -> Permutation {
    let mut inv = vec![0u32; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old as usize] = new as u32;
    }
    inv
}

/// Rebuild the mesh with elements and nodes relabeled. Physical content is
/// unchanged; greedy coloring is re-run so it reflects the new order.
pub fn apply_ordering(mesh: &SemMesh, ep: &[u32], np: &[u32]) -> Result<SemMesh> {
    let n_e = mesh.num_elements();
    let n = mesh.num_global_nodes();
    validate(ep, n_e)?;
    validate(np, n)?;
    let npe = mesh.nodes_per_element();
    let node_inv = invert(np);

    let mut raw = mesh.raw.clone();
    raw.triangles = ep.iter().map(|&old| mesh.raw.triangles[old as usize]).collect();
    raw.region_tags = ep.iter().map(|&old| mesh.raw.region_tags[old as usize]).collect();

    let geometry = ep.iter().map(|&old| mesh.geometry[old as usize]).collect();
    let global_nodes = np.iter().map(|&old| mesh.global_nodes[old as usize]).collect();
    let node_degree = np.iter().map(|&old| mesh.node_degree[old as usize]).collect();

    let mut mu = vec![0u32; mesh.mu.len()];
    for (new_e, &old_e) in ep.iter().enumerate() {
        for p in 0..npe {
            mu[new_e * npe + p] = node_inv[mesh.mu[old_e as usize * npe + p] as usize];
        }
    }

    let mut out = SemMesh {
        raw,
        order: mesh.order,
        refelem: crate::refelem::build_reference_element(mesh.order)?,
        global_nodes,
        mu,
        geometry,
        colors: Vec::new(),
        num_colors: 0,
        bbox: mesh.bbox,
        node_degree,
    };
    let (colors, num_colors) = color_elements(&out);
    out.colors = colors;
    out.num_colors = num_colors;
    Ok(out)
}

/// Apply a full strategy, returning the reordered mesh, the permutations
/// used, and the SFC grid when applicable.
pub fn order_mesh(mesh: &SemMesh, strategy: Strategy) -> Result<(SemMesh, Permutation, Permutation, Option<SfcGrid>)> {
    let n_e = mesh.num_elements();
    let n = mesh.num_global_nodes();
    match strategy {
        Strategy::None => {
            let (ep, np) = (identity(n_e), identity(n));
            let out = apply_ordering(mesh, &ep, &np)?;
            Ok((out, ep, np, None))
        }
        Strategy::Conn => {
            let (ep, np) = order_by_node_connectivity(mesh);
            let out = apply_ordering(mesh, &ep, &np)?;
            Ok((out, ep, np, None))
        }
        Strategy::Dist => {
            let (ep, np) = order_by_node_distance(mesh, default_reference(mesh));
            let out = apply_ordering(mesh, &ep, &np)?;
            Ok((out, ep, np, None))
        }
        Strategy::Sfc => {
            let (ep, grid) = order_elements_hilbert_with(mesh, false)?;
            let staged = apply_ordering(mesh, &ep, &identity(n))?;
            let np = order_nodes_elementwise(&staged);
            let out = apply_ordering(&staged, &identity(n_e), &np)?;
            Ok((out, ep, np, Some(grid)))
        }
    }
}
