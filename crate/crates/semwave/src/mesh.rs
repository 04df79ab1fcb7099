//! Triangle mesh ingestion and SEM mesh construction.
//!
//! Reads Gmsh MSH 2.2 ASCII meshes, inserts the per-order SEM nodes with
//! global deduplication (topological: shared triangle edges share edge
//! nodes), computes the per-element affine geometry, colors elements so that
//! no two elements sharing a global node get the same color, and derives the
//! statistics used by the reordering strategies.

use std::collections::HashMap;

use crate::error::{Result, SemError};
use crate::refelem::{build_reference_element, NodeSite, ReferenceElement};

#[derive(Debug, Clone, Default)]
pub struct RawMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Physical/region tag per triangle (material or layer id).
    pub region_tags: Vec<i32>,
}

#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    /// Image of the reference origin: x^(e).
    pub offset: [f64; 2],
    /// Jacobian J, row-major: maps reference displacements to domain ones.
    pub jacobian: [[f64; 2]; 2],
    /// K = J^-1, row-major.
    pub inverse: [[f64; 2]; 2],
    /// det J, positive after orientation fixing.
    pub det: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BoundingBox {
    pub x0: f64,
    pub x1: f64,
    pub width: f64,
    pub height: f64,
}

pub struct SemMesh {
    pub raw: RawMesh,
    pub order: usize,
    pub refelem: ReferenceElement,
    pub global_nodes: Vec<[f64; 2]>,
    /// mu[e * nodes_per_element + p] = global node index of local node p.
    pub mu: Vec<u32>,
    pub geometry: Vec<ElementGeometry>,
    pub colors: Vec<u32>,
    pub num_colors: usize,
    pub bbox: BoundingBox,
    /// Graph degree of each global node (distinct co-elemental nodes).
    pub node_degree: Vec<u32>,
}

impl SemMesh {
    pub fn num_elements(&self) -> usize {
        self.raw.triangles.len()
    }

    pub fn num_global_nodes(&self) -> usize {
        self.global_nodes.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.refelem.num_nodes()
    }

    pub fn mu(&self, p: usize, e: usize) -> usize {
        self.mu[e * self.nodes_per_element() + p] as usize
    }

    pub fn element_nodes(&self, e: usize) -> &[u32] {
        let npe = self.nodes_per_element();
        &self.mu[e * npe..(e + 1) * npe]
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let t = &self.raw.triangles[e];
        let v = &self.raw.vertices;
        [
            (v[t[0]][0] + v[t[1]][0] + v[t[2]][0]) / 3.0,
            (v[t[0]][1] + v[t[1]][1] + v[t[2]][1]) / 3.0,
        ]
    }

    /// Incidence lists: for each global node, the elements referencing it
    /// (ascending element index). CSR layout `(offsets, elements)`.
    pub fn node_elements(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.num_global_nodes();
        let mut counts = vec![0u32; n + 1];
        for &nu in &self.mu {
            counts[nu as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut items = vec![0u32; self.mu.len()];
        let mut cursor = counts.clone();
        let npe = self.nodes_per_element();
        for e in 0..self.num_elements() {
            for p in 0..npe {
                let nu = self.mu[e * npe + p] as usize;
                items[cursor[nu] as usize] = e as u32;
                cursor[nu] += 1;
            }
        }
        // A node may appear once per containing element only; mu holds each
        // (p, e) pair exactly once and an element never repeats a global
        // node, so no dedup is needed and the lists come out sorted.
        (counts, items)
    }

    /// Node adjacency (nodes connected iff they co-occur in an element) as
    /// CSR `(offsets, neighbors)`, neighbors sorted ascending.
    pub fn node_adjacency(&self) -> (Vec<u32>, Vec<u32>) {
        let n = self.num_global_nodes();
        let (noff, nelems) = self.node_elements();
        let npe = self.nodes_per_element();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut scratch: Vec<u32> = Vec::new();
        offsets.push(0u32);
        for nu in 0..n {
            scratch.clear();
            for &e in &nelems[noff[nu] as usize..noff[nu + 1] as usize] {
                let base = e as usize * npe;
                for p in 0..npe {
                    let other = self.mu[base + p];
                    if other as usize != nu {
                        scratch.push(other);
                    }
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
            neighbors.extend_from_slice(&scratch);
            offsets.push(neighbors.len() as u32);
        }
        (offsets, neighbors)
    }
}

/// Parse a Gmsh MSH 2.2 ASCII stream. Only 3-node triangles (element type 2)
/// are kept; points and lines are skipped. Node ids need not be contiguous.
pub fn load_msh(source: &[u8]) -> Result<RawMesh> {
    let text = std::str::from_utf8(source).map_err(|e| SemError::MeshParse {
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let lines: Vec<&str> = text.lines().collect();
    let parse_err = |line: usize, message: String| SemError::MeshParse { line: line + 1, message };

    let find_section = |name: &str| -> Option<usize> {
        lines.iter().position(|l| l.trim() == name)
    };

    if let Some(fmt) = find_section("$MeshFormat") {
        let header = lines.get(fmt + 1).map(|l| l.trim()).unwrap_or("");
        let version = header.split_whitespace().next().unwrap_or("");
        if !version.starts_with("2.") {
            return Err(parse_err(fmt + 1, format!("unsupported MSH version '{version}' (need 2.2 ASCII)")));
        }
    }

    let nodes_at = find_section("$Nodes")
        .ok_or_else(|| parse_err(lines.len().saturating_sub(1), "missing $Nodes section".into()))?;
    let node_count: usize = lines
        .get(nodes_at + 1)
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| parse_err(nodes_at + 1, "malformed node count".into()))?;

    let mut vertices = Vec::with_capacity(node_count);
    let mut id_map: HashMap<u64, usize> = HashMap::with_capacity(node_count);
    for i in 0..node_count {
        let ln = nodes_at + 2 + i;
        let line = lines
            .get(ln)
            .ok_or_else(|| parse_err(ln, "unexpected end of $Nodes".into()))?;
        let mut it = line.split_whitespace();
        let id: u64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "malformed node id".into()))?;
        let x: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "malformed node x coordinate".into()))?;
        let y: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "malformed node y coordinate".into()))?;
        // Third coordinate (z) is present in MSH 2.2 but dropped for 2D.
        id_map.insert(id, vertices.len());
        vertices.push([x, y]);
    }

    let elems_at = find_section("$Elements")
        .ok_or_else(|| parse_err(lines.len().saturating_sub(1), "missing $Elements section".into()))?;
    let elem_count: usize = lines
        .get(elems_at + 1)
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| parse_err(elems_at + 1, "malformed element count".into()))?;

    let mut triangles = Vec::new();
    let mut region_tags = Vec::new();
    for i in 0..elem_count {
        let ln = elems_at + 2 + i;
        let line = lines
            .get(ln)
            .ok_or_else(|| parse_err(ln, "unexpected end of $Elements".into()))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(parse_err(ln, "malformed element record".into()));
        }
        let etype: u32 = tokens[1]
            .parse()
            .map_err(|_| parse_err(ln, "malformed element type".into()))?;
        if etype != 2 {
            continue; // not a 3-node triangle
        }
        let ntags: usize = tokens[2]
            .parse()
            .map_err(|_| parse_err(ln, "malformed tag count".into()))?;
        let tag: i32 = if ntags > 0 {
            tokens
                .get(3)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(ln, "malformed physical tag".into()))?
        } else {
            0
        };
        let node_tokens = &tokens[3 + ntags..];
        if node_tokens.len() < 3 {
            return Err(parse_err(ln, "triangle with fewer than 3 nodes".into()))?;
        }
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(node_tokens) {
            let id: u64 = tok
                .parse()
                .map_err(|_| parse_err(ln, "malformed node reference".into()))?;
            *slot = *id_map
                .get(&id)
                .ok_or_else(|| parse_err(ln, format!("node id {id} out of range")))?;
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(parse_err(ln, "triangle repeats a vertex".into()));
        }
        triangles.push(tri);
        region_tags.push(tag);
    }
    if triangles.is_empty() {
        return Err(SemError::EmptyMesh);
    }
    Ok(RawMesh { vertices, triangles, region_tags })
}

/// Affine map geometry for one triangle. Clockwise triangles are flipped
/// (vertices 1 and 2 swapped) so the determinant is positive.
pub fn compute_geometry(raw: &RawMesh, e: usize) -> Result<ElementGeometry> {
    let mut t = raw.triangles[e];
    let v = |i: usize| raw.vertices[t[i]];
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let det_raw = cross(v(0), v(1), v(2));
    let scale = {
        let e1 = [(v(1)[0] - v(0)[0]), (v(1)[1] - v(0)[1])];
        let e2 = [(v(2)[0] - v(0)[0]), (v(2)[1] - v(0)[1])];
        (e1[0] * e1[0] + e1[1] * e1[1]).max(e2[0] * e2[0] + e2[1] * e2[1])
    };
    if det_raw.abs() < 1e-14 * scale {
        return Err(SemError::DegenerateElement(e));
    }
    if det_raw < 0.0 {
        t.swap(1, 2);
    }
    let (a, b, c) = (raw.vertices[t[0]], raw.vertices[t[1]], raw.vertices[t[2]]);
    let jacobian = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
    let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    let inv_det = 1.0 / det;
    let inverse = [
        [jacobian[1][1] * inv_det, -jacobian[0][1] * inv_det],
        [-jacobian[1][0] * inv_det, jacobian[0][0] * inv_det],
    ];
    Ok(ElementGeometry { offset: a, jacobian, inverse, det })
}

/// Key identifying a global node by mesh topology, so floating-point jitter
/// cannot split or merge nodes.
#[derive(Hash, PartialEq, Eq)]
enum NodeKey {
    Vertex(usize),
    /// (low vertex, high vertex, step counted from the low vertex).
    Edge(usize, usize, u8),
}

pub fn build_sem_mesh(raw: &RawMesh, order: usize) -> Result<SemMesh> {
    let refelem = build_reference_element(order)?;
    if raw.triangles.is_empty() {
        return Err(SemError::EmptyMesh);
    }
    let mut raw = raw.clone();

    // Fix orientation up front so the stored triangles agree with the
    // geometry and with the edge directions used for node dedup.
    for e in 0..raw.triangles.len() {
        let t = &mut raw.triangles[e];
        let v = &raw.vertices;
        let det_raw = (v[t[1]][0] - v[t[0]][0]) * (v[t[2]][1] - v[t[0]][1])
            - (v[t[1]][1] - v[t[0]][1]) * (v[t[2]][0] - v[t[0]][0]);
        if det_raw < 0.0 {
            t.swap(1, 2);
        }
    }
    let geometry = (0..raw.triangles.len())
        .map(|e| compute_geometry(&raw, e))
        .collect::<Result<Vec<_>>>()?;

    let npe = refelem.num_nodes();
    let order_u8 = order as u8;
    let mut mu = vec![0u32; raw.triangles.len() * npe];
    let mut global_nodes: Vec<[f64; 2]> = Vec::new();
    let mut keyed: HashMap<NodeKey, u32> = HashMap::new();

    for (e, tri) in raw.triangles.iter().enumerate() {
        let geo = &geometry[e];
        for (p, (&xhat, site)) in refelem.nodes().iter().zip(refelem.sites()).enumerate() {
            let x = [
                geo.offset[0] + geo.jacobian[0][0] * xhat[0] + geo.jacobian[0][1] * xhat[1],
                geo.offset[1] + geo.jacobian[1][0] * xhat[0] + geo.jacobian[1][1] * xhat[1],
            ];
            let key = match *site {
                NodeSite::Vertex(i) => Some(NodeKey::Vertex(tri[i as usize])),
                NodeSite::Edge { a, b, step } => {
                    let (va, vb) = (tri[a as usize], tri[b as usize]);
                    Some(if va < vb {
                        NodeKey::Edge(va, vb, step)
                    } else {
                        NodeKey::Edge(vb, va, order_u8 - step)
                    })
                }
                NodeSite::Interior => None,
            };
            let nu = match key {
                Some(key) => *keyed.entry(key).or_insert_with(|| {
                    global_nodes.push(x);
                    (global_nodes.len() - 1) as u32
                }),
                None => {
                    global_nodes.push(x);
                    (global_nodes.len() - 1) as u32
                }
            };
            mu[e * npe + p] = nu;
        }
    }

    let bbox = bounding_box(&global_nodes);

    let mut mesh = SemMesh {
        raw,
        order,
        refelem,
        global_nodes,
        mu,
        geometry,
        colors: Vec::new(),
        num_colors: 0,
        bbox,
        node_degree: Vec::new(),
    };
    let (colors, num_colors) = color_elements(&mesh);
    mesh.colors = colors;
    mesh.num_colors = num_colors;
    let (adj_off, _) = mesh.node_adjacency();
    mesh.node_degree = adj_off.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(mesh)
}

fn bounding_box(points: &[[f64; 2]]) -> BoundingBox {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in points {
        for j in 0..2 {
            min[j] = min[j].min(p[j]);
            max[j] = max[j].max(p[j]);
        }
    }
    BoundingBox {
        x0: min[0],
        x1: min[1],
        width: max[0] - min[0],
        height: max[1] - min[1],
    }
}

/// Greedy first-fit coloring of the element conflict graph (elements are in
/// conflict iff they share a global node). Deterministic given the element
/// order: elements are visited in storage order.
pub fn color_elements(mesh: &SemMesh) -> (Vec<u32>, usize) {
    let n_e = mesh.num_elements();
    let (noff, nelems) = mesh.node_elements();
    let mut colors = vec![u32::MAX; n_e];
    let mut used: Vec<bool> = Vec::new();
    let npe = mesh.nodes_per_element();
    let mut num_colors = 0usize;
    for e in 0..n_e {
        used.clear();
        used.resize(num_colors + 1, false);
        for p in 0..npe {
            let nu = mesh.mu[e * npe + p] as usize;
            for &other in &nelems[noff[nu] as usize..noff[nu + 1] as usize] {
                let c = colors[other as usize];
                if c != u32::MAX {
                    used[c as usize] = true;
                }
            }
        }
        let c = used.iter().position(|&u| !u).unwrap() as u32;
        colors[e] = c;
        num_colors = num_colors.max(c as usize + 1);
    }
    (colors, num_colors)
}

#[derive(Debug, Clone)]
pub struct MeshStats {
    pub num_elements: usize,
    /// Population standard deviation of element sizes (longest edge).
    pub size_std: f64,
    /// max size / min size.
    pub size_ratio: f64,
    pub width: f64,
    pub height: f64,
    pub centroids: Vec<[f64; 2]>,
}

pub fn mesh_stats(mesh: &SemMesh) -> MeshStats {
    let n_e = mesh.num_elements();
    let mut sizes = Vec::with_capacity(n_e);
    let mut centroids = Vec::with_capacity(n_e);
    for e in 0..n_e {
        let t = &mesh.raw.triangles[e];
        let v = &mesh.raw.vertices;
        let mut longest: f64 = 0.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let dx = v[t[i]][0] - v[t[j]][0];
            let dy = v[t[i]][1] - v[t[j]][1];
            longest = longest.max((dx * dx + dy * dy).sqrt());
        }
        sizes.push(longest);
        centroids.push(mesh.centroid(e));
    }
    let mean = sizes.iter().sum::<f64>() / n_e as f64;
    let var = sizes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n_e as f64;
    let max = sizes.iter().cloned().fold(f64::MIN, f64::max);
    let min = sizes.iter().cloned().fold(f64::MAX, f64::min);
    MeshStats {
        num_elements: n_e,
        size_std: var.sqrt(),
        size_ratio: max / min,
        width: mesh.bbox.width,
        height: mesh.bbox.height,
        centroids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangle_raw() -> RawMesh {
        // Unit square split along the diagonal (0,0)-(1,1).
        RawMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
            region_tags: vec![1, 1],
        }
    }

    fn single_triangle_raw() -> RawMesh {
        RawMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            region_tags: vec![1],
        }
    }

    const FIXTURE_MSH: &str = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
2
1 2 2 7 1 1 2 3
2 2 2 7 1 1 3 4
$EndElements
";

    #[test]
    fn msh_fixture_parses() {
        let raw = load_msh(FIXTURE_MSH.as_bytes()).unwrap();
        assert_eq!(raw.vertices.len(), 4);
        assert_eq!(raw.triangles.len(), 2);
        assert_eq!(raw.region_tags, vec![7, 7]);
        assert_eq!(raw.triangles[0], [0, 1, 2]);
    }

    #[test]
    fn msh_missing_nodes_section_errors() {
        let err = load_msh(b"$MeshFormat\n2.2 0 8\n$EndMeshFormat\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("$Nodes"), "unexpected error: {msg}");
    }

    #[test]
    fn msh_skips_lower_dimensional_elements() {
        let with_lines = FIXTURE_MSH.replace(
            "$Elements\n2\n",
            "$Elements\n6\n10 15 2 0 1 1\n11 1 2 0 1 1 2\n12 1 2 0 1 2 3\n13 1 2 0 1 3 4\n",
        );
        let raw = load_msh(with_lines.as_bytes()).unwrap();
        assert_eq!(raw.triangles.len(), 2);
    }

    #[test]
    fn msh_no_triangles_is_empty_mesh() {
        let only_lines = "\
$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
2
1 0 0 0
2 1 0 0
$EndNodes
$Elements
1
1 1 2 0 1 1 2
$EndElements
";
        assert!(matches!(load_msh(only_lines.as_bytes()), Err(SemError::EmptyMesh)));
    }

    #[test]
    fn msh_bad_node_reference_errors() {
        let broken = FIXTURE_MSH.replace("1 1 2 3", "1 1 2 9");
        let err = load_msh(broken.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn geometry_reference_triangle_is_identity() {
        let raw = single_triangle_raw();
        let geo = compute_geometry(&raw, 0).unwrap();
        assert_eq!(geo.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(geo.det, 1.0);
    }

    #[test]
    fn geometry_scaled_triangle() {
        let raw = RawMesh {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]],
            triangles: vec![[0, 1, 2]],
            region_tags: vec![0],
        };
        let geo = compute_geometry(&raw, 0).unwrap();
        assert_eq!(geo.jacobian, [[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(geo.det, 4.0);
        // K J = I
        for j in 0..2 {
            for k in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += geo.inverse[j][l] * geo.jacobian[l][k];
                }
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometry_collinear_errors() {
        let raw = RawMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            triangles: vec![[0, 1, 2]],
            region_tags: vec![0],
        };
        assert!(matches!(compute_geometry(&raw, 0), Err(SemError::DegenerateElement(0))));
    }

    #[test]
    fn geometry_clockwise_is_flipped() {
        let raw = RawMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 2, 1]], // clockwise
            region_tags: vec![0],
        };
        let geo = compute_geometry(&raw, 0).unwrap();
        assert!(geo.det > 0.0);
    }

    #[test]
    fn node_counts_match_shared_edge_dedup() {
        for (order, expect) in [(2usize, 9usize), (5, 36)] {
            let mesh = build_sem_mesh(&two_triangle_raw(), order).unwrap();
            assert_eq!(mesh.num_global_nodes(), expect, "order {order}");
        }
        let single = build_sem_mesh(&single_triangle_raw(), 2).unwrap();
        assert_eq!(single.num_global_nodes(), 6);
    }

    #[test]
    fn mapped_reference_nodes_match_global_coordinates() {
        for order in [1usize, 3, 4, 5] {
            let mesh = build_sem_mesh(&two_triangle_raw(), order).unwrap();
            let npe = mesh.nodes_per_element();
            let scale = mesh.bbox.width.hypot(mesh.bbox.height);
            for e in 0..mesh.num_elements() {
                let geo = &mesh.geometry[e];
                for (p, xhat) in mesh.refelem.nodes().iter().enumerate() {
                    let x = [
                        geo.offset[0] + geo.jacobian[0][0] * xhat[0] + geo.jacobian[0][1] * xhat[1],
                        geo.offset[1] + geo.jacobian[1][0] * xhat[0] + geo.jacobian[1][1] * xhat[1],
                    ];
                    let g = mesh.global_nodes[mesh.mu[e * npe + p] as usize];
                    let d = (x[0] - g[0]).hypot(x[1] - g[1]);
                    assert!(d <= 1e-9 * scale, "order {order} e {e} p {p}: off by {d}");
                }
            }
        }
    }

    #[test]
    fn dedup_matches_coordinate_clustering_oracle() {
        // Brute-force oracle: cluster mapped node coordinates.
        for order in 1..=7usize {
            let mesh = build_sem_mesh(&two_triangle_raw(), order).unwrap();
            let npe = mesh.nodes_per_element();
            let mut coords: Vec<[f64; 2]> = Vec::new();
            for e in 0..mesh.num_elements() {
                let geo = &mesh.geometry[e];
                for xhat in mesh.refelem.nodes() {
                    coords.push([
                        geo.offset[0] + geo.jacobian[0][0] * xhat[0] + geo.jacobian[0][1] * xhat[1],
                        geo.offset[1] + geo.jacobian[1][0] * xhat[0] + geo.jacobian[1][1] * xhat[1],
                    ]);
                }
            }
            let mut clusters: Vec<[f64; 2]> = Vec::new();
            for c in &coords {
                if !clusters
                    .iter()
                    .any(|k| (k[0] - c[0]).hypot(k[1] - c[1]) < 1e-9)
                {
                    clusters.push(*c);
                }
            }
            assert_eq!(mesh.num_global_nodes(), clusters.len(), "order {order}");
            let _ = npe;
        }
    }

    #[test]
    fn every_global_node_is_referenced() {
        let mesh = build_sem_mesh(&two_triangle_raw(), 4).unwrap();
        let mut seen = vec![false; mesh.num_global_nodes()];
        for &nu in &mesh.mu {
            seen[nu as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn coloring_two_shared_triangles() {
        let mesh = build_sem_mesh(&two_triangle_raw(), 1).unwrap();
        assert_eq!(mesh.num_colors, 2);
        assert_ne!(mesh.colors[0], mesh.colors[1]);
        let single = build_sem_mesh(&single_triangle_raw(), 1).unwrap();
        assert_eq!(single.num_colors, 1);
    }

    #[test]
    fn coloring_fan_is_a_clique() {
        // 6 triangles around a central vertex.
        let mut vertices = vec![[0.0, 0.0]];
        for i in 0..6 {
            let a = i as f64 * std::f64::consts::PI / 3.0;
            vertices.push([a.cos(), a.sin()]);
        }
        let triangles: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
        let raw = RawMesh { vertices, triangles, region_tags: vec![0; 6] };
        let mesh = build_sem_mesh(&raw, 1).unwrap();
        assert_eq!(mesh.num_colors, 6);
    }

    #[test]
    fn coloring_is_valid_per_node() {
        let mesh = build_sem_mesh(&two_triangle_raw(), 3).unwrap();
        let (noff, nelems) = mesh.node_elements();
        for nu in 0..mesh.num_global_nodes() {
            let elems = &nelems[noff[nu] as usize..noff[nu + 1] as usize];
            for i in 0..elems.len() {
                for j in i + 1..elems.len() {
                    assert_ne!(mesh.colors[elems[i] as usize], mesh.colors[elems[j] as usize]);
                }
            }
        }
    }

    #[test]
    fn stats_sizes_and_ratio() {
        // Two right triangles with longest edges sqrt(2) and 2*sqrt(2).
        let raw = RawMesh {
            vertices: vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [10.0, 0.0],
                [12.0, 0.0],
                [10.0, 2.0],
            ],
            triangles: vec![[0, 1, 2], [3, 4, 5]],
            region_tags: vec![0, 0],
        };
        let mesh = build_sem_mesh(&raw, 1).unwrap();
        let stats = mesh_stats(&mesh);
        assert!((stats.size_ratio - 2.0).abs() < 1e-12);
        // population std of {s, 2s} = s/2
        let s = 2.0f64.sqrt();
        assert!((stats.size_std - s / 2.0).abs() < 1e-12);
    }

    #[test]
    fn stats_uniform_sizes_zero_std() {
        let mesh = build_sem_mesh(&two_triangle_raw(), 1).unwrap();
        let stats = mesh_stats(&mesh);
        assert!(stats.size_std.abs() < 1e-12);
        assert_eq!(stats.num_elements, 2);
    }

    #[test]
    fn degenerate_triangle_in_build_errors() {
        let raw = RawMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 3], [0, 1, 2]],
            region_tags: vec![0, 0],
        };
        assert!(matches!(build_sem_mesh(&raw, 2), Err(SemError::DegenerateElement(1))));
    }

    #[test]
    fn node_degree_two_triangles_order_one() {
        let mesh = build_sem_mesh(&two_triangle_raw(), 1).unwrap();
        // Diagonal nodes see all 4 vertices minus themselves; off-diagonal
        // vertices connect only within their own triangle.
        let mut degrees = mesh.node_degree.clone();
        degrees.sort_unstable();
        assert_eq!(degrees, vec![2, 2, 3, 3]);
    }
}
