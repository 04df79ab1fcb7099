//! Nodal basis on the reference triangle.
//!
//! The reference element is the right triangle with vertices (0,0), (1,0),
//! (0,1). Node sets are symmetric lattices whose edge nodes are mirror-image
//! parameter sets, so adjacent elements see identical node locations along a
//! shared edge (see `node_set` for the per-order choices). The nodal
//! (cardinal) basis is built from an orthonormal Koornwinder modal expansion
//! through a
//! generalized Vandermonde inversion; quadrature weights are the exact
//! integrals of the cardinal functions, so the interpolation nodes double as
//! integration points.

use crate::error::{Result, SemError};
use nalgebra::DMatrix;

pub const MAX_ORDER: usize = 7;

/// Where a local node sits on the reference triangle, in terms of the
/// element topology. Used for global node deduplication across elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSite {
    /// Local vertex 0, 1 or 2.
    Vertex(u8),
    /// On the open edge between local vertices `(a, b)`, at edge-parameter
    /// position `step` counted from vertex `a` (range `1..=order-1`). Edge
    /// parameter sets are symmetric, so the same physical node seen from the
    /// opposite orientation has step `order - step`.
    Edge { a: u8, b: u8, step: u8 },
    Interior,
}

pub struct ReferenceElement {
    order: usize,
    nodes: Vec<[f64; 2]>,
    weights: Vec<f64>,
    /// `basis_at_nodes[p * n + q]` = N_p(x_q); identity by construction.
    basis_at_nodes: Vec<f64>,
    /// `deriv_at_nodes[jhat][p * n + q]` = dN_p/dx_jhat evaluated at node q.
    deriv_at_nodes: [Vec<f64>; 2],
    sites: Vec<NodeSite>,
    /// Columns are modal-to-nodal coefficients: N_p = sum_m inv_v[(m,p)] phi_m.
    inv_vandermonde: DMatrix<f64>,
    condition: f64,
}

impl ReferenceElement {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sites(&self) -> &[NodeSite] {
        &self.sites
    }

    pub fn basis_at_nodes(&self, p: usize, q: usize) -> f64 {
        self.basis_at_nodes[p * self.num_nodes() + q]
    }

    /// dN_p/dx_jhat at node q.
    pub fn deriv_at_nodes(&self, p: usize, jhat: usize, q: usize) -> f64 {
        self.deriv_at_nodes[jhat][p * self.num_nodes() + q]
    }

    /// Raw derivative table for direction `jhat`, laid out `[p * n + q]`.
    pub fn deriv_table(&self, jhat: usize) -> &[f64] {
        &self.deriv_at_nodes[jhat]
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Evaluate all cardinal functions and their reference-coordinate
    /// derivatives at a point of the closed reference triangle.
    pub fn evaluate_basis(&self, point: [f64; 2]) -> Result<(Vec<f64>, [Vec<f64>; 2])> {
        const TOL: f64 = 1e-12;
        let [x, y] = point;
        if x < -TOL || y < -TOL || x + y > 1.0 + TOL {
            return Err(SemError::OutsideReferenceTriangle(x, y));
        }
        let n = self.num_nodes();
        let n_modes = n;
        let mut phi = vec![0.0; n_modes];
        let mut dphi0 = vec![0.0; n_modes];
        let mut dphi1 = vec![0.0; n_modes];
        eval_modal_all(self.order, point, &mut phi, &mut dphi0, &mut dphi1);

        let mut values = vec![0.0; n];
        let mut d0 = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        for p in 0..n {
            let col = self.inv_vandermonde.column(p);
            let mut v = 0.0;
            let mut g0 = 0.0;
            let mut g1 = 0.0;
            for m in 0..n_modes {
                let c = col[m];
                v += c * phi[m];
                g0 += c * dphi0[m];
                g1 += c * dphi1[m];
            }
            values[p] = v;
            d0[p] = g0;
            d1[p] = g1;
        }
        Ok((values, [d0, d1]))
    }

    /// Quadrature over the reference triangle given values at the nodes.
    pub fn quadrature_integrate(&self, nodal_values: &[f64]) -> Result<f64> {
        if nodal_values.len() != self.num_nodes() {
            return Err(SemError::LengthMismatch {
                expected: self.num_nodes(),
                got: nodal_values.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(nodal_values)
            .map(|(w, f)| w * f)
            .sum())
    }
}

pub fn build_reference_element(order: usize) -> Result<ReferenceElement> {
    if order < 1 || order > MAX_ORDER {
        return Err(SemError::UnsupportedOrder(order));
    }
    let n = (order + 1) * (order + 2) / 2;
    let (nodes, sites) = node_set(order);
    debug_assert_eq!(nodes.len(), n);

    // Generalized Vandermonde in the orthonormal modal basis.
    let mut phi = vec![0.0; n];
    let mut dphi0 = vec![0.0; n];
    let mut dphi1 = vec![0.0; n];
    let mut v = DMatrix::<f64>::zeros(n, n);
    for (q, &pt) in nodes.iter().enumerate() {
        eval_modal_all(order, pt, &mut phi, &mut dphi0, &mut dphi1);
        for m in 0..n {
            v[(q, m)] = phi[m];
        }
    }
    let svd = v.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(SemError::IllConditionedBasis(condition));
    }
    let inv_v = v
        .clone()
        .try_inverse()
        .ok_or(SemError::IllConditionedBasis(condition))?;

    // Weights are exact integrals of the cardinal functions. All modes but
    // the constant integrate to zero, so only the first row of inv_v enters.
    let constant_mode = {
        let mut p = vec![0.0; n];
        let mut d0 = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        eval_modal_all(order, [0.25, 0.25], &mut p, &mut d0, &mut d1);
        p[0]
    };
    let weights: Vec<f64> = (0..n).map(|q| inv_v[(0, q)] * constant_mode * 0.5).collect();

    // Tabulate N_p and its derivatives at every node.
    let mut basis_at_nodes = vec![0.0; n * n];
    let mut da = vec![0.0; n * n];
    let mut db = vec![0.0; n * n];
    for (q, &pt) in nodes.iter().enumerate() {
        eval_modal_all(order, pt, &mut phi, &mut dphi0, &mut dphi1);
        for p in 0..n {
            let mut val = 0.0;
            let mut g0 = 0.0;
            let mut g1 = 0.0;
            for m in 0..n {
                let c = inv_v[(m, p)];
                val += c * phi[m];
                g0 += c * dphi0[m];
                g1 += c * dphi1[m];
            }
            basis_at_nodes[p * n + q] = val;
            da[p * n + q] = g0;
            db[p * n + q] = g1;
        }
    }

    Ok(ReferenceElement {
        order,
        nodes,
        weights,
        basis_at_nodes,
        deriv_at_nodes: [da, db],
        sites,
        inv_vandermonde: inv_v,
        condition,
    })
}

/// Node locations and topological sites for one order.
///
/// Odd orders (and order 2, where the layout is forced) use the Lobatto
/// lattice: edge nodes are 1D Gauss-Lobatto points. At orders 4 and 6 the
/// Lobatto lattice yields negative vertex quadrature weights, which would
/// poison the lumped mass matrix, so those orders use symmetric node sets
/// tuned for all-positive weights. Edge parameter sets stay symmetric under
/// reversal so nodes still match up across shared edges.
fn node_set(order: usize) -> (Vec<[f64; 2]>, Vec<NodeSite>) {
    match order {
        4 => {
            let t = 0.416;
            let b = 0.19;
            symmetric_layout(
                order,
                &[t, 0.5, 1.0 - t],
                &[[1.0 - 2.0 * b, b, b], [b, 1.0 - 2.0 * b, b], [b, b, 1.0 - 2.0 * b]],
            )
        }
        6 => {
            let (t1, t2) = (0.2175, 0.2525);
            let ib = 0.13;
            let (c, d) = (0.101250, 0.430625);
            let a = 1.0 - 2.0 * ib;
            let e = 1.0 - c - d;
            let third = 1.0 / 3.0;
            symmetric_layout(
                order,
                &[t1, t2, 0.5, 1.0 - t2, 1.0 - t1],
                &[
                    [third, third, third],
                    [a, ib, ib],
                    [ib, a, ib],
                    [ib, ib, a],
                    [c, d, e],
                    [d, e, c],
                    [e, c, d],
                    [d, c, e],
                    [e, d, c],
                    [c, e, d],
                ],
            )
        }
        _ => lobatto_lattice(order),
    }
}

/// Vertices, then edge nodes at the given ascending parameters on each of
/// the three edges, then interior points (barycentric).
fn symmetric_layout(
    order: usize,
    edge_params: &[f64],
    interior_bary: &[[f64; 3]],
) -> (Vec<[f64; 2]>, Vec<NodeSite>) {
    assert_eq!(edge_params.len(), order - 1);
    let verts: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut nodes: Vec<[f64; 2]> = verts.to_vec();
    let mut sites = vec![NodeSite::Vertex(0), NodeSite::Vertex(1), NodeSite::Vertex(2)];
    for &(a, b) in &[(0u8, 1u8), (1, 2), (0, 2)] {
        let (va, vb) = (verts[a as usize], verts[b as usize]);
        for (s, &t) in edge_params.iter().enumerate() {
            nodes.push([va[0] + (vb[0] - va[0]) * t, va[1] + (vb[1] - va[1]) * t]);
            sites.push(NodeSite::Edge { a, b, step: (s + 1) as u8 });
        }
    }
    for bary in interior_bary {
        nodes.push([bary[1], bary[2]]);
        sites.push(NodeSite::Interior);
    }
    (nodes, sites)
}

fn lobatto_lattice(order: usize) -> (Vec<[f64; 2]>, Vec<NodeSite>) {
    let gamma = lobatto_points_unit(order + 1);
    let n = (order + 1) * (order + 2) / 2;
    // Lattice (i, j, k), i+j+k = order. Vertices at i=order (1,0), j=order
    // (0,1), k=order (0,0); edge nodes land on 1D Lobatto points of the edge.
    let mut nodes = Vec::with_capacity(n);
    let mut sites = Vec::with_capacity(n);
    for j in 0..=order {
        for i in 0..=(order - j) {
            let k = order - i - j;
            let x = (1.0 + 2.0 * gamma[i] - gamma[j] - gamma[k]) / 3.0;
            let y = (1.0 + 2.0 * gamma[j] - gamma[i] - gamma[k]) / 3.0;
            nodes.push([x, y]);
            sites.push(classify(i, j, k, order));
        }
    }
    (nodes, sites)
}

fn classify(i: usize, j: usize, k: usize, order: usize) -> NodeSite {
    if k == order {
        NodeSite::Vertex(0)
    } else if i == order {
        NodeSite::Vertex(1)
    } else if j == order {
        NodeSite::Vertex(2)
    } else if j == 0 {
        // edge vertex0 -> vertex1, parameterized by i
        NodeSite::Edge { a: 0, b: 1, step: i as u8 }
    } else if k == 0 {
        // edge vertex1 -> vertex2, parameterized by j
        NodeSite::Edge { a: 1, b: 2, step: j as u8 }
    } else if i == 0 {
        // edge vertex0 -> vertex2, parameterized by j
        NodeSite::Edge { a: 0, b: 2, step: j as u8 }
    } else {
        NodeSite::Interior
    }
}

/// All Koornwinder modes of total degree <= order at one point, with
/// derivatives in reference coordinates. Mode order: (i, j) with j the
/// Jacobi index in the collapsed direction, looped i-major to keep a fixed
/// layout.
fn eval_modal_all(order: usize, point: [f64; 2], phi: &mut [f64], dphi0: &mut [f64], dphi1: &mut [f64]) {
    // Map (0,0)-(1,0)-(0,1) to the bi-unit triangle r,s in [-1,1], r+s <= 0.
    let r = 2.0 * point[0] - 1.0;
    let s = 2.0 * point[1] - 1.0;
    let t = 1.0 - s; // 2*(1 - y)
    let a = if t.abs() > 1e-14 { 2.0 * (1.0 + r) / t - 1.0 } else { -1.0 };
    let b = s;

    let mut m = 0;
    for i in 0..=order {
        let fa = jacobi_norm(i, 0, a);
        let dfa = jacobi_norm_deriv(i, 0, a);
        // t^i and t^(i-1)
        let ti = t.powi(i as i32);
        let tim1 = if i >= 1 { t.powi(i as i32 - 1) } else { 0.0 };
        for j in 0..=(order - i) {
            let alpha = 2 * i as i32 + 1;
            let gb = jacobi_norm(j, alpha, b);
            let dgb = jacobi_norm_deriv(j, alpha, b);
            let sqrt2 = std::f64::consts::SQRT_2;
            phi[m] = sqrt2 * fa * gb * ti;
            // d/dr, d/ds on the bi-unit triangle, then chain rule x = (r+1)/2.
            let ddr = if i == 0 { 0.0 } else { sqrt2 * dfa * gb * 2.0 * tim1 };
            let mut dds = sqrt2 * fa * dgb * ti;
            if i >= 1 {
                dds += sqrt2 * dfa * (1.0 + a) * tim1 * gb;
                dds -= sqrt2 * fa * (i as f64) * gb * tim1;
            }
            dphi0[m] = 2.0 * ddr;
            dphi1[m] = 2.0 * dds;
            m += 1;
        }
    }
}

/// Orthonormal Jacobi polynomial P_n^(alpha,0) on [-1,1].
fn jacobi_norm(n: usize, alpha: i32, x: f64) -> f64 {
    // norm^2 of the classical P_n^(alpha,0) is 2^(alpha+1) / (2n + alpha + 1)
    let norm2 = 2f64.powi(alpha + 1) / (2.0 * n as f64 + alpha as f64 + 1.0);
    jacobi(n, alpha as f64, 0.0, x) / norm2.sqrt()
}

fn jacobi_norm_deriv(n: usize, alpha: i32, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let norm2 = 2f64.powi(alpha + 1) / (2.0 * n as f64 + alpha as f64 + 1.0);
    let d = 0.5 * (n as f64 + alpha as f64 + 1.0) * jacobi(n - 1, alpha as f64 + 1.0, 1.0, x);
    d / norm2.sqrt()
}

/// Classical Jacobi polynomial by three-term recurrence.
fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
    for k in 1..n {
        let kf = k as f64;
        let a1 = 2.0 * (kf + 1.0) * (kf + alpha + beta + 1.0) * (2.0 * kf + alpha + beta);
        let a2 = (2.0 * kf + alpha + beta + 1.0) * (alpha * alpha - beta * beta);
        let a3 = (2.0 * kf + alpha + beta)
            * (2.0 * kf + alpha + beta + 1.0)
            * (2.0 * kf + alpha + beta + 2.0);
        let a4 = 2.0 * (kf + alpha) * (kf + beta) * (2.0 * kf + alpha + beta + 2.0);
        let next = ((a2 + a3 * x) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    p
}

/// Gauss-Lobatto points on [0,1], symmetrized so gamma_i + gamma_(m-1-i) = 1
/// exactly.
fn lobatto_points_unit(m: usize) -> Vec<f64> {
    assert!(m >= 2);
    let mut pts = vec![0.0; m];
    pts[0] = -1.0;
    pts[m - 1] = 1.0;
    // Interior points are roots of P'_(m-1); Newton from Chebyshev guesses.
    let deg = m - 1;
    for k in 1..m - 1 {
        let mut x = -(std::f64::consts::PI * k as f64 / deg as f64).cos();
        for _ in 0..100 {
            let (_, dp, ddp) = legendre_with_derivs(deg, x);
            let step = dp / ddp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        pts[k] = x;
    }
    let mut unit: Vec<f64> = pts.iter().map(|x| 0.5 * (x + 1.0)).collect();
    for i in 0..m / 2 {
        let avg = 0.5 * (unit[i] + 1.0 - unit[m - 1 - i]);
        unit[i] = avg;
        unit[m - 1 - i] = 1.0 - avg;
    }
    unit
}

fn legendre_with_derivs(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    // P'_n from P_n and P_(n-1); P''_n from the Legendre ODE.
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    let ddp = (2.0 * x * dp - (n as f64) * (n as f64 + 1.0) * p) / (1.0 - x * x);
    (p, dp, ddp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Closed form: integral of x^a y^b over the reference triangle.
    fn monomial_integral(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn node_counts() {
        assert_eq!(build_reference_element(5).unwrap().num_nodes(), 21);
        assert_eq!(build_reference_element(1).unwrap().num_nodes(), 3);
        assert_eq!(build_reference_element(7).unwrap().num_nodes(), 36);
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(matches!(
            build_reference_element(0),
            Err(SemError::UnsupportedOrder(0))
        ));
        assert!(matches!(
            build_reference_element(8),
            Err(SemError::UnsupportedOrder(8))
        ));
    }

    #[test]
    fn order_one_is_vertices_with_sixth_weights() {
        let re = build_reference_element(1).unwrap();
        let mut nodes = re.nodes().to_vec();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(nodes[0][0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[0][1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[1][0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[1][1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[2][0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(nodes[2][1], 0.0, epsilon = 1e-14);
        for &w in re.weights() {
            assert_abs_diff_eq!(w, 1.0 / 6.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn dual_identity_all_orders() {
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            let n = re.num_nodes();
            for p in 0..n {
                for q in 0..n {
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!(
                        (re.basis_at_nodes(p, q) - expect).abs() <= 1e-10,
                        "order {order}: N_{p}(x_{q}) = {}",
                        re.basis_at_nodes(p, q)
                    );
                }
            }
        }
    }

    #[test]
    fn weights_sum_to_half() {
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            let sum: f64 = re.weights().iter().sum();
            assert_abs_diff_eq!(sum, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn weights_positive_except_forced_order_two() {
        // Order 2 is vertices + edge midpoints (the only conforming
        // symmetric choice); its vertex weights are exactly zero. Every
        // other order must be usable for mass lumping.
        for order in [1, 3, 4, 5, 6, 7] {
            let re = build_reference_element(order).unwrap();
            for (q, &w) in re.weights().iter().enumerate() {
                assert!(w > 0.0, "order {order}, node {q}: weight {w}");
            }
        }
        let re = build_reference_element(2).unwrap();
        for (q, &w) in re.weights().iter().enumerate() {
            match re.sites()[q] {
                NodeSite::Vertex(_) => assert!(w.abs() < 1e-15),
                _ => assert_abs_diff_eq!(w, 1.0 / 6.0, epsilon = 1e-14),
            }
        }
    }

    #[test]
    fn nodes_inside_closed_triangle() {
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            for &[x, y] in re.nodes() {
                assert!(x >= -1e-14 && y >= -1e-14 && x + y <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn partition_of_unity_at_tabulated_points() {
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            let n = re.num_nodes();
            for q in 0..n {
                let sum: f64 = (0..n).map(|p| re.basis_at_nodes(p, q)).sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
                for jhat in 0..2 {
                    let dsum: f64 = (0..n).map(|p| re.deriv_at_nodes(p, jhat, q)).sum();
                    assert_abs_diff_eq!(dsum, 0.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn quadrature_exact_for_monomials() {
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            for a in 0..=order {
                for b in 0..=(order - a) {
                    let vals: Vec<f64> = re
                        .nodes()
                        .iter()
                        .map(|&[x, y]| x.powi(a as i32) * y.powi(b as i32))
                        .collect();
                    let got = re.quadrature_integrate(&vals).unwrap();
                    assert!(
                        (got - monomial_integral(a, b)).abs() <= 1e-12,
                        "order {order}, x^{a} y^{b}: {got} vs {}",
                        monomial_integral(a, b)
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_simple_cases() {
        let re = build_reference_element(3).unwrap();
        let ones = vec![1.0; re.num_nodes()];
        assert_abs_diff_eq!(re.quadrature_integrate(&ones).unwrap(), 0.5, epsilon = 1e-13);
        let xs: Vec<f64> = re.nodes().iter().map(|n| n[0]).collect();
        assert_abs_diff_eq!(re.quadrature_integrate(&xs).unwrap(), 1.0 / 6.0, epsilon = 1e-13);
        assert!(matches!(
            re.quadrature_integrate(&[1.0]),
            Err(SemError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_basis_matches_tables_and_centroid() {
        let re = build_reference_element(1).unwrap();
        let (vals, _) = re.evaluate_basis([1.0 / 3.0, 1.0 / 3.0]).unwrap();
        for v in &vals {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-12);
        }
        let re = build_reference_element(4).unwrap();
        for (q, &pt) in re.nodes().iter().enumerate() {
            let (vals, _) = re.evaluate_basis(pt).unwrap();
            for (p, v) in vals.iter().enumerate() {
                let expect = if p == q { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(*v, expect, epsilon = 1e-10);
            }
        }
        assert!(re.evaluate_basis([0.7, 0.7]).is_err());
        assert!(re.evaluate_basis([-0.1, 0.2]).is_err());
    }

    #[test]
    fn partition_of_unity_interior_points() {
        let re = build_reference_element(6).unwrap();
        for &pt in &[[0.1, 0.2], [0.3, 0.3], [0.05, 0.9], [0.6, 0.39]] {
            let (vals, derivs) = re.evaluate_basis(pt).unwrap();
            let s: f64 = vals.iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
            for jhat in 0..2 {
                let d: f64 = derivs[jhat].iter().sum();
                assert_abs_diff_eq!(d, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for order in 1..=MAX_ORDER {
            let re = build_reference_element(order).unwrap();
            for _ in 0..10 {
                // random strictly interior point with margin for the stencil
                let x: f64 = rng.gen_range(0.05..0.6);
                let y: f64 = rng.gen_range(0.05..0.9 - x);
                let h = 1e-6;
                let (_, derivs) = re.evaluate_basis([x, y]).unwrap();
                let (vxp, _) = re.evaluate_basis([x + h, y]).unwrap();
                let (vxm, _) = re.evaluate_basis([x - h, y]).unwrap();
                let (vyp, _) = re.evaluate_basis([x, y + h]).unwrap();
                let (vym, _) = re.evaluate_basis([x, y - h]).unwrap();
                for p in 0..re.num_nodes() {
                    let fd0 = (vxp[p] - vxm[p]) / (2.0 * h);
                    let fd1 = (vyp[p] - vym[p]) / (2.0 * h);
                    assert!((derivs[0][p] - fd0).abs() < 1e-6, "order {order} d0");
                    assert!((derivs[1][p] - fd1).abs() < 1e-6, "order {order} d1");
                }
            }
        }
    }
}
