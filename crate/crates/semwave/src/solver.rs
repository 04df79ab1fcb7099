//! SEM semi-discrete acoustic solver.
//!
//! The continuous pressure lives at global nodes (`U`); the element-local
//! velocity lives in per-element storage (`V`, both components of a node
//! adjacent). Rates follow the generic-coefficient form: the V kernel runs
//! element-parallel with an `FK` precalculation and a gathered `U2` buffer,
//! and the U kernel scatters element contributions color-by-color with a
//! `BK` precalculation, so no two concurrent elements touch the same global
//! node. Time integration is Heun's predictor-corrector.

use rayon::prelude::*;

use crate::error::{Result, SemError};
use crate::mesh::SemMesh;

#[derive(Debug, Clone)]
pub struct CoefficientSet {
    /// M^(e): the coefficient multiplying u̇ (1/K for acoustics).
    pub m: Vec<f64>,
    /// D^(e): the damping-like coefficient (0 for acoustics).
    pub d: Vec<f64>,
    pub b: Vec<[[f64; 2]; 2]>,
    pub e: Vec<[[f64; 2]; 2]>,
    pub f: Vec<[[f64; 2]; 2]>,
    /// Wave speed sqrt(K/rho) per element.
    pub vp: Vec<f64>,
    /// Material parameters kept for energy diagnostics.
    pub rho: Vec<f64>,
    pub k_modulus: Vec<f64>,
}

/// Acoustic system in generic-coefficient form: M = 1/K, B = -I, F = I/rho,
/// D = E = 0.
pub fn build_acoustic_coefficients(mesh: &SemMesh, rho: &[f64], k: &[f64]) -> Result<CoefficientSet> {
    let n_e = mesh.num_elements();
    if rho.len() != n_e || k.len() != n_e {
        return Err(SemError::DimensionMismatch(format!(
            "expected {n_e} material entries, got rho: {}, K: {}",
            rho.len(),
            k.len()
        )));
    }
    let mut out = CoefficientSet {
        m: Vec::with_capacity(n_e),
        d: vec![0.0; n_e],
        b: vec![[[-1.0, 0.0], [0.0, -1.0]]; n_e],
        e: vec![[[0.0; 2]; 2]; n_e],
        f: Vec::with_capacity(n_e),
        vp: Vec::with_capacity(n_e),
        rho: rho.to_vec(),
        k_modulus: k.to_vec(),
    };
    for e in 0..n_e {
        if !(rho[e] > 0.0) {
            return Err(SemError::InvalidMaterial { name: "rho", value: rho[e], element: e });
        }
        if !(k[e] > 0.0) {
            return Err(SemError::InvalidMaterial { name: "K", value: k[e], element: e });
        }
        out.m.push(1.0 / k[e]);
        let inv_rho = 1.0 / rho[e];
        out.f.push([[inv_rho, 0.0], [0.0, inv_rho]]);
        out.vp.push((k[e] / rho[e]).sqrt());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Lumped {
    pub m_bar: Vec<f64>,
    pub d_bar: Vec<f64>,
    /// Y = D̄ / M̄, the precalculated rate coefficient.
    pub y: Vec<f64>,
    pub inv_m: Vec<f64>,
}

/// Lumped assembly: Ā_ν = Σ_{e,q: ν = μ(q,e)} A^(e) 𝒥^(e) ω̂_q.
pub fn assemble_lumped(mesh: &SemMesh, coeffs: &CoefficientSet) -> Result<Lumped> {
    let n = mesh.num_global_nodes();
    let npe = mesh.nodes_per_element();
    let weights = mesh.refelem.weights();
    let mut m_bar = vec![0.0; n];
    let mut d_bar = vec![0.0; n];
    for e in 0..mesh.num_elements() {
        let det = mesh.geometry[e].det;
        for q in 0..npe {
            let nu = mesh.mu[e * npe + q] as usize;
            m_bar[nu] += coeffs.m[e] * det * weights[q];
            d_bar[nu] += coeffs.d[e] * det * weights[q];
        }
    }
    let mut y = vec![0.0; n];
    let mut inv_m = vec![0.0; n];
    for nu in 0..n {
        if !(m_bar[nu] > 0.0) {
            return Err(SemError::NonPositiveLumpedMass { node: nu, value: m_bar[nu] });
        }
        inv_m[nu] = 1.0 / m_bar[nu];
        y[nu] = d_bar[nu] * inv_m[nu];
    }
    Ok(Lumped { m_bar, d_bar, y, inv_m })
}

#[derive(Debug, Clone)]
pub struct FieldState {
    /// Pressure at global nodes.
    pub u: Vec<f64>,
    /// Element-local velocity, layout [e][p][k] with k fastest.
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn zeros(mesh: &SemMesh) -> FieldState {
        FieldState {
            u: vec![0.0; mesh.num_global_nodes()],
            v: vec![0.0; mesh.num_elements() * mesh.nodes_per_element() * 2],
        }
    }

    fn check(&self, mesh: &SemMesh) -> Result<()> {
        let nu = mesh.num_global_nodes();
        let nv = mesh.num_elements() * mesh.nodes_per_element() * 2;
        if self.u.len() != nu || self.v.len() != nv {
            return Err(SemError::DimensionMismatch(format!(
                "U len {} (want {nu}), V len {} (want {nv})",
                self.u.len(),
                self.v.len()
            )));
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite()) && self.v.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct PointSource {
    pub location: [f64; 2],
    pub node: usize,
    pub snap_distance: f64,
    pub f_peak: f64,
    pub t0: f64,
    pub amplitude: f64,
}

impl PointSource {
    /// Attach a source at `location` to the nearest global node (ties go to
    /// the lowest node index).
    pub fn at(mesh: &SemMesh, location: [f64; 2], f_peak: f64, t0: f64, amplitude: f64) -> PointSource {
        let (node, snap_distance) = nearest_node(mesh, location);
        PointSource { location, node, snap_distance, f_peak, t0, amplitude }
    }

    pub fn waveform(&self, t: f64) -> f64 {
        self.amplitude * ricker(t, self.f_peak, self.t0)
    }
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub location: [f64; 2],
    pub node: usize,
    pub snap_distance: f64,
}

impl Probe {
    pub fn at(mesh: &SemMesh, location: [f64; 2]) -> Probe {
        let (node, snap_distance) = nearest_node(mesh, location);
        Probe { location, node, snap_distance }
    }
}

pub fn nearest_node(mesh: &SemMesh, location: [f64; 2]) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (nu, p) in mesh.global_nodes.iter().enumerate() {
        let d = (p[0] - location[0]).hypot(p[1] - location[1]);
        if d < best.1 {
            best = (nu, d);
        }
    }
    best
}

/// Ricker wavelet: (1 - 2 pi^2 f^2 tau^2) exp(-pi^2 f^2 tau^2).
pub fn ricker(t: f64, f_peak: f64, t0: f64) -> f64 {
    let tau = t - t0;
    let a = std::f64::consts::PI * f_peak * tau;
    let a2 = a * a;
    (1.0 - 2.0 * a2) * (-a2).exp()
}

/// V̇ kernel. Element-parallel; each element owns its slice of `vdot`.
pub fn compute_v_rate(
    mesh: &SemMesh,
    coeffs: &CoefficientSet,
    u: &[f64],
    v: &[f64],
    vdot: &mut [f64],
) -> Result<()> {
    let npe = mesh.nodes_per_element();
    if u.len() != mesh.num_global_nodes() || v.len() != vdot.len() || vdot.len() != mesh.num_elements() * npe * 2 {
        return Err(SemError::DimensionMismatch(
            "compute_v_rate: state does not match mesh".into(),
        ));
    }
    let d0 = mesh.refelem.deriv_table(0);
    let d1 = mesh.refelem.deriv_table(1);

    vdot.par_chunks_mut(npe * 2).enumerate().for_each(|(e, vdot_e)| {
        let v_e = &v[e * npe * 2..(e + 1) * npe * 2];
        let ec = &coeffs.e[e];
        // First term: E V.
        for p in 0..npe {
            let (v0, v1) = (v_e[p * 2], v_e[p * 2 + 1]);
            vdot_e[p * 2] = ec[0][0] * v0 + ec[0][1] * v1;
            vdot_e[p * 2 + 1] = ec[1][0] * v0 + ec[1][1] * v1;
        }
        // FK precalculation: FK[k] = [F_k1 K_11, F_k2 K_21, F_k1 K_12, F_k2 K_22]
        // with K_j,jhat read as the (jhat, j) entry of the row-major J^-1, as
        // fixed by the polynomial-gradient oracle.
        let kin = &mesh.geometry[e].inverse;
        let fc = &coeffs.f[e];
        let mut fk = [[0.0f64; 4]; 2];
        for k in 0..2 {
            fk[k][0] = fc[k][0] * kin[0][0];
            fk[k][1] = fc[k][1] * kin[0][1];
            fk[k][2] = fc[k][0] * kin[1][0];
            fk[k][3] = fc[k][1] * kin[1][1];
        }
        // U2 gather.
        let mut u2 = [0.0f64; 64];
        let u2 = &mut u2[..npe];
        for q in 0..npe {
            u2[q] = u[mesh.mu[e * npe + q] as usize];
        }
        // Accumulation: V̇_kp += FK ⋅ N̂_{q,jhat}(x̂_p) U2[q].
        for k in 0..2 {
            let (c0, c1) = (fk[k][0] + fk[k][1], fk[k][2] + fk[k][3]);
            for p in 0..npe {
                let mut acc = 0.0;
                for q in 0..npe {
                    acc += (c0 * d0[q * npe + p] + c1 * d1[q * npe + p]) * u2[q];
                }
                vdot_e[p * 2 + k] += acc;
            }
        }
    });
    Ok(())
}

/// Pointer wrapper so disjoint per-element scatters can run in parallel.
/// Safety: the element coloring guarantees that elements processed together
/// never share a global node.
struct ScatterPtr(*mut f64);
unsafe impl Send for ScatterPtr {}
unsafe impl Sync for ScatterPtr {}

/// Per-color element lists, precomputed once per mesh ordering.
pub struct ColorSchedule {
    lists: Vec<Vec<u32>>,
}

impl ColorSchedule {
    pub fn build(mesh: &SemMesh) -> ColorSchedule {
        let mut lists = vec![Vec::new(); mesh.num_colors];
        for (e, &c) in mesh.colors.iter().enumerate() {
            lists[c as usize].push(e as u32);
        }
        ColorSchedule { lists }
    }
}

/// U̇ kernel: U̇_ν = M̄⁻¹(R_ν + D̄_ν U_ν + y_ν(t)), processed color-by-color.
#[allow(clippy::too_many_arguments)]
pub fn compute_u_rate(
    mesh: &SemMesh,
    coeffs: &CoefficientSet,
    lumped: &Lumped,
    schedule: &ColorSchedule,
    u: &[f64],
    v: &[f64],
    sources: &[PointSource],
    t: f64,
    udot: &mut [f64],
) -> Result<()> {
    let npe = mesh.nodes_per_element();
    if u.len() != mesh.num_global_nodes()
        || udot.len() != u.len()
        || v.len() != mesh.num_elements() * npe * 2
    {
        return Err(SemError::DimensionMismatch(
            "compute_u_rate: state does not match mesh".into(),
        ));
    }
    let d0 = mesh.refelem.deriv_table(0);
    let d1 = mesh.refelem.deriv_table(1);
    let weights = mesh.refelem.weights();

    // Second term: U̇_ν = Y_ν U_ν.
    udot.par_iter_mut()
        .zip(u.par_iter().zip(&lumped.y))
        .for_each(|(ud, (uv, y))| *ud = y * uv);

    // First term: stiffness scatter, color by color.
    let scatter = ScatterPtr(udot.as_mut_ptr());
    let scatter = &scatter;
    for color in &schedule.lists {
        color.par_iter().for_each(|&e32| {
            let e = e32 as usize;
            let geo = &mesh.geometry[e];
            let bc = &coeffs.b[e];
            let kin = &geo.inverse;
            let mut bk = [[0.0f64; 4]; 2];
            for k in 0..2 {
                bk[k][0] = bc[k][0] * kin[0][0];
                bk[k][1] = bc[k][1] * kin[0][1];
                bk[k][2] = bc[k][0] * kin[1][0];
                bk[k][3] = bc[k][1] * kin[1][1];
            }
            let v_e = &v[e * npe * 2..(e + 1) * npe * 2];
            for p in 0..npe {
                let nu = mesh.mu[e * npe + p] as usize;
                let aux1 = lumped.inv_m[nu] * geo.det;
                let mut val = 0.0;
                for k in 0..2 {
                    let (c0, c1) = (bk[k][0] + bk[k][1], bk[k][2] + bk[k][3]);
                    for q in 0..npe {
                        let aux2 = aux1 * weights[q] * v_e[q * 2 + k];
                        val += aux2 * (c0 * d0[p * npe + q] + c1 * d1[p * npe + q]);
                    }
                }
                // Safety: within one color no other element shares node nu.
                unsafe {
                    *scatter.0.add(nu) += val;
                }
            }
        });
    }

    // Third term: point sources.
    for s in sources {
        udot[s.node] += lumped.inv_m[s.node] * s.waveform(t);
    }
    Ok(())
}

/// One Heun predictor-corrector step on a flat state vector. The evaluator
/// writes the rate of `state` into its output slice; it is called exactly
/// twice. `step` is only used to report instability.
pub fn heun_step(
    state: &mut [f64],
    h: f64,
    step: usize,
    mut rate: impl FnMut(&[f64], &mut [f64]),
) -> Result<()> {
    let n = state.len();
    let mut k1 = vec![0.0; n];
    let mut predictor = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    rate(state, &mut k1);
    for i in 0..n {
        predictor[i] = state[i] + h * k1[i];
    }
    rate(&predictor, &mut k2);
    for i in 0..n {
        state[i] += 0.5 * h * (k1[i] + k2[i]);
        if !state[i].is_finite() {
            return Err(SemError::Unstable { step });
        }
    }
    Ok(())
}

pub fn estimate_time_step(mesh: &SemMesh, coeffs: &CoefficientSet, cfl_factor: f64) -> f64 {
    let mut h = f64::INFINITY;
    for e in 0..mesh.num_elements() {
        let t = &mesh.raw.triangles[e];
        let v = &mesh.raw.vertices;
        let mut perimeter = 0.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            perimeter += (v[t[i]][0] - v[t[j]][0]).hypot(v[t[i]][1] - v[t[j]][1]);
        }
        let area = mesh.geometry[e].det / 2.0;
        let inradius = 2.0 * area / perimeter;
        h = h.min(inradius / coeffs.vp[e]);
    }
    let order = mesh.order as f64;
    cfl_factor * h / (order * order)
}

/// Quadrature energy: E = Σ_e 𝒥 Σ_q ω̂_q [u²/(2K) + ρ|v|²/2].
pub fn compute_energy(mesh: &SemMesh, coeffs: &CoefficientSet, u: &[f64], v: &[f64]) -> f64 {
    let npe = mesh.nodes_per_element();
    let weights = mesh.refelem.weights();
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let det = mesh.geometry[e].det;
        let inv2k = 0.5 / coeffs.k_modulus[e];
        let half_rho = 0.5 * coeffs.rho[e];
        let mut acc = 0.0;
        for q in 0..npe {
            let uq = u[mesh.mu[e * npe + q] as usize];
            let (v0, v1) = (v[(e * npe + q) * 2], v[(e * npe + q) * 2 + 1]);
            acc += weights[q] * (uq * uq * inv2k + half_rho * (v0 * v0 + v1 * v1));
        }
        total += det * acc;
    }
    total
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub h: f64,
    pub n_steps: usize,
    /// Record probes every `probe_stride` steps (and at t = 0).
    pub probe_stride: usize,
    pub snapshot_times: Vec<f64>,
    /// Record energy every `energy_stride` steps; 0 disables.
    pub energy_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { h: 1e-3, n_steps: 100, probe_stride: 1, snapshot_times: Vec::new(), energy_stride: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    /// Per probe: (t, u) samples.
    pub probe_traces: Vec<Vec<(f64, f64)>>,
    /// (t, full U field) at the requested snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// (t, energy) samples.
    pub energy: Vec<(f64, f64)>,
    /// Seconds per step.
    pub step_times: Vec<f64>,
    pub steps_completed: usize,
    pub final_state: FieldState,
}

pub fn run_simulation(
    config: &SolverConfig,
    mesh: &SemMesh,
    coeffs: &CoefficientSet,
    sources: &[PointSource],
    probes: &[Probe],
    initial_state: Option<FieldState>,
) -> Result<SimulationOutput> {
    let lumped = assemble_lumped(mesh, coeffs)?;
    let schedule = ColorSchedule::build(mesh);
    let mut state = initial_state.unwrap_or_else(|| FieldState::zeros(mesh));
    state.check(mesh)?;

    let h = config.h;
    let mut rate1 = FieldState::zeros(mesh);
    let mut rate2 = FieldState::zeros(mesh);
    let mut predictor = FieldState::zeros(mesh);

    // Snapshot schedule: nearest step per requested time.
    let mut snap_steps: Vec<(usize, usize)> = config
        .snapshot_times
        .iter()
        .enumerate()
        .map(|(i, &t)| (((t / h).round() as usize).min(config.n_steps), i))
        .collect();
    snap_steps.sort_unstable();

    let mut out = SimulationOutput {
        probe_traces: vec![Vec::new(); probes.len()],
        snapshots: Vec::new(),
        energy: Vec::new(),
        step_times: Vec::with_capacity(config.n_steps),
        steps_completed: 0,
        final_state: FieldState::zeros(mesh),
    };

    let record = |state: &FieldState, step: usize, out: &mut SimulationOutput| {
        let t = step as f64 * h;
        if config.probe_stride > 0 && step % config.probe_stride == 0 {
            for (i, p) in probes.iter().enumerate() {
                out.probe_traces[i].push((t, state.u[p.node]));
            }
        }
        if config.energy_stride > 0 && step % config.energy_stride == 0 {
            out.energy.push((t, compute_energy(mesh, coeffs, &state.u, &state.v)));
        }
        for &(snap_step, idx) in &snap_steps {
            if snap_step == step {
                out.snapshots.push((config.snapshot_times[idx], state.u.clone()));
            }
        }
    };

    record(&state, 0, &mut out);

    for step in 0..config.n_steps {
        let started = std::time::Instant::now();
        let t = step as f64 * h;

        compute_u_rate(mesh, coeffs, &lumped, &schedule, &state.u, &state.v, sources, t, &mut rate1.u)?;
        compute_v_rate(mesh, coeffs, &state.u, &state.v, &mut rate1.v)?;
        axpy(&state.u, h, &rate1.u, &mut predictor.u);
        axpy(&state.v, h, &rate1.v, &mut predictor.v);

        let t1 = t + h;
        compute_u_rate(mesh, coeffs, &lumped, &schedule, &predictor.u, &predictor.v, sources, t1, &mut rate2.u)?;
        compute_v_rate(mesh, coeffs, &predictor.u, &predictor.v, &mut rate2.v)?;
        let half_h = 0.5 * h;
        for i in 0..state.u.len() {
            state.u[i] += half_h * (rate1.u[i] + rate2.u[i]);
        }
        for i in 0..state.v.len() {
            state.v[i] += half_h * (rate1.v[i] + rate2.v[i]);
        }

        if !state.is_finite() {
            return Err(SemError::Unstable { step });
        }
        out.step_times.push(started.elapsed().as_secs_f64());
        out.steps_completed = step + 1;
        record(&state, step + 1, &mut out);
    }
    out.final_state = state;
    Ok(out)
}

fn axpy(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for i in 0..x.len() {
        out[i] = x[i] + a * y[i];
    }
}
