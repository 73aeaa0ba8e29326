//! Fixed-step RK4 propagation of pure states and density matrices.
//!
//! A step spans two waveform samples, so the drive at the RK4 midpoint is read
//! directly from the grid rather than interpolated. Carrier phases e^{−iαt} are
//! evaluated at the exact stage times.

use serde::Serialize;

use super::model::{hamiltonian_from_drives, SystemModel};
use crate::error::{Error, Result};
use crate::passage::{evaluate_passage, synthesize_pulses, PassageSpec, TimeGrid, Waveform};
use crate::qstate::{check_density, fidelity, DensityMatrix, Operator, PureState, C64, MAX_DIM};

/// Upper bound on max‖H‖·dt accepted by the integrators.
pub const MAX_NORM_STEP: f64 = 0.05;

/// Upper bound on the fastest explicit carrier phase advanced per step (rad).
/// At the device anharmonicity this caps the step at 0.1 ns.
pub const MAX_CARRIER_PHASE_STEP: f64 = 0.315;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Level populations at each recorded time.
    pub populations: Vec<Vec<f64>>,
    /// |tr ρ − 1| (or |‖ψ‖² − 1|) at each recorded time.
    pub trace_defects: Vec<f64>,
    /// Population of |2⟩ at the final time.
    pub final_efficiency: f64,
    pub max_p1: f64,
    pub max_p3: f64,
    /// Largest trace (or norm) defect over the run.
    pub trace_defect: f64,
    /// Smallest density-matrix eigenvalue over the run (0 for pure states).
    pub min_eigenvalue: f64,
    /// Largest hermiticity defect over the run (0 for pure states).
    pub hermiticity_defect: f64,
}

impl EvolutionResult {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            populations: Vec::with_capacity(n),
            trace_defects: Vec::with_capacity(n),
            final_efficiency: 0.0,
            max_p1: 0.0,
            max_p3: 0.0,
            trace_defect: 0.0,
            min_eigenvalue: 0.0,
            hermiticity_defect: 0.0,
        }
    }

    fn record(&mut self, t: f64, pops: Vec<f64>, trace_defect: f64) {
        self.max_p1 = self.max_p1.max(pops[1]);
        if let Some(&p3) = pops.get(3) {
            self.max_p3 = self.max_p3.max(p3);
        }
        self.trace_defect = self.trace_defect.max(trace_defect);
        self.final_efficiency = pops[2];
        self.times.push(t);
        self.populations.push(pops);
        self.trace_defects.push(trace_defect);
    }

    pub fn level_count(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    pub fn series(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p.get(level).copied().unwrap_or(0.0)).collect()
    }

    /// Population of `level` at time `t`, linearly interpolated.
    pub fn population_at(&self, level: usize, t: f64) -> Option<f64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let k = self.times.partition_point(|&x| x <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (self.populations[k - 1][level], self.populations[k][level]);
        if t1 == t0 {
            return Some(p1);
        }
        Some(p0 + (p1 - p0) * (t - t0) / (t1 - t0))
    }

    /// First time the population of `level` reaches `threshold`, linearly
    /// interpolated between recorded samples.
    pub fn first_crossing(&self, level: usize, threshold: f64) -> Option<f64> {
        let series = self.series(level);
        if series.first().is_some_and(|&p| p >= threshold) {
            return self.times.first().copied();
        }
        series.windows(2).enumerate().find(|(_, w)| w[0] < threshold && w[1] >= threshold).map(|(k, w)| {
            let frac = (threshold - w[0]) / (w[1] - w[0]);
            self.times[k] + frac * (self.times[k + 1] - self.times[k])
        })
    }
}

fn peak_norm(model: &SystemModel, w: &Waveform) -> f64 {
    (0..w.len())
        .map(|k| hamiltonian_from_drives(model, &w.sample(k), w.detunings(), w.time(k)).norm_inf())
        .fold(0.0, f64::max)
}

fn carrier_rate(model: &SystemModel) -> f64 {
    if model.include_leakage && model.dims == 4 {
        2.0 * model.alpha().abs()
    } else if model.cross_coupling {
        model.alpha().abs()
    } else {
        0.0
    }
}

/// Largest sample spacing at which the integrators accept a waveform with the
/// drive amplitudes of `w` (each RK4 step spans two samples).
pub fn max_sample_spacing(model: &SystemModel, w: &Waveform) -> f64 {
    0.5 * (MAX_NORM_STEP / peak_norm(model, w)).min(MAX_CARRIER_PHASE_STEP / carrier_rate(model))
}

/// Validates that `w` can be stepped two samples at a time with an accurate RK4.
fn check_stepping(model: &SystemModel, w: &Waveform) -> Result<f64> {
    model.validate()?;
    if (w.len() - 1) % 2 != 0 {
        return Err(Error::InvalidWaveform(format!(
            "integrators need an even number of sample intervals, got {}",
            w.len() - 1
        )));
    }
    let step = 2.0 * w.dt();
    let peak_h = peak_norm(model, w);
    let carrier = carrier_rate(model);
    // Suggest a spacing that satisfies both limits, not just the violated one.
    let suggested_dt = 0.5 * (MAX_NORM_STEP / peak_h).min(MAX_CARRIER_PHASE_STEP / carrier);
    if peak_h * step > MAX_NORM_STEP {
        return Err(Error::StepTooLarge { product: peak_h * step, limit: MAX_NORM_STEP, suggested_dt });
    }
    if carrier * step > MAX_CARRIER_PHASE_STEP {
        return Err(Error::StepTooLarge { product: carrier * step, limit: MAX_CARRIER_PHASE_STEP, suggested_dt });
    }
    Ok(step)
}

type Ket = [C64; MAX_DIM];

fn apply_h(h: &Operator, psi: &Ket, dim: usize) -> Ket {
    let m = h.raw();
    let mut out = [C64::new(0.0, 0.0); MAX_DIM];
    for i in 0..dim {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..dim {
            acc += m[i][j] * psi[j];
        }
        // −i H ψ
        out[i] = C64::new(acc.im, -acc.re);
    }
    out
}

fn axpy(x: &Ket, a: f64, y: &Ket, dim: usize) -> Ket {
    let mut out = *x;
    for i in 0..dim {
        out[i] += y[i] * a;
    }
    out
}

/// Integrates iψ̇ = H(t)ψ, calling `observe(t, ψ)` at every step boundary.
pub fn evolve_schrodinger_observed(
    model: &SystemModel,
    w: &Waveform,
    psi0: &PureState,
    mut observe: impl FnMut(f64, &PureState),
) -> Result<EvolutionResult> {
    let step = check_stepping(model, w)?;
    let d = model.dims;
    if psi0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi0.dim() });
    }
    let norm0 = psi0.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("initial state not normalized (norm² = {norm0})")));
    }
    let detunings = w.detunings();
    let h_at = |k: usize| hamiltonian_from_drives(model, &w.sample(k), detunings, w.time(k));

    let mut psi: Ket = [C64::new(0.0, 0.0); MAX_DIM];
    psi[..d].copy_from_slice(psi0.amplitudes());
    let steps = (w.len() - 1) / 2;
    let mut result = EvolutionResult::with_capacity(steps + 1);
    let record = |result: &mut EvolutionResult, t: f64, psi: &Ket| {
        let state = PureState::new(&psi[..d]).expect("valid dimension");
        let pops: Vec<f64> = psi[..d].iter().map(|a| a.norm_sqr()).collect();
        let defect = (pops.iter().sum::<f64>() - 1.0).abs();
        result.record(t, pops, defect);
        state
    };
    observe(0.0, &record(&mut result, 0.0, &psi));

    let mut h_start = h_at(0);
    for s in 0..steps {
        let k = 2 * s;
        let h_mid = h_at(k + 1);
        let h_end = h_at(k + 2);
        let k1 = apply_h(&h_start, &psi, d);
        let k2 = apply_h(&h_mid, &axpy(&psi, 0.5 * step, &k1, d), d);
        let k3 = apply_h(&h_mid, &axpy(&psi, 0.5 * step, &k2, d), d);
        let k4 = apply_h(&h_end, &axpy(&psi, step, &k3, d), d);
        for i in 0..d {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (step / 6.0);
        }
        let t = w.time(k + 2);
        observe(t, &record(&mut result, t, &psi));
        h_start = h_end;
    }
    Ok(result)
}

pub fn evolve_schrodinger(model: &SystemModel, w: &Waveform, psi0: &PureState) -> Result<EvolutionResult> {
    evolve_schrodinger_observed(model, w, psi0, |_, _| {})
}

/// Sparse matrix form of the dissipator Σ D[L]ρ acting on row-major vec(ρ).
struct Dissipator {
    entries: Vec<(usize, usize, C64)>,
}

impl Dissipator {
    fn new(ops: &[Operator], dim: usize) -> Self {
        let mut entries = Vec::new();
        for k in 0..dim {
            for l in 0..dim {
                let basis = Operator::ket_bra(dim, k, l);
                let mut image = Operator::zeros(dim);
                for op in ops {
                    let adj = op.adjoint();
                    let n = adj * *op;
                    image += *op * basis * adj - (n * basis + basis * n).scale_real(0.5);
                }
                for i in 0..dim {
                    for j in 0..dim {
                        let v = image[(i, j)];
                        if v != C64::new(0.0, 0.0) {
                            entries.push((i * MAX_DIM + j, k * MAX_DIM + l, v));
                        }
                    }
                }
            }
        }
        Self { entries }
    }
}

type Mat = [[C64; MAX_DIM]; MAX_DIM];

fn lindblad_rhs(h: &Operator, rho: &Mat, diss: &Dissipator, dim: usize) -> Mat {
    let hm = h.raw();
    let mut out = [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += hm[i][k] * rho[k][j] - rho[i][k] * hm[k][j];
            }
            // −i[H, ρ]
            out[i][j] = C64::new(acc.im, -acc.re);
        }
    }
    for &(row, col, v) in &diss.entries {
        out[row / MAX_DIM][row % MAX_DIM] += v * rho[col / MAX_DIM][col % MAX_DIM];
    }
    out
}

fn mat_axpy(x: &Mat, a: f64, y: &Mat, dim: usize) -> Mat {
    let mut out = *x;
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] += y[i][j] * a;
        }
    }
    out
}

/// Integrates ρ̇ = −i[H, ρ] + Σₖ D[Lₖ]ρ with the model's collapse operators.
pub fn evolve_lindblad(model: &SystemModel, w: &Waveform, rho0: &DensityMatrix) -> Result<EvolutionResult> {
    let step = check_stepping(model, w)?;
    let d = model.dims;
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    let rho0 = DensityMatrix::new(*rho0.operator())?;
    let diss = Dissipator::new(&model.collapse_operators()?, d);
    let detunings = w.detunings();
    let h_at = |k: usize| hamiltonian_from_drives(model, &w.sample(k), detunings, w.time(k));

    let mut rho: Mat = [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
    for (i, row) in rho.iter_mut().enumerate().take(d) {
        for (j, v) in row.iter_mut().enumerate().take(d) {
            *v = rho0.operator()[(i, j)];
        }
    }
    let steps = (w.len() - 1) / 2;
    let mut result = EvolutionResult::with_capacity(steps + 1);
    result.min_eigenvalue = f64::INFINITY;
    let record = |result: &mut EvolutionResult, t: f64, rho: &Mat| {
        let rows: Vec<Vec<C64>> = (0..d).map(|i| rho[i][..d].to_vec()).collect();
        let op = Operator::from_rows(&rows).expect("valid dimension");
        let diag = check_density(&op);
        result.min_eigenvalue = result.min_eigenvalue.min(diag.min_eigenvalue);
        result.hermiticity_defect = result.hermiticity_defect.max(diag.hermiticity_defect);
        let pops: Vec<f64> = (0..d).map(|i| rho[i][i].re).collect();
        result.record(t, pops, diag.trace_defect);
    };
    record(&mut result, 0.0, &rho);

    let mut h_start = h_at(0);
    for s in 0..steps {
        let k = 2 * s;
        let h_mid = h_at(k + 1);
        let h_end = h_at(k + 2);
        let k1 = lindblad_rhs(&h_start, &rho, &diss, d);
        let k2 = lindblad_rhs(&h_mid, &mat_axpy(&rho, 0.5 * step, &k1, d), &diss, d);
        let k3 = lindblad_rhs(&h_mid, &mat_axpy(&rho, 0.5 * step, &k2, d), &diss, d);
        let k4 = lindblad_rhs(&h_end, &mat_axpy(&rho, step, &k3, d), &diss, d);
        for i in 0..d {
            for j in 0..d {
                rho[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (step / 6.0);
            }
        }
        record(&mut result, w.time(k + 2), &rho);
        h_start = h_end;
    }
    Ok(result)
}

/// Final density matrix of a Lindblad run, for callers that need more than
/// populations.
pub fn lindblad_final_state(model: &SystemModel, w: &Waveform, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let step = check_stepping(model, w)?;
    let d = model.dims;
    let diss = Dissipator::new(&model.collapse_operators()?, d);
    let detunings = w.detunings();
    let h_at = |k: usize| hamiltonian_from_drives(model, &w.sample(k), detunings, w.time(k));
    let mut rho: Mat = [[C64::new(0.0, 0.0); MAX_DIM]; MAX_DIM];
    for (i, row) in rho.iter_mut().enumerate().take(d) {
        for (j, v) in row.iter_mut().enumerate().take(d) {
            *v = rho0.operator()[(i, j)];
        }
    }
    let mut h_start = h_at(0);
    for s in 0..(w.len() - 1) / 2 {
        let k = 2 * s;
        let h_mid = h_at(k + 1);
        let h_end = h_at(k + 2);
        let k1 = lindblad_rhs(&h_start, &rho, &diss, d);
        let k2 = lindblad_rhs(&h_mid, &mat_axpy(&rho, 0.5 * step, &k1, d), &diss, d);
        let k3 = lindblad_rhs(&h_mid, &mat_axpy(&rho, 0.5 * step, &k2, d), &diss, d);
        let k4 = lindblad_rhs(&h_end, &mat_axpy(&rho, step, &k3, d), &diss, d);
        for i in 0..d {
            for j in 0..d {
                rho[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (step / 6.0);
            }
        }
        h_start = h_end;
    }
    let rows: Vec<Vec<C64>> = (0..d).map(|i| rho[i][..d].to_vec()).collect();
    Ok(DensityMatrix::from_operator_unchecked(Operator::from_rows(&rows)?))
}

/// Largest infidelity 1 − |⟨Φ(t)|ψ(t)⟩|² between the passage and the closed
/// three-level evolution it was designed for, started on Φ(0).
pub fn passage_consistency(spec: &PassageSpec, grid: &TimeGrid) -> Result<f64> {
    let w = synthesize_pulses(spec, grid)?;
    passage_tracking_error(spec, &w)
}

/// Same as [`passage_consistency`] but for an arbitrary waveform on the
/// passage's time span.
pub fn passage_tracking_error(spec: &PassageSpec, w: &Waveform) -> Result<f64> {
    let model = SystemModel::ideal_three_level();
    let psi0 = evaluate_passage(spec, 0.0)?;
    let mut worst = 0.0_f64;
    let mut failure = None;
    evolve_schrodinger_observed(&model, w, &psi0, |t, psi| match evaluate_passage(spec, t) {
        Ok(target) => worst = worst.max(1.0 - fidelity(&target, psi).unwrap_or(0.0)),
        Err(e) => failure = Some(e),
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}
