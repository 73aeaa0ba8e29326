//! Box-constrained Nelder–Mead and the pulse-design problems built on it:
//! fitting the G-bump (A, B), fitting DRAG coefficients, and calibrating the
//! drive amplitude against a transfer-time target.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_lindblad, EvolutionResult, SystemModel};
use crate::error::{Error, Result};
use crate::passage::{drag_correct, synthesize_pulses, GShapeKind, PassageSpec, TimeGrid, Waveform};
use crate::qstate::DensityMatrix;

/// Simplex diameter (in box-normalized coordinates) at which the search stops.
pub const SIMPLEX_TOLERANCE: f64 = 1e-4;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.1;

pub const A_BOUNDS: (f64, f64) = (0.0, 5.0);
pub const B_BOUNDS: (f64, f64) = (2.0, 12.0);
pub const LAMBDA_BOUNDS: (f64, f64) = (-2.0, 2.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), lower, upper }
    }
}

/// A cost to minimize over a box. The objective must be pure: the same point
/// always yields the same cost.
pub struct OptimizationProblem<F> {
    pub parameters: Vec<Parameter>,
    pub objective: F,
    pub budget: usize,
    pub seed: u64,
}

impl<F: Fn(&[f64]) -> f64> OptimizationProblem<F> {
    pub fn new(parameters: Vec<Parameter>, objective: F, budget: usize, seed: u64) -> Self {
        Self { parameters, objective, budget, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::ZeroBudget);
        }
        if self.parameters.is_empty() {
            return Err(Error::InvalidArgument("problem has no parameters".into()));
        }
        for p in &self.parameters {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {} has invalid bounds [{}, {}]",
                    p.name, p.lower, p.upper
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub params: Vec<f64>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub parameter_names: Vec<String>,
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub evaluations: usize,
    /// Best point after each iteration; costs never increase.
    pub trace: Vec<TraceEntry>,
}

struct Scaled<'a, F> {
    problem: &'a OptimizationProblem<F>,
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Scaled<'_, F> {
    fn to_params(&self, u: &[f64]) -> Vec<f64> {
        self.problem
            .parameters
            .iter()
            .zip(u)
            .map(|(p, &ui)| p.lower + ui.clamp(0.0, 1.0) * (p.upper - p.lower))
            .collect()
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.problem.budget
    }

    fn cost(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let c = (self.problem.objective)(&self.to_params(u));
        if c.is_nan() {
            f64::INFINITY
        } else {
            c
        }
    }
}

fn project(u: &mut [f64]) {
    for v in u {
        *v = v.clamp(0.0, 1.0);
    }
}

fn lerp(from: &[f64], to: &[f64], s: f64) -> Vec<f64> {
    let mut out: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect();
    project(&mut out);
    out
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Nelder–Mead with coefficients (1, 2, 0.5, 0.5) in box-normalized
/// coordinates; trial points are projected back onto the box. The seed picks
/// the direction of each initial simplex edge.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(problem: &OptimizationProblem<F>, x0: &[f64]) -> Result<OptimizationReport> {
    problem.validate()?;
    let n = problem.parameters.len();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    let mut u0 = Vec::with_capacity(n);
    for (p, &x) in problem.parameters.iter().zip(x0) {
        if !(x >= p.lower && x <= p.upper) {
            return Err(Error::InvalidArgument(format!(
                "start {} = {x} lies outside [{}, {}]",
                p.name, p.lower, p.upper
            )));
        }
        u0.push((x - p.lower) / (p.upper - p.lower));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let mut eval = Scaled { problem, evaluations: 0 };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let c0 = eval.cost(&u0);
    simplex.push((u0.clone(), c0));
    for i in 0..n {
        if eval.exhausted() {
            break;
        }
        let mut v = u0.clone();
        let mut step = if rng.next_u32() & 1 == 0 { INITIAL_STEP } else { -INITIAL_STEP };
        if !(0.0..=1.0).contains(&(v[i] + step)) {
            step = -step;
        }
        v[i] += step;
        let c = eval.cost(&v);
        simplex.push((v, c));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);
    let mut trace = vec![TraceEntry { params: eval.to_params(&simplex[0].0), cost: simplex[0].1 }];

    while simplex.len() == n + 1 && !eval.exhausted() && diameter(&simplex) >= SIMPLEX_TOLERANCE {
        let worst = simplex[n].clone();
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();

        let reflected = lerp(&centroid, &worst.0, -REFLECT);
        let fr = eval.cost(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -EXPAND);
            let fe = if eval.exhausted() { f64::INFINITY } else { eval.cost(&expanded) };
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else if !eval.exhausted() {
            let (target, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = lerp(&centroid, target, CONTRACT);
            let fc = eval.cost(&contracted);
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if eval.exhausted() {
                        break;
                    }
                    let v = lerp(&best, &vertex.0, SHRINK);
                    let c = eval.cost(&v);
                    *vertex = (v, c);
                }
            }
        }
        order(&mut simplex);
        trace.push(TraceEntry { params: eval.to_params(&simplex[0].0), cost: simplex[0].1 });
    }

    let best = &simplex[0];
    Ok(OptimizationReport {
        parameter_names: problem.parameters.iter().map(|p| p.name.clone()).collect(),
        best_params: eval.to_params(&best.0),
        best_cost: best.1,
        evaluations: eval.evaluations,
        trace,
    })
}

/// Runs the waveform from |0⟩⟨0| and returns the full evolution.
pub fn simulate_from_ground(model: &SystemModel, waveform: &Waveform) -> Result<EvolutionResult> {
    evolve_lindblad(model, waveform, &DensityMatrix::ground(model.dims)?)
}

/// 1 − P₂(T) for the waveform produced by `build`. Construction or
/// integration failures cost 1 so a search can step past them.
pub fn transfer_cost(model: &SystemModel, build: impl FnOnce() -> Result<Waveform>) -> f64 {
    match build().and_then(|w| simulate_from_ground(model, &w)) {
        Ok(r) => (1.0 - r.final_efficiency).clamp(0.0, 1.0),
        Err(e) => {
            log::warn!("transfer cost evaluation failed, scoring as 1: {e}");
            1.0
        }
    }
}

/// Cost of the passage `template` with its bump set to (A, B).
pub fn passage_cost(model: &SystemModel, template: &PassageSpec, spacing: f64, a: f64, b: f64) -> f64 {
    transfer_cost(model, || {
        let mut spec = *template;
        spec.g.a = a;
        spec.g.b = b;
        synthesize_pulses(&spec, &TimeGrid::new(spec.duration, spacing)?)
    })
}

/// Result of a multi-start search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiStartFit {
    pub params: Vec<f64>,
    pub report: OptimizationReport,
    /// Best cost reached from each start, in start order.
    pub start_costs: Vec<f64>,
    pub total_evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Evaluation budget for each start.
    pub budget: usize,
    pub seed: u64,
    /// Waveform sample spacing in ns.
    pub spacing: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { budget: 150, seed: 7, spacing: crate::passage::DEFAULT_SAMPLE_SPACING }
    }
}

fn multi_start<F>(parameters: Vec<Parameter>, objective: F, starts: &[Vec<f64>], settings: SearchSettings) -> Result<MultiStartFit>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let reports: Vec<Result<OptimizationReport>> = starts
        .par_iter()
        .enumerate()
        .map(|(k, x0)| {
            let problem = OptimizationProblem::new(
                parameters.clone(),
                &objective,
                settings.budget,
                settings.seed.wrapping_add(k as u64),
            );
            nelder_mead(&problem, x0)
        })
        .collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let start_costs: Vec<f64> = reports.iter().map(|r| r.best_cost).collect();
    let total_evaluations = reports.iter().map(|r| r.evaluations).sum();
    // First start wins ties, so the result does not depend on scheduling.
    let (best, _) = reports
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, r)| if r.best_cost < acc.1 { (k, r.best_cost) } else { acc });
    let report = reports.into_iter().nth(best).expect("at least one start");
    Ok(MultiStartFit { params: report.best_params.clone(), report, start_costs, total_evaluations })
}

/// Multi-start fit of the G bump (A, B) over [0, 5] × [2, 12], starting from a
/// 3 × 3 grid of points.
pub fn optimize_ab(model: &SystemModel, template: &PassageSpec, settings: SearchSettings) -> Result<MultiStartFit> {
    template.validate()?;
    if template.g.kind == GShapeKind::Constant {
        return Err(Error::InvalidArgument("A and B only exist for bump-shaped G".into()));
    }
    let parameters = vec![Parameter::new("A", A_BOUNDS.0, A_BOUNDS.1), Parameter::new("B", B_BOUNDS.0, B_BOUNDS.1)];
    let starts: Vec<Vec<f64>> =
        [0.0, 2.5, 5.0].iter().flat_map(|&a| [2.0, 7.0, 12.0].map(|b| vec![a, b])).collect();
    let objective = |p: &[f64]| passage_cost(model, template, settings.spacing, p[0], p[1]);
    multi_start(parameters, objective, &starts, settings)
}

/// Fit of the DRAG coefficients (λ_P, λ_S) for a given waveform, started from
/// the uncorrected point and from the textbook value (1, 1).
pub fn optimize_drag(model: &SystemModel, waveform: &Waveform, bounds: (f64, f64), settings: SearchSettings) -> Result<MultiStartFit> {
    if model.dims != 4 {
        return Err(Error::InvalidModel(format!("DRAG fitting needs the 4-level model, got dims = {}", model.dims)));
    }
    let (lo, hi) = bounds;
    let parameters = vec![Parameter::new("lambda_pump", lo, hi), Parameter::new("lambda_stokes", lo, hi)];
    let starts = vec![vec![0.0_f64.clamp(lo, hi); 2], vec![1.0_f64.clamp(lo, hi); 2]];
    let alpha = model.alpha();
    let objective = |p: &[f64]| transfer_cost(model, || drag_correct(waveform, alpha, p[0], p[1]));
    multi_start(parameters, objective, &starts, settings)
}

/// Transfer target: population `efficiency` in |2⟩ reached by `time` ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferTarget {
    pub efficiency: f64,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub omega0: f64,
    /// Highest P₂ reached by the target time at `omega0`.
    pub achieved: f64,
    /// First time P₂ reaches the target efficiency.
    pub crossing: Option<f64>,
    pub evaluations: usize,
}

/// Allowed mismatch between achieved and target efficiency.
pub const CALIBRATION_TOLERANCE: f64 = 0.002;
const BRACKET_POINTS: usize = 25;

/// Highest P₂ reached at or before `time`.
pub fn efficiency_by(result: &EvolutionResult, time: f64) -> f64 {
    result
        .times
        .iter()
        .zip(&result.populations)
        .take_while(|(t, _)| **t <= time + 1e-9)
        .map(|(_, p)| p[2])
        .fold(0.0, f64::max)
}

/// Finds the smallest amplitude in [Ω₀/10, 10Ω₀] at which the protocol built
/// by `build` first reaches the target efficiency exactly at the target time.
/// A logarithmic scan brackets the root, then bisection refines it.
pub fn calibrate_amplitude<B>(model: &SystemModel, build: B, omega0: f64, target: TransferTarget) -> Result<Calibration>
where
    B: Fn(f64) -> Result<Waveform> + Sync,
{
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::InvalidArgument(format!("reference amplitude must be positive, got {omega0}")));
    }
    if !(target.efficiency > 0.0 && target.efficiency < 1.0 && target.time > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target needs efficiency in (0, 1) and positive time, got {target:?}"
        )));
    }
    let achieved = |o: f64| -> Result<f64> { Ok(efficiency_by(&simulate_from_ground(model, &build(o)?)?, target.time)) };
    let (low, high) = (omega0 / 10.0, omega0 * 10.0);
    let grid: Vec<f64> = (0..BRACKET_POINTS)
        .map(|k| low * (high / low).powf(k as f64 / (BRACKET_POINTS - 1) as f64))
        .collect();
    let values = grid.par_iter().map(|&o| achieved(o)).collect::<Result<Vec<f64>>>()?;
    let mut evaluations = grid.len();
    let Some(k) = (1..grid.len()).find(|&k| values[k - 1] < target.efficiency && values[k] >= target.efficiency) else {
        let (lo_eff, hi_eff) = (values[0], values[grid.len() - 1]);
        return Err(Error::CalibrationUnreachable {
            target: target.efficiency,
            time: target.time,
            low,
            low_eff: lo_eff,
            high,
            high_eff: hi_eff,
        });
    };
    let (mut lo, mut hi) = (grid[k - 1], grid[k]);
    let mut hi_value = values[k];
    while hi / lo - 1.0 > 1e-9 {
        let mid = 0.5 * (lo + hi);
        let v = achieved(mid)?;
        evaluations += 1;
        if v >= target.efficiency {
            hi = mid;
            hi_value = v;
        } else {
            lo = mid;
        }
    }
    if hi_value - target.efficiency > CALIBRATION_TOLERANCE {
        return Err(Error::CalibrationUnreachable {
            target: target.efficiency,
            time: target.time,
            low: lo,
            low_eff: achieved(lo)?,
            high: hi,
            high_eff: hi_value,
        });
    }
    let result = simulate_from_ground(model, &build(hi)?)?;
    Ok(Calibration {
        omega0: hi,
        achieved: efficiency_by(&result, target.time),
        crossing: result.first_crossing(2, target.efficiency),
        evaluations: evaluations + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passage::{GShape, DEFAULT_OMEGA0};
    use approx::assert_abs_diff_eq;

    fn bowl_problem(budget: usize) -> OptimizationProblem<impl Fn(&[f64]) -> f64> {
        OptimizationProblem::new(
            vec![Parameter::new("x", -1.0, 1.0), Parameter::new("y", -1.0, 1.0)],
            |p: &[f64]| (p[0] - 0.3).powi(2) + (p[1] + 0.2).powi(2),
            budget,
            3,
        )
    }

    #[test]
    fn quadratic_bowl_converges() {
        let r = nelder_mead(&bowl_problem(500), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r.best_params[0], 0.3, epsilon = 1e-3);
        assert_abs_diff_eq!(r.best_params[1], -0.2, epsilon = 1e-3);
        assert!(r.evaluations <= 500);
    }

    #[test]
    fn rosenbrock_reaches_valley_floor() {
        let problem = OptimizationProblem::new(
            vec![Parameter::new("x", -2.0, 2.0), Parameter::new("y", -2.0, 2.0)],
            |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            2000,
            11,
        );
        let r = nelder_mead(&problem, &[-1.0, 1.0]).unwrap();
        assert!(r.best_cost <= 1e-6, "cost {}", r.best_cost);
    }

    #[test]
    fn zero_budget_is_rejected() {
        assert!(matches!(nelder_mead(&bowl_problem(0), &[0.0, 0.0]), Err(Error::ZeroBudget)));
    }

    #[test]
    fn start_outside_box_is_rejected() {
        assert!(nelder_mead(&bowl_problem(10), &[1.5, 0.0]).is_err());
    }

    #[test]
    fn budget_is_respected() {
        let r = nelder_mead(&bowl_problem(7), &[0.9, 0.9]).unwrap();
        assert!(r.evaluations <= 7);
    }

    #[test]
    fn optimum_on_boundary_stays_in_box() {
        let problem = OptimizationProblem::new(
            vec![Parameter::new("x", 0.0, 1.0), Parameter::new("y", 0.0, 1.0)],
            |p: &[f64]| (p[0] - 3.0).powi(2) + (p[1] + 1.0).powi(2),
            400,
            0,
        );
        let r = nelder_mead(&problem, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(r.best_params[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(r.best_params[1], 0.0, epsilon = 1e-3);
        for entry in &r.trace {
            assert!(entry.params.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn efficiency_by_is_running_maximum() {
        let result = EvolutionResult {
            times: vec![0.0, 1.0, 2.0, 3.0],
            populations: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.9], vec![0.0, 0.2, 0.8], vec![0.0, 0.0, 0.95]],
            trace_defects: vec![0.0; 4],
            final_efficiency: 0.95,
            max_p1: 0.2,
            max_p3: 0.0,
            trace_defect: 0.0,
            min_eigenvalue: 0.0,
            hermiticity_defect: 0.0,
        };
        assert_eq!(efficiency_by(&result, 2.5), 0.9);
        assert_eq!(efficiency_by(&result, 3.0), 0.95);
        assert_eq!(efficiency_by(&result, 0.5), 0.0);
    }

    #[test]
    fn zero_amplitude_costs_one() {
        let model = SystemModel::transmon();
        let grid = TimeGrid::with_intervals(8.0, 400).unwrap();
        let zeros = vec![crate::qstate::C64::new(0.0, 0.0); grid.len()];
        let cost = transfer_cost(&model, || Waveform::from_grid(&grid, zeros.clone(), zeros.clone()));
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn failed_build_costs_one() {
        let model = SystemModel::transmon();
        assert_eq!(transfer_cost(&model, || Err(Error::InvalidWaveform("broken".into()))), 1.0);
    }

    #[test]
    fn passage_cost_is_deterministic() {
        let model = SystemModel::transmon();
        let template = PassageSpec::sigmoid(20.0, GShape::hyper_gauss_bump(0.2, 0.0, 6.0));
        let a = passage_cost(&model, &template, 0.02, 1.0, 6.0);
        let b = passage_cost(&model, &template, 0.02, 1.0, 6.0);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn constant_template_is_rejected() {
        let template = PassageSpec::sigmoid(20.0, GShape::constant(DEFAULT_OMEGA0));
        assert!(optimize_ab(&SystemModel::transmon(), &template, SearchSettings::default()).is_err());
    }

    #[test]
    fn drag_needs_leakage_level() {
        let grid = TimeGrid::with_intervals(8.0, 400).unwrap();
        let w = crate::passage::rr_waveform(&grid).unwrap();
        assert!(optimize_drag(&SystemModel::ideal_three_level(), &w, LAMBDA_BOUNDS, SearchSettings::default()).is_err());
    }

    #[test]
    fn unreachable_calibration_reports_bracket() {
        let model = SystemModel::transmon();
        let grid = TimeGrid::with_intervals(4.0, 200).unwrap();
        let build = |o: f64| crate::passage::stirap_waveform(o, crate::passage::StirapTiming::default_for(4.0), &grid);
        let err = calibrate_amplitude(&model, build, 0.01, TransferTarget { efficiency: 0.96, time: 4.0 }).unwrap_err();
        match err {
            Error::CalibrationUnreachable { low, high, low_eff, high_eff, .. } => {
                assert!(low < high);
                assert!(low_eff < 0.96 && high_eff < 0.96);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
