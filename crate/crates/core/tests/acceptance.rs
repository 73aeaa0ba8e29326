//! End-to-end acceptance checks. Runs the full calibrate/optimize pipeline
//! once, then prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use passage_core::bench::{
    default_detuning_axis, default_eta_axis, detuning_map, efficiency_curve, rabi_error_sweep, resolve_protocols,
    terminal_oscillation, Protocol, ProtocolKind, Resolution, ResolutionSettings, SweepGrid, DEFAULT_DETUNING_POINTS,
    ROBUSTNESS_ETA,
};
use passage_core::dynamics::{
    evolve_lindblad, evolve_schrodinger, lindblad_final_state, passage_consistency, EvolutionResult, SystemModel,
};
use passage_core::optimize::{optimize_ab, passage_cost};
use passage_core::passage::{
    intermediate_population_profile, stirap_waveform, synthesize_pulses, GShape, PassageSpec, StirapTiming, TimeGrid,
    Waveform, DEFAULT_SAMPLE_SPACING,
};
use passage_core::qstate::{DensityMatrix, PureState, C64};

const SPACING: f64 = DEFAULT_SAMPLE_SPACING;

// Tolerances.
const INVERSION_INFIDELITY: f64 = 1e-6;
const HEADLINE_THRESHOLD: f64 = 0.99;
const HEADLINE_TIME: f64 = 44.0;
const FINAL_EFFICIENCY_FLOOR: f64 = 0.995 - 0.003;
const SPEEDUP_RATIO: f64 = 4.0;
const CROSSING_WINDOW: f64 = 2.0;
const ROBUST_FLOOR: f64 = 0.92;
const RIDGE_DROP: f64 = 0.05;
const HIGH_EFFICIENCY: f64 = 0.9;
const OSCILLATION_PRESENT: f64 = 0.01;
const OSCILLATION_ABSENT: f64 = 0.003;
const TAIL_FRACTION: f64 = 0.2;
const NORM_DRIFT: f64 = 1e-9;
const TRACE_DEFECT: f64 = 1e-6;
const POSITIVITY: f64 = -1e-6;
const CLOSED_AGREEMENT: f64 = 1e-7;
const DECAY_FIT: f64 = 0.01;
const ADIABATIC_GAP: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn inversion_oracle() -> Outcome {
    let duration = 44.0;
    let grid = TimeGrid::with_default_spacing(duration).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, g) in [
        ("constant", GShape::constant(0.11)),
        ("gauss-bump", GShape::gauss_bump(0.11, 1.0, 4.0)),
        ("hyper-gauss-bump", GShape::hyper_gauss_bump(0.11, 0.28, 2.0)),
    ] {
        let e = passage_consistency(&PassageSpec::sigmoid(duration, g), &grid).unwrap();
        worst = worst.max(e);
        parts.push(format!("{name} {e:.2e}"));
    }
    outcome(worst <= INVERSION_INFIDELITY, format!("max infidelity {} (limit {INVERSION_INFIDELITY:e})", parts.join(", ")))
}

fn transfer_headline(op: &EvolutionResult) -> Outcome {
    let crossing = op.first_crossing(2, HEADLINE_THRESHOLD);
    let pass = crossing.is_some_and(|t| t <= HEADLINE_TIME) && op.final_efficiency >= FINAL_EFFICIENCY_FLOOR;
    outcome(
        pass,
        format!(
            "P2 >= {HEADLINE_THRESHOLD} at {crossing:?} ns (limit {HEADLINE_TIME}); final {:.5} (floor {FINAL_EFFICIENCY_FLOOR})",
            op.final_efficiency
        ),
    )
}

fn speedup(res: &Resolution, op: &EvolutionResult, stirap: &EvolutionResult) -> Outcome {
    let (t_op, t_stirap) = (op.first_crossing(2, 0.96), stirap.first_crossing(2, 0.96));
    let (Some(t_op), Some(t_stirap)) = (t_op, t_stirap) else {
        return outcome(false, format!("missing 96% crossing: stirup-op {t_op:?}, stirap {t_stirap:?}"));
    };
    let ratio = t_stirap / t_op;
    let op_ok = (t_op - 34.0).abs() <= CROSSING_WINDOW;
    let stirap_ok = (t_stirap - 150.0).abs() <= CROSSING_WINDOW;
    outcome(
        ratio >= SPEEDUP_RATIO && op_ok && stirap_ok,
        format!(
            "t96 stirup-op {t_op:.2} ns (omega0 {:.5}), stirap {t_stirap:.2} ns (omega0 {:.5}); ratio {ratio:.2}",
            res.stirup_op.omega0, res.stirap.omega0
        ),
    )
}

fn amplitude_robustness(op: &SweepGrid, rr: &SweepGrid) -> Outcome {
    let worst_op = op.worst_within(-ROBUSTNESS_ETA, ROBUSTNESS_ETA).unwrap();
    let worst_rr = rr.worst_within(-ROBUSTNESS_ETA, ROBUSTNESS_ETA).unwrap();
    outcome(
        worst_op > ROBUST_FLOOR && worst_op > worst_rr,
        format!("worst over |eta| <= {ROBUSTNESS_ETA}: stirup-op {worst_op:.4} (floor {ROBUST_FLOOR}), rr {worst_rr:.4}"),
    )
}

fn detuning_ridge(op: &SweepGrid, stirap: &SweepGrid, rr: &SweepGrid) -> Outcome {
    let diagonal = op.anti_diagonal().unwrap();
    let n = diagonal.len();
    let centre = op.at(n / 2, n / 2);
    let span = op.axes[0].max;
    let worst_drop = diagonal
        .iter()
        .filter(|(d, _)| d.abs() <= 0.5 * span + 1e-12)
        .map(|(_, e)| centre - e)
        .fold(f64::NEG_INFINITY, f64::max);
    let areas = [op, stirap, rr].map(|g| g.cells_at_least(HIGH_EFFICIENCY));
    let pass = worst_drop <= RIDGE_DROP && areas[1] < areas[0] && areas[2] < areas[0];
    outcome(
        pass,
        format!(
            "ridge drop {worst_drop:.4} from centre {centre:.4} (limit {RIDGE_DROP}); cells >= {HIGH_EFFICIENCY}: stirup-op {}, stirap {}, rr {}",
            areas[0], areas[1], areas[2]
        ),
    )
}

fn terminal_pathology(plain: &EvolutionResult, op: &EvolutionResult) -> Outcome {
    let (a, b) = (terminal_oscillation(plain, TAIL_FRACTION), terminal_oscillation(op, TAIL_FRACTION));
    outcome(
        a >= OSCILLATION_PRESENT && b <= OSCILLATION_ABSENT,
        format!("tail peak-to-trough: stirup {a:.4} (>= {OSCILLATION_PRESENT}), stirup-op {b:.4} (<= {OSCILLATION_ABSENT})"),
    )
}

fn fit_rate(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len() as f64;
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (mx, my) = (times.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = times.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = times.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

fn free_decay(model: &SystemModel, rho0: &DensityMatrix, probe: impl Fn(&DensityMatrix) -> f64) -> f64 {
    let checkpoints: Vec<f64> = (1..=8).map(|k| 250.0 * k as f64).collect();
    let values: Vec<f64> = checkpoints
        .iter()
        .map(|&t| {
            let grid = TimeGrid::new(t, 0.05).unwrap();
            let zeros = vec![C64::new(0.0, 0.0); grid.len()];
            let w = Waveform::from_grid(&grid, zeros.clone(), zeros).unwrap();
            probe(&lindblad_final_state(model, &w, rho0).unwrap())
        })
        .collect();
    1.0 / fit_rate(&checkpoints, &values)
}

fn integrator_physics(curves: &[(ProtocolKind, EvolutionResult)]) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let model = SystemModel::transmon();
    let op = Protocol::preset(ProtocolKind::StirupOp).waveform(&model, SPACING).unwrap();
    let closed = model.without_decoherence();
    let psi = evolve_schrodinger(&closed, &op, &PureState::basis(4, 0).unwrap()).unwrap();
    pass &= psi.trace_defect <= NORM_DRIFT;
    notes.push(format!("norm drift {:.1e}", psi.trace_defect));

    let trace = curves.iter().map(|(_, r)| r.trace_defect).fold(0.0, f64::max);
    let positivity = curves.iter().map(|(_, r)| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    pass &= trace <= TRACE_DEFECT && positivity >= POSITIVITY;
    notes.push(format!("trace defect {trace:.1e}, min eigenvalue {positivity:.1e}"));

    let rho = evolve_lindblad(&closed, &op, &DensityMatrix::ground(4).unwrap()).unwrap();
    let gap = rho
        .populations
        .iter()
        .zip(&psi.populations)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    pass &= gap <= CLOSED_AGREEMENT;
    notes.push(format!("closed lindblad vs schrodinger {gap:.1e}"));

    let plus = |i: usize, j: usize| {
        let mut amps = vec![C64::new(0.0, 0.0); 4];
        amps[i] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[j] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DensityMatrix::from_pure(&PureState::new(&amps).unwrap())
    };
    let basis = |k: usize| DensityMatrix::from_pure(&PureState::basis(4, k).unwrap());
    let fits = [
        ("T1_10", free_decay(&model, &basis(1), |r| r.operator()[(1, 1)].re), model.t1_10),
        ("T1_21", free_decay(&model, &basis(2), |r| r.operator()[(2, 2)].re), model.t1_21),
        ("T2_10", free_decay(&model, &plus(0, 1), |r| r.operator()[(0, 1)].norm()), model.t2_10),
        ("T2_21", free_decay(&model, &plus(1, 2), |r| r.operator()[(1, 2)].norm()), model.t2_21),
    ];
    for (name, fitted, configured) in fits {
        let rel = (fitted / configured - 1.0).abs();
        pass &= rel <= DECAY_FIT;
        notes.push(format!("{name} {fitted:.1} ns ({:+.3}%)", 100.0 * (fitted / configured - 1.0)));
    }
    outcome(pass, notes.join("; "))
}

fn adiabatic_limit() -> Outcome {
    let model = SystemModel::ideal_three_level();
    let omega0 = 0.5;
    let mut gaps = Vec::new();
    for duration in [25.0, 50.0, 100.0, 200.0, 400.0] {
        let grid = TimeGrid::with_default_spacing(duration).unwrap();
        let stirup = synthesize_pulses(&PassageSpec::sigmoid(duration, GShape::constant(omega0)), &grid).unwrap();
        let stirap = stirap_waveform(omega0, StirapTiming::default_for(duration), &grid).unwrap();
        let ground = PureState::basis(3, 0).unwrap();
        let a = evolve_schrodinger(&model, &stirup, &ground).unwrap().final_efficiency;
        let b = evolve_schrodinger(&model, &stirap, &ground).unwrap().final_efficiency;
        gaps.push((omega0 * duration, (a - b).abs()));
    }
    let last = gaps.last().unwrap().1;
    let text: Vec<String> = gaps.iter().map(|(x, g)| format!("{x:.0}: {g:.1e}")).collect();
    outcome(last < ADIABATIC_GAP, format!("|P2 stirup - P2 stirap| by omega0*T {}", text.join(", ")))
}

fn optimizer_sanity(res: &Resolution, model: &SystemModel, drag_curve: &EvolutionResult) -> Outcome {
    let mut notes = Vec::new();
    let op = res.stirup_op;
    let template = op.passage().unwrap();
    let cost_a0 = passage_cost(model, &template, SPACING, 0.0, op.b);
    let cost_best = res.ab_fit.report.best_cost;
    let mut pass = cost_best <= cost_a0;
    notes.push(format!("ab cost {cost_best:.5} vs A=0 {cost_a0:.5}"));

    let grid = TimeGrid::with_default_spacing(op.duration).unwrap();
    let peak = |a: f64| {
        let mut spec = template;
        spec.g.a = a;
        intermediate_population_profile(&spec, &grid).unwrap().into_iter().fold(0.0, f64::max)
    };
    let (p1_best, p1_zero) = (peak(op.a), peak(0.0));
    pass &= p1_best < p1_zero;
    notes.push(format!("designed peak P1 {p1_best:.4} vs A=0 {p1_zero:.4}"));

    let undragged = efficiency_curve(&res.stirup, model, SPACING).unwrap();
    pass &= drag_curve.max_p3 < undragged.max_p3;
    notes.push(format!("max P3 with DRAG {:.5} vs without {:.5}", drag_curve.max_p3, undragged.max_p3));

    let monotone = |r: &passage_core::optimize::OptimizationReport| r.trace.windows(2).all(|w| w[1].cost <= w[0].cost);
    pass &= monotone(&res.ab_fit.report) && monotone(&res.drag_fit.report);

    let again = optimize_ab(model, &template, ResolutionSettings::default().search).unwrap();
    let identical = again.params.iter().zip(&res.ab_fit.params).all(|(x, y)| x.to_bits() == y.to_bits())
        && again.report.best_cost.to_bits() == res.ab_fit.report.best_cost.to_bits();
    pass &= identical;
    notes.push(format!("traces monotone, rerun identical: {identical}"));
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let model = SystemModel::transmon();
    let res = resolve_protocols(&model, &ResolutionSettings::default()).expect("protocol resolution");
    eprintln!("resolved protocols in {:.1?}", started.elapsed());

    let curves: Vec<(ProtocolKind, EvolutionResult)> =
        res.protocols().iter().map(|p| (p.kind, efficiency_curve(p, &model, SPACING).unwrap())).collect();
    let curve = |k: ProtocolKind| &curves.iter().find(|(kind, _)| *kind == k).unwrap().1;

    let eta_op = rabi_error_sweep(&res.stirup_op, &model, default_eta_axis(), SPACING).unwrap();
    let eta_rr = rabi_error_sweep(&res.rr, &model, default_eta_axis(), SPACING).unwrap();

    let map = |p: &Protocol| {
        let axis = |name| default_detuning_axis(name, DEFAULT_DETUNING_POINTS);
        detuning_map(p, &model, axis("delta1"), axis("delta2"), SPACING).unwrap()
    };
    let map_op = map(&res.stirup_op);
    let map_stirap = map(&res.stirap);
    let map_rr = map(&res.rr);
    eprintln!("sweeps finished after {:.1?}", started.elapsed());

    let results = [
        ("passage inversion oracle", inversion_oracle()),
        ("transfer headline", transfer_headline(curve(ProtocolKind::StirupOp))),
        ("speedup over STIRAP", speedup(&res, curve(ProtocolKind::StirupOp), curve(ProtocolKind::Stirap))),
        ("amplitude robustness", amplitude_robustness(&eta_op, &eta_rr)),
        ("detuning ridge", detuning_ridge(&map_op, &map_stirap, &map_rr)),
        ("unoptimized terminal oscillation", terminal_pathology(curve(ProtocolKind::Stirup), curve(ProtocolKind::StirupOp))),
        ("integrator physics", integrator_physics(&curves)),
        ("adiabatic-limit equivalence", adiabatic_limit()),
        ("optimizer sanity", optimizer_sanity(&res, &model, curve(ProtocolKind::StirupDrag))),
    ];

    let mut failures = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        failures += usize::from(!o.pass);
        println!("[{}] {}: {} -- {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failures, results.len(), started.elapsed());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
