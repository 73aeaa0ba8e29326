//! Protocol definitions, the calibrate-then-optimize resolution pipeline, and
//! the robustness sweeps used to compare protocols.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{max_sample_spacing, EvolutionResult, SystemModel};
use crate::error::{Error, Result};
use crate::optimize::{
    calibrate_amplitude, optimize_ab, optimize_drag, simulate_from_ground, Calibration, MultiStartFit, SearchSettings,
    TransferTarget, LAMBDA_BOUNDS,
};
use crate::passage::{
    counterdiabatic_waveform, drag_correct, rr_amplitude, rr_waveform, stirap_waveform, synthesize_pulses, GShape,
    PassageSpec, StirapTiming, TimeGrid, Waveform, DEFAULT_OMEGA0,
};

/// Environment variable bounding the sweep worker pool.
pub const THREADS_ENV: &str = "PASSAGE_THREADS";

pub const STIRUP_DURATION: f64 = 44.0;
pub const STIRAP_DURATION: f64 = 240.0;
pub const STIRUP_ANCHOR: TransferTarget = TransferTarget { efficiency: 0.96, time: 34.0 };
pub const STIRAP_ANCHOR: TransferTarget = TransferTarget { efficiency: 0.96, time: 150.0 };

/// Maximum detuning of the default maps, 2π × 20 MHz in rad/ns.
pub const DEFAULT_DETUNING_SPAN: f64 = 2.0 * std::f64::consts::PI * 0.020;
pub const DEFAULT_DETUNING_POINTS: usize = 41;
pub const DEFAULT_ETA_SPAN: f64 = 0.3;
pub const DEFAULT_ETA_POINTS: usize = 61;
/// η range over which worst-case efficiencies are reported.
pub const ROBUSTNESS_ETA: f64 = 0.2;
pub const CROSSING_EFFICIENCY: f64 = 0.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Stirap,
    Rr,
    Stirup,
    StirupOp,
    StirupDrag,
    StirapCd,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 6] = [
        ProtocolKind::Stirap,
        ProtocolKind::Rr,
        ProtocolKind::Stirup,
        ProtocolKind::StirupOp,
        ProtocolKind::StirupDrag,
        ProtocolKind::StirapCd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Stirap => "stirap",
            ProtocolKind::Rr => "rr",
            ProtocolKind::Stirup => "stirup",
            ProtocolKind::StirupOp => "stirup-op",
            ProtocolKind::StirupDrag => "stirup-drag",
            ProtocolKind::StirapCd => "stirap-cd",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ProtocolKind::ALL.into_iter().find(|k| k.name() == key).ok_or_else(|| {
            let names: Vec<&str> = ProtocolKind::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidArgument(format!("unknown protocol {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// A protocol with every parameter fixed.
///
/// `omega0` is the G scale for the STIRUP family, the Gaussian peak for the
/// STIRAP family, and the π-area peak for RR. `a`, `b` apply to STIRUP-OP,
/// the λ coefficients to STIRUP-DRAG.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub duration: f64,
    pub omega0: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default)]
    pub lambda_pump: f64,
    #[serde(default)]
    pub lambda_stokes: f64,
}

fn default_b() -> f64 {
    6.0
}

// Output of `resolve_protocols` with default settings on the transmon model.
const RESOLVED_STIRUP_OMEGA0: f64 = 0.109_907_091_589_549_26;
const RESOLVED_A: f64 = 0.278_917_312_622_069_87;
const RESOLVED_B: f64 = 2.0;
const RESOLVED_STIRAP_OMEGA0: f64 = 0.176_165_520_925_136_38;
const RESOLVED_LAMBDA_PUMP: f64 = -0.520_466_899_871_828_7;
const RESOLVED_LAMBDA_STOKES: f64 = 2.0;

impl Protocol {
    /// Resolved parameters for the default transmon model.
    pub fn preset(kind: ProtocolKind) -> Self {
        let base = Self {
            kind,
            duration: STIRUP_DURATION,
            omega0: RESOLVED_STIRUP_OMEGA0,
            a: 0.0,
            b: default_b(),
            lambda_pump: 0.0,
            lambda_stokes: 0.0,
        };
        match kind {
            ProtocolKind::Stirap => Self { duration: STIRAP_DURATION, omega0: RESOLVED_STIRAP_OMEGA0, ..base },
            ProtocolKind::StirapCd => Self { omega0: RESOLVED_STIRAP_OMEGA0, ..base },
            ProtocolKind::Rr => Self { omega0: rr_amplitude(STIRUP_DURATION).unwrap_or(f64::NAN), ..base },
            ProtocolKind::Stirup => base,
            ProtocolKind::StirupOp => Self { a: RESOLVED_A, b: RESOLVED_B, ..base },
            ProtocolKind::StirupDrag => {
                Self { lambda_pump: RESOLVED_LAMBDA_PUMP, lambda_stokes: RESOLVED_LAMBDA_STOKES, ..base }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.duration.is_finite() && self.duration > 0.0) {
            problems.push(format!("duration must be positive (got {})", self.duration));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            problems.push(format!("omega0 must be positive (got {})", self.omega0));
        }
        if !(self.lambda_pump.is_finite() && self.lambda_stokes.is_finite()) {
            problems.push("DRAG coefficients must be finite".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{} protocol: {}", self.kind, problems.join("; "))))
        }
    }

    /// The passage behind STIRUP-family protocols.
    pub fn passage(&self) -> Option<PassageSpec> {
        let g = match self.kind {
            ProtocolKind::Stirup | ProtocolKind::StirupDrag => GShape::constant(self.omega0),
            ProtocolKind::StirupOp => GShape::hyper_gauss_bump(self.omega0, self.a, self.b),
            _ => return None,
        };
        Some(PassageSpec::sigmoid(self.duration, g))
    }

    fn build(&self, model: &SystemModel, grid: &TimeGrid) -> Result<Waveform> {
        let timing = StirapTiming::default_for(self.duration);
        match self.kind {
            ProtocolKind::Stirap => stirap_waveform(self.omega0, timing, grid),
            ProtocolKind::StirapCd => counterdiabatic_waveform(&stirap_waveform(self.omega0, timing, grid)?),
            ProtocolKind::Rr => rr_waveform(grid),
            ProtocolKind::Stirup | ProtocolKind::StirupOp => {
                synthesize_pulses(&self.passage().expect("STIRUP family"), grid)
            }
            ProtocolKind::StirupDrag => {
                let w = synthesize_pulses(&self.passage().expect("STIRUP family"), grid)?;
                drag_correct(&w, model.alpha(), self.lambda_pump, self.lambda_stokes)
            }
        }
    }

    /// Samples the protocol at `spacing` ns, refining the grid when the drive
    /// is too strong for the integrator at that spacing.
    pub fn waveform(&self, model: &SystemModel, spacing: f64) -> Result<Waveform> {
        self.validate()?;
        let w = self.build(model, &TimeGrid::new(self.duration, spacing)?)?;
        refine(model, w, |g| self.build(model, g))
    }

    /// Stable hex digest of the protocol and model, for sweep metadata.
    pub fn fingerprint(&self, model: &SystemModel) -> String {
        let text = serde_json::to_string(&(self, model)).expect("plain data serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }
}

fn refine(model: &SystemModel, w: Waveform, build: impl Fn(&TimeGrid) -> Result<Waveform>) -> Result<Waveform> {
    let limit = max_sample_spacing(model, &w);
    if w.dt() <= limit {
        return Ok(w);
    }
    build(&TimeGrid::new(w.duration(), 0.9 * limit)?)
}

/// Sweep worker pool sized by `PASSAGE_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// P₀…P₃ over the protocol from |0⟩⟨0|.
pub fn efficiency_curve(p: &Protocol, model: &SystemModel, spacing: f64) -> Result<EvolutionResult> {
    simulate_from_ground(model, &p.waveform(model, spacing)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, points: usize) -> Result<Self> {
        let name = name.into();
        if points == 0 || !(min.is_finite() && max.is_finite()) || (points > 1 && min >= max) || (points == 1 && min != max) {
            return Err(Error::InvalidArgument(format!("axis {name}: invalid range [{min}, {max}] with {points} points")));
        }
        Ok(Self { name, min, max, points })
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.points == 1 {
            return self.min;
        }
        if k + 1 == self.points {
            return self.max;
        }
        self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub protocol: Protocol,
    pub model_hash: String,
}

/// Final efficiencies over a grid; for two axes the first axis varies slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub efficiency: Vec<f64>,
    pub metadata: SweepMetadata,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>, efficiency: Vec<f64>, metadata: SweepMetadata) -> Result<Self> {
        let cells: usize = axes.iter().map(|a| a.points).product();
        if axes.is_empty() || cells != efficiency.len() {
            return Err(Error::InvalidArgument(format!(
                "sweep grid expects {cells} cells, got {}",
                efficiency.len()
            )));
        }
        if let Some((k, v)) = efficiency.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("sweep cell {k} has efficiency {v} outside [0, 1]")));
        }
        Ok(Self { axes, efficiency, metadata })
    }

    /// Efficiency at cell (i, j) of a two-axis grid.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.efficiency[i * self.axes[1].points + j]
    }

    pub fn worst(&self) -> f64 {
        self.efficiency.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cells with efficiency ≥ `threshold`.
    pub fn cells_at_least(&self, threshold: f64) -> usize {
        self.efficiency.iter().filter(|&&v| v >= threshold).count()
    }

    /// Worst efficiency over cells whose first-axis value lies in [lo, hi].
    pub fn worst_within(&self, lo: f64, hi: f64) -> Option<f64> {
        let axis = &self.axes[0];
        let inner = self.axes[1..].iter().map(|a| a.points).product::<usize>();
        (0..axis.points)
            .filter(|&k| (lo - 1e-12..=hi + 1e-12).contains(&axis.value(k)))
            .flat_map(|k| self.efficiency[k * inner..(k + 1) * inner].iter().copied())
            .reduce(f64::min)
    }

    /// (δ₁, efficiency) along δ₁ + δ₂ = 0 for a square map with mirrored axes.
    pub fn anti_diagonal(&self) -> Result<Vec<(f64, f64)>> {
        let [a, b] = self.axes.as_slice() else {
            return Err(Error::InvalidArgument("anti-diagonal needs a two-axis grid".into()));
        };
        if a.points != b.points || (a.min + b.max).abs() > 1e-12 || (a.max + b.min).abs() > 1e-12 {
            return Err(Error::InvalidArgument("anti-diagonal needs axes with mirrored ranges".into()));
        }
        let n = a.points;
        Ok((0..n).map(|i| (a.value(i), self.at(i, n - 1 - i))).collect())
    }
}

fn cell_efficiency(result: &EvolutionResult) -> Result<f64> {
    let e = result.final_efficiency;
    if e.is_nan() {
        return Err(Error::InvalidArgument("simulation produced NaN efficiency".into()));
    }
    Ok(e.clamp(0.0, 1.0))
}

/// Final efficiency with both drive envelopes scaled by (1 + η).
pub fn rabi_error_sweep(p: &Protocol, model: &SystemModel, eta: Axis, spacing: f64) -> Result<SweepGrid> {
    if eta.min <= -1.0 - 1e-12 {
        return Err(Error::InvalidArgument(format!("η must stay above -1, got {}", eta.min)));
    }
    let base = p.waveform(model, spacing)?;
    let etas = eta.values();
    let pool = worker_pool()?;
    let values = pool.install(|| {
        etas.par_iter()
            .map(|&e| {
                let scaled = base.scaled(1.0 + e);
                let w = refine(model, scaled, |g| Ok(p.build(model, g)?.scaled(1.0 + e)))?;
                cell_efficiency(&simulate_from_ground(model, &w)?)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    SweepGrid::new(
        vec![Axis { name: "eta".into(), ..eta }],
        values,
        SweepMetadata { protocol: *p, model_hash: p.fingerprint(model) },
    )
}

/// Final efficiency over the (δ₁, δ₂) detuning plane.
pub fn detuning_map(p: &Protocol, model: &SystemModel, delta1: Axis, delta2: Axis, spacing: f64) -> Result<SweepGrid> {
    for axis in [&delta1, &delta2] {
        if (axis.min + axis.max).abs() > 1e-12 * axis.max.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!("axis {} must be symmetric about 0", axis.name)));
        }
    }
    let base = p.waveform(model, spacing)?;
    let cells: Vec<(f64, f64)> =
        delta1.values().into_iter().flat_map(|d1| delta2.values().into_iter().map(move |d2| (d1, d2))).collect();
    let pool = worker_pool()?;
    let values = pool.install(|| {
        cells
            .par_iter()
            .map(|&(d1, d2)| {
                let w = base.clone().with_detunings(d1, d2);
                let w = refine(model, w, |g| Ok(p.build(model, g)?.with_detunings(d1, d2)))?;
                cell_efficiency(&simulate_from_ground(model, &w)?)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    SweepGrid::new(
        vec![Axis { name: "delta1".into(), ..delta1 }, Axis { name: "delta2".into(), ..delta2 }],
        values,
        SweepMetadata { protocol: *p, model_hash: p.fingerprint(model) },
    )
}

pub fn default_eta_axis() -> Axis {
    Axis { name: "eta".into(), min: -DEFAULT_ETA_SPAN, max: DEFAULT_ETA_SPAN, points: DEFAULT_ETA_POINTS }
}

pub fn default_detuning_axis(name: &str, points: usize) -> Axis {
    Axis { name: name.into(), min: -DEFAULT_DETUNING_SPAN, max: DEFAULT_DETUNING_SPAN, points }
}

/// Largest swing between neighbouring turning points of P₂ over the final
/// `fraction` of the run; a monotone tail gives 0.
pub fn terminal_oscillation(result: &EvolutionResult, fraction: f64) -> f64 {
    let Some(&end) = result.times.last() else { return 0.0 };
    let start = end * (1.0 - fraction);
    let tail: Vec<f64> =
        result.times.iter().zip(&result.populations).filter(|(t, _)| **t >= start).map(|(_, p)| p[2]).collect();
    let extrema: Vec<f64> = tail
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] >= w[2]) || (w[1] < w[0] && w[1] <= w[2]))
        .map(|w| w[1])
        .collect();
    extrema.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub protocol: ProtocolKind,
    pub final_efficiency: f64,
    pub peak_efficiency: f64,
    /// First time P₂ reaches 96 %.
    pub time_to_96: Option<f64>,
    /// Lowest efficiency over η ∈ [−0.2, 0.2].
    pub worst_case_efficiency: f64,
    pub max_p3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model_hash: String,
    pub protocols: Vec<Protocol>,
    /// Summaries ranked by worst-case, then final efficiency.
    pub ranking: Vec<ProtocolSummary>,
}

impl ComparisonReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<4} {:<12} {:>9} {:>9} {:>10} {:>11} {:>9}\n",
            "rank", "protocol", "final", "peak", "t96 (ns)", "worst|eta|", "max p3"
        );
        for (k, s) in self.ranking.iter().enumerate() {
            let t96 = s.time_to_96.map_or_else(|| "-".to_string(), |t| format!("{t:.2}"));
            out.push_str(&format!(
                "{:<4} {:<12} {:>9.5} {:>9.5} {:>10} {:>11.5} {:>9.5}\n",
                k + 1,
                s.protocol,
                s.final_efficiency,
                s.peak_efficiency,
                t96,
                s.worst_case_efficiency,
                s.max_p3
            ));
        }
        out
    }
}

/// Efficiency curve plus η sweep for each protocol, ranked.
pub fn compare_protocols(protocols: &[Protocol], model: &SystemModel, eta: Axis, spacing: f64) -> Result<ComparisonReport> {
    if protocols.is_empty() {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    }
    let mut ranking = Vec::with_capacity(protocols.len());
    for p in protocols {
        let curve = efficiency_curve(p, model, spacing)?;
        let sweep = rabi_error_sweep(p, model, eta.clone(), spacing)?;
        let worst = sweep.worst_within(-ROBUSTNESS_ETA, ROBUSTNESS_ETA).unwrap_or_else(|| sweep.worst());
        ranking.push(ProtocolSummary {
            protocol: p.kind,
            final_efficiency: curve.final_efficiency,
            peak_efficiency: curve.series(2).into_iter().fold(0.0, f64::max),
            time_to_96: curve.first_crossing(2, CROSSING_EFFICIENCY),
            worst_case_efficiency: worst,
            max_p3: curve.max_p3,
        });
    }
    ranking.sort_by(|x, y| {
        y.worst_case_efficiency
            .total_cmp(&x.worst_case_efficiency)
            .then(y.final_efficiency.total_cmp(&x.final_efficiency))
            .then(x.protocol.cmp(&y.protocol))
    });
    Ok(ComparisonReport {
        model_hash: format!("{:x}", Sha256::digest(serde_json::to_string(model).expect("plain data").as_bytes())),
        protocols: protocols.to_vec(),
        ranking,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSettings {
    pub stirup_duration: f64,
    pub stirap_duration: f64,
    pub stirup_anchor: TransferTarget,
    pub stirap_anchor: TransferTarget,
    pub search: SearchSettings,
}

impl Default for ResolutionSettings {
    fn default() -> Self {
        Self {
            stirup_duration: STIRUP_DURATION,
            stirap_duration: STIRAP_DURATION,
            stirup_anchor: STIRUP_ANCHOR,
            stirap_anchor: STIRAP_ANCHOR,
            search: SearchSettings::default(),
        }
    }
}

/// Every protocol plus the calibrations and fits that fixed it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub stirap: Protocol,
    pub rr: Protocol,
    pub stirup: Protocol,
    pub stirup_op: Protocol,
    pub stirup_drag: Protocol,
    pub stirap_cd: Protocol,
    pub stirap_calibration: Calibration,
    pub stirup_calibration: Calibration,
    pub ab_fit: MultiStartFit,
    pub drag_fit: MultiStartFit,
}

impl Resolution {
    pub fn protocols(&self) -> [Protocol; 6] {
        [self.stirap, self.rr, self.stirup, self.stirup_op, self.stirup_drag, self.stirap_cd]
    }

    pub fn get(&self, kind: ProtocolKind) -> Protocol {
        match kind {
            ProtocolKind::Stirap => self.stirap,
            ProtocolKind::Rr => self.rr,
            ProtocolKind::Stirup => self.stirup,
            ProtocolKind::StirupOp => self.stirup_op,
            ProtocolKind::StirupDrag => self.stirup_drag,
            ProtocolKind::StirapCd => self.stirap_cd,
        }
    }
}

/// Calibrates amplitudes against the transfer-time anchors, then fits (A, B)
/// and the DRAG coefficients at the calibrated amplitude.
pub fn resolve_protocols(model: &SystemModel, settings: &ResolutionSettings) -> Result<Resolution> {
    let spacing = settings.search.spacing;
    let with = |kind: ProtocolKind, duration: f64, omega0: f64| Protocol {
        kind,
        duration,
        omega0,
        a: 0.0,
        b: default_b(),
        lambda_pump: 0.0,
        lambda_stokes: 0.0,
    };

    let stirap_calibration = calibrate_amplitude(
        model,
        |o| with(ProtocolKind::Stirap, settings.stirap_duration, o).waveform(model, spacing),
        DEFAULT_OMEGA0,
        settings.stirap_anchor,
    )?;
    let stirup_calibration = calibrate_amplitude(
        model,
        |o| with(ProtocolKind::StirupOp, settings.stirup_duration, o).waveform(model, spacing),
        DEFAULT_OMEGA0,
        settings.stirup_anchor,
    )?;
    let omega0 = stirup_calibration.omega0;
    let template = with(ProtocolKind::StirupOp, settings.stirup_duration, omega0).passage().expect("STIRUP family");
    let ab_fit = optimize_ab(model, &template, settings.search)?;
    let stirup_op = Protocol { a: ab_fit.params[0], b: ab_fit.params[1], ..with(ProtocolKind::StirupOp, settings.stirup_duration, omega0) };

    let stirup = with(ProtocolKind::Stirup, settings.stirup_duration, omega0);
    let drag_fit = optimize_drag(model, &stirup.waveform(model, spacing)?, LAMBDA_BOUNDS, settings.search)?;
    let stirup_drag = Protocol {
        lambda_pump: drag_fit.params[0],
        lambda_stokes: drag_fit.params[1],
        ..with(ProtocolKind::StirupDrag, settings.stirup_duration, omega0)
    };

    Ok(Resolution {
        stirap: with(ProtocolKind::Stirap, settings.stirap_duration, stirap_calibration.omega0),
        rr: with(ProtocolKind::Rr, settings.stirup_duration, rr_amplitude(settings.stirup_duration)?),
        stirup,
        stirup_op,
        stirup_drag,
        stirap_cd: with(ProtocolKind::StirapCd, settings.stirup_duration, stirap_calibration.omega0),
        stirap_calibration,
        stirup_calibration,
        ab_fit,
        drag_fit,
    })
}
