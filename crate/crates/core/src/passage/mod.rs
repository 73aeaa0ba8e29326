//! User-defined passages and the drive pulses that realize them.
//!
//! A passage is the state trajectory
//!
//! ```text
//! |Φ(t)⟩ = cos γ cos β |0⟩ + e^{iφ₁} sin γ |1⟩ − e^{iφ₂} cos γ sin β |2⟩
//! ```
//!
//! with β rotating from 0 to π/2 and γ chosen through the finite rate
//! G = β̇ cot γ, so γ = arctan(β̇/G) vanishes wherever β̇ does. Inverting the
//! Schrödinger equation for H₀ = ½(Ω_P|0⟩⟨1| + Ω_S|1⟩⟨2| + h.c.) gives
//!
//! ```text
//! Ω_P = 2√(G² + γ̇²) sin(β + arctan(γ̇/G)) e^{−iφ}
//! Ω_S = 2√(G² + γ̇²) cos(β + arctan(γ̇/G)) e^{−i(φ₂−φ)}
//! ```
//!
//! where φ = φ₁ + π/2. The factor 2 comes from the ½ in H₀.

mod baseline;
mod shape;
mod waveform;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{PureState, C64};

pub use baseline::{
    counterdiabatic_waveform, drag_correct, rr_amplitude, rr_waveform, stirap_waveform,
    StirapTiming,
};
pub use shape::{beta_sigmoid, beta_sigmoid_rate, BetaShape, GShape, GShapeKind, SIGMOID_STEEPNESS};
pub use waveform::{differentiate, DriveSample, TimeGrid, Waveform, DEFAULT_SAMPLE_SPACING};

/// Peak rate Ω₀/2π = 20 MHz, in rad/ns.
pub const DEFAULT_OMEGA0: f64 = 2.0 * std::f64::consts::PI * 0.020;

/// Allowed miss of β(0) = 0 and β(T) = π/2 (rad).
pub const BETA_BOUNDARY_TOL: f64 = 0.011;

/// Allowed |β̇|·T at either end.
pub const BETA_RATE_BOUNDARY_TOL: f64 = 0.11;

/// Constant drive phases: `pump` is φ = φ₁ + π/2, `stokes` is φ₂ (rad).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseOffsets {
    #[serde(default)]
    pub pump: f64,
    #[serde(default)]
    pub stokes: f64,
}

impl PhaseOffsets {
    pub fn is_zero(&self) -> bool {
        self.pump == 0.0 && self.stokes == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassageSpec {
    /// T, ns.
    pub duration: f64,
    pub beta: BetaShape,
    pub g: GShape,
    #[serde(default)]
    pub phases: PhaseOffsets,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryDiagnostics {
    pub beta_start: f64,
    pub beta_end_error: f64,
    /// 1 − |⟨0|Φ(0)⟩|²
    pub start_infidelity: f64,
    /// 1 − |⟨2|Φ(T)⟩|²
    pub end_infidelity: f64,
}

impl PassageSpec {
    pub fn new(duration: f64, beta: BetaShape, g: GShape) -> Self {
        Self { duration, beta, g, phases: PhaseOffsets::default() }
    }

    /// Sigmoid β with the given rate shape.
    pub fn sigmoid(duration: f64, g: GShape) -> Self {
        Self::new(duration, BetaShape::Sigmoid, g)
    }

    pub fn with_phases(mut self, phases: PhaseOffsets) -> Self {
        self.phases = phases;
        self
    }

    /// Checks every boundary condition and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let t_total = self.duration;
        if !(t_total.is_finite() && t_total > 0.0) {
            return Err(Error::InvalidPassage(format!("duration must be positive, got {t_total}")));
        }
        self.g.validate()?;
        let mut problems = Vec::new();
        let b0 = self.beta.value(0.0, t_total);
        let b1 = self.beta.value(t_total, t_total);
        if b0.abs() > BETA_BOUNDARY_TOL {
            problems.push(format!("beta(0) = {b0:.5} exceeds {BETA_BOUNDARY_TOL}"));
        }
        if (b1 - FRAC_PI_2).abs() > BETA_BOUNDARY_TOL {
            problems.push(format!("|beta(T) - pi/2| = {:.5} exceeds {BETA_BOUNDARY_TOL}", (b1 - FRAC_PI_2).abs()));
        }
        for (label, t) in [("0", 0.0), ("T", t_total)] {
            let r = self.beta.rate(t, t_total).abs() * t_total;
            if r > BETA_RATE_BOUNDARY_TOL {
                problems.push(format!("|beta'({label})|*T = {r:.4} exceeds {BETA_RATE_BOUNDARY_TOL}"));
            }
            let g = self.g.value(t, t_total);
            if !(g.is_finite() && g != 0.0) {
                problems.push(format!("G({label}) must be finite and nonzero, got {g}"));
            }
        }
        if !(self.phases.pump.is_finite() && self.phases.stokes.is_finite()) {
            problems.push("phase offsets must be finite".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidPassage(problems.join("; ")))
        }
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta.value(t, self.duration)
    }

    pub fn g_value(&self, t: f64) -> f64 {
        self.g.value(t, self.duration)
    }

    /// γ(t) = arctan(β̇/G).
    pub fn gamma(&self, t: f64) -> f64 {
        (self.beta.rate(t, self.duration) / self.g_value(t)).atan()
    }

    pub fn boundary_diagnostics(&self) -> BoundaryDiagnostics {
        let t_total = self.duration;
        let b0 = self.beta(0.0);
        let b1 = self.beta(t_total);
        let (g0, g1) = (self.gamma(0.0), self.gamma(t_total));
        BoundaryDiagnostics {
            beta_start: b0,
            beta_end_error: b1 - FRAC_PI_2,
            start_infidelity: 1.0 - (g0.cos() * b0.cos()).powi(2),
            end_infidelity: 1.0 - (g1.cos() * b1.sin()).powi(2),
        }
    }
}

/// γ(t) and γ̇(t) on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaProfile {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_rate: Vec<f64>,
}

pub fn gamma_profile(spec: &PassageSpec, grid: &TimeGrid) -> Result<GammaProfile> {
    spec.g.validate()?;
    let t_total = spec.duration;
    let times: Vec<f64> = grid.times().collect();
    let mut gamma = Vec::with_capacity(times.len());
    let mut gamma_rate = Vec::with_capacity(times.len());
    for &t in &times {
        let g = spec.g_value(t);
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::DivergentPassage { t });
        }
        let rate = spec.beta.rate(t, t_total);
        gamma.push((rate / g).atan());
        if let Some(g_dot) = spec.g.analytic_rate(t, t_total) {
            let accel = spec.beta.acceleration(t, t_total);
            gamma_rate.push((accel * g - rate * g_dot) / (g * g + rate * rate));
        }
    }
    if gamma_rate.is_empty() {
        gamma_rate = differentiate(&gamma, grid.spacing());
    }
    Ok(GammaProfile { times, gamma, gamma_rate })
}

/// Drive pulses that make H₀ carry |0⟩ exactly along the passage.
pub fn synthesize_pulses(spec: &PassageSpec, grid: &TimeGrid) -> Result<Waveform> {
    spec.validate()?;
    if (grid.duration() - spec.duration).abs() > 1e-9 * spec.duration {
        return Err(Error::InvalidArgument(format!(
            "grid spans {} ns but the passage lasts {} ns",
            grid.duration(),
            spec.duration
        )));
    }
    let profile = gamma_profile(spec, grid)?;
    let pump_phase = C64::from_polar(1.0, -spec.phases.pump);
    let stokes_phase = C64::from_polar(1.0, -(spec.phases.stokes - spec.phases.pump));
    let mut pump = Vec::with_capacity(grid.len());
    let mut stokes = Vec::with_capacity(grid.len());
    for (k, &t) in profile.times.iter().enumerate() {
        let g = spec.g_value(t);
        let g_dot = profile.gamma_rate[k];
        let radius = 2.0 * g.hypot(g_dot);
        let angle = spec.beta(t) + (g_dot / g).atan();
        pump.push(pump_phase * (radius * angle.sin()));
        stokes.push(stokes_phase * (radius * angle.cos()));
    }
    Waveform::from_grid(grid, pump, stokes)
}

/// |Φ(t)⟩ as a 3-level state.
pub fn evaluate_passage(spec: &PassageSpec, t: f64) -> Result<PureState> {
    let end = spec.duration;
    if !(t >= -1e-12 && t <= end * (1.0 + 1e-12)) {
        return Err(Error::TimeOutOfRange { t, end });
    }
    let t = t.clamp(0.0, end);
    let beta = spec.beta(t);
    let gamma = spec.gamma(t);
    let phi1 = spec.phases.pump - FRAC_PI_2;
    let phi2 = spec.phases.stokes;
    PureState::new(&[
        C64::new(gamma.cos() * beta.cos(), 0.0),
        C64::from_polar(gamma.sin(), phi1),
        -C64::from_polar(gamma.cos() * beta.sin(), phi2),
    ])
}

/// Designed occupancy of |1⟩, sin²γ(t), on the grid.
pub fn intermediate_population_profile(spec: &PassageSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    spec.g.validate()?;
    grid.times()
        .map(|t| {
            let g = spec.g_value(t);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::DivergentPassage { t });
            }
            Ok(spec.gamma(t).sin().powi(2))
        })
        .collect()
}

/// Dark-state mixing angle θ, tan θ = |Ω_P|/|Ω_S|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingAngle(pub f64);

impl MixingAngle {
    pub fn from_drives(pump: C64, stokes: C64) -> Self {
        Self(pump.norm().atan2(stokes.norm()))
    }
}

/// cos θ |0⟩ + sin θ |2⟩
pub fn dark_state(theta: MixingAngle) -> PureState {
    let zero = C64::new(0.0, 0.0);
    PureState::new(&[C64::new(theta.0.cos(), 0.0), zero, C64::new(theta.0.sin(), 0.0)])
        .expect("three amplitudes")
}
