//! Closed-form building blocks of a passage: the β(t) rotation curve and the
//! G(t) ≡ β̇ cot γ rate that keeps the drives finite at the boundaries.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steepness of the logistic β curve: β = (π/2)/(1 + exp(−k τ/T)).
pub const SIGMOID_STEEPNESS: f64 = 10.0;

/// Logistic rotation from ≈0 to ≈π/2 centred on T/2.
pub fn beta_sigmoid(t: f64, duration: f64) -> Result<f64> {
    check_duration(duration)?;
    Ok(BetaShape::Sigmoid.value(t, duration))
}

/// dβ/dt of [`beta_sigmoid`].
pub fn beta_sigmoid_rate(t: f64, duration: f64) -> Result<f64> {
    check_duration(duration)?;
    Ok(BetaShape::Sigmoid.rate(t, duration))
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidPassage(format!("duration must be positive, got {duration}")));
    }
    Ok(())
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaShape {
    /// (π/2)/(1 + e^{−10τ/T}), τ = t − T/2. Misses the boundary values by 0.0105 rad.
    Sigmoid,
    /// (π/4)(1 − cos(πt/T)): exact boundary values and flat ends.
    Cosine,
}

impl BetaShape {
    pub fn value(self, t: f64, duration: f64) -> f64 {
        match self {
            Self::Sigmoid => {
                FRAC_PI_2 * logistic(SIGMOID_STEEPNESS * (t - 0.5 * duration) / duration)
            }
            Self::Cosine => 0.25 * PI * (1.0 - (PI * t / duration).cos()),
        }
    }

    pub fn rate(self, t: f64, duration: f64) -> f64 {
        match self {
            Self::Sigmoid => {
                let k = SIGMOID_STEEPNESS / duration;
                let s = logistic(k * (t - 0.5 * duration));
                FRAC_PI_2 * s * (1.0 - s) * k
            }
            Self::Cosine => 0.25 * PI * PI / duration * (PI * t / duration).sin(),
        }
    }

    pub fn acceleration(self, t: f64, duration: f64) -> f64 {
        match self {
            Self::Sigmoid => {
                let k = SIGMOID_STEEPNESS / duration;
                let s = logistic(k * (t - 0.5 * duration));
                FRAC_PI_2 * s * (1.0 - s) * (1.0 - 2.0 * s) * k * k
            }
            Self::Cosine => {
                0.25 * PI * PI * PI / (duration * duration) * (PI * t / duration).cos()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GShapeKind {
    /// G = Ω₀
    Constant,
    /// G = Ω₀[1 + A exp(−τ²/(T/B)²)]
    GaussBump,
    /// G = Ω₀ g(t)[1 + A exp(−τ²/(T/B)²)], g = exp(−(2τ/T)⁸)
    HyperGaussBump,
}

/// The rate G(t) = β̇ cot γ, in rad/ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GShape {
    pub kind: GShapeKind,
    pub omega0: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
}

fn default_b() -> f64 {
    6.0
}

impl GShape {
    pub fn constant(omega0: f64) -> Self {
        Self { kind: GShapeKind::Constant, omega0, a: 0.0, b: default_b() }
    }

    pub fn gauss_bump(omega0: f64, a: f64, b: f64) -> Self {
        Self { kind: GShapeKind::GaussBump, omega0, a, b }
    }

    pub fn hyper_gauss_bump(omega0: f64, a: f64, b: f64) -> Self {
        Self { kind: GShapeKind::HyperGaussBump, omega0, a, b }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            problems.push(format!("omega0 must be > 0 (got {})", self.omega0));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            problems.push(format!("A must be >= 0 (got {})", self.a));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            problems.push(format!("B must be > 0 (got {})", self.b));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidPassage(problems.join("; ")))
        }
    }

    fn bump(&self, tau: f64, duration: f64) -> (f64, f64) {
        let w = duration / self.b;
        let e = (-(tau * tau) / (w * w)).exp();
        (1.0 + self.a * e, self.a * e * (-2.0 * tau / (w * w)))
    }

    /// Hyper-Gaussian window exp(−(2τ/T)⁸); equals e⁻¹ at both endpoints.
    pub fn window(tau: f64, duration: f64) -> f64 {
        (-(2.0 * tau / duration).powi(8)).exp()
    }

    pub fn value(&self, t: f64, duration: f64) -> f64 {
        let tau = t - 0.5 * duration;
        match self.kind {
            GShapeKind::Constant => self.omega0,
            GShapeKind::GaussBump => self.omega0 * self.bump(tau, duration).0,
            GShapeKind::HyperGaussBump => {
                self.omega0 * Self::window(tau, duration) * self.bump(tau, duration).0
            }
        }
    }

    /// Analytic dG/dt; `None` for shapes whose derivative is taken numerically.
    pub fn analytic_rate(&self, t: f64, duration: f64) -> Option<f64> {
        let tau = t - 0.5 * duration;
        match self.kind {
            GShapeKind::Constant => Some(0.0),
            GShapeKind::GaussBump => Some(self.omega0 * self.bump(tau, duration).1),
            GShapeKind::HyperGaussBump => None,
        }
    }
}
