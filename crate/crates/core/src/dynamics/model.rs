use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::passage::{DriveSample, Waveform};
use crate::qstate::{Operator, C64};

/// Physical parameters of the driven transmon (frequencies in GHz, times in ns).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub f10: f64,
    pub f21: f64,
    pub t1_10: f64,
    pub t2_10: f64,
    pub t1_21: f64,
    pub t2_21: f64,
    /// 3 (qutrit) or 4 (qutrit plus the |3⟩ leakage level).
    pub dims: usize,
    /// Off-resonant action of each drive on the other transition.
    pub cross_coupling: bool,
    /// Couple |2⟩↔|3⟩; requires `dims == 4`.
    pub include_leakage: bool,
}

impl Default for SystemModel {
    fn default() -> Self {
        Self::transmon()
    }
}

impl SystemModel {
    /// Measured device: f₁₀ = 5.208 GHz, f₂₁ = 4.958 GHz, T₁¹⁰ = 4.82 μs,
    /// T₂¹⁰ = 5.06 μs, T₁²¹ = 5.96 μs, T₂²¹ = 2.55 μs, with cross coupling and
    /// leakage to |3⟩.
    pub fn transmon() -> Self {
        Self {
            f10: 5.208,
            f21: 4.958,
            t1_10: 4820.0,
            t2_10: 5060.0,
            t1_21: 5960.0,
            t2_21: 2550.0,
            dims: 4,
            cross_coupling: true,
            include_leakage: true,
        }
    }

    /// Closed Λ system with H = H₀ only.
    pub fn ideal_three_level() -> Self {
        Self { dims: 3, cross_coupling: false, include_leakage: false, ..Self::transmon() }.without_decoherence()
    }

    pub fn without_decoherence(mut self) -> Self {
        self.t1_10 = f64::INFINITY;
        self.t2_10 = f64::INFINITY;
        self.t1_21 = f64::INFINITY;
        self.t2_21 = f64::INFINITY;
        self
    }

    /// α = 2π(f₂₁ − f₁₀), rad/ns.
    pub fn alpha(&self) -> f64 {
        2.0 * PI * (self.f21 - self.f10)
    }

    pub fn is_closed(&self) -> bool {
        self.decoherence_rates().map(|r| r.iter().all(|&x| x == 0.0)).unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dims == 3 || self.dims == 4) {
            problems.push(format!("dims must be 3 or 4, got {}", self.dims));
        }
        if self.include_leakage && self.dims != 4 {
            problems.push("include_leakage requires dims = 4".to_string());
        }
        if !(self.f10.is_finite() && self.f21.is_finite() && self.f10 > 0.0 && self.f21 > 0.0) {
            problems.push("transition frequencies must be positive".to_string());
        }
        for (name, t1, t2) in [("10", self.t1_10, self.t2_10), ("21", self.t1_21, self.t2_21)] {
            if !(t1 > 0.0 && t2 > 0.0) || t1.is_nan() || t2.is_nan() {
                problems.push(format!("t1_{name} and t2_{name} must be positive"));
            } else if t2 > 2.0 * t1 {
                problems.push(format!("t2_{name} = {t2} exceeds 2 * t1_{name} = {}", 2.0 * t1));
            }
        }
        if problems.is_empty() {
            if let Err(e) = self.decoherence_rates() {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(problems.join("; ")))
        }
    }

    /// Rates (1/ns) of the four collapse channels: relaxation 1→0, relaxation
    /// 2→1, dephasing of |1⟩, dephasing of |2⟩.
    ///
    /// With L_a = √κ_a|1⟩⟨1| and L_b = √κ_b|2⟩⟨2|, coherences decay as
    /// ρ₀₁: Γ₁₀/2 + κ_a/2 and ρ₁₂: (Γ₁₀ + Γ₂₁)/2 + (κ_a + κ_b)/2, which are set
    /// equal to 1/T₂¹⁰ and 1/T₂²¹.
    pub fn decoherence_rates(&self) -> Result<[f64; 4]> {
        let inv = |t: f64| if t.is_infinite() { 0.0 } else { 1.0 / t };
        let g10 = inv(self.t1_10);
        let g21 = inv(self.t1_21);
        let kappa_a = 2.0 * (inv(self.t2_10) - 0.5 * g10);
        let kappa_b = 2.0 * (inv(self.t2_21) - 0.5 * (g10 + g21)) - kappa_a;
        // Clamp rounding noise, reject genuine inconsistencies.
        let tol = 1e-15;
        if kappa_a < -tol {
            return Err(Error::InvalidModel("t2_10 exceeds 2 * t1_10".into()));
        }
        if kappa_b < -tol {
            return Err(Error::InvalidModel(format!(
                "t2_21 = {} too long: pure dephasing of |2> would be negative (kappa_b = {kappa_b:.3e}/ns)",
                self.t2_21
            )));
        }
        Ok([g10, g21, kappa_a.max(0.0), kappa_b.max(0.0)])
    }

    /// Collapse operators √rate·L for the rates of [`Self::decoherence_rates`];
    /// zero-rate channels are omitted. Level |3⟩ is not dissipated.
    pub fn collapse_operators(&self) -> Result<Vec<Operator>> {
        let [g10, g21, ka, kb] = self.decoherence_rates()?;
        let d = self.dims;
        let mut ops = Vec::new();
        let mut push = |rate: f64, op: Operator| {
            if rate > 0.0 {
                ops.push(op.scale_real(rate.sqrt()));
            }
        };
        push(g10, Operator::ket_bra(d, 0, 1));
        push(g21, Operator::ket_bra(d, 1, 2));
        push(ka, Operator::ket_bra(d, 1, 1));
        push(kb, Operator::ket_bra(d, 2, 2));
        Ok(ops)
    }
}

/// Hamiltonian at time `t` (rad/ns) in the frame rotating with both drives.
pub fn build_hamiltonian(model: &SystemModel, w: &Waveform, t: f64) -> Result<Operator> {
    let drives = w.sample_at(t)?;
    Ok(hamiltonian_from_drives(model, &drives, w.detunings(), t))
}

/// H = ½(Ω_P|0⟩⟨1| + Ω_S|1⟩⟨2|) + ½[(Ω_S/√2)e^{−iαt}|0⟩⟨1| + √2 Ω_P e^{−iαt}|1⟩⟨2|]
///   + ½[((√6/2)Ω_S e^{−iαt} + √3 Ω_P e^{−2iαt})|2⟩⟨3|] + ½Ω_A|0⟩⟨2| + h.c.
///   − δ₁|1⟩⟨1| − (δ₁+δ₂)|2⟩⟨2| − (δ₁+2δ₂)|3⟩⟨3|
pub(crate) fn hamiltonian_from_drives(
    model: &SystemModel,
    drives: &DriveSample,
    (delta1, delta2): (f64, f64),
    t: f64,
) -> Operator {
    let d = model.dims;
    let alpha = model.alpha();
    let half = 0.5;
    let mut h01 = drives.pump * half;
    let mut h12 = drives.stokes * half;
    let phase = C64::from_polar(1.0, -alpha * t);
    if model.cross_coupling {
        h01 += drives.stokes * phase * (half / SQRT_2);
        h12 += drives.pump * phase * (half * SQRT_2);
    }
    let mut h = Operator::zeros(d);
    h[(0, 1)] = h01;
    h[(1, 0)] = h01.conj();
    h[(1, 2)] = h12;
    h[(2, 1)] = h12.conj();
    if drives.auxiliary != C64::new(0.0, 0.0) {
        let h02 = drives.auxiliary * half;
        h[(0, 2)] = h02;
        h[(2, 0)] = h02.conj();
    }
    if d == 4 {
        if model.include_leakage {
            let phase2 = C64::from_polar(1.0, -2.0 * alpha * t);
            let h23 = (drives.stokes * phase * (6.0_f64.sqrt() / 2.0) + drives.pump * phase2 * 3.0_f64.sqrt()) * half;
            h[(2, 3)] = h23;
            h[(3, 2)] = h23.conj();
        }
        h[(3, 3)] = C64::new(-(delta1 + 2.0 * delta2), 0.0);
    }
    h[(1, 1)] = C64::new(-delta1, 0.0);
    h[(2, 2)] = C64::new(-(delta1 + delta2), 0.0);
    h
}
