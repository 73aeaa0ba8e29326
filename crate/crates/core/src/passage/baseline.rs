//! Reference waveforms: Gaussian STIRAP, sequential resonant π pulses, the
//! counterdiabatic supplement to STIRAP, and DRAG quadrature corrections.

use serde::{Deserialize, Serialize};

use super::shape::BetaShape;
use super::waveform::{differentiate, TimeGrid, Waveform};
use crate::error::{Error, Result};
use crate::qstate::C64;

/// Gaussian width σ and half-separation of the STIRAP pair (ns).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirapTiming {
    pub sigma: f64,
    pub delay: f64,
}

impl StirapTiming {
    /// σ = T/6, delay = T/10.
    pub fn default_for(duration: f64) -> Self {
        Self { sigma: duration / 6.0, delay: duration / 10.0 }
    }
}

/// Counterintuitive Gaussian pair: the Stokes pulse peaks at T/2 − delay, the
/// pump at T/2 + delay.
pub fn stirap_waveform(omega0: f64, timing: StirapTiming, grid: &TimeGrid) -> Result<Waveform> {
    let t_total = grid.duration();
    let StirapTiming { sigma, delay } = timing;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("STIRAP width must be positive, got {sigma}")));
    }
    if !(delay > 0.0 && delay < 0.5 * t_total) {
        return Err(Error::InvalidArgument(format!(
            "STIRAP delay must lie in (0, T/2), got {delay} for T = {t_total}"
        )));
    }
    let gauss = |t: f64, centre: f64| C64::new(omega0 * (-((t - centre) / sigma).powi(2)).exp(), 0.0);
    let mid = 0.5 * t_total;
    let pump = grid.times().map(|t| gauss(t, mid + delay)).collect();
    let stokes = grid.times().map(|t| gauss(t, mid - delay)).collect();
    Waveform::from_grid(grid, pump, stokes)
}

/// Peak amplitude giving each half-window pulse Ω₀ sin β(2t′) an area of π.
pub fn rr_amplitude(duration: f64) -> Result<f64> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    // ∫₀^{T/2} sin β(2t′) dt′ = ½ ∫₀^T sin β(s) ds
    let area = 0.5 * gauss_legendre(|s| BetaShape::Sigmoid.value(s, duration).sin(), 0.0, duration, 256);
    Ok(std::f64::consts::PI / area)
}

/// Resonant-Rabi baseline: a π pulse on 0↔1 during [0, T/2] followed by one on
/// 1↔2 during [T/2, T]. Both envelopes jump at T/2, where the sample holds the
/// mean of the two one-sided limits.
pub fn rr_waveform(grid: &TimeGrid) -> Result<Waveform> {
    let t_total = grid.duration();
    let omega0 = rr_amplitude(t_total)?;
    let envelope = |s: f64| omega0 * BetaShape::Sigmoid.value(s, t_total).sin();
    let half = grid.intervals() / 2;
    let mut pump = Vec::with_capacity(grid.len());
    let mut stokes = Vec::with_capacity(grid.len());
    for (k, t) in grid.times().enumerate() {
        let (p, s) = match k.cmp(&half) {
            std::cmp::Ordering::Less => (envelope(2.0 * t), 0.0),
            std::cmp::Ordering::Equal => (0.5 * envelope(t_total), 0.5 * envelope(0.0)),
            std::cmp::Ordering::Greater => (0.0, envelope(2.0 * (t - 0.5 * t_total))),
        };
        pump.push(C64::new(p, 0.0));
        stokes.push(C64::new(s, 0.0));
    }
    Waveform::from_grid(grid, pump, stokes)
}

/// Adds the 0↔2 drive Ω_A = 2iθ̇ that cancels non-adiabatic coupling out of
/// the dark state cos θ|0⟩ − sin θ|2⟩ of H₀, θ = arctan(|Ω_P|/|Ω_S|).
///
/// The factor i reflects the sign conventions of H₀; |Ω_A| = 2|θ̇|.
pub fn counterdiabatic_waveform(stirap: &Waveform) -> Result<Waveform> {
    let mut theta = Vec::with_capacity(stirap.len());
    for (k, (p, s)) in stirap.pump().iter().zip(stirap.stokes()).enumerate() {
        if p.norm() == 0.0 && s.norm() == 0.0 {
            return Err(Error::InvalidWaveform(format!(
                "mixing angle undefined at sample {k}: both drives vanish"
            )));
        }
        theta.push(p.norm().atan2(s.norm()));
    }
    let rate = differentiate(&theta, stirap.dt());
    let aux = rate.iter().map(|r| C64::new(0.0, 2.0 * r)).collect();
    stirap.clone().with_auxiliary(aux)
}

/// DRAG quadrature correction Ω → Ω + iλΩ̇/α on both drives.
pub fn drag_correct(w: &Waveform, alpha: f64, lambda_pump: f64, lambda_stokes: f64) -> Result<Waveform> {
    if !(alpha.is_finite() && alpha != 0.0) {
        return Err(Error::InvalidArgument("DRAG needs a nonzero anharmonicity".into()));
    }
    let correct = |v: &[C64], lambda: f64| -> Vec<C64> {
        if lambda == 0.0 {
            return v.to_vec();
        }
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let d_re = differentiate(&re, w.dt());
        let d_im = differentiate(&im, w.dt());
        v.iter()
            .zip(d_re.iter().zip(&d_im))
            .map(|(z, (dr, di))| z + C64::i() * C64::new(*dr, *di) * (lambda / alpha))
            .collect()
    };
    let (d1, d2) = w.detunings();
    let mut out = Waveform::new(w.dt(), correct(w.pump(), lambda_pump), correct(w.stokes(), lambda_stokes))?
        .with_detunings(d1, d2);
    if let Some(aux) = w.auxiliary() {
        out = out.with_auxiliary(aux.to_vec())?;
    }
    Ok(out)
}

/// Composite five-point Gauss–Legendre quadrature.
pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            NODES.iter().zip(&WEIGHTS).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    #[test]
    fn stirap_crossing_and_mixing_angle() {
        let grid = TimeGrid::with_intervals(100.0, 1000).unwrap();
        let w = stirap_waveform(0.2, StirapTiming::default_for(100.0), &grid).unwrap();
        assert_abs_diff_eq!(w.pump()[500].re, w.stokes()[500].re, epsilon = 1e-15);
        let theta0 = w.pump()[0].norm().atan2(w.stokes()[0].norm());
        let theta1 = w.pump()[1000].norm().atan2(w.stokes()[1000].norm());
        assert!(theta0 < 1e-3);
        assert!((theta1 - FRAC_PI_2).abs() < 1e-3);
        assert!(stirap_waveform(0.2, StirapTiming { sigma: 10.0, delay: 60.0 }, &grid).is_err());
        assert!(stirap_waveform(0.2, StirapTiming { sigma: 0.0, delay: 10.0 }, &grid).is_err());
    }

    #[test]
    fn rr_area_is_pi_independent_of_grid() {
        let t_total = 44.0;
        let omega0 = rr_amplitude(t_total).unwrap();
        let area = omega0
            * simpson(|t| BetaShape::Sigmoid.value(2.0 * t, t_total).sin(), 0.0, 0.5 * t_total, 200_000);
        assert_abs_diff_eq!(area, PI, epsilon = 1e-6);
        for intervals in [1000, 2000, 4400] {
            let grid = TimeGrid::with_intervals(t_total, intervals).unwrap();
            let w = rr_waveform(&grid).unwrap();
            let k = intervals / 8;
            let t = grid.time(k);
            assert_abs_diff_eq!(w.pump()[k].re, omega0 * BetaShape::Sigmoid.value(2.0 * t, t_total).sin(), epsilon = 1e-14);
            assert_eq!(w.stokes()[k].re, 0.0);
            // The half-valued jump sample carries exactly the trapezoid weight
            // of the left limit.
            let dt = grid.spacing();
            let trap: f64 = w.pump().windows(2).map(|p| 0.5 * (p[0].re + p[1].re) * dt).sum();
            assert!((trap - PI).abs() < 1e-3, "trapezoid area {trap}");
        }
    }

    #[test]
    fn counterdiabatic_area_and_flat_segments() {
        let grid = TimeGrid::with_intervals(100.0, 4000).unwrap();
        let w = stirap_waveform(0.2, StirapTiming::default_for(100.0), &grid).unwrap();
        let cd = counterdiabatic_waveform(&w).unwrap();
        let aux = cd.auxiliary().unwrap();
        assert!(aux.iter().all(|z| z.re == 0.0));
        let area: f64 = aux.windows(2).map(|p| 0.25 * (p[0].im + p[1].im) * grid.spacing()).sum();
        let theta = |k: usize| w.pump()[k].norm().atan2(w.stokes()[k].norm());
        assert_abs_diff_eq!(area, theta(4000) - theta(0), epsilon = 1e-6);
        assert_abs_diff_eq!(area, FRAC_PI_2, epsilon = 2e-3);

        let flat = Waveform::new(0.1, vec![C64::new(0.3, 0.0); 20], vec![C64::new(0.4, 0.0); 20]).unwrap();
        let cd = counterdiabatic_waveform(&flat).unwrap();
        assert!(cd.auxiliary().unwrap().iter().all(|z| z.norm() < 1e-12));

        let zero = Waveform::new(0.1, vec![C64::new(0.0, 0.0); 5], vec![C64::new(0.0, 0.0); 5]).unwrap();
        assert!(counterdiabatic_waveform(&zero).is_err());
    }

    #[test]
    fn drag_identity_and_flat_segments() {
        let grid = TimeGrid::with_intervals(40.0, 400).unwrap();
        let w = stirap_waveform(0.2, StirapTiming::default_for(40.0), &grid).unwrap().with_detunings(0.01, -0.02);
        let same = drag_correct(&w, -1.57, 0.0, 0.0).unwrap();
        assert_eq!(same, w);
        let flat = Waveform::new(0.1, vec![C64::new(0.3, 0.0); 20], vec![C64::new(0.4, 0.0); 20]).unwrap();
        let out = drag_correct(&flat, -1.57, 1.0, 1.0).unwrap();
        for z in out.pump().iter().chain(out.stokes()) {
            assert!(z.im.abs() < 1e-12);
        }
        assert!(drag_correct(&w, 0.0, 1.0, 1.0).is_err());
        let corrected = drag_correct(&w, -1.57, 1.0, 0.5).unwrap();
        assert_eq!(corrected.detunings(), (0.01, -0.02));
        // Quadrature follows the envelope slope: positive slope, negative α → negative imaginary part.
        assert!(corrected.pump()[100].im < 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_smooth_functions() {
        let v = gauss_legendre(f64::sin, 0.0, PI, 16);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-14);
    }
}
