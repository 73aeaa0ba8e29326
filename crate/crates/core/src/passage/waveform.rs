use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::C64;

/// Default spacing between waveform samples (ns). The integrators advance two
/// samples per step, so this corresponds to a 0.02 ns step.
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.01;

/// Uniform sampling of [0, T]. The interval count is always a multiple of four
/// so that both integrator step boundaries and the midpoint T/2 fall on samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    duration: f64,
    intervals: usize,
}

impl TimeGrid {
    /// Finest grid with spacing no larger than `max_spacing`.
    pub fn new(duration: f64, max_spacing: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!("grid duration must be positive, got {duration}")));
        }
        if !(max_spacing.is_finite() && max_spacing > 0.0) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {max_spacing}")));
        }
        let raw = (duration / max_spacing - 1e-9).ceil().max(1.0) as usize;
        Self::with_intervals(duration, raw.div_ceil(4) * 4)
    }

    pub fn with_default_spacing(duration: f64) -> Result<Self> {
        Self::new(duration, DEFAULT_SAMPLE_SPACING)
    }

    pub fn with_intervals(duration: f64, intervals: usize) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!("grid duration must be positive, got {duration}")));
        }
        if intervals == 0 || intervals % 4 != 0 {
            return Err(Error::InvalidArgument(format!(
                "interval count must be a positive multiple of 4, got {intervals}"
            )));
        }
        Ok(Self { duration, intervals })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.duration / self.intervals as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.intervals {
            self.duration
        } else {
            k as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }
}

/// Drive amplitudes at one instant (rad/ns).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DriveSample {
    pub pump: C64,
    pub stokes: C64,
    pub auxiliary: C64,
}

/// Sampled complex drive envelopes on a uniform grid starting at t = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    dt: f64,
    pump: Vec<C64>,
    stokes: Vec<C64>,
    auxiliary: Option<Vec<C64>>,
    detunings: (f64, f64),
}

impl Waveform {
    pub fn new(dt: f64, pump: Vec<C64>, stokes: Vec<C64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidWaveform(format!("sample spacing must be positive, got {dt}")));
        }
        if pump.len() < 2 {
            return Err(Error::InvalidWaveform(format!("need at least 2 samples, got {}", pump.len())));
        }
        if pump.len() != stokes.len() {
            return Err(Error::InvalidWaveform(format!(
                "pump has {} samples but Stokes has {}",
                pump.len(),
                stokes.len()
            )));
        }
        check_finite("pump", &pump)?;
        check_finite("Stokes", &stokes)?;
        Ok(Self { dt, pump, stokes, auxiliary: None, detunings: (0.0, 0.0) })
    }

    pub fn from_grid(grid: &TimeGrid, pump: Vec<C64>, stokes: Vec<C64>) -> Result<Self> {
        if pump.len() != grid.len() {
            return Err(Error::InvalidWaveform(format!(
                "expected {} samples for the grid, got {}",
                grid.len(),
                pump.len()
            )));
        }
        Self::new(grid.spacing(), pump, stokes)
    }

    pub fn with_auxiliary(mut self, auxiliary: Vec<C64>) -> Result<Self> {
        if auxiliary.len() != self.len() {
            return Err(Error::InvalidWaveform(format!(
                "auxiliary drive has {} samples, expected {}",
                auxiliary.len(),
                self.len()
            )));
        }
        check_finite("auxiliary", &auxiliary)?;
        self.auxiliary = Some(auxiliary);
        Ok(self)
    }

    /// Sets (δ₁, δ₂) in rad/ns.
    pub fn with_detunings(mut self, delta1: f64, delta2: f64) -> Self {
        self.detunings = (delta1, delta2);
        self
    }

    /// Scales every drive, including the auxiliary one, by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |v: &[C64]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        Self {
            dt: self.dt,
            pump: scale(&self.pump),
            stokes: scale(&self.stokes),
            auxiliary: self.auxiliary.as_deref().map(scale),
            detunings: self.detunings,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.pump.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pump.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.len() - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn pump(&self) -> &[C64] {
        &self.pump
    }

    pub fn stokes(&self) -> &[C64] {
        &self.stokes
    }

    pub fn auxiliary(&self) -> Option<&[C64]> {
        self.auxiliary.as_deref()
    }

    pub fn detunings(&self) -> (f64, f64) {
        self.detunings
    }

    pub fn sample(&self, k: usize) -> DriveSample {
        DriveSample {
            pump: self.pump[k],
            stokes: self.stokes[k],
            auxiliary: self.auxiliary.as_ref().map_or(C64::new(0.0, 0.0), |a| a[k]),
        }
    }

    /// Drive amplitudes at an arbitrary time by four-point Lagrange interpolation
    /// (exact on samples).
    pub fn sample_at(&self, t: f64) -> Result<DriveSample> {
        let end = self.duration();
        let slack = 1e-9 * end.max(1.0);
        if !(t.is_finite() && t >= -slack && t <= end + slack) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let x = (t / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let k = x.round();
        if (x - k).abs() < 1e-9 {
            return Ok(self.sample(k as usize));
        }
        let n = self.len();
        if n < 4 {
            let i = (x.floor() as usize).min(n - 2);
            let w = x - i as f64;
            let lerp = |v: &[C64]| v[i] * (1.0 - w) + v[i + 1] * w;
            return Ok(self.combine(lerp));
        }
        let start = (x.floor() as usize).saturating_sub(1).min(n - 4);
        let nodes: [f64; 4] = std::array::from_fn(|j| (start + j) as f64);
        let weights: [f64; 4] = std::array::from_fn(|j| {
            (0..4).filter(|&m| m != j).map(|m| (x - nodes[m]) / (nodes[j] - nodes[m])).product()
        });
        Ok(self.combine(|v: &[C64]| (0..4).map(|j| v[start + j] * weights[j]).sum()))
    }

    fn combine(&self, f: impl Fn(&[C64]) -> C64) -> DriveSample {
        DriveSample {
            pump: f(&self.pump),
            stokes: f(&self.stokes),
            auxiliary: self.auxiliary.as_deref().map_or(C64::new(0.0, 0.0), &f),
        }
    }

    /// Largest drive modulus over all channels and samples.
    pub fn peak_amplitude(&self) -> f64 {
        let aux = self.auxiliary.as_deref().unwrap_or(&[]);
        self.pump.iter().chain(&self.stokes).chain(aux).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_finite(name: &str, v: &[C64]) -> Result<()> {
    match v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        Some(k) => Err(Error::InvalidWaveform(format!("{name} sample {k} is not finite"))),
        None => Ok(()),
    }
}

/// Derivative of uniformly sampled data: fourth-order central differences in
/// the interior and fourth-order one-sided stencils at the two samples nearest
/// each end. Falls back to second order for fewer than five samples.
pub fn differentiate(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let f = values;
    match n {
        0 | 1 => vec![0.0; n],
        2..=4 => (0..n)
            .map(|k| {
                if k == 0 {
                    (f[1] - f[0]) / dt
                } else if k == n - 1 {
                    (f[n - 1] - f[n - 2]) / dt
                } else {
                    (f[k + 1] - f[k - 1]) / (2.0 * dt)
                }
            })
            .collect(),
        _ => (0..n)
            .map(|k| {
                let d = match k {
                    0 => -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4],
                    1 => -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4],
                    k if k == n - 2 => {
                        3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]
                    }
                    k if k == n - 1 => {
                        25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
                            + 3.0 * f[n - 5]
                    }
                    k => f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2],
                };
                d / (12.0 * dt)
            })
            .collect(),
    }
}
