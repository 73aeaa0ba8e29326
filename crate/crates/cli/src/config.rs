//! Run configuration: a flat JSON object whose keys all have defaults, so
//! `{}` is a complete configuration for the measured device.

use std::path::{Path, PathBuf};

use passage_core::bench::{
    resolve_protocols, Axis, Protocol, ProtocolKind, ResolutionSettings, DEFAULT_DETUNING_POINTS,
    DEFAULT_DETUNING_SPAN, DEFAULT_ETA_POINTS, DEFAULT_ETA_SPAN,
};
use passage_core::dynamics::SystemModel;
use passage_core::optimize::SearchSettings;
use passage_core::passage::DEFAULT_SAMPLE_SPACING;
use passage_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Everything a command needs. Protocol fields left unset take the resolved
/// preset for `protocol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Transition frequencies, GHz.
    pub f10: f64,
    pub f21: f64,
    /// Relaxation and coherence times, ns.
    pub t1_10: f64,
    pub t2_10: f64,
    pub t1_21: f64,
    pub t2_21: f64,
    pub dims: usize,
    pub cross_coupling: bool,
    pub include_leakage: bool,

    pub protocol: ProtocolKind,
    /// Protocols for `compare`.
    pub protocols: Vec<ProtocolKind>,
    pub duration: Option<f64>,
    pub omega0: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub lambda_pump: Option<f64>,
    pub lambda_stokes: Option<f64>,
    /// Rerun calibration and optimization instead of using the presets.
    pub resolve: bool,

    /// Waveform sample spacing, ns.
    pub spacing: f64,
    /// η runs over ±eta_span.
    pub eta_span: f64,
    pub eta_points: usize,
    /// δ₁, δ₂ run over ±detuning_span rad/ns.
    pub detuning_span: f64,
    pub detuning_points: usize,

    /// Evaluations per optimizer start.
    pub budget: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = SystemModel::transmon();
        Self {
            f10: m.f10,
            f21: m.f21,
            t1_10: m.t1_10,
            t2_10: m.t2_10,
            t1_21: m.t1_21,
            t2_21: m.t2_21,
            dims: m.dims,
            cross_coupling: m.cross_coupling,
            include_leakage: m.include_leakage,
            protocol: ProtocolKind::StirupOp,
            protocols: ProtocolKind::ALL.to_vec(),
            duration: None,
            omega0: None,
            a: None,
            b: None,
            lambda_pump: None,
            lambda_stokes: None,
            resolve: false,
            spacing: DEFAULT_SAMPLE_SPACING,
            eta_span: DEFAULT_ETA_SPAN,
            eta_points: DEFAULT_ETA_POINTS,
            detuning_span: DEFAULT_DETUNING_SPAN,
            detuning_points: DEFAULT_DETUNING_POINTS,
            budget: SearchSettings::default().budget,
            seed: SearchSettings::default().seed,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

/// Largest grid accepted along one sweep axis.
pub const MAX_AXIS_POINTS: usize = 10_001;

impl RunConfig {
    pub fn model(&self) -> SystemModel {
        SystemModel {
            f10: self.f10,
            f21: self.f21,
            t1_10: self.t1_10,
            t2_10: self.t2_10,
            t1_21: self.t1_21,
            t2_21: self.t2_21,
            dims: self.dims,
            cross_coupling: self.cross_coupling,
            include_leakage: self.include_leakage,
        }
    }

    pub fn search(&self) -> SearchSettings {
        SearchSettings { budget: self.budget, seed: self.seed, spacing: self.spacing }
    }

    /// Checks every key, reporting the first offending one.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_error(key, format!("must be a positive number, got {v}")))
            }
        };
        positive("f10", self.f10)?;
        positive("f21", self.f21)?;
        for (t1_key, t1, t2_key, t2) in
            [("t1_10", self.t1_10, "t2_10", self.t2_10), ("t1_21", self.t1_21, "t2_21", self.t2_21)]
        {
            positive(t1_key, t1)?;
            positive(t2_key, t2)?;
            if t2 > 2.0 * t1 {
                return Err(config_error(t2_key, format!("{t2} ns exceeds 2 * {t1_key} = {} ns", 2.0 * t1)));
            }
        }
        if !(self.dims == 3 || self.dims == 4) {
            return Err(config_error("dims", format!("must be 3 or 4, got {}", self.dims)));
        }
        if self.include_leakage && self.dims != 4 {
            return Err(config_error("include_leakage", "requires dims = 4"));
        }
        self.model().validate().map_err(|e| config_error("t2_21", e.to_string()))?;

        for (key, v) in [
            ("duration", self.duration),
            ("omega0", self.omega0),
            ("b", self.b),
        ] {
            if let Some(v) = v {
                positive(key, v)?;
            }
        }
        for (key, v) in [("a", self.a), ("lambda_pump", self.lambda_pump), ("lambda_stokes", self.lambda_stokes)] {
            if let Some(v) = v.filter(|v| !v.is_finite() || (key == "a" && *v < 0.0)) {
                return Err(config_error(key, format!("invalid value {v}")));
            }
        }
        if self.protocols.is_empty() {
            return Err(config_error("protocols", "must name at least one protocol"));
        }
        positive("spacing", self.spacing)?;
        if self.spacing > 1.0 {
            return Err(config_error("spacing", format!("{} ns is too coarse for the integrators", self.spacing)));
        }
        if !(self.eta_span.is_finite() && self.eta_span > 0.0 && self.eta_span < 1.0) {
            return Err(config_error("eta_span", format!("must lie in (0, 1), got {}", self.eta_span)));
        }
        positive("detuning_span", self.detuning_span)?;
        for (key, n) in [("eta_points", self.eta_points), ("detuning_points", self.detuning_points)] {
            if !(2..=MAX_AXIS_POINTS).contains(&n) {
                return Err(config_error(key, format!("must lie in [2, {MAX_AXIS_POINTS}], got {n}")));
            }
        }
        if self.budget == 0 {
            return Err(config_error("budget", "must be at least 1"));
        }
        Ok(())
    }

    pub fn eta_axis(&self, points: Option<usize>) -> Result<Axis> {
        Axis::new("eta", -self.eta_span, self.eta_span, points.unwrap_or(self.eta_points))
    }

    pub fn detuning_axes(&self, grid: Option<(usize, Option<usize>)>) -> Result<(Axis, Axis)> {
        let (n, m) = match grid {
            Some((n, m)) => (n, m.unwrap_or(n)),
            None => (self.detuning_points, self.detuning_points),
        };
        let s = self.detuning_span;
        Ok((Axis::new("delta1", -s, s, n)?, Axis::new("delta2", -s, s, m)?))
    }

    fn with_overrides(&self, p: Protocol) -> Protocol {
        Protocol {
            duration: self.duration.unwrap_or(p.duration),
            omega0: self.omega0.unwrap_or(p.omega0),
            a: self.a.unwrap_or(p.a),
            b: self.b.unwrap_or(p.b),
            lambda_pump: self.lambda_pump.unwrap_or(p.lambda_pump),
            lambda_stokes: self.lambda_stokes.unwrap_or(p.lambda_stokes),
            ..p
        }
    }

    /// Fully specified protocols for `kinds`, either the presets or a fresh
    /// resolution, with the configured overrides applied.
    pub fn protocols_for(&self, kinds: &[ProtocolKind]) -> Result<Vec<Protocol>> {
        let resolved = if self.resolve {
            let settings = ResolutionSettings { search: self.search(), ..ResolutionSettings::default() };
            Some(resolve_protocols(&self.model(), &settings)?)
        } else {
            None
        };
        Ok(kinds
            .iter()
            .map(|&k| self.with_overrides(resolved.as_ref().map_or_else(|| Protocol::preset(k), |r| r.get(k))))
            .collect())
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().to_string();
        let mut path = e.path().to_string();
        // Duplicates are reported against the enclosing object; name the key.
        if let Some(key) = message.strip_prefix("duplicate field `").and_then(|rest| rest.split('`').next()) {
            if path == "." {
                path = key.to_string();
            }
        }
        config_error(&path, message)
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads `path`; the literal `default` selects the built-in defaults.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    if path.as_os_str() == "default" {
        return Ok(RunConfig::default());
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(&path.display().to_string(), format!("cannot read config: {e}")))?;
    parse_config(&text)
}
