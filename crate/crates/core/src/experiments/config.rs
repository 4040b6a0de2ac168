use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{default_t_max, DEFAULT_STEADY_TOL};
use crate::error::{Error, Result};
use crate::model::{ChainConfig, Geometry};

pub const DEFAULT_DEPHASING: f64 = 0.05;
/// Default simulated time of the two-qubit trajectory.
pub const TWO_QUBIT_T_END: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TwoQubit,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::TwoQubit,
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TwoQubit => "two_qubit",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Custom => "custom",
        }
    }

    /// Geometry a preset is tied to, if any.
    pub fn geometry(self) -> Option<Geometry> {
        match self {
            Preset::TwoQubit | Preset::Fig2a | Preset::Fig2b | Preset::Fig2c => Some(Geometry::A),
            Preset::Fig3a | Preset::Fig3b => Some(Geometry::B),
            Preset::Custom => None,
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Preset::Fig2b | Preset::Fig3a | Preset::Fig3b)
    }

    fn default_n(self) -> usize {
        match self {
            Preset::TwoQubit => 2,
            _ => 8,
        }
    }

    fn default_n_max(self) -> usize {
        match self {
            Preset::Fig2b => 20,
            _ => 12,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Experiment description as read from a JSON file. Absent fields take
/// preset defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub geometry: Option<Geometry>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub gamma_engineered: Option<f64>,
    pub gamma_dephasing: Option<f64>,
    pub t_max: Option<f64>,
    pub conv_tol: Option<f64>,
    pub output_path: Option<PathBuf>,
}

/// Fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub preset: Preset,
    /// One chain per sweep point, ascending in `n`.
    pub chains: Vec<ChainConfig>,
    /// Explicit budget; `None` means [`default_t_max`] per chain.
    pub t_max: Option<f64>,
    pub conv_tol: f64,
}

impl ExperimentPlan {
    pub fn t_max_for(&self, cfg: &ChainConfig) -> f64 {
        match (self.t_max, self.preset) {
            (Some(t), _) => t,
            (None, Preset::TwoQubit) => TWO_QUBIT_T_END,
            (None, _) => default_t_max(cfg),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            preset: Some(preset),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Applies preset defaults and validates everything.
    pub fn resolve(&self) -> Result<ExperimentPlan> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let preset = self
            .preset
            .ok_or_else(|| Error::InvalidConfig("missing `preset`".into()))?;
        let geometry = match (preset.geometry(), self.geometry) {
            (Some(g), Some(h)) if g != h => {
                return bad(format!("preset {preset} uses geometry {g}, config asks for {h}"))
            }
            (Some(g), _) | (None, Some(g)) => g,
            (None, None) => return bad("preset custom needs `geometry`".into()),
        };
        let sizes: Vec<usize> = if preset == Preset::TwoQubit {
            if self.n.is_some_and(|n| n != 2) || self.n_list.is_some() {
                return bad("preset two_qubit always has n = 2".into());
            }
            vec![2]
        } else if preset.is_sweep() {
            if self.n.is_some() {
                return bad(format!("preset {preset} is a sweep; use `n_list`"));
            }
            match &self.n_list {
                Some(list) => list.clone(),
                None => (4..=preset.default_n_max()).step_by(2).collect(),
            }
        } else {
            if self.n_list.is_some() {
                return bad(format!("preset {preset} runs a single size; use `n`"));
            }
            vec![self.n.unwrap_or(preset.default_n())]
        };
        if sizes.is_empty() {
            return bad("`n_list` is empty".into());
        }
        if preset != Preset::TwoQubit {
            if let Some(&n) = sizes.iter().find(|&&n| n < 4 || n % 2 != 0) {
                return bad(format!("n = {n} must be even and at least 4"));
            }
        }
        let mut sizes = sizes;
        sizes.sort_unstable();
        if sizes.windows(2).any(|w| w[0] == w[1]) {
            return bad("`n_list` has repeated entries".into());
        }
        for (name, v) in [("t_max", self.t_max), ("conv_tol", self.conv_tol)] {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return bad(format!("{name} must be positive"));
            }
        }
        let default_dephasing = match geometry {
            Geometry::A => 0.0,
            Geometry::B => DEFAULT_DEPHASING,
        };
        let chains = sizes
            .into_iter()
            .map(|n| {
                let mut cfg = ChainConfig::new(geometry, n);
                cfg.delta = self.delta.unwrap_or(cfg.delta);
                cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
                cfg.theta = self.theta.unwrap_or(cfg.theta);
                cfg.gamma_engineered = self.gamma_engineered.unwrap_or(cfg.gamma_engineered);
                cfg.gamma_dephasing = self.gamma_dephasing.unwrap_or(default_dephasing);
                cfg.validate().map(|_| cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentPlan {
            preset,
            chains,
            t_max: self.t_max,
            conv_tol: self.conv_tol.unwrap_or(DEFAULT_STEADY_TOL),
        })
    }
}
