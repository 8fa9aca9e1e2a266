//! Sweep configuration: presets covering the standard figure setups, TOML
//! config files, and programmatic construction. Validation reports the
//! offending field by path.

use floquet_core::kicked_top::{FloquetVariant, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("config error at `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}

/// Tau grid specification: explicit points or a log-spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauGrid {
    Range { min: f64, max: f64, points: usize },
    Explicit { grid: Vec<f64> },
}

impl TauGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            TauGrid::Range { min, max, points } => {
                floquet_core::analysis::log_grid(*min, *max, *points)
            }
            TauGrid::Explicit { grid } => grid.clone(),
        }
    }
}

/// Which diagnostics a sweep evaluates per tau point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsFlags {
    pub accuracy: bool,
    pub spacing: bool,
    pub pr: bool,
    pub learning: bool,
    pub rmt: bool,
}

impl Default for DiagnosticsFlags {
    fn default() -> Self {
        Self { accuracy: true, spacing: true, pr: true, learning: true, rmt: true }
    }
}

/// Initial state of the accuracy trace, a coherent state at `(theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccuracyState {
    pub theta: f64,
    pub phi: f64,
}

impl Default for AccuracyState {
    fn default() -> Self {
        Self { theta: 0.1, phi: 0.2 }
    }
}

/// Full description of one sweep run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Twice the collective spin, `2S`.
    pub two_s: u32,
    pub params: ModelParams,
    pub variant: FloquetVariant,
    pub tau: TauGrid,
    /// Ansatz truncation orders to learn, subset of {0, 1, 2}.
    pub ansatz_orders: Vec<u8>,
    /// Stroboscopic evolution time in units of 1/J_z.
    pub total_time: f64,
    /// Number of constraint states; 0 means the default `2S + 1`.
    pub n_con: usize,
    pub seed: u64,
    pub diagnostics: DiagnosticsFlags,
    pub accuracy_state: AccuracyState,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            two_s: 256,
            params: ModelParams::paper_default(),
            variant: FloquetVariant::ThreeStep,
            tau: TauGrid::Range { min: 0.01, max: 10.0, points: 60 },
            ansatz_orders: vec![0, 1, 2],
            total_time: 100.0,
            n_con: 0,
            seed: 2024,
            diagnostics: DiagnosticsFlags::default(),
            accuracy_state: AccuracyState::default(),
        }
    }
}

/// Named experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Model parameters and defaults only.
    PaperDefault,
    /// Accuracy, spacing-ratio, and participation-ratio curves over the full
    /// tau range at S = 128.
    Fig2,
    /// Learning residual, coefficients, and RMT references for ansatz orders
    /// 0..2 at S = 128.
    Fig3,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "paper-default" | "default" => Ok(Preset::PaperDefault),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(format!(
                "unknown preset `{other}` (expected paper-default, fig2, or fig3)"
            )),
        }
    }
}

impl SweepConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self::default();
        match preset {
            Preset::PaperDefault => base,
            Preset::Fig2 => Self {
                tau: TauGrid::Range { min: 0.01, max: 10.0, points: 60 },
                ansatz_orders: vec![],
                diagnostics: DiagnosticsFlags {
                    accuracy: true,
                    spacing: true,
                    pr: true,
                    learning: false,
                    rmt: false,
                },
                ..base
            },
            Preset::Fig3 => Self {
                tau: TauGrid::Range { min: 0.1, max: 10.0, points: 40 },
                ansatz_orders: vec![0, 1, 2],
                diagnostics: DiagnosticsFlags {
                    accuracy: false,
                    spacing: false,
                    pr: false,
                    learning: true,
                    rmt: true,
                },
                ..base
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("<config file>", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Effective number of constraint states.
    pub fn effective_n_con(&self) -> usize {
        if self.n_con == 0 {
            self.two_s as usize + 1
        } else {
            self.n_con
        }
    }

    /// Highest requested ansatz order, if learning is enabled.
    pub fn max_order(&self) -> Option<u8> {
        if self.diagnostics.learning {
            self.ansatz_orders.iter().copied().max()
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.two_s == 0 {
            return Err(ConfigError::new("two_s", "must be at least 1 (2S >= 1)"));
        }
        if !(self.params.j_z != 0.0) {
            return Err(ConfigError::new("params.j_z", "J_z sets the unit of energy and must be nonzero"));
        }
        let grid = self.tau.points();
        if grid.is_empty() {
            return Err(ConfigError::new("tau", "tau grid is empty"));
        }
        if grid.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return Err(ConfigError::new("tau", "tau values must be positive and finite"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("tau", "tau grid must be strictly ascending"));
        }
        if self.total_time <= 0.0 || !self.total_time.is_finite() {
            return Err(ConfigError::new("total_time", "must be positive"));
        }
        if self.ansatz_orders.iter().any(|&k| k > 2) {
            return Err(ConfigError::new("ansatz_orders", "orders above 2 are not available"));
        }
        if self.diagnostics.learning {
            if self.ansatz_orders.is_empty() {
                return Err(ConfigError::new(
                    "ansatz_orders",
                    "learning is enabled but no ansatz orders are listed",
                ));
            }
            let max_ansatz = match (self.variant, self.max_order().unwrap_or(0)) {
                (FloquetVariant::ThreeStep, 0) => 5,
                (FloquetVariant::ThreeStep, 1) => 9,
                (FloquetVariant::ThreeStep, _) => 18,
                (FloquetVariant::TwoStep, 0) => 4,
                (FloquetVariant::TwoStep, 1) => 8,
                (FloquetVariant::TwoStep, _) => 18,
            };
            if self.effective_n_con() <= max_ansatz {
                return Err(ConfigError::new(
                    "n_con",
                    format!(
                        "need more constraint states than ansatz elements ({} <= {max_ansatz})",
                        self.effective_n_con()
                    ),
                ));
            }
        }
        Ok(())
    }
}
