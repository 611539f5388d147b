//! Clinical hemoglobin thresholds and their flat `key=value` config format.
//!
//! ```text
//! # preoperative anemia management target
//! preop_target_hgb = 13.0
//! transfusion_trigger_hgb = 7.5
//! ```
//!
//! Omitted keys take their defaults. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{low_field} ({low}) must be below {high_field} ({high})")]
    Ordering {
        low_field: &'static str,
        low: f64,
        high_field: &'static str,
        high: f64,
    },
    #[error("{field} must be a positive finite value, got {value}")]
    NotPositive { field: &'static str, value: f64 },
}

/// Hemoglobin reference levels in g/dL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClinicalThresholds {
    pub preop_target_hgb: f64,
    pub transfusion_trigger_hgb: f64,
    pub anemia_hgb: f64,
    pub postop_target_low: f64,
    pub postop_target_high: f64,
}

impl Default for ClinicalThresholds {
    fn default() -> Self {
        Self {
            preop_target_hgb: 13.0,
            transfusion_trigger_hgb: 7.5,
            anemia_hgb: 10.0,
            postop_target_low: 7.0,
            postop_target_high: 9.0,
        }
    }
}

const KEYS: [&str; 5] = [
    "preop_target_hgb",
    "transfusion_trigger_hgb",
    "anemia_hgb",
    "postop_target_low",
    "postop_target_high",
];

impl ClinicalThresholds {
    fn fields(&self) -> [(&'static str, f64); 5] {
        [
            (KEYS[0], self.preop_target_hgb),
            (KEYS[1], self.transfusion_trigger_hgb),
            (KEYS[2], self.anemia_hgb),
            (KEYS[3], self.postop_target_low),
            (KEYS[4], self.postop_target_high),
        ]
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "preop_target_hgb" => &mut self.preop_target_hgb,
            "transfusion_trigger_hgb" => &mut self.transfusion_trigger_hgb,
            "anemia_hgb" => &mut self.anemia_hgb,
            "postop_target_low" => &mut self.postop_target_low,
            "postop_target_high" => &mut self.postop_target_high,
            _ => return None,
        })
    }

    /// Enforces `postop_target_low < postop_target_high < preop_target_hgb`
    /// and positivity of every level.
    pub fn validate(&self) -> Result<(), ThresholdError> {
        for (field, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ThresholdError::NotPositive { field, value });
            }
        }
        if self.postop_target_low >= self.postop_target_high {
            return Err(ThresholdError::Ordering {
                low_field: "postop_target_low",
                low: self.postop_target_low,
                high_field: "postop_target_high",
                high: self.postop_target_high,
            });
        }
        if self.postop_target_high >= self.preop_target_hgb {
            return Err(ThresholdError::Ordering {
                low_field: "postop_target_high",
                low: self.postop_target_high,
                high_field: "preop_target_hgb",
                high: self.preop_target_hgb,
            });
        }
        Ok(())
    }

    /// Renders every key, so the output reloads to an equal value.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.fields() {
            // `{:?}` keeps a trailing `.0` and round-trips exactly.
            let _ = writeln!(out, "{key} = {value:?}");
        }
        out
    }
}

/// Parses threshold config text. Omitted keys keep their defaults.
pub fn load_thresholds(config_text: &str) -> Result<ClinicalThresholds, ThresholdError> {
    let mut thresholds = ClinicalThresholds::default();
    let mut seen: Vec<&str> = Vec::new();

    for (idx, raw) in config_text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ThresholdError::Parse {
            line,
            message: format!("expected key=value, got '{content}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let canonical = KEYS.iter().copied().find(|k| *k == key).ok_or_else(|| {
            ThresholdError::Parse {
                line,
                message: format!("unknown key '{key}'"),
            }
        })?;
        if seen.contains(&canonical) {
            return Err(ThresholdError::Parse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
        seen.push(canonical);
        let parsed: f64 = value.parse().map_err(|_| ThresholdError::Parse {
            line,
            message: format!("'{value}' is not a number"),
        })?;
        if let Some(slot) = thresholds.slot(canonical) {
            *slot = parsed;
        }
    }

    thresholds.validate()?;
    Ok(thresholds)
}
