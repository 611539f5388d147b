//! Case records and the blood components they carry.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Urgency {
    Elective,
    Urgent,
    Emergent,
}

impl Urgency {
    pub const ALL: [Urgency; 3] = [Urgency::Elective, Urgency::Urgent, Urgency::Emergent];

    pub fn as_str(self) -> &'static str {
        match self {
            Urgency::Elective => "elective",
            Urgency::Urgent => "urgent",
            Urgency::Emergent => "emergent",
        }
    }
}

impl fmt::Display for Urgency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Urgency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "elective" => Ok(Urgency::Elective),
            "urgent" => Ok(Urgency::Urgent),
            "emergent" => Ok(Urgency::Emergent),
            other => Err(format!("unknown urgency '{other}'")),
        }
    }
}

/// Blood products tracked per case. Cell salvage is measured in mL, the rest
/// in whole units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BloodComponent {
    Prbc,
    Ffp,
    Plt,
    Cryo,
    CellSalvage,
}

impl BloodComponent {
    pub const ALL: [BloodComponent; 5] = [
        BloodComponent::Prbc,
        BloodComponent::Ffp,
        BloodComponent::Plt,
        BloodComponent::Cryo,
        BloodComponent::CellSalvage,
    ];

    pub fn is_continuous(self) -> bool {
        matches!(self, BloodComponent::CellSalvage)
    }

    /// Usage of this component in one case.
    pub fn amount(self, case: &CaseRecord) -> f64 {
        match self {
            BloodComponent::Prbc => case.prbc_units as f64,
            BloodComponent::Ffp => case.ffp_units as f64,
            BloodComponent::Plt => case.platelet_units as f64,
            BloodComponent::Cryo => case.cryo_units as f64,
            BloodComponent::CellSalvage => case.cell_salvage_ml,
        }
    }
}

/// One surgical case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub case_id: String,
    pub patient_id: String,
    pub surgeon_id: String,
    pub anesthesiologist_id: String,
    pub date: NaiveDate,
    pub procedures: Vec<String>,
    pub urgency: Urgency,
    pub prbc_units: u32,
    pub ffp_units: u32,
    pub platelet_units: u32,
    pub cryo_units: u32,
    pub cell_salvage_ml: f64,
    pub preop_hgb: Option<f64>,
    pub postop_hgb: Option<f64>,
    pub drg_weight: Option<f64>,
    pub death: bool,
    pub vent_over_24h: bool,
    pub ecmo: bool,
    pub b12: bool,
    pub amicar: bool,
    pub txa: bool,
}

impl CaseRecord {
    pub fn year(&self) -> i32 {
        self.date.year()
    }

    /// Checks the per-record invariants. Uniqueness of `case_id` is a
    /// property of the containing set and is checked there.
    pub fn check(&self) -> Result<(), String> {
        if self.case_id.trim().is_empty() {
            return Err("empty case_id".into());
        }
        if self.procedures.is_empty() || self.procedures.iter().any(|p| p.trim().is_empty()) {
            return Err("procedures must be a non-empty list of codes".into());
        }
        if !(self.cell_salvage_ml.is_finite() && self.cell_salvage_ml >= 0.0) {
            return Err("cell_salvage_ml must be a finite value >= 0".into());
        }
        for (name, v) in [
            ("preop_hgb", self.preop_hgb),
            ("postop_hgb", self.postop_hgb),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("{name} must be a positive finite value"));
                }
            }
        }
        if let Some(w) = self.drg_weight {
            if !(w.is_finite() && w >= 0.0) {
                return Err("drg_weight must be a finite value >= 0".into());
            }
        }
        Ok(())
    }
}
