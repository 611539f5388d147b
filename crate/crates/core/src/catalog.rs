//! The attribute catalog: every case field or derived aggregate that can be
//! used as a filter predicate, split variable, chart axis or context column.

use crate::model::CaseRecord;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    /// Per-case numeric value; summarized as a distribution.
    NumericDistribution,
    /// Aggregate over a group of cases, e.g. average units per case.
    NumericScalar,
    /// Fraction of cases in a group with a flag set.
    Rate,
    /// Per-case boolean.
    BooleanFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDescriptor {
    pub key: &'static str,
    pub kind: AttributeKind,
    pub label: &'static str,
    pub units: Option<&'static str>,
}

const fn attr(
    key: &'static str,
    kind: AttributeKind,
    label: &'static str,
    units: Option<&'static str>,
) -> AttributeDescriptor {
    AttributeDescriptor {
        key,
        kind,
        label,
        units,
    }
}

use AttributeKind::*;

static CATALOG: [AttributeDescriptor; 27] = [
    attr("prbc_units", NumericDistribution, "Red blood cells transfused", Some("units")),
    attr("ffp_units", NumericDistribution, "Fresh frozen plasma transfused", Some("units")),
    attr("plt_units", NumericDistribution, "Platelets transfused", Some("units")),
    attr("cryo_units", NumericDistribution, "Cryoprecipitate transfused", Some("units")),
    attr("cell_salvage_ml", NumericDistribution, "Cell salvage volume", Some("mL")),
    attr("preop_hgb", NumericDistribution, "Preoperative hemoglobin", Some("g/dL")),
    attr("postop_hgb", NumericDistribution, "Postoperative hemoglobin", Some("g/dL")),
    attr("drg_weight", NumericDistribution, "DRG weight (risk score)", None),
    attr("year", NumericDistribution, "Surgery year", None),
    attr("avg_prbc_per_case", NumericScalar, "Average red cell units per case", Some("units")),
    attr("avg_ffp_per_case", NumericScalar, "Average plasma units per case", Some("units")),
    attr("avg_plt_per_case", NumericScalar, "Average platelet units per case", Some("units")),
    attr("avg_cryo_per_case", NumericScalar, "Average cryoprecipitate units per case", Some("units")),
    attr("avg_cell_salvage_per_case", NumericScalar, "Average cell salvage per case", Some("mL")),
    attr("death", BooleanFlag, "Death", None),
    attr("vent_over_24h", BooleanFlag, "Ventilation over 24 hours", None),
    attr("ecmo", BooleanFlag, "ECMO", None),
    attr("b12", BooleanFlag, "B12 administered", None),
    attr("amicar", BooleanFlag, "Aminocaproic acid administered", None),
    attr("txa", BooleanFlag, "Tranexamic acid administered", None),
    attr("death_rate", Rate, "Mortality rate", None),
    attr("vent_rate", Rate, "Long-term ventilation rate", None),
    attr("ecmo_rate", Rate, "ECMO rate", None),
    attr("b12_rate", Rate, "B12 usage rate", None),
    attr("amicar_rate", Rate, "Aminocaproic acid usage rate", None),
    attr("txa_rate", Rate, "Tranexamic acid usage rate", None),
    attr("transfused_rate", Rate, "Red cell transfusion rate", None),
];

/// The fixed attribute catalog, in display order.
pub fn attribute_catalog() -> &'static [AttributeDescriptor] {
    &CATALOG
}

pub fn lookup(key: &str) -> Option<&'static AttributeDescriptor> {
    CATALOG.iter().find(|a| a.key == key)
}

/// Per-case numeric value for a `NumericDistribution` key. `None` for an
/// absent lab value or a key that is not per-case numeric.
pub fn numeric_value(case: &CaseRecord, key: &str) -> Option<f64> {
    match key {
        "prbc_units" => Some(case.prbc_units as f64),
        "ffp_units" => Some(case.ffp_units as f64),
        "plt_units" => Some(case.platelet_units as f64),
        "cryo_units" => Some(case.cryo_units as f64),
        "cell_salvage_ml" => Some(case.cell_salvage_ml),
        "preop_hgb" => case.preop_hgb,
        "postop_hgb" => case.postop_hgb,
        "drg_weight" => case.drg_weight,
        "year" => Some(case.year() as f64),
        _ => None,
    }
}

/// Per-case value for a `BooleanFlag` key.
pub fn flag_value(case: &CaseRecord, key: &str) -> Option<bool> {
    match key {
        "death" => Some(case.death),
        "vent_over_24h" => Some(case.vent_over_24h),
        "ecmo" => Some(case.ecmo),
        "b12" => Some(case.b12),
        "amicar" => Some(case.amicar),
        "txa" => Some(case.txa),
        _ => None,
    }
}

/// The per-case predicate a `Rate` key counts.
pub fn rate_value(case: &CaseRecord, key: &str) -> Option<bool> {
    match key {
        "death_rate" => Some(case.death),
        "vent_rate" => Some(case.vent_over_24h),
        "ecmo_rate" => Some(case.ecmo),
        "b12_rate" => Some(case.b12),
        "amicar_rate" => Some(case.amicar),
        "txa_rate" => Some(case.txa),
        "transfused_rate" => Some(case.prbc_units > 0),
        _ => None,
    }
}

/// The per-case numeric field averaged by a `NumericScalar` key.
pub fn scalar_source(key: &str) -> Option<&'static str> {
    match key {
        "avg_prbc_per_case" => Some("prbc_units"),
        "avg_ffp_per_case" => Some("ffp_units"),
        "avg_plt_per_case" => Some("plt_units"),
        "avg_cryo_per_case" => Some("cryo_units"),
        "avg_cell_salvage_per_case" => Some("cell_salvage_ml"),
        _ => None,
    }
}
