//! Workspace state: the chart layout, active filter, annotations and
//! view-mode flag. Holds configuration only, never case data.

use crate::catalog::{self, AttributeKind};
use crate::cohort::{Facet, FilterSpec, QueryError, SplitSpec};
use crate::model::BloodComponent;
use crate::stats::DumbbellSort;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("malformed state document: {0}")]
    Malformed(String),
    #[error("unsupported schema_version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("duplicate chart id '{0}'")]
    DuplicateChart(String),
    #[error("no chart with id '{0}'")]
    UnknownChart(String),
    #[error("invalid chart '{chart}': {source}")]
    InvalidChart {
        chart: String,
        #[source]
        source: QueryError,
    },
    #[error("invalid filter: {0}")]
    InvalidFilter(#[source] QueryError),
    #[error("{0}")]
    Filter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    Heatmap {
        component: BloodComponent,
        #[serde(default)]
        split: SplitSpec,
        #[serde(default)]
        context: Vec<String>,
        /// Draw the zero bin on its own scale.
        #[serde(default)]
        zero_exclusion: bool,
    },
    Dumbbell {
        sort: DumbbellSort,
    },
    Dotplot {
        x_attr: String,
        y_attr: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub id: String,
    pub facet: Facet,
    pub chart: ChartSpec,
}

fn numeric_axis(key: &str, field: &str) -> Result<(), QueryError> {
    match catalog::lookup(key) {
        Some(a) if a.kind == AttributeKind::NumericDistribution => Ok(()),
        _ => Err(QueryError::new(field, format!("'{key}' is not a per-case numeric attribute"))),
    }
}

impl ChartConfig {
    pub fn validate(&self) -> Result<(), StateError> {
        let wrap = |source| StateError::InvalidChart {
            chart: self.id.clone(),
            source,
        };
        if self.id.trim().is_empty() {
            return Err(wrap(QueryError::new("id", "chart id must not be empty")));
        }
        match &self.chart {
            ChartSpec::Heatmap { split, context, .. } => {
                split.validate().map_err(wrap)?;
                for key in context {
                    if catalog::lookup(key).is_none() {
                        return Err(wrap(QueryError::new("context", format!("unknown attribute '{key}'"))));
                    }
                }
            }
            ChartSpec::Dumbbell { .. } => {}
            ChartSpec::Dotplot { x_attr, y_attr } => {
                numeric_axis(x_attr, "x_attr").map_err(wrap)?;
                numeric_axis(y_attr, "y_attr").map_err(wrap)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceState {
    pub schema_version: u32,
    pub charts: Vec<ChartConfig>,
    pub filter: FilterSpec,
    /// Chart id to note text. Only existing charts may carry a note.
    pub annotations: BTreeMap<String, String>,
    pub view_mode: bool,
}

impl Default for WorkspaceState {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            charts: Vec::new(),
            filter: FilterSpec::default(),
            annotations: BTreeMap::new(),
            view_mode: false,
        }
    }
}

impl WorkspaceState {
    pub fn chart(&self, id: &str) -> Option<&ChartConfig> {
        self.charts.iter().find(|c| c.id == id)
    }

    pub fn validate(&self) -> Result<(), StateError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(StateError::Version {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let mut ids = HashSet::new();
        for chart in &self.charts {
            if !ids.insert(chart.id.as_str()) {
                return Err(StateError::DuplicateChart(chart.id.clone()));
            }
            chart.validate()?;
        }
        if let Some(orphan) = self.annotations.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(StateError::UnknownChart(orphan.clone()));
        }
        self.filter.validate().map_err(StateError::InvalidFilter)
    }

    /// Canonical JSON: fields in declaration order, annotations sorted by id.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("workspace state always serializes")
    }

    /// Strict parse: unknown fields, other schema versions and invalid
    /// content are all rejected.
    pub fn from_json(text: &str) -> Result<Self, StateError> {
        let state: WorkspaceState = serde_json::from_str(text).map_err(|e| StateError::Malformed(e.to_string()))?;
        state.validate()?;
        Ok(state)
    }
}
