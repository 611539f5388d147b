//! Analytics over surgical transfusion case records.
//!
//! The pipeline is: [`ingest`] cases from CSV (or [`synth`]esize them),
//! select a cohort with [`cohort`] filters, facet and split it, summarize
//! with [`stats`], and keep the analyst's chart configuration in a
//! [`provenance`] tree that can be saved and shared.

pub mod catalog;
pub mod cohort;
pub mod ingest;
pub mod model;
pub mod provenance;
pub mod stats;
pub mod synth;
pub mod thresholds;

#[cfg(test)]
pub(crate) mod testutil;

pub use catalog::{attribute_catalog, AttributeDescriptor, AttributeKind};
pub use cohort::{
    apply_filters, brush_to_filter, case_details, facet_cases, split_groups, BrushRect, CaseSelection, Facet,
    FilterSpec, QueryError, SplitSpec,
};
pub use ingest::{list_procedures, load_cases, CaseSet, IngestError, IngestReport};
pub use model::{BloodComponent, CaseRecord, Urgency};
pub use synth::{generate_synthetic, GroundTruth, SyntheticDataset, SyntheticProfile};
pub use provenance::{Action, ProvenanceTree, ShareId, StateStore, WorkspaceState};
pub use thresholds::{load_thresholds, ClinicalThresholds, ThresholdError};
