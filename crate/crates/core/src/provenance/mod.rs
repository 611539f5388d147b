//! Workspace history and shareable snapshots.

pub mod state;
pub mod store;
pub mod tree;

pub use state::{ChartConfig, ChartSpec, StateError, WorkspaceState, SCHEMA_VERSION};
pub use store::{share_url, ShareId, StateStore, StoreError};
pub use tree::{Action, NodeId, ProvenanceNode, ProvenanceTree};
