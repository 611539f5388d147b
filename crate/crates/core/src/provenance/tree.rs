//! Branching history of workspace states.
//!
//! Every node stores a full state snapshot. Applying an action adds a child
//! of the current node, so acting after an undo forks a new branch instead
//! of discarding the old one. Redo follows the child most recently visited.

use super::state::{ChartConfig, StateError, WorkspaceState};
use crate::cohort::{brush_to_filter, BrushRect, FilterSpec};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// A state-transforming edit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    AddChart { chart: ChartConfig },
    /// Replaces the chart with the same id.
    UpdateChart { chart: ChartConfig },
    /// Removes a chart along with its annotation.
    RemoveChart { chart_id: String },
    SetFilter { filter: FilterSpec },
    /// Conjoins the brush's range predicates onto the current filter.
    ApplyBrush { brush: BrushRect },
    ClearFilter,
    /// Sets a chart's note; empty text clears it.
    Annotate { chart_id: String, text: String },
    SetViewMode { enabled: bool },
}

impl Action {
    pub fn label(&self) -> String {
        match self {
            Action::AddChart { chart } => format!("add chart {}", chart.id),
            Action::UpdateChart { chart } => format!("update chart {}", chart.id),
            Action::RemoveChart { chart_id } => format!("remove chart {chart_id}"),
            Action::SetFilter { .. } => "set filter".into(),
            Action::ApplyBrush { brush } => format!("brush {} x {}", brush.x_attr, brush.y_attr),
            Action::ClearFilter => "clear filter".into(),
            Action::Annotate { chart_id, .. } => format!("annotate {chart_id}"),
            Action::SetViewMode { enabled } => format!("view mode {}", if *enabled { "on" } else { "off" }),
        }
    }

    /// The state after this action, or an error leaving `state` untouched.
    pub fn apply(&self, state: &WorkspaceState) -> Result<WorkspaceState, StateError> {
        let mut next = state.clone();
        match self {
            Action::AddChart { chart } => {
                if state.chart(&chart.id).is_some() {
                    return Err(StateError::DuplicateChart(chart.id.clone()));
                }
                chart.validate()?;
                next.charts.push(chart.clone());
            }
            Action::UpdateChart { chart } => {
                chart.validate()?;
                let slot = next
                    .charts
                    .iter_mut()
                    .find(|c| c.id == chart.id)
                    .ok_or_else(|| StateError::UnknownChart(chart.id.clone()))?;
                *slot = chart.clone();
            }
            Action::RemoveChart { chart_id } => {
                let before = next.charts.len();
                next.charts.retain(|c| &c.id != chart_id);
                if next.charts.len() == before {
                    return Err(StateError::UnknownChart(chart_id.clone()));
                }
                next.annotations.remove(chart_id);
            }
            Action::SetFilter { filter } => {
                filter.validate().map_err(StateError::InvalidFilter)?;
                next.filter = filter.clone();
            }
            Action::ApplyBrush { brush } => {
                let fragment = brush_to_filter(brush).map_err(StateError::InvalidFilter)?;
                next.filter = state
                    .filter
                    .and(&fragment)
                    .map_err(|e| StateError::Filter(e.to_string()))?;
            }
            Action::ClearFilter => next.filter = FilterSpec::default(),
            Action::Annotate { chart_id, text } => {
                if state.chart(chart_id).is_none() {
                    return Err(StateError::UnknownChart(chart_id.clone()));
                }
                if text.is_empty() {
                    next.annotations.remove(chart_id);
                } else {
                    next.annotations.insert(chart_id.clone(), text.clone());
                }
            }
            Action::SetViewMode { enabled } => next.view_mode = *enabled,
        }
        Ok(next)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProvenanceNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub state: WorkspaceState,
    pub label: String,
    pub created_at: DateTime<Utc>,
    /// Child that redo moves to.
    last_visited: Option<NodeId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProvenanceTree {
    nodes: Vec<ProvenanceNode>,
    current: NodeId,
}

impl Default for ProvenanceTree {
    fn default() -> Self {
        Self::new()
    }
}

impl ProvenanceTree {
    /// A tree holding only the empty root state.
    pub fn new() -> Self {
        Self {
            nodes: vec![ProvenanceNode {
                id: NodeId(0),
                parent: None,
                children: Vec::new(),
                state: WorkspaceState::default(),
                label: "root".into(),
                created_at: Utc::now(),
                last_visited: None,
            }],
            current: NodeId(0),
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn current(&self) -> NodeId {
        self.current
    }

    pub fn current_state(&self) -> &WorkspaceState {
        &self.nodes[self.current.0].state
    }

    pub fn node(&self, id: NodeId) -> Option<&ProvenanceNode> {
        self.nodes.get(id.0)
    }

    pub fn nodes(&self) -> &[ProvenanceNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Applies `action` to the current state and moves to the new child.
    pub fn apply(&mut self, action: &Action) -> Result<NodeId, StateError> {
        let state = action.apply(self.current_state())?;
        let id = NodeId(self.nodes.len());
        let parent = self.current;
        self.nodes.push(ProvenanceNode {
            id,
            parent: Some(parent),
            children: Vec::new(),
            state,
            label: action.label(),
            created_at: Utc::now(),
            last_visited: None,
        });
        let p = &mut self.nodes[parent.0];
        p.children.push(id);
        p.last_visited = Some(id);
        self.current = id;
        Ok(id)
    }

    pub fn annotate(&mut self, chart_id: &str, text: &str) -> Result<NodeId, StateError> {
        self.apply(&Action::Annotate {
            chart_id: chart_id.into(),
            text: text.into(),
        })
    }

    /// Moves to the parent; stays put at the root.
    pub fn undo(&mut self) -> NodeId {
        if let Some(parent) = self.nodes[self.current.0].parent {
            self.nodes[parent.0].last_visited = Some(self.current);
            self.current = parent;
        }
        self.current
    }

    /// Moves to the most recently visited child; stays put at a leaf.
    pub fn redo(&mut self) -> NodeId {
        if let Some(child) = self.nodes[self.current.0].last_visited {
            self.current = child;
        }
        self.current
    }

    pub fn can_undo(&self) -> bool {
        self.nodes[self.current.0].parent.is_some()
    }

    pub fn can_redo(&self) -> bool {
        self.nodes[self.current.0].last_visited.is_some()
    }

    /// Jumps to any node, marking the path from the root as visited so redo
    /// retraces it.
    pub fn goto(&mut self, target: NodeId) -> Option<NodeId> {
        self.node(target)?;
        let mut child = target;
        while let Some(parent) = self.nodes[child.0].parent {
            self.nodes[parent.0].last_visited = Some(child);
            child = parent;
        }
        self.current = target;
        Some(target)
    }

    /// Node ids from the root down to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(parent) = self.nodes[cur.0].parent {
            path.push(parent);
            cur = parent;
        }
        path.reverse();
        path
    }

    /// Checks the tree shape: one root, consistent parent/child links, every
    /// node reachable from the root, no cycles.
    pub fn check_invariants(&self) -> Result<(), String> {
        let roots = self.nodes.iter().filter(|n| n.parent.is_none()).count();
        if roots != 1 || self.nodes[0].parent.is_some() {
            return Err(format!("expected exactly one root at n0, found {roots}"));
        }
        let edges: usize = self.nodes.iter().map(|n| n.children.len()).sum();
        if edges + 1 != self.nodes.len() {
            return Err(format!("{} nodes but {edges} edges", self.nodes.len()));
        }
        for n in &self.nodes {
            if n.id.0 >= self.nodes.len() || self.nodes[n.id.0].id != n.id {
                return Err(format!("node {} stored out of place", n.id));
            }
            for c in &n.children {
                if self.node(*c).and_then(|c| c.parent) != Some(n.id) {
                    return Err(format!("child {c} of {} has another parent", n.id));
                }
            }
            if let Some(v) = n.last_visited {
                if !n.children.contains(&v) {
                    return Err(format!("redo target {v} is not a child of {}", n.id));
                }
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0], true) {
                return Err(format!("cycle through {id}"));
            }
            stack.extend(self.nodes[id.0].children.iter().copied());
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("n{i} unreachable from root"));
        }
        if self.node(self.current).is_none() {
            return Err("current node missing".into());
        }
        Ok(())
    }
}
