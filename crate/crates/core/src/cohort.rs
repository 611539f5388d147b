//! Case selection, provider/year faceting and outcome or date splits.

use crate::catalog::{self, AttributeKind};
use crate::ingest::CaseSet;
use crate::model::{CaseRecord, Urgency};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// A rejected query, naming the offending request field.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{field}: {message}")]
pub struct QueryError {
    pub field: String,
    pub message: String,
}

impl QueryError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Prefixes the field path, e.g. `range_predicates[0]` -> `filter.range_predicates[0]`.
    pub fn within(mut self, parent: &str) -> Self {
        self.field = format!("{parent}.{}", self.field);
        self
    }
}

/// Inclusive on both ends. An inverted range selects nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// `attribute ∈ [min, max]`; a missing bound is unbounded. Cases without a
/// value for the attribute never match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangePredicate {
    pub attribute: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

impl RangePredicate {
    pub fn contains(&self, v: f64) -> bool {
        self.min.is_none_or(|lo| v >= lo) && self.max.is_none_or(|hi| v <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagPredicate {
    pub attribute: String,
    pub value: bool,
}

/// A conjunction of predicates. Empty sets and absent options mean "no
/// constraint".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSpec {
    /// Matches cases carrying at least one of these codes.
    pub procedures: BTreeSet<String>,
    pub date_range: Option<DateRange>,
    pub urgency: Option<BTreeSet<Urgency>>,
    pub surgeons: BTreeSet<String>,
    pub anesthesiologists: BTreeSet<String>,
    pub range_predicates: Vec<RangePredicate>,
    pub flag_predicates: Vec<FlagPredicate>,
}

fn numeric_attribute(key: &str, field: &str) -> Result<(), QueryError> {
    match catalog::lookup(key) {
        None => Err(QueryError::new(field, format!("unknown attribute '{key}'"))),
        Some(a) if a.kind != AttributeKind::NumericDistribution => Err(QueryError::new(
            field,
            format!("attribute '{key}' is not a per-case numeric value"),
        )),
        Some(_) => Ok(()),
    }
}

fn flag_attribute(key: &str, field: &str) -> Result<(), QueryError> {
    match catalog::lookup(key) {
        None => Err(QueryError::new(field, format!("unknown attribute '{key}'"))),
        Some(a) if a.kind != AttributeKind::BooleanFlag => Err(QueryError::new(
            field,
            format!("attribute '{key}' is not a boolean flag"),
        )),
        Some(_) => Ok(()),
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), QueryError> {
        for (i, p) in self.range_predicates.iter().enumerate() {
            let field = format!("range_predicates[{i}]");
            numeric_attribute(&p.attribute, &field)?;
            for bound in [p.min, p.max].into_iter().flatten() {
                if bound.is_nan() {
                    return Err(QueryError::new(field, "bound is NaN"));
                }
            }
            if let (Some(lo), Some(hi)) = (p.min, p.max) {
                if lo > hi {
                    return Err(QueryError::new(field, format!("min {lo} exceeds max {hi}")));
                }
            }
        }
        for (i, p) in self.flag_predicates.iter().enumerate() {
            flag_attribute(&p.attribute, &format!("flag_predicates[{i}]"))?;
        }
        Ok(())
    }

    /// Whether one case satisfies every predicate. Assumes a validated spec.
    pub fn matches(&self, case: &CaseRecord) -> bool {
        if !self.procedures.is_empty() && !case.procedures.iter().any(|p| self.procedures.contains(p)) {
            return false;
        }
        if let Some(r) = self.date_range {
            if case.date < r.start || case.date > r.end {
                return false;
            }
        }
        if let Some(allowed) = &self.urgency {
            if !allowed.contains(&case.urgency) {
                return false;
            }
        }
        if !self.surgeons.is_empty() && !self.surgeons.contains(&case.surgeon_id) {
            return false;
        }
        if !self.anesthesiologists.is_empty() && !self.anesthesiologists.contains(&case.anesthesiologist_id) {
            return false;
        }
        self.range_predicates.iter().all(|p| {
            catalog::numeric_value(case, &p.attribute).is_some_and(|v| p.contains(v))
        }) && self
            .flag_predicates
            .iter()
            .all(|p| catalog::flag_value(case, &p.attribute) == Some(p.value))
    }

    /// The conjunction of two filters as a single spec.
    ///
    /// Fails when both sides constrain procedures with different sets
    /// ("carries one of A and one of B" has no single-set form) or name
    /// disjoint provider sets.
    pub fn and(&self, other: &FilterSpec) -> Result<FilterSpec, QueryError> {
        let procedures = match (self.procedures.is_empty(), other.procedures.is_empty()) {
            (true, _) => other.procedures.clone(),
            (_, true) => self.procedures.clone(),
            _ if self.procedures == other.procedures => self.procedures.clone(),
            _ => {
                return Err(QueryError::new(
                    "procedures",
                    "cannot combine two different procedure selections",
                ))
            }
        };
        let date_range = match (self.date_range, other.date_range) {
            (Some(a), Some(b)) => Some(DateRange {
                start: a.start.max(b.start),
                end: a.end.min(b.end),
            }),
            (a, b) => a.or(b),
        };
        let urgency = match (&self.urgency, &other.urgency) {
            (Some(a), Some(b)) => Some(a.intersection(b).copied().collect()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let ids = |field: &str, a: &BTreeSet<String>, b: &BTreeSet<String>| {
            match (a.is_empty(), b.is_empty()) {
                (true, _) => Ok(b.clone()),
                (_, true) => Ok(a.clone()),
                _ => {
                    let both: BTreeSet<String> = a.intersection(b).cloned().collect();
                    if both.is_empty() {
                        Err(QueryError::new(field, "provider selections do not overlap"))
                    } else {
                        Ok(both)
                    }
                }
            }
        };
        Ok(FilterSpec {
            procedures,
            date_range,
            urgency,
            surgeons: ids("surgeons", &self.surgeons, &other.surgeons)?,
            anesthesiologists: ids("anesthesiologists", &self.anesthesiologists, &other.anesthesiologists)?,
            range_predicates: self
                .range_predicates
                .iter()
                .chain(&other.range_predicates)
                .cloned()
                .collect(),
            flag_predicates: self
                .flag_predicates
                .iter()
                .chain(&other.flag_predicates)
                .cloned()
                .collect(),
        })
    }
}

/// A selected subset of a case set, in input order.
#[derive(Debug, Clone)]
pub struct CaseSelection<'a> {
    set: &'a CaseSet,
    cases: Vec<&'a CaseRecord>,
    filters: Vec<FilterSpec>,
}

impl<'a> CaseSelection<'a> {
    pub fn all(set: &'a CaseSet) -> Self {
        Self {
            set,
            cases: set.cases().iter().collect(),
            filters: Vec::new(),
        }
    }

    pub fn case_set(&self) -> &'a CaseSet {
        self.set
    }

    pub fn cases(&self) -> &[&'a CaseRecord] {
        &self.cases
    }

    pub fn ids(&self) -> Vec<&'a str> {
        self.cases.iter().map(|c| c.case_id.as_str()).collect()
    }

    /// The filters applied to reach this selection, in order.
    pub fn filters(&self) -> &[FilterSpec] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    /// Narrows this selection with a further filter.
    pub fn refine(&self, f: &FilterSpec) -> Result<CaseSelection<'a>, QueryError> {
        f.validate().map_err(|e| e.within("filter"))?;
        let mut filters = self.filters.clone();
        filters.push(f.clone());
        Ok(CaseSelection {
            set: self.set,
            cases: self.cases.iter().copied().filter(|c| f.matches(c)).collect(),
            filters,
        })
    }
}

pub fn apply_filters<'a>(cs: &'a CaseSet, f: &FilterSpec) -> Result<CaseSelection<'a>, QueryError> {
    f.validate().map_err(|e| e.within("filter"))?;
    Ok(CaseSelection {
        set: cs,
        cases: cs.cases().iter().filter(|c| f.matches(c)).collect(),
        filters: vec![f.clone()],
    })
}

/// A rectangle drawn over a two-attribute scatter plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrushRect {
    pub x_attr: String,
    pub y_attr: String,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Converts a brush into a filter fragment with one range predicate per axis.
pub fn brush_to_filter(b: &BrushRect) -> Result<FilterSpec, QueryError> {
    numeric_attribute(&b.x_attr, "x_attr")?;
    numeric_attribute(&b.y_attr, "y_attr")?;
    if !(b.x_min <= b.x_max) {
        return Err(QueryError::new("x_min", "x_min must not exceed x_max"));
    }
    if !(b.y_min <= b.y_max) {
        return Err(QueryError::new("y_min", "y_min must not exceed y_max"));
    }
    Ok(FilterSpec {
        range_predicates: vec![
            RangePredicate {
                attribute: b.x_attr.clone(),
                min: Some(b.x_min),
                max: Some(b.x_max),
            },
            RangePredicate {
                attribute: b.y_attr.clone(),
                min: Some(b.y_min),
                max: Some(b.y_max),
            },
        ],
        ..FilterSpec::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    BySurgeon,
    ByAnesthesiologist,
    ByYear,
}

impl Facet {
    pub fn key(self, case: &CaseRecord) -> String {
        match self {
            Facet::BySurgeon => case.surgeon_id.clone(),
            Facet::ByAnesthesiologist => case.anesthesiologist_id.clone(),
            Facet::ByYear => case.year().to_string(),
        }
    }
}

/// A group of cases. `sub_label` is set on rows produced by a split.
#[derive(Debug, Clone, PartialEq)]
pub struct Group<'a> {
    pub key: String,
    pub sub_label: Option<String>,
    pub cases: Vec<&'a CaseRecord>,
}

impl Group<'_> {
    pub fn ids(&self) -> Vec<&str> {
        self.cases.iter().map(|c| c.case_id.as_str()).collect()
    }
}

/// Partitions a selection by facet. Provider groups are ordered busiest
/// first (ties by key); year groups chronologically.
pub fn facet_cases<'a>(sel: &CaseSelection<'a>, facet: Facet) -> Vec<Group<'a>> {
    let mut by_key: BTreeMap<String, Vec<&'a CaseRecord>> = BTreeMap::new();
    for &case in sel.cases() {
        by_key.entry(facet.key(case)).or_default().push(case);
    }
    let mut groups: Vec<Group<'a>> = by_key
        .into_iter()
        .map(|(key, cases)| Group {
            key,
            sub_label: None,
            cases,
        })
        .collect();
    match facet {
        Facet::ByYear => groups.sort_by_key(|g| g.key.parse::<i64>().unwrap_or(i64::MAX)),
        _ => groups.sort_by(|a, b| b.cases.len().cmp(&a.cases.len())),
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    // braces so unknown fields are rejected here too
    None {},
    BooleanAttribute { attribute: String },
    /// Cases before `cutoff` vs. cases on or after it.
    DateCutoff { cutoff: NaiveDate },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::None {}
    }
}

pub const SPLIT_TRUE: &str = "true";
pub const SPLIT_FALSE: &str = "false";
pub const SPLIT_BEFORE: &str = "before";
pub const SPLIT_ON_OR_AFTER: &str = "on_or_after";

impl SplitSpec {
    pub fn validate(&self) -> Result<(), QueryError> {
        match self {
            SplitSpec::BooleanAttribute { attribute } => flag_attribute(attribute, "split.attribute"),
            _ => Ok(()),
        }
    }
}

/// Divides every group into two sub-rows. Empty sub-rows are kept.
pub fn split_groups<'a>(groups: Vec<Group<'a>>, split: &SplitSpec) -> Result<Vec<Group<'a>>, QueryError> {
    split.validate()?;
    let side = |case: &CaseRecord| -> bool {
        match split {
            SplitSpec::None {} => true,
            SplitSpec::BooleanAttribute { attribute } => {
                catalog::flag_value(case, attribute).unwrap_or(false)
            }
            SplitSpec::DateCutoff { cutoff } => case.date < *cutoff,
        }
    };
    let (first, second) = match split {
        SplitSpec::None {} => return Ok(groups),
        SplitSpec::BooleanAttribute { .. } => (SPLIT_TRUE, SPLIT_FALSE),
        SplitSpec::DateCutoff { .. } => (SPLIT_BEFORE, SPLIT_ON_OR_AFTER),
    };
    let mut out = Vec::with_capacity(groups.len() * 2);
    for g in groups {
        let (yes, no): (Vec<_>, Vec<_>) = g.cases.into_iter().partition(|c| side(c));
        out.push(Group {
            key: g.key.clone(),
            sub_label: Some(first.to_string()),
            cases: yes,
        });
        out.push(Group {
            key: g.key,
            sub_label: Some(second.to_string()),
            cases: no,
        });
    }
    Ok(out)
}

/// One page of full case records, in selection order. A page past the end
/// is empty.
pub fn case_details(sel: &CaseSelection<'_>, page: usize, page_size: usize) -> Result<Vec<CaseRecord>, QueryError> {
    if page_size == 0 {
        return Err(QueryError::new("page_size", "page_size must be at least 1"));
    }
    let start = page.saturating_mul(page_size);
    Ok(sel
        .cases()
        .iter()
        .skip(start)
        .take(page_size)
        .map(|c| (*c).clone())
        .collect())
}
