//! Chart-shaped results: heatmap rows with context columns, hemoglobin
//! dumbbells, and dot plots with confidence intervals.

use super::bins::{bin_counts, BinSpec};
use super::summary::{
    confidence_interval, distribution_summary, kde_curve, KdeCurve, KDE_DEFAULT_POINTS, KDE_MIN_SAMPLES,
};
use crate::catalog::{self, AttributeKind};
use crate::cohort::{facet_cases, split_groups, CaseSelection, Facet, QueryError, SplitSpec};
use crate::model::{BloodComponent, CaseRecord};
use crate::thresholds::ClinicalThresholds;
use serde::{Deserialize, Serialize};

/// Summary of one attribute over a row's cases. Undefined statistics are
/// `None` and serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContextSummary {
    Distribution {
        n: usize,
        median: Option<f64>,
        q1: Option<f64>,
        q3: Option<f64>,
        /// Density curve, present when `n` reaches the violin cutoff.
        kde: Option<KdeCurve>,
        /// Sorted raw values, present below the cutoff.
        points: Option<Vec<f64>>,
    },
    Scalar {
        value: Option<f64>,
    },
    Rate {
        numerator: usize,
        denominator: usize,
        fraction: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextColumn {
    pub attribute: String,
    pub summary: ContextSummary,
}

fn context_key(key: &str) -> Result<AttributeKind, QueryError> {
    catalog::lookup(key)
        .map(|a| a.kind)
        .ok_or_else(|| QueryError::new("context", format!("unknown attribute '{key}'")))
}

fn fraction(numerator: usize, denominator: usize) -> Option<f64> {
    (denominator > 0).then(|| numerator as f64 / denominator as f64)
}

/// Summarizes `key` over `cases`, dispatching on the attribute kind.
pub fn context_summary(cases: &[&CaseRecord], key: &str) -> Result<ContextSummary, QueryError> {
    Ok(match context_key(key)? {
        AttributeKind::NumericDistribution => {
            let values: Vec<f64> = cases.iter().filter_map(|c| catalog::numeric_value(c, key)).collect();
            let s = distribution_summary(values.iter().copied());
            let (kde, points) = if values.len() >= KDE_MIN_SAMPLES {
                let curve = kde_curve(&values, KDE_DEFAULT_POINTS).expect("non-empty sample");
                (Some(curve), None)
            } else {
                let mut sorted = values;
                sorted.sort_by(f64::total_cmp);
                (None, Some(sorted))
            };
            ContextSummary::Distribution {
                n: s.n,
                median: s.median,
                q1: s.q1,
                q3: s.q3,
                kde,
                points,
            }
        }
        AttributeKind::NumericScalar => {
            let source = catalog::scalar_source(key).expect("catalog scalar has a source");
            let total: f64 = cases.iter().filter_map(|c| catalog::numeric_value(c, source)).sum();
            ContextSummary::Scalar {
                value: (!cases.is_empty()).then(|| total / cases.len() as f64),
            }
        }
        kind @ (AttributeKind::Rate | AttributeKind::BooleanFlag) => {
            let hit = |c: &CaseRecord| match kind {
                AttributeKind::Rate => catalog::rate_value(c, key),
                _ => catalog::flag_value(c, key),
            };
            let numerator = cases.iter().filter(|c| hit(c) == Some(true)).count();
            ContextSummary::Rate {
                numerator,
                denominator: cases.len(),
                fraction: fraction(numerator, cases.len()),
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct HeatmapParams {
    pub facet: Facet,
    pub split: SplitSpec,
    pub component: BloodComponent,
    pub context: Vec<String>,
    /// Overrides the component's default bins.
    pub bins: Option<BinSpec>,
}

impl HeatmapParams {
    pub fn new(facet: Facet, component: BloodComponent) -> Self {
        Self {
            facet,
            split: SplitSpec::None {},
            component,
            context: Vec::new(),
            bins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub label: String,
    pub count: u64,
    /// Share of all cases in the row.
    pub fraction_all: Option<f64>,
    /// Share of the row's cases with nonzero usage; always `None` for the
    /// zero bin.
    pub fraction_transfused: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub group: String,
    pub sub_label: Option<String>,
    pub case_count: usize,
    pub transfused_count: u64,
    pub zero_fraction: Option<f64>,
    pub bins: Vec<HeatmapCell>,
    pub context: Vec<ContextColumn>,
}

/// Faceted, optionally split heatmap of one blood component's usage.
pub fn heatmap(sel: &CaseSelection<'_>, params: &HeatmapParams) -> Result<Vec<HeatmapRow>, QueryError> {
    for key in &params.context {
        context_key(key)?;
    }
    params.split.validate()?;
    let spec = params.bins.unwrap_or_else(|| BinSpec::for_component(params.component));
    if spec.component != params.component {
        return Err(QueryError::new("bins", "bin layout belongs to a different component"));
    }
    let labels = spec.bins();

    let groups = split_groups(facet_cases(sel, params.facet), &params.split)?;
    groups
        .into_iter()
        .map(|g| {
            let values: Vec<f64> = g.cases.iter().map(|c| params.component.amount(c)).collect();
            let counts = bin_counts(&values, &spec).map_err(|e| QueryError::new("component", e.to_string()))?;
            let bins = labels
                .iter()
                .enumerate()
                .map(|(i, bin)| HeatmapCell {
                    label: bin.label.clone(),
                    count: counts.counts[i],
                    fraction_all: counts.fraction_all.as_ref().map(|f| f[i]),
                    fraction_transfused: match i {
                        0 => None,
                        _ => counts.fraction_transfused.as_ref().map(|f| f[i - 1]),
                    },
                })
                .collect();
            let context = params
                .context
                .iter()
                .map(|key| {
                    Ok(ContextColumn {
                        attribute: key.clone(),
                        summary: context_summary(&g.cases, key)?,
                    })
                })
                .collect::<Result<_, QueryError>>()?;
            Ok(HeatmapRow {
                group: g.key,
                sub_label: g.sub_label,
                case_count: g.cases.len(),
                transfused_count: counts.nonzero(),
                zero_fraction: counts.zero_fraction,
                bins,
                context,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumbbellSort {
    Pre,
    Post,
    /// Postoperative minus preoperative.
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumbbellCase {
    pub case_id: String,
    pub preop_hgb: f64,
    pub postop_hgb: f64,
}

impl DumbbellCase {
    pub fn sort_value(&self, sort: DumbbellSort) -> f64 {
        match sort {
            DumbbellSort::Pre => self.preop_hgb,
            DumbbellSort::Post => self.postop_hgb,
            DumbbellSort::Gap => self.postop_hgb - self.preop_hgb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumbbellRow {
    pub group: String,
    pub cases: Vec<DumbbellCase>,
    pub median_pre: Option<f64>,
    pub median_post: Option<f64>,
    pub preop_target_hgb: f64,
    pub transfusion_trigger_hgb: f64,
}

/// Pre/post hemoglobin pairs per group. Cases missing either value are
/// left out entirely.
pub fn dumbbell(
    sel: &CaseSelection<'_>,
    facet: Facet,
    sort: DumbbellSort,
    thresholds: &ClinicalThresholds,
) -> Vec<DumbbellRow> {
    facet_cases(sel, facet)
        .into_iter()
        .map(|g| {
            let mut cases: Vec<DumbbellCase> = g
                .cases
                .iter()
                .filter_map(|c| {
                    Some(DumbbellCase {
                        case_id: c.case_id.clone(),
                        preop_hgb: c.preop_hgb?,
                        postop_hgb: c.postop_hgb?,
                    })
                })
                .collect();
            cases.sort_by(|a, b| {
                a.sort_value(sort)
                    .total_cmp(&b.sort_value(sort))
                    .then_with(|| a.case_id.cmp(&b.case_id))
            });
            let median_pre = distribution_summary(cases.iter().map(|c| c.preop_hgb)).median;
            let median_post = distribution_summary(cases.iter().map(|c| c.postop_hgb)).median;
            DumbbellRow {
                group: g.key,
                cases,
                median_pre,
                median_post,
                preop_target_hgb: thresholds.preop_target_hgb,
                transfusion_trigger_hgb: thresholds.transfusion_trigger_hgb,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotPoint {
    pub case_id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotPlotRow {
    pub group: String,
    pub points: Vec<DotPoint>,
    pub mean_y: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

pub const DOTPLOT_CI_LEVEL: f64 = 0.95;

fn axis(key: &str, field: &str) -> Result<(), QueryError> {
    match catalog::lookup(key) {
        Some(a) if a.kind == AttributeKind::NumericDistribution => Ok(()),
        Some(_) => Err(QueryError::new(field, format!("attribute '{key}' is not a per-case numeric value"))),
        None => Err(QueryError::new(field, format!("unknown attribute '{key}'"))),
    }
}

/// Per-group scatter of two numeric attributes, with the mean of `y` and
/// its 95% interval.
pub fn dotplot(sel: &CaseSelection<'_>, facet: Facet, x_attr: &str, y_attr: &str) -> Result<Vec<DotPlotRow>, QueryError> {
    axis(x_attr, "x_attr")?;
    axis(y_attr, "y_attr")?;
    Ok(facet_cases(sel, facet)
        .into_iter()
        .map(|g| {
            let points: Vec<DotPoint> = g
                .cases
                .iter()
                .filter_map(|c| {
                    Some(DotPoint {
                        case_id: c.case_id.clone(),
                        x: catalog::numeric_value(c, x_attr)?,
                        y: catalog::numeric_value(c, y_attr)?,
                    })
                })
                .collect();
            let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
            let mean_y = super::summary::mean(&ys);
            let ci = confidence_interval(&ys, DOTPLOT_CI_LEVEL).expect("fixed valid level");
            DotPlotRow {
                group: g.key,
                points,
                mean_y,
                ci_low: ci.map(|c| c.low),
                ci_high: ci.map(|c| c.high),
            }
        })
        .collect())
}
