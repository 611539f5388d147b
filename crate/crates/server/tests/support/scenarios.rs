//! Case-study queries against a synthetic set with planted practice
//! patterns. Each check returns a one-line finding or an error.

use pbm_core::cohort::{apply_filters, brush_to_filter, BrushRect, Facet, FilterSpec, RangePredicate, SplitSpec};
use pbm_core::model::{BloodComponent, Urgency};
use pbm_core::stats::{dotplot, dumbbell, heatmap, ContextSummary, DumbbellSort, HeatmapParams};
use pbm_core::synth::{generate_synthetic, SyntheticDataset, SyntheticProfile};
use pbm_core::thresholds::ClinicalThresholds;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn transfused_only() -> FilterSpec {
    FilterSpec {
        range_predicates: vec![RangePredicate {
            attribute: "prbc_units".into(),
            min: Some(1.0),
            max: None,
        }],
        ..Default::default()
    }
}

fn cabg() -> FilterSpec {
    FilterSpec {
        procedures: ["CABG".to_string()].into(),
        ..Default::default()
    }
}

/// Elective CABG dumbbell sorted by preoperative hemoglobin: the surgeon
/// planted with untreated anemia has the lowest median.
pub fn anemia_management(ds: &SyntheticDataset) -> Check {
    let t = ClinicalThresholds::default();
    let f = FilterSpec {
        urgency: Some([Urgency::Elective].into()),
        ..cabg()
    };
    let sel = apply_filters(&ds.cases, &f).map_err(|e| e.to_string())?;
    let rows = dumbbell(&sel, Facet::BySurgeon, DumbbellSort::Pre, &t);
    for r in &rows {
        ensure(r.cases.windows(2).all(|w| w[0].preop_hgb <= w[1].preop_hgb), || {
            format!("{} not sorted by preop", r.group)
        })?;
    }
    let ranked: Vec<_> = rows.iter().filter(|r| r.cases.len() >= 10).collect();
    let lowest = ranked
        .iter()
        .min_by(|a, b| a.median_pre.unwrap().total_cmp(&b.median_pre.unwrap()))
        .ok_or("no surgeon with 10 elective CABG cases")?;
    let planted = &ds.truth.planted.anemia_neglect;
    ensure(&lowest.group == planted, || {
        format!("lowest median preop is {} not planted {planted}", lowest.group)
    })?;
    let m = lowest.median_pre.unwrap();
    ensure(m < t.preop_target_hgb, || format!("planted median {m} not below target"))?;
    let below: usize = rows
        .iter()
        .flat_map(|r| &r.cases)
        .filter(|c| c.preop_hgb < t.preop_target_hgb)
        .count();
    Ok(format!("{planted} lowest median preop {m:.1} g/dL; {below} elective CABG cases below target"))
}

/// Dot plot of units vs. postop hemoglobin, brushed to transfused cases,
/// then the dumbbell sorted by postop: the over-transfuser is highest.
pub fn transfusion_appropriateness(ds: &SyntheticDataset) -> Check {
    let t = ClinicalThresholds::default();
    let base = cabg();
    let sel = apply_filters(&ds.cases, &base).map_err(|e| e.to_string())?;
    let dots = dotplot(&sel, Facet::BySurgeon, "prbc_units", "postop_hgb").map_err(|e| e.to_string())?;
    let max_units = dots.iter().flat_map(|r| &r.points).map(|p| p.x).fold(0.0, f64::max);
    let brush = BrushRect {
        x_attr: "prbc_units".into(),
        y_attr: "postop_hgb".into(),
        x_min: 1.0,
        x_max: max_units,
        y_min: 0.0,
        y_max: 30.0,
    };
    let f = base.and(&brush_to_filter(&brush).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let brushed = apply_filters(&ds.cases, &f).map_err(|e| e.to_string())?;
    ensure(brushed.cases().iter().all(|c| c.prbc_units >= 1), || "brush kept an untransfused case".into())?;

    let rows = dumbbell(&brushed, Facet::BySurgeon, DumbbellSort::Post, &t);
    // the brushed filter must agree with the same ranges written by hand
    let by_hand = FilterSpec {
        range_predicates: vec![
            RangePredicate {
                attribute: "prbc_units".into(),
                min: Some(1.0),
                max: Some(max_units),
            },
            RangePredicate {
                attribute: "postop_hgb".into(),
                min: Some(0.0),
                max: Some(30.0),
            },
        ],
        ..cabg()
    };
    let direct = apply_filters(&ds.cases, &by_hand).map_err(|e| e.to_string())?;
    let direct_rows = dumbbell(&direct, Facet::BySurgeon, DumbbellSort::Post, &t);
    ensure(rows == direct_rows, || "brush filter and direct filter disagree".into())?;

    for r in &rows {
        ensure(r.cases.windows(2).all(|w| w[0].postop_hgb <= w[1].postop_hgb), || {
            format!("{} not sorted by postop", r.group)
        })?;
    }
    let top = rows
        .iter()
        .filter(|r| r.cases.len() >= 5)
        .max_by(|a, b| a.median_post.unwrap().total_cmp(&b.median_post.unwrap()))
        .ok_or("no surgeon with 5 transfused CABG cases")?;
    let planted = &ds.truth.planted.over_transfuser;
    ensure(&top.group == planted, || {
        format!("highest median postop is {} not planted {planted}", top.group)
    })?;
    let all: Vec<f64> = rows.iter().flat_map(|r| &r.cases).map(|c| c.postop_hgb).collect();
    let above = all.iter().filter(|&&v| v > t.postop_target_high).count();
    let share = above as f64 / all.len() as f64;
    ensure(share > 0.25, || format!("only {share:.2} of transfused cases above target"))?;
    Ok(format!(
        "{planted} highest median postop {:.1} g/dL; {:.0}% of transfused cases above {}",
        top.median_post.unwrap(),
        share * 100.0,
        t.postop_target_high
    ))
}

/// Cell salvage heatmap of transfused cases: the planted low-salvage
/// surgeons skip salvage in over 20% of transfused cases, nobody else does.
pub fn cell_salvage(ds: &SyntheticDataset) -> Check {
    let sel = apply_filters(&ds.cases, &transfused_only()).map_err(|e| e.to_string())?;
    let rows = heatmap(&sel, &HeatmapParams::new(Facet::BySurgeon, BloodComponent::CellSalvage))
        .map_err(|e| e.to_string())?;
    let planted = &ds.truth.planted.low_cell_salvage;
    let mut flagged = Vec::new();
    for r in &rows {
        let z = r.zero_fraction.ok_or_else(|| format!("{} has no zero fraction", r.group))?;
        if z > 0.2 {
            flagged.push(r.group.clone());
        }
        let nonzero: f64 = r.bins.iter().filter_map(|b| b.fraction_transfused).sum();
        if r.transfused_count > 0 {
            ensure((nonzero - 1.0).abs() < 1e-9, || format!("{} zero-excluded scale sums to {nonzero}", r.group))?;
        }
    }
    flagged.sort();
    let mut expected = planted.clone();
    expected.sort();
    ensure(flagged == expected, || format!("surgeons above 20% without salvage {flagged:?}, planted {expected:?}"))?;
    Ok(format!("{} skip cell salvage in over 20% of transfused cases", flagged.join(", ")))
}

const FIVE_CONTEXT: [&str; 5] = ["drg_weight", "preop_hgb", "avg_prbc_per_case", "death_rate", "vent_rate"];

/// Red cell heatmap split by aminocaproic acid with DRG context: most cases
/// go without the drug, and those given it carry higher DRG weights.
pub fn drug_treatment(ds: &SyntheticDataset) -> Check {
    let sel = apply_filters(&ds.cases, &FilterSpec::default()).map_err(|e| e.to_string())?;
    let mut params = HeatmapParams::new(Facet::BySurgeon, BloodComponent::Prbc);
    params.split = SplitSpec::BooleanAttribute {
        attribute: "amicar".into(),
    };
    params.context = FIVE_CONTEXT.iter().map(|s| s.to_string()).collect();
    let rows = heatmap(&sel, &params).map_err(|e| e.to_string())?;
    ensure(rows.iter().all(|r| r.context.len() == 5), || "a row lacks five context columns".into())?;
    ensure(rows.len() % 2 == 0 && rows.chunks(2).all(|p| p[0].group == p[1].group), || {
        "split rows are not paired".into()
    })?;

    let (with, without): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.sub_label.as_deref() == Some("true"));
    let n_with: usize = with.iter().map(|r| r.case_count).sum();
    let n_without: usize = without.iter().map(|r| r.case_count).sum();
    ensure(n_with < n_without, || format!("{n_with} cases with the drug vs {n_without} without"))?;

    let drg = |treated: bool| -> Vec<f64> {
        sel.cases()
            .iter()
            .filter(|c| c.amicar == treated)
            .filter_map(|c| c.drg_weight)
            .collect()
    };
    let med = |v: Vec<f64>| pbm_core::stats::distribution_summary(v).median.unwrap();
    let (m_with, m_without) = (med(drg(true)), med(drg(false)));
    ensure(m_with > m_without, || format!("median DRG {m_with} with drug vs {m_without} without"))?;
    let higher = with
        .iter()
        .zip(&without)
        .filter(|(a, b)| {
            let m = |r: &pbm_core::stats::HeatmapRow| match &r.context[0].summary {
                ContextSummary::Distribution { median, .. } => *median,
                _ => None,
            };
            matches!((m(a), m(b)), (Some(x), Some(y)) if x > y)
        })
        .count();
    Ok(format!(
        "{n_with} of {} cases given the drug; median DRG {m_with:.2} vs {m_without:.2}; higher in {higher}/{} surgeons",
        n_with + n_without,
        with.len()
    ))
}

/// Unsplit red cell heatmap: the planted high transfuser ranks first by
/// average units per case.
pub fn high_transfuser(ds: &SyntheticDataset) -> Check {
    let sel = apply_filters(&ds.cases, &FilterSpec::default()).map_err(|e| e.to_string())?;
    let mut params = HeatmapParams::new(Facet::BySurgeon, BloodComponent::Prbc);
    params.context = vec!["avg_prbc_per_case".into()];
    let rows = heatmap(&sel, &params).map_err(|e| e.to_string())?;
    let avg = |r: &pbm_core::stats::HeatmapRow| match r.context[0].summary {
        ContextSummary::Scalar { value } => value.unwrap_or(f64::NEG_INFINITY),
        _ => f64::NEG_INFINITY,
    };
    let top = rows
        .iter()
        .max_by(|a, b| avg(a).total_cmp(&avg(b)))
        .ok_or("no rows")?;
    let planted = &ds.truth.planted.high_transfuser;
    ensure(&top.group == planted, || format!("top by avg_prbc_per_case is {} not {planted}", top.group))?;
    Ok(format!("{planted} ranks first at {:.2} units per case", avg(top)))
}

pub type Scenario = (&'static str, fn(&SyntheticDataset) -> Check);

pub const SCENARIOS: [Scenario; 5] = [
    ("anemia management", anemia_management),
    ("transfusion appropriateness", transfusion_appropriateness),
    ("cell salvage", cell_salvage),
    ("drug treatment", drug_treatment),
    ("high transfuser", high_transfuser),
];

pub fn dataset(seed: u64) -> SyntheticDataset {
    generate_synthetic(&SyntheticProfile {
        seed,
        ..SyntheticProfile::default()
    })
    .expect("default profile is valid")
}
