//! Slow, obvious recomputation of every engine result, written against the
//! raw record fields only.

use pbm_core::cohort::{Facet, FilterSpec, SplitSpec};
use pbm_core::model::{BloodComponent, CaseRecord};

/// 0.975 quantile of the standard normal, to full double precision.
pub const Z95: f64 = 1.959963984540054;

pub fn value(c: &CaseRecord, key: &str) -> Option<f64> {
    match key {
        "prbc_units" => Some(c.prbc_units as f64),
        "ffp_units" => Some(c.ffp_units as f64),
        "plt_units" => Some(c.platelet_units as f64),
        "cryo_units" => Some(c.cryo_units as f64),
        "cell_salvage_ml" => Some(c.cell_salvage_ml),
        "preop_hgb" => c.preop_hgb,
        "postop_hgb" => c.postop_hgb,
        "drg_weight" => c.drg_weight,
        "year" => Some(c.date.format("%Y").to_string().parse().unwrap()),
        other => panic!("oracle has no numeric attribute {other}"),
    }
}

pub fn flag(c: &CaseRecord, key: &str) -> bool {
    match key {
        "death" | "death_rate" => c.death,
        "vent_over_24h" | "vent_rate" => c.vent_over_24h,
        "ecmo" | "ecmo_rate" => c.ecmo,
        "b12" | "b12_rate" => c.b12,
        "amicar" | "amicar_rate" => c.amicar,
        "txa" | "txa_rate" => c.txa,
        "transfused_rate" => c.prbc_units != 0,
        other => panic!("oracle has no flag {other}"),
    }
}

pub fn amount(c: &CaseRecord, component: BloodComponent) -> f64 {
    match component {
        BloodComponent::Prbc => c.prbc_units as f64,
        BloodComponent::Ffp => c.ffp_units as f64,
        BloodComponent::Plt => c.platelet_units as f64,
        BloodComponent::Cryo => c.cryo_units as f64,
        BloodComponent::CellSalvage => c.cell_salvage_ml,
    }
}

pub fn matches(c: &CaseRecord, f: &FilterSpec) -> bool {
    let mut ok = true;
    if !f.procedures.is_empty() {
        let mut any = false;
        for p in &c.procedures {
            for q in &f.procedures {
                if p == q {
                    any = true;
                }
            }
        }
        ok &= any;
    }
    if let Some(r) = &f.date_range {
        ok &= r.start <= c.date && c.date <= r.end;
    }
    if let Some(u) = &f.urgency {
        ok &= u.iter().any(|x| *x == c.urgency);
    }
    if !f.surgeons.is_empty() {
        ok &= f.surgeons.iter().any(|s| *s == c.surgeon_id);
    }
    if !f.anesthesiologists.is_empty() {
        ok &= f.anesthesiologists.iter().any(|s| *s == c.anesthesiologist_id);
    }
    for p in &f.range_predicates {
        ok &= match value(c, &p.attribute) {
            None => false,
            Some(v) => p.min.map_or(true, |lo| v >= lo) && p.max.map_or(true, |hi| v <= hi),
        };
    }
    for p in &f.flag_predicates {
        ok &= flag(c, &p.attribute) == p.value;
    }
    ok
}

pub fn select<'a>(cases: &'a [CaseRecord], f: &FilterSpec) -> Vec<&'a CaseRecord> {
    cases.iter().filter(|c| matches(c, f)).collect()
}

pub struct Row<'a> {
    pub key: String,
    pub sub_label: Option<String>,
    pub cases: Vec<&'a CaseRecord>,
}

fn facet_key(c: &CaseRecord, facet: Facet) -> String {
    match facet {
        Facet::BySurgeon => c.surgeon_id.clone(),
        Facet::ByAnesthesiologist => c.anesthesiologist_id.clone(),
        Facet::ByYear => c.date.format("%Y").to_string(),
    }
}

pub fn partition<'a>(sel: &[&'a CaseRecord], facet: Facet) -> Vec<Row<'a>> {
    let mut rows: Vec<Row<'a>> = Vec::new();
    for c in sel {
        let key = facet_key(c, facet);
        match rows.iter_mut().find(|r| r.key == key) {
            Some(r) => r.cases.push(c),
            None => rows.push(Row {
                key,
                sub_label: None,
                cases: vec![c],
            }),
        }
    }
    // selection sort keeps this obviously correct
    let before = |a: &Row, b: &Row| match facet {
        Facet::ByYear => a.key.parse::<i32>().unwrap() < b.key.parse::<i32>().unwrap(),
        _ => a.cases.len() > b.cases.len() || (a.cases.len() == b.cases.len() && a.key < b.key),
    };
    for i in 0..rows.len() {
        let mut best = i;
        for j in i + 1..rows.len() {
            if before(&rows[j], &rows[best]) {
                best = j;
            }
        }
        rows.swap(i, best);
    }
    rows
}

pub fn split<'a>(rows: Vec<Row<'a>>, spec: &SplitSpec) -> Vec<Row<'a>> {
    let (labels, side): ((&str, &str), Box<dyn Fn(&CaseRecord) -> bool>) = match spec {
        SplitSpec::None {} => return rows,
        SplitSpec::BooleanAttribute { attribute } => {
            let a = attribute.clone();
            (("true", "false"), Box::new(move |c| flag(c, &a)))
        }
        SplitSpec::DateCutoff { cutoff } => {
            let d = *cutoff;
            (("before", "on_or_after"), Box::new(move |c| c.date < d))
        }
    };
    let mut out = Vec::new();
    for r in rows {
        out.push(Row {
            key: r.key.clone(),
            sub_label: Some(labels.0.into()),
            cases: r.cases.iter().copied().filter(|c| side(c)).collect(),
        });
        out.push(Row {
            key: r.key,
            sub_label: Some(labels.1.into()),
            cases: r.cases.into_iter().filter(|c| !side(c)).collect(),
        });
    }
    out
}

/// Bin index with the layout written out case by case: the zero bin, unit
/// bins up to 4, then `5+`; or 250 mL bins up to 2000 mL, then `>2000`.
pub fn bin(v: f64, component: BloodComponent) -> usize {
    if v == 0.0 {
        return 0;
    }
    if component == BloodComponent::CellSalvage {
        let mut k = 1;
        let mut upper = 250.0;
        while v > upper {
            k += 1;
            upper += 250.0;
            if k == 9 {
                return 9;
            }
        }
        k
    } else if v >= 5.0 {
        5
    } else {
        v as usize
    }
}

pub fn bin_count(component: BloodComponent) -> usize {
    if component == BloodComponent::CellSalvage {
        10
    } else {
        6
    }
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    // insertion sort
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    v
}

pub fn median(values: &[f64]) -> Option<f64> {
    let v = sorted(values);
    let n = v.len();
    if n == 0 {
        None
    } else if n % 2 == 1 {
        Some(v[(n - 1) / 2])
    } else {
        Some(0.5 * v[n / 2 - 1] + 0.5 * v[n / 2])
    }
}

/// Type-7 quantile: `x[j] + g (x[j+1] - x[j])`, `h = (n-1) p`.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    let v = sorted(values);
    if v.is_empty() {
        return None;
    }
    let h = (v.len() - 1) as f64 * p;
    let j = h as usize;
    let g = h - j as f64;
    Some(if j + 1 < v.len() { v[j] + g * (v[j + 1] - v[j]) } else { v[j] })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    Some(s / values.len() as f64)
}

/// `(low, high)` of the 95% normal-approximation interval.
pub fn ci95(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let m = mean(values)?;
    let mut ss = 0.0;
    for v in values {
        ss += (v - m).powi(2);
    }
    let se = (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt();
    Some((m - Z95 * se, m + Z95 * se))
}

pub fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

pub fn close_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => close(x, y),
        _ => false,
    }
}
