//! Seeded random case sets and queries for fuzzing.

use chrono::{Duration, NaiveDate};
use pbm_core::cohort::{DateRange, Facet, FilterSpec, FlagPredicate, RangePredicate, SplitSpec};
use pbm_core::ingest::CaseSet;
use pbm_core::model::{BloodComponent, CaseRecord, Urgency};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub const PROCS: [&str; 4] = ["CABG", "AVR", "MVR", "TX"];
pub const SURGEONS: [&str; 5] = ["S1", "S2", "S3", "S4", "S5"];
pub const ANESTHS: [&str; 3] = ["A1", "A2", "A3"];
pub const NUMERIC: [&str; 9] = [
    "prbc_units",
    "ffp_units",
    "plt_units",
    "cryo_units",
    "cell_salvage_ml",
    "preop_hgb",
    "postop_hgb",
    "drg_weight",
    "year",
];
pub const FLAGS: [&str; 6] = ["death", "vent_over_24h", "ecmo", "b12", "amicar", "txa"];
pub const CONTEXT: [&str; 9] = [
    "preop_hgb",
    "drg_weight",
    "cell_salvage_ml",
    "avg_prbc_per_case",
    "avg_cell_salvage_per_case",
    "death_rate",
    "transfused_rate",
    "amicar",
    "vent_rate",
];

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 1).unwrap()
}

fn lab(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> Option<f64> {
    (rng.random::<f64>() >= 0.1).then(|| rng.random_range(lo..hi) as f64 / 10.0)
}

fn units(rng: &mut ChaCha8Rng, max: u32) -> u32 {
    if rng.random_bool(0.5) {
        0
    } else {
        rng.random_range(1..=max)
    }
}

pub fn case_set(rng: &mut ChaCha8Rng, max_cases: usize) -> CaseSet {
    let n = rng.random_range(0..=max_cases);
    let cases = (0..n)
        .map(|i| {
            let k = rng.random_range(1..=2);
            let procedures: Vec<String> = PROCS.choose_multiple(rng, k).map(|p| p.to_string()).collect();
            CaseRecord {
                case_id: format!("C{i:04}"),
                patient_id: format!("P{}", rng.random_range(0..50)),
                surgeon_id: SURGEONS.choose(rng).unwrap().to_string(),
                anesthesiologist_id: ANESTHS.choose(rng).unwrap().to_string(),
                date: epoch() + Duration::days(rng.random_range(0..2191)),
                procedures,
                urgency: *Urgency::ALL.choose(rng).unwrap(),
                prbc_units: units(rng, 9),
                ffp_units: units(rng, 4),
                platelet_units: units(rng, 3),
                cryo_units: units(rng, 3),
                cell_salvage_ml: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(1..3000) as f64 },
                preop_hgb: lab(rng, 70, 170),
                postop_hgb: lab(rng, 60, 150),
                drg_weight: lab(rng, 5, 120),
                death: rng.random_bool(0.1),
                vent_over_24h: rng.random_bool(0.3),
                ecmo: rng.random_bool(0.05),
                b12: rng.random_bool(0.2),
                amicar: rng.random_bool(0.3),
                txa: rng.random_bool(0.3),
            }
        })
        .collect();
    CaseSet::new(cases, "fuzz").unwrap()
}

fn subset(rng: &mut ChaCha8Rng, pool: &[&str]) -> BTreeSet<String> {
    pool.iter().filter(|_| rng.random_bool(0.4)).map(|s| s.to_string()).collect()
}

fn bound(rng: &mut ChaCha8Rng, attr: &str) -> Option<f64> {
    if rng.random_bool(0.3) {
        return None;
    }
    Some(match attr {
        "cell_salvage_ml" => rng.random_range(0..3000) as f64,
        "preop_hgb" | "postop_hgb" => rng.random_range(60..170) as f64 / 10.0,
        "drg_weight" => rng.random_range(0..120) as f64 / 10.0,
        "year" => rng.random_range(2013..2021) as f64,
        _ => rng.random_range(0..10) as f64,
    })
}

/// A valid filter; most fields are usually unconstrained.
pub fn filter(rng: &mut ChaCha8Rng) -> FilterSpec {
    let mut f = FilterSpec::default();
    if rng.random_bool(0.4) {
        f.procedures = subset(rng, &PROCS);
    }
    if rng.random_bool(0.3) {
        let a = epoch() + Duration::days(rng.random_range(-100..2300));
        let b = epoch() + Duration::days(rng.random_range(-100..2300));
        // sometimes inverted on purpose
        f.date_range = Some(DateRange { start: a, end: b });
    }
    if rng.random_bool(0.3) {
        f.urgency = Some(Urgency::ALL.iter().copied().filter(|_| rng.random_bool(0.6)).collect());
    }
    if rng.random_bool(0.3) {
        f.surgeons = subset(rng, &SURGEONS);
    }
    if rng.random_bool(0.2) {
        f.anesthesiologists = subset(rng, &ANESTHS);
    }
    for _ in 0..rng.random_range(0..=2) {
        let attr = *NUMERIC.choose(rng).unwrap();
        let (mut min, mut max) = (bound(rng, attr), bound(rng, attr));
        if let (Some(a), Some(b)) = (min, max) {
            if a > b {
                (min, max) = (Some(b), Some(a));
            }
        }
        f.range_predicates.push(RangePredicate {
            attribute: attr.into(),
            min,
            max,
        });
    }
    for _ in 0..rng.random_range(0..=1) {
        f.flag_predicates.push(FlagPredicate {
            attribute: FLAGS.choose(rng).unwrap().to_string(),
            value: rng.random_bool(0.5),
        });
    }
    f
}

pub fn facet(rng: &mut ChaCha8Rng) -> Facet {
    *[Facet::BySurgeon, Facet::ByAnesthesiologist, Facet::ByYear].choose(rng).unwrap()
}

pub fn split(rng: &mut ChaCha8Rng) -> SplitSpec {
    match rng.random_range(0..3) {
        0 => SplitSpec::None {},
        1 => SplitSpec::BooleanAttribute {
            attribute: FLAGS.choose(rng).unwrap().to_string(),
        },
        _ => SplitSpec::DateCutoff {
            cutoff: epoch() + Duration::days(rng.random_range(0..2191)),
        },
    }
}

pub fn component(rng: &mut ChaCha8Rng) -> BloodComponent {
    *BloodComponent::ALL.choose(rng).unwrap()
}

pub fn context(rng: &mut ChaCha8Rng) -> Vec<String> {
    let k = rng.random_range(0..=4);
    CONTEXT.choose_multiple(rng, k).map(|s| s.to_string()).collect()
}
