//! Builders and proptest strategies shared by unit tests.

use crate::ingest::CaseSet;
use crate::model::{CaseRecord, Urgency};
use chrono::NaiveDate;

pub fn case(id: &str, edit: impl FnOnce(&mut CaseRecord)) -> CaseRecord {
    let mut c = CaseRecord {
        case_id: id.to_string(),
        patient_id: format!("P{id}"),
        surgeon_id: "S1".into(),
        anesthesiologist_id: "A1".into(),
        date: NaiveDate::from_ymd_opt(2017, 6, 1).unwrap(),
        procedures: vec!["CABG".into()],
        urgency: Urgency::Elective,
        prbc_units: 0,
        ffp_units: 0,
        platelet_units: 0,
        cryo_units: 0,
        cell_salvage_ml: 0.0,
        preop_hgb: Some(13.0),
        postop_hgb: Some(9.0),
        drg_weight: Some(3.0),
        death: false,
        vent_over_24h: false,
        ecmo: false,
        b12: false,
        amicar: false,
        txa: false,
    };
    edit(&mut c);
    c
}

pub fn set(cases: Vec<CaseRecord>) -> CaseSet {
    CaseSet::new(cases, "test").unwrap()
}

pub mod arb {
    use super::*;
    use crate::cohort::{DateRange, FilterSpec, FlagPredicate, RangePredicate, SplitSpec};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const PROCS: [&str; 4] = ["CABG", "AVR", "MVR", "TX"];
    const NUMERIC: [&str; 6] = ["prbc_units", "ffp_units", "cell_salvage_ml", "preop_hgb", "postop_hgb", "drg_weight"];
    const FLAGS: [&str; 6] = ["death", "vent_over_24h", "ecmo", "b12", "amicar", "txa"];

    fn opt_lab() -> impl Strategy<Value = Option<f64>> {
        prop_oneof![1 => Just(None), 4 => (60u32..160).prop_map(|x| Some(x as f64 / 10.0))]
    }

    fn record() -> impl Strategy<Value = CaseRecord> {
        (
            (0u8..3, 0u8..3, 0i64..2000, prop::sample::subsequence(PROCS.to_vec(), 1..=2), 0u8..3),
            (prop_oneof![3 => Just(0u32), 2 => 0u32..8], 0u32..4, 0u32..600),
            (opt_lab(), opt_lab(), prop::option::of(0u32..100)),
            prop::array::uniform6(any::<bool>()),
        )
            .prop_map(|((s, a, day, procs, urg), (prbc, ffp, cs), (pre, post, drg), flags)| {
                case("", |c| {
                    c.surgeon_id = format!("S{s}");
                    c.anesthesiologist_id = format!("A{a}");
                    c.date = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() + chrono::Duration::days(day);
                    c.procedures = procs.into_iter().map(String::from).collect();
                    c.urgency = Urgency::ALL[urg as usize];
                    c.prbc_units = prbc;
                    c.ffp_units = ffp;
                    c.cell_salvage_ml = if cs < 300 { 0.0 } else { cs as f64 * 5.0 };
                    c.preop_hgb = pre;
                    c.postop_hgb = post;
                    c.drg_weight = drg.map(|d| d as f64 / 10.0);
                    [c.death, c.vent_over_24h, c.ecmo, c.b12, c.amicar, c.txa] = flags;
                })
            })
    }

    pub fn cases(max: usize) -> impl Strategy<Value = Vec<CaseRecord>> {
        prop::collection::vec(record(), 0..max).prop_map(|mut v| {
            for (i, c) in v.iter_mut().enumerate() {
                c.case_id = format!("C{i:04}");
            }
            v
        })
    }

    pub fn range_predicate() -> impl Strategy<Value = RangePredicate> {
        (prop::sample::select(NUMERIC.to_vec()), prop::option::of(0u32..20), prop::option::of(0u32..20)).prop_map(
            |(attr, a, b)| {
                let scale = match attr {
                    "cell_salvage_ml" => 150.0,
                    "preop_hgb" | "postop_hgb" => 0.8,
                    "drg_weight" => 0.5,
                    _ => 0.5,
                };
                let (mut min, mut max) = (a.map(|x| x as f64 * scale), b.map(|x| x as f64 * scale));
                if let (Some(lo), Some(hi)) = (min, max) {
                    if lo > hi {
                        (min, max) = (Some(hi), Some(lo));
                    }
                }
                RangePredicate { attribute: attr.to_string(), min, max }
            },
        )
    }

    pub fn filter() -> impl Strategy<Value = FilterSpec> {
        (
            prop::option::of(prop::sample::subsequence(PROCS.to_vec(), 1..=2)),
            prop::option::of((0i64..2000, 0i64..800)),
            prop::option::of(prop::sample::subsequence(Urgency::ALL.to_vec(), 0..=3)),
            prop::option::of(0u8..3),
            prop::collection::vec(range_predicate(), 0..3),
            prop::collection::vec((prop::sample::select(FLAGS.to_vec()), any::<bool>()), 0..2),
        )
            .prop_map(|(procs, dates, urg, surgeon, ranges, flags)| {
                let base = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
                FilterSpec {
                    procedures: procs.unwrap_or_default().into_iter().map(String::from).collect(),
                    date_range: dates.map(|(s, len)| DateRange {
                        start: base + chrono::Duration::days(s),
                        end: base + chrono::Duration::days(s + len),
                    }),
                    urgency: urg.map(|u| u.into_iter().collect::<BTreeSet<_>>()),
                    surgeons: surgeon.map(|s| BTreeSet::from([format!("S{s}")])).unwrap_or_default(),
                    anesthesiologists: BTreeSet::new(),
                    range_predicates: ranges,
                    flag_predicates: flags
                        .into_iter()
                        .map(|(a, v)| FlagPredicate { attribute: a.to_string(), value: v })
                        .collect(),
                }
            })
    }

    pub fn split() -> impl Strategy<Value = SplitSpec> {
        prop_oneof![
            Just(SplitSpec::None {}),
            prop::sample::select(FLAGS.to_vec()).prop_map(|a| SplitSpec::BooleanAttribute { attribute: a.into() }),
            (0i64..2000).prop_map(|d| SplitSpec::DateCutoff {
                cutoff: NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() + chrono::Duration::days(d)
            }),
        ]
    }
}
