//! Deterministic synthetic case generator.
//!
//! Every surgeon gets practice parameters drawn from the seed, and a few
//! surgeons get deliberately extreme ones (the "planted" effects). The
//! parameters are returned alongside the cases as [`GroundTruth`] so that
//! tests can check that aggregates recover them.
//!
//! Output depends only on the profile: the RNG is ChaCha8 and every real
//! value is rounded before it is stored.

use crate::ingest::CaseSet;
use crate::model::{CaseRecord, Urgency};
use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("year range {0}..={1} is empty")]
    Years(i32, i32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    pub n_cases: usize,
    pub n_surgeons: usize,
    pub n_anesthesiologists: usize,
    pub year_range: (i32, i32),
    pub n_procedures: usize,
    pub seed: u64,
}

impl Default for SyntheticProfile {
    /// Roughly the size of a single-center cardiac surgery extract.
    fn default() -> Self {
        Self {
            n_cases: 4000,
            n_surgeons: 12,
            n_anesthesiologists: 20,
            year_range: (2014, 2019),
            n_procedures: 111,
            seed: 42,
        }
    }
}

impl SyntheticProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.n_cases == 0 {
            return Err(ProfileError::Zero("n_cases"));
        }
        if self.n_surgeons == 0 {
            return Err(ProfileError::Zero("n_surgeons"));
        }
        if self.n_anesthesiologists == 0 {
            return Err(ProfileError::Zero("n_anesthesiologists"));
        }
        if self.n_procedures == 0 {
            return Err(ProfileError::Zero("n_procedures"));
        }
        let (start, end) = self.year_range;
        if start > end || NaiveDate::from_ymd_opt(start, 1, 1).is_none() || NaiveDate::from_ymd_opt(end, 12, 31).is_none() {
            return Err(ProfileError::Years(start, end));
        }
        Ok(())
    }
}

/// Practice parameters the generator used for one surgeon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeonPractice {
    pub surgeon_id: String,
    /// Additive log-odds shift of red cell transfusion.
    pub transfusion_logit_shift: f64,
    /// Mean red cell units given when a case is transfused.
    pub mean_units_when_transfused: f64,
    /// Probability of using cell salvage on a transfused case.
    pub cell_salvage_rate: f64,
    /// Baseline probability of giving aminocaproic acid.
    pub amicar_rate: f64,
    /// Mean preoperative hemoglobin of this surgeon's elective patients.
    pub elective_preop_mean: f64,
    /// Mean postoperative hemoglobin the surgeon transfuses toward.
    pub postop_target_mean: f64,
}

/// Surgeons given extreme practice parameters on purpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffects {
    /// Transfuses most often and most units.
    pub high_transfuser: String,
    /// Transfuses toward a postoperative hemoglobin well above target.
    pub over_transfuser: String,
    /// Operates on untreated anemic elective patients.
    pub anemia_neglect: String,
    /// Rarely uses cell salvage when transfusing.
    pub low_cell_salvage: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub profile: SyntheticProfile,
    pub surgeons: Vec<SurgeonPractice>,
    pub planted: PlantedEffects,
    /// Probability that an elective, non-anemic, average-risk case with a
    /// neutral surgeon receives red cells.
    pub base_transfusion_probability: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub cases: CaseSet,
    pub truth: GroundTruth,
}

/// Named procedure codes; remaining codes are numbered `PROC_NNN`.
const NAMED_PROCEDURES: [&str; 10] = [
    "CABG",
    "AVR",
    "MVR_OPEN",
    "MV_REPAIR",
    "CABG_AVR",
    "TAVR",
    "ASCENDING_AORTA",
    "HEART_TRANSPLANT",
    "LVAD",
    "ASD_REPAIR",
];

const BASE_LOGIT: f64 = -0.9;

fn procedure_codes(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match NAMED_PROCEDURES.get(i) {
            Some(name) => (*name).to_string(),
            None => format!("PROC_{:03}", i + 1),
        })
        .collect()
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Picks an index with probability proportional to `weights`.
fn weighted_index(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn plant(profile: &SyntheticProfile, rng: &mut ChaCha8Rng) -> (Vec<SurgeonPractice>, PlantedEffects) {
    let ids: Vec<String> = (1..=profile.n_surgeons).map(|i| format!("S{i:02}")).collect();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(rng);
    let role = |k: usize| order[k % order.len()];

    let high = role(0);
    let over = role(1);
    let neglect = role(2);
    let low_cs: Vec<usize> = if ids.len() >= 5 { vec![role(3), role(4)] } else { vec![role(3)] };

    let mut surgeons: Vec<SurgeonPractice> = ids
        .iter()
        .map(|id| SurgeonPractice {
            surgeon_id: id.clone(),
            transfusion_logit_shift: rng.random_range(-0.4..0.4),
            mean_units_when_transfused: rng.random_range(1.5..2.5),
            cell_salvage_rate: rng.random_range(0.88..0.98),
            amicar_rate: rng.random_range(0.05..0.35),
            elective_preop_mean: rng.random_range(13.0..13.6),
            postop_target_mean: rng.random_range(8.8..9.6),
        })
        .collect();

    surgeons[high].transfusion_logit_shift = 1.4;
    surgeons[high].mean_units_when_transfused = 4.0;
    surgeons[over].postop_target_mean = 11.4;
    surgeons[neglect].elective_preop_mean = 11.0;
    for &i in &low_cs {
        surgeons[i].cell_salvage_rate = 0.55;
    }

    let planted = PlantedEffects {
        high_transfuser: ids[high].clone(),
        over_transfuser: ids[over].clone(),
        anemia_neglect: ids[neglect].clone(),
        low_cell_salvage: low_cs.iter().map(|&i| ids[i].clone()).collect(),
    };
    (surgeons, planted)
}

/// Generates a dataset. A pure function of `profile`.
pub fn generate_synthetic(profile: &SyntheticProfile) -> Result<SyntheticDataset, ProfileError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);

    let (surgeons, planted) = plant(profile, &mut rng);
    let anesth_shift: Vec<f64> = (0..profile.n_anesthesiologists)
        .map(|_| rng.random_range(-0.25..0.25))
        .collect();
    let codes = procedure_codes(profile.n_procedures);
    // Zipf-like popularity: CABG dominates, the tail is rare.
    let proc_cdf = cumulative((0..codes.len()).map(|i| 1.0 / (i as f64 + 1.0).powf(1.1)));
    let proc_risk: Vec<f64> = (0..codes.len())
        .map(|i| match codes[i].as_str() {
            "CABG" | "TAVR" | "ASD_REPAIR" => 0.0,
            "HEART_TRANSPLANT" | "LVAD" => 0.9,
            _ => rng.random_range(0.0..0.5),
        })
        .collect();
    let surgeon_cdf = cumulative((0..surgeons.len()).map(|_| rng.random_range(0.7..1.3)));

    let start = NaiveDate::from_ymd_opt(profile.year_range.0, 1, 1).expect("validated");
    let end = NaiveDate::from_ymd_opt(profile.year_range.1, 12, 31).expect("validated");
    let span_days = (end - start).num_days();

    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let drg_dist = LogNormal::new(1.2, 0.45).expect("valid lognormal");

    let mut cases = Vec::with_capacity(profile.n_cases);
    for i in 0..profile.n_cases {
        let s = weighted_index(&mut rng, &surgeon_cdf);
        let surgeon = &surgeons[s];
        let a = rng.random_range(0..profile.n_anesthesiologists);
        let date = start + Duration::days(rng.random_range(0..=span_days));

        let urgency = match rng.random::<f64>() {
            u if u < 0.70 => Urgency::Elective,
            u if u < 0.90 => Urgency::Urgent,
            _ => Urgency::Emergent,
        };

        let primary = weighted_index(&mut rng, &proc_cdf);
        let mut procedures = vec![codes[primary].clone()];
        if codes.len() > 1 && rng.random::<f64>() < 0.15 {
            let second = weighted_index(&mut rng, &proc_cdf);
            if second != primary {
                procedures.push(codes[second].clone());
            }
        }
        let risk = procedures.iter().map(|p| proc_risk[codes.iter().position(|c| c == p).unwrap()]).fold(0.0, f64::max);

        let drg = round_to(drg_dist.sample(&mut rng) * (1.0 + risk), 2);
        let preop_mean = match urgency {
            Urgency::Elective => surgeon.elective_preop_mean,
            _ => 12.3,
        };
        let preop = round_to((preop_mean + 1.2 * std_normal.sample(&mut rng)).clamp(6.0, 18.0), 1);
        let anemic = preop < 10.0;

        let urgency_shift = match urgency {
            Urgency::Elective => 0.0,
            Urgency::Urgent => 0.4,
            Urgency::Emergent => 0.9,
        };
        let logit = BASE_LOGIT
            + surgeon.transfusion_logit_shift
            + anesth_shift[a]
            + urgency_shift
            + 0.35 * (drg - 3.7).max(-2.0) / 2.0
            + risk
            + if anemic { 0.8 } else { 0.0 };
        let transfused = rng.random::<f64>() < logistic(logit);

        let prbc: u32 = if transfused {
            let lambda = (surgeon.mean_units_when_transfused - 1.0 + 0.3 * risk).max(0.05);
            1 + Poisson::new(lambda).expect("positive rate").sample(&mut rng) as u32
        } else {
            0
        };
        let extra_units = |rng: &mut ChaCha8Rng, p: f64, mean: f64| -> u32 {
            if prbc > 0 && rng.random::<f64>() < p {
                1 + Poisson::new(mean).expect("positive rate").sample(rng) as u32
            } else {
                0
            }
        };
        let ffp = extra_units(&mut rng, 0.35 + 0.3 * risk, 1.2);
        let plt = extra_units(&mut rng, 0.30 + 0.3 * risk, 0.5);
        let cryo = extra_units(&mut rng, 0.15 + 0.2 * risk, 0.8);

        let salvage_p = if transfused { surgeon.cell_salvage_rate } else { 0.45 };
        let cell_salvage = if rng.random::<f64>() < salvage_p {
            let ml = 120.0 + 180.0 * prbc as f64 + 250.0 * rng.random::<f64>() + 150.0 * risk;
            (ml / 10.0).round() * 10.0
        } else {
            0.0
        };

        let postop = if transfused {
            surgeon.postop_target_mean + 0.7 * std_normal.sample(&mut rng)
        } else {
            preop - 2.8 + 0.9 * std_normal.sample(&mut rng)
        };
        let postop = round_to(postop.clamp(5.0, 17.0), 1);

        let amicar_p = (surgeon.amicar_rate * (0.6 + 0.25 * (drg - 2.0).max(0.0))).min(0.95);
        let amicar = rng.random::<f64>() < amicar_p;
        let txa = rng.random::<f64>() < 0.3;
        let b12 = rng.random::<f64>() < if anemic { 0.35 } else { 0.08 };
        let ecmo = rng.random::<f64>() < 0.01 + 0.06 * risk;
        let vent = rng.random::<f64>() < logistic(-2.0 + 0.35 * prbc as f64 + 0.15 * drg + urgency_shift);
        let death = rng.random::<f64>() < logistic(-4.6 + 0.2 * prbc as f64 + 0.15 * drg + urgency_shift + risk);

        // Labs are occasionally missing from the record.
        let preop_hgb = (rng.random::<f64>() >= 0.02).then_some(preop);
        let postop_hgb = (rng.random::<f64>() >= 0.02).then_some(postop);
        let drg_weight = (rng.random::<f64>() >= 0.03).then_some(drg);

        cases.push(CaseRecord {
            case_id: format!("C{:06}", i + 1),
            patient_id: format!("PT{:06}", rng.random_range(0..1_000_000u32)),
            surgeon_id: surgeon.surgeon_id.clone(),
            anesthesiologist_id: format!("A{:02}", a + 1),
            date,
            procedures,
            urgency,
            prbc_units: prbc,
            ffp_units: ffp,
            platelet_units: plt,
            cryo_units: cryo,
            cell_salvage_ml: cell_salvage,
            preop_hgb,
            postop_hgb,
            drg_weight,
            death,
            vent_over_24h: vent,
            ecmo,
            b12,
            amicar,
            txa,
        });
    }

    let cases = CaseSet::new(cases, format!("synthetic(seed={})", profile.seed))
        .expect("generator produces valid, uniquely keyed cases");
    Ok(SyntheticDataset {
        cases,
        truth: GroundTruth {
            profile: profile.clone(),
            surgeons,
            planted,
            base_transfusion_probability: logistic(BASE_LOGIT),
        },
    })
}
