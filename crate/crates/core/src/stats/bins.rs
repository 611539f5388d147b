//! Usage bins for heatmap cells.
//!
//! Every bin layout starts with a bin holding exactly zero usage, followed by
//! right-closed bins of equal width and a final overflow bin:
//!
//! ```text
//! {0}, (0, w], (w, 2w], ..., ((k-1)w, kw], (kw, ∞)
//! ```
//!
//! Unit-counted components use `w = 1`, which on integers gives the bins
//! `0, 1, 2, 3, 4, 5+` for the default cap of 5.

use super::StatsError;
use crate::model::BloodComponent;
use serde::Serialize;

pub const DEFAULT_UNIT_CAP: u32 = 5;
pub const DEFAULT_SALVAGE_WIDTH_ML: f64 = 250.0;
pub const DEFAULT_SALVAGE_CAP_ML: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinSpec {
    pub component: BloodComponent,
    width: f64,
    closed_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub label: String,
    /// Exclusive lower edge; the zero bin is `[0, 0]`.
    pub lower: f64,
    /// Inclusive upper edge, `None` for the overflow bin.
    pub upper: Option<f64>,
}

impl Bin {
    pub fn contains(&self, v: f64) -> bool {
        match self.upper {
            Some(hi) if hi == self.lower => v == hi,
            Some(hi) => v > self.lower && v <= hi,
            None => v > self.lower,
        }
    }
}

impl BinSpec {
    /// Default layout: `0..4, 5+` for units, 250 mL bins up to 2000 mL for
    /// cell salvage.
    pub fn for_component(component: BloodComponent) -> Self {
        if component.is_continuous() {
            Self::continuous(DEFAULT_SALVAGE_WIDTH_ML, DEFAULT_SALVAGE_CAP_ML)
                .expect("default salvage bins are valid")
        } else {
            Self::discrete(component, DEFAULT_UNIT_CAP).expect("default unit cap is valid")
        }
    }

    /// Unit bins `0, 1, ..., cap-1, cap+`.
    pub fn discrete(component: BloodComponent, cap: u32) -> Result<Self, StatsError> {
        if component.is_continuous() {
            return Err(StatsError::InvalidBins("cell salvage needs continuous bins".into()));
        }
        if !(1..=1000).contains(&cap) {
            return Err(StatsError::InvalidBins(format!("unit cap {cap} outside 1..=1000")));
        }
        Ok(Self {
            component,
            width: 1.0,
            closed_bins: cap as usize - 1,
        })
    }

    /// Cell salvage bins of `width` mL, with everything above `cap` mL in
    /// one overflow bin. `cap` must be a whole multiple of `width`.
    pub fn continuous(width: f64, cap: f64) -> Result<Self, StatsError> {
        if !(width.is_finite() && width > 0.0 && cap.is_finite() && cap >= width) {
            return Err(StatsError::InvalidBins(format!("width {width} / cap {cap}")));
        }
        let k = (cap / width).round();
        if (k * width - cap).abs() > 1e-9 * cap || k > 1000.0 {
            return Err(StatsError::InvalidBins(format!(
                "cap {cap} is not a multiple of width {width} below 1000 bins"
            )));
        }
        Ok(Self {
            component: BloodComponent::CellSalvage,
            width,
            closed_bins: k as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.closed_bins + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn edge(&self, k: usize) -> f64 {
        k as f64 * self.width
    }

    pub fn bins(&self) -> Vec<Bin> {
        let discrete = !self.component.is_continuous();
        let mut out = Vec::with_capacity(self.len());
        out.push(Bin {
            label: "0".into(),
            lower: 0.0,
            upper: Some(0.0),
        });
        for k in 1..=self.closed_bins {
            let (lo, hi) = (self.edge(k - 1), self.edge(k));
            out.push(Bin {
                label: if discrete { format!("{k}") } else { format!("{lo}-{hi}") },
                lower: lo,
                upper: Some(hi),
            });
        }
        let top = self.edge(self.closed_bins);
        out.push(Bin {
            label: if discrete {
                format!("{}+", self.closed_bins + 1)
            } else {
                format!(">{top}")
            },
            lower: top,
            upper: None,
        });
        out
    }

    /// Index of the bin holding `v` (assumed finite and non-negative).
    pub fn index(&self, v: f64) -> usize {
        if v <= 0.0 {
            return 0;
        }
        let overflow = self.closed_bins + 1;
        if v > self.edge(self.closed_bins) {
            return overflow;
        }
        let mut k = ((v / self.width).ceil() as usize).clamp(1, self.closed_bins);
        // correct for rounding in the division against the edges as computed
        while k < self.closed_bins && v > self.edge(k) {
            k += 1;
        }
        while k > 1 && v <= self.edge(k - 1) {
            k -= 1;
        }
        k
    }
}

/// Bin counts under both normalizations.
///
/// `fraction_transfused[i]` is the share of bin `i + 1` among cases with
/// nonzero usage; the zero bin has no entry. Fractions are `None` when their
/// denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinCounts {
    pub counts: Vec<u64>,
    pub total: u64,
    pub fraction_all: Option<Vec<f64>>,
    pub fraction_transfused: Option<Vec<f64>>,
    pub zero_fraction: Option<f64>,
}

impl BinCounts {
    pub fn nonzero(&self) -> u64 {
        self.total - self.counts[0]
    }
}

pub fn bin_counts(values: &[f64], spec: &BinSpec) -> Result<BinCounts, StatsError> {
    let mut counts = vec![0u64; spec.len()];
    for &v in values {
        if !(v.is_finite() && v >= 0.0) {
            return Err(StatsError::InvalidValue(v));
        }
        counts[spec.index(v)] += 1;
    }
    let total = values.len() as u64;
    let nonzero = total - counts[0];
    let fraction_all = (total > 0).then(|| counts.iter().map(|&c| c as f64 / total as f64).collect::<Vec<_>>());
    let fraction_transfused =
        (nonzero > 0).then(|| counts[1..].iter().map(|&c| c as f64 / nonzero as f64).collect());
    let zero_fraction = fraction_all.as_ref().map(|f| f[0]);
    Ok(BinCounts {
        counts,
        total,
        fraction_all,
        fraction_transfused,
        zero_fraction,
    })
}
