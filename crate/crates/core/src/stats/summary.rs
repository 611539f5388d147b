//! Distribution summaries, normal-approximation confidence intervals and
//! Gaussian kernel density curves.

use super::StatsError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

/// Below this many observations a distribution is shown as raw points
/// instead of a density curve.
pub const KDE_MIN_SAMPLES: usize = 10;
pub const KDE_DEFAULT_POINTS: usize = 64;
/// Bandwidth used when the data has no spread at all.
pub const KDE_FALLBACK_BANDWIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

fn present<I>(values: I) -> Vec<f64>
where
    I: IntoIterator,
    I::Item: Into<Option<f64>>,
{
    values
        .into_iter()
        .filter_map(Into::into)
        .filter(|v: &f64| !v.is_nan())
        .collect()
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `p * (n - 1)`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    })
}

/// Median and quartiles. Accepts plain values or `Option`s; absent and NaN
/// entries are skipped and excluded from `n`.
pub fn distribution_summary<I>(values: I) -> DistributionSummary
where
    I: IntoIterator,
    I::Item: Into<Option<f64>>,
{
    let mut v = present(values);
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    };
    DistributionSummary {
        n,
        median,
        q1: quantile_sorted(&v, 0.25),
        q3: quantile_sorted(&v, 0.75),
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

/// Two-sided standard-normal critical value for a confidence level.
pub fn z_critical(level: f64) -> Result<f64, StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidLevel(level));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf((1.0 + level) / 2.0))
}

/// `mean ± z·s/√n` with the normal critical value. `None` for fewer than two
/// values.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<Option<ConfidenceInterval>, StatsError> {
    let z = z_critical(level)?;
    let (Some(m), Some(s)) = (mean(values), sample_std(values)) else {
        return Ok(None);
    };
    let half = z * s / (values.len() as f64).sqrt();
    Ok(Some(ConfidenceInterval {
        mean: m,
        low: m - half,
        high: m + half,
    }))
}

/// Silverman's rule of thumb, `0.9 · min(s, IQR/1.34) · n^(-1/5)`.
///
/// When one of the spread measures is zero the other is used; when both are
/// zero the bandwidth falls back to [`KDE_FALLBACK_BANDWIDTH`].
pub fn silverman_bandwidth(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let s = sample_std(values).unwrap_or(0.0);
    let iqr = quantile_sorted(&sorted, 0.75)? - quantile_sorted(&sorted, 0.25)?;
    let spread = [s, iqr / 1.34]
        .into_iter()
        .filter(|x| *x > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !spread.is_finite() {
        return Some(KDE_FALLBACK_BANDWIDTH);
    }
    Some(0.9 * spread * (values.len() as f64).powf(-0.2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub bandwidth: f64,
    /// `(x, density)` pairs on a uniform grid over `[min - 3h, max + 3h]`.
    pub points: Vec<(f64, f64)>,
}

pub fn gaussian_density(x: f64, center: f64, h: f64) -> f64 {
    let u = (x - center) / h;
    (-0.5 * u * u).exp() / (h * (2.0 * PI).sqrt())
}

/// Gaussian kernel density curve with Silverman bandwidth.
pub fn kde_curve(values: &[f64], points: usize) -> Result<KdeCurve, StatsError> {
    let data = present(values.iter().copied());
    if data.is_empty() {
        return Err(StatsError::Empty);
    }
    if points < 2 {
        return Err(StatsError::InvalidGrid(points));
    }
    let h = silverman_bandwidth(&data).expect("non-empty");
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (points - 1) as f64;
    let n = data.len() as f64;
    let curve = (0..points)
        .map(|i| {
            let x = lo + step * i as f64;
            let density = data.iter().map(|&c| gaussian_density(x, c, h)).sum::<f64>() / n;
            (x, density)
        })
        .collect();
    Ok(KdeCurve {
        bandwidth: h,
        points: curve,
    })
}

/// Trapezoidal integral of a sampled curve.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}
