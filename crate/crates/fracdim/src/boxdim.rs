//! Range-based box counting over sampled surfaces and box-dimension
//! estimation by least-squares slope fitting in log-log coordinates.
//!
//! For a dyadic level `k` the domain square splits into `2^k x 2^k` cells of
//! side `delta`. Writing `R` for the sampled oscillation (max minus min) of
//! the surface over a cell, the graph needs at least `max(R/delta, 1)` and
//! at most `2 + R/delta` boxes of side `delta` above that cell, which gives
//! the computable sandwich
//!
//! ```text
//! sum max(ceil(R/delta), 1)  <=  N_delta  <=  2 * 4^k + (1/delta) * sum R
//! ```
//!
//! [`box_count`] returns the lower expression (an integer count),
//! [`box_count_bounds`] returns both ends, and [`estimate_dimension`] fits
//! `log2 N` against `k`.

use crate::surfaces::SampledSurface;
use crate::text::fmt_f64;
use crate::{Error, Result};

/// Box counts of one sampled surface across dyadic levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountCurve {
    /// Dyadic levels `k`; the cell grid at level `k` is `2^k x 2^k`.
    pub levels: Vec<u32>,
    /// Range-based box count per level.
    pub counts: Vec<u64>,
    /// Side length of the (square) domain; `delta = side / 2^k`.
    pub side: f64,
    /// Label of the surface the counts were taken from.
    pub surface_label: String,
    /// Oversampling factor used when sampling the surface.
    pub oversample: usize,
}

impl BoxCountCurve {
    /// Renders the curve as CSV with header `k,delta,N,logN`; `logN` is the
    /// base-2 logarithm used by the slope fit. Floats carry 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,delta,N,logN\n");
        for (&k, &n) in self.levels.iter().zip(&self.counts) {
            let delta = self.side / (1u64 << k) as f64;
            out.push_str(&format!(
                "{k},{},{n},{}\n",
                fmt_f64(delta),
                fmt_f64((n as f64).log2())
            ));
        }
        out
    }
}

/// Least-squares fit of `log2 N` against the dyadic level `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionEstimate {
    /// Fitted slope; the box-dimension estimate.
    pub slope: f64,
    /// Fitted intercept in `log2` units.
    pub intercept: f64,
    /// Coefficient of determination of the fit. `NaN` marks a degenerate
    /// fit (all counts equal).
    pub r_squared: f64,
    /// First level of the fit window.
    pub k_min: u32,
    /// Last level of the fit window.
    pub k_max: u32,
}

impl DimensionEstimate {
    /// A fit is considered reliable when the log-log points are close to a
    /// line: `r_squared >= 0.9`. Degenerate fits are never reliable.
    pub fn reliable(&self) -> bool {
        self.r_squared.is_finite() && self.r_squared >= 0.9
    }
}

/// Guarded ceiling for range/delta ratios: exact integer ratios (a linear
/// surface gives ratios of exactly 1) must not be bumped to the next
/// integer by floating-point noise, so the argument is nudged down by 1e-9
/// before taking the ceiling.
fn boxes_for_ratio(ratio: f64) -> u64 {
    let c = (ratio - 1e-9).ceil();
    if c < 1.0 {
        1
    } else {
        c as u64
    }
}

fn level_cells(s: &SampledSurface, k: u32) -> Result<usize> {
    if k == 0 || k >= 32 {
        return Err(Error::InvalidSpec(format!(
            "dyadic level must satisfy 1 <= k < 32, got {k}"
        )));
    }
    if !s.rect().is_square() {
        return Err(Error::InvalidSpec(format!(
            "box counting needs a square domain, got {} x {}",
            s.rect().width(),
            s.rect().height()
        )));
    }
    let cells = 1usize << k;
    if s.n() % cells != 0 {
        return Err(Error::Misaligned(format!(
            "cell grid n = {} is not a multiple of 2^{k}",
            s.n()
        )));
    }
    Ok(cells)
}

/// Lower-expression scan shared by the count and the sandwich bounds:
/// returns the guarded-ceiling count and the raw ratio sum `sum R/delta`.
fn scan_level(s: &SampledSurface, k: u32) -> Result<(u64, f64)> {
    let cells = level_cells(s, k)?;
    let delta = s.rect().width() / cells as f64;
    let mut count = 0u64;
    let mut ratio_sum = 0.0;
    for bj in 0..cells {
        for bi in 0..cells {
            let range = s.range_over_block(cells, bi, bj);
            count += boxes_for_ratio(range / delta);
            ratio_sum += range / delta;
        }
    }
    Ok((count, ratio_sum))
}

/// Range-based box count at dyadic level `k`:
/// `sum_cells max(ceil(R/delta), 1)` with `delta = side / 2^k`.
///
/// A constant surface needs one box per cell (`4^k` total); a cell whose
/// oscillation is `3.2 * delta` contributes 4 boxes.
///
/// # Errors
///
/// Returns [`Error::Misaligned`] unless the sample cell grid is a multiple
/// of `2^k`, and [`Error::InvalidSpec`] when the domain is not square or
/// `k` is out of range.
pub fn box_count(s: &SampledSurface, k: u32) -> Result<u64> {
    Ok(scan_level(s, k)?.0)
}

/// Sandwich bounds for the box count at level `k`: the lower bound is
/// exactly [`box_count`]; the upper bound is `2 * 4^k + (1/delta) * sum R`.
///
/// # Errors
///
/// Same conditions as [`box_count`].
pub fn box_count_bounds(s: &SampledSurface, k: u32) -> Result<(u64, f64)> {
    let cells = level_cells(s, k)? as u64;
    let (lower, ratio_sum) = scan_level(s, k)?;
    Ok((lower, 2.0 * (cells * cells) as f64 + ratio_sum))
}

/// Box counts across the window `k_min ..= k_max`.
///
/// # Errors
///
/// Requires `k_min >= 1` and `k_max >= k_min + 2` (at least three points
/// for the slope fit), plus the per-level conditions of [`box_count`].
pub fn box_count_curve(s: &SampledSurface, k_min: u32, k_max: u32) -> Result<BoxCountCurve> {
    if k_min < 1 || k_max < k_min + 2 {
        return Err(Error::InvalidSpec(format!(
            "level window needs k_min >= 1 and k_max >= k_min + 2, got {k_min}..={k_max}"
        )));
    }
    let mut levels = Vec::new();
    let mut counts = Vec::new();
    for k in k_min..=k_max {
        levels.push(k);
        counts.push(box_count(s, k)?);
    }
    Ok(BoxCountCurve {
        levels,
        counts,
        side: s.rect().width(),
        surface_label: s.label().to_string(),
        oversample: s.oversample(),
    })
}

/// Unweighted least-squares fit of `log2 N` against `k`. The slope is the
/// box-dimension estimate of the surface graph.
///
/// # Errors
///
/// Returns [`Error::InvalidSpec`] when the curve has fewer than three
/// points or inconsistent level/count lengths.
pub fn estimate_dimension(curve: &BoxCountCurve) -> Result<DimensionEstimate> {
    let m = curve.levels.len();
    if m < 3 || curve.counts.len() != m {
        return Err(Error::InvalidSpec(format!(
            "dimension fit needs at least 3 aligned curve points, got {m} levels and {} counts",
            curve.counts.len()
        )));
    }
    let xs: Vec<f64> = curve.levels.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = curve.counts.iter().map(|&n| (n as f64).log2()).collect();
    let mf = m as f64;
    let x_mean = xs.iter().sum::<f64>() / mf;
    let y_mean = ys.iter().sum::<f64>() / mf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..m {
        let dx = xs[i] - x_mean;
        let dy = ys[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = (0..m)
        .map(|i| {
            let resid = ys[i] - (slope * xs[i] + intercept);
            resid * resid
        })
        .sum();
    // All counts equal: no variance to explain, flag the fit as undefined.
    let r_squared = if syy <= 1e-30 {
        f64::NAN
    } else {
        1.0 - ss_res / syy
    };
    Ok(DimensionEstimate {
        slope,
        intercept,
        r_squared,
        k_min: curve.levels[0],
        k_max: curve.levels[m - 1],
    })
}
