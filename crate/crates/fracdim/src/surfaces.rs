//! Test-surface catalog, uniform oversampled sampling of surface graphs, and
//! per-cell oscillation (range) computation.
//!
//! A [`Surface`] is a total continuous map on a [`Rect`]. The catalog mixes
//! smooth calibration surfaces with rough ones (truncated Weierstrass- and
//! Takagi-type series) whose graphs have nontrivial box dimension, plus a
//! bounded continuous surface of unbounded variation (`OscillatorySineInv`)
//! and bilinear interpolation of user-supplied grid data.

use rayon::prelude::*;

use crate::{Error, Result};

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]` with non-negative
/// corner, the common domain of surfaces and integral operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    /// The unit square `[0, 1] x [0, 1]`.
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] unless `0 <= x0 < x1` and
    /// `0 <= y0 < y1` with all corners finite.
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Rect> {
        let all_finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
        if !all_finite || !(x0 >= 0.0 && x0 < x1 && y0 >= 0.0 && y0 < y1) {
            return Err(Error::InvalidSpec(format!(
                "rectangle needs 0 <= x0 < x1 and 0 <= y0 < y1, got [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// True when both sides have equal length up to rounding; box counting
    /// requires a square domain so that one cell scale exists.
    pub fn is_square(&self) -> bool {
        (self.width() - self.height()).abs() <= 1e-12 * self.width().max(self.height())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Grid of samples driving the `InterpolatedGrid` surface, stored row-major:
/// the value at column `i`, row `j` is the surface value at
/// `(x0 + i * w / (x_count - 1), y0 + j * h / (y_count - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    x_count: usize,
    y_count: usize,
    values: Vec<f64>,
}

impl GridData {
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] unless both counts are at least 2,
    /// `values.len() == x_count * y_count`, and every value is finite.
    pub fn new(x_count: usize, y_count: usize, values: Vec<f64>) -> Result<GridData> {
        if x_count < 2 || y_count < 2 {
            return Err(Error::InvalidSpec(format!(
                "grid data needs at least 2 samples per axis, got {x_count} x {y_count}"
            )));
        }
        if values.len() != x_count * y_count {
            return Err(Error::InvalidSpec(format!(
                "grid data expects {} values ({x_count} x {y_count}), got {}",
                x_count * y_count,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "grid data contains a non-finite value {bad}"
            )));
        }
        Ok(GridData {
            x_count,
            y_count,
            values,
        })
    }

    /// Parses the textual grid format: a header line `x_count,y_count`
    /// followed by `y_count` lines of `x_count` comma-separated values
    /// (row `j` holds the samples at the `j`-th y level).
    ///
    /// # Errors
    ///
    /// Returns [`Error::Parse`] with a line reference on malformed input and
    /// [`Error::InvalidSpec`] when the parsed grid violates the constraints
    /// of [`GridData::new`].
    pub fn from_csv_str(text: &str) -> Result<GridData> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("grid data is empty".into()))?;
        let mut counts = header.split(',').map(str::trim);
        let x_count: usize = counts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad grid header {header:?}")))?;
        let y_count: usize = counts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad grid header {header:?}")))?;
        if counts.next().is_some() {
            return Err(Error::Parse(format!(
                "grid header must be exactly `x_count,y_count`, got {header:?}"
            )));
        }
        let mut values = Vec::with_capacity(x_count * y_count);
        let mut rows = 0usize;
        for (idx, line) in lines {
            rows += 1;
            let mut cols = 0usize;
            for tok in line.split(',') {
                let v: f64 = tok.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad number {:?}", idx + 1, tok.trim()))
                })?;
                values.push(v);
                cols += 1;
            }
            if cols != x_count {
                return Err(Error::Parse(format!(
                    "line {}: expected {x_count} values, got {cols}",
                    idx + 1
                )));
            }
        }
        if rows != y_count {
            return Err(Error::Parse(format!(
                "expected {y_count} data rows, got {rows}"
            )));
        }
        GridData::new(x_count, y_count, values)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }
    pub fn y_count(&self) -> usize {
        self.y_count
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Catalog of surface families.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    /// `f(x, y) = c0`.
    Constant(f64),
    /// `f(x, y) = p x + q y + r0`.
    Bilinear { p: f64, q: f64, r0: f64 },
    /// `f(x, y) = sin(k1 pi x) sin(k2 pi y) + 1` (shifted non-negative).
    SineProduct { k1: u32, k2: u32 },
    /// Truncated Weierstrass-type series
    /// `sum_{k=0}^{K} lambda^(-k H) sin(lambda^k pi x) sin(lambda^k pi y)`,
    /// shifted by the amplitude sum so the surface is non-negative.
    /// Requires `lambda > 1`, `0 < hurst < 1`, `terms >= 1`.
    Weierstrass2D { lambda: f64, hurst: f64, terms: u32 },
    /// Truncated Takagi-type series
    /// `sum_{k=0}^{K} w^k tri(2^k x) tri(2^k y)` where `tri` is the distance
    /// to the nearest integer. Requires `0.5 <= w < 1`, `terms >= 1`.
    Takagi2D { w: f64, terms: u32 },
    /// `f(x, y) = g(x) g(y) + shift` with `g(u) = u sin(1/u)`, `g(0) = 0`;
    /// continuous but of unbounded variation near the axes. The shift is
    /// `x1 * y1`, an upper bound for `|g(x) g(y)|` on the rectangle.
    OscillatorySineInv,
    /// Bilinear interpolation of [`GridData`] stretched over the rectangle.
    InterpolatedGrid(GridData),
}

/// Precomputed evaluation kernel; frequencies and amplitudes are expanded
/// once at construction so `eval` stays cheap inside quadrature loops.
#[derive(Debug, Clone)]
enum Kernel {
    Constant(f64),
    Bilinear { p: f64, q: f64, r0: f64 },
    SineProduct { fx: f64, fy: f64 },
    SineSeries { terms: Vec<(f64, f64)>, shift: f64 },
    TriSeries { terms: Vec<(f64, f64)> },
    OscSineInv { shift: f64 },
    Grid(GridData),
}

/// A labeled continuous surface on a rectangle.
#[derive(Debug, Clone)]
pub struct Surface {
    spec: SurfaceSpec,
    kernel: Kernel,
    rect: Rect,
    label: String,
}

/// Builds a surface from a catalog entry, validating its parameters.
///
/// # Errors
///
/// Returns [`Error::InvalidSpec`] when a family constraint is violated
/// (see [`SurfaceSpec`]) or a series parameter overflows `f64`.
pub fn make_surface(spec: SurfaceSpec, rect: Rect) -> Result<Surface> {
    let pi = std::f64::consts::PI;
    let (kernel, label) = match &spec {
        SurfaceSpec::Constant(c0) => {
            require_finite("constant level", *c0)?;
            (Kernel::Constant(*c0), format!("constant_{c0}"))
        }
        SurfaceSpec::Bilinear { p, q, r0 } => {
            require_finite("bilinear coefficient", *p)?;
            require_finite("bilinear coefficient", *q)?;
            require_finite("bilinear coefficient", *r0)?;
            (
                Kernel::Bilinear {
                    p: *p,
                    q: *q,
                    r0: *r0,
                },
                format!("bilinear_{p}_{q}_{r0}"),
            )
        }
        SurfaceSpec::SineProduct { k1, k2 } => {
            if *k1 == 0 || *k2 == 0 {
                return Err(Error::InvalidSpec(
                    "sine product frequencies must be positive".into(),
                ));
            }
            (
                Kernel::SineProduct {
                    fx: *k1 as f64 * pi,
                    fy: *k2 as f64 * pi,
                },
                format!("sineproduct_{k1}_{k2}"),
            )
        }
        SurfaceSpec::Weierstrass2D {
            lambda,
            hurst,
            terms,
        } => {
            if !(*lambda > 1.0 && lambda.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "weierstrass scale must satisfy lambda > 1, got {lambda}"
                )));
            }
            if !(*hurst > 0.0 && *hurst < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "weierstrass exponent must satisfy 0 < hurst < 1, got {hurst}"
                )));
            }
            if *terms < 1 {
                return Err(Error::InvalidSpec(
                    "weierstrass series needs at least one term".into(),
                ));
            }
            let mut series = Vec::with_capacity(*terms as usize + 1);
            let mut shift = 0.0;
            for k in 0..=*terms {
                let amp = lambda.powf(-(k as f64) * hurst);
                let freq = lambda.powi(k as i32) * pi;
                if !freq.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "weierstrass frequency lambda^{k} overflows"
                    )));
                }
                shift += amp;
                series.push((amp, freq));
            }
            (
                Kernel::SineSeries {
                    terms: series,
                    shift,
                },
                format!("weierstrass_{lambda}_{hurst}_{terms}"),
            )
        }
        SurfaceSpec::Takagi2D { w, terms } => {
            if !(*w >= 0.5 && *w < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "takagi weight must satisfy 0.5 <= w < 1, got {w}"
                )));
            }
            if *terms < 1 {
                return Err(Error::InvalidSpec(
                    "takagi series needs at least one term".into(),
                ));
            }
            let mut series = Vec::with_capacity(*terms as usize + 1);
            for k in 0..=*terms {
                let scale = 2f64.powi(k as i32);
                if !scale.is_finite() {
                    return Err(Error::InvalidSpec(format!("takagi scale 2^{k} overflows")));
                }
                series.push((w.powi(k as i32), scale));
            }
            (
                Kernel::TriSeries { terms: series },
                format!("takagi_{w}_{terms}"),
            )
        }
        SurfaceSpec::OscillatorySineInv => (
            Kernel::OscSineInv {
                shift: rect.x1() * rect.y1(),
            },
            "oscillatory".to_string(),
        ),
        SurfaceSpec::InterpolatedGrid(grid) => (
            Kernel::Grid(grid.clone()),
            format!("grid_{}x{}", grid.x_count(), grid.y_count()),
        ),
    };
    Ok(Surface {
        spec,
        kernel,
        rect,
        label,
    })
}

fn require_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite, got {v}")))
    }
}

/// Distance to the nearest integer.
fn tri(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// `u sin(1/u)` extended continuously by `0` at the origin.
fn osc(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let w = 1.0 / u;
    if w.is_finite() {
        u * w.sin()
    } else {
        0.0
    }
}

impl Surface {
    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates the surface. Total and continuous on the rectangle; grid
    /// interpolation clamps coordinates outside it.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.kernel {
            Kernel::Constant(c0) => *c0,
            Kernel::Bilinear { p, q, r0 } => p * x + q * y + r0,
            Kernel::SineProduct { fx, fy } => (fx * x).sin() * (fy * y).sin() + 1.0,
            Kernel::SineSeries { terms, shift } => {
                let mut acc = *shift;
                for &(amp, freq) in terms {
                    acc += amp * (freq * x).sin() * (freq * y).sin();
                }
                acc
            }
            Kernel::TriSeries { terms } => {
                let mut acc = 0.0;
                for &(amp, scale) in terms {
                    acc += amp * tri(scale * x) * tri(scale * y);
                }
                acc
            }
            Kernel::OscSineInv { shift } => osc(x) * osc(y) + shift,
            Kernel::Grid(grid) => interpolate(grid, &self.rect, x, y),
        }
    }
}

/// Bilinear interpolation of grid data over `rect`, clamped at the edges.
fn interpolate(grid: &GridData, rect: &Rect, x: f64, y: f64) -> f64 {
    let nx = grid.x_count();
    let ny = grid.y_count();
    let u = ((x - rect.x0()) / rect.width() * (nx - 1) as f64).clamp(0.0, (nx - 1) as f64);
    let v = ((y - rect.y0()) / rect.height() * (ny - 1) as f64).clamp(0.0, (ny - 1) as f64);
    let i = (u.floor() as usize).min(nx - 2);
    let j = (v.floor() as usize).min(ny - 2);
    let fx = u - i as f64;
    let fy = v - j as f64;
    let at = |i: usize, j: usize| grid.values()[j * nx + i];
    at(i, j) * (1.0 - fx) * (1.0 - fy)
        + at(i + 1, j) * fx * (1.0 - fy)
        + at(i, j + 1) * (1.0 - fx) * fy
        + at(i + 1, j + 1) * fx * fy
}

/// Uniform samples of a surface: `n` cells per side, `r` sub-samples per
/// cell edge, `(n*r + 1)^2` values including both boundary edges.
#[derive(Debug, Clone)]
pub struct SampledSurface {
    label: String,
    rect: Rect,
    n: usize,
    oversample: usize,
    values: Vec<f64>,
}

impl SampledSurface {
    /// Wraps externally computed samples. `values` is row-major with
    /// `(n * oversample + 1)^2` entries, index `j * side + i` holding the
    /// sample at `(x0 + i * hx, y0 + j * hy)`.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] on a dimension mismatch or non-finite
    /// samples.
    pub fn from_values(
        label: impl Into<String>,
        rect: Rect,
        n: usize,
        oversample: usize,
        values: Vec<f64>,
    ) -> Result<SampledSurface> {
        if n < 1 || oversample < 1 {
            return Err(Error::InvalidSpec(
                "sampled surface needs n >= 1 and oversample >= 1".into(),
            ));
        }
        let side = n * oversample + 1;
        if values.len() != side * side {
            return Err(Error::InvalidSpec(format!(
                "expected {} samples ({side} x {side}), got {}",
                side * side,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "sampled surface contains non-finite values".into(),
            ));
        }
        Ok(SampledSurface {
            label: label.into(),
            rect,
            n,
            oversample,
            values,
        })
    }

    /// Reinterprets the same samples over a coarser cell grid; requires
    /// `n * oversample` to stay unchanged.
    ///
    /// # Errors
    ///
    /// Returns [`Error::Misaligned`] when the sample grid cannot be split
    /// into `n * oversample` sub-cells.
    pub fn regrid(&self, n: usize, oversample: usize) -> Result<SampledSurface> {
        if n < 1 || oversample < 1 || n * oversample != self.n * self.oversample {
            return Err(Error::Misaligned(format!(
                "cannot regrid {} x {} sampling as {n} cells x {oversample}",
                self.n, self.oversample
            )));
        }
        Ok(SampledSurface {
            label: self.label.clone(),
            rect: self.rect,
            n,
            oversample,
            values: self.values.clone(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn rect(&self) -> &Rect {
        &self.rect
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Samples per side, `n * oversample + 1`.
    pub fn side(&self) -> usize {
        self.n * self.oversample + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample at column `i` (x direction), row `j` (y direction).
    #[inline]
    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.side() + i]
    }

    /// Max minus min over the samples of a block, where the sample grid is
    /// partitioned into `cells x cells` blocks; shared edge samples belong
    /// to both neighbors, matching ranges over closed cells.
    pub(crate) fn range_over_block(&self, cells: usize, bi: usize, bj: usize) -> f64 {
        let side = self.side();
        let q = (side - 1) / cells;
        debug_assert!(q * cells == side - 1);
        debug_assert!(bi < cells && bj < cells);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in bj * q..=(bj + 1) * q {
            let row = &self.values[j * side..(j + 1) * side];
            for &v in &row[bi * q..=(bi + 1) * q] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        hi - lo
    }
}

/// Samples `f` on its rectangle with `n` cells per side and `r` sub-samples
/// per cell edge. The returned grid has `(n*r + 1)^2` values and includes
/// both boundary edges; the final sample of each axis sits exactly on the
/// rectangle edge.
///
/// # Errors
///
/// Returns [`Error::InvalidSpec`] when `n < 1` or `r < 1`.
pub fn sample_surface(f: &Surface, n: usize, r: usize) -> Result<SampledSurface> {
    if n < 1 || r < 1 {
        return Err(Error::InvalidSpec(
            "sampling needs n >= 1 cells and oversample r >= 1".into(),
        ));
    }
    let side = n * r + 1;
    let rect = *f.rect();
    let hx = rect.width() / (side - 1) as f64;
    let hy = rect.height() / (side - 1) as f64;
    let coord = |k: usize, lo: f64, hi: f64, h: f64| {
        if k == side - 1 {
            hi
        } else {
            lo + k as f64 * h
        }
    };
    let mut values = vec![0.0; side * side];
    values
        .par_chunks_mut(side)
        .enumerate()
        .for_each(|(j, row)| {
            let y = coord(j, rect.y0(), rect.y1(), hy);
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = f.eval(coord(i, rect.x0(), rect.x1(), hx), y);
            }
        });
    SampledSurface::from_values(f.label(), rect, n, r, values)
}

/// Max minus min of the `(r+1) x (r+1)` samples covering cell `(i, j)` of
/// the `n x n` cell grid. Shared boundary samples count toward both
/// adjacent cells.
///
/// # Errors
///
/// Returns [`Error::Domain`] when the cell index is out of range.
pub fn range_over_cell(s: &SampledSurface, i: usize, j: usize) -> Result<f64> {
    if i >= s.n() || j >= s.n() {
        return Err(Error::Domain(format!(
            "cell ({i}, {j}) outside the {} x {} cell grid",
            s.n(),
            s.n()
        )));
    }
    Ok(s.range_over_block(s.n(), i, j))
}
