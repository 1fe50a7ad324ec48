//! Python bindings for the fracdim library: surface construction, mixed
//! Katugampola/Hadamard fractional integrals, the independent singular
//! oracle, and box-counting dimension estimates.
//!
//! Build as a cdylib and import as `fracdim_py` (see python/smoke_test.py
//! for a loader that copies the built library next to itself).

use std::cell::RefCell;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use fracdim::boxdim::{box_count_curve, estimate_dimension};
use fracdim::frac_integral::{
    hadamard_point, hadamard_point_1d_with_nodes, integrate_grid, katugampola_point,
    FractionalOrder, KatugampolaParams, OperatorKind, OperatorSpec, DEFAULT_RULE_N,
};
use fracdim::oracle::direct_singular;
use fracdim::surfaces::{make_surface, sample_surface, GridData, Rect, SurfaceSpec};

fn err(e: fracdim::Error) -> PyErr {
    match e {
        fracdim::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rect_from(rect: Option<(f64, f64, f64, f64)>) -> PyResult<Rect> {
    match rect {
        Some((x0, x1, y0, y1)) => Rect::new(x0, x1, y0, y1).map_err(err),
        None => Ok(Rect::UNIT),
    }
}

/// A bivariate continuous surface on a rectangle (catalog member or
/// bilinear interpolation of grid samples).
#[pyclass(frozen, module = "fracdim_py")]
struct Surface {
    inner: fracdim::surfaces::Surface,
}

#[pymethods]
impl Surface {
    /// f = c.
    #[staticmethod]
    #[pyo3(signature = (c, rect=None))]
    fn constant(c: f64, rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Self::build(SurfaceSpec::Constant(c), rect)
    }

    /// f = p*x + q*y + r0.
    #[staticmethod]
    #[pyo3(signature = (p, q, r0, rect=None))]
    fn bilinear(p: f64, q: f64, r0: f64, rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Self::build(SurfaceSpec::Bilinear { p, q, r0 }, rect)
    }

    /// f = sin(k1 pi x) sin(k2 pi y) + 1.
    #[staticmethod]
    #[pyo3(signature = (k1, k2, rect=None))]
    fn sine_product(k1: u32, k2: u32, rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Self::build(SurfaceSpec::SineProduct { k1, k2 }, rect)
    }

    /// Truncated lacunary sine series with Hurst exponent `hurst`.
    #[staticmethod]
    #[pyo3(signature = (lambda_, hurst, terms, rect=None))]
    fn weierstrass(
        lambda_: f64,
        hurst: f64,
        terms: u32,
        rect: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Surface> {
        Self::build(
            SurfaceSpec::Weierstrass2D {
                lambda: lambda_,
                hurst,
                terms,
            },
            rect,
        )
    }

    /// Truncated tent-map series with weight `w`.
    #[staticmethod]
    #[pyo3(signature = (w, terms, rect=None))]
    fn takagi(w: f64, terms: u32, rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Self::build(SurfaceSpec::Takagi2D { w, terms }, rect)
    }

    /// f = g(x) g(y) with g(u) = u sin(1/u) shifted to be non-negative.
    #[staticmethod]
    #[pyo3(signature = (rect=None))]
    fn oscillatory(rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Self::build(SurfaceSpec::OscillatorySineInv, rect)
    }

    /// Bilinear interpolation of `x_count * y_count` row-major samples.
    #[staticmethod]
    #[pyo3(signature = (x_count, y_count, values, rect=None))]
    fn from_grid(
        x_count: usize,
        y_count: usize,
        values: Vec<f64>,
        rect: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Surface> {
        let grid = GridData::new(x_count, y_count, values).map_err(err)?;
        Self::build(SurfaceSpec::InterpolatedGrid(grid), rect)
    }

    /// Surface value at (x, y).
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(x, y)
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn rect(&self) -> (f64, f64, f64, f64) {
        let r = self.inner.rect();
        (r.x0(), r.x1(), r.y0(), r.y1())
    }

    fn __repr__(&self) -> String {
        format!("Surface({})", self.inner.label())
    }
}

impl Surface {
    fn build(spec: SurfaceSpec, rect: Option<(f64, f64, f64, f64)>) -> PyResult<Surface> {
        Ok(Surface {
            inner: make_surface(spec, rect_from(rect)?).map_err(err)?,
        })
    }
}

/// Log-log regression result of a box-count curve.
#[pyclass(frozen, module = "fracdim_py")]
struct DimensionEstimate {
    #[pyo3(get)]
    slope: f64,
    #[pyo3(get)]
    intercept: f64,
    #[pyo3(get)]
    r_squared: f64,
    #[pyo3(get)]
    k_min: u32,
    #[pyo3(get)]
    k_max: u32,
    #[pyo3(get)]
    reliable: bool,
}

#[pymethods]
impl DimensionEstimate {
    fn __repr__(&self) -> String {
        format!(
            "DimensionEstimate(slope={:.6}, r_squared={:.6}, k={}..{}, reliable={})",
            self.slope, self.r_squared, self.k_min, self.k_max, self.reliable
        )
    }
}

/// Gamma function for positive arguments up to 171.
#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    fracdim::special::gamma(x).map_err(err)
}

fn kat_spec(
    alpha: (f64, f64),
    rho: (f64, f64),
    lower: (f64, f64),
    nodes: Option<usize>,
) -> PyResult<OperatorSpec> {
    let order = FractionalOrder::new(alpha.0, alpha.1).map_err(err)?;
    let params = KatugampolaParams::new(rho.0, rho.1, lower.0, lower.1).map_err(err)?;
    OperatorSpec::new(
        OperatorKind::Katugampola,
        order,
        params,
        nodes.unwrap_or(DEFAULT_RULE_N),
    )
    .map_err(err)
}

fn had_spec(order: (f64, f64), lower: (f64, f64), nodes: Option<usize>) -> PyResult<OperatorSpec> {
    OperatorSpec::hadamard(
        FractionalOrder::new(order.0, order.1).map_err(err)?,
        lower.0,
        lower.1,
    )
    .and_then(|s| s.with_nodes(nodes.unwrap_or(DEFAULT_RULE_N)))
    .map_err(err)
}

/// Mixed Katugampola integral of `surface` at (x, y).
#[pyfunction]
#[pyo3(signature = (surface, x, y, alpha=(0.5, 0.5), rho=(0.0, 0.0), lower=(0.0, 0.0), nodes=None))]
fn katugampola(
    py: Python<'_>,
    surface: &Surface,
    x: f64,
    y: f64,
    alpha: (f64, f64),
    rho: (f64, f64),
    lower: (f64, f64),
    nodes: Option<usize>,
) -> PyResult<f64> {
    let spec = kat_spec(alpha, rho, lower, nodes)?;
    py.detach(|| katugampola_point(&surface.inner, &spec, x, y))
        .map_err(err)
}

/// Mixed Hadamard integral of `surface` at (x, y); `lower` must be
/// strictly positive.
#[pyfunction]
#[pyo3(signature = (surface, x, y, order=(0.5, 0.5), lower=(0.1, 0.1), nodes=None))]
fn hadamard(
    py: Python<'_>,
    surface: &Surface,
    x: f64,
    y: f64,
    order: (f64, f64),
    lower: (f64, f64),
    nodes: Option<usize>,
) -> PyResult<f64> {
    let spec = had_spec(order, lower, nodes)?;
    py.detach(|| hadamard_point(&surface.inner, &spec, x, y))
        .map_err(err)
}

/// One-axis Hadamard integral of a Python callable `h` on [a, x].
#[pyfunction]
#[pyo3(signature = (h, order, a, x, nodes=None))]
fn hadamard_1d(
    h: Bound<'_, PyAny>,
    order: f64,
    a: f64,
    x: f64,
    nodes: Option<usize>,
) -> PyResult<f64> {
    let failure: RefCell<Option<PyErr>> = RefCell::new(None);
    let value = hadamard_point_1d_with_nodes(
        |u| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match h.call1((u,)).and_then(|v| v.extract::<f64>()) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        order,
        a,
        x,
        nodes.unwrap_or(DEFAULT_RULE_N),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value.map_err(err)
}

/// Direct singular-kernel oracle value; returns
/// (value, error_estimate, converged).
#[pyfunction]
#[pyo3(signature = (surface, x, y, alpha=(0.5, 0.5), rho=(0.0, 0.0), lower=(0.0, 0.0), tol=1e-9, hadamard=false))]
#[allow(clippy::too_many_arguments)]
fn oracle_value(
    py: Python<'_>,
    surface: &Surface,
    x: f64,
    y: f64,
    alpha: (f64, f64),
    rho: (f64, f64),
    lower: (f64, f64),
    tol: f64,
    hadamard: bool,
) -> PyResult<(f64, f64, bool)> {
    let spec = if hadamard {
        had_spec(alpha, lower, None)?
    } else {
        kat_spec(alpha, rho, lower, None)?
    };
    let result = py
        .detach(|| direct_singular(&surface.inner, &spec, x, y, tol))
        .map_err(err)?;
    Ok((result.value, result.error_estimate, result.converged))
}

/// Box-counting dimension estimate of the surface graph.
#[pyfunction]
#[pyo3(signature = (surface, n=512, oversample=2, k_min=3, k_max=7))]
fn box_dimension(
    py: Python<'_>,
    surface: &Surface,
    n: usize,
    oversample: usize,
    k_min: u32,
    k_max: u32,
) -> PyResult<DimensionEstimate> {
    let est = py
        .detach(|| {
            let sampled = sample_surface(&surface.inner, n, oversample)?;
            estimate_dimension(&box_count_curve(&sampled, k_min, k_max)?)
        })
        .map_err(err)?;
    Ok(DimensionEstimate {
        slope: est.slope,
        intercept: est.intercept,
        r_squared: est.r_squared,
        k_min: est.k_min,
        k_max: est.k_max,
        reliable: est.reliable(),
    })
}

/// Fractional integral sampled on an (grid_n+1)^2 lattice over the
/// surface rectangle; returns rows as lists, row index along y.
#[pyfunction]
#[pyo3(signature = (surface, grid_n, alpha=(0.5, 0.5), rho=(0.0, 0.0), nodes=None, hadamard=false))]
fn integral_grid(
    py: Python<'_>,
    surface: &Surface,
    grid_n: usize,
    alpha: (f64, f64),
    rho: (f64, f64),
    nodes: Option<usize>,
    hadamard: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let rect = surface.inner.rect();
    let lower = (rect.x0(), rect.y0());
    let spec = if hadamard {
        had_spec(alpha, lower, nodes)?
    } else {
        kat_spec(alpha, rho, lower, nodes)?
    };
    let sampled = py
        .detach(|| integrate_grid(&surface.inner, &spec, grid_n))
        .map_err(err)?;
    let side = sampled.side();
    Ok(sampled
        .values()
        .chunks(side)
        .map(|row| row.to_vec())
        .collect())
}

#[pymodule]
fn fracdim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Surface>()?;
    m.add_class::<DimensionEstimate>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(katugampola, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard_1d, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_value, m)?)?;
    m.add_function(wrap_pyfunction!(box_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(integral_grid, m)?)?;
    Ok(())
}
