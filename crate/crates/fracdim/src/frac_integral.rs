//! Mixed Katugampola and mixed Hadamard fractional integrals of bivariate
//! functions, evaluated by desingularized tensor-product quadrature.
//!
//! # Katugampola operator
//!
//! For orders `alpha = (alpha1, alpha2)` in `(0, 1]`, exponents
//! `rho = (rho1, rho2)` with `rho_i > -1`, and lower limits `(a, c)`:
//!
//! ```text
//! (I f)(x, y) = (rho1+1)^(1-alpha1) (rho2+1)^(1-alpha2)
//!               / (Gamma(alpha1) Gamma(alpha2))
//!               * int_a^x int_c^y (x^(rho1+1) - s^(rho1+1))^(alpha1-1)
//!                                 (y^(rho2+1) - t^(rho2+1))^(alpha2-1)
//!                                 s^rho1 t^rho2 f(s, t) ds dt
//! ```
//!
//! Substituting `u = (s^(rho1+1) - a^(rho1+1)) / (x^(rho1+1) - a^(rho1+1))`
//! per axis absorbs the kernel and the `s^rho1` factor exactly and leaves
//!
//! ```text
//! (I f)(x, y) = (X/p1)^alpha1 (Y/p2)^alpha2 / (Gamma(alpha1) Gamma(alpha2))
//!               * int_0^1 int_0^1 (1-u)^(alpha1-1) (1-v)^(alpha2-1)
//!                                 f(s(u), t(v)) du dv
//! ```
//!
//! with `p_i = rho_i + 1`, `X = x^p1 - a^p1`, `Y = y^p2 - c^p2`, and node
//! maps `s(u) = (a^p1 + u X)^(1/p1)`, `t(v) = (c^p2 + v Y)^(1/p2)`. The
//! remaining weight `(1-u)^(alpha-1)` is handled by
//! [`special::jacobi_rule`](crate::special::jacobi_rule). For `a = 0` the
//! node map reduces to `s(u) = x * u^(1/p1)`.
//!
//! # Hadamard operator
//!
//! For orders `gamma = (gamma1, gamma2)` in `(0, 1]` and lower limits
//! `a > 0`, `c > 0`:
//!
//! ```text
//! (I f)(x, y) = 1 / (Gamma(gamma1) Gamma(gamma2))
//!               * int_a^x int_c^y (log(x/u))^(gamma1-1) (log(y/v))^(gamma2-1)
//!                                 f(u, v) / (u v) du dv
//! ```
//!
//! The substitution `u = log(s/a) / log(x/a)` per axis gives node maps
//! `s(u) = a (x/a)^u` and prefactor `log(x/a)^gamma1 log(y/c)^gamma2`.
//! This operator is the `rho -> -1` limit of the Katugampola operator but
//! is evaluated by its own code path; [`rho_limit_gap`] measures the
//! distance between the two numerically.

use rayon::prelude::*;

use crate::special::{gamma, jacobi_rule, QuadratureRule};
use crate::surfaces::{SampledSurface, Surface};
use crate::{Error, Result};

/// Default per-axis node count of the tensor-product quadrature.
///
/// Sized for the hardest corner of the parameter domain rather than the
/// typical case: with `rho > 0` the node map `s(u) = x u^(1/(rho+1))`
/// feeds fractional powers of `u` into the integrand, so the transformed
/// rule converges algebraically (~n^-3 for `rho = 1`) instead of
/// spectrally. 192 nodes keep the relative error below 1e-6 down to
/// order 0.3 with several-fold margin; smooth-map regimes (`rho = 0`,
/// `rho < 0`, Hadamard) are spectrally converged far earlier, and heavy
/// grid evaluations there may safely pass a smaller count via
/// [`OperatorSpec::with_nodes`].
pub const DEFAULT_RULE_N: usize = 192;

/// Pair of fractional orders, one per axis, each in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    alpha1: f64,
    alpha2: f64,
}

impl FractionalOrder {
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] unless both orders lie in `(0, 1]`.
    pub fn new(alpha1: f64, alpha2: f64) -> Result<FractionalOrder> {
        for alpha in [alpha1, alpha2] {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "fractional order must lie in (0, 1], got {alpha}"
                )));
            }
        }
        Ok(FractionalOrder { alpha1, alpha2 })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
}

/// Exponents and lower limits of the Katugampola operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatugampolaParams {
    rho1: f64,
    rho2: f64,
    a: f64,
    c: f64,
}

impl KatugampolaParams {
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] unless `rho1, rho2 > -1` and the
    /// lower limits are non-negative, all finite.
    pub fn new(rho1: f64, rho2: f64, a: f64, c: f64) -> Result<KatugampolaParams> {
        for rho in [rho1, rho2] {
            if !(rho.is_finite() && rho > -1.0) {
                return Err(Error::InvalidSpec(format!(
                    "exponent rho must satisfy rho > -1, got {rho}"
                )));
            }
        }
        for lo in [a, c] {
            if !(lo.is_finite() && lo >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "lower limit must be non-negative, got {lo}"
                )));
            }
        }
        Ok(KatugampolaParams { rho1, rho2, a, c })
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }
    pub fn rho2(&self) -> f64 {
        self.rho2
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Operator family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Katugampola,
    Hadamard,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Katugampola => "katugampola",
            OperatorKind::Hadamard => "hadamard",
        }
    }
}

/// Fully specified operator: family, orders, exponents/lower limits, and
/// the per-axis quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    kind: OperatorKind,
    order: FractionalOrder,
    params: KatugampolaParams,
    rule_n: usize,
}

impl OperatorSpec {
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] when `rule_n < 1`, or for a Hadamard
    /// operator whose lower limits are not strictly positive (its kernel
    /// needs `log(x/a)` finite). The `rho` fields of `params` are ignored
    /// by the Hadamard operator.
    pub fn new(
        kind: OperatorKind,
        order: FractionalOrder,
        params: KatugampolaParams,
        rule_n: usize,
    ) -> Result<OperatorSpec> {
        if rule_n < 1 {
            return Err(Error::InvalidSpec(
                "operator needs at least one quadrature node per axis".into(),
            ));
        }
        if kind == OperatorKind::Hadamard && !(params.a > 0.0 && params.c > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "hadamard operator needs strictly positive lower limits, got a = {}, c = {}",
                params.a, params.c
            )));
        }
        Ok(OperatorSpec {
            kind,
            order,
            params,
            rule_n,
        })
    }

    /// Katugampola operator with the default quadrature resolution.
    pub fn katugampola(order: FractionalOrder, params: KatugampolaParams) -> Result<OperatorSpec> {
        OperatorSpec::new(OperatorKind::Katugampola, order, params, DEFAULT_RULE_N)
    }

    /// Hadamard operator with the default quadrature resolution.
    pub fn hadamard(order: FractionalOrder, a: f64, c: f64) -> Result<OperatorSpec> {
        let params = KatugampolaParams::new(0.0, 0.0, a, c)?;
        OperatorSpec::new(OperatorKind::Hadamard, order, params, DEFAULT_RULE_N)
    }

    /// Same operator with a different per-axis node count.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidSpec`] when `rule_n < 1`.
    pub fn with_nodes(mut self, rule_n: usize) -> Result<OperatorSpec> {
        if rule_n < 1 {
            return Err(Error::InvalidSpec(
                "operator needs at least one quadrature node per axis".into(),
            ));
        }
        self.rule_n = rule_n;
        Ok(self)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
    pub fn order(&self) -> FractionalOrder {
        self.order
    }
    pub fn params(&self) -> KatugampolaParams {
        self.params
    }
    pub fn rule_n(&self) -> usize {
        self.rule_n
    }
}

/// One axis of the transformed integral: total mass factor and node map.
struct Axis {
    /// `(X/p)^alpha` for Katugampola, `L^gamma` for Hadamard; the value is
    /// zero exactly when the evaluation point sits on the lower limit.
    amplitude: f64,
    /// Maps a quadrature node `u` in `(0, 1)` to the original variable.
    map: AxisMap,
}

enum AxisMap {
    /// Katugampola with `a = 0`: `s(u) = x * u^(1/p)`.
    PowerZero { x: f64, inv_p: f64 },
    /// Katugampola with `a > 0`: `s(u) = exp(ln a + ln1p(u * E) / p)` where
    /// `E = expm1(p * ln(x/a))`; stable for `p` arbitrarily close to 0.
    Power { ln_a: f64, e: f64, inv_p: f64 },
    /// Hadamard: `s(u) = exp(ln a + u * L)`, `L = ln(x/a)`.
    Log { ln_a: f64, l: f64 },
}

impl Axis {
    fn katugampola(a: f64, x: f64, rho: f64, alpha: f64) -> Axis {
        let p = rho + 1.0;
        if x <= a {
            return Axis {
                amplitude: 0.0,
                map: AxisMap::PowerZero { x, inv_p: 1.0 / p },
            };
        }
        if a == 0.0 {
            // X/p = x^p / p.
            let mass = x.powf(p) / p;
            Axis {
                amplitude: mass.powf(alpha),
                map: AxisMap::PowerZero { x, inv_p: 1.0 / p },
            }
        } else {
            let l = (x / a).ln();
            let e = (p * l).exp_m1();
            // X/p = a^p * expm1(p ln(x/a)) / p, stable as p -> 0.
            let mass = a.powf(p) * e / p;
            Axis {
                amplitude: mass.powf(alpha),
                map: AxisMap::Power {
                    ln_a: a.ln(),
                    e,
                    inv_p: 1.0 / p,
                },
            }
        }
    }

    fn hadamard(a: f64, x: f64, gamma: f64) -> Axis {
        let l = if x <= a { 0.0 } else { (x / a).ln() };
        Axis {
            amplitude: if l == 0.0 { 0.0 } else { l.powf(gamma) },
            map: AxisMap::Log { ln_a: a.ln(), l },
        }
    }

    #[inline]
    fn node(&self, u: f64) -> f64 {
        match self.map {
            AxisMap::PowerZero { x, inv_p } => x * u.powf(inv_p),
            AxisMap::Power { ln_a, e, inv_p } => (ln_a + (u * e).ln_1p() * inv_p).exp(),
            AxisMap::Log { ln_a, l } => (ln_a + u * l).exp(),
        }
    }

    fn mapped_nodes(&self, rule: &QuadratureRule) -> Vec<f64> {
        rule.nodes().iter().map(|&u| self.node(u)).collect()
    }
}

fn axes_for(spec: &OperatorSpec, x: f64, y: f64) -> (Axis, Axis) {
    let order = spec.order;
    let params = spec.params;
    match spec.kind {
        OperatorKind::Katugampola => (
            Axis::katugampola(params.a, x, params.rho1, order.alpha1),
            Axis::katugampola(params.c, y, params.rho2, order.alpha2),
        ),
        OperatorKind::Hadamard => (
            Axis::hadamard(params.a, x, order.alpha1),
            Axis::hadamard(params.c, y, order.alpha2),
        ),
    }
}

fn expect_kind(spec: &OperatorSpec, kind: OperatorKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidSpec(format!(
            "operator specification is {}, expected {}",
            spec.kind.name(),
            kind.name()
        )));
    }
    Ok(())
}

fn check_point_above_limits(spec: &OperatorSpec, x: f64, y: f64) -> Result<()> {
    if !(x.is_finite() && y.is_finite() && x >= spec.params.a && y >= spec.params.c) {
        return Err(Error::Domain(format!(
            "evaluation point ({x}, {y}) lies below the lower limits ({}, {})",
            spec.params.a, spec.params.c
        )));
    }
    Ok(())
}

pub(crate) fn check_point_in_rect(f: &Surface, spec: &OperatorSpec, x: f64, y: f64) -> Result<()> {
    let rect = f.rect();
    if spec.params.a < rect.x0() || spec.params.c < rect.y0() {
        return Err(Error::Domain(format!(
            "lower limits ({}, {}) fall outside the surface domain",
            spec.params.a, spec.params.c
        )));
    }
    if !rect.contains(x, y) {
        return Err(Error::Domain(format!(
            "evaluation point ({x}, {y}) lies outside the surface domain"
        )));
    }
    Ok(())
}

/// Shared tensor-product accumulation: `sum_ij w_i w_j f(s_i, t_j)`.
fn tensor_sum(
    f: &(impl Fn(f64, f64) -> f64 + ?Sized),
    rule1: &QuadratureRule,
    rule2: &QuadratureRule,
    s_nodes: &[f64],
    t_nodes: &[f64],
) -> f64 {
    let w1 = rule1.weights();
    let w2 = rule2.weights();
    let mut total = 0.0;
    for (j, &t) in t_nodes.iter().enumerate() {
        let mut inner = 0.0;
        for (i, &s) in s_nodes.iter().enumerate() {
            inner += w1[i] * f(s, t);
        }
        total += w2[j] * inner;
    }
    total
}

fn point_value(
    f: &(impl Fn(f64, f64) -> f64 + ?Sized),
    spec: &OperatorSpec,
    x: f64,
    y: f64,
    rules: &(QuadratureRule, QuadratureRule),
) -> Result<f64> {
    let (ax, ay) = axes_for(spec, x, y);
    if ax.amplitude == 0.0 || ay.amplitude == 0.0 {
        return Ok(0.0);
    }
    let g1 = gamma(spec.order.alpha1)?;
    let g2 = gamma(spec.order.alpha2)?;
    let prefactor = ax.amplitude * ay.amplitude / (g1 * g2);
    let s_nodes = ax.mapped_nodes(&rules.0);
    let t_nodes = ay.mapped_nodes(&rules.1);
    Ok(prefactor * tensor_sum(f, &rules.0, &rules.1, &s_nodes, &t_nodes))
}

fn build_rules(spec: &OperatorSpec) -> Result<(QuadratureRule, QuadratureRule)> {
    Ok((
        jacobi_rule(spec.order.alpha1, spec.rule_n)?,
        jacobi_rule(spec.order.alpha2, spec.rule_n)?,
    ))
}

/// Mixed Katugampola integral of a surface at `(x, y)`.
///
/// Exactly `0` when `x` or `y` sits on the lower limit. For `f = 1`,
/// `alpha = (1/2, 1/2)`, `rho = (0, 0)`, `a = c = 0` the value at `(1, 1)`
/// is `4/pi`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when `spec` is not a Katugampola operator;
/// [`Error::Domain`] when `(x, y)` or the lower limits leave the surface
/// rectangle.
pub fn katugampola_point(f: &Surface, spec: &OperatorSpec, x: f64, y: f64) -> Result<f64> {
    check_point_in_rect(f, spec, x, y)?;
    katugampola_fn(|s, t| f.eval(s, t), spec, x, y)
}

/// [`katugampola_point`] for a plain function; the caller guarantees that
/// `g` is defined on `[a, x] x [c, y]`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when `spec` is not a Katugampola operator;
/// [`Error::Domain`] when `x < a` or `y < c`.
pub fn katugampola_fn(
    g: impl Fn(f64, f64) -> f64,
    spec: &OperatorSpec,
    x: f64,
    y: f64,
) -> Result<f64> {
    expect_kind(spec, OperatorKind::Katugampola)?;
    check_point_above_limits(spec, x, y)?;
    point_value(&g, spec, x, y, &build_rules(spec)?)
}

/// Mixed Hadamard integral of a surface at `(x, y)`.
///
/// Exactly `0` when `x` or `y` sits on the lower limit. For `f = 1`,
/// `gamma = (1, 1)`, `a = c = 0.1` the value at `(1, 1)` is `log(10)^2`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when `spec` is not a Hadamard operator;
/// [`Error::Domain`] when `(x, y)` or the lower limits leave the surface
/// rectangle.
pub fn hadamard_point(f: &Surface, spec: &OperatorSpec, x: f64, y: f64) -> Result<f64> {
    check_point_in_rect(f, spec, x, y)?;
    hadamard_fn(|s, t| f.eval(s, t), spec, x, y)
}

/// [`hadamard_point`] for a plain function; the caller guarantees that `g`
/// is defined on `[a, x] x [c, y]`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when `spec` is not a Hadamard operator;
/// [`Error::Domain`] when `x < a` or `y < c`.
pub fn hadamard_fn(
    g: impl Fn(f64, f64) -> f64,
    spec: &OperatorSpec,
    x: f64,
    y: f64,
) -> Result<f64> {
    expect_kind(spec, OperatorKind::Hadamard)?;
    check_point_above_limits(spec, x, y)?;
    point_value(&g, spec, x, y, &build_rules(spec)?)
}

/// Univariate Hadamard integral
/// `1/Gamma(gamma1) * int_a^x (log(x/u))^(gamma1 - 1) h(u)/u du`
/// with the default quadrature resolution. For `h = 1` the value is
/// `log(x/a)^gamma1 / Gamma(gamma1 + 1)`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] unless `gamma1` lies in `(0, 1]` and `a > 0`;
/// [`Error::Domain`] when `x < a`.
pub fn hadamard_point_1d(h: impl Fn(f64) -> f64, gamma1: f64, a: f64, x: f64) -> Result<f64> {
    hadamard_point_1d_with_nodes(h, gamma1, a, x, DEFAULT_RULE_N)
}

/// [`hadamard_point_1d`] with an explicit node count.
///
/// # Errors
///
/// Same conditions as [`hadamard_point_1d`], plus `rule_n >= 1`.
pub fn hadamard_point_1d_with_nodes(
    h: impl Fn(f64) -> f64,
    gamma1: f64,
    a: f64,
    x: f64,
    rule_n: usize,
) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "hadamard operator needs a strictly positive lower limit, got {a}"
        )));
    }
    if !(x.is_finite() && x >= a) {
        return Err(Error::Domain(format!(
            "evaluation point {x} lies below the lower limit {a}"
        )));
    }
    let axis = Axis::hadamard(a, x, gamma1);
    if axis.amplitude == 0.0 {
        return Ok(0.0);
    }
    let rule = jacobi_rule(gamma1, rule_n)?;
    let sum: f64 = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&u, &w)| w * h(axis.node(u)))
        .sum();
    Ok(axis.amplitude / gamma(gamma1)? * sum)
}

/// Uniform-grid evaluation of the operator over the surface rectangle:
/// `(grid_n + 1)^2` samples of `(I f)(x, y)`, row-major, as a
/// [`SampledSurface`] with `n = grid_n` and `oversample = 1`. Row and
/// column 0 (points on the lower edges) are exactly `0`.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when the operator lower limits do not coincide
/// with the lower-left corner of the surface rectangle (the grid would
/// leave the operator domain), or when `grid_n < 1`.
pub fn integrate_grid(f: &Surface, spec: &OperatorSpec, grid_n: usize) -> Result<SampledSurface> {
    if grid_n < 2 {
        return Err(Error::InvalidSpec("grid needs at least two cells per axis".into()));
    }
    let rect = *f.rect();
    if spec.params.a != rect.x0() || spec.params.c != rect.y0() {
        return Err(Error::InvalidSpec(format!(
            "grid integration needs lower limits at the rectangle corner ({}, {}), got ({}, {})",
            rect.x0(),
            rect.y0(),
            spec.params.a,
            spec.params.c
        )));
    }
    let rules = build_rules(spec)?;
    let g1 = gamma(spec.order.alpha1)?;
    let g2 = gamma(spec.order.alpha2)?;
    let inv_gamma = 1.0 / (g1 * g2);
    let side = grid_n + 1;
    let hx = rect.width() / grid_n as f64;
    let hy = rect.height() / grid_n as f64;
    let coord = |k: usize, lo: f64, hi: f64, h: f64| if k == side - 1 { hi } else { lo + k as f64 * h };

    // Per-coordinate amplitude and mapped quadrature nodes, built once.
    let x_axes: Vec<(f64, Vec<f64>)> = (0..side)
        .map(|i| {
            let x = coord(i, rect.x0(), rect.x1(), hx);
            let (ax, _) = axes_for(spec, x, rect.y1());
            (ax.amplitude, ax.mapped_nodes(&rules.0))
        })
        .collect();
    let y_axes: Vec<(f64, Vec<f64>)> = (0..side)
        .map(|j| {
            let y = coord(j, rect.y0(), rect.y1(), hy);
            let (_, ay) = axes_for(spec, rect.x1(), y);
            (ay.amplitude, ay.mapped_nodes(&rules.1))
        })
        .collect();

    let mut values = vec![0.0; side * side];
    values
        .par_chunks_mut(side)
        .enumerate()
        .for_each(|(j, row)| {
            let (ay, t_nodes) = &y_axes[j];
            if *ay == 0.0 {
                return;
            }
            for (i, slot) in row.iter_mut().enumerate() {
                let (ax, s_nodes) = &x_axes[i];
                if *ax == 0.0 {
                    continue;
                }
                let sum = tensor_sum(
                    &|s, t| f.eval(s, t),
                    &rules.0,
                    &rules.1,
                    s_nodes,
                    t_nodes,
                );
                *slot = ax * ay * inv_gamma * sum;
            }
        });
    SampledSurface::from_values(format!("I_{}", f.label()), rect, grid_n, 1, values)
}

/// Distance between the Katugampola operator at `rho = (r, r)` and the
/// Hadamard operator with the same orders and lower limits, evaluated at
/// one point for each `r` in `rho_seq`: `|katugampola - hadamard|`.
///
/// As `r` decreases toward `-1` the gap shrinks toward 0, the Hadamard
/// operator being the `rho -> -1` limit.
///
/// # Errors
///
/// [`Error::InvalidSpec`] unless every `r > -1` and `a, c > 0` (the
/// Hadamard side needs positive lower limits); [`Error::Domain`] when the
/// point or limits leave the surface rectangle.
pub fn rho_limit_gap(
    f: &Surface,
    order: FractionalOrder,
    rho_seq: &[f64],
    a: f64,
    c: f64,
    x: f64,
    y: f64,
) -> Result<Vec<f64>> {
    let had_spec = OperatorSpec::hadamard(order, a, c)?;
    let had = hadamard_point(f, &had_spec, x, y)?;
    let mut gaps = Vec::with_capacity(rho_seq.len());
    for &rho in rho_seq {
        let spec = OperatorSpec::katugampola(order, KatugampolaParams::new(rho, rho, a, c)?)?;
        let kat = katugampola_point(f, &spec, x, y)?;
        gaps.push((kat - had).abs());
    }
    Ok(gaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{make_surface, Rect, Surface, SurfaceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_one(rect: Rect) -> Surface {
        make_surface(SurfaceSpec::Constant(1.0), rect).unwrap()
    }

    /// Closed form of the Katugampola integral of f = 1 per axis:
    /// ((x^p - a^p)/p)^alpha / Gamma(alpha + 1).
    fn kat_axis_closed(alpha: f64, rho: f64, a: f64, x: f64) -> f64 {
        let p = rho + 1.0;
        let mass = (x.powf(p) - a.powf(p)) / p;
        mass.powf(alpha) / gamma(alpha + 1.0).unwrap()
    }

    /// Closed form of the Hadamard integral of f = 1 per axis:
    /// log(x/a)^gamma / Gamma(gamma + 1).
    fn had_axis_closed(gamma1: f64, a: f64, x: f64) -> f64 {
        (x / a).ln().powf(gamma1) / gamma(gamma1 + 1.0).unwrap()
    }

    #[test]
    fn katugampola_reduces_to_iterated_integral_at_order_one() {
        // alpha = (1,1), rho = (0,0): plain double integral of 1 = x * y.
        let f = constant_one(Rect::UNIT);
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(1.0, 1.0).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        for (x, y) in [(1.0, 1.0), (0.5, 0.25), (0.9, 0.1)] {
            let v = katugampola_point(&f, &spec, x, y).unwrap();
            assert!((v - x * y).abs() < 1e-12, "({x}, {y}): {v}");
        }
    }

    #[test]
    fn katugampola_half_order_value_is_four_over_pi() {
        let f = constant_one(Rect::UNIT);
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let v = katugampola_point(&f, &spec, 1.0, 1.0).unwrap();
        assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn katugampola_matches_closed_form_across_parameters() {
        for &(alpha1, alpha2) in &[(0.3, 0.8), (0.5, 0.5), (1.0, 0.4)] {
            for &(rho1, rho2) in &[(-0.5, 0.0), (0.0, 1.0), (2.0, -0.9)] {
                for &(a, c) in &[(0.0, 0.0), (0.2, 0.1)] {
                    let rect = Rect::UNIT;
                    let f = constant_one(rect);
                    let spec = OperatorSpec::katugampola(
                        FractionalOrder::new(alpha1, alpha2).unwrap(),
                        KatugampolaParams::new(rho1, rho2, a, c).unwrap(),
                    )
                    .unwrap();
                    let (x, y) = (0.9, 0.7);
                    let v = katugampola_point(&f, &spec, x, y).unwrap();
                    let reference = kat_axis_closed(alpha1, rho1, a, x)
                        * kat_axis_closed(alpha2, rho2, c, y);
                    assert!(
                        (v - reference).abs() <= 1e-10 * reference.max(1.0),
                        "alpha=({alpha1},{alpha2}) rho=({rho1},{rho2}) a={a} c={c}: \
                         {v} vs {reference}"
                    );
                }
            }
        }
    }

    #[test]
    fn hadamard_unit_order_value_is_log_squared() {
        let rect = Rect::new(0.1, 1.0, 0.1, 1.0).unwrap();
        let f = constant_one(rect);
        let spec =
            OperatorSpec::hadamard(FractionalOrder::new(1.0, 1.0).unwrap(), 0.1, 0.1).unwrap();
        let v = hadamard_point(&f, &spec, 1.0, 1.0).unwrap();
        let log10 = 10f64.ln();
        assert!((v - log10 * log10).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn hadamard_matches_closed_form_across_parameters() {
        let rect = Rect::new(0.05, 1.0, 0.05, 1.0).unwrap();
        let f = constant_one(rect);
        for &(g1, g2) in &[(0.3, 0.8), (0.5, 0.5), (1.0, 0.4)] {
            let spec = OperatorSpec::hadamard(FractionalOrder::new(g1, g2).unwrap(), 0.05, 0.1)
                .unwrap();
            let (x, y) = (0.8, 0.95);
            let v = hadamard_point(&f, &spec, x, y).unwrap();
            let reference = had_axis_closed(g1, 0.05, x) * had_axis_closed(g2, 0.1, y);
            assert!(
                (v - reference).abs() <= 1e-10 * reference.max(1.0),
                "gamma=({g1},{g2}): {v} vs {reference}"
            );
        }
    }

    #[test]
    fn hadamard_1d_known_values() {
        // gamma = 1: plain integral of h/u from a to x.
        let v = hadamard_point_1d(|_| 1.0, 1.0, 0.5, 1.0).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-13, "got {v}");
        // gamma = 1/2: log(2)^(1/2) / Gamma(3/2).
        let v = hadamard_point_1d(|_| 1.0, 0.5, 0.5, 1.0).unwrap();
        let reference = 2f64.ln().sqrt() / gamma(1.5).unwrap();
        assert!((v - reference).abs() < 1e-13, "got {v} vs {reference}");
        assert!((reference - 0.9394372787).abs() < 1e-9);
        // h = 0 annihilates.
        assert_eq!(hadamard_point_1d(|_| 0.0, 0.7, 0.5, 1.0).unwrap(), 0.0);
        // x = a annihilates exactly.
        assert_eq!(hadamard_point_1d(|u| u, 0.7, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn boundary_annihilation_is_exact() {
        let f = constant_one(Rect::UNIT);
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(katugampola_point(&f, &spec, 0.0, 0.7).unwrap(), 0.0);
        assert_eq!(katugampola_point(&f, &spec, 0.7, 0.0).unwrap(), 0.0);

        let rect = Rect::new(0.1, 1.0, 0.1, 1.0).unwrap();
        let g = constant_one(rect);
        let hspec =
            OperatorSpec::hadamard(FractionalOrder::new(0.5, 0.5).unwrap(), 0.1, 0.1).unwrap();
        assert_eq!(hadamard_point(&g, &hspec, 0.1, 0.5).unwrap(), 0.0);
        assert_eq!(hadamard_point(&g, &hspec, 0.5, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn node_map_power_form_matches_direct_formula() {
        // Moderate p: the log-stable map agrees with the naive
        // (a^p + u X)^(1/p).
        let (a, x, p) = (0.3, 0.9, 1.5);
        let axis = Axis::katugampola(a, x, p - 1.0, 0.5);
        for &u in &[0.01, 0.37, 0.5, 0.93, 0.999] {
            let direct = (a.powf(p) + u * (x.powf(p) - a.powf(p))).powf(1.0 / p);
            let stable = axis.node(u);
            assert!(
                (stable - direct).abs() <= 1e-13 * direct,
                "u = {u}: {stable} vs {direct}"
            );
        }
        // Tiny p: nodes stay inside (a, x) and increase with u.
        let axis = Axis::katugampola(0.1, 1.0, -0.999, 0.5);
        let mut prev = 0.1;
        for &u in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.999] {
            let s = axis.node(u);
            assert!(s > prev && s < 1.0, "u = {u}: {s}");
            prev = s;
        }
        // a = 0 reduces to x * u^(1/p).
        let axis = Axis::katugampola(0.0, 0.8, 1.0, 0.5);
        assert!((axis.node(0.25) - 0.8 * 0.25f64.powf(0.5)).abs() < 1e-15);
    }

    #[test]
    fn operator_is_linear() {
        let rect = Rect::UNIT;
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 3 }, rect).unwrap();
        let g = make_surface(SurfaceSpec::Takagi2D { w: 0.5, terms: 8 }, rect).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.6, 0.4).unwrap(),
            KatugampolaParams::new(0.5, -0.2, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: f64 = rng.random_range(0.05..1.0);
            let y: f64 = rng.random_range(0.05..1.0);
            let lam: f64 = rng.random_range(-3.0..3.0);
            let mu: f64 = rng.random_range(-3.0..3.0);
            let combo =
                katugampola_fn(|s, t| lam * f.eval(s, t) + mu * g.eval(s, t), &spec, x, y)
                    .unwrap();
            let parts = lam * katugampola_point(&f, &spec, x, y).unwrap()
                + mu * katugampola_point(&g, &spec, x, y).unwrap();
            assert!(
                (combo - parts).abs() <= 1e-10 * (1.0 + lam.abs() + mu.abs()),
                "x={x} y={y} lam={lam} mu={mu}: {combo} vs {parts}"
            );
        }
    }

    #[test]
    fn operator_preserves_positivity_and_order() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 3, k2: 2 }, Rect::UNIT).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.7).unwrap(),
            KatugampolaParams::new(0.0, 1.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x: f64 = rng.random_range(0.1..1.0);
            let y: f64 = rng.random_range(0.1..1.0);
            let low = katugampola_point(&f, &spec, x, y).unwrap();
            assert!(low >= 0.0);
            let high = katugampola_fn(|s, t| f.eval(s, t) + 0.5, &spec, x, y).unwrap();
            assert!(high >= low);
        }
    }

    #[test]
    fn separable_hadamard_factorizes() {
        // f(x, y) = h(x) and gamma2 = 1 factor into
        // log(y/c) * (univariate integral of h).
        let h = |x: f64| 1.0 + (2.0 * std::f64::consts::PI * x).sin();
        let spec = OperatorSpec::hadamard(FractionalOrder::new(0.5, 1.0).unwrap(), 0.2, 0.2)
            .unwrap();
        for &(x, y) in &[(0.5, 0.5), (0.9, 0.3), (0.34, 0.81)] {
            let two_d = hadamard_fn(|s, _| h(s), &spec, x, y).unwrap();
            let one_d = hadamard_point_1d(h, 0.5, 0.2, x).unwrap();
            let reference = (y / 0.2f64).ln() * one_d;
            assert!(
                (two_d - reference).abs() <= 1e-12 * reference.abs().max(1.0),
                "({x}, {y}): {two_d} vs {reference}"
            );
        }
    }

    #[test]
    fn rho_gap_shrinks_toward_hadamard() {
        let rect = Rect::new(0.1, 1.0, 0.1, 1.0).unwrap();
        let f = constant_one(rect);
        let order = FractionalOrder::new(0.5, 0.5).unwrap();
        let rho_seq = [-0.5, -0.9, -0.99, -0.999];
        let gaps = rho_limit_gap(&f, order, &rho_seq, 0.1, 0.1, 1.0, 1.0).unwrap();
        assert_eq!(gaps.len(), 4);
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "gaps not strictly decreasing: {gaps:?}");
        }
        // Both sides are exact for f = 1, so each gap matches the closed
        // forms of the two operators.
        let had = had_axis_closed(0.5, 0.1, 1.0).powi(2);
        for (&rho, &gap) in rho_seq.iter().zip(&gaps) {
            let kat = kat_axis_closed(0.5, rho, 0.1, 1.0).powi(2);
            assert!(
                (gap - (kat - had).abs()).abs() <= 1e-10,
                "rho = {rho}: gap {gap} vs closed form {}",
                (kat - had).abs()
            );
        }
        // Zero surface has zero gap.
        let zero = make_surface(SurfaceSpec::Constant(0.0), rect).unwrap();
        let gaps = rho_limit_gap(&zero, order, &rho_seq, 0.1, 0.1, 1.0, 1.0).unwrap();
        assert!(gaps.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn integrate_grid_matches_point_evaluation() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 2 }, Rect::UNIT).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap()
        .with_nodes(24)
        .unwrap();
        let grid = integrate_grid(&f, &spec, 8).unwrap();
        assert_eq!(grid.side(), 9);
        assert_eq!(grid.label(), "I_sineproduct_2_2");
        // Lower edges are exactly zero.
        for k in 0..9 {
            assert_eq!(grid.value_at(k, 0), 0.0);
            assert_eq!(grid.value_at(0, k), 0.0);
        }
        for (i, j) in [(3usize, 5usize), (8, 8), (1, 7)] {
            let x = i as f64 / 8.0;
            let y = j as f64 / 8.0;
            let direct = katugampola_point(&f, &spec, x, y).unwrap();
            let gridded = grid.value_at(i, j);
            assert!(
                (gridded - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                "({i}, {j}): {gridded} vs {direct}"
            );
        }
        // Non-negative integrand keeps the grid non-negative.
        assert!(grid.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn integrate_grid_requires_corner_limits() {
        let f = constant_one(Rect::UNIT);
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.25, 0.0).unwrap(),
        )
        .unwrap();
        assert!(integrate_grid(&f, &spec, 8).is_err());
        let corner = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!(integrate_grid(&f, &corner, 1).is_err());
    }

    #[test]
    fn grid_refinement_smooths_neighbor_differences() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 2 }, Rect::UNIT).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap()
        .with_nodes(16)
        .unwrap();
        let max_step = |n: usize| -> f64 {
            let grid = integrate_grid(&f, &spec, n).unwrap();
            let side = grid.side();
            let mut worst = 0.0f64;
            for j in 0..side {
                for i in 1..side {
                    worst = worst.max((grid.value_at(i, j) - grid.value_at(i - 1, j)).abs());
                }
            }
            for j in 1..side {
                for i in 0..side {
                    worst = worst.max((grid.value_at(i, j) - grid.value_at(i, j - 1)).abs());
                }
            }
            worst
        };
        let coarse = max_step(16);
        let fine = max_step(32);
        assert!(fine < coarse, "steps did not shrink: {fine} vs {coarse}");
    }

    #[test]
    fn specification_validation() {
        assert!(FractionalOrder::new(0.0, 0.5).is_err());
        assert!(FractionalOrder::new(0.5, 1.2).is_err());
        assert!(FractionalOrder::new(f64::NAN, 0.5).is_err());
        assert!(KatugampolaParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(KatugampolaParams::new(0.0, -1.5, 0.0, 0.0).is_err());
        assert!(KatugampolaParams::new(0.0, 0.0, -0.1, 0.0).is_err());
        let order = FractionalOrder::new(0.5, 0.5).unwrap();
        assert!(OperatorSpec::hadamard(order, 0.0, 0.1).is_err());
        assert!(OperatorSpec::hadamard(order, 0.1, 0.1)
            .unwrap()
            .with_nodes(0)
            .is_err());

        // Kind mismatch and domain violations.
        let f = constant_one(Rect::UNIT);
        let kat = OperatorSpec::katugampola(
            order,
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!(hadamard_point(&f, &kat, 0.5, 0.5).is_err());
        assert!(katugampola_point(&f, &kat, 1.5, 0.5).is_err());
        assert!(katugampola_point(&f, &kat, -0.1, 0.5).is_err());
        // Lower limits outside the surface rectangle.
        let shifted = constant_one(Rect::new(0.5, 1.0, 0.5, 1.0).unwrap());
        assert!(katugampola_point(&shifted, &kat, 0.75, 0.75).is_err());
    }
}
