//! Special functions and quadrature rules backing the operator evaluation:
//! the gamma function and Gauss rules for weight `(1 - u)^(alpha - 1)` on
//! `[0, 1]`.

use crate::{Error, Result};

// Lanczos approximation, g = 10.900511, 11 terms. Relative error of the
// resulting gamma values is below 1e-13 on the supported range.
const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: &[f64] = &[
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;

/// Largest admitted argument; `gamma(171)` is near the top of the `f64`
/// range and anything above 171.62 overflows.
pub const GAMMA_MAX_ARG: f64 = 171.0;

/// Gamma function for positive real arguments.
///
/// # Errors
///
/// Returns [`Error::Domain`] unless `0 < x <= 171`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma requires a positive finite argument, got {x}"
        )));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Domain(format!(
            "gamma argument {x} exceeds the overflow bound {GAMMA_MAX_ARG}"
        )));
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    if x < 0.5 {
        let s = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, (i, d)| s + d / (i as f64 - x));
        std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin()
                * s
                * TWO_SQRT_E_OVER_PI
                * ((0.5 - x + GAMMA_R) / std::f64::consts::E).powf(0.5 - x))
    } else {
        let s = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, (i, d)| s + d / (x + i as f64 - 1.0));
        // The power factor alone overflows near the top of the range
        // (gamma(171) ~ 7.3e306 is finite but the factor is ~1e311), so
        // take it in two halves and fold the small prefactor in between.
        let half = ((x - 0.5 + GAMMA_R) / std::f64::consts::E).powf(0.5 * (x - 0.5));
        (s * TWO_SQRT_E_OVER_PI * half) * half
    }
}

/// Nodes and weights of a quadrature rule on `(0, 1)` for the weight
/// function `(1 - u)^(alpha - 1)`:
///
/// ```text
/// integral_0^1 (1 - u)^(alpha - 1) g(u) du  ~=  sum_i w_i g(u_i)
/// ```
///
/// The weights absorb the singular factor, so `g` is sampled as-is.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
}

impl QuadratureRule {
    /// Strictly increasing nodes, all in the open interval `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Positive weights; they sum to `1 / alpha` (the total mass of the
    /// weight function) to within 1e-12.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exponent parameter the rule was built for.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of nodes. Usually the `n` the rule was built with; can be
    /// smaller for extreme parameters (tiny `alpha` with many nodes), where
    /// nodes indistinguishable in `f64` are coalesced.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule to `g`.
    pub fn apply(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * g(u))
            .sum()
    }
}

/// Builds an `n`-node rule for `integral_0^1 (1 - u)^(alpha - 1) g(u) du`.
///
/// Construction: the substitution `z = (1 - u)^alpha` turns the integral
/// into `(1/alpha) * integral_0^1 g(1 - z^(1/alpha)) dz`, which is smooth
/// whenever `g` is; Gauss-Legendre nodes in `z` are then mapped back. For
/// `alpha = 1` the rule reduces to plain Gauss-Legendre on `[0, 1]`. For
/// `alpha = 0.5` the rule integrates polynomials of degree `d` exactly
/// whenever `n >= d + 1`.
///
/// # Errors
///
/// Returns [`Error::InvalidSpec`] unless `0 < alpha <= 1` and `n >= 1`.
pub fn jacobi_rule(alpha: f64, n: usize) -> Result<QuadratureRule> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "quadrature exponent alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidSpec(
            "quadrature rule needs at least one node".into(),
        ));
    }
    let (z, wz) = gauss_legendre_01(n);
    // z increasing makes u = 1 - z^(1/alpha) decreasing; reverse to keep the
    // node list sorted. For small alpha the distance z^(1/alpha) can drop
    // below machine epsilon, where 1 - z^(1/alpha) rounds onto 1.0 (or onto
    // a neighbor): clamp into the open interval and coalesce collisions by
    // summing their weights, which leaves the quadrature sum unchanged.
    let inv_alpha = 1.0 / alpha;
    let top = 1.0 - 0.5 * f64::EPSILON; // largest f64 below 1
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let u = (1.0 - z[i].powf(inv_alpha)).min(top);
        let w = wz[i] * inv_alpha;
        match nodes.last() {
            Some(&prev) if u <= prev => *weights.last_mut().unwrap() += w,
            _ => {
                nodes.push(u);
                weights.push(w);
            }
        }
    }
    debug_assert!(nodes.windows(2).all(|p| p[0] < p[1]));
    Ok(QuadratureRule {
        nodes,
        weights,
        alpha,
    })
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, nodes increasing.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes increasing.
///
/// Newton iteration on the Legendre recurrence; converges to machine
/// precision in a handful of steps from the Chebyshev-like initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // k-th root counted from the right; nodes come out decreasing.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Enforce exact symmetry; the central node of odd rules is exactly 0.
    for k in 0..n / 2 {
        let avg = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        nodes[k] = -avg;
        nodes[n - 1 - k] = avg;
        let wavg = 0.5 * (weights[k] + weights[n - 1 - k]);
        weights[k] = wavg;
        weights[n - 1 - k] = wavg;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
