//! Slow, independent evaluation of the raw singular-kernel integrals,
//! used to validate the transformed quadrature in
//! [`frac_integral`](crate::frac_integral).
//!
//! The operators are integrated **in the original variables**: the kernel
//! `(x^(rho1+1) - s^(rho1+1))^(alpha1-1) s^rho1` (Katugampola) or
//! `(log(x/u))^(gamma1-1) / u` (Hadamard) is evaluated pointwise on a
//! composite Gauss-Legendre mesh, with geometric panel refinement toward
//! the singular edges `s -> x`, `t -> y` (and toward `s -> 0` when the
//! lower limit is 0 and `rho < 0`, where `s^rho` is itself singular).
//! Integrable endpoint singularities of the form `d^(alpha-1)` converge
//! under such geometric grading, with the grading depth scaled by
//! `1/alpha` so that every axis refines at the same geometric rate.
//!
//! Refinement proceeds level by level; the run stops when two successive
//! levels agree within the requested tolerance or the level cap is
//! reached, and the final two-level difference is reported as the error
//! estimate. This path never calls
//! [`jacobi_rule`](crate::special::jacobi_rule) or the node maps of the
//! transformed quadrature, so agreement between the two is meaningful
//! validation rather than a self-check.

use crate::frac_integral::{check_point_in_rect, OperatorKind, OperatorSpec};
use crate::special::{gamma, gauss_legendre_01};
use crate::surfaces::Surface;
use crate::{Error, Result};

/// Knobs of the adaptive direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Two-level agreement threshold; must be at least `1e-10`.
    pub tol: f64,
    /// Refinement-level cap; the result is flagged non-converged when it
    /// is reached without two-level agreement.
    pub max_levels: usize,
    /// Gauss-Legendre nodes per panel.
    pub panel_nodes: usize,
    /// Geometric width ratio of neighboring graded panels.
    pub ratio: f64,
    /// Graded panels added per level and unit singularity exponent: at
    /// level `L` an axis whose kernel exponent is `alpha - 1` uses
    /// `ceil(depth_step * L / alpha)` panels on its singular side.
    pub depth_step: usize,
}

impl Default for OracleConfig {
    fn default() -> OracleConfig {
        OracleConfig {
            tol: 1e-9,
            max_levels: 16,
            panel_nodes: 8,
            ratio: 2.0,
            depth_step: 8,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol >= 1e-10) {
            return Err(Error::InvalidSpec(format!(
                "oracle tolerance must be at least 1e-10, got {}",
                self.tol
            )));
        }
        if self.max_levels < 2 {
            return Err(Error::InvalidSpec(
                "oracle needs at least two refinement levels to compare".into(),
            ));
        }
        if self.panel_nodes < 2 {
            return Err(Error::InvalidSpec(
                "oracle needs at least two nodes per panel".into(),
            ));
        }
        if !(self.ratio.is_finite() && self.ratio > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "panel refinement ratio must exceed 1, got {}",
                self.ratio
            )));
        }
        if self.depth_step < 1 {
            return Err(Error::InvalidSpec(
                "oracle needs a positive grading depth per level".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a direct-quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Final two-level difference (0 for trivially exact cases).
    pub error_estimate: f64,
    /// Refinement levels actually evaluated; at most the configured cap.
    pub subdivisions: usize,
    /// False when the level cap was reached without two-level agreement,
    /// or when the graded mesh was truncated at the representable-width
    /// floor before agreeing. The caller decides what to do with a
    /// non-converged value.
    pub converged: bool,
}

/// Relative width floor of graded panels: grading stops once the next
/// breakpoint would be below `width * MIN_PANEL_REL`, far inside the
/// subnormal-safe range. A truncated mesh no longer refines, so the run
/// is flagged non-converged instead of trusting a frozen value.
const MIN_PANEL_REL: f64 = 1e-280;

/// One axis of the raw kernel, described in the original variable.
struct AxisSpec {
    lower: f64,
    upper: f64,
    kind: AxisKind,
}

enum AxisKind {
    /// `(x^p - s^p)^(alpha-1) s^rho` with `p = rho + 1`.
    Power { p: f64, rho: f64, alpha: f64 },
    /// `(log(x/s))^(gamma-1) / s`.
    Log { gamma: f64 },
}

impl AxisSpec {
    /// Kernel value at position `s`, with `d = upper - s` supplied by the
    /// caller so that each mesh side computes the pair in the direction
    /// that avoids cancellation.
    fn kernel(&self, s: f64, d: f64) -> f64 {
        match self.kind {
            AxisKind::Power { p, rho, alpha } => {
                // x^p - s^p = -x^p * expm1(p * log1p(-d/x)), accurate for
                // d -> 0; log1p(-d/x) rounds to -inf as s -> 0, where the
                // expression correctly collapses to x^p.
                let g = -self.upper.powf(p) * (p * (-d / self.upper).ln_1p()).exp_m1();
                let weight = if rho == 0.0 { 1.0 } else { s.powf(rho) };
                g.powf(alpha - 1.0) * weight
            }
            AxisKind::Log { gamma } => {
                let lam = -(-d / self.upper).ln_1p();
                lam.powf(gamma - 1.0) / s
            }
        }
    }

    /// Exponent of the integrable singularity at the upper end.
    fn upper_exponent(&self) -> f64 {
        match self.kind {
            AxisKind::Power { alpha, .. } => alpha,
            AxisKind::Log { gamma } => gamma,
        }
    }

    /// Exponent of a lower-end singularity, if any: `s^rho` with
    /// `rho < 0` down to a lower limit of 0 integrates like `s^(rho+1)`.
    fn lower_exponent(&self) -> Option<f64> {
        match self.kind {
            AxisKind::Power { p, rho, .. } if self.lower == 0.0 && rho < 0.0 => Some(p),
            _ => None,
        }
    }

    /// Panel parameterized by distance from the upper end (used where the
    /// nodes crowd toward `s = upper`, keeping `d` exact).
    fn push_distance_panel(&self, d_lo: f64, d_hi: f64, gl: &PanelRule, out: &mut Mesh) {
        for (&z, &w) in gl.0.iter().zip(&gl.1) {
            let d = d_lo + z * (d_hi - d_lo);
            let s = self.upper - d;
            out.s_nodes.push(s);
            out.weights.push(w * (d_hi - d_lo) * self.kernel(s, d));
        }
    }

    /// Panel parameterized by the original variable (used away from the
    /// upper end, keeping `s` exact down to 0).
    fn push_value_panel(&self, s_lo: f64, s_hi: f64, gl: &PanelRule, out: &mut Mesh) {
        for (&z, &w) in gl.0.iter().zip(&gl.1) {
            let s = s_lo + z * (s_hi - s_lo);
            let d = self.upper - s;
            out.s_nodes.push(s);
            out.weights.push(w * (s_hi - s_lo) * self.kernel(s, d));
        }
    }

    /// Composite mesh for one refinement level: node positions in the
    /// original variable, weights with the kernel folded in, and whether
    /// the graded mesh hit the width floor.
    fn mesh(&self, level: usize, cfg: &OracleConfig, gl: &PanelRule) -> Mesh {
        let width = self.upper - self.lower;
        let half = 0.5 * width;
        let floor = width * MIN_PANEL_REL;
        let mut out = Mesh::default();

        // Upper (singular) side: geometric grading on distances
        // d in [0, width/2], depth scaled by the singularity exponent.
        let depth = graded_depth(cfg.depth_step, level, self.upper_exponent());
        let mut d_hi = half;
        for _ in 0..depth {
            let d_lo = d_hi / cfg.ratio;
            if d_lo < floor {
                out.truncated = true;
                break;
            }
            self.push_distance_panel(d_lo, d_hi, gl, &mut out);
            d_hi = d_lo;
        }
        self.push_distance_panel(0.0, d_hi, gl, &mut out);

        // Lower side: graded toward a singular lower end (only reached
        // with a lower limit of exactly 0), otherwise a uniform composite
        // mesh that also refines with the level.
        match self.lower_exponent() {
            Some(p) => {
                let depth = graded_depth(cfg.depth_step, level, p);
                let mut s_hi = half;
                for _ in 0..depth {
                    let s_lo = s_hi / cfg.ratio;
                    if s_lo < floor {
                        out.truncated = true;
                        break;
                    }
                    self.push_value_panel(s_lo, s_hi, gl, &mut out);
                    s_hi = s_lo;
                }
                self.push_value_panel(0.0, s_hi, gl, &mut out);
            }
            None => {
                let panels = 2 * level;
                let h = half / panels as f64;
                for k in 0..panels {
                    let s_lo = self.lower + k as f64 * h;
                    self.push_value_panel(s_lo, s_lo + h, gl, &mut out);
                }
            }
        }

        out
    }
}

/// Plain Gauss-Legendre nodes and weights on [0, 1].
type PanelRule = (Vec<f64>, Vec<f64>);

#[derive(Default)]
struct Mesh {
    s_nodes: Vec<f64>,
    weights: Vec<f64>,
    truncated: bool,
}

fn graded_depth(step: usize, level: usize, exponent: f64) -> usize {
    ((step * level) as f64 / exponent).ceil() as usize
}

/// Direct evaluation of the raw singular-kernel integral at `(x, y)` with
/// default refinement settings and the given tolerance.
///
/// # Errors
///
/// [`Error::InvalidSpec`] when `tol < 1e-10`; [`Error::Domain`] when the
/// point or the operator's lower limits leave the surface rectangle.
pub fn direct_singular(
    f: &Surface,
    spec: &OperatorSpec,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<OracleResult> {
    let cfg = OracleConfig {
        tol,
        ..OracleConfig::default()
    };
    direct_singular_with(f, spec, x, y, &cfg)
}

/// [`direct_singular`] with every refinement knob exposed.
///
/// # Errors
///
/// As [`direct_singular`], plus invalid [`OracleConfig`] fields.
pub fn direct_singular_with(
    f: &Surface,
    spec: &OperatorSpec,
    x: f64,
    y: f64,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    cfg.validate()?;
    check_point_in_rect(f, spec, x, y)?;
    let params = spec.params();
    let order = spec.order();
    if x <= params.a() || y <= params.c() {
        return Ok(OracleResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
            converged: true,
        });
    }

    let (constant, ax, ay) = match spec.kind() {
        OperatorKind::Katugampola => {
            let (p1, p2) = (params.rho1() + 1.0, params.rho2() + 1.0);
            let constant = p1.powf(1.0 - order.alpha1()) * p2.powf(1.0 - order.alpha2())
                / (gamma(order.alpha1())? * gamma(order.alpha2())?);
            let ax = AxisSpec {
                lower: params.a(),
                upper: x,
                kind: AxisKind::Power {
                    p: p1,
                    rho: params.rho1(),
                    alpha: order.alpha1(),
                },
            };
            let ay = AxisSpec {
                lower: params.c(),
                upper: y,
                kind: AxisKind::Power {
                    p: p2,
                    rho: params.rho2(),
                    alpha: order.alpha2(),
                },
            };
            (constant, ax, ay)
        }
        OperatorKind::Hadamard => {
            let constant = 1.0 / (gamma(order.alpha1())? * gamma(order.alpha2())?);
            let ax = AxisSpec {
                lower: params.a(),
                upper: x,
                kind: AxisKind::Log {
                    gamma: order.alpha1(),
                },
            };
            let ay = AxisSpec {
                lower: params.c(),
                upper: y,
                kind: AxisKind::Log {
                    gamma: order.alpha2(),
                },
            };
            (constant, ax, ay)
        }
    };

    let gl = gauss_legendre_01(cfg.panel_nodes);
    let mut previous: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for level in 1..=cfg.max_levels {
        let mx = ax.mesh(level, cfg, &gl);
        let my = ay.mesh(level, cfg, &gl);
        let mut total = 0.0;
        for (j, &t) in my.s_nodes.iter().enumerate() {
            let mut inner = 0.0;
            for (i, &s) in mx.s_nodes.iter().enumerate() {
                inner += mx.weights[i] * f.eval(s, t);
            }
            total += my.weights[j] * inner;
        }
        let value = constant * total;
        if let Some(prev) = previous {
            last_diff = (value - prev).abs();
            if last_diff < cfg.tol {
                return Ok(OracleResult {
                    value,
                    error_estimate: last_diff,
                    subdivisions: level,
                    // A mesh frozen at the width floor stops refining, so
                    // two-level agreement no longer demonstrates anything.
                    converged: !(mx.truncated || my.truncated),
                });
            }
        }
        previous = Some(value);
    }
    Ok(OracleResult {
        value: previous.expect("at least one level evaluated"),
        error_estimate: last_diff,
        subdivisions: cfg.max_levels,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_integral::{
        katugampola_point, FractionalOrder, KatugampolaParams, OperatorSpec,
    };
    use crate::surfaces::{make_surface, Rect, SurfaceSpec};

    fn unit_constant(v: f64) -> Surface {
        make_surface(SurfaceSpec::Constant(v), Rect::UNIT).unwrap()
    }

    fn half_order_spec() -> OperatorSpec {
        OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.5).unwrap(),
            KatugampolaParams::new(0.0, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_function_is_exact() {
        let f = unit_constant(0.0);
        let r = direct_singular(&f, &half_order_spec(), 1.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
        assert!(r.converged);
        assert!(r.subdivisions <= 16);
    }

    #[test]
    fn lower_limit_point_is_exactly_zero() {
        let f = unit_constant(3.0);
        let r = direct_singular(&f, &half_order_spec(), 0.0, 0.6, 1e-9).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.subdivisions, 0);
        assert!(r.converged);
    }

    #[test]
    fn katugampola_constant_matches_closed_form() {
        let f = unit_constant(1.0);
        let tol = 1e-9;
        let r = direct_singular(&f, &half_order_spec(), 1.0, 1.0, tol).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.error_estimate <= tol);
        let reference = 4.0 / std::f64::consts::PI;
        assert!(
            (r.value - reference).abs() <= tol,
            "value {} vs 4/pi {reference}",
            r.value
        );
    }

    #[test]
    fn katugampola_negative_rho_matches_closed_form() {
        // rho < 0 with lower limit 0 exercises the graded lower side.
        let f = unit_constant(1.0);
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.8).unwrap(),
            KatugampolaParams::new(-0.5, -0.5, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let (x, y) = (0.9, 0.8);
        let r = direct_singular(&f, &spec, x, y, 1e-9).unwrap();
        assert!(r.converged, "{r:?}");
        let axis = |alpha: f64, x: f64| {
            (x.powf(0.5) / 0.5).powf(alpha) / gamma(alpha + 1.0).unwrap()
        };
        let reference = axis(0.5, x) * axis(0.8, y);
        assert!(
            (r.value - reference).abs() <= 1e-9,
            "value {} vs {reference}",
            r.value
        );
    }

    #[test]
    fn hadamard_constant_matches_closed_form() {
        let rect = Rect::new(0.1, 1.0, 0.1, 1.0).unwrap();
        let f = make_surface(SurfaceSpec::Constant(1.0), rect).unwrap();
        let spec =
            OperatorSpec::hadamard(FractionalOrder::new(1.0, 1.0).unwrap(), 0.1, 0.1).unwrap();
        let r = direct_singular(&f, &spec, 1.0, 1.0, 1e-9).unwrap();
        assert!(r.converged, "{r:?}");
        let log10 = 10f64.ln();
        assert!(
            (r.value - log10 * log10).abs() <= 1e-9,
            "value {}",
            r.value
        );

        // Fractional orders hit the singular log kernel on both axes.
        let spec =
            OperatorSpec::hadamard(FractionalOrder::new(0.4, 0.9).unwrap(), 0.1, 0.1).unwrap();
        let r = direct_singular(&f, &spec, 1.0, 0.7, 1e-9).unwrap();
        assert!(r.converged, "{r:?}");
        let axis = |g: f64, lo: f64, x: f64| {
            (x / lo).ln().powf(g) / gamma(g + 1.0).unwrap()
        };
        let reference = axis(0.4, 0.1, 1.0) * axis(0.9, 0.1, 0.7);
        assert!(
            (r.value - reference).abs() <= 1e-9,
            "value {} vs {reference}",
            r.value
        );
    }

    #[test]
    fn halving_tolerance_never_worsens_the_value() {
        let f = unit_constant(1.0);
        let spec = half_order_spec();
        let reference = 4.0 / std::f64::consts::PI;
        let mut tol = 1e-4;
        let mut last = f64::INFINITY;
        while tol >= 1e-9 {
            let r = direct_singular(&f, &spec, 1.0, 1.0, tol).unwrap();
            let discrepancy = (r.value - reference).abs();
            assert!(
                discrepancy <= last + 1e-15,
                "tol {tol}: discrepancy grew from {last} to {discrepancy}"
            );
            assert!(discrepancy <= tol);
            last = discrepancy;
            tol *= 0.5;
        }
    }

    #[test]
    fn refinement_ratio_does_not_change_the_value() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 2 }, Rect::UNIT).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.8).unwrap(),
            KatugampolaParams::new(0.0, 1.0, 0.0, 0.0).unwrap(),
        )
        .unwrap();
        let tol = 1e-8;
        let two = direct_singular_with(
            &f,
            &spec,
            0.8,
            0.9,
            &OracleConfig {
                tol,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        let four = direct_singular_with(
            &f,
            &spec,
            0.8,
            0.9,
            &OracleConfig {
                tol,
                ratio: 4.0,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        assert!(two.converged && four.converged);
        assert!(
            (two.value - four.value).abs() <= 2.0 * tol,
            "ratio 2 gave {}, ratio 4 gave {}",
            two.value,
            four.value
        );
    }

    #[test]
    fn agrees_with_transformed_quadrature() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 2 }, Rect::UNIT).unwrap();
        let spec = OperatorSpec::katugampola(
            FractionalOrder::new(0.5, 0.8).unwrap(),
            KatugampolaParams::new(-0.5, 0.0, 0.0, 0.0).unwrap(),
        )
        .unwrap()
        .with_nodes(128)
        .unwrap();
        for &(x, y) in &[(0.9, 0.7), (0.5, 0.5), (0.23, 0.88)] {
            let direct = direct_singular(&f, &spec, x, y, 1e-9).unwrap();
            assert!(direct.converged);
            let transformed = katugampola_point(&f, &spec, x, y).unwrap();
            let tol = 1e-8f64.max(1e-6 * transformed.abs());
            assert!(
                (direct.value - transformed).abs() <= tol,
                "({x}, {y}): direct {} vs transformed {transformed}",
                direct.value
            );
        }
    }

    #[test]
    fn convergence_failure_is_flagged() {
        let f = make_surface(SurfaceSpec::SineProduct { k1: 2, k2: 2 }, Rect::UNIT).unwrap();
        let r = direct_singular_with(
            &f,
            &half_order_spec(),
            0.9,
            0.9,
            &OracleConfig {
                tol: 1e-10,
                max_levels: 2,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.subdivisions, 2);
        assert!(r.error_estimate.is_finite());
    }

    #[test]
    fn configuration_is_validated() {
        let f = unit_constant(1.0);
        let spec = half_order_spec();
        assert!(direct_singular(&f, &spec, 0.5, 0.5, 1e-11).is_err());
        for bad in [
            OracleConfig {
                max_levels: 1,
                ..OracleConfig::default()
            },
            OracleConfig {
                panel_nodes: 1,
                ..OracleConfig::default()
            },
            OracleConfig {
                ratio: 1.0,
                ..OracleConfig::default()
            },
            OracleConfig {
                depth_step: 0,
                ..OracleConfig::default()
            },
        ] {
            assert!(direct_singular_with(&f, &spec, 0.5, 0.5, &bad).is_err());
        }
        // Domain violations propagate.
        assert!(direct_singular(&f, &spec, 1.5, 0.5, 1e-9).is_err());
    }
}
