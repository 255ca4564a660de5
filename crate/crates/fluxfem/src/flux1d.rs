//! Flux recovery by weighted residuals. Each functional integrates the
//! computed solution against a fixed linear weight and returns a one-sided
//! conormal flux: `gamma_minus`/`gamma_plus` at the interface, `gamma_0`/
//! `gamma_1` at the boundary points. Substituting the exact solution turns
//! each one into an integration-by-parts identity, so the recovered fluxes
//! inherit second-order accuracy from the solution instead of losing an
//! order to differentiation.

use crate::ifem1d::{IfemBasis, Solution1d};
use crate::problems::{Problem1d, Side};
use crate::quadrature::{gauss_interval, IntervalRule};

/// What the functionals integrate: a discrete solution, or an analytic
/// field substituted for it.
pub trait FluxField {
    fn value(&self, x: f64, side: Side) -> f64;
    /// One-sided slope; the side only matters at breakpoints, which the
    /// quadrature never samples.
    fn slope(&self, x: f64, side: Side) -> f64;
}

impl FluxField for Solution1d {
    fn value(&self, x: f64, _side: Side) -> f64 {
        self.evaluate(x)
    }

    fn slope(&self, x: f64, side: Side) -> f64 {
        self.evaluate_derivative(x, side)
    }
}

/// The exact solution of a problem viewed as a field.
pub struct ExactField<'a>(pub &'a Problem1d);

impl FluxField for ExactField<'_> {
    fn value(&self, x: f64, side: Side) -> f64 {
        self.0.exact_u(x, side)
    }

    fn slope(&self, x: f64, side: Side) -> f64 {
        self.0.exact_du(x, side)
    }
}

/// Recovered fluxes plus the beta-normalized one-sided derivatives.
#[derive(Debug, Clone, Copy)]
pub struct FluxReport1d {
    /// Approximates `beta_minus * u'(alpha)` from the left.
    pub gamma_minus: f64,
    /// Approximates `-beta_plus * u'(alpha)` from the right (note the sign).
    pub gamma_plus: f64,
    /// Approximates `-beta_minus * u'(0)`.
    pub gamma_0: f64,
    /// Approximates `beta_plus * u'(1)`.
    pub gamma_1: f64,
    /// `gamma_minus / beta_minus`, the recovered left derivative at alpha.
    pub ux_minus: f64,
    /// `-gamma_plus / beta_plus`, the recovered right derivative at alpha.
    pub ux_plus: f64,
}

fn rule() -> IntervalRule {
    gauss_interval(4).expect("4-point rule is tabulated")
}

/// Shared core: `(beta w', flux_sign) + (q w - f, weight)` accumulated over
/// the pieces on `restrict` (or all pieces).
fn weighted_residual(
    field: &impl FluxField,
    problem: &Problem1d,
    basis: &IfemBasis,
    restrict: Option<Side>,
    flux_sign: f64,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    debug_assert!(
        (basis.alpha - problem.alpha).abs() < 1e-14,
        "basis and problem disagree on the interface position"
    );
    let rule = rule();
    let mut acc = 0.0;
    for e in 0..basis.grid.n_elements() {
        for piece in basis.element_pieces(e) {
            if restrict.is_some_and(|s| s != piece.side) {
                continue;
            }
            let len = piece.b - piece.a;
            if len <= 0.0 {
                continue;
            }
            let beta = problem.beta.on(piece.side);
            for (&xq, &wq) in rule.points.iter().zip(&rule.weights) {
                let x = piece.a + len * xq;
                let w = wq * len;
                let residual =
                    problem.q * field.value(x, piece.side) - problem.source(x, piece.side);
                acc += w * (flux_sign * beta * field.slope(x, piece.side) + residual * weight(x));
            }
        }
    }
    acc
}

/// `(1/alpha) { (beta w', 1) + (q w - f, x) }` over `(0, alpha)`.
pub fn gamma_alpha_minus(field: &impl FluxField, problem: &Problem1d, basis: &IfemBasis) -> f64 {
    weighted_residual(field, problem, basis, Some(Side::Minus), 1.0, |x| x) / problem.alpha
}

/// `(1/(1-alpha)) { (beta w', -1) + (q w - f, 1 - x) }` over `(alpha, 1)`.
pub fn gamma_alpha_plus(field: &impl FluxField, problem: &Problem1d, basis: &IfemBasis) -> f64 {
    weighted_residual(field, problem, basis, Some(Side::Plus), -1.0, |x| 1.0 - x)
        / (1.0 - problem.alpha)
}

/// `(beta w', -1) + (q w - f, 1 - x)` over the whole interval.
pub fn gamma_zero(field: &impl FluxField, problem: &Problem1d, basis: &IfemBasis) -> f64 {
    weighted_residual(field, problem, basis, None, -1.0, |x| 1.0 - x)
}

/// `(beta w', 1) + (q w - f, x)` over the whole interval.
pub fn gamma_one(field: &impl FluxField, problem: &Problem1d, basis: &IfemBasis) -> f64 {
    weighted_residual(field, problem, basis, None, 1.0, |x| x)
}

/// Recovered left interface flux of a computed solution.
pub fn flux_left(sol: &Solution1d, problem: &Problem1d) -> f64 {
    gamma_alpha_minus(sol, problem, &sol.basis)
}

/// Recovered right interface flux (approximates `-beta_plus * u'(alpha)`).
pub fn flux_right(sol: &Solution1d, problem: &Problem1d) -> f64 {
    gamma_alpha_plus(sol, problem, &sol.basis)
}

/// Recovered boundary fluxes `(gamma_0, gamma_1)`.
pub fn flux_boundaries(sol: &Solution1d, problem: &Problem1d) -> (f64, f64) {
    (
        gamma_zero(sol, problem, &sol.basis),
        gamma_one(sol, problem, &sol.basis),
    )
}

/// All four functionals plus the derived one-sided derivatives.
pub fn flux_report(sol: &Solution1d, problem: &Problem1d) -> FluxReport1d {
    let gamma_minus = flux_left(sol, problem);
    let gamma_plus = flux_right(sol, problem);
    let (gamma_0, gamma_1) = flux_boundaries(sol, problem);
    FluxReport1d {
        gamma_minus,
        gamma_plus,
        gamma_0,
        gamma_1,
        ux_minus: gamma_minus / problem.beta.on(Side::Minus),
        ux_plus: -gamma_plus / problem.beta.on(Side::Plus),
    }
}
