//! Built-in manufactured interface problems.
//!
//! All problems solve `-div(beta grad u) + q u = f` with a piecewise
//! constant diffusion coefficient `beta` that jumps across an interface:
//! a point `alpha` in (0, 1) for the 1D family, a circle for the 2D ones.
//! Exact solutions, one-sided gradients, and sources are stored as
//! closures so randomized variants share the same plumbing.

use crate::error::{Error, Result};

/// Which side of the interface a point belongs to. `Minus` is the left of
/// `alpha` in 1D and the inside of the circle in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

/// Piecewise-constant diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseCoefficient {
    pub beta_minus: f64,
    pub beta_plus: f64,
}

impl PiecewiseCoefficient {
    pub fn new(beta_minus: f64, beta_plus: f64) -> Result<Self> {
        if !(beta_minus > 0.0 && beta_plus > 0.0) {
            return Err(Error::Parameter(format!(
                "diffusion coefficients must be positive, got ({beta_minus}, {beta_plus})"
            )));
        }
        Ok(Self {
            beta_minus,
            beta_plus,
        })
    }

    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.beta_minus,
            Side::Plus => self.beta_plus,
        }
    }
}

pub(crate) type Fn1 = Box<dyn Fn(f64, Side) -> f64 + Send + Sync>;
pub(crate) type Fn2 = Box<dyn Fn([f64; 2], Side) -> f64 + Send + Sync>;
pub(crate) type Grad2 = Box<dyn Fn([f64; 2], Side) -> [f64; 2] + Send + Sync>;

/// 1D interface problem on (0, 1) with Dirichlet data taken from the
/// exact solution.
pub struct Problem1d {
    pub alpha: f64,
    pub beta: PiecewiseCoefficient,
    pub q: f64,
    u: Fn1,
    du: Fn1,
    f: Fn1,
}

impl std::fmt::Debug for Problem1d {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Problem1d")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("q", &self.q)
            .finish()
    }
}

impl Problem1d {
    pub fn exact_u(&self, x: f64, side: Side) -> f64 {
        (self.u)(x, side)
    }

    pub fn exact_du(&self, x: f64, side: Side) -> f64 {
        (self.du)(x, side)
    }

    pub fn source(&self, x: f64, side: Side) -> f64 {
        (self.f)(x, side)
    }

    /// Side of a point strictly off the interface; `alpha` itself counts
    /// as `Plus` to match the half-open element convention.
    pub fn side_of(&self, x: f64) -> Side {
        if x < self.alpha {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    /// Dirichlet values (u(0), u(1)).
    pub fn dirichlet(&self) -> (f64, f64) {
        (
            self.exact_u(0.0, Side::Minus),
            self.exact_u(1.0, Side::Plus),
        )
    }

    /// Assemble a problem from explicit closures; the caller is responsible
    /// for the interface conditions and `-(beta u')' + q u = f` holding.
    #[cfg(test)]
    pub(crate) fn custom(
        alpha: f64,
        beta: PiecewiseCoefficient,
        q: f64,
        u: Fn1,
        du: Fn1,
        f: Fn1,
    ) -> Self {
        Self {
            alpha,
            beta,
            q,
            u,
            du,
            f,
        }
    }
}

/// Quartic 1D family: `u = x^4 / beta` on each side, shifted on the right
/// so that both `u` and `beta u'` are continuous at `alpha`; the source is
/// `f = -12 x^2 + q u`. With `q = 0` this is the reference refinement
/// problem (`alpha = 1/3`, `beta = (2, 10)` in the studies).
pub fn quartic_interface_1d(
    alpha: f64,
    beta_minus: f64,
    beta_plus: f64,
    q: f64,
) -> Result<Problem1d> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "interface alpha must lie strictly inside (0, 1), got {alpha}"
        )));
    }
    if q < 0.0 {
        return Err(Error::Parameter(format!("reaction q must be >= 0, got {q}")));
    }
    let beta = PiecewiseCoefficient::new(beta_minus, beta_plus)?;
    let shift = (1.0 / beta_minus - 1.0 / beta_plus) * alpha.powi(4);
    let u = move |x: f64, side: Side| match side {
        Side::Minus => x.powi(4) / beta_minus,
        Side::Plus => x.powi(4) / beta_plus + shift,
    };
    let du = move |x: f64, side: Side| 4.0 * x.powi(3) / beta.on(side);
    let f = move |x: f64, side: Side| -12.0 * x * x + q * u(x, side);
    Ok(Problem1d {
        alpha,
        beta,
        q,
        u: Box::new(u),
        du: Box::new(du),
        f: Box::new(f),
    })
}

/// Axis-aligned square domain `[lo, hi]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub lo: f64,
    pub hi: f64,
}

impl Square {
    pub fn side_length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Circular interface; `radius = 0` degenerates to "no interface" (every
/// point counts as `Plus`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    /// Signed distance to the circle: negative inside, positive outside.
    pub fn level_set(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        (dx * dx + dy * dy).sqrt() - self.radius
    }

    /// Outward unit normal at the radial projection of `p` onto the circle.
    pub fn normal_at(&self, p: [f64; 2]) -> [f64; 2] {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let r = (dx * dx + dy * dy).sqrt();
        if r == 0.0 {
            [1.0, 0.0]
        } else {
            [dx / r, dy / r]
        }
    }

    /// Radial projection of `p` onto the circle.
    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        let n = self.normal_at(p);
        [
            self.center[0] + self.radius * n[0],
            self.center[1] + self.radius * n[1],
        ]
    }

    pub fn point_at_angle(&self, theta: f64) -> [f64; 2] {
        [
            self.center[0] + self.radius * theta.cos(),
            self.center[1] + self.radius * theta.sin(),
        ]
    }
}

/// 2D interface problem on a square with a circular interface and
/// Dirichlet data from the exact solution.
pub struct Problem2d {
    pub domain: Square,
    pub interface: Circle,
    pub beta: PiecewiseCoefficient,
    pub q: f64,
    u: Fn2,
    grad: Grad2,
    f: Fn2,
}

impl std::fmt::Debug for Problem2d {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Problem2d")
            .field("domain", &self.domain)
            .field("interface", &self.interface)
            .field("beta", &self.beta)
            .field("q", &self.q)
            .finish()
    }
}

impl Problem2d {
    pub fn exact_u(&self, p: [f64; 2], side: Side) -> f64 {
        (self.u)(p, side)
    }

    pub fn exact_grad(&self, p: [f64; 2], side: Side) -> [f64; 2] {
        (self.grad)(p, side)
    }

    /// Exact flux variable `v = -beta grad u` on the given side.
    pub fn exact_flux(&self, p: [f64; 2], side: Side) -> [f64; 2] {
        let g = self.exact_grad(p, side);
        let b = self.beta.on(side);
        [-b * g[0], -b * g[1]]
    }

    pub fn source(&self, p: [f64; 2], side: Side) -> f64 {
        (self.f)(p, side)
    }

    /// Side of a point by the sign of the level set; points exactly on the
    /// interface count as `Minus`.
    pub fn side_of(&self, p: [f64; 2]) -> Side {
        if self.interface.radius > 0.0 && self.interface.level_set(p) <= 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    /// Assemble a problem from explicit closures; the caller is responsible
    /// for the interface conditions and `-div(beta grad u) + q u = f`
    /// holding.
    #[cfg(test)]
    pub(crate) fn custom(
        domain: Square,
        interface: Circle,
        beta: PiecewiseCoefficient,
        q: f64,
        u: Fn2,
        grad: Grad2,
        f: Fn2,
    ) -> Self {
        Self {
            domain,
            interface,
            beta,
            q,
            u,
            grad,
            f,
        }
    }

    /// Jump of the conormal flux `[beta du/dn]` at a point of the
    /// interface, oriented by the outward normal: plus-side flux minus
    /// minus-side flux.
    pub fn flux_jump(&self, p: [f64; 2]) -> f64 {
        if self.interface.radius == 0.0 {
            return 0.0;
        }
        let n = self.interface.normal_at(p);
        let gp = self.exact_grad(p, Side::Plus);
        let gm = self.exact_grad(p, Side::Minus);
        self.beta.beta_plus * (gp[0] * n[0] + gp[1] * n[1])
            - self.beta.beta_minus * (gm[0] * n[0] + gm[1] * n[1])
    }
}

/// Globally smooth trigonometric 2D problem: `u = sin x cos y` on the
/// square `[-1.1, 1.1]^2` with a circular interface of radius `r_gamma`
/// centered at the origin. The solution is smooth but `beta` jumps, so the
/// conormal flux jumps by `(beta_plus - beta_minus) grad u . n` across the
/// interface. The reference configuration is `beta = (100, 1)`, `r = 0.9`.
pub fn trig_circle_2d(
    beta_minus: f64,
    beta_plus: f64,
    q: f64,
    r_gamma: f64,
) -> Result<Problem2d> {
    let domain = Square { lo: -1.1, hi: 1.1 };
    if !(r_gamma >= 0.0 && r_gamma < domain.hi) {
        return Err(Error::Parameter(format!(
            "interface radius must lie in [0, {}), got {r_gamma}",
            domain.hi
        )));
    }
    if q < 0.0 {
        return Err(Error::Parameter(format!("reaction q must be >= 0, got {q}")));
    }
    let beta = PiecewiseCoefficient::new(beta_minus, beta_plus)?;
    let u = |p: [f64; 2], _s: Side| p[0].sin() * p[1].cos();
    let grad = |p: [f64; 2], _s: Side| [p[0].cos() * p[1].cos(), -p[0].sin() * p[1].sin()];
    let f = move |p: [f64; 2], s: Side| (2.0 * beta.on(s) + q) * p[0].sin() * p[1].cos();
    Ok(Problem2d {
        domain,
        interface: Circle {
            center: [0.0, 0.0],
            radius: r_gamma,
        },
        beta,
        q,
        u: Box::new(u),
        grad: Box::new(grad),
        f: Box::new(f),
    })
}

/// Radial 2D problem with a kinked solution and a nonhomogeneous flux
/// jump: `u = r^2` inside the unit circle, `u = r^4` outside, on the
/// square `[-1.5, 1.5]^2`. The conormal flux jumps by
/// `4 beta_plus - 2 beta_minus` uniformly along the interface.
pub fn radial_r2r4_2d(beta_minus: f64, beta_plus: f64, q: f64) -> Result<Problem2d> {
    if q < 0.0 {
        return Err(Error::Parameter(format!("reaction q must be >= 0, got {q}")));
    }
    let beta = PiecewiseCoefficient::new(beta_minus, beta_plus)?;
    let u = |p: [f64; 2], s: Side| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        match s {
            Side::Minus => r2,
            Side::Plus => r2 * r2,
        }
    };
    let grad = |p: [f64; 2], s: Side| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        match s {
            Side::Minus => [2.0 * p[0], 2.0 * p[1]],
            Side::Plus => [4.0 * r2 * p[0], 4.0 * r2 * p[1]],
        }
    };
    let f = move |p: [f64; 2], s: Side| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        match s {
            // laplacian(r^2) = 4, laplacian(r^4) = 16 r^2
            Side::Minus => -4.0 * beta.beta_minus + q * r2,
            Side::Plus => -16.0 * beta.beta_plus * r2 + q * r2 * r2,
        }
    };
    Ok(Problem2d {
        domain: Square { lo: -1.5, hi: 1.5 },
        interface: Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        beta,
        q,
        u: Box::new(u),
        grad: Box::new(grad),
        f: Box::new(f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Central second difference, step tuned so truncation and roundoff
    // both sit well below the 1e-6 relative check.
    fn fd_dd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4;
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    #[test]
    fn quartic_family_satisfies_the_pde_off_the_interface() {
        for &(alpha, bm, bp, q) in &[(1.0 / 3.0, 2.0, 10.0, 0.0), (0.61, 0.5, 7.0, 1.0)] {
            let p = quartic_interface_1d(alpha, bm, bp, q).unwrap();
            for k in 0..100 {
                let x = 0.004 + 0.992 * (k as f64) / 99.0;
                if (x - alpha).abs() < 0.02 {
                    continue;
                }
                let side = p.side_of(x);
                let beta = p.beta.on(side);
                let resid =
                    -beta * fd_dd(|t| p.exact_u(t, side), x) + q * p.exact_u(x, side)
                        - p.source(x, side);
                let scale = p.source(x, side).abs().max(1.0);
                assert!(
                    resid.abs() <= 1e-6 * scale,
                    "pde residual {resid} at x={x}"
                );
                let dresid = (p.exact_u(x + 1e-6, side) - p.exact_u(x - 1e-6, side)) / 2e-6
                    - p.exact_du(x, side);
                assert!(dresid.abs() < 1e-6, "du mismatch {dresid} at x={x}");
            }
        }
    }

    #[test]
    fn quartic_family_is_continuous_with_continuous_flux() {
        let p = quartic_interface_1d(0.47, 3.0, 0.25, 1.0).unwrap();
        let a = p.alpha;
        let jump_u = p.exact_u(a, Side::Plus) - p.exact_u(a, Side::Minus);
        assert!(jump_u.abs() < 1e-14);
        let jump_flux = p.beta.beta_plus * p.exact_du(a, Side::Plus)
            - p.beta.beta_minus * p.exact_du(a, Side::Minus);
        assert!(jump_flux.abs() < 1e-14);
    }

    #[test]
    fn quartic_family_rejects_bad_parameters() {
        assert!(quartic_interface_1d(0.0, 1.0, 2.0, 0.0).is_err());
        assert!(quartic_interface_1d(1.0, 1.0, 2.0, 0.0).is_err());
        assert!(quartic_interface_1d(0.5, -1.0, 2.0, 0.0).is_err());
        assert!(quartic_interface_1d(0.5, 1.0, 2.0, -0.5).is_err());
    }

    fn fd_laplacian(f: impl Fn([f64; 2]) -> f64, p: [f64; 2]) -> f64 {
        let h = 1e-4;
        (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h]) + f([p[0], p[1] - h])
            - 4.0 * f(p))
            / (h * h)
    }

    fn check_pde_2d(p: &Problem2d) {
        let s = p.domain;
        let n = 10;
        for i in 0..n {
            for j in 0..n {
                let x = s.lo + (i as f64 + 0.5) / n as f64 * s.side_length();
                let y = s.lo + (j as f64 + 0.5) / n as f64 * s.side_length();
                let pt = [x, y];
                if p.interface.radius > 0.0 && p.interface.level_set(pt).abs() < 0.05 {
                    continue;
                }
                let side = p.side_of(pt);
                let beta = p.beta.on(side);
                let resid = -beta * fd_laplacian(|z| p.exact_u(z, side), pt)
                    + p.q * p.exact_u(pt, side)
                    - p.source(pt, side);
                let scale = p.source(pt, side).abs().max(1.0);
                assert!(
                    resid.abs() <= 1e-6 * scale,
                    "pde residual {resid} at {pt:?}"
                );
                let h = 1e-6;
                let gx = (p.exact_u([x + h, y], side) - p.exact_u([x - h, y], side)) / (2.0 * h);
                let gy = (p.exact_u([x, y + h], side) - p.exact_u([x, y - h], side)) / (2.0 * h);
                let g = p.exact_grad(pt, side);
                assert!((gx - g[0]).abs() < 1e-6 && (gy - g[1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn trig_problem_satisfies_the_pde() {
        check_pde_2d(&trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap());
        check_pde_2d(&trig_circle_2d(100.0, 1.0, 1.0, 0.9).unwrap());
        check_pde_2d(&trig_circle_2d(1.0, 1.0, 0.0, 0.0).unwrap());
    }

    #[test]
    fn r2r4_problem_satisfies_the_pde() {
        check_pde_2d(&radial_r2r4_2d(1.0, 1000.0, 0.0).unwrap());
        check_pde_2d(&radial_r2r4_2d(1000.0, 1.0, 0.0).unwrap());
    }

    #[test]
    fn trig_source_inner_value() {
        let p = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let pt = [0.3, 0.2];
        let want = 2.0 * 100.0 * 0.3_f64.sin() * 0.2_f64.cos();
        assert!((p.source(pt, Side::Minus) - want).abs() < 1e-12);
    }

    #[test]
    fn solutions_are_continuous_across_the_circle() {
        for p in [
            trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap(),
            radial_r2r4_2d(1.0, 1000.0, 0.0).unwrap(),
        ] {
            for k in 0..64 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                let pt = p.interface.point_at_angle(theta);
                let jump = p.exact_u(pt, Side::Plus) - p.exact_u(pt, Side::Minus);
                assert!(jump.abs() < 1e-12, "jump {jump} at angle {theta}");
            }
        }
    }

    #[test]
    fn flux_jump_matches_closed_forms() {
        let trig = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let r2r4 = radial_r2r4_2d(1.0, 1000.0, 0.0).unwrap();
        for k in 0..100 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let pt = trig.interface.point_at_angle(theta);
            let n = trig.interface.normal_at(pt);
            let g = trig.exact_grad(pt, Side::Plus);
            let want = (1.0 - 100.0) * (g[0] * n[0] + g[1] * n[1]);
            assert!((trig.flux_jump(pt) - want).abs() < 1e-10);

            let pt = r2r4.interface.point_at_angle(theta);
            // d(r^4)/dr = 4 at r = 1, d(r^2)/dr = 2.
            let want = 4.0 * 1000.0 - 2.0 * 1.0;
            assert!((r2r4.flux_jump(pt) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn radius_zero_means_everything_is_plus() {
        let p = trig_circle_2d(100.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.side_of([0.0, 0.0]), Side::Plus);
        assert_eq!(p.side_of([0.5, -0.3]), Side::Plus);
        assert_eq!(p.flux_jump([0.5, 0.0]), 0.0);
    }
}
