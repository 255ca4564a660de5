//! Error norms against the manufactured exact solutions.

use crate::cut2d::{chords, classify, side_regions};
use crate::error::{Error, Result};
use crate::fem2d::Solution2d;
use crate::flux1d::{flux_report, FluxReport1d};
use crate::ifem1d::Solution1d;
use crate::problems::{Problem1d, Problem2d, Side};
use crate::quadrature::{gauss_interval, triangle_rule, IntervalRule};

/// Discretization errors of a 1D solution: nodal sup norm, integral norms,
/// and the recovered-flux errors at the interface and boundary.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport1d {
    pub linf_nodal: f64,
    pub l2: f64,
    pub h1_semi: f64,
    /// Error of the recovered left derivative `gamma_minus / beta_minus`.
    pub ux_minus: f64,
    /// Error of the recovered right derivative `-gamma_plus / beta_plus`.
    pub ux_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gamma_0: f64,
    pub gamma_1: f64,
}

fn rule() -> IntervalRule {
    gauss_interval(4).expect("4-point rule is tabulated")
}

/// Nodal, integral, and flux errors of `sol` against the exact solution.
pub fn error_norms_1d(sol: &Solution1d, problem: &Problem1d) -> Result<ErrorReport1d> {
    let basis = &sol.basis;
    if (basis.alpha - problem.alpha).abs() > 1e-14 {
        return Err(Error::Parameter(format!(
            "solution interface {} does not match problem interface {}",
            basis.alpha, problem.alpha
        )));
    }
    let grid = &basis.grid;
    let mut linf_nodal = 0.0f64;
    for i in 0..grid.n_nodes() {
        let x = grid.node(i);
        let exact = problem.exact_u(x, problem.side_of(x));
        linf_nodal = linf_nodal.max((sol.values[i] - exact).abs());
    }

    let rule = rule();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for e in 0..grid.n_elements() {
        for piece in basis.element_pieces(e) {
            let len = piece.b - piece.a;
            if len <= 0.0 {
                continue;
            }
            for (&xq, &wq) in rule.points.iter().zip(&rule.weights) {
                let x = piece.a + len * xq;
                let w = wq * len;
                let err = sol.evaluate(x) - problem.exact_u(x, piece.side);
                let derr =
                    sol.evaluate_derivative(x, piece.side) - problem.exact_du(x, piece.side);
                l2 += w * err * err;
                h1 += w * derr * derr;
            }
        }
    }

    let report: FluxReport1d = flux_report(sol, problem);
    let a = problem.alpha;
    let ux_minus_exact = problem.exact_du(a, Side::Minus);
    let ux_plus_exact = problem.exact_du(a, Side::Plus);
    let flux_minus_exact = problem.beta.on(Side::Minus) * ux_minus_exact;
    let flux_plus_exact = problem.beta.on(Side::Plus) * ux_plus_exact;
    Ok(ErrorReport1d {
        linf_nodal,
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        ux_minus: (report.ux_minus - ux_minus_exact).abs(),
        ux_plus: (report.ux_plus - ux_plus_exact).abs(),
        gamma_minus: (report.gamma_minus - flux_minus_exact).abs(),
        gamma_plus: (report.gamma_plus + flux_plus_exact).abs(),
        gamma_0: (report.gamma_0 + problem.beta.on(Side::Minus) * problem.exact_du(0.0, Side::Minus))
            .abs(),
        gamma_1: (report.gamma_1 - problem.beta.on(Side::Plus) * problem.exact_du(1.0, Side::Plus))
            .abs(),
    })
}

/// Discretization errors of a 2D solution. The flux errors are L2 norms
/// over the interface polyline of the normal flux against the exact
/// `v . n` per side; solutions without flux unknowns fall back to the
/// broken-gradient flux `-beta_s grad u_h . n` there, and report zero for
/// the tube flux norm.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport2d {
    pub linf_nodal: f64,
    pub l2: f64,
    pub h1_semi: f64,
    pub flux_minus: f64,
    pub flux_plus: f64,
    /// L2 error of v over the tube (both sides).
    pub v_l2_tube: f64,
}

/// Nodal, integral, and interface-flux errors of a 2D solution.
pub fn error_norms_2d(sol: &Solution2d, problem: &Problem2d) -> Result<ErrorReport2d> {
    let mesh = &sol.mesh;
    if mesh.domain != problem.domain {
        return Err(Error::Parameter(format!(
            "solution domain {:?} does not match problem domain {:?}",
            mesh.domain, problem.domain
        )));
    }
    if let Some(tube) = &sol.tube {
        if tube.circle != problem.interface {
            return Err(Error::Parameter(format!(
                "solution interface {:?} does not match problem interface {:?}",
                tube.circle, problem.interface
            )));
        }
    }
    let owned_classes;
    let classes = match &sol.tube {
        Some(tube) => &tube.classes,
        None => {
            owned_classes = classify(mesh, &problem.interface)?;
            &owned_classes
        }
    };

    let mut linf_nodal = 0.0f64;
    for n in 0..mesh.n_nodes() {
        let p = mesh.nodes[n];
        let exact = problem.exact_u(p, problem.side_of(p));
        linf_nodal = linf_nodal.max((sol.u[n] - exact).abs());
    }

    let rule = triangle_rule(3).expect("order-3 rule is tabulated");
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for t in 0..mesh.n_triangles() {
        let verts = mesh.vertices(t);
        let grad = sol.grad_u(t);
        let nodes = mesh.triangles[t];
        for (side, tris) in side_regions(&classes[t], verts) {
            for tri in &tris {
                for (p, w) in rule.mapped(tri[0], tri[1], tri[2]) {
                    let lam = mesh.barycentric(t, p);
                    let uh: f64 = (0..3).map(|j| lam[j] * sol.u[nodes[j]]).sum();
                    let err = uh - problem.exact_u(p, side);
                    let g = problem.exact_grad(p, side);
                    let gerr = [grad[0] - g[0], grad[1] - g[1]];
                    l2 += w * err * err;
                    h1 += w * (gerr[0] * gerr[0] + gerr[1] * gerr[1]);
                }
            }
        }
    }

    // Interface flux error along the chord polyline, per side. Each chord
    // point is within O(h^2) of the circle, so exact fields are evaluated
    // at the chord point itself.
    let line = gauss_interval(2).expect("2-point rule is tabulated");
    let mut flux_sq = [0.0, 0.0];
    for (t, chord) in chords(classes) {
        let [p0, p1] = chord;
        let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
        let use_v = sol
            .tube
            .as_ref()
            .is_some_and(|tube| tube.member[t]);
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let p = [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])];
            let nrm = problem.interface.normal_at(p);
            for (slot, side) in [(0, Side::Minus), (1, Side::Plus)] {
                let vh_n = if use_v {
                    let v = sol.v_at(t, side, p).ok_or_else(|| {
                        Error::Geometry(format!("cut tube element {t} lacks {side:?} flux copies"))
                    })?;
                    v[0] * nrm[0] + v[1] * nrm[1]
                } else {
                    let g = sol.grad_u(t);
                    -problem.beta.on(side) * (g[0] * nrm[0] + g[1] * nrm[1])
                };
                let ve = problem.exact_flux(p, side);
                let diff = vh_n - (ve[0] * nrm[0] + ve[1] * nrm[1]);
                flux_sq[slot] += w * len * diff * diff;
            }
        }
    }

    let mut v_sq = 0.0;
    if let Some(tube) = &sol.tube {
        for &t in &tube.elements {
            let verts = mesh.vertices(t);
            for (side, tris) in side_regions(tube.class(t), verts) {
                for tri in &tris {
                    for (p, w) in rule.mapped(tri[0], tri[1], tri[2]) {
                        let vh = sol.v_at(t, side, p).ok_or_else(|| {
                            Error::Geometry(format!(
                                "tube element {t} lacks {side:?} flux copies"
                            ))
                        })?;
                        let ve = problem.exact_flux(p, side);
                        v_sq += w * ((vh[0] - ve[0]).powi(2) + (vh[1] - ve[1]).powi(2));
                    }
                }
            }
        }
    }

    Ok(ErrorReport2d {
        linf_nodal,
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        flux_minus: flux_sq[0].sqrt(),
        flux_plus: flux_sq[1].sqrt(),
        v_l2_tube: v_sq.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifem1d::{interpolate, solve, Grid1d};
    use crate::problems::{quartic_interface_1d, PiecewiseCoefficient};

    fn homogeneous_problem() -> Problem1d {
        Problem1d::custom(
            0.5,
            PiecewiseCoefficient::new(1.0, 1.0).unwrap(),
            0.0,
            Box::new(|_, _| 0.0),
            Box::new(|_, _| 0.0),
            Box::new(|_, _| 0.0),
        )
    }

    #[test]
    fn constant_error_function_has_unit_l2_norm() {
        let problem = homogeneous_problem();
        let sol = interpolate(&problem, Grid1d::new(8).unwrap()).unwrap();
        let ones = Solution1d::from_nodal_values(sol.basis.clone(), vec![1.0; 9]).unwrap();
        let report = error_norms_1d(&ones, &problem).unwrap();
        assert!((report.l2 - 1.0).abs() < 1e-13, "l2 {}", report.l2);
        assert!(report.h1_semi.abs() < 1e-13);
        assert!((report.linf_nodal - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interpolated_linear_solution_is_error_free() {
        // Matched coefficients keep u = 2x + 1 inside the space.
        let problem = Problem1d::custom(
            0.5,
            PiecewiseCoefficient::new(3.0, 3.0).unwrap(),
            0.0,
            Box::new(|x, _| 2.0 * x + 1.0),
            Box::new(|_, _| 2.0),
            Box::new(|_, _| 0.0),
        );
        let sol = interpolate(&problem, Grid1d::new(6).unwrap()).unwrap();
        let report = error_norms_1d(&sol, &problem).unwrap();
        for (name, v) in [
            ("linf", report.linf_nodal),
            ("l2", report.l2),
            ("h1", report.h1_semi),
            ("ux_minus", report.ux_minus),
            ("ux_plus", report.ux_plus),
            ("gamma_minus", report.gamma_minus),
            ("gamma_plus", report.gamma_plus),
            ("gamma_0", report.gamma_0),
            ("gamma_1", report.gamma_1),
        ] {
            assert!(v <= 1e-12, "{name} error {v} should vanish");
        }
    }

    #[test]
    fn integral_norms_match_dense_sampling() {
        let problem = quartic_interface_1d(1.0 / 3.0, 2.0, 10.0, 0.0).unwrap();
        let sol = solve(&problem, Grid1d::new(8).unwrap()).unwrap();
        let report = error_norms_1d(&sol, &problem).unwrap();

        // Independent trapezoid oracle, split at the interface.
        let samples = 10_000usize;
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for (lo, hi, side) in [
            (0.0, problem.alpha, Side::Minus),
            (problem.alpha, 1.0, Side::Plus),
        ] {
            let dx = (hi - lo) / samples as f64;
            for k in 0..=samples {
                let x = lo + k as f64 * dx;
                // Sample strictly inside to dodge one-sided breakpoints.
                let xs = x.clamp(lo + 1e-12, hi - 1e-12);
                let err = sol.evaluate(xs) - problem.exact_u(xs, side);
                let derr = sol.evaluate_derivative(xs, side) - problem.exact_du(xs, side);
                let w = if k == 0 || k == samples { 0.5 } else { 1.0 };
                l2 += w * dx * err * err;
                h1 += w * dx * derr * derr;
            }
        }
        let (l2, h1) = (l2.sqrt(), h1.sqrt());
        assert!(
            (report.l2 - l2).abs() < 0.01 * l2,
            "l2 {} vs oracle {l2}",
            report.l2
        );
        assert!(
            (report.h1_semi - h1).abs() < 0.01 * h1,
            "h1 {} vs oracle {h1}",
            report.h1_semi
        );
    }

    #[test]
    fn mismatched_interface_is_rejected() {
        let problem_a = quartic_interface_1d(0.3, 2.0, 10.0, 0.0).unwrap();
        let problem_b = quartic_interface_1d(0.5, 2.0, 10.0, 0.0).unwrap();
        let sol = solve(&problem_a, Grid1d::new(8).unwrap()).unwrap();
        assert!(error_norms_1d(&sol, &problem_b).is_err());
    }

    use crate::fem2d::interpolate_exact_fields;
    use crate::mesh2d::build_mesh;
    use crate::problems::{trig_circle_2d, Circle, Square};
    use crate::tube2d::extract_tube;

    #[test]
    fn interpolated_linear_solution_is_error_free_2d() {
        let problem = Problem2d::custom(
            Square { lo: -1.1, hi: 1.1 },
            Circle {
                center: [0.0, 0.0],
                radius: 0.9,
            },
            PiecewiseCoefficient::new(2.0, 2.0).unwrap(),
            0.0,
            Box::new(|p, _| 1.0 + 2.0 * p[0] - 3.0 * p[1]),
            Box::new(|_, _| [2.0, -3.0]),
            Box::new(|_, _| 0.0),
        );
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
        let sol = interpolate_exact_fields(&problem, &mesh, &tube);
        let report = error_norms_2d(&sol, &problem).unwrap();
        for (name, v) in [
            ("linf", report.linf_nodal),
            ("l2", report.l2),
            ("h1", report.h1_semi),
            ("flux_minus", report.flux_minus),
            ("flux_plus", report.flux_plus),
            ("v_l2", report.v_l2_tube),
        ] {
            assert!(v <= 1e-12, "{name} error {v} should vanish");
        }
    }

    #[test]
    fn integral_norms_match_dense_sampling_2d() {
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let sol = crate::fem2d::solve_standard_fem(&problem, &mesh).unwrap();
        let report = error_norms_2d(&sol, &problem).unwrap();

        // Independent oracle: subdivide every triangle 8 x 8 into congruent
        // sub-triangles and use their centroids as a midpoint rule.
        let k = 8usize;
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for t in 0..mesh.n_triangles() {
            let [a, b, c] = mesh.vertices(t);
            let grad = sol.grad_u(t);
            let sub_area = mesh.area(t) / (k * k) as f64;
            let point =
                |i: usize, j: usize| {
                    let (u, v) = (i as f64 / k as f64, j as f64 / k as f64);
                    [
                        a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
                        a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
                    ]
                };
            let mut centroids = Vec::new();
            for i in 0..k {
                for j in 0..(k - i) {
                    let (p0, p1, p2) = (point(i, j), point(i + 1, j), point(i, j + 1));
                    centroids.push([
                        (p0[0] + p1[0] + p2[0]) / 3.0,
                        (p0[1] + p1[1] + p2[1]) / 3.0,
                    ]);
                    if i + j < k - 1 {
                        let (q0, q1) = (point(i + 1, j + 1), point(i + 1, j));
                        centroids.push([
                            (q0[0] + q1[0] + p2[0]) / 3.0,
                            (q0[1] + q1[1] + p2[1]) / 3.0,
                        ]);
                    }
                }
            }
            for p in centroids {
                let side = problem.side_of(p);
                let lam = mesh.barycentric(t, p);
                let nodes = mesh.triangles[t];
                let uh: f64 = (0..3).map(|j| lam[j] * sol.u[nodes[j]]).sum();
                let err = uh - problem.exact_u(p, side);
                let g = problem.exact_grad(p, side);
                l2 += sub_area * err * err;
                h1 += sub_area * ((grad[0] - g[0]).powi(2) + (grad[1] - g[1]).powi(2));
            }
        }
        let (l2, h1) = (l2.sqrt(), h1.sqrt());
        assert!(
            (report.l2 - l2).abs() < 0.05 * l2,
            "l2 {} vs oracle {l2}",
            report.l2
        );
        assert!(
            (report.h1_semi - h1).abs() < 0.05 * h1,
            "h1 {} vs oracle {h1}",
            report.h1_semi
        );
    }

    #[test]
    fn interface_flux_errors_of_the_exact_interpolant_shrink() {
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mut reports = Vec::new();
        for n in [16, 32] {
            let mesh = build_mesh(problem.domain, n).unwrap();
            let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
            let sol = interpolate_exact_fields(&problem, &mesh, &tube);
            reports.push(error_norms_2d(&sol, &problem).unwrap());
        }
        for (name, get) in [
            ("flux_minus", (|r: &ErrorReport2d| r.flux_minus) as fn(&ErrorReport2d) -> f64),
            ("flux_plus", |r| r.flux_plus),
            ("v_l2", |r| r.v_l2_tube),
        ] {
            let (coarse, fine) = (get(&reports[0]), get(&reports[1]));
            assert!(
                fine < 0.4 * coarse,
                "{name}: {coarse} -> {fine} does not shrink at second order"
            );
        }
    }

    #[test]
    fn mismatched_domain_is_rejected_2d() {
        let trig = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let other = crate::problems::radial_r2r4_2d(1.0, 1000.0, 0.0).unwrap();
        let mesh = build_mesh(trig.domain, 8).unwrap();
        let sol = crate::fem2d::solve_standard_fem(&trig, &mesh).unwrap();
        assert!(error_norms_2d(&sol, &other).is_err());
    }
}
