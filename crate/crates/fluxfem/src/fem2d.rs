//! Augmented mixed finite elements on a non-body-fitted mesh.
//!
//! The base discretization is standard P1 Galerkin over the whole square,
//! with the coefficient integrated per side on cut triangles and a line
//! source along the interface polyline when the conormal flux jumps.
//! Inside the tube, the flux `v = -beta grad u` enters as a separate
//! nodal unknown tied to `u` by flux-identity rows
//! `(v, g) + (beta grad u, g) = 0` and per-side divergence rows
//! `(div v, w) + (qu, w) = (f, w)`, giving a rectangular system solved by
//! least squares. At the cut layer `v` carries one nodal vector per side
//! (see `tube2d`), so its interface jump is representable. All rows enter
//! the least-squares system unweighted.

use crate::cut2d::{classify, side_regions, ElementClass};
use crate::error::{Error, Result};
use crate::mesh2d::{triangle_area, TriMesh};
use crate::problems::{Problem2d, Side};
use crate::quadrature::{gauss_interval, triangle_rule, TriangleRule};
use crate::solver::{solve_least_squares, solve_spd, LsqMethod};
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::tube2d::TubeRegion;

/// Mapping of mesh nodes to unknown columns with Dirichlet lifting data.
#[derive(Debug, Clone)]
struct UnknownMap {
    /// Non-Dirichlet node of each u column, ascending.
    interior: Vec<usize>,
    /// u column of each mesh node, `None` on the boundary.
    u_col: Vec<Option<usize>>,
    /// Dirichlet value per node (zero at interior nodes).
    boundary_values: Vec<f64>,
}

fn unknown_map(problem: &Problem2d, mesh: &TriMesh) -> UnknownMap {
    let interior: Vec<usize> = (0..mesh.n_nodes()).filter(|&n| !mesh.boundary[n]).collect();
    let mut u_col = vec![None; mesh.n_nodes()];
    for (k, &n) in interior.iter().enumerate() {
        u_col[n] = Some(k);
    }
    let boundary_values = (0..mesh.n_nodes())
        .map(|n| {
            if mesh.boundary[n] {
                let p = mesh.nodes[n];
                problem.exact_u(p, problem.side_of(p))
            } else {
                0.0
            }
        })
        .collect();
    UnknownMap {
        interior,
        u_col,
        boundary_values,
    }
}

/// Rows of one block with block-local row indices; `entries` columns use
/// the global column layout (u columns, then v columns).
#[derive(Debug, Clone)]
struct RowBlock {
    n_rows: usize,
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl UnknownMap {
    /// Routes a u coefficient: interior nodes get a matrix entry, boundary
    /// nodes are lifted into the right-hand side.
    fn scatter_u(&self, block: &mut RowBlock, row: usize, node: usize, coef: f64) {
        match self.u_col[node] {
            Some(col) => block.entries.push((row, col, coef)),
            None => block.rhs[row] -= coef * self.boundary_values[node],
        }
    }
}

fn check_domain(problem: &Problem2d, mesh: &TriMesh) -> Result<()> {
    if mesh.domain != problem.domain {
        return Err(Error::Parameter(format!(
            "mesh domain {:?} does not match problem domain {:?}",
            mesh.domain, problem.domain
        )));
    }
    Ok(())
}

/// Galerkin rows, one per interior node: `(beta grad u, grad phi) +
/// (q u, phi) = (f, phi)` with per-side coefficients on cut triangles,
/// Dirichlet lifting, and the interface line source when the flux jumps.
fn assemble_galerkin_rows(
    problem: &Problem2d,
    mesh: &TriMesh,
    classes: &[ElementClass],
    map: &UnknownMap,
) -> Result<RowBlock> {
    let rule = triangle_rule(3)?;
    let line = gauss_interval(2)?;
    let mut block = RowBlock {
        n_rows: map.interior.len(),
        entries: Vec::new(),
        rhs: vec![0.0; map.interior.len()],
    };
    for t in 0..mesh.n_triangles() {
        let verts = mesh.vertices(t);
        let grads = mesh.p1_gradients(t);
        let nodes = mesh.triangles[t];
        for (side, tris) in side_regions(&classes[t], verts) {
            let beta = problem.beta.on(side);
            for tri in &tris {
                let area = triangle_area(*tri);
                let pts = rule.mapped(tri[0], tri[1], tri[2]);
                let lams: Vec<[f64; 3]> = pts.iter().map(|&(p, _)| mesh.barycentric(t, p)).collect();
                let loads: Vec<f64> = pts.iter().map(|&(p, _)| problem.source(p, side)).collect();
                for i in 0..3 {
                    let Some(row) = map.u_col[nodes[i]] else {
                        continue;
                    };
                    for j in 0..3 {
                        let mut coef =
                            beta * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]) * area;
                        if problem.q != 0.0 {
                            let mass: f64 = pts
                                .iter()
                                .zip(&lams)
                                .map(|(&(_, w), lam)| w * lam[i] * lam[j])
                                .sum();
                            coef += problem.q * mass;
                        }
                        map.scatter_u(&mut block, row, nodes[j], coef);
                    }
                    block.rhs[row] += pts
                        .iter()
                        .zip(&lams)
                        .zip(&loads)
                        .map(|((&(_, w), lam), &fx)| w * lam[i] * fx)
                        .sum::<f64>();
                }
            }
        }
        if let ElementClass::Cut(cut) = &classes[t] {
            // Line source along the true arc between the chord endpoints;
            // quadrature points sit exactly on the circle so the source
            // sees no polyline offset.
            use std::f64::consts::{PI, TAU};
            let [p0, p1] = cut.chord;
            let c = problem.interface.center;
            let r = problem.interface.radius;
            let th0 = (p0[1] - c[1]).atan2(p0[0] - c[0]);
            let th1 = (p1[1] - c[1]).atan2(p1[0] - c[0]);
            let mut dth = th1 - th0;
            if dth > PI {
                dth -= TAU;
            } else if dth < -PI {
                dth += TAU;
            }
            let len = r * dth.abs();
            for (&s, &w) in line.points.iter().zip(&line.weights) {
                let th = th0 + s * dth;
                let p = [c[0] + r * th.cos(), c[1] + r * th.sin()];
                let jump = problem.flux_jump(p);
                let lam = mesh.barycentric(t, p);
                for i in 0..3 {
                    if let Some(row) = map.u_col[nodes[i]] {
                        block.rhs[row] -= w * len * jump * lam[i];
                    }
                }
            }
        }
    }
    Ok(block)
}

/// Piece integrals needed by the augmented rows: for one sub-triangle of
/// element `t`, the mass couplings and basis integrals of the parent P1
/// basis.
struct PieceIntegrals {
    /// `mass[i][j]` = integral of `phi_i phi_j` over the piece.
    mass: [[f64; 3]; 3],
    /// `phi[i]` = integral of `phi_i` over the piece.
    phi: [f64; 3],
    /// Integral of the source over the piece.
    load: f64,
}

fn piece_integrals(
    rule: &TriangleRule,
    mesh: &TriMesh,
    t: usize,
    tri: &[[f64; 2]; 3],
    problem: &Problem2d,
    side: Side,
) -> PieceIntegrals {
    let pts = rule.mapped(tri[0], tri[1], tri[2]);
    let mut out = PieceIntegrals {
        mass: [[0.0; 3]; 3],
        phi: [0.0; 3],
        load: 0.0,
    };
    for &(p, w) in &pts {
        let lam = mesh.barycentric(t, p);
        for i in 0..3 {
            out.phi[i] += w * lam[i];
            for j in 0..3 {
                out.mass[i][j] += w * lam[i] * lam[j];
            }
        }
        out.load += w * problem.source(p, side);
    }
    out
}

/// Flux-identity rows: for each side copy of each tube node and each
/// coordinate direction, `(v, g) + (beta grad u, g) = 0` with the test
/// function `g = phi e_d` restricted to that side of the tube elements.
fn assemble_flux_identity_rows(
    problem: &Problem2d,
    mesh: &TriMesh,
    tube: &TubeRegion,
    map: &UnknownMap,
) -> Result<RowBlock> {
    let rule = triangle_rule(3)?;
    let n_u = map.interior.len();
    let mut elems_of_node: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_nodes()];
    for &t in &tube.elements {
        for &n in &mesh.triangles[t] {
            elems_of_node[n].push(t);
        }
    }
    let n_rows = 2 * tube.n_copies();
    let mut block = RowBlock {
        n_rows,
        entries: Vec::new(),
        rhs: vec![0.0; n_rows],
    };
    for (k, &(node, side)) in tube.copies.iter().enumerate() {
        let beta = problem.beta.on(side);
        for &t in &elems_of_node[node] {
            let verts = mesh.vertices(t);
            let grads = mesh.p1_gradients(t);
            let nodes = mesh.triangles[t];
            let loc = (0..3)
                .find(|&i| nodes[i] == node)
                .expect("adjacency lists only elements containing the node");
            for (region_side, tris) in side_regions(tube.class(t), verts) {
                if region_side != side {
                    continue;
                }
                for tri in &tris {
                    let ints = piece_integrals(&rule, mesh, t, tri, problem, side);
                    for j in 0..3 {
                        let copy = tube.copy_index(nodes[j], side).ok_or_else(|| {
                            Error::Geometry(format!(
                                "node {} of tube element {t} lacks a {side:?} flux copy",
                                nodes[j]
                            ))
                        })?;
                        for d in 0..2 {
                            block
                                .entries
                                .push((2 * k + d, n_u + 2 * copy + d, ints.mass[loc][j]));
                        }
                        for d in 0..2 {
                            let coef = beta * grads[j][d] * ints.phi[loc];
                            map.scatter_u(&mut block, 2 * k + d, nodes[j], coef);
                        }
                    }
                }
            }
        }
    }
    Ok(block)
}

/// Divergence rows: one per side region of each tube element,
/// `(div v, w) + (q u, w) = (f, w)` with `w` the region indicator.
/// Returns the `(element, side)` owner of each row alongside the block.
fn assemble_divergence_rows(
    problem: &Problem2d,
    mesh: &TriMesh,
    tube: &TubeRegion,
    map: &UnknownMap,
) -> Result<(RowBlock, Vec<(usize, Side)>)> {
    let rule = triangle_rule(3)?;
    let n_u = map.interior.len();
    let mut block = RowBlock {
        n_rows: 0,
        entries: Vec::new(),
        rhs: Vec::new(),
    };
    let mut owners = Vec::new();
    for &t in &tube.elements {
        let verts = mesh.vertices(t);
        let grads = mesh.p1_gradients(t);
        let nodes = mesh.triangles[t];
        for (side, tris) in side_regions(tube.class(t), verts) {
            let row = block.n_rows;
            block.n_rows += 1;
            block.rhs.push(0.0);
            owners.push((t, side));
            let area: f64 = tris.iter().map(|tri| triangle_area(*tri)).sum();
            for j in 0..3 {
                let copy = tube.copy_index(nodes[j], side).ok_or_else(|| {
                    Error::Geometry(format!(
                        "node {} of tube element {t} lacks a {side:?} flux copy",
                        nodes[j]
                    ))
                })?;
                for d in 0..2 {
                    block.entries.push((row, n_u + 2 * copy + d, grads[j][d] * area));
                }
            }
            for tri in &tris {
                let ints = piece_integrals(&rule, mesh, t, tri, problem, side);
                if problem.q != 0.0 {
                    for j in 0..3 {
                        map.scatter_u(&mut block, row, nodes[j], problem.q * ints.phi[j]);
                    }
                }
                block.rhs[row] += ints.load;
            }
        }
    }
    Ok((block, owners))
}

/// The assembled rectangular least-squares system.
#[derive(Debug, Clone)]
pub struct AugmentedSystem2d {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Number of u columns; v columns follow as `n_u + 2 * copy + d`.
    pub n_u: usize,
    /// Row counts of the galerkin and flux-identity blocks, in row order;
    /// divergence rows fill the remainder.
    pub n_galerkin: usize,
    pub n_flux: usize,
    /// `(element, side)` owner of each divergence row.
    pub div_rows: Vec<(usize, Side)>,
    /// Interior node of each u column.
    pub interior: Vec<usize>,
    /// u column per node, `None` on the boundary.
    pub u_col: Vec<Option<usize>>,
    /// Dirichlet value per node (zero at interior nodes).
    pub boundary_values: Vec<f64>,
}

impl AugmentedSystem2d {
    /// Stacks nodal fields into an unknown vector in column order.
    pub fn pack(&self, u: &[f64], v: &[[f64; 2]]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.matrix.n_cols());
        for &n in &self.interior {
            x.push(u[n]);
        }
        for vk in v {
            x.push(vk[0]);
            x.push(vk[1]);
        }
        x
    }

    /// `A x - b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.matrix.mul_vec(x)?;
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        Ok(r)
    }
}

/// Assembles the rectangular system: galerkin rows, then flux-identity
/// rows, then divergence rows, all unweighted.
pub fn assemble_augmented(
    problem: &Problem2d,
    mesh: &TriMesh,
    tube: &TubeRegion,
) -> Result<AugmentedSystem2d> {
    check_domain(problem, mesh)?;
    let map = unknown_map(problem, mesh);
    let galerkin = assemble_galerkin_rows(problem, mesh, &tube.classes, &map)?;
    let flux = assemble_flux_identity_rows(problem, mesh, tube, &map)?;
    let (div, div_rows) = assemble_divergence_rows(problem, mesh, tube, &map)?;
    let n_u = map.interior.len();
    let n_cols = n_u + 2 * tube.n_copies();
    let n_rows = galerkin.n_rows + flux.n_rows + div.n_rows;
    if n_rows < n_cols {
        return Err(Error::Dimension(format!(
            "augmented system has {n_rows} rows for {n_cols} columns"
        )));
    }
    let mut b = TripletBuilder::new(n_rows, n_cols);
    let mut rhs = Vec::with_capacity(n_rows);
    let mut offset = 0;
    for block in [&galerkin, &flux, &div] {
        for &(r, c, val) in &block.entries {
            b.push(offset + r, c, val);
        }
        rhs.extend_from_slice(&block.rhs);
        offset += block.n_rows;
    }
    Ok(AugmentedSystem2d {
        matrix: b.finalize(),
        rhs,
        n_u,
        n_galerkin: galerkin.n_rows,
        n_flux: flux.n_rows,
        div_rows,
        interior: map.interior,
        u_col: map.u_col,
        boundary_values: map.boundary_values,
    })
}

/// A computed 2D solution: u on every node, flux copies on tube nodes
/// when the augmented path produced them.
#[derive(Debug, Clone)]
pub struct Solution2d {
    pub mesh: TriMesh,
    pub tube: Option<TubeRegion>,
    pub u: Vec<f64>,
    /// Flux vectors parallel to `tube.copies`; empty for the standard
    /// solver.
    pub v: Vec<[f64; 2]>,
}

impl Solution2d {
    /// P1 gradient of u on triangle `t`.
    pub fn grad_u(&self, t: usize) -> [f64; 2] {
        let grads = self.mesh.p1_gradients(t);
        let nodes = self.mesh.triangles[t];
        let mut g = [0.0, 0.0];
        for j in 0..3 {
            g[0] += grads[j][0] * self.u[nodes[j]];
            g[1] += grads[j][1] * self.u[nodes[j]];
        }
        g
    }

    pub fn evaluate_u(&self, p: [f64; 2]) -> Option<f64> {
        let t = self.mesh.locate(p)?;
        let lam = self.mesh.barycentric(t, p);
        let nodes = self.mesh.triangles[t];
        Some((0..3).map(|j| lam[j] * self.u[nodes[j]]).sum())
    }

    /// Side-`side` flux field of triangle `t` evaluated at `p` from its
    /// vertex copies; `None` when any copy is missing.
    pub fn v_at(&self, t: usize, side: Side, p: [f64; 2]) -> Option<[f64; 2]> {
        let tube = self.tube.as_ref()?;
        let lam = self.mesh.barycentric(t, p);
        let nodes = self.mesh.triangles[t];
        let mut out = [0.0, 0.0];
        for j in 0..3 {
            let copy = tube.copy_index(nodes[j], side)?;
            out[0] += lam[j] * self.v[copy][0];
            out[1] += lam[j] * self.v[copy][1];
        }
        Some(out)
    }
}

fn scatter_u_full(sys: &AugmentedSystem2d, x: &[f64], n_nodes: usize) -> Vec<f64> {
    (0..n_nodes)
        .map(|n| match sys.u_col[n] {
            Some(col) => x[col],
            None => sys.boundary_values[n],
        })
        .collect()
}

/// Solves the augmented least-squares system.
pub fn solve_augmented(
    problem: &Problem2d,
    mesh: &TriMesh,
    tube: &TubeRegion,
    method: LsqMethod,
) -> Result<Solution2d> {
    let sys = assemble_augmented(problem, mesh, tube)?;
    let x = solve_least_squares(&sys.matrix, &sys.rhs, method).map_err(|e| match e {
        Error::RankDeficient(msg) => Error::RankDeficient(format!(
            "{msg} (tube eps = {}, {} flux copies)",
            tube.epsilon,
            tube.n_copies()
        )),
        other => other,
    })?;
    let u = scatter_u_full(&sys, &x, mesh.n_nodes());
    let v = (0..tube.n_copies())
        .map(|k| [x[sys.n_u + 2 * k], x[sys.n_u + 2 * k + 1]])
        .collect();
    Ok(Solution2d {
        mesh: mesh.clone(),
        tube: Some(tube.clone()),
        u,
        v,
    })
}

/// Standard P1 solve (galerkin rows only) as the baseline: the square SPD
/// block of the augmented system.
pub fn solve_standard_fem(problem: &Problem2d, mesh: &TriMesh) -> Result<Solution2d> {
    check_domain(problem, mesh)?;
    let classes = classify(mesh, &problem.interface)?;
    let map = unknown_map(problem, mesh);
    let block = assemble_galerkin_rows(problem, mesh, &classes, &map)?;
    let n = map.interior.len();
    let mut b = TripletBuilder::new(n, n);
    for &(r, c, v) in &block.entries {
        b.push(r, c, v);
    }
    let x = solve_spd(&b.finalize(), &block.rhs)?;
    let sys_like = AugmentedSystem2d {
        matrix: TripletBuilder::new(0, 0).finalize(),
        rhs: Vec::new(),
        n_u: n,
        n_galerkin: n,
        n_flux: 0,
        div_rows: Vec::new(),
        interior: map.interior,
        u_col: map.u_col,
        boundary_values: map.boundary_values,
    };
    let u = scatter_u_full(&sys_like, &x, mesh.n_nodes());
    Ok(Solution2d {
        mesh: mesh.clone(),
        tube: None,
        u,
        v: Vec::new(),
    })
}

/// Nodal interpolants of the exact fields: u at every node, `-beta grad u`
/// at every flux copy. Used for consistency checks and flux sampling
/// oracles.
pub fn interpolate_exact_fields(
    problem: &Problem2d,
    mesh: &TriMesh,
    tube: &TubeRegion,
) -> Solution2d {
    let u = (0..mesh.n_nodes())
        .map(|n| {
            let p = mesh.nodes[n];
            problem.exact_u(p, problem.side_of(p))
        })
        .collect();
    let v = tube
        .copies
        .iter()
        .map(|&(node, side)| problem.exact_flux(mesh.nodes[node], side))
        .collect();
    Solution2d {
        mesh: mesh.clone(),
        tube: Some(tube.clone()),
        u,
        v,
    }
}

/// One interface sample: the flux unknown and the broken gradient flux,
/// each from both sides.
#[derive(Debug, Clone, Copy)]
pub struct FluxSample2d {
    pub angle: f64,
    pub point: [f64; 2],
    /// `v_h . n` from the minus and plus side.
    pub v_normal: [f64; 2],
    /// `beta_s grad u_h . n` from the minus and plus side.
    pub grad_normal: [f64; 2],
}

/// Samples both flux representations at `n_samples` uniform angles on the
/// interface circle. The gradient is read from the triangle containing a
/// point nudged off the interface by `h/100` per side; the flux unknown is
/// read from that triangle's side copies at the interface point itself.
pub fn extract_interface_flux(
    sol: &Solution2d,
    problem: &Problem2d,
    n_samples: usize,
) -> Result<Vec<FluxSample2d>> {
    let tube = sol.tube.as_ref().ok_or_else(|| {
        Error::Parameter("flux sampling needs an augmented solution with flux unknowns".into())
    })?;
    if tube.circle != problem.interface {
        return Err(Error::Parameter(format!(
            "solution interface {:?} does not match problem interface {:?}",
            tube.circle, problem.interface
        )));
    }
    let circle = &tube.circle;
    if circle.radius <= 0.0 {
        return Err(Error::Parameter(
            "flux sampling needs an interface of positive radius".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::Parameter("flux sampling needs at least one sample".into()));
    }
    let delta = sol.mesh.h / 100.0;
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / n_samples as f64;
        let point = circle.point_at_angle(angle);
        let normal = circle.normal_at(point);
        let mut v_normal = [0.0, 0.0];
        let mut grad_normal = [0.0, 0.0];
        for (slot, side, sign) in [(0, Side::Minus, -1.0), (1, Side::Plus, 1.0)] {
            let probe = [
                point[0] + sign * delta * normal[0],
                point[1] + sign * delta * normal[1],
            ];
            let t = sol.mesh.locate(probe).ok_or_else(|| {
                Error::Geometry(format!("interface sample {probe:?} falls outside the mesh"))
            })?;
            let g = sol.grad_u(t);
            grad_normal[slot] = problem.beta.on(side) * (g[0] * normal[0] + g[1] * normal[1]);
            let v = sol.v_at(t, side, point).ok_or_else(|| {
                Error::Geometry(format!(
                    "triangle {t} at angle {angle:.3} lacks {side:?} flux copies; widen the tube"
                ))
            })?;
            v_normal[slot] = v[0] * normal[0] + v[1] * normal[1];
        }
        out.push(FluxSample2d {
            angle,
            point,
            v_normal,
            grad_normal,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh2d::build_mesh;
    use crate::problems::{trig_circle_2d, Circle, PiecewiseCoefficient, Square};
    use crate::sparse::norm2;
    use crate::tube2d::extract_tube;

    fn linear_problem(radius: f64) -> Problem2d {
        // u = 1 + 2x - 3y with constant beta = 2: f = 0, no flux jump even
        // across a nominal interface circle.
        Problem2d::custom(
            Square { lo: -1.1, hi: 1.1 },
            Circle {
                center: [0.0, 0.0],
                radius,
            },
            PiecewiseCoefficient::new(2.0, 2.0).unwrap(),
            0.0,
            Box::new(|p, _| 1.0 + 2.0 * p[0] - 3.0 * p[1]),
            Box::new(|_, _| [2.0, -3.0]),
            Box::new(|_, _| 0.0),
        )
    }

    fn trig_setup(n: usize, q: f64) -> (Problem2d, TriMesh, TubeRegion) {
        let problem = trig_circle_2d(100.0, 1.0, q, 0.9).unwrap();
        let mesh = build_mesh(problem.domain, n).unwrap();
        let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
        (problem, mesh, tube)
    }

    #[test]
    fn stiffness_rows_sum_to_zero_for_constant_coefficient() {
        let problem = trig_circle_2d(1.0, 1.0, 0.0, 0.9).unwrap();
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let classes = classify(&mesh, &problem.interface).unwrap();
        let map = unknown_map(&problem, &mesh);
        let block = assemble_galerkin_rows(&problem, &mesh, &classes, &map).unwrap();
        // Central node: all its neighbors are interior, so the full row is
        // visible in the entries and must kill constants.
        let center = 4 * 9 + 4;
        let row = map.u_col[center].unwrap();
        let sum: f64 = block
            .entries
            .iter()
            .filter(|&&(r, _, _)| r == row)
            .map(|&(_, _, v)| v)
            .sum();
        assert!(sum.abs() < 1e-13, "constant survives the stiffness row: {sum}");
    }

    #[test]
    fn u_block_is_symmetric() {
        let (problem, mesh, _) = trig_setup(8, 1.0);
        let classes = classify(&mesh, &problem.interface).unwrap();
        let map = unknown_map(&problem, &mesh);
        let block = assemble_galerkin_rows(&problem, &mesh, &classes, &map).unwrap();
        let n = map.interior.len();
        let mut b = TripletBuilder::new(n, n);
        for &(r, c, v) in &block.entries {
            b.push(r, c, v);
        }
        let a = b.finalize();
        let mut worst = 0.0f64;
        for (r, c, v) in a.entries() {
            worst = worst.max((v - a.get(c, r)).abs());
        }
        assert!(worst <= 1e-14 * a.max_abs(), "asymmetry {worst}");
    }

    #[test]
    fn linear_solution_is_reproduced_by_both_solvers() {
        let problem = linear_problem(0.5);
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();

        let std_sol = solve_standard_fem(&problem, &mesh).unwrap();
        for (n, &u) in std_sol.u.iter().enumerate() {
            let p = mesh.nodes[n];
            let want = 1.0 + 2.0 * p[0] - 3.0 * p[1];
            assert!((u - want).abs() < 1e-12, "standard u at node {n}");
        }

        let aug = solve_augmented(&problem, &mesh, &tube, LsqMethod::Svd).unwrap();
        for (n, &u) in aug.u.iter().enumerate() {
            let p = mesh.nodes[n];
            let want = 1.0 + 2.0 * p[0] - 3.0 * p[1];
            assert!((u - want).abs() < 1e-10, "augmented u at node {n}");
        }
        // v = -beta grad u = (-4, 6) everywhere, and the consistent system
        // leaves no residual.
        for (k, v) in aug.v.iter().enumerate() {
            assert!(
                (v[0] + 4.0).abs() < 1e-9 && (v[1] - 6.0).abs() < 1e-9,
                "flux copy {k} = {v:?}"
            );
        }
        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        let r = sys.residual(&sys.pack(&aug.u, &aug.v)).unwrap();
        assert!(norm2(&r) <= 1e-10 * (1.0 + norm2(&sys.rhs)));
    }

    #[test]
    fn exact_linear_fields_zero_every_row() {
        let problem = linear_problem(0.5);
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        let exact = interpolate_exact_fields(&problem, &mesh, &tube);
        let r = sys.residual(&sys.pack(&exact.u, &exact.v)).unwrap();
        let worst = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(worst <= 1e-12, "worst row residual {worst}");
    }

    #[test]
    fn flux_mass_block_is_symmetric_positive_definite() {
        let (problem, mesh, tube) = trig_setup(8, 0.0);
        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        let nv = 2 * tube.n_copies();
        let mut m = vec![vec![0.0; nv]; nv];
        for r in 0..sys.n_flux {
            let (cols, vals) = sys.matrix.row(sys.n_galerkin + r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c >= sys.n_u {
                    m[r][c - sys.n_u] = v;
                }
            }
        }
        let scale = m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        for i in 0..nv {
            for j in 0..nv {
                assert!((m[i][j] - m[j][i]).abs() <= 1e-14 * scale, "asymmetry at ({i}, {j})");
            }
        }
        // Deterministic pseudo-random probes for positive definiteness.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..5 {
            let x: Vec<f64> = (0..nv).map(|_| next()).collect();
            let mut quad = 0.0;
            for i in 0..nv {
                for j in 0..nv {
                    quad += x[i] * m[i][j] * x[j];
                }
            }
            assert!(quad > 0.0, "mass form not positive: {quad}");
        }
    }

    #[test]
    fn cut_piece_integrals_add_up_to_the_whole_triangle() {
        let (problem, mesh, tube) = trig_setup(8, 0.0);
        let rule = triangle_rule(3).unwrap();
        let t = (0..mesh.n_triangles())
            .find(|&t| matches!(tube.class(t), ElementClass::Cut(_)))
            .unwrap();
        let verts = mesh.vertices(t);
        let whole = piece_integrals(&rule, &mesh, t, &verts, &problem, Side::Plus);
        let mut mass_sum = [[0.0; 3]; 3];
        let mut phi_sum = [0.0; 3];
        for (_, tris) in side_regions(tube.class(t), verts) {
            for tri in &tris {
                let ints = piece_integrals(&rule, &mesh, t, tri, &problem, Side::Plus);
                for i in 0..3 {
                    phi_sum[i] += ints.phi[i];
                    for j in 0..3 {
                        mass_sum[i][j] += ints.mass[i][j];
                    }
                }
            }
        }
        let scale = mesh.area(t);
        for i in 0..3 {
            assert!((phi_sum[i] - whole.phi[i]).abs() <= 1e-14 * scale);
            for j in 0..3 {
                assert!((mass_sum[i][j] - whole.mass[i][j]).abs() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn divergence_rows_see_constants_and_linear_fields_exactly() {
        // u = 0 on the boundary and inside, q = 0, f = 0: the divergence
        // rows reduce to (div v) * area of their region.
        let problem = Problem2d::custom(
            Square { lo: -1.1, hi: 1.1 },
            Circle {
                center: [0.0, 0.0],
                radius: 0.9,
            },
            PiecewiseCoefficient::new(1.0, 1.0).unwrap(),
            0.0,
            Box::new(|_, _| 0.0),
            Box::new(|_, _| [0.0, 0.0]),
            Box::new(|_, _| 0.0),
        );
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        let u = vec![0.0; mesh.n_nodes()];

        let constant: Vec<[f64; 2]> = vec![[3.0, -7.0]; tube.n_copies()];
        let r = sys.residual(&sys.pack(&u, &constant)).unwrap();
        let div_rows = &r[sys.n_galerkin + sys.n_flux..];
        let worst = div_rows.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(worst <= 1e-13, "constant flux has divergence: {worst}");

        // v = (x, y) has divergence 2, so each row reads 2 * region area.
        let radial: Vec<[f64; 2]> = tube
            .copies
            .iter()
            .map(|&(node, _)| mesh.nodes[node])
            .collect();
        let r = sys.residual(&sys.pack(&u, &radial)).unwrap();
        let div_rows = &r[sys.n_galerkin + sys.n_flux..];
        for (row, &(t, side)) in div_rows.iter().zip(&sys.div_rows) {
            let area: f64 = side_regions(tube.class(t), mesh.vertices(t))
                .into_iter()
                .filter(|(s, _)| *s == side)
                .flat_map(|(_, tris)| tris)
                .map(triangle_area)
                .sum();
            assert!(
                (row - 2.0 * area).abs() <= 1e-12,
                "row for ({t}, {side:?}): {row} vs {}",
                2.0 * area
            );
        }
    }

    #[test]
    fn exact_fields_satisfy_the_divergence_identity_off_the_cut() {
        let (problem, mesh, tube) = trig_setup(16, 1.0);
        let edge_rule = gauss_interval(4).unwrap();
        let rule = triangle_rule(3).unwrap();
        let mut checked = 0;
        for &t in &tube.elements {
            let ElementClass::Plain(side) = *tube.class(t) else {
                continue;
            };
            let verts = mesh.vertices(t);
            // Flux form of the equation over the element: the boundary flux
            // of v balances the reaction and source integrals.
            let mut boundary_flux = 0.0;
            for e in 0..3 {
                let a = verts[e];
                let b = verts[(e + 1) % 3];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let nrm = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
                boundary_flux += edge_rule.integrate(0.0, 1.0, |s| {
                    let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                    let v = problem.exact_flux(p, side);
                    (v[0] * nrm[0] + v[1] * nrm[1]) * len
                });
            }
            let bulk = rule.integrate(verts[0], verts[1], verts[2], |x, y| {
                let p = [x, y];
                problem.q * problem.exact_u(p, side) - problem.source(p, side)
            });
            let resid = boundary_flux + bulk;
            assert!(
                resid.abs() <= 1e-8 * (1.0 + problem.beta.on(side)),
                "triangle {t}: residual {resid}"
            );
            checked += 1;
        }
        assert!(checked > 50, "too few plain tube elements: {checked}");
    }

    #[test]
    fn interpolated_exact_fields_leave_a_shrinking_residual() {
        // Starts at N = 16: coarser meshes are dominated by the cut layer
        // and not yet in the asymptotic regime.
        let mut rels = Vec::new();
        for n in [16, 32, 64] {
            let (problem, mesh, tube) = trig_setup(n, 1.0);
            let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
            let exact = interpolate_exact_fields(&problem, &mesh, &tube);
            let r = sys.residual(&sys.pack(&exact.u, &exact.v)).unwrap();
            rels.push(norm2(&r) / norm2(&sys.rhs));
        }
        assert!(rels[0] < 0.2, "coarse relative residual {}", rels[0]);
        assert!(rels[1] < 0.75 * rels[0], "no decay: {rels:?}");
        assert!(rels[2] < 0.75 * rels[1], "no decay: {rels:?}");
    }

    #[test]
    fn galerkin_block_matches_the_standard_system_bit_for_bit() {
        let (problem, mesh, tube) = trig_setup(8, 1.0);
        let classes = classify(&mesh, &problem.interface).unwrap();
        let map = unknown_map(&problem, &mesh);
        let block = assemble_galerkin_rows(&problem, &mesh, &classes, &map).unwrap();
        let n = map.interior.len();
        let mut b = TripletBuilder::new(n, n);
        for &(r, c, v) in &block.entries {
            b.push(r, c, v);
        }
        let square = b.finalize();

        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        assert_eq!(sys.n_galerkin, n);
        for r in 0..n {
            let (aug_cols, aug_vals) = sys.matrix.row(r);
            let (std_cols, std_vals) = square.row(r);
            assert!(aug_cols.iter().all(|&c| c < sys.n_u), "v column in row {r}");
            assert_eq!(aug_cols, std_cols, "sparsity differs in row {r}");
            for (a, s) in aug_vals.iter().zip(std_vals) {
                assert!(a.to_bits() == s.to_bits(), "row {r}: {a} vs {s}");
            }
            assert!(sys.rhs[r].to_bits() == block.rhs[r].to_bits(), "rhs row {r}");
        }
    }

    #[test]
    fn standard_fem_converges_at_second_order_with_the_line_source() {
        // The trig problem has a nonhomogeneous conormal jump, so this
        // doubles as a sign check on the interface source: with the wrong
        // sign the error would stagnate at O(1).
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mut errors = Vec::new();
        for n in [16, 32] {
            let mesh = build_mesh(problem.domain, n).unwrap();
            let sol = solve_standard_fem(&problem, &mesh).unwrap();
            let err = (0..mesh.n_nodes())
                .map(|k| {
                    let p = mesh.nodes[k];
                    (sol.u[k] - problem.exact_u(p, problem.side_of(p))).abs()
                })
                .fold(0.0f64, f64::max);
            errors.push(err);
        }
        assert!(
            errors[1] < 0.35 * errors[0],
            "nodal errors {errors:?} do not decay at second order"
        );
    }

    #[test]
    fn least_squares_methods_agree_and_are_optimal() {
        let (problem, mesh, tube) = trig_setup(8, 1.0);
        let sys = assemble_augmented(&problem, &mesh, &tube).unwrap();
        let svd = solve_augmented(&problem, &mesh, &tube, LsqMethod::Svd).unwrap();
        let qr = solve_augmented(&problem, &mesh, &tube, LsqMethod::SparseQr).unwrap();
        let cg = solve_augmented(&problem, &mesh, &tube, LsqMethod::NormalCg).unwrap();

        let u_scale = norm2(&svd.u);
        let v_scale = svd.v.iter().flat_map(|v| v.iter()).map(|x| x * x).sum::<f64>().sqrt();
        for other in [&qr, &cg] {
            let du = svd
                .u
                .iter()
                .zip(&other.u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(du <= 1e-6 * u_scale, "u mismatch {du}");
            let dv = svd
                .v
                .iter()
                .zip(&other.v)
                .map(|(a, b)| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(dv <= 1e-6 * v_scale, "v mismatch {dv}");
        }

        // Normal-equation optimality at the QR solution.
        let r = sys.residual(&sys.pack(&qr.u, &qr.v)).unwrap();
        let grad = sys.matrix.mul_transpose_vec(&r).unwrap();
        let rhs_grad = sys.matrix.mul_transpose_vec(&sys.rhs).unwrap();
        assert!(norm2(&grad) <= 1e-8 * norm2(&rhs_grad), "not a least-squares optimum");
    }

    #[test]
    fn whole_domain_tube_agrees_with_the_thin_tube_away_from_the_interface() {
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mesh = build_mesh(problem.domain, 16).unwrap();
        let thin = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
        let whole = extract_tube(&mesh, &problem.interface, 2.0 * problem.domain.side_length())
            .unwrap();
        let a = solve_augmented(&problem, &mesh, &thin, LsqMethod::SparseQr).unwrap();
        let b = solve_augmented(&problem, &mesh, &whole, LsqMethod::SparseQr).unwrap();
        let mut worst = 0.0f64;
        for n in 0..mesh.n_nodes() {
            let p = mesh.nodes[n];
            let dist = ((p[0].powi(2) + p[1].powi(2)).sqrt() - 0.9).abs();
            if dist > 4.0 * mesh.h {
                worst = worst.max((a.u[n] - b.u[n]).abs());
            }
        }
        assert!(worst < 5e-3, "tube choice changes u far away by {worst}");
    }

    #[test]
    fn interpolated_flux_samples_match_the_exact_flux() {
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mut worsts = Vec::new();
        for n in [16, 32] {
            let mesh = build_mesh(problem.domain, n).unwrap();
            let tube = extract_tube(&mesh, &problem.interface, 3.0 * mesh.h).unwrap();
            let exact = interpolate_exact_fields(&problem, &mesh, &tube);
            let samples = extract_interface_flux(&exact, &problem, 64).unwrap();
            let mut worst = 0.0f64;
            for s in &samples {
                let nrm = problem.interface.normal_at(s.point);
                for (slot, side) in [(0, Side::Minus), (1, Side::Plus)] {
                    let v = problem.exact_flux(s.point, side);
                    let want = v[0] * nrm[0] + v[1] * nrm[1];
                    worst = worst.max((s.v_normal[slot] - want).abs());
                }
            }
            worsts.push(worst);
        }
        // Interpolation error is second order, so refining must shrink it.
        assert!(worsts[0] < 2.0, "coarse interpolation error {}", worsts[0]);
        assert!(worsts[1] < 0.4 * worsts[0], "no decay: {worsts:?}");
    }

    #[test]
    fn flux_sampling_rejects_solutions_without_flux_unknowns() {
        let problem = trig_circle_2d(100.0, 1.0, 0.0, 0.9).unwrap();
        let mesh = build_mesh(problem.domain, 8).unwrap();
        let sol = solve_standard_fem(&problem, &mesh).unwrap();
        assert!(extract_interface_flux(&sol, &problem, 16).is_err());
    }
}
