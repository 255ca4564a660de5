//! Uniform triangulation of a square: N x N cells, each split along the
//! lower-left to upper-right diagonal.

use crate::error::{Error, Result};
use crate::problems::Square;

/// Structured triangle mesh. Node `(i, j)` has id `j * (N + 1) + i`; cell
/// `(i, j)` yields triangles `2 * (j * N + i)` (lower, touching the bottom
/// edge) and `+ 1` (upper), both counterclockwise.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub domain: Square,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Per node: true when it lies on the boundary of the square.
    pub boundary: Vec<bool>,
}

/// Uniform mesh with `n >= 4` cells per direction.
pub fn build_mesh(domain: Square, n: usize) -> Result<TriMesh> {
    if n < 4 {
        return Err(Error::Parameter(format!(
            "mesh needs at least 4 cells per direction, got {n}"
        )));
    }
    if !(domain.hi > domain.lo) {
        return Err(Error::Parameter(format!(
            "degenerate domain [{}, {}]",
            domain.lo, domain.hi
        )));
    }
    let h = domain.side_length() / n as f64;
    let stride = n + 1;
    let mut nodes = Vec::with_capacity(stride * stride);
    let mut boundary = Vec::with_capacity(stride * stride);
    for j in 0..stride {
        for i in 0..stride {
            nodes.push([domain.lo + i as f64 * h, domain.lo + j as f64 * h]);
            boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * stride + i;
            let b = a + 1;
            let c = a + 1 + stride;
            let d = a + stride;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Ok(TriMesh {
        domain,
        n,
        h,
        nodes,
        triangles,
        boundary,
    })
}

impl TriMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.vertices(t);
        [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
        ]
    }

    pub fn area(&self, t: usize) -> f64 {
        triangle_area(self.vertices(t))
    }

    /// Constant gradients of the three P1 vertex basis functions.
    pub fn p1_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.vertices(t);
        let two_a = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        [
            [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a],
            [(c[1] - a[1]) / two_a, (a[0] - c[0]) / two_a],
            [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a],
        ]
    }

    /// Barycentric coordinates of `p` in triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.vertices(t);
        let two_a = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / two_a;
        let l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / two_a;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Triangle containing `p`, using the structured layout directly.
    pub fn locate(&self, p: [f64; 2]) -> Option<usize> {
        let tol = 1e-12 * self.domain.side_length();
        if p[0] < self.domain.lo - tol
            || p[0] > self.domain.hi + tol
            || p[1] < self.domain.lo - tol
            || p[1] > self.domain.hi + tol
        {
            return None;
        }
        let fx = ((p[0] - self.domain.lo) / self.h).floor();
        let fy = ((p[1] - self.domain.lo) / self.h).floor();
        let i = (fx.max(0.0) as usize).min(self.n - 1);
        let j = (fy.max(0.0) as usize).min(self.n - 1);
        let xi = (p[0] - self.domain.lo) / self.h - i as f64;
        let eta = (p[1] - self.domain.lo) / self.h - j as f64;
        // The lower triangle covers xi >= eta (below the cell diagonal).
        let t = 2 * (j * self.n + i) + usize::from(xi < eta);
        Some(t)
    }
}

pub fn triangle_area(v: [[f64; 2]; 3]) -> f64 {
    let [a, b, c] = v;
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn unit_square(n: usize) -> TriMesh {
        build_mesh(Square { lo: 0.0, hi: 1.0 }, n).unwrap()
    }

    #[test]
    fn counts_for_the_coarse_reference_mesh() {
        let mesh = build_mesh(Square { lo: -1.1, hi: 1.1 }, 4).unwrap();
        assert_eq!(mesh.n_nodes(), 25);
        assert_eq!(mesh.n_triangles(), 32);
        assert!((mesh.h - 0.55).abs() < 1e-15);
        assert!(build_mesh(Square { lo: -1.1, hi: 1.1 }, 3).is_err());
    }

    #[test]
    fn triangles_partition_the_domain() {
        let mesh = build_mesh(Square { lo: -1.1, hi: 1.1 }, 6).unwrap();
        let total: f64 = (0..mesh.n_triangles()).map(|t| mesh.area(t)).sum();
        assert!((total - 2.2 * 2.2).abs() < 1e-12, "area sum {total}");
        let uniform = mesh.h * mesh.h / 2.0;
        for t in 0..mesh.n_triangles() {
            assert!((mesh.area(t) - uniform).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_edges_are_shared_by_exactly_two_triangles() {
        let mesh = unit_square(5);
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            let on_boundary = mesh.boundary[a]
                && mesh.boundary[b]
                && (mesh.nodes[a][0] == mesh.nodes[b][0] && (mesh.nodes[a][0] == 0.0 || mesh.nodes[a][0] == 1.0)
                    || mesh.nodes[a][1] == mesh.nodes[b][1]
                        && (mesh.nodes[a][1] == 0.0 || mesh.nodes[a][1] == 1.0));
            let expected = if on_boundary { 1 } else { 2 };
            assert_eq!(count, expected, "edge ({a}, {b})");
        }
    }

    #[test]
    fn gradients_reproduce_linear_functions() {
        let mesh = unit_square(4);
        // u = 3 + 2x - 5y has gradient (2, -5) on every triangle.
        let u: Vec<f64> = mesh.nodes.iter().map(|p| 3.0 + 2.0 * p[0] - 5.0 * p[1]).collect();
        for t in 0..mesh.n_triangles() {
            let grads = mesh.p1_gradients(t);
            let mut g = [0.0, 0.0];
            for (k, &node) in mesh.triangles[t].iter().enumerate() {
                g[0] += u[node] * grads[k][0];
                g[1] += u[node] * grads[k][1];
            }
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_and_barycentric_agree() {
        let mesh = build_mesh(Square { lo: -1.1, hi: 1.1 }, 7).unwrap();
        let points = [
            [-1.0999, -1.0999],
            [0.0, 0.0],
            [0.3, -0.7],
            [1.0999, 1.0999],
            [-0.25, 0.99],
        ];
        for p in points {
            let t = mesh.locate(p).unwrap();
            let bary = mesh.barycentric(t, p);
            for l in bary {
                assert!(
                    (-1e-10..=1.0 + 1e-10).contains(&l),
                    "point {p:?} got coordinates {bary:?} in triangle {t}"
                );
            }
            let sum: f64 = bary.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert!(mesh.locate([1.2, 0.0]).is_none());
        assert!(mesh.locate([0.0, -1.2]).is_none());
    }
}
