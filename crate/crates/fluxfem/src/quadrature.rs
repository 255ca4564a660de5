//! Gauss-Legendre rules on [0, 1] and symmetric cubature rules on the
//! reference triangle.
//!
//! Interval rules are tabulated for 1..=10 points; an n-point rule is
//! exact for polynomials of degree 2n-1. Triangle rules are tabulated by
//! requested polynomial order 1..=4 with strictly positive weights;
//! points are stored in barycentric coordinates so they map to arbitrary
//! (sub-)triangles by convex combination of the vertices.

use crate::error::{Error, Result};

/// Quadrature rule on the unit interval: `sum(w_i f(x_i)) ~ int_0^1 f`.
#[derive(Debug, Clone)]
pub struct IntervalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl IntervalRule {
    /// Integrates `f` over `[a, b]` by affine mapping of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let len = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * len * f(a + len * x))
            .sum()
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1], tabulated per point count.
/// Values are the standard ones to 16 significant digits.
fn gauss_table(n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    // (abscissa, weight) pairs for the non-negative abscissas; negative
    // partners are mirrored with the same weight.
    let half: &[(f64, f64)] = match n {
        1 => &[(0.0, 2.0)],
        2 => &[(0.5773502691896257, 1.0)],
        3 => &[
            (0.0, 0.8888888888888888),
            (0.7745966692414834, 0.5555555555555556),
        ],
        4 => &[
            (0.3399810435848563, 0.6521451548625461),
            (0.8611363115940526, 0.3478548451374538),
        ],
        5 => &[
            (0.0, 0.5688888888888889),
            (0.5384693101056831, 0.4786286704993665),
            (0.9061798459386640, 0.2369268850561891),
        ],
        6 => &[
            (0.2386191860831969, 0.4679139345726910),
            (0.6612093864662645, 0.3607615730481386),
            (0.9324695142031521, 0.1713244923791704),
        ],
        7 => &[
            (0.0, 0.4179591836734694),
            (0.4058451513773972, 0.3818300505051189),
            (0.7415311855993945, 0.2797053914892766),
            (0.9491079123427585, 0.1294849661688697),
        ],
        8 => &[
            (0.1834346424956498, 0.3626837833783620),
            (0.5255324099163290, 0.3137066458778873),
            (0.7966664774136267, 0.2223810344533745),
            (0.9602898564975363, 0.1012285362903763),
        ],
        9 => &[
            (0.0, 0.3302393550012598),
            (0.3242534234038089, 0.3123470770400029),
            (0.6133714327005904, 0.2606106964029354),
            (0.8360311073266358, 0.1806481606948574),
            (0.9681602395076261, 0.0812743883615744),
        ],
        10 => &[
            (0.1488743389816312, 0.2955242247147529),
            (0.4333953941292472, 0.2692667193099963),
            (0.6794095682990244, 0.2190863625159820),
            (0.8650633666889845, 0.1494513491505806),
            (0.9739065285171717, 0.0666713443086881),
        ],
        _ => return None,
    };
    let mut pts = Vec::with_capacity(n);
    let mut wts = Vec::with_capacity(n);
    for &(x, w) in half {
        if x == 0.0 {
            pts.push(0.0);
            wts.push(w);
        } else {
            pts.push(-x);
            wts.push(w);
            pts.push(x);
            wts.push(w);
        }
    }
    // Sort ascending for a deterministic, readable rule.
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap());
    Some((
        idx.iter().map(|&i| pts[i]).collect(),
        idx.iter().map(|&i| wts[i]).collect(),
    ))
}

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
pub fn gauss_interval(n: usize) -> Result<IntervalRule> {
    let (p, w) = gauss_table(n).ok_or_else(|| {
        Error::Parameter(format!("gauss_interval: point count {n} not tabulated (1..=10)"))
    })?;
    Ok(IntervalRule {
        points: p.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
    })
}

/// Cubature rule on the reference triangle, stored in barycentric
/// coordinates; weights sum to the reference area 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub barycentric: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Integrates `f(x, y)` over the physical triangle `(a, b, c)`.
    /// Weights scale by `2 * area` so the rule works on any non-degenerate
    /// triangle, including cut-cell fragments.
    pub fn integrate<F: Fn(f64, f64) -> f64>(
        &self,
        a: [f64; 2],
        b: [f64; 2],
        c: [f64; 2],
        f: F,
    ) -> f64 {
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let scale = det.abs();
        self.barycentric
            .iter()
            .zip(&self.weights)
            .map(|(l, &w)| {
                let x = l[0] * a[0] + l[1] * b[0] + l[2] * c[0];
                let y = l[0] * a[1] + l[1] * b[1] + l[2] * c[1];
                w * scale * f(x, y)
            })
            .sum()
    }

    /// Physical points and weights on the triangle `(a, b, c)`.
    pub fn mapped(&self, a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Vec<([f64; 2], f64)> {
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let scale = det.abs();
        self.barycentric
            .iter()
            .zip(&self.weights)
            .map(|(l, &w)| {
                (
                    [
                        l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                        l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
                    ],
                    w * scale,
                )
            })
            .collect()
    }
}

/// Symmetric positive-weight triangle rule exact for total degree `order`.
pub fn triangle_rule(order: usize) -> Result<TriangleRule> {
    let (bary, weights): (Vec<[f64; 3]>, Vec<f64>) = match order {
        1 => (
            vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
            vec![0.5],
        ),
        2 => {
            // Interior three-point rule, degree 2.
            let a = 2.0 / 3.0;
            let b = 1.0 / 6.0;
            (
                vec![[a, b, b], [b, a, b], [b, b, a]],
                vec![1.0 / 6.0; 3],
            )
        }
        3 | 4 => {
            // Six-point degree-4 rule (two symmetric orbits, all weights
            // positive); also serves order 3.
            let a1 = 0.108103018168070;
            let b1 = 0.445948490915965;
            let w1 = 0.223381589678011 / 2.0;
            let a2 = 0.816847572980459;
            let b2 = 0.091576213509771;
            let w2 = 0.109951743655322 / 2.0;
            (
                vec![
                    [a1, b1, b1],
                    [b1, a1, b1],
                    [b1, b1, a1],
                    [a2, b2, b2],
                    [b2, a2, b2],
                    [b2, b2, a2],
                ],
                vec![w1, w1, w1, w2, w2, w2],
            )
        }
        _ => {
            return Err(Error::Parameter(format!(
                "triangle_rule: order {order} not tabulated (1..=4)"
            )))
        }
    };
    Ok(TriangleRule {
        barycentric: bary,
        weights,
    })
}
