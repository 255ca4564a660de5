//! Circle-against-mesh geometry: tag each triangle with its side, split
//! triangles crossed by the interface into sub-triangles that track the
//! circle with a short arc polyline, and expose the element chords as the
//! interface polyline.
//!
//! Classification is by vertex sign of the level set. Slivers where the
//! circle clips a triangle without separating its vertices are ignored.
//! Between the two edge intersections the pieces follow the arc sampled
//! at `ARC_SEGMENTS` points rather than the single chord; the area left
//! on the wrong side of the interface shrinks by the segment count
//! squared, which matters once the coefficient contrast is large.
//!
//! The fan construction around the arc is only valid once the mesh
//! resolves the circle's curvature; each cut element's pieces are checked
//! against the element area, and elements where the fans fail (coarse
//! meshes, near-tangent crossings) fall back to a chord split of a
//! uniform subdivision, which partitions unconditionally.

use crate::error::{Error, Result};
use crate::mesh2d::{triangle_area, TriMesh};
use crate::problems::{Circle, Side};

/// Number of arc segments tracking the circle inside one cut triangle.
const ARC_SEGMENTS: usize = 16;

/// A triangle crossed by the interface, split along the refined arc
/// polyline between its two edge intersections.
#[derive(Debug, Clone)]
pub struct CutElement {
    /// Chord endpoints, both on the circle.
    pub chord: [[f64; 2]; 2],
    /// Sub-triangles tagged by side, partitioning the triangle exactly:
    /// two fans meeting at the arc polyline where the curvature allows,
    /// otherwise a chord-split uniform subdivision.
    pub pieces: Vec<(Side, [[f64; 2]; 3])>,
}

#[derive(Debug, Clone)]
pub enum ElementClass {
    Plain(Side),
    Cut(CutElement),
}

impl ElementClass {
    /// Side tag usable when a single side is wanted; a cut element answers
    /// with the side of its larger area share.
    pub fn dominant_side(&self) -> Side {
        match self {
            ElementClass::Plain(side) => *side,
            ElementClass::Cut(cut) => {
                let mut minus = 0.0;
                let mut plus = 0.0;
                for (side, tri) in &cut.pieces {
                    match side {
                        Side::Minus => minus += triangle_area(*tri),
                        Side::Plus => plus += triangle_area(*tri),
                    }
                }
                if minus >= plus {
                    Side::Minus
                } else {
                    Side::Plus
                }
            }
        }
    }
}

fn side_of(circle: &Circle, p: [f64; 2]) -> Side {
    if circle.radius > 0.0 && circle.level_set(p) <= 0.0 {
        Side::Minus
    } else {
        Side::Plus
    }
}

fn edge_circle_intersection(a: [f64; 2], b: [f64; 2], circle: &Circle) -> Result<[f64; 2]> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let m = [a[0] - circle.center[0], a[1] - circle.center[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (m[0] * d[0] + m[1] * d[1]);
    let qc = m[0] * m[0] + m[1] * m[1] - circle.radius * circle.radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Err(Error::Geometry(format!(
            "edge ({a:?}, {b:?}) tagged as crossing the circle but no intersection exists"
        )));
    }
    let sq = disc.sqrt();
    let roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)];
    let inside = |t: f64| (-1e-9..=1.0 + 1e-9).contains(&t);
    let t = match (inside(roots[0]), inside(roots[1])) {
        (true, false) => roots[0],
        (false, true) => roots[1],
        (true, true) => {
            // Grazing contact: prefer the root away from the endpoints.
            let mid = |t: f64| (t - 0.5).abs();
            if mid(roots[0]) <= mid(roots[1]) {
                roots[0]
            } else {
                roots[1]
            }
        }
        (false, false) => {
            return Err(Error::Geometry(format!(
                "edge ({a:?}, {b:?}): both intersection parameters {roots:?} fall outside"
            )));
        }
    };
    let t = t.clamp(0.0, 1.0);
    Ok([a[0] + t * d[0], a[1] + t * d[1]])
}

/// Points along the short arc from `p1` to `p2`, endpoints kept exactly
/// so the pieces still meet the triangle edges at the intersections.
fn arc_points(circle: &Circle, p1: [f64; 2], p2: [f64; 2]) -> Vec<[f64; 2]> {
    use std::f64::consts::{PI, TAU};
    let c = circle.center;
    let th1 = (p1[1] - c[1]).atan2(p1[0] - c[0]);
    let th2 = (p2[1] - c[1]).atan2(p2[0] - c[0]);
    let mut dth = th2 - th1;
    if dth > PI {
        dth -= TAU;
    } else if dth < -PI {
        dth += TAU;
    }
    let mut points = Vec::with_capacity(ARC_SEGMENTS + 1);
    points.push(p1);
    for i in 1..ARC_SEGMENTS {
        let th = th1 + dth * (i as f64 / ARC_SEGMENTS as f64);
        points.push([
            c[0] + circle.radius * th.cos(),
            c[1] + circle.radius * th.sin(),
        ]);
    }
    points.push(p2);
    points
}

/// Fast-path pieces: two fans meeting along the arc polyline, one around
/// the lonely vertex, one from a shared vertex sweeping over the other.
/// Valid while the arc stays inside the triangle and clear of the fan
/// diagonals; the caller checks the covered area and falls back when the
/// curvature is too strong for that.
fn fan_pieces(
    circle: &Circle,
    l: [f64; 2],
    m1: [f64; 2],
    m2: [f64; 2],
    p1: [f64; 2],
    p2: [f64; 2],
    lonely_side: Side,
    shared_side: Side,
) -> Vec<(Side, [[f64; 2]; 3])> {
    let arc = arc_points(circle, p1, p2);
    let mut pieces = Vec::with_capacity(2 * ARC_SEGMENTS + 1);
    for w in arc.windows(2) {
        pieces.push((lonely_side, [l, w[0], w[1]]));
    }
    pieces.push((shared_side, [m1, m2, p2]));
    for w in arc.windows(2).rev() {
        pieces.push((shared_side, [m1, w[1], w[0]]));
    }
    pieces
}

/// Chord split of one (sub)triangle: the whole triangle when the circle
/// misses or grazes it, otherwise the lonely-corner triangle plus two on
/// the shared side. Never overlaps, whatever the geometry.
fn chord_split(
    circle: &Circle,
    v: [[f64; 2]; 3],
    scale: f64,
    pieces: &mut Vec<(Side, [[f64; 2]; 3])>,
) -> Result<()> {
    let sides = [
        side_of(circle, v[0]),
        side_of(circle, v[1]),
        side_of(circle, v[2]),
    ];
    if sides[0] == sides[1] && sides[1] == sides[2] {
        pieces.push((sides[0], v));
        return Ok(());
    }
    let lonely = (0..3)
        .find(|&k| sides[k] != sides[(k + 1) % 3] && sides[k] != sides[(k + 2) % 3])
        .expect("mixed signs have a minority vertex");
    let l = v[lonely];
    let m1 = v[(lonely + 1) % 3];
    let m2 = v[(lonely + 2) % 3];
    let p1 = edge_circle_intersection(l, m1, circle)?;
    let p2 = edge_circle_intersection(l, m2, circle)?;
    let chord = ((p1[0] - p2[0]).powi(2) + (p1[1] - p2[1]).powi(2)).sqrt();
    if chord < 1e-13 * scale {
        pieces.push((sides[(lonely + 1) % 3], v));
        return Ok(());
    }
    pieces.push((sides[lonely], [l, p1, p2]));
    pieces.push((sides[(lonely + 1) % 3], [m1, m2, p2]));
    pieces.push((sides[(lonely + 1) % 3], [m1, p2, p1]));
    Ok(())
}

/// Fallback pieces for strongly curved cuts: chop the triangle into
/// `ARC_SEGMENTS^2` congruent subtriangles and chord-split each one.
/// Chord splits cannot overlap, so the result partitions the triangle no
/// matter how the circle winds through it, and the area tagged with the
/// wrong side shrinks at the same quadratic rate as the arc polyline's.
fn subdivided_pieces(
    circle: &Circle,
    v: [[f64; 2]; 3],
    scale: f64,
) -> Result<Vec<(Side, [[f64; 2]; 3])>> {
    let k = ARC_SEGMENTS;
    let point = |i: usize, j: usize| -> [f64; 2] {
        let (s, t) = (i as f64 / k as f64, j as f64 / k as f64);
        [
            v[0][0] + s * (v[1][0] - v[0][0]) + t * (v[2][0] - v[0][0]),
            v[0][1] + s * (v[1][1] - v[0][1]) + t * (v[2][1] - v[0][1]),
        ]
    };
    let mut pieces = Vec::new();
    for i in 0..k {
        for j in 0..k - i {
            chord_split(
                circle,
                [point(i, j), point(i + 1, j), point(i, j + 1)],
                scale,
                &mut pieces,
            )?;
            if i + j < k - 1 {
                chord_split(
                    circle,
                    [point(i + 1, j), point(i + 1, j + 1), point(i, j + 1)],
                    scale,
                    &mut pieces,
                )?;
            }
        }
    }
    Ok(pieces)
}

/// Classifies every triangle of the mesh against the circle.
pub fn classify(mesh: &TriMesh, circle: &Circle) -> Result<Vec<ElementClass>> {
    let mut classes = Vec::with_capacity(mesh.n_triangles());
    if circle.radius == 0.0 {
        classes.resize_with(mesh.n_triangles(), || ElementClass::Plain(Side::Plus));
        return Ok(classes);
    }
    for t in 0..mesh.n_triangles() {
        let v = mesh.vertices(t);
        let sides = [
            side_of(circle, v[0]),
            side_of(circle, v[1]),
            side_of(circle, v[2]),
        ];
        if sides[0] == sides[1] && sides[1] == sides[2] {
            classes.push(ElementClass::Plain(sides[0]));
            continue;
        }
        // Exactly one vertex carries the minority side.
        let lonely = (0..3)
            .find(|&k| sides[k] != sides[(k + 1) % 3] && sides[k] != sides[(k + 2) % 3])
            .expect("mixed signs have a minority vertex");
        let l = v[lonely];
        let m1 = v[(lonely + 1) % 3];
        let m2 = v[(lonely + 2) % 3];
        let p1 = edge_circle_intersection(l, m1, circle)?;
        let p2 = edge_circle_intersection(l, m2, circle)?;
        let chord_len = ((p1[0] - p2[0]).powi(2) + (p1[1] - p2[1]).powi(2)).sqrt();
        if chord_len < 1e-13 * mesh.h {
            // The circle only touches a vertex; treat the element as plain.
            classes.push(ElementClass::Plain(sides[(lonely + 1) % 3]));
            continue;
        }
        let lonely_side = sides[lonely];
        let shared_side = sides[(lonely + 1) % 3];
        let mut pieces = fan_pieces(circle, l, m1, m2, p1, p2, lonely_side, shared_side);
        let area = mesh.area(t);
        let covered: f64 = pieces.iter().map(|(_, tri)| triangle_area(*tri)).sum();
        if (covered - area).abs() > 1e-9 * area {
            pieces = subdivided_pieces(circle, v, mesh.h)?;
        }
        classes.push(ElementClass::Cut(CutElement {
            chord: [p1, p2],
            pieces,
        }));
    }
    Ok(classes)
}

/// Integration regions of an element grouped by side: the whole triangle
/// for a plain element, the cut pieces otherwise, `Minus` region first
/// when both are present.
pub fn side_regions(
    class: &ElementClass,
    vertices: [[f64; 2]; 3],
) -> Vec<(Side, Vec<[[f64; 2]; 3]>)> {
    match class {
        ElementClass::Plain(side) => vec![(*side, vec![vertices])],
        ElementClass::Cut(cut) => [Side::Minus, Side::Plus]
            .into_iter()
            .map(|side| {
                let tris: Vec<_> = cut
                    .pieces
                    .iter()
                    .filter(|(s, _)| *s == side)
                    .map(|(_, tri)| *tri)
                    .collect();
                (side, tris)
            })
            .filter(|(_, tris)| !tris.is_empty())
            .collect(),
    }
}

/// The interface polyline: every cut element's chord, in element order.
pub fn chords(classes: &[ElementClass]) -> Vec<(usize, [[f64; 2]; 2])> {
    classes
        .iter()
        .enumerate()
        .filter_map(|(t, class)| match class {
            ElementClass::Cut(cut) => Some((t, cut.chord)),
            ElementClass::Plain(_) => None,
        })
        .collect()
}
