//! The tube around the interface: element membership by centroid distance,
//! the element classification it carries, and the layout of the flux
//! unknowns v. Each tube node owns one nodal vector per side present among
//! its member elements, so v is continuous within each side and broken
//! across the interface, where the exact flux jumps.

use crate::cut2d::{classify, ElementClass};
use crate::error::{Error, Result};
use crate::mesh2d::TriMesh;
use crate::problems::{Circle, Side};

/// Tube region with the flux-unknown bookkeeping.
#[derive(Debug, Clone)]
pub struct TubeRegion {
    pub epsilon: f64,
    pub circle: Circle,
    /// Membership flag per triangle.
    pub member: Vec<bool>,
    /// Sorted ids of member triangles.
    pub elements: Vec<usize>,
    /// Classification of every triangle in the mesh (not only the tube).
    pub classes: Vec<ElementClass>,
    /// Sorted ids of nodes touched by member triangles.
    pub nodes: Vec<usize>,
    /// Flux unknowns in column order: nodes ascending, `Minus` copy before
    /// `Plus` where a node carries both.
    pub copies: Vec<(usize, Side)>,
    /// Per mesh node: positions of its [minus, plus] copies in `copies`.
    copy_index: Vec<[Option<usize>; 2]>,
}

/// Tube of half-width `epsilon` (length units) around the circle. A zero
/// interface radius takes the whole mesh regardless of `epsilon`.
pub fn extract_tube(mesh: &TriMesh, circle: &Circle, epsilon: f64) -> Result<TubeRegion> {
    if circle.radius > 0.0 && epsilon <= 0.0 {
        return Err(Error::Parameter(format!(
            "tube half-width must be positive, got {epsilon}"
        )));
    }
    let classes = classify(mesh, circle)?;
    let member: Vec<bool> = (0..mesh.n_triangles())
        .map(|t| {
            if circle.radius == 0.0 {
                true
            } else {
                let c = mesh.centroid(t);
                let dist = ((c[0] - circle.center[0]).powi(2) + (c[1] - circle.center[1]).powi(2))
                    .sqrt();
                (dist - circle.radius).abs() <= epsilon
            }
        })
        .collect();
    let elements: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| member[t]).collect();
    if elements.is_empty() {
        return Err(Error::Geometry(format!(
            "tube of half-width {epsilon} captures no element (h = {})",
            mesh.h
        )));
    }

    // A node needs a side copy for every side that appears among the
    // pieces of its member elements.
    let mut needs = vec![[false, false]; mesh.n_nodes()];
    for &t in &elements {
        let sides: Vec<Side> = match &classes[t] {
            ElementClass::Plain(side) => vec![*side],
            ElementClass::Cut(_) => vec![Side::Minus, Side::Plus],
        };
        for &node in &mesh.triangles[t] {
            for &side in &sides {
                needs[node][side_slot(side)] = true;
            }
        }
    }
    let nodes: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&n| needs[n][0] || needs[n][1])
        .collect();
    let mut copies = Vec::new();
    let mut copy_index = vec![[None, None]; mesh.n_nodes()];
    for &n in &nodes {
        for side in [Side::Minus, Side::Plus] {
            if needs[n][side_slot(side)] {
                copy_index[n][side_slot(side)] = Some(copies.len());
                copies.push((n, side));
            }
        }
    }
    Ok(TubeRegion {
        epsilon,
        circle: *circle,
        member,
        elements,
        classes,
        nodes,
        copies,
        copy_index,
    })
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Minus => 0,
        Side::Plus => 1,
    }
}

impl TubeRegion {
    pub fn n_copies(&self) -> usize {
        self.copies.len()
    }

    /// Position of the `(node, side)` flux unknown in column order.
    pub fn copy_index(&self, node: usize, side: Side) -> Option<usize> {
        self.copy_index[node][side_slot(side)]
    }

    pub fn class(&self, t: usize) -> &ElementClass {
        &self.classes[t]
    }
}
