//! Triangulated unit-disk meshes with an angularly ordered boundary.
//!
//! Meshes are built from concentric rings of nodes: ring `k` of `K` sits at
//! radius `k/K` and carries `ceil(2*pi*r_k / h)` equally spaced nodes starting
//! at angle 0.  Adjacent rings are stitched by a deterministic angular merge,
//! the innermost ring is fanned to the centre node.  The construction is fully
//! deterministic for a fixed target edge length, places every boundary node
//! exactly on the unit circle, and keeps all triangles counterclockwise.
//!
//! The module also carries the discrete field containers used throughout the
//! crate (scalar and 2-vector values on nodes or on triangles) and P1
//! interpolation between two disk meshes.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::TAU;

/// Conforming P1 triangulation of the closed unit disk.
///
/// Boundary nodes are stored in order of strictly increasing polar angle with
/// the first node at angle 0.  Immutable after construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    boundary_angles: Vec<f64>,
    is_boundary: Vec<bool>,
    areas: Vec<f64>,
    target_h: f64,
}

impl Mesh {
    /// Rebuild a mesh from raw arrays (mesh-file import), recomputing the
    /// cached quantities and checking every invariant.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<usize>,
        target_h: f64,
    ) -> Result<Self> {
        let n = nodes.len();
        if let Some(tri) = triangles.iter().find(|t| t.iter().any(|&v| v >= n)) {
            return Err(Error::InvalidMesh(format!("triangle {tri:?} references a missing node")));
        }
        if boundary.iter().any(|&b| b >= n) {
            return Err(Error::InvalidMesh("boundary index out of range".into()));
        }
        let boundary_angles = boundary.iter().map(|&b| polar_angle(nodes[b])).collect();
        let mut is_boundary = vec![false; n];
        for &b in &boundary {
            is_boundary[b] = true;
        }
        let areas = triangles
            .iter()
            .map(|tri| signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]))
            .collect();
        let mesh = Mesh {
            nodes,
            triangles,
            boundary,
            boundary_angles,
            is_boundary,
            areas,
            target_h,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary node indices ordered by increasing polar angle, first at 0.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn target_h(&self) -> f64 {
        self.target_h
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    /// Signed area of triangle `t` (positive for all triangles of a valid mesh).
    pub fn triangle_area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let inv2a = 1.0 / (2.0 * self.areas[t]);
        [
            [(pb[1] - pc[1]) * inv2a, (pc[0] - pb[0]) * inv2a],
            [(pc[1] - pa[1]) * inv2a, (pa[0] - pc[0]) * inv2a],
            [(pa[1] - pb[1]) * inv2a, (pb[0] - pa[0]) * inv2a],
        ]
    }

    /// Locate the triangle containing `p`, returning its index and barycentric
    /// coordinates.  Brute-force scan with a bounding-box prefilter; `None`
    /// when `p` lies outside every triangle (boundary roundoff).
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = -1e-12;
        for (t, tri) in self.triangles.iter().enumerate() {
            let (pa, pb, pc) = (self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]);
            let xmin = pa[0].min(pb[0]).min(pc[0]);
            let xmax = pa[0].max(pb[0]).max(pc[0]);
            if p[0] < xmin - 1e-12 || p[0] > xmax + 1e-12 {
                continue;
            }
            let ymin = pa[1].min(pb[1]).min(pc[1]);
            let ymax = pa[1].max(pb[1]).max(pc[1]);
            if p[1] < ymin - 1e-12 || p[1] > ymax + 1e-12 {
                continue;
            }
            let inv2a = 1.0 / (2.0 * self.areas[t]);
            let l0 = ((pb[0] - p[0]) * (pc[1] - p[1]) - (pc[0] - p[0]) * (pb[1] - p[1])) * inv2a;
            let l1 = ((pc[0] - p[0]) * (pa[1] - p[1]) - (pa[0] - p[0]) * (pc[1] - p[1])) * inv2a;
            let l2 = 1.0 - l0 - l1;
            if l0 >= TOL && l1 >= TOL && l2 >= TOL {
                return Some((t, [l0, l1, l2]));
            }
        }
        None
    }

    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n[0] - p[0]).powi(2) + (n[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Triangle and barycentric coordinates for `p`, extending past the hull
    /// when no triangle contains it: the triangle with the least-negative
    /// barycentric fit is used, so a P1 evaluation through this function
    /// reproduces globally affine fields exactly even for points that sit a
    /// sliver outside the mesh (unit-circle nodes against a chordal hull).
    pub fn locate_or_extend(&self, p: [f64; 2]) -> (usize, [f64; 3]) {
        if let Some(hit) = self.locate(p) {
            return hit;
        }
        let mut best = (0, [f64::NEG_INFINITY; 3]);
        let mut best_min = f64::NEG_INFINITY;
        for (t, tri) in self.triangles.iter().enumerate() {
            let (pa, pb, pc) = (self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]);
            let inv2a = 1.0 / (2.0 * self.areas[t]);
            let l0 = ((pb[0] - p[0]) * (pc[1] - p[1]) - (pc[0] - p[0]) * (pb[1] - p[1])) * inv2a;
            let l1 = ((pc[0] - p[0]) * (pa[1] - p[1]) - (pa[0] - p[0]) * (pc[1] - p[1])) * inv2a;
            let l2 = 1.0 - l0 - l1;
            let min = l0.min(l1).min(l2);
            if min > best_min {
                best_min = min;
                best = (t, [l0, l1, l2]);
            }
        }
        best
    }

    /// Check every structural invariant; `Err` describes the first failure.
    pub fn validate(&self) -> Result<()> {
        for (t, _) in self.triangles.iter().enumerate() {
            if !(self.areas[t] > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area {}",
                    self.areas[t]
                )));
            }
        }
        for &b in &self.boundary {
            let [x, y] = self.nodes[b];
            let r = (x * x + y * y).sqrt();
            if (r - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidMesh(format!(
                    "boundary node {b} off the unit circle, |x| = {r}"
                )));
            }
        }
        if self.boundary_angles.is_empty() || self.boundary_angles[0] != 0.0 {
            return Err(Error::InvalidMesh(
                "first boundary angle must be exactly 0".into(),
            ));
        }
        for w in self.boundary_angles.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidMesh(
                    "boundary angles not strictly increasing".into(),
                ));
            }
        }
        if *self.boundary_angles.last().unwrap() >= TAU {
            return Err(Error::InvalidMesh("boundary angle >= 2*pi".into()));
        }

        // Edge bookkeeping: interior edges shared by 2 triangles, boundary by 1.
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let mut n_boundary_edges = 0;
        for (&(a, b), &c) in &edge_count {
            match c {
                1 => {
                    n_boundary_edges += 1;
                    if !self.is_boundary[a] || !self.is_boundary[b] {
                        return Err(Error::InvalidMesh(format!(
                            "edge ({a},{b}) used once but not on the boundary"
                        )));
                    }
                }
                2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a},{b}) shared by {c} triangles"
                    )))
                }
            }
        }
        if n_boundary_edges != self.boundary.len() {
            return Err(Error::InvalidMesh(format!(
                "{} boundary edges vs {} boundary nodes",
                n_boundary_edges,
                self.boundary.len()
            )));
        }
        let v = self.node_count() as i64;
        let e = edge_count.len() as i64;
        let f = self.triangle_count() as i64;
        if v - e + f != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic V - E + F = {} (expected 1)",
                v - e + f
            )));
        }
        Ok(())
    }
}

/// Build the concentric-ring triangulation of the unit disk.
///
/// `target_h` is the requested edge length; admissible range is
/// `[0.005, 0.5]`.  The result is deterministic and satisfies all [`Mesh`]
/// invariants with maximum edge length at most `1.5 * target_h`.
pub fn build_disk_mesh(target_h: f64) -> Result<Mesh> {
    if !(0.005..=0.5).contains(&target_h) || !target_h.is_finite() {
        return Err(Error::Parameter(format!(
            "target_h = {target_h}, admissible range is [0.005, 0.5]"
        )));
    }
    let rings = (1.0 / target_h).ceil() as usize;
    let mut nodes: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize; rings + 1]; // index of first node of each ring
    let mut ring_size = vec![0usize; rings + 1];
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        let n = (TAU * r / target_h).ceil() as usize;
        ring_start[k] = nodes.len();
        ring_size[k] = n;
        for m in 0..n {
            let t = TAU * m as f64 / n as f64;
            nodes.push([r * t.cos(), r * t.sin()]);
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    // Central fan.
    let n1 = ring_size[1];
    for m in 0..n1 {
        triangles.push([ring_start[1] + m, ring_start[1] + (m + 1) % n1, 0]);
    }
    // Ring-to-ring strips: greedy merge, always taking the shorter of the
    // two candidate diagonals.  Keeps edge lengths near the target even when
    // adjacent rings have incommensurate node counts.
    for k in 2..=rings {
        let (n_in, n_out) = (ring_size[k - 1], ring_size[k]);
        let (base_in, base_out) = (ring_start[k - 1], ring_start[k]);
        let dist2 = |a: usize, b: usize| -> f64 {
            let (p, q) = (nodes[a], nodes[b]);
            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
        };
        let (mut i, mut j) = (0usize, 0usize);
        while i < n_in || j < n_out {
            let advance_outer = if i == n_in {
                true
            } else if j == n_out {
                false
            } else {
                let d_out = dist2(base_in + i % n_in, base_out + (j + 1) % n_out);
                let d_in = dist2(base_in + (i + 1) % n_in, base_out + j % n_out);
                d_out <= d_in
            };
            if advance_outer {
                triangles.push([
                    base_out + j % n_out,
                    base_out + (j + 1) % n_out,
                    base_in + i % n_in,
                ]);
                j += 1;
            } else {
                triangles.push([
                    base_in + (i + 1) % n_in,
                    base_in + i % n_in,
                    base_out + j % n_out,
                ]);
                i += 1;
            }
        }
    }

    let boundary: Vec<usize> = (0..ring_size[rings]).map(|m| ring_start[rings] + m).collect();
    let boundary_angles: Vec<f64> = (0..ring_size[rings])
        .map(|m| TAU * m as f64 / ring_size[rings] as f64)
        .collect();
    let mut is_boundary = vec![false; nodes.len()];
    for &b in &boundary {
        is_boundary[b] = true;
    }
    let areas = triangles
        .iter()
        .map(|tri| signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]))
        .collect();

    let mesh = Mesh {
        nodes,
        triangles,
        boundary,
        boundary_angles,
        is_boundary,
        areas,
        target_h,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Polar angle `t` in `[0, 2*pi)` of each boundary node, in boundary order.
pub fn boundary_angles(mesh: &Mesh) -> Vec<f64> {
    mesh.boundary_angles.clone()
}

/// Polar angle of an arbitrary point, mapped into `[0, 2*pi)`.
pub fn polar_angle(p: [f64; 2]) -> f64 {
    let t = p[1].atan2(p[0]);
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

// ---------------------------------------------------------------------------
// Discrete fields
// ---------------------------------------------------------------------------

fn check_values(len: usize, expected: usize, what: &str) -> Result<()> {
    if len != expected {
        return Err(Error::Parameter(format!(
            "{what}: {len} values for {expected} entities"
        )));
    }
    Ok(())
}

/// One real value per mesh node.
#[derive(Debug, Clone)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        check_values(values.len(), mesh.node_count(), "nodal field")?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("nodal field has non-finite value {v}")));
        }
        Ok(Self { values })
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: mesh.nodes().iter().map(|p| f(p[0], p[1])).collect(),
        }
    }
}

/// One real value per triangle.
#[derive(Debug, Clone)]
pub struct ElementField {
    pub values: Vec<f64>,
}

impl ElementField {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        check_values(values.len(), mesh.triangle_count(), "element field")?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "element field has non-finite value {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.triangle_count()],
        }
    }

    /// Sample a function at triangle centroids.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: (0..mesh.triangle_count())
                .map(|t| {
                    let c = mesh.centroid(t);
                    f(c[0], c[1])
                })
                .collect(),
        }
    }
}

/// One 2-vector per mesh node.
#[derive(Debug, Clone)]
pub struct NodalVectorField {
    pub values: Vec<[f64; 2]>,
}

impl NodalVectorField {
    pub fn new(mesh: &Mesh, values: Vec<[f64; 2]>) -> Result<Self> {
        check_values(values.len(), mesh.node_count(), "nodal vector field")?;
        Ok(Self { values })
    }
}

/// One 2-vector per triangle.
#[derive(Debug, Clone)]
pub struct ElementVectorField {
    pub values: Vec<[f64; 2]>,
}

impl ElementVectorField {
    pub fn new(mesh: &Mesh, values: Vec<[f64; 2]>) -> Result<Self> {
        check_values(values.len(), mesh.triangle_count(), "element vector field")?;
        Ok(Self { values })
    }

    pub fn constant(mesh: &Mesh, value: [f64; 2]) -> Self {
        Self {
            values: vec![value; mesh.triangle_count()],
        }
    }
}

/// Values attached to the boundary nodes of a mesh, in boundary order.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        check_values(values.len(), mesh.boundary_nodes().len(), "boundary trace")?;
        Ok(Self { values })
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.boundary_nodes().len()],
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Interpolation between meshes
// ---------------------------------------------------------------------------

/// P1 interpolation of a nodal field from `source_mesh` onto `target_mesh`.
///
/// Target nodes outside every source triangle (boundary roundoff between a
/// chordal hull and the circle) are evaluated by barycentric extension from
/// the nearest triangle, which keeps affine fields exact.
pub fn interpolate(source_mesh: &Mesh, field: &NodalField, target_mesh: &Mesh) -> NodalField {
    let values = target_mesh
        .nodes()
        .iter()
        .map(|&p| {
            let (t, bary) = source_mesh.locate_or_extend(p);
            let tri = source_mesh.triangles()[t];
            bary[0] * field.values[tri[0]]
                + bary[1] * field.values[tri[1]]
                + bary[2] * field.values[tri[2]]
        })
        .collect();
    NodalField { values }
}

/// Componentwise P1 interpolation of a nodal 2-vector field.
pub fn interpolate_vector(
    source_mesh: &Mesh,
    field: &NodalVectorField,
    target_mesh: &Mesh,
) -> NodalVectorField {
    let values = target_mesh
        .nodes()
        .iter()
        .map(|&p| {
            let (t, bary) = source_mesh.locate_or_extend(p);
            let tri = source_mesh.triangles()[t];
            let mut v = [0.0; 2];
            for k in 0..3 {
                v[0] += bary[k] * field.values[tri[k]][0];
                v[1] += bary[k] * field.values[tri[k]][1];
            }
            v
        })
        .collect();
    NodalVectorField { values }
}
