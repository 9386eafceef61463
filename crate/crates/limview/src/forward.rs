//! Synthetic data generation: conductivity phantoms, forward solves of the
//! conductivity equation for a boundary pair, and the power-density matrix
//! `H_ij = sigma grad(u_i) . grad(u_j)`.
//!
//! Two forward paths are provided.  The direct path imposes the zero-extended
//! traces nodewise and solves once per component.  The split path handles
//! discontinuous traces: it solves the Laplace problem with the same traces
//! semi-analytically by a truncated Fourier series `u0`, then solves
//! `-div(sigma grad w) = div(sigma grad u0)` with homogeneous Dirichlet data
//! and returns `u = w + u0`.  The splitting is valid when the conductivity is
//! 1 near the boundary, which every built-in phantom satisfies; the
//! discontinuity is then absorbed by the harmonic part and the finite-element
//! solve only ever sees an `H^1` right-hand side.

use crate::boundary_data::{trace_on_mesh, BoundarySpec};
use crate::error::{Error, Result};
use crate::fem::{self, LoadSpec};
use crate::mesh::{ElementField, ElementVectorField, Mesh, NodalField};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

// ---------------------------------------------------------------------------
// Phantoms
// ---------------------------------------------------------------------------

/// Isotropic conductivity phantom on the unit disk.
#[derive(Debug, Clone)]
pub enum Phantom {
    /// Smooth radial bump: 2 at the origin, identically 1 for `r >= 0.8`,
    /// infinitely differentiable across the seam.
    Case1,
    /// Three disks of value 2 on background 1: centre `(-1/2, 0)` radius 0.3,
    /// `(0, -1/2)` radius 0.1, `(1/2, 1/2)` radius 0.1.
    Case2,
    Constant(f64),
    /// User-supplied pointwise conductivity.
    Custom(fn(f64, f64) -> f64),
}

impl Phantom {
    /// Pointwise conductivity value; positive for the built-in phantoms.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Phantom::Case1 => {
                let r2 = x * x + y * y;
                if r2 < 0.64 {
                    1.0 + (2.0 - 2.0 / (1.0 - r2 / 0.64)).exp()
                } else {
                    1.0
                }
            }
            Phantom::Case2 => {
                let in_disk = |cx: f64, cy: f64, r: f64| {
                    (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                };
                if in_disk(-0.5, 0.0, 0.3) || in_disk(0.0, -0.5, 0.1) || in_disk(0.5, 0.5, 0.1) {
                    2.0
                } else {
                    1.0
                }
            }
            Phantom::Constant(c) => *c,
            Phantom::Custom(f) => f(x, y),
        }
    }

    /// Reported uniform lower bound (exact for the built-ins).
    pub fn lower_bound(&self) -> f64 {
        match self {
            Phantom::Case1 | Phantom::Case2 => 1.0,
            Phantom::Constant(c) => *c,
            Phantom::Custom(_) => f64::NAN,
        }
    }

    /// Per-element conductivity, sampled at centroids.
    pub fn element_field(&self, mesh: &Mesh) -> ElementField {
        ElementField::from_fn(mesh, |x, y| self.eval(x, y))
    }
}

// ---------------------------------------------------------------------------
// Semi-analytic Laplace solve on the disk
// ---------------------------------------------------------------------------

/// Truncated Fourier representation of the harmonic extension of a boundary
/// trace `g(t)`:
///
/// `u0(r, t) = a0/2 + sum_{n=1..N} r^n (a_n cos nt + b_n sin nt)`.
///
/// Both the value and the termwise gradient are evaluated with the radius
/// clamped to `1 - 1e-6`.
#[derive(Debug, Clone)]
pub struct FourierHarmonic {
    pub order: usize,
    /// Cosine coefficients `a_0 .. a_N`.
    pub cos_coeffs: Vec<f64>,
    /// Sine coefficients; index 0 is unused.
    pub sin_coeffs: Vec<f64>,
}

const RADIUS_GUARD: f64 = 1e-6;

impl FourierHarmonic {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = (x * x + y * y).sqrt().min(1.0 - RADIUS_GUARD);
        let t = y.atan2(x);
        let mut u = self.cos_coeffs[0] / 2.0;
        let mut rn = 1.0;
        for n in 1..=self.order {
            rn *= r;
            let (s, c) = (n as f64 * t).sin_cos();
            u += rn * (self.cos_coeffs[n] * c + self.sin_coeffs[n] * s);
        }
        u
    }

    /// Termwise gradient: `grad(r^n cos nt) = n r^(n-1) (cos((n-1)t), -sin((n-1)t))`
    /// and `grad(r^n sin nt) = n r^(n-1) (sin((n-1)t), cos((n-1)t))`.
    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let r = (x * x + y * y).sqrt().min(1.0 - RADIUS_GUARD);
        let t = y.atan2(x);
        let mut gx = 0.0;
        let mut gy = 0.0;
        let mut rn1 = 1.0; // r^(n-1)
        for n in 1..=self.order {
            let nf = n as f64;
            let (s, c) = ((nf - 1.0) * t).sin_cos();
            gx += nf * rn1 * (self.cos_coeffs[n] * c + self.sin_coeffs[n] * s);
            gy += nf * rn1 * (-self.cos_coeffs[n] * s + self.sin_coeffs[n] * c);
            rn1 *= r;
        }
        [gx, gy]
    }
}

/// Fourier-coefficient solve of the Laplace problem on the disk with trace
/// `g` on the full boundary: trapezoid quadrature of `g` over `[0, 2*pi)`
/// at `quad_points` equispaced points, truncated at `order` harmonics.
pub fn fourier_laplace(
    g: &dyn Fn(f64) -> f64,
    order: usize,
    quad_points: usize,
) -> Result<FourierHarmonic> {
    if order < 8 {
        return Err(Error::Parameter(format!("order = {order}, need >= 8")));
    }
    if quad_points < 8 * order {
        return Err(Error::Parameter(format!(
            "quad_points = {quad_points} would alias order {order}; need >= {}",
            8 * order
        )));
    }
    let samples: Vec<f64> = (0..quad_points)
        .map(|k| g(TAU * k as f64 / quad_points as f64))
        .collect();
    let mut cos_coeffs = vec![0.0; order + 1];
    let mut sin_coeffs = vec![0.0; order + 1];
    let w = 2.0 / quad_points as f64;
    for n in 0..=order {
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, &gv) in samples.iter().enumerate() {
            let (s, c) = (n as f64 * TAU * k as f64 / quad_points as f64).sin_cos();
            a += gv * c;
            b += gv * s;
        }
        cos_coeffs[n] = w * a;
        sin_coeffs[n] = w * b;
    }
    Ok(FourierHarmonic {
        order,
        cos_coeffs,
        sin_coeffs,
    })
}

// ---------------------------------------------------------------------------
// Forward solves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardMode {
    /// Impose the zero-extended traces nodewise.
    Direct,
    /// Harmonic part from the Fourier solve plus a homogeneous-data
    /// correction; requires conductivity 1 on the outermost element ring.
    Split,
}

pub const DEFAULT_FOURIER_ORDER: usize = 256;

/// Solve the pair of forward problems for a phantom and a boundary pair.
///
/// `fourier_order` is only used in split mode (quadrature uses 8x as many
/// points, by they are cheap).
pub fn solve_forward(
    mesh: &Mesh,
    phantom: &Phantom,
    spec: &BoundarySpec,
    mode: ForwardMode,
    fourier_order: usize,
) -> Result<(NodalField, NodalField)> {
    let sigma = phantom.element_field(mesh);
    let (trace1, trace2) = trace_on_mesh(spec, mesh);
    match mode {
        ForwardMode::Direct => {
            let u1 = fem::solve_dirichlet(mesh, &sigma, &LoadSpec::Zero, &trace1)?;
            let u2 = fem::solve_dirichlet(mesh, &sigma, &LoadSpec::Zero, &trace2)?;
            Ok((u1, u2))
        }
        ForwardMode::Split => {
            check_unit_outer_ring(mesh, &sigma)?;
            let ell = spec.arc().ell();
            let u = |component: usize| -> Result<NodalField> {
                let g = |t: f64| {
                    if t <= ell {
                        spec.eval(t)[component]
                    } else {
                        0.0
                    }
                };
                let harmonic = fourier_laplace(&g, fourier_order, 8 * fourier_order)?;
                let load = split_load(mesh, &sigma, &harmonic);
                let zero_bc = crate::mesh::BoundaryTrace::constant(mesh, 0.0);
                let w = fem::solve_dirichlet(mesh, &sigma, &LoadSpec::WeakForm(&load), &zero_bc)?;
                let values = mesh
                    .nodes()
                    .iter()
                    .zip(w.values.iter())
                    .map(|(p, wv)| wv + harmonic.eval(p[0], p[1]))
                    .collect();
                NodalField::new(mesh, values)
            };
            Ok((u(0)?, u(1)?))
        }
    }
}

/// The split-mode precondition: conductivity 1 on every element touching the
/// boundary, so the divergence source vanishes where the trace may jump.
fn check_unit_outer_ring(mesh: &Mesh, sigma: &ElementField) -> Result<()> {
    for t in 0..mesh.triangle_count() {
        if mesh.triangles()[t]
            .iter()
            .any(|&v| mesh.is_boundary_node(v))
            && (sigma.values[t] - 1.0).abs() > 1e-12
        {
            return Err(Error::Parameter(format!(
                "split mode requires sigma = 1 on the outer element ring; element {t} has sigma = {}",
                sigma.values[t]
            )));
        }
    }
    Ok(())
}

/// Weak load of `div(sigma grad u0)` against P1 test functions:
/// `-integral sigma grad(u0) . grad(v)`, with the analytic gradient of the
/// harmonic part evaluated by the 3-point edge-midpoint rule.
fn split_load(mesh: &Mesh, sigma: &ElementField, harmonic: &FourierHarmonic) -> Vec<f64> {
    let mut load = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let (a, b, c) = (
            mesh.nodes()[tri[0]],
            mesh.nodes()[tri[1]],
            mesh.nodes()[tri[2]],
        );
        let mids = [
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
            [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0],
            [(c[0] + a[0]) / 2.0, (c[1] + a[1]) / 2.0],
        ];
        let grads = mesh.basis_gradients(t);
        let w = sigma.values[t] * mesh.triangle_area(t) / 3.0;
        for m in mids {
            let g0 = harmonic.grad(m[0], m[1]);
            for k in 0..3 {
                load[tri[k]] -= w * (g0[0] * grads[k][0] + g0[1] * grads[k][1]);
            }
        }
    }
    load
}

// ---------------------------------------------------------------------------
// Power density
// ---------------------------------------------------------------------------

/// Where the three stored entries of a power-density field live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Element,
    Node,
}

/// Symmetric 2x2 power-density matrix field, stored as the three entries
/// `H11, H12, H22` plus the determinant per element or per node.
///
/// When built from solution gradients the determinant is evaluated as
/// `sigma^2 (grad u1 x grad u2)^2`, the algebraically identical form that
/// stays nonnegative where the gradients are numerically near-parallel
/// (`H11 H22 - H12^2` cancels catastrophically there).  Whenever the stored
/// entries change (projection, noise, flooring) the determinant is
/// recomputed from them.
#[derive(Debug, Clone)]
pub struct PowerDensityField {
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    pub h22: Vec<f64>,
    pub det: Vec<f64>,
    pub support: Support,
}

impl PowerDensityField {
    /// Assemble from raw entries; the determinant comes from the entries.
    pub fn from_entries(h11: Vec<f64>, h12: Vec<f64>, h22: Vec<f64>, support: Support) -> Self {
        let det = (0..h11.len())
            .map(|i| h11[i] * h22[i] - h12[i] * h12[i])
            .collect();
        Self {
            h11,
            h12,
            h22,
            det,
            support,
        }
    }

    pub fn len(&self) -> usize {
        self.h11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h11.is_empty()
    }

    pub fn det(&self, i: usize) -> f64 {
        self.det[i]
    }

    pub fn min_det(&self) -> f64 {
        self.det.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Area-weighted projection of an element field onto the nodes.  The
    /// determinant is projected alongside the entries: differencing the
    /// projected entries instead would reintroduce the cancellation the
    /// elementwise cross-product form avoids.
    pub fn to_nodal(&self, mesh: &Mesh) -> Result<PowerDensityField> {
        if self.support != Support::Element || self.len() != mesh.triangle_count() {
            return Err(Error::Parameter(
                "nodal projection needs an element-supported field on this mesh".into(),
            ));
        }
        let project = |v: &Vec<f64>| {
            let e = ElementField { values: v.clone() };
            fem::element_to_node(mesh, &e).values
        };
        Ok(PowerDensityField {
            h11: project(&self.h11),
            h12: project(&self.h12),
            h22: project(&self.h22),
            det: project(&self.det),
            support: Support::Node,
        })
    }
}

/// Per-element `H_ij = sigma(centroid) grad(u_i) . grad(u_j)`.
pub fn power_density(
    mesh: &Mesh,
    phantom: &Phantom,
    u1: &NodalField,
    u2: &NodalField,
) -> PowerDensityField {
    let g1 = fem::gradient(mesh, u1);
    let g2 = fem::gradient(mesh, u2);
    power_density_from_gradients(mesh, phantom, &g1, &g2)
}

pub fn power_density_from_gradients(
    mesh: &Mesh,
    phantom: &Phantom,
    g1: &ElementVectorField,
    g2: &ElementVectorField,
) -> PowerDensityField {
    let n = mesh.triangle_count();
    let mut h11 = Vec::with_capacity(n);
    let mut h12 = Vec::with_capacity(n);
    let mut h22 = Vec::with_capacity(n);
    let mut det = Vec::with_capacity(n);
    for t in 0..n {
        let c = mesh.centroid(t);
        let s = phantom.eval(c[0], c[1]);
        let (a, b) = (g1.values[t], g2.values[t]);
        h11.push(s * (a[0] * a[0] + a[1] * a[1]));
        h12.push(s * (a[0] * b[0] + a[1] * b[1]));
        h22.push(s * (b[0] * b[0] + b[1] * b[1]));
        let cross = a[0] * b[1] - a[1] * b[0];
        det.push(s * s * cross * cross);
    }
    PowerDensityField {
        h11,
        h12,
        h22,
        det,
        support: Support::Element,
    }
}

/// Angle of a 2-vector in `(-pi, pi]`, with components snapped to zero when
/// they are pure roundoff relative to the other (so an exactly axis-aligned
/// gradient computed in floating point lands on 0, pi/2, pi or -pi/2).
pub fn vector_angle(v: [f64; 2]) -> f64 {
    let scale = v[0].abs().max(v[1].abs());
    let gx = if v[0].abs() <= 1e-13 * scale { 0.0 } else { v[0] };
    let gy = if v[1].abs() <= 1e-13 * scale { 0.0 } else { v[1] };
    gy.atan2(gx)
}

/// Gradient magnitudes at or below this are treated as vanished.
pub const ZERO_GRADIENT_TOL: f64 = 1e-12;

/// Per-element rotation angle `theta = arg(grad u1)` in `(-pi, pi]`, plus the
/// indices of elements where the gradient vanished and the angle is
/// meaningless.
pub fn true_theta(mesh: &Mesh, u1: &NodalField) -> (ElementField, Vec<usize>) {
    let g = fem::gradient(mesh, u1);
    let mut flagged = Vec::new();
    let values = g
        .values
        .iter()
        .enumerate()
        .map(|(t, v)| {
            if v[0].abs().max(v[1].abs()) <= ZERO_GRADIENT_TOL {
                flagged.push(t);
                0.0
            } else {
                vector_angle(*v)
            }
        })
        .collect();
    (ElementField { values }, flagged)
}
