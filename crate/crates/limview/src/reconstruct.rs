//! Two-step reconstruction of an isotropic conductivity from power-density
//! data.
//!
//! Step one recovers the rotation angle `theta` of the normalized solution
//! frame.  Writing `S = [sqrt(sigma) grad u1, sqrt(sigma) grad u2]`, the
//! lower-triangular transfer matrix `T` obtained by Gram-Schmidt
//! orthonormalization satisfies `R = S T^t` with `R` a rotation by `theta`;
//! `T` and the log-derivative fields `V_ij = sum_k grad(T_ik) T^(kj)` are
//! computable from the data matrix alone:
//!
//! ```text
//! T = [ H11^(-1/2)            0            ]      D = sqrt(det H)
//!     [ -H12 H11^(-1/2)/D     H11^(1/2)/D  ]
//!
//! V11 = grad log H11^(-1/2)        V12 = 0
//! V21 = -(H11/D) grad(H12/H11)     V22 = grad log(H11^(1/2)/D)
//! ```
//!
//! The angle solves `grad theta = F` with
//! `F = (V12 - V21 - J grad log D) / 2`, posed here weakly as a Poisson
//! problem with the known boundary angle (unwrapped along the boundary so the
//! Dirichlet data is free of spurious 2*pi jumps).
//!
//! Step two recovers `log sigma` from `grad log sigma = G`.  With
//! `M = V11 - V22`, `N = V12 + V21`, `U = diag(1, -1)` and `J` the quarter
//! turn, the resolution identity used here is
//!
//! ```text
//! G = cos(2 theta) [U M + J U N] + sin(2 theta) [J U M - U N],
//! ```
//!
//! which is the unique two-coefficient combination of `U M`, `J U N`,
//! `U N`, `J U M` that vanishes on exact data with constant conductivity;
//! the exactness tests below pin both signs.  `log sigma` is then solved as
//! a Poisson problem with the true boundary conductivity as Dirichlet data.

use crate::error::{Error, Result};
use crate::fem::{self, LoadSpec};
use crate::forward::{PowerDensityField, Support};
use crate::mesh::{BoundaryTrace, ElementField, ElementVectorField, Mesh, NodalField};
use std::f64::consts::TAU;

/// Lower-triangular transfer matrix entries per data point (`T12 = 0`).
#[derive(Debug, Clone)]
pub struct TransferField {
    pub t11: Vec<f64>,
    pub t21: Vec<f64>,
    pub t22: Vec<f64>,
    pub support: Support,
}

/// The matrix log-derivative fields of `T`, one 2-vector per element.
/// `V12` vanishes identically for the Gram-Schmidt normalization but is kept
/// so the combination formulas read like the algebra.
#[derive(Debug, Clone)]
pub struct VFields {
    pub v11: Vec<[f64; 2]>,
    pub v12: Vec<[f64; 2]>,
    pub v21: Vec<[f64; 2]>,
    pub v22: Vec<[f64; 2]>,
}

fn check_positive(h: &PowerDensityField, what: &str) -> Result<()> {
    let mut bad = Vec::new();
    for i in 0..h.len() {
        if !(h.h11[i] > 0.0) || !(h.det(i) > 0.0) {
            bad.push(i);
        }
    }
    if bad.is_empty() {
        return Ok(());
    }
    let shown: Vec<usize> = bad.iter().take(8).copied().collect();
    Err(Error::DegenerateData(format!(
        "{what}: H11 or det(H) non-positive at {} locations (first: {shown:?}); \
         floor the eigenvalues first",
        bad.len()
    )))
}

/// Gram-Schmidt transfer matrix from the data matrix.
pub fn transfer_matrix(h: &PowerDensityField) -> Result<TransferField> {
    check_positive(h, "transfer matrix")?;
    let n = h.len();
    let mut t11 = Vec::with_capacity(n);
    let mut t21 = Vec::with_capacity(n);
    let mut t22 = Vec::with_capacity(n);
    for i in 0..n {
        let d = h.det(i).sqrt();
        let s = h.h11[i].sqrt();
        t11.push(1.0 / s);
        t21.push(-h.h12[i] / (s * d));
        t22.push(s / d);
    }
    Ok(TransferField {
        t11,
        t21,
        t22,
        support: h.support,
    })
}

/// Log-derivative fields from a nodal data matrix.
///
/// The three scalar fields `log H11^(-1/2)`, `H12/H11` and
/// `log(H11^(1/2)/D)` are formed nodally and differentiated as P1 fields;
/// the `H11/D` factor of `V21` enters as the vertex average per element.
pub fn v_fields(mesh: &Mesh, h_nodal: &PowerDensityField) -> Result<VFields> {
    if h_nodal.support != Support::Node || h_nodal.len() != mesh.node_count() {
        return Err(Error::Parameter(
            "v_fields needs a nodal data matrix on this mesh".into(),
        ));
    }
    check_positive(h_nodal, "log-derivative fields")?;

    let n = mesh.node_count();
    let mut s1 = vec![0.0; n]; // log H11^(-1/2)
    let mut s2 = vec![0.0; n]; // H12 / H11
    let mut s3 = vec![0.0; n]; // log(H11^(1/2) / D)
    let mut scale21 = vec![0.0; n]; // H11 / D
    for i in 0..n {
        let h11 = h_nodal.h11[i];
        let d = h_nodal.det(i).sqrt();
        s1[i] = -0.5 * h11.ln();
        s2[i] = h_nodal.h12[i] / h11;
        s3[i] = 0.5 * h11.ln() - d.ln();
        scale21[i] = h11 / d;
    }
    let grad_of = |v: &Vec<f64>| fem::gradient(mesh, &NodalField { values: v.clone() }).values;
    let g1 = grad_of(&s1);
    let g2 = grad_of(&s2);
    let g3 = grad_of(&s3);

    let m = mesh.triangle_count();
    let mut v21 = Vec::with_capacity(m);
    for t in 0..m {
        let tri = mesh.triangles()[t];
        let avg = (scale21[tri[0]] + scale21[tri[1]] + scale21[tri[2]]) / 3.0;
        v21.push([-avg * g2[t][0], -avg * g2[t][1]]);
    }
    Ok(VFields {
        v11: g1,
        v12: vec![[0.0; 2]; m],
        v21,
        v22: g3,
    })
}

fn rot90(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// The gradient field of the rotation angle:
/// `F = (V12 - V21 - J grad log D) / 2` per element.
pub fn f_field(
    mesh: &Mesh,
    v: &VFields,
    h_nodal: &PowerDensityField,
) -> Result<ElementVectorField> {
    if h_nodal.support != Support::Node {
        return Err(Error::Parameter("f_field needs nodal data".into()));
    }
    check_positive(h_nodal, "angle gradient field")?;
    let log_d = NodalField {
        values: (0..h_nodal.len()).map(|i| 0.5 * h_nodal.det(i).ln()).collect(),
    };
    let grad_log_d = fem::gradient(mesh, &log_d);
    let values = (0..mesh.triangle_count())
        .map(|t| {
            let j = rot90(grad_log_d.values[t]);
            [
                0.5 * (v.v12[t][0] - v.v21[t][0] - j[0]),
                0.5 * (v.v12[t][1] - v.v21[t][1] - j[1]),
            ]
        })
        .collect();
    Ok(ElementVectorField { values })
}

/// Unwrapped boundary angle: raw values plus per-node integer multiples of
/// 2*pi chosen so successive differences never exceed pi in absolute value.
#[derive(Debug, Clone)]
pub struct ThetaTrace {
    /// Unwrapped values, `raw + 2*pi*offsets`.
    pub values: Vec<f64>,
    /// Integer multiple of 2*pi applied at each boundary node.
    pub offsets: Vec<i32>,
}

/// Sequential unwrapping of a wrapped boundary trace (values in `(-pi, pi]`),
/// walking the boundary from the first node.  A successive difference of
/// magnitude above pi is a wrap; the span that follows is shifted by the
/// compensating multiple of 2*pi.  More than 8 wraps is rejected as
/// pathological.
pub fn unwrap_theta_trace(raw: &[f64]) -> Result<ThetaTrace> {
    if raw.is_empty() {
        return Err(Error::Parameter("empty boundary trace".into()));
    }
    let mut offsets = Vec::with_capacity(raw.len());
    let mut jumps = 0usize;
    let mut k: i32 = 0;
    offsets.push(0);
    for w in raw.windows(2) {
        let diff = w[1] - w[0];
        if diff > std::f64::consts::PI {
            k -= 1;
            jumps += 1;
        } else if diff < -std::f64::consts::PI {
            k += 1;
            jumps += 1;
        }
        offsets.push(k);
    }
    if jumps > 8 {
        return Err(Error::PathologicalTrace(format!(
            "{jumps} wraps along the boundary"
        )));
    }
    let values = raw
        .iter()
        .zip(&offsets)
        .map(|(&v, &k)| v + TAU * k as f64)
        .collect();
    Ok(ThetaTrace { values, offsets })
}

/// Solve the angle Poisson problem: unit-conductivity stiffness, weak
/// divergence of `F` as load, unwrapped boundary angle as Dirichlet data.
pub fn reconstruct_theta(
    mesh: &Mesh,
    f: &ElementVectorField,
    trace: &ThetaTrace,
) -> Result<NodalField> {
    let bc = BoundaryTrace::new(mesh, trace.values.clone())?;
    let load = fem::weak_divergence_load(mesh, f);
    let one = ElementField::constant(mesh, 1.0);
    fem::solve_dirichlet(mesh, &one, &LoadSpec::WeakForm(&load), &bc)
}

/// The two-coefficient combination behind the log-conductivity gradient.
/// `m = V11 - V22`, `n = V12 + V21` per element.
fn g_combination(theta: f64, m: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    let (s, c) = (2.0 * theta).sin_cos();
    // U v = (v_x, -v_y);  J U v = (v_y, v_x).
    let k_cos = [m[0] + n[1], -m[1] + n[0]];
    let k_sin = [m[1] - n[0], m[0] + n[1]];
    [c * k_cos[0] + s * k_sin[0], c * k_cos[1] + s * k_sin[1]]
}

/// Per-element log-conductivity gradient `G` from the angle and the
/// log-derivative fields; the angle enters through its element average.
pub fn g_field(mesh: &Mesh, theta: &NodalField, v: &VFields) -> ElementVectorField {
    let values = (0..mesh.triangle_count())
        .map(|t| {
            let tri = mesh.triangles()[t];
            let th =
                (theta.values[tri[0]] + theta.values[tri[1]] + theta.values[tri[2]]) / 3.0;
            let m = [
                v.v11[t][0] - v.v22[t][0],
                v.v11[t][1] - v.v22[t][1],
            ];
            let n = [
                v.v12[t][0] + v.v21[t][0],
                v.v12[t][1] + v.v21[t][1],
            ];
            g_combination(th, m, n)
        })
        .collect();
    ElementVectorField { values }
}

/// Solve the log-conductivity Poisson problem and exponentiate.
/// `sigma_trace` must be positive on every boundary node.
pub fn reconstruct_sigma(
    mesh: &Mesh,
    g: &ElementVectorField,
    sigma_trace: &BoundaryTrace,
) -> Result<NodalField> {
    if let Some(&v) = sigma_trace.values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Parameter(format!(
            "conductivity trace must be positive, found {v}"
        )));
    }
    let log_bc = BoundaryTrace {
        values: sigma_trace.values.iter().map(|v| v.ln()).collect(),
    };
    let load = fem::weak_divergence_load(mesh, g);
    let one = ElementField::constant(mesh, 1.0);
    let log_sigma = fem::solve_dirichlet(mesh, &one, &LoadSpec::WeakForm(&load), &log_bc)?;
    NodalField::new(
        mesh,
        log_sigma.values.iter().map(|v| v.exp()).collect(),
    )
}

/// Relative L2 errors of the angle itself and of `(cos 2 theta, sin 2 theta)`.
/// The trigonometric pair is the wrap-insensitive metric: it is what the
/// conductivity step actually consumes.  When the true angle field is
/// (numerically) zero everywhere, the angle error degrades to the absolute
/// L2 norm of the reconstruction, the natural scale for angles being O(1).
pub fn theta_metrics(
    mesh: &Mesh,
    reconstructed: &NodalField,
    true_theta: &NodalField,
) -> Result<(f64, f64, f64)> {
    let ref_norm = fem::l2_norm(mesh, true_theta);
    let err_theta = if ref_norm > 1e-9 {
        fem::relative_l2_error(mesh, reconstructed, true_theta)?
    } else {
        let diff = NodalField {
            values: reconstructed
                .values
                .iter()
                .zip(&true_theta.values)
                .map(|(a, b)| a - b)
                .collect(),
        };
        fem::l2_norm(mesh, &diff)
    };
    let map = |f: &NodalField, g: fn(f64) -> f64| NodalField {
        values: f.values.iter().map(|&v| g(2.0 * v)).collect(),
    };
    let err_cos = fem::relative_l2_error(
        mesh,
        &map(reconstructed, f64::cos),
        &map(true_theta, f64::cos),
    )?;
    let err_sin = fem::relative_l2_error(
        mesh,
        &map(reconstructed, f64::sin),
        &map(true_theta, f64::sin),
    )?;
    Ok((err_theta, err_cos, err_sin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem;
    use crate::forward::{power_density, Phantom};
    use crate::mesh::{build_disk_mesh, boundary_angles};
    use std::f64::consts::PI;

    fn constant_h(mesh: &Mesh, h11: f64, h12: f64, h22: f64) -> PowerDensityField {
        let n = mesh.node_count();
        PowerDensityField::from_entries(
            vec![h11; n],
            vec![h12; n],
            vec![h22; n],
            Support::Node,
        )
    }

    #[test]
    fn transfer_matrix_of_identity_is_identity() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let h = constant_h(&mesh, 1.0, 0.0, 1.0);
        let t = transfer_matrix(&h).unwrap();
        for i in 0..h.len() {
            assert!((t.t11[i] - 1.0).abs() < 1e-15);
            assert!(t.t21[i].abs() < 1e-15);
            assert!((t.t22[i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn transfer_matrix_of_diagonal_data() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let h = constant_h(&mesh, 4.0, 0.0, 1.0);
        let t = transfer_matrix(&h).unwrap();
        // D = 2: entries (0.5, 0, 1).
        for i in 0..h.len() {
            assert!((t.t11[i] - 0.5).abs() < 1e-15);
            assert!(t.t21[i].abs() < 1e-15);
            assert!((t.t22[i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn transfer_structure_identity() {
        // T11 * T22 * D = 1 pointwise, for any admissible data.
        let mesh = build_disk_mesh(0.2).unwrap();
        let n = mesh.node_count();
        let h = PowerDensityField::from_entries(
            (0..n).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect(),
            (0..n).map(|i| 0.2 * ((i % 5) as f64 - 2.0)).collect(),
            (0..n).map(|i| 2.0 + 0.05 * (i % 11) as f64).collect(),
            Support::Node,
        );
        let t = transfer_matrix(&h).unwrap();
        for i in 0..n {
            let d = h.det(i).sqrt();
            assert!((t.t11[i] * t.t22[i] * d - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn transfer_matrix_rejects_degenerate_data() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let n = mesh.node_count();
        let mut h22 = vec![1.0; n];
        h22[3] = -1.0;
        let h = PowerDensityField::from_entries(vec![1.0; n], vec![0.0; n], h22, Support::Node);
        match transfer_matrix(&h) {
            Err(Error::DegenerateData(msg)) => assert!(msg.contains('3'), "{msg}"),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn v_fields_vanish_for_constant_data() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let h = constant_h(&mesh, 2.0, 0.3, 1.5);
        let v = v_fields(&mesh, &h).unwrap();
        for t in 0..mesh.triangle_count() {
            for f in [v.v11[t], v.v12[t], v.v21[t], v.v22[t]] {
                assert!(f[0].abs() < 1e-10 && f[1].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn v11_of_exponential_h11() {
        // H11 = e^(2 x), H12 = 0, H22 = 1: V11 = -(1, 0) exactly (the log is
        // linear, so its P1 gradient is exact).
        let mesh = build_disk_mesh(0.1).unwrap();
        let n = mesh.node_count();
        let h = PowerDensityField::from_entries(
            mesh.nodes().iter().map(|p| (2.0 * p[0]).exp()).collect(),
            vec![0.0; n],
            vec![1.0; n],
            Support::Node,
        );
        let v = v_fields(&mesh, &h).unwrap();
        for t in 0..mesh.triangle_count() {
            assert!((v.v11[t][0] + 1.0).abs() < 1e-10, "{:?}", v.v11[t]);
            assert!(v.v11[t][1].abs() < 1e-10);
        }
    }

    #[test]
    fn f_field_for_conformal_scaling() {
        // H = diag(e^(2y), e^(2y)): grad log D = (0, 2), so F = (1, 0).
        let mesh = build_disk_mesh(0.1).unwrap();
        let n = mesh.node_count();
        let e2y: Vec<f64> = mesh.nodes().iter().map(|p| (2.0 * p[1]).exp()).collect();
        let h = PowerDensityField::from_entries(
            e2y.clone(),
            vec![0.0; n],
            e2y,
            Support::Node,
        );
        let v = v_fields(&mesh, &h).unwrap();
        let f = f_field(&mesh, &v, &h).unwrap();
        for t in 0..mesh.triangle_count() {
            assert!((f.values[t][0] - 1.0).abs() < 1e-10, "{:?}", f.values[t]);
            assert!(f.values[t][1].abs() < 1e-10);
        }
    }

    #[test]
    fn f_and_theta_vanish_on_trivial_exact_data() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let h = constant_h(&mesh, 1.0, 0.0, 1.0);
        let v = v_fields(&mesh, &h).unwrap();
        let f = f_field(&mesh, &v, &h).unwrap();
        for t in 0..mesh.triangle_count() {
            assert!(f.values[t][0].abs() < 1e-12 && f.values[t][1].abs() < 1e-12);
        }
        let trace = ThetaTrace {
            values: vec![0.0; mesh.boundary_nodes().len()],
            offsets: vec![0; mesh.boundary_nodes().len()],
        };
        let theta = reconstruct_theta(&mesh, &f, &trace).unwrap();
        for &v in &theta.values {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn angle_gradient_matches_for_quadratic_harmonic_pair() {
        // u1 = Re z^2, u2 = Im z^2, sigma = 1 away from the origin:
        // theta = -atan2(y, x) and F should track grad theta.  Work on an
        // analytic H to isolate the field formulas from the solver.
        let mesh = build_disk_mesh(0.05).unwrap();
        let n = mesh.node_count();
        let mut h11 = Vec::with_capacity(n);
        for p in mesh.nodes() {
            let r2 = p[0] * p[0] + p[1] * p[1];
            h11.push(4.0 * r2.max(1e-12));
        }
        let h = PowerDensityField::from_entries(h11.clone(), vec![0.0; n], h11, Support::Node);
        let v = v_fields(&mesh, &h).unwrap();
        let f = f_field(&mesh, &v, &h).unwrap();
        // Compare on elements away from the origin (the data degenerates there).
        for t in 0..mesh.triangle_count() {
            let c = mesh.centroid(t);
            let r2 = c[0] * c[0] + c[1] * c[1];
            if r2 < 0.2 {
                continue;
            }
            let want = [c[1] / r2, -c[0] / r2]; // grad(-atan2(y,x))
            let got = f.values[t];
            let scale = (want[0].powi(2) + want[1].powi(2)).sqrt();
            let err = ((got[0] - want[0]).powi(2) + (got[1] - want[1]).powi(2)).sqrt();
            assert!(err < 0.08 * scale.max(1.0), "at {c:?}: {got:?} vs {want:?}");
        }
    }

    // -----------------------------------------------------------------------
    // The sign-pinning tests for the log-conductivity combination.
    // -----------------------------------------------------------------------

    #[test]
    fn g_combination_vanishes_for_axis_aligned_exact_data() {
        // u1 = x, u2 = (y+2)^2 - x^2, sigma = 1 (both harmonic, Jacobian
        // 2(y+2) > 0 on the disk).  Then theta = 0 and
        //   V11 = 0, V21 = (1/(y+2), 0), V22 = (0, -1/(y+2)),
        // so m = (0, 1/(y+2)), n = (1/(y+2), 0) and G must vanish pointwise.
        for (x, y) in [(0.0, 0.0), (0.5, -0.3), (-0.7, 0.6), (0.2, 0.9)] {
            let w = y + 2.0;
            let m = [0.0, 1.0 / w];
            let n = [1.0 / w, 0.0];
            let g = g_combination(0.0, m, n);
            assert!(
                g[0].abs() < 1e-15 && g[1].abs() < 1e-15,
                "at ({x},{y}): {g:?}"
            );
        }
    }

    #[test]
    fn g_combination_vanishes_for_rotated_exact_data() {
        // The same pair rotated by 45 degrees: theta = pi/4 everywhere and
        //   m = (-1, 1)/(w sqrt(2)), n = (1, 1)/(w sqrt(2))
        // with w the rotated ordinate plus 2.  The sine coefficient must
        // cancel on its own.
        for w in [1.0_f64, 1.7, 2.9] {
            let s = 1.0 / (w * 2.0_f64.sqrt());
            let m = [-s, s];
            let n = [s, s];
            let g = g_combination(PI / 4.0, m, n);
            assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15, "w = {w}: {g:?}");
        }
    }

    #[test]
    fn g_combination_recovers_log_gradient_for_layered_conductivity() {
        // sigma = sigma(x), u1 with grad u1 = (1/sigma, 0), u2 = y + u1:
        // H11 = 1/sigma, H12 = 1/sigma, H22 = sigma + 1/sigma, D = 1,
        // theta = 0, V11 = (g/2, 0) = -V22 with g = (log sigma)', V21 = 0.
        for g in [-1.3_f64, 0.4, 2.0] {
            let m = [g, 0.0];
            let n = [0.0, 0.0];
            let got = g_combination(0.0, m, n);
            assert!((got[0] - g).abs() < 1e-15 && got[1].abs() < 1e-15);
        }
    }

    #[test]
    fn g_field_identity_error_shrinks_under_refinement() {
        // Mesh-level version of the axis-aligned exact-data identity: the
        // discrete G is pure discretization error and must shrink with h.
        let max_g = |h: f64| -> f64 {
            let mesh = build_disk_mesh(h).unwrap();
            let n = mesh.node_count();
            let h11 = vec![1.0; n];
            let mut h12 = Vec::with_capacity(n);
            let mut h22 = Vec::with_capacity(n);
            for p in mesh.nodes() {
                let w = p[1] + 2.0;
                h12.push(-2.0 * p[0]);
                h22.push(4.0 * p[0] * p[0] + 4.0 * w * w);
            }
            let hf = PowerDensityField::from_entries(h11, h12, h22, Support::Node);
            let v = v_fields(&mesh, &hf).unwrap();
            let theta = NodalField::constant(&mesh, 0.0);
            let g = g_field(&mesh, &theta, &v);
            g.values
                .iter()
                .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
                .fold(0.0, f64::max)
        };
        let coarse = max_g(0.1);
        let fine = max_g(0.05);
        assert!(coarse < 0.2, "coarse-level identity error {coarse}");
        assert!(fine < 0.6 * coarse, "no decay: {coarse} -> {fine}");
    }

    #[test]
    fn g_field_is_invariant_under_angle_shifts_of_two_pi() {
        let mesh = build_disk_mesh(0.15).unwrap();
        let h = PowerDensityField::from_entries(
            mesh.nodes().iter().map(|p| 1.5 + 0.5 * p[0]).collect(),
            mesh.nodes().iter().map(|p| 0.2 * p[1]).collect(),
            mesh.nodes().iter().map(|p| 2.0 + 0.3 * p[1]).collect(),
            Support::Node,
        );
        assert!(h.min_det() > 0.0);
        let v = v_fields(&mesh, &h).unwrap();
        let theta = NodalField::from_fn(&mesh, |x, y| 0.7 * x - 0.4 * y);
        let shifted = NodalField {
            values: theta.values.iter().map(|v| v + TAU).collect(),
        };
        let g0 = g_field(&mesh, &theta, &v);
        let g1 = g_field(&mesh, &shifted, &v);
        for t in 0..mesh.triangle_count() {
            assert!((g0.values[t][0] - g1.values[t][0]).abs() <= 1e-12);
            assert!((g0.values[t][1] - g1.values[t][1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn orthonormalization_produces_rotations_on_synthetic_data() {
        // S from the harmonic pair f = z + 0.3 z^2 (Jacobian |f'|^2 > 0 on
        // the disk), sigma = 1.  R = S T^t must satisfy R^t R = I with
        // det R = +1, elementwise.
        let mesh = build_disk_mesh(0.1).unwrap();
        let u1 = NodalField::from_fn(&mesh, |x, y| x + 0.3 * (x * x - y * y));
        let u2 = NodalField::from_fn(&mesh, |x, y| y + 0.6 * x * y);
        let g1 = fem::gradient(&mesh, &u1);
        let g2 = fem::gradient(&mesh, &u2);
        let h = power_density(&mesh, &Phantom::Constant(1.0), &u1, &u2);
        let t = transfer_matrix(&h).unwrap();
        for e in 0..mesh.triangle_count() {
            let s = [g1.values[e], g2.values[e]]; // columns
            // R = S T^t: columns R1 = T11 S1 + T12 S2, R2 = T21 S1 + T22 S2.
            let r1 = [t.t11[e] * s[0][0], t.t11[e] * s[0][1]];
            let r2 = [
                t.t21[e] * s[0][0] + t.t22[e] * s[1][0],
                t.t21[e] * s[0][1] + t.t22[e] * s[1][1],
            ];
            let dot = r1[0] * r2[0] + r1[1] * r2[1];
            let n1 = r1[0] * r1[0] + r1[1] * r1[1];
            let n2 = r2[0] * r2[0] + r2[1] * r2[1];
            let det = r1[0] * r2[1] - r1[1] * r2[0];
            assert!((n1 - 1.0).abs() < 1e-10, "|R1| at element {e}");
            assert!((n2 - 1.0).abs() < 1e-10, "|R2| at element {e}");
            assert!(dot.abs() < 1e-10, "R1 . R2 at element {e}");
            assert!((det - 1.0).abs() < 1e-10, "det R at element {e}");
        }
    }

    // -----------------------------------------------------------------------
    // Unwrapping
    // -----------------------------------------------------------------------

    fn total_variation(v: &[f64]) -> f64 {
        v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    #[test]
    fn unwrap_constant_trace_is_untouched() {
        let raw = vec![0.0; 40];
        let tr = unwrap_theta_trace(&raw).unwrap();
        assert!(tr.offsets.iter().all(|&k| k == 0));
        assert_eq!(tr.values, raw);
    }

    #[test]
    fn unwrap_linear_normal_angle_trace() {
        // theta(t) = angle of the outward normal = t, wrapped into (-pi, pi]:
        // one wrap at t = pi, and the unwrapped trace is linear again.
        let mesh = build_disk_mesh(0.1).unwrap();
        let raw: Vec<f64> = boundary_angles(&mesh)
            .iter()
            .map(|&t| if t <= PI { t } else { t - TAU })
            .collect();
        let tr = unwrap_theta_trace(&raw).unwrap();
        let angles = boundary_angles(&mesh);
        for (k, &t) in angles.iter().enumerate() {
            assert!((tr.values[k] - t).abs() < 1e-12, "node {k}");
        }
        let spans: Vec<i32> = tr.offsets.clone();
        assert_eq!(spans[0], 0);
        assert_eq!(*spans.last().unwrap(), 1);
        assert!(total_variation(&tr.values) <= total_variation(&raw) + 1e-12);
    }

    #[test]
    fn unwrap_matches_prescribed_two_jump_shape() {
        // Jumps at pi/8 and pi; the span between them is shifted by exactly
        // -2*pi, everything else untouched.
        let mesh = build_disk_mesh(0.05).unwrap();
        let angles = boundary_angles(&mesh);
        let raw: Vec<f64> = angles
            .iter()
            .map(|&t| {
                if t < PI / 8.0 {
                    -PI / 2.0
                } else if t < PI {
                    2.0 * PI / 3.0
                } else {
                    -2.0 * PI / 3.0
                }
            })
            .collect();
        let tr = unwrap_theta_trace(&raw).unwrap();
        for (k, &t) in angles.iter().enumerate() {
            let want = if t >= PI / 8.0 && t < PI { -1 } else { 0 };
            assert_eq!(tr.offsets[k], want, "offset at t = {t}");
            assert!((tr.values[k] - (raw[k] + TAU * want as f64)).abs() < 1e-15);
        }
        assert!(total_variation(&tr.values) <= total_variation(&raw) + 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn unwrap_invariants_on_random_traces(
            values in proptest::collection::vec(-PI..PI, 8..64),
        ) {
            // Raw traces land in (-pi, pi]; the unwrapped trace differs by
            // whole turns, never gains total variation, and has no wraps of
            // its own.
            if let Ok(tr) = unwrap_theta_trace(&values) {
                for (k, (&u, &r)) in tr.values.iter().zip(&values).enumerate() {
                    proptest::prop_assert!((u - (r + TAU * tr.offsets[k] as f64)).abs() <= 1e-12);
                }
                proptest::prop_assert!(
                    total_variation(&tr.values) <= total_variation(&values) + 1e-12
                );
                for w in tr.values.windows(2) {
                    proptest::prop_assert!((w[1] - w[0]).abs() <= PI + 1e-12);
                }
            }
        }
    }

    #[test]
    fn unwrap_rejects_pathological_traces() {
        let raw: Vec<f64> = (0..40)
            .map(|k| if k % 2 == 0 { -3.0 } else { 3.0 })
            .collect();
        assert!(matches!(
            unwrap_theta_trace(&raw),
            Err(Error::PathologicalTrace(_))
        ));
    }

    // -----------------------------------------------------------------------
    // Poisson steps and metrics
    // -----------------------------------------------------------------------

    #[test]
    fn theta_solve_with_zero_field_and_constant_trace() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let f = ElementVectorField::constant(&mesh, [0.0, 0.0]);
        let nb = mesh.boundary_nodes().len();
        let trace = ThetaTrace {
            values: vec![1.25; nb],
            offsets: vec![0; nb],
        };
        let theta = reconstruct_theta(&mesh, &f, &trace).unwrap();
        for &v in &theta.values {
            assert!((v - 1.25).abs() < 1e-10);
        }
    }

    #[test]
    fn sigma_solve_with_zero_field_recovers_boundary_constant() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let g = ElementVectorField::constant(&mesh, [0.0, 0.0]);
        for c in [1.0, 5.0] {
            let trace = BoundaryTrace::constant(&mesh, c);
            let sigma = reconstruct_sigma(&mesh, &g, &trace).unwrap();
            for &v in &sigma.values {
                assert!((v - c).abs() < 1e-9, "{v} vs {c}");
            }
        }
    }

    #[test]
    fn sigma_solve_rejects_nonpositive_trace() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let g = ElementVectorField::constant(&mesh, [0.0, 0.0]);
        let trace = BoundaryTrace::constant(&mesh, 0.0);
        assert!(reconstruct_sigma(&mesh, &g, &trace).is_err());
    }

    #[test]
    fn theta_metric_triple_behaviour() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let a = NodalField::from_fn(&mesh, |x, y| 0.5 * x + y);
        let (e0, e1, e2) = theta_metrics(&mesh, &a, &a).unwrap();
        assert_eq!((e0, e1, e2), (0.0, 0.0, 0.0));

        let shifted = NodalField {
            values: a.values.iter().map(|v| v + TAU).collect(),
        };
        let (e0, e1, e2) = theta_metrics(&mesh, &shifted, &a).unwrap();
        assert!(e0 > 1.0, "angle error should see the shift: {e0}");
        assert!(e1 < 1e-12 && e2 < 1e-12, "trig metrics must not: {e1} {e2}");
    }
}
