//! Multiplicative perturbation of nodal power-density data and eigenvalue
//! flooring.
//!
//! Each stored entry field gets one standard-normal draw per node
//! (entry-major, node-minor order, ChaCha8 stream seeded from the config, the
//! polar transform for normal variates), the draw field is normalized by a
//! discrete L2 norm with `||1|| = 1`, and the entry is perturbed by
//! `alpha/100` times the normalized draw, multiplicatively.  Symmetry is
//! structural: the off-diagonal entry is stored once, so the symmetrization
//! step of the noisy matrix is the identity here.
//!
//! Flooring restores positive definiteness: the 2x2 symmetric matrix at each
//! node is eigendecomposed in closed form and eigenvalues are clamped from
//! below.

use crate::error::{Error, Result};
use crate::fem;
use crate::forward::{PowerDensityField, Support};
use crate::mesh::{Mesh, NodalField};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Which discrete L2 norm divides the raw draws.
///
/// The plain node-vector norm is the default: a unit-norm draw field then
/// carries per-node fluctuations of size `1/sqrt(N)`, so the percent level
/// `alpha` perturbs the data gently and the tabulated eigenvalue floors are
/// enough to restore definiteness.  The mesh-weighted norm (`sqrt(v' M v)`,
/// an integral over the disk) keeps the per-node fluctuation at order one,
/// which makes the same `alpha` a much harsher perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseNorm {
    /// Mass-matrix (mesh-weighted) integral norm.
    Mass,
    /// Euclidean norm of the node-value vector.
    #[default]
    Euclid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Noise level in percent.
    pub alpha_percent: f64,
    pub seed: u64,
    /// Lower eigenvalue bound applied after perturbation.
    pub eigen_floor: f64,
    #[serde(default)]
    pub norm: NoiseNorm,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_percent < 0.0 || !self.alpha_percent.is_finite() {
            return Err(Error::Parameter(format!(
                "alpha_percent = {}",
                self.alpha_percent
            )));
        }
        if !(self.eigen_floor > 0.0) {
            return Err(Error::Parameter(format!(
                "eigen_floor = {} must be positive",
                self.eigen_floor
            )));
        }
        Ok(())
    }
}

/// Standard normals from a uniform stream via the polar transform.
struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        // 53 uniform bits in [0, 1).
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

fn discrete_l2(mesh: &Mesh, values: &[f64], norm: NoiseNorm) -> f64 {
    match norm {
        NoiseNorm::Mass => {
            let f = NodalField {
                values: values.to_vec(),
            };
            fem::l2_norm(mesh, &f)
        }
        NoiseNorm::Euclid => values.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Perturb each entry of the nodal data matrix with seeded multiplicative
/// noise at level `alpha_percent`.  `alpha_percent = 0` returns the input
/// bit-for-bit.  Flooring is a separate step.
pub fn perturb(mesh: &Mesh, h_nodal: &PowerDensityField, cfg: &NoiseConfig) -> Result<PowerDensityField> {
    cfg.validate()?;
    if h_nodal.support != Support::Node || h_nodal.len() != mesh.node_count() {
        return Err(Error::Parameter("perturb needs nodal data on this mesh".into()));
    }
    if cfg.alpha_percent == 0.0 {
        return Ok(h_nodal.clone());
    }
    let mut sampler = NormalSampler::new(cfg.seed);
    let scale = cfg.alpha_percent / 100.0;
    let mut out = h_nodal.clone();
    for entry in [&mut out.h11, &mut out.h12, &mut out.h22] {
        let draws: Vec<f64> = (0..entry.len()).map(|_| sampler.next()).collect();
        let norm = discrete_l2(mesh, &draws, cfg.norm);
        for (v, e) in entry.iter_mut().zip(&draws) {
            *v += scale * (e / norm) * *v;
        }
    }
    Ok(PowerDensityField::from_entries(
        out.h11,
        out.h12,
        out.h22,
        out.support,
    ))
}

/// Clamp the eigenvalues of the symmetric 2x2 matrix at each node to at
/// least `floor`, keeping the eigenvectors.  Matrices already at or above the
/// floor pass through unchanged.
pub fn eigen_floor(h_nodal: &PowerDensityField, floor: f64) -> Result<PowerDensityField> {
    if !(floor > 0.0) {
        return Err(Error::Parameter(format!("floor = {floor} must be positive")));
    }
    let mut out = h_nodal.clone();
    for i in 0..out.len() {
        let (a, b, c) = (out.h11[i], out.h12[i], out.h22[i]);
        let mean = 0.5 * (a + c);
        let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lo = mean - half_gap;
        let hi = mean + half_gap;
        if lo >= floor {
            continue;
        }
        let lo_c = lo.max(floor);
        let hi_c = hi.max(floor);
        if half_gap < 1e-300 {
            // Isotropic matrix: eigenvectors arbitrary, clamp in place.
            out.h11[i] = hi_c;
            out.h12[i] = 0.0;
            out.h22[i] = hi_c;
            continue;
        }
        // Unit eigenvector for the larger eigenvalue: orthogonal complement
        // of a row of (A - hi I), taking the better-conditioned row.
        let v1 = [b, hi - a];
        let v2 = [hi - c, b];
        let n1 = v1[0] * v1[0] + v1[1] * v1[1];
        let n2 = v2[0] * v2[0] + v2[1] * v2[1];
        let (ex, ey) = if n1 >= n2 {
            let n = n1.sqrt();
            (v1[0] / n, v1[1] / n)
        } else {
            let n = n2.sqrt();
            (v2[0] / n, v2[1] / n)
        };
        // Rebuild from the clamped spectrum: hi_c e e^t + lo_c (e_perp e_perp^t).
        let (px, py) = (-ey, ex);
        out.h11[i] = hi_c * ex * ex + lo_c * px * px;
        out.h12[i] = hi_c * ex * ey + lo_c * px * py;
        out.h22[i] = hi_c * ey * ey + lo_c * py * py;
    }
    Ok(PowerDensityField::from_entries(
        out.h11,
        out.h12,
        out.h22,
        out.support,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    fn eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
        let mean = 0.5 * (a + c);
        let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    fn sample_field(mesh: &Mesh) -> PowerDensityField {
        PowerDensityField::from_entries(
            mesh.nodes().iter().map(|p| 1.5 + 0.2 * p[0]).collect(),
            mesh.nodes().iter().map(|p| 0.1 * p[1]).collect(),
            mesh.nodes().iter().map(|p| 2.0 - 0.3 * p[1]).collect(),
            Support::Node,
        )
    }

    #[test]
    fn zero_alpha_is_the_identity() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let h = sample_field(&mesh);
        let cfg = NoiseConfig {
            alpha_percent: 0.0,
            seed: 50,
            eigen_floor: 1e-6,
            norm: NoiseNorm::Mass,
        };
        let out = perturb(&mesh, &h, &cfg).unwrap();
        assert_eq!(out.h11, h.h11);
        assert_eq!(out.h12, h.h12);
        assert_eq!(out.h22, h.h22);
    }

    #[test]
    fn normalization_makes_unit_noise_field_at_alpha_100() {
        // At alpha = 100 and unit data, the per-node relative perturbation
        // is exactly the normalized draw field, whose norm is 1 by
        // construction (in whichever norm the config selects).
        let mesh = build_disk_mesh(0.1).unwrap();
        let n = mesh.node_count();
        let h = PowerDensityField::from_entries(
            vec![1.0; n],
            vec![0.0; n],
            vec![1.0; n],
            Support::Node,
        );
        for norm in [NoiseNorm::Mass, NoiseNorm::Euclid] {
            let cfg = NoiseConfig {
                alpha_percent: 100.0,
                seed: 50,
                eigen_floor: 1e-6,
                norm,
            };
            let out = perturb(&mesh, &h, &cfg).unwrap();
            let rel: Vec<f64> = out
                .h11
                .iter()
                .zip(&h.h11)
                .map(|(a, b)| (a - b) / b)
                .collect();
            let num = discrete_l2(&mesh, &rel, norm);
            assert!(
                (num - 1.0).abs() <= 1e-9,
                "{norm:?}: relative perturbation norm {num}"
            );
        }
    }

    #[test]
    fn perturbation_is_deterministic_per_seed() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let h = sample_field(&mesh);
        let cfg = NoiseConfig {
            alpha_percent: 5.0,
            seed: 1234,
            eigen_floor: 1e-6,
            norm: NoiseNorm::Mass,
        };
        let a = perturb(&mesh, &h, &cfg).unwrap();
        let b = perturb(&mesh, &h, &cfg).unwrap();
        assert_eq!(a.h11, b.h11);
        assert_eq!(a.h12, b.h12);
        assert_eq!(a.h22, b.h22);

        let other = NoiseConfig { seed: 1235, ..cfg };
        let c = perturb(&mesh, &h, &other).unwrap();
        assert_ne!(a.h11, c.h11, "different seeds must differ");
    }

    #[test]
    fn floor_clamps_diagonal_matrix() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let n = mesh.node_count();
        let mut h = PowerDensityField::from_entries(
            vec![-0.5; n],
            vec![0.0; n],
            vec![2.0; n],
            Support::Node,
        );
        h.h11[0] = -0.5;
        let out = eigen_floor(&h, 1e-6).unwrap();
        for i in 0..n {
            assert!((out.h11[i] - 1e-6).abs() < 1e-18);
            assert!((out.h22[i] - 2.0).abs() < 1e-14);
            assert!(out.h12[i].abs() < 1e-14);
        }
    }

    #[test]
    fn floor_is_a_noop_for_spd_above_floor() {
        let mesh = build_disk_mesh(0.25).unwrap();
        let h = sample_field(&mesh);
        assert!(h.min_det() > 0.0);
        let out = eigen_floor(&h, 1e-8).unwrap();
        for i in 0..h.len() {
            assert!((out.h11[i] - h.h11[i]).abs() <= 1e-14);
            assert!((out.h12[i] - h.h12[i]).abs() <= 1e-14);
            assert!((out.h22[i] - h.h22[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn floor_fixes_rank_deficient_matrix_keeping_eigenvectors() {
        let mesh = build_disk_mesh(0.3).unwrap();
        let n = mesh.node_count();
        let h = PowerDensityField::from_entries(
            vec![1.0; n],
            vec![1.0; n],
            vec![1.0; n],
            Support::Node,
        );
        let out = eigen_floor(&h, 0.01).unwrap();
        let (lo, hi) = eigenvalues(out.h11[0], out.h12[0], out.h22[0]);
        assert!((lo - 0.01).abs() < 1e-12, "low eigenvalue {lo}");
        assert!((hi - 2.0).abs() < 1e-12, "high eigenvalue {hi}");
        // Same eigenvectors: (1,1)/sqrt(2) still maps to 2x its own direction.
        let vx = out.h11[0] + out.h12[0];
        let vy = out.h12[0] + out.h22[0];
        assert!((vx - 2.0).abs() < 1e-12 && (vy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn floor_guarantees_minimum_eigenvalue_and_is_idempotent() {
        let mesh = build_disk_mesh(0.2).unwrap();
        let n = mesh.node_count();
        // A mix of indefinite, nearly singular and healthy matrices.
        let h = PowerDensityField::from_entries(
            (0..n).map(|i| ((i % 7) as f64 - 3.0) * 0.5).collect(),
            (0..n).map(|i| ((i % 5) as f64 - 2.0) * 0.8).collect(),
            (0..n).map(|i| ((i % 3) as f64) * 1.1 - 0.4).collect(),
            Support::Node,
        );
        let floor = 1e-4;
        let once = eigen_floor(&h, floor).unwrap();
        for i in 0..n {
            let (lo, _) = eigenvalues(once.h11[i], once.h12[i], once.h22[i]);
            assert!(lo >= floor - 1e-14, "node {i}: min eigenvalue {lo}");
        }
        let twice = eigen_floor(&once, floor).unwrap();
        for i in 0..n {
            assert!((twice.h11[i] - once.h11[i]).abs() <= 1e-14);
            assert!((twice.h12[i] - once.h12[i]).abs() <= 1e-14);
            assert!((twice.h22[i] - once.h22[i]).abs() <= 1e-14);
        }
    }

    proptest::proptest! {
        #[test]
        fn floor_invariants_on_random_symmetric_matrices(
            a in -10.0f64..10.0,
            b in -10.0f64..10.0,
            c in -10.0f64..10.0,
            floor_exp in -8.0f64..0.0,
        ) {
            let floor = 10f64.powf(floor_exp);
            let mesh = build_disk_mesh(0.5).unwrap();
            let n = mesh.node_count();
            let h = PowerDensityField::from_entries(
            vec![a; n],
            vec![b; n],
            vec![c; n],
            Support::Node,
        );
            let out = eigen_floor(&h, floor).unwrap();
            let (lo_in, hi_in) = eigenvalues(a, b, c);
            let (lo, hi) = eigenvalues(out.h11[0], out.h12[0], out.h22[0]);
            // Floor is respected and never increases eigenvalues above it.
            proptest::prop_assert!(lo >= floor - 1e-12);
            proptest::prop_assert!(hi <= hi_in.max(floor) + 1e-9 * hi_in.abs().max(1.0));
            if lo_in >= floor {
                proptest::prop_assert!((out.h11[0] - a).abs() <= 1e-12);
                proptest::prop_assert!((out.h12[0] - b).abs() <= 1e-12);
                proptest::prop_assert!((out.h22[0] - c).abs() <= 1e-12);
            }
            // Idempotence.
            let again = eigen_floor(&out, floor).unwrap();
            proptest::prop_assert!((again.h11[0] - out.h11[0]).abs() <= 1e-12);
            proptest::prop_assert!((again.h12[0] - out.h12[0]).abs() <= 1e-12);
            proptest::prop_assert!((again.h22[0] - out.h22[0]).abs() <= 1e-12);
        }
    }
}
