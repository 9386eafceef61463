//! Boundary-function pairs on an arc of the unit circle, with zero extension
//! to the rest of the boundary, and the sufficient-condition validator.
//!
//! A pair `(f1, f2)` on the arc `t in [0, ell]` drives the two forward
//! solves.  Whether the resulting solution pair has a nonvanishing Jacobian
//! is governed by the curve `gamma(t) = (f1(t), f2(t))`: the validator checks
//! that `gamma` is regular, that `arg(gamma')` is monotone, and computes the
//! winding index `Ind(gamma') = (arg(gamma'(ell)) - arg(gamma'(0))) / 2*pi`.
//! With continuous zero-extended traces the usable bound is `|Ind| <= 1`;
//! if continuity holds only at the arc start, `|Ind| <= 1/2`.  Restrictions
//! of a passing continuous pair to a shorter arc remain usable even though
//! their own index may exceed 1/2; they are classified separately.

use crate::error::{Error, Result};
use crate::mesh::{boundary_angles, BoundaryTrace, Mesh};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

const ENDPOINT_TOL: f64 = 1e-9;
const SPEED_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-9;
const INDEX_TOL: f64 = 1e-6;

/// Arc `t in [0, ell]` on the unit circle; `ell = 2*pi` means full view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaArc {
    ell: f64,
}

impl GammaArc {
    /// A proper arc with `0 < ell < 2*pi`.
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell < 2.0 * PI) {
            return Err(Error::Parameter(format!(
                "arc endpoint ell = {ell} outside (0, 2*pi)"
            )));
        }
        Ok(Self { ell })
    }

    pub fn full_view() -> Self {
        Self { ell: 2.0 * PI }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn is_full_view(&self) -> bool {
        self.ell == 2.0 * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcSize {
    Small,
    Medium,
    Large,
}

impl ArcSize {
    pub fn ell(&self) -> f64 {
        match self {
            ArcSize::Small => PI / 4.0,
            ArcSize::Medium => PI,
            ArcSize::Large => 7.0 * PI / 4.0,
        }
    }
}

/// Closed form of the pair, or a sampled table.
#[derive(Debug, Clone)]
enum SpecForm {
    /// `f1(t) = cos(a t) - 1`, `f2(t) = sin(b t)` — covers all six presets.
    Trig { a: f64, b: f64 },
    /// `f1(t) = cos t`, `f2(t) = sin t` on the full boundary.
    FullViewLinear,
    /// Tabulated `(t, f1, f2)` with strictly increasing `t`.
    Sampled {
        ts: Vec<f64>,
        f1s: Vec<f64>,
        f2s: Vec<f64>,
    },
}

/// A pair of boundary functions on an arc, extended by zero outside it.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    arc: GammaArc,
    form: SpecForm,
    truncated_from_condition_a: bool,
}

impl BoundarySpec {
    pub fn arc(&self) -> GammaArc {
        self.arc
    }

    /// Evaluate `(f1, f2)` at `t` inside the arc (no zero extension applied).
    pub fn eval(&self, t: f64) -> [f64; 2] {
        match &self.form {
            SpecForm::Trig { a, b } => [(a * t).cos() - 1.0, (b * t).sin()],
            SpecForm::FullViewLinear => [t.cos(), t.sin()],
            SpecForm::Sampled { ts, f1s, f2s } => {
                [interp_table(ts, f1s, t), interp_table(ts, f2s, t)]
            }
        }
    }

    /// Tangent `gamma'(t) = (f1'(t), f2'(t))`; analytic for closed forms,
    /// central finite differences for sampled tables.
    pub fn derivative(&self, t: f64) -> [f64; 2] {
        match &self.form {
            SpecForm::Trig { a, b } => [-a * (a * t).sin(), b * (b * t).cos()],
            SpecForm::FullViewLinear => [-t.sin(), t.cos()],
            SpecForm::Sampled { ts, f1s, f2s } => {
                let d1 = central_differences(ts, f1s);
                let d2 = central_differences(ts, f2s);
                [interp_table(ts, &d1, t), interp_table(ts, &d2, t)]
            }
        }
    }

    /// Restrict the pair to `[0, ell_prime]`, `ell_prime < ell`.  The result
    /// remembers whether it was cut from a pair that passed the continuous
    /// condition, since such restrictions stay admissible by construction.
    pub fn truncate(&self, ell_prime: f64) -> Result<BoundarySpec> {
        if !(ell_prime > 0.0 && ell_prime < self.arc.ell()) {
            return Err(Error::Parameter(format!(
                "truncation endpoint {ell_prime} outside (0, {})",
                self.arc.ell()
            )));
        }
        let from_a = matches!(
            validate(self, 4096).map(|r| r.classification),
            Ok(Classification::ConditionA)
        );
        Ok(BoundarySpec {
            arc: GammaArc::new(ell_prime)?,
            form: self.form.clone(),
            truncated_from_condition_a: from_a,
        })
    }

    /// Full-view pair `(cos t, sin t)`: harmonic extensions are `x1` and `x2`.
    pub fn full_view_linear() -> Self {
        BoundarySpec {
            arc: GammaArc::full_view(),
            form: SpecForm::FullViewLinear,
            truncated_from_condition_a: false,
        }
    }

    /// Load a sampled pair from CSV with columns `t,f1,f2`, `t` strictly
    /// increasing from 0; the last `t` is the arc endpoint.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut f1s = Vec::new();
        let mut f2s = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Config(format!(
                    "line {}: expected 3 columns t,f1,f2",
                    lineno + 1
                )));
            }
            if lineno == 0 && cols[0].eq_ignore_ascii_case("t") {
                continue; // header
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            ts.push(parse(cols[0])?);
            f1s.push(parse(cols[1])?);
            f2s.push(parse(cols[2])?);
        }
        if ts.len() < 3 {
            return Err(Error::Config("need at least 3 samples".into()));
        }
        if ts[0].abs() > 1e-12 {
            return Err(Error::Config("first sample must be at t = 0".into()));
        }
        ts[0] = 0.0;
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("t column must be strictly increasing".into()));
            }
        }
        if !f1s.iter().chain(f2s.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config("non-finite sample value".into()));
        }
        let arc = GammaArc::new(*ts.last().unwrap())?;
        Ok(BoundarySpec {
            arc,
            form: SpecForm::Sampled { ts, f1s, f2s },
            truncated_from_condition_a: false,
        })
    }
}

fn interp_table(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vs[0];
    }
    if t >= *ts.last().unwrap() {
        return *vs.last().unwrap();
    }
    let k = ts.partition_point(|&x| x <= t) - 1;
    let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    vs[k] * (1.0 - w) + vs[k + 1] * w
}

fn central_differences(ts: &[f64], vs: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let mut d = vec![0.0; n];
    d[0] = (vs[1] - vs[0]) / (ts[1] - ts[0]);
    d[n - 1] = (vs[n - 1] - vs[n - 2]) / (ts[n - 1] - ts[n - 2]);
    for k in 1..n - 1 {
        d[k] = (vs[k + 1] - vs[k - 1]) / (ts[k + 1] - ts[k - 1]);
    }
    d
}

/// The built-in boundary pairs.  Continuous presets close the loop
/// (`f_i(0) = f_i(ell) = 0`); discontinuous presets jump at `t = ell`.
pub fn preset(family: Family, size: ArcSize) -> BoundarySpec {
    let (a, b) = match (family, size) {
        (Family::Continuous, ArcSize::Small) => (8.0, 8.0),
        (Family::Continuous, ArcSize::Medium) => (2.0, 2.0),
        (Family::Continuous, ArcSize::Large) => (8.0 / 7.0, 8.0 / 7.0),
        (Family::Discontinuous, ArcSize::Small) => (4.0, 5.0),
        (Family::Discontinuous, ArcSize::Medium) => (1.0, 5.0 / 4.0),
        (Family::Discontinuous, ArcSize::Large) => (4.0 / 7.0, 5.0 / 7.0),
    };
    BoundarySpec {
        arc: GammaArc { ell: size.ell() },
        form: SpecForm::Trig { a, b },
        truncated_from_condition_a: false,
    }
}

/// Which sufficient condition (if any) the pair satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Continuous zero extension and `|Ind| <= 1`.
    ConditionA,
    /// Continuity at the arc start only and `|Ind| <= 1/2`.
    ConditionB,
    /// Declared restriction of a pair satisfying the continuous condition.
    RemarkRestriction,
    Invalid,
}

/// Result of validating a [`BoundarySpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `min |gamma'| > tolerance` over the samples.
    pub regular: bool,
    /// Tangent argument increments never change sign (within tolerance).
    pub arg_monotone: bool,
    /// Winding index of the tangent, `NaN` when the curve is not regular.
    pub index: f64,
    /// Both trace components vanish at `t = 0`.
    pub continuity_at_0: bool,
    /// Both trace components vanish at `t = ell`.
    pub continuity_at_ell: bool,
    pub classification: Classification,
    /// Smallest sampled tangent speed.
    pub min_speed: f64,
}

struct TangentSweep {
    index: f64,
    monotone: bool,
    min_speed: f64,
}

fn sweep_tangent(spec: &BoundarySpec, n_samples: usize) -> Result<TangentSweep> {
    let ell = spec.arc.ell();
    let tangents: Vec<[f64; 2]> = (0..=n_samples)
        .map(|k| spec.derivative(ell * k as f64 / n_samples as f64))
        .collect();
    let mut min_speed = f64::INFINITY;
    for (k, g) in tangents.iter().enumerate() {
        let speed = (g[0] * g[0] + g[1] * g[1]).sqrt();
        min_speed = min_speed.min(speed);
        if speed < SPEED_TOL {
            return Err(Error::Regularity(format!(
                "|gamma'| = {speed:.3e} at sample {k} of {n_samples}"
            )));
        }
    }
    let mut total = 0.0;
    let mut pos = false;
    let mut neg = false;
    for w in tangents.windows(2) {
        let (u, v) = (w[0], w[1]);
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        let step = cross.atan2(dot); // wrapped to (-pi, pi]
        if step.abs() >= PI / 2.0 {
            return Err(Error::Undersampled(format!(
                "tangent turns by {step:.3} rad in one step; increase n_samples"
            )));
        }
        if step > MONOTONE_TOL {
            pos = true;
        }
        if step < -MONOTONE_TOL {
            neg = true;
        }
        total += step;
    }
    Ok(TangentSweep {
        index: total / (2.0 * PI),
        monotone: !(pos && neg),
        min_speed,
    })
}

/// Winding index of the boundary-data tangent: the accumulated continuous
/// change of `arg(gamma')` over the arc, in turns.
///
/// Requires `n_samples >= 64` and refuses when a single step turns the
/// tangent by `pi/2` or more.
pub fn winding_index(spec: &BoundarySpec, n_samples: usize) -> Result<f64> {
    if n_samples < 64 {
        return Err(Error::Parameter(format!(
            "n_samples = {n_samples}, need at least 64"
        )));
    }
    Ok(sweep_tangent(spec, n_samples)?.index)
}

/// Sampled proxy for linear dependence of the pair over the arc: the
/// normalized Gram determinant of `(f1, f2)` as vectors of samples.
fn linearly_dependent(spec: &BoundarySpec, n_samples: usize) -> bool {
    let ell = spec.arc.ell();
    let mut g11 = 0.0;
    let mut g12 = 0.0;
    let mut g22 = 0.0;
    for k in 0..=n_samples {
        let [f1, f2] = spec.eval(ell * k as f64 / n_samples as f64);
        g11 += f1 * f1;
        g12 += f1 * f2;
        g22 += f2 * f2;
    }
    if g11 == 0.0 || g22 == 0.0 {
        return true; // an identically-zero component is degenerate
    }
    let det = g11 * g22 - g12 * g12;
    det <= 1e-12 * g11 * g22
}

/// Validate a boundary pair: regularity, argument monotonicity, winding index,
/// endpoint continuity of the zero extension, and the resulting classification.
///
/// A vanishing tangent is reported (`regular = false`, classification
/// `Invalid`) rather than escalated; undersampling errors propagate.
pub fn validate(spec: &BoundarySpec, n_samples: usize) -> Result<ValidationReport> {
    if n_samples < 64 {
        return Err(Error::Parameter(format!(
            "n_samples = {n_samples}, need at least 64"
        )));
    }
    let ell = spec.arc.ell();
    let [f1_0, f2_0] = spec.eval(0.0);
    let [f1_l, f2_l] = spec.eval(ell);
    let continuity_at_0 = f1_0.abs() <= ENDPOINT_TOL && f2_0.abs() <= ENDPOINT_TOL;
    let continuity_at_ell = f1_l.abs() <= ENDPOINT_TOL && f2_l.abs() <= ENDPOINT_TOL;

    if linearly_dependent(spec, n_samples) {
        return Ok(ValidationReport {
            regular: false,
            arg_monotone: false,
            index: f64::NAN,
            continuity_at_0,
            continuity_at_ell,
            classification: Classification::Invalid,
            min_speed: 0.0,
        });
    }

    let sweep = match sweep_tangent(spec, n_samples) {
        Ok(s) => s,
        Err(Error::Regularity(_)) => {
            return Ok(ValidationReport {
                regular: false,
                arg_monotone: false,
                index: f64::NAN,
                continuity_at_0,
                continuity_at_ell,
                classification: Classification::Invalid,
                min_speed: 0.0,
            })
        }
        Err(e) => return Err(e),
    };

    let hypotheses = sweep.monotone; // regularity held or we would not be here
    let classification = if hypotheses
        && continuity_at_0
        && continuity_at_ell
        && sweep.index.abs() <= 1.0 + INDEX_TOL
    {
        Classification::ConditionA
    } else if hypotheses && continuity_at_0 && sweep.index.abs() <= 0.5 + INDEX_TOL {
        Classification::ConditionB
    } else if spec.truncated_from_condition_a {
        Classification::RemarkRestriction
    } else {
        Classification::Invalid
    };

    Ok(ValidationReport {
        regular: true,
        arg_monotone: sweep.monotone,
        index: sweep.index,
        continuity_at_0,
        continuity_at_ell,
        classification,
        min_speed: sweep.min_speed,
    })
}

/// Evaluate the zero-extended pair at every boundary node of `mesh`.
///
/// A node exactly at `t = ell` takes the left limit `f_i(ell)`.
pub fn trace_on_mesh(spec: &BoundarySpec, mesh: &Mesh) -> (BoundaryTrace, BoundaryTrace) {
    let ell = spec.arc.ell();
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for t in boundary_angles(mesh) {
        if t <= ell {
            let [f1, f2] = spec.eval(t);
            t1.push(f1);
            t2.push(f2);
        } else {
            t1.push(0.0);
            t2.push(0.0);
        }
    }
    (BoundaryTrace { values: t1 }, BoundaryTrace { values: t2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    #[test]
    fn continuous_small_preset_matches_closed_form() {
        let spec = preset(Family::Continuous, ArcSize::Small);
        assert!((spec.arc().ell() - PI / 4.0).abs() < 1e-15);
        let [f1, f2] = spec.eval(PI / 4.0);
        assert!(f1.abs() < 1e-12, "f1(ell) = {f1}");
        assert!(f2.abs() < 1e-12, "f2(ell) = {f2}");
        let [f1, _] = spec.eval(PI / 8.0);
        assert!((f1 - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn discontinuous_small_preset_jumps_at_ell() {
        let spec = preset(Family::Discontinuous, ArcSize::Small);
        let [f1, f2] = spec.eval(PI / 4.0);
        assert!((f1 - ((PI).cos() - 1.0)).abs() < 1e-12);
        assert!((f2 - (5.0 * PI / 4.0).sin()).abs() < 1e-12);
        assert!(f2.abs() > 0.5, "no jump at ell");
    }

    #[test]
    fn continuous_large_preset_closes() {
        let spec = preset(Family::Continuous, ArcSize::Large);
        let [f1, f2] = spec.eval(7.0 * PI / 4.0);
        assert!(f1.abs() < 1e-12 && f2.abs() < 1e-12);
    }

    #[test]
    fn winding_indices_of_all_presets() {
        for size in [ArcSize::Small, ArcSize::Medium, ArcSize::Large] {
            let c = winding_index(&preset(Family::Continuous, size), 4096).unwrap();
            assert!(
                (c.abs() - 1.0).abs() < 1e-6,
                "continuous {size:?}: index {c}"
            );
            let d = winding_index(&preset(Family::Discontinuous, size), 4096).unwrap();
            assert!(
                (d.abs() - 0.5).abs() < 1e-6,
                "discontinuous {size:?}: index {d}"
            );
        }
    }

    #[test]
    fn straight_segment_has_zero_index() {
        let spec = BoundarySpec {
            arc: GammaArc::new(1.0).unwrap(),
            form: SpecForm::Sampled {
                ts: (0..=100).map(|k| k as f64 / 100.0).collect(),
                f1s: (0..=100).map(|k| k as f64 / 100.0).collect(),
                f2s: vec![0.0; 101],
            },
            truncated_from_condition_a: false,
        };
        let idx = winding_index(&spec, 128).unwrap();
        assert!(idx.abs() < 1e-9, "index {idx}");
    }

    #[test]
    fn winding_index_stable_under_doubling() {
        for family in [Family::Continuous, Family::Discontinuous] {
            let spec = preset(family, ArcSize::Medium);
            let a = winding_index(&spec, 4096).unwrap();
            let b = winding_index(&spec, 8192).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn winding_index_rejects_undersampling_and_few_samples() {
        let spec = preset(Family::Continuous, ArcSize::Small);
        assert!(matches!(
            winding_index(&spec, 32),
            Err(Error::Parameter(_))
        ));
        // 64 samples on an arc where the tangent turns a full revolution is
        // fine (step ~ 0.1 rad); force undersampling with a tighter curve.
        let tight = BoundarySpec {
            arc: GammaArc::new(PI / 4.0).unwrap(),
            form: SpecForm::Trig { a: 200.0, b: 200.0 },
            truncated_from_condition_a: false,
        };
        assert!(matches!(
            winding_index(&tight, 64),
            Err(Error::Undersampled(_))
        ));
    }

    #[test]
    fn classification_of_presets() {
        for size in [ArcSize::Small, ArcSize::Medium, ArcSize::Large] {
            let r = validate(&preset(Family::Continuous, size), 4096).unwrap();
            assert!(r.regular && r.arg_monotone);
            assert_eq!(r.classification, Classification::ConditionA, "{size:?}");
            assert!(r.continuity_at_0 && r.continuity_at_ell);
            assert!((r.index.abs() - 1.0).abs() < 1e-6);

            let r = validate(&preset(Family::Discontinuous, size), 4096).unwrap();
            assert!(r.regular && r.arg_monotone);
            assert_eq!(r.classification, Classification::ConditionB, "{size:?}");
            assert!(r.continuity_at_0 && !r.continuity_at_ell);
            assert!((r.index.abs() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn endpoint_vanishing_is_tight_for_continuous_presets() {
        for size in [ArcSize::Small, ArcSize::Medium, ArcSize::Large] {
            let spec = preset(Family::Continuous, size);
            let [a0, b0] = spec.eval(0.0);
            let [al, bl] = spec.eval(spec.arc().ell());
            for v in [a0, b0, al, bl] {
                assert!(v.abs() < 1e-12, "{size:?}: endpoint value {v}");
            }
        }
    }

    #[test]
    fn truncation_of_continuous_preset_is_remark_restriction() {
        // Cut at 3*pi/4 so the restricted index (0.75) exceeds 1/2 and only
        // the restriction rule can admit the pair.
        let spec = preset(Family::Continuous, ArcSize::Medium);
        let cut = spec.truncate(3.0 * PI / 4.0).unwrap();
        let r = validate(&cut, 4096).unwrap();
        assert_eq!(r.classification, Classification::RemarkRestriction);
        assert!(r.index.abs() > 0.5 + 1e-6, "index {}", r.index);
    }

    #[test]
    fn short_truncation_still_satisfies_the_discontinuous_condition() {
        // A cut whose own index stays at 1/2 is admitted the ordinary way.
        let spec = preset(Family::Continuous, ArcSize::Medium);
        let cut = spec.truncate(PI / 2.0).unwrap();
        let r = validate(&cut, 4096).unwrap();
        assert_eq!(r.classification, Classification::ConditionB);
    }

    #[test]
    fn linearly_dependent_pair_is_invalid() {
        let ts: Vec<f64> = (0..=200).map(|k| k as f64 * PI / 200.0).collect();
        let f: Vec<f64> = ts.iter().map(|t| (2.0 * t).cos() - 1.0).collect();
        let spec = BoundarySpec {
            arc: GammaArc::new(PI).unwrap(),
            form: SpecForm::Sampled {
                ts,
                f1s: f.clone(),
                f2s: f,
            },
            truncated_from_condition_a: false,
        };
        let r = validate(&spec, 256).unwrap();
        assert!(!r.regular);
        assert_eq!(r.classification, Classification::Invalid);
    }

    #[test]
    fn trace_on_mesh_applies_zero_extension_and_left_limit() {
        // h = 0.2 gives a 32-node boundary ring, so t = pi/8 (node 2) and
        // t = pi/4 (node 4) are exact boundary angles.
        let mesh = build_disk_mesh(0.2).unwrap();
        let angles = boundary_angles(&mesh);
        assert_eq!(angles.len(), 32);
        assert!((angles[2] - PI / 8.0).abs() < 1e-12);
        assert!((angles[4] - PI / 4.0).abs() < 1e-12);

        let spec = preset(Family::Continuous, ArcSize::Small);
        let (t1, _) = trace_on_mesh(&spec, &mesh);
        assert!((t1.values[2] - (-2.0)).abs() < 1e-12, "f1 at pi/8");
        for (k, &t) in angles.iter().enumerate() {
            if t > PI / 4.0 {
                assert_eq!(t1.values[k], 0.0, "zero extension at t = {t}");
            }
        }

        let disc = preset(Family::Discontinuous, ArcSize::Small);
        let (_, t2) = trace_on_mesh(&disc, &mesh);
        let want = (5.0 * PI / 4.0).sin();
        assert!(
            (t2.values[4] - want).abs() < 1e-12,
            "left limit at the jump: {} vs {want}",
            t2.values[4]
        );
        assert_eq!(t2.values[5], 0.0, "zero just past the arc");
    }

    #[test]
    fn csv_round_trip_and_validation() {
        // Tabulated continuous-medium preset; central differences should
        // recover index magnitude close to 1.
        let n = 4000;
        let mut csv = String::from("t,f1,f2\n");
        for k in 0..=n {
            let t = PI * k as f64 / n as f64;
            csv.push_str(&format!("{},{},{}\n", t, (2.0 * t).cos() - 1.0, (2.0 * t).sin()));
        }
        let spec = BoundarySpec::from_csv_str(&csv).unwrap();
        let r = validate(&spec, 1024).unwrap();
        assert!(r.regular && r.arg_monotone);
        assert!((r.index.abs() - 1.0).abs() < 1e-3, "index {}", r.index);
        assert_eq!(r.classification, Classification::ConditionA);
    }

    #[test]
    fn csv_rejects_malformed_tables() {
        assert!(BoundarySpec::from_csv_str("t,f1\n0,0\n").is_err());
        assert!(BoundarySpec::from_csv_str("0,0,0\n0,1,1\n1,0,0\n").is_err()); // non-increasing
        assert!(BoundarySpec::from_csv_str("0.5,0,0\n1,1,1\n2,0,0\n").is_err()); // t0 != 0
    }
}
