//! End-to-end runs: forward data generation on a fine mesh, transfer of the
//! nodal data matrix to a coarser reconstruction mesh, the two-step
//! inversion, metrics and file outputs.  Driven by a JSON configuration with
//! a fixed key set; unknown keys are rejected.

use crate::boundary_data::{
    preset, validate, ArcSize, BoundarySpec, Classification, Family, ValidationReport,
};
use crate::error::{Error, Result};
use crate::fem;
use crate::forward::{
    power_density_from_gradients, solve_forward, true_theta, ForwardMode, Phantom,
    PowerDensityField,
};
use crate::io;
use crate::mesh::{
    build_disk_mesh, interpolate, interpolate_vector, BoundaryTrace, ElementField, Mesh,
    NodalField, NodalVectorField,
};
use crate::noise::{eigen_floor, perturb, NoiseConfig};
use crate::reconstruct::{
    f_field, g_field, reconstruct_sigma, reconstruct_theta, theta_metrics, unwrap_theta_trace,
    v_fields,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    Case1,
    Case2,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    Continuous,
    Discontinuous,
    /// The full-boundary pair `(cos t, sin t)`; `size` is ignored.
    FullView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Direct,
    Split,
    /// Split for boundary pairs whose zero extension is discontinuous
    /// (condition-b or restriction classifications), direct otherwise.
    #[default]
    Auto,
}

fn default_fourier_n() -> usize {
    crate::forward::DEFAULT_FOURIER_ORDER
}

fn default_eigen_floor() -> f64 {
    1e-4
}

fn default_metrics() -> Vec<String> {
    ALL_METRICS.iter().map(|s| s.to_string()).collect()
}

pub const ALL_METRICS: [&str; 5] = [
    "min_det_h",
    "rel_err_theta",
    "rel_err_cos2theta",
    "rel_err_sin2theta",
    "rel_err_sigma",
];

/// One pipeline run, as read from JSON.  See the README for the key-by-key
/// documentation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub phantom: PhantomKind,
    /// Required when `phantom` is `constant`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_value: Option<f64>,
    /// Boundary pair: a preset family plus size, `full_view`, or a custom CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<ArcSize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_boundary_csv: Option<PathBuf>,
    /// Target edge length of the data-generation mesh.
    pub data_h: f64,
    /// Target edge length of the reconstruction mesh.
    pub recon_h: f64,
    #[serde(default)]
    pub mode: ModeChoice,
    #[serde(default = "default_fourier_n")]
    pub fourier_n: usize,
    /// Optional data-noise stage (perturbation plus its own floor).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    /// Eigenvalue floor applied to the noiseless data matrix before
    /// inversion; the near-degenerate band along the uncontrolled boundary
    /// needs one even without noise.
    #[serde(default = "default_eigen_floor")]
    pub eigen_floor: f64,
    #[serde(default)]
    pub heatmaps: bool,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    /// Output directory; a CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validated()
    }

    pub fn validated(self) -> Result<Self> {
        for h in [self.data_h, self.recon_h] {
            if !(0.005..=0.5).contains(&h) {
                return Err(Error::Config(format!(
                    "mesh resolution {h} outside [0.005, 0.5]"
                )));
            }
        }
        if self.phantom == PhantomKind::Constant && self.constant_value.is_none() {
            return Err(Error::Config(
                "phantom \"constant\" needs constant_value".into(),
            ));
        }
        let has_preset = self.family.is_some();
        let has_custom = self.custom_boundary_csv.is_some();
        if has_preset == has_custom {
            return Err(Error::Config(
                "choose exactly one of family(+size) or custom_boundary_csv".into(),
            ));
        }
        if matches!(
            self.family,
            Some(FamilyChoice::Continuous) | Some(FamilyChoice::Discontinuous)
        ) && self.size.is_none()
        {
            return Err(Error::Config("preset family needs a size".into()));
        }
        if !(self.eigen_floor > 0.0) {
            return Err(Error::Config("eigen_floor must be positive".into()));
        }
        if let Some(n) = &self.noise {
            n.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for m in &self.metrics {
            if !ALL_METRICS.contains(&m.as_str()) {
                return Err(Error::Config(format!(
                    "unknown metric {m:?}; known: {ALL_METRICS:?}"
                )));
            }
        }
        Ok(self)
    }

    pub fn phantom(&self) -> Phantom {
        match self.phantom {
            PhantomKind::Case1 => Phantom::Case1,
            PhantomKind::Case2 => Phantom::Case2,
            PhantomKind::Constant => Phantom::Constant(self.constant_value.unwrap_or(1.0)),
        }
    }

    pub fn boundary_spec(&self) -> Result<BoundarySpec> {
        if let Some(path) = &self.custom_boundary_csv {
            return BoundarySpec::from_csv_path(path);
        }
        match self.family.unwrap() {
            FamilyChoice::FullView => Ok(BoundarySpec::full_view_linear()),
            FamilyChoice::Continuous => Ok(preset(Family::Continuous, self.size.unwrap())),
            FamilyChoice::Discontinuous => Ok(preset(Family::Discontinuous, self.size.unwrap())),
        }
    }

    /// Labels used in metric rows.
    pub fn labels(&self) -> (String, String, String) {
        let gamma = match (self.family, self.size) {
            (Some(FamilyChoice::FullView), _) => "full".to_string(),
            (_, Some(s)) => format!("{s:?}").to_lowercase(),
            _ => "custom".to_string(),
        };
        let family = match self.family {
            Some(FamilyChoice::Continuous) => "continuous".to_string(),
            Some(FamilyChoice::Discontinuous) => "discontinuous".to_string(),
            Some(FamilyChoice::FullView) => "full_view".to_string(),
            None => "custom".to_string(),
        };
        let case = match self.phantom {
            PhantomKind::Case1 => "case1".to_string(),
            PhantomKind::Case2 => "case2".to_string(),
            PhantomKind::Constant => format!("constant{}", self.constant_value.unwrap_or(1.0)),
        };
        (gamma, family, case)
    }
}

// ---------------------------------------------------------------------------
// Stage products
// ---------------------------------------------------------------------------

/// Everything produced on the data mesh.
pub struct ForwardData {
    pub mesh: Mesh,
    pub u1: NodalField,
    pub u2: NodalField,
    pub h_element: PowerDensityField,
    pub h_nodal: PowerDensityField,
    pub grad_u1_nodal: NodalVectorField,
    pub theta_true_element: ElementField,
    pub flagged_elements: Vec<usize>,
    pub mode: ForwardMode,
    /// The solution order was swapped to keep the Jacobian positive.
    pub swapped: bool,
    pub validation: ValidationReport,
    /// Smallest element determinant outside the one-element boundary layer.
    /// Elements of the layer with two zero-trace vertices carry exactly
    /// parallel P1 gradients, so their determinant is structurally zero and
    /// says nothing about the interior degeneracy trend.
    pub min_det_h: f64,
    /// Smallest element determinant over the whole mesh (boundary layer
    /// included); recorded in the manifest.
    pub min_det_h_full: f64,
}

/// Everything produced on the reconstruction mesh.
pub struct ReconstructionData {
    pub mesh: Mesh,
    pub theta_rec: NodalField,
    pub theta_true: NodalField,
    pub sigma_rec: NodalField,
    pub sigma_true: NodalField,
    pub log_det_nodal: NodalField,
    pub err_sigma: f64,
    pub err_theta: f64,
    pub err_cos2theta: f64,
    pub err_sin2theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub quantity: String,
    pub gamma: String,
    pub family: String,
    pub case: String,
    pub value: f64,
}

pub struct PipelineOutcome {
    pub forward: ForwardData,
    pub recon: ReconstructionData,
    pub metrics: Vec<MetricRow>,
}

fn resolve_mode(choice: ModeChoice, report: &ValidationReport) -> ForwardMode {
    match choice {
        ModeChoice::Direct => ForwardMode::Direct,
        ModeChoice::Split => ForwardMode::Split,
        ModeChoice::Auto => match report.classification {
            Classification::ConditionB | Classification::RemarkRestriction => ForwardMode::Split,
            _ => ForwardMode::Direct,
        },
    }
}

/// Forward half of the pipeline: mesh, solves, power densities, true angle.
pub fn generate_forward_data(cfg: &PipelineConfig) -> Result<ForwardData> {
    let mesh = build_disk_mesh(cfg.data_h)?;
    let phantom = cfg.phantom();
    let spec = cfg.boundary_spec()?;
    let validation = validate(&spec, 4096)?;
    let mode = resolve_mode(cfg.mode, &validation);

    let (mut u1, mut u2) = solve_forward(&mesh, &phantom, &spec, mode, cfg.fourier_n)?;

    // Order the pair so the mean Jacobian is positive; the angle and the
    // transfer matrix assume this orientation.
    let g1 = fem::gradient(&mesh, &u1);
    let g2 = fem::gradient(&mesh, &u2);
    let mut mean_jac = 0.0;
    for t in 0..mesh.triangle_count() {
        let (a, b) = (g1.values[t], g2.values[t]);
        mean_jac += mesh.triangle_area(t) * (a[0] * b[1] - a[1] * b[0]);
    }
    let swapped = mean_jac < 0.0;
    if swapped {
        std::mem::swap(&mut u1, &mut u2);
    }
    let (g1, g2) = if swapped { (g2, g1) } else { (g1, g2) };

    let h_element = power_density_from_gradients(&mesh, &phantom, &g1, &g2);
    let h_nodal = h_element.to_nodal(&mesh)?;
    let grad_u1_nodal = fem::element_to_node_vector(&mesh, &g1);
    let (theta_true_element, flagged_elements) = true_theta(&mesh, &u1);
    let min_det_h = min_det_interior(&mesh, &h_element);
    let min_det_h_full = h_element.min_det();

    Ok(ForwardData {
        mesh,
        u1,
        u2,
        h_element,
        h_nodal,
        grad_u1_nodal,
        theta_true_element,
        flagged_elements,
        mode,
        swapped,
        validation,
        min_det_h,
        min_det_h_full,
    })
}

/// Reconstruction half: transfer the nodal data matrix and the true-angle
/// information to the reconstruction mesh, optionally perturb, floor, invert.
pub fn run_reconstruction(cfg: &PipelineConfig, fwd: &ForwardData) -> Result<ReconstructionData> {
    let same_mesh = cfg.recon_h == cfg.data_h;
    let mesh = if same_mesh {
        fwd.mesh.clone()
    } else {
        build_disk_mesh(cfg.recon_h)?
    };
    let phantom = cfg.phantom();

    let carry = |v: &Vec<f64>| -> Vec<f64> {
        if same_mesh {
            v.clone()
        } else {
            interpolate(
                &fwd.mesh,
                &NodalField { values: v.clone() },
                &mesh,
            )
            .values
        }
    };
    let mut h_nodal = PowerDensityField::from_entries(
            carry(&fwd.h_nodal.h11),
            carry(&fwd.h_nodal.h12),
            carry(&fwd.h_nodal.h22),
            crate::forward::Support::Node,
        );
    let grad_u1 = if same_mesh {
        fwd.grad_u1_nodal.clone()
    } else {
        interpolate_vector(&fwd.mesh, &fwd.grad_u1_nodal, &mesh)
    };

    // Noise (optional), then the positivity floor.
    let floor = match &cfg.noise {
        Some(n) => {
            h_nodal = perturb(&mesh, &h_nodal, n)?;
            n.eigen_floor
        }
        None => cfg.eigen_floor,
    };
    let h_nodal = eigen_floor(&h_nodal, floor)?;

    // Boundary angle from the carried gradient of u1, unwrapped.
    let raw_theta: Vec<f64> = mesh
        .boundary_nodes()
        .iter()
        .map(|&b| {
            let g = grad_u1.values[b];
            if g[0].abs().max(g[1].abs()) <= crate::forward::ZERO_GRADIENT_TOL {
                0.0
            } else {
                crate::forward::vector_angle(g)
            }
        })
        .collect();
    let trace = unwrap_theta_trace(&raw_theta)?;

    let v = v_fields(&mesh, &h_nodal)?;
    let f = f_field(&mesh, &v, &h_nodal)?;
    let theta_rec = reconstruct_theta(&mesh, &f, &trace)?;

    let g = g_field(&mesh, &theta_rec, &v);
    let sigma_trace = BoundaryTrace {
        values: mesh
            .boundary_nodes()
            .iter()
            .map(|&b| {
                let p = mesh.nodes()[b];
                phantom.eval(p[0], p[1])
            })
            .collect(),
    };
    let sigma_rec = reconstruct_sigma(&mesh, &g, &sigma_trace)?;

    let sigma_true = NodalField::from_fn(&mesh, |x, y| phantom.eval(x, y));
    let theta_true = NodalField {
        values: grad_u1
            .values
            .iter()
            .map(|&g| {
                if g[0].abs().max(g[1].abs()) <= crate::forward::ZERO_GRADIENT_TOL {
                    0.0
                } else {
                    crate::forward::vector_angle(g)
                }
            })
            .collect(),
    };
    let log_det_nodal = NodalField {
        values: (0..h_nodal.len())
            .map(|i| h_nodal.det(i).max(f64::MIN_POSITIVE).ln())
            .collect(),
    };

    let err_sigma = fem::relative_l2_error(&mesh, &sigma_rec, &sigma_true)?;
    let (err_theta, err_cos2theta, err_sin2theta) =
        theta_metrics(&mesh, &theta_rec, &theta_true)?;

    Ok(ReconstructionData {
        mesh,
        theta_rec,
        theta_true,
        sigma_rec,
        sigma_true,
        log_det_nodal,
        err_sigma,
        err_theta,
        err_cos2theta,
        err_sin2theta,
    })
}

/// Metric rows for one run, honouring the config's metric filter.
pub fn metric_rows(cfg: &PipelineConfig, fwd: &ForwardData, rec: &ReconstructionData) -> Vec<MetricRow> {
    let (gamma, family, case) = cfg.labels();
    let all: Vec<(&str, f64)> = vec![
        ("min_det_h", fwd.min_det_h),
        ("rel_err_theta", rec.err_theta),
        ("rel_err_cos2theta", rec.err_cos2theta),
        ("rel_err_sin2theta", rec.err_sin2theta),
        ("rel_err_sigma", rec.err_sigma),
    ];
    all.into_iter()
        .filter(|(q, _)| cfg.metrics.iter().any(|m| m == q))
        .map(|(q, value)| MetricRow {
            quantity: q.to_string(),
            gamma: gamma.clone(),
            family: family.clone(),
            case: case.clone(),
            value,
        })
        .collect()
}

/// Run the full pipeline in memory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let forward = generate_forward_data(cfg)?;
    let recon = run_reconstruction(cfg, &forward)?;
    let metrics = metric_rows(cfg, &forward, &recon);
    Ok(PipelineOutcome {
        forward,
        recon,
        metrics,
    })
}

pub fn write_metrics_csv(rows: &[MetricRow], path: &Path) -> Result<()> {
    let mut out = String::from("quantity,gamma,family,case,value\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.quantity, r.gamma, r.family, r.case, r.value);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write every forward-stage product into `dir`.
pub fn write_forward_outputs(fwd: &ForwardData, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        f(&dir.join(name))?;
        files.push(name.to_string());
        Ok(())
    };
    put("data_mesh.txt", &|p| io::write_mesh(&fwd.mesh, p))?;
    put("u1.csv", &|p| io::write_nodal_field(&fwd.mesh, &fwd.u1, p))?;
    put("u2.csv", &|p| io::write_nodal_field(&fwd.mesh, &fwd.u2, p))?;
    put("h_element.csv", &|p| {
        io::write_power_density(&fwd.mesh, &fwd.h_element, p)
    })?;
    put("h_nodal.csv", &|p| {
        io::write_power_density(&fwd.mesh, &fwd.h_nodal, p)
    })?;
    put("grad_u1_nodal.csv", &|p| {
        io::write_nodal_vector_field(&fwd.mesh, &fwd.grad_u1_nodal, p)
    })?;
    Ok(files)
}

/// Write reconstruction products and the metrics table into `dir`.
pub fn write_reconstruction_outputs(
    cfg: &PipelineConfig,
    rec: &ReconstructionData,
    metrics: &[MetricRow],
    dir: &Path,
) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        f(&dir.join(name))?;
        files.push(name.to_string());
        Ok(())
    };
    put("recon_mesh.txt", &|p| io::write_mesh(&rec.mesh, p))?;
    put("theta_true.csv", &|p| {
        io::write_nodal_field(&rec.mesh, &rec.theta_true, p)
    })?;
    put("theta_rec.csv", &|p| {
        io::write_nodal_field(&rec.mesh, &rec.theta_rec, p)
    })?;
    put("sigma_true.csv", &|p| {
        io::write_nodal_field(&rec.mesh, &rec.sigma_true, p)
    })?;
    put("sigma_rec.csv", &|p| {
        io::write_nodal_field(&rec.mesh, &rec.sigma_rec, p)
    })?;
    put("log_det_h.csv", &|p| {
        io::write_nodal_field(&rec.mesh, &rec.log_det_nodal, p)
    })?;
    put("metrics.csv", &|p| write_metrics_csv(metrics, p))?;
    if cfg.heatmaps {
        for (name, field) in [
            ("sigma_rec.pgm", &rec.sigma_rec),
            ("sigma_true.pgm", &rec.sigma_true),
            ("theta_rec.pgm", &rec.theta_rec),
            ("log_det_h.pgm", &rec.log_det_nodal),
        ] {
            put(name, &|p| io::write_heatmap(&rec.mesh, field, 512, p))?;
        }
    }
    Ok(files)
}

/// Full pipeline with file outputs and a manifest; returns the outcome.
pub fn run_pipeline_to_dir(cfg: &PipelineConfig, dir: &Path) -> Result<PipelineOutcome> {
    let outcome = run_pipeline(cfg)?;
    let mut files = write_forward_outputs(&outcome.forward, dir)?;
    files.extend(write_reconstruction_outputs(
        cfg,
        &outcome.recon,
        &outcome.metrics,
        dir,
    )?);
    write_manifest(cfg, &outcome, files, dir)?;
    Ok(outcome)
}

fn write_manifest(
    cfg: &PipelineConfig,
    outcome: &PipelineOutcome,
    mut files: Vec<String>,
    dir: &Path,
) -> Result<()> {
    files.push("manifest.json".to_string());
    files.sort();
    let manifest = serde_json::json!({
        "config": cfg,
        "files": files,
        "run": {
            "mode": match outcome.forward.mode {
                ForwardMode::Direct => "direct",
                ForwardMode::Split => "split",
            },
            "solutions_swapped_for_orientation": outcome.forward.swapped,
            "validation": outcome.forward.validation,
            "min_det_h": outcome.forward.min_det_h,
            "min_det_h_full": outcome.forward.min_det_h_full,
            "zero_gradient_elements": outcome.forward.flagged_elements.len(),
        },
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Noise sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct NoiseSweepRow {
    pub alpha: f64,
    pub floor: f64,
    pub family: String,
    pub rel_err_sigma: f64,
}

/// One reconstruction per `(alpha, floor)` pair, reusing a single forward
/// solve.  An explicit `alpha = 0` row reproduces the noiseless pipeline.
pub fn noise_sweep(
    cfg: &PipelineConfig,
    alphas_and_floors: &[(f64, f64)],
    seed: u64,
) -> Result<Vec<NoiseSweepRow>> {
    let forward = generate_forward_data(cfg)?;
    let (_, family, _) = cfg.labels();
    let mut rows = Vec::new();
    for &(alpha, floor) in alphas_and_floors {
        let mut run_cfg = cfg.clone();
        if alpha == 0.0 {
            run_cfg.noise = None;
            run_cfg.eigen_floor = floor;
        } else {
            run_cfg.noise = Some(NoiseConfig {
                alpha_percent: alpha,
                seed,
                eigen_floor: floor,
                norm: cfg.noise.as_ref().map(|n| n.norm).unwrap_or_default(),
            });
        }
        let rec = run_reconstruction(&run_cfg, &forward)?;
        rows.push(NoiseSweepRow {
            alpha,
            floor,
            family: family.clone(),
            rel_err_sigma: rec.err_sigma,
        });
    }
    Ok(rows)
}

pub fn write_noise_sweep_csv(rows: &[NoiseSweepRow], path: &Path) -> Result<()> {
    let mut out = String::from("alpha,L,family,rel_err_sigma\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.alpha, r.floor, r.family, r.rel_err_sigma);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reload the forward products previously written by
/// [`write_forward_outputs`].
pub fn read_forward_dir(cfg: &PipelineConfig, dir: &Path) -> Result<ForwardData> {
    let mesh = io::read_mesh(&dir.join("data_mesh.txt"))?;
    let u1 = io::read_nodal_field(&mesh, &dir.join("u1.csv"))?;
    let u2 = io::read_nodal_field(&mesh, &dir.join("u2.csv"))?;
    let h_nodal = io::read_nodal_power_density(&mesh, &dir.join("h_nodal.csv"))?;
    let grad_u1_nodal = io::read_nodal_vector_field(&mesh, &dir.join("grad_u1_nodal.csv"))?;
    let phantom = cfg.phantom();
    let g1 = fem::gradient(&mesh, &u1);
    let g2 = fem::gradient(&mesh, &u2);
    let h_element = power_density_from_gradients(&mesh, &phantom, &g1, &g2);
    let (theta_true_element, flagged_elements) = true_theta(&mesh, &u1);
    let spec = cfg.boundary_spec()?;
    let validation = validate(&spec, 4096)?;
    let min_det_h = min_det_interior(&mesh, &h_element);
    let min_det_h_full = h_element.min_det();
    Ok(ForwardData {
        mesh,
        u1,
        u2,
        h_element,
        h_nodal,
        grad_u1_nodal,
        theta_true_element,
        flagged_elements,
        mode: resolve_mode(cfg.mode, &validation),
        swapped: false,
        validation,
        min_det_h,
        min_det_h_full,
    })
}

/// Max-principle check used by callers on forward solutions: band violations
/// of the zero-extended trace, outside the `skip_layers`-ring boundary layer
/// (0 checks every node).
pub fn trace_band_violations(
    mesh: &Mesh,
    u: &NodalField,
    trace: &BoundaryTrace,
    skip_layers: usize,
) -> Vec<(usize, f64)> {
    let mut excluded = vec![false; mesh.node_count()];
    let mut frontier: Vec<bool> = (0..mesh.node_count())
        .map(|i| mesh.is_boundary_node(i))
        .collect();
    for _ in 0..skip_layers {
        let mut next = vec![false; mesh.node_count()];
        for t in 0..mesh.triangle_count() {
            let tri = mesh.triangles()[t];
            if tri.iter().any(|&v| frontier[v]) {
                for &v in &tri {
                    next[v] = true;
                }
            }
        }
        for i in 0..mesh.node_count() {
            excluded[i] = excluded[i] || frontier[i] || next[i];
            frontier[i] = next[i];
        }
    }
    let lo = trace.min();
    let hi = trace.max();
    let eps = 1e-8 * (hi - lo).abs();
    u.values
        .iter()
        .enumerate()
        .filter(|(i, &v)| !excluded[*i] && (v < lo - eps || v > hi + eps))
        .map(|(i, &v)| (i, (v - hi).max(lo - v)))
        .collect()
}

/// Process exit code for an error: 3 for degenerate data, 4 for solver
/// failure, 1 otherwise.  (Validation failures exit with 2; that decision is
/// made from the report, not from an error.)
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateData(_) => 3,
        Error::SolverDiverged { .. } => 4,
        _ => 1,
    }
}

/// Smallest element determinant over elements that have no vertex on the
/// boundary (the one-element boundary layer is excluded).
pub fn min_det_interior(mesh: &Mesh, h_element: &PowerDensityField) -> f64 {
    let mut min = f64::INFINITY;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        if tri.iter().any(|&v| mesh.is_boundary_node(v)) {
            continue;
        }
        min = min.min(h_element.det(t));
    }
    min
}
