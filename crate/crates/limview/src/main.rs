//! Command-line front end: each subcommand is a thin wrapper over the library
//! pipeline.  Exit codes: 0 success, 2 invalid boundary data, 3 degenerate
//! data, 4 solver failure, 1 anything else.

use clap::{Args, Parser, Subcommand};
use limview::boundary_data::{preset, validate, ArcSize, BoundarySpec, Classification, Family};
use limview::mesh::build_disk_mesh;
use limview::pipeline::{
    self, read_forward_dir, run_pipeline_to_dir, write_forward_outputs, write_noise_sweep_csv,
    write_reconstruction_outputs, PipelineConfig,
};
use limview::{io, noise::NoiseNorm, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "limview", version, about = "Limited-view power-density imaging on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a unit-disk mesh and write it in the plain-text format.
    Mesh {
        /// Target edge length in [0.005, 0.5].
        #[arg(long = "h")]
        target_h: f64,
        #[arg(long, default_value = "mesh.txt")]
        out: PathBuf,
    },
    /// Check a boundary pair against the Jacobian conditions.
    Validate(ValidateArgs),
    /// Run the data-generation half of a pipeline configuration.
    Forward(RunArgs),
    /// Run the inversion half against a directory written by `forward`.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// Directory with the forward products (defaults to --out).
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Full run: forward data, inversion, metrics, manifest.
    Pipeline(RunArgs),
    /// One reconstruction per noise level, reusing a single forward solve.
    NoiseSweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated noise levels in percent.
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        alphas: Vec<f64>,
        /// Comma-separated eigenvalue floors, one per alpha.
        #[arg(long, value_delimiter = ',', default_value = "1e-6,1e-5,1e-4")]
        floors: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        seed: u64,
    },
}

#[derive(Args)]
struct ValidateArgs {
    /// Preset family: continuous or discontinuous.
    #[arg(long, conflicts_with = "custom")]
    family: Option<String>,
    /// Preset size: small, medium or large.
    #[arg(long)]
    size: Option<String>,
    /// CSV file with columns t,f1,f2 instead of a preset.
    #[arg(long)]
    custom: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Where to write the JSON report.
    #[arg(long, default_value = "validation.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// JSON pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write PGM heatmaps.
    #[arg(long)]
    heatmaps: bool,
    /// Norm for the noise normalization: mass or euclid.
    #[arg(long)]
    noise_norm: Option<String>,
}

fn load_config(run: &RunArgs) -> Result<(PipelineConfig, PathBuf), Error> {
    let mut cfg = PipelineConfig::from_path(&run.config)?;
    if run.heatmaps {
        cfg.heatmaps = true;
    }
    if let Some(norm) = &run.noise_norm {
        let parsed = match norm.as_str() {
            "mass" => NoiseNorm::Mass,
            "euclid" => NoiseNorm::Euclid,
            other => return Err(Error::Config(format!("unknown noise norm {other:?}"))),
        };
        if let Some(n) = cfg.noise.as_mut() {
            n.norm = parsed;
        }
    }
    let out = run
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| Error::Config("no output directory (set out_dir or pass --out)".into()))?;
    Ok((cfg, out))
}

fn parse_spec(args: &ValidateArgs) -> Result<BoundarySpec, Error> {
    if let Some(path) = &args.custom {
        return BoundarySpec::from_csv_path(path);
    }
    let family = match args.family.as_deref() {
        Some("continuous") => Family::Continuous,
        Some("discontinuous") => Family::Discontinuous,
        other => {
            return Err(Error::Config(format!(
                "family must be continuous or discontinuous, got {other:?}"
            )))
        }
    };
    let size = match args.size.as_deref() {
        Some("small") => ArcSize::Small,
        Some("medium") => ArcSize::Medium,
        Some("large") => ArcSize::Large,
        other => {
            return Err(Error::Config(format!(
                "size must be small, medium or large, got {other:?}"
            )))
        }
    };
    Ok(preset(family, size))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Mesh { target_h, out } => {
            let mesh = build_disk_mesh(target_h)?;
            io::write_mesh(&mesh, &out)?;
            println!(
                "mesh: {} nodes, {} triangles, {} boundary nodes -> {}",
                mesh.node_count(),
                mesh.triangle_count(),
                mesh.boundary_nodes().len(),
                out.display()
            );
            Ok(0)
        }
        Command::Validate(args) => {
            let spec = parse_spec(&args)?;
            let report = validate(&spec, args.samples)?;
            println!(
                "regular: {}\narg_monotone: {}\nindex: {}\ncontinuity_at_0: {}\ncontinuity_at_ell: {}\nmin_speed: {:.6e}\nclassification: {:?}",
                report.regular,
                report.arg_monotone,
                report.index,
                report.continuity_at_0,
                report.continuity_at_ell,
                report.min_speed,
                report.classification
            );
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(e.to_string()))?;
            std::fs::write(&args.out, json)?;
            Ok(if report.classification == Classification::Invalid {
                2
            } else {
                0
            })
        }
        Command::Forward(run_args) => {
            let (cfg, out) = load_config(&run_args)?;
            let fwd = pipeline::generate_forward_data(&cfg)?;
            write_forward_outputs(&fwd, &out)?;
            println!(
                "forward: mode {:?}, min det(H) = {:.3e}, {} flagged elements -> {}",
                fwd.mode,
                fwd.min_det_h,
                fwd.flagged_elements.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Reconstruct { run: run_args, data_dir } => {
            let (cfg, out) = load_config(&run_args)?;
            let dir = data_dir.unwrap_or_else(|| out.clone());
            let fwd = read_forward_dir(&cfg, &dir)?;
            let rec = pipeline::run_reconstruction(&cfg, &fwd)?;
            let metrics = pipeline::metric_rows(&cfg, &fwd, &rec);
            write_reconstruction_outputs(&cfg, &rec, &metrics, &out)?;
            for row in &metrics {
                println!("{} = {:.6}", row.quantity, row.value);
            }
            Ok(0)
        }
        Command::Pipeline(run_args) => {
            let (cfg, out) = load_config(&run_args)?;
            let outcome = run_pipeline_to_dir(&cfg, &out)?;
            for row in &outcome.metrics {
                println!("{} = {:.6}", row.quantity, row.value);
            }
            println!("outputs -> {}", out.display());
            Ok(0)
        }
        Command::NoiseSweep {
            run: run_args,
            alphas,
            floors,
            seed,
        } => {
            let (cfg, out) = load_config(&run_args)?;
            if alphas.len() != floors.len() {
                return Err(Error::Config(format!(
                    "{} alphas vs {} floors",
                    alphas.len(),
                    floors.len()
                )));
            }
            let pairs: Vec<(f64, f64)> = alphas.into_iter().zip(floors).collect();
            let rows = pipeline::noise_sweep(&cfg, &pairs, seed)?;
            std::fs::create_dir_all(&out)?;
            write_noise_sweep_csv(&rows, &out.join("noise_metrics.csv"))?;
            for r in &rows {
                println!(
                    "alpha = {:>5}%, L = {:.1e}: rel_err_sigma = {:.4}",
                    r.alpha, r.floor, r.rel_err_sigma
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(pipeline::exit_code(&e))
        }
    }
}
