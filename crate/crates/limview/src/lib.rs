//! Limited-view power-density imaging on the unit disk.
//!
//! This crate synthesizes power-density data for the two-dimensional
//! conductivity equation when only an arc of the boundary carries nonzero
//! Dirichlet data, checks the boundary-data conditions that keep the solution
//! Jacobian nonvanishing, and reconstructs the isotropic conductivity from
//! the synthesized (optionally noisy) data.
//!
//! The pieces, bottom to top:
//!
//! - [`mesh`]: deterministic concentric-ring triangulations of the unit disk
//!   and the discrete field containers.
//! - [`fem`]: P1 assembly and conjugate-gradient solution of
//!   `-div(sigma grad u) = rhs`, plus gradients, projections and L2 metrics.
//! - [`boundary_data`]: boundary-function pairs on an arc with zero
//!   extension, the built-in preset families, and the validator for curve
//!   regularity, tangent-argument monotonicity and winding index.
//! - [`forward`]: conductivity phantoms, forward solves (including the
//!   splitting that handles discontinuous boundary traces via a semi-analytic
//!   harmonic solve), and power densities.
//! - [`reconstruct`]: the two-step inversion — rotation angle first, then
//!   log-conductivity — with boundary-trace unwrapping and error metrics.
//! - [`noise`]: seeded multiplicative perturbation of the data matrix and
//!   eigenvalue flooring.
//! - [`pipeline`]: end-to-end runs driven by a JSON configuration, producing
//!   CSV metrics, field exports and optional heatmaps.
//!
//! Every major capability has a runnable demonstration under `examples/`;
//! the `limview` binary exposes the same pipeline as subcommands.
//!
//! # Example
//!
//! ```
//! use limview::boundary_data::{preset, validate, Family, ArcSize};
//!
//! let spec = preset(Family::Continuous, ArcSize::Medium);
//! let report = validate(&spec, 4096).unwrap();
//! assert!(report.regular && report.arg_monotone);
//! assert!((report.index.abs() - 1.0).abs() < 1e-6);
//! ```

pub mod boundary_data;
mod error;
pub mod fem;
pub mod forward;
pub mod io;
pub mod mesh;
pub mod noise;
pub mod pipeline;
pub mod reconstruct;

pub use error::{Error, Result};
