//! The two routes to the harmonic extension of a zero-extended boundary
//! trace: a truncated Fourier series evaluated semi-analytically, and a
//! direct finite-element solve.  For a discontinuous trace the series route
//! is what makes the forward solve well behaved: the finite-element problem
//! is then solved only for the smooth correction with homogeneous data.
//!
//! Run with: `cargo run --release --example fourier_vs_fem`

use limview::boundary_data::{preset, trace_on_mesh, ArcSize, Family};
use limview::fem::{relative_l2_error, solve_dirichlet, LoadSpec};
use limview::forward::{fourier_laplace, solve_forward, ForwardMode, Phantom};
use limview::mesh::{build_disk_mesh, ElementField, NodalField};

fn main() -> Result<(), limview::Error> {
    let mesh = build_disk_mesh(0.05)?;

    // Continuous trace: the two routes agree to FEM accuracy.
    let spec = preset(Family::Continuous, ArcSize::Small);
    let ell = spec.arc().ell();
    let g = |t: f64| if t <= ell { spec.eval(t)[0] } else { 0.0 };
    let series = fourier_laplace(&g, 256, 2048)?;
    let semi = NodalField::from_fn(&mesh, |x, y| series.eval(x, y));

    let one = ElementField::constant(&mesh, 1.0);
    let (t1, _) = trace_on_mesh(&spec, &mesh);
    let direct = solve_dirichlet(&mesh, &one, &LoadSpec::Zero, &t1)?;
    println!(
        "continuous trace, series vs FEM: relative L2 difference {:.3e}",
        relative_l2_error(&mesh, &semi, &direct)?
    );

    // Discontinuous trace: series coefficients decay slowly and the partial
    // sum rings at the jump (values printed along the boundary near the arc
    // end), while the split forward solve stays clean inside.
    let spec = preset(Family::Discontinuous, ArcSize::Small);
    let ell = spec.arc().ell();
    let g = |t: f64| if t <= ell { spec.eval(t)[1] } else { 0.0 };
    let series = fourier_laplace(&g, 256, 2048)?;
    println!("\nboundary values of the truncated series around the jump at t = {ell:.4}:");
    for k in -3i32..=3 {
        let t = ell + 0.004 * k as f64;
        let (x, y) = (t.cos(), t.sin());
        let exact = if t <= ell { spec.eval(t)[1] } else { 0.0 };
        println!(
            "  t = {t:.4}: series {:+.4}, trace {:+.4}",
            series.eval(x, y),
            exact
        );
    }

    let (_, u2) = solve_forward(&mesh, &Phantom::Case2, &spec, ForwardMode::Split, 256)?;
    let inside = u2
        .values
        .iter()
        .zip(mesh.nodes())
        .filter(|(_, p)| p[0] * p[0] + p[1] * p[1] < 0.81)
        .map(|(v, _)| v.abs())
        .fold(0.0f64, f64::max);
    println!("\nsplit solve for the jumping trace: max |u2| inside r < 0.9 is {inside:.4}");
    Ok(())
}
