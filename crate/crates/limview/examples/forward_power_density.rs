//! Generate synthetic power-density data: solve the conductivity equation
//! for both boundary functions of a preset pair, form the data matrix
//! `H_ij = sigma grad(u_i) . grad(u_j)` and inspect its degeneracy along the
//! uncontrolled part of the boundary.
//!
//! Run with: `cargo run --release --example forward_power_density`

use limview::boundary_data::{preset, ArcSize, Family};
use limview::fem::gradient;
use limview::forward::{power_density_from_gradients, solve_forward, ForwardMode, Phantom};
use limview::io::write_power_density;
use limview::mesh::build_disk_mesh;
use limview::pipeline::min_det_interior;

fn main() -> Result<(), limview::Error> {
    let mesh = build_disk_mesh(0.05)?;
    let phantom = Phantom::Case1;
    let spec = preset(Family::Continuous, ArcSize::Medium);

    let (u1, u2) = solve_forward(&mesh, &phantom, &spec, ForwardMode::Direct, 256)?;
    let g1 = gradient(&mesh, &u1);
    let g2 = gradient(&mesh, &u2);
    let h = power_density_from_gradients(&mesh, &phantom, &g1, &g2);

    let max_det = h.det.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "data matrix on {} elements: det range [{:.3e}, {:.3e}]",
        h.len(),
        h.min_det(),
        max_det
    );
    println!(
        "smallest determinant away from the boundary layer: {:.3e}",
        min_det_interior(&mesh, &h)
    );

    // The degeneracy concentrates along the boundary arc with zero data.
    let mut worst_angle = 0.0;
    let mut worst = f64::INFINITY;
    for t in 0..mesh.triangle_count() {
        let c = mesh.centroid(t);
        if c[0] * c[0] + c[1] * c[1] > 0.9 && h.det(t) < worst {
            worst = h.det(t);
            worst_angle = c[1].atan2(c[0]);
        }
    }
    println!("most degenerate near-boundary element sits at angle {worst_angle:.3} rad");

    let out = std::env::temp_dir().join("h_element_example.csv");
    write_power_density(&mesh, &h, &out)?;
    println!("element data written to {}", out.display());
    Ok(())
}
