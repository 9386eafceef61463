//! Generate unit-disk meshes at a few resolutions, check their invariants
//! and write one to the plain-text exchange format.
//!
//! Run with: `cargo run --example disk_mesh`

use limview::io::write_mesh;
use limview::mesh::{boundary_angles, build_disk_mesh};

fn main() -> Result<(), limview::Error> {
    println!(
        "{:>6} {:>8} {:>10} {:>10} {:>12}",
        "h", "nodes", "triangles", "boundary", "max edge / h"
    );
    for h in [0.3, 0.1, 0.05, 0.02] {
        let mesh = build_disk_mesh(h)?;
        mesh.validate()?;
        let mut max_edge: f64 = 0.0;
        for tri in mesh.triangles() {
            for k in 0..3 {
                let a = mesh.nodes()[tri[k]];
                let b = mesh.nodes()[tri[(k + 1) % 3]];
                max_edge = max_edge.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        println!(
            "{h:>6} {:>8} {:>10} {:>10} {:>12.3}",
            mesh.node_count(),
            mesh.triangle_count(),
            mesh.boundary_nodes().len(),
            max_edge / h
        );
    }

    let mesh = build_disk_mesh(0.1)?;
    let angles = boundary_angles(&mesh);
    println!(
        "\nboundary angles start at {} and end at {:.6} (< 2*pi)",
        angles[0],
        angles.last().unwrap()
    );
    let out = std::env::temp_dir().join("disk_mesh_example.txt");
    write_mesh(&mesh, &out)?;
    println!("mesh written to {}", out.display());
    Ok(())
}
