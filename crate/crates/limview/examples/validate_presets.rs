//! Check the built-in boundary pairs against the non-vanishing-Jacobian
//! conditions: curve regularity, monotonicity of the tangent argument, the
//! winding index, and endpoint continuity of the zero extension.
//!
//! The continuous pairs close the loop and carry a whole winding turn; the
//! discontinuous pairs jump at the end of the arc and carry half a turn.
//! A restriction of a passing continuous pair stays admissible even when its
//! own index exceeds one half.
//!
//! Run with: `cargo run --example validate_presets`

use limview::boundary_data::{preset, validate, ArcSize, Family};
use std::f64::consts::PI;

fn main() -> Result<(), limview::Error> {
    println!(
        "{:<28} {:>8} {:>10} {:>8} {:>8} {:>20}",
        "pair", "regular", "monotone", "index", "cont@0", "classification"
    );
    for family in [Family::Continuous, Family::Discontinuous] {
        for size in [ArcSize::Small, ArcSize::Medium, ArcSize::Large] {
            let report = validate(&preset(family, size), 4096)?;
            println!(
                "{:<28} {:>8} {:>10} {:>8.4} {:>8} {:>20}",
                format!("{family:?}/{size:?}"),
                report.regular,
                report.arg_monotone,
                report.index,
                report.continuity_at_0,
                format!("{:?}", report.classification),
            );
        }
    }

    // Restricting a continuous pair to a shorter arc keeps the solutions
    // usable although the restricted index exceeds 1/2.
    let cut = preset(Family::Continuous, ArcSize::Medium).truncate(3.0 * PI / 4.0)?;
    let report = validate(&cut, 4096)?;
    println!(
        "\nrestriction of Continuous/Medium to [0, 3*pi/4]: index {:.4}, classification {:?}",
        report.index, report.classification
    );
    Ok(())
}
