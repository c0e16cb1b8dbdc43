//! The weighted mixture of the two incompatible optimal measurements.

use thermoptic::spatial::{weighted_scheme, SpatialParams};

fn main() -> thermoptic::Result<()> {
    for g in [0.1, 0.5, 0.9] {
        let p = SpatialParams::new(0.01, g, std::f64::consts::FRAC_PI_4)?;
        let ideal = weighted_scheme(&p, true)?;
        let real = weighted_scheme(&p, false)?;
        println!(
            "|γ| = {g}: ideal p* = {:.6}, cost {:.6}; counted p* = {:.6}, cost {:.6}",
            ideal.p_star, ideal.cost_star, real.p_star, real.cost_star
        );
    }
    Ok(())
}
