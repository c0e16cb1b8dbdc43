//! Search six-element mixture POVMs and compare with the weighted scheme.

use thermoptic::povm::{gill_massar_bounds, optimize_povm, DEFAULT_RESTARTS};
use thermoptic::spatial::{weighted_scheme, SpatialParams};

fn main() -> thermoptic::Result<()> {
    let gm = gill_massar_bounds(3, 3)?;
    println!("Gill–Massar: cost ≥ {}, equal split ≤ {}", gm.lower, gm.upper_scheme);
    println!("{:>6} {:>10} {:>10} {:>9} {:>8} {:>10} {:>12}", "|γ|", "povm", "weighted", "gap", "p*", "GM trace", "untruncated");
    for g in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let p = SpatialParams::new(0.01, g, std::f64::consts::FRAC_PI_4)?;
        let best = optimize_povm(&p, DEFAULT_RESTARTS, 2024)?;
        let w = weighted_scheme(&p, false)?.cost_star;
        println!(
            "{g:>6.2} {:>10.6} {:>10.6} {:>8.3}% {:>8.4} {:>10.7} {:>12.6}",
            best.best_cost,
            w,
            100.0 * (best.best_cost - w) / w,
            best.best_p,
            best.gill_massar_trace,
            best.gaussian_cost
        );
    }
    Ok(())
}
