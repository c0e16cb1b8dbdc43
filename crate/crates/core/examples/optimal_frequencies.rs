//! Optimal two-frequency design for temperature estimation, across
//! temperatures and collection constants.

use thermoptic::blackbody::{optimal_frequencies, temperature_variance, BlackbodyScene};

fn main() -> thermoptic::Result<()> {
    println!("{:>8} {:>8} {:>12} {:>12} {:>12}", "T [K]", "κ [s²]", "ν1/T", "ν2/T", "var_T [K²]");
    for t in [5e3, 1e4, 2e4] {
        for kappa in [1e-33, 1e-32, 1e-31] {
            let scene = BlackbodyScene::new(t, kappa)?;
            let (n1, n2) = optimal_frequencies(&scene)?;
            let v = temperature_variance(&[n1, n2], &scene)?;
            println!("{t:>8.0} {kappa:>8.0e} {:>12.5e} {:>12.5e} {v:>12.4e}", n1 / t, n2 / t);
        }
    }
    Ok(())
}
