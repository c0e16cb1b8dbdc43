//! The ln-variance of temperature over a grid of frequency pairs.

use thermoptic::blackbody::{variance_map, BlackbodyScene};

fn main() -> thermoptic::Result<()> {
    let scene = BlackbodyScene::new(1e4, 1e-32)?;
    let map = variance_map(&scene, 1e13, 3e15, 64)?;
    let finite = map.ln_var.iter().filter(|v| v.is_finite());
    let max = finite.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    println!("max ⟨n_ν⟩ on the window: {:.3e}", map.max_mean_photon_number);
    println!("ln var_T spans [{:.3}, {:.3}]", map.min_ln_var, max);
    println!("minimum at ν1 = {:.4e} Hz, ν2 = {:.4e} Hz", map.min_nu1, map.min_nu2);
    Ok(())
}
