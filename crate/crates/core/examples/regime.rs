//! Checks of the single-mode and far-field approximations, including a
//! scene built from source geometry.

use thermoptic::blackbody::{regime_check, BlackbodyScene, Geometry};

fn main() -> thermoptic::Result<()> {
    // a Sun-like star at 10 pc seen by a 1 m² aperture for 1 ms
    let geometry = Geometry {
        source_area: std::f64::consts::PI * 6.96e8f64.powi(2),
        detector_area: 1.0,
        distance: 3.086e17,
        observation_time: 1e-3,
    };
    let scene = BlackbodyScene::from_geometry(5772.0, geometry)?;
    println!("κ = {:.3e} s², Δν = {:.1e} Hz", scene.kappa(), geometry.bandwidth());
    let theta = 6.96e8 / 3.086e17;
    for nu in [1e14, 6e14, 3e15] {
        let r = regime_check(&scene, nu, theta);
        println!(
            "ν = {nu:.1e} Hz: ν²κ = {:.2e} (single-mode {}), cot θ/(αν) = {:.2e}, cot θ/(εT) = {:.2e} (far-field {})",
            r.nu2_kappa, r.single_mode_ok, r.cot_over_alpha_nu, r.cot_over_epsilon_t, r.farfield_ok
        );
    }
    Ok(())
}
