//! Two-spatial-mode Gaussian states: moments, symplectic spectrum and the
//! passive unitary that builds them from independent thermal modes.

use thermoptic::counting::u_phase_bs;
use thermoptic::gaussian::GaussianState;
use thermoptic::linalg::max_abs;
use thermoptic::spatial::SpatialParams;

fn main() -> thermoptic::Result<()> {
    let p = SpatialParams::new(0.01, 0.5, std::f64::consts::FRAC_PI_3)?;
    let spatial = p.state()?;
    println!("Σ =\n{:.5}", spatial.sigma().map(|z| z.re));
    println!("symplectic eigenvalues: {:?}", spatial.symplectic_eigenvalues());
    println!("mode occupations: {:?}", spatial.mean_photon_numbers());

    let x = p.diag_thermal();
    let built = GaussianState::thermal_product(&[x.x1, x.x2])?.apply_mode_unitary(&u_phase_bs(p.phi()).to_dmatrix())?;
    println!("|Σ − U(φ)·thermal| = {:.2e}", max_abs(&(built.sigma() - spatial.sigma())));
    Ok(())
}
