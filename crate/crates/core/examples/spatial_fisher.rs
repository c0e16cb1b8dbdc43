//! Quantum Fisher information and SLDs of the two-spatial-mode model, with
//! the Fock eigendecomposition cross-check.

use thermoptic::oracle::{sld_residual, spatial_eigen_qfi};
use thermoptic::spatial::{qfi_spatial, spatial_slds, SpatialParams};

fn main() -> thermoptic::Result<()> {
    let p = SpatialParams::new(0.01, 0.5, std::f64::consts::FRAC_PI_4)?;
    println!("I_Q (Gao–Lee) =\n{:.6}", qfi_spatial(&p)?.matrix());
    println!("I_Q (Fock eigen) =\n{:.6}", spatial_eigen_qfi(&p)?.matrix());
    for sld in spatial_slds(&p)? {
        println!(
            "{:?}: P = {:.6}, Q = {:.6}, R = {:.6}, defining-equation residual {:.1e}",
            sld.param,
            sld.pqr.p,
            sld.pqr.q,
            sld.pqr.r,
            sld_residual(&p, sld.param)?
        );
        if let Some(d) = &sld.discrepancy {
            println!("    printed form deviates: {:.2e} / {:.2e}", d.deviation_minus, d.deviation_plus);
        }
    }
    Ok(())
}
