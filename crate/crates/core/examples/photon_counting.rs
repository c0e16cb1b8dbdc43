//! Photon-count distributions behind beamsplitters, their Fock oracle and
//! count-based Fisher information.

use thermoptic::counting::{count_distribution, count_fisher_auto, fock_oracle, tail_rule, CountScheme};
use thermoptic::spatial::SpatialParams;

fn main() -> thermoptic::Result<()> {
    let p = SpatialParams::new(0.01, 0.5, std::f64::consts::FRAC_PI_3)?;
    let cutoff = tail_rule(p.diag_thermal())?;
    println!("cutoff N = {}", cutoff.max_total_photons);
    for scheme in [CountScheme::Direct, CountScheme::Ft, CountScheme::PhaseShifted(0.4)] {
        let d = count_distribution(&p, scheme, cutoff);
        let oracle = fock_oracle(&p, &scheme.total_unitary(&p), cutoff);
        println!(
            "{scheme:?}: P(1,0) = {:.6e}, P(0,1) = {:.6e}, tail ≤ {:.1e}, |analytic − oracle| = {:.1e}",
            d.get(1, 0),
            d.get(0, 1),
            d.tail_bound,
            d.max_abs_diff(&oracle)
        );
        println!("  I_C =\n{:.6}", count_fisher_auto(scheme, &p)?.matrix());
    }
    Ok(())
}
