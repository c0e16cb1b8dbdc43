//! Fourier-transform and random-phase schemes against the weighted optimum.

use thermoptic::schemes::{ratio_line, MapScheme};

fn main() -> thermoptic::Result<()> {
    let gammas = [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95];
    let rp = MapScheme::Rp { n_phases: 100, n_trials: 20 };
    let ft = ratio_line(MapScheme::Ft, 0.01, 0.0, &gammas, 0)?;
    let rp_line = ratio_line(rp, 0.01, 0.0, &gammas, 7)?;
    println!("{:>6} {:>12} {:>18}", "|γ|", "V_op/V_FT", "V_op/V_RP");
    for ((g, f), r) in gammas.iter().zip(&ft).zip(&rp_line) {
        println!(
            "{g:>6.2} {:>12.5} {:>10.4} ± {:.4}",
            f.value.unwrap_or(f64::NAN),
            r.value.unwrap_or(f64::NAN),
            r.std_err.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
