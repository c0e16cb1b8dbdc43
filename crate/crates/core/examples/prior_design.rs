//! Frequency designs averaged over a temperature prior, with κ as nuisance.

use thermoptic::blackbody::{prior_averaged_design, unit_weight, Prior};

fn main() -> thermoptic::Result<()> {
    let prior = Prior::uniform_temperature(8e3, 12e3, 1e-32, 9)?;
    for m in 2..=4 {
        let d = prior_averaged_design(&prior, &unit_weight(0), m)?;
        let freqs: Vec<String> = d.grid.as_slice().iter().map(|f| format!("{f:.4e}")).collect();
        println!("M = {m}: E[var_T] = {:.5e} K² at ν = [{}] Hz", d.objective, freqs.join(", "));
    }
    Ok(())
}
