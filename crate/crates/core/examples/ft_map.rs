//! The Fourier-transform ratio map over the coherence disk.

use thermoptic::schemes::{ratio_map, MapScheme, DEFAULT_GRID};

fn main() -> thermoptic::Result<()> {
    let map = ratio_map(MapScheme::Ft, DEFAULT_GRID, 0.01, 0)?;
    let present = map.present().count();
    let (cell, max) = map
        .present()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("the disk has interior cells");
    println!("{present} cells present of {}", map.cells.len());
    println!(
        "largest V_op/V_FT = {max:.5} at |γ| = {:.3}, φ = {:.3}",
        cell.gamma_abs(),
        cell.phi()
    );
    Ok(())
}
