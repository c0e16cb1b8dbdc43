//! Quadratic observables: commutator algebra, Wick moments and their
//! truncated Fock-space counterparts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thermoptic::observable::QuadraticObservable;
use thermoptic::oracle::{expectation_gap, random_observable, random_passive_state};

fn main() -> thermoptic::Result<()> {
    let n1 = QuadraticObservable::number(2, 0);
    let hop = QuadraticObservable::hop(2, 0, 1);
    let comm = n1.commutator(&hop)?;
    println!("[n̂1, a1†a2] ∝ a1†a2: factor {:?}", comm.proportionality(&hop)?);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let s = random_passive_state(&mut rng, 0.1)?;
        worst = worst.max(expectation_gap(&s, &random_observable(&mut rng))?);
    }
    println!("largest |Wick − Fock| over 25 random draws: {worst:.2e}");
    Ok(())
}
