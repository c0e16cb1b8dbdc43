//! Runs every invariant suite and prints the pass/fail table.

use thermoptic::verify::{all_passed, render_table, run, VerifyOptions};

fn main() {
    let results = run(VerifyOptions::default());
    print!("{}", render_table(&results));
    println!("{}", if all_passed(&results) { "all checks passed" } else { "some checks failed" });
}
