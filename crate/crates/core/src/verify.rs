//! Invariant suites behind `thermoptic verify`.
//!
//! `core` runs the moment-algebra checks and finishes in seconds; `oracle`
//! compares against brute-force Fock computations. Every tolerance is
//! multiplied by [`VerifyOptions::tolerance_scale`].

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blackbody::{multimode_qfi, temperature_variance, variance_bound_cofactor, BlackbodyScene};
use crate::counting::{count_distribution, fock_oracle, tail_rule, CountScheme};
use crate::error::Result;
use crate::oracle::{
    expectation_gap, random_observable, random_passive_state, sld_commutator_expectations, sld_residual,
    spatial_eigen_qfi,
};
use crate::povm::{gill_massar_bounds, optimize_povm, povm_from_coords, gell_mann, PovmProblem, GM_SLACK, N_COORDS};
use crate::spatial::{qfi_spatial, sld_commutator_claims, spatial_slds, weighted_scheme, SpatialParam, SpatialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Core,
    Oracle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 0,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

struct Runner {
    scale: f64,
    suite: &'static str,
    results: Vec<CheckResult>,
}

impl Runner {
    fn tol(&self, t: f64) -> f64 {
        t * self.scale
    }

    fn run(&mut self, name: &'static str, check: impl FnOnce(&Self) -> Result<(bool, String)>) {
        let start = Instant::now();
        let (passed, detail) = check(self).unwrap_or_else(|e| (false, format!("error: {e}")));
        self.results.push(CheckResult {
            suite: self.suite,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    /// `measured ≤ tol(threshold)`.
    fn bound(&mut self, name: &'static str, threshold: f64, measure: impl FnOnce() -> Result<f64>) {
        self.run(name, |r| {
            let m = measure()?;
            let t = r.tol(threshold);
            Ok((m <= t, format!("{m:.3e} ≤ {t:.1e}")))
        });
    }
}

fn reference() -> SpatialParams {
    SpatialParams::new(0.01, 0.5, FRAC_PI_4).expect("valid reference point")
}

fn random_params(rng: &mut ChaCha8Rng) -> Result<SpatialParams> {
    SpatialParams::new(
        rng.random_range(1e-4..0.1),
        rng.random_range(0.01..0.99),
        rng.random_range(0.0..TAU),
    )
}

fn core(r: &mut Runner, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..20).map(|_| (random_observable(&mut rng), random_observable(&mut rng))).collect();
    r.bound("commutator antisymmetry", 1e-12, || {
        let mut worst: f64 = 0.0;
        for (a, b) in &pairs {
            worst = worst.max((a.commutator(b)? + b.commutator(a)?).max_coefficient());
        }
        Ok(worst)
    });

    let points: Vec<SpatialParams> = (0..5).map(|_| random_params(&mut rng)).collect::<Result<_>>().unwrap_or_default();
    r.bound("SLD commutator claims", 1e-10, || {
        let mut worst: f64 = 0.0;
        for p in points.iter().chain([reference()].iter()) {
            for c in sld_commutator_claims(p)? {
                worst = worst.max(c.residual);
            }
        }
        Ok(worst)
    });

    r.bound("tr(ρ[L_i, L_j]) by Wick", 1e-8, || {
        let p = reference();
        let s = p.state()?;
        let slds = spatial_slds(&p)?;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let c = slds[i].observable.commutator(&slds[j].observable)?;
                worst = worst.max(c.expectation(&s)?.norm());
            }
        }
        Ok(worst)
    });

    r.bound("QFI independent of φ", 1e-10, || {
        let base = qfi_spatial(&SpatialParams::new(0.01, 0.5, 0.0)?)?;
        let mut worst: f64 = 0.0;
        for phi in [FRAC_PI_3, PI, 1.5 * PI] {
            let q = qfi_spatial(&SpatialParams::new(0.01, 0.5, phi)?)?;
            let scale = base.matrix().abs().max();
            worst = worst.max((q.matrix() - base.matrix()).abs().max() / scale);
        }
        Ok(worst)
    });

    r.run("weighted scheme, δ = 0", |r| {
        let w = weighted_scheme(&reference(), true)?;
        let dev = (w.cost_star - 5.0).abs().max((w.p_star - 0.5).abs());
        Ok((dev <= r.tol(1e-6), format!("cost {:.8}, p {:.8}", w.cost_star, w.p_star)))
    });

    r.run("weighted scheme, counted δ", |_| {
        let w = weighted_scheme(&reference(), false)?;
        let ok = w.cost_star < 5.0 && w.p_star < 0.5 && w.cost_star >= 4.5;
        Ok((ok, format!("cost {:.6} in [4.5, 5), p {:.6} < 0.5", w.cost_star, w.p_star)))
    });

    r.bound("weighted mixture below I_Q", 1e-8, || {
        let p = reference();
        let iq = qfi_spatial(&p)?;
        let ic = weighted_scheme(&p, false)?.ic_mixture;
        let d = ic.matrix() - iq.matrix();
        Ok(d.symmetric_eigen().eigenvalues.max().max(0.0) / iq.matrix().norm())
    });

    r.run("Gill–Massar closed form", |_| {
        let g = gill_massar_bounds(3, 3)?;
        let q = gill_massar_bounds(3, 2)?;
        let ok = g.lower == 4.5 && g.upper_scheme == 9.0 && q.lower == 9.0 && gill_massar_bounds(3, 1).is_err();
        Ok((ok, format!("d=3,D=3: [{}, {}]; D=2: {}", g.lower, g.upper_scheme, q.lower)))
    });

    r.bound("cofactor bound against inverse", 1e-8, || {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let scene = BlackbodyScene::new(rng.random_range(3e3..3e4), 10f64.powf(rng.random_range(-34.0..-30.0)))?;
            let kt = scene.thermal_frequency();
            let mut freqs: Vec<f64> = (0..3).map(|_| kt * rng.random_range(0.05..8.0)).collect();
            freqs.sort_by(f64::total_cmp);
            let inv = multimode_qfi(&freqs, &scene)?.inverse()?;
            for i in 0..2 {
                let c = variance_bound_cofactor(&freqs, &scene, i)?;
                worst = worst.max((c / inv[(i, i)] - 1.0).abs());
            }
            worst = worst.max((temperature_variance(&freqs, &scene)? / inv[(0, 0)] - 1.0).abs());
        }
        Ok(worst)
    });
}

fn oracle(r: &mut Runner, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f72_6163_6c65);
    let draws: Vec<(SpatialParams, f64)> = (0..50)
        .map(|_| Ok((random_params(&mut rng)?, rng.random_range(0.0..TAU))))
        .collect::<Result<_>>()
        .unwrap_or_default();
    r.bound("count distributions against Fock oracle", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (p, psi) in &draws {
            let cutoff = tail_rule(p.diag_thermal())?;
            for scheme in [CountScheme::Direct, CountScheme::Ft, CountScheme::PhaseShifted(*psi)] {
                let a = count_distribution(p, scheme, cutoff);
                let b = fock_oracle(p, &scheme.total_unitary(p), cutoff);
                worst = worst.max(a.max_abs_diff(&b));
            }
        }
        Ok(worst)
    });

    r.bound("Wick against Fock expectations", 1e-8, || {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let s = random_passive_state(&mut rng, 0.1)?;
            worst = worst.max(expectation_gap(&s, &random_observable(&mut rng))?);
        }
        Ok(worst)
    });

    r.bound("Gao–Lee against eigendecomposition QFI", 1e-4, || {
        let p = reference();
        let a = spatial_eigen_qfi(&p)?;
        let b = qfi_spatial(&p)?;
        let floor = 1e-8 * b.matrix().norm();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((a.get(i, j) - b.get(i, j)).abs() / b.get(i, j).abs().max(floor));
            }
        }
        Ok(worst)
    });

    r.bound("SLD defining equation", 1e-6, || {
        let p = reference();
        SpatialParam::ALL
            .iter()
            .map(|&q| sld_residual(&p, q))
            .try_fold(0.0f64, |a, b| Ok(a.max(b?)))
    });

    r.bound("tr(ρ[L_i, L_j]) in Fock space", 1e-8, || {
        Ok(sld_commutator_expectations(&reference())?
            .into_iter()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max))
    });

    r.run("Gill–Massar on random and optimized POVMs", |r| {
        let slack = r.tol(GM_SLACK);
        let basis = gell_mann();
        let mut worst_trace: f64 = 0.0;
        let mut worst_cost = f64::INFINITY;
        for p in [reference(), SpatialParams::new(0.02, 0.8, 2.0)?] {
            let problem = PovmProblem::new(&p)?;
            for _ in 0..200 {
                let x: Vec<f64> = (0..N_COORDS).map(|_| rng.random_range(-PI..PI)).collect();
                let m = povm_from_coords(&x, &basis)?;
                worst_trace = worst_trace.max(problem.gill_massar_trace(&m)?);
                worst_cost = worst_cost.min(problem.cost(&m));
            }
        }
        let best = optimize_povm(&reference(), 2, seed)?;
        worst_trace = worst_trace.max(best.gill_massar_trace);
        worst_cost = worst_cost.min(best.best_cost);
        let ok = worst_trace <= 2.0 * (1.0 + slack) && worst_cost >= 4.5 * (1.0 - slack);
        Ok((ok, format!("max tr(I_Q⁻¹I_C) {worst_trace:.8}, min cost {worst_cost:.6}")))
    });
}

/// Runs the requested suites; never panics on a failing check.
pub fn run(opts: VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    if matches!(opts.suite, Suite::Core | Suite::All) {
        let mut r = Runner {
            scale: opts.tolerance_scale,
            suite: "core",
            results: Vec::new(),
        };
        core(&mut r, opts.seed);
        out.extend(r.results);
    }
    if matches!(opts.suite, Suite::Oracle | Suite::All) {
        let mut r = Runner {
            scale: opts.tolerance_scale,
            suite: "oracle",
            results: Vec::new(),
        };
        oracle(&mut r, opts.seed);
        out.extend(r.results);
    }
    out
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// One aligned line per check.
pub fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        let pad = width - r.name.chars().count();
        s.push_str(&format!(
            "{:<6} {:<6} {}{} {:>7.2}s  {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.name,
            " ".repeat(pad),
            r.seconds,
            r.detail
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_suite_passes() {
        let res = run(VerifyOptions {
            suite: Suite::Core,
            ..Default::default()
        });
        assert!(all_passed(&res), "{}", render_table(&res));
    }

    #[test]
    fn tampered_tolerance_fails() {
        let res = run(VerifyOptions {
            suite: Suite::Core,
            seed: 3,
            tolerance_scale: 0.0,
        });
        assert!(!all_passed(&res));
    }
}
