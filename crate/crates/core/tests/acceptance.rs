//! One PASS/FAIL line per primary acceptance criterion.
//!
//! Each criterion is a list of sub-checks. The process exits nonzero when a
//! sub-check fails that is not in `SHORTFALLS`, or when a listed shortfall
//! unexpectedly passes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use thermoptic::blackbody::{optimal_frequencies, temperature_variance, variance_map, BlackbodyScene};
use thermoptic::povm::{optimize_povm, DEFAULT_RESTARTS};
use thermoptic::schemes::{random_phase_cost, ratio_map, MapScheme, DEFAULT_GRID};
use thermoptic::spatial::{weighted_scheme, SpatialParams};
use thermoptic::verify::{run, Suite, VerifyOptions};

/// Sub-checks that fail when implemented as stated; see the README.
const SHORTFALLS: &[(&str, &str)] = &[
    (
        "κ-invariance to 0.1%",
        "at T = 2e4 K, κ = 1e-31 s² the mean photon number reaches 1e-2 and ν₁ moves 0.24%",
    ),
    (
        "min ln-variance in [27, 35]",
        "ln var_T bottoms out at 25.63 for κ = 1e-32 s² (27.93 at κ = 1e-33 s²)",
    ),
];

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

struct Criterion {
    title: &'static str,
    budget_s: f64,
    body: fn() -> Vec<Check>,
}

fn frequency_law() -> Vec<Check> {
    let mut out = Vec::new();
    let (c1, c2) = (1.188e10, 1.118e11);
    let mut worst_law: f64 = 0.0;
    let mut worst_kappa: f64 = 0.0;
    let mut at_1e4 = (0.0, 0.0);
    for t in [5e3, 1e4, 2e4] {
        let mut pairs = Vec::new();
        for kappa in [1e-33, 1e-32, 1e-31] {
            let (n1, n2) = optimal_frequencies(&BlackbodyScene::new(t, kappa).unwrap()).unwrap();
            worst_law = worst_law.max((n1 / t / c1 - 1.0).abs()).max((n2 / t / c2 - 1.0).abs());
            pairs.push((n1, n2));
        }
        if t == 1e4 {
            at_1e4 = pairs[1];
        }
        for a in &pairs {
            for b in &pairs {
                worst_kappa = worst_kappa.max((a.0 / b.0 - 1.0).abs()).max((a.1 / b.1 - 1.0).abs());
            }
        }
    }
    out.push(check(
        "ν/T within 1% of the law",
        worst_law <= 0.01,
        format!("worst deviation {:.3}%", 100.0 * worst_law),
    ));
    out.push(check(
        "κ-invariance to 0.1%",
        worst_kappa <= 1e-3,
        format!("worst spread {:.3}%", 100.0 * worst_kappa),
    ));
    out.push(check(
        "T = 1e4 K pair",
        true,
        format!("ν = ({:.4e}, {:.4e}) Hz", at_1e4.0, at_1e4.1),
    ));
    out
}

fn variance_map_regime() -> Vec<Check> {
    let scene = BlackbodyScene::new(1e4, 1e-32).unwrap();
    let map = variance_map(&scene, 1e13, 3e15, 64).unwrap();
    let cell = map.freqs[1] - map.freqs[0];
    let (p1, p2) = (1.188e10 * 1e4, 1.118e11 * 1e4);
    let at_law = temperature_variance(&[p1, p2], &scene).unwrap().ln();
    vec![
        check(
            "max ⟨n_ν⟩ < 3e-4",
            map.max_mean_photon_number < 3e-4,
            format!("{:.3e}", map.max_mean_photon_number),
        ),
        check(
            "min ln-variance in [27, 35]",
            (27.0..=35.0).contains(&map.min_ln_var),
            format!("grid minimum {:.3}, at the law pair {:.3}", map.min_ln_var, at_law),
        ),
        check(
            "minimum within one cell of the law",
            (map.min_nu1 - p1).abs() <= cell && (map.min_nu2 - p2).abs() <= cell,
            format!("({:.4e}, {:.4e}) Hz, cell {:.3e} Hz", map.min_nu1, map.min_nu2, cell),
        ),
    ]
}

fn weighted() -> Vec<Check> {
    let reference = SpatialParams::new(0.01, 0.5, FRAC_PI_4).unwrap();
    let ideal = weighted_scheme(&reference, true).unwrap();
    let real = weighted_scheme(&reference, false).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for g in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
        for phi in [0.0, 1.0, 2.5, 4.0] {
            let t = Instant::now();
            let c = weighted_scheme(&SpatialParams::new(0.01, g, phi).unwrap(), false).unwrap().cost_star;
            slowest = slowest.max(t.elapsed().as_secs_f64());
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    vec![
        check(
            "δ = 0: cost 5 at p = 0.5 to 1e-6",
            (ideal.cost_star - 5.0).abs() <= 1e-6 && (ideal.p_star - 0.5).abs() <= 1e-6,
            format!("cost {:.8}, p {:.8}", ideal.cost_star, ideal.p_star),
        ),
        check(
            "counted δ: cost < 5, p < 0.5",
            real.cost_star < 5.0 && real.p_star < 0.5,
            format!("cost {:.6}, p {:.6}", real.cost_star, real.p_star),
        ),
        check(
            "cost ≥ 4.5 everywhere sampled",
            lo >= 4.5,
            format!("24 points span [{lo:.6}, {hi:.6}]"),
        ),
        check("under 10 s per point", slowest < 10.0, format!("slowest {slowest:.3} s")),
    ]
}

fn ft_bound() -> Vec<Check> {
    let map = ratio_map(MapScheme::Ft, DEFAULT_GRID, 0.01, 0).unwrap();
    let max = map.max_value().unwrap();
    let lo = map.min_value().unwrap();
    vec![check(
        "max V_op/V_FT ≤ 0.017",
        max <= 0.017,
        format!("{} cells, ratios in [{lo:.2e}, {max:.5}]", map.present().count()),
    )]
}

fn random_phase() -> Vec<Check> {
    let (phases, trials) = (100, 20);
    let ratio = |g: f64, phi: f64, seed: u64| {
        let p = SpatialParams::new(0.01, g, phi).unwrap();
        let op = weighted_scheme(&p, false).unwrap().cost_star;
        let rp = random_phase_cost(&p, phases, trials, seed).unwrap();
        (op / rp.mean, op / rp.mean * rp.std_err / rp.mean)
    };
    let at_phi: Vec<(f64, f64)> = [0.0, FRAC_PI_2, PI].iter().enumerate().map(|(k, &f)| ratio(0.5, f, 10 + k as u64)).collect();
    let mut worst: f64 = 0.0;
    for a in &at_phi {
        for b in &at_phi {
            worst = worst.max((a.0 - b.0).abs() / (a.1 * a.1 + b.1 * b.1).sqrt().max(f64::MIN_POSITIVE));
        }
    }
    let trend: Vec<f64> = [0.5, 0.8, 0.95].iter().map(|&g| ratio(g, 0.0, 20).0).collect();
    vec![
        check(
            "φ-independence within 3 standard errors",
            worst <= 3.0,
            format!(
                "ratios {:.4}±{:.4}, {:.4}±{:.4}, {:.4}±{:.4}; worst {worst:.2} σ",
                at_phi[0].0, at_phi[0].1, at_phi[1].0, at_phi[1].1, at_phi[2].0, at_phi[2].1
            ),
        ),
        check(
            "monotone decrease over |γ| = 0.5, 0.8, 0.95",
            trend[0] > trend[1] && trend[1] > trend[2],
            format!("{:.4} > {:.4} > {:.4}", trend[0], trend[1], trend[2]),
        ),
    ]
}

fn oracle_suites() -> Vec<Check> {
    run(VerifyOptions {
        suite: Suite::All,
        seed: 2024,
        tolerance_scale: 1.0,
    })
    .into_iter()
    .map(|r| check(r.name, r.passed, r.detail))
    .collect()
}

fn povm_agreement() -> Vec<Check> {
    let mut worst: f64 = 0.0;
    let mut lowest = f64::INFINITY;
    let mut gm: f64 = 0.0;
    let mut rows = Vec::new();
    for g in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let p = SpatialParams::new(0.01, g, FRAC_PI_4).unwrap();
        let best = optimize_povm(&p, DEFAULT_RESTARTS, 7).unwrap();
        let w = weighted_scheme(&p, false).unwrap().cost_star;
        let gap = (best.best_cost - w).abs() / w;
        worst = worst.max(gap);
        lowest = lowest.min(best.best_cost);
        gm = gm.max(best.gill_massar_trace);
        rows.push(format!("{g}: {:.4}", best.best_cost));
    }
    vec![
        check("within 2% of the weighted scheme", worst <= 0.02, format!("worst gap {:.3}%", 100.0 * worst)),
        check(
            "cost ≥ 4.5 and tr(I_Q⁻¹I_C) ≤ 2",
            lowest >= 4.5 * (1.0 - 1e-6) && gm <= 2.0 * (1.0 + 1e-6),
            format!("costs {}; max trace {gm:.7}", rows.join(", ")),
        ),
    ]
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { title: "optimal-frequency law", budget_s: 30.0, body: frequency_law },
        Criterion { title: "temperature variance map regime", budget_s: 60.0, body: variance_map_regime },
        Criterion { title: "weighted scheme", budget_s: 240.0, body: weighted },
        Criterion { title: "FT scheme bound", budget_s: 600.0, body: ft_bound },
        Criterion { title: "random-phase scheme", budget_s: 600.0, body: random_phase },
        Criterion { title: "oracle suites", budget_s: 120.0, body: oracle_suites },
        Criterion { title: "POVM search agreement", budget_s: 300.0, body: povm_agreement },
    ];
    let mut unexpected = Vec::new();
    for c in criteria {
        let start = Instant::now();
        let mut checks = (c.body)();
        let secs = start.elapsed().as_secs_f64();
        checks.push(check("runtime budget", secs <= c.budget_s, format!("{secs:.1} s of {:.0} s", c.budget_s)));
        let ok = checks.iter().all(|k| k.passed);
        println!("{} {} ({secs:.1} s)", if ok { "PASS" } else { "FAIL" }, c.title);
        for k in &checks {
            let shortfall = SHORTFALLS.iter().find(|(n, _)| *n == k.name);
            let tag = match (k.passed, shortfall) {
                (true, None) => "ok  ",
                (false, Some(_)) => "gap ",
                (false, None) => "FAIL",
                (true, Some(_)) => "NEW ",
            };
            println!("    {tag} {}: {}", k.name, k.detail);
            if let (false, Some((_, why))) = (k.passed, shortfall) {
                println!("         documented shortfall: {why}");
            }
            if k.passed == shortfall.is_some() {
                unexpected.push(format!("{}: {}", c.title, k.name));
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: every failing check is a documented shortfall");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcomes in {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
