//! Photon-count statistics of the two-spatial-mode thermal state.
//!
//! The spatial state is the diagonal thermal state with occupations
//! `x1 = ⟨n⟩(1−|γ|)`, `x2 = ⟨n⟩(1+|γ|)` rotated by [`u_phase_bs`]`(φ)`.
//! Three measurements are modelled:
//!
//! - [`CountScheme::Direct`]: counting the spatial modes themselves.
//! - [`CountScheme::PhaseShifted`]`(ψ)`: a phase shift `ψ` on mode 1 followed
//!   by the balanced beamsplitter `U(0)`. The combined map is `U(0)U(φ−ψ)`.
//! - [`CountScheme::Ft`]: the Fourier transform `U(0)`, i.e. `ψ = 0`.
//!
//! With `e = exp(−iδ)`, `δ = φ − ψ`, the beamsplitter distribution is
//!
//! ```text
//! p(m1, m2) = Σ_{n1} p_in(n1, n2) m1! m2! / (n1! n2! 4^N)
//!             · |Σ_j C(n1, j) C(n2, m1−j) (1−e)^{m1+n1−2j} (1+e)^{m2−n1+2j}|²
//! ```
//!
//! where `N = m1 + m2 = n1 + n2`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{classical_fisher, FisherMatrix};
use crate::fock::{factorial, FockBasis, FockCutoff};
use crate::gaussian::TwoModeUnitary;
use crate::linalg::{CMatrix, C64};
use crate::spatial::SpatialParams;

/// Target unassigned mass for [`tail_rule`].
pub const TAIL_TARGET: f64 = 1e-14;

/// Smallest cutoff [`tail_rule`] returns.
pub const MIN_CUTOFF: usize = 6;

/// Largest cutoff the exact tables support.
pub const MAX_CUTOFF: usize = 60;

/// `U(φ) = (1/√2) [[−e^{−iφ}, e^{−iφ}], [1, 1]]`.
pub fn u_phase_bs(phase: f64) -> TwoModeUnitary {
    let e = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -phase);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    TwoModeUnitary::new(Matrix2::new(-e, e, h, h)).expect("U(φ) is unitary")
}

/// Occupations of the two independent thermal modes behind the spatial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagThermalParams {
    pub x1: f64,
    pub x2: f64,
}

impl DiagThermalParams {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !(x1 >= 0.0 && x2 >= 0.0 && x1.is_finite() && x2.is_finite()) {
            return Err(Error::Domain(format!(
                "thermal occupations must be finite and non-negative, got ({x1}, {x2})"
            )));
        }
        Ok(Self { x1, x2 })
    }
}

/// Exact mass of `p_in` outside the triangle `n1 + n2 ≤ N`.
pub fn triangle_tail(x: DiagThermalParams, n_max: usize) -> f64 {
    let q1 = x.x1 / (1.0 + x.x1);
    let q2 = x.x2 / (1.0 + x.x2);
    let mut tail = q1.powi(n_max as i32 + 1);
    for j in 0..=n_max {
        tail += (1.0 - q1) * q1.powi(j as i32) * q2.powi((n_max - j) as i32 + 1);
    }
    tail.max(0.0)
}

/// Smallest `N ≥ 6` whose unassigned mass is below `1e-14`.
pub fn tail_rule(x: DiagThermalParams) -> Result<FockCutoff> {
    (MIN_CUTOFF..=MAX_CUTOFF)
        .find(|&n| triangle_tail(x, n) < TAIL_TARGET)
        .map(FockCutoff::new)
        .ok_or_else(|| {
            Error::Domain(format!(
                "occupations ({}, {}) need more than {MAX_CUTOFF} photons for a 1e-14 tail",
                x.x1, x.x2
            ))
        })
}

/// Count probabilities on `m1 + m2 ≤ N_max`, enumerated as in [`FockBasis`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountDistribution {
    pub cutoff: FockCutoff,
    pub outcomes: Vec<(usize, usize)>,
    pub probs: Vec<f64>,
    /// Mass not represented by `probs`.
    pub tail_bound: f64,
}

impl CountDistribution {
    pub fn get(&self, m1: usize, m2: usize) -> f64 {
        self.outcomes
            .iter()
            .position(|&o| o == (m1, m2))
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of `N` detected photons in total.
    pub fn total_photon_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cutoff.max_total_photons + 1];
        for (&(m1, m2), &p) in self.outcomes.iter().zip(&self.probs) {
            out[m1 + m2] += p;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CountDistribution) -> f64 {
        assert_eq!(self.outcomes, other.outcomes);
        self.probs
            .iter()
            .zip(&other.probs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn outcomes(cutoff: FockCutoff) -> Vec<(usize, usize)> {
    FockBasis::new(2, cutoff)
        .states()
        .iter()
        .map(|s| (s[0], s[1]))
        .collect()
}

/// Exact binomial coefficients with `C(n, k) = 0` outside `0 ≤ k ≤ n`.
struct Binomial {
    rows: Vec<Vec<u64>>,
}

impl Binomial {
    fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        Self { rows }
    }

    fn get(&self, n: usize, k: isize) -> f64 {
        if k < 0 || k as usize > n {
            0.0
        } else {
            self.rows[n][k as usize] as f64
        }
    }
}

/// `x^k / (1+x)^{k+1}` and its derivative in `x`.
fn geometric(x: f64, k: usize) -> (f64, f64) {
    let v = x.powi(k as i32) / (1.0 + x).powi(k as i32 + 1);
    let d = if k == 0 {
        -1.0 / (1.0 + x).powi(2)
    } else {
        x.powi(k as i32 - 1) * (k as f64 - x) / (1.0 + x).powi(k as i32 + 2)
    };
    (v, d)
}

pub fn p_in(x: DiagThermalParams, cutoff: FockCutoff) -> CountDistribution {
    let outcomes = outcomes(cutoff);
    let probs = outcomes
        .iter()
        .map(|&(n1, n2)| geometric(x.x1, n1).0 * geometric(x.x2, n2).0)
        .collect();
    CountDistribution {
        cutoff,
        outcomes,
        probs,
        tail_bound: triangle_tail(x, cutoff.max_total_photons),
    }
}

/// Photon-counting measurements on the two spatial modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "phase", rename_all = "snake_case")]
pub enum CountScheme {
    /// Count the spatial modes directly; blind to `φ`.
    Direct,
    /// Fourier transform `U(0)` then count.
    Ft,
    /// Phase shift `ψ` on mode 1, beamsplitter `U(0)`, then count.
    PhaseShifted(f64),
}

impl CountScheme {
    /// The mode unitary applied to the diagonal thermal input.
    pub fn total_unitary(&self, params: &SpatialParams) -> TwoModeUnitary {
        match *self {
            CountScheme::Direct => u_phase_bs(params.phi()),
            CountScheme::Ft => u_phase_bs(0.0).compose(&u_phase_bs(params.phi())),
            CountScheme::PhaseShifted(psi) => u_phase_bs(0.0).compose(&u_phase_bs(params.phi() - psi)),
        }
    }

    fn delta(&self, params: &SpatialParams) -> Option<f64> {
        match *self {
            CountScheme::Direct => None,
            CountScheme::Ft => Some(params.phi()),
            CountScheme::PhaseShifted(psi) => Some(params.phi() - psi),
        }
    }
}

/// Probability of one outcome with derivatives in `(x1, x2, δ)`.
struct OutcomeValue {
    p: f64,
    dx1: f64,
    dx2: f64,
    ddelta: f64,
}

fn powi_c(z: C64, k: usize) -> C64 {
    z.powi(k as i32)
}

/// Beamsplitter outcome at relative phase `δ`, or direct counting when `delta` is `None`.
fn outcome(m1: usize, m2: usize, x: DiagThermalParams, delta: Option<f64>, binom: &Binomial) -> OutcomeValue {
    let n = m1 + m2;
    let mut acc = OutcomeValue {
        p: 0.0,
        dx1: 0.0,
        dx2: 0.0,
        ddelta: 0.0,
    };
    let mfac = factorial(m1) * factorial(m2);
    for n1 in 0..=n {
        let n2 = n - n1;
        let (g1, d1) = geometric(x.x1, n1);
        let (g2, d2) = geometric(x.x2, n2);
        let (weight, s2, ds2) = match delta {
            None => {
                let mut s = 0.0;
                for j in 0..=m1 {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * binom.get(n1, j as isize) * binom.get(n2, m1 as isize - j as isize);
                }
                let k = mfac / (factorial(n1) * factorial(n2) * 2f64.powi(n as i32));
                (k, s * s, 0.0)
            }
            Some(delta) => {
                let e = C64::from_polar(1.0, -delta);
                let (u, v) = (C64::new(1.0, 0.0) - e, C64::new(1.0, 0.0) + e);
                // d(1−e)/dδ = i e,  d(1+e)/dδ = −i e
                let (du, dv) = (C64::new(0.0, 1.0) * e, C64::new(0.0, -1.0) * e);
                let mut s = C64::new(0.0, 0.0);
                let mut ds = C64::new(0.0, 0.0);
                for j in 0..=m1.min(n1) {
                    let c = binom.get(n1, j as isize) * binom.get(n2, m1 as isize - j as isize);
                    if c == 0.0 {
                        continue;
                    }
                    let a = m1 + n1 - 2 * j;
                    let b = n - a;
                    let pu = powi_c(u, a);
                    let pv = powi_c(v, b);
                    s += pu * pv * c;
                    let dpu = if a == 0 { C64::new(0.0, 0.0) } else { powi_c(u, a - 1) * du * a as f64 };
                    let dpv = if b == 0 { C64::new(0.0, 0.0) } else { powi_c(v, b - 1) * dv * b as f64 };
                    ds += (dpu * pv + pu * dpv) * c;
                }
                let k = mfac / (factorial(n1) * factorial(n2) * 4f64.powi(n as i32));
                (k, s.norm_sqr(), 2.0 * (s.conj() * ds).re)
            }
        };
        acc.p += g1 * g2 * weight * s2;
        acc.dx1 += d1 * g2 * weight * s2;
        acc.dx2 += g1 * d2 * weight * s2;
        acc.ddelta += g1 * g2 * weight * ds2;
    }
    acc
}

fn distribution_with(params: &SpatialParams, scheme: CountScheme, cutoff: FockCutoff) -> (CountDistribution, Vec<Vec<f64>>) {
    let x = params.diag_thermal();
    let delta = scheme.delta(params);
    let binom = Binomial::new(cutoff.max_total_photons);
    let outcomes = outcomes(cutoff);
    let (n, g) = (params.n_mean(), params.gamma_abs());
    let mut probs = Vec::with_capacity(outcomes.len());
    let mut grads = Vec::with_capacity(outcomes.len());
    for &(m1, m2) in &outcomes {
        let o = outcome(m1, m2, x, delta, &binom);
        probs.push(o.p);
        grads.push(vec![
            (1.0 - g) * o.dx1 + (1.0 + g) * o.dx2,
            n * (o.dx2 - o.dx1),
            o.ddelta,
        ]);
    }
    let dist = CountDistribution {
        cutoff,
        outcomes,
        probs,
        tail_bound: triangle_tail(x, cutoff.max_total_photons),
    };
    (dist, grads)
}

/// Direct counting of the spatial modes (the `φ`-independent distribution).
pub fn p_out_bs(params: &SpatialParams, cutoff: FockCutoff) -> CountDistribution {
    distribution_with(params, CountScheme::Direct, cutoff).0
}

/// Counting after the Fourier transform `U(0)`.
pub fn p_out_ft(params: &SpatialParams, cutoff: FockCutoff) -> CountDistribution {
    distribution_with(params, CountScheme::Ft, cutoff).0
}

pub fn count_distribution(params: &SpatialParams, scheme: CountScheme, cutoff: FockCutoff) -> CountDistribution {
    distribution_with(params, scheme, cutoff).0
}

/// Analytic gradients `∂p/∂(⟨n⟩, |γ|, φ)` for every outcome.
pub fn count_gradients(params: &SpatialParams, scheme: CountScheme, cutoff: FockCutoff) -> (CountDistribution, Vec<Vec<f64>>) {
    distribution_with(params, scheme, cutoff)
}

/// Density matrix `L diag(p_in) L†` in the truncated two-mode basis, where `L`
/// lifts the mode unitary.
pub fn fock_density(x: DiagThermalParams, u: &TwoModeUnitary, cutoff: FockCutoff) -> CMatrix {
    let basis = FockBasis::new(2, cutoff);
    let pin = p_in(x, cutoff);
    let lift = basis.lift_passive(&u.to_dmatrix());
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        pin.probs.len(),
        pin.probs.iter().map(|&p| C64::new(p, 0.0)),
    ));
    &lift * diag * lift.adjoint()
}

/// Brute-force count distribution: lift `u`, conjugate the diagonal thermal
/// density matrix and read off the diagonal.
pub fn fock_oracle(params: &SpatialParams, u: &TwoModeUnitary, cutoff: FockCutoff) -> CountDistribution {
    let x = params.diag_thermal();
    let rho = fock_density(x, u, cutoff);
    CountDistribution {
        cutoff,
        outcomes: outcomes(cutoff),
        probs: (0..rho.nrows()).map(|i| rho[(i, i)].re).collect(),
        tail_bound: triangle_tail(x, cutoff.max_total_photons),
    }
}

/// Classical Fisher information of photon counting under `scheme`, over
/// `(⟨n⟩, |γ|, φ)`, at the given cutoff.
pub fn count_fisher(scheme: CountScheme, params: &SpatialParams, cutoff: FockCutoff) -> Result<FisherMatrix> {
    let (dist, grads) = distribution_with(params, scheme, cutoff);
    classical_fisher(&dist.probs, &grads)
}

/// [`count_fisher`] at the cutoff chosen by [`tail_rule`].
pub fn count_fisher_auto(scheme: CountScheme, params: &SpatialParams) -> Result<FisherMatrix> {
    count_fisher(scheme, params, tail_rule(params.diag_thermal())?)
}

/// Central finite-difference gradients, step `1e-6·max(1, |θ|)`.
pub fn count_gradients_fd(params: &SpatialParams, scheme: CountScheme, cutoff: FockCutoff) -> Result<Vec<Vec<f64>>> {
    let theta = [params.n_mean(), params.gamma_abs(), params.phi()];
    let base = count_distribution(params, scheme, cutoff);
    let mut grads = vec![vec![0.0; 3]; base.probs.len()];
    for k in 0..3 {
        let h = 1e-6 * theta[k].abs().max(1.0);
        let mut plus = theta;
        let mut minus = theta;
        plus[k] += h;
        minus[k] -= h;
        let fp = count_distribution(&SpatialParams::new(plus[0], plus[1], plus[2])?, scheme, cutoff);
        let fm = count_distribution(&SpatialParams::new(minus[0], minus[1], minus[2])?, scheme, cutoff);
        for (x, g) in grads.iter_mut().enumerate() {
            g[k] = (fp.probs[x] - fm.probs[x]) / (2.0 * h);
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_residual};
    use std::f64::consts::PI;

    fn sp(n: f64, g: f64, phi: f64) -> SpatialParams {
        SpatialParams::new(n, g, phi).unwrap()
    }

    #[test]
    fn u_phase_values() {
        let u0 = u_phase_bs(0.0).to_dmatrix();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CMatrix::from_row_slice(2, 2, &[C64::new(-r, 0.0), C64::new(r, 0.0), C64::new(r, 0.0), C64::new(r, 0.0)]);
        assert!(max_abs(&(&u0 - expect)) < 1e-16);
        assert!(unitarity_residual(&u_phase_bs(0.77).to_dmatrix()) < 1e-15);
        let upi = u_phase_bs(PI).to_dmatrix();
        assert!((upi[(0, 0)] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((upi[(0, 1)] - C64::new(-r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn p_in_cases() {
        let vac = p_in(DiagThermalParams::new(0.0, 0.0).unwrap(), FockCutoff::new(6));
        assert_eq!(vac.get(0, 0), 1.0);
        assert_eq!(vac.total(), 1.0);
        let x = DiagThermalParams::new(0.005, 0.015).unwrap();
        let d = p_in(x, FockCutoff::new(8));
        assert!(d.tail_bound < 1e-16);
        let mean1: f64 = d.outcomes.iter().zip(&d.probs).map(|(&(a, _), p)| a as f64 * p).sum();
        assert!((mean1 - 0.005).abs() < 1e-15);
        assert!((d.total() + d.tail_bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_rule_floor_and_growth() {
        let tiny = tail_rule(DiagThermalParams::new(1e-4, 1e-4).unwrap()).unwrap();
        assert_eq!(tiny.max_total_photons, 6);
        let small = tail_rule(DiagThermalParams::new(0.005, 0.015).unwrap()).unwrap();
        assert_eq!(small.max_total_photons, 7);
        let big = tail_rule(DiagThermalParams::new(0.1, 0.19).unwrap()).unwrap();
        assert!(big.max_total_photons > 6);
        assert!(triangle_tail(DiagThermalParams::new(0.1, 0.19).unwrap(), big.max_total_photons) < 1e-14);
    }

    #[test]
    fn triangle_tail_matches_sum() {
        let x = DiagThermalParams::new(0.3, 0.6).unwrap();
        let d = p_in(x, FockCutoff::new(9));
        assert!((1.0 - d.total() - d.tail_bound).abs() < 1e-14);
    }

    #[test]
    fn direct_counting_is_phase_blind_and_matches_oracle() {
        let cut = FockCutoff::new(6);
        let a = p_out_bs(&sp(0.01, 0.5, 0.0), cut);
        let b = p_out_bs(&sp(0.01, 0.5, 1.3), cut);
        assert!(a.max_abs_diff(&b) < 1e-12);
        let p = sp(0.01, 0.5, PI / 4.0);
        let oracle = fock_oracle(&p, &u_phase_bs(p.phi()), cut);
        assert!(p_out_bs(&p, cut).max_abs_diff(&oracle) < 1e-10);
        let pin = p_in(p.diag_thermal(), cut);
        for (x, y) in a.total_photon_marginal().iter().zip(pin.total_photon_marginal()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn ft_matches_oracle_and_sees_phase() {
        let cut = FockCutoff::new(6);
        let p = sp(0.01, 0.5, PI / 3.0);
        let oracle = fock_oracle(&p, &CountScheme::Ft.total_unitary(&p), cut);
        assert!(p_out_ft(&p, cut).max_abs_diff(&oracle) < 1e-10);
        let a = p_out_ft(&sp(0.01, 0.5, 0.0), cut);
        let b = p_out_ft(&sp(0.01, 0.5, PI / 2.0), cut);
        assert!(a.max_abs_diff(&b) > 1e-8);
        let c = p_out_ft(&sp(0.01, 0.0, 0.0), cut);
        let d = p_out_ft(&sp(0.01, 0.0, 2.0), cut);
        assert!(c.max_abs_diff(&d) < 1e-15);
    }

    #[test]
    fn identity_oracle_reproduces_input() {
        let p = sp(0.02, 0.3, 1.0);
        let cut = FockCutoff::new(6);
        let id = TwoModeUnitary::new(Matrix2::identity()).unwrap();
        let d = fock_oracle(&p, &id, cut);
        assert!(d.max_abs_diff(&p_in(p.diag_thermal(), cut)) < 1e-16);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let p = sp(0.03, 0.6, 0.9);
        let cut = FockCutoff::new(6);
        for scheme in [CountScheme::Direct, CountScheme::Ft, CountScheme::PhaseShifted(0.4)] {
            let (_, ga) = count_gradients(&p, scheme, cut);
            let gf = count_gradients_fd(&p, scheme, cut).unwrap();
            for (a, f) in ga.iter().zip(&gf) {
                for k in 0..3 {
                    assert!((a[k] - f[k]).abs() < 1e-8 * (1.0 + a[k].abs()), "{scheme:?} {a:?} {f:?}");
                }
            }
        }
    }

    #[test]
    fn direct_fisher_has_zero_phase_row() {
        let p = sp(0.01, 0.5, 0.7);
        let ic = count_fisher_auto(CountScheme::Direct, &p).unwrap();
        for k in 0..3 {
            assert_eq!(ic.get(2, k), 0.0);
        }
        let ft = count_fisher_auto(CountScheme::Ft, &sp(0.01, 0.5, PI / 4.0)).unwrap();
        for k in 0..3 {
            assert!(ft.get(k, k) > 0.0);
        }
    }

    #[test]
    fn single_mode_counting_is_optimal() {
        // |γ| = 0 direct counting: mode-1 counts alone estimate ⟨n⟩ with I = 2/(n+n²)
        let n = 0.05;
        let ic = count_fisher_auto(CountScheme::Direct, &sp(n, 0.0, 0.0)).unwrap();
        assert!((ic.get(0, 0) - 2.0 / (n + n * n)).abs() < 1e-8 * ic.get(0, 0));
    }
}
