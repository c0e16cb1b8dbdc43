//! Brute-force references in the truncated two-mode Fock space.
//!
//! Everything here is independent of the Gaussian moment algebra: densities
//! come from lifting the mode unitary onto the diagonal thermal state, and
//! derivatives are central finite differences.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, Matrix2};
use rand::Rng;

use crate::counting::{fock_density, tail_rule, u_phase_bs, DiagThermalParams};
use crate::error::Result;
use crate::fisher::FisherMatrix;
use crate::fock::{FockBasis, FockCutoff};
use crate::gaussian::{GaussianState, TwoModeUnitary};
use crate::linalg::{CMatrix, C64};
use crate::observable::QuadraticObservable;
use crate::spatial::{sld_spatial, SpatialParam, SpatialParams};

/// Relative finite-difference step; the absolute step is `h·max(1, |θ|)`.
pub const FD_STEP: f64 = 1e-5;

/// Eigenvalue pairs with `λ_j + λ_k` below this are dropped from the QFI sum.
pub const EIGEN_FLOOR: f64 = 1e-15;

/// `ρ(⟨n⟩, |γ|, φ)` in the two-mode basis up to `cutoff`.
pub fn spatial_density(p: &SpatialParams, cutoff: FockCutoff) -> CMatrix {
    fock_density(p.diag_thermal(), &u_phase_bs(p.phi()), cutoff)
}

fn shifted(p: &SpatialParams, param: SpatialParam, delta: f64) -> Result<SpatialParams> {
    let mut t = p.theta();
    t[param.index()] += delta;
    SpatialParams::new(t[0], t[1], t[2])
}

/// Central-difference `∂ρ/∂θ_i`.
pub fn density_derivative(p: &SpatialParams, param: SpatialParam, cutoff: FockCutoff) -> Result<CMatrix> {
    let h = FD_STEP * p.theta()[param.index()].abs().max(1.0);
    let plus = spatial_density(&shifted(p, param, h)?, cutoff);
    let minus = spatial_density(&shifted(p, param, -h)?, cutoff);
    Ok((plus - minus) / C64::new(2.0 * h, 0.0))
}

/// `2 Re Σ_{jk} ⟨j|∂_aρ|k⟩⟨k|∂_bρ|j⟩ / (λ_j + λ_k)` over the spectrum of `rho`.
pub fn eigen_qfi(rho: &CMatrix, derivs: &[CMatrix]) -> Result<FisherMatrix> {
    let eig = SymmetricEigen::new(rho.clone());
    let v = &eig.eigenvectors;
    let rotated: Vec<CMatrix> = derivs.iter().map(|d| v.adjoint() * d * v).collect();
    let n = rho.nrows();
    let m = derivs.len();
    let mut out = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let den = eig.eigenvalues[j] + eig.eigenvalues[k];
                    if den > EIGEN_FLOOR {
                        acc += (rotated[a][(j, k)] * rotated[b][(k, j)]).re / den;
                    }
                }
            }
            out[(a, b)] = 2.0 * acc;
            out[(b, a)] = 2.0 * acc;
        }
    }
    FisherMatrix::quantum(out)
}

/// Eigendecomposition QFI of the spatial model at the tail-rule cutoff.
pub fn spatial_eigen_qfi(p: &SpatialParams) -> Result<FisherMatrix> {
    let cutoff = tail_rule(p.diag_thermal())?;
    let rho = spatial_density(p, cutoff);
    let derivs = SpatialParam::ALL
        .iter()
        .map(|&q| density_derivative(p, q, cutoff))
        .collect::<Result<Vec<_>>>()?;
    eigen_qfi(&rho, &derivs)
}

/// Frobenius norm of `∂ρ − (ρℒ + ℒρ)/2` for the closed-form SLD of `param`.
pub fn sld_residual(p: &SpatialParams, param: SpatialParam) -> Result<f64> {
    let cutoff = tail_rule(p.diag_thermal())?;
    let basis = FockBasis::new(2, cutoff);
    let rho = spatial_density(p, cutoff);
    let l = sld_spatial(param, p)?.observable.fock_matrix_in(&basis);
    let d = density_derivative(p, param, cutoff)?;
    let half = C64::new(0.5, 0.0);
    Ok((d - (&rho * &l + &l * &rho) * half).norm())
}

/// `tr(ρ A)`.
pub fn fock_expectation(rho: &CMatrix, obs: &CMatrix) -> C64 {
    (rho * obs).trace()
}

/// `tr(ρ [ℒ_i, ℒ_j])` for every SLD pair of the spatial model, in Fock space.
pub fn sld_commutator_expectations(p: &SpatialParams) -> Result<Vec<(SpatialParam, SpatialParam, C64)>> {
    let cutoff = tail_rule(p.diag_thermal())?;
    let basis = FockBasis::new(2, cutoff);
    let rho = spatial_density(p, cutoff);
    let mats = SpatialParam::ALL
        .iter()
        .map(|&q| Ok(sld_spatial(q, p)?.observable.fock_matrix_in(&basis)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let comm = &mats[i] * &mats[j] - &mats[j] * &mats[i];
            out.push((SpatialParam::ALL[i], SpatialParam::ALL[j], fock_expectation(&rho, &comm)));
        }
    }
    Ok(out)
}

/// A passive two-mode Gaussian state with both its moment and Fock forms.
#[derive(Debug, Clone)]
pub struct PassiveSample {
    pub x: DiagThermalParams,
    pub unitary: TwoModeUnitary,
    pub state: GaussianState,
    pub cutoff: FockCutoff,
    pub rho: CMatrix,
}

fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> TwoModeUnitary {
    let tau = std::f64::consts::TAU;
    let t: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let (a, b, g): (f64, f64, f64) = (rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau));
    let (s, c) = t.sin_cos();
    let u = Matrix2::new(
        C64::from_polar(c, a),
        C64::from_polar(s, b),
        C64::from_polar(-s, g - b),
        C64::from_polar(c, g - a),
    );
    TwoModeUnitary::new(u).expect("parameterized SU(2)·U(1) is unitary")
}

/// Random thermal occupations with `x1 + x2 ≤ total_max`, rotated by a random
/// passive unitary.
pub fn random_passive_state<R: Rng + ?Sized>(rng: &mut R, total_max: f64) -> Result<PassiveSample> {
    let s: f64 = rng.random_range(0.0..=total_max);
    let f: f64 = rng.random();
    let x = DiagThermalParams::new(s * f, s * (1.0 - f))?;
    let unitary = random_unitary(rng);
    let state = GaussianState::thermal_product(&[x.x1, x.x2])?.apply_mode_unitary(&unitary.to_dmatrix())?;
    let cutoff = tail_rule(x)?;
    let rho = fock_density(x, &unitary, cutoff);
    Ok(PassiveSample {
        x,
        unitary,
        state,
        cutoff,
        rho,
    })
}

/// A quadratic observable on two modes with coefficients uniform in the unit
/// square; not necessarily Hermitian.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R) -> QuadraticObservable {
    let mut draw = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let c0 = draw();
    let c = CMatrix::from_fn(4, 4, |_, _| draw());
    QuadraticObservable::new(2, c0, c).expect("4×4 coefficients on two modes")
}

/// `|⟨A⟩_Wick − tr(ρA)|` for one sample.
pub fn expectation_gap(sample: &PassiveSample, obs: &QuadraticObservable) -> Result<f64> {
    let wick = obs.expectation(&sample.state)?;
    let fock = fock_expectation(&sample.rho, &obs.fock_matrix(sample.cutoff));
    Ok((wick - fock).norm())
}
