//! Zero-mean bosonic Gaussian states in the ladder ordering `(a1, a1†, …, an, an†)`.
//!
//! The second-moment matrix is `Σ^{αβ} = ½⟨a^α a^β + a^β a^α⟩`. With this
//! ordering the canonical commutator is `[a^α, a^β] = Ω_{αβ}` where `Ω` is the
//! direct sum of `n` blocks `[[0, 1], [−1, 0]]`.

use nalgebra::{DVector, Matrix2};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, unitarity_residual, CMatrix, C64};
use crate::spatial::SpatialParams;

/// Symplectic eigenvalues may dip this far below ½ before a state is rejected.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// Tolerance on unitarity for mode transformations.
pub const UNITARITY_TOL: f64 = 1e-10;

/// `Ω = ⊕ iσ_y` in the ladder ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    omega: CMatrix,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        let mut omega = CMatrix::zeros(dim, dim);
        for k in 0..n_modes {
            omega[(2 * k, 2 * k + 1)] = C64::new(1.0, 0.0);
            omega[(2 * k + 1, 2 * k)] = C64::new(-1.0, 0.0);
        }
        Self { n_modes, omega }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.omega
    }
}

/// A 2×2 unitary acting on the mode space of two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeUnitary(Matrix2<C64>);

impl TwoModeUnitary {
    pub fn new(u: Matrix2<C64>) -> Result<Self> {
        let residual = unitarity_residual(&to_dynamic(&u));
        if residual > UNITARITY_TOL {
            return Err(Error::Domain(format!(
                "two-mode matrix is not unitary (residual {residual:e})"
            )));
        }
        Ok(Self(u))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn to_dmatrix(&self) -> CMatrix {
        to_dynamic(&self.0)
    }

    /// `self · other`.
    pub fn compose(&self, other: &TwoModeUnitary) -> TwoModeUnitary {
        TwoModeUnitary(self.0 * other.0)
    }
}

fn to_dynamic(u: &Matrix2<C64>) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| u[(i, j)])
}

/// A zero-mean Gaussian state of `n_modes` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    sigma: CMatrix,
    mu: DVector<C64>,
}

impl GaussianState {
    /// Validates shape, exchange symmetry, zero first moments and physicality.
    pub fn new(sigma: CMatrix, mu: DVector<C64>) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || dim % 2 != 0 || sigma.ncols() != dim {
            return Err(Error::Domain(format!(
                "covariance must be 2n×2n with n ≥ 1, got {}×{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mu.len(),
            });
        }
        if mu.iter().any(|z| *z != C64::new(0.0, 0.0)) {
            return Err(Error::Domain(
                "only zero-mean states are supported (first moments must vanish)".into(),
            ));
        }
        let asym = max_abs(&(&sigma - sigma.transpose()));
        if asym > 1e-12 * max_abs(&sigma).max(1.0) {
            return Err(Error::Domain(format!(
                "covariance is not exchange-symmetric (residual {asym:e})"
            )));
        }
        let state = Self {
            n_modes: dim / 2,
            sigma,
            mu,
        };
        let nus = state.symplectic_eigenvalues();
        if let Some((mode, &nu)) = nus
            .iter()
            .enumerate()
            .find(|(_, &nu)| !(nu >= 0.5 - PHYSICALITY_TOL))
        {
            return Err(Error::Domain(format!(
                "unphysical covariance: symplectic eigenvalue {nu} (index {mode}) is below 1/2"
            )));
        }
        Ok(state)
    }

    pub fn from_sigma(sigma: CMatrix) -> Result<Self> {
        let dim = sigma.nrows();
        Self::new(sigma, DVector::zeros(dim))
    }

    /// Single thermal mode: `Σ = (n̄ + ½) σ_x`.
    pub fn thermal(n_mean: f64) -> Result<Self> {
        if !(n_mean >= 0.0) || !n_mean.is_finite() {
            return Err(Error::Domain(format!(
                "mean photon number must be finite and non-negative, got {n_mean}"
            )));
        }
        let s = C64::new(n_mean + 0.5, 0.0);
        let sigma = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), s, s, C64::new(0.0, 0.0)]);
        Self::from_sigma(sigma)
    }

    /// Independent thermal modes with the given occupations.
    pub fn thermal_product(n_means: &[f64]) -> Result<Self> {
        let parts = n_means
            .iter()
            .map(|&n| Self::thermal(n))
            .collect::<Result<Vec<_>>>()?;
        Self::direct_sum(&parts)
    }

    /// Two spatial modes with equal occupation `⟨n⟩` and coherence `|γ|e^{iφ}`.
    ///
    /// `b = ⟨a2† a1⟩ = ⟨n⟩|γ|e^{−iφ}` sits at `(a1, a2†)` and `(a2†, a1)`;
    /// its conjugate at `(a1†, a2)` and `(a2, a1†)`.
    pub fn two_spatial(params: &SpatialParams) -> Result<Self> {
        let n = params.n_mean();
        let c = C64::new(n + 0.5, 0.0);
        let b = C64::from_polar(n * params.gamma_abs(), -params.phi());
        let z = C64::new(0.0, 0.0);
        #[rustfmt::skip]
        let sigma = CMatrix::from_row_slice(4, 4, &[
            z,         c,         z,         b,
            c,         z,         b.conj(),  z,
            z,         b.conj(),  z,         c,
            b,         z,         c,         z,
        ]);
        Self::from_sigma(sigma)
    }

    pub fn direct_sum(parts: &[GaussianState]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Domain("direct sum of zero states".into()));
        }
        let dim: usize = parts.iter().map(|p| 2 * p.n_modes).sum();
        let mut sigma = CMatrix::zeros(dim, dim);
        let mut offset = 0;
        for p in parts {
            let d = 2 * p.n_modes;
            sigma.view_mut((offset, offset), (d, d)).copy_from(&p.sigma);
            offset += d;
        }
        Self::from_sigma(sigma)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn sigma(&self) -> &CMatrix {
        &self.sigma
    }

    pub fn mu(&self) -> &DVector<C64> {
        &self.mu
    }

    pub fn symplectic_form(&self) -> SymplecticForm {
        SymplecticForm::new(self.n_modes)
    }

    /// `⟨a_i† a_i⟩ = Σ^{a_i†, a_i} − ½` for each mode.
    pub fn mean_photon_numbers(&self) -> Vec<f64> {
        (0..self.n_modes)
            .map(|k| self.sigma[(2 * k + 1, 2 * k)].re - 0.5)
            .collect()
    }

    /// Transforms the ladder vector by `a_out,i = Σ_j u_ij a_in,j`.
    ///
    /// The induced interleaved matrix `W` has `W[2i,2j] = u_ij` and
    /// `W[2i+1,2j+1] = u*_ij`; the covariance becomes `W Σ Wᵀ`.
    pub fn apply_mode_unitary(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.n_modes || u.ncols() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: u.nrows(),
            });
        }
        let residual = unitarity_residual(u);
        if residual > UNITARITY_TOL {
            return Err(Error::Domain(format!(
                "mode transformation is not unitary (residual {residual:e})"
            )));
        }
        let w = ladder_transform(u);
        let mut sigma = &w * &self.sigma * w.transpose();
        // restore exact exchange symmetry lost to rounding
        sigma = (&sigma + sigma.transpose()).scale(0.5);
        Self::from_sigma(sigma)
    }

    /// Symplectic eigenvalues: the `n` positive eigenvalue magnitudes of `iΩΣ`,
    /// sorted ascending. A physical state has all of them ≥ ½.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let omega = SymplecticForm::new(self.n_modes);
        let m = omega.matrix() * &self.sigma;
        let mut mags: Vec<f64> = match m.clone().schur().eigenvalues() {
            Some(ev) => ev.iter().map(|z| z.norm()).collect(),
            None => return vec![f64::NAN; self.n_modes],
        };
        mags.sort_by(|a, b| a.total_cmp(b));
        mags.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }
}

/// Interleaved `2n×2n` ladder-space matrix induced by an `n×n` mode matrix.
pub fn ladder_transform(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let mut w = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            w[(2 * i, 2 * j)] = u[(i, j)];
            w[(2 * i + 1, 2 * j + 1)] = u[(i, j)].conj();
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_and_thermal() {
        let vac = GaussianState::thermal(0.0).unwrap();
        assert_eq!(vac.sigma()[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(vac.sigma()[(0, 0)], C64::new(0.0, 0.0));
        assert_relative_eq!(vac.symplectic_eigenvalues()[0], 0.5, epsilon = 1e-15);

        let one = GaussianState::thermal(1.0).unwrap();
        assert_eq!(one.sigma()[(1, 0)].re, 1.5);
        assert_relative_eq!(one.symplectic_eigenvalues()[0], 1.5, epsilon = 1e-14);
    }

    #[test]
    fn thermal_symplectic_eigenvalue_matches_eigensolver() {
        // Independent route: eigenvalues of the real 2×2 matrix ΩΣ via its
        // characteristic polynomial λ² − tr λ + det = 0.
        let s = GaussianState::thermal(0.25).unwrap();
        let m = SymplecticForm::new(1).matrix() * s.sigma();
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let root = (0.25 * tr * tr - det).sqrt();
        let lam = (0.5 * tr + root).abs().max((0.5 * tr - root).abs());
        assert_relative_eq!(lam, 0.75, epsilon = 1e-15);
        assert_relative_eq!(s.symplectic_eigenvalues()[0], lam, epsilon = 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GaussianState::thermal(-0.1).is_err());
        assert!(GaussianState::thermal(f64::NAN).is_err());
        assert!(GaussianState::thermal(f64::INFINITY).is_err());
        let mut mu = DVector::zeros(2);
        mu[0] = C64::new(0.1, 0.0);
        let sigma = GaussianState::thermal(0.1).unwrap().sigma().clone();
        assert!(GaussianState::new(sigma, mu).is_err());
        // below the vacuum bound
        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(0.3, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(GaussianState::from_sigma(bad).is_err());
    }

    #[test]
    fn symplectic_form_properties() {
        let om = SymplecticForm::new(3);
        let m = om.matrix();
        let id = CMatrix::identity(6, 6);
        assert_eq!(m * m, -id);
        assert_eq!(m.transpose(), -m.clone());
    }

    #[test]
    fn uncorrelated_and_vacuum_limits() {
        let p = SpatialParams::new(0.2, 0.0, 1.0).unwrap();
        let s = GaussianState::two_spatial(&p).unwrap();
        let expect = GaussianState::thermal_product(&[0.2, 0.2]).unwrap();
        assert_eq!(s.sigma(), expect.sigma());

        let p = SpatialParams::new(0.0, 0.7, 2.0).unwrap();
        let s = GaussianState::two_spatial(&p).unwrap();
        let vac = GaussianState::thermal_product(&[0.0, 0.0]).unwrap();
        assert_eq!(s.sigma(), vac.sigma());
    }

    #[test]
    fn spatial_state_from_beam_splitter() {
        let p = SpatialParams::new(0.01, 0.5, PI / 3.0).unwrap();
        let x = p.diag_thermal();
        assert_relative_eq!(x.x1, 0.005, epsilon = 1e-15);
        assert_relative_eq!(x.x2, 0.015, epsilon = 1e-15);
        let diag = GaussianState::thermal_product(&[x.x1, x.x2]).unwrap();
        let u = crate::counting::u_phase_bs(p.phi()).to_dmatrix();
        let rotated = diag.apply_mode_unitary(&u).unwrap();
        let direct = GaussianState::two_spatial(&p).unwrap();
        assert!(max_abs(&(rotated.sigma() - direct.sigma())) < 1e-12);

        let nus = GaussianState::two_spatial(&SpatialParams::new(0.01, 0.5, 0.0).unwrap())
            .unwrap()
            .symplectic_eigenvalues();
        assert_relative_eq!(nus[0], 0.505, epsilon = 1e-12);
        assert_relative_eq!(nus[1], 0.515, epsilon = 1e-12);
    }

    #[test]
    fn identity_unitary_and_photon_number() {
        let p = SpatialParams::new(0.3, 0.4, 0.9).unwrap();
        let s = GaussianState::two_spatial(&p).unwrap();
        let same = s.apply_mode_unitary(&CMatrix::identity(2, 2)).unwrap();
        assert!(max_abs(&(same.sigma() - s.sigma())) < 1e-15);

        let u = crate::counting::u_phase_bs(0.7).to_dmatrix();
        let t = s.apply_mode_unitary(&u).unwrap();
        let before: f64 = s.mean_photon_numbers().iter().sum();
        let after: f64 = t.mean_photon_numbers().iter().sum();
        assert_relative_eq!(before, after, epsilon = 1e-14);
    }

    #[test]
    fn non_unitary_rejected() {
        let s = GaussianState::thermal_product(&[0.1, 0.2]).unwrap();
        let u = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(s.apply_mode_unitary(&u), Err(Error::Domain(_))));
        let u3 = CMatrix::identity(3, 3);
        assert!(s.apply_mode_unitary(&u3).is_err());
    }

    #[test]
    fn phi_periodicity_is_exact_enough() {
        let a = GaussianState::two_spatial(&SpatialParams::new(0.1, 0.3, 0.4).unwrap()).unwrap();
        let b = GaussianState::two_spatial(&SpatialParams::new(0.1, 0.3, 0.4 + 2.0 * PI).unwrap())
            .unwrap();
        assert!(max_abs(&(a.sigma() - b.sigma())) < 1e-15);
    }
}
