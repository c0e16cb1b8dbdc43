//! Observables `c0·1 + Σ_{αβ} c_{αβ} a^α a^β` over the ladder ordering.
//!
//! The coefficient matrix is stored in canonical symmetric form. Any
//! antisymmetric part of an ordered product reduces to a scalar through
//! `[a^α, a^β] = Ω_{αβ}` and is folded into `c0`, so two observables are equal
//! exactly when their `(c0, c)` pairs are equal.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::fock::{apply_ladder, FockBasis, FockCutoff};
use crate::gaussian::{GaussianState, SymplecticForm};
use crate::linalg::{max_abs, CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable {
    n_modes: usize,
    c0: C64,
    c: CMatrix,
}

impl QuadraticObservable {
    /// Builds from an ordered-product coefficient matrix (any symmetry).
    pub fn new(n_modes: usize, c0: C64, c: CMatrix) -> Result<Self> {
        let dim = 2 * n_modes;
        if c.nrows() != dim || c.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.nrows(),
            });
        }
        let omega = SymplecticForm::new(n_modes);
        let mut shift = C64::new(0.0, 0.0);
        for a in 0..dim {
            for b in 0..dim {
                shift += c[(a, b)] * omega.matrix()[(a, b)];
            }
        }
        let sym = (&c + c.transpose()).scale(0.5);
        Ok(Self {
            n_modes,
            c0: c0 + shift * 0.5,
            c: sym,
        })
    }

    pub fn zero(n_modes: usize) -> Self {
        Self {
            n_modes,
            c0: C64::new(0.0, 0.0),
            c: CMatrix::zeros(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::scalar(n_modes, C64::new(1.0, 0.0))
    }

    pub fn scalar(n_modes: usize, value: C64) -> Self {
        let mut s = Self::zero(n_modes);
        s.c0 = value;
        s
    }

    /// `a_i† a_j`.
    pub fn hop(n_modes: usize, i: usize, j: usize) -> Self {
        let mut c = CMatrix::zeros(2 * n_modes, 2 * n_modes);
        c[(2 * i + 1, 2 * j)] = C64::new(1.0, 0.0);
        Self::new(n_modes, C64::new(0.0, 0.0), c).expect("shape is consistent")
    }

    /// `n̂_i = a_i† a_i`.
    pub fn number(n_modes: usize, mode: usize) -> Self {
        Self::hop(n_modes, mode, mode)
    }

    pub fn total_number(n_modes: usize) -> Self {
        (0..n_modes).fold(Self::zero(n_modes), |acc, k| acc + Self::number(n_modes, k))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    /// Symmetric coefficient matrix.
    pub fn coefficients(&self) -> &CMatrix {
        &self.c
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            n_modes: self.n_modes,
            c0: self.c0 * k,
            c: self.c.scale(1.0).map(|z| z * k),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: other.n_modes,
            });
        }
        Ok(())
    }

    /// `[self, other]`, closed form from the canonical commutation relations.
    ///
    /// For symmetric `A`, `B`: `[aᵀAa, aᵀBa] = aᵀ C a` with
    /// `C = 2(AΩB − BΩA)`; scalars commute with everything.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let omega = SymplecticForm::new(self.n_modes);
        let om = omega.matrix();
        let c = (&self.c * om * &other.c - &other.c * om * &self.c).scale(2.0);
        Ok(Self {
            n_modes: self.n_modes,
            c0: C64::new(0.0, 0.0),
            c,
        })
    }

    /// `⟨obs⟩` on a zero-mean Gaussian state: `c0 + Σ c_{αβ} Σ^{αβ}`.
    pub fn expectation(&self, state: &GaussianState) -> Result<C64> {
        if state.n_modes() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: state.n_modes(),
            });
        }
        let sigma = state.sigma();
        let mut acc = self.c0;
        for a in 0..2 * self.n_modes {
            for b in 0..2 * self.n_modes {
                acc += self.c[(a, b)] * sigma[(a, b)];
            }
        }
        Ok(acc)
    }

    /// `⟨obs²⟩ − ⟨obs⟩²` by Wick's theorem:
    /// `2 Σ c_{γκ} c_{αβ}(Σ^{γα}Σ^{κβ} + ¼Ω^{γα}Ω^{κβ})` for symmetric `c`.
    pub fn variance(&self, state: &GaussianState) -> Result<C64> {
        self.covariance(self, state)
    }

    /// Symmetrized covariance `½⟨{A, B}⟩ − ⟨A⟩⟨B⟩`.
    pub fn covariance(&self, other: &Self, state: &GaussianState) -> Result<C64> {
        self.check_modes(other)?;
        if state.n_modes() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: state.n_modes(),
            });
        }
        let s = state.sigma();
        let om = SymplecticForm::new(self.n_modes);
        let om = om.matrix();
        // tr(Aᵀ Σ B Σᵀ) style contraction written as matrix products
        let t1 = (self.c.transpose() * s * &other.c * s.transpose()).trace();
        let t2 = (self.c.transpose() * om * &other.c * om.transpose()).trace();
        Ok((t1 + t2 * 0.25) * 2.0)
    }

    /// True when every coefficient pairs one annihilator with one creator.
    pub fn is_number_conserving(&self) -> bool {
        let dim = 2 * self.n_modes;
        (0..dim).all(|a| (0..dim).all(|b| (a + b) % 2 == 1 || self.c[(a, b)] == C64::new(0.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        let dim = 2 * self.n_modes;
        let bar = |k: usize| k ^ 1;
        let c = CMatrix::from_fn(dim, dim, |a, b| self.c[(bar(b), bar(a))].conj());
        Self {
            n_modes: self.n_modes,
            c0: self.c0.conj(),
            c,
        }
    }

    /// Largest coefficient deviation from the adjoint.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.adjoint();
        max_abs(&(&self.c - &adj.c)).max((self.c0 - adj.c0).norm())
    }

    /// Largest coefficient modulus (scalar included).
    pub fn max_coefficient(&self) -> f64 {
        max_abs(&self.c).max(self.c0.norm())
    }

    /// Dense matrix on the truncated basis. Products are applied exactly and
    /// only the final ket is truncated, so number-conserving observables are
    /// represented without error.
    pub fn fock_matrix(&self, cutoff: FockCutoff) -> CMatrix {
        self.fock_matrix_in(&FockBasis::new(self.n_modes, cutoff))
    }

    pub fn fock_matrix_in(&self, basis: &FockBasis) -> CMatrix {
        assert_eq!(basis.n_modes(), self.n_modes);
        let dim = 2 * self.n_modes;
        let mut m = CMatrix::identity(basis.dim(), basis.dim()).map(|z| z * self.c0);
        for (col, occ) in basis.states().iter().enumerate() {
            for a in 0..dim {
                for b in 0..dim {
                    let w = self.c[(a, b)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let Some((amp1, mid)) = apply_ladder(b, occ) else { continue };
                    let Some((amp2, out)) = apply_ladder(a, &mid) else { continue };
                    if let Some(row) = basis.index_of(&out) {
                        m[(row, col)] += w * (amp1 * amp2);
                    }
                }
            }
        }
        m
    }

    /// Least-squares factor `k` with `self ≈ k·basis` over all coefficients,
    /// and the largest residual coefficient of `self − k·basis`.
    pub fn proportionality(&self, basis: &QuadraticObservable) -> Result<(C64, f64)> {
        self.check_modes(basis)?;
        let dot = |a: &QuadraticObservable, b: &QuadraticObservable| {
            a.c0.conj() * b.c0 + a.c.iter().zip(b.c.iter()).map(|(x, y)| x.conj() * y).sum::<C64>()
        };
        let norm = dot(basis, basis).re;
        if norm == 0.0 {
            return Err(Error::Domain("proportionality to the zero observable".into()));
        }
        let k = dot(basis, self) / norm;
        let resid = self.clone() - basis.scale(k);
        Ok((k, resid.max_coefficient()))
    }

    pub fn linear_combination(terms: &[(f64, &QuadraticObservable)]) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, o)| o.n_modes)
            .ok_or_else(|| Error::Domain("empty linear combination".into()))?;
        let mut acc = Self::zero(n);
        for (k, o) in terms {
            if o.n_modes != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: o.n_modes,
                });
            }
            acc = acc + o.scale_real(*k);
        }
        Ok(acc)
    }
}

impl Add for QuadraticObservable {
    type Output = QuadraticObservable;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.n_modes, rhs.n_modes);
        Self {
            n_modes: self.n_modes,
            c0: self.c0 + rhs.c0,
            c: self.c + rhs.c,
        }
    }
}

impl Sub for QuadraticObservable {
    type Output = QuadraticObservable;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.n_modes, rhs.n_modes);
        Self {
            n_modes: self.n_modes,
            c0: self.c0 - rhs.c0,
            c: self.c - rhs.c,
        }
    }
}

impl Mul<f64> for QuadraticObservable {
    type Output = QuadraticObservable;
    fn mul(self, k: f64) -> Self {
        self.scale_real(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::commutator;
    use crate::spatial::SpatialParams;
    use approx::assert_relative_eq;

    #[test]
    fn disjoint_number_operators_commute() {
        let n1 = QuadraticObservable::number(2, 0);
        let n2 = QuadraticObservable::number(2, 1);
        let comm = n1.commutator(&n2).unwrap();
        assert!(comm.max_coefficient() < 1e-15);
    }

    #[test]
    fn squeeze_pair_commutator() {
        // [a², a†²] = 4 a†a + 2
        let mut ca = CMatrix::zeros(2, 2);
        ca[(0, 0)] = C64::new(1.0, 0.0);
        let mut cb = CMatrix::zeros(2, 2);
        cb[(1, 1)] = C64::new(1.0, 0.0);
        let a2 = QuadraticObservable::new(1, C64::new(0.0, 0.0), ca).unwrap();
        let ad2 = QuadraticObservable::new(1, C64::new(0.0, 0.0), cb).unwrap();
        let comm = a2.commutator(&ad2).unwrap();
        let expect = QuadraticObservable::number(1, 0).scale_real(4.0)
            + QuadraticObservable::scalar(1, C64::new(2.0, 0.0));
        assert!((comm.c0 - expect.c0).norm() < 1e-14);
        assert!(max_abs(&(comm.c - expect.c)) < 1e-14);
    }

    #[test]
    fn fock_matrices() {
        let ntot = QuadraticObservable::total_number(2).fock_matrix(FockCutoff::new(1));
        for (i, want) in [0.0, 1.0, 1.0].into_iter().enumerate() {
            assert!((ntot[(i, i)].re - want).abs() < 1e-15);
        }
        assert!(max_abs(&(&ntot - CMatrix::from_diagonal(&ntot.diagonal()))) < 1e-15);

        let hop = QuadraticObservable::hop(2, 0, 1).fock_matrix(FockCutoff::new(1));
        // a1† a2 |0,1⟩ = |1,0⟩: row 2 (|1,0⟩), column 1 (|0,1⟩)
        let mut expect = CMatrix::zeros(3, 3);
        expect[(2, 1)] = C64::new(1.0, 0.0);
        assert!(max_abs(&(hop - expect)) < 1e-15);
    }

    #[test]
    fn commutator_matches_fock_commutator() {
        let basis = FockBasis::new(2, FockCutoff::new(5));
        let a = QuadraticObservable::hop(2, 0, 1).scale(C64::new(0.3, -0.7))
            + QuadraticObservable::number(2, 1).scale_real(1.3);
        let b = QuadraticObservable::hop(2, 1, 0).scale(C64::new(-0.2, 0.5))
            + QuadraticObservable::number(2, 0).scale_real(0.4);
        let algebraic = a.commutator(&b).unwrap().fock_matrix_in(&basis);
        let direct = commutator(&a.fock_matrix_in(&basis), &b.fock_matrix_in(&basis));
        assert!(max_abs(&(algebraic - direct)) < 1e-12);
    }

    #[test]
    fn expectations() {
        let th = GaussianState::thermal(0.3).unwrap();
        let n = QuadraticObservable::number(1, 0);
        assert_relative_eq!(n.expectation(&th).unwrap().re, 0.3, epsilon = 1e-15);
        let one = QuadraticObservable::identity(1);
        assert_eq!(one.expectation(&th).unwrap(), C64::new(1.0, 0.0));
        // thermal number variance n(n+1)
        assert_relative_eq!(n.variance(&th).unwrap().re, 0.3 * 1.3, epsilon = 1e-14);

        let p = SpatialParams::new(0.01, 0.5, std::f64::consts::PI / 3.0).unwrap();
        let s = GaussianState::two_spatial(&p).unwrap();
        let val = QuadraticObservable::hop(2, 1, 0).expectation(&s).unwrap();
        let want = C64::from_polar(0.005, -std::f64::consts::PI / 3.0);
        assert!((val - want).norm() < 1e-15);
    }

    #[test]
    fn hermiticity_and_sectors() {
        let n = QuadraticObservable::total_number(2);
        assert!(n.hermiticity_residual() < 1e-15);
        assert!(n.is_number_conserving());
        let h = QuadraticObservable::hop(2, 0, 1);
        assert!(h.hermiticity_residual() > 0.1);
        let herm = h.clone() + h.adjoint();
        assert!(herm.hermiticity_residual() < 1e-15);
        let mut c = CMatrix::zeros(2, 2);
        c[(0, 0)] = C64::new(1.0, 0.0);
        assert!(!QuadraticObservable::new(1, C64::new(0.0, 0.0), c).unwrap().is_number_conserving());
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let a = QuadraticObservable::number(1, 0);
        let b = QuadraticObservable::number(2, 0);
        assert!(a.commutator(&b).is_err());
    }
}
