//! Quantum and classical Fisher information for zero-mean Gaussian states.
//!
//! The moment tensor `𝔐 = Σ ⊗ Σ + ¼ Ω ⊗ Ω` is flattened row-major over ladder
//! index pairs, `(α, β) → 2n·α + β`, matching [`vec_row_major`]. With
//! `v_i = vec(∂_i Σ)` and `𝔐 y_i = v_i`,
//!
//! ```text
//! [I_Q]_ij = ½ Re(v_iᵀ y_j),    ℒ_i = Σ_{γκ} C_{γκ} (a^γ a^κ − Σ^{γκ}),  C = ½ unvec(y_i).
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SymplecticForm};
use crate::linalg::{analyze_psd, max_abs_real, unvec_row_major, vec_row_major, whitener, CMatrix, C64};
use crate::observable::QuadraticObservable;

/// Outcomes with probability below this are skipped in classical sums.
pub const P_FLOOR: f64 = 1e-30;

/// Relative eigenvalue threshold separating structural zeros from roundoff.
pub const RANK_TOL: f64 = 1e-12;

/// A mode whose symplectic eigenvalue is this close to ½ makes 𝔐 singular.
pub const PURITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherKind {
    Quantum,
    Classical,
}

/// A real symmetric positive-semidefinite information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    kind: FisherKind,
    m: DMatrix<f64>,
}

impl FisherMatrix {
    /// Validates symmetry and positive-semidefiniteness to `1e-10` (relative
    /// to the largest entry when that exceeds one), then symmetrizes.
    pub fn new(kind: FisherKind, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Domain(format!(
                "Fisher matrix must be square and nonempty, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("Fisher matrix has non-finite entries".into()));
        }
        let tol = 1e-10 * max_abs_real(&m).max(1.0);
        let asym = max_abs_real(&(&m - m.transpose()));
        if asym > tol {
            return Err(Error::Numerical(format!("Fisher matrix is not symmetric (residual {asym:e})")));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let out = Self { kind, m: sym };
        let lmin = out.min_eigenvalue();
        if lmin < -tol {
            return Err(Error::Numerical(format!("Fisher matrix is not PSD (eigenvalue {lmin:e})")));
        }
        Ok(out)
    }

    pub fn quantum(m: DMatrix<f64>) -> Result<Self> {
        Self::new(FisherKind::Quantum, m)
    }

    pub fn classical(m: DMatrix<f64>) -> Result<Self> {
        Self::new(FisherKind::Classical, m)
    }

    pub fn kind(&self) -> FisherKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m.clone().symmetric_eigen().eigenvalues.min()
    }

    /// Sum of two matrices of the same kind.
    pub fn add(&self, other: &FisherMatrix) -> Result<FisherMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            kind: self.kind,
            m: &self.m + &other.m,
        })
    }

    pub fn scale(&self, k: f64) -> FisherMatrix {
        Self {
            kind: self.kind,
            m: &self.m * k,
        }
    }

    /// `p·a + (1−p)·b`.
    pub fn mixture(a: &FisherMatrix, b: &FisherMatrix, p: f64) -> Result<FisherMatrix> {
        a.scale(p).add(&b.scale(1.0 - p))
    }

    /// `Jᵀ I J` for a reparameterization with Jacobian `J`.
    pub fn reparameterize(&self, jacobian: &DMatrix<f64>) -> Result<FisherMatrix> {
        Self::new(self.kind, jacobian.transpose() * &self.m * jacobian)
    }

    /// Inverse, or the null directions when singular.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let a = analyze_psd(&self.m, RANK_TOL);
        if !a.null_directions.is_empty() {
            return Err(Error::SingularFisher {
                null_directions: a.null_directions.iter().map(|v| v.iter().copied().collect()).collect(),
            });
        }
        Ok(a.pseudo_inverse)
    }
}

/// Parameter derivatives `∂Σ/∂θ_i`, one matrix per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDerivatives(pub Vec<CMatrix>);

impl ParamDerivatives {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `𝔐 = Σ ⊗ Σ + ¼ Ω ⊗ Ω` in the row-major pair flattening.
pub fn mfrak_matrix(state: &GaussianState) -> CMatrix {
    let s = state.sigma();
    let omega = SymplecticForm::new(state.n_modes());
    let om = omega.matrix();
    s.kronecker(s) + om.kronecker(om).map(|z| z * 0.25)
}

fn check_not_pure(state: &GaussianState) -> Result<()> {
    for (mode, nu) in state.symplectic_eigenvalues().into_iter().enumerate() {
        if nu - 0.5 <= PURITY_TOL {
            return Err(Error::SingularMoments { mode, eigenvalue: nu });
        }
    }
    Ok(())
}

fn solve_all(state: &GaussianState, derivs: &[CMatrix]) -> Result<Vec<DVector<C64>>> {
    check_not_pure(state)?;
    let dim = 2 * state.n_modes();
    let lu = mfrak_matrix(state).lu();
    derivs
        .iter()
        .map(|d| {
            if d.nrows() != dim || d.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: d.nrows(),
                });
            }
            lu.solve(&vec_row_major(d))
                .ok_or_else(|| Error::Numerical("moment tensor solve failed".into()))
        })
        .collect()
}

/// Gao–Lee quantum Fisher information.
pub fn qfi_gaussian(state: &GaussianState, derivs: &ParamDerivatives) -> Result<FisherMatrix> {
    let ys = solve_all(state, &derivs.0)?;
    let vs: Vec<DVector<C64>> = derivs.0.iter().map(vec_row_major).collect();
    let d = vs.len();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * vs[i].iter().zip(ys[j].iter()).map(|(a, b)| a * b).sum::<C64>().re);
    FisherMatrix::quantum(m)
}

/// Gao–Lee symmetric logarithmic derivative for one parameter.
pub fn sld_gaussian(state: &GaussianState, deriv: &CMatrix) -> Result<QuadraticObservable> {
    let y = solve_all(state, std::slice::from_ref(deriv))?.remove(0);
    let dim = 2 * state.n_modes();
    let c = unvec_row_major(&y, dim, dim).map(|z| z * 0.5);
    let s = state.sigma();
    let c0 = -c.iter().zip(s.iter()).map(|(a, b)| a * b).sum::<C64>();
    QuadraticObservable::new(state.n_modes(), c0, c)
}

/// `Σ_x ∇p ∇pᵀ / p`, skipping outcomes below [`P_FLOOR`].
///
/// `grads[x]` holds the gradient of `probs[x]` over all parameters.
pub fn classical_fisher(probs: &[f64], grads: &[Vec<f64>]) -> Result<FisherMatrix> {
    if probs.len() != grads.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: grads.len(),
        });
    }
    let d = grads
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Data("empty outcome table".into()))?;
    let mut m = DMatrix::zeros(d, d);
    for (x, (&p, g)) in probs.iter().zip(grads).enumerate() {
        if g.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.len() });
        }
        if p < -1e-12 || !p.is_finite() {
            return Err(Error::Data(format!("probability {p} at outcome {x} is negative")));
        }
        if p < P_FLOOR {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += g[i] * g[j] / p;
            }
        }
    }
    FisherMatrix::classical(m)
}

/// `tr(I_Q I_C⁻¹)`, or `+∞` when `I_C` is singular along a direction that
/// `I_Q` weights.
pub fn cost(iq: &FisherMatrix, ic: &FisherMatrix) -> f64 {
    if iq.dim() != ic.dim() {
        return f64::INFINITY;
    }
    if let Some(w) = whitener(iq.matrix(), RANK_TOL) {
        let white = &w * ic.matrix() * w.transpose();
        let white = (&white + white.transpose()) * 0.5;
        let ev = white.symmetric_eigen().eigenvalues;
        let lmax = ev.max().max(1.0);
        if ev.iter().any(|&l| !(l > RANK_TOL * lmax)) {
            return f64::INFINITY;
        }
        return ev.iter().map(|l| 1.0 / l).sum();
    }
    let a = analyze_psd(ic.matrix(), RANK_TOL);
    let q = iq.matrix();
    for v in &a.null_directions {
        let weight = (v.transpose() * q * v)[(0, 0)];
        let scale: f64 = (0..v.len()).map(|i| v[i] * v[i] * q[(i, i)]).sum();
        if scale > 0.0 && weight / scale > 1e-10 {
            return f64::INFINITY;
        }
    }
    (q * &a.pseudo_inverse).trace()
}

/// Cramér–Rao value `tr(G I⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrBound {
    pub value: f64,
    /// Set when the information matrix is singular along a weighted direction.
    pub null_direction: Option<Vec<f64>>,
}

/// `tr(g · iq⁻¹)`; `+∞` with the offending direction when `iq` is singular
/// where `g` has weight.
pub fn crb_bound(iq: &FisherMatrix, g: &DMatrix<f64>) -> Result<CrBound> {
    let d = iq.dim();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: g.nrows() });
    }
    let gmax = max_abs_real(g);
    if max_abs_real(&(g - g.transpose())) > 1e-12 * gmax.max(1e-300) {
        return Err(Error::Domain("weight matrix is not symmetric".into()));
    }
    if gmax > 0.0 {
        let lmin = (g / gmax).symmetric_eigen().eigenvalues.min();
        if lmin < -1e-12 {
            return Err(Error::Domain(format!("weight matrix is not PSD (scaled eigenvalue {lmin:e})")));
        }
    }
    let a = analyze_psd(iq.matrix(), RANK_TOL);
    let tr_g = g.trace();
    for v in &a.null_directions {
        let w = (v.transpose() * g * v)[(0, 0)];
        if w > 1e-12 * tr_g {
            return Ok(CrBound {
                value: f64::INFINITY,
                null_direction: Some(v.iter().copied().collect()),
            });
        }
    }
    Ok(CrBound {
        value: (g * &a.pseudo_inverse).trace(),
        null_direction: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d1() -> CMatrix {
        // ∂Σ/∂n for one thermal mode
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
    }

    #[test]
    fn thermal_mode_qfi() {
        for &n in &[0.01, 0.3, 1.0, 7.5] {
            let s = GaussianState::thermal(n).unwrap();
            let iq = qfi_gaussian(&s, &ParamDerivatives(vec![d1()])).unwrap();
            assert_relative_eq!(iq.get(0, 0), 1.0 / (n + n * n), max_relative = 1e-12);
        }
    }

    #[test]
    fn vacuum_is_singular() {
        let s = GaussianState::thermal(0.0).unwrap();
        match qfi_gaussian(&s, &ParamDerivatives(vec![d1()])) {
            Err(Error::SingularMoments { mode: 0, eigenvalue }) => assert!((eigenvalue - 0.5).abs() < 1e-12),
            other => panic!("expected singular moments, got {other:?}"),
        }
    }

    #[test]
    fn thermal_sld_coefficients() {
        let n = 0.4;
        let s = GaussianState::thermal(n).unwrap();
        let l = sld_gaussian(&s, &d1()).unwrap();
        let num = QuadraticObservable::number(1, 0);
        let expect = num.scale_real(1.0 / (n + n * n)) + QuadraticObservable::identity(1).scale_real(-n / (n + n * n));
        assert!((l.c0() - expect.c0()).norm() < 1e-12);
        assert!(crate::linalg::max_abs(&(l.coefficients() - expect.coefficients())) < 1e-12);
        assert!(l.hermiticity_residual() < 1e-14);
        assert!(l.expectation(&s).unwrap().norm() < 1e-14);
    }

    #[test]
    fn additivity_over_modes() {
        let s = GaussianState::thermal_product(&[0.2, 0.7]).unwrap();
        let mut da = CMatrix::zeros(4, 4);
        da[(0, 1)] = C64::new(1.0, 0.0);
        da[(1, 0)] = C64::new(1.0, 0.0);
        let mut db = CMatrix::zeros(4, 4);
        db[(2, 3)] = C64::new(1.0, 0.0);
        db[(3, 2)] = C64::new(1.0, 0.0);
        let sum = &da + &db;
        let iq = qfi_gaussian(&s, &ParamDerivatives(vec![sum])).unwrap();
        assert_relative_eq!(iq.get(0, 0), 1.0 / (0.2 * 1.2) + 1.0 / (0.7 * 1.7), max_relative = 1e-12);
    }

    #[test]
    fn bernoulli_fisher() {
        let th = 0.5;
        let ic = classical_fisher(&[th, 1.0 - th], &[vec![1.0], vec![-1.0]]).unwrap();
        assert_relative_eq!(ic.get(0, 0), 4.0, epsilon = 1e-14);
        assert!(classical_fisher(&[-1e-6, 1.0], &[vec![1.0], vec![-1.0]]).is_err());
        // zero-probability outcomes are skipped
        let ic = classical_fisher(&[0.0, 1.0], &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(ic.get(0, 0), 0.0);
    }

    #[test]
    fn cost_basics() {
        let iq = FisherMatrix::quantum(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        assert_relative_eq!(cost(&iq, &iq), 2.0, epsilon = 1e-12);
        let ic = FisherMatrix::classical(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(cost(&iq, &ic).is_infinite());
        // singular iq with ic blind only where iq is blind
        let iq0 = FisherMatrix::quantum(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_relative_eq!(cost(&iq0, &ic), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn crb_values() {
        let iq = FisherMatrix::quantum(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]))).unwrap();
        let b = crb_bound(&iq, &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(b.value, 0.75, epsilon = 1e-14);
        let rank1 = FisherMatrix::quantum(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])).unwrap();
        let b = crb_bound(&rank1, &DMatrix::identity(2, 2)).unwrap();
        assert!(b.value.is_infinite());
        let v = b.null_direction.unwrap();
        assert!((v[0] * 1.0 + v[1] * 2.0).abs() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(crb_bound(&iq, &bad).is_err());
    }

    #[test]
    fn rejects_non_psd() {
        assert!(FisherMatrix::classical(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(FisherMatrix::classical(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }
}
