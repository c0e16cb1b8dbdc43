//! Two spatial modes with equal occupation `⟨n⟩` and mutual coherence
//! `γ12 = |γ| e^{iφ}`: SLDs, estimator observables `X = I_Q⁻¹ ℒ`, the `X2`
//! and `X3` count measurements and the weighted scheme mixing them.
//!
//! Parameters are always ordered `(⟨n⟩, |γ|, φ)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::counting::{count_fisher, tail_rule, CountScheme, DiagThermalParams};
use crate::error::{Error, Result};
use crate::fisher::{cost, qfi_gaussian, sld_gaussian, FisherMatrix, ParamDerivatives};
use crate::gaussian::GaussianState;
use crate::linalg::{max_abs_real, CMatrix, C64, I};
use crate::observable::QuadraticObservable;
use crate::optimize::golden_section;

/// Spatial parameters; `φ` is reduced to `[0, 2π)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialParams {
    n_mean: f64,
    gamma_abs: f64,
    phi: f64,
}

impl SpatialParams {
    pub fn new(n_mean: f64, gamma_abs: f64, phi: f64) -> Result<Self> {
        if !(n_mean >= 0.0) || !n_mean.is_finite() {
            return Err(Error::Domain(format!("⟨n⟩ must be finite and non-negative, got {n_mean}")));
        }
        if !(0.0..=1.0).contains(&gamma_abs) {
            return Err(Error::Domain(format!("|γ| must lie in [0, 1], got {gamma_abs}")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain(format!("φ must be finite, got {phi}")));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { n_mean, gamma_abs, phi })
    }

    pub fn n_mean(&self) -> f64 {
        self.n_mean
    }

    pub fn gamma_abs(&self) -> f64 {
        self.gamma_abs
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> [f64; 3] {
        [self.n_mean, self.gamma_abs, self.phi]
    }

    /// `x1 = ⟨n⟩(1−|γ|)`, `x2 = ⟨n⟩(1+|γ|)`.
    pub fn diag_thermal(&self) -> DiagThermalParams {
        DiagThermalParams {
            x1: self.n_mean * (1.0 - self.gamma_abs),
            x2: self.n_mean * (1.0 + self.gamma_abs),
        }
    }

    pub fn state(&self) -> Result<GaussianState> {
        GaussianState::two_spatial(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialParam {
    NMean,
    GammaAbs,
    Phi,
}

impl SpatialParam {
    pub const ALL: [SpatialParam; 3] = [SpatialParam::NMean, SpatialParam::GammaAbs, SpatialParam::Phi];

    pub fn index(self) -> usize {
        self as usize
    }
}

fn placed(c: C64, b: C64) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        z,        c,        z,        b,
        c,        z,        b.conj(), z,
        z,        b.conj(), z,        c,
        b,        z,        c,        z,
    ]);
    m
}

/// Analytic `∂Σ/∂⟨n⟩`, `∂Σ/∂|γ|`, `∂Σ/∂φ`.
pub fn covariance_derivatives(p: &SpatialParams) -> ParamDerivatives {
    let e = C64::from_polar(1.0, -p.phi);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    ParamDerivatives(vec![
        placed(one, e * p.gamma_abs),
        placed(zero, e * p.n_mean),
        placed(zero, -I * e * (p.n_mean * p.gamma_abs)),
    ])
}

/// Coefficients of `P n̂_tot + Q a1†a2 + Q* a2†a1 + R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pqr {
    pub p: f64,
    pub q: C64,
    pub r: f64,
}

impl Pqr {
    pub fn observable(&self) -> QuadraticObservable {
        QuadraticObservable::total_number(2).scale_real(self.p)
            + QuadraticObservable::hop(2, 0, 1).scale(self.q)
            + QuadraticObservable::hop(2, 1, 0).scale(self.q.conj())
            + QuadraticObservable::identity(2).scale_real(self.r)
    }

    /// Reads `(P, Q, R)` off a two-mode observable, with the largest
    /// coefficient the form cannot represent.
    pub fn extract(obs: &QuadraticObservable) -> (Pqr, f64) {
        let c = obs.coefficients();
        let pqr = Pqr {
            p: 2.0 * c[(0, 1)].re,
            q: c[(1, 2)] * 2.0,
            r: (obs.c0() + c[(0, 1)] + c[(2, 3)]).re,
        };
        let resid = (obs.clone() - pqr.observable()).max_coefficient();
        (pqr, resid)
    }

    fn max_deviation(&self, other: &Pqr) -> f64 {
        (self.p - other.p).abs().max((self.q - other.q).norm()).max((self.r - other.r).abs())
    }

    fn magnitude(&self) -> f64 {
        self.p.abs().max(self.q.norm()).max(self.r.abs())
    }
}

/// The two readings of the printed `(⟨n⟩ ∓ 1)²` denominator factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorReading {
    /// `(⟨n⟩ − 1)²` as printed.
    Minus,
    /// `(⟨n⟩ + 1)²`.
    Plus,
}

/// Closed-form coefficients as printed in the appendix tables, with the
/// undefined `A` in `R_|γ|` read as `|γ|`.
pub fn printed_pqr(param: SpatialParam, p: &SpatialParams, reading: DenominatorReading) -> Result<Pqr> {
    let (n, g) = (p.n_mean, p.gamma_abs);
    let e = C64::from_polar(1.0, -p.phi);
    let shift = match reading {
        DenominatorReading::Minus => n - 1.0,
        DenominatorReading::Plus => n + 1.0,
    };
    let big = n * n * g * g - shift * shift;
    match param {
        SpatialParam::NMean => {
            let den = n * big;
            if den == 0.0 {
                return Err(Error::Domain("printed ⟨n⟩ coefficients: ⟨n⟩[⟨n⟩²|γ|² − (⟨n⟩∓1)²] vanishes".into()));
            }
            Ok(Pqr {
                p: (n + 1.0) / den,
                q: e * (g / den),
                r: 2.0 * n * (g * g * n - n - 1.0) / den,
            })
        }
        SpatialParam::GammaAbs => {
            let den = (g * g - 1.0) * big;
            if den == 0.0 {
                return Err(Error::Domain("printed |γ| coefficients: (|γ|² − 1)[⟨n⟩²|γ|² − (⟨n⟩∓1)²] vanishes".into()));
            }
            Ok(Pqr {
                p: (2.0 * n + 1.0) / den,
                q: e * ((1.0 + n + g * g * n * n) / den),
                r: 2.0 * g * (n * n * (g * g - 1.0)) / den,
            })
        }
        SpatialParam::Phi => Ok(Pqr {
            p: 0.0,
            q: I * e * g,
            r: 0.0,
        }),
    }
}

/// Printed coefficients that disagree with the computed SLD.
#[derive(Debug, Clone, PartialEq)]
pub struct PqrDiscrepancy {
    pub param: SpatialParam,
    pub computed: Pqr,
    pub printed_minus: Option<Pqr>,
    pub printed_plus: Option<Pqr>,
    /// Largest coefficient deviation relative to the computed magnitude.
    pub deviation_minus: f64,
    pub deviation_plus: f64,
}

#[derive(Debug, Clone)]
pub struct SpatialSld {
    pub param: SpatialParam,
    pub observable: QuadraticObservable,
    pub pqr: Pqr,
    pub discrepancy: Option<PqrDiscrepancy>,
}

/// Agreement threshold between printed and computed coefficients.
pub const PQR_TOL: f64 = 1e-8;

/// SLD of one spatial parameter from the Gao–Lee formula, compared with the
/// printed closed forms.
pub fn sld_spatial(param: SpatialParam, p: &SpatialParams) -> Result<SpatialSld> {
    if matches!(param, SpatialParam::NMean | SpatialParam::GammaAbs) && p.gamma_abs >= 1.0 {
        return Err(Error::Domain("SLD pole: |γ|² − 1 = 0".into()));
    }
    if p.n_mean <= 0.0 {
        return Err(Error::Domain("SLD pole: ⟨n⟩ = 0".into()));
    }
    let state = p.state()?;
    let derivs = covariance_derivatives(p);
    let observable = sld_gaussian(&state, &derivs.0[param.index()])?;
    let (pqr, resid) = Pqr::extract(&observable);
    if resid > 1e-10 * pqr.magnitude().max(1.0) {
        return Err(Error::Numerical(format!(
            "SLD for {param:?} leaves the P n̂_tot + Q a1†a2 + h.c. + R form (residual {resid:e})"
        )));
    }
    let scale = pqr.magnitude().max(1e-300);
    let minus = printed_pqr(param, p, DenominatorReading::Minus).ok();
    let plus = printed_pqr(param, p, DenominatorReading::Plus).ok();
    let dev = |x: &Option<Pqr>| x.map_or(f64::INFINITY, |x| x.max_deviation(&pqr) / scale);
    let (deviation_minus, deviation_plus) = (dev(&minus), dev(&plus));
    let discrepancy = (deviation_minus.min(deviation_plus) > PQR_TOL).then_some(PqrDiscrepancy {
        param,
        computed: pqr,
        printed_minus: minus,
        printed_plus: plus,
        deviation_minus,
        deviation_plus,
    });
    Ok(SpatialSld {
        param,
        observable,
        pqr,
        discrepancy,
    })
}

pub fn spatial_slds(p: &SpatialParams) -> Result<[SpatialSld; 3]> {
    Ok([
        sld_spatial(SpatialParam::NMean, p)?,
        sld_spatial(SpatialParam::GammaAbs, p)?,
        sld_spatial(SpatialParam::Phi, p)?,
    ])
}

/// Quantum Fisher information over `(⟨n⟩, |γ|, φ)`; checks that `φ`
/// decouples from the other two parameters.
pub fn qfi_spatial(p: &SpatialParams) -> Result<FisherMatrix> {
    let iq = qfi_gaussian(&p.state()?, &covariance_derivatives(p))?;
    let tol = 1e-10 * max_abs_real(iq.matrix()).max(1.0);
    let (a, b) = (iq.get(0, 2).abs(), iq.get(1, 2).abs());
    if a > tol || b > tol {
        return Err(Error::Numerical(format!(
            "QFI lost its block structure: |I13| = {a:e}, |I23| = {b:e}"
        )));
    }
    Ok(iq)
}

/// One SLD commutator identity: `[ℒ_a, ℒ_b] = k (n̂₁ − n̂₂)`, with `k = 0`
/// for the `(⟨n⟩, |γ|)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorClaim {
    pub pair: (SpatialParam, SpatialParam),
    pub factor: C64,
    /// Largest coefficient of `[ℒ_a, ℒ_b] − k (n̂₁ − n̂₂)`, relative to the
    /// product of the largest SLD coefficients.
    pub residual: f64,
}

pub fn sld_commutator_claims(p: &SpatialParams) -> Result<[CommutatorClaim; 3]> {
    let slds = spatial_slds(p)?;
    let diff = QuadraticObservable::number(2, 0) - QuadraticObservable::number(2, 1);
    let claim = |a: usize, b: usize| -> Result<CommutatorClaim> {
        let comm = slds[a].observable.commutator(&slds[b].observable)?;
        let scale = slds[a].observable.max_coefficient() * slds[b].observable.max_coefficient();
        let (factor, resid) = if (a, b) == (0, 1) {
            (C64::new(0.0, 0.0), comm.max_coefficient())
        } else {
            comm.proportionality(&diff)?
        };
        Ok(CommutatorClaim {
            pair: (slds[a].param, slds[b].param),
            factor,
            residual: resid / scale.max(f64::MIN_POSITIVE),
        })
    };
    Ok([claim(0, 1)?, claim(0, 2)?, claim(1, 2)?])
}

/// `X_i = Σ_j [I_Q⁻¹]_ij ℒ_j`.
pub fn x_operators(p: &SpatialParams) -> Result<[QuadraticObservable; 3]> {
    if !(p.gamma_abs > 0.0 && p.gamma_abs < 1.0) {
        return Err(Error::Domain(format!("X operators need 0 < |γ| < 1, got {}", p.gamma_abs)));
    }
    let inv = qfi_spatial(p)?.inverse()?;
    let slds = spatial_slds(p)?;
    let x = |i: usize| {
        (0..3).fold(QuadraticObservable::zero(2), |acc, j| acc + slds[j].observable.scale_real(inv[(i, j)]))
    };
    Ok([x(0), x(1), x(2)])
}

/// The two single-setting measurements of the weighted scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XMeasurement {
    /// Phase setting `φ`: optimal for `(⟨n⟩, |γ|)`, blind to `φ`.
    X2,
    /// Phase setting `φ − π/2`: optimal for `⟨n⟩` and `φ`.
    X3,
}

impl XMeasurement {
    pub fn scheme(self, p: &SpatialParams) -> CountScheme {
        match self {
            XMeasurement::X2 => CountScheme::PhaseShifted(p.phi),
            XMeasurement::X3 => CountScheme::PhaseShifted(p.phi - FRAC_PI_2),
        }
    }
}

/// Classical Fisher information of the `X2` or `X3` photon-counting measurement.
pub fn measurement_fisher_x(which: XMeasurement, p: &SpatialParams) -> Result<FisherMatrix> {
    let ic = count_fisher(which.scheme(p), p, tail_rule(p.diag_thermal())?)?;
    if which == XMeasurement::X2 {
        for k in 0..3 {
            if ic.get(2, k) != 0.0 {
                return Err(Error::Numerical(format!("X2 measurement carries φ information ({:e})", ic.get(2, k))));
            }
        }
    }
    Ok(ic)
}

/// `(δ1, δ2) = ([I_C(X3)]_12, [I_C(X3)]_22)`.
pub fn x3_deltas(ic_x3: &FisherMatrix) -> (f64, f64) {
    (ic_x3.get(0, 1), ic_x3.get(1, 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSchemeResult {
    pub p_star: f64,
    pub cost_star: f64,
    pub ic_mixture: FisherMatrix,
    pub ic_x2: FisherMatrix,
    pub ic_x3: FisherMatrix,
}

/// Tolerance of the golden-section search over `p`.
pub const P_TOL: f64 = 1e-8;

/// Minimizes `tr(I_Q (p I_C(X2) + (1−p) I_C(X3))⁻¹)` over `p`.
///
/// With `use_delta_zero` the two Fisher matrices are the idealized ones,
/// written where `I_Q` is the identity: with `I_Q = L Lᵀ` (Cholesky),
/// `I_C(X2) = L diag(1,1,0) Lᵀ` and `I_C(X3) = L diag(1,0,1) Lᵀ`.
pub fn weighted_scheme(p: &SpatialParams, use_delta_zero: bool) -> Result<WeightedSchemeResult> {
    let iq = qfi_spatial(p)?;
    let (ic_x2, ic_x3) = if use_delta_zero {
        let l = iq
            .matrix()
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularFisher {
                null_directions: Vec::new(),
            })?
            .l();
        let proj = |d: [f64; 3]| -> Result<FisherMatrix> {
            FisherMatrix::classical(&l * DMatrix::from_diagonal(&DVector::from_row_slice(&d)) * l.transpose())
        };
        (proj([1.0, 1.0, 0.0])?, proj([1.0, 0.0, 1.0])?)
    } else {
        (measurement_fisher_x(XMeasurement::X2, p)?, measurement_fisher_x(XMeasurement::X3, p)?)
    };
    let objective = |t: f64| {
        FisherMatrix::mixture(&ic_x2, &ic_x3, t).map_or(f64::INFINITY, |m| cost(&iq, &m))
    };
    let (p_star, cost_star) = golden_section(objective, 0.0, 1.0, P_TOL);
    Ok(WeightedSchemeResult {
        p_star,
        cost_star,
        ic_mixture: FisherMatrix::mixture(&ic_x2, &ic_x3, p_star)?,
        ic_x2,
        ic_x3,
    })
}
