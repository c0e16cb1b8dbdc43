//! Six-element mixture POVMs on the `{|0,0⟩, |0,1⟩, |1,0⟩}` truncation of the
//! spatial state, and a seeded Nelder–Mead search over them.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{fock_density, triangle_tail, u_phase_bs};
use crate::error::{Error, Result};
use crate::fisher::{classical_fisher, cost, FisherMatrix};
use crate::fock::FockCutoff;
use crate::linalg::{unitarity_residual, CMatrix, C64};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::oracle::eigen_qfi;
use crate::spatial::{qfi_spatial, SpatialParam, SpatialParams};

/// Truncation dimension.
pub const DIM: usize = 3;
/// Largest `⟨n⟩` accepted by [`truncated_state`].
pub const MAX_N_MEAN: f64 = 0.1;
/// Largest discarded probability mass.
pub const MAX_DEFICIT: f64 = 1e-2;
/// Finite-difference step for `∂ρ`.
pub const FD_STEP: f64 = 1e-6;
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Relative slack on the Gill–Massar inequalities, covering the
/// finite-difference error in `∂ρ`.
pub const GM_SLACK: f64 = 1e-6;

/// The unnormalized projection of `ρ` onto `(|0,0⟩, |0,1⟩, |1,0⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedState {
    #[serde(skip)]
    pub rho: CMatrix,
    pub trace_deficit: f64,
}

pub fn truncated_state(p: &SpatialParams) -> Result<TruncatedState> {
    if p.n_mean() > MAX_N_MEAN {
        return Err(Error::Domain(format!(
            "⟨n⟩ = {} exceeds {MAX_N_MEAN}; the single-photon truncation is not justified",
            p.n_mean()
        )));
    }
    let x = p.diag_thermal();
    let trace_deficit = triangle_tail(x, 1);
    if trace_deficit > MAX_DEFICIT {
        return Err(Error::Domain(format!("truncation deficit {trace_deficit:e} exceeds {MAX_DEFICIT}")));
    }
    // the lexicographic cutoff-1 basis is exactly (0,0), (0,1), (1,0)
    let rho = fock_density(x, &u_phase_bs(p.phi()), FockCutoff::new(1));
    Ok(TruncatedState { rho, trace_deficit })
}

/// `M = p M₁ + (1 − p) M₂` with `M_a` the projective measurement onto the
/// columns of `u_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePovm {
    u1: CMatrix,
    u2: CMatrix,
    p: f64,
}

impl MixturePovm {
    pub fn new(u1: CMatrix, u2: CMatrix, p: f64) -> Result<Self> {
        for u in [&u1, &u2] {
            if u.nrows() != DIM || u.ncols() != DIM {
                return Err(Error::DimensionMismatch { expected: DIM, got: u.nrows() });
            }
            let r = unitarity_residual(u);
            if r > COMPLETENESS_TOL {
                return Err(Error::Domain(format!("basis matrix is not unitary (residual {r:e})")));
            }
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("mixing probability {p} outside [0, 1]")));
        }
        Ok(Self { u1, u2, p })
    }

    pub fn u1(&self) -> &CMatrix {
        &self.u1
    }

    pub fn u2(&self) -> &CMatrix {
        &self.u2
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p|u1_i⟩⟨u1_i|` for `i = 0..3`, then `(1−p)|u2_i⟩⟨u2_i|`.
    pub fn elements(&self) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(2 * DIM);
        for (u, w) in [(&self.u1, self.p), (&self.u2, 1.0 - self.p)] {
            for i in 0..DIM {
                let col = u.column(i);
                out.push(col * col.adjoint() * C64::new(w, 0.0));
            }
        }
        out
    }

    /// `‖Σ Π_k − 1‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.elements().into_iter().fold(CMatrix::zeros(DIM, DIM), |a, b| a + b);
        (sum - CMatrix::identity(DIM, DIM)).norm()
    }
}

/// The eight Gell-Mann matrices.
pub fn gell_mann() -> [CMatrix; 8] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = |entries: &[(usize, usize, C64)]| {
        let mut a = CMatrix::from_element(DIM, DIM, z);
        for &(r, c, v) in entries {
            a[(r, c)] = v;
        }
        a
    };
    let s3 = 1.0 / 3f64.sqrt();
    [
        m(&[(0, 1, one), (1, 0, one)]),
        m(&[(0, 1, -i), (1, 0, i)]),
        m(&[(0, 0, one), (1, 1, -one)]),
        m(&[(0, 2, one), (2, 0, one)]),
        m(&[(0, 2, -i), (2, 0, i)]),
        m(&[(1, 2, one), (2, 1, one)]),
        m(&[(1, 2, -i), (2, 1, i)]),
        m(&[(0, 0, one * s3), (1, 1, one * s3), (2, 2, -2.0 * one * s3)]),
    ]
}

/// `exp(i Σ_k a_k λ_k)`.
pub fn su3_exp(a: &[f64], basis: &[CMatrix; 8]) -> CMatrix {
    assert_eq!(a.len(), 8);
    let h = basis
        .iter()
        .zip(a)
        .fold(CMatrix::zeros(DIM, DIM), |acc, (l, &k)| acc + l * C64::new(k, 0.0));
    let eig = SymmetricEigen::new(h);
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Search coordinates: 8 generator coefficients per basis, then `s` with
/// `p = sin² s`.
pub const N_COORDS: usize = 17;

pub fn povm_from_coords(x: &[f64], basis: &[CMatrix; 8]) -> Result<MixturePovm> {
    if x.len() != N_COORDS {
        return Err(Error::DimensionMismatch { expected: N_COORDS, got: x.len() });
    }
    MixturePovm::new(su3_exp(&x[..8], basis), su3_exp(&x[8..16], basis), x[16].sin().powi(2))
}

/// Truncated `ρ`, its finite-difference derivatives and two quantum Fisher
/// matrices, fixed for one parameter point.
///
/// Costs and the Gill–Massar trace use `iq`, the information of the
/// truncated state itself; `iq_gaussian` is the untruncated value.
#[derive(Debug, Clone)]
pub struct PovmProblem {
    pub params: SpatialParams,
    pub state: TruncatedState,
    pub drho: [CMatrix; 3],
    pub iq: FisherMatrix,
    pub iq_gaussian: FisherMatrix,
}

impl PovmProblem {
    pub fn new(params: &SpatialParams) -> Result<Self> {
        let state = truncated_state(params)?;
        let theta = params.theta();
        let mut drho = Vec::with_capacity(3);
        for q in SpatialParam::ALL {
            let h = FD_STEP * theta[q.index()].abs().max(1.0);
            let mut tp = theta;
            let mut tm = theta;
            tp[q.index()] += h;
            tm[q.index()] -= h;
            let plus = truncated_state(&SpatialParams::new(tp[0], tp[1], tp[2])?)?.rho;
            let minus = truncated_state(&SpatialParams::new(tm[0], tm[1], tm[2])?)?.rho;
            drho.push((plus - minus) / C64::new(2.0 * h, 0.0));
        }
        let iq = eigen_qfi(&state.rho, &drho)?;
        let drho: [CMatrix; 3] = drho.try_into().expect("three parameters");
        Ok(Self {
            params: *params,
            state,
            drho,
            iq,
            iq_gaussian: qfi_spatial(params)?,
        })
    }

    /// Classical Fisher information of the six outcomes `tr(ρ Π_k)`.
    pub fn fisher(&self, povm: &MixturePovm) -> Result<FisherMatrix> {
        let elems = povm.elements();
        let tr = |a: &CMatrix, b: &CMatrix| (a * b).trace().re;
        let probs: Vec<f64> = elems.iter().map(|e| tr(&self.state.rho, e).max(0.0)).collect();
        let grads: Vec<Vec<f64>> = elems
            .iter()
            .map(|e| self.drho.iter().map(|d| tr(d, e)).collect())
            .collect();
        classical_fisher(&probs, &grads)
    }

    /// `tr(I_Q I_C⁻¹)`.
    pub fn cost(&self, povm: &MixturePovm) -> f64 {
        match self.fisher(povm) {
            Ok(ic) => cost(&self.iq, &ic),
            Err(_) => f64::INFINITY,
        }
    }

    /// `tr(I_Q⁻¹ I_C)`.
    pub fn gill_massar_trace(&self, povm: &MixturePovm) -> Result<f64> {
        let ic = self.fisher(povm)?;
        Ok((self.iq.inverse()? * ic.matrix()).trace())
    }
}

/// Classical information of `povm` on the truncated state at `params`.
pub fn povm_fisher(povm: &MixturePovm, params: &SpatialParams) -> Result<FisherMatrix> {
    PovmProblem::new(params)?.fisher(povm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GillMassar {
    /// `d²/(D − 1)`.
    pub lower: f64,
    /// `d²`, reached by splitting evenly between the `d` single-parameter optima.
    pub upper_scheme: f64,
}

pub fn gill_massar_bounds(d: usize, big_d: usize) -> Result<GillMassar> {
    if d < 1 || big_d < 2 {
        return Err(Error::Domain(format!("need d ≥ 1 and D ≥ 2, got d = {d}, D = {big_d}")));
    }
    let d2 = (d * d) as f64;
    Ok(GillMassar {
        lower: d2 / (big_d - 1) as f64,
        upper_scheme: d2,
    })
}

pub const DEFAULT_RESTARTS: usize = 32;
/// Further Nelder–Mead runs from the incumbent of one restart.
const POLISH_ROUNDS: usize = 4;

fn search_options() -> NelderMeadOptions {
    NelderMeadOptions {
        max_evaluations: 40_000,
        f_tol: 1e-10,
        x_tol: 1e-7,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub cost: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PovmSearchResult {
    pub best_cost: f64,
    /// The 17 search coordinates of the best POVM.
    pub best_coords: Vec<f64>,
    pub best_p: f64,
    #[serde(skip)]
    pub best_povm: MixturePovm,
    pub restarts: Vec<RestartOutcome>,
    /// `tr(I_Q⁻¹ I_C)` at the optimum.
    pub gill_massar_trace: f64,
    /// Cost of the optimum against the untruncated `I_Q`.
    pub gaussian_cost: f64,
}

fn run_restart(problem: &PovmProblem, basis: &[CMatrix; 8], seed: u64, index: usize) -> (Vec<f64>, RestartOutcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let pi = std::f64::consts::PI;
    let mut x: Vec<f64> = (0..16).map(|_| rng.random_range(-pi..pi)).collect();
    x.push(rng.random_range(0.0..std::f64::consts::FRAC_PI_2));
    let f = |c: &[f64]| povm_from_coords(c, basis).map_or(f64::INFINITY, |m| problem.cost(&m));
    let mut best = f(&x);
    let mut evaluations = 1;
    let mut converged = false;
    let mut step = 0.5;
    for _ in 0..POLISH_ROUNDS {
        let (point, value, ok, evals) = match nelder_mead(f, &x, &vec![step; N_COORDS], search_options()) {
            Ok(m) => (m.x, m.value, true, m.evaluations),
            Err(Error::NoConvergence { evaluations, best_value, best_point }) => {
                (best_point, best_value, false, evaluations)
            }
            Err(_) => break,
        };
        evaluations += evals;
        let gain = best - value;
        if value <= best {
            x = point;
            best = value;
        }
        converged = ok;
        if ok && !(gain > 1e-10 * best.abs().max(1.0)) {
            break;
        }
        step = 0.1;
    }
    (
        x,
        RestartOutcome {
            cost: best,
            converged,
            evaluations,
        },
    )
}

/// Best six-element mixture POVM over `restarts` seeded Nelder–Mead runs.
/// Restart `k` draws from ChaCha stream `k` of `seed`, so the best cost is
/// non-increasing as restarts are added.
pub fn optimize_povm(params: &SpatialParams, restarts: usize, seed: u64) -> Result<PovmSearchResult> {
    if restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    let problem = PovmProblem::new(params)?;
    let basis = gell_mann();
    let runs: Vec<(Vec<f64>, RestartOutcome)> = (0..restarts)
        .into_par_iter()
        .map(|k| run_restart(&problem, &basis, seed, k))
        .collect();
    let finite = runs.iter().filter(|(_, o)| o.converged && o.cost.is_finite());
    let Some((coords, _)) = finite.min_by(|a, b| a.1.cost.total_cmp(&b.1.cost)) else {
        let (point, o) = runs
            .iter()
            .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost))
            .expect("at least one restart");
        return Err(Error::NoConvergence {
            evaluations: runs.iter().map(|r| r.1.evaluations).sum(),
            best_value: o.cost,
            best_point: point.clone(),
        });
    };
    let best_povm = povm_from_coords(coords, &basis)?;
    Ok(PovmSearchResult {
        best_cost: problem.cost(&best_povm),
        gaussian_cost: problem.fisher(&best_povm).map_or(f64::INFINITY, |ic| cost(&problem.iq_gaussian, &ic)),
        best_p: best_povm.p(),
        gill_massar_trace: problem.gill_massar_trace(&best_povm)?,
        best_coords: coords.clone(),
        best_povm,
        restarts: runs.into_iter().map(|r| r.1).collect(),
    })
}

/// Largest eigenvalue of `I_C − I_Q`; non-positive when `I_C ≤ I_Q`.
pub fn dominance_gap(iq: &FisherMatrix, ic: &FisherMatrix) -> f64 {
    let d: DMatrix<f64> = ic.matrix() - iq.matrix();
    d.symmetric_eigen().eigenvalues.max()
}
