//! Planck statistics of far-field blackbody light and temperature estimation
//! from photon counting in a few spectral modes.
//!
//! A spectral mode at `ν` holds `⟨n_ν⟩ = ν²κ⟨n_th⟩` photons with
//! `⟨n_th⟩ = 1/(e^{hν/k_BT} − 1)`. Parameters are ordered `(T, κ)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{crb_bound, FisherMatrix, ParamDerivatives};
use crate::gaussian::GaussianState;
use crate::linalg::{CMatrix, C64};
use crate::observable::QuadraticObservable;
use crate::optimize::{nelder_mead, NelderMeadOptions};

/// Planck constant, J·s.
pub const H: f64 = 6.62607015e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Beyond this `hν/k_BT` the occupation is `e^{−x}` to double precision.
const EXP_CUTOFF: f64 = 700.0;

/// Detection geometry behind `κ = A_S A_ρ / (2π c² R²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Radiating source area `A_S`, m².
    pub source_area: f64,
    /// Detector area `A_ρ`, m².
    pub detector_area: f64,
    /// Source distance `R`, m.
    pub distance: f64,
    /// Observation time `τ`, s.
    pub observation_time: f64,
}

impl Geometry {
    pub fn kappa(&self) -> f64 {
        self.source_area * self.detector_area
            / (2.0 * std::f64::consts::PI * C_LIGHT * C_LIGHT * self.distance * self.distance)
    }

    /// Spectral width `Δν = 1/τ`.
    pub fn bandwidth(&self) -> f64 {
        1.0 / self.observation_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackbodyScene {
    temperature: f64,
    kappa: f64,
    geometry: Option<Geometry>,
}

impl BlackbodyScene {
    pub fn new(temperature: f64, kappa: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
        }
        Ok(Self {
            temperature,
            kappa,
            geometry: None,
        })
    }

    pub fn from_geometry(temperature: f64, geometry: Geometry) -> Result<Self> {
        let fields = [
            geometry.source_area,
            geometry.detector_area,
            geometry.distance,
            geometry.observation_time,
        ];
        if fields.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("geometry entries must be positive: {geometry:?}")));
        }
        let mut scene = Self::new(temperature, geometry.kappa())?;
        scene.geometry = Some(geometry);
        Ok(scene)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    /// `β = 1/(k_B T)`.
    pub fn beta(&self) -> f64 {
        1.0 / (K_B * self.temperature)
    }

    /// `k_B T / h`, the natural frequency scale.
    pub fn thermal_frequency(&self) -> f64 {
        K_B * self.temperature / H
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.kappa)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.temperature, kappa)
    }
}

/// Strictly increasing positive frequencies, Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::Domain("frequency grid is empty".into()));
        }
        if freqs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::Domain("frequencies must be positive and finite".into()));
        }
        if freqs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("frequencies must be strictly increasing".into()));
        }
        Ok(Self(freqs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("frequency must be positive and finite, got {nu}")))
    }
}

/// `⟨n_th⟩ = 1/(e^x − 1)` with `x = hν/k_BT`, and `x` itself.
fn planck(nu: f64, scene: &BlackbodyScene) -> (f64, f64) {
    let x = H * nu * scene.beta();
    let nth = if x > EXP_CUTOFF { (-x).exp() } else { 1.0 / x.exp_m1() };
    (nth, x)
}

/// Occupation of one thermal mode at `ν`.
pub fn thermal_occupation(nu: f64, scene: &BlackbodyScene) -> Result<f64> {
    check_nu(nu)?;
    Ok(planck(nu, scene).0)
}

/// `⟨n_ν⟩ = ν²κ⟨n_th⟩`.
pub fn mean_photon_number(nu: f64, scene: &BlackbodyScene) -> Result<f64> {
    check_nu(nu)?;
    Ok(nu * nu * scene.kappa * planck(nu, scene).0)
}

/// `(∂_T⟨n_ν⟩, ∂_κ⟨n_ν⟩)`.
pub fn photon_number_gradient(nu: f64, scene: &BlackbodyScene) -> Result<[f64; 2]> {
    check_nu(nu)?;
    let (nth, x) = planck(nu, scene);
    // d⟨n_th⟩/dx = −⟨n_th⟩(1 + ⟨n_th⟩)
    let dt = nu * nu * scene.kappa * nth * (1.0 + nth) * x / scene.temperature;
    Ok([dt, nu * nu * nth])
}

/// Single-mode information `∇⟨n⟩∇⟨n⟩ᵀ / (⟨n⟩ + ⟨n⟩²)`; rank one.
pub fn spectral_qfi(nu: f64, scene: &BlackbodyScene) -> Result<FisherMatrix> {
    let n = mean_photon_number(nu, scene)?;
    let g = photon_number_gradient(nu, scene)?;
    let w = 1.0 / (n + n * n);
    FisherMatrix::quantum(DMatrix::from_fn(2, 2, |i, j| w * g[i] * g[j]))
}

/// Sum of single-mode informations; repeated frequencies are allowed.
pub fn multimode_qfi(freqs: &[f64], scene: &BlackbodyScene) -> Result<FisherMatrix> {
    if freqs.is_empty() {
        return Err(Error::Domain("no spectral modes".into()));
    }
    let mut m = DMatrix::zeros(2, 2);
    for &nu in freqs {
        m += spectral_qfi(nu, scene)?.matrix();
    }
    FisherMatrix::quantum(m)
}

/// The `M`-mode product state with `∂Σ/∂T` and `∂Σ/∂κ`.
pub fn spectral_state(freqs: &[f64], scene: &BlackbodyScene) -> Result<(GaussianState, ParamDerivatives)> {
    let ns = freqs
        .iter()
        .map(|&nu| mean_photon_number(nu, scene))
        .collect::<Result<Vec<_>>>()?;
    let grads = freqs
        .iter()
        .map(|&nu| photon_number_gradient(nu, scene))
        .collect::<Result<Vec<_>>>()?;
    let state = GaussianState::thermal_product(&ns)?;
    let dim = 2 * freqs.len();
    let deriv = |k: usize| {
        let mut d = CMatrix::zeros(dim, dim);
        for (j, g) in grads.iter().enumerate() {
            d[(2 * j, 2 * j + 1)] = C64::new(g[k], 0.0);
            d[(2 * j + 1, 2 * j)] = C64::new(g[k], 0.0);
        }
        d
    };
    Ok((state, ParamDerivatives(vec![deriv(0), deriv(1)])))
}

/// `ℒ_i = Σ_j ∂_i⟨n_j⟩ (n̂_j − ⟨n_j⟩) / (⟨n_j⟩ + ⟨n_j⟩²)` for `i ∈ {T, κ}`.
pub fn spectral_slds(freqs: &[f64], scene: &BlackbodyScene) -> Result<[QuadraticObservable; 2]> {
    let m = freqs.len();
    let mut out = [QuadraticObservable::zero(m), QuadraticObservable::zero(m)];
    for (j, &nu) in freqs.iter().enumerate() {
        let n = mean_photon_number(nu, scene)?;
        let g = photon_number_gradient(nu, scene)?;
        let w = 1.0 / (n + n * n);
        for (i, l) in out.iter_mut().enumerate() {
            let term = QuadraticObservable::number(m, j) - QuadraticObservable::identity(m).scale_real(n);
            *l = l.clone() + term.scale_real(g[i] * w);
        }
    }
    Ok(out)
}

/// `[I_Q⁻¹]_TT` with κ as a nuisance parameter.
///
/// The determinant is accumulated as `Σ_{l<k} w_l w_k (g_l × g_k)²`, which
/// avoids cancellation between nearly parallel gradients.
pub fn temperature_variance(freqs: &[f64], scene: &BlackbodyScene) -> Result<f64> {
    let mut w = Vec::with_capacity(freqs.len());
    let mut g = Vec::with_capacity(freqs.len());
    for &nu in freqs {
        let n = mean_photon_number(nu, scene)?;
        w.push(1.0 / (n + n * n));
        g.push(photon_number_gradient(nu, scene)?);
    }
    let mut det = 0.0;
    let mut i22 = 0.0;
    for l in 0..freqs.len() {
        i22 += w[l] * g[l][1] * g[l][1];
        for k in l + 1..freqs.len() {
            let cross = g[l][0] * g[k][1] - g[l][1] * g[k][0];
            det += w[l] * w[k] * cross * cross;
        }
    }
    if !(det > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(i22 / det)
}

/// `Σ_l C^{(l)}_ii / Σ_{l,k} (I^{(l)}_11 I^{(k)}_22 − I^{(l)}_12 I^{(k)}_21)`,
/// evaluated term by term from the single-mode matrices.
pub fn variance_bound_cofactor(freqs: &[f64], scene: &BlackbodyScene, i: usize) -> Result<f64> {
    if i > 1 {
        return Err(Error::Domain(format!("parameter index {i} out of range")));
    }
    if freqs.len() < 2 {
        return Err(Error::Domain("the cofactor bound needs at least two modes".into()));
    }
    let mats = freqs
        .iter()
        .map(|&nu| spectral_qfi(nu, scene))
        .collect::<Result<Vec<_>>>()?;
    // cofactor of [[a, b], [b, d]] is [[d, −b], [−b, a]]
    let j = 1 - i;
    let num: f64 = mats.iter().map(|m| m.get(j, j)).sum();
    let mut den = 0.0;
    let mut scale = 0.0;
    for ml in &mats {
        for mk in &mats {
            let a = ml.get(0, 0) * mk.get(1, 1);
            let b = ml.get(0, 1) * mk.get(1, 0);
            den += a - b;
            scale += a.abs() + b.abs();
        }
    }
    if den.abs() <= 1e-12 * scale {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

/// Log-spaced scan bounds for the frequency search, in units of `k_BT/h`.
pub const SCAN_RANGE: (f64, f64) = (1e-3, 10.0);

/// Scan resolution per axis.
pub const SCAN_POINTS: usize = 64;

fn log_axis(scale: f64) -> Vec<f64> {
    let (lo, hi) = ((SCAN_RANGE.0 * scale).ln(), (SCAN_RANGE.1 * scale).ln());
    (0..SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64)
        .collect()
}

fn nm_options() -> NelderMeadOptions {
    NelderMeadOptions {
        max_evaluations: 10_000,
        f_tol: 1e-6,
        x_tol: 1e-9,
    }
}

fn sorted_exp(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|l| l.exp()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// The frequency pair minimizing [`temperature_variance`]: a 64×64 log scan
/// over `[1e-3, 10]·k_BT/h` refined by Nelder–Mead in `ln ν`.
pub fn optimal_frequencies(scene: &BlackbodyScene) -> Result<(f64, f64)> {
    let objective = |l: &[f64]| -> f64 {
        let freqs = [l[0].exp(), l[1].exp()];
        temperature_variance(&freqs, scene).map_or(f64::INFINITY, f64::ln)
    };
    let axis = log_axis(scene.thermal_frequency());
    let best = scan_pairs(&axis, &objective);
    let m = nelder_mead(objective, &best, &[0.05, 0.05], nm_options())?;
    let v = sorted_exp(&m.x);
    Ok((v[0], v[1]))
}

fn scan_pairs<F: Fn(&[f64]) -> f64 + Sync>(axis: &[f64], f: &F) -> Vec<f64> {
    let (val, a, b) = (0..axis.len())
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..axis.len()).map(move |j| (i, j)))
        .map(|(i, j)| (f(&[axis[i], axis[j]]), axis[i], axis[j]))
        .reduce(
            || (f64::INFINITY, 0.0, 0.0),
            |x, y| if y.0 < x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
        );
    debug_assert!(val.is_finite());
    vec![a, b]
}

/// One quadrature node of a prior over `(T, κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorNode {
    pub temperature: f64,
    pub kappa: f64,
    pub weight: f64,
}

/// A prior represented by its quadrature rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    nodes: Vec<PriorNode>,
}

impl Prior {
    /// Weights must be non-negative and sum to one within `1e-6`.
    pub fn new(nodes: Vec<PriorNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Domain("prior has no nodes".into()));
        }
        for n in &nodes {
            BlackbodyScene::new(n.temperature, n.kappa)?;
            if !(n.weight >= 0.0) {
                return Err(Error::Domain(format!("negative prior weight {}", n.weight)));
            }
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!("prior weights sum to {total}, not 1")));
        }
        Ok(Self { nodes })
    }

    pub fn dirac(temperature: f64, kappa: f64) -> Result<Self> {
        Self::new(vec![PriorNode {
            temperature,
            kappa,
            weight: 1.0,
        }])
    }

    /// Uniform on `[t_min, t_max]` by the `n`-point midpoint rule.
    pub fn uniform_temperature(t_min: f64, t_max: f64, kappa: f64, n: usize) -> Result<Self> {
        if !(t_max > t_min) || n == 0 {
            return Err(Error::Domain("uniform prior needs t_max > t_min and n ≥ 1".into()));
        }
        let h = (t_max - t_min) / n as f64;
        Self::new(
            (0..n)
                .map(|k| PriorNode {
                    temperature: t_min + (k as f64 + 0.5) * h,
                    kappa,
                    weight: 1.0 / n as f64,
                })
                .collect(),
        )
    }

    pub fn nodes(&self) -> &[PriorNode] {
        &self.nodes
    }

    pub fn mean_temperature(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight * n.temperature).sum()
    }
}

/// `Σ_nodes w · tr(G I_Q⁻¹(ν))`.
pub fn prior_objective(freqs: &[f64], prior: &Prior, g: &DMatrix<f64>) -> Result<f64> {
    let mut acc = 0.0;
    for node in &prior.nodes {
        let scene = BlackbodyScene::new(node.temperature, node.kappa)?;
        let iq = multimode_qfi(freqs, &scene)?;
        acc += node.weight * crb_bound(&iq, g)?.value;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyDesign {
    pub grid: FrequencyGrid,
    pub objective: f64,
}

/// Frequencies minimizing the prior-averaged weighted variance.
///
/// `M = 2` scans all pairs; larger `M` extends the `M−1` design by scanning
/// one extra frequency. Each stage is refined by Nelder–Mead in `ln ν`.
pub fn prior_averaged_design(prior: &Prior, g: &DMatrix<f64>, m: usize) -> Result<FrequencyDesign> {
    if m < 2 {
        return Err(Error::Domain("a design needs at least two modes".into()));
    }
    if g.nrows() != 2 || g.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: g.nrows() });
    }
    // validates g once
    let probe = BlackbodyScene::new(prior.mean_temperature(), prior.nodes[0].kappa)?;
    crb_bound(&multimode_qfi(&[probe.thermal_frequency(), 2.0 * probe.thermal_frequency()], &probe)?, g)?;

    let objective = |l: &[f64]| -> f64 {
        let freqs: Vec<f64> = l.iter().map(|x| x.exp()).collect();
        match prior_objective(&freqs, prior, g) {
            Ok(v) if v > 0.0 => v.ln(),
            _ => f64::INFINITY,
        }
    };
    let axis = log_axis(probe.thermal_frequency());
    let mut current = scan_pairs(&axis, &objective);
    current = nelder_mead(objective, &current, &[0.05, 0.05], nm_options())?.x;
    while current.len() < m {
        let base = current.clone();
        let (_, extra) = axis
            .par_iter()
            .map(|&a| {
                let mut x = base.clone();
                x.push(a);
                (objective(&x), a)
            })
            .reduce(|| (f64::INFINITY, 0.0), |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
        current.push(extra);
        let step = vec![0.05; current.len()];
        current = nelder_mead(objective, &current, &step, nm_options())?.x;
    }
    let freqs = sorted_exp(&current);
    let objective = prior_objective(&freqs, prior, g)?;
    Ok(FrequencyDesign {
        grid: FrequencyGrid::new(freqs)?,
        objective,
    })
}

/// Interpretation constants for the regime checks.
pub const ALPHA_SECONDS: f64 = 1e-14;
pub const EPSILON_PER_KELVIN: f64 = 1e-3;
/// `ν²κ` below this counts as `≪ 1`.
pub const SINGLE_MODE_THRESHOLD: f64 = 1e-3;
/// A ratio at least this large counts as `≫ 1`.
pub const FARFIELD_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub nu2_kappa: f64,
    pub single_mode_ok: bool,
    pub cot_theta: f64,
    /// `cot θ / (αν)`.
    pub cot_over_alpha_nu: f64,
    /// `cot θ / (εT)`.
    pub cot_over_epsilon_t: f64,
    pub farfield_ok: bool,
}

/// Flags whether the single-mode and far-field approximations hold. Never fails.
pub fn regime_check(scene: &BlackbodyScene, nu: f64, angular_size: f64) -> RegimeReport {
    let nu2_kappa = nu * nu * scene.kappa;
    let cot_theta = angular_size.cos() / angular_size.sin();
    let cot_over_alpha_nu = cot_theta / (ALPHA_SECONDS * nu);
    let cot_over_epsilon_t = cot_theta / (EPSILON_PER_KELVIN * scene.temperature);
    RegimeReport {
        nu2_kappa,
        single_mode_ok: nu2_kappa < SINGLE_MODE_THRESHOLD,
        cot_theta,
        cot_over_alpha_nu,
        cot_over_epsilon_t,
        farfield_ok: cot_over_alpha_nu >= FARFIELD_RATIO && cot_over_epsilon_t >= FARFIELD_RATIO,
    }
}

/// `ln [I_Q⁻¹]_TT` over a linear `N×N` frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceMap {
    pub freqs: Vec<f64>,
    /// Row-major, `ln_var[i*N + j]` at `(ν1, ν2) = (freqs[i], freqs[j])`.
    pub ln_var: Vec<f64>,
    pub min_nu1: f64,
    pub min_nu2: f64,
    pub min_ln_var: f64,
    pub max_mean_photon_number: f64,
}

pub fn variance_map(scene: &BlackbodyScene, nu_min: f64, nu_max: f64, n: usize) -> Result<VarianceMap> {
    if n < 2 || !(nu_max > nu_min) || !(nu_min > 0.0) {
        return Err(Error::Domain("variance map needs 0 < ν_min < ν_max and N ≥ 2".into()));
    }
    let freqs: Vec<f64> = (0..n)
        .map(|k| nu_min + (nu_max - nu_min) * k as f64 / (n - 1) as f64)
        .collect();
    let ln_var: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            temperature_variance(&[freqs[i], freqs[j]], scene).map(f64::ln)
        })
        .collect::<Result<Vec<_>>>()?;
    let (k, &min_ln_var) = ln_var
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    let max_mean_photon_number = freqs
        .iter()
        .map(|&nu| mean_photon_number(nu, scene))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(VarianceMap {
        min_nu1: freqs[k / n].min(freqs[k % n]),
        min_nu2: freqs[k / n].max(freqs[k % n]),
        freqs,
        ln_var,
        min_ln_var,
        max_mean_photon_number,
    })
}

/// `e_i e_iᵀ`, the weight selecting one parameter.
pub fn unit_weight(i: usize) -> DMatrix<f64> {
    let mut v = DVector::zeros(2);
    v[i] = 1.0;
    &v * v.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{qfi_gaussian, sld_gaussian};
    use crate::linalg::max_abs;

    fn scene() -> BlackbodyScene {
        BlackbodyScene::new(1e4, 1e-32).unwrap()
    }

    #[test]
    fn occupation_cases() {
        let s = scene();
        let nu = K_B * s.temperature() * std::f64::consts::LN_2 / H;
        let n = mean_photon_number(nu, &s).unwrap();
        assert!((n / (nu * nu * s.kappa()) - 1.0).abs() < 1e-12);
        assert_eq!(mean_photon_number(1e30, &s).unwrap(), 0.0);
        assert!(mean_photon_number(0.0, &s).is_err());
        // the asymptotic branch is continuous
        let x_edge = EXP_CUTOFF * K_B * s.temperature() / H;
        let a = thermal_occupation(x_edge * (1.0 - 1e-12), &s).unwrap();
        let b = thermal_occupation(x_edge * (1.0 + 1e-12), &s).unwrap();
        assert!((a / b - 1.0).abs() < 1e-8);
    }

    #[test]
    fn geometry_kappa() {
        let g = Geometry {
            source_area: 1e18,
            detector_area: 1e-11,
            distance: 1e16,
            observation_time: 1e-3,
        };
        let s = BlackbodyScene::from_geometry(5000.0, g).unwrap();
        let want = 1e18 * 1e-11 / (2.0 * std::f64::consts::PI * C_LIGHT * C_LIGHT * 1e32);
        assert!((s.kappa() / want - 1.0).abs() < 1e-12);
        assert_eq!(g.bandwidth(), 1e3);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let s = scene();
        for &nu in &[3e13, 4e14, 2e15] {
            let g = photon_number_gradient(nu, &s).unwrap();
            let ht = 1e-4;
            let fd_t = (mean_photon_number(nu, &s.with_temperature(1e4 + ht).unwrap()).unwrap()
                - mean_photon_number(nu, &s.with_temperature(1e4 - ht).unwrap()).unwrap())
                / (2.0 * ht);
            assert!((g[0] / fd_t - 1.0).abs() < 1e-6);
            assert!(g[0] > 0.0 && g[1] > 0.0);
            let n = mean_photon_number(nu, &s).unwrap();
            assert!((g[1] * s.kappa() / n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_mode_is_rank_one() {
        let s = scene();
        let iq = spectral_qfi(5e14, &s).unwrap();
        let m = iq.matrix();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!(det.abs() <= 1e-14 * m[(0, 0)] * m[(1, 1)]);
        let b = crb_bound(&iq, &DMatrix::identity(2, 2)).unwrap();
        assert!(b.value.is_infinite());
        let dup = multimode_qfi(&[5e14, 5e14], &s).unwrap();
        assert!(crb_bound(&dup, &unit_weight(0)).unwrap().value.is_infinite());
    }

    #[test]
    fn matches_gao_lee_engine() {
        // κ large enough that ⟨n⟩ is far from the vacuum
        let s = BlackbodyScene::new(1e4, 1e-29).unwrap();
        let freqs = [2e14, 9e14];
        let (state, derivs) = spectral_state(&freqs, &s).unwrap();
        let gl = qfi_gaussian(&state, &derivs).unwrap();
        let direct = multimode_qfi(&freqs, &s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (gl.get(i, j), direct.get(i, j));
                assert!((a - b).abs() <= 1e-10 * b.abs(), "{i}{j}: {a} vs {b}");
            }
        }
        let slds = spectral_slds(&freqs, &s).unwrap();
        for k in 0..2 {
            let gl = sld_gaussian(&state, &derivs.0[k]).unwrap();
            let scale = slds[k].max_coefficient();
            assert!(max_abs(&(gl.coefficients() - slds[k].coefficients())) < 1e-10 * scale);
            assert!((gl.c0() - slds[k].c0()).norm() < 1e-10 * scale);
        }
        assert!(slds[0].commutator(&slds[1]).unwrap().max_coefficient() == 0.0);
    }

    #[test]
    fn cofactor_matches_inverse() {
        let s = scene();
        let freqs = [1.188e14, 1.118e15];
        let inv = multimode_qfi(&freqs, &s).unwrap().inverse().unwrap();
        for i in 0..2 {
            let c = variance_bound_cofactor(&freqs, &s, i).unwrap();
            assert!((c / inv[(i, i)] - 1.0).abs() < 1e-8);
        }
        let v = temperature_variance(&freqs, &s).unwrap();
        assert!((v / inv[(0, 0)] - 1.0).abs() < 1e-8);
        assert!(variance_bound_cofactor(&[3e14, 3e14], &s, 0).unwrap().is_infinite());
    }

    #[test]
    fn regime_flags() {
        let s = BlackbodyScene::new(1e4, 3e-34).unwrap();
        let r = regime_check(&s, 1e15, 1e-6);
        assert!((r.nu2_kappa - 3e-4).abs() < 1e-18);
        assert!(r.single_mode_ok && r.farfield_ok);
        assert!((r.cot_over_epsilon_t / 1e5 - 1.0).abs() < 1e-9);
        assert!(!regime_check(&s, 1e15, std::f64::consts::FRAC_PI_2).farfield_ok);
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![2.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn prior_validation() {
        assert!(Prior::new(vec![PriorNode { temperature: 1e4, kappa: 1e-32, weight: 0.5 }]).is_err());
        let u = Prior::uniform_temperature(8000.0, 12000.0, 1e-32, 8).unwrap();
        assert!((u.mean_temperature() - 1e4).abs() < 1e-9);
    }
}
