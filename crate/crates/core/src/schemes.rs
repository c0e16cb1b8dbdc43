//! Scheme benchmarks against the weighted optimum: the fixed Fourier-transform
//! scheme, the random-phase scheme, and ratio maps over the coherence disk.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_fisher, count_fisher_auto, tail_rule, CountScheme};
use crate::error::{Error, Result};
use crate::fisher::{cost, FisherMatrix};
use crate::spatial::{qfi_spatial, weighted_scheme, SpatialParams};

/// Cells with `|γ|` above this are dropped from maps.
pub const GAMMA_EDGE: f64 = 0.995;
pub const DEFAULT_GRID: usize = 41;
pub const DEFAULT_PHASES: usize = 1000;
pub const DEFAULT_TRIALS: usize = 400;

/// `tr(I_Q I_C⁻¹)` for photon counting after the fixed Fourier transform.
pub fn ft_scheme_cost(p: &SpatialParams) -> Result<f64> {
    Ok(cost(&qfi_spatial(p)?, &count_fisher_auto(CountScheme::Ft, p)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomPhaseEstimate {
    /// Mean cost over trials.
    pub mean: f64,
    /// Standard error of the mean; zero for a single trial.
    pub std_err: f64,
    pub trial_costs: Vec<f64>,
}

/// Cost of the mixture of `n_phases` uniformly random measurement phases,
/// repeated over `n_trials`. Trial `t` draws from ChaCha stream `t` of `seed`.
pub fn random_phase_cost(p: &SpatialParams, n_phases: usize, n_trials: usize, seed: u64) -> Result<RandomPhaseEstimate> {
    if n_phases == 0 || n_trials == 0 {
        return Err(Error::Domain("random-phase scheme needs n_phases ≥ 1 and n_trials ≥ 1".into()));
    }
    let iq = qfi_spatial(p)?;
    let cutoff = tail_rule(p.diag_thermal())?;
    let trial = |t: usize| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut acc = DMatrix::zeros(3, 3);
        for _ in 0..n_phases {
            let psi = rng.random_range(0.0..std::f64::consts::TAU);
            acc += count_fisher(CountScheme::PhaseShifted(psi), p, cutoff)?.matrix();
        }
        Ok(cost(&iq, &FisherMatrix::classical(acc / n_phases as f64)?))
    };
    let trial_costs = (0..n_trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()?;
    let n = trial_costs.len() as f64;
    let mean = trial_costs.iter().sum::<f64>() / n;
    let std_err = if trial_costs.len() > 1 {
        let var = trial_costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(RandomPhaseEstimate {
        mean,
        std_err,
        trial_costs,
    })
}

/// What a map cell reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapScheme {
    /// `V_op / V_FT`.
    Ft,
    /// `V_op / V_RP`.
    Rp { n_phases: usize, n_trials: usize },
    /// `V_op` itself.
    Weighted,
}

impl MapScheme {
    pub fn name(&self) -> &'static str {
        match self {
            MapScheme::Ft => "ft",
            MapScheme::Rp { .. } => "rp",
            MapScheme::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCell {
    pub gamma_cos: f64,
    pub gamma_sin: f64,
    /// `None` at singular loci.
    pub value: Option<f64>,
    /// Standard error of `value`, random-phase cells only.
    pub std_err: Option<f64>,
}

impl RatioCell {
    pub fn gamma_abs(&self) -> f64 {
        self.gamma_cos.hypot(self.gamma_sin)
    }

    pub fn phi(&self) -> f64 {
        self.gamma_sin.atan2(self.gamma_cos).rem_euclid(std::f64::consts::TAU)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapMetadata {
    pub scheme: &'static str,
    pub n_mean: f64,
    pub grid: usize,
    pub n_phases: Option<usize>,
    pub n_trials: Option<usize>,
    pub seed: u64,
}

/// Row-major over `gamma_cos` (outer) and `gamma_sin` (inner), both on the
/// symmetric grid `(2k − (N − 1))/(N − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeRatioMap {
    pub metadata: MapMetadata,
    pub cells: Vec<RatioCell>,
}

impl SchemeRatioMap {
    pub fn present(&self) -> impl Iterator<Item = (&RatioCell, f64)> {
        self.cells.iter().filter_map(|c| c.value.map(|v| (c, v)))
    }

    pub fn max_value(&self) -> Option<f64> {
        self.present().map(|(_, v)| v).reduce(f64::max)
    }

    pub fn min_value(&self) -> Option<f64> {
        self.present().map(|(_, v)| v).reduce(f64::min)
    }

    pub fn get(&self, i: usize, j: usize) -> &RatioCell {
        &self.cells[i * self.metadata.grid + j]
    }
}

/// Seed for one map cell: the first word of ChaCha stream `cell` of `seed`.
pub fn cell_seed(seed: u64, cell: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64);
    rng.random()
}

/// Value of `scheme` at one parameter point; `None` when not finite.
pub fn scheme_value(scheme: MapScheme, p: &SpatialParams, seed: u64) -> Result<(Option<f64>, Option<f64>)> {
    let v_op = weighted_scheme(p, false)?.cost_star;
    let finite = |v: f64| v.is_finite().then_some(v);
    Ok(match scheme {
        MapScheme::Weighted => (finite(v_op), None),
        MapScheme::Ft => (finite(v_op / ft_scheme_cost(p)?), None),
        MapScheme::Rp { n_phases, n_trials } => {
            let rp = random_phase_cost(p, n_phases, n_trials, seed)?;
            let ratio = v_op / rp.mean;
            (finite(ratio), finite(ratio * rp.std_err / rp.mean))
        }
    })
}

pub fn grid_axis(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|k| (2.0 * k as f64 - m) / m).collect()
}

/// Ratio map over the `N×N` grid of `(|γ|cos φ, |γ|sin φ)`. Cells with
/// `|γ| = 0` or `|γ| > 0.995` are absent.
pub fn ratio_map(scheme: MapScheme, grid: usize, n_mean: f64, seed: u64) -> Result<SchemeRatioMap> {
    if grid < 2 {
        return Err(Error::Domain("ratio map needs at least a 2×2 grid".into()));
    }
    let axis = grid_axis(grid);
    let cells = (0..grid * grid)
        .into_par_iter()
        .map(|idx| -> Result<RatioCell> {
            let (gc, gs) = (axis[idx / grid], axis[idx % grid]);
            let mut cell = RatioCell {
                gamma_cos: gc,
                gamma_sin: gs,
                value: None,
                std_err: None,
            };
            let g = cell.gamma_abs();
            if g == 0.0 || g > GAMMA_EDGE {
                return Ok(cell);
            }
            let p = SpatialParams::new(n_mean, g, cell.phi())?;
            (cell.value, cell.std_err) = scheme_value(scheme, &p, cell_seed(seed, idx))?;
            Ok(cell)
        })
        .collect::<Result<Vec<_>>>()?;
    let (n_phases, n_trials) = match scheme {
        MapScheme::Rp { n_phases, n_trials } => (Some(n_phases), Some(n_trials)),
        _ => (None, None),
    };
    Ok(SchemeRatioMap {
        metadata: MapMetadata {
            scheme: scheme.name(),
            n_mean,
            grid,
            n_phases,
            n_trials,
            seed,
        },
        cells,
    })
}

/// Values of `scheme` along `|γ|` at fixed `φ`, one cell seed per point.
pub fn ratio_line(scheme: MapScheme, n_mean: f64, phi: f64, gammas: &[f64], seed: u64) -> Result<Vec<RatioCell>> {
    gammas
        .par_iter()
        .enumerate()
        .map(|(k, &g)| {
            let p = SpatialParams::new(n_mean, g, phi)?;
            let (value, std_err) = scheme_value(scheme, &p, cell_seed(seed, k))?;
            Ok(RatioCell {
                gamma_cos: g * phi.cos(),
                gamma_sin: g * phi.sin(),
                value,
                std_err,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn ft_cost_is_finite_and_worse_than_optimal() {
        let p = SpatialParams::new(0.01, 0.5, FRAC_PI_4).unwrap();
        let v = ft_scheme_cost(&p).unwrap();
        let op = weighted_scheme(&p, false).unwrap().cost_star;
        assert!(v.is_finite() && v > 0.0);
        assert!(op / v <= 0.017);
    }

    #[test]
    fn random_phase_replays() {
        let p = SpatialParams::new(0.01, 0.5, 1.0).unwrap();
        let a = random_phase_cost(&p, 10, 4, 99).unwrap();
        let b = random_phase_cost(&p, 10, 4, 99).unwrap();
        assert_eq!(a, b);
        let op = weighted_scheme(&p, false).unwrap().cost_star;
        assert!(a.trial_costs.iter().all(|&c| c >= op * (1.0 - 1e-6)));
        assert!(random_phase_cost(&p, 0, 4, 99).is_err());
    }

    #[test]
    fn small_map_layout_and_symmetry() {
        let m = ratio_map(MapScheme::Ft, 5, 0.01, 0).unwrap();
        assert_eq!(m.cells.len(), 25);
        assert!(m.get(2, 2).value.is_none());
        // corners lie outside the disk
        assert!(m.get(0, 0).value.is_none());
        for i in 0..5 {
            for j in 0..5 {
                match (m.get(i, j).value, m.get(i, 4 - j).value) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-8),
                    (a, b) => assert_eq!(a.is_some(), b.is_some()),
                }
            }
        }
        assert!(m.max_value().unwrap() <= 1.0 + 1e-6);
    }

    #[test]
    fn grid_is_symmetric() {
        let a = grid_axis(41);
        for k in 0..41 {
            assert_eq!(a[k], -a[40 - k]);
        }
        assert_eq!(a[20], 0.0);
    }
}
