//! Truncated multimode Fock bases and exact ladder-operator action.

use std::collections::HashMap;

use crate::linalg::{CMatrix, C64};

/// Keeps every occupation `(n1, …, nk)` with `Σ n_i ≤ max_total_photons`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct FockCutoff {
    pub max_total_photons: usize,
}

impl FockCutoff {
    pub fn new(max_total_photons: usize) -> Self {
        Self { max_total_photons }
    }
}

/// The truncated basis, enumerated lexicographically by `(n1, n2, …)`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    cutoff: FockCutoff,
    states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl FockBasis {
    pub fn new(n_modes: usize, cutoff: FockCutoff) -> Self {
        let mut states = Vec::new();
        let mut current = vec![0; n_modes];
        enumerate(0, cutoff.max_total_photons, &mut current, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            n_modes,
            cutoff,
            states,
            index,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[usize] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Matrix of a single ladder operator; `ladder` indexes `(a1, a1†, a2, …)`.
    /// States pushed above the cutoff are dropped.
    pub fn ladder_matrix(&self, ladder: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (col, s) in self.states.iter().enumerate() {
            if let Some((amp, out)) = apply_ladder(ladder, s) {
                if let Some(row) = self.index_of(&out) {
                    m[(row, col)] += C64::new(amp, 0.0);
                }
            }
        }
        m
    }

    /// Photon-number operator of one mode (diagonal).
    pub fn number_matrix(&self, mode: usize) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.states.iter().map(|s| C64::new(s[mode] as f64, 0.0)),
        ))
    }

    /// Representation of a passive mode unitary `u` on the truncated space.
    ///
    /// Each basis ket `Π_j (b_j†)^{n_j}/√(n_j!) |0⟩` of the input modes is
    /// expanded with `b_j† = Σ_k u_kj a_k†`. Passive maps preserve the total
    /// photon number, so the lift is exact and block-unitary by sector.
    pub fn lift_passive(&self, u: &CMatrix) -> CMatrix {
        let k = self.n_modes;
        assert_eq!(u.nrows(), k, "mode unitary must match the basis mode count");
        let mut lifted = CMatrix::zeros(self.dim(), self.dim());
        for (col, occ) in self.states.iter().enumerate() {
            // monomial exponents of the creation operators → coefficient
            let mut poly: HashMap<Vec<usize>, C64> = HashMap::new();
            poly.insert(vec![0; k], C64::new(1.0, 0.0));
            let mut norm = 1.0;
            for (j, &count) in occ.iter().enumerate() {
                norm *= factorial(count);
                for _ in 0..count {
                    let mut next: HashMap<Vec<usize>, C64> = HashMap::with_capacity(poly.len() * k);
                    for (mono, coeff) in &poly {
                        for target in 0..k {
                            let w = u[(target, j)];
                            if w == C64::new(0.0, 0.0) {
                                continue;
                            }
                            let mut m = mono.clone();
                            m[target] += 1;
                            *next.entry(m).or_insert(C64::new(0.0, 0.0)) += coeff * w;
                        }
                    }
                    poly = next;
                }
            }
            let inv_norm = 1.0 / norm.sqrt();
            for (mono, coeff) in poly {
                let amp = mono.iter().map(|&m| factorial(m)).product::<f64>().sqrt();
                if let Some(row) = self.index_of(&mono) {
                    lifted[(row, col)] += coeff * amp * inv_norm;
                }
            }
        }
        lifted
    }
}

fn enumerate(mode: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=remaining {
        current[mode] = n;
        enumerate(mode + 1, remaining - n, current, out);
    }
    current[mode] = 0;
}

/// Applies ladder operator `ladder` to an occupation vector, without truncation.
/// Returns `None` when an annihilator hits an empty mode.
pub fn apply_ladder(ladder: usize, occupation: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mode = ladder / 2;
    let mut out = occupation.to_vec();
    if ladder % 2 == 0 {
        let n = occupation[mode];
        if n == 0 {
            return None;
        }
        out[mode] = n - 1;
        Some(((n as f64).sqrt(), out))
    } else {
        let n = occupation[mode];
        out[mode] = n + 1;
        Some((((n + 1) as f64).sqrt(), out))
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
