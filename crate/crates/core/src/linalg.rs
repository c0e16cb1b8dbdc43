//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.abs()))
}

/// `max |(u u†)_ij − δ_ij|`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    max_abs(&(u * u.adjoint() - CMatrix::identity(n, n)))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Row-major flattening `(α, β) → cols·α + β`.
pub fn vec_row_major(m: &CMatrix) -> DVector<C64> {
    let (r, cols) = m.shape();
    DVector::from_fn(r * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvec_row_major(v: &DVector<C64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigen-analysis of a real symmetric PSD matrix after diagonal equilibration.
///
/// Directions whose equilibrated eigenvalue falls below `rel_tol · λ_max` are
/// reported as null directions (in the original coordinates, unit length);
/// the pseudo-inverse acts on the complement. Coordinates with a zero
/// diagonal are null outright.
#[derive(Debug, Clone)]
pub struct PsdAnalysis {
    pub pseudo_inverse: DMatrix<f64>,
    pub null_directions: Vec<DVector<f64>>,
    pub min_scaled_eigenvalue: f64,
}

pub fn analyze_psd(m: &DMatrix<f64>, rel_tol: f64) -> PsdAnalysis {
    let d = m.nrows();
    let mut null_directions = Vec::new();
    let mut active = Vec::new();
    for i in 0..d {
        if m[(i, i)] > 0.0 && m[(i, i)].is_finite() {
            active.push(i);
        } else {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            null_directions.push(e);
        }
    }
    let mut pseudo_inverse = DMatrix::zeros(d, d);
    let mut min_scaled_eigenvalue = if active.len() < d { 0.0 } else { f64::INFINITY };
    if active.is_empty() {
        return PsdAnalysis {
            pseudo_inverse,
            null_directions,
            min_scaled_eigenvalue,
        };
    }
    let k = active.len();
    let scale: Vec<f64> = active.iter().map(|&i| m[(i, i)].sqrt()).collect();
    let s = DMatrix::from_fn(k, k, |a, b| {
        let (i, j) = (active[a], active[b]);
        0.5 * (m[(i, j)] + m[(j, i)]) / (scale[a] * scale[b])
    });
    let eig = s.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
        min_scaled_eigenvalue = min_scaled_eigenvalue.min(lambda);
        let u = eig.eigenvectors.column(col);
        let mut v = DVector::zeros(d);
        for a in 0..k {
            v[active[a]] = u[a] / scale[a];
        }
        if lambda <= rel_tol * lmax {
            let n = v.norm();
            null_directions.push(v / n);
        } else {
            pseudo_inverse += &v * v.transpose() / lambda;
        }
    }
    PsdAnalysis {
        pseudo_inverse,
        null_directions,
        min_scaled_eigenvalue,
    }
}

/// Whitening matrix `W` with `W m Wᵀ = 1` for a positive-definite `m`,
/// or `None` when `m` is not numerically positive definite.
pub fn whitener(m: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let d = m.nrows();
    if (0..d).any(|i| !(m[(i, i)] > 0.0) || !m[(i, i)].is_finite()) {
        return None;
    }
    let e = DVector::from_fn(d, |i, _| 1.0 / m[(i, i)].sqrt());
    let s = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]) * e[i] * e[j]);
    let eig = s.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    if eig.eigenvalues.min() <= rel_tol * lmax {
        return None;
    }
    let chol = s.cholesky()?;
    let l_inv = chol.l().try_inverse()?;
    Some(l_inv * DMatrix::from_diagonal(&e))
}

pub fn trace_real(m: &DMatrix<f64>) -> f64 {
    m.diagonal().sum()
}
