//! Symmetric positive-definite helpers: log-determinants and whitening.

use alloc::format;
use alloc::string::String;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math;

/// Relative eigenvalue floor, as a fraction of the largest eigenvalue.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Result of [`logdet_spd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// Natural-log determinant after flooring.
    pub value: f64,
    /// Number of eigenvalues raised to the floor.
    pub floored: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Largest `|m_ij - m_ji|`, relative to the largest absolute entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Precondition("matrix must be square"));
    }
    let a = asymmetry(m);
    if a > SYMMETRY_TOLERANCE || !a.is_finite() {
        return Err(Error::NotSymmetric { asymmetry: a });
    }
    Ok(())
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().symmetric_eigenvalues()
}

/// `ln det(m)` by symmetric eigendecomposition.
///
/// Eigenvalues below `floor * lambda_max` are raised to that value and
/// counted. A materially negative eigenvalue (beyond the floor in
/// magnitude) means the matrix is not a covariance and is an error.
pub fn logdet_spd(m: &DMatrix<f64>, floor: f64) -> Result<LogDet> {
    logdet_spd_named(m, floor, "matrix")
}

pub(crate) fn logdet_spd_named(m: &DMatrix<f64>, floor: f64, name: &str) -> Result<LogDet> {
    check_symmetric(m)?;
    let ev = symmetric_eigenvalues(m);
    let max = ev.max();
    let min = ev.min();
    if max.is_nan() || max <= 0.0 || !min.is_finite() {
        return Err(not_pd(name, min));
    }
    let cut = floor * max;
    if min < -cut.max(f64::EPSILON * max * m.nrows() as f64) {
        return Err(not_pd(name, min));
    }
    let mut value = 0.0;
    let mut floored = 0;
    for &l in ev.iter() {
        if l < cut {
            floored += 1;
            value += math::ln(cut);
        } else {
            value += math::ln(l);
        }
    }
    Ok(LogDet {
        value,
        floored,
        min_eigenvalue: min,
        max_eigenvalue: max,
    })
}

fn not_pd(name: &str, min: f64) -> Error {
    Error::NotPositiveDefinite {
        matrix: String::from(name),
        min_eigenvalue: min,
    }
}

/// `ln det(m)` from a Cholesky factor; fails unless `m` is numerically SPD.
pub fn logdet_cholesky(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| not_pd("matrix", symmetric_eigenvalues(m).min()))?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..m.nrows()).map(|i| math::ln(l[(i, i)])).sum::<f64>())
}

/// Cholesky first, eigen-floor fallback. Returns the log-determinant and
/// the number of floored eigenvalues.
pub(crate) fn logdet_robust(m: &DMatrix<f64>, floor: f64, name: &str) -> Result<(f64, usize)> {
    if let Some(chol) = m.clone().cholesky() {
        let l = chol.l_dirty();
        let v = 2.0 * (0..m.nrows()).map(|i| math::ln(l[(i, i)])).sum::<f64>();
        if v.is_finite() {
            return Ok((v, 0));
        }
    }
    let ld = logdet_spd_named(m, floor, name).map_err(|e| match e {
        Error::NotSymmetric { .. } => e,
        Error::NotPositiveDefinite { min_eigenvalue, .. } => Error::NotPositiveDefinite {
            matrix: format!("{name} (after flooring)"),
            min_eigenvalue,
        },
        other => other,
    })?;
    Ok((ld.value, ld.floored))
}

/// Whitening transform for an SPD (or nearly singular PSD) matrix `G`.
///
/// `basis = U_r diag(lambda_r)^(-1/2)` over the eigenpairs above the floor,
/// so `basis^T G basis = I_r`. When `G` is the identity to rounding the
/// transform is skipped entirely.
#[derive(Debug, Clone)]
pub struct Whitening {
    basis: Option<DMatrix<f64>>,
    eigenvalues: DVector<f64>,
    dropped: usize,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl Whitening {
    pub fn new(g: &DMatrix<f64>, floor: f64) -> Result<Self> {
        check_symmetric(g)?;
        let n = g.nrows();
        let identity_gap = (g - DMatrix::<f64>::identity(n, n)).amax();
        if identity_gap < 1e-12 {
            return Ok(Self {
                basis: None,
                eigenvalues: DVector::from_element(n, 1.0),
                dropped: 0,
                min_eigenvalue: 1.0,
                max_eigenvalue: 1.0,
            });
        }
        let eig = g.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if max.is_nan() || max <= 0.0 || min < -floor.max(f64::EPSILON * n as f64) * max {
            return Err(not_pd("self-Gram matrix", min));
        }
        let cut = floor * max;
        let keep: alloc::vec::Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] >= cut).collect();
        let r = keep.len();
        let mut basis = DMatrix::<f64>::zeros(n, r);
        let mut values = DVector::<f64>::zeros(r);
        for (c, &i) in keep.iter().enumerate() {
            let l = eig.eigenvalues[i];
            values[c] = l;
            let s = 1.0 / math::sqrt(l);
            for row in 0..n {
                basis[(row, c)] = eig.eigenvectors[(row, i)] * s;
            }
        }
        Ok(Self {
            basis: Some(basis),
            eigenvalues: values,
            dropped: n - r,
            min_eigenvalue: min,
            max_eigenvalue: max,
        })
    }

    /// Retained eigenvalues of `G`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigen-directions discarded below the floor.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// `basis^T m basis`.
    pub fn congruence(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.basis {
            None => m.clone(),
            Some(b) => {
                let mb = m * b;
                let mut out = b.transpose() * mb;
                symmetrize(&mut out);
                out
            }
        }
    }
}

/// Replace `m` by `(m + m^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
