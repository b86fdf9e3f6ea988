//! Small dense complex matrices with the validation needed for density
//! matrices and unitaries.
//!
//! All values are immutable: every operation returns a fresh matrix. Storage
//! is row-major.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferogram::hermitian_eigen;

/// Default validation tolerance for [`validate_density`] and
/// [`validate_unitary`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a `dim`×`dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadShape("dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::BadShape(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(k / dim, k % dim));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|row| row.len() != dim) {
            return Err(Error::BadShape("rows must all have length N".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Diagonal matrix with the given entries. Panics on an empty slice.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * m.dim + i] = z;
        }
        m
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&entries)
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(a.len(), b.len()));
        }
        let dim = a.len();
        let data = (0..dim * dim).map(|k| a[k / dim] * b[k % dim].conj()).collect();
        Self::new(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal_entries(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let data = (0..n * n).map(|k| self.data[(k % n) * n + k / n].conj()).collect();
        Self { dim: n, data }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        let n = self.dim;
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Hermitian part (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&adj.data).map(|(a, b)| (a + b) * 0.5).collect(),
        }
    }

    pub fn hermiticity_violation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::BadShape(format!("matrix JSON: {e}")))?;
        file.try_into()
    }

    /// Serializes to the `{ "dim", "re", "im" }` literal format.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&MatrixFile::from(self)).expect("matrix literal serializes")
    }
}

/// On-disk matrix literal: `{ "dim": N, "re": [[..]], "im": [[..]] }`, both
/// arrays N×N and row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        let n = file.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&file.re) || !square(&file.im) {
            return Err(Error::BadShape(format!("\"re\" and \"im\" must both be {n}x{n}")));
        }
        let data = file
            .re
            .iter()
            .flatten()
            .zip(file.im.iter().flatten())
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(n, data)
    }
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim;
        let rows = |f: fn(Complex64) -> f64| (0..n).map(|i| (0..n).map(|j| f(m.get(i, j))).collect()).collect();
        MatrixFile {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl UnitaryMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be finite and >= 0"
        )))
    }
}

/// Checks Hermiticity, unit trace and positivity (in that order).
pub fn validate_density(m: ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    check_tolerance(tol)?;
    let violation = m.hermiticity_violation();
    if violation > tol {
        return Err(Error::NotHermitian { violation });
    }
    let violation = (m.trace() - 1.0).norm();
    if violation > tol {
        return Err(Error::TraceNotOne { violation });
    }
    let (values, _) = hermitian_eigen(&m.hermitian_part())?;
    let min_eigenvalue = values.last().copied().unwrap_or(f64::INFINITY);
    if min_eigenvalue < -tol {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix {
        matrix: m,
        tolerance: tol,
    })
}

/// Accepts iff max |U†U − I| ≤ tol.
pub fn validate_unitary(m: ComplexMatrix, tol: f64) -> Result<UnitaryMatrix> {
    check_tolerance(tol)?;
    let gram = m.adjoint().mat_mul(&m)?;
    let violation = gram.max_abs_diff(&ComplexMatrix::identity(m.dim))?;
    if violation > tol {
        return Err(Error::NotUnitary { violation });
    }
    Ok(UnitaryMatrix {
        matrix: m,
        tolerance: tol,
    })
}

/// |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
pub fn pure_state_density(psi: &[Complex64]) -> Result<DensityMatrix> {
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if psi.is_empty() || norm_sqr == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !norm_sqr.is_finite() {
        return Err(Error::InvalidArgument("state vector has non-finite entries".into()));
    }
    let projector = ComplexMatrix::outer(psi, psi)?.scale(Complex64::new(1.0 / norm_sqr, 0.0));
    validate_density(projector, 1e-10)
}
