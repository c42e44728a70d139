//! Dense complex matrices and the three quantum-state containers built on them.
//!
//! Everything here is sized for a single N-level system with N in the single
//! digits, so matrices are plain row-major `Vec`s and products are the naive
//! triple loop.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Tolerance for structural invariants (norm, trace, hermiticity, unitarity).
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Smallest eigenvalue admitted in a density matrix.
pub const PSD_TOL: f64 = 1e-9;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (k, v) in values.iter().enumerate() {
            m[(k, k)] = *v;
        }
        m
    }

    /// Builds a matrix from row-major entries; fails on a non-square length or
    /// non-finite entries.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entry is not finite".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// ‖U†U − I‖ measured as the largest entry.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot * n + c);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for c in col..n {
                    let v = a[col * n + c];
                    a[r * n + c] -= factor * v;
                }
            }
        }
        det
    }

    /// True when `self + shift·I` admits a Cholesky factorization, i.e. every
    /// eigenvalue of the Hermitian part exceeds `-shift`.
    pub fn is_positive_semidefinite(&self, shift: f64) -> bool {
        let n = self.dim;
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re + shift;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Unit-norm pure state of an N-level system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("amplitude is not finite".into()));
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!(
                "state norm² is {norm}, expected 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Computational basis state |k⟩.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self { amps }
    }

    pub(crate) fn from_amps_unchecked(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies every amplitude by e^{iφ}; physically the same state.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let p = Complex64::from_polar(1.0, phi);
        Self {
            amps: self.amps.iter().map(|z| z * p).collect(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            m: CMatrix::from_fn(self.dim(), |r, c| self.amps[r] * self.amps[c].conj()),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace N×N matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if m.hermiticity_residual() > STRUCTURE_TOL {
            return Err(Error::InvalidInput("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!("density matrix trace is {tr}")));
        }
        if !m.is_positive_semidefinite(PSD_TOL) {
            return Err(Error::InvalidInput(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Equal-weight mixture of pure states.
    pub fn mixture(states: &[StateVector]) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptyClass(0))?;
        let n = first.dim();
        let w = 1.0 / states.len() as f64;
        let mut m = CMatrix::zeros(n);
        for s in states {
            if s.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.dim(),
                });
            }
            let a = s.amplitudes();
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += a[r] * a[c].conj() * w;
                }
            }
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Tr(ρ²); 1 for pure states.
    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }
}

/// N×N unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let residual = m.unitarity_residual();
        if residual > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary (residual {residual:e})"
            )));
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim),
        }
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn determinant_of_known_matrices() {
        let m = CMatrix::from_rows(2, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        assert!((m.determinant() - c(-2.0, 0.0)).norm() < 1e-14);
        let d = CMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 1.0), c(2.0, 0.0)]);
        assert!((d.determinant() - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn psd_check_rejects_negative_eigenvalue() {
        let m = CMatrix::diagonal(&[c(1.2, 0.0), c(-0.2, 0.0)]);
        assert!(!m.is_positive_semidefinite(PSD_TOL));
        assert!(DensityMatrix::new(m).is_err());
        // a rank-deficient projector is fine
        let p = StateVector::basis(3, 1).to_density();
        assert!(p.matrix().is_positive_semidefinite(PSD_TOL));
    }

    #[test]
    fn constructors_validate() {
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).is_ok());
        let not_unitary = CMatrix::from_rows(2, vec![c(1.0, 0.0), c(1.0, 0.0), ZERO, ONE]).unwrap();
        assert!(UnitaryMatrix::new(not_unitary).is_err());
        assert!(CMatrix::from_rows(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn maximally_mixed_has_minimal_purity() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!((rho.purity() - 0.25).abs() < 1e-15);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }
}
