//! State preparation, generators and measurement for a single N-level system.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, StateVector, UnitaryMatrix, I, ONE};

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension(n))
    } else {
        Ok(())
    }
}

/// Generalized Hadamard (discrete Fourier transform): entry (k, j) is
/// e^{i2πjk/N}/√N.
pub fn generalized_hadamard(n: usize) -> Result<UnitaryMatrix> {
    check_dim(n)?;
    let norm = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n, |k, j| {
        Complex64::from_polar(norm, 2.0 * PI * ((j * k) % n) as f64 / n as f64)
    });
    Ok(UnitaryMatrix::from_matrix_unchecked(m))
}

/// The spin-z diagonal diag(−(N−1)/2, …, (N−1)/2) that carries the encoded phase.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinDiagonal {
    values: Vec<f64>,
}

impl SpinDiagonal {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        let offset = (n as f64 - 1.0) / 2.0;
        Ok(Self {
            values: (0..n).map(|k| k as f64 - offset).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matrix(&self) -> CMatrix {
        let d: Vec<_> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        CMatrix::diagonal(&d)
    }

    /// exp(i·S̄₃·θ), evaluated elementwise.
    pub fn exp_i(&self, theta: f64) -> UnitaryMatrix {
        let d: Vec<_> = self
            .values
            .iter()
            .map(|&v| Complex64::from_polar(1.0, v * theta))
            .collect();
        UnitaryMatrix::from_matrix_unchecked(CMatrix::diagonal(&d))
    }
}

/// θ = Σ_j w_j x_j with the length and finiteness checks of the encoder.
pub fn encoding_angle(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidInput("feature vector is empty".into()));
    }
    if x.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: x.len(),
        });
    }
    if x.iter().chain(w).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature or weight".into()));
    }
    Ok(x.iter().zip(w).map(|(a, b)| a * b).sum())
}

/// Z(θ)·H|0⟩ for an already-computed angle; amplitude k is e^{iθ(k−(N−1)/2)}/√N.
pub fn encode_angle(theta: f64, n: usize) -> StateVector {
    let norm = 1.0 / (n as f64).sqrt();
    let offset = (n as f64 - 1.0) / 2.0;
    StateVector::from_amps_unchecked(
        (0..n)
            .map(|k| Complex64::from_polar(norm, theta * (k as f64 - offset)))
            .collect(),
    )
}

/// Encodes a feature vector as e^{iS̄₃ Σ w_j x_j} H^(N) |0⟩.
pub fn phase_encode(x: &[f64], w: &[f64], n: usize) -> Result<StateVector> {
    check_dim(n)?;
    let theta = encoding_angle(x, w)?;
    Ok(encode_angle(theta, n))
}

/// Which of the three generalized Gell-Mann families a generator belongs to.
/// Levels are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// E_jk + E_kj
    Symmetric { j: usize, k: usize },
    /// −i(E_jk − E_kj)
    Antisymmetric { j: usize, k: usize },
    /// √(2/(l(l+1))) (Σ_{m<l} E_mm − l E_ll)
    Diagonal { l: usize },
}

/// One generalized Gell-Mann matrix λ_index of su(N).
///
/// Indices follow the nested convention where λ_1..λ_3 are the Pauli
/// matrices on levels (0, 1), and each new level k (0-based) appends, in
/// order, the symmetric/antisymmetric pair coupling it to levels 0..k−1 and
/// then the diagonal generator that includes it. Under this numbering the
/// generators of su(N−1) keep their indices when embedded in su(N), λ_3 is
/// diag(1, −1, 0, …), λ_{(k−1)²+1} couples levels 1 and k (1-based) through
/// σ_y, and λ_{N²−1} is the last diagonal generator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianGenerator {
    dim: usize,
    index: usize,
    kind: GeneratorKind,
}

impl HermitianGenerator {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index == 0 || index > dim * dim - 1 {
            return Err(Error::InvalidInput(format!(
                "generator index {index} outside 1..={}",
                dim * dim - 1
            )));
        }
        // index lies in [(k)², (k+1)²−1] where k is the 0-based new level
        let mut k = (index as f64).sqrt() as usize;
        while k * k > index {
            k -= 1;
        }
        while (k + 1) * (k + 1) <= index {
            k += 1;
        }
        let kind = if index == (k + 1) * (k + 1) - 1 {
            GeneratorKind::Diagonal { l: k }
        } else {
            let offset = index - k * k;
            let j = offset / 2;
            if offset.is_multiple_of(2) {
                GeneratorKind::Symmetric { j, k }
            } else {
                GeneratorKind::Antisymmetric { j, k }
            }
        };
        Ok(Self { dim, index, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    fn diagonal_entries(&self, l: usize) -> impl Iterator<Item = f64> {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        (0..self.dim).map(move |m| match m.cmp(&l) {
            std::cmp::Ordering::Less => c,
            std::cmp::Ordering::Equal => -(l as f64) * c,
            std::cmp::Ordering::Greater => 0.0,
        })
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim);
        match self.kind {
            GeneratorKind::Symmetric { j, k } => {
                m[(j, k)] = ONE;
                m[(k, j)] = ONE;
            }
            GeneratorKind::Antisymmetric { j, k } => {
                m[(j, k)] = -I;
                m[(k, j)] = I;
            }
            GeneratorKind::Diagonal { l } => {
                for (i, v) in self.diagonal_entries(l).enumerate() {
                    m[(i, i)] = Complex64::new(v, 0.0);
                }
            }
        }
        m
    }

    /// exp(i·α·λ) in closed form: a two-level rotation embedded in the
    /// identity for off-diagonal generators, elementwise phases otherwise.
    pub fn exp_i(&self, alpha: f64) -> UnitaryMatrix {
        let mut m = CMatrix::identity(self.dim);
        let (s, c) = alpha.sin_cos();
        match self.kind {
            GeneratorKind::Symmetric { j, k } => {
                m[(j, j)] = Complex64::new(c, 0.0);
                m[(k, k)] = Complex64::new(c, 0.0);
                m[(j, k)] = Complex64::new(0.0, s);
                m[(k, j)] = Complex64::new(0.0, s);
            }
            GeneratorKind::Antisymmetric { j, k } => {
                m[(j, j)] = Complex64::new(c, 0.0);
                m[(k, k)] = Complex64::new(c, 0.0);
                m[(j, k)] = Complex64::new(s, 0.0);
                m[(k, j)] = Complex64::new(-s, 0.0);
            }
            GeneratorKind::Diagonal { l } => {
                for (i, v) in self.diagonal_entries(l).enumerate() {
                    m[(i, i)] = Complex64::from_polar(1.0, alpha * v);
                }
            }
        }
        UnitaryMatrix::from_matrix_unchecked(m)
    }
}

/// All N²−1 generators, ordered by index (element 0 is λ_1).
pub fn gell_mann_basis(n: usize) -> Result<Vec<HermitianGenerator>> {
    check_dim(n)?;
    (1..n * n).map(|idx| HermitianGenerator::new(n, idx)).collect()
}

/// States a unitary can act on.
pub trait Evolve: Sized {
    fn dim(&self) -> usize;
    fn evolve(&self, u: &UnitaryMatrix) -> Self;
    /// Diagonal of the state in the computational basis.
    fn populations(&self) -> Vec<f64>;
}

impl Evolve for StateVector {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn evolve(&self, u: &UnitaryMatrix) -> Self {
        StateVector::from_amps_unchecked(u.matrix().mul_vec(self.amplitudes()))
    }

    fn populations(&self) -> Vec<f64> {
        self.amplitudes().iter().map(|z| z.norm_sqr()).collect()
    }
}

impl Evolve for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn evolve(&self, u: &UnitaryMatrix) -> Self {
        let m = u.matrix();
        DensityMatrix::from_matrix_unchecked(&(m * self.matrix()) * &m.adjoint())
    }

    fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix()[(k, k)].re).collect()
    }
}

/// U|ψ⟩ for states, UρU† for density matrices.
pub fn apply_unitary<S: Evolve>(u: &UnitaryMatrix, s: &S) -> Result<S> {
    if u.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: s.dim(),
        });
    }
    Ok(s.evolve(u))
}

/// Probabilities p_a = ⟨a|ρ|a⟩ of each computational-basis outcome.
pub fn outcome_probabilities<S: Evolve>(s: &S) -> Vec<f64> {
    s.populations()
}

/// Index of the largest probability; the lowest index wins ties.
pub fn argmax_lowest(p: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = k;
        }
    }
    best
}

/// Non-degenerate projective measurement in the computational basis, with
/// outcome a ∈ 0..N mapped to class a.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOperator {
    dim: usize,
}

impl MeasurementOperator {
    pub fn computational(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { dim: n })
    }

    pub fn outcomes(&self) -> std::ops::Range<usize> {
        0..self.dim
    }

    /// π_a = |a⟩⟨a|
    pub fn projector(&self, a: usize) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim);
        m[(a, a)] = ONE;
        m
    }

    /// Tr(π_a ρ) for every outcome, computed from the projectors.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.outcomes()
            .map(|a| (&self.projector(a) * rho.matrix()).trace().re)
            .collect()
    }
}
