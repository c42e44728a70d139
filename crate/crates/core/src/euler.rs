//! Generalized Euler-angle parameterization of SU(N).
//!
//! SU(N) is written recursively as
//!
//! ```text
//! SU(N) = A(2) A(3) … A(N) · SU(N−1) · exp(iλ_{N²−1} α)
//! A(k)  = exp(iλ_3 α) · exp(iλ_{(k−1)²+1} α)
//! ```
//!
//! with SU(1) = 1 and SU(N−1) acting on the top-left block. Unrolling the
//! recursion gives N²−1 single-generator factors, and each factor gets its
//! own angle slot numbered in factor order.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, UnitaryMatrix, I};
use crate::qunit::HermitianGenerator;

/// One factor exp(iλ_g α_s) of the ordered product.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerFactor {
    pub generator: HermitianGenerator,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerParameterization {
    dim: usize,
    factors: Vec<EulerFactor>,
    total_slots: usize,
}

/// Euler angles in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("Euler angle is not finite".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Generator indices of the unrolled recursion for dimension `n`, in product order.
fn generator_sequence(n: usize, out: &mut Vec<usize>) {
    if n < 2 {
        return;
    }
    for k in 2..=n {
        out.push(3);
        out.push((k - 1) * (k - 1) + 1);
    }
    generator_sequence(n - 1, out);
    out.push(n * n - 1);
}

impl EulerParameterization {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let mut indices = Vec::new();
        generator_sequence(n, &mut indices);
        let factors = indices
            .into_iter()
            .enumerate()
            .map(|(slot, g)| {
                Ok(EulerFactor {
                    generator: HermitianGenerator::new(n, g)?,
                    slot,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total_slots = factors.iter().map(|f| f.slot + 1).max().unwrap_or(0);
        Ok(Self {
            dim: n,
            factors,
            total_slots,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[EulerFactor] {
        &self.factors
    }

    /// Number of independent angles, N²−1.
    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    fn check_angles(&self, a: &AngleVector) -> Result<()> {
        if a.len() != self.total_slots {
            return Err(Error::DimensionMismatch {
                expected: self.total_slots,
                found: a.len(),
            });
        }
        Ok(())
    }

    fn factor_matrices(&self, a: &AngleVector) -> Vec<CMatrix> {
        self.factors
            .iter()
            .map(|f| f.generator.exp_i(a.0[f.slot]).into_matrix())
            .collect()
    }

    pub fn evaluate(&self, a: &AngleVector) -> Result<UnitaryMatrix> {
        self.check_angles(a)?;
        let u = self
            .factor_matrices(a)
            .iter()
            .fold(CMatrix::identity(self.dim), |acc, f| &acc * f);
        Ok(UnitaryMatrix::from_matrix_unchecked(u))
    }

    /// The unitary together with ∂U/∂α_s for every slot, from prefix and
    /// suffix products: ∂U/∂α_s = Σ_{factors f using s} P_f · (iλ_f e^{iλ_f α_s}) · S_f.
    pub fn evaluate_with_derivatives(
        &self,
        a: &AngleVector,
    ) -> Result<(UnitaryMatrix, Vec<CMatrix>)> {
        self.check_angles(a)?;
        let n = self.dim;
        let mats = self.factor_matrices(a);
        let k = mats.len();

        // prefix[i] = F_0 … F_{i−1}, suffix[i] = F_{i+1} … F_{k−1}
        let mut prefix = Vec::with_capacity(k + 1);
        prefix.push(CMatrix::identity(n));
        for m in &mats {
            let next = prefix.last().map(|p| p * m).unwrap_or_else(|| m.clone());
            prefix.push(next);
        }
        let mut suffix = vec![CMatrix::identity(n); k];
        for i in (0..k.saturating_sub(1)).rev() {
            suffix[i] = &mats[i + 1] * &suffix[i + 1];
        }

        let mut derivs = vec![CMatrix::zeros(n); self.total_slots];
        for (i, f) in self.factors.iter().enumerate() {
            let d_factor = &f.generator.matrix().scale(I) * &mats[i];
            let term = &(&prefix[i] * &d_factor) * &suffix[i];
            derivs[f.slot] = derivs[f.slot].add(&term);
        }
        let u = prefix.pop().expect("prefix has k+1 entries");
        Ok((UnitaryMatrix::from_matrix_unchecked(u), derivs))
    }

    /// Fits angles so that the product equals `target` up to a global phase,
    /// by Levenberg–Marquardt from `starts` random initial points.
    ///
    /// Returns the best angles and the residual ‖U_fit − e^{iφ}·target‖_max
    /// with φ chosen to make e^{iφ}·target special unitary.
    pub fn fit<R: Rng>(
        &self,
        target: &UnitaryMatrix,
        starts: usize,
        rng: &mut R,
    ) -> Result<(AngleVector, f64)> {
        if target.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: target.dim(),
            });
        }
        let det = target.matrix().determinant();
        let phase = Complex64::from_polar(1.0, -det.arg() / self.dim as f64);
        let special = target.matrix().scale(phase);

        let mut best: Option<(AngleVector, f64)> = None;
        for _ in 0..starts.max(1) {
            let init = (0..self.total_slots)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let angles = self.levenberg_marquardt(&special, AngleVector(init))?;
            let residual = self.evaluate(&angles)?.matrix().max_abs_diff(&special);
            let better = best.as_ref().is_none_or(|(_, r)| residual < *r);
            if better {
                best = Some((angles, residual));
            }
            if residual < 1e-12 {
                break;
            }
        }
        Ok(best.expect("at least one start"))
    }

    fn levenberg_marquardt(&self, target: &CMatrix, mut angles: AngleVector) -> Result<AngleVector> {
        let k = self.total_slots;
        let residual_of = |u: &CMatrix| -> Vec<f64> {
            u.as_slice()
                .iter()
                .zip(target.as_slice())
                .flat_map(|(a, b)| {
                    let d = a - b;
                    [d.re, d.im]
                })
                .collect()
        };
        let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

        let mut mu = 1e-3;
        let (u, mut derivs) = self.evaluate_with_derivatives(&angles)?;
        let mut r = residual_of(u.matrix());
        let mut c = cost(&r);
        for _ in 0..500 {
            if c < 1e-28 {
                break;
            }
            let cols: Vec<Vec<f64>> = derivs
                .iter()
                .map(|d| d.as_slice().iter().flat_map(|z| [z.re, z.im]).collect())
                .collect();
            let mut jtj = vec![0.0; k * k];
            let mut jtr = vec![0.0; k];
            for a in 0..k {
                jtr[a] = cols[a].iter().zip(&r).map(|(x, y)| x * y).sum();
                for b in a..k {
                    let v: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                    jtj[a * k + b] = v;
                    jtj[b * k + a] = v;
                }
            }
            let mut improved = false;
            for _ in 0..20 {
                let mut system = jtj.clone();
                for a in 0..k {
                    system[a * k + a] += mu * (1.0 + jtj[a * k + a]);
                }
                let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
                let Some(step) = solve_dense(k, system, rhs) else {
                    mu *= 10.0;
                    continue;
                };
                let trial = AngleVector(angles.0.iter().zip(&step).map(|(a, s)| a + s).collect());
                let (u_t, d_t) = self.evaluate_with_derivatives(&trial)?;
                let r_t = residual_of(u_t.matrix());
                let c_t = cost(&r_t);
                if c_t < c {
                    angles = trial;
                    derivs = d_t;
                    r = r_t;
                    c = c_t;
                    mu = (mu * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
                mu *= 10.0;
            }
            if !improved {
                break;
            }
        }
        Ok(angles)
    }
}

/// Solves a small dense real system by Gaussian elimination with partial pivoting.
fn solve_dense(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}
