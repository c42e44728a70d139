//! Forward pass of the qudit classifier.
//!
//! A sample x is encoded as |ψ(x)⟩ = e^{iS̄₃θ}H|0⟩ with θ = w·x, rotated by
//! U(α) and read out in the computational basis; the predicted class is the
//! most probable outcome. For the loss, all samples of class k are combined
//! into one ensemble ρ_k and the class error is E_k = 1 − ⟨k|Uρ_kU†|k⟩.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::euler::{AngleVector, EulerParameterization};
use crate::linalg::{CMatrix, DensityMatrix, StateVector, UnitaryMatrix};
use crate::qunit::{
    apply_unitary, argmax_lowest, encode_angle, encoding_angle, outcome_probabilities,
};

/// Trainable parameters: encoding weights w (length d) and Euler angles α
/// (length N²−1).
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterState {
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
    pub seed: u64,
}

impl ParameterState {
    pub fn zeros(d: usize, n: usize) -> Self {
        Self {
            w: vec![0.0; d],
            alpha: vec![0.0; n * n - 1],
            seed: 0,
        }
    }

    /// All parameters in gradient order: w first, then α.
    pub fn flat(&self) -> Vec<f64> {
        self.w.iter().chain(&self.alpha).copied().collect()
    }

    pub fn from_flat(flat: &[f64], d: usize, seed: u64) -> Self {
        Self {
            w: flat[..d].to_vec(),
            alpha: flat[d..].to_vec(),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len() + self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, d: usize, n: usize) -> Result<()> {
        if self.w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.w.len(),
            });
        }
        if self.alpha.len() != n * n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n * n - 1,
                found: self.alpha.len(),
            });
        }
        if self.w.iter().chain(&self.alpha).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameter is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassEnsemble {
    pub class_index: usize,
    pub rho: DensityMatrix,
    pub sample_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardReport {
    pub per_class_error: Vec<f64>,
    pub class_counts: Vec<usize>,
    pub total_error: f64,
    pub per_sample_predictions: Vec<usize>,
}

impl ForwardReport {
    /// Percentage of samples whose prediction equals their label.
    pub fn accuracy(&self, split: &LabeledDataset) -> f64 {
        accuracy_percent(&self.per_sample_predictions, split)
    }
}

pub(crate) fn accuracy_percent(predictions: &[usize], split: &LabeledDataset) -> f64 {
    if split.is_empty() {
        return 0.0;
    }
    let correct = predictions
        .iter()
        .zip(split.rows())
        .filter(|(p, r)| **p == r.label)
        .count();
    100.0 * correct as f64 / split.len() as f64
}

/// ρ = (1/m) Σ_i |ψ(x_i)⟩⟨ψ(x_i)|.
pub fn class_density(samples: &[&[f64]], w: &[f64], n: usize) -> Result<DensityMatrix> {
    if samples.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let states = samples
        .iter()
        .map(|x| Ok(encode_angle(encoding_angle(x, w)?, n)))
        .collect::<Result<Vec<StateVector>>>()?;
    DensityMatrix::mixture(&states)
}

/// The classifier for a fixed number of classes.
#[derive(Clone, Debug)]
pub struct QuditClassifier {
    n: usize,
    euler: EulerParameterization,
}

impl QuditClassifier {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            euler: EulerParameterization::new(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn euler(&self) -> &EulerParameterization {
        &self.euler
    }

    pub fn unitary(&self, params: &ParameterState) -> Result<UnitaryMatrix> {
        self.euler.evaluate(&AngleVector::new(params.alpha.clone())?)
    }

    pub(crate) fn check(&self, split: &LabeledDataset, params: &ParameterState) -> Result<()> {
        if split.n_classes() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: split.n_classes(),
            });
        }
        params.validate(split.d(), self.n)?;
        if let Some(k) = split.class_counts().iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass(k));
        }
        Ok(())
    }

    /// θ_i = w·x_i for every row.
    pub(crate) fn angles(&self, split: &LabeledDataset, w: &[f64]) -> Result<Vec<f64>> {
        split.rows().iter().map(|r| encoding_angle(&r.features, w)).collect()
    }

    pub fn ensembles(&self, split: &LabeledDataset, params: &ParameterState) -> Result<Vec<ClassEnsemble>> {
        self.check(split, params)?;
        let thetas = self.angles(split, &params.w)?;
        Ok(self.ensembles_from_angles(split, &thetas))
    }

    pub(crate) fn ensembles_from_angles(&self, split: &LabeledDataset, thetas: &[f64]) -> Vec<ClassEnsemble> {
        let n = self.n;
        let mut sums = vec![CMatrix::zeros(n); n];
        let mut counts = vec![0usize; n];
        for (row, &theta) in split.rows().iter().zip(thetas) {
            let psi = encode_angle(theta, n);
            let a = psi.amplitudes();
            let m = &mut sums[row.label];
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += a[r] * a[c].conj();
                }
            }
            counts[row.label] += 1;
        }
        sums.into_iter()
            .zip(counts)
            .enumerate()
            .map(|(k, (m, count))| ClassEnsemble {
                class_index: k,
                rho: DensityMatrix::from_matrix_unchecked(
                    m.scale(num_complex::Complex64::new(1.0 / count as f64, 0.0)),
                ),
                sample_count: count,
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64], params: &ParameterState) -> Result<usize> {
        params.validate(x.len(), self.n)?;
        let u = self.unitary(params)?;
        let psi = encode_angle(encoding_angle(x, &params.w)?, self.n);
        Ok(argmax_lowest(&outcome_probabilities(&apply_unitary(&u, &psi)?)))
    }

    pub(crate) fn predictions_from_angles(&self, u: &UnitaryMatrix, thetas: &[f64]) -> Vec<usize> {
        thetas
            .iter()
            .map(|&t| {
                let out = u.matrix().mul_vec(encode_angle(t, self.n).amplitudes());
                let p: Vec<f64> = out.iter().map(|z| z.norm_sqr()).collect();
                argmax_lowest(&p)
            })
            .collect()
    }

    /// Single-shot forward pass: one density matrix per class.
    pub fn forward(&self, split: &LabeledDataset, params: &ParameterState) -> Result<ForwardReport> {
        self.check(split, params)?;
        let u = self.unitary(params)?;
        let thetas = self.angles(split, &params.w)?;
        let ensembles = self.ensembles_from_angles(split, &thetas);
        Ok(self.report(&u, &ensembles, &thetas))
    }

    pub(crate) fn report(&self, u: &UnitaryMatrix, ensembles: &[ClassEnsemble], thetas: &[f64]) -> ForwardReport {
        let um = u.matrix();
        let per_class_error: Vec<f64> = ensembles
            .iter()
            .map(|e| {
                let k = e.class_index;
                // ⟨k|UρU†|k⟩ = Σ_ab U_ka ρ_ab conj(U_kb)
                let row = um.row(k);
                let rho = e.rho.matrix();
                let mut p = 0.0;
                for a in 0..self.n {
                    for b in 0..self.n {
                        p += (row[a] * rho[(a, b)] * row[b].conj()).re;
                    }
                }
                1.0 - p
            })
            .collect();
        let class_counts: Vec<usize> = ensembles.iter().map(|e| e.sample_count).collect();
        let total: usize = class_counts.iter().sum();
        let total_error = per_class_error
            .iter()
            .zip(&class_counts)
            .map(|(e, &m)| e * m as f64)
            .sum::<f64>()
            / total as f64;
        ForwardReport {
            per_class_error,
            class_counts,
            total_error,
            per_sample_predictions: self.predictions_from_angles(u, thetas),
        }
    }

    /// Mean over samples of 1 − p_label, one state at a time. Equal to the
    /// single-shot error by linearity of the trace; kept as a cross-check.
    pub fn per_sample_error(&self, split: &LabeledDataset, params: &ParameterState) -> Result<f64> {
        self.check(split, params)?;
        let u = self.unitary(params)?;
        let mut sum = 0.0;
        for r in split.rows() {
            let psi = encode_angle(encoding_angle(&r.features, &params.w)?, self.n);
            sum += 1.0 - outcome_probabilities(&apply_unitary(&u, &psi)?)[r.label];
        }
        Ok(sum / split.len() as f64)
    }
}

pub fn predict(x: &[f64], params: &ParameterState, n: usize) -> Result<usize> {
    QuditClassifier::new(n)?.predict(x, params)
}

pub fn forward(split: &LabeledDataset, params: &ParameterState, n: usize) -> Result<ForwardReport> {
    QuditClassifier::new(n)?.forward(split, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn dataset(rows: Vec<(Vec<f64>, usize)>, n: usize) -> LabeledDataset {
        let d = rows[0].0.len();
        LabeledDataset::new(
            "toy",
            d,
            (0..n).map(|k| format!("c{k}")).collect(),
            rows.into_iter()
                .map(|(features, label)| Sample { features, label })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_sample_ensemble_is_pure() {
        let rho = class_density(&[&[0.3, -1.2]], &[0.7, 0.1], 3).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn periodic_copies_stay_pure() {
        // N odd: θ and θ + 2π give the same state
        let w = [1.0];
        let rho = class_density(&[&[0.4], &[0.4 + 2.0 * PI]], &w, 3).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_weights_give_uniform_ensemble() {
        let rho = class_density(&[&[1.0, 2.0], &[-3.0, 0.5], &[9.0, 9.0]], &[0.0, 0.0], 4).unwrap();
        for z in rho.matrix().as_slice() {
            assert!((z.re - 0.25).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
        assert!(matches!(class_density(&[], &[0.0], 2), Err(Error::EmptyClass(_))));
    }

    #[test]
    fn identity_circuit_predicts_class_zero() {
        let params = ParameterState::zeros(2, 3);
        assert_eq!(predict(&[4.0, -2.0], &params, 3).unwrap(), 0);
    }

    #[test]
    fn fitted_rotation_sends_encoded_state_to_one() {
        let x = [0.8, -0.3];
        let w = vec![0.5, 1.1];
        let psi = phase_state(&x, &w, 2);
        // target unitary mapping ψ → |1⟩: rows are ψ⊥† and ψ†
        let a = psi.amplitudes();
        let target = CMatrix::from_rows(2, vec![-a[1], a[0], a[0].conj(), a[1].conj()]).unwrap();
        let target = UnitaryMatrix::new(target).unwrap();
        let euler = EulerParameterization::new(2).unwrap();
        let (alpha, residual) = euler.fit(&target, 8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(residual < 1e-9);
        let params = ParameterState { w, alpha: alpha.into_vec(), seed: 0 };
        assert_eq!(predict(&x, &params, 2).unwrap(), 1);
    }

    fn phase_state(x: &[f64], w: &[f64], n: usize) -> StateVector {
        crate::qunit::phase_encode(x, w, n).unwrap()
    }

    #[test]
    fn prediction_ignores_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let clf = QuditClassifier::new(3).unwrap();
        for _ in 0..50 {
            let params = ParameterState {
                w: (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                alpha: (0..8).map(|_| rng.gen_range(-PI..PI)).collect(),
                seed: 0,
            };
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = clf.unitary(&params).unwrap();
            let out = apply_unitary(&u, &phase_state(&x, &params.w, 3)).unwrap();
            let shifted = out.with_global_phase(rng.gen_range(0.0..2.0 * PI));
            let a = argmax_lowest(&outcome_probabilities(&out));
            let b = argmax_lowest(&outcome_probabilities(&shifted));
            assert_eq!(a, b);
            assert_eq!(a, clf.predict(&x, &params).unwrap());
        }
    }

    #[test]
    fn identity_circuit_error_is_one_minus_inverse_n() {
        for n in [2usize, 3] {
            let rows = (0..6).map(|i| (vec![i as f64, 1.0 - i as f64], i % n)).collect();
            let ds = dataset(rows, n);
            let mut params = ParameterState::zeros(2, n);
            params.w = vec![0.37, -0.81];
            let report = forward(&ds, &params, n).unwrap();
            assert!((report.total_error - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_two_sample_circuit() {
        // θ = 0 for class 0 and θ = π for class 1 give orthogonal states
        // (1, 1)/√2 and (−i, i)/√2; a fitted rotation sends them to |0⟩, |1⟩.
        let ds = dataset(vec![(vec![0.0], 0), (vec![1.0], 1)], 2);
        let w = vec![PI];
        let s0 = phase_state(&[0.0], &w, 2);
        let s1 = phase_state(&[1.0], &w, 2);
        let a = s0.amplitudes();
        let b = s1.amplitudes();
        let target = CMatrix::from_rows(2, vec![a[0].conj(), a[1].conj(), b[0].conj(), b[1].conj()]).unwrap();
        let target = UnitaryMatrix::new(target).unwrap();
        let euler = EulerParameterization::new(2).unwrap();
        let (alpha, _) = euler.fit(&target, 8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let params = ParameterState { w, alpha: alpha.into_vec(), seed: 0 };
        let report = forward(&ds, &params, 2).unwrap();
        assert!(report.total_error.abs() < 1e-12, "E = {}", report.total_error);
        assert_eq!(report.per_sample_predictions, vec![0, 1]);
    }

    #[test]
    fn missing_class_is_rejected() {
        let ds = dataset(vec![(vec![0.0], 0), (vec![1.0], 0)], 2);
        assert!(matches!(
            forward(&ds, &ParameterState::zeros(1, 2), 2),
            Err(Error::EmptyClass(1))
        ));
        let ds = dataset(vec![(vec![0.0], 0), (vec![1.0], 1)], 2);
        assert!(matches!(
            forward(&ds, &ParameterState::zeros(2, 2), 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn total_error_is_weighted_class_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows = (0..11)
            .map(|i| (vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], usize::from(i % 3 == 0)))
            .collect();
        let ds = dataset(rows, 2);
        let params = ParameterState {
            w: vec![1.3, -0.4],
            alpha: vec![0.2, 0.9, -0.5],
            seed: 0,
        };
        let r = forward(&ds, &params, 2).unwrap();
        let m: usize = r.class_counts.iter().sum();
        let recomputed: f64 = r
            .per_class_error
            .iter()
            .zip(&r.class_counts)
            .map(|(e, &c)| e * c as f64)
            .sum::<f64>()
            / m as f64;
        assert!((recomputed - r.total_error).abs() < 1e-12);
        for e in &r.per_class_error {
            assert!((0.0..=1.0).contains(e));
        }
    }
}
