//! Full-batch gradient descent on the single-shot error.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{accuracy_percent, ForwardReport, ParameterState, QuditClassifier};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::euler::AngleVector;
use crate::qunit::{encode_angle, SpinDiagonal};

/// Half-width of the uniform initialization interval.
pub const INIT_HALF_WIDTH: f64 = 0.1;
/// Step for central finite differences.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    Zeros,
    UniformSmall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Convergence is tested only from this epoch on.
    pub min_epochs: usize,
    pub convergence_window: usize,
    pub convergence_delta: f64,
    pub init_scheme: InitScheme,
    pub seed: u64,
    pub gradient_mode: GradientMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.002,
            max_epochs: 60_000,
            min_epochs: 20_000,
            convergence_window: 20,
            convergence_delta: 1e-6,
            init_scheme: InitScheme::UniformSmall,
            seed: 0,
            gradient_mode: GradientMode::Analytic,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "learning rate must be a non-negative number, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 || self.convergence_window == 0 {
            return Err(Error::InvalidInput(
                "max_epochs and convergence_window must be positive".into(),
            ));
        }
        if self.convergence_delta.is_nan() || self.convergence_delta < 0.0 {
            return Err(Error::InvalidInput("convergence_delta must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub error: f64,
    pub train_accuracy: f64,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
    pub final_params: ParameterState,
    pub converged: bool,
}

impl TrainLog {
    pub fn final_record(&self) -> &EpochRecord {
        self.records.last().expect("a successful run logs at least one epoch")
    }
}

pub fn initial_params(d: usize, n: usize, scheme: InitScheme, seed: u64) -> ParameterState {
    let mut p = ParameterState::zeros(d, n);
    p.seed = seed;
    if scheme == InitScheme::UniformSmall {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in p.w.iter_mut().chain(p.alpha.iter_mut()) {
            *v = rng.gen_range(-INIT_HALF_WIDTH..=INIT_HALF_WIDTH);
        }
    }
    p
}

impl QuditClassifier {
    /// Forward report plus the analytic gradient (∂E/∂w, ∂E/∂α) from one pass.
    ///
    /// ∂E/∂α_s = −(2/M) Σ_k m_k Re⟨k|∂U_s ρ_k U†|k⟩, and for the encoding weights
    /// ∂E/∂w_j = −(1/M) Σ_k m_k Tr(U†|k⟩⟨k|U ∂ρ_k/∂w_j) with
    /// ∂ρ_k/∂w_j = (1/m_k) Σ_i x_ij · i[S̄₃, |ψ_i⟩⟨ψ_i|]. The trace collapses per
    /// sample to −2 Im(conj((Uψ_i)_k) (US̄₃ψ_i)_k), so no d×N×N tensor is formed.
    pub fn forward_with_gradient(
        &self,
        split: &LabeledDataset,
        params: &ParameterState,
    ) -> Result<(ForwardReport, Vec<f64>)> {
        self.check(split, params)?;
        let n = self.n();
        let d = split.d();
        let thetas = self.angles(split, &params.w)?;
        let ensembles = self.ensembles_from_angles(split, &thetas);
        let (u, du) = self
            .euler()
            .evaluate_with_derivatives(&AngleVector::new(params.alpha.clone())?)?;
        let report = self.report(&u, &ensembles, &thetas);
        let m_total = split.len() as f64;
        let um = u.matrix();

        let mut grad = vec![0.0; d + n * n - 1];

        // α block. v_k = ρ_k U†|k⟩ so that ⟨k|∂U ρ_k U†|k⟩ = Σ_a ∂U_ka v_k[a].
        for e in &ensembles {
            let k = e.class_index;
            let rho = e.rho.matrix();
            let v: Vec<Complex64> = (0..n)
                .map(|a| (0..n).map(|b| rho[(a, b)] * um[(k, b)].conj()).sum())
                .collect();
            let weight = e.sample_count as f64 / m_total;
            for (s, ds) in du.iter().enumerate() {
                let z: Complex64 = ds.row(k).iter().zip(&v).map(|(x, y)| x * y).sum();
                grad[d + s] -= 2.0 * weight * z.re;
            }
        }

        // w block
        let spin = SpinDiagonal::new(n)?;
        let sv = spin.values();
        for (row, &theta) in split.rows().iter().zip(&thetas) {
            let k = row.label;
            let psi = encode_angle(theta, n);
            let a = psi.amplitudes();
            let urow = um.row(k);
            let mut phi = Complex64::new(0.0, 0.0);
            let mut chi = Complex64::new(0.0, 0.0);
            for j in 0..n {
                phi += urow[j] * a[j];
                chi += urow[j] * a[j] * sv[j];
            }
            let dp_dtheta = -2.0 * (phi.conj() * chi).im;
            for (g, x) in grad[..d].iter_mut().zip(&row.features) {
                *g -= x * dp_dtheta / m_total;
            }
        }
        Ok((report, grad))
    }

    /// Central finite differences of the single-shot error, step [`FD_STEP`].
    pub fn finite_difference_gradient(
        &self,
        split: &LabeledDataset,
        params: &ParameterState,
    ) -> Result<Vec<f64>> {
        let d = split.d();
        let flat = params.flat();
        let mut grad = Vec::with_capacity(flat.len());
        for i in 0..flat.len() {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[i] += FD_STEP;
            minus[i] -= FD_STEP;
            let e_plus = self
                .forward(split, &ParameterState::from_flat(&plus, d, params.seed))?
                .total_error;
            let e_minus = self
                .forward(split, &ParameterState::from_flat(&minus, d, params.seed))?
                .total_error;
            grad.push((e_plus - e_minus) / (2.0 * FD_STEP));
        }
        Ok(grad)
    }

    pub fn gradient(
        &self,
        split: &LabeledDataset,
        params: &ParameterState,
        mode: GradientMode,
    ) -> Result<Vec<f64>> {
        match mode {
            GradientMode::Analytic => Ok(self.forward_with_gradient(split, params)?.1),
            GradientMode::FiniteDifference => self.finite_difference_gradient(split, params),
        }
    }

    pub fn train(&self, split: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainLog> {
        cfg.validate()?;
        let mut params = initial_params(split.d(), self.n(), cfg.init_scheme, cfg.seed);
        self.check(split, &params)?;

        let mut records: Vec<EpochRecord> = Vec::new();
        let mut converged = false;
        for epoch in 0..cfg.max_epochs {
            let started = Instant::now();
            let (report, grad) = match cfg.gradient_mode {
                GradientMode::Analytic => self.forward_with_gradient(split, &params)?,
                GradientMode::FiniteDifference => {
                    let r = self.forward(split, &params)?;
                    (r, self.finite_difference_gradient(split, &params)?)
                }
            };
            if !report.total_error.is_finite() {
                return Err(Error::Diverged { epoch, quantity: "error" });
            }
            records.push(EpochRecord {
                epoch,
                error: report.total_error,
                train_accuracy: report.accuracy(split),
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            });

            let w = cfg.convergence_window;
            if epoch >= cfg.min_epochs.max(w) {
                let change = (report.total_error - records[epoch - w].error).abs();
                if change < cfg.convergence_delta {
                    converged = true;
                    break;
                }
            }
            if epoch + 1 == cfg.max_epochs {
                break;
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, quantity: "gradient" });
            }
            for (p, g) in params.w.iter_mut().chain(params.alpha.iter_mut()).zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
            if params.w.iter().chain(&params.alpha).any(|p| !p.is_finite()) {
                return Err(Error::Diverged { epoch, quantity: "parameters" });
            }
        }
        Ok(TrainLog {
            records,
            final_params: params,
            converged,
        })
    }

    pub fn evaluate(&self, split: &LabeledDataset, params: &ParameterState) -> Result<Evaluation> {
        if split.n_classes() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: split.n_classes(),
            });
        }
        params.validate(split.d(), self.n())?;
        let thetas = self.angles(split, &params.w)?;
        let u = self.unitary(params)?;
        let predictions = self.predictions_from_angles(&u, &thetas);
        Ok(Evaluation::from_predictions(&predictions, split))
    }
}

/// Aggregate and per-class accuracy, in percent.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub per_class_accuracy: Vec<f64>,
    pub correct: usize,
    pub total: usize,
}

impl Evaluation {
    pub fn from_predictions(predictions: &[usize], split: &LabeledDataset) -> Self {
        let n = split.n_classes();
        let mut hits = vec![0usize; n];
        let mut seen = vec![0usize; n];
        for (p, r) in predictions.iter().zip(split.rows()) {
            seen[r.label] += 1;
            if *p == r.label {
                hits[r.label] += 1;
            }
        }
        Self {
            accuracy: accuracy_percent(predictions, split),
            per_class_accuracy: hits
                .iter()
                .zip(&seen)
                .map(|(&h, &s)| if s == 0 { 0.0 } else { 100.0 * h as f64 / s as f64 })
                .collect(),
            correct: hits.iter().sum(),
            total: split.len(),
        }
    }
}

pub fn gradient(
    split: &LabeledDataset,
    params: &ParameterState,
    n: usize,
    mode: GradientMode,
) -> Result<Vec<f64>> {
    QuditClassifier::new(n)?.gradient(split, params, mode)
}

pub fn train(split: &LabeledDataset, n: usize, cfg: &TrainConfig) -> Result<TrainLog> {
    QuditClassifier::new(n)?.train(split, cfg)
}

pub fn evaluate(split: &LabeledDataset, params: &ParameterState, n: usize) -> Result<Evaluation> {
    QuditClassifier::new(n)?.evaluate(split, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
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

    fn random_case(rng: &mut ChaCha8Rng, n: usize, d: usize, m: usize) -> (LabeledDataset, ParameterState) {
        let rows = (0..m)
            .map(|i| ((0..d).map(|_| rng.gen_range(-1.5..1.5)).collect(), i % n))
            .collect();
        let params = ParameterState {
            w: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            alpha: (0..n * n - 1).map(|_| rng.gen_range(-PI..PI)).collect(),
            seed: 0,
        };
        (dataset(rows, n), params)
    }

    #[test]
    fn analytic_matches_finite_differences_small_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (ds, params) = random_case(&mut rng, 2, 2, 4);
        let clf = QuditClassifier::new(2).unwrap();
        let a = clf.gradient(&ds, &params, GradientMode::Analytic).unwrap();
        let f = clf.gradient(&ds, &params, GradientMode::FiniteDifference).unwrap();
        assert_eq!(a.len(), 2 + 3);
        for (x, y) in a.iter().zip(&f) {
            assert!((x - y).abs() < 1e-5, "{a:?} vs {f:?}");
        }
    }

    #[test]
    fn diagonal_slots_are_flat_at_identity_with_diagonal_ensembles() {
        // two antipodal samples per class make ρ_k diagonal: (θ, θ+π) at N=2
        let rows = vec![
            (vec![0.3], 0),
            (vec![0.3 + PI], 0),
            (vec![1.1], 1),
            (vec![1.1 + PI], 1),
        ];
        let ds = dataset(rows, 2);
        let clf = QuditClassifier::new(2).unwrap();
        let params = ParameterState { w: vec![1.0], alpha: vec![0.0; 3], seed: 0 };
        for e in clf.ensembles(&ds, &params).unwrap() {
            let m = e.rho.matrix();
            assert!(m[(0, 1)].norm() < 1e-12);
        }
        let g = clf.gradient(&ds, &params, GradientMode::Analytic).unwrap();
        assert!(g[1].abs() < 1e-12 && g[3].abs() < 1e-12, "{g:?}");
        let f = clf.gradient(&ds, &params, GradientMode::FiniteDifference).unwrap();
        assert!(f[1].abs() < 1e-9 && f[3].abs() < 1e-9);
    }

    #[test]
    fn zero_features_give_zero_weight_gradient() {
        let rows = vec![(vec![0.0, 0.0], 0), (vec![0.0, 0.0], 1), (vec![0.0, 0.0], 2)];
        let ds = dataset(rows, 3);
        let params = ParameterState {
            w: vec![0.4, -0.2],
            alpha: (0..8).map(|i| 0.1 * i as f64).collect(),
            seed: 0,
        };
        let g = gradient(&ds, &params, 3, GradientMode::Analytic).unwrap();
        assert_eq!(&g[..2], &[0.0, 0.0]);
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ds, _) = random_case(&mut rng, 2, 3, 8);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 30,
            convergence_delta: 0.0,
            seed: 4,
            ..TrainConfig::default()
        };
        let log = train(&ds, 2, &cfg).unwrap();
        assert_eq!(log.records.len(), 30);
        assert_eq!(log.final_params, initial_params(3, 2, InitScheme::UniformSmall, 4));
        assert!(log.records.iter().all(|r| r.error == log.records[0].error));
    }

    #[test]
    fn zeros_init_starts_at_uninformative_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2usize, 3] {
            let (ds, _) = random_case(&mut rng, n, 2, 9);
            let cfg = TrainConfig {
                init_scheme: InitScheme::Zeros,
                max_epochs: 1,
                ..TrainConfig::default()
            };
            let log = train(&ds, n, &cfg).unwrap();
            assert!((log.records[0].error - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_toy_set_is_learned() {
        // θ-separable with w = 1: class 0 near θ ≈ 0, class 1 near θ ≈ 1.6
        let rows = vec![
            (vec![0.0, 0.1], 0),
            (vec![0.2, -0.1], 0),
            (vec![1.5, 0.0], 1),
            (vec![1.7, 0.1], 1),
        ];
        let ds = dataset(rows, 2);
        let cfg = TrainConfig {
            learning_rate: 0.5,
            max_epochs: 200,
            convergence_delta: 0.0,
            seed: 1,
            ..TrainConfig::default()
        };
        let log = train(&ds, 2, &cfg).unwrap();
        let first = log.records[0].error;
        let last = log.final_record();
        assert!(last.error < first, "{first} → {}", last.error);
        assert_eq!(last.train_accuracy, 100.0);
        let eval = evaluate(&ds, &log.final_params, 2).unwrap();
        assert_eq!(eval.accuracy, 100.0);
    }

    #[test]
    fn convergence_rule_stops_early() {
        let rows = vec![(vec![1.0], 0), (vec![2.0], 1)];
        let ds = dataset(rows, 2);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 500,
            min_epochs: 0,
            convergence_window: 5,
            convergence_delta: 1e-9,
            ..TrainConfig::default()
        };
        let log = train(&ds, 2, &cfg).unwrap();
        assert!(log.converged);
        assert_eq!(log.records.len(), 6);

        let delayed = TrainConfig { min_epochs: 40, ..cfg };
        let log = train(&ds, 2, &delayed).unwrap();
        assert_eq!(log.records.len(), 41);
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let rows = vec![(vec![1e300], 0), (vec![-1e300], 1)];
        let ds = dataset(rows, 2);
        let cfg = TrainConfig {
            learning_rate: 1e300,
            max_epochs: 10,
            convergence_delta: 0.0,
            seed: 3,
            ..TrainConfig::default()
        };
        match train(&ds, 2, &cfg) {
            Err(Error::Diverged { epoch, .. }) => assert!(epoch < 10),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_config() {
        let cfg = TrainConfig { learning_rate: -1.0, ..TrainConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig { convergence_delta: f64::NAN, ..TrainConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn evaluation_counts() {
        let rows = vec![(vec![0.0], 0), (vec![0.0], 0), (vec![0.0], 1), (vec![0.0], 1)];
        let ds = dataset(rows, 2);
        // identity circuit on uniform states predicts class 0 everywhere
        let e = evaluate(&ds, &ParameterState::zeros(1, 2), 2).unwrap();
        assert_eq!(e.accuracy, 50.0);
        assert_eq!(e.per_class_accuracy, vec![100.0, 0.0]);
        assert_eq!((e.correct, e.total), (2, 4));
    }
}
