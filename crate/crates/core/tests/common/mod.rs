#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qunit_core::dataset::Sample;
use qunit_core::{CMatrix, LabeledDataset, ParameterState, UnitaryMatrix};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| m[(r, c)])
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// R's diagonal folded back into Q.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let m = CMatrix::from_fn(n, |i, j| {
        let d = r[(j, j)];
        q[(i, j)] * d / d.norm()
    });
    UnitaryMatrix::new(m).expect("QR factor is unitary")
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `m` samples with every one of the `n` classes present.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, d: usize, m: usize) -> LabeledDataset {
    let mut labels: Vec<usize> = (0..m).map(|i| i % n).collect();
    labels.shuffle(rng);
    let rows = labels
        .into_iter()
        .map(|label| Sample {
            features: (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            label,
        })
        .collect();
    let names = (0..n).map(|k| format!("c{k}")).collect();
    LabeledDataset::new("random", d, names, rows).unwrap()
}

pub fn random_params<R: Rng>(rng: &mut R, n: usize, d: usize) -> ParameterState {
    ParameterState {
        w: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        alpha: (0..n * n - 1)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect(),
        seed: 0,
    }
}

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
