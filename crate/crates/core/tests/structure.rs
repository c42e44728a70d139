mod common;

use std::f64::consts::PI;

use common::{haar_unitary, to_nalgebra};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qunit_core::classifier::class_density;
use qunit_core::euler::EulerParameterization;
use qunit_core::qunit::{
    apply_unitary, encode_angle, encoding_angle, gell_mann_basis, generalized_hadamard,
    outcome_probabilities, phase_encode,
};
use qunit_core::{AngleVector, CMatrix, DensityMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn angles_for_dims(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (usize, Vec<f64>)> {
    dims.prop_flat_map(|n| (Just(n), prop::collection::vec(-PI..PI, n * n - 1)))
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    to_nalgebra(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// exp(iαH) through an eigendecomposition of H.
fn spectral_exp(h: &CMatrix, alpha: f64) -> DMatrix<Complex64> {
    let eig = to_nalgebra(h).symmetric_eigen();
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues.map(|mu| Complex64::from_polar(1.0, alpha * mu)),
    );
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euler_products_are_special_unitary((n, angles) in angles_for_dims(2..=4)) {
        let u = EulerParameterization::new(n)
            .unwrap()
            .evaluate(&AngleVector::new(angles).unwrap())
            .unwrap();
        prop_assert!(u.matrix().unitarity_residual() <= 1e-10);
        prop_assert!((u.matrix().determinant() - Complex64::new(1.0, 0.0)).norm() <= 1e-8);
    }

    #[test]
    fn class_densities_are_valid_states(
        (n, w, xs) in (2usize..=4, 1usize..=5).prop_flat_map(|(n, d)| (
            Just(n),
            prop::collection::vec(-1.0..1.0f64, d),
            prop::collection::vec(prop::collection::vec(-5.0..5.0f64, d), 1..12),
        ))
    ) {
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let rho = class_density(&refs, &w, n).unwrap();
        let m = rho.matrix();
        prop_assert!((m.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        prop_assert!(m.hermiticity_residual() <= 1e-10);
        prop_assert!(min_eigenvalue(m) >= -1e-10);
        let p = outcome_probabilities(&rho);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn evolved_states_keep_unit_norm(
        (n, angles) in angles_for_dims(2..=4),
        theta in -50.0..50.0f64,
    ) {
        let u = EulerParameterization::new(n)
            .unwrap()
            .evaluate(&AngleVector::new(angles).unwrap())
            .unwrap();
        let out = apply_unitary(&u, &encode_angle(theta, n)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
        let p = outcome_probabilities(&out);
        prop_assert!(p.iter().all(|&v| v >= -1e-15));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn encoding_sees_only_the_weighted_sum(
        pairs in prop::collection::vec((-10.0..10.0f64, -1.0..1.0f64), 1..8),
        n in 2usize..=5,
        rotate in 0usize..8,
    ) {
        let (x, w): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let base = phase_encode(&x, &w, n).unwrap();
        let k = rotate % x.len();
        let (mut xr, mut wr) = (x.clone(), w.clone());
        xr.rotate_left(k);
        wr.rotate_left(k);
        let permuted = phase_encode(&xr, &wr, n).unwrap();
        let direct = encode_angle(encoding_angle(&x, &w).unwrap(), n);
        for ((a, b), c) in base.amplitudes().iter().zip(permuted.amplitudes()).zip(direct.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-12);
            prop_assert!((a - c).norm() <= 1e-12);
        }
    }

    #[test]
    fn generator_exponentials_match_spectral_oracle(
        (n, idx, alpha) in (2usize..=5).prop_flat_map(|n| (Just(n), 0..n * n - 1, -PI..PI))
    ) {
        let g = &gell_mann_basis(n).unwrap()[idx];
        let closed = g.exp_i(alpha);
        let oracle = spectral_exp(&g.matrix(), alpha);
        let expected = CMatrix::from_fn(n, |r, c| oracle[(r, c)]);
        prop_assert!(closed.matrix().max_abs_diff(&expected) <= 1e-10);
    }
}

#[test]
fn gell_mann_basis_is_orthogonal_hermitian_traceless() {
    for n in 2..=5 {
        let basis = gell_mann_basis(n).unwrap();
        assert_eq!(basis.len(), n * n - 1);
        for (a, ga) in basis.iter().enumerate() {
            let ma = ga.matrix();
            assert!(ma.hermiticity_residual() <= 1e-14);
            assert!(ma.trace().norm() <= 1e-14);
            for (b, gb) in basis.iter().enumerate() {
                let t = (&ma * &gb.matrix()).trace();
                let expected = if a == b { 2.0 } else { 0.0 };
                assert!((t - Complex64::new(expected, 0.0)).norm() <= 1e-12, "N={n} ({a},{b}): {t}");
            }
        }
    }
}

#[test]
fn hadamard_is_unitary_and_spreads_ground_state() {
    for n in 2..=6 {
        let h = generalized_hadamard(n).unwrap();
        assert!(h.matrix().unitarity_residual() <= 1e-12);
        let p = outcome_probabilities(&apply_unitary(&h, &StateVector::basis(n, 0)).unwrap());
        assert!(p.iter().all(|v| (v - 1.0 / n as f64).abs() <= 1e-12));
    }
}

#[test]
fn haar_mixtures_stay_physical() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 2..=4 {
        for _ in 0..50 {
            let u = haar_unitary(n, &mut rng);
            let states: Vec<StateVector> = (0..n)
                .map(|k| apply_unitary(&u, &StateVector::basis(n, k)).unwrap())
                .collect();
            let rho = DensityMatrix::mixture(&states[..n - 1]).unwrap();
            assert!(min_eigenvalue(rho.matrix()) >= -1e-10);
            let evolved = apply_unitary(&u.adjoint(), &rho).unwrap();
            assert!((evolved.matrix().trace().re - 1.0).abs() <= 1e-10);
            assert!(evolved.matrix().hermiticity_residual() <= 1e-10);
        }
    }
}
