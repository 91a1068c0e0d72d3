//! Property-based invariants over random circuits, parameters, and rotators.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmite::ansatz::{derivative_state, prepare_state, probability_derivative, random_rotation_circuit};
use rmite::ensembles::{sample_clifford, sample_haar};
use rmite::fisher::{
    cfim, exact_qfim, fidelity_random_measurement, FidelityMode, FisherMatrix, FisherProvenance,
    DEFAULT_PROBABILITY_FLOOR,
};
use rmite::hamiltonian::{transverse_field_ising, PauliString};
use rmite::ite::solve_update;
use rmite::state::{outcome_probabilities, overlap_squared, StateVector};

fn circuit_inputs() -> impl Strategy<Value = (u64, usize, usize, Vec<f64>)> {
    (1usize..=3, 2usize..=5).prop_flat_map(|(n, m)| {
        (
            any::<u64>(),
            Just(n),
            Just(m),
            proptest::collection::vec(-3.0f64..3.0, m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prepared_states_stay_normalized((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(n, m, &mut rng);
        let s = prepare_state(&c, &theta, &StateVector::zero(n)).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        let probs = outcome_probabilities(&s);
        prop_assert!((probs.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qfim_symmetric_psd((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(n, m, &mut rng);
        let f = exact_qfim(&c, &theta, &StateVector::zero(n)).unwrap();
        prop_assert!((f.entries() - f.entries().transpose()).norm() < 1e-10);
        prop_assert!(f.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn cfim_bounded_by_qfim((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(n, m, &mut rng);
        let init = StateVector::zero(n);
        let fq = exact_qfim(&c, &theta, &init).unwrap();
        let rot = sample_haar(n, &mut rng).unwrap();
        let fc = cfim(&c, &theta, &rot, &init, DEFAULT_PROBABILITY_FLOOR).unwrap();
        prop_assert!((fc.entries() - fc.entries().transpose()).norm() < 1e-10);
        prop_assert!(fc.min_eigenvalue() > -1e-8);
        let gap = FisherMatrix::new(fq.entries() - fc.entries(), FisherProvenance::Cfim);
        prop_assert!(gap.min_eigenvalue() > -1e-7);
    }

    #[test]
    fn probability_derivatives_sum_to_zero((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(n, m, &mut rng);
        let rot = sample_clifford(n, &mut rng).unwrap();
        for i in 0..m {
            let d = probability_derivative(&c, &theta, &rot, i, &StateVector::zero(n)).unwrap();
            let total: f64 = d.iter().sum();
            prop_assert!(total.abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_state_has_zero_real_overlap((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(n, m, &mut rng);
        let init = StateVector::zero(n);
        let phi = prepare_state(&c, &theta, &init).unwrap().as_dvector();
        for i in 0..m {
            let d = derivative_state(&c, &theta, i, &init).unwrap();
            prop_assert!(d.dotc(&phi).re.abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_rotators_are_unitary(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(sample_haar(n, &mut rng).unwrap().unitarity_deviation() < 1e-10);
        prop_assert!(sample_clifford(n, &mut rng).unwrap().unitarity_deviation() < 1e-10);
    }

    #[test]
    fn regularized_update_is_descent_direction(
        seed in any::<u64>(),
        grad in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(2, 4, &mut rng);
        let theta: Vec<f64> = grad.iter().map(|g| g * 0.7).collect();
        let f = exact_qfim(&c, &theta, &StateVector::zero(2)).unwrap();
        let update = solve_update(&f, &grad, 1e-6).unwrap();
        let directional: f64 = grad.iter().zip(update.iter()).map(|(g, u)| g * u).sum();
        prop_assert!(directional <= 1e-9);
    }

    #[test]
    fn pauli_strings_are_involutions(s in "[IXYZ]{1,3}") {
        let p = PauliString::parse(&s).unwrap();
        let n = s.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_rotation_circuit(n, 3, &mut rng);
        let state = prepare_state(&c, &[0.3, -0.9, 1.4], &StateVector::zero(n)).unwrap();
        let twice = p.apply(&p.apply(&state).unwrap()).unwrap();
        prop_assert!(overlap_squared(&state, &twice).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn fidelity_reconstruction_matches_overlap((seed, n, m, theta) in circuit_inputs()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c1 = random_rotation_circuit(n, m, &mut rng);
        let c2 = random_rotation_circuit(n, m, &mut rng);
        let init = StateVector::zero(n);
        let a = prepare_state(&c1, &theta, &init).unwrap();
        let b = prepare_state(&c2, &theta, &init).unwrap();
        let direct = overlap_squared(&a, &b).unwrap();
        let recon = fidelity_random_measurement(&a, &b, &FidelityMode::ExactSecondMoment).unwrap();
        prop_assert!((direct - recon).abs() < 1e-10);
    }

    #[test]
    fn expectation_within_spectral_range(
        (seed, _n, m, theta) in circuit_inputs(),
    ) {
        let h = transverse_field_ising(3, 1.0, 0.7);
        let dense = h.to_dense().unwrap();
        let eig = nalgebra::SymmetricEigen::new(dense);
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_rotation_circuit(3, m, &mut rng);
        let s = prepare_state(&c, &theta, &StateVector::zero(3)).unwrap();
        let e = h.expectation(&s).unwrap();
        prop_assert!(e >= lo - 1e-9 && e <= hi + 1e-9);
    }

    #[test]
    fn solve_update_inverts_well_conditioned_systems(
        diag in proptest::collection::vec(0.5f64..5.0, 3),
        grad in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let f = FisherMatrix::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone())),
            FisherProvenance::ExactQfim,
        );
        let u = solve_update(&f, &grad, 0.0).unwrap();
        for i in 0..3 {
            prop_assert!((u[i] - (-2.0 * grad[i] / diag[i])).abs() < 1e-9);
        }
    }
}
