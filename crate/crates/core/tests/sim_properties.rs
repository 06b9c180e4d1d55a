use num_complex::Complex;
use proptest::prelude::*;
use qcnn::sim::{reduced_expectation_oracle, StateVector};
use qcnn::{Axis, Gate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate<f64> {
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    let angle = rng.gen_range(-10.0..10.0);
    match rng.gen_range(0..5) {
        0 => Gate::Rx { qubit: a, angle },
        1 => Gate::Ry { qubit: a, angle },
        2 => Gate::Rz { qubit: a, angle },
        3 => Gate::Cnot { control: a, target: b },
        _ => Gate::ControlledRot {
            control: a,
            target: b,
            axis: [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)],
            angle,
            control_value: rng.gen(),
        },
    }
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector<f64> {
    let amps: Vec<Complex<f64>> =
        (0..1 << n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

#[test]
fn norm_survives_200_random_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = StateVector::new_zero(5).unwrap();
    for _ in 0..200 {
        state.apply(&random_gate(&mut rng, 5)).unwrap();
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reduced_oracle_agrees_on_random_circuits() {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = StateVector::new_zero(4).unwrap();
        for _ in 0..30 {
            state.apply(&random_gate(&mut rng, 4)).unwrap();
        }
        for q in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&o| o != q).collect();
            let direct = state.expectation_z(q).unwrap();
            let oracle = reduced_expectation_oracle(&state, q, &others).unwrap();
            assert!((direct - oracle).abs() < 1e-10, "seed {seed} qubit {q}");
        }
    }
}

#[test]
fn single_qubit_gates_act_locally_on_product_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let angles: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mut state = StateVector::new_zero(4).unwrap();
        for (q, &a) in angles.iter().enumerate() {
            state.apply_ry(q, a).unwrap();
        }
        let before: Vec<f64> = (0..4).map(|q| state.expectation_z(q).unwrap()).collect();
        let target = rng.gen_range(0..4);
        state.apply_rx(target, rng.gen_range(0.0..3.0)).unwrap();
        for q in (0..4).filter(|&q| q != target) {
            assert!((state.expectation_z(q).unwrap() - before[q]).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn gate_then_inverse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let original = random_state(&mut rng, 3);
        let gates: Vec<Gate<f64>> = (0..8).map(|_| random_gate(&mut rng, 3)).collect();
        let mut state = original.clone();
        for g in &gates {
            state.apply(g).unwrap();
        }
        for g in gates.iter().rev() {
            state.apply(&g.inverse()).unwrap();
        }
        prop_assert!(state.max_distance(&original) < 1e-12);
    }

    #[test]
    fn rotations_compose_additively(seed in any::<u64>(), a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let original = random_state(&mut rng, 3);
        let q = rng.gen_range(0..3);
        for make in [
            (|qubit, angle| Gate::Rx { qubit, angle }) as fn(usize, f64) -> Gate<f64>,
            |qubit, angle| Gate::Ry { qubit, angle },
            |qubit, angle| Gate::Rz { qubit, angle },
        ] {
            let mut split = original.clone();
            split.apply(&make(q, a)).unwrap();
            split.apply(&make(q, b)).unwrap();
            let mut joined = original.clone();
            joined.apply(&make(q, a + b)).unwrap();
            prop_assert!(split.max_distance(&joined) < 1e-12);
        }
    }

    #[test]
    fn cnot_is_an_involution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let original = random_state(&mut rng, 4);
        let c = rng.gen_range(0..4);
        let t = (c + rng.gen_range(1..4)) % 4;
        let mut state = original.clone();
        state.apply_cnot(c, t).unwrap();
        state.apply_cnot(c, t).unwrap();
        prop_assert!(state.max_distance(&original) < 1e-15);
    }
}
