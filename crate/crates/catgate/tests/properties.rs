//! Property tests for the algebraic invariants: Kronecker structure, the
//! matrix exponential's group property, cat-state parity and
//! orthogonality, logical-state normalization, and fidelity bounds.

use num_complex::Complex64;
use proptest::prelude::*;

use catgate::analysis::{fidelity_pointwise, FidelityConvention};
use catgate::hilbert::{Level, SpaceSpec};
use catgate::numkernel::{frobenius_distance, kron, matexp, trace, ComplexMatrix};
use catgate::states::{
    cat_state, ideal_output, logical_input, CatParity, CatSpec, DensityMatrix, LogicalAngles,
    StateVector,
};

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(complex_entry(), rows * cols).prop_map(move |data| {
        let mut m = ComplexMatrix::zeros(rows, cols);
        m.data_mut().copy_from_slice(&data);
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_entries_follow_index_formula(
        a in matrix(3, 2),
        b in matrix(2, 4),
    ) {
        let k = kron(&a, &b);
        prop_assert_eq!(k.rows(), 6);
        prop_assert_eq!(k.cols(), 8);
        for i in 0..k.rows() {
            for j in 0..k.cols() {
                let expected = a[(i / 2, j / 4)] * b[(i % 2, j % 4)];
                prop_assert!((k[(i, j)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_trace_multiplicative(a in matrix(4, 4), b in matrix(3, 3)) {
        let lhs = trace(&kron(&a, &b));
        let rhs = trace(&a) * trace(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn matexp_inverse_property(a in matrix(5, 5)) {
        // one-norm stays modest for entries in the unit box
        let e = matexp(&a, 1.0).unwrap();
        let e_inv = matexp(&a, -1.0).unwrap();
        let product = e.matmul(&e_inv).unwrap();
        prop_assert!(
            frobenius_distance(&product, &ComplexMatrix::identity(5)).unwrap() < 1e-10
        );
    }

    #[test]
    fn cat_states_parity_and_orthogonality(amplitude in 0.05..1.2f64) {
        let trunc = 20;
        let even = cat_state(&CatSpec::new(amplitude, CatParity::Even, trunc).unwrap()).unwrap();
        let odd = cat_state(&CatSpec::new(amplitude, CatParity::Odd, trunc).unwrap()).unwrap();
        for (n, amp) in even.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                prop_assert_eq!(*amp, Complex64::ZERO);
            }
        }
        for (n, amp) in odd.amplitudes().iter().enumerate() {
            if n % 2 == 0 {
                prop_assert_eq!(*amp, Complex64::ZERO);
            }
        }
        prop_assert!(even.inner(&odd).norm() < 1e-12);
        prop_assert!((even.norm() - 1.0).abs() < 1e-12);
        prop_assert!((odd.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logical_states_normalized_and_overlap_analytic(
        theta in 0.0..std::f64::consts::TAU,
        phi in 0.0..std::f64::consts::TAU,
    ) {
        let space = SpaceSpec::default_truncations();
        let angles = LogicalAngles::new(theta, phi);
        let input = logical_input(&angles, 0.5, &space).unwrap();
        let output = ideal_output(&angles, 0.5, &space).unwrap();
        prop_assert!((input.norm() - 1.0).abs() < 1e-12);
        prop_assert!((output.norm() - 1.0).abs() < 1e-12);
        let expected = 1.0 - 2.0 * (theta.sin() * phi.sin()).powi(2);
        prop_assert!((output.inner(&input).re - expected).abs() < 1e-12);
    }

    #[test]
    fn basis_index_round_trip(n1 in 2usize..7, n2 in 2usize..9) {
        let space = SpaceSpec::new(n1, n2).unwrap();
        for level in Level::ALL {
            for f1 in 0..n1 {
                for f2 in 0..n2 {
                    let index = space.basis_index(level, f1, f2).unwrap();
                    prop_assert_eq!(space.basis_decode(index).unwrap(), (level, f1, f2));
                }
            }
        }
    }

    #[test]
    fn fidelity_bounded_for_valid_states(
        weights in proptest::collection::vec(0.01..1.0f64, 4),
        seeds in proptest::collection::vec(-1.0..1.0f64, 8),
        theta in 0.0..std::f64::consts::TAU,
        phi in 0.0..std::f64::consts::TAU,
    ) {
        // random rank-4 mixture of random pure states on a small space
        let space = SpaceSpec::new(2, 10).unwrap();
        let dim = space.total_dim();
        let total: f64 = weights.iter().sum();
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (k, w) in weights.iter().enumerate() {
            let amps: Vec<Complex64> = (0..dim)
                .map(|i| {
                    let x = seeds[(i + k) % seeds.len()] + 0.1 * (i as f64 + 1.0) * (k as f64 + 1.0);
                    Complex64::new(x.sin(), (1.7 * x).cos())
                })
                .collect();
            let psi = StateVector::from_unnormalized(amps).unwrap();
            let pure = catgate::states::density_from_pure(&psi).unwrap();
            rho = rho.add(&pure.matrix().scale(Complex64::new(w / total, 0.0))).unwrap();
        }
        let rho = DensityMatrix::new(rho).unwrap();
        let angles = LogicalAngles::new(theta, phi);
        for convention in [FidelityConvention::AmplitudeSqrt, FidelityConvention::SquaredOverlap] {
            let f = fidelity_pointwise(&rho, &angles, 0.5, &space, convention).unwrap();
            prop_assert!((0.0..=1.0 + 1e-9).contains(&f), "f = {}", f);
        }
    }
}
