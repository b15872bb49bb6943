use edss::dynamics::{hamiltonian, jump_operator, lindblad_rhs, JumpDirection, Stage, StageParams};
use edss::entanglement::{negativity, partial_trace, Bipartition};
use edss::matcore::{herm_eig, herm_expm, kron, CMatrix};
use edss::protocol::{post_selected_state, MeasurementSpec};
use edss::states::{DensityMatrix, QubitId, QubitSet};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    herm_expm(&random_hermitian(rng, n), 1.0).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let g = random_matrix(rng, n);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

fn random_ket(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn three_qubit(m: CMatrix) -> DensityMatrix {
    DensityMatrix::three_qubit(m).unwrap()
}

/// Negativity of a pure state across one qubit and the rest, from the
/// 2 x 4 coefficient matrix: the product of its two Schmidt coefficients.
fn pure_single_vs_rest(psi: &[Complex64], q: usize) -> f64 {
    let bit = 2 - q;
    let mut m = [[c(0.0, 0.0); 4]; 2];
    let mut seen = [0usize; 2];
    for (i, amp) in psi.iter().enumerate() {
        let row = (i >> bit) & 1;
        m[row][seen[row]] = *amp;
        seen[row] += 1;
    }
    let dot = |u: &[Complex64; 4], v: &[Complex64; 4]| u.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<Complex64>();
    let det = dot(&m[0], &m[0]).re * dot(&m[1], &m[1]).re - dot(&m[0], &m[1]).norm_sqr();
    det.max(0.0).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, 8);
        let eig = herm_eig(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
        let v = &eig.eigenvectors;
        prop_assert!((&v.adjoint() * v).max_abs_diff(&CMatrix::identity(8)) < 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn expm_is_unitary_and_inverted_by_negated_time(seed in any::<u64>(), s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, 8);
        let u = herm_expm(&h, s).unwrap();
        let back = herm_expm(&h, -s).unwrap();
        prop_assert!((&u * &back).max_abs_diff(&CMatrix::identity(8)) < 1e-10);
        prop_assert!((&u.adjoint() * &u).max_abs_diff(&CMatrix::identity(8)) < 1e-10);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, d) = (random_matrix(&mut rng, 2), random_matrix(&mut rng, 2), random_matrix(&mut rng, 2));
        prop_assert!(kron(&kron(&a, &b), &d).max_abs_diff(&kron(&a, &kron(&b, &d))) < 1e-14);
    }

    #[test]
    fn pure_two_qubit_negativity_matches_determinant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_ket(&mut rng, 4);
        let rho = DensityMatrix::pure(&psi, QubitSet::AB).unwrap();
        let expected = (psi[0] * psi[3] - psi[1] * psi[2]).norm();
        prop_assert!((negativity(&rho, Bipartition::A_B).unwrap().value() - expected).abs() < 1e-10);
    }

    #[test]
    fn pure_three_qubit_negativity_matches_schmidt(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_ket(&mut rng, 8);
        let rho = DensityMatrix::pure(&psi, QubitSet::ABC).unwrap();
        for (q, bip) in [(0, Bipartition::A_BC), (1, Bipartition::B_AC), (2, Bipartition::C_AB)] {
            let e = negativity(&rho, bip).unwrap().value();
            prop_assert!((e - pure_single_vs_rest(&psi, q)).abs() < 1e-10);
            prop_assert!((e - negativity(&rho, bip.swapped()).unwrap().value()).abs() < 1e-12);
        }
    }

    #[test]
    fn negativity_is_invariant_under_local_unitaries(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = three_qubit(random_state(&mut rng, 8));
        let u = kron(&kron(&random_unitary(&mut rng, 2), &random_unitary(&mut rng, 2)), &random_unitary(&mut rng, 2));
        let moved = rho.conjugate_by(&u).unwrap();
        for bip in [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB] {
            let diff = negativity(&rho, bip).unwrap().value() - negativity(&moved, bip).unwrap().value();
            prop_assert!(diff.abs() < 1e-9);
        }
    }

    #[test]
    fn product_states_have_no_negativity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = three_qubit(kron(&kron(&random_state(&mut rng, 2), &random_state(&mut rng, 2)), &random_state(&mut rng, 2)));
        for bip in [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB] {
            prop_assert!(negativity(&rho, bip).unwrap().value() < 1e-12);
        }
    }

    #[test]
    fn generator_output_is_traceless_and_hermitian(seed in any::<u64>(), gamma in 0.0f64..3.0, beta in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(&mut rng, 8);
        for stage in [Stage::Encoding, Stage::Decoding] {
            for dir in [JumpDirection::RaiseFirstLowerCarrier, JumpDirection::LowerFirstRaiseCarrier] {
                let s = StageParams { beta, gamma, ..StageParams::ideal(stage) };
                let d = lindblad_rhs(&rho, &hamiltonian(&s), gamma, &jump_operator(&s, dir)).unwrap();
                prop_assert!(d.trace().norm() < 1e-12);
                prop_assert!(d.hermiticity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn measurement_outcomes_reconstruct_marginal(seed in any::<u64>(), theta in 0.0f64..1.5, phi in 0.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = three_qubit(random_state(&mut rng, 8));
        let m = MeasurementSpec::new(theta, phi).unwrap();
        let (r0, p0) = post_selected_state(&rho, m).unwrap();
        let (r1, p1) = post_selected_state(&rho, m.complement()).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
        let sum = &r0.matrix().scale_real(p0) + &r1.matrix().scale_real(p1);
        let marginal = partial_trace(&rho, QubitSet::single(QubitId::C)).unwrap();
        prop_assert!(sum.max_abs_diff(marginal.matrix()) < 1e-10);
    }

    #[test]
    fn measuring_the_carrier_commutes_with_unitaries_on_a_and_b(seed in any::<u64>(), theta in 0.0f64..1.5, phi in 0.0f64..6.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = three_qubit(random_state(&mut rng, 8));
        let u_ab = random_unitary(&mut rng, 4);
        let m = MeasurementSpec::new(theta, phi).unwrap();
        let (before, p_before) = post_selected_state(&rho, m).unwrap();
        let moved = rho.conjugate_by(&kron(&u_ab, &CMatrix::identity(2))).unwrap();
        let (after, p_after) = post_selected_state(&moved, m).unwrap();
        prop_assert!((p_before - p_after).abs() < 1e-9);
        let expected = &(&u_ab * before.matrix()) * &u_ab.adjoint();
        prop_assert!(after.matrix().max_abs_diff(&expected) < 1e-9);
    }
}
