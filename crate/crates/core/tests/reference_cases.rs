use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use edss::dynamics::{evolve, evolve_state, hamiltonian, jump_operator, JumpDirection, Stage, StageParams};
use edss::entanglement::{is_ppt_separable, negativity, partial_trace, partial_transpose, trace_norm, Bipartition};
use edss::matcore::{herm_eigenvalues, herm_expm, kron, pauli, CMatrix};
use edss::protocol::{
    entanglement_gain, extract_measure, extract_trace_out, is_edss_feasible, measure_state, run_protocol,
    MeasurementSpec, ProtocolParams,
};
use edss::states::{
    alpha, basis_state, bell_phi_plus_ab, ghz, lambda_ent, lambda_sep, maximally_mixed, DensityMatrix, MixtureWeight,
    QubitId, QubitSet,
};
use edss::sweeps::{
    entanglement_landscape, feasibility_region, gamma_ac_vs_time, max_feasible_gamma, optimal_vs_standard_gap,
    optimize_measurement, Extraction, GammaTarget, GridAxis, GridSpec, SweepParam, DEFAULT_BISECT_TOL,
    DEFAULT_HI_GAMMA_AC, DEFAULT_HI_GAMMA_BC,
};
use edss::Error;
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn p(x: f64) -> MixtureWeight {
    MixtureWeight::new(x).unwrap()
}

fn e(rho: &DensityMatrix, bip: Bipartition) -> f64 {
    negativity(rho, bip).unwrap().value()
}

/// CNOT on the register with `control` as bit mask and the carrier as target.
fn cnot(control: usize) -> CMatrix {
    CMatrix::from_fn(8, 8, |r, col| c(if r == if col & control != 0 { col ^ 1 } else { col } { 1.0 } else { 0.0 }))
}

fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    &(u * rho) * &u.adjoint()
}

fn bell_with_carrier_zero() -> DensityMatrix {
    bell_phi_plus_ab().tensor(&DensityMatrix::pure(&[c(1.0), c(0.0)], QubitSet::single(QubitId::C)).unwrap()).unwrap()
}

#[test]
fn kron_places_blocks_row_major() {
    let m = kron(&pauli::x(), &pauli::proj0());
    assert_eq!(m[(2, 0)], c(1.0));
    assert_eq!(m[(0, 0)], c(0.0));
    let core = kron(&pauli::proj1(), &(&pauli::x() - &CMatrix::identity(2)));
    let expected = CMatrix::from_real(
        4,
        4,
        &[
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, -1.0, 1.0, //
            0.0, 0.0, 1.0, -1.0,
        ],
    )
    .unwrap();
    assert!(core.max_abs_diff(&expected) < 1e-15);
    assert!(kron(&CMatrix::identity(2), &CMatrix::identity(2)).max_abs_diff(&CMatrix::identity(4)) < 1e-15);
}

#[test]
fn bell_partial_transpose_spectrum() {
    let pt = partial_transpose(&bell_phi_plus_ab(), QubitSet::single(QubitId::A)).unwrap();
    let ev = herm_eigenvalues(&pt).unwrap();
    for (got, want) in ev.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-12);
    assert!((trace_norm(&pauli::z()).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn hamiltonians_generate_cnots_with_period_two() {
    for (stage, control) in [(Stage::Encoding, 0b100), (Stage::Decoding, 0b010)] {
        let h = hamiltonian(&StageParams::ideal(stage));
        assert!(herm_expm(&h, 1.0).unwrap().max_abs_diff(&cnot(control)) < 1e-10);
        assert!(herm_expm(&h, 2.0).unwrap().max_abs_diff(&CMatrix::identity(8)) < 1e-10);
    }
    let zero = hamiltonian(&StageParams { beta: 0.0, ..StageParams::ideal(Stage::Encoding) });
    assert!(zero.frobenius_norm() == 0.0);
}

#[test]
fn jump_operator_moves_the_carrier_excitation() {
    let o = jump_operator(&StageParams::ideal(Stage::Encoding), JumpDirection::default());
    let mut ket = vec![c(0.0); 8];
    ket[0b001] = c(1.0);
    let image = o.apply(&ket);
    for (i, z) in image.iter().enumerate() {
        assert!((z - c(if i == 0b100 { 1.0 } else { 0.0 })).norm() < 1e-15);
    }
    let mut ground = vec![c(0.0); 8];
    ground[0] = c(1.0);
    assert!(o.apply(&ground).iter().all(|z| z.norm() == 0.0));
    assert!((&o * &o).frobenius_norm() == 0.0);
}

#[test]
fn static_states() {
    let ent = lambda_ent();
    assert!((e(&ent, Bipartition::A_BC) - 1.0 / 6.0).abs() < 1e-9);
    assert!((e(&ent, Bipartition::B_AC) - 1.0 / 6.0).abs() < 1e-9);
    assert!(e(&ent, Bipartition::C_AB) < 1e-9);
    let sep = lambda_sep();
    assert!(e(&sep, Bipartition::C_AB) < 1e-9 && e(&sep, Bipartition::A_BC) < 1e-9);
    assert!(alpha(p(1.0)).matrix().max_abs_diff(sep.matrix()) < 1e-15);
    let a = alpha(p(0.9));
    assert!((e(&a, Bipartition::A_BC) - 0.0167).abs() < 5e-4);
    let ab = partial_trace(&a, QubitSet::single(QubitId::C)).unwrap();
    assert!((e(&ab, Bipartition::A_B) - 0.0167).abs() < 5e-4);
    assert!((e(&bell_with_carrier_zero(), Bipartition::A_BC) - 0.5).abs() < 1e-12);
    assert!((e(&ghz(), Bipartition::C_AB) - 0.5).abs() < 1e-12);
}

#[test]
fn marginals() {
    let g = partial_trace(&ghz(), QubitSet::single(QubitId::C)).unwrap();
    let expected = CMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
    assert!(g.matrix().max_abs_diff(&expected) < 1e-15);
    assert!(e(&g, Bipartition::A_B) < 1e-12);
    let ac = partial_trace(&basis_state(1, 0, 1).unwrap(), QubitSet::single(QubitId::B)).unwrap();
    assert!(ac.matrix().max_abs_diff(&CMatrix::diag(&[0.0, 0.0, 0.0, 1.0])) < 1e-15);
    let b = partial_trace(&bell_phi_plus_ab(), QubitSet::single(QubitId::B)).unwrap();
    assert!(b.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
}

#[test]
fn ppt_screening() {
    assert!(is_ppt_separable(&lambda_sep(), Bipartition::C_AB, 1e-9).unwrap());
    assert!(!is_ppt_separable(&lambda_ent(), Bipartition::A_BC, 1e-9).unwrap());
    for bip in [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB] {
        assert!(is_ppt_separable(&maximally_mixed(), bip, 1e-9).unwrap());
    }
    let rho = alpha(p(0.3));
    let ab = partial_transpose(&rho, QubitSet::AB).unwrap();
    let c_side = partial_transpose(&rho, QubitSet::single(QubitId::C)).unwrap();
    assert!(ab.max_abs_diff(&c_side.transpose()) < 1e-15);
}

#[test]
fn noiseless_evolution_matches_conjugation() {
    let rho = alpha(p(0.9));
    let once = evolve_state(&rho, &StageParams::ideal(Stage::Encoding), JumpDirection::default(), 1e-3).unwrap();
    assert!((once.matrix() - &conjugate(&cnot(0b100), rho.matrix())).frobenius_norm() < 1e-8);
    let twice = StageParams { duration: 2.0, ..StageParams::ideal(Stage::Decoding) };
    let back = evolve_state(&rho, &twice, JumpDirection::default(), 1e-3).unwrap();
    assert!((back.matrix() - rho.matrix()).frobenius_norm() < 1e-8);
}

#[test]
fn ground_state_trajectory_is_constant() {
    let ground = basis_state(0, 0, 0).unwrap();
    for stage in [Stage::Encoding, Stage::Decoding] {
        let s = StageParams { gamma: 0.7, ..StageParams::ideal(stage) };
        let traj = evolve(&ground, &s, JumpDirection::default(), 1e-3, &[Bipartition::A_BC], 50).unwrap();
        assert!(traj.final_state.matrix().max_abs_diff(ground.matrix()) < 1e-14);
        assert!(traj.samples.iter().all(|s| s.negativities[0] < 1e-14));
    }
}

#[test]
fn halving_the_step_changes_little() {
    let base = ProtocolParams::default().with_gammas(0.06, 0.4);
    let coarse = run_protocol(&base).unwrap();
    let fine = run_protocol(&ProtocolParams { dt: base.dt / 2.0, ..base }).unwrap();
    assert!(coarse.state_after_decoding.matrix().max_abs_diff(fine.state_after_decoding.matrix()) < 1e-6);
}

#[test]
fn ideal_protocol() {
    let r = run_protocol(&ProtocolParams::default()).unwrap();
    assert!(r.e_a_bc_after_encoding > r.e_ab_initial);
    assert!(r.max_cab_negativity < 1e-9 && r.is_feasible());
    let m = extract_measure(&r, MeasurementSpec::STANDARD).unwrap();
    assert!((m.e_ab - 0.5).abs() < 1e-8);
    assert!((entanglement_gain(&r, m.e_ab) - 0.4833).abs() < 1e-3);
    let best = optimize_measurement(&r.state_after_decoding);
    assert!((best.e_star - 0.5).abs() < 1e-3 && best.theta_star < 1e-3);
}

#[test]
fn trace_out_at_zero_noise_matches_gate_oracle() {
    let r = run_protocol(&ProtocolParams::default()).unwrap();
    let u = &cnot(0b010) * &cnot(0b100);
    let out = DensityMatrix::three_qubit(conjugate(&u, alpha(p(0.9)).matrix())).unwrap();
    let ab = partial_trace(&out, QubitSet::single(QubitId::C)).unwrap();
    assert!((extract_trace_out(&r) - e(&ab, Bipartition::A_B)).abs() < 1e-8);
}

#[test]
fn trace_out_can_lose_entanglement() {
    let r = run_protocol(&ProtocolParams::default().with_gammas(0.0, 0.03)).unwrap();
    assert!(r.is_feasible());
    assert!(entanglement_gain(&r, extract_trace_out(&r)) < 0.0);
}

#[test]
fn feasibility_examples() {
    let base = ProtocolParams::default();
    assert!(is_edss_feasible(&base).unwrap());
    assert!(is_edss_feasible(&base.with_gammas(0.06, 0.4)).unwrap());
    assert!(!is_edss_feasible(&base.with_gammas(0.2, 0.0)).unwrap());
    let separable = base.with_p(1.0).unwrap();
    assert!(!is_edss_feasible(&separable.with_gammas(0.05, 0.0)).unwrap());
    assert!(is_edss_feasible(&separable.with_gammas(0.0, 0.004)).unwrap());
}

#[test]
fn measurement_examples() {
    let r = run_protocol(&ProtocolParams::default().with_gammas(0.06, 0.4)).unwrap();
    let one = MeasurementSpec::new(FRAC_PI_2, 0.0).unwrap();
    let zero = measure_state(&r.state_after_decoding, MeasurementSpec::STANDARD).unwrap();
    match measure_state(&r.state_after_decoding, one) {
        Ok(m) => {
            assert!(m.e_ab < 1e-6);
            assert!((m.prob + zero.prob - 1.0).abs() < 1e-12);
        }
        Err(Error::ZeroProbability(_)) => assert!((zero.prob - 1.0).abs() < 1e-12),
        Err(other) => panic!("{other}"),
    }
    for phi in [0.0, 1.0, 4.0] {
        let m = measure_state(&r.state_after_decoding, MeasurementSpec::new(0.0, phi).unwrap()).unwrap();
        assert!((m.e_ab - zero.e_ab).abs() < 1e-14);
    }
}

#[test]
fn optimum_dominates_probes() {
    let r = run_protocol(&ProtocolParams::default().with_gammas(0.09, 0.6).with_betas(0.9, 1.1)).unwrap();
    let best = optimize_measurement(&r.state_after_decoding);
    let at = |theta: f64, phi: f64| {
        measure_state(&r.state_after_decoding, MeasurementSpec::new(theta, phi).unwrap()).map(|m| m.e_ab)
    };
    assert!(best.e_star >= at(0.0, 0.0).unwrap() - 1e-9);
    for i in 0..32 {
        let (theta, phi) = (FRAC_PI_2 * (i as f64 * 0.618).fract(), std::f64::consts::TAU * (i as f64 * 0.414).fract());
        if let Ok(v) = at(theta, phi) {
            assert!(best.e_star >= v - 1e-9, "probe ({theta}, {phi}) = {v} beats {}", best.e_star);
        }
    }
}

#[test]
fn boundary_examples() {
    let base = ProtocolParams::default();
    let g_ac = max_feasible_gamma(&base, GammaTarget::GammaAc, DEFAULT_HI_GAMMA_AC, DEFAULT_BISECT_TOL).unwrap();
    assert!((0.088..=0.097).contains(&g_ac), "{g_ac}");
    let sep = base.with_p(1.0).unwrap();
    let g_bc = max_feasible_gamma(&sep, GammaTarget::GammaBc, DEFAULT_HI_GAMMA_BC, DEFAULT_BISECT_TOL).unwrap();
    assert!((g_bc - 0.006).abs() < 0.002, "{g_bc}");
    let tuned = base.with_betas(0.8, 0.85);
    let g = max_feasible_gamma(&tuned, GammaTarget::GammaBc, DEFAULT_HI_GAMMA_BC, DEFAULT_BISECT_TOL).unwrap();
    assert!((g - 0.282).abs() < 0.01, "{g}");
    // The reported boundary is feasible and two tolerances past it is not.
    assert!(is_edss_feasible(&tuned.with_gammas(0.0, g)).unwrap());
    assert!(!is_edss_feasible(&tuned.with_gammas(0.0, g + 2.0 * DEFAULT_BISECT_TOL)).unwrap());
    let over = base.with_gammas(0.1, 0.0);
    assert!(matches!(
        max_feasible_gamma(&over, GammaTarget::GammaBc, DEFAULT_HI_GAMMA_BC, DEFAULT_BISECT_TOL),
        Err(Error::BaseInfeasible(_))
    ));
}

#[test]
fn boundary_shrinks_with_interaction_time() {
    let axis = GridAxis::new(SweepParam::TAc, 0.1, 2.0, 8).unwrap();
    let curve = gamma_ac_vs_time(&ProtocolParams::default(), &axis, DEFAULT_HI_GAMMA_AC, DEFAULT_BISECT_TOL).unwrap();
    assert!(curve.max_gamma.windows(2).all(|w| w[1] <= w[0] + DEFAULT_BISECT_TOL), "{:?}", curve.max_gamma);
    let short = curve.max_gamma[0];
    let unit =
        max_feasible_gamma(&ProtocolParams::default(), GammaTarget::GammaAc, DEFAULT_HI_GAMMA_AC, DEFAULT_BISECT_TOL)
            .unwrap();
    assert!(short > unit);
}

#[test]
fn region_grows_as_initial_entanglement_grows() {
    let axis = GridAxis::new(SweepParam::GammaAc, 0.0, 0.6, 13).unwrap();
    let curves = feasibility_region(
        &ProtocolParams::default(),
        &[0.9, 0.5, 0.1],
        &axis,
        DEFAULT_HI_GAMMA_BC,
        DEFAULT_BISECT_TOL,
    )
    .unwrap();
    let areas: Vec<f64> = curves.iter().map(|c| c.area()).collect();
    assert!(areas[0] < areas[1] && areas[1] < areas[2], "{areas:?}");
    let p09 = &curves[0];
    let bc_extent = p09.max_gamma_bc.iter().flatten().fold(0.0, |m: f64, &v| m.max(v));
    assert!(bc_extent > p09.max_gamma_ac().unwrap());
    for (g, v) in p09.gamma_ac.iter().zip(&p09.max_gamma_bc) {
        if *g >= 0.1 {
            assert!(v.is_none());
        }
    }
}

#[test]
fn small_landscapes() {
    let grid = GridSpec::two(
        GridAxis::new(SweepParam::GammaAc, 0.0, 0.09, 4).unwrap(),
        GridAxis::new(SweepParam::GammaBc, 0.0, 0.6, 4).unwrap(),
    )
    .unwrap();
    let base = ProtocolParams::default();
    let gaps = optimal_vs_standard_gap(&base, &grid).unwrap();
    assert!(gaps.iter().filter_map(|g| g.gap).all(|g| g >= -1e-9));
    assert!(gaps[0].gap.unwrap().abs() < 1e-6);
    assert!(gaps.iter().filter_map(|g| g.gap).any(|g| g > 1e-3));
    assert!(gaps.iter().filter_map(|g| g.theta_star).all(|t| t < FRAC_PI_8));

    let landscape = entanglement_landscape(&base, &grid, Extraction::TraceOut).unwrap();
    assert_eq!(landscape.points.len(), 16);
    for pt in &landscape.points {
        assert_eq!(pt.e_ab.is_some(), pt.feasible);
    }
    let uniform = base.with_gammas(0.0, 0.091);
    let betas = GridSpec::two(
        GridAxis::new(SweepParam::BetaAc, 0.0, 1.0, 3).unwrap(),
        GridAxis::new(SweepParam::BetaBc, 0.0, 1.0, 3).unwrap(),
    )
    .unwrap();
    let std = entanglement_landscape(&uniform, &betas, Extraction::StandardBasis).unwrap();
    assert!((std.at(1.0, 1.0).unwrap().e_ab.unwrap() - 0.44).abs() < 0.005);
}

#[test]
fn noiseless_beta_ridge_follows_the_anti_diagonal() {
    let n = 11;
    let step = 2.0 / (n - 1) as f64;
    let base = ProtocolParams::default();
    let value = |i: usize, j: usize| {
        let r = run_protocol(&base.with_betas(i as f64 * step, j as f64 * step)).unwrap();
        measure_state(&r.state_after_decoding, MeasurementSpec::STANDARD).map(|m| m.e_ab).unwrap_or(0.0)
    };
    // Along each line of constant beta_AC - beta_BC the maximum sits at the crossing with beta_AC + beta_BC = 2.
    for d in -4i32..=4 {
        let cells: Vec<(usize, usize)> = (0..n)
            .filter_map(|i| {
                let j = i as i32 - d;
                (0..n as i32).contains(&j).then_some((i, j as usize))
            })
            .collect();
        let best = cells.iter().copied().max_by(|a, b| value(a.0, a.1).total_cmp(&value(b.0, b.1))).unwrap();
        let sum = best.0 + best.1;
        assert!(sum.abs_diff(n - 1) <= 1, "difference {d}: max at {best:?}");
    }
}
