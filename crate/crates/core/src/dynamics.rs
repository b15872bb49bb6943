//! Encoding and decoding dynamics.
//!
//! Each stage couples one of the parties' qubits (`A` for encoding, `B` for
//! decoding) to the carrier through
//!
//! ```text
//! dρ/dt = -i[β H, ρ] + γ (2 O ρ O† - {O†O, ρ}),
//! H = π/(2t) |1⟩⟨1|_j ⊗ (σˣ_C - 1),   O = σ⁺_j σ⁻_C,
//! ```
//!
//! integrated with classical fixed-step RK4. `exp(-iHt)` is exactly a CNOT
//! controlled by `j` and targeting `C`, so with `β = 1` and `γ = 0` a stage
//! of duration `t` reproduces the ideal gate.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::entanglement::{negative_part, pt_into, Bipartition};
use crate::error::{Error, Result};
use crate::matcore::{
    c, hermitian_eigenvalues_unchecked, hermitize_in_place, is_positive_definite_shifted, kron, mul_into, pauli,
    CMatrix,
};
use crate::states::{DensityMatrix, QubitId, QubitSet};

/// Default RK4 step, in units of the gate time.
pub const DEFAULT_DT: f64 = 1e-3;

/// Trace drift or negative eigenvalues beyond this abort an integration.
pub const CORRUPTION_TOL: f64 = 1e-6;

/// Which party's qubit the carrier interacts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `A ↔ C`
    Encoding,
    /// `B ↔ C`
    Decoding,
}

impl Stage {
    pub fn partner(self) -> QubitId {
        match self {
            Stage::Encoding => QubitId::A,
            Stage::Decoding => QubitId::B,
        }
    }
}

/// Direction of the incoherent excitation exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum JumpDirection {
    /// `O = σ⁺_j σ⁻_C`: the carrier hands its excitation to the party's qubit.
    #[default]
    RaiseFirstLowerCarrier,
    /// `O = σ⁻_j σ⁺_C`.
    LowerFirstRaiseCarrier,
}

impl JumpDirection {
    pub fn alternate(self) -> Self {
        match self {
            JumpDirection::RaiseFirstLowerCarrier => JumpDirection::LowerFirstRaiseCarrier,
            JumpDirection::LowerFirstRaiseCarrier => JumpDirection::RaiseFirstLowerCarrier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageParams {
    pub stage: Stage,
    /// Time `t` for which the unscaled Hamiltonian realizes a CNOT.
    pub gate_time: f64,
    /// Scale `β` of the coherent part.
    pub beta: f64,
    /// Rate `γ` of the incoherent part.
    pub gamma: f64,
    /// Interaction time of the stage.
    pub duration: f64,
}

impl StageParams {
    pub fn new(stage: Stage, gate_time: f64, beta: f64, gamma: f64, duration: f64) -> Result<Self> {
        let p = Self { stage, gate_time, beta, gamma, duration };
        p.validate()?;
        Ok(p)
    }

    /// `t = 1`, `β = 1`, `γ = 0`, duration 1.
    pub fn ideal(stage: Stage) -> Self {
        Self { stage, gate_time: 1.0, beta: 1.0, gamma: 0.0, duration: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gate_time, self.beta, self.gamma, self.duration].iter().all(|x| x.is_finite());
        if !finite || !(self.gate_time > 0.0) || self.beta < 0.0 || self.gamma < 0.0 || self.duration < 0.0 {
            return Err(Error::InvalidParams(format!(
                "{:?} stage needs t > 0 and non-negative beta, gamma, duration (got {self:?})",
                self.stage
            )));
        }
        Ok(())
    }
}

/// Places a (control ⊗ carrier) two-qubit operator on the register, with
/// the identity on the bystander.
fn embed(stage: Stage, on_partner: &CMatrix, on_carrier: &CMatrix) -> CMatrix {
    let i2 = CMatrix::identity(2);
    match stage {
        Stage::Encoding => kron(&kron(on_partner, &i2), on_carrier),
        Stage::Decoding => kron(&kron(&i2, on_partner), on_carrier),
    }
}

/// `β π/(2t) |1⟩⟨1|_j ⊗ (σˣ_C − 1)` on the full register.
pub fn hamiltonian(stage: &StageParams) -> CMatrix {
    let x_minus_one = &pauli::x() - &CMatrix::identity(2);
    let strength = stage.beta * PI / (2.0 * stage.gate_time);
    embed(stage.stage, &pauli::proj1(), &x_minus_one).scale_real(strength)
}

/// Jump operator of the excitation exchange between the stage's party and the carrier.
pub fn jump_operator(stage: &StageParams, dir: JumpDirection) -> CMatrix {
    match dir {
        JumpDirection::RaiseFirstLowerCarrier => embed(stage.stage, &pauli::raise(), &pauli::lower()),
        JumpDirection::LowerFirstRaiseCarrier => embed(stage.stage, &pauli::lower(), &pauli::raise()),
    }
}

/// `-i[h, ρ] + γ (2 o ρ o† − {o†o, ρ})`, written out term by term.
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, gamma: f64, o: &CMatrix) -> Result<CMatrix> {
    rho.require_square()?;
    rho.require_same_shape(h)?;
    rho.require_same_shape(o)?;
    let minus_i = c(0.0, -1.0);
    let commutator = &(h * rho) - &(rho * h);
    let o_dag = o.adjoint();
    let o_dag_o = &o_dag * o;
    let sandwich = &(o * rho) * &o_dag;
    let anti = &(&o_dag_o * rho) + &(rho * &o_dag_o);
    let dissipator = &sandwich.scale_real(2.0) - &anti;
    Ok(&commutator.scale(minus_i) + &dissipator.scale_real(gamma))
}

/// Precomputed generator in the effective-Hamiltonian form
/// `-i(K ρ − ρ K†) + 2γ O ρ O†` with `K = H − iγ O†O`.
///
/// Requires `ρ` Hermitian, which lets `ρ K†` be read off as `(K ρ)†`.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    k: CMatrix,
    jump: CMatrix,
    jump_adj: CMatrix,
    gamma: f64,
}

pub(crate) struct Scratch {
    kr: CMatrix,
    or: CMatrix,
    oro: CMatrix,
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    tmp: CMatrix,
    pt: CMatrix,
    chol: CMatrix,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        let z = || CMatrix::zeros(n, n);
        Self { kr: z(), or: z(), oro: z(), k1: z(), k2: z(), k3: z(), k4: z(), tmp: z(), pt: z(), chol: z() }
    }
}

impl Generator {
    pub(crate) fn new(stage: &StageParams, dir: JumpDirection) -> Self {
        let h = hamiltonian(stage);
        let jump = jump_operator(stage, dir);
        let jump_adj = jump.adjoint();
        let gamma = stage.gamma;
        let decay = &jump_adj * &jump;
        let k = &h - &decay.scale(c(0.0, gamma));
        Self { k, jump, jump_adj, gamma }
    }

    fn apply(&self, rho: &CMatrix, out: &mut CMatrix, kr: &mut CMatrix, or: &mut CMatrix, oro: &mut CMatrix) {
        let n = rho.rows();
        mul_into(&self.k, rho, kr);
        let two_gamma = 2.0 * self.gamma;
        if self.gamma != 0.0 {
            mul_into(&self.jump, rho, or);
            mul_into(or, &self.jump_adj, oro);
        }
        for i in 0..n {
            for j in 0..n {
                // -i (X - X†) with X = Kρ.
                let d = kr[(i, j)] - kr[(j, i)].conj();
                let mut v = Complex64::new(d.im, -d.re);
                if self.gamma != 0.0 {
                    v += oro[(i, j)] * two_gamma;
                }
                out[(i, j)] = v;
            }
        }
    }

    fn rk4_step(&self, rho: &mut CMatrix, dt: f64, s: &mut Scratch) {
        let Scratch { kr, or, oro, k1, k2, k3, k4, tmp, .. } = s;
        self.apply(rho, k1, kr, or, oro);
        axpy_into(rho, 0.5 * dt, k1, tmp);
        self.apply(tmp, k2, kr, or, oro);
        axpy_into(rho, 0.5 * dt, k2, tmp);
        self.apply(tmp, k3, kr, or, oro);
        axpy_into(rho, dt, k3, tmp);
        self.apply(tmp, k4, kr, or, oro);
        let w = dt / 6.0;
        for idx in 0..rho.as_slice().len() {
            let inc = k1.as_slice()[idx] + (k2.as_slice()[idx] + k3.as_slice()[idx]) * 2.0 + k4.as_slice()[idx];
            rho.as_mut_slice()[idx] += inc * w;
        }
        hermitize_in_place(rho);
    }
}

fn axpy_into(x: &CMatrix, a: f64, y: &CMatrix, out: &mut CMatrix) {
    for ((o, xv), yv) in out.as_mut_slice().iter_mut().zip(x.as_slice()).zip(y.as_slice()) {
        *o = xv + yv * a;
    }
}

/// Number of steps and the effective step covering `duration`.
///
/// When `duration / dt` is not an integer (up to a relative 1e-9), the step
/// is shrunk so that an integral number of steps lands exactly on `duration`.
pub fn step_plan(duration: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    if duration == 0.0 {
        return Ok((0, dt));
    }
    let ratio = duration / dt;
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) { nearest } else { ratio.ceil() };
    let n = n.max(1.0) as usize;
    Ok((n, duration / n as f64))
}

/// Drives an RK4 integration, handing the state to `observe` after every
/// step (and once before the first). Returns the final state, or `None` if
/// the observer broke out early.
pub(crate) fn integrate<F>(
    rho0: &CMatrix,
    gen: &Generator,
    dt: f64,
    n_steps: usize,
    scratch: &mut Scratch,
    mut observe: F,
) -> Result<Option<CMatrix>>
where
    F: FnMut(usize, f64, &CMatrix, &mut Scratch) -> Result<ControlFlow<()>>,
{
    let mut rho = rho0.clone();
    if observe(0, 0.0, &rho, scratch)?.is_break() {
        return Ok(None);
    }
    for step in 1..=n_steps {
        gen.rk4_step(&mut rho, dt, scratch);
        let time = step as f64 * dt;
        let trace_dev = (rho.trace().re - 1.0).abs();
        if trace_dev > CORRUPTION_TOL || !trace_dev.is_finite() {
            return Err(Error::StateCorrupted { time, trace_deviation: trace_dev, min_eigenvalue: f64::NAN });
        }
        if !is_positive_definite_shifted(&rho, CORRUPTION_TOL, &mut scratch.chol) {
            let min_ev = hermitian_eigenvalues_unchecked(&rho)[0];
            if min_ev < -CORRUPTION_TOL || !min_ev.is_finite() {
                return Err(Error::StateCorrupted { time, trace_deviation: trace_dev, min_eigenvalue: min_ev });
            }
        }
        if observe(step, time, &rho, scratch)?.is_break() {
            return Ok(None);
        }
    }
    Ok(Some(rho))
}

/// Negativity of a full-register state across `side | rest`, skipping the
/// eigendecomposition when a shifted Cholesky factorization already shows
/// the value is below `eps`. Returns `None` in that case.
pub(crate) fn negativity_above(rho: &CMatrix, side_mask: usize, eps: f64, s: &mut Scratch) -> Option<f64> {
    pt_into(rho, side_mask, &mut s.pt);
    // A successful factorization of ρ^T + (eps/8)·1 bounds every eigenvalue
    // below by -eps/8; with at most 8 of them the negative part is < eps.
    if is_positive_definite_shifted(&s.pt, eps / 8.0, &mut s.chol) {
        return None;
    }
    let value = negative_part(&s.pt);
    (value > eps).then_some(value)
}

pub(crate) fn exact_negativity(rho: &CMatrix, side_mask: usize, s: &mut Scratch) -> f64 {
    pt_into(rho, side_mask, &mut s.pt);
    negative_part(&s.pt)
}

/// One monitored point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Negativity across each monitored bipartition, in the order given to [`evolve`].
    pub negativities: Vec<f64>,
    /// `|tr ρ − 1|`.
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub monitored: Vec<Bipartition>,
    pub times: Vec<f64>,
    pub samples: Vec<Sample>,
    pub final_state: DensityMatrix,
}

impl Trajectory {
    /// Largest recorded negativity across `monitored[index]`.
    pub fn max_negativity(&self, index: usize) -> f64 {
        self.samples.iter().map(|s| s.negativities[index]).fold(0.0, |m, v| if v > m { v } else { m })
    }
}

/// Integrates one stage from `rho0`, recording a [`Sample`] every `stride`
/// steps and at both endpoints.
pub fn evolve(
    rho0: &DensityMatrix,
    stage: &StageParams,
    dir: JumpDirection,
    dt: f64,
    monitored: &[Bipartition],
    stride: usize,
) -> Result<Trajectory> {
    stage.validate()?;
    if stride == 0 {
        return Err(Error::InvalidParams("monitor stride must be at least 1".into()));
    }
    if rho0.qubits() != QubitSet::ABC {
        return Err(Error::InvalidSubset(format!("evolution needs a state on ABC, got {}", rho0.qubits())));
    }
    for bip in monitored {
        if bip.support() != QubitSet::ABC {
            return Err(Error::InvalidSubset(format!("bipartition {bip} does not cover ABC")));
        }
    }
    let masks: Vec<usize> = monitored.iter().map(|b| QubitSet::ABC.index_mask(b.side_one())).collect();
    let (n_steps, dt) = step_plan(stage.duration, dt)?;
    let gen = Generator::new(stage, dir);
    let mut scratch = Scratch::new(8);

    let mut times = Vec::with_capacity(n_steps / stride + 2);
    let mut samples = Vec::with_capacity(n_steps / stride + 2);
    let final_rho = integrate(rho0.matrix(), &gen, dt, n_steps, &mut scratch, |step, time, rho, s| {
        if step % stride == 0 || step == n_steps {
            let negativities = masks.iter().map(|&m| exact_negativity(rho, m, s)).collect();
            let min_eigenvalue = hermitian_eigenvalues_unchecked(rho)[0];
            let trace_deviation = (rho.trace().re - 1.0).abs();
            if min_eigenvalue < -CORRUPTION_TOL {
                return Err(Error::StateCorrupted { time, trace_deviation, min_eigenvalue });
            }
            times.push(time);
            samples.push(Sample { negativities, trace_deviation, min_eigenvalue });
        }
        Ok(ControlFlow::Continue(()))
    })?
    .expect("observer never breaks");

    if let Some(last) = times.last_mut() {
        *last = stage.duration;
    }
    let final_state = finalize(final_rho, stage.duration)?;
    Ok(Trajectory { monitored: monitored.to_vec(), times, samples, final_state })
}

/// Validates an integrated state, reporting failures as corruption.
pub(crate) fn finalize(rho: CMatrix, time: f64) -> Result<DensityMatrix> {
    let trace_deviation = (rho.trace().re - 1.0).abs();
    DensityMatrix::three_qubit(rho.clone()).map_err(|_| Error::StateCorrupted {
        time,
        trace_deviation,
        min_eigenvalue: hermitian_eigenvalues_unchecked(&rho.hermitize())[0],
    })
}

/// Final state of a stage without any monitoring.
pub fn evolve_state(rho0: &DensityMatrix, stage: &StageParams, dir: JumpDirection, dt: f64) -> Result<DensityMatrix> {
    stage.validate()?;
    let (n_steps, dt) = step_plan(stage.duration, dt)?;
    let gen = Generator::new(stage, dir);
    let mut scratch = Scratch::new(8);
    let rho = integrate(rho0.matrix(), &gen, dt, n_steps, &mut scratch, |_, _, _, _| Ok(ControlFlow::Continue(())))?
        .expect("observer never breaks");
    finalize(rho, stage.duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::herm_expm;
    use crate::states::{alpha, basis_state, MixtureWeight};

    fn cnot_ac_times_ib() -> CMatrix {
        // |a b c⟩ -> |a b (c xor a)⟩
        CMatrix::from_fn(8, 8, |row, col| {
            let target = if col & 0b100 != 0 { col ^ 1 } else { col };
            if row == target {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn hamiltonian_exponentiates_to_cnot() {
        let h = hamiltonian(&StageParams::ideal(Stage::Encoding));
        let u = herm_expm(&h, 1.0).unwrap();
        assert!((&u - &cnot_ac_times_ib()).frobenius_norm() < 1e-10);
        let u2 = herm_expm(&h, 2.0).unwrap();
        assert!(u2.max_abs_diff(&CMatrix::identity(8)) < 1e-10);
    }

    #[test]
    fn zero_beta_gives_zero_hamiltonian() {
        let mut p = StageParams::ideal(Stage::Decoding);
        p.beta = 0.0;
        assert_eq!(hamiltonian(&p), CMatrix::zeros(8, 8));
    }

    #[test]
    fn hamiltonian_annihilates_control_zero() {
        let h = hamiltonian(&StageParams::ideal(Stage::Encoding));
        for idx in 0..4 {
            let mut v = vec![c(0.0, 0.0); 8];
            v[idx] = c(1.0, 0.0);
            assert!(h.apply(&v).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn jump_operator_action() {
        let o = jump_operator(&StageParams::ideal(Stage::Encoding), JumpDirection::default());
        let mut v = vec![c(0.0, 0.0); 8];
        v[0b001] = c(1.0, 0.0);
        let out = o.apply(&v);
        for (i, z) in out.iter().enumerate() {
            let want = if i == 0b100 { 1.0 } else { 0.0 };
            assert_eq!(*z, c(want, 0.0));
        }
        let mut ground = vec![c(0.0, 0.0); 8];
        ground[0] = c(1.0, 0.0);
        assert!(o.apply(&ground).iter().all(|z| z.norm() == 0.0));
        assert_eq!(&o * &o, CMatrix::zeros(8, 8));

        let alt = jump_operator(&StageParams::ideal(Stage::Decoding), JumpDirection::LowerFirstRaiseCarrier);
        let mut v = vec![c(0.0, 0.0); 8];
        v[0b010] = c(1.0, 0.0);
        let out = alt.apply(&v);
        assert_eq!(out[0b001], c(1.0, 0.0));
    }

    #[test]
    fn ground_state_is_stationary() {
        let rho = basis_state(0, 0, 0).unwrap();
        for stage in [Stage::Encoding, Stage::Decoding] {
            let p = StageParams::ideal(stage);
            let r = lindblad_rhs(rho.matrix(), &hamiltonian(&p), 1.0, &jump_operator(&p, JumpDirection::default()))
                .unwrap();
            assert!(r.frobenius_norm() < 1e-15);
        }
    }

    #[test]
    fn rhs_unitary_limit_and_shape_errors() {
        let rho = alpha(MixtureWeight::new(0.4).unwrap());
        let p = StageParams::ideal(Stage::Encoding);
        let h = hamiltonian(&p);
        let o = jump_operator(&p, JumpDirection::default());
        let r = lindblad_rhs(rho.matrix(), &h, 0.0, &o).unwrap();
        let comm = (&(&h * rho.matrix()) - &(rho.matrix() * &h)).scale(c(0.0, -1.0));
        assert!(r.max_abs_diff(&comm) < 1e-15);
        assert!(matches!(lindblad_rhs(&CMatrix::zeros(4, 4), &h, 1.0, &o), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn generator_matches_direct_rhs() {
        let rho = alpha(MixtureWeight::new(0.7).unwrap());
        let p = StageParams::new(Stage::Decoding, 1.0, 0.9, 0.3, 1.0).unwrap();
        for dir in [JumpDirection::RaiseFirstLowerCarrier, JumpDirection::LowerFirstRaiseCarrier] {
            let direct = lindblad_rhs(rho.matrix(), &hamiltonian(&p), p.gamma, &jump_operator(&p, dir)).unwrap();
            let gen = Generator::new(&p, dir);
            let mut s = Scratch::new(8);
            let mut out = CMatrix::zeros(8, 8);
            gen.apply(rho.matrix(), &mut out, &mut s.kr, &mut s.or, &mut s.oro);
            assert!(out.max_abs_diff(&direct) < 1e-14);
        }
    }

    #[test]
    fn step_plan_adjusts_dt() {
        assert_eq!(step_plan(1.0, 1e-3).unwrap().0, 1000);
        let (n, dt) = step_plan(1.0, 0.3).unwrap();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(step_plan(0.0, 0.1).unwrap().0, 0);
        assert!(step_plan(1.0, 0.0).is_err());
    }

    #[test]
    fn evolve_records_endpoints_and_stride() {
        let rho = alpha(MixtureWeight::new(0.9).unwrap());
        let p = StageParams::ideal(Stage::Encoding);
        let traj = evolve(&rho, &p, JumpDirection::default(), 0.01, &[Bipartition::C_AB], 7).unwrap();
        // steps 0, 7, ..., 98 and the final step 100
        assert_eq!(traj.times.len(), 100 / 7 + 2);
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert!(evolve(&rho, &p, JumpDirection::default(), 0.01, &[], 0).is_err());
    }

    #[test]
    fn zero_duration_is_identity() {
        let rho = alpha(MixtureWeight::new(0.9).unwrap());
        let mut p = StageParams::ideal(Stage::Encoding);
        p.duration = 0.0;
        let traj = evolve(&rho, &p, JumpDirection::default(), 1e-3, &[Bipartition::C_AB], 1).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.final_state.matrix(), rho.matrix());
    }

    #[test]
    fn invalid_stage_rejected() {
        assert!(StageParams::new(Stage::Encoding, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(StageParams::new(Stage::Encoding, 1.0, -1.0, 0.0, 1.0).is_err());
        assert!(StageParams::new(Stage::Encoding, 1.0, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn huge_step_is_reported_as_corruption() {
        let rho = alpha(MixtureWeight::new(0.9).unwrap());
        let p = StageParams::new(Stage::Encoding, 1.0, 1.0, 50.0, 10.0).unwrap();
        let err = evolve(&rho, &p, JumpDirection::default(), 1.0, &[], 1).unwrap_err();
        assert!(matches!(err, Error::StateCorrupted { .. }), "{err:?}");
    }
}
