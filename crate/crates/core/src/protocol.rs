//! The full distribution pipeline: prepare `α(p)`, encode, decode, keep the
//! carrier separable from `AB` throughout, and extract `A|B` entanglement.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::dynamics::{
    evolve, finalize, integrate, negativity_above, step_plan, Generator, JumpDirection, Scratch, Stage, StageParams,
    DEFAULT_DT,
};
use crate::entanglement::{
    negative_part, negativity, partial_trace, partial_transpose_raw, Bipartition, DEFAULT_EPS_SEP,
};
use crate::error::{Error, Result};
use crate::matcore::{c, CMatrix};
use crate::states::{alpha, DensityMatrix, MixtureWeight, QubitId, QubitSet};

/// Post-selection probabilities below this are refused.
pub const MIN_PROBABILITY: f64 = 1e-12;

const CARRIER_MASK: usize = 0b001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub p: MixtureWeight,
    pub encoding: StageParams,
    pub decoding: StageParams,
    pub jump_dir: JumpDirection,
    pub dt: f64,
    pub eps_sep: f64,
}

impl Default for ProtocolParams {
    /// `p = 0.9`, ideal stages (`t = t_AC = t_BC = 1`, `β = 1`, `γ = 0`).
    fn default() -> Self {
        Self {
            p: MixtureWeight::new(0.9).expect("constant"),
            encoding: StageParams::ideal(Stage::Encoding),
            decoding: StageParams::ideal(Stage::Decoding),
            jump_dir: JumpDirection::default(),
            dt: DEFAULT_DT,
            eps_sep: DEFAULT_EPS_SEP,
        }
    }
}

impl ProtocolParams {
    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.p = MixtureWeight::new(p)?;
        Ok(self)
    }

    pub fn with_gammas(mut self, gamma_ac: f64, gamma_bc: f64) -> Self {
        self.encoding.gamma = gamma_ac;
        self.decoding.gamma = gamma_bc;
        self
    }

    pub fn with_betas(mut self, beta_ac: f64, beta_bc: f64) -> Self {
        self.encoding.beta = beta_ac;
        self.decoding.beta = beta_bc;
        self
    }

    pub fn with_jump_dir(mut self, dir: JumpDirection) -> Self {
        self.jump_dir = dir;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.encoding.validate()?;
        self.decoding.validate()?;
        if self.encoding.stage != Stage::Encoding || self.decoding.stage != Stage::Decoding {
            return Err(Error::InvalidParams("stages must be (encoding, decoding) in that order".into()));
        }
        if !(self.eps_sep > 0.0) {
            return Err(Error::InvalidParams(format!("eps_sep must be positive, got {}", self.eps_sep)));
        }
        step_plan(1.0, self.dt)?;
        Ok(())
    }
}

/// Carrier projector `|ψ⟩⟨ψ|` with `|ψ⟩ = cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSpec {
    theta: f64,
    phi: f64,
}

impl MeasurementSpec {
    /// Standard-basis outcome `|0⟩`.
    pub const STANDARD: MeasurementSpec = MeasurementSpec { theta: 0.0, phi: 0.0 };

    /// Requires `θ ∈ [0, π/2]` and `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidParams(format!("measurement angles out of range: theta = {theta}, phi = {phi}")));
        }
        Ok(Self { theta, phi })
    }

    /// Maps arbitrary angles onto the canonical ranges, using the fact that
    /// projectors are blind to a global phase of `|ψ⟩`.
    pub fn canonical(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(PI);
        let mut phi = phi;
        if theta > FRAC_PI_2 {
            // cos(π-θ)|0⟩ + e^{iφ} sin(π-θ)|1⟩ = -(cos θ|0⟩ + e^{i(φ+π)} sin θ|1⟩)
            theta = PI - theta;
            phi += PI;
        }
        let phi = phi.rem_euclid(TAU);
        Self { theta, phi: if phi >= TAU { 0.0 } else { phi } }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn phi(self) -> f64 {
        self.phi
    }

    /// The orthogonal outcome.
    pub fn complement(self) -> Self {
        Self::canonical(FRAC_PI_2 - self.theta, self.phi + PI)
    }

    pub fn ket(self) -> [Complex64; 2] {
        [c(self.theta.cos(), 0.0), Complex64::from_polar(self.theta.sin(), self.phi)]
    }

    /// `1_AB ⊗ |ψ⟩⟨ψ|_C`.
    pub fn projector(self) -> CMatrix {
        let k = self.ket();
        let pi_c = CMatrix::outer(&k, &k);
        crate::matcore::kron(&CMatrix::identity(4), &pi_c)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub params: ProtocolParams,
    pub state_after_encoding: DensityMatrix,
    pub state_after_decoding: DensityMatrix,
    /// Largest `E_{C|AB}` over every monitored instant of both stages.
    pub max_cab_negativity: f64,
    /// `(time, E_{C|AB})`, with decoding times offset by the encoding duration.
    pub separability_trace: Vec<(f64, f64)>,
    pub e_a_bc_after_encoding: f64,
    pub e_b_ac_after_decoding: f64,
    /// `E_{A|B}` of `Tr_C α(p)`.
    pub e_ab_initial: f64,
}

impl ProtocolResult {
    pub fn is_feasible(&self) -> bool {
        self.max_cab_negativity <= self.params.eps_sep
    }
}

/// `E_{A|B}` of the `AB` marginal of `α(p)`.
pub fn initial_ab_entanglement(p: MixtureWeight) -> f64 {
    let ab = partial_trace(&alpha(p), QubitSet::single(QubitId::C)).expect("valid marginal");
    negativity(&ab, Bipartition::A_B).expect("AB state").value()
}

/// Runs both stages with `E_{C|AB}` evaluated at every integration step.
pub fn run_protocol(params: &ProtocolParams) -> Result<ProtocolResult> {
    params.validate()?;
    let rho0 = alpha(params.p);
    let e_ab_initial = initial_ab_entanglement(params.p);

    let enc = evolve(&rho0, &params.encoding, params.jump_dir, params.dt, &[Bipartition::C_AB], 1)?;
    let dec = evolve(&enc.final_state, &params.decoding, params.jump_dir, params.dt, &[Bipartition::C_AB], 1)?;

    let offset = params.encoding.duration;
    let separability_trace: Vec<(f64, f64)> = enc
        .times
        .iter()
        .zip(&enc.samples)
        .map(|(t, s)| (*t, s.negativities[0]))
        .chain(dec.times.iter().zip(&dec.samples).skip(1).map(|(t, s)| (t + offset, s.negativities[0])))
        .collect();
    let max_cab_negativity = enc.max_negativity(0).max(dec.max_negativity(0));

    Ok(ProtocolResult {
        params: *params,
        e_a_bc_after_encoding: negativity(&enc.final_state, Bipartition::A_BC)?.value(),
        e_b_ac_after_decoding: negativity(&dec.final_state, Bipartition::B_AC)?.value(),
        state_after_encoding: enc.final_state,
        state_after_decoding: dec.final_state,
        max_cab_negativity,
        separability_trace,
        e_ab_initial,
    })
}

/// Outcome of a feasibility screen.
#[derive(Debug, Clone)]
pub(crate) struct Screen {
    /// Exact `E_{C|AB}` at the first violating instant, if any.
    pub violation: Option<f64>,
    pub state_after_decoding: Option<DensityMatrix>,
}

impl Screen {
    pub fn feasible(&self) -> bool {
        self.violation.is_none()
    }
}

/// Integrates one stage, stopping at the first instant where `E_{C|AB}`
/// exceeds `eps`. Returns `Err(value)` on violation, `Ok(state)` otherwise.
pub(crate) fn screen_stage(
    rho0: &CMatrix,
    stage: &StageParams,
    dir: JumpDirection,
    dt: f64,
    eps: f64,
    check_initial: bool,
) -> Result<std::result::Result<CMatrix, f64>> {
    let (n_steps, dt) = step_plan(stage.duration, dt)?;
    let gen = Generator::new(stage, dir);
    let mut scratch = Scratch::new(8);
    let mut violation = None;
    let out = integrate(rho0, &gen, dt, n_steps, &mut scratch, |step, _, rho, s| {
        if step == 0 && !check_initial {
            return Ok(ControlFlow::Continue(()));
        }
        if let Some(v) = negativity_above(rho, CARRIER_MASK, eps, s) {
            violation = Some(v);
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(match (out, violation) {
        (Some(rho), None) => Ok(rho),
        (_, Some(v)) => Err(v),
        (None, None) => unreachable!("integration only stops early on a violation"),
    })
}

/// Feasibility screen of the encoding stage alone.
pub(crate) fn screen_encoding(params: &ProtocolParams) -> Result<std::result::Result<CMatrix, f64>> {
    screen_stage(alpha(params.p).matrix(), &params.encoding, params.jump_dir, params.dt, params.eps_sep, true)
}

/// Feasibility screen of the decoding stage from a given post-encoding state.
pub(crate) fn screen_decoding(
    params: &ProtocolParams,
    after_encoding: &CMatrix,
) -> Result<std::result::Result<CMatrix, f64>> {
    screen_stage(after_encoding, &params.decoding, params.jump_dir, params.dt, params.eps_sep, false)
}

/// Whole-protocol screen, stopping at the first separability violation.
pub(crate) fn screen(params: &ProtocolParams) -> Result<Screen> {
    params.validate()?;
    let enc = match screen_encoding(params)? {
        Ok(rho) => rho,
        Err(v) => return Ok(Screen { violation: Some(v), state_after_decoding: None }),
    };
    match screen_decoding(params, &enc)? {
        Ok(dec) => Ok(Screen {
            violation: None,
            state_after_decoding: Some(finalize(dec, params.encoding.duration + params.decoding.duration)?),
        }),
        Err(v) => Ok(Screen { violation: Some(v), state_after_decoding: None }),
    }
}

/// `true` iff `E_{C|AB} ≤ eps_sep` at every monitored instant of both stages.
///
/// Equivalent to `run_protocol(params)?.is_feasible()`, but stops at the
/// first violation and only diagonalizes when a cheap positivity test fails.
pub fn is_edss_feasible(params: &ProtocolParams) -> Result<bool> {
    Ok(screen(params)?.feasible())
}

/// `E_{A|B}` after tracing out the carrier.
pub fn extract_trace_out(result: &ProtocolResult) -> f64 {
    trace_out_entanglement(&result.state_after_decoding)
}

pub fn trace_out_entanglement(state: &DensityMatrix) -> f64 {
    let ab = partial_trace(state, QubitSet::single(QubitId::C)).expect("three-qubit state");
    negativity(&ab, Bipartition::A_B).expect("AB state").value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredExtraction {
    /// `E_{A|B}` of the post-selected state.
    pub e_ab: f64,
    /// Probability of the post-selected outcome.
    pub prob: f64,
}

/// Unnormalized `⟨ψ|_C ρ |ψ⟩_C`, i.e. `Tr_C[(1 ⊗ Π) ρ (1 ⊗ Π)]`.
pub(crate) fn conditional_ab(rho: &CMatrix, ket: [Complex64; 2]) -> CMatrix {
    let bra = [ket[0].conj(), ket[1].conj()];
    CMatrix::from_fn(4, 4, |i, j| {
        let mut acc = c(0.0, 0.0);
        for (a, ba) in bra.iter().enumerate() {
            for (b, kb) in ket.iter().enumerate() {
                acc += ba * rho[(2 * i + a, 2 * j + b)] * kb;
            }
        }
        acc
    })
}

/// Post-selected `E_{A|B}` and outcome probability, or `None` below [`MIN_PROBABILITY`].
pub(crate) fn measured_negativity(rho: &CMatrix, m: MeasurementSpec) -> (f64, Option<f64>) {
    let mut ab = conditional_ab(rho, m.ket());
    let prob = ab.trace().re;
    if !(prob >= MIN_PROBABILITY) {
        return (prob, None);
    }
    crate::matcore::hermitize_in_place(&mut ab);
    let pt = partial_transpose_raw(&ab, QubitSet::AB, QubitSet::single(QubitId::A));
    (prob, Some(negative_part(&pt) / prob))
}

/// Projects the carrier on `|ψ⟩`, renormalizes, and measures `E_{A|B}`.
pub fn extract_measure(result: &ProtocolResult, m: MeasurementSpec) -> Result<MeasuredExtraction> {
    measure_state(&result.state_after_decoding, m)
}

pub fn measure_state(state: &DensityMatrix, m: MeasurementSpec) -> Result<MeasuredExtraction> {
    match measured_negativity(state.matrix(), m) {
        (prob, Some(e_ab)) => Ok(MeasuredExtraction { e_ab, prob }),
        (prob, None) => Err(Error::ZeroProbability(prob)),
    }
}

/// Post-selected `AB` state for outcome `m`, normalized.
pub fn post_selected_state(state: &DensityMatrix, m: MeasurementSpec) -> Result<(DensityMatrix, f64)> {
    let ab = conditional_ab(state.matrix(), m.ket());
    let prob = ab.trace().re;
    if !(prob >= MIN_PROBABILITY) {
        return Err(Error::ZeroProbability(prob));
    }
    Ok((DensityMatrix::new(ab.scale_real(1.0 / prob), QubitSet::AB)?, prob))
}

/// Extracted `E_{A|B}` minus the `E_{A|B}` present before encoding.
pub fn entanglement_gain(result: &ProtocolResult, extracted_e_ab: f64) -> f64 {
    extracted_e_ab - result.e_ab_initial
}
