//! `edss check`: fast invariant suite.

use std::io::Write;

use edss::dynamics::{
    evolve, evolve_state, hamiltonian, jump_operator, lindblad_rhs, JumpDirection, Stage, StageParams,
};
use edss::entanglement::{negativity, Bipartition};
use edss::matcore::{herm_expm, CMatrix};
use edss::protocol::{extract_trace_out, measure_state, run_protocol, MeasurementSpec, ProtocolParams};
use edss::states::{alpha, basis_state, bell_phi_plus_ab, lambda_ent, lambda_sep, DensityMatrix, MixtureWeight};

use crate::config::jump_dir_name;
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported for information; never fails the suite.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        Self { name, status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

/// `(γ_AC, γ_BC)` of the reference run used for preservation and convergence checks.
pub const REFERENCE_GAMMAS: (f64, f64) = (0.06, 0.4);

/// CNOT with `control` (register bit mask) acting on the carrier.
fn cnot(control: usize) -> CMatrix {
    let mut data = [0.0; 64];
    for col in 0..8 {
        let image = if col & control != 0 { col ^ 1 } else { col };
        data[image * 8 + col] = 1.0;
    }
    CMatrix::from_real(8, 8, &data).expect("8x8")
}

fn conj(u: &CMatrix, rho: &DensityMatrix) -> CMatrix {
    &(u * rho.matrix()) * &u.adjoint()
}

fn cnot_reproduction() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for (stage, control) in [(Stage::Encoding, 0b100), (Stage::Decoding, 0b010)] {
        let u = herm_expm(&hamiltonian(&StageParams::ideal(stage)), 1.0)?;
        worst = worst.max((&u - &cnot(control)).frobenius_norm());
    }
    Ok(Check::new("cnot_reproduction", worst < 1e-10, format!("max ||exp(-iH) - CNOT||_F = {worst:.2e} (< 1e-10)")))
}

fn unitary_limit(cfg: &RunConfig) -> Result<Check, CliError> {
    let rho0 = alpha(MixtureWeight::new(0.9)?);
    let stage = StageParams::ideal(Stage::Encoding);
    let h = hamiltonian(&stage);
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let s = k as f64 / 10.0;
        let evolved = evolve_state(&rho0, &StageParams { duration: s, ..stage }, cfg.jump_dir, cfg.dt)?;
        let exact = conj(&herm_expm(&h, s)?, &rho0);
        worst = worst.max((evolved.matrix() - &exact).frobenius_norm());
    }
    Ok(Check::new(
        "unitary_limit",
        worst < 1e-8,
        format!("gamma = 0 vs exact conjugation at 10 times: {worst:.2e} (< 1e-8)"),
    ))
}

fn generator_norm(state: &DensityMatrix, stage: Stage, dir: JumpDirection) -> Result<f64, CliError> {
    let params = StageParams { gamma: 1.0, ..StageParams::ideal(stage) };
    Ok(lindblad_rhs(state.matrix(), &hamiltonian(&params), params.gamma, &jump_operator(&params, dir))?
        .frobenius_norm())
}

fn steady_state_000() -> Result<Check, CliError> {
    let ground = basis_state(0, 0, 0)?;
    let mut worst: f64 = 0.0;
    for stage in [Stage::Encoding, Stage::Decoding] {
        for dir in [JumpDirection::RaiseFirstLowerCarrier, JumpDirection::LowerFirstRaiseCarrier] {
            worst = worst.max(generator_norm(&ground, stage, dir)?);
        }
    }
    Ok(Check::new(
        "steady_state_000",
        worst < 1e-12,
        format!("|000> generator norm {worst:.2e} (< 1e-12), both stages and conventions"),
    ))
}

/// Which jump conventions leave a given basis state stationary.
pub fn steady_state_audit() -> Result<Vec<(String, Vec<JumpDirection>)>, CliError> {
    let cases = [
        ("|001> under encoding", basis_state(0, 0, 1)?, Stage::Encoding),
        ("|100> under decoding", basis_state(1, 0, 0)?, Stage::Decoding),
    ];
    let mut out = Vec::new();
    for (label, state, stage) in cases {
        let mut ok = Vec::new();
        for dir in [JumpDirection::RaiseFirstLowerCarrier, JumpDirection::LowerFirstRaiseCarrier] {
            if generator_norm(&state, stage, dir)? < 1e-12 {
                ok.push(dir);
            }
        }
        out.push((label.to_string(), ok));
    }
    Ok(out)
}

fn steady_state_claims() -> Result<Check, CliError> {
    let detail = steady_state_audit()?
        .into_iter()
        .map(|(label, dirs)| {
            let names: Vec<&str> = dirs.iter().map(|d| jump_dir_name(*d)).collect();
            format!("{label}: stationary under [{}]", names.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Check { name: "steady_state_claims", status: Status::Info, detail })
}

fn reference_params(cfg: &RunConfig) -> ProtocolParams {
    cfg.params().with_gammas(REFERENCE_GAMMAS.0, REFERENCE_GAMMAS.1)
}

fn trace_positivity(cfg: &RunConfig) -> Result<Check, CliError> {
    let params = reference_params(cfg);
    let enc = evolve(&alpha(params.p), &params.encoding, params.jump_dir, params.dt, &[Bipartition::C_AB], 1)?;
    let dec = evolve(&enc.final_state, &params.decoding, params.jump_dir, params.dt, &[Bipartition::C_AB], 1)?;
    let samples = enc.samples.iter().chain(&dec.samples);
    let trace = samples.clone().map(|s| s.trace_deviation).fold(0.0, f64::max);
    let min_eig = samples.map(|s| s.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let herm = dec.final_state.matrix().hermiticity_defect();
    Ok(Check::new(
        "trace_positivity",
        trace < 1e-8 && min_eig >= -1e-8 && herm < 1e-10,
        format!("max |tr - 1| {trace:.2e} (< 1e-8), min eigenvalue {min_eig:.2e} (>= -1e-8), hermiticity {herm:.2e}"),
    ))
}

fn negativity_oracles() -> Result<Check, CliError> {
    let ent = lambda_ent();
    let e_a = negativity(&ent, Bipartition::A_BC)?.value();
    let e_b = negativity(&ent, Bipartition::B_AC)?.value();
    let sep = lambda_sep();
    let sep_max = [Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB]
        .into_iter()
        .map(|b| negativity(&sep, b).map(|v| v.value()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let bell = negativity(&bell_phi_plus_ab(), Bipartition::A_B)?.value();
    let ab =
        edss::entanglement::partial_trace(&alpha(MixtureWeight::new(0.9)?), edss::QubitSet::single(edss::QubitId::C))?;
    let e_alpha = negativity(&ab, Bipartition::A_B)?.value();
    let ok = (e_a - 1.0 / 6.0).abs() < 1e-6
        && (e_b - 1.0 / 6.0).abs() < 1e-6
        && sep_max <= 1e-9
        && (bell - 0.5).abs() < 1e-12
        && (e_alpha - 0.0167).abs() < 5e-4;
    Ok(Check::new(
        "negativity_oracles",
        ok,
        format!(
            "Lambda_ent {e_a:.9}/{e_b:.9}, Lambda_sep max {sep_max:.1e}, Bell {bell:.6}, alpha(0.9) A|B {e_alpha:.6}"
        ),
    ))
}

/// Sampled `(time, E_{C|AB})` pairs and the scalar outputs of one run.
type Probe = (Vec<(f64, f64)>, Vec<f64>);

type CheckFn<'a> = Box<dyn Fn() -> Result<Check, CliError> + 'a>;

/// Every compared quantity of the reference run, at step `dt`.
fn convergence_probe(params: &ProtocolParams) -> Result<Probe, CliError> {
    let r = run_protocol(params)?;
    let standard =
        measure_state(&r.state_after_decoding, MeasurementSpec::STANDARD).map(|m| m.e_ab).unwrap_or(f64::NAN);
    Ok((
        r.separability_trace.clone(),
        vec![r.e_a_bc_after_encoding, r.e_b_ac_after_decoding, extract_trace_out(&r), standard],
    ))
}

fn integrator_convergence(cfg: &RunConfig) -> Result<Check, CliError> {
    let coarse = reference_params(cfg);
    let fine = ProtocolParams { dt: coarse.dt / 2.0, ..coarse };
    let (trace_c, scalars_c) = convergence_probe(&coarse)?;
    let (trace_f, scalars_f) = convergence_probe(&fine)?;
    let mut worst: f64 = scalars_c.iter().zip(&scalars_f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // Each coarse sample time appears in the fine trace.
    for (t, e) in &trace_c {
        if let Some((_, ef)) = trace_f.iter().find(|(tf, _)| (tf - t).abs() < 1e-9) {
            worst = worst.max((e - ef).abs());
        }
    }
    Ok(Check::new(
        "integrator_convergence",
        worst < 1e-6,
        format!("dt = {} vs dt/2 on the reference run: max change {worst:.2e} (< 1e-6)", coarse.dt),
    ))
}

fn ideal_protocol(cfg: &RunConfig) -> Result<Check, CliError> {
    let params = ProtocolParams { dt: cfg.dt, jump_dir: cfg.jump_dir, ..ProtocolParams::default() };
    let r = run_protocol(&params)?;
    let e = measure_state(&r.state_after_decoding, MeasurementSpec::STANDARD)?.e_ab;
    let gain = e - r.e_ab_initial;
    Ok(Check::new(
        "ideal_protocol",
        r.is_feasible() && (e - 0.5).abs() < 1e-8 && (gain - 0.4833).abs() < 1e-3,
        format!("feasible {}, standard-basis E(A|B) {e:.9}, gain {gain:.4}", r.is_feasible()),
    ))
}

/// Runs every check. Errors inside a check count as its failure.
pub fn run_checks(cfg: &RunConfig) -> Vec<Check> {
    let checks: [(&'static str, CheckFn); 8] = [
        ("cnot_reproduction", Box::new(cnot_reproduction)),
        ("unitary_limit", Box::new(|| unitary_limit(cfg))),
        ("steady_state_000", Box::new(steady_state_000)),
        ("steady_state_claims", Box::new(steady_state_claims)),
        ("trace_positivity", Box::new(|| trace_positivity(cfg))),
        ("negativity_oracles", Box::new(negativity_oracles)),
        ("integrator_convergence", Box::new(|| integrator_convergence(cfg))),
        ("ideal_protocol", Box::new(|| ideal_protocol(cfg))),
    ];
    checks
        .into_iter()
        .map(|(name, f)| f().unwrap_or_else(|e| Check { name, status: Status::Fail, detail: format!("error: {e}") }))
        .collect()
}

/// Prints one line per check; returns `true` iff none failed.
pub fn cmd_check(cfg: &RunConfig, out: &mut impl Write) -> Result<bool, CliError> {
    let checks = crate::with_workers(cfg, || run_checks(cfg))?;
    for c in &checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        writeln!(out, "[{tag}] {:<24} {}", c.name, c.detail)?;
    }
    Ok(checks.iter().all(|c| c.status != Status::Fail))
}
