//! `edss run`: one protocol run with every extraction.

use std::fs;
use std::io::Write;

use edss::protocol::{extract_trace_out, measure_state, run_protocol, MeasurementSpec, ProtocolResult};
use edss::sweeps::{optimize_measurement, OptimalMeasurement};
use serde_json::json;

use crate::config::jump_dir_name;
use crate::{echo_config, CliError, RunConfig};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone)]
pub struct RunReport {
    pub result: ProtocolResult,
    pub trace_out: f64,
    /// `None` when the `|0⟩` outcome has negligible probability.
    pub standard: Option<(f64, f64)>,
    pub optimal: OptimalMeasurement,
}

impl RunReport {
    pub fn feasible(&self) -> bool {
        self.result.is_feasible()
    }

    /// Gain of the optimal measurement over the initial `E_{A|B}`.
    pub fn gain(&self) -> f64 {
        self.optimal.e_star - self.result.e_ab_initial
    }

    pub fn to_json(&self, cfg: &RunConfig) -> serde_json::Value {
        let r = &self.result;
        json!({
            "config": {
                "p": cfg.p, "t": cfg.t, "t_ac": cfg.t_ac, "t_bc": cfg.t_bc,
                "gamma_ac": cfg.gamma_ac, "gamma_bc": cfg.gamma_bc,
                "beta_ac": cfg.beta_ac, "beta_bc": cfg.beta_bc,
                "dt": cfg.dt, "eps_sep": cfg.eps_sep, "jump_dir": jump_dir_name(cfg.jump_dir),
            },
            "feasible": self.feasible(),
            "max_cab_negativity": r.max_cab_negativity,
            "e_ab_initial": r.e_ab_initial,
            "e_a_bc_after_encoding": r.e_a_bc_after_encoding,
            "e_b_ac_after_decoding": r.e_b_ac_after_decoding,
            "extraction": {
                "trace_out": { "e_ab": self.trace_out, "gain": self.trace_out - r.e_ab_initial },
                "standard": self.standard.map(|(e, prob)| json!({
                    "e_ab": e, "prob": prob, "gain": e - r.e_ab_initial,
                })),
                "optimal": {
                    "e_ab": self.optimal.e_star,
                    "theta": self.optimal.theta_star,
                    "phi": self.optimal.phi_star,
                    "gain": self.gain(),
                },
            },
        })
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let result = run_protocol(&cfg.params())?;
    let trace_out = extract_trace_out(&result);
    let standard =
        measure_state(&result.state_after_decoding, MeasurementSpec::STANDARD).ok().map(|m| (m.e_ab, m.prob));
    let optimal = optimize_measurement(&result.state_after_decoding);
    Ok(RunReport { result, trace_out, standard, optimal })
}

/// Runs, prints a report to `out`, and writes the summary and echoed config.
pub fn cmd_run(cfg: &RunConfig, out: &mut impl Write) -> Result<RunReport, CliError> {
    let report = run(cfg)?;
    let r = &report.result;
    writeln!(out, "feasible                {}", report.feasible())?;
    writeln!(out, "max E(C|AB)             {:.3e}", r.max_cab_negativity)?;
    writeln!(out, "E(A|B) initial          {:.6}", r.e_ab_initial)?;
    writeln!(out, "E(A|BC) after encoding  {:.6}", r.e_a_bc_after_encoding)?;
    writeln!(out, "E(B|AC) after decoding  {:.6}", r.e_b_ac_after_decoding)?;
    writeln!(out, "E(A|B) trace-out        {:.6}", report.trace_out)?;
    match report.standard {
        Some((e, prob)) => writeln!(out, "E(A|B) standard basis   {e:.6}  (prob {prob:.6})")?,
        None => writeln!(out, "E(A|B) standard basis   NA  (outcome |0> has zero probability)")?,
    }
    writeln!(
        out,
        "E(A|B) optimal          {:.6}  (theta {:.6}, phi {:.6})",
        report.optimal.e_star, report.optimal.theta_star, report.optimal.phi_star
    )?;
    writeln!(out, "gain (optimal)          {:.6}", report.gain())?;

    echo_config(cfg)?;
    let summary = serde_json::to_string_pretty(&report.to_json(cfg)).expect("json values are finite or null");
    fs::write(cfg.out_dir.join(SUMMARY_FILE), summary + "\n")?;
    Ok(report)
}
