//! Prints how much incoherent noise each stage tolerates at the reference
//! setup, and what the optimal carrier measurement extracts at the edge.
//!
//! cargo run --release -p edss --example noise_budget

use edss::sweeps::{max_feasible_gamma, optimize_measurement, GammaTarget, DEFAULT_BISECT_TOL};
use edss::{run_protocol, ProtocolParams};

fn main() -> edss::Result<()> {
    for p in [0.9, 0.5, 0.1] {
        let base = ProtocolParams::default().with_p(p)?;
        let g_ac = max_feasible_gamma(&base, GammaTarget::GammaAc, 0.5, DEFAULT_BISECT_TOL)?;
        let g_bc = max_feasible_gamma(&base, GammaTarget::GammaBc, 2.0, DEFAULT_BISECT_TOL)?;
        let edge = run_protocol(&base.with_gammas(0.0, g_bc))?;
        let best = optimize_measurement(&edge.state_after_decoding);
        println!(
            "p = {p}: gamma_AC <= {g_ac:.4}, gamma_BC <= {g_bc:.4}; at the gamma_BC edge E(A|B) = {:.4} (theta {:.4})",
            best.e_star, best.theta_star
        );
    }
    Ok(())
}
