//! Condition numbers for a line interface `y = δ` that approaches a mesh
//! line, for a few coefficient contrasts.
//!
//! Usage: `cargo run --release --example smallcut`

use ife::localife::orient;
use ife::prelude::*;
use ife::solve::{condition_report, DEFAULT_SEED};

fn main() -> Result<()> {
    for rho in [1.0 / 640.0, 1.0, 640.0] {
        println!("rho = {rho:.3e} (coefficient below / above)");
        for l in 0..=8 {
            let delta = 1.0 / (40.0 * 2f64.powi(l));
            // relabel so that the larger coefficient is on the minus side
            let (iface, beta, _) = orient(Interface::horizontal(delta), Coefficients::new(rho, 1.0)?);
            let data = ExactSolution::constant(0.0).problem_data(&iface, beta);
            let disc = Discretization::build(40, iface, beta, &SchemeConfig::new(1), &data)?;
            let r = condition_report(&disc.system.k, EigenMethod::Auto, DEFAULT_SEED)?;
            println!("  delta={delta:.3e} kappa={:.3e} kappa_S={:.3e}", r.kappa, r.kappa_s);
        }
    }
    Ok(())
}
