//! Growth of `κ(K_h)` and of the diagonally scaled `κ_S(K_h)` under mesh
//! refinement.
//!
//! Usage: `cargo run --release --example global_conditioning -- [p]`

use ife::analysis::growth_rate;
use ife::prelude::*;
use ife::solve::{condition_report, DEFAULT_SEED};

fn main() -> Result<()> {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4)?.flipped();
    let beta = Coefficients::new(1.0, 2.0)?;
    // the matrix does not depend on the data
    let data = ExactSolution::constant(0.0).problem_data(&iface, beta);
    let ns = [10, 20, 40];
    let mut k = Vec::new();
    let mut ks = Vec::new();
    for n in ns {
        let disc = Discretization::build(n, iface, beta, &SchemeConfig::new(p), &data)?;
        let r = condition_report(&disc.system.k, EigenMethod::Auto, DEFAULT_SEED)?;
        println!(
            "N={n:3} dofs={:6} mu=[{:.3e}, {:.3e}] kappa={:.3e} kappa_S={:.3e}",
            disc.num_dofs(),
            r.mu_min,
            r.mu_max,
            r.kappa,
            r.kappa_s
        );
        k.push(r.kappa);
        ks.push(r.kappa_s);
    }
    println!("growth: kappa {:.2}, kappa_S {:.2}", growth_rate(&ns, &k), growth_rate(&ns, &ks));
    Ok(())
}
