//! Convergence of the enriched IFE solution for a circular interface.
//!
//! Usage: `cargo run --release --example convergence -- [beta_inside] [p]`

use ife::prelude::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let bp: f64 = args.get(1).map_or(Ok(2.0), |s| s.parse()).unwrap_or(2.0);
    let ps: Vec<usize> = match args.get(2) {
        Some(s) => vec![s.parse().unwrap_or(1)],
        None => vec![1, 2, 3],
    };
    let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4)?.flipped();
    let beta = Coefficients::new(1.0, bp)?;
    let exact = ExactSolution::example2(beta, Side::Minus);
    let data = exact.problem_data(&iface, beta);
    for p in ps {
        let config = SchemeConfig::new(p);
        let mut l2 = Vec::new();
        let mut h1 = Vec::new();
        for n in [10, 20, 40] {
            let t = std::time::Instant::now();
            let disc = Discretization::build(n, iface, beta, &config, &data)?;
            let sol = disc.solve()?;
            let e = error_norms(&disc, &sol, &exact)?;
            println!(
                "p={p} N={n:3} dofs={:6} L2={:.3e} H1={:.3e} energy={:.3e} ({:.2}s)",
                e.n_dofs,
                e.l2,
                e.h1,
                e.energy,
                t.elapsed().as_secs_f64()
            );
            l2.push((n, e.l2));
            h1.push((n, e.h1));
        }
        let r2 = fit_rates(&l2)?;
        let r1 = fit_rates(&h1)?;
        println!(
            "p={p}: L2 slope {:.2}, H1 slope {:.2}",
            r2.slope.unwrap_or(f64::NAN),
            r1.slope.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
