//! Error norms against exact solutions, convergence-rate fitting and result
//! rows.

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Discretization, ExactSolution, Solution};
use crate::geometry::{diameter, Side};
use crate::quadrature::{cut_rules, edge_rules};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub n: usize,
    pub n_dofs: usize,
    pub l2: f64,
    /// Broken `H¹` seminorm.
    pub h1: f64,
    /// Broken energy norm with edge and interface jump and flux terms.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub degree: usize,
    /// Include the enrichment in the discrete solution.
    pub with_enrichment: bool,
}

impl NormOptions {
    pub fn for_degree(p: usize) -> NormOptions {
        NormOptions {
            degree: 2 * p + 2,
            with_enrichment: true,
        }
    }
}

/// Errors of the enriched solution `ũ_h + Φ_h` with quadrature degree `2p + 2`.
pub fn error_norms(disc: &Discretization, sol: &Solution, exact: &ExactSolution) -> Result<ErrorReport> {
    error_norms_with(disc, &sol.coeffs, exact, NormOptions::for_degree(disc.config.p))
}

pub fn error_norms_with(
    disc: &Discretization,
    coeffs: &[f64],
    exact: &ExactSolution,
    opts: NormOptions,
) -> Result<ErrorReport> {
    if coeffs.len() != disc.num_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} degrees of freedom",
            coeffs.len(),
            disc.num_dofs()
        )));
    }
    let d = opts.degree;
    let pp = disc.config.penalty;
    let sg0 = pp.sigma0 * disc.gamma;
    let sg1 = pp.sigma1 * disc.gamma;
    let err = |t: usize, s: Side, x: Point| {
        let (v, g) = disc.eval(coeffs, t, s, x, opts.with_enrichment);
        (exact.value(s, x) - v, exact.gradient(s, x) - g)
    };
    let parts: Vec<[f64; 3]> = (0..disc.mesh.num_triangles())
        .into_par_iter()
        .map(|t| -> Result<[f64; 3]> {
            let mut acc = [0.0; 3];
            for &s in disc.element_sides(t) {
                let b = disc.beta.get(s);
                for (x, w) in disc.element_rule(t, s, d)?.iter() {
                    let (e, g) = err(t, s, x);
                    acc[0] += w * e * e;
                    acc[1] += w * g.norm_squared();
                    acc[2] += w * b * g.norm_squared();
                }
            }
            if let Some(cut) = disc.cls.cuts[t].as_ref() {
                let h = diameter(disc.mesh.triangle_points(t));
                let q = cut_rules(cut, &disc.iface, d)?;
                for (x, w, n) in q.interface.iter() {
                    let (ep, gp) = err(t, Side::Plus, x);
                    let (em, gm) = err(t, Side::Minus, x);
                    let jump = em - ep;
                    let flux = 0.5 * (disc.beta.minus * gm.dot(&n) + disc.beta.plus * gp.dot(&n));
                    acc[2] += w * (sg1 / h * jump * jump + h / sg1 * flux * flux);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = parts.iter().fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    for (e, edge) in disc.mesh.edges.iter().enumerate() {
        if !disc.cls.interface_edges[e] || edge.adjacent.len() != 2 {
            continue;
        }
        let (t1, k1) = edge.adjacent[0];
        let (t2, _) = edge.adjacent[1];
        let v = disc.mesh.triangle_points(t1);
        let (a, b) = (v[k1], v[(k1 + 1) % 3]);
        let len = (b - a).norm();
        let n = Point::new(b.y - a.y, a.x - b.x) / len;
        for (s, rule) in edge_rules(a, b, &disc.iface, d)? {
            let beta = disc.beta.get(s);
            for (x, w) in rule.iter() {
                let (e1, g1) = err(t1, s, x);
                let (e2, g2) = err(t2, s, x);
                let jump = e1 - e2;
                let flux = 0.5 * beta * (g1 + g2).dot(&n);
                total[2] += w * (sg0 / len * jump * jump + len / sg0 * flux * flux);
            }
        }
    }
    Ok(ErrorReport {
        h: disc.h(),
        n: disc.mesh.n,
        n_dofs: disc.num_dofs(),
        l2: total[0].max(0.0).sqrt(),
        h1: total[1].max(0.0).sqrt(),
        energy: total[2].max(0.0).sqrt(),
    })
}

/// Successive and least-squares convergence rates of errors against `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub n: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log₂(e_{2h}/e_h)` generalized to arbitrary ratios; `None` where an
    /// error is not positive.
    pub rates: Vec<Option<f64>>,
    /// Least-squares slope of `log e` against `log(1/N)` over the positive
    /// errors.
    pub slope: Option<f64>,
}

pub fn fit_rates(pairs: &[(usize, f64)]) -> Result<RateTable> {
    if pairs.len() < 2 {
        return Err(Error::InvalidConfig("rate fitting needs at least two points".into()));
    }
    if pairs.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidConfig(
            "rate fitting needs strictly increasing N".into(),
        ));
    }
    let mut rates = vec![None];
    for w in pairs.windows(2) {
        let (n0, e0) = w[0];
        let (n1, e1) = w[1];
        rates.push((e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()));
    }
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        Some(-loglog_slope(&pts))
    } else {
        None
    };
    Ok(RateTable {
        n: pairs.iter().map(|p| p.0).collect(),
        errors: pairs.iter().map(|p| p.1).collect(),
        rates,
        slope,
    })
}

/// Least-squares slope of `y` against `x`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Growth exponent `r` of `v ~ N^r` by least squares in log-log.
pub fn growth_rate(ns: &[usize], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(values)
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .collect();
    loglog_slope(&pts)
}

/// One output row of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultRow {
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
    #[serde(rename = "N_dof")]
    pub n_dof: usize,
    #[serde(rename = "errL2")]
    pub err_l2: Option<f64>,
    #[serde(rename = "errH1")]
    pub err_h1: Option<f64>,
    #[serde(rename = "errEnergy")]
    pub err_energy: Option<f64>,
    #[serde(rename = "rateL2")]
    pub rate_l2: Option<f64>,
    #[serde(rename = "rateH1")]
    pub rate_h1: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "kappaS")]
    pub kappa_s: Option<f64>,
    pub eta: Option<f64>,
    pub seconds: Option<f64>,
}

impl ResultRow {
    pub const HEADER: [&'static str; 13] = [
        "p", "N", "h", "N_dof", "errL2", "errH1", "errEnergy", "rateL2", "rateH1", "kappa", "kappaS",
        "eta", "seconds",
    ];

    /// CSV cells in [`ResultRow::HEADER`] order; missing values are empty.
    pub fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        vec![
            self.p.to_string(),
            self.n.to_string(),
            fmt_float(self.h),
            self.n_dof.to_string(),
            opt(self.err_l2),
            opt(self.err_h1),
            opt(self.err_energy),
            opt(self.rate_l2),
            opt(self.rate_h1),
            opt(self.kappa),
            opt(self.kappa_s),
            opt(self.eta),
            opt(self.seconds),
        ]
    }
}

/// Shortest round-trip scientific form, `inf` and `nan` spelled out.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}
