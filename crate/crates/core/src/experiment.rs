//! Configuration-driven numerical studies.
//!
//! An [`ExperimentConfig`] is read from TOML (or taken from a named preset),
//! resolved so that every default is explicit, run, and written as one CSV
//! table plus a JSON manifest holding the resolved configuration and a short
//! summary (fitted slopes, condition-number spreads).
//!
//! Coefficients are given with the plus/minus labels of the geometry and must
//! satisfy `β⁻ ≥ β⁺`. Sweeps over a contrast `ρ = β⁺/β⁻` relabel every point
//! with `ρ > 1` by exchanging the two sides, which leaves the physical problem
//! unchanged.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{error_norms, fit_rates, fmt_float, growth_rate, ResultRow};
use crate::assembly::{Discretization, ExactSolution, GammaMode, PenaltyParams, SchemeConfig};
use crate::geometry::{Interface, Side};
use crate::localife::{local_condition, local_matrix, orient, Coefficients};
use crate::solve::{
    condition_report, dense_solve, roundoff_eta, solve, CsrMatrix, DenseMethod, EigenMethod,
    SolverKind, DEFAULT_SEED,
};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LocalConditioning,
    Convergence,
    GlobalConditioning,
    ContrastSweep,
    SmallcutSweep,
    Roundoff,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LocalConditioning => "local-conditioning",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::GlobalConditioning => "global-conditioning",
            ExperimentKind::ContrastSweep => "contrast-sweep",
            ExperimentKind::SmallcutSweep => "smallcut-sweep",
            ExperimentKind::Roundoff => "roundoff",
        }
    }
}

/// Interface geometry with the side labels of the two subdomains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryConfig {
    Circle {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        /// Label of the disk interior.
        inside: Side,
    },
    /// The line `y = delta`.
    Line {
        delta: f64,
        /// Label of the half `y < delta`.
        below: Side,
    },
}

impl GeometryConfig {
    pub fn interface(&self) -> Result<Interface> {
        match *self {
            GeometryConfig::Circle {
                center,
                radius,
                inside,
            } => {
                let c = Interface::circle(center[0], center[1], radius)?;
                Ok(if inside == Side::Plus { c } else { c.flipped() })
            }
            GeometryConfig::Line { delta, below } => {
                if !delta.is_finite() {
                    return Err(field_err("geometry.delta", format!("must be finite, got {delta}")));
                }
                let l = Interface::horizontal(delta);
                Ok(if below == Side::Plus { l } else { l.flipped() })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    /// Edge penalty; `10 p²` when absent.
    pub sigma0: Option<f64>,
    /// Interface penalty; `10 p²` when absent.
    pub sigma1: Option<f64>,
    pub theta: Option<f64>,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    pub gamma: Option<GammaMode>,
    /// Keep the interface penalty and flux terms.
    pub interface_penalty: Option<bool>,
}

/// Element study on a single triangle; the circle radius is `anchor - d_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalConfig {
    pub element: [[f64; 2]; 3],
    pub anchor: f64,
    pub dr: Vec<f64>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Values of `ρ = β⁺/β⁻`; `β⁻` is held at `beta_minus`.
    #[serde(default)]
    pub contrasts: Vec<f64>,
    /// Line positions; when empty they come from `levels`.
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// `delta = 1 / (delta_base 2^l)` for each level `l`.
    #[serde(default)]
    pub levels: Vec<u32>,
    pub delta_base: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundoffMethod {
    /// Envelope Cholesky on the sparse matrix.
    SparseCholesky,
    Cholesky,
    GaussNoPivot,
    GaussPivot,
}

impl RoundoffMethod {
    pub fn name(self) -> &'static str {
        match self {
            RoundoffMethod::SparseCholesky => "sparse-cholesky",
            RoundoffMethod::Cholesky => DenseMethod::Cholesky.name(),
            RoundoffMethod::GaussNoPivot => DenseMethod::GaussNoPivot.name(),
            RoundoffMethod::GaussPivot => DenseMethod::GaussPivot.name(),
        }
    }

    fn dense(self) -> Option<DenseMethod> {
        match self {
            RoundoffMethod::SparseCholesky => None,
            RoundoffMethod::Cholesky => Some(DenseMethod::Cholesky),
            RoundoffMethod::GaussNoPivot => Some(DenseMethod::GaussNoPivot),
            RoundoffMethod::GaussPivot => Some(DenseMethod::GaussPivot),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundoffConfig {
    pub methods: Vec<RoundoffMethod>,
    /// Also solve the diagonally scaled system.
    pub scaled: Option<bool>,
    /// Dense methods are skipped above this many unknowns.
    pub dense_max_dofs: Option<usize>,
    /// Also report `κ(K_h)` per mesh.
    pub kappa: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub geometry: GeometryConfig,
    pub beta_plus: f64,
    pub beta_minus: f64,
    #[serde(default)]
    pub p: Vec<usize>,
    #[serde(default)]
    pub n: Vec<usize>,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    pub quad_degree: Option<usize>,
    pub seed: Option<u64>,
    pub eigen: Option<EigenMethod>,
    /// Record wall-clock seconds per row. Off by default so that repeated
    /// runs give identical tables.
    pub timing: Option<bool>,
    pub local: Option<LocalConfig>,
    pub sweep: Option<SweepConfig>,
    pub roundoff: Option<RoundoffConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn field_err(field: &str, message: String) -> Error {
    Error::ConfigField {
        field: field.into(),
        message,
    }
}

const PRESETS: [(&str, &str); 8] = [
    ("example1", include_str!("../presets/example1.toml")),
    ("example2", include_str!("../presets/example2.toml")),
    ("example2-high-contrast", include_str!("../presets/example2-high-contrast.toml")),
    ("example2-no-penalty", include_str!("../presets/example2-no-penalty.toml")),
    ("example3", include_str!("../presets/example3.toml")),
    ("example3-contrast", include_str!("../presets/example3-contrast.toml")),
    ("example3-smallcut", include_str!("../presets/example3-smallcut.toml")),
    ("example4", include_str!("../presets/example4.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown preset `{name}`; available: {}",
                preset_names().join(", ")
            ))
        })?;
    parse_config(text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

impl ExperimentConfig {
    /// Copy with every optional field filled by its default, after
    /// validation.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        let kind = c.kind;
        let pen = &mut c.penalty;
        pen.theta.get_or_insert(1.0);
        pen.eps0.get_or_insert(-1.0);
        pen.eps1.get_or_insert(-1.0);
        pen.gamma.get_or_insert(GammaMode::SquareRatio);
        pen.interface_penalty.get_or_insert(true);
        c.lambda.get_or_insert(1.5);
        c.seed.get_or_insert(DEFAULT_SEED);
        c.eigen.get_or_insert(EigenMethod::Auto);
        c.timing.get_or_insert(false);
        c.output.csv.get_or_insert_with(|| format!("{}.csv", kind.name()));
        c.output.manifest.get_or_insert_with(|| "manifest.json".into());
        if kind == ExperimentKind::SmallcutSweep {
            if let Some(s) = c.sweep.as_mut() {
                if s.deltas.is_empty() {
                    let base = *s.delta_base.get_or_insert(40.0);
                    s.deltas = s.levels.iter().map(|&l| 1.0 / (base * 2f64.powi(l as i32))).collect();
                }
            }
        }
        if kind == ExperimentKind::Roundoff {
            if let Some(r) = c.roundoff.as_mut() {
                r.scaled.get_or_insert(false);
                r.dense_max_dofs.get_or_insert(3000);
                r.kappa.get_or_insert(false);
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(field_err("p", "needs at least one degree".into()));
        }
        for &p in &self.p {
            if !(1..=4).contains(&p) {
                return Err(field_err("p", format!("degrees must be in 1..=4, got {p}")));
            }
        }
        if self.kind != ExperimentKind::LocalConditioning {
            if self.n.is_empty() {
                return Err(field_err("n", "needs at least one mesh size".into()));
            }
            if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
                return Err(field_err("n", format!("mesh sizes must be at least 2, got {n}")));
            }
        }
        let beta = Coefficients::new(self.beta_plus, self.beta_minus)?;
        beta.require_ordered()?;
        for (name, v) in [("penalty.sigma0", self.penalty.sigma0), ("penalty.sigma1", self.penalty.sigma1)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(field_err(name, format!("must be positive, got {v}")));
                }
            }
        }
        for s in self.schemes() {
            s.validate()?;
        }
        self.geometry.interface()?;
        match self.kind {
            ExperimentKind::LocalConditioning => {
                let l = self
                    .local
                    .as_ref()
                    .ok_or_else(|| field_err("local", "required for local-conditioning".into()))?;
                if !matches!(self.geometry, GeometryConfig::Circle { .. }) {
                    return Err(field_err("geometry", "local-conditioning needs a circle".into()));
                }
                if l.dr.is_empty() || l.lambdas.is_empty() {
                    return Err(field_err("local", "needs nonempty `dr` and `lambdas`".into()));
                }
                if let Some(d) = l.dr.iter().find(|&&d| !(d > 0.0 && d < l.anchor)) {
                    return Err(field_err("local.dr", format!("must be in (0, anchor), got {d}")));
                }
                if let Some(x) = l.lambdas.iter().find(|x| !(1.0..=2.0).contains(*x)) {
                    return Err(field_err("local.lambdas", format!("must be in [1, 2], got {x}")));
                }
            }
            ExperimentKind::ContrastSweep | ExperimentKind::SmallcutSweep => {
                let s = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| field_err("sweep", format!("required for {}", self.kind.name())))?;
                if s.contrasts.is_empty() {
                    return Err(field_err("sweep.contrasts", "needs at least one value".into()));
                }
                if let Some(r) = s.contrasts.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
                    return Err(field_err("sweep.contrasts", format!("must be positive, got {r}")));
                }
                if self.kind == ExperimentKind::SmallcutSweep {
                    if !matches!(self.geometry, GeometryConfig::Line { .. }) {
                        return Err(field_err("geometry", "smallcut-sweep needs a line".into()));
                    }
                    if s.deltas.is_empty() {
                        return Err(field_err("sweep.deltas", "needs `deltas` or `levels`".into()));
                    }
                }
            }
            ExperimentKind::Roundoff => {
                let r = self
                    .roundoff
                    .as_ref()
                    .ok_or_else(|| field_err("roundoff", "required for roundoff".into()))?;
                if r.methods.is_empty() {
                    return Err(field_err("roundoff.methods", "needs at least one method".into()));
                }
                if !matches!(self.geometry, GeometryConfig::Line { .. }) {
                    return Err(field_err("geometry", "roundoff needs a line".into()));
                }
            }
            ExperimentKind::Convergence | ExperimentKind::GlobalConditioning => {}
        }
        Ok(())
    }

    /// Scheme parameters for degree `p`.
    pub fn scheme(&self, p: usize) -> SchemeConfig {
        let base = PenaltyParams::for_degree(p);
        let pen = &self.penalty;
        SchemeConfig {
            p,
            lambda: self.lambda.unwrap_or(1.5),
            penalty: PenaltyParams {
                sigma0: pen.sigma0.unwrap_or(base.sigma0),
                sigma1: pen.sigma1.unwrap_or(base.sigma1),
                theta: pen.theta.unwrap_or(base.theta),
                eps0: pen.eps0.unwrap_or(base.eps0),
                eps1: pen.eps1.unwrap_or(base.eps1),
                gamma: pen.gamma.unwrap_or(base.gamma),
            },
            interface_penalty: pen.interface_penalty.unwrap_or(true),
            quad_degree: Some(self.quad_degree.unwrap_or(2 * p + 2)),
        }
    }

    pub fn schemes(&self) -> Vec<SchemeConfig> {
        self.p.iter().map(|&p| self.scheme(p)).collect()
    }

    fn beta(&self) -> Result<Coefficients> {
        Coefficients::new(self.beta_plus, self.beta_minus)
    }
}

/// A CSV table: parameter columns followed by [`ResultRow::HEADER`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(params: &[&str]) -> Table {
        Table {
            columns: params
                .iter()
                .chain(ResultRow::HEADER.iter())
                .map(|s| s.to_string())
                .collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, params: Vec<String>, row: &ResultRow) {
        let mut cells = params;
        cells.extend(row.cells());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Values of column `name`, parsed; empty cells are `None`.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].parse().ok()).collect())
    }
}

/// Outcome of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub schemes: Vec<SchemeConfig>,
    #[serde(skip)]
    pub table: Table,
    pub rows: usize,
    /// Named scalar results, such as fitted slopes.
    pub summary: BTreeMap<String, f64>,
}

impl Report {
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "crate": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "kind": self.config.kind.name(),
            "config": self.config,
            "schemes": self.schemes,
            "columns": self.table.columns,
            "rows": self.rows,
            "summary": self.summary,
        })
    }

    /// Write the CSV table and the manifest into `dir`, creating it if
    /// needed. Returns both paths.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(self.config.output.csv.as_deref().unwrap_or("results.csv"));
        let manifest = dir.join(self.config.output.manifest.as_deref().unwrap_or("manifest.json"));
        std::fs::write(&csv, self.table.to_csv())?;
        let text = serde_json::to_string_pretty(&self.manifest()).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&manifest, text + "\n")?;
        Ok((csv, manifest))
    }
}

/// Resolve, validate and run an experiment.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let config = config.resolve()?;
    log::info!("running {} for p = {:?}, N = {:?}", config.kind.name(), config.p, config.n);
    let mut summary = BTreeMap::new();
    let table = match config.kind {
        ExperimentKind::LocalConditioning => local_conditioning(&config, &mut summary)?,
        ExperimentKind::Convergence => convergence(&config, &mut summary)?,
        ExperimentKind::GlobalConditioning => global_conditioning(&config, &mut summary)?,
        ExperimentKind::ContrastSweep => contrast_sweep(&config, &mut summary)?,
        ExperimentKind::SmallcutSweep => smallcut_sweep(&config, &mut summary)?,
        ExperimentKind::Roundoff => roundoff(&config, &mut summary)?,
    };
    Ok(Report {
        schemes: config.schemes(),
        rows: table.rows.len(),
        config,
        table,
        summary,
    })
}

fn timed<T>(on: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, on.then(|| t.elapsed().as_secs_f64())))
}

fn base_row(p: usize, disc: &Discretization) -> ResultRow {
    ResultRow {
        p,
        n: disc.mesh.n,
        h: disc.h(),
        n_dof: disc.num_dofs(),
        ..Default::default()
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn local_conditioning(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let l = c.local.as_ref().expect("validated");
    let GeometryConfig::Circle { center, inside, .. } = c.geometry else {
        unreachable!("validated")
    };
    let verts = l.element.map(|v| Point::new(v[0], v[1]));
    let leg = (verts[1] - verts[0]).norm().min((verts[2] - verts[0]).norm());
    let beta = c.beta()?;
    let mut jobs = Vec::new();
    for &p in &c.p {
        for &lambda in &l.lambdas {
            for &dr in &l.dr {
                jobs.push((p, lambda, dr));
            }
        }
    }
    let kappas: Vec<f64> = jobs
        .par_iter()
        .map(|&(p, lambda, dr)| {
            let geo = GeometryConfig::Circle {
                center,
                radius: l.anchor - dr,
                inside,
            };
            let a = local_matrix(verts, &geo.interface()?, beta, p, lambda)?;
            Ok(local_condition(&a))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["d_r", "lambda"]);
    for (&(p, lambda, dr), &kappa) in jobs.iter().zip(&kappas) {
        let row = ResultRow {
            p,
            n: (2.0 / leg).round() as usize,
            h: leg,
            n_dof: (p + 1) * (p + 2) / 2,
            kappa: Some(kappa),
            ..Default::default()
        };
        table.push(vec![fmt_float(dr), fmt_float(lambda)], &row);
    }
    for &p in &c.p {
        for &lambda in &l.lambdas {
            let ks: Vec<f64> = jobs
                .iter()
                .zip(&kappas)
                .filter(|(j, _)| j.0 == p && j.1 == lambda)
                .map(|(_, &k)| k)
                .collect();
            summary.insert(format!("p{p}.lambda{lambda}.kappa_spread"), spread(&ks));
        }
    }
    Ok(table)
}

/// Exact solution used with the configured geometry.
fn exact_solution(c: &ExperimentConfig, beta: Coefficients) -> ExactSolution {
    match c.geometry {
        GeometryConfig::Circle { inside, .. } => ExactSolution::example2(beta, inside),
        GeometryConfig::Line { delta, .. } => ExactSolution::linear(delta, beta),
    }
}

fn convergence(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let iface = c.geometry.interface()?;
    let beta = c.beta()?;
    let exact = exact_solution(c, beta);
    let data = exact.problem_data(&iface, beta);
    let timing = c.timing == Some(true);
    let jobs: Vec<(usize, usize)> = c.p.iter().flat_map(|&p| c.n.iter().map(move |&n| (p, n))).collect();
    let mut rows: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(p, n)| {
            let ((disc, err), secs) = timed(timing, || {
                let disc = Discretization::build(n, iface, beta, &c.scheme(p), &data)?;
                let sol = disc.solve()?;
                let err = error_norms(&disc, &sol, &exact)?;
                Ok((disc, err))
            })?;
            Ok(ResultRow {
                err_l2: Some(err.l2),
                err_h1: Some(err.h1),
                err_energy: Some(err.energy),
                seconds: secs,
                ..base_row(p, &disc)
            })
        })
        .collect::<Result<_>>()?;
    for &p in &c.p {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].p == p).collect();
        if idx.len() < 2 {
            continue;
        }
        let l2 = fit_rates(&idx.iter().map(|&i| (rows[i].n, rows[i].err_l2.unwrap())).collect::<Vec<_>>())?;
        let h1 = fit_rates(&idx.iter().map(|&i| (rows[i].n, rows[i].err_h1.unwrap())).collect::<Vec<_>>())?;
        for (k, &i) in idx.iter().enumerate() {
            rows[i].rate_l2 = l2.rates[k];
            rows[i].rate_h1 = h1.rates[k];
        }
        if let Some(s) = l2.slope {
            summary.insert(format!("p{p}.slope_l2"), s);
        }
        if let Some(s) = h1.slope {
            summary.insert(format!("p{p}.slope_h1"), s);
        }
    }
    let mut table = Table::new(&[]);
    for r in &rows {
        table.push(Vec::new(), r);
    }
    Ok(table)
}

/// Zero data: only the matrix matters for conditioning.
fn matrix_only(n: usize, iface: Interface, beta: Coefficients, scheme: &SchemeConfig) -> Result<Discretization> {
    let data = ExactSolution::constant(0.0).problem_data(&iface, beta);
    Discretization::build(n, iface, beta, scheme, &data)
}

fn condition_row(c: &ExperimentConfig, p: usize, disc: &Discretization, secs: Option<f64>) -> Result<ResultRow> {
    let r = condition_report(&disc.system.k, c.eigen.unwrap_or(EigenMethod::Auto), c.seed.unwrap_or(DEFAULT_SEED))?;
    Ok(ResultRow {
        kappa: Some(r.kappa),
        kappa_s: Some(r.kappa_s),
        seconds: secs,
        ..base_row(p, disc)
    })
}

fn global_conditioning(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let iface = c.geometry.interface()?;
    let beta = c.beta()?;
    let timing = c.timing == Some(true);
    let jobs: Vec<(usize, usize)> = c.p.iter().flat_map(|&p| c.n.iter().map(move |&n| (p, n))).collect();
    let rows: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(p, n)| {
            let (row, secs) = timed(timing, || {
                let disc = matrix_only(n, iface, beta, &c.scheme(p))?;
                condition_row(c, p, &disc, None)
            })?;
            Ok(ResultRow { seconds: secs, ..row })
        })
        .collect::<Result<_>>()?;
    for &p in &c.p {
        let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.p == p).collect();
        if sel.len() < 2 {
            continue;
        }
        let ns: Vec<usize> = sel.iter().map(|r| r.n).collect();
        let k: Vec<f64> = sel.iter().map(|r| r.kappa.unwrap()).collect();
        let ks: Vec<f64> = sel.iter().map(|r| r.kappa_s.unwrap()).collect();
        summary.insert(format!("p{p}.growth_kappa"), growth_rate(&ns, &k));
        summary.insert(format!("p{p}.growth_kappa_s"), growth_rate(&ns, &ks));
    }
    let mut table = Table::new(&[]);
    for r in &rows {
        table.push(Vec::new(), r);
    }
    Ok(table)
}

/// Coefficients `β⁺ = ρ β⁻`, `β⁻ = beta_minus`, relabelled when `ρ > 1`.
fn contrast_point(c: &ExperimentConfig, iface: Interface, rho: f64) -> Result<(Interface, Coefficients)> {
    let beta = Coefficients::new(rho * c.beta_minus, c.beta_minus)?;
    let (iface, beta, _) = orient(iface, beta);
    Ok((iface, beta))
}

fn contrast_sweep(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let s = c.sweep.as_ref().expect("validated");
    let iface = c.geometry.interface()?;
    let timing = c.timing == Some(true);
    let mut jobs = Vec::new();
    for &p in &c.p {
        for &n in &c.n {
            for &rho in &s.contrasts {
                jobs.push((p, n, rho));
            }
        }
    }
    let rows: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(p, n, rho)| {
            let (row, secs) = timed(timing, || {
                let (iface, beta) = contrast_point(c, iface, rho)?;
                let disc = matrix_only(n, iface, beta, &c.scheme(p))?;
                condition_row(c, p, &disc, None)
            })?;
            Ok(ResultRow { seconds: secs, ..row })
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["rho"]);
    for (j, r) in jobs.iter().zip(&rows) {
        table.push(vec![fmt_float(j.2)], r);
    }
    for &p in &c.p {
        for &n in &c.n {
            let big: Vec<(f64, f64)> = jobs
                .iter()
                .zip(&rows)
                .filter(|(j, _)| j.0 == p && j.1 == n && j.2 >= 1.0)
                .map(|(j, r)| (j.2.ln(), r.kappa.unwrap().ln()))
                .collect();
            if big.len() >= 2 {
                summary.insert(format!("p{p}.N{n}.growth_rho_ge_1"), crate::analysis::loglog_slope(&big));
            }
        }
    }
    Ok(table)
}

fn smallcut_sweep(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let s = c.sweep.as_ref().expect("validated");
    let GeometryConfig::Line { below, .. } = c.geometry else {
        unreachable!("validated")
    };
    let timing = c.timing == Some(true);
    let mut jobs = Vec::new();
    for &p in &c.p {
        for &n in &c.n {
            for &rho in &s.contrasts {
                for &delta in &s.deltas {
                    jobs.push((p, n, rho, delta));
                }
            }
        }
    }
    let rows: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(p, n, rho, delta)| {
            let (row, secs) = timed(timing, || {
                let iface = GeometryConfig::Line { delta, below }.interface()?;
                let (iface, beta) = contrast_point(c, iface, rho)?;
                let disc = matrix_only(n, iface, beta, &c.scheme(p))?;
                condition_row(c, p, &disc, None)
            })?;
            Ok(ResultRow { seconds: secs, ..row })
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["delta", "rho"]);
    for (j, r) in jobs.iter().zip(&rows) {
        table.push(vec![fmt_float(j.3), fmt_float(j.2)], r);
    }
    for &p in &c.p {
        for &n in &c.n {
            for &rho in &s.contrasts {
                let pick = |f: fn(&ResultRow) -> f64| -> Vec<f64> {
                    jobs.iter()
                        .zip(&rows)
                        .filter(|(j, _)| j.0 == p && j.1 == n && j.2 == rho)
                        .map(|(_, r)| f(r))
                        .collect()
                };
                let k = pick(|r| r.kappa.unwrap());
                let ks = pick(|r| r.kappa_s.unwrap());
                summary.insert(format!("p{p}.N{n}.rho{rho:e}.kappa_spread"), spread(&k));
                summary.insert(format!("p{p}.N{n}.rho{rho:e}.kappa_s_spread"), spread(&ks));
            }
        }
    }
    Ok(table)
}

/// Solve `K x = F` with `method`, optionally after symmetric diagonal scaling.
fn roundoff_solve(k: &CsrMatrix, f: &[f64], method: RoundoffMethod, scaled: bool) -> Result<Vec<f64>> {
    let (mat, rhs, d) = if scaled {
        let d: Vec<f64> = k.diagonal().iter().map(|x| x.sqrt().recip()).collect();
        let rhs: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a * b).collect();
        (k.jacobi_scaled()?, rhs, Some(d))
    } else {
        (k.clone(), f.to_vec(), None)
    };
    let mut x = match method.dense() {
        None => solve(&mat, &rhs, SolverKind::Direct)?.solution,
        Some(m) => dense_solve(&mat.to_dense(), &rhs, m)?,
    };
    if let Some(d) = d {
        x.iter_mut().zip(&d).for_each(|(a, b)| *a *= b);
    }
    Ok(x)
}

fn roundoff(c: &ExperimentConfig, summary: &mut BTreeMap<String, f64>) -> Result<Table> {
    let r = c.roundoff.as_ref().expect("validated");
    let iface = c.geometry.interface()?;
    let beta = c.beta()?;
    let exact = exact_solution(c, beta);
    let data = exact.problem_data(&iface, beta);
    let timing = c.timing == Some(true);
    let scalings: Vec<bool> = if r.scaled == Some(true) { vec![false, true] } else { vec![false] };
    let limit = r.dense_max_dofs.unwrap_or(3000);
    let jobs: Vec<(usize, usize)> = c.p.iter().flat_map(|&p| c.n.iter().map(move |&n| (p, n))).collect();
    let per_mesh: Vec<Vec<(RoundoffMethod, bool, ResultRow)>> = jobs
        .par_iter()
        .map(|&(p, n)| {
            let disc = Discretization::build(n, iface, beta, &c.scheme(p), &data)?;
            let k = &disc.system.k;
            let u = disc.restrict(&disc.interpolate(&exact));
            let kappa = if r.kappa == Some(true) {
                Some(condition_row(c, p, &disc, None)?)
            } else {
                None
            };
            let mut out = Vec::new();
            for &m in &r.methods {
                if m.dense().is_some() && k.nrows > limit {
                    log::warn!("skipping {} for N = {n}: {} unknowns exceed {limit}", m.name(), k.nrows);
                    continue;
                }
                for &sc in &scalings {
                    let (x, secs) = timed(timing, || roundoff_solve(k, &disc.system.f, m, sc))?;
                    let row = ResultRow {
                        eta: Some(roundoff_eta(&u, &x)?),
                        kappa: kappa.as_ref().and_then(|k| k.kappa),
                        kappa_s: kappa.as_ref().and_then(|k| k.kappa_s),
                        seconds: secs,
                        ..base_row(p, &disc)
                    };
                    out.push((m, sc, row));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["method", "scaled"]);
    let all: Vec<&(RoundoffMethod, bool, ResultRow)> = per_mesh.iter().flatten().collect();
    for (m, sc, row) in &all {
        table.push(vec![m.name().to_string(), sc.to_string()], row);
    }
    for &p in &c.p {
        for &m in &r.methods {
            for &sc in &scalings {
                let sel: Vec<(usize, f64)> = all
                    .iter()
                    .filter(|(mm, s, row)| *mm == m && *s == sc && row.p == p && row.eta.unwrap() > 0.0)
                    .map(|(_, _, row)| (row.n, row.eta.unwrap()))
                    .collect();
                if sel.len() >= 2 {
                    let ns: Vec<usize> = sel.iter().map(|x| x.0).collect();
                    let es: Vec<f64> = sel.iter().map(|x| x.1).collect();
                    let tag = if sc { "scaled" } else { "unscaled" };
                    summary.insert(format!("p{p}.{}.{tag}.growth_eta", m.name()), growth_rate(&ns, &es));
                }
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in preset_names() {
            let c = preset(name).unwrap().resolve().unwrap();
            assert!(c.lambda.is_some() && c.penalty.gamma.is_some() && c.seed.is_some(), "{name}");
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn field_errors_name_the_field() {
        let mut c = preset("example2").unwrap();
        c.lambda = Some(3.0);
        match c.resolve() {
            Err(Error::ConfigField { field, .. }) => assert_eq!(field, "lambda"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = preset("example2").unwrap();
        c.beta_plus = 5.0;
        match c.resolve() {
            Err(Error::ConfigField { field, .. }) => assert_eq!(field, "beta"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = preset("example2").unwrap();
        c.p = vec![5];
        assert!(matches!(c.resolve(), Err(Error::ConfigField { .. })));
        assert!(matches!(parse_config("kind = \"convergence\"\nbogus = 1"), Err(Error::Parse(_))));
    }

    #[test]
    fn smallcut_levels_expand() {
        let c = preset("example3-smallcut").unwrap().resolve().unwrap();
        let s = c.sweep.unwrap();
        assert_eq!(s.deltas.len(), 9);
        assert_eq!(s.deltas[0], 1.0 / 40.0);
        assert_eq!(s.deltas[8], 1.0 / (40.0 * 256.0));
    }

    #[test]
    fn small_convergence_run_is_deterministic() {
        let mut c = preset("example2").unwrap();
        c.p = vec![1];
        c.n = vec![10, 20];
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.table.to_csv(), b.table.to_csv());
        assert_eq!(a.table.rows.len(), 2);
        assert_eq!(a.table.columns.len(), ResultRow::HEADER.len());
        let m = a.manifest();
        assert_eq!(m["kind"], "convergence");
        assert_eq!(m["schemes"][0]["penalty"]["sigma0"], 10.0);
        assert!(a.summary.contains_key("p1.slope_l2"));
    }
}
