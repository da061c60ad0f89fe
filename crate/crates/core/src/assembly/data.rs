use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{Interface, Side};
use crate::localife::{Coefficients, JumpData};
use crate::polybasis::MAX_DEGREE;
use crate::{Error, Point, Result};

pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type GradField = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// How the coefficient weight `γ` in the penalties is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "value")]
pub enum GammaMode {
    /// `(β⁻)² / β⁺`.
    SquareRatio,
    /// `β⁻ / β⁺`.
    Ratio,
    Explicit(f64),
}

impl GammaMode {
    pub fn value(&self, beta: Coefficients) -> f64 {
        match *self {
            GammaMode::SquareRatio => beta.minus * beta.minus / beta.plus,
            GammaMode::Ratio => beta.minus / beta.plus,
            GammaMode::Explicit(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    /// Edge penalty.
    pub sigma0: f64,
    /// Interface penalty.
    pub sigma1: f64,
    pub theta: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub gamma: GammaMode,
}

impl PenaltyParams {
    pub fn for_degree(p: usize) -> PenaltyParams {
        let s = 10.0 * (p * p) as f64;
        PenaltyParams {
            sigma0: s,
            sigma1: s,
            theta: 1.0,
            eps0: -1.0,
            eps1: -1.0,
            gamma: GammaMode::SquareRatio,
        }
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub p: usize,
    pub lambda: f64,
    pub penalty: PenaltyParams,
    /// Keep the interface terms of the bilinear form and the `σ¹` load term.
    /// When off, the load still carries the `J_N` and `J_D` flux terms.
    pub interface_penalty: bool,
    /// Volume and edge quadrature exactness; `2p + 2` when absent.
    pub quad_degree: Option<usize>,
}

impl SchemeConfig {
    pub fn new(p: usize) -> SchemeConfig {
        SchemeConfig {
            p,
            lambda: 1.5,
            penalty: PenaltyParams::for_degree(p),
            interface_penalty: true,
            quad_degree: None,
        }
    }

    pub fn quad_degree(&self) -> usize {
        self.quad_degree.unwrap_or(2 * self.p + 2)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, m: String| {
            Err(Error::ConfigField {
                field: f.into(),
                message: m,
            })
        };
        if self.p < 1 || self.p > MAX_DEGREE {
            return field("p", format!("must be in 1..={MAX_DEGREE}, got {}", self.p));
        }
        if !(1.0..=2.0).contains(&self.lambda) {
            return field("lambda", format!("must be in [1, 2], got {}", self.lambda));
        }
        let pp = &self.penalty;
        if !(pp.sigma0 > 0.0) {
            return field("sigma0", format!("must be positive, got {}", pp.sigma0));
        }
        if !(pp.sigma1 > 0.0) {
            return field("sigma1", format!("must be positive, got {}", pp.sigma1));
        }
        if !(pp.theta > 0.0) {
            return field("theta", format!("must be positive, got {}", pp.theta));
        }
        for (n, e) in [("eps0", pp.eps0), ("eps1", pp.eps1)] {
            if e != -1.0 && e != 0.0 && e != 1.0 {
                return field(n, format!("must be -1, 0 or 1, got {e}"));
            }
        }
        if let GammaMode::Explicit(g) = pp.gamma {
            if !(g > 0.0) {
                return field("gamma", format!("must be positive, got {g}"));
            }
        }
        if let Some(d) = self.quad_degree {
            if d < 2 * self.p || d > crate::quadrature::MAX_RULE_DEGREE {
                return field(
                    "quad_degree",
                    format!("must be in {}..={}, got {d}", 2 * self.p, crate::quadrature::MAX_RULE_DEGREE),
                );
            }
        }
        Ok(())
    }
}

/// Source, jump and boundary data of an interface problem.
#[derive(Clone)]
pub struct ProblemData {
    pub f_plus: Field,
    pub f_minus: Field,
    /// `u⁻ - u⁺` on the interface.
    pub jump_d: Field,
    /// `β⁻∂ₙu⁻ - β⁺∂ₙu⁺`, normal pointing from the plus to the minus side.
    pub jump_n: Field,
    /// Dirichlet data.
    pub g: Field,
}

impl ProblemData {
    pub fn f(&self, s: Side) -> &Field {
        match s {
            Side::Plus => &self.f_plus,
            Side::Minus => &self.f_minus,
        }
    }

    pub fn jump_data(&self) -> JumpData<'_> {
        JumpData {
            jump_d: &*self.jump_d,
            jump_n: &*self.jump_n,
            f_plus: &*self.f_plus,
            f_minus: &*self.f_minus,
        }
    }
}

/// Piecewise smooth exact solution with analytic derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    u: [Field; 2],
    grad: [GradField; 2],
    lap: [Field; 2],
}

impl ExactSolution {
    /// `plus` and `minus` are `(u, ∇u, Δu)` on each side.
    pub fn new(
        name: impl Into<String>,
        plus: (Field, GradField, Field),
        minus: (Field, GradField, Field),
    ) -> ExactSolution {
        ExactSolution {
            name: name.into(),
            u: [plus.0, minus.0],
            grad: [plus.1, minus.1],
            lap: [plus.2, minus.2],
        }
    }

    /// `sin(πx) sin(πy) / β` on the `inner` side and `exp(xy) / β` on the
    /// other, each scaled by that side's coefficient.
    pub fn example2(beta: Coefficients, inner: Side) -> ExactSolution {
        let bi = beta.get(inner);
        let bo = beta.get(inner.opposite());
        let sines: (Field, GradField, Field) = (
            Arc::new(move |x: Point| (PI * x.x).sin() * (PI * x.y).sin() / bi),
            Arc::new(move |x: Point| {
                Point::new(
                    PI * (PI * x.x).cos() * (PI * x.y).sin(),
                    PI * (PI * x.x).sin() * (PI * x.y).cos(),
                ) / bi
            }),
            Arc::new(move |x: Point| -2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin() / bi),
        );
        let expo: (Field, GradField, Field) = (
            Arc::new(move |x: Point| (x.x * x.y).exp() / bo),
            Arc::new(move |x: Point| Point::new(x.y, x.x) * ((x.x * x.y).exp() / bo)),
            Arc::new(move |x: Point| (x.x * x.x + x.y * x.y) * (x.x * x.y).exp() / bo),
        );
        match inner {
            Side::Plus => ExactSolution::new("example2", sines, expo),
            Side::Minus => ExactSolution::new("example2", expo, sines),
        }
    }

    /// The same solution with the side labels exchanged.
    pub fn swapped(&self) -> ExactSolution {
        ExactSolution {
            name: self.name.clone(),
            u: [self.u[1].clone(), self.u[0].clone()],
            grad: [self.grad[1].clone(), self.grad[0].clone()],
            lap: [self.lap[1].clone(), self.lap[0].clone()],
        }
    }

    /// `(y - δ) / β^s` on each side.
    pub fn linear(delta: f64, beta: Coefficients) -> ExactSolution {
        let side = |b: f64| -> (Field, GradField, Field) {
            (
                Arc::new(move |x: Point| (x.y - delta) / b),
                Arc::new(move |_| Point::new(0.0, 1.0 / b)),
                Arc::new(|_| 0.0),
            )
        };
        ExactSolution::new("linear", side(beta.plus), side(beta.minus))
    }

    pub fn constant(c: f64) -> ExactSolution {
        let side = || -> (Field, GradField, Field) {
            (
                Arc::new(move |_| c),
                Arc::new(|_| Point::zeros()),
                Arc::new(|_| 0.0),
            )
        };
        ExactSolution::new("constant", side(), side())
    }

    pub fn value(&self, s: Side, x: Point) -> f64 {
        (self.u[s.index()])(x)
    }

    pub fn gradient(&self, s: Side, x: Point) -> Point {
        (self.grad[s.index()])(x)
    }

    pub fn laplacian(&self, s: Side, x: Point) -> f64 {
        (self.lap[s.index()])(x)
    }

    /// Data for which this is the exact solution.
    pub fn problem_data(&self, iface: &Interface, beta: Coefficients) -> ProblemData {
        let (bp, bm) = (beta.plus, beta.minus);
        let f = |s: Side, b: f64| -> Field {
            let lap = self.lap[s.index()].clone();
            Arc::new(move |x| -b * lap(x))
        };
        let (up, um) = (self.u[0].clone(), self.u[1].clone());
        let (gp, gm) = (self.grad[0].clone(), self.grad[1].clone());
        let i1 = *iface;
        let i2 = *iface;
        let (up2, um2) = (up.clone(), um.clone());
        ProblemData {
            f_plus: f(Side::Plus, bp),
            f_minus: f(Side::Minus, bm),
            jump_d: Arc::new(move |x| um(x) - up(x)),
            jump_n: Arc::new(move |x| {
                let n = i1.normal(x);
                bm * gm(x).dot(&n) - bp * gp(x).dot(&n)
            }),
            g: Arc::new(move |x| match i2.side(x) {
                Side::Plus => up2(x),
                Side::Minus => um2(x),
            }),
        }
    }
}
