use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::data::{ExactSolution, ProblemData, SchemeConfig};
use super::dofs::{build_dofs, DofMap};
use crate::geometry::{build_mesh, classify, diameter, CutClassification, ElementClass, Interface, Mesh, Side};
use crate::localife::{build_block, Coefficients, LocalIfeBlock};
use crate::polybasis::{Frame, PolyBasis};
use crate::quadrature::{cut_rules, edge_rules, triangle_rule, QuadRule};
use crate::solve::{solve, CsrMatrix, SolveReport, SolverKind};
use crate::{Error, Point, Result};

/// Shape functions of one element as monomial coefficients per side.
#[derive(Debug, Clone)]
pub struct ElementSpace {
    pub frame: Frame,
    pub p: usize,
    pub class: ElementClass,
    /// Column `i` holds shape function `i` on the plus (index 0) and minus
    /// (index 1) side.
    pub coeffs: [DMatrix<f64>; 2],
    /// Monomial coefficients of the enrichment on each side.
    pub enrichment: [DVector<f64>; 2],
}

impl ElementSpace {
    fn piece(&self, s: Side) -> usize {
        match self.class {
            ElementClass::Interface => s.index(),
            ElementClass::NonInterface(own) => own.index(),
        }
    }

    /// Values and gradients of all shape functions of side `s` at `x`.
    pub fn shapes(&self, s: Side, x: Point) -> (Vec<f64>, Vec<Point>) {
        let m = self.frame.evaluate(self.p, x);
        let c = &self.coeffs[self.piece(s)];
        let n = c.ncols();
        let mut v = vec![0.0; n];
        let mut g = vec![Point::zeros(); n];
        for i in 0..n {
            for k in 0..c.nrows() {
                let a = c[(k, i)];
                v[i] += a * m.val[k];
                g[i] += m.grad[k] * a;
            }
        }
        (v, g)
    }

    /// Value and gradient of the enrichment on side `s` at `x`.
    pub fn enrich(&self, s: Side, x: Point) -> (f64, Point) {
        let e = &self.enrichment[self.piece(s)];
        if e.iter().all(|c| *c == 0.0) {
            return (0.0, Point::zeros());
        }
        let m = self.frame.evaluate(self.p, x);
        let mut v = 0.0;
        let mut g = Point::zeros();
        for k in 0..e.len() {
            v += e[k] * m.val[k];
            g += m.grad[k] * e[k];
        }
        (v, g)
    }
}

/// Local contribution over a list of global degrees of freedom.
#[derive(Debug, Clone)]
struct Local {
    dofs: Vec<usize>,
    mat: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl Local {
    fn new(dofs: Vec<usize>) -> Local {
        let n = dofs.len();
        Local {
            dofs,
            mat: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
        }
    }
}

/// Reduced linear system after eliminating Dirichlet degrees of freedom.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    /// Full matrix over all degrees of freedom.
    pub k_full: CsrMatrix,
    pub f_full: Vec<f64>,
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    /// Global index of each reduced unknown.
    pub free: Vec<usize>,
    /// Prescribed values of eliminated degrees of freedom.
    pub fixed: Vec<Option<f64>>,
}

/// Solution coefficients over all degrees of freedom.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    pub report: SolveReport,
}

/// Mesh, local IFE spaces, degrees of freedom and the assembled system for
/// one problem.
pub struct Discretization {
    pub mesh: Mesh,
    pub iface: Interface,
    pub beta: Coefficients,
    pub config: SchemeConfig,
    pub cls: CutClassification,
    pub dofs: DofMap,
    pub spaces: Vec<ElementSpace>,
    pub blocks: Vec<LocalIfeBlock>,
    pub block_of: Vec<Option<usize>>,
    pub system: GlobalSystem,
    pub gamma: f64,
}

impl Discretization {
    /// Mesh `(-1,1)²` with `n × n` squares and assemble the system for `data`.
    pub fn build(
        n: usize,
        iface: Interface,
        beta: Coefficients,
        config: &SchemeConfig,
        data: &ProblemData,
    ) -> Result<Discretization> {
        config.validate()?;
        beta.require_ordered()?;
        let mesh = build_mesh(n)?;
        let cls = classify(&mesh, &iface)?;
        let p = config.p;
        let jumps = data.jump_data();
        let blocks: Vec<LocalIfeBlock> = cls
            .interface_elements
            .par_iter()
            .map(|&t| {
                build_block(
                    mesh.triangle_points(t),
                    Some(t),
                    &iface,
                    beta,
                    p,
                    config.lambda,
                    Some(&jumps),
                )
            })
            .collect::<Result<_>>()?;
        let mut block_of = vec![None; mesh.num_triangles()];
        for (b, &t) in cls.interface_elements.iter().enumerate() {
            block_of[t] = Some(b);
        }
        let spaces: Vec<ElementSpace> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| match block_of[t] {
                Some(b) => {
                    let blk = &blocks[b];
                    let plus = blk.side_coeffs(Side::Plus);
                    let minus = blk.side_coeffs(Side::Minus);
                    let e = &blk.basis.coeffs * blk.enrichment_alpha();
                    Ok(ElementSpace {
                        frame: blk.basis.frame,
                        p,
                        class: ElementClass::Interface,
                        coeffs: [plus, minus],
                        enrichment: [DVector::zeros(e.len()), e],
                    })
                }
                None => {
                    let basis = PolyBasis::lagrange(p, mesh.triangle_points(t))?;
                    let n = basis.dim();
                    Ok(ElementSpace {
                        frame: basis.frame,
                        p,
                        class: cls.classes[t],
                        coeffs: [basis.coeffs.clone(), basis.coeffs],
                        enrichment: [DVector::zeros(n), DVector::zeros(n)],
                    })
                }
            })
            .collect::<Result<_>>()?;
        let dofs = build_dofs(&mesh, &cls, p);
        let gamma = config.penalty.gamma.value(beta);
        let mut disc = Discretization {
            mesh,
            iface,
            beta,
            config: *config,
            cls,
            dofs,
            spaces,
            blocks,
            block_of,
            system: GlobalSystem {
                k_full: CsrMatrix::identity(0),
                f_full: Vec::new(),
                k: CsrMatrix::identity(0),
                f: Vec::new(),
                free: Vec::new(),
                fixed: Vec::new(),
            },
            gamma,
        };
        let (k_full, f_full) = disc.assemble(data)?;
        let fixed: Vec<Option<f64>> = (0..disc.dofs.num_dofs)
            .map(|d| disc.dofs.boundary[d].then(|| (data.g)(disc.dofs.points[d])))
            .collect();
        disc.system = apply_dirichlet(k_full, f_full, fixed)?;
        log::debug!(
            "N = {n}, p = {p}: {} elements ({} cut), {} dofs ({} free), nnz {}",
            disc.mesh.num_triangles(),
            disc.cls.num_interface_elements(),
            disc.dofs.num_dofs,
            disc.system.free.len(),
            disc.system.k.nnz()
        );
        Ok(disc)
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.num_dofs
    }

    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    /// Volume rule of side `s` on element `t` (empty if `t` lies on the other side).
    pub fn element_rule(&self, t: usize, s: Side, degree: usize) -> Result<QuadRule> {
        match self.cls.classes[t] {
            ElementClass::Interface => {
                let cut = self.cls.cuts[t]
                    .as_ref()
                    .ok_or_else(|| Error::Consistency(format!("interface element {t} without cut")))?;
                Ok(cut_rules(cut, &self.iface, degree)?.side(s).clone())
            }
            ElementClass::NonInterface(own) => {
                if own == s {
                    Ok(triangle_rule(degree)?.mapped(self.mesh.triangle_points(t)))
                } else {
                    Ok(QuadRule::default())
                }
            }
        }
    }

    /// Sides present on element `t`.
    pub fn element_sides(&self, t: usize) -> &'static [Side] {
        match self.cls.classes[t] {
            ElementClass::Interface => &[Side::Plus, Side::Minus],
            ElementClass::NonInterface(Side::Plus) => &[Side::Plus],
            ElementClass::NonInterface(Side::Minus) => &[Side::Minus],
        }
    }

    fn element_local(&self, t: usize, data: &ProblemData) -> Result<Local> {
        let space = &self.spaces[t];
        let mut loc = Local::new(self.dofs.element_dofs[t].clone());
        let n = loc.dofs.len();
        let qd = self.config.quad_degree();
        let pp = &self.config.penalty;
        let interface = self.cls.is_interface(t);
        let rules = if interface {
            let cut = self.cls.cuts[t].as_ref().unwrap();
            Some(cut_rules(cut, &self.iface, qd)?)
        } else {
            None
        };
        for &s in self.element_sides(t) {
            let b = self.beta.get(s);
            let rule = match &rules {
                Some(r) => r.side(s).clone(),
                None => triangle_rule(qd)?.mapped(self.mesh.triangle_points(t)),
            };
            let f = data.f(s);
            for (x, w) in rule.iter() {
                let (v, g) = space.shapes(s, x);
                let (_, ge) = space.enrich(s, x);
                let fx = f(x);
                for i in 0..n {
                    loc.rhs[i] += w * (fx * v[i] - b * ge.dot(&g[i]));
                    for j in 0..n {
                        loc.mat[(i, j)] += w * b * g[i].dot(&g[j]);
                    }
                }
            }
        }
        let Some(rules) = rules else {
            return Ok(loc);
        };

        // interface terms, n from plus to minus, [v] = v⁻ - v⁺
        let verts = self.mesh.triangle_points(t);
        let pen = pp.sigma1 * self.gamma / diameter(verts).powf(pp.theta);
        let on = self.config.interface_penalty;
        let (bp, bm) = (self.beta.plus, self.beta.minus);
        let mut jump = vec![0.0; n];
        let mut avg = vec![0.0; n];
        for (x, w, nrm) in rules.interface.iter() {
            let (vp, gp) = space.shapes(Side::Plus, x);
            let (vm, gm) = space.shapes(Side::Minus, x);
            let (em, gem) = space.enrich(Side::Minus, x);
            let jd = (data.jump_d)(x);
            let jn = (data.jump_n)(x);
            for i in 0..n {
                jump[i] = vm[i] - vp[i];
                avg[i] = 0.5 * (bm * gm[i].dot(&nrm) + bp * gp[i].dot(&nrm));
            }
            let je = em;
            let ae = 0.5 * bm * gem.dot(&nrm);
            for i in 0..n {
                let mean = 0.5 * (vm[i] + vp[i]);
                // the load keeps the J_N and J_D flux terms in either mode
                let mut r = -jn * mean - pp.eps1 * jd * avg[i];
                if on {
                    r += pen * jd * jump[i];
                    r -= ae * jump[i] - pp.eps1 * avg[i] * je + pen * je * jump[i];
                    for j in 0..n {
                        loc.mat[(i, j)] += w
                            * (avg[j] * jump[i] - pp.eps1 * avg[i] * jump[j] + pen * jump[j] * jump[i]);
                    }
                }
                loc.rhs[i] += w * r;
            }
        }

        // Nitsche terms on boundary edges
        for k in 0..3 {
            let e = self.mesh.triangle_edges[t][k];
            if !self.mesh.edges[e].is_boundary() {
                continue;
            }
            let a = verts[k];
            let b = verts[(k + 1) % 3];
            let tangent = b - a;
            let len = tangent.norm();
            let nrm = Point::new(tangent.y, -tangent.x) / len;
            let pen = pp.sigma0 * self.gamma / len.powf(pp.theta);
            for (s, rule) in edge_rules(a, b, &self.iface, qd)? {
                let beta = self.beta.get(s);
                for (x, w) in rule.iter() {
                    let (v, g) = space.shapes(s, x);
                    let (e_v, e_g) = space.enrich(s, x);
                    let gx = (data.g)(x);
                    let ae = beta * e_g.dot(&nrm);
                    for i in 0..n {
                        avg[i] = beta * g[i].dot(&nrm);
                    }
                    for i in 0..n {
                        loc.rhs[i] += w
                            * (pp.eps0 * avg[i] * gx + pen * gx * v[i]
                                - (-ae * v[i] + pp.eps0 * avg[i] * e_v + pen * e_v * v[i]));
                        for j in 0..n {
                            loc.mat[(i, j)] +=
                                w * (-avg[j] * v[i] + pp.eps0 * avg[i] * v[j] + pen * v[j] * v[i]);
                        }
                    }
                }
            }
        }
        Ok(loc)
    }

    fn edge_local(&self, e: usize) -> Result<Option<Local>> {
        let edge = &self.mesh.edges[e];
        if !self.cls.interface_edges[e] || edge.adjacent.len() != 2 {
            return Ok(None);
        }
        let (t1, k1) = edge.adjacent[0];
        let (t2, _) = edge.adjacent[1];
        let v1 = self.mesh.triangle_points(t1);
        let a = v1[k1];
        let b = v1[(k1 + 1) % 3];
        let tangent = b - a;
        let len = tangent.norm();
        // triangles are counter-clockwise, so this normal leaves t1
        let nrm = Point::new(tangent.y, -tangent.x) / len;
        let pp = &self.config.penalty;
        let pen = pp.sigma0 * self.gamma / len.powf(pp.theta);
        let d1 = &self.dofs.element_dofs[t1];
        let d2 = &self.dofs.element_dofs[t2];
        let n1 = d1.len();
        let mut dofs = d1.clone();
        dofs.extend_from_slice(d2);
        let mut loc = Local::new(dofs);
        let n = loc.dofs.len();
        let (s1, s2) = (&self.spaces[t1], &self.spaces[t2]);
        let mut jump = vec![0.0; n];
        let mut avg = vec![0.0; n];
        for (s, rule) in edge_rules(a, b, &self.iface, self.config.quad_degree())? {
            let beta = self.beta.get(s);
            for (x, w) in rule.iter() {
                let (va, ga) = s1.shapes(s, x);
                let (vb, gb) = s2.shapes(s, x);
                let (ea, gea) = s1.enrich(s, x);
                let (eb, geb) = s2.enrich(s, x);
                for i in 0..n1 {
                    jump[i] = va[i];
                    avg[i] = 0.5 * beta * ga[i].dot(&nrm);
                }
                for i in 0..n - n1 {
                    jump[n1 + i] = -vb[i];
                    avg[n1 + i] = 0.5 * beta * gb[i].dot(&nrm);
                }
                let je = ea - eb;
                let ae = 0.5 * beta * (gea + geb).dot(&nrm);
                for i in 0..n {
                    loc.rhs[i] -= w * (-ae * jump[i] + pp.eps0 * avg[i] * je + pen * je * jump[i]);
                    for j in 0..n {
                        loc.mat[(i, j)] +=
                            w * (-avg[j] * jump[i] + pp.eps0 * avg[i] * jump[j] + pen * jump[j] * jump[i]);
                    }
                }
            }
        }
        Ok(Some(loc))
    }

    /// Full matrix and load vector over all degrees of freedom, before any
    /// boundary elimination.
    pub fn assemble(&self, data: &ProblemData) -> Result<(CsrMatrix, Vec<f64>)> {
        let nt = self.mesh.num_triangles();
        let mut locals: Vec<Local> = (0..nt)
            .into_par_iter()
            .map(|t| self.element_local(t, data))
            .collect::<Result<_>>()?;
        let edge_locals: Vec<Option<Local>> = (0..self.mesh.edges.len())
            .into_par_iter()
            .map(|e| self.edge_local(e))
            .collect::<Result<_>>()?;
        locals.extend(edge_locals.into_iter().flatten());
        let nd = self.dofs.num_dofs;
        let mut triplets = Vec::new();
        let mut f = vec![0.0; nd];
        for loc in &locals {
            for (a, &i) in loc.dofs.iter().enumerate() {
                f[i] += loc.rhs[a];
                for (b, &j) in loc.dofs.iter().enumerate() {
                    let v = loc.mat[(a, b)];
                    if v != 0.0 {
                        triplets.push((i, j, v));
                    }
                }
            }
        }
        Ok((CsrMatrix::from_triplets(nd, nd, &triplets), f))
    }

    /// Solve the reduced system with sparse Cholesky.
    pub fn solve(&self) -> Result<Solution> {
        self.solve_with(SolverKind::Direct)
    }

    pub fn solve_with(&self, kind: SolverKind) -> Result<Solution> {
        let report = solve(&self.system.k, &self.system.f, kind)?;
        let coeffs = self.expand(&report.solution);
        Ok(Solution { coeffs, report })
    }

    /// Full coefficient vector from the reduced unknowns.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut u: Vec<f64> = self.system.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (r, &g) in self.system.free.iter().enumerate() {
            u[g] = reduced[r];
        }
        u
    }

    /// Reduced unknowns of a full coefficient vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.system.free.iter().map(|&g| full[g]).collect()
    }

    /// Nodal values of `exact`: the plus piece at the nodes of interface
    /// elements, the element's own side elsewhere.
    pub fn interpolate(&self, exact: &ExactSolution) -> Vec<f64> {
        (0..self.dofs.num_dofs)
            .map(|d| {
                let (t, _) = self.dofs.owners[d];
                let s = match self.cls.classes[t] {
                    ElementClass::Interface => Side::Plus,
                    ElementClass::NonInterface(s) => s,
                };
                exact.value(s, self.dofs.points[d])
            })
            .collect()
    }

    /// Value and gradient of the discrete function `coeffs` (plus the
    /// enrichment when requested) on side `s` of element `t`.
    pub fn eval(
        &self,
        coeffs: &[f64],
        t: usize,
        s: Side,
        x: Point,
        with_enrichment: bool,
    ) -> (f64, Point) {
        let space = &self.spaces[t];
        let (v, g) = space.shapes(s, x);
        let mut val = 0.0;
        let mut grad = Point::zeros();
        for (i, &d) in self.dofs.element_dofs[t].iter().enumerate() {
            val += coeffs[d] * v[i];
            grad += g[i] * coeffs[d];
        }
        if with_enrichment {
            let (e, ge) = space.enrich(s, x);
            val += e;
            grad += ge;
        }
        (val, grad)
    }

    /// `a_h(u, v)` by direct quadrature of the two functions, without the
    /// assembled matrix. Boundary Nitsche terms are included.
    pub fn bilinear_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let qd = self.config.quad_degree();
        let pp = &self.config.penalty;
        let mut total = 0.0;
        for t in 0..self.mesh.num_triangles() {
            for &s in self.element_sides(t) {
                let b = self.beta.get(s);
                for (x, w) in self.element_rule(t, s, qd)?.iter() {
                    let (_, gu) = self.eval(u, t, s, x, false);
                    let (_, gv) = self.eval(v, t, s, x, false);
                    total += w * b * gu.dot(&gv);
                }
            }
            if let Some(cut) = self.cls.cuts[t].as_ref() {
                let h = diameter(self.mesh.triangle_points(t));
                let pen = pp.sigma1 * self.gamma / h.powf(pp.theta);
                if self.config.interface_penalty {
                    let q = cut_rules(cut, &self.iface, qd)?;
                    for (x, w, n) in q.interface.iter() {
                        let (up, gup) = self.eval(u, t, Side::Plus, x, false);
                        let (um, gum) = self.eval(u, t, Side::Minus, x, false);
                        let (vp, gvp) = self.eval(v, t, Side::Plus, x, false);
                        let (vm, gvm) = self.eval(v, t, Side::Minus, x, false);
                        let au = 0.5 * (self.beta.minus * gum.dot(&n) + self.beta.plus * gup.dot(&n));
                        let av = 0.5 * (self.beta.minus * gvm.dot(&n) + self.beta.plus * gvp.dot(&n));
                        let (ju, jv) = (um - up, vm - vp);
                        total += w * (au * jv - pp.eps1 * av * ju + pen * ju * jv);
                    }
                }
                let verts = self.mesh.triangle_points(t);
                for k in 0..3 {
                    if !self.mesh.edges[self.mesh.triangle_edges[t][k]].is_boundary() {
                        continue;
                    }
                    let (a, b) = (verts[k], verts[(k + 1) % 3]);
                    let len = (b - a).norm();
                    let n = Point::new(b.y - a.y, a.x - b.x) / len;
                    let pen = pp.sigma0 * self.gamma / len.powf(pp.theta);
                    for (s, rule) in edge_rules(a, b, &self.iface, qd)? {
                        let beta = self.beta.get(s);
                        for (x, w) in rule.iter() {
                            let (uu, gu) = self.eval(u, t, s, x, false);
                            let (vv, gv) = self.eval(v, t, s, x, false);
                            total += w
                                * (-beta * gu.dot(&n) * vv + pp.eps0 * beta * gv.dot(&n) * uu
                                    + pen * uu * vv);
                        }
                    }
                }
            }
        }
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            if !self.cls.interface_edges[e] || edge.adjacent.len() != 2 {
                continue;
            }
            let (t1, k1) = edge.adjacent[0];
            let (t2, _) = edge.adjacent[1];
            let v1 = self.mesh.triangle_points(t1);
            let (a, b) = (v1[k1], v1[(k1 + 1) % 3]);
            let len = (b - a).norm();
            let n = Point::new(b.y - a.y, a.x - b.x) / len;
            let pen = pp.sigma0 * self.gamma / len.powf(pp.theta);
            for (s, rule) in edge_rules(a, b, &self.iface, qd)? {
                let beta = self.beta.get(s);
                for (x, w) in rule.iter() {
                    let (u1, gu1) = self.eval(u, t1, s, x, false);
                    let (u2, gu2) = self.eval(u, t2, s, x, false);
                    let (v1, gv1) = self.eval(v, t1, s, x, false);
                    let (v2, gv2) = self.eval(v, t2, s, x, false);
                    let au = 0.5 * beta * (gu1 + gu2).dot(&n);
                    let av = 0.5 * beta * (gv1 + gv2).dot(&n);
                    let (ju, jv) = (u1 - u2, v1 - v2);
                    total += w * (-au * jv + pp.eps0 * av * ju + pen * ju * jv);
                }
            }
        }
        Ok(total)
    }
}

/// Eliminate prescribed degrees of freedom symmetrically, moving their
/// columns to the right-hand side.
pub fn apply_dirichlet(
    k_full: CsrMatrix,
    f_full: Vec<f64>,
    fixed: Vec<Option<f64>>,
) -> Result<GlobalSystem> {
    let nd = k_full.nrows;
    if fixed.len() != nd || f_full.len() != nd {
        return Err(Error::DimensionMismatch(format!(
            "{nd} unknowns, {} constraints, load of length {}",
            fixed.len(),
            f_full.len()
        )));
    }
    let mut map = vec![usize::MAX; nd];
    let mut free = Vec::new();
    for d in 0..nd {
        if fixed[d].is_none() {
            map[d] = free.len();
            free.push(d);
        }
    }
    let mut f: Vec<f64> = free.iter().map(|&d| f_full[d]).collect();
    let mut triplets = Vec::with_capacity(k_full.nnz());
    for (r, &i) in free.iter().enumerate() {
        for (j, v) in k_full.row(i) {
            match fixed[j] {
                Some(g) => f[r] -= v * g,
                None => triplets.push((r, map[j], v)),
            }
        }
    }
    let n = free.len();
    Ok(GlobalSystem {
        k: CsrMatrix::from_triplets(n, n, &triplets),
        f,
        k_full,
        f_full,
        free,
        fixed,
    })
}
