//! Local IFE construction on interface elements.
//!
//! For each interface element `T` with fictitious element `T_λ`, the local
//! least-squares Cauchy problems are assembled as `A_T α⁻ = B_T α⁺` (the
//! Cauchy mapping) and `A_T α⁻_r = b_{T,r}` for the enrichment pieces driven by
//! the value jump, the flux jump and the jump of the source.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::geometry::{FictitiousElement, Interface, Side};
use crate::polybasis::{l2_project, PolyBasis, Poly};
use crate::quadrature::{cut_rules, CutRegionQuad};
use crate::{Error, Point, Result};

/// Scalar field on the plane, shareable between worker threads.
pub type FieldRef<'a> = &'a (dyn Fn(Point) -> f64 + Send + Sync);

/// Piecewise constant diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Coefficients {
    pub plus: f64,
    pub minus: f64,
}

impl Coefficients {
    pub fn new(plus: f64, minus: f64) -> Result<Self> {
        for (name, v) in [("beta_plus", plus), ("beta_minus", minus)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ConfigField {
                    field: name.into(),
                    message: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Coefficients { plus, minus })
    }

    pub fn get(&self, s: Side) -> f64 {
        match s {
            Side::Plus => self.plus,
            Side::Minus => self.minus,
        }
    }

    /// `β⁺ / β⁻`.
    pub fn ratio(&self) -> f64 {
        self.plus / self.minus
    }

    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }

    pub fn min(&self) -> f64 {
        self.plus.min(self.minus)
    }

    pub fn swapped(&self) -> Coefficients {
        Coefficients {
            plus: self.minus,
            minus: self.plus,
        }
    }

    /// Errors unless `β⁻ ≥ β⁺`.
    pub fn require_ordered(&self) -> Result<()> {
        if self.plus > self.minus {
            return Err(Error::ConfigField {
                field: "beta".into(),
                message: format!(
                    "beta_minus = {} must be at least beta_plus = {}; exchange the labels with `orient`",
                    self.minus, self.plus
                ),
            });
        }
        Ok(())
    }
}

/// Relabel the two sides if needed so that `β⁻ ≥ β⁺`. Returns whether the
/// labels were exchanged.
pub fn orient(iface: Interface, beta: Coefficients) -> (Interface, Coefficients, bool) {
    if beta.plus > beta.minus {
        (iface.flipped(), beta.swapped(), true)
    } else {
        (iface, beta, false)
    }
}

/// Interface and source data entering the enrichment.
#[derive(Clone, Copy)]
pub struct JumpData<'a> {
    /// `[u] = u⁻ - u⁺` on the interface.
    pub jump_d: FieldRef<'a>,
    /// `β⁻∂ₙu⁻ - β⁺∂ₙu⁺` with `n` pointing from the plus to the minus side.
    pub jump_n: FieldRef<'a>,
    pub f_plus: FieldRef<'a>,
    pub f_minus: FieldRef<'a>,
}

/// Local matrices, Cauchy mapping and enrichment of one interface element.
#[derive(Debug, Clone)]
pub struct LocalIfeBlock {
    pub element: Option<usize>,
    pub lambda: f64,
    pub fict: FictitiousElement,
    /// Lagrange basis on the (unscaled) element.
    pub basis: PolyBasis,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Column `j` holds the Lagrange coefficients of the Cauchy extension of `ζ_j`.
    pub cauchy: DMatrix<f64>,
    pub alpha_d: DVector<f64>,
    pub alpha_n: DVector<f64>,
    pub alpha_f: DVector<f64>,
    pub kappa: f64,
    /// Least-squares objectives at the computed minimizers: the largest over
    /// the basis for the Cauchy mapping, then the value-jump, flux-jump and
    /// source pieces.
    pub objectives: [f64; 4],
}

impl LocalIfeBlock {
    /// Monomial coefficients of the shape functions on one side, one column
    /// per local degree of freedom.
    pub fn side_coeffs(&self, s: Side) -> DMatrix<f64> {
        match s {
            Side::Plus => self.basis.coeffs.clone(),
            Side::Minus => &self.basis.coeffs * &self.cauchy,
        }
    }

    /// The `i`-th shape function on side `s`.
    pub fn shape(&self, s: Side, i: usize) -> Poly {
        match s {
            Side::Plus => {
                let mut e = vec![0.0; self.basis.dim()];
                e[i] = 1.0;
                self.basis.combine(&e)
            }
            Side::Minus => self.basis.combine(self.cauchy.column(i).as_slice()),
        }
    }

    /// Lagrange coefficients of the enrichment on the minus side; it vanishes
    /// on the plus side.
    pub fn enrichment_alpha(&self) -> DVector<f64> {
        &self.alpha_d + &self.alpha_n + &self.alpha_f
    }

    pub fn enrichment(&self, s: Side) -> Poly {
        match s {
            Side::Plus => Poly::zero(self.basis.frame, self.basis.p),
            Side::Minus => self.basis.combine(self.enrichment_alpha().as_slice()),
        }
    }
}

/// Quadrature degree used for the local problems.
pub fn local_quad_degree(p: usize) -> usize {
    2 * p + 2
}

/// Assemble `A_T` and `B_T` on the fictitious element.
pub fn assemble_local(
    fict: &FictitiousElement,
    basis: &PolyBasis,
    quad: &CutRegionQuad,
    beta: Coefficients,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = basis.dim();
    let h = fict.h;
    let rho = beta.ratio();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut mass = DMatrix::<f64>::zeros(n, n);
    let mut flux = DMatrix::<f64>::zeros(n, n);
    if basis.p >= 2 {
        for (x, w) in quad.minus.iter() {
            let l = DVector::from_vec(basis.laplacian(x));
            lap.ger(w, &l, &l, 1.0);
        }
    }
    for (x, w, nrm) in quad.interface.iter() {
        let v = DVector::from_vec(basis.eval(x));
        let dn = DVector::from_iterator(n, basis.grad(x).iter().map(|g| g.dot(&nrm)));
        mass.ger(w, &v, &v, 1.0);
        flux.ger(w, &dn, &dn, 1.0);
    }
    let hm3 = h.powi(-3);
    let hm1 = h.recip();
    let a = &lap + &mass * hm3 + &flux * hm1;
    let b = &lap * rho + &mass * hm3 + &flux * (rho * hm1);
    let a = symmetrize(a);
    let b = symmetrize(b);
    (a, b)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn factor(a: &DMatrix<f64>, fict: &FictitiousElement) -> Result<Cholesky<f64, Dyn>> {
    a.clone().cholesky().ok_or_else(|| Error::LocalDegeneracy {
        element: fict.parent.unwrap_or(usize::MAX),
        lambda: fict.lambda,
        detail: format!(
            "local matrix is not positive definite; cut points {:?}, {:?}",
            fict.cut.points[0], fict.cut.points[1]
        ),
    })
}

/// `C = A_T⁻¹ B_T`.
pub fn cauchy_matrix(chol: &Cholesky<f64, Dyn>, b: &DMatrix<f64>) -> DMatrix<f64> {
    chol.solve(b)
}

/// Right-hand sides `(b_D, b_N, b_f)` of the enrichment problems. The source
/// piece is only present for `p ≥ 2`.
pub fn enrichment_rhs(
    fict: &FictitiousElement,
    basis: &PolyBasis,
    quad: &CutRegionQuad,
    data: &JumpData,
    beta: Coefficients,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let n = basis.dim();
    let h = fict.h;
    let mut bd = DVector::zeros(n);
    let mut bn = DVector::zeros(n);
    let mut bf = DVector::zeros(n);
    for (x, w, nrm) in quad.interface.iter() {
        let jd = (data.jump_d)(x);
        let jn = (data.jump_n)(x);
        let v = basis.eval(x);
        let g = basis.grad(x);
        for i in 0..n {
            bd[i] += w * jd * v[i];
            bn[i] += w * jn * g[i].dot(&nrm);
        }
    }
    bd *= h.powi(-3);
    bn *= 1.0 / (h * beta.minus);
    if basis.p >= 2 {
        let phi = source_jump(basis, quad, data, beta)?;
        for (x, w) in quad.minus.iter() {
            let pf = phi.eval(x);
            for (i, l) in basis.laplacian(x).into_iter().enumerate() {
                bf[i] += w * pf * l;
            }
        }
    }
    Ok((bd, bn, bf))
}

/// `(Π f⁺ - Π f⁻) / β⁻` with degree `p - 2` projections on the two sides of
/// the fictitious element.
pub fn source_jump(
    basis: &PolyBasis,
    quad: &CutRegionQuad,
    data: &JumpData,
    beta: Coefficients,
) -> Result<Poly> {
    let k = basis.p - 2;
    let fp = l2_project(&data.f_plus, &quad.plus, basis.frame, k)?;
    let fm = l2_project(&data.f_minus, &quad.minus, basis.frame, k)?;
    Ok(Poly {
        frame: basis.frame,
        degree: k,
        coeffs: fp
            .coeffs
            .iter()
            .zip(&fm.coeffs)
            .map(|(a, b)| (a - b) / beta.minus)
            .collect(),
    })
}

/// Solve `A_T α = b` for each enrichment right-hand side.
pub fn enrichment_solve(
    chol: &Cholesky<f64, Dyn>,
    bd: &DVector<f64>,
    bn: &DVector<f64>,
    bf: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    (chol.solve(bd), chol.solve(bn), chol.solve(bf))
}

/// Spectral condition number of a symmetric matrix; infinite when it is not
/// numerically positive definite.
pub fn local_condition(a: &DMatrix<f64>) -> f64 {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Value of the local least-squares objective
/// `‖Δv - ρΔz - φ‖² + h⁻³‖v - z - J_D‖² + h⁻¹‖∂ₙv - ρ∂ₙz - J_N/β⁻‖²`
/// for polynomials `v` (minus side) and `z` (plus side), both given as
/// Lagrange coefficients.
#[allow(clippy::too_many_arguments)]
pub fn objective(
    fict: &FictitiousElement,
    basis: &PolyBasis,
    quad: &CutRegionQuad,
    beta: Coefficients,
    v: &[f64],
    z: &[f64],
    data: Option<(&JumpData, Option<&Poly>)>,
) -> f64 {
    let rho = beta.ratio();
    let pv = basis.combine(v);
    let pz = basis.combine(z);
    let mut vol = 0.0;
    for (x, w) in quad.minus.iter() {
        let phi = match data {
            Some((_, Some(phi))) => phi.eval(x),
            _ => 0.0,
        };
        let r = pv.laplacian(x) - rho * pz.laplacian(x) - phi;
        vol += w * r * r;
    }
    let mut tr = 0.0;
    let mut fl = 0.0;
    for (x, w, n) in quad.interface.iter() {
        let (jd, jn) = match data {
            Some((d, _)) => ((d.jump_d)(x), (d.jump_n)(x) / beta.minus),
            None => (0.0, 0.0),
        };
        let r0 = pv.eval(x) - pz.eval(x) - jd;
        let r1 = (pv.grad(x) - pz.grad(x) * rho).dot(&n) - jn;
        tr += w * r0 * r0;
        fl += w * r1 * r1;
    }
    vol + tr * fict.h.powi(-3) + fl / fict.h
}

/// `A_T` on the fictitious element `T_λ` of the triangle `verts`, without
/// factoring it.
pub fn local_matrix(
    verts: [Point; 3],
    iface: &Interface,
    beta: Coefficients,
    p: usize,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let fict = crate::geometry::fictitious_element(verts, lambda, iface, None)?;
    let basis = PolyBasis::lagrange(p, verts)?;
    let quad = cut_rules(&fict.cut, iface, local_quad_degree(p))?;
    Ok(assemble_local(&fict, &basis, &quad, beta).0)
}

/// Build the local block of an interface element.
///
/// `verts` are the vertices of the element; the local problems are posed on
/// the fictitious element with scaling factor `lambda`. Without `data` the
/// enrichment coefficients are zero.
#[allow(clippy::too_many_arguments)]
pub fn build_block(
    verts: [Point; 3],
    element: Option<usize>,
    iface: &Interface,
    beta: Coefficients,
    p: usize,
    lambda: f64,
    data: Option<&JumpData>,
) -> Result<LocalIfeBlock> {
    let fict = crate::geometry::fictitious_element(verts, lambda, iface, element)?;
    let basis = PolyBasis::lagrange(p, verts)?;
    let quad = cut_rules(&fict.cut, iface, local_quad_degree(p))?;
    let (a, b) = assemble_local(&fict, &basis, &quad, beta);
    let chol = factor(&a, &fict)?;
    let cauchy = cauchy_matrix(&chol, &b);
    let n = basis.dim();
    let (alpha_d, alpha_n, alpha_f, phi) = match data {
        Some(d) => {
            let (bd, bn, bf) = enrichment_rhs(&fict, &basis, &quad, d, beta)?;
            let (ad, an, af) = enrichment_solve(&chol, &bd, &bn, &bf);
            let phi = if p >= 2 {
                Some(source_jump(&basis, &quad, d, beta)?)
            } else {
                None
            };
            (ad, an, af, phi)
        }
        None => (
            DVector::zeros(n),
            DVector::zeros(n),
            DVector::zeros(n),
            None,
        ),
    };
    let kappa = local_condition(&a);

    let zero = vec![0.0; n];
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let v: Vec<f64> = cauchy.column(j).iter().copied().collect();
        worst = worst.max(objective(&fict, &basis, &quad, beta, &v, &e, None));
    }
    let mut objectives = [worst, 0.0, 0.0, 0.0];
    if let Some(d) = data {
        let zf = |_: Point| 0.0;
        let only_d = JumpData {
            jump_d: d.jump_d,
            jump_n: &zf,
            f_plus: &zf,
            f_minus: &zf,
        };
        let only_n = JumpData {
            jump_d: &zf,
            jump_n: d.jump_n,
            f_plus: &zf,
            f_minus: &zf,
        };
        objectives[1] = objective(&fict, &basis, &quad, beta, alpha_d.as_slice(), &zero, Some((&only_d, None)));
        objectives[2] = objective(&fict, &basis, &quad, beta, alpha_n.as_slice(), &zero, Some((&only_n, None)));
        let none = JumpData {
            jump_d: &zf,
            jump_n: &zf,
            f_plus: &zf,
            f_minus: &zf,
        };
        objectives[3] = objective(
            &fict,
            &basis,
            &quad,
            beta,
            alpha_f.as_slice(),
            &zero,
            Some((&none, phi.as_ref())),
        );
    }
    log::trace!(
        "element {:?}: kappa {:.3e}, objectives {:?}",
        element,
        kappa,
        objectives
    );
    Ok(LocalIfeBlock {
        element,
        lambda,
        fict,
        basis,
        a,
        b,
        cauchy,
        alpha_d,
        alpha_n,
        alpha_f,
        kappa,
        objectives,
    })
}

/// Per-element diagnostics as CSV.
pub fn diagnostics_csv(blocks: &[LocalIfeBlock]) -> String {
    let mut s = String::from("element,lambda,kappa,obj_cauchy,obj_jump_d,obj_jump_n,obj_source\n");
    for b in blocks {
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{:e},{:e},{:e}",
            b.element.map(|e| e.to_string()).unwrap_or_default(),
            b.lambda,
            b.kappa,
            b.objectives[0],
            b.objectives[1],
            b.objectives[2],
            b.objectives[3]
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(h: f64, x0: f64, y0: f64) -> [Point; 3] {
        [
            Point::new(x0, y0),
            Point::new(x0 + h, y0),
            Point::new(x0, y0 + h),
        ]
    }

    fn line_block(p: usize, beta: Coefficients, data: Option<&JumpData>) -> LocalIfeBlock {
        let iface = Interface::horizontal(0.0);
        build_block(tri(0.1, 0.013, -0.031), None, &iface, beta, p, 1.5, data).unwrap()
    }

    fn lagrange_of(block: &LocalIfeBlock, f: impl Fn(Point) -> f64) -> Vec<f64> {
        block.basis.nodes.iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn p1_has_no_laplacian_and_is_spd() {
        let b = line_block(1, Coefficients::new(1.0, 3.0).unwrap(), None);
        assert!(b.a.clone().cholesky().is_some());
        assert!(b.kappa.is_finite());
    }

    #[test]
    fn equal_coefficients_give_identity() {
        for p in 1..=3 {
            let b = line_block(p, Coefficients::new(2.0, 2.0).unwrap(), None);
            assert!((&b.a - &b.b).amax() <= 1e-12 * b.a.amax());
            let id = DMatrix::<f64>::identity(b.basis.dim(), b.basis.dim());
            assert!((&b.cauchy - id).amax() < 1e-10);
        }
    }

    #[test]
    fn tangential_and_normal_linear_extension() {
        let beta = Coefficients::new(1.0, 4.0).unwrap();
        for p in 1..=3 {
            let b = line_block(p, beta, None);
            let x = lagrange_of(&b, |q| q.x);
            let y = lagrange_of(&b, |q| q.y);
            let cx = &b.cauchy * DVector::from_vec(x.clone());
            let cy = &b.cauchy * DVector::from_vec(y.clone());
            for i in 0..x.len() {
                assert!((cx[i] - x[i]).abs() < 1e-10);
                assert!((cy[i] - beta.ratio() * y[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_and_consistent() {
        let b = line_block(3, Coefficients::new(1.0, 7.0).unwrap(), None);
        assert!((&b.a - b.a.transpose()).amax() <= 1e-12 * b.a.amax());
        assert!((&b.b - b.b.transpose()).amax() <= 1e-12 * b.b.amax());
        let r = &b.a * &b.cauchy - &b.b;
        assert!(r.amax() <= 1e-10 * b.b.amax());
    }

    #[test]
    fn identity_and_diagonal_condition() {
        assert_eq!(local_condition(&DMatrix::identity(4, 4)), 1.0);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        assert!((local_condition(&d) - 4.0).abs() < 1e-14);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(local_condition(&s).is_infinite());
    }

    #[test]
    fn homogeneous_data_gives_zero_enrichment() {
        let z = |_: Point| 0.0;
        // continuous sources of degree at most p - 2 project identically on both sides
        let f = |q: Point| 3.0 * q.x - q.y + 1.0;
        let data = JumpData {
            jump_d: &z,
            jump_n: &z,
            f_plus: &f,
            f_minus: &f,
        };
        let b = line_block(3, Coefficients::new(1.0, 2.0).unwrap(), Some(&data));
        assert!(b.enrichment_alpha().amax() < 1e-12);
    }

    #[test]
    fn piecewise_coefficient_identity_on_plus_side() {
        let b = line_block(2, Coefficients::new(1.0, 2.0).unwrap(), None);
        let plus = b.side_coeffs(Side::Plus);
        for i in 0..b.basis.dim() {
            let s = b.shape(Side::Plus, i);
            for k in 0..s.coeffs.len() {
                assert_eq!(s.coeffs[k], plus[(k, i)]);
            }
        }
    }

    #[test]
    fn curved_objectives_are_small_but_nonzero() {
        let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4).unwrap();
        let beta = Coefficients::new(2.0, 1.0).unwrap();
        let b = build_block(tri(0.2, 0.6, 0.0), None, &iface, beta, 2, 1.5, None).unwrap();
        assert!(b.objectives[0] > 0.0 && b.objectives[0] < 1.0);
        let csv = diagnostics_csv(&[b]);
        assert_eq!(csv.lines().count(), 2);
    }
}
