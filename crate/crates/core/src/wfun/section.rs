//! Lie-algebra valued functions on the q = 0 fiber: the sections
//! J_ab ⊗ (u d/du)^m ŵ_ab(u/u_i), the splitting of principal parts, the
//! C_N-averaging, q-expansions in the two node charts, and the orbifold
//! out-algebra.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactnum::{CycNum, Laurent, Point, RatFunc};
use crate::linalg::Dense;
use crate::twistalg::{j_basis, EBasis, GMat};

use super::series::{wmul_q0, wmul_series};

/// Σ_α E_α ⊗ f_α(u) in the rational basis of sl_N.
#[derive(Clone, Debug, PartialEq)]
pub struct GFun {
    pub n: u32,
    pub comps: BTreeMap<usize, RatFunc>,
}

/// Coefficients of ξ^lo … ξ^hi of a local expansion.
pub fn coeff_window(f: &RatFunc, at: &Point, lo: i64, hi: i64) -> Result<Vec<CycNum>> {
    let n = f.order();
    let len = (hi - lo + 1).max(0) as usize;
    if f.is_zero() || len == 0 {
        return Ok(vec![CycNum::zero(n); len]);
    }
    let v = f.expand(at, 1)?.val;
    let terms = (hi - v + 1).max(1) as usize;
    let s = f.expand(at, terms)?;
    Ok((lo..=hi).map(|d| s.coeff(d, n).unwrap_or_else(|| CycNum::zero(n))).collect())
}

impl GFun {
    pub fn zero(n: u32) -> Self {
        GFun { n, comps: BTreeMap::new() }
    }

    /// X ⊗ f for a traceless matrix X.
    pub fn from_mat(x: &GMat, f: &RatFunc) -> Self {
        let eb = EBasis::new(x.order());
        let mut out = GFun::zero(x.order());
        for (alpha, c) in eb.coords(x) {
            out.add_term(alpha, &f.scale(&c)).expect("same order");
        }
        out
    }

    /// J_ab ⊗ f.
    pub fn from_j(n: u32, a: usize, b: usize, f: &RatFunc) -> Self {
        Self::from_mat(&j_basis(n, a as i64, b as i64), f)
    }

    pub fn add_term(&mut self, alpha: usize, f: &RatFunc) -> Result<()> {
        let cur = self.comps.remove(&alpha).unwrap_or_else(|| RatFunc::zero(self.n));
        let s = cur.add(f)?;
        if !s.is_zero() {
            self.comps.insert(alpha, s);
        }
        Ok(())
    }

    pub fn add(&self, o: &GFun) -> Result<GFun> {
        let mut out = self.clone();
        for (a, f) in &o.comps {
            out.add_term(*a, f)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CycNum) -> GFun {
        let mut out = GFun::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (a, f) in &self.comps {
            out.comps.insert(*a, f.scale(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Value at a point as a matrix.
    pub fn eval(&self, u: &CycNum) -> Result<GMat> {
        let eb = EBasis::new(self.n);
        let mut m = GMat::zero(self.n);
        for (a, f) in &self.comps {
            m = m.add(&eb.mats[*a].scale(&f.eval(u)?));
        }
        Ok(m)
    }

    /// f(ε u) = Adγ^{sign} f(u), componentwise: E_α carries Adγ-charge c_α.
    pub fn is_equivariant(&self, sign: i64) -> Result<bool> {
        let eb = EBasis::new(self.n);
        let e = CycNum::eps_pow(self.n, 1);
        for (a, f) in &self.comps {
            let c = CycNum::eps_pow(self.n, sign * eb.charge(*a) as i64);
            if f.dilate(&e)? != f.scale(&c) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Componentwise coefficients of ξ^lo … ξ^hi at a point.
    pub fn window(&self, at: &Point, lo: i64, hi: i64) -> Result<BTreeMap<usize, Vec<CycNum>>> {
        self.comps.iter().map(|(a, f)| Ok((*a, coeff_window(f, at, lo, hi)?))).collect()
    }

    /// Largest pole order over all components at a point (0 if regular).
    pub fn pole_order(&self, at: &Point) -> Result<i64> {
        let mut p = 0;
        for f in self.comps.values() {
            p = p.max(f.pole_order(at)?);
        }
        Ok(p)
    }

    /// (u d/du) applied componentwise.
    pub fn euler(&self) -> Result<GFun> {
        let mut out = GFun::zero(self.n);
        for (a, f) in &self.comps {
            out.add_term(*a, &f.euler()?)?;
        }
        Ok(out)
    }
}

/// Checks the marked points: nonzero, with pairwise distinct N-th powers
/// (distinct C_N-orbits).
pub fn check_points(n: u32, points: &[CycNum]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if p.is_zero() {
            return Err(Error::InvalidInput(format!("point {i} is zero")));
        }
        let pi = p.pow(n as i64)?;
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            if pi == q.pow(n as i64)? {
                return Err(Error::InvalidInput(format!("points {i} and {j} lie in one C_N-orbit")));
            }
        }
    }
    Ok(())
}

/// ŵ_ab(0; u/u_i), with its simple poles at u ∈ ε^Z u_i.
pub fn w_section_q0(n: u32, a: usize, b: usize, ui: &CycNum) -> Result<RatFunc> {
    if ui.is_zero() {
        return Err(Error::InvalidInput("section centred at u = 0".into()));
    }
    wmul_q0(n, a, b)?.dilate(&ui.inv()?)
}

/// The pole set {ε^j u_i} of the q = 0 section.
pub fn w_section_poles(n: u32, ui: &CycNum) -> Vec<CycNum> {
    (0..n as i64).map(|j| &CycNum::eps_pow(n, j) * ui).collect()
}

/// One term c·J_ab ⊗ (u d/du)^m w_{ab,i}.
#[derive(Clone, Debug, PartialEq)]
pub struct OutTerm {
    pub a: usize,
    pub b: usize,
    pub site: usize,
    pub m: usize,
    pub coeff: CycNum,
}

/// An element of the trigonometric out-algebra.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutSection {
    pub terms: Vec<OutTerm>,
}

impl OutSection {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The q = 0 function Σ c·J_ab ⊗ (u d/du)^m ŵ_ab(0; u/u_i).
    pub fn to_gfun(&self, n: u32, points: &[CycNum]) -> Result<GFun> {
        let mut out = GFun::zero(n);
        for t in &self.terms {
            let ui = points.get(t.site).ok_or_else(|| Error::InvalidInput(format!("no marked point {}", t.site)))?;
            let mut f = w_section_q0(n, t.a, t.b, ui)?;
            for _ in 0..t.m {
                f = f.euler()?;
            }
            out = out.add(&GFun::from_j(n, t.a, t.b, &f.scale(&t.coeff)))?;
        }
        Ok(out)
    }
}

/// The generator J_ab ⊗ (u d/du)^m ŵ_ab(0; u/u_i) of the trigonometric out-algebra.
pub fn trig_generator(n: u32, a: usize, b: usize, ui: &CycNum, m: usize) -> Result<GFun> {
    let mut f = w_section_q0(n, a, b, ui)?;
    for _ in 0..m {
        f = f.euler()?;
    }
    Ok(GFun::from_j(n, a, b, &f))
}

/// Principal part at marked point `site`: J_ab ⊗ Σ_{p=1}^{P} c_p (u − u_i)^{−p}.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart {
    pub a: usize,
    pub b: usize,
    pub site: usize,
    pub coeffs: Vec<CycNum>,
}

/// What is left after subtracting the out-section: the residual principal
/// parts (all zero on success) and the regular Taylor data of the section
/// at each marked point.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCertificate {
    pub residual_zero: bool,
    pub regular: Vec<(usize, BTreeMap<usize, Vec<CycNum>>)>,
}

/// Principal-part coefficients c_1 … c_P of (u d/du)^m ŵ_ab(0; u/u_i) at u_i.
fn principal_of_generator(n: u32, a: usize, b: usize, ui: &CycNum, m: usize, p: usize) -> Result<Vec<CycNum>> {
    let mut f = w_section_q0(n, a, b, ui)?;
    for _ in 0..m {
        f = f.euler()?;
    }
    let mut w = coeff_window(&f, &Point::Finite(ui.clone()), -(p as i64), -1)?;
    w.reverse();
    Ok(w)
}

/// Writes prescribed principal parts at the marked points as an element of
/// the out-algebra; the principal parts at the other points of each C_N-orbit
/// are then fixed by equivariance.
pub fn split_singular(n: u32, points: &[CycNum], parts: &[PrincipalPart]) -> Result<(OutSection, SplitCertificate)> {
    check_points(n, points)?;
    let mut out = OutSection::default();
    for pp in parts {
        if pp.site >= points.len() {
            return Err(Error::InvalidInput(format!(
                "principal part at site {} is not a marked point (node insertions are excluded)",
                pp.site
            )));
        }
        let p = pp.coeffs.len();
        if p == 0 || pp.coeffs.iter().all(CycNum::is_zero) {
            continue;
        }
        let ui = &points[pp.site];
        let zero = CycNum::zero(n);
        let mut m = Dense::zeros(p, p, &zero);
        for d in 0..p {
            let col = principal_of_generator(n, pp.a, pp.b, ui, d, p)?;
            for (r, v) in col.into_iter().enumerate() {
                m.set(r, d, v);
            }
        }
        let inv = m.inverse()?;
        for d in 0..p {
            let mut x = zero.clone();
            for (r, c) in pp.coeffs.iter().enumerate() {
                x += &(inv.get(d, r) * c);
            }
            if !x.is_zero() {
                out.terms.push(OutTerm { a: pp.a, b: pp.b, site: pp.site, m: d, coeff: x });
            }
        }
    }
    let g = out.to_gfun(n, points)?;
    let eb = EBasis::new(n);
    let mut residual_zero = true;
    let mut regular = Vec::new();
    for (i, ui) in points.iter().enumerate() {
        let at = Point::Finite(ui.clone());
        let pmax = parts.iter().filter(|p| p.site == i).map(|p| p.coeffs.len()).max().unwrap_or(0);
        let pmax = pmax.max(g.pole_order(&at)?.max(0) as usize);
        // expected principal part in E-coordinates
        let mut expect = GFun::zero(n);
        for pp in parts.iter().filter(|p| p.site == i) {
            let mut l = Laurent::zero(n);
            for (k, c) in pp.coeffs.iter().enumerate() {
                l.add_term(-(k as i64) - 1, c);
            }
            // written in the local coordinate ξ = u − u_i
            let f = RatFunc::from_laurent(l);
            let jm = j_basis(n, pp.a as i64, pp.b as i64);
            for (alpha, c) in eb.coords(&jm) {
                expect.add_term(alpha, &f.scale(&c))?;
            }
        }
        if pmax > 0 {
            let got = g.window(&at, -(pmax as i64), -1)?;
            let want = expect.window(&Point::Finite(CycNum::zero(n)), -(pmax as i64), -1)?;
            let keys: std::collections::BTreeSet<usize> = got.keys().chain(want.keys()).copied().collect();
            for k in keys {
                let z = vec![CycNum::zero(n); pmax];
                if got.get(&k).unwrap_or(&z) != want.get(&k).unwrap_or(&z) {
                    residual_zero = false;
                }
            }
        }
        regular.push((i, g.window(&at, 0, pmax as i64)?));
    }
    Ok((out, SplitCertificate { residual_zero, regular }))
}

/// Σ_{j=0}^{N−1} (Adγ)^j f(ε^{−j} t).
pub fn cn_average(n: u32, f: &[(GMat, RatFunc)]) -> Result<GFun> {
    let mut g = GFun::zero(n);
    for (x, r) in f {
        g = g.add(&GFun::from_mat(x, r))?;
    }
    cn_average_gfun(&g)
}

pub fn cn_average_gfun(g: &GFun) -> Result<GFun> {
    let n = g.n;
    let eb = EBasis::new(n);
    let mut out = GFun::zero(n);
    for (a, f) in &g.comps {
        let c = eb.charge(*a) as i64;
        for j in 0..n as i64 {
            let term = f.dilate(&CycNum::eps_pow(n, -j))?.scale(&CycNum::eps_pow(n, j * c));
            out.add_term(*a, &term)?;
        }
    }
    Ok(out)
}

/// Node chart used for a q-expansion: x = u on one branch, y = q/u on the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    X,
    Y,
}

/// Coefficients f_0 … f_order of f = Σ f_n q^n for an out-section built from
/// the full q-series. On the y-chart ŵ_ab(q; q/v) = −ε^b ŵ_{−a,−b}(q; v)
/// and u d/du = −y d/dy are used.
pub fn q_expand(n: u32, s: &OutSection, points: &[CycNum], chart: Chart, order: usize) -> Result<Vec<GFun>> {
    let mut out = vec![GFun::zero(n); order + 1];
    let nn = n as usize;
    for t in &s.terms {
        let ui = &points[t.site];
        let (sa, sb, pre, dil) = match chart {
            Chart::X => (t.a, t.b, CycNum::one(n), ui.inv()?),
            Chart::Y => {
                let sign = if t.m % 2 == 0 { CycNum::one(n) } else { -CycNum::one(n) };
                let c = -&(&CycNum::eps_pow(n, t.b as i64) * &sign);
                ((nn - t.a) % nn, (nn - t.b) % nn, c, ui.clone())
            }
        };
        let w = wmul_series(n, sa, sb, order)?;
        for (k, slot) in out.iter_mut().enumerate() {
            let mut f = w.series.coeff(k).dilate(&dil)?;
            for _ in 0..t.m {
                f = f.euler()?;
            }
            let g = GFun::from_j(n, t.a, t.b, &f.scale(&(&pre * &t.coeff)));
            *slot = slot.add(&g)?;
        }
    }
    Ok(out)
}

/// Spanning set of the orbifold out-algebra: equivariant functions with poles
/// of order ≤ `pmax` at 0, ∞ and the C_N-orbits of the marked points.
pub fn gout_orb_basis(n: u32, points: &[CycNum], pmax: usize) -> Result<Vec<GFun>> {
    check_points(n, points)?;
    let eb = EBasis::new(n);
    let mut out = Vec::new();
    let pm = pmax as i64;
    for alpha in 0..eb.len() {
        let c = eb.charge(alpha) as i64;
        for m in -pm..=pm {
            if (m - c).rem_euclid(n as i64) == 0 {
                let mut g = GFun::zero(n);
                g.add_term(alpha, &RatFunc::monomial(n, m))?;
                out.push(g);
            }
        }
        for ui in points {
            for m in 1..=pmax {
                let base =
                    RatFunc::new(Laurent::one(n), Laurent::monomial(CycNum::one(n), 1).add(&Laurent::constant(-ui)))?;
                let mut f = RatFunc::one(n);
                for _ in 0..m {
                    f = f.mul(&base)?;
                }
                let mut g = GFun::zero(n);
                g.add_term(alpha, &f)?;
                out.push(cn_average_gfun(&g)?);
            }
        }
    }
    Ok(out)
}

/// The section used to move e_i off the orbifold point 0:
/// e(t) = X ⊗ t·A(x)/Π_j (x − u_j^N)^P with x = t^N and A ≡ Π_j (x − u_j^N)^P
/// mod x^r, so e(t) = X ⊗ (t + O(t^{1+Nr})) at 0, with a zero of order at
/// least N·z − 1 at ∞. Returns the section and the pole order P.
pub fn raising_section(n: u32, x: &GMat, points: &[CycNum], r: usize, z: usize) -> Result<(GFun, usize)> {
    check_points(n, points)?;
    if points.is_empty() {
        return Err(Error::InvalidInput("at least one marked point is needed".into()));
    }
    let l = points.len();
    let p = (r + z).saturating_sub(1).div_ceil(l).max(1);
    let mut prod = Laurent::one(n);
    for u in points {
        let x0 = u.pow(n as i64)?;
        let lin = Laurent::monomial(CycNum::one(n), 1).add(&Laurent::constant(-&x0));
        for _ in 0..p {
            prod = prod.mul(&lin);
        }
    }
    let mut a = Laurent::zero(n);
    for (d, c) in &prod.terms {
        if (*d as usize) < r {
            a.add_term(*d, c);
        }
    }
    let f = RatFunc::new(a, prod)?.compose_power(n as i64)?.mul_laurent(&Laurent::monomial(CycNum::one(n), 1))?;
    Ok((GFun::from_mat(x, &f), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfun::series::eval_product;
    use num_complex::Complex64;

    fn c(n: u32, k: i64) -> CycNum {
        CycNum::from_int(n, k)
    }

    #[test]
    fn section_poles_and_covariance() {
        let n = 2;
        let ui = c(n, 3);
        let f = w_section_q0(n, 1, 0, &ui).unwrap();
        let poles = w_section_poles(n, &ui);
        assert_eq!(poles, vec![c(n, 3), c(n, -3)]);
        for p in &poles {
            assert_eq!(f.pole_order(&Point::Finite(p.clone())).unwrap(), 1);
        }
        let e = CycNum::eps_pow(3, 1);
        for (a, b) in [(1, 0), (1, 2), (0, 1)] {
            let u3 = CycNum::from_int(3, 2);
            let g = w_section_q0(3, a, b, &u3).unwrap();
            assert_eq!(g.dilate(&e).unwrap(), g.scale(&CycNum::eps_pow(3, a as i64)));
            let h = w_section_q0(3, a, b, &(&e * &u3)).unwrap();
            let expect = g.dilate(&e.inv().unwrap()).unwrap();
            assert_eq!(h, expect);
            assert_eq!(h, g.scale(&CycNum::eps_pow(3, -(a as i64))));
        }
    }

    #[test]
    fn split_round_trip() {
        let n = 3;
        let pts = vec![c(n, 2), c(n, 5)];
        let (s, cert) = split_singular(n, &pts, &[]).unwrap();
        assert!(s.is_empty() && cert.residual_zero);
        let parts = vec![
            PrincipalPart { a: 1, b: 2, site: 0, coeffs: vec![c(n, 1)] },
            PrincipalPart { a: 0, b: 1, site: 1, coeffs: vec![c(n, 2), CycNum::eps_pow(n, 1)] },
        ];
        let (s, cert) = split_singular(n, &pts, &parts).unwrap();
        assert!(cert.residual_zero);
        assert!(s.terms.iter().any(|t| t.m == 1));
        // a single simple pole is matched by the residue normalizer
        let (s1, _) = split_singular(n, &pts, &parts[..1]).unwrap();
        let res = coeff_window(&w_section_q0(n, 1, 2, &pts[0]).unwrap(), &Point::Finite(pts[0].clone()), -1, -1)
            .unwrap()[0]
            .clone();
        assert_eq!(s1.terms[0].coeff, res.inv().unwrap());
        assert!(split_singular(n, &pts, &[PrincipalPart { a: 1, b: 0, site: 7, coeffs: vec![c(n, 1)] }]).is_err());
    }

    #[test]
    fn averaging_is_equivariant_and_projects() {
        let n = 2;
        let eb = EBasis::new(n);
        let f = RatFunc::new(Laurent::one(n), Laurent::monomial(c(n, 1), 1).add(&Laurent::constant(c(n, -3)))).unwrap();
        let g = cn_average(n, &[(eb.mats[eb.e_index(0, 1)].clone(), f)]).unwrap();
        assert!(g.is_equivariant(1).unwrap());
        let gg = cn_average_gfun(&g).unwrap();
        assert_eq!(gg, g.scale(&c(n, 2)));
        let jf = GFun::from_j(n, 1, 1, &w_section_q0(n, 1, 1, &c(n, 3)).unwrap());
        assert_eq!(cn_average_gfun(&jf).unwrap(), jf.scale(&c(n, 2)));
    }

    #[test]
    fn y_chart_identity_numerically() {
        let q = Complex64::new(0.07, 0.02);
        let v = Complex64::new(1.4, 0.3);
        for (n, a, b) in [(2u32, 1usize, 0usize), (2, 1, 1), (3, 1, 2), (3, 0, 1)] {
            let lhs = eval_product(n, a, b, q, q / v).unwrap();
            let nn = n as usize;
            let eb = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * b as f64 / n as f64);
            let rhs = -eb * eval_product(n, (nn - a) % nn, (nn - b) % nn, q, v).unwrap();
            assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn q_expansion_charts() {
        let n = 2;
        let pts = vec![c(n, 3)];
        let s = OutSection { terms: vec![OutTerm { a: 1, b: 0, site: 0, m: 1, coeff: c(n, 1) }] };
        let xs = q_expand(n, &s, &pts, Chart::X, 4).unwrap();
        assert_eq!(xs[0], s.to_gfun(n, &pts).unwrap());
        let ys = q_expand(n, &s, &pts, Chart::Y, 4).unwrap();
        for f in &xs {
            assert!(f.is_equivariant(1).unwrap());
        }
        for f in &ys {
            assert!(f.is_equivariant(-1).unwrap());
        }
    }

    #[test]
    fn orbifold_basis_members_are_equivariant() {
        let n = 2;
        let pts = vec![c(n, 3)];
        let basis = gout_orb_basis(n, &pts, 1).unwrap();
        for g in &basis {
            assert!(g.is_equivariant(1).unwrap());
        }
        // three sl_2 directions with a first-order pole at u_1
        let at = Point::Finite(pts[0].clone());
        let with_pole: Vec<_> = basis.iter().filter(|g| g.pole_order(&at).unwrap() == 1).collect();
        let dirs: std::collections::BTreeSet<usize> = with_pole.iter().flat_map(|g| g.comps.keys().copied()).collect();
        assert_eq!(dirs.len(), 3);
    }

    #[test]
    fn raising_section_shape() {
        let n = 2;
        let eb = EBasis::new(n);
        let x = eb.mats[eb.e_index(0, 1)].clone();
        let pts = vec![CycNum::from_rat(n, crate::exactnum::cyc::rat(3, 2))];
        for r in 1..=3 {
            let (g, _) = raising_section(n, &x, &pts, r, 2).unwrap();
            assert!(g.is_equivariant(1).unwrap());
            let f = &g.comps[&eb.e_index(0, 1)];
            let w = coeff_window(f, &Point::Finite(c(n, 0)), 0, (n as i64) * r as i64).unwrap();
            assert_eq!(w[1], c(n, 1));
            assert!(w.iter().enumerate().all(|(k, v)| k == 1 || v.is_zero()));
            assert!(f.pole_order(&Point::Infinity).unwrap() <= -(2 * n as i64 - 1));
        }
    }
}
