//! Finite elements of the (twisted) loop algebras with their central
//! extensions, and the identifications of the twisted node algebras with
//! the affine algebra of type A_{N-1}^{(1)}.

use std::collections::BTreeMap;

use super::mat::{inner, make_twist_pair, GMat};
use crate::error::{Error, Result};
use crate::exactnum::cyc::rat;
use crate::exactnum::CycNum;

/// Which central extension an element lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgTag {
    /// ĝ^(0): X⊗t^n at the orbifold point t = 0.
    Node0,
    /// ĝ^(∞): X⊗s^n at t = ∞, s = 1/t.
    NodeInf,
    /// Untwisted ĝ at a marked point.
    Marked,
}

impl AlgTag {
    /// Scale of the cocycle: 1/N at the orbifold points, 1 at marked points.
    pub fn cocycle_scale(&self, n: u32) -> CycNum {
        match self {
            AlgTag::Marked => CycNum::one(n),
            _ => CycNum::from_rat(n, rat(1, n as i64)),
        }
    }

    /// Whether X⊗z^power is an element of the algebra (z the local coordinate).
    pub fn allows(&self, x: &GMat, power: i64) -> Result<bool> {
        let n = x.order();
        let (_, gamma) = make_twist_pair(n)?;
        let sign = match self {
            AlgTag::Marked => return Ok(true),
            AlgTag::Node0 => 1,
            AlgTag::NodeInf => -1,
        };
        let adg = super::mat::ad(&gamma, x)?;
        Ok(adg == x.scale(&CycNum::eps_pow(n, sign * power)))
    }
}

/// Σ X_n ⊗ z^n + c·k̂.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopElement {
    pub n: u32,
    pub tag: AlgTag,
    pub terms: BTreeMap<i64, GMat>,
    pub central: CycNum,
}

impl LoopElement {
    pub fn zero(n: u32, tag: AlgTag) -> Self {
        LoopElement { n, tag, terms: BTreeMap::new(), central: CycNum::zero(n) }
    }

    pub fn k_hat(n: u32, tag: AlgTag) -> Self {
        LoopElement { central: CycNum::one(n), ..Self::zero(n, tag) }
    }

    /// X⊗z^power, checked against the grading of the tagged algebra.
    pub fn mono(tag: AlgTag, x: GMat, power: i64) -> Result<Self> {
        if !tag.allows(&x, power)? {
            return Err(Error::InvalidInput(format!("{x:?}⊗z^{power} violates the grading of {tag:?}")));
        }
        let n = x.order();
        let mut e = Self::zero(n, tag);
        if !x.is_zero() {
            e.terms.insert(power, x);
        }
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.central.is_zero() && self.terms.values().all(GMat::is_zero)
    }

    fn same_tag(&self, o: &LoopElement) -> Result<()> {
        if self.tag != o.tag {
            return Err(Error::TagMismatch(format!("{:?} vs {:?}", self.tag, o.tag)));
        }
        Ok(())
    }

    pub fn add(&self, o: &LoopElement) -> Result<LoopElement> {
        self.same_tag(o)?;
        let mut out = self.clone();
        for (p, x) in &o.terms {
            let v = match out.terms.get(p) {
                Some(y) => y.add(x),
                None => x.clone(),
            };
            out.terms.insert(*p, v);
        }
        out.central += &o.central;
        out.terms.retain(|_, x| !x.is_zero());
        Ok(out)
    }

    pub fn scale(&self, c: &CycNum) -> LoopElement {
        let mut out = self.clone();
        for x in out.terms.values_mut() {
            *x = x.scale(c);
        }
        out.central = &out.central * c;
        out.terms.retain(|_, x| !x.is_zero());
        out
    }

    pub fn sub(&self, o: &LoopElement) -> Result<LoopElement> {
        self.add(&o.scale(&-CycNum::one(self.n)))
    }
}

/// The cocycle (scale)·Res_{z=0}(dA|B); scale is 1/N at the orbifold points.
pub fn cocycle(a: &LoopElement, b: &LoopElement) -> Result<CycNum> {
    a.same_tag(b)?;
    let mut acc = CycNum::zero(a.n);
    for (m, x) in &a.terms {
        if let Some(y) = b.terms.get(&-m) {
            acc += &inner(x, y).scale(&rat(*m, 1));
        }
    }
    Ok(&acc * &a.tag.cocycle_scale(a.n))
}

/// [A, B] = Σ [X,Y]⊗z^{m+n} + cocycle·k̂.
pub fn bracket(a: &LoopElement, b: &LoopElement) -> Result<LoopElement> {
    a.same_tag(b)?;
    let mut out = LoopElement::zero(a.n, a.tag);
    for (m, x) in &a.terms {
        for (p, y) in &b.terms {
            let br = x.bracket(y);
            if br.is_zero() {
                continue;
            }
            let key = m + p;
            let v = match out.terms.get(&key) {
                Some(z) => z.add(&br),
                None => br,
            };
            out.terms.insert(key, v);
        }
    }
    out.terms.retain(|_, x| !x.is_zero());
    out.central = cocycle(a, b)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChevKind {
    E,
    F,
    Coroot,
}

/// (i, i+1) for i = 1..N−1 and the affine pair (N, 1) for i = 0, 0-based.
fn simple_pair(n: u32, i: usize) -> Result<(usize, usize)> {
    let nn = n as usize;
    if i >= nn {
        return Err(Error::InvalidInput(format!("Chevalley index {i} out of range 0..{nn}")));
    }
    Ok(if i == 0 { (nn - 1, 0) } else { (i - 1, i) })
}

/// Preimage under φ₀ of e_i, f_i or α_i^∨ in ĝ^(0).
pub fn phi0(n: u32, i: usize, kind: ChevKind) -> Result<LoopElement> {
    let (p, q) = simple_pair(n, i)?;
    let tag = AlgTag::Node0;
    match kind {
        ChevKind::E => LoopElement::mono(tag, GMat::unit(n, p, q), 1),
        ChevKind::F => LoopElement::mono(tag, GMat::unit(n, q, p), -1),
        ChevKind::Coroot => {
            let h = GMat::unit(n, p, p).sub(&GMat::unit(n, q, q));
            let mut e = LoopElement::mono(tag, h, 0)?;
            e.central = CycNum::from_rat(n, rat(1, n as i64));
            Ok(e)
        }
    }
}

/// Preimage under φ∞ of e_i, f_i or α_i^∨ in ĝ^(∞) (powers of s = 1/t).
pub fn phiinf(n: u32, i: usize, kind: ChevKind) -> Result<LoopElement> {
    let (p, q) = simple_pair(n, i)?;
    let tag = AlgTag::NodeInf;
    let minus = -CycNum::one(n);
    match kind {
        ChevKind::E => Ok(LoopElement::mono(tag, GMat::unit(n, q, p), 1)?.scale(&minus)),
        ChevKind::F => Ok(LoopElement::mono(tag, GMat::unit(n, p, q), -1)?.scale(&minus)),
        ChevKind::Coroot => {
            let h = GMat::unit(n, q, q).sub(&GMat::unit(n, p, p));
            let mut e = LoopElement::mono(tag, h, 0)?;
            e.central = CycNum::from_rat(n, rat(1, n as i64));
            Ok(e)
        }
    }
}

/// Generalized Cartan matrix of A_{N-1}^{(1)} (N ≥ 3), or [[2,-2],[-2,2]] for N = 2.
pub fn affine_cartan(n: u32) -> Vec<Vec<i64>> {
    let nn = n as usize;
    let mut a = vec![vec![0i64; nn]; nn];
    for i in 0..nn {
        a[i][i] = 2;
        a[i][(i + 1) % nn] -= 1;
        a[i][(i + nn - 1) % nn] -= 1;
    }
    a
}

/// One failed relation, if any, among [e_i, f_j] = δ_ij α_i^∨ and
/// [α_i^∨, e_j] = a_ij e_j, [α_i^∨, f_j] = −a_ij f_j.
pub fn check_chevalley(n: u32, inf: bool) -> Result<Vec<String>> {
    let phi = if inf { phiinf } else { phi0 };
    let a = affine_cartan(n);
    let nn = n as usize;
    let mut failures = Vec::new();
    for i in 0..nn {
        for j in 0..nn {
            let ef = bracket(&phi(n, i, ChevKind::E)?, &phi(n, j, ChevKind::F)?)?;
            let expect = if i == j { phi(n, i, ChevKind::Coroot)? } else { LoopElement::zero(n, ef.tag) };
            if ef != expect {
                failures.push(format!("[e_{i}, f_{j}]"));
            }
            let c = CycNum::from_int(n, a[i][j]);
            let he = bracket(&phi(n, i, ChevKind::Coroot)?, &phi(n, j, ChevKind::E)?)?;
            if he != phi(n, j, ChevKind::E)?.scale(&c) {
                failures.push(format!("[h_{i}, e_{j}]"));
            }
            let hf = bracket(&phi(n, i, ChevKind::Coroot)?, &phi(n, j, ChevKind::F)?)?;
            if hf != phi(n, j, ChevKind::F)?.scale(&-c) {
                failures.push(format!("[h_{i}, f_{j}]"));
            }
        }
    }
    Ok(failures)
}

/// The 0-based (p, q) of the pair defining α_i^∨, with the affine i = 0 closing the cycle.
pub fn coroot_pair(n: u32, i: usize) -> Result<(usize, usize)> {
    simple_pair(n, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twistalg::mat::j_basis;

    #[test]
    fn chevalley_relations_hold_at_both_nodes() {
        for n in 2..=4 {
            assert!(check_chevalley(n, false).unwrap().is_empty(), "N={n} node 0");
            assert!(check_chevalley(n, true).unwrap().is_empty(), "N={n} node inf");
        }
    }

    #[test]
    fn named_images() {
        let e0 = phi0(3, 0, ChevKind::E).unwrap();
        assert_eq!(e0.terms.get(&1), Some(&GMat::unit(3, 2, 0)));
        let e1 = phiinf(3, 1, ChevKind::E).unwrap();
        assert_eq!(e1.terms.get(&1), Some(&GMat::unit(3, 1, 0).scale(&-CycNum::one(3))));
    }

    #[test]
    fn cocycle_examples() {
        let n = 3;
        let x = j_basis(n, 1, 2);
        let y = j_basis(n, 2, 1);
        let a = LoopElement::mono(AlgTag::Node0, x.clone(), 4).unwrap();
        let b = LoopElement::mono(AlgTag::Node0, y.clone(), -4).unwrap();
        let c = cocycle(&a, &b).unwrap();
        assert_eq!(c, inner(&x, &y).scale(&rat(4, 3)));
        assert_eq!(&c + &cocycle(&b, &a).unwrap(), CycNum::zero(n));
        let h = LoopElement::mono(AlgTag::Node0, j_basis(n, 0, 1), 0).unwrap();
        let z = LoopElement::mono(AlgTag::Node0, j_basis(n, 0, 2), 3).unwrap();
        assert!(cocycle(&h, &z).unwrap().is_zero());
        let m = LoopElement::mono(AlgTag::Marked, x, 1).unwrap();
        assert!(matches!(cocycle(&a, &m), Err(Error::TagMismatch(_))));
    }

    #[test]
    fn grading_is_enforced() {
        assert!(LoopElement::mono(AlgTag::Node0, j_basis(3, 1, 0), 2).is_err());
        assert!(LoopElement::mono(AlgTag::NodeInf, j_basis(3, 1, 0), 2).is_ok());
        assert!(AlgTag::Node0.allows(&j_basis(3, 1, 1), 4).unwrap());
        assert!(!AlgTag::NodeInf.allows(&j_basis(3, 1, 1), 4).unwrap());
    }

    #[test]
    fn central_element_is_central() {
        let k = LoopElement::k_hat(2, AlgTag::Node0);
        let x = LoopElement::mono(AlgTag::Node0, j_basis(2, 1, 1), 3).unwrap();
        assert!(bracket(&k, &x).unwrap().is_zero());
    }
}
