//! Weights of the twisted affine algebras, the λ ↦ (λ̃, λ̃′) map and
//! dominance.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::loops::coroot_pair;
use crate::error::{Error, Result};
use crate::exactnum::cyc::{rat_int, Rat};

/// Which orbifold point a weight is read at; the coroots differ by sign
/// in their Cartan part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Zero,
    Infinity,
}

/// A level-k weight: eigenvalues of E_ii on the highest-weight vector,
/// normalized to sum to zero (only traceless H are evaluated).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineWeight {
    pub level: Rat,
    pub vals: Vec<Rat>,
}

fn normalized(mut v: Vec<Rat>) -> Vec<Rat> {
    let n = v.len() as i64;
    let mean = v.iter().fold(Rat::zero(), |a, b| a + b) / rat_int(n);
    for x in v.iter_mut() {
        *x -= &mean;
    }
    v
}

impl AffineWeight {
    pub fn new(level: Rat, vals: Vec<Rat>) -> Self {
        AffineWeight { level, vals: normalized(vals) }
    }

    pub fn zero(n: u32, level: Rat) -> Self {
        AffineWeight { level, vals: vec![Rat::zero(); n as usize] }
    }

    /// The weight whose values on H_{i,i+1}, i = 1..N−1, are given.
    pub fn from_h_values(level: Rat, h: &[Rat]) -> Self {
        let mut v = vec![Rat::zero()];
        for x in h {
            let last = v.last().unwrap().clone();
            v.push(last - x);
        }
        Self::new(level, v)
    }

    pub fn rank(&self) -> usize {
        self.vals.len()
    }

    /// μ evaluated on diag(d).
    pub fn eval_diag(&self, d: &[Rat]) -> Rat {
        self.vals.iter().zip(d).fold(Rat::zero(), |a, (x, y)| a + x * y)
    }

    /// μ(E_pp − E_qq).
    pub fn on_h(&self, p: usize, q: usize) -> Rat {
        &self.vals[p] - &self.vals[q]
    }

    /// ⟨μ, α_i^∨⟩ through the identification of the given side:
    /// μ(H_{i,i+1}) + k/N at 0 and −μ(H_{i,i+1}) + k/N at ∞ (i = 0 uses H_{N,1}).
    pub fn coroot_pairing(&self, side: Side, i: usize) -> Result<Rat> {
        let n = self.rank() as u32;
        let (p, q) = coroot_pair(n, i)?;
        let h = self.on_h(p, q);
        let shift = &self.level / rat_int(n as i64);
        Ok(match side {
            Side::Zero => h + shift,
            Side::Infinity => -h + shift,
        })
    }

    pub fn coroot_pairings(&self, side: Side) -> Result<Vec<Rat>> {
        (0..self.rank()).map(|i| self.coroot_pairing(side, i)).collect()
    }

    /// μ ∘ Adβ, where Adβ diag(d_1, …, d_N) = diag(d_2, …, d_N, d_1).
    pub fn compose_ad_beta(&self) -> AffineWeight {
        let n = self.rank();
        let vals = (0..n).map(|i| self.vals[(i + n - 1) % n].clone()).collect();
        AffineWeight { level: self.level.clone(), vals }
    }

    pub fn neg(&self) -> AffineWeight {
        AffineWeight { level: self.level.clone(), vals: self.vals.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, o: &AffineWeight) -> AffineWeight {
        AffineWeight { level: self.level.clone(), vals: self.vals.iter().zip(&o.vals).map(|(a, b)| a + b).collect() }
    }

    /// Weight paired with this one by the node pairing: a weight ν at 0
    /// pairs with −μ at ∞ where ν = μ∘Adβ.
    pub fn pairing_partner(&self, side: Side) -> AffineWeight {
        let n = self.rank();
        let vals = match side {
            // ν[i] = μ[i-1]  ⇒  −μ[i] = −ν[i+1]
            Side::Zero => (0..n).map(|i| -&self.vals[(i + 1) % n]).collect(),
            Side::Infinity => (0..n).map(|i| -&self.vals[(i + n - 1) % n]).collect(),
        };
        AffineWeight { level: self.level.clone(), vals }
    }
}

pub fn is_dominant_integral(mu: &AffineWeight, side: Side) -> Result<bool> {
    for c in mu.coroot_pairings(side)? {
        if !c.is_integer() || c.is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves (1 − A)K = H on traceless diagonals, where A is Adβ^{-1}
/// (`inverse = true`) or Adβ; returns a representative K (defined up to scalars).
fn cyclic_resolvent(h: &[Rat], inverse: bool) -> Vec<Rat> {
    let n = h.len();
    let mut k = vec![Rat::zero(); n];
    if inverse {
        // K[i] − K[i−1] = H[i]
        for i in 1..n {
            k[i] = &k[i - 1] + &h[i];
        }
    } else {
        // K[i] − K[i+1] = H[i]
        for i in (0..n - 1).rev() {
            k[i] = &k[i + 1] + &h[i];
        }
    }
    k
}

/// A functional on traceless diagonals, returned in the normalized value form.
fn functional_to_weight(level: &Rat, n: usize, f: impl Fn(&[Rat]) -> Rat) -> AffineWeight {
    let vals = (0..n)
        .map(|i| {
            let mut d = vec![-Rat::one() / rat_int(n as i64); n];
            d[i] += Rat::one();
            f(&d)
        })
        .collect();
    AffineWeight { level: level.clone(), vals }
}

/// λ̃ = −λ∘(1 − Adβ^{-1})^{-1} and λ̃′ = −λ∘(1 − Adβ)^{-1}, both at level k.
///
/// The alternative expression λ̃ = λ∘(1 − Adβ)^{-1}∘Adβ is evaluated as
/// well and must agree.
pub fn weight_tilde(lambda: &AffineWeight, level: &Rat) -> Result<(AffineWeight, AffineWeight)> {
    let n = lambda.rank();
    let lt = functional_to_weight(level, n, |h| -lambda.eval_diag(&cyclic_resolvent(h, true)));
    let lt2 = functional_to_weight(level, n, |h| {
        let shifted: Vec<Rat> = (0..n).map(|i| h[(i + 1) % n].clone()).collect();
        lambda.eval_diag(&cyclic_resolvent(&shifted, false))
    });
    if lt != lt2 {
        return Err(Error::Internal("the two expressions for λ̃ disagree".into()));
    }
    let ltp = functional_to_weight(level, n, |h| -lambda.eval_diag(&cyclic_resolvent(h, false)));
    Ok((lt, ltp))
}

/// Weights of the standard finite-dimensional representations used as V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinRep {
    Trivial,
    Fund,
    AntiFund,
}

impl FinRep {
    pub fn dim(&self, n: u32) -> usize {
        match self {
            FinRep::Trivial => 1,
            _ => n as usize,
        }
    }

    /// Weight of the i-th standard basis vector.
    pub fn weight(&self, n: u32, i: usize) -> Vec<Rat> {
        let nn = n as usize;
        let mut v = vec![Rat::zero(); nn];
        match self {
            FinRep::Trivial => {}
            FinRep::Fund => v[i] = Rat::one(),
            FinRep::AntiFund => v[i] = -Rat::one(),
        }
        normalized(v)
    }

    /// The set of weights (without multiplicity) at level k.
    pub fn weights(&self, n: u32, level: &Rat) -> Vec<AffineWeight> {
        let mut out: Vec<AffineWeight> = Vec::new();
        for i in 0..self.dim(n) {
            let w = AffineWeight { level: level.clone(), vals: self.weight(n, i) };
            if !out.contains(&w) {
                out.push(w);
            }
        }
        out
    }

    pub fn parse(s: &str) -> Result<FinRep> {
        match s {
            "trivial" | "triv" | "1" => Ok(FinRep::Trivial),
            "fund" | "fundamental" => Ok(FinRep::Fund),
            "antifund" | "dual" => Ok(FinRep::AntiFund),
            _ => Err(Error::InvalidInput(format!("unknown representation '{s}'"))),
        }
    }
}

/// Weights of V_1 ⊗ … ⊗ V_L, without multiplicity.
pub fn tensor_weights(n: u32, reps: &[FinRep], level: &Rat) -> Vec<AffineWeight> {
    let mut acc = vec![AffineWeight::zero(n, level.clone())];
    for r in reps {
        let mut next: Vec<AffineWeight> = Vec::new();
        for a in &acc {
            for w in r.weights(n, level) {
                let s = a.add(&w);
                if !next.contains(&s) {
                    next.push(s);
                }
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::cyc::rat;

    #[test]
    fn zero_maps_to_zero() {
        let z = AffineWeight::zero(3, rat_int(1));
        let (a, b) = weight_tilde(&z, &rat_int(1)).unwrap();
        assert_eq!(a, z);
        assert_eq!(b, z);
        assert!(is_dominant_integral(&AffineWeight::zero(2, rat_int(0)), Side::Zero).unwrap());
    }

    #[test]
    fn sl2_fundamental_weight() {
        let k = rat_int(1);
        let lam = AffineWeight::from_h_values(k.clone(), &[rat_int(1)]);
        let (lt, ltp) = weight_tilde(&lam, &k).unwrap();
        assert_eq!(lt.on_h(0, 1), rat(-1, 2));
        assert_eq!(ltp.on_h(0, 1), rat(-1, 2));
        assert_eq!(lt.coroot_pairings(Side::Zero).unwrap(), vec![rat_int(1), rat_int(0)]);
        assert!(is_dominant_integral(&lt, Side::Zero).unwrap());
        assert!(is_dominant_integral(&ltp, Side::Infinity).unwrap());
        let bad = AffineWeight::from_h_values(k, &[rat(3, 2)]);
        assert_eq!(bad.coroot_pairing(Side::Zero, 1).unwrap(), rat_int(2));
        assert_eq!(bad.coroot_pairing(Side::Zero, 0).unwrap(), rat_int(-1));
        assert!(!is_dominant_integral(&bad, Side::Zero).unwrap());
    }

    #[test]
    fn tilde_weights_are_partners_and_sum_to_minus_lambda() {
        for n in 2..=4u32 {
            let k = rat_int(2);
            for i in 0..n as usize {
                let lam = AffineWeight { level: k.clone(), vals: FinRep::Fund.weight(n, i) };
                let (lt, ltp) = weight_tilde(&lam, &k).unwrap();
                assert_eq!(lt.add(&ltp), lam.neg());
                assert_eq!(lt.pairing_partner(Side::Zero), ltp);
                assert_eq!(ltp.pairing_partner(Side::Infinity), lt);
            }
        }
    }

    #[test]
    fn level_sums_to_k() {
        let k = rat_int(3);
        let mu = AffineWeight::from_h_values(k.clone(), &[rat(1, 3), rat(-2, 5)]);
        for side in [Side::Zero, Side::Infinity] {
            let s = mu.coroot_pairings(side).unwrap().into_iter().fold(Rat::zero(), |a, b| a + b);
            assert_eq!(s, k);
        }
    }
}
