//! PBW straightening for induced modules over the three kinds of loop
//! algebras: X[m]·(creators)·v is rewritten into ordered monomials of
//! creation operators acting on a base vector.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::cyc::{rat, rat_int, Rat};
use crate::twistalg::{AffineWeight, AlgTag, EBasis, FinRep, GMat};

/// A mode generator E_α ⊗ z^mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen {
    pub mode: i64,
    pub alpha: usize,
}

/// Linear combination of (monomial id, base index).
pub type Vect = BTreeMap<(u32, u32), Rat>;

/// The highest-weight space the module is induced from.
#[derive(Clone, Debug, PartialEq)]
pub enum Base {
    /// One-dimensional: Cartan zero modes act by the weight, everything else
    /// non-negative kills it.
    HighestWeight(AffineWeight),
    /// A finite-dimensional sl_N-module on which zero modes act.
    Rep(FinRep),
}

/// Structure constants of sl_N in the rational basis.
#[derive(Clone, Debug)]
pub struct Structure {
    pub n: u32,
    pub eb: EBasis,
    pub bracket: Vec<Vec<Vec<(usize, Rat)>>>,
    pub trace: Vec<Vec<Rat>>,
}

impl Structure {
    pub fn new(n: u32) -> Self {
        let eb = EBasis::new(n);
        let d = eb.len();
        let mut bracket = vec![vec![Vec::new(); d]; d];
        let mut trace = vec![vec![Rat::zero(); d]; d];
        for a in 0..d {
            for b in 0..d {
                bracket[a][b] = eb.rat_coords(&eb.mats[a].bracket(&eb.mats[b]));
                trace[a][b] = eb.mats[a].mul(&eb.mats[b]).trace().as_rational().expect("rational").clone();
            }
        }
        Structure { n, eb, bracket, trace }
    }

    /// Coordinates of a traceless rational matrix.
    pub fn coords(&self, x: &GMat) -> Vec<(usize, Rat)> {
        self.eb.rat_coords(x)
    }
}

fn rep_matrix(rep: FinRep, x: &GMat) -> GMat {
    match rep {
        FinRep::Trivial => GMat::zero(x.order()),
        FinRep::Fund => x.clone(),
        FinRep::AntiFund => x.transpose().scale(&-crate::exactnum::CycNum::one(x.order())),
    }
}

/// Induced module U(ĝ) ⊗ base, truncated only by what callers request.
#[derive(Clone, Debug)]
pub struct Engine {
    pub st: Structure,
    pub tag: AlgTag,
    pub level: Rat,
    pub base: Base,
    scale: Rat,
    base_dim: usize,
    /// base action of zero modes: per α, sparse columns (target, coeff)
    zero_action: Vec<Vec<Vec<(usize, Rat)>>>,
    monos: Vec<Vec<Gen>>,
    mono_index: HashMap<Vec<Gen>, u32>,
    memo: HashMap<(Gen, u32, u32), Vect>,
}

impl Engine {
    pub fn new(n: u32, tag: AlgTag, level: Rat, base: Base) -> Result<Self> {
        let st = Structure::new(n);
        let scale = match tag {
            AlgTag::Marked => Rat::one(),
            _ => rat(1, n as i64),
        };
        let d = st.eb.len();
        let (base_dim, zero_action) = match &base {
            Base::HighestWeight(mu) => {
                if mu.rank() != n as usize {
                    return Err(Error::InvalidInput("weight rank differs from N".into()));
                }
                let mut za = vec![vec![Vec::new()]; d];
                for (a, act) in za.iter_mut().enumerate() {
                    if st.eb.is_cartan(a) {
                        let (i, _) = st.eb.labels[a];
                        let v = mu.on_h(i, i + 1);
                        if !v.is_zero() {
                            act[0].push((0, v));
                        }
                    }
                }
                (1, za)
            }
            Base::Rep(rep) => {
                let dim = rep.dim(n);
                let mut za = vec![vec![Vec::new(); dim]; d];
                for (a, act) in za.iter_mut().enumerate() {
                    let m = rep_matrix(*rep, &st.eb.mats[a]);
                    for (col, slot) in act.iter_mut().enumerate() {
                        for row in 0..dim {
                            let v = if dim == n as usize {
                                m.get(row, col).as_rational().expect("rational").clone()
                            } else {
                                Rat::zero()
                            };
                            if !v.is_zero() {
                                slot.push((row, v));
                            }
                        }
                    }
                }
                (dim, za)
            }
        };
        let mut e = Engine {
            st,
            tag,
            level,
            base,
            scale,
            base_dim,
            zero_action,
            monos: Vec::new(),
            mono_index: HashMap::new(),
            memo: HashMap::new(),
        };
        e.intern(Vec::new());
        Ok(e)
    }

    pub fn n(&self) -> u32 {
        self.st.n
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Whether E_α ⊗ z^mode lies in the algebra of this site.
    pub fn allowed(&self, alpha: usize, mode: i64) -> bool {
        let c = self.st.eb.charge(alpha) as i64;
        let n = self.n() as i64;
        match self.tag {
            AlgTag::Marked => true,
            AlgTag::Node0 => (c - mode).rem_euclid(n) == 0,
            AlgTag::NodeInf => (c + mode).rem_euclid(n) == 0,
        }
    }

    pub fn intern(&mut self, m: Vec<Gen>) -> u32 {
        if let Some(&i) = self.mono_index.get(&m) {
            return i;
        }
        let i = self.monos.len() as u32;
        self.monos.push(m.clone());
        self.mono_index.insert(m, i);
        i
    }

    pub fn mono_lookup(&self, m: &[Gen]) -> Option<u32> {
        self.mono_index.get(m).copied()
    }

    pub fn mono(&self, id: u32) -> &[Gen] {
        &self.monos[id as usize]
    }

    pub fn mono_degree(&self, id: u32) -> i64 {
        self.monos[id as usize].iter().map(|g| -g.mode).sum()
    }

    /// Creation generators of a given depth, in PBW order.
    pub fn creators(&self, depth: i64) -> Vec<Gen> {
        (0..self.st.eb.len()).filter(|&a| self.allowed(a, -depth)).map(|alpha| Gen { mode: -depth, alpha }).collect()
    }

    /// PBW basis of degree d: ordered monomials (mode ascending) times base vectors.
    pub fn basis(&mut self, d: usize) -> Vec<(u32, u32)> {
        let mut gens: Vec<Gen> = Vec::new();
        for depth in 1..=d as i64 {
            gens.extend(self.creators(depth));
        }
        gens.sort();
        let mut monos = Vec::new();
        let mut cur = Vec::new();
        fn rec(gens: &[Gen], start: usize, left: i64, cur: &mut Vec<Gen>, out: &mut Vec<Vec<Gen>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..gens.len() {
                let g = gens[i];
                if -g.mode > left {
                    continue;
                }
                cur.push(g);
                rec(gens, i, left + g.mode, cur, out);
                cur.pop();
            }
        }
        rec(&gens, 0, d as i64, &mut cur, &mut monos);
        let mut out = Vec::new();
        for m in monos {
            let id = self.intern(m);
            for v in 0..self.base_dim as u32 {
                out.push((id, v));
            }
        }
        out
    }

    fn add_into(acc: &mut Vect, key: (u32, u32), c: &Rat) {
        if c.is_zero() {
            return;
        }
        let e = acc.entry(key).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            acc.remove(&key);
        }
    }

    /// E_α[mode] applied to a vector.
    pub fn apply_vec(&mut self, g: Gen, v: &Vect) -> Result<Vect> {
        let mut out = Vect::new();
        for (&(m, b), c) in v {
            let r = self.apply(g, m, b)?;
            for (k, x) in r {
                Self::add_into(&mut out, k, &(x * c));
            }
        }
        Ok(out)
    }

    /// E_α[mode] applied to one basis monomial.
    pub fn apply(&mut self, g: Gen, m: u32, b: u32) -> Result<Vect> {
        if !self.allowed(g.alpha, g.mode) {
            return Err(Error::InvalidInput(format!(
                "generator {:?}[{}] is not in the algebra at this site",
                self.st.eb.labels[g.alpha], g.mode
            )));
        }
        if self.mono_degree(m) < g.mode {
            return Ok(Vect::new());
        }
        if let Some(r) = self.memo.get(&(g, m, b)) {
            return Ok(r.clone());
        }
        let r = self.apply_raw(g, m, b)?;
        self.memo.insert((g, m, b), r.clone());
        Ok(r)
    }

    fn apply_raw(&mut self, g: Gen, m: u32, b: u32) -> Result<Vect> {
        let mono = self.monos[m as usize].clone();
        let mut out = Vect::new();
        if mono.is_empty() {
            if g.mode < 0 {
                let id = self.intern(vec![g]);
                out.insert((id, b), Rat::one());
            } else if g.mode == 0 {
                let col = &self.zero_action[g.alpha][b as usize];
                if matches!(self.base, Base::HighestWeight(_)) && !self.st.eb.is_cartan(g.alpha) {
                    return Err(Error::Internal("non-Cartan zero mode on a highest-weight base".into()));
                }
                for (row, c) in col {
                    out.insert((m, *row as u32), c.clone());
                }
            }
            return Ok(out);
        }
        let g1 = mono[0];
        if g.mode < 0 && g <= g1 {
            let mut nm = Vec::with_capacity(mono.len() + 1);
            nm.push(g);
            nm.extend_from_slice(&mono);
            let id = self.intern(nm);
            out.insert((id, b), Rat::one());
            return Ok(out);
        }
        let rest = self.intern(mono[1..].to_vec());
        // g·g1·rest = g1·(g·rest) + [g, g1]·rest
        let inner = self.apply(g, rest, b)?;
        let moved = self.apply_vec(g1, &inner)?;
        for (k, c) in moved {
            Self::add_into(&mut out, k, &c);
        }
        let mode = g.mode + g1.mode;
        let br = self.st.bracket[g.alpha][g1.alpha].clone();
        for (gamma, c) in br {
            let r = self.apply(Gen { mode, alpha: gamma }, rest, b)?;
            for (k, x) in r {
                Self::add_into(&mut out, k, &(x * &c));
            }
        }
        if mode == 0 && g.mode != 0 {
            let c = rat_int(g.mode) * &self.st.trace[g.alpha][g1.alpha] * &self.scale * &self.level;
            Self::add_into(&mut out, (rest, b), &c);
        }
        Ok(out)
    }

    /// Weight of a basis vector: base weight plus the roots of the creators.
    pub fn weight(&self, m: u32, b: u32) -> Vec<Rat> {
        let n = self.n() as usize;
        let mut w: Vec<Rat> = match &self.base {
            Base::HighestWeight(mu) => mu.vals.clone(),
            Base::Rep(r) => r.weight(self.n(), b as usize),
        };
        for g in self.mono(m) {
            for (i, r) in self.st.eb.root(g.alpha).into_iter().enumerate().take(n) {
                w[i] += rat_int(r);
            }
        }
        w
    }

    /// Adγ-charge of a basis vector modulo N.
    pub fn charge(&self, m: u32, b: u32) -> usize {
        let n = self.n() as i64;
        let base = match &self.base {
            Base::HighestWeight(_) => 0,
            Base::Rep(FinRep::Fund) => -(b as i64),
            Base::Rep(FinRep::AntiFund) => b as i64,
            Base::Rep(FinRep::Trivial) => 0,
        };
        let c: i64 = self.mono(m).iter().map(|g| self.st.eb.charge(g.alpha) as i64).sum();
        (c + base).rem_euclid(n) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twistalg::FinRep;

    fn bracket_consistency(e: &mut Engine, d: usize) {
        let basis: Vec<(u32, u32)> = (0..=d).flat_map(|k| e.basis(k)).collect();
        let nal = e.st.eb.len();
        let mut gens = Vec::new();
        for mode in -2..=2i64 {
            for alpha in 0..nal {
                if e.allowed(alpha, mode) {
                    gens.push(Gen { mode, alpha });
                }
            }
        }
        for (i, &x) in gens.iter().enumerate() {
            for &y in gens.iter().skip(i) {
                for &(m, b) in basis.iter().take(12) {
                    let v: Vect = [((m, b), Rat::one())].into_iter().collect();
                    let yv = e.apply_vec(y, &v).unwrap();
                    let xy = e.apply_vec(x, &yv).unwrap();
                    let xv = e.apply_vec(x, &v).unwrap();
                    let yx = e.apply_vec(y, &xv).unwrap();
                    let mut lhs = xy;
                    for (k, c) in yx {
                        Engine::add_into(&mut lhs, k, &-c);
                    }
                    let mut rhs = Vect::new();
                    for (gamma, c) in e.st.bracket[x.alpha][y.alpha].clone() {
                        let r = e.apply_vec(Gen { mode: x.mode + y.mode, alpha: gamma }, &v).unwrap();
                        for (k, z) in r {
                            Engine::add_into(&mut rhs, k, &(z * &c));
                        }
                    }
                    if x.mode + y.mode == 0 {
                        let c = rat_int(x.mode) * &e.st.trace[x.alpha][y.alpha] * &e.scale * &e.level;
                        Engine::add_into(&mut rhs, (m, b), &c);
                    }
                    assert_eq!(lhs, rhs, "{x:?} {y:?} on {m},{b}");
                }
            }
        }
    }

    #[test]
    fn representation_property_all_kinds() {
        let k = rat_int(1);
        let mu = AffineWeight::from_h_values(k.clone(), &[rat(-1, 2)]);
        let mut e0 = Engine::new(2, AlgTag::Node0, k.clone(), Base::HighestWeight(mu.clone())).unwrap();
        bracket_consistency(&mut e0, 2);
        let mut ei = Engine::new(2, AlgTag::NodeInf, k.clone(), Base::HighestWeight(mu)).unwrap();
        bracket_consistency(&mut ei, 2);
        let mut w = Engine::new(2, AlgTag::Marked, k.clone(), Base::Rep(FinRep::Fund)).unwrap();
        bracket_consistency(&mut w, 1);
        let mut w3 = Engine::new(3, AlgTag::Marked, k, Base::Rep(FinRep::AntiFund)).unwrap();
        bracket_consistency(&mut w3, 1);
    }

    #[test]
    fn pbw_dimensions() {
        let k = rat_int(1);
        let mut w = Engine::new(2, AlgTag::Marked, k.clone(), Base::Rep(FinRep::Trivial)).unwrap();
        assert_eq!(w.basis(0).len(), 1);
        assert_eq!(w.basis(1).len(), 3);
        // 3-coloured partitions of 2: 3 + 6
        assert_eq!(w.basis(2).len(), 9);
        let mut v = Engine::new(2, AlgTag::Marked, k.clone(), Base::Rep(FinRep::Fund)).unwrap();
        assert_eq!(v.basis(0).len(), 2);
        let mut t = Engine::new(2, AlgTag::Node0, k.clone(), Base::HighestWeight(AffineWeight::zero(2, k))).unwrap();
        assert_eq!(t.basis(1).len(), 2);
        assert_eq!(t.basis(2).len(), 4);
    }
}
