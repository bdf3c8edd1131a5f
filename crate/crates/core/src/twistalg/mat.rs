//! Square matrices over Q(ε), the twist pair (β, γ) and the J_ab basis of sl_N.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::cyc::{rat, Rat};
use crate::exactnum::CycNum;

/// An N×N matrix over Q(ε_N), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GMat {
    n: u32,
    e: Vec<CycNum>,
}

impl fmt::Debug for GMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n as usize;
        write!(f, "[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.e[i * n + j])?;
            }
        }
        write!(f, "]")
    }
}

impl GMat {
    pub fn zero(n: u32) -> Self {
        GMat { n, e: vec![CycNum::zero(n); (n * n) as usize] }
    }

    pub fn identity(n: u32) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n as usize {
            m.set(i, i, CycNum::one(n));
        }
        m
    }

    /// Matrix unit E_ij, 0-based indices.
    pub fn unit(n: u32, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.set(i, j, CycNum::one(n));
        m
    }

    pub fn diag(d: &[CycNum]) -> Self {
        let n = d.len() as u32;
        let mut m = Self::zero(n);
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_rows(n: u32, rows: &[Vec<CycNum>]) -> Self {
        let mut m = Self::zero(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> usize {
        self.n as usize
    }

    pub fn get(&self, i: usize, j: usize) -> &CycNum {
        &self.e[i * self.size() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycNum) {
        let n = self.size();
        self.e[i * n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(CycNum::is_zero)
    }

    pub fn add(&self, o: &GMat) -> GMat {
        GMat { n: self.n, e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &GMat) -> GMat {
        GMat { n: self.n, e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &CycNum) -> GMat {
        GMat { n: self.n, e: self.e.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &GMat) -> GMat {
        let n = self.size();
        let mut out = GMat::zero(self.n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.e[i * n + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, o: &GMat) -> GMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> CycNum {
        let mut t = CycNum::zero(self.n);
        for i in 0..self.size() {
            t += self.get(i, i);
        }
        t
    }

    pub fn transpose(&self) -> GMat {
        let n = self.size();
        let mut out = GMat::zero(self.n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<GMat> {
        let n = self.size();
        let mut a = self.clone();
        let mut inv = GMat::identity(self.n);
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or_else(|| Error::InvalidInput("singular matrix".into()))?;
            if piv != col {
                for j in 0..n {
                    a.e.swap(piv * n + j, col * n + j);
                    inv.e.swap(piv * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).inv()?;
            for j in 0..n {
                a.e[col * n + j] = &a.e[col * n + j] * &p;
                inv.e[col * n + j] = &inv.e[col * n + j] * &p;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..n {
                    let s = &a.e[col * n + j] * &f;
                    a.e[r * n + j] -= &s;
                    let s = &inv.e[col * n + j] * &f;
                    inv.e[r * n + j] -= &s;
                }
            }
        }
        Ok(inv)
    }

    pub fn pow(&self, e: i64) -> Result<GMat> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = GMat::identity(self.n);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// True when every entry is rational.
    pub fn is_rational(&self) -> bool {
        self.e.iter().all(|v| v.as_rational().is_some())
    }
}

/// Index set Z/N reduced to 0..N-1.
pub fn modn(x: i64, n: u32) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// (β, γ): β the cyclic shift Σ E_{i,i+1}, γ = diag(1, ε^{-1}, …, ε^{1-N}).
pub fn make_twist_pair(n: u32) -> Result<(GMat, GMat)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("twist pair needs N >= 2, got {n}")));
    }
    let nn = n as usize;
    let mut beta = GMat::zero(n);
    for i in 0..nn {
        beta.set(i, (i + 1) % nn, CycNum::one(n));
    }
    let gamma = GMat::diag(&(0..nn).map(|i| CycNum::eps_pow(n, -(i as i64))).collect::<Vec<_>>());
    Ok((beta, gamma))
}

/// J_ab = β^a γ^{-b}; entries ε^{(i+a)b} at (i, i+a) with 0-based i.
pub fn j_basis(n: u32, a: i64, b: i64) -> GMat {
    let nn = n as usize;
    let mut m = GMat::zero(n);
    for i in 0..nn {
        let col = modn(i as i64 + a, n);
        m.set(i, col, CycNum::eps_pow(n, col as i64 * b));
    }
    m
}

/// All (a, b) ≠ (0, 0) with 0 ≤ a, b < N in lexicographic order.
pub fn j_indices(n: u32) -> Vec<(usize, usize)> {
    let nn = n as usize;
    (0..nn).flat_map(|a| (0..nn).map(move |b| (a, b))).filter(|&p| p != (0, 0)).collect()
}

/// g X g^{-1}
pub fn ad(g: &GMat, x: &GMat) -> Result<GMat> {
    Ok(g.mul(x).mul(&g.inverse()?))
}

/// The trace form (A|B) = tr(AB).
pub fn inner(a: &GMat, b: &GMat) -> CycNum {
    let n = a.size();
    let mut t = CycNum::zero(a.order());
    for i in 0..n {
        for k in 0..n {
            let x = a.get(i, k);
            let y = b.get(k, i);
            if !x.is_zero() && !y.is_zero() {
                t += &(x * y);
            }
        }
    }
    t
}

/// tr(J_ab J_{-a,-b}) = N ε^{ab}.
pub fn j_norm(n: u32, a: i64, b: i64) -> CycNum {
    CycNum::eps_pow(n, a * b).scale(&rat(n as i64, 1))
}

/// J^{ab}: the element dual to J_ab under the trace form, J_{-a,-b}/tr(J_ab J_{-a,-b}).
pub fn dual_j(n: u32, a: i64, b: i64) -> GMat {
    let c = j_norm(n, a, b).inv().expect("trace form is nondegenerate");
    j_basis(n, -a, -b).scale(&c)
}

/// Coordinates of a traceless X in the J basis: X = Σ c_ab J_ab.
pub fn j_coords(x: &GMat) -> Vec<((usize, usize), CycNum)> {
    let n = x.order();
    j_indices(n)
        .into_iter()
        .map(|(a, b)| ((a, b), inner(x, &dual_j(n, a as i64, b as i64))))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// Σ c_ab J_ab
pub fn from_j_coords(n: u32, coords: &[((usize, usize), CycNum)]) -> GMat {
    let mut m = GMat::zero(n);
    for ((a, b), c) in coords {
        m = m.add(&j_basis(n, *a as i64, *b as i64).scale(c));
    }
    m
}

/// The rational basis of sl_N used for mode generators: off-diagonal units
/// E_ij (i ≠ j) in row-major order, then H_i = E_ii − E_{i+1,i+1}.
#[derive(Clone, Debug)]
pub struct EBasis {
    pub n: u32,
    pub mats: Vec<GMat>,
    /// (i, j) for E_ij, or (i, i) for H_i, 0-based.
    pub labels: Vec<(usize, usize)>,
}

impl EBasis {
    pub fn new(n: u32) -> Self {
        let nn = n as usize;
        let mut mats = Vec::new();
        let mut labels = Vec::new();
        for i in 0..nn {
            for j in 0..nn {
                if i != j {
                    mats.push(GMat::unit(n, i, j));
                    labels.push((i, j));
                }
            }
        }
        for i in 0..nn - 1 {
            mats.push(GMat::unit(n, i, i).sub(&GMat::unit(n, i + 1, i + 1)));
            labels.push((i, i));
        }
        EBasis { n, mats, labels }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn is_cartan(&self, alpha: usize) -> bool {
        let (i, j) = self.labels[alpha];
        i == j
    }

    /// Index of E_ij (i ≠ j).
    pub fn e_index(&self, i: usize, j: usize) -> usize {
        let nn = self.n as usize;
        assert!(i != j && i < nn && j < nn);
        i * (nn - 1) + if j < i { j } else { j - 1 }
    }

    /// Index of H_i.
    pub fn h_index(&self, i: usize) -> usize {
        let nn = self.n as usize;
        nn * (nn - 1) + i
    }

    /// Adγ-charge: E_ij has charge j − i mod N, Cartan elements 0.
    pub fn charge(&self, alpha: usize) -> usize {
        let (i, j) = self.labels[alpha];
        modn(j as i64 - i as i64, self.n)
    }

    /// ad-weight of a basis element as an N-vector (e_i − e_j for E_ij).
    pub fn root(&self, alpha: usize) -> Vec<i64> {
        let (i, j) = self.labels[alpha];
        let mut v = vec![0i64; self.n as usize];
        if i != j {
            v[i] += 1;
            v[j] -= 1;
        }
        v
    }

    /// Coordinates of a traceless matrix.
    pub fn coords(&self, x: &GMat) -> Vec<(usize, CycNum)> {
        let nn = self.n as usize;
        let mut out = Vec::new();
        for (alpha, &(i, j)) in self.labels.iter().enumerate() {
            if i != j {
                let v = x.get(i, j);
                if !v.is_zero() {
                    out.push((alpha, v.clone()));
                }
            }
        }
        // diagonal d ↦ Σ h_i H_i with h_i = d_1 + … + d_i
        let mut acc = CycNum::zero(self.n);
        for i in 0..nn - 1 {
            acc += x.get(i, i);
            if !acc.is_zero() {
                out.push((self.h_index(i), acc.clone()));
            }
        }
        out
    }

    /// Rational coordinates; panics if a coordinate is irrational.
    pub fn rat_coords(&self, x: &GMat) -> Vec<(usize, Rat)> {
        self.coords(x).into_iter().map(|(a, c)| (a, c.as_rational().expect("rational matrix").clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twist_pair_small_cases() {
        let (b, g) = make_twist_pair(2).unwrap();
        let one = CycNum::one(2);
        let zero = CycNum::zero(2);
        assert_eq!(b, GMat::from_rows(2, &[vec![zero.clone(), one.clone()], vec![one.clone(), zero]]));
        assert_eq!(g, GMat::diag(&[one.clone(), -&one]));
        for n in 2..=4 {
            let (b, g) = make_twist_pair(n).unwrap();
            assert_eq!(b.pow(n as i64).unwrap(), GMat::identity(n));
            assert_eq!(g.pow(n as i64).unwrap(), GMat::identity(n));
            let lhs = g.mul(&b);
            let rhs = b.mul(&g).scale(&CycNum::eps_pow(n, 1));
            assert!(lhs.sub(&rhs).is_zero());
        }
        assert!(make_twist_pair(1).is_err());
    }

    #[test]
    fn j_basis_is_twisted_eigenbasis() {
        for n in 2..=4u32 {
            let (b, g) = make_twist_pair(n).unwrap();
            for (a, bb) in j_indices(n) {
                let j = j_basis(n, a as i64, bb as i64);
                let expect = b.pow(a as i64).unwrap().mul(&g.pow(-(bb as i64)).unwrap());
                assert_eq!(j, expect);
                assert_eq!(ad(&g, &j).unwrap(), j.scale(&CycNum::eps_pow(n, a as i64)));
                assert_eq!(ad(&b, &j).unwrap(), j.scale(&CycNum::eps_pow(n, bb as i64)));
            }
        }
    }

    #[test]
    fn trace_form_pairs_opposite_indices() {
        for n in 2..=4u32 {
            for (a, b) in j_indices(n) {
                for (c, d) in j_indices(n) {
                    let t = inner(&j_basis(n, a as i64, b as i64), &j_basis(n, c as i64, d as i64));
                    let opposite = (a + c) % n as usize == 0 && (b + d) % n as usize == 0;
                    assert_eq!(t.is_zero(), !opposite, "N={n} ({a},{b}) ({c},{d})");
                    let dual = inner(&j_basis(n, a as i64, b as i64), &dual_j(n, c as i64, d as i64));
                    assert_eq!(dual.is_one(), (a, b) == (c, d));
                }
            }
        }
        let j10 = j_basis(2, 1, 0);
        assert_eq!(inner(&j10, &j10), CycNum::from_int(2, 2));
        assert_eq!(dual_j(2, 1, 0), j10.scale(&CycNum::from_rat(2, rat(1, 2))));
    }

    #[test]
    fn ebasis_coordinates_round_trip() {
        for n in 2..=4u32 {
            let eb = EBasis::new(n);
            assert_eq!(eb.len(), (n * n - 1) as usize);
            for (a, b) in j_indices(n) {
                let x = j_basis(n, a as i64, b as i64);
                let mut back = GMat::zero(n);
                for (alpha, c) in eb.coords(&x) {
                    back = back.add(&eb.mats[alpha].scale(&c));
                }
                assert_eq!(back, x);
                let jc = j_coords(&x);
                assert_eq!(from_j_coords(n, &jc), x);
            }
        }
    }
}
