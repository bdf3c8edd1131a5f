//! Dense univariate polynomials and sparse Laurent polynomials over Q(ε).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::cyc::{CycNum, Rat};
use crate::error::Result;

/// Dense polynomial, lowest degree first, no trailing zeros (zero = empty).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    pub n: u32,
    pub c: Vec<CycNum>,
}

impl Poly {
    pub fn zero(n: u32) -> Self {
        Poly { n, c: Vec::new() }
    }

    pub fn one(n: u32) -> Self {
        Poly { n, c: vec![CycNum::one(n)] }
    }

    pub fn constant(c: CycNum) -> Self {
        let n = c.order();
        Poly { n, c: vec![c] }.trimmed()
    }

    pub fn from_coeffs(n: u32, c: Vec<CycNum>) -> Self {
        Poly { n, c }.trimmed()
    }

    /// x^N - a
    pub fn x_pow_minus(n: u32, power: usize, a: &CycNum) -> Self {
        let mut c = vec![CycNum::zero(n); power + 1];
        c[0] = -a;
        c[power] = &c[power] + &CycNum::one(n);
        Poly::from_coeffs(n, c)
    }

    fn trimmed(mut self) -> Self {
        while self.c.last().is_some_and(CycNum::is_zero) {
            self.c.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&CycNum> {
        self.c.last()
    }

    pub fn coeff(&self, i: usize) -> CycNum {
        self.c.get(i).cloned().unwrap_or_else(|| CycNum::zero(self.n))
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let len = self.c.len().max(o.c.len());
        let c = (0..len).map(|i| &self.coeff(i) + &o.coeff(i)).collect();
        Poly::from_coeffs(self.n, c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let len = self.c.len().max(o.c.len());
        let c = (0..len).map(|i| &self.coeff(i) - &o.coeff(i)).collect();
        Poly::from_coeffs(self.n, c)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.n);
        }
        let mut c = vec![CycNum::zero(self.n); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += &(a * b);
                }
            }
        }
        Poly::from_coeffs(self.n, c)
    }

    pub fn scale(&self, s: &CycNum) -> Poly {
        Poly::from_coeffs(self.n, self.c.iter().map(|a| a * s).collect())
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn divmod(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(crate::error::Error::DivisionByZero)?;
        let inv_lead = d.lead().unwrap().inv()?;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(self.n), self.clone()));
        }
        let mut q = vec![CycNum::zero(self.n); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] * &inv_lead;
            if c.is_zero() {
                continue;
            }
            for (j, b) in d.c.iter().enumerate() {
                r[i + j] -= &(&c * b);
            }
            q[i] = c;
        }
        r.truncate(dd);
        Ok((Poly::from_coeffs(self.n, q), Poly::from_coeffs(self.n, r)))
    }

    pub fn monic(&self) -> Result<Poly> {
        match self.lead() {
            None => Ok(self.clone()),
            Some(l) => Ok(self.scale(&l.inv()?)),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Result<Poly> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divmod(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &CycNum) -> CycNum {
        let mut acc = CycNum::zero(self.n);
        for a in self.c.iter().rev() {
            acc = &(&acc * x) + a;
        }
        acc
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.c.iter().rev() {
            acc = acc * x + a.to_complex();
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero(self.n);
        }
        let c =
            self.c[1..].iter().enumerate().map(|(i, a)| a.scale(&Rat::from_integer((i as i64 + 1).into()))).collect();
        Poly::from_coeffs(self.n, c)
    }

    /// p(x + s), i.e. the Taylor coefficients of p at s.
    pub fn shift(&self, s: &CycNum) -> Poly {
        // Horner in the ring Q(ε)[x]
        let mut acc = Poly::zero(self.n);
        let lin = Poly::from_coeffs(self.n, vec![s.clone(), CycNum::one(self.n)]);
        for a in self.c.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(a.clone()));
        }
        acc
    }

    /// p(c·x)
    pub fn dilate(&self, c: &CycNum) -> Poly {
        let mut p = CycNum::one(self.n);
        let mut out = Vec::with_capacity(self.c.len());
        for a in &self.c {
            out.push(a * &p);
            p = &p * c;
        }
        Poly::from_coeffs(self.n, out)
    }

    /// Valuation at x = 0 (index of the lowest nonzero coefficient).
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|a| !a.is_zero())
    }
}

/// Sparse Laurent polynomial Σ c_d u^d.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Laurent {
    pub n: u32,
    pub terms: BTreeMap<i64, CycNum>,
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(d, c)| format!("({c})*u^{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Laurent {
    pub fn zero(n: u32) -> Self {
        Laurent { n, terms: BTreeMap::new() }
    }

    pub fn one(n: u32) -> Self {
        Self::monomial(CycNum::one(n), 0)
    }

    pub fn monomial(c: CycNum, d: i64) -> Self {
        let n = c.order();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(d, c);
        }
        Laurent { n, terms }
    }

    pub fn constant(c: CycNum) -> Self {
        Self::monomial(c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, d: i64) -> CycNum {
        self.terms.get(&d).cloned().unwrap_or_else(|| CycNum::zero(self.n))
    }

    pub fn min_deg(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_deg(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_term(&mut self, d: i64, c: &CycNum) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_insert_with(|| CycNum::zero(c.order()));
        *e += c;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (d, c) in &o.terms {
            out.add_term(*d, c);
        }
        out
    }

    pub fn sub(&self, o: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (d, c) in &o.terms {
            out.add_term(*d, &-c);
        }
        out
    }

    pub fn neg(&self) -> Laurent {
        Laurent { n: self.n, terms: self.terms.iter().map(|(d, c)| (*d, -c)).collect() }
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.n);
        for (d1, c1) in &self.terms {
            for (d2, c2) in &o.terms {
                out.add_term(d1 + d2, &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, s: &CycNum) -> Laurent {
        let mut out = Laurent::zero(self.n);
        for (d, c) in &self.terms {
            out.add_term(*d, &(c * s));
        }
        out
    }

    /// Multiplies by u^k.
    pub fn shift(&self, k: i64) -> Laurent {
        Laurent { n: self.n, terms: self.terms.iter().map(|(d, c)| (d + k, c.clone())).collect() }
    }

    /// u ↦ c·u
    pub fn dilate(&self, c: &CycNum) -> Result<Laurent> {
        let mut out = Laurent::zero(self.n);
        for (d, a) in &self.terms {
            out.add_term(*d, &(a * &c.pow(*d)?));
        }
        Ok(out)
    }

    /// u ↦ u^m (m may be negative).
    pub fn compose_power(&self, m: i64) -> Laurent {
        Laurent { n: self.n, terms: self.terms.iter().map(|(d, c)| (d * m, c.clone())).collect() }
    }

    /// The operator u·d/du.
    pub fn euler(&self) -> Laurent {
        let mut out = Laurent::zero(self.n);
        for (d, c) in &self.terms {
            out.add_term(*d, &c.scale(&Rat::from_integer((*d).into())));
        }
        out
    }

    pub fn eval(&self, x: &CycNum) -> Result<CycNum> {
        let mut acc = CycNum::zero(self.n);
        for (d, c) in &self.terms {
            acc += &(c * &x.pow(*d)?);
        }
        Ok(acc)
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.terms.iter().map(|(d, c)| c.to_complex() * x.powi(*d as i32)).sum()
    }

    /// Splits into u^v · p(u) with p a polynomial with p(0) ≠ 0.
    pub fn to_poly(&self) -> (i64, Poly) {
        let Some(v) = self.min_deg() else {
            return (0, Poly::zero(self.n));
        };
        let top = self.max_deg().unwrap();
        let mut c = vec![CycNum::zero(self.n); (top - v + 1) as usize];
        for (d, a) in &self.terms {
            c[(d - v) as usize] = a.clone();
        }
        (v, Poly::from_coeffs(self.n, c))
    }

    pub fn from_poly(p: &Poly, shift: i64) -> Laurent {
        let mut out = Laurent::zero(p.n);
        for (i, a) in p.c.iter().enumerate() {
            out.add_term(i as i64 + shift, a);
        }
        out
    }

    /// True if every exponent is congruent to `r` modulo `m`.
    pub fn exponents_congruent(&self, r: i64, m: i64) -> bool {
        self.terms.keys().all(|d| (d - r).rem_euclid(m) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(n: u32, k: i64) -> CycNum {
        CycNum::from_int(n, k)
    }

    #[test]
    fn gcd_of_products() {
        let n = 3;
        let a = Poly::from_coeffs(n, vec![ci(n, -1), ci(n, 1)]); // x-1
        let b = Poly::from_coeffs(n, vec![ci(n, 2), ci(n, 1)]); // x+2
        let c = Poly::x_pow_minus(n, 3, &CycNum::one(n));
        let g = a.mul(&b).gcd(&a.mul(&c)).unwrap();
        // gcd((x-1)(x+2), (x-1)(x^3-1)) = x-1 (x+2 does not divide x^3-1)
        assert_eq!(g, a);
    }

    #[test]
    fn divmod_reconstructs() {
        let n = 4;
        let e = CycNum::eps_pow(n, 1);
        let p = Poly::from_coeffs(n, vec![ci(n, 3), e.clone(), ci(n, -2), ci(n, 5), e.clone()]);
        let d = Poly::from_coeffs(n, vec![e.clone(), ci(n, 1), ci(n, 2)]);
        let (q, r) = p.divmod(&d).unwrap();
        assert_eq!(q.mul(&d).add(&r), p);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn shift_is_taylor() {
        let n = 2;
        let p = Poly::from_coeffs(n, vec![ci(n, 1), ci(n, 0), ci(n, 1)]); // 1 + x^2
        let s = p.shift(&ci(n, 2)); // 1 + (x+2)^2 = 5 + 4x + x^2
        assert_eq!(s, Poly::from_coeffs(n, vec![ci(n, 5), ci(n, 4), ci(n, 1)]));
    }

    #[test]
    fn laurent_euler_operator() {
        let n = 2;
        let l = Laurent::monomial(ci(n, 3), -2).add(&Laurent::monomial(ci(n, 1), 1));
        let e = l.euler();
        assert_eq!(e.coeff(-2), ci(n, -6));
        assert_eq!(e.coeff(1), ci(n, 1));
    }
}
