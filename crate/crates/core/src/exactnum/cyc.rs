//! Exact arithmetic in the cyclotomic field Q(ε), ε = exp(2πi/N).
//!
//! Elements are stored in the power basis 1, ε, …, ε^{φ(N)-1}, fully reduced
//! modulo the N-th cyclotomic polynomial Φ_N, so coefficientwise equality is
//! field equality.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // huge operands: fall back to a scaled division
        let bits = r.numer().bits().max(r.denom().bits()) as i64 - 900;
        let shift = bits.max(0) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

pub const MAX_ORDER: u32 = 64;

/// Per-N data: Φ_N and the reductions of x^j for j < 2·deg.
#[derive(Debug)]
pub struct CycContext {
    pub n: u32,
    pub deg: usize,
    /// Coefficients of Φ_N, lowest first; monic.
    pub phi: Vec<i64>,
    /// `reduce[j]` = x^j mod Φ_N as an integer vector of length `deg`.
    pub reduce: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let lead = *den.last().unwrap();
    let mut q = vec![0i64; num.len() + 1 - dl];
    for i in (0..q.len()).rev() {
        let c = rem[i + dl - 1] / lead;
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn cyclotomic(n: u32) -> Vec<i64> {
    // x^n - 1 divided by Φ_d for all proper divisors d
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            p = poly_div_exact(&p, &cyclotomic(d));
        }
    }
    p
}

impl CycContext {
    fn build(n: u32) -> Self {
        let phi = cyclotomic(n);
        let deg = phi.len() - 1;
        let mut reduce = Vec::with_capacity(2 * deg + 1);
        let mut cur = vec![0i64; deg];
        cur[0] = 1;
        for _ in 0..(2 * deg + 1).max(n as usize + 1) {
            reduce.push(cur.clone());
            // multiply by x
            let top = cur[deg - 1];
            let mut next = vec![0i64; deg];
            for i in (1..deg).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..deg {
                next[i] -= top * phi[i];
            }
            cur = next;
        }
        CycContext { n, deg, phi, reduce }
    }
}

static CONTEXTS: [OnceLock<CycContext>; MAX_ORDER as usize + 1] = [const { OnceLock::new() }; MAX_ORDER as usize + 1];

pub fn context(n: u32) -> &'static CycContext {
    assert!((1..=MAX_ORDER).contains(&n), "cyclotomic order {n} out of range");
    CONTEXTS[n as usize].get_or_init(|| CycContext::build(n))
}

/// An element of Q(ε_N).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    n: u32,
    c: Vec<Rat>,
}

impl CycNum {
    pub fn zero(n: u32) -> Self {
        CycNum { n, c: vec![Rat::zero(); context(n).deg] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rat(n, Rat::one())
    }

    pub fn from_rat(n: u32, r: Rat) -> Self {
        let mut z = Self::zero(n);
        z.c[0] = r;
        z
    }

    pub fn from_int(n: u32, k: i64) -> Self {
        Self::from_rat(n, rat_int(k))
    }

    /// ε^k for any integer k.
    pub fn eps_pow(n: u32, k: i64) -> Self {
        let ctx = context(n);
        let j = k.rem_euclid(n as i64) as usize;
        let c = ctx.reduce[j].iter().map(|&v| rat_int(v)).collect();
        CycNum { n, c }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    /// Builds an element from power-basis coefficients of arbitrary length,
    /// reducing modulo Φ_N.
    pub fn from_coeffs(n: u32, coeffs: &[Rat]) -> Self {
        let mut z = Self::zero(n);
        for (j, a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = CycNum::eps_pow(n, j as i64);
            z += &e.scale(a);
        }
        z
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// Returns the rational value when the element lies in Q.
    pub fn as_rational(&self) -> Option<&Rat> {
        if self.c[1..].iter().all(Zero::is_zero) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        CycNum { n: self.n, c: self.c.iter().map(|x| x * r).collect() }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.n, other.n, "mixing cyclotomic orders {} and {}", self.n, other.n);
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = context(self.n);
        if ctx.deg == 1 {
            return Ok(Self::from_rat(self.n, self.c[0].recip()));
        }
        // extended Euclid: find s with s·x ≡ 1 mod Φ_N
        let phi: Vec<Rat> = ctx.phi.iter().map(|&v| rat_int(v)).collect();
        let a: Vec<Rat> = self.c.clone();
        let (g, s) = ext_gcd(&a, &phi);
        debug_assert_eq!(g.len(), 1);
        let g0 = g[0].clone();
        let s: Vec<Rat> = s.into_iter().map(|v| v / &g0).collect();
        Ok(Self::from_coeffs(self.n, &s))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Complex conjugation, ε ↦ ε^{-1}.
    pub fn conj(&self) -> Self {
        let mut z = Self::zero(self.n);
        for (j, a) in self.c.iter().enumerate() {
            if !a.is_zero() {
                z += &CycNum::eps_pow(self.n, -(j as i64)).scale(a);
            }
        }
        z
    }

    /// Galois action ε ↦ ε^m (m coprime to N); with m = -1 this is `conj`.
    pub fn galois(&self, m: i64) -> Self {
        let mut z = Self::zero(self.n);
        for (j, a) in self.c.iter().enumerate() {
            if !a.is_zero() {
                z += &CycNum::eps_pow(self.n, m * j as i64).scale(a);
            }
        }
        z
    }

    pub fn to_complex(&self) -> Complex64 {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / self.n as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for a in &self.c {
            acc += p * rat_to_f64(a);
            p *= w;
        }
        acc
    }
}

fn poly_trim(p: &mut Vec<Rat>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_sub_mul(a: &[Rat], b: &[Rat], c: &Rat, shift: usize) -> Vec<Rat> {
    let mut out = a.to_vec();
    if out.len() < b.len() + shift {
        out.resize(b.len() + shift, Rat::zero());
    }
    for (i, v) in b.iter().enumerate() {
        out[i + shift] -= v * c;
    }
    poly_trim(&mut out);
    out
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_is_zero(p: &[Rat]) -> bool {
    p.iter().all(Zero::is_zero)
}

fn poly_divmod(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rat::zero(); r.len().saturating_sub(db).max(1)];
    while !poly_is_zero(&r) && r.len() > db {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        r = poly_sub_mul(&r, b, &c, shift);
        q[shift] = c;
    }
    poly_trim(&mut q);
    (q, r)
}

/// Returns (g, s) with s·a ≡ g (mod m) and g = gcd(a, m) (a constant here).
fn ext_gcd(a: &[Rat], m: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r1);
    let mut s0 = vec![Rat::zero()];
    let mut s1 = vec![Rat::one()];
    while !poly_is_zero(&r1) {
        let (q, r) = poly_divmod(&r0, &r1);
        let qs = poly_mul(&q, &s1);
        let mut s2 = s0.clone();
        if s2.len() < qs.len() {
            s2.resize(qs.len(), Rat::zero());
        }
        for (i, v) in qs.iter().enumerate() {
            s2[i] -= v;
        }
        poly_trim(&mut s2);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    (r0, s0)
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if a.is_negative() { " - " } else { " + " })?;
            } else if a.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let m = a.abs();
            match j {
                0 => write!(f, "{m}")?,
                1 if m.is_one() => write!(f, "e")?,
                1 => write!(f, "{m}*e")?,
                _ if m.is_one() => write!(f, "e^{j}")?,
                _ => write!(f, "{m}*e^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add<&CycNum> for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum { n: self.n, c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub<&CycNum> for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum { n: self.n, c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<&CycNum> for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        let ctx = context(self.n);
        let d = ctx.deg;
        if d == 1 {
            return CycNum { n: self.n, c: vec![&self.c[0] * &rhs.c[0]] };
        }
        let mut prod = vec![Rat::zero(); 2 * d - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut out = vec![Rat::zero(); d];
        for (j, p) in prod.into_iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if j < d {
                out[j] += p;
            } else {
                for (i, &r) in ctx.reduce[j].iter().enumerate() {
                    if r != 0 {
                        out[i] += &p * rat_int(r);
                    }
                }
            }
        }
        CycNum { n: self.n, c: out }
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum { n: self.n, c: self.c.iter().map(|a| -a).collect() }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: CycNum) -> CycNum {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: &CycNum) -> CycNum {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&CycNum> for CycNum {
    fn add_assign(&mut self, rhs: &CycNum) {
        self.check(rhs);
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl SubAssign<&CycNum> for CycNum {
    fn sub_assign(&mut self, rhs: &CycNum) {
        self.check(rhs);
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

impl MulAssign<&CycNum> for CycNum {
    fn mul_assign(&mut self, rhs: &CycNum) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(context(1).phi, vec![-1, 1]);
        assert_eq!(context(2).phi, vec![1, 1]);
        assert_eq!(context(3).phi, vec![1, 1, 1]);
        assert_eq!(context(4).phi, vec![1, 0, 1]);
        assert_eq!(context(6).phi, vec![1, -1, 1]);
        assert_eq!(context(12).deg, 4);
    }

    #[test]
    fn epsilon_is_primitive_root() {
        for n in 2..=8u32 {
            let e = CycNum::eps_pow(n, 1);
            assert!(e.pow(n as i64).unwrap().is_one());
            for k in 1..n as i64 {
                assert!(!e.pow(k).unwrap().is_one());
            }
        }
    }

    #[test]
    fn inverse_examples() {
        // N=2: ε = -1
        let e = CycNum::eps_pow(2, 1);
        assert_eq!(e, CycNum::from_int(2, -1));
        assert_eq!(e.inv().unwrap(), CycNum::from_int(2, -1));
        // N=4: (1+ε)^{-1} = (1-ε)/2
        let one = CycNum::one(4);
        let e4 = CycNum::eps_pow(4, 1);
        let x = &one + &e4;
        let expect = (&one - &e4).scale(&rat(1, 2));
        assert_eq!(x.inv().unwrap(), expect);
        assert!((&x * &expect).is_one());
        // N=3: ε^{-1} = ε²
        let e3 = CycNum::eps_pow(3, 1);
        assert_eq!(e3.inv().unwrap(), CycNum::eps_pow(3, 2));
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(matches!(CycNum::zero(5).inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn complex_embedding() {
        let z = CycNum::eps_pow(6, 1).to_complex();
        assert!((z - Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)).norm() < 1e-14);
        assert_eq!(CycNum::one(3).to_complex(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugation_inverts_eps() {
        let n = 5;
        let x = &CycNum::eps_pow(n, 2) + &CycNum::from_int(n, 3);
        let y = x.conj();
        assert!((y.to_complex() - x.to_complex().conj()).norm() < 1e-12);
    }
}
