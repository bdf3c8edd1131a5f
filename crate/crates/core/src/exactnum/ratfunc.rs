//! Rational functions in one variable over Q(ε), kept gcd-reduced with a
//! monic denominator that does not vanish at 0 (powers of u live in the
//! Laurent numerator).

use std::fmt;

use num_complex::Complex64;

use super::cyc::CycNum;
use super::poly::{Laurent, Poly};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: Laurent,
    den: Poly,
}

/// Where to expand a rational function.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Finite(CycNum),
    Infinity,
}

/// Truncated Laurent expansion Σ_{j} coeffs[j]·ξ^{val+j}.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSeries {
    pub val: i64,
    pub coeffs: Vec<CycNum>,
}

impl LocalSeries {
    /// Coefficient of ξ^d (zero outside the stored window below `val`).
    pub fn coeff(&self, d: i64, n: u32) -> Option<CycNum> {
        if d < self.val {
            return Some(CycNum::zero(n));
        }
        self.coeffs.get((d - self.val) as usize).cloned()
    }

    /// Highest exponent known exactly.
    pub fn last_exponent(&self) -> i64 {
        self.val + self.coeffs.len() as i64 - 1
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            let d = Laurent::from_poly(&self.den, 0);
            write!(f, "[{}] / [{}]", self.num, d)
        }
    }
}

impl RatFunc {
    pub fn zero(n: u32) -> Self {
        RatFunc { num: Laurent::zero(n), den: Poly::one(n) }
    }

    pub fn one(n: u32) -> Self {
        Self::from_laurent(Laurent::one(n))
    }

    pub fn constant(c: CycNum) -> Self {
        Self::from_laurent(Laurent::constant(c))
    }

    pub fn from_laurent(num: Laurent) -> Self {
        let n = num.n;
        RatFunc { num, den: Poly::one(n) }
    }

    /// u^d
    pub fn monomial(n: u32, d: i64) -> Self {
        Self::from_laurent(Laurent::monomial(CycNum::one(n), d))
    }

    pub fn order(&self) -> u32 {
        self.num.n
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// num / den for an arbitrary Laurent numerator and nonzero Laurent
    /// denominator; the result is normalized.
    pub fn new(num: Laurent, den: Laurent) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (v, dp) = den.to_poly();
        RatFunc { num: num.shift(-v), den: dp }.normalize()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.order();
        if self.num.is_zero() {
            return Ok(Self::zero(n));
        }
        let (v, np) = self.num.to_poly();
        // move any factor u out of the denominator
        let mut den = self.den.clone();
        let mut shift = v;
        if let Some(val) = den.valuation() {
            if val > 0 {
                den = Poly::from_coeffs(n, den.c[val..].to_vec());
                shift -= val as i64;
            }
        }
        let g = np.gcd(&den)?;
        let (np, _) = np.divmod(&g)?;
        let (den, _) = den.divmod(&g)?;
        let lead = den.lead().ok_or(Error::DivisionByZero)?.clone();
        let inv = lead.inv()?;
        Ok(RatFunc { num: Laurent::from_poly(&np.scale(&inv), shift), den: den.scale(&inv) })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True if the denominator is trivial, i.e. the function is a Laurent polynomial.
    pub fn is_laurent(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn add(&self, o: &RatFunc) -> Result<RatFunc> {
        if self.den == o.den {
            return RatFunc { num: self.num.add(&o.num), den: self.den.clone() }.normalize();
        }
        let a = self.num.mul(&Laurent::from_poly(&o.den, 0));
        let b = o.num.mul(&Laurent::from_poly(&self.den, 0));
        RatFunc { num: a.add(&b), den: self.den.mul(&o.den) }.normalize()
    }

    pub fn sub(&self, o: &RatFunc) -> Result<RatFunc> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFunc) -> Result<RatFunc> {
        RatFunc { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.normalize()
    }

    pub fn scale(&self, c: &CycNum) -> RatFunc {
        if c.is_zero() {
            return Self::zero(self.order());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_laurent(&self, l: &Laurent) -> Result<RatFunc> {
        RatFunc { num: self.num.mul(l), den: self.den.clone() }.normalize()
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(Laurent::from_poly(&self.den, 0), self.num.clone())
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        self.mul(&o.inv()?)
    }

    /// u·d/du
    pub fn euler(&self) -> Result<RatFunc> {
        let dn = self.num.euler();
        let dd = Laurent::from_poly(&self.den.derivative(), 1);
        let d = Laurent::from_poly(&self.den, 0);
        let num = dn.mul(&d).sub(&self.num.mul(&dd));
        RatFunc { num, den: self.den.mul(&self.den) }.normalize()
    }

    /// d/du
    pub fn derivative(&self) -> Result<RatFunc> {
        self.euler()?.mul_laurent(&Laurent::monomial(CycNum::one(self.order()), -1))
    }

    /// f(c·u)
    pub fn dilate(&self, c: &CycNum) -> Result<RatFunc> {
        let num = self.num.dilate(c)?;
        let den = Laurent::from_poly(&self.den.dilate(c), 0);
        RatFunc::new(num, den)
    }

    /// f(1/u)
    pub fn invert_variable(&self) -> Result<RatFunc> {
        let num = self.num.compose_power(-1);
        let den = Laurent::from_poly(&self.den, 0).compose_power(-1);
        RatFunc::new(num, den)
    }

    /// f(u^m), m ≥ 1
    pub fn compose_power(&self, m: i64) -> Result<RatFunc> {
        let num = self.num.compose_power(m);
        let den = Laurent::from_poly(&self.den, 0).compose_power(m);
        RatFunc::new(num, den)
    }

    pub fn eval(&self, x: &CycNum) -> Result<CycNum> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::PoleProximity(format!("exact pole of {self} at u = {x}")));
        }
        self.num.eval(x)?.div(&d)
    }

    pub fn eval_complex(&self, x: Complex64, tol_den: f64) -> Result<Complex64> {
        let d = self.den.eval_complex(x);
        if d.norm() < tol_den {
            return Err(Error::PoleProximity(format!(
                "|denominator {}| = {:.3e} at u = {x}",
                Laurent::from_poly(&self.den, 0),
                d.norm()
            )));
        }
        Ok(self.num.eval_complex(x) / d)
    }

    /// Laurent expansion in the local coordinate ξ = u - p (or ξ = 1/u at
    /// infinity) with `terms` coefficients starting from the valuation.
    pub fn expand(&self, at: &Point, terms: usize) -> Result<LocalSeries> {
        let n = self.order();
        if self.is_zero() {
            return Ok(LocalSeries { val: 0, coeffs: vec![CycNum::zero(n); terms] });
        }
        match at {
            Point::Infinity => self.invert_variable()?.expand(&Point::Finite(CycNum::zero(n)), terms),
            Point::Finite(p) => {
                let (v, np) = self.num.to_poly();
                if p.is_zero() {
                    let a = np;
                    let b = self.den.clone();
                    let s = series_div(&a, &b, terms)?;
                    return Ok(LocalSeries { val: v, coeffs: s });
                }
                // num = u^v np(u); write the function as A(u)/B(u) with polynomials
                let (a, b) = if v >= 0 {
                    (np.shift_up(v as usize), self.den.clone())
                } else {
                    (np, self.den.mul(&Poly::one(n).shift_up((-v) as usize)))
                };
                let a = a.shift(p);
                let b = b.shift(p);
                let va = a.valuation().unwrap_or(0);
                let vb = b.valuation().ok_or(Error::DivisionByZero)?;
                let a = Poly::from_coeffs(n, a.c[va..].to_vec());
                let b = Poly::from_coeffs(n, b.c[vb..].to_vec());
                let s = series_div(&a, &b, terms)?;
                Ok(LocalSeries { val: va as i64 - vb as i64, coeffs: s })
            }
        }
    }

    /// Order of pole (positive) or zero (negative) at `at`; 0 if regular and nonvanishing.
    pub fn pole_order(&self, at: &Point) -> Result<i64> {
        Ok(-self.expand(at, 1)?.val)
    }
}

impl Poly {
    /// Multiplies by x^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![CycNum::zero(self.n); k];
        c.extend(self.c.iter().cloned());
        Poly::from_coeffs(self.n, c)
    }
}

/// First `terms` coefficients of a(x)/b(x) as a power series, b(0) ≠ 0.
pub fn series_div(a: &Poly, b: &Poly, terms: usize) -> Result<Vec<CycNum>> {
    let b0inv = b.coeff(0).inv()?;
    let mut out: Vec<CycNum> = Vec::with_capacity(terms);
    for k in 0..terms {
        let mut s = a.coeff(k);
        for j in 1..=k.min(b.c.len().saturating_sub(1)) {
            s -= &(&b.c[j] * &out[k - j]);
        }
        out.push(&s * &b0inv);
    }
    Ok(out)
}
