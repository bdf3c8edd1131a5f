//! Truncated power series in q whose coefficients are rational functions of u.

use num_complex::Complex64;

use super::cyc::CycNum;
use super::poly::Laurent;
use super::ratfunc::RatFunc;
use crate::error::{Error, Result};

/// Σ_{n=0}^{order} coeffs[n]·q^n, exact up to the declared order.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    n: u32,
    coeffs: Vec<RatFunc>,
}

/// Substitutions acting on the variable u.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subst {
    /// u ↦ ε^k u
    Eps(i64),
    /// u ↦ q u
    Q,
}

impl QSeries {
    pub fn zero(n: u32, order: usize) -> Self {
        QSeries { n, coeffs: vec![RatFunc::zero(n); order + 1] }
    }

    pub fn constant(c: RatFunc, order: usize) -> Self {
        let n = c.order();
        let mut s = Self::zero(n, order);
        s.coeffs[0] = c;
        s
    }

    pub fn from_coeffs(n: u32, coeffs: Vec<RatFunc>) -> Self {
        assert!(!coeffs.is_empty());
        QSeries { n, coeffs }
    }

    /// Series whose q^k coefficient is `laurent[k] / den`.
    pub fn from_laurent_series(laurent: &[Laurent], den: &Laurent) -> Result<Self> {
        let n = den.n;
        let coeffs = laurent.iter().map(|l| RatFunc::new(l.clone(), den.clone())).collect::<Result<Vec<_>>>()?;
        Ok(QSeries { n, coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn cyc_order(&self) -> u32 {
        self.n
    }

    pub fn coeff(&self, k: usize) -> &RatFunc {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> QSeries {
        let mut c = self.coeffs.clone();
        c.truncate(order + 1);
        QSeries { n: self.n, coeffs: c }
    }

    pub fn add(&self, o: &QSeries) -> Result<QSeries> {
        let ord = self.order().min(o.order());
        let coeffs = (0..=ord).map(|k| self.coeffs[k].add(&o.coeffs[k])).collect::<Result<_>>()?;
        Ok(QSeries { n: self.n, coeffs })
    }

    pub fn sub(&self, o: &QSeries) -> Result<QSeries> {
        let ord = self.order().min(o.order());
        let coeffs = (0..=ord).map(|k| self.coeffs[k].sub(&o.coeffs[k])).collect::<Result<_>>()?;
        Ok(QSeries { n: self.n, coeffs })
    }

    /// Product truncated to the smaller of the two orders.
    pub fn mul(&self, o: &QSeries) -> Result<QSeries> {
        let ord = self.order().min(o.order());
        let mut coeffs = vec![RatFunc::zero(self.n); ord + 1];
        for i in 0..=ord {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(ord - i) {
                if o.coeffs[j].is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&self.coeffs[i].mul(&o.coeffs[j])?)?;
            }
        }
        Ok(QSeries { n: self.n, coeffs })
    }

    pub fn scale(&self, c: &CycNum) -> QSeries {
        QSeries { n: self.n, coeffs: self.coeffs.iter().map(|r| r.scale(c)).collect() }
    }

    pub fn mul_rat(&self, f: &RatFunc) -> Result<QSeries> {
        let coeffs = self.coeffs.iter().map(|r| r.mul(f)).collect::<Result<_>>()?;
        Ok(QSeries { n: self.n, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RatFunc::is_zero)
    }

    /// Index of the first differing coefficient up to the common order.
    pub fn first_mismatch(&self, o: &QSeries) -> Option<usize> {
        let ord = self.order().min(o.order());
        (0..=ord).find(|&k| self.coeffs[k] != o.coeffs[k])
    }

    /// Applies a substitution in u.
    ///
    /// For `Subst::Eps` the order is preserved. For `Subst::Q` each
    /// coefficient c_k(u) becomes c_k(qu), which is re-expanded as a power
    /// series in q (denominators by geometric series); a term u^d of the
    /// q^k coefficient lands at order k + d. The returned series is exact up
    /// to `order - D`, where D is the largest downward shift observed; a term
    /// landing below q^0 means the expansion is not a formal power series in
    /// this chart and is reported as an error.
    pub fn subst(&self, mode: Subst) -> Result<QSeries> {
        match mode {
            Subst::Eps(k) => {
                let e = CycNum::eps_pow(self.n, k);
                let coeffs = self.coeffs.iter().map(|r| r.dilate(&e)).collect::<Result<_>>()?;
                Ok(QSeries { n: self.n, coeffs })
            }
            Subst::Q => self.subst_q(),
        }
    }

    fn subst_q(&self) -> Result<QSeries> {
        let n = self.n;
        let order = self.order();
        let mut drop = 0usize;
        for (k, c) in self.coeffs.iter().enumerate() {
            if let Some(d) = c.numerator().min_deg() {
                if k as i64 + d < 0 {
                    return Err(Error::Truncation(format!(
                        "u->qu moves q^{k}·u^{d} below q^0; not a formal series in this chart"
                    )));
                }
                if d < 0 {
                    drop = drop.max((-d) as usize);
                }
            }
        }
        let out_order = order
            .checked_sub(drop)
            .ok_or_else(|| Error::Truncation(format!("shift {drop} exceeds series order {order}")))?;
        let mut out: Vec<Laurent> = vec![Laurent::zero(n); out_order + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // 1/den(qu) as a q-series with Laurent coefficients
            let den = c.denominator();
            let b0inv = den.coeff(0).inv()?;
            let mut inv: Vec<Laurent> = vec![Laurent::zero(n); out_order + 1];
            inv[0] = Laurent::constant(b0inv.clone());
            for m in 1..=out_order {
                let mut s = Laurent::zero(n);
                for j in 1..=m.min(den.degree().unwrap_or(0)) {
                    let bj = den.coeff(j);
                    if bj.is_zero() {
                        continue;
                    }
                    s = s.add(&inv[m - j].mul(&Laurent::monomial(bj, j as i64)));
                }
                inv[m] = s.scale(&-&b0inv);
            }
            for (d, a) in &c.numerator().terms {
                let land = k as i64 + d;
                for (m, im) in inv.iter().enumerate() {
                    let tot = land + m as i64;
                    if tot > out_order as i64 {
                        break;
                    }
                    if im.is_zero() {
                        continue;
                    }
                    let term = im.mul(&Laurent::monomial(a.clone(), *d));
                    let t = tot as usize;
                    out[t] = out[t].add(&term);
                }
            }
        }
        let coeffs = out.into_iter().map(RatFunc::from_laurent).collect();
        Ok(QSeries { n, coeffs })
    }

    pub fn eval_complex(&self, u: Complex64, q: Complex64, tol_den: f64) -> Result<Complex64> {
        if q.norm() >= 1.0 {
            return Err(Error::InvalidInput(format!("|q| = {} must be < 1", q.norm())));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qp = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            if !c.is_zero() {
                acc += c.eval_complex(u, tol_den)? * qp;
            }
            qp *= q;
        }
        Ok(acc)
    }
}

/// Arithmetic on q-series with Laurent-polynomial coefficients, used to
/// expand infinite products exactly.
pub mod lseries {
    use super::*;

    pub fn one(n: u32, order: usize) -> Vec<Laurent> {
        let mut v = vec![Laurent::zero(n); order + 1];
        v[0] = Laurent::one(n);
        v
    }

    pub fn mul(a: &[Laurent], b: &[Laurent]) -> Vec<Laurent> {
        let ord = a.len().min(b.len()) - 1;
        let n = a[0].n;
        let mut out = vec![Laurent::zero(n); ord + 1];
        for i in 0..=ord {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..=(ord - i) {
                if !b[j].is_zero() {
                    out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
                }
            }
        }
        out
    }

    /// Inverse of a series whose q^0 coefficient is a nonzero constant.
    pub fn inv(a: &[Laurent]) -> Result<Vec<Laurent>> {
        let n = a[0].n;
        let ord = a.len() - 1;
        let c0 = match (a[0].terms.len(), a[0].terms.get(&0)) {
            (1, Some(c)) => c.clone(),
            _ => return Err(Error::InvalidInput("series inverse needs a constant leading coefficient".into())),
        };
        let c0inv = c0.inv()?;
        let mut out = vec![Laurent::zero(n); ord + 1];
        out[0] = Laurent::constant(c0inv.clone());
        for m in 1..=ord {
            let mut s = Laurent::zero(n);
            for j in 1..=m {
                if !a[j].is_zero() && !out[m - j].is_zero() {
                    s = s.add(&a[j].mul(&out[m - j]));
                }
            }
            out[m] = s.scale(&-&c0inv);
        }
        Ok(out)
    }

    /// The single factor 1 - c·u^d·q^e truncated at `order`.
    pub fn one_minus(c: &CycNum, d: i64, e: usize, order: usize) -> Vec<Laurent> {
        let n = c.order();
        let mut v = one(n, order);
        if e <= order {
            let t = Laurent::monomial(-c, d);
            v[e] = v[e].add(&t);
        }
        v
    }

    /// (c·u^d·q^e0; q^step)_∞ = Π_{j≥0} (1 - c u^d q^{e0 + j·step}), truncated.
    pub fn pochhammer(c: &CycNum, d: i64, e0: usize, step: usize, order: usize) -> Vec<Laurent> {
        assert!(step > 0);
        let n = c.order();
        let mut acc = one(n, order);
        let mut e = e0;
        while e <= order {
            acc = mul(&acc, &one_minus(c, d, e, order));
            if e0 == 0 && e == 0 && d == 0 && c.is_one() {
                break;
            }
            e += step;
        }
        acc
    }

    /// Coefficientwise comparison; returns the first differing order.
    pub fn first_mismatch(a: &[Laurent], b: &[Laurent]) -> Option<usize> {
        let ord = a.len().min(b.len());
        (0..ord).find(|&k| a[k] != b[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_fixed_by_both_substitutions() {
        let n = 3;
        let c = RatFunc::constant(CycNum::eps_pow(n, 1));
        let s = QSeries::constant(c, 5);
        assert_eq!(s.subst(Subst::Eps(1)).unwrap(), s);
        let t = s.subst(Subst::Q).unwrap();
        assert_eq!(t.first_mismatch(&s), None);
    }

    #[test]
    fn q_substitution_expands_denominator() {
        // 1/(u^2 - 1) with u -> qu = -(1 + q^2 u^2 + q^4 u^4 + ...)
        let n = 2;
        let one = CycNum::one(n);
        let f =
            RatFunc::new(Laurent::one(n), Laurent::monomial(one.clone(), 2).add(&Laurent::constant(-&one))).unwrap();
        let s = QSeries::constant(f, 6).subst(Subst::Q).unwrap();
        assert_eq!(s.order(), 6);
        for k in 0..=6usize {
            let c = s.coeff(k);
            if k % 2 == 0 {
                assert_eq!(c, &RatFunc::from_laurent(Laurent::monomial(-&one, k as i64)));
            } else {
                assert!(c.is_zero());
            }
        }
    }

    #[test]
    fn negative_landing_is_rejected() {
        let n = 2;
        let s = QSeries::constant(RatFunc::monomial(n, -1), 3);
        assert!(matches!(s.subst(Subst::Q), Err(Error::Truncation(_))));
    }

    #[test]
    fn pochhammer_matches_euler_pentagonal() {
        // (q;q)_∞ = 1 - q - q^2 + q^5 + q^7 - ...
        let n = 2;
        let p = lseries::pochhammer(&CycNum::one(n), 0, 1, 1, 8);
        let expect = [1, -1, -1, 0, 0, 1, 0, 1, 0];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(p[k].coeff(0), CycNum::from_int(n, e));
        }
    }
}
