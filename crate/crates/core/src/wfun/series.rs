//! The quasi-periodic functions ŵ_ab = w^mul_ab / 2πi as exact q-series.
//!
//! ŵ_ab(q;u) = u^a/(u^N−1) · (q^{N−a}ε^b u^{−N}; q^N)(q^a ε^{−b} u^N; q^N)
//!            / [(q^{N−a}ε^b; q^N)(q^N u^{−N}; q^N)(q^a ε^{−b}; q^N)(q^N u^N; q^N)].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::cyc::rat;
use crate::exactnum::qseries::lseries;
use crate::exactnum::{CycNum, Laurent, Point, QSeries, RatFunc, Subst};

/// The hatted function ŵ_ab expanded to a fixed order in q.
#[derive(Clone, Debug)]
pub struct WFunction {
    pub n: u32,
    pub a: usize,
    pub b: usize,
    /// q^k coefficient is numerators[k] / (u^N − 1).
    pub numerators: Vec<Laurent>,
    pub series: QSeries,
}

/// Whether values are hatted (w/2πi) or carry the full factor 2πi.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Hatted,
    Full,
}

fn check_indices(n: u32, a: usize, b: usize) -> Result<()> {
    if n < 2 || a >= n as usize || b >= n as usize {
        return Err(Error::InvalidInput(format!("indices ({a},{b}) out of range for N={n}")));
    }
    if a == 0 && b == 0 {
        return Err(Error::InvalidInput("w_00 is not part of the basis".into()));
    }
    Ok(())
}

/// u^N − 1
pub fn un_minus_one(n: u32) -> Laurent {
    Laurent::monomial(CycNum::one(n), n as i64).add(&Laurent::constant(-CycNum::one(n)))
}

fn product_numerators(n: u32, a: usize, b: usize, order: usize) -> Result<Vec<Laurent>> {
    let nn = n as usize;
    let ni = n as i64;
    let eb = CycNum::eps_pow(n, b as i64);
    let emb = CycNum::eps_pow(n, -(b as i64));
    let one = CycNum::one(n);
    let num =
        lseries::mul(&lseries::pochhammer(&eb, -ni, nn - a, nn, order), &lseries::pochhammer(&emb, ni, a, nn, order));
    let den = lseries::mul(
        &lseries::mul(&lseries::pochhammer(&eb, 0, nn - a, nn, order), &lseries::pochhammer(&one, -ni, nn, nn, order)),
        &lseries::mul(&lseries::pochhammer(&emb, 0, a, nn, order), &lseries::pochhammer(&one, ni, nn, nn, order)),
    );
    let prod = lseries::mul(&num, &lseries::inv(&den)?);
    Ok(prod.into_iter().map(|l| l.shift(a as i64)).collect())
}

fn build(n: u32, a: usize, b: usize, order: usize) -> Result<WFunction> {
    check_indices(n, a, b)?;
    let numerators = product_numerators(n, a, b, order)?;
    let series = QSeries::from_laurent_series(&numerators, &un_minus_one(n))?;
    Ok(WFunction { n, a, b, numerators, series })
}

type Cache = Mutex<HashMap<(u32, usize, usize, usize), Arc<WFunction>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// ŵ_ab to order q^order, memoized.
pub fn wmul_series(n: u32, a: usize, b: usize, order: usize) -> Result<Arc<WFunction>> {
    let key = (n, a, b, order);
    if let Some(w) = cache().lock().expect("cache poisoned").get(&key) {
        return Ok(w.clone());
    }
    let w = Arc::new(build(n, a, b, order)?);
    cache().lock().expect("cache poisoned").insert(key, w.clone());
    Ok(w)
}

/// The q = 0 limit: u^a/(u^N−1) for a ≠ 0, (1−ε^b)^{-1}(u^N−ε^b)/(u^N−1) for a = 0.
pub fn wmul_q0(n: u32, a: usize, b: usize) -> Result<RatFunc> {
    check_indices(n, a, b)?;
    let den = un_minus_one(n);
    if a != 0 {
        return RatFunc::new(Laurent::monomial(CycNum::one(n), a as i64), den);
    }
    let eb = CycNum::eps_pow(n, b as i64);
    let num = Laurent::monomial(CycNum::one(n), n as i64).add(&Laurent::constant(-&eb));
    let c = (&CycNum::one(n) - &eb).inv()?;
    Ok(RatFunc::new(num, den)?.scale(&c))
}

/// 1/Π_{j=1}^{k}(1 − q^{Nj}) by multiplying geometric series.
fn inv_qpoch(n: u32, k: usize, order: usize) -> Vec<Laurent> {
    let mut acc = lseries::one(n, order);
    for j in 1..=k {
        let step = n as usize * j;
        let mut geo = vec![Laurent::zero(n); order + 1];
        let mut e = 0;
        while e <= order {
            geo[e] = Laurent::one(n);
            e += step;
        }
        acc = lseries::mul(&acc, &geo);
    }
    acc
}

/// Σ_k (−1)^k p^{k(k−1)/2} x^k/(p;p)_k (numerator) or Σ_k x^k/(p;p)_k
/// (denominator) with x = c u^d q^{e0}, p = q^N and e0 > 0.
fn euler_sum(n: u32, c: &CycNum, d: i64, e0: usize, order: usize, numerator: bool) -> Vec<Laurent> {
    let nn = n as usize;
    let mut out = vec![Laurent::zero(n); order + 1];
    for k in 0.. {
        let extra = if numerator { nn * k * k.saturating_sub(1) / 2 } else { 0 };
        let qpow = e0 * k + extra;
        if qpow > order {
            break;
        }
        let mut coef = c.pow(k as i64).expect("root of unity");
        if numerator && k % 2 == 1 {
            coef = -coef;
        }
        let mono = Laurent::monomial(coef, d * k as i64);
        for (m, l) in inv_qpoch(n, k, order - qpow).iter().enumerate() {
            if !l.is_zero() {
                out[qpow + m] = out[qpow + m].add(&l.mul(&mono));
            }
        }
    }
    out
}

/// Independent expansion: each Pochhammer factor through Euler's identities
/// (x;p)_∞ = Σ (−1)^k p^{k(k−1)/2} x^k/(p;p)_k and 1/(x;p)_∞ = Σ x^k/(p;p)_k.
///
/// Only valid for a ≠ 0, where every factor has a q-power in its argument.
pub fn wmul_oracle_numerators(n: u32, a: usize, b: usize, order: usize) -> Result<Vec<Laurent>> {
    check_indices(n, a, b)?;
    if a == 0 {
        return Err(Error::InvalidInput("the Euler oracle needs a ≠ 0".into()));
    }
    let nn = n as usize;
    let ni = n as i64;
    let eb = CycNum::eps_pow(n, b as i64);
    let emb = CycNum::eps_pow(n, -(b as i64));
    let one = CycNum::one(n);
    let factors = [
        euler_sum(n, &eb, -ni, nn - a, order, true),
        euler_sum(n, &emb, ni, a, order, true),
        euler_sum(n, &eb, 0, nn - a, order, false),
        euler_sum(n, &one, -ni, nn, order, false),
        euler_sum(n, &emb, 0, a, order, false),
        euler_sum(n, &one, ni, nn, order, false),
    ];
    let mut acc = lseries::one(n, order);
    for f in &factors {
        acc = lseries::mul(&acc, f);
    }
    Ok(acc.into_iter().map(|l| l.shift(a as i64)).collect())
}

/// Direct floating-point evaluation of the defining product (hatted).
pub fn eval_product(n: u32, a: usize, b: usize, q: Complex64, u: Complex64) -> Result<Complex64> {
    check_indices(n, a, b)?;
    if q.norm() >= 1.0 {
        return Err(Error::InvalidInput("|q| must be < 1".into()));
    }
    let ni = n as i32;
    let eps = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
    let eb = eps.powi(b as i32);
    let un = u.powi(ni);
    let p = q.powi(ni);
    let poch = |x: Complex64| {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut t = x;
        for _ in 0..10_000 {
            acc *= Complex64::new(1.0, 0.0) - t;
            if t.norm() < 1e-18 {
                break;
            }
            t *= p;
        }
        acc
    };
    let qa = q.powi(a as i32);
    let qna = q.powi(ni - a as i32);
    let den0 = un - 1.0;
    if den0.norm() < 1e-14 {
        return Err(Error::PoleProximity(format!("u^N − 1 vanishes at u = {u}")));
    }
    let num = poch(qna * eb / un) * poch(qa / eb * un);
    let den = poch(qna * eb) * poch(p / un) * poch(qa / eb) * poch(p * un);
    if den.norm() < 1e-300 {
        return Err(Error::PoleProximity(format!("product denominator vanishes at u = {u}")));
    }
    Ok(u.powi(a as i32) / den0 * num / den)
}

impl WFunction {
    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// Value of the truncated series; `Full` multiplies by 2πi.
    pub fn eval(&self, q: Complex64, u: Complex64, tol_den: f64, norm: Normalization) -> Result<Complex64> {
        let v = self.series.eval_complex(u, q, tol_den)?;
        Ok(match norm {
            Normalization::Hatted => v,
            Normalization::Full => v * Complex64::new(0.0, 2.0 * std::f64::consts::PI),
        })
    }

    /// Each coefficient is u^a (u^N − 1)^{-1} p(u^N, u^{-N}).
    pub fn has_canonical_shape(&self) -> bool {
        self.numerators.iter().all(|l| l.exponents_congruent(self.a as i64, self.n as i64))
    }
}

/// Outcome of the quasi-periodicity checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicityReport {
    /// ŵ(q; εu) = ε^a ŵ(q; u) verified through this q-order.
    pub eps_order: usize,
    /// ŵ(q; qu) = ε^b ŵ(q; u) verified through this q-order.
    pub q_order: usize,
    /// Res_{u=1} of the q^0 coefficient equals 1/N.
    pub residue_ok: bool,
}

/// Smallest q-order at which a term of F = ŵ·θ(u^N) of order greater than
/// `known` can land after u ↦ qu. In F the power u^{a+Nj} first appears at
/// order Nj(j−1)/2 + aj and moves up by a + Nj.
fn first_unknown_landing(n: u32, a: usize, known: usize) -> i64 {
    let ni = n as i64;
    let ai = a as i64;
    let mut best = i64::MAX;
    let lim = known as i64 + 4 * ni + 64;
    for order in (known as i64 + 1)..=lim {
        let mut j = 0i64;
        while ni * (j - 1) * (j - 2) / 2 + ai * (j - 1) <= order {
            j -= 1;
        }
        best = best.min(order + ai + ni * j);
    }
    best
}

/// θ(X) = (X; q^N)(q^N/X; q^N) with X = u^N, as a Laurent-coefficient series.
fn theta_un(n: u32, order: usize) -> Vec<Laurent> {
    let nn = n as usize;
    let one = CycNum::one(n);
    lseries::mul(
        &lseries::pochhammer(&one, n as i64, 0, nn, order),
        &lseries::pochhammer(&one, -(n as i64), nn, nn, order),
    )
}

/// Verifies ŵ(q;εu) = ε^a ŵ and ŵ(q;qu) = ε^b ŵ.
///
/// The second identity cannot be checked on the truncated ŵ directly:
/// 1/(q^N u^{−N}; q^N) contributes u^{−Nm} q^{Nm}, which u ↦ qu sends to
/// q^0 for every m. Clearing by θ(u^N) gives F = ŵ·θ(u^N) with
/// F(q; qu) = −ε^b u^{−N} F(q; u), and F has the support bound used in
/// [`first_unknown_landing`], so the comparison is exact up to a computable order.
pub fn check_quasiperiodicity(n: u32, a: usize, b: usize, target: usize) -> Result<PeriodicityReport> {
    let w = wmul_series(n, a, b, target)?;
    let eps = CycNum::eps_pow(n, a as i64);
    let lhs = w.series.subst(Subst::Eps(1))?;
    let rhs = w.series.scale(&eps);
    if let Some(k) = lhs.first_mismatch(&rhs) {
        return Err(Error::CheckFailed(format!("u->eps u fails at q^{k} for ({a},{b})")));
    }
    let eps_order = w.order();

    let mut internal = target + 2;
    let q_order = loop {
        let wi = wmul_series(n, a, b, internal)?;
        let theta = theta_un(n, internal);
        let prod = lseries::mul(&wi.numerators, &theta);
        let den = un_minus_one(n);
        let mut f = Vec::with_capacity(prod.len());
        for (k, l) in prod.iter().enumerate() {
            let r = RatFunc::new(l.clone(), den.clone())?;
            if !r.is_laurent() {
                return Err(Error::CheckFailed(format!("ŵ·θ(u^N) is not Laurent at q^{k}")));
            }
            f.push(r);
        }
        let fs = QSeries::from_coeffs(n, f);
        let shifted = fs.subst(Subst::Q)?;
        let limit = first_unknown_landing(n, a, internal) - 1;
        let verified = (shifted.order() as i64).min(limit);
        if verified >= target as i64 || internal > 8 * target + 32 {
            let c = -CycNum::eps_pow(n, b as i64);
            let expect = fs.mul_rat(&RatFunc::monomial(n, -(n as i64)))?.scale(&c);
            let v = verified.max(0) as usize;
            if let Some(k) = shifted.truncate(v).first_mismatch(&expect.truncate(v)) {
                return Err(Error::CheckFailed(format!("u->qu fails at q^{k} for ({a},{b})")));
            }
            break v;
        }
        internal += 2;
    };

    let res = wmul_q0(n, a, b)?.expand(&Point::Finite(CycNum::one(n)), 2)?;
    let residue_ok = res.val == -1 && res.coeffs[0] == CycNum::from_rat(n, rat(1, n as i64));
    Ok(PeriodicityReport { eps_order, q_order, residue_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q0_coefficient_matches_closed_form() {
        for n in 2..=4u32 {
            for a in 0..n as usize {
                for b in 0..n as usize {
                    if (a, b) == (0, 0) {
                        continue;
                    }
                    let w = wmul_series(n, a, b, 2).unwrap();
                    assert_eq!(w.series.coeff(0), &wmul_q0(n, a, b).unwrap(), "N={n} ({a},{b})");
                    assert!(w.has_canonical_shape());
                }
            }
        }
    }

    #[test]
    fn rejects_w00() {
        assert!(wmul_series(2, 0, 0, 3).is_err());
    }

    #[test]
    fn euler_oracle_agrees() {
        for (n, a, b) in [(2, 1, 0), (2, 1, 1), (3, 1, 2), (3, 2, 0)] {
            let w = wmul_series(n, a, b, 6).unwrap();
            let o = wmul_oracle_numerators(n, a, b, 6).unwrap();
            assert_eq!(lseries::first_mismatch(&w.numerators, &o), None, "N={n} ({a},{b})");
        }
    }

    #[test]
    fn periodicity_n2() {
        for (a, b) in [(1, 0), (0, 1), (1, 1)] {
            let r = check_quasiperiodicity(2, a, b, 8).unwrap();
            assert!(r.q_order >= 8 && r.eps_order == 8 && r.residue_ok);
        }
    }

    #[test]
    fn series_value_matches_product() {
        let w = wmul_series(2, 1, 0, 24).unwrap();
        let q = Complex64::new(0.1, 0.0);
        let u = Complex64::new(1.3, 0.4);
        let s = w.eval(q, u, 1e-12, Normalization::Hatted).unwrap();
        let p = eval_product(2, 1, 0, q, u).unwrap();
        assert!((s - p).norm() < 1e-10, "{s} vs {p}");
    }
}
