//! r(u) = Σ_{(a,b)≠(0,0)} ŵ_ab(q; u) J_ab ⊗ J^{ab}, its classical Yang–Baxter
//! residual and the q → 0 degeneration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::RatFunc;
use crate::twistalg::{dual_j, j_basis, j_indices, GMat};
use crate::wfun::{wmul_q0, wmul_series, Normalization};

pub type CMat = DMatrix<Complex64>;

/// Denominator threshold for numerical evaluation near poles.
pub const POLE_TOL: f64 = 1e-9;

pub fn to_cmat(x: &GMat) -> CMat {
    let s = x.size();
    CMat::from_fn(s, s, |i, j| x.get(i, j).to_complex())
}

/// Which coefficient functions enter r.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spectral {
    /// q = 0: the exact rational functions
    Trig,
    /// ŵ_ab(q; u) from the q-series truncated at q^order
    Elliptic { q: Complex64, order: usize },
}

/// The ingredients of r for one N: the index pairs, J_ab, J^{ab} and the
/// exact q = 0 coefficients with their u d/du derivatives.
#[derive(Clone, Debug)]
pub struct RMatrix {
    pub n: u32,
    pub terms: Vec<RTerm>,
}

#[derive(Clone, Debug)]
pub struct RTerm {
    pub a: usize,
    pub b: usize,
    pub j: CMat,
    pub jdual: CMat,
    pub w0: RatFunc,
    pub dw0: RatFunc,
}

impl RMatrix {
    pub fn new(n: u32) -> Result<Self> {
        let mut terms = Vec::new();
        for (a, b) in j_indices(n) {
            let w0 = wmul_q0(n, a, b)?;
            let dw0 = w0.euler()?;
            terms.push(RTerm {
                a,
                b,
                j: to_cmat(&j_basis(n, a as i64, b as i64)),
                jdual: to_cmat(&dual_j(n, a as i64, b as i64)),
                w0,
                dw0,
            });
        }
        Ok(RMatrix { n, terms })
    }

    /// Coefficients ŵ_ab at u, in the order of `terms`.
    pub fn coefficients(&self, u: Complex64, spec: Spectral) -> Result<Vec<Complex64>> {
        self.terms
            .iter()
            .map(|t| match spec {
                Spectral::Trig => t.w0.eval_complex(u, POLE_TOL),
                Spectral::Elliptic { q, order } => {
                    wmul_series(self.n, t.a, t.b, order)?.eval(q, u, POLE_TOL, Normalization::Hatted)
                }
            })
            .collect()
    }

    /// u d/du of the q = 0 coefficients.
    pub fn derivative_coefficients(&self, u: Complex64) -> Result<Vec<Complex64>> {
        self.terms.iter().map(|t| t.dw0.eval_complex(u, POLE_TOL)).collect()
    }

    /// Σ c_ab J_ab ⊗ J^{ab} on C^N ⊗ C^N.
    pub fn assemble(&self, c: &[Complex64]) -> CMat {
        let nn = self.n as usize;
        let mut r = CMat::zeros(nn * nn, nn * nn);
        for (t, c) in self.terms.iter().zip(c) {
            r += t.j.kronecker(&t.jdual) * *c;
        }
        r
    }

    pub fn eval(&self, u: Complex64, spec: Spectral) -> Result<CMat> {
        Ok(self.assemble(&self.coefficients(u, spec)?))
    }

    /// u d/du r at q = 0.
    pub fn eval_derivative(&self, u: Complex64) -> Result<CMat> {
        Ok(self.assemble(&self.derivative_coefficients(u)?))
    }
}

/// Places an operator on factors (p, q) of (C^N)^{⊗3}; `r` acts on C^N ⊗ C^N
/// with the first tensor factor going to slot p.
pub fn embed3(r: &CMat, n: usize, p: usize, q: usize) -> CMat {
    let d = n * n * n;
    let digits = |x: usize| [x / (n * n), (x / n) % n, x % n];
    CMat::from_fn(d, d, |row, col| {
        let (a, b) = (digits(row), digits(col));
        let other = 3 - p - q;
        if a[other] != b[other] {
            return Complex64::new(0.0, 0.0);
        }
        r[(a[p] * n + a[q], b[p] * n + b[q])]
    })
}

/// ‖[r12(u12), r13(u13)] + [r12(u12), r23(u23)] + [r13(u13), r23(u23)]‖_F with u13 = u12·u23.
pub fn cybe_residual(r: impl Fn(Complex64) -> Result<CMat>, n: usize, u12: Complex64, u23: Complex64) -> Result<f64> {
    let r12 = embed3(&r(u12)?, n, 0, 1);
    let r13 = embed3(&r(u12 * u23)?, n, 0, 2);
    let r23 = embed3(&r(u23)?, n, 1, 2);
    let comm = |x: &CMat, y: &CMat| x * y - y * x;
    Ok((comm(&r12, &r13) + comm(&r12, &r23) + comm(&r13, &r23)).norm())
}

/// ‖r_ell(q, u) − r_trig(u)‖_F for each q and the least-squares slope of the
/// log–log data.
pub fn degeneration(n: u32, u: Complex64, qs: &[f64], order: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    if qs.len() < 2 {
        return Err(Error::InvalidInput("at least two q values are needed for a slope".into()));
    }
    let rm = RMatrix::new(n)?;
    let rt = rm.eval(u, Spectral::Trig)?;
    let mut data = Vec::new();
    for &q in qs {
        let re = rm.eval(u, Spectral::Elliptic { q: Complex64::new(q, 0.0), order })?;
        data.push((q, (re - &rt).norm()));
    }
    let pts: Vec<(f64, f64)> = data.iter().map(|(q, d)| (q.ln(), d.ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok((data, num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matches_direct_double_sum() {
        let rm = RMatrix::new(3).unwrap();
        let u = c(1.3, 0.7);
        let r = rm.eval(u, Spectral::Trig).unwrap();
        let coeff = rm.coefficients(u, Spectral::Trig).unwrap();
        let n = 3;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let mut s = c(0.0, 0.0);
                        for (t, w) in rm.terms.iter().zip(&coeff) {
                            s += w * t.j[(i, j)] * t.jdual[(k, l)];
                        }
                        assert!((s - r[(i * n + k, j * n + l)]).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_and_numeric_evaluation_agree() {
        use crate::exactnum::CycNum;
        let rm = RMatrix::new(2).unwrap();
        for t in &rm.terms {
            let x = CycNum::from_int(2, 3);
            let exact = t.w0.eval(&x).unwrap().to_complex();
            let num = t.w0.eval_complex(c(3.0, 0.0), POLE_TOL).unwrap();
            assert!((exact - num).norm() < 1e-12);
        }
    }

    #[test]
    fn cybe_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2u32, 3] {
            let rm = RMatrix::new(n).unwrap();
            for _ in 0..5 {
                let u12 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                let u23 = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                let res = cybe_residual(|u| rm.eval(u, Spectral::Trig), n as usize, u12, u23).unwrap();
                assert!(res < 1e-9, "N={n} residual {res}");
            }
        }
    }

    #[test]
    fn cybe_zero_and_scaling() {
        let zero = |_u: Complex64| Ok(CMat::zeros(4, 4));
        assert_eq!(cybe_residual(zero, 2, c(2.0, 0.0), c(0.5, 0.3)).unwrap(), 0.0);
        // bilinearity: a non-solution scaled by s has residual scaled by s²
        let m = CMat::from_fn(4, 4, |i, j| c((i * 4 + j) as f64, (i + 2 * j) as f64 * 0.1));
        let base = cybe_residual(|u| Ok(&m * u), 2, c(1.5, 0.2), c(0.7, -0.4)).unwrap();
        let scaled = cybe_residual(|u| Ok(&m * u * c(3.0, 0.0)), 2, c(1.5, 0.2), c(0.7, -0.4)).unwrap();
        assert!(base > 0.0);
        assert!((scaled / base - 9.0).abs() < 1e-9);
    }

    #[test]
    fn twist_equivariance() {
        // J_ab ⊗ J^{ab} has Adγ ⊗ 1 eigenvalue ε^a, and ŵ_ab(εu) = ε^a ŵ_ab(u)
        let n = 3u32;
        let rm = RMatrix::new(n).unwrap();
        let eps = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
        let (_, gamma) = crate::twistalg::make_twist_pair(n).unwrap();
        let g = to_cmat(&gamma);
        let gi = to_cmat(&gamma.inverse().unwrap());
        let id = CMat::identity(3, 3);
        let u = c(0.8, 1.1);
        let lhs = rm.eval(u * eps, Spectral::Trig).unwrap();
        let rhs = g.kronecker(&id) * rm.eval(u, Spectral::Trig).unwrap() * gi.kronecker(&id);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unitarity() {
        let n = 3;
        let rm = RMatrix::new(n).unwrap();
        let u = c(1.7, -0.4);
        let r = rm.eval(u, Spectral::Trig).unwrap();
        let rinv = rm.eval(u.inv(), Spectral::Trig).unwrap();
        let nn = n as usize;
        let swap =
            CMat::from_fn(nn * nn, nn * nn, |i, j| if j == (i % nn) * nn + i / nn { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!((&swap * rinv * &swap + r).norm() < 1e-12);
    }

    #[test]
    fn degenerates_linearly() {
        let (data, slope) = degeneration(2, c(2.0, 0.0), &[1e-2, 1e-3, 1e-4], 8).unwrap();
        assert!(data.iter().all(|(_, d)| *d > 0.0));
        assert!(slope >= 0.9, "slope {slope}");
    }
}
