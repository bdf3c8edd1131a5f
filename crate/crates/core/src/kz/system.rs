//! The trigonometric KZ connection ∇_i = ∂/∂z_i − A_i with
//! A_i = κ^{-1} Σ_{j≠i} r^{(ij)}(u_i/u_j), u_i = exp(z_i), κ = k + N.

use nalgebra::DVector;
use num_complex::Complex64;

use super::rmatrix::{to_cmat, CMat, RMatrix, Spectral};
use super::transport::{transport, TransportReport};
use crate::error::{Error, Result};
use crate::twistalg::{FinRep, GMat};

/// ρ(X) on V.
pub fn rep_matrix(rep: FinRep, x: &GMat) -> CMat {
    match rep {
        FinRep::Trivial => CMat::zeros(1, 1),
        FinRep::Fund => to_cmat(x),
        FinRep::AntiFund => -to_cmat(x).transpose(),
    }
}

#[derive(Clone, Debug)]
pub struct KzSystem {
    pub n: u32,
    pub kappa: f64,
    pub reps: Vec<FinRep>,
    rm: RMatrix,
    /// per term, per site: ρ_site(J_ab) and ρ_site(J^{ab})
    local: Vec<Vec<(CMat, CMat)>>,
}

impl KzSystem {
    pub fn new(n: u32, level: f64, reps: Vec<FinRep>) -> Result<Self> {
        let kappa = level + n as f64;
        if kappa.abs() < 1e-12 {
            return Err(Error::InvalidInput("the critical level k = −N is excluded".into()));
        }
        if reps.is_empty() {
            return Err(Error::InvalidInput("at least one module is required".into()));
        }
        let rm = RMatrix::new(n)?;
        let local = rm
            .terms
            .iter()
            .map(|t| {
                let j = crate::twistalg::j_basis(n, t.a as i64, t.b as i64);
                let jd = crate::twistalg::dual_j(n, t.a as i64, t.b as i64);
                reps.iter().map(|r| (rep_matrix(*r, &j), rep_matrix(*r, &jd))).collect()
            })
            .collect();
        Ok(KzSystem { n, kappa, reps, rm, local })
    }

    pub fn dim(&self) -> usize {
        self.reps.iter().map(|r| r.dim(self.n)).product()
    }

    /// X on site i, Y on site j, identity elsewhere.
    fn embed(&self, i: usize, x: &CMat, j: usize, y: &CMat) -> CMat {
        let mut out = CMat::identity(1, 1);
        for (s, r) in self.reps.iter().enumerate() {
            let d = r.dim(self.n);
            let f = if s == i {
                x.clone()
            } else if s == j {
                y.clone()
            } else {
                CMat::identity(d, d)
            };
            out = out.kronecker(&f);
        }
        out
    }

    /// Σ_ab c_ab ρ_i(J_ab) ρ_j(J^{ab}).
    fn r_ij(&self, i: usize, j: usize, c: &[Complex64]) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (loc, c) in self.local.iter().zip(c) {
            out += self.embed(i, &loc[i].0, j, &loc[j].1) * *c;
        }
        out
    }

    fn check_points(&self, u: &[Complex64]) -> Result<()> {
        if u.len() != self.reps.len() {
            return Err(Error::InvalidInput(format!("{} points for {} modules", u.len(), self.reps.len())));
        }
        for (i, a) in u.iter().enumerate() {
            if a.norm() < 1e-12 {
                return Err(Error::InvalidInput("points must be nonzero".into()));
            }
            for b in &u[i + 1..] {
                let x = (a / b).powu(self.n);
                if (x - 1.0).norm() < 1e-9 {
                    return Err(Error::InvalidInput("points must lie in distinct ε-orbits".into()));
                }
            }
        }
        Ok(())
    }

    /// A_i at the points u.
    pub fn operator(&self, i: usize, u: &[Complex64]) -> Result<CMat> {
        self.check_points(u)?;
        let d = self.dim();
        let mut a = CMat::zeros(d, d);
        for j in 0..u.len() {
            if j != i {
                let c = self.rm.coefficients(u[i] / u[j], Spectral::Trig)?;
                a += self.r_ij(i, j, &c);
            }
        }
        Ok(a / Complex64::new(self.kappa, 0.0))
    }

    /// ∂A_i/∂z_j, from the exact u d/du of the coefficients.
    pub fn operator_derivative(&self, i: usize, j: usize, u: &[Complex64]) -> Result<CMat> {
        self.check_points(u)?;
        let d = self.dim();
        let mut a = CMat::zeros(d, d);
        for k in 0..u.len() {
            if k == i || (j != i && k != j) {
                continue;
            }
            let c = self.rm.derivative_coefficients(u[i] / u[k])?;
            let sign = if j == i { 1.0 } else { -1.0 };
            a += self.r_ij(i, k, &c) * Complex64::new(sign, 0.0);
        }
        Ok(a / Complex64::new(self.kappa, 0.0))
    }

    /// ‖∂_i A_j − ∂_j A_i − [A_i, A_j]‖_F.
    pub fn flatness_residual(&self, i: usize, j: usize, u: &[Complex64]) -> Result<f64> {
        let ai = self.operator(i, u)?;
        let aj = self.operator(j, u)?;
        let dij = self.operator_derivative(j, i, u)?;
        let dji = self.operator_derivative(i, j, u)?;
        Ok((dij - dji - (&ai * &aj - &aj * &ai)).norm())
    }

    /// Solves dv/dz_i = A_i v along the polygonal path of z_i values, the
    /// other points held fixed.
    pub fn transport(
        &self,
        i: usize,
        u: &[Complex64],
        path: &[Complex64],
        v0: &DVector<Complex64>,
        tol: f64,
    ) -> Result<TransportReport> {
        if i >= u.len() {
            return Err(Error::InvalidInput(format!("no point with index {i}")));
        }
        let a = |z: Complex64| {
            let mut p = u.to_vec();
            p[i] = z.exp();
            self.operator(i, &p)
        };
        transport(a, path, v0, tol)
    }
}
