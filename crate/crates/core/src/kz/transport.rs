//! Adaptive fourth-order Runge–Kutta transport of dv/dz = A(z) v along a
//! polygonal path in the complex z-plane, with step-doubling error control.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::rmatrix::CMat;
use crate::error::{Error, Result};

pub type CVec = DVector<Complex64>;

#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    #[serde(serialize_with = "ser_cvec")]
    pub v: CVec,
    pub steps: usize,
    pub rejected: usize,
    /// sum of the accepted local error estimates
    pub error_estimate: f64,
}

fn ser_cvec<S: serde::Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v.iter() {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

const MIN_STEP: f64 = 1e-12;

fn rk4(a: &impl Fn(Complex64) -> Result<CMat>, z: Complex64, dz: Complex64, v: &CVec) -> Result<CVec> {
    let f = |z: Complex64, v: &CVec| -> Result<CVec> { Ok(a(z)? * v * dz) };
    let half = dz * 0.5;
    let k1 = f(z, v)?;
    let k2 = f(z + half, &(v + &k1 * Complex64::new(0.5, 0.0)))?;
    let k3 = f(z + half, &(v + &k2 * Complex64::new(0.5, 0.0)))?;
    let k4 = f(z + dz, &(v + &k3))?;
    Ok(v + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) / Complex64::new(6.0, 0.0))
}

/// Transports `v0` along the segments path[0] → path[1] → …; each step is
/// accepted when the full step and two half steps agree to `tol` (relative to ‖v‖).
pub fn transport(
    a: impl Fn(Complex64) -> Result<CMat>,
    path: &[Complex64],
    v0: &CVec,
    tol: f64,
) -> Result<TransportReport> {
    if path.len() < 2 {
        return Err(Error::InvalidInput("a path needs at least two vertices".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let mut v = v0.clone();
    let (mut steps, mut rejected, mut err) = (0, 0, 0.0);
    for seg in path.windows(2) {
        let (z0, z1) = (seg[0], seg[1]);
        let len = (z1 - z0).norm();
        if len == 0.0 {
            continue;
        }
        let dir = (z1 - z0) / len;
        let mut s = 0.0;
        let mut h = (len / 16.0).min(0.05);
        while s < len {
            h = h.min(len - s);
            let z = z0 + dir * s;
            let full = rk4(&a, z, dir * h, &v)?;
            let mid = rk4(&a, z, dir * (h / 2.0), &v)?;
            let two = rk4(&a, z + dir * (h / 2.0), dir * (h / 2.0), &mid)?;
            let e = (&two - &full).norm() / 15.0;
            let scale = v.norm().max(1.0);
            if e <= tol * scale * h.max(1e-3) {
                // Richardson-improved value
                v = &two + (&two - &full) / Complex64::new(15.0, 0.0);
                s += h;
                steps += 1;
                err += e;
                if e < tol * scale * h / 32.0 {
                    h *= 2.0;
                }
            } else {
                rejected += 1;
                h /= 2.0;
                if h < MIN_STEP {
                    return Err(Error::PoleProximity(format!("step size underflow near z = {z}")));
                }
            }
        }
    }
    Ok(TransportReport { v, steps, rejected, error_estimate: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kz::KzSystem;
    use crate::twistalg::FinRep;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_connection_is_exponential() {
        let m = CMat::from_row_slice(2, 2, &[c(0.1, 0.2), c(0.5, 0.0), c(-0.3, 0.1), c(0.0, -0.4)]);
        let v0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let dz = c(1.0, 0.5);
        let r = transport(|_| Ok(m.clone()), &[c(0.0, 0.0), dz], &v0, 1e-12).unwrap();
        let exact = (&m * dz).exp() * &v0;
        assert!((r.v - exact).norm() < 1e-10);
    }

    #[test]
    fn closed_loop_and_reversal() {
        let s = KzSystem::new(2, 1.0, vec![FinRep::Fund; 2]).unwrap();
        let u = vec![c(1.5, 0.2), c(0.4, -0.7)];
        let z0 = u[0].ln();
        let v0 = CVec::from_fn(4, |i, _| c(1.0 + i as f64, 0.5));
        let square = [z0, z0 + c(0.1, 0.0), z0 + c(0.1, 0.1), z0 + c(0.0, 0.1), z0];
        let r = s.transport(0, &u, &square, &v0, 1e-10).unwrap();
        assert!((&r.v - &v0).norm() < 1e-6);
        let fwd = s.transport(0, &u, &[z0, z0 + c(0.2, 0.15)], &v0, 1e-11).unwrap();
        let back = s.transport(0, &u, &[z0 + c(0.2, 0.15), z0], &fwd.v, 1e-11).unwrap();
        assert!((back.v - &v0).norm() < 1e-8);
    }

    #[test]
    fn underflow_at_a_pole() {
        // A(z) = 1/z blows up at 0
        let a = |z: Complex64| Ok(CMat::from_element(1, 1, Complex64::new(1.0, 0.0) / (z * z * z)));
        let v0 = CVec::from_element(1, c(1.0, 0.0));
        assert!(transport(a, &[c(-1.0, 0.0), c(1.0, 0.0)], &v0, 1e-10).is_err());
    }
}
