//! Exact linear algebra over Q and Q(ε_N): dense Gaussian elimination for
//! small Gram matrices and incremental sparse elimination for relation
//! matrices.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::cyc::Rat;
use crate::exactnum::CycNum;

/// The operations elimination needs.
pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
}

impl Field for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.recip())
    }
}

impl Field for CycNum {
    fn zero_like(&self) -> Self {
        CycNum::zero(self.order())
    }
    fn one_like(&self) -> Self {
        CycNum::one(self.order())
    }
    fn is_zero(&self) -> bool {
        CycNum::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self> {
        CycNum::inv(self)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F>,
}

impl<F: Field> Dense<F> {
    pub fn zeros(rows: usize, cols: usize, zero: &F) -> Self {
        Dense { rows, cols, data: vec![zero.zero_like(); rows * cols] }
    }

    pub fn identity(n: usize, zero: &F) -> Self {
        let mut m = Self::zeros(n, n, zero);
        for i in 0..n {
            m.data[i * n + i] = zero.one_like();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let z = self.any_zero();
        let mut t = Self::zeros(self.cols, self.rows, &z);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    fn any_zero(&self) -> F {
        self.data.first().map(|x| x.zero_like()).expect("empty matrix has no scalar type")
    }

    pub fn mul(&self, o: &Dense<F>) -> Dense<F> {
        assert_eq!(self.cols, o.rows);
        let z = if self.data.is_empty() { o.any_zero() } else { self.any_zero() };
        let mut out = Self::zeros(self.rows, o.cols, &z);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).add(&a.mul(b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize], zero: &F) -> Dense<F> {
        let mut out = Self::zeros(rows.len(), cols.len(), zero);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> Result<(Dense<F>, Vec<usize>)> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv()?;
            for j in 0..m.cols {
                let v = m.get(r, j).mul(&inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j).sub(&f.mul(m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Ok((m, pivots))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    /// Indices of a maximal set of linearly independent rows (greedy, in order).
    pub fn independent_rows(&self) -> Result<Vec<usize>> {
        Ok(self.transpose().rref()?.1)
    }

    pub fn inverse(&self) -> Result<Dense<F>> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let z = self.any_zero();
        let mut aug = Self::zeros(n, 2 * n, &z);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, z.one_like());
        }
        let (r, piv) = aug.rref()?;
        if piv.len() < n || piv[n - 1] >= n {
            return Err(Error::DivisionByZero);
        }
        let mut out = Self::zeros(n, n, &z);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(out)
    }

    /// A basis of the right kernel {x : M x = 0}.
    pub fn kernel(&self, zero: &F) -> Result<Vec<Vec<F>>> {
        let (r, piv) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut out = Vec::new();
        for &f in &free {
            let mut v = vec![zero.zero_like(); self.cols];
            v[f] = zero.one_like();
            for (row, &p) in piv.iter().enumerate() {
                v[p] = r.get(row, f).neg();
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Sparse row as column → value.
pub type SparseRow<F> = BTreeMap<usize, F>;

/// Incremental row reduction that tracks only the rank.
///
/// Rows are reduced against stored pivot rows; a row that survives is
/// normalized and stored under its leading column.
#[derive(Clone, Debug)]
pub struct Eliminator<F: Field> {
    pivots: HashMap<usize, SparseRow<F>>,
}

impl<F: Field> Default for Eliminator<F> {
    fn default() -> Self {
        Eliminator { pivots: HashMap::new() }
    }
}

impl<F: Field> Eliminator<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` fully against the stored pivots.
    pub fn reduce(&self, mut row: SparseRow<F>) -> SparseRow<F> {
        let mut from = 0usize;
        loop {
            let next = row.range(from..).find(|(c, _)| self.pivots.contains_key(c)).map(|(c, v)| (*c, v.clone()));
            let Some((c, f)) = next else { break };
            let p = &self.pivots[&c];
            for (j, pv) in p {
                let v = row.get(j).map(|x| x.sub(&f.mul(pv))).unwrap_or_else(|| f.mul(pv).neg());
                if v.is_zero() {
                    row.remove(j);
                } else {
                    row.insert(*j, v);
                }
            }
            from = c + 1;
        }
        row
    }

    /// Adds a row; returns whether the rank grew.
    pub fn insert(&mut self, row: SparseRow<F>) -> Result<bool> {
        let row = self.reduce(row);
        let Some((&c, lead)) = row.iter().next() else {
            return Ok(false);
        };
        let inv = lead.inv()?;
        let norm: SparseRow<F> = row.iter().map(|(j, v)| (*j, v.mul(&inv))).collect();
        self.pivots.insert(c, norm);
        Ok(true)
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.pivots.contains_key(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::cyc::rat_int;

    fn m(rows: &[&[i64]]) -> Dense<Rat> {
        let r = rows.len();
        let c = rows[0].len();
        Dense { rows: r, cols: c, data: rows.iter().flat_map(|x| x.iter().map(|&v| rat_int(v))).collect() }
    }

    #[test]
    fn rank_inverse_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank().unwrap(), 2);
        assert_eq!(a.independent_rows().unwrap(), vec![0, 2]);
        let k = a.kernel(&rat_int(0)).unwrap();
        assert_eq!(k.len(), 1);
        let b = m(&[&[2, 1], &[1, 1]]);
        let bi = b.inverse().unwrap();
        assert_eq!(b.mul(&bi), Dense::identity(2, &rat_int(0)));
        assert!(m(&[&[1, 1], &[1, 1]]).inverse().is_err());
    }

    #[test]
    fn eliminator_matches_dense_rank() {
        let rows: Vec<Vec<i64>> = vec![vec![0, 1, 1, 0], vec![1, 1, 0, 0], vec![1, 2, 1, 0], vec![0, 0, 0, 5]];
        let mut e = Eliminator::new();
        for r in &rows {
            let s: SparseRow<Rat> =
                r.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| (j, rat_int(*v))).collect();
            e.insert(s).unwrap();
        }
        let d = m(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        assert_eq!(e.rank(), d.rank().unwrap());
    }
}
