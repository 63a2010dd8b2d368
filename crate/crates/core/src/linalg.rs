//! Small dense linear algebra over a [`Scalar`] field.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Result, WeilError};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: S) {
        let idx = r * self.cols + c;
        let cur = std::mem::replace(&mut self.data[idx], S::zero());
        self.data[idx] = cur + v;
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, a.clone() * b.clone());
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &S) -> Matrix<S> {
        let data = self.data.iter().map(|a| a.clone() * c.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix<S> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(tol))
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self, tol: f64) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for i in r..self.rows {
                let v = self.get(i, c);
                if v.is_negligible(tol) {
                    continue;
                }
                let w = v.pivot_weight();
                if best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((i, w));
                }
            }
            let Some((p, _)) = best else { continue };
            self.swap_rows(r, p);
            let inv = S::one() / self.get(r, c).clone();
            for j in c..self.cols {
                let v = self.get(r, j).clone() * inv.clone();
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let pv = self.get(r, j);
                    if pv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j).clone() - f.clone() * pv.clone();
                    self.set(i, j, v);
                }
                if !S::EXACT {
                    self.set(i, c, S::zero());
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.clone().rref(tol).len()
    }

    /// Basis of the right null space.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<S>> {
        let mut m = self.clone();
        let pivots = m.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.get(r, f).clone();
                }
                v
            })
            .collect()
    }

    /// Solve `self * x = b`; returns one solution and the null space dimension.
    pub fn solve(&self, b: &[S], tol: f64) -> Result<(Vec<S>, usize)> {
        assert_eq!(b.len(), self.rows);
        let col = Matrix { rows: self.rows, cols: 1, data: b.to_vec() };
        let mut aug = self.hstack(&col);
        let pivots = aug.rref(tol);
        if pivots.last() == Some(&self.cols) {
            return Err(WeilError::LinearSystem("inconsistent system".into()));
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        Ok((x, self.cols - pivots.len()))
    }

    /// Solve a square nonsingular system; a singular matrix is an error.
    pub fn solve_unique(&self, b: &[S], tol: f64) -> Result<Vec<S>> {
        let (x, nullity) = self.solve(b, tol)?;
        if nullity != 0 || self.rows < self.cols {
            return Err(WeilError::LinearSystem("singular system".into()));
        }
        Ok(x)
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }
}

/// Largest singular value; an empty map has norm 0.
pub fn operator_norm<S: Scalar>(m: &Matrix<S>) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let a = m.to_nalgebra();
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Operator norm by power iteration on AᴴA; independent check of [`operator_norm`].
pub fn operator_norm_power<S: Scalar>(m: &Matrix<S>, iterations: usize) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let a = m.to_nalgebra();
    let ata = a.adjoint() * &a;
    // deterministic start vector with no special alignment
    let mut v = nalgebra::DVector::from_fn(m.cols(), |i, _| Complex::new(1.0 + 0.37 * i as f64, 0.11 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = &ata * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        lambda = n / v.norm();
        v = w / Complex::new(n, 0.0);
    }
    lambda.sqrt()
}

/// Exact eigenvalue certificate: rank of (A − λ) for each candidate and the product test.
pub fn spectrum_certificate<S: Scalar>(m: &Matrix<S>, candidates: &[S], tol: f64) -> (Vec<usize>, bool) {
    let n = m.rows();
    let id = Matrix::<S>::identity(n);
    let nullities = candidates
        .iter()
        .map(|l| n - m.sub(&id.scale(l)).rank(tol))
        .collect();
    let mut prod = Matrix::<S>::identity(n);
    for l in candidates {
        prod = prod.mul(&m.sub(&id.scale(l)));
    }
    (nullities, prod.is_zero(tol))
}
