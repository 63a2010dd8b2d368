//! Weight-graded Hodge linear algebra: bidegrees, the dual universal structures W_k*,
//! the embeddings γ_l and γ_r, weakly Hodge maps, and their totalization.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WeilError};
use crate::linalg::Matrix;
use crate::scalar::{Qc, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HodgeBidegree {
    pub p: i32,
    pub q: i32,
}

impl HodgeBidegree {
    pub const fn new(p: i32, q: i32) -> Self {
        HodgeBidegree { p, q }
    }
    pub fn weight(self) -> i32 {
        self.p + self.q
    }
    pub fn conj(self) -> Self {
        HodgeBidegree::new(self.q, self.p)
    }
    pub fn scale(self, k: i32) -> Self {
        HodgeBidegree::new(self.p * k, self.q * k)
    }
}

impl Add for HodgeBidegree {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        HodgeBidegree::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for HodgeBidegree {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        HodgeBidegree::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for HodgeBidegree {
    type Output = Self;
    fn neg(self) -> Self {
        HodgeBidegree::new(-self.p, -self.q)
    }
}

/// Whether a bidegree shift is admissible for a weakly Hodge map of weight `w`.
pub fn admissible_shift(shift: HodgeBidegree, w: i32) -> bool {
    shift.p >= 0 && shift.q >= 0 && shift.weight() == w
}

/// The basis u_0..u_k of W_k*; u_p has bidegree (−p, p−k) and conjugates to u_{k−p}.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct WkDualBasis {
    pub k: usize,
}

impl WkDualBasis {
    pub fn new(k: usize) -> Self {
        WkDualBasis { k }
    }
    pub fn dim(self) -> usize {
        self.k + 1
    }
    pub fn bidegree(self, p: usize) -> Result<HodgeBidegree> {
        self.check(p)?;
        Ok(HodgeBidegree::new(-(p as i32), p as i32 - self.k as i32))
    }
    pub fn conj(self, p: usize) -> Result<usize> {
        self.check(p)?;
        Ok(self.k - p)
    }
    fn check(self, p: usize) -> Result<()> {
        if p > self.k {
            return Err(WeilError::IndexOutOfRange { index: p as i64, max: self.k as i64 });
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// γ_l(u_p^{(a)}) = u_{p+1}^{(a+1)}, γ_r(u_p^{(a)}) = u_p^{(a+1)}. Returns (level, index).
pub fn gamma_embed(side: Side, level: usize, p: usize) -> Result<(usize, usize)> {
    WkDualBasis::new(level).check(p)?;
    Ok(match side {
        Side::Left => (level + 1, p + 1),
        Side::Right => (level + 1, p),
    })
}

/// The product W_a* ⊗ W_b* → W_{a+b}*, u_p·u_q = u_{p+q}.
pub fn can(a: usize, p: usize, b: usize, q: usize) -> Result<(usize, usize)> {
    WkDualBasis::new(a).check(p)?;
    WkDualBasis::new(b).check(q)?;
    Ok((a + b, p + q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapCupReport {
    pub p: usize,
    pub q: usize,
    pub dim_sum: usize,
    pub dim_intersection: usize,
    /// Indices j such that u_j^{(p+q)} spans the intersection, when it is a single basis vector.
    pub intersection_basis: Vec<usize>,
    pub exact: bool,
}

/// Exactness of 0 → ℂ → W_p* ⊕ W_q* → W_{p+q}* → 0, where W_p* enters through γ_r^q
/// and W_q* through γ_l^p. Checked by ranks of the embedding matrices.
pub fn verify_cap_cup(p: usize, q: usize) -> CapCupReport {
    let n = p + q + 1;
    let embed = |side: Side, level: usize, steps: usize| -> Matrix<Qc> {
        let mut m = Matrix::zeros(n, level + 1);
        for j in 0..=level {
            let (mut lv, mut idx) = (level, j);
            for _ in 0..steps {
                (lv, idx) = gamma_embed(side, lv, idx).expect("index in range");
            }
            debug_assert_eq!(lv, p + q);
            m.set(idx, j, Qc::from_i64(1));
        }
        m
    };
    let a = embed(Side::Right, p, q);
    let b = embed(Side::Left, q, p);
    let ra = a.rank(0.0);
    let rb = b.rank(0.0);
    let sum = a.hstack(&b).rank(0.0);
    let inter = ra + rb - sum;
    let intersection_basis = (0..n)
        .filter(|&j| (0..=p).any(|c| !a.get(j, c).is_zero()) && (0..=q).any(|c| !b.get(j, c).is_zero()))
        .collect();
    CapCupReport {
        p,
        q,
        dim_sum: sum,
        dim_intersection: inter,
        intersection_basis,
        exact: sum == n && inter == 1 && ra == p + 1 && rb == q + 1,
    }
}

/// A finite-dimensional pure Hodge structure given by a bigraded basis and a
/// conjugation involution on basis vectors (conj(e_i) = e_{conj[i]}).
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeSpace {
    pub weight: i32,
    pub basis: Vec<HodgeBidegree>,
    pub conj: Vec<usize>,
}

impl HodgeSpace {
    pub fn new(weight: i32, basis: Vec<HodgeBidegree>, conj: Vec<usize>) -> Result<Self> {
        if basis.iter().any(|b| b.weight() != weight) {
            return Err(WeilError::InvalidInput("basis bidegree has the wrong weight".into()));
        }
        if conj.len() != basis.len()
            || conj.iter().enumerate().any(|(i, &j)| j >= basis.len() || conj[j] != i || basis[j] != basis[i].conj())
        {
            return Err(WeilError::InvalidInput("conjugation is not a bidegree-swapping involution".into()));
        }
        Ok(HodgeSpace { weight, basis, conj })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Γ(V) = V ⊗ W_w*: basis (i, u_p), p = 0..=w; all of type (0,0) after dressing.
    pub fn gamma_dim(&self) -> usize {
        self.dim() * (self.weight.max(0) as usize + 1)
    }
}

/// A linear map between pure Hodge structures whose entries only shift bidegree by
/// (a,b) with a,b ≥ 0 and a+b equal to the weight difference.
#[derive(Clone, Debug, PartialEq)]
pub struct WeaklyHodgeMap<S> {
    pub source: HodgeSpace,
    pub target: HodgeSpace,
    /// target.dim() × source.dim()
    pub matrix: Matrix<S>,
}

impl<S: Scalar> WeaklyHodgeMap<S> {
    pub fn new(source: HodgeSpace, target: HodgeSpace, matrix: Matrix<S>) -> Result<Self> {
        let w = target.weight - source.weight;
        if w < 0 {
            return Err(WeilError::NegativeWeight);
        }
        assert_eq!((matrix.rows(), matrix.cols()), (target.dim(), source.dim()));
        for r in 0..matrix.rows() {
            for c in 0..matrix.cols() {
                if !matrix.get(r, c).is_zero() {
                    let shift = target.basis[r] - source.basis[c];
                    if !admissible_shift(shift, w) {
                        return Err(WeilError::NotWeaklyHodge(shift.p, shift.q));
                    }
                }
            }
        }
        Ok(WeaklyHodgeMap { source, target, matrix })
    }

    pub fn identity(space: HodgeSpace) -> Self {
        let n = space.dim();
        WeaklyHodgeMap { source: space.clone(), target: space, matrix: Matrix::identity(n) }
    }

    pub fn weight(&self) -> i32 {
        self.target.weight - self.source.weight
    }

    /// The (a,b)-indexed components; their sum is the map.
    pub fn h_type_components(&self) -> Result<BTreeMap<(i32, i32), Matrix<S>>> {
        let w = self.weight();
        if w < 0 {
            return Err(WeilError::NegativeWeight);
        }
        let mut out: BTreeMap<(i32, i32), Matrix<S>> = BTreeMap::new();
        for r in 0..self.matrix.rows() {
            for c in 0..self.matrix.cols() {
                let v = self.matrix.get(r, c);
                if v.is_zero() {
                    continue;
                }
                let shift = self.target.basis[r] - self.source.basis[c];
                out.entry((shift.p, shift.q))
                    .or_insert_with(|| Matrix::zeros(self.matrix.rows(), self.matrix.cols()))
                    .set(r, c, v.clone());
            }
        }
        Ok(out)
    }

    pub fn compose(&self, after: &WeaklyHodgeMap<S>) -> Result<WeaklyHodgeMap<S>> {
        if after.source != self.target {
            return Err(WeilError::WeightMismatch { expected: self.target.weight, found: after.source.weight });
        }
        WeaklyHodgeMap::new(self.source.clone(), after.target.clone(), after.matrix.mul(&self.matrix))
    }

    /// f(conj x) = conj f(x) on basis vectors.
    pub fn is_real(&self, tol: f64) -> bool {
        for r in 0..self.matrix.rows() {
            for c in 0..self.matrix.cols() {
                let a = self.matrix.get(self.target.conj[r], self.source.conj[c]).clone();
                let b = self.matrix.get(r, c).conj();
                if !(a - b).is_negligible(tol) {
                    return false;
                }
            }
        }
        true
    }

    /// Image of the dressed basis vector e_c ⊗ u_p: Σ f^{a,b}(e_c) ⊗ u_{p+a}.
    pub fn totalize_apply(&self, c: usize, p: usize) -> Result<Vec<(usize, usize, S)>> {
        let ws = self.source.weight.max(0) as usize;
        WkDualBasis::new(ws).check(p)?;
        let w = self.weight();
        let mut out = Vec::new();
        for r in 0..self.matrix.rows() {
            let v = self.matrix.get(r, c);
            if v.is_zero() {
                continue;
            }
            let shift = self.target.basis[r] - self.source.basis[c];
            debug_assert!(admissible_shift(shift, w));
            out.push((r, p + shift.p as usize, v.clone()));
        }
        Ok(out)
    }

    /// Matrix of the totalized map Γ(source) → Γ(target); basis order (i, p) ↦ i·(w+1)+p.
    pub fn totalize(&self) -> Result<Matrix<S>> {
        let ws = self.source.weight.max(0) as usize;
        let wt = self.target.weight.max(0) as usize;
        let mut m = Matrix::zeros(self.target.gamma_dim(), self.source.gamma_dim());
        for c in 0..self.source.dim() {
            for p in 0..=ws {
                for (r, pp, v) in self.totalize_apply(c, p)? {
                    m.add_to(r * (wt + 1) + pp, c * (ws + 1) + p, v);
                }
            }
        }
        Ok(m)
    }
}

/// Bidegree of the dressed basis vector (i, u_p) of Γ(V).
pub fn gamma_bidegree(space: &HodgeSpace, i: usize, p: usize) -> HodgeBidegree {
    let w = space.weight;
    space.basis[i] + HodgeBidegree::new(-(p as i32), p as i32 - w)
}
