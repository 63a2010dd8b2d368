//! Finite graded pieces: basis enumeration, operator matrices, the spectrum of h,
//! parity vanishing, acyclicity of C, and piecewise inversion of h.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::element::Element;
use super::monomial::{Gen, Kind, Monomial};
use super::ops::{c_tot, classify_llorr, h_apply, LlOrRr};
use crate::error::{Result, WeilError};
use crate::hodge::HodgeBidegree;
use crate::linalg::{spectrum_certificate, Matrix};
use crate::scalar::Scalar;

fn multisets(gens: &[Gen], size: usize, start: usize, cur: &mut Vec<Gen>, out: &mut Vec<Vec<Gen>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for idx in start..gens.len() {
        cur.push(gens[idx]);
        multisets(gens, size, idx, cur, out);
        cur.pop();
    }
}

fn subsets(gens: &[Gen], size: usize, start: usize, cur: &mut Vec<Gen>, out: &mut Vec<Vec<Gen>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for idx in start..gens.len() {
        cur.push(gens[idx]);
        subsets(gens, size, idx + 1, cur, out);
        cur.pop();
    }
}

fn family(dim: u8, kinds: &[Kind]) -> Vec<Gen> {
    kinds.iter().flat_map(|&k| (1..=dim).map(move |i| Gen::new(k, i))).collect()
}

/// Monomials with the given numbers of base-coordinate, fibre, and one-form factors;
/// forms of positive degree are dressed with every u_p unless `dressed` is false.
pub fn enumerate(dim: u8, v2_deg: u32, v3_deg: u32, form_deg: u32, dressed: bool) -> Vec<Monomial> {
    let mut v2s = Vec::new();
    multisets(&family(dim, &[Kind::V2h, Kind::V2a]), v2_deg as usize, 0, &mut Vec::new(), &mut v2s);
    let mut v3s = Vec::new();
    multisets(&family(dim, &[Kind::V3h, Kind::V3a]), v3_deg as usize, 0, &mut Vec::new(), &mut v3s);
    let mut v1s = Vec::new();
    subsets(&family(dim, &[Kind::V1h, Kind::V1a]), form_deg as usize, 0, &mut Vec::new(), &mut v1s);
    let mut out = Vec::new();
    for a in &v2s {
        for b in &v3s {
            for c in &v1s {
                let factors: Vec<Gen> = a.iter().chain(b).chain(c).cloned().collect();
                let (_, m) = Monomial::from_factors(&factors).expect("distinct odd factors");
                if dressed && form_deg > 0 {
                    for p in 0..=form_deg as u8 {
                        out.push(m.with_dress(Some(p)));
                    }
                } else {
                    out.push(m);
                }
            }
        }
    }
    out.sort();
    out
}

/// Base-coordinate-free dressed piece of form degree `j`, augmentation degree `aug`,
/// optionally restricted to one Hodge type.
pub fn enumerate_piece(dim: u8, j: u32, aug: u32, hodge: Option<HodgeBidegree>) -> Vec<Monomial> {
    if aug < j {
        return Vec::new();
    }
    enumerate(dim, 0, aug - j, j, true)
        .into_iter()
        .filter(|m| hodge.is_none_or(|h| m.hodge() == h))
        .collect()
}

/// Matrix of a linear map on the span of `source`, in the monomial basis `target`.
/// Image terms outside `target` are an error.
pub fn operator_matrix<S: Scalar>(
    source: &[Monomial],
    target: &[Monomial],
    f: impl Fn(&Element<S>) -> Result<Element<S>>,
) -> Result<Matrix<S>> {
    let index: HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = Matrix::zeros(target.len(), source.len());
    for (c, m) in source.iter().enumerate() {
        let img = f(&Element::term(m.clone(), S::one()))?;
        for (mm, v) in img.terms() {
            let r = *index
                .get(mm)
                .ok_or_else(|| WeilError::InvalidInput(format!("image term {} outside the target piece", mm.key())))?;
            mat.set(r, c, v.clone());
        }
    }
    Ok(mat)
}

/// Matrix of a linear map on `source` with rows indexed by every monomial that occurs
/// in some image. Suitable for operator norms in the orthonormal monomial basis.
pub fn image_matrix<S: Scalar>(
    source: &[Monomial],
    f: impl Fn(&Element<S>) -> Result<Element<S>>,
) -> Result<Matrix<S>> {
    let mut images = Vec::with_capacity(source.len());
    let mut rows: Vec<Monomial> = Vec::new();
    for m in source {
        let img = f(&Element::term(m.clone(), S::one()))?;
        rows.extend(img.terms().map(|(mm, _)| mm.clone()));
        images.push(img);
    }
    rows.sort();
    rows.dedup();
    let index: HashMap<&Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = Matrix::zeros(rows.len(), source.len());
    for (c, img) in images.iter().enumerate() {
        for (mm, v) in img.terms() {
            mat.set(index[mm], c, v.clone());
        }
    }
    Ok(mat)
}

pub fn h_matrix<S: Scalar>(dim: u8, j: u32, aug: u32, hodge: HodgeBidegree) -> Result<(Vec<Monomial>, Matrix<S>)> {
    let basis = enumerate_piece(dim, j, aug, Some(hodge));
    let m = operator_matrix(&basis, &basis, |x| h_apply(dim, x))?;
    Ok((basis, m))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub dim: u8,
    pub aug: u32,
    pub hodge: (i32, i32),
    pub piece_dim: usize,
    pub expected: Vec<i64>,
    /// Geometric multiplicity of each expected eigenvalue.
    pub multiplicities: Vec<usize>,
    pub pass: bool,
}

/// Spectrum of h on (B¹_tot)^{n,−n}_k with n = ±1: {k} for odd k, {m, m−1} for k = 2m.
pub fn h_spectrum<S: Scalar>(dim: u8, k: u32, n: i32, tol: f64) -> Result<SpectrumEntry> {
    let hodge = HodgeBidegree::new(n, -n);
    let (basis, h) = h_matrix::<S>(dim, 1, k, hodge)?;
    let expected: Vec<i64> = if k % 2 == 1 { vec![k as i64] } else { vec![(k / 2) as i64, (k / 2) as i64 - 1] };
    let cands: Vec<S> = expected.iter().map(|&e| S::from_i64(e)).collect();
    let (mult, product_zero) = spectrum_certificate(&h, &cands, tol);
    let full = mult.iter().sum::<usize>() == basis.len();
    let all_present = basis.is_empty() || mult.iter().all(|&m| m > 0);
    Ok(SpectrumEntry {
        dim,
        aug: k,
        hodge: (n, -n),
        piece_dim: basis.len(),
        expected,
        multiplicities: mult,
        pass: product_zero && full && all_present,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityReport {
    pub checked_pieces: usize,
    pub violations: Vec<String>,
}

/// (B⁰_tot)^{n,−n}_k = 0 for n+k odd; (B¹_ll)^{n,−n}_k = (B¹_rr)^{n,−n}_k = 0 for n+k even;
/// (B¹_o)^{n,−n}_k = 0 for n+k odd.
pub fn parity_vanishing(dim: u8, k_max: u32) -> Result<ParityReport> {
    let mut report = ParityReport { checked_pieces: 0, violations: Vec::new() };
    for k in 0..=k_max {
        for n in -(k as i32)..=(k as i32) {
            let h = HodgeBidegree::new(n, -n);
            let odd = (n + k as i32).rem_euclid(2) == 1;
            report.checked_pieces += 1;
            if odd && !enumerate_piece(dim, 0, k, Some(h)).is_empty() {
                report.violations.push(format!("B0 n={n} k={k}"));
            }
            if k >= 1 {
                for m in enumerate_piece(dim, 1, k, Some(h)) {
                    let class = classify_llorr(&m)?;
                    let bad = match class {
                        LlOrRr::O => odd,
                        LlOrRr::Ll | LlOrRr::Rr => !odd,
                    };
                    if bad {
                        report.violations.push(format!("B1 {class:?} n={n} k={k}: {}", m.key()));
                    }
                }
                report.checked_pieces += 3;
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct AcyclicityReport {
    pub p: u32,
    pub q: u32,
    pub n_max: u32,
    /// (total degree, form degree, piece dim, rank of C out, rank of C in)
    pub rows: Vec<(u32, u32, usize, usize, usize)>,
    pub h_nonsingular: bool,
    pub exact: bool,
}

/// Exactness of C on (B•_tot)_{p,q} in every total degree ≤ n_max, with h as certificate.
pub fn verify_acyclicity<S: Scalar>(dim: u8, p: u32, q: u32, n_max: u32, tol: f64) -> Result<AcyclicityReport> {
    if p == 0 || q == 0 {
        return Err(WeilError::InvalidInput("acyclicity requires p, q ≥ 1".into()));
    }
    let aug = p + q;
    let piece = |total: u32, j: u32| -> Vec<Monomial> {
        if j > aug || total < aug {
            return Vec::new();
        }
        enumerate(dim, total - aug, aug - j, j, true).into_iter().filter(|m| m.aug() == (p, q)).collect()
    };
    let mut rows = Vec::new();
    let mut exact = true;
    let mut h_ok = true;
    for total in aug..=n_max {
        let pieces: Vec<Vec<Monomial>> = (0..=aug + 1).map(|j| piece(total, j)).collect();
        let mut ranks = Vec::new();
        for j in 0..=aug {
            let c = operator_matrix(&pieces[j as usize], &pieces[j as usize + 1], |x: &Element<S>| c_tot(dim, x))?;
            ranks.push(c.rank(tol));
        }
        for j in 0..=aug {
            let d = pieces[j as usize].len();
            let out_rank = ranks[j as usize];
            let in_rank = if j == 0 { 0 } else { ranks[j as usize - 1] };
            if d != out_rank + in_rank {
                exact = false;
            }
            let hm = operator_matrix(&pieces[j as usize], &pieces[j as usize], |x: &Element<S>| h_apply(dim, x))?;
            if hm.rank(tol) != d {
                h_ok = false;
            }
            rows.push((total, j, d, out_rank, in_rank));
        }
    }
    Ok(AcyclicityReport { p, q, n_max, rows, h_nonsingular: h_ok, exact: exact && h_ok })
}

struct PieceInverse<S> {
    index: HashMap<Monomial, usize>,
    basis: Vec<Monomial>,
    inverse: Matrix<S>,
}

/// Piecewise inverse of h, cached per (form degree, augmentation degree, Hodge type).
pub struct HomotopyInverse<S> {
    dim: u8,
    tol: f64,
    cache: Mutex<HashMap<(u32, u32, HodgeBidegree), Option<Arc<PieceInverse<S>>>>>,
}

impl<S: Scalar> HomotopyInverse<S> {
    pub fn new(dim: u8, tol: f64) -> Self {
        HomotopyInverse { dim, tol, cache: Mutex::new(HashMap::new()) }
    }

    fn piece(&self, key: (u32, u32, HodgeBidegree)) -> Result<Arc<PieceInverse<S>>> {
        if let Some(entry) = self.cache.lock().expect("cache lock").get(&key) {
            return entry.clone().ok_or(WeilError::HomotopyDegenerate);
        }
        let (basis, h) = h_matrix::<S>(self.dim, key.0, key.1, key.2)?;
        let n = basis.len();
        let mut aug = h.hstack(&Matrix::identity(n));
        let pivots = aug.rref(self.tol);
        let entry = if pivots.len() == n && pivots.iter().enumerate().all(|(i, &c)| i == c) {
            let mut inv = Matrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    inv.set(r, c, aug.get(r, n + c).clone());
                }
            }
            let index = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
            Some(Arc::new(PieceInverse { index, basis, inverse: inv }))
        } else {
            None
        };
        self.cache.lock().expect("cache lock").insert(key, entry.clone());
        entry.ok_or(WeilError::HomotopyDegenerate)
    }

    /// Solve h x = y; y may carry base-coordinate and relative-form factors, which h
    /// treats as constants.
    pub fn invert(&self, y: &Element<S>) -> Result<Element<S>> {
        let mut groups: HashMap<(Monomial, (u32, u32, HodgeBidegree)), Vec<(Monomial, S)>> = HashMap::new();
        for (m, c) in y.terms() {
            let (rest, coeff) = m.split_coeff();
            let key = (rest.form_degree(), rest.aug_degree(), rest.hodge());
            groups.entry((coeff, key)).or_default().push((rest, c.clone()));
        }
        let mut keys: Vec<_> = groups.keys().cloned().collect();
        keys.sort();
        let mut out = Element::zero();
        for gk in keys {
            let (coeff, key) = gk.clone();
            let piece = self.piece(key)?;
            let mut rhs = vec![S::zero(); piece.basis.len()];
            for (rest, c) in &groups[&gk] {
                let idx = piece
                    .index
                    .get(rest)
                    .ok_or_else(|| WeilError::InvalidInput(format!("{} outside enumerated piece", rest.key())))?;
                rhs[*idx] = c.clone();
            }
            let x = piece.inverse.apply(&rhs);
            let t = Element::term(coeff, S::one());
            for (i, v) in x.into_iter().enumerate() {
                if !v.is_zero() {
                    out.add_assign_scaled(&Element::term(piece.basis[i].clone(), S::one()).mul(&t), &v);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qc;
    use crate::weil::monomial::{dz, s, z};

    #[test]
    fn piece_sizes() {
        // dim 1, B¹ aug 1: dz, dz̄ each with two dressings
        assert_eq!(enumerate_piece(1, 1, 1, None).len(), 4);
        // B⁰ aug 2 dim 1: s², s s̄, s̄²
        assert_eq!(enumerate_piece(1, 0, 2, None).len(), 3);
    }

    #[test]
    fn h_spectrum_small_pieces() {
        for k in 1..=4 {
            for n in [1, -1] {
                let e = h_spectrum::<Qc>(1, k, n, 0.0).unwrap();
                assert!(e.pass, "{e:?}");
            }
        }
    }

    #[test]
    fn h_at_aug_four_has_top_eigenvalue_two() {
        let (_, h) = h_matrix::<Qc>(1, 1, 4, HodgeBidegree::new(1, -1)).unwrap();
        let norm = crate::linalg::operator_norm(&h);
        assert!((norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn h_degenerate_at_aug_two() {
        let inv = HomotopyInverse::<Qc>::new(1, 0.0);
        let y = Element::term(Monomial::from_factors(&[s(1), dz(1)]).unwrap().1.with_dress(Some(1)), Qc::from_i64(1));
        assert_eq!(inv.invert(&y).unwrap_err(), WeilError::HomotopyDegenerate);
    }

    #[test]
    fn h_inverse_round_trip_with_coefficients() {
        let inv = HomotopyInverse::<Qc>::new(1, 0.0);
        let m = Monomial::from_factors(&[z(1), s(1), s(1), dz(1)]).unwrap().1.with_dress(Some(0));
        let y = Element::term(m, Qc::from_i64(3));
        let x = inv.invert(&y).unwrap();
        assert_eq!(h_apply(1, &x).unwrap(), y);
    }

    #[test]
    fn parity_small() {
        let r = parity_vanishing(1, 4).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
    }

    #[test]
    fn acyclicity_examples() {
        assert!(verify_acyclicity::<Qc>(1, 1, 1, 2, 0.0).unwrap().exact);
        assert!(verify_acyclicity::<Qc>(1, 2, 1, 3, 0.0).unwrap().exact);
        assert!(verify_acyclicity::<Qc>(1, 1, 0, 2, 0.0).is_err());
    }
}
