//! Independent oracles: every unknown coefficient of D_k (or Ω_k) becomes a pair of real
//! variables, all defining constraints are imposed at once, and the resulting affine
//! system is solved by plain elimination. Uniqueness is asserted, not assumed.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::connection::{fibre_generators, ConnectionSolution};
use crate::error::{Result, WeilError};
use crate::hodge::HodgeBidegree;
use crate::kahler::{connection_derivation, ChristoffelJet};
use crate::linalg::Matrix;
use crate::polarization::extend_levels;
use crate::scalar::Scalar;
use crate::weil::{
    canonical_c, enumerate, real_structure, sigma_tot, th, thb, Derivation, Element, Gen, Monomial,
};

/// Solve residual(x) = 0 for a real vector x, where residual is affine in x.
fn solve_real_affine<S: Scalar>(
    n: usize,
    residual: impl Fn(&[S]) -> Result<Vec<Element<S>>>,
    tol: f64,
) -> Result<Vec<S>> {
    let zero = vec![S::zero(); n];
    let r0 = residual(&zero)?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = zero.clone();
        e[j] = S::one();
        let rj = residual(&e)?;
        cols.push(rj.iter().zip(&r0).map(|(a, b)| a.sub(b)).collect::<Vec<_>>());
    }
    // rows: (residual index, monomial, real/imag)
    let mut rows: BTreeMap<(usize, Monomial, bool), usize> = BTreeMap::new();
    let touch = |idx: usize, e: &Element<S>, rows: &mut BTreeMap<(usize, Monomial, bool), usize>| {
        for (m, _) in e.terms() {
            for part in [false, true] {
                let next = rows.len();
                rows.entry((idx, m.clone(), part)).or_insert(next);
            }
        }
    };
    for (i, e) in r0.iter().enumerate() {
        touch(i, e, &mut rows);
    }
    for col in &cols {
        for (i, e) in col.iter().enumerate() {
            touch(i, e, &mut rows);
        }
    }
    let part = |v: &S, imag: bool| -> S {
        let (re, im) = v.to_parts();
        S::from_parts(if imag { im } else { re }, BigRational::zero())
    };
    let mut mat = Matrix::<S>::zeros(rows.len(), n);
    let mut rhs = vec![S::zero(); rows.len()];
    for ((i, m, imag), &r) in &rows {
        rhs[r] = -part(&r0[*i].coeff(m), *imag);
        for (j, col) in cols.iter().enumerate() {
            mat.set(r, j, part(&col[*i].coeff(m), *imag));
        }
    }
    let (x, nullity) = mat
        .solve(&rhs, tol)
        .map_err(|_| WeilError::LinearSystem("oracle system has no solution".into()))?;
    if nullity != 0 {
        return Err(WeilError::LinearSystem(format!("oracle solution space has dimension {nullity}, expected a point")));
    }
    Ok(x)
}

fn assemble<S: Scalar>(unknowns: &[(usize, Monomial)], x: &[S], slots: usize) -> Vec<Element<S>> {
    let mut out = vec![Element::zero(); slots];
    for (idx, (slot, m)) in unknowns.iter().enumerate() {
        let c = x[2 * idx].clone() + x[2 * idx + 1].clone() * S::i();
        out[*slot].add_term(m.clone(), c);
    }
    out
}

/// Brute-force D₂..D_N for dim 1 and N ≤ 3 (weakly Hodge shape, reality, σ_tot-linearity,
/// flatness), returning a solution with the same layout as the recursion.
pub fn brute_force_solve<S: Scalar>(gamma: &ChristoffelJet<S>, order: u32, tol: f64) -> Result<ConnectionSolution<S>> {
    if gamma.dim != 1 || !(2..=3).contains(&order) {
        return Err(WeilError::InvalidInput("brute force is limited to dim 1 and 2 ≤ N ≤ 3".into()));
    }
    let dim = gamma.dim;
    let gamma = ChristoffelJet::new(dim, order, gamma.hol.clone(), gamma.mixed.clone())?;
    let cap = order + 1;
    let d1 = connection_derivation(&gamma, tol)?.filter_images(|m| m.total() <= cap);
    let c = canonical_c::<S>(dim);
    let mut levels = vec![c.clone(), d1];
    let gens = fibre_generators(dim);
    let allowed = [HodgeBidegree::new(1, 0), HodgeBidegree::new(0, 1)];
    for k in 2..=order as usize {
        let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
        for (slot, g) in gens.iter().enumerate() {
            for v2 in 0..=(order as usize - k) as u32 {
                for m in enumerate(dim, v2, k as u32, 1, false) {
                    if allowed.contains(&(m.plain_hodge() - g.kind.hodge())) {
                        unknowns.push((slot, m));
                    }
                }
            }
        }
        let curvature: Vec<Element<S>> = gens
            .iter()
            .map(|&g| {
                let mut r = Element::zero();
                for p in 1..k {
                    let inner = levels[k - p].image(g)?.clone();
                    r = r.add(&levels[p].apply(&inner)?);
                }
                Ok(r.truncate_total(cap))
            })
            .collect::<Result<_>>()?;
        let build = |x: &[S]| -> Derivation<S> {
            let imgs = assemble(&unknowns, x, gens.len());
            let mut d = Derivation::zero(true, dim);
            for (g, img) in gens.iter().zip(imgs) {
                d.set(*g, img);
            }
            d
        };
        let residual = |x: &[S]| -> Result<Vec<Element<S>>> {
            let d = build(x);
            let mut out = Vec::new();
            for (slot, &g) in gens.iter().enumerate() {
                let img = d.image(g)?;
                out.push(c.apply(img)?.add(&curvature[slot]));
                let tot = d.apply_tot(&Element::gen(g), 1)?;
                out.push(if tot.is_zero() { Element::zero() } else { sigma_tot(dim, &tot)? });
            }
            for pair in gens.chunks(2) {
                out.push(d.image(pair[1])?.add(&real_structure(d.image(pair[0])?)));
            }
            Ok(out)
        };
        let x = solve_real_affine(2 * unknowns.len(), residual, tol)?;
        levels.push(build(&x));
    }
    Ok(ConnectionSolution::from_levels(dim, order, gamma, levels))
}

fn theta_pairs(dim: u8) -> Vec<Vec<Gen>> {
    let mut thetas: Vec<Gen> = (1..=dim).flat_map(|i| [th(i), thb(i)]).collect();
    thetas.sort();
    let mut out = Vec::new();
    for a in 0..thetas.len() {
        for b in a + 1..thetas.len() {
            out.push(vec![thetas[a], thetas[b]]);
        }
    }
    out
}

/// Brute-force Ω₁..Ω_N from {type (1,1), reality, Ω₀ = ω, DΩ = 0}.
pub fn brute_force_polarization<S: Scalar>(
    sol: &ConnectionSolution<S>,
    omega: &Element<S>,
    order: u32,
    tol: f64,
) -> Result<Vec<Element<S>>> {
    let dim = sol.dim;
    let cap = order.min(sol.order);
    let levels = extend_levels(sol)?;
    let c = &levels[0];
    let mut out = vec![omega.truncate_total(cap)];
    for k in 1..=cap as usize {
        let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
        for pair in theta_pairs(dim) {
            for v2 in 0..=(cap as usize - k) as u32 {
                for base in enumerate(dim, v2, k as u32, 0, false) {
                    let mut factors: Vec<Gen> = pair.clone();
                    for &(g, e) in base.even() {
                        factors.extend(std::iter::repeat_n(g, e as usize));
                    }
                    let (_, m) = Monomial::from_factors(&factors).expect("θ factors distinct");
                    if m.hodge() == HodgeBidegree::new(1, 1) {
                        unknowns.push((0, m));
                    }
                }
            }
        }
        let mut gamma = Element::zero();
        for p in 0..k {
            gamma = gamma.add(&levels[k - p].apply(&out[p])?);
        }
        let gamma = gamma.truncate_total(cap);
        let residual = |x: &[S]| -> Result<Vec<Element<S>>> {
            let om = assemble(&unknowns, x, 1).pop().expect("one slot");
            Ok(vec![c.apply(&om)?.add(&gamma), real_structure(&om).sub(&om)])
        };
        let x = solve_real_affine(2 * unknowns.len(), residual, tol)?;
        out.push(assemble(&unknowns, &x, 1).pop().expect("one slot"));
    }
    Ok(out)
}
