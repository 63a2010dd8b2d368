//! Combinatorial sequences, measured graded norms of the solved derivation, bound checks
//! against fitted constants, and convergence-radius estimates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::connection::{images_norm, ConnectionSolution, HodgeConnectionSeries};
use crate::error::{Result, WeilError};
use crate::linalg::operator_norm;
use crate::polarization::{extend_levels, PolarizationSolution};
use crate::scalar::Scalar;
use crate::weil::{
    canonical_sigma, enumerate, enumerate_piece, image_matrix, sigma_tot, th, thb, Derivation, Element, Gen, Monomial,
};

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact memoized tables of a_n, b_{k,n}, c_{k,n}, bᵐ_{k,n} over a fixed range.
/// Built once and read-only afterwards, so it can be shared freely across threads.
#[derive(Clone, Debug)]
pub struct SeriesTable {
    pub k_max: usize,
    pub n_max: usize,
    pub m_max: usize,
    a: Vec<BigRational>,
    b: Vec<Vec<BigRational>>,
    c: Vec<Vec<BigRational>>,
    /// bm[m-1][k][n]
    bm: Vec<Vec<Vec<BigRational>>>,
}

impl SeriesTable {
    pub fn new(k_max: usize, n_max: usize, m_max: usize) -> Self {
        let mut a = vec![BigRational::zero(); k_max.max(1) + 1];
        a[1] = BigRational::one();
        for n in 2..a.len() {
            a[n] = (1..n).map(|i| &a[i] * &a[n - i]).sum();
        }
        let base = |k: usize| if k == 1 { vec![BigRational::one(); n_max + 1] } else { vec![BigRational::zero(); n_max + 1] };
        let mut b: Vec<Vec<BigRational>> = (0..=k_max).map(base).collect();
        for k in 2..=k_max {
            for n in 0..=n_max {
                let mut acc = BigRational::zero();
                for p in 1..k {
                    for qq in 0..=n {
                        acc += BigRational::new(BigInt::from(qq + 1), BigInt::from(k)) * &b[p][qq] * &b[k - p][n - qq];
                    }
                }
                b[k][n] = acc;
            }
        }
        let mut c: Vec<Vec<BigRational>> = (0..=k_max).map(|k| if k <= 1 { b[k].clone() } else { vec![BigRational::zero(); n_max + 1] }).collect();
        for k in 2..=k_max {
            for n in 0..=n_max {
                let mut acc = BigRational::zero();
                for p in 1..k {
                    for qq in 0..=n {
                        acc += &c[p][qq] * &b[k - p][n - qq];
                    }
                }
                c[k][n] = acc;
            }
        }
        let bm = (1..=m_max)
            .map(|m| {
                let mut t: Vec<Vec<BigRational>> = (0..=k_max).map(base).collect();
                for k in 2..=k_max {
                    for n in 0..=n_max {
                        let mut acc = BigRational::zero();
                        for p in 1..k {
                            for qq in 0..=n {
                                let w = BigRational::new(BigInt::from(qq + m * (k - p)), BigInt::from(k));
                                acc += w * &t[p][qq] * &b[k - p][n - qq];
                            }
                        }
                        t[k][n] = acc;
                    }
                }
                t
            })
            .collect();
        SeriesTable { k_max, n_max, m_max, a, b, c, bm }
    }

    fn check(&self, k: i64, n: i64) -> Option<(usize, usize)> {
        if k <= 0 || n < 0 {
            return None;
        }
        assert!(k as usize <= self.k_max && n as usize <= self.n_max, "({k},{n}) outside the memoized range");
        Some((k as usize, n as usize))
    }

    /// Catalan-type recurrence a_n = Σ a_k a_{n−k}, a₁ = 1, a_{≤0} = 0.
    pub fn catalan(&self, n: i64) -> BigRational {
        if n <= 0 {
            return BigRational::zero();
        }
        assert!(n as usize <= self.k_max.max(1), "a_{n} outside the memoized range");
        self.a[n as usize].clone()
    }

    pub fn b(&self, k: i64, n: i64) -> BigRational {
        self.check(k, n).map_or_else(BigRational::zero, |(k, n)| self.b[k][n].clone())
    }

    pub fn c(&self, k: i64, n: i64) -> BigRational {
        self.check(k, n).map_or_else(BigRational::zero, |(k, n)| self.c[k][n].clone())
    }

    pub fn bm(&self, m: i64, k: i64, n: i64) -> BigRational {
        if m <= 0 {
            return BigRational::zero();
        }
        assert!(m as usize <= self.m_max, "m = {m} outside the memoized range");
        self.check(k, n).map_or_else(BigRational::zero, |(k, n)| self.bm[m as usize - 1][k][n].clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratingBoundsReport {
    pub k_max: usize,
    pub n_max: usize,
    pub m_max: usize,
    pub catalan_ok: bool,
    /// (k, n) with b_{k,n} > a_k·binom(n+2k−2, 2k−2).
    pub majorant_violations: Vec<(usize, usize)>,
    /// (m, k, n) with bᵐ_{k,n} > (2m)^{k−1} c_{k,n} b_{k,n}.
    pub combin2_violations: Vec<(usize, usize, usize)>,
    pub negative_values: usize,
    /// g_k = (1/2k) Σ (2 + z d/dz)(g_p g_{k−p}) coefficientwise.
    pub g_recurrence_ok: bool,
    /// Smallest C with b_{k,n} ≤ C·6^{n+k} on the range.
    pub min_c_for_c2_6: f64,
    pub pass: bool,
}

pub fn check_generating_bounds(k_max: usize, n_max: usize, m_max: usize) -> GeneratingBoundsReport {
    let t = SeriesTable::new(k_max, n_max, m_max);
    // independent Catalan values via the closed form binom(2n−2, n−1)/n
    let catalan_ok = (1..=k_max as u64).all(|n| t.catalan(n as i64) == BigRational::new(binomial(2 * n - 2, n - 1), BigInt::from(n)));
    let mut majorant_violations = Vec::new();
    let mut negative_values = 0;
    let mut g_recurrence_ok = true;
    let mut min_c = BigRational::zero();
    for k in 1..=k_max {
        for n in 0..=n_max {
            let (ki, ni) = (k as i64, n as i64);
            let bkn = t.b(ki, ni);
            let maj = t.catalan(ki) * BigRational::from_integer(binomial((n + 2 * k - 2) as u64, (2 * k - 2) as u64));
            if bkn > maj {
                majorant_violations.push((k, n));
            }
            let ratio = &bkn / BigRational::from_integer(BigInt::from(6).pow((n + k) as u32));
            if ratio > min_c {
                min_c = ratio;
            }
            for v in [bkn.clone(), t.c(ki, ni)] {
                if v < BigRational::zero() {
                    negative_values += 1;
                }
            }
            if k >= 2 {
                let mut rhs = BigRational::zero();
                for p in 1..ki {
                    let conv: BigRational = (0..=ni).map(|qq| t.b(p, qq) * t.b(ki - p, ni - qq)).sum();
                    rhs += q(2 + ni) * conv;
                }
                if bkn != rhs / q(2 * ki) {
                    g_recurrence_ok = false;
                }
            }
        }
    }
    let mut combin2_violations = Vec::new();
    for m in 1..=m_max {
        for k in 1..=k_max {
            for n in 0..=n_max {
                let (mi, ki, ni) = (m as i64, k as i64, n as i64);
                let v = t.bm(mi, ki, ni);
                if v < BigRational::zero() {
                    negative_values += 1;
                }
                let bound = q(2 * mi).pow((k - 1) as i32) * t.c(ki, ni) * t.b(ki, ni);
                if v > bound {
                    combin2_violations.push((m, k, n));
                }
            }
        }
    }
    let pass = catalan_ok && majorant_violations.is_empty() && combin2_violations.is_empty() && negative_values == 0 && g_recurrence_ok;
    GeneratingBoundsReport {
        k_max,
        n_max,
        m_max,
        catalan_ok,
        majorant_violations,
        combin2_violations,
        negative_values,
        g_recurrence_ok,
        min_c_for_c2_6: to_f64(&min_c),
        pass,
    }
}

/// ‖D_{k,n}‖_{p,q}: D_{k,n} restricted to B⁰ of augmentation p and total degree q.
#[derive(Clone, Debug, Serialize)]
pub struct NormEntry {
    pub k: u32,
    pub n: u32,
    pub p: u32,
    pub q: u32,
    pub plain: f64,
    /// None when the level does not totalize on this piece.
    pub tot: Option<f64>,
}

/// ‖D_{k,n}‖^p_q on the polarization model: θ-degree p, total degree q.
#[derive(Clone, Debug, Serialize)]
pub struct LNormEntry {
    pub k: u32,
    pub n: u32,
    pub theta: u32,
    pub q: u32,
    pub plain: f64,
    pub tot: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaNorm {
    /// Augmentation degree of Ω_k (Ω₀ is the Kähler form).
    pub k: u32,
    pub n: u32,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormTables {
    pub d: Vec<NormEntry>,
    pub l: Vec<LNormEntry>,
    pub omega: Vec<OmegaNorm>,
    /// Worst |‖D_{k,n}‖_{p,1} − ‖D^tot_{k,n}‖_{p,1}| over p ∈ {0, 1}.
    pub total_ne_total_defect: f64,
    pub total_ne_total_ok: bool,
}

/// Norms of D_k on the span of `source`, grouped by the total-degree raise n ≤ n_max.
fn piece_norms<S: Scalar>(
    d: &Derivation<S>,
    source: &[Monomial],
    src_total: u32,
    n_max: u32,
) -> Result<BTreeMap<u32, (f64, Option<f64>)>> {
    let mut plain: BTreeMap<u32, Vec<Element<S>>> = BTreeMap::new();
    let mut tot: Option<BTreeMap<u32, Vec<Element<S>>>> = Some(BTreeMap::new());
    let split = |img: &Element<S>, out: &mut BTreeMap<u32, Vec<Element<S>>>, col: usize| {
        for (m, c) in img.terms() {
            let n = m.total() - src_total;
            if n <= n_max {
                let row = out.entry(n).or_insert_with(|| vec![Element::zero(); source.len()]);
                row[col].add_term(m.clone(), c.clone());
            }
        }
    };
    for (col, m) in source.iter().enumerate() {
        let x = Element::term(m.clone(), S::one());
        split(&d.apply(&x)?, &mut plain, col);
        if let Some(t) = tot.as_mut() {
            match d.apply_tot(&x, 1) {
                Ok(img) => split(&img, t, col),
                Err(WeilError::NotTotalizable(..)) => tot = None,
                Err(e) => return Err(e),
            }
        }
    }
    let mut out = BTreeMap::new();
    for (n, imgs) in &plain {
        let t = tot.as_ref().map(|t| t.get(n).map_or(0.0, |v| images_norm(v)));
        out.insert(*n, (images_norm(imgs), t));
    }
    if let Some(t) = &tot {
        for (n, imgs) in t {
            out.entry(*n).or_insert((0.0, Some(images_norm(imgs))));
        }
    }
    Ok(out)
}

fn b0_piece(dim: u8, p: u32, q: u32) -> Vec<Monomial> {
    enumerate(dim, q - p, p, 0, false)
}

fn theta_monomials(dim: u8, degree: u32) -> Vec<Vec<Gen>> {
    let mut thetas: Vec<Gen> = (1..=dim).flat_map(|i| [th(i), thb(i)]).collect();
    thetas.sort();
    let mut out: Vec<Vec<Gen>> = vec![vec![]];
    for _ in 0..degree {
        out = out
            .into_iter()
            .flat_map(|v| {
                thetas.iter().filter(|g| v.last().is_none_or(|l| *g > l)).map(|g| {
                    let mut w = v.clone();
                    w.push(*g);
                    w
                }).collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

fn times(base: &[Monomial], factors: &[Gen]) -> Vec<Monomial> {
    let f = Monomial::from_factors(factors).expect("distinct θ").1;
    base.iter().filter_map(|m| f.mul(m).map(|(_, mm)| mm)).collect()
}

/// Measure every graded norm of the solved connection (and polarization, if given).
pub fn measure_norms<S: Scalar>(
    sol: &ConnectionSolution<S>,
    pol: Option<&PolarizationSolution<S>>,
    tol: f64,
) -> Result<NormTables> {
    let dim = sol.dim;
    let n_cap = sol.order;
    let mut jobs = Vec::new();
    for qq in 1..=n_cap {
        for p in 0..=qq {
            for k in 1..sol.levels.len() as u32 {
                jobs.push((k, p, qq));
            }
        }
    }
    let d: Vec<NormEntry> = jobs
        .par_iter()
        .map(|&(k, p, qq)| -> Result<Vec<NormEntry>> {
            let src = b0_piece(dim, p, qq);
            Ok(piece_norms(&sol.levels[k as usize], &src, qq, n_cap)?
                .into_iter()
                .map(|(n, (plain, tot))| NormEntry { k, n, p, q: qq, plain, tot })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut defect: f64 = 0.0;
    let mut ok = true;
    for e in d.iter().filter(|e| e.q == 1 && e.p <= 1) {
        if let Some(t) = e.tot {
            let gap = (e.plain - t).abs();
            defect = defect.max(gap);
            if gap > tol.max(1e-12) * (1.0 + e.plain) {
                ok = false;
            }
        }
    }

    let mut l = Vec::new();
    let mut omega = Vec::new();
    if let Some(pol) = pol {
        let ext = extend_levels(sol)?;
        let mut ljobs = Vec::new();
        for theta in 1..=2u32.min(2 * dim as u32) {
            for qq in 0..=n_cap {
                for k in 1..ext.len() as u32 {
                    ljobs.push((k, theta, qq));
                }
            }
        }
        l = ljobs
            .par_iter()
            .map(|&(k, theta, qq)| -> Result<Vec<LNormEntry>> {
                let base: Vec<Monomial> = (0..=qq).flat_map(|p| b0_piece(dim, p, qq)).collect();
                let mut src = Vec::new();
                for f in theta_monomials(dim, theta) {
                    src.extend(times(&base, &f));
                }
                Ok(piece_norms(&ext[k as usize], &src, qq, n_cap)?
                    .into_iter()
                    .map(|(n, (plain, tot))| LNormEntry { k, n, theta, q: qq, plain, tot })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        for k in 0..pol.levels.len() as u32 {
            for n in 0..=pol.order {
                let norm = pol.component(k as usize, n).norm();
                if norm > 0.0 {
                    omega.push(OmegaNorm { k, n, norm });
                }
            }
        }
    }
    Ok(NormTables { d, l, omega, total_ne_total_defect: defect, total_ne_total_ok: ok })
}

#[derive(Clone, Debug, Serialize)]
pub struct FittedConstants {
    /// max(1, ‖D_{1,0}‖_{p,1}); bounds on D_k carry the factor Aᵏ.
    pub a: f64,
    pub c0: f64,
    /// ‖σ_tot‖ on (B²_tot)₂, at least 1.
    pub k: f64,
    pub k_measured: f64,
    /// ‖σ‖ on θ-degree 2 one-forms, raised to at least 3K.
    pub k1: f64,
    pub k1_measured: f64,
    /// max(1, ‖ω₀‖); Ω is linear in ω, so Ω bounds carry this factor.
    pub omega_prefactor: f64,
    pub c2: f64,
    /// max(C₀, C₂).
    pub c: f64,
    /// Geometric envelope ‖D_{k,n}‖_{1,1} ≤ A·C₁ⁿ over all computed k.
    pub c1: f64,
    /// Geometric envelope ‖Ω_{k,n}‖ ≤ P·C₃ⁿ over all computed k.
    pub c3: f64,
}

fn envelope(values: impl Iterator<Item = (u32, f64)>, prefactor: f64) -> f64 {
    values
        .filter(|(n, _)| *n > 0)
        .map(|(n, v)| (v / prefactor).powf(1.0 / n as f64))
        .fold(1.0, f64::max)
}

/// ‖σ_tot‖ on (B²_tot)₂ in the orthonormal monomial basis.
pub fn sigma_tot_norm<S: Scalar>(dim: u8) -> Result<f64> {
    let basis = enumerate_piece(dim, 2, 2, None);
    let m = image_matrix::<S>(&basis, |x| sigma_tot(dim, x))?;
    Ok(operator_norm(&m))
}

/// ‖σ‖ on Λ²(V₄)⊗V₁.
pub fn sigma_l2_norm<S: Scalar>(dim: u8) -> Result<f64> {
    let forms = enumerate(dim, 0, 0, 1, false);
    let mut basis = Vec::new();
    for f in theta_monomials(dim, 2) {
        basis.extend(times(&forms, &f));
    }
    let sigma = canonical_sigma::<S>(dim);
    let m = image_matrix::<S>(&basis, |x| sigma.apply(x))?;
    Ok(operator_norm(&m))
}

pub fn fit_constants<S: Scalar>(tables: &NormTables, dim: u8) -> Result<FittedConstants> {
    let gens = tables.d.iter().filter(|e| e.k == 1 && e.q == 1 && e.p <= 1);
    let a = gens.clone().filter(|e| e.n == 0).map(|e| e.plain).fold(1.0, f64::max);
    let c0 = envelope(gens.map(|e| (e.n, e.plain)), a);
    let k_measured = sigma_tot_norm::<S>(dim)?;
    let k = k_measured.max(1.0);
    let k1_measured = sigma_l2_norm::<S>(dim)?;
    let k1 = k1_measured.max(3.0 * k);
    let omega_prefactor = tables.omega.iter().filter(|o| o.k == 0 && o.n == 0).map(|o| o.norm).fold(1.0, f64::max);
    let c2 = envelope(tables.omega.iter().filter(|o| o.k == 0).map(|o| (o.n, o.norm)), omega_prefactor);
    let c1 = envelope(tables.d.iter().filter(|e| e.p == 1 && e.q == 1).map(|e| (e.n, e.plain)), a);
    let c3 = envelope(tables.omega.iter().map(|o| (o.n, o.norm)), omega_prefactor);
    Ok(FittedConstants { a, c0, k, k_measured, k1, k1_measured, omega_prefactor, c2, c: c0.max(c2), c1, c3 })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// "connection" (D_k on B⁰), "theta" (D_k on θ-forms) or "omega" (Ω_k).
    pub bound_kind: &'static str,
    pub k: u32,
    pub n: u32,
    pub p: u32,
    pub q: u32,
    pub measured: f64,
    pub bound: f64,
    /// True when the plain norm stood in for a non-totalizable piece.
    pub plain_fallback: bool,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        // measured norms come from floating SVD; allow rounding only
        self.measured <= self.bound * (1.0 + 1e-9) + 1e-12
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub checked: usize,
    pub violations: Vec<BoundCheck>,
    /// Smallest bound/measured ratio over nonzero measurements.
    pub min_margin: f64,
    pub pass: bool,
}

pub fn verify_bounds(tables: &NormTables, c: &FittedConstants, series: &SeriesTable) -> BoundsReport {
    let mut checks = Vec::new();
    let bf = |k: u32, n: u32| to_f64(&series.b(k as i64, n as i64));
    for e in &tables.d {
        let bound = e.q as f64 * (3.0 * c.k).powi(e.k as i32 - 1) * c.a.powi(e.k as i32) * c.c0.powi(e.n as i32) * bf(e.k, e.n);
        checks.push(BoundCheck {
            bound_kind: "connection",
            k: e.k,
            n: e.n,
            p: e.p,
            q: e.q,
            measured: e.tot.unwrap_or(e.plain),
            bound,
            plain_fallback: e.tot.is_none(),
        });
    }
    for e in &tables.l {
        let bound = 2.0
            * (e.q + e.theta * e.k) as f64
            * (3.0 * c.k).powi(e.k as i32 - 1)
            * c.a.powi(e.k as i32)
            * c.c0.powi(e.n as i32)
            * bf(e.k, e.n);
        checks.push(BoundCheck {
            bound_kind: "theta",
            k: e.k,
            n: e.n,
            p: e.theta,
            q: e.q,
            measured: e.tot.unwrap_or(e.plain),
            bound,
            plain_fallback: e.tot.is_none(),
        });
    }
    for o in &tables.omega {
        // the lemma counts Ω₀ as its k = 1 case
        let kl = o.k + 1;
        let bound = c.omega_prefactor
            * c.a.powi(o.k as i32)
            * (2.0 * c.k1).powi(o.k as i32)
            * c.c.powi(o.n as i32)
            * to_f64(&series.bm(2, kl as i64, o.n as i64));
        checks.push(BoundCheck { bound_kind: "omega", k: o.k, n: o.n, p: 2, q: o.n, measured: o.norm, bound, plain_fallback: false });
    }
    let min_margin = checks.iter().filter(|c| c.measured > 0.0).map(|c| c.bound / c.measured).fold(f64::INFINITY, f64::min);
    let violations: Vec<BoundCheck> = checks.iter().filter(|c| !c.holds()).cloned().collect();
    BoundsReport { checked: checks.len(), pass: violations.is_empty(), violations, min_margin }
}

/// 1/max_{n ≤ m} ‖Θ_n‖^{1/n} for each prefix m; +∞ while all norms vanish.
pub fn radius_profile(norms: &[f64]) -> Vec<f64> {
    let mut worst: f64 = 0.0;
    norms
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            worst = worst.max(v.powf(1.0 / (i + 1) as f64));
            if worst == 0.0 { f64::INFINITY } else { 1.0 / worst }
        })
        .collect()
}

/// Finite-order proxy for 1/limsup ‖Θ_n‖^{1/n}.
pub fn estimate_radius<S: Scalar>(series: &HodgeConnectionSeries<S>) -> Result<f64> {
    if series.norms.len() < 3 {
        return Err(WeilError::InsufficientOrder(format!(
            "radius estimate needs at least 3 orders, got {}",
            series.norms.len()
        )));
    }
    Ok(*radius_profile(&series.norms).last().expect("nonempty"))
}

pub fn theoretical_radius(c0: f64, k: f64) -> f64 {
    1.0 / (108.0 * k * c0)
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub constants: FittedConstants,
    pub tables: NormTables,
    pub bounds: BoundsReport,
    pub radius_profile: Vec<f64>,
    /// +∞ is emitted as null in JSON.
    pub estimated_radius: f64,
    pub theoretical_radius: f64,
    pub pass: bool,
}

/// Measure, fit, check every bound and estimate the radius in one pass.
pub fn estimate<S: Scalar>(
    sol: &ConnectionSolution<S>,
    series: &HodgeConnectionSeries<S>,
    pol: Option<&PolarizationSolution<S>>,
    tol: f64,
) -> Result<EstimateReport> {
    let estimated_radius = estimate_radius(series)?;
    let tables = measure_norms(sol, pol, tol)?;
    let constants = fit_constants::<S>(&tables, sol.dim)?;
    let n = sol.order as usize + 2;
    let table = SeriesTable::new(n, n, 2);
    let bounds = verify_bounds(&tables, &constants, &table);
    let theoretical = theoretical_radius(constants.c0, constants.k);
    let pass = bounds.pass && tables.total_ne_total_ok && estimated_radius > 0.0 && estimated_radius >= theoretical;
    Ok(EstimateReport {
        radius_profile: radius_profile(&series.norms),
        constants,
        tables,
        bounds,
        estimated_radius,
        theoretical_radius: theoretical,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{hodge_connection_series, solve};
    use crate::kahler::{builtin_example, levi_civita};
    use crate::polarization::{kahler_form, solve_polarization};
    use crate::scalar::{rat, Qc};

    #[test]
    fn sequence_values() {
        let t = SeriesTable::new(8, 8, 2);
        assert_eq!(t.catalan(1), q(1));
        assert_eq!(t.catalan(4), q(5));
        assert_eq!(t.catalan(0), q(0));
        assert_eq!(t.b(1, 7), q(1));
        assert_eq!(t.b(2, 0), rat(1, 2));
        assert_eq!(t.b(2, 1), rat(3, 2));
        assert_eq!(t.b(3, 3), rat(50, 3));
        assert_eq!(t.bm(2, 2, 0), q(1));
        assert_eq!(t.b(0, 3), q(0));
        assert_eq!(t.b(2, -1), q(0));
    }

    #[test]
    fn generating_bounds_hold() {
        let r = check_generating_bounds(12, 12, 12);
        assert!(r.pass, "{r:?}");
        assert!(r.min_c_for_c2_6 > 0.0);
    }

    #[test]
    fn radius_profile_is_non_increasing() {
        let p = radius_profile(&[0.0, 2.0, 1.0, 27.0]);
        assert_eq!(p[0], f64::INFINITY);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert!((p[3] - 1.0 / 27f64.powf(0.25)).abs() < 1e-12);
        assert_eq!(theoretical_radius(1.0, 1.0), 1.0 / 108.0);
    }

    fn fs(order: u32) -> (ConnectionSolution<Qc>, PolarizationSolution<Qc>) {
        let g = builtin_example::<Qc>("fubini-study", 1, order).unwrap();
        let sol = solve(&levi_civita(&g, 0.0).unwrap(), order, 0.0).unwrap();
        let pol = solve_polarization(&sol, &kahler_form(&g), order, 0.0).unwrap();
        (sol, pol)
    }

    #[test]
    fn fubini_study_norms_and_bounds() {
        let (sol, pol) = fs(5);
        let series = hodge_connection_series(&sol).unwrap();
        let r = estimate(&sol, &series, Some(&pol), 1e-10).unwrap();
        let d11 = r.tables.d.iter().find(|e| e.k == 1 && e.n == 1 && e.p == 1 && e.q == 1).map_or(0.0, |e| e.plain);
        let d12 = r.tables.d.iter().find(|e| e.k == 1 && e.n == 2 && e.p == 1 && e.q == 1).unwrap().plain;
        assert_eq!(d11, 0.0);
        assert!((d12 - 2.0).abs() < 1e-9, "{d12}");
        assert!(r.tables.total_ne_total_ok);
        assert!(r.bounds.pass, "{:?}", r.bounds.violations);
        assert!(r.estimated_radius.is_finite() && r.estimated_radius >= r.theoretical_radius);
    }

    #[test]
    fn shrunken_constants_are_flagged() {
        let (sol, pol) = fs(5);
        let tables = measure_norms(&sol, Some(&pol), 1e-10).unwrap();
        let mut c = fit_constants::<Qc>(&tables, 1).unwrap();
        let t = SeriesTable::new(7, 7, 2);
        assert!(verify_bounds(&tables, &c, &t).pass);
        c.k *= 0.01;
        c.k1 *= 0.01;
        c.c0 *= 0.5;
        assert!(!verify_bounds(&tables, &c, &t).pass);
    }

    #[test]
    fn flat_radius_is_infinite() {
        let g = builtin_example::<Qc>("flat", 2, 4).unwrap();
        let sol = solve(&levi_civita(&g, 0.0).unwrap(), 4, 0.0).unwrap();
        let series = hodge_connection_series(&sol).unwrap();
        assert_eq!(estimate_radius(&series).unwrap(), f64::INFINITY);
        let tables = measure_norms(&sol, None, 1e-10).unwrap();
        assert!(tables.d.iter().filter(|e| e.k >= 2).all(|e| e.plain == 0.0));
        let short = solve(&levi_civita(&builtin_example::<Qc>("flat", 1, 2).unwrap(), 0.0).unwrap(), 2, 0.0).unwrap();
        assert!(matches!(estimate_radius(&hodge_connection_series(&short).unwrap()), Err(WeilError::InsufficientOrder(_))));
    }
}
