//! Metric and connection jets at the base point, Levi-Civita data, curvature split,
//! the Kählerian test, and built-in example geometries.
//!
//! Conventions: a Christoffel jet Γ^k_{ij}(z, z̄) enters the connection derivation as
//! D₁(s_k) = −Σ Γ^k_{ij} s_i dz_j − Σ Γ^k_{i j̄} s_i dz̄_j, with the second (mixed) family
//! vanishing exactly when the connection is holomorphic. The curvature operator is
//! R = −D₁∘D₁ on S¹, so R(s_k) ∋ (∂_{z̄_l}Γ^k_{ij}) s_i dz̄_l∧dz_j.

use serde::Serialize;

use crate::error::{Result, WeilError};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::weil::{dz, dzb, real_structure, s, z, zb, Derivation, Element, Kind, Monomial};

/// Power series in z, z̄ represented as base-coordinate-only elements.
pub type Series<S> = Element<S>;

fn check_series<S: Scalar>(x: &Series<S>) -> bool {
    x.terms().all(|(m, _)| m.v2_order() == m.total() && m.odd().is_empty() && m.dress().is_none())
}

fn truncate<S: Scalar>(x: &Series<S>, order: i64) -> Series<S> {
    if order < 0 {
        return Series::zero();
    }
    x.truncate_total(order as u32)
}

/// ∂/∂z_i (holomorphic) or ∂/∂z̄_i.
pub fn partial<S: Scalar>(dim: u8, i: u8, antiholomorphic: bool, x: &Series<S>) -> Series<S> {
    let g = if antiholomorphic { zb(i) } else { z(i) };
    Derivation::zero(false, dim).with(g, Element::one()).apply(x).expect("series derivative")
}

/// Hermitian metric jet: `g[i][j]` is g_{i j̄} as a series of V2-order ≤ `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet<S> {
    pub dim: u8,
    pub order: u32,
    pub g: Vec<Vec<Series<S>>>,
}

impl<S: Scalar> MetricJet<S> {
    pub fn new(dim: u8, order: u32, g: Vec<Vec<Series<S>>>) -> Result<Self> {
        if g.len() != dim as usize || g.iter().any(|r| r.len() != dim as usize) {
            return Err(WeilError::InvalidInput("metric has the wrong shape".into()));
        }
        if g.iter().flatten().any(|x| !check_series(x)) {
            return Err(WeilError::InvalidInput("metric entries must be series in z, z̄".into()));
        }
        let g = g.into_iter().map(|r| r.into_iter().map(|x| x.truncate_total(order)).collect()).collect();
        Ok(MetricJet { dim, order, g })
    }

    /// Max deviation from g_{ij̄} = conj(g_{jī}) where conj swaps z and z̄.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim as usize;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.g[i][j].sub(&conj_series(&self.g[j][i]));
                worst = worst.max(d.max_abs());
            }
        }
        worst
    }

    /// g(0) as a matrix.
    pub fn at_origin(&self) -> Matrix<S> {
        let n = self.dim as usize;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.g[i][j].coeff(&Monomial::one()));
            }
        }
        m
    }

    pub fn conjugated(&self) -> MetricJet<S> {
        let n = self.dim as usize;
        let g = (0..n).map(|i| (0..n).map(|j| conj_series(&self.g[j][i])).collect()).collect();
        MetricJet { dim: self.dim, order: self.order, g }
    }

    pub fn scaled(&self, c: &S) -> MetricJet<S> {
        MetricJet {
            dim: self.dim,
            order: self.order,
            g: self.g.iter().map(|r| r.iter().map(|x| x.scale(c)).collect()).collect(),
        }
    }
}

/// Complex conjugation of a series (z ↔ z̄, coefficients conjugated).
pub fn conj_series<S: Scalar>(x: &Series<S>) -> Series<S> {
    crate::weil::naive_conj(x)
}

/// Christoffel jet. `hol[k][i][j]` = Γ^k_{ij}, `mixed[k][i][j]` = Γ^k_{i j̄}; series known
/// to V2-order `order − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelJet<S> {
    pub dim: u8,
    pub order: u32,
    pub hol: Vec<Vec<Vec<Series<S>>>>,
    pub mixed: Vec<Vec<Vec<Series<S>>>>,
}

impl<S: Scalar> ChristoffelJet<S> {
    pub fn zero(dim: u8, order: u32) -> Self {
        let n = dim as usize;
        let z3 = vec![vec![vec![Series::zero(); n]; n]; n];
        ChristoffelJet { dim, order, hol: z3.clone(), mixed: z3 }
    }

    pub fn new(
        dim: u8,
        order: u32,
        hol: Vec<Vec<Vec<Series<S>>>>,
        mixed: Vec<Vec<Vec<Series<S>>>>,
    ) -> Result<Self> {
        let n = dim as usize;
        let shaped = |t: &Vec<Vec<Vec<Series<S>>>>| t.len() == n && t.iter().all(|a| a.len() == n && a.iter().all(|b| b.len() == n));
        if !shaped(&hol) || !shaped(&mixed) {
            return Err(WeilError::InvalidInput("Christoffel jet has the wrong shape".into()));
        }
        if hol.iter().chain(&mixed).flatten().flatten().any(|x| !check_series(x)) {
            return Err(WeilError::InvalidInput("Christoffel entries must be series in z, z̄".into()));
        }
        let cut = |t: Vec<Vec<Vec<Series<S>>>>| -> Vec<Vec<Vec<Series<S>>>> {
            t.into_iter()
                .map(|a| a.into_iter().map(|b| b.into_iter().map(|x| truncate(&x, order as i64 - 1)).collect()).collect())
                .collect()
        };
        Ok(ChristoffelJet { dim, order, hol: cut(hol), mixed: cut(mixed) })
    }
}

/// Curvature R = −D₁∘D₁ on s_k, split by form type. Elements are 2-forms with one s factor.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureJet<S> {
    pub dim: u8,
    pub r20: Vec<Element<S>>,
    pub r11: Vec<Element<S>>,
    pub r02: Vec<Element<S>>,
}

impl<S: Scalar> CurvatureJet<S> {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.r20.iter().chain(&self.r11).chain(&self.r02).all(|x| x.is_negligible(tol))
    }

    /// Coefficient series of s_i dz̄_l∧dz_j in R(s_k) (1-based indices).
    pub fn r11_coefficient(&self, k: u8, i: u8, l: u8, j: u8) -> Series<S> {
        let (sign, target) = Monomial::from_factors(&[s(i), dzb(l), dz(j)]).expect("distinct factors");
        let mut out = Series::zero();
        for (m, c) in self.r11[k as usize - 1].terms() {
            let (v2, rest) = m.split_v2();
            if rest == target {
                out.add_term(v2, if sign < 0 { -c.clone() } else { c.clone() });
            }
        }
        out
    }
}

/// Levi-Civita connection Γ^k_{ij} = Σ_l ∂_i g_{j l̄} g^{l̄ k}, to V2-order N−1.
pub fn levi_civita<S: Scalar>(g: &MetricJet<S>, tol: f64) -> Result<ChristoffelJet<S>> {
    let n = g.dim as usize;
    let order = g.order;
    let g0 = g.at_origin();
    // g0⁻¹ by exact solve; singular means degenerate
    let mut g0inv = Matrix::<S>::zeros(n, n);
    for c in 0..n {
        let mut e = vec![S::zero(); n];
        e[c] = S::one();
        let x = g0.solve_unique(&e, tol).map_err(|_| WeilError::DegenerateMetric)?;
        for r in 0..n {
            g0inv.set(r, c, x[r].clone());
        }
    }
    let cut = order as i64 - 1;
    // series matrices
    let smul = |a: &Vec<Vec<Series<S>>>, b: &Vec<Vec<Series<S>>>| -> Vec<Vec<Series<S>>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = Series::zero();
                        for k in 0..n {
                            acc = acc.add(&truncate(&a[i][k].mul(&b[k][j]), cut));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    let g0inv_s: Vec<Vec<Series<S>>> =
        (0..n).map(|i| (0..n).map(|j| Series::term(Monomial::one(), g0inv.get(i, j).clone())).collect()).collect();
    // E = G − G0; M = −G0⁻¹ E
    let e: Vec<Vec<Series<S>>> = (0..n)
        .map(|i| (0..n).map(|j| truncate(&g.g[i][j].filter(|m| !m.is_one()), cut)).collect())
        .collect();
    let m = smul(&g0inv_s, &e).into_iter().map(|r| r.into_iter().map(|x| x.neg()).collect()).collect::<Vec<_>>();
    // H = Σ_k M^k G0⁻¹
    let mut h = g0inv_s.clone();
    let mut term = g0inv_s.clone();
    for _ in 0..order.max(1) {
        term = smul(&m, &term);
        if term.iter().flatten().all(Element::is_zero) {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                h[i][j] = h[i][j].add(&term[i][j]);
            }
        }
    }
    let mut gamma = ChristoffelJet::zero(g.dim, order);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = Series::zero();
                for l in 0..n {
                    let dg = partial(g.dim, i as u8 + 1, false, &g.g[j][l]);
                    acc = acc.add(&truncate(&dg.mul(&h[l][k]), cut));
                }
                gamma.hol[k][i][j] = acc;
            }
        }
    }
    Ok(gamma)
}

/// D₁ without the Kählerian gate: z ↦ dz, s_k ↦ −Γ s dz − Γ_mixed s dz̄, s̄ by reality.
pub fn connection_derivation_unchecked<S: Scalar>(gamma: &ChristoffelJet<S>) -> Derivation<S> {
    let n = gamma.dim;
    let mut d = Derivation::zero(true, n);
    for i in 1..=n {
        d.set(z(i), Element::gen(dz(i)));
        d.set(zb(i), Element::gen(dzb(i)));
    }
    for k in 1..=n {
        let mut img = Element::zero();
        for i in 1..=n {
            for j in 1..=n {
                let h = &gamma.hol[k as usize - 1][i as usize - 1][j as usize - 1];
                img = img.sub(&h.mul(&Element::product_of(&[s(i), dz(j)])));
                let mx = &gamma.mixed[k as usize - 1][i as usize - 1][j as usize - 1];
                img = img.sub(&mx.mul(&Element::product_of(&[s(i), dzb(j)])));
            }
        }
        // s̄ = −R(s) so D(s̄) = −R(D s)
        let bar = real_structure(&img).neg();
        d.set(s(k), img);
        d.set(crate::weil::sb(k), bar);
    }
    d
}

/// −D₁∘D₁ on each s_k, split into (2,0), (1,1), (0,2) form parts; truncated at V2-order
/// `order − 2`, the range certified by a jet of the given order.
pub fn curvature_split<S: Scalar>(gamma: &ChristoffelJet<S>) -> Result<CurvatureJet<S>> {
    let d = connection_derivation_unchecked(gamma);
    let cut = gamma.order as i64 - 2;
    let mut out = CurvatureJet { dim: gamma.dim, r20: vec![], r11: vec![], r02: vec![] };
    for k in 1..=gamma.dim {
        let r = d.apply(d.image(s(k))?)?.neg().filter(|m| (m.v2_order() as i64) <= cut);
        out.r20.push(r.filter(|m| m.count(Kind::V1h) == 2));
        out.r11.push(r.filter(|m| m.count(Kind::V1h) == 1 && m.count(Kind::V1a) == 1));
        out.r02.push(r.filter(|m| m.count(Kind::V1a) == 2));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KahlerReport {
    pub pass: bool,
    pub torsion_free: bool,
    pub holomorphic: bool,
    pub r20_vanishes: bool,
    pub failure: Option<String>,
}

/// Torsion, holomorphy, and R^{2,0} checks, in that order; the first failure is reported.
pub fn verify_kahlerian<S: Scalar>(gamma: &ChristoffelJet<S>, tol: f64) -> Result<KahlerReport> {
    let n = gamma.dim as usize;
    let mut rep = KahlerReport { pass: true, torsion_free: true, holomorphic: true, r20_vanishes: true, failure: None };
    'torsion: for k in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = gamma.hol[k][i][j].sub(&gamma.hol[k][j][i]);
                if !diff.is_negligible(tol) {
                    rep.torsion_free = false;
                    rep.failure = Some(format!("torsion nonzero: Γ^{}_{}{} ≠ Γ^{}_{}{}", k + 1, i + 1, j + 1, k + 1, j + 1, i + 1));
                    break 'torsion;
                }
            }
        }
    }
    let mut lowest: Option<u32> = None;
    for x in gamma.mixed.iter().flatten().flatten() {
        for (m, c) in x.terms() {
            if !c.is_negligible(tol) {
                lowest = Some(lowest.map_or(m.v2_order(), |o| o.min(m.v2_order())));
            }
        }
    }
    if let Some(d) = lowest {
        rep.holomorphic = false;
        rep.failure.get_or_insert(format!("holomorphy violated at order {d}"));
    }
    let curv = curvature_split(gamma)?;
    if let Some((k, r)) = curv.r20.iter().enumerate().find(|(_, r)| !r.is_negligible(tol)) {
        rep.r20_vanishes = false;
        let order = r.terms().map(|(m, _)| m.v2_order()).min().unwrap_or(0);
        rep.failure.get_or_insert(format!("R^(2,0) nonzero on s{} at order {order}", k + 1));
    }
    rep.pass = rep.torsion_free && rep.holomorphic && rep.r20_vanishes;
    Ok(rep)
}

/// D₁ for a Kählerian connection.
pub fn connection_derivation<S: Scalar>(gamma: &ChristoffelJet<S>, tol: f64) -> Result<Derivation<S>> {
    let rep = verify_kahlerian(gamma, tol)?;
    if !rep.pass {
        return Err(WeilError::NotKahlerian(rep.failure.unwrap_or_default()));
    }
    Ok(connection_derivation_unchecked(gamma))
}

fn binomial_signed(a: i64, k: u32) -> (i64, i64) {
    // C(a, k) as a rational num/den for possibly negative a
    let mut num: i64 = 1;
    let mut den: i64 = 1;
    for t in 0..k as i64 {
        num *= a - t;
        den *= t + 1;
    }
    (num, den)
}

/// (1 + ε x)^a truncated at V2-order `order`, where x = Σ z_i z̄_i and ε = ±1.
fn radial_power<S: Scalar>(dim: u8, a: i64, eps: i64, order: u32) -> Series<S> {
    let mut x = Series::zero();
    for i in 1..=dim {
        x = x.add(&Element::product_of(&[z(i), zb(i)]));
    }
    let mut out = Series::zero();
    let mut xp = Series::one();
    for k in 0..=(order / 2) {
        let (num, den) = binomial_signed(a, k);
        let sign = if eps < 0 && k % 2 == 1 { -1 } else { 1 };
        out = out.add(&xp.scale(&S::from_ratio(sign * num, den)));
        xp = xp.mul(&x).truncate_total(order);
    }
    out.truncate_total(order)
}

pub const BUILTIN_NAMES: [&str; 4] = ["flat", "fubini-study", "poincare", "product"];

/// Built-in metric jets: flat, Fubini–Study, Poincaré ball, and Fubini–Study ⊕ flat.
pub fn builtin_example<S: Scalar>(name: &str, dim: u8, order: u32) -> Result<MetricJet<S>> {
    if dim == 0 {
        return Err(WeilError::InvalidInput("dimension must be positive".into()));
    }
    let n = dim as usize;
    let delta = |i: usize, j: usize| if i == j { Series::<S>::one() } else { Series::zero() };
    let kahler_potential_metric = |eps: i64, sub_dim: u8| -> Vec<Vec<Series<S>>> {
        // ∂∂̄ of ε log(1 + ε|z|²): δ/(1+ε|z|²) − ε z̄_i z_j/(1+ε|z|²)²
        let p1 = radial_power::<S>(sub_dim, -1, eps, order);
        let p2 = radial_power::<S>(sub_dim, -2, eps, order);
        let m = sub_dim as usize;
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let cross = Element::product_of(&[zb(i as u8 + 1), z(j as u8 + 1)]).mul(&p2).scale(&S::from_i64(-eps));
                        delta(i, j).mul(&p1).add(&cross).truncate_total(order)
                    })
                    .collect()
            })
            .collect()
    };
    let g = match name {
        "flat" => (0..n).map(|i| (0..n).map(|j| delta(i, j)).collect()).collect(),
        "fubini-study" => kahler_potential_metric(1, dim),
        "poincare" => kahler_potential_metric(-1, dim),
        "product" => {
            if dim < 2 {
                return Err(WeilError::InvalidInput("product example needs dim ≥ 2".into()));
            }
            let fs = kahler_potential_metric(1, 1);
            (0..n)
                .map(|i| (0..n).map(|j| if i == 0 && j == 0 { fs[0][0].clone() } else { delta(i, j) }).collect())
                .collect()
        }
        other => return Err(WeilError::UnknownExample(other.to_string())),
    };
    MetricJet::new(dim, order, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qc;

    fn mono(gens: &[crate::weil::Gen]) -> Monomial {
        Monomial::from_factors(gens).unwrap().1
    }

    #[test]
    fn fubini_study_binomial_coefficients() {
        let g = builtin_example::<Qc>("fubini-study", 1, 4).unwrap();
        let x = &g.g[0][0];
        assert_eq!(x.coeff(&Monomial::one()), Qc::from_i64(1));
        assert_eq!(x.coeff(&mono(&[z(1), zb(1)])), Qc::from_i64(-2));
        assert_eq!(x.coeff(&mono(&[z(1), z(1), zb(1), zb(1)])), Qc::from_i64(3));
        assert_eq!(x.len(), 3);
    }

    #[test]
    fn flat_and_product_shapes() {
        let g = builtin_example::<Qc>("flat", 1, 4).unwrap();
        assert_eq!(g.g[0][0], Series::one());
        let p = builtin_example::<Qc>("product", 2, 3).unwrap();
        assert_eq!(p.g[1][1], Series::one());
        assert!(p.g[0][1].is_zero() && p.g[1][0].is_zero());
        assert_eq!(p.g[0][0].coeff(&mono(&[z(1), zb(1)])), Qc::from_i64(-2));
        assert!(matches!(builtin_example::<Qc>("sphere", 1, 2), Err(WeilError::UnknownExample(_))));
    }

    #[test]
    fn builtins_are_hermitian() {
        for name in BUILTIN_NAMES {
            let g = builtin_example::<Qc>(name, 2, 4).unwrap();
            assert_eq!(g.hermitian_defect(), 0.0, "{name}");
            assert_eq!(g.conjugated(), g);
        }
    }

    /// Independent oracle: −2z̄/(1+zz̄) and 2z̄/(1−zz̄) expanded by hand.
    #[test]
    fn levi_civita_of_fs_and_poincare() {
        let g = builtin_example::<Qc>("fubini-study", 1, 6).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        let mut expect = Series::<Qc>::zero();
        let mut sign = -2;
        for k in 0..3u32 {
            let mut f = vec![zb(1)];
            for _ in 0..k {
                f.extend([z(1), zb(1)]);
            }
            expect.add_term(mono(&f), Qc::from_i64(sign));
            sign = -sign;
        }
        assert_eq!(gamma.hol[0][0][0], expect);

        let g = builtin_example::<Qc>("poincare", 1, 6).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        let mut expect = Series::<Qc>::zero();
        for k in 0..3u32 {
            let mut f = vec![zb(1)];
            for _ in 0..k {
                f.extend([z(1), zb(1)]);
            }
            expect.add_term(mono(&f), Qc::from_i64(2));
        }
        assert_eq!(gamma.hol[0][0][0], expect);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let g = builtin_example::<Qc>("flat", 1, 2).unwrap().scaled(&Qc::from_i64(0));
        assert_eq!(levi_civita(&g, 0.0).unwrap_err(), WeilError::DegenerateMetric);
    }

    #[test]
    fn flat_curvature_is_zero() {
        let g = builtin_example::<Qc>("flat", 2, 4).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        assert!(gamma.hol.iter().flatten().flatten().all(Element::is_zero));
        assert!(curvature_split(&gamma).unwrap().is_zero(0.0));
    }

    #[test]
    fn fs_curvature_at_origin() {
        let g = builtin_example::<Qc>("fubini-study", 1, 4).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        let r = curvature_split(&gamma).unwrap();
        assert_eq!(r.r11_coefficient(1, 1, 1, 1).coeff(&Monomial::one()), Qc::from_i64(-2));
        assert!(r.r20[0].is_zero() && r.r02[0].is_zero());
    }

    #[test]
    fn kahlerian_detector_examples() {
        for name in BUILTIN_NAMES {
            let g = builtin_example::<Qc>(name, 2, 4).unwrap();
            let gamma = levi_civita(&g, 0.0).unwrap();
            assert!(verify_kahlerian(&gamma, 0.0).unwrap().pass, "{name}");
        }
        // mixed component z̄ breaks holomorphy at order 1
        let mut gamma = ChristoffelJet::<Qc>::zero(1, 3);
        gamma.mixed[0][0][0] = Series::gen(zb(1));
        let rep = verify_kahlerian(&gamma, 0.0).unwrap();
        assert_eq!(rep.failure.as_deref(), Some("holomorphy violated at order 1"));
        // asymmetric lower indices
        let mut gamma = ChristoffelJet::<Qc>::zero(2, 3);
        gamma.hol[0][0][1] = Series::one();
        let rep = verify_kahlerian(&gamma, 0.0).unwrap();
        assert!(!rep.pass && rep.failure.unwrap().starts_with("torsion nonzero"));
    }

    #[test]
    fn connection_derivation_on_fs() {
        let g = builtin_example::<Qc>("fubini-study", 1, 4).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        let d = connection_derivation(&gamma, 0.0).unwrap();
        let img = d.image(s(1)).unwrap();
        // D₁(s) = (2z̄ − 2z z̄² + …) s dz
        assert_eq!(img.coeff(&mono(&[zb(1), s(1), dz(1)])), Qc::from_i64(2));
        assert_eq!(img.coeff(&mono(&[z(1), zb(1), zb(1), s(1), dz(1)])), Qc::from_i64(-2));
        assert_eq!(d.image(z(1)).unwrap(), &Element::gen(dz(1)));
        assert!(crate::weil::derivation_is_real(&d, 0.0).unwrap());
    }
}
