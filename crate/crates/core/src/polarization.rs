//! Polarization recursion: extend D to the θ-generators, solve DΩ = 0 from a parallel
//! Kähler form, and check holomorphy, type, reality, restriction, and positivity.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::connection::{ConnectionSolution, ResidualEntry, ResidualReport};
use crate::error::{Result, WeilError};
use crate::hodge::HodgeBidegree;
use crate::kahler::MetricJet;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::weil::{
    canonical_sigma, d_r, generators, naive_conj, real_structure, s, sb, sigma_tot, th, thb, Derivation, Element,
    Kind, Monomial,
};

/// Ω₀ = i Σ g_{ij̄} θ_i θ̄_j.
pub fn kahler_form<S: Scalar>(g: &MetricJet<S>) -> Element<S> {
    let mut out = Element::zero();
    let n = g.dim;
    for i in 1..=n {
        for j in 1..=n {
            let t = Element::product_of(&[th(i), thb(j)]);
            out = out.add(&g.g[i as usize - 1][j as usize - 1].mul(&t));
        }
    }
    out.scale(&S::i())
}

/// Each level D_k with D_k(θ_i) = −dʳ(D_k(s_i)) and likewise for θ̄_i.
pub fn extend_levels<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<Vec<Derivation<S>>> {
    let dr = d_r::<S>(sol.dim);
    sol.levels
        .iter()
        .map(|d| {
            let mut e = d.clone();
            for i in 1..=sol.dim {
                e.set(th(i), dr.apply(d.image(s(i))?)?.neg());
                e.set(thb(i), dr.apply(d.image(sb(i))?)?.neg());
            }
            Ok(e)
        })
        .collect()
}

/// D on the θ-extended algebra (sum of the extended levels).
pub fn extend_derivation_to_ll<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<Derivation<S>> {
    let mut out = Derivation::zero(true, sol.dim);
    for d in extend_levels(sol)? {
        out = out.plus(&d);
    }
    Ok(out)
}

/// max over generators of ‖{D, dʳ}(g)‖.
pub fn dr_anticommutator_residual<S: Scalar>(d: &Derivation<S>) -> Result<f64> {
    let comm = d.supercommutator(&d_r::<S>(d.dim))?;
    let mut worst: f64 = 0.0;
    for g in generators(d.dim) {
        worst = worst.max(comm.image(g)?.norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarizationDiagnostics {
    /// ‖C γ_k‖ per k ≥ 1.
    pub kernel: Vec<f64>,
    /// Whether the σ_tot route was available at every order (D(θ) weakly Hodge).
    pub totalized_route: bool,
    /// ‖Ω_k(σ_tot route) − Ω_k(σ route)‖ where the σ_tot route applies.
    pub route_mismatch: f64,
}

#[derive(Clone, Debug)]
pub struct PolarizationSolution<S> {
    pub dim: u8,
    pub order: u32,
    /// Ω_k, k = 0..N; Ω₀ = ω.
    pub levels: Vec<Element<S>>,
    pub extended: Vec<Derivation<S>>,
    pub diagnostics: PolarizationDiagnostics,
}

impl<S: Scalar> PolarizationSolution<S> {
    pub fn total(&self) -> Element<S> {
        self.levels.iter().fold(Element::zero(), |a, b| a.add(b))
    }

    pub fn omega(&self) -> &Element<S> {
        &self.levels[0]
    }

    /// Ω_{k,n}: total-degree-n part of Ω_k.
    pub fn component(&self, k: usize, n: u32) -> Element<S> {
        self.levels[k].filter(|m| m.total() == n)
    }

    fn cap(&self) -> u32 {
        self.order
    }
}

fn is_type_11(m: &Monomial) -> bool {
    m.hodge() == HodgeBidegree::new(1, 1) && m.theta_degree() == 2 && m.form_degree() == 0
}

/// Solve Ω_k = −(1/k)σ(γ_k), γ_k = Σ_{p<k} D_{k−p}Ω_p, after the parallel-form gate.
pub fn solve_polarization<S: Scalar>(
    sol: &ConnectionSolution<S>,
    omega: &Element<S>,
    order: u32,
    tol: f64,
) -> Result<PolarizationSolution<S>> {
    if let Some((m, _)) = omega.terms().find(|(m, _)| !is_type_11(m)) {
        return Err(WeilError::FormNotType11(m.key()));
    }
    let order = order.min(sol.order);
    let cap = order;
    let extended = extend_levels(sol)?;
    let omega0 = omega.truncate_total(cap);
    if !extended[1].apply(&omega0)?.truncate_total(cap).chop(tol).is_negligible(tol) {
        return Err(WeilError::FormNotParallel);
    }
    let sigma = canonical_sigma::<S>(sol.dim);
    let c = &extended[0];
    let mut levels = vec![omega0];
    let mut diag = PolarizationDiagnostics { kernel: Vec::new(), totalized_route: true, route_mismatch: 0.0 };
    for k in 1..=order as usize {
        let mut gamma = Element::zero();
        let mut gamma_tot: Option<Element<S>> = Some(Element::zero());
        for p in 0..k {
            let level = &extended[k - p];
            gamma = gamma.add(&level.apply(&levels[p])?.truncate_total(cap));
            gamma_tot = match (gamma_tot, level.apply_tot(&levels[p], 1)) {
                (Some(acc), Ok(x)) => Some(acc.add(&x.truncate_total(cap))),
                (_, Err(WeilError::NotTotalizable(..))) | (None, _) => None,
                (_, Err(e)) => return Err(e),
            };
        }
        let gamma = gamma.chop(tol);
        let kernel = c.apply(&gamma)?.chop(tol);
        diag.kernel.push(kernel.norm());
        if !kernel.is_negligible(tol) {
            return Err(WeilError::FlatnessObstruction { order: k, detail: "C γ_k ≠ 0 in the polarization recursion".into() });
        }
        let scale = S::from_ratio(-1, k as i64);
        let omega_k = sigma.apply(&gamma)?.scale(&scale).chop(tol);
        if !c.apply(&omega_k)?.add(&gamma).chop(tol).is_negligible(tol) {
            return Err(WeilError::FlatnessObstruction { order: k, detail: "C Ω_k ≠ −γ_k".into() });
        }
        match gamma_tot {
            Some(gt) if !gt.is_zero() => {
                let alt = sigma_tot(sol.dim, &gt)?.project().scale(&scale);
                diag.route_mismatch = diag.route_mismatch.max(alt.sub(&omega_k).norm());
            }
            Some(_) => {}
            None => diag.totalized_route = false,
        }
        levels.push(omega_k);
    }
    Ok(PolarizationSolution { dim: sol.dim, order, levels, extended, diagnostics: diag })
}

/// DΩ split by (augmentation, total) degree; certified through total degree N.
pub fn holomorphy_residual<S: Scalar>(pol: &PolarizationSolution<S>) -> Result<ResidualReport> {
    let mut d = Derivation::zero(true, pol.dim);
    for e in &pol.extended {
        d = d.plus(e);
    }
    let x = d.apply(&pol.total())?;
    let mut rep = ResidualReport { certified: Vec::new(), beyond_certified_order: Vec::new(), max_certified: 0.0, exact_zero: true };
    let mut cells: std::collections::BTreeMap<(u32, u32), Element<S>> = Default::default();
    for (m, c) in x.terms() {
        cells.entry((m.aug_degree(), m.total())).or_default().add_term(m.clone(), c.clone());
    }
    for ((aug, total), e) in cells {
        let entry = ResidualEntry { generator: "Ω".into(), aug, total, norm: e.norm() };
        if total <= pol.cap() {
            rep.exact_zero &= e.is_zero();
            rep.max_certified = rep.max_certified.max(entry.norm);
            rep.certified.push(entry);
        } else {
            rep.beyond_certified_order.push(entry);
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarizationAudit {
    pub non_type_11: Vec<String>,
    pub wrong_augmentation: Vec<String>,
    pub reality_defect: f64,
    pub omega1_zero: bool,
}

impl PolarizationAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.non_type_11.is_empty() && self.wrong_augmentation.is_empty() && self.reality_defect <= tol && self.omega1_zero
    }
}

/// Hodge type (1,1), augmentation degree k, reality R(Ω) = Ω, and Ω₁ = 0.
pub fn audit_polarization<S: Scalar>(pol: &PolarizationSolution<S>, tol: f64) -> PolarizationAudit {
    let mut a = PolarizationAudit { non_type_11: Vec::new(), wrong_augmentation: Vec::new(), reality_defect: 0.0, omega1_zero: true };
    for (k, om) in pol.levels.iter().enumerate() {
        for (m, _) in om.terms() {
            if !is_type_11(m) {
                a.non_type_11.push(format!("Ω_{k} ∋ {}", m.key()));
            }
            if m.aug_degree() != k as u32 {
                a.wrong_augmentation.push(format!("Ω_{k} ∋ {}", m.key()));
            }
        }
        a.reality_defect = a.reality_defect.max(real_structure(om).sub(om).norm());
    }
    a.omega1_zero = pol.levels.get(1).is_none_or(|x| x.is_negligible(tol));
    a
}

#[derive(Clone, Debug, Serialize)]
pub struct KahlerFormReport {
    /// ‖D₀Ω‖ and ‖D̄₀Ω‖, the H-type components of DΩ, on the certified range.
    pub h10_residual: f64,
    pub h01_residual: f64,
    /// ω_I restricted to augmentation degree 0 equals ω.
    pub restriction_matches: bool,
}

/// H-type part of a level: images whose Hodge shift relative to the source is `shift`,
/// with θ-images induced through dʳ.
fn h_type_part<S: Scalar>(d: &Derivation<S>, shift: HodgeBidegree) -> Result<Derivation<S>> {
    let mut out = Derivation::zero(true, d.dim);
    for g in generators(d.dim) {
        if matches!(g.kind, Kind::V4h | Kind::V4a) {
            continue;
        }
        let src = g.kind.hodge();
        out.set(g, d.image(g)?.filter(|m| m.plain_hodge() - src == shift));
    }
    let dr = d_r::<S>(d.dim);
    for i in 1..=d.dim {
        out.set(th(i), dr.apply(out.image(s(i))?)?.neg());
        out.set(thb(i), dr.apply(out.image(sb(i))?)?.neg());
    }
    Ok(out)
}

/// ω_I = ½(Ω + ν(Ω)) with its closedness residuals.
pub fn kahler_form_reconstruct<S: Scalar>(pol: &PolarizationSolution<S>) -> Result<(Element<S>, KahlerFormReport)> {
    let omega = pol.total();
    let omega_i = omega.add(&naive_conj(&omega)).scale(&S::from_ratio(1, 2));
    let mut d10 = Derivation::zero(true, pol.dim);
    let mut d01 = Derivation::zero(true, pol.dim);
    for e in &pol.extended {
        d10 = d10.plus(&h_type_part(e, HodgeBidegree::new(1, 0))?);
        d01 = d01.plus(&h_type_part(e, HodgeBidegree::new(0, 1))?);
    }
    let cap = pol.cap();
    let r10 = d10.apply(&omega)?.truncate_total(cap).norm();
    let r01 = d01.apply(&omega)?.truncate_total(cap).norm();
    let restriction = omega_i.filter(|m| m.aug_degree() == 0);
    Ok((omega_i, KahlerFormReport { h10_residual: r10, h01_residual: r01, restriction_matches: restriction == pol.levels[0] }))
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    /// Leading principal minors of g(0) (real parts; exact in exact mode).
    pub leading_minors: Vec<f64>,
    pub min_eigenvalue: f64,
    pub positive: bool,
}

/// g(0) read off Ω₀: g_{ij̄} = −i · coeff(θ_i θ̄_j).
pub fn metric_at_origin<S: Scalar>(omega: &Element<S>, dim: u8) -> Matrix<S> {
    let n = dim as usize;
    let mut g = Matrix::zeros(n, n);
    let minus_i = -S::i();
    for i in 1..=dim {
        for j in 1..=dim {
            let (sign, m) = Monomial::from_factors(&[th(i), thb(j)]).expect("distinct");
            let c = omega.coeff(&m) * minus_i.clone();
            g.set(i as usize - 1, j as usize - 1, if sign < 0 { -c } else { c });
        }
    }
    g
}

fn determinant<S: Scalar>(m: &Matrix<S>) -> S {
    // fraction-free enough for desk sizes: Gaussian elimination with pivoting
    let n = m.rows();
    let mut a = m.clone();
    let mut det = S::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a.get(r, c).is_zero()) else { return S::zero() };
        if p != c {
            for j in 0..n {
                let (x, y) = (a.get(c, j).clone(), a.get(p, j).clone());
                a.set(c, j, y);
                a.set(p, j, x);
            }
            det = -det;
        }
        let piv = a.get(c, c).clone();
        det = det * piv.clone();
        for r in c + 1..n {
            let f = a.get(r, c).clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = a.get(r, j).clone() - f.clone() * a.get(c, j).clone();
                a.set(r, j, v);
            }
        }
    }
    det
}

/// Positive-definiteness of ω(0) by Sylvester's criterion, plus the smallest eigenvalue.
pub fn positivity_check<S: Scalar>(omega: &Element<S>, dim: u8, tol: f64) -> PositivityReport {
    let g = metric_at_origin(omega, dim);
    let n = dim as usize;
    let mut minors = Vec::new();
    let mut positive = true;
    for k in 1..=n {
        let sub = Matrix::from_rows((0..k).map(|i| (0..k).map(|j| g.get(i, j).clone()).collect()).collect());
        let d = determinant(&sub);
        let (re, _) = d.to_parts();
        let v = d.to_c64().re;
        let pos = if S::EXACT { re > num_rational::BigRational::from_integer(0.into()) } else { v > tol };
        positive &= pos;
        minors.push(v);
    }
    let a: DMatrix<num_complex::Complex<f64>> = g.to_nalgebra();
    let min_eig = a.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    PositivityReport { leading_minors: minors, min_eigenvalue: min_eig, positive }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::solve;
    use crate::kahler::{builtin_example, levi_civita};
    use crate::scalar::Qc;

    fn setup(name: &str, dim: u8, order: u32) -> (ConnectionSolution<Qc>, Element<Qc>) {
        let g = builtin_example::<Qc>(name, dim, order).unwrap();
        let sol = solve(&levi_civita(&g, 0.0).unwrap(), order, 0.0).unwrap();
        (sol, kahler_form(&g))
    }

    #[test]
    fn dr_anticommutes_with_extended_d() {
        let (sol, _) = setup("fubini-study", 1, 4);
        let d = extend_derivation_to_ll(&sol).unwrap();
        assert_eq!(dr_anticommutator_residual(&d).unwrap(), 0.0);
        let zs = Element::<Qc>::product_of(&[crate::weil::z(1), s(1)]);
        let dr = d_r::<Qc>(1);
        let lhs = d.apply(&dr.apply(&zs).unwrap()).unwrap().add(&dr.apply(&d.apply(&zs).unwrap()).unwrap());
        assert!(lhs.is_zero());
    }

    #[test]
    fn flat_polarization_is_constant() {
        let (sol, om) = setup("flat", 2, 4);
        let pol = solve_polarization(&sol, &om, 4, 0.0).unwrap();
        assert!(pol.levels[1..].iter().all(Element::is_zero));
        assert!(holomorphy_residual(&pol).unwrap().exact_zero);
    }

    #[test]
    fn fs_polarization_certificates() {
        let (sol, om) = setup("fubini-study", 1, 4);
        let pol = solve_polarization(&sol, &om, 4, 0.0).unwrap();
        assert!(!pol.levels[2].is_zero());
        assert!(holomorphy_residual(&pol).unwrap().exact_zero);
        assert!(audit_polarization(&pol, 0.0).passes(0.0));
        let (_, rep) = kahler_form_reconstruct(&pol).unwrap();
        assert!(rep.restriction_matches);
        let pos = positivity_check(pol.omega(), 1, 0.0);
        assert!(pos.positive && (pos.min_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates() {
        let (sol, om) = setup("fubini-study", 1, 3);
        let flat_form = kahler_form(&builtin_example::<Qc>("flat", 1, 3).unwrap());
        assert_eq!(solve_polarization(&sol, &flat_form, 3, 0.0).unwrap_err(), WeilError::FormNotParallel);
        let bad = Element::<Qc>::product_of(&[th(1), s(1)]);
        assert!(matches!(solve_polarization(&sol, &bad, 3, 0.0), Err(WeilError::FormNotType11(_))));
        assert!(!positivity_check(&om.neg(), 1, 0.0).positive);
    }
}
