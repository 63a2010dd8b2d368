//! Order-by-order solver for the flat linear extended connection with a given
//! Kählerian reduction, and the identities it must satisfy.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WeilError};
use crate::hodge::HodgeBidegree;
use crate::kahler::{connection_derivation, connection_derivation_unchecked, ChristoffelJet};
use crate::linalg::{operator_norm, Matrix};
use crate::scalar::Scalar;
use crate::weil::{
    c_tot, canonical_c, canonical_sigma, derivation_is_real, dz, dzb, iota_conjugate, real_structure, s, sb,
    sigma_tot, Derivation, Element, Gen, HomotopyInverse, Kind, Monomial,
};

/// Per-stage residuals recorded while solving.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageDiagnostics {
    pub k: u32,
    /// ‖C R_k‖ (kernel condition).
    pub kernel: f64,
    /// ‖C D_k + R_k‖.
    pub flatness: f64,
    /// ‖σ_tot D_k‖.
    pub linearity: f64,
    pub terms: usize,
}

/// D = Σ D_k with D₀ = C and D₁ = ∇; every image is truncated at total degree N+1.
#[derive(Clone, Debug)]
pub struct ConnectionSolution<S> {
    pub dim: u8,
    pub order: u32,
    pub gamma: ChristoffelJet<S>,
    pub levels: Vec<Derivation<S>>,
    pub diagnostics: Vec<StageDiagnostics>,
}

pub(crate) fn fibre_generators(dim: u8) -> Vec<Gen> {
    (1..=dim).flat_map(|i| [s(i), sb(i)]).collect()
}

fn truncate_derivation<S: Scalar>(d: &Derivation<S>, max_total: u32) -> Derivation<S> {
    d.filter_images(|m| m.total() <= max_total)
}

impl<S: Scalar> ConnectionSolution<S> {
    /// Assemble a solution from given levels (used by deserialization and oracles).
    pub fn from_levels(dim: u8, order: u32, gamma: ChristoffelJet<S>, levels: Vec<Derivation<S>>) -> Self {
        ConnectionSolution { dim, order, gamma, levels, diagnostics: Vec::new() }
    }

    pub fn level(&self, k: usize) -> &Derivation<S> {
        &self.levels[k]
    }

    /// Replace D_k (used for perturbation experiments).
    pub fn with_level(mut self, k: usize, d: Derivation<S>) -> Self {
        self.levels[k] = d;
        self
    }

    /// Σ_k D_k.
    pub fn full(&self) -> Derivation<S> {
        let mut out = Derivation::zero(true, self.dim);
        for d in &self.levels {
            out = out.plus(d);
        }
        out
    }

    fn max_total(&self) -> u32 {
        self.order + 1
    }

    /// D_{k,n}(g): the part of D_k(g) raising total degree by n.
    pub fn component(&self, k: usize, n: u32, g: Gen) -> Result<Element<S>> {
        let t = g.kind.total() + n;
        Ok(self.levels[k].image(g)?.filter(|m| m.total() == t))
    }

    /// Bidegree-refined table: (k, n) ↦ [(generator, D_{k,n}(generator))], nonzero entries only.
    pub fn table(&self) -> BTreeMap<(u32, u32), Vec<(Gen, Element<S>)>> {
        let mut out: BTreeMap<(u32, u32), Vec<(Gen, Element<S>)>> = BTreeMap::new();
        for (k, d) in self.levels.iter().enumerate() {
            for (g, img) in d.images() {
                let mut by_n: BTreeMap<u32, Element<S>> = BTreeMap::new();
                for (m, c) in img.terms() {
                    by_n.entry(m.total() - g.kind.total()).or_default().add_term(m.clone(), c.clone());
                }
                for (n, e) in by_n {
                    out.entry((k as u32, n)).or_default().push((*g, e));
                }
            }
        }
        out
    }

    /// D_k^tot(g) for a fibre or base generator.
    pub fn totalized_image(&self, k: usize, g: Gen) -> Result<Element<S>> {
        self.levels[k].apply_tot(&Element::gen(g), 1)
    }

    /// Recover the Christoffel jet from D₁.
    pub fn extract_christoffel(&self) -> Result<ChristoffelJet<S>> {
        let n = self.dim as usize;
        let mut gamma = ChristoffelJet::zero(self.dim, self.order);
        for k in 0..n {
            let img = self.levels[1].image(s(k as u8 + 1))?;
            for (m, c) in img.terms() {
                let (v2, rest) = m.split_v2();
                for i in 0..n {
                    for j in 0..n {
                        for (mixed, one_form) in [(false, dz(j as u8 + 1)), (true, dzb(j as u8 + 1))] {
                            let (sign, target) = Monomial::from_factors(&[s(i as u8 + 1), one_form]).expect("distinct");
                            if rest == target {
                                let v = if sign < 0 { c.clone() } else { -c.clone() };
                                let slot = if mixed { &mut gamma.mixed[k][i][j] } else { &mut gamma.hol[k][i][j] };
                                slot.add_term(v2.clone(), v);
                            }
                        }
                    }
                }
            }
        }
        Ok(gamma)
    }
}

/// Solve the recursion D_k = −h⁻¹σ_tot(R_k), R_k = Σ_{p=1}^{k−1} D_p^tot D_{k−p}^tot, k = 2..N.
pub fn solve<S: Scalar>(gamma: &ChristoffelJet<S>, order: u32, tol: f64) -> Result<ConnectionSolution<S>> {
    if order < 2 {
        return Err(WeilError::InvalidInput("connection order must be at least 2".into()));
    }
    let dim = gamma.dim;
    let mut gamma = gamma.clone();
    if gamma.order != order {
        gamma = ChristoffelJet::new(dim, order, gamma.hol, gamma.mixed)?;
    }
    let cap = order + 1;
    let d1 = truncate_derivation(&connection_derivation(&gamma, tol)?, cap);
    let mut levels = vec![canonical_c::<S>(dim), d1];
    let hinv = HomotopyInverse::<S>::new(dim, tol);
    let mut diagnostics = Vec::new();
    for k in 2..=order as usize {
        let stage: Vec<Result<(Element<S>, StageDiagnostics)>> = (1..=dim)
            .into_par_iter()
            .map(|i| {
                let x = Element::gen(s(i));
                let mut r = Element::zero();
                for p in 1..k {
                    let inner = levels[k - p].apply_tot(&x, 1)?.truncate_total(cap);
                    r = r.add(&levels[p].apply_tot(&inner, 1)?.truncate_total(cap));
                }
                let r = r.chop(tol);
                let kernel = c_tot(dim, &r)?.chop(tol);
                if !kernel.is_negligible(tol) {
                    return Err(WeilError::FlatnessObstruction {
                        order: k,
                        detail: format!("C∘R_{k} ≠ 0 on s{i} (norm {:.3e})", kernel.norm()),
                    });
                }
                let y = if r.is_zero() { Element::zero() } else { sigma_tot(dim, &r)? };
                let dk = hinv.invert(&y)?.neg().chop(tol);
                let flat = c_tot(dim, &dk)?.add(&r).chop(tol);
                let lin = if dk.is_zero() { Element::zero() } else { sigma_tot(dim, &dk)?.chop(tol) };
                if !flat.is_negligible(tol) {
                    return Err(WeilError::FlatnessObstruction {
                        order: k,
                        detail: format!("C∘D_{k} ≠ −R_{k} on s{i} (norm {:.3e})", flat.norm()),
                    });
                }
                if !lin.is_negligible(tol) {
                    return Err(WeilError::FlatnessObstruction {
                        order: k,
                        detail: format!("σ_tot∘D_{k} ≠ 0 on s{i} (norm {:.3e})", lin.norm()),
                    });
                }
                let diag =
                    StageDiagnostics { k: k as u32, kernel: kernel.norm(), flatness: flat.norm(), linearity: lin.norm(), terms: dk.len() };
                Ok((dk, diag))
            })
            .collect();
        let mut dk = Derivation::zero(true, dim);
        let mut diag = StageDiagnostics { k: k as u32, ..Default::default() };
        for (i, res) in (1..=dim).zip(stage) {
            let (tot, d) = res?;
            let plain = tot.project();
            // the dressing must be the one the weakly Hodge shift dictates
            let back = Derivation::zero(true, dim).with(s(i), plain.clone()).apply_tot(&Element::gen(s(i)), 1)?;
            if back != tot {
                return Err(WeilError::FlatnessObstruction { order: k, detail: format!("D_{k}(s{i}) is not a totalized map") });
            }
            dk.set(sb(i), real_structure(&plain).neg());
            dk.set(s(i), plain);
            diag.kernel = diag.kernel.max(d.kernel);
            diag.flatness = diag.flatness.max(d.flatness);
            diag.linearity = diag.linearity.max(d.linearity);
            diag.terms += d.terms;
        }
        levels.push(dk);
        diagnostics.push(diag);
    }
    Ok(ConnectionSolution { dim, order, gamma, levels, diagnostics })
}

/// One entry of a residual table.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ResidualEntry {
    pub generator: String,
    pub aug: u32,
    pub total: u32,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub certified: Vec<ResidualEntry>,
    /// Terms past total degree N+1 depend on unknown jet data; reported, never failures.
    pub beyond_certified_order: Vec<ResidualEntry>,
    pub max_certified: f64,
    pub exact_zero: bool,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.exact_zero || self.max_certified <= tol
    }
}

fn split_residual<S: Scalar>(name: &str, x: &Element<S>, cap: u32, rep: &mut ResidualReport) {
    let mut cells: BTreeMap<(u32, u32), Element<S>> = BTreeMap::new();
    for (m, c) in x.terms() {
        cells.entry((m.aug_degree(), m.total())).or_default().add_term(m.clone(), c.clone());
    }
    for ((aug, total), e) in cells {
        let entry = ResidualEntry { generator: name.to_string(), aug, total, norm: e.norm() };
        if total <= cap {
            rep.exact_zero &= e.is_zero();
            rep.max_certified = rep.max_certified.max(entry.norm);
            rep.certified.push(entry);
        } else {
            rep.beyond_certified_order.push(entry);
        }
    }
}

fn empty_report() -> ResidualReport {
    ResidualReport { certified: Vec::new(), beyond_certified_order: Vec::new(), max_certified: 0.0, exact_zero: true }
}

/// (D∘D)(g) on every generator; certified through total degree N+1.
pub fn flatness_residual<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<ResidualReport> {
    let d = sol.full();
    let mut rep = empty_report();
    for g in crate::weil::generators(sol.dim).into_iter().filter(|g| !matches!(g.kind, Kind::V4h | Kind::V4a)) {
        let dd = d.apply(d.image(g)?)?;
        split_residual(&g.to_string(), &dd, sol.max_total(), &mut rep);
    }
    Ok(rep)
}

/// ‖s − ½σ((D − D^ι)s)‖ summed over fibre generators, certified part only.
pub fn linearity_residual<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<f64> {
    let d = sol.full();
    let di = iota_conjugate(&d)?;
    let sigma = canonical_sigma::<S>(sol.dim);
    let half = S::from_ratio(1, 2);
    let mut total = 0.0;
    for g in fibre_generators(sol.dim) {
        let diff = d.image(g)?.sub(di.image(g)?);
        let v = Element::gen(g).sub(&sigma.apply(&diff)?.scale(&half)).truncate_total(sol.max_total());
        total += v.norm();
    }
    Ok(total)
}

/// σ_tot∘D_k on each fibre generator for k = 1..N (entry k−1); the totalized form of linearity.
pub fn sigma_tot_residuals<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for k in 1..sol.levels.len() {
        let mut worst: f64 = 0.0;
        for g in fibre_generators(sol.dim) {
            let t = sol.totalized_image(k, g)?;
            if !t.is_zero() {
                worst = worst.max(sigma_tot(sol.dim, &t)?.norm());
            }
        }
        out.push(worst);
    }
    Ok(out)
}

/// Blocks of D̃∘D̃ for D̃ = C + D₁ in the reduced Weil algebra.
#[derive(Clone, Debug, Serialize)]
pub struct ReducedSquare {
    /// Pure two-forms (torsion, and mixed Christoffel components through C).
    pub lambda2: f64,
    /// s ⊗ Λ^{2,0}.
    pub s_lambda20: f64,
    /// s̄ ⊗ Λ^{0,2}.
    pub sbar_lambda02: f64,
    /// Anything else surviving the quotient (expected empty).
    pub other: f64,
    pub exact_zero: bool,
}

impl ReducedSquare {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.exact_zero || self.lambda2.max(self.s_lambda20).max(self.sbar_lambda02).max(self.other) <= tol
    }
}

fn in_reduction_ideal(m: &Monomial) -> bool {
    let (a, b) = m.aug();
    (a >= 2 && b >= 1) || (a >= 1 && b >= 2)
}

/// D̃∘D̃ on the reduced algebra; vanishes iff the jet is Kählerian (on the certified range).
pub fn reduced_square<S: Scalar>(gamma: &ChristoffelJet<S>) -> Result<ReducedSquare> {
    let d = canonical_c::<S>(gamma.dim).plus(&connection_derivation_unchecked(gamma));
    let cap = gamma.order + 1;
    let mut blocks = [Element::<S>::zero(), Element::zero(), Element::zero(), Element::zero()];
    for g in crate::weil::generators(gamma.dim).into_iter().filter(|g| !matches!(g.kind, Kind::V4h | Kind::V4a)) {
        let sq = d.apply(d.image(g)?)?.filter(|m| m.total() <= cap && !in_reduction_ideal(m));
        for (m, c) in sq.terms() {
            let (v3h, v3a) = (m.count(Kind::V3h), m.count(Kind::V3a));
            let (f_h, f_a) = (m.count(Kind::V1h), m.count(Kind::V1a));
            let slot = match (v3h, v3a, f_h, f_a) {
                (0, 0, _, _) => 0,
                (1, 0, 2, 0) => 1,
                (0, 1, 0, 2) => 2,
                _ => 3,
            };
            blocks[slot].add_term(m.clone(), c.clone());
        }
    }
    Ok(ReducedSquare {
        lambda2: blocks[0].norm(),
        s_lambda20: blocks[1].norm(),
        sbar_lambda02: blocks[2].norm(),
        other: blocks[3].norm(),
        exact_zero: blocks.iter().all(Element::is_zero),
    })
}

/// −D₁∘D₁ on a fibre generator (the curvature as a two-form with fibre coefficient).
pub fn curvature_on<S: Scalar>(sol: &ConnectionSolution<S>, g: Gen) -> Result<Element<S>> {
    let d1 = &sol.levels[1];
    Ok(d1.apply(d1.image(g)?)?.neg())
}

/// max over fibre generators of ‖D₂(g) − ⅓σ(R(g))‖ on the certified range.
pub fn d2_identity_residual<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<f64> {
    let sigma = canonical_sigma::<S>(sol.dim);
    let third = S::from_ratio(1, 3);
    let mut worst: f64 = 0.0;
    for g in fibre_generators(sol.dim) {
        let rhs = sigma.apply(&curvature_on(sol, g)?)?.scale(&third).truncate_total(sol.max_total());
        let lhs = sol.levels[2].image(g)?.truncate_total(sol.max_total());
        let diff = lhs.sub(&rhs);
        if !diff.is_zero() {
            worst = worst.max(diff.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// D_k^ι − (−1)^{k+1} D_k on all generators, per k.
pub fn iota_parity_residuals<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, d) in sol.levels.iter().enumerate() {
        let di = iota_conjugate(d)?;
        let sign = S::from_i64(if k % 2 == 0 { -1 } else { 1 });
        let mut worst: f64 = 0.0;
        for g in crate::weil::generators(sol.dim) {
            let diff = di.image(g)?.sub(&d.image(g)?.scale(&sign));
            worst = worst.max(diff.norm());
        }
        out.push(worst);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HodgeAudit {
    /// Images with a Hodge shift other than (1,0) or (0,1).
    pub bad_shifts: Vec<String>,
    /// Levels failing D∘R = R∘D.
    pub non_real_levels: Vec<u32>,
    /// Fibre images outside augmentation degree k+1.
    pub bad_augmentation: Vec<String>,
}

impl HodgeAudit {
    pub fn passes(&self) -> bool {
        self.bad_shifts.is_empty() && self.non_real_levels.is_empty() && self.bad_augmentation.is_empty()
    }
}

/// Bidegree, augmentation, and reality audit of every level.
pub fn weakly_hodge_audit<S: Scalar>(sol: &ConnectionSolution<S>, tol: f64) -> Result<HodgeAudit> {
    let mut audit = HodgeAudit { bad_shifts: Vec::new(), non_real_levels: Vec::new(), bad_augmentation: Vec::new() };
    let ok = [HodgeBidegree::new(1, 0), HodgeBidegree::new(0, 1)];
    for (k, d) in sol.levels.iter().enumerate() {
        for (g, img) in d.images() {
            for (m, _) in img.terms() {
                let shift = m.plain_hodge() - g.kind.hodge();
                if !ok.contains(&shift) {
                    audit.bad_shifts.push(format!("D_{k}({g}) ∋ {}", m.key()));
                }
                if matches!(g.kind, Kind::V3h | Kind::V3a) && m.aug_degree() != k as u32 + 1 {
                    audit.bad_augmentation.push(format!("D_{k}({g}) ∋ {}", m.key()));
                }
            }
        }
        if !derivation_is_real(&truncate_derivation(d, sol.max_total()), tol)? {
            audit.non_real_levels.push(k as u32);
        }
    }
    Ok(audit)
}

/// Θ_n = Σ_k D_{k,n} on the fibre generators, n = 1..N.
#[derive(Clone, Debug)]
pub struct HodgeConnectionSeries<S> {
    pub dim: u8,
    pub order: u32,
    /// theta[n-1][j] is Θ_n applied to the j-th fibre generator (s₁, s̄₁, s₂, …).
    pub theta: Vec<Vec<Element<S>>>,
    pub norms: Vec<f64>,
}

/// Operator norm of g ↦ images[g] in the orthonormal monomial basis.
///
/// Columns that share no rows span orthogonal blocks, so the norm is the maximum over
/// connected blocks; each block goes through a dense SVD.
pub fn images_norm<S: Scalar>(images: &[Element<S>]) -> f64 {
    let mut row_owner: BTreeMap<&Monomial, usize> = BTreeMap::new();
    let mut parent: Vec<usize> = (0..images.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (c, e) in images.iter().enumerate() {
        for (m, _) in e.terms() {
            match row_owner.get(m) {
                Some(&o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, c));
                    parent[a] = b;
                }
                None => {
                    row_owner.insert(m, c);
                }
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in 0..images.len() {
        if !images[c].is_zero() {
            let r = find(&mut parent, c);
            blocks.entry(r).or_default().push(c);
        }
    }
    blocks
        .values()
        .map(|cols| {
            let mut rows: Vec<&Monomial> = cols.iter().flat_map(|&c| images[c].terms().map(|(m, _)| m)).collect();
            rows.sort();
            rows.dedup();
            let index: BTreeMap<&Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (*m, i)).collect();
            let mut mat = Matrix::zeros(rows.len(), cols.len());
            for (j, &c) in cols.iter().enumerate() {
                for (m, v) in images[c].terms() {
                    mat.set(index[m], j, v.clone());
                }
            }
            operator_norm(&mat)
        })
        .fold(0.0, f64::max)
}

pub fn hodge_connection_series<S: Scalar>(sol: &ConnectionSolution<S>) -> Result<HodgeConnectionSeries<S>> {
    let gens = fibre_generators(sol.dim);
    let mut theta = Vec::new();
    let mut norms = Vec::new();
    for n in 1..=sol.order {
        let mut row = Vec::new();
        for &g in &gens {
            let mut acc = Element::zero();
            for k in 1..sol.levels.len() {
                acc = acc.add(&sol.component(k, n, g)?);
            }
            row.push(acc);
        }
        norms.push(images_norm(&row));
        theta.push(row);
    }
    Ok(HodgeConnectionSeries { dim: sol.dim, order: sol.order, theta, norms })
}

/// Series coefficient helper: the V2-order-0 part of an element.
pub fn at_origin<S: Scalar>(x: &Element<S>) -> Element<S> {
    x.filter(|m| m.v2_order() == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::{builtin_example, levi_civita, Series};
    use crate::scalar::Qc;
    use crate::weil::{z, zb};

    fn solved(name: &str, dim: u8, order: u32) -> ConnectionSolution<Qc> {
        let g = builtin_example::<Qc>(name, dim, order).unwrap();
        solve(&levi_civita(&g, 0.0).unwrap(), order, 0.0).unwrap()
    }

    fn mono(gens: &[Gen]) -> (i32, Monomial) {
        Monomial::from_factors(gens).unwrap()
    }

    #[test]
    fn flat_has_no_higher_levels() {
        let sol = solved("flat", 2, 5);
        assert!(sol.levels[2..].iter().all(Derivation::is_zero));
        assert!(flatness_residual(&sol).unwrap().exact_zero);
    }

    /// D₂(s) at the origin for FS equals ⅔(s² dz̄ + s s̄ dz), worked out by hand from
    /// ∂̄Γ(0) = −2 and the σ-Leibniz rule.
    #[test]
    fn fs_second_level_at_origin() {
        let sol = solved("fubini-study", 1, 4);
        let d2 = at_origin(sol.levels[2].image(s(1)).unwrap());
        let mut expect = Element::<Qc>::zero();
        for f in [[s(1), s(1), dzb(1)], [s(1), sb(1), dz(1)]] {
            let (sign, m) = mono(&f);
            expect.add_term(m, Qc::from_ratio(2 * sign as i64, 3));
        }
        assert_eq!(d2, expect);
    }

    #[test]
    fn fs_certificates_vanish() {
        let sol = solved("fubini-study", 1, 4);
        let flat = flatness_residual(&sol).unwrap();
        assert!(flat.exact_zero, "{:?}", flat.certified);
        assert!(!flat.beyond_certified_order.is_empty());
        assert_eq!(linearity_residual(&sol).unwrap(), 0.0);
        assert!(sigma_tot_residuals(&sol).unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(d2_identity_residual(&sol).unwrap(), 0.0);
        assert!(iota_parity_residuals(&sol).unwrap().iter().all(|&x| x == 0.0));
        assert!(weakly_hodge_audit(&sol, 0.0).unwrap().passes());
    }

    #[test]
    fn reduction_identity() {
        let sol = solved("poincare", 1, 4);
        assert_eq!(sol.extract_christoffel().unwrap(), sol.gamma);
    }

    #[test]
    fn product_metric_leaves_flat_factor_alone() {
        let sol = solved("product", 2, 4);
        for d in &sol.levels[2..] {
            assert!(d.image(s(2)).unwrap().is_zero());
            assert!(d.image(sb(2)).unwrap().is_zero());
            for (_, img) in d.images() {
                assert!(img.terms().all(|(m, _)| m.exponent(z(2)) == 0 && m.exponent(zb(2)) == 0));
            }
        }
    }

    #[test]
    fn perturbed_second_level_breaks_linearity() {
        let sol = solved("fubini-study", 1, 4);
        let mut bump = Element::<Qc>::zero();
        let (a, m1) = mono(&[s(1), sb(1), dz(1)]);
        let (b, m2) = mono(&[s(1), s(1), dzb(1)]);
        bump.add_term(m1, Qc::from_i64(2 * a as i64));
        bump.add_term(m2, Qc::from_i64(-(b as i64)));
        // C-closed, so flatness at this order is unaffected
        assert!(canonical_c::<Qc>(1).apply(&bump).unwrap().is_zero());
        let d2 = sol.levels[2].clone();
        let new_s = d2.image(s(1)).unwrap().add(&bump);
        let perturbed = d2.with(sb(1), real_structure(&new_s).neg()).with(s(1), new_s);
        let sol = sol.with_level(2, perturbed);
        assert!(linearity_residual(&sol).unwrap() > 0.0);
    }

    #[test]
    fn reduced_square_detects_defects() {
        let g = builtin_example::<Qc>("fubini-study", 2, 3).unwrap();
        let gamma = levi_civita(&g, 0.0).unwrap();
        assert!(reduced_square(&gamma).unwrap().exact_zero);
        let mut torsion = ChristoffelJet::<Qc>::zero(2, 3);
        torsion.hol[0][0][1] = Series::one();
        let r = reduced_square(&torsion).unwrap();
        assert!(r.lambda2 > 0.0 && r.s_lambda20 == 0.0);
        // R^{2,0} from a z-dependent antisymmetric-derivative term
        let mut curv = ChristoffelJet::<Qc>::zero(2, 3);
        curv.hol[0][0][0] = Series::gen(z(2));
        let r = reduced_square(&curv).unwrap();
        assert!(r.s_lambda20 > 0.0 && r.lambda2 == 0.0);
    }

    #[test]
    fn non_kahlerian_input_is_refused() {
        let mut gamma = ChristoffelJet::<Qc>::zero(1, 3);
        gamma.mixed[0][0][0] = Series::gen(zb(1));
        assert!(matches!(solve(&gamma, 3, 0.0), Err(WeilError::NotKahlerian(_))));
    }

    #[test]
    fn hodge_series_of_fs() {
        let sol = solved("fubini-study", 1, 4);
        let th = hodge_connection_series(&sol).unwrap();
        assert_eq!(th.norms.len(), 4);
        assert_eq!(th.norms[0], 0.0);
        assert!(th.norms[1] > 0.0);
        let flat = hodge_connection_series(&solved("flat", 1, 4)).unwrap();
        assert!(flat.norms.iter().all(|&x| x == 0.0));
    }
}
