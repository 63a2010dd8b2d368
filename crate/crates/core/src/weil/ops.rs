//! Canonical operators: C, σ, dʳ, ι*, the real structure, σ_tot, and h = {C, σ_tot}.

use super::derivation::{generators, Derivation};
use super::element::Element;
use super::monomial::{dz, dzb, s, sb, th, thb, Gen, Kind, Monomial};
use crate::error::{Result, WeilError};
use crate::scalar::Scalar;

/// C(s_i) = dz_i, C(s̄_i) = −dz̄_i, zero elsewhere.
pub fn canonical_c<S: Scalar>(dim: u8) -> Derivation<S> {
    let mut d = Derivation::zero(true, dim);
    for i in 1..=dim {
        d.set(s(i), Element::gen(dz(i)));
        d.set(sb(i), Element::gen(dzb(i)).neg());
    }
    d
}

/// σ(dz_i) = s_i, σ(dz̄_i) = −s̄_i, zero elsewhere.
pub fn canonical_sigma<S: Scalar>(dim: u8) -> Derivation<S> {
    sigma_h(dim).plus(&sigma_a(dim))
}

/// The holomorphic half of σ: dz_i ↦ s_i only.
pub fn sigma_h<S: Scalar>(dim: u8) -> Derivation<S> {
    let mut d = Derivation::zero(true, dim);
    for i in 1..=dim {
        d.set(dz(i), Element::gen(s(i)));
    }
    d
}

/// The antiholomorphic half of σ: dz̄_i ↦ −s̄_i only.
pub fn sigma_a<S: Scalar>(dim: u8) -> Derivation<S> {
    let mut d = Derivation::zero(true, dim);
    for i in 1..=dim {
        d.set(dzb(i), Element::gen(sb(i)).neg());
    }
    d
}

/// dʳ(s_i) = θ_i, dʳ(s̄_i) = θ̄_i, zero elsewhere.
pub fn d_r<S: Scalar>(dim: u8) -> Derivation<S> {
    let mut d = Derivation::zero(true, dim);
    for i in 1..=dim {
        d.set(s(i), Element::gen(th(i)));
        d.set(sb(i), Element::gen(thb(i)));
    }
    d
}

pub fn iota_star<S: Scalar>(x: &Element<S>) -> Element<S> {
    x.map_monomials(|m| {
        let c = S::from_i64(m.iota_sign() as i64);
        Element::term(m.clone(), c)
    })
}

/// N ↦ ι*∘N∘ι*.
pub fn iota_conjugate<S: Scalar>(d: &Derivation<S>) -> Result<Derivation<S>> {
    let mut out = Derivation::zero(d.odd, d.dim);
    for g in generators(d.dim) {
        let sign = S::from_i64(g.kind.iota_sign() as i64);
        out.set(g, iota_star(d.image(g)?).scale(&sign));
    }
    Ok(out)
}

/// Coefficientwise complex conjugation with generators swapped for their conjugates;
/// dressings u_p of level k go to u_{k−p}.
pub fn naive_conj<S: Scalar>(x: &Element<S>) -> Element<S> {
    let mut out = Element::zero();
    for (m, c) in x.terms() {
        let mut factors: Vec<Gen> = Vec::new();
        for &(g, e) in m.even() {
            for _ in 0..e {
                factors.push(g.conj());
            }
        }
        factors.extend(m.odd().iter().map(|g| g.conj()));
        let (sign, mm) = Monomial::from_factors(&factors).expect("conjugate of a canonical monomial");
        let k = mm.form_degree() as u8;
        let mm = mm.with_dress(m.dress().map(|p| k - p));
        let v = c.conj();
        out.add_term(mm, if sign < 0 { -v } else { v });
    }
    out
}

/// The real structure conj∘ι*: s ↦ −s̄, dz ↦ dz̄, θ ↦ −θ̄, z ↦ z̄.
pub fn real_structure<S: Scalar>(x: &Element<S>) -> Element<S> {
    naive_conj(&iota_star(x))
}

/// D∘R = R∘D on generators.
pub fn derivation_is_real<S: Scalar>(d: &Derivation<S>, tol: f64) -> Result<bool> {
    for g in generators(d.dim) {
        let lhs = d.apply(&real_structure(&Element::gen(g)))?;
        let rhs = real_structure(d.image(g)?);
        if !lhs.sub(&rhs).is_negligible(tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LlOrRr {
    Ll,
    O,
    Rr,
}

/// Classify a dressed monomial by comparing its dressing index with the number of dz̄ factors.
pub fn classify_llorr(m: &Monomial) -> Result<LlOrRr> {
    let k = m.form_degree();
    let i = m.dress().map_or(0, u32::from);
    if i > k {
        return Err(WeilError::IndexOutOfRange { index: i as i64, max: k as i64 });
    }
    let b = m.count(Kind::V1a);
    Ok(match i.cmp(&b) {
        std::cmp::Ordering::Equal => LlOrRr::O,
        std::cmp::Ordering::Greater => LlOrRr::Ll,
        std::cmp::Ordering::Less => LlOrRr::Rr,
    })
}

/// Homotopy σ_tot on dressed elements of form degree ≥ 1.
///
/// On ll it removes a dz̄ through σ^a and lowers the dressing; on rr it removes a dz
/// through σ^h; on o both terms appear.
pub fn sigma_tot<S: Scalar>(dim: u8, x: &Element<S>) -> Result<Element<S>> {
    let sh = sigma_h::<S>(dim);
    let sa = sigma_a::<S>(dim);
    let mut out = Element::zero();
    for (m, c) in x.terms() {
        if m.form_degree() == 0 {
            return Err(WeilError::SigmaTotDegreeZero);
        }
        let i = m.dress().ok_or_else(|| WeilError::InvalidInput("σ_tot needs dressed forms".into()))?;
        let class = classify_llorr(m)?;
        if matches!(class, LlOrRr::Ll | LlOrRr::O) && i > 0 {
            let img = sa.apply_monomial(m)?;
            out.add_assign_scaled(&img.dress_with(|_| Some(i - 1)), c);
        }
        if matches!(class, LlOrRr::Rr | LlOrRr::O) {
            let img = sh.apply_monomial(m)?;
            out.add_assign_scaled(&img.dress_with(|_| Some(i)), c);
        }
    }
    Ok(out)
}

/// Totalized C.
pub fn c_tot<S: Scalar>(dim: u8, x: &Element<S>) -> Result<Element<S>> {
    canonical_c::<S>(dim).apply_tot(x, 1)
}

/// h = C∘σ_tot + σ_tot∘C on dressed elements (σ_tot is taken as 0 on degree 0).
pub fn h_apply<S: Scalar>(dim: u8, x: &Element<S>) -> Result<Element<S>> {
    let cx = c_tot(dim, x)?;
    let mut out = if cx.is_zero() { Element::zero() } else { sigma_tot(dim, &cx)? };
    let positive = x.filter(|m| m.form_degree() > 0);
    if !positive.is_zero() {
        out = out.add(&c_tot(dim, &sigma_tot(dim, &positive)?)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qc;
    use crate::weil::monomial::z;

    type E = Element<Qc>;

    fn dressed(gens: &[Gen], p: u8) -> E {
        let (sign, m) = Monomial::from_factors(gens).unwrap();
        E::term(m.with_dress(Some(p)), Qc::from_i64(sign as i64))
    }

    #[test]
    fn c_inverts_sigma_on_forms() {
        let c = canonical_c::<Qc>(1);
        let sg = canonical_sigma::<Qc>(1);
        let x = E::gen(dz(1));
        assert_eq!(c.apply(&sg.apply(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn c_and_sigma_square_to_zero() {
        let c = canonical_c::<Qc>(2);
        let sg = canonical_sigma::<Qc>(2);
        assert!(c.supercommutator(&c).unwrap().is_zero());
        assert!(sg.supercommutator(&sg).unwrap().is_zero());
        let x = E::product_of(&[s(1), sb(1), z(1)]);
        assert!(c.apply(&c.apply(&x).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn iota_conjugate_of_c_is_minus_c() {
        let c = canonical_c::<Qc>(1);
        let ci = iota_conjugate(&c).unwrap();
        assert_eq!(ci.apply(&E::gen(s(1))).unwrap(), E::gen(dz(1)).neg());
    }

    #[test]
    fn canonical_operators_are_real() {
        for d in [canonical_c::<Qc>(2), canonical_sigma::<Qc>(2), d_r::<Qc>(2)] {
            assert!(derivation_is_real(&d, 0.0).unwrap());
        }
    }

    #[test]
    fn real_structure_is_an_involution() {
        let x = E::product_of(&[s(1), dz(1), dzb(2), th(1)]).scale(&(Qc::from_i64(2) + Qc::i())).add(&E::gen(z(2)));
        assert_eq!(real_structure(&real_structure(&x)), x);
        let y = dressed(&[s(1), dzb(1)], 1);
        assert_eq!(real_structure(&real_structure(&y)), y);
    }

    #[test]
    fn llorr_examples() {
        let m = |g: &[Gen], p: u8| Monomial::from_factors(g).unwrap().1.with_dress(Some(p));
        assert_eq!(classify_llorr(&m(&[dz(1)], 0)).unwrap(), LlOrRr::O);
        assert_eq!(classify_llorr(&m(&[dz(1)], 1)).unwrap(), LlOrRr::Ll);
        assert_eq!(classify_llorr(&m(&[dzb(1)], 0)).unwrap(), LlOrRr::Rr);
        assert_eq!(classify_llorr(&m(&[dzb(1)], 1)).unwrap(), LlOrRr::O);
        assert_eq!(classify_llorr(&m(&[dz(1), dzb(1)], 1)).unwrap(), LlOrRr::O);
        assert!(classify_llorr(&m(&[dz(1)], 2)).is_err());
    }

    #[test]
    fn sigma_tot_examples() {
        assert_eq!(sigma_tot(1, &dressed(&[dz(1)], 0)).unwrap(), E::gen(s(1)));
        assert!(sigma_tot(1, &dressed(&[dz(1)], 1)).unwrap().is_zero());
        assert_eq!(sigma_tot(1, &dressed(&[dzb(1)], 1)).unwrap(), E::gen(sb(1)).neg());
        let lhs = sigma_tot(2, &dressed(&[dz(1), dz(2)], 0)).unwrap();
        let rhs = E::gen(s(1)).mul(&dressed(&[dz(2)], 0)).sub(&E::gen(s(2)).mul(&dressed(&[dz(1)], 0)));
        assert_eq!(lhs, rhs);
        assert_eq!(sigma_tot(1, &E::gen(s(1))).unwrap_err(), WeilError::SigmaTotDegreeZero);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_apply(1, &E::gen(s(1))).unwrap(), E::gen(s(1)));
        assert!(h_apply(1, &dressed(&[dz(1)], 1)).unwrap().is_zero());
    }

    /// σ_l on Λ¹_l = {dz⊗u_0, dz⊗u_1, dz̄⊗u_1}: kills dz, sends dz̄⊗u_1 to −s̄.
    fn sigma_l_gen(g: Gen, p: u8) -> Option<E> {
        match (g.kind, p) {
            (Kind::V1h, 0 | 1) => Some(E::zero()),
            (Kind::V1a, 1) => Some(E::gen(sb(g.index)).neg()),
            _ => None,
        }
    }

    /// σ_r on Λ¹_r = {dz⊗u_0, dz̄⊗u_0, dz̄⊗u_1}: kills dz̄, sends dz⊗u_0 to s.
    fn sigma_r_gen(g: Gen, p: u8) -> Option<E> {
        match (g.kind, p) {
            (Kind::V1a, 0 | 1) => Some(E::zero()),
            (Kind::V1h, 0) => Some(E::gen(s(g.index))),
            _ => None,
        }
    }

    /// All values of the odd Leibniz rule over factorizations of (a⊗u_p)(b⊗u_q), p+q = i,
    /// with both factors in the domain of `f`.
    fn leibniz_values(a: Gen, b: Gen, i: u8, f: fn(Gen, u8) -> Option<E>) -> Vec<E> {
        let mut out = Vec::new();
        for p in 0..=i.min(1) {
            let q = i - p;
            if q > 1 {
                continue;
            }
            let (Some(fa), Some(fb)) = (f(a, p), f(b, q)) else { continue };
            let x = dressed(&[a], p);
            let y = dressed(&[b], q);
            out.push(fa.mul(&y).sub(&x.mul(&fb)));
        }
        out
    }

    #[test]
    fn sigma_l_and_sigma_r_are_well_defined_on_degree_two_relations() {
        let gens = [dz(1), dz(2), dzb(1), dzb(2)];
        for (ia, &a) in gens.iter().enumerate() {
            for &b in &gens[ia + 1..] {
                for i in 0..=2u8 {
                    let product = dressed(&[a], i.min(1)).mul(&dressed(&[b], i - i.min(1)));
                    let (_, m) = product.terms().next().map(|(m, c)| (c.clone(), m.clone())).unwrap();
                    let class = classify_llorr(&m).unwrap();
                    let tot = sigma_tot(2, &product).unwrap();
                    let l = leibniz_values(a, b, i, sigma_l_gen);
                    let r = leibniz_values(a, b, i, sigma_r_gen);
                    for w in l.windows(2).chain(r.windows(2)) {
                        assert_eq!(w[0], w[1], "factorization dependence at {a} {b} u{i}");
                    }
                    match class {
                        LlOrRr::Ll => assert_eq!(tot, l[0], "{a} {b} u{i}"),
                        LlOrRr::Rr => assert_eq!(tot, r[0], "{a} {b} u{i}"),
                        LlOrRr::O => assert_eq!(tot, l[0].add(&r[0]), "{a} {b} u{i}"),
                    }
                }
            }
        }
    }
}
