//! Graded derivations given by generator images.

use std::collections::BTreeMap;

use super::element::Element;
use super::monomial::{Gen, Kind, Monomial};
use crate::error::{Result, WeilError};
use crate::hodge::admissible_shift;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation<S> {
    pub odd: bool,
    pub dim: u8,
    images: BTreeMap<Gen, Element<S>>,
}

/// All generators of a given dimension, in canonical order.
pub fn generators(dim: u8) -> Vec<Gen> {
    let mut v = Vec::new();
    for kind in Kind::ALL {
        for i in 1..=dim {
            v.push(Gen::new(kind, i));
        }
    }
    v
}

impl<S: Scalar> Derivation<S> {
    /// The zero derivation on the algebra of complex dimension `dim`.
    pub fn zero(odd: bool, dim: u8) -> Self {
        let images = generators(dim).into_iter().map(|g| (g, Element::zero())).collect();
        Derivation { odd, dim, images }
    }

    pub fn set(&mut self, g: Gen, image: Element<S>) {
        assert!(g.index >= 1 && g.index <= self.dim, "generator {g} outside dimension {}", self.dim);
        self.images.insert(g, image);
    }

    pub fn with(mut self, g: Gen, image: Element<S>) -> Self {
        self.set(g, image);
        self
    }

    pub fn image(&self, g: Gen) -> Result<&Element<S>> {
        self.images.get(&g).ok_or_else(|| WeilError::MissingImage(g.to_string()))
    }

    pub fn images(&self) -> impl Iterator<Item = (&Gen, &Element<S>)> {
        self.images.iter()
    }

    fn parity_sign(&self, passed_odd: usize) -> S {
        if self.odd && passed_odd % 2 == 1 {
            -S::one()
        } else {
            S::one()
        }
    }

    /// Leibniz extension to a single undressed monomial.
    pub fn apply_monomial(&self, m: &Monomial) -> Result<Element<S>> {
        let mut out = Element::zero();
        let bare = m.undressed();
        for &(g, e) in bare.even() {
            let img = self.image(g)?;
            if img.is_zero() {
                continue;
            }
            let rest = bare.without_one(g).expect("factor present");
            let c = S::from_i64(e as i64);
            out.add_assign_scaled(&img.mul(&Element::term(rest, S::one())), &c);
        }
        let odd = bare.odd();
        for (j, &g) in odd.iter().enumerate() {
            let img = self.image(g)?;
            if img.is_zero() {
                continue;
            }
            // m = (E · o_1…o_{j−1}) · g · (o_{j+1}…), both pieces already canonical
            let left = Monomial::from_sorted(bare.even().to_vec(), odd[..j].to_vec());
            let right = Monomial::from_sorted(Vec::new(), odd[j + 1..].to_vec());
            let term = Element::term(left, S::one()).mul(img).mul(&Element::term(right, S::one()));
            out.add_assign_scaled(&term, &self.parity_sign(j));
        }
        Ok(out)
    }

    /// Apply to an undressed element.
    pub fn apply(&self, x: &Element<S>) -> Result<Element<S>> {
        let mut out = Element::zero();
        for (m, c) in x.terms() {
            if m.dress().is_some() {
                return Err(WeilError::InvalidInput("plain derivation applied to a dressed element; use apply_tot".into()));
            }
            out.add_assign_scaled(&self.apply_monomial(m)?, c);
        }
        Ok(out)
    }

    /// Totalized application for a weakly Hodge derivation of weight `w` raising form
    /// degree by `w`: each output monomial is dressed with u_{i+a}, where (a,b) is its
    /// Hodge shift relative to the source monomial.
    pub fn apply_tot(&self, x: &Element<S>, w: i32) -> Result<Element<S>> {
        let mut out = Element::zero();
        for (m, c) in x.terms() {
            let i = match m.dress() {
                Some(i) => i as i32,
                None if m.form_degree() == 0 => 0,
                None => {
                    return Err(WeilError::InvalidInput("apply_tot needs dressed forms".into()));
                }
            };
            let src = m.plain_hodge();
            let img = self.apply_monomial(m)?;
            for (mm, v) in img.terms() {
                let shift = mm.plain_hodge() - src;
                if !admissible_shift(shift, w) {
                    return Err(WeilError::NotTotalizable(shift.p, shift.q));
                }
                out.add_term(mm.with_dress(Some((i + shift.p) as u8)), v.clone() * c.clone());
            }
        }
        Ok(out)
    }

    /// Graded commutator [P,Q] = PQ − (−1)^{|P||Q|} QP, computed on generators.
    pub fn supercommutator(&self, other: &Derivation<S>) -> Result<Derivation<S>> {
        let mut out = Derivation::zero(self.odd ^ other.odd, self.dim.max(other.dim));
        let both_odd = self.odd && other.odd;
        for g in generators(out.dim) {
            let pq = self.apply(other.image(g)?)?;
            let qp = other.apply(self.image(g)?)?;
            let v = if both_odd { pq.add(&qp) } else { pq.sub(&qp) };
            out.set(g, v);
        }
        Ok(out)
    }

    /// Sum of two derivations of equal parity.
    pub fn plus(&self, other: &Derivation<S>) -> Derivation<S> {
        assert_eq!(self.odd, other.odd);
        let mut out = self.clone();
        for (g, v) in &other.images {
            let cur = out.images.get(g).cloned().unwrap_or_default();
            out.images.insert(*g, cur.add(v));
        }
        out
    }

    pub fn scale(&self, c: &S) -> Derivation<S> {
        Derivation { odd: self.odd, dim: self.dim, images: self.images.iter().map(|(g, v)| (*g, v.scale(c))).collect() }
    }

    /// Restrict images to terms satisfying a predicate.
    pub fn filter_images(&self, pred: impl Fn(&Monomial) -> bool) -> Derivation<S> {
        Derivation {
            odd: self.odd,
            dim: self.dim,
            images: self.images.iter().map(|(g, v)| (*g, v.filter(&pred))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.images.values().all(Element::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Qc;
    use crate::weil::monomial::{dz, dzb, s, sb, th, z};

    type E = Element<Qc>;

    fn c_op() -> Derivation<Qc> {
        Derivation::zero(true, 1).with(s(1), E::gen(dz(1))).with(sb(1), E::gen(dzb(1)).neg())
    }

    fn sigma_op() -> Derivation<Qc> {
        Derivation::zero(true, 1).with(dz(1), E::gen(s(1))).with(dzb(1), E::gen(sb(1)).neg())
    }

    #[test]
    fn c_on_z_s() {
        let x = E::product_of(&[z(1), s(1)]);
        assert_eq!(c_op().apply(&x).unwrap(), E::product_of(&[z(1), dz(1)]));
    }

    #[test]
    fn sigma_odd_leibniz() {
        // σ(s·dz∧dz̄) = s²·dz̄ + s·s̄·dz
        let x = E::product_of(&[s(1), dz(1), dzb(1)]);
        let expect = E::product_of(&[s(1), s(1), dzb(1)]).add(&E::product_of(&[s(1), sb(1), dz(1)]));
        assert_eq!(sigma_op().apply(&x).unwrap(), expect);
    }

    #[test]
    fn dr_on_z_s() {
        let dr = Derivation::<Qc>::zero(true, 1).with(s(1), E::gen(th(1)));
        assert_eq!(dr.apply(&E::product_of(&[z(1), s(1)])).unwrap(), E::product_of(&[z(1), th(1)]));
    }

    #[test]
    fn anticommutator_of_odd_derivations_is_even_derivation() {
        let h = c_op().supercommutator(&sigma_op()).unwrap();
        assert!(!h.odd);
        // h acts on monomials by augmentation degree
        let x = E::product_of(&[s(1), s(1), sb(1), dz(1)]);
        let direct = c_op().apply(&sigma_op().apply(&x).unwrap()).unwrap().add(&sigma_op().apply(&c_op().apply(&x).unwrap()).unwrap());
        assert_eq!(h.apply(&x).unwrap(), direct);
        assert_eq!(direct, x.scale(&Qc::from_i64(4)));
    }

    #[test]
    fn missing_dimension_is_an_error() {
        let x = E::gen(s(2));
        assert!(matches!(c_op().apply(&x), Err(WeilError::MissingImage(_))));
    }

    #[test]
    fn totalized_c_matches_hodge_rule() {
        let t = c_op().apply_tot(&E::gen(s(1)), 1).unwrap();
        assert_eq!(t, E::term(Monomial::gen(dz(1)).with_dress(Some(0)), Qc::from_i64(1)));
        let t = c_op().apply_tot(&E::gen(sb(1)), 1).unwrap();
        assert_eq!(t, E::term(Monomial::gen(dzb(1)).with_dress(Some(1)), Qc::from_i64(-1)));
    }
}
