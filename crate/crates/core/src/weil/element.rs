//! Sparse elements of the (totalized) Weil algebra.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::monomial::{Gen, Monomial};
use crate::hodge::HodgeBidegree;
use crate::scalar::Scalar;

/// Sparse linear combination of canonical monomials with pruned zero coefficients.
#[derive(Clone, PartialEq)]
pub struct Element<S> {
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Default for Element<S> {
    fn default() -> Self {
        Element { terms: BTreeMap::new() }
    }
}

impl<S: Scalar> Element<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(Monomial::one(), S::one())
    }

    pub fn term(m: Monomial, c: S) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn gen(g: Gen) -> Self {
        Self::term(Monomial::gen(g), S::one())
    }

    /// Ordered product of generators (reordering sign applied).
    pub fn product_of(gens: &[Gen]) -> Self {
        match Monomial::from_factors(gens) {
            Some((sign, m)) => Self::term(m, S::from_i64(sign as i64)),
            None => Self::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, S)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let v = old + c;
                if !v.is_zero() {
                    self.terms.insert(m, v);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Element<S>, c: &S) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v.clone() * c.clone());
        }
    }

    pub fn add(&self, other: &Element<S>) -> Element<S> {
        let mut out = self.clone();
        out.add_assign_scaled(other, &S::one());
        out
    }

    pub fn sub(&self, other: &Element<S>) -> Element<S> {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-S::one());
        out
    }

    pub fn scale(&self, c: &S) -> Element<S> {
        if c.is_zero() {
            return Self::zero();
        }
        Element { terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())).collect() }
    }

    pub fn neg(&self) -> Element<S> {
        self.scale(&-S::one())
    }

    pub fn mul(&self, other: &Element<S>) -> Element<S> {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some((sign, m)) = a.mul(b) {
                    let c = x.clone() * y.clone();
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        out
    }

    /// Keep the terms satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> Element<S> {
        Element { terms: self.terms.iter().filter(|(m, _)| pred(m)).map(|(m, v)| (m.clone(), v.clone())).collect() }
    }

    pub fn truncate_total(&self, max_total: u32) -> Element<S> {
        self.filter(|m| m.total() <= max_total)
    }

    pub fn map_coeffs(&self, f: impl Fn(&S) -> S) -> Element<S> {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), f(v));
        }
        out
    }

    /// Apply a monomial-level linear map.
    pub fn map_monomials(&self, f: impl Fn(&Monomial) -> Element<S>) -> Element<S> {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_assign_scaled(&f(m), v);
        }
        out
    }

    /// Drop coefficients below `tol` (floating mode); exact mode keeps everything nonzero.
    pub fn chop(&self, tol: f64) -> Element<S> {
        if S::EXACT {
            return self.clone();
        }
        Element { terms: self.terms.iter().filter(|(_, v)| !v.is_negligible(tol)).map(|(m, v)| (m.clone(), v.clone())).collect() }
    }

    /// Euclidean norm in the orthonormal monomial basis.
    pub fn norm(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, v| acc + v.abs_f64().powi(2)).sqrt()
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        if S::EXACT {
            self.is_zero()
        } else {
            self.terms.values().all(|v| v.is_negligible(tol))
        }
    }

    /// Drop dressings (the projection P, u_p ↦ 1).
    pub fn project(&self) -> Element<S> {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.undressed(), v.clone());
        }
        out
    }

    /// Dress each monomial with u_p where p is given per monomial.
    pub fn dress_with(&self, f: impl Fn(&Monomial) -> Option<u8>) -> Element<S> {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.with_dress(f(m)), v.clone());
        }
        out
    }

    /// Set of Hodge bidegrees present (dressings included).
    pub fn hodge_types(&self) -> Vec<HodgeBidegree> {
        let mut v: Vec<_> = self.terms.keys().map(Monomial::hodge).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Split by the base-coordinate factor: V2 monomial → coefficient element of the rest.
    pub fn split_v2(&self) -> BTreeMap<Monomial, Element<S>> {
        let mut out: BTreeMap<Monomial, Element<S>> = BTreeMap::new();
        for (m, v) in &self.terms {
            let (a, b) = m.split_v2();
            out.entry(a).or_default().add_term(b, v.clone());
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    pub fn convert<T: Scalar>(&self) -> Element<T> {
        let mut out = Element::<T>::zero();
        for (m, v) in &self.terms {
            let (re, im) = v.to_parts();
            out.add_term(m.clone(), T::from_parts(re, im));
        }
        out
    }
}

impl<S: fmt::Debug> fmt::Debug for Element<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, v)| format!("({:?})[{}]", v, m.key())).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<S: Scalar> Zero for Element<S> {
    fn zero() -> Self {
        Element::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> std::ops::Add for Element<S> {
    type Output = Element<S>;
    fn add(self, rhs: Self) -> Self {
        Element::add(&self, &rhs)
    }
}
