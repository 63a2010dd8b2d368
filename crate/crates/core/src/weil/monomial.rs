//! Generators and canonical monomials of the (totalized) Weil algebra at a point.

use std::fmt;

use crate::error::{Result, WeilError};
use crate::hodge::HodgeBidegree;

/// Generator families.
///
/// `V2h`/`V2a` are base coordinates z, z̄; `V3h`/`V3a` the fibre coordinates s, s̄;
/// `V1h`/`V1a` the one-forms dz, dz̄; `V4h`/`V4a` the relative forms θ, θ̄.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    V2h,
    V2a,
    V3h,
    V3a,
    V1h,
    V1a,
    V4h,
    V4a,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::V2h,
        Kind::V2a,
        Kind::V3h,
        Kind::V3a,
        Kind::V1h,
        Kind::V1a,
        Kind::V4h,
        Kind::V4a,
    ];

    pub fn is_odd(self) -> bool {
        matches!(self, Kind::V1h | Kind::V1a | Kind::V4h | Kind::V4a)
    }

    pub fn hodge(self) -> HodgeBidegree {
        let (p, q) = match self {
            Kind::V2h | Kind::V2a => (0, 0),
            Kind::V3h => (1, -1),
            Kind::V3a => (-1, 1),
            Kind::V1h | Kind::V4h => (1, 0),
            Kind::V1a | Kind::V4a => (0, 1),
        };
        HodgeBidegree::new(p, q)
    }

    /// Augmentation bidegree.
    pub fn aug(self) -> (u32, u32) {
        match self {
            Kind::V3h | Kind::V1h => (1, 0),
            Kind::V3a | Kind::V1a => (0, 1),
            _ => (0, 0),
        }
    }

    pub fn total(self) -> u32 {
        match self {
            Kind::V4h | Kind::V4a => 0,
            _ => 1,
        }
    }

    /// Sign of ι* on the generator. The relative forms carry the same sign as the
    /// fibre coordinates so that ι* commutes with dʳ.
    pub fn iota_sign(self) -> i32 {
        match self {
            Kind::V3h | Kind::V3a | Kind::V4h | Kind::V4a => -1,
            _ => 1,
        }
    }

    pub fn conj(self) -> Kind {
        match self {
            Kind::V2h => Kind::V2a,
            Kind::V2a => Kind::V2h,
            Kind::V3h => Kind::V3a,
            Kind::V3a => Kind::V3h,
            Kind::V1h => Kind::V1a,
            Kind::V1a => Kind::V1h,
            Kind::V4h => Kind::V4a,
            Kind::V4a => Kind::V4h,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Kind::V2h => "z",
            Kind::V2a => "zb",
            Kind::V3h => "s",
            Kind::V3a => "sb",
            Kind::V1h => "dz",
            Kind::V1a => "dzb",
            Kind::V4h => "th",
            Kind::V4a => "thb",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.symbol() == sym)
    }
}

/// A generator with a 1-based coordinate index.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen {
    pub kind: Kind,
    pub index: u8,
}

impl Gen {
    pub const fn new(kind: Kind, index: u8) -> Self {
        Gen { kind, index }
    }
    pub fn conj(self) -> Gen {
        Gen::new(self.kind.conj(), self.index)
    }
}

pub fn z(i: u8) -> Gen {
    Gen::new(Kind::V2h, i)
}
pub fn zb(i: u8) -> Gen {
    Gen::new(Kind::V2a, i)
}
pub fn s(i: u8) -> Gen {
    Gen::new(Kind::V3h, i)
}
pub fn sb(i: u8) -> Gen {
    Gen::new(Kind::V3a, i)
}
pub fn dz(i: u8) -> Gen {
    Gen::new(Kind::V1h, i)
}
pub fn dzb(i: u8) -> Gen {
    Gen::new(Kind::V1a, i)
}
pub fn th(i: u8) -> Gen {
    Gen::new(Kind::V4h, i)
}
pub fn thb(i: u8) -> Gen {
    Gen::new(Kind::V4a, i)
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.symbol(), self.index)
    }
}

/// Canonical monomial: sorted even powers, strictly increasing odd factors, and an
/// optional dressing index p standing for u_p of level = number of one-form factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    even: Vec<(Gen, u32)>,
    odd: Vec<Gen>,
    dress: Option<u8>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn gen(g: Gen) -> Self {
        if g.kind.is_odd() {
            Monomial { even: vec![], odd: vec![g], dress: None }
        } else {
            Monomial { even: vec![(g, 1)], odd: vec![], dress: None }
        }
    }

    /// Build from unordered factors; returns the reordering sign, or `None` if an odd
    /// generator repeats.
    pub fn from_factors(factors: &[Gen]) -> Option<(i32, Monomial)> {
        let mut acc = (1, Monomial::one());
        for &g in factors {
            let (sg, m) = acc.1.mul(&Monomial::gen(g))?;
            acc = (acc.0 * sg, m);
        }
        Some(acc)
    }

    /// Assemble from already canonical parts (sorted, distinct odd factors).
    pub(crate) fn from_sorted(even: Vec<(Gen, u32)>, odd: Vec<Gen>) -> Monomial {
        debug_assert!(even.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(odd.windows(2).all(|w| w[0] < w[1]));
        Monomial { even, odd, dress: None }
    }

    pub fn even(&self) -> &[(Gen, u32)] {
        &self.even
    }
    pub fn odd(&self) -> &[Gen] {
        &self.odd
    }
    pub fn dress(&self) -> Option<u8> {
        self.dress
    }

    /// Attach a dressing; on form degree 0 the only dressing u_0 is stored as `None`.
    pub fn with_dress(&self, dress: Option<u8>) -> Monomial {
        let dress = if self.form_degree() == 0 { None } else { dress };
        Monomial { even: self.even.clone(), odd: self.odd.clone(), dress }
    }

    pub fn undressed(&self) -> Monomial {
        self.with_dress(None)
    }

    pub fn is_one(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn is_odd(&self) -> bool {
        self.odd.len() % 2 == 1
    }

    pub fn exponent(&self, g: Gen) -> u32 {
        if g.kind.is_odd() {
            u32::from(self.odd.contains(&g))
        } else {
            self.even.iter().find(|(h, _)| *h == g).map_or(0, |(_, e)| *e)
        }
    }

    /// Degree in a family (counting multiplicity).
    pub fn count(&self, kind: Kind) -> u32 {
        if kind.is_odd() {
            self.odd.iter().filter(|g| g.kind == kind).count() as u32
        } else {
            self.even.iter().filter(|(g, _)| g.kind == kind).map(|(_, e)| e).sum()
        }
    }

    /// B-degree: number of one-form factors dz, dz̄.
    pub fn form_degree(&self) -> u32 {
        self.count(Kind::V1h) + self.count(Kind::V1a)
    }

    /// Number of relative-form factors θ, θ̄.
    pub fn theta_degree(&self) -> u32 {
        self.count(Kind::V4h) + self.count(Kind::V4a)
    }

    /// Hodge bidegree of the undressed monomial.
    pub fn plain_hodge(&self) -> HodgeBidegree {
        let mut h = HodgeBidegree::new(0, 0);
        for (g, e) in &self.even {
            h = h + g.kind.hodge().scale(*e as i32);
        }
        for g in &self.odd {
            h = h + g.kind.hodge();
        }
        h
    }

    /// Hodge bidegree including the dressing u_p of level k, which has type (−p, p−k).
    pub fn hodge(&self) -> HodgeBidegree {
        let h = self.plain_hodge();
        match self.dress {
            None => h,
            Some(p) => {
                let k = self.form_degree() as i32;
                h + HodgeBidegree::new(-(p as i32), p as i32 - k)
            }
        }
    }

    pub fn aug(&self) -> (u32, u32) {
        let mut a = (0, 0);
        for (g, e) in &self.even {
            let (x, y) = g.kind.aug();
            a.0 += x * e;
            a.1 += y * e;
        }
        for g in &self.odd {
            let (x, y) = g.kind.aug();
            a.0 += x;
            a.1 += y;
        }
        a
    }

    pub fn aug_degree(&self) -> u32 {
        let (p, q) = self.aug();
        p + q
    }

    pub fn total(&self) -> u32 {
        let mut t = 0;
        for (g, e) in &self.even {
            t += g.kind.total() * e;
        }
        for g in &self.odd {
            t += g.kind.total();
        }
        t
    }

    /// Polynomial order in the base coordinates.
    pub fn v2_order(&self) -> u32 {
        self.count(Kind::V2h) + self.count(Kind::V2a)
    }

    /// Sign of ι* on this monomial.
    pub fn iota_sign(&self) -> i32 {
        let mut neg = 0;
        for (g, e) in &self.even {
            if g.kind.iota_sign() < 0 {
                neg += e;
            }
        }
        for g in &self.odd {
            if g.kind.iota_sign() < 0 {
                neg += 1;
            }
        }
        if neg % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Split off the base-coordinate part: (V2 monomial, the rest).
    pub fn split_v2(&self) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) =
            self.even.iter().partition(|(g, _)| matches!(g.kind, Kind::V2h | Kind::V2a));
        (
            Monomial { even: a, odd: vec![], dress: None },
            Monomial { even: b, odd: self.odd.clone(), dress: self.dress },
        )
    }

    /// Split m = r·t where t collects the base coordinates and relative forms (the
    /// factors every canonical operator treats as constants); no sign arises.
    pub fn split_coeff(&self) -> (Monomial, Monomial) {
        let is_coeff_even = |g: &Gen| matches!(g.kind, Kind::V2h | Kind::V2a);
        let is_coeff_odd = |g: &Gen| matches!(g.kind, Kind::V4h | Kind::V4a);
        let rest = Monomial {
            even: self.even.iter().filter(|(g, _)| !is_coeff_even(g)).cloned().collect(),
            odd: self.odd.iter().filter(|g| !is_coeff_odd(g)).cloned().collect(),
            dress: self.dress,
        };
        let coeff = Monomial {
            even: self.even.iter().filter(|(g, _)| is_coeff_even(g)).cloned().collect(),
            odd: self.odd.iter().filter(|g| is_coeff_odd(g)).cloned().collect(),
            dress: None,
        };
        (rest, coeff)
    }

    /// Remove one power of `g` (even) or the factor `g` (odd, at its position, sign +).
    pub fn without_one(&self, g: Gen) -> Option<Monomial> {
        let mut m = self.clone();
        if g.kind.is_odd() {
            let pos = m.odd.iter().position(|h| *h == g)?;
            m.odd.remove(pos);
        } else {
            let pos = m.even.iter().position(|(h, _)| *h == g)?;
            if m.even[pos].1 == 1 {
                m.even.remove(pos);
            } else {
                m.even[pos].1 -= 1;
            }
        }
        Some(m)
    }

    /// Supercommutative product. Dressings multiply by u_p·u_q = u_{p+q}; a missing
    /// dressing on a form-degree-0 factor acts as u_0.
    pub fn mul(&self, other: &Monomial) -> Option<(i32, Monomial)> {
        let mut even = Vec::with_capacity(self.even.len() + other.even.len());
        let (mut i, mut j) = (0, 0);
        while i < self.even.len() && j < other.even.len() {
            let (a, ea) = self.even[i];
            let (b, eb) = other.even[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    even.push((a, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    even.push((b, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    even.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        even.extend_from_slice(&self.even[i..]);
        even.extend_from_slice(&other.even[j..]);

        let mut odd = Vec::with_capacity(self.odd.len() + other.odd.len());
        let mut swaps = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < self.odd.len() && j < other.odd.len() {
            let a = self.odd[i];
            let b = other.odd[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    odd.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    // b jumps over the remaining left factors
                    swaps += self.odd.len() - i;
                    odd.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return None,
            }
        }
        odd.extend_from_slice(&self.odd[i..]);
        odd.extend_from_slice(&other.odd[j..]);

        let dress = match (self.dress, other.dress) {
            (None, None) => None,
            (Some(p), None) => Some(p),
            (None, Some(q)) => Some(q),
            (Some(p), Some(q)) => Some(p + q),
        };
        let sign = if swaps.is_multiple_of(2) { 1 } else { -1 };
        let mut m = Monomial { even, odd, dress };
        if m.form_degree() == 0 {
            m.dress = None;
        }
        Some((sign, m))
    }

    /// Canonical text key, e.g. `z1^2 zb1^1 | s1^1 | dz1`, with ` | u1` appended when dressed.
    pub fn key(&self) -> String {
        let fmt_even = |pred: fn(Kind) -> bool| {
            let parts: Vec<String> = self
                .even
                .iter()
                .filter(|(g, _)| pred(g.kind))
                .map(|(g, e)| format!("{g}^{e}"))
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join(" ")
            }
        };
        let v2 = fmt_even(|k| matches!(k, Kind::V2h | Kind::V2a));
        let v3 = fmt_even(|k| matches!(k, Kind::V3h | Kind::V3a));
        let odd = if self.odd.is_empty() {
            "1".to_string()
        } else {
            self.odd.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
        };
        match self.dress {
            None => format!("{v2} | {v3} | {odd}"),
            Some(p) => format!("{v2} | {v3} | {odd} | u{p}"),
        }
    }

    /// Parse a canonical key. Factors inside a section may appear in any order; the
    /// odd section must list distinct generators and is read as written (the reordering
    /// sign is returned).
    pub fn parse_key(key: &str) -> Result<(i32, Monomial)> {
        let bad = |why: &str| WeilError::Parse(format!("monomial key '{key}': {why}"));
        let sections: Vec<&str> = key.split('|').map(str::trim).collect();
        if sections.len() != 3 && sections.len() != 4 {
            return Err(bad("expected 3 or 4 sections separated by '|'"));
        }
        let mut factors = Vec::new();
        for (idx, sec) in sections[..3].iter().enumerate() {
            if *sec == "1" {
                continue;
            }
            for tok in sec.split_whitespace() {
                let (name, exp) = match tok.split_once('^') {
                    Some((n, e)) => (n, e.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                    None => (tok, 1),
                };
                let split = name
                    .find(|c: char| c.is_ascii_digit())
                    .ok_or_else(|| bad("generator without index"))?;
                let kind = Kind::from_symbol(&name[..split]).ok_or_else(|| bad("unknown generator"))?;
                let index: u8 = name[split..].parse().map_err(|_| bad("bad index"))?;
                if index == 0 {
                    return Err(bad("indices are 1-based"));
                }
                let expected = match kind {
                    Kind::V2h | Kind::V2a => 0,
                    Kind::V3h | Kind::V3a => 1,
                    _ => 2,
                };
                if expected != idx {
                    return Err(bad("generator in wrong section"));
                }
                if kind.is_odd() && exp != 1 {
                    return Err(bad("odd generator with exponent"));
                }
                for _ in 0..exp {
                    factors.push(Gen::new(kind, index));
                }
            }
        }
        let (sign, mut m) = Monomial::from_factors(&factors).ok_or_else(|| bad("repeated odd generator"))?;
        if sections.len() == 4 {
            let p = sections[3]
                .strip_prefix('u')
                .and_then(|t| t.parse::<u8>().ok())
                .ok_or_else(|| bad("bad dressing"))?;
            if u32::from(p) > m.form_degree() {
                return Err(bad("dressing index exceeds form degree"));
            }
            m.dress = Some(p);
        }
        Ok((sign, m))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_square_vanishes() {
        let a = Monomial::gen(dz(1));
        assert!(a.mul(&a).is_none());
    }

    #[test]
    fn odd_factors_anticommute() {
        let a = Monomial::gen(dz(1));
        let b = Monomial::gen(dzb(1));
        let (s1, m1) = a.mul(&b).unwrap();
        let (s2, m2) = b.mul(&a).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, -s2);
    }

    #[test]
    fn reorder_sign_counts_inversions() {
        let (sign, m) = Monomial::from_factors(&[dzb(1), th(1), dz(1)]).unwrap();
        assert_eq!(m.odd(), &[dz(1), dzb(1), th(1)]);
        // dzb th dz -> dz dzb th needs two transpositions
        assert_eq!(sign, 1);
        let (sign, _) = Monomial::from_factors(&[dzb(1), dz(1)]).unwrap();
        assert_eq!(sign, -1);
    }

    #[test]
    fn gradings_of_generators() {
        let m = Monomial::from_factors(&[s(1), s(1), sb(1), dz(1), z(1)]).unwrap().1;
        assert_eq!(m.aug(), (3, 1));
        assert_eq!(m.total(), 5);
        assert_eq!(m.plain_hodge(), HodgeBidegree::new(2, -1));
        assert_eq!(m.iota_sign(), -1);
        let dressed = m.with_dress(Some(1));
        assert_eq!(dressed.hodge(), HodgeBidegree::new(1, -1));
    }

    #[test]
    fn dressing_multiplies_by_level() {
        let a = Monomial::gen(s(1));
        let b = Monomial::gen(dz(1)).with_dress(Some(0));
        let (_, m) = a.mul(&b).unwrap();
        assert_eq!(m.dress(), Some(0));
        let c = Monomial::gen(dzb(1)).with_dress(Some(1));
        let (_, m2) = m.mul(&c).unwrap();
        assert_eq!(m2.dress(), Some(1));
    }

    #[test]
    fn key_round_trip() {
        let m = Monomial::from_factors(&[z(1), z(1), zb(1), s(1), dz(1)]).unwrap().1;
        assert_eq!(m.key(), "z1^2 zb1^1 | s1^1 | dz1");
        assert_eq!(Monomial::parse_key(&m.key()).unwrap(), (1, m.clone()));
        let d = m.with_dress(Some(1));
        assert_eq!(Monomial::parse_key(&d.key()).unwrap(), (1, d));
        assert_eq!(Monomial::one().key(), "1 | 1 | 1");
        let (sign, _) = Monomial::parse_key("1 | 1 | dzb1 dz1").unwrap();
        assert_eq!(sign, -1);
        assert!(Monomial::parse_key("s1^1 | 1 | 1").is_err());
        assert!(Monomial::parse_key("1 | 1 | dz1 dz1").is_err());
    }
}
