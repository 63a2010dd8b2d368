//! JSON jet files: metric, Christoffel, solution, polarization and report payloads.
//!
//! Every coefficient is an entry `(slot, key, re, im)`. `key` is a canonical monomial key
//! (see [`Monomial::key`]); `re`/`im` are `["num", "den"]` pairs or decimal strings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::connection::ConnectionSolution;
use crate::error::{Result, WeilError};
use crate::kahler::{ChristoffelJet, MetricJet};
use crate::polarization::{extend_levels, PolarizationDiagnostics, PolarizationSolution};
use crate::scalar::{parse_rational, Scalar};
use crate::weil::{canonical_c, generators, Derivation, Element, Gen, Kind, Monomial};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    Metric,
    Christoffel,
    Solution,
    Polarization,
    Report,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

/// A rational as a `[num, den]` pair, or any integer, fraction or finite decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Pair([String; 2]),
    Text(String),
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::Text("0".into())
    }
}

impl Coeff {
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Coeff::Pair([n, d]) => {
                let n: BigInt = n.trim().parse().map_err(|_| WeilError::Parse(format!("bad numerator '{n}'")))?;
                let d: BigInt = d.trim().parse().map_err(|_| WeilError::Parse(format!("bad denominator '{d}'")))?;
                if d.is_zero() {
                    return Err(WeilError::Parse("zero denominator".into()));
                }
                Ok(BigRational::new(n, d))
            }
            Coeff::Text(t) => parse_rational(t).ok_or_else(|| WeilError::Parse(format!("bad number '{t}'"))),
        }
    }

    fn emit(q: &BigRational, arithmetic: Arithmetic) -> Coeff {
        match arithmetic {
            Arithmetic::Exact => Coeff::Pair([q.numer().to_string(), q.denom().to_string()]),
            // shortest round-trip decimal
            Arithmetic::Float => Coeff::Text(format!("{}", q.to_f64().unwrap_or(f64::NAN))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub slot: String,
    pub key: String,
    pub re: Coeff,
    #[serde(default)]
    pub im: Coeff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetFile {
    pub schema_version: u32,
    pub kind: PayloadKind,
    pub dim: u8,
    pub order: u32,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub entries: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
}

impl JetFile {
    pub fn new(kind: PayloadKind, dim: u8, order: u32, arithmetic: Arithmetic) -> Self {
        JetFile { schema_version: SCHEMA_VERSION, kind, dim, order, arithmetic, entries: Vec::new(), report: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: JetFile = serde_json::from_str(text).map_err(|e| WeilError::Parse(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(WeilError::Parse(format!("unsupported schema_version {}", f.schema_version)));
        }
        if f.dim == 0 {
            return Err(WeilError::Parse("dim must be positive".into()));
        }
        Ok(f)
    }

    /// Pretty JSON with a trailing newline; byte-identical for identical content.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("jet files always serialize");
        s.push('\n');
        s
    }

    pub fn expect_kind(&self, kind: PayloadKind) -> Result<()> {
        if self.kind != kind {
            return Err(WeilError::Parse(format!("expected a {kind:?} file, found {:?}", self.kind).to_lowercase()));
        }
        Ok(())
    }

    fn push<S: Scalar>(&mut self, slot: String, e: &Element<S>) {
        for (m, c) in e.terms() {
            let (re, im) = c.to_parts();
            self.entries.push(Entry {
                slot: slot.clone(),
                key: m.key(),
                re: Coeff::emit(&re, self.arithmetic),
                im: Coeff::emit(&im, self.arithmetic),
            });
        }
    }

    /// Group entries by slot into elements.
    fn slots<S: Scalar>(&self) -> Result<BTreeMap<String, Element<S>>> {
        let mut out: BTreeMap<String, Element<S>> = BTreeMap::new();
        for e in &self.entries {
            let (sign, m) = Monomial::parse_key(&e.key)?;
            let mut c = S::from_parts(e.re.to_rational()?, e.im.to_rational()?);
            if sign < 0 {
                c = -c;
            }
            out.entry(e.slot.trim().to_string()).or_default().add_term(m, c);
        }
        Ok(out)
    }
}

pub fn arithmetic_of<S: Scalar>() -> Arithmetic {
    if S::EXACT { Arithmetic::Exact } else { Arithmetic::Float }
}

fn bad_slot(slot: &str) -> WeilError {
    WeilError::Parse(format!("unrecognized slot '{slot}'"))
}

fn indices(parts: &[&str], dim: u8, slot: &str) -> Result<Vec<usize>> {
    parts
        .iter()
        .map(|t| match t.parse::<usize>() {
            Ok(i) if i >= 1 && i <= dim as usize => Ok(i - 1),
            _ => Err(WeilError::Parse(format!("index '{t}' out of range in slot '{slot}'"))),
        })
        .collect()
}

fn check_series<S: Scalar>(slot: &str, e: &Element<S>) -> Result<()> {
    match e.terms().find(|(m, _)| m.count(Kind::V2h) + m.count(Kind::V2a) != m.total() || m.dress().is_some()) {
        Some((m, _)) => Err(WeilError::Parse(format!("slot '{slot}': '{}' is not a base-coordinate monomial", m.key()))),
        None => Ok(()),
    }
}

pub fn metric_to_file<S: Scalar>(g: &MetricJet<S>) -> JetFile {
    let mut f = JetFile::new(PayloadKind::Metric, g.dim, g.order, arithmetic_of::<S>());
    for (i, row) in g.g.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            f.push(format!("g {} {}", i + 1, j + 1), e);
        }
    }
    f
}

pub fn metric_from_file<S: Scalar>(f: &JetFile) -> Result<MetricJet<S>> {
    f.expect_kind(PayloadKind::Metric)?;
    let n = f.dim as usize;
    let mut g = vec![vec![Element::zero(); n]; n];
    for (slot, e) in f.slots::<S>()? {
        let parts: Vec<&str> = slot.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "g" {
            return Err(bad_slot(&slot));
        }
        check_series(&slot, &e)?;
        let ix = indices(&parts[1..], f.dim, &slot)?;
        g[ix[0]][ix[1]] = e;
    }
    MetricJet::new(f.dim, f.order, g)
}

pub fn christoffel_to_file<S: Scalar>(gamma: &ChristoffelJet<S>) -> JetFile {
    let mut f = JetFile::new(PayloadKind::Christoffel, gamma.dim, gamma.order, arithmetic_of::<S>());
    for (name, table) in [("hol", &gamma.hol), ("mixed", &gamma.mixed)] {
        for (k, a) in table.iter().enumerate() {
            for (i, b) in a.iter().enumerate() {
                for (j, e) in b.iter().enumerate() {
                    f.push(format!("{name} {} {} {}", k + 1, i + 1, j + 1), e);
                }
            }
        }
    }
    f
}

pub fn christoffel_from_file<S: Scalar>(f: &JetFile) -> Result<ChristoffelJet<S>> {
    f.expect_kind(PayloadKind::Christoffel)?;
    let n = f.dim as usize;
    let mut hol = vec![vec![vec![Element::zero(); n]; n]; n];
    let mut mixed = hol.clone();
    for (slot, e) in f.slots::<S>()? {
        let parts: Vec<&str> = slot.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad_slot(&slot));
        }
        let table = match parts[0] {
            "hol" => &mut hol,
            "mixed" => &mut mixed,
            _ => return Err(bad_slot(&slot)),
        };
        check_series(&slot, &e)?;
        let ix = indices(&parts[1..], f.dim, &slot)?;
        table[ix[0]][ix[1]][ix[2]] = e;
    }
    ChristoffelJet::new(f.dim, f.order, hol, mixed)
}

fn parse_gen(text: &str, dim: u8) -> Option<Gen> {
    let split = text.find(|c: char| c.is_ascii_digit())?;
    let kind = Kind::from_symbol(&text[..split])?;
    let index: u8 = text[split..].parse().ok()?;
    (index >= 1 && index <= dim).then_some(Gen::new(kind, index))
}

/// Levels D₁..D_N as slots `D<k> <generator>`; D₀ = C is implied.
pub fn solution_to_file<S: Scalar>(sol: &ConnectionSolution<S>) -> JetFile {
    let mut f = JetFile::new(PayloadKind::Solution, sol.dim, sol.order, arithmetic_of::<S>());
    for (k, d) in sol.levels.iter().enumerate().skip(1) {
        for (g, img) in d.images() {
            f.push(format!("D{k} {g}"), img);
        }
    }
    f
}

pub fn solution_from_file<S: Scalar>(f: &JetFile) -> Result<ConnectionSolution<S>> {
    f.expect_kind(PayloadKind::Solution)?;
    let mut levels: Vec<Derivation<S>> = vec![canonical_c(f.dim)];
    levels.extend((1..=f.order).map(|_| Derivation::zero(true, f.dim)));
    for (slot, e) in f.slots::<S>()? {
        let (lvl, gen) = slot.split_once(' ').ok_or_else(|| bad_slot(&slot))?;
        let k: usize = lvl.strip_prefix('D').and_then(|t| t.parse().ok()).ok_or_else(|| bad_slot(&slot))?;
        if k == 0 || k > f.order as usize {
            return Err(WeilError::Parse(format!("slot '{slot}': level outside 1..={}", f.order)));
        }
        let g = parse_gen(gen.trim(), f.dim).ok_or_else(|| bad_slot(&slot))?;
        if !generators(f.dim).contains(&g) {
            return Err(bad_slot(&slot));
        }
        levels[k].set(g, e);
    }
    let probe = ConnectionSolution::from_levels(f.dim, f.order, ChristoffelJet::zero(f.dim, f.order), levels);
    let gamma = probe.extract_christoffel()?;
    Ok(ConnectionSolution { gamma, ..probe })
}

/// Ω₀..Ω_N as slots `Omega<k>`.
pub fn polarization_to_file<S: Scalar>(pol: &PolarizationSolution<S>) -> JetFile {
    let mut f = JetFile::new(PayloadKind::Polarization, pol.dim, pol.order, arithmetic_of::<S>());
    for (k, om) in pol.levels.iter().enumerate() {
        f.push(format!("Omega{k}"), om);
    }
    f
}

/// Read Ω levels; the extended derivation is rebuilt from the matching solution.
pub fn polarization_from_file<S: Scalar>(f: &JetFile, sol: &ConnectionSolution<S>) -> Result<PolarizationSolution<S>> {
    f.expect_kind(PayloadKind::Polarization)?;
    if f.dim != sol.dim {
        return Err(WeilError::InvalidInput(format!("polarization has dim {}, solution has dim {}", f.dim, sol.dim)));
    }
    let mut levels = vec![Element::zero(); f.order as usize + 1];
    for (slot, e) in f.slots::<S>()? {
        let k: usize = slot.strip_prefix("Omega").and_then(|t| t.parse().ok()).ok_or_else(|| bad_slot(&slot))?;
        if k > f.order as usize {
            return Err(WeilError::Parse(format!("slot '{slot}': level outside 0..={}", f.order)));
        }
        levels[k] = e;
    }
    Ok(PolarizationSolution {
        dim: f.dim,
        order: f.order,
        levels,
        extended: extend_levels(sol)?,
        diagnostics: PolarizationDiagnostics { kernel: Vec::new(), totalized_route: false, route_mismatch: 0.0 },
    })
}

pub fn report_file(dim: u8, order: u32, report: serde_json::Value) -> JetFile {
    let mut f = JetFile::new(PayloadKind::Report, dim, order, Arithmetic::Exact);
    f.report = Some(report);
    f
}
