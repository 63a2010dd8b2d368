//! Coefficient fields: exact rational complex numbers and floating complex numbers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact complex rational.
pub type Qc = Complex<BigRational>;
/// Floating complex.
pub type Fc = Complex<f64>;

/// Default tolerance for floating mode.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Coefficient field used by every algebraic routine in the crate.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact and comparisons with zero are decisive.
    const EXACT: bool;

    fn from_parts(re: BigRational, im: BigRational) -> Self;
    fn from_c64(z: Fc) -> Self;
    fn to_c64(&self) -> Fc;
    fn conj(&self) -> Self;

    /// Exact parts, if representable. Floats convert through their binary expansion.
    fn to_parts(&self) -> (BigRational, BigRational);

    fn from_i64(n: i64) -> Self {
        Self::from_parts(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_parts(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    fn i() -> Self {
        Self::from_parts(BigRational::zero(), BigRational::one())
    }

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Zero test: exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Pivot quality used by elimination; larger is better.
    fn pivot_weight(&self) -> f64 {
        self.abs_f64()
    }
}

impl Scalar for Qc {
    const EXACT: bool = true;

    fn from_parts(re: BigRational, im: BigRational) -> Self {
        Complex::new(re, im)
    }

    fn from_c64(z: Fc) -> Self {
        let re = BigRational::from_float(z.re).unwrap_or_else(BigRational::zero);
        let im = BigRational::from_float(z.im).unwrap_or_else(BigRational::zero);
        Complex::new(re, im)
    }

    fn to_c64(&self) -> Fc {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn to_parts(&self) -> (BigRational, BigRational) {
        (self.re.clone(), self.im.clone())
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn pivot_weight(&self) -> f64 {
        // Any nonzero pivot is fine; prefer small denominators to limit growth.
        if self.is_zero() {
            0.0
        } else {
            let bits = self.re.denom().bits() + self.im.denom().bits();
            1.0 / (1.0 + bits as f64)
        }
    }
}

impl Scalar for Fc {
    const EXACT: bool = false;

    fn from_parts(re: BigRational, im: BigRational) -> Self {
        Complex::new(re.to_f64().unwrap_or(f64::NAN), im.to_f64().unwrap_or(f64::NAN))
    }

    fn from_c64(z: Fc) -> Self {
        z
    }

    fn to_c64(&self) -> Fc {
        *self
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn to_parts(&self) -> (BigRational, BigRational) {
        (
            BigRational::from_float(self.re).unwrap_or_else(BigRational::zero),
            BigRational::from_float(self.im).unwrap_or_else(BigRational::zero),
        )
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
}

/// Exact rational from a machine integer pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Real rational embedded in any scalar type.
pub fn real<S: Scalar>(q: BigRational) -> S {
    S::from_parts(q, BigRational::zero())
}

/// Render a rational as `num/den` (or just `num` when integral).
pub fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `a/b`, an integer, or a finite decimal such as `-0.125` or `1e-3` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Largest absolute value among real and imaginary parts, as f64 (used for reporting).
pub fn max_abs_f64<S: Scalar>(xs: impl IntoIterator<Item = S>) -> f64 {
    xs.into_iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
}
