//! Exact rational truth degrees on `[0, 1]` and the Łukasiewicz operations.
//!
//! Every degree in the crate is a [`Rational01`]. Values whose canonical
//! numerator and denominator fit in 32 bits are stored inline and combined
//! with 128-bit intermediates; anything larger falls back to arbitrary
//! precision. The representation is a function of the value, so derived
//! equality and hashing compare canonical forms.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("degree {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
}

/// An exact rational number in `[0, 1]`, always in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational01(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small { num: u32, den: u32 },
    Big(BigRational),
}

impl Rational01 {
    pub fn zero() -> Self {
        Rational01(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Rational01(Repr::Small { num: 1, den: 1 })
    }

    /// Builds `num/den`, reducing to lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        if num > den {
            return Err(RationalError::OutOfRange(format!("{num}/{den}")));
        }
        Ok(Self::from_u128_unchecked(num as u128, den as u128))
    }

    /// Builds an exact value from an arbitrary-precision ratio.
    pub fn from_big(value: BigRational) -> Result<Self, RationalError> {
        if value.is_negative() || value > BigRational::one() {
            return Err(RationalError::OutOfRange(value.to_string()));
        }
        Ok(Self::from_big_unchecked(value))
    }

    /// `k/denominator`, the `k`-th point of the uniform grid with that denominator.
    pub fn from_grid(k: u64, denominator: u64) -> Result<Self, RationalError> {
        Self::new(k, denominator)
    }

    fn from_u128_unchecked(num: u128, den: u128) -> Self {
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        match (u32::try_from(num), u32::try_from(den)) {
            (Ok(num), Ok(den)) => Rational01(Repr::Small { num, den }),
            _ => Rational01(Repr::Big(BigRational::new(
                BigInt::from(num),
                BigInt::from(den),
            ))),
        }
    }

    fn from_big_unchecked(value: BigRational) -> Self {
        // BigRational keeps itself reduced with a positive denominator.
        match (value.numer().to_u32(), value.denom().to_u32()) {
            (Some(num), Some(den)) => Rational01(Repr::Small { num, den }),
            _ => Rational01(Repr::Big(value)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigUint {
        match &self.0 {
            Repr::Small { num, .. } => BigUint::from(*num),
            Repr::Big(b) => b.numer().magnitude().clone(),
        }
    }

    pub fn denom(&self) -> BigUint {
        match &self.0 {
            Repr::Small { den, .. } => BigUint::from(*den),
            Repr::Big(b) => b.denom().magnitude().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { num: 1, den: 1 })
    }

    /// Returns `k` when the value equals `k/denominator`.
    pub fn grid_level(&self, denominator: u64) -> Option<u64> {
        if denominator == 0 {
            return None;
        }
        match &self.0 {
            Repr::Small { num, den } => {
                let (num, den) = (*num as u128, *den as u128);
                let scaled = num * denominator as u128;
                if scaled.is_multiple_of(den) {
                    u64::try_from(scaled / den).ok()
                } else {
                    None
                }
            }
            Repr::Big(b) => {
                let scaled = b * BigRational::from_integer(BigInt::from(denominator));
                if scaled.is_integer() {
                    scaled.to_integer().to_u64()
                } else {
                    None
                }
            }
        }
    }

    /// True when the value is a multiple of `1/denominator`.
    pub fn on_grid(&self, denominator: u64) -> bool {
        self.grid_level(denominator).is_some()
    }

    /// Decimal rendering truncated to `places` digits (exact up to that point).
    pub fn to_decimal(&self, places: usize) -> String {
        let num = self.numer();
        let den = self.denom();
        let (int_part, mut rem) = num.div_rem(&den);
        if places == 0 {
            return int_part.to_string();
        }
        let mut out = format!("{int_part}.");
        let ten = BigUint::from(10u32);
        for _ in 0..places {
            rem *= &ten;
            let (digit, r) = rem.div_rem(&den);
            out.push_str(&digit.to_string());
            rem = r;
        }
        out
    }

    /// Łukasiewicz t-norm, `max(a + b - 1, 0)`.
    pub fn strong_conj(&self, other: &Self) -> Self {
        match (&self.0, &other.0) {
            (Repr::Small { num: p, den: q }, Repr::Small { num: r, den: s }) => {
                let (p, q, r, s) = (*p as u128, *q as u128, *r as u128, *s as u128);
                let sum = p * s + r * q;
                let unit = q * s;
                if sum <= unit {
                    Self::zero()
                } else {
                    Self::from_u128_unchecked(sum - unit, unit)
                }
            }
            _ => {
                let v = self.to_big() + other.to_big() - BigRational::one();
                if v.is_positive() {
                    Self::from_big_unchecked(v)
                } else {
                    Self::zero()
                }
            }
        }
    }

    /// Residuum of the t-norm, `min(1 - a + b, 1)`.
    pub fn implication(&self, other: &Self) -> Self {
        if self <= other {
            return Self::one();
        }
        match (&self.0, &other.0) {
            (Repr::Small { num: p, den: q }, Repr::Small { num: r, den: s }) => {
                let (p, q, r, s) = (*p as u128, *q as u128, *r as u128, *s as u128);
                // a > b, so q*s - (p*s - r*q) lies in (0, q*s).
                let unit = q * s;
                Self::from_u128_unchecked(unit - (p * s - r * q), unit)
            }
            _ => Self::from_big_unchecked(BigRational::one() - self.to_big() + other.to_big()),
        }
    }

    pub fn negation(&self) -> Self {
        match &self.0 {
            Repr::Small { num, den } => Rational01(Repr::Small {
                num: den - num,
                den: *den,
            }),
            Repr::Big(b) => Self::from_big_unchecked(BigRational::one() - b),
        }
    }

    pub fn weak_conj(&self, other: &Self) -> Self {
        std::cmp::min(self, other).clone()
    }

    pub fn weak_disj(&self, other: &Self) -> Self {
        std::cmp::max(self, other).clone()
    }

    /// `1 - |a - b|`, the value of `a ↔ b`.
    pub fn biimplication(&self, other: &Self) -> Self {
        if self >= other {
            self.implication(other)
        } else {
            other.implication(self)
        }
    }

    /// Strong conjunction of a sequence; the empty product is 1.
    pub fn strong_conj_all<'a, I>(items: I) -> Self
    where
        I: IntoIterator<Item = &'a Rational01>,
    {
        items
            .into_iter()
            .fold(Self::one(), |acc, x| acc.strong_conj(x))
    }
}

impl Default for Rational01 {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialOrd for Rational01 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational01 {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: p, den: q }, Repr::Small { num: r, den: s }) => {
                (*p as u64 * *s as u64).cmp(&(*r as u64 * *q as u64))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rational01 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational01 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `3/10`, `0.3`, `.3`, `1` or `0` exactly. Decimals are never
/// routed through floating point.
impl FromStr for Rational01 {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || RationalError::Malformed(s.to_string());
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((n, d)) = s.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(malformed());
            }
            let n: BigInt = n.parse().map_err(|_| malformed())?;
            let d: BigInt = d.parse().map_err(|_| malformed())?;
            if d.is_zero() {
                return Err(RationalError::ZeroDenominator);
            }
            BigRational::new(n, d)
        } else if let Some((int, frac)) = s.split_once('.') {
            if !(int.is_empty() || digits(int)) || !digits(frac) {
                return Err(malformed());
            }
            let int = if int.is_empty() { "0" } else { int };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let whole: BigInt = int.parse().map_err(|_| malformed())?;
            let part: BigInt = frac.parse().map_err(|_| malformed())?;
            BigRational::new(whole * &scale + part, scale)
        } else {
            if !digits(s) {
                return Err(malformed());
            }
            BigRational::from_integer(s.parse().map_err(|_| malformed())?)
        };
        Self::from_big(value)
    }
}

/// Least common multiple of the denominators, i.e. the coarsest grid `1/D`
/// containing every value.
pub fn common_denominator<'a, I>(values: I) -> BigUint
where
    I: IntoIterator<Item = &'a Rational01>,
{
    values
        .into_iter()
        .fold(BigUint::one(), |acc, v| acc.lcm(&v.denom()))
}
