//! Monetary units.
//!
//! Every balance, grant and transfer is an integer count of millicoin. One
//! Worldcoin is exactly 1000 millicoin and nothing finer exists. Arithmetic is
//! checked; an overflow or underflow surfaces as an error and never wraps.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::AmountError;

/// Millicoin per Worldcoin.
pub const MILLICOIN_PER_WORLDCOIN: u64 = 1000;

/// A non-negative quantity of millicoin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);
    pub const MAX: Amount = Amount(u64::MAX);

    pub const fn from_millicoin(millicoin: u64) -> Self {
        Amount(millicoin)
    }

    /// Whole Worldcoin; errors when `wc × 1000` does not fit.
    pub fn from_worldcoin(wc: u64) -> Result<Self, AmountError> {
        wc.checked_mul(MILLICOIN_PER_WORLDCOIN)
            .map(Amount)
            .ok_or(AmountError::Overflow)
    }

    pub const fn millicoin(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, rhs: Amount) -> Result<Amount, AmountError> {
        self.0.checked_add(rhs.0).map(Amount).ok_or(AmountError::Overflow)
    }

    pub fn checked_sub(self, rhs: Amount) -> Result<Amount, AmountError> {
        self.0.checked_sub(rhs.0).map(Amount).ok_or(AmountError::Underflow)
    }

    pub fn checked_mul(self, factor: u64) -> Result<Amount, AmountError> {
        self.0.checked_mul(factor).map(Amount).ok_or(AmountError::Overflow)
    }

    pub fn saturating_sub(self, rhs: Amount) -> Amount {
        Amount(self.0.saturating_sub(rhs.0))
    }

    /// Sums an iterator of amounts, failing on overflow.
    pub fn checked_sum<I: IntoIterator<Item = Amount>>(iter: I) -> Result<Amount, AmountError> {
        iter.into_iter().try_fold(Amount::ZERO, Amount::checked_add)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / MILLICOIN_PER_WORLDCOIN;
        let frac = self.0 % MILLICOIN_PER_WORLDCOIN;
        if frac == 0 {
            write!(f, "{whole} WC")
        } else {
            write!(f, "{whole}.{frac:03} WC")
        }
    }
}

/// Exact non-negative rational `num / den`.
///
/// Used for the threshold scaling constants and for Worldcoin quantities that
/// have to be converted to millicoin without rounding.
#[derive(Clone, Copy, Debug)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, AmountError> {
        if den == 0 {
            return Err(AmountError::ZeroDenominator);
        }
        let g = gcd(num, den);
        Ok(Ratio {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn integer(n: u64) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub const fn numer(&self) -> u64 {
        self.num
    }

    pub const fn denom(&self) -> u64 {
        self.den
    }

    /// `floor(self × amount)`, or `None` if the result exceeds the Amount range.
    pub fn mul_floor(&self, amount: Amount) -> Option<Amount> {
        let scaled = u128::from(self.num) * u128::from(amount.millicoin()) / u128::from(self.den);
        u64::try_from(scaled).ok().map(Amount::from_millicoin)
    }

    /// Exact comparison of `self × a` against `other × b`.
    pub fn cmp_scaled(&self, a: Amount, other: &Ratio, b: Amount) -> Ordering {
        let lhs = u128::from(self.num) * u128::from(a.millicoin());
        let rhs = u128::from(other.num) * u128::from(b.millicoin());
        let (lq, lr) = (lhs / u128::from(self.den), lhs % u128::from(self.den));
        let (rq, rr) = (rhs / u128::from(other.den), rhs % u128::from(other.den));
        // remainders are below their denominators, so the cross products fit in u128
        lq.cmp(&rq)
            .then_with(|| (lr * u128::from(other.den)).cmp(&(rr * u128::from(self.den))))
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        // stored reduced
        self.num == other.num && self.den == other.den
    }
}

impl Eq for Ratio {}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = AmountError;

    /// Accepts `"3"`, `"0.25"` or `"2/3"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let invalid = || AmountError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num = parse_digits(n).ok_or_else(invalid)?;
            let den = parse_digits(d).ok_or_else(invalid)?;
            return Ratio::new(num, den);
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(invalid());
        }
        let whole_v = if whole.is_empty() { 0 } else { parse_digits(whole).ok_or_else(invalid)? };
        if frac.is_empty() {
            if s.ends_with('.') {
                return Err(invalid());
            }
            return Ok(Ratio::integer(whole_v));
        }
        let frac_v = parse_digits(frac).ok_or_else(invalid)?;
        let den = u32::try_from(frac.len())
            .ok()
            .and_then(|n| 10u64.checked_pow(n))
            .ok_or(AmountError::Overflow)?;
        let num = whole_v
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_v))
            .ok_or(AmountError::Overflow)?;
        Ratio::new(num, den)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Ok(Ratio::integer(n)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn parse_digits(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Converts a Worldcoin quantity to millicoin.
///
/// Fails with [`AmountError::NonRepresentable`] when the quantity is not a
/// whole number of millicoin.
pub fn worldcoin_to_millicoin(wc: Ratio) -> Result<Amount, AmountError> {
    let scaled = u128::from(wc.numer()) * u128::from(MILLICOIN_PER_WORLDCOIN);
    let den = u128::from(wc.denom());
    if scaled % den != 0 {
        return Err(AmountError::NonRepresentable(wc.to_string()));
    }
    u64::try_from(scaled / den)
        .map(Amount::from_millicoin)
        .map_err(|_| AmountError::Overflow)
}

/// Parses a decimal Worldcoin string with at most three fractional digits.
pub fn parse_worldcoin(s: &str) -> Result<Amount, AmountError> {
    let trimmed = s.trim();
    if let Some((_, frac)) = trimmed.split_once('.') {
        if frac.len() > 3 {
            return Err(AmountError::NonRepresentable(trimmed.to_string()));
        }
    }
    if trimmed.contains('/') {
        return Err(AmountError::Parse(trimmed.to_string()));
    }
    worldcoin_to_millicoin(trimmed.parse()?)
}
