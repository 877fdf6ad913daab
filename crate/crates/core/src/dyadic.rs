//! Exact dyadic rationals `n / 2^e` in the unit interval.
//!
//! Every exact cell entropy has this form with `e = #positions - 1`, so
//! engines can compare results with exact equality instead of float
//! tolerances.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A non-negative dyadic rational `numerator / 2^exponent`, at most one.
///
/// Values are kept in canonical form: the numerator is odd or zero, and a
/// zero numerator forces a zero exponent. Equality and ordering are
/// therefore plain field comparisons plus cross-scaling.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DyadicValue {
    numerator: BigUint,
    exponent: u64,
}

impl DyadicValue {
    /// Builds `numerator / 2^exponent` and reduces it to canonical form.
    ///
    /// Panics if the value exceeds one; engine counts can never do that.
    pub fn new(numerator: BigUint, exponent: u64) -> Self {
        assert!(
            numerator.bits() <= exponent + 1 && numerator <= (BigUint::one() << exponent),
            "dyadic value {numerator}/2^{exponent} exceeds one",
        );
        let mut value = DyadicValue {
            numerator,
            exponent,
        };
        value.reduce();
        value
    }

    /// Convenience constructor for small ratios such as `7/2^3`.
    pub fn from_ratio(numerator: u64, exponent: u64) -> Self {
        DyadicValue::new(BigUint::from(numerator), exponent)
    }

    pub fn zero() -> Self {
        DyadicValue {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        DyadicValue {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }

    fn reduce(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let shift = self.numerator.trailing_zeros().unwrap_or(0).min(self.exponent);
        if shift > 0 {
            self.numerator >>= shift;
            self.exponent -= shift;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0 && self.numerator.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Nearest `f64`. Exponents beyond the float range underflow to zero,
    /// which is the correct rounding for values that small.
    pub fn to_f64(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        // Keep the top 53 bits of the numerator so the conversion to f64 is
        // exact, then scale by the remaining power of two.
        let drop = bits.saturating_sub(53);
        let mantissa = (&self.numerator >> drop)
            .to_u64()
            .expect("53-bit mantissa fits in u64");
        let scale = drop as i64 - self.exponent as i64;
        if scale >= 0 {
            mantissa as f64 * 2f64.powi(scale.min(i32::MAX as i64) as i32)
        } else {
            mantissa as f64 * 2f64.powi(scale.max(i32::MIN as i64) as i32)
        }
    }
}

impl PartialOrd for DyadicValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare a/2^e and b/2^f by cross-scaling to the common exponent.
        let common = self.exponent.max(other.exponent);
        let lhs = &self.numerator << (common - self.exponent);
        let rhs = &other.numerator << (common - other.exponent);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for DyadicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    numerator: String,
    exponent: u64,
}

impl Serialize for DyadicValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr {
            numerator: self.numerator.to_string(),
            exponent: self.exponent,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DyadicRepr::deserialize(deserializer)?;
        let numerator = repr
            .numerator
            .parse::<BigUint>()
            .map_err(serde::de::Error::custom)?;
        if numerator.bits() > repr.exponent + 1 || numerator > (BigUint::one() << repr.exponent) {
            return Err(serde::de::Error::custom("dyadic value exceeds one"));
        }
        Ok(DyadicValue::new(numerator, repr.exponent))
    }
}
