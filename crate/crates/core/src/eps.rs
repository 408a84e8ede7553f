//! Exact distance values of the form `base + coeff·ε`, where `base` is an
//! arbitrary-precision rational and `ε` is a fixed positive infinitesimal.
//!
//! The infinitesimal is symbolic: comparisons are lexicographic on
//! `(base, coeff)`, which is exactly the order obtained by substituting any
//! sufficiently small positive real for `ε`. Gadget constructions that need
//! "`ε` arbitrarily small" therefore hold with no magnitude tuning at all.
//!
//! Values are closed under addition, subtraction and negation; that is all
//! the solvers need. There is deliberately no multiplication.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

/// An exact value `base + coeff·ε` with a total, tie-free order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EpsValue {
    base: BigRational,
    coeff: BigInt,
}

impl EpsValue {
    pub fn new(base: BigRational, coeff: BigInt) -> Self {
        EpsValue { base, coeff }
    }

    /// Purely real value with no infinitesimal component.
    pub fn from_rational(base: BigRational) -> Self {
        EpsValue::new(base, BigInt::zero())
    }

    pub fn from_integer(value: i64) -> Self {
        EpsValue::from_rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_bigint(value: BigInt) -> Self {
        EpsValue::from_rational(BigRational::from_integer(value))
    }

    pub fn zero() -> Self {
        EpsValue::from_integer(0)
    }

    /// The infinitesimal unit ε itself.
    pub fn epsilon() -> Self {
        EpsValue::new(BigRational::zero(), BigInt::from(1))
    }

    /// `value + count·ε`.
    pub fn with_eps(base: BigRational, count: i64) -> Self {
        EpsValue::new(base, BigInt::from(count))
    }

    pub fn base(&self) -> &BigRational {
        &self.base
    }

    pub fn eps_coeff(&self) -> &BigInt {
        &self.coeff
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.coeff.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        *self > EpsValue::zero()
    }

    /// True when the value carries no ε component.
    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn abs(&self) -> Self {
        if *self < EpsValue::zero() {
            -self
        } else {
            self.clone()
        }
    }
}

impl Ord for EpsValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // ε is infinitesimal: the real part always dominates. Ratios are
        // canonical, so equal denominators reduce to one integer comparison;
        // the general Ratio ordering divides and allocates, which the sort
        // paths of the solvers cannot afford.
        let base = if self.base.denom() == other.base.denom() {
            self.base.numer().cmp(other.base.numer())
        } else {
            self.base.cmp(&other.base)
        };
        base.then_with(|| self.coeff.cmp(&other.coeff))
    }
}

impl PartialOrd for EpsValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &EpsValue {
    type Output = EpsValue;
    fn add(self, rhs: &EpsValue) -> EpsValue {
        EpsValue::new(&self.base + &rhs.base, &self.coeff + &rhs.coeff)
    }
}

impl Add for EpsValue {
    type Output = EpsValue;
    fn add(self, rhs: EpsValue) -> EpsValue {
        &self + &rhs
    }
}

impl Sub for &EpsValue {
    type Output = EpsValue;
    fn sub(self, rhs: &EpsValue) -> EpsValue {
        EpsValue::new(&self.base - &rhs.base, &self.coeff - &rhs.coeff)
    }
}

impl Sub for EpsValue {
    type Output = EpsValue;
    fn sub(self, rhs: EpsValue) -> EpsValue {
        &self - &rhs
    }
}

impl Neg for &EpsValue {
    type Output = EpsValue;
    fn neg(self) -> EpsValue {
        EpsValue::new(-&self.base, -&self.coeff)
    }
}

impl Neg for EpsValue {
    type Output = EpsValue;
    fn neg(self) -> EpsValue {
        -&self
    }
}

impl fmt::Display for EpsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.is_zero() {
            write!(f, "{}", self.base)
        } else if self.base.is_zero() {
            write!(f, "{}eps", self.coeff)
        } else if self.coeff.is_negative() {
            write!(f, "{}{}eps", self.base, self.coeff)
        } else {
            write!(f, "{}+{}eps", self.base, self.coeff)
        }
    }
}

impl fmt::Debug for EpsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders the rational part in the canonical `<num>/<den>` wire form.
pub fn rational_to_string(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `<num>/<den>` or a bare integer.
pub fn rational_from_str(text: &str) -> Result<BigRational, String> {
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let numer = BigInt::from_str(numer.trim()).map_err(|e| format!("bad numerator: {e}"))?;
    let denom = BigInt::from_str(denom.trim()).map_err(|e| format!("bad denominator: {e}"))?;
    if denom.is_zero() {
        return Err("zero denominator".to_owned());
    }
    Ok(BigRational::new(numer, denom))
}

#[derive(Serialize, Deserialize)]
struct EpsValueWire {
    base: String,
    eps: String,
}

impl Serialize for EpsValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EpsValueWire {
            base: rational_to_string(&self.base),
            eps: self.coeff.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EpsValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = EpsValueWire::deserialize(deserializer)?;
        let base = rational_from_str(&wire.base).map_err(D::Error::custom)?;
        let coeff = BigInt::from_str(wire.eps.trim()).map_err(D::Error::custom)?;
        Ok(EpsValue::new(base, coeff))
    }
}
