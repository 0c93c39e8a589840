// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A last passage value: a number, or minus infinity when no admissible
/// (disjoint) path tuple exists.
///
/// Ordering puts `NegInfinity` below every finite value.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum LppValue<T> {
    NegInfinity,
    Finite(T),
}

impl<T: Copy> LppValue<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            LppValue::Finite(v) => Some(v),
            LppValue::NegInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, LppValue::Finite(_))
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, LppValue::NegInfinity)
    }

    /// The finite value; panics on minus infinity.
    pub fn unwrap(self) -> T {
        self.finite().expect("last passage value is minus infinity")
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> LppValue<U> {
        match self {
            LppValue::Finite(v) => LppValue::Finite(f(v)),
            LppValue::NegInfinity => LppValue::NegInfinity,
        }
    }
}

impl<T: Copy + std::ops::Add<Output = T>> LppValue<T> {
    /// `(-inf) + x = -inf`.
    pub fn plus(self, other: LppValue<T>) -> LppValue<T> {
        match (self, other) {
            (LppValue::Finite(a), LppValue::Finite(b)) => LppValue::Finite(a + b),
            _ => LppValue::NegInfinity,
        }
    }
}

impl<T: Copy + PartialOrd> LppValue<T> {
    /// `max(-inf, x) = x`.
    pub fn max(self, other: LppValue<T>) -> LppValue<T> {
        match (self, other) {
            (LppValue::Finite(a), LppValue::Finite(b)) => {
                LppValue::Finite(if b > a { b } else { a })
            }
            (LppValue::NegInfinity, x) | (x, LppValue::NegInfinity) => x,
        }
    }
}

impl<T: Float> LppValue<T> {
    /// Maps the float `-inf` to `NegInfinity`.
    pub fn from_float(x: T) -> Self {
        if x == T::neg_infinity() {
            LppValue::NegInfinity
        } else {
            LppValue::Finite(x)
        }
    }

    pub fn to_float(self) -> T {
        match self {
            LppValue::Finite(v) => v,
            LppValue::NegInfinity => T::neg_infinity(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for LppValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LppValue::Finite(v) => v.fmt(f),
            LppValue::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl<T: Serialize> Serialize for LppValue<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LppValue::Finite(v) => v.serialize(s),
            LppValue::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for LppValue<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Finite(T),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Finite(v) => Ok(LppValue::Finite(v)),
            Repr::Tag(s) if s == "-inf" => Ok(LppValue::NegInfinity),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"-inf\", got {s:?}"
            ))),
        }
    }
}
