// Copyright 2026 The fenchelkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `R ∪ {+∞}`.
///
/// `+∞` is an explicit token, never a large float. `-∞` and NaN are not
/// representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a finite float. Panics on NaN or infinities.
    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite(), "ExtReal::finite called with {v}");
        ExtReal::Finite(v)
    }

    /// Maps `+inf` to [`ExtReal::PosInf`]; rejects NaN and `-inf`.
    pub fn from_f64(v: f64) -> Option<Self> {
        if v.is_finite() {
            Some(ExtReal::Finite(v))
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy conversion, `+∞` becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::finite(v)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a + rhs),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl Sub<f64> for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: f64) -> ExtReal {
        self + (-rhs)
    }
}

/// Negation is only defined on finite values; it exists so that
/// `-(finite)` reads naturally in formulas. Panics on `+∞`.
impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(-a),
            ExtReal::PosInf => panic!("cannot negate +inf"),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"+inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::from_f64(v).ok_or_else(|| E::custom(format!("{v} is not a valid value")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "+inf" | "inf" | "+infinity" | "infinity" => Ok(ExtReal::PosInf),
                    other => Err(E::custom(format!("unknown extended real token {other:?}"))),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_last() {
        let a = ExtReal::finite(1e300);
        assert!(a < ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.min(a), a);
        assert_eq!(a.max(ExtReal::PosInf), ExtReal::PosInf);
    }

    #[test]
    fn arithmetic_absorbs_infinity() {
        assert_eq!(ExtReal::PosInf + 3.0, ExtReal::PosInf);
        assert_eq!(ExtReal::finite(1.0) + ExtReal::finite(2.0), ExtReal::finite(3.0));
        assert_eq!(ExtReal::finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
    }

    #[test]
    fn rejects_nan_and_negative_infinity() {
        assert!(ExtReal::from_f64(f64::NAN).is_none());
        assert!(ExtReal::from_f64(f64::NEG_INFINITY).is_none());
        assert_eq!(ExtReal::from_f64(f64::INFINITY), Some(ExtReal::PosInf));
    }
}
