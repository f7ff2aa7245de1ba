//! Edit-cost arithmetic with an explicit infeasibility sentinel.
//!
//! Costs are non-negative reals extended with [`Cost::Infinite`], which marks
//! edits that cannot be realized (e.g. substitutions across disconnected
//! taxonomy components). The sentinel is a distinct variant rather than a
//! large float so an infeasible edit can never win a minimum.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

/// A non-negative edit cost, or the infeasibility sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    /// A finite, non-negative cost.
    Finite(f64),
    /// No finite-cost edit exists.
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0.0);

    /// Wrap a finite value. Panics on negative, NaN, or infinite input;
    /// those can only arise from internal bugs, never from user data.
    pub fn finite(value: f64) -> Cost {
        assert!(
            value.is_finite() && value >= 0.0,
            "cost must be finite and non-negative, got {value}"
        );
        Cost::Finite(value)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Cost::Infinite)
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    /// The finite value; panics on the sentinel.
    pub fn expect_finite(self) -> f64 {
        self.value().expect("cost is infinite")
    }

    /// Multiply a finite cost by a non-negative factor; infinity absorbs.
    pub fn scale(self, factor: f64) -> Cost {
        assert!(factor.is_finite() && factor >= 0.0);
        match self {
            Cost::Finite(v) => Cost::Finite(v * factor),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.total_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        *self = *self + rhs;
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

// JSON has no infinity literal, so the sentinel serializes as the string
// "inf" and finite costs as plain numbers.
impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cost::Finite(v) => serializer.serialize_f64(*v),
            Cost::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CostVisitor;

        impl Visitor<'_> for CostVisitor {
            type Value = Cost;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cost, E> {
                if v.is_finite() && v >= 0.0 {
                    Ok(Cost::Finite(v))
                } else {
                    Err(E::custom(format!("invalid cost {v}")))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cost, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cost, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Cost, E> {
                if s == "inf" {
                    Ok(Cost::Infinite)
                } else {
                    Err(E::custom(format!("invalid cost string {s:?}")))
                }
            }
        }

        deserializer.deserialize_any(CostVisitor)
    }
}
