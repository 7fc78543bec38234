//! Scalar values carried by gates and trace variables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A boolean or integer scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            Value::Bool(_) => None,
        }
    }

    pub fn is_bool(self) -> bool {
        matches!(self, Value::Bool(_))
    }

    /// Boolean negation; integers are returned unchanged.
    pub fn negate(self) -> Value {
        match self {
            Value::Bool(b) => Value::Bool(!b),
            v => v,
        }
    }

    /// Parses the textual forms used by NuSMV traces: `TRUE`, `FALSE`, integers.
    pub fn parse_smv(s: &str) -> Option<Value> {
        match s {
            "TRUE" => Some(Value::Bool(true)),
            "FALSE" => Some(Value::Bool(false)),
            _ => s.parse::<i64>().ok().map(Value::Int),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

/// The declared type of a gate or variable.
///
/// Integers are always bounded by an inclusive range, mirroring `lo..hi`
/// declarations in the model language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Bool,
    Int { lo: i64, hi: i64 },
}

impl ValueKind {
    pub fn int(lo: i64, hi: i64) -> Self {
        ValueKind::Int { lo, hi }
    }

    pub fn is_bool(self) -> bool {
        matches!(self, ValueKind::Bool)
    }

    pub fn is_int(self) -> bool {
        matches!(self, ValueKind::Int { .. })
    }

    /// True when both kinds are boolean or both are integer, regardless of range.
    pub fn same_sort(self, other: ValueKind) -> bool {
        self.is_bool() == other.is_bool()
    }

    pub fn contains(self, v: Value) -> bool {
        match (self, v) {
            (ValueKind::Bool, Value::Bool(_)) => true,
            (ValueKind::Int { lo, hi }, Value::Int(i)) => lo <= i && i <= hi,
            _ => false,
        }
    }

    /// Whether `v` has this kind's sort (range not checked).
    pub fn admits_sort(self, v: Value) -> bool {
        self.is_bool() == v.is_bool()
    }

    /// The value used where a kind needs an arbitrary inhabitant (delay defaults).
    pub fn default_value(self) -> Value {
        match self {
            ValueKind::Bool => Value::Bool(false),
            ValueKind::Int { lo, .. } => Value::Int(lo),
        }
    }

    /// Number of inhabitants, saturating.
    pub fn domain_size(self) -> u64 {
        match self {
            ValueKind::Bool => 2,
            ValueKind::Int { lo, hi } => {
                if hi < lo {
                    0
                } else {
                    (hi as i128 - lo as i128 + 1).min(u64::MAX as i128) as u64
                }
            }
        }
    }

    /// All inhabitants in ascending order.
    pub fn domain(self) -> Box<dyn Iterator<Item = Value>> {
        match self {
            ValueKind::Bool => Box::new([false, true].into_iter().map(Value::Bool)),
            ValueKind::Int { lo, hi } => Box::new((lo..=hi).map(Value::Int)),
        }
    }

    /// Smallest kind containing both (same sort required).
    pub fn hull(self, other: ValueKind) -> Option<ValueKind> {
        match (self, other) {
            (ValueKind::Bool, ValueKind::Bool) => Some(ValueKind::Bool),
            (ValueKind::Int { lo: a, hi: b }, ValueKind::Int { lo: c, hi: d }) => {
                Some(ValueKind::Int { lo: a.min(c), hi: b.max(d) })
            }
            _ => None,
        }
    }

    pub fn of_value(v: Value) -> ValueKind {
        match v {
            Value::Bool(_) => ValueKind::Bool,
            Value::Int(i) => ValueKind::Int { lo: i, hi: i },
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Bool => f.write_str("boolean"),
            ValueKind::Int { lo, hi } => write!(f, "{lo}..{hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid value kind `{0}` (expected `boolean` or `lo..hi`)")]
pub struct ParseKindError(pub String);

impl FromStr for ValueKind {
    type Err = ParseKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "boolean" {
            return Ok(ValueKind::Bool);
        }
        let (lo, hi) = s.split_once("..").ok_or_else(|| ParseKindError(s.to_string()))?;
        let lo = lo.trim().parse().map_err(|_| ParseKindError(s.to_string()))?;
        let hi = hi.trim().parse().map_err(|_| ParseKindError(s.to_string()))?;
        if lo > hi {
            return Err(ParseKindError(s.to_string()));
        }
        Ok(ValueKind::Int { lo, hi })
    }
}

impl Serialize for ValueKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_roundtrip_text() {
        for k in [ValueKind::Bool, ValueKind::int(0, 100), ValueKind::int(-3, 3)] {
            assert_eq!(k.to_string().parse::<ValueKind>().unwrap(), k);
        }
        assert!("5..1".parse::<ValueKind>().is_err());
        assert!("int".parse::<ValueKind>().is_err());
    }

    #[test]
    fn contains_checks_range_and_sort() {
        let k = ValueKind::int(0, 3);
        assert!(k.contains(Value::Int(3)));
        assert!(!k.contains(Value::Int(4)));
        assert!(!k.contains(Value::Bool(true)));
        assert_eq!(k.domain().count(), 4);
    }

    #[test]
    fn value_json_is_untagged() {
        assert_eq!(serde_json::to_string(&Value::Bool(true)).unwrap(), "true");
        assert_eq!(serde_json::to_string(&Value::Int(-2)).unwrap(), "-2");
        assert_eq!(serde_json::from_str::<Value>("7").unwrap(), Value::Int(7));
    }
}
