//! Extended reals for values that may legitimately be `+∞`
//! (conjugates outside their domain, divergent series, infima over empty sets).

use std::fmt;

use serde::{Serialize, Serializer};

/// A value in `ℝ ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Panics on `+∞`; for tests and places where finiteness is established.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("ExtReal::unwrap on +inf")
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInfinity
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInfinity => serializer.serialize_str("+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_infinity_as_string() {
        assert_eq!(serde_json::to_string(&ExtReal::PosInfinity).unwrap(), "\"+inf\"");
        assert_eq!(serde_json::to_string(&ExtReal::Finite(-1.5)).unwrap(), "-1.5");
        assert_eq!(ExtReal::from(f64::INFINITY), ExtReal::PosInfinity);
    }
}
