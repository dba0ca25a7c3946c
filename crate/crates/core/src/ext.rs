//! Extended real values for LP optima (suprema/infima can be infinite,
//! and JSON has no literal for infinities).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum ExtVal {
    #[serde(rename = "finite")]
    Finite(f64),
    #[serde(rename = "+inf")]
    PlusInf,
    #[serde(rename = "-inf")]
    MinusInf,
}

impl ExtVal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtVal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtVal::Finite(_))
    }

    /// Gap between two extended values: finite difference when both are
    /// finite, 0 when both are the same infinity, +inf otherwise.
    pub fn gap(self, other: ExtVal) -> f64 {
        match (self, other) {
            (ExtVal::Finite(a), ExtVal::Finite(b)) => (a - b).abs(),
            (ExtVal::PlusInf, ExtVal::PlusInf) | (ExtVal::MinusInf, ExtVal::MinusInf) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for ExtVal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtVal::Finite(v) => write!(f, "{v:.6e}"),
            ExtVal::PlusInf => write!(f, "+inf"),
            ExtVal::MinusInf => write!(f, "-inf"),
        }
    }
}
