use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An end point of a discrete interval: an integer or an infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    NegInf,
    Finite(i64),
    PosInf,
}

impl Bound {
    pub fn finite(self) -> Option<i64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn key(self) -> (i8, i64) {
        match self {
            Bound::NegInf => (-1, 0),
            Bound::Finite(v) => (0, v),
            Bound::PosInf => (1, 0),
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::PosInf => f.write_str("+inf"),
        }
    }
}

/// A discrete interval `[lower, upper]` of at least two integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Support {
    lower: Bound,
    upper: Bound,
}

impl Support {
    pub fn new(lower: Bound, upper: Bound) -> Result<Self> {
        let degenerate = || Error::DegenerateSupport {
            lower: lower.to_string(),
            upper: upper.to_string(),
        };
        match (lower, upper) {
            (Bound::PosInf, _) | (_, Bound::NegInf) => Err(degenerate()),
            (Bound::Finite(a), Bound::Finite(b)) if a >= b => Err(degenerate()),
            _ => Ok(Support { lower, upper }),
        }
    }

    pub fn finite(lower: i64, upper: i64) -> Result<Self> {
        Self::new(Bound::Finite(lower), Bound::Finite(upper))
    }

    pub fn lower(&self) -> Bound {
        self.lower
    }

    pub fn upper(&self) -> Bound {
        self.upper
    }

    pub fn contains(&self, x: i64) -> bool {
        Bound::Finite(x) >= self.lower && Bound::Finite(x) <= self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.finite().is_some() && self.upper.finite().is_some()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Support) -> bool {
        self.lower >= other.lower && self.upper <= other.upper
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open_l = if self.lower == Bound::NegInf { "(" } else { "[" };
        let open_r = if self.upper == Bound::PosInf { ")" } else { "]" };
        write!(f, "{open_l}{}, {}{open_r}", self.lower, self.upper)
    }
}
