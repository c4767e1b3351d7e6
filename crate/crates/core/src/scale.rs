use core::fmt;
use core::ops::Add;

/// A distance or entourage size in `ℕ ∪ {∞}`.
///
/// The derived order puts every finite value below [`Scale::Infinite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scale {
    Finite(u64),
    Infinite,
}

impl Scale {
    pub const ZERO: Scale = Scale::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Scale::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Scale::Finite(n) => Some(n),
            Scale::Infinite => None,
        }
    }

    /// Multiplication by a natural number; `0 · ∞ = 0`.
    pub fn times(self, k: u64) -> Scale {
        match self {
            Scale::Finite(n) => n.checked_mul(k).map_or(Scale::Infinite, Scale::Finite),
            Scale::Infinite if k == 0 => Scale::ZERO,
            Scale::Infinite => Scale::Infinite,
        }
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::ZERO
    }
}

impl From<u64> for Scale {
    fn from(n: u64) -> Self {
        Scale::Finite(n)
    }
}

impl Add for Scale {
    type Output = Scale;

    fn add(self, rhs: Scale) -> Scale {
        match (self, rhs) {
            (Scale::Finite(a), Scale::Finite(b)) => {
                a.checked_add(b).map_or(Scale::Infinite, Scale::Finite)
            }
            _ => Scale::Infinite,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Finite(n) => write!(f, "{n}"),
            Scale::Infinite => f.write_str("inf"),
        }
    }
}
