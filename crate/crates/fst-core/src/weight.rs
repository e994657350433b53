//! Tropical semiring weight.

use std::cmp::Ordering;
use std::fmt;

/// Tropical semiring weight: `(R ∪ {+inf}, min, +, +inf, 0.0)`.
///
/// Values are costs in nats (negative natural-log probabilities).
/// `plus` = min selects the best alternative, `times` = addition accumulates
/// cost along a path, `zero` = +inf marks an impossible path, `one` = 0.0 is
/// the free transition.
#[derive(Clone, Copy)]
pub struct TropicalWeight(f64);

impl TropicalWeight {
    #[inline]
    pub const fn new(value: f64) -> Self {
        TropicalWeight(value)
    }

    /// Additive identity: +inf (unreachable).
    #[inline]
    pub const fn zero() -> Self {
        TropicalWeight(f64::INFINITY)
    }

    /// Multiplicative identity: 0.0 (free).
    #[inline]
    pub const fn one() -> Self {
        TropicalWeight(0.0)
    }

    #[inline]
    pub const fn value(self) -> f64 {
        self.0
    }

    /// Semiring addition: min.
    #[inline]
    pub fn plus(self, other: Self) -> Self {
        TropicalWeight(self.0.min(other.0))
    }

    /// Semiring multiplication: numeric addition.
    #[inline]
    pub fn times(self, other: Self) -> Self {
        TropicalWeight(self.0 + other.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::INFINITY
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == 0.0
    }

    /// Equality within `tol`, treating two infinities as equal.
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        if self.is_zero() && other.is_zero() {
            true
        } else if self.is_zero() || other.is_zero() {
            false
        } else {
            (self.0 - other.0).abs() <= tol
        }
    }
}

impl fmt::Debug for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "W(inf)")
        } else {
            write!(f, "W({})", self.0)
        }
    }
}

impl fmt::Display for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl PartialEq for TropicalWeight {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for TropicalWeight {}

impl PartialOrd for TropicalWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TropicalWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::hash::Hash for TropicalWeight {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl Default for TropicalWeight {
    fn default() -> Self {
        Self::one()
    }
}

impl From<f64> for TropicalWeight {
    fn from(v: f64) -> Self {
        TropicalWeight(v)
    }
}
