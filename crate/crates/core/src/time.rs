//! Integer-nanosecond time.
//!
//! All timestamps and durations are signed 64-bit nanosecond counts. Integer
//! time keeps event ordering exact and logs bit-identical across platforms.
//! Values derived from floating point (rate samples, jitter factors) are
//! rounded half-up onto the nanosecond grid at the point of conversion.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A point in time or a duration, in nanoseconds. Differences (lateness) may
/// be negative.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Nanos(pub i64);

impl Nanos {
    pub const ZERO: Nanos = Nanos(0);

    pub const fn from_ns(ns: i64) -> Self {
        Nanos(ns)
    }

    pub const fn from_micros(us: i64) -> Self {
        Nanos(us * 1_000)
    }

    pub const fn from_millis(ms: i64) -> Self {
        Nanos(ms * 1_000_000)
    }

    pub const fn from_secs(s: i64) -> Self {
        Nanos(s * 1_000_000_000)
    }

    pub const fn as_ns(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn max(self, other: Nanos) -> Nanos {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Nanos) -> Nanos {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }
}

impl Add for Nanos {
    type Output = Nanos;
    fn add(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 + rhs.0)
    }
}

impl Sub for Nanos {
    type Output = Nanos;
    fn sub(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 - rhs.0)
    }
}

impl AddAssign for Nanos {
    fn add_assign(&mut self, rhs: Nanos) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Nanos {
    fn sub_assign(&mut self, rhs: Nanos) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for Nanos {
    type Output = Nanos;
    fn mul(self, rhs: i64) -> Nanos {
        Nanos(self.0 * rhs)
    }
}

impl Neg for Nanos {
    type Output = Nanos;
    fn neg(self) -> Nanos {
        Nanos(-self.0)
    }
}

impl fmt::Display for Nanos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// Round half-up to the nearest integer. Ties (x.5) go toward +inf, so 0.5
/// rounds to 1. Callers only pass nonnegative values in practice.
pub fn round_half_up(x: f64) -> i64 {
    libm::floor(x + 0.5) as i64
}

/// Convert a duration in seconds to integer nanoseconds, rounding half-up.
pub fn secs_to_nanos(secs: f64) -> Nanos {
    Nanos(round_half_up(secs * 1e9))
}

/// Scale a duration by a float factor, rounding half-up.
pub fn scale_nanos(t: Nanos, factor: f64) -> Nanos {
    Nanos(round_half_up(t.0 as f64 * factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_agree() {
        assert_eq!(Nanos::from_micros(3), Nanos(3_000));
        assert_eq!(Nanos::from_millis(2), Nanos(2_000_000));
        assert_eq!(Nanos::from_secs(1), Nanos(1_000_000_000));
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(2.4), 2);
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.6), 3);
        assert_eq!(round_half_up(0.0), 0);
        assert_eq!(secs_to_nanos(220.5e-9), Nanos(221));
        assert_eq!(secs_to_nanos(1.0), Nanos::from_secs(1));
    }

    #[test]
    fn arithmetic_and_ordering() {
        let a = Nanos(100);
        let b = Nanos(40);
        assert_eq!(a + b, Nanos(140));
        assert_eq!(b - a, Nanos(-60));
        assert!(b < a);
        assert_eq!(a.max(b), a);
        assert_eq!(a.min(b), b);
        assert_eq!(scale_nanos(Nanos(10), 1.25), Nanos(13));
    }
}
