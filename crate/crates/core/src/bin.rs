use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A bin on a half-unit grid: `HalfBin(k)` stands for the value `k / 2`.
///
/// Deviations and variances are bucketed to the nearest 0.5; keeping the
/// bucket as an integer count of half steps gives exact keys for maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfBin(pub i32);

impl HalfBin {
    pub const ZERO: HalfBin = HalfBin(0);

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn abs(self) -> HalfBin {
        HalfBin(self.0.abs())
    }

    /// Exact conversion from a value that is already a multiple of 0.5.
    pub fn from_value(v: f64) -> Option<HalfBin> {
        let twice = v * 2.0;
        if twice.is_finite() && twice.fract() == 0.0 && twice.abs() <= f64::from(i32::MAX) {
            Some(HalfBin(twice as i32))
        } else {
            None
        }
    }

    /// Nearest multiple of 0.5, ties away from zero.
    pub fn round_away(v: f64) -> HalfBin {
        HalfBin((v * 2.0).round() as i32)
    }

    /// Nearest multiple of 0.5, ties toward +infinity.
    pub fn round_up(v: f64) -> HalfBin {
        HalfBin((v * 2.0 + 0.5).floor() as i32)
    }

    /// Rounds the rational `num / den` (den > 0) to the nearest half step,
    /// ties away from zero. Exact for all inputs.
    pub fn round_ratio_away(num: i64, den: i64) -> HalfBin {
        debug_assert!(den > 0);
        let twice = 2 * num.unsigned_abs() as i128;
        let den = den as i128;
        let k = ((2 * twice + den) / (2 * den)) as i32;
        HalfBin(if num < 0 { -k } else { k })
    }

    /// Rounds the non-negative rational `num / den` (den > 0) to the nearest
    /// half step, ties upward. Exact for all inputs.
    pub fn round_ratio_up(num: i64, den: i64) -> HalfBin {
        debug_assert!(den > 0 && num >= 0);
        let (num, den) = (num as i128, den as i128);
        HalfBin(((4 * num + den).div_euclid(2 * den)) as i32)
    }
}

impl fmt::Display for HalfBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for HalfBin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfBin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        HalfBin::from_value(v).ok_or_else(|| serde::de::Error::custom(format!("{v} is not a multiple of 0.5")))
    }
}
