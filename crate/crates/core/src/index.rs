//! Half-integer indices.
//!
//! Basis indices are integers on surfaces of even genus and half-odd
//! integers on surfaces of odd genus; `g0 = 3g/2` has the same shape.
//! Everything is stored as twice the value so that arithmetic stays exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// The integer value, if this is one.
    pub fn as_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Exact conversion from a float; `None` unless `x` is a multiple of 1/2.
    pub fn from_f64(x: f64) -> Option<Self> {
        let t = 2.0 * x;
        if t.is_finite() && t.fract() == 0.0 && t.abs() < 1e15 {
            Some(HalfInt(t as i64))
        } else {
            None
        }
    }

    /// Values in `[lo, hi]` stepping by one, starting at `lo`.
    pub fn range_inclusive(lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> {
        (0..)
            .map(move |i| HalfInt(lo.0 + 2 * i))
            .take_while(move |h| h.0 <= hi.0)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        HalfInt(-self.0)
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        HalfInt::from_int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            let sign = if self.0 < 0 { "-" } else { "" };
            write!(f, "{}{}.5", sign, self.0.abs() / 2)
        }
    }
}

impl FromStr for HalfInt {
    type Err = String;

    /// Accepts decimals (`-2`, `3.5`) and fractions (`7/2`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| format!("bad half-integer '{s}'"))?;
            return match den.trim() {
                "1" => Ok(HalfInt::from_int(num)),
                "2" => Ok(HalfInt(num)),
                _ => Err(format!("'{s}' is not a half-integer")),
            };
        }
        let x: f64 = s.parse().map_err(|_| format!("bad half-integer '{s}'"))?;
        HalfInt::from_f64(x).ok_or_else(|| format!("'{s}' is not a half-integer"))
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            serializer.serialize_i64(self.0 / 2)
        } else {
            serializer.serialize_f64(self.to_f64())
        }
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(deserializer)?;
        HalfInt::from_f64(x).ok_or_else(|| de::Error::custom(format!("{x} is not a half-integer")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        for twice in -9..=9 {
            let h = HalfInt::from_twice(twice);
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
        assert_eq!(HalfInt::from_twice(-1).to_string(), "-0.5");
        assert_eq!("7/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(7));
        assert!("0.25".parse::<HalfInt>().is_err());
    }

    #[test]
    fn ranges_step_by_one() {
        let v: Vec<_> =
            HalfInt::range_inclusive(HalfInt::from_twice(-3), HalfInt::from_twice(3)).collect();
        assert_eq!(v.iter().map(|h| h.twice()).collect::<Vec<_>>(), vec![-3, -1, 1, 3]);
    }
}
