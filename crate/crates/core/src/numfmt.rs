//! Fixed float formatting for reproducible output files.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Seventeen significant digits in scientific notation; round-trips every f64.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// An `f64` that serializes (through serde_json) as a 17-significant-digit literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float17(pub f64);

impl Serialize for Float17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("cannot serialize non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format_f64(self.0)).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}
