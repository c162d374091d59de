//! Truncated Laurent series with complex coefficients.
//!
//! A series stores the coefficients of `z^k` for `min_exp <= k < trunc`.
//! Exponents at or above `trunc` are unknown, and every operation reports the
//! tightest window it can vouch for instead of padding with zeros. Asking for
//! a coefficient outside the window is an error, never a silent zero.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{KnError, Result};
use crate::numfmt::Float17;
use crate::qcalc;

/// Default verification tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-9;

/// Magnitude below which a complex value counts as zero in verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(abs_tol: f64) -> Result<Self> {
        if abs_tol > 0.0 && abs_tol.is_finite() {
            Ok(Tolerance(abs_tol))
        } else {
            Err(KnError::Config(format!("tolerance must be positive, got {abs_tol}")))
        }
    }

    pub fn abs(self) -> f64 {
        self.0
    }

    pub fn is_zero(self, z: Complex64) -> bool {
        z.norm() < self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_ABS_TOL)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    min_exp: i64,
    trunc: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentSeries {
    /// Series with `coeffs[i]` the coefficient of `z^(min_exp + i)`; known up to
    /// (excluding) `min_exp + coeffs.len()`.
    pub fn new(min_exp: i64, coeffs: Vec<Complex64>) -> Self {
        let trunc = min_exp + coeffs.len() as i64;
        LaurentSeries { min_exp, trunc, coeffs }
    }

    pub fn from_real(min_exp: i64, coeffs: &[f64]) -> Self {
        Self::new(min_exp, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Identically zero on the window `[min_exp, trunc)`.
    pub fn zero(min_exp: i64, trunc: i64) -> Self {
        let trunc = trunc.max(min_exp);
        LaurentSeries { min_exp, trunc, coeffs: vec![Complex64::new(0.0, 0.0); (trunc - min_exp) as usize] }
    }

    /// `c * z^k`, known exactly up to `trunc`.
    pub fn monomial(k: i64, c: Complex64, trunc: i64) -> Self {
        let mut s = Self::zero(k, trunc.max(k + 1));
        s.coeffs[0] = c;
        s
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn in_window(&self, k: i64) -> bool {
        self.min_exp <= k && k < self.trunc
    }

    pub fn coefficient(&self, k: i64) -> Result<Complex64> {
        if self.in_window(k) {
            Ok(self.coeffs[(k - self.min_exp) as usize])
        } else {
            Err(KnError::OutOfWindow { exp: k, min_exp: self.min_exp, trunc: self.trunc })
        }
    }

    /// Coefficient of `z^-1`; the value of `(1/2πi)∮ f dz` around the origin.
    pub fn residue(&self) -> Result<Complex64> {
        if self.min_exp > -1 && self.trunc > -1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.coefficient(-1)
    }

    // Known-zero below the window; caller guarantees k < trunc.
    fn get_or_zero(&self, k: i64) -> Complex64 {
        if k < self.min_exp {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.min_exp) as usize]
        }
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &LaurentSeries, op: impl Fn(Complex64, Complex64) -> Complex64) -> LaurentSeries {
        let min_exp = self.min_exp.min(other.min_exp);
        let trunc = self.trunc.min(other.trunc);
        let coeffs = (min_exp..trunc).map(|k| op(self.get_or_zero(k), other.get_or_zero(k))).collect();
        LaurentSeries { min_exp, trunc, coeffs }
    }

    pub fn scale(&self, c: Complex64) -> LaurentSeries {
        LaurentSeries { coeffs: self.coeffs.iter().map(|&x| x * c).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> LaurentSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Cauchy product.
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        let min_exp = self.min_exp + other.min_exp;
        let trunc = (self.trunc + other.min_exp).min(other.trunc + self.min_exp);
        let n = (trunc - min_exp) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] += a * b;
            }
        }
        LaurentSeries { min_exp, trunc, coeffs }
    }

    /// Multiply by `z^k`; an exact exponent shift.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries { min_exp: self.min_exp + k, trunc: self.trunc + k, coeffs: self.coeffs.clone() }
    }

    /// `f(z) -> f(λz)`: the coefficient of `z^k` picks up `λ^k`.
    pub fn scale_arg(&self, lambda: Complex64) -> Result<LaurentSeries> {
        if lambda == Complex64::new(0.0, 0.0) || !lambda.is_finite() {
            return Err(KnError::ZeroScale);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * lambda.powi((self.min_exp + i as i64) as i32))
            .collect();
        Ok(LaurentSeries { coeffs, ..self.clone() })
    }

    pub fn derivative(&self) -> LaurentSeries {
        self.map_down(|k| k as f64)
    }

    /// Symmetric q-difference `(f(qz) - f(z/q)) / (z (q - 1/q))`, which sends
    /// `z^k` to `[k]_q z^(k-1)`.
    pub fn q_derivative(&self, q_eff: f64) -> Result<LaurentSeries> {
        if !(q_eff > 0.0) || q_eff == 1.0 || !q_eff.is_finite() {
            return Err(KnError::InvalidQDerivative(q_eff));
        }
        Ok(self.q_derivative_log(q_eff.ln()))
    }

    /// q-derivative with `ln q_eff` given directly (nonzero).
    pub(crate) fn q_derivative_log(&self, h: f64) -> LaurentSeries {
        self.map_down(|k| qcalc::bracket_from_log(k as f64, h))
    }

    // z^k -> w(k) z^(k-1); the window moves down by one.
    fn map_down(&self, weight: impl Fn(i64) -> f64) -> LaurentSeries {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(i, &c)| c * weight(self.min_exp + i as i64)).collect();
        LaurentSeries { min_exp: self.min_exp - 1, trunc: self.trunc - 1, coeffs }
    }

    /// Sum of the known terms at `z`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * z.powi((self.min_exp + i as i64) as i32))
            .sum()
    }

    /// Restrict the window to `[min_exp, trunc)` with `trunc` no larger than the current one.
    pub fn truncated(&self, trunc: i64) -> LaurentSeries {
        let trunc = trunc.clamp(self.min_exp, self.trunc);
        LaurentSeries {
            min_exp: self.min_exp,
            trunc,
            coeffs: self.coeffs[..(trunc - self.min_exp) as usize].to_vec(),
        }
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})·z^{}", self.min_exp + i as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.trunc)
    }
}

/// Sample count used when the caller does not choose one: four per coefficient.
pub fn default_samples(count: usize) -> usize {
    4 * count.max(1)
}

/// Laurent coefficients of `f` about `center` on the window `[min_exp, trunc)`,
/// from the trapezoidal rule on the circle `|z - center| = radius`.
///
/// Spectrally accurate when `f` is analytic on a neighbourhood of the circle.
pub fn series_from_samples<F>(
    f: F,
    center: Complex64,
    radius: f64,
    min_exp: i64,
    trunc: i64,
    n_samples: usize,
) -> Result<LaurentSeries>
where
    F: Fn(Complex64) -> Complex64,
{
    let count = (trunc - min_exp).max(0) as usize;
    let needed = 2 * count;
    if n_samples < needed || n_samples == 0 {
        return Err(KnError::TooFewSamples { needed: needed.max(1), count, got: n_samples });
    }
    let n = n_samples;
    let roots: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
    let mut samples = Vec::with_capacity(n);
    for w in &roots {
        let z = center + w * radius;
        let v = f(z);
        if !v.is_finite() {
            return Err(KnError::SingularityOnCircle { re: z.re, im: z.im });
        }
        samples.push(v);
    }
    let coeffs = (min_exp..trunc)
        .map(|k| {
            // w_j^{-k} = roots[(-j k) mod n]
            let kk = k.rem_euclid(n as i64) as usize;
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &v)| v * roots[(n - (j * kk) % n) % n])
                .sum();
            sum / n as f64 * radius.powi(-(k as i32))
        })
        .collect();
    Ok(LaurentSeries { min_exp, trunc, coeffs })
}

// JSON form: {"minExp": .., "truncOrder": .., "coeffs": [[re, im], ..]}

#[derive(Serialize)]
struct SeriesOut {
    #[serde(rename = "minExp")]
    min_exp: i64,
    #[serde(rename = "truncOrder")]
    trunc: i64,
    coeffs: Vec<[Float17; 2]>,
}

#[derive(Deserialize)]
struct SeriesIn {
    #[serde(rename = "minExp")]
    min_exp: i64,
    #[serde(rename = "truncOrder")]
    trunc: i64,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesOut {
            min_exp: self.min_exp,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| [Float17(c.re), Float17(c.im)]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesIn::deserialize(deserializer)?;
        if raw.trunc < raw.min_exp || (raw.trunc - raw.min_exp) as usize != raw.coeffs.len() {
            return Err(de::Error::custom(format!(
                "series window [{}, {}) does not match {} coefficients",
                raw.min_exp,
                raw.trunc,
                raw.coeffs.len()
            )));
        }
        Ok(LaurentSeries::new(raw.min_exp, raw.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}
