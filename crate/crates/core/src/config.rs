//! Run configuration: JSON config files, flag overrides, validation, and the
//! basis family a run works on.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{de, Deserialize, Deserializer};

use crate::basis::{build_family, index_parity_ok, load_basis_file, BasisFamily, IndexSet, SurfaceSpec};
use crate::elliptic::Lattice;
use crate::error::{KnError, Result};
use crate::index::HalfInt;
use crate::qcalc::DeformationParams;
use crate::series::Tolerance;

pub const DEFAULT_TAU: Complex64 = Complex64::new(0.5, 0.8);
pub const DEFAULT_Z0: Complex64 = Complex64::new(0.17, 0.11);
pub const DEFAULT_Q: f64 = 1.5;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MIN_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(format!("unknown format '{s}' (expected json or csv)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

impl<'de> Deserialize<'de> for OutputFormat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(de::Error::custom)
    }
}

/// How the lattice was given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeSpec {
    Tau(Complex64),
    Periods(Complex64, Complex64),
}

impl LatticeSpec {
    pub fn lattice(&self) -> Result<Lattice> {
        match *self {
            LatticeSpec::Tau(tau) => Lattice::from_tau(tau),
            LatticeSpec::Periods(w1, w2) => Lattice::new(w1, w2),
        }
    }
}

/// Parse `a`, `bi`, `a+bi`, `a-bi` (also with `j`, and `i` alone).
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("bad complex number '{s}' (expected e.g. 0.5+0.8i)");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |txt: &str| -> std::result::Result<f64, String> {
        match txt {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => txt.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re: f64 = body[..k].parse().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

// config files may give complex numbers as "0.5+0.8i", [0.5, 0.8] or a bare real
#[derive(Debug, Clone, Copy, PartialEq)]
struct ComplexArg(Complex64);

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Pair([f64; 2]),
            Real(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => parse_complex(&s).map(ComplexArg).map_err(de::Error::custom),
            Raw::Pair([re, im]) => Ok(ComplexArg(Complex64::new(re, im))),
            Raw::Real(re) => Ok(ComplexArg(Complex64::new(re, 0.0))),
        }
    }
}

// ranges may be written 3.5, "3.5" or "7/2"
fn de_half_int<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<HalfInt>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Num(f64),
    }
    let v = match Option::<Raw>::deserialize(d)? {
        None => return Ok(None),
        Some(Raw::Text(s)) => s.parse().map_err(de::Error::custom)?,
        Some(Raw::Num(x)) => HalfInt::from_f64(x).ok_or_else(|| de::Error::custom(format!("{x} is not a half-integer")))?,
    };
    Ok(Some(v))
}

fn de_complex<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Complex64>, D::Error> {
    Ok(Option::<ComplexArg>::deserialize(d)?.map(|c| c.0))
}

/// One layer of settings. Config files and command-line flags each produce
/// one; `over` wins in [`ConfigLayer::merge`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ConfigLayer {
    pub genus: Option<u32>,
    #[serde(default, deserialize_with = "de_complex")]
    pub tau: Option<Complex64>,
    #[serde(default, deserialize_with = "de_complex")]
    pub omega1: Option<Complex64>,
    #[serde(default, deserialize_with = "de_complex")]
    pub omega2: Option<Complex64>,
    #[serde(default, deserialize_with = "de_complex")]
    pub z0: Option<Complex64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default, deserialize_with = "de_half_int")]
    pub range: Option<HalfInt>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub format: Option<OutputFormat>,
    pub basis_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| KnError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KnError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(format!("config file {}", path.display())))
    }

    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        // a lattice given one way replaces one given the other way
        let lattice_from_over = over.tau.is_some() || over.omega1.is_some() || over.omega2.is_some();
        let (tau, omega1, omega2) = if lattice_from_over {
            (over.tau, over.omega1, over.omega2)
        } else {
            (self.tau, self.omega1, self.omega2)
        };
        ConfigLayer {
            genus: over.genus.or(self.genus),
            tau,
            omega1,
            omega2,
            z0: over.z0.or(self.z0),
            q: over.q.or(self.q),
            alpha: over.alpha.or(self.alpha),
            beta: over.beta.or(self.beta),
            range: over.range.or(self.range),
            depth: over.depth.or(self.depth),
            tol: over.tol.or(self.tol),
            format: over.format.or(self.format),
            basis_file: over.basis_file.or(self.basis_file),
            out: over.out.or(self.out),
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub genus: u32,
    pub lattice: LatticeSpec,
    pub z0: Complex64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub index_bound: HalfInt,
    pub depth: usize,
    pub tol: f64,
    pub output_format: OutputFormat,
    pub basis_file: Option<PathBuf>,
}

/// Default `|m|, |n|` bound: 3 on the sphere, 7/2 on the torus.
pub fn default_range(genus: u32) -> HalfInt {
    if genus % 2 == 1 {
        HalfInt::from_twice(7)
    } else {
        HalfInt::from_int(3)
    }
}

impl RunConfig {
    pub fn from_layer(layer: &ConfigLayer) -> Result<Self> {
        let genus = layer.genus.unwrap_or(0);
        let lattice = match (layer.tau, layer.omega1, layer.omega2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(KnError::Config("give either tau or omega1/omega2, not both".into()))
            }
            (Some(tau), None, None) => LatticeSpec::Tau(tau),
            (None, Some(w1), Some(w2)) => LatticeSpec::Periods(w1, w2),
            (None, Some(_), None) | (None, None, Some(_)) => {
                return Err(KnError::Config("omega1 and omega2 must be given together".into()))
            }
            (None, None, None) => LatticeSpec::Tau(DEFAULT_TAU),
        };
        let config = RunConfig {
            genus,
            lattice,
            z0: layer.z0.unwrap_or(DEFAULT_Z0),
            q: layer.q.unwrap_or(DEFAULT_Q),
            alpha: layer.alpha.unwrap_or(DEFAULT_ALPHA),
            beta: layer.beta.unwrap_or(DEFAULT_BETA),
            index_bound: layer.range.unwrap_or_else(|| default_range(genus)),
            depth: layer.depth.unwrap_or(crate::basis::DEFAULT_DEPTH),
            tol: layer.tol.unwrap_or(DEFAULT_TOL),
            output_format: layer.format.unwrap_or_default(),
            basis_file: layer.basis_file.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(KnError::Config(msg));
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.depth < MIN_DEPTH {
            return fail(format!("depth must be at least {MIN_DEPTH}, got {}", self.depth));
        }
        if self.index_bound < HalfInt::ZERO {
            return fail(format!("range must be non-negative, got {}", self.index_bound));
        }
        if !index_parity_ok(self.genus, self.index_bound) {
            let want = if self.genus % 2 == 1 { "a half-odd integer such as 3.5" } else { "an integer" };
            return fail(format!("range {} for genus {} must be {want}", self.index_bound, self.genus));
        }
        if self.genus > 1 && self.basis_file.is_none() {
            return fail(format!("genus {} has no built-in basis; pass --basis-file", self.genus));
        }
        if !(self.q.is_finite() && self.q > 0.0 && self.q != 1.0) {
            return fail(format!("q must be positive and different from 1, got {}", self.q));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return fail("alpha and beta must be finite".into());
        }
        if !(self.z0.re.is_finite() && self.z0.im.is_finite()) {
            return fail("z0 must be finite".into());
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.tol).expect("validated")
    }

    pub fn params(&self) -> Result<DeformationParams> {
        DeformationParams::new(self.q, self.alpha, self.beta)
    }

    pub fn surface(&self) -> Result<SurfaceSpec> {
        match self.genus {
            0 => Ok(SurfaceSpec::sphere()),
            1 => SurfaceSpec::torus(self.lattice.lattice()?, self.z0),
            g => Err(KnError::InvalidSurface(format!("no built-in surface for genus {g}"))),
        }
    }

    /// Family holding every index with `|n| <= bound`, built at the configured tolerance.
    pub fn family(&self, bound: HalfInt) -> Result<BasisFamily> {
        self.family_with_tol(bound, self.tolerance())
    }

    /// As [`RunConfig::family`], with construction checks at `tol`.
    pub fn family_with_tol(&self, bound: HalfInt, tol: Tolerance) -> Result<BasisFamily> {
        let family = match &self.basis_file {
            Some(path) => {
                let fam = load_basis_file(path, tol)?;
                if fam.genus() != self.genus {
                    return Err(KnError::Config(format!(
                        "basis file {} is for genus {}, but genus {} was requested",
                        path.display(),
                        fam.genus(),
                        self.genus
                    )));
                }
                fam
            }
            None => {
                let indices = IndexSet::new(self.genus, bound)?;
                build_family(&self.surface()?, &indices, self.depth, tol)?
            }
        };
        for n in IndexSet::new(self.genus, bound)?.indices() {
            if !family.contains(n) {
                return Err(KnError::MissingIndex { index: n }.context(format!("this run needs |n| <= {bound}")));
            }
        }
        Ok(family)
    }

    /// Indices `|n| <= index_bound` of the right parity.
    pub fn indices(&self) -> Vec<HalfInt> {
        IndexSet::new(self.genus, self.index_bound).map(|s| s.indices()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5+0.8i").unwrap(), c(0.5, 0.8));
        assert_eq!(parse_complex("0.17 - 0.11i").unwrap(), c(0.17, -0.11));
        assert_eq!(parse_complex("-2").unwrap(), c(-2.0, 0.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2.5e1j").unwrap(), c(1e-3, 25.0));
        assert_eq!(parse_complex("3i").unwrap(), c(0.0, 3.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("x+yi").is_err());
    }

    #[test]
    fn defaults_by_genus() {
        let g0 = RunConfig::from_layer(&ConfigLayer::default()).unwrap();
        assert_eq!((g0.genus, g0.index_bound), (0, HalfInt::from_int(3)));
        let g1 = RunConfig::from_layer(&ConfigLayer { genus: Some(1), ..Default::default() }).unwrap();
        assert_eq!(g1.index_bound, HalfInt::from_twice(7));
        assert_eq!(g1.lattice, LatticeSpec::Tau(DEFAULT_TAU));
        assert_eq!((g1.q, g1.alpha, g1.beta, g1.depth, g1.tol), (1.5, 1.0, 0.5, 48, 1e-9));
    }

    #[test]
    fn file_layer_and_override() {
        let file = ConfigLayer::from_json(
            r#"{"genus": 1, "tau": [0.1, 1.2], "z0": "0.2+0.1i", "range": "5/2", "q": 2, "format": "csv"}"#,
        )
        .unwrap();
        let flags = ConfigLayer { q: Some(1.25), omega1: Some(c(1.0, 0.0)), omega2: Some(c(0.3, 1.1)), ..Default::default() };
        let cfg = RunConfig::from_layer(&file.merge(flags)).unwrap();
        assert_eq!(cfg.q, 1.25);
        assert_eq!(cfg.lattice, LatticeSpec::Periods(c(1.0, 0.0), c(0.3, 1.1)));
        assert_eq!(cfg.z0, c(0.2, 0.1));
        assert_eq!(cfg.index_bound, HalfInt::from_twice(5));
        assert_eq!(cfg.output_format, OutputFormat::Csv);
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = [
            r#"{"tol": 0}"#,
            r#"{"depth": 4}"#,
            r#"{"genus": 1, "range": 3}"#,
            r#"{"genus": 0, "range": 2.5}"#,
            r#"{"genus": 2}"#,
            r#"{"q": 1}"#,
            r#"{"tau": "0.5+0.8i", "omega1": 1}"#,
            r#"{"omega1": 1}"#,
        ];
        for text in bad {
            let err = RunConfig::from_layer(&ConfigLayer::from_json(text).unwrap()).unwrap_err();
            assert!(matches!(err, KnError::Config(_)), "{text}: {err}");
        }
        assert!(ConfigLayer::from_json(r#"{"colour": 1}"#).is_err());
        assert!(ConfigLayer::from_json(r#"{"range": 0.25}"#).is_err());
    }
}
