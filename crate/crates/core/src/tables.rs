//! Table generation and serialization.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{
    branch_parameters, classical_central_table, classical_structure_table, heisenberg_table, q_central_table,
    q_heisenberg_table, q_structure_table,
};
use crate::basis::BasisFamily;
use crate::config::{LatticeSpec, OutputFormat, RunConfig};
use crate::error::{KnError, Result};
use crate::index::HalfInt;
use crate::numfmt::{format_f64, Float17};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Classical,
    Q,
    Heisenberg,
    QHeisenberg,
    Central,
    QCentral,
}

impl TableKind {
    pub const ALL: [TableKind; 6] = [
        TableKind::Classical,
        TableKind::Q,
        TableKind::Heisenberg,
        TableKind::QHeisenberg,
        TableKind::Central,
        TableKind::QCentral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableKind::Classical => "classical",
            TableKind::Q => "q",
            TableKind::Heisenberg => "heisenberg",
            TableKind::QHeisenberg => "qheisenberg",
            TableKind::Central => "central",
            TableKind::QCentral => "qcentral",
        }
    }

    fn quantity(self) -> &'static str {
        match self {
            TableKind::Classical => "structure constants c^s_{m,n} = res_{P+}((e_m' e_n - e_m e_n') Omega_{m+n-s})",
            TableKind::Q => "deformed kernel D^s_{m,n}(b, c, d) for each of the four commutator branches",
            TableKind::Heisenberg => "gamma_{m,n} = res_{P+}(A_m' A_n)",
            TableKind::QHeisenberg => "q-deformed gamma^q_{m,n} = res_{P+}((d^q A_m) A_n)",
            TableKind::Central => "cocycle chi_{m,n} = (1/12) res_{P+}(e_m''' e_n)",
            TableKind::QCentral => "deformed central term chi^q_{m,n}",
        }
    }

    fn deformed(self) -> bool {
        matches!(self, TableKind::Q | TableKind::QHeisenberg | TableKind::QCentral)
    }

    /// Largest `|n|` a table over `|m|, |n| <= range` touches.
    pub fn family_bound(self, range: HalfInt, g0: HalfInt) -> HalfInt {
        match self {
            TableKind::Classical | TableKind::Q => range + range + g0,
            _ => range,
        }
    }
}

impl FromStr for TableKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TableKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown table kind '{s}' (expected classical, q, heisenberg, qheisenberg, central or qcentral)"))
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row: `(m, n)`, the shift `s` for structure tables and the branch
/// number for the deformed commutator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub m: HalfInt,
    pub n: HalfInt,
    pub s: Option<HalfInt>,
    pub branch: Option<u8>,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub entries: Vec<TableEntry>,
}

impl Table {
    pub fn get(&self, m: HalfInt, n: HalfInt, s: Option<HalfInt>, branch: Option<u8>) -> Option<Complex64> {
        self.entries.iter().find(|e| e.m == m && e.n == n && e.s == s && e.branch == branch).map(|e| e.value)
    }
}

/// Compute a table over `config.indices()` with the given family.
pub fn compute_table(config: &RunConfig, family: &BasisFamily, kind: TableKind) -> Result<Table> {
    let idx = config.indices();
    let pair = |entries: BTreeMap<(HalfInt, HalfInt), Complex64>| {
        entries.into_iter().map(|((m, n), value)| TableEntry { m, n, s: None, branch: None, value }).collect()
    };
    let entries = match kind {
        TableKind::Classical => classical_structure_table(family, &idx)?
            .entries
            .into_iter()
            .map(|((m, n, s), value)| TableEntry { m, n, s: Some(s), branch: None, value })
            .collect(),
        TableKind::Q => q_structure_table(family, &idx, &config.params()?)?
            .entries
            .into_iter()
            .map(|((m, n, s, b), value)| TableEntry { m, n, s: Some(s), branch: Some(b), value })
            .collect(),
        TableKind::Heisenberg => pair(heisenberg_table(family, &idx)?.entries),
        TableKind::QHeisenberg => pair(q_heisenberg_table(family, &idx, config.q)?.entries),
        TableKind::Central => pair(classical_central_table(family, &idx)?.entries),
        TableKind::QCentral => pair(q_central_table(family, &idx, &config.params()?)?.entries),
    };
    Ok(Table { kind, entries })
}

/// `table` command: build the family, compute, serialize.
pub fn cmd_table(config: &RunConfig, kind: TableKind) -> Result<String> {
    let g0 = crate::basis::g0_for_genus(config.genus);
    let family = config.family(kind.family_bound(config.index_bound, g0))?;
    let table = compute_table(config, &family, kind)?;
    render_table(config, &table, config.output_format)
}

/// `expand-basis` command: the family over `|n| <= range` as a basis file.
pub fn cmd_expand_basis(config: &RunConfig) -> Result<String> {
    let mut text = config.family(config.index_bound)?.to_json()?;
    text.push('\n');
    Ok(text)
}

pub fn render_table(config: &RunConfig, table: &Table, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => table_json(config, table),
        OutputFormat::Csv => Ok(table_csv(table)),
    }
}

fn opt_index(x: Option<HalfInt>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn table_csv(table: &Table) -> String {
    let mut out = String::from("m,n,s,branch,re,im\n");
    for e in &table.entries {
        let branch = e.branch.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.m,
            e.n,
            opt_index(e.s),
            branch,
            format_f64(e.value.re),
            format_f64(e.value.im)
        );
    }
    out
}

#[derive(Serialize)]
struct EntryOut {
    m: HalfInt,
    n: HalfInt,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<u8>,
    re: Float17,
    im: Float17,
}

#[derive(Serialize)]
struct BranchOut {
    branch: u8,
    label: &'static str,
    sign: Float17,
    b: Float17,
    c: Float17,
    d: Float17,
}

#[derive(Serialize)]
struct TableOut {
    metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<BranchOut>>,
    entries: Vec<EntryOut>,
}

/// Run settings echoed into every output file.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub(crate) struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantity: Option<&'static str>,
    genus: u32,
    g0: HalfInt,
    range: HalfInt,
    depth: usize,
    tol: Float17,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega1: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega2: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z0: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Float17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Float17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<Float17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis_file: Option<String>,
    normalization: &'static str,
}

fn c17(z: Complex64) -> [Float17; 2] {
    [Float17(z.re), Float17(z.im)]
}

impl Metadata {
    pub(crate) fn new(config: &RunConfig, deformed: bool) -> Self {
        let torus = config.genus == 1 && config.basis_file.is_none();
        let (tau, omega1, omega2) = match config.lattice {
            _ if !torus => (None, None, None),
            LatticeSpec::Tau(t) => (Some(c17(t)), None, None),
            LatticeSpec::Periods(w1, w2) => (None, Some(c17(w1)), Some(c17(w2))),
        };
        Metadata {
            kind: None,
            suite: None,
            quantity: None,
            genus: config.genus,
            g0: crate::basis::g0_for_genus(config.genus),
            range: config.index_bound,
            depth: config.depth,
            tol: Float17(config.tol),
            tau,
            omega1,
            omega2,
            z0: torus.then(|| c17(config.z0)),
            q: deformed.then_some(Float17(config.q)),
            alpha: deformed.then_some(Float17(config.alpha)),
            beta: deformed.then_some(Float17(config.beta)),
            basis_file: config.basis_file.as_ref().map(|p| p.display().to_string()),
            normalization: "e_n and A_n = e_n have leading coefficient 1 at P+; Omega_n is scaled so res_{P+}(e_n Omega_n) = 1",
        }
    }

    pub(crate) fn with_suite(mut self, suite: &str) -> Self {
        self.suite = Some(suite.to_string());
        self
    }
}

fn table_json(config: &RunConfig, table: &Table) -> Result<String> {
    let kind = table.kind;
    let mut metadata = Metadata::new(config, kind.deformed());
    metadata.kind = Some(kind.name());
    metadata.quantity = Some(kind.quantity());
    if kind == TableKind::QHeisenberg {
        metadata.alpha = None;
        metadata.beta = None;
    }
    let branches = (kind == TableKind::Q).then(|| {
        branch_parameters(config.alpha, config.beta)
            .into_iter()
            .enumerate()
            .map(|(i, (label, _, sign, b, c, d))| BranchOut {
                branch: i as u8 + 1,
                label,
                sign: Float17(sign),
                b: Float17(b),
                c: Float17(c),
                d: Float17(d),
            })
            .collect()
    });
    let entries = table
        .entries
        .iter()
        .map(|e| EntryOut { m: e.m, n: e.n, s: e.s, branch: e.branch, re: Float17(e.value.re), im: Float17(e.value.im) })
        .collect();
    let mut text = serde_json::to_string_pretty(&TableOut { metadata, branches, entries })
        .map_err(|e| KnError::Output(format!("serializing table: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigLayer;

    fn config(text: &str) -> RunConfig {
        RunConfig::from_layer(&ConfigLayer::from_json(text).unwrap()).unwrap()
    }

    fn hi(n: i64) -> HalfInt {
        HalfInt::from_int(n)
    }

    #[test]
    fn witt_table_genus0() {
        let cfg = config(r#"{"genus": 0, "range": 3}"#);
        let fam = cfg.family(TableKind::Classical.family_bound(cfg.index_bound, HalfInt::ZERO)).unwrap();
        let t = compute_table(&cfg, &fam, TableKind::Classical).unwrap();
        assert_eq!(t.entries.len(), 49);
        for e in &t.entries {
            assert_eq!(e.value, Complex64::new((e.m - e.n).to_f64(), 0.0));
        }
    }

    #[test]
    fn q_heisenberg_diagonal_genus0() {
        let cfg = config(r#"{"genus": 0, "range": 2, "q": 2}"#);
        let fam = cfg.family(hi(2)).unwrap();
        let t = compute_table(&cfg, &fam, TableKind::QHeisenberg).unwrap();
        for e in &t.entries {
            let want = if e.m + e.n == HalfInt::ZERO {
                let m = e.m.to_f64();
                (2f64.powf(m) - 2f64.powf(-m)) / (2.0 - 0.5)
            } else {
                0.0
            };
            assert!((e.value.re - want).abs() < 1e-12 && e.value.im == 0.0, "{e:?}");
        }
    }

    #[test]
    fn csv_and_json_shapes() {
        let cfg = config(r#"{"genus": 0, "range": 1}"#);
        let fam = cfg.family(hi(3)).unwrap();
        let t = compute_table(&cfg, &fam, TableKind::Q).unwrap();
        assert_eq!(t.entries.len(), 9 * 4);
        let csv = render_table(&cfg, &t, OutputFormat::Csv).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("m,n,s,branch,re,im"));
        assert!(lines.next().unwrap().starts_with("-1,-1,0,1,"));
        let json = render_table(&cfg, &t, OutputFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["metadata"]["kind"], "q");
        assert_eq!(v["branches"].as_array().unwrap().len(), 4);
        assert_eq!(v["entries"].as_array().unwrap().len(), 36);
        assert!(v["metadata"].get("tau").is_none());
    }

    #[test]
    fn entries_sorted() {
        let cfg = config(r#"{"genus": 0, "range": 2}"#);
        let fam = cfg.family(hi(4)).unwrap();
        let t = compute_table(&cfg, &fam, TableKind::Q).unwrap();
        let keys: Vec<_> = t.entries.iter().map(|e| (e.m, e.n, e.s, e.branch)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn kinds_parse() {
        for k in TableKind::ALL {
            assert_eq!(k.name().parse::<TableKind>().unwrap(), k);
        }
        assert!("witt".parse::<TableKind>().is_err());
    }
}
