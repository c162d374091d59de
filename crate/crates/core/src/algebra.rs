//! Structure constants, cocycles and Heisenberg pairings as residues over a
//! [`BasisFamily`].
//!
//! Index conventions: `c^s_{m,n}` is the coefficient of `e_{m+n-s}` in
//! `[e_m, e_n]`, with `s` nominally in `[-g0, g0]`. The classical bracket is
//! `[e_m, e_n] = e_m e_n' - e_m' e_n` for the coefficient functions, so
//! that on the sphere `[e_m, e_n] = (n - m) e_{m+n}` and `c^0_{m,n} = m - n`
//! reads off `res((e_m' e_n - e_m e_n') Ω_{m+n})`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{extract_e_coeff, BasisFamily, Point};
use crate::error::{KnError, Result};
use crate::index::HalfInt;
use crate::qcalc::{bracket_from_log, c_coeff, check_q, DeformationParams};
use crate::series::LaurentSeries;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `e_m' e_n - e_m e_n'` at the given point.
pub fn bracket_integrand(family: &BasisFamily, m: HalfInt, n: HalfInt, point: Point) -> Result<LaurentSeries> {
    let em = family.e(m, point)?;
    let en = family.e(n, point)?;
    Ok(em.derivative().mul(en).sub(&em.mul(&en.derivative())))
}

/// `c^s_{m,n}` evaluated at `P+`.
pub fn classical_structure_constant(family: &BasisFamily, m: HalfInt, n: HalfInt, s: HalfInt) -> Result<Complex64> {
    classical_structure_constant_at(family, m, n, s, Point::Plus)
}

/// `c^s_{m,n} = ±res_{P±}((e_m' e_n - e_m e_n') Ω_{m+n-s})`.
pub fn classical_structure_constant_at(
    family: &BasisFamily,
    m: HalfInt,
    n: HalfInt,
    s: HalfInt,
    point: Point,
) -> Result<Complex64> {
    let integrand = bracket_integrand(family, m, n, point)?.mul(family.omega(m + n - s, point)?);
    Ok(integrand.residue()? * point.orientation())
}

/// `χ_{m,n} = (1/12) res(e_m''' e_n)` at `P+`.
pub fn classical_cocycle(family: &BasisFamily, m: HalfInt, n: HalfInt) -> Result<Complex64> {
    classical_cocycle_at(family, m, n, Point::Plus)
}

/// `χ_{m,n} = ±(1/12) res_{P±}(e_m''' e_n)`.
pub fn classical_cocycle_at(family: &BasisFamily, m: HalfInt, n: HalfInt, point: Point) -> Result<Complex64> {
    let em = family.e(m, point)?;
    let en = family.e(n, point)?;
    // divide rather than multiply by 1/12 so integer residues stay exact
    Ok(em.derivative().derivative().derivative().mul(en).residue()? * point.orientation() / 12.0)
}

/// `γ_{m,n} = res(A_m' A_n)`.
pub fn heisenberg_gamma(family: &BasisFamily, m: HalfInt, n: HalfInt) -> Result<Complex64> {
    let am = family.a(m, Point::Plus)?;
    let an = family.a(n, Point::Plus)?;
    am.derivative().mul(an).residue()
}

/// `γ^q_{m,n} = res((∂^q A_m) A_n)`.
pub fn q_heisenberg_gamma(family: &BasisFamily, m: HalfInt, n: HalfInt, q: f64) -> Result<Complex64> {
    check_q(q)?;
    let am = family.a(m, Point::Plus)?;
    let an = family.a(n, Point::Plus)?;
    am.q_derivative(q)?.mul(an).residue()
}

// q-exponents this small are treated as exactly zero: [0]_q kills the term.
const ZERO_EXPONENT: f64 = 1e-12;

/// The deformed kernel `D^s_{m,n}(b, c, d)`:
///
/// `(κ/2) res{ q^-c [d-b-c] ∂^(q^(d-b-c)) e_m(w) e_n(w q^-b)
///           - q^-c [b] e_m(w q^(b+c-d)) ∂^(q^-b) e_n(w)
///           - [c] e_m(w q^(b+c-d)) e_n(w q^b) / w } Ω_{m+n-s}`
///
/// at `P+`. A term whose bracket prefactor is `[0]_q` is dropped before any
/// q-derivative with unit parameter is formed.
#[allow(clippy::too_many_arguments)]
pub fn q_structure_d(
    family: &BasisFamily,
    m: HalfInt,
    n: HalfInt,
    s: HalfInt,
    b: f64,
    c: f64,
    d: f64,
    q: f64,
) -> Result<Complex64> {
    check_q(q)?;
    let h = q.ln();
    let omega = family.omega(m + n - s, Point::Plus)?;
    let em = family.e(m, Point::Plus)?;
    let en = family.e(n, Point::Plus)?;
    let p = d - b - c;
    let em_shifted = em.scale_arg(real((-p * h).exp()))?;

    let mut total = Complex64::new(0.0, 0.0);
    if p.abs() > ZERO_EXPONENT {
        let pre = (-c * h).exp() * bracket_from_log(p, h);
        let t = em.q_derivative_log(p * h).mul(&en.scale_arg(real((-b * h).exp()))?);
        total += pre * t.mul(omega).residue()?;
    }
    if b.abs() > ZERO_EXPONENT {
        let pre = (-c * h).exp() * bracket_from_log(b, h);
        let t = em_shifted.mul(&en.q_derivative_log(-b * h));
        total -= pre * t.mul(omega).residue()?;
    }
    if c.abs() > ZERO_EXPONENT {
        let pre = bracket_from_log(c, h);
        let t = em_shifted.mul(&en.scale_arg(real((b * h).exp()))?).shift(-1);
        total -= pre * t.mul(omega).residue()?;
    }
    let kappa = h.sinh() / h;
    Ok(total * (0.5 * kappa))
}

/// One of the four terms of the deformed commutator.
#[derive(Debug, Clone, PartialEq)]
pub struct QBranch {
    /// Printable form of the target label, e.g. `α+β+1`.
    pub label: &'static str,
    pub target: f64,
    pub sign: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `s -> D^s_{m,n}(b, c, d)` over `s ∈ [-g0, g0]`.
    pub coefficients: BTreeMap<HalfInt, Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QCommutatorExpansion {
    pub m: HalfInt,
    pub n: HalfInt,
    pub params: DeformationParams,
    pub branches: [QBranch; 4],
    /// `None` when the central coefficients have a vanishing q-bracket
    /// denominator for these labels.
    pub central: Option<Complex64>,
}

impl QCommutatorExpansion {
    /// `Σ sign · D^s` over the four branches, the coefficient that survives
    /// when every label collapses onto the classical generator.
    pub fn signed_sum(&self, s: HalfInt) -> Complex64 {
        self.branches.iter().map(|br| br.sign * br.coefficients.get(&s).copied().unwrap_or_default()).sum()
    }
}

/// `(label, target, sign, b, c, d)` for the four terms.
pub fn branch_parameters(alpha: f64, beta: f64) -> [(&'static str, f64, f64, f64, f64, f64); 4] {
    [
        ("α+β+1", alpha + beta + 1.0, 1.0, (alpha + 1.0) / 2.0, (beta - alpha) / 2.0, beta + 1.0),
        ("-α+β+1", -alpha + beta + 1.0, 1.0, (alpha + 1.0) / 2.0, (-beta - alpha) / 2.0, -beta + 1.0),
        ("-α-β+1", -alpha - beta + 1.0, -1.0, (alpha - 1.0) / 2.0, (beta - alpha) / 2.0, beta - 1.0),
        ("α-β-1", alpha - beta - 1.0, -1.0, (alpha - 1.0) / 2.0, (-beta - alpha) / 2.0, -beta - 1.0),
    ]
}

fn band(family: &BasisFamily) -> Vec<HalfInt> {
    let g0 = family.g0();
    HalfInt::range_inclusive(-g0, g0).collect()
}

/// The deformed commutator `[L^α_m, L^β_n]`: four branches over the band plus
/// the central term.
pub fn q_commutator(
    family: &BasisFamily,
    m: HalfInt,
    n: HalfInt,
    params: &DeformationParams,
) -> Result<QCommutatorExpansion> {
    let band = band(family);
    let make = |(label, target, sign, b, c, d): (&'static str, f64, f64, f64, f64, f64)| -> Result<QBranch> {
        let mut coefficients = BTreeMap::new();
        for &s in &band {
            let v = q_structure_d(family, m, n, s, b, c, d, params.q)
                .map_err(|e| e.context(format!("D^{s}_{{{m},{n}}} for branch {label}")))?;
            coefficients.insert(s, v);
        }
        Ok(QBranch { label, target, sign, b, c, d, coefficients })
    };
    let [p1, p2, p3, p4] = branch_parameters(params.alpha, params.beta);
    let branches = [make(p1)?, make(p2)?, make(p3)?, make(p4)?];
    let central = match q_central_term(family, m, n, params) {
        Ok(v) => Some(v),
        Err(e) if matches!(e.root(), KnError::DegenerateParameter(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(QCommutatorExpansion { m, n, params: *params, branches, central })
}

// 2g0 - m - n, or None for an empty sum.
fn central_top(family: &BasisFamily, m: HalfInt, n: HalfInt) -> Result<Option<i64>> {
    let g0 = family.g0();
    let top = (g0 + g0 - m - n).as_int().ok_or(KnError::IndexParity(m))?;
    Ok((top >= 0).then_some(top))
}

/// `χ^q_{m,n} = -(1/(16 (ln q)^2)) Σ_k e⁺_{m,k} e⁺_{n,2g0-m-n-k} (C^{α,β}_{m+1}(g0;k) + C^{α,-β}_{m+1}(g0;k))`.
pub fn q_central_term(family: &BasisFamily, m: HalfInt, n: HalfInt, params: &DeformationParams) -> Result<Complex64> {
    check_q(params.q)?;
    let Some(top) = central_top(family, m, n)? else { return Ok(Complex64::new(0.0, 0.0)) };
    let g0 = family.g0().to_f64();
    let m1 = m.to_f64() + 1.0;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=top {
        let cc = c_coeff(m1, params.alpha, params.beta, g0, k, params.q)?
            + c_coeff(m1, params.alpha, -params.beta, g0, k, params.q)?;
        sum += extract_e_coeff(family, m, k)? * extract_e_coeff(family, n, top - k)? * cc;
    }
    let h = params.log_q();
    Ok(-sum / (16.0 * h * h))
}

/// `χ_{m,n} = (1/12) Σ_k e⁺_{m,k} e⁺_{n,2g0-m-n-k} (x-1) x (x+1)`, `x = m - g0 + k`.
pub fn classical_limit_central(family: &BasisFamily, m: HalfInt, n: HalfInt) -> Result<Complex64> {
    let Some(top) = central_top(family, m, n)? else { return Ok(Complex64::new(0.0, 0.0)) };
    let x0 = (m - family.g0()).as_int().ok_or(KnError::IndexParity(m))?;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=top {
        let x = (x0 + k) as f64;
        sum += extract_e_coeff(family, m, k)? * extract_e_coeff(family, n, top - k)? * ((x - 1.0) * x * (x + 1.0));
    }
    Ok(sum / 12.0)
}

// ---- tables ----

/// `(m, n, s) -> c^s_{m,n}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructureTable {
    pub entries: BTreeMap<(HalfInt, HalfInt, HalfInt), Complex64>,
}

/// `(m, n) -> value` for χ, χ^q, γ or γ^q.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairTable {
    pub entries: BTreeMap<(HalfInt, HalfInt), Complex64>,
    pub deformed: bool,
}

pub type CentralTable = PairTable;

/// `(m, n, s, branch) -> D^s_{m,n}` with branch numbered 1 to 4.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QStructureTable {
    pub entries: BTreeMap<(HalfInt, HalfInt, HalfInt, u8), Complex64>,
    pub central: BTreeMap<(HalfInt, HalfInt), Option<Complex64>>,
}

fn pairs(indices: &[HalfInt]) -> Vec<(HalfInt, HalfInt)> {
    indices.iter().flat_map(|&m| indices.iter().map(move |&n| (m, n))).collect()
}

pub fn classical_structure_table(family: &BasisFamily, indices: &[HalfInt]) -> Result<StructureTable> {
    let band = band(family);
    let rows: Vec<Vec<_>> = pairs(indices)
        .par_iter()
        .map(|&(m, n)| {
            band.iter()
                .map(|&s| {
                    classical_structure_constant(family, m, n, s)
                        .map(|v| ((m, n, s), v))
                        .map_err(|e| e.context(format!("c^{s}_{{{m},{n}}}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(StructureTable { entries: rows.into_iter().flatten().collect() })
}

fn pair_table<F>(indices: &[HalfInt], deformed: bool, what: &str, f: F) -> Result<PairTable>
where
    F: Fn(HalfInt, HalfInt) -> Result<Complex64> + Sync,
{
    let entries = pairs(indices)
        .par_iter()
        .map(|&(m, n)| f(m, n).map(|v| ((m, n), v)).map_err(|e| e.context(format!("{what}_{{{m},{n}}}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairTable { entries: entries.into_iter().collect(), deformed })
}

pub fn classical_central_table(family: &BasisFamily, indices: &[HalfInt]) -> Result<CentralTable> {
    pair_table(indices, false, "χ", |m, n| classical_cocycle(family, m, n))
}

pub fn q_central_table(family: &BasisFamily, indices: &[HalfInt], params: &DeformationParams) -> Result<CentralTable> {
    pair_table(indices, true, "χ^q", |m, n| q_central_term(family, m, n, params))
}

pub fn heisenberg_table(family: &BasisFamily, indices: &[HalfInt]) -> Result<PairTable> {
    pair_table(indices, false, "γ", |m, n| heisenberg_gamma(family, m, n))
}

pub fn q_heisenberg_table(family: &BasisFamily, indices: &[HalfInt], q: f64) -> Result<PairTable> {
    check_q(q)?;
    pair_table(indices, true, "γ^q", |m, n| q_heisenberg_gamma(family, m, n, q))
}

pub fn q_structure_table(
    family: &BasisFamily,
    indices: &[HalfInt],
    params: &DeformationParams,
) -> Result<QStructureTable> {
    let expansions = pairs(indices)
        .par_iter()
        .map(|&(m, n)| q_commutator(family, m, n, params))
        .collect::<Result<Vec<_>>>()?;
    let mut table = QStructureTable::default();
    for ex in expansions {
        for (i, br) in ex.branches.iter().enumerate() {
            for (&s, &v) in &br.coefficients {
                table.entries.insert((ex.m, ex.n, s, i as u8 + 1), v);
            }
        }
        table.central.insert((ex.m, ex.n), ex.central);
    }
    Ok(table)
}

// ---- Jacobi identity ----

/// Memoized `c^s_{m,n}` and `χ_{m,n}` evaluated at one marked point.
pub struct StructureCache<'a> {
    family: &'a BasisFamily,
    point: Point,
    c: HashMap<(HalfInt, HalfInt, HalfInt), Complex64>,
    chi: HashMap<(HalfInt, HalfInt), Complex64>,
}

impl<'a> StructureCache<'a> {
    pub fn new(family: &'a BasisFamily, point: Point) -> Self {
        StructureCache { family, point, c: HashMap::new(), chi: HashMap::new() }
    }

    pub fn c(&mut self, m: HalfInt, n: HalfInt, s: HalfInt) -> Result<Complex64> {
        if let Some(&v) = self.c.get(&(m, n, s)) {
            return Ok(v);
        }
        let v = classical_structure_constant_at(self.family, m, n, s, self.point)?;
        self.c.insert((m, n, s), v);
        Ok(v)
    }

    pub fn chi(&mut self, m: HalfInt, n: HalfInt) -> Result<Complex64> {
        if let Some(&v) = self.chi.get(&(m, n)) {
            return Ok(v);
        }
        let v = classical_cocycle_at(self.family, m, n, self.point)?;
        self.chi.insert((m, n), v);
        Ok(v)
    }
}

/// Residuals of the cyclic sum `[[L_m, L_n], L_k] + [[L_n, L_k], L_m] + [[L_k, L_m], L_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiResidual {
    /// Largest coefficient of any `L_j` in the cyclic sum.
    pub operator: f64,
    /// The central component.
    pub central: f64,
}

impl JacobiResidual {
    pub fn max(&self) -> f64 {
        self.operator.max(self.central)
    }
}

/// Cyclic Jacobi sum with the center.
///
/// Each bracket `[L_a, L_b]` is expanded over every stored target index
/// `a + b - s` with `s <= g0`; `s > g0` vanishes identically by the exponent
/// laws at `P+`. Terms beyond `-g0` do occur for the exceptional elements,
/// so the family must be wide enough to hold every target with a nonzero
/// coefficient.
pub fn jacobi_residual(cache: &mut StructureCache<'_>, m: HalfInt, n: HalfInt, k: HalfInt) -> Result<JacobiResidual> {
    let family = cache.family;
    let g0 = family.g0();
    let top = family.indices().last().ok_or(KnError::MissingIndex { index: m })?;
    let shifts = |a: HalfInt, b: HalfInt| -> Vec<HalfInt> {
        HalfInt::range_inclusive(a + b - top, g0).filter(|&s| family.contains(a + b - s)).collect()
    };
    let mut ops: BTreeMap<HalfInt, Complex64> = BTreeMap::new();
    let mut central = Complex64::new(0.0, 0.0);
    for (a, b, c) in [(m, n, k), (n, k, m), (k, m, n)] {
        for s in shifts(a, b) {
            let cab = cache.c(a, b, s)?;
            if cab == Complex64::new(0.0, 0.0) {
                continue;
            }
            let j = a + b - s;
            central += cab * cache.chi(j, c)?;
            for t in shifts(j, c) {
                *ops.entry(j + c - t).or_default() += cab * cache.c(j, c, t)?;
            }
        }
    }
    let operator = ops.values().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(JacobiResidual { operator, central: central.norm() })
}
