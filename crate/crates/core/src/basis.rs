//! Krichever-Novikov bases as local expansions at the two marked points.
//!
//! For each index `n` a [`BasisFamily`] stores the Laurent expansion of the
//! vector field `e_n`, the quadratic differential `Ω_n` and the function `A_n`
//! in the local coordinate at `P+`, and optionally at `P-`. At `P+` the
//! exponent laws are
//!
//! * `e_n = z^(n - g0 + 1) (1 + O(z))`
//! * `Ω_n = z^(-n + g0 - 2) (c + O(z))`
//!
//! and the pairing `res_{P+}(e_m Ω_n) = δ_{mn}` holds on the stored range.
//! At `P-` the same pairing carries a minus sign.
//!
//! Genus 0 uses the monomials `z^(n+1)`, `z^(-n-2)`, `z^n` at `P+ = 0` and
//! their images in `w = 1/z` at `P- = ∞`. Genus 1 uses the sigma-function
//! forms on the torus with `P± = ±z0` and local coordinates `z ∓ z0`:
//!
//! * `e_n ∝ σ(z-z0)^(n-1/2) σ(z+2n z0) / σ(z+z0)^(n+1/2)` for `n != -1/2`,
//!   and `e_{-1/2} ∝ σ(z)² / (σ(z+z0) σ(z-z0))`;
//! * `Ω_n ∝ σ(z-z0)^(-n-1/2) σ(z+z0)^(n-1/2) σ(z - 2n z0)` for `n != 1/2`;
//!   at `n = 1/2` that product degenerates to a constant, and `Ω_{1/2}` is
//!   taken as `e_{-1/2}(z) + const`, the constant fixed by the pairing with
//!   `e_{-1/2}`;
//! * `A_n` is the same function as `e_n` (on the torus `dz` trivializes both).
//!
//! Every element is scaled to leading coefficient 1 at `P+`, then `Ω_n` is
//! scaled so that the diagonal pairing is exactly 1.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Lattice, SigmaEvaluator};
use crate::error::{KnError, Result};
use crate::index::HalfInt;
use crate::numfmt::Float17;
use crate::series::{default_samples, series_from_samples, LaurentSeries, Tolerance};

/// Default number of coefficients per element.
pub const DEFAULT_DEPTH: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Point {
    Plus,
    Minus,
}

impl Point {
    /// Sign in front of the contour integral at this point.
    pub fn orientation(self) -> f64 {
        match self {
            Point::Plus => 1.0,
            Point::Minus => -1.0,
        }
    }
}

/// `g0 = 3g/2`.
pub fn g0_for_genus(genus: u32) -> HalfInt {
    HalfInt::from_twice(3 * genus as i64)
}

/// Integer exponent `x - y` for two indices of the same parity.
fn int_diff(x: HalfInt, y: HalfInt) -> Result<i64> {
    (x - y).as_int().ok_or(KnError::IndexParity(x))
}

/// Leading exponent of `e_n` at `P+`: `n - g0 + 1`.
pub fn e_leading_exponent(n: HalfInt, g0: HalfInt) -> Result<i64> {
    Ok(int_diff(n, g0)? + 1)
}

/// Leading exponent of `Ω_n` at `P+`: `-n + g0 - 2`.
pub fn omega_leading_exponent(n: HalfInt, g0: HalfInt) -> Result<i64> {
    Ok(int_diff(g0, n)? - 2)
}

#[derive(Debug, Clone)]
pub struct SurfaceSpec {
    genus: u32,
    z0: Complex64,
    lattice: Option<Lattice>,
}

impl SurfaceSpec {
    pub fn sphere() -> Self {
        SurfaceSpec { genus: 0, z0: Complex64::new(0.0, 0.0), lattice: None }
    }

    pub fn torus(lattice: Lattice, z0: Complex64) -> Result<Self> {
        if lattice.distance_to_lattice(z0) < 1e-6 || lattice.distance_to_lattice(2.0 * z0) < 1e-6 {
            return Err(KnError::InvalidSurface(format!("z0 = {z0}: z0 and 2z0 must not be lattice points")));
        }
        Ok(SurfaceSpec { genus: 1, z0, lattice: Some(lattice) })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn g0(&self) -> HalfInt {
        g0_for_genus(self.genus)
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    /// The moving zeros `±2n z0` must avoid `±z0` modulo the lattice for every
    /// index up to `bound`, i.e. `k z0` is never a period for `1 <= k <= 2|bound| + 2`.
    fn check_generic(&self, bound: HalfInt) -> Result<()> {
        let Some(lattice) = &self.lattice else { return Ok(()) };
        let kmax = bound.abs().twice() + 2;
        for k in 1..=kmax {
            if lattice.distance_to_lattice(k as f64 * self.z0) < 1e-6 {
                return Err(KnError::InvalidSurface(format!(
                    "{k}·z0 is a lattice point; basis elements up to index {bound} degenerate"
                )));
            }
        }
        Ok(())
    }
}

/// Indices `n` with `|n| <= bound` and the parity fixed by the genus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexSet {
    genus: u32,
    bound: HalfInt,
}

impl IndexSet {
    pub fn new(genus: u32, bound: HalfInt) -> Result<Self> {
        if !index_parity_ok(genus, bound) || bound < HalfInt::ZERO {
            return Err(KnError::IndexParity(bound));
        }
        Ok(IndexSet { genus, bound })
    }

    pub fn bound(&self) -> HalfInt {
        self.bound
    }

    pub fn indices(&self) -> Vec<HalfInt> {
        HalfInt::range_inclusive(-self.bound, self.bound).collect()
    }
}

/// Integral indices for even genus, half-odd for odd genus.
pub fn index_parity_ok(genus: u32, n: HalfInt) -> bool {
    n.is_integer() == (genus % 2 == 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisElement {
    pub e: LaurentSeries,
    pub omega: LaurentSeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<LaurentSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_minus: Option<LaurentSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_minus: Option<LaurentSeries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_minus: Option<LaurentSeries>,
}

/// Surface data carried along for output metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceInfo {
    pub tau: Option<Complex64>,
    pub omega1: Option<Complex64>,
    pub z0: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    genus: u32,
    g0: HalfInt,
    depth: usize,
    elements: BTreeMap<HalfInt, BasisElement>,
    surface: Option<SurfaceInfo>,
}

impl BasisFamily {
    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn g0(&self) -> HalfInt {
        self.g0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn surface(&self) -> Option<&SurfaceInfo> {
        self.surface.as_ref()
    }

    pub fn indices(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.elements.keys().copied()
    }

    pub fn contains(&self, n: HalfInt) -> bool {
        self.elements.contains_key(&n)
    }

    /// Largest `b` such that every parity-compatible index in `[-b, b]` is stored.
    pub fn symmetric_bound(&self) -> HalfInt {
        let start = if self.genus % 2 == 0 { HalfInt::ZERO } else { HalfInt::from_twice(1) };
        let mut b = start;
        if !(self.contains(b) && self.contains(-b)) {
            return HalfInt::from_twice(-1);
        }
        while self.contains(b + HalfInt::from_int(1)) && self.contains(-(b + HalfInt::from_int(1))) {
            b = b + HalfInt::from_int(1);
        }
        b
    }

    pub fn element(&self, n: HalfInt) -> Result<&BasisElement> {
        self.elements.get(&n).ok_or(KnError::MissingIndex { index: n })
    }

    pub fn e(&self, n: HalfInt, point: Point) -> Result<&LaurentSeries> {
        let el = self.element(n)?;
        match point {
            Point::Plus => Ok(&el.e),
            Point::Minus => el.e_minus.as_ref().ok_or(KnError::MissingSeries { index: n, what: "e at P-" }),
        }
    }

    pub fn omega(&self, n: HalfInt, point: Point) -> Result<&LaurentSeries> {
        let el = self.element(n)?;
        match point {
            Point::Plus => Ok(&el.omega),
            Point::Minus => {
                el.omega_minus.as_ref().ok_or(KnError::MissingSeries { index: n, what: "omega at P-" })
            }
        }
    }

    pub fn a(&self, n: HalfInt, point: Point) -> Result<&LaurentSeries> {
        let el = self.element(n)?;
        match point {
            Point::Plus => el.a.as_ref().ok_or(KnError::MissingSeries { index: n, what: "A" }),
            Point::Minus => el.a_minus.as_ref().ok_or(KnError::MissingSeries { index: n, what: "A at P-" }),
        }
    }

    pub fn has_minus(&self) -> bool {
        self.elements.values().all(|el| el.e_minus.is_some() && el.omega_minus.is_some())
    }

    /// `±res_{P±}(e_m Ω_n)`, which should be `δ_{mn}`.
    pub fn pairing(&self, m: HalfInt, n: HalfInt, point: Point) -> Result<Complex64> {
        let r = self.e(m, point)?.mul(self.omega(n, point)?).residue()?;
        Ok(r * point.orientation())
    }

    /// Rounding floor of `pairing(m, n)`: `16 ε Σ|a_k b_{-1-k}|` over the terms
    /// summed by the residue. Pairings of `e_{-n}` with `Ω_n` at `P+` cancel
    /// terms of size up to `10^8` at `n = 21/2`, so this floor, not the
    /// expansion error, limits what can be certified there.
    pub fn pairing_floor(&self, m: HalfInt, n: HalfInt, point: Point) -> Result<f64> {
        let e = self.e(m, point)?;
        let w = self.omega(n, point)?;
        let mut total = 0.0;
        for (i, a) in e.coeffs().iter().enumerate() {
            let j = -1 - (e.min_exp() + i as i64);
            if w.in_window(j) {
                total += a.norm() * w.coefficient(j)?.norm();
            }
        }
        Ok(16.0 * f64::EPSILON * total)
    }

    /// Largest `|pairing(m, n) - δ_{mn}|` over stored indices with `|m|, |n| <= bound`,
    /// with the worst pair.
    pub fn duality_residual(&self, bound: HalfInt, point: Point) -> Result<(f64, (HalfInt, HalfInt))> {
        let idx: Vec<HalfInt> = self.indices().filter(|n| n.abs() <= bound).collect();
        let mut worst = (0.0, (HalfInt::ZERO, HalfInt::ZERO));
        for &m in &idx {
            for &n in &idx {
                let delta = if m == n { 1.0 } else { 0.0 };
                let r = (self.pairing(m, n, point)? - delta).norm();
                if r > worst.0 || worst.0.is_nan() {
                    worst = (r, (m, n));
                }
            }
        }
        Ok(worst)
    }

    /// Check exponent laws at `P+` and duality at every available point, each
    /// pairing to `tol` plus its rounding floor.
    pub fn verify(&self, tol: Tolerance) -> Result<()> {
        for (&n, el) in &self.elements {
            if !index_parity_ok(self.genus, n) {
                return Err(KnError::IndexParity(n));
            }
            check_leading("e", n, &el.e, e_leading_exponent(n, self.g0)?, tol)?;
            check_leading("omega", n, &el.omega, omega_leading_exponent(n, self.g0)?, tol)?;
        }
        let points: &[Point] = if self.has_minus() { &[Point::Plus, Point::Minus] } else { &[Point::Plus] };
        for &point in points {
            for &m in self.elements.keys() {
                for &n in self.elements.keys() {
                    let delta = if m == n { 1.0 } else { 0.0 };
                    let residual = (self.pairing(m, n, point)? - delta).norm();
                    let allowed = tol.abs() + self.pairing_floor(m, n, point)?;
                    if !(residual <= allowed) {
                        return Err(KnError::Duality { m, n, residual, tol: allowed });
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_leading(what: &'static str, n: HalfInt, s: &LaurentSeries, expected: i64, tol: Tolerance) -> Result<()> {
    if s.min_exp() != expected {
        return Err(KnError::ExponentLaw {
            what,
            index: n,
            detail: format!("lowest exponent {} but expected {}", s.min_exp(), expected),
        });
    }
    let lead = s.coefficient(expected).map_err(|_| KnError::ExponentLaw {
        what,
        index: n,
        detail: "empty window".into(),
    })?;
    if tol.is_zero(lead) {
        return Err(KnError::ExponentLaw { what, index: n, detail: format!("leading coefficient {lead} vanishes") });
    }
    Ok(())
}

/// `e_n = z^(n+1)`, `Ω_n = z^(-n-2)`, `A_n = z^n` at `P+ = 0`; in `w = 1/z` at
/// `P-`: `e_n = -w^(1-n)`, `Ω_n = w^(n-2)`, `A_n = w^(-n)`.
pub fn build_genus0(indices: &IndexSet, depth: usize) -> Result<BasisFamily> {
    if indices.genus != 0 {
        return Err(KnError::InvalidSurface("build_genus0 needs genus 0 indices".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let mono = |k: i64, c: Complex64| LaurentSeries::monomial(k, c, k + depth as i64);
    let mut elements = BTreeMap::new();
    for n in indices.indices() {
        let k = n.as_int().ok_or(KnError::IndexParity(n))?;
        elements.insert(
            n,
            BasisElement {
                e: mono(k + 1, one),
                omega: mono(-k - 2, one),
                a: Some(mono(k, one)),
                e_minus: Some(mono(1 - k, -one)),
                omega_minus: Some(mono(k - 2, one)),
                a_minus: Some(mono(-k, one)),
            },
        );
    }
    Ok(BasisFamily { genus: 0, g0: HalfInt::ZERO, depth, elements, surface: None })
}

/// Sigma-function closed forms on the torus.
struct TorusForms {
    sigma: SigmaEvaluator,
    z0: Complex64,
}

impl TorusForms {
    fn s(&self, z: Complex64) -> Complex64 {
        self.sigma.sigma(z)
    }

    fn e_special(&self, z: Complex64) -> Complex64 {
        let z0 = self.z0;
        let s0 = self.s(z0);
        self.s(z).powi(2) / (self.s(z + z0) * self.s(z - z0)) * self.s(2.0 * z0) / (s0 * s0)
    }

    /// `e_n(z)`, also used for `A_n(z)`.
    fn e(&self, n: HalfInt, z: Complex64) -> Complex64 {
        if n == HalfInt::from_twice(-1) {
            return self.e_special(z);
        }
        let z0 = self.z0;
        let nf = n.to_f64();
        let lo = (n.twice() - 1) / 2; // n - 1/2
        let hi = (n.twice() + 1) / 2; // n + 1/2
        self.s(z - z0).powi(lo as i32) * self.s(z + 2.0 * nf * z0) / self.s(z + z0).powi(hi as i32)
            * self.s(2.0 * z0).powi(hi as i32)
            / self.s((2.0 * nf + 1.0) * z0)
    }

    /// Generic `Ω_n(z)`, `n != 1/2`.
    fn omega(&self, n: HalfInt, z: Complex64) -> Complex64 {
        let z0 = self.z0;
        let nf = n.to_f64();
        let p_plus = (-n.twice() - 1) / 2; // -n - 1/2
        let p_minus = (n.twice() - 1) / 2; // n - 1/2
        self.s(z - z0).powi(p_plus as i32) * self.s(z + z0).powi(p_minus as i32) * self.s(z - 2.0 * nf * z0)
    }
}

// Leading orders at P- of the torus forms.
fn e_order_minus(n: HalfInt) -> i64 {
    match n.twice() {
        1 => 0,
        -1 => -1,
        t => (-t - 1) / 2,
    }
}

fn omega_order_minus(n: HalfInt) -> i64 {
    match n.twice() {
        -1 => 0,
        1 => -1,
        t => (t - 1) / 2,
    }
}

/// Sampling radii: a fixed fraction of the distance from the expansion point
/// to the nearest actual pole. Poles sit on `z0 + L` and `-z0 + L`; seen from
/// either marked point, its own translates are `same` away and the other
/// point's are `other` away.
struct SamplingRadii {
    same: f64,
    other: f64,
}

impl SamplingRadii {
    /// `poles = (on z0 + L, on -z0 + L)`; returns the radii at `(P+, P-)`.
    fn for_poles(&self, poles: (bool, bool)) -> (f64, f64) {
        let near = |opposite: bool| if opposite { 0.5 * self.same.min(self.other) } else { 0.5 * self.same };
        (near(poles.1), near(poles.0))
    }
}

struct Expanded {
    plus: LaurentSeries,
    minus: LaurentSeries,
}

// Circles tried around each point, as multiples of the base radius.
const RADIUS_STEPS: [f64; 10] = [0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5];

/// Expansion of `f` with declared leading order, sampled on several circles.
///
/// The trapezoidal rule on radius `r` gets coefficient `k` to about
/// `ε M(r) r^-k`, with `M(r)` the size of `f t^-order` on the circle. Small
/// circles win for low `k` and large ones for high `k`, so each coefficient
/// is taken from the circle with the smallest such estimate.
fn expand_unit<F>(f: &F, center: Complex64, order: i64, depth: usize, radius: f64, tol: Tolerance) -> Result<LaurentSeries>
where
    F: Fn(Complex64) -> Complex64,
{
    // enough that aliasing from the widest circle, 3/4 of the way to the
    // nearest pole, stays below rounding
    let n_samples = default_samples(depth).max(256);
    let mut best: Vec<(f64, Complex64)> = vec![(f64::INFINITY, Complex64::new(0.0, 0.0)); depth];
    let mut base_size = 0.0;
    for step in RADIUS_STEPS {
        let r = radius * step;
        let size = std::cell::Cell::new(0.0f64);
        let g = |z: Complex64| {
            let v = f(z) * (z - center).powi(-(order as i32));
            size.set(size.get().max(v.norm()));
            v
        };
        let s = match series_from_samples(g, center, r, 0, depth as i64, n_samples) {
            Ok(s) => s,
            // the base circle must work; the others are optional
            Err(_) if step != 1.0 => continue,
            Err(e) => return Err(e),
        };
        let m = size.get();
        if step == 1.0 {
            base_size = m;
        }
        if !(m.is_finite() && m > 0.0) {
            continue;
        }
        for (k, &c) in s.coeffs().iter().enumerate() {
            let est = m * r.powi(-(k as i32));
            if est < best[k].0 {
                best[k] = (est, c);
            }
        }
    }
    if !(base_size.is_finite() && base_size > 0.0) {
        return Err(KnError::SingularityOnCircle { re: center.re, im: center.im });
    }
    // leading-order check relative to the size on the base circle
    let lead = best[0].1;
    if lead.norm() <= tol.abs() * base_size {
        return Err(KnError::WrongLeadingOrder { order, magnitude: lead.norm() / base_size });
    }
    Ok(LaurentSeries::new(order, best.into_iter().map(|(_, c)| c).collect()))
}

/// Expand one global function at both points, scaled to leading coefficient 1 at `P+`.
fn expand_pair<F>(f: F, z0: Complex64, orders: (i64, i64), depth: usize, radii: (f64, f64), tol: Tolerance) -> Result<Expanded>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let plus = expand_unit(&f, z0, orders.0, depth, radii.0, tol)?;
    let minus = expand_unit(&f, -z0, orders.1, depth, radii.1, tol)?;
    let lambda = Complex64::new(1.0, 0.0) / plus.coefficient(orders.0)?;
    Ok(Expanded { plus: plus.scale(lambda), minus: minus.scale(lambda) })
}

/// Genus-1 family from the sigma-function forms.
pub fn build_genus1(surface: &SurfaceSpec, indices: &IndexSet, depth: usize, tol: Tolerance) -> Result<BasisFamily> {
    let lattice = surface
        .lattice()
        .ok_or_else(|| KnError::InvalidSurface("genus-1 basis needs a lattice".into()))?
        .clone();
    if surface.genus() != 1 || indices.genus != 1 {
        return Err(KnError::InvalidSurface("build_genus1 needs a genus-1 surface and indices".into()));
    }
    surface.check_generic(indices.bound())?;
    let z0 = surface.z0();
    let g0 = surface.g0();
    let radii = SamplingRadii {
        same: lattice.min_period(),
        other: lattice.distance_to_lattice(2.0 * z0),
    };
    let forms = TorusForms { sigma: SigmaEvaluator::new(lattice.clone()), z0 };

    let idx = indices.indices();
    let special_e = HalfInt::from_twice(-1);
    let special_omega = HalfInt::from_twice(1);

    let e_series: Vec<(HalfInt, Expanded)> = idx
        .par_iter()
        .map(|&n| {
            let orders = (e_leading_exponent(n, g0)?, e_order_minus(n));
            let poles = if n == special_e { (true, true) } else { (n < special_omega, n > special_e) };
            let ex = expand_pair(|z| forms.e(n, z), z0, orders, depth, radii.for_poles(poles), tol)
                .map_err(|e| e.context(format!("expanding e_{n}")))?;
            Ok((n, ex))
        })
        .collect::<Result<_>>()?;
    let e_map: BTreeMap<HalfInt, Expanded> = e_series.into_iter().collect();

    // e_{-1/2} also feeds Ω_{1/2}; expand it even if the range somehow omits it.
    let e_special = match e_map.get(&special_e) {
        Some(ex) => Expanded { plus: ex.plus.clone(), minus: ex.minus.clone() },
        None => expand_pair(|z| forms.e(special_e, z), z0, (-1, -1), depth, radii.for_poles((true, true)), tol)?,
    };

    let omega_series: Vec<(HalfInt, Expanded)> = idx
        .par_iter()
        .map(|&n| {
            let ex = if n == special_omega {
                // e_{-1/2}(z) + α with res_{P+}(e_{-1/2} Ω) = 0
                let alpha = -e_special.plus.mul(&e_special.plus).residue()? / e_special.plus.residue()?;
                let shift = |s: &LaurentSeries| s.add(&LaurentSeries::monomial(0, alpha, s.trunc_order()));
                Expanded { plus: shift(&e_special.plus), minus: shift(&e_special.minus) }
            } else {
                let orders = (omega_leading_exponent(n, g0)?, omega_order_minus(n));
                let poles = (n > special_e, n < special_omega);
                expand_pair(|z| forms.omega(n, z), z0, orders, depth, radii.for_poles(poles), tol)
                    .map_err(|e| e.context(format!("expanding Ω_{n}")))?
            };
            // diagonal pairing -> 1
            let e = &e_map[&n];
            let diag = e.plus.mul(&ex.plus).residue()?;
            if tol.is_zero(diag) {
                return Err(KnError::Duality { m: n, n, residual: 1.0, tol: tol.abs() });
            }
            let lambda = Complex64::new(1.0, 0.0) / diag;
            Ok((n, Expanded { plus: ex.plus.scale(lambda), minus: ex.minus.scale(lambda) }))
        })
        .collect::<Result<_>>()?;

    let mut elements = BTreeMap::new();
    for (n, om) in omega_series {
        let e = &e_map[&n];
        elements.insert(
            n,
            BasisElement {
                e: e.plus.clone(),
                omega: om.plus,
                a: Some(e.plus.clone()),
                e_minus: Some(e.minus.clone()),
                omega_minus: Some(om.minus),
                a_minus: Some(e.minus.clone()),
            },
        );
    }
    let family = BasisFamily {
        genus: 1,
        g0,
        depth,
        elements,
        surface: Some(SurfaceInfo { tau: Some(lattice.tau()), omega1: Some(lattice.omega1()), z0: Some(z0) }),
    };
    family.verify(tol).map_err(|e| e.context("genus-1 basis construction"))?;
    Ok(family)
}

/// Build the family for a surface: monomials on the sphere, sigma forms on the torus.
pub fn build_family(surface: &SurfaceSpec, indices: &IndexSet, depth: usize, tol: Tolerance) -> Result<BasisFamily> {
    match surface.genus() {
        0 => build_genus0(indices, depth),
        1 => build_genus1(surface, indices, depth, tol),
        g => Err(KnError::InvalidSurface(format!("no built-in basis for genus {g}; use a basis file"))),
    }
}

/// `e⁺_{m,k}`: the coefficient of `z^(m - g0 + 1 + k)` in `e_m` at `P+`.
pub fn extract_e_coeff(family: &BasisFamily, m: HalfInt, k: i64) -> Result<Complex64> {
    let e = family.e(m, Point::Plus)?;
    e.coefficient(e_leading_exponent(m, family.g0())? + k)
}

// ---- basis files ----

#[derive(Serialize)]
struct BasisFileOut<'a> {
    genus: u32,
    g0: HalfInt,
    depth: usize,
    indices: Vec<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<SurfaceJson>,
    elements: BTreeMap<String, &'a BasisElement>,
}

#[derive(Deserialize)]
struct BasisFileIn {
    genus: u32,
    g0: HalfInt,
    #[serde(default)]
    depth: Option<usize>,
    indices: Vec<HalfInt>,
    #[serde(default)]
    surface: Option<SurfaceJsonIn>,
    elements: BTreeMap<String, BasisElement>,
}

#[derive(Serialize)]
struct SurfaceJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega1: Option<[Float17; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z0: Option<[Float17; 2]>,
}

#[derive(Deserialize)]
struct SurfaceJsonIn {
    tau: Option<[f64; 2]>,
    omega1: Option<[f64; 2]>,
    z0: Option<[f64; 2]>,
}

fn c17(z: Complex64) -> [Float17; 2] {
    [Float17(z.re), Float17(z.im)]
}

impl BasisFamily {
    pub fn to_json(&self) -> Result<String> {
        let out = BasisFileOut {
            genus: self.genus,
            g0: self.g0,
            depth: self.depth,
            indices: self.elements.keys().copied().collect(),
            surface: self.surface.as_ref().map(|s| SurfaceJson {
                tau: s.tau.map(c17),
                omega1: s.omega1.map(c17),
                z0: s.z0.map(c17),
            }),
            elements: self.elements.iter().map(|(k, v)| (k.to_string(), v)).collect(),
        };
        serde_json::to_string_pretty(&out).map_err(|e| KnError::BasisFile(e.to_string()))
    }

    /// Parse a basis file and re-verify exponent laws and duality.
    pub fn from_json(text: &str, tol: Tolerance) -> Result<Self> {
        let raw: BasisFileIn = serde_json::from_str(text).map_err(|e| KnError::BasisFile(e.to_string()))?;
        if raw.g0 != g0_for_genus(raw.genus) {
            return Err(KnError::BasisFile(format!("g0 = {} but genus {} requires {}", raw.g0, raw.genus, g0_for_genus(raw.genus))));
        }
        let mut elements = BTreeMap::new();
        for (key, el) in raw.elements {
            let n: HalfInt = key.parse().map_err(KnError::BasisFile)?;
            elements.insert(n, el);
        }
        for n in &raw.indices {
            if !elements.contains_key(n) {
                return Err(KnError::BasisFile(format!("index {n} listed but has no element")));
            }
        }
        if elements.len() != raw.indices.len() {
            return Err(KnError::BasisFile("elements and indices disagree".into()));
        }
        let depth = raw.depth.unwrap_or_else(|| elements.values().map(|el| el.e.len()).min().unwrap_or(0));
        let surface = raw.surface.map(|s| SurfaceInfo {
            tau: s.tau.map(|[a, b]| Complex64::new(a, b)),
            omega1: s.omega1.map(|[a, b]| Complex64::new(a, b)),
            z0: s.z0.map(|[a, b]| Complex64::new(a, b)),
        });
        let family = BasisFamily { genus: raw.genus, g0: raw.g0, depth, elements, surface };
        family.verify(tol)?;
        Ok(family)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| KnError::BasisFile(format!("{}: {e}", path.display())))
    }
}

pub fn load_basis_file(path: &Path, tol: Tolerance) -> Result<BasisFamily> {
    let text =
        std::fs::read_to_string(path).map_err(|e| KnError::BasisFile(format!("{}: {e}", path.display())))?;
    BasisFamily::from_json(&text, tol)
}
