//! Weierstrass sigma function on a lattice and local expansions of
//! sigma-built expressions.
//!
//! `σ` is evaluated by reducing the argument to the lattice point nearest the
//! origin with the quasi-periodicity
//! `σ(z + w) = ε(w) σ(z) exp(η(w)(z + w/2))` and summing the Taylor series
//! about 0. The Taylor coefficients come from the Weierstrass `a_{m,n}`
//! recurrence driven by `g2`, `g3`; the invariants and quasi-periods come from
//! Eisenstein q-series.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{KnError, Result};
use crate::series::{default_samples, series_from_samples, LaurentSeries, Tolerance};

const MAX_Q_TERMS: usize = 20_000;
const MAX_SIGMA_DEGREE: usize = 161;

/// Period lattice `2ω1 Z + 2ω2 Z` with `Im(ω2/ω1) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    omega1: Complex64,
    omega2: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    g2: Complex64,
    g3: Complex64,
}

// Lambert sums sum_{n>=1} n^p x^n / (1 - x^n) for p = 1, 3, 5.
fn lambert_sums(x: Complex64) -> Result<[Complex64; 3]> {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    let mut xn = Complex64::new(1.0, 0.0);
    for n in 1..=MAX_Q_TERMS {
        xn *= x;
        let base = xn / (1.0 - xn);
        let nf = n as f64;
        let terms = [base * nf, base * nf.powi(3), base * nf.powi(5)];
        for (a, t) in acc.iter_mut().zip(terms) {
            *a += t;
        }
        if terms[2].norm() <= 1e-18 * (1.0 + acc[2].norm()) && n > 2 {
            return Ok(acc);
        }
    }
    Err(KnError::InvalidLattice("Eisenstein q-series did not converge (Im tau too small)".into()))
}

// (E2, E4, E6) at tau.
fn eisenstein(tau: Complex64) -> Result<[Complex64; 3]> {
    let nome2 = (Complex64::i() * 2.0 * PI * tau).exp();
    let [s1, s3, s5] = lambert_sums(nome2)?;
    Ok([1.0 - 24.0 * s1, 1.0 + 240.0 * s3, 1.0 - 504.0 * s5])
}

impl Lattice {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite()) || omega1.norm() == 0.0 {
            return Err(KnError::InvalidLattice("half-periods must be finite and nonzero".into()));
        }
        let tau = omega2 / omega1;
        if tau.im <= 0.0 {
            return Err(KnError::InvalidLattice(format!("Im(omega2/omega1) = {} must be positive", tau.im)));
        }
        let [e2, e4, e6] = eisenstein(tau)?;
        let eta1 = PI * PI * e2 / (12.0 * omega1);
        let g2 = PI.powi(4) * e4 / (12.0 * omega1.powi(4));
        let g3 = PI.powi(6) * e6 / (216.0 * omega1.powi(6));
        // η2 = ζ(ω2) from the basis (ω2, -ω1), an independent q-series.
        let [e2_swapped, _, _] = eisenstein(-omega1 / omega2)?;
        let eta2 = PI * PI * e2_swapped / (12.0 * omega2);
        Ok(Lattice { omega1, omega2, eta1, eta2, g2, g3 })
    }

    /// Half-periods `ω1 = 1`, `ω2 = τ`.
    pub fn from_tau(tau: Complex64) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), tau)
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn invariants(&self) -> (Complex64, Complex64) {
        (self.g2, self.g3)
    }

    /// `η1 ω2 - η2 ω1 - iπ/2`; zero up to rounding.
    pub fn legendre_residual(&self) -> f64 {
        (self.eta1 * self.omega2 - self.eta2 * self.omega1 - Complex64::new(0.0, PI / 2.0)).norm()
    }

    /// Lattice point `2mω1 + 2nω2`.
    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        2.0 * (m as f64 * self.omega1 + n as f64 * self.omega2)
    }

    /// Coordinates `(a, b)` with `z = 2aω1 + 2bω2`.
    fn coords(&self, z: Complex64) -> (f64, f64) {
        // solve z = 2a ω1 + 2b ω2 over the reals
        let (w1, w2) = (2.0 * self.omega1, 2.0 * self.omega2);
        let det = w1.re * w2.im - w1.im * w2.re;
        let a = (z.re * w2.im - z.im * w2.re) / det;
        let b = (w1.re * z.im - w1.im * z.re) / det;
        (a, b)
    }

    /// Lattice point nearest to `z`, as `(m, n)`.
    pub fn nearest(&self, z: Complex64) -> (i64, i64) {
        let (a, b) = self.coords(z);
        let (a0, b0) = (a.round() as i64, b.round() as i64);
        let mut best = (a0, b0);
        let mut best_d = f64::INFINITY;
        for da in -2..=2 {
            for db in -2..=2 {
                let (m, n) = (a0 + da, b0 + db);
                let d = (z - self.point(m, n)).norm();
                if d < best_d {
                    best_d = d;
                    best = (m, n);
                }
            }
        }
        best
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let (m, n) = self.nearest(z);
        (z - self.point(m, n)).norm()
    }

    /// Shortest nonzero period length.
    pub fn min_period(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                if (m, n) != (0, 0) {
                    best = best.min(self.point(m, n).norm());
                }
            }
        }
        best
    }
}

/// Evaluator for `σ(z)` on a fixed lattice.
#[derive(Debug, Clone)]
pub struct SigmaEvaluator {
    lattice: Lattice,
    // Taylor coefficients of σ(z)/z in powers of z^2, i.e. coeff of z^(2j+1).
    taylor: Vec<Complex64>,
}

impl SigmaEvaluator {
    pub fn new(lattice: Lattice) -> Self {
        let taylor = sigma_taylor(lattice.g2, lattice.g3, &lattice);
        SigmaEvaluator { lattice, taylor }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Taylor coefficients of `σ` about 0: entry `j` multiplies `z^(2j+1)`.
    pub fn taylor_coefficients(&self) -> &[Complex64] {
        &self.taylor
    }

    fn sigma_reduced(&self, z: Complex64) -> Complex64 {
        let z2 = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.taylor.iter().rev() {
            acc = acc * z2 + c;
        }
        acc * z
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        let (m, n) = self.lattice.nearest(z);
        if m == 0 && n == 0 {
            return self.sigma_reduced(z);
        }
        let w = self.lattice.point(m, n);
        let zr = z - w;
        let eta_w = 2.0 * (m as f64 * self.lattice.eta1 + n as f64 * self.lattice.eta2);
        // ε(w) = -1 unless w/2 is itself a period
        let sign = if (m + n + m * n) % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.sigma_reduced(zr) * (eta_w * (zr + 0.5 * w)).exp()
    }
}

// Weierstrass: σ(z) = Σ a_{m,n} (g2/2)^m (2 g3)^n z^(4m+6n+1) / (4m+6n+1)!, with
// a_{m,n} = 3(m+1) a_{m+1,n-1} + (16/3)(n+1) a_{m-2,n+1}
//           - (1/3)(2m+3n-1)(4m+6n-1) a_{m-1,n},   a_{0,0} = 1.
// We carry b_{m,n} = a_{m,n}/(4m+6n+1)! to stay clear of overflow.
fn sigma_taylor(g2: Complex64, g3: Complex64, lattice: &Lattice) -> Vec<Complex64> {
    use std::collections::HashMap;
    let max_weight = (MAX_SIGMA_DEGREE - 1) / 2;
    let mut b: HashMap<(i64, i64), f64> = HashMap::new();
    let get = |b: &HashMap<(i64, i64), f64>, m: i64, n: i64| -> f64 {
        if m < 0 || n < 0 {
            0.0
        } else {
            *b.get(&(m, n)).unwrap_or(&0.0)
        }
    };
    let x = g2 / 2.0;
    let y = 2.0 * g3;
    // reduced arguments stay within half the cell diagonal
    let reach = 0.5 * (lattice.point(1, 0).norm() + lattice.point(0, 1).norm()) + 1e-12;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); max_weight + 1];
    let mut small_run = 0;
    for w in 0..=max_weight as i64 {
        let d = (2 * w + 1) as f64;
        for n in 0..=w / 3 {
            let rem = w - 3 * n;
            if rem % 2 != 0 {
                continue;
            }
            let m = rem / 2;
            let val = if (m, n) == (0, 0) {
                1.0
            } else {
                let (mf, nf) = (m as f64, n as f64);
                let lead = 3.0 * (mf + 1.0) * get(&b, m + 1, n - 1)
                    + (16.0 / 3.0) * (nf + 1.0) * get(&b, m - 2, n + 1);
                let tail = (1.0 / 3.0) * (2.0 * mf + 3.0 * nf - 1.0) * (4.0 * mf + 6.0 * nf - 1.0)
                    * get(&b, m - 1, n);
                lead / (d * (d - 1.0)) - tail / (d * (d - 1.0) * (d - 2.0) * (d - 3.0))
            };
            b.insert((m, n), val);
            coeffs[w as usize] += val * x.powi(m as i32) * y.powi(n as i32);
        }
        // stop once the tail is negligible on the reduced cell
        if coeffs[w as usize].norm() * reach.powi(2 * w as i32 + 1) < 1e-20 && w > 4 {
            small_run += 1;
            if small_run >= 4 {
                coeffs.truncate(w as usize + 1);
                break;
            }
        } else {
            small_run = 0;
        }
    }
    coeffs
}

/// Laurent expansion of `f` in `(z - center)` with declared leading order.
///
/// Samples `(z - center)^(-leading) f(z)` on the circle of the given radius,
/// which must stay inside the region where that product is analytic, and
/// shifts the result. The window is `[leading, leading + depth)`.
pub fn expand_around<F>(
    f: F,
    center: Complex64,
    leading: i64,
    depth: usize,
    radius: f64,
    tol: Tolerance,
) -> Result<LaurentSeries>
where
    F: Fn(Complex64) -> Complex64,
{
    let g = |z: Complex64| {
        let t = z - center;
        f(z) * t.powi(-(leading as i32))
    };
    let scale = std::cell::Cell::new(0.0f64);
    let probe = |z: Complex64| {
        let v = g(z);
        scale.set(scale.get().max(v.norm()));
        v
    };
    let s = series_from_samples(probe, center, radius, 0, depth as i64, default_samples(depth))?;
    let lead = s.coefficient(0)?;
    if lead.norm() <= tol.abs() * scale.get().max(1.0) {
        return Err(KnError::WrongLeadingOrder { order: leading, magnitude: lead.norm() });
    }
    Ok(s.shift(leading))
}
