//! Scalar q-deformation primitives.
//!
//! `q` is real and positive. Every formula is evaluated through `h = ln q`
//! (`[x]_q = sinh(xh)/sinh(h)`), which keeps the values accurate as `q -> 1`.
//! Classical values are never produced by substituting `q = 1`; callers use
//! the dedicated classical paths instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KnError, Result};

/// The deformation parameter and the two OPE labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl DeformationParams {
    pub fn new(q: f64, alpha: f64, beta: f64) -> Result<Self> {
        check_q(q)?;
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(KnError::DegenerateParameter(format!("non-finite labels ({alpha}, {beta})")));
        }
        Ok(DeformationParams { q, alpha, beta })
    }

    pub fn log_q(&self) -> f64 {
        self.q.ln()
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q != 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(KnError::InvalidQ(q))
    }
}

/// `[x]_q` from `h = ln q` (h != 0).
pub(crate) fn bracket_from_log(x: f64, h: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (x * h).sinh() / h.sinh()
}

/// `[x]_q = (q^x - q^-x) / (q - q^-1)`.
pub fn q_bracket(x: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(bracket_from_log(x, q.ln()))
}

/// `κ = (q - q^-1) / ln q^2 = sinh(ln q) / ln q`.
pub fn kappa(q: f64) -> Result<f64> {
    check_q(q)?;
    let h = q.ln();
    Ok(h.sinh() / h)
}

/// `(z - w)^2_q = (z - w/q)(z - wq)`.
pub fn q_product_square(z: Complex64, w: Complex64, q: f64) -> Complex64 {
    (z - w / q) * (z - w * q)
}

/// `sinh(a x h)/sinh(a h) - x`, i.e. `[ax]_q/[a]_q - x`, without cancellation
/// when `h` is small.
fn ratio_excess(a: f64, x: f64, h: f64) -> f64 {
    let u = a * h;
    if (u * x).abs() < 0.5 && u.abs() < 0.5 {
        // sinh(xu) - x sinh(u) = sum_{j>=1} u^(2j+1) (x^(2j+1) - x) / (2j+1)!
        let (u2, x2) = (u * u, x * x);
        let mut upow = u * u2;
        let mut xpow = x * x2;
        let mut fact = 6.0;
        let mut sum = 0.0;
        for j in 1..40 {
            let term = upow * (xpow - x) / fact;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            upow *= u2;
            xpow *= x2;
            fact *= ((2 * j + 2) * (2 * j + 3)) as f64;
        }
        sum / u.sinh()
    } else {
        (u * x).sinh() / u.sinh() - x
    }
}

/// The central-term coefficient `C_m^{α,β}(g0; k)`: with `x = m - g0 + k` and
/// `A = (α+β)/2`,
///
/// `[(A+1)x]/[A+1] + [(A-1)x]/[A-1] - (q^(x-1) + q^(1-x)) [Ax]/[A]`.
///
/// Zero denominators are reported, not regularized.
pub fn c_coeff(m: f64, alpha: f64, beta: f64, g0: f64, k: i64, q: f64) -> Result<f64> {
    check_q(q)?;
    let a = 0.5 * (alpha + beta);
    for (label, val) in [("(α+β+2)/2", a + 1.0), ("(α+β-2)/2", a - 1.0), ("(α+β)/2", a)] {
        if val == 0.0 {
            return Err(KnError::DegenerateParameter(format!(
                "[{label}]_q vanishes for α = {alpha}, β = {beta}"
            )));
        }
    }
    let h = q.ln();
    let x = m - g0 + k as f64;
    // Each ratio is x + excess; the three x's combine to 2x(1 - cosh((x-1)h)).
    let y = (x - 1.0) * h;
    let half = (0.5 * y).sinh();
    Ok(ratio_excess(a + 1.0, x, h) + ratio_excess(a - 1.0, x, h)
        - 2.0 * y.cosh() * ratio_excess(a, x, h)
        - 4.0 * x * half * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_bracket(x: f64, q: f64) -> f64 {
        (q.powf(x) - q.powf(-x)) / (q - 1.0 / q)
    }

    fn naive_c(m: f64, alpha: f64, beta: f64, g0: f64, k: i64, q: f64) -> f64 {
        let x = m - g0 + k as f64;
        let a = (alpha + beta) / 2.0;
        naive_bracket((a + 1.0) * x, q) / naive_bracket(a + 1.0, q)
            + naive_bracket((a - 1.0) * x, q) / naive_bracket(a - 1.0, q)
            - (q.powf(x - 1.0) + q.powf(-(x - 1.0))) * naive_bracket(a * x, q) / naive_bracket(a, q)
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(q_bracket(0.0, 2.0).unwrap(), 0.0);
        assert!((q_bracket(1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((q_bracket(2.0, 2.0).unwrap() - 2.5).abs() < 1e-14);
        assert!(q_bracket(1.0, 1.0).is_err());
        assert!(q_bracket(1.0, -0.5).is_err());
    }

    #[test]
    fn kappa_examples() {
        let e = std::f64::consts::E;
        assert!((kappa(e).unwrap() - (e - 1.0 / e) / 2.0).abs() < 1e-15);
        assert!((kappa(e).unwrap() - 1.1752011936438014).abs() < 1e-15);
        // sinh(h)/h = 1 + h^2/6 + ...
        assert!((kappa(1.0 + 1e-6).unwrap() - 1.0).abs() < 1e-10);
        assert!((kappa(3.0).unwrap() - kappa(1.0 / 3.0).unwrap()).abs() < 1e-15);
        assert!(kappa(1.0).is_err());
    }

    #[test]
    fn q_product_examples() {
        let z = Complex64::new(0.3, -1.2);
        let w = Complex64::new(-0.7, 0.4);
        let sq = (z - w) * (z - w);
        assert!((q_product_square(z, w, 1.0) - sq).norm() < 1e-15);
        assert!(q_product_square(w * 1.7, w, 1.7).norm() < 1e-15);
        assert!(q_product_square(w / 1.7, w, 1.7).norm() < 1e-15);
    }

    #[test]
    fn c_coeff_examples() {
        // x = 0 kills every numerator bracket
        assert_eq!(c_coeff(1.5, 0.3, 0.4, 1.5, 0, 2.0).unwrap(), 0.0);
        // a vanishing denominator bracket is an error
        assert!(matches!(c_coeff(1.0, 1.0, 1.0, 0.0, 0, 2.0), Err(KnError::DegenerateParameter(_))));
        assert!(matches!(c_coeff(1.0, 0.5, -0.5, 0.0, 0, 2.0), Err(KnError::DegenerateParameter(_))));
        // α+β = 1 (A = 1/2), x = 1, q = 2: [3/2]/[3/2] + [-1/2]/[-1/2] - 2 [1/2]/[1/2] = 0
        assert!(c_coeff(1.0, 0.25, 0.75, 0.0, 0, 2.0).unwrap().abs() < 1e-15);
        // α+β = 1, x = 2, q = 2, hand expansion:
        // [3]_2/[3/2]_2 + [-1]_2/[-1/2]_2 - (2 + 1/2)[1]_2/[1/2]_2
        let b = |x: f64| (2f64.powf(x) - 2f64.powf(-x)) / 1.5;
        let hand = b(3.0) / b(1.5) + b(-1.0) / b(-0.5) - 2.5 * b(1.0) / b(0.5);
        assert!((c_coeff(2.0, 0.25, 0.75, 0.0, 0, 2.0).unwrap() - hand).abs() < 1e-13);
    }

    #[test]
    fn c_coeff_matches_naive_away_from_one() {
        for &q in &[1.5, 2.0, 0.6] {
            for k in 0..6 {
                for &(al, be) in &[(0.3, 0.7), (1.0, 0.5), (-2.5, 0.8)] {
                    let fast = c_coeff(0.5, al, be, 1.5, k, q).unwrap();
                    let slow = naive_c(0.5, al, be, 1.5, k, q);
                    assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow.abs()), "{fast} {slow}");
                }
            }
        }
    }

    #[test]
    fn c_coeff_classical_limit_is_cubic() {
        // C/h^2 -> -(2/3) x (x-1) (x-2); oracle: the naive formula at moderate h,
        // Richardson-extrapolated in h^2.
        for k in 0..7 {
            let x = 2.0 - 1.5 + k as f64;
            let at = |q: f64| naive_c(2.0, 0.3, 0.7, 1.5, k, q) / q.ln().powi(2);
            let (q1, q2) = (1.02f64, 1.01f64);
            let (h1, h2) = (q1.ln().powi(2), q2.ln().powi(2));
            let oracle = (at(q2) * h1 - at(q1) * h2) / (h1 - h2);
            let expect = -(2.0 / 3.0) * x * (x - 1.0) * (x - 2.0);
            assert!((oracle - expect).abs() < 1e-5 * (1.0 + expect.abs()));
            let q = 1.0 + 1e-4;
            let fast = c_coeff(2.0, 0.3, 0.7, 1.5, k, q).unwrap() / q.ln().powi(2);
            assert!((fast - expect).abs() < 1e-6 * (1.0 + expect.abs()), "{fast} vs {expect}");
        }
    }

    proptest! {
        #[test]
        fn bracket_symmetries(x in -6.0f64..6.0, q in 0.2f64..5.0) {
            prop_assume!((q - 1.0).abs() > 1e-3);
            let b = q_bracket(x, q).unwrap();
            prop_assert!((q_bracket(-x, q).unwrap() + b).abs() <= 1e-12 * (1.0 + b.abs()));
            prop_assert!((q_bracket(x, 1.0 / q).unwrap() - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn bracket_tends_to_x(x in 1u32..=6) {
            let x = x as f64;
            let err = |eps: f64| (q_bracket(x, 1.0 + eps).unwrap() - x).abs();
            prop_assert!(err(1e-4) < 1e-7 * x.powi(3));
            let ratio = err(1e-3) / err(5e-4);
            if x > 1.0 {
                prop_assert!((ratio - 4.0).abs() < 0.05);
            }
        }

        #[test]
        fn q_product_roots_swap(zr in -2.0f64..2.0, zi in -2.0f64..2.0, wr in -2.0f64..2.0, q in 0.3f64..3.0) {
            let z = Complex64::new(zr, zi);
            let w = Complex64::new(wr, 0.5);
            let a = q_product_square(z, w, q);
            let b = q_product_square(z, w, 1.0 / q);
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn c_coeff_inverse_q_invariant(k in 0i64..8, q in 1.05f64..3.0, al in -2.0f64..2.0, be in -2.0f64..2.0) {
            let r = c_coeff(1.5, al, be, 1.5, k, q);
            prop_assume!(r.is_ok());
            let a = r.unwrap();
            let b = c_coeff(1.5, al, be, 1.5, k, 1.0 / q).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
