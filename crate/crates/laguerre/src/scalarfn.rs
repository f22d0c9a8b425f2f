//! Scalar special functions: generalized hypergeometric series, modified
//! Bessel `I_nu` and the modified Struve function `L_2`.
//!
//! All series share one stopping rule: stop once the absolute term falls below
//! `1e-16 * |partial sum|` for three consecutive terms (a single tiny term can
//! be an accidental zero for special parameter values), with a hard cap of 500
//! terms.
//!
//! ```
//! use laguerre::scalarfn::{hyp_scalar, HypParams};
//!
//! // 1F1(1; 2; 1) = e - 1
//! let v = hyp_scalar(&HypParams::new(&[1.0], &[2.0]), 1.0).unwrap();
//! assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
//! ```

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Relative threshold of the series stopping rule.
pub const SERIES_TOL: f64 = 1e-16;
/// Consecutive sub-threshold terms required before stopping.
pub const SERIES_STREAK: usize = 3;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 500;

/// Upper and lower parameters of a (scalar or matrix) hypergeometric function.
#[derive(Debug, Clone, PartialEq)]
pub struct HypParams {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl HypParams {
    /// Panics if a lower parameter is a non-positive integer (every series
    /// term past that index would divide by zero).
    pub fn new(upper: &[f64], lower: &[f64]) -> Self {
        for &b in lower {
            assert!(
                !(b <= 0.0 && (b - b.round()).abs() < 1e-12),
                "lower parameter {b} is a non-positive integer"
            );
        }
        HypParams {
            upper: upper.to_vec(),
            lower: lower.to_vec(),
        }
    }

    /// Parameters with every entry shifted by `s` (used by the determinantal
    /// formulas, where column `j` evaluates at parameters shifted by `-j+1`).
    pub fn shifted(&self, s: f64) -> HypParams {
        HypParams {
            upper: self.upper.iter().map(|a| a + s).collect(),
            lower: self.lower.iter().map(|b| b + s).collect(),
        }
    }
}

/// Generalized hypergeometric series `pFq(a; b; z)` with scalar argument.
///
/// Converges for `p <= q` (all z) and for `p = q+1` on `|z| < 1`; diverges
/// otherwise for nonzero `z`.
pub fn hyp_scalar(params: &HypParams, z: f64) -> Result<f64> {
    let p = params.upper.len();
    let q = params.lower.len();
    if z == 0.0 {
        return Ok(1.0);
    }
    if p > q + 1 {
        return Err(Error::Divergence(format!(
            "{p}F{q} diverges for z = {z} != 0"
        )));
    }
    if p == q + 1 && z.abs() >= 1.0 {
        return Err(Error::Divergence(format!(
            "{p}F{q} requires |z| < 1, got {z}"
        )));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut streak = 0usize;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &a in &params.upper {
            ratio *= a + kf;
        }
        for &b in &params.lower {
            ratio /= b + kf;
        }
        term *= ratio;
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            streak += 1;
            if streak >= SERIES_STREAK {
                return Ok(sum);
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::NonConvergence {
        max_terms: SERIES_MAX_TERMS,
        last_term: term,
    })
}

/// Modified Bessel function of the first kind `I_nu(z)` via the defining
/// series `sum_k (z/2)^{2k+nu} / (k! Gamma(nu+k+1))`, for `nu > -1`, `z >= 0`.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    if nu <= -1.0 {
        return Err(Error::Domain(format!("bessel_i needs nu > -1, got {nu}")));
    }
    if z < 0.0 {
        return Err(Error::Domain(format!("bessel_i needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let half = z / 2.0;
    // leading term (z/2)^nu / Gamma(nu+1), then term ratio (z/2)^2 / (k (nu+k))
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let z2 = half * half;
    let mut streak = 0usize;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z2 / (kf * (nu + kf));
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            streak += 1;
            if streak >= SERIES_STREAK {
                return Ok(sum);
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::NonConvergence {
        max_terms: SERIES_MAX_TERMS,
        last_term: term,
    })
}

/// Modified Struve function `L_order(z)` by its power series
/// `sum_k (z/2)^{2k+order+1} / (Gamma(k+3/2) Gamma(k+order+3/2))`.
///
/// Only `order = 2` is supported; it is the only order the closed-form
/// Hartman-Watson density needs.
pub fn struve_l(order: i32, z: f64) -> Result<f64> {
    if order != 2 {
        return Err(Error::Unsupported(format!(
            "struve_l implements order 2 only, got {order}"
        )));
    }
    if z < 0.0 {
        return Err(Error::Domain(format!("struve_l needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let half = z / 2.0;
    let nu = order as f64;
    let mut term = ((nu + 1.0) * half.ln() - ln_gamma(1.5) - ln_gamma(nu + 1.5)).exp();
    let mut sum = term;
    let z2 = half * half;
    let mut streak = 0usize;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z2 / ((kf + 0.5) * (nu + kf + 0.5));
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs() {
            streak += 1;
            if streak >= SERIES_STREAK {
                return Ok(sum);
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::NonConvergence {
        max_terms: SERIES_MAX_TERMS,
        last_term: term,
    })
}

/// Both sides of the Kummer transformation
/// `1F1(a; b; -z) = e^{-z} 1F1(b-a; b; z)`, returned as a pair so tests can
/// assert them equal.
pub fn kummer_transform_check(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let lhs = hyp_scalar(&HypParams::new(&[a], &[b]), -z)?;
    let rhs = (-z).exp() * hyp_scalar(&HypParams::new(&[b - a], &[b]), z)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Brute-force series oracle with a fixed term count, independent of the
    /// adaptive stopping logic above.
    fn series_oracle(upper: &[f64], lower: &[f64], z: f64, terms: usize) -> f64 {
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 0..terms {
            let kf = k as f64;
            let mut r = z / (kf + 1.0);
            for &a in upper {
                r *= a + kf;
            }
            for &b in lower {
                r /= b + kf;
            }
            term *= r;
            sum += term;
        }
        sum
    }

    #[test]
    fn hyp_1f1_exponential_reduction() {
        let v = hyp_scalar(&HypParams::new(&[1.0], &[2.0]), 1.0).unwrap();
        assert_relative_eq!(v, 1f64.exp() - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn hyp_0f1_at_zero() {
        assert_eq!(hyp_scalar(&HypParams::new(&[], &[1.0]), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn hyp_1f2_matches_series_oracle() {
        let expect = series_oracle(&[0.5], &[1.0, 2.0], 1.0, 200);
        let v = hyp_scalar(&HypParams::new(&[0.5], &[1.0, 2.0]), 1.0).unwrap();
        assert_relative_eq!(v, expect, max_relative = 1e-14);
    }

    #[test]
    fn hyp_divergence_errors() {
        assert!(hyp_scalar(&HypParams::new(&[1.0, 1.0, 1.0], &[2.0]), 0.5).is_err());
        assert!(hyp_scalar(&HypParams::new(&[1.0, 1.0], &[2.0]), 1.5).is_err());
        // p = q+1 inside the disc is fine: 2F1(1,1;2;z) = -ln(1-z)/z
        let v = hyp_scalar(&HypParams::new(&[1.0, 1.0], &[2.0]), 0.5).unwrap();
        assert_relative_eq!(v, -f64::ln(0.5) / 0.5, max_relative = 1e-12);
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        // 30-term series oracle for I_0(1)
        let mut oracle = 0.0;
        for k in 0..30 {
            let mut kfact = 1.0f64;
            for i in 1..=k {
                kfact *= i as f64;
            }
            oracle += (0.5f64).powi(2 * k as i32) / (kfact * kfact);
        }
        assert_relative_eq!(bessel_i(0.0, 1.0).unwrap(), oracle, max_relative = 1e-15);
        assert_relative_eq!(bessel_i(0.0, 1.0).unwrap(), 1.2660658777520084, max_relative = 1e-14);
        // half-integer closed form I_{1/2}(z) = sqrt(2/(pi z)) sinh z
        let expect = (2.0 / (std::f64::consts::PI * 1.0)).sqrt() * 1f64.sinh();
        assert_relative_eq!(bessel_i(0.5, 1.0).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn struve_values() {
        assert_eq!(struve_l(2, 0.0).unwrap(), 0.0);
        assert!(struve_l(1, 1.0).is_err());
        // 40-term series oracle
        let oracle = |z: f64| {
            let mut s = 0.0;
            for k in 0..40 {
                let kf = k as f64;
                s += (z / 2.0).powi(2 * k + 3)
                    / ((ln_gamma(kf + 1.5) + ln_gamma(kf + 3.5)).exp());
            }
            s
        };
        assert_relative_eq!(struve_l(2, 1.0).unwrap(), oracle(1.0), max_relative = 1e-13);
        assert_relative_eq!(struve_l(2, 2.0).unwrap(), oracle(2.0), max_relative = 1e-13);
    }

    #[test]
    fn bessel_hypergeometric_bridge() {
        // I_nu(z) = (z/2)^nu / Gamma(nu+1) * 0F1(; nu+1; z^2/4)
        for &nu in &[0.0, 0.3, 1.0, 2.5] {
            for &z in &[0.1, 1.0, 5.0, 10.0] {
                let f = hyp_scalar(&HypParams::new(&[], &[nu + 1.0]), z * z / 4.0).unwrap();
                let bridge = ((z / 2.0f64).powf(nu) / ln_gamma(nu + 1.0).exp()) * f;
                assert_relative_eq!(bessel_i(nu, z).unwrap(), bridge, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn bessel_differentiation_identity() {
        // d/dx (x^nu I_nu(x)) = x^nu I_{nu-1}(x), central finite difference
        let h = 1e-5;
        for &nu in &[1.0, 1.5, 2.5] {
            for &x in &[0.5, 1.0, 3.0] {
                let g = |t: f64| t.powf(nu) * bessel_i(nu, t).unwrap();
                let fd = (g(x + h) - g(x - h)) / (2.0 * h);
                let exact = x.powf(nu) * bessel_i(nu - 1.0, x).unwrap();
                assert_relative_eq!(fd, exact, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn kummer_cases() {
        let (l, r) = kummer_transform_check(1.0, 2.0, 1.0).unwrap();
        let expect = (1.0 - (-1.0f64).exp()) / 1.0;
        assert_relative_eq!(l, expect, max_relative = 1e-13);
        assert_relative_eq!(r, expect, max_relative = 1e-13);

        let (l, r) = kummer_transform_check(0.5, 1.5, 2.0).unwrap();
        assert_relative_eq!(l, r, max_relative = 1e-12);

        // a = b: 1F1(a; a; -z) = e^{-z}
        let (l, r) = kummer_transform_check(1.3, 1.3, 0.7).unwrap();
        assert_relative_eq!(l, (-0.7f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(r, (-0.7f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn product_integral_matches_closed_form() {
        // int_0^1 x^{alpha-1} (1-x^2)^{beta-1} I_nu(c x) dx
        //   = 2^{-nu-1} c^nu Gamma(beta) Gamma((alpha+nu)/2)
        //     / (Gamma(beta + (alpha+nu)/2) Gamma(nu+1))
        //     * 1F2((alpha+nu)/2; beta + (alpha+nu)/2, nu+1; c^2/4)
        let quad = |alpha: f64, beta: f64, c: f64, nu: f64| {
            // composite Simpson on a fine grid; integrand is finite at both
            // ends for alpha >= 1, beta >= 1
            let n = 20000;
            let h = 1.0 / n as f64;
            let f = |x: f64| x.powf(alpha - 1.0) * (1.0 - x * x).powf(beta - 1.0) * bessel_i(nu, c * x).unwrap();
            let mut s = 0.0;
            for i in 0..n {
                let a = i as f64 * h;
                let b = a + h;
                s += (f(a) + 4.0 * f(0.5 * (a + b)) + f(b.min(1.0 - 1e-12))) * h / 6.0;
            }
            s
        };
        for &(alpha, beta, c, nu) in &[(1.0f64, 1.0f64, 2.0f64, 1.0f64), (2.0, 1.5, 1.0, 0.5)] {
            let g = (alpha + nu) / 2.0;
            let pref = 2f64.powf(-nu - 1.0) * c.powf(nu)
                * (ln_gamma(beta) + ln_gamma(g) - ln_gamma(beta + g) - ln_gamma(nu + 1.0)).exp();
            let closed = pref
                * hyp_scalar(&HypParams::new(&[g], &[beta + g, nu + 1.0]), c * c / 4.0).unwrap();
            let numeric = quad(alpha, beta, c, nu);
            assert_relative_eq!(numeric, closed, max_relative = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn contiguous_relation(a in 0.5f64..4.0, b in 0.5f64..4.0, z in -3.0f64..3.0) {
            // b 1F1(a,b,z) - b 1F1(a-1,b,z) = z 1F1(a,b+1,z)
            let f = |aa: f64, bb: f64| hyp_scalar(&HypParams::new(&[aa], &[bb]), z).unwrap();
            let lhs = b * f(a, b) - b * f(a - 1.0, b);
            let rhs = z * f(a, b + 1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn kummer_property(a in 0.2f64..3.0, extra in 0.1f64..3.0, z in 0.0f64..5.0) {
            let b = a + extra;
            let (l, r) = kummer_transform_check(a, b, z).unwrap();
            prop_assert!((l - r).abs() <= 1e-11 * (1.0 + l.abs()));
        }
    }
}
