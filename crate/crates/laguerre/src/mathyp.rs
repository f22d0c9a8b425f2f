//! Hypergeometric functions of one and two Hermitian matrix arguments.
//!
//! Two evaluation routes are kept side by side and cross-checked everywhere:
//! the truncated zonal series (always available) and the determinantal
//! reduction to scalar hypergeometric functions of the eigenvalues (requires
//! pairwise-distinct eigenvalues). The multivariate gamma enters all closed
//! forms only through ratios, which are computed in log space and are free of
//! the `pi^{m(m-1)/2}` convention factor.
//!
//! ```
//! use laguerre::herm::HermitianMatrix;
//! use laguerre::mathyp::hyp_matrix_series;
//! use laguerre::scalarfn::HypParams;
//!
//! // 0F0(X) = exp(tr X)
//! let x = HermitianMatrix::from_diag(&[1.0, 0.5]);
//! let v = hyp_matrix_series(&HypParams::new(&[], &[]), &x, 30).unwrap();
//! assert!((v.value - 1.5f64.exp()).abs() < 1e-12);
//! ```

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::herm::HermitianMatrix;
use crate::scalarfn::{hyp_scalar, HypParams};
use crate::symfun::{gen_pochhammer, partitions_of, schur, schur_jacobi_trudi, zonal, COINCIDENCE_THRESHOLD};

/// Default truncation weight for zonal series. At spectral radius <= 5 the
/// weight-30 shell is already far below 1e-12 of the value.
pub const DEFAULT_MAX_WEIGHT: usize = 30;

const LN_PI: f64 = 1.1447298858494002;

/// A truncated-series value plus the magnitude of the last weight shell as a
/// truncation-error estimate.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: f64,
    /// Absolute magnitude of the last summed weight shell.
    pub last_shell: f64,
    /// Set when the last shell exceeds `1e-10 * |value|`.
    pub truncated: bool,
}

/// Complex multivariate gamma `Gamma_m(a) = pi^{m(m-1)/2} prod_j Gamma(a-j+1)`.
/// Requires `a - j + 1 > 0` for all `j <= m`.
pub fn multigamma(m: usize, a: f64) -> Result<f64> {
    Ok(multigamma_log(m, a)?.exp())
}

pub fn multigamma_log(m: usize, a: f64) -> Result<f64> {
    let mut s = (m * (m - 1)) as f64 / 2.0 * LN_PI;
    for j in 1..=m {
        let arg = a - j as f64 + 1.0;
        if arg <= 0.0 {
            return Err(Error::Pole(format!(
                "Gamma_m({a}) pole: a - j + 1 = {arg} at j = {j}"
            )));
        }
        s += ln_gamma(arg);
    }
    Ok(s)
}

/// `Gamma_m(a) / Gamma_m(b)` in log space; the `pi` powers cancel.
pub fn multigamma_ratio(m: usize, a: f64, b: f64) -> Result<f64> {
    let mut s = 0.0;
    for j in 1..=m {
        let (aa, bb) = (a - j as f64 + 1.0, b - j as f64 + 1.0);
        if aa <= 0.0 || bb <= 0.0 {
            return Err(Error::Pole(format!(
                "Gamma_m ratio pole at j = {j}: arguments {aa}, {bb}"
            )));
        }
        s += ln_gamma(aa) - ln_gamma(bb);
    }
    Ok(s.exp())
}

fn pochhammer_ratio(params: &HypParams, tau: &crate::symfun::Partition) -> Result<f64> {
    let mut r = 1.0;
    for &a in &params.upper {
        r *= gen_pochhammer(a, tau)?;
    }
    for &b in &params.lower {
        let den = gen_pochhammer(b, tau)?;
        if den == 0.0 {
            return Err(Error::Pole(format!(
                "(b)_tau = 0 for lower parameter {b} at partition {:?}",
                tau.parts()
            )));
        }
        r /= den;
    }
    Ok(r)
}

/// Truncated zonal series
/// `pFq(a; b; X) = sum_{k<=max_weight} sum_{tau |- k} prod (a)_tau / prod (b)_tau * C_tau(X) / k!`.
pub fn hyp_matrix_series(
    params: &HypParams,
    x: &HermitianMatrix,
    max_weight: usize,
) -> Result<SeriesValue> {
    let eigs = x.eigenvalues().to_vec();
    hyp_matrix_series_eigs(params, &eigs, max_weight)
}

/// Same series evaluated directly on an eigenvalue tuple.
pub fn hyp_matrix_series_eigs(
    params: &HypParams,
    eigs: &[f64],
    max_weight: usize,
) -> Result<SeriesValue> {
    if params.upper.len() > params.lower.len() + 1 {
        return Err(Error::Divergence(format!(
            "{}F{} of matrix argument diverges",
            params.upper.len(),
            params.lower.len()
        )));
    }
    let m = eigs.len();
    let mut sum = 1.0f64; // empty partition
    let mut kfact = 1.0f64;
    let mut last_shell = 0.0f64;
    for k in 1..=max_weight {
        kfact *= k as f64;
        let mut shell = 0.0f64;
        for tau in partitions_of(k, m) {
            let coeff = pochhammer_ratio(params, &tau)?;
            if coeff == 0.0 {
                continue;
            }
            shell += coeff * zonal(&tau, eigs)? / kfact;
        }
        sum += shell;
        last_shell = shell.abs();
    }
    Ok(SeriesValue {
        value: sum,
        last_shell,
        truncated: last_shell > 1e-10 * sum.abs(),
    })
}

fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            v *= x[i] - x[j];
        }
    }
    v
}

fn check_distinct(eigs: &[f64]) -> Result<()> {
    let scale = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let mut gap = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in (i + 1)..eigs.len() {
            gap = gap.min((eigs[i] - eigs[j]).abs());
        }
    }
    if eigs.len() > 1 && gap < COINCIDENCE_THRESHOLD * scale {
        return Err(Error::CoincidentEigenvalues { min_gap: gap });
    }
    Ok(())
}

/// Gross-Richards determinantal evaluation:
/// `pFq(a; b; X) = det(x_i^{m-j} pFq(a - j + 1; b - j + 1; x_i)) / V(X)`,
/// column `j` using parameters shifted by `-j+1`.
pub fn hyp_matrix_det(params: &HypParams, x: &HermitianMatrix) -> Result<f64> {
    hyp_matrix_det_eigs(params, x.eigenvalues())
}

pub fn hyp_matrix_det_eigs(params: &HypParams, eigs: &[f64]) -> Result<f64> {
    let m = eigs.len();
    if m == 1 {
        return hyp_scalar(params, eigs[0]);
    }
    check_distinct(eigs)?;
    let mut cols: Vec<HypParams> = Vec::with_capacity(m);
    for j in 1..=m {
        cols.push(params.shifted(-(j as f64) + 1.0));
    }
    let mut mat = DMatrix::zeros(m, m);
    for (j, col_params) in cols.iter().enumerate() {
        for i in 0..m {
            let power = (m - j - 1) as i32;
            mat[(i, j)] = eigs[i].powi(power) * hyp_scalar(col_params, eigs[i])?;
        }
    }
    Ok(mat.determinant() / vandermonde(eigs))
}

/// Composite one-matrix evaluator: determinantal route for well-separated
/// eigenvalues, zonal series otherwise, so the result is continuous across
/// eigenvalue collisions.
pub fn hyp_matrix(params: &HypParams, x: &HermitianMatrix) -> Result<f64> {
    hyp_matrix_eigs(params, x.eigenvalues())
}

pub fn hyp_matrix_eigs(params: &HypParams, eigs: &[f64]) -> Result<f64> {
    match hyp_matrix_det_eigs(params, eigs) {
        Ok(v) => Ok(v),
        Err(Error::CoincidentEigenvalues { .. }) => {
            Ok(hyp_matrix_series_eigs(params, eigs, DEFAULT_MAX_WEIGHT)?.value)
        }
        Err(e) => Err(e),
    }
}

/// Evaluation route for the two-matrix-argument function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoMatrixMode {
    Series,
    Determinant,
}

/// Hypergeometric function of two matrix arguments.
///
/// Series mode sums `prod (a)_tau / prod (b)_tau * C_tau(B) C_tau(C) / (C_tau(I) k!)`.
/// Determinant mode requires every upper parameter of the form `m + mu` and
/// lower of the form `m + phi` with `mu, phi > -1`, and evaluates
///
/// `pi^{w(p-q-1)} Gamma_m(m) prod_i Gamma(mu_i+1)^m / Gamma_m(m+mu_i)
///  * prod_j Gamma_m(m+phi_j) / Gamma(phi_j+1)^m
///  * det(pFq(mu_i + 1; phi_j + 1; b_l c_f)) / (V(B) V(C))`
///
/// with `w = m(m-1)/2`. The assembled prefactor is pi-free once the
/// multivariate gammas are expanded, so it is built entirely in log space.
pub fn hyp_two_matrix(
    params: &HypParams,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    mode: TwoMatrixMode,
) -> Result<f64> {
    if b.dim() != c.dim() {
        return Err(Error::DimensionMismatch(format!(
            "two-matrix arguments must share a dimension: {} vs {}",
            b.dim(),
            c.dim()
        )));
    }
    match mode {
        TwoMatrixMode::Series => {
            hyp_two_matrix_series(params, b.eigenvalues(), c.eigenvalues(), DEFAULT_MAX_WEIGHT)
        }
        TwoMatrixMode::Determinant => {
            hyp_two_matrix_det(params, b.eigenvalues(), c.eigenvalues())
        }
    }
}

pub fn hyp_two_matrix_series(
    params: &HypParams,
    b_eigs: &[f64],
    c_eigs: &[f64],
    max_weight: usize,
) -> Result<f64> {
    let m = b_eigs.len();
    let ones = vec![1.0f64; m];
    let mut sum = 1.0f64;
    let mut kfact = 1.0f64;
    for k in 1..=max_weight {
        kfact *= k as f64;
        for tau in partitions_of(k, m) {
            let coeff = pochhammer_ratio(params, &tau)?;
            if coeff == 0.0 {
                continue;
            }
            let cb = zonal(&tau, b_eigs)?;
            let cc = zonal(&tau, c_eigs)?;
            let ci = zonal(&tau, &ones)?;
            sum += coeff * cb * cc / (ci * kfact);
        }
    }
    Ok(sum)
}

pub fn hyp_two_matrix_det(params: &HypParams, b_eigs: &[f64], c_eigs: &[f64]) -> Result<f64> {
    let m = b_eigs.len();
    check_distinct(b_eigs)?;
    check_distinct(c_eigs)?;
    let mf = m as f64;
    let w = (m * (m - 1)) as f64 / 2.0;
    let p = params.upper.len();
    let q = params.lower.len();
    let mut mus = Vec::with_capacity(p);
    for &a in &params.upper {
        let mu = a - mf;
        if mu <= -1.0 {
            return Err(Error::Domain(format!(
                "determinant mode needs upper parameters of the form m + mu with mu > -1, got {a}"
            )));
        }
        mus.push(mu);
    }
    let mut phis = Vec::with_capacity(q);
    for &bp in &params.lower {
        let phi = bp - mf;
        if phi <= -1.0 {
            return Err(Error::Domain(format!(
                "determinant mode needs lower parameters of the form m + phi with phi > -1, got {bp}"
            )));
        }
        phis.push(phi);
    }
    // log prefactor; the pi powers cancel exactly
    let mut lnpref = w * (p as f64 - q as f64 - 1.0) * LN_PI + multigamma_log(m, mf)?;
    for &mu in &mus {
        lnpref += mf * ln_gamma(mu + 1.0) - multigamma_log(m, mf + mu)?;
    }
    for &phi in &phis {
        lnpref += multigamma_log(m, mf + phi)? - mf * ln_gamma(phi + 1.0);
    }
    let scalar_params = HypParams {
        upper: mus.iter().map(|mu| mu + 1.0).collect(),
        lower: phis.iter().map(|phi| phi + 1.0).collect(),
    };
    let mut mat = DMatrix::zeros(m, m);
    for l in 0..m {
        for f in 0..m {
            mat[(l, f)] = hyp_scalar(&scalar_params, b_eigs[l] * c_eigs[f])?;
        }
    }
    Ok(lnpref.exp() * mat.determinant() / (vandermonde(b_eigs) * vandermonde(c_eigs)))
}

/// Residual of the Cauchy-Binet expansion of `det(f(b_i c_j))`:
///
/// `| det(f(b_i c_j)) / (V(B) V(C)) - sum_tau (prod_r e_{k_r + m - r}) s_tau(B) s_tau(C) |`
///
/// where `f(z) = sum_n e_n z^n` is given by its coefficient list. The sum is
/// exact once every index `k_r + m - r` beyond the coefficient list would
/// vanish, so partitions are enumerated up to
/// `min(max_weight, m * len(coeffs))`.
pub fn hua_identity_residual(
    f_coeffs: &[f64],
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    max_weight: usize,
) -> Result<f64> {
    let m = b.dim();
    if c.dim() != m {
        return Err(Error::DimensionMismatch("two-matrix arguments".into()));
    }
    let b_eigs = b.eigenvalues();
    let c_eigs = c.eigenvalues();
    check_distinct(b_eigs)?;
    check_distinct(c_eigs)?;
    let f = |z: f64| -> f64 {
        let mut acc = 0.0;
        let mut zn = 1.0;
        for &e in f_coeffs {
            acc += e * zn;
            zn *= z;
        }
        acc
    };
    let mat = DMatrix::from_fn(m, m, |i, j| f(b_eigs[i] * c_eigs[j]));
    let lhs = mat.determinant() / (vandermonde(b_eigs) * vandermonde(c_eigs));

    let coeff = |n: isize| -> f64 {
        if n < 0 || n as usize >= f_coeffs.len() {
            0.0
        } else {
            f_coeffs[n as usize]
        }
    };
    let mut rhs = 0.0;
    for k in 0..=max_weight {
        for tau in partitions_of(k, m) {
            let mut e_prod = 1.0;
            for r in 0..m {
                e_prod *= coeff(tau.part(r) as isize + (m - r - 1) as isize);
            }
            if e_prod == 0.0 {
                continue;
            }
            rhs += e_prod * schur(&tau, b_eigs)? * schur(&tau, c_eigs)?;
        }
    }
    Ok((lhs - rhs).abs())
}

/// `s_tau(1, ..., 1)` via Jacobi-Trudi — exposed for tests of the zonal
/// normalization against the classical `k! d_tau / (m)_tau` coefficient.
pub fn schur_at_identity(tau: &crate::symfun::Partition, m: usize) -> Result<f64> {
    schur_jacobi_trudi(tau, &vec![1.0; m])
}
