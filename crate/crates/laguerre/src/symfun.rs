//! Partitions, Schur functions, generalized Pochhammer symbols and zonal
//! polynomials.
//!
//! These are the combinatorial building blocks of every matrix-argument
//! hypergeometric series in this crate. The normalization of the zonal
//! polynomial is fixed by the trace-power identity
//! `sum_{tau |- k} C_tau(X) = (tr X)^k`, which holds for `C_tau = f_tau * s_tau`
//! with `f_tau` the number of standard Young tableaux of shape `tau`.
//!
//! ```
//! use laguerre::symfun::{partitions_of, zonal};
//!
//! // weight-2 zonal polynomials sum to (tr X)^2
//! let x = [1.0, 1.0];
//! let total: f64 = partitions_of(2, 2)
//!     .iter()
//!     .map(|tau| zonal(tau, &x).unwrap())
//!     .sum();
//! assert!((total - 4.0).abs() < 1e-12);
//! ```

use nalgebra::DMatrix;
use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Relative eigenvalue gap below which the bialternant ratio is abandoned
/// for the Jacobi-Trudi determinant.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-6;

/// Largest partition weight the Pochhammer/zonal machinery accepts.
/// Series truncation never needs more at the argument scales this crate
/// targets, and staying below this bound keeps all products inside f64 range.
pub const MAX_WEIGHT: usize = 40;

/// An integer partition: non-increasing positive parts.
///
/// Trailing zeros are accepted on input and stripped; `part(i)` reads as zero
/// past the stored length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Build a partition from a non-increasing list of parts.
    /// Panics if the parts increase; trailing zeros are dropped.
    pub fn new(parts: &[usize]) -> Self {
        assert!(
            parts.windows(2).all(|w| w[0] >= w[1]),
            "partition parts must be non-increasing: {parts:?}"
        );
        let len = parts.iter().take_while(|&&p| p > 0).count();
        Partition {
            parts: parts[..len].to_vec(),
        }
    }

    /// The empty partition (weight 0).
    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Sum of the parts.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    /// The i-th part (0-based), zero past the length.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Conjugate (transposed) partition.
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(0);
        let parts: Vec<usize> = (0..cols)
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }
}

/// All partitions of weight `k` with at most `m` parts, in reverse-lexicographic
/// order (largest first part first). The order is fixed so series truncation is
/// deterministic.
///
/// ```
/// use laguerre::symfun::partitions_of;
/// let ps = partitions_of(4, 2);
/// let parts: Vec<Vec<usize>> = ps.iter().map(|p| p.parts().to_vec()).collect();
/// assert_eq!(parts, vec![vec![4], vec![3, 1], vec![2, 2]]);
/// ```
pub fn partitions_of(k: usize, m: usize) -> Vec<Partition> {
    assert!(m >= 1, "m must be positive");
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: usize, max_part: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: current.clone(),
            });
            return;
        }
        if slots == 0 {
            return;
        }
        let hi = remaining.min(max_part);
        // smallest admissible first part: remaining spread over `slots` rows
        let lo = remaining.div_ceil(slots);
        for p in (lo..=hi).rev() {
            current.push(p);
            rec(remaining - p, p, slots - 1, current, out);
            current.pop();
        }
    }
    rec(k, k.max(1), m, &mut current, &mut out);
    out
}

/// Generalized Pochhammer symbol `(a)_tau = prod_i (a-i+1)(a-i+2)...(a-i+k_i)`,
/// computed as a product of rising factorials (never via gamma ratios).
///
/// The product is exact for any real `a`; in particular it is 0 for
/// negative-integer `a` once a row walks past the origin, which is what makes
/// hypergeometric series with negative-integer upper parameters terminate.
/// A zero in a *denominator* position is the caller's problem.
pub fn gen_pochhammer(a: f64, tau: &Partition) -> Result<f64> {
    let mut prod = 1.0;
    for (i, &ki) in tau.parts.iter().enumerate() {
        let base = a - i as f64; // a - (i+1) + 1 with 1-based row index
        for j in 0..ki {
            prod *= base + j as f64;
        }
    }
    Ok(prod)
}

/// Number of standard Young tableaux of shape `tau` (hook-length formula).
pub fn syt_count(tau: &Partition) -> u128 {
    assert!(!tau.is_empty(), "syt_count needs a nonempty partition");
    let k = tau.weight();
    assert!(k <= MAX_WEIGHT, "partition weight {k} exceeds {MAX_WEIGHT}");
    let conj = tau.conjugate();
    let mut num = BigUint::from(1u32);
    for i in 2..=k {
        num *= BigUint::from(i);
    }
    let mut den = BigUint::from(1u32);
    for (i, &ki) in tau.parts.iter().enumerate() {
        for j in 0..ki {
            let hook = (ki - j) + (conj.part(j) - i) - 1;
            den *= BigUint::from(hook);
        }
    }
    let f = num / den;
    let digits = f.to_u64_digits();
    match digits.len() {
        0 => 0,
        1 => digits[0] as u128,
        2 => digits[0] as u128 | ((digits[1] as u128) << 64),
        _ => panic!("SYT count overflows u128 (weight {k})"),
    }
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

/// Complete homogeneous symmetric polynomials `h_0..h_n` of `x`, via Newton's
/// identity `r h_r = sum_{i=1}^r p_i h_{r-i}` with power sums `p_i`.
fn complete_homogeneous(x: &[f64], n: usize) -> Vec<f64> {
    let mut power_sums = vec![0.0; n + 1];
    for r in 1..=n {
        power_sums[r] = x.iter().map(|&xi| xi.powi(r as i32)).sum();
    }
    let mut h = vec![0.0; n + 1];
    h[0] = 1.0;
    for r in 1..=n {
        let mut acc = 0.0;
        for i in 1..=r {
            acc += power_sums[i] * h[r - i];
        }
        h[r] = acc / r as f64;
    }
    h
}

/// Schur polynomial via the Jacobi-Trudi determinant
/// `s_tau = det(h_{tau_i - i + j})_{1<=i,j<=len}` (standard h-convention).
/// Polynomial in the `h_r`, hence stable at coincident eigenvalues.
pub fn schur_jacobi_trudi(tau: &Partition, x: &[f64]) -> Result<f64> {
    if tau.len() > x.len() {
        return Err(Error::DimensionMismatch(format!(
            "partition length {} exceeds number of variables {}",
            tau.len(),
            x.len()
        )));
    }
    if tau.is_empty() {
        return Ok(1.0);
    }
    let l = tau.len();
    let h = complete_homogeneous(x, tau.part(0) + l - 1);
    let mat = DMatrix::from_fn(l, l, |i, j| {
        let idx = tau.part(i) as isize - i as isize + j as isize;
        if idx < 0 {
            0.0
        } else {
            h[idx as usize]
        }
    });
    Ok(mat.determinant())
}

/// Schur polynomial via the bialternant ratio
/// `det(x_i^{tau_j + m - j}) / det(x_i^{m - j})`.
/// Requires pairwise-distinct entries (0/0 otherwise).
pub fn schur_bialternant(tau: &Partition, x: &[f64]) -> Result<f64> {
    if tau.len() > x.len() {
        return Err(Error::DimensionMismatch(format!(
            "partition length {} exceeds number of variables {}",
            tau.len(),
            x.len()
        )));
    }
    let m = x.len();
    let v = vandermonde(x);
    if v == 0.0 {
        return Err(Error::CoincidentEigenvalues { min_gap: 0.0 });
    }
    let num = DMatrix::from_fn(m, m, |i, j| {
        let e = tau.part(j) + m - j - 1;
        x[i].powi(e as i32)
    });
    Ok(num.determinant() / v)
}

fn min_gap(x: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            g = g.min((x[i] - x[j]).abs());
        }
    }
    g
}

/// Schur polynomial `s_tau(x)`.
///
/// Uses the bialternant ratio for well-separated entries and switches to the
/// Jacobi-Trudi determinant when the smallest gap drops below
/// [`COINCIDENCE_THRESHOLD`] times the spectral radius.
pub fn schur(tau: &Partition, x: &[f64]) -> Result<f64> {
    let scale = x.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    if x.len() < 2 || min_gap(x) < COINCIDENCE_THRESHOLD * scale {
        schur_jacobi_trudi(tau, x)
    } else {
        schur_bialternant(tau, x)
    }
}

/// Zonal polynomial `C_tau(X)` of a Hermitian matrix with eigenvalues `x`,
/// normalized so that `sum_{tau |- k} C_tau = (tr)^k`.
///
/// ```
/// use laguerre::symfun::{partitions_of, zonal};
///
/// let x = [1.2, 0.7, 0.3];
/// let sum: f64 = partitions_of(4, x.len())
///     .iter()
///     .map(|tau| zonal(tau, &x).unwrap())
///     .sum();
/// let tr: f64 = x.iter().sum();
/// assert!((sum - tr.powi(4)).abs() < 1e-12);
/// ```
pub fn zonal(tau: &Partition, x: &[f64]) -> Result<f64> {
    if tau.is_empty() {
        return Ok(1.0);
    }
    let f = syt_count(tau) as f64;
    Ok(f * schur(tau, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partitions_small_cases() {
        let p32: Vec<_> = partitions_of(3, 2).iter().map(|p| p.parts().to_vec()).collect();
        assert_eq!(p32, vec![vec![3], vec![2, 1]]);
        let p05 = partitions_of(0, 5);
        assert_eq!(p05, vec![Partition::empty()]);
        let p42: Vec<_> = partitions_of(4, 2).iter().map(|p| p.parts().to_vec()).collect();
        assert_eq!(p42, vec![vec![4], vec![3, 1], vec![2, 2]]);
    }

    #[test]
    fn partitions_count_matches_bruteforce() {
        // brute-force oracle: count non-increasing tuples by direct enumeration
        fn brute(k: usize, m: usize) -> usize {
            fn rec(rem: usize, max: usize, slots: usize) -> usize {
                if rem == 0 {
                    return 1;
                }
                if slots == 0 {
                    return 0;
                }
                (1..=rem.min(max)).map(|p| rec(rem - p, p, slots - 1)).sum()
            }
            rec(k, k.max(1), m)
        }
        for k in 0..=10 {
            for m in 1..=4 {
                assert_eq!(partitions_of(k, m).len(), brute(k, m), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn gen_pochhammer_values() {
        assert_eq!(gen_pochhammer(2.0, &Partition::new(&[1])).unwrap(), 2.0);
        assert_eq!(gen_pochhammer(3.0, &Partition::new(&[2, 1])).unwrap(), 24.0);
        assert_eq!(gen_pochhammer(2.0, &Partition::new(&[2, 2])).unwrap(), 12.0);
    }

    #[test]
    fn gen_pochhammer_single_row_is_rising_factorial() {
        let a = 1.7;
        for k in 1..=6usize {
            let tau = Partition::new(&[k]);
            let mut rf = 1.0;
            for j in 0..k {
                rf *= a + j as f64;
            }
            assert_relative_eq!(gen_pochhammer(a, &tau).unwrap(), rf, max_relative = 1e-14);
        }
    }

    #[test]
    fn gen_pochhammer_degenerate_cases() {
        // row 2 has base a - 1 = 0, so the product vanishes exactly
        assert_eq!(gen_pochhammer(1.0, &Partition::new(&[2, 1])).unwrap(), 0.0);
        // an unoccupied row never touches the origin
        assert_eq!(gen_pochhammer(1.0, &Partition::new(&[2])).unwrap(), 2.0);
        // negative-integer a: (-1)_{(1,1)} = (-1)(-2) = 2, the terminating case
        assert_eq!(gen_pochhammer(-1.0, &Partition::new(&[1, 1])).unwrap(), 2.0);
        assert_eq!(gen_pochhammer(-1.0, &Partition::new(&[2])).unwrap(), 0.0);
    }

    #[test]
    fn syt_counts() {
        assert_eq!(syt_count(&Partition::new(&[2, 1])), 2);
        assert_eq!(syt_count(&Partition::new(&[7])), 1);
        assert_eq!(syt_count(&Partition::new(&[2, 2])), 2);
        assert_eq!(syt_count(&Partition::new(&[3, 2])), 5);
        // sum of f^2 over shapes of n equals n!
        for n in 1..=8usize {
            let total: u128 = partitions_of(n, n)
                .iter()
                .map(|t| {
                    let f = syt_count(t);
                    f * f
                })
                .sum();
            let fact: u128 = (1..=n as u128).product();
            assert_eq!(total, fact, "n={n}");
        }
    }

    #[test]
    fn schur_elementary_cases() {
        let e2 = schur(&Partition::new(&[1, 1]), &[3.0, 2.0]).unwrap();
        assert_relative_eq!(e2, 6.0, max_relative = 1e-12);
        let h2 = schur(&Partition::new(&[2]), &[1.0, 1.0]).unwrap();
        assert_relative_eq!(h2, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn schur_21_matches_bialternant_oracle() {
        // independent oracle: expand det(x_i^{tau_j+m-j}) by hand for m=2,
        // tau=(2,1): det([[x1^3, x1],[x2^3, x2]]) / (x1-x2)
        // = x1 x2 (x1 + x2)
        let (x1, x2) = (1.5, 0.5);
        let expected = x1 * x2 * (x1 + x2);
        let got = schur(&Partition::new(&[2, 1]), &[x1, x2]).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
    }

    #[test]
    fn zonal_trace_power_identity() {
        let x = [1.0, 1.0];
        let total: f64 = partitions_of(2, 2)
            .iter()
            .map(|t| zonal(t, &x).unwrap())
            .sum();
        assert_relative_eq!(total, 4.0, max_relative = 1e-12);

        let x = [0.7, 0.3];
        let total: f64 = partitions_of(4, 2)
            .iter()
            .map(|t| zonal(t, &x).unwrap())
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zonal_weight_one_is_trace() {
        let x = [0.4, -1.3, 2.2];
        let c = zonal(&Partition::new(&[1]), &x).unwrap();
        assert_relative_eq!(c, x.iter().sum::<f64>(), max_relative = 1e-13);
    }

    #[test]
    fn branch_agreement_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let m = rng.random_range(2..=4usize);
            let mut x: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..3.0)).collect();
            // spread entries so the bialternant is well conditioned
            x.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if min_gap(&x) < 1e-3 {
                continue;
            }
            let k = rng.random_range(1..=6usize);
            for tau in partitions_of(k, m) {
                let a = schur_bialternant(&tau, &x).unwrap();
                let b = schur_jacobi_trudi(&tau, &x).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn schur_continuous_across_eigenvalue_crossing() {
        // walk x2 through x1; value must stay finite and continuous
        let tau = Partition::new(&[3, 1]);
        let x1 = 1.0;
        let mut prev = None;
        for i in 0..=200 {
            let x2 = 0.999 + 0.00001 * i as f64; // crosses 1.0
            let v = schur(&tau, &[x1, x2]).unwrap();
            assert!(v.is_finite());
            if let Some(p) = prev {
                assert!((v - p as f64).abs() < 1e-3, "jump at x2={x2}");
            }
            prev = Some(v);
        }
    }

    proptest! {
        #[test]
        fn schur_homogeneity(c in 0.2f64..3.0, x1 in 0.1f64..2.0, gap in 0.1f64..1.5, k in 1usize..5) {
            let x = [x1 + gap, x1];
            for tau in partitions_of(k, 2) {
                let lhs = schur(&tau, &[c * x[0], c * x[1]]).unwrap();
                let rhs = c.powi(tau.weight() as i32) * schur(&tau, &x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn zonal_normalization_random(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(1..=4usize);
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..2.0)).collect();
            let k = rng.random_range(1..=8usize);
            let total: f64 = partitions_of(k, m)
                .iter()
                .map(|t| zonal(t, &x).unwrap())
                .sum();
            let expect = x.iter().sum::<f64>().powi(k as i32);
            prop_assert!((total - expect).abs() <= 1e-10 * expect.abs().max(1e-10));
        }
    }
}
