//! Statistical verification helpers: Monte Carlo reports, Kolmogorov-Smirnov
//! and chi-square goodness-of-fit tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Outcome of one Monte Carlo check against a closed form.
///
/// `z_score = (estimate - closed_form) / std_error`; the check passes when
/// `|z| <= 3`.
#[derive(Debug, Clone)]
pub struct McReport {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub closed_form: f64,
    pub z_score: f64,
    pub passed: bool,
    pub n_paths: usize,
    pub wall_time: f64,
}

impl McReport {
    pub fn new(
        name: impl Into<String>,
        estimate: f64,
        std_error: f64,
        closed_form: f64,
        n_paths: usize,
        wall_time: f64,
    ) -> Self {
        let z_score = if std_error > 0.0 {
            (estimate - closed_form) / std_error
        } else if estimate == closed_form {
            0.0
        } else {
            f64::INFINITY
        };
        McReport {
            name: name.into(),
            estimate,
            std_error,
            closed_form,
            z_score,
            passed: z_score.abs() <= 3.0,
            n_paths,
            wall_time,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
/// The sample is sorted internally.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens finite-sample correction
/// `x = d (sqrt(n) + 0.12 + 0.11/sqrt(n))`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let x = d * (sqrt_n + 0.12 + 0.11 / sqrt_n);
    if x < 1e-3 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * kf * kf * x * x).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against expected probabilities
/// (which must sum to ~1; a remainder bin is the caller's responsibility).
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], total: u64) -> ChiSquareResult {
    assert_eq!(observed.len(), expected_probs.len());
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e < 1e-12 {
            // empty expected cell with empty observation contributes nothing
            assert!(o == 0, "observation in a zero-probability cell");
            continue;
        }
        stat += (o as f64 - e) * (o as f64 - e) / e;
        used += 1;
    }
    let dof = used.saturating_sub(1).max(1);
    let chi = ChiSquared::new(dof as f64).unwrap();
    ChiSquareResult {
        statistic: stat,
        dof,
        p_value: 1.0 - chi.cdf(stat),
    }
}
