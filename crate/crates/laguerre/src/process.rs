//! Simulation of the Laguerre process `dX = sqrt(X) dB + dB* sqrt(X) + 2 delta I dt`.
//!
//! Three schemes:
//!
//! * `exact` — integer dimension `n`: simulate the underlying `n x m` complex
//!   Brownian matrix and read off `X = B* B`; marginals are exact at every
//!   grid time.
//! * `euler` — Euler-Maruyama on the matrix SDE for real `delta > m - 1`,
//!   with the PSD-clamped square root `sqrt(X+)` and re-Hermitization each step.
//! * `eigen` — Euler on the interacting eigenvalue SDE, with adaptive
//!   substepping when a proposed step would cross the Weyl-chamber ordering.
//!
//! Paths are independent work units: each path draws from its own
//! counter-based RNG stream keyed by `(seed, path_index)`, so a path set is
//! bit-identical for a given seed no matter how many workers run it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::herm::HermitianMatrix;
use crate::stats::{mean_and_se, McReport};

/// Eigenvalue floor below which a state counts as singular for `tr(X^{-1})`.
pub const SINGULARITY_FLOOR: f64 = 1e-12;
/// Maximum halving depth of the adaptive eigenvalue stepper.
pub const MAX_SUBSTEP_DEPTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Exact,
    Euler,
    Eigen,
}

/// Full description of a simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub m: usize,
    /// Dimension `delta`; must be a positive integer for the exact scheme and
    /// `> m - 1` for euler/eigen.
    pub delta: f64,
    pub x0: HermitianMatrix,
    pub t_end: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x0.dim() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "x0 is {}x{} but m = {}",
                self.x0.dim(),
                self.x0.dim(),
                self.m
            )));
        }
        if self.x0.min_eigenvalue() < -1e-12 {
            return Err(Error::NotPsd {
                min_eig: self.x0.min_eigenvalue(),
            });
        }
        match self.scheme {
            Scheme::Exact => {
                if self.delta < 1.0 || (self.delta - self.delta.round()).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "exact scheme needs a positive integer dimension, got {}",
                        self.delta
                    )));
                }
            }
            Scheme::Euler | Scheme::Eigen => {
                if self.delta <= self.m as f64 - 1.0 {
                    return Err(Error::Domain(format!(
                        "euler/eigen schemes need delta > m - 1 = {}, got {}",
                        self.m - 1,
                        self.delta
                    )));
                }
            }
        }
        if self.t_end < 0.0 || self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::Domain("t_end >= 0, n_steps >= 1, n_paths >= 1".into()));
        }
        Ok(())
    }
}

/// States along one path: full matrices or eigenvalue tuples.
#[derive(Debug, Clone)]
pub enum PathStates {
    Matrices(Vec<HermitianMatrix>),
    Eigenvalues(Vec<Vec<f64>>),
}

/// One discretized trajectory plus its RNG provenance.
#[derive(Debug, Clone)]
pub struct Path {
    pub times: Vec<f64>,
    pub states: PathStates,
    pub girsanov_log_weight: Option<f64>,
    pub rng_stream_id: u64,
}

/// Per-path RNG: one ChaCha stream per `(seed, path_index)` pair.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index.wrapping_add(1));
    rng
}

/// `n x m` matrix with i.i.d. standard complex Gaussian entries: real and
/// imaginary parts each standard normal, so each entry has total variance 2.
pub fn sample_complex_gaussian_matrix<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// An `n x m` factor `B0` with `B0* B0 = x0`: the PSD square root padded with
/// zero rows (`n >= m`), or its first `n` rows when `x0` has rank <= n.
fn exact_factor(n: usize, x0: &HermitianMatrix) -> Result<DMatrix<Complex64>> {
    let m = x0.dim();
    let min_eig = x0.min_eigenvalue();
    if min_eig < -1e-10 {
        return Err(Error::NotPsd { min_eig });
    }
    let sqrt = x0.sqrt_clamped();
    if n >= m {
        let mut b0 = DMatrix::zeros(n, m);
        b0.view_mut((0, 0), (m, m)).copy_from(sqrt.matrix());
        Ok(b0)
    } else {
        // rank(x0) must not exceed n = number of rows of the factor
        let eigs = x0.eigenvalues();
        let scale = eigs[0].abs().max(1.0);
        if eigs[n..].iter().any(|&l| l > 1e-10 * scale) {
            return Err(Error::Domain(format!(
                "x0 has rank > n = {n}; no n x m factor exists"
            )));
        }
        // sqrt(Lambda) restricted to the top-n eigendirections
        let sp = x0.spectrum();
        let b0 = DMatrix::from_fn(n, m, |i, j| {
            sp.vectors[(j, i)].conj() * Complex64::new(sp.eigenvalues[i].max(0.0).sqrt(), 0.0)
        });
        Ok(b0)
    }
}

/// Exact sample of the time-`t` marginal of `L(n, m, x0)`:
/// `B_t = B0 + sqrt(t) G`, return `B_t* B_t`.
pub fn sample_exact<R: Rng + ?Sized>(
    n: usize,
    x0: &HermitianMatrix,
    t: f64,
    rng: &mut R,
) -> Result<HermitianMatrix> {
    let m = x0.dim();
    let b0 = exact_factor(n, x0)?;
    if t == 0.0 {
        return Ok(HermitianMatrix::symmetrize(b0.adjoint() * b0));
    }
    let g = sample_complex_gaussian_matrix(n, m, rng);
    let bt = b0 + g * Complex64::new(t.sqrt(), 0.0);
    Ok(HermitianMatrix::symmetrize(bt.adjoint() * &bt))
}

/// One Euler-Maruyama step of the matrix SDE:
/// `X' = X + sqrt(X+) dB + dB* sqrt(X+) + 2 delta h I`, re-Hermitized.
/// `dB` must be scaled so each real component has variance `h`.
pub fn euler_step(
    x: &HermitianMatrix,
    delta: f64,
    h: f64,
    db: &DMatrix<Complex64>,
) -> HermitianMatrix {
    let m = x.dim();
    let s = x.sqrt_clamped();
    let diff = s.matrix() * db;
    let drift = DMatrix::from_diagonal_element(m, m, Complex64::new(2.0 * delta * h, 0.0));
    let next = x.matrix() + &diff + diff.adjoint() + drift;
    HermitianMatrix::symmetrize(next)
}

/// Drift of the eigenvalue SDE at `lambdas` (clamped interaction numerators).
fn eigen_drift(lambdas: &[f64], delta: f64) -> Vec<f64> {
    let m = lambdas.len();
    (0..m)
        .map(|i| {
            let mut inter = 0.0;
            for k in 0..m {
                if k != i {
                    let num = lambdas[i].max(0.0) + lambdas[k].max(0.0);
                    inter += num / (lambdas[i] - lambdas[k]);
                }
            }
            2.0 * (delta + inter)
        })
        .collect()
}

/// Single raw Euler proposal for the eigenvalue system; no ordering guard.
pub fn eigen_step(lambdas: &[f64], delta: f64, h: f64, dw: &[f64]) -> Vec<f64> {
    let drift = eigen_drift(lambdas, delta);
    lambdas
        .iter()
        .zip(dw)
        .zip(&drift)
        .map(|((&l, &w), &d)| l + 2.0 * l.max(0.0).sqrt() * w + d * h)
        .collect()
}

fn strictly_ordered(lambdas: &[f64]) -> bool {
    lambdas.windows(2).all(|w| w[0] > w[1]) && *lambdas.last().unwrap() >= 0.0
}

/// Adaptive eigenvalue step: when the plain Euler proposal leaves the Weyl
/// chamber the step is re-simulated as two half-steps with fresh noise, up to
/// [`MAX_SUBSTEP_DEPTH`] halvings. At the depth limit the proposal is clamped
/// into the chamber so the scheme stays total.
pub fn eigen_step_adaptive<R: Rng + ?Sized>(
    lambdas: &[f64],
    delta: f64,
    h: f64,
    dw: &[f64],
    rng: &mut R,
    depth: usize,
) -> Vec<f64> {
    let proposal = eigen_step(lambdas, delta, h, dw);
    if strictly_ordered(&proposal) {
        return proposal;
    }
    if depth == 0 {
        // clamp into the chamber: non-negative, strictly decreasing
        let mut out = proposal;
        let m = out.len();
        out[m - 1] = out[m - 1].max(0.0);
        for i in (0..m - 1).rev() {
            if out[i] <= out[i + 1] {
                out[i] = out[i + 1] + 1e-12 * (1.0 + out[i + 1].abs());
            }
        }
        return out;
    }
    let half = h / 2.0;
    let sub_dw = |rng: &mut R| -> Vec<f64> {
        (0..lambdas.len())
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                g * half.sqrt()
            })
            .collect()
    };
    let w1 = sub_dw(rng);
    let mid = eigen_step_adaptive(lambdas, delta, half, &w1, rng, depth - 1);
    let w2 = sub_dw(rng);
    eigen_step_adaptive(&mid, delta, half, &w2, rng, depth - 1)
}

/// Girsanov log-weight of a matrix path:
/// `(nu/2) log(det X_T / det X_0) - (nu^2/2) int_0^T tr(X_s^{-1}) ds`,
/// the time integral by the trapezoid rule on the path grid. Reweighting by
/// its exponential converts expectations under index `m` into index `m + nu`.
pub fn girsanov_log_weight(times: &[f64], states: &[HermitianMatrix], nu: f64) -> Result<f64> {
    assert_eq!(times.len(), states.len());
    if nu == 0.0 {
        return Ok(0.0);
    }
    let mut integral = 0.0;
    let mut prev = states[0].trace_inverse(SINGULARITY_FLOOR).map_err(|_| {
        Error::SingularState {
            step: 0,
            min_eig: states[0].min_eigenvalue(),
        }
    })?;
    for i in 1..states.len() {
        let cur = states[i]
            .trace_inverse(SINGULARITY_FLOOR)
            .map_err(|_| Error::SingularState {
                step: i,
                min_eig: states[i].min_eigenvalue(),
            })?;
        integral += 0.5 * (prev + cur) * (times[i] - times[i - 1]);
        prev = cur;
    }
    let log_det_ratio = states.last().unwrap().log_det()? - states[0].log_det()?;
    Ok(0.5 * nu * log_det_ratio - 0.5 * nu * nu * integral)
}

/// Terminal matrix state plus the Girsanov ingredients, streamed without
/// storing the whole path.
#[derive(Debug, Clone)]
pub struct EulerTerminal {
    pub state: HermitianMatrix,
    /// Trapezoid value of `int tr(X_s^{-1}) ds` (NaN if a state went singular).
    pub trace_inv_integral: f64,
    pub singular: bool,
}

/// Run `n_paths` Euler paths and map the terminal state (plus the running
/// `tr X^{-1}` integral) through `f`. Deterministic in `(seed, n_paths)`.
pub fn run_euler<T, F>(config: &SimConfig, f: F) -> Result<Vec<T>>
where
    F: Fn(&EulerTerminal) -> T + Sync,
    T: Send,
{
    config.validate()?;
    let h = config.t_end / config.n_steps as f64;
    let m = config.m;
    Ok((0..config.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(config.seed, p as u64);
            let mut x = config.x0.clone();
            let mut integral = 0.0;
            let mut singular = false;
            let mut prev_tr_inv = x.trace_inverse(SINGULARITY_FLOOR).unwrap_or(f64::NAN);
            for _ in 0..config.n_steps {
                let g = sample_complex_gaussian_matrix(m, m, &mut rng);
                let db = g * Complex64::new(h.sqrt(), 0.0);
                x = euler_step(&x, config.delta, h, &db);
                match x.trace_inverse(SINGULARITY_FLOOR) {
                    Ok(cur) => {
                        if prev_tr_inv.is_finite() {
                            integral += 0.5 * (prev_tr_inv + cur) * h;
                        }
                        prev_tr_inv = cur;
                    }
                    Err(_) => {
                        singular = true;
                        prev_tr_inv = f64::NAN;
                    }
                }
            }
            f(&EulerTerminal {
                state: x,
                trace_inv_integral: if singular { f64::NAN } else { integral },
                singular,
            })
        })
        .collect())
}

/// Terminal eigenvalue tuple of an eigen-scheme path plus the smallest gap
/// (and smallest bottom eigenvalue) seen along the way.
#[derive(Debug, Clone)]
pub struct EigenTerminal {
    pub lambdas: Vec<f64>,
    pub min_gap: f64,
    pub min_bottom: f64,
}

pub fn run_eigen(config: &SimConfig) -> Result<Vec<EigenTerminal>> {
    config.validate()?;
    let lambdas0 = config.x0.eigenvalues().to_vec();
    if !strictly_ordered(&lambdas0) {
        return Err(Error::Domain(
            "eigen scheme needs a strictly ordered nonnegative start".into(),
        ));
    }
    let h = config.t_end / config.n_steps as f64;
    let m = config.m;
    Ok((0..config.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(config.seed, p as u64);
            let mut l = lambdas0.clone();
            let mut min_gap = f64::INFINITY;
            let mut min_bottom = f64::INFINITY;
            for _ in 0..config.n_steps {
                let dw: Vec<f64> = (0..m)
                    .map(|_| {
                        let g: f64 = rng.sample(StandardNormal);
                        g * h.sqrt()
                    })
                    .collect();
                l = eigen_step_adaptive(&l, config.delta, h, &dw, &mut rng, MAX_SUBSTEP_DEPTH);
                for w in l.windows(2) {
                    min_gap = min_gap.min(w[0] - w[1]);
                }
                min_bottom = min_bottom.min(*l.last().unwrap());
            }
            EigenTerminal {
                lambdas: l,
                min_gap,
                min_bottom,
            }
        })
        .collect())
}

/// Full-path simulation (all schemes), storing every grid state.
///
/// ```
/// use laguerre::herm::HermitianMatrix;
/// use laguerre::process::{simulate, PathStates, Scheme, SimConfig};
///
/// let config = SimConfig {
///     m: 2,
///     delta: 2.0,
///     x0: HermitianMatrix::identity(2),
///     t_end: 1.0,
///     n_steps: 8,
///     n_paths: 400,
///     seed: 3,
///     scheme: Scheme::Exact,
/// };
/// let paths = simulate(&config).unwrap();
/// // E[tr X_t] = tr x0 + 2 delta m t = 2 + 8 = 10
/// let mean: f64 = paths
///     .iter()
///     .map(|p| match &p.states {
///         PathStates::Matrices(states) => states.last().unwrap().trace(),
///         PathStates::Eigenvalues(_) => unreachable!(),
///     })
///     .sum::<f64>()
///     / 400.0;
/// assert!((mean - 10.0).abs() < 1.0);
/// ```
pub fn simulate(config: &SimConfig) -> Result<Vec<Path>> {
    config.validate()?;
    let h = config.t_end / config.n_steps as f64;
    let times: Vec<f64> = (0..=config.n_steps).map(|i| i as f64 * h).collect();
    let m = config.m;
    match config.scheme {
        Scheme::Exact => {
            let n = config.delta.round() as usize;
            let b0 = exact_factor(n, &config.x0)?;
            (0..config.n_paths)
                .into_par_iter()
                .map(|p| {
                    let mut rng = path_rng(config.seed, p as u64);
                    let mut b = b0.clone();
                    let mut states =
                        vec![HermitianMatrix::symmetrize(b.adjoint() * &b)];
                    for _ in 0..config.n_steps {
                        let g = sample_complex_gaussian_matrix(n, m, &mut rng);
                        b += g * Complex64::new(h.sqrt(), 0.0);
                        states.push(HermitianMatrix::symmetrize(b.adjoint() * &b));
                    }
                    Ok(Path {
                        times: times.clone(),
                        states: PathStates::Matrices(states),
                        girsanov_log_weight: None,
                        rng_stream_id: p as u64,
                    })
                })
                .collect()
        }
        Scheme::Euler => (0..config.n_paths)
            .into_par_iter()
            .map(|p| {
                let mut rng = path_rng(config.seed, p as u64);
                let mut x = config.x0.clone();
                let mut states = vec![x.clone()];
                for _ in 0..config.n_steps {
                    let g = sample_complex_gaussian_matrix(m, m, &mut rng);
                    let db = g * Complex64::new(h.sqrt(), 0.0);
                    x = euler_step(&x, config.delta, h, &db);
                    states.push(x.clone());
                }
                Ok(Path {
                    times: times.clone(),
                    states: PathStates::Matrices(states),
                    girsanov_log_weight: None,
                    rng_stream_id: p as u64,
                })
            })
            .collect(),
        Scheme::Eigen => {
            let lambdas0 = config.x0.eigenvalues().to_vec();
            if !strictly_ordered(&lambdas0) {
                return Err(Error::Domain(
                    "eigen scheme needs a strictly ordered nonnegative start".into(),
                ));
            }
            (0..config.n_paths)
                .into_par_iter()
                .map(|p| {
                    let mut rng = path_rng(config.seed, p as u64);
                    let mut l = lambdas0.clone();
                    let mut states = vec![l.clone()];
                    for _ in 0..config.n_steps {
                        let dw: Vec<f64> = (0..m)
                            .map(|_| {
                                let g: f64 = rng.sample(StandardNormal);
                                g * h.sqrt()
                            })
                            .collect();
                        l = eigen_step_adaptive(&l, config.delta, h, &dw, &mut rng, MAX_SUBSTEP_DEPTH);
                        states.push(l.clone());
                    }
                    Ok(Path {
                        times: times.clone(),
                        states: PathStates::Eigenvalues(states),
                        girsanov_log_weight: None,
                        rng_stream_id: p as u64,
                    })
                })
                .collect()
        }
    }
}

/// Additivity check: `L(n, m, x0) + L(p, m, y0)` at time `t` has the Laplace
/// transform of `L(n+p, m, x0+y0)`. One report per `u` matrix.
#[allow(clippy::too_many_arguments)]
pub fn additivity_check(
    n: usize,
    p: usize,
    x0: &HermitianMatrix,
    y0: &HermitianMatrix,
    t: f64,
    n_paths: usize,
    seed: u64,
    u_list: &[HermitianMatrix],
) -> Result<Vec<McReport>> {
    let start = std::time::Instant::now();
    let sums: Vec<HermitianMatrix> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let xt = sample_exact(n, x0, t, &mut rng)?;
            let yt = sample_exact(p, y0, t, &mut rng)?;
            Ok(xt.add(&yt))
        })
        .collect::<Result<_>>()?;
    let x_sum = x0.add(y0);
    let delta = (n + p) as f64;
    u_list
        .iter()
        .map(|u| {
            let samples: Vec<f64> = sums.iter().map(|s| (-s.trace_product(u)).exp()).collect();
            let (mean, se) = mean_and_se(&samples);
            let closed = crate::laws::laplace_transform_parts(&x_sum, u, t, delta)?;
            Ok(McReport::new(
                format!("additivity n={n} p={p}"),
                mean,
                se,
                closed,
                n_paths,
                start.elapsed().as_secs_f64(),
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Path-set export: CSV and a compact binary format.
// ---------------------------------------------------------------------------

/// Binary header magic for exported path sets.
pub const EXPORT_MAGIC: &[u8; 4] = b"LGRP";
/// Binary format version.
pub const EXPORT_VERSION: u32 = 1;

/// CSV export: one row per `(path, time)` with the flattened state
/// (matrix entries as re/im pairs, or eigenvalues). 17 significant digits.
pub fn paths_to_csv(paths: &[Path]) -> String {
    let mut out = String::new();
    let matrix_cols = |m: usize| -> String {
        let mut hdr = String::new();
        for i in 0..m {
            for j in 0..m {
                hdr.push_str(&format!(",re_{i}{j},im_{i}{j}"));
            }
        }
        hdr
    };
    match paths.first().map(|p| &p.states) {
        Some(PathStates::Matrices(states)) => {
            let m = states[0].dim();
            out.push_str(&format!("path,time{}\n", matrix_cols(m)));
        }
        Some(PathStates::Eigenvalues(states)) => {
            let m = states[0].len();
            let cols: String = (0..m).map(|i| format!(",lambda_{i}")).collect();
            out.push_str(&format!("path,time{cols}\n"));
        }
        None => return out,
    }
    for path in paths {
        match &path.states {
            PathStates::Matrices(states) => {
                for (ti, state) in states.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{:.16e}",
                        path.rng_stream_id, path.times[ti]
                    ));
                    let m = state.dim();
                    for i in 0..m {
                        for j in 0..m {
                            let z = state.matrix()[(i, j)];
                            out.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
                        }
                    }
                    out.push('\n');
                }
            }
            PathStates::Eigenvalues(states) => {
                for (ti, l) in states.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{:.16e}",
                        path.rng_stream_id, path.times[ti]
                    ));
                    for v in l {
                        out.push_str(&format!(",{v:.16e}"));
                    }
                    out.push('\n');
                }
            }
        }
    }
    out
}

/// Compact binary export.
///
/// Layout (little endian): magic `LGRP`, version u32, m u32, n_steps u32,
/// n_paths u32, seed u64, scheme u8 (0 matrices / 1 eigenvalues), then per
/// path per grid time the state payload as f64s (matrix: m*m re/im pairs;
/// eigenvalues: m values).
pub fn paths_to_binary(paths: &[Path], m: usize, n_steps: usize, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(EXPORT_MAGIC);
    out.extend_from_slice(&EXPORT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(n_steps as u32).to_le_bytes());
    out.extend_from_slice(&(paths.len() as u32).to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    let scheme_tag = match paths.first().map(|p| &p.states) {
        Some(PathStates::Eigenvalues(_)) => 1u8,
        _ => 0u8,
    };
    out.push(scheme_tag);
    for path in paths {
        match &path.states {
            PathStates::Matrices(states) => {
                for state in states {
                    let mm = state.dim();
                    for i in 0..mm {
                        for j in 0..mm {
                            let z = state.matrix()[(i, j)];
                            out.extend_from_slice(&z.re.to_le_bytes());
                            out.extend_from_slice(&z.im.to_le_bytes());
                        }
                    }
                }
            }
            PathStates::Eigenvalues(states) => {
                for l in states {
                    for v in l {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
            }
        }
    }
    out
}

/// Parse a binary export back into paths (round-trip of [`paths_to_binary`]).
pub fn paths_from_binary(bytes: &[u8]) -> Result<(Vec<Path>, u64)> {
    let fail = |msg: &str| Error::Format(msg.to_string());
    if bytes.len() < 29 || &bytes[0..4] != EXPORT_MAGIC {
        return Err(fail("bad magic"));
    }
    let rd_u32 = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = rd_u32(4);
    if version != EXPORT_VERSION {
        return Err(fail("unsupported version"));
    }
    let m = rd_u32(8) as usize;
    let n_steps = rd_u32(12) as usize;
    let n_paths = rd_u32(16) as usize;
    let seed = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let scheme_tag = bytes[28];
    let per_state = if scheme_tag == 0 { 2 * m * m } else { m };
    let need = 29 + n_paths * (n_steps + 1) * per_state * 8;
    if bytes.len() != need {
        return Err(fail("truncated payload"));
    }
    let mut off = 29;
    let mut rd_f64 = || -> f64 {
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let times: Vec<f64> = (0..=n_steps).map(|i| i as f64).collect(); // grid indices; times not stored
    let mut paths = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        if scheme_tag == 0 {
            let mut states = Vec::with_capacity(n_steps + 1);
            for _ in 0..=n_steps {
                let mat = DMatrix::from_fn(m, m, |_, _| Complex64::new(0.0, 0.0));
                let mut mat = mat;
                for i in 0..m {
                    for j in 0..m {
                        let re = rd_f64();
                        let im = rd_f64();
                        mat[(i, j)] = Complex64::new(re, im);
                    }
                }
                states.push(HermitianMatrix::symmetrize(mat));
            }
            paths.push(Path {
                times: times.clone(),
                states: PathStates::Matrices(states),
                girsanov_log_weight: None,
                rng_stream_id: p as u64,
            });
        } else {
            let mut states = Vec::with_capacity(n_steps + 1);
            for _ in 0..=n_steps {
                states.push((0..m).map(|_| rd_f64()).collect());
            }
            paths.push(Path {
                times: times.clone(),
                states: PathStates::Eigenvalues(states),
                girsanov_log_weight: None,
                rng_stream_id: p as u64,
            });
        }
    }
    Ok((paths, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_matrix_moments() {
        let mut rng = path_rng(123, 0);
        let n = 100_000;
        let mut sum_re = 0.0;
        let mut sum_re2 = 0.0;
        let mut sum_zz = Complex64::new(0.0, 0.0);
        let mut sum_zzbar = 0.0;
        for _ in 0..n {
            let g = sample_complex_gaussian_matrix(1, 1, &mut rng);
            let z = g[(0, 0)];
            sum_re += z.re;
            sum_re2 += z.re * z.re;
            sum_zz += z * z;
            sum_zzbar += (z * z.conj()).re;
        }
        let nf = n as f64;
        assert!((sum_re / nf).abs() < 0.02);
        assert!((sum_re2 / nf - 1.0).abs() < 0.02, "re variance");
        // complex pseudo-variance E[z z] = 0
        assert!((sum_zz / nf).norm() < 0.02, "pseudo-variance");
        // E[z conj(z)] = 2
        assert!((sum_zzbar / nf - 2.0).abs() < 0.04, "total variance");
    }

    #[test]
    fn exact_sample_at_zero_time_returns_x0() {
        let x0 = HermitianMatrix::from_diag(&[2.0, 1.0]);
        let mut rng = path_rng(1, 0);
        let x = sample_exact(2, &x0, 0.0, &mut rng).unwrap();
        for (a, b) in x.eigenvalues().iter().zip(x0.eigenvalues()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_sample_laplace_transform() {
        // x0 = 0, u = I/2, t = 1, n = m = 2: E[exp(-tr(uX))] = 1/16
        let x0 = HermitianMatrix::zero(2);
        let u = HermitianMatrix::scaled_identity(2, 0.5);
        let n_paths = 200_000;
        let samples: Vec<f64> = (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = path_rng(7, i as u64);
                let x = sample_exact(2, &x0, 1.0, &mut rng).unwrap();
                (-x.trace_product(&u)).exp()
            })
            .collect();
        let (mean, se) = mean_and_se(&samples);
        assert!(
            (mean - 1.0 / 16.0).abs() <= 3.0 * se,
            "mean {mean}, se {se}"
        );
    }

    #[test]
    fn exact_sample_m1_is_gamma() {
        // m=1, x0=0: X_t / (2t) ~ Gamma(n)
        use crate::stats::{ks_p_value, ks_statistic};
        use statrs::distribution::{ContinuousCDF, Gamma};
        let x0 = HermitianMatrix::zero(1);
        let t = 0.7;
        let n = 3usize;
        let samples: Vec<f64> = (0..10_000)
            .map(|i| {
                let mut rng = path_rng(11, i as u64);
                sample_exact(n, &x0, t, &mut rng).unwrap().trace() / (2.0 * t)
            })
            .collect();
        let gamma = Gamma::new(n as f64, 1.0).unwrap();
        let d = ks_statistic(&samples, |x| gamma.cdf(x));
        assert!(ks_p_value(d, samples.len()) > 0.01);
    }

    #[test]
    fn euler_step_pure_drift() {
        let x = HermitianMatrix::from_diag(&[1.0, 2.0]);
        let db = DMatrix::zeros(2, 2);
        let next = euler_step(&x, 2.0, 0.1, &db);
        // X + 2 delta h I
        let eigs = next.eigenvalues();
        assert_relative_eq!(eigs[0], 2.4, max_relative = 1e-12);
        assert_relative_eq!(eigs[1], 1.4, max_relative = 1e-12);
    }

    #[test]
    fn euler_step_from_zero_ignores_noise() {
        let x = HermitianMatrix::zero(2);
        let mut rng = path_rng(5, 0);
        let db = sample_complex_gaussian_matrix(2, 2, &mut rng);
        let next = euler_step(&x, 1.5, 0.01, &db);
        for &l in next.eigenvalues() {
            assert_relative_eq!(l, 2.0 * 1.5 * 0.01, max_relative = 1e-12);
        }
    }

    #[test]
    fn euler_trace_mean_matches_drift() {
        // E[tr X_t] = tr x0 + 2 delta m t
        let config = SimConfig {
            m: 2,
            delta: 2.0,
            x0: HermitianMatrix::identity(2),
            t_end: 1.0,
            n_steps: 100,
            n_paths: 10_000,
            seed: 42,
            scheme: Scheme::Euler,
        };
        let traces = run_euler(&config, |t| t.state.trace()).unwrap();
        let (mean, se) = mean_and_se(&traces);
        assert!((mean - 10.0).abs() <= 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn eigen_step_deterministic_drift() {
        let l = eigen_step(&[2.0, 1.0], 2.0, 0.01, &[0.0, 0.0]);
        assert_relative_eq!(l[0], 2.1, max_relative = 1e-12);
        assert_relative_eq!(l[1], 0.98, max_relative = 1e-12);
    }

    #[test]
    fn eigen_step_m1_is_besq() {
        let l = eigen_step(&[1.0], 1.5, 0.01, &[0.1]);
        assert_relative_eq!(l[0], 1.0 + 2.0 * 0.1 + 2.0 * 1.5 * 0.01, max_relative = 1e-12);
    }

    #[test]
    fn eigen_trace_mean_matches_drift() {
        let config = SimConfig {
            m: 2,
            delta: 2.5,
            x0: HermitianMatrix::from_diag(&[2.0, 1.0]),
            t_end: 0.5,
            n_steps: 200,
            n_paths: 10_000,
            seed: 9,
            scheme: Scheme::Eigen,
        };
        let terminals = run_eigen(&config).unwrap();
        let sums: Vec<f64> = terminals.iter().map(|t| t.lambdas.iter().sum()).collect();
        let (mean, se) = mean_and_se(&sums);
        let expect = 3.0 + 2.0 * 2.5 * 2.0 * 0.5;
        assert!((mean - expect).abs() <= 4.0 * se, "mean {mean} expect {expect} se {se}");
    }

    #[test]
    fn eigen_paths_never_collide() {
        let config = SimConfig {
            m: 3,
            delta: 3.0,
            x0: HermitianMatrix::from_diag(&[3.0, 2.0, 1.0]),
            t_end: 0.5,
            n_steps: 200,
            n_paths: 500,
            seed: 4,
            scheme: Scheme::Eigen,
        };
        let terminals = run_eigen(&config).unwrap();
        for t in &terminals {
            assert!(t.min_gap > 0.0, "gap {}", t.min_gap);
        }
    }

    #[test]
    fn girsanov_zero_nu_is_zero() {
        let x = HermitianMatrix::identity(2);
        let states = vec![x.clone(), x.clone()];
        let w = girsanov_log_weight(&[0.0, 1.0], &states, 0.0).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn girsanov_single_step_closed_form() {
        // drift-only single step: weight matches direct arithmetic
        let x0 = HermitianMatrix::identity(2);
        let x1 = euler_step(&x0, 2.0, 0.5, &DMatrix::zeros(2, 2)); // = 3 I
        let nu = 0.5;
        let w = girsanov_log_weight(&[0.0, 0.5], &[x0.clone(), x1.clone()], nu).unwrap();
        let integral = 0.5 * (2.0 / 1.0 + 2.0 / 3.0) * 0.5;
        let expect = 0.5 * nu * (x1.log_det().unwrap() - x0.log_det().unwrap())
            - 0.5 * nu * nu * integral;
        assert_relative_eq!(w, expect, max_relative = 1e-12);
    }

    #[test]
    fn increment_covariance_matches_theory() {
        // <dX_ij, dX_kl> = 2 (X_il delta_kj + X_kj delta_il) h at a fixed state
        let x = HermitianMatrix::from_diag(&[2.0, 0.5]);
        let h = 0.01f64;
        let n = 100_000;
        let mut rng = path_rng(77, 0);
        // accumulate empirical covariance of (dX_00, dX_01, dX_11)
        let mut acc = vec![Complex64::new(0.0, 0.0); 9];
        for _ in 0..n {
            let g = sample_complex_gaussian_matrix(2, 2, &mut rng);
            let db = &g * Complex64::new(h.sqrt(), 0.0);
            let next = euler_step(&x, 2.0, h, &db);
            let d = next.matrix() - x.matrix();
            // remove deterministic drift
            let dx = |i: usize, j: usize| {
                d[(i, j)] - if i == j { Complex64::new(2.0 * 2.0 * h, 0.0) } else { Complex64::new(0.0, 0.0) }
            };
            let entries = [dx(0, 0), dx(0, 1), dx(1, 1)];
            for a in 0..3 {
                for b in 0..3 {
                    acc[3 * a + b] += entries[a] * entries[b].conj();
                }
            }
        }
        let nf = n as f64;
        // theory: cov(dX_ij, conj(dX_kl)) = cov(dX_ij, dX_lk)
        //       = 2 (X_ik delta_lj + X_lj delta_ik) h
        let xm = x.matrix();
        let theory = |i: usize, j: usize, k: usize, l: usize| {
            2.0 * (xm[(i, k)].re * if l == j { 1.0 } else { 0.0 }
                + xm[(l, j)].re * if i == k { 1.0 } else { 0.0 })
                * h
        };
        let idx = [(0usize, 0usize), (0, 1), (1, 1)];
        for a in 0..3 {
            for b in 0..3 {
                let (i, j) = idx[a];
                let (k, l) = idx[b];
                let th = theory(i, j, k, l);
                let emp = (acc[3 * a + b] / nf).re;
                // the covariance estimator's standard error is about
                // sqrt(var_a * var_b / n) ~ 2e-4 at these scales, so keep the
                // absolute floor at ~3.5 of those
                assert!(
                    (emp - th).abs() <= (0.05 * th.abs()).max(7e-4),
                    "({i}{j},{k}{l}): emp {emp}, theory {th}"
                );
            }
        }
    }

    #[test]
    fn determinism_across_worker_counts() {
        let config = SimConfig {
            m: 2,
            delta: 2.0,
            x0: HermitianMatrix::identity(2),
            t_end: 0.3,
            n_steps: 20,
            n_paths: 64,
            seed: 31,
            scheme: Scheme::Euler,
        };
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| simulate(&config)).unwrap();
        let b = pool4.install(|| simulate(&config)).unwrap();
        let csv_a = paths_to_csv(&a);
        let csv_b = paths_to_csv(&b);
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn binary_roundtrip() {
        let config = SimConfig {
            m: 2,
            delta: 2.0,
            x0: HermitianMatrix::identity(2),
            t_end: 0.2,
            n_steps: 5,
            n_paths: 3,
            seed: 1,
            scheme: Scheme::Euler,
        };
        let paths = simulate(&config).unwrap();
        let bin = paths_to_binary(&paths, 2, 5, 1);
        let (back, seed) = paths_from_binary(&bin).unwrap();
        assert_eq!(seed, 1);
        assert_eq!(back.len(), 3);
        if let (PathStates::Matrices(a), PathStates::Matrices(b)) =
            (&paths[0].states, &back[0].states)
        {
            for (s1, s2) in a.iter().zip(b) {
                assert_eq!(s1.matrix(), s2.matrix());
            }
        } else {
            panic!("wrong state kind");
        }
        assert!(paths_from_binary(&bin[..20]).is_err());
    }
}
