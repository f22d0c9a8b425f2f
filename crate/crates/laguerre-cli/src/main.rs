//! `laguerre` — simulation, density tabulation, and Monte Carlo verification
//! for complex Wishart (Laguerre) matrix processes.
//!
//! Subcommands: `simulate`, `laplace-check`, `density`, `eigen-density`,
//! `hw`, `t0`, `verify-all`. Every numeric CSV cell is emitted with 17
//! significant digits; identical command + seed produces byte-identical
//! output (pass `--no-timestamp` when diffing).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

mod config;

use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use laguerre::herm::{random_unitary, HermitianMatrix};
use laguerre::laws::{
    self, eigen_semigroup, laplace_transform_parts, t0_tail, transition_density, LawQuery,
    HW_DENSITY_V_MIN,
};
use laguerre::process::{
    self, path_rng, paths_to_binary, paths_to_csv, run_euler, sample_exact, Scheme, SimConfig,
};
use laguerre::quad::integrate;
use laguerre::stats::{mean_and_se, McReport};
use laguerre::verify::{self, Budget};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "laguerre", version, about = "Laguerre (complex Wishart) matrix processes")]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the timestamp header line for byte-exact diffing
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Flat key=value config file; explicit flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (fallback: LAGUERRE_SEED environment variable, then 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Exact,
    Euler,
    Eigen,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BudgetArg {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths of the matrix or eigenvalue process
    Simulate(SimulateArgs),
    /// Monte Carlo check of the closed-form Laplace transform
    LaplaceCheck(LaplaceCheckArgs),
    /// Evaluate the matrix transition density
    Density(DensityArgs),
    /// Evaluate the eigenvalue semigroup kernel
    EigenDensity(EigenDensityArgs),
    /// Tabulate the m=2 generalized Hartman-Watson density
    Hw(HwArgs),
    /// Tail of the first hitting time of the singular cone
    T0(T0Args),
    /// Run the full verification campaign
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Start matrix: zero | I | c*I | eigenvalue list "a,b" (optional "@seed"
    /// suffix conjugates by a seeded random unitary)
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct LaplaceCheckArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    x: Option<String>,
    /// Laplace argument matrix (same syntax as --x)
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    /// Euler steps (used when delta is not a positive integer)
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
}

#[derive(Args)]
struct EigenDensityArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Start eigenvalues, strictly decreasing, e.g. "2,1"
    #[arg(long)]
    x: Option<String>,
    /// Target eigenvalues, strictly decreasing
    #[arg(long)]
    y: Option<String>,
}

#[derive(Args)]
struct HwArgs {
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    /// Index for the trailing Laplace round-trip row
    #[arg(long)]
    nu: Option<f64>,
    /// Evaluation grid lo:hi:n
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct T0Args {
    /// Start eigenvalues, e.g. "2,1"
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Optional grid lo:hi:n over t (overrides --t)
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct VerifyAllArgs {
    #[arg(long, value_enum)]
    budget: Option<BudgetArg>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

// ---------------------------------------------------------------------------

fn parse_eigs(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad eigenvalue {p:?}: {e}"))
        })
        .collect()
}

/// Spectrum-first matrix syntax: `zero`, `I`, `c*I`, or an eigenvalue list
/// `a,b,...` with an optional `@seed` suffix that conjugates the diagonal by
/// a seeded random unitary.
fn parse_matrix(spec: &str, m: usize) -> Result<HermitianMatrix> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("zero") || spec == "0" {
        return Ok(HermitianMatrix::zero(m));
    }
    if spec == "I" {
        return Ok(HermitianMatrix::identity(m));
    }
    if let Some(c) = spec.strip_suffix("*I") {
        let c: f64 = c.trim().parse().map_err(|e| anyhow!("bad scalar in {spec:?}: {e}"))?;
        return Ok(HermitianMatrix::scaled_identity(m, c));
    }
    let (eig_part, rot_seed) = match spec.split_once('@') {
        Some((e, s)) => (
            e,
            Some(s.trim().parse::<u64>().map_err(|e| anyhow!("bad rotation seed: {e}"))?),
        ),
        None => (spec, None),
    };
    let eigs = parse_eigs(eig_part)?;
    if eigs.len() != m {
        bail!("matrix spec {spec:?} has {} eigenvalues but m = {m}", eigs.len());
    }
    let diag = HermitianMatrix::from_diag(&eigs);
    Ok(match rot_seed {
        Some(seed) => {
            let mut rng = path_rng(seed, 0);
            diag.conjugate_by(&random_unitary(m, &mut rng))
        }
        None => diag,
    })
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:n, got {s:?}");
    }
    let lo: f64 = parts[0].parse().context("grid lo")?;
    let hi: f64 = parts[1].parse().context("grid hi")?;
    let n: usize = parts[2].parse().context("grid n")?;
    if n < 2 || hi <= lo {
        bail!("grid needs hi > lo and n >= 2");
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// 17 significant digits: round-trip-exact for f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Output {
    out: Option<PathBuf>,
    timestamp: bool,
}

impl Output {
    fn write_text(&self, body: &str) -> Result<()> {
        let mut content = String::new();
        if self.timestamp {
            let now = time::OffsetDateTime::now_utc()
                .format(&time::format_description::well_known::Rfc3339)
                .unwrap_or_else(|_| "unknown".into());
            content.push_str(&format!("# generated {now}\n"));
        }
        content.push_str(body);
        match &self.out {
            Some(path) => std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?,
            None => {
                std::io::stdout().write_all(content.as_bytes())?;
            }
        }
        Ok(())
    }

    fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes)
                .with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }
}

fn mc_report_csv(reports: &[McReport]) -> String {
    let mut s = String::from("name,estimate,std_error,closed_form,z_score,verdict,n_paths,wall_time\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_quote(&r.name),
            fmt(r.estimate),
            fmt(r.std_error),
            fmt(r.closed_form),
            fmt(r.z_score),
            r.verdict(),
            r.n_paths,
            fmt(r.wall_time),
        ));
    }
    s
}

fn mc_report_json(reports: &[McReport]) -> String {
    let rows: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "name": r.name,
                "estimate": r.estimate,
                "std_error": r.std_error,
                "closed_form": r.closed_form,
                "z_score": r.z_score,
                "verdict": r.verdict(),
                "n_paths": r.n_paths,
                "wall_time": r.wall_time,
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("json") + "\n"
}

// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    });
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let output = Output {
        out: cli.out.clone(),
        timestamp: !cli.no_timestamp,
    };
    let env_seed = std::env::var("LAGUERRE_SEED")
        .ok()
        .map(|s| s.parse::<u64>())
        .transpose()
        .context("LAGUERRE_SEED must be an unsigned integer")?;
    let base_seed = cli.seed.or(env_seed);

    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, &cli.config, base_seed, &output),
        Command::LaplaceCheck(args) => cmd_laplace_check(args, &cli.config, base_seed, &output),
        Command::Density(args) => cmd_density(args, &cli.config, &output),
        Command::EigenDensity(args) => cmd_eigen_density(args, &cli.config, &output),
        Command::Hw(args) => cmd_hw(args, &cli.config, &output),
        Command::T0(args) => cmd_t0(args, &cli.config, &output),
        Command::VerifyAll(args) => cmd_verify_all(args, &cli.config, base_seed, &output),
    }
}

fn load_config(path: &Option<PathBuf>, allowed: &[&str]) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p, allowed),
        None => Ok(FileConfig::default()),
    }
}

fn resolve_seed(cfg: &FileConfig, base: Option<u64>) -> Result<u64> {
    cfg.resolve(base, "seed", |s| Ok(s.parse()?), 0)
}

fn cmd_simulate(
    args: SimulateArgs,
    config: &Option<PathBuf>,
    base_seed: Option<u64>,
    output: &Output,
) -> Result<i32> {
    let cfg = load_config(
        config,
        &["m", "delta", "x", "t", "steps", "paths", "scheme", "format", "seed"],
    )?;
    let m = cfg.resolve(args.m, "m", |s| Ok(s.parse()?), 2)?;
    let delta = cfg.resolve_required(args.delta, "delta", |s| Ok(s.parse()?))?;
    let t = cfg.resolve(args.t, "t", |s| Ok(s.parse()?), 1.0)?;
    let steps = cfg.resolve(args.steps, "steps", |s| Ok(s.parse()?), 100)?;
    let paths = cfg.resolve(args.paths, "paths", |s| Ok(s.parse()?), 10)?;
    let seed = resolve_seed(&cfg, base_seed)?;
    let x_spec = cfg.resolve_opt(args.x, "x");
    let x0 = parse_matrix(x_spec.as_deref().unwrap_or("zero"), m)?;
    let scheme = cfg.resolve(args.scheme, "scheme", |s| parse_scheme_arg(s), SchemeArg::Exact)?;
    let format = cfg.resolve(args.format, "format", |s| parse_format_arg(s), OutputFormat::Csv)?;
    let config = SimConfig {
        m,
        delta,
        x0,
        t_end: t,
        n_steps: steps,
        n_paths: paths,
        seed,
        scheme: match scheme {
            SchemeArg::Exact => Scheme::Exact,
            SchemeArg::Euler => Scheme::Euler,
            SchemeArg::Eigen => Scheme::Eigen,
        },
    };
    let sim = process::simulate(&config)?;
    match format {
        OutputFormat::Csv => output.write_text(&paths_to_csv(&sim))?,
        OutputFormat::Bin => output.write_bytes(&paths_to_binary(&sim, m, steps, seed))?,
        OutputFormat::Json => bail!("simulate supports csv or bin output"),
    }
    Ok(0)
}

fn parse_scheme_arg(s: &str) -> Result<SchemeArg> {
    match s {
        "exact" => Ok(SchemeArg::Exact),
        "euler" => Ok(SchemeArg::Euler),
        "eigen" => Ok(SchemeArg::Eigen),
        _ => bail!("unknown scheme {s:?} (exact|euler|eigen)"),
    }
}

fn parse_format_arg(s: &str) -> Result<OutputFormat> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        "bin" => Ok(OutputFormat::Bin),
        _ => bail!("unknown format {s:?} (csv|json|bin)"),
    }
}

fn parse_budget_arg(s: &str) -> Result<BudgetArg> {
    match s {
        "desk" => Ok(BudgetArg::Desk),
        "full" => Ok(BudgetArg::Full),
        _ => bail!("unknown budget {s:?} (desk|full)"),
    }
}

fn cmd_laplace_check(
    args: LaplaceCheckArgs,
    config: &Option<PathBuf>,
    base_seed: Option<u64>,
    output: &Output,
) -> Result<i32> {
    let cfg = load_config(
        config,
        &["m", "delta", "t", "x", "u", "paths", "steps", "format", "seed"],
    )?;
    let m = cfg.resolve(args.m, "m", |s| Ok(s.parse()?), 2)?;
    let delta: f64 = cfg.resolve_required(args.delta, "delta", |s| Ok(s.parse()?))?;
    let t = cfg.resolve(args.t, "t", |s| Ok(s.parse()?), 1.0)?;
    let paths = cfg.resolve(args.paths, "paths", |s| Ok(s.parse()?), 100_000)?;
    let steps = cfg.resolve(args.steps, "steps", |s| Ok(s.parse()?), 400)?;
    let seed = resolve_seed(&cfg, base_seed)?;
    let x_spec = cfg.resolve_opt(args.x, "x");
    let u_spec = cfg.resolve_opt(args.u, "u");
    let x0 = parse_matrix(x_spec.as_deref().unwrap_or("zero"), m)?;
    let u = parse_matrix(
        u_spec
            .as_deref()
            .ok_or_else(|| anyhow!("laplace-check needs --u (or config key u)"))?,
        m,
    )?;
    let format = cfg.resolve(args.format, "format", |s| parse_format_arg(s), OutputFormat::Csv)?;

    let closed = laplace_transform_parts(&x0, &u, t, delta)?;
    let start = std::time::Instant::now();
    let is_integer = delta >= 1.0 && (delta - delta.round()).abs() < 1e-12;
    let (mean, se, label) = if is_integer {
        let n = delta.round() as usize;
        let samples: Vec<f64> = {
            use rayon::prelude::*;
            (0..paths)
                .into_par_iter()
                .map(|i| {
                    let mut rng = path_rng(seed, i as u64);
                    let xt = sample_exact(n, &x0, t, &mut rng).expect("exact sample");
                    (-xt.trace_product(&u)).exp()
                })
                .collect()
        };
        let (mean, se) = mean_and_se(&samples);
        (mean, se, "exact")
    } else {
        let sim = SimConfig {
            m,
            delta,
            x0: x0.clone(),
            t_end: t,
            n_steps: steps,
            n_paths: paths,
            seed,
            scheme: Scheme::Euler,
        };
        let samples = run_euler(&sim, |term| (-term.state.trace_product(&u)).exp())?;
        let (mean, se) = mean_and_se(&samples);
        (mean, se, "euler")
    };
    let report = McReport::new(
        format!("laplace-check {label} m={m} delta={delta} t={t}"),
        mean,
        se,
        closed,
        paths,
        start.elapsed().as_secs_f64(),
    );
    let passed = report.passed;
    match format {
        OutputFormat::Json => output.write_text(&mc_report_json(std::slice::from_ref(&report)))?,
        _ => output.write_text(&mc_report_csv(std::slice::from_ref(&report)))?,
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_density(args: DensityArgs, config: &Option<PathBuf>, output: &Output) -> Result<i32> {
    let cfg = load_config(config, &["m", "delta", "t", "x", "y", "seed"])?;
    let m = cfg.resolve(args.m, "m", |s| Ok(s.parse()?), 2)?;
    let delta = cfg.resolve_required(args.delta, "delta", |s| Ok(s.parse()?))?;
    let t = cfg.resolve(args.t, "t", |s| Ok(s.parse()?), 1.0)?;
    let x_spec = cfg.resolve_opt(args.x, "x");
    let y_spec = cfg.resolve_opt(args.y, "y");
    let x = parse_matrix(x_spec.as_deref().unwrap_or("zero"), m)?;
    let y = parse_matrix(
        y_spec.as_deref().ok_or_else(|| anyhow!("density needs --y"))?,
        m,
    )?;
    let q = LawQuery::new(delta, t, x).with_y(y);
    let d = transition_density(&q)?;
    let mut s = String::from("m,delta,t,value,log_value,error_estimate,outside_support\n");
    s.push_str(&format!(
        "{m},{},{},{},{},{},{}\n",
        fmt(delta),
        fmt(t),
        fmt(d.value),
        fmt(d.log_value),
        fmt(d.error_estimate),
        d.outside_support
    ));
    output.write_text(&s)?;
    Ok(0)
}

fn cmd_eigen_density(
    args: EigenDensityArgs,
    config: &Option<PathBuf>,
    output: &Output,
) -> Result<i32> {
    let cfg = load_config(config, &["delta", "t", "x", "y", "seed"])?;
    let delta = cfg.resolve_required(args.delta, "delta", |s| Ok(s.parse()?))?;
    let t = cfg.resolve(args.t, "t", |s| Ok(s.parse()?), 1.0)?;
    let x = parse_eigs(&cfg.resolve_required(args.x, "x", |s| Ok(s.to_string()))?)?;
    let y = parse_eigs(&cfg.resolve_required(args.y, "y", |s| Ok(s.to_string()))?)?;
    let d = eigen_semigroup(delta, &x, &y, t)?;
    let mut s = String::from("delta,t,value,log_value,error_estimate\n");
    s.push_str(&format!(
        "{},{},{},{},{}\n",
        fmt(delta),
        fmt(t),
        fmt(d.value),
        fmt(d.log_value),
        fmt(d.error_estimate)
    ));
    output.write_text(&s)?;
    Ok(0)
}

fn cmd_hw(args: HwArgs, config: &Option<PathBuf>, output: &Output) -> Result<i32> {
    let cfg = load_config(config, &["l1", "l2", "nu", "grid", "seed"])?;
    let l1 = cfg.resolve_required(args.l1, "l1", |s| Ok(s.parse()?))?;
    let l2 = cfg.resolve_required(args.l2, "l2", |s| Ok(s.parse()?))?;
    let nu = cfg.resolve_opt_with(args.nu, "nu", |s| Ok(s.parse()?))?;
    let grid_spec = cfg.resolve(args.grid, "grid", |s| Ok(s.to_string()), "0.7:20:40".into())?;
    let grid = parse_grid(&grid_spec)?;
    let mut s = String::from("v,value,error_estimate\n");
    for &v in &grid {
        let d = laws::hw_density_m2(l1, l2, v)?;
        // below the cancellation floor the value is provably smaller than the
        // noise; report 0 with the error bound rather than noise
        let val = if d.error_estimate > d.value.abs() { 0.0 } else { d.value };
        s.push_str(&format!("{},{},{}\n", fmt(v), fmt(val), fmt(d.error_estimate)));
    }
    let (mass, mass_err) = laws::hw_density_mass(l1, l2)?;
    s.push_str(&format!("norm,{},{}\n", fmt(mass), fmt(mass_err)));
    if let Some(nu) = nu {
        let roundtrip = integrate(
            |v| {
                (-nu * nu * v / 2.0).exp()
                    * laws::hw_density_m2(l1, l2, v).map(|d| d.value).unwrap_or(0.0)
            },
            HW_DENSITY_V_MIN,
            150.0,
            1e-5,
            1e-5,
        );
        let closed = laws::hw_laplace_bessel_m2(l1, l2, nu)?;
        s.push_str(&format!(
            "laplace@{},{},{}\n",
            fmt(nu),
            fmt(roundtrip.value),
            fmt(closed)
        ));
    }
    output.write_text(&s)?;
    Ok(0)
}

fn cmd_t0(args: T0Args, config: &Option<PathBuf>, output: &Output) -> Result<i32> {
    let cfg = load_config(config, &["x", "nu", "t", "grid", "seed"])?;
    let x = parse_eigs(&cfg.resolve_required(args.x, "x", |s| Ok(s.to_string()))?)?;
    let nu = cfg.resolve_required(args.nu, "nu", |s| Ok(s.parse()?))?;
    let xm = HermitianMatrix::from_diag(&x);
    let grid_spec = cfg.resolve_opt(args.grid, "grid");
    let ts = match grid_spec {
        Some(g) => parse_grid(&g)?,
        None => vec![cfg.resolve(args.t, "t", |s| Ok(s.parse()?), 1.0)?],
    };
    let mut s = String::from("t,tail\n");
    for &t in &ts {
        s.push_str(&format!("{},{}\n", fmt(t), fmt(t0_tail(&xm, t, nu)?)));
    }
    output.write_text(&s)?;
    Ok(0)
}

fn cmd_verify_all(
    args: VerifyAllArgs,
    config: &Option<PathBuf>,
    base_seed: Option<u64>,
    output: &Output,
) -> Result<i32> {
    let cfg = load_config(config, &["budget", "format", "seed"])?;
    let seed = resolve_seed(&cfg, base_seed)?;
    let budget = cfg.resolve(args.budget, "budget", |s| parse_budget_arg(s), BudgetArg::Desk)?;
    let format = cfg.resolve(args.format, "format", |s| parse_format_arg(s), OutputFormat::Csv)?;
    let budget = match budget {
        BudgetArg::Desk => Budget::Desk,
        BudgetArg::Full => Budget::Full,
    };
    let results = verify::run_all(seed, budget)?;
    let all_passed = results.iter().all(|r| r.passed);
    match format {
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "id": r.id,
                        "name": r.name,
                        "verdict": r.verdict(),
                        "details": r.details,
                    })
                })
                .collect();
            output.write_text(&(serde_json::to_string_pretty(&rows).expect("json") + "\n"))?;
        }
        _ => {
            let mut s = String::from("id,name,verdict,details\n");
            for r in &results {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.id,
                    csv_quote(r.name),
                    r.verdict(),
                    csv_quote(&r.details)
                ));
            }
            output.write_text(&s)?;
        }
    }
    Ok(if all_passed { 0 } else { 1 })
}
