//! `ird`: command-line front end for the interactive rate-distortion
//! toolkit. Subcommands trace Gaussian rate boundaries, sweep the
//! interactive-versus-single-message ratio curve, compare the best
//! searched scheme against the minimized bound, search finite-alphabet
//! regions, and run Monte Carlo simulations.
//!
//! Every emitted data file carries its run manifest: JSON reports embed
//! it under `"manifest"`, CSV files get a `<out>.manifest.json` sidecar
//! (or, when printing to stdout, the manifest goes to stderr). Exit
//! codes: 0 on success, 1 when a feasibility or consistency check fails,
//! 2 on malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use interact_rd::discrete::{
    binary_entropy, doubly_symmetric_binary, min_rates_search, DecoderMode, DiscreteError,
    DiscreteProblem, Targets,
};
use interact_rd::gaussian::{achieved_point, GaussianPair, LinearFn, TestChannels};
use interact_rd::oneway::{one_way_cr_rate, ratio_curve, OnewayError};
use interact_rd::region::{
    boundary_trace, min_sum_rate, sum_rate_bounds, verify_achievability, DistortionPair, KappaVec,
    MinSumConfig, RegionError, VerifyConfig, Weights,
};
use interact_rd::sim::{simulate_indicator, simulate_linear};

#[derive(Parser)]
#[command(
    name = "ird",
    version,
    about = "Interactive rate-distortion experiments: region bounds, ratio curves, \
             finite-alphabet searches, and simulations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trace the two-direction rate boundary of the Gaussian region (CSV).
    RegionGaussian(RegionGaussianArgs),
    /// Sweep the interactive-to-single-message rate ratio over a
    /// distortion grid (CSV).
    RatioCurve(RatioCurveArgs),
    /// Search rigid linear schemes and report the gap to the minimized
    /// sum-rate bound (JSON); exits 1 when the gap exceeds the tolerance.
    Verify(VerifyArgs),
    /// Exhaustive quantized search on a finite-alphabet problem file (JSON).
    RegionDiscrete(RegionDiscreteArgs),
    /// Monte Carlo simulation (JSON).
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Run the built-in cross-module consistency checks.
    Selftest,
}

#[derive(Args)]
struct SourceArgs {
    /// Variance of the first terminal's observation X.
    #[arg(long, default_value_t = 4.0)]
    sigma_x2: f64,
    /// Variance of the independent noise V in Y = X + V.
    #[arg(long, default_value_t = 4.0)]
    sigma_v2: f64,
}

#[derive(Args)]
struct FnArgs {
    /// X coefficient of terminal A's target alpha_a*X + beta_a*Y.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha_a: f64,
    /// Y coefficient of terminal A's target.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_a: f64,
    /// X coefficient of terminal B's target alpha_b*X + beta_b*Y.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha_b: f64,
    /// Y coefficient of terminal B's target.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_b: f64,
}

#[derive(Args)]
struct RegionGaussianArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    fns: FnArgs,
    /// Mean-square ceiling for terminal A's reconstruction (`inf` disables).
    #[arg(long, default_value_t = 1.0)]
    d_a: f64,
    /// Mean-square ceiling for terminal B's reconstruction (`inf` disables).
    #[arg(long, default_value_t = 1.0)]
    d_b: f64,
    /// Number of scalarization angles swept over the boundary.
    #[arg(long, default_value_t = 33)]
    grid: usize,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioCurveArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of distortion grid points.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Smallest swept distortion; defaults to sigma_x2 / 80.
    #[arg(long)]
    d_lo: Option<f64>,
    /// Largest swept distortion; defaults to sigma_x2 * 79 / 80.
    #[arg(long)]
    d_hi: Option<f64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    fns: FnArgs,
    /// Mean-square ceiling for terminal A's reconstruction (`inf` disables).
    #[arg(long, default_value_t = 1.0)]
    d_a: f64,
    /// Mean-square ceiling for terminal B's reconstruction (`inf` disables).
    #[arg(long, default_value_t = 1.0)]
    d_b: f64,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegionDiscreteArgs {
    /// Problem description file (versioned JSON document, `"schema": 1`).
    problem: PathBuf,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Empirical distortions of a fixed linear scheme, with standard errors.
    Linear(SimLinearArgs),
    /// Sequential versus simultaneous sign-agreement error.
    Indicator(SimIndicatorArgs),
}

#[derive(Args)]
struct SimLinearArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    fns: FnArgs,
    /// Gain of the first message channel U1 = gain_1 * X + N1.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gain_1: f64,
    /// Noise variance of the first message channel.
    #[arg(long, default_value_t = 1.0)]
    noise_1: f64,
    /// Gain of the second message channel U2 = gain_2 * Y + N2.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gain_2: f64,
    /// Noise variance of the second message channel.
    #[arg(long, default_value_t = 1.0)]
    noise_2: f64,
    /// Sample count.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// RNG seed; identical seeds give bit-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimIndicatorArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Sample count.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// RNG seed; identical seeds give bit-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quantizer resolution of the reply message, in bits (1..=30).
    #[arg(long, default_value_t = 8)]
    rx_bits: u32,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes: malformed configuration or
/// input exits 2, a failed feasibility/consistency check exits 1.
enum Failure {
    Input(String),
    Check(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("ird: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("ird: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::RegionGaussian(a) => run_region_gaussian(a),
        Cmd::RatioCurve(a) => run_ratio_curve(a),
        Cmd::Verify(a) => run_verify(a),
        Cmd::RegionDiscrete(a) => run_region_discrete(a),
        Cmd::Simulate(SimulateCmd::Linear(a)) => run_sim_linear(a),
        Cmd::Simulate(SimulateCmd::Indicator(a)) => run_sim_indicator(a),
        Cmd::Selftest => run_selftest(),
    }
}

// ---------------------------------------------------------------------------
// Manifests and serialization helpers.

#[derive(Serialize)]
struct RunManifest {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: String,
    created_unix: i64,
    created_utc: String,
    seed: Option<u64>,
    params: Value,
}

fn manifest(command: &str, seed: Option<u64>, params: Value) -> RunManifest {
    let now = Utc::now();
    RunManifest {
        schema: 1,
        tool: "ird",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        created_unix: now.timestamp(),
        created_utc: now.to_rfc3339_opts(SecondsFormat::Secs, true),
        seed,
        params,
    }
}

/// Deterministic 12-significant-digit CSV cell; infinities print as the
/// bare `inf` / `-inf` literals.
fn sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.11e}")
    }
}

/// JSON number, with non-finite values encoded as strings since JSON has
/// no infinity literal.
fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

fn out_param(out: &Option<PathBuf>) -> Value {
    match out {
        Some(p) => Value::String(p.display().to_string()),
        None => Value::Null,
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".manifest.json");
    PathBuf::from(os)
}

fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("cannot write {}: {e}", path.display()))
}

/// CSV body to `out` (stdout when absent) plus the manifest as a
/// `<out>.manifest.json` sidecar (stderr when printing to stdout).
fn emit_csv(out: Option<&Path>, csv: &str, man: &RunManifest) -> Result<(), Failure> {
    let man_text = serde_json::to_string_pretty(man).expect("manifest serializes");
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| write_failed(path, e))?;
            let side = sidecar_path(path);
            fs::write(&side, format!("{man_text}\n")).map_err(|e| write_failed(&side, e))
        }
        None => {
            print!("{csv}");
            eprintln!("{man_text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, doc: &Value) -> Result<(), Failure> {
    let text = format!("{}\n", serde_json::to_string_pretty(doc).expect("report serializes"));
    match out {
        Some(path) => fs::write(path, text).map_err(|e| write_failed(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn region_fail(e: RegionError) -> Failure {
    match e {
        RegionError::Infeasible => Failure::Check(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn oneway_fail(e: OnewayError) -> Failure {
    match e {
        OnewayError::Region(r) => region_fail(r),
        OnewayError::BadTarget(_) => Failure::Input(e.to_string()),
    }
}

fn discrete_fail(e: DiscreteError) -> Failure {
    match e {
        DiscreteError::NoFeasibleChain | DiscreteError::BudgetExceeded(_) => {
            Failure::Check(e.to_string())
        }
        _ => Failure::Input(e.to_string()),
    }
}

fn input_fail(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn min_sum_cfg_params(cfg: &MinSumConfig) -> Value {
    json!({
        "grid": cfg.grid,
        "margin_rel": cfg.margin_rel,
        "refine_sweeps": cfg.refine_sweeps,
        "tol_bits": cfg.tol_bits,
    })
}

fn kappa_params(k: &KappaVec) -> Value {
    json!({
        "kx_a": num(k.kx_a),
        "ky_a": num(k.ky_a),
        "kx_b": num(k.kx_b),
        "ky_b": num(k.ky_b),
    })
}

// ---------------------------------------------------------------------------
// Subcommand runners.

fn run_region_gaussian(a: RegionGaussianArgs) -> Result<(), Failure> {
    if a.grid < 1 {
        return Err(Failure::Input("grid must be at least 1".into()));
    }
    let src = GaussianPair::new(a.source.sigma_x2, a.source.sigma_v2).map_err(input_fail)?;
    let fa = LinearFn::new(a.fns.alpha_a, a.fns.beta_a);
    let fb = LinearFn::new(a.fns.alpha_b, a.fns.beta_b);
    let d = DistortionPair::new(a.d_a, a.d_b);
    let cfg = MinSumConfig::default();
    let pts = boundary_trace(&src, &fa, &fb, &d, a.grid, &cfg).map_err(region_fail)?;
    let mut csv =
        String::from("theta_rad,r_odd_bits,r_even_bits,kx_a_cov,ky_a_cov,kx_b_cov,ky_b_cov\n");
    for p in &pts {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sig(p.theta),
            sig(p.r_odd),
            sig(p.r_even),
            sig(p.kappa.kx_a),
            sig(p.kappa.ky_a),
            sig(p.kappa.kx_b),
            sig(p.kappa.ky_b),
        ));
    }
    let man = manifest(
        "region-gaussian",
        None,
        json!({
            "sigma_x2": a.source.sigma_x2,
            "sigma_v2": a.source.sigma_v2,
            "alpha_a": a.fns.alpha_a,
            "beta_a": a.fns.beta_a,
            "alpha_b": a.fns.alpha_b,
            "beta_b": a.fns.beta_b,
            "d_a": num(a.d_a),
            "d_b": num(a.d_b),
            "grid": a.grid,
            "min_sum": min_sum_cfg_params(&cfg),
            "out": out_param(&a.out),
        }),
    );
    emit_csv(a.out.as_deref(), &csv, &man)
}

fn run_ratio_curve(a: RatioCurveArgs) -> Result<(), Failure> {
    if a.grid < 2 {
        return Err(Failure::Input("grid must be at least 2".into()));
    }
    let src = GaussianPair::new(a.source.sigma_x2, a.source.sigma_v2).map_err(input_fail)?;
    let d_lo = a.d_lo.unwrap_or(a.source.sigma_x2 / 80.0);
    let d_hi = a.d_hi.unwrap_or(a.source.sigma_x2 * 79.0 / 80.0);
    if !(d_lo.is_finite() && d_hi.is_finite() && 0.0 < d_lo && d_lo < d_hi) {
        return Err(Failure::Input(format!(
            "d_lo/d_hi must satisfy 0 < d_lo < d_hi < inf, got ({d_lo}, {d_hi})"
        )));
    }
    let cfg = MinSumConfig::default();
    let pts = ratio_curve(&src, d_lo, d_hi, a.grid, &cfg).map_err(oneway_fail)?;
    let mut csv = String::from("d,r_cr_bits,r_sum_star_bits,ratio\n");
    for p in &pts {
        let ratio = p.ratio.map(sig).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{ratio}\n",
            sig(p.d),
            sig(p.r_cr),
            sig(p.r_sum_star),
        ));
    }
    let man = manifest(
        "ratio-curve",
        None,
        json!({
            "sigma_x2": a.source.sigma_x2,
            "sigma_v2": a.source.sigma_v2,
            "grid": a.grid,
            "d_lo": d_lo,
            "d_hi": d_hi,
            "min_sum": min_sum_cfg_params(&cfg),
            "out": out_param(&a.out),
        }),
    );
    emit_csv(a.out.as_deref(), &csv, &man)
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    let src = GaussianPair::new(a.source.sigma_x2, a.source.sigma_v2).map_err(input_fail)?;
    let fa = LinearFn::new(a.fns.alpha_a, a.fns.beta_a);
    let fb = LinearFn::new(a.fns.alpha_b, a.fns.beta_b);
    let d = DistortionPair::new(a.d_a, a.d_b);
    let min_cfg = MinSumConfig::default();
    let cfg = VerifyConfig::default();
    let out = verify_achievability(&src, &fa, &fb, &d, &min_cfg, &cfg).map_err(region_fail)?;
    let man = manifest(
        "verify",
        None,
        json!({
            "sigma_x2": a.source.sigma_x2,
            "sigma_v2": a.source.sigma_v2,
            "alpha_a": a.fns.alpha_a,
            "beta_a": a.fns.beta_a,
            "alpha_b": a.fns.alpha_b,
            "beta_b": a.fns.beta_b,
            "d_a": num(a.d_a),
            "d_b": num(a.d_b),
            "min_sum": min_sum_cfg_params(&min_cfg),
            "search": {
                "gain_span": cfg.gain_span,
                "gain_step": cfg.gain_step,
                "noise_points": cfg.noise_points,
                "noise_lo_rel": cfg.noise_lo_rel,
                "noise_hi_rel": cfg.noise_hi_rel,
                "refine_sweeps": cfg.refine_sweeps,
                "match_tol_bits": cfg.match_tol_bits,
            },
            "out": out_param(&a.out),
        }),
    );
    let doc = json!({
        "manifest": serde_json::to_value(&man).expect("manifest serializes"),
        "units": {
            "rates": "bits",
            "distortions": "mean squared error",
            "kappa": "covariance",
        },
        "bound": {
            "sum_bits": num(out.bound.weighted),
            "r_odd_bits": num(out.bound.bound.r_odd),
            "r_even_bits": num(out.bound.bound.r_even),
            "kappa": kappa_params(&out.bound.kappa),
        },
        "scheme": {
            "channels": {
                "gain_1": out.channels.a1,
                "noise_1": out.channels.n1,
                "gain_2": out.channels.a2,
                "noise_2": out.channels.n2,
            },
            "r1_bits": num(out.achieved.r1),
            "r2_bits": num(out.achieved.r2),
            "sum_bits": num(out.achieved.sum_rate()),
            "d_a": num(out.achieved.d_a),
            "d_b": num(out.achieved.d_b),
            "kappa": {
                "kx_a": num(out.achieved.kx_a),
                "ky_a": num(out.achieved.ky_a),
                "kx_b": num(out.achieved.kx_b),
                "ky_b": num(out.achieved.ky_b),
            },
        },
        "gap_bits": num(out.gap_bits),
        "matched": out.matched,
    });
    emit_json(a.out.as_deref(), &doc)?;
    if out.matched {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "best searched scheme exceeds the minimized bound by {:.6} bits (tolerance {})",
            out.gap_bits, cfg.match_tol_bits
        )))
    }
}

fn run_region_discrete(a: RegionDiscreteArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.problem)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", a.problem.display())))?;
    let p = DiscreteProblem::from_json(&text).map_err(discrete_fail)?;
    let canonical: Value =
        serde_json::from_str(&p.to_json()).expect("canonical problem document parses");
    let out = min_rates_search(&p, None).map_err(discrete_fail)?;
    let man = manifest(
        "region-discrete",
        None,
        json!({
            "problem_file": a.problem.display().to_string(),
            "problem": canonical,
            "weights": Value::Null,
            "out": out_param(&a.out),
        }),
    );
    let doc = json!({
        "manifest": serde_json::to_value(&man).expect("manifest serializes"),
        "units": {
            "rates": "bits",
            "distortions": "expected per-symbol distortion",
        },
        "result": serde_json::to_value(&out).expect("search outcome serializes"),
    });
    emit_json(a.out.as_deref(), &doc)
}

fn run_sim_linear(a: SimLinearArgs) -> Result<(), Failure> {
    let src = GaussianPair::new(a.source.sigma_x2, a.source.sigma_v2).map_err(input_fail)?;
    let tc = TestChannels::new(a.gain_1, a.noise_1, a.gain_2, a.noise_2).map_err(input_fail)?;
    let fa = LinearFn::new(a.fns.alpha_a, a.fns.beta_a);
    let fb = LinearFn::new(a.fns.alpha_b, a.fns.beta_b);
    let want = achieved_point(&src, &tc, &fa, &fb).map_err(input_fail)?;
    let got = simulate_linear(&src, &tc, &fa, &fb, a.n, a.seed).map_err(input_fail)?;
    let man = manifest(
        "simulate-linear",
        Some(a.seed),
        json!({
            "sigma_x2": a.source.sigma_x2,
            "sigma_v2": a.source.sigma_v2,
            "alpha_a": a.fns.alpha_a,
            "beta_a": a.fns.beta_a,
            "alpha_b": a.fns.alpha_b,
            "beta_b": a.fns.beta_b,
            "gain_1": a.gain_1,
            "noise_1": a.noise_1,
            "gain_2": a.gain_2,
            "noise_2": a.noise_2,
            "n": a.n,
            "seed": a.seed,
            "out": out_param(&a.out),
        }),
    );
    let est = |e: &interact_rd::sim::EstimateWithSe| {
        json!({"value": num(e.value), "se": num(e.se), "n": e.n})
    };
    let doc = json!({
        "manifest": serde_json::to_value(&man).expect("manifest serializes"),
        "units": {"rates": "bits", "distortions": "mean squared error"},
        "empirical": {"d_a": est(&got.d_a), "d_b": est(&got.d_b)},
        "analytic": {
            "d_a": num(want.d_a),
            "d_b": num(want.d_b),
            "r1_bits": num(want.r1),
            "r2_bits": num(want.r2),
        },
    });
    emit_json(a.out.as_deref(), &doc)
}

fn run_sim_indicator(a: SimIndicatorArgs) -> Result<(), Failure> {
    let src = GaussianPair::new(a.source.sigma_x2, a.source.sigma_v2).map_err(input_fail)?;
    let out = simulate_indicator(&src, a.n, a.seed, a.rx_bits).map_err(input_fail)?;
    let man = manifest(
        "simulate-indicator",
        Some(a.seed),
        json!({
            "sigma_x2": a.source.sigma_x2,
            "sigma_v2": a.source.sigma_v2,
            "n": a.n,
            "seed": a.seed,
            "rx_bits": a.rx_bits,
            "out": out_param(&a.out),
        }),
    );
    let est = |e: &interact_rd::sim::EstimateWithSe| {
        json!({"value": num(e.value), "se": num(e.se), "n": e.n})
    };
    let doc = json!({
        "manifest": serde_json::to_value(&man).expect("manifest serializes"),
        "units": {"errors": "disagreement probability"},
        "sequential": est(&out.sequential),
        "simultaneous": est(&out.simultaneous),
        "agreement_sequential": num(out.agreement_sequential),
        "agreement_simultaneous": num(out.agreement_simultaneous),
    });
    emit_json(a.out.as_deref(), &doc)
}

// ---------------------------------------------------------------------------
// Self test: fast cross-module consistency checks, one line per check.

fn run_selftest() -> Result<(), Failure> {
    let mut failures = 0u32;
    let mut check = |name: &str, pass: bool, detail: String| {
        if pass {
            println!("selftest {name}: ok");
        } else {
            failures += 1;
            println!("selftest {name}: FAILED ({detail})");
        }
    };

    let src = GaussianPair::new(4.0, 4.0).expect("benchmark source");

    // Closed-form single-message rate at two pinned distortions.
    let r1 = one_way_cr_rate(&src, 1.0).expect("valid target");
    let r4 = one_way_cr_rate(&src, 4.0).expect("valid target");
    check(
        "one-way-closed-form",
        (r1 - 0.660_964_047_443_681_2).abs() < 1e-12 && r4 == 0.0,
        format!("r(1) = {r1}, r(4) = {r4}"),
    );

    // Direction bounds at the worked zero-covariance point.
    let be = sum_rate_bounds(
        &src,
        &LinearFn::new(0.0, 0.0),
        &LinearFn::new(1.0, 0.0),
        &DistortionPair::new(f64::INFINITY, 1.0),
        &KappaVec::default(),
    )
    .expect("valid point");
    check(
        "direction-bounds-worked-point",
        (be.r_odd - 0.5 * 2.5f64.log2()).abs() < 1e-12 && be.r_even == 0.0,
        format!("r_odd = {}, r_even = {}", be.r_odd, be.r_even),
    );

    // Minimized bound against the analytic value on the single-constraint
    // family: min over free covariances is max(0, 0.5*log2(s/d)).
    let ms = min_sum_rate(
        &src,
        &LinearFn::new(0.0, 0.0),
        &LinearFn::new(1.0, 0.0),
        &DistortionPair::new(f64::INFINITY, 1.0),
        &Weights::new(1.0, 1.0),
        &MinSumConfig::default(),
    )
    .expect("feasible");
    check(
        "minimized-bound-analytic",
        (ms.weighted - 0.5).abs() < 5e-4,
        format!("weighted = {}", ms.weighted),
    );

    // Short ratio sweep: in range, monotone, equal to the quotient.
    let curve = ratio_curve(&src, 0.05, 3.95, 8, &MinSumConfig::default()).expect("valid sweep");
    let mut curve_ok = curve.len() == 8;
    let mut prev = f64::INFINITY;
    for p in &curve {
        match p.ratio {
            Some(r) => {
                curve_ok &= (0.0..=1.0 + 1e-9).contains(&r)
                    && (r - p.r_sum_star / p.r_cr).abs() < 1e-12
                    && r <= prev + 1e-9;
                prev = r;
            }
            None => curve_ok &= p.r_cr == 0.0,
        }
    }
    check("ratio-curve-short-sweep", curve_ok, format!("{curve:?}"));

    // Quantized search: unconstrained targets cost nothing.
    let slack = doubly_symmetric_binary(0.11, 1, DecoderMode::Common, 4, Targets::SLACK);
    let slack_out = min_rates_search(&slack, None).expect("feasible");
    check(
        "discrete-unconstrained-zero",
        slack_out.weighted == 0.0,
        format!("weighted = {}", slack_out.weighted),
    );

    // Quantized search: exact shared recovery of the near bit costs its
    // conditional entropy.
    let exact = doubly_symmetric_binary(
        0.11,
        1,
        DecoderMode::Common,
        8,
        Targets::new(f64::INFINITY, 0.0, f64::INFINITY, f64::INFINITY),
    );
    let exact_out = min_rates_search(&exact, None).expect("feasible");
    check(
        "discrete-exact-recovery",
        (exact_out.rates[0] - binary_entropy(0.11)).abs() < 1e-9,
        format!("rate = {}, h2 = {}", exact_out.rates[0], binary_entropy(0.11)),
    );

    // Shared reconstruction equals per-terminal reconstruction with zero
    // disagreement ceilings.
    let common = doubly_symmetric_binary(
        0.17,
        1,
        DecoderMode::Common,
        6,
        Targets::new(0.3, 0.3, 0.0, 0.0),
    );
    let mut constrained = common.clone();
    constrained.mode = DecoderMode::Constrained;
    let ca = min_rates_search(&common, None).expect("feasible");
    let cb = min_rates_search(&constrained, None).expect("feasible");
    check(
        "discrete-mode-equivalence",
        ca.weighted == cb.weighted && ca.chain_index == cb.chain_index,
        format!("common = {}, constrained = {}", ca.weighted, cb.weighted),
    );

    // Simulation reproducibility and agreement with the analytic point.
    let tc = TestChannels::new(1.0, 1.0, 1.0, 1.0).expect("valid channels");
    let fa = LinearFn::new(1.0, 0.0);
    let fb = LinearFn::new(1.0, 0.0);
    let want = achieved_point(&src, &tc, &fa, &fb).expect("valid point");
    let s1 = simulate_linear(&src, &tc, &fa, &fb, 200_000, 7).expect("valid run");
    let s2 = simulate_linear(&src, &tc, &fa, &fb, 200_000, 7).expect("valid run");
    let sim_ok = s1.d_a.value == s2.d_a.value
        && s1.d_b.value == s2.d_b.value
        && (s1.d_a.value - want.d_a).abs() <= 6.0 * s1.d_a.se
        && (s1.d_b.value - want.d_b).abs() <= 6.0 * s1.d_b.se;
    check(
        "simulation-reproducible-accurate",
        sim_ok,
        format!("got ({}, {}), want ({}, {})", s1.d_a.value, s1.d_b.value, want.d_a, want.d_b),
    );

    // Interactive sign exchange beats one-shot exchange.
    let ind = simulate_indicator(&src, 200_000, 7, 12).expect("valid run");
    check(
        "indicator-ordering",
        ind.sequential.value < 0.01 && ind.simultaneous.value > 0.1,
        format!("sequential = {}, simultaneous = {}", ind.sequential.value, ind.simultaneous.value),
    );

    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(())
    } else {
        Err(Failure::Check(format!("{failures} selftest check(s) failed")))
    }
}
