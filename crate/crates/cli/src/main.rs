//! `gepflow`: generate instances, run solvers and sweeps, check diagnostics.
//!
//! Option precedence is flag, then the `--config` JSON file, then built-in
//! defaults. The seed additionally falls back to `GEP_SEED`. Exit status is
//! 0 on success, 1 on usage or validation errors (including a failed lemma
//! suite) and 2 when a solver fails.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use gepflow::generative::{Generator, LatentProjectionConfig, MlpGenerator, SubspaceGenerator};
use gepflow::harness::{self, SignalSpec, SolverChoice, SweepSpec};
use gepflow::linalg::generalized_eig;
use gepflow::priors::{PriorKind, ProjectorSpec};
use gepflow::problems::{self, ProblemInstance, ProblemKind};
use gepflow::rng::{derive_seed, SeededStream};
use gepflow::solvers::{self, SolverConfig, SolverKind, TraceReport, DEFAULT_ETA, DEFAULT_ETA_PRIME};
use gepflow::theory;

use config::{merge_fields, read_text, resolve_seed, sha256_hex, write_text, ConfigFile, Provenance, Real};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Solver(_) => 2,
        }
    }
}

impl From<gepflow::Error> for Failure {
    fn from(e: gepflow::Error) -> Self {
        use gepflow::Error::*;
        match e {
            NonConvergence { .. }
            | DenominatorNearZero(_)
            | DegenerateGap(_)
            | DegenerateOutput { .. }
            | AllRestartsDegenerate
            | DegenerateProjection
            | ZeroVector
            | DenominatorNonPositive { .. }
            | NonPositiveRho { .. }
            | AllRunsFailed(_) => Self::Solver(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "gepflow", version, about = "Structured generalized eigenvalue problems")]
struct Cli {
    /// JSON object of option defaults (keys are long flag names with `_`).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base seed; falls back to the config file, then GEP_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic problem instance.
    Generate(GenerateArgs),
    /// Run one solver on an instance and write its trace.
    Solve(SolveArgs),
    /// Run an m-sweep and write per-run CSV rows.
    Sweep(SweepArgs),
    /// Measure bilinear perturbation sizes of an instance.
    Verify(VerifyArgs),
    /// Report step-size conditions and run the lemma suites.
    TheoryCheck(TheoryArgs),
}

#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct GenerateArgs {
    /// spiked, phase_retrieval or diag_b.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// dense, nonnegative or sparse.
    #[arg(long)]
    signal: Option<String>,
    /// Nonzeros of a sparse signal.
    #[arg(long)]
    sparsity: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Prior options shared by `solve` and `sweep`.
#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct PriorArgs {
    /// sphere, sparse, subspace or generative.
    #[arg(long)]
    prior: Option<String>,
    /// Sparsity level (sparse prior and rifle).
    #[arg(long)]
    s: Option<usize>,
    /// Dimension of a synthesized subspace containing the true signal.
    #[arg(long)]
    k: Option<usize>,
    /// Model JSON for generative or subspace priors.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Adam steps per latent projection.
    #[arg(long)]
    projection_steps: Option<usize>,
    #[arg(long)]
    projection_lr: Option<Real>,
    #[arg(long)]
    projection_restarts: Option<usize>,
}

impl PriorArgs {
    fn merge(&mut self, mut o: PriorArgs) {
        merge_fields!(self, o, prior, s, k, model, projection_steps, projection_lr, projection_restarts);
    }

    fn spec(&self, seed: u64) -> CliResult<ProjectorSpec> {
        let prior = match self.prior.as_deref().unwrap_or("sphere") {
            "sphere" => PriorKind::Sphere,
            "sparse" => PriorKind::Sparse,
            "subspace" => PriorKind::Subspace,
            "generative" => PriorKind::Generative,
            other => return Err(Failure::Validation(format!("unknown prior `{other}`"))),
        };
        let projection = (prior == PriorKind::Generative).then(|| {
            let d = LatentProjectionConfig::default();
            LatentProjectionConfig {
                steps: self.projection_steps.unwrap_or(d.steps),
                learning_rate: self.projection_lr.map_or(d.learning_rate, |r| r.0),
                restarts: self.projection_restarts.unwrap_or(d.restarts),
                seed: derive_seed(seed, &[TAG_PROJECTION]),
                ..d
            }
        });
        Ok(ProjectorSpec {
            prior,
            s: self.s,
            k: self.k,
            model_path: self.model.clone(),
            projection,
        })
    }
}

#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SolveArgs {
    /// Instance JSON written by `generate`.
    #[arg(long = "in", value_name = "FILE")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    /// prfm, rifle or ppower.
    #[arg(long)]
    solver: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    prior: PriorArgs,
    /// Step size; fractions like 7/32 are exact.
    #[arg(long)]
    eta: Option<Real>,
    /// Rifle step numerator.
    #[arg(long)]
    eta_prime: Option<Real>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Iterate-change tolerance; 0 runs all iterations.
    #[arg(long)]
    early_stop: Option<Real>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SweepArgs {
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated, strictly ascending.
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long)]
    signal: Option<String>,
    #[arg(long)]
    sparsity: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    prior: PriorArgs,
    /// Comma-separated subset of prfm, ppower, rifle.
    #[arg(long, value_delimiter = ',')]
    solvers: Option<Vec<String>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    eta: Option<Real>,
    #[arg(long)]
    eta_prime: Option<Real>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    early_stop: Option<Real>,
    /// Record wall-clock time per run (makes output nondeterministic).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    timing: Option<bool>,
    /// Worker threads (0 = all cores). Never changes the output.
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the summary table as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct VerifyArgs {
    #[arg(long = "in", value_name = "FILE")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    /// Test vectors per set.
    #[arg(long)]
    set_size: Option<usize>,
    /// Draw test vectors from a k-dimensional subspace containing the signal.
    #[arg(long)]
    k: Option<usize>,
    /// Draw test vectors from the range of this network.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct TheoryArgs {
    #[arg(long = "in", value_name = "FILE")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    eta: Option<Real>,
    /// Random draws per lemma suite.
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const TAG_SIGNAL: u64 = 1;
const TAG_INSTANCE: u64 = 2;
const TAG_PRIOR: u64 = 3;
const TAG_RESTARTS: u64 = 4;
const TAG_PROJECTION: u64 = 5;
const TAG_SETS: u64 = 6;
const TAG_LEMMAS: u64 = 7;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Validation(m) => eprintln!("error: {m}"),
                Failure::Solver(m) => eprintln!("solver error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let seed = resolve_seed(cli.seed, &file)?;
    match cli.command {
        Command::Generate(mut a) => {
            let mut f: GenerateArgs = file.options()?;
            merge_fields!(a, f, kind, n, m, signal, sparsity, out);
            generate(a, seed)
        }
        Command::Solve(mut a) => {
            let mut f: SolveArgs = file.options()?;
            merge_fields!(a, f, input, solver, eta, eta_prime, max_iters, restarts, early_stop, out);
            a.prior.merge(f.prior);
            solve(a, seed)
        }
        Command::Sweep(mut a) => {
            let mut f: SweepArgs = file.options()?;
            merge_fields!(
                a, f, kind, n, m_values, signal, sparsity, solvers, trials, restarts, eta, eta_prime,
                max_iters, early_stop, timing, jobs, out, summary
            );
            a.prior.merge(f.prior);
            sweep(a, seed)
        }
        Command::Verify(mut a) => {
            let mut f: VerifyArgs = file.options()?;
            merge_fields!(a, f, input, set_size, k, model, out);
            verify(a, seed)
        }
        Command::TheoryCheck(mut a) => {
            let mut f: TheoryArgs = file.options()?;
            merge_fields!(a, f, input, eta, draws, out);
            theory_check(a, seed)
        }
    }
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::Validation(format!("missing required option --{flag}")))
}

fn parse_kind(s: Option<&str>) -> CliResult<ProblemKind> {
    Ok(ProblemKind::parse(s.unwrap_or("spiked"))?)
}

fn parse_signal(s: Option<&str>, sparsity: Option<usize>) -> CliResult<SignalSpec> {
    match s.unwrap_or("dense") {
        "dense" => Ok(SignalSpec::Dense),
        "nonnegative" => Ok(SignalSpec::Nonnegative),
        "sparse" => Ok(SignalSpec::Sparse { sparsity: required(sparsity, "sparsity")? }),
        other => Err(Failure::Validation(format!("unknown signal `{other}`"))),
    }
}

/// Reads an instance and returns it with the SHA-256 of its bytes.
fn load_instance(path: &Path) -> CliResult<(ProblemInstance, String)> {
    let text = read_text(path)?;
    let inst: ProblemInstance = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    inst.validate()?;
    Ok((inst, sha256_hex(text.as_bytes())))
}

fn file_digest(path: &Option<PathBuf>) -> CliResult<Option<String>> {
    path.as_deref().map(|p| read_text(p).map(|t| sha256_hex(t.as_bytes()))).transpose()
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs, seed: u64) -> CliResult {
    let kind = parse_kind(a.kind.as_deref())?;
    let n = required(a.n, "n")?;
    let m = required(a.m, "m")?;
    let signal = parse_signal(a.signal.as_deref(), a.sparsity)?;
    let resolved = json!({ "kind": kind, "n": n, "m": m, "signal": signal });
    let prov = Provenance::new("generate", seed, &resolved);
    let v = signal.draw(n, &mut SeededStream::derived(seed, &[TAG_SIGNAL]))?;
    let inst = problems::generate(kind, &v, m, derive_seed(seed, &[TAG_INSTANCE]))?;
    let body = serde_json::to_value(&inst).map_err(gepflow::Error::from)?;
    let out = required(a.out, "out")?;
    write_text(&out, &prov.json(body))?;
    println!("{}", prov.line());
    println!("wrote {} instance (n = {n}, m = {m}) to {}", kind.name(), out.display());
    Ok(())
}

fn solver_kind(name: &str, s: Option<usize>, eta_prime: f64) -> CliResult<SolverKind> {
    Ok(match SolverChoice::parse(name)? {
        SolverChoice::Prfm => SolverKind::Prfm,
        SolverChoice::Ppower => SolverKind::Ppower,
        SolverChoice::Rifle => SolverKind::Rifle { s: required(s, "s")?, eta_prime },
    })
}

fn early_stop(r: Option<Real>) -> Option<f64> {
    match r {
        None => Some(1e-9),
        Some(Real(t)) if t > 0.0 => Some(t),
        Some(_) => None,
    }
}

fn solve(a: SolveArgs, seed: u64) -> CliResult {
    let input = required(a.input, "in")?;
    let (inst, digest) = load_instance(&input)?;
    let n = inst.dim();
    let solver_name = a.solver.unwrap_or_else(|| "prfm".into());
    let eta = a.eta.map_or(DEFAULT_ETA, |r| r.0);
    let eta_prime = a.eta_prime.map_or(DEFAULT_ETA_PRIME, |r| r.0);
    let kind = solver_kind(&solver_name, a.prior.s, eta_prime)?;
    let restarts = a.restarts.unwrap_or(1);
    let cfg = SolverConfig {
        step_size: eta,
        max_iters: a.max_iters.unwrap_or(100),
        early_stop: early_stop(a.early_stop),
        reference: inst.truth.as_ref().map(|t| t.v_star.clone()),
        ..SolverConfig::default()
    };
    let prior = a.prior.spec(seed)?;
    let resolved = json!({
        "input_sha256": digest,
        "model_sha256": file_digest(&a.prior.model)?,
        "solver": kind,
        "prior": prior,
        "eta": eta,
        "max_iters": cfg.max_iters,
        "early_stop": cfg.early_stop,
        "restarts": restarts,
    });
    let prov = Provenance::new("solve", seed, &resolved);
    let v_star = inst.truth.as_ref().map(|t| t.v_star.as_slice());
    let projector = prior.build(n, v_star, derive_seed(seed, &[TAG_PRIOR]))?;
    let result = solvers::run_with_restarts(
        kind,
        &inst.a_hat,
        &inst.b_hat,
        &projector,
        &cfg,
        restarts,
        derive_seed(seed, &[TAG_RESTARTS]),
    );
    let (report, failure) = match result {
        Ok(best) => (
            TraceReport {
                solver: kind.name().into(),
                config: resolved,
                rows: best.trace.rows,
                final_vector: best.trace.final_vector,
                status: "ok".into(),
            },
            None,
        ),
        Err(e) => (
            TraceReport {
                solver: kind.name().into(),
                config: resolved,
                rows: Vec::new(),
                final_vector: Vec::new(),
                status: format!("error: {e}"),
            },
            Some(Failure::from(e)),
        ),
    };
    let body = serde_json::to_value(&report).map_err(gepflow::Error::from)?;
    emit(&a.out, &prov.json(body))?;
    if let Some(f) = failure {
        return Err(f);
    }
    if a.out.is_some() {
        let last = report.rows.last();
        println!("{}", prov.line());
        println!(
            "{}: {} iterations, final rho {}{}",
            kind.name(),
            report.rows.len().saturating_sub(1),
            last.map_or(f64::NAN, |r| r.rho),
            last.and_then(|r| r.cos_sim).map_or(String::new(), |c| format!(", cos_sim {c:.6}"))
        );
    }
    Ok(())
}

fn sweep(a: SweepArgs, seed: u64) -> CliResult {
    let kind = parse_kind(a.kind.as_deref())?;
    let n = required(a.n, "n")?;
    let m_values = required(a.m_values, "m-values")?;
    let mut spec = SweepSpec::new(kind, n, m_values, a.prior.spec(seed)?);
    spec.signal = parse_signal(a.signal.as_deref(), a.sparsity)?;
    if let Some(list) = &a.solvers {
        spec.solvers = list.iter().map(|s| SolverChoice::parse(s.trim())).collect::<Result<_, _>>()?;
    }
    spec.trials = a.trials.unwrap_or(spec.trials);
    spec.restarts = a.restarts.unwrap_or(spec.restarts);
    spec.eta = a.eta.map_or(spec.eta, |r| r.0);
    spec.eta_prime = a.eta_prime.map_or(spec.eta_prime, |r| r.0);
    spec.s = a.prior.s;
    spec.max_iters = a.max_iters.unwrap_or(spec.max_iters);
    spec.early_stop = early_stop(a.early_stop);
    spec.base_seed = seed;
    spec.record_wall_ms = a.timing.unwrap_or(false);
    spec.validate()?;
    let resolved = json!({ "spec": spec, "model_sha256": file_digest(&a.prior.model)? });
    let prov = Provenance::new("sweep", seed, &resolved);
    let rows = harness::run_sweep(&spec, a.jobs.unwrap_or(0))?;
    let csv = format!("# {}\n{}", prov.line(), harness::rows_to_csv(&rows)?);
    emit(&a.out, &csv)?;
    let cells = harness::summarize(&rows);
    if let Some(path) = &a.summary {
        let body = json!({ "cells": cells });
        write_text(path, &prov.json(body))?;
    }
    // With the CSV on stdout, keep the table off it.
    let table = harness::format_summary(&cells);
    if a.out.is_some() {
        println!("{}", prov.line());
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    Ok(())
}

fn verify(a: VerifyArgs, seed: u64) -> CliResult {
    let input = required(a.input, "in")?;
    let (inst, digest) = load_instance(&input)?;
    let set_size = a.set_size.unwrap_or(50);
    let generator: Option<Arc<dyn Generator>> = match (&a.model, a.k) {
        (Some(p), _) => {
            let text = read_text(p)?;
            let bad = |e: serde_json::Error| Failure::Validation(format!("{}: {e}", p.display()));
            if text.contains("\"subspace_basis\"") {
                Some(Arc::new(serde_json::from_str::<SubspaceGenerator>(&text).map_err(bad)?))
            } else {
                Some(Arc::new(serde_json::from_str::<MlpGenerator>(&text).map_err(bad)?))
            }
        }
        (None, Some(k)) => {
            let v = &inst.truth()?.v_star;
            Some(Arc::new(SubspaceGenerator::random_containing(v, k, derive_seed(seed, &[TAG_PRIOR]))?))
        }
        (None, None) => None,
    };
    let resolved = json!({
        "input_sha256": digest,
        "model_sha256": file_digest(&a.model)?,
        "k": a.k,
        "set_size": set_size,
    });
    let prov = Provenance::new("verify", seed, &resolved);
    let report = problems::verify_perturbation(&inst, set_size, derive_seed(seed, &[TAG_SETS]), generator.as_deref())?;
    let rows = [
        ("n", report.n.to_string()),
        ("m", report.m.to_string()),
        ("set_size", report.set_size.to_string()),
        ("max |s1' E s2|", format!("{:.6e}", report.max_e)),
        ("max |s1' F s2|", format!("{:.6e}", report.max_f)),
        ("c_hat (E)", format!("{:.4}", report.c_hat_e)),
        ("c_hat (F)", format!("{:.4}", report.c_hat_f)),
        ("||E||_2", format!("{:.6e}", report.norm_e)),
        ("||F||_2", format!("{:.6e}", report.norm_f)),
        ("n/m", format!("{:.6e}", report.n_over_m)),
    ];
    println!("{}", prov.line());
    for (k, v) in rows {
        println!("{k:<16} {v}");
    }
    if let Some(out) = &a.out {
        let body = serde_json::to_value(&report).map_err(gepflow::Error::from)?;
        write_text(out, &prov.json(body))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TheoryReport {
    conditions: theory::ConvergenceConditions,
    denominator_at_init: theory::DenominatorCheck,
    denominator_at_truth: theory::DenominatorCheck,
    lemma_suites: Vec<theory::SuiteResult>,
}

fn theory_check(a: TheoryArgs, seed: u64) -> CliResult {
    let input = required(a.input, "in")?;
    let (inst, digest) = load_instance(&input)?;
    let eta = a.eta.map_or(DEFAULT_ETA, |r| r.0);
    let draws = a.draws.unwrap_or(10_000);
    let resolved = json!({ "input_sha256": digest, "eta": eta, "draws": draws });
    let prov = Provenance::new("theory-check", seed, &resolved);
    let truth = inst.truth()?;
    let spectrum = generalized_eig(&truth.pair)?;
    let u0 = SolverConfig::default().initial_vector(inst.dim());
    let c = theory::compute_conditions(&spectrum, truth.pair.b(), eta, &u0)?;
    let report = TheoryReport {
        denominator_at_init: theory::check_denominator_positivity(&inst, &u0)?,
        denominator_at_truth: theory::check_denominator_positivity(&inst, &truth.leading_unit)?,
        lemma_suites: theory::run_lemma_suites(draws, derive_seed(seed, &[TAG_LEMMAS])),
        conditions: c,
    };
    let c = &report.conditions;
    println!("{}", prov.line());
    let line = |name: &str, value: String| println!("{name:<34} {value}");
    line("eta", format!("{eta}"));
    line("gamma1", format!("{:.6}", c.gamma1));
    line("gamma2", format!("{:.6}", c.gamma2));
    line("nu0", format!("{:.6}", c.nu0));
    line("kappa(B)", format!("{:.6}", c.kappa_b));
    line("b0", format!("{:.6}", c.b0));
    line("c0", format!("{:.6}", c.c0));
    line("contraction", c.contraction.map_or("undefined".into(), |v| format!("{v:.6}")));
    line("gamma1 + gamma2 < 2", c.cond_step_sum.to_string());
    line("contraction < 1", c.cond_contraction.to_string());
    line("sufficient condition (kappa, nu0)", c.cond_sufficient.to_string());
    line("gamma2 + 3 gamma1 > 3", c.cond_surrogate.to_string());
    line("nu0 > 0", c.nu0_positive.to_string());
    for (name, d) in [("u0' B_hat u0", &report.denominator_at_init), ("v' B_hat v (truth)", &report.denominator_at_truth)] {
        line(name, format!("{:.6} ({})", d.value, if d.positive { "positive" } else { "NOT positive" }));
    }
    for s in &report.lemma_suites {
        line(
            &format!("lemma suite {}", s.name),
            format!("{}/{} hold ({})", s.draws - s.failures, s.draws, if s.passed() { "pass" } else { "FAIL" }),
        );
    }
    if let Some(out) = &a.out {
        let body = serde_json::to_value(&report).map_err(gepflow::Error::from)?;
        write_text(out, &prov.json(body))?;
    }
    if report.lemma_suites.iter().all(|s| s.passed()) {
        Ok(())
    } else {
        Err(Failure::Validation("a lemma suite failed".into()))
    }
}
