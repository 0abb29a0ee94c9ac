//! Experiment sweeps over the sample size `m`, metrics and summaries.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance, dot, norm};
use crate::priors::ProjectorSpec;
use crate::problems::{generate, ProblemKind};
use crate::rng::{derive_seed, SeededStream};
use crate::solvers::{run_with_restarts, SolverConfig, SolverKind, DEFAULT_ETA, DEFAULT_ETA_PRIME};

/// `uᵀv*` after renormalizing `u`.
pub fn cosine_similarity(v_star: &[f64], u: &[f64]) -> Result<f64> {
    let nu = norm(u);
    let nv = norm(v_star);
    if !(nu > 1e-12) || !(nv > 1e-12) {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v_star) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `min(‖u − v*‖, ‖u + v*‖)`.
pub fn signed_distance(u: &[f64], v_star: &[f64]) -> f64 {
    let neg: Vec<f64> = v_star.iter().map(|x| -x).collect();
    distance(u, v_star).min(distance(u, &neg))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Prfm,
    Ppower,
    Rifle,
}

impl SolverChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "prfm" => Ok(Self::Prfm),
            "ppower" => Ok(Self::Ppower),
            "rifle" => Ok(Self::Rifle),
            other => Err(Error::InvalidInput(format!("unknown solver `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Prfm => "prfm",
            Self::Ppower => "ppower",
            Self::Rifle => "rifle",
        }
    }
}

/// How the planted signal is drawn for each trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SignalSpec {
    /// Uniform on the sphere.
    Dense,
    /// Uniform on the sphere, folded into the nonnegative orthant.
    Nonnegative,
    /// `sparsity` random coordinates with values `±1/√sparsity`. Equal
    /// magnitudes keep every support entry detectable, which exact support
    /// recovery needs.
    Sparse { sparsity: usize },
}

impl SignalSpec {
    pub fn draw(&self, n: usize, stream: &mut SeededStream) -> Result<Vec<f64>> {
        match *self {
            Self::Dense => Ok(stream.unit_vector(n)),
            Self::Nonnegative => Ok(stream.unit_vector(n).into_iter().map(f64::abs).collect()),
            Self::Sparse { sparsity } => {
                if sparsity == 0 || sparsity > n {
                    return Err(Error::InvalidInput(format!("signal sparsity {sparsity} outside [1, {n}]")));
                }
                let mut idx: Vec<usize> = (0..n).collect();
                for i in 0..sparsity {
                    let j = i + (stream.next_u64() % (n - i) as u64) as usize;
                    idx.swap(i, j);
                }
                let mut v = vec![0.0; n];
                let mag = 1.0 / (sparsity as f64).sqrt();
                for &i in &idx[..sparsity] {
                    v[i] = if stream.next_u64() & 1 == 0 { mag } else { -mag };
                }
                Ok(v)
            }
        }
    }
}

fn default_restarts() -> usize {
    10
}
fn default_trials() -> usize {
    20
}
fn default_eta() -> f64 {
    DEFAULT_ETA
}
fn default_eta_prime() -> f64 {
    DEFAULT_ETA_PRIME
}
fn default_max_iters() -> usize {
    100
}
fn default_early_stop() -> Option<f64> {
    Some(1e-9)
}
fn default_solvers() -> Vec<SolverChoice> {
    vec![SolverChoice::Prfm]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: ProblemKind,
    pub n: usize,
    pub m_values: Vec<usize>,
    pub signal: SignalSpec,
    pub prior: ProjectorSpec,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverChoice>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_eta_prime")]
    pub eta_prime: f64,
    /// Rifle's truncation level.
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_early_stop")]
    pub early_stop: Option<f64>,
    #[serde(default)]
    pub base_seed: u64,
    /// Fill `wall_ms`; off by default so output bytes stay reproducible.
    #[serde(default)]
    pub record_wall_ms: bool,
}

impl SweepSpec {
    pub fn new(kind: ProblemKind, n: usize, m_values: Vec<usize>, prior: ProjectorSpec) -> Self {
        Self {
            kind,
            n,
            m_values,
            signal: SignalSpec::Dense,
            prior,
            solvers: default_solvers(),
            trials: default_trials(),
            restarts: default_restarts(),
            eta: DEFAULT_ETA,
            eta_prime: DEFAULT_ETA_PRIME,
            s: None,
            max_iters: default_max_iters(),
            early_stop: default_early_stop(),
            base_seed: 0,
            record_wall_ms: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidInput("m_values must be nonempty and positive".into()));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("m_values must be strictly ascending".into()));
        }
        if self.trials == 0 || self.restarts == 0 || self.n == 0 {
            return Err(Error::InvalidInput("n, trials and restarts must be positive".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidInput("at least one solver is required".into()));
        }
        if self.solvers.contains(&SolverChoice::Rifle) && self.s.is_none() {
            return Err(Error::InvalidInput("rifle needs `s`".into()));
        }
        if !(self.eta > 0.0) || !(self.eta_prime > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidInput("eta, eta_prime and max_iters must be positive".into()));
        }
        Ok(())
    }

    fn solver_kind(&self, c: SolverChoice) -> SolverKind {
        match c {
            SolverChoice::Prfm => SolverKind::Prfm,
            SolverChoice::Ppower => SolverKind::Ppower,
            SolverChoice::Rifle => SolverKind::Rifle {
                s: self.s.unwrap_or(self.n),
                eta_prime: self.eta_prime,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub solver: String,
    pub m: usize,
    pub trial: usize,
    pub cos_sim: Option<f64>,
    pub abs_cos_sim: Option<f64>,
    pub dist: Option<f64>,
    pub signed_dist_min: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_ms: f64,
    pub status: String,
    /// `|cos|` against the population leading eigenvector when it differs
    /// from `v*`. Reported in summaries, not in the CSV.
    #[serde(skip)]
    pub abs_cos_leading: Option<f64>,
}

impl ResultRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Seed-derivation tags, so every random object has its own stream.
const TAG_SIGNAL: u64 = 1;
const TAG_PRIOR: u64 = 2;
const TAG_INSTANCE: u64 = 3;
const TAG_RESTART: u64 = 4;

/// Runs every (solver, m, trial) cell. The signal and prior depend only on
/// the trial, the instance on (m, trial), so solvers within a cell see the
/// same data. Rows come back sorted by (solver, m, trial) whatever `jobs` is;
/// `jobs = 0` uses one thread per core.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let cells: Vec<(usize, usize)> = spec
        .m_values
        .iter()
        .flat_map(|&m| (0..spec.trials).map(move |t| (m, t)))
        .collect();
    let mut rows: Vec<ResultRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, trial)| run_cell(spec, m, trial))
            .collect::<Result<Vec<Vec<ResultRow>>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    rows.sort_by(|a, b| (&a.solver, a.m, a.trial).cmp(&(&b.solver, b.m, b.trial)));
    Ok(rows)
}

fn failed_row(solver: &str, m: usize, trial: usize, status: String) -> ResultRow {
    ResultRow {
        solver: solver.to_string(),
        m,
        trial,
        cos_sim: None,
        abs_cos_sim: None,
        dist: None,
        signed_dist_min: None,
        iterations: None,
        wall_ms: 0.0,
        status,
        abs_cos_leading: None,
    }
}

/// Signal for a trial; shared by every `m`.
pub fn trial_signal(spec: &SweepSpec, trial: usize) -> Result<Vec<f64>> {
    let mut s = SeededStream::derived(spec.base_seed, &[TAG_SIGNAL, trial as u64]);
    spec.signal.draw(spec.n, &mut s)
}

fn run_cell(spec: &SweepSpec, m: usize, trial: usize) -> Result<Vec<ResultRow>> {
    let v_star = trial_signal(spec, trial)?;
    let prior_seed = derive_seed(spec.base_seed, &[TAG_PRIOR, trial as u64]);
    // A bad prior is a configuration error, so it aborts the sweep.
    let projector = spec.prior.build(spec.n, Some(&v_star), prior_seed)?;
    let instance = generate(spec.kind, &v_star, m, derive_seed(spec.base_seed, &[TAG_INSTANCE, m as u64, trial as u64]))?;
    let truth = instance.truth()?;
    let leading = (spec.kind == ProblemKind::DiagB).then(|| truth.leading_unit.clone());
    let restart_seed = derive_seed(spec.base_seed, &[TAG_RESTART, m as u64, trial as u64]);
    let cfg = SolverConfig {
        step_size: spec.eta,
        max_iters: spec.max_iters,
        early_stop: spec.early_stop,
        record_trace: false,
        ..SolverConfig::default()
    };
    let mut out = Vec::with_capacity(spec.solvers.len());
    for &choice in &spec.solvers {
        let kind = spec.solver_kind(choice);
        let start = Instant::now();
        let result = run_with_restarts(kind, &instance.a_hat, &instance.b_hat, &projector, &cfg, spec.restarts, restart_seed);
        let wall_ms = if spec.record_wall_ms { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let row = match result.and_then(|best| {
            let u = best.trace.final_vector;
            Ok((cosine_similarity(&v_star, &u)?, u, best.trace.iterations_run))
        }) {
            Ok((cos, u, iterations)) => ResultRow {
                solver: choice.name().to_string(),
                m,
                trial,
                cos_sim: Some(cos),
                abs_cos_sim: Some(cos.abs()),
                dist: Some(distance(&u, &v_star)),
                signed_dist_min: Some(signed_distance(&u, &v_star)),
                iterations: Some(iterations),
                wall_ms,
                status: "ok".to_string(),
                abs_cos_leading: leading.as_ref().map(|l| dot(l, &u).abs()),
            },
            Err(e) => {
                let mut r = failed_row(choice.name(), m, trial, format!("error: {e}"));
                r.wall_ms = wall_ms;
                r
            }
        };
        out.push(row);
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "solver,m,trial,cos_sim,abs_cos_sim,dist,signed_dist_min,iterations,wall_ms,status";

/// Writes rows (with header) as CSV.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

/// CSV as a string.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares on `(ln m, ln error)`.
pub fn fit_loglog_slope(pairs: &[(f64, f64)]) -> Result<LogLogFit> {
    if pairs.iter().any(|&(m, e)| !(m > 0.0) || !(e > 0.0)) {
        return Err(Error::DegenerateFit("values must be positive"));
    }
    let mut ms: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    if ms.len() < 3 {
        return Err(Error::DegenerateFit("need at least three distinct m values"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    // Constant errors are fit perfectly by a flat line.
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LogLogFit { slope, intercept, r_squared })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n − 1`), zero for a single value.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub solver: String,
    pub m: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_abs_cos: f64,
    pub std_abs_cos: f64,
    pub mean_signed_dist: f64,
    pub std_signed_dist: f64,
    pub median_signed_dist: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_abs_cos_leading: Option<f64>,
}

/// Per-(solver, m) statistics over successful rows; failures are counted
/// but never averaged in.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryCell> {
    let mut keys: Vec<(String, usize)> = rows.iter().map(|r| (r.solver.clone(), r.m)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(solver, m)| {
            let cell: Vec<&ResultRow> = rows.iter().filter(|r| r.solver == solver && r.m == m).collect();
            let good: Vec<&&ResultRow> = cell.iter().filter(|r| r.ok()).collect();
            let cos: Vec<f64> = good.iter().filter_map(|r| r.abs_cos_sim).collect();
            let dist: Vec<f64> = good.iter().filter_map(|r| r.signed_dist_min).collect();
            let lead: Vec<f64> = good.iter().filter_map(|r| r.abs_cos_leading).collect();
            let stat = |xs: &[f64], f: fn(&[f64]) -> f64| if xs.is_empty() { f64::NAN } else { f(xs) };
            SummaryCell {
                solver,
                m,
                runs: cell.len(),
                failures: cell.len() - good.len(),
                mean_abs_cos: stat(&cos, mean),
                std_abs_cos: stat(&cos, sample_std),
                mean_signed_dist: stat(&dist, mean),
                std_signed_dist: stat(&dist, sample_std),
                median_signed_dist: stat(&dist, median),
                mean_abs_cos_leading: (!lead.is_empty()).then(|| mean(&lead)),
            }
        })
        .collect()
}

/// Aligned plain-text table.
pub fn format_summary(cells: &[SummaryCell]) -> String {
    let with_leading = cells.iter().any(|c| c.mean_abs_cos_leading.is_some());
    let mut out = format!(
        "{:<8} {:>7} {:>5} {:>6} {:>17} {:>17} {:>12}",
        "solver", "m", "runs", "failed", "|cos|", "signed_dist", "median_dist"
    );
    if with_leading {
        out.push_str(&format!(" {:>14}", "|cos| leading"));
    }
    out.push('\n');
    for c in cells {
        out.push_str(&format!(
            "{:<8} {:>7} {:>5} {:>6} {:>17} {:>17} {:>12.4}",
            c.solver,
            c.m,
            c.runs,
            c.failures,
            format!("{:.4} ± {:.4}", c.mean_abs_cos, c.std_abs_cos),
            format!("{:.4} ± {:.4}", c.mean_signed_dist, c.std_signed_dist),
            c.median_signed_dist
        ));
        if with_leading {
            match c.mean_abs_cos_leading {
                Some(v) => out.push_str(&format!(" {v:>14.4}")),
                None => out.push_str(&format!(" {:>14}", "-")),
            }
        }
        out.push('\n');
    }
    out
}

/// Median signed distance per `m` for one solver, ready for
/// [`fit_loglog_slope`].
pub fn median_errors(rows: &[ResultRow], solver: &str) -> Vec<(f64, f64)> {
    summarize(rows)
        .into_iter()
        .filter(|c| c.solver == solver && c.runs > c.failures)
        .map(|c| (c.m as f64, c.median_signed_dist))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::PriorKind;
    use proptest::prelude::*;

    fn subspace_prior(k: usize) -> ProjectorSpec {
        ProjectorSpec { prior: PriorKind::Subspace, k: Some(k), ..ProjectorSpec::sphere() }
    }

    #[test]
    fn cosine_examples() {
        let v = [0.6, 0.8];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(&v, &[-0.6, -0.8]).unwrap() + 1.0).abs() < 1e-15);
        assert!(cosine_similarity(&v, &[0.8, -0.6]).unwrap().abs() < 1e-12);
        assert!(matches!(cosine_similarity(&v, &[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn signed_distance_examples() {
        let v = [0.0, 1.0, 0.0];
        assert_eq!(signed_distance(&v, &v), 0.0);
        assert_eq!(signed_distance(&[0.0, -1.0, 0.0], &v), 0.0);
        assert!((signed_distance(&[1.0, 0.0, 0.0], &v) - 2f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn signed_distance_closed_form(seed in any::<u64>(), n in 1usize..12) {
            let mut s = SeededStream::new(seed);
            let u = s.unit_vector(n);
            let v = s.unit_vector(n);
            let c = cosine_similarity(&v, &u).unwrap();
            let closed = (2.0 - 2.0 * c.abs()).max(0.0).sqrt();
            prop_assert!((signed_distance(&u, &v) - closed).abs() < 1e-10);
            prop_assert!(signed_distance(&u, &v) >= 0.0);
        }
    }

    #[test]
    fn slope_of_exact_rate() {
        let pairs: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0].iter().map(|&m: &f64| (m, 3.0 / m.sqrt())).collect();
        let fit = fit_loglog_slope(&pairs).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat = fit_loglog_slope(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r_squared, 1.0);
    }

    #[test]
    fn slope_needs_three_points() {
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.4)]).is_err());
    }

    fn row(solver: &str, m: usize, trial: usize, cos: f64) -> ResultRow {
        ResultRow {
            solver: solver.into(),
            m,
            trial,
            cos_sim: Some(cos),
            abs_cos_sim: Some(cos.abs()),
            dist: Some(0.1),
            signed_dist_min: Some(0.1),
            iterations: Some(3),
            wall_ms: 0.0,
            status: "ok".into(),
            abs_cos_leading: None,
        }
    }

    #[test]
    fn summary_arithmetic() {
        let one = summarize(&[row("prfm", 10, 0, 0.7)]);
        assert_eq!(one[0].std_abs_cos, 0.0);
        let two = summarize(&[row("prfm", 10, 0, 0.7), row("prfm", 10, 1, 0.9)]);
        assert!((two[0].mean_abs_cos - 0.8).abs() < 1e-15);
        assert!((two[0].std_abs_cos - 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn failures_do_not_contaminate() {
        let good = vec![row("prfm", 10, 0, 0.7), row("prfm", 10, 1, 0.9)];
        let mut all = good.clone();
        all.push(failed_row("prfm", 10, 2, "error: boom".into()));
        let a = summarize(&good);
        let b = summarize(&all);
        assert_eq!(a[0].mean_abs_cos, b[0].mean_abs_cos);
        assert_eq!(a[0].std_abs_cos, b[0].std_abs_cos);
        assert_eq!(b[0].failures, 1);
        assert!(format_summary(&b).contains("0.8000 ± 0.1414"));
    }

    #[test]
    fn csv_header_and_failures() {
        let rows = vec![row("prfm", 10, 0, 0.5), failed_row("rifle", 10, 0, "error: a, b".into())];
        let text = rows_to_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "prfm,10,0,0.5,0.5,0.1,0.1,3,0.0,ok");
        assert_eq!(lines.next().unwrap(), "rifle,10,0,,,,,,0.0,\"error: a, b\"");
        assert_eq!(rows_to_csv(&[]).unwrap().trim(), CSV_HEADER);
    }

    #[test]
    fn single_cell_sweep() {
        let mut spec = SweepSpec::new(ProblemKind::Spiked, 16, vec![200], subspace_prior(3));
        spec.trials = 1;
        spec.restarts = 2;
        let rows = run_sweep(&spec, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].ok());
        let c = rows[0].cos_sim.unwrap();
        assert!((-1.0..=1.0).contains(&c));
        assert!(rows[0].signed_dist_min.unwrap() >= 0.0);
    }

    #[test]
    fn sweep_is_deterministic_across_jobs() {
        let mut spec = SweepSpec::new(ProblemKind::Spiked, 12, vec![50, 100], subspace_prior(3));
        spec.trials = 3;
        spec.restarts = 3;
        spec.solvers = vec![SolverChoice::Rifle, SolverChoice::Prfm, SolverChoice::Ppower];
        spec.s = Some(4);
        let a = rows_to_csv(&run_sweep(&spec, 1).unwrap()).unwrap();
        let b = rows_to_csv(&run_sweep(&spec, 4).unwrap()).unwrap();
        assert_eq!(a, b);
        let solvers: Vec<&str> = a.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(solvers.first(), Some(&"ppower"));
        assert_eq!(solvers.last(), Some(&"rifle"));
    }

    #[test]
    fn more_samples_help() {
        let mut spec = SweepSpec::new(ProblemKind::Spiked, 32, vec![100, 1600], subspace_prior(4));
        spec.trials = 20;
        spec.restarts = 2;
        let rows = run_sweep(&spec, 4).unwrap();
        let med = median_errors(&rows, "prfm");
        assert!(med[1].1 <= med[0].1, "{med:?}");
    }

    #[test]
    fn sparse_signal_has_requested_support() {
        let mut s = SeededStream::new(2);
        let v = SignalSpec::Sparse { sparsity: 5 }.draw(40, &mut s).unwrap();
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 5);
        assert!((norm(&v) - 1.0).abs() < 1e-12);
        let w = SignalSpec::Nonnegative.draw(10, &mut s).unwrap();
        assert!(w.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(ProblemKind::Spiked, 8, vec![20, 10], ProjectorSpec::sphere());
        assert!(spec.validate().is_err());
        spec.m_values = vec![10, 20];
        spec.validate().unwrap();
        spec.solvers = vec![SolverChoice::Rifle];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn diag_b_rows_carry_both_scores() {
        let mut spec = SweepSpec::new(ProblemKind::DiagB, 10, vec![300], ProjectorSpec::sphere());
        spec.trials = 2;
        spec.restarts = 1;
        let rows = run_sweep(&spec, 2).unwrap();
        assert!(rows.iter().all(|r| r.abs_cos_leading.is_some()));
        assert!(summarize(&rows)[0].mean_abs_cos_leading.is_some());
    }
}
