//! Iterative estimators for the leading generalized eigenvector.
//!
//! [`prfm`] is the projected Rayleigh flow: a gradient step on the Rayleigh
//! quotient followed by a projection onto the prior's feasible set. [`rifle`]
//! (truncated Rayleigh flow) and [`ppower`] (projected power iteration on `Â`
//! alone) are the baselines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, distance, dot, generalized_eig, MatrixPair, SymMatrix};
use crate::priors::{sparse_truncate, Projector};
use crate::rng::SeededStream;

pub const DEFAULT_ETA: f64 = 7.0 / 32.0;
pub const DEFAULT_ETA_PRIME: f64 = 35.0 / 32.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub step_size: f64,
    pub max_iters: usize,
    /// `None` means the normalized all-ones vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    pub denominator_floor: f64,
    pub record_trace: bool,
    /// Stop once `‖u_{t+1} − u_t‖ ≤ tol`; `None` always runs `max_iters`.
    pub early_stop: Option<f64>,
    /// Known truth, used only for trace columns.
    #[serde(skip)]
    pub reference: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_size: DEFAULT_ETA,
            max_iters: 100,
            init: None,
            denominator_floor: 1e-10,
            record_trace: true,
            early_stop: Some(1e-9),
            reference: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidInput(format!("step size {} must be positive", self.step_size)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if !(self.denominator_floor > 0.0) {
            return Err(Error::InvalidInput("denominator floor must be positive".into()));
        }
        if let Some(u) = &self.init {
            check_len(u, n)?;
            let nrm = dot(u, u).sqrt();
            if (nrm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!("init has norm {nrm}, expected 1")));
            }
        }
        if let Some(v) = &self.reference {
            check_len(v, n)?;
        }
        Ok(())
    }

    pub fn initial_vector(&self, n: usize) -> Vec<f64> {
        self.init
            .clone()
            .unwrap_or_else(|| vec![1.0 / (n as f64).sqrt(); n])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub rho: f64,
    pub cos_sim: Option<f64>,
    pub dist: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// One row per iterate `u_0 … u_T` when tracing is on, otherwise empty.
    pub rows: Vec<TraceRow>,
    pub final_vector: Vec<f64>,
    pub iterations_run: usize,
}

impl RunTrace {
    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.dist).collect()
    }
}

/// Which estimator to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "lowercase")]
pub enum SolverKind {
    /// Step size comes from [`SolverConfig::step_size`].
    Prfm,
    Rifle { s: usize, eta_prime: f64 },
    Ppower,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Prfm => "prfm",
            Self::Rifle { .. } => "rifle",
            Self::Ppower => "ppower",
        }
    }
}

struct Tracer<'a> {
    reference: Option<&'a [f64]>,
    enabled: bool,
    rows: Vec<TraceRow>,
}

impl<'a> Tracer<'a> {
    fn new(cfg: &'a SolverConfig) -> Self {
        Self {
            reference: cfg.reference.as_deref(),
            enabled: cfg.record_trace,
            rows: Vec::new(),
        }
    }

    fn record(&mut self, t: usize, rho: f64, u: &[f64]) {
        if !self.enabled {
            return;
        }
        self.rows.push(TraceRow {
            t,
            rho,
            cos_sim: self.reference.map(|v| dot(u, v)),
            dist: self.reference.map(|v| distance(u, v)),
        });
    }

    fn finish(self, u: Vec<f64>, iterations_run: usize) -> RunTrace {
        RunTrace {
            rows: self.rows,
            final_vector: u,
            iterations_run,
        }
    }
}

fn guarded_rho(a: &SymMatrix, b: &SymMatrix, u: &[f64], floor: f64, t: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let bu = b.matvec(u);
    let den = dot(u, &bu);
    if !(den > floor) {
        return Err(Error::DenominatorNonPositive { iteration: t, value: den });
    }
    let au = a.matvec(u);
    Ok((dot(u, &au) / den, au, bu))
}

fn converged(cfg: &SolverConfig, old: &[f64], new: &[f64]) -> bool {
    cfg.early_stop.is_some_and(|tol| distance(old, new) <= tol)
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Projected Rayleigh flow:
/// `ρ_t = u_tᵀÂu_t / u_tᵀB̂u_t`, `u_{t+1} = P(u_t + η(Â − ρ_t B̂)u_t)`.
pub fn prfm(a_hat: &SymMatrix, b_hat: &SymMatrix, p: &Projector, cfg: &SolverConfig) -> Result<RunTrace> {
    check_dims(a_hat, b_hat)?;
    let n = a_hat.dim();
    cfg.validate(n)?;
    p.validate(n)?;
    let eta = cfg.step_size;
    let mut u = cfg.initial_vector(n);
    let mut tracer = Tracer::new(cfg);
    let mut t = 0;
    loop {
        let (rho, au, bu) = guarded_rho(a_hat, b_hat, &u, cfg.denominator_floor, t)?;
        tracer.record(t, rho, &u);
        if t == cfg.max_iters {
            break;
        }
        let x: Vec<f64> = (0..n).map(|i| u[i] + eta * (au[i] - rho * bu[i])).collect();
        let next = p.project(&x)?;
        t += 1;
        let done = converged(cfg, &u, &next);
        u = next;
        if done {
            let (rho, _, _) = guarded_rho(a_hat, b_hat, &u, cfg.denominator_floor, t)?;
            tracer.record(t, rho, &u);
            break;
        }
    }
    Ok(tracer.finish(u, t))
}

/// Truncated Rayleigh flow with step `η′/ρ_t`.
pub fn rifle(
    a_hat: &SymMatrix,
    b_hat: &SymMatrix,
    s: usize,
    eta_prime: f64,
    cfg: &SolverConfig,
) -> Result<RunTrace> {
    check_dims(a_hat, b_hat)?;
    let n = a_hat.dim();
    cfg.validate(n)?;
    if s == 0 || s > n {
        return Err(Error::InvalidInput(format!("sparsity {s} outside [1, {n}]")));
    }
    if !(eta_prime > 0.0) {
        return Err(Error::InvalidInput("eta_prime must be positive".into()));
    }
    let mut u = cfg.initial_vector(n);
    let mut tracer = Tracer::new(cfg);
    let mut t = 0;
    loop {
        let (rho, au, bu) = guarded_rho(a_hat, b_hat, &u, cfg.denominator_floor, t)?;
        tracer.record(t, rho, &u);
        if t == cfg.max_iters {
            break;
        }
        if !(rho > cfg.denominator_floor) {
            return Err(Error::NonPositiveRho { iteration: t, value: rho });
        }
        let step = eta_prime / rho;
        let x: Vec<f64> = (0..n).map(|i| u[i] + step * (au[i] - rho * bu[i])).collect();
        let next = sparse_truncate(&x, s)?;
        t += 1;
        let done = converged(cfg, &u, &next);
        u = next;
        if done {
            let (rho, _, _) = guarded_rho(a_hat, b_hat, &u, cfg.denominator_floor, t)?;
            tracer.record(t, rho, &u);
            break;
        }
    }
    Ok(tracer.finish(u, t))
}

/// Projected power iteration `u_{t+1} = P(Â u_t)`. Ignores `B̂`; the trace's
/// `rho` column is `uᵀÂu / uᵀu`.
pub fn ppower(a_hat: &SymMatrix, p: &Projector, cfg: &SolverConfig) -> Result<RunTrace> {
    let n = a_hat.dim();
    cfg.validate(n)?;
    p.validate(n)?;
    let mut u = cfg.initial_vector(n);
    let mut tracer = Tracer::new(cfg);
    let mut t = 0;
    loop {
        let au = a_hat.matvec(&u);
        tracer.record(t, dot(&u, &au) / dot(&u, &u), &u);
        if t == cfg.max_iters {
            break;
        }
        if dot(&au, &au).sqrt() <= 1e-12 {
            return Err(Error::ZeroVector);
        }
        let next = p.project(&au)?;
        t += 1;
        let done = converged(cfg, &u, &next);
        u = next;
        if done {
            let au = a_hat.matvec(&u);
            tracer.record(t, dot(&u, &au) / dot(&u, &u), &u);
            break;
        }
    }
    Ok(tracer.finish(u, t))
}

/// Runs one solver with the given configuration.
pub fn run_solver(
    kind: SolverKind,
    a_hat: &SymMatrix,
    b_hat: &SymMatrix,
    p: &Projector,
    cfg: &SolverConfig,
) -> Result<RunTrace> {
    match kind {
        SolverKind::Prfm => prfm(a_hat, b_hat, p, cfg),
        SolverKind::Rifle { s, eta_prime } => rifle(a_hat, b_hat, s, eta_prime, cfg),
        SolverKind::Ppower => ppower(a_hat, p, cfg),
    }
}

/// The quantity restarts are ranked by: `uᵀÂu / uᵀB̂u`, or `uᵀÂu` for
/// projected power (which never looks at `B̂`).
pub fn empirical_objective(kind: SolverKind, a_hat: &SymMatrix, b_hat: &SymMatrix, u: &[f64]) -> f64 {
    let num = a_hat.quad_form(u);
    match kind {
        SolverKind::Ppower => num,
        _ => num / b_hat.quad_form(u),
    }
}

#[derive(Debug)]
pub struct BestRun {
    pub restart: usize,
    pub objective: f64,
    pub trace: RunTrace,
    /// Restarts that errored, with their errors.
    pub failures: Vec<(usize, Error)>,
}

/// Starting vector for restart `i`: the configured init for `i = 0`, else a
/// uniform unit vector folded into the nonnegative orthant.
pub fn restart_init(cfg: &SolverConfig, n: usize, seed: u64, i: usize) -> Vec<f64> {
    if i == 0 {
        return cfg.initial_vector(n);
    }
    let mut u = SeededStream::derived(seed, &[i as u64]).unit_vector(n);
    u.iter_mut().for_each(|x| *x = x.abs());
    u
}

/// Runs `restarts` initializations (in parallel) and keeps the one with the
/// largest empirical objective. Ties go to the lowest restart index, so the
/// result does not depend on scheduling.
pub fn run_with_restarts(
    kind: SolverKind,
    a_hat: &SymMatrix,
    b_hat: &SymMatrix,
    p: &Projector,
    cfg: &SolverConfig,
    restarts: usize,
    seed: u64,
) -> Result<BestRun> {
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts must be at least 1".into()));
    }
    let n = a_hat.dim();
    let results: Vec<Result<RunTrace>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.init = Some(restart_init(cfg, n, seed, i));
            run_solver(kind, a_hat, b_hat, p, &c)
        })
        .collect();
    let mut best: Option<(usize, f64, RunTrace)> = None;
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(trace) => {
                let obj = empirical_objective(kind, a_hat, b_hat, &trace.final_vector);
                if best.as_ref().is_none_or(|(_, o, _)| obj > *o) {
                    best = Some((i, obj, trace));
                }
            }
            Err(e) => failures.push((i, e)),
        }
    }
    let (restart, objective, trace) = best.ok_or(Error::AllRunsFailed(restarts))?;
    Ok(BestRun { restart, objective, trace, failures })
}

/// Leading unit generalized eigenvector, requiring a strict gap.
pub fn exact_solve(pair: &MatrixPair) -> Result<Vec<f64>> {
    let spec = generalized_eig(pair)?;
    if !(spec.gap > 1e-10) {
        return Err(Error::DegenerateGap(spec.gap));
    }
    Ok(spec.leading_unit)
}

/// JSON trace written by `solve`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceReport {
    pub solver: String,
    pub config: serde_json::Value,
    pub rows: Vec<TraceRow>,
    #[serde(rename = "final")]
    pub final_vector: Vec<f64>,
    pub status: String,
}
