//! Synthetic instances and statistical pair builders.
//!
//! Each generator reads one [`SeededStream`] in a fixed order: the spike
//! amplitudes `γ`, then the noise vectors `z`, then the `B̂` samples `w`, then
//! the phase-retrieval sensing vectors `g`. Vectors are drawn one full vector
//! at a time, coordinate 0 first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generative::Generator;
use crate::linalg::{
    check_len, cholesky, dot, extreme_eigenvalues, generalized_eig, norm, spectral_norm,
    MatrixPair, SymMatrix,
};
use crate::rng::SeededStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Spiked,
    PhaseRetrieval,
    DiagB,
    Custom,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "spiked" => Ok(Self::Spiked),
            "phase_retrieval" | "phase-retrieval" => Ok(Self::PhaseRetrieval),
            "diag_b" | "diag-b" => Ok(Self::DiagB),
            "custom" => Ok(Self::Custom),
            other => Err(Error::InvalidInput(format!("unknown instance kind `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Spiked => "spiked",
            Self::PhaseRetrieval => "phase_retrieval",
            Self::DiagB => "diag_b",
            Self::Custom => "custom",
        }
    }
}

/// Population pair behind a synthetic instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Truth {
    pub pair: MatrixPair,
    /// The planted signal.
    pub v_star: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Unit leading generalized eigenvector of `pair`. Equals `v_star` unless
    /// `B ≠ I` tilts it away.
    pub leading_unit: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub m: usize,
    pub seed: u64,
    pub a_hat: SymMatrix,
    pub b_hat: SymMatrix,
    pub truth: Option<Truth>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.a_hat.dim()
    }

    pub fn truth(&self) -> Result<&Truth> {
        self.truth.as_ref().ok_or(Error::TruthMissing)
    }

    /// Checks dimensions, symmetry (by construction) and the unit norm of `v*`.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.b_hat.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.b_hat.dim() });
        }
        if let Some(t) = &self.truth {
            if t.pair.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.pair.dim() });
            }
            check_len(&t.v_star, n)?;
            check_len(&t.leading_unit, n)?;
            if (norm(&t.v_star) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput("v_star must have unit norm".into()));
            }
        }
        Ok(())
    }
}

fn check_signal(v: &[f64], m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    if v.is_empty() || (norm(v) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("v_star must be a nonempty unit vector".into()));
    }
    Ok(())
}

fn finish(mut s: SymMatrix, m: usize) -> SymMatrix {
    s.mirror_upper();
    s.scaled(1.0 / m as f64)
}

/// `B̂ = (1/m) Σ wᵢwᵢᵀ` with `wᵢ ~ N(0, diag(scale²))`.
fn sample_b(stream: &mut SeededStream, n: usize, m: usize, scale: &[f64]) -> SymMatrix {
    let mut b = SymMatrix::zeros(n);
    let mut w = vec![0.0; n];
    for _ in 0..m {
        for (wi, si) in w.iter_mut().zip(scale) {
            *wi = si * stream.standard_normal();
        }
        b.accumulate_upper(&w, 1.0);
    }
    finish(b, m)
}

fn spiked_a(stream: &mut SeededStream, v: &[f64], m: usize) -> SymMatrix {
    let n = v.len();
    let gammas: Vec<f64> = (0..m).map(|_| stream.standard_normal()).collect();
    let mut a = SymMatrix::zeros(n);
    let mut x = vec![0.0; n];
    for g in gammas {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi = 2.0 * g * vi + stream.standard_normal();
        }
        a.accumulate_upper(&x, 1.0);
    }
    finish(a, m)
}

fn spiked_population(v: &[f64]) -> SymMatrix {
    let mut a = SymMatrix::identity(v.len());
    a.add_outer(v, 4.0);
    a
}

/// Spiked covariance pair: `Â` from samples `2γᵢv* + zᵢ`, `B̂` from white
/// noise. Population pair `(4v*v*ᵀ + I, I)` with `λ₁ = 5`, `λ₂ = 1`.
pub fn gen_spiked(v_star: &[f64], m: usize, seed: u64) -> Result<ProblemInstance> {
    check_signal(v_star, m)?;
    let n = v_star.len();
    let mut stream = SeededStream::new(seed);
    let a_hat = spiked_a(&mut stream, v_star, m);
    let b_hat = sample_b(&mut stream, n, m, &vec![1.0; n]);
    let pair = MatrixPair::new(spiked_population(v_star), SymMatrix::identity(n))?;
    Ok(ProblemInstance {
        kind: ProblemKind::Spiked,
        m,
        seed,
        a_hat,
        b_hat,
        truth: Some(Truth {
            pair,
            v_star: v_star.to_vec(),
            lambda1: 5.0,
            lambda2: 1.0,
            leading_unit: v_star.to_vec(),
        }),
    })
}

/// Phase-retrieval pair: `Â = (1/m) Σ yᵢgᵢgᵢᵀ` with `yᵢ = (gᵢᵀv*)²`.
///
/// For Gaussian `g`, `E[(gᵀv)² ggᵀ] = 2vvᵀ + I`, so the population pair is
/// `(2v*v*ᵀ + I, I)` with `λ₁ = 3`, `λ₂ = 1`.
pub fn gen_phase_retrieval(v_star: &[f64], m: usize, seed: u64) -> Result<ProblemInstance> {
    check_signal(v_star, m)?;
    let n = v_star.len();
    let mut stream = SeededStream::new(seed);
    let b_hat = sample_b(&mut stream, n, m, &vec![1.0; n]);
    let mut a = SymMatrix::zeros(n);
    for _ in 0..m {
        let g = stream.normal_vec(n);
        let y = dot(&g, v_star).powi(2);
        a.accumulate_upper(&g, y);
    }
    let a_hat = finish(a, m);
    let mut pop = SymMatrix::identity(n);
    pop.add_outer(v_star, 2.0);
    let pair = MatrixPair::new(pop, SymMatrix::identity(n))?;
    Ok(ProblemInstance {
        kind: ProblemKind::PhaseRetrieval,
        m,
        seed,
        a_hat,
        b_hat,
        truth: Some(Truth {
            pair,
            v_star: v_star.to_vec(),
            lambda1: 3.0,
            lambda2: 1.0,
            leading_unit: v_star.to_vec(),
        }),
    })
}

/// Spiked `Â` with `B̂` sampled from `N(0, diag(2, 1, …, 1))`, so `κ(B) = 2`.
/// The population leading eigenvector is computed, not assumed to be `v*`.
pub fn gen_diag_b(v_star: &[f64], m: usize, seed: u64) -> Result<ProblemInstance> {
    check_signal(v_star, m)?;
    let n = v_star.len();
    if n < 2 {
        return Err(Error::InvalidInput("diag-B instances need n ≥ 2".into()));
    }
    let mut stream = SeededStream::new(seed);
    let a_hat = spiked_a(&mut stream, v_star, m);
    let mut scale = vec![1.0; n];
    scale[0] = 2f64.sqrt();
    let b_hat = sample_b(&mut stream, n, m, &scale);
    let mut bdiag = vec![1.0; n];
    bdiag[0] = 2.0;
    let pair = MatrixPair::new(spiked_population(v_star), SymMatrix::diagonal(&bdiag))?;
    let spec = generalized_eig(&pair)?;
    let mut leading = spec.leading_unit.clone();
    if dot(&leading, v_star) < 0.0 {
        leading.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(ProblemInstance {
        kind: ProblemKind::DiagB,
        m,
        seed,
        a_hat,
        b_hat,
        truth: Some(Truth {
            pair,
            v_star: v_star.to_vec(),
            lambda1: spec.lambda1(),
            lambda2: spec.lambda2(),
            leading_unit: leading,
        }),
    })
}

/// Dispatches on `kind`; `Custom` has no generator.
pub fn generate(kind: ProblemKind, v_star: &[f64], m: usize, seed: u64) -> Result<ProblemInstance> {
    match kind {
        ProblemKind::Spiked => gen_spiked(v_star, m, seed),
        ProblemKind::PhaseRetrieval => gen_phase_retrieval(v_star, m, seed),
        ProblemKind::DiagB => gen_diag_b(v_star, m, seed),
        ProblemKind::Custom => Err(Error::InvalidInput("custom instances cannot be generated".into())),
    }
}

fn mean(xs: &[&[f64]], n: usize) -> Vec<f64> {
    let mut mu = vec![0.0; n];
    for x in xs {
        for (m, v) in mu.iter_mut().zip(x.iter()) {
            *m += v;
        }
    }
    let k = xs.len() as f64;
    mu.iter_mut().for_each(|m| *m /= k);
    mu
}

fn centered(x: &[f64], mu: &[f64]) -> Vec<f64> {
    x.iter().zip(mu).map(|(a, b)| a - b).collect()
}

/// Fisher discriminant pair `(Σ̂_b, Σ̂_w)`, both with `1/N` normalization.
pub fn build_fda_pair(samples: &[Vec<f64>], labels: &[usize]) -> Result<MatrixPair> {
    if samples.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: samples.len(), got: labels.len() });
    }
    let n = samples.first().map(Vec::len).ok_or(Error::DegenerateClasses)?;
    for x in samples {
        check_len(x, n)?;
    }
    let mut classes: BTreeMap<usize, Vec<&[f64]>> = BTreeMap::new();
    for (x, &l) in samples.iter().zip(labels) {
        classes.entry(l).or_default().push(x);
    }
    if classes.len() < 2 || classes.values().any(|c| c.len() < 2) {
        return Err(Error::DegenerateClasses);
    }
    let total = samples.len() as f64;
    let all: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
    let mu = mean(&all, n);
    let mut between = SymMatrix::zeros(n);
    let mut within = SymMatrix::zeros(n);
    for members in classes.values() {
        let mu_k = mean(members, n);
        between.accumulate_upper(&centered(&mu_k, &mu), members.len() as f64 / total);
        for x in members {
            within.accumulate_upper(&centered(x, &mu_k), 1.0 / total);
        }
    }
    between.mirror_upper();
    within.mirror_upper();
    if cholesky(&within).is_err() {
        return Err(Error::SingularWithinScatter);
    }
    MatrixPair::new(between, within)
}

/// Canonical correlation pair `([[0, Σ̂_xy], [Σ̂_yx, 0]], blockdiag(Σ̂_xx, Σ̂_yy))`
/// from centered samples with `1/N` normalization.
pub fn build_cca_pair(x_samples: &[Vec<f64>], y_samples: &[Vec<f64>]) -> Result<MatrixPair> {
    let count = x_samples.len();
    if count != y_samples.len() {
        return Err(Error::DimensionMismatch { expected: count, got: y_samples.len() });
    }
    if count < 2 {
        return Err(Error::InvalidInput("need at least two paired samples".into()));
    }
    let p = x_samples[0].len();
    let q = y_samples[0].len();
    for (x, y) in x_samples.iter().zip(y_samples) {
        check_len(x, p)?;
        check_len(y, q)?;
    }
    let xs: Vec<&[f64]> = x_samples.iter().map(Vec::as_slice).collect();
    let ys: Vec<&[f64]> = y_samples.iter().map(Vec::as_slice).collect();
    let (mx, my) = (mean(&xs, p), mean(&ys, q));
    let d = p + q;
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d * d];
    let inv = 1.0 / count as f64;
    for (x, y) in xs.iter().zip(&ys) {
        let cx = centered(x, &mx);
        let cy = centered(y, &my);
        for i in 0..p {
            for j in 0..p {
                b[i * d + j] += inv * cx[i] * cx[j];
            }
            for j in 0..q {
                a[i * d + p + j] += inv * cx[i] * cy[j];
            }
        }
        for i in 0..q {
            for j in 0..q {
                b[(p + i) * d + p + j] += inv * cy[i] * cy[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..q {
            a[(p + j) * d + i] = a[i * d + p + j];
        }
    }
    let b = SymMatrix::from_raw(d, b);
    let block = |lo: usize, len: usize| {
        let data = (0..len)
            .flat_map(|i| (0..len).map(move |j| (i, j)))
            .map(|(i, j)| b.get(lo + i, lo + j))
            .collect();
        SymMatrix::from_raw(len, data)
    };
    if cholesky(&block(0, p)).is_err() {
        return Err(Error::SingularBlock("x"));
    }
    if cholesky(&block(p, q)).is_err() {
        return Err(Error::SingularBlock("y"));
    }
    MatrixPair::new(SymMatrix::from_raw(d, a), b)
}

/// Bilinear-form deviations of `E = Â − A` and `F = B̂ − B` over finite
/// test sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub n: usize,
    pub m: usize,
    pub set_size: usize,
    pub max_e: f64,
    pub max_f: f64,
    /// `max_e / sqrt(ln(|S₁||S₂|) / m)`.
    pub c_hat_e: f64,
    pub c_hat_f: f64,
    pub norm_e: f64,
    pub norm_f: f64,
    pub n_over_m: f64,
}

/// Draws two sets of `set_size` unit vectors (range points of `generator`
/// when given, else uniform on the sphere) and measures `max |s₁ᵀEs₂|` and
/// `max |s₁ᵀFs₂|`. Nothing is enforced; the report is for the caller.
pub fn verify_perturbation(
    instance: &ProblemInstance,
    set_size: usize,
    seed: u64,
    generator: Option<&dyn Generator>,
) -> Result<PerturbationReport> {
    let truth = instance.truth()?;
    if set_size == 0 {
        return Err(Error::InvalidInput("set size must be at least 1".into()));
    }
    let n = instance.dim();
    if let Some(g) = generator {
        if g.output_dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.output_dim() });
        }
    }
    let e = instance.a_hat.sub(truth.pair.a())?;
    let f = instance.b_hat.sub(truth.pair.b())?;
    let draw = |tag: u64| -> Result<Vec<Vec<f64>>> {
        let mut s = SeededStream::derived(seed, &[tag]);
        (0..set_size)
            .map(|_| match generator {
                Some(g) => {
                    let z = s.in_ball(g.latent_dim(), g.latent_radius());
                    Ok(g.forward(&z)?.output)
                }
                None => Ok(s.unit_vector(n)),
            })
            .collect()
    };
    let s1 = draw(1)?;
    let s2 = draw(2)?;
    let mut max_e: f64 = 0.0;
    let mut max_f: f64 = 0.0;
    for x in &s1 {
        let ex = e.matvec(x);
        let fx = f.matvec(x);
        for y in &s2 {
            max_e = max_e.max(dot(&ex, y).abs());
            max_f = max_f.max(dot(&fx, y).abs());
        }
    }
    let m = instance.m;
    let rate = (((set_size * set_size) as f64).ln().max(f64::MIN_POSITIVE) / m as f64).sqrt();
    Ok(PerturbationReport {
        n,
        m,
        set_size,
        max_e,
        max_f,
        c_hat_e: max_e / rate,
        c_hat_f: max_f / rate,
        norm_e: spectral_norm(&e)?,
        norm_f: spectral_norm(&f)?,
        n_over_m: n as f64 / m as f64,
    })
}

/// Smallest eigenvalue, for PSD checks.
pub fn min_eigenvalue(s: &SymMatrix) -> Result<f64> {
    Ok(extreme_eigenvalues(s)?.0)
}
