//! Diagnostics for the convergence analysis of the Rayleigh flow.
//!
//! [`compute_conditions`] evaluates the step-size conditions and contraction
//! factor from a population spectrum. The `check_lemma_*` functions test the
//! three supporting inequalities on concrete inputs, and [`run_lemma_suites`]
//! hammers them with random draws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, extreme_eigenvalues, generalized_eig, norm, GeneralizedSpectrum, MatrixPair, SymMatrix};
use crate::problems::ProblemInstance;
use crate::rng::SeededStream;

/// Slack on every lemma inequality.
pub const LEMMA_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConditions {
    pub eta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu0: f64,
    pub kappa_b: f64,
    pub b0: f64,
    pub c0: f64,
    /// `None` when `c0 ≥ 1` (or `c0 < 0`), where the factor is undefined.
    pub contraction: Option<f64>,
    /// `γ₁ + γ₂ < 2`.
    pub cond_step_sum: bool,
    /// `contraction < 1`.
    pub cond_contraction: bool,
    /// Sufficient condition for the contraction bound, still depending on
    /// `κ(B)` and `ν₀`.
    pub cond_sufficient: bool,
    /// `γ₂ + 3γ₁ > 3`, the simplified surrogate.
    pub cond_surrogate: bool,
    /// `ν₀ > 0`, required by the analysis.
    pub nu0_positive: bool,
}

/// Condition arithmetic for step size `eta` and start `u0` against the
/// population spectrum. `b` is the population `B`.
pub fn compute_conditions(
    spectrum: &GeneralizedSpectrum,
    b: &SymMatrix,
    eta: f64,
    u0: &[f64],
) -> Result<ConvergenceConditions> {
    if !(spectrum.gap > 1e-10) {
        return Err(Error::DegenerateGap(spectrum.gap));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!("step size {eta} must be nonnegative")));
    }
    check_len(u0, spectrum.leading_unit.len())?;
    let (bmin, bmax) = extreme_eigenvalues(b)?;
    let (l1, l2, ln) = (spectrum.lambda1(), spectrum.lambda2(), spectrum.lambda_n());
    let nu0 = dot(u0, &spectrum.leading_unit);
    Ok(conditions_from(eta, l1, l2, ln, bmin, bmax, nu0))
}

/// Same arithmetic from raw scalars.
pub fn conditions_from(
    eta: f64,
    lambda1: f64,
    lambda2: f64,
    lambda_n: f64,
    b_min: f64,
    b_max: f64,
    nu0: f64,
) -> ConvergenceConditions {
    let gamma1 = eta * (lambda1 - lambda2) * b_min;
    let gamma2 = eta * (lambda1 - lambda_n) * b_max;
    let kappa = b_max / b_min;
    let root = (2.0 * (1.0 - nu0)).max(0.0).sqrt();
    let b0 = (2.0 - (gamma1 + gamma2)) + gamma1 * (2.0 * kappa - (1.0 + nu0)) + 3.0 * gamma2 * kappa * root;
    let c0 = (gamma2 - gamma1) / 2.0;
    let contraction = (0.0..1.0).contains(&c0).then(|| (b0 + ((1.0 - c0) * c0).sqrt()) / (1.0 - c0));
    let sufficient = gamma2 + 3.0 * gamma1 - 2.0 * gamma1 * (2.0 * kappa - (1.0 + nu0)) - 6.0 * gamma2 * kappa * root;
    ConvergenceConditions {
        eta,
        gamma1,
        gamma2,
        nu0,
        kappa_b: kappa,
        b0,
        c0,
        contraction,
        cond_step_sum: gamma1 + gamma2 < 2.0,
        cond_contraction: contraction.is_some_and(|c| c < 1.0),
        cond_sufficient: sufficient > 3.0,
        cond_surrogate: gamma2 + 3.0 * gamma1 > 3.0,
        nu0_positive: nu0 > 0.0,
    }
}

/// Population-level context shared by the lemma checkers.
struct Context {
    spec: GeneralizedSpectrum,
    bmin: f64,
    bmax: f64,
}

impl Context {
    fn new(pair: &MatrixPair) -> Result<Self> {
        let spec = generalized_eig(pair)?;
        let (bmin, bmax) = extreme_eigenvalues(pair.b())?;
        Ok(Self { spec, bmin, bmax })
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        let (l1, l2) = (self.spec.lambda1(), self.spec.lambda2());
        // ρ = λ₁ must be accepted even when λ₁ carries eigensolver rounding.
        if !(rho > l2 && rho <= l1 + 1e-12 * l1.abs().max(1.0)) {
            return Err(Error::RhoOutOfRange { rho, lambda1: l1, lambda2: l2 });
        }
        Ok(())
    }

    fn f1(&self, pair: &MatrixPair, x: &[f64]) -> f64 {
        dot(&self.spec.eigenvectors[0], &pair.b().matvec(x))
    }
}

/// `x ↦ (ρB − A)x`.
fn shifted(pair: &MatrixPair, rho: f64, x: &[f64]) -> Vec<f64> {
    let bx = pair.b().matvec(x);
    let ax = pair.a().matvec(x);
    bx.iter().zip(&ax).map(|(b, a)| rho * b - a).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Two-sided bound on `xᵀ(ρB − A)x` for `ρ ∈ (λ₂, λ₁]`.
pub fn check_lemma_sandwich(pair: &MatrixPair, rho: f64, x: &[f64]) -> Result<Sandwich> {
    check_len(x, pair.dim())?;
    let ctx = Context::new(pair)?;
    sandwich_with(&ctx, pair, rho, x)
}

fn sandwich_with(ctx: &Context, pair: &MatrixPair, rho: f64, x: &[f64]) -> Result<Sandwich> {
    ctx.check_rho(rho)?;
    let s = &ctx.spec;
    let f1 = ctx.f1(pair, x);
    let xx = dot(x, x);
    let lower = (rho - s.lambda2()) * ctx.bmin * xx - (s.lambda1() - s.lambda2()) * f1 * f1;
    let middle = dot(x, &shifted(pair, rho, x));
    let upper = (rho - s.lambda_n()) * ctx.bmax * xx - (s.lambda1() - s.lambda_n()) * f1 * f1;
    let holds = lower - LEMMA_SLACK <= middle && middle <= upper + LEMMA_SLACK;
    Ok(Sandwich { lower, middle, upper, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Lower bound on `η⟨(ρB − A)x, y⟩`.
pub fn check_lemma_inner(pair: &MatrixPair, rho: f64, eta: f64, x: &[f64], y: &[f64]) -> Result<Inequality> {
    check_len(x, pair.dim())?;
    check_len(y, pair.dim())?;
    let ctx = Context::new(pair)?;
    inner_with(&ctx, pair, rho, eta, x, y)
}

fn inner_with(ctx: &Context, pair: &MatrixPair, rho: f64, eta: f64, x: &[f64], y: &[f64]) -> Result<Inequality> {
    ctx.check_rho(rho)?;
    let s = &ctx.spec;
    let tau1 = eta * (rho - s.lambda2()) * ctx.bmin;
    let tau2 = eta * (rho - s.lambda_n()) * ctx.bmax;
    let (f1, g1) = (ctx.f1(pair, x), ctx.f1(pair, y));
    let lhs = eta * dot(&shifted(pair, rho, x), y);
    let rhs = 0.5 * (tau1 + tau2) * dot(x, y) - 0.25 * (tau2 - tau1) * (dot(x, x) + dot(y, y))
        - eta * (s.lambda1() - s.lambda2()) * f1 * g1;
    Ok(Inequality { lhs, rhs, holds: lhs >= rhs - LEMMA_SLACK })
}

/// Bound on the leading coefficient error `(f₁ − d)²` by `‖x − v*‖²`, for
/// a unit `x` positively aligned with `v*`.
pub fn check_lemma_coefficient(pair: &MatrixPair, x: &[f64]) -> Result<Inequality> {
    check_len(x, pair.dim())?;
    if (norm(x) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("x must have unit norm".into()));
    }
    let ctx = Context::new(pair)?;
    coefficient_with(&ctx, pair, x)
}

fn coefficient_with(ctx: &Context, pair: &MatrixPair, x: &[f64]) -> Result<Inequality> {
    let v = &ctx.spec.leading_unit;
    let nu = dot(x, v);
    if !(nu > 0.0) {
        return Err(Error::NonPositiveAlignment(nu));
    }
    let h: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
    let diff = ctx.f1(pair, x) - ctx.spec.scale_d;
    let lhs = diff * diff;
    let rhs = (ctx.bmax - (1.0 + nu) * ctx.bmin / 2.0) * dot(&h, &h);
    Ok(Inequality { lhs, rhs, holds: lhs <= rhs + LEMMA_SLACK })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenominatorCheck {
    pub value: f64,
    pub positive: bool,
}

/// `uᵀB̂u` and whether it clears the solvers' `1e-10` floor. Advisory only.
pub fn check_denominator_positivity(instance: &ProblemInstance, u: &[f64]) -> Result<DenominatorCheck> {
    check_len(u, instance.dim())?;
    let value = instance.b_hat.quad_form(u);
    Ok(DenominatorCheck { value, positive: value > 1e-10 })
}

/// Outcome of one randomized lemma suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub draws: usize,
    pub failures: usize,
    /// Smallest margin observed (negative means a violation beyond slack).
    pub worst_margin: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random symmetric-definite pair with `2 ≤ n ≤ 8` and a strict gap.
pub fn random_pair(stream: &mut SeededStream, identity_b: bool) -> MatrixPair {
    loop {
        let n = 2 + (stream.next_u64() % 7) as usize;
        let mut a = SymMatrix::zeros(n);
        for _ in 0..n {
            a.add_outer(&stream.normal_vec(n), if stream.uniform() < 0.5 { 1.0 } else { -1.0 });
        }
        let b = if identity_b {
            SymMatrix::identity(n)
        } else {
            let mut b = SymMatrix::identity(n).scaled(0.1 + stream.uniform());
            for _ in 0..n {
                b.add_outer(&stream.normal_vec(n), 1.0 / n as f64);
            }
            b
        };
        let pair = MatrixPair::new(a, b).expect("B is positive definite by construction");
        if generalized_eig(&pair).is_ok_and(|s| s.gap > 1e-6) {
            return pair;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma {
    Sandwich,
    Inner,
    Coefficient,
}

impl Lemma {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sandwich => "sandwich",
            Self::Inner => "inner_product",
            Self::Coefficient => "coefficient",
        }
    }
}

/// One random draw; returns the margin (≥ −slack when the inequality holds).
fn draw_margin(lemma: Lemma, seed: u64, i: usize) -> Result<f64> {
    let tag = lemma as u64;
    let mut s = SeededStream::derived(seed, &[tag, i as u64]);
    let pair = random_pair(&mut s, false);
    let ctx = Context::new(&pair)?;
    let n = pair.dim();
    let (l1, l2) = (ctx.spec.lambda1(), ctx.spec.lambda2());
    // ρ ∈ (λ₂, λ₁]: 1 − U ∈ (0, 1].
    let rho = l2 + (1.0 - s.uniform()) * (l1 - l2);
    match lemma {
        Lemma::Sandwich => {
            let x = s.normal_vec(n);
            let r = sandwich_with(&ctx, &pair, rho, &x)?;
            Ok((r.middle - r.lower).min(r.upper - r.middle))
        }
        Lemma::Inner => {
            let x = s.normal_vec(n);
            let y = s.normal_vec(n);
            let eta = s.uniform();
            let r = inner_with(&ctx, &pair, rho, eta, &x, &y)?;
            Ok(r.lhs - r.rhs)
        }
        Lemma::Coefficient => {
            let mut x = s.unit_vector(n);
            if dot(&x, &ctx.spec.leading_unit) < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            let r = coefficient_with(&ctx, &pair, &x)?;
            Ok(r.rhs - r.lhs)
        }
    }
}

/// Runs `draws` random instances of one lemma in parallel.
pub fn run_lemma_suite(lemma: Lemma, draws: usize, seed: u64) -> SuiteResult {
    let margins: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|i| draw_margin(lemma, seed, i).unwrap_or(f64::NEG_INFINITY))
        .collect();
    SuiteResult {
        name: lemma.name().to_string(),
        draws,
        failures: margins.iter().filter(|m| !(**m >= -LEMMA_SLACK)).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

pub fn run_lemma_suites(draws: usize, seed: u64) -> Vec<SuiteResult> {
    [Lemma::Sandwich, Lemma::Inner, Lemma::Coefficient]
        .into_iter()
        .map(|l| run_lemma_suite(l, draws, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_spiked;
    use crate::priors::Projector;
    use crate::solvers::{prfm, SolverConfig};

    fn spiked_pair(v: &[f64]) -> MatrixPair {
        let mut a = SymMatrix::identity(v.len());
        a.add_outer(v, 4.0);
        MatrixPair::new(a, SymMatrix::identity(v.len())).unwrap()
    }

    fn unit(v: &[f64]) -> Vec<f64> {
        let n = norm(v);
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn spiked_step_size_conditions() {
        let v = unit(&[1.0, 2.0, 0.5, 1.0]);
        let pair = spiked_pair(&v);
        let spec = generalized_eig(&pair).unwrap();
        let c = compute_conditions(&spec, pair.b(), 7.0 / 32.0, &v).unwrap();
        assert!((c.gamma1 - 0.875).abs() < 1e-12);
        assert!((c.gamma2 - 0.875).abs() < 1e-12);
        assert!(c.cond_step_sum);
        assert!((c.gamma2 + 3.0 * c.gamma1 - 3.5).abs() < 1e-12);
        assert!(c.cond_surrogate);
        assert_eq!(c.c0, (c.gamma2 - c.gamma1) / 2.0);
        assert!((c.nu0 - 1.0).abs() < 1e-12);
        assert!(c.cond_contraction);
    }

    #[test]
    fn zero_step() {
        let c = conditions_from(0.0, 5.0, 1.0, 1.0, 1.0, 1.0, 0.5);
        assert_eq!(c.gamma1, 0.0);
        assert_eq!(c.gamma2, 0.0);
        assert_eq!(c.b0, 2.0);
        assert_eq!(c.contraction, Some(2.0));
        assert!(!c.cond_contraction);
    }

    #[test]
    fn admissible_example_pair() {
        // γ₁ = 2/3, γ₂ = 1.1 via η = 1, gaps chosen to match, B = I.
        let c = conditions_from(1.0, 2.0 / 3.0 + 1.0, 1.0, 2.0 / 3.0 + 1.0 - 1.1, 1.0, 1.0, 1.0);
        assert!((c.gamma1 - 2.0 / 3.0).abs() < 1e-12 && (c.gamma2 - 1.1).abs() < 1e-12);
        assert!(c.cond_step_sum);
        assert!(c.cond_surrogate);
    }

    #[test]
    fn formula_invariants() {
        let c = conditions_from(0.1, 4.0, 2.5, -1.0, 0.5, 1.5, 0.7);
        let k = 3.0;
        let b0 = (2.0 - (c.gamma1 + c.gamma2)) + c.gamma1 * (2.0 * k - 1.7) + 3.0 * c.gamma2 * k * (2.0 * 0.3f64).sqrt();
        assert!((c.b0 - b0).abs() < 1e-12);
        assert_eq!(c.c0, (c.gamma2 - c.gamma1) / 2.0);
        let want = (c.b0 + ((1.0 - c.c0) * c.c0).sqrt()) / (1.0 - c.c0);
        assert_eq!(c.contraction, Some(want));
        let big = conditions_from(1.0, 4.0, 3.9, -10.0, 1.0, 1.0, 0.5);
        assert!(big.c0 >= 1.0);
        assert_eq!(big.contraction, None);
        assert!(!big.cond_contraction);
    }

    #[test]
    fn gammas_are_lipschitz_in_eigenvalues() {
        let (eta, eps, bmax) = (0.2, 1e-3, 1.7);
        let c = conditions_from(eta, 5.0, 2.0, 0.5, 0.8, bmax, 0.9);
        let d = conditions_from(eta, 5.0 + eps, 2.0, 0.5 - eps, 0.8, bmax, 0.9);
        assert!((d.gamma1 - c.gamma1).abs() <= eta * eps * bmax * (1.0 + 1e-12));
        assert!((d.gamma2 - c.gamma2).abs() <= 2.0 * eta * eps * bmax * (1.0 + 1e-12));
    }

    #[test]
    fn negative_alignment_is_flagged() {
        let v = unit(&[1.0, 0.0, 0.0]);
        let pair = spiked_pair(&v);
        let spec = generalized_eig(&pair).unwrap();
        let c = compute_conditions(&spec, pair.b(), 0.2, &[-1.0, 0.0, 0.0]).unwrap();
        assert!(!c.nu0_positive);
        let flat = MatrixPair::new(SymMatrix::identity(2), SymMatrix::identity(2)).unwrap();
        let s = generalized_eig(&flat).unwrap();
        assert!(matches!(compute_conditions(&s, flat.b(), 0.2, &[1.0, 0.0]), Err(Error::DegenerateGap(_))));
    }

    #[test]
    fn sandwich_examples() {
        let v = unit(&[1.0, 1.0, 0.0]);
        let pair = spiked_pair(&v);
        let r = check_lemma_sandwich(&pair, 5.0, &v).unwrap();
        assert!(r.middle.abs() < 1e-12 && r.holds);
        let z = check_lemma_sandwich(&pair, 3.0, &[0.0; 3]).unwrap();
        assert_eq!((z.lower, z.middle, z.upper), (0.0, 0.0, 0.0));
        assert!(matches!(check_lemma_sandwich(&pair, 1.0, &v), Err(Error::RhoOutOfRange { .. })));
        assert!(matches!(check_lemma_sandwich(&pair, 5.5, &v), Err(Error::RhoOutOfRange { .. })));
    }

    #[test]
    fn inner_examples() {
        let v = unit(&[2.0, -1.0, 1.0]);
        let pair = spiked_pair(&v);
        let x = [0.3, 0.1, -0.7];
        let r = check_lemma_inner(&pair, 4.0, 0.2, &x, &[0.0; 3]).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs <= 0.0 && r.holds);
        // x = y = v₁, ρ = λ₁ = 5, B = I: lhs = 0; τ₁ = τ₂ = 4η so
        // rhs = 4η − 0 − 4η = 0.
        let r = check_lemma_inner(&pair, 5.0, 0.2, &v, &v).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12 && r.holds);
    }

    #[test]
    fn coefficient_examples() {
        let v = unit(&[1.0, 2.0, 2.0]);
        let pair = spiked_pair(&v);
        let r = check_lemma_coefficient(&pair, &v).unwrap();
        assert!(r.lhs < 1e-24 && r.rhs.abs() < 1e-24 && r.holds);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!(matches!(check_lemma_coefficient(&pair, &neg), Err(Error::NonPositiveAlignment(_))));
        let mut s = SeededStream::new(1);
        for _ in 0..200 {
            let mut x = s.unit_vector(3);
            if dot(&x, &v) <= 0.0 {
                x.iter_mut().for_each(|a| *a = -*a);
            }
            assert!(check_lemma_coefficient(&pair, &x).unwrap().holds);
        }
    }

    #[test]
    fn lemma_suites_hold() {
        for r in run_lemma_suites(2000, 17) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn denominator_examples() {
        let v = unit(&[1.0, 1.0, 1.0, 1.0]);
        let mut inst = gen_spiked(&v, 3, 1).unwrap();
        inst.b_hat = SymMatrix::identity(4);
        let r = check_denominator_positivity(&inst, &unit(&[1.0, -2.0, 0.0, 3.0])).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.positive);
        // m = 3 < n = 4: B̂ has a null direction.
        let inst = gen_spiked(&v, 3, 1).unwrap();
        let e = crate::linalg::sym_eig(&inst.b_hat).unwrap();
        let null = e.vectors.last().unwrap();
        let r = check_denominator_positivity(&inst, null).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(!r.positive);
    }

    #[test]
    fn contraction_bounds_noiseless_ratios() {
        let n = 10;
        let mut s = SeededStream::new(3);
        let v = s.unit_vector(n);
        let pair = spiked_pair(&v);
        let spec = generalized_eig(&pair).unwrap();
        let v = spec.leading_unit.clone();
        let noise = s.normal_vec(n);
        let u0 = unit(&v.iter().zip(&noise).map(|(a, b)| a + 0.03 * b).collect::<Vec<_>>());
        let eta = 7.0 / 32.0;
        let c = compute_conditions(&spec, pair.b(), eta, &u0).unwrap();
        assert!(c.cond_contraction, "{c:?}");
        let cfg = SolverConfig { init: Some(u0), reference: Some(v), early_stop: None, max_iters: 40, ..Default::default() };
        let tr = prfm(pair.a(), pair.b(), &Projector::Sphere, &cfg).unwrap();
        let d = tr.distances();
        for w in d.windows(2) {
            if w[0] > 1e-10 {
                assert!(w[1] / w[0] <= c.contraction.unwrap() + 0.05, "{w:?}");
            }
        }
    }
}
