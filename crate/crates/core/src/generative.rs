//! Generative models `G: B^k(r) → S^{n-1}` and projection onto their range.
//!
//! Two decoders are provided: a feed-forward [`MlpGenerator`] with an explicit
//! vector–Jacobian product, and a [`SubspaceGenerator`] whose range is the unit
//! sphere of a `k`-dimensional subspace and which therefore has a closed-form
//! projection ([`subspace_project`]). Generic projection ([`project_to_range`])
//! runs Adam in latent space from several random starts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, distance, dot, norm, Matrix};
use crate::rng::SeededStream;

/// Pre-normalization output floor used when a model file does not set one.
pub const DEFAULT_MIN_NORM: f64 = 1e-6;

/// Conventional latent radius `3√k` for desk-scale models; pretrained decoders
/// are only characterized asymptotically, so this is a choice, not a law.
pub fn default_latent_radius(latent_dim: usize) -> f64 {
    3.0 * (latent_dim as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Self::Relu),
            "sigmoid" => Ok(Self::Sigmoid),
            "identity" => Ok(Self::Identity),
            other => Err(Error::UnknownActivation(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Sigmoid => "sigmoid",
            Self::Identity => "identity",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Self::Relu => x.max(0.0),
            Self::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Self::Identity => x,
        }
    }

    /// Derivative at the pre-activation `x`; ReLU uses 0 at the kink.
    fn derivative(self, x: f64) -> f64 {
        match self {
            Self::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Sigmoid => {
                let s = self.apply(x);
                s * (1.0 - s)
            }
            Self::Identity => 1.0,
        }
    }

    fn lipschitz(self) -> f64 {
        match self {
            Self::Relu | Self::Identity => 1.0,
            Self::Sigmoid => 0.25,
        }
    }
}

/// Result of a forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub output: Vec<f64>,
    /// The latent input lay outside `B^k(r)` and was pulled back to the sphere
    /// of radius `r`.
    pub clamped: bool,
}

/// Common interface of all decoders.
pub trait Generator: Send + Sync {
    fn latent_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn latent_radius(&self) -> f64;
    fn forward(&self, z: &[f64]) -> Result<Forward>;
    /// Gradient of `⟨forward(z), cotangent⟩` with respect to `z`.
    fn backward(&self, z: &[f64], cotangent: &[f64]) -> Result<Vec<f64>>;
}

/// Returns `z` scaled back onto the ball of radius `r` if it lies outside.
pub fn clamp_to_ball(z: &[f64], r: f64) -> (Vec<f64>, bool) {
    let nz = norm(z);
    if nz > r {
        (z.iter().map(|v| v * r / nz).collect(), true)
    } else {
        (z.to_vec(), false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Fully connected decoder with optional output normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct MlpGenerator {
    layers: Vec<Layer>,
    latent_dim: usize,
    output_dim: usize,
    latent_radius: f64,
    min_norm: f64,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    activation: String,
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    latent_dim: usize,
    output_dim: usize,
    latent_radius: f64,
    normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_norm: Option<f64>,
    layers: Vec<LayerJson>,
}

impl TryFrom<ModelJson> for MlpGenerator {
    type Error = Error;

    fn try_from(m: ModelJson) -> Result<Self> {
        let layers = m
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer {
                    weight: Matrix::from_rows(&l.weight)?,
                    bias: l.bias,
                    activation: Activation::parse(&l.activation)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = MlpGenerator::new(
            layers,
            m.latent_radius,
            m.min_norm.unwrap_or(DEFAULT_MIN_NORM),
            m.normalized,
        )?;
        if g.latent_dim != m.latent_dim {
            return Err(Error::DimensionMismatch {
                expected: m.latent_dim,
                got: g.latent_dim,
            });
        }
        if g.output_dim != m.output_dim {
            return Err(Error::DimensionMismatch {
                expected: m.output_dim,
                got: g.output_dim,
            });
        }
        Ok(g)
    }
}

impl From<MlpGenerator> for ModelJson {
    fn from(g: MlpGenerator) -> Self {
        ModelJson {
            latent_dim: g.latent_dim,
            output_dim: g.output_dim,
            latent_radius: g.latent_radius,
            normalized: g.normalized,
            min_norm: Some(g.min_norm),
            layers: g
                .layers
                .into_iter()
                .map(|l| LayerJson {
                    activation: l.activation.name().to_string(),
                    weight: l.weight.to_rows(),
                    bias: l.bias,
                })
                .collect(),
        }
    }
}

impl MlpGenerator {
    pub fn new(layers: Vec<Layer>, latent_radius: f64, min_norm: f64, normalized: bool) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidInput("generator needs at least one layer".into()))?;
        let latent_dim = first.weight.cols();
        let mut width = latent_dim;
        for layer in &layers {
            if layer.weight.cols() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: layer.weight.cols(),
                });
            }
            check_len(&layer.bias, layer.weight.rows())?;
            width = layer.weight.rows();
        }
        if latent_dim >= width {
            return Err(Error::InvalidInput(format!(
                "latent dimension {latent_dim} must be below output dimension {width}"
            )));
        }
        if !(latent_radius > 0.0) || !(min_norm > 0.0) {
            return Err(Error::InvalidInput(
                "latent radius and min_norm must be positive".into(),
            ));
        }
        Ok(Self {
            layers,
            latent_dim,
            output_dim: width,
            latent_radius,
            min_norm,
            normalized,
        })
    }

    /// Random-weight network `k → hidden… → n` with He-style scaling, ReLU on
    /// hidden layers and `output_activation` on the last one.
    pub fn random(
        latent_dim: usize,
        hidden: &[usize],
        output_dim: usize,
        output_activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let mut stream = SeededStream::new(seed);
        let widths: Vec<usize> = std::iter::once(latent_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(output_dim))
            .collect();
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for (i, w) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = (2.0 / fan_in as f64).sqrt();
            let rows: Vec<Vec<f64>> = (0..fan_out)
                .map(|_| stream.normal_vec(fan_in).into_iter().map(|v| v * scale).collect())
                .collect();
            let bias = stream.normal_vec(fan_out).into_iter().map(|v| 0.1 * v).collect();
            let activation = if i + 2 == widths.len() {
                output_activation
            } else {
                Activation::Relu
            };
            layers.push(Layer {
                weight: Matrix::from_rows(&rows)?,
                bias,
                activation,
            });
        }
        Self::new(layers, default_latent_radius(latent_dim), DEFAULT_MIN_NORM, true)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn min_norm(&self) -> f64 {
        self.min_norm
    }

    /// The network output before normalization, with per-layer
    /// pre-activations kept for the backward pass.
    fn raw_pass(&self, z: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut h = z.to_vec();
        for layer in &self.layers {
            let mut pre = layer.weight.matvec(&h);
            pre.iter_mut().zip(&layer.bias).for_each(|(p, b)| *p += b);
            h = pre.iter().map(|&p| layer.activation.apply(p)).collect();
            pres.push(pre);
        }
        (pres, h)
    }

    /// Un-normalized map, for Lipschitz checks.
    pub fn raw(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(z, self.latent_dim)?;
        Ok(self.raw_pass(z).1)
    }
}

impl Generator for MlpGenerator {
    fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn latent_radius(&self) -> f64 {
        self.latent_radius
    }

    fn forward(&self, z: &[f64]) -> Result<Forward> {
        check_len(z, self.latent_dim)?;
        let (z, clamped) = clamp_to_ball(z, self.latent_radius);
        let (_, raw) = self.raw_pass(&z);
        if !self.normalized {
            return Ok(Forward { output: raw, clamped });
        }
        let nr = norm(&raw);
        if !(nr > self.min_norm) {
            return Err(Error::DegenerateOutput { norm: nr });
        }
        Ok(Forward {
            output: raw.iter().map(|v| v / nr).collect(),
            clamped,
        })
    }

    fn backward(&self, z: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        check_len(z, self.latent_dim)?;
        check_len(cotangent, self.output_dim)?;
        let (z, _) = clamp_to_ball(z, self.latent_radius);
        let (pres, raw) = self.raw_pass(&z);
        let mut g = if self.normalized {
            let nr = norm(&raw);
            if !(nr > self.min_norm) {
                return Err(Error::DegenerateOutput { norm: nr });
            }
            // d(x/‖x‖)ᵀ c = (c − y yᵀc) / ‖x‖
            let y: Vec<f64> = raw.iter().map(|v| v / nr).collect();
            let yc = dot(&y, cotangent);
            cotangent
                .iter()
                .zip(&y)
                .map(|(c, yi)| (c - yi * yc) / nr)
                .collect::<Vec<_>>()
        } else {
            cotangent.to_vec()
        };
        for (layer, pre) in self.layers.iter().zip(&pres).rev() {
            g.iter_mut()
                .zip(pre)
                .for_each(|(gi, &p)| *gi *= layer.activation.derivative(p));
            g = layer.weight.matvec_t(&g);
        }
        Ok(g)
    }
}

/// Product of layer spectral norms and activation Lipschitz constants; an
/// upper bound on the Lipschitz constant of the raw (pre-normalization) map.
pub fn lipschitz_upper_bound(g: &MlpGenerator) -> f64 {
    g.layers
        .iter()
        .map(|l| l.weight.spectral_norm().unwrap_or(f64::INFINITY) * l.activation.lipschitz())
        .product()
}

/// Decoder `z ↦ Qz / ‖Qz‖` for an orthonormal `n × k` basis `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceJson", into = "SubspaceJson")]
pub struct SubspaceGenerator {
    basis: Matrix,
    latent_radius: f64,
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    /// `n` rows of length `k`.
    subspace_basis: Vec<Vec<f64>>,
    latent_radius: f64,
}

impl TryFrom<SubspaceJson> for SubspaceGenerator {
    type Error = Error;
    fn try_from(s: SubspaceJson) -> Result<Self> {
        SubspaceGenerator::new(Matrix::from_rows(&s.subspace_basis)?, s.latent_radius)
    }
}

impl From<SubspaceGenerator> for SubspaceJson {
    fn from(s: SubspaceGenerator) -> Self {
        SubspaceJson {
            subspace_basis: s.basis.to_rows(),
            latent_radius: s.latent_radius,
        }
    }
}

impl SubspaceGenerator {
    /// Checks `QᵀQ = I_k` within `1e-10` and `k < n`.
    pub fn new(basis: Matrix, latent_radius: f64) -> Result<Self> {
        let (n, k) = (basis.rows(), basis.cols());
        if k >= n {
            return Err(Error::InvalidInput(format!(
                "subspace dimension {k} must be below ambient dimension {n}"
            )));
        }
        if !(latent_radius > 0.0) {
            return Err(Error::InvalidInput("latent radius must be positive".into()));
        }
        let g = basis.gram();
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                if (g.get(i, j) - want).abs() > 1e-10 {
                    return Err(Error::InvalidInput("basis columns are not orthonormal".into()));
                }
            }
        }
        Ok(Self {
            basis,
            latent_radius,
        })
    }

    /// Orthonormalizes the given spanning vectors (modified Gram–Schmidt, two
    /// passes). The first column of the result is `columns[0]` normalized.
    pub fn from_spanning(columns: &[Vec<f64>], latent_radius: f64) -> Result<Self> {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
        for c in columns {
            let mut v = c.clone();
            for _ in 0..2 {
                for u in &q {
                    let p = dot(u, &v);
                    v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= p * ui);
                }
            }
            let nv = norm(&v);
            if !(nv > 1e-10) {
                return Err(Error::InvalidInput("spanning vectors are linearly dependent".into()));
            }
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
        }
        Self::new(Matrix::from_columns(&q)?, latent_radius)
    }

    /// Random `k`-dimensional subspace whose span contains `v`.
    pub fn random_containing(v: &[f64], k: usize, seed: u64) -> Result<Self> {
        let mut stream = SeededStream::new(seed);
        let mut cols = vec![v.to_vec()];
        cols.extend((1..k).map(|_| stream.normal_vec(v.len())));
        Self::from_spanning(&cols, default_latent_radius(k))
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Latent coordinates `Qᵀx`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis.matvec_t(x)
    }
}

impl Generator for SubspaceGenerator {
    fn latent_dim(&self) -> usize {
        self.basis.cols()
    }

    fn output_dim(&self) -> usize {
        self.basis.rows()
    }

    fn latent_radius(&self) -> f64 {
        self.latent_radius
    }

    fn forward(&self, z: &[f64]) -> Result<Forward> {
        check_len(z, self.latent_dim())?;
        let (z, clamped) = clamp_to_ball(z, self.latent_radius);
        let raw = self.basis.matvec(&z);
        let nr = norm(&raw);
        if !(nr > DEFAULT_MIN_NORM) {
            return Err(Error::DegenerateOutput { norm: nr });
        }
        Ok(Forward {
            output: raw.iter().map(|v| v / nr).collect(),
            clamped,
        })
    }

    fn backward(&self, z: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        check_len(cotangent, self.output_dim())?;
        let y = self.forward(z)?.output;
        let (z, _) = clamp_to_ball(z, self.latent_radius);
        let nz = norm(&z);
        let yc = dot(&y, cotangent);
        let g: Vec<f64> = cotangent.iter().zip(&y).map(|(c, yi)| (c - yi * yc) / nz).collect();
        Ok(self.basis.matvec_t(&g))
    }
}

/// Exact projection onto the range of a subspace decoder: `QQᵀx / ‖QQᵀx‖`.
pub fn subspace_project(q: &SubspaceGenerator, x: &[f64]) -> Result<Vec<f64>> {
    check_len(x, q.output_dim())?;
    let p = q.basis.matvec(&q.coordinates(x));
    let np = norm(&p);
    if !(np > 1e-12) {
        return Err(Error::DegenerateProjection);
    }
    Ok(p.iter().map(|v| v / np).collect())
}

fn default_steps() -> usize {
    100
}
fn default_lr() -> f64 {
    0.1
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_restarts() -> usize {
    3
}

/// Adam settings for latent-space projection. Defaults: 100 iterations at
/// learning rate 0.1, 3 restarts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentProjectionConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for LatentProjectionConfig {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            learning_rate: default_lr(),
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            adam_eps: default_eps(),
            restarts: default_restarts(),
            seed: 0,
        }
    }
}

impl LatentProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !(self.learning_rate > 0.0) || self.restarts == 0 {
            return Err(Error::InvalidInput(
                "projection needs steps >= 1, restarts >= 1 and learning_rate > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeProjection {
    pub point: Vec<f64>,
    pub latent: Vec<f64>,
    pub distance: f64,
    /// Index of the winning start; explicit starts come first.
    pub restart: usize,
}

/// Approximate `argmin_{w ∈ R(G)} ‖w − x‖₂` by Adam descent in latent space.
pub fn project_to_range(
    g: &dyn Generator,
    x: &[f64],
    cfg: &LatentProjectionConfig,
) -> Result<RangeProjection> {
    project_to_range_from(g, x, cfg, &[])
}

/// As [`project_to_range`], additionally descending from each latent in
/// `starts` before the `cfg.restarts` random ones.
///
/// Random starts are uniform in `B^k(0.9 r)`, restart `i` drawing from
/// `derive_seed(cfg.seed, [i])`. Iterates are clamped back into `B^k(r)` after
/// every step. The best point seen (including each start) wins; ties go to
/// the lowest restart index.
pub fn project_to_range_from(
    g: &dyn Generator,
    x: &[f64],
    cfg: &LatentProjectionConfig,
    starts: &[Vec<f64>],
) -> Result<RangeProjection> {
    cfg.validate()?;
    check_len(x, g.output_dim())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("projection target is not finite".into()));
    }
    let k = g.latent_dim();
    let r = g.latent_radius();
    let random_starts = (0..cfg.restarts).map(|i| {
        let mut stream = SeededStream::derived(cfg.seed, &[i as u64]);
        stream.in_ball(k, 0.9 * r)
    });
    let mut best: Option<RangeProjection> = None;
    for (idx, z0) in starts.iter().cloned().chain(random_starts).enumerate() {
        check_len(&z0, k)?;
        if let Some(candidate) = adam_descent(g, x, cfg, z0, idx) {
            if best.as_ref().is_none_or(|b| candidate.distance < b.distance) {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(Error::AllRestartsDegenerate)
}

fn adam_descent(
    g: &dyn Generator,
    x: &[f64],
    cfg: &LatentProjectionConfig,
    z0: Vec<f64>,
    restart: usize,
) -> Option<RangeProjection> {
    let r = g.latent_radius();
    let (mut z, _) = clamp_to_ball(&z0, r);
    let mut out = g.forward(&z).ok()?.output;
    let mut best = RangeProjection {
        distance: distance(&out, x),
        point: out.clone(),
        latent: z.clone(),
        restart,
    };
    let k = z.len();
    let mut m = vec![0.0; k];
    let mut v = vec![0.0; k];
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    for t in 1..=cfg.steps {
        let residual: Vec<f64> = out.iter().zip(x).map(|(o, xi)| 2.0 * (o - xi)).collect();
        let Ok(grad) = g.backward(&z, &residual) else {
            break;
        };
        let c1 = 1.0 - b1.powi(t as i32);
        let c2 = 1.0 - b2.powi(t as i32);
        for i in 0..k {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            z[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.adam_eps);
        }
        z = clamp_to_ball(&z, r).0;
        match g.forward(&z) {
            Ok(f) => out = f.output,
            Err(_) => break,
        }
        let d = distance(&out, x);
        if d < best.distance {
            best = RangeProjection {
                point: out.clone(),
                latent: z.clone(),
                distance: d,
                restart,
            };
        }
    }
    Some(best)
}
