//! Projection operators for the structural priors.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generative::{
    project_to_range, subspace_project, Generator, LatentProjectionConfig, MlpGenerator,
    SubspaceGenerator,
};
use crate::linalg::normalized;

/// Projection onto one of the supported constraint sets.
#[derive(Clone, Debug)]
pub enum Projector {
    /// Unit sphere.
    Sphere,
    /// Unit vectors with at most `s` nonzeros.
    SparseTopS(usize),
    /// Range of a feed-forward decoder; projection is approximate (Adam).
    GenerativeRange {
        model: Arc<MlpGenerator>,
        config: LatentProjectionConfig,
    },
    /// Unit sphere of a subspace; projection is exact.
    Subspace(Arc<SubspaceGenerator>),
}

impl Projector {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::SparseTopS(_) => "sparse",
            Self::GenerativeRange { .. } => "generative",
            Self::Subspace(_) => "subspace",
        }
    }

    /// Checks the projector against an ambient dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        let dim = match self {
            Self::Sphere => n,
            Self::SparseTopS(s) => {
                if *s == 0 || *s > n {
                    return Err(Error::InvalidInput(format!("sparsity {s} outside [1, {n}]")));
                }
                n
            }
            Self::GenerativeRange { model, config } => {
                config.validate()?;
                model.output_dim()
            }
            Self::Subspace(q) => q.output_dim(),
        };
        if dim != n {
            return Err(Error::DimensionMismatch { expected: n, got: dim });
        }
        Ok(())
    }

    /// Whether repeated projection is exact (as opposed to iterative).
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::GenerativeRange { .. })
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("cannot project a non-finite vector".into()));
        }
        match self {
            Self::Sphere => normalized(x, 1e-12).ok_or(Error::ZeroVector),
            Self::SparseTopS(s) => sparse_truncate(x, *s),
            Self::GenerativeRange { model, config } => {
                Ok(project_to_range(model.as_ref(), x, config)?.point)
            }
            Self::Subspace(q) => subspace_project(q, x),
        }
    }
}

/// Keeps the `s` largest-magnitude entries (lowest index wins ties), zeroes
/// the rest and normalizes. This is the exact Euclidean projection onto the
/// unit sphere intersected with `s`-sparse vectors.
pub fn sparse_truncate(x: &[f64], s: usize) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::InvalidInput("sparsity must be at least 1".into()));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut out = vec![0.0; x.len()];
    if s >= x.len() {
        out.copy_from_slice(x);
    } else {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
        for &i in &idx[..s] {
            out[i] = x[i];
        }
    }
    normalized(&out, 0.0).ok_or(Error::ZeroVector)
}

/// Support (indices of nonzeros) of a vector.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Sphere,
    Sparse,
    Generative,
    Subspace,
}

/// Prior as written in experiment config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub prior: PriorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// Subspace dimension when the basis is synthesized around a known `v*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<LatentProjectionConfig>,
}

impl ProjectorSpec {
    pub fn sphere() -> Self {
        Self {
            prior: PriorKind::Sphere,
            s: None,
            k: None,
            model_path: None,
            projection: None,
        }
    }

    /// Builds the projector. A subspace prior without `model_path` is a random
    /// `k`-dimensional subspace containing `v_star`, drawn from `seed`.
    pub fn build(&self, n: usize, v_star: Option<&[f64]>, seed: u64) -> Result<Projector> {
        let p = match self.prior {
            PriorKind::Sphere => Projector::Sphere,
            PriorKind::Sparse => Projector::SparseTopS(
                self.s
                    .ok_or_else(|| Error::InvalidInput("sparse prior needs `s`".into()))?,
            ),
            PriorKind::Generative => {
                let path = self.model_path.as_ref().ok_or_else(|| {
                    Error::InvalidInput("generative prior needs `model_path`".into())
                })?;
                let model: MlpGenerator = serde_json::from_str(&read(path)?)?;
                Projector::GenerativeRange {
                    model: Arc::new(model),
                    config: self.projection.clone().unwrap_or_default(),
                }
            }
            PriorKind::Subspace => {
                let q = match (&self.model_path, self.k, v_star) {
                    (Some(path), _, _) => serde_json::from_str(&read(path)?)?,
                    (None, Some(k), Some(v)) => SubspaceGenerator::random_containing(v, k, seed)?,
                    _ => {
                        return Err(Error::InvalidInput(
                            "subspace prior needs `model_path`, or `k` and a known v*".into(),
                        ))
                    }
                };
                Projector::Subspace(Arc::new(q))
            }
        };
        p.validate(n)?;
        Ok(p)
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}
