//! Dense symmetric linear algebra.
//!
//! Everything here works on small dense matrices (a few hundred rows at most)
//! stored row-major in a flat `Vec<f64>`. The symmetric eigensolver is cyclic
//! Jacobi; the generalized problem `A v = λ B v` is reduced to a standard one
//! by Cholesky whitening of `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededStream;

const SYMMETRY_TOL: f64 = 1e-12;
const PIVOT_FLOOR: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-14;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Returns `x / ‖x‖₂`, or `None` when the norm is not above `floor`.
pub fn normalized(x: &[f64], floor: f64) -> Option<Vec<f64>> {
    let n = norm(x);
    if n > floor && n.is_finite() {
        Some(x.iter().map(|v| v / n).collect())
    } else {
        None
    }
}

pub(crate) fn check_len(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// General dense `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::InvalidInput("matrix has no columns".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_len(row, c)?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let c = columns.len();
        if c == 0 {
            return Err(Error::InvalidInput("matrix has no columns".into()));
        }
        let r = columns[0].len();
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            check_len(col, r)?;
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += w * xi;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `selfᵀ self`, always exactly symmetric.
    pub fn gram(&self) -> SymMatrix {
        let mut g = vec![0.0; self.cols * self.cols];
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut s = 0.0;
                for k in 0..self.rows {
                    s += self.get(k, i) * self.get(k, j);
                }
                g[i * self.cols + j] = s;
                g[j * self.cols + i] = s;
            }
        }
        SymMatrix {
            dim: self.cols,
            data: g,
        }
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        let g = self.gram();
        let e = sym_eig(&g)?;
        Ok(e.values[0].max(0.0).sqrt())
    }
}

/// Symmetric `n × n` matrix. Construction validates symmetry and then stores
/// the exactly symmetrized entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for SymMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.rows.len() != m.dim {
            return Err(Error::DimensionMismatch {
                expected: m.dim,
                got: m.rows.len(),
            });
        }
        SymMatrix::from_rows(&m.rows)
    }
}

impl From<SymMatrix> for MatrixJson {
    fn from(s: SymMatrix) -> Self {
        MatrixJson {
            dim: s.dim,
            rows: s.to_rows(),
        }
    }
}

impl SymMatrix {
    /// Validates symmetry up to a relative tolerance of `1e-12`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        check_len(&data, dim * dim)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut data = data;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                let avg = 0.5 * (a + b);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            check_len(r, dim)?;
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        m
    }

    /// `scale · x xᵀ`.
    pub fn outer(x: &[f64], scale: f64) -> Self {
        let mut m = Self::zeros(x.len());
        m.add_outer(x, scale);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// In-place `self += scale · x xᵀ`, writing both triangles identically.
    pub fn add_outer(&mut self, x: &[f64], scale: f64) {
        let n = self.dim;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let xi = scale * x[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..n {
                self.data[i * n + j] += xi * x[j];
            }
        }
        self.mirror_upper();
    }

    /// Copies the upper triangle into the lower one.
    pub(crate) fn mirror_upper(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                self.data[j * n + i] = self.data[i * n + j];
            }
        }
    }

    /// Accumulates `Σ scale_k x_k x_kᵀ` over the upper triangle only.
    pub(crate) fn accumulate_upper(&mut self, x: &[f64], scale: f64) {
        let n = self.dim;
        for i in 0..n {
            let xi = scale * x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * n + i..(i + 1) * n];
            for (r, &xj) in row.iter_mut().zip(&x[i..]) {
                *r += xi * xj;
            }
        }
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ S y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// A symmetric-definite pair `(A, B)`: same dimension, `B` positive definite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairJson", into = "PairJson")]
pub struct MatrixPair {
    a: SymMatrix,
    b: SymMatrix,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    a: SymMatrix,
    b: SymMatrix,
}

impl TryFrom<PairJson> for MatrixPair {
    type Error = Error;
    fn try_from(p: PairJson) -> Result<Self> {
        MatrixPair::new(p.a, p.b)
    }
}

impl From<MatrixPair> for PairJson {
    fn from(p: MatrixPair) -> Self {
        PairJson { a: p.a, b: p.b }
    }
}

impl MatrixPair {
    pub fn new(a: SymMatrix, b: SymMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        cholesky(&b)?;
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[i]` pairs with `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps every off-diagonal pair in row order, annihilating it with a plane
/// rotation, until the off-diagonal Frobenius mass drops below `1e-14` of the
/// total. Fails after `100·n` sweeps.
pub fn sym_eig(s: &SymMatrix) -> Result<SymEig> {
    let n = s.dim();
    let mut a = s.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total = s.frobenius();
    let max_sweeps = 100 * n;
    let mut converged = total == 0.0 || n == 1;
    let mut sweep = 0;
    while !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total {
            converged = true;
            break;
        }
        if sweep == max_sweeps {
            return Err(Error::NonConvergence { sweeps: max_sweeps });
        }
        sweep += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    debug_assert!(converged);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            canonical_sign(&mut col);
            col
        })
        .collect();
    Ok(SymEig { values, vectors })
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = B`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = x`.
    pub fn solve_lower(&self, x: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = self.l.row(i);
            let s = x[i] - dot(&row[..i], &y[..i]);
            y[i] = s / row[i];
        }
        y
    }

    /// Solves `Lᵀ y = x`.
    pub fn solve_upper(&self, x: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l.get(k, i) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }
}

pub fn cholesky(b: &SymMatrix) -> Result<Cholesky> {
    let n = b.dim();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j);
        let pivot = b.get(j, j) - dot(&lj[..j], &lj[..j]);
        if !(pivot > PIVOT_FLOOR) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let s = b.get(i, j) - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l.set(i, j, s / d);
        }
    }
    Ok(Cholesky { l })
}

/// Generalized eigen-decomposition of a symmetric-definite pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralizedSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// B-orthonormal: `vᵢᵀ B vⱼ = δᵢⱼ`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `v* = d · v₁`, unit Euclidean norm.
    pub leading_unit: Vec<f64>,
    /// `d = 1 / ‖v₁‖₂`.
    pub scale_d: f64,
    /// `λ₁ − λ₂` (infinite for `n = 1`). Callers needing a strict leading
    /// eigenvalue must check this themselves.
    pub gap: f64,
}

impl GeneralizedSpectrum {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn lambda_n(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum is never empty")
    }

    /// Coordinates `fᵢ = vᵢᵀ B x` of `x` in the eigenbasis.
    pub fn coefficients(&self, b: &SymMatrix, x: &[f64]) -> Vec<f64> {
        let bx = b.matvec(x);
        self.eigenvectors.iter().map(|v| dot(v, &bx)).collect()
    }
}

/// Solves `A v = λ B v` by whitening: `B = L Lᵀ`, eigen-decompose
/// `L⁻¹ A L⁻ᵀ`, map back with `L⁻ᵀ`.
///
/// Singular `B` is rejected with `NotPositiveDefinite`; there is no
/// regularization fallback.
pub fn generalized_eig(pair: &MatrixPair) -> Result<GeneralizedSpectrum> {
    let n = pair.dim();
    let chol = cholesky(pair.b())?;
    // W = L⁻¹ A, column by column (A is symmetric, so rows of A are columns).
    let w_cols: Vec<Vec<f64>> = (0..n).map(|j| chol.solve_lower(pair.a().row(j))).collect();
    // C = L⁻¹ Wᵀ; column j of C solves L c = (row j of W) = (w_cols[*][j]).
    let mut c = vec![0.0; n * n];
    for j in 0..n {
        let wt_col: Vec<f64> = (0..n).map(|k| w_cols[k][j]).collect();
        let col = chol.solve_lower(&wt_col);
        for i in 0..n {
            c[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = avg;
            c[j * n + i] = avg;
        }
    }
    let eig = sym_eig(&SymMatrix::from_raw(n, c))?;
    let eigenvectors: Vec<Vec<f64>> = eig
        .vectors
        .iter()
        .map(|y| {
            let mut v = chol.solve_upper(y);
            let scale = pair.b().quad_form(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= scale);
            canonical_sign(&mut v);
            v
        })
        .collect();
    let v1_norm = norm(&eigenvectors[0]);
    let scale_d = 1.0 / v1_norm;
    let leading_unit = eigenvectors[0].iter().map(|x| x * scale_d).collect();
    let gap = if n > 1 {
        eig.values[0] - eig.values[1]
    } else {
        f64::INFINITY
    };
    Ok(GeneralizedSpectrum {
        eigenvalues: eig.values,
        eigenvectors,
        leading_unit,
        scale_d,
        gap,
    })
}

/// `(uᵀ A u) / (uᵀ B u)`.
///
/// The denominator guard is `1e-12 · ‖u‖² · ‖B‖_F`; the Frobenius norm stands
/// in for the spectral norm so the check stays cheap.
pub fn rayleigh_quotient(a: &SymMatrix, b: &SymMatrix, u: &[f64]) -> Result<f64> {
    check_len(u, a.dim())?;
    check_len(u, b.dim())?;
    let den = b.quad_form(u);
    let guard = 1e-12 * dot(u, u) * b.frobenius();
    if !(den.abs() > guard) {
        return Err(Error::DenominatorNearZero(den));
    }
    Ok(a.quad_form(u) / den)
}

/// `max |λ(S)|`.
pub fn spectral_norm(s: &SymMatrix) -> Result<f64> {
    let e = sym_eig(s)?;
    Ok(e.values[0].abs().max(e.values[s.dim() - 1].abs()))
}

/// Extreme eigenvalues `(λ_min, λ_max)`.
pub fn extreme_eigenvalues(s: &SymMatrix) -> Result<(f64, f64)> {
    let e = sym_eig(s)?;
    Ok((e.values[s.dim() - 1], e.values[0]))
}

/// `κ(B) = λ_max(B) / λ_min(B)` for positive definite `B`.
pub fn condition_kappa(b: &SymMatrix) -> Result<f64> {
    cholesky(b)?;
    let (lo, hi) = extreme_eigenvalues(b)?;
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: b.dim() - 1,
            value: lo,
        });
    }
    Ok(hi / lo)
}

/// Sampled upper estimate of the Crawford number
/// `cr(A, B) = min_{‖u‖=1} √((uᵀAu)² + (uᵀBu)²)`.
///
/// Draws `samples` uniform unit vectors from the seeded stream; a larger
/// sample count with the same seed only adds points, so the estimate is
/// nonincreasing in `samples`.
pub fn crawford_number_estimate(pair: &MatrixPair, samples: usize, seed: u64) -> f64 {
    let mut stream = SeededStream::new(seed);
    let n = pair.dim();
    (0..samples.max(1))
        .map(|_| {
            let u = stream.unit_vector(n);
            pair.a().quad_form(&u).hypot(pair.b().quad_form(&u))
        })
        .fold(f64::INFINITY, f64::min)
}
