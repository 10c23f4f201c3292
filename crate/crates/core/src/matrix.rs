//! Dense linear algebra on embedding matrices: centering, covariance,
//! symmetric eigendecomposition, operator norms, and principal angles.
//!
//! Everything here is deterministic: identical input bits produce identical
//! output bits, independent of thread count. The eigensolver is a cyclic
//! Jacobi iteration, which is dependency-free and accurate for the dense
//! symmetric matrices this library deals with (D ≤ a few thousand).
//!
//! The spectrum of the covariance is computed by eigendecomposition rather
//! than by SVD of the data matrix; the two routes agree on eigenvalues
//! (singular values squared, divided by the sample divisor) and on the
//! right singular subspace, so nothing is lost by standardizing on one.

use crate::error::{Result, SpectralError};

/// Maximum number of cyclic Jacobi sweeps before declaring non-convergence.
const MAX_JACOBI_SWEEPS: usize = 100;

/// Off-diagonal Frobenius tolerance, relative to the input Frobenius norm.
const JACOBI_TOL_REL: f64 = 1e-12;

/// Dense row-major matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from a flat row-major buffer. Errors on length mismatch.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SpectralError::Contract(format!(
                "matrix buffer length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { data, rows, cols })
    }

    /// Build from rows. Errors on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(SpectralError::Contract(
                    "ragged rows: all rows must have equal length".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { data, rows: r, cols: c })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// self (r×k) × other (k×c) → (r×c).
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(SpectralError::Contract(format!(
                "matmul dimension mismatch: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a_il = self.data[i * self.cols + l];
                if a_il == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                let b_row = &other.data[l * other.cols..(l + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a_il * b;
                }
            }
        }
        Ok(out)
    }

    /// self (r×c) × v (c) → (r).
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(SpectralError::Contract(format!(
                "matvec dimension mismatch: {}x{} times {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute entry of (self − other). Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// N×D embedding matrix (rows = samples) with optional integer class labels.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    data: Matrix,
    labels: Option<Vec<usize>>,
}

impl EmbeddingSet {
    /// Validates: N ≥ 2, D ≥ 1, all entries finite; labels (when present)
    /// have length N and every class id in [0, C) occurs at least once.
    pub fn new(data: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if data.rows() < 2 {
            return Err(SpectralError::DataQuality(format!(
                "need at least 2 samples, got {}",
                data.rows()
            )));
        }
        if data.cols() < 1 {
            return Err(SpectralError::DataQuality(
                "need at least 1 embedding dimension".into(),
            ));
        }
        if !data.is_finite() {
            return Err(SpectralError::DataQuality(
                "embedding matrix contains NaN or Inf".into(),
            ));
        }
        if let Some(ref l) = labels {
            if l.len() != data.rows() {
                return Err(SpectralError::Contract(format!(
                    "label count {} does not match sample count {}",
                    l.len(),
                    data.rows()
                )));
            }
            let c = l.iter().max().map_or(0, |m| m + 1);
            let mut seen = vec![false; c];
            for &id in l {
                seen[id] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(SpectralError::Contract(format!(
                    "class id {missing} in [0, {c}) has no samples"
                )));
            }
        }
        Ok(EmbeddingSet { data, labels })
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn d(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of classes (max label + 1), or 0 when unlabeled.
    pub fn class_count(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max().map(|m| m + 1))
            .unwrap_or(0)
    }

    /// Mean of the rows with `label == class`, or of all others when `invert`.
    pub fn class_mean(&self, class: usize, invert: bool) -> Result<Vec<f64>> {
        let labels = self.labels.as_ref().ok_or_else(|| {
            SpectralError::Contract("labels required for class means".into())
        })?;
        let mut mean = vec![0.0; self.d()];
        let mut count = 0usize;
        for (i, &l) in labels.iter().enumerate() {
            if (l == class) != invert {
                for (m, x) in mean.iter_mut().zip(self.data.row(i)) {
                    *m += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            return Err(SpectralError::Contract(format!(
                "class contrast side for class {class} (invert={invert}) has no samples"
            )));
        }
        for m in &mut mean {
            *m /= count as f64;
        }
        Ok(mean)
    }
}

/// Which divisor the covariance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorConvention {
    /// 1/N. The default.
    Population,
    /// 1/(N−1), for comparison against unbiased external estimates.
    Unbiased,
}

/// Symmetric D×D covariance matrix with its divisor convention recorded.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    entries: Matrix,
    divisor: DivisorConvention,
    source_n: usize,
}

impl CovarianceMatrix {
    /// Wrap an existing symmetric matrix (asymmetry ≤ 1e-10 max-abs).
    ///
    /// `source_n` is the sample count behind the estimate; use 0 for
    /// population matrices constructed analytically.
    pub fn from_entries(
        entries: Matrix,
        divisor: DivisorConvention,
        source_n: usize,
    ) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(SpectralError::Contract(format!(
                "covariance must be square, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        let asym = entries.max_abs_diff(&entries.transpose());
        if asym > 1e-10 {
            return Err(SpectralError::Contract(format!(
                "covariance asymmetry {asym:.3e} exceeds 1e-10"
            )));
        }
        Ok(CovarianceMatrix {
            entries,
            divisor,
            source_n,
        })
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn d(&self) -> usize {
        self.entries.rows()
    }

    pub fn divisor(&self) -> DivisorConvention {
        self.divisor
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }
}

/// Descending eigenvalues with matched orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues sorted non-increasing, tiny negatives clamped to 0.
    eigenvalues: Vec<f64>,
    /// Raw eigenvalues before clamping, kept for audit.
    eigenvalues_raw: Vec<f64>,
    /// Column i matches eigenvalue i. Sign-fixed.
    eigenvectors: Matrix,
    /// Sample count behind the covariance; 0 for population spectra.
    source_n: usize,
}

impl Spectrum {
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenvalues_raw: Vec<f64>,
        eigenvectors: Matrix,
        source_n: usize,
    ) -> Self {
        Spectrum {
            eigenvalues,
            eigenvalues_raw,
            eigenvectors,
            source_n,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalues_raw(&self) -> &[f64] {
        &self.eigenvalues_raw
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn d(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    /// Eigenvector column `i`.
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// λ_1, or 0 for an empty spectrum.
    pub fn leading_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Eigengap δ_k = λ_k − λ_{k+1}, 1-based. Errors unless 1 ≤ k < D.
    pub fn eigengap(&self, k: usize) -> Result<f64> {
        if k < 1 || k >= self.d() {
            return Err(SpectralError::Contract(format!(
                "eigengap index k={k} out of range [1, {})",
                self.d()
            )));
        }
        Ok(self.eigenvalues[k - 1] - self.eigenvalues[k])
    }
}

/// Non-decreasing sines of the principal angles between two k-dimensional
/// subspaces.
#[derive(Debug, Clone)]
pub struct PrincipalAngles {
    pub sines: Vec<f64>,
    pub k: usize,
}

impl PrincipalAngles {
    /// The largest principal-angle sine (worst-case rotation).
    pub fn max_sine(&self) -> f64 {
        self.sines.last().copied().unwrap_or(0.0)
    }
}

/// Subtract each column's mean so every column has zero mean.
///
/// Two-pass compensated centering: the residual mean after the first pass is
/// subtracted again, holding the post-condition at data scales well beyond
/// unit magnitude. Labels pass through untouched.
pub fn center(e: &EmbeddingSet) -> EmbeddingSet {
    let n = e.n();
    let d = e.d();
    let mut data = e.data().clone();
    for _pass in 0..2 {
        let mut means = vec![0.0; d];
        for i in 0..n {
            for (m, x) in means.iter_mut().zip(data.row(i)) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        for i in 0..n {
            for (j, &mean) in means.iter().enumerate() {
                let v = data.get(i, j) - mean;
                data.set(i, j, v);
            }
        }
    }
    EmbeddingSet {
        data,
        labels: e.labels.clone(),
    }
}

/// Subtract each class's own mean from its rows (pooled within-class
/// centering). Requires labels. The result also has zero column means, so it
/// satisfies the `covariance` precondition; its covariance estimates the
/// shared class-conditional covariance rather than the mixture covariance.
pub fn center_within_class(e: &EmbeddingSet) -> Result<EmbeddingSet> {
    let labels = e
        .labels()
        .ok_or_else(|| SpectralError::Contract("within-class centering requires labels".into()))?
        .to_vec();
    let d = e.d();
    let c = e.class_count();
    let mut data = e.data().clone();
    for _pass in 0..2 {
        let mut sums = vec![vec![0.0; d]; c];
        let mut counts = vec![0usize; c];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(data.row(i)) {
                *s += x;
            }
        }
        for (sum, &count) in sums.iter_mut().zip(&counts) {
            for s in sum.iter_mut() {
                *s /= count as f64;
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            for (j, &mean) in sums[l].iter().enumerate() {
                let v = data.get(i, j) - mean;
                data.set(i, j, v);
            }
        }
    }
    EmbeddingSet::new(data, Some(labels))
}

/// Empirical covariance XᵀX scaled by the chosen divisor.
///
/// The input must already be centered (column means ≤ 1e-8 absolute);
/// otherwise this is a contract error rather than a silent re-centering.
pub fn covariance(e: &EmbeddingSet, divisor: DivisorConvention) -> Result<CovarianceMatrix> {
    let n = e.n();
    let d = e.d();
    for j in 0..d {
        let mean: f64 = (0..n).map(|i| e.data().get(i, j)).sum::<f64>() / n as f64;
        if mean.abs() > 1e-8 {
            return Err(SpectralError::Contract(format!(
                "covariance requires centered input; column {j} has mean {mean:.3e}"
            )));
        }
    }
    let scale = match divisor {
        DivisorConvention::Population => 1.0 / n as f64,
        DivisorConvention::Unbiased => 1.0 / (n as f64 - 1.0),
    };
    let mut entries = Matrix::zeros(d, d);
    for i in 0..n {
        let row = e.data().row(i);
        for (a, &xa) in row.iter().enumerate() {
            if xa == 0.0 {
                continue;
            }
            let acc = &mut entries.data[a * d + a..a * d + d];
            for (acc_ab, &xb) in acc.iter_mut().zip(&row[a..]) {
                *acc_ab += xa * xb;
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = entries.data[a * d + b] * scale;
            entries.data[a * d + b] = v;
            entries.data[b * d + a] = v;
        }
    }
    Ok(CovarianceMatrix {
        entries,
        divisor,
        source_n: n,
    })
}

/// Sum of squares of off-diagonal entries.
fn off_diagonal_sq(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = a.get(i, j);
                s += v * v;
            }
        }
    }
    s
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues sorted non-increasing with matched, sign-fixed
/// eigenvector columns. The input is symmetrized by averaging before
/// iteration. Deterministic: fixed sweep order, stable sort.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.rows() != m.cols() {
        return Err(SpectralError::Contract(format!(
            "eigendecomposition requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Err(SpectralError::Contract("empty matrix".into()));
    }

    // Symmetrize by averaging; a[i][j] == a[j][i] exactly from here on.
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.data[i * n + j] = 0.5 * (m.get(i, j) + m.get(j, i));
        }
    }
    let mut v = Matrix::identity(n);
    let tol_sq = {
        let t = JACOBI_TOL_REL * a.frobenius_norm();
        t * t
    };

    let mut converged = false;
    let mut residual = 0.0;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let off_sq = off_diagonal_sq(&a);
        if off_sq <= tol_sq {
            converged = true;
            break;
        }
        residual = off_sq.sqrt();
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                jacobi_rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        let off_sq = off_diagonal_sq(&a);
        if off_sq <= tol_sq {
            converged = true;
        } else {
            residual = off_sq.sqrt();
        }
    }
    if !converged {
        return Err(SpectralError::Numerical(format!(
            "Jacobi failed to converge in {MAX_JACOBI_SWEEPS} sweeps; off-diagonal residual {residual:.3e}"
        )));
    }

    // Stable descending sort: ties keep ascending original index.
    let raw: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.data[r * n + new_col] = v.get(r, old_col);
        }
    }
    fix_column_signs(&mut vectors);
    Ok((eigenvalues, vectors))
}

/// Golub–Van Loan two-sided Jacobi rotation zeroing a[p][q].
#[inline]
fn jacobi_rotate(a: &mut Matrix, v: &mut Matrix, n: usize, p: usize, q: usize) {
    let app = a.data[p * n + p];
    let aqq = a.data[q * n + q];
    let apq = a.data[p * n + q];

    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    a.data[p * n + p] = app - t * apq;
    a.data[q * n + q] = aqq + t * apq;
    a.data[p * n + q] = 0.0;
    a.data[q * n + p] = 0.0;

    for k in 0..n {
        if k != p && k != q {
            let akp = a.data[k * n + p];
            let akq = a.data[k * n + q];
            let new_p = c * akp - s * akq;
            let new_q = s * akp + c * akq;
            a.data[k * n + p] = new_p;
            a.data[p * n + k] = new_p;
            a.data[k * n + q] = new_q;
            a.data[q * n + k] = new_q;
        }
    }
    for k in 0..n {
        let vkp = v.data[k * n + p];
        let vkq = v.data[k * n + q];
        v.data[k * n + p] = c * vkp - s * vkq;
        v.data[k * n + q] = s * vkp + c * vkq;
    }
}

/// Sign convention: in each column the entry of largest magnitude is made
/// non-negative; magnitude ties break toward the lowest row index.
fn fix_column_signs(v: &mut Matrix) {
    let n = v.rows();
    for j in 0..v.cols() {
        let mut best = 0usize;
        let mut best_abs = v.get(0, j).abs();
        for i in 1..n {
            let a = v.get(i, j).abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if v.get(best, j) < 0.0 {
            for i in 0..n {
                let x = -v.get(i, j);
                v.set(i, j, x);
            }
        }
    }
}

/// Eigendecomposition of a covariance matrix into a `Spectrum`.
///
/// Tiny negative eigenvalues (≥ −1e-10·λ₁, and ≥ −1e-10 absolute near zero)
/// are clamped to 0 in `eigenvalues`; the raw values are retained. A more
/// negative eigenvalue means the input was not positive semi-definite, which
/// violates the covariance contract.
pub fn eig_sym(m: &CovarianceMatrix) -> Result<Spectrum> {
    let (raw, vectors) = symmetric_eigen(m.entries())?;
    let lam1 = raw.first().copied().unwrap_or(0.0).max(0.0);
    let floor = -(1e-10_f64).max(1e-10 * lam1);
    let mut clamped = Vec::with_capacity(raw.len());
    for &l in &raw {
        if l < floor {
            return Err(SpectralError::Contract(format!(
                "covariance is not positive semi-definite: eigenvalue {l:.6e} below {floor:.3e}"
            )));
        }
        clamped.push(l.max(0.0));
    }
    Ok(Spectrum {
        eigenvalues: clamped,
        eigenvalues_raw: raw,
        eigenvectors: vectors,
        source_n: m.source_n(),
    })
}

/// Spectral norm of (a − b): the largest |eigenvalue| of the symmetric
/// difference. Symmetric in its arguments.
pub fn op_norm_sym_diff(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    if a.d() != b.d() {
        return Err(SpectralError::Contract(format!(
            "operator-norm dimension mismatch: {} vs {}",
            a.d(),
            b.d()
        )));
    }
    let d = a.d();
    let mut diff = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            diff.data[i * d + j] = a.entries().get(i, j) - b.entries().get(i, j);
        }
    }
    let (evals, _) = symmetric_eigen(&diff)?;
    Ok(evals
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max))
}

/// Principal angles between the leading-k eigenspaces of two spectra.
///
/// Computes the singular values σ_j of the k×k cross-Gram matrix between the
/// two leading eigenvector blocks and reports sin θ_j = √(1 − σ_j²), sorted
/// non-decreasing. Invariant to per-column sign flips and to rotations
/// within either subspace.
pub fn principal_angles(reference: &Spectrum, test: &Spectrum, k: usize) -> Result<PrincipalAngles> {
    if k < 1 || k > reference.d() || k > test.d() {
        return Err(SpectralError::Contract(format!(
            "subspace dimension k={k} out of range [1, min({}, {})]",
            reference.d(),
            test.d()
        )));
    }
    if reference.eigenvectors().rows() != test.eigenvectors().rows() {
        return Err(SpectralError::Contract(format!(
            "ambient dimension mismatch: {} vs {}",
            reference.eigenvectors().rows(),
            test.eigenvectors().rows()
        )));
    }
    let d = reference.eigenvectors().rows();
    // G[j][l] = <ref_j, test_l>, j,l < k.
    let mut gram = Matrix::zeros(k, k);
    for j in 0..k {
        for l in 0..k {
            let mut s = 0.0;
            for r in 0..d {
                s += reference.eigenvectors().get(r, j) * test.eigenvectors().get(r, l);
            }
            gram.data[j * k + l] = s;
        }
    }
    // Singular values of G are the square roots of the eigenvalues of GᵀG.
    let gtg = gram.transpose().matmul(&gram)?;
    let (evals, _) = symmetric_eigen(&gtg)?;
    let mut sines: Vec<f64> = evals
        .iter()
        .map(|&e| {
            let sigma_sq = e.clamp(0.0, 1.0);
            (1.0 - sigma_sq).max(0.0).sqrt()
        })
        .collect();
    // evals descend, so sines already ascend; keep the sort as a guarantee.
    sines.sort_by(f64::total_cmp);
    Ok(PrincipalAngles { sines, k })
}
