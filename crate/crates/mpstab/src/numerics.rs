//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are row-major over `Complex64`. The heavy kernels (Hermitian
//! eigendecomposition, singular value decomposition, general eigenvalues)
//! delegate to `faer`; everything else operates directly on the Vec storage.
//!
//! Every rank or kernel decision in the crate routes through [`RANK_TOL`],
//! interpreted relative to the largest singular value (equivalently ‖·‖_∞)
//! of the operator in question.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Relative cutoff below which singular values and eigenvalue magnitudes
/// count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Hermitian-tagged inputs must satisfy ‖M − M†‖_max ≤ this, relative to
/// the largest entry magnitude.
pub const HERM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entries: {0}")]
    NonFinite(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("not generic / G1 violated: {0}")]
    NotGeneric(String),
    #[error("channel is not unital: {0}")]
    NonUnital(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("verified bound violated: {0}")]
    BoundViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = CMat::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Rank-one |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        CMat::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn from_cols(cols: &[Vec<C64>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        CMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn dagger(&self) -> Self {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn add(&self, other: &CMat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// In-place self += s * other.
    pub fn axpy(&mut self, s: C64, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn mul(&self, other: &CMat) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        // Small products stay on the naive path; large ones go through faer's gemm.
        if self.rows * self.cols * other.cols <= 1 << 15 {
            let mut out = CMat::zeros(self.rows, other.cols);
            for i in 0..self.rows {
                for k in 0..self.cols {
                    let a = self[(i, k)];
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..other.cols {
                        out[(i, j)] += a * other[(k, j)];
                    }
                }
            }
            out
        } else {
            from_faer(&(to_faer(self) * to_faer(other)))
        }
    }

    /// y = M x.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for (i, out) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *out = acc;
        }
        y
    }

    pub fn kron(&self, other: &CMat) -> Self {
        let mut out = CMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// ‖M − M†‖_max relative to max(1, ‖M‖_max).
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// (M + M†)/2, suppressing round-off drift on operators that are
    /// Hermitian by construction.
    pub fn hermitize(&self) -> Self {
        debug_assert!(self.is_square());
        CMat::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Row-major vectorization, vec(M)[i·cols + j] = M_ij.
    pub fn vec_rm(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn unvec_rm(v: &[C64], rows: usize, cols: usize) -> Self {
        assert_eq!(v.len(), rows * cols);
        CMat {
            rows,
            cols,
            data: v.to_vec(),
        }
    }
}

pub(crate) fn to_faer(m: &CMat) -> Mat<C64> {
    Mat::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

pub(crate) fn from_faer(m: &Mat<C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors as matching columns of a unitary.
pub struct HermEigen {
    pub vals: Vec<f64>,
    pub vecs: CMat,
}

pub fn herm_eigen(m: &CMat) -> Result<HermEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} not square",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("herm_eigen input".into()));
    }
    debug_assert!(
        m.is_hermitian(1e-9),
        "herm_eigen input defect {:.3e}",
        m.hermiticity_defect()
    );
    let evd = to_faer(&m.hermitize())
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::NoConvergence(format!("self-adjoint eigen: {e:?}")))?;
    let n = m.rows;
    let vals: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    let vecs = CMat::from_fn(n, n, |i, j| evd.U()[(i, j)]);
    Ok(HermEigen { vals, vecs })
}

/// Full singular value decomposition M = U · diag(s) · V†, with U and V
/// square unitaries and s descending.
pub struct SvdFull {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

impl SvdFull {
    /// Rotates each singular-vector pair by a global phase so the
    /// largest-magnitude entry of every U column is real positive.
    /// M = Σ u_k s_k v_k† is unchanged; output becomes reproducible
    /// across backends up to degenerate singular subspaces.
    pub fn fix_phases(&mut self) {
        let k = self.s.len();
        for j in 0..k {
            let col: Vec<C64> = (0..self.u.rows).map(|i| self.u[(i, j)]).collect();
            let (best, _) = col
                .iter()
                .enumerate()
                .fold((0usize, -1.0f64), |acc, (i, z)| {
                    if z.norm() > acc.1 {
                        (i, z.norm())
                    } else {
                        acc
                    }
                });
            let z = col[best];
            if z.norm() < 1e-300 {
                continue;
            }
            let phase = z / z.norm();
            let ph = phase.conj();
            for i in 0..self.u.rows {
                self.u[(i, j)] *= ph;
            }
            if j < self.v.cols {
                for i in 0..self.v.rows {
                    self.v[(i, j)] *= ph;
                }
            }
        }
    }
}

pub fn svd_full(m: &CMat) -> Result<SvdFull> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    let svd = to_faer(m)
        .svd()
        .map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let k = m.rows.min(m.cols);
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i].re).collect();
    let u = CMat::from_fn(m.rows, m.rows, |i, j| svd.U()[(i, j)]);
    let v = CMat::from_fn(m.cols, m.cols, |i, j| svd.V()[(i, j)]);
    Ok(SvdFull { u, s, v })
}

/// Singular values only, descending.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    Ok(svd_full(m)?.s)
}

/// Eigenvalues of a general square complex matrix, sorted by descending
/// magnitude (ties broken by real then imaginary part, for reproducibility).
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} not square",
            m.rows, m.cols
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalues input".into()));
    }
    let ev = to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::NoConvergence(format!("general eigenvalues: {e:?}")))?;
    let mut ev: Vec<C64> = ev;
    ev.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

/// Schatten norm: sum of singular values (p = 1), Frobenius (p = 2),
/// or the largest singular value (p = ∞).
pub fn schatten_norm(m: &CMat, p: SchattenP) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite("schatten_norm input".into()));
    }
    match p {
        SchattenP::Two => Ok(m.frob_norm()),
        SchattenP::One => Ok(singular_values(m)?.iter().sum()),
        SchattenP::Infinity => Ok(singular_values(m)?.first().copied().unwrap_or(0.0)),
    }
}

pub fn trace_norm(m: &CMat) -> Result<f64> {
    schatten_norm(m, SchattenP::One)
}

pub fn op_norm(m: &CMat) -> Result<f64> {
    schatten_norm(m, SchattenP::Infinity)
}

/// Number of singular values above rel_tol · s_max.
pub fn rank_from_singulars(s: &[f64], rel_tol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix. Eigenvalues with
/// magnitude below rel_tol · ‖H‖_∞ are treated as exact zeros.
pub fn pseudo_inverse(h: &CMat, rel_tol: f64) -> Result<CMat> {
    let eig = herm_eigen(h)?;
    let largest = eig.vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cut = rel_tol * largest;
    let n = h.rows;
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in eig.vals.iter().enumerate() {
        if lam.abs() <= cut {
            continue;
        }
        let vk = eig.vecs.col(k);
        let inv = C64::new(1.0 / lam, 0.0);
        for i in 0..n {
            let vi = vk[i] * inv;
            for j in 0..n {
                out[(i, j)] += vi * vk[j].conj();
            }
        }
    }
    Ok(out)
}

/// Orthogonal projector onto the image of a Hermitian matrix, with its rank
/// and the smallest retained eigenvalue magnitude.
pub fn image_projector(h: &CMat, rel_tol: f64) -> Result<(CMat, usize, f64)> {
    let eig = herm_eigen(h)?;
    let largest = eig.vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cut = rel_tol * largest;
    let n = h.rows;
    let mut p = CMat::zeros(n, n);
    let mut rank = 0usize;
    let mut mu = f64::INFINITY;
    for (k, &lam) in eig.vals.iter().enumerate() {
        if lam.abs() <= cut {
            continue;
        }
        rank += 1;
        mu = mu.min(lam.abs());
        let vk = eig.vecs.col(k);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += vk[i] * vk[j].conj();
            }
        }
    }
    if rank == 0 {
        mu = 0.0;
    }
    Ok((p, rank, mu))
}

/// Partial trace of an operator on ⊗_k ℂ^{dims[k]}, keeping the factors in
/// `keep` (ascending site order) and tracing the rest. Row-major composite
/// indexing: the first factor is the most significant digit.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.rows != total || m.cols != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but dims multiply to {total}",
            m.rows, m.cols
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidInput("keep index out of range".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Strides of each factor within the full composite index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offset = |sites: &[usize], multi: usize| -> usize {
        let mut rem = multi;
        let mut off = 0usize;
        for &s in sites.iter().rev() {
            off += (rem % dims[s]) * strides[s];
            rem /= dims[s];
        }
        off
    };

    let mut out = CMat::zeros(keep_dim, keep_dim);
    for a in 0..keep_dim {
        let ka = offset(&keep, a);
        for b in 0..keep_dim {
            let kb = offset(&keep, b);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let tt = offset(&traced, t);
                acc += m[(ka + tt, kb + tt)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Orthonormal basis of the span of the given vectors, via SVD of the matrix
/// having them as columns; rank decided by rel_tol.
pub fn orthonormal_span(vectors: &[Vec<C64>], rel_tol: f64) -> Result<Vec<Vec<C64>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let m = CMat::from_cols(vectors);
    let mut svd = svd_full(&m)?;
    svd.fix_phases();
    let rank = rank_from_singulars(&svd.s, rel_tol);
    Ok((0..rank).map(|k| svd.u.col(k)).collect())
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
