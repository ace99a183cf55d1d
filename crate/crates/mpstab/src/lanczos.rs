//! Iterative eigensolvers over a matrix-free Hermitian operator interface.
//!
//! The Lanczos driver locks converged eigenvectors and deflates them from
//! later searches, with full reorthogonalization at every step. That is the
//! expensive-but-safe regime: loss of orthogonality, not iteration count, is
//! what silently merges degenerate multiplets into a single Ritz pair.
//! Startup vectors come from a seeded generator so repeated runs agree to
//! the last bit.

use crate::numerics::{herm_eigen, inner, vec_norm, CMat, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Anything that can act as a Hermitian operator on ℂ^dim.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;
    /// y = H x. Callers guarantee x.len() == y.len() == dim.
    fn apply_into(&self, x: &[C64], y: &mut [C64]);

    fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl HermitianOp for CMat {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let out = self.apply(x);
        y.copy_from_slice(&out);
    }
}

/// Compressed sparse row storage of a Hermitian matrix. Both triangles are
/// stored explicitly so the matvec is a plain CSR pass.
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitian {
    /// Assembles from (row, col, value) triplets, summing duplicates.
    /// Fails unless the result is Hermitian to 1e-12 relative.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut map: HashMap<(usize, usize), C64> = HashMap::new();
        let mut scale = 0.0f64;
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({i},{j}) outside dim {dim}"
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite("sparse triplet".into()));
            }
            *map.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
            scale = scale.max(v.norm());
        }
        let tol = 1e-12 * scale.max(1.0);
        for (&(i, j), &v) in &map {
            let partner = map.get(&(j, i)).copied().unwrap_or(C64::new(0.0, 0.0));
            if (v - partner.conj()).norm() > tol {
                return Err(Error::InvalidInput(format!(
                    "not Hermitian at ({i},{j}): {v} vs conj of {partner}"
                )));
            }
        }
        let mut entries: Vec<((usize, usize), C64)> =
            map.into_iter().filter(|(_, v)| v.norm() > 0.0).collect();
        entries.sort_by_key(|&((i, j), _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for &((i, j), v) in &entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseHermitian {
            dim,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn from_dense(m: &CMat, drop_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(
                "sparse from non-square dense".into(),
            ));
        }
        let cut = drop_tol * m.max_abs();
        let mut trips = Vec::new();
        for i in 0..m.rows {
            for j in 0..m.cols {
                let v = m[(i, j)];
                if v.norm() > cut {
                    trips.push((i, j, v));
                }
            }
        }
        SparseHermitian::from_triplets(m.rows, &trips)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

impl HermitianOp for SparseHermitian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, out) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }
}

struct Negated<'a>(&'a dyn HermitianOp);

impl HermitianOp for Negated<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.0.apply_into(x, y);
        for z in y.iter_mut() {
            *z = -*z;
        }
    }
}

fn seeded_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect()
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for u in basis {
        let c = inner(u, w);
        for (wi, ui) in w.iter_mut().zip(u) {
            *wi -= c * ui;
        }
    }
}

const BETA_BREAKDOWN: f64 = 1e-14;

/// One deflated eigenpair: the smallest eigenvalue in the orthogonal
/// complement of `locked`.
fn lowest_deflated(
    op: &dyn HermitianOp,
    locked: &[Vec<C64>],
    tol: f64,
    max_basis: usize,
    seed: u64,
) -> Result<(f64, Vec<C64>)> {
    let n = op.dim();
    if locked.len() >= n {
        return Err(Error::InvalidInput(
            "deflation space exhausts the operator".into(),
        ));
    }
    let max_basis = max_basis.min(n - locked.len());

    let mut start = {
        let mut v = seeded_vector(n, seed);
        let mut attempts = 0;
        loop {
            orthogonalize(&mut v, locked);
            orthogonalize(&mut v, locked);
            let nrm = vec_norm(&v);
            if nrm > 1e-8 {
                for z in v.iter_mut() {
                    *z /= nrm;
                }
                break v;
            }
            attempts += 1;
            if attempts > 16 {
                return Err(Error::NoConvergence(
                    "cannot seed outside locked span".into(),
                ));
            }
            v = seeded_vector(n, seed ^ (attempts as u64) << 32);
        }
    };

    for _restart in 0..12 {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut scale = 1.0f64;

        loop {
            let j = alphas.len();
            let vj = basis[j].clone();
            let mut w = op.apply_vec(&vj);
            let alpha = inner(&vj, &w).re;
            alphas.push(alpha);
            scale = scale.max(alpha.abs());
            // full reorthogonalization against locked and Krylov vectors,
            // applied twice
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let beta = vec_norm(&w);
            scale = scale.max(beta);

            let breakdown = beta <= BETA_BREAKDOWN * scale.max(1.0);
            let full = j + 1 == max_basis;
            let check = breakdown || full || (j + 1).is_multiple_of(5);

            if check {
                let m = j + 1;
                let mut tri = CMat::zeros(m, m);
                for t in 0..m {
                    tri[(t, t)] = C64::new(alphas[t], 0.0);
                    if t + 1 < m {
                        tri[(t, t + 1)] = C64::new(betas[t], 0.0);
                        tri[(t + 1, t)] = C64::new(betas[t], 0.0);
                    }
                }
                let eig = herm_eigen(&tri)?;
                let theta = eig.vals[0];
                let s = eig.vecs.col(0);
                let est = if breakdown {
                    0.0
                } else {
                    beta * s[m - 1].norm()
                };
                if breakdown || est <= tol * theta.abs().max(1.0) {
                    let mut x = vec![C64::new(0.0, 0.0); n];
                    for (t, b) in basis.iter().enumerate() {
                        let c = s[t];
                        for (xi, bi) in x.iter_mut().zip(b) {
                            *xi += c * bi;
                        }
                    }
                    orthogonalize(&mut x, locked);
                    let nrm = vec_norm(&x);
                    if nrm > 1e-8 {
                        for z in x.iter_mut() {
                            *z /= nrm;
                        }
                        let hx = op.apply_vec(&x);
                        let resid = {
                            let mut r = hx;
                            for (ri, xi) in r.iter_mut().zip(&x) {
                                *ri -= C64::new(theta, 0.0) * xi;
                            }
                            vec_norm(&r)
                        };
                        if resid <= 50.0 * tol * theta.abs().max(1.0) {
                            return Ok((theta, x));
                        }
                        if breakdown || full {
                            start = x;
                            break;
                        }
                    } else if breakdown || full {
                        start = seeded_vector(n, seed ^ 0xdead_beef);
                        let nrm = vec_norm(&start);
                        for z in start.iter_mut() {
                            *z /= nrm;
                        }
                        break;
                    }
                } else if full {
                    let mut x = vec![C64::new(0.0, 0.0); n];
                    for (t, b) in basis.iter().enumerate() {
                        let c = s[t];
                        for (xi, bi) in x.iter_mut().zip(b) {
                            *xi += c * bi;
                        }
                    }
                    let nrm = vec_norm(&x);
                    for z in x.iter_mut() {
                        *z /= nrm;
                    }
                    start = x;
                    break;
                }
            }

            if breakdown {
                // The Krylov space is invariant and its best Ritz pair was
                // already accepted or recycled above.
                if basis.len() == 1 {
                    return Err(Error::NoConvergence(
                        "lanczos stalled on invariant vector".into(),
                    ));
                }
                break;
            }

            betas.push(beta);
            let mut next = w;
            for z in next.iter_mut() {
                *z /= beta;
            }
            basis.push(next);
        }
    }
    Err(Error::NoConvergence(format!(
        "lanczos: no eigenpair to tol {tol:.1e} within restart budget"
    )))
}

/// The k smallest eigenpairs, ascending, each converged to `tol` relative
/// residual. Degenerate levels come out as separate orthonormal pairs.
pub fn lanczos_smallest(
    op: &dyn HermitianOp,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let n = op.dim();
    let k = k.min(n);
    let max_basis = 220.min(n);
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut pairs: Vec<(f64, Vec<C64>)> = Vec::new();
    for t in 0..k {
        let (theta, x) = lowest_deflated(
            op,
            &locked,
            tol,
            max_basis,
            seed.wrapping_add(t as u64 * 7919),
        )?;
        locked.push(x.clone());
        pairs.push((theta, x));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs)
}

/// The k largest eigenpairs, descending.
pub fn lanczos_largest(
    op: &dyn HermitianOp,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let neg = Negated(op);
    let mut pairs = lanczos_smallest(&neg, k, tol, seed)?;
    for p in pairs.iter_mut() {
        p.0 = -p.0;
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    Ok(pairs)
}

/// Operator norm of a Hermitian operator by power iteration on H². Good to
/// `tol` relative; returns 0 for the zero operator.
pub fn power_op_norm(op: &dyn HermitianOp, tol: f64, max_iter: usize, seed: u64) -> Result<f64> {
    let n = op.dim();
    let mut v = seeded_vector(n, seed);
    let nrm = vec_norm(&v);
    for z in v.iter_mut() {
        *z /= nrm;
    }
    let mut prev = 0.0f64;
    let mut hits = 0usize;
    for _ in 0..max_iter {
        let hv = op.apply_vec(&v);
        let nrm = vec_norm(&hv);
        if nrm < 1e-290 {
            return Ok(0.0);
        }
        // |⟨v, H v⟩| under-estimates ‖H‖ when eigenvalues of both signs mix;
        // the iteration itself runs on H² so the limit is the top |λ|.
        let hhv = op.apply_vec(&hv);
        let est = vec_norm(&hhv).sqrt().max(nrm);
        v = hhv;
        let nrm2 = vec_norm(&v);
        for z in v.iter_mut() {
            *z /= nrm2;
        }
        if (est - prev).abs() <= tol * est.max(1e-30) {
            hits += 1;
            if hits >= 3 {
                return Ok(est);
            }
        } else {
            hits = 0;
        }
        prev = est;
    }
    Ok(prev)
}
