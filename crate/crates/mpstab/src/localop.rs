//! Lattice operators assembled from windowed pieces, applied matrix-free.
//!
//! A window is an ordered list of sites together with a dense matrix on the
//! tensor product of those sites; the operator acts as the identity
//! elsewhere. Sums, real scalings, projector complements, unitary
//! conjugations and projector sandwiches combine windows into the composite
//! operators the renormalization analysis needs, without ever forming a
//! d^N × d^N matrix.
//!
//! Composite index convention: site 0 is the most significant digit, so
//! kron(A₀, A₁) acts on sites (0, 1).

use crate::lanczos::HermitianOp;
use crate::numerics::{to_faer, CMat, C64};
use std::sync::Arc;

/// Dense matrix on an ordered tuple of sites (cyclic windows just list
/// wrapped site numbers explicitly).
#[derive(Clone)]
pub struct WindowMat {
    pub sites: Vec<usize>,
    pub mat: Arc<CMat>,
}

impl WindowMat {
    pub fn new(sites: Vec<usize>, mat: Arc<CMat>) -> Self {
        WindowMat { sites, mat }
    }
}

/// Vector supported on a window, used for rank-one pieces |v⟩⟨v|.
#[derive(Clone)]
pub struct WindowVec {
    pub sites: Vec<usize>,
    pub vec: Arc<Vec<C64>>,
}

/// Operator expression tree. All variants used as solver inputs are
/// Hermitian by construction; `Conjugated` lists must hold unitaries.
pub enum OpExpr {
    /// Σ of dense windows.
    Windows(Vec<WindowMat>),
    /// Σ c · |v⟩⟨v| over windows.
    RankOnes(Vec<(f64, WindowVec)>),
    /// c · inner
    Scaled(f64, Box<OpExpr>),
    Sum(Vec<OpExpr>),
    /// 𝟙 − inner
    Complement(Box<OpExpr>),
    /// U · inner · U†, U the product of the listed unitary windows
    /// (windows act on disjoint site sets, so the order is immaterial).
    Conjugated(Vec<WindowMat>, Box<OpExpr>),
    /// P · inner · P
    Sandwich(Box<OpExpr>, Box<OpExpr>),
}

pub struct LatticeOp {
    pub n_sites: usize,
    pub d: usize,
    pub expr: OpExpr,
}

fn digit_strides(n: usize, d: usize) -> Vec<usize> {
    let mut s = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        s[k] = s[k + 1] * d;
    }
    s
}

/// Offsets of every window configuration and every configuration of the
/// complementary sites, in the full composite index.
fn window_offsets(n: usize, d: usize, sites: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let strides = digit_strides(n, d);
    let dw: usize = d.pow(sites.len() as u32);
    let mut woff = vec![0usize; dw];
    for (w, off) in woff.iter_mut().enumerate() {
        let mut rem = w;
        for &s in sites.iter().rev() {
            *off += (rem % d) * strides[s];
            rem /= d;
        }
    }
    let rest_sites: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let rest: usize = d.pow(rest_sites.len() as u32);
    let mut roff = vec![0usize; rest];
    for (r, off) in roff.iter_mut().enumerate() {
        let mut rem = r;
        for &s in rest_sites.iter().rev() {
            *off += (rem % d) * strides[s];
            rem /= d;
        }
    }
    (woff, roff)
}

/// y += (mat on window) x, identity elsewhere.
fn apply_window_add(n: usize, d: usize, wm: &WindowMat, x: &[C64], y: &mut [C64]) {
    let (woff, roff) = window_offsets(n, d, &wm.sites);
    let dw = woff.len();
    let mat = wm.mat.as_ref();
    debug_assert_eq!(mat.rows, dw);
    if dw >= 48 && roff.len() > 1 {
        // gather into a dw × rest panel and let gemm do the work
        let g = faer::Mat::from_fn(dw, roff.len(), |w, r| x[woff[w] + roff[r]]);
        let out = to_faer(mat) * g;
        for (r, ro) in roff.iter().enumerate() {
            for (w, wo) in woff.iter().enumerate() {
                y[wo + ro] += out[(w, r)];
            }
        }
    } else {
        let mut xs = vec![C64::new(0.0, 0.0); dw];
        for &ro in &roff {
            for (w, wo) in woff.iter().enumerate() {
                xs[w] = x[wo + ro];
            }
            for w in 0..dw {
                let row = mat.row(w);
                let mut acc = C64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(&xs) {
                    acc += a * b;
                }
                y[woff[w] + ro] += acc;
            }
        }
    }
}

/// y += c · |v⟩⟨v|_window x.
fn apply_rank_one_add(n: usize, d: usize, c: f64, wv: &WindowVec, x: &[C64], y: &mut [C64]) {
    let (woff, roff) = window_offsets(n, d, &wv.sites);
    let v = wv.vec.as_ref();
    debug_assert_eq!(v.len(), woff.len());
    for &ro in &roff {
        let mut amp = C64::new(0.0, 0.0);
        for (w, wo) in woff.iter().enumerate() {
            amp += v[w].conj() * x[wo + ro];
        }
        amp *= c;
        for (w, wo) in woff.iter().enumerate() {
            y[wo + ro] += amp * v[w];
        }
    }
}

fn apply_expr(n: usize, d: usize, expr: &OpExpr, x: &[C64]) -> Vec<C64> {
    let dim = x.len();
    match expr {
        OpExpr::Windows(ws) => {
            let mut y = vec![C64::new(0.0, 0.0); dim];
            for wm in ws {
                apply_window_add(n, d, wm, x, &mut y);
            }
            y
        }
        OpExpr::RankOnes(rs) => {
            let mut y = vec![C64::new(0.0, 0.0); dim];
            for (c, wv) in rs {
                apply_rank_one_add(n, d, *c, wv, x, &mut y);
            }
            y
        }
        OpExpr::Scaled(c, inner) => {
            let mut y = apply_expr(n, d, inner, x);
            for z in y.iter_mut() {
                *z *= *c;
            }
            y
        }
        OpExpr::Sum(terms) => {
            let mut y = vec![C64::new(0.0, 0.0); dim];
            for t in terms {
                let yt = apply_expr(n, d, t, x);
                for (a, b) in y.iter_mut().zip(&yt) {
                    *a += b;
                }
            }
            y
        }
        OpExpr::Complement(inner) => {
            let py = apply_expr(n, d, inner, x);
            x.iter().zip(&py).map(|(a, b)| a - b).collect()
        }
        OpExpr::Conjugated(us, inner) => {
            let mut t = x.to_vec();
            for u in us {
                let dag = WindowMat::new(u.sites.clone(), Arc::new(u.mat.dagger()));
                let mut out = vec![C64::new(0.0, 0.0); dim];
                apply_window_add(n, d, &dag, &t, &mut out);
                t = out;
            }
            let s = apply_expr(n, d, inner, &t);
            let mut y = s;
            for u in us {
                let mut out = vec![C64::new(0.0, 0.0); dim];
                apply_window_add(n, d, u, &y, &mut out);
                y = out;
            }
            y
        }
        OpExpr::Sandwich(p, inner) => {
            let t = apply_expr(n, d, p, x);
            let s = apply_expr(n, d, inner, &t);
            apply_expr(n, d, p, &s)
        }
    }
}

impl HermitianOp for LatticeOp {
    fn dim(&self) -> usize {
        self.d.pow(self.n_sites as u32)
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let out = apply_expr(self.n_sites, self.d, &self.expr, x);
        y.copy_from_slice(&out);
    }
}

impl LatticeOp {
    /// Densifies by applying to every basis vector. Test and small-system
    /// use only.
    pub fn to_dense(&self) -> CMat {
        let dim = self.dim();
        let mut m = CMat::zeros(dim, dim);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply_vec(&e);
            e[j] = C64::new(0.0, 0.0);
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

/// Translates `h` (acting on `span` consecutive sites) around the ring:
/// windows at start sites 0..n, wrapping cyclically.
pub fn pbc_bond_windows(n: usize, span: usize, h: &Arc<CMat>) -> Vec<WindowMat> {
    assert!(span <= n);
    (0..n)
        .map(|i| WindowMat::new((0..span).map(|t| (i + t) % n).collect(), h.clone()))
        .collect()
}

/// Same, open boundary: start sites 0..=n-span only.
pub fn obc_bond_windows(n: usize, span: usize, h: &Arc<CMat>) -> Vec<WindowMat> {
    assert!(span <= n);
    (0..=n - span)
        .map(|i| WindowMat::new((i..i + span).collect(), h.clone()))
        .collect()
}

/// Dense embedding oracle: mat on `sites`, identity elsewhere, as a full
/// d^n × d^n matrix. Exponential in n; exists for cross-checks.
pub fn embed_dense(n: usize, d: usize, sites: &[usize], mat: &CMat) -> CMat {
    let dim = d.pow(n as u32);
    let (woff, roff) = window_offsets(n, d, sites);
    let mut m = CMat::zeros(dim, dim);
    for &ro in &roff {
        for (w1, o1) in woff.iter().enumerate() {
            for (w2, o2) in woff.iter().enumerate() {
                m[(o1 + ro, o2 + ro)] = mat[(w1, w2)];
            }
        }
    }
    m
}

/// Dense sum of PBC-translated bond terms. Small n only.
pub fn dense_pbc_hamiltonian(n: usize, d: usize, span: usize, h: &CMat) -> CMat {
    let dim = d.pow(n as u32);
    let mut m = CMat::zeros(dim, dim);
    for i in 0..n {
        let sites: Vec<usize> = (0..span).map(|t| (i + t) % n).collect();
        m = m.add(&embed_dense(n, d, &sites, h));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{herm_eigen, inner};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(dim: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..dim)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    fn rand_herm(dim: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        a.add(&a.dagger()).scale_re(0.5)
    }

    #[test]
    fn window_matches_dense_embedding() {
        let (n, d) = (4usize, 2usize);
        let h = rand_herm(4, 3);
        for sites in [vec![0usize, 1], vec![1, 2], vec![3, 0], vec![2, 0]] {
            let op = LatticeOp {
                n_sites: n,
                d,
                expr: OpExpr::Windows(vec![WindowMat::new(sites.clone(), Arc::new(h.clone()))]),
            };
            let dense = embed_dense(n, d, &sites, &h);
            let x = rand_vec(16, 7);
            let y1 = op.apply_vec(&x);
            let y2 = dense.apply(&x);
            let worst = y1
                .iter()
                .zip(&y2)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-13, "sites {sites:?}: {worst:.2e}");
        }
    }

    #[test]
    fn gemm_path_matches_loop_path() {
        // window large enough to hit the gemm branch
        let (n, d) = (8usize, 2usize);
        let h = rand_herm(64, 11); // 6-site window, dw = 64 ≥ 48
        let sites: Vec<usize> = vec![5, 6, 7, 0, 1, 2];
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Windows(vec![WindowMat::new(sites.clone(), Arc::new(h.clone()))]),
        };
        let dense = embed_dense(n, d, &sites, &h);
        let x = rand_vec(256, 13);
        let y1 = op.apply_vec(&x);
        let y2 = dense.apply(&x);
        let worst = y1
            .iter()
            .zip(&y2)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn pbc_windows_match_dense_sum() {
        let (n, d) = (5usize, 2usize);
        let h = rand_herm(4, 17);
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Windows(pbc_bond_windows(n, 2, &Arc::new(h.clone()))),
        };
        let dense = dense_pbc_hamiltonian(n, d, 2, &h);
        assert!(op.to_dense().max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn rank_one_matches_outer_product() {
        let (n, d) = (3usize, 2usize);
        let v = rand_vec(4, 23);
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::RankOnes(vec![(
                1.5,
                WindowVec {
                    sites: vec![1, 2],
                    vec: Arc::new(v.clone()),
                },
            )]),
        };
        let dense = embed_dense(n, d, &[1, 2], &CMat::outer(&v, &v).scale_re(1.5));
        assert!(op.to_dense().max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn conjugation_matches_dense_oracle() {
        let (n, d) = (3usize, 2usize);
        let h = rand_herm(4, 31);
        // a Haar-ish unitary from the eigenvectors of a random Hermitian
        let u = herm_eigen(&rand_herm(2, 32)).unwrap().vecs;
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Conjugated(
                vec![WindowMat::new(vec![0], Arc::new(u.clone()))],
                Box::new(OpExpr::Windows(vec![WindowMat::new(
                    vec![0, 1],
                    Arc::new(h.clone()),
                )])),
            ),
        };
        let udense = embed_dense(n, d, &[0], &u);
        let hdense = embed_dense(n, d, &[0, 1], &h);
        let expect = udense.mul(&hdense).mul(&udense.dagger());
        assert!(op.to_dense().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn complement_and_sandwich() {
        let (n, d) = (2usize, 2usize);
        let v = {
            let v = rand_vec(4, 41);
            let nrm = crate::numerics::vec_norm(&v);
            v.into_iter().map(|z| z / nrm).collect::<Vec<_>>()
        };
        let proj = OpExpr::RankOnes(vec![(
            1.0,
            WindowVec {
                sites: vec![0, 1],
                vec: Arc::new(v.clone()),
            },
        )]);
        let h = rand_herm(4, 43);
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Sandwich(
                Box::new(OpExpr::Complement(Box::new(proj))),
                Box::new(OpExpr::Windows(vec![WindowMat::new(
                    vec![0, 1],
                    Arc::new(h.clone()),
                )])),
            ),
        };
        let p = CMat::identity(4).sub(&CMat::outer(&v, &v));
        let expect = p.mul(&h).mul(&p);
        assert!(op.to_dense().max_abs_diff(&expect) < 1e-11);
    }

    #[test]
    fn composite_is_adjoint_symmetric() {
        let (n, d) = (4usize, 2usize);
        let h = rand_herm(4, 51);
        let u = herm_eigen(&rand_herm(4, 52)).unwrap().vecs;
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Sum(vec![
                OpExpr::Windows(pbc_bond_windows(n, 2, &Arc::new(h.clone()))),
                OpExpr::Scaled(
                    -0.5,
                    Box::new(OpExpr::Conjugated(
                        vec![WindowMat::new(vec![1, 2], Arc::new(u))],
                        Box::new(OpExpr::Windows(vec![WindowMat::new(
                            vec![2, 3],
                            Arc::new(h.clone()),
                        )])),
                    )),
                ),
            ]),
        };
        let x = rand_vec(16, 61);
        let y = rand_vec(16, 62);
        let lhs = inner(&x, &op.apply_vec(&y));
        let rhs = inner(&op.apply_vec(&x), &y);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn scaled_sum_linearity() {
        let (n, d) = (3usize, 2usize);
        let h1 = rand_herm(4, 71);
        let h2 = rand_herm(4, 72);
        let op = LatticeOp {
            n_sites: n,
            d,
            expr: OpExpr::Sum(vec![
                OpExpr::Scaled(
                    2.0,
                    Box::new(OpExpr::Windows(vec![WindowMat::new(
                        vec![0, 1],
                        Arc::new(h1.clone()),
                    )])),
                ),
                OpExpr::Windows(vec![WindowMat::new(vec![1, 2], Arc::new(h2.clone()))]),
            ]),
        };
        let expect = embed_dense(n, d, &[0, 1], &h1)
            .scale_re(2.0)
            .add(&embed_dense(n, d, &[1, 2], &h2));
        assert!(op.to_dense().max_abs_diff(&expect) < 1e-12);
    }
}
