//! Completely positive maps in Kraus form, their transfer-matrix and Choi
//! representations, and the Stinespring-level alignment of two nearby
//! channels.
//!
//! Vectorization is row-major throughout: vec(AXB) = (A ⊗ Bᵀ) vec(X). The
//! transfer matrix of T(X) = Σ A_i X A_i† is therefore Σ A_i ⊗ conj(A_i),
//! and the Choi operator J = Σ_ij E_ij ⊗ T(E_ij) is its index reshuffle
//! J[(i,a),(j,b)] = T[(a,b),(i,j)].

use crate::numerics::{
    general_eigenvalues, herm_eigen, op_norm, svd_full, trace_norm, CMat, Error, Result, C64,
};

/// A completely positive map on D × D matrices, held as its Kraus list.
#[derive(Clone)]
pub struct Channel {
    pub kraus: Vec<CMat>,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.rows).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidInput("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.rows != dim || k.cols != dim {
                return Err(Error::DimensionMismatch(
                    "Kraus operators must be square and equally sized".into(),
                ));
            }
            if !k.is_finite() {
                return Err(Error::NonFinite("Kraus operator".into()));
            }
        }
        Ok(Channel { kraus })
    }

    /// Matrix dimension D the map acts on.
    pub fn dim(&self) -> usize {
        self.kraus[0].rows
    }

    /// Number of Kraus operators (the environment dimension of the
    /// Stinespring dilation).
    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    /// T(X) = Σ A_i X A_i†.
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for a in &self.kraus {
            out = out.add(&a.mul(x).mul(&a.dagger()));
        }
        out
    }

    /// T*(X) = Σ A_i† X A_i.
    pub fn apply_adjoint(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for a in &self.kraus {
            out = out.add(&a.dagger().mul(x).mul(a));
        }
        out
    }

    /// D² × D² matrix with vec(T(X)) = T_mat · vec(X).
    pub fn transfer_matrix(&self) -> CMat {
        let dd = self.dim() * self.dim();
        let mut t = CMat::zeros(dd, dd);
        for a in &self.kraus {
            t = t.add(&a.kron(&a.conj()));
        }
        t
    }

    /// Choi operator J = Σ_ij E_ij ⊗ T(E_ij).
    pub fn choi(&self) -> CMat {
        choi_from_transfer(&self.transfer_matrix())
    }

    /// Stinespring isometry V = Σ_i A_i† ⊗ |i⟩, mapping ℂ^D into
    /// ℂ^D ⊗ ℂ^{d_E} with the system factor first. V†V = 𝟙 exactly when
    /// the channel is unital.
    pub fn stinespring(&self) -> CMat {
        let dim = self.dim();
        let de = self.env_dim();
        let mut v = CMat::zeros(dim * de, dim);
        for (i, a) in self.kraus.iter().enumerate() {
            let ad = a.dagger();
            for r in 0..dim {
                for c in 0..dim {
                    v[(r * de + i, c)] = ad[(r, c)];
                }
            }
        }
        v
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let mut s = CMat::zeros(self.dim(), self.dim());
        for a in &self.kraus {
            s = s.add(&a.mul(&a.dagger()));
        }
        s.max_abs_diff(&CMat::identity(self.dim())) <= tol
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let mut s = CMat::zeros(self.dim(), self.dim());
        for a in &self.kraus {
            s = s.add(&a.dagger().mul(a));
        }
        s.max_abs_diff(&CMat::identity(self.dim())) <= tol
    }

    /// Magnitude of the largest subdominant transfer eigenvalue.
    pub fn lambda2(&self) -> Result<f64> {
        let ev = general_eigenvalues(&self.transfer_matrix())?;
        Ok(ev.get(1).map(|z| z.norm()).unwrap_or(0.0))
    }

    /// All transfer eigenvalues, descending by magnitude.
    pub fn transfer_spectrum(&self) -> Result<Vec<C64>> {
        general_eigenvalues(&self.transfer_matrix())
    }

    /// Fixed point of T by power iteration from 𝟙/D, Hermitized and
    /// trace-normalized each sweep. Requires a trivial peripheral spectrum
    /// to converge; gives up after `max_iter` sweeps.
    pub fn fixed_point(&self, tol: f64, max_iter: usize) -> Result<CMat> {
        let dim = self.dim();
        let mut x = CMat::identity(dim).scale_re(1.0 / dim as f64);
        for _ in 0..max_iter {
            let next = self.apply(&x).hermitize();
            let tr = next.trace().re;
            if tr.abs() < 1e-290 {
                return Err(Error::NoConvergence(
                    "fixed-point iterate lost trace".into(),
                ));
            }
            let next = next.scale_re(1.0 / tr);
            let delta = next.max_abs_diff(&x);
            x = next;
            if delta <= tol {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence(format!(
            "no transfer fixed point to {tol:.1e} in {max_iter} sweeps"
        )))
    }

    /// The two-site environment state
    /// ρ = (1/D) Σ Tr[A_{i1}A_{i2} A_{j2}†A_{j1}†] |i1 i2⟩⟨j1 j2|.
    /// A density operator whenever the channel is unital.
    pub fn rho_ee(&self) -> CMat {
        let de = self.env_dim();
        let dim = self.dim();
        let mut products = Vec::with_capacity(de * de);
        for a1 in &self.kraus {
            for a2 in &self.kraus {
                products.push(a1.mul(a2));
            }
        }
        let mut rho = CMat::zeros(de * de, de * de);
        for (i, p) in products.iter().enumerate() {
            for (j, q) in products.iter().enumerate() {
                rho[(i, j)] = p.mul(&q.dagger()).trace() / dim as f64;
            }
        }
        rho.hermitize()
    }
}

/// Reshuffles a transfer matrix into the Choi operator of the same map:
/// J[(i,a),(j,b)] = T[(a,b),(i,j)].
pub fn choi_from_transfer(t: &CMat) -> CMat {
    let dd = t.rows;
    let d = (dd as f64).sqrt().round() as usize;
    assert_eq!(d * d, dd, "transfer matrix must be D²×D²");
    CMat::from_fn(dd, dd, |row, col| {
        let (i, a) = (row / d, row % d);
        let (j, b) = (col / d, col % d);
        t[(a * d + b, i * d + j)]
    })
}

/// Trace-norm distance of the Choi operators, together with the
/// completely bounded norm sandwich it implies:
/// ‖ΔJ‖₁ / D ≤ ‖T − T̃‖_cb ≤ ‖ΔJ‖₁.
pub struct CbBounds {
    pub choi_trace_distance: f64,
    pub cb_lower: f64,
    pub cb_upper: f64,
}

pub fn cb_distance_bounds(a: &Channel, b: &Channel) -> Result<CbBounds> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "channels act on different dimensions".into(),
        ));
    }
    let dj = trace_norm(&a.choi().sub(&b.choi()))?;
    Ok(CbBounds {
        choi_trace_distance: dj,
        cb_lower: dj / a.dim() as f64,
        cb_upper: dj,
    })
}

/// Zero-pads the shorter Kraus list so both have equal length.
pub fn pad_kraus(a: &[CMat], b: &[CMat]) -> (Vec<CMat>, Vec<CMat>) {
    let dim = a.first().or_else(|| b.first()).map(|m| m.rows).unwrap_or(0);
    let n = a.len().max(b.len());
    let mut pa = a.to_vec();
    let mut pb = b.to_vec();
    while pa.len() < n {
        pa.push(CMat::zeros(dim, dim));
    }
    while pb.len() < n {
        pb.push(CMat::zeros(dim, dim));
    }
    (pa, pb)
}

/// out_k = Σ_i mixing[k,i] · in_i. A unitary mixing leaves the channel
/// unchanged.
pub fn mix_kraus(kraus: &[CMat], mixing: &CMat) -> Vec<CMat> {
    let dim = kraus[0].rows;
    (0..mixing.rows)
        .map(|k| {
            let mut out = CMat::zeros(dim, dim);
            for (i, a) in kraus.iter().enumerate() {
                out.axpy(mixing[(k, i)], a);
            }
            out
        })
        .collect()
}

/// Result of aligning the Stinespring dilations of two channels.
pub struct KrausAlignment {
    /// Unitary R on the environment: R applied to the first channel's Kraus
    /// list (via [`mix_kraus`]) brings it closest to the second's.
    pub mixing: CMat,
    /// ‖(𝟙 ⊗ Rᵀ…) V − Ṽ‖_∞ after optimizing: the dilation-level distance.
    pub achieved: f64,
}

/// Finds the environment unitary that best matches the dilation of `a` to
/// the dilation of `b`. The achieved operator-norm distance always
/// satisfies achieved² ≤ ‖J_a − J_b‖₁.
pub fn align_channels(a: &Channel, b: &Channel) -> Result<KrausAlignment> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "channels act on different dimensions".into(),
        ));
    }
    let (ka, kb) = pad_kraus(&a.kraus, &b.kraus);
    let de = ka.len();
    // B_ij = Tr[A_i† Ã_j]; maximize Re Tr[U Bᵀ] over unitaries U
    let bmat = CMat::from_fn(de, de, |i, j| ka[i].dagger().mul(&kb[j]).trace());
    let m = bmat.transpose();
    let mut svd = svd_full(&m)?;
    svd.fix_phases();
    let u = svd.v.mul(&svd.u.dagger());
    // (𝟙 ⊗ Uᵀ) V_a has Kraus list U†·stack(A), so the mixing to report is U†
    let mixing = u.dagger();

    let va = Channel::new(ka)?.stinespring();
    let vb = Channel::new(kb)?.stinespring();
    let dim = a.dim();
    let mut rotated = CMat::zeros(dim * de, dim);
    let ut = u.transpose();
    for r in 0..dim {
        for i in 0..de {
            for c in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..de {
                    acc += ut[(i, j)] * va[(r * de + j, c)];
                }
                rotated[(r * de + i, c)] = acc;
            }
        }
    }
    let achieved = op_norm(&rotated.sub(&vb))?;
    Ok(KrausAlignment { mixing, achieved })
}

/// Smallest nonzero eigenvalue of a PSD matrix (zero decided by `rel_tol`
/// against the largest eigenvalue). Errors on rank zero.
pub fn min_nonzero_eigenvalue(rho: &CMat, rel_tol: f64) -> Result<f64> {
    let eig = herm_eigen(rho)?;
    let largest = eig.vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cut = rel_tol * largest;
    eig.vals
        .iter()
        .filter(|&&v| v > cut)
        .fold(None, |acc: Option<f64>, &v| {
            Some(acc.map_or(v, |m: f64| m.min(v)))
        })
        .ok_or_else(|| Error::InvalidInput("matrix has no positive part".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{herm_eigen, partial_trace, RANK_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn rand_channel(d: usize, nk: usize, seed: u64) -> Channel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kraus: Vec<CMat> = (0..nk).map(|_| rand_mat(d, &mut rng)).collect();
        Channel::new(kraus).unwrap()
    }

    /// Rescales the Kraus list so Σ A A† = 𝟙 (unital normalization).
    fn unitalize(ch: &Channel) -> Channel {
        let mut s = CMat::zeros(ch.dim(), ch.dim());
        for a in &ch.kraus {
            s = s.add(&a.mul(&a.dagger()));
        }
        let eig = herm_eigen(&s).unwrap();
        let inv_sqrt = {
            let n = ch.dim();
            let mut m = CMat::zeros(n, n);
            for (k, &lam) in eig.vals.iter().enumerate() {
                let v = eig.vecs.col(k);
                let c = C64::new(1.0 / lam.sqrt(), 0.0);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += v[i] * c * v[j].conj();
                    }
                }
            }
            m
        };
        Channel::new(ch.kraus.iter().map(|a| inv_sqrt.mul(a)).collect()).unwrap()
    }

    #[test]
    fn transfer_matches_apply() {
        let ch = rand_channel(3, 2, 1);
        let t = ch.transfer_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let x = rand_mat(3, &mut rng);
        let via_mat = CMat::unvec_rm(&t.apply(&x.vec_rm()), 3, 3);
        assert!(via_mat.max_abs_diff(&ch.apply(&x)) < 1e-12);
    }

    #[test]
    fn choi_reshuffle_agrees_with_direct_sum() {
        let ch = rand_channel(2, 3, 2);
        let direct = {
            let d = 2;
            let mut j = CMat::zeros(d * d, d * d);
            for i in 0..d {
                for jj in 0..d {
                    let mut e = CMat::zeros(d, d);
                    e[(i, jj)] = C64::new(1.0, 0.0);
                    let te = ch.apply(&e);
                    for a in 0..d {
                        for b in 0..d {
                            j[(i * d + a, jj * d + b)] = te[(a, b)];
                        }
                    }
                }
            }
            j
        };
        assert!(ch.choi().max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn choi_is_psd_and_encodes_tp_unital() {
        let ch = unitalize(&rand_channel(3, 3, 5));
        let j = ch.choi();
        let eig = herm_eigen(&j.hermitize()).unwrap();
        assert!(eig.vals[0] > -1e-11, "Choi not PSD: {}", eig.vals[0]);
        // unital ⇔ tracing the first (input) factor leaves 𝟙
        let tr_in = partial_trace(&j, &[3, 3], &[1]).unwrap();
        assert!(tr_in.max_abs_diff(&CMat::identity(3)) < 1e-10);
        assert!(ch.is_unital(1e-10));
    }

    #[test]
    fn stinespring_isometry_iff_unital() {
        let ch = unitalize(&rand_channel(2, 4, 7));
        let v = ch.stinespring();
        let vtv = v.dagger().mul(&v);
        assert!(vtv.max_abs_diff(&CMat::identity(2)) < 1e-11);
        let skew = rand_channel(2, 4, 8);
        let v2 = skew.stinespring();
        assert!(v2.dagger().mul(&v2).max_abs_diff(&CMat::identity(2)) > 1e-3);
    }

    #[test]
    fn mixing_preserves_channel() {
        let ch = rand_channel(2, 3, 11);
        let u = herm_eigen(&{
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            let m = rand_mat(3, &mut rng);
            m.add(&m.dagger())
        })
        .unwrap()
        .vecs;
        let mixed = Channel::new(mix_kraus(&ch.kraus, &u)).unwrap();
        assert!(mixed.transfer_matrix().max_abs_diff(&ch.transfer_matrix()) < 1e-12);
    }

    #[test]
    fn alignment_of_identical_channels_is_exact() {
        let ch = unitalize(&rand_channel(2, 3, 13));
        // same channel, Kraus order permuted
        let permuted = Channel::new(vec![
            ch.kraus[2].clone(),
            ch.kraus[0].clone(),
            ch.kraus[1].clone(),
        ])
        .unwrap();
        let al = align_channels(&ch, &permuted).unwrap();
        assert!(al.achieved < 1e-10, "achieved {}", al.achieved);
        let rotated = Channel::new(mix_kraus(&ch.kraus, &al.mixing)).unwrap();
        for (a, b) in rotated.kraus.iter().zip(&permuted.kraus) {
            assert!(a.max_abs_diff(b) < 1e-9);
        }
    }

    #[test]
    fn alignment_square_bounded_by_choi_distance() {
        for seed in 0..6u64 {
            let a = unitalize(&rand_channel(2, 3, 100 + seed));
            let mut b = a.clone();
            // perturb one Kraus slightly, then re-unitalize
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let eps = rand_mat(2, &mut rng).scale_re(0.05);
            b.kraus[0] = b.kraus[0].add(&eps);
            let b = unitalize(&b);
            let al = align_channels(&a, &b).unwrap();
            let dj = trace_norm(&a.choi().sub(&b.choi())).unwrap();
            assert!(
                al.achieved * al.achieved <= dj + 1e-9,
                "seed {seed}: achieved² = {} > ‖ΔJ‖₁ = {}",
                al.achieved * al.achieved,
                dj
            );
        }
    }

    #[test]
    fn alignment_beats_unaligned_distance() {
        let a = unitalize(&rand_channel(2, 3, 41));
        // rotate the Kraus list by a nontrivial unitary: same channel
        let u = herm_eigen(&{
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let m = rand_mat(3, &mut rng);
            m.add(&m.dagger())
        })
        .unwrap()
        .vecs;
        let b = Channel::new(mix_kraus(&a.kraus, &u)).unwrap();
        let unaligned = op_norm(&a.stinespring().sub(&b.stinespring())).unwrap();
        let al = align_channels(&a, &b).unwrap();
        assert!(
            al.achieved < 1e-9,
            "same channel must align exactly, got {}",
            al.achieved
        );
        assert!(unaligned > 1e-2, "test not probing anything: {unaligned}");
    }

    #[test]
    fn rho_ee_is_state_for_unital_channels() {
        let ch = unitalize(&rand_channel(2, 3, 55));
        let rho = ch.rho_ee();
        assert!((rho.trace().re - 1.0).abs() < 1e-11);
        let eig = herm_eigen(&rho).unwrap();
        assert!(eig.vals[0] > -1e-11);
    }

    #[test]
    fn cb_bounds_ordering() {
        let a = unitalize(&rand_channel(2, 3, 61));
        let b = unitalize(&rand_channel(2, 3, 62));
        let cb = cb_distance_bounds(&a, &b).unwrap();
        assert!(cb.cb_lower <= cb.cb_upper + 1e-14);
        assert!((cb.cb_lower * 2.0 - cb.choi_trace_distance).abs() < 1e-12);
    }

    #[test]
    fn min_nonzero_eigenvalue_picks_smallest_retained() {
        let rho = CMat::from_real_diag(&[0.5, 0.25, 0.25, 0.0]);
        let mu = min_nonzero_eigenvalue(&rho, RANK_TOL).unwrap();
        assert!((mu - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_of_unital_channel_is_identity() {
        let ch = unitalize(&rand_channel(3, 3, 71));
        let fp = ch.fixed_point(1e-13, 10_000).unwrap();
        let expect = CMat::identity(3).scale_re(1.0 / 3.0);
        assert!(fp.max_abs_diff(&expect) < 1e-10);
    }
}
