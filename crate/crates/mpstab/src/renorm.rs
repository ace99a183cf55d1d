//! Coarse-graining of matrix product tensors.
//!
//! Grouping `l` sites turns the site channel into its `l`-th power, and a
//! unitary recombination of the d^l product operators leaves at most
//! min{D², d^l} nonzero Kraus operators. Iterating the grouping drives the
//! channel toward its ergodic limit X ↦ Tr[ΞX]·𝟙, whose two-site kernel
//! projector has the rigid shape 𝟙 ⊗ |φ⟩⟨φ| ⊗ 𝟙. This module builds the
//! grouped channel, the limiting channel and projector, distance estimates
//! between spectral projectors, and the per-block rotation that carries a
//! grouped kernel onto the limiting one.

use crate::channels::{align_channels, choi_from_transfer, mix_kraus, Channel};
use crate::mps::{CanonicalForm, Mps, SPAN_CAP};
use crate::numerics::{
    image_projector, op_norm, pseudo_inverse, rank_from_singulars, schatten_norm, svd_full,
    SchattenP,
};
use crate::{CMat, Error, Result, C64, RANK_TOL};

/// Site channel grouped over `l` sites and compressed by the blocking
/// unitary. `mixing` is the d^l × d^l rotation whose leading rows read the
/// nonzero grouped operators off the product list; `kraus` keeps only those
/// nonzero operators (at most min{D², d^l} of them).
pub struct BlockedChannel {
    pub l: usize,
    pub mixing: CMat,
    pub kraus: Vec<CMat>,
}

impl BlockedChannel {
    pub fn channel(&self) -> Result<Channel> {
        Channel::new(self.kraus.clone())
    }
}

fn matrix_power(m: &CMat, n: usize) -> CMat {
    let mut acc = CMat::identity(m.rows);
    for _ in 0..n {
        acc = acc.mul(m);
    }
    acc
}

/// Groups `l` sites into one. The d^l × D² matrix of vectorized products is
/// decomposed as Ã = U_f Σ V†; the rotation U_f† applied to the product list
/// leaves the rows σ_m·conj(V column m), so everything beyond the rank of Ã
/// vanishes. The returned channel satisfies Choi(grouped) = Choi(site^l),
/// checked here against the powered transfer matrix.
pub fn block(mps: &Mps, l: usize) -> Result<BlockedChannel> {
    if l == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    let dl = mps
        .d
        .checked_pow(l as u32)
        .filter(|&r| r <= SPAN_CAP)
        .ok_or_else(|| Error::CapExceeded(format!("d^l = {}^{l} exceeds {SPAN_CAP}", mps.d)))?;
    let bond = mps.bond;
    let a_tilde = mps.product_matrix(l)?;
    let mut svd = svd_full(&a_tilde)?;
    svd.fix_phases();
    let mixing = svd.u.dagger();
    let keep = rank_from_singulars(&svd.s, RANK_TOL);
    let cap = (bond * bond).min(dl);
    assert!(
        svd.s.iter().skip(cap).all(|&s| s <= 1e-10),
        "grouped operators beyond min{{D², d^l}} must vanish"
    );
    let kraus: Vec<CMat> = (0..keep)
        .map(|m| {
            let col: Vec<C64> = (0..bond * bond)
                .map(|i| svd.v[(i, m)].conj() * svd.s[m])
                .collect();
            CMat::unvec_rm(&col, bond, bond)
        })
        .collect();

    let t_pow = matrix_power(&mps.channel().transfer_matrix(), l);
    let choi_pow = choi_from_transfer(&t_pow);
    let choi_blk = Channel::new(kraus.clone())?.choi();
    let scale = choi_pow.max_abs().max(1.0);
    assert!(
        choi_blk.max_abs_diff(&choi_pow) <= 1e-10 * scale,
        "grouped channel must reproduce the powered site channel"
    );

    Ok(BlockedChannel { l, mixing, kraus })
}

/// Ergodic limit of the canonical site channel: Kraus operators
/// √ξ_q |p⟩⟨q| indexed by m = p·D + q. Acts as X ↦ Tr[ΞX]·𝟙; the dual sends
/// every X to Tr[X]·Ξ. Rejects channels whose subdominant transfer
/// eigenvalue touches the unit circle, since no limit exists there.
pub fn limit_kraus(cf: &CanonicalForm) -> Result<Channel> {
    let lam2 = cf.mps.channel().lambda2()?;
    if lam2 >= 1.0 - 1e-10 {
        return Err(Error::NotGeneric(format!(
            "subdominant transfer eigenvalue {lam2:.12} leaves no spectral gap"
        )));
    }
    let bond = cf.mps.bond;
    if cf.xi.iter().any(|&x| x <= 1e-12) {
        return Err(Error::NotGeneric(
            "adjoint fixed point is not strictly positive".into(),
        ));
    }
    let mut kraus = Vec::with_capacity(bond * bond);
    for p in 0..bond {
        for q in 0..bond {
            let mut a = CMat::zeros(bond, bond);
            a[(p, q)] = C64::new(cf.xi[q].sqrt(), 0.0);
            kraus.push(a);
        }
    }
    let ch = Channel::new(kraus)?;

    let id = CMat::identity(bond);
    assert!(
        ch.apply(&id).max_abs_diff(&id) <= 1e-10,
        "limit channel must be unital"
    );
    let xi_mat = CMat::from_real_diag(&cf.xi);
    for probe in [
        CMat::identity(bond),
        CMat::from_fn(bond, bond, |i, j| {
            C64::new((i + 2 * j) as f64, (i * j) as f64)
        }),
    ] {
        let expect = xi_mat.scale(probe.trace());
        assert!(
            ch.apply_adjoint(&probe).max_abs_diff(&expect) <= 1e-10 * probe.max_abs().max(1.0),
            "dual of the limit channel must send X to Tr[X]·Ξ"
        );
    }
    Ok(ch)
}

/// |φ⟩ = Σ_i √ξ_i |ii⟩ as a vector in ℂ^D ⊗ ℂ^D.
pub fn phi_vector(xi: &[f64]) -> Vec<C64> {
    let d = xi.len();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for (i, &x) in xi.iter().enumerate() {
        v[i * d + i] = C64::new(x.sqrt(), 0.0);
    }
    v
}

/// A positive-semidefinite trace-one operator together with the projector
/// onto its image, the image rank, and the smallest retained eigenvalue.
pub struct ProjectorPair {
    pub rho: CMat,
    pub projector: CMat,
    pub rank: usize,
    pub mu: f64,
}

/// Builds the image projector of a density operator and cross-checks it
/// against ρ·ρ⁻¹ (Moore–Penrose).
pub fn projector_pair(rho: &CMat) -> Result<ProjectorPair> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch(
            "projector_pair needs a square matrix".into(),
        ));
    }
    if (rho.trace().re - 1.0).abs() > 1e-8 || rho.trace().im.abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "expected a trace-one operator, got trace {}",
            rho.trace()
        )));
    }
    let (projector, rank, mu) = image_projector(rho, RANK_TOL)?;
    if rank == 0 {
        return Err(Error::InvalidInput("operator has empty image".into()));
    }
    let pinv = pseudo_inverse(rho, RANK_TOL)?;
    assert!(
        rho.mul(&pinv).max_abs_diff(&projector) <= 1e-10,
        "image projector must agree with ρ·ρ⁻¹"
    );
    assert!((projector.trace().re - rank as f64).abs() <= 1e-8);
    Ok(ProjectorPair {
        rho: rho.clone(),
        projector,
        rank,
        mu,
    })
}

/// Two-site state of the limit channel and its image projector. The image
/// is verified to be 𝟙_A ⊗ |φ⟩⟨φ|_BC ⊗ 𝟙_D with slots A..D of dimension D,
/// so the rank is D² and the smallest nonzero eigenvalue is min ξ / D (the
/// state carries a 1/D normalization to reach unit trace).
pub fn asymptotic_projector(cf: &CanonicalForm) -> Result<ProjectorPair> {
    let ch = limit_kraus(cf)?;
    let rho = ch.rho_ee();
    let pair = projector_pair(&rho)?;
    let bond = cf.mps.bond;
    let dd = bond * bond;

    let phi = phi_vector(&cf.xi);
    let mut predicted = CMat::zeros(dd * dd, dd * dd);
    for a in 0..bond {
        for c in 0..bond {
            // |a⟩_A |φ⟩_BC |c⟩_D with E = (A,B), E' = (C,D) and A, C most
            // significant inside their slot pair
            let mut v = vec![C64::new(0.0, 0.0); dd * dd];
            for b in 0..bond {
                v[(a * bond + b) * dd + (b * bond + c)] = phi[b * bond + b];
            }
            let outer = CMat::outer(&v, &v);
            predicted = predicted.add(&outer);
        }
    }
    assert!(
        pair.projector.max_abs_diff(&predicted) <= 1e-10,
        "limit projector must factor as 𝟙 ⊗ |φ⟩⟨φ| ⊗ 𝟙"
    );
    assert_eq!(pair.rank, dd);
    let xi_min = cf.xi.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((pair.mu - xi_min / bond as f64).abs() <= 1e-10);
    Ok(pair)
}

/// Distance between two image projectors together with the bounds that
/// control it: the pseudo-inverse estimate
/// ‖P − P̃‖_p ≤ ‖ρ − ρ̃‖_p (‖ρ⁻¹‖ + ‖ρ⁻²‖ + ‖ρ̃⁻²‖ + ‖ρ⁻¹‖‖ρ̃⁻¹‖),
/// and, when the pair has equal ranks and ‖ρ − ρ̃‖_∞ < μ̃, the eigenvalue
/// continuity estimate 4‖ρ − ρ̃‖_∞ / (μ̃ − ‖ρ − ρ̃‖_∞)².
pub struct DistanceBound {
    pub measured: f64,
    pub pinv_bound: f64,
    pub weyl_bound: Option<f64>,
    pub delta_inf: f64,
}

pub fn projector_distance_bound(
    a: &ProjectorPair,
    b: &ProjectorPair,
    p: SchattenP,
) -> Result<DistanceBound> {
    if a.rho.rows != b.rho.rows {
        return Err(Error::DimensionMismatch(format!(
            "pair dimensions {} and {} differ",
            a.rho.rows, b.rho.rows
        )));
    }
    let measured = schatten_norm(&a.projector.sub(&b.projector), p)?;
    let delta_p = schatten_norm(&a.rho.sub(&b.rho), p)?;
    let pinv_bound =
        delta_p * (1.0 / a.mu + 1.0 / (a.mu * a.mu) + 1.0 / (b.mu * b.mu) + 1.0 / (a.mu * b.mu));
    let delta_inf = op_norm(&a.rho.sub(&b.rho))?;
    let weyl_bound = (a.rank == b.rank && delta_inf < b.mu)
        .then(|| 4.0 * delta_inf / ((b.mu - delta_inf) * (b.mu - delta_inf)));
    Ok(DistanceBound {
        measured,
        pinv_bound,
        weyl_bound,
        delta_inf,
    })
}

/// Grouped channel after the Kraus rotation that best matches the limit
/// channel, paired with its two-site state. The state equals the nonzero
/// corner of the per-block-rotated 2l-site kernel state, so sweeps over l
/// can stay in the D⁴-dimensional frame.
pub fn aligned_pair(cf: &CanonicalForm, l: usize) -> Result<(Channel, ProjectorPair)> {
    let blocked = block(&cf.mps, l)?;
    let dd = cf.mps.bond * cf.mps.bond;
    if blocked.kraus.len() != dd {
        return Err(Error::NotGeneric(format!(
            "grouping left {} operators, expected D² = {dd}",
            blocked.kraus.len()
        )));
    }
    let limit = limit_kraus(cf)?;
    let alignment = align_channels(&blocked.channel()?, &limit)?;
    let rotated = Channel::new(mix_kraus(&blocked.kraus, &alignment.mixing))?;
    let pair = projector_pair(&rotated.rho_ee())?;
    Ok((rotated, pair))
}

/// Per-block rotation W = (R ⊕ 𝟙)·U: the blocking unitary U followed by the
/// aligning Kraus rotation R on the leading D² coordinates. Conjugating the
/// 2l-site kernel state by W ⊗ W leaves the aligned two-site state in the
/// leading corner and zeros elsewhere.
pub fn build_block_unitary(cf: &CanonicalForm, l: usize) -> Result<CMat> {
    if l == 0 || !l.is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "block length must be even and positive".into(),
        ));
    }
    let blocked = block(&cf.mps, l)?;
    let dd = cf.mps.bond * cf.mps.bond;
    if blocked.kraus.len() != dd {
        return Err(Error::NotGeneric(format!(
            "grouping left {} operators, expected D² = {dd}",
            blocked.kraus.len()
        )));
    }
    let limit = limit_kraus(cf)?;
    let alignment = align_channels(&blocked.channel()?, &limit)?;
    let r = &alignment.mixing;
    let dl = blocked.mixing.rows;
    let mut w = blocked.mixing.clone();
    for row in 0..dd {
        for col in 0..dl {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dd {
                acc += r[(row, k)] * blocked.mixing[(k, col)];
            }
            w[(row, col)] = acc;
        }
    }
    Ok(w)
}

/// Least-squares fit of log distance against l. `exact` flags curves that
/// sit at the numerical floor, where no rate is defined.
pub struct ConvergenceFit {
    pub ls: Vec<usize>,
    pub distances: Vec<f64>,
    pub rate: f64,
    pub prefactor: f64,
    pub exact: bool,
}

fn log_linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Measures the Choi trace-norm distance between the l-fold site channel
/// and its limit across `ls` and fits distance ≈ C·exp(rate·l).
pub fn convergence_fit(cf: &CanonicalForm, ls: &[usize]) -> Result<ConvergenceFit> {
    if ls.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 3 sample lengths, got {}",
            ls.len()
        )));
    }
    let limit = limit_kraus(cf)?;
    let choi_inf = limit.choi();
    let t = cf.mps.channel().transfer_matrix();
    let mut distances = Vec::with_capacity(ls.len());
    for &l in ls {
        let choi_l = choi_from_transfer(&matrix_power(&t, l));
        distances.push(schatten_norm(&choi_l.sub(&choi_inf), SchattenP::One)?);
    }
    let points: Vec<(f64, f64)> = ls
        .iter()
        .zip(&distances)
        .filter(|(_, &d)| d > 1e-13)
        .map(|(&l, &d)| (l as f64, d.ln()))
        .collect();
    if points.len() < 2 {
        return Ok(ConvergenceFit {
            ls: ls.to_vec(),
            distances,
            rate: 0.0,
            prefactor: 0.0,
            exact: true,
        });
    }
    let (rate, intercept) = log_linear_fit(&points);
    Ok(ConvergenceFit {
        ls: ls.to_vec(),
        distances,
        rate,
        prefactor: intercept.exp(),
        exact: false,
    })
}

/// One row of a kernel-distance sweep: the measured projector distance at
/// block length `l` and, where the closed form applies (4D⁴√C·|λ₂|^{l/2}
/// below the limiting μ), the bound it promises.
pub struct SweepRow {
    pub l: usize,
    pub measured: f64,
    pub bound_rhs: Option<f64>,
}

/// Sweeps the distance between the rotated grouped kernel projector and the
/// limiting projector over the given block lengths. The bound column uses
/// the prefactor fitted from the channel convergence curve at the same
/// lengths.
pub fn projector_sweep(cf: &CanonicalForm, ls: &[usize]) -> Result<Vec<SweepRow>> {
    let asym = asymptotic_projector(cf)?;
    let lam2 = cf.mps.channel().lambda2()?;
    let fit = convergence_fit(cf, ls)?;
    let d4 = (cf.mps.bond * cf.mps.bond).pow(2) as f64;
    let sqrt_c = if fit.exact { 0.0 } else { fit.prefactor.sqrt() };
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let (_, pair) = aligned_pair(cf, l)?;
        let measured = projector_distance_bound(&pair, &asym, SchattenP::Infinity)?.measured;
        let x = 4.0 * d4 * sqrt_c * lam2.powf(l as f64 / 2.0);
        let bound_rhs = (x < asym.mu).then(|| 4.0 * x / ((asym.mu - x) * (asym.mu - x)));
        rows.push(SweepRow {
            l,
            measured,
            bound_rhs,
        });
    }
    Ok(rows)
}

/// Unnormalized-trace kernel state of `n` consecutive sites:
/// (1/D) Σ Tr[A_{i₁}…A_{iₙ} A_{jₙ}†…A_{j₁}†] |i⟩⟨j|. Its image is the local
/// ground space of the parent Hamiltonian on those sites.
pub fn region_rho(mps: &Mps, n: usize) -> Result<CMat> {
    let prod = mps.product_matrix(n)?;
    Ok(prod.mul(&prod.dagger()).scale_re(1.0 / mps.bond as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::herm_eigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd_with_rank(dim: usize, rank: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols = Vec::with_capacity(rank);
        for _ in 0..rank {
            let v: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            cols.push(v);
        }
        let mut rho = CMat::zeros(dim, dim);
        for v in &cols {
            rho = rho.add(&CMat::outer(v, v));
        }
        rho.scale_re(1.0 / rho.trace().re)
    }

    #[test]
    fn aklt_blocking_leaves_four_operators() {
        let mps = Mps::aklt();
        let blocked = block(&mps, 2).unwrap();
        assert_eq!(blocked.kraus.len(), 4);
        let u = &blocked.mixing;
        assert!(u.dagger().mul(u).max_abs_diff(&CMat::identity(9)) < 1e-12);
    }

    #[test]
    fn bond_one_blocking_leaves_single_operator() {
        let mps = Mps::random(2, 1, 11);
        let blocked = block(&mps, 3).unwrap();
        assert_eq!(blocked.kraus.len(), 1);
    }

    #[test]
    fn blocked_choi_matches_three_site_products() {
        let mps = Mps::random(2, 2, 5);
        let blocked = block(&mps, 3).unwrap();
        // oracle: enumerate the 8 length-3 products directly
        let mut prods = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    prods.push(mps.tensors[i].mul(&mps.tensors[j]).mul(&mps.tensors[k]));
                }
            }
        }
        let direct = Channel::new(prods).unwrap().choi();
        let grouped = blocked.channel().unwrap().choi();
        assert!(grouped.max_abs_diff(&direct) <= 1e-10 * direct.max_abs().max(1.0));
    }

    #[test]
    fn zero_rows_beyond_bond_squared() {
        let mps = Mps::random(2, 2, 17);
        let blocked = block(&mps, 4).unwrap();
        assert_eq!(blocked.kraus.len(), 4);
        let a_tilde = mps.product_matrix(4).unwrap();
        let rotated = blocked.mixing.mul(&a_tilde);
        for row in 4..16 {
            for col in 0..4 {
                assert!(rotated[(row, col)].norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn aklt_limit_channel_facts() {
        let cf = crate::mps::canonical_form(&Mps::aklt()).unwrap();
        let limit = limit_kraus(&cf).unwrap();
        assert_eq!(limit.env_dim(), 4);
        let half = C64::new(0.5f64.sqrt(), 0.0);
        for (m, a) in limit.kraus.iter().enumerate() {
            let (p, q) = (m / 2, m % 2);
            let mut expect = CMat::zeros(2, 2);
            expect[(p, q)] = half;
            assert!(a.max_abs_diff(&expect) < 1e-12);
        }
        // absorption: following the limit with one more site step changes nothing
        let t = cf.mps.channel().transfer_matrix();
        let t_inf = limit.transfer_matrix();
        assert!(t_inf.mul(&t).max_abs_diff(&t_inf) < 1e-12);
        assert!(t.mul(&t_inf).max_abs_diff(&t_inf) < 1e-12);
    }

    #[test]
    fn powered_choi_approaches_limit_geometrically() {
        let cf = crate::mps::canonical_form(&Mps::aklt()).unwrap();
        let limit = limit_kraus(&cf).unwrap();
        let choi_inf = limit.choi();
        let t = cf.mps.channel().transfer_matrix();
        let mut prev: Option<(usize, f64)> = None;
        for n in [2usize, 4, 8] {
            let d = choi_from_transfer(&matrix_power(&t, n))
                .sub(&choi_inf)
                .vec_rm()
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            if let Some((n0, d0)) = prev {
                // distances drop by |λ₂|^Δn = (1/3)^Δn between consecutive n
                let expected = d0 * (1.0f64 / 3.0).powi((n - n0) as i32);
                assert!((d - expected).abs() <= 1e-6 * expected.max(1e-30) + 1e-14);
            }
            prev = Some((n, d));
        }
    }

    #[test]
    fn degenerate_peripheral_spectrum_rejected() {
        // two projectors commute with everything diagonal: |λ₂| = 1
        let a0 = CMat::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let a1 = CMat::from_fn(2, 2, |i, j| {
            if i == 1 && j == 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let cf = CanonicalForm {
            mps: Mps::new(vec![a0, a1]).unwrap(),
            xi: vec![0.5, 0.5],
            scale: 1.0,
        };
        assert!(matches!(limit_kraus(&cf), Err(Error::NotGeneric(_))));
    }

    #[test]
    fn aklt_asymptotic_projector_shape() {
        let cf = crate::mps::canonical_form(&Mps::aklt()).unwrap();
        let pair = asymptotic_projector(&cf).unwrap();
        assert_eq!(pair.rank, 4);
        assert!((pair.mu - 0.25).abs() < 1e-12);
        let phi = phi_vector(&cf.xi);
        let inv_sqrt2 = C64::new(0.5f64.sqrt(), 0.0);
        assert!((phi[0] - inv_sqrt2).norm() < 1e-12);
        assert!((phi[3] - inv_sqrt2).norm() < 1e-12);
        assert!(phi[1].norm() < 1e-12 && phi[2].norm() < 1e-12);
    }

    #[test]
    fn random_asymptotic_projector_fixes_its_state() {
        let cf = crate::mps::canonical_form(&Mps::random(2, 2, 23)).unwrap();
        let pair = asymptotic_projector(&cf).unwrap();
        assert_eq!(pair.rank, 4);
        let fixed = pair.projector.mul(&pair.rho);
        assert!(fixed.max_abs_diff(&pair.rho) < 1e-12);
    }

    #[test]
    fn identical_pair_has_zero_distance() {
        let rho = random_psd_with_rank(6, 3, 2);
        let pair_a = projector_pair(&rho).unwrap();
        let pair_b = projector_pair(&rho).unwrap();
        let out = projector_distance_bound(&pair_a, &pair_b, SchattenP::Infinity).unwrap();
        assert!(out.measured < 1e-12);
        assert!(out.pinv_bound >= 0.0);
        assert!(out.weyl_bound.unwrap() < 1e-10);
    }

    #[test]
    fn distance_bounds_hold_on_random_pairs() {
        for seed in 0..12u64 {
            let dim = 5;
            let rank = 2 + (seed % 3) as usize;
            let rho_a = random_psd_with_rank(dim, rank, 100 + seed);
            // nearby second operator with the same rank
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let eps = 0.02;
            let mut bump = CMat::zeros(dim, dim);
            for _ in 0..rank {
                let v: Vec<C64> = (0..dim)
                    .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                bump = bump.add(&CMat::outer(&v, &v));
            }
            let mixed = rho_a
                .scale_re(1.0 - eps)
                .add(&bump.scale_re(eps / bump.trace().re));
            let rho_b = {
                // project back onto the rank of rho_a so both images match in size
                let eig = herm_eigen(&mixed).unwrap();
                let mut rebuilt = CMat::zeros(dim, dim);
                for k in (dim - rank..dim).rev() {
                    let v: Vec<C64> = (0..dim).map(|i| eig.vecs[(i, k)]).collect();
                    rebuilt = rebuilt.add(&CMat::outer(&v, &v).scale_re(eig.vals[k]));
                }
                rebuilt.scale_re(1.0 / rebuilt.trace().re)
            };
            let a = projector_pair(&rho_a).unwrap();
            let b = projector_pair(&rho_b).unwrap();
            for p in [SchattenP::One, SchattenP::Two, SchattenP::Infinity] {
                let out = projector_distance_bound(&a, &b, p).unwrap();
                assert!(
                    out.measured <= out.pinv_bound * (1.0 + 1e-9) + 1e-12,
                    "pseudo-inverse estimate violated: {} > {}",
                    out.measured,
                    out.pinv_bound
                );
                if let Some(w) = out.weyl_bound {
                    assert!(out.measured <= w * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_mismatch_routes_to_inapplicable() {
        let a = projector_pair(&random_psd_with_rank(6, 2, 7)).unwrap();
        let b = projector_pair(&random_psd_with_rank(6, 4, 8)).unwrap();
        let out = projector_distance_bound(&a, &b, SchattenP::Infinity).unwrap();
        assert!(out.weyl_bound.is_none());
        assert!(out.measured <= out.pinv_bound * (1.0 + 1e-9));
    }

    #[test]
    fn grouped_region_state_sits_in_leading_corner() {
        for (mps, l) in [(Mps::random(2, 2, 31), 2usize), (Mps::aklt(), 2)] {
            let cf = crate::mps::canonical_form(&mps).unwrap();
            let blocked = block(&cf.mps, l).unwrap();
            let dl = cf.mps.d.pow(l as u32);
            let dd = cf.mps.bond * cf.mps.bond;
            let rho_region = region_rho(&cf.mps, 2 * l).unwrap();
            let uu = blocked.mixing.kron(&blocked.mixing);
            let rotated = uu.mul(&rho_region).mul(&uu.dagger());
            let corner = blocked.channel().unwrap().rho_ee();
            for r in 0..dl * dl {
                for c in 0..dl * dl {
                    let (r1, r2) = (r / dl, r % dl);
                    let (c1, c2) = (c / dl, c % dl);
                    let expect = if r1 < dd && r2 < dd && c1 < dd && c2 < dd {
                        corner[(r1 * dd + r2, c1 * dd + c2)]
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    assert!(
                        (rotated[(r, c)] - expect).norm() <= 1e-10,
                        "corner mismatch at ({r},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn block_rotation_carries_kernel_state_to_aligned_corner() {
        let cf = crate::mps::canonical_form(&Mps::random(2, 2, 37)).unwrap();
        let l = 2;
        let w = build_block_unitary(&cf, l).unwrap();
        let dl = 4;
        assert!(w.dagger().mul(&w).max_abs_diff(&CMat::identity(dl)) < 1e-12);
        let (rotated_channel, _) = aligned_pair(&cf, l).unwrap();
        let rho_region = region_rho(&cf.mps, 2 * l).unwrap();
        let ww = w.kron(&w);
        let rotated = ww.mul(&rho_region).mul(&ww.dagger());
        let corner = rotated_channel.rho_ee();
        let dd = 4;
        for r in 0..dl * dl {
            for c in 0..dl * dl {
                let (r1, r2) = (r / dl, r % dl);
                let (c1, c2) = (c / dl, c % dl);
                let expect = if r1 < dd && r2 < dd && c1 < dd && c2 < dd {
                    corner[(r1 * dd + r2, c1 * dd + c2)]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((rotated[(r, c)] - expect).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn limit_tensors_give_zero_distance_at_any_length() {
        // an MPS whose site channel already is its own limit: d = D² = 4
        let xi = [0.7f64, 0.3];
        let mut tensors = Vec::new();
        for p in 0..2 {
            for q in 0..2 {
                let mut a = CMat::zeros(2, 2);
                a[(p, q)] = C64::new(xi[q].sqrt(), 0.0);
                tensors.push(a);
            }
        }
        let cf = crate::mps::canonical_form(&Mps::new(tensors).unwrap()).unwrap();
        let rows = projector_sweep(&cf, &[2, 3, 4]).unwrap();
        for row in rows {
            assert!(
                row.measured < 1e-10,
                "measured {} at l = {}",
                row.measured,
                row.l
            );
            assert!(row.bound_rhs.unwrap() < 1e-10);
        }
    }

    #[test]
    fn aklt_convergence_rate_matches_transfer_gap() {
        let cf = crate::mps::canonical_form(&Mps::aklt()).unwrap();
        let fit = convergence_fit(&cf, &[2, 3, 4, 5, 6]).unwrap();
        assert!(!fit.exact);
        let target = (1.0f64 / 3.0).ln();
        assert!(
            (fit.rate - target).abs() <= 0.2 * target.abs(),
            "rate {} vs {}",
            fit.rate,
            target
        );
        assert!(fit.prefactor.is_finite() && fit.prefactor > 0.0);
    }

    #[test]
    fn convergence_fit_rejects_short_ranges() {
        let cf = crate::mps::canonical_form(&Mps::aklt()).unwrap();
        assert!(matches!(
            convergence_fit(&cf, &[2, 4]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fitted_prefactor_stable_across_windows() {
        let cf = crate::mps::canonical_form(&Mps::random(2, 2, 41)).unwrap();
        let a = convergence_fit(&cf, &[2, 3, 4, 5]).unwrap();
        let b = convergence_fit(&cf, &[4, 5, 6, 7]).unwrap();
        assert!(!a.exact && !b.exact);
        let ratio = a.prefactor / b.prefactor;
        assert!(
            ratio > 0.5 && ratio < 2.0,
            "prefactors {} vs {}",
            a.prefactor,
            b.prefactor
        );
    }
}
