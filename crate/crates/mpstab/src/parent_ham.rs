//! Parent Hamiltonians: the local projector onto the complement of the
//! matrix-product subspace, ring assembly with periodic wraparound, local
//! and global gap measurements, and the image/kernel correspondence of the
//! region states.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lanczos::{lanczos_smallest, HermitianOp};
use crate::localop::{obc_bond_windows, pbc_bond_windows, LatticeOp, OpExpr, WindowMat};
use crate::mps::{Mps, EXPAND_CAP, SPAN_CAP};
use crate::numerics::{herm_eigen, op_norm};
use crate::renorm::region_rho;
use crate::{CMat, Error, Result, C64, RANK_TOL};

/// Orthonormal basis of the length-`l` matrix-product subspace, the span
/// of Ψ(X) over D×D matrices X. Full dimension D² once the products span
/// the matrix algebra; shorter regions give a smaller space.
pub struct GroundSpaceBasis {
    pub l: usize,
    pub basis: Vec<Vec<C64>>,
}

impl GroundSpaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn ground_space(mps: &Mps, l: usize) -> Result<GroundSpaceBasis> {
    let dl = mps
        .d
        .checked_pow(l as u32)
        .filter(|&r| r <= SPAN_CAP)
        .ok_or_else(|| Error::CapExceeded(format!("d^l = {}^{l} exceeds {SPAN_CAP}", mps.d)))?;
    let basis = mps.ground_space_basis(l)?;
    debug_assert!(basis.iter().all(|b| b.len() == dl));
    Ok(GroundSpaceBasis { l, basis })
}

/// Smallest region length whose products span the full matrix algebra and
/// whose physical space strictly exceeds D², so the complement projector
/// is nonzero. For d² = D² tensors this is one past the spanning length.
pub fn parent_span(mps: &Mps) -> Result<usize> {
    let dd = mps.bond * mps.bond;
    for s in 1..=8 {
        let Some(ds) = mps.d.checked_pow(s as u32).filter(|&r| r <= SPAN_CAP) else {
            break;
        };
        if ds > dd && mps.spans_at(s)? {
            return Ok(s);
        }
    }
    Err(Error::NotGeneric(
        "no spanning length with a nontrivial complement up to 8".into(),
    ))
}

/// Projector onto the orthogonal complement of the matrix-product subspace
/// on `l` sites. Annihilates every Ψ(X); its rank is d^l minus the subspace
/// dimension.
pub fn interaction_term(mps: &Mps, l: usize) -> Result<CMat> {
    let space = ground_space(mps, l)?;
    let dl = mps.d.pow(l as u32);
    let mut h = CMat::identity(dl);
    for b in &space.basis {
        h = h.sub(&CMat::outer(b, b));
    }
    let defect = h.mul(&h).max_abs_diff(&h).max(h.hermiticity_defect());
    assert!(
        defect <= 1e-10,
        "interaction term must be an orthogonal projector"
    );
    Ok(h)
}

/// Ring Hamiltonian Σ_i τ^i(h) on `n` sites with periodic wraparound,
/// kept as a window list so large rings stay matrix-free.
pub struct RingHamiltonian {
    pub n: usize,
    pub span: usize,
    pub d: usize,
    pub term: Arc<CMat>,
}

impl RingHamiltonian {
    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn windows(&self) -> Vec<WindowMat> {
        pbc_bond_windows(self.n, self.span, &self.term)
    }

    pub fn op(&self) -> LatticeOp {
        LatticeOp {
            n_sites: self.n,
            d: self.d,
            expr: OpExpr::Windows(self.windows()),
        }
    }

    pub fn to_dense(&self) -> CMat {
        self.op().to_dense()
    }
}

/// Places all `n` cyclic translates of the local term and verifies
/// frustration-freeness against the expanded matrix-product state.
pub fn assemble_ring(mps: &Mps, term: &CMat, n: usize) -> Result<RingHamiltonian> {
    let d = mps.d;
    let mut span = 0usize;
    let mut rows = 1usize;
    while rows < term.rows {
        rows *= d;
        span += 1;
    }
    if rows != term.rows || !term.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "term of dimension {} is not a {d}-ary window",
            term.rows
        )));
    }
    if span == 0 || span > n {
        return Err(Error::InvalidInput(format!(
            "span {span} does not fit a ring of {n} sites"
        )));
    }
    let dim = d
        .checked_pow(n as u32)
        .filter(|&r| r <= EXPAND_CAP)
        .ok_or_else(|| Error::CapExceeded(format!("d^n = {d}^{n} exceeds {EXPAND_CAP}")))?;

    let ring = RingHamiltonian {
        n,
        span,
        d,
        term: Arc::new(term.clone()),
    };

    // every translate, wraps included, must annihilate the ring state
    let x = CMat::identity(mps.bond);
    let mut psi = mps.expand_state(n, &x)?;
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 1e-14 {
        for z in psi.iter_mut() {
            *z /= norm;
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        ring.op().apply_into(&psi, &mut out);
        let residual = out.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(
            residual <= 1e-8,
            "assembled ring must annihilate the matrix-product state, residual {residual:.3e}"
        );
    }
    Ok(ring)
}

/// Open-chain restriction on `m` sites: the translates fully supported in
/// the region, its spectral gap above the kernel, and the kernel projector.
pub struct LocalGap {
    pub m: usize,
    pub gamma: f64,
    pub kernel_dim: usize,
    pub kernel_projector: CMat,
}

pub fn local_gap(mps: &Mps, term: &CMat, m: usize) -> Result<LocalGap> {
    let d = mps.d;
    let dm = d
        .checked_pow(m as u32)
        .filter(|&r| r <= SPAN_CAP)
        .ok_or_else(|| Error::CapExceeded(format!("d^m = {d}^{m} exceeds {SPAN_CAP}")))?;
    let mut span = 0usize;
    let mut rows = 1usize;
    while rows < term.rows {
        rows *= d;
        span += 1;
    }
    if span > m {
        return Err(Error::InvalidInput(format!(
            "span {span} exceeds region of {m} sites"
        )));
    }
    let arc = Arc::new(term.clone());
    let op = LatticeOp {
        n_sites: m,
        d,
        expr: OpExpr::Windows(obc_bond_windows(m, span, &arc)),
    };
    let h = op.to_dense();
    let eig = herm_eigen(&h)?;
    let top = eig.vals.last().copied().unwrap_or(0.0).max(1.0);
    let cut = RANK_TOL * top;
    let kernel_dim = eig.vals.iter().take_while(|&&v| v <= cut).count();
    if kernel_dim == dm {
        return Err(Error::InvalidInput(
            "open-chain restriction vanishes".into(),
        ));
    }
    let gamma = eig.vals[kernel_dim];
    let mut kernel_projector = CMat::zeros(dm, dm);
    for k in 0..kernel_dim {
        let v: Vec<C64> = (0..dm).map(|i| eig.vecs[(i, k)]).collect();
        kernel_projector = kernel_projector.add(&CMat::outer(&v, &v));
    }
    Ok(LocalGap {
        m,
        gamma,
        kernel_dim,
        kernel_projector,
    })
}

pub fn local_gap_sweep(mps: &Mps, term: &CMat, ms: &[usize]) -> Result<Vec<(usize, f64)>> {
    ms.iter()
        .map(|&m| local_gap(mps, term, m).map(|lg| (m, lg.gamma)))
        .collect()
}

/// Distance between the image projector of the region state and the kernel
/// projector of the region Hamiltonian. The two subspaces coincide for
/// generic tensors.
pub struct KernelMatch {
    pub distance: f64,
    pub matches: bool,
}

pub fn kernel_vs_rho(mps: &Mps, term: &CMat, region: usize) -> Result<KernelMatch> {
    let rho = region_rho(mps, region)?;
    let trace = rho.trace().re;
    if trace <= 0.0 {
        return Err(Error::InvalidInput("region state has no weight".into()));
    }
    let normalized = rho.scale_re(1.0 / trace);
    let pair = crate::renorm::projector_pair(&normalized)?;
    let local = local_gap(mps, term, region)?;
    let distance = op_norm(&pair.projector.sub(&local.kernel_projector))?;
    Ok(KernelMatch {
        distance,
        matches: distance <= 1e-8,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Dense,
    Sparse,
}

/// Threshold dimension up to which `Method::Auto` diagonalizes densely.
pub const DENSE_LIMIT: usize = 4096;

/// Eigenvalues within this absolute window of the minimum count as ground
/// states.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub ground_energy: f64,
    pub degeneracy: usize,
    pub gap: f64,
    pub method: &'static str,
    pub wall_time: f64,
}

fn window_report(vals: &[f64], method: &'static str, wall_time: f64) -> GapReport {
    let ground = vals[0];
    let degeneracy = vals
        .iter()
        .take_while(|&&v| v - ground <= DEGENERACY_TOL)
        .count();
    let gap = if degeneracy < vals.len() {
        vals[degeneracy] - ground
    } else {
        0.0
    };
    GapReport {
        ground_energy: ground,
        degeneracy,
        gap,
        method,
        wall_time,
    }
}

/// Ground energy, ground degeneracy, and spectral gap of an assembled ring.
/// Dense mode takes the full spectrum; sparse mode asks the iterative
/// solver for the four lowest eigenvalues.
pub fn global_gap(ring: &RingHamiltonian, method: Method) -> Result<GapReport> {
    let dim = ring.dim();
    let use_dense = match method {
        Method::Dense => true,
        Method::Sparse => false,
        Method::Auto => dim <= DENSE_LIMIT,
    };
    let start = Instant::now();
    if use_dense {
        if dim > DENSE_LIMIT {
            return Err(Error::CapExceeded(format!(
                "dense spectrum at dimension {dim}"
            )));
        }
        let eig = herm_eigen(&ring.to_dense())?;
        Ok(window_report(
            &eig.vals,
            "dense",
            start.elapsed().as_secs_f64(),
        ))
    } else {
        let op = ring.op();
        let k = 4.min(dim);
        let pairs = lanczos_smallest(&op, k, 1e-10, 2 * ring.n as u64 + 1)?;
        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        Ok(window_report(
            &vals,
            "sparse",
            start.elapsed().as_secs_f64(),
        ))
    }
}
