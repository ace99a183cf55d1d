//! Translation-invariant matrix product states on a ring.
//!
//! A state is a list of D × D matrices {A_i}, one per physical level. The
//! physical convention everywhere: site 1 is the most significant digit of
//! the composite basis index, and Ψ(X) = Σ Tr[X A_{i1} ⋯ A_{iN}] |i1 … iN⟩
//! inserts the boundary operator X before the first site.
//!
//! The canonical form produced here is the unital one: Σ A_i A_i† = 𝟙 with
//! the adjoint fixed point Ξ diagonal, positive and trace-normalized, its
//! entries sorted descending. States whose transfer operator has a
//! degenerate peripheral spectrum (or a rank-deficient fixed point) are
//! rejected as non-generic.

use crate::channels::Channel;
use crate::numerics::{
    herm_eigen, orthonormal_span, rank_from_singulars, singular_values, CMat, Error, Result, C64,
    RANK_TOL,
};
use serde::{Deserialize, Serialize};

/// Product dimension caps: spanning checks and state expansion refuse
/// instances that would exceed desk scale.
pub const SPAN_CAP: usize = 4096;
pub const EXPAND_CAP: usize = 1 << 20;
pub const L0_SEARCH_CAP: usize = 8;

#[derive(Clone)]
pub struct Mps {
    pub d: usize,
    pub bond: usize,
    pub tensors: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct MpsJson {
    d: usize,
    #[serde(rename = "D")]
    bond: usize,
    /// One matrix per physical level, row-major, entries as [re, im].
    matrices: Vec<Vec<[f64; 2]>>,
}

impl Mps {
    pub fn new(tensors: Vec<CMat>) -> Result<Self> {
        let d = tensors.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty tensor list".into()));
        }
        let bond = tensors[0].rows;
        for t in &tensors {
            if t.rows != bond || t.cols != bond {
                return Err(Error::DimensionMismatch(
                    "tensors must be square, equal size".into(),
                ));
            }
            if !t.is_finite() {
                return Err(Error::NonFinite("MPS tensor".into()));
            }
        }
        Ok(Mps { d, bond, tensors })
    }

    /// Spin-1 AKLT state: {σᶻ, √2 σ⁺, −√2 σ⁻} / √3. Already canonical,
    /// with Ξ = 𝟙/2 and transfer spectrum {1, −1/3, −1/3, −1/3}.
    pub fn aklt() -> Self {
        let s = 1.0 / 3.0f64.sqrt();
        let r2 = 2.0f64.sqrt();
        let mut az = CMat::zeros(2, 2);
        az[(0, 0)] = C64::new(s, 0.0);
        az[(1, 1)] = C64::new(-s, 0.0);
        let mut ap = CMat::zeros(2, 2);
        ap[(0, 1)] = C64::new(r2 * s, 0.0);
        let mut am = CMat::zeros(2, 2);
        am[(1, 0)] = C64::new(-r2 * s, 0.0);
        Mps {
            d: 3,
            bond: 2,
            tensors: vec![az, ap, am],
        }
    }

    /// Tensors with independent standard complex Gaussian entries. Such a
    /// state is generic with probability one; the canonical-form pass
    /// normalizes it.
    pub fn random(d: usize, bond: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tensors = (0..d)
            .map(|_| {
                CMat::from_fn(bond, bond, |_, _| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
            })
            .collect();
        Mps { d, bond, tensors }
    }

    /// The CP map X ↦ Σ A_i X A_i† with the tensors as Kraus operators.
    pub fn channel(&self) -> Channel {
        Channel::new(self.tensors.clone()).expect("tensors validated at construction")
    }

    pub fn to_json(&self) -> String {
        let matrices = self
            .tensors
            .iter()
            .map(|t| t.data().iter().map(|z| [z.re, z.im]).collect())
            .collect();
        let j = MpsJson {
            d: self.d,
            bond: self.bond,
            matrices,
        };
        serde_json::to_string_pretty(&j).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: MpsJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("MPS JSON: {e}")))?;
        if j.matrices.len() != j.d {
            return Err(Error::InvalidInput(format!(
                "expected {} matrices, found {}",
                j.d,
                j.matrices.len()
            )));
        }
        let tensors = j
            .matrices
            .iter()
            .map(|flat| {
                if flat.len() != j.bond * j.bond {
                    return Err(Error::InvalidInput(format!(
                        "matrix has {} entries, D²={}",
                        flat.len(),
                        j.bond * j.bond
                    )));
                }
                Ok(CMat::from_fn(j.bond, j.bond, |r, c| {
                    let [re, im] = flat[r * j.bond + c];
                    C64::new(re, im)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Mps::new(tensors)
    }

    /// All length-l ordered products A_{i1}⋯A_{il}, index i1 most
    /// significant, vectorized row-major into the rows of a d^l × D²
    /// matrix.
    pub fn product_matrix(&self, l: usize) -> Result<CMat> {
        let rows = self
            .d
            .checked_pow(l as u32)
            .filter(|&r| r <= SPAN_CAP)
            .ok_or_else(|| {
                Error::CapExceeded(format!("d^l = {}^{l} exceeds {SPAN_CAP}", self.d))
            })?;
        let dd = self.bond * self.bond;
        let mut m = CMat::zeros(rows, dd);
        let mut stack: Vec<CMat> = vec![CMat::identity(self.bond)];
        let mut digits = vec![0usize; l];
        let mut row = 0usize;
        loop {
            while stack.len() <= l {
                let next = stack
                    .last()
                    .unwrap()
                    .mul(&self.tensors[digits[stack.len() - 1]]);
                stack.push(next);
            }
            let prod = stack.last().unwrap();
            for (k, z) in prod.vec_rm().iter().enumerate() {
                m[(row, k)] = *z;
            }
            row += 1;
            // advance the digit odometer, popping finished levels
            let mut lev = l;
            loop {
                if lev == 0 {
                    debug_assert_eq!(row, rows);
                    return Ok(m);
                }
                stack.pop();
                digits[lev - 1] += 1;
                if digits[lev - 1] < self.d {
                    break;
                }
                digits[lev - 1] = 0;
                lev -= 1;
            }
        }
    }

    /// Do the length-l products span the full D × D matrix algebra?
    pub fn spans_at(&self, l: usize) -> Result<bool> {
        let m = self.product_matrix(l)?;
        let s = singular_values(&m)?;
        Ok(rank_from_singulars(&s, RANK_TOL) == self.bond * self.bond)
    }

    /// Smallest l ≤ cap at which the products span. The spanning property
    /// is monotone in l for states with an invertible transfer fixed point,
    /// so the first hit is the answer.
    pub fn minimal_l0(&self, cap: usize) -> Result<usize> {
        for l in 1..=cap {
            if self.d.pow(l as u32) > SPAN_CAP {
                break;
            }
            if self.spans_at(l)? {
                return Ok(l);
            }
        }
        Err(Error::NotGeneric(format!(
            "products do not span the matrix algebra for any l ≤ {cap}"
        )))
    }

    /// Ψ(X) on n sites as a dense state vector of length d^n.
    pub fn expand_state(&self, n: usize, x: &CMat) -> Result<Vec<C64>> {
        if x.rows != self.bond || x.cols != self.bond {
            return Err(Error::DimensionMismatch(
                "boundary operator must be D×D".into(),
            ));
        }
        let dim = self
            .d
            .checked_pow(n as u32)
            .filter(|&r| r <= EXPAND_CAP)
            .ok_or_else(|| {
                Error::CapExceeded(format!("d^n = {}^{n} exceeds {EXPAND_CAP}", self.d))
            })?;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        let mut stack: Vec<CMat> = vec![x.clone()];
        let mut digits = vec![0usize; n];
        let mut idx = 0usize;
        loop {
            while stack.len() <= n {
                let next = stack
                    .last()
                    .unwrap()
                    .mul(&self.tensors[digits[stack.len() - 1]]);
                stack.push(next);
            }
            out[idx] = stack.last().unwrap().trace();
            idx += 1;
            let mut lev = n;
            loop {
                if lev == 0 {
                    debug_assert_eq!(idx, dim);
                    return Ok(out);
                }
                stack.pop();
                digits[lev - 1] += 1;
                if digits[lev - 1] < self.d {
                    break;
                }
                digits[lev - 1] = 0;
                lev -= 1;
            }
        }
    }

    /// Orthonormal basis of span{Ψ(X) : X ∈ M_D} on n sites. Has D²
    /// elements once n reaches the spanning length.
    pub fn ground_space_basis(&self, n: usize) -> Result<Vec<Vec<C64>>> {
        let mut vectors = Vec::with_capacity(self.bond * self.bond);
        for p in 0..self.bond {
            for q in 0..self.bond {
                let mut e = CMat::zeros(self.bond, self.bond);
                e[(p, q)] = C64::new(1.0, 0.0);
                vectors.push(self.expand_state(n, &e)?);
            }
        }
        orthonormal_span(&vectors, RANK_TOL)
    }
}

/// Outcome of the canonical-form pass.
pub struct CanonicalForm {
    pub mps: Mps,
    /// Diagonal of the adjoint fixed point, descending, summing to 1.
    pub xi: Vec<f64>,
    /// Dominant transfer eigenvalue of the input; the output tensors are
    /// the input's divided by √scale and conjugated.
    pub scale: f64,
}

/// Brings a generic MPS to unital canonical form: Σ A_i A_i† = 𝟙 and
/// T*(Ξ) = Ξ with Ξ = diag(ξ), ξ descending positive.
pub fn canonical_form(mps: &Mps) -> Result<CanonicalForm> {
    let dim = mps.bond;
    let spectrum = mps.channel().transfer_spectrum()?;
    let lam1 = spectrum[0];
    if spectrum.len() > 1 {
        let gap = 1.0 - spectrum[1].norm() / lam1.norm();
        if gap < 1e-10 {
            return Err(Error::NotGeneric(format!(
                "peripheral transfer spectrum is degenerate: |λ₂/λ₁| = {:.12}",
                spectrum[1].norm() / lam1.norm()
            )));
        }
    }
    if lam1.re <= 0.0 || lam1.im.abs() > 1e-9 * lam1.norm() {
        return Err(Error::NotGeneric(format!(
            "dominant transfer eigenvalue {lam1} is not real positive"
        )));
    }
    let scale = lam1.re;

    // fixed point of T; power iteration self-normalizes, so the missing
    // 1/scale is immaterial here
    let m = mps.channel().fixed_point(1e-13, 10_000)?;
    let eig_m = herm_eigen(&m)?;
    let top = eig_m.vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if eig_m.vals.iter().any(|&v| v < RANK_TOL * top) {
        return Err(Error::NotGeneric(
            "transfer fixed point is not full rank".into(),
        ));
    }
    let mut m_sqrt = CMat::zeros(dim, dim);
    let mut m_isqrt = CMat::zeros(dim, dim);
    for (k, &lam) in eig_m.vals.iter().enumerate() {
        let v = eig_m.vecs.col(k);
        let (s, si) = (lam.sqrt(), 1.0 / lam.sqrt());
        for i in 0..dim {
            for j in 0..dim {
                let proj = v[i] * v[j].conj();
                m_sqrt[(i, j)] += proj * C64::new(s, 0.0);
                m_isqrt[(i, j)] += proj * C64::new(si, 0.0);
            }
        }
    }
    let root_scale = scale.sqrt();
    let unital: Vec<CMat> = mps
        .tensors
        .iter()
        .map(|a| m_isqrt.mul(a).mul(&m_sqrt).scale_re(1.0 / root_scale))
        .collect();

    // adjoint fixed point, then rotate it diagonal
    let b = Channel::new(unital.clone())?;
    let xi_raw = {
        let mut x = CMat::identity(dim).scale_re(1.0 / dim as f64);
        let mut ok = false;
        for _ in 0..10_000 {
            let next = b.apply_adjoint(&x).hermitize();
            let tr = next.trace().re;
            let next = next.scale_re(1.0 / tr);
            let delta = next.max_abs_diff(&x);
            x = next;
            if delta <= 1e-13 {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::NoConvergence("adjoint fixed point".into()));
        }
        x
    };
    let eig_xi = herm_eigen(&xi_raw)?;
    // descending ξ with deterministic column phases
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &bb| eig_xi.vals[bb].partial_cmp(&eig_xi.vals[a]).unwrap());
    let mut q = CMat::zeros(dim, dim);
    let mut xi = Vec::with_capacity(dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut col = eig_xi.vecs.col(old_col);
        let (best, _) = col.iter().enumerate().fold((0usize, -1.0), |acc, (i, z)| {
            if z.norm() > acc.1 {
                (i, z.norm())
            } else {
                acc
            }
        });
        if col[best].norm() > 0.0 {
            let ph = col[best].conj() / col[best].norm();
            for z in col.iter_mut() {
                *z *= ph;
            }
        }
        for i in 0..dim {
            q[(i, new_col)] = col[i];
        }
        xi.push(eig_xi.vals[old_col]);
    }
    let top_xi = xi[0];
    if xi.iter().any(|&v| v < RANK_TOL * top_xi) {
        return Err(Error::NotGeneric(
            "adjoint fixed point is not full rank".into(),
        ));
    }
    let tensors: Vec<CMat> = unital.iter().map(|a| q.dagger().mul(a).mul(&q)).collect();
    Ok(CanonicalForm {
        mps: Mps {
            d: mps.d,
            bond: dim,
            tensors,
        },
        xi,
        scale,
    })
}
