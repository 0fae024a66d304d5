//! Truncated multi-mode Fock space: states, ladder operators, reduced
//! density matrices and occupation statistics.
//!
//! Basis ordering is occupation-number lexicographic with mode 1 the
//! slowest-varying index: for occupations `(m_1, ..., m_N)` with per-mode
//! cutoff `K` (dimension `K+1` per mode),
//!
//! ```text
//! index = ((m_1 * (K+1) + m_2) * (K+1) + m_3) * ... + m_N
//! ```
//!
//! This ordering is fixed so that kernel-basis vectors produced by the
//! constraint solver are directly comparable with closed-form states.
//!
//! Raising operators follow the rectangular convention: `a^dag` maps the
//! cutoff-`K` space into the cutoff-`K+1` space so that no amplitude is
//! silently destroyed. Lowering maps cutoff `K` to cutoff `K` exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm tolerance for the "normalized" predicate: double-precision
/// accumulation over <= 1e5 tensor entries.
pub const NORM_TOL: f64 = 1e-12;

pub(crate) type C64 = Complex64;

/// Dimension of the truncated space: `(cutoff+1)^num_modes`.
pub fn basis_dim(num_modes: usize, cutoff: usize) -> usize {
    (cutoff + 1).pow(num_modes as u32)
}

/// Encode occupations into a lexicographic index (mode 1 slowest).
pub fn encode_index(occupations: &[usize], cutoff: usize) -> usize {
    let side = cutoff + 1;
    occupations.iter().fold(0, |acc, &m| acc * side + m)
}

/// Decode a lexicographic index into occupations.
pub fn decode_index(mut index: usize, num_modes: usize, cutoff: usize) -> Vec<usize> {
    let side = cutoff + 1;
    let mut occ = vec![0usize; num_modes];
    for slot in occ.iter_mut().rev() {
        *slot = index % side;
        index /= side;
    }
    occ
}

/// Visit every basis index in lexicographic order, passing `(index, occupations)`.
pub(crate) fn for_each_basis_state(
    num_modes: usize,
    cutoff: usize,
    mut visit: impl FnMut(usize, &[usize]),
) {
    let side = cutoff + 1;
    let dim = basis_dim(num_modes, cutoff);
    let mut occ = vec![0usize; num_modes];
    for index in 0..dim {
        visit(index, &occ);
        // increment mixed-radix counter, mode N fastest
        for j in (0..num_modes).rev() {
            occ[j] += 1;
            if occ[j] < side {
                break;
            }
            occ[j] = 0;
        }
    }
}

/// A pure state of `num_modes` bosonic modes with per-mode occupation
/// cutoff `cutoff` (inclusive), stored as a dense complex amplitude tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    num_modes: usize,
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl FockState {
    /// The product vacuum `|0,...,0>`.
    pub fn vacuum(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidDimension("num_modes must be >= 1"));
        }
        if cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be >= 1"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis_dim(num_modes, cutoff)];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self { num_modes, cutoff, amplitudes })
    }

    /// Build a state from a full amplitude tensor in lexicographic order.
    pub fn from_amplitudes(num_modes: usize, cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if num_modes == 0 || cutoff == 0 {
            return Err(Error::InvalidDimension("num_modes and cutoff must be >= 1"));
        }
        let dim = basis_dim(num_modes, cutoff);
        if amplitudes.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim} amplitudes for {num_modes} modes at cutoff {cutoff}, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self { num_modes, cutoff, amplitudes })
    }

    /// A single basis state `|m_1,...,m_N>`.
    pub fn basis_state(num_modes: usize, cutoff: usize, occupations: &[usize]) -> Result<Self> {
        if occupations.len() != num_modes {
            return Err(Error::ShapeMismatch(format!(
                "{} occupations given for {num_modes} modes",
                occupations.len()
            )));
        }
        if let Some(&m) = occupations.iter().find(|&&m| m > cutoff) {
            return Err(Error::InvalidParameter(format!(
                "occupation {m} exceeds cutoff {cutoff}"
            )));
        }
        let mut state = Self::vacuum(num_modes, cutoff)?;
        state.amplitudes[0] = C64::new(0.0, 0.0);
        let idx = encode_index(occupations, cutoff);
        state.amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<C64> {
        if occupations.len() != self.num_modes {
            return Err(Error::ShapeMismatch(format!(
                "{} occupations for {}-mode state",
                occupations.len(),
                self.num_modes
            )));
        }
        if let Some(&m) = occupations.iter().find(|&&m| m > self.cutoff) {
            return Err(Error::InvalidParameter(format!(
                "occupation {m} exceeds cutoff {}",
                self.cutoff
            )));
        }
        Ok(self.amplitudes[encode_index(occupations, self.cutoff)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `| ||psi|| - 1 | <= 1e-12`.
    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    /// Rescale to unit norm; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidParameter("cannot normalize the zero state".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            num_modes: self.num_modes,
            cutoff: self.cutoff,
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { num_modes: self.num_modes, cutoff: self.cutoff, amplitudes })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { num_modes: self.num_modes, cutoff: self.cutoff, amplitudes })
    }

    /// Re-express the state in a larger cutoff, padding with zeros.
    pub fn embed(&self, new_cutoff: usize) -> Result<Self> {
        if new_cutoff < self.cutoff {
            return Err(Error::InvalidParameter(format!(
                "embed target cutoff {new_cutoff} below current {}",
                self.cutoff
            )));
        }
        if new_cutoff == self.cutoff {
            return Ok(self.clone());
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis_dim(self.num_modes, new_cutoff)];
        for_each_basis_state(self.num_modes, self.cutoff, |idx, occ| {
            amplitudes[encode_index(occ, new_cutoff)] = self.amplitudes[idx];
        });
        Ok(Self { num_modes: self.num_modes, cutoff: new_cutoff, amplitudes })
    }

    /// Tensor product; `self` supplies the slower-varying (leading) modes.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::ShapeMismatch(format!(
                "tensor factors have cutoffs {} and {}",
                self.cutoff, other.cutoff
            )));
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            num_modes: self.num_modes + other.num_modes,
            cutoff: self.cutoff,
            amplitudes,
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.num_modes != other.num_modes || self.cutoff != other.cutoff {
            return Err(Error::ShapeMismatch(format!(
                "({} modes, cutoff {}) vs ({} modes, cutoff {})",
                self.num_modes, self.cutoff, other.num_modes, other.cutoff
            )));
        }
        Ok(())
    }

    /// Mean occupation `<psi| n_j |psi>` of a 1-based mode index.
    ///
    /// Requires a normalized state.
    pub fn mean_occupation(&self, mode_index: usize) -> Result<f64> {
        if mode_index == 0 || mode_index > self.num_modes {
            return Err(Error::ModeIndexOutOfRange {
                mode_index,
                num_modes: self.num_modes,
            });
        }
        if !self.is_normalized() {
            return Err(Error::Unnormalized { norm: self.norm() });
        }
        let mut total = 0.0;
        for_each_basis_state(self.num_modes, self.cutoff, |idx, occ| {
            total += occ[mode_index - 1] as f64 * self.amplitudes[idx].norm_sqr();
        });
        Ok(total)
    }

    /// Partial trace over the modes not listed in `keep_modes` (1-based).
    ///
    /// The kept modes retain their relative order. Requires a normalized
    /// state and a nonempty proper subset of modes.
    pub fn reduced_density(&self, keep_modes: &[usize]) -> Result<DensityMatrix> {
        if keep_modes.is_empty() {
            return Err(Error::InvalidKeepSet("keep set is empty"));
        }
        let mut keep: Vec<usize> = keep_modes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.len() != keep_modes.len() {
            return Err(Error::InvalidKeepSet("keep set contains duplicates"));
        }
        if keep.len() >= self.num_modes {
            return Err(Error::InvalidKeepSet("keep set must be a proper subset"));
        }
        if keep[0] == 0 || keep[keep.len() - 1] > self.num_modes {
            return Err(Error::ModeIndexOutOfRange {
                mode_index: *keep.last().unwrap(),
                num_modes: self.num_modes,
            });
        }
        if !self.is_normalized() {
            return Err(Error::Unnormalized { norm: self.norm() });
        }

        let traced: Vec<usize> = (1..=self.num_modes).filter(|m| !keep.contains(m)).collect();
        let d_keep = basis_dim(keep.len(), self.cutoff);
        let d_tr = basis_dim(traced.len(), self.cutoff);

        // Reshape the tensor into a (keep x traced) matrix, then rho = M M^dag.
        let mut reshaped = DMatrix::<C64>::zeros(d_keep, d_tr);
        let mut keep_occ = vec![0usize; keep.len()];
        let mut tr_occ = vec![0usize; traced.len()];
        for_each_basis_state(self.num_modes, self.cutoff, |idx, occ| {
            for (slot, &m) in keep_occ.iter_mut().zip(&keep) {
                *slot = occ[m - 1];
            }
            for (slot, &m) in tr_occ.iter_mut().zip(&traced) {
                *slot = occ[m - 1];
            }
            reshaped[(
                encode_index(&keep_occ, self.cutoff),
                encode_index(&tr_occ, self.cutoff),
            )] = self.amplitudes[idx];
        });
        let matrix = &reshaped * reshaped.adjoint();
        Ok(DensityMatrix {
            num_modes: keep.len(),
            cutoff: self.cutoff,
            matrix,
        })
    }
}

/// `<lhs|rhs>`, conjugate-linear in `lhs`.
pub fn inner(lhs: &FockState, rhs: &FockState) -> Result<C64> {
    lhs.check_same_shape(rhs)?;
    Ok(lhs
        .amplitudes
        .iter()
        .zip(&rhs.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// `|<lhs|rhs>|^2` for normalized states; symmetric and phase-invariant.
pub fn fidelity(lhs: &FockState, rhs: &FockState) -> Result<f64> {
    if !lhs.is_normalized() {
        return Err(Error::Unnormalized { norm: lhs.norm() });
    }
    if !rhs.is_normalized() {
        return Err(Error::Unnormalized { norm: rhs.norm() });
    }
    Ok(inner(lhs, rhs)?.norm_sqr())
}

/// Which ladder operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    /// `a |m> = sqrt(m) |m-1>`, cutoff `K` to cutoff `K` (exact).
    Lower,
    /// `a^dag |m> = sqrt(m+1) |m+1>`, cutoff `K` to cutoff `K+1` (rectangular,
    /// no information loss).
    Raise,
}

#[derive(Debug, Clone)]
enum OpStorage {
    Sparse(SparseMat),
    Dense(DMatrix<C64>),
}

/// Compressed sparse column storage; ladder operators and squeezing
/// generators have at most a handful of entries per column.
#[derive(Debug, Clone)]
pub(crate) struct SparseMat {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMat {
    pub(crate) fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            // merge duplicates produced by operator sums
            if col_ptr[c + 1] > col_ptr[c]
                && !row_idx.is_empty()
                && *row_idx.last().unwrap() == r
                && col_ptr[c + 1] == row_idx.len()
            {
                *vals.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                vals.push(v);
                col_ptr[c + 1] += 1;
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self { nrows, ncols, col_ptr, row_idx, vals }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (c, &xc) in x.iter().enumerate() {
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.vals[k] * xc;
            }
        }
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[k], c)] += self.vals[k];
            }
        }
        m
    }

    fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.vals.len());
        for c in 0..self.ncols {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out.push((self.row_idx[k], c, self.vals[k]));
            }
        }
        out
    }
}

/// A linear operator between truncated Fock spaces of the same mode count.
///
/// The domain has per-mode cutoff `domain_cutoff` and the codomain
/// `codomain_cutoff`; rectangular raise operators make these differ.
#[derive(Debug, Clone)]
pub struct FockOperator {
    num_modes: usize,
    domain_cutoff: usize,
    codomain_cutoff: usize,
    storage: OpStorage,
}

impl FockOperator {
    /// Ladder operator on one mode (1-based `mode_index`).
    pub fn ladder(
        num_modes: usize,
        cutoff: usize,
        mode_index: usize,
        kind: LadderKind,
    ) -> Result<Self> {
        if num_modes == 0 || cutoff == 0 {
            return Err(Error::InvalidDimension("num_modes and cutoff must be >= 1"));
        }
        if mode_index == 0 || mode_index > num_modes {
            return Err(Error::ModeIndexOutOfRange { mode_index, num_modes });
        }
        let j = mode_index - 1;
        let codomain_cutoff = match kind {
            LadderKind::Lower => cutoff,
            LadderKind::Raise => cutoff + 1,
        };
        let nrows = basis_dim(num_modes, codomain_cutoff);
        let ncols = basis_dim(num_modes, cutoff);
        let mut triplets = Vec::with_capacity(ncols);
        let mut occ_out = vec![0usize; num_modes];
        for_each_basis_state(num_modes, cutoff, |col, occ| {
            occ_out.copy_from_slice(occ);
            match kind {
                LadderKind::Lower => {
                    if occ[j] > 0 {
                        occ_out[j] -= 1;
                        triplets.push((
                            encode_index(&occ_out, codomain_cutoff),
                            col,
                            C64::new((occ[j] as f64).sqrt(), 0.0),
                        ));
                    }
                }
                LadderKind::Raise => {
                    occ_out[j] += 1;
                    triplets.push((
                        encode_index(&occ_out, codomain_cutoff),
                        col,
                        C64::new(((occ[j] + 1) as f64).sqrt(), 0.0),
                    ));
                }
            }
        });
        Ok(Self {
            num_modes,
            domain_cutoff: cutoff,
            codomain_cutoff,
            storage: OpStorage::Sparse(SparseMat::from_triplets(nrows, ncols, triplets)),
        })
    }

    pub fn identity(num_modes: usize, cutoff: usize) -> Self {
        let dim = basis_dim(num_modes, cutoff);
        let triplets = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self {
            num_modes,
            domain_cutoff: cutoff,
            codomain_cutoff: cutoff,
            storage: OpStorage::Sparse(SparseMat::from_triplets(dim, dim, triplets)),
        }
    }

    pub fn from_dense(
        num_modes: usize,
        domain_cutoff: usize,
        codomain_cutoff: usize,
        matrix: DMatrix<C64>,
    ) -> Result<Self> {
        let nrows = basis_dim(num_modes, codomain_cutoff);
        let ncols = basis_dim(num_modes, domain_cutoff);
        if matrix.nrows() != nrows || matrix.ncols() != ncols {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, expected {nrows}x{ncols}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            num_modes,
            domain_cutoff,
            codomain_cutoff,
            storage: OpStorage::Dense(matrix),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn domain_cutoff(&self) -> usize {
        self.domain_cutoff
    }

    pub fn codomain_cutoff(&self) -> usize {
        self.codomain_cutoff
    }

    pub fn nrows(&self) -> usize {
        basis_dim(self.num_modes, self.codomain_cutoff)
    }

    pub fn ncols(&self) -> usize {
        basis_dim(self.num_modes, self.domain_cutoff)
    }

    pub fn is_square(&self) -> bool {
        self.domain_cutoff == self.codomain_cutoff
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            OpStorage::Sparse(s) => s.to_dense(),
            OpStorage::Dense(d) => d.clone(),
        }
    }

    pub(crate) fn apply_slice(&self, x: &[C64], y: &mut [C64]) {
        match &self.storage {
            OpStorage::Sparse(s) => s.apply(x, y),
            OpStorage::Dense(d) => {
                for (c, &xc) in x.iter().enumerate() {
                    if xc == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for r in 0..d.nrows() {
                        y[r] += d[(r, c)] * xc;
                    }
                }
            }
        }
    }

    /// Apply to a state; output lives in the codomain cutoff.
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        if state.num_modes != self.num_modes || state.cutoff != self.domain_cutoff {
            return Err(Error::ShapeMismatch(format!(
                "operator domain ({} modes, cutoff {}) vs state ({} modes, cutoff {})",
                self.num_modes, self.domain_cutoff, state.num_modes, state.cutoff
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.nrows()];
        self.apply_slice(&state.amplitudes, &mut out);
        FockState::from_amplitudes(self.num_modes, self.codomain_cutoff, out)
    }

    /// Conjugate transpose; domain and codomain cutoffs swap.
    pub fn dagger(&self) -> Self {
        let storage = match &self.storage {
            OpStorage::Sparse(s) => {
                let triplets = s
                    .triplets()
                    .into_iter()
                    .map(|(r, c, v)| (c, r, v.conj()))
                    .collect();
                OpStorage::Sparse(SparseMat::from_triplets(s.ncols, s.nrows, triplets))
            }
            OpStorage::Dense(d) => OpStorage::Dense(d.adjoint()),
        };
        Self {
            num_modes: self.num_modes,
            domain_cutoff: self.codomain_cutoff,
            codomain_cutoff: self.domain_cutoff,
            storage,
        }
    }

    /// `self . rhs` (apply `rhs` first). Sparse factors stay sparse; mixed
    /// products expand along the sparse side so large dense-by-ladder
    /// compositions never pay a full gemm.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.num_modes != rhs.num_modes || self.domain_cutoff != rhs.codomain_cutoff {
            return Err(Error::ShapeMismatch(format!(
                "compose: lhs domain cutoff {} vs rhs codomain cutoff {}",
                self.domain_cutoff, rhs.codomain_cutoff
            )));
        }
        let storage = match (&self.storage, &rhs.storage) {
            (OpStorage::Sparse(b), OpStorage::Sparse(a)) => {
                let mut triplets = Vec::new();
                let mut scratch: Vec<(usize, C64)> = Vec::new();
                for c in 0..a.ncols {
                    scratch.clear();
                    for k in a.col_ptr[c]..a.col_ptr[c + 1] {
                        let mid = a.row_idx[k];
                        let va = a.vals[k];
                        for l in b.col_ptr[mid]..b.col_ptr[mid + 1] {
                            scratch.push((b.row_idx[l], b.vals[l] * va));
                        }
                    }
                    scratch.sort_unstable_by_key(|&(r, _)| r);
                    let mut it = scratch.iter().peekable();
                    while let Some(&(r, v)) = it.next() {
                        let mut acc = v;
                        while let Some(&&(r2, v2)) = it.peek() {
                            if r2 == r {
                                acc += v2;
                                it.next();
                            } else {
                                break;
                            }
                        }
                        triplets.push((r, c, acc));
                    }
                }
                OpStorage::Sparse(SparseMat::from_triplets(b.nrows, a.ncols, triplets))
            }
            (OpStorage::Dense(b), OpStorage::Sparse(a)) => {
                let mut out = DMatrix::<C64>::zeros(b.nrows(), a.ncols);
                for c in 0..a.ncols {
                    for k in a.col_ptr[c]..a.col_ptr[c + 1] {
                        let mid = a.row_idx[k];
                        let va = a.vals[k];
                        for r in 0..b.nrows() {
                            out[(r, c)] += b[(r, mid)] * va;
                        }
                    }
                }
                OpStorage::Dense(out)
            }
            (OpStorage::Sparse(b), OpStorage::Dense(a)) => {
                let mut out = DMatrix::<C64>::zeros(b.nrows, a.ncols());
                for mid in 0..b.ncols {
                    for k in b.col_ptr[mid]..b.col_ptr[mid + 1] {
                        let r = b.row_idx[k];
                        let vb = b.vals[k];
                        for c in 0..a.ncols() {
                            out[(r, c)] += vb * a[(mid, c)];
                        }
                    }
                }
                OpStorage::Dense(out)
            }
            (OpStorage::Dense(b), OpStorage::Dense(a)) => {
                OpStorage::Dense(crate::linalg::complex_gemm(b, a))
            }
        };
        Ok(Self {
            num_modes: self.num_modes,
            domain_cutoff: rhs.domain_cutoff,
            codomain_cutoff: self.codomain_cutoff,
            storage,
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let storage = match &self.storage {
            OpStorage::Sparse(s) => {
                let mut s = s.clone();
                for v in &mut s.vals {
                    *v *= factor;
                }
                OpStorage::Sparse(s)
            }
            OpStorage::Dense(d) => OpStorage::Dense(d * factor),
        };
        Self { storage, ..*self }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_op_shape(other)?;
        let storage = match (&self.storage, &other.storage) {
            (OpStorage::Sparse(a), OpStorage::Sparse(b)) => {
                let mut triplets = a.triplets();
                triplets.extend(b.triplets());
                OpStorage::Sparse(SparseMat::from_triplets(a.nrows, a.ncols, triplets))
            }
            _ => OpStorage::Dense(self.to_dense() + other.to_dense()),
        };
        Ok(Self { storage, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    fn check_same_op_shape(&self, other: &Self) -> Result<()> {
        if self.num_modes != other.num_modes
            || self.domain_cutoff != other.domain_cutoff
            || self.codomain_cutoff != other.codomain_cutoff
        {
            return Err(Error::ShapeMismatch(format!(
                "operator shapes differ: ({},{}->{}) vs ({},{}->{})",
                self.num_modes,
                self.domain_cutoff,
                self.codomain_cutoff,
                other.num_modes,
                other.domain_cutoff,
                other.codomain_cutoff
            )));
        }
        Ok(())
    }

    /// Drop codomain rows above `new_cutoff` (square truncation of raises).
    pub fn restrict_codomain(&self, new_cutoff: usize) -> Result<Self> {
        if new_cutoff > self.codomain_cutoff {
            return Err(Error::InvalidParameter(format!(
                "restrict target cutoff {new_cutoff} above current {}",
                self.codomain_cutoff
            )));
        }
        let nrows = basis_dim(self.num_modes, new_cutoff);
        let triplets: Vec<_> = match &self.storage {
            OpStorage::Sparse(s) => s
                .triplets()
                .into_iter()
                .filter_map(|(r, c, v)| {
                    let occ = decode_index(r, self.num_modes, self.codomain_cutoff);
                    if occ.iter().all(|&m| m <= new_cutoff) {
                        Some((encode_index(&occ, new_cutoff), c, v))
                    } else {
                        None
                    }
                })
                .collect(),
            OpStorage::Dense(_) => {
                let d = self.to_dense();
                let mut t = Vec::new();
                for_each_basis_state(self.num_modes, self.codomain_cutoff, |r, occ| {
                    if occ.iter().all(|&m| m <= new_cutoff) {
                        let rr = encode_index(occ, new_cutoff);
                        for c in 0..d.ncols() {
                            let v = d[(r, c)];
                            if v != C64::new(0.0, 0.0) {
                                t.push((rr, c, v));
                            }
                        }
                    }
                });
                t
            }
        };
        Ok(Self {
            num_modes: self.num_modes,
            domain_cutoff: self.domain_cutoff,
            codomain_cutoff: new_cutoff,
            storage: OpStorage::Sparse(SparseMat::from_triplets(nrows, self.ncols(), triplets)),
        })
    }

    /// Re-index codomain rows into a larger cutoff.
    pub fn embed_codomain(&self, new_cutoff: usize) -> Result<Self> {
        if new_cutoff < self.codomain_cutoff {
            return Err(Error::InvalidParameter(format!(
                "embed target cutoff {new_cutoff} below current {}",
                self.codomain_cutoff
            )));
        }
        let nrows = basis_dim(self.num_modes, new_cutoff);
        let triplets: Vec<_> = match &self.storage {
            OpStorage::Sparse(s) => s
                .triplets()
                .into_iter()
                .map(|(r, c, v)| {
                    let occ = decode_index(r, self.num_modes, self.codomain_cutoff);
                    (encode_index(&occ, new_cutoff), c, v)
                })
                .collect(),
            OpStorage::Dense(_) => {
                let d = self.to_dense();
                let mut t = Vec::new();
                for_each_basis_state(self.num_modes, self.codomain_cutoff, |r, occ| {
                    let rr = encode_index(occ, new_cutoff);
                    for c in 0..d.ncols() {
                        let v = d[(r, c)];
                        if v != C64::new(0.0, 0.0) {
                            t.push((rr, c, v));
                        }
                    }
                });
                t
            }
        };
        Ok(Self {
            num_modes: self.num_modes,
            domain_cutoff: self.domain_cutoff,
            codomain_cutoff: new_cutoff,
            storage: OpStorage::Sparse(SparseMat::from_triplets(nrows, self.ncols(), triplets)),
        })
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, OpStorage::Sparse(_))
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        match &self.storage {
            OpStorage::Sparse(s) => s.vals.iter().map(|v| v.norm()).fold(0.0, f64::max),
            OpStorage::Dense(d) => d.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Induced 1-norm (max absolute column sum), the scaling control for
    /// matrix exponentials.
    pub fn one_norm(&self) -> f64 {
        match &self.storage {
            OpStorage::Sparse(s) => {
                let mut best = 0.0f64;
                for c in 0..s.ncols {
                    let sum: f64 = (s.col_ptr[c]..s.col_ptr[c + 1])
                        .map(|k| s.vals[k].norm())
                        .sum();
                    best = best.max(sum);
                }
                best
            }
            OpStorage::Dense(d) => {
                let mut best = 0.0f64;
                for c in 0..d.ncols() {
                    let sum: f64 = (0..d.nrows()).map(|r| d[(r, c)].norm()).sum();
                    best = best.max(sum);
                }
                best
            }
        }
    }

    /// `|| U^dag U - I ||_max` for square operators.
    pub fn unitarity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NonSquare { nrows: self.nrows(), ncols: self.ncols() });
        }
        let u = self.to_dense();
        let mut p = u.adjoint() * &u;
        for i in 0..p.nrows() {
            p[(i, i)] -= C64::new(1.0, 0.0);
        }
        Ok(p.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// `|| A + A^dag ||_max` for square operators.
    pub fn anti_hermiticity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NonSquare { nrows: self.nrows(), ncols: self.ncols() });
        }
        let a = self.to_dense();
        let s = &a + a.adjoint();
        Ok(s.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// A density matrix over the kept modes' Fock basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    num_modes: usize,
    cutoff: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(num_modes: usize, cutoff: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = basis_dim(num_modes, cutoff);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "density matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { num_modes, cutoff, matrix })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Eigenvalues in descending order; errors if not Hermitian within 1e-12.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
        let sym = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(ev)
    }
}

/// `-sum lambda ln lambda` over eigenvalues above 1e-14.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let ev = rho.eigenvalues()?;
    Ok(ev
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| -l * l.ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vacuum_examples() {
        let v = FockState::vacuum(1, 10).unwrap();
        assert_eq!(v.dim(), 11);
        assert_eq!(v.amplitude(&[0]).unwrap(), c(1.0, 0.0));
        assert!(v.is_normalized());

        let v = FockState::vacuum(2, 3).unwrap();
        assert_eq!(v.dim(), 16);
        assert_eq!(v.amplitude(&[0, 0]).unwrap(), c(1.0, 0.0));

        let v = FockState::vacuum(3, 2).unwrap();
        assert_eq!(v.dim(), 27);
        assert_eq!(v.amplitude(&[0, 0, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(
            v.amplitudes().iter().filter(|a| a.norm() > 0.0).count(),
            1
        );
    }

    #[test]
    fn vacuum_rejects_zero_arguments() {
        assert!(FockState::vacuum(0, 5).is_err());
        assert!(FockState::vacuum(2, 0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let occ = [2usize, 0, 3];
        let idx = encode_index(&occ, 3);
        assert_eq!(idx, 2 * 16 + 0 * 4 + 3);
        assert_eq!(decode_index(idx, 3, 3), occ.to_vec());
    }

    #[test]
    fn ladder_examples() {
        // a |2> = sqrt(2) |1> at cutoff 2
        let a = FockOperator::ladder(1, 2, 1, LadderKind::Lower).unwrap();
        let two = FockState::basis_state(1, 2, &[2]).unwrap();
        let out = a.apply(&two).unwrap();
        assert_eq!(out.cutoff(), 2);
        assert!((out.amplitude(&[1]).unwrap() - c(2f64.sqrt(), 0.0)).norm() < 1e-15);

        // a^dag |2> = sqrt(3) |3> in the cutoff-3 codomain
        let adag = FockOperator::ladder(1, 2, 1, LadderKind::Raise).unwrap();
        let out = adag.apply(&two).unwrap();
        assert_eq!(out.cutoff(), 3);
        assert!((out.amplitude(&[3]).unwrap() - c(3f64.sqrt(), 0.0)).norm() < 1e-15);

        // b |1,1> = |1,0>
        let b = FockOperator::ladder(2, 2, 2, LadderKind::Lower).unwrap();
        let st = FockState::basis_state(2, 2, &[1, 1]).unwrap();
        let out = b.apply(&st).unwrap();
        assert!((out.amplitude(&[1, 0]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ladder_rejects_bad_mode() {
        assert!(FockOperator::ladder(2, 3, 0, LadderKind::Lower).is_err());
        assert!(FockOperator::ladder(2, 3, 3, LadderKind::Raise).is_err());
    }

    #[test]
    fn inner_examples() {
        let vac = FockState::vacuum(1, 4).unwrap();
        assert!((inner(&vac, &vac).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let two = FockState::basis_state(1, 4, &[2]).unwrap();
        assert!(inner(&vac, &two).unwrap().norm() < 1e-15);

        // Pythagorean pair (0.6, 0.8i)
        let psi = FockState::from_amplitudes(
            1,
            1,
            vec![c(0.6, 0.0), c(0.0, 0.8)],
        )
        .unwrap();
        assert!((inner(&psi, &psi).unwrap().re - 1.0).abs() < 1e-15);
        assert!(psi.is_normalized());
    }

    #[test]
    fn inner_conjugate_linear_in_lhs() {
        let psi = FockState::from_amplitudes(1, 1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let phi = FockState::from_amplitudes(1, 1, vec![c(0.3, 0.4), c(0.5, -0.1)]).unwrap();
        let lhs = inner(&psi.scaled(c(0.0, 1.0)), &phi).unwrap();
        let direct = inner(&psi, &phi).unwrap() * c(0.0, -1.0);
        assert!((lhs - direct).norm() < 1e-15);
    }

    #[test]
    fn inner_shape_mismatch() {
        let a = FockState::vacuum(1, 3).unwrap();
        let b = FockState::vacuum(1, 4).unwrap();
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn fidelity_phase_invariance_and_errors() {
        let vac = FockState::vacuum(1, 4).unwrap();
        let two = FockState::basis_state(1, 4, &[2]).unwrap();
        assert!((fidelity(&vac, &vac).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&vac, &two).unwrap() < 1e-15);

        let phase = c(0.0, 1.0);
        let rotated = vac.scaled(phase);
        assert!((fidelity(&rotated, &vac).unwrap() - 1.0).abs() < 1e-15);

        let unnorm = vac.scaled(c(0.5, 0.0));
        assert!(fidelity(&unnorm, &vac).is_err());
    }

    #[test]
    fn commutator_exact_below_cutoff() {
        // raise-then-lower minus lower-then-raise acts as the identity on
        // occupations strictly below the cutoff
        let k = 6;
        let a = FockOperator::ladder(1, k, 1, LadderKind::Lower).unwrap();
        let adag = FockOperator::ladder(1, k, 1, LadderKind::Raise).unwrap();
        for m in 0..k {
            let st = FockState::basis_state(1, k, &[m]).unwrap();
            // a a^dag |m> = (m+1)|m>, computed through the cutoff-(k+1) codomain
            let up = adag.apply(&st).unwrap();
            let a_k1 = FockOperator::ladder(1, k + 1, 1, LadderKind::Lower).unwrap();
            let down = a_k1.apply(&up).unwrap();
            assert!(
                (down.amplitude(&[m]).unwrap().re - (m as f64 + 1.0)).abs() < 1e-12,
                "a a^dag on |{m}>"
            );
            if m > 0 {
                let dn = a.apply(&st).unwrap();
                let up2 = FockOperator::ladder(1, k, 1, LadderKind::Raise)
                    .unwrap()
                    .apply(&dn)
                    .unwrap();
                assert!((up2.amplitude(&[m]).unwrap().re - m as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjointness_of_rectangular_ladders() {
        // <a psi | phi> = <psi | a^dag phi> with psi embedded into the raised space
        let k = 5;
        let psi = FockState::from_amplitudes(
            1,
            k,
            (0..=k).map(|i| c(0.1 * i as f64 + 0.05, 0.02 * i as f64)).collect(),
        )
        .unwrap();
        let phi = FockState::from_amplitudes(
            1,
            k,
            (0..=k).map(|i| c(0.3 - 0.04 * i as f64, -0.01 * i as f64)).collect(),
        )
        .unwrap();
        let a = FockOperator::ladder(1, k, 1, LadderKind::Lower).unwrap();
        let adag = FockOperator::ladder(1, k, 1, LadderKind::Raise).unwrap();
        let lhs = inner(&a.apply(&psi).unwrap(), &phi).unwrap();
        let rhs = inner(&psi.embed(k + 1).unwrap(), &adag.apply(&phi).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn dagger_swaps_cutoffs() {
        let adag = FockOperator::ladder(1, 4, 1, LadderKind::Raise).unwrap();
        let a = adag.dagger();
        assert_eq!(a.domain_cutoff(), 5);
        assert_eq!(a.codomain_cutoff(), 4);
        let d1 = adag.to_dense();
        let d2 = a.to_dense();
        assert_eq!(d2, d1.adjoint());
    }

    #[test]
    fn reduced_density_examples() {
        // product vacuum, keep mode 1 -> |0><0|
        let vac = FockState::vacuum(2, 3).unwrap();
        let rho = vac.reduced_density(&[1]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        // Bell-like (|0,0> + |1,1>)/sqrt(2), keep mode 1 -> diag(1/2, 1/2)
        let s = 1.0 / 2f64.sqrt();
        let mut amps = vec![c(0.0, 0.0); 16];
        amps[encode_index(&[0, 0], 3)] = c(s, 0.0);
        amps[encode_index(&[1, 1], 3)] = c(s, 0.0);
        let bell = FockState::from_amplitudes(2, 3, amps).unwrap();
        let rho = bell.reduced_density(&[1]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(rho.off_diagonal_max() < 1e-14);
        assert!(rho.hermiticity_defect() < 1e-14);

        // entropy of the Bell reduction is ln 2
        let ent = von_neumann_entropy(&rho).unwrap();
        assert!((ent - 2f64.ln()).abs() < 1e-10);

        // pure state entropy is 0
        let rho0 = vac.reduced_density(&[2]).unwrap();
        assert!(von_neumann_entropy(&rho0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn reduced_density_keep_set_errors() {
        let vac = FockState::vacuum(2, 2).unwrap();
        assert!(vac.reduced_density(&[]).is_err());
        assert!(vac.reduced_density(&[1, 2]).is_err());
        assert!(vac.reduced_density(&[3]).is_err());
        assert!(vac.reduced_density(&[1, 1]).is_err());
    }

    #[test]
    fn mean_occupation_examples() {
        let vac = FockState::vacuum(2, 5).unwrap();
        assert!(vac.mean_occupation(1).unwrap().abs() < 1e-15);
        assert!(vac.mean_occupation(3).is_err());

        let st = FockState::basis_state(2, 5, &[2, 4]).unwrap();
        assert!((st.mean_occupation(1).unwrap() - 2.0).abs() < 1e-12);
        assert!((st.mean_occupation(2).unwrap() - 4.0).abs() < 1e-12);

        let unnorm = vac.scaled(c(0.7, 0.0));
        assert!(unnorm.mean_occupation(1).is_err());
    }

    #[test]
    fn tensor_and_embed() {
        let a = FockState::basis_state(1, 3, &[2]).unwrap();
        let b = FockState::basis_state(1, 3, &[1]).unwrap();
        let prod = a.tensor(&b).unwrap();
        assert_eq!(prod.num_modes(), 2);
        assert!((prod.amplitude(&[2, 1]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let e = a.embed(5).unwrap();
        assert_eq!(e.cutoff(), 5);
        assert!((e.amplitude(&[2]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operator_algebra_round_trip() {
        let k = 4;
        let a = FockOperator::ladder(1, k, 1, LadderKind::Lower).unwrap();
        let n_expected: Vec<f64> = (0..=k).map(|m| m as f64).collect();
        // a^dag a via square-truncated raise
        let adag_sq = FockOperator::ladder(1, k, 1, LadderKind::Raise)
            .unwrap()
            .restrict_codomain(k)
            .unwrap();
        let n_op = adag_sq.compose(&a).unwrap().to_dense();
        for (m, expect) in n_expected.iter().enumerate() {
            assert!((n_op[(m, m)].re - expect).abs() < 1e-12);
        }
        let ident = FockOperator::identity(1, k);
        assert!(ident.unitarity_defect().unwrap() < 1e-15);
    }

    #[test]
    fn density_matrix_rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 1)] = c(1.0, 0.0);
        let rho = DensityMatrix::new(1, 2, m).unwrap();
        assert!(von_neumann_entropy(&rho).is_err());
    }
}
