//! Stacked cyclic constraint systems `(a_i - alpha_i a_{i+1}^dag)|psi> = 0`
//! and their kernel analysis across cutoffs.
//!
//! Each constraint block maps the cutoff-K space into the cutoff-(K+1)
//! space (the raise side is rectangular). Square truncation would create
//! spurious kernel vectors concentrated at the cutoff boundary and fake
//! solutions for N > 2; the rectangular form keeps the no-go scan sound.
//!
//! Within one block, two columns share a row only when their occupation
//! vectors differ by `e_i + e_{i+1}`. The stacked matrix therefore splits
//! into independent column sectors (connected components of those moves):
//! diagonals `m - n = const` for N = 2, alternating-charge sectors for even
//! N, total-occupation parity for odd N. Singular values and kernels are
//! computed per sector and merged, which keeps every dense decomposition at
//! desk scale; sectors too large for dense work fall back to a matrix-free
//! Lanczos pass over the Gram operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{basis_dim, encode_index, for_each_basis_state, FockState};
use crate::linalg::{hermitian_eigen_ascending, lanczos_extremes, svd_kernel};

type C64 = Complex64;

/// Hard cap on stacked rows; exceeding it is an error, not a swap storm.
pub const DEFAULT_MAX_ROWS: usize = 2_000_000;

/// Default relative SVD tolerance for kernel membership.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

/// Per-sector limits for the dense SVD path.
const DENSE_SVD_MAX_COLS: usize = 1200;
const DENSE_SVD_MAX_ROWS: usize = 50_000;
const DENSE_SVD_MAX_ENTRIES: usize = 6_000_000;

/// Per-sector limit for the dense Gram eigen-decomposition path (squared
/// singular values; documented accuracy tradeoff).
const GRAM_MAX_COLS: usize = 1024;

/// Lanczos iteration cap for oversized sectors.
const LANCZOS_MAX_ITER: usize = 320;

/// Singular values kept in a report.
const SIGMA_KEEP: usize = 8;

/// Relative level below which a singular value is treated as an exact zero
/// of the finite matrix rather than a decaying truncation artifact.
const NUMERICAL_FLOOR_REL: f64 = 1e-13;

/// Maximum kernel vectors extracted per sector on the iterative path.
const LANCZOS_KERNEL_CAP: usize = 8;

/// A cyclic family `(a_i - alpha_i a_{i+1}^dag)`, indices mod N.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub num_modes: usize,
    pub alphas: Vec<C64>,
    pub cutoff: usize,
}

impl ConstraintSystem {
    pub fn new(num_modes: usize, alphas: Vec<C64>, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidDimension("num_modes must be >= 1"));
        }
        if cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be >= 1"));
        }
        if alphas.len() != num_modes {
            return Err(Error::InvalidParameter(format!(
                "{} couplings given for {} modes",
                alphas.len(),
                num_modes
            )));
        }
        Ok(Self { num_modes, alphas, cutoff })
    }
}

/// Memory budget for constraint-matrix construction.
#[derive(Debug, Clone, Copy)]
pub struct MemoryBudget {
    pub max_rows: usize,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self { max_rows: DEFAULT_MAX_ROWS }
    }
}

/// The stacked constraint matrix in compressed sparse column form.
///
/// Shape `(N (K+2)^N) x (K+1)^N`; block `i` occupies rows
/// `[i (K+2)^N, (i+1) (K+2)^N)`.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    num_modes: usize,
    cutoff: usize,
    alphas: Vec<C64>,
    d_in: usize,
    d_out: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

/// Build the stacked rectangular constraint matrix for a system.
pub fn build_constraint_matrix(
    system: &ConstraintSystem,
    budget: &MemoryBudget,
) -> Result<ConstraintMatrix> {
    let n = system.num_modes;
    let k = system.cutoff;
    let d_out = checked_dim(n, k + 1)?;
    let rows = d_out
        .checked_mul(n)
        .ok_or(Error::MemoryBudget { rows: usize::MAX, budget: budget.max_rows })?;
    if rows > budget.max_rows {
        return Err(Error::MemoryBudget { rows, budget: budget.max_rows });
    }
    let d_in = basis_dim(n, k);

    let mut col_ptr = Vec::with_capacity(d_in + 1);
    let mut row_idx = Vec::with_capacity(2 * n * d_in);
    let mut vals = Vec::with_capacity(2 * n * d_in);
    col_ptr.push(0);
    let mut occ_out = vec![0usize; n];
    for_each_basis_state(n, k, |_, occ| {
        for i in 0..n {
            let j = (i + 1) % n;
            let base = i * d_out;
            if occ[i] > 0 {
                occ_out.copy_from_slice(occ);
                occ_out[i] -= 1;
                row_idx.push(base + encode_index(&occ_out, k + 1));
                vals.push(C64::new((occ[i] as f64).sqrt(), 0.0));
            }
            let alpha = system.alphas[i];
            if alpha != C64::new(0.0, 0.0) {
                occ_out.copy_from_slice(occ);
                occ_out[j] += 1;
                row_idx.push(base + encode_index(&occ_out, k + 1));
                vals.push(-alpha * ((occ[j] + 1) as f64).sqrt());
            }
        }
        col_ptr.push(row_idx.len());
    });

    Ok(ConstraintMatrix {
        num_modes: n,
        cutoff: k,
        alphas: system.alphas.clone(),
        d_in,
        d_out,
        col_ptr,
        row_idx,
        vals,
    })
}

fn checked_dim(num_modes: usize, cutoff: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..num_modes {
        dim = dim
            .checked_mul(cutoff + 1)
            .ok_or(Error::MemoryBudget { rows: usize::MAX, budget: DEFAULT_MAX_ROWS })?;
    }
    Ok(dim)
}

impl ConstraintMatrix {
    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn nrows(&self) -> usize {
        self.num_modes * self.d_out
    }

    pub fn ncols(&self) -> usize {
        self.d_in
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for c in 0..self.d_in {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[k], c)] += self.vals[k];
            }
        }
        m
    }

    /// `||M x||` for a domain vector.
    pub fn residual_norm(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows()];
        for (c, &xc) in x.iter().enumerate().take(self.d_in) {
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.vals[k] * xc;
            }
        }
        y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Connected components of the column-sharing graph.
    fn sectors(&self) -> Vec<Vec<usize>> {
        let n = self.num_modes;
        let k = self.cutoff;
        let mut uf = UnionFind::new(self.d_in);
        let mut occ_to = vec![0usize; n];
        for_each_basis_state(n, k, |col, occ| {
            for i in 0..n {
                if self.alphas[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let j = (i + 1) % n;
                occ_to.copy_from_slice(occ);
                if i == j {
                    // single-mode system: the move is +2 e_i
                    if occ[i] + 2 > k {
                        continue;
                    }
                    occ_to[i] += 2;
                } else {
                    if occ[i] + 1 > k || occ[j] + 1 > k {
                        continue;
                    }
                    occ_to[i] += 1;
                    occ_to[j] += 1;
                }
                uf.union(col, encode_index(&occ_to, k));
            }
        });
        let mut groups: std::collections::HashMap<usize, Vec<usize>> =
            std::collections::HashMap::new();
        for col in 0..self.d_in {
            groups.entry(uf.find(col)).or_default().push(col);
        }
        let mut sectors: Vec<Vec<usize>> = groups.into_values().collect();
        sectors.sort_by_key(|s| s[0]);
        sectors
    }

    /// Extract one sector as a compact local CSC block.
    fn sector_block(&self, columns: &[usize]) -> SectorBlock {
        let mut row_map: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for &c in columns {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let next = row_map.len();
                let local = *row_map.entry(self.row_idx[k]).or_insert(next);
                row_idx.push(local);
                vals.push(self.vals[k]);
            }
            col_ptr.push(row_idx.len());
        }
        SectorBlock {
            nrows: row_map.len(),
            columns: columns.to_vec(),
            col_ptr,
            row_idx,
            vals,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct SectorBlock {
    nrows: usize,
    columns: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SectorBlock {
    fn ncols(&self) -> usize {
        self.columns.len()
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows.max(1), self.ncols());
        for c in 0..self.ncols() {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[k], c)] += self.vals[k];
            }
        }
        m
    }

    /// Dense Gram matrix `M^H M`, assembled row-by-row (each stacked row has
    /// at most two entries).
    fn gram(&self) -> DMatrix<C64> {
        let n = self.ncols();
        let mut by_row: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.nrows];
        for c in 0..n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                by_row[self.row_idx[k]].push((c, self.vals[k]));
            }
        }
        let mut g = DMatrix::<C64>::zeros(n, n);
        for entries in &by_row {
            for &(ci, vi) in entries {
                for &(cj, vj) in entries {
                    g[(ci, cj)] += vi.conj() * vj;
                }
            }
        }
        g
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (c, &xc) in x.iter().enumerate().take(self.ncols()) {
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.vals[k] * xc;
            }
        }
    }

    fn apply_adjoint(&self, y: &[C64], z: &mut [C64]) {
        for (c, slot) in z.iter_mut().enumerate().take(self.ncols()) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.vals[k].conj() * y[self.row_idx[k]];
            }
            *slot = acc;
        }
    }
}

/// Which decomposition produced a report's singular data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    /// Dense SVD of every sector.
    Dense,
    /// At least one sector went through the dense Gram eigen-decomposition.
    Gram,
    /// At least one sector used matrix-free Lanczos on the Gram operator.
    Lanczos,
}

enum SectorDecomp {
    /// Full singular data: values descending, right vectors in matching
    /// order.
    Full { svals: Vec<f64>, vectors: Vec<Vec<C64>>, method: KernelMethod },
    /// Iterative estimates: overall largest value plus the few smallest
    /// pairs found by deflated Lanczos (ascending).
    Iterative { sigma_max: f64, smallest: Vec<(f64, Vec<C64>)> },
}

fn decompose_sector(block: &SectorBlock, forced: Option<KernelMethod>) -> Result<SectorDecomp> {
    let cols = block.ncols();
    let rows = block.nrows;
    if rows == 0 {
        // isolated zero columns: exact kernel directions
        let vectors = (0..cols)
            .map(|i| {
                let mut v = vec![C64::new(0.0, 0.0); cols];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        return Ok(SectorDecomp::Full {
            svals: vec![0.0; cols],
            vectors,
            method: KernelMethod::Dense,
        });
    }
    let method = forced.unwrap_or({
        if cols <= DENSE_SVD_MAX_COLS
            && rows <= DENSE_SVD_MAX_ROWS
            && rows.saturating_mul(cols) <= DENSE_SVD_MAX_ENTRIES
        {
            KernelMethod::Dense
        } else if cols <= GRAM_MAX_COLS {
            KernelMethod::Gram
        } else {
            KernelMethod::Lanczos
        }
    });
    match method {
        KernelMethod::Dense => {
            let dense = block.to_dense();
            // rel_tol = 1.0 keeps every right vector; selection happens later
            // against the global sigma_max
            let (svals, mut kernel_all) = svd_kernel(&dense, 1.0)?;
            kernel_all.reverse(); // descending sigma, matching svals
            Ok(SectorDecomp::Full { svals, vectors: kernel_all, method })
        }
        KernelMethod::Gram => {
            let g = block.gram();
            let (lambdas, vectors) = hermitian_eigen_ascending(&g);
            let mut svals: Vec<f64> = lambdas.iter().map(|&l| l.max(0.0).sqrt()).collect();
            svals.reverse();
            let n = block.ncols();
            let vecs: Vec<Vec<C64>> = (0..n)
                .rev()
                .map(|j| (0..n).map(|i| vectors[(i, j)]).collect())
                .collect();
            Ok(SectorDecomp::Full { svals, vectors: vecs, method })
        }
        KernelMethod::Lanczos => {
            let dim = block.ncols();
            let apply = |x: &[C64], z: &mut [C64]| {
                let mut rows_buf = vec![C64::new(0.0, 0.0); block.nrows];
                block.apply(x, &mut rows_buf);
                block.apply_adjoint(&rows_buf, z);
            };
            let mut smallest: Vec<(f64, Vec<C64>)> = Vec::new();
            let mut deflate: Vec<Vec<C64>> = Vec::new();
            let first = lanczos_extremes(dim, &apply, LANCZOS_MAX_ITER, &[], lanczos_seed(block));
            let sigma_max = first.theta_max.max(0.0).sqrt();
            let ritz_ok = |residual: f64| residual <= 1e-6 * sigma_max.max(1.0).powi(2);
            let mut converged = ritz_ok(first.residual_min);
            smallest.push((first.theta_min.max(0.0).sqrt(), first.vector_min.clone()));
            deflate.push(first.vector_min);
            // deflate to expose possible kernel multiplicity; stop when the
            // latest Ritz pair is clearly off the numerical floor or failed
            // to converge
            for round in 1..LANCZOS_KERNEL_CAP {
                let last_sigma = smallest.last().unwrap().0;
                if !converged || last_sigma > NUMERICAL_FLOOR_REL.sqrt() * sigma_max.max(1.0) {
                    break;
                }
                let next = lanczos_extremes(
                    dim,
                    &apply,
                    LANCZOS_MAX_ITER,
                    &deflate,
                    lanczos_seed(block).wrapping_add(round as u64),
                );
                converged = ritz_ok(next.residual_min);
                smallest.push((next.theta_min.max(0.0).sqrt(), next.vector_min.clone()));
                deflate.push(next.vector_min);
            }
            Ok(SectorDecomp::Iterative { sigma_max, smallest })
        }
    }
}

fn lanczos_seed(block: &SectorBlock) -> u64 {
    // deterministic: derived from the sector shape only
    0x5EED_u64 ^ ((block.nrows as u64) << 24) ^ block.ncols() as u64
}

/// Kernel analysis of a stacked constraint matrix at a relative tolerance.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub cutoff: usize,
    /// Relative tolerance: kernel membership means
    /// `sigma <= tolerance * sigma_max`.
    pub tolerance: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// The smallest few singular values, in descending order.
    pub singular_values: Vec<f64>,
    pub kernel_dim: usize,
    pub kernel_basis: Vec<FockState>,
    pub method: KernelMethod,
}

/// SVD-based nullspace of the stacked constraint matrix, sector by sector.
pub fn kernel_analysis(matrix: &ConstraintMatrix, tolerance: f64) -> Result<KernelReport> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "relative tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    let sectors = matrix.sectors();
    let mut decomps = Vec::with_capacity(sectors.len());
    let mut method = KernelMethod::Dense;
    for columns in &sectors {
        let block = matrix.sector_block(columns);
        let decomp = decompose_sector(&block, None)?;
        match &decomp {
            SectorDecomp::Full { method: m, .. } => {
                if *m == KernelMethod::Gram && method == KernelMethod::Dense {
                    method = KernelMethod::Gram;
                }
            }
            SectorDecomp::Iterative { .. } => method = KernelMethod::Lanczos,
        }
        decomps.push((block, decomp));
    }

    let sigma_max = decomps
        .iter()
        .map(|(_, d)| match d {
            SectorDecomp::Full { svals, .. } => svals.first().copied().unwrap_or(0.0),
            SectorDecomp::Iterative { sigma_max, .. } => *sigma_max,
        })
        .fold(0.0, f64::max);
    let threshold = tolerance * sigma_max;

    let mut all_small: Vec<f64> = Vec::new();
    let mut kernel_basis: Vec<FockState> = Vec::new();
    let mut sigma_min = f64::INFINITY;
    for (block, decomp) in &decomps {
        match decomp {
            SectorDecomp::Full { svals, vectors, .. } => {
                if let Some(&s) = svals.last() {
                    sigma_min = sigma_min.min(s);
                }
                for &s in svals.iter().rev().take(SIGMA_KEEP) {
                    all_small.push(s);
                }
                for (i, &s) in svals.iter().enumerate().rev() {
                    if sigma_max > 0.0 && s > threshold {
                        break;
                    }
                    kernel_basis.push(embed_kernel_vector(matrix, block, &vectors[i]));
                }
            }
            SectorDecomp::Iterative { smallest, .. } => {
                for (s, v) in smallest {
                    sigma_min = sigma_min.min(*s);
                    all_small.push(*s);
                    if sigma_max > 0.0 && *s <= threshold {
                        kernel_basis.push(embed_kernel_vector(matrix, block, v));
                    }
                }
            }
        }
    }
    all_small.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all_small.truncate(SIGMA_KEEP);
    all_small.reverse();

    Ok(KernelReport {
        cutoff: matrix.cutoff,
        tolerance,
        sigma_max,
        sigma_min: if sigma_min.is_finite() { sigma_min } else { 0.0 },
        singular_values: all_small,
        kernel_dim: kernel_basis.len(),
        kernel_basis,
        method,
    })
}

fn embed_kernel_vector(
    matrix: &ConstraintMatrix,
    block: &SectorBlock,
    local: &[C64],
) -> FockState {
    let mut amplitudes = vec![C64::new(0.0, 0.0); matrix.d_in];
    for (i, &col) in block.columns.iter().enumerate() {
        amplitudes[col] = local[i];
    }
    FockState::from_amplitudes(matrix.num_modes, matrix.cutoff, amplitudes)
        .expect("kernel vector has domain dimensions")
}

/// Run [`kernel_analysis`] over an ascending list of cutoffs (>= 3 points).
/// Scan points are independent and run in parallel.
pub fn cutoff_scan(
    num_modes: usize,
    alphas: &[C64],
    cutoffs: &[usize],
    tolerance: f64,
    budget: &MemoryBudget,
) -> Result<Vec<KernelReport>> {
    if cutoffs.len() < 3 || cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidCutoffList { min: 3 });
    }
    cutoffs
        .par_iter()
        .map(|&k| {
            let system = ConstraintSystem::new(num_modes, alphas.to_vec(), k)?;
            let matrix = build_constraint_matrix(&system, budget)?;
            kernel_analysis(&matrix, tolerance)
        })
        .collect()
}

/// Classification outcome of a cutoff scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    UniqueSqueezedState,
    VacuumOnly,
    NoSolution,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ScanEvidence {
    pub cutoffs: Vec<usize>,
    pub sigma_min_trajectory: Vec<f64>,
    pub kernel_dim_trajectory: Vec<usize>,
    /// Least-squares slope of `ln sigma_min` per unit cutoff, over the scan
    /// points above the numerical floor.
    pub log_slope: Option<f64>,
    /// `|sigma_last / sigma_prev - 1|` over the last two cutoffs.
    pub plateau_rel_change: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: ScanEvidence,
}

/// Classify a scan: geometric sigma_min decay with a one-dimensional kernel
/// certifies a unique squeezed state; a positive plateau with empty kernels
/// certifies no solution; anything ambiguous stays Inconclusive.
pub fn classify(reports: &[KernelReport], alphas: &[C64]) -> Verdict {
    let cutoffs: Vec<usize> = reports.iter().map(|r| r.cutoff).collect();
    let sigmas: Vec<f64> = reports.iter().map(|r| r.sigma_min).collect();
    let dims: Vec<usize> = reports.iter().map(|r| r.kernel_dim).collect();

    let floors: Vec<f64> = reports
        .iter()
        .map(|r| NUMERICAL_FLOOR_REL * r.sigma_max.max(1.0))
        .collect();
    let fit_points: Vec<(f64, f64)> = cutoffs
        .iter()
        .zip(&sigmas)
        .zip(&floors)
        .filter(|((_, &s), &f)| s > f)
        .map(|((&k, &s), _)| (k as f64, s.ln()))
        .collect();
    let log_slope = if fit_points.len() >= 2 {
        Some(least_squares_slope(&fit_points))
    } else {
        None
    };
    let plateau_rel_change = if sigmas.len() >= 2 {
        let prev = sigmas[sigmas.len() - 2];
        let last = sigmas[sigmas.len() - 1];
        if prev > 0.0 {
            Some((last / prev - 1.0).abs())
        } else {
            None
        }
    } else {
        None
    };
    let evidence = ScanEvidence {
        cutoffs,
        sigma_min_trajectory: sigmas.clone(),
        kernel_dim_trajectory: dims.clone(),
        log_slope,
        plateau_rel_change,
    };

    let last = reports.last().expect("classify needs a nonempty scan");
    let all_zero = alphas.iter().all(|a| *a == C64::new(0.0, 0.0));
    if all_zero {
        let vacuum_basis = last.kernel_dim == 1 && {
            let amp0 = last.kernel_basis[0].amplitudes()[0].norm_sqr();
            amp0 >= 1.0 - 1e-10
        };
        let kind = if vacuum_basis {
            VerdictKind::VacuumOnly
        } else {
            VerdictKind::Inconclusive
        };
        return Verdict { kind, evidence };
    }

    if last.kernel_dim == 1 {
        let decayed_to_floor = *sigmas.last().unwrap() <= *floors.last().unwrap();
        let geometric = matches!(log_slope, Some(s) if s < -0.05);
        if decayed_to_floor || geometric {
            return Verdict { kind: VerdictKind::UniqueSqueezedState, evidence };
        }
        return Verdict { kind: VerdictKind::Inconclusive, evidence };
    }

    if dims.iter().all(|&d| d == 0) {
        let stable = matches!(plateau_rel_change, Some(p) if p < 0.10);
        let positive = *sigmas.last().unwrap() > 10.0 * last.tolerance * last.sigma_max;
        if stable && positive {
            return Verdict { kind: VerdictKind::NoSolution, evidence };
        }
    }
    Verdict { kind: VerdictKind::Inconclusive, evidence }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

/// `||(a_lower - alpha a_raise^dag) psi||` in the rectangular cutoff-(K+1)
/// codomain, without materializing the operator. Modes are 1-based.
pub fn constraint_residual(
    state: &FockState,
    lower_mode: usize,
    raise_mode: usize,
    alpha: C64,
) -> Result<f64> {
    let n = state.num_modes();
    for mode in [lower_mode, raise_mode] {
        if mode == 0 || mode > n {
            return Err(Error::ModeIndexOutOfRange { mode_index: mode, num_modes: n });
        }
    }
    let k = state.cutoff();
    let d_out = checked_dim(n, k + 1)?;
    let mut out = vec![C64::new(0.0, 0.0); d_out];
    let li = lower_mode - 1;
    let ri = raise_mode - 1;
    let mut occ_out = vec![0usize; n];
    let amps = state.amplitudes();
    for_each_basis_state(n, k, |idx, occ| {
        let c = amps[idx];
        if c == C64::new(0.0, 0.0) {
            return;
        }
        if occ[li] > 0 {
            occ_out.copy_from_slice(occ);
            occ_out[li] -= 1;
            out[encode_index(&occ_out, k + 1)] += c * (occ[li] as f64).sqrt();
        }
        occ_out.copy_from_slice(occ);
        occ_out[ri] += 1;
        out[encode_index(&occ_out, k + 1)] -= alpha * c * ((occ[ri] + 1) as f64).sqrt();
    });
    Ok(out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Residual of the equal-excitation ansatz `sum_k C_k |k,...,k>` against the
/// cyclic conditions: the maximum over constraints of the rectangular
/// residual norm. For N > 2 the lowered and raised images are orthogonal,
/// so no nonzero `C_k` (k >= 1) can cancel.
pub fn diagonal_ansatz_residual(
    num_modes: usize,
    alphas: &[C64],
    coeffs: &[C64],
    cutoff: usize,
) -> Result<f64> {
    if alphas.len() != num_modes {
        return Err(Error::InvalidParameter(format!(
            "{} couplings for {} modes",
            alphas.len(),
            num_modes
        )));
    }
    if coeffs.is_empty() || coeffs.len() > cutoff + 1 {
        return Err(Error::InvalidParameter(format!(
            "need between 1 and cutoff+1 = {} diagonal coefficients, got {}",
            cutoff + 1,
            coeffs.len()
        )));
    }
    let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sqr.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm: norm_sqr.sqrt() });
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis_dim(num_modes, cutoff)];
    for (k, &c) in coeffs.iter().enumerate() {
        let occ = vec![k; num_modes];
        amplitudes[encode_index(&occ, cutoff)] = c;
    }
    let state = FockState::from_amplitudes(num_modes, cutoff, amplitudes)?;
    let mut worst = 0.0f64;
    for i in 0..num_modes {
        let raise_mode = (i + 1) % num_modes + 1;
        let r = constraint_residual(&state, i + 1, raise_mode, alphas[i])?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Report of the decoupled pairwise-chain comparison.
#[derive(Debug, Clone)]
pub struct PairwiseChainReport {
    /// `||(a_x - alpha a_y^dag) psi||` for both conditions of each pair.
    pub pair_residuals: Vec<f64>,
    /// Residuals of all N cyclic constraints against the chain state.
    pub cyclic_residuals: Vec<f64>,
    pub max_pair_residual: f64,
    /// Smallest residual among cyclic constraints that link distinct pairs;
    /// `None` when every cyclic constraint is a pair condition (N = 2).
    pub min_linking_residual: Option<f64>,
}

/// Build the product of `floor(N/2)` independent two-mode squeezed vacua on
/// modes `(1,2), (3,4), ...` (odd N leaves the last mode in vacuum) and
/// compare: each pair's own conditions hold to the truncation tail, while
/// the cyclic constraints that link distinct pairs fail by an O(1) margin.
pub fn pairwise_chain_check(
    num_modes: usize,
    alphas: &[C64],
    cutoff: usize,
) -> Result<PairwiseChainReport> {
    if num_modes < 2 {
        return Err(Error::InvalidDimension("pairwise chain needs at least 2 modes"));
    }
    if alphas.len() != num_modes {
        return Err(Error::InvalidParameter(format!(
            "{} couplings for {} modes",
            alphas.len(),
            num_modes
        )));
    }
    let num_pairs = num_modes / 2;
    let mut state: Option<FockState> = None;
    for p in 0..num_pairs {
        let alpha = crate::closed_form::SqueezeParamAlpha::two(alphas[2 * p])?;
        let pair = crate::closed_form::tmsv_closed_form(&alpha, cutoff)?.state;
        state = Some(match state {
            None => pair,
            Some(s) => s.tensor(&pair)?,
        });
    }
    if num_modes % 2 == 1 {
        let vac = FockState::vacuum(1, cutoff)?;
        state = Some(match state {
            None => vac,
            Some(s) => s.tensor(&vac)?,
        });
    }
    let state = state.expect("at least one pair");

    let mut pair_residuals = Vec::with_capacity(2 * num_pairs);
    for p in 0..num_pairs {
        let x = 2 * p + 1;
        let y = 2 * p + 2;
        let alpha = alphas[2 * p];
        pair_residuals.push(constraint_residual(&state, x, y, alpha)?);
        pair_residuals.push(constraint_residual(&state, y, x, alpha)?);
    }

    let mut cyclic_residuals = Vec::with_capacity(num_modes);
    let mut min_linking: Option<f64> = None;
    for i in 1..=num_modes {
        let j = i % num_modes + 1;
        let r = constraint_residual(&state, i, j, alphas[i - 1])?;
        cyclic_residuals.push(r);
        let is_pair_condition = i != j && {
            let lo = i.min(j);
            let hi = i.max(j);
            lo % 2 == 1 && hi == lo + 1 && hi <= 2 * num_pairs
        };
        if !is_pair_condition {
            min_linking = Some(min_linking.map_or(r, |m: f64| m.min(r)));
        }
    }

    let max_pair_residual = pair_residuals.iter().copied().fold(0.0, f64::max);
    Ok(PairwiseChainReport {
        pair_residuals,
        cyclic_residuals,
        max_pair_residual,
        min_linking_residual: min_linking,
    })
}

#[cfg(test)]
pub(crate) fn kernel_analysis_forced(
    matrix: &ConstraintMatrix,
    tolerance: f64,
    forced: KernelMethod,
) -> Result<KernelReport> {
    let sectors = matrix.sectors();
    let mut sigma_min = f64::INFINITY;
    let mut sigma_max = 0.0f64;
    let mut decomps = Vec::new();
    for columns in &sectors {
        let block = matrix.sector_block(columns);
        let d = decompose_sector(&block, Some(forced))?;
        sigma_max = sigma_max.max(match &d {
            SectorDecomp::Full { svals, .. } => svals.first().copied().unwrap_or(0.0),
            SectorDecomp::Iterative { sigma_max, .. } => *sigma_max,
        });
        decomps.push((block, d));
    }
    let mut kernel_dim = 0;
    for (_, d) in &decomps {
        match d {
            SectorDecomp::Full { svals, .. } => {
                for &s in svals {
                    sigma_min = sigma_min.min(s);
                    if s <= tolerance * sigma_max {
                        kernel_dim += 1;
                    }
                }
            }
            SectorDecomp::Iterative { smallest, .. } => {
                for (s, _) in smallest {
                    sigma_min = sigma_min.min(*s);
                    if *s <= tolerance * sigma_max {
                        kernel_dim += 1;
                    }
                }
            }
        }
    }
    Ok(KernelReport {
        cutoff: matrix.cutoff,
        tolerance,
        sigma_max,
        sigma_min,
        singular_values: Vec::new(),
        kernel_dim,
        kernel_basis: Vec::new(),
        method: forced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{smsv_closed_form, tmsv_closed_form, SqueezeParamAlpha};
    use crate::fock::fidelity;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cs(n: usize, alphas: Vec<C64>, k: usize) -> ConstraintMatrix {
        let system = ConstraintSystem::new(n, alphas, k).unwrap();
        build_constraint_matrix(&system, &MemoryBudget::default()).unwrap()
    }

    #[test]
    fn matrix_n1_zero_alpha_is_lower_operator() {
        let m = cs(1, vec![c(0.0, 0.0)], 3);
        assert_eq!(m.nrows(), 5);
        assert_eq!(m.ncols(), 4);
        let d = m.to_dense();
        for col in 0..4usize {
            for row in 0..5usize {
                let expect = if col >= 1 && row == col - 1 {
                    (col as f64).sqrt()
                } else {
                    0.0
                };
                assert!((d[(row, col)] - c(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_n1_first_column_is_raise_entry() {
        let m = cs(1, vec![c(0.5, 0.0)], 3);
        let d = m.to_dense();
        // action on |0>: only -0.5 |1>
        assert!((d[(1, 0)] - c(-0.5, 0.0)).norm() < 1e-15);
        for row in [0usize, 2, 3, 4] {
            assert!(d[(row, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn matrix_n2_nonzero_pattern_matches_recurrences() {
        // constraint 1: (a - 0.5 b^dag), constraint 2: (b - 0.3 a^dag), K = 2
        let m = cs(2, vec![c(0.5, 0.0), c(0.3, 0.0)], 2);
        assert_eq!(m.nrows(), 2 * 16);
        assert_eq!(m.ncols(), 9);
        let d = m.to_dense();
        // column (1,1): block 1 gives sqrt(1)|0,1> and -0.5 sqrt(2)|1,2>
        let col = encode_index(&[1, 1], 2);
        assert!((d[(encode_index(&[0, 1], 3), col)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(
            (d[(encode_index(&[1, 2], 3), col)] - c(-0.5 * 2f64.sqrt(), 0.0)).norm() < 1e-14
        );
        // block 2 gives sqrt(1)|1,0> and -0.3 sqrt(2)|2,1>
        assert!((d[(16 + encode_index(&[1, 0], 3), col)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(
            (d[(16 + encode_index(&[2, 1], 3), col)] - c(-0.3 * 2f64.sqrt(), 0.0)).norm() < 1e-14
        );
        // vacuum column: two raise entries only
        let nnz0: usize = (0..32).filter(|&r| d[(r, 0)].norm() > 0.0).count();
        assert_eq!(nnz0, 2);
    }

    #[test]
    fn memory_budget_enforced() {
        let system = ConstraintSystem::new(3, vec![c(0.1, 0.0); 3], 20).unwrap();
        let tight = MemoryBudget { max_rows: 1000 };
        assert!(matches!(
            build_constraint_matrix(&system, &tight),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn sector_split_matches_full_dense_svd() {
        let m = cs(2, vec![c(0.4, 0.1), c(0.2, 0.0)], 6);
        let report = kernel_analysis(&m, 1e-8).unwrap();
        let (svals, _) = svd_kernel(&m.to_dense(), 1e-8).unwrap();
        let full_min = *svals.last().unwrap();
        let full_max = svals[0];
        assert!((report.sigma_max - full_max).abs() < 1e-10 * full_max.max(1.0));
        assert!((report.sigma_min - full_min).abs() < 1e-10);
    }

    #[test]
    fn kernel_n1_alpha_zero_is_vacuum() {
        let m = cs(1, vec![c(0.0, 0.0)], 6);
        let report = kernel_analysis(&m, 1e-8).unwrap();
        assert_eq!(report.kernel_dim, 1);
        assert_eq!(report.sigma_min, 0.0);
        let amp0 = report.kernel_basis[0].amplitudes()[0].norm_sqr();
        assert!(amp0 >= 1.0 - 1e-12);
    }

    #[test]
    fn kernel_n1_unique_state_matches_closed_form() {
        let m = cs(1, vec![c(0.5, 0.0)], 40);
        // the truncation floor at K=40 sits near 1e-7 relative; 1e-3 still
        // separates it from the next singular value by orders of magnitude
        let report = kernel_analysis(&m, 1e-3).unwrap();
        assert_eq!(report.kernel_dim, 1);
        let cf = smsv_closed_form(&SqueezeParamAlpha::single(c(0.5, 0.0)).unwrap(), 40).unwrap();
        let basis = report.kernel_basis[0].normalized().unwrap();
        let f = fidelity(&basis, &cf.state).unwrap();
        assert!(f >= 1.0 - 1e-8, "fidelity = {f}");

        // the truncation floor is real: at 1e-8 relative tolerance the
        // near-kernel direction is no longer counted
        let strict = kernel_analysis(&m, 1e-8).unwrap();
        assert_eq!(strict.kernel_dim, 0);
    }

    #[test]
    fn kernel_even_occupation_support() {
        let m = cs(1, vec![c(0.5, 0.0)], 40);
        let report = kernel_analysis(&m, 1e-3).unwrap();
        let basis = &report.kernel_basis[0];
        for occ in (1..=39).step_by(2) {
            assert!(basis.amplitude(&[occ]).unwrap().norm() <= 1e-10);
        }
    }

    #[test]
    fn kernel_n2_equal_alpha_diagonal_support() {
        let m = cs(2, vec![c(0.5, 0.0), c(0.5, 0.0)], 20);
        let report = kernel_analysis(&m, 1e-3).unwrap();
        assert_eq!(report.kernel_dim, 1);
        let basis = report.kernel_basis[0].normalized().unwrap();
        let cf = tmsv_closed_form(&SqueezeParamAlpha::two(c(0.5, 0.0)).unwrap(), 20).unwrap();
        let f = fidelity(&basis, &cf.state).unwrap();
        assert!(f >= 1.0 - 1e-8, "fidelity = {f}");
        for m_occ in 0..=20usize {
            for n_occ in 0..=20usize {
                if m_occ != n_occ {
                    assert!(basis.amplitude(&[m_occ, n_occ]).unwrap().norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn kernel_n2_mismatched_alpha_is_empty() {
        let m = cs(2, vec![c(0.5, 0.0), c(0.3, 0.0)], 16);
        let report = kernel_analysis(&m, 1e-8).unwrap();
        assert_eq!(report.kernel_dim, 0);
        assert!(report.sigma_min > 0.1, "sigma_min = {}", report.sigma_min);

        // detection holds down to |alpha - beta| = 0.05
        let m = cs(2, vec![c(0.5, 0.0), c(0.45, 0.0)], 16);
        let report = kernel_analysis(&m, 1e-8).unwrap();
        assert_eq!(report.kernel_dim, 0);
        assert!(report.sigma_min > 0.01, "sigma_min = {}", report.sigma_min);
    }

    #[test]
    fn kernel_n3_no_solution() {
        let m = cs(3, vec![c(0.5, 0.0); 3], 6);
        let report = kernel_analysis(&m, 1e-8).unwrap();
        assert_eq!(report.kernel_dim, 0);
        assert!(report.sigma_min > 0.5, "sigma_min = {}", report.sigma_min);
    }

    #[test]
    fn gram_and_lanczos_paths_agree_with_dense() {
        let m = cs(3, vec![c(0.4, 0.0), c(0.4, 0.1), c(0.3, 0.0)], 5);
        let dense = kernel_analysis_forced(&m, 1e-8, KernelMethod::Dense).unwrap();
        let gram = kernel_analysis_forced(&m, 1e-8, KernelMethod::Gram).unwrap();
        let lanczos = kernel_analysis_forced(&m, 1e-8, KernelMethod::Lanczos).unwrap();
        assert!(
            (dense.sigma_min - gram.sigma_min).abs() < 1e-8 * dense.sigma_max,
            "gram sigma_min {} vs dense {}",
            gram.sigma_min,
            dense.sigma_min
        );
        assert!(
            (dense.sigma_min - lanczos.sigma_min).abs() < 1e-6 * dense.sigma_max,
            "lanczos sigma_min {} vs dense {}",
            lanczos.sigma_min,
            dense.sigma_min
        );
        assert!((dense.sigma_max - lanczos.sigma_max).abs() < 1e-6 * dense.sigma_max);
    }

    #[test]
    fn scan_n2_equal_alpha_decays_geometrically() {
        let reports = cutoff_scan(
            2,
            &[c(0.5, 0.0), c(0.5, 0.0)],
            &[10, 16, 22],
            1e-6,
            &MemoryBudget::default(),
        )
        .unwrap();
        let s: Vec<f64> = reports.iter().map(|r| r.sigma_min).collect();
        // sigma_min ratios approximate 0.5^6 per 6-cutoff step
        for w in s.windows(2) {
            let per_step = (w[1] / w[0]).ln() / 6.0;
            assert!(
                (per_step - 0.5f64.ln()).abs() < 0.08,
                "per-step log ratio {per_step}"
            );
        }
        let verdict = classify(&reports, &[c(0.5, 0.0), c(0.5, 0.0)]);
        assert_eq!(verdict.kind, VerdictKind::UniqueSqueezedState);
    }

    #[test]
    fn scan_n2_mismatched_alpha_plateaus() {
        let alphas = [c(0.5, 0.0), c(0.3, 0.0)];
        let reports =
            cutoff_scan(2, &alphas, &[10, 16, 22], 1e-8, &MemoryBudget::default()).unwrap();
        let s: Vec<f64> = reports.iter().map(|r| r.sigma_min).collect();
        assert!((s[2] / s[1] - 1.0).abs() < 0.01, "trajectory {s:?}");
        assert!(s[2] > 0.1);
        let verdict = classify(&reports, &alphas);
        assert_eq!(verdict.kind, VerdictKind::NoSolution);
    }

    #[test]
    fn scan_rejects_bad_cutoff_lists() {
        let alphas = [c(0.5, 0.0)];
        assert!(cutoff_scan(1, &alphas, &[4, 6], 1e-8, &MemoryBudget::default()).is_err());
        assert!(cutoff_scan(1, &alphas, &[4, 4, 6], 1e-8, &MemoryBudget::default()).is_err());
    }

    #[test]
    fn classify_n1_unique_and_vacuum() {
        let alphas = [c(0.5, 0.0)];
        let reports =
            cutoff_scan(1, &alphas, &[10, 16, 22], 1e-4, &MemoryBudget::default()).unwrap();
        assert_eq!(classify(&reports, &alphas).kind, VerdictKind::UniqueSqueezedState);

        let zeros = [c(0.0, 0.0); 3];
        let reports = cutoff_scan(3, &zeros, &[3, 4, 5], 1e-8, &MemoryBudget::default()).unwrap();
        assert_eq!(classify(&reports, &zeros).kind, VerdictKind::VacuumOnly);
    }

    #[test]
    fn classify_n4_no_solution() {
        let alphas = [c(0.3, 0.0); 4];
        let reports =
            cutoff_scan(4, &alphas, &[4, 5, 6], 1e-8, &MemoryBudget::default()).unwrap();
        let verdict = classify(&reports, &alphas);
        assert_eq!(verdict.kind, VerdictKind::NoSolution);
        // empirical plateau from the scans: sigma_min = sqrt(2) * 0.3
        assert!((verdict.evidence.sigma_min_trajectory[2] - 0.4243).abs() < 1e-3);
    }

    #[test]
    fn classify_n5_no_solution_via_lanczos() {
        let alphas = [c(0.2, 0.0), c(0.4, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.25, 0.0)];
        let reports =
            cutoff_scan(5, &alphas, &[3, 4, 5], 1e-8, &MemoryBudget::default()).unwrap();
        let verdict = classify(&reports, &alphas);
        assert_eq!(verdict.kind, VerdictKind::NoSolution);
        assert!(verdict.evidence.sigma_min_trajectory[2] > 0.1 * 0.1);
    }

    #[test]
    fn diagonal_ansatz_examples() {
        // vacuum against nonzero couplings: the raise term survives
        let r = diagonal_ansatz_residual(3, &[c(0.5, 0.0); 3], &[c(1.0, 0.0)], 6).unwrap();
        assert!((r - 0.5).abs() < 1e-12, "r = {r}");

        // the TMSV coefficients solve the N = 2 system to the tail bound
        let k = 20;
        let coeffs: Vec<C64> = {
            let raw: Vec<C64> = (0..=k).map(|m| c(0.5f64.powi(m as i32), 0.0)).collect();
            let n: f64 = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            raw.into_iter().map(|x| x / n).collect()
        };
        let r = diagonal_ansatz_residual(2, &[c(0.5, 0.0); 2], &coeffs, k).unwrap();
        assert!(
            r <= crate::closed_form::tmsv_tail_bound(0.5, k) * (1.0 + 1e-9),
            "r = {r:.3e}"
        );

        // the same geometric guess cannot satisfy the N = 3 system
        let coeffs: Vec<C64> = {
            let raw: Vec<C64> = (0..=6).map(|m| c(0.5f64.powi(m as i32), 0.0)).collect();
            let n: f64 = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            raw.into_iter().map(|x| x / n).collect()
        };
        let r = diagonal_ansatz_residual(3, &[c(0.5, 0.0); 3], &coeffs, 8).unwrap();
        assert!(r >= 0.4, "r = {r}");
    }

    #[test]
    fn diagonal_ansatz_requires_normalized_coeffs() {
        assert!(matches!(
            diagonal_ansatz_residual(3, &[c(0.5, 0.0); 3], &[c(0.5, 0.0)], 4),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn pairwise_chain_n2_coincides_with_cyclic() {
        let report = pairwise_chain_check(2, &[c(0.5, 0.0); 2], 24).unwrap();
        let bound = crate::closed_form::tmsv_tail_bound(0.5, 24) * (1.0 + 1e-9);
        assert!(report.max_pair_residual <= bound);
        assert!(report.cyclic_residuals.iter().all(|&r| r <= bound));
        assert!(report.min_linking_residual.is_none());
    }

    #[test]
    fn pairwise_chain_n4_passes_pairs_fails_cycle() {
        let report = pairwise_chain_check(4, &[c(0.5, 0.0); 4], 24).unwrap();
        let bound = crate::closed_form::tmsv_tail_bound(0.5, 24) * (1.0 + 1e-9);
        assert!(
            report.max_pair_residual <= bound,
            "pair residual {}",
            report.max_pair_residual
        );
        // linking residual: sqrt(n2_mean + |alpha|^2 (n3_mean + 1)) = sqrt(2/3)
        let link = report.min_linking_residual.unwrap();
        assert!((link - (2.0f64 / 3.0).sqrt()).abs() < 1e-6, "link = {link}");
        assert!(link >= 0.4);
    }

    #[test]
    fn pairwise_chain_zero_alpha_vacuum() {
        let report = pairwise_chain_check(4, &[c(0.0, 0.0); 4], 6).unwrap();
        assert!(report.max_pair_residual < 1e-14);
        assert!(report.cyclic_residuals.iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn constraint_residual_mode_bounds() {
        let vac = FockState::vacuum(2, 4).unwrap();
        assert!(constraint_residual(&vac, 0, 1, c(0.1, 0.0)).is_err());
        assert!(constraint_residual(&vac, 1, 3, c(0.1, 0.0)).is_err());
    }
}
