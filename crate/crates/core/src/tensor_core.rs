//! Dense tensor substrate: isometries, top tensors, density operators, partial traces
//! and numerical rank.
//!
//! Basis convention: composite indices are big-endian (site 0 is the most significant
//! digit) and matrices are indexed `<row|rho|col>`. The isometry is stored as the
//! `d^2 x d` matrix `V` with `V[(l1 * d + l2, u)] = lambda^u_{l1 l2}`, so that
//! `V |u> = sum lambda^u_{l1 l2} |l1 l2>`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, checked_pow, CMatrix, C64, ZERO};

/// Numerical tolerances. All defaults are `1e-10`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub iso: f64,
    pub herm: f64,
    pub psd: f64,
    pub trace: f64,
    /// Relative to the largest eigenvalue.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            iso: 1e-10,
            herm: 1e-10,
            psd: 1e-10,
            trace: 1e-10,
            rank: 1e-10,
        }
    }
}

pub const TAU_ISO: f64 = 1e-10;
pub const TAU_HERM: f64 = 1e-10;
pub const TAU_RANK: f64 = 1e-10;

/// A periodic chain of `n_sites` sites of local dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    d: usize,
    n_sites: usize,
    depth: Option<u32>,
}

impl LatticeSpec {
    pub fn ring(d: usize, n_sites: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::arg(format!("site dimension d = {d} must be >= 2")));
        }
        if n_sites < 2 {
            return Err(Error::arg(format!("N = {n_sites} must be >= 2")));
        }
        Ok(LatticeSpec {
            d,
            n_sites,
            depth: None,
        })
    }

    /// The `N = 2^depth` sites of a depth-`depth` binary tree.
    pub fn tree(d: usize, depth: u32) -> Result<Self> {
        if depth == 0 || depth >= usize::BITS {
            return Err(Error::arg(format!("tree depth n = {depth} out of range")));
        }
        let mut spec = Self::ring(d, 1usize << depth)?;
        spec.depth = Some(depth);
        Ok(spec)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn depth(&self) -> Option<u32> {
        self.depth
    }

    /// `d^N`, or `None` on overflow.
    pub fn hilbert_dim(&self) -> Option<usize> {
        checked_pow(self.d, self.n_sites)
    }
}

/// Outcome of a tolerance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub residual: f64,
    pub tol: f64,
}

/// The tree tensor `lambda` as a `d^2 x d` embedding `V` of one site into two.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    d: usize,
    v: CMatrix,
}

impl Isometry {
    /// Wraps a `d^2 x d` matrix. Only the shape is checked; see [`validate_isometry`].
    pub fn from_matrix(v: CMatrix) -> Result<Self> {
        let d = v.ncols();
        if d < 2 {
            return Err(Error::shape(format!(
                "isometry has {d} columns, need d >= 2"
            )));
        }
        if v.nrows() != d * d {
            return Err(Error::shape(format!(
                "isometry matrix is {}x{}, expected {}x{d}",
                v.nrows(),
                d,
                d * d
            )));
        }
        Ok(Isometry { d, v })
    }

    /// Builds `V` from sparse `(l1, l2, u, value)` entries; omitted entries are zero.
    pub fn from_entries(d: usize, entries: &[(usize, usize, usize, C64)]) -> Result<Self> {
        if d < 2 {
            return Err(Error::arg(format!("site dimension d = {d} must be >= 2")));
        }
        let mut v = CMatrix::zeros(d * d, d);
        for &(l1, l2, u, z) in entries {
            if l1 >= d || l2 >= d || u >= d {
                return Err(Error::shape(format!(
                    "isometry entry ({l1}, {l2}, {u}) out of range for d = {d}"
                )));
            }
            v[(l1 * d + l2, u)] = z;
        }
        Self::from_matrix(v)
    }

    /// `|0> -> |01>`, `|1> -> (|00> + |11>)/sqrt 2`, the qubit example whose parent
    /// Hamiltonian has a 32-fold ground space at N = 8.
    pub fn bell_branching() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_entries(
            2,
            &[
                (0, 1, 0, c(1.0, 0.0)),
                (0, 0, 1, c(h, 0.0)),
                (1, 1, 1, c(h, 0.0)),
            ],
        )
        .expect("static isometry")
    }

    /// `lambda^u_{l1 l2} = delta(u, l1) delta(l2, 0)`: every site grows an extra `|0>`.
    pub fn product(d: usize) -> Result<Self> {
        let entries: Vec<_> = (0..d).map(|u| (u, 0, u, c(1.0, 0.0))).collect();
        Self::from_entries(d, &entries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn entry(&self, l1: usize, l2: usize, u: usize) -> C64 {
        self.v[(l1 * self.d + l2, u)]
    }

    /// Nonzero entries as `(l1, l2, u, value)`, in index order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, C64)> {
        let d = self.d;
        let mut out = Vec::new();
        for l1 in 0..d {
            for l2 in 0..d {
                for u in 0..d {
                    let z = self.entry(l1, l2, u);
                    if z != ZERO {
                        out.push((l1, l2, u, z));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let report = validate_isometry(self, TAU_ISO);
        if report.pass {
            Ok(())
        } else {
            Err(Error::Validation {
                what: "isometry condition V^dagger V = I".into(),
                residual: report.residual,
            })
        }
    }
}

/// `||V^dagger V - I||_max <= tol`.
pub fn validate_isometry(lam: &Isometry, tol: f64) -> ValidationReport {
    let gram = lam.v.adjoint() * &lam.v;
    let residual = linalg::max_abs_diff(&gram, &linalg::identity(lam.d));
    ValidationReport {
        pass: residual <= tol,
        residual,
        tol,
    }
}

/// The `d x d` top tensor `C` closing the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct TopTensor {
    d: usize,
    c: CMatrix,
}

impl TopTensor {
    pub fn from_matrix(c: CMatrix) -> Result<Self> {
        if c.nrows() != c.ncols() {
            return Err(Error::shape(format!(
                "top tensor is {}x{}, expected square",
                c.nrows(),
                c.ncols()
            )));
        }
        if c.nrows() < 2 {
            return Err(Error::shape("top tensor needs d >= 2"));
        }
        Ok(TopTensor { d: c.nrows(), c })
    }

    pub fn from_entries(d: usize, entries: &[(usize, usize, C64)]) -> Result<Self> {
        let mut m = CMatrix::zeros(d, d);
        for &(l1, l2, z) in entries {
            if l1 >= d || l2 >= d {
                return Err(Error::shape(format!(
                    "top tensor entry ({l1}, {l2}) out of range for d = {d}"
                )));
            }
            m[(l1, l2)] = z;
        }
        Self::from_matrix(m)
    }

    /// `C = I / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::from_matrix(linalg::identity(d).scale(1.0 / (d as f64).sqrt())).expect("square")
    }

    /// `C_{00} = 1`.
    pub fn product(d: usize) -> Self {
        Self::from_entries(d, &[(0, 0, c(1.0, 0.0))]).expect("in range")
    }

    /// Seeded complex Gaussian tensor normalized to unit Frobenius norm.
    pub fn random(d: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::arg(format!("site dimension d = {d} must be >= 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x746f_705f_7465_6e73);
        let m = gaussian_matrix(&mut rng, d, d);
        let norm = m.norm();
        Self::from_matrix(m.unscale(norm))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for l1 in 0..self.d {
            for l2 in 0..self.d {
                let z = self.c[(l1, l2)];
                if z != ZERO {
                    out.push((l1, l2, z));
                }
            }
        }
        out
    }
}

/// `|sum |C|^2 - 1| <= tol`.
pub fn validate_top(c: &TopTensor, tol: f64) -> ValidationReport {
    let residual = (c.c.norm_squared() - 1.0).abs();
    ValidationReport {
        pass: residual <= tol,
        residual,
        tol,
    }
}

/// A labeled density operator on `nu` consecutive sites.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    d: usize,
    nu: usize,
    matrix: CMatrix,
    label: String,
}

impl DensityOp {
    /// Shape-checked constructor. Physical constraints are checked by [`DensityOp::validate`].
    pub fn new(d: usize, nu: usize, matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = checked_pow(d, nu)
            .ok_or_else(|| Error::arg(format!("d^nu overflows for d = {d}, nu = {nu}")))?;
        if d < 2 || nu == 0 {
            return Err(Error::arg(format!("invalid d = {d}, nu = {nu}")));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::shape(format!(
                "density operator is {}x{}, expected {dim}x{dim} for d = {d}, nu = {nu}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DensityOp {
            d,
            nu,
            matrix,
            label: label.into(),
        })
    }

    pub fn pure(
        d: usize,
        nu: usize,
        psi: &linalg::CVector,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::new(d, nu, psi * psi.adjoint(), label)
    }

    pub fn maximally_mixed(d: usize, nu: usize) -> Result<Self> {
        let dim = checked_pow(d, nu).ok_or_else(|| Error::arg("d^nu overflows"))?;
        Self::new(
            d,
            nu,
            linalg::identity(dim).unscale(dim as f64),
            "maximally mixed",
        )
    }

    /// Checks Hermiticity, positivity and unit trace.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let herm = linalg::hermiticity_residual(&self.matrix);
        if herm > tol.herm {
            return Err(Error::Validation {
                what: format!("{}: Hermiticity", self.label),
                residual: herm,
            });
        }
        let tr = (self.matrix.trace() - 1.0).norm();
        if tr > tol.trace {
            return Err(Error::Validation {
                what: format!("{}: unit trace", self.label),
                residual: tr,
            });
        }
        let min = linalg::eigvalsh(&self.matrix)[0];
        if min < -tol.psd {
            return Err(Error::Validation {
                what: format!("{}: positivity", self.label),
                residual: -min,
            });
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }
}

/// A single-site Hermitian observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    d: usize,
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::shape(format!(
                "observable is {}x{}, expected square with d >= 2",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_residual(&matrix);
        if herm > TAU_HERM {
            return Err(Error::Validation {
                what: "observable Hermiticity".into(),
                residual: herm,
            });
        }
        Ok(Observable {
            d: matrix.nrows(),
            matrix,
        })
    }

    /// Built-in qubit observables: `x`, `y`, `z` (Pauli), `p0`, `p1` (projectors), `id`.
    pub fn named(name: &str) -> Result<Self> {
        let m = match name {
            "x" => DMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]),
            "y" => DMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            "z" => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]),
            "p0" => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, ZERO]),
            "p1" => DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, c(1.0, 0.0)]),
            "id" => linalg::identity(2),
            other => return Err(Error::arg(format!("unknown observable name '{other}'"))),
        };
        Self::new(m)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// For each kept configuration and traced configuration, the full composite index.
/// `keep` lists sites (0-based) in the order they appear in the reduced operator.
pub(crate) fn site_index_map(d: usize, n_sites: usize, keep: &[usize]) -> Result<Vec<Vec<usize>>> {
    if keep.is_empty() {
        return Err(Error::arg("partial trace must keep at least one site"));
    }
    let mut seen = vec![false; n_sites];
    for &s in keep {
        if s >= n_sites {
            return Err(Error::arg(format!(
                "site {s} out of range for {n_sites} sites"
            )));
        }
        if seen[s] {
            return Err(Error::arg(format!("site {s} listed twice")));
        }
        seen[s] = true;
    }
    let traced: Vec<usize> = (0..n_sites).filter(|&s| !seen[s]).collect();
    let kept_dim = checked_pow(d, keep.len()).ok_or_else(|| Error::arg("dimension overflow"))?;
    let traced_dim =
        checked_pow(d, traced.len()).ok_or_else(|| Error::arg("dimension overflow"))?;
    let mut weight = vec![0usize; n_sites];
    let mut w = 1usize;
    for s in (0..n_sites).rev() {
        weight[s] = w;
        w *= d;
    }
    let kept_offsets = offsets(d, keep, &weight, kept_dim);
    let traced_offsets = offsets(d, &traced, &weight, traced_dim);
    Ok(kept_offsets
        .iter()
        .map(|&k| traced_offsets.iter().map(|&t| k + t).collect())
        .collect())
}

fn offsets(d: usize, sites: &[usize], weight: &[usize], count: usize) -> Vec<usize> {
    let mut buf = vec![0usize; sites.len()];
    (0..count)
        .map(|idx| {
            linalg::digits(idx, d, sites.len(), &mut buf);
            sites.iter().zip(&buf).map(|(&s, &x)| x * weight[s]).sum()
        })
        .collect()
}

/// Partial trace of a `d^nu x d^nu` matrix keeping the listed sites (0-based, in order).
pub fn partial_trace_matrix(m: &CMatrix, d: usize, nu: usize, keep: &[usize]) -> Result<CMatrix> {
    let dim = checked_pow(d, nu).ok_or_else(|| Error::arg("dimension overflow"))?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::shape(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let map = site_index_map(d, nu, keep)?;
    let k = map.len();
    Ok(CMatrix::from_fn(k, k, |r, col| {
        map[r].iter().zip(&map[col]).map(|(&i, &j)| m[(i, j)]).sum()
    }))
}

/// Reduced density operator on the listed sites (0-based, in the given order).
pub fn partial_trace(op: &DensityOp, keep: &[usize]) -> Result<DensityOp> {
    let m = partial_trace_matrix(&op.matrix, op.d, op.nu, keep)?;
    DensityOp::new(op.d, keep.len(), m, format!("{} (reduced)", op.label))
}

/// Number of eigenvalues above `tau_rank` times the largest eigenvalue.
pub fn numerical_rank(op: &DensityOp, tau_rank: f64) -> Result<usize> {
    numerical_rank_matrix(&op.matrix, tau_rank)
}

pub fn numerical_rank_matrix(m: &CMatrix, tau_rank: f64) -> Result<usize> {
    let herm = linalg::hermiticity_residual(m);
    if herm > TAU_HERM * m.nrows().max(1) as f64 {
        return Err(Error::Validation {
            what: "rank requires a Hermitian operator".into(),
            residual: herm,
        });
    }
    let ev = linalg::eigvalsh(m);
    let top = ev.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(ev.iter().filter(|&&x| x > tau_rank * top).count())
}

/// Deterministic Haar-like isometry: a seeded complex Gaussian `d^2 x d` matrix,
/// orthonormalized by QR, with each column's largest-magnitude entry made real positive.
pub fn random_isometry(d: usize, seed: u64) -> Result<Isometry> {
    if d < 2 {
        return Err(Error::arg(format!("site dimension d = {d} must be >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, d * d, d);
    let mut q = g.qr().q();
    fix_column_phases(&mut q);
    Isometry::from_matrix(q)
}

fn fix_column_phases(q: &mut CMatrix) {
    for j in 0..q.ncols() {
        let mut best = 0;
        for i in 0..q.nrows() {
            if q[(i, j)].norm() > q[(best, j)].norm() + 1e-15 {
                best = i;
            }
        }
        let z = q[(best, j)];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill keeps the draw order fixed.
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = c(re, im);
        }
    }
    m
}

/// Seeded random inputs for tests and examples.
pub mod random {
    use super::*;

    pub fn gaussian(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        gaussian_matrix(&mut rng, rows, cols)
    }

    /// `G G^dagger / Tr` for a Gaussian `G`; full rank almost surely.
    pub fn density(d: usize, nu: usize, seed: u64) -> DensityOp {
        let dim = checked_pow(d, nu).expect("small dimension");
        let g = gaussian(dim, dim, seed);
        let rho = &g * g.adjoint();
        let tr = rho.trace().re;
        DensityOp::new(d, nu, rho.unscale(tr), "random").expect("shape")
    }

    /// Density operator of rank `rank`.
    pub fn density_of_rank(d: usize, nu: usize, rank: usize, seed: u64) -> DensityOp {
        let dim = checked_pow(d, nu).expect("small dimension");
        let g = gaussian(dim, rank, seed);
        let rho = &g * g.adjoint();
        let tr = rho.trace().re;
        DensityOp::new(d, nu, rho.unscale(tr), "random").expect("shape")
    }

    pub fn hermitian(dim: usize, seed: u64) -> CMatrix {
        let g = gaussian(dim, dim, seed);
        linalg::hermitize(&g)
    }

    pub fn unitary(dim: usize, seed: u64) -> CMatrix {
        gaussian(dim, dim, seed).qr().q()
    }
}
