//! Parent Hamiltonians built from the kernel of the thermodynamic `nu`-site state.
//!
//! The local term is `H_nu = sum_k E_k |phi_k><phi_k|` over an orthonormal basis of
//! `ker rho_nu`, and the lattice operator is `(1/N) sum_alpha H_nu(alpha)` on a ring.
//! Every tree state annihilates each term, so the Hamiltonian is frustration free.

use std::str::FromStr;

use serde_json::json;

use crate::channels::TreeChannels;
use crate::error::{Error, Result};
use crate::linalg::{self, checked_pow, CMatrix, CVector, ZERO};
use crate::tensor_core::{numerical_rank, site_index_map, DensityOp, Isometry, TAU_RANK};
use crate::thermo::ThermoLimit;

/// Absolute tolerance for zero energies and degeneracy counting.
pub const TAU_GS: f64 = 1e-10;
/// Largest Hilbert space the exact diagonalization accepts (`d = 2`: `N <= 12`).
pub const DEFAULT_MAX_ED_DIM: usize = 4096;
pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

#[derive(Clone, Debug, Default, PartialEq)]
pub enum KernelWeights {
    #[default]
    Uniform,
    Explicit(Vec<f64>),
}

impl KernelWeights {
    pub fn resolve(&self, kernel_dim: usize) -> Result<Vec<f64>> {
        match self {
            KernelWeights::Uniform => Ok(vec![1.0; kernel_dim]),
            KernelWeights::Explicit(w) => {
                if w.len() != kernel_dim {
                    return Err(Error::arg(format!(
                        "{} weights given for a {kernel_dim}-dimensional kernel",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::arg(format!("weight {bad} is not strictly positive")));
                }
                Ok(w.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InteractionLength {
    /// Smallest `nu` in 2..=4 with a nontrivial kernel.
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for InteractionLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(InteractionLength::Auto),
            _ => match s.parse::<usize>() {
                Ok(nu @ 2..=4) => Ok(InteractionLength::Fixed(nu)),
                _ => Err(Error::arg(format!(
                    "interaction length '{s}' is not auto, 2, 3 or 4"
                ))),
            },
        }
    }
}

/// A local parent term together with the kernel it was built from.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub d: usize,
    pub nu: usize,
    pub h_term: CMatrix,
    /// Orthonormal kernel vectors of the `nu`-site state.
    pub kernel: Vec<CVector>,
    pub weights: Vec<f64>,
    /// Whether `assemble` divides by `N`.
    pub normalized: bool,
    /// `max |H_nu rho_nu|` for the state the kernel came from.
    pub annihilation_residual: f64,
}

impl HamiltonianSpec {
    /// `sum_k E_k |phi_k><phi_k|` for explicit kernel vectors.
    pub fn from_kernel(
        d: usize,
        nu: usize,
        kernel: Vec<CVector>,
        weights: &KernelWeights,
    ) -> Result<Self> {
        let dim = checked_pow(d, nu).ok_or_else(|| Error::arg("d^nu overflows"))?;
        if let Some(v) = kernel.iter().find(|v| v.len() != dim) {
            return Err(Error::shape(format!(
                "kernel vector has length {}, expected {dim}",
                v.len()
            )));
        }
        let weights = weights.resolve(kernel.len())?;
        let mut h = CMatrix::zeros(dim, dim);
        for (v, &e) in kernel.iter().zip(&weights) {
            h += (v * v.adjoint()).scale(e);
        }
        Ok(HamiltonianSpec {
            d,
            nu,
            h_term: linalg::hermitize(&h),
            kernel,
            weights,
            normalized: true,
            annihilation_residual: 0.0,
        })
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d": self.d,
            "nu": self.nu,
            "kernel_dim": self.kernel_dim(),
            "weights": self.weights,
            "normalized": self.normalized,
            "annihilation_residual": self.annihilation_residual,
            "h_term": crate::correlators::operator_json(&self.h_term),
        })
    }
}

/// Orthonormal eigenvectors with eigenvalue at most `tau` times the largest one.
pub fn kernel_basis(rho: &DensityOp, tau: f64) -> Vec<CVector> {
    let (values, vectors) = linalg::eigh(rho.matrix());
    let top = values.last().copied().unwrap_or(0.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &x)| top <= 0.0 || x <= tau * top)
        .map(|(i, _)| vectors.column(i).into_owned())
        .collect()
}

pub fn build_interaction(
    lam: &Isometry,
    weights: &KernelWeights,
    nu: InteractionLength,
) -> Result<HamiltonianSpec> {
    build_from_limit(&ThermoLimit::solve(lam)?, weights, nu)
}

pub fn build_from_limit(
    limit: &ThermoLimit,
    weights: &KernelWeights,
    nu: InteractionLength,
) -> Result<HamiltonianSpec> {
    let candidates: Vec<usize> = match nu {
        InteractionLength::Auto => vec![2, 3, 4],
        InteractionLength::Fixed(n @ 2..=4) => vec![n],
        InteractionLength::Fixed(n) => {
            return Err(Error::UnsupportedRange(format!(
                "parent terms are built for nu in 2..=4, got {n}"
            )))
        }
    };
    for &nu in &candidates {
        let rho = limit.rho_nu(nu)?;
        let kernel = kernel_basis(&rho, TAU_RANK);
        if kernel.is_empty() {
            continue;
        }
        let mut hs = HamiltonianSpec::from_kernel(limit.d(), nu, kernel, weights)?;
        hs.annihilation_residual = linalg::max_abs(&(&hs.h_term * rho.matrix()));
        return Ok(hs);
    }
    match nu {
        InteractionLength::Auto => Err(Error::NoKernel { tau: TAU_RANK }),
        InteractionLength::Fixed(n) => Err(Error::arg(format!(
            "the {n}-site state has full rank, so no parent term of that length exists"
        ))),
    }
}

fn ed_dim(d: usize, n_sites: usize, max_dim: usize) -> Result<usize> {
    let required = (d as u128).checked_pow(n_sites as u32).unwrap_or(u128::MAX);
    if required > max_dim as u128 {
        return Err(Error::Resource {
            what: "exact diagonalization dimension",
            required,
            budget: max_dim as u128,
        });
    }
    Ok(required as usize)
}

fn window(alpha: usize, nu: usize, n_sites: usize) -> Vec<usize> {
    (0..nu).map(|j| (alpha + j) % n_sites).collect()
}

fn check_lattice(hs: &HamiltonianSpec, n_sites: usize) -> Result<()> {
    if n_sites < hs.nu {
        return Err(Error::arg(format!(
            "N = {n_sites} is shorter than the interaction length {}",
            hs.nu
        )));
    }
    Ok(())
}

/// `H_nu` placed on sites `alpha, ..., alpha + nu - 1` (mod `N`).
pub fn local_term(hs: &HamiltonianSpec, n_sites: usize, alpha: usize) -> Result<CMatrix> {
    local_term_with_budget(hs, n_sites, alpha, DEFAULT_MAX_ED_DIM)
}

pub fn local_term_with_budget(
    hs: &HamiltonianSpec,
    n_sites: usize,
    alpha: usize,
    max_dim: usize,
) -> Result<CMatrix> {
    check_lattice(hs, n_sites)?;
    let dim = ed_dim(hs.d, n_sites, max_dim)?;
    let mut h = CMatrix::zeros(dim, dim);
    add_term(&mut h, hs, n_sites, alpha, 1.0)?;
    Ok(h)
}

fn add_term(
    h: &mut CMatrix,
    hs: &HamiltonianSpec,
    n_sites: usize,
    alpha: usize,
    scale: f64,
) -> Result<()> {
    let map = site_index_map(hs.d, n_sites, &window(alpha, hs.nu, n_sites))?;
    let local = hs.h_term.len().isqrt();
    for kr in 0..local {
        for kc in 0..local {
            let z = hs.h_term[(kr, kc)] * scale;
            if z == ZERO {
                continue;
            }
            for (&r, &c) in map[kr].iter().zip(&map[kc]) {
                h[(r, c)] += z;
            }
        }
    }
    Ok(())
}

/// `<psi| H_nu(alpha) |psi>` without forming the lattice operator.
pub fn local_expectation(
    hs: &HamiltonianSpec,
    n_sites: usize,
    alpha: usize,
    psi: &CVector,
) -> Result<f64> {
    check_lattice(hs, n_sites)?;
    let map = site_index_map(hs.d, n_sites, &window(alpha, hs.nu, n_sites))?;
    if psi.len() != map.len() * map[0].len() {
        return Err(Error::shape("state does not live on this lattice"));
    }
    let local = map.len();
    let mut acc = ZERO;
    for t in 0..map[0].len() {
        let block = CVector::from_fn(local, |k, _| psi[map[k][t]]);
        acc += (block.adjoint() * &hs.h_term * &block)[(0, 0)];
    }
    Ok(acc.re)
}

/// `(1/N) sum_alpha H_nu(alpha)` on a ring of `N` sites (no `1/N` if not normalized).
pub fn assemble(hs: &HamiltonianSpec, n_sites: usize) -> Result<CMatrix> {
    assemble_with_budget(hs, n_sites, DEFAULT_MAX_ED_DIM)
}

pub fn assemble_with_budget(
    hs: &HamiltonianSpec,
    n_sites: usize,
    max_dim: usize,
) -> Result<CMatrix> {
    check_lattice(hs, n_sites)?;
    let dim = ed_dim(hs.d, n_sites, max_dim)?;
    let scale = if hs.normalized {
        1.0 / n_sites as f64
    } else {
        1.0
    };
    let mut h = CMatrix::zeros(dim, dim);
    for alpha in 0..n_sites {
        add_term(&mut h, hs, n_sites, alpha, scale)?;
    }
    Ok(linalg::hermitize(&h))
}

/// One-site cyclic shift: site `j` moves to site `j + 1`.
pub fn translate(psi: &CVector, d: usize, n_sites: usize) -> CVector {
    let dim = psi.len();
    debug_assert_eq!(Some(dim), checked_pow(d, n_sites));
    let top = dim / d;
    // Big-endian digits: the new leading digit is the old last one.
    CVector::from_fn(dim, |i, _| psi[(i % top) * d + i / top])
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Eigenvalue counts over `[0, 1]` after dividing by the largest eigenvalue.
pub fn histogram(spectrum: &[f64], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let top = spectrum.iter().copied().fold(0.0, f64::max);
    let mut counts = vec![0usize; bins];
    for &e in spectrum {
        let x = if top > 0.0 {
            (e / top).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = ((x * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            left: k as f64 / bins as f64,
            right: (k + 1) as f64 / bins as f64,
            count,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundSpaceReport {
    pub n_sites: usize,
    /// Ascending.
    pub spectrum: Vec<f64>,
    pub ground_energy: f64,
    pub degeneracy: usize,
    pub tau_gs: f64,
    pub histogram: Vec<HistogramBin>,
    /// Every zero-energy eigenvector leaves each local term at zero.
    pub unfrustrated: Option<bool>,
    /// `max <phi|H_nu(alpha)|phi>` over ground vectors and positions.
    pub max_local_energy: Option<f64>,
}

impl GroundSpaceReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n_sites": self.n_sites,
            "dimension": self.spectrum.len(),
            "spectrum": self.spectrum,
            "ground_energy": self.ground_energy,
            "degeneracy": self.degeneracy,
            "tau_gs": self.tau_gs,
            "histogram": self.histogram.iter().map(|b| json!({
                "left": b.left, "right": b.right, "count": b.count,
            })).collect::<Vec<_>>(),
            "unfrustrated": self.unfrustrated,
            "max_local_energy": self.max_local_energy,
        })
    }

    /// Rows `bin_left, bin_right, count`.
    pub fn histogram_rows(&self) -> Vec<Vec<String>> {
        self.histogram
            .iter()
            .map(|b| {
                vec![
                    crate::io::format_f64(b.left),
                    crate::io::format_f64(b.right),
                    b.count.to_string(),
                ]
            })
            .collect()
    }

    /// Rows `index, energy`.
    pub fn spectrum_rows(&self) -> Vec<Vec<String>> {
        self.spectrum
            .iter()
            .enumerate()
            .map(|(i, &e)| vec![i.to_string(), crate::io::format_f64(e)])
            .collect()
    }
}

/// Full spectrum of a Hermitian operator with the ground space counted at `tau_gs`.
pub fn diagonalize(h: &CMatrix, n_sites: usize, tau_gs: f64) -> GroundSpaceReport {
    let spectrum = linalg::eigvalsh(h);
    report_from_spectrum(spectrum, n_sites, tau_gs)
}

fn report_from_spectrum(spectrum: Vec<f64>, n_sites: usize, tau_gs: f64) -> GroundSpaceReport {
    let ground_energy = spectrum.first().copied().unwrap_or(0.0);
    let degeneracy = spectrum
        .iter()
        .filter(|&&e| e <= ground_energy + tau_gs)
        .count();
    GroundSpaceReport {
        n_sites,
        histogram: histogram(&spectrum, DEFAULT_HISTOGRAM_BINS),
        spectrum,
        ground_energy,
        degeneracy,
        tau_gs,
        unfrustrated: None,
        max_local_energy: None,
    }
}

/// Assembles and diagonalizes the parent Hamiltonian, checking every ground vector
/// against every local term.
pub fn diagonalize_parent(
    hs: &HamiltonianSpec,
    n_sites: usize,
    tau_gs: f64,
) -> Result<GroundSpaceReport> {
    let h = assemble(hs, n_sites)?;
    let (spectrum, vectors) = linalg::eigh(&h);
    let mut report = report_from_spectrum(spectrum, n_sites, tau_gs);
    if report.ground_energy.abs() <= tau_gs {
        let mut worst: f64 = 0.0;
        for j in 0..report.degeneracy {
            let phi = vectors.column(j).into_owned();
            for alpha in 0..n_sites {
                worst = worst.max(local_expectation(hs, n_sites, alpha, &phi)?);
            }
        }
        report.unfrustrated = Some(worst <= tau_gs);
        report.max_local_energy = Some(worst);
    } else {
        report.unfrustrated = Some(false);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceReport {
    pub n_sites: usize,
    /// Rank of `{V^{(x)N/2} |psi_j>}`.
    pub dim_s: usize,
    pub dim_ts: usize,
    pub dim_sum: usize,
    /// `max_j |H phi_j|` over both the grown vectors and their translates.
    pub max_energy_residual: f64,
    /// `max_{j, alpha} <phi_j|H_nu(alpha)|phi_j>`.
    pub max_local_energy: f64,
    pub annihilated: bool,
}

impl SubspaceReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n_sites": self.n_sites,
            "dim_s": self.dim_s,
            "dim_ts": self.dim_ts,
            "dim_sum": self.dim_sum,
            "max_energy_residual": self.max_energy_residual,
            "max_local_energy": self.max_local_energy,
            "annihilated": self.annihilated,
        })
    }
}

/// `V^{(x) k}` as a `d^{2k} x d^k` matrix.
fn grown_basis(lam: &Isometry, k: usize) -> CMatrix {
    let mut m = lam.matrix().clone();
    for _ in 1..k {
        m = linalg::kron(&m, lam.matrix());
    }
    m
}

/// Checks that every state grown by one level from an arbitrary `N/2`-site state is an
/// unfrustrated zero-energy state, and measures the span of those states and their
/// one-site translates.
pub fn grown_subspace_check(
    lam: &Isometry,
    hs: &HamiltonianSpec,
    n_sites: usize,
) -> Result<SubspaceReport> {
    if n_sites % 2 != 0 {
        return Err(Error::arg(format!(
            "N = {n_sites} is odd; grown states need an even ring"
        )));
    }
    if lam.d() != hs.d {
        return Err(Error::shape("isometry and Hamiltonian have different d"));
    }
    let h = assemble(hs, n_sites)?;
    let phi = grown_basis(lam, n_sites / 2);
    let shifted = CMatrix::from_columns(
        &(0..phi.ncols())
            .map(|j| translate(&phi.column(j).into_owned(), hs.d, n_sites))
            .collect::<Vec<_>>(),
    );
    let mut max_energy_residual: f64 = 0.0;
    let mut max_local_energy: f64 = 0.0;
    for block in [&phi, &shifted] {
        let hphi = &h * block;
        for j in 0..block.ncols() {
            max_energy_residual = max_energy_residual.max(hphi.column(j).norm());
            let v = block.column(j).into_owned();
            for alpha in 0..n_sites {
                max_local_energy = max_local_energy.max(local_expectation(hs, n_sites, alpha, &v)?);
            }
        }
    }
    let mut both = CMatrix::zeros(phi.nrows(), 2 * phi.ncols());
    both.columns_mut(0, phi.ncols()).copy_from(&phi);
    both.columns_mut(phi.ncols(), phi.ncols())
        .copy_from(&shifted);
    Ok(SubspaceReport {
        n_sites,
        dim_s: linalg::svd_rank(&phi, TAU_RANK),
        dim_ts: linalg::svd_rank(&shifted, TAU_RANK),
        dim_sum: linalg::svd_rank(&both, TAU_RANK),
        max_energy_residual,
        max_local_energy,
        annihilated: max_energy_residual <= TAU_GS && max_local_energy <= TAU_GS,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullityReport {
    pub nu: usize,
    /// Rank of the state whose full support the argument needs (`rho_2` for `nu = 3`,
    /// `rho_3` for `nu = 4`) and its full dimension.
    pub support_rank: usize,
    pub support_dim: usize,
    pub precondition_met: bool,
    /// `max |A(H)|` for each map that feeds the `nu`-site state.
    pub branches: Vec<(String, f64)>,
    pub residual: f64,
    /// `|Tr[rho_2 A_{2->nu}(H)]|`.
    pub trace_residual: f64,
}

impl NullityReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nu": self.nu,
            "support_rank": self.support_rank,
            "support_dim": self.support_dim,
            "precondition_met": self.precondition_met,
            "branches": self.branches.iter().map(|(n, r)| json!({"map": n, "residual": r})).collect::<Vec<_>>(),
            "residual": self.residual,
            "trace_residual": self.trace_residual,
        })
    }
}

/// Pulls the parent term back through the channels that generate the `nu`-site state.
///
/// For `nu = 3` the map is the adjoint of `D_{2->3}`. For `nu = 4` the four-site state is
/// `(S (x) S)(rho_2)/2 + (D_R (x) S (x) D_L)(rho_3)/2`, so both adjoints are reported.
pub fn adjoint_nullity_check(lam: &Isometry, hs: &HamiltonianSpec) -> Result<NullityReport> {
    let limit = ThermoLimit::solve(lam)?;
    nullity_from_limit(&limit, hs)
}

pub fn nullity_from_limit(limit: &ThermoLimit, hs: &HamiltonianSpec) -> Result<NullityReport> {
    if limit.d() != hs.d {
        return Err(Error::shape("isometry and Hamiltonian have different d"));
    }
    let ch: &TreeChannels = limit.channels();
    let rho2 = limit.rho2();
    let ext = ch.extension(hs.nu).map_err(|_| {
        Error::UnsupportedRange(format!(
            "adjoint nullity is defined for nu in {{3, 4}}, got {}",
            hs.nu
        ))
    })?;
    let pulled = ext.adjoint().apply(&hs.h_term)?;
    let trace_residual = linalg::trace_product(rho2.matrix(), &pulled).norm();
    let (support, branches) = match hs.nu {
        3 => (
            rho2.clone(),
            vec![("adjoint D_2->3".to_string(), linalg::max_abs(&pulled))],
        ),
        _ => {
            let ss = ch.growth.tensor(&ch.growth)?;
            let a = ss.adjoint().apply(&hs.h_term)?;
            let b = ch.middle_growth()?.adjoint().apply(&hs.h_term)?;
            (
                limit.rho_nu(3)?,
                vec![
                    ("adjoint S(x)S".to_string(), linalg::max_abs(&a)),
                    ("adjoint D_R(x)S(x)D_L".to_string(), linalg::max_abs(&b)),
                ],
            )
        }
    };
    let support_rank = numerical_rank(&support, TAU_RANK)?;
    let residual = branches.iter().map(|b| b.1).fold(0.0, f64::max);
    Ok(NullityReport {
        nu: hs.nu,
        support_rank,
        support_dim: support.dim(),
        precondition_met: support_rank == support.dim(),
        branches,
        residual,
        trace_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_state::build_state;
    use crate::linalg::c;
    use crate::tensor_core::{random_isometry, TopTensor};

    fn bell_parent() -> HamiltonianSpec {
        build_interaction(
            &Isometry::bell_branching(),
            &KernelWeights::Uniform,
            InteractionLength::Auto,
        )
        .unwrap()
    }

    fn basis(dim: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        v[i] = linalg::ONE;
        v
    }

    #[test]
    fn kernel_basis_examples() {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        let rho = DensityOp::new(2, 2, m, "diag").unwrap();
        let k = kernel_basis(&rho, TAU_RANK);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(v[0].norm() < 1e-14 && v[1].norm() < 1e-14);
        }
        let mixed = DensityOp::maximally_mixed(2, 2).unwrap();
        assert!(kernel_basis(&mixed, TAU_RANK).is_empty());
    }

    #[test]
    fn interaction_length_parsing() {
        assert_eq!(
            "auto".parse::<InteractionLength>().unwrap(),
            InteractionLength::Auto
        );
        assert_eq!(
            "3".parse::<InteractionLength>().unwrap(),
            InteractionLength::Fixed(3)
        );
        assert!("5".parse::<InteractionLength>().is_err());
        assert!("x".parse::<InteractionLength>().is_err());
    }

    #[test]
    fn weights_are_validated() {
        assert_eq!(KernelWeights::Uniform.resolve(3).unwrap(), vec![1.0; 3]);
        assert!(KernelWeights::Explicit(vec![1.0, 0.0]).resolve(2).is_err());
        assert!(KernelWeights::Explicit(vec![1.0]).resolve(2).is_err());
    }

    #[test]
    fn auto_selection() {
        let hs = bell_parent();
        assert_eq!(hs.nu, 4);
        assert_eq!(hs.kernel_dim(), 4);
        assert!(hs.annihilation_residual <= 1e-10);

        let hs = build_interaction(
            &Isometry::product(2).unwrap(),
            &KernelWeights::Uniform,
            InteractionLength::Auto,
        )
        .unwrap();
        assert_eq!((hs.nu, hs.kernel_dim()), (2, 3));

        let hs = build_interaction(
            &random_isometry(3, 7).unwrap(),
            &KernelWeights::Uniform,
            InteractionLength::Auto,
        )
        .unwrap();
        assert_eq!(hs.nu, 3);
        assert!(hs.kernel_dim() >= 9);
        assert!(hs.annihilation_residual <= 1e-10);

        let err = build_interaction(
            &Isometry::bell_branching(),
            &KernelWeights::Uniform,
            InteractionLength::Fixed(2),
        );
        assert!(err.is_err());
    }

    #[test]
    fn assemble_examples() {
        let id = HamiltonianSpec::from_kernel(
            2,
            2,
            (0..4).map(|i| basis(4, i)).collect(),
            &KernelWeights::Uniform,
        )
        .unwrap();
        for n in 2..6 {
            let h = assemble(&id, n).unwrap();
            assert!(linalg::max_abs_diff(&h, &linalg::identity(1 << n)) < 1e-14);
        }
        let p11 =
            HamiltonianSpec::from_kernel(2, 2, vec![basis(4, 3)], &KernelWeights::Uniform).unwrap();
        let h = assemble(&p11, 2).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(3, 3)] = linalg::ONE;
        assert!(linalg::max_abs_diff(&h, &expect) < 1e-14);
        assert!(assemble(&p11, 1).is_err());
        assert!(matches!(assemble(&p11, 13), Err(Error::Resource { .. })));
    }

    #[test]
    fn translation_is_a_cyclic_shift() {
        let d = 3;
        let n = 4;
        let mut digits = [0usize; 4];
        for i in 0..81 {
            let t = translate(&basis(81, i), d, n);
            let j = t.iter().position(|z| *z == linalg::ONE).unwrap();
            linalg::digits(i, d, n, &mut digits);
            let mut moved = [0usize; 4];
            for s in 0..n {
                moved[(s + 1) % n] = digits[s];
            }
            assert_eq!(j, linalg::from_digits(&moved, d));
        }
    }

    #[test]
    fn bell_degeneracies() {
        let hs = bell_parent();
        for (n, deg) in [(4, 8), (6, 16), (8, 32)] {
            let rep = diagonalize_parent(&hs, n, TAU_GS).unwrap();
            assert!(rep.ground_energy.abs() <= 1e-10);
            assert_eq!(rep.degeneracy, deg, "N = {n}");
            assert_eq!(rep.unfrustrated, Some(true));
        }
        for n in [5, 7] {
            let rep = diagonalize_parent(&hs, n, TAU_GS).unwrap();
            assert!(rep.ground_energy > 1e-6, "N = {n}: {}", rep.ground_energy);
        }
    }

    #[test]
    fn grown_subspace() {
        let lam = Isometry::bell_branching();
        let hs = bell_parent();
        let rep = grown_subspace_check(&lam, &hs, 8).unwrap();
        assert_eq!((rep.dim_s, rep.dim_sum), (16, 32));
        assert!(rep.annihilated);
        let rep = grown_subspace_check(&lam, &hs, 4).unwrap();
        assert!(rep.max_local_energy <= 1e-10);
        assert!(grown_subspace_check(&lam, &hs, 5).is_err());
    }

    #[test]
    fn rank_deficient_pairs_break_the_grown_subspace() {
        // rho_2 = |00><00| has no full support, so only V (x) V |00> = |0000> survives.
        let product = Isometry::product(2).unwrap();
        let hs =
            build_interaction(&product, &KernelWeights::Uniform, InteractionLength::Auto).unwrap();
        let rep = grown_subspace_check(&product, &hs, 4).unwrap();
        assert_eq!(rep.dim_s, 4);
        assert!(!rep.annihilated);
        let h = assemble(&hs, 4).unwrap();
        assert!((&h * basis(16, 0)).norm() < 1e-14);
        let rep = diagonalize_parent(&hs, 4, TAU_GS).unwrap();
        assert_eq!(rep.degeneracy, 1);
    }

    #[test]
    fn tree_state_and_translates_are_ground_states() {
        let lam = Isometry::bell_branching();
        let hs = bell_parent();
        let psi = build_state(&lam, &TopTensor::random(2, 3).unwrap(), 3).unwrap();
        let h = assemble(&hs, 8).unwrap();
        let mut v = psi.amplitudes().clone();
        for _ in 0..8 {
            assert!((&h * &v).norm() <= 1e-10);
            v = translate(&v, 2, 8);
        }
    }

    #[test]
    fn rescaling_weights_keeps_the_ground_space() {
        let lam = Isometry::bell_branching();
        let base = bell_parent();
        let scaled = build_interaction(
            &lam,
            &KernelWeights::Explicit(vec![3.5; 4]),
            InteractionLength::Auto,
        )
        .unwrap();
        let a = diagonalize_parent(&base, 6, TAU_GS).unwrap();
        let b = diagonalize_parent(&scaled, 6, TAU_GS).unwrap();
        assert_eq!(a.degeneracy, b.degeneracy);
        for (x, y) in a.spectrum.iter().zip(&b.spectrum) {
            assert!((3.5 * x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn nullity_for_qutrits() {
        let lam = random_isometry(3, 7).unwrap();
        for w in [
            KernelWeights::Uniform,
            KernelWeights::Explicit(vec![5.0; 9]),
        ] {
            let hs = build_interaction(&lam, &w, InteractionLength::Fixed(3)).unwrap();
            let rep = adjoint_nullity_check(&lam, &hs).unwrap();
            assert!(rep.precondition_met);
            assert!(rep.residual <= 1e-10, "{rep:?}");
            assert!(rep.trace_residual <= 1e-10);
        }
    }

    #[test]
    fn nullity_for_qubits_at_four_sites() {
        let lam = Isometry::bell_branching();
        let rep = adjoint_nullity_check(&lam, &bell_parent()).unwrap();
        assert!(rep.precondition_met);
        assert_eq!(rep.branches.len(), 2);
        assert!(rep.residual <= 1e-10, "{rep:?}");
        assert!(rep.trace_residual <= 1e-10);
    }

    #[test]
    fn histogram_rescales_to_the_top() {
        let bins = histogram(&[0.0, 0.0, 0.5, 2.0], 4);
        assert_eq!(
            bins.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![2, 1, 0, 1]
        );
        assert_eq!(bins[3].right, 1.0);
    }
}
