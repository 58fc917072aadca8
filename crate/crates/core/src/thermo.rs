//! Thermodynamic-limit states of an infinitely deep tree.
//!
//! The averaged one-site state is the fixed point of `D`. The averaged two-site state
//! solves `rho2 = (D_R (x) D_L)(rho2) / 2 + S(rho1) / 2`, which is summed in closed form
//! as `(Id - M/2)^{-1} S(rho1) / 2` with `M` the superoperator of `D_R (x) D_L`. Since
//! `M` is CPT its spectral radius is at most one and the system is always solvable.
//! Longer blocks follow by applying the extension channels to `rho2`. None of this
//! depends on the top tensor.

use serde_json::json;

use crate::channels::{Channel, TreeChannels};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::tensor_core::{numerical_rank, DensityOp, Isometry, TAU_RANK};

/// Residual bound for fixed points and self-consistency.
pub const TAU_FIX: f64 = 1e-10;
/// Distance from the unit circle below which an eigenvalue counts as peripheral.
pub const TAU_UNIT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub state: DensityOp,
    /// `max |ch(rho) - rho|`.
    pub residual: f64,
    pub unit_eigenvalue_multiplicity: usize,
    pub mixing: bool,
    /// Channel spectrum, sorted by descending modulus.
    pub spectrum: Vec<C64>,
}

/// Unique fixed point of a square CPT channel, from the eigenvalue-one eigenvector.
pub fn fixed_point(ch: &Channel) -> Result<FixedPointResult> {
    if !ch.is_square() {
        return Err(Error::shape("fixed point of a non-square channel"));
    }
    let spectrum = ch.eigenvalues()?;
    let multiplicity = spectrum
        .iter()
        .filter(|z| (*z - linalg::ONE).norm() <= TAU_UNIT)
        .count();
    let peripheral = spectrum
        .iter()
        .filter(|z| z.norm() >= 1.0 - TAU_UNIT)
        .count();
    if multiplicity == 0 {
        return Err(Error::Validation {
            what: "channel has no eigenvalue 1 (not trace preserving?)".into(),
            residual: spectrum
                .first()
                .map(|z| (z - linalg::ONE).norm())
                .unwrap_or(f64::NAN),
        });
    }
    if multiplicity > 1 {
        return Err(Error::DegenerateFixedPoint {
            multiplicity,
            peripheral,
        });
    }
    let n = ch.dim_in();
    let shifted = ch.matrix() - linalg::identity(n * n);
    let kernel = linalg::null_space(&shifted, 0.0, 1);
    let v: CVector = kernel.column(0).into_owned();
    let mut rho = linalg::hermitize(&linalg::unvec(&v, n));
    let tr = rho.trace();
    rho /= tr;
    let rho = linalg::hermitize(&rho);
    let residual = linalg::max_abs_diff(&ch.apply(&rho)?, &rho);
    let state = DensityOp::new(ch.d(), ch.nu_in(), rho, "fixed point")?;
    Ok(FixedPointResult {
        state,
        residual,
        unit_eigenvalue_multiplicity: multiplicity,
        mixing: peripheral == 1,
        spectrum,
    })
}

fn require_mixing(fp: &FixedPointResult) -> Result<()> {
    if fp.mixing {
        Ok(())
    } else {
        Err(Error::DegenerateFixedPoint {
            multiplicity: fp.unit_eigenvalue_multiplicity,
            peripheral: fp
                .spectrum
                .iter()
                .filter(|z| z.norm() >= 1.0 - TAU_UNIT)
                .count(),
        })
    }
}

/// `x = (Id - M/2)^{-1} source / 2`, the closed form of `sum_m 2^{-m-1} M^m source`.
pub(crate) fn geometric_solve(m: &Channel, source: &CMatrix) -> Result<CMatrix> {
    let n = m.matrix().nrows();
    let lhs = linalg::identity(n) - m.matrix().scale(0.5);
    let rhs = linalg::vec_of(source).scale(0.5);
    let x = linalg::solve(&lhs, &rhs).ok_or_else(|| Error::Validation {
        what: "Id - M/2 is singular".into(),
        residual: f64::NAN,
    })?;
    Ok(linalg::hermitize(&linalg::unvec(&x, m.dim_out())))
}

/// Thermodynamic-limit local states of one isometry.
#[derive(Clone, Debug)]
pub struct ThermoLimit {
    channels: TreeChannels,
    one_site: FixedPointResult,
    two_site: DensityOp,
    two_site_residual: f64,
}

impl ThermoLimit {
    pub fn solve(lam: &Isometry) -> Result<Self> {
        Self::from_channels(TreeChannels::new(lam)?)
    }

    pub fn from_channels(channels: TreeChannels) -> Result<Self> {
        let one_site = fixed_point(&channels.descend.mean)?;
        require_mixing(&one_site)?;
        let grown = channels.growth.apply(one_site.state.matrix())?;
        let rho2 = geometric_solve(&channels.cross, &grown)?;
        let lhs = (channels.cross.apply(&rho2)? + &grown).scale(0.5);
        let two_site_residual = linalg::max_abs_diff(&lhs, &rho2);
        let two_site = DensityOp::new(channels.d(), 2, rho2, "thermodynamic rho_2")?;
        Ok(ThermoLimit {
            channels,
            one_site: FixedPointResult {
                state: one_site.state.clone().with_label("thermodynamic rho_1"),
                ..one_site
            },
            two_site,
            two_site_residual,
        })
    }

    pub fn channels(&self) -> &TreeChannels {
        &self.channels
    }

    pub fn d(&self) -> usize {
        self.channels.d()
    }

    pub fn one_site(&self) -> &FixedPointResult {
        &self.one_site
    }

    pub fn rho1(&self) -> &DensityOp {
        &self.one_site.state
    }

    pub fn rho2(&self) -> &DensityOp {
        &self.two_site
    }

    /// `max |rho2 - (D_R (x) D_L)(rho2)/2 - S(rho1)/2|`.
    pub fn rho2_residual(&self) -> f64 {
        self.two_site_residual
    }

    /// Averaged `nu`-site state for `nu` in 1..=4.
    pub fn rho_nu(&self, nu: usize) -> Result<DensityOp> {
        match nu {
            1 => Ok(self.rho1().clone()),
            2 => Ok(self.rho2().clone()),
            3 | 4 => {
                let ext = self.channels.extension(nu)?;
                let m = linalg::hermitize(&ext.apply(self.two_site.matrix())?);
                DensityOp::new(self.d(), nu, m, format!("thermodynamic rho_{nu}"))
            }
            other => Err(Error::UnsupportedRange(format!(
                "thermodynamic states are available for nu in 1..=4, got {other}"
            ))),
        }
    }

    /// Fixed point of the pair-descend channel.
    pub fn sigma(&self) -> Result<FixedPointResult> {
        let fp = fixed_point(&self.channels.slashed)?;
        require_mixing(&fp)?;
        Ok(fp)
    }

    /// Averaged product of neighbouring one-site marginals,
    /// `(Id - M/2)^{-1} (D_L (x) D_R)(sigma) / 2`.
    pub fn eta(&self) -> Result<DensityOp> {
        let sigma = self.sigma()?;
        let source = self
            .channels
            .sibling_product()?
            .apply(sigma.state.matrix())?;
        let eta = geometric_solve(&self.channels.cross, &source)?;
        DensityOp::new(self.d(), 2, eta, "thermodynamic eta_11")
    }

    pub fn report(&self, nu: usize) -> Result<ThermoReport> {
        let rho = self.rho_nu(nu)?;
        Ok(ThermoReport {
            nu,
            rank: numerical_rank(&rho, TAU_RANK)?,
            eigenvalues: rho.eigenvalues(),
            residual: if nu == 1 {
                self.one_site.residual
            } else {
                self.two_site_residual
            },
            mixing: self.one_site.mixing,
        })
    }
}

pub fn rho2_infinity(lam: &Isometry) -> Result<DensityOp> {
    Ok(ThermoLimit::solve(lam)?.two_site)
}

pub fn eta_infinity(lam: &Isometry) -> Result<DensityOp> {
    ThermoLimit::solve(lam)?.eta()
}

pub fn rho_nu_infinity(lam: &Isometry, nu: usize) -> Result<DensityOp> {
    if !(1..=4).contains(&nu) {
        return Err(Error::UnsupportedRange(format!(
            "thermodynamic states are available for nu in 1..=4, got {nu}"
        )));
    }
    ThermoLimit::solve(lam)?.rho_nu(nu)
}

/// Summary of one thermodynamic state.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermoReport {
    pub nu: usize,
    pub rank: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
    pub mixing: bool,
}

impl ThermoReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nu": self.nu,
            "rank": self.rank,
            "eigenvalues": self.eigenvalues,
            "residual": self.residual,
            "mixing": self.mixing,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::build_descend;
    use crate::linalg::{c, max_abs_diff};
    use crate::tensor_core::{partial_trace, random_isometry, Tolerances};

    fn ket_proj(d: usize, nu: usize, digits: &[usize]) -> CMatrix {
        let dim = d.pow(nu as u32);
        let mut m = CMatrix::zeros(dim, dim);
        let i = linalg::from_digits(digits, d);
        m[(i, i)] = linalg::ONE;
        m
    }

    fn power_iterate(ch: &Channel, tol: f64) -> CMatrix {
        let n = ch.dim_in();
        let mut x = linalg::identity(n).unscale(n as f64);
        for _ in 0..100_000 {
            let next = ch.apply(&x).unwrap();
            let delta = max_abs_diff(&next, &x);
            x = next;
            if delta < tol {
                break;
            }
        }
        x
    }

    #[test]
    fn descend_fixed_points() {
        let fp = fixed_point(&build_descend(&Isometry::bell_branching()).unwrap().mean).unwrap();
        assert!(max_abs_diff(fp.state.matrix(), &linalg::identity(2).scale(0.5)) < 1e-12);
        assert!(fp.mixing);
        assert_eq!(fp.unit_eigenvalue_multiplicity, 1);
        // Spectrum {1, 2^{-1/2}, 0, 0} by direct 4x4 eigendecomposition.
        let moduli: Vec<f64> = fp.spectrum.iter().map(|z| z.norm()).collect();
        assert!((moduli[0] - 1.0).abs() < 1e-12);
        assert!((moduli[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(moduli[2] < 1e-12 && moduli[3] < 1e-12);

        let fp = fixed_point(&build_descend(&Isometry::product(2).unwrap()).unwrap().mean).unwrap();
        assert!(max_abs_diff(fp.state.matrix(), &ket_proj(2, 1, &[0])) < 1e-12);
    }

    #[test]
    fn identity_channel_is_degenerate() {
        let err = fixed_point(&Channel::identity(2, 1).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            Error::DegenerateFixedPoint {
                multiplicity: 4,
                ..
            }
        ));
    }

    #[test]
    fn slashed_fixed_point_matches_power_iteration() {
        let th = ThermoLimit::solve(&Isometry::bell_branching()).unwrap();
        let sigma = th.sigma().unwrap();
        assert!(sigma.residual <= 1e-10);
        let oracle = power_iterate(&th.channels().slashed, 1e-12);
        assert!(max_abs_diff(sigma.state.matrix(), &oracle) < 1e-9);
    }

    #[test]
    fn product_isometry_states() {
        let lam = Isometry::product(2).unwrap();
        let th = ThermoLimit::solve(&lam).unwrap();
        assert!(max_abs_diff(th.rho2().matrix(), &ket_proj(2, 2, &[0, 0])) < 1e-12);
        let eta = th.eta().unwrap();
        assert!(max_abs_diff(eta.matrix(), th.rho2().matrix()) < 1e-12);
        let rho4 = th.rho_nu(4).unwrap();
        assert!(max_abs_diff(rho4.matrix(), &ket_proj(2, 4, &[0, 0, 0, 0])) < 1e-12);
    }

    #[test]
    fn rho2_matches_truncated_series() {
        let th = ThermoLimit::solve(&Isometry::bell_branching()).unwrap();
        assert!(th.rho2_residual() <= 1e-10);
        let ch = th.channels();
        let mut term = ch.growth.apply(th.rho1().matrix()).unwrap().scale(0.5);
        let mut sum = term.clone();
        for _ in 1..=40 {
            term = ch.cross.apply(&term).unwrap().scale(0.5);
            sum += &term;
        }
        assert!(max_abs_diff(&sum, th.rho2().matrix()) < 1e-10);
    }

    #[test]
    fn eta_is_traceless_shift_of_rho2() {
        let th = ThermoLimit::solve(&Isometry::bell_branching()).unwrap();
        let eta = th.eta().unwrap();
        assert!((eta.matrix().trace() - c(1.0, 0.0)).norm() < 1e-12);
        assert!((th.rho2().matrix().trace() - eta.matrix().trace()).norm() < 1e-12);
        eta.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn marginals_of_rho2_equal_rho1() {
        for seed in 0..4 {
            let th = ThermoLimit::solve(&random_isometry(3, seed).unwrap()).unwrap();
            let a = partial_trace(th.rho2(), &[0]).unwrap();
            let b = partial_trace(th.rho2(), &[1]).unwrap();
            assert!(max_abs_diff(a.matrix(), th.rho1().matrix()) < 1e-10);
            assert!(max_abs_diff(b.matrix(), th.rho1().matrix()) < 1e-10);
        }
    }

    #[test]
    fn rho_nu_range_and_ranks() {
        let lam = Isometry::bell_branching();
        assert!(matches!(
            rho_nu_infinity(&lam, 5),
            Err(Error::UnsupportedRange(_))
        ));
        assert!(matches!(
            rho_nu_infinity(&lam, 0),
            Err(Error::UnsupportedRange(_))
        ));
        let th = ThermoLimit::solve(&lam).unwrap();
        assert!(th.report(3).unwrap().rank <= 8);
        assert!(th.report(4).unwrap().rank <= 12);
        for nu in 1..=4 {
            th.rho_nu(nu)
                .unwrap()
                .validate(&Tolerances::default())
                .unwrap();
        }
    }

    #[test]
    fn report_json_shape() {
        let th = ThermoLimit::solve(&Isometry::bell_branching()).unwrap();
        let v = th.report(2).unwrap().to_json();
        for key in ["nu", "rank", "eigenvalues", "residual", "mixing"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
