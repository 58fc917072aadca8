//! Two-point connected correlators at distances `2^m` and the exponents that govern them.
//!
//! In the thermodynamic limit the averaged connected correlator of `Theta (x) Theta'` at
//! distance `2^m` is `Tr[(Theta (x) Theta') P^m(rho2 - eta)]` where `P` is the pair
//! descend channel. Its spectrum `kappa` gives power laws `Delta^{log2 kappa}`.

use serde_json::json;

use crate::channels::{Channel, TreeChannels};
use crate::error::{Error, Result};
use crate::finite_state::LevelStates;
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::tensor_core::{Isometry, Observable, TopTensor, TAU_RANK};
use crate::thermo::ThermoLimit;

/// Eigenvalues closer than this (times `max(1, |kappa|)`) form one cluster.
pub const TAU_CLUSTER: f64 = 1e-6;
/// `|A(X) - kappa X|_F <= TAU_EIGENOP |X|_F` makes `X` an eigenoperator.
pub const TAU_EIGENOP: f64 = 1e-8;
/// Tolerance on successive ratios of an eigenoperator series.
pub const TAU_RATIO: f64 = 1e-8;
/// Series whose values all fall below this are reported as degenerate.
pub const DEGENERATE_FLOOR: f64 = 1e-14;
/// Moduli below this are treated as exact zeros of the spectrum.
const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CorrelatorQuery {
    pub theta: Observable,
    pub theta_prime: Observable,
    pub m: u32,
}

impl CorrelatorQuery {
    pub fn new(theta: Observable, theta_prime: Observable, m: u32) -> Result<Self> {
        if theta.d() != theta_prime.d() {
            return Err(Error::shape(
                "observables act on different local dimensions",
            ));
        }
        Ok(CorrelatorQuery {
            theta,
            theta_prime,
            m,
        })
    }

    pub fn delta_alpha(&self) -> Option<u64> {
        1u64.checked_shl(self.m)
    }

    /// `Theta (x) Theta'`.
    pub fn pair_operator(&self) -> CMatrix {
        linalg::kron(self.theta.matrix(), self.theta_prime.matrix())
    }
}

/// Thermodynamic-limit correlator engine for one isometry.
#[derive(Clone, Debug)]
pub struct ThermoCorrelator {
    pair_descend: Channel,
    /// `rho2 - eta`, traceless.
    connected: CMatrix,
}

impl ThermoCorrelator {
    pub fn new(lam: &Isometry) -> Result<Self> {
        Self::from_limit(&ThermoLimit::solve(lam)?)
    }

    pub fn from_limit(limit: &ThermoLimit) -> Result<Self> {
        let eta = limit.eta()?;
        Ok(ThermoCorrelator {
            pair_descend: limit.channels().slashed.clone(),
            connected: limit.rho2().matrix() - eta.matrix(),
        })
    }

    pub fn d(&self) -> usize {
        self.pair_descend.d()
    }

    pub fn pair_descend(&self) -> &Channel {
        &self.pair_descend
    }

    pub fn connected_state(&self) -> &CMatrix {
        &self.connected
    }

    fn check_operator(&self, x: &CMatrix) -> Result<()> {
        let dim = self.d() * self.d();
        if x.shape() != (dim, dim) {
            return Err(Error::shape(format!(
                "two-site operator must be {dim}x{dim}, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// `Tr[X P^m(rho2 - eta)]` with `P^m` formed by repeated squaring.
    pub fn operator_value(&self, x: &CMatrix, m: u32) -> Result<C64> {
        self.check_operator(x)?;
        let evolved = self.pair_descend.power(m as u64)?.apply(&self.connected)?;
        Ok(linalg::trace_product(x, &evolved))
    }

    /// The same value in the Heisenberg picture, `Tr[(A^m(X^dagger))^dagger (rho2 - eta)]`.
    pub fn operator_value_heisenberg(&self, x: &CMatrix, m: u32) -> Result<C64> {
        self.check_operator(x)?;
        let adj = self.pair_descend.power(m as u64)?.adjoint();
        let pulled = adj.apply(&x.adjoint())?;
        Ok(linalg::hs_inner(&pulled, &self.connected))
    }

    pub fn value(&self, q: &CorrelatorQuery) -> Result<C64> {
        self.operator_value(&q.pair_operator(), q.m)
    }

    /// Values at `m = m_min..=m_max`, stepping the state one application at a time.
    pub fn operator_series(&self, x: &CMatrix, m_min: u32, m_max: u32) -> Result<Vec<C64>> {
        self.check_operator(x)?;
        if m_min > m_max {
            return Err(Error::arg(format!("empty range {m_min}..={m_max}")));
        }
        let mut state = self
            .pair_descend
            .power(m_min as u64)?
            .apply(&self.connected)?;
        let mut out = Vec::with_capacity((m_max - m_min + 1) as usize);
        for m in m_min..=m_max {
            out.push(linalg::trace_product(x, &state));
            if m < m_max {
                state = self.pair_descend.apply(&state)?;
            }
        }
        Ok(out)
    }
}

/// `Tr[(Theta (x) Theta') P^m(rho2 - eta)]` in the thermodynamic limit.
pub fn correlator_thermo(lam: &Isometry, q: &CorrelatorQuery) -> Result<C64> {
    ThermoCorrelator::new(lam)?.value(q)
}

/// Finite-depth correlator at distance `2^m` on `N = 2^n` sites, propagated with channels:
/// `Tr[(Theta (x) Theta') P^m(rho2^(n-m) - eta^(n-m))]`.
pub fn correlator_finite_channel(
    lam: &Isometry,
    c: &TopTensor,
    n: u32,
    q: &CorrelatorQuery,
) -> Result<C64> {
    if q.m >= n {
        return Err(Error::arg(format!(
            "distance 2^{} does not fit on 2^{n} sites",
            q.m
        )));
    }
    let levels = LevelStates::sequence(lam, c, n - q.m)?;
    let top = levels.last().expect("nonempty");
    let ch = TreeChannels::new(lam)?;
    let evolved = ch
        .slashed
        .power(q.m as u64)?
        .apply(&(&top.rho2 - &top.eta))?;
    Ok(linalg::trace_product(&q.pair_operator(), &evolved))
}

/// `log2 kappa`, or `None` for a zero eigenvalue.
pub fn exponent_of(kappa: C64) -> Option<C64> {
    if kappa.norm() < ZERO_EIGENVALUE {
        None
    } else {
        Some(kappa.ln() / std::f64::consts::LN_2)
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    /// Cluster mean.
    pub kappa: C64,
    pub exponent: Option<C64>,
    pub algebraic: usize,
    pub geometric: usize,
    /// Orthonormal (Hilbert-Schmidt) basis of `ker(A - kappa)`, as two-site operators.
    pub eigenoperators: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub d: usize,
    /// Sorted by descending `|kappa|`.
    pub entries: Vec<SpectrumEntry>,
    pub diagonalizable: bool,
}

impl SpectrumReport {
    pub fn max_modulus(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.kappa.norm())
            .fold(0.0, f64::max)
    }

    /// All eigenvalues with multiplicity, cluster means repeated.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.kappa, e.algebraic))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "kappa": [e.kappa.re, e.kappa.im],
                    "modulus": e.kappa.norm(),
                    "exponent": e.exponent.map(|x| vec![x.re, x.im]),
                    "algebraic_multiplicity": e.algebraic,
                    "geometric_multiplicity": e.geometric,
                    "eigenoperators": e.eigenoperators.iter().map(operator_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "d": self.d,
            "entries": entries,
            "diagonalizable": self.diagonalizable,
        })
    }
}

/// Row-major `[[re, im], ...]` rows.
pub(crate) fn operator_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect();
    json!(rows)
}

fn cluster(ev: &[C64]) -> Vec<(C64, usize)> {
    let mut sorted = ev.to_vec();
    crate::channels::sort_spectrum(&mut sorted);
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for z in sorted {
        let hit = groups.iter_mut().find(|g| {
            let rep = g[0];
            (rep - z).norm() <= TAU_CLUSTER * rep.norm().max(1.0)
        });
        match hit {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    let mut out: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<C64>() / g.len() as f64;
            (mean, g.len())
        })
        .collect();
    out.sort_by(|a, b| {
        b.0.norm()
            .total_cmp(&a.0.norm())
            .then(b.0.re.total_cmp(&a.0.re))
            .then(b.0.im.total_cmp(&a.0.im))
    });
    out
}

/// Eigendecomposition of the adjoint of the pair descend channel.
pub fn exponent_spectrum(lam: &Isometry) -> Result<SpectrumReport> {
    let ch = TreeChannels::new(lam)?;
    Ok(spectrum_of(&ch.slashed))
}

/// Spectrum of the Heisenberg dual of a square channel.
pub fn spectrum_of(ch: &Channel) -> SpectrumReport {
    let a = ch.matrix().adjoint();
    let n = a.nrows();
    let dim = ch.dim_in();
    let clusters = cluster(&linalg::eigenvalues(&a));
    let mut diagonalizable = true;
    let entries = clusters
        .into_iter()
        .map(|(kappa, algebraic)| {
            let shifted = &a - linalg::identity(n) * kappa;
            let basis = linalg::null_space(&shifted, TAU_RANK, 0);
            let basis = if basis.ncols() == 0 {
                linalg::null_space(&shifted, 0.0, 1)
            } else {
                basis
            };
            let geometric = basis.ncols().min(algebraic);
            if geometric != algebraic {
                diagonalizable = false;
            }
            let eigenoperators = (0..geometric)
                .map(|j| linalg::unvec(&basis.column(j).into_owned(), dim))
                .collect();
            SpectrumEntry {
                kappa,
                exponent: exponent_of(kappa),
                algebraic,
                geometric,
                eigenoperators,
            }
        })
        .collect();
    SpectrumReport {
        d: ch.d(),
        entries,
        diagonalizable,
    }
}

/// `kappa` and the relative residual `|A(X) - kappa X|_F / |X|_F` with `kappa` the
/// Rayleigh quotient `<X, A(X)> / <X, X>`.
pub fn eigenoperator_test(ch: &Channel, x: &CMatrix) -> Result<(C64, f64)> {
    let ax = ch.adjoint().apply(x)?;
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::arg("zero operator"));
    }
    let kappa = linalg::hs_inner(x, &ax) / (nx * nx);
    let res = (ax - x * kappa).norm() / nx;
    Ok((kappa, res))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub m: u32,
    pub delta_alpha: u64,
    pub value: C64,
}

/// One spectral cluster's share of a correlator, `sum_k c_k m^k kappa^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTerm {
    pub kappa: C64,
    pub coefficients: Vec<C64>,
    pub jordan: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<SpectralTerm>,
    /// `max_m |fit - C_m|`.
    pub residual: f64,
    /// A non-diagonalizable cluster with `kappa != 0` carries a significant `m^k`
    /// coefficient, i.e. the power law picks up `log(Delta)` factors.
    pub log_corrections: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorSeries {
    pub points: Vec<SeriesPoint>,
    /// `g`, the value at `Delta = 1`.
    pub prefactor: C64,
    /// Eigenvalue of `Theta (x) Theta'` when it is an eigenoperator of the adjoint.
    pub eigenvalue: Option<C64>,
    pub eigen_residual: f64,
    /// `log2` of the least-squares ratio of consecutive values (eigenoperator case) or
    /// of the slowest significant term of the decomposition.
    pub fitted_exponent: Option<C64>,
    /// Worst `|C_{m+1} - kappa C_m| / |C_m|` over pairs resolvable above rounding.
    pub ratio_residual: Option<f64>,
    pub ratio_pass: Option<bool>,
    pub degenerate: bool,
    pub decomposition: Option<Decomposition>,
}

impl CorrelatorSeries {
    pub fn to_json(&self) -> serde_json::Value {
        let cz = |z: C64| vec![z.re, z.im];
        json!({
            "points": self.points.iter().map(|p| json!({
                "m": p.m,
                "delta_alpha": p.delta_alpha,
                "value": cz(p.value),
            })).collect::<Vec<_>>(),
            "prefactor": cz(self.prefactor),
            "eigenvalue": self.eigenvalue.map(cz),
            "eigen_residual": self.eigen_residual,
            "fitted_exponent": self.fitted_exponent.map(cz),
            "ratio_residual": self.ratio_residual,
            "ratio_pass": self.ratio_pass,
            "degenerate": self.degenerate,
            "decomposition": self.decomposition.as_ref().map(|d| json!({
                "terms": d.terms.iter().map(|t| json!({
                    "kappa": cz(t.kappa),
                    "coefficients": t.coefficients.iter().map(|&z| cz(z)).collect::<Vec<_>>(),
                    "jordan": t.jordan,
                })).collect::<Vec<_>>(),
                "residual": d.residual,
                "log_corrections": d.log_corrections,
            })),
        })
    }

    /// Rows `delta_alpha, re, im`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| {
                vec![
                    p.delta_alpha.to_string(),
                    crate::io::format_f64(p.value.re),
                    crate::io::format_f64(p.value.im),
                ]
            })
            .collect()
    }
}

/// Absolute rounding scale of a series value at step `m`.
fn rounding_floor(x: &CMatrix, connected: &CMatrix, m: u32) -> f64 {
    64.0 * f64::EPSILON * x.norm() * connected.norm() * (m as f64 + 1.0)
}

/// Power-law analysis of `Tr[X P^m(rho2 - eta)]` over `m_min..=m_max`.
pub fn powerlaw_check(
    lam: &Isometry,
    q: &CorrelatorQuery,
    m_min: u32,
    m_max: u32,
) -> Result<CorrelatorSeries> {
    let tc = ThermoCorrelator::new(lam)?;
    powerlaw_series(&tc, &q.pair_operator(), m_min, m_max)
}

pub fn powerlaw_series(
    tc: &ThermoCorrelator,
    x: &CMatrix,
    m_min: u32,
    m_max: u32,
) -> Result<CorrelatorSeries> {
    if m_max >= 64 {
        return Err(Error::arg("m_max must be below 64 so that 2^m fits in u64"));
    }
    let values = tc.operator_series(x, m_min, m_max)?;
    let points: Vec<SeriesPoint> = (m_min..=m_max)
        .zip(&values)
        .map(|(m, &value)| SeriesPoint {
            m,
            delta_alpha: 1u64 << m,
            value,
        })
        .collect();
    let prefactor = tc.operator_value(x, 0)?;
    let (kappa, eigen_residual) =
        eigenoperator_test(tc.pair_descend(), &x.adjoint()).map(|(k, r)| (k.conj(), r))?;
    let is_eigen = eigen_residual <= TAU_EIGENOP;
    let degenerate = values.iter().all(|v| v.norm() < DEGENERATE_FLOOR);

    let mut series = CorrelatorSeries {
        points,
        prefactor,
        eigenvalue: is_eigen.then_some(kappa),
        eigen_residual,
        fitted_exponent: None,
        ratio_residual: None,
        ratio_pass: None,
        degenerate,
        decomposition: None,
    };
    if degenerate {
        return Ok(series);
    }
    if is_eigen {
        let mut num = ZERO;
        let mut den = 0.0;
        let mut worst: Option<f64> = None;
        let mut pass = true;
        for (k, w) in values.windows(2).enumerate() {
            let m = m_min + k as u32;
            let floor = rounding_floor(x, tc.connected_state(), m + 1);
            if w[0].norm() <= floor {
                continue;
            }
            num += w[0].conj() * w[1];
            den += w[0].norm_sqr();
            let err = (w[1] - kappa * w[0]).norm();
            if err > TAU_RATIO * w[0].norm() + floor {
                pass = false;
            }
            let rel = err / w[0].norm();
            worst = Some(worst.map_or(rel, |x: f64| x.max(rel)));
        }
        if den > 0.0 {
            series.fitted_exponent = exponent_of(num / den);
        }
        series.ratio_residual = worst;
        series.ratio_pass = Some(pass);
    } else {
        let spectrum = spectrum_of(tc.pair_descend());
        let dec = decompose(&spectrum, &series.points);
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        series.fitted_exponent = dec
            .terms
            .iter()
            .filter(|t| t.coefficients.iter().any(|c| c.norm() > 1e-8 * scale))
            .max_by(|a, b| a.kappa.norm().total_cmp(&b.kappa.norm()))
            .and_then(|t| exponent_of(t.kappa.conj()));
        series.decomposition = Some(dec);
    }
    Ok(series)
}

/// Least-squares fit of `C_m = sum_kappa sum_k c_{kappa,k} m^k conj(kappa)^m`, with
/// `k` running up to the algebraic multiplicity for non-diagonalizable clusters.
///
/// Values are `Tr[X P^m(.)]`, whose exponentials are eigenvalues of `P`, the complex
/// conjugates of the adjoint spectrum.
fn decompose(spectrum: &SpectrumReport, points: &[SeriesPoint]) -> Decomposition {
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for (i, e) in spectrum.entries.iter().enumerate() {
        let jordan = e.geometric < e.algebraic;
        let order = if jordan { e.algebraic } else { 1 };
        for k in 0..order {
            columns.push((i, k));
        }
    }
    let basis = |i: usize, k: usize, m: u32| -> C64 {
        let kappa = spectrum.entries[i].kappa.conj();
        if kappa.norm() < ZERO_EIGENVALUE {
            return if m as usize == k { linalg::ONE } else { ZERO };
        }
        kappa.powu(m) * (m as f64).powi(k as i32)
    };
    let design = CMatrix::from_fn(points.len(), columns.len(), |r, c| {
        let (i, k) = columns[c];
        basis(i, k, points[r].m)
    });
    let rhs = linalg::CVector::from_iterator(points.len(), points.iter().map(|p| p.value));
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-13 * svd.singular_values.max())
        .unwrap_or_else(|_| linalg::CVector::zeros(columns.len()));
    let fit = &design * &coeffs;
    let residual = (fit - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut terms: Vec<SpectralTerm> = Vec::new();
    let mut log_corrections = false;
    for (c, &(i, k)) in columns.iter().enumerate() {
        let e = &spectrum.entries[i];
        if k == 0 {
            terms.push(SpectralTerm {
                kappa: e.kappa,
                coefficients: Vec::new(),
                jordan: e.geometric < e.algebraic,
            });
        }
        let term = terms.last_mut().expect("pushed");
        term.coefficients.push(coeffs[c]);
        if k > 0 && e.kappa.norm() >= ZERO_EIGENVALUE && coeffs[c].norm() > 1e-8 * scale {
            log_corrections = true;
        }
    }
    Decomposition {
        terms,
        residual,
        log_corrections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_state::{build_state, correlator_finite};
    use crate::linalg::c;
    use crate::tensor_core::{random, random_isometry};

    fn named(s: &str) -> Observable {
        Observable::named(s).unwrap()
    }

    fn zz(m: u32) -> CorrelatorQuery {
        CorrelatorQuery::new(named("z"), named("z"), m).unwrap()
    }

    #[test]
    fn product_isometry_has_no_correlations() {
        let lam = Isometry::product(2).unwrap();
        for m in 0..4 {
            for (a, b) in [("z", "z"), ("x", "y"), ("p0", "x")] {
                let q = CorrelatorQuery::new(named(a), named(b), m).unwrap();
                assert_eq!(correlator_thermo(&lam, &q).unwrap().norm(), 0.0);
            }
        }
        let s = powerlaw_check(&lam, &zz(0), 0, 10).unwrap();
        assert!(s.degenerate);
        assert!(s.fitted_exponent.is_none());
    }

    #[test]
    fn correlators_decay() {
        for lam in [
            Isometry::bell_branching(),
            random_isometry(2, 3).unwrap(),
            random_isometry(3, 4).unwrap(),
        ] {
            let d = lam.d();
            let tc = ThermoCorrelator::new(&lam).unwrap();
            assert!(tc.connected_state().trace().norm() < 1e-12);
            let x = random::hermitian(d * d, 11);
            assert!(tc.operator_value(&x, 60).unwrap().norm() <= 1e-12);
        }
        let v = correlator_thermo(&Isometry::bell_branching(), &zz(60)).unwrap();
        assert!(v.norm() <= 1e-12);
    }

    #[test]
    fn schrodinger_equals_heisenberg() {
        for seed in 0..4 {
            let lam = random_isometry(2, seed).unwrap();
            let tc = ThermoCorrelator::new(&lam).unwrap();
            let x = random::gaussian(4, 4, seed + 100);
            for m in [0, 1, 3, 7] {
                let s = tc.operator_value(&x, m).unwrap();
                let h = tc.operator_value_heisenberg(&x, m).unwrap();
                assert!((s - h).norm() < 1e-12, "{s} vs {h}");
            }
        }
    }

    #[test]
    fn unit_distance_is_the_prefactor() {
        let lam = Isometry::bell_branching();
        let tc = ThermoCorrelator::new(&lam).unwrap();
        let x = zz(0).pair_operator();
        let direct = linalg::trace_product(&x, tc.connected_state());
        assert_eq!(tc.operator_value(&x, 0).unwrap(), direct);
        let s = powerlaw_check(&lam, &zz(0), 0, 5).unwrap();
        assert_eq!(s.prefactor, direct);
    }

    #[test]
    fn matches_brute_force_at_depth_four() {
        let lam = Isometry::bell_branching();
        let top = TopTensor::maximally_entangled(2);
        let psi = build_state(&lam, &top, 4).unwrap();
        for m in 0..4 {
            let q = CorrelatorQuery::new(named("z"), named("x"), m).unwrap();
            let brute = correlator_finite(&psi, &q.theta, &q.theta_prime, 1 << m).unwrap();
            let chan = correlator_finite_channel(&lam, &top, 4, &q).unwrap();
            assert!((brute - chan).norm() < 1e-10, "m = {m}: {brute} vs {chan}");
        }
    }

    #[test]
    fn finite_depth_ten_approaches_the_limit() {
        let lam = Isometry::bell_branching();
        let top = TopTensor::maximally_entangled(2);
        for m in 0..=6 {
            let q = zz(m);
            let fin = correlator_finite_channel(&lam, &top, 10, &q).unwrap();
            let inf = correlator_thermo(&lam, &q).unwrap();
            assert!((fin - inf).norm() < 1e-6, "m = {m}: {fin} vs {inf}");
        }
    }

    #[test]
    fn product_isometry_spectrum() {
        let rep = exponent_spectrum(&Isometry::product(2).unwrap()).unwrap();
        assert_eq!(rep.entries.len(), 2);
        assert!((rep.entries[0].kappa - linalg::ONE).norm() < 1e-12);
        assert_eq!(rep.entries[0].algebraic, 1);
        assert!((rep.entries[1].kappa - c(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(rep.entries[1].algebraic, 15);
        assert_eq!(rep.entries[1].geometric, 15);
        assert!((rep.entries[1].exponent.unwrap() - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(rep.diagonalizable);
    }

    #[test]
    fn spectra_are_contractive() {
        for lam in [
            Isometry::bell_branching(),
            random_isometry(2, 8).unwrap(),
            random_isometry(3, 8).unwrap(),
        ] {
            let rep = exponent_spectrum(&lam).unwrap();
            assert!((rep.max_modulus() - 1.0).abs() < 1e-10);
            assert_eq!(rep.eigenvalues().len(), lam.d().pow(4));
            for e in &rep.entries {
                assert!(e.kappa.norm() <= 1.0 + 1e-10);
                if let Some(x) = e.exponent {
                    if e.kappa.norm() < 1.0 - 1e-8 {
                        assert!(x.re < 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn eigenoperators_satisfy_their_equation() {
        let lam = random_isometry(2, 21).unwrap();
        let ch = TreeChannels::new(&lam).unwrap().slashed;
        let rep = spectrum_of(&ch);
        for e in &rep.entries {
            for x in &e.eigenoperators {
                let ax = ch.adjoint().apply(x).unwrap();
                assert!((ax - x * e.kappa).norm() <= TAU_EIGENOP * x.norm());
            }
        }
        let top = &rep.entries[0];
        let id = linalg::identity(4);
        let (k, r) = eigenoperator_test(&ch, &id).unwrap();
        assert!((k - top.kappa).norm() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn eigenoperator_series_is_geometric() {
        let lam = Isometry::bell_branching();
        let tc = ThermoCorrelator::new(&lam).unwrap();
        let rep = spectrum_of(tc.pair_descend());
        let mut tested = 0;
        for e in rep
            .entries
            .iter()
            .filter(|e| e.kappa.norm() > 1e-6 && e.kappa.norm() < 1.0 - 1e-8)
        {
            for x in &e.eigenoperators {
                let s = powerlaw_series(&tc, x, 0, 20).unwrap();
                if s.degenerate {
                    continue;
                }
                assert!((s.eigenvalue.unwrap() - e.kappa).norm() < 1e-10);
                assert_eq!(s.ratio_pass, Some(true), "{s:?}");
                let fitted = s.fitted_exponent.unwrap();
                assert!((fitted - e.exponent.unwrap()).norm() < 1e-8);
                tested += 1;
            }
        }
        assert!(tested > 0);
    }

    #[test]
    fn synthetic_half_is_exponent_minus_one() {
        // rho2 - eta for the product isometry vanishes, so inject a traceless state by hand.
        let ch = TreeChannels::new(&Isometry::product(2).unwrap())
            .unwrap()
            .slashed;
        let mut connected = CMatrix::zeros(4, 4);
        connected[(1, 1)] = c(0.25, 0.0);
        connected[(2, 2)] = c(-0.25, 0.0);
        let tc = ThermoCorrelator {
            pair_descend: ch,
            connected,
        };
        // Vanishes on |00>, so the rank-one part of the product channel drops out.
        let x = linalg::kron(named("z").matrix(), &linalg::identity(2)) - linalg::identity(4);
        let s = powerlaw_series(&tc, &x, 0, 30).unwrap();
        assert!((s.eigenvalue.unwrap() - c(0.5, 0.0)).norm() < 1e-12);
        assert!((s.fitted_exponent.unwrap() - c(-1.0, 0.0)).norm() < 1e-8);
        assert_eq!(s.ratio_pass, Some(true));
    }

    #[test]
    fn general_query_decomposition_fits() {
        let lam = Isometry::bell_branching();
        let tc = ThermoCorrelator::new(&lam).unwrap();
        let s = powerlaw_series(&tc, &random::hermitian(4, 5), 0, 20).unwrap();
        assert!(s.eigenvalue.is_none());
        let dec = s.decomposition.expect("not an eigenoperator");
        let scale = s.points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        assert!(dec.residual <= 1e-8 * scale.max(1e-300), "{dec:?}");
    }

    #[test]
    fn json_and_csv_shapes() {
        let rep = exponent_spectrum(&Isometry::bell_branching()).unwrap();
        let j = rep.to_json();
        assert!(j["entries"].as_array().unwrap().len() >= 2);
        assert!(j["entries"][0]["algebraic_multiplicity"].is_u64());
        let s = powerlaw_check(&Isometry::bell_branching(), &zz(0), 0, 10).unwrap();
        let rows = s.csv_rows();
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[3][0], "8");
    }
}
