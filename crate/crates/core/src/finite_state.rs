//! Explicit finite trees, used as a brute-force oracle for every channel recursion.
//!
//! A depth-`n` state has `N = 2^n` sites on a ring. Level 1 is the top tensor itself
//! (`psi[l1 l2] = C[l1, l2]`) and each further level applies `V` to every site. All
//! averages run over the `N` cyclic starting positions, wrap-around windows included.

use crate::channels::TreeChannels;
use crate::error::{Error, Result};
use crate::linalg::{self, checked_pow, CMatrix, CVector, C64, ZERO};
use crate::tensor_core::{
    partial_trace_matrix, site_index_map, DensityOp, Isometry, LatticeSpec, Observable, TopTensor,
};

/// Largest state vector the oracle will build (`d = 2`: `n <= 4`, `d = 3`: `n <= 3`).
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_amplitudes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
        }
    }
}

impl Budget {
    fn check(&self, d: usize, n_sites: usize) -> Result<usize> {
        let required = (d as u128).checked_pow(n_sites as u32).unwrap_or(u128::MAX);
        if required > self.max_amplitudes as u128 {
            return Err(Error::Resource {
                what: "state vector amplitudes",
                required,
                budget: self.max_amplitudes as u128,
            });
        }
        Ok(required as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    spec: LatticeSpec,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(spec: LatticeSpec, amplitudes: CVector) -> Result<Self> {
        let dim = spec
            .hilbert_dim()
            .ok_or_else(|| Error::arg("Hilbert space dimension overflows"))?;
        if amplitudes.len() != dim {
            return Err(Error::shape(format!(
                "state has {} amplitudes, expected {dim}",
                amplitudes.len()
            )));
        }
        Ok(PureState { spec, amplitudes })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Reduced density matrix of the listed sites (0-based, in order).
    pub fn reduced(&self, sites: &[usize]) -> Result<CMatrix> {
        let map = site_index_map(self.d(), self.n_sites(), sites)?;
        let kept = map.len();
        let traced = map[0].len();
        let psi = &self.amplitudes;
        let block = CMatrix::from_fn(kept, traced, |k, t| psi[map[k][t]]);
        Ok(&block * block.adjoint())
    }

    /// Sites `start, start + 1, ..., start + nu - 1` modulo `N`.
    pub fn window(&self, start: usize, nu: usize) -> Vec<usize> {
        let n = self.n_sites();
        (0..nu).map(|j| (start + j) % n).collect()
    }
}

/// Applies `V` to every site, doubling the number of sites.
fn grow_level(lam: &Isometry, state: &CVector, n_sites: usize) -> CVector {
    let d = lam.d();
    let v = lam.matrix();
    let mut cur = state.clone();
    // Expand from the last site backwards so that unprocessed sites keep their positions.
    for k in (0..n_sites).rev() {
        let pre = d.pow(k as u32);
        let post = d.pow(2 * (n_sites - 1 - k) as u32);
        let mut next = CVector::zeros(pre * d * d * post);
        for p in 0..pre {
            for u in 0..d {
                let base_in = (p * d + u) * post;
                for l in 0..d * d {
                    let z = v[(l, u)];
                    if z == ZERO {
                        continue;
                    }
                    let base_out = (p * d * d + l) * post;
                    for q in 0..post {
                        next[base_out + q] += z * cur[base_in + q];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// The depth-`n` tree state with the default memory budget.
pub fn build_state(lam: &Isometry, c: &TopTensor, n: u32) -> Result<PureState> {
    build_state_with_budget(lam, c, n, Budget::default())
}

pub fn build_state_with_budget(
    lam: &Isometry,
    c: &TopTensor,
    n: u32,
    budget: Budget,
) -> Result<PureState> {
    if lam.d() != c.d() {
        return Err(Error::shape("isometry and top tensor have different d"));
    }
    let spec = LatticeSpec::tree(lam.d(), n)?;
    budget.check(spec.d(), spec.n_sites())?;
    let d = lam.d();
    let mut amps = CVector::from_fn(d * d, |i, _| c.matrix()[(i / d, i % d)]);
    let mut sites = 2;
    for _ in 1..n {
        amps = grow_level(lam, &amps, sites);
        sites *= 2;
    }
    PureState::new(spec, amps)
}

/// Average over all `N` cyclic positions of the `nu`-site reduced density matrix.
pub fn reduced_avg(psi: &PureState, nu: usize) -> Result<DensityOp> {
    let n = psi.n_sites();
    if nu == 0 || nu > n {
        return Err(Error::arg(format!("nu = {nu} out of range 1..={n}")));
    }
    let dim = checked_pow(psi.d(), nu).ok_or_else(|| Error::arg("dimension overflow"))?;
    let mut acc = CMatrix::zeros(dim, dim);
    for start in 0..n {
        acc += psi.reduced(&psi.window(start, nu))?;
    }
    acc.unscale_mut(n as f64);
    DensityOp::new(psi.d(), nu, acc, finite_label(psi, nu))
}

fn finite_label(psi: &PureState, nu: usize) -> String {
    match psi.spec().depth() {
        Some(n) => format!("level-{n} averaged rho_{nu}"),
        None => format!("averaged rho_{nu}"),
    }
}

/// `(1/N) sum_alpha rho_alpha (x) rho_{alpha+1}`: neighbouring one-site marginals with
/// all correlations between them removed.
pub fn eta_avg(psi: &PureState) -> Result<DensityOp> {
    let n = psi.n_sites();
    let singles: Vec<CMatrix> = (0..n).map(|a| psi.reduced(&[a])).collect::<Result<_>>()?;
    let d = psi.d();
    let mut acc = CMatrix::zeros(d * d, d * d);
    for a in 0..n {
        acc += linalg::kron(&singles[a], &singles[(a + 1) % n]);
    }
    acc.unscale_mut(n as f64);
    DensityOp::new(d, 2, acc, "averaged eta_11")
}

/// Level-1 one-site state:
/// `<l|rho_hat|u> = sum_k [conj(C[u,k]) C[l,k] + conj(C[k,u]) C[k,l]] / 2`.
pub fn rho_hat(c: &TopTensor) -> DensityOp {
    let cm = c.matrix();
    let d = c.d();
    let m = CMatrix::from_fn(d, d, |l, u| {
        let mut acc = ZERO;
        for k in 0..d {
            acc += cm[(u, k)].conj() * cm[(l, k)] + cm[(k, u)].conj() * cm[(k, l)];
        }
        acc * 0.5
    });
    DensityOp::new(d, 1, m, "rho_hat").expect("d x d")
}

/// Level-1 two-site state `(rho_C + Swap rho_C Swap) / 2`.
pub fn rho2_base(c: &TopTensor) -> DensityOp {
    let d = c.d();
    let psi = CVector::from_fn(d * d, |i, _| c.matrix()[(i / d, i % d)]);
    let rho_c = &psi * psi.adjoint();
    let swap = swap_matrix(d);
    let m = (&rho_c + &swap * &rho_c * &swap).scale(0.5);
    DensityOp::new(d, 2, m, "level-1 averaged rho_2").expect("d^2 x d^2")
}

pub(crate) fn swap_matrix(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = linalg::ONE;
        }
    }
    s
}

/// Translation-averaged connected correlator at distance `delta`:
/// `(1/N) sum_b [<T_b T'_{b+delta}> - <T_b><T'_{b+delta}>]`, indices modulo `N`.
pub fn correlator_finite(
    psi: &PureState,
    theta: &Observable,
    theta_prime: &Observable,
    delta: usize,
) -> Result<C64> {
    let n = psi.n_sites();
    if delta == 0 || delta >= n {
        return Err(Error::arg(format!("distance {delta} out of range 1..{n}")));
    }
    if theta.d() != psi.d() || theta_prime.d() != psi.d() {
        return Err(Error::shape(
            "observable dimension does not match the state",
        ));
    }
    let t = theta.matrix();
    let tp = theta_prime.matrix();
    let tt = linalg::kron(t, tp);
    let singles: Vec<CMatrix> = (0..n).map(|a| psi.reduced(&[a])).collect::<Result<_>>()?;
    let mut acc = ZERO;
    for b in 0..n {
        let partner = (b + delta) % n;
        let pair = psi.reduced(&[b, partner])?;
        let joint = linalg::trace_product(&tt, &pair);
        let left = linalg::trace_product(t, &singles[b]);
        let right = linalg::trace_product(tp, &singles[partner]);
        acc += joint - left * right;
    }
    Ok(acc / n as f64)
}

/// Level-`n` averaged states propagated with channels instead of brute force.
#[derive(Clone, Debug)]
pub struct LevelStates {
    pub n: u32,
    pub rho1: CMatrix,
    pub rho2: CMatrix,
    pub eta: CMatrix,
    /// `(1/N) sum_alpha rho_alpha (x) rho_alpha`, the seed of `eta` at the next level.
    pub tau: CMatrix,
}

impl LevelStates {
    pub fn base(c: &TopTensor) -> Self {
        let d = c.d();
        let psi = CVector::from_fn(d * d, |i, _| c.matrix()[(i / d, i % d)]);
        let rho_c = &psi * psi.adjoint();
        let first = partial_trace_matrix(&rho_c, d, 2, &[0]).expect("shape");
        let second = partial_trace_matrix(&rho_c, d, 2, &[1]).expect("shape");
        let eta = (linalg::kron(&first, &second) + linalg::kron(&second, &first)).scale(0.5);
        let tau = (linalg::kron(&first, &first) + linalg::kron(&second, &second)).scale(0.5);
        LevelStates {
            n: 1,
            rho1: rho_hat(c).into_matrix(),
            rho2: rho2_base(c).into_matrix(),
            eta,
            tau,
        }
    }

    pub fn next(&self, ch: &TreeChannels) -> Result<Self> {
        let rho2 = (ch.cross.apply(&self.rho2)? + ch.growth.apply(&self.rho1)?).scale(0.5);
        let eta = (ch.cross.apply(&self.eta)? + ch.sibling_product()?.apply(&self.tau)?).scale(0.5);
        Ok(LevelStates {
            n: self.n + 1,
            rho1: ch.descend.mean.apply(&self.rho1)?,
            rho2,
            eta,
            tau: ch.slashed.apply(&self.tau)?,
        })
    }

    /// States at levels `1..=n`.
    pub fn sequence(lam: &Isometry, c: &TopTensor, n: u32) -> Result<Vec<Self>> {
        if n == 0 {
            return Err(Error::arg("depth must be at least 1"));
        }
        let ch = TreeChannels::new(lam)?;
        let mut out = vec![Self::base(c)];
        for _ in 1..n {
            let next = out.last().expect("nonempty").next(&ch)?;
            out.push(next);
        }
        Ok(out)
    }
}

/// One checked identity at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionResidual {
    pub identity: Identity,
    pub n: u32,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `rho_1^(1) = rho_hat` and `rho_2^(1) = (rho_C + swap) / 2`.
    Base,
    /// `rho_1^(n+1) = D(rho_1^(n))`.
    OneSite,
    /// `rho_2^(n+1) = (D_R (x) D_L)(rho_2^(n)) / 2 + S(rho_1^(n)) / 2`.
    TwoSite,
    /// `rho_3^(n) = D_{2->3}(rho_2^(n-1))`.
    ThreeSite,
    /// `rho_4^(n) = (S (x) S)(rho_2^(n-1)) / 2 + (D_R (x) S (x) D_L)(D_{2->3}(rho_2^(n-2))) / 2`.
    FourSite,
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::Base => "base",
            Identity::OneSite => "one-site",
            Identity::TwoSite => "two-site",
            Identity::ThreeSite => "three-site",
            Identity::FourSite => "four-site",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionReport {
    pub checks: Vec<RecursionResidual>,
}

impl RecursionReport {
    pub fn max_residual(&self, identity: Identity) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.identity == identity)
            .map(|c| c.residual)
            .reduce(f64::max)
    }

    pub fn worst(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let checks: Vec<_> = self
            .checks
            .iter()
            .map(|c| serde_json::json!({"identity": c.identity.name(), "n": c.n, "residual": c.residual}))
            .collect();
        let mut max = serde_json::Map::new();
        for id in [
            Identity::Base,
            Identity::OneSite,
            Identity::TwoSite,
            Identity::ThreeSite,
            Identity::FourSite,
        ] {
            if let Some(r) = self.max_residual(id) {
                max.insert(id.name().to_string(), r.into());
            }
        }
        serde_json::json!({"checks": checks, "max_residual": max})
    }
}

/// Checks every channel recursion against brute-force averages for depths up to `n_max`.
pub fn recursion_check(lam: &Isometry, c: &TopTensor, n_max: u32) -> Result<RecursionReport> {
    recursion_check_with_budget(lam, c, n_max, Budget::default())
}

pub fn recursion_check_with_budget(
    lam: &Isometry,
    c: &TopTensor,
    n_max: u32,
    budget: Budget,
) -> Result<RecursionReport> {
    if n_max < 1 {
        return Err(Error::arg("n_max must be at least 1"));
    }
    let ch = TreeChannels::new(lam)?;
    let d23 = ch.extension3()?;
    let ss = ch.growth.tensor(&ch.growth)?;
    let middle = ch.middle_growth()?;

    // rho[n][nu - 1] for n = 1..=n_max and every nu <= min(4, N).
    let mut levels: Vec<Vec<CMatrix>> = Vec::new();
    for n in 1..=n_max {
        let psi = build_state_with_budget(lam, c, n, budget)?;
        let max_nu = 4.min(psi.n_sites());
        let per_nu = (1..=max_nu)
            .map(|nu| reduced_avg(&psi, nu).map(DensityOp::into_matrix))
            .collect::<Result<Vec<_>>>()?;
        levels.push(per_nu);
    }
    let at = |n: u32, nu: usize| &levels[(n - 1) as usize][nu - 1];

    let mut checks = Vec::new();
    let base = linalg::max_abs_diff(at(1, 1), rho_hat(c).matrix())
        .max(linalg::max_abs_diff(at(1, 2), rho2_base(c).matrix()));
    checks.push(RecursionResidual {
        identity: Identity::Base,
        n: 1,
        residual: base,
    });
    for n in 1..n_max {
        let pred1 = ch.descend.mean.apply(at(n, 1))?;
        checks.push(RecursionResidual {
            identity: Identity::OneSite,
            n: n + 1,
            residual: linalg::max_abs_diff(&pred1, at(n + 1, 1)),
        });
        let pred2 = (ch.cross.apply(at(n, 2))? + ch.growth.apply(at(n, 1))?).scale(0.5);
        checks.push(RecursionResidual {
            identity: Identity::TwoSite,
            n: n + 1,
            residual: linalg::max_abs_diff(&pred2, at(n + 1, 2)),
        });
    }
    for n in 2..=n_max {
        let pred3 = d23.apply(at(n - 1, 2))?;
        checks.push(RecursionResidual {
            identity: Identity::ThreeSite,
            n,
            residual: linalg::max_abs_diff(&pred3, at(n, 3)),
        });
    }
    for n in 3..=n_max {
        let pred4 = (ss.apply(at(n - 1, 2))? + middle.apply(&d23.apply(at(n - 2, 2))?)?).scale(0.5);
        checks.push(RecursionResidual {
            identity: Identity::FourSite,
            n,
            residual: linalg::max_abs_diff(&pred4, at(n, 4)),
        });
    }
    Ok(RecursionReport { checks })
}
