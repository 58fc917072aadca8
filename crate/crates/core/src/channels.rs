//! Superoperators of the binary tree and their Heisenberg duals.
//!
//! A [`Channel`] maps operators on `nu_in` sites to operators on `nu_out` sites and is
//! stored as a dense `d^{2 nu_out} x d^{2 nu_in}` matrix acting on column-stacked
//! operators. With this convention the Hilbert-Schmidt adjoint of a channel is the
//! conjugate transpose of its matrix.
//!
//! The tree channels built from an isometry `V` are
//!
//! * growth `S(rho) = V rho V^dagger` (1 -> 2 sites),
//! * descend `D_L = Tr_2 o S`, `D_R = Tr_1 o S`, `D = (D_L + D_R) / 2` (1 -> 1),
//! * pair descend `(D_L (x) D_L + D_R (x) D_R) / 2` (2 -> 2), the map whose powers carry
//!   correlators across distances `2^m`,
//! * extensions `D_{2->3} = (D_R (x) S + S (x) D_L) / 2` and
//!   `D_{2->4} = (S (x) S + (D_R (x) S (x) D_L) o D_{2->3}) / 2`.

use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{self, checked_pow, CMatrix, CVector, C64, ONE, ZERO};
use crate::tensor_core::{partial_trace_matrix, DensityOp, Isometry};

/// Tolerance on eigenvalue moduli exceeding one.
pub const TAU_SPEC: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    d: usize,
    nu_in: usize,
    nu_out: usize,
    matrix: CMatrix,
}

fn site_dim(d: usize, nu: usize) -> Result<usize> {
    checked_pow(d, nu).ok_or_else(|| Error::arg(format!("d^nu overflows (d = {d}, nu = {nu})")))
}

impl Channel {
    pub fn from_matrix(d: usize, nu_in: usize, nu_out: usize, matrix: CMatrix) -> Result<Self> {
        let din = site_dim(d, nu_in)?;
        let dout = site_dim(d, nu_out)?;
        if matrix.nrows() != dout * dout || matrix.ncols() != din * din {
            return Err(Error::shape(format!(
                "superoperator is {}x{}, expected {}x{} for {nu_in} -> {nu_out} sites",
                matrix.nrows(),
                matrix.ncols(),
                dout * dout,
                din * din
            )));
        }
        Ok(Channel {
            d,
            nu_in,
            nu_out,
            matrix,
        })
    }

    /// Materializes a linear map by applying it to every matrix unit `|i><j|`.
    pub fn from_linear_map<F>(d: usize, nu_in: usize, nu_out: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&CMatrix) -> Result<CMatrix>,
    {
        let din = site_dim(d, nu_in)?;
        let dout = site_dim(d, nu_out)?;
        let mut matrix = CMatrix::zeros(dout * dout, din * din);
        let mut unit = CMatrix::zeros(din, din);
        for j in 0..din {
            for i in 0..din {
                unit[(i, j)] = ONE;
                let image = f(&unit)?;
                unit[(i, j)] = ZERO;
                if image.shape() != (dout, dout) {
                    return Err(Error::shape("linear map returned wrong output shape"));
                }
                matrix.set_column(j * din + i, &linalg::vec_of(&image));
            }
        }
        Self::from_matrix(d, nu_in, nu_out, matrix)
    }

    pub fn identity(d: usize, nu: usize) -> Result<Self> {
        let n = site_dim(d, nu)?;
        Self::from_matrix(d, nu, nu, linalg::identity(n * n))
    }

    /// `X -> A X B^dagger` with `A, B` of shape `d^{nu_out} x d^{nu_in}`.
    pub fn sandwich(
        d: usize,
        nu_in: usize,
        nu_out: usize,
        a: &CMatrix,
        b: &CMatrix,
    ) -> Result<Self> {
        let din = site_dim(d, nu_in)?;
        let dout = site_dim(d, nu_out)?;
        if a.shape() != (dout, din) || b.shape() != (dout, din) {
            return Err(Error::shape("sandwich operands have the wrong shape"));
        }
        let matrix = linalg::kron(&b.map(|z| z.conj()), a);
        Self::from_matrix(d, nu_in, nu_out, matrix)
    }

    /// Partial trace keeping the listed sites (0-based, in order).
    pub fn partial_trace(d: usize, nu: usize, keep: &[usize]) -> Result<Self> {
        Self::from_linear_map(d, nu, keep.len(), |x| partial_trace_matrix(x, d, nu, keep))
    }

    /// The full transpose `X -> X^T`, positive but not completely positive.
    pub fn transpose(d: usize, nu: usize) -> Result<Self> {
        Self::from_linear_map(d, nu, nu, |x| Ok(x.transpose()))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu_in(&self) -> usize {
        self.nu_in
    }

    pub fn nu_out(&self) -> usize {
        self.nu_out
    }

    pub fn dim_in(&self) -> usize {
        self.d.pow(self.nu_in as u32)
    }

    pub fn dim_out(&self) -> usize {
        self.d.pow(self.nu_out as u32)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_square(&self) -> bool {
        self.nu_in == self.nu_out
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let din = self.dim_in();
        if x.shape() != (din, din) {
            return Err(Error::shape(format!(
                "channel expects a {din}x{din} operator, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let out = &self.matrix * linalg::vec_of(x);
        Ok(linalg::unvec(&out, self.dim_out()))
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn apply_density(&self, rho: &DensityOp, label: impl Into<String>) -> Result<DensityOp> {
        if rho.d() != self.d || rho.nu() != self.nu_in {
            return Err(Error::shape(format!(
                "channel takes {} sites of dimension {}, got {} sites of dimension {}",
                self.nu_in,
                self.d,
                rho.nu(),
                rho.d()
            )));
        }
        let out = self.apply(rho.matrix())?;
        DensityOp::new(self.d, self.nu_out, out, label)
    }

    /// `self o inner`: apply `inner` first.
    pub fn compose(&self, inner: &Channel) -> Result<Self> {
        if inner.d != self.d || inner.nu_out != self.nu_in {
            return Err(Error::shape(format!(
                "cannot compose ({} -> {}) after ({} -> {})",
                self.nu_in, self.nu_out, inner.nu_in, inner.nu_out
            )));
        }
        Self::from_matrix(
            self.d,
            inner.nu_in,
            self.nu_out,
            &self.matrix * &inner.matrix,
        )
    }

    /// Tensor product acting on the concatenated sites: `self` on the leading sites.
    pub fn tensor(&self, other: &Channel) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::shape("tensor product of channels with different d"));
        }
        let (ai, ao, bi, bo) = (
            self.dim_in(),
            self.dim_out(),
            other.dim_in(),
            other.dim_out(),
        );
        let (din, dout) = (ai * bi, ao * bo);
        let mut m = CMatrix::zeros(dout * dout, din * din);
        let a = &self.matrix;
        let b = &other.matrix;
        for ja in 0..ai {
            for ia in 0..ai {
                let col_a = ja * ai + ia;
                for jb in 0..bi {
                    for ib in 0..bi {
                        let col_b = jb * bi + ib;
                        let col = (ja * bi + jb) * din + (ia * bi + ib);
                        for ca in 0..ao {
                            for ra in 0..ao {
                                let za = a[(ca * ao + ra, col_a)];
                                if za == ZERO {
                                    continue;
                                }
                                for cb in 0..bo {
                                    for rb in 0..bo {
                                        let zb = b[(cb * bo + rb, col_b)];
                                        if zb == ZERO {
                                            continue;
                                        }
                                        let row = (ca * bo + cb) * dout + (ra * bo + rb);
                                        m[(row, col)] = za * zb;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self::from_matrix(
            self.d,
            self.nu_in + other.nu_in,
            self.nu_out + other.nu_out,
            m,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Channel {
            matrix: self.matrix.scale(s),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Channel) -> Result<Self> {
        if (self.d, self.nu_in, self.nu_out) != (other.d, other.nu_in, other.nu_out) {
            return Err(Error::shape("cannot add channels of different shape"));
        }
        Self::from_matrix(
            self.d,
            self.nu_in,
            self.nu_out,
            &self.matrix + &other.matrix,
        )
    }

    /// Mean of two channels of equal shape.
    pub fn average(&self, other: &Channel) -> Result<Self> {
        Ok(self.add(other)?.scaled(0.5))
    }

    /// `self^m` by repeated squaring.
    pub fn power(&self, m: u64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::shape("power of a non-square channel"));
        }
        let n = self.matrix.nrows();
        let mut result = linalg::identity(n);
        let mut base = self.matrix.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_matrix(self.d, self.nu_in, self.nu_out, result)
    }

    /// Eigenvalues of a square channel's matrix, sorted by descending modulus.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        if !self.is_square() {
            return Err(Error::shape("spectrum of a non-square channel"));
        }
        let mut ev = linalg::eigenvalues(&self.matrix);
        sort_spectrum(&mut ev);
        Ok(ev)
    }

    pub fn adjoint(&self) -> AdjointChannel {
        adjoint(self)
    }

    /// `max |Phi^dagger(I) - I|`, zero for trace-preserving maps.
    pub fn trace_preservation_residual(&self) -> f64 {
        let id_out = linalg::vec_of(&linalg::identity(self.dim_out()));
        let pulled = self.matrix.adjoint() * id_out;
        let id_in = linalg::identity(self.dim_in());
        linalg::max_abs_diff(&linalg::unvec(&pulled, self.dim_in()), &id_in)
    }

    /// `max |Phi(I) - I|` for square maps.
    pub fn unitality_residual(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let id = linalg::identity(self.dim_in());
        let image = self.apply(&id).expect("shape");
        Some(linalg::max_abs_diff(&image, &id))
    }

    /// Choi matrix `sum_{ij} |i><j| (x) Phi(|i><j|)`.
    pub fn choi(&self) -> CMatrix {
        let din = self.dim_in();
        let dout = self.dim_out();
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for a in 0..din {
            for b in 0..din {
                let col = self.matrix.column(b * din + a);
                for q in 0..dout {
                    for p in 0..dout {
                        j[(a * dout + p, b * dout + q)] = col[q * dout + p];
                    }
                }
            }
        }
        j
    }

    /// Row-major dump with interleaved real and imaginary parts.
    pub fn to_json(&self) -> serde_json::Value {
        let mut data = Vec::with_capacity(2 * self.matrix.len());
        for r in 0..self.matrix.nrows() {
            for col in 0..self.matrix.ncols() {
                let z = self.matrix[(r, col)];
                data.push(z.re);
                data.push(z.im);
            }
        }
        json!({
            "d": self.d,
            "nu_in": self.nu_in,
            "nu_out": self.nu_out,
            "rows": self.matrix.nrows(),
            "cols": self.matrix.ncols(),
            "data": data,
        })
    }
}

/// Sorts by descending modulus, ties by descending real part then imaginary part.
pub fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Heisenberg-picture dual of a [`Channel`], mapping observables on `nu_out` sites back
/// to observables on `nu_in` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointChannel {
    source_nu_in: usize,
    source_nu_out: usize,
    map: Channel,
}

impl AdjointChannel {
    /// The dual as an ordinary linear map (`nu_out -> nu_in` sites).
    pub fn as_channel(&self) -> &Channel {
        &self.map
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.map.matrix
    }

    pub fn apply(&self, observable: &CMatrix) -> Result<CMatrix> {
        self.map.apply(observable)
    }

    /// `max |A(I) - I|`.
    pub fn unitality_residual(&self) -> f64 {
        let id_in = linalg::identity(self.map.dim_in());
        let id_out = linalg::identity(self.map.dim_out());
        linalg::max_abs_diff(&self.map.apply(&id_in).expect("shape"), &id_out)
    }

    pub fn source_sites(&self) -> (usize, usize) {
        (self.source_nu_in, self.source_nu_out)
    }
}

/// Hilbert-Schmidt adjoint: `<A, ch(B)> = <adjoint(ch)(A), B>`.
pub fn adjoint(ch: &Channel) -> AdjointChannel {
    AdjointChannel {
        source_nu_in: ch.nu_in,
        source_nu_out: ch.nu_out,
        map: Channel {
            d: ch.d,
            nu_in: ch.nu_out,
            nu_out: ch.nu_in,
            matrix: ch.matrix.adjoint(),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiReport {
    pub completely_positive: bool,
    pub trace_preserving: bool,
    pub min_choi_eigenvalue: f64,
    pub trace_residual: f64,
    /// `None` for non-square channels.
    pub unital_residual: Option<f64>,
}

/// Complete positivity from the Choi spectrum, trace preservation from unitality of
/// the adjoint.
pub fn choi_check(ch: &Channel, tol: f64) -> ChoiReport {
    let choi = ch.choi();
    let herm = linalg::hermiticity_residual(&choi);
    let min = linalg::eigvalsh(&choi)[0];
    let trace_residual = ch.trace_preservation_residual();
    ChoiReport {
        completely_positive: herm <= tol && min >= -tol,
        trace_preserving: trace_residual <= tol,
        min_choi_eigenvalue: min,
        trace_residual,
        unital_residual: ch.unitality_residual(),
    }
}

/// `S(rho) = V rho V^dagger`.
pub fn build_growth(lam: &Isometry) -> Result<Channel> {
    lam.require_valid()?;
    Channel::sandwich(lam.d(), 1, 2, lam.matrix(), lam.matrix())
}

/// The single-site descending maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Descend {
    pub left: Channel,
    pub right: Channel,
    pub mean: Channel,
}

/// `D_L = Tr_2 o S`, `D_R = Tr_1 o S` and their mean `D`.
pub fn build_descend(lam: &Isometry) -> Result<Descend> {
    let s = build_growth(lam)?;
    descend_from_growth(&s)
}

fn descend_from_growth(s: &Channel) -> Result<Descend> {
    let d = s.d();
    let left = Channel::partial_trace(d, 2, &[0])?.compose(s)?;
    let right = Channel::partial_trace(d, 2, &[1])?.compose(s)?;
    let mean = left.average(&right)?;
    Ok(Descend { left, right, mean })
}

/// `(D_L (x) D_L + D_R (x) D_R) / 2` on two-site operators.
pub fn build_slashed(lam: &Isometry) -> Result<Channel> {
    let ds = build_descend(lam)?;
    slashed_from(&ds)
}

fn slashed_from(ds: &Descend) -> Result<Channel> {
    ds.left
        .tensor(&ds.left)?
        .average(&ds.right.tensor(&ds.right)?)
}

/// `D_{2->3}` or `D_{2->4}`. Other lengths have no closed form here.
pub fn build_extension(lam: &Isometry, nu: usize) -> Result<Channel> {
    let set = TreeChannels::new(lam)?;
    set.extension(nu)
}

/// All channels derived from one isometry.
#[derive(Clone, Debug)]
pub struct TreeChannels {
    pub growth: Channel,
    pub descend: Descend,
    pub slashed: Channel,
    /// `D_R (x) D_L`, the map driving the two-site recursion.
    pub cross: Channel,
}

impl TreeChannels {
    pub fn new(lam: &Isometry) -> Result<Self> {
        let growth = build_growth(lam)?;
        let descend = descend_from_growth(&growth)?;
        let slashed = slashed_from(&descend)?;
        let cross = descend.right.tensor(&descend.left)?;
        Ok(TreeChannels {
            growth,
            descend,
            slashed,
            cross,
        })
    }

    pub fn d(&self) -> usize {
        self.growth.d()
    }

    /// `D_L (x) D_R`, which maps the product of equal marginals onto sibling pairs.
    pub fn sibling_product(&self) -> Result<Channel> {
        self.descend.left.tensor(&self.descend.right)
    }

    /// `(D_R (x) S + S (x) D_L) / 2`.
    pub fn extension3(&self) -> Result<Channel> {
        let a = self.descend.right.tensor(&self.growth)?;
        let b = self.growth.tensor(&self.descend.left)?;
        a.average(&b)
    }

    /// `D_{2->nu}` for `nu` in {3, 4}.
    ///
    /// For `nu = 4` the composite `(D_R (x) S (x) D_L) o D_{2->3}` is assembled from
    /// its factorization `[(D_R o D_R) (x) ((S (x) D_L) o S) + ((D_R (x) S) o S) (x)
    /// (D_L o D_L)] / 2`, which never materializes the 3 -> 4 site map.
    pub fn extension(&self, nu: usize) -> Result<Channel> {
        match nu {
            3 => self.extension3(),
            4 => {
                let s = &self.growth;
                let (dl, dr) = (&self.descend.left, &self.descend.right);
                let ss = s.tensor(s)?;
                let right_branch = dr.compose(dr)?.tensor(&s.tensor(dl)?.compose(s)?)?;
                let left_branch = dr.tensor(s)?.compose(s)?.tensor(&dl.compose(dl)?)?;
                let nested = right_branch.average(&left_branch)?;
                ss.average(&nested)
            }
            other => Err(Error::UnsupportedRange(format!(
                "extension channel D_2->{other} is only available for nu in {{3, 4}}"
            ))),
        }
    }

    /// `D_R (x) S (x) D_L` (3 -> 4 sites).
    pub fn middle_growth(&self) -> Result<Channel> {
        self.descend
            .right
            .tensor(&self.growth)?
            .tensor(&self.descend.left)
    }
}
