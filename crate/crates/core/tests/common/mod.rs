//! Independent reference implementations used to cross-check the library.
//!
//! Everything here works on plain state vectors and Kraus operators with explicit
//! index loops, sharing no code with the superoperator machinery under test.

#![allow(dead_code)]

use hbts::linalg::{c, CMatrix, CVector, C64};
use hbts::tensor_core::Isometry;

pub fn zero() -> C64 {
    c(0.0, 0.0)
}

/// Digits of `i` in base `d` over `n` places, most significant first.
pub fn digits(mut i: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = i % d;
        i /= d;
    }
    out
}

pub fn index(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |a, &x| a * d + x)
}

/// Partial trace of an `n`-site operator onto the sites in `keep` (in that order).
pub fn partial_trace(m: &CMatrix, d: usize, n: usize, keep: &[usize]) -> CMatrix {
    let k = keep.len();
    let dk = d.pow(k as u32);
    let mut out = CMatrix::zeros(dk, dk);
    let dim = d.pow(n as u32);
    for r in 0..dim {
        let rd = digits(r, d, n);
        for col in 0..dim {
            let cd = digits(col, d, n);
            let traced_equal = (0..n).filter(|s| !keep.contains(s)).all(|s| rd[s] == cd[s]);
            if !traced_equal {
                continue;
            }
            let kr: Vec<usize> = keep.iter().map(|&s| rd[s]).collect();
            let kc: Vec<usize> = keep.iter().map(|&s| cd[s]).collect();
            out[(index(&kr, d), index(&kc, d))] += m[(r, col)];
        }
    }
    out
}

/// `V rho V^dagger`.
pub fn grow(lam: &Isometry, rho: &CMatrix) -> CMatrix {
    lam.matrix() * rho * lam.matrix().adjoint()
}

pub fn descend_left(lam: &Isometry, rho: &CMatrix) -> CMatrix {
    partial_trace(&grow(lam, rho), lam.d(), 2, &[0])
}

pub fn descend_right(lam: &Isometry, rho: &CMatrix) -> CMatrix {
    partial_trace(&grow(lam, rho), lam.d(), 2, &[1])
}

/// Kraus operators `K_j = (I (x) <j|) V` and `(<j| (x) I) V` of the two descend maps.
pub fn descend_kraus(lam: &Isometry) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let d = lam.d();
    let v = lam.matrix();
    let left = (0..d)
        .map(|j| CMatrix::from_fn(d, d, |a, u| v[(a * d + j, u)]))
        .collect();
    let right = (0..d)
        .map(|j| CMatrix::from_fn(d, d, |b, u| v[(j * d + b, u)]))
        .collect();
    (left, right)
}

/// `(E (x) F)(X)` for maps given by Kraus lists, on a two-site operator.
pub fn kraus_pair(e: &[CMatrix], f: &[CMatrix], x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for a in e {
        for b in f {
            let k = a.kronecker(b);
            out += &k * x * k.adjoint();
        }
    }
    out
}

/// `(D_L (x) D_L + D_R (x) D_R)(X) / 2` from Kraus operators.
pub fn pair_descend(lam: &Isometry, x: &CMatrix) -> CMatrix {
    let (l, r) = descend_kraus(lam);
    (kraus_pair(&l, &l, x) + kraus_pair(&r, &r, x)).scale(0.5)
}

/// Tree state of depth `n`: each site of level `k` is replaced by two through `V`, the
/// whole level at once, starting from the top tensor read as a two-site vector.
pub fn tree_state(lam: &Isometry, top: &CMatrix, n: u32) -> CVector {
    let d = lam.d();
    let mut psi = CVector::from_fn(d * d, |i, _| top[(i / d, i % d)]);
    let mut sites = 2;
    for _ in 1..n {
        let mut big = lam.matrix().clone();
        for _ in 1..sites {
            big = big.kronecker(lam.matrix());
        }
        psi = big * psi;
        sites *= 2;
    }
    psi
}

/// Averaged `nu`-site reduced density matrix over all cyclic windows.
pub fn averaged_rdm(psi: &CVector, d: usize, n_sites: usize, nu: usize) -> CMatrix {
    let rho = psi * psi.adjoint();
    let dim = d.pow(nu as u32);
    let mut acc = CMatrix::zeros(dim, dim);
    for a in 0..n_sites {
        let keep: Vec<usize> = (0..nu).map(|j| (a + j) % n_sites).collect();
        acc += partial_trace(&rho, d, n_sites, &keep);
    }
    acc.unscale(n_sites as f64)
}

/// Permutation matrix moving site `j` to site `j + 1` on a ring.
pub fn shift_matrix(d: usize, n: usize) -> CMatrix {
    let dim = d.pow(n as u32);
    let mut t = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let ds = digits(i, d, n);
        let mut moved = vec![0; n];
        for s in 0..n {
            moved[(s + 1) % n] = ds[s];
        }
        t[(index(&moved, d), i)] = c(1.0, 0.0);
    }
    t
}

/// `(1/N) sum_alpha T^alpha (H (x) I) T^-alpha` with `H` on the leading sites.
pub fn ring_hamiltonian(h: &CMatrix, d: usize, nu: usize, n: usize) -> CMatrix {
    let rest = CMatrix::identity(d.pow((n - nu) as u32), d.pow((n - nu) as u32));
    let placed = h.kronecker(&rest);
    let t = shift_matrix(d, n);
    let mut acc = CMatrix::zeros(placed.nrows(), placed.ncols());
    let mut cur = placed;
    for _ in 0..n {
        acc += &cur;
        cur = &t * cur * t.adjoint();
    }
    acc.unscale(n as f64)
}

/// Fixed point by plain iteration.
pub fn iterate_to_fixed_point<F: Fn(&CMatrix) -> CMatrix>(
    f: F,
    start: CMatrix,
    steps: usize,
) -> CMatrix {
    let mut x = start;
    for _ in 0..steps {
        x = f(&x);
    }
    x
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
