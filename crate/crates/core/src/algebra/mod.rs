//! Dense complex matrix kernel and the Z(n) clock/shift operator algebra.
//!
//! Tensor-product basis convention used throughout the crate: for a chain of
//! `L` sites with `n` states each, the basis index of `|s_1 s_2 … s_L⟩` is
//! `Σ_j s_j n^(L-j)`, i.e. site 1 is the slowest-varying factor.

pub mod linalg;
mod matrix;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use matrix::ComplexMatrix;
pub(crate) use matrix::{ONE, ZERO};

use crate::error::{Error, Result};

/// `exp(2πi k / n)`.
pub fn root_of_unity(n: usize, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// The `n×n` Weyl matrix `e_ij` (1-based indices, as in `e_{ij}`).
pub fn weyl_unit(n: usize, i: usize, j: usize) -> Result<ComplexMatrix> {
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::argument(format!("Weyl indices ({i},{j}) outside 1..={n}")));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i - 1, j - 1)] = ONE;
    Ok(m)
}

/// Single-site operators of the Z(n) algebra.
#[derive(Debug, Clone)]
pub struct SiteAlgebra {
    pub n: usize,
    pub omega: Complex64,
    /// Clock matrix `diag(1, ω, …, ω^(n-1))`.
    pub z: ComplexMatrix,
    /// Cyclic shift, `X e_j = e_(j+1 mod n)`.
    pub x: ComplexMatrix,
    /// Charge conjugation: fixes the first state and reverses the rest.
    pub c: ComplexMatrix,
}

pub fn site_algebra(n: usize) -> Result<SiteAlgebra> {
    if n < 2 {
        return Err(Error::argument(format!("site dimension must be at least 2, got {n}")));
    }
    let omega = root_of_unity(n, 1);
    let z = ComplexMatrix::diagonal(&(0..n as i64).map(|k| root_of_unity(n, k)).collect::<Vec<_>>());
    let x = ComplexMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { ONE } else { ZERO });
    let c = ComplexMatrix::from_fn(n, n, |i, j| if (n - i) % n == j { ONE } else { ZERO });
    Ok(SiteAlgebra { n, omega, z, x, c })
}

/// Decomposes a basis index into per-site states (site 1 first).
pub fn basis_digits(mut index: usize, sites: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; sites];
    for d in digits.iter_mut().rev() {
        *d = index % n;
        index /= n;
    }
    digits
}

pub fn basis_index(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}

pub fn checked_dimension(n: usize, sites: usize) -> Result<usize> {
    let max_dim = 1usize << 24;
    let mut dim = 1usize;
    for _ in 0..sites {
        dim = dim
            .checked_mul(n)
            .filter(|&d| d <= max_dim)
            .ok_or_else(|| Error::argument(format!("Hilbert space {n}^{sites} is too large for dense matrices")))?;
    }
    Ok(dim)
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` with `op` in slot `site` (1-based).
pub fn embed_at_site(op: &ComplexMatrix, site: usize, sites: usize, n: usize) -> Result<ComplexMatrix> {
    if op.shape() != (n, n) {
        return Err(Error::argument(format!(
            "single-site operator must be {n}x{n}, got {}x{}",
            op.rows(),
            op.cols()
        )));
    }
    if !(1..=sites).contains(&site) {
        return Err(Error::argument(format!("site {site} outside 1..={sites}")));
    }
    let dim = checked_dimension(n, sites)?;
    let stride = n.pow((sites - site) as u32);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let s = (col / stride) % n;
        let base = col - s * stride;
        for t in 0..n {
            let v = op[(t, s)];
            if v != ZERO {
                out[(base + t * stride, col)] = v;
            }
        }
    }
    Ok(out)
}

/// Embeds a two-site operator `op` (an `n²×n²` matrix on `C^n ⊗ C^n`) so that
/// its first tensor factor acts on `first` and its second on `second`
/// (1-based, distinct, any order).
pub fn embed_two_site(
    op: &ComplexMatrix,
    first: usize,
    second: usize,
    sites: usize,
    n: usize,
) -> Result<ComplexMatrix> {
    let dim = checked_dimension(n, sites)?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    accumulate_two_site(&mut out, op, first, second, sites, n, ONE)?;
    Ok(out)
}

/// Adds `scale · op_{first,second}` to `target` without forming the embedded
/// operator.
pub fn accumulate_two_site(
    target: &mut ComplexMatrix,
    op: &ComplexMatrix,
    first: usize,
    second: usize,
    sites: usize,
    n: usize,
    scale: Complex64,
) -> Result<()> {
    if op.shape() != (n * n, n * n) {
        return Err(Error::argument(format!("two-site operator must be {0}x{0}", n * n)));
    }
    if first == second || !(1..=sites).contains(&first) || !(1..=sites).contains(&second) {
        return Err(Error::argument(format!(
            "invalid site pair ({first},{second}) for a chain of {sites}"
        )));
    }
    let dim = checked_dimension(n, sites)?;
    if target.shape() != (dim, dim) {
        return Err(Error::argument("accumulation target has the wrong dimension"));
    }
    let stride_a = n.pow((sites - first) as u32);
    let stride_b = n.pow((sites - second) as u32);
    for col in 0..dim {
        let a = (col / stride_a) % n;
        let b = (col / stride_b) % n;
        let base = col - a * stride_a - b * stride_b;
        let op_col = a * n + b;
        for ta in 0..n {
            for tb in 0..n {
                let v = op[(ta * n + tb, op_col)];
                if v != ZERO {
                    target[(base + ta * stride_a + tb * stride_b, col)] += scale * v;
                }
            }
        }
    }
    Ok(())
}

/// Adds `scale · op_site` to `target` without forming the embedded operator.
pub fn accumulate_at_site(
    target: &mut ComplexMatrix,
    op: &ComplexMatrix,
    site: usize,
    sites: usize,
    n: usize,
    scale: Complex64,
) -> Result<()> {
    if op.shape() != (n, n) {
        return Err(Error::argument(format!("single-site operator must be {n}x{n}")));
    }
    if !(1..=sites).contains(&site) {
        return Err(Error::argument(format!("site {site} outside 1..={sites}")));
    }
    let dim = checked_dimension(n, sites)?;
    if target.shape() != (dim, dim) {
        return Err(Error::argument("accumulation target has the wrong dimension"));
    }
    let stride = n.pow((sites - site) as u32);
    for col in 0..dim {
        let s = (col / stride) % n;
        let base = col - s * stride;
        for t in 0..n {
            let v = op[(t, s)];
            if v != ZERO {
                target[(base + t * stride, col)] += scale * v;
            }
        }
    }
    Ok(())
}

/// Permutation operator `P` on `C^n ⊗ C^n`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (r / n, r % n);
        if c == j * n + i {
            ONE
        } else {
            ZERO
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeKind {
    /// `Π_j X_j`, the Z(n) rotation.
    Z3,
    /// `Π_j C_j`, charge conjugation.
    Z2,
}

/// Global symmetry charge on `sites` sites: `Π_j X_j` or `Π_j C_j`.
pub fn global_charge(kind: ChargeKind, sites: usize, n: usize) -> Result<ComplexMatrix> {
    if sites == 0 {
        return Err(Error::argument("chain length must be at least 1"));
    }
    let alg = site_algebra(n)?;
    let local = match kind {
        ChargeKind::Z3 => &alg.x,
        ChargeKind::Z2 => &alg.c,
    };
    product_operator(&vec![local.clone(); sites], n)
}

/// `op_1 ⊗ op_2 ⊗ … ⊗ op_L` for single-site permutation-like or general
/// operators, built directly in the product basis.
pub fn product_operator(ops: &[ComplexMatrix], n: usize) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::identity(1);
    for op in ops {
        if op.shape() != (n, n) {
            return Err(Error::argument("product_operator expects n×n factors"));
        }
        out = out.kron(op);
    }
    Ok(out)
}

/// Max-entry magnitude of `AB − BA`.
pub fn commutant_residual(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::argument(format!(
            "commutator needs equal square shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.commutator(b).max_abs())
}

/// A matrix with exactly one nonzero entry per row and column, stored as
/// `M[perm[c], c] = phase[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    perm: Vec<usize>,
    phase: Vec<Complex64>,
}

impl Monomial {
    /// Recognizes a monomial matrix; `None` if `m` is not one.
    pub fn from_matrix(m: &ComplexMatrix) -> Option<Self> {
        if !m.is_square() {
            return None;
        }
        let dim = m.rows();
        let mut perm = vec![usize::MAX; dim];
        let mut phase = vec![ZERO; dim];
        let mut hit = vec![false; dim];
        for c in 0..dim {
            for r in 0..dim {
                let v = m[(r, c)];
                if v != ZERO {
                    if perm[c] != usize::MAX || hit[r] {
                        return None;
                    }
                    perm[c] = r;
                    phase[c] = v;
                    hit[r] = true;
                }
            }
            if perm[c] == usize::MAX {
                return None;
            }
        }
        Some(Self { perm, phase })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `M A M⁻¹`, computed by index relabeling.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        assert_eq!(a.shape(), (dim, dim), "conjugation dimension mismatch");
        let mut out = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                out[(self.perm[r], self.perm[c])] = self.phase[r] * a[(r, c)] / self.phase[c];
            }
        }
        out
    }
}
