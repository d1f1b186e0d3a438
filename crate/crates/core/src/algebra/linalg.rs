//! Decompositions on [`ComplexMatrix`], delegated to `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 0; // 0 = nalgebra's unbounded default

/// Full eigendecomposition of a Hermitian matrix. Eigenvalues ascend; the
/// matching orthonormal eigenvectors are the columns of the returned matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::argument("Hermitian eigensolve needs a square matrix"));
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m.to_nalgebra(), 1e-15, 0)
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(m.rows(), m.rows(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::argument("eigenvalues need a square matrix"));
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.to_nalgebra(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::numerical("Schur decomposition did not converge"))?;
    let (_, t) = schur.unpack();
    Ok((0..m.rows()).map(|i| t[(i, i)]).collect())
}

fn padded_svd(m: &ComplexMatrix) -> nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn> {
    // Pad with zero rows so that V is square and spans the whole domain.
    let rows = m.rows().max(m.cols());
    let mut a = DMatrix::<Complex64>::zeros(rows, m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            a[(i, j)] = m[(i, j)];
        }
    }
    a.svd(false, true)
}

/// Orthonormal basis (as columns) of the right nullspace, using singular values
/// below `rel_tol` times the largest one.
pub fn nullspace(m: &ComplexMatrix, rel_tol: f64) -> Result<ComplexMatrix> {
    let svd = padded_svd(m);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::numerical("SVD did not return right singular vectors"))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * smax.max(f64::MIN_POSITIVE);
    let columns: Vec<Vec<Complex64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| (0..m.cols()).map(|j| v_t[(k, j)].conj()).collect())
        .collect();
    if columns.is_empty() {
        return Ok(ComplexMatrix::zeros(m.cols(), 0));
    }
    Ok(ComplexMatrix::from_columns(&columns))
}

/// Orthonormal basis of the `k`-dimensional right singular subspace with the
/// smallest singular values, plus the largest singular value in that subspace.
pub fn smallest_singular_subspace(m: &ComplexMatrix, k: usize) -> Result<(ComplexMatrix, f64)> {
    let svd = padded_svd(m);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::numerical("SVD did not return right singular vectors"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    if k > order.len() {
        return Err(Error::argument("requested subspace larger than the domain"));
    }
    let columns: Vec<Vec<Complex64>> = order[..k]
        .iter()
        .map(|&r| (0..m.cols()).map(|j| v_t[(r, j)].conj()).collect())
        .collect();
    let worst = order[..k].iter().map(|&r| svd.singular_values[r]).fold(0.0, f64::max);
    Ok((ComplexMatrix::from_columns(&columns), worst))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::argument("only square matrices can be inverted"));
    }
    m.to_nalgebra()
        .lu()
        .try_inverse()
        .map(|inv| ComplexMatrix::from_nalgebra(&inv))
        .ok_or_else(|| Error::numerical("matrix is singular"))
}

/// Least-squares solution of `a x = b`.
pub fn least_squares(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.rows() != b.len() {
        return Err(Error::argument("right-hand side length mismatch"));
    }
    let svd = a.to_nalgebra().svd(true, true);
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::numerical(format!("least-squares solve failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

/// Smallest singular value divided by the largest.
pub fn inverse_condition(m: &ComplexMatrix) -> f64 {
    let sv = m.to_nalgebra().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// One eigenvalue cluster of a small general matrix.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: Complex64,
    /// Orthonormal basis of the (numerical) eigenspace, as columns.
    pub basis: ComplexMatrix,
}

/// Eigenvalues of a small (diagonalizable) matrix, grouped into clusters whose
/// members lie within `cluster_tol` of each other, each with its eigenspace.
pub fn eigen_clusters(m: &ComplexMatrix, cluster_tol: f64) -> Result<Vec<EigenCluster>> {
    let values = eigenvalues(m)?;
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for v in values {
        match clusters.iter_mut().find(|c| c.iter().any(|w| (w - v).norm() <= cluster_tol)) {
            Some(c) => c.push(v),
            None => clusters.push(vec![v]),
        }
    }
    let n = m.rows();
    clusters
        .into_iter()
        .map(|members| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            let shifted = ComplexMatrix::from_fn(n, n, |i, j| m[(i, j)] - if i == j { mean } else { ZERO });
            let (basis, _) = smallest_singular_subspace(&shifted, members.len())?;
            Ok(EigenCluster { value: mean, basis })
        })
        .collect()
}

/// Gram-Schmidt orthonormalization of the columns of `m` (columns with
/// residual norm below `tol` are dropped).
pub fn orthonormalize_columns(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for b in &basis {
                let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= overlap * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    if basis.is_empty() {
        return ComplexMatrix::zeros(m.rows(), 0);
    }
    ComplexMatrix::from_columns(&basis)
}

pub(crate) fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[allow(dead_code)]
pub(crate) fn unit(n: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; n];
    v[k] = ONE;
    v
}
