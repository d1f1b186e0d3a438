//! Vertex-model objects built from edge weights: the Lax operator, the
//! R-matrix, Yang–Baxter residuals and the group of boundary seams `G`
//! satisfying `[R(x, y), G ⊗ G] = 0`.
//!
//! Two-site operators act on `C^n ⊗ C^n` with the first factor slowest, so
//! the basis vector `e_i ⊗ e_j` has index `i·n + j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{embed_two_site, linalg, site_algebra, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::rng;
use crate::weights::{Edge, WeightFamily};

/// `𝕃[(i,j),(k,i)] = W_h(j,i) W_v(j,k)`, all other entries zero.
fn lax_from_tables(h: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let n = h.rows();
    let mut out = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j, k * n + i)] = h[(j, i)] * v[(j, k)];
            }
        }
    }
    out
}

/// The Lax operator `𝕃₁₂(x) = Σ W_h(j,i|x) W_v(j,k|x) e_ik ⊗ e_ji`.
pub fn lax(wf: &WeightFamily, x: Complex64) -> Result<ComplexMatrix> {
    let h = wf.table(Edge::Horizontal, x)?;
    let v = wf.table(Edge::Vertical, x)?;
    Ok(lax_from_tables(&h, &v))
}

/// Analytic x-derivative of the Lax operator.
pub fn lax_derivative(wf: &WeightFamily, x: Complex64) -> Result<ComplexMatrix> {
    let h = wf.table(Edge::Horizontal, x)?;
    let v = wf.table(Edge::Vertical, x)?;
    let dh = wf.derivative_table(Edge::Horizontal, x)?;
    let dv = wf.derivative_table(Edge::Vertical, x)?;
    let a = lax_from_tables(&dh, &v);
    let b = lax_from_tables(&h, &dv);
    Ok(&a + &b)
}

/// `R₁₂(x, y)[(i,j),(k,i)] = W_h(j,i|x) W_v(j,k|x−y) / W_h(k,i|y)`.
pub fn r_matrix(wf: &WeightFamily, x: Complex64, y: Complex64) -> Result<ComplexMatrix> {
    let hx = wf.table(Edge::Horizontal, x)?;
    let vxy = wf.table(Edge::Vertical, x - y)?;
    let hy = wf.table(Edge::Horizontal, y)?;
    let n = wf.n();
    let mut out = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for k in 0..n {
            if hy[(k, i)].norm() < 1e-12 {
                return Err(Error::domain(format!(
                    "R-matrix denominator W_h({k},{i}|{y}) vanishes"
                )));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j, k * n + i)] = hx[(j, i)] * vxy[(j, k)] / hy[(k, i)];
            }
        }
    }
    Ok(out)
}

fn relative_difference(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    let scale = lhs.max_abs().max(rhs.max_abs());
    if scale == 0.0 {
        return 0.0;
    }
    lhs.max_abs_diff(rhs) / scale
}

/// Normalized max-entry residual of `R₁₂(x,y) 𝕃₁₃(x) 𝕃₂₃(y) = 𝕃₂₃(y) 𝕃₁₃(x) R₁₂(x,y)`
/// on the triple space `(C^n)^{⊗3}`.
pub fn ybe_residual(wf: &WeightFamily, x: Complex64, y: Complex64) -> Result<f64> {
    let n = wf.n();
    let r12 = embed_two_site(&r_matrix(wf, x, y)?, 1, 2, 3, n)?;
    let l13 = embed_two_site(&lax(wf, x)?, 1, 3, 3, n)?;
    let l23 = embed_two_site(&lax(wf, y)?, 2, 3, 3, n)?;
    let lhs = &(&r12 * &l13) * &l23;
    let rhs = &(&l23 * &l13) * &r12;
    Ok(relative_difference(&lhs, &rhs))
}

/// Normalized max-entry magnitude of `[R₁₂(x,y), G ⊗ G]`.
pub fn seam_residual(wf: &WeightFamily, g: &ComplexMatrix, x: Complex64, y: Complex64) -> Result<f64> {
    let n = wf.n();
    if g.shape() != (n, n) {
        return Err(Error::argument(format!("seam must be {n}x{n}")));
    }
    let gg = g.kron(g);
    let r = r_matrix(wf, x, y)?;
    Ok(relative_difference(&(&r * &gg), &(&gg * &r)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeamLabel {
    Identity,
    /// `X†`, the Z(n) twist by `ω^{-1}`.
    GPlus,
    /// `X`.
    GMinus,
    /// Charge conjugation `C`.
    GConj,
    /// Any other group element, written as a word in `x` and `c`.
    Composite(String),
}

impl std::fmt::Display for SeamLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeamLabel::Identity => write!(f, "identity"),
            SeamLabel::GPlus => write!(f, "g_plus"),
            SeamLabel::GMinus => write!(f, "g_minus"),
            SeamLabel::GConj => write!(f, "g_conj"),
            SeamLabel::Composite(word) => write!(f, "{word}"),
        }
    }
}

/// A boundary-twist matrix, gauge-fixed so its first nonzero entry is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Seam {
    pub label: SeamLabel,
    pub matrix: ComplexMatrix,
}

impl Seam {
    pub fn identity(n: usize) -> Self {
        Self {
            label: SeamLabel::Identity,
            matrix: ComplexMatrix::identity(n),
        }
    }

    /// `G⁽⁺⁾ = X†`.
    pub fn g_plus(n: usize) -> Result<Self> {
        Ok(Self {
            label: SeamLabel::GPlus,
            matrix: site_algebra(n)?.x.adjoint(),
        })
    }

    /// `G⁽⁻⁾ = X`.
    pub fn g_minus(n: usize) -> Result<Self> {
        Ok(Self {
            label: SeamLabel::GMinus,
            matrix: site_algebra(n)?.x,
        })
    }

    /// `G⁽ᶜ⁾ = C`.
    pub fn g_conj(n: usize) -> Result<Self> {
        Ok(Self {
            label: SeamLabel::GConj,
            matrix: site_algebra(n)?.c,
        })
    }

    /// The Z(n) twist seam `X^{n−l}` for `1 ≤ l ≤ n−1`.
    pub fn z_twist(n: usize, l: usize) -> Result<Self> {
        if l == 0 || l >= n {
            return Err(Error::argument(format!("twist index l={l} outside 1..{n}")));
        }
        let matrix = site_algebra(n)?.x.pow((n - l) as u32);
        Ok(Self {
            label: label_for(&matrix).unwrap_or_else(|| SeamLabel::Composite(format!("x^{}", n - l))),
            matrix,
        })
    }

    /// Wraps an arbitrary invertible matrix, normalizing its gauge.
    pub fn from_matrix(matrix: &ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::argument("seam must be square"));
        }
        let normalized = matrix
            .normalized_by_first_nonzero(1e-12)
            .ok_or_else(|| Error::argument("seam matrix is zero"))?;
        if linalg::inverse_condition(&normalized) < 1e-12 {
            return Err(Error::argument("seam matrix is not invertible"));
        }
        let label = label_for(&normalized).unwrap_or_else(|| SeamLabel::Composite("unrecognized".into()));
        Ok(Self {
            label,
            matrix: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        linalg::inverse(&self.matrix)
    }
}

/// Identifies `g` as `X^a C^b` when possible.
fn label_for(g: &ComplexMatrix) -> Option<SeamLabel> {
    let n = g.rows();
    let alg = site_algebra(n).ok()?;
    for b in 0..2u32 {
        for a in 0..n as u32 {
            let candidate = &alg.x.pow(a) * &alg.c.pow(b);
            if candidate.max_abs_diff(g) < 1e-9 {
                let a = a as usize;
                return Some(match (a, b) {
                    (0, 0) => SeamLabel::Identity,
                    (a, 0) if a == n - 1 => SeamLabel::GPlus,
                    (1, 0) => SeamLabel::GMinus,
                    (0, 1) => SeamLabel::GConj,
                    (a, 0) => SeamLabel::Composite(format!("x^{a}")),
                    (1, 1) => SeamLabel::Composite("x·c".to_string()),
                    (a, _) => SeamLabel::Composite(format!("x^{a}·c")),
                });
            }
        }
    }
    None
}

/// Outcome of the seam search.
#[derive(Debug, Clone)]
pub struct SeamDiscovery {
    /// Certified seams, sorted lexicographically by matrix entries.
    pub seams: Vec<Seam>,
    /// Dimension of the joint commutant of the sampled `R(x, y)` matrices.
    pub commutant_dim: usize,
    /// Dimension of the span of `G ⊗ G` over the certified seams.
    pub seam_span_dim: usize,
    /// Whether products of certified seams stay in the set.
    pub closed_under_products: bool,
    pub max_certification_residual: f64,
    /// Seams not expressible as `X^a C^b`.
    pub unrecognized: Vec<Seam>,
}

const CERTIFY_PAIRS: usize = 5;
const SEAM_TOL: f64 = 1e-10;
const NULLSPACE_TOL: f64 = 1e-9;

fn sampling_window(wf: &WeightFamily) -> (f64, f64) {
    (0.02, PI / (2.0 * wf.n() as f64) - 0.02)
}

/// Lexicographic successor of a permutation, `false` after the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `[R, M ⊗ M]` for a monomial `M` with `M[σ(c), c] = φ_c`, relative to `R`.
fn monomial_defect(r: &ComplexMatrix, sigma: &[usize], phase: &[Complex64]) -> f64 {
    let n = sigma.len();
    let dim = n * n;
    let mut inv = vec![0; n];
    for (c, &s) in sigma.iter().enumerate() {
        inv[s] = c;
    }
    let big_sigma = |c: usize| sigma[c / n] * n + sigma[c % n];
    let big_phase = |c: usize| phase[c / n] * phase[c % n];
    let big_inv = |r: usize| inv[r / n] * n + inv[r % n];
    let mut worst: f64 = 0.0;
    for row in 0..dim {
        for col in 0..dim {
            // (R M)[row, col] = R[row, Σ(col)] Φ_col; (M R)[row, col] = Φ_{Σ⁻¹ row} R[Σ⁻¹ row, col].
            let lhs = r[(row, big_sigma(col))] * big_phase(col);
            let src = big_inv(row);
            let rhs = big_phase(src) * r[(src, col)];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst / r.max_abs().max(f64::MIN_POSITIVE)
}

/// Monomial matrices (a permutation times n-th-root-of-unity phases, gauge
/// fixed) commuting with every `R` in `rs`.
fn monomial_candidates(rs: &[ComplexMatrix], n: usize) -> Vec<ComplexMatrix> {
    let roots: Vec<Complex64> = (0..n).map(|k| crate::algebra::root_of_unity(n, k as i64)).collect();
    let mut out = Vec::new();
    let mut sigma: Vec<usize> = (0..n).collect();
    loop {
        // Row-major first nonzero entry sits in row 0, column σ⁻¹(0).
        let pivot = sigma.iter().position(|&s| s == 0).unwrap();
        let free: Vec<usize> = (0..n).filter(|&c| c != pivot).collect();
        let combos = n.pow(free.len() as u32);
        for code in 0..combos {
            let mut phase = vec![ONE; n];
            let mut rest = code;
            for &c in &free {
                phase[c] = roots[rest % n];
                rest /= n;
            }
            if rs.iter().all(|r| monomial_defect(r, &sigma, &phase) < NULLSPACE_TOL) {
                let mut m = ComplexMatrix::zeros(n, n);
                for c in 0..n {
                    m[(sigma[c], c)] = phase[c];
                }
                out.push(m);
            }
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    out
}

/// Dimension of `{M : [R, M] = 0 for all R in rs}` among `n²×n²` matrices.
fn joint_commutant_dim(rs: &[ComplexMatrix]) -> Result<usize> {
    let d = rs[0].rows();
    let unknowns = d * d;
    let mut system = ComplexMatrix::zeros(rs.len() * unknowns, unknowns);
    for (t, r) in rs.iter().enumerate() {
        // (RM − MR)[a,b] = Σ_c R[a,c] M[c,b] − M[a,c] R[c,b]; M[p,q] ↔ unknown p·d+q.
        for a in 0..d {
            for b in 0..d {
                let row = t * unknowns + a * d + b;
                for c in 0..d {
                    system[(row, c * d + b)] += r[(a, c)];
                    system[(row, a * d + c)] -= r[(c, b)];
                }
            }
        }
    }
    Ok(linalg::nullspace(&system, NULLSPACE_TOL)?.cols())
}

fn lexicographic_key(m: &ComplexMatrix) -> Vec<(i64, i64)> {
    m.as_slice()
        .iter()
        .map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64))
        .collect()
}

/// Finds the boundary seams of `wf`: candidates are screened against `trials`
/// seeded `(x, y)` pairs and certified on five further pairs.
pub fn discover_seams(wf: &WeightFamily, trials: usize, seed: u64) -> Result<SeamDiscovery> {
    if trials < 2 {
        return Err(Error::argument("seam discovery needs at least two trial pairs"));
    }
    let n = wf.n();
    let (lo, hi) = sampling_window(wf);
    let mut stream = rng::seeded(seed);
    let pairs = rng::uniform_pairs(&mut stream, lo, hi, trials + CERTIFY_PAIRS);
    let rs = pairs
        .iter()
        .map(|&(x, y)| r_matrix(wf, Complex64::new(x, 0.0), Complex64::new(y, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let (screen, certify) = rs.split_at(trials);

    let commutant_dim = joint_commutant_dim(screen)?;
    let mut seams = Vec::new();
    let mut max_res: f64 = 0.0;
    for m in monomial_candidates(screen, n) {
        let res = certify
            .iter()
            .map(|r| {
                let gg = m.kron(&m);
                relative_difference(&(r * &gg), &(&gg * r))
            })
            .fold(0.0, f64::max);
        if res < SEAM_TOL {
            max_res = max_res.max(res);
            seams.push(Seam::from_matrix(&m)?);
        }
    }
    seams.sort_by_key(|s| std::cmp::Reverse(lexicographic_key(&s.matrix)));
    seams.dedup_by(|a, b| a.matrix.max_abs_diff(&b.matrix) < 1e-9);
    if seams.is_empty() {
        return Err(Error::numerical(format!(
            "no seam certified for {} (commutant dimension {commutant_dim})",
            wf.label()
        )));
    }

    let closed = seams.iter().all(|a| {
        seams.iter().all(|b| {
            let prod = (&a.matrix * &b.matrix).normalized_by_first_nonzero(1e-12);
            prod.is_some_and(|p| seams.iter().any(|s| s.matrix.max_abs_diff(&p) < 1e-9))
        })
    });
    let span_columns: Vec<Vec<Complex64>> = seams
        .iter()
        .map(|s| s.matrix.kron(&s.matrix).as_slice().to_vec())
        .collect();
    let seam_span_dim = linalg::orthonormalize_columns(&ComplexMatrix::from_columns(&span_columns), 1e-9).cols();
    let unrecognized = seams
        .iter()
        .filter(|s| s.label == SeamLabel::Composite("unrecognized".into()))
        .cloned()
        .collect();
    Ok(SeamDiscovery {
        seams,
        commutant_dim,
        seam_span_dim,
        closed_under_products: closed,
        max_certification_residual: max_res,
        unrecognized,
    })
}

/// Whether `g` equals (up to normalization) one of `seams`.
pub fn contains_seam(seams: &[Seam], g: &ComplexMatrix) -> bool {
    match g.normalized_by_first_nonzero(1e-12) {
        Some(g) => seams.iter().any(|s| s.matrix.max_abs_diff(&g) < 1e-9),
        None => false,
    }
}

#[allow(dead_code)]
fn is_permutation_matrix(m: &ComplexMatrix) -> bool {
    m.as_slice().iter().all(|&z| z == ZERO || z == ONE)
        && (0..m.rows()).all(|i| m.row(i).iter().filter(|&&z| z == ONE).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::swap_operator;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lax_at_zero_is_the_permutation() {
        for wf in [
            WeightFamily::potts3(),
            WeightFamily::fateev_zamolodchikov(4).unwrap(),
            WeightFamily::fateev_zamolodchikov(5).unwrap(),
        ] {
            let l = lax(&wf, ZERO).unwrap();
            assert_eq!(l, swap_operator(wf.n()), "{}", wf.label());
        }
    }

    #[test]
    fn lax_entries_by_direct_summation() {
        let wf = WeightFamily::potts3();
        let x = r(0.1);
        let l = lax(&wf, x).unwrap();
        // Independent assembly: Σ_{i,j,k} W_h(j,i) W_v(j,k) e_ik ⊗ e_ji.
        let mut expected = ComplexMatrix::zeros(9, 9);
        for i in 1..=3 {
            for j in 1..=3 {
                for k in 1..=3 {
                    let w = wf.w_h(j - 1, i - 1, x).unwrap() * wf.w_v(j - 1, k - 1, x).unwrap();
                    let term = crate::algebra::weyl_unit(3, i, k)
                        .unwrap()
                        .kron(&crate::algebra::weyl_unit(3, j, i).unwrap());
                    expected += &term.scale(w);
                }
            }
        }
        assert!(l.max_abs_diff(&expected) < 1e-15);
        let at_sixth = lax(&wf, r(PI / 6.0)).unwrap();
        assert!((at_sixth[(0, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn lax_derivative_matches_finite_difference() {
        let wf = WeightFamily::potts3();
        let h = 1e-6;
        for &x in &[0.0, 0.09] {
            let d = lax_derivative(&wf, r(x)).unwrap();
            let fd = (&lax(&wf, r(x + h)).unwrap() - &lax(&wf, r(x - h)).unwrap()).scale(r(0.5 / h));
            assert!(d.max_abs_diff(&fd) < 1e-8);
        }
    }

    #[test]
    fn r_matrix_limits() {
        let wf = WeightFamily::potts3();
        let x = r(0.07);
        assert!(r_matrix(&wf, x, ZERO).unwrap().max_abs_diff(&lax(&wf, x).unwrap()) < 1e-15);
        // At y = x the vertical weights collapse to δ_jk.
        let rxx = r_matrix(&wf, x, x).unwrap();
        let v: Vec<Complex64> = (0..9).map(|k| Complex64::new(k as f64 * 0.3 - 1.0, 0.1 * k as f64)).collect();
        let pv = swap_operator(3).mul_vec(&v);
        let rv = rxx.mul_vec(&v);
        for (a, b) in rv.iter().zip(&pv) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(r_matrix(&wf, r(0.2), r(PI / 6.0)).is_err());
    }

    #[test]
    fn yang_baxter_holds_and_detects_perturbations() {
        let wf = WeightFamily::potts3();
        assert!(ybe_residual(&wf, r(0.13), r(0.07)).unwrap() < 1e-12);
        let fz4 = WeightFamily::fateev_zamolodchikov(4).unwrap();
        assert!(ybe_residual(&fz4, r(0.11), r(0.05)).unwrap() < 1e-12);
        let bad = WeightFamily::potts3().with_perturbation(Edge::Horizontal, 0, 1, 1e-3);
        assert!(ybe_residual(&bad, r(0.13), r(0.07)).unwrap() > 1e-5);
    }

    #[test]
    fn seam_residual_examples() {
        let wf = WeightFamily::potts3();
        let alg = site_algebra(3).unwrap();
        let pairs = rng::uniform_pairs(&mut rng::seeded(3), 0.02, PI / 6.0 - 0.02, 5);
        for (x, y) in pairs {
            assert!(seam_residual(&wf, &alg.x.adjoint(), r(x), r(y)).unwrap() < 1e-12);
        }
        assert_eq!(seam_residual(&wf, &ComplexMatrix::identity(3), r(0.2), r(0.1)).unwrap(), 0.0);
        assert!(seam_residual(&wf, &alg.z, r(0.13), r(0.04)).unwrap() > 1e-3);
    }

    #[test]
    fn permutation_successor_enumerates_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn potts_seams_form_s3() {
        let found = discover_seams(&WeightFamily::potts3(), 2, 11).unwrap();
        assert_eq!(found.seams.len(), 6);
        assert!(found.closed_under_products);
        assert!(found.unrecognized.is_empty());
        assert!(found.max_certification_residual < SEAM_TOL);
        let alg = site_algebra(3).unwrap();
        for g in [&alg.x, &alg.x.adjoint(), &alg.c] {
            assert!(contains_seam(&found.seams, g));
        }
        assert!(found.seams.iter().all(|s| is_permutation_matrix(&s.matrix)));
    }

    #[test]
    fn ising_seam_is_pauli_x() {
        let found = discover_seams(&WeightFamily::fateev_zamolodchikov(2).unwrap(), 2, 5).unwrap();
        let x = site_algebra(2).unwrap().x;
        assert!(contains_seam(&found.seams, &x));
    }
}
