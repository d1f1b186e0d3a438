//! Exact diagonalization of the chains, resolution into charge sectors and a
//! common eigenbasis of the commuting transfer-matrix family, and the
//! analytic form of each transfer-matrix eigenvalue `Λ(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{linalg, root_of_unity, ChargeKind, ComplexMatrix, ONE, ZERO};
use crate::bethe::canonical_root;
use crate::error::{Error, Result};
use crate::transfer::{ChainSpec, Variant};
use crate::weights::{g, g1};

/// Energies closer than this are treated as one degenerate level.
const ENERGY_CLUSTER_TOL: f64 = 1e-8;
/// Spectral parameter used to split levels the charges leave degenerate.
pub const RESOLVING_X: f64 = 0.09;

/// Charge label of an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// Z(n) charge: the rotation `Π_j X_j` has eigenvalue `ω^{−Q}`.
    Q(u8),
    /// Charge-conjugation parity `ν_c = ±1`.
    Nu(i8),
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Q(q) => write!(f, "Q={q}"),
            Sector::Nu(nu) => write!(f, "nu={nu:+}"),
        }
    }
}

/// One state of the simultaneous eigenbasis of `H`, its charge and `T(x)`.
#[derive(Debug, Clone)]
pub struct EigenState {
    pub vector: Vec<Complex64>,
    pub energy: f64,
    pub charges: Vec<(ChargeKind, Complex64)>,
    pub sector: Sector,
    /// Index of the degenerate energy level the state belongs to.
    pub degeneracy_group: usize,
    /// True if even `T(x₀)` leaves the state inside a degenerate block.
    pub family_degenerate: bool,
    /// `‖Hv − Ev‖ / ‖v‖`.
    pub eig_residual: f64,
}

/// Full eigendecomposition of a Hermitian matrix: `(energy, vector, residual)`
/// in ascending energy order.
pub fn eigensolve_hermitian(h: &ComplexMatrix) -> Result<Vec<(f64, Vec<Complex64>, f64)>> {
    if !h.is_square() {
        return Err(Error::argument("Hamiltonian must be square"));
    }
    let scale = h.max_abs().max(1.0);
    if h.hermiticity_defect() > 1e-10 * scale {
        return Err(Error::argument(format!(
            "matrix is not Hermitian (defect {:.2e})",
            h.hermiticity_defect()
        )));
    }
    let (values, vectors) = linalg::hermitian_eigen(h)?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let v = vectors.column(k);
            let hv = h.mul_vec(&v);
            let r: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
            let norm = linalg::vector_norm(&v);
            (e, v, r / norm)
        })
        .collect())
}

/// The charge whose eigenvalue labels the sectors of `variant`.
pub fn sector_charge(variant: Variant) -> ChargeKind {
    match variant {
        Variant::Periodic | Variant::Z3Plus | Variant::Z3Minus | Variant::BulkXdagger | Variant::ZnTwist(_) => {
            ChargeKind::Z3
        }
        Variant::Conj | Variant::BulkConj | Variant::ZnConj => ChargeKind::Z2,
    }
}

/// Sector label for the eigenvalue `value` of the charge `kind` on `n` states.
pub fn sector_label(kind: ChargeKind, value: Complex64, n: usize) -> Result<Sector> {
    match kind {
        ChargeKind::Z3 => {
            let (q, dist) = (0..n)
                .map(|q| (q, (root_of_unity(n, -(q as i64)) - value).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("n >= 2");
            if dist > 1e-6 {
                return Err(Error::Consistency(format!("charge eigenvalue {value} is not an n-th root of unity")));
            }
            Ok(Sector::Q(q as u8))
        }
        ChargeKind::Z2 => {
            if (value - ONE).norm() < 1e-6 {
                Ok(Sector::Nu(1))
            } else if (value + ONE).norm() < 1e-6 {
                Ok(Sector::Nu(-1))
            } else {
                Err(Error::Consistency(format!("parity eigenvalue {value} is not ±1")))
            }
        }
    }
}

/// Splits each block (orthonormal columns) into eigenspaces of `op`
/// restricted to it. Returns the sub-blocks with their eigenvalues.
fn refine(blocks: Vec<ComplexMatrix>, op: &ComplexMatrix, tol: f64) -> Result<Vec<(ComplexMatrix, Complex64)>> {
    let mut out = Vec::new();
    for v in blocks {
        let projected = &v.adjoint() * &(op * &v);
        if v.cols() == 1 {
            out.push((v, projected[(0, 0)]));
            continue;
        }
        let scale = projected.max_abs().max(1e-300);
        for cluster in linalg::eigen_clusters(&projected, tol * scale)? {
            out.push((&v * &cluster.basis, cluster.value));
        }
    }
    Ok(out)
}

/// Eigenstates of the chain `spec` (Hamiltonian `h`), resolved into a common
/// eigenbasis of `H`, the sector charge and `T(x₀)`.
pub fn resolve_sectors(spec: &ChainSpec, h: &ComplexMatrix) -> Result<Vec<EigenState>> {
    let kind = sector_charge(spec.variant);
    let charge = crate::algebra::global_charge(kind, spec.length, spec.n)?;
    let defect = h.commutator(&charge).max_abs();
    if defect > 1e-10 {
        return Err(Error::Consistency(format!(
            "charge {kind:?} does not commute with the Hamiltonian (residual {defect:.2e})"
        )));
    }
    let solved = eigensolve_hermitian(h)?;
    let dim = h.rows();
    let t0 = spec.transfer(Complex64::new(RESOLVING_X, 0.0))?;

    // Group degenerate levels.
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (k, (e, _, _)) in solved.iter().enumerate() {
        match levels.last_mut() {
            Some(level) if (solved[level[0]].0 - e).abs() < ENERGY_CLUSTER_TOL => level.push(k),
            _ => levels.push(vec![k]),
        }
    }

    let mut states = Vec::with_capacity(dim);
    for (group, level) in levels.iter().enumerate() {
        let energy = level.iter().map(|&k| solved[k].0).sum::<f64>() / level.len() as f64;
        let columns: Vec<Vec<Complex64>> = level.iter().map(|&k| solved[k].1.clone()).collect();
        let block = ComplexMatrix::from_columns(&columns);
        let by_charge = refine(vec![block], &charge, 1e-6)?;
        for (sub, _) in by_charge {
            for (fine, _) in refine(vec![sub], &t0, 1e-7)? {
                let degenerate = fine.cols() > 1;
                for c in 0..fine.cols() {
                    let v = fine.column(c);
                    let hv = h.mul_vec(&v);
                    let residual = hv.iter().zip(&v).map(|(a, b)| (a - b * energy).norm_sqr()).sum::<f64>().sqrt()
                        / linalg::vector_norm(&v);
                    let q = linalg::inner(&v, &charge.mul_vec(&v));
                    states.push(EigenState {
                        sector: sector_label(kind, q, spec.n)?,
                        charges: vec![(kind, q)],
                        vector: v,
                        energy,
                        degeneracy_group: group,
                        family_degenerate: degenerate,
                        eig_residual: residual,
                    });
                }
            }
        }
    }
    states.sort_by(|a, b| {
        a.sector
            .cmp(&b.sector)
            .then(a.energy.total_cmp(&b.energy))
    });
    Ok(states)
}

/// Number of states per sector.
pub fn sector_sizes(states: &[EigenState]) -> Vec<(Sector, usize)> {
    let mut out: Vec<(Sector, usize)> = Vec::new();
    for s in states {
        match out.iter_mut().find(|(sec, _)| *sec == s.sector) {
            Some((_, count)) => *count += 1,
            None => out.push((s.sector, 1)),
        }
    }
    out.sort();
    out
}

/// `(T v)_i / v_i` at the largest component, after checking that all
/// significant components give the same ratio to 1e-8 relative.
pub fn eigenvalue_from_product(tv: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    let (imax, vmax) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .ok_or_else(|| Error::argument("empty vector"))?;
    let lambda = tv[imax] / vmax;
    let norm = linalg::vector_norm(v);
    let mismatch = tv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm())
        .fold(0.0, f64::max)
        / (norm * lambda.norm().max(1e-300));
    if mismatch > 1e-8 {
        return Err(Error::Degeneracy(format!(
            "state is not an eigenvector of the transfer matrix (component mismatch {mismatch:.2e})"
        )));
    }
    Ok(lambda)
}

/// `Λ(x)` for an eigenstate of the commuting family.
pub fn lambda_of_x(state: &EigenState, spec: &ChainSpec, x: Complex64) -> Result<Complex64> {
    let t = spec.transfer(x)?;
    eigenvalue_from_product(&t.mul_vec(&state.vector), &state.vector)
}

/// Interpolated form of one transfer-matrix eigenvalue:
/// `Λ(x) [g(x) g₁(x)]^L = Σ_k c_k e^{2ikx}`, `k ∈ [lo, lo + N]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaForm {
    pub length: usize,
    /// Asymptotic exponent: the trimmed exponent range in `z = e^{ix}` is `[−N − μ, N − μ]`.
    pub mu: i32,
    /// Zeros `ξ_k = π/6 − x_k`, real part reduced into (−π/2, π/2].
    pub zeros_xi: Vec<Complex64>,
    pub root_count: usize,
    /// `Λ(π/6)` from the form; the transfer matrix is the identity there.
    pub normalization_check: Complex64,
    /// Lowest retained power of `w = e^{2ix}`.
    pub lowest_power: i32,
    /// Retained coefficients, from `lowest_power` upward.
    pub coefficients: Vec<Complex64>,
    /// Set when a discarded or retained coefficient lies within a factor 10
    /// of the trimming threshold.
    pub flagged: bool,
    /// Largest relative mismatch at the held-out validation points.
    pub reconstruction_error: f64,
}

const TRIM_REL: f64 = 1e-8;
const GRID_OFFSET: f64 = 0.013;
const GRID_AVOID: f64 = 0.03;

fn gg1(x: Complex64) -> Complex64 {
    g(x) * g1(x)
}

impl LambdaForm {
    fn polynomial(&self, x: Complex64) -> (Complex64, Complex64) {
        let w = (Complex64::new(0.0, 2.0) * x).exp();
        let mut p = ZERO;
        let mut dp = ZERO;
        for (i, c) in self.coefficients.iter().enumerate() {
            let k = self.lowest_power + i as i32;
            let term = c * w.powi(k);
            p += term;
            dp += term * Complex64::new(0.0, 2.0 * k as f64);
        }
        (p, dp)
    }

    /// `Λ(x)` reconstructed from the form.
    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        self.polynomial(x).0 / gg1(x).powi(self.length as i32)
    }

    /// `Λ'(x) / Λ(x)` from the form.
    pub fn log_derivative(&self, x: Complex64) -> Complex64 {
        let (p, dp) = self.polynomial(x);
        let s = Complex64::new(PI / 6.0, 0.0) + x;
        let t = Complex64::new(PI / 3.0, 0.0) - x;
        let dlog_gg1 = s.cos() / s.sin() - t.cos() / t.sin();
        dp / p - dlog_gg1 * self.length as f64
    }

    /// `−Λ'(0)/Λ(0) − 4L/√3`, the energy of the state in the traceless normalization.
    pub fn energy(&self) -> f64 {
        (-self.log_derivative(ZERO)).re - 4.0 * self.length as f64 / 3f64.sqrt()
    }
}

/// Real sample points covering one period of `Λ`, kept away from the weight
/// singularities of the three-state model.
pub fn sampling_grid(count: usize, offset: f64) -> Vec<f64> {
    let singular = [-PI / 6.0, PI / 3.0];
    (0..count)
        .map(|m| {
            let mut x = -PI / 2.0 + offset + PI * m as f64 / count as f64;
            while singular
                .iter()
                .any(|&z| crate::weights::reduce_mod_pi(x - z).abs() < GRID_AVOID)
            {
                x += 0.5 * PI / count as f64;
            }
            x
        })
        .collect()
}

/// Evaluates `Λ` on many x for every state at once: `values[x][state]`.
pub fn lambda_table(spec: &ChainSpec, states: &[EigenState], xs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let columns: Vec<Vec<Complex64>> = states.iter().map(|s| s.vector.clone()).collect();
    let v = ComplexMatrix::from_columns(&columns);
    xs.iter()
        .map(|&x| {
            let tv = &spec.transfer(Complex64::new(x, 0.0))? * &v;
            (0..states.len())
                .map(|k| eigenvalue_from_product(&tv.column(k), &states[k].vector))
                .collect()
        })
        .collect()
}

/// Least-squares Laurent fit of `Λ(x)(g g₁)^L` from samples `(x, Λ(x))`,
/// trimming and root extraction.
pub fn fit_lambda_form(length: usize, samples: &[(f64, Complex64)], held_out: &[(f64, Complex64)]) -> Result<LambdaForm> {
    let max_power = length as i32 + 1;
    let powers: Vec<i32> = (-max_power..=max_power).collect();
    if samples.len() <= powers.len() {
        return Err(Error::Interpolation("not enough samples for an overdetermined fit".into()));
    }
    let a = ComplexMatrix::from_fn(samples.len(), powers.len(), |m, k| {
        (Complex64::new(0.0, 2.0 * powers[k] as f64 * samples[m].0)).exp()
    });
    let rhs: Vec<Complex64> = samples
        .iter()
        .map(|&(x, l)| l * gg1(Complex64::new(x, 0.0)).powi(length as i32))
        .collect();
    let coeffs = linalg::least_squares(&a, &rhs)?;
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if cmax == 0.0 {
        return Err(Error::Interpolation("eigenvalue vanishes identically".into()));
    }
    let threshold = TRIM_REL * cmax;
    let keep: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k].norm() >= threshold).collect();
    let (lo, hi) = (keep[0], *keep.last().unwrap());
    let flagged = coeffs
        .iter()
        .any(|c| c.norm() > threshold / 10.0 && c.norm() < threshold * 10.0);
    let retained: Vec<Complex64> = coeffs[lo..=hi].to_vec();
    let lowest_power = powers[lo];
    let highest_power = powers[hi];
    let root_count = (highest_power - lowest_power) as usize;
    // In z = e^{ix} the exponent range is [2·lowest, 2·highest].
    let mu = -(highest_power + lowest_power);

    let zeros_xi = polynomial_roots(&retained)?
        .into_iter()
        .map(|w| {
            let x = Complex64::new(w.arg() / 2.0, -w.norm().ln() / 2.0);
            let xi = Complex64::new(PI / 6.0, 0.0) - x;
            Complex64::new(crate::weights::reduce_mod_pi(xi.re), xi.im)
        })
        .collect();

    let mut form = LambdaForm {
        length,
        mu,
        zeros_xi,
        root_count,
        normalization_check: ZERO,
        lowest_power,
        coefficients: retained,
        flagged,
        reconstruction_error: 0.0,
    };
    form.normalization_check = form.evaluate(Complex64::new(PI / 6.0, 0.0));
    form.reconstruction_error = held_out
        .iter()
        .map(|&(x, l)| (form.evaluate(Complex64::new(x, 0.0)) - l).norm() / l.norm().max(1e-300))
        .fold(0.0, f64::max);
    if form.reconstruction_error > 1e-8 {
        return Err(Error::Interpolation(format!(
            "reconstruction mismatch {:.2e} at held-out points",
            form.reconstruction_error
        )));
    }
    Ok(form)
}

/// Roots of `Σ_k c_k w^k` (ascending coefficients) via the companion matrix.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let companion = ComplexMatrix::from_fn(degree, degree, |i, j| {
        if j == degree - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    linalg::eigenvalues(&companion)
}

/// Number of samples on the fitting grid.
pub fn grid_size(length: usize) -> usize {
    4 * length + 9
}

/// Fitting grid and held-out points used for every state of a chain.
pub fn fitting_points(length: usize) -> (Vec<f64>, Vec<f64>) {
    let grid = sampling_grid(grid_size(length), GRID_OFFSET);
    let held_out = sampling_grid(5, GRID_OFFSET + 0.29);
    (grid, held_out)
}

/// Fits the `Λ`-form of every state of the chain.
pub fn interpolate_lambda_forms(spec: &ChainSpec, states: &[EigenState]) -> Result<Vec<Result<LambdaForm>>> {
    let (grid, held_out) = fitting_points(spec.length);
    let mut xs = grid.clone();
    xs.extend(&held_out);
    let table = lambda_table(spec, states, &xs)?;
    Ok((0..states.len())
        .map(|k| {
            let samples: Vec<(f64, Complex64)> = grid.iter().enumerate().map(|(m, &x)| (x, table[m][k])).collect();
            let checks: Vec<(f64, Complex64)> = held_out
                .iter()
                .enumerate()
                .map(|(m, &x)| (x, table[grid.len() + m][k]))
                .collect();
            fit_lambda_form(spec.length, &samples, &checks)
        })
        .collect())
}

pub fn interpolate_lambda_form(state: &EigenState, spec: &ChainSpec) -> Result<LambdaForm> {
    interpolate_lambda_forms(spec, std::slice::from_ref(state))?
        .pop()
        .expect("one state in, one form out")
}

/// Bethe-root seeds `λ_k = −i(ξ_k − π/12)`, in the canonical strip.
pub fn seeds_from_lambda(form: &LambdaForm) -> Vec<Complex64> {
    form.zeros_xi.iter().map(|&xi| seed_from_xi(xi)).collect()
}

pub fn seed_from_xi(xi: Complex64) -> Complex64 {
    let lambda = Complex64::new(0.0, -1.0) * (xi - Complex64::new(PI / 12.0, 0.0));
    canonical_root(lambda)
}

/// Expected number of finite Bethe roots per sector.
pub fn expected_root_count(variant: Variant, sector: Sector, length: usize) -> Option<usize> {
    let l = length;
    match (variant, sector) {
        (Variant::Z3Plus | Variant::Z3Minus, Sector::Q(0)) => Some(2 * l - 2),
        (Variant::Z3Plus | Variant::Z3Minus, Sector::Q(_)) => Some(2 * l - 1),
        (Variant::Conj, Sector::Nu(_)) => Some(2 * l),
        (Variant::Periodic, Sector::Q(0)) => Some(2 * l),
        (Variant::Periodic, Sector::Q(_)) => Some(2 * l - 2),
        _ => None,
    }
}

/// Asymptotic exponent: −1, +1 for the twisted sectors Q = 1, 2, otherwise 0.
pub fn expected_mu(variant: Variant, sector: Sector) -> i32 {
    match (variant, sector) {
        (Variant::Z3Plus | Variant::Z3Minus, Sector::Q(1)) => -1,
        (Variant::Z3Plus | Variant::Z3Minus, Sector::Q(2)) => 1,
        _ => 0,
    }
}
