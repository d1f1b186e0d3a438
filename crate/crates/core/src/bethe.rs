//! Bethe equations of the periodic, Z(3)-twisted and conjugation-twisted
//! three-state chains: residuals, damped Newton refinement, and energy and
//! momentum from the roots.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{linalg, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use crate::spectra::Sector;
use crate::weights::reduce_mod_pi;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetheKind {
    Periodic,
    /// The `ω^{-1}` twist (chain `H⁽⁺⁾`).
    Z3,
    Conj,
}

/// One Bethe system: kind, chain length, sector and the implied root count
/// and right-hand-side phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetheSystem {
    pub kind: BetheKind,
    pub length: usize,
    pub sector: Sector,
    pub root_count: usize,
    pub phase: Complex64,
    /// Chemical-potential term `μ_Q` (zero except for twisted Q ≠ 0).
    pub mu: i32,
}

impl BetheSystem {
    pub fn new(kind: BetheKind, length: usize, sector: Sector) -> Result<Self> {
        if length < 1 {
            return Err(Error::argument("chain length must be positive"));
        }
        let l = length;
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        let (root_count, phase, mu) = match (kind, sector) {
            (BetheKind::Periodic, Sector::Q(0)) => (2 * l, Complex64::new(sign, 0.0), 0),
            (BetheKind::Periodic, Sector::Q(1 | 2)) => (2 * l - 2, Complex64::new(sign, 0.0), 0),
            (BetheKind::Z3, Sector::Q(q @ 0..=2)) => {
                let phase = Complex64::from_polar(1.0, 2.0 * PI * q as f64 / 3.0) * sign;
                let (count, mu) = match q {
                    0 => (2 * l - 2, 0),
                    1 => (2 * l - 1, -1),
                    _ => (2 * l - 1, 1),
                };
                (count, phase, mu)
            }
            (BetheKind::Conj, Sector::Nu(-1 | 1)) => (2 * l, Complex64::new(-sign, 0.0), 0),
            _ => {
                return Err(Error::argument(format!("sector {sector} does not belong to {kind:?} chains")));
            }
        };
        Ok(Self {
            kind,
            length,
            sector,
            root_count,
            phase,
            mu,
        })
    }
}

/// Shifts `λ` by a multiple of `iπ` into the strip `Im λ ∈ (−π/2, π/2]`.
/// Values within 1e-9 of the lower edge are mapped to the upper edge.
pub fn canonical_root(lambda: Complex64) -> Complex64 {
    let mut im = lambda.im - PI * ((lambda.im - PI / 2.0) / PI).ceil();
    if im <= -PI / 2.0 + 1e-9 {
        im += PI;
    }
    Complex64::new(lambda.re, im)
}

fn sort_key(z: &Complex64) -> (i64, f64) {
    ((z.re * 1e9).round() as i64, z.im)
}

/// Canonical strip representatives sorted by `(Re, Im)`; conjugate pairs
/// end up adjacent.
pub fn canonicalize_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = roots.iter().map(|&z| canonical_root(z)).collect();
    out.sort_by(|a, b| {
        let (ka, kb) = (sort_key(a), sort_key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    out
}

/// Distance between two roots modulo `iπ`.
pub fn root_distance(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    d.re.hypot(reduce_mod_pi(d.im))
}

/// Largest distance in the best greedy pairing of two root multisets
/// (modulo `iπ`); infinite for different sizes.
pub fn root_multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &z in a {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&p, &q| root_distance(z, b[p]).total_cmp(&root_distance(z, b[q])));
        match best {
            Some(k) => {
                used[k] = true;
                worst = worst.max(root_distance(z, b[k]));
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

const POLE_GUARD: f64 = 1e-10;

fn near(z: Complex64, target_im: f64) -> bool {
    root_distance(z, Complex64::new(0.0, target_im)) < POLE_GUARD
}

/// Left- and right-hand sides of every equation.
fn sides(sys: &BetheSystem, roots: &[Complex64]) -> Result<Vec<(Complex64, Complex64)>> {
    let a = PI / 12.0;
    let b = PI / 3.0;
    let two_l = 2 * sys.length as i32;
    for (j, &lj) in roots.iter().enumerate() {
        if near(lj, a) || near(lj, -a) {
            return Err(Error::domain(format!("root {j} = {lj} sits on ±iπ/12")));
        }
        for (k, &lk) in roots.iter().enumerate() {
            if k != j && near(lj - lk, -b) {
                return Err(Error::domain(format!("roots {j} and {k} differ by −iπ/3")));
            }
        }
    }
    Ok(roots
        .iter()
        .enumerate()
        .map(|(j, &lj)| {
            let lhs = ((lj + I * a).sinh() / (lj - I * a).sinh()).powi(two_l);
            let rhs: Complex64 = roots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &lk)| (lj - lk + I * b).sinh() / (lj - lk - I * b).sinh())
                .product();
            (lhs, sys.phase * rhs)
        })
        .collect())
}

/// `max_j |LHS_j − phase·RHS_j| / (|LHS_j| + |phase·RHS_j|)`.
pub fn bethe_residual(sys: &BetheSystem, roots: &[Complex64]) -> Result<f64> {
    Ok(sides(sys, roots)?
        .iter()
        .map(|(l, r)| (l - r).norm() / (l.norm() + r.norm()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max))
}

fn coth(z: Complex64) -> Complex64 {
    z.cosh() / z.sinh()
}

fn jacobian(sys: &BetheSystem, roots: &[Complex64], sides: &[(Complex64, Complex64)]) -> ComplexMatrix {
    let a = I * (PI / 12.0);
    let b = I * (PI / 3.0);
    let n = roots.len();
    let two_l = 2.0 * sys.length as f64;
    let mut jac = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let (lhs, rhs) = sides[j];
        let lj = roots[j];
        let mut diag = lhs * two_l * (coth(lj + a) - coth(lj - a));
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = lj - roots[k];
            let g = coth(d + b) - coth(d - b);
            diag -= rhs * g;
            jac[(j, k)] = rhs * g;
        }
        jac[(j, j)] = diag;
    }
    jac
}

/// A converged, canonicalized root set with its observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub lambdas: Vec<Complex64>,
    pub residual: f64,
    pub energy: f64,
    pub spin: f64,
    pub iterations: usize,
}

pub const NEWTON_TOL: f64 = 1e-12;
/// Accepted residual when the iteration stalls at rounding level.
pub const STALL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 20;

/// Damped Newton iteration on `F_j = LHS_j − phase·RHS_j` with an analytic
/// Jacobian. Convergence is judged on the scaled residual of [`bethe_residual`].
pub fn newton_refine(sys: &BetheSystem, seeds: &[Complex64]) -> Result<RootSet> {
    if seeds.len() != sys.root_count {
        return Err(Error::argument(format!(
            "{} seeds given for a system of {} roots",
            seeds.len(),
            sys.root_count
        )));
    }
    let mut roots = seeds.to_vec();
    let mut residual = bethe_residual(sys, &roots)?;
    let mut trace = vec![residual];
    let mut iterations = 0;
    let solver_error = |reason: &str, iterations, residual, roots: &[Complex64], trace: &[f64]| Error::Solver {
        reason: reason.to_string(),
        iterations,
        residual,
        best_iterate: roots.to_vec(),
        residual_trace: trace.to_vec(),
    };
    while residual > NEWTON_TOL {
        if iterations == MAX_ITER {
            return Err(solver_error("iteration limit reached", iterations, residual, &roots, &trace));
        }
        iterations += 1;
        let s = sides(sys, &roots)?;
        let f: Vec<Complex64> = s.iter().map(|(l, r)| l - r).collect();
        let jac = jacobian(sys, &roots, &s);
        if linalg::inverse_condition(&jac) < 1e-15 {
            return Err(solver_error("Jacobian is singular", iterations, residual, &roots, &trace));
        }
        let step = linalg::least_squares(&jac, &f)?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<Complex64> = roots.iter().zip(&step).map(|(r, d)| r - d * scale).collect();
            if let Ok(res) = bethe_residual(sys, &trial) {
                if res < residual {
                    accepted = Some((trial, res));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, res)) => {
                roots = trial;
                residual = res;
                trace.push(res);
            }
            None if residual < STALL_TOL => break,
            None => return Err(solver_error("no damped step decreases the residual", iterations, residual, &roots, &trace)),
        }
    }
    let lambdas = canonicalize_roots(&roots);
    Ok(RootSet {
        energy: energy_from_roots(sys, &lambdas)?,
        spin: spin_from_roots(sys, &lambdas)?,
        residual,
        lambdas,
        iterations,
    })
}

/// `Σ_j cot(π/12 − iλ_j) + iμ − 2L/√3` before discarding the imaginary part.
pub fn energy_complex(sys: &BetheSystem, roots: &[Complex64]) -> Result<Complex64> {
    let mut sum = ZERO;
    for (j, &l) in roots.iter().enumerate() {
        let arg = Complex64::new(PI / 12.0, 0.0) - I * l;
        if reduce_mod_pi(arg.re).hypot(arg.im) < POLE_GUARD {
            return Err(Error::domain(format!("root {j} = {l} sits on a pole of the energy")));
        }
        sum += ONE / arg.tan();
    }
    Ok(sum + I * sys.mu as f64 - Complex64::new(2.0 * sys.length as f64 / 3f64.sqrt(), 0.0))
}

/// Imaginary parts up to this size are discarded from energies and spins.
pub const REALITY_TOL: f64 = 1e-9;

pub fn energy_from_roots(sys: &BetheSystem, roots: &[Complex64]) -> Result<f64> {
    let e = energy_complex(sys, roots)?;
    if e.im.abs() > REALITY_TOL * (1.0 + e.re.abs()) {
        return Err(Error::numerical(format!("energy {e} is not real")));
    }
    Ok(e.re)
}

/// Reduces `s` modulo `period` into `(−period/2, period/2]`.
pub fn reduce_spin(s: f64, period: f64) -> f64 {
    let r = s - period * ((s - period / 2.0) / period).ceil();
    if r <= -period / 2.0 + 1e-9 {
        r + period
    } else {
        r
    }
}

/// `s_p = (iL/2π) Σ_k Log[sinh(λ_k + iπ/12)/sinh(λ_k − iπ/12)] − Lμ/12`,
/// principal branch per factor, reduced modulo L.
pub fn spin_from_roots(sys: &BetheSystem, roots: &[Complex64]) -> Result<f64> {
    let a = I * (PI / 12.0);
    let l = sys.length as f64;
    let sum: Complex64 = roots.iter().map(|&z| ((z + a).sinh() / (z - a).sinh()).ln()).sum();
    let s = I * sum * (l / (2.0 * PI)) - Complex64::new(l * sys.mu as f64 / 12.0, 0.0);
    if s.im.abs() > REALITY_TOL * (1.0 + s.re.abs()) {
        return Err(Error::numerical(format!("spin {s} is not real")));
    }
    Ok(reduce_spin(s.re, l))
}
