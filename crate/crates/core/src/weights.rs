//! Edge weights of the self-dual three-state Potts model and of the Z(n)
//! Fateev–Zamolodchikov model, as functions of a (complex) spectral parameter.
//!
//! States are 0-based. Weights depend on a pair of states only through
//! `(a − b) mod n`, taken literally in `{0, …, n−1}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Evaluations closer than this to a denominator zero are rejected.
pub const SINGULARITY_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Potts3,
    FateevZamolodchikov,
}

#[derive(Debug, Clone, PartialEq)]
struct Perturbation {
    edge: Edge,
    a: usize,
    b: usize,
    delta: Complex64,
}

/// Horizontal and vertical edge weights of an `n`-state spin model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    n: usize,
    model: Model,
    label: String,
    perturbations: Vec<Perturbation>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `sin(π/6 + x)`, the denominator of the horizontal Potts weight.
pub fn g(x: Complex64) -> Complex64 {
    (c(PI / 6.0) + x).sin()
}

/// `sin(π/3 − x)`, the denominator of the vertical Potts weight.
pub fn g1(x: Complex64) -> Complex64 {
    (c(PI / 3.0) - x).sin()
}

/// Off-diagonal horizontal Potts weight `sin(π/6 − x) / sin(π/6 + x)`.
pub fn potts_a(x: Complex64) -> Complex64 {
    (c(PI / 6.0) - x).sin() / g(x)
}

/// Off-diagonal vertical Potts weight `sin(x) / sin(π/3 − x)`.
pub fn potts_b(x: Complex64) -> Complex64 {
    x.sin() / g1(x)
}

fn potts_a_derivative(x: Complex64) -> Complex64 {
    let s = g(x);
    -c((PI / 3.0).sin()) / (s * s)
}

fn potts_b_derivative(x: Complex64) -> Complex64 {
    let s = g1(x);
    c((PI / 3.0).sin()) / (s * s)
}

/// `sin(p + σx) / sin(q + τx)` and its x-derivative.
fn sine_ratio(p: f64, sigma: f64, q: f64, tau: f64, x: Complex64) -> (Complex64, Complex64) {
    let num_arg = c(p) + x * sigma;
    let den_arg = c(q) + x * tau;
    let (sn, cn) = (num_arg.sin(), num_arg.cos());
    let (sd, cd) = (den_arg.sin(), den_arg.cos());
    let value = sn / sd;
    let deriv = (cn * sd * sigma - sn * cd * tau) / (sd * sd);
    (value, deriv)
}

impl WeightFamily {
    /// The integrable scalar three-state Potts model on its self-dual curve.
    pub fn potts3() -> Self {
        Self {
            n: 3,
            model: Model::Potts3,
            label: "potts3".to_string(),
            perturbations: Vec::new(),
        }
    }

    /// The Z(n) Fateev–Zamolodchikov weights.
    pub fn fateev_zamolodchikov(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::argument(format!("Fateev-Zamolodchikov model needs n >= 2, got {n}")));
        }
        Ok(Self {
            n,
            model: Model::FateevZamolodchikov,
            label: format!("fz{n}"),
            perturbations: Vec::new(),
        })
    }

    /// A copy whose `(a, b)` entry on `edge` is shifted by `delta` at every x.
    /// Used to build control cases that must fail integrability checks.
    pub fn with_perturbation(mut self, edge: Edge, a: usize, b: usize, delta: f64) -> Self {
        self.perturbations.push(Perturbation {
            edge,
            a,
            b,
            delta: c(delta),
        });
        self.label = format!("{}+perturbed", self.label);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_perturbed(&self) -> bool {
        !self.perturbations.is_empty()
    }

    /// Real x (mod π, reduced to (−π/2, π/2]) where a weight denominator vanishes.
    pub fn denominator_zeros(&self) -> Vec<f64> {
        let mut zeros = match self.model {
            Model::Potts3 => vec![-PI / 6.0, PI / 3.0],
            Model::FateevZamolodchikov => {
                let n = self.n as f64;
                (1..self.n)
                    .flat_map(|j| {
                        let j = j as f64;
                        [-(2.0 * j - 1.0) * PI / (2.0 * n), j * PI / n]
                    })
                    .collect()
            }
        };
        for z in &mut zeros {
            *z = reduce_mod_pi(*z);
        }
        zeros.sort_by(f64::total_cmp);
        zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        zeros
    }

    /// Distance (in the complex x-plane, modulo π) to the nearest denominator zero.
    pub fn singularity_distance(&self, x: Complex64) -> f64 {
        self.denominator_zeros()
            .iter()
            .map(|&z| reduce_mod_pi(x.re - z).hypot(x.im))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_domain(&self, x: Complex64) -> Result<()> {
        let d = self.singularity_distance(x);
        if d < SINGULARITY_GUARD {
            return Err(Error::domain(format!(
                "spectral parameter {x} lies within {d:.1e} of a weight singularity ({})",
                self.label
            )));
        }
        Ok(())
    }

    fn difference(&self, a: usize, b: usize) -> usize {
        (a % self.n + self.n - b % self.n) % self.n
    }

    fn unperturbed(&self, edge: Edge, a: usize, b: usize, x: Complex64) -> (Complex64, Complex64) {
        let k = self.difference(a, b);
        if k == 0 {
            return (ONE, ZERO);
        }
        match self.model {
            Model::Potts3 => match edge {
                Edge::Horizontal => (potts_a(x), potts_a_derivative(x)),
                Edge::Vertical => (potts_b(x), potts_b_derivative(x)),
            },
            Model::FateevZamolodchikov => {
                let n = self.n as f64;
                let mut value = ONE;
                let mut deriv = ZERO;
                for j in 1..=k {
                    let j = j as f64;
                    let (f, df) = match edge {
                        Edge::Horizontal => {
                            let angle = (2.0 * j - 1.0) * PI / (2.0 * n);
                            sine_ratio(angle, -1.0, angle, 1.0, x)
                        }
                        Edge::Vertical => sine_ratio((j - 1.0) * PI / n, 1.0, j * PI / n, -1.0, x),
                    };
                    deriv = deriv * f + value * df;
                    value *= f;
                }
                (value, deriv)
            }
        }
    }

    fn value_and_derivative(&self, edge: Edge, a: usize, b: usize, x: Complex64) -> (Complex64, Complex64) {
        let (mut v, d) = self.unperturbed(edge, a, b, x);
        for p in &self.perturbations {
            if p.edge == edge && p.a % self.n == a % self.n && p.b % self.n == b % self.n {
                v += p.delta;
            }
        }
        (v, d)
    }

    /// Horizontal weight `W_h(a, b | x)`.
    pub fn w_h(&self, a: usize, b: usize, x: Complex64) -> Result<Complex64> {
        self.check_domain(x)?;
        Ok(self.value_and_derivative(Edge::Horizontal, a, b, x).0)
    }

    /// Vertical weight `W_v(a, b | x)`.
    pub fn w_v(&self, a: usize, b: usize, x: Complex64) -> Result<Complex64> {
        self.check_domain(x)?;
        Ok(self.value_and_derivative(Edge::Vertical, a, b, x).0)
    }

    /// `n×n` table of weights on `edge` (row = first state) at `x`.
    pub fn table(&self, edge: Edge, x: Complex64) -> Result<ComplexMatrix> {
        self.check_domain(x)?;
        Ok(ComplexMatrix::from_fn(self.n, self.n, |a, b| {
            self.value_and_derivative(edge, a, b, x).0
        }))
    }

    /// `n×n` table of analytic x-derivatives of the weights on `edge`.
    pub fn derivative_table(&self, edge: Edge, x: Complex64) -> Result<ComplexMatrix> {
        self.check_domain(x)?;
        Ok(ComplexMatrix::from_fn(self.n, self.n, |a, b| {
            self.value_and_derivative(edge, a, b, x).1
        }))
    }
}

/// Reduces a real angle modulo π into (−π/2, π/2].
pub fn reduce_mod_pi(x: f64) -> f64 {
    let r = x - PI * ((x - PI / 2.0) / PI).ceil();
    if r <= -PI / 2.0 {
        r + PI
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionReport {
    pub family: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `W_h(a, b | 0) = 1` and `W_v(a, b | 0) = δ_ab` over all state pairs.
pub fn check_initial_conditions(wf: &WeightFamily, tolerance: f64) -> Result<InitialConditionReport> {
    let h = wf.table(Edge::Horizontal, ZERO)?;
    let v = wf.table(Edge::Vertical, ZERO)?;
    let n = wf.n();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            worst = worst.max((h[(a, b)] - ONE).norm());
            let kron = if a == b { ONE } else { ZERO };
            worst = worst.max((v[(a, b)] - kron).norm());
        }
    }
    Ok(InitialConditionReport {
        family: wf.label().to_string(),
        max_deviation: worst,
        tolerance,
        passed: worst <= tolerance,
    })
}
