//! Commuting transfer matrices with toroidal seams, their Hamiltonian limits,
//! the explicitly named quantum chains, and the operator identities tying
//! them together.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    accumulate_at_site, accumulate_two_site, basis_digits, checked_dimension, global_charge, linalg, root_of_unity,
    site_algebra, swap_operator, ChargeKind, ComplexMatrix, Monomial, ONE, ZERO,
};
use crate::error::{Error, Result};
use crate::lattice::{lax, lax_derivative, Seam, SeamLabel};
use crate::weights::{Edge, WeightFamily};

/// Boundary condition of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Periodic,
    Z3Plus,
    Z3Minus,
    Conj,
    /// Seam `X†` inserted before every Lax factor.
    BulkXdagger,
    /// Seam `C` inserted before every Lax factor.
    BulkConj,
    /// Z(n) twist with seam `X^{n−l}`.
    ZnTwist(usize),
    /// Z(n) charge-conjugation twist.
    ZnConj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    EndSeam,
    BulkSpread,
}

impl Variant {
    pub fn placement(self) -> Placement {
        match self {
            Variant::BulkXdagger | Variant::BulkConj => Placement::BulkSpread,
            _ => Placement::EndSeam,
        }
    }

    pub fn is_zn(self) -> bool {
        matches!(self, Variant::ZnTwist(_) | Variant::ZnConj)
    }

    /// Charges commuting with the chain.
    pub fn charges(self) -> Vec<ChargeKind> {
        match self {
            Variant::Periodic => vec![ChargeKind::Z3, ChargeKind::Z2],
            Variant::Z3Plus | Variant::Z3Minus | Variant::BulkXdagger | Variant::ZnTwist(_) => vec![ChargeKind::Z3],
            Variant::Conj | Variant::BulkConj | Variant::ZnConj => vec![ChargeKind::Z2],
        }
    }

    pub fn seam(self, n: usize) -> Result<Seam> {
        match self {
            Variant::Periodic => Ok(Seam::identity(n)),
            Variant::Z3Plus | Variant::BulkXdagger => Seam::g_plus(n),
            Variant::Z3Minus => Seam::g_minus(n),
            Variant::Conj | Variant::BulkConj | Variant::ZnConj => Seam::g_conj(n),
            Variant::ZnTwist(l) => Seam::z_twist(n, l),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Periodic => write!(f, "periodic"),
            Variant::Z3Plus => write!(f, "z3_plus"),
            Variant::Z3Minus => write!(f, "z3_minus"),
            Variant::Conj => write!(f, "conj"),
            Variant::BulkXdagger => write!(f, "bulk_xdagger"),
            Variant::BulkConj => write!(f, "bulk_conj"),
            Variant::ZnTwist(l) => write!(f, "zn_twist:{l}"),
            Variant::ZnConj => write!(f, "zn_conj"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "periodic" => Variant::Periodic,
            "z3_plus" | "z3" => Variant::Z3Plus,
            "z3_minus" => Variant::Z3Minus,
            "conj" => Variant::Conj,
            "bulk_xdagger" => Variant::BulkXdagger,
            "bulk_conj" => Variant::BulkConj,
            "zn_conj" => Variant::ZnConj,
            other => match other.strip_prefix("zn_twist:").map(str::parse) {
                Some(Ok(l)) => Variant::ZnTwist(l),
                _ => return Err(Error::argument(format!("unknown variant '{s}'"))),
            },
        })
    }
}

/// A chain: number of states `n`, length, boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub length: usize,
    pub variant: Variant,
}

impl ChainSpec {
    pub fn new(variant: Variant, length: usize, n: usize) -> Result<Self> {
        if length < 2 {
            return Err(Error::argument(format!("chain length must be at least 2, got {length}")));
        }
        if variant.is_zn() {
            if n < 2 {
                return Err(Error::argument("Z(n) chains need n >= 2"));
            }
            if let Variant::ZnTwist(l) = variant {
                if l == 0 || l >= n {
                    return Err(Error::argument(format!("twist index l={l} outside 1..{n}")));
                }
            }
        } else if n != 3 {
            return Err(Error::argument(format!("variant {variant} is defined for n = 3 only")));
        }
        checked_dimension(n, length)?;
        Ok(Self { n, length, variant })
    }

    /// Three-state chain of the given variant.
    pub fn potts(variant: Variant, length: usize) -> Result<Self> {
        Self::new(variant, length, 3)
    }

    pub fn dim(&self) -> usize {
        self.n.pow(self.length as u32)
    }

    pub fn placement(&self) -> Placement {
        self.variant.placement()
    }

    pub fn weights(&self) -> WeightFamily {
        if self.n == 3 {
            WeightFamily::potts3()
        } else {
            WeightFamily::fateev_zamolodchikov(self.n).expect("n >= 2 checked at construction")
        }
    }

    pub fn seam(&self) -> Result<Seam> {
        self.variant.seam(self.n)
    }

    pub fn charges(&self) -> Result<Vec<(ChargeKind, ComplexMatrix)>> {
        self.variant
            .charges()
            .into_iter()
            .map(|k| Ok((k, global_charge(k, self.length, self.n)?)))
            .collect()
    }

    pub fn transfer(&self, x: Complex64) -> Result<ComplexMatrix> {
        transfer(&self.weights(), &self.seam()?, self.length, self.placement(), x)
    }

    pub fn transfer_with_derivative(&self, x: Complex64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        transfer_with_derivative(&self.weights(), &self.seam()?, self.length, self.placement(), x)
    }
}

/// Blocks `ℓ_{αβ}[s', s] = 𝕃[(α,s'),(β,s)]` of a Lax-type operator, indexed `α·n + β`.
fn lax_blocks(l: &ComplexMatrix, n: usize) -> Vec<ComplexMatrix> {
    (0..n * n)
        .map(|ab| {
            let (a, b) = (ab / n, ab % n);
            ComplexMatrix::from_fn(n, n, |sp, s| l[(a * n + sp, b * n + s)])
        })
        .collect()
}

/// `(G ⊗ 1) 𝕃`: the seam acting on the auxiliary space.
fn seam_on_auxiliary(g: &ComplexMatrix, l: &ComplexMatrix) -> ComplexMatrix {
    let n = g.rows();
    &g.kron(&ComplexMatrix::identity(n)) * l
}

fn kron_vec(u: &[Complex64], w: &[Complex64], out: &mut Vec<Complex64>) {
    out.clear();
    out.reserve(u.len() * w.len());
    for &a in u {
        for &b in w {
            out.push(a * b);
        }
    }
}

fn axpy(acc: &mut [Complex64], v: &[Complex64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// `Σ_{α₀, α_L} B[α₀, α_L] Π_j ℓ_{α_j α_{j−1}}[s'_j, s_j]`, assembled column by
/// column with a fold over sites. With `dblocks` the product-rule derivative
/// is accumulated alongside.
fn fold_transfer(
    blocks: &[ComplexMatrix],
    dblocks: Option<&[ComplexMatrix]>,
    boundary: &ComplexMatrix,
    n: usize,
    length: usize,
) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
    let dim = checked_dimension(n, length)?;
    let mut t = ComplexMatrix::zeros(dim, dim);
    let mut dt = dblocks.map(|_| ComplexMatrix::zeros(dim, dim));
    let block_col = |bl: &ComplexMatrix, s: usize| bl.column(s);
    let mut scratch = Vec::new();
    for col in 0..dim {
        let s = basis_digits(col, length, n);
        let mut column = vec![ZERO; dim];
        let mut dcolumn = vec![ZERO; dim];
        for beta in 0..n {
            // v[γ]: partial products with auxiliary output γ; dv likewise for the derivative.
            let mut v: Vec<Vec<Complex64>> = (0..n).map(|g| block_col(&blocks[g * n + beta], s[0])).collect();
            let mut dv: Vec<Vec<Complex64>> = match dblocks {
                Some(db) => (0..n).map(|g| block_col(&db[g * n + beta], s[0])).collect(),
                None => Vec::new(),
            };
            for &sj in &s[1..] {
                let len = v[0].len() * n;
                let mut next = vec![vec![ZERO; len]; n];
                let mut dnext = if dblocks.is_some() { vec![vec![ZERO; len]; n] } else { Vec::new() };
                for gamma in 0..n {
                    for delta in 0..n {
                        let w = block_col(&blocks[gamma * n + delta], sj);
                        kron_vec(&v[delta], &w, &mut scratch);
                        axpy(&mut next[gamma], &scratch);
                        if let Some(db) = dblocks {
                            kron_vec(&dv[delta], &w, &mut scratch);
                            axpy(&mut dnext[gamma], &scratch);
                            let dw = block_col(&db[gamma * n + delta], sj);
                            kron_vec(&v[delta], &dw, &mut scratch);
                            axpy(&mut dnext[gamma], &scratch);
                        }
                    }
                }
                v = next;
                dv = dnext;
            }
            for alpha in 0..n {
                let b = boundary[(beta, alpha)];
                if b == ZERO {
                    continue;
                }
                for (c, x) in column.iter_mut().zip(&v[alpha]) {
                    *c += b * x;
                }
                if dblocks.is_some() {
                    for (c, x) in dcolumn.iter_mut().zip(&dv[alpha]) {
                        *c += b * x;
                    }
                }
            }
        }
        t.set_column(col, &column);
        if let Some(d) = dt.as_mut() {
            d.set_column(col, &dcolumn);
        }
    }
    Ok((t, dt))
}

fn check_seam(wf: &WeightFamily, seam: &Seam) -> Result<()> {
    if seam.n() != wf.n() {
        return Err(Error::argument(format!(
            "seam is {0}x{0} but the weights have n = {1}",
            seam.n(),
            wf.n()
        )));
    }
    Ok(())
}

fn transfer_impl(
    wf: &WeightFamily,
    seam: &Seam,
    length: usize,
    placement: Placement,
    x: Complex64,
    with_derivative: bool,
) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
    check_seam(wf, seam)?;
    if length < 2 {
        return Err(Error::argument("chain length must be at least 2"));
    }
    let n = wf.n();
    let mut l = lax(wf, x)?;
    let mut dl = if with_derivative { Some(lax_derivative(wf, x)?) } else { None };
    let boundary = match placement {
        Placement::EndSeam => seam.matrix.clone(),
        Placement::BulkSpread => {
            l = seam_on_auxiliary(&seam.matrix, &l);
            dl = dl.map(|d| seam_on_auxiliary(&seam.matrix, &d));
            ComplexMatrix::identity(n)
        }
    };
    let blocks = lax_blocks(&l, n);
    let dblocks = dl.map(|d| lax_blocks(&d, n));
    fold_transfer(&blocks, dblocks.as_deref(), &boundary, n, length)
}

/// `T(x) = Tr_A[G_A 𝕃_{AL}(x) … 𝕃_{A1}(x)]`.
pub fn transfer_end_seam(wf: &WeightFamily, seam: &Seam, length: usize, x: Complex64) -> Result<ComplexMatrix> {
    Ok(transfer_impl(wf, seam, length, Placement::EndSeam, x, false)?.0)
}

/// `T̃(x) = Tr_A[G_A 𝕃_{AL}(x) G_A 𝕃_{A,L−1}(x) … G_A 𝕃_{A1}(x)]`.
pub fn transfer_bulk_seam(wf: &WeightFamily, seam: &Seam, length: usize, x: Complex64) -> Result<ComplexMatrix> {
    Ok(transfer_impl(wf, seam, length, Placement::BulkSpread, x, false)?.0)
}

pub fn transfer(
    wf: &WeightFamily,
    seam: &Seam,
    length: usize,
    placement: Placement,
    x: Complex64,
) -> Result<ComplexMatrix> {
    Ok(transfer_impl(wf, seam, length, placement, x, false)?.0)
}

/// `T(x)` together with its analytic x-derivative.
pub fn transfer_with_derivative(
    wf: &WeightFamily,
    seam: &Seam,
    length: usize,
    placement: Placement,
    x: Complex64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (t, dt) = transfer_impl(wf, seam, length, placement, x, true)?;
    Ok((t, dt.expect("derivative requested")))
}

/// Diagonal-to-diagonal transfer matrix
/// `T(a|b) = Π_j W_v(a_j, b_j) W_h(a_j, b_{j+1})` with `b_{L+1} = b_1`.
pub fn transfer_diagonal(wf: &WeightFamily, length: usize, x: Complex64) -> Result<ComplexMatrix> {
    let n = wf.n();
    let dim = checked_dimension(n, length)?;
    let h = wf.table(Edge::Horizontal, x)?;
    let v = wf.table(Edge::Vertical, x)?;
    let digits: Vec<Vec<usize>> = (0..dim).map(|i| basis_digits(i, length, n)).collect();
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        let (a, b) = (&digits[r], &digits[c]);
        (0..length)
            .map(|j| v[(a[j], b[j])] * h[(a[j], b[(j + 1) % length])])
            .product()
    }))
}

/// One-site cyclic translation `S|s_1, …, s_L⟩ = |s_L, s_1, …, s_{L−1}⟩`.
/// The periodic vertex transfer matrix factors as `T(x) = T_diag(x) S`.
pub fn translation(length: usize, n: usize) -> Result<ComplexMatrix> {
    let dim = checked_dimension(n, length)?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut digits = basis_digits(col, length, n);
        digits.rotate_right(1);
        out[(crate::algebra::basis_index(&digits, n), col)] = ONE;
    }
    Ok(out)
}

/// A chain Hamiltonian with its symmetry data.
#[derive(Debug, Clone)]
pub struct HamiltonianBundle {
    pub spec: ChainSpec,
    pub matrix: ComplexMatrix,
    /// Scalar `c` such that `matrix + c·I` is the traceless named Hamiltonian.
    pub additive_constant: f64,
    pub seam: Seam,
    pub conserved_charges: Vec<(ChargeKind, ComplexMatrix)>,
}

impl HamiltonianBundle {
    fn new(spec: ChainSpec, matrix: ComplexMatrix, seam: Seam) -> Result<Self> {
        let additive_constant = -matrix.trace().re / matrix.rows() as f64;
        Ok(Self {
            spec,
            matrix,
            additive_constant,
            seam,
            conserved_charges: spec.charges()?,
        })
    }

    /// `matrix + additive_constant · I`.
    pub fn normalized(&self) -> ComplexMatrix {
        let mut m = self.matrix.clone();
        for i in 0..m.rows() {
            m[(i, i)] += Complex64::new(self.additive_constant, 0.0);
        }
        m
    }

    /// Largest `‖[H, O]‖_max` over the attached charges.
    pub fn max_charge_commutator(&self) -> f64 {
        self.conserved_charges
            .iter()
            .map(|(_, o)| self.matrix.commutator(o).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Local density `P 𝕃'(0)` on `C^n ⊗ C^n`.
pub fn local_density(wf: &WeightFamily) -> Result<ComplexMatrix> {
    Ok(&swap_operator(wf.n()) * &lax_derivative(wf, ZERO)?)
}

/// `(A ⊗ 1) h (B ⊗ 1)` for single-site `A`, `B`.
fn dress_first_factor(a: &ComplexMatrix, h: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(a.rows());
    &(&a.kron(&id) * h) * &b.kron(&id)
}

/// Sum of local densities over the bonds of the ring. With an end seam the
/// closing bond is dressed `G_L⁻¹ h_{L,1} G_L`; with a bulk seam every bond is.
fn density_sum(wf: &WeightFamily, seam: &Seam, length: usize, placement: Placement) -> Result<ComplexMatrix> {
    let n = wf.n();
    let dim = checked_dimension(n, length)?;
    let h = local_density(wf)?;
    let g_inv = seam.inverse()?;
    let dressed = dress_first_factor(&g_inv, &h, &seam.matrix);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for j in 1..=length {
        let next = j % length + 1;
        let term = match placement {
            Placement::BulkSpread => &dressed,
            Placement::EndSeam if j == length => &dressed,
            Placement::EndSeam => &h,
        };
        accumulate_two_site(&mut out, term, j, next, length, n, ONE)?;
    }
    Ok(out)
}

/// Hamiltonian limit `−T'(0) T(0)⁻¹`, assembled from local densities.
pub fn hamiltonian_limit(spec: &ChainSpec) -> Result<HamiltonianBundle> {
    let seam = spec.seam()?;
    if linalg::inverse_condition(&seam.matrix) < 1e-12 {
        return Err(Error::argument("seam is not invertible"));
    }
    let raw = density_sum(&spec.weights(), &seam, spec.length, spec.placement())?;
    HamiltonianBundle::new(*spec, -&raw, seam)
}

/// `−T'(0) T(0)⁻¹` straight from the transfer matrix.
pub fn log_derivative_at_zero(spec: &ChainSpec) -> Result<ComplexMatrix> {
    let (t, dt) = spec.transfer_with_derivative(ZERO)?;
    Ok(-&(&dt * &linalg::inverse(&t)?))
}

/// How the closing (or every) bond `Z_a Z†_b` is twisted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bond {
    /// `ω^{−l} Z_a Z†_b`.
    Twist(usize),
    /// `Z_a Z_b`.
    Conj,
}

/// `−Σ_k (1/sin(kπ/n)) (B^k + X_j^k)` summed over bonds and sites.
fn clock_chain(n: usize, length: usize, bond: impl Fn(usize) -> Bond) -> Result<ComplexMatrix> {
    let dim = checked_dimension(n, length)?;
    let alg = site_algebra(n)?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for k in 1..n {
        let coeff = Complex64::new(-1.0 / (k as f64 * PI / n as f64).sin(), 0.0);
        let xk = alg.x.pow(k as u32);
        for j in 1..=length {
            let next = j % length + 1;
            let pair = match bond(j) {
                Bond::Twist(l) => alg.z.kron(&alg.z.adjoint()).scale(root_of_unity(n, -(l as i64))),
                Bond::Conj => alg.z.kron(&alg.z),
            };
            accumulate_two_site(&mut out, &pair.pow(k as u32), j, next, length, n, coeff)?;
            accumulate_at_site(&mut out, &xk, j, length, n, coeff)?;
        }
    }
    Ok(out)
}

/// The explicitly written chain for `variant`, e.g. for the three-state
/// periodic chain `−(2/√3) Σ_j (Z_j Z†_{j+1} + Z†_j Z_{j+1} + X_j + X†_j)`.
pub fn named_hamiltonian(variant: Variant, length: usize, n: usize) -> Result<HamiltonianBundle> {
    let spec = ChainSpec::new(variant, length, n)?;
    let closing = move |j: usize, bond: Bond| if j == length { bond } else { Bond::Twist(0) };
    let matrix = match variant {
        Variant::Periodic => clock_chain(n, length, |_| Bond::Twist(0))?,
        Variant::Z3Plus => clock_chain(n, length, |j| closing(j, Bond::Twist(1)))?,
        Variant::Z3Minus => clock_chain(n, length, |j| closing(j, Bond::Twist(2)))?,
        Variant::Conj | Variant::ZnConj => clock_chain(n, length, |j| closing(j, Bond::Conj))?,
        Variant::ZnTwist(l) => clock_chain(n, length, |j| closing(j, Bond::Twist(l)))?,
        Variant::BulkXdagger => clock_chain(n, length, |_| Bond::Twist(1))?,
        Variant::BulkConj => clock_chain(n, length, |_| Bond::Conj)?,
    };
    let mut bundle = HamiltonianBundle::new(spec, matrix, spec.seam()?)?;
    bundle.additive_constant = 0.0;
    Ok(bundle)
}

/// Best `a`, `b` with `target ≈ a·m + b·I` in least squares, and the
/// remaining max-entry residual relative to `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub scale: Complex64,
    pub shift: Complex64,
    pub residual: f64,
}

pub fn affine_fit(target: &ComplexMatrix, m: &ComplexMatrix) -> Result<AffineFit> {
    if target.shape() != m.shape() || !m.is_square() {
        return Err(Error::argument("affine fit needs equal square shapes"));
    }
    let dim = m.rows();
    // Normal equations for the two columns vec(m), vec(I).
    let mm: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let tr_m = m.trace();
    let mt: Complex64 = m.as_slice().iter().zip(target.as_slice()).map(|(a, b)| a.conj() * b).sum();
    let it = target.trace();
    let gram = [[Complex64::new(mm, 0.0), tr_m.conj()], [tr_m, Complex64::new(dim as f64, 0.0)]];
    let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
    if det.norm() < 1e-14 * mm.max(1.0) * dim as f64 {
        return Err(Error::numerical("affine fit is degenerate (matrix proportional to identity)"));
    }
    let scale = (gram[1][1] * mt - gram[0][1] * it) / det;
    let shift = (gram[0][0] * it - gram[1][0] * mt) / det;
    let mut fitted = m.scale(scale);
    for i in 0..dim {
        fitted[(i, i)] += shift;
    }
    let residual = target.max_abs_diff(&fitted) / target.max_abs().max(f64::MIN_POSITIVE);
    Ok(AffineFit { scale, shift, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub length: usize,
    pub seam: SeamLabel,
    pub max_residual: f64,
}

/// Checks `T(0) h_{j,j+1} T(0)⁻¹ = h_{j+1,j+2}` for `j ≤ L−2` and that
/// `T(0) h_{L−1,L} T(0)⁻¹` is the dressed closing term `G_L⁻¹ h_{L,1} G_L`.
pub fn shift_relations_check(wf: &WeightFamily, seam: &Seam, length: usize) -> Result<ShiftReport> {
    let n = wf.n();
    let dim = checked_dimension(n, length)?;
    let t0 = transfer_end_seam(wf, seam, length, ZERO)?;
    let shift = Monomial::from_matrix(&t0)
        .ok_or_else(|| Error::numerical("T(0) is not a generalized permutation"))?;
    let h = local_density(wf)?;
    let bond = |op: &ComplexMatrix, a: usize, b: usize| -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::zeros(dim, dim);
        accumulate_two_site(&mut m, op, a, b, length, n, ONE)?;
        Ok(m)
    };
    let closing = bond(&dress_first_factor(&seam.inverse()?, &h, &seam.matrix), length, 1)?;
    let mut worst: f64 = 0.0;
    for j in 1..length {
        let moved = shift.conjugate(&bond(&h, j, j + 1)?);
        let expected = if j + 1 < length { bond(&h, j + 1, j + 2)? } else { closing.clone() };
        worst = worst.max(moved.max_abs_diff(&expected) / expected.max_abs());
    }
    Ok(ShiftReport {
        length,
        seam: seam.label.clone(),
        max_residual: worst,
    })
}

/// The two cubic identities among shifted transfer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalIdentity {
    /// Seam `X†`, sign `+`.
    Z3Plus,
    /// Seam `C`, sign `−`.
    Conj,
}

impl FunctionalIdentity {
    pub fn sign(self) -> f64 {
        match self {
            FunctionalIdentity::Z3Plus => 1.0,
            FunctionalIdentity::Conj => -1.0,
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            FunctionalIdentity::Z3Plus => Variant::Z3Plus,
            FunctionalIdentity::Conj => Variant::Conj,
        }
    }
}

/// `f₁ = 3 tan x cot(x+π/6)`, `f₂ = 3 tan(x−π/6) cot x`, `f₃ = 3 tan(x−π/6) cot(x+π/6)`.
pub fn auxiliary_functions(x: Complex64) -> [Complex64; 3] {
    let s = Complex64::new(PI / 6.0, 0.0);
    let cot = |z: Complex64| ONE / z.tan();
    [
        x.tan() * cot(x + s) * 3.0,
        (x - s).tan() * cot(x) * 3.0,
        (x - s).tan() * cot(x + s) * 3.0,
    ]
}

/// Normalized max-entry residual of
/// `T(x−π/3) T(x−π/6) T(x) − T(0) {f₁^L T(x−π/3) + f₂^L T(x) + sign · f₃^L T(x+π/3)}`.
pub fn functional_identity_residual_with_sign(
    identity: FunctionalIdentity,
    length: usize,
    x: f64,
    sign: f64,
) -> Result<f64> {
    let spec = ChainSpec::potts(identity.variant(), length)?;
    for bad in [0.0, PI / 6.0, -PI / 6.0, PI / 3.0, -PI / 3.0, PI / 2.0] {
        let d = crate::weights::reduce_mod_pi(x - bad).abs();
        if d < 1e-6 {
            return Err(Error::domain(format!("x = {x} hits a pole of the auxiliary functions")));
        }
    }
    let at = |y: f64| spec.transfer(Complex64::new(y, 0.0));
    let t_m3 = at(x - PI / 3.0)?;
    let t_m6 = at(x - PI / 6.0)?;
    let t_x = at(x)?;
    let t_p3 = at(x + PI / 3.0)?;
    let t_0 = at(0.0)?;
    let [f1, f2, f3] = auxiliary_functions(Complex64::new(x, 0.0));
    let l = length as i32;
    let lhs = &(&t_m3 * &t_m6) * &t_x;
    let bracket = &(&t_m3.scale(f1.powi(l)) + &t_x.scale(f2.powi(l))) + &t_p3.scale(f3.powi(l) * sign);
    let rhs = &t_0 * &bracket;
    let scale = lhs.max_abs().max(rhs.max_abs());
    Ok(lhs.max_abs_diff(&rhs) / scale)
}

pub fn functional_identity_residual(identity: FunctionalIdentity, length: usize, x: f64) -> Result<f64> {
    functional_identity_residual_with_sign(identity, length, x, identity.sign())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalencePair {
    /// `H̃₁` against the end-seam chain selected by `L mod 3`.
    H1VsTwisted,
    /// `H̃₂` against the end-seam chain selected by `L mod 2`.
    H2VsParity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pair: EquivalencePair,
    pub length: usize,
    pub reference: Variant,
    pub spectrum_deviation: f64,
    pub conjugation_residual: f64,
}

/// Site-wise unitary mapping the bulk-seam chain onto its end-seam partner:
/// `Π_j X_j^j` for `H̃₁`, `C` on even sites for `H̃₂`.
pub fn bulk_to_end_unitary(pair: EquivalencePair, length: usize) -> Result<ComplexMatrix> {
    let alg = site_algebra(3)?;
    let ops: Vec<ComplexMatrix> = (1..=length)
        .map(|j| match pair {
            EquivalencePair::H1VsTwisted => alg.x.pow((j % 3) as u32),
            EquivalencePair::H2VsParity if j % 2 == 0 => alg.c.clone(),
            EquivalencePair::H2VsParity => ComplexMatrix::identity(3),
        })
        .collect();
    crate::algebra::product_operator(&ops, 3)
}

pub fn equivalence_reference(pair: EquivalencePair, length: usize) -> Variant {
    match pair {
        EquivalencePair::H1VsTwisted => match length % 3 {
            0 => Variant::Periodic,
            1 => Variant::Z3Plus,
            _ => Variant::Z3Minus,
        },
        EquivalencePair::H2VsParity => {
            if length.is_multiple_of(2) {
                Variant::Periodic
            } else {
                Variant::Conj
            }
        }
    }
}

pub fn similarity_spectral_check(pair: EquivalencePair, length: usize) -> Result<EquivalenceReport> {
    if !(2..=7).contains(&length) {
        return Err(Error::argument(format!("equivalence check supports 2 <= L <= 7, got {length}")));
    }
    let bulk_variant = match pair {
        EquivalencePair::H1VsTwisted => Variant::BulkXdagger,
        EquivalencePair::H2VsParity => Variant::BulkConj,
    };
    let reference = equivalence_reference(pair, length);
    let bulk = named_hamiltonian(bulk_variant, length, 3)?.matrix;
    let target = named_hamiltonian(reference, length, 3)?.matrix;
    let u = Monomial::from_matrix(&bulk_to_end_unitary(pair, length)?)
        .ok_or_else(|| Error::numerical("site unitary is not monomial"))?;
    let conjugation_residual = u.conjugate(&bulk).max_abs_diff(&target);
    let (a, _) = linalg::hermitian_eigen(&bulk)?;
    let (b, _) = linalg::hermitian_eigen(&target)?;
    let spectrum_deviation = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        pair,
        length,
        reference,
        spectrum_deviation,
        conjugation_residual,
    })
}

/// Smallest total mismatch pairing of two eigenvalue lists (greedy on the
/// closest remaining pair), as the largest matched distance.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - a[i]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Orthonormal basis of the eigenspace of `charge` with eigenvalue `value`.
pub fn charge_sector_basis(charge: &ComplexMatrix, value: Complex64) -> Result<ComplexMatrix> {
    let dim = charge.rows();
    let shifted = ComplexMatrix::from_fn(dim, dim, |i, j| charge[(i, j)] - if i == j { value } else { ZERO });
    linalg::nullspace(&shifted, 1e-10)
}

/// Eigenvalues of `t` restricted to an invariant subspace with orthonormal basis `v`.
pub fn restricted_eigenvalues(t: &ComplexMatrix, v: &ComplexMatrix) -> Result<Vec<Complex64>> {
    linalg::eigenvalues(&(&v.adjoint() * &(t * v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEquivalenceReport {
    pub length: usize,
    pub x: f64,
    /// `(Q of T⁽⁺⁾, Q of T⁽⁻⁾, max eigenvalue distance)`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub conjugate_spectrum_deviation: f64,
}

/// Sector-wise spectra of `T⁽⁺⁾(x)` and `T⁽⁻⁾(x)`: sectors `Q` and `−Q` agree, and
/// the full spectrum of `T⁽⁻⁾` is the complex conjugate of that of `T⁽⁺⁾`.
pub fn sector_equivalence_check(length: usize, x: f64) -> Result<SectorEquivalenceReport> {
    let plus = ChainSpec::potts(Variant::Z3Plus, length)?.transfer(Complex64::new(x, 0.0))?;
    let minus = ChainSpec::potts(Variant::Z3Minus, length)?.transfer(Complex64::new(x, 0.0))?;
    let charge = global_charge(ChargeKind::Z3, length, 3)?;
    let mut pairs = Vec::new();
    for q in 0..3 {
        let mirrored = (3 - q) % 3;
        let vp = charge_sector_basis(&charge, root_of_unity(3, q as i64))?;
        let vm = charge_sector_basis(&charge, root_of_unity(3, mirrored as i64))?;
        let ep = restricted_eigenvalues(&plus, &vp)?;
        let em = restricted_eigenvalues(&minus, &vm)?;
        pairs.push((q, mirrored, multiset_distance(&ep, &em)));
    }
    let all_plus: Vec<Complex64> = linalg::eigenvalues(&plus)?.into_iter().map(|z| z.conj()).collect();
    let all_minus = linalg::eigenvalues(&minus)?;
    Ok(SectorEquivalenceReport {
        length,
        x,
        pairs,
        conjugate_spectrum_deviation: multiset_distance(&all_plus, &all_minus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::embed_two_site;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Independent contraction on the full `aux ⊗ chain` space followed by a
    /// partial trace against the seam.
    fn brute_force_transfer(wf: &WeightFamily, g: &ComplexMatrix, length: usize, bulk: bool, x: f64) -> ComplexMatrix {
        let n = wf.n();
        let l = lax(wf, r(x)).unwrap();
        let sites = length + 1;
        let g_aux = crate::algebra::embed_at_site(g, 1, sites, n).unwrap();
        let mut prod = if bulk { ComplexMatrix::identity(n.pow(sites as u32)) } else { g_aux.clone() };
        for j in (1..=length).rev() {
            let lj = embed_two_site(&l, 1, j + 1, sites, n).unwrap();
            prod = if bulk { &(&prod * &g_aux) * &lj } else { &prod * &lj };
        }
        let dim = n.pow(length as u32);
        ComplexMatrix::from_fn(dim, dim, |a, b| (0..n).map(|alpha| prod[(alpha * dim + a, alpha * dim + b)]).sum())
    }

    /// Closed form of the end-seam transfer matrix obtained by resolving the
    /// Kronecker deltas of the Lax operator.
    fn closed_form_transfer(wf: &WeightFamily, g: &ComplexMatrix, length: usize, x: f64) -> ComplexMatrix {
        let n = wf.n();
        let dim = n.pow(length as u32);
        let (h, v) = (wf.table(Edge::Horizontal, r(x)).unwrap(), wf.table(Edge::Vertical, r(x)).unwrap());
        ComplexMatrix::from_fn(dim, dim, |a, b| {
            let sp = basis_digits(a, length, n);
            let s = basis_digits(b, length, n);
            let mut w: Complex64 = (0..length).map(|j| h[(sp[j], s[j])]).product();
            for j in 1..length {
                w *= v[(sp[j], s[j - 1])];
            }
            w * (0..n).map(|beta| g[(beta, s[length - 1])] * v[(sp[0], beta)]).sum::<Complex64>()
        })
    }

    #[test]
    fn fold_matches_brute_force_and_closed_form() {
        let wf = WeightFamily::potts3();
        for seam in [Seam::identity(3), Seam::g_plus(3).unwrap(), Seam::g_conj(3).unwrap()] {
            for length in 2..=3 {
                let x = 0.123;
                let t = transfer_end_seam(&wf, &seam, length, r(x)).unwrap();
                assert!(t.max_abs_diff(&brute_force_transfer(&wf, &seam.matrix, length, false, x)) < 1e-13);
                assert!(t.max_abs_diff(&closed_form_transfer(&wf, &seam.matrix, length, x)) < 1e-13);
                let tb = transfer_bulk_seam(&wf, &seam, length, r(x)).unwrap();
                assert!(tb.max_abs_diff(&brute_force_transfer(&wf, &seam.matrix, length, true, x)) < 1e-13);
            }
        }
    }

    #[test]
    fn transfer_special_points() {
        let wf = WeightFamily::potts3();
        for length in 2..=4 {
            let t = transfer_end_seam(&wf, &Seam::identity(3), length, r(PI / 6.0)).unwrap();
            assert!(t.max_abs_diff(&ComplexMatrix::identity(t.rows())) < 1e-14);
        }
        let t0 = transfer_end_seam(&wf, &Seam::g_plus(3).unwrap(), 2, ZERO).unwrap();
        for i in 0..t0.rows() {
            let nz: Vec<_> = t0.row(i).iter().filter(|z| z.norm() > 1e-14).collect();
            assert_eq!(nz.len(), 1);
            assert!((nz[0].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn transfer_families_commute() {
        let wf = WeightFamily::potts3();
        let end = transfer_end_seam(&wf, &Seam::g_plus(3).unwrap(), 2, r(0.05)).unwrap();
        let end2 = transfer_end_seam(&wf, &Seam::g_plus(3).unwrap(), 2, r(0.11)).unwrap();
        assert!(end.commutator(&end2).max_abs() < 1e-12);
        let bulk = transfer_bulk_seam(&wf, &Seam::g_plus(3).unwrap(), 3, r(0.05)).unwrap();
        let bulk2 = transfer_bulk_seam(&wf, &Seam::g_plus(3).unwrap(), 3, r(0.17)).unwrap();
        assert!(bulk.commutator(&bulk2).max_abs() < 1e-12);
        let id = transfer_bulk_seam(&wf, &Seam::identity(3), 3, r(0.08)).unwrap();
        assert!(id.max_abs_diff(&transfer_end_seam(&wf, &Seam::identity(3), 3, r(0.08)).unwrap()) < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let spec = ChainSpec::potts(Variant::Conj, 3).unwrap();
        let (_, dt) = spec.transfer_with_derivative(r(0.07)).unwrap();
        let h = 1e-5;
        let fd = (&spec.transfer(r(0.07 + h)).unwrap() - &spec.transfer(r(0.07 - h)).unwrap()).scale(r(0.5 / h));
        assert!(dt.max_abs_diff(&fd) < 1e-7);
    }

    #[test]
    fn diagonal_transfer() {
        let wf = WeightFamily::potts3();
        let t0 = transfer_diagonal(&wf, 2, ZERO).unwrap();
        assert!(t0.max_abs_diff(&ComplexMatrix::identity(9)) < 1e-15);
        let x = r(0.1);
        let t = transfer_diagonal(&wf, 2, x).unwrap();
        // a = (1,1), b = (1,2) in 1-based states.
        let expected = crate::weights::potts_b(x) * crate::weights::potts_a(x);
        assert!((t[(0, 1)] - expected).norm() < 1e-15);
        for length in 2..=3 {
            let diag = transfer_diagonal(&wf, length, x).unwrap();
            let shift = translation(length, 3).unwrap();
            let vertex = transfer_end_seam(&wf, &Seam::identity(3), length, x).unwrap();
            assert!(vertex.max_abs_diff(&(&diag * &shift)) < 1e-14);
            assert!(diag.commutator(&shift).max_abs() < 1e-14);
            let d = linalg::eigenvalues(&(&diag * &shift)).unwrap();
            let e = linalg::eigenvalues(&vertex).unwrap();
            assert!(multiset_distance(&d, &e) < 1e-10);
            // Without the translation only the moduli agree.
            let mut dm: Vec<f64> = linalg::eigenvalues(&diag).unwrap().iter().map(|z| z.norm()).collect();
            let mut em: Vec<f64> = e.iter().map(|z| z.norm()).collect();
            dm.sort_by(f64::total_cmp);
            em.sort_by(f64::total_cmp);
            assert!(dm.iter().zip(&em).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    #[test]
    fn hamiltonian_limit_is_log_derivative() {
        for variant in [Variant::Periodic, Variant::Z3Plus, Variant::Conj, Variant::BulkXdagger, Variant::BulkConj] {
            for length in 2..=3 {
                let spec = ChainSpec::potts(variant, length).unwrap();
                let bundle = hamiltonian_limit(&spec).unwrap();
                let oracle = log_derivative_at_zero(&spec).unwrap();
                assert!(bundle.matrix.max_abs_diff(&oracle) < 1e-10, "{variant} L={length}");
                assert!(bundle.matrix.hermiticity_defect() < 1e-12);
                assert!(bundle.max_charge_commutator() < 1e-12);
            }
        }
    }

    #[test]
    fn limit_matches_named_chains() {
        let bound = 4.0 / 3f64.sqrt();
        for variant in [Variant::Periodic, Variant::Z3Plus, Variant::Z3Minus, Variant::Conj, Variant::BulkXdagger, Variant::BulkConj] {
            let spec = ChainSpec::potts(variant, 3).unwrap();
            let limit = hamiltonian_limit(&spec).unwrap();
            let named = named_hamiltonian(variant, 3, 3).unwrap();
            assert!(limit.normalized().max_abs_diff(&named.matrix) < 1e-12, "{variant}");
            assert!((limit.additive_constant + 3.0 * bound).abs() < 1e-12);
            let fit = affine_fit(&named.matrix, &limit.matrix).unwrap();
            assert!(fit.residual < 1e-12 && (fit.scale - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn named_three_state_chains_by_explicit_operators() {
        let alg = site_algebra(3).unwrap();
        let w = alg.omega;
        let length = 3;
        let site = |op: &ComplexMatrix, j: usize| crate::algebra::embed_at_site(op, j, length, 3).unwrap();
        let (z, zd, x, xd) = (&alg.z, alg.z.adjoint(), &alg.x, alg.x.adjoint());
        let mut h = ComplexMatrix::zeros(27, 27);
        for j in 1..length {
            h += &(&site(z, j) * &site(&zd, j + 1));
            h += &(&site(&zd, j) * &site(z, j + 1));
        }
        for j in 1..=length {
            h += &site(x, j);
            h += &site(&xd, j);
        }
        let c = r(-2.0 / 3f64.sqrt());
        let closing_plus = &(&site(z, 3) * &site(&zd, 1)).scale(w.conj()) + &(&site(&zd, 3) * &site(z, 1)).scale(w);
        let closing_conj = &(&site(z, 3) * &site(z, 1)) + &(&site(&zd, 3) * &site(&zd, 1));
        let plus = (&h + &closing_plus).scale(c);
        let conj = (&h + &closing_conj).scale(c);
        assert!(named_hamiltonian(Variant::Z3Plus, 3, 3).unwrap().matrix.max_abs_diff(&plus) < 1e-14);
        assert!(named_hamiltonian(Variant::Conj, 3, 3).unwrap().matrix.max_abs_diff(&conj) < 1e-14);
    }

    #[test]
    fn shift_relations() {
        let wf = WeightFamily::potts3();
        for seam in [Seam::g_plus(3).unwrap(), Seam::g_conj(3).unwrap()] {
            assert!(shift_relations_check(&wf, &seam, 3).unwrap().max_residual < 1e-10);
        }
        assert!(shift_relations_check(&wf, &Seam::identity(3), 2).unwrap().max_residual < 1e-10);
    }

    #[test]
    fn cubic_identities() {
        assert!(functional_identity_residual(FunctionalIdentity::Z3Plus, 2, 0.45).unwrap() < 1e-9);
        assert!(functional_identity_residual(FunctionalIdentity::Conj, 3, 0.41).unwrap() < 1e-9);
        assert!(functional_identity_residual_with_sign(FunctionalIdentity::Z3Plus, 2, 0.45, -1.0).unwrap() > 1e-3);
    }

    #[test]
    fn similarity_transforms() {
        for (pair, length, reference) in [
            (EquivalencePair::H1VsTwisted, 3, Variant::Periodic),
            (EquivalencePair::H1VsTwisted, 4, Variant::Z3Plus),
            (EquivalencePair::H2VsParity, 3, Variant::Conj),
        ] {
            let report = similarity_spectral_check(pair, length).unwrap();
            assert_eq!(report.reference, reference);
            assert!(report.conjugation_residual < 1e-12);
            assert!(report.spectrum_deviation < 1e-10);
        }
    }

    #[test]
    fn sector_equivalences() {
        let report = sector_equivalence_check(2, 0.13).unwrap();
        assert!(report.pairs.iter().all(|p| p.2 < 1e-10), "{report:?}");
        assert!(report.conjugate_spectrum_deviation < 1e-10);
    }

    #[test]
    fn variant_parsing_round_trips() {
        for v in [Variant::Periodic, Variant::Z3Plus, Variant::ZnTwist(2), Variant::ZnConj, Variant::BulkConj] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Variant>().is_err());
        assert!(ChainSpec::new(Variant::Z3Plus, 3, 4).is_err());
        assert!(ChainSpec::new(Variant::ZnTwist(4), 3, 4).is_err());
    }
}
