//! End-to-end spectral pipeline (Hamiltonian, sectors, `Λ`-forms, Bethe
//! roots), the embedded reference spectra, table reproduction, completeness
//! census, conformal-weight bookkeeping and spectral-record persistence.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bethe::{
    bethe_residual, canonicalize_roots, newton_refine, reduce_spin, root_multiset_distance, BetheKind, BetheSystem,
    RootSet,
};
use crate::error::{Error, Result};
use crate::spectra::{
    eigenvalue_from_product, expected_mu, expected_root_count, interpolate_lambda_forms, resolve_sectors,
    seeds_from_lambda, LambdaForm, Sector,
};
use crate::transfer::{named_hamiltonian, ChainSpec, Variant};

/// Bethe residual below which a refined root set is accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-9;
/// Allowed gap between the Bethe energy and the exact eigenvalue.
pub const ENERGY_TOL: f64 = 1e-7;
/// Energy window for pairing computed states with printed rows.
pub const ROW_MATCH_TOL: f64 = 1e-6;
/// Printed roots carry eight decimals.
pub const ROOT_TOL: f64 = 1e-5;
pub const SPIN_TOL: f64 = 1e-6;

/// The Bethe equations governing a three-state chain.
pub fn bethe_kind(variant: Variant) -> Result<BetheKind> {
    match variant {
        Variant::Periodic => Ok(BetheKind::Periodic),
        Variant::Z3Plus => Ok(BetheKind::Z3),
        Variant::Conj => Ok(BetheKind::Conj),
        other => Err(Error::argument(format!("no Bethe equations are implemented for the {other} chain"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Computed,
    Reference,
}

/// One eigenstate: sector, energy, spin and Bethe roots.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRecord {
    pub variant: Variant,
    pub length: usize,
    pub sector: Sector,
    pub energy: f64,
    pub spin: f64,
    /// Canonical strip representatives, sorted.
    pub roots: Vec<Complex64>,
    pub bethe_residual: f64,
    pub eig_residual: f64,
    pub mu: i32,
    pub source: Source,
}

/// Everything the pipeline learned about one eigenstate.
#[derive(Debug, Clone)]
pub struct StateSolution {
    pub sector: Sector,
    /// Exact-diagonalization eigenvalue.
    pub energy: f64,
    pub eig_residual: f64,
    /// `Λ(0)` from the transfer matrix itself.
    pub lambda_at_zero: Option<Complex64>,
    pub form: Option<LambdaForm>,
    pub roots: Option<RootSet>,
    /// Why the state was not accepted, if it was not.
    pub failure: Option<String>,
}

impl StateSolution {
    pub fn accepted(&self) -> bool {
        self.failure.is_none() && self.roots.as_ref().is_some_and(|r| r.residual < ACCEPT_RESIDUAL)
    }

    /// `|exp(−2πi s/L) − Λ(0)|`.
    pub fn momentum_mismatch(&self, length: usize) -> Option<f64> {
        let (roots, lambda0) = (self.roots.as_ref()?, self.lambda_at_zero?);
        let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * roots.spin / length as f64);
        Some((phase - lambda0).norm())
    }

    /// `|(−Λ'(0)/Λ(0) − 4L/√3) − E|` with `Λ` from the interpolated form.
    pub fn form_energy_mismatch(&self) -> Option<f64> {
        Some((self.form.as_ref()?.energy() - self.energy).abs())
    }

    pub fn record(&self, variant: Variant, length: usize) -> Option<SpectralRecord> {
        if !self.accepted() {
            return None;
        }
        let roots = self.roots.as_ref()?;
        Some(SpectralRecord {
            variant,
            length,
            sector: self.sector,
            energy: self.energy,
            spin: roots.spin,
            roots: roots.lambdas.clone(),
            bethe_residual: roots.residual,
            eig_residual: self.eig_residual,
            mu: self.form.as_ref().map_or(0, |f| f.mu),
            source: Source::Computed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub spec: ChainSpec,
    /// Ordered by sector, then energy.
    pub states: Vec<StateSolution>,
}

impl ChainSolution {
    pub fn records(&self) -> Vec<SpectralRecord> {
        self.states
            .iter()
            .filter_map(|s| s.record(self.spec.variant, self.spec.length))
            .collect()
    }

    pub fn accepted_count(&self) -> usize {
        self.states.iter().filter(|s| s.accepted()).count()
    }
}

/// Full pipeline for a three-state chain: diagonalize `H`, resolve sectors,
/// fit every `Λ`-form, seed and refine the Bethe roots.
pub fn solve_chain(variant: Variant, length: usize) -> Result<ChainSolution> {
    let kind = bethe_kind(variant)?;
    let spec = ChainSpec::potts(variant, length)?;
    let h = named_hamiltonian(variant, length, 3)?.matrix;
    let states = resolve_sectors(&spec, &h)?;
    let forms = interpolate_lambda_forms(&spec, &states)?;
    let t0 = spec.transfer(Complex64::new(0.0, 0.0))?;

    let solutions = states
        .iter()
        .zip(forms)
        .map(|(state, form)| {
            let mut out = StateSolution {
                sector: state.sector,
                energy: state.energy,
                eig_residual: state.eig_residual,
                lambda_at_zero: eigenvalue_from_product(&t0.mul_vec(&state.vector), &state.vector).ok(),
                form: None,
                roots: None,
                failure: None,
            };
            let form = match form {
                Ok(f) => f,
                Err(e) => {
                    out.failure = Some(e.to_string());
                    return out;
                }
            };
            out.failure = solve_state(kind, variant, length, state.sector, state.energy, &form)
                .map(|roots| out.roots = Some(roots))
                .err();
            out.form = Some(form);
            out
        })
        .collect();
    Ok(ChainSolution { spec, states: solutions })
}

fn solve_state(
    kind: BetheKind,
    variant: Variant,
    length: usize,
    sector: Sector,
    energy: f64,
    form: &LambdaForm,
) -> std::result::Result<RootSet, String> {
    if form.flagged {
        return Err("coefficient trimming is ambiguous".into());
    }
    let expected = expected_root_count(variant, sector, length);
    if expected != Some(form.root_count) {
        return Err(format!("form has {} zeros, expected {expected:?}", form.root_count));
    }
    if form.mu != expected_mu(variant, sector) {
        return Err(format!("form has asymptotic exponent {}", form.mu));
    }
    let sys = BetheSystem::new(kind, length, sector).map_err(|e| e.to_string())?;
    let roots = newton_refine(&sys, &seeds_from_lambda(form)).map_err(|e| e.to_string())?;
    if roots.residual >= ACCEPT_RESIDUAL {
        return Err(format!("Bethe residual {:.2e}", roots.residual));
    }
    if (roots.energy - energy).abs() > ENERGY_TOL {
        return Err(format!("Bethe energy {} differs from the eigenvalue {energy}", roots.energy));
    }
    Ok(roots)
}

// ---------------------------------------------------------------------------
// Reference spectra

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    #[serde(rename = "t1_L2_plus")]
    T1,
    #[serde(rename = "t2_L2_conj")]
    T2,
    #[serde(rename = "tA_L3_plus")]
    TA,
    #[serde(rename = "tB_L3_conj")]
    TB,
}

impl TableId {
    pub const ALL: [TableId; 4] = [TableId::T1, TableId::T2, TableId::TA, TableId::TB];

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::T1 => "t1_L2_plus",
            TableId::T2 => "t2_L2_conj",
            TableId::TA => "tA_L3_plus",
            TableId::TB => "tB_L3_conj",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" | "t1_l2_plus" => Ok(TableId::T1),
            "t2" | "t2_l2_conj" => Ok(TableId::T2),
            "ta" | "ta_l3_plus" => Ok(TableId::TA),
            "tb" | "tb_l3_conj" => Ok(TableId::TB),
            _ => Err(Error::argument(format!("unknown table '{s}'"))),
        }
    }
}

const REFERENCE_DATA: &str = include_str!("../data/reference_tables.json");

#[derive(Deserialize)]
struct RawData {
    schema_version: u32,
    tables: Vec<RawTable>,
}

#[derive(Deserialize)]
struct RawTable {
    id: TableId,
    variant: Variant,
    length: usize,
    rows: Vec<RawRow>,
}

#[derive(Deserialize)]
struct RawRow {
    energy: f64,
    sector: Sector,
    spin: String,
    roots: Vec<[f64; 2]>,
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    s.parse()
        .map_err(|_| Error::Serialization(format!("bad rational '{s}' in reference data")))
}

/// One printed spectrum.
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    pub id: TableId,
    pub variant: Variant,
    pub length: usize,
    /// Printed rows, in print order.
    pub rows: Vec<SpectralRecord>,
    /// Printed spins as exact fractions, aligned with `rows`.
    pub spins: Vec<Ratio<i64>>,
}

impl ReferenceTable {
    /// Sector Q=2 rows of a Z(3)-twisted table that only prints Q=0, 1:
    /// roots and spin of each Q=1 row reflected through the origin.
    pub fn reflected_rows(&self) -> Vec<SpectralRecord> {
        if self.variant != Variant::Z3Plus || self.rows.iter().any(|r| r.sector == Sector::Q(2)) {
            return Vec::new();
        }
        self.rows
            .iter()
            .filter(|r| r.sector == Sector::Q(1))
            .map(|r| SpectralRecord {
                sector: Sector::Q(2),
                spin: reduce_spin(-r.spin, self.length as f64),
                roots: canonicalize_roots(&r.roots.iter().map(|z| -z).collect::<Vec<_>>()),
                mu: -r.mu,
                ..r.clone()
            })
            .collect()
    }

    /// Printed rows followed by the reflected ones.
    pub fn checked_rows(&self) -> Vec<SpectralRecord> {
        let mut rows = self.rows.clone();
        rows.extend(self.reflected_rows());
        rows
    }
}

/// Loads one of the embedded reference spectra.
pub fn reference_table(id: TableId) -> Result<ReferenceTable> {
    let data: RawData = serde_json::from_str(REFERENCE_DATA).map_err(|e| Error::Serialization(e.to_string()))?;
    if data.schema_version != 1 {
        return Err(Error::Serialization(format!(
            "reference data has schema version {}",
            data.schema_version
        )));
    }
    let raw = data
        .tables
        .into_iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::Serialization(format!("table {id} missing from reference data")))?;
    let mut rows = Vec::with_capacity(raw.rows.len());
    let mut spins = Vec::with_capacity(raw.rows.len());
    for row in raw.rows {
        let spin = parse_ratio(&row.spin)?;
        let roots: Vec<Complex64> = row.roots.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        rows.push(SpectralRecord {
            variant: raw.variant,
            length: raw.length,
            sector: row.sector,
            energy: row.energy,
            spin: *spin.numer() as f64 / *spin.denom() as f64,
            roots: canonicalize_roots(&roots),
            bethe_residual: f64::NAN,
            eig_residual: f64::NAN,
            mu: expected_mu(raw.variant, row.sector),
            source: Source::Reference,
        });
        spins.push(spin);
    }
    for r in &mut rows {
        let sys = BetheSystem::new(bethe_kind(r.variant)?, r.length, r.sector)?;
        r.bethe_residual = bethe_residual(&sys, &r.roots)?;
    }
    Ok(ReferenceTable {
        id,
        variant: raw.variant,
        length: raw.length,
        rows,
        spins,
    })
}

/// Outcome for one reference row.
#[derive(Debug, Clone, Serialize)]
pub struct RowReport {
    pub index: usize,
    pub sector: Sector,
    pub energy: f64,
    pub spin: f64,
    pub reflected: bool,
    /// Index into the computed states, if a partner was found.
    pub matched_state: Option<usize>,
    pub energy_error: f64,
    pub root_error: f64,
    /// Root distance with roots compared modulo `iπ/2`; a small value next
    /// to a large `root_error` points at a dropped `+iπ/2` in the printed row.
    pub root_error_mod_half_period: f64,
    pub spin_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub id: TableId,
    pub rows: Vec<RowReport>,
    pub passed: usize,
    pub total_states: usize,
    pub accepted_states: usize,
    /// Largest `|E_Bethe − E_exact|` over the accepted states.
    pub max_energy_gap: f64,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.rows.len() && self.accepted_states == self.total_states
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} rows pass ({}/{} states solved)",
            self.id,
            self.passed,
            self.rows.len(),
            self.accepted_states,
            self.total_states
        )
    }
}

/// Spin distance modulo `L`.
pub fn spin_distance(a: f64, b: f64, length: usize) -> f64 {
    reduce_spin(a - b, length as f64).abs()
}

fn half_period_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let fold = |v: &[Complex64]| -> Vec<Complex64> { v.iter().map(|z| Complex64::new(z.re, 2.0 * z.im)).collect() };
    // Doubling the imaginary parts turns "modulo iπ/2" into "modulo iπ".
    root_multiset_distance(&fold(a), &fold(b))
}

/// Runs the pipeline for the chain of table `id` and pairs every printed
/// (and reflected) row with a computed state of the same sector and energy,
/// choosing among degenerate partners by root distance.
pub fn reproduce_table(id: TableId) -> Result<TableReport> {
    let table = reference_table(id)?;
    let solution = solve_chain(table.variant, table.length)?;
    let computed: Vec<(usize, SpectralRecord)> = solution
        .states
        .iter()
        .enumerate()
        .filter_map(|(k, s)| s.record(table.variant, table.length).map(|r| (k, r)))
        .collect();
    let printed = table.rows.len();
    let mut used = vec![false; computed.len()];
    let mut rows = Vec::new();
    for (index, reference) in table.checked_rows().into_iter().enumerate() {
        let best = computed
            .iter()
            .enumerate()
            .filter(|(c, (_, r))| {
                !used[*c] && r.sector == reference.sector && (r.energy - reference.energy).abs() < ROW_MATCH_TOL
            })
            .map(|(c, (_, r))| (c, root_multiset_distance(&r.roots, &reference.roots)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let mut report = RowReport {
            index,
            sector: reference.sector,
            energy: reference.energy,
            spin: reference.spin,
            reflected: index >= printed,
            matched_state: None,
            energy_error: f64::INFINITY,
            root_error: f64::INFINITY,
            root_error_mod_half_period: f64::INFINITY,
            spin_error: f64::INFINITY,
            pass: false,
        };
        if let Some((c, root_error)) = best {
            used[c] = true;
            let (state, record) = &computed[c];
            report.matched_state = Some(*state);
            report.energy_error = (record.energy - reference.energy).abs();
            report.root_error = root_error;
            report.root_error_mod_half_period = half_period_distance(&record.roots, &reference.roots);
            report.spin_error = spin_distance(record.spin, reference.spin, table.length);
            report.pass = root_error < ROOT_TOL && report.spin_error < SPIN_TOL;
        }
        rows.push(report);
    }
    let max_energy_gap = solution
        .states
        .iter()
        .filter_map(|s| s.roots.as_ref().map(|r| (r.energy - s.energy).abs()))
        .fold(0.0, f64::max);
    Ok(TableReport {
        id,
        passed: rows.iter().filter(|r| r.pass).count(),
        rows,
        total_states: solution.states.len(),
        accepted_states: solution.accepted_count(),
        max_energy_gap,
    })
}

// ---------------------------------------------------------------------------
// Completeness

#[derive(Debug, Clone, Serialize)]
pub struct SectorCensus {
    pub sector: Sector,
    pub states: usize,
    pub accepted: usize,
    pub expected_root_count: Option<usize>,
    /// `(root count, number of states)` over the accepted states.
    pub root_counts: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessReport {
    pub variant: Variant,
    pub length: usize,
    pub total: usize,
    pub accepted: usize,
    pub census: Vec<SectorCensus>,
    /// `(sector, energy, reason)` of every state without an accepted root set.
    pub failures: Vec<(Sector, f64, String)>,
}

impl CompletenessReport {
    /// Every state solved, with the expected number of roots.
    pub fn complete(&self) -> bool {
        self.accepted == self.total
            && self.census.iter().all(|c| {
                c.root_counts
                    .iter()
                    .all(|&(count, _)| Some(count) == c.expected_root_count)
            })
    }
}

impl fmt::Display for CompletenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} L={}: {}/{} states solved", self.variant, self.length, self.accepted, self.total)?;
        for c in &self.census {
            write!(f, "; {}: {}/{}", c.sector, c.accepted, c.states)?;
            for (count, states) in &c.root_counts {
                write!(f, " [{count} roots x{states}]")?;
            }
        }
        Ok(())
    }
}

pub fn completeness_report(variant: Variant, length: usize) -> Result<CompletenessReport> {
    if !(1..=7).contains(&length) {
        return Err(Error::argument(format!("completeness census supports 1 <= L <= 7, got {length}")));
    }
    let solution = solve_chain(variant, length)?;
    let mut census: Vec<SectorCensus> = Vec::new();
    let mut failures = Vec::new();
    for s in &solution.states {
        let entry = match census.iter_mut().position(|c| c.sector == s.sector) {
            Some(k) => &mut census[k],
            None => {
                census.push(SectorCensus {
                    sector: s.sector,
                    states: 0,
                    accepted: 0,
                    expected_root_count: expected_root_count(variant, s.sector, length),
                    root_counts: Vec::new(),
                });
                census.last_mut().expect("just pushed")
            }
        };
        entry.states += 1;
        match (&s.roots, s.accepted()) {
            (Some(roots), true) => {
                entry.accepted += 1;
                let n = roots.lambdas.len();
                match entry.root_counts.iter_mut().find(|(count, _)| *count == n) {
                    Some((_, k)) => *k += 1,
                    None => entry.root_counts.push((n, 1)),
                }
            }
            _ => failures.push((
                s.sector,
                s.energy,
                s.failure.clone().unwrap_or_else(|| "not accepted".into()),
            )),
        }
    }
    census.sort_by_key(|c| c.sector);
    Ok(CompletenessReport {
        variant,
        length,
        total: solution.states.len(),
        accepted: solution.accepted_count(),
        census,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Conformal weights

/// Kac weight `Δ_{r,s} = ((6r − 5s)² − 1)/120` of the c = 4/5 minimal model.
pub fn kac_weight(r: i64, s: i64) -> Result<Ratio<i64>> {
    if !(1..=2).contains(&r) || !(1..=5).contains(&s) {
        return Err(Error::argument(format!("Kac indices (r, s) = ({r}, {s}) outside 1<=r<=2, 1<=s<=5")));
    }
    Ok(Ratio::new((6 * r - 5 * s).pow(2) - 1, 120))
}

fn ratios(list: &[(i64, i64)]) -> Vec<Ratio<i64>> {
    list.iter().map(|&(n, d)| Ratio::new(n, d)).collect()
}

/// Weights of the fields even under the Z(2) parity.
pub fn even_parity_weights() -> Vec<Ratio<i64>> {
    ratios(&[(2, 3), (3, 1), (2, 5), (1, 15), (7, 5)])
}

/// Weights of the fields odd under the Z(2) parity.
pub fn odd_parity_weights() -> Vec<Ratio<i64>> {
    ratios(&[(1, 8), (13, 8), (1, 40), (21, 40)])
}

type RationalPair = (i64, i64);

/// Primary `(Δ, Δ̄)` pairs of a twisted sector.
pub fn conformal_weights(kind: BetheKind, sector: Sector) -> Result<Vec<(Ratio<i64>, Ratio<i64>)>> {
    let pairs: &[(RationalPair, RationalPair)] = match (kind, sector) {
        (BetheKind::Z3, Sector::Q(0)) => &[((1, 15), (1, 15)), ((2, 3), (2, 3))],
        (BetheKind::Z3, Sector::Q(1)) => &[((1, 15), (2, 5)), ((2, 3), (0, 1)), ((1, 15), (7, 5)), ((2, 3), (3, 1))],
        (BetheKind::Z3, Sector::Q(2)) => &[((2, 5), (1, 15)), ((0, 1), (2, 3)), ((7, 5), (1, 15)), ((3, 1), (2, 3))],
        (BetheKind::Conj, Sector::Nu(1)) => &[((1, 40), (1, 40)), ((1, 8), (1, 8)), ((21, 40), (21, 40)), ((13, 8), (13, 8))],
        (BetheKind::Conj, Sector::Nu(-1)) => &[((21, 40), (1, 40)), ((1, 40), (21, 40)), ((13, 8), (1, 8)), ((1, 8), (13, 8))],
        _ => return Err(Error::argument(format!("no conformal weights tabulated for {kind:?} sector {sector}"))),
    };
    Ok(pairs
        .iter()
        .map(|&((a, b), (c, d))| (Ratio::new(a, b), Ratio::new(c, d)))
        .collect())
}

/// Distinct primary spins `Δ − Δ̄` of a sector, ascending.
pub fn expected_spins(kind: BetheKind, sector: Sector) -> Result<Vec<Ratio<i64>>> {
    let mut spins: Vec<Ratio<i64>> = conformal_weights(kind, sector)?.into_iter().map(|(d, db)| d - db).collect();
    spins.sort();
    spins.dedup();
    Ok(spins)
}

/// True if `spin` equals a primary spin of the set up to an integer (a
/// descendant shift), within `tol`.
pub fn spin_in_expected_set(spin: f64, expected: &[Ratio<i64>], tol: f64) -> bool {
    expected.iter().any(|s| {
        let d = spin - *s.numer() as f64 / *s.denom() as f64;
        (d - d.round()).abs() < tol
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    /// The even-parity list equals the non-identity weights with odd `s`.
    pub even_matches: bool,
    /// The odd-parity list equals the weights with even `s`.
    pub odd_matches: bool,
    /// Number of distinct weights in the union of both lists.
    pub distinct_union: usize,
    /// Number of distinct Kac weights over the full `2 × 5` grid.
    pub distinct_kac: usize,
}

impl PartitionReport {
    pub fn pass(&self) -> bool {
        self.even_matches && self.odd_matches && self.distinct_union + 1 == self.distinct_kac
    }
}

/// Checks that the two parity lists split the non-trivial Kac weights by the
/// parity `(−1)^{s+1}` of the second index.
pub fn h2_weight_partition_check() -> Result<PartitionReport> {
    let mut odd_s = Vec::new();
    let mut even_s = Vec::new();
    for r in 1..=2 {
        for s in 1..=5 {
            let w = kac_weight(r, s)?;
            if s % 2 == 1 {
                odd_s.push(w);
            } else {
                even_s.push(w);
            }
        }
    }
    let sorted = |mut v: Vec<Ratio<i64>>| {
        v.sort();
        v.dedup();
        v
    };
    let zero = Ratio::from_integer(0);
    let nontrivial_odd_s = sorted(odd_s.iter().copied().filter(|w| *w != zero).collect());
    let mut all = odd_s.clone();
    all.extend(&even_s);
    let mut union = even_parity_weights();
    union.extend(odd_parity_weights());
    Ok(PartitionReport {
        even_matches: sorted(even_parity_weights()) == nontrivial_odd_s,
        odd_matches: sorted(odd_parity_weights()) == sorted(even_s),
        distinct_union: sorted(union).len(),
        distinct_kac: sorted(all).len(),
    })
}

// ---------------------------------------------------------------------------
// Persistence

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub sector: Sector,
    pub energy: f64,
    pub spin: f64,
    pub mu: i32,
    pub roots: Vec<RootEntry>,
    pub bethe_residual: f64,
    pub eig_residual: f64,
}

/// JSON document holding the computed spectrum of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub schema_version: u32,
    pub variant: Variant,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub records: Vec<RecordEntry>,
}

impl SpectrumDocument {
    pub fn new(variant: Variant, n: usize, length: usize, records: &[SpectralRecord]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            variant,
            n,
            length,
            records: records
                .iter()
                .map(|r| RecordEntry {
                    sector: r.sector,
                    energy: r.energy,
                    spin: r.spin,
                    mu: r.mu,
                    roots: r.roots.iter().map(|z| RootEntry { re: z.re, im: z.im }).collect(),
                    bethe_residual: r.bethe_residual,
                    eig_residual: r.eig_residual,
                })
                .collect(),
        }
    }

    pub fn records(&self) -> Vec<SpectralRecord> {
        self.records
            .iter()
            .map(|e| SpectralRecord {
                variant: self.variant,
                length: self.length,
                sector: e.sector,
                energy: e.energy,
                spin: e.spin,
                roots: e.roots.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
                bethe_residual: e.bethe_residual,
                eig_residual: e.eig_residual,
                mu: e.mu,
                source: Source::Computed,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported schema version {}",
                doc.schema_version
            )));
        }
        Ok(doc)
    }
}
