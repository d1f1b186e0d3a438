//! Batch driver: identity checks, spectra, Bethe roots, table reproduction and
//! Z(n) chain construction, with JSON reports.
//!
//! Exit codes: 0 all checks pass, 1 a check failed (report still written),
//! 2 usage or argument error, 3 numerical failure.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use potts_toroidal::bethe::reduce_spin;
use potts_toroidal::harness::{completeness_report, reproduce_table, solve_chain, SpectrumDocument, TableId};
use potts_toroidal::lattice::{discover_seams, seam_residual, ybe_residual, Seam};
use potts_toroidal::spectra::{eigenvalue_from_product, resolve_sectors, Sector};
use potts_toroidal::transfer::{
    affine_fit, functional_identity_residual, functional_identity_residual_with_sign, log_derivative_at_zero,
    named_hamiltonian, shift_relations_check, similarity_spectral_check, ChainSpec, EquivalencePair,
    FunctionalIdentity, Variant,
};
use potts_toroidal::weights::WeightFamily;
use potts_toroidal::{rng, Error};

#[derive(Parser)]
#[command(name = "potts-toroidal", version, about = "Integrable three-state Potts and Z(n) chains with toroidal boundaries")]
struct Cli {
    /// Write the JSON report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operator identities: Yang-Baxter, seams, functional relations, shift
    /// relations, bulk-seam equivalences.
    #[command(subcommand)]
    Verify(Verify),
    /// Exact spectrum resolved into charge sectors.
    Spectrum(ChainArgs),
    /// Bethe roots of every state (or one sector) from the full pipeline.
    Bethe(BetheArgs),
    /// Reference spectra.
    #[command(subcommand)]
    Tables(Tables),
    /// Fraction of states with an accepted Bethe root set, by sector.
    Completeness(ChainArgs),
    /// Z(n) Fateev-Zamolodchikov chains.
    #[command(subcommand)]
    Zn(Zn),
}

#[derive(Subcommand)]
enum Verify {
    Ybe {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    Seams {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    Functional {
        #[arg(long, value_enum)]
        variant: IdentityArg,
        #[arg(long = "L", alias = "length")]
        length: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    Shift {
        #[arg(long)]
        variant: String,
        #[arg(long = "L", alias = "length")]
        length: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    Equivalence {
        #[arg(long, value_enum)]
        pair: PairArg,
        #[arg(long = "L", alias = "length")]
        length: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IdentityArg {
    #[value(alias = "z3_plus")]
    Z3,
    Conj,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairArg {
    H1,
    H2,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    variant: String,
    #[arg(long = "L", alias = "length")]
    length: usize,
}

#[derive(Args)]
struct BetheArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Q = 0, 1, 2 or ν_c = +1, -1.
    #[arg(long, allow_hyphen_values = true)]
    sector: Option<String>,
}

#[derive(Subcommand)]
enum Tables {
    Check {
        #[arg(long)]
        id: String,
    },
}

#[derive(Subcommand)]
enum Zn {
    Build {
        #[arg(long)]
        n: usize,
        /// Twist power l (seam X^{n-l}) or `conj`.
        #[arg(long)]
        twist: String,
        #[arg(long = "L", alias = "length")]
        length: usize,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Outcome of a command: pass/fail, a one-line summary and the JSON body.
struct Report {
    pass: bool,
    summary: String,
    body: Value,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Serialization(e.to_string()))
}

fn variant(s: &str) -> Result<Variant, Error> {
    s.parse()
}

fn verify_ybe(n: usize, samples: usize, seed: u64, tol: f64) -> Result<Report, Error> {
    let wf = if n == 3 { WeightFamily::potts3() } else { WeightFamily::fateev_zamolodchikov(n)? };
    let hi = PI / (2.0 * n as f64) - 0.02;
    let mut residuals = Vec::with_capacity(samples);
    for (x, y) in rng::uniform_pairs(&mut rng::seeded(seed), 0.02, hi, samples) {
        residuals.push(json!({"x": x, "y": y, "residual": ybe_residual(&wf, Complex64::new(x, 0.0), Complex64::new(y, 0.0))?}));
    }
    let max = residuals.iter().filter_map(|r| r["residual"].as_f64()).fold(0.0, f64::max);
    Ok(Report {
        pass: max < tol,
        summary: format!("ybe n={n}: max residual {max:.3e} over {samples} pairs (tol {tol:.0e})"),
        body: json!({"check": "ybe", "n": n, "seed": seed, "tolerance": tol, "max_residual": max, "samples": residuals}),
    })
}

fn verify_seams(n: usize, trials: usize, seed: u64) -> Result<Report, Error> {
    let wf = if n == 3 { WeightFamily::potts3() } else { WeightFamily::fateev_zamolodchikov(n)? };
    let found = discover_seams(&wf, trials, seed)?;
    let labels: Vec<String> = found.seams.iter().map(|s| s.label.to_string()).collect();
    let pass = found.commutant_dim == found.seam_span_dim
        && found.closed_under_products
        && found.max_certification_residual < 1e-10;
    Ok(Report {
        pass,
        summary: format!(
            "seams n={n}: {} certified {labels:?}; commutant dim {} vs span dim {}; closed {}",
            found.seams.len(),
            found.commutant_dim,
            found.seam_span_dim,
            found.closed_under_products
        ),
        body: json!({
            "check": "seams",
            "n": n,
            "seed": seed,
            "seams": labels,
            "commutant_dim": found.commutant_dim,
            "seam_span_dim": found.seam_span_dim,
            "closed_under_products": found.closed_under_products,
            "max_certification_residual": found.max_certification_residual,
            "unrecognized": found.unrecognized.len(),
        }),
    })
}

fn verify_functional(which: IdentityArg, length: usize, samples: usize, seed: u64, tol: f64) -> Result<Report, Error> {
    let identity = match which {
        IdentityArg::Z3 => FunctionalIdentity::Z3Plus,
        IdentityArg::Conj => FunctionalIdentity::Conj,
    };
    let mut max: f64 = 0.0;
    let mut control: f64 = 0.0;
    let mut points = Vec::with_capacity(samples);
    for x in rng::uniform_samples(&mut rng::seeded(seed), 0.35, 0.5, samples) {
        let r = functional_identity_residual(identity, length, x)?;
        let w = functional_identity_residual_with_sign(identity, length, x, -identity.sign())?;
        max = max.max(r);
        control = control.max(w);
        points.push(json!({"x": x, "residual": r, "wrong_sign_residual": w}));
    }
    Ok(Report {
        pass: max < tol,
        summary: format!(
            "functional {identity:?} L={length}: max residual {max:.3e} over {samples} points; wrong-sign control {control:.3e}"
        ),
        body: json!({
            "check": "functional",
            "identity": format!("{identity:?}"),
            "L": length,
            "seed": seed,
            "tolerance": tol,
            "max_residual": max,
            "wrong_sign_control": control,
            "samples": points,
        }),
    })
}

fn verify_shift(v: Variant, length: usize, tol: f64) -> Result<Report, Error> {
    let spec = ChainSpec::potts(v, length)?;
    let report = shift_relations_check(&spec.weights(), &spec.seam()?, length)?;
    Ok(Report {
        pass: report.max_residual < tol,
        summary: format!("shift {v} L={length}: max residual {:.3e}", report.max_residual),
        body: json!({"check": "shift", "variant": v, "tolerance": tol, "report": to_value(&report)?}),
    })
}

fn verify_equivalence(pair: PairArg, length: usize, tol: f64) -> Result<Report, Error> {
    let pair = match pair {
        PairArg::H1 => EquivalencePair::H1VsTwisted,
        PairArg::H2 => EquivalencePair::H2VsParity,
    };
    let report = similarity_spectral_check(pair, length)?;
    Ok(Report {
        pass: report.spectrum_deviation < tol && report.conjugation_residual < tol,
        summary: format!(
            "equivalence {pair:?} L={length}: reference {}, spectrum deviation {:.3e}, conjugation residual {:.3e}",
            report.reference, report.spectrum_deviation, report.conjugation_residual
        ),
        body: json!({"check": "equivalence", "tolerance": tol, "report": to_value(&report)?}),
    })
}

fn spectrum(v: Variant, length: usize) -> Result<Report, Error> {
    let spec = ChainSpec::potts(v, length)?;
    let bundle = named_hamiltonian(v, length, 3)?;
    let states = resolve_sectors(&spec, &bundle.matrix)?;
    let t0 = spec.transfer(Complex64::new(0.0, 0.0))?;
    let mut rows = Vec::with_capacity(states.len());
    let mut worst: f64 = 0.0;
    for s in &states {
        let spin = eigenvalue_from_product(&t0.mul_vec(&s.vector), &s.vector)
            .ok()
            .map(|l0| reduce_spin(-(length as f64) * l0.arg() / (2.0 * PI), length as f64));
        worst = worst.max(s.eig_residual);
        rows.push(json!({"sector": s.sector, "energy": s.energy, "spin": spin, "eig_residual": s.eig_residual}));
    }
    Ok(Report {
        pass: worst < 1e-7,
        summary: format!(
            "spectrum {v} L={length}: {} states, E0 = {:.8}, max eigen-residual {worst:.1e}",
            states.len(),
            states.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min)
        ),
        body: json!({"schema_version": 1, "variant": v, "n": 3, "L": length, "states": rows}),
    })
}

fn parse_sector(s: &str) -> Result<Sector, Error> {
    match s {
        "0" | "1" | "2" => Ok(Sector::Q(s.parse().expect("digit"))),
        "+1" | "+" => Ok(Sector::Nu(1)),
        "-1" | "-" => Ok(Sector::Nu(-1)),
        _ => Err(Error::Argument(format!("unknown sector '{s}' (use 0, 1, 2, +1 or -1)"))),
    }
}

fn bethe(v: Variant, length: usize, sector: Option<Sector>) -> Result<Report, Error> {
    let solution = solve_chain(v, length)?;
    let selected: Vec<_> = solution
        .states
        .iter()
        .filter(|s| sector.is_none_or(|q| s.sector == q))
        .collect();
    if selected.is_empty() {
        return Err(Error::Argument(format!("the {v} chain has no states in the requested sector")));
    }
    let records: Vec<_> = selected.iter().filter_map(|s| s.record(v, length)).collect();
    let failures: Vec<Value> = selected
        .iter()
        .filter(|s| !s.accepted())
        .map(|s| json!({"sector": s.sector, "energy": s.energy, "reason": s.failure}))
        .collect();
    let doc = SpectrumDocument::new(v, 3, length, &records);
    let mut body = to_value(&doc)?;
    if !failures.is_empty() {
        body["failures"] = Value::Array(failures.clone());
    }
    Ok(Report {
        pass: failures.is_empty(),
        summary: format!("bethe {v} L={length}: {}/{} states solved", records.len(), selected.len()),
        body,
    })
}

fn tables_check(id: &str) -> Result<Report, Error> {
    let id: TableId = id.parse()?;
    let report = reproduce_table(id)?;
    Ok(Report {
        pass: report.all_pass(),
        summary: report.to_string(),
        body: to_value(&report)?,
    })
}

fn completeness(v: Variant, length: usize) -> Result<Report, Error> {
    let report = completeness_report(v, length)?;
    Ok(Report {
        pass: report.complete(),
        summary: report.to_string(),
        body: to_value(&report)?,
    })
}

fn zn_build(n: usize, twist: &str, length: usize, verify: bool, seed: u64) -> Result<Report, Error> {
    let v = match twist {
        "conj" => Variant::ZnConj,
        l => Variant::ZnTwist(
            l.parse()
                .map_err(|_| Error::Argument(format!("twist must be an integer power or 'conj', got '{l}'")))?,
        ),
    };
    let bundle = named_hamiltonian(v, length, n)?;
    let mut body = json!({
        "n": n,
        "L": length,
        "variant": v.to_string(),
        "seam": bundle.seam.label.to_string(),
        "dim": bundle.matrix.rows(),
    });
    let mut summary = format!("zn {v} n={n} L={length}: dim {}", bundle.matrix.rows());
    let mut pass = true;
    if verify {
        let spec = ChainSpec::new(v, length, n)?;
        let hermiticity = bundle.matrix.hermiticity_defect();
        let charges = bundle.max_charge_commutator();
        let fit = affine_fit(&bundle.matrix, &log_derivative_at_zero(&spec)?)?;
        let wf = spec.weights();
        let seam: &Seam = &bundle.seam;
        let mut seam_worst: f64 = 0.0;
        for (x, y) in rng::uniform_pairs(&mut rng::seeded(seed), 0.02, PI / (2.0 * n as f64) - 0.02, 5) {
            seam_worst = seam_worst.max(seam_residual(&wf, &seam.matrix, Complex64::new(x, 0.0), Complex64::new(y, 0.0))?);
        }
        pass = hermiticity < 1e-12 && charges < 1e-10 && fit.residual < 1e-8 && seam_worst < 1e-10;
        body["verification"] = json!({
            "hermiticity_defect": hermiticity,
            "charge_commutator": charges,
            "limit_fit_residual": fit.residual,
            "limit_fit_scale": [fit.scale.re, fit.scale.im],
            "limit_fit_shift": [fit.shift.re, fit.shift.im],
            "seam_residual": seam_worst,
        });
        summary += &format!(
            "; hermiticity {hermiticity:.1e}, charges {charges:.1e}, −T'T⁻¹ fit {:.1e}, seam {seam_worst:.1e}",
            fit.residual
        );
    }
    Ok(Report { pass, summary, body })
}

fn run(cli: &Cli) -> Result<Report, Error> {
    match &cli.command {
        Command::Verify(Verify::Ybe { n, samples, seed, tol }) => verify_ybe(*n, *samples, *seed, *tol),
        Command::Verify(Verify::Seams { n, trials, seed }) => verify_seams(*n, *trials, *seed),
        Command::Verify(Verify::Functional { variant, length, samples, seed, tol }) => {
            verify_functional(*variant, *length, *samples, *seed, *tol)
        }
        Command::Verify(Verify::Shift { variant: v, length, tol }) => verify_shift(variant(v)?, *length, *tol),
        Command::Verify(Verify::Equivalence { pair, length, tol }) => verify_equivalence(*pair, *length, *tol),
        Command::Spectrum(a) => spectrum(variant(&a.variant)?, a.length),
        Command::Bethe(a) => {
            let sector = a.sector.as_deref().map(parse_sector).transpose()?;
            bethe(variant(&a.chain.variant)?, a.chain.length, sector)
        }
        Command::Tables(Tables::Check { id }) => tables_check(id),
        Command::Completeness(a) => completeness(variant(&a.variant)?, a.length),
        Command::Zn(Zn::Build { n, twist, length, verify, seed }) => zn_build(*n, twist, *length, *verify, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_argument_error() { 2 } else { 3 });
        }
    };
    if let Some(path) = &cli.out {
        let text = match serde_json::to_string_pretty(&report.body) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        };
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    println!("{} {}", if report.pass { "PASS" } else { "FAIL" }, report.summary);
    ExitCode::from(if report.pass { 0 } else { 1 })
}
