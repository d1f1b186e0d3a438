//! Acceptance suite: every criterion runs, prints one PASS/FAIL line with the
//! measured quantities, and the binary exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use potts_toroidal::bethe::{
    bethe_residual, canonical_root, canonicalize_roots, energy_from_roots, reduce_spin, spin_from_roots,
    BetheKind, BetheSystem,
};
use potts_toroidal::harness::{
    completeness_report, h2_weight_partition_check, reproduce_table, solve_chain, spin_distance, TableId,
    TableReport,
};
use potts_toroidal::lattice::{contains_seam, discover_seams, seam_residual, ybe_residual, Seam};
use potts_toroidal::rng;
use potts_toroidal::spectra::{resolve_sectors, sector_sizes, Sector};
use potts_toroidal::transfer::{
    affine_fit, functional_identity_residual, functional_identity_residual_with_sign, log_derivative_at_zero,
    named_hamiltonian, sector_equivalence_check, shift_relations_check, similarity_spectral_check, ChainSpec,
    EquivalencePair, FunctionalIdentity, Variant,
};
use potts_toroidal::weights::{Edge, WeightFamily};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ground_energy(report: &TableReport, target: f64) -> Result<f64, String> {
    let variant = match report.id {
        TableId::T1 | TableId::TA => Variant::Z3Plus,
        TableId::T2 | TableId::TB => Variant::Conj,
    };
    let length = if matches!(report.id, TableId::T1 | TableId::T2) { 2 } else { 3 };
    let h = named_hamiltonian(variant, length, 3).map_err(|e| e.to_string())?;
    let states = resolve_sectors(&ChainSpec::potts(variant, length).unwrap(), &h.matrix).map_err(|e| e.to_string())?;
    let e0 = states.iter().map(|s| s.energy).fold(f64::INFINITY, f64::min);
    Ok((e0 - target).abs())
}

fn failing_rows(report: &TableReport) -> String {
    report
        .rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            format!(
                " [row {} {} E={} root_err={:.2e} (mod iπ/2: {:.2e}) spin_err={:.2e}]",
                r.index, r.sector, r.energy, r.root_error, r.root_error_mod_half_period, r.spin_error
            )
        })
        .collect()
}

fn table_line(report: &TableReport, elapsed: Duration) -> String {
    format!(
        "{report}, max |E_bethe − E_exact| = {:.1e}, {:.2?}{}",
        report.max_energy_gap,
        elapsed,
        failing_rows(report)
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = reproduce_table(TableId::T1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let solution = solve_chain(Variant::Z3Plus, 2).map_err(|e| e.to_string())?;
    let allowed = [0.0, 1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, 1.0];
    let spins_ok = solution.records().iter().all(|r| allowed.iter().any(|&s| spin_distance(r.spin, s, 2) < 1e-6));
    check(
        report.all_pass() && report.max_energy_gap < 1e-7 && spins_ok && elapsed < Duration::from_secs(10),
        format!("{}, spins in {{0, ±1/3, ±2/3, 1}} mod 2: {spins_ok}", table_line(&report, elapsed)),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let report = reproduce_table(TableId::T2).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ground = ground_energy(&report, -5.77350269)?;
    let solution = solve_chain(Variant::Conj, 2).map_err(|e| e.to_string())?;
    let mut doublet: Vec<f64> = solution
        .records()
        .iter()
        .filter(|r| r.sector == Sector::Nu(-1) && (r.energy + 1.67372658).abs() < 1e-7)
        .map(|r| r.spin)
        .collect();
    doublet.sort_by(f64::total_cmp);
    let doublet_ok = doublet.len() == 2 && (doublet[0] + 0.5).abs() < 1e-6 && (doublet[1] - 0.5).abs() < 1e-6;
    check(
        report.all_pass() && report.max_energy_gap < 1e-7 && ground < 1e-7 && doublet_ok,
        format!(
            "{}, ground-state error {ground:.1e}, nu=-1 doublet spins {doublet:?}",
            table_line(&report, elapsed)
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let report = reproduce_table(TableId::TA).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ground = ground_energy(&report, -7.99554373)?;
    let reflected = report.rows.iter().filter(|r| r.reflected).count();
    check(
        report.all_pass() && report.rows.len() == 27 && reflected == 9 && report.max_energy_gap < 1e-7 && ground < 1e-7,
        format!(
            "{} ({reflected} reflected Q=2 rows), ground-state error {ground:.1e}",
            table_line(&report, elapsed)
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let report = reproduce_table(TableId::TB).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ground = ground_energy(&report, -8.53674848)?;
    check(
        report.all_pass() && report.rows.len() == 27 && report.max_energy_gap < 1e-7 && ground < 1e-7,
        format!("{}, ground-state error {ground:.1e}", table_line(&report, elapsed)),
    )
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for variant in [Variant::Z3Plus, Variant::Conj, Variant::Periodic] {
        for length in [2, 3] {
            let report = completeness_report(variant, length).map_err(|e| e.to_string())?;
            ok &= report.complete();
            lines.push(report.to_string());
        }
    }
    check(ok, lines.join(" | "))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for n in [3, 4, 5] {
        let wf = WeightFamily::fateev_zamolodchikov(n).map_err(|e| e.to_string())?;
        let hi = PI / (2.0 * n as f64) - 0.02;
        let pairs = rng::uniform_pairs(&mut rng::seeded(20 + n as u64), 0.02, hi, 20);
        let mut max_n: f64 = 0.0;
        for (x, y) in pairs {
            max_n = max_n.max(ybe_residual(&wf, c(x), c(y)).map_err(|e| e.to_string())?);
        }
        worst = worst.max(max_n);
        details.push(format!("n={n}: {max_n:.1e}"));
    }
    let fz3 = WeightFamily::fateev_zamolodchikov(3).map_err(|e| e.to_string())?;
    let potts = WeightFamily::potts3();
    let mut pointwise: f64 = 0.0;
    for x in rng::uniform_samples(&mut rng::seeded(6), -0.4, 0.4, 20) {
        for edge in [Edge::Horizontal, Edge::Vertical] {
            let a = fz3.table(edge, c(x)).map_err(|e| e.to_string())?;
            let b = potts.table(edge, c(x)).map_err(|e| e.to_string())?;
            pointwise = pointwise.max(a.max_abs_diff(&b));
        }
    }
    check(
        worst < 1e-12 && pointwise < 1e-12,
        format!(
            "max YBE residual over 20 seeded pairs {} ; FZ(3) vs Potts weights {pointwise:.1e}",
            details.join(", ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let s3 = discover_seams(&WeightFamily::potts3(), 3, 7).map_err(|e| e.to_string())?;
    let mut labels: Vec<String> = s3.seams.iter().map(|s| s.label.to_string()).collect();
    labels.sort();
    let named = [
        Seam::identity(3),
        Seam::g_plus(3).unwrap(),
        Seam::g_minus(3).unwrap(),
        Seam::g_conj(3).unwrap(),
    ];
    let s3_ok = s3.seams.len() == 6
        && s3.closed_under_products
        && s3.unrecognized.is_empty()
        && s3.commutant_dim == s3.seam_span_dim
        && named.iter().all(|g| contains_seam(&s3.seams, &g.matrix))
        && s3.max_certification_residual < 1e-10;

    let wf4 = WeightFamily::fateev_zamolodchikov(4).map_err(|e| e.to_string())?;
    let z4 = discover_seams(&wf4, 3, 7).map_err(|e| e.to_string())?;
    let mut wanted: Vec<Seam> = (1..=3).map(|l| Seam::z_twist(4, l).unwrap()).collect();
    wanted.push(Seam::g_conj(4).unwrap());
    let pairs = rng::uniform_pairs(&mut rng::seeded(44), 0.02, PI / 8.0 - 0.02, 5);
    let mut cert: f64 = 0.0;
    for g in &wanted {
        for &(x, y) in &pairs {
            cert = cert.max(seam_residual(&wf4, &g.matrix, c(x), c(y)).map_err(|e| e.to_string())?);
        }
    }
    let z4_ok = wanted.iter().all(|g| contains_seam(&z4.seams, &g.matrix)) && cert < 1e-10;
    check(
        s3_ok && z4_ok,
        format!(
            "n=3: {} seams {labels:?}, commutant dim {} = span dim {}, closed {}, cert {:.1e}; \
             n=4: {} seams found, X^3, X^2, X, C certified at {cert:.1e}",
            s3.seams.len(),
            s3.commutant_dim,
            s3.seam_span_dim,
            s3.closed_under_products,
            s3.max_certification_residual,
            z4.seams.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let xs = rng::uniform_samples(&mut rng::seeded(8), 0.35, 0.5, 20);
    let mut worst: f64 = 0.0;
    // Per identity and length: the largest wrong-sign residual on the samples.
    let mut controls = Vec::new();
    // Smallest ratio wrong-sign / correct-sign residual over every sample.
    let mut separation = f64::INFINITY;
    for identity in [FunctionalIdentity::Z3Plus, FunctionalIdentity::Conj] {
        for length in [2, 3] {
            let mut control: f64 = 0.0;
            for &x in &xs {
                let right = functional_identity_residual(identity, length, x).map_err(|e| e.to_string())?;
                let wrong = functional_identity_residual_with_sign(identity, length, x, -identity.sign())
                    .map_err(|e| e.to_string())?;
                worst = worst.max(right);
                control = control.max(wrong);
                separation = separation.min(wrong / right.max(f64::MIN_POSITIVE));
            }
            controls.push(control);
        }
    }
    let control_min = controls.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        worst < 1e-9 && control_min > 1e-3 && separation > 1e3,
        format!(
            "max residual {worst:.1e} over 2 identities x L=2,3 x 20 x; wrong-sign control per identity and L \
             {}; wrong/right ratio at every sample >= {separation:.1e}",
            controls.iter().map(|c| format!("{c:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut fit_worst: f64 = 0.0;
    for variant in [Variant::Periodic, Variant::Z3Plus, Variant::Z3Minus, Variant::Conj] {
        for length in 2..=4 {
            let spec = ChainSpec::potts(variant, length).map_err(|e| e.to_string())?;
            let limit = log_derivative_at_zero(&spec).map_err(|e| e.to_string())?;
            let named = named_hamiltonian(variant, length, 3).map_err(|e| e.to_string())?;
            let fit = affine_fit(&named.matrix, &limit).map_err(|e| e.to_string())?;
            fit_worst = fit_worst.max(fit.residual);
        }
    }
    let wf = WeightFamily::potts3();
    let seams = [
        Seam::identity(3),
        Seam::g_plus(3).unwrap(),
        Seam::g_minus(3).unwrap(),
        Seam::g_conj(3).unwrap(),
    ];
    let mut shift_worst: f64 = 0.0;
    for seam in &seams {
        for length in 2..=4 {
            shift_worst = shift_worst.max(shift_relations_check(&wf, seam, length).map_err(|e| e.to_string())?.max_residual);
        }
    }
    check(
        fit_worst < 1e-8 && shift_worst < 1e-10,
        format!(
            "affine-calibrated −T'(0)T(0)⁻¹ vs named chains (4 variants, L=2..4): {fit_worst:.1e}; \
             shift relations (4 seams, L=2..4): {shift_worst:.1e}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let cases = [
        (EquivalencePair::H1VsTwisted, 3, Variant::Periodic),
        (EquivalencePair::H1VsTwisted, 6, Variant::Periodic),
        (EquivalencePair::H1VsTwisted, 4, Variant::Z3Plus),
        (EquivalencePair::H1VsTwisted, 5, Variant::Z3Minus),
        (EquivalencePair::H2VsParity, 2, Variant::Periodic),
        (EquivalencePair::H2VsParity, 4, Variant::Periodic),
        (EquivalencePair::H2VsParity, 3, Variant::Conj),
        (EquivalencePair::H2VsParity, 5, Variant::Conj),
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (pair, length, reference) in cases {
        let report = similarity_spectral_check(pair, length).map_err(|e| e.to_string())?;
        ok &= report.reference == reference && report.spectrum_deviation < 1e-10;
        worst = worst.max(report.spectrum_deviation);
    }
    let elapsed = start.elapsed();
    check(
        ok && elapsed < Duration::from_secs(300),
        format!("8 cases, max sorted-spectrum deviation {worst:.1e}, {elapsed:.2?}"),
    )
}

fn criterion_11() -> Outcome {
    let sizes = |variant: Variant, length: usize| -> Result<Vec<(Sector, usize)>, String> {
        let h = named_hamiltonian(variant, length, 3).map_err(|e| e.to_string())?;
        let states =
            resolve_sectors(&ChainSpec::potts(variant, length).unwrap(), &h.matrix).map_err(|e| e.to_string())?;
        Ok(sector_sizes(&states))
    };
    let z3 = sizes(Variant::Z3Plus, 2)?;
    let z2_l2 = sizes(Variant::Conj, 2)?;
    let z2_l3 = sizes(Variant::Conj, 3)?;
    let sizes_ok = z3 == vec![(Sector::Q(0), 3), (Sector::Q(1), 3), (Sector::Q(2), 3)]
        && z2_l2 == vec![(Sector::Nu(-1), 4), (Sector::Nu(1), 5)]
        && z2_l3 == vec![(Sector::Nu(-1), 13), (Sector::Nu(1), 14)];
    let mut worst: f64 = 0.0;
    for length in 2..=3 {
        for x in [0.13, 0.37] {
            let report = sector_equivalence_check(length, x).map_err(|e| e.to_string())?;
            worst = report
                .pairs
                .iter()
                .map(|p| p.2)
                .fold(worst.max(report.conjugate_spectrum_deviation), f64::max);
        }
    }
    check(
        sizes_ok && worst < 1e-10,
        format!(
            "Z(3) sizes L=2 {z3:?}; Z(2) sizes L=2 {z2_l2:?}, L=3 {z2_l3:?}; \
             Spec[T+]_Q = Spec[T-]_-Q and conjugate spectra (L=2,3): {worst:.1e}"
        ),
    )
}

fn criterion_12() -> Outcome {
    let mut momentum: f64 = 0.0;
    let mut energy: f64 = 0.0;
    let mut states = 0;
    let mut missing = 0;
    for variant in [Variant::Z3Plus, Variant::Conj, Variant::Periodic] {
        for length in [2, 3] {
            let solution = solve_chain(variant, length).map_err(|e| e.to_string())?;
            for s in &solution.states {
                states += 1;
                match (s.momentum_mismatch(length), s.form_energy_mismatch()) {
                    (Some(m), Some(e)) => {
                        momentum = momentum.max(m);
                        energy = energy.max(e);
                    }
                    _ => missing += 1,
                }
            }
        }
    }
    check(
        missing == 0 && momentum < 1e-7 && energy < 1e-7,
        format!(
            "{states} states: max |exp(−2πi s/L) − Λ(0)| = {momentum:.1e}, \
             max |−Λ'(0)/Λ(0) − 4L/√3 − E| = {energy:.1e}, unchecked {missing}"
        ),
    )
}

fn criterion_13() -> Outcome {
    // Conjugate reflection of the Q=1 root sets.
    let mut reflection: f64 = 0.0;
    let mut reflected_states = 0;
    for length in [2, 3] {
        let solution = solve_chain(Variant::Z3Plus, length).map_err(|e| e.to_string())?;
        let sys2 = BetheSystem::new(BetheKind::Z3, length, Sector::Q(2)).unwrap();
        let q2: Vec<_> = solution.records().into_iter().filter(|r| r.sector == Sector::Q(2)).collect();
        for r in solution.records().iter().filter(|r| r.sector == Sector::Q(1)) {
            let mirrored: Vec<Complex64> = canonicalize_roots(&r.roots.iter().map(|z| -z).collect::<Vec<_>>());
            let res = bethe_residual(&sys2, &mirrored).map_err(|e| e.to_string())?;
            let e = energy_from_roots(&sys2, &mirrored).map_err(|e| e.to_string())?;
            let s = spin_from_roots(&sys2, &mirrored).map_err(|e| e.to_string())?;
            let partner = q2
                .iter()
                .map(|p| (p.energy - e).abs().max(spin_distance(p.spin, s, length)))
                .fold(f64::INFINITY, f64::min);
            reflection = reflection
                .max(res)
                .max((e - r.energy).abs())
                .max(spin_distance(s, -r.spin, length))
                .max(partner);
            reflected_states += 1;
        }
    }

    // Strip canonicalization is idempotent and only moves roots by iπ.
    let mut runner = TestRunner::new(Config {
        cases: 512,
        failure_persistence: None,
        ..Config::default()
    });
    let strip = runner.run(&(-3.0..3.0f64, -20.0..20.0f64), |(re, im)| {
        let z = Complex64::new(re, im);
        let once = canonical_root(z);
        prop_assert_eq!(canonical_root(once), once);
        prop_assert!(once.im > -PI / 2.0 && once.im <= PI / 2.0 + 1e-12);
        let k = (z.im - once.im) / PI;
        prop_assert!((k - k.round()).abs() < 1e-9);
        prop_assert!((reduce_spin(re * 7.0, 3.0) - reduce_spin(reduce_spin(re * 7.0, 3.0), 3.0)).abs() < 1e-12);
        Ok(())
    });

    let partition = h2_weight_partition_check().map_err(|e| e.to_string())?;
    check(
        reflection < 1e-9 && strip.is_ok() && partition.pass(),
        format!(
            "reflection Q=1 -> Q=2 over {reflected_states} states: {reflection:.1e}; strip idempotence (512 cases): {}; \
             Kac partition: even {} odd {} ({} distinct non-trivial weights)",
            if strip.is_ok() { "ok".to_string() } else { format!("{strip:?}") },
            partition.even_matches,
            partition.odd_matches,
            partition.distinct_union
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("t1_L2_plus reproduction (L=2, twisted)", criterion_1),
        ("t2_L2_conj reproduction (L=2, conjugation)", criterion_2),
        ("tA_L3_plus reproduction (L=3, twisted)", criterion_3),
        ("tB_L3_conj reproduction (L=3, conjugation)", criterion_4),
        ("Completeness and root-count census", criterion_5),
        ("Yang-Baxter relation", criterion_6),
        ("Seam discovery", criterion_7),
        ("Functional identities", criterion_8),
        ("Hamiltonian-limit consistency", criterion_9),
        ("Bulk-seam spectral equivalences", criterion_10),
        ("Sector structure", criterion_11),
        ("Momentum and energy oracles", criterion_12),
        ("Property suite", criterion_13),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {:>2} {name}: {detail} ({elapsed:.2?})", k + 1),
            Err(detail) => {
                println!("[FAIL] criterion {:>2} {name}: {detail} ({elapsed:.2?})", k + 1);
                failed.push(k + 1);
            }
        }
    }
    println!("\nacceptance: {}/{} criteria pass", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
