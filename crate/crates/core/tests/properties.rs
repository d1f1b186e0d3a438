use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use potts_toroidal::algebra::{global_charge, site_algebra, ChargeKind};
use potts_toroidal::bethe::{bethe_residual, canonical_root, canonicalize_roots, reduce_spin, BetheSystem};
use potts_toroidal::harness::{bethe_kind, solve_chain, SpectralRecord, SpectrumDocument, Source, ACCEPT_RESIDUAL};
use potts_toroidal::spectra::Sector;
use potts_toroidal::transfer::{ChainSpec, Variant};
use potts_toroidal::weights::{Edge, WeightFamily};

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

fn sector() -> impl Strategy<Value = Sector> {
    prop_oneof![(0u8..3).prop_map(Sector::Q), prop_oneof![Just(-1i8), Just(1i8)].prop_map(Sector::Nu)]
}

fn record() -> impl Strategy<Value = SpectralRecord> {
    (
        sector(),
        finite(),
        finite(),
        prop::collection::vec((finite(), finite()), 0..7),
        finite(),
        finite(),
        -1i32..=1,
    )
        .prop_map(|(sector, energy, spin, roots, bethe_residual, eig_residual, mu)| SpectralRecord {
            variant: Variant::Z3Plus,
            length: 3,
            sector,
            energy,
            spin,
            roots: roots.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
            bethe_residual,
            eig_residual,
            mu,
            source: Source::Computed,
        })
}

fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a == 0.0 && b == 0.0 && a.is_sign_negative() == b.is_sign_negative())
}

proptest! {
    #[test]
    fn spectrum_json_round_trips_bit_exactly(records in prop::collection::vec(record(), 0..5)) {
        let doc = SpectrumDocument::new(Variant::Z3Plus, 3, 3, &records);
        let back = SpectrumDocument::from_json(&doc.to_json().unwrap()).unwrap();
        let parsed = back.records();
        prop_assert_eq!(parsed.len(), records.len());
        for (a, b) in records.iter().zip(&parsed) {
            prop_assert_eq!(a.sector, b.sector);
            prop_assert_eq!(a.mu, b.mu);
            for (x, y) in [(a.energy, b.energy), (a.spin, b.spin), (a.bethe_residual, b.bethe_residual), (a.eig_residual, b.eig_residual)] {
                prop_assert!(same_bits(x, y), "{} != {}", x, y);
            }
            prop_assert_eq!(a.roots.len(), b.roots.len());
            for (z, w) in a.roots.iter().zip(&b.roots) {
                prop_assert!(same_bits(z.re, w.re) && same_bits(z.im, w.im));
            }
        }
    }

    #[test]
    fn canonicalization_is_idempotent(roots in prop::collection::vec((-2.0..2.0f64, -12.0..12.0f64), 1..8)) {
        let roots: Vec<Complex64> = roots.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let once = canonicalize_roots(&roots);
        prop_assert_eq!(canonicalize_roots(&once), once.clone());
        for z in &once {
            prop_assert!(z.im > -PI / 2.0 && z.im <= PI / 2.0 + 1e-12);
            prop_assert_eq!(canonical_root(*z), *z);
        }
    }

    #[test]
    fn spin_reduction_stays_in_window(s in -50.0..50.0f64, period in 1usize..8) {
        let p = period as f64;
        let r = reduce_spin(s, p);
        prop_assert!(r > -p / 2.0 && r <= p / 2.0 + 1e-12);
        let k = (s - r) / p;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn fz3_weights_equal_potts_weights(x in -0.45..0.45f64) {
        let fz = WeightFamily::fateev_zamolodchikov(3).unwrap();
        let potts = WeightFamily::potts3();
        for edge in [Edge::Horizontal, Edge::Vertical] {
            let a = fz.table(edge, Complex64::new(x, 0.0)).unwrap();
            let b = potts.table(edge, Complex64::new(x, 0.0)).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn site_algebra_relations(n in 2usize..7) {
        let alg = site_algebra(n).unwrap();
        let id = potts_toroidal::ComplexMatrix::identity(n);
        prop_assert!(alg.z.pow(n as u32).max_abs_diff(&id) < 1e-13);
        prop_assert!(alg.x.pow(n as u32).max_abs_diff(&id) < 1e-13);
        prop_assert!((&alg.z * &alg.x).max_abs_diff(&(&alg.x * &alg.z).scale(alg.omega)) < 1e-13);
        prop_assert!((&alg.c * &alg.c).max_abs_diff(&id) < 1e-13);
        prop_assert!((&(&alg.c * &alg.z) * &alg.c).max_abs_diff(&alg.z.adjoint()) < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transfer_matrices_commute(x1 in -0.4..0.4f64, x2 in -0.4..0.4f64, pick in 0usize..4, length in 2usize..4) {
        let variant = [Variant::Periodic, Variant::Z3Plus, Variant::Z3Minus, Variant::Conj][pick];
        let spec = ChainSpec::potts(variant, length).unwrap();
        let a = spec.transfer(Complex64::new(x1, 0.0)).unwrap();
        let b = spec.transfer(Complex64::new(x2, 0.0)).unwrap();
        let scale = a.max_abs() * b.max_abs();
        prop_assert!(a.commutator(&b).max_abs() < 1e-11 * scale.max(1.0));
        let kind = if variant == Variant::Conj { ChargeKind::Z2 } else { ChargeKind::Z3 };
        let charge = global_charge(kind, length, 3).unwrap();
        prop_assert!(a.commutator(&charge).max_abs() < 1e-12 * a.max_abs().max(1.0));
    }
}

#[test]
fn perturbed_roots_are_never_accepted() {
    for (variant, length) in [(Variant::Z3Plus, 2), (Variant::Conj, 2), (Variant::Z3Plus, 3), (Variant::Conj, 3), (Variant::Periodic, 3)] {
        let solution = solve_chain(variant, length).unwrap();
        let kind = bethe_kind(variant).unwrap();
        for r in solution.records() {
            let sys = BetheSystem::new(kind, length, r.sector).unwrap();
            for j in 0..r.roots.len() {
                for shift in [Complex64::new(1e-6, 0.0), Complex64::new(0.0, 1e-6)] {
                    let mut moved = r.roots.clone();
                    moved[j] += shift;
                    let res = bethe_residual(&sys, &moved).unwrap();
                    assert!(res > 100.0 * ACCEPT_RESIDUAL, "{variant} L={length} {} root {j}: {res:.2e}", r.sector);
                }
            }
        }
    }
}

#[test]
fn accepted_root_sets_are_closed_under_conjugation() {
    for (variant, length) in [(Variant::Z3Plus, 3), (Variant::Conj, 3), (Variant::Periodic, 3)] {
        for r in solve_chain(variant, length).unwrap().records() {
            let conj: Vec<Complex64> = r.roots.iter().map(|z| z.conj()).collect();
            let d = potts_toroidal::bethe::root_multiset_distance(&r.roots, &canonicalize_roots(&conj));
            assert!(d < 1e-8, "{variant} {} E={}: {d:.2e}", r.sector, r.energy);
        }
    }
}
