mod common;

use common::{ci_ground, ci_spectrum, fixtures_dir, hf_energy, load, manifest};
use qsceom_core::chem_io::{freeze_core, parse_fcidump, read_fcidump, to_spin_orbitals, write_fcidump};
use qsceom_core::operator_algebra::build_qubit_hamiltonian;
use qsceom_core::oracles::fci_sector_spectrum;

#[test]
fn every_fixture_reproduces_its_manifest_energies() {
    let m = manifest();
    assert!(!m.fixtures.is_empty());
    for e in &m.fixtures {
        let mi = read_fcidump(fixtures_dir().join(&e.path)).unwrap();
        mi.check_symmetry(1e-12).unwrap();
        let tag = format!("{}/{}", e.molecule, e.tag);
        let hf = hf_energy(&mi);
        assert!((hf - e.scf_energy).abs() < 1e-8, "{tag}: HF {hf} vs SCF {}", e.scf_energy);
        if let Some(fci) = e.fci_energy {
            let ci = ci_ground(&mi);
            assert!((ci - fci).abs() < 1e-8, "{tag}: CI {ci} vs manifest {fci}");
        }
        if e.n_frozen > 0 {
            let fc = freeze_core(&mi, e.n_frozen).unwrap();
            assert!((hf_energy(&fc) - e.scf_energy).abs() < 1e-8, "{tag}: frozen-core HF energy changed");
            if let Some(fci) = e.frozen_core_fci_energy {
                let ci = ci_ground(&fc);
                assert!((ci - fci).abs() < 1e-8, "{tag}: frozen-core CI {ci} vs manifest {fci}");
            }
        }
    }
}

#[test]
fn qubit_hamiltonian_spectra_match_determinant_ci() {
    for (mol, tag, frozen) in [("h2", "r1.25", 0), ("h4", "b1.50_d1.50", 0), ("lih", "r1.50", 1)] {
        let mi = freeze_core(&load(mol, tag), frozen).unwrap();
        let h = build_qubit_hamiltonian(&to_spin_orbitals(&mi));
        let n = mi.n_electrons;
        for (n_alpha, n_beta) in [(n / 2, n / 2), (n / 2, n / 2 - 1), (n / 2 + 1, n / 2), (n / 2 + 1, n / 2 - 1)] {
            let reference = ci_spectrum(&mi, n_alpha, n_beta);
            let sz2 = n_alpha as i32 - n_beta as i32;
            let got = fci_sector_spectrum(&h, n_alpha + n_beta, Some(sz2)).unwrap().eigenvalues;
            assert_eq!(got.len(), reference.len(), "{mol}/{tag} ({n_alpha},{n_beta})");
            for (a, b) in got.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-9, "{mol}/{tag} ({n_alpha},{n_beta}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn fcidump_round_trip_preserves_integrals() {
    let mi = load("h2o", "r1.00");
    let back = parse_fcidump(&write_fcidump(&mi)).unwrap();
    assert_eq!(back.n_spatial, mi.n_spatial);
    assert_eq!(back.n_electrons, mi.n_electrons);
    assert!((ci_ground(&back) - ci_ground(&mi)).abs() < 1e-12);
}

#[test]
fn manifest_entries_point_to_existing_files() {
    for e in &manifest().fixtures {
        assert!(fixtures_dir().join(&e.path).is_file(), "{} missing", e.path);
        assert_eq!(e.basis, "STO-3G");
    }
}

#[test]
fn spin_orbital_coefficients_are_antisymmetric_and_match_spatial_integrals() {
    let mi = freeze_core(&load("lih", "r1.25"), 1).unwrap();
    let so = to_spin_orbitals(&mi);
    let n = so.n_so;
    let delta = |a: usize, b: usize| if a % 2 == b % 2 { 1.0 } else { 0.0 };
    // <pq|rs> in physicist notation from chemist (pr|qs) with spin deltas.
    let phys = |p: usize, q: usize, r: usize, s: usize| delta(p, r) * delta(q, s) * mi.eri(p / 2, r / 2, q / 2, s / 2);
    for p in 0..n {
        for q in 0..n {
            assert!((so.h(p, q) - delta(p, q) * mi.h1(p / 2, q / 2)).abs() < 1e-14);
            for r in 0..n {
                for s in 0..n {
                    let v = so.v(p, q, r, s);
                    assert!((v - (phys(p, q, r, s) - phys(p, q, s, r))).abs() < 1e-14);
                    assert!((v + so.v(q, p, r, s)).abs() < 1e-14);
                    assert!((v + so.v(p, q, s, r)).abs() < 1e-14);
                    assert!((v - so.v(q, p, s, r)).abs() < 1e-14);
                    assert!((v - so.v(r, s, p, q)).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn qubit_hamiltonians_are_hermitian() {
    for e in manifest().fixtures.iter().filter(|e| e.molecule != "h2o") {
        let mi = freeze_core(&load(&e.molecule, &e.tag), e.n_frozen).unwrap();
        assert!(build_qubit_hamiltonian(&to_spin_orbitals(&mi)).is_hermitian(1e-12), "{}/{}", e.molecule, e.tag);
    }
}
