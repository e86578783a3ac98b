mod common;

use common::{apply, ci_matrix, hf_energy, load};
use num_complex::Complex64;
use proptest::prelude::*;

use qsceom_core::chem_io::{freeze_core, to_spin_orbitals, MolecularIntegrals};
use qsceom_core::eom::{
    build_m_circuit_path, build_m_direct, build_qeom, build_qse, excited_determinants, solve_paired_geneig,
    solve_qse, solve_qsceom, CircuitPathOptions, OperatorDressing, PairPreparation, CANONICAL_THRESHOLD,
};
use qsceom_core::ground_state::{
    adapt_vqe, build_gsd_pool, reference_mask, AdaptOptions, AnsatzCircuit, GroundStateResult, VqeOptions,
};
use qsceom_core::linalg::{hermiticity_error, CMatrix};
use qsceom_core::manifolds::{enumerate_manifold, Manifold, Sector};
use qsceom_core::operator_algebra::{build_qubit_hamiltonian, PauliSum};
use qsceom_core::oracles::fci_sector_spectrum;
use qsceom_core::statevector::{CompiledOperator, Statevector};

struct System {
    mi: MolecularIntegrals,
    pauli: PauliSum,
    h: CompiledOperator,
    reference: Statevector,
}

fn system(mol: &str, tag: &str, frozen: usize) -> System {
    let mi = freeze_core(&load(mol, tag), frozen).unwrap();
    let pauli = build_qubit_hamiltonian(&to_spin_orbitals(&mi));
    let h = CompiledOperator::new(&pauli).unwrap();
    let reference = Statevector::basis_state(reference_mask(mi.n_electrons, 0).unwrap(), 2 * mi.n_spatial).unwrap();
    System { mi, pauli, h, reference }
}

fn manifold(s: &System, sector: Sector, sz2: Option<i32>) -> Manifold {
    let n = s.mi.n_electrons;
    enumerate_manifold(sector, n, 2 * s.mi.n_spatial - n, sz2).unwrap()
}

fn exact_gs(s: &System) -> GroundStateResult {
    let opts = AdaptOptions { grad_threshold: 1e-8, vqe: VqeOptions { gtol: 1e-12, ..Default::default() }, ..Default::default() };
    adapt_vqe(&s.h, &s.reference, &build_gsd_pool(2 * s.mi.n_spatial), opts).unwrap()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// Determinant and sign reached by an excitation, using the oracle's own
/// ladder algebra.
fn oracle_determinant(reference: u64, ex: &qsceom_core::operator_algebra::FermionExcitation) -> (f64, u64) {
    let ops: Vec<(bool, usize)> = ex
        .creators
        .iter()
        .map(|&k| (true, k))
        .chain(ex.annihilators.iter().map(|&k| (false, k)))
        .collect();
    apply(&ops, reference).expect("excitation acts on the reference")
}

#[test]
fn identity_ansatz_gives_the_determinant_hamiltonian_block() {
    for (mol, tag, frozen) in [("h4", "b1.50_d1.75", 0), ("lih", "r2.00", 1)] {
        let s = system(mol, tag, frozen);
        let gs = GroundStateResult::from_ansatz(&s.h, s.reference.clone(), AnsatzCircuit::new(s.reference.n_qubits())).unwrap();
        let hf_mask = reference_mask(s.mi.n_electrons, 0).unwrap();
        for sector in Sector::ALL {
            for sz in sector.default_sz_filters() {
                let m = manifold(&s, sector, Some(sz));
                let dets: Vec<(f64, u64)> = m.entries.iter().map(|e| oracle_determinant(hf_mask, &e.excitation())).collect();
                let mut sorted: Vec<u64> = dets.iter().map(|d| d.1).collect();
                sorted.sort_unstable();
                let block = ci_matrix(&s.mi, &sorted);
                let pos = |d: u64| sorted.binary_search(&d).unwrap();
                let got = build_m_direct(&gs, &s.h, &m).unwrap().m.unwrap();
                let e_hf = hf_energy(&s.mi);
                for i in 0..m.len() {
                    for j in 0..m.len() {
                        let mut want = dets[i].0 * dets[j].0 * block[(pos(dets[i].1), pos(dets[j].1))];
                        if i == j {
                            want -= e_hf;
                        }
                        let diff = (got[(i, j)] - Complex64::new(want, 0.0)).norm();
                        assert!(diff < 1e-10, "{mol}/{tag} {sector} sz {sz} ({i},{j}): {diff:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn gate_sequence_path_is_a_sign_conjugation_with_the_same_spectrum() {
    let s = system("h4", "b1.50_d1.50", 0);
    let gs = adapt_vqe(&s.h, &s.reference, &build_gsd_pool(8), AdaptOptions::default()).unwrap();
    for (sector, sz) in [(Sector::EE, 0), (Sector::IP, -1), (Sector::EA, 1)] {
        let m = manifold(&s, sector, Some(sz));
        let direct = build_m_direct(&gs, &s.h, &m).unwrap();
        let opts = CircuitPathOptions { preparation: PairPreparation::GateSequence, ..Default::default() };
        let gate = build_m_circuit_path(&gs, &s.h, &m, opts).unwrap();
        let signs: Vec<f64> = excited_determinants(&m, 8).unwrap().iter().map(|d| d.sign).collect();
        let (md, mg) = (direct.m.as_ref().unwrap(), gate.m.as_ref().unwrap());
        for i in 0..m.len() {
            for j in 0..m.len() {
                let want = md[(i, j)] * (signs[i] * signs[j]);
                assert!((mg[(i, j)] - want).norm() < 1e-10, "{sector} ({i},{j})");
            }
        }
        let a = solve_qsceom(&direct).unwrap().delta_energies();
        let b = solve_qsceom(&gate).unwrap().delta_energies();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    }
}

#[test]
fn real_part_only_path_matches_for_real_hamiltonians() {
    let s = system("h2", "r1.00", 0);
    let gs = exact_gs(&s);
    let m = manifold(&s, Sector::EE, Some(0));
    let direct = build_m_direct(&gs, &s.h, &m).unwrap().m.unwrap();
    let opts = CircuitPathOptions { imaginary_part: false, ..Default::default() };
    let path = build_m_circuit_path(&gs, &s.h, &m, opts).unwrap().m.unwrap();
    assert!(max_abs(&(path - direct)) < 1e-10);
}

#[test]
fn dressed_operators_annihilate_the_ground_state() {
    for (mol, tag) in [("h2", "r0.75"), ("h2", "r2.00"), ("h4", "b1.50_d1.50"), ("h4", "b1.50_d2.50")] {
        let s = system(mol, tag, 0);
        let gs = adapt_vqe(&s.h, &s.reference, &build_gsd_pool(2 * s.mi.n_spatial), AdaptOptions::default()).unwrap();
        for sector in Sector::ALL {
            for e in &manifold(&s, sector, None).entries {
                // U ĝ† U† |Ψ⟩
                let mut x = gs.state.clone();
                gs.ansatz.apply_inverse(&mut x).unwrap();
                let mut y = x.apply_fermion_term(&e.excitation().term().dagger());
                gs.ansatz.apply(&mut y).unwrap();
                assert!(y.norm() < 1e-14, "{mol}/{tag} {} {:?}: {:e}", e.kind(), e.indices(), y.norm());
            }
        }
    }
}

#[test]
fn complete_manifold_methods_reproduce_two_electron_fci() {
    for tag in ["r0.75", "r1.75"] {
        let s = system("h2", tag, 0);
        let gs = exact_gs(&s);
        let fci = fci_sector_spectrum(&s.pauli, 2, None).unwrap();
        let want: Vec<f64> = fci.eigenvalues.iter().skip(1).map(|e| e - fci.ground()).collect();
        let m = manifold(&s, Sector::EE, None);
        let qsc = solve_qsceom(&build_m_direct(&gs, &s.h, &m).unwrap()).unwrap();
        assert!(qsc.roots.iter().all(|r| r.imag == 0.0));
        let qeom = solve_paired_geneig(&build_qeom(&gs, &s.h, &m, OperatorDressing::SelfConsistent).unwrap(), CANONICAL_THRESHOLD).unwrap();
        let qse = solve_qse(&build_qse(&gs, &s.h, &m, true).unwrap(), CANONICAL_THRESHOLD).unwrap();
        for (name, got) in [("q-sc-EOM", qsc.delta_energies()), ("qEOM", qeom.delta_energies()), ("QSE", qse.delta_energies())] {
            assert_eq!(got.len(), want.len(), "{name} {tag}");
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8, "{name} {tag}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn qse_matrices_are_hermitian_and_overlap_is_positive() {
    let s = system("lih", "r1.75", 1);
    let gs = adapt_vqe(&s.h, &s.reference, &build_gsd_pool(10), AdaptOptions::default()).unwrap();
    for sector in Sector::ALL {
        let set = build_qse(&gs, &s.h, &manifold(&s, sector, None), true).unwrap();
        let (hs, ss) = (set.h_sub.unwrap(), set.s_sub.unwrap());
        assert!(hermiticity_error(&hs) < 1e-9 && hermiticity_error(&ss) < 1e-9);
        let min = ss.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > -1e-9, "{sector}: overlap eigenvalue {min}");
    }
}

fn h4() -> &'static System {
    static S: std::sync::OnceLock<System> = std::sync::OnceLock::new();
    S.get_or_init(|| system("h4", "b1.50_d2.00", 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn m_is_hermitian_for_any_ansatz_angles(ops in prop::collection::vec((0usize..72, -1.0f64..1.0), 1..5)) {
        let s = h4();
        let pool = build_gsd_pool(8);
        let mut ansatz = AnsatzCircuit::new(8);
        for (k, t) in ops {
            ansatz.ops.push((pool[k].clone(), t));
        }
        let gs = GroundStateResult::from_ansatz(&s.h, s.reference.clone(), ansatz).unwrap();
        for sector in Sector::ALL {
            let m = manifold(s, sector, None);
            let direct = build_m_direct(&gs, &s.h, &m).unwrap();
            prop_assert!(hermiticity_error(direct.m.as_ref().unwrap()) < 1e-9);
            let path = build_m_circuit_path(&gs, &s.h, &m, CircuitPathOptions::default()).unwrap();
            prop_assert!(max_abs(&(path.m.unwrap() - direct.m.unwrap())) < 1e-10);
        }
    }
}
