use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qsceom_experiments::noise::{build_noise_base, noise_table, trial_rng, NoiseStudyConfig, NoiseVariant};
use qsceom_experiments::pipeline::{AdaptSettings, MethodChoice};
use qsceom_experiments::size::{run_size_intensivity, SizeIntensivityConfig};
use qsceom_experiments::table::{ResultRow, RESULT_COLUMNS};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsceom-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_qsceom")).args(args).current_dir(workspace()).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv_text: &str) -> Vec<ResultRow> {
    csv::Reader::from_reader(csv_text.as_bytes()).deserialize().map(Result::unwrap).collect()
}

#[test]
fn empty_sector_list_gives_a_header_only_table() {
    let dir = scratch("empty");
    let cfg = dir.join("scan.toml");
    fs::write(&cfg, "fixtures = [\"h2/r0.75\"]\nsectors = []\nmethods = [\"QSCEOM\"]\n").unwrap();
    let out = run(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.trim_end(), RESULT_COLUMNS.join(","));
}

#[test]
fn h2_scan_is_exact_and_missing_fixtures_become_error_rows() {
    let dir = scratch("scan");
    let cfg = dir.join("scan.toml");
    fs::write(&cfg, "fixtures = [\"h2/*\", \"h2/r9.99\"]\nmethods = [\"QSCEOM\", \"FCI\"]\n").unwrap();
    let csv_path = dir.join("scan.csv");
    run(&["scan", "--config", cfg.to_str().unwrap(), "--output", csv_path.to_str().unwrap()]);
    let table = rows(&fs::read_to_string(&csv_path).unwrap());
    let json: Vec<ResultRow> = serde_json::from_str(&fs::read_to_string(dir.join("scan.json")).unwrap()).unwrap();
    assert_eq!(json, table);
    let missing: Vec<&ResultRow> = table.iter().filter(|r| r.geometry_tag == "h2/r9.99").collect();
    assert_eq!(missing.len(), 1);
    assert!(missing[0].flags.starts_with("error="));
    let tags: std::collections::BTreeSet<&str> = table.iter().map(|r| r.geometry_tag.as_str()).collect();
    assert_eq!(tags.len(), 10);
    for sector in ["EE", "IP", "EA"] {
        let qsc: Vec<&ResultRow> = table.iter().filter(|r| r.method == "QSCEOM" && r.sector == sector).collect();
        assert!(!qsc.is_empty());
        for r in qsc {
            assert!(r.error_vs_fci_hartree.unwrap().abs() < 1e-8, "{r:?}");
            let ev = r.delta_e_ev.unwrap() / r.delta_e_hartree.unwrap();
            assert!((ev - 27.211386245988).abs() < 1e-9);
        }
    }
    let gs: Vec<&ResultRow> = table.iter().filter(|r| r.sector == "GS").collect();
    assert_eq!(gs.len(), 9);
    assert!(gs.iter().all(|r| r.flags.contains("operators=1")));
}

#[test]
fn ground_state_checkpoint_is_written() {
    let dir = scratch("gs");
    let ansatz = dir.join("h4.ansatz");
    let out = run(&["ground-state", "--fixture", "h4/b1.50_d1.50", "--ansatz", ansatz.to_str().unwrap()]);
    let table = rows(&out);
    assert_eq!(table.len(), 1);
    assert!(table[0].error_vs_fci_hartree.unwrap() >= -1e-9);
    let text = fs::read_to_string(&ansatz).unwrap();
    let circuit = qsceom_core::ground_state::AnsatzCircuit::from_text(&text).unwrap();
    assert!(!circuit.is_empty());
}

#[test]
fn spectrum_subcommand_reports_requested_methods() {
    let out = run(&["spectrum", "--fixture", "h2/r1.00", "--methods", "QSE,QEOM", "--sectors", "IP", "--n-roots", "2"]);
    let table = rows(&out);
    let ip: Vec<&ResultRow> = table.iter().filter(|r| r.sector == "IP").collect();
    assert_eq!(ip.len(), 4);
    assert!(ip.iter().all(|r| r.method == "QSE" || r.method == "QEOM"));
}

#[test]
fn noise_output_is_bitwise_deterministic_and_seed_dependent() {
    let dir = scratch("noise");
    let cfg = dir.join("noise.toml");
    fs::write(&cfg, "epsilons = [1e-6, 1e-4]\nn_trials = 64\n").unwrap();
    let a = run(&["noise", "--config", cfg.to_str().unwrap(), "--seed", "11"]);
    let b = run(&["noise", "--config", cfg.to_str().unwrap(), "--seed", "11"]);
    let c = run(&["noise", "--config", cfg.to_str().unwrap(), "--seed", "12"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 1 + 3 * 2);
}

#[test]
fn noise_errors_vanish_at_zero_and_grow_with_epsilon() {
    let cfg = NoiseStudyConfig {
        manifest: workspace().join("fixtures/manifest.json"),
        epsilons: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3],
        n_trials: 400,
        ..Default::default()
    };
    let base = build_noise_base(&cfg).unwrap();
    for method in [MethodChoice::QscEom, MethodChoice::Qse] {
        for variant in [NoiseVariant::PerturbAll, NoiseVariant::ExactOverlap] {
            assert_eq!(base.trial_error(method, variant, 0.0, &mut trial_rng(1, 0, 0)), Some(0.0));
        }
    }
    let table = noise_table(&base, &cfg);
    for curve in table.chunks(cfg.epsilons.len()) {
        for w in curve.windows(2) {
            let (lo, hi) = (w[0].mean_error_hartree.unwrap(), w[1].mean_error_hartree.unwrap());
            let tol = 2.0 * (w[0].std_error_hartree.unwrap() + w[1].std_error_hartree.unwrap());
            assert!(hi + tol >= lo, "{} {}: {lo} -> {hi}", w[0].method, w[0].variant);
        }
    }
}

#[test]
fn exact_ground_state_makes_qse_size_intensive() {
    let cfg = SizeIntensivityConfig {
        manifest: workspace().join("fixtures/manifest.json"),
        adapt: AdaptSettings { grad_threshold: 1e-7, vqe_gtol: 1e-10, ..Default::default() },
        ..Default::default()
    };
    let rows = run_size_intensivity(&cfg).unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r.difference_hartree.unwrap().abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, "fixtures = [\"h2/r0.75\"]\nmethods = [\"QSCEOM\"]\nbogus = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qsceom"))
        .args(["scan", "--config", cfg.to_str().unwrap()])
        .current_dir(workspace())
        .output()
        .unwrap();
    assert!(!out.status.success());
}
