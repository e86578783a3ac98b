use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use qsceom_core::manifolds::Sector;
use qsceom_experiments::load_config;
use qsceom_experiments::noise::{run_noise_study, NoiseStudyConfig, NOISE_COLUMNS};
use qsceom_experiments::pipeline::{AdaptSettings, MethodChoice};
use qsceom_experiments::scan::{default_manifest, run_scan, ScanConfig};
use qsceom_experiments::size::{run_size_intensivity, SizeIntensivityConfig, SIZE_COLUMNS};
use qsceom_experiments::table::{to_csv, write_table, RESULT_COLUMNS};

#[derive(Parser)]
#[command(name = "qsceom", version, about = "Excited states from self-consistent EOM on a statevector simulator")]
struct Cli {
    /// TOML config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path; a `.json` mirror is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Overrides the noise-study seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state and sector spectra over a fixture grid.
    Scan,
    /// Matrix-perturbation noise study.
    Noise,
    /// Fragment excitations in isolation and inside a non-interacting composite.
    SizeIntensivity,
    /// Spectra of one fixture.
    Spectrum {
        /// Fixture as `molecule/tag`.
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "QSCEOM")]
        methods: Vec<MethodChoice>,
        #[arg(long, value_delimiter = ',', default_value = "EE,IP,EA")]
        sectors: Vec<Sector>,
        #[arg(long)]
        n_roots: Option<usize>,
    },
    /// ADAPT-VQE ground state of one fixture.
    GroundState {
        /// Fixture as `molecule/tag`.
        #[arg(long)]
        fixture: Option<String>,
        /// Writes the converged ansatz to this file.
        #[arg(long)]
        ansatz: Option<PathBuf>,
        #[arg(long)]
        grad_threshold: Option<f64>,
    },
}

fn emit<T: Serialize>(rows: &[T], header: &[&str], output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => write_table(p, rows, header),
        None => {
            print!("{}", to_csv(rows, header)?);
            Ok(())
        }
    }
}

fn single_fixture(config: Option<&Path>, fixture: Option<String>) -> Result<ScanConfig> {
    let mut cfg = match config {
        Some(p) => load_config::<ScanConfig>(p)?,
        None => ScanConfig {
            manifest: default_manifest(),
            fixtures: Vec::new(),
            sectors: Sector::ALL.to_vec(),
            methods: vec![MethodChoice::QscEom],
            n_frozen: None,
            adapt: AdaptSettings::default(),
            n_roots: None,
            output: None,
        },
    };
    if let Some(f) = fixture {
        cfg.fixtures = vec![f];
    }
    if cfg.fixtures.is_empty() {
        bail!("no fixture given; pass --fixture molecule/tag or a config");
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    match cli.command {
        Command::Scan => {
            let Some(path) = config else { bail!("scan needs --config") };
            let cfg: ScanConfig = load_config(path)?;
            let rows = run_scan(&cfg)?;
            emit(&rows, &RESULT_COLUMNS, cli.output.as_deref().or(cfg.output.as_deref()))
        }
        Command::Noise => {
            let mut cfg: NoiseStudyConfig = config.map(load_config).transpose()?.unwrap_or_default();
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let rows = run_noise_study(&cfg)?;
            emit(&rows, &NOISE_COLUMNS, cli.output.as_deref().or(cfg.output.as_deref()))
        }
        Command::SizeIntensivity => {
            let cfg: SizeIntensivityConfig = config.map(load_config).transpose()?.unwrap_or_default();
            let rows = run_size_intensivity(&cfg)?;
            emit(&rows, &SIZE_COLUMNS, cli.output.as_deref().or(cfg.output.as_deref()))
        }
        Command::Spectrum { fixture, methods, sectors, n_roots } => {
            let mut cfg = single_fixture(config, fixture)?;
            if config.is_none() {
                cfg.methods = methods;
                cfg.sectors = sectors;
                cfg.n_roots = n_roots;
            }
            let rows = run_scan(&cfg)?;
            emit(&rows, &RESULT_COLUMNS, cli.output.as_deref().or(cfg.output.as_deref()))
        }
        Command::GroundState { fixture, ansatz, grad_threshold } => {
            let mut cfg = single_fixture(config, fixture)?;
            if let Some(g) = grad_threshold {
                cfg.adapt.grad_threshold = g;
            }
            cfg.sectors = Vec::new();
            let (rows, circuit) = qsceom_experiments::scan::run_ground_state(&cfg)?;
            if let (Some(path), Some(c)) = (ansatz, circuit) {
                std::fs::write(&path, c.to_text())?;
            }
            emit(&rows, &RESULT_COLUMNS, cli.output.as_deref().or(cfg.output.as_deref()))
        }
    }
}
