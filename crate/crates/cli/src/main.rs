use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use paraxial_core::harness::{
    absorption_split_sweep, cfl_sweep, convergence_harness, layer_sweep, limits_check, mirrored_pair,
    regrid_cfl, to_csv, two_ray_report, CsvRow,
};
use paraxial_core::{
    beam_metrics, emit_outputs, energy_balance_report, parse_config, AbsorbingLayerSpec, Error, LimiterKind,
    Marcher, RunConfig, SchemeOrder,
};

#[derive(Parser)]
#[command(name = "paraxial", version, about = "Tilted-frame paraxial laser propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March one configuration and write metrics, summary and intensity files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh convergence study at Courant number 1.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1.6,0.8,0.4,0.2,0.1")]
        meshes: Vec<f64>,
        #[arg(long = "ref", default_value_t = 0.05)]
        reference: f64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Courant number sweep at the configured cell height.
    CflSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.75,0.875,1")]
        cfls: Vec<f64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        #[arg(long, default_value = "vanleer")]
        limiter: LimiterKind,
        /// Cell size of the Courant-1 reference run.
        #[arg(long = "ref", default_value_t = 0.05)]
        reference: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Absorbing layer strength sweep against b = 0.1, β = 50.
    LayerSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "b", value_delimiter = ',', default_value = "0,0.1,0.2,0.5,1")]
        strengths: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10,30,50,100")]
        beta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split of a fixed total absorption between the spectral and transport stages.
    SplitSweep {
        #[arg(long)]
        config: PathBuf,
        /// Total absorption ν.
        #[arg(long, default_value_t = 1e-3)]
        nu: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,0.5,0.7,0.9,1")]
        fractions: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled two-ray run compared with two independent rays. A single-beam
    /// configuration gets a partner mirrored about the domain mid-line.
    TwoRay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Near-normal incidence, vanishing ε and linear superposition checks.
    LimitsCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> paraxial_core::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn emit_table<R: CsvRow>(rows: &[R], out: Option<&Path>) -> paraxial_core::Result<()> {
    let text = to_csv(rows);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn order_from(n: u8) -> SchemeOrder {
    if n == 1 {
        SchemeOrder::First
    } else {
        SchemeOrder::Second
    }
}

fn simulate(config: &Path, out: Option<PathBuf>) -> paraxial_core::Result<()> {
    let mut cfg = load(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let state = Marcher::new(&cfg)?.run()?;
    let metrics = beam_metrics(&state);
    let balance = energy_balance_report(&state, &cfg);
    info!("energy balance residual {:.3e}", balance.residual);
    if !balance.estimate_holds() {
        warn!("stability estimate not met: {} > {}", balance.estimate_lhs, balance.estimate_bound);
    }
    let files = emit_outputs(&state, &metrics, &cfg.output_dir)?;
    println!(
        "max_energy={} focusing_distance={} at x={} y={}",
        metrics.max_energy, metrics.focusing_distance, metrics.max_location.0, metrics.max_location.1
    );
    println!("wrote {}", files.metrics.parent().unwrap_or(Path::new(".")).display());
    Ok(())
}

fn run(cli: Cli) -> paraxial_core::Result<()> {
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Converge { config, meshes, reference, out } => {
            let study = convergence_harness(&load(&config)?, &meshes, reference)?;
            info!(
                "reference: max {} focusing distance {}",
                study.reference.max_energy, study.reference.focusing_distance
            );
            emit_table(&study.rows, out.as_deref())
        }
        Command::CflSweep { config, cfls, order, limiter, reference, out } => {
            let base = load(&config)?;
            let ref_state = Marcher::new(&regrid_cfl(&base, reference, 1.0)?)?.run()?;
            let rows = cfl_sweep(&base, &cfls, order_from(order), limiter, &ref_state)?;
            emit_table(&rows, out.as_deref())
        }
        Command::LayerSweep { config, strengths, beta, out } => {
            let rows = layer_sweep(&load(&config)?, &strengths, &beta, AbsorbingLayerSpec::default())?;
            emit_table(&rows, out.as_deref())
        }
        Command::SplitSweep { config, nu, fractions, out } => {
            let rows = absorption_split_sweep(&load(&config)?, nu, &fractions)?;
            emit_table(&rows, out.as_deref())
        }
        Command::TwoRay { config, out } => {
            let cfg = mirrored_pair(&load(&config)?);
            let (report, state) = two_ray_report(&cfg)?;
            if let Some(dir) = &out {
                emit_outputs(&state, &beam_metrics(&state), dir)?;
            }
            emit_table(&[report], None)
        }
        Command::LimitsCheck { config } => {
            let checks = limits_check(&load(&config)?)?;
            emit_table(&checks, None)?;
            if checks.iter().all(|c| c.passed()) {
                Ok(())
            } else {
                Err(Error::Invalid("limit checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else if e.is_blow_up() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
