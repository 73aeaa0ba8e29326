//! The `passage` command line. Exit status is 0 on success, 1 for bad
//! configuration or arguments, 2 when a computation or file operation fails.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use passage_core::bench::{compare_protocols, detuning_map, efficiency_curve, rabi_error_sweep, Protocol, ProtocolKind};
use passage_core::io::{write_evolution_csv, write_json, write_sweep_csv, write_waveform_csv};
use passage_core::optimize::{optimize_ab, optimize_drag, LAMBDA_BOUNDS};
use passage_core::Error;

pub use config::{load_config, parse_config, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "passage", version, about = "Raman passage pulse synthesis, simulation and benchmarks")]
struct Cli {
    /// JSON configuration file, or `default`.
    #[arg(long, global = true, default_value = "default")]
    config: PathBuf,
    /// Protocol name, overriding the configuration.
    #[arg(long, global = true)]
    protocol: Option<String>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Optimizer seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep points: `n` or `n,m`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the protocol's drive waveform as CSV.
    Synth,
    /// Simulate the protocol from |0> and write populations as CSV.
    Simulate,
    /// Fit (A, B) for stirup-op or the DRAG coefficients for stirup-drag.
    Optimize,
    /// Efficiency over a Rabi-amplitude error or a detuning grid.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
    },
    /// Rank the configured protocols.
    Compare,
    /// Render CSV files to SVG.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    Rabi,
    Detuning,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn config(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Parses `n` or `n,m`.
pub fn parse_grid(text: &str) -> Result<(usize, Option<usize>), String> {
    let parse = |s: &str| -> Result<usize, String> {
        let n: usize = s.trim().parse().map_err(|_| format!("invalid grid size {s:?}"))?;
        if !(2..=config::MAX_AXIS_POINTS).contains(&n) {
            return Err(format!("grid size {n} outside [2, {}]", config::MAX_AXIS_POINTS));
        }
        Ok(n)
    };
    match text.split_once(',') {
        Some((n, m)) => Ok((parse(n)?, Some(parse(m)?))),
        None => Ok((parse(text)?, None)),
    }
}

/// Runs one command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (Failure::Config(m) | Failure::Runtime(m)) = &f;
            eprintln!("error: {m}");
            f.code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli.config).map_err(config)?;
    if let Some(name) = &cli.protocol {
        cfg.protocol = name.parse().map_err(config)?;
        cfg.protocols = vec![cfg.protocol];
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let grid = cli.grid.as_deref().map(parse_grid).transpose().map_err(Failure::Config)?;

    fs::create_dir_all(&cfg.out_dir).map_err(|e| io_failure(&cfg.out_dir, e))?;
    match cli.command {
        Command::Synth => synth(&cfg),
        Command::Simulate => simulate(&cfg),
        Command::Optimize => optimize(&cfg),
        Command::Sweep { kind } => sweep(&cfg, kind, grid),
        Command::Compare => compare(&cfg, grid),
        Command::Plot { inputs } => plot_files(&cfg, &inputs),
    }
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> passage_core::Result<()>) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut out = BufWriter::new(file);
    write(&mut out).map_err(runtime)?;
    out.flush().map_err(|e| io_failure(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn protocol(cfg: &RunConfig) -> Result<Protocol, Failure> {
    let p = cfg.protocols_for(&[cfg.protocol]).map_err(runtime)?[0];
    p.validate().map_err(config)?;
    Ok(p)
}

fn synth(cfg: &RunConfig) -> Result<(), Failure> {
    let p = protocol(cfg)?;
    let w = p.waveform(&cfg.model(), cfg.spacing).map_err(runtime)?;
    write_file(&cfg.out_dir.join(format!("{}_waveform.csv", p.kind)), |out| write_waveform_csv(&w, out))
}

fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let p = protocol(cfg)?;
    let r = efficiency_curve(&p, &cfg.model(), cfg.spacing).map_err(runtime)?;
    log::info!("{}: final P2 = {:.6}, max P3 = {:.3e}", p.kind, r.final_efficiency, r.max_p3);
    write_file(&cfg.out_dir.join(format!("{}_evolution.csv", p.kind)), |out| write_evolution_csv(&r, out))
}

fn optimize(cfg: &RunConfig) -> Result<(), Failure> {
    let p = protocol(cfg)?;
    let model = cfg.model();
    let fit = match p.kind {
        ProtocolKind::StirupOp => optimize_ab(&model, &p.passage().expect("STIRUP family"), cfg.search()),
        ProtocolKind::StirupDrag => {
            let base = Protocol { lambda_pump: 0.0, lambda_stokes: 0.0, ..p };
            let w = base.waveform(&model, cfg.spacing).map_err(runtime)?;
            optimize_drag(&model, &w, LAMBDA_BOUNDS, cfg.search())
        }
        other => {
            return Err(Failure::Config(format!("{other} has no free parameters; use stirup-op or stirup-drag")));
        }
    }
    .map_err(runtime)?;
    log::info!("{}: best {:?} with cost {:.6}", p.kind, fit.params, fit.report.best_cost);
    write_file(&cfg.out_dir.join(format!("{}_optimization.json", p.kind)), |out| write_json(&fit.report, out))
}

fn sweep(cfg: &RunConfig, kind: SweepKind, grid: Option<(usize, Option<usize>)>) -> Result<(), Failure> {
    let p = protocol(cfg)?;
    let model = cfg.model();
    let (grid_data, name) = match kind {
        SweepKind::Rabi => {
            if grid.is_some_and(|(_, m)| m.is_some()) {
                return Err(Failure::Config("a Rabi sweep takes a single grid size".into()));
            }
            let eta = cfg.eta_axis(grid.map(|g| g.0)).map_err(config)?;
            (rabi_error_sweep(&p, &model, eta, cfg.spacing), "rabi")
        }
        SweepKind::Detuning => {
            let (d1, d2) = cfg.detuning_axes(grid).map_err(config)?;
            (detuning_map(&p, &model, d1, d2, cfg.spacing), "detuning")
        }
    };
    let grid_data = grid_data.map_err(runtime)?;
    let stem = format!("{}_{name}", p.kind);
    write_file(&cfg.out_dir.join(format!("{stem}.csv")), |out| write_sweep_csv(&grid_data, out))?;
    write_file(&cfg.out_dir.join(format!("{stem}.json")), |out| write_json(&grid_data, out))
}

fn compare(cfg: &RunConfig, grid: Option<(usize, Option<usize>)>) -> Result<(), Failure> {
    let protocols = cfg.protocols_for(&cfg.protocols).map_err(runtime)?;
    for p in &protocols {
        p.validate().map_err(config)?;
    }
    let eta = cfg.eta_axis(grid.map(|g| g.0)).map_err(config)?;
    let report = compare_protocols(&protocols, &cfg.model(), eta, cfg.spacing).map_err(runtime)?;
    let table = report.table();
    print!("{table}");
    write_file(&cfg.out_dir.join("comparison.json"), |out| write_json(&report, out))?;
    write_file(&cfg.out_dir.join("comparison.txt"), |out| Ok(out.write_all(table.as_bytes())?))
}

fn plot_files(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<(), Failure> {
    for input in inputs {
        let text = fs::read_to_string(input).map_err(|e| io_failure(input, e))?;
        let stem = input.file_stem().map_or_else(|| "plot".into(), |s| s.to_string_lossy().into_owned());
        let svg = plot::render_csv(&text, &stem).map_err(|e| Failure::Runtime(format!("{}: {e}", input.display())))?;
        write_file(&cfg.out_dir.join(format!("{stem}.svg")), |out| Ok(out.write_all(svg.as_bytes())?))?;
    }
    Ok(())
}
