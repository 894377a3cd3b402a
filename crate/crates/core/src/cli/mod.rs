//! `gvflow` command-line front end.
//!
//! Exit codes: 0 success, 1 non-convergence or infeasibility, 2 input
//! error, 3 I/O error.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::data::{self, RasterFormat, WellDataset};
use crate::domain::{DistanceMetric, GridDomain};
use crate::error::Error;
use crate::fitting::{fit_individual, FitConfig, FitReport};
use crate::flow::{fit_sequential, FlowParams, Projection, Source, TimeSeriesSurfaces};
use crate::gvcore::{check_feasibility, HeadSurface, LevelScale};

use config::{Bbox, ConfigError, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_METHOD: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gvflow", version, about = "Gradually varied groundwater head reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a well CSV and write it to a store directory.
    Ingest { csv: PathBuf, store: PathBuf },
    /// Report per-time feasibility of gradually varied fitting.
    Check {
        store: PathBuf,
        /// Only check this time index.
        #[arg(long)]
        time: Option<u32>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit one time index and write its raster and report.
    Fit {
        store: PathBuf,
        #[arg(long)]
        time: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit every time index, then evolve them with the flow equation.
    Simulate {
        store: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set scale.ratio=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::Infeasible(_) | Error::NonConvergence { .. } => EXIT_METHOD,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Read { .. } => EXIT_IO,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("gvflow: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Ingest { csv, store } => cmd_ingest(&csv, &store),
        Command::Check { store, time, run } => cmd_check(&store, &run.load()?, time),
        Command::Fit {
            store,
            time,
            out,
            run,
        } => {
            let cfg = run.load()?;
            let out = output_dir(out, &cfg)?;
            cmd_fit(&store, &cfg, time, &out)
        }
        Command::Simulate { store, out, run } => {
            let cfg = run.load()?;
            let out = output_dir(out, &cfg)?;
            cmd_simulate(&store, &cfg, &out)
        }
    }
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for assignment in &self.overrides {
            cfg.apply_assignment(assignment)?;
        }
        Ok(cfg)
    }
}

fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Failure::input("no output directory: pass --out or set io.output"))?;
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn cmd_ingest(csv: &Path, store: &Path) -> CmdResult {
    let ds = data::ingest_csv_path(csv)?;
    data::store(&ds, store)?;
    println!(
        "ingested {} records, times {}..={}",
        ds.len(),
        ds.time_range().0,
        ds.time_range().1
    );
    Ok(EXIT_OK)
}

/// Grid and level scale for a dataset under a config.
pub struct Setup {
    pub dataset: WellDataset,
    pub grid: GridDomain,
    pub scale: LevelScale,
}

impl Setup {
    pub fn new(store: &Path, cfg: &RunConfig) -> Result<Self, Failure> {
        let dataset = data::load(store)?;
        let (sw, ne) = match cfg.bbox {
            Bbox::Auto => dataset.bbox(),
            Bbox::Explicit { sw, ne } => (sw, ne),
        };
        let grid = GridDomain::build(sw, ne, cfg.rows, cfg.cols, cfg.adjacency)?;
        let n_levels = match cfg.n_levels {
            Some(n) => n,
            None => {
                let max = dataset
                    .records()
                    .iter()
                    .map(|r| r.value)
                    .fold(f64::NEG_INFINITY, f64::max);
                if cfg.ratio.is_nan() || cfg.ratio <= 0.0 {
                    return Err(Failure::input("config key scale.ratio: must be positive"));
                }
                ((max / cfg.ratio).ceil() as i64 + 1).max(1)
            }
        };
        let scale = LevelScale::new(n_levels, cfg.ratio)?;
        Ok(Setup {
            dataset,
            grid,
            scale,
        })
    }

    fn cell_label(&self, node: usize) -> String {
        let (row, col) = self.grid.cell(node);
        format!("({row},{col})")
    }
}

pub fn cmd_check(store: &Path, cfg: &RunConfig, time: Option<u32>) -> CmdResult {
    let setup = Setup::new(store, cfg)?;
    let times = match time {
        Some(t) => vec![t],
        None => setup.dataset.times(),
    };
    let mut all_feasible = true;
    for t in times {
        let slice = data::samples_at(&setup.dataset, t, &setup.grid, setup.scale)?;
        let report = check_feasibility(&slice.samples, setup.grid.domain(), DistanceMetric::GraphHops)?;
        match report.witness {
            None => println!("t={t} feasible samples={}", slice.samples.len()),
            Some(w) => {
                all_feasible = false;
                println!(
                    "t={t} infeasible samples={} witness={} {} level_gap={} distance={}",
                    slice.samples.len(),
                    setup.cell_label(w.node_x),
                    setup.cell_label(w.node_y),
                    w.level_gap,
                    w.distance
                );
            }
        }
    }
    Ok(if all_feasible { EXIT_OK } else { EXIT_METHOD })
}

fn fit_config(cfg: &RunConfig) -> FitConfig {
    FitConfig {
        init_value: cfg.init_value,
        max_sweeps: cfg.max_sweeps,
        metric: cfg.metric,
    }
}

fn write_rasters(
    surface: &HeadSurface,
    grid: &GridDomain,
    out: &Path,
    stem: &str,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    if cfg.raster_format.pgm() {
        data::export_raster(surface, grid, &out.join(format!("{stem}.pgm")), RasterFormat::Pgm)?;
    }
    if cfg.raster_format.csv() {
        data::export_raster(surface, grid, &out.join(format!("{stem}.csv")), RasterFormat::Csv)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    crate::data::write_atomic(path, text.as_bytes()).map_err(Failure::from)
}

fn fit_report_text(t: u32, report: &FitReport, samples: usize, collisions: usize) -> String {
    format!(
        "time={t}\nsamples={samples}\ncollisions={collisions}\nsweeps_run={}\nmax_violation={}\nconverged={}\n",
        report.sweeps_run, report.max_violation, report.converged
    )
}

pub fn cmd_fit(store: &Path, cfg: &RunConfig, time: u32, out: &Path) -> CmdResult {
    let setup = Setup::new(store, cfg)?;
    fit_one(&setup, cfg, time, out)
}

fn fit_one(setup: &Setup, cfg: &RunConfig, time: u32, out: &Path) -> CmdResult {
    let slice = data::samples_at(&setup.dataset, time, &setup.grid, setup.scale)?;
    let (surface, report) = fit_individual(&slice.samples, &setup.grid, &fit_config(cfg))?;
    let stem = format!("fit_t{time}");
    write_rasters(&surface, &setup.grid, out, &stem, cfg)?;
    write_text(
        &out.join(format!("{stem}.report.txt")),
        &fit_report_text(time, &report, slice.samples.len(), slice.collisions),
    )?;
    println!(
        "t={time} sweeps={} max_violation={} converged={}",
        report.sweeps_run, report.max_violation, report.converged
    );
    Ok(if report.converged { EXIT_OK } else { EXIT_METHOD })
}

fn flow_params(cfg: &RunConfig, grid: &GridDomain) -> Result<FlowParams, Failure> {
    let source = if cfg.source_cells.is_empty() {
        Source::Uniform(cfg.source)
    } else {
        let mut g = vec![cfg.source; grid.len()];
        for &(row, col, value) in &cfg.source_cells {
            if row >= grid.rows() || col >= grid.cols() {
                return Err(Failure::input(format!(
                    "config key flow.source_cells: cell ({row},{col}) outside {}x{} grid",
                    grid.rows(),
                    grid.cols()
                )));
            }
            g[grid.node(row, col)] += value;
        }
        Source::PerNode(g)
    };
    Ok(FlowParams::new(cfg.alpha, source, cfg.max_iters, cfg.tolerance)?.with_boundary(cfg.boundary))
}

pub fn cmd_simulate(store: &Path, cfg: &RunConfig, out: &Path) -> CmdResult {
    let setup = Setup::new(store, cfg)?;
    let times = setup.dataset.times();
    if times.len() < 2 {
        eprintln!(
            "gvflow: warning: sequential fitting needs at least 2 time steps; fitting t={} individually",
            times[0]
        );
        return fit_one(&setup, cfg, times[0], out);
    }
    let params = flow_params(cfg, &setup.grid)?;

    let mut wells = Vec::with_capacity(times.len());
    let mut fits = Vec::with_capacity(times.len());
    for &t in &times {
        let slice = data::samples_at(&setup.dataset, t, &setup.grid, setup.scale)?;
        let (surface, report) = fit_individual(&slice.samples, &setup.grid, &fit_config(cfg))?;
        if !report.converged {
            eprintln!(
                "gvflow: warning: individual fit at t={t} stopped after {} sweeps (max_violation={})",
                report.sweeps_run, report.max_violation
            );
        }
        wells.push(slice.samples);
        fits.push(surface);
    }
    let series = TimeSeriesSurfaces::new(times.clone(), fits)?;
    let result = fit_sequential(&series, &wells, &setup.grid, &params, cfg.gv_every)?;

    for (t, surface) in result.series.iter() {
        write_rasters(surface, &setup.grid, out, &format!("sim_t{t}"), cfg)?;
    }
    let mut log = String::from("time,iters,max_change\n");
    writeln!(log, "{},0,0", times[0]).unwrap();
    for r in &result.reports {
        writeln!(log, "{},{},{}", r.time, r.iterations, r.max_change).unwrap();
        let projection = match &r.projection {
            Projection::Disabled => "disabled".to_string(),
            Projection::Applied { changes } => format!("applied changes={changes}"),
            Projection::Skipped(report) => format!("skipped ({report})"),
        };
        println!(
            "t={} iters={} max_change={} converged={} projection={projection}",
            r.time, r.iterations, r.max_change, r.converged
        );
    }
    write_text(&out.join("convergence.csv"), &log)?;
    Ok(if result.all_converged() { EXIT_OK } else { EXIT_METHOD })
}
