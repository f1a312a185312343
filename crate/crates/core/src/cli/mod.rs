//! Command-line front end: config parsing, run orchestration and CSV/JSON
//! output with a manifest per run.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::engine::{diagonalize, dimension_cap, BathFilling};
use crate::error::{Error, Result};
use crate::experiments::{
    ensemble_run, nm_window_comparison, run_connected_quench, run_torus_quench,
    tg_scaling_experiment, EnsembleResult, FillBasis, ModelConfig, ScalingParameter, TimeGrid,
};
use crate::model::{
    build_2d_hamiltonian, build_connected_hamiltonian, connected_bath_matrix, coupling_seed,
    CouplingTerm, SymBreakTerm,
};
use crate::observables::angle_scan;
use crate::spectra::{
    gap_deviation, loglog_slope, manifold_widths, matched_manifold_pair, spectrum_sweep,
    track_levels, ScalingFit,
};

pub use config::{parse_config, validate_config, RunConfig};
use output::{header, num, OutputDir, RunManifest};

/// Subcommands of the `symbreak` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Paired quench on a torus or strip lattice.
    QuenchTorus,
    /// Paired quench of the spin coupled to the fully connected bath.
    QuenchConnected,
    /// Spectrum versus g or k, with level widths or gap deviations.
    SpectrumSweep,
    /// Equilibration time versus g or k over many realizations.
    TgScaling,
    /// Trace-distance statistics over realizations.
    Ensemble,
    /// Dephased long-time estimate versus the initial spin direction.
    AngleScan,
    /// Non-Markovianity measure in an early and a late window.
    NmWindows,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::QuenchTorus => "quench-torus",
            Command::QuenchConnected => "quench-connected",
            Command::SpectrumSweep => "spectrum-sweep",
            Command::TgScaling => "tg-scaling",
            Command::Ensemble => "ensemble",
            Command::AngleScan => "angle-scan",
            Command::NmWindows => "nm-windows",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "symbreak",
    version,
    about = "Exact-diagonalization runs of symmetry-breaking equilibration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Number of realizations; overrides `realizations` in the config.
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            log::info!("wrote {} files to {}", files.len(), cli.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs `cli.command` and returns the list of files written.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let mut cfg = match &cli.config {
        Some(path) => validate_config(path, cli.command)?,
        None => parse_config("", cli.command)?,
    };
    if let Some(seed) = cli.seed {
        cfg.quench.seed = seed;
    }
    if let Some(r) = cli.realizations {
        if r == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        cfg.realizations = r;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;

    let started = now();
    let mut out = OutputDir::create(&cli.out)?;
    let summary = pool.install(|| dispatch(cli.command, &cfg, &mut out))?;
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.quench.seed,
        config: cfg,
        realization_seeds: summary.seeds,
        workers: cli.workers,
        max_many_body_dim: dimension_cap(),
        started_unix: started,
        finished_unix: now(),
        n_censored: summary.n_censored,
        files: Vec::new(),
    };
    out.finish(manifest)
}

struct Summary {
    seeds: Vec<u64>,
    n_censored: usize,
}

fn dispatch(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    match command {
        Command::QuenchTorus | Command::QuenchConnected => quench(command, cfg, out),
        Command::SpectrumSweep => spectrum(cfg, out),
        Command::TgScaling => scaling(cfg, out),
        Command::Ensemble => ensemble(cfg, out),
        Command::AngleScan => angle(cfg, out),
        Command::NmWindows => nm(cfg, out),
    }
}

fn quench(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let q = &cfg.quench;
    let r = if command == Command::QuenchTorus {
        run_torus_quench(q)?
    } else {
        run_connected_quench(q)?
    };
    let opt = |s: &Option<crate::observables::TimeSeries>, i: usize| {
        s.as_ref().map_or(f64::NAN, |s| s.values()[i])
    };
    let rows: Vec<Vec<String>> = (0..r.trace_distance.len())
        .map(|i| {
            vec![
                num(r.trace_distance.times()[i]),
                num(r.trace_distance.values()[i]),
                num(opt(&r.entropy, i)),
                num(opt(&r.bath_corr, i)),
            ]
        })
        .collect();
    out.write_csv(
        "timeseries.csv",
        &header(&["t", "trace_distance", "vn_entropy", "bath_corr"]),
        &rows,
    )?;
    let tg = r.tg(q);
    out.write_json("tg.json", &tg)?;
    Ok(Summary {
        seeds: vec![q.seed],
        n_censored: usize::from(tg.censored),
    })
}

#[derive(Serialize)]
struct FitJson {
    slope: Option<f64>,
    intercept: Option<f64>,
    r2: Option<f64>,
    window: Option<(f64, f64)>,
    points: Option<usize>,
    error: Option<String>,
}

impl FitJson {
    fn from_result(fit: std::result::Result<ScalingFit, String>) -> Self {
        match fit {
            Ok(f) => Self {
                slope: Some(f.slope),
                intercept: Some(f.intercept),
                r2: Some(f.r_squared),
                window: Some(f.window),
                points: Some(f.points),
                error: None,
            },
            Err(e) => {
                log::warn!("fit failed: {e}");
                Self {
                    slope: None,
                    intercept: None,
                    r2: None,
                    window: None,
                    points: None,
                    error: Some(e),
                }
            }
        }
    }
}

fn positive_window(grid: &[f64]) -> (f64, f64) {
    let pos = grid.iter().copied().filter(|&p| p > 0.0);
    (
        pos.clone().fold(f64::INFINITY, f64::min),
        pos.fold(0.0, f64::max),
    )
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let q = &cfg.quench;
    let sp = &cfg.spectrum;
    let n = q.model.spec().n_sites;
    let sym = SymBreakTerm::sample(n, q.g, q.seed)?;
    let name = match sp.parameter {
        ScalingParameter::G => "g",
        ScalingParameter::K => "k",
    };
    let sweep = match &q.model {
        ModelConfig::Lattice { spec } => spectrum_sweep(
            name,
            &sp.grid,
            |p| build_2d_hamiltonian(spec, &sym.with_strength(p)),
            true,
        )?,
        ModelConfig::Connected { spec, mode, k, .. } => {
            let coup = CouplingTerm::sample(spec.m, *k, coupling_seed(q.seed))?;
            let options = q.model.connected_options();
            spectrum_sweep(
                name,
                &sp.grid,
                |p| {
                    let (s, c) = match sp.parameter {
                        ScalingParameter::G => (sym.with_strength(p), coup.clone()),
                        ScalingParameter::K => (sym.clone(), coup.with_strength(p)),
                    };
                    Ok(build_connected_hamiltonian(spec, &s, &c, *mode, options)?.post_quench)
                },
                true,
            )?
        }
    };
    let mut head = vec!["param".to_string()];
    head.extend((0..sweep.dim()).map(|i| format!("e{i}")));
    let rows: Vec<Vec<String>> = sweep
        .grid
        .iter()
        .zip(&sweep.eigenvalues)
        .map(|(p, e)| {
            std::iter::once(num(*p))
                .chain(e.iter().map(|&v| num(v)))
                .collect()
        })
        .collect();
    out.write_csv("spectrum.csv", &head, &rows)?;

    let tracking = track_levels(&sweep);
    let window = positive_window(&sweep.grid);
    let positive: Vec<usize> = (0..sweep.grid.len())
        .filter(|&j| sweep.grid[j] > 0.0)
        .collect();
    if q.model.is_lattice() {
        let manifolds: Vec<_> = sweep
            .manifolds
            .iter()
            .filter(|m| m.len() > 1)
            .cloned()
            .collect();
        let widths: Vec<Vec<f64>> = manifolds
            .iter()
            .map(|m| manifold_widths(&sweep, &tracking, m.clone()))
            .collect();
        let mut head = vec!["param".to_string()];
        head.extend(
            manifolds
                .iter()
                .map(|m| format!("m{}_{}", m.start, m.len())),
        );
        let rows: Vec<Vec<String>> = (0..sweep.grid.len())
            .map(|j| {
                std::iter::once(num(sweep.grid[j]))
                    .chain(widths.iter().map(|w| num(w[j])))
                    .collect()
            })
            .collect();
        out.write_csv("widths.csv", &head, &rows)?;
        let fit = match widths.first() {
            Some(w) => {
                let x: Vec<f64> = positive.iter().map(|&j| sweep.grid[j]).collect();
                let y: Vec<f64> = positive.iter().map(|&j| w[j]).collect();
                loglog_slope(&x, &y, Some(window)).map_err(|e| e.to_string())
            }
            None => Err("no degenerate manifold at the first grid point".to_string()),
        };
        out.write_json("fit.json", &FitJson::from_result(fit))?;
    } else {
        let fit = match matched_manifold_pair(&sweep.manifolds) {
            Some(pair) => {
                let (dev, flags) = gap_deviation(&sweep, &tracking, pair, false)?;
                let rows: Vec<Vec<String>> = (0..dev.len())
                    .map(|j| {
                        vec![
                            num(dev.times()[j]),
                            num(dev.values()[j]),
                            u8::from(flags[j]).to_string(),
                        ]
                    })
                    .collect();
                out.write_csv(
                    "gap.csv",
                    &header(&["param", "gap_deviation", "flagged"]),
                    &rows,
                )?;
                let keep: Vec<usize> = positive.iter().copied().filter(|&j| !flags[j]).collect();
                let x: Vec<f64> = keep.iter().map(|&j| dev.times()[j]).collect();
                let y: Vec<f64> = keep.iter().map(|&j| dev.values()[j]).collect();
                loglog_slope(&x, &y, Some(window)).map_err(|e| e.to_string())
            }
            None => Err("no pair of equal-size degenerate manifolds".to_string()),
        };
        out.write_json("fit.json", &FitJson::from_result(fit))?;
    }
    Ok(Summary {
        seeds: vec![q.seed],
        n_censored: 0,
    })
}

fn scaling(cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let s = &cfg.scaling;
    let r = tg_scaling_experiment(
        &cfg.quench,
        s.parameter,
        &s.grid,
        cfg.realizations,
        cfg.quench.seed,
        &s.horizon,
    )?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                num(row.param),
                num(row.tg_median),
                num(row.tg_mean),
                row.n_censored.to_string(),
                row.n_total.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "scaling.csv",
        &header(&["param", "tg_median", "tg_mean", "n_censored", "n_total"]),
        &rows,
    )?;
    let raw: Vec<Vec<String>> = r
        .rows
        .iter()
        .flat_map(|row| {
            row.estimates.iter().enumerate().map(move |(i, e)| {
                vec![
                    num(row.param),
                    i.to_string(),
                    num(e.tg.unwrap_or(f64::NAN)),
                    u8::from(e.censored).to_string(),
                    u8::from(e.zero_peaks).to_string(),
                    u8::from(row.flagged).to_string(),
                ]
            })
        })
        .collect();
    out.write_csv(
        "tg_raw.csv",
        &header(&[
            "param",
            "realization",
            "tg",
            "censored",
            "zero_peaks",
            "point_flagged",
        ]),
        &raw,
    )?;
    let fit = match (r.fit, r.fit_error.clone()) {
        (Some(f), _) => Ok(f),
        (None, e) => Err(e.unwrap_or_default()),
    };
    out.write_json("fit.json", &FitJson::from_result(fit))?;
    Ok(Summary {
        n_censored: r.rows.iter().map(|row| row.n_censored).sum(),
        seeds: r.seeds,
    })
}

#[derive(Serialize)]
struct EnsembleStats {
    realizations: usize,
    m_sigma: f64,
    sigma_m: f64,
    tg_mean: Option<f64>,
    tg_median: Option<f64>,
    n_censored: usize,
}

fn write_ensemble(e: &EnsembleResult, out: &mut OutputDir) -> Result<()> {
    let mut head = header(&["t", "mean"]);
    head.extend((0..e.len()).map(|i| format!("r{i}")));
    let rows: Vec<Vec<String>> = (0..e.mean_series.len())
        .map(|i| {
            let mut row = vec![
                num(e.mean_series.times()[i]),
                num(e.mean_series.values()[i]),
            ];
            row.extend(e.series.iter().map(|s| num(s.values()[i])));
            row
        })
        .collect();
    out.write_csv("ensemble.csv", &head, &rows)?;
    let tg: Vec<Vec<String>> =
        e.tg.iter()
            .enumerate()
            .map(|(i, t)| {
                vec![
                    i.to_string(),
                    e.seeds[i].to_string(),
                    num(t.tg.unwrap_or(f64::NAN)),
                    u8::from(t.censored).to_string(),
                    u8::from(t.zero_peaks).to_string(),
                ]
            })
            .collect();
    out.write_csv(
        "tg.csv",
        &header(&["realization", "seed", "tg", "censored", "zero_peaks"]),
        &tg,
    )?;
    out.write_json(
        "stats.json",
        &EnsembleStats {
            realizations: e.len(),
            m_sigma: e.m_sigma,
            sigma_m: e.sigma_m,
            tg_mean: e.tg_mean,
            tg_median: e.tg_median,
            n_censored: e.n_censored,
        },
    )
}

fn ensemble(cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let e = ensemble_run(&cfg.quench, cfg.realizations, cfg.quench.seed)?;
    write_ensemble(&e, out)?;
    Ok(Summary {
        n_censored: e.n_censored,
        seeds: e.seeds,
    })
}

fn nm(cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let w = cfg.nm;
    let q = cfg.quench.with_time(TimeGrid::Windows {
        starts: vec![w.early, w.late],
        length: w.window,
        dt: w.dt,
    });
    let e = ensemble_run(&q, cfg.realizations, q.seed)?;
    let report = nm_window_comparison(&e, w.early, w.late, w.window)?;
    write_ensemble(&e, out)?;
    out.write_json("nm.json", &report)?;
    Ok(Summary {
        n_censored: e.n_censored,
        seeds: e.seeds,
    })
}

fn angle(cfg: &RunConfig, out: &mut OutputDir) -> Result<Summary> {
    let q = &cfg.quench;
    let ModelConfig::Connected {
        spec,
        mode,
        k,
        fill_basis,
        ..
    } = &q.model
    else {
        return Err(Error::config(
            "geometry",
            "angle-scan needs the connected model",
        ));
    };
    let options = q.model.connected_options();
    let sym = SymBreakTerm::sample(spec.n_sites, q.g, q.seed)?;
    let coup = CouplingTerm::sample(spec.m, *k, coupling_seed(q.seed))?;
    let decomp =
        diagonalize(&build_connected_hamiltonian(spec, &sym, &coup, *mode, options)?.post_quench)?;
    let fill_sym = match fill_basis {
        FillBasis::Unperturbed => sym.with_strength(0.0),
        FillBasis::Perturbed => sym.clone(),
    };
    let filling = BathFilling::new(&connected_bath_matrix(spec, &fill_sym, options)?, *mode)?;
    let n = cfg.angle_count;
    let thetas: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::PI * i as f64 / (n - 1) as f64)
        .collect();
    let scan = angle_scan(&decomp, &filling, &thetas, q.observables.dephase)?;
    let rows: Vec<Vec<String>> = scan
        .times()
        .iter()
        .zip(scan.values())
        .map(|(t, v)| vec![num(*t), num(*v)])
        .collect();
    out.write_csv("angle.csv", &header(&["theta", "estimate"]), &rows)?;
    Ok(Summary {
        seeds: vec![q.seed],
        n_censored: 0,
    })
}
