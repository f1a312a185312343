use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::DephaseMode;
use crate::error::{Error, Result};
use crate::experiments::{
    FillBasis, HorizonRule, HorizonSpacing, ModelConfig, ObservableSet, QuenchConfig,
    ScalingParameter, TgParams, TimeGrid,
};
use crate::model::{ConnectedMode, LatticeSpec};
use crate::observables::{CorrelationKind, OccupancyCoherence};

use super::Command;

/// Raw file contents. Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub geometry: Option<String>,
    #[serde(alias = "Lx")]
    pub lx: Option<usize>,
    #[serde(alias = "Ly")]
    pub ly: Option<usize>,
    pub system_sites: Option<[usize; 2]>,
    pub n_sites: Option<usize>,
    pub m: Option<usize>,
    pub mode: Option<String>,
    pub particles: Option<usize>,
    pub k: Option<f64>,
    pub g: Option<f64>,
    pub seed: Option<u64>,
    pub fill_basis: Option<FillBasis>,
    pub include_onsite: Option<bool>,
    pub realizations: Option<usize>,
    pub time: Option<TimeSection>,
    pub observables: Option<ObservablesSection>,
    pub tg: Option<TgSection>,
    pub scaling: Option<ScalingSection>,
    pub nm: Option<NmSection>,
    pub spectrum: Option<SpectrumSection>,
    pub angle: Option<AngleSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub kind: Option<String>,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub dt: Option<f64>,
    pub count: Option<usize>,
    pub include_zero: Option<bool>,
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    pub entropy: Option<bool>,
    pub bath_correlation: Option<bool>,
    pub correlation_kind: Option<CorrelationKind>,
    pub coherence: Option<OccupancyCoherence>,
    pub dephase_blocks: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TgSection {
    pub peak_threshold: Option<f64>,
    pub baseline_quantile: Option<f64>,
    pub threshold: Option<f64>,
    pub persistence: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub parameter: Option<ScalingParameter>,
    pub grid: Option<Vec<f64>>,
    pub horizon_factor: Option<f64>,
    pub horizon_exponent: Option<f64>,
    pub spacing: Option<String>,
    pub dt: Option<f64>,
    pub log_start: Option<f64>,
    pub log_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmSection {
    pub early: Option<f64>,
    pub late: Option<f64>,
    pub window: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub parameter: Option<ScalingParameter>,
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSection {
    pub count: Option<usize>,
}

/// Settings of a scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSettings {
    pub parameter: ScalingParameter,
    pub grid: Vec<f64>,
    pub horizon: HorizonRule,
}

/// Non-Markovianity windows `[early, early + window]` and `[late, late + window]`
/// sampled every `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmSettings {
    pub early: f64,
    pub late: f64,
    pub window: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    pub parameter: ScalingParameter,
    pub grid: Vec<f64>,
}

/// Fully normalized run configuration, echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub quench: QuenchConfig,
    pub realizations: usize,
    pub scaling: ScalingSettings,
    pub nm: NmSettings,
    pub spectrum: SpectrumSettings,
    pub angle_count: usize,
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn field_of(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string())
}

/// Parses and normalizes the file at `path` for `command`.
pub fn validate_config(path: &Path, command: Command) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, command)
}

/// Parses and normalizes TOML text for `command`.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig> {
    let raw: FileConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        Error::config(field_of(&msg), msg)
    })?;
    normalize(raw, command)
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(
            field,
            format!("{v} must be positive and finite"),
        ))
    }
}

fn model_config(raw: &FileConfig, command: Command) -> Result<ModelConfig> {
    let default_geometry = match command {
        Command::QuenchConnected | Command::AngleScan => "fully_connected",
        _ => "torus",
    };
    let geometry = raw.geometry.as_deref().unwrap_or(default_geometry);
    let lattice_only = matches!(command, Command::QuenchTorus);
    let connected_only = matches!(command, Command::QuenchConnected | Command::AngleScan);
    match geometry {
        "torus" | "strip" => {
            if connected_only {
                return Err(Error::config(
                    "geometry",
                    format!("{geometry} not allowed for {}", command.name()),
                ));
            }
            let lx = raw.lx.unwrap_or(10);
            let ly = raw.ly.unwrap_or(10);
            let spec = if geometry == "torus" {
                LatticeSpec::torus(lx, ly)
            } else {
                LatticeSpec::strip(lx, ly)
            }
            .map_err(|e| Error::config("lx", e.to_string()))?;
            let spec = match raw.system_sites {
                Some([a, b]) => spec
                    .with_system_sites(a, b)
                    .map_err(|e| Error::config("system_sites", e.to_string()))?,
                None => spec,
            };
            Ok(ModelConfig::Lattice { spec })
        }
        "fully_connected" => {
            if lattice_only {
                return Err(Error::config(
                    "geometry",
                    format!("{geometry} not allowed for {}", command.name()),
                ));
            }
            let spectrum = matches!(command, Command::SpectrumSweep);
            let n = raw.n_sites.unwrap_or(if spectrum { 8 } else { 12 });
            let m = raw.m.unwrap_or(2);
            if m > n {
                return Err(Error::config("m", format!("m = {m} exceeds n_sites = {n}")));
            }
            let spec = LatticeSpec::fully_connected(n, m)
                .map_err(|e| Error::config("n_sites", e.to_string()))?;
            let default_mode = if spectrum {
                "single_particle"
            } else {
                "many_body"
            };
            let mode = match raw.mode.as_deref().unwrap_or(default_mode) {
                "single_particle" => {
                    if raw.particles.is_some_and(|p| p != 1) {
                        return Err(Error::config(
                            "particles",
                            "single_particle mode holds exactly one particle",
                        ));
                    }
                    ConnectedMode::SingleParticle
                }
                "many_body" => ConnectedMode::ManyBody {
                    particles: raw.particles.unwrap_or(n / 4),
                },
                other => return Err(Error::config("mode", format!("unknown mode `{other}`"))),
            };
            Ok(ModelConfig::Connected {
                spec,
                mode,
                k: raw.k.unwrap_or(1.0),
                fill_basis: raw.fill_basis.unwrap_or_default(),
                include_onsite: raw.include_onsite.unwrap_or(false),
            })
        }
        other => Err(Error::config(
            "geometry",
            format!("unknown geometry `{other}`"),
        )),
    }
}

fn time_grid(raw: Option<&TimeSection>, lattice: bool) -> Result<TimeGrid> {
    let t = match raw {
        Some(t) => t,
        None => &TimeSection::default(),
    };
    let kind = t.kind.as_deref().unwrap_or(if t.times.is_some() {
        "explicit"
    } else if lattice {
        "linear"
    } else {
        "log"
    });
    let grid = match kind {
        "linear" => TimeGrid::Linear {
            start: t.start.unwrap_or(0.0),
            end: t.end.unwrap_or(2000.0),
            dt: t.dt.unwrap_or(0.5),
        },
        "log" => TimeGrid::Log {
            start: t.start.unwrap_or(1.0),
            end: t.end.unwrap_or(1e5),
            count: t.count.unwrap_or(400),
            include_zero: t.include_zero.unwrap_or(true),
        },
        "explicit" => TimeGrid::Explicit {
            times: t
                .times
                .clone()
                .ok_or_else(|| Error::config("time.times", "explicit grid needs `times`"))?,
        },
        other => {
            return Err(Error::config(
                "time.kind",
                format!("unknown grid kind `{other}`"),
            ))
        }
    };
    grid.times().map_err(|e| match e {
        Error::Config { message, .. } => Error::config("time", message),
        other => other,
    })?;
    Ok(grid)
}

fn normalize(raw: FileConfig, command: Command) -> Result<RunConfig> {
    let model = model_config(&raw, command)?;
    let lattice = model.is_lattice();
    let scaling_parameter = raw
        .scaling
        .as_ref()
        .and_then(|s| s.parameter)
        .unwrap_or(ScalingParameter::G);
    if lattice && scaling_parameter == ScalingParameter::K && command == Command::TgScaling {
        return Err(Error::config(
            "scaling.parameter",
            "k sweeps need the connected model",
        ));
    }
    let default_g = if lattice {
        0.0
    } else if command == Command::TgScaling && scaling_parameter == ScalingParameter::K {
        1.0
    } else {
        0.1
    };
    let g = raw.g.unwrap_or(default_g);
    if !(g >= 0.0 && g.is_finite()) {
        return Err(Error::config(
            "g",
            format!("{g} must be finite and non-negative"),
        ));
    }

    let o = raw.observables.as_ref();
    let observables = ObservableSet {
        entropy: o.and_then(|o| o.entropy).unwrap_or(true),
        bath_correlation: o.and_then(|o| o.bath_correlation).unwrap_or(true),
        correlation_kind: o.and_then(|o| o.correlation_kind).unwrap_or_default(),
        coherence: o.and_then(|o| o.coherence).unwrap_or_default(),
        dephase: if o.and_then(|o| o.dephase_blocks).unwrap_or(false) {
            DephaseMode::DegenerateBlocks
        } else {
            DephaseMode::Eigenvectors
        },
    };
    let t = raw.tg.as_ref();
    let d = TgParams::default();
    let tg = TgParams {
        peak_threshold: t.and_then(|t| t.peak_threshold).unwrap_or(d.peak_threshold),
        baseline_quantile: t
            .and_then(|t| t.baseline_quantile)
            .unwrap_or(d.baseline_quantile),
        threshold: t.and_then(|t| t.threshold).unwrap_or(d.threshold),
        persistence: t.and_then(|t| t.persistence).unwrap_or(if lattice {
            d.persistence
        } else {
            20
        }),
    };
    tg.validate()?;

    let quench = QuenchConfig {
        time: time_grid(raw.time.as_ref(), lattice)?,
        model,
        g,
        seed: raw.seed.unwrap_or(1),
        observables,
        tg,
    };
    quench.validate()?;

    let s = raw.scaling.as_ref();
    let scaling_grid = match s.and_then(|s| s.grid.clone()) {
        Some(grid) => grid,
        None if lattice => vec![0.003, 0.01, 0.03, 0.1],
        None if scaling_parameter == ScalingParameter::K => logspace(-1.5, 0.0, 7),
        None => logspace(-3.5, -2.0, 7),
    };
    for &p in &scaling_grid {
        positive("scaling.grid", p)?;
    }
    let spacing =
        match s
            .and_then(|s| s.spacing.as_deref())
            .unwrap_or(if lattice { "linear" } else { "log" })
        {
            "linear" => HorizonSpacing::Linear {
                dt: positive("scaling.dt", s.and_then(|s| s.dt).unwrap_or(0.5))?,
            },
            "log" => HorizonSpacing::Log {
                start: positive(
                    "scaling.log_start",
                    s.and_then(|s| s.log_start).unwrap_or(1.0),
                )?,
                count: s.and_then(|s| s.log_count).unwrap_or(400),
            },
            other => {
                return Err(Error::config(
                    "scaling.spacing",
                    format!("unknown spacing `{other}`"),
                ))
            }
        };
    let scaling = ScalingSettings {
        parameter: scaling_parameter,
        grid: scaling_grid,
        horizon: HorizonRule {
            factor: positive(
                "scaling.horizon_factor",
                s.and_then(|s| s.horizon_factor).unwrap_or(100.0),
            )?,
            exponent: s
                .and_then(|s| s.horizon_exponent)
                .unwrap_or(if lattice { 1.0 } else { 2.0 }),
            spacing,
        },
    };

    let n = raw.nm.as_ref();
    let nm = NmSettings {
        early: n.and_then(|n| n.early).unwrap_or(50.0),
        late: n.and_then(|n| n.late).unwrap_or(1e8),
        window: positive("nm.window", n.and_then(|n| n.window).unwrap_or(200.0))?,
        dt: positive("nm.dt", n.and_then(|n| n.dt).unwrap_or(0.5))?,
    };
    if !(nm.early >= 0.0 && nm.late > nm.early + nm.window) {
        return Err(Error::config(
            "nm.late",
            "windows must be ordered and disjoint",
        ));
    }

    let sp = raw.spectrum.as_ref();
    let mut spectrum_grid = vec![0.0];
    spectrum_grid.extend(logspace(-6.0, -3.0, 13));
    let spectrum = SpectrumSettings {
        parameter: sp.and_then(|s| s.parameter).unwrap_or(ScalingParameter::G),
        grid: sp.and_then(|s| s.grid.clone()).unwrap_or(spectrum_grid),
    };
    if spectrum.grid.is_empty() || spectrum.grid.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::config(
            "spectrum.grid",
            "grid must be non-empty and non-negative",
        ));
    }
    if lattice && spectrum.parameter == ScalingParameter::K {
        return Err(Error::config(
            "spectrum.parameter",
            "k sweeps need the connected model",
        ));
    }

    let realizations = raw.realizations.unwrap_or(20);
    if realizations == 0 {
        return Err(Error::config("realizations", "must be at least 1"));
    }
    let angle_count = raw.angle.as_ref().and_then(|a| a.count).unwrap_or(91);
    if angle_count < 2 {
        return Err(Error::config("angle.count", "need at least 2 angles"));
    }
    Ok(RunConfig {
        quench,
        realizations,
        scaling,
        nm,
        spectrum,
        angle_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(r: Result<RunConfig>) -> String {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_torus_gets_defaults() {
        let c = parse_config(
            "geometry = \"torus\"\nlx = 6\nly = 6\ng = 0.01\n",
            Command::QuenchTorus,
        )
        .unwrap();
        assert_eq!(c.quench.model.spec().n_sites, 36);
        assert_eq!(c.quench.g, 0.01);
        assert_eq!(c.quench.time, TimeGrid::linear(0.0, 2000.0, 0.5));
        assert_eq!(c.quench.tg, TgParams::default());
        assert_eq!(c.realizations, 20);
    }

    #[test]
    fn connected_defaults() {
        let c = parse_config("", Command::QuenchConnected).unwrap();
        let ModelConfig::Connected { spec, mode, k, .. } = &c.quench.model else {
            panic!("expected connected model")
        };
        assert_eq!((spec.n_sites, spec.m, *k), (12, 2, 1.0));
        assert_eq!(*mode, ConnectedMode::ManyBody { particles: 3 });
        assert_eq!(c.quench.tg.persistence, 20);
    }

    #[test]
    fn rejections_name_the_field() {
        assert_eq!(
            field(parse_config(
                "geometry = \"fully_connected\"\nn_sites = 4\nm = 6\n",
                Command::TgScaling
            )),
            "m"
        );
        assert_eq!(
            field(parse_config(
                "[tg]\nthreshold = 1.5\n",
                Command::QuenchTorus
            )),
            "threshold"
        );
        assert_eq!(
            field(parse_config("colour = 3\n", Command::QuenchTorus)),
            "colour"
        );
        assert_eq!(
            field(parse_config(
                "geometry = \"torus\"\n",
                Command::QuenchConnected
            )),
            "geometry"
        );
        assert_eq!(field(parse_config("g = -1.0\n", Command::QuenchTorus)), "g");
    }
}
