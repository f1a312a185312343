use serde::{Deserialize, Serialize};

use crate::engine::DephaseMode;
use crate::error::{Error, Result};
use crate::model::{ConnectedMode, ConnectedOptions, Geometry, LatticeSpec};
use crate::observables::{CorrelationKind, OccupancyCoherence};

/// Which bath Hamiltonian supplies the filled orbitals of the connected model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillBasis {
    /// Bath at `g = 0`.
    #[default]
    Unperturbed,
    /// Bath at the run's `g`.
    Perturbed,
}

/// Model selector and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Lattice {
        spec: LatticeSpec,
    },
    Connected {
        spec: LatticeSpec,
        mode: ConnectedMode,
        k: f64,
        fill_basis: FillBasis,
        include_onsite: bool,
    },
}

impl ModelConfig {
    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Ok(Self::Lattice {
            spec: LatticeSpec::torus(lx, ly)?,
        })
    }

    pub fn strip(lx: usize, ly: usize) -> Result<Self> {
        Ok(Self::Lattice {
            spec: LatticeSpec::strip(lx, ly)?,
        })
    }

    /// Connected model with `particles` bath fermions (`None` for one particle).
    pub fn connected(n_sites: usize, m: usize, particles: Option<usize>, k: f64) -> Result<Self> {
        Ok(Self::Connected {
            spec: LatticeSpec::fully_connected(n_sites, m)?,
            mode: match particles {
                Some(p) => ConnectedMode::ManyBody { particles: p },
                None => ConnectedMode::SingleParticle,
            },
            k,
            fill_basis: FillBasis::default(),
            include_onsite: false,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        match self {
            ModelConfig::Lattice { spec } | ModelConfig::Connected { spec, .. } => spec,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ModelConfig::Lattice { .. })
    }

    pub fn connected_options(&self) -> ConnectedOptions {
        match self {
            ModelConfig::Connected { include_onsite, .. } => ConnectedOptions {
                include_onsite: *include_onsite,
            },
            ModelConfig::Lattice { .. } => ConnectedOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec().validate()?;
        match self {
            ModelConfig::Lattice { spec } => {
                if !spec.geometry.is_2d() {
                    return Err(Error::config(
                        "geometry",
                        "lattice model needs torus or strip",
                    ));
                }
            }
            ModelConfig::Connected { spec, mode, k, .. } => {
                if spec.geometry != Geometry::FullyConnected {
                    return Err(Error::config(
                        "geometry",
                        "connected model needs fully_connected",
                    ));
                }
                if !(0.0..=1.0).contains(k) {
                    return Err(Error::config("k", format!("{k} outside [0, 1]")));
                }
                if let ConnectedMode::ManyBody { particles } = mode {
                    if *particles == 0 || *particles > spec.n_sites {
                        return Err(Error::config(
                            "particles",
                            format!("{particles} particles on {} sites", spec.n_sites),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampling times of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeGrid {
    /// `start, start + dt, …` up to and including `end` (within rounding).
    Linear {
        start: f64,
        end: f64,
        dt: f64,
    },
    /// `count` log-spaced times in `[start, end]`, optionally preceded by 0.
    Log {
        start: f64,
        end: f64,
        count: usize,
        include_zero: bool,
    },
    /// Uniform samples of spacing `dt` inside each `[start, start + length]`.
    Windows {
        starts: Vec<f64>,
        length: f64,
        dt: f64,
    },
    Explicit {
        times: Vec<f64>,
    },
}

impl TimeGrid {
    pub fn linear(start: f64, end: f64, dt: f64) -> Self {
        TimeGrid::Linear { start, end, dt }
    }

    pub fn log(start: f64, end: f64, count: usize) -> Self {
        TimeGrid::Log {
            start,
            end,
            count,
            include_zero: true,
        }
    }

    /// Strictly increasing sample times.
    pub fn times(&self) -> Result<Vec<f64>> {
        let times = match self {
            TimeGrid::Linear { start, end, dt } => {
                if !(*dt > 0.0)
                    || !(end >= start)
                    || !start.is_finite()
                    || !end.is_finite()
                    || *start < 0.0
                {
                    return Err(Error::config(
                        "time",
                        format!("bad linear grid [{start}, {end}] step {dt}"),
                    ));
                }
                let n = ((end - start) / dt + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * dt).collect()
            }
            TimeGrid::Log {
                start,
                end,
                count,
                include_zero,
            } => {
                if !(*start > 0.0) || !(end > start) || *count < 2 || !end.is_finite() {
                    return Err(Error::config(
                        "time",
                        format!("bad log grid [{start}, {end}] x {count}"),
                    ));
                }
                let (a, b) = (start.log10(), end.log10());
                let mut t: Vec<f64> = Vec::with_capacity(count + 1);
                if *include_zero {
                    t.push(0.0);
                }
                t.extend(
                    (0..*count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (*count - 1) as f64)),
                );
                t
            }
            TimeGrid::Windows { starts, length, dt } => {
                if !(*dt > 0.0) || !(*length > 0.0) || starts.is_empty() {
                    return Err(Error::config("time", "bad window grid"));
                }
                let n = (length / dt + 1e-9).floor() as usize;
                let mut t = Vec::new();
                for &s in starts {
                    if s < 0.0 {
                        return Err(Error::config("time", "window start must be >= 0"));
                    }
                    // offsets are added to the start so window boundaries are exact samples
                    t.extend((0..=n).map(|i| s + i as f64 * dt));
                }
                t
            }
            TimeGrid::Explicit { times } => times.clone(),
        };
        if times.is_empty() {
            return Err(Error::config("time", "empty time grid"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]))
            || times.iter().any(|t| !t.is_finite() || *t < 0.0)
        {
            return Err(Error::config(
                "time",
                "times must be finite, non-negative and strictly increasing",
            ));
        }
        Ok(times)
    }

    pub fn horizon(&self) -> Result<f64> {
        Ok(*self.times()?.last().expect("non-empty"))
    }
}

/// Parameters of the two equilibration-time definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TgParams {
    /// Height a local maximum must exceed to count as a reconstruction peak.
    pub peak_threshold: f64,
    /// A last peak later than this fraction of the horizon is censored.
    pub baseline_quantile: f64,
    /// Level the trace distance must stay below.
    pub threshold: f64,
    /// Number of consecutive samples below `threshold`.
    pub persistence: usize,
}

impl Default for TgParams {
    fn default() -> Self {
        Self {
            peak_threshold: 0.5,
            baseline_quantile: 0.9,
            threshold: 0.4,
            persistence: 5,
        }
    }
}

impl TgParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("peak_threshold", self.peak_threshold),
            ("baseline_quantile", self.baseline_quantile),
            ("threshold", self.threshold),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(name, format!("{v} outside (0, 1)")));
            }
        }
        if self.persistence == 0 {
            return Err(Error::config("persistence", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which optional series a quench records, and how.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub entropy: bool,
    pub bath_correlation: bool,
    pub correlation_kind: CorrelationKind,
    pub coherence: OccupancyCoherence,
    pub dephase: DephaseMode,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self {
            entropy: true,
            bath_correlation: true,
            correlation_kind: CorrelationKind::default(),
            coherence: OccupancyCoherence::default(),
            dephase: DephaseMode::default(),
        }
    }
}

/// Everything needed to run one paired quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchConfig {
    pub model: ModelConfig,
    pub g: f64,
    /// Seed of the realization (`r` directly, `r'` derived).
    pub seed: u64,
    pub time: TimeGrid,
    pub observables: ObservableSet,
    pub tg: TgParams,
}

impl QuenchConfig {
    pub fn new(model: ModelConfig, g: f64, seed: u64, time: TimeGrid) -> Self {
        Self {
            model,
            g,
            seed,
            time,
            observables: ObservableSet::default(),
            tg: TgParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::config(
                "g",
                format!("{} must be finite and non-negative", self.g),
            ));
        }
        self.time.times()?;
        self.tg.validate()
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn with_k(&self, k: f64) -> Self {
        let mut c = self.clone();
        if let ModelConfig::Connected { k: kk, .. } = &mut c.model {
            *kk = k;
        }
        c
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn with_time(&self, time: TimeGrid) -> Self {
        Self {
            time,
            ..self.clone()
        }
    }
}
