//! JSON model configuration.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use recomb_core::dynamics::{DriftPolicy, ExactMethod};
use recomb_core::measure::{Measure, TypeSpace};
use recomb_core::moran::InitMode;
use recomb_core::rates::{Recombination, Style};
use recomb_core::Partition;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub alphabet_sizes: Vec<usize>,
    #[serde(default)]
    pub initial: InitialConfig,
    pub recombination: RecombinationConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Uniform,
    Dirac {
        #[serde(rename = "type")]
        letters: Vec<usize>,
    },
    Explicit {
        masses: Vec<TypeMass>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeMass {
    #[serde(rename = "type")]
    pub letters: Vec<usize>,
    pub mass: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecombinationConfig {
    pub style: Style,
    /// Event rate; required for probability style, implied for rate style.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
    /// Rate of faithful copying; rate style only.
    #[serde(default)]
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub partition: String,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t: Option<f64>,
    pub t_grid: Option<GridConfig>,
    pub dt: Option<f64>,
    #[serde(default)]
    pub drift: DriftPolicy,
    pub generations: Option<u64>,
    #[serde(rename = "N")]
    pub population: Option<u64>,
    #[serde(rename = "N_list")]
    pub population_list: Option<Vec<u64>>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub method: Option<ExactMethod>,
    #[serde(default)]
    pub init: InitMode,
    /// Initial state of the partitioning process; the coarsest partition by default.
    pub start: Option<String>,
}

/// Error in the configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e.into()))
}

impl ModelConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).map_err(config_error)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text).context("invalid config")?;
        Ok(cfg)
    }

    pub fn sites(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn space(&self) -> anyhow::Result<TypeSpace> {
        TypeSpace::new(self.alphabet_sizes.clone()).context("field `alphabet_sizes`").map_err(config_error)
    }

    pub fn initial(&self) -> anyhow::Result<Measure<f64>> {
        let space = self.space()?;
        let m = match &self.initial {
            InitialConfig::Uniform => Measure::uniform(&space),
            InitialConfig::Dirac { letters } => Measure::dirac(&space, letters).context("field `initial.type`").map_err(config_error)?,
            InitialConfig::Explicit { masses } => {
                let m = Measure::from_pairs(&space, masses.iter().map(|e| (e.letters.clone(), e.mass)))
                    .context("field `initial.masses`")
                    .map_err(config_error)?;
                if !m.is_probability(1e-12) {
                    return Err(config_error(anyhow::anyhow!(
                        "field `initial.masses`: masses sum to {}, not 1",
                        m.total_mass()
                    )));
                }
                m
            }
        };
        Ok(m)
    }

    pub fn recombination(&self) -> anyhow::Result<Recombination<f64>> {
        let rc = &self.recombination;
        let n = self.sites();
        let mut entries = Vec::with_capacity(rc.entries.len());
        for (i, e) in rc.entries.iter().enumerate() {
            let a: Partition = e
                .partition
                .parse()
                .with_context(|| format!("field `recombination.entries[{i}].partition`"))
                .map_err(config_error)?;
            entries.push((a, e.value));
        }
        let d = match rc.style {
            Style::Probability => {
                if rc.residual.is_some() {
                    return Err(config_error(anyhow::anyhow!(
                        "field `recombination.residual` only applies to rate style; probability style leaves 1 - sum(r) implicit"
                    )));
                }
                let mu = rc
                    .mu
                    .ok_or_else(|| config_error(anyhow::anyhow!("field `recombination.mu` is required for probability style")))?;
                Recombination::from_probabilities(n, mu, entries)
            }
            Style::Rate => {
                if rc.mu.is_some() {
                    return Err(config_error(anyhow::anyhow!(
                        "field `recombination.mu` is implied by rate style; give `residual` instead"
                    )));
                }
                Recombination::from_rates(n, entries, rc.residual.unwrap_or(0.0))
            }
        };
        d.context("field `recombination`").map_err(config_error)
    }

    /// Times from `run.t_grid`, else the single time `run.t`.
    pub fn grid(&self) -> anyhow::Result<Vec<f64>> {
        let grid = match (&self.run.t_grid, self.run.t) {
            (Some(GridConfig::List(v)), _) => v.clone(),
            (Some(GridConfig::Range { start, stop, steps }), _) => {
                if *steps == 0 {
                    return Err(config_error(anyhow::anyhow!("field `run.t_grid.steps` must be positive")));
                }
                (0..=*steps).map(|k| start + (stop - start) * k as f64 / *steps as f64).collect()
            }
            (None, Some(t)) => vec![t],
            (None, None) => return Err(config_error(anyhow::anyhow!("field `run.t` or `run.t_grid` is required"))),
        };
        if grid.is_empty() {
            return Err(config_error(anyhow::anyhow!("field `run.t_grid` is empty")));
        }
        if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(config_error(anyhow::anyhow!("field `run.t_grid`: times must be finite and nonnegative")));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_error(anyhow::anyhow!("field `run.t_grid` must be strictly increasing")));
        }
        Ok(grid)
    }

    /// The single time `run.t`, or the last grid point.
    pub fn time(&self) -> anyhow::Result<f64> {
        match self.run.t {
            Some(t) if !(t >= 0.0) || !t.is_finite() => {
                Err(config_error(anyhow::anyhow!("field `run.t` must be finite and nonnegative")))
            }
            Some(t) => Ok(t),
            None => Ok(*self.grid()?.last().expect("nonempty grid")),
        }
    }

    pub fn dt(&self) -> anyhow::Result<f64> {
        let dt = self.run.dt.ok_or_else(|| config_error(anyhow::anyhow!("field `run.dt` is required")))?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(config_error(anyhow::anyhow!("field `run.dt` must be positive, got {dt}")));
        }
        Ok(dt)
    }

    pub fn population(&self) -> anyhow::Result<u64> {
        match self.run.population {
            Some(0) => Err(config_error(anyhow::anyhow!("field `run.N` must be positive"))),
            Some(n) => Ok(n),
            None => Err(config_error(anyhow::anyhow!("field `run.N` is required"))),
        }
    }

    pub fn replicates(&self, default: u64) -> anyhow::Result<u64> {
        match self.run.replicates {
            Some(0) => Err(config_error(anyhow::anyhow!("field `run.replicates` must be positive"))),
            Some(r) => Ok(r),
            None => Ok(default),
        }
    }

    pub fn start_partition(&self) -> anyhow::Result<Partition> {
        match &self.run.start {
            None => Ok(Partition::coarsest(recomb_core::SiteSet::full(self.sites()))),
            Some(s) => {
                let p: Partition = s.parse().context("field `run.start`").map_err(config_error)?;
                if p.ground() != recomb_core::SiteSet::full(self.sites()) {
                    return Err(config_error(anyhow::anyhow!(
                        "field `run.start`: {p} is not a partition of 1..={}",
                        self.sites()
                    )));
                }
                Ok(p)
            }
        }
    }
}
