//! Run configuration: TOML files or a previous run's `meta.json`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Scenario, Window, MAP_COUPLINGS};
use crate::dynamics::{DecoherenceRates, OpenOptions, TimeGrid};
use crate::estimation::{InitialState, StencilConfig, DEFAULT_EPS_REL};
use crate::hilbert::HilbertDims;
use crate::homodyne::QuadratureGrid;
use crate::model::SystemParams;
use crate::{Error, Result};

use super::Subcommand;

/// Sample times: either an explicit list or `points` equispaced values in
/// `(0, t_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

impl TimeSpec {
    pub fn uniform(t_max: f64, points: usize) -> Self {
        TimeSpec { t_max: Some(t_max), points: Some(points), times: None }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        match (&self.times, self.t_max, self.points) {
            (Some(times), None, None) => TimeGrid::new(times.clone()),
            (None, Some(t_max), Some(points)) => TimeGrid::uniform(t_max, points),
            _ => Err(Error::InvalidArgument("[time] needs either `times` or both `t_max` and `points`".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomodyneConfig {
    /// Coarse local-oscillator phases scanned before refinement.
    pub phases: usize,
    pub grid: QuadratureGrid,
}

impl Default for HomodyneConfig {
    fn default() -> Self {
        HomodyneConfig { phases: 120, grid: QuadratureGrid::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapConfig {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub windows: Vec<Window>,
    pub scenarios: Vec<Scenario>,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            g1: MAP_COUPLINGS.to_vec(),
            g2: MAP_COUPLINGS.to_vec(),
            windows: Window::ALL.to_vec(),
            scenarios: Scenario::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Closed dynamics at the configured cutoffs against doubled cutoffs.
    #[default]
    ClosedCutoff,
    /// Open dynamics at the configured cutoffs against `fine_dims`.
    OpenCutoff,
    /// Open dynamics with step `dt` against `dt/2`.
    OpenStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub study: Study,
    /// Refined cutoffs of the open cutoff study.
    pub fine_cavity: usize,
    pub fine_mechanics: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { study: Study::ClosedCutoff, fine_cavity: 20, fine_mechanics: 20 }
    }
}

/// Everything a run depends on. Optional sections receive subcommand-specific
/// defaults in [`RunConfig::resolve`]; the resolved form is what `meta.json`
/// records.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemParams,
    pub dims: Option<HilbertDims>,
    pub time: Option<TimeSpec>,
    pub initial: InitialState,
    pub stencil: StencilConfig,
    pub eps_rel: Option<f64>,
    pub rates: DecoherenceRates,
    pub integrator: OpenOptions,
    pub homodyne: HomodyneConfig,
    pub map: MapConfig,
    pub convergence: ConvergenceConfig,
}

/// Written next to the outputs; also accepted as `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub version: String,
    pub subcommand: String,
    pub homodyne: bool,
    pub config: RunConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    /// Reads a TOML config, or the `config` section of a `meta.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let meta: Meta =
                serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            Ok(meta.config)
        } else {
            Self::from_toml_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
        }
    }

    /// Fills subcommand-dependent defaults: open-system runs use the reduced
    /// 15×15 cutoffs and 100 points over `(0, 2π]`, everything else 25×25
    /// and 300 points over `(0, 6π]`.
    pub fn resolve(mut self, sub: Subcommand) -> Result<Self> {
        let open = matches!(sub, Subcommand::Open)
            || (sub == Subcommand::Convergence && self.convergence.study != Study::ClosedCutoff);
        self.dims.get_or_insert(if open { HilbertDims::reduced() } else { HilbertDims::default() });
        self.time.get_or_insert(if open { TimeSpec::uniform(2.0 * PI, 100) } else { TimeSpec::uniform(6.0 * PI, 300) });
        self.eps_rel.get_or_insert(DEFAULT_EPS_REL);
        self.validate(sub)?;
        Ok(self)
    }

    pub fn dims(&self) -> HilbertDims {
        self.dims.unwrap_or_default()
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        match &self.time {
            Some(t) => t.grid(),
            None => Ok(TimeGrid::standard()),
        }
    }

    pub fn eps_rel(&self) -> f64 {
        self.eps_rel.unwrap_or(DEFAULT_EPS_REL)
    }

    pub fn fine_dims(&self) -> Result<HilbertDims> {
        let d = self.dims();
        Ok(HilbertDims::new(self.convergence.fine_cavity, self.convergence.fine_mechanics)?
            .with_tolerance(d.truncation_tolerance))
    }

    /// Range checks and a trial construction of the initial state, so that
    /// cutoffs too small for the requested amplitudes fail before any work.
    pub fn validate(&self, sub: Subcommand) -> Result<()> {
        self.system.validate()?;
        let d = self.dims();
        d.validate()?;
        self.grid()?;
        self.stencil.validate()?;
        let eps = self.eps_rel();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("eps_rel must lie in (0, 1), got {eps}")));
        }
        self.initial.ensemble(&d)?;
        match sub {
            Subcommand::Entropy if !matches!(self.initial, InitialState::Pure { .. }) => {
                return Err(Error::InvalidArgument("entropy needs a pure initial state".into()));
            }
            Subcommand::Joint => {
                self.homodyne.grid.validate()?;
                if self.homodyne.phases < 3 {
                    return Err(Error::InvalidArgument("[homodyne] phases must be >= 3".into()));
                }
            }
            Subcommand::Map => {
                if self.map.g1.is_empty()
                    || self.map.g2.is_empty()
                    || self.map.windows.is_empty()
                    || self.map.scenarios.is_empty()
                {
                    return Err(Error::InvalidArgument("[map] lists must be non-empty".into()));
                }
                for &g in self.map.g1.iter().chain(&self.map.g2) {
                    self.system.with_couplings(g, g).validate()?;
                }
            }
            Subcommand::Open => self.open_checks()?,
            Subcommand::Convergence => match self.convergence.study {
                Study::ClosedCutoff => {
                    if !matches!(self.initial, InitialState::Pure { .. }) {
                        return Err(Error::InvalidArgument("closed cutoff study needs a pure initial state".into()));
                    }
                    self.initial.ensemble(&d.doubled())?;
                }
                Study::OpenCutoff => {
                    self.open_checks()?;
                    self.initial.ensemble(&self.fine_dims()?)?;
                }
                Study::OpenStep => self.open_checks()?,
            },
            _ => {}
        }
        Ok(())
    }

    fn open_checks(&self) -> Result<()> {
        self.rates.validate()?;
        let dt = self.integrator.dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("[integrator] dt must be positive, got {dt}")));
        }
        Ok(())
    }
}
