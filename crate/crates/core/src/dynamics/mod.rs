//! Closed-system propagation by Hermitian eigendecomposition and open-system
//! propagation of the Born–Markov master equation.

mod closed;
mod open;
mod sparse;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use closed::{diagonalize, evolve_pure, Propagator, SpectralBlock, Trajectory};
pub use open::{evolve_open, DecoherenceRates, OpenIntegrator, OpenOptions, DEFAULT_DT};

/// Strictly increasing, non-negative sample times in units of `1/ω_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("time grid is empty".into()));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidArgument("time grid values must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
        }
        Ok(TimeGrid { times })
    }

    /// `points` equispaced times in `(0, t_max]`.
    pub fn uniform(t_max: f64, points: usize) -> Result<Self> {
        if points == 0 || t_max.is_nan() || t_max <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs t_max > 0 and points >= 1 (got {t_max}, {points})"
            )));
        }
        Self::new((1..=points).map(|k| t_max * k as f64 / points as f64).collect())
    }

    /// 300 points over `(0, 6π]`.
    pub fn standard() -> Self {
        Self::uniform(6.0 * PI, 300).expect("static grid")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }
}
