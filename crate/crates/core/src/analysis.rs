//! Derived quantities over scans: von Neumann entropies, global-to-subsystem
//! efficiency ratios, optimal-subsystem maps, closed-to-open information-loss
//! ratios and truncation / step convergence studies.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{diagonalize, evolve_open, DecoherenceRates, OpenOptions, TimeGrid};
use crate::estimation::{fisher_scan, FisherEntry, FisherRecord, InitialState, ScanMode, StencilConfig};
use crate::hilbert::{number, pauli, DensityMatrix, HilbertDims, PartialTrace, Pauli, PureState, Subsystem};
use crate::model::{build_hamiltonian, initial_state_pure, Coupling, SystemParams};
use crate::{Error, Result, C64};

/// Eigenvalues at or below this are treated as zero in the entropy sum.
const ENTROPY_CUTOFF: f64 = 1e-14;

/// Tolerance when matching times of different scans.
const TIME_MATCH: f64 = 1e-12;

/// `S(ρ) = −Σ p_k log₂ p_k`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let s: f64 = rho.eigenvalues()?.iter().filter(|&&p| p > ENTROPY_CUTOFF).map(|&p| -p * p.log2()).sum();
    Ok(s.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub t: f64,
    pub qubit: f64,
    pub cavity: f64,
    pub mechanics: f64,
}

impl EntropyRecord {
    pub fn get(&self, s: Subsystem) -> f64 {
        match s {
            Subsystem::Qubit => self.qubit,
            Subsystem::Cavity => self.cavity,
            Subsystem::Mechanics => self.mechanics,
        }
    }
}

/// Subsystem entropies along the closed evolution of `|g⟩ ⊗ |α⟩ ⊗ |β⟩`.
pub fn entropy_scan(
    p: &SystemParams,
    d: &HilbertDims,
    alpha: C64,
    beta: C64,
    grid: &TimeGrid,
) -> Result<Vec<EntropyRecord>> {
    p.validate()?;
    let prop = diagonalize(&build_hamiltonian(p, d)?)?;
    let psi0 = initial_state_pure(alpha, beta, d)?;
    grid.times()
        .par_iter()
        .map(|&t| {
            let psi = prop.evolve(&psi0, t)?;
            let s = |k: Subsystem| -> Result<f64> { von_neumann_entropy(&psi.partial_trace(d, k)?) };
            Ok(EntropyRecord {
                t,
                qubit: s(Subsystem::Qubit)?,
                cavity: s(Subsystem::Cavity)?,
                mechanics: s(Subsystem::Mechanics)?,
            })
        })
        .collect()
}

/// Time window over which the optimal time `t*` is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// `t ≤ 2π`.
    Short,
    /// `t ≤ 6π`.
    Long,
}

impl Window {
    pub const ALL: [Window; 2] = [Window::Short, Window::Long];

    pub fn t_max(self) -> f64 {
        match self {
            Window::Short => 2.0 * PI,
            Window::Long => 6.0 * PI,
        }
    }

    pub fn contains(self, t: f64) -> bool {
        t <= self.t_max() * (1.0 + 1e-12)
    }

    pub fn label(self) -> &'static str {
        match self {
            Window::Short => "short",
            Window::Long => "long",
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which bound an efficiency ratio compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `(Q_11)⁻¹`.
    SingleG1,
    /// `(Q_22)⁻¹`.
    SingleG2,
    /// `(Q⁻¹)_11`.
    NuisanceG1,
    /// `(Q⁻¹)_22`.
    NuisanceG2,
    /// `Tr[Q⁻¹]`.
    Joint,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::SingleG1, Scenario::SingleG2, Scenario::NuisanceG1, Scenario::NuisanceG2, Scenario::Joint];

    pub fn single(target: Coupling) -> Self {
        match target {
            Coupling::G1 => Scenario::SingleG1,
            Coupling::G2 => Scenario::SingleG2,
        }
    }

    pub fn nuisance(target: Coupling) -> Self {
        match target {
            Coupling::G1 => Scenario::NuisanceG1,
            Coupling::G2 => Scenario::NuisanceG2,
        }
    }

    pub fn bound(self, e: &FisherEntry) -> f64 {
        match self {
            Scenario::SingleG1 => e.inv_single[0],
            Scenario::SingleG2 => e.inv_single[1],
            Scenario::NuisanceG1 => e.nuisance[0],
            Scenario::NuisanceG2 => e.nuisance[1],
            Scenario::Joint => e.scalar,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::SingleG1 => "single_g1",
            Scenario::SingleG2 => "single_g2",
            Scenario::NuisanceG1 => "nuisance_g1",
            Scenario::NuisanceG2 => "nuisance_g2",
            Scenario::Joint => "joint",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Efficiency of the best subsystem at its optimal time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRecord {
    pub g1: f64,
    pub g2: f64,
    pub window: Window,
    pub scenario: Scenario,
    pub best_subsystem: Subsystem,
    /// Global bound over subsystem bound at `t*`.
    pub eta: f64,
    pub t_star: f64,
    /// Subsystem bounds skipped because they were infinite.
    pub excluded: usize,
}

/// `η = bound_global / bound_sub` at `t*`, the window time at which the best
/// subsystem bound is smallest. Ties go to the earliest time and then to the
/// subsystem order qubit, cavity, mechanics; infinite bounds are skipped.
pub fn efficiency(
    records: &[FisherRecord],
    window: Window,
    scenario: Scenario,
    p: &SystemParams,
) -> Result<EfficiencyRecord> {
    let mut best: Option<(usize, Subsystem, f64)> = None;
    let mut excluded = 0;
    let mut in_window = 0;
    for (i, r) in records.iter().enumerate().filter(|(_, r)| window.contains(r.t)) {
        in_window += 1;
        for s in Subsystem::ALL {
            let b = scenario.bound(r.subsystem(s));
            if !b.is_finite() {
                excluded += 1;
                continue;
            }
            if best.is_none_or(|(_, _, cur)| b < cur) {
                best = Some((i, s, b));
            }
        }
    }
    if in_window == 0 {
        return Err(Error::InvalidArgument(format!("no records inside the {window} window")));
    }
    if excluded > 0 {
        log::debug!("{excluded} infinite {scenario} bounds excluded from the {window}-window argmin");
    }
    let (i, s, sub) = best
        .ok_or_else(|| Error::InvalidArgument(format!("every {scenario} bound in the {window} window is infinite")))?;
    let global = scenario.bound(&records[i].global);
    Ok(EfficiencyRecord {
        g1: p.g1,
        g2: p.g2,
        window,
        scenario,
        best_subsystem: s,
        eta: global / sub,
        t_star: records[i].t,
        excluded,
    })
}

/// Single-parameter efficiency `(Q_ii)⁻¹_global / (Q_ii)⁻¹_sub`.
pub fn efficiency_single(
    records: &[FisherRecord],
    window: Window,
    target: Coupling,
    p: &SystemParams,
) -> Result<EfficiencyRecord> {
    efficiency(records, window, Scenario::single(target), p)
}

/// Nuisance efficiency `(Q⁻¹)_ii,global / (Q⁻¹)_ii,sub`.
pub fn efficiency_nuisance(
    records: &[FisherRecord],
    window: Window,
    target: Coupling,
    p: &SystemParams,
) -> Result<EfficiencyRecord> {
    efficiency(records, window, Scenario::nuisance(target), p)
}

/// Closed-to-open ratio of global bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRatio {
    pub scenario: Scenario,
    pub window: Window,
    pub t_star: f64,
    pub closed: f64,
    pub open: f64,
    /// `closed / open`; 1 means no information lost to the environment.
    pub mu: f64,
}

/// `μ = bound_global,closed / bound_global,open` at `t*`, the window time at
/// which the closed global bound is smallest (earliest on ties).
pub fn global_loss_ratio(
    closed: &[FisherRecord],
    open: &[FisherRecord],
    window: Window,
    scenario: Scenario,
) -> Result<LossRatio> {
    if closed.len() != open.len()
        || closed.iter().zip(open).any(|(a, b)| (a.t - b.t).abs() > TIME_MATCH * a.t.abs().max(1.0))
    {
        return Err(Error::InvalidArgument("closed and open scans use different time grids".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in closed.iter().enumerate().filter(|(_, r)| window.contains(r.t)) {
        let b = scenario.bound(&r.global);
        if b.is_finite() && best.is_none_or(|(_, cur)| b < cur) {
            best = Some((i, b));
        }
    }
    let (i, c) = best
        .ok_or_else(|| Error::InvalidArgument(format!("no finite closed {scenario} bound in the {window} window")))?;
    let o = scenario.bound(&open[i].global);
    Ok(LossRatio { scenario, window, t_star: closed[i].t, closed: c, open: o, mu: c / o })
}

/// Settings shared by every cell of an optimal-subsystem map.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub base: SystemParams,
    pub dims: HilbertDims,
    pub stencil: StencilConfig,
    pub grid: TimeGrid,
    pub initial: InitialState,
    pub g1_values: Vec<f64>,
    pub g2_values: Vec<f64>,
    pub windows: Vec<Window>,
    pub scenarios: Vec<Scenario>,
}

/// Default coupling grid of the maps.
pub const MAP_COUPLINGS: [f64; 5] = [0.01, 0.05, 0.1, 0.15, 0.2];

/// Sweeps `(g1, g2)` and returns one efficiency record per cell, window and
/// scenario, ordered by `g1`, then `g2`, window and scenario.
pub fn optimal_subsystem_map(spec: &MapSpec) -> Result<Vec<EfficiencyRecord>> {
    let cells: Vec<(f64, f64)> =
        spec.g1_values.iter().flat_map(|&a| spec.g2_values.iter().map(move |&b| (a, b))).collect();
    let per_cell = cells
        .par_iter()
        .map(|&(g1, g2)| {
            let p = spec.base.with_couplings(g1, g2);
            let records = fisher_scan(&p, &spec.dims, &spec.stencil, &spec.grid, &spec.initial, &ScanMode::Closed)?;
            let mut out = Vec::new();
            for &w in &spec.windows {
                for &s in &spec.scenarios {
                    out.push(efficiency(&records, w, s, &p)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Observables compared by the convergence studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub photons: f64,
    pub phonons: f64,
    pub sigma_z: f64,
    pub entropy_qubit: f64,
}

impl Observables {
    pub fn of(rho: &DensityMatrix, d: &HilbertDims) -> Result<Self> {
        let q = rho.partial_trace(d, Subsystem::Qubit)?;
        let c = rho.partial_trace(d, Subsystem::Cavity)?;
        let m = rho.partial_trace(d, Subsystem::Mechanics)?;
        Ok(Observables {
            photons: c.expectation(&number(d.cavity)?)?.re,
            phonons: m.expectation(&number(d.mechanics)?)?.re,
            sigma_z: q.expectation(&pauli(Pauli::Z))?.re,
            entropy_qubit: von_neumann_entropy(&q)?,
        })
    }

    pub fn of_pure(psi: &PureState, d: &HilbertDims) -> Result<Self> {
        let q = psi.partial_trace(d, Subsystem::Qubit)?;
        let c = psi.partial_trace(d, Subsystem::Cavity)?;
        let m = psi.partial_trace(d, Subsystem::Mechanics)?;
        Ok(Observables {
            photons: c.expectation(&number(d.cavity)?)?.re,
            phonons: m.expectation(&number(d.mechanics)?)?.re,
            sigma_z: q.expectation(&pauli(Pauli::Z))?.re,
            entropy_qubit: von_neumann_entropy(&q)?,
        })
    }

    fn values(&self) -> [(&'static str, f64); 4] {
        [
            ("photons", self.photons),
            ("phonons", self.phonons),
            ("sigma_z", self.sigma_z),
            ("entropy_qubit", self.entropy_qubit),
        ]
    }
}

/// One observable at one time under a coarse and a refined setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub observable: String,
    pub coarse: f64,
    pub fine: f64,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// What was refined, e.g. `cutoff 25x25 -> 50x50`.
    pub study: String,
    pub rows: Vec<ConvergenceRow>,
    pub max_deviation: f64,
}

impl ConvergenceReport {
    fn from_pairs(study: String, pairs: Vec<(f64, Observables, Observables)>) -> Self {
        let mut rows = Vec::new();
        for (t, a, b) in pairs {
            for ((name, x), (_, y)) in a.values().into_iter().zip(b.values()) {
                rows.push(ConvergenceRow { t, observable: name.into(), coarse: x, fine: y, abs_diff: (x - y).abs() });
            }
        }
        let max_deviation = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
        ConvergenceReport { study, rows, max_deviation }
    }
}

fn pure_amplitudes(initial: &InitialState) -> Result<(C64, C64)> {
    match *initial {
        InitialState::Pure { alpha, beta } => Ok((C64::from(alpha), C64::from(beta))),
        InitialState::Thermal { .. } => {
            Err(Error::InvalidArgument("closed convergence study needs a pure initial state".into()))
        }
    }
}

/// Closed dynamics at cutoffs `d` and `2d`.
pub fn closed_cutoff_convergence(
    p: &SystemParams,
    d: &HilbertDims,
    initial: &InitialState,
    grid: &TimeGrid,
) -> Result<ConvergenceReport> {
    let (alpha, beta) = pure_amplitudes(initial)?;
    let fine_dims = d.doubled();
    let run = |dims: &HilbertDims| -> Result<Vec<Observables>> {
        let prop = diagonalize(&build_hamiltonian(p, dims)?)?;
        let psi0 = initial_state_pure(alpha, beta, dims)?;
        grid.times().par_iter().map(|&t| Observables::of_pure(&prop.evolve(&psi0, t)?, dims)).collect()
    };
    let (a, b) = (run(d)?, run(&fine_dims)?);
    let pairs = grid.times().iter().zip(a).zip(b).map(|((&t, x), y)| (t, x, y)).collect();
    Ok(ConvergenceReport::from_pairs(
        format!("cutoff {}x{} -> {}x{}", d.cavity, d.mechanics, fine_dims.cavity, fine_dims.mechanics),
        pairs,
    ))
}

/// Open dynamics at two cutoffs (e.g. 15 against 20).
pub fn open_cutoff_convergence(
    p: &SystemParams,
    rates: &DecoherenceRates,
    initial: &InitialState,
    coarse: &HilbertDims,
    fine: &HilbertDims,
    grid: &TimeGrid,
    opts: &OpenOptions,
) -> Result<ConvergenceReport> {
    let run = |dims: &HilbertDims| -> Result<Vec<Observables>> {
        let states = evolve_open(p, dims, rates, &initial.density(dims)?, grid, opts)?;
        states.iter().map(|rho| Observables::of(rho, dims)).collect()
    };
    let (a, b) = (run(coarse)?, run(fine)?);
    let pairs = grid.times().iter().zip(a).zip(b).map(|((&t, x), y)| (t, x, y)).collect();
    Ok(ConvergenceReport::from_pairs(
        format!("open cutoff {}x{} -> {}x{}", coarse.cavity, coarse.mechanics, fine.cavity, fine.mechanics),
        pairs,
    ))
}

/// Open dynamics with step `dt` against `dt/2`.
pub fn open_step_convergence(
    p: &SystemParams,
    rates: &DecoherenceRates,
    initial: &InitialState,
    d: &HilbertDims,
    grid: &TimeGrid,
    opts: &OpenOptions,
) -> Result<ConvergenceReport> {
    let rho0 = initial.density(d)?;
    let run = |o: &OpenOptions| -> Result<Vec<Observables>> {
        evolve_open(p, d, rates, &rho0, grid, o)?.iter().map(|rho| Observables::of(rho, d)).collect()
    };
    let half = OpenOptions { dt: opts.dt / 2.0, ..*opts };
    let (a, b) = (run(opts)?, run(&half)?);
    let pairs = grid.times().iter().zip(a).zip(b).map(|((&t, x), y)| (t, x, y)).collect();
    Ok(ConvergenceReport::from_pairs(format!("step {} -> {}", opts.dt, half.dt), pairs))
}
