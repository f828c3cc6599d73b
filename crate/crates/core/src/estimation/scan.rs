use ndarray::{concatenate, Array, Array1, Array2, Axis, Dimension, Ix1, Ix2, ShapeBuilder};
use ndarray_linalg::QR;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{qfi_mixed_relative, qfi_pure_view, qfi_via_sld, stencil_unchecked, FisherMatrix, StencilConfig};
use super::{DEFAULT_EPS_REL, SLD_SELF_CHECK_MAX_DIM};
use crate::dynamics::{diagonalize, DecoherenceRates, OpenIntegrator, Propagator, TimeGrid, DEFAULT_DT};
use crate::hilbert::{
    reduce_pure, thermal_populations, DensityMatrix, HilbertDims, PartialTrace, PureState, Subsystem,
};
use crate::model::{build_hamiltonian, initial_state_pure, initial_state_thermal, Coupling, SystemParams};
use crate::{Error, Result, C64};

/// Number of parameter points of the two-parameter five-point stencil.
pub const STENCIL_POINTS: usize = 9;

const POSITIVITY_FLOOR: f64 = -1e-6;

/// Initial state of the tripartite system; the qubit always starts in `|g⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    /// `|g⟩ ⊗ |α⟩ ⊗ |β⟩` (real amplitudes).
    Pure { alpha: f64, beta: f64 },
    /// `|g⟩⟨g| ⊗ |α⟩⟨α| ⊗ ρ_th(n̄)`.
    Thermal { alpha: f64, nbar: f64 },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Pure { alpha: 2.0, beta: 2.0 }
    }
}

impl InitialState {
    pub fn density(&self, d: &HilbertDims) -> Result<DensityMatrix> {
        match *self {
            InitialState::Pure { alpha, beta } => {
                Ok(initial_state_pure(C64::from(alpha), C64::from(beta), d)?.to_density())
            }
            InitialState::Thermal { alpha, nbar } => initial_state_thermal(C64::from(alpha), nbar, d),
        }
    }

    /// Pure-state decomposition `Σ_m w_m |ψ_m⟩⟨ψ_m|`.
    pub fn ensemble(&self, d: &HilbertDims) -> Result<Vec<(f64, PureState)>> {
        match *self {
            InitialState::Pure { alpha, beta } => {
                Ok(vec![(1.0, initial_state_pure(C64::from(alpha), C64::from(beta), d)?)])
            }
            InitialState::Thermal { alpha, nbar } => {
                let pops = thermal_populations(nbar, d.mechanics, d.truncation_tolerance)?;
                let base = initial_state_pure(C64::from(alpha), C64::new(0.0, 0.0), d)?;
                let mut out = Vec::new();
                for (m, &w) in pops.iter().enumerate() {
                    if w <= 0.0 {
                        continue;
                    }
                    // shift the mechanical Fock index of |g, α, 0⟩ to m
                    let mut amps = Array1::zeros(d.total());
                    for n in 0..d.cavity {
                        amps[d.index(0, n, m)] = base.amplitudes()[d.index(0, n, 0)];
                    }
                    out.push((w, PureState::new(amps)?));
                }
                Ok(out)
            }
        }
    }
}

/// Dynamics used for a Fisher scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScanMode {
    Closed,
    Open {
        #[serde(default)]
        rates: DecoherenceRates,
        #[serde(default = "default_dt")]
        dt: f64,
    },
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// The nine stencil parameter points in the order
/// `center, g1−2Δ, g1−Δ, g1+Δ, g1+2Δ, g2−2Δ, g2−Δ, g2+Δ, g2+2Δ`.
pub fn stencil_params(p: &SystemParams, s: &StencilConfig) -> [SystemParams; STENCIL_POINTS] {
    let mut out = [*p; STENCIL_POINTS];
    for (param, which) in [Coupling::G1, Coupling::G2].into_iter().enumerate() {
        for (k, step) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
            out[1 + 4 * param + k] = p.shifted(which, step * s.delta(param));
        }
    }
    out
}

/// A quantity evaluated at the nine stencil parameter points.
#[derive(Clone, Debug)]
pub struct StencilFamily<D: Dimension> {
    members: Vec<Array<C64, D>>,
    stencil: StencilConfig,
}

impl<D: Dimension> StencilFamily<D> {
    pub fn new(members: Vec<Array<C64, D>>, stencil: StencilConfig) -> Result<Self> {
        if members.len() != STENCIL_POINTS {
            return Err(Error::InvalidArgument(format!("stencil family needs {STENCIL_POINTS} members")));
        }
        Ok(StencilFamily { members, stencil })
    }

    pub fn center(&self) -> &Array<C64, D> {
        &self.members[0]
    }

    pub fn members(&self) -> &[Array<C64, D>] {
        &self.members
    }

    pub fn stencil(&self) -> &StencilConfig {
        &self.stencil
    }

    /// Five-point derivative with respect to parameter `param` (0: g1, 1: g2).
    pub fn derivative(&self, param: usize) -> Array<C64, D> {
        let m = &self.members[1 + 4 * param..5 + 4 * param];
        stencil_unchecked(&m[0], &m[1], &m[2], &m[3], self.stencil.delta(param))
    }

    pub fn derivatives(&self) -> [Array<C64, D>; 2] {
        [self.derivative(0), self.derivative(1)]
    }

    pub fn map<E: Dimension>(&self, f: impl Fn(&Array<C64, D>) -> Array<C64, E>) -> StencilFamily<E> {
        StencilFamily { members: self.members.iter().map(f).collect(), stencil: self.stencil }
    }
}

impl StencilFamily<Ix2> {
    /// Quantum Fisher matrix of the center state, with the SLD self-check for
    /// small dimensions.
    pub fn qfi(&self, eps_rel: f64) -> Result<(FisherMatrix, f64)> {
        let [d1, d2] = self.derivatives();
        let rho = self.center();
        let (q, min) = qfi_mixed_relative(rho, [&d1, &d2], eps_rel)?;
        if rho.nrows() <= SLD_SELF_CHECK_MAX_DIM {
            let p_max = crate::hilbert::hermitian_eigh(rho)?.0.iter().cloned().fold(0.0, f64::max);
            let alt =
                qfi_via_sld(&DensityMatrix::from_matrix_unchecked(rho.clone()), [&d1, &d2], eps_rel * 2.0 * p_max)?;
            let scale = q.max_abs().max(alt.max_abs());
            let diff = q.sub(&alt).max_abs();
            if diff > 1e-8 * scale + 1e-12 {
                return Err(Error::Consistency(format!(
                    "eigenbasis and SLD quantum Fisher matrices differ by {diff:.3e} (scale {scale:.3e})"
                )));
            }
        }
        Ok((q, min))
    }
}

/// A Fisher matrix with the bounds derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherEntry {
    pub qfi: FisherMatrix,
    /// `(Q_11)⁻¹, (Q_22)⁻¹`.
    pub inv_single: [f64; 2],
    /// `(Q⁻¹)_11, (Q⁻¹)_22`.
    pub nuisance: [f64; 2],
    /// `Tr[Q⁻¹]`.
    pub scalar: f64,
    /// `det Q ≤ 1e-300`; nuisance and scalar bounds are infinite.
    pub singular: bool,
}

impl From<FisherMatrix> for FisherEntry {
    fn from(qfi: FisherMatrix) -> Self {
        FisherEntry {
            qfi,
            inv_single: [qfi.inv_single(0), qfi.inv_single(1)],
            nuisance: qfi.nuisance_diag(),
            scalar: qfi.scalar_bound(),
            singular: qfi.is_singular(),
        }
    }
}

/// Fisher information of the global state and of every reduced state at one
/// time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherRecord {
    pub t: f64,
    pub global: FisherEntry,
    /// Indexed as [`Subsystem::ALL`]: qubit, cavity, mechanics.
    pub subsystems: [FisherEntry; 3],
}

impl FisherRecord {
    pub fn subsystem(&self, s: Subsystem) -> &FisherEntry {
        &self.subsystems[s as usize]
    }

    /// `None` selects the global state.
    pub fn entry(&self, s: Option<Subsystem>) -> &FisherEntry {
        match s {
            None => &self.global,
            Some(s) => self.subsystem(s),
        }
    }
}

fn subsystem_entries(families: [StencilFamily<Ix2>; 3], eps_rel: f64) -> Result<[FisherEntry; 3]> {
    let mut out = [FisherEntry::from(FisherMatrix::default()); 3];
    for (slot, fam) in out.iter_mut().zip(families) {
        *slot = fam.qfi(eps_rel)?.0.into();
    }
    Ok(out)
}

/// Closed-system stencil: one eigendecomposition per stencil point, reused
/// for every time.
#[derive(Clone, Debug)]
pub struct ClosedStencil {
    dims: HilbertDims,
    stencil: StencilConfig,
    props: Vec<Propagator>,
    ensemble: Vec<(f64, PureState)>,
    eps_rel: f64,
}

impl ClosedStencil {
    pub fn new(p: &SystemParams, d: &HilbertDims, s: &StencilConfig, initial: &InitialState) -> Result<Self> {
        p.validate()?;
        d.validate()?;
        s.validate()?;
        let params = stencil_params(p, s);
        let props = params.par_iter().map(|q| diagonalize(&build_hamiltonian(q, d)?)).collect::<Result<Vec<_>>>()?;
        Ok(ClosedStencil { dims: *d, stencil: *s, props, ensemble: initial.ensemble(d)?, eps_rel: DEFAULT_EPS_REL })
    }

    pub fn with_eps_rel(mut self, eps_rel: f64) -> Self {
        self.eps_rel = eps_rel;
        self
    }

    pub fn dims(&self) -> &HilbertDims {
        &self.dims
    }

    /// Evolved ensemble members at every stencil point: `[member][point]`.
    fn evolve(&self, t: f64) -> Result<Vec<Vec<PureState>>> {
        self.ensemble.iter().map(|(_, psi0)| self.props.iter().map(|prop| prop.evolve(psi0, t)).collect()).collect()
    }

    fn reduced_from(&self, states: &[Vec<PureState>], keep: Subsystem) -> StencilFamily<Ix2> {
        let k = self.dims.of(keep);
        let members = (0..STENCIL_POINTS)
            .map(|point| {
                let mut rho = Array2::<C64>::zeros((k, k));
                for ((w, _), member) in self.ensemble.iter().zip(states) {
                    rho.scaled_add(C64::from(*w), &reduce_pure(member[point].amplitudes().view(), &self.dims, keep));
                }
                rho
            })
            .collect();
        StencilFamily { members, stencil: self.stencil }
    }

    /// Reduced states of one subsystem at every stencil point.
    pub fn reduced_family(&self, t: f64, keep: Subsystem) -> Result<StencilFamily<Ix2>> {
        Ok(self.reduced_from(&self.evolve(t)?, keep))
    }

    /// Global states at every stencil point (pure initial states only).
    pub fn pure_family(&self, t: f64) -> Result<StencilFamily<Ix1>> {
        if self.ensemble.len() != 1 {
            return Err(Error::InvalidArgument("pure stencil family requested for a mixed initial state".into()));
        }
        let members = self
            .props
            .iter()
            .map(|prop| Ok(prop.evolve(&self.ensemble[0].1, t)?.into_amplitudes()))
            .collect::<Result<_>>()?;
        Ok(StencilFamily { members, stencil: self.stencil })
    }

    pub fn record_at(&self, t: f64) -> Result<FisherRecord> {
        let states = self.evolve(t)?;
        let global = if self.ensemble.len() == 1 {
            let family = StencilFamily {
                members: states[0].iter().map(|s| s.amplitudes().clone()).collect::<Vec<Array1<C64>>>(),
                stencil: self.stencil,
            };
            let [d1, d2] = family.derivatives();
            qfi_pure_view(family.center().view(), [d1.view(), d2.view()])
        } else {
            self.ensemble_qfi(&states)?
        };
        let families = Subsystem::ALL.map(|s| self.reduced_from(&states, s));
        Ok(FisherRecord { t, global: global.into(), subsystems: subsystem_entries(families, self.eps_rel)? })
    }

    /// Global QFI of `ρ = W W†`, `W = [√w_m ψ_m]`, computed in the span of
    /// `W` and its parameter derivatives, which contains the supports of `ρ`
    /// and `∂ρ`.
    fn ensemble_qfi(&self, states: &[Vec<PureState>]) -> Result<FisherMatrix> {
        let d = self.dims.total();
        let r = self.ensemble.len();
        let w_at = |point: usize| -> Array2<C64> {
            Array2::from_shape_fn((d, r), |(i, m)| states[m][point].amplitudes()[i] * self.ensemble[m].0.sqrt())
        };
        let family =
            StencilFamily { members: (0..STENCIL_POINTS).map(w_at).collect::<Vec<_>>(), stencil: self.stencil };
        let w = family.center();
        let [dw1, dw2] = family.derivatives();
        let stacked = concatenate(Axis(1), &[w.view(), dw1.view(), dw2.view()]).expect("equal heights");
        let f = Array2::from_shape_fn(stacked.raw_dim().f(), |(i, j)| stacked[[i, j]]);
        let (basis, _) = f.qr()?;
        let bh = basis.t().mapv(|z| z.conj());
        let (wr, d1r, d2r) = (bh.dot(w), bh.dot(&dw1), bh.dot(&dw2));
        let wrh = wr.t().mapv(|z| z.conj());
        let rho = wr.dot(&wrh);
        let drho = |dr: &Array2<C64>| -> Array2<C64> {
            let a = dr.dot(&wrh);
            &a + &a.t().mapv(|z| z.conj())
        };
        let (q, _) = qfi_mixed_relative(&rho, [&drho(&d1r), &drho(&d2r)], self.eps_rel)?;
        Ok(q)
    }
}

/// Open-system stencil: nine master-equation integrators advanced in
/// lockstep.
#[derive(Clone, Debug)]
pub struct OpenStencil {
    dims: HilbertDims,
    stencil: StencilConfig,
    integrators: Vec<OpenIntegrator>,
    eps_rel: f64,
}

impl OpenStencil {
    pub fn new(
        p: &SystemParams,
        d: &HilbertDims,
        s: &StencilConfig,
        initial: &InitialState,
        rates: &DecoherenceRates,
        dt: f64,
    ) -> Result<Self> {
        p.validate()?;
        d.validate()?;
        s.validate()?;
        let rho0 = initial.density(d)?;
        let integrators = stencil_params(p, s)
            .iter()
            .map(|q| OpenIntegrator::new(q, d, rates, &rho0, dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(OpenStencil { dims: *d, stencil: *s, integrators, eps_rel: DEFAULT_EPS_REL })
    }

    pub fn with_eps_rel(mut self, eps_rel: f64) -> Self {
        self.eps_rel = eps_rel;
        self
    }

    pub fn time(&self) -> f64 {
        self.integrators[0].time()
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        self.integrators.par_iter_mut().try_for_each(|i| i.advance_to(t))
    }

    fn states(&self) -> Vec<DensityMatrix> {
        self.integrators.iter().map(|i| i.state_lab()).collect()
    }

    pub fn reduced_family(&self, keep: Subsystem) -> Result<StencilFamily<Ix2>> {
        let members = self
            .states()
            .iter()
            .map(|rho| Ok(rho.partial_trace(&self.dims, keep)?.into_matrix()))
            .collect::<Result<_>>()?;
        Ok(StencilFamily { members, stencil: self.stencil })
    }

    pub fn record(&self) -> Result<FisherRecord> {
        let t = self.time();
        let states = self.states();
        let global = StencilFamily {
            members: states.iter().map(|s| s.matrix().clone()).collect::<Vec<_>>(),
            stencil: self.stencil,
        };
        let [d1, d2] = global.derivatives();
        let (q, min_eigenvalue) = qfi_mixed_relative(global.center(), [&d1, &d2], self.eps_rel)?;
        if min_eigenvalue < POSITIVITY_FLOOR {
            return Err(Error::Positivity { t, min_eigenvalue });
        }
        let families = Subsystem::ALL.map(|keep| StencilFamily {
            members: states.iter().map(|rho| crate::hilbert::reduce_mixed(rho.matrix(), &self.dims, keep)).collect(),
            stencil: self.stencil,
        });
        Ok(FisherRecord { t, global: q.into(), subsystems: subsystem_entries(families, self.eps_rel)? })
    }
}

/// Fisher records over a time grid: evolves the nine stencil-shifted states,
/// forms the global QFI (pure-state formula for closed pure dynamics, mixed
/// formula otherwise) and the QFI of each reduced state.
pub fn fisher_scan(
    p: &SystemParams,
    d: &HilbertDims,
    s: &StencilConfig,
    grid: &TimeGrid,
    initial: &InitialState,
    mode: &ScanMode,
) -> Result<Vec<FisherRecord>> {
    match mode {
        ScanMode::Closed => {
            let stencil = ClosedStencil::new(p, d, s, initial)?;
            grid.times().par_iter().map(|&t| stencil.record_at(t)).collect()
        }
        ScanMode::Open { rates, dt } => {
            let mut stencil = OpenStencil::new(p, d, s, initial, rates, *dt)?;
            let mut out = Vec::with_capacity(grid.len());
            for &t in grid.times() {
                stencil.advance_to(t)?;
                out.push(stencil.record()?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{jc_qfi_g1, optomech_inv_qfi_g2};
    use std::f64::consts::PI;

    fn closed(p: &SystemParams, d: &HilbertDims, times: Vec<f64>, init: InitialState) -> Vec<FisherRecord> {
        fisher_scan(p, d, &StencilConfig::default(), &TimeGrid::new(times).unwrap(), &init, &ScanMode::Closed).unwrap()
    }

    #[test]
    fn jc_limit_tracks_analytic_qfi() {
        let d = HilbertDims::default();
        let p = SystemParams::default().with_couplings(0.05, 0.0);
        let recs = closed(&p, &d, vec![0.5, PI, 2.0 * PI], InitialState::default());
        for r in &recs {
            let expect = jc_qfi_g1(C64::from(2.0), r.t);
            let q = r.global.qfi.get(0, 0);
            assert!((q - expect).abs() < 1e-3 * expect, "t = {}: {q} vs {expect}", r.t);
            // mechanics is decoupled at g2 = 0
            assert!(r.subsystem(Subsystem::Mechanics).qfi.get(0, 0).abs() < 1e-6);
        }
    }

    #[test]
    fn optomechanical_bound_at_full_period() {
        let d = HilbertDims::default();
        let p = SystemParams::default().with_couplings(0.0, 0.1);
        let r = &closed(&p, &d, vec![2.0 * PI], InitialState::default())[0];
        let expect = optomech_inv_qfi_g2(C64::from(2.0), 0.1, 1).unwrap();
        for entry in [&r.global, r.subsystem(Subsystem::Cavity)] {
            let got = entry.inv_single[1];
            assert!((got - expect).abs() < 0.02 * expect, "{got} vs {expect}");
        }
    }

    #[test]
    fn data_processing_and_algebra() {
        let d = HilbertDims::new(20, 20).unwrap().with_tolerance(1e-4);
        let p = SystemParams::default().with_couplings(0.1, 0.1);
        for r in closed(&p, &d, vec![1.0, PI, 5.0], InitialState::default()) {
            for s in Subsystem::ALL {
                let e = r.subsystem(s);
                for i in 0..2 {
                    let g = r.global.qfi.get(i, i);
                    assert!(e.qfi.get(i, i) <= g * (1.0 + 1e-6), "{s} param {i}");
                }
                assert!(e.scalar >= r.global.scalar * (1.0 - 1e-6));
                assert!(e.qfi.eigenvalues()[0] >= -1e-8 * e.qfi.max_abs().max(1.0));
            }
            assert!((r.global.scalar - r.global.nuisance[0] - r.global.nuisance[1]).abs() <= 1e-12 * r.global.scalar);
        }
    }

    #[test]
    fn stencil_and_cutoff_robustness() {
        let d = HilbertDims::new(20, 20).unwrap().with_tolerance(1e-4);
        let p = SystemParams::default().with_couplings(0.1, 0.1);
        let init = InitialState::default();
        let base = ClosedStencil::new(&p, &d, &StencilConfig::default(), &init).unwrap().record_at(PI).unwrap();
        let half = ClosedStencil::new(&p, &d, &StencilConfig::uniform(5e-5), &init).unwrap().record_at(PI).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
        for (x, y) in [(&base.global, &half.global)].into_iter().chain(base.subsystems.iter().zip(&half.subsystems)) {
            for i in 0..2 {
                if x.qfi.get(i, i) > 1e-6 {
                    assert!(rel(x.qfi.get(i, i), y.qfi.get(i, i)) < 1e-3);
                }
            }
        }
        for eps in [1e-12, 1e-8] {
            let other = ClosedStencil::new(&p, &d, &StencilConfig::default(), &init)
                .unwrap()
                .with_eps_rel(eps)
                .record_at(PI)
                .unwrap();
            for (x, y) in base.subsystems.iter().zip(&other.subsystems) {
                for i in 0..2 {
                    if x.qfi.get(i, i) > 1e-6 {
                        assert!(rel(x.qfi.get(i, i), y.qfi.get(i, i)) < 1e-3, "eps {eps}");
                    }
                }
            }
        }
    }

    #[test]
    fn thermal_ensemble_matches_dense_mixed_qfi() {
        let d = HilbertDims::new(6, 6).unwrap().with_tolerance(1e-2);
        let p = SystemParams::default().with_couplings(0.1, 0.15);
        let init = InitialState::Thermal { alpha: 0.8, nbar: 0.3 };
        let stencil = ClosedStencil::new(&p, &d, &StencilConfig::default(), &init).unwrap();
        let t = 2.3;
        let rec = stencil.record_at(t).unwrap();
        // dense reference: ρ_k = Σ w_m |ψ_m⟩⟨ψ_m| at every stencil point
        let states = stencil.evolve(t).unwrap();
        let members = (0..STENCIL_POINTS)
            .map(|k| {
                let mut rho = Array2::<C64>::zeros((d.total(), d.total()));
                for ((w, _), m) in stencil.ensemble.iter().zip(&states) {
                    rho = rho + m[k].to_density().into_matrix() * C64::from(*w);
                }
                rho
            })
            .collect();
        let fam = StencilFamily::new(members, StencilConfig::default()).unwrap();
        let (q, _) = fam.qfi(DEFAULT_EPS_REL).unwrap();
        assert!(q.sub(&rec.global.qfi).max_abs() < 1e-6 * q.max_abs(), "{q:?} vs {:?}", rec.global.qfi);
    }

    #[test]
    fn open_zero_rates_matches_closed() {
        let d = HilbertDims::new(5, 5).unwrap().with_tolerance(1e-1);
        let p = SystemParams::default().with_couplings(0.1, 0.1);
        let init = InitialState::Pure { alpha: 0.7, beta: 0.5 };
        let grid = TimeGrid::new(vec![0.5, 1.0]).unwrap();
        let s = StencilConfig::default();
        let c = fisher_scan(&p, &d, &s, &grid, &init, &ScanMode::Closed).unwrap();
        let o =
            fisher_scan(&p, &d, &s, &grid, &init, &ScanMode::Open { rates: DecoherenceRates::zero(), dt: DEFAULT_DT })
                .unwrap();
        for (a, b) in c.iter().zip(&o) {
            assert!(a.global.qfi.sub(&b.global.qfi).max_abs() < 1e-5 * a.global.qfi.max_abs());
            for (x, y) in a.subsystems.iter().zip(&b.subsystems) {
                assert!(x.qfi.sub(&y.qfi).max_abs() < 1e-5 * x.qfi.max_abs().max(1e-3));
            }
        }
    }
}
