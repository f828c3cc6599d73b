use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::sparse::{Csr, Gather};
use super::TimeGrid;
use crate::hilbert::{DensityMatrix, HilbertDims};
use crate::model::{build_rotating_frame_hamiltonian, frame_generator, FullOperators, SystemParams};
use crate::{Error, Result, C64};

/// Default RK4 step in units of `1/ω_m`.
pub const DEFAULT_DT: f64 = 5e-3;

/// Trace drift (absolute) beyond which an integration is rejected.
const FAIL_DRIFT: f64 = 1e-6;
/// Acceptable trace drift per unit time before the step is halved.
const TARGET_DRIFT_RATE: f64 = 1e-8;
const MAX_HALVINGS: usize = 4;
const POSITIVITY_FLOOR: f64 = -1e-6;

/// Environment couplings of the Born–Markov master equation
///
/// `dρ/dt = −i[H, ρ] + (κ/2)D[a] + (Γ/2)(1+N̄)D[b] + (Γ/2)N̄ D[b†] + (γ/4)D[σ_z]`
///
/// with `D[O]ρ = 2OρO† − ρO†O − O†Oρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoherenceRates {
    pub kappa: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub gamma: f64,
    #[serde(rename = "Nbar")]
    pub nbar: f64,
}

impl Default for DecoherenceRates {
    fn default() -> Self {
        DecoherenceRates { kappa: 0.01, big_gamma: 1e-5, gamma: 0.01, nbar: 100.0 }
    }
}

impl DecoherenceRates {
    pub fn zero() -> Self {
        DecoherenceRates { kappa: 0.0, big_gamma: 0.0, gamma: 0.0, nbar: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("Gamma", self.big_gamma), ("gamma", self.gamma), ("Nbar", self.nbar)]
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("rate {name} must be finite and >= 0 (got {v})")));
            }
        }
        Ok(())
    }

    /// Same rates with the three dissipative rates multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        DecoherenceRates {
            kappa: self.kappa * s,
            big_gamma: self.big_gamma * s,
            gamma: self.gamma * s,
            nbar: self.nbar,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpenOptions {
    pub dt: f64,
    /// Fail if the minimum eigenvalue of a returned state is below `-1e-6`.
    pub check_positivity: bool,
}

impl Default for OpenOptions {
    fn default() -> Self {
        OpenOptions { dt: DEFAULT_DT, check_positivity: true }
    }
}

/// Right-hand side `Kρ + (Kρ)† + Σ_k J_k ρ J_k†` with
/// `K = −iH' − Σ_k r_k O_k†O_k` and `J_k = √(2 r_k) O_k`.
#[derive(Clone, Debug)]
struct Generator {
    k: Csr,
    jumps: Vec<Gather>,
}

impl Generator {
    fn new(p: &SystemParams, d: &HilbertDims, r: &DecoherenceRates) -> Result<Self> {
        let h = build_rotating_frame_hamiltonian(p, d)?;
        let ops = FullOperators::new(d)?;
        let b_dag = ops.b.dagger();
        let channels = [
            (r.kappa / 2.0, &ops.a),
            (r.big_gamma / 2.0 * (1.0 + r.nbar), &ops.b),
            (r.big_gamma / 2.0 * r.nbar, &b_dag),
            (r.gamma / 4.0, &ops.sigma_z),
        ];
        let mut k = h.matrix().mapv(|z| z * C64::new(0.0, -1.0));
        let mut jumps = Vec::new();
        for (rate, op) in channels {
            if rate == 0.0 {
                continue;
            }
            let m = op.matrix();
            let odo = m.t().mapv(|z| z.conj()).dot(m);
            k.scaled_add(C64::new(-rate, 0.0), &odo);
            jumps.push(
                Gather::from_dense(m, (2.0 * rate).sqrt())
                    .ok_or_else(|| Error::Consistency("jump operator is not single-entry per row".into()))?,
            );
        }
        Ok(Generator { k: Csr::from_dense(&k), jumps })
    }

    fn apply(&self, rho: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        let n = (rho.len() as f64).sqrt() as usize;
        self.k.mul_dense(rho, scratch);
        // out = scratch + scratch†, tiled so the transposed reads stay in cache
        const TILE: usize = 32;
        for i0 in (0..n).step_by(TILE) {
            for j0 in (0..n).step_by(TILE) {
                for i in i0..(i0 + TILE).min(n) {
                    for j in j0..(j0 + TILE).min(n) {
                        out[i * n + j] = scratch[i * n + j] + scratch[j * n + i].conj();
                    }
                }
            }
        }
        for jump in &self.jumps {
            jump.add_sandwich(rho, out);
        }
    }
}

/// Fixed-step RK4 integrator of the master equation in the frame rotating
/// with `ω_c(a†a + σ_z/2)`.
///
/// All four dissipators are invariant under this frame change, so only the
/// Hamiltonian part changes and the fast `ω_c` oscillation never enters the
/// step size. States are rotated back to the lab frame on request.
#[derive(Clone, Debug)]
pub struct OpenIntegrator {
    generator: Generator,
    frame: Array1<f64>,
    dim: usize,
    rho: Vec<C64>,
    t: f64,
    dt: f64,
    trace0: f64,
    buffers: [Vec<C64>; 5],
}

impl OpenIntegrator {
    pub fn new(p: &SystemParams, d: &HilbertDims, r: &DecoherenceRates, rho0: &DensityMatrix, dt: f64) -> Result<Self> {
        p.validate_frequencies()?;
        r.validate()?;
        if rho0.dim() != d.total() {
            return Err(Error::Shape { expected: d.total(), found: rho0.dim() });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive (got {dt})")));
        }
        let dim = d.total();
        let rho: Vec<C64> = rho0.matrix().iter().cloned().collect();
        let zeros = vec![C64::new(0.0, 0.0); dim * dim];
        Ok(OpenIntegrator {
            generator: Generator::new(p, d, r)?,
            frame: frame_generator(p, d),
            dim,
            rho,
            t: 0.0,
            dt,
            trace0: rho0.trace(),
            buffers: [zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone(), zeros],
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn step(&mut self, h: f64) {
        let [k, acc, stage, scratch, _] = &mut self.buffers;
        let rho = &mut self.rho;
        let hc = C64::new(h, 0.0);
        acc.copy_from_slice(rho);
        // k1
        self.generator.apply(rho, scratch, k);
        for ((a, s), (r, kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kv * (hc / 6.0);
            *s = r + kv * (hc / 2.0);
        }
        // k2
        self.generator.apply(stage, scratch, k);
        for ((a, s), (r, kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kv * (hc / 3.0);
            *s = r + kv * (hc / 2.0);
        }
        // k3
        self.generator.apply(stage, scratch, k);
        for ((a, s), (r, kv)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kv * (hc / 3.0);
            *s = r + kv * hc;
        }
        // k4
        self.generator.apply(stage, scratch, k);
        for (a, kv) in acc.iter_mut().zip(k.iter()) {
            *a += kv * (hc / 6.0);
        }
        std::mem::swap(rho, acc);
    }

    /// Integrates up to `t_target` with steps no larger than `dt`, landing on
    /// it exactly.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        if t_target < self.t {
            return Err(Error::InvalidArgument(format!("cannot integrate backwards from {} to {t_target}", self.t)));
        }
        let span = t_target - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let steps = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            self.step(h);
        }
        self.t = t_target;
        let drift = self.trace_drift();
        if !drift.is_finite() || drift > FAIL_DRIFT {
            return Err(Error::Integration { t: self.t, drift });
        }
        Ok(())
    }

    pub fn trace_drift(&self) -> f64 {
        let tr: f64 = (0..self.dim).map(|i| self.rho[i * self.dim + i].re).sum();
        (tr - self.trace0).abs()
    }

    /// Current state in the rotating frame.
    pub fn state_rotating(&self) -> Array2<C64> {
        Array2::from_shape_vec((self.dim, self.dim), self.rho.clone()).expect("square")
    }

    /// Current state in the lab frame, `ρ_ij e^{−i(G_i − G_j)t}`, Hermitized.
    pub fn state_lab(&self) -> DensityMatrix {
        let n = self.dim;
        let phases: Vec<C64> = self.frame.iter().map(|g| C64::from_polar(1.0, -g * self.t)).collect();
        let m = Array2::from_shape_fn((n, n), |(i, j)| {
            let z = 0.5 * (self.rho[i * n + j] + self.rho[j * n + i].conj());
            z * phases[i] * phases[j].conj()
        });
        DensityMatrix::from_matrix_unchecked(m)
    }
}

/// Solves the master equation from `rho0` and returns lab-frame states at each
/// grid time.
///
/// The step starts at `opts.dt` and is halved (up to four times) while the
/// trace drift exceeds `1e-8` per unit time; a drift above `1e-6` is an error.
pub fn evolve_open(
    p: &SystemParams,
    d: &HilbertDims,
    r: &DecoherenceRates,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &OpenOptions,
) -> Result<Vec<DensityMatrix>> {
    p.validate()?;
    let mut dt = opts.dt;
    for attempt in 0..=MAX_HALVINGS {
        let mut integ = OpenIntegrator::new(p, d, r, rho0, dt)?;
        let mut out = Vec::with_capacity(grid.len());
        let mut worst_rate: f64 = 0.0;
        for &t in grid.times() {
            integ.advance_to(t)?;
            if t > 0.0 {
                worst_rate = worst_rate.max(integ.trace_drift() / t);
            }
            out.push(integ.state_lab());
        }
        if worst_rate > TARGET_DRIFT_RATE && attempt < MAX_HALVINGS {
            log::warn!("trace drift rate {worst_rate:.2e} at dt = {dt}; halving step");
            dt /= 2.0;
            continue;
        }
        if opts.check_positivity {
            for (rho, &t) in out.iter().zip(grid.times()) {
                let min_eigenvalue = rho.min_eigenvalue()?;
                if min_eigenvalue < POSITIVITY_FLOOR {
                    return Err(Error::Positivity { t, min_eigenvalue });
                }
            }
        }
        return Ok(out);
    }
    unreachable!("loop returns on the final attempt")
}
