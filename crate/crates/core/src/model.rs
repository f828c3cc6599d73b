//! Tripartite Hamiltonian and initial states.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    annihilation, coherent_state_with_tolerance, number, pauli, tensor, thermal_state_with_tolerance, DensityMatrix,
    HilbertDims, Operator, Pauli, PureState,
};
use crate::{Error, Result, C64};

/// Coupling window the analyses are calibrated for; values outside only warn.
pub const COUPLING_WINDOW: (f64, f64) = (0.0, 0.2);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_q: f64,
    pub omega_m: f64,
    /// Qubit–light coupling.
    pub g1: f64,
    /// Light–mechanics coupling.
    pub g2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams { omega_c: 100.0, omega_q: 100.0, omega_m: 1.0, g1: 0.1, g2: 0.1 }
    }
}

/// The two couplings being estimated, in Fisher-matrix order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    G1,
    G2,
}

impl Coupling {
    pub const BOTH: [Coupling; 2] = [Coupling::G1, Coupling::G2];

    pub fn index(self) -> usize {
        match self {
            Coupling::G1 => 0,
            Coupling::G2 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Coupling::G1 => "g1",
            Coupling::G2 => "g2",
        }
    }
}

impl SystemParams {
    pub fn with_couplings(&self, g1: f64, g2: f64) -> Self {
        SystemParams { g1, g2, ..*self }
    }

    pub fn coupling(&self, which: Coupling) -> f64 {
        match which {
            Coupling::G1 => self.g1,
            Coupling::G2 => self.g2,
        }
    }

    /// Copy with one coupling shifted by `delta` (may leave the physical range;
    /// used by the finite-difference stencil).
    pub fn shifted(&self, which: Coupling, delta: f64) -> Self {
        match which {
            Coupling::G1 => SystemParams { g1: self.g1 + delta, ..*self },
            Coupling::G2 => SystemParams { g2: self.g2 + delta, ..*self },
        }
    }

    /// Checks the frequencies only; couplings may be any finite value, as
    /// for stencil-shifted copies around zero.
    pub fn validate_frequencies(&self) -> Result<()> {
        for (name, v) in [("omega_c", self.omega_c), ("omega_q", self.omega_q), ("omega_m", self.omega_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("g1", self.g1), ("g2", self.g2)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        self.omega_q == self.omega_c
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_frequencies()?;
        for (name, v) in [("g1", self.g1), ("g2", self.g2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
            if v > COUPLING_WINDOW.1 * self.omega_m {
                log::warn!("{name} = {v} lies outside the calibrated window (0, 0.2 omega_m]");
            }
        }
        Ok(())
    }
}

/// Frequently used operators on the full space.
pub struct FullOperators {
    pub photon_number: Operator,
    pub phonon_number: Operator,
    pub sigma_z: Operator,
    pub a: Operator,
    pub b: Operator,
}

impl FullOperators {
    pub fn new(d: &HilbertDims) -> Result<Self> {
        let (iq, ic, im) = (Operator::identity(2), Operator::identity(d.cavity), Operator::identity(d.mechanics));
        Ok(FullOperators {
            photon_number: tensor(&[&iq, &number(d.cavity)?, &im])?,
            phonon_number: tensor(&[&iq, &ic, &number(d.mechanics)?])?,
            sigma_z: tensor(&[&pauli(Pauli::Z), &ic, &im])?,
            a: tensor(&[&iq, &annihilation(d.cavity)?, &im])?,
            b: tensor(&[&iq, &ic, &annihilation(d.mechanics)?])?,
        })
    }
}

/// `H = ω_c a†a + ω_m b†b + (ω_q/2)σ_z + g1(σ⁺a + σ⁻a†) − g2 a†a(b† + b)`.
pub fn build_hamiltonian(p: &SystemParams, d: &HilbertDims) -> Result<Operator> {
    let free =
        tensor(&[&Operator::identity(2), &number(d.cavity)?, &Operator::identity(d.mechanics)])?.scale_real(p.omega_c);
    let qubit = tensor(&[&pauli(Pauli::Z), &Operator::identity(d.cavity), &Operator::identity(d.mechanics)])?
        .scale_real(p.omega_q / 2.0);
    let rest = build_rotating_frame_hamiltonian(&SystemParams { omega_q: p.omega_c, ..*p }, d)?;
    Ok(&(&free + &qubit) + &rest)
}

/// Hamiltonian in the frame rotating with `ω_c(a†a + σ_z/2)`:
/// `H' = ω_m b†b + ((ω_q − ω_c)/2)σ_z + g1(σ⁺a + σ⁻a†) − g2 a†a(b† + b)`.
///
/// The frame generator commutes with `H`, so `e^{−iHt} = e^{−iGt} e^{−iH't}`
/// exactly with `G` given by [`frame_generator`].
pub fn build_rotating_frame_hamiltonian(p: &SystemParams, d: &HilbertDims) -> Result<Operator> {
    let (iq, ic, im) = (Operator::identity(2), Operator::identity(d.cavity), Operator::identity(d.mechanics));
    let a = annihilation(d.cavity)?;
    let b = annihilation(d.mechanics)?;
    let mech = tensor(&[&iq, &ic, &number(d.mechanics)?])?.scale_real(p.omega_m);
    let jc = &tensor(&[&pauli(Pauli::Plus), &a, &im])? + &tensor(&[&pauli(Pauli::Minus), &a.dagger(), &im])?;
    let position = &b + &b.dagger();
    let om = tensor(&[&iq, &number(d.cavity)?, &position])?;
    let mut h = &(&mech + &jc.scale_real(p.g1)) - &om.scale_real(p.g2);
    let detuning = p.omega_q - p.omega_c;
    if detuning != 0.0 {
        h = &h + &tensor(&[&pauli(Pauli::Z), &ic, &im])?.scale_real(detuning / 2.0);
    }
    Ok(h)
}

/// Diagonal of the frame generator `G = ω_c(a†a + σ_z/2)`.
pub fn frame_generator(p: &SystemParams, d: &HilbertDims) -> Array1<f64> {
    Array1::from_shape_fn(d.total(), |i| {
        let (q, n, _) = d.split(i);
        let sz = if q == 0 { -1.0 } else { 1.0 };
        p.omega_c * (n as f64 + sz / 2.0)
    })
}

/// `|g⟩ ⊗ |α⟩ ⊗ |β⟩`.
pub fn initial_state_pure(alpha: C64, beta: C64, d: &HilbertDims) -> Result<PureState> {
    let g = PureState::basis(2, 0)?;
    let a = coherent_state_with_tolerance(alpha, d.cavity, d.truncation_tolerance)?;
    let b = coherent_state_with_tolerance(beta, d.mechanics, d.truncation_tolerance)?;
    PureState::tensor(&[&g, &a, &b])
}

/// `|g⟩⟨g| ⊗ |α⟩⟨α| ⊗ ρ_th(n̄)`.
pub fn initial_state_thermal(alpha: C64, nbar: f64, d: &HilbertDims) -> Result<DensityMatrix> {
    let g = PureState::basis(2, 0)?.to_density();
    let a = coherent_state_with_tolerance(alpha, d.cavity, d.truncation_tolerance)?.to_density();
    let th = thermal_state_with_tolerance(nbar, d.mechanics, d.truncation_tolerance)?;
    DensityMatrix::tensor(&[&g, &a, &th])
}
