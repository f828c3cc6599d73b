//! Closed-form solutions used as independent checks of the numerics:
//! Jaynes–Cummings dynamics, pure optomechanical dynamics and the polaron
//! diagonalization of the full model in the dispersive-coupling regime.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::hilbert::{coherent_state_with_tolerance, HilbertDims, PureState};
use crate::model::SystemParams;
use crate::{Error, Result, C64};

/// Extra displaced-basis levels used by [`polaron_propagate`] beyond the
/// mechanical cutoff.
const POLARON_BASIS_MARGIN: usize = 15;

/// Frame in which an analytic state is expressed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Includes all free phases of `H`; directly comparable with `e^{−iHt}ψ0`.
    #[default]
    Lab,
    /// Free rotation `ω_c(a†a + σ_z/2)` removed.
    Rotating,
}

fn coherent_amplitudes(alpha: C64, dim: usize, tolerance: f64) -> Result<Array1<C64>> {
    Ok(coherent_state_with_tolerance(alpha, dim, tolerance)?.into_amplitudes())
}

/// Jaynes–Cummings state on qubit ⊗ cavity evolved from `|g⟩ ⊗ |α⟩` at
/// resonance (`ω_q = ω_c`):
///
/// `|ψ(t)⟩ = Σ_n c_n [cos(√n g1 t)|g,n⟩ − i sin(√n g1 t)|e,n−1⟩]`
/// with `c_n = e^{−|α|²/2} αⁿ/√n!` times the free phase `e^{−i(n−½)ω_c t}` in
/// the lab frame.
pub fn jc_state(alpha: C64, g1: f64, omega_c: f64, t: f64, cavity_dim: usize, frame: Frame) -> Result<PureState> {
    jc_state_with_tolerance(alpha, g1, omega_c, t, cavity_dim, frame, crate::hilbert::DEFAULT_TRUNCATION_TOLERANCE)
}

pub fn jc_state_with_tolerance(
    alpha: C64,
    g1: f64,
    omega_c: f64,
    t: f64,
    cavity_dim: usize,
    frame: Frame,
    tolerance: f64,
) -> Result<PureState> {
    let c = coherent_amplitudes(alpha, cavity_dim, tolerance)?;
    let mut psi = Array1::zeros(2 * cavity_dim);
    for (n, &cn) in c.iter().enumerate() {
        let free = match frame {
            Frame::Lab => C64::from_polar(1.0, -(n as f64 - 0.5) * omega_c * t),
            Frame::Rotating => C64::new(1.0, 0.0),
        };
        let w = (n as f64).sqrt() * g1 * t;
        psi[n] = cn * free * w.cos();
        if n > 0 {
            psi[cavity_dim + n - 1] = cn * free * C64::new(0.0, -w.sin());
        }
    }
    PureState::new(psi)
}

/// Quantum Fisher information on `g1` of the Jaynes–Cummings state,
/// `4|α|²t²`.
pub fn jc_qfi_g1(alpha: C64, t: f64) -> f64 {
    4.0 * alpha.norm_sqr() * t * t
}

/// Cavity ⊗ mechanics state evolved from `|α⟩ ⊗ |β⟩` under
/// `ω_c a†a + ω_m b†b − g2 a†a(b + b†)`:
///
/// `Σ_n c_n e^{iθ_n(t)} |n⟩ ⊗ |φ_n(t)⟩`, with
/// `φ_n = βe^{−iω_m t} + x_n(1 − e^{−iω_m t})`, `x_n = g2 n/ω_m` and
/// `θ_n = x_n²(ω_m t − sin ω_m t) + x_n Im[β*(e^{iω_m t} − 1)]`, plus
/// `−nω_c t` in the lab frame.
///
/// The second phase term vanishes at `ω_m t = kπ` for real `β` but is needed
/// at general times. Each `|φ_n⟩` is truncated to the mechanical cutoff
/// without renormalization and the whole state is normalized once; the
/// weighted truncation deficit must stay below `d.truncation_tolerance`.
pub fn optomech_state(
    alpha: C64,
    beta: C64,
    g2: f64,
    p: &SystemParams,
    t: f64,
    d: &HilbertDims,
    frame: Frame,
) -> Result<PureState> {
    let om = p.omega_m;
    let c = coherent_amplitudes(alpha, d.cavity, d.truncation_tolerance)?;
    let rot = C64::from_polar(1.0, -om * t);
    let mut psi = Array1::zeros(d.cavity * d.mechanics);
    let mut deficit = 0.0;
    for (n, &cn) in c.iter().enumerate() {
        let x = g2 * n as f64 / om;
        let phi = beta * rot + x * (1.0 - rot);
        let theta = x * x * (om * t - (om * t).sin()) + x * (beta.conj() * (C64::from_polar(1.0, om * t) - 1.0)).im;
        let free = match frame {
            Frame::Lab => -(n as f64) * p.omega_c * t,
            Frame::Rotating => 0.0,
        };
        let pref = cn * C64::from_polar(1.0, theta + free);
        let mut amp = C64::new((-phi.norm_sqr() / 2.0).exp(), 0.0);
        let mut captured = 0.0;
        for m in 0..d.mechanics {
            if m > 0 {
                amp *= phi / (m as f64).sqrt();
            }
            captured += amp.norm_sqr();
            psi[n * d.mechanics + m] = pref * amp;
        }
        deficit += cn.norm_sqr() * (1.0 - captured).max(0.0);
    }
    if deficit > d.truncation_tolerance {
        return Err(Error::Truncation {
            what: "optomechanical state".into(),
            dim: d.mechanics,
            deficit,
            tolerance: d.truncation_tolerance,
            required: required_mech_cutoff(&c, beta, g2, p, t, d.truncation_tolerance),
        });
    }
    PureState::new(psi)
}

fn required_mech_cutoff(c: &Array1<C64>, beta: C64, g2: f64, p: &SystemParams, t: f64, tol: f64) -> usize {
    let rot = C64::from_polar(1.0, -p.omega_m * t);
    let worst = c
        .iter()
        .enumerate()
        .filter(|(_, cn)| cn.norm_sqr() > tol * 1e-3)
        .map(|(n, _)| (beta * rot + g2 * n as f64 / p.omega_m * (1.0 - rot)).norm())
        .fold(0.0, f64::max);
    // Poisson tail bound: mean + 8σ + margin
    let mean = worst * worst;
    (mean + 8.0 * mean.sqrt() + 10.0).ceil() as usize
}

/// Inverse quantum Fisher information on `g2` at `ω_m t = 2kπ` for the
/// optomechanical state (units `ω_m = 1`):
/// `(|α| g2 kπ)⁻² / [64(1 + 6|α|² + 4|α|⁴)]`.
pub fn optomech_inv_qfi_g2(alpha: C64, g2: f64, k: u32) -> Result<f64> {
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 || g2 <= 0.0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "optomechanical bound needs |alpha| > 0, g2 > 0 and k >= 1 (got {a2}, {g2}, {k})"
        )));
    }
    let s = alpha.norm() * g2 * k as f64 * PI;
    Ok(1.0 / (s * s * 64.0 * (1.0 + 6.0 * a2 + 4.0 * a2 * a2)))
}

/// Dressed qubit–photon states of excitation number `n`.
#[derive(Clone, Debug)]
pub struct Polaritons {
    /// `(|g,n⟩ + |e,n−1⟩)/√2`, or `|g,0⟩` for `n = 0`.
    pub plus: PureState,
    /// `(|g,n⟩ − |e,n−1⟩)/√2`; absent for `n = 0`.
    pub minus: Option<PureState>,
}

/// Polariton pair over qubit ⊗ cavity with the given cavity cutoff.
pub fn polariton_states(n: usize, cavity_dim: usize) -> Result<Polaritons> {
    if n >= cavity_dim {
        return Err(Error::InvalidDimension(format!("polariton n = {n} needs cavity cutoff > {n} (got {cavity_dim})")));
    }
    let dim = 2 * cavity_dim;
    if n == 0 {
        return Ok(Polaritons { plus: PureState::basis(dim, 0)?, minus: None });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = Array1::zeros(dim);
    let mut minus = Array1::zeros(dim);
    plus[n] = C64::new(s, 0.0);
    plus[cavity_dim + n - 1] = C64::new(s, 0.0);
    minus[n] = C64::new(s, 0.0);
    minus[cavity_dim + n - 1] = C64::new(-s, 0.0);
    Ok(Polaritons { plus: PureState::new(plus)?, minus: Some(PureState::new(minus)?) })
}

/// Diagonalization of the polaron block of polariton sector `n` and displaced
/// phonon number `m`, spanned by `{|+, m−1⟩, |−, m⟩}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolaronLevel {
    /// Mixing angle in `(−π/2, 0]`, `tan 2θ = B/A` with
    /// `A = (Ω − ω_m)/2` and `B = −g2√m/2`.
    pub theta: f64,
    /// `ω_0 + (m − ½)ω_m + √((Ω − ω_m)²/4 + m g2²/4)`.
    pub e_plus: f64,
    /// `ω_0 + (m − ½)ω_m − √((Ω − ω_m)²/4 + m g2²/4)`.
    pub e_minus: f64,
    /// `Ω = ω_m`: the angle is fixed to `−π/4` by continuity.
    pub resonant: bool,
}

/// Sector splitting `Ω⁽ⁿ⁾ = 2√n g1`.
pub fn polariton_splitting(n: usize, g1: f64) -> f64 {
    2.0 * (n as f64).sqrt() * g1
}

/// Polariton sector center `ω_0⁽ⁿ⁾ = (n − ½)ω_c`.
pub fn polariton_center(n: usize, omega_c: f64) -> f64 {
    (n as f64 - 0.5) * omega_c
}

/// Displacement `D_n = (g2/ω_m)(n − ½)` of the phonon mode in sector `n ≥ 1`.
pub fn polaron_displacement(n: usize, g2: f64, omega_m: f64) -> f64 {
    g2 / omega_m * (n as f64 - 0.5)
}

fn block_coefficients(n: usize, m: usize, g1: f64, g2: f64, omega_m: f64) -> (f64, f64) {
    let a = (polariton_splitting(n, g1) - omega_m) / 2.0;
    let b = -g2 * (m as f64).sqrt() / 2.0;
    (a, b)
}

fn mixing_angle(a: f64, b: f64) -> f64 {
    if b < 0.0 {
        0.5 * b.atan2(a)
    } else {
        0.0
    }
}

pub fn polaron_angle_energy(n: usize, m: usize, p: &SystemParams) -> PolaronLevel {
    let (a, b) = block_coefficients(n, m, p.g1, p.g2, p.omega_m);
    let radius = a.hypot(b);
    let center = polariton_center(n, p.omega_c) + (m as f64 - 0.5) * p.omega_m;
    PolaronLevel { theta: mixing_angle(a, b), e_plus: center + radius, e_minus: center - radius, resonant: a == 0.0 }
}

/// Eigenvectors of the block `[[A, B], [B, −A]]` as columns of a rotation by
/// `θ`, with their Rayleigh-quotient energies relative to the block center.
fn block_eigensystem(a: f64, b: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let theta = mixing_angle(a, b);
    let (s, c) = theta.sin_cos();
    let v = [[c, -s], [s, c]];
    let energy = |x: f64, y: f64| a * (x * x - y * y) + 2.0 * b * x * y;
    (v, [energy(c, s), energy(-s, c)])
}

/// Generalized Laguerre polynomial `L_k^{(a)}(y)` by the three-term
/// recurrence.
pub fn generalized_laguerre(k: usize, a: f64, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + a - y);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - y) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨l| e^{x(b† − b)} |m⟩` for real `x`:
/// `√(m!/l!) x^{l−m} e^{−x²/2} L_m^{(l−m)}(x²)` for `l ≥ m`, and the mirrored
/// expression with `−x` for `l < m`.
pub fn displacement_matrix_element(l: usize, m: usize, x: f64) -> f64 {
    let (hi, lo, sign) = if l >= m { (l, m, 1.0) } else { (m, l, -1.0) };
    // √(lo!/hi!) (±x)^{hi−lo} as a running product
    let mut pref = 1.0;
    for k in lo + 1..=hi {
        pref *= sign * x / (k as f64).sqrt();
    }
    pref * (-x * x / 2.0).exp() * generalized_laguerre(lo, (hi - lo) as f64, x * x)
}

/// Overlap `⟨l|m⁽ⁿ⁾⟩` of the lab Fock state `l` with the displaced Fock state
/// `m` of polariton sector `n`, displacement `(g2/ω_m)(n − ½)`.
pub fn displaced_overlap(l: usize, m: usize, n: usize, g2: f64, omega_m: f64) -> f64 {
    displacement_matrix_element(l, m, polaron_displacement(n, g2, omega_m))
}

/// `O[l, m] = ⟨l|D(x)|m⟩` for `l < rows`, `m < cols`.
fn displacement_matrix(x: f64, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(l, m)| displacement_matrix_element(l, m, x))
}

/// Propagates `psi0` (qubit ⊗ cavity ⊗ mechanics) with the effective polaron
/// Hamiltonian
///
/// `H_eff⁽ⁿ⁾ = ω_0⁽ⁿ⁾ − ω_m D_n² + ω_m b_n†b_n + (Ω⁽ⁿ⁾/2)σ_z⁽ⁿ⁾ − (g2/2)(b_n†σ⁻⁽ⁿ⁾ + b_nσ⁺⁽ⁿ⁾)`
///
/// in each polariton sector, with `b_n = b − D_n`. The counter-rotating part
/// of the polariton–phonon coupling and the static `g2 D_n σ_x⁽ⁿ⁾` shift are
/// dropped, so this is an approximate solution valid for `g2 ≪ ω_m`. Sectors
/// with a single qubit–photon state (`|g,0⟩` and `|e, n_c−1⟩`) are propagated
/// exactly.
pub fn polaron_propagate(psi0: &PureState, p: &SystemParams, d: &HilbertDims, t: f64) -> Result<PureState> {
    if psi0.dim() != d.total() {
        return Err(Error::Shape { expected: d.total(), found: psi0.dim() });
    }
    if !p.is_resonant() {
        return Err(Error::InvalidArgument("polaron propagation assumes omega_q = omega_c".into()));
    }
    if p.g2 > 0.1 * p.omega_m {
        log::warn!("polaron solution used outside its regime: g2 = {} vs omega_m = {}", p.g2, p.omega_m);
    }
    let (nc, nm) = (d.cavity, d.mechanics);
    let big = nm + POLARON_BASIS_MARGIN;
    let amps = psi0.amplitudes();
    let mut out = Array1::<C64>::zeros(d.total());
    let mech = |q: usize, n: usize| -> Array1<C64> { (0..nm).map(|l| amps[d.index(q, n, l)]).collect() };

    // single-state sectors: displaced oscillator with photon number k
    let singlet = |u: &Array1<C64>, k: usize, offset: f64| -> Array1<C64> {
        let x = p.g2 * k as f64 / p.omega_m;
        let o = displacement_matrix(x, nm, big);
        let w = o.t().mapv(C64::from).dot(u);
        let shift = offset - p.omega_m * x * x;
        let w: Array1<C64> =
            w.iter().enumerate().map(|(m, z)| z * C64::from_polar(1.0, -(shift + p.omega_m * m as f64) * t)).collect();
        o.mapv(C64::from).dot(&w)
    };
    let ground = singlet(&mech(0, 0), 0, -p.omega_c / 2.0);
    let top = singlet(&mech(1, nc - 1), nc - 1, (nc as f64 - 0.5) * p.omega_c);
    for l in 0..nm {
        out[d.index(0, 0, l)] = ground[l];
        out[d.index(1, nc - 1, l)] = top[l];
    }

    let s = std::f64::consts::FRAC_1_SQRT_2;
    for n in 1..nc {
        let (ug, ue) = (mech(0, n), mech(1, n - 1));
        let x = polaron_displacement(n, p.g2, p.omega_m);
        let o = displacement_matrix(x, nm, big).mapv(C64::from);
        let wp = o.t().dot(&((&ug + &ue) * s));
        let wm = o.t().dot(&((&ug - &ue) * s));
        let (mut wp_t, mut wm_t) = (Array1::<C64>::zeros(big), Array1::<C64>::zeros(big));
        let offset = polariton_center(n, p.omega_c) - p.omega_m * x * x;
        let half_omega = polariton_splitting(n, p.g1) / 2.0;
        let phase = |e: f64| C64::from_polar(1.0, -(offset + e) * t);
        // m = 0: |−, 0⟩ alone
        wm_t[0] = wm[0] * phase(-half_omega);
        // top edge: |+, big−1⟩ has no partner inside the basis
        wp_t[big - 1] = wp[big - 1] * phase(half_omega + p.omega_m * (big - 1) as f64);
        for m in 1..big {
            let (a, b) = block_coefficients(n, m, p.g1, p.g2, p.omega_m);
            let (v, e) = block_eigensystem(a, b);
            let mean = p.omega_m * (m as f64 - 0.5);
            let (x0, x1) = (wp[m - 1], wm[m]);
            let mut y = [C64::new(0.0, 0.0); 2];
            for k in 0..2 {
                let coeff = (x0 * v[0][k] + x1 * v[1][k]) * phase(mean + e[k]);
                y[0] += coeff * v[0][k];
                y[1] += coeff * v[1][k];
            }
            wp_t[m - 1] = y[0];
            wm_t[m] = y[1];
        }
        let up = o.dot(&wp_t);
        let um = o.dot(&wm_t);
        for l in 0..nm {
            out[d.index(0, n, l)] = (up[l] + um[l]) * s;
            out[d.index(1, n - 1, l)] = (up[l] - um[l]) * s;
        }
    }
    PureState::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::diagonalize;
    use crate::hilbert::{annihilation, coherent_state, number, pauli, tensor, Operator, Pauli};
    use crate::model::{build_hamiltonian, initial_state_pure};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn jc_state_limits() {
        let alpha = c(2.0);
        let t = 0.7;
        let psi = jc_state(alpha, 0.0, 100.0, t, 25, Frame::Lab).unwrap();
        let g = PureState::basis(2, 0).unwrap();
        let expect =
            PureState::tensor(&[&g, &coherent_state(alpha * C64::from_polar(1.0, -100.0 * t), 25).unwrap()]).unwrap();
        assert_abs_diff_eq!(psi.fidelity(&expect).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jc_excitation_number_is_constant() {
        let n_op = &tensor(&[&Operator::identity(2), &number(25).unwrap()]).unwrap()
            + &tensor(&[&(&pauli(Pauli::Plus) * &pauli(Pauli::Minus)), &Operator::identity(25)]).unwrap();
        let n0 = jc_state(c(2.0), 0.1, 100.0, 0.0, 25, Frame::Rotating).unwrap().expectation(&n_op).unwrap().re;
        for t in [0.3, 1.7, 6.0] {
            let n = jc_state(c(2.0), 0.1, 100.0, t, 25, Frame::Rotating).unwrap().expectation(&n_op).unwrap().re;
            assert_abs_diff_eq!(n, n0, epsilon = 1e-10);
        }
    }

    #[test]
    fn jc_state_matches_full_numerics() {
        let d = HilbertDims::default();
        let p = SystemParams::default().with_couplings(0.1, 0.0);
        let prop = diagonalize(&build_hamiltonian(&p, &d).unwrap()).unwrap();
        let (alpha, beta) = (c(2.0), c(2.0));
        let psi0 = initial_state_pure(alpha, beta, &d).unwrap();
        let t = 2.0 * PI;
        let full = prop.evolve(&psi0, t).unwrap();
        let jc = jc_state(alpha, p.g1, p.omega_c, t, d.cavity, Frame::Lab).unwrap();
        let mech = coherent_state(beta * C64::from_polar(1.0, -t), d.mechanics).unwrap();
        let analytic = PureState::tensor(&[&jc, &mech]).unwrap();
        assert!(full.fidelity(&analytic).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn jc_qfi_values() {
        assert_eq!(jc_qfi_g1(c(2.0), 0.0), 0.0);
        assert_abs_diff_eq!(jc_qfi_g1(c(2.0), PI), 16.0 * PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(jc_qfi_g1(c(2.0), PI), 157.913_670_417_429_7, epsilon = 1e-9);
    }

    #[test]
    fn optomech_limits_and_populations() {
        let d = HilbertDims::new(25, 40).unwrap();
        let p = SystemParams::default();
        let (alpha, beta) = (c(2.0), c(2.0));
        let t = 1.1;
        let free = optomech_state(alpha, beta, 0.0, &p, t, &d, Frame::Rotating).unwrap();
        let expect = PureState::tensor(&[
            &coherent_state(alpha, 25).unwrap(),
            &coherent_state(beta * C64::from_polar(1.0, -t), 40).unwrap(),
        ])
        .unwrap();
        assert_abs_diff_eq!(free.fidelity(&expect).unwrap(), 1.0, epsilon = 1e-12);

        // at ω_m t = 2π the mechanics returns to |β⟩ in every photon sector
        let back = optomech_state(alpha, beta, 0.2, &p, 2.0 * PI, &d, Frame::Rotating).unwrap();
        let coh = coherent_state(beta, 40).unwrap();
        for n in 0..10 {
            let sector: Array1<C64> = (0..40).map(|m| back.amplitudes()[n * 40 + m]).collect();
            let weight: f64 = sector.iter().map(|z| z.norm_sqr()).sum();
            let overlap = crate::hilbert::inner(coh.amplitudes(), &sector).norm_sqr();
            assert_abs_diff_eq!(overlap / weight, 1.0, epsilon = 1e-10);
        }

        // photon-number distribution is time independent
        let pn = |psi: &PureState| -> Vec<f64> {
            (0..25).map(|n| (0..40).map(|m| psi.amplitudes()[n * 40 + m].norm_sqr()).sum()).collect()
        };
        let a = pn(&optomech_state(alpha, beta, 0.1, &p, 0.4, &d, Frame::Lab).unwrap());
        let b = pn(&optomech_state(alpha, beta, 0.1, &p, 3.9, &d, Frame::Lab).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn optomech_state_matches_full_numerics() {
        let d = HilbertDims::new(25, 60).unwrap();
        let p = SystemParams::default().with_couplings(0.0, 0.2);
        let prop = diagonalize(&build_hamiltonian(&p, &d).unwrap()).unwrap();
        let (alpha, beta) = (c(2.0), c(2.0));
        let psi0 = initial_state_pure(alpha, beta, &d).unwrap();
        let g = PureState::basis(2, 0).unwrap();
        for t in [PI / 2.0, PI, 2.0 * PI] {
            let full = prop.evolve(&psi0, t).unwrap();
            let om = optomech_state(alpha, beta, p.g2, &p, t, &d, Frame::Lab).unwrap();
            let f = full.fidelity(&PureState::tensor(&[&g, &om]).unwrap()).unwrap();
            assert!(f >= 1.0 - 1e-6, "t = {t}: {f}");
        }
    }

    #[test]
    fn optomech_reports_required_cutoff() {
        let d = HilbertDims::new(25, 10).unwrap();
        let err = optomech_state(c(2.0), c(2.0), 0.2, &SystemParams::default(), PI, &d, Frame::Lab).unwrap_err();
        assert!(matches!(err, Error::Truncation { required, .. } if required > 10));
    }

    #[test]
    fn optomech_bound_values() {
        let v = optomech_inv_qfi_g2(c(2.0), 0.1, 1).unwrap();
        let expect = 1.0 / ((2.0 * 0.1 * PI).powi(2) * 64.0 * 89.0);
        assert_abs_diff_eq!(v, expect, epsilon = 1e-18);
        assert!((v - 4.447e-4).abs() < 1e-7);
        assert_abs_diff_eq!(optomech_inv_qfi_g2(c(2.0), 0.1, 2).unwrap(), v / 4.0, epsilon = 1e-18);
        assert!(optomech_inv_qfi_g2(c(0.0), 0.1, 1).is_err());
        assert!(optomech_inv_qfi_g2(c(2.0), 0.0, 1).is_err());
    }

    #[test]
    fn polaritons_diagonalize_jc() {
        let nc = 12;
        let p = SystemParams::default().with_couplings(0.1, 0.0);
        let d = HilbertDims::new(nc, 1).unwrap();
        let h = build_hamiltonian(&p, &d).unwrap();
        let zero = polariton_states(0, nc).unwrap();
        assert!(zero.minus.is_none());
        assert_eq!(zero.plus.amplitudes()[0], c(1.0));
        for n in 1..=10 {
            let pol = polariton_states(n, nc).unwrap();
            let minus = pol.minus.unwrap();
            assert_abs_diff_eq!(pol.plus.inner(&minus).unwrap().norm(), 0.0, epsilon = 1e-15);
            let hp = h.apply(&pol.plus).unwrap();
            let hm = h.apply(&minus).unwrap();
            assert!(crate::hilbert::inner(minus.amplitudes(), &hp).norm() < 1e-12);
            // eigenvalues ω_0 ± √n g1
            let ep = crate::hilbert::inner(pol.plus.amplitudes(), &hp).re;
            let em = crate::hilbert::inner(minus.amplitudes(), &hm).re;
            assert_abs_diff_eq!(
                ep - polariton_center(n, p.omega_c),
                polariton_splitting(n, p.g1) / 2.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                em - polariton_center(n, p.omega_c),
                -polariton_splitting(n, p.g1) / 2.0,
                epsilon = 1e-10
            );
            // residual: H|±⟩ − E|±⟩ vanishes
            let res = &hp - &(pol.plus.amplitudes() * c(ep));
            assert!(res.iter().all(|z| z.norm() < 1e-12));
        }
        assert!(polariton_states(12, 12).is_err());
    }

    #[test]
    fn polaron_angles_and_energies() {
        let p = SystemParams::default().with_couplings(0.1, 0.0);
        let lvl = polaron_angle_energy(3, 2, &p);
        let omega = polariton_splitting(3, 0.1);
        assert_eq!(lvl.theta, 0.0);
        let center = polariton_center(3, 100.0) + 1.5;
        assert_abs_diff_eq!(lvl.e_plus - center, (omega - 1.0).abs() / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lvl.e_minus - center, -(omega - 1.0).abs() / 2.0, epsilon = 1e-12);

        let p = SystemParams::default().with_couplings(0.1, 0.2);
        for n in 1..=10 {
            for m in 0..=10 {
                let lvl = polaron_angle_energy(n, m, &p);
                assert!(lvl.theta > -PI / 2.0 && lvl.theta <= 0.0);
                let (a, b) = block_coefficients(n, m, p.g1, p.g2, p.omega_m);
                if m > 0 {
                    assert_abs_diff_eq!((2.0 * lvl.theta).tan(), b / a, epsilon = 1e-12 * (1.0 + (b / a).abs()));
                }
                if m == 0 {
                    let split = (polariton_splitting(n, p.g1) - 1.0).abs() / 2.0;
                    assert_abs_diff_eq!(lvl.e_plus - lvl.e_minus, 2.0 * split, epsilon = 1e-12);
                }
                // rotation is orthogonal
                let (s, cth) = (2.0 * lvl.theta).sin_cos();
                assert_abs_diff_eq!(cth * cth + s * s, 1.0, epsilon = 1e-12);
            }
        }

        // resonance Ω = ω_m: g1 = 1/(2√n)
        let p = SystemParams::default().with_couplings(0.5, 0.1);
        let lvl = polaron_angle_energy(1, 3, &p);
        assert!(lvl.resonant);
        assert_abs_diff_eq!(lvl.theta, -PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn polaron_eigenvectors_solve_effective_hamiltonian() {
        // H_eff on the displaced basis of one sector: (±, m) with m < big
        let p = SystemParams::default().with_couplings(0.05, 0.2);
        let big = 12;
        for n in [1usize, 4, 25, 100] {
            let omega = polariton_splitting(n, p.g1);
            // basis index: 2m + s, s = 0 for +, 1 for −
            let mut h = Array2::<f64>::zeros((2 * big, 2 * big));
            for m in 0..big {
                h[[2 * m, 2 * m]] = p.omega_m * m as f64 + omega / 2.0;
                h[[2 * m + 1, 2 * m + 1]] = p.omega_m * m as f64 - omega / 2.0;
                if m + 1 < big {
                    // −(g2/2) b σ⁺ : |−, m+1⟩ → √(m+1) |+, m⟩
                    let v = -p.g2 / 2.0 * ((m + 1) as f64).sqrt();
                    h[[2 * m, 2 * (m + 1) + 1]] = v;
                    h[[2 * (m + 1) + 1, 2 * m]] = v;
                }
            }
            for m in 1..big {
                let (a, b) = block_coefficients(n, m, p.g1, p.g2, p.omega_m);
                let (v, e) = block_eigensystem(a, b);
                let lvl = polaron_angle_energy(n, m, &p);
                let mean = p.omega_m * (m as f64 - 0.5);
                let mut energies = [mean + e[0], mean + e[1]];
                energies.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let shift = polariton_center(n, p.omega_c);
                assert_abs_diff_eq!(energies[0] + shift, lvl.e_minus, epsilon = 1e-10);
                assert_abs_diff_eq!(energies[1] + shift, lvl.e_plus, epsilon = 1e-10);
                for k in 0..2 {
                    let mut vec = Array1::<f64>::zeros(2 * big);
                    vec[2 * (m - 1)] = v[0][k];
                    vec[2 * m + 1] = v[1][k];
                    let res = h.dot(&vec) - &vec * (mean + e[k]);
                    assert!(res.iter().all(|r| r.abs() < 1e-10), "n={n} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(generalized_laguerre(0, 3.0, 1.7), 1.0);
        assert_abs_diff_eq!(generalized_laguerre(1, 2.0, 0.5), 2.5, epsilon = 1e-15);
        // L_2^{(a)}(y) = (y² − 2(a+2)y + (a+1)(a+2))/2
        let (a, y) = (1.5, 0.8);
        assert_abs_diff_eq!(
            generalized_laguerre(2, a, y),
            (y * y - 2.0 * (a + 2.0) * y + (a + 1.0) * (a + 2.0)) / 2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn displaced_overlap_properties() {
        for l in 0..6 {
            for m in 0..6 {
                let expect = if l == m { 1.0 } else { 0.0 };
                assert_eq!(displaced_overlap(l, m, 3, 0.0, 1.0), expect);
            }
        }
        for n in 1..=5 {
            for m in 0..=5 {
                let total: f64 = (0..80).map(|l| displaced_overlap(l, m, n, 0.2, 1.0).powi(2)).sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn displaced_overlap_matches_displacement_operator() {
        // e^{x(b† − b)} = e^{−i x H} with H = i(b† − b)
        let dim = 60;
        let b = annihilation(dim).unwrap();
        let h = (&b.dagger() - &b).scale(C64::new(0.0, 1.0));
        let prop = diagonalize(&h).unwrap();
        let (g2, n) = (0.078, 3);
        let x = polaron_displacement(n, g2, 1.0);
        assert_abs_diff_eq!(x, 0.195, epsilon = 1e-15);
        for m in 0..=5 {
            let displaced = prop.evolve(&PureState::basis(dim, m).unwrap(), x).unwrap();
            for l in 0..20 {
                let got = displaced_overlap(l, m, n, g2, 1.0);
                assert!((displaced.amplitudes()[l] - c(got)).norm() < 1e-8, "l={l} m={m}");
            }
        }
    }

    #[test]
    fn polaron_propagation_round_trip_and_jc_limit() {
        let d = HilbertDims::new(25, 25).unwrap();
        let (alpha, beta) = (c(2.0), c(2.0));
        let psi0 = initial_state_pure(alpha, beta, &d).unwrap();
        let p = SystemParams::default().with_couplings(0.05, 0.01);
        let same = polaron_propagate(&psi0, &p, &d, 0.0).unwrap();
        assert!(same.fidelity(&psi0).unwrap() >= 1.0 - 1e-8);

        let p0 = SystemParams::default().with_couplings(0.05, 0.0);
        for t in [1.0, 2.0 * PI] {
            let pol = polaron_propagate(&psi0, &p0, &d, t).unwrap();
            let jc = jc_state(alpha, p0.g1, p0.omega_c, t, d.cavity, Frame::Lab).unwrap();
            let mech = coherent_state(beta * C64::from_polar(1.0, -t), d.mechanics).unwrap();
            let expect = PureState::tensor(&[&jc, &mech]).unwrap();
            assert!(pol.fidelity(&expect).unwrap() >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn polaron_propagation_approximates_full_numerics() {
        let d = HilbertDims::new(25, 25).unwrap();
        let p = SystemParams::default().with_couplings(0.05, 0.01);
        let psi0 = initial_state_pure(c(2.0), c(2.0), &d).unwrap();
        let prop = diagonalize(&build_hamiltonian(&p, &d).unwrap()).unwrap();
        let t = 2.0 * PI;
        let f = polaron_propagate(&psi0, &p, &d, t).unwrap().fidelity(&prop.evolve(&psi0, t).unwrap()).unwrap();
        assert!(f >= 0.99, "polaron fidelity {f}");
    }
}
