//! Homodyne statistics of the cavity field and the classical Fisher
//! information they carry, optimized over the local-oscillator phase.
//!
//! The measured quadrature is `x_Φ = (a e^{−iΦ} + a† e^{iΦ})/√2`, so the
//! vacuum has variance 1/2 and `⟨n|x_Φ⟩ = e^{inΦ} ψ_n(x)`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Ix2};
use serde::{Deserialize, Serialize};

use crate::estimation::{FisherMatrix, StencilFamily};
use crate::hilbert::DensityMatrix;
use crate::{Error, Result, C64};

/// Floor applied to `p(x)` in the Fisher integrand.
pub const P_FLOOR: f64 = 1e-12;

/// Phase resolution of the golden-section refinement.
pub const PHASE_TOLERANCE: f64 = 1e-4;

const NORMALIZATION_TOLERANCE: f64 = 1e-4;

/// Uniform grid over the quadrature axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid { x_min: -12.0, x_max: 12.0, n_points: 2401 }
    }
}

impl QuadratureGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 3
            || self.x_max.is_nan()
            || self.x_min.is_nan()
            || self.x_max <= self.x_min
            || (self.x_min + self.x_max).abs() > 1e-12
        {
            return Err(Error::InvalidArgument(format!(
                "quadrature grid must be symmetric with at least 3 points (got [{}, {}], {})",
                self.x_min, self.x_max, self.n_points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> Array1<f64> {
        Array1::linspace(self.x_min, self.x_max, self.n_points)
    }

    /// Trapezoid rule on the grid.
    pub fn integrate(&self, f: &Array1<f64>) -> f64 {
        let n = f.len();
        self.spacing() * (f.sum() - 0.5 * (f[0] + f[n - 1]))
    }

    /// Same range, twice the resolution.
    pub fn refined(&self) -> Self {
        QuadratureGrid { n_points: 2 * self.n_points - 1, ..*self }
    }
}

/// Normalized Hermite function `ψ_n(x) = π^{−1/4}(2ⁿn!)^{−1/2} H_n(x) e^{−x²/2}`
/// from the three-term recurrence.
pub fn quadrature_wavefunction(n: usize, x: f64) -> f64 {
    let mut prev = PI.powf(-0.25) * (-x * x / 2.0).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = 2f64.sqrt() * x * prev;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `ψ_n(x_k)` for `n < n_max`, rows indexed by `n`.
pub fn wavefunction_table(n_max: usize, grid: &QuadratureGrid) -> Array2<f64> {
    let xs = grid.points();
    let mut table = Array2::zeros((n_max, xs.len()));
    for (k, &x) in xs.iter().enumerate() {
        let mut prev = PI.powf(-0.25) * (-x * x / 2.0).exp();
        if n_max > 0 {
            table[[0, k]] = prev;
        }
        if n_max > 1 {
            let mut cur = 2f64.sqrt() * x * prev;
            table[[1, k]] = cur;
            for j in 1..n_max - 1 {
                let jf = j as f64;
                let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
                table[[j + 1, k]] = cur;
            }
        }
    }
    table
}

/// Fourier decomposition of the homodyne density in the LO phase:
/// `p(x, Φ) = Σ_k A_k(x) e^{−ikΦ}` with `A_k(x) = Σ_{m−n=k} ρ_mn ψ_m(x)ψ_n(x)`.
/// Linear in `ρ`, so it applies equally to derivatives `∂ρ`.
#[derive(Clone, Debug)]
pub struct PhaseComponents {
    /// Row `k ≥ 0`; negative orders follow from Hermiticity.
    a: Array2<C64>,
}

impl PhaseComponents {
    pub fn new(m: &Array2<C64>, table: &Array2<f64>) -> Self {
        let dim = m.nrows();
        let nx = table.ncols();
        let mut a = Array2::<C64>::zeros((dim, nx));
        for k in 0..dim {
            let mut row = a.row_mut(k);
            for n in 0..dim - k {
                let coeff = m[[n + k, n]];
                if coeff.re == 0.0 && coeff.im == 0.0 {
                    continue;
                }
                let (pm, pn) = (table.row(n + k), table.row(n));
                for ((r, &u), &v) in row.iter_mut().zip(pm.iter()).zip(pn.iter()) {
                    *r += coeff * (u * v);
                }
            }
        }
        PhaseComponents { a }
    }

    /// `p(x, Φ) = A_0 + 2 Re Σ_{k>0} A_k e^{−ikΦ}`.
    pub fn evaluate(&self, phi: f64) -> Array1<f64> {
        let mut out = self.a.row(0).mapv(|z| z.re);
        for k in 1..self.a.nrows() {
            let w = C64::from_polar(2.0, -(k as f64) * phi);
            for (o, z) in out.iter_mut().zip(self.a.row(k)) {
                *o += (z * w).re;
            }
        }
        out
    }
}

/// Probability density of the quadrature `x_Φ` on the grid; fails if it does
/// not integrate to one within `1e-4`.
pub fn homodyne_pdf(rho: &DensityMatrix, phi: f64, grid: &QuadratureGrid) -> Result<Array1<f64>> {
    grid.validate()?;
    let table = wavefunction_table(rho.dim(), grid);
    let p = PhaseComponents::new(rho.matrix(), &table).evaluate(phi);
    let norm = grid.integrate(&p);
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE * rho.trace().max(1.0) {
        return Err(Error::GridInadequate(norm));
    }
    Ok(p)
}

/// Classical Fisher matrix `F_ij = ∫ (∂_i p)(∂_j p)/p dx` with `p` floored at
/// [`P_FLOOR`].
pub fn cfi_matrix(p: &Array1<f64>, dp: [&Array1<f64>; 2], grid: &QuadratureGrid) -> Result<FisherMatrix> {
    for d in dp {
        if d.len() != p.len() {
            return Err(Error::Shape { expected: p.len(), found: d.len() });
        }
    }
    if p.len() != grid.n_points {
        return Err(Error::Shape { expected: grid.n_points, found: p.len() });
    }
    let mut q = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in i..2 {
            let integrand = Array1::from_shape_fn(p.len(), |k| dp[i][k] * dp[j][k] / p[k].max(P_FLOOR));
            q[i][j] = grid.integrate(&integrand);
            q[j][i] = q[i][j];
        }
    }
    Ok(FisherMatrix(q))
}

/// Phase-resolved homodyne Fisher information at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomodyneScan {
    /// Coarse phases in `[−π, π)`.
    pub phases: Vec<f64>,
    pub fisher: Vec<FisherMatrix>,
    /// `Tr[F⁻¹]` at each coarse phase.
    pub objective: Vec<f64>,
    pub best_phase: f64,
    /// Minimum of `Tr[F⁻¹]`; infinite if `F` is singular at every phase.
    pub best_scalar: f64,
}

/// Homodyne Fisher information of a stencil family of light states as a
/// function of the LO phase.
#[derive(Clone, Debug)]
pub struct HomodyneProblem {
    grid: QuadratureGrid,
    center: PhaseComponents,
    derivs: [PhaseComponents; 2],
}

impl HomodyneProblem {
    pub fn new(family: &StencilFamily<Ix2>, grid: &QuadratureGrid) -> Result<Self> {
        grid.validate()?;
        let center = family.center();
        let table = wavefunction_table(center.nrows(), grid);
        let [d1, d2] = family.derivatives();
        let problem = HomodyneProblem {
            grid: *grid,
            center: PhaseComponents::new(center, &table),
            derivs: [PhaseComponents::new(&d1, &table), PhaseComponents::new(&d2, &table)],
        };
        let norm = grid.integrate(&problem.center.evaluate(0.0));
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::GridInadequate(norm));
        }
        Ok(problem)
    }

    pub fn pdf(&self, phi: f64) -> Array1<f64> {
        self.center.evaluate(phi)
    }

    pub fn fisher(&self, phi: f64) -> FisherMatrix {
        let p = self.center.evaluate(phi);
        let dp = [self.derivs[0].evaluate(phi), self.derivs[1].evaluate(phi)];
        cfi_matrix(&p, [&dp[0], &dp[1]], &self.grid).expect("shapes fixed at construction")
    }

    pub fn objective(&self, phi: f64) -> f64 {
        self.fisher(phi).scalar_bound()
    }

    /// Coarse scan over `phase_count` equispaced phases in `[−π, π)`, then
    /// golden-section refinement to [`PHASE_TOLERANCE`] between the coarse
    /// neighbours of the best phase.
    pub fn optimize(&self, phase_count: usize) -> Result<HomodyneScan> {
        if phase_count < 3 {
            return Err(Error::InvalidArgument(format!("phase_count must be >= 3 (got {phase_count})")));
        }
        let step = 2.0 * PI / phase_count as f64;
        let phases: Vec<f64> = (0..phase_count).map(|j| -PI + step * j as f64).collect();
        let fisher: Vec<FisherMatrix> = phases.iter().map(|&phi| self.fisher(phi)).collect();
        let objective: Vec<f64> = fisher.iter().map(|f| f.scalar_bound()).collect();
        let (best_j, &coarse_best) =
            objective
                .iter()
                .enumerate()
                .fold((0, &f64::INFINITY), |acc, (j, v)| if *v < *acc.1 { (j, v) } else { acc });
        if !coarse_best.is_finite() {
            return Ok(HomodyneScan { phases, fisher, objective, best_phase: -PI, best_scalar: f64::INFINITY });
        }
        let center = phases[best_j];
        let (phi, value) = golden_section(|x| self.objective(x), center - step, center + step, PHASE_TOLERANCE);
        let (best_phase, best_scalar) =
            if value < coarse_best { (wrap_phase(phi), value) } else { (center, coarse_best) };
        Ok(HomodyneScan { phases, fisher, objective, best_phase, best_scalar })
    }
}

fn wrap_phase(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

/// Golden-section minimization on `[a, b]`; returns the best point visited.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Convenience wrapper: optimal homodyne scan for a stencil family of light
/// states.
pub fn optimize_lo_phase(
    family: &StencilFamily<Ix2>,
    grid: &QuadratureGrid,
    phase_count: usize,
) -> Result<HomodyneScan> {
    HomodyneProblem::new(family, grid)?.optimize(phase_count)
}
