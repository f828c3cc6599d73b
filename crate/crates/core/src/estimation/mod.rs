//! Fisher-information machinery: five-point stencil derivatives, symmetric
//! logarithmic derivatives, quantum Fisher matrices for pure and mixed
//! states, and the nuisance / scalar multiparameter bounds.

mod scan;

use ndarray::{Array, Array1, Array2, ArrayView1, Dimension, LinalgScalar};
use serde::{Deserialize, Serialize};

use crate::hilbert::{hermitian_deviation, hermitian_eigh, max_abs, DensityMatrix, Operator, PureState};
use crate::{Error, Result, C64};

pub use scan::{
    fisher_scan, ClosedStencil, FisherEntry, FisherRecord, InitialState, OpenStencil, ScanMode, StencilFamily,
};

/// Determinant below which a Fisher matrix is treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Default relative SLD rank cutoff: pairs with `p_k + p_l ≤ 1e-10 · 2 p_max`
/// are dropped.
pub const DEFAULT_EPS_REL: f64 = 1e-10;

/// Largest dimension for which [`qfi_mixed`] cross-checks the eigenbasis
/// formula against the explicit SLD route.
pub const SLD_SELF_CHECK_MAX_DIM: usize = 128;

/// Parameter increments of the five-point stencil.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StencilConfig {
    pub delta_g1: f64,
    pub delta_g2: f64,
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig { delta_g1: 1e-4, delta_g2: 1e-4 }
    }
}

impl StencilConfig {
    pub fn uniform(delta: f64) -> Self {
        StencilConfig { delta_g1: delta, delta_g2: delta }
    }

    pub fn delta(&self, param: usize) -> f64 {
        [self.delta_g1, self.delta_g2][param]
    }

    pub fn validate(&self) -> Result<()> {
        for d in [self.delta_g1, self.delta_g2] {
            if !(d > 0.0 && d.is_finite() && d < 0.05) {
                return Err(Error::InvalidArgument(format!("stencil increment must lie in (0, 0.05) (got {d})")));
            }
        }
        Ok(())
    }
}

/// Five-point stencil `[f(−2Δ) − 8f(−Δ) + 8f(+Δ) − f(+2Δ)] / (12Δ)` applied
/// elementwise. `values` holds `f(λ−2Δ), f(λ−Δ), f(λ), f(λ+Δ), f(λ+2Δ)`.
pub fn stencil_derivative<A, D>(values: &[&Array<A, D>], delta: f64) -> Result<Array<A, D>>
where
    A: LinalgScalar + From<f64>,
    D: Dimension,
{
    if values.len() != 5 {
        return Err(Error::InvalidArgument(format!("stencil needs 5 samples, got {}", values.len())));
    }
    let shape = values[0].raw_dim();
    if let Some(bad) = values.iter().find(|v| v.raw_dim() != shape) {
        return Err(Error::Shape { expected: values[0].len(), found: bad.len() });
    }
    Ok(stencil_unchecked(values[0], values[1], values[3], values[4], delta))
}

pub(crate) fn stencil_unchecked<A, D>(
    m2: &Array<A, D>,
    m1: &Array<A, D>,
    p1: &Array<A, D>,
    p2: &Array<A, D>,
    delta: f64,
) -> Array<A, D>
where
    A: LinalgScalar + From<f64>,
    D: Dimension,
{
    let w1 = A::from(8.0 / (12.0 * delta));
    let w2 = A::from(1.0 / (12.0 * delta));
    let mut out = Array::zeros(m2.raw_dim());
    ndarray::Zip::from(&mut out).and(m2).and(m1).and(p1).and(p2).for_each(|o, &a, &b, &c, &d| {
        *o = (a - d) * w2 + (c - b) * w1;
    });
    out
}

/// Scalar form of [`stencil_derivative`].
pub fn stencil_derivative_scalar(values: [f64; 5], delta: f64) -> f64 {
    (values[0] - 8.0 * values[1] + 8.0 * values[3] - values[4]) / (12.0 * delta)
}

/// Real symmetric 2×2 Fisher matrix over `(g1, g2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix(pub [[f64; 2]; 2]);

impl FisherMatrix {
    pub fn new(q11: f64, q12: f64, q22: f64) -> Self {
        FisherMatrix([[q11, q12], [q12, q22]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn is_singular(&self) -> bool {
        self.det().is_nan() || self.det() <= SINGULAR_DET
    }

    /// Single-parameter bound `(Q_ii)⁻¹`; infinite if `Q_ii ≤ 0`.
    pub fn inv_single(&self, i: usize) -> f64 {
        let q = self.0[i][i];
        if q > 0.0 {
            1.0 / q
        } else {
            f64::INFINITY
        }
    }

    /// Nuisance bounds `((Q⁻¹)₁₁, (Q⁻¹)₂₂)`, or infinities when singular.
    pub fn nuisance_diag(&self) -> [f64; 2] {
        nuisance_diag(self)
    }

    /// Joint bound `Tr[Q⁻¹]`, or infinity when singular.
    pub fn scalar_bound(&self) -> f64 {
        scalar_bound(self)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let (a, b, c) = (self.0[0][0], self.0[0][1], self.0[1][1]);
        let mean = 0.5 * (a + c);
        let r = (0.5 * (a - c)).hypot(b);
        [mean - r, mean + r]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &FisherMatrix) -> FisherMatrix {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= other.0[i][j];
            }
        }
        out
    }
}

/// Diagonal of `Q⁻¹`: `(Q₂₂/det, Q₁₁/det)`.
pub fn nuisance_diag(q: &FisherMatrix) -> [f64; 2] {
    if q.is_singular() {
        return [f64::INFINITY; 2];
    }
    let det = q.det();
    [q.0[1][1] / det, q.0[0][0] / det]
}

/// `Tr[Q⁻¹] = (Q₁₁ + Q₂₂)/det`.
pub fn scalar_bound(q: &FisherMatrix) -> f64 {
    let [a, b] = nuisance_diag(q);
    a + b
}

/// Pure-state quantum Fisher matrix
/// `Q_ij = 4 Re[⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩]`.
pub fn qfi_pure(psi: &PureState, dpsi: [&Array1<C64>; 2]) -> Result<FisherMatrix> {
    for d in dpsi {
        if d.len() != psi.dim() {
            return Err(Error::Shape { expected: psi.dim(), found: d.len() });
        }
    }
    Ok(qfi_pure_view(psi.amplitudes().view(), [dpsi[0].view(), dpsi[1].view()]))
}

pub(crate) fn qfi_pure_view(psi: ArrayView1<C64>, dpsi: [ArrayView1<C64>; 2]) -> FisherMatrix {
    let dot =
        |a: &ArrayView1<C64>, b: &ArrayView1<C64>| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum() };
    let proj = [dot(&psi, &dpsi[0]), dot(&psi, &dpsi[1])];
    let mut q = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in i..2 {
            let v = 4.0 * (dot(&dpsi[i], &dpsi[j]) - proj[i].conj() * proj[j]).re;
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    FisherMatrix(q)
}

fn check_drho(rho: &DensityMatrix, drho: &Array2<C64>) -> Result<()> {
    if drho.nrows() != rho.dim() || drho.ncols() != rho.dim() {
        return Err(Error::Shape { expected: rho.dim(), found: drho.nrows() });
    }
    let dev = hermitian_deviation(drho);
    if dev > 1e-8 * max_abs(drho).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Absolute SLD cutoff used by default for a state with largest eigenvalue
/// `p_max`.
pub fn default_eps(p_max: f64) -> f64 {
    DEFAULT_EPS_REL * 2.0 * p_max
}

/// Eigenbasis of `ρ` with the derivatives rotated into it.
struct Eigenframe {
    p: Array1<f64>,
    v: Array2<C64>,
}

impl Eigenframe {
    fn new(rho: &Array2<C64>) -> Result<Self> {
        let (p, v) = hermitian_eigh(rho)?;
        Ok(Eigenframe { p, v })
    }

    fn rotate(&self, m: &Array2<C64>) -> Array2<C64> {
        self.v.t().mapv(|z| z.conj()).dot(&m.dot(&self.v))
    }

    fn sld_eigenbasis(&self, a: &Array2<C64>, eps: f64) -> Array2<C64> {
        let n = self.p.len();
        Array2::from_shape_fn((n, n), |(k, l)| {
            let s = self.p[k] + self.p[l];
            if s > eps {
                a[[k, l]] * (2.0 / s)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Symmetric logarithmic derivative solving `∂ρ = (Lρ + ρL)/2`, with
/// eigenbasis entries dropped where `p_k + p_l ≤ eps`.
pub fn sld(rho: &DensityMatrix, drho: &Array2<C64>, eps: f64) -> Result<Operator> {
    check_drho(rho, drho)?;
    let frame = Eigenframe::new(rho.matrix())?;
    let l = frame.sld_eigenbasis(&frame.rotate(drho), eps);
    let back = frame.v.dot(&l).dot(&frame.v.t().mapv(|z| z.conj()));
    let herm = (&back + &back.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
    Operator::new(herm)
}

/// `Q_ij = Tr[ρ (L_i L_j + L_j L_i)/2]` from explicit SLDs.
pub fn qfi_via_sld(rho: &DensityMatrix, drho: [&Array2<C64>; 2], eps: f64) -> Result<FisherMatrix> {
    let ls = [sld(rho, drho[0], eps)?, sld(rho, drho[1], eps)?];
    let mut q = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in i..2 {
            let prod = ls[i].matrix().dot(ls[j].matrix());
            let sym = &prod + &ls[j].matrix().dot(ls[i].matrix());
            let tr: C64 = rho.matrix().dot(&sym).diag().sum();
            q[i][j] = 0.5 * tr.re;
            q[j][i] = q[i][j];
        }
    }
    Ok(FisherMatrix(q))
}

/// Mixed-state quantum Fisher matrix in the eigenbasis of `ρ`,
/// `Q_ij = 2 Σ_{p_k+p_l > eps} Re[⟨k|∂_iρ|l⟩⟨l|∂_jρ|k⟩] / (p_k + p_l)`.
///
/// Up to dimension [`SLD_SELF_CHECK_MAX_DIM`] the result is cross-checked
/// against [`qfi_via_sld`] and a disagreement beyond `1e-8` (relative) is an
/// error.
pub fn qfi_mixed(rho: &DensityMatrix, drho: [&Array2<C64>; 2], eps: f64) -> Result<FisherMatrix> {
    check_drho(rho, drho[0])?;
    check_drho(rho, drho[1])?;
    let q = qfi_in_frame(&Eigenframe::new(rho.matrix())?, drho, eps);
    if rho.dim() <= SLD_SELF_CHECK_MAX_DIM {
        let alt = qfi_via_sld(rho, drho, eps)?;
        let scale = q.max_abs().max(alt.max_abs());
        let diff = q.sub(&alt).max_abs();
        if diff > 1e-8 * scale + 1e-12 {
            return Err(Error::Consistency(format!(
                "eigenbasis and SLD quantum Fisher matrices differ by {diff:.3e} (scale {scale:.3e})"
            )));
        }
    }
    Ok(q)
}

/// Eigenbasis formula without validation, with the cutoff `eps` given
/// relative to `2 p_max`. Also returns the smallest eigenvalue of `ρ`.
pub(crate) fn qfi_mixed_relative(
    rho: &Array2<C64>,
    drho: [&Array2<C64>; 2],
    eps_rel: f64,
) -> Result<(FisherMatrix, f64)> {
    let frame = Eigenframe::new(rho)?;
    let p_max = frame.p.iter().cloned().fold(0.0, f64::max);
    let q = qfi_in_frame(&frame, drho, eps_rel * 2.0 * p_max);
    let min = frame.p.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((q, min))
}

fn qfi_in_frame(frame: &Eigenframe, drho: [&Array2<C64>; 2], eps: f64) -> FisherMatrix {
    let a = [frame.rotate(drho[0]), frame.rotate(drho[1])];
    let n = frame.p.len();
    let mut q = [[0.0; 2]; 2];
    for k in 0..n {
        for l in 0..n {
            let s = frame.p[k] + frame.p[l];
            if s <= eps {
                continue;
            }
            for i in 0..2 {
                for j in i..2 {
                    // A_j[l,k] = conj(A_j[k,l])
                    q[i][j] += 2.0 * (a[i][[k, l]] * a[j][[k, l]].conj()).re / s;
                }
            }
        }
    }
    q[1][0] = q[0][1];
    FisherMatrix(q)
}
