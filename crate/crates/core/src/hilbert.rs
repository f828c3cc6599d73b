//! Truncated Fock-space primitives: operators, canonical states, tensor
//! products and partial traces over qubit ⊗ cavity ⊗ mechanics.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use ndarray::{linalg::kron, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub const QUBIT_DIM: usize = 2;

/// Largest allowed probability mass lost by truncating a Fock expansion.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Truncation guard used with the reduced open-system cutoffs (15, 15).
pub const REDUCED_TRUNCATION_TOLERANCE: f64 = 1e-4;

const MAX_SEARCH_DIM: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Qubit,
    Cavity,
    Mechanics,
}

impl Subsystem {
    pub const ALL: [Subsystem; 3] = [Subsystem::Qubit, Subsystem::Cavity, Subsystem::Mechanics];

    pub fn label(self) -> &'static str {
        match self {
            Subsystem::Qubit => "qubit",
            Subsystem::Cavity => "cavity",
            Subsystem::Mechanics => "mechanics",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Truncation of the tripartite space. The qubit is always two-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertDims {
    pub cavity: usize,
    pub mechanics: usize,
    #[serde(default = "default_tolerance")]
    pub truncation_tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TRUNCATION_TOLERANCE
}

impl Default for HilbertDims {
    fn default() -> Self {
        HilbertDims { cavity: 25, mechanics: 25, truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE }
    }
}

impl HilbertDims {
    pub fn new(cavity: usize, mechanics: usize) -> Result<Self> {
        let dims = HilbertDims { cavity, mechanics, truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE };
        dims.validate()?;
        Ok(dims)
    }

    /// Reduced cutoffs used for open-system runs.
    pub fn reduced() -> Self {
        HilbertDims { cavity: 15, mechanics: 15, truncation_tolerance: REDUCED_TRUNCATION_TOLERANCE }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.truncation_tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cavity == 0 || self.mechanics == 0 {
            return Err(Error::InvalidDimension(format!(
                "cutoffs must be >= 1 (cavity {}, mechanics {})",
                self.cavity, self.mechanics
            )));
        }
        if !(self.truncation_tolerance > 0.0 && self.truncation_tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance must lie in (0, 1), got {}",
                self.truncation_tolerance
            )));
        }
        Ok(())
    }

    pub fn qubit(&self) -> usize {
        QUBIT_DIM
    }

    pub fn total(&self) -> usize {
        QUBIT_DIM * self.cavity * self.mechanics
    }

    pub fn of(&self, s: Subsystem) -> usize {
        match s {
            Subsystem::Qubit => QUBIT_DIM,
            Subsystem::Cavity => self.cavity,
            Subsystem::Mechanics => self.mechanics,
        }
    }

    /// Flat index of `|q, n, m⟩`.
    #[inline]
    pub fn index(&self, q: usize, n: usize, m: usize) -> usize {
        (q * self.cavity + n) * self.mechanics + m
    }

    /// Inverse of [`HilbertDims::index`].
    #[inline]
    pub fn split(&self, i: usize) -> (usize, usize, usize) {
        let m = i % self.mechanics;
        let rest = i / self.mechanics;
        (rest / self.cavity, rest % self.cavity, m)
    }

    /// Same truncation with both cutoffs doubled.
    pub fn doubled(&self) -> Self {
        HilbertDims { cavity: 2 * self.cavity, mechanics: 2 * self.mechanics, ..*self }
    }
}

/// Dense square operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: Array2<C64>,
}

impl Operator {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Operator { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Operator { matrix: Array2::eye(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator { matrix: Array2::zeros((dim, dim)) }
    }

    pub fn diagonal(values: impl IntoIterator<Item = C64>) -> Self {
        let d: Array1<C64> = values.into_iter().collect();
        Operator { matrix: Array2::from_diag(&d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dagger(&self) -> Operator {
        Operator { matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator { matrix: &self.matrix * s }
    }

    pub fn scale_real(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest elementwise deviation `|A − A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator { matrix: self.matrix.dot(&other.matrix) - other.matrix.dot(&self.matrix) }
    }

    pub fn apply(&self, psi: &PureState) -> Result<Array1<C64>> {
        check_dim(self.dim(), psi.dim())?;
        Ok(self.matrix.dot(&psi.amplitudes))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn eigenvalues_hermitian(&self) -> Result<Array1<f64>> {
        Ok(self.matrix.eigvalsh(UPLO::Lower)?)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { matrix: self.matrix.dot(&rhs.matrix) }
    }
}

pub(crate) fn hermitian_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
///
/// The input is copied into column-major order first: LAPACK would otherwise
/// see the transpose, i.e. the complex conjugate, and return conjugated
/// eigenvectors.
pub(crate) fn hermitian_eigh(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = m.nrows();
    let f = Array2::from_shape_fn((n, n).f(), |(i, j)| m[[i, j]]);
    Ok(f.eigh(UPLO::Lower)?)
}

pub(crate) fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::Shape { expected, found })
    } else {
        Ok(())
    }
}

/// Bosonic lowering operator truncated to `dim` Fock levels.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::InvalidDimension("annihilation operator needs dim >= 1".into()));
    }
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator { matrix: m })
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.dagger())
}

/// Number operator `a†a`, built directly as a diagonal.
pub fn number(dim: usize) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::InvalidDimension("number operator needs dim >= 1".into()));
    }
    Ok(Operator::diagonal((0..dim).map(|n| C64::new(n as f64, 0.0))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Qubit operators in the basis `{|g⟩ = 0, |e⟩ = 1}` with `σ⁺ = |e⟩⟨g|`.
pub fn pauli(which: Pauli) -> Operator {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match which {
        Pauli::X => [[z, one], [one, z]],
        // σ_y = −iσ⁺ + iσ⁻
        Pauli::Y => [[z, i], [-i, z]],
        Pauli::Z => [[-one, z], [z, one]],
        Pauli::Plus => [[z, z], [one, z]],
        Pauli::Minus => [[z, one], [z, z]],
    };
    Operator { matrix: Array2::from_shape_fn((2, 2), |(r, c)| m[r][c]) }
}

/// Kronecker product of the factors, leftmost factor outermost.
pub fn tensor(factors: &[&Operator]) -> Result<Operator> {
    let (first, rest) =
        factors.split_first().ok_or_else(|| Error::InvalidArgument("tensor product of an empty list".into()))?;
    let matrix = rest.iter().fold(first.matrix.clone(), |acc, f| kron(&acc, &f.matrix));
    Ok(Operator { matrix })
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Array1<C64>,
}

impl PureState {
    /// Normalizes the given amplitudes.
    pub fn new(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
        }
        Ok(PureState { amplitudes: amplitudes.mapv(|z| z / norm) })
    }

    /// Wraps amplitudes that are already normalized (e.g. unitary images).
    pub(crate) fn from_normalized(amplitudes: Array1<C64>) -> Self {
        PureState { amplitudes }
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Shape { expected: dim, found: index + 1 });
        }
        let mut v = Array1::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(PureState { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        let v = op.apply(self)?;
        Ok(inner(&self.amplitudes, &v))
    }

    pub fn tensor(factors: &[&PureState]) -> Result<PureState> {
        let (first, rest) =
            factors.split_first().ok_or_else(|| Error::InvalidArgument("tensor product of an empty list".into()))?;
        let mut v = first.amplitudes.clone();
        for f in rest {
            let mut out = Array1::zeros(v.len() * f.dim());
            for (i, a) in v.iter().enumerate() {
                for (j, b) in f.amplitudes.iter().enumerate() {
                    out[i * f.dim() + j] = a * b;
                }
            }
            v = out;
        }
        Ok(PureState { amplitudes: v })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = &self.amplitudes;
        let n = v.len();
        let m = Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj());
        DensityMatrix { matrix: m }
    }
}

#[inline]
pub(crate) fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Hermitian, unit-trace density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10) and unit trace (1e-8).
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.diag().iter().map(|z| z.re).sum::<f64>();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: Array2<C64>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        Ok(self.matrix.eigvalsh(UPLO::Lower)?)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_dim(self.dim(), op.dim())?;
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[[i, j]] * op.matrix[[j, i]];
            }
        }
        Ok(acc)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> Result<f64> {
        check_dim(self.dim(), psi.dim())?;
        let v = self.matrix.dot(psi.amplitudes());
        Ok(inner(psi.amplitudes(), &v).re)
    }

    pub fn tensor(factors: &[&DensityMatrix]) -> Result<DensityMatrix> {
        let (first, rest) =
            factors.split_first().ok_or_else(|| Error::InvalidArgument("tensor product of an empty list".into()))?;
        let matrix = rest.iter().fold(first.matrix.clone(), |acc, f| kron(&acc, &f.matrix));
        Ok(DensityMatrix { matrix })
    }
}

/// Coherent state `|α⟩` on `dim` Fock levels with the default truncation
/// tolerance.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<PureState> {
    coherent_state_with_tolerance(alpha, dim, DEFAULT_TRUNCATION_TOLERANCE)
}

/// Coherent state, renormalized after truncation. Fails when the discarded
/// probability mass exceeds `tolerance`.
pub fn coherent_state_with_tolerance(alpha: C64, dim: usize, tolerance: f64) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidDimension("coherent state needs dim >= 1".into()));
    }
    let c0 = (-alpha.norm_sqr() / 2.0).exp();
    let mut amps = Array1::zeros(dim);
    let mut c = C64::new(c0, 0.0);
    let mut kept = 0.0;
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps[n] = c;
        kept += c.norm_sqr();
    }
    let deficit = (1.0 - kept).max(0.0);
    if deficit > tolerance {
        let mut required = dim;
        let mut mass = kept;
        while 1.0 - mass > tolerance && required < MAX_SEARCH_DIM {
            c = c * alpha / (required as f64).sqrt();
            mass += c.norm_sqr();
            required += 1;
        }
        return Err(Error::Truncation {
            what: format!("coherent amplitude {alpha}"),
            dim,
            deficit,
            tolerance,
            required,
        });
    }
    PureState::new(amps)
}

/// Thermal state with mean occupation `nbar`, default truncation tolerance.
pub fn thermal_state(nbar: f64, dim: usize) -> Result<DensityMatrix> {
    thermal_state_with_tolerance(nbar, dim, DEFAULT_TRUNCATION_TOLERANCE)
}

/// Diagonal state `p_n = n̄ⁿ/(1+n̄)^{n+1}`, renormalized to unit trace.
pub fn thermal_state_with_tolerance(nbar: f64, dim: usize, tolerance: f64) -> Result<DensityMatrix> {
    let p = thermal_populations(nbar, dim, tolerance)?;
    Ok(DensityMatrix { matrix: Array2::from_diag(&p.mapv(|x| C64::new(x, 0.0))) })
}

/// Occupation probabilities of the truncated thermal state.
pub fn thermal_populations(nbar: f64, dim: usize, tolerance: f64) -> Result<Array1<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidArgument(format!("thermal occupation must be >= 0, got {nbar}")));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension("thermal state needs dim >= 1".into()));
    }
    let ratio = nbar / (1.0 + nbar);
    let deficit = ratio.powi(dim as i32);
    if deficit > tolerance {
        let required = (tolerance.ln() / ratio.ln()).ceil() as usize;
        return Err(Error::Truncation {
            what: format!("thermal occupation {nbar}"),
            dim,
            deficit,
            tolerance,
            required,
        });
    }
    let mut p = Array1::zeros(dim);
    let mut x = 1.0 / (1.0 + nbar);
    for n in 0..dim {
        p[n] = x;
        x *= ratio;
    }
    let total = p.sum();
    Ok(p / total)
}

/// Reduction of a tripartite state onto one subsystem.
pub trait PartialTrace {
    fn partial_trace(&self, dims: &HilbertDims, keep: Subsystem) -> Result<DensityMatrix>;
}

impl PartialTrace for PureState {
    fn partial_trace(&self, dims: &HilbertDims, keep: Subsystem) -> Result<DensityMatrix> {
        check_dim(dims.total(), self.dim())?;
        Ok(DensityMatrix { matrix: reduce_pure(self.amplitudes.view(), dims, keep) })
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, dims: &HilbertDims, keep: Subsystem) -> Result<DensityMatrix> {
        check_dim(dims.total(), self.dim())?;
        Ok(DensityMatrix { matrix: reduce_mixed(&self.matrix, dims, keep) })
    }
}

/// `Tr_{ŝ}|ψ⟩⟨ψ|` for an unnormalized amplitude vector.
pub(crate) fn reduce_pure(psi: ndarray::ArrayView1<C64>, dims: &HilbertDims, keep: Subsystem) -> Array2<C64> {
    let (nq, nc, nm) = (QUBIT_DIM, dims.cavity, dims.mechanics);
    let t = psi.into_shape_with_order((nq, nc, nm)).expect("dimension checked by caller");
    let k = dims.of(keep);
    let mut rho = Array2::<C64>::zeros((k, k));
    match keep {
        Subsystem::Qubit => {
            for a in 0..nq {
                for b in 0..=a {
                    let mut s = C64::new(0.0, 0.0);
                    for (x, y) in t.index_axis(Axis(0), a).iter().zip(t.index_axis(Axis(0), b).iter()) {
                        s += x * y.conj();
                    }
                    rho[[a, b]] = s;
                    rho[[b, a]] = s.conj();
                }
            }
        }
        Subsystem::Cavity => {
            for q in 0..nq {
                let block = t.index_axis(Axis(0), q);
                for a in 0..nc {
                    let ra = block.row(a);
                    for b in 0..=a {
                        let rb = block.row(b);
                        let mut s = C64::new(0.0, 0.0);
                        for (x, y) in ra.iter().zip(rb.iter()) {
                            s += x * y.conj();
                        }
                        rho[[a, b]] += s;
                    }
                }
            }
            for a in 0..nc {
                for b in 0..a {
                    rho[[b, a]] = rho[[a, b]].conj();
                }
            }
        }
        Subsystem::Mechanics => {
            let flat = t.into_shape_with_order((nq * nc, nm)).expect("contiguous");
            for row in flat.rows() {
                for a in 0..nm {
                    let xa = row[a];
                    if xa == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..=a {
                        rho[[a, b]] += xa * row[b].conj();
                    }
                }
            }
            for a in 0..nm {
                for b in 0..a {
                    rho[[b, a]] = rho[[a, b]].conj();
                }
            }
        }
    }
    rho
}

pub(crate) fn reduce_mixed(m: &Array2<C64>, dims: &HilbertDims, keep: Subsystem) -> Array2<C64> {
    let k = dims.of(keep);
    let mut rho = Array2::<C64>::zeros((k, k));
    let (nq, nc, nm) = (QUBIT_DIM, dims.cavity, dims.mechanics);
    match keep {
        Subsystem::Qubit => {
            for a in 0..nq {
                for b in 0..nq {
                    let mut s = C64::new(0.0, 0.0);
                    for r in 0..nc * nm {
                        s += m[[a * nc * nm + r, b * nc * nm + r]];
                    }
                    rho[[a, b]] = s;
                }
            }
        }
        Subsystem::Cavity => {
            for a in 0..nc {
                for b in 0..nc {
                    let mut s = C64::new(0.0, 0.0);
                    for q in 0..nq {
                        for mm in 0..nm {
                            s += m[[dims.index(q, a, mm), dims.index(q, b, mm)]];
                        }
                    }
                    rho[[a, b]] = s;
                }
            }
        }
        Subsystem::Mechanics => {
            for a in 0..nm {
                for b in 0..nm {
                    let mut s = C64::new(0.0, 0.0);
                    for o in 0..nq * nc {
                        s += m[[o * nm + a, o * nm + b]];
                    }
                    rho[[a, b]] = s;
                }
            }
        }
    }
    rho
}
