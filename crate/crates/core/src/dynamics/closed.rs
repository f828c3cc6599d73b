use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::hilbert::{hermitian_eigh, Operator, PureState};
use crate::{Error, Result, C64};

/// Spectral decomposition of one invariant block of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    /// Basis indices spanned by the block, ascending.
    pub indices: Vec<usize>,
    pub energies: Array1<f64>,
    /// Columns are eigenvectors expressed on `indices`.
    pub vectors: Array2<C64>,
}

/// Eigendecomposition `H = V diag(λ) V†`, stored block by block.
///
/// Blocks are the connected components of the sparsity graph of `H`; for the
/// tripartite Hamiltonian these are the sectors of fixed `a†a + σ⁺σ⁻`, so the
/// decomposition costs `O(Σ d_k³)` instead of `O(d³)`.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    blocks: Vec<SpectralBlock>,
}

/// Eigendecomposition of a Hermitian operator.
pub fn diagonalize(h: &Operator) -> Result<Propagator> {
    let m = h.matrix();
    let dim = h.dim();
    let scale = h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    if dev > 1e-12 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let blocks = connected_components(m)
        .into_par_iter()
        .map(|indices| diagonalize_block(m, indices))
        .collect::<Result<Vec<_>>>()?;
    Ok(Propagator { dim, blocks })
}

fn diagonalize_block(m: &Array2<C64>, indices: Vec<usize>) -> Result<SpectralBlock> {
    let k = indices.len();
    if k == 1 {
        let i = indices[0];
        return Ok(SpectralBlock { indices, energies: Array1::from_elem(1, m[[i, i]].re), vectors: Array2::eye(1) });
    }
    // Remove the mean diagonal before the solve; large uniform offsets (the
    // ω_c ladder) would otherwise cost absolute eigenvalue accuracy.
    let shift = indices.iter().map(|&i| m[[i, i]].re).sum::<f64>() / k as f64;
    let sub = Array2::from_shape_fn((k, k), |(r, c)| {
        let v = m[[indices[r], indices[c]]];
        if r == c {
            v - shift
        } else {
            v
        }
    });
    let (w, v) = hermitian_eigh(&sub)?;
    Ok(SpectralBlock { indices, energies: w.mapv(|x| x + shift), vectors: v })
}

fn connected_components(m: &Array2<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if m[[i, j]] != C64::new(0.0, 0.0) || m[[j, i]] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// All eigenvalues, ordered block by block.
    pub fn eigenvalues(&self) -> Array1<f64> {
        self.blocks.iter().flat_map(|b| b.energies.iter().cloned()).collect()
    }

    /// Dense eigenvector matrix whose columns match [`Propagator::eigenvalues`].
    pub fn eigenvectors(&self) -> Array2<C64> {
        let mut v = Array2::zeros((self.dim, self.dim));
        let mut col = 0;
        for b in &self.blocks {
            for c in 0..b.indices.len() {
                for (r, &i) in b.indices.iter().enumerate() {
                    v[[i, col]] = b.vectors[[r, c]];
                }
                col += 1;
            }
        }
        v
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Operator {
        let mut m = Array2::zeros((self.dim, self.dim));
        for b in &self.blocks {
            let k = b.indices.len();
            let scaled = Array2::from_shape_fn((k, k), |(r, c)| b.vectors[[r, c]] * b.energies[c]);
            let prod = scaled.dot(&b.vectors.t().mapv(|z| z.conj()));
            for (r, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    m[[i, j]] = prod[[r, c]];
                }
            }
        }
        Operator::new(m).expect("square")
    }

    /// Projects `psi0` onto the eigenbasis once so that many times can be
    /// evaluated cheaply.
    pub fn prepare(&self, psi0: &PureState) -> Result<Trajectory<'_>> {
        if psi0.dim() != self.dim {
            return Err(Error::Shape { expected: self.dim, found: psi0.dim() });
        }
        let amps = psi0.amplitudes();
        let coefficients = self
            .blocks
            .iter()
            .map(|b| {
                let local: Array1<C64> = b.indices.iter().map(|&i| amps[i]).collect();
                b.vectors.t().mapv(|z| z.conj()).dot(&local)
            })
            .collect();
        Ok(Trajectory { prop: self, coefficients })
    }

    pub fn evolve(&self, psi0: &PureState, t: f64) -> Result<PureState> {
        if t == 0.0 {
            if psi0.dim() != self.dim {
                return Err(Error::Shape { expected: self.dim, found: psi0.dim() });
            }
            // exact identity rather than V V† ψ0 with its rounding
            return Ok(psi0.clone());
        }
        Ok(self.prepare(psi0)?.at(t))
    }
}

/// Initial state expanded in a propagator's eigenbasis.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    prop: &'a Propagator,
    coefficients: Vec<Array1<C64>>,
}

impl Trajectory<'_> {
    /// `ψ(t) = V e^{−iλt} V† ψ(0)`.
    pub fn at(&self, t: f64) -> PureState {
        let mut out = Array1::zeros(self.prop.dim);
        for (b, c) in self.prop.blocks.iter().zip(&self.coefficients) {
            let phased: Array1<C64> =
                c.iter().zip(b.energies.iter()).map(|(z, &e)| z * C64::from_polar(1.0, -e * t)).collect();
            let local = b.vectors.dot(&phased);
            for (r, &i) in b.indices.iter().enumerate() {
                out[i] = local[r];
            }
        }
        PureState::from_normalized(out)
    }
}

/// `e^{−iHt}ψ0` using a precomputed decomposition.
pub fn evolve_pure(prop: &Propagator, psi0: &PureState, t: f64) -> Result<PureState> {
    prop.evolve(psi0, t)
}
