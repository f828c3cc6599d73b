use ndarray::Array2;

use crate::C64;

/// Compressed sparse row matrix, used for the right-hand side of the master
/// equation where `H'` carries only a handful of entries per row.
#[derive(Clone, Debug)]
pub(crate) struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    pub(crate) fn from_dense(m: &Array2<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[[i, j]];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { dim, row_ptr, cols, vals }
    }

    /// `out = self · x` for row-major square `x` given as a flat slice.
    pub(crate) fn mul_dense(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            row.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (k, h) = (self.cols[p], self.vals[p]);
                let src = &x[k * n..(k + 1) * n];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += h * s;
                }
            }
        }
    }
}

/// Operator with at most one nonzero per row, `O[i, col[i]] = w[i]`.
/// `O ρ O†` is then a pure gather: `(OρO†)_ij = w_i ρ[c_i, c_j] w_j*`.
/// Empty rows are stored with weight zero so the inner loop is branch-free.
#[derive(Clone, Debug)]
pub(crate) struct Gather {
    cols: Vec<usize>,
    weights: Vec<C64>,
    conj_weights: Vec<C64>,
}

impl Gather {
    /// Returns `None` if some row of `m` has more than one nonzero.
    pub(crate) fn from_dense(m: &Array2<C64>, weight: f64) -> Option<Self> {
        let n = m.nrows();
        let (mut cols, mut weights) = (vec![0; n], vec![C64::new(0.0, 0.0); n]);
        for i in 0..n {
            let mut found = false;
            for j in 0..m.ncols() {
                let v = m[[i, j]];
                if v.re != 0.0 || v.im != 0.0 {
                    if found {
                        return None;
                    }
                    found = true;
                    cols[i] = j;
                    weights[i] = v * weight;
                }
            }
        }
        let conj_weights = weights.iter().map(|w| w.conj()).collect();
        Some(Gather { cols, weights, conj_weights })
    }

    /// `out += O x O†`.
    pub(crate) fn add_sandwich(&self, x: &[C64], out: &mut [C64]) {
        let n = self.cols.len();
        for (i, row) in out.chunks_exact_mut(n).enumerate() {
            let wi = self.weights[i];
            if wi.re == 0.0 && wi.im == 0.0 {
                continue;
            }
            let src = &x[self.cols[i] * n..(self.cols[i] + 1) * n];
            for ((o, &cj), &wj) in row.iter_mut().zip(&self.cols).zip(&self.conj_weights) {
                *o += wi * src[cj] * wj;
            }
        }
    }
}
