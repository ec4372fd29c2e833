//! Minimal compressed-sparse-row storage for complex operators.
//!
//! Operator matrices in the truncated Fock basis are mostly zeros (ladder
//! operators touch one off-diagonal, the Hamiltonian a handful of entries per
//! row), and the Liouvillian acting on the flattened density matrix is their
//! Kronecker combination. Exploiting that structure keeps the master-equation
//! right-hand side and the trajectory expectation values at O(nnz) instead of
//! O(dim²)-O(dim³). This is internal plumbing: the public API of the oracle
//! speaks dense `DMatrix` operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    // values split into (re, im) pairs so the matvec runs on plain f64 slices
    vals: Vec<(f64, f64)>,
}

impl CsrMatrix {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let (nrows, ncols) = m.shape();
        let mut triplets = Vec::new();
        for r in 0..nrows {
            for c in 0..ncols {
                let v = m[(r, c)];
                if v != C64::ZERO {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, triplets)
    }

    /// Assemble from (row, col, value) triplets; duplicate positions are
    /// summed.
    #[allow(clippy::needless_range_loop)]
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<(f64, f64)> = Vec::with_capacity(triplets.len());
        let mut rows_seen = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&last_r), Some(&last_c)) = (rows_seen.last(), col_idx.last()) {
                if last_r == r && last_c as usize == c {
                    let entry = vals.last_mut().unwrap();
                    entry.0 += v.re;
                    entry.1 += v.im;
                    continue;
                }
            }
            rows_seen.push(r);
            col_idx.push(c as u32);
            vals.push((v.re, v.im));
        }
        let mut k = 0;
        for r in 0..nrows {
            row_ptr[r] = k;
            while k < rows_seen.len() && rows_seen[k] == r {
                k += 1;
            }
        }
        row_ptr[nrows] = k;
        Self { nrows, ncols, row_ptr, col_idx, vals }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// y = A x on interleaved (re, im) slices of length 2·dim.
    #[allow(clippy::needless_range_loop)]
    pub fn matvec_flat(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), 2 * self.ncols);
        debug_assert_eq!(y.len(), 2 * self.nrows);
        for r in 0..self.nrows {
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k] as usize;
                let (vre, vim) = self.vals[k];
                let xr = x[2 * c];
                let xi = x[2 * c + 1];
                acc_re += vre * xr - vim * xi;
                acc_im += vre * xi + vim * xr;
            }
            y[2 * r] = acc_re;
            y[2 * r + 1] = acc_im;
        }
    }

    /// y = A x for complex vectors.
    #[allow(clippy::needless_range_loop)]
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (vre, vim) = self.vals[k];
                acc += C64::new(vre, vim) * x[self.col_idx[k] as usize];
            }
            y[r] = acc;
        }
    }

    /// Max absolute row sum (entry magnitudes).
    pub fn infinity_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for r in 0..self.nrows {
            let sum: f64 = (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|k| {
                    let (re, im) = self.vals[k];
                    re.hypot(im)
                })
                .sum();
            best = best.max(sum);
        }
        best
    }
}
