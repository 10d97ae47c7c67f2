//! Weight bookkeeping on tensor powers of C^2 and embedding of local
//! operators whose argument is shifted by the weight of spectator factors.
//!
//! Basis conventions used everywhere in the crate: a tensor power of n
//! two-dimensional factors is indexed by 0..2^n, factor 0 occupying the most
//! significant bit.  Bit value 0 means the weight +1 vector e[1], bit value 1
//! the weight -1 vector e[-1], so index 0 is the highest weight vector
//! e[1] x ... x e[1].

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Bit of `index` at tensor `site` (0-based from the left) among `n` factors.
#[inline]
pub fn site_bit(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - 1 - site)) & 1
}

/// Weight (+1 or -1) carried by `site` in the basis vector `index`.
#[inline]
pub fn site_weight(index: usize, site: usize, n: usize) -> i64 {
    1 - 2 * site_bit(index, site, n) as i64
}

/// Total h-eigenvalue of the basis vector `index` of (C^2)^{x n}.
pub fn total_weight(index: usize, n: usize) -> i64 {
    n as i64 - 2 * (index.count_ones() as i64)
}

/// Indices of the zero-weight subspace W[0], in increasing order.
///
/// Empty when n is odd.
pub fn zero_weight_indices(n: usize) -> Vec<usize> {
    (0..1usize << n)
        .filter(|i| total_weight(*i, n) == 0)
        .collect()
}

/// A matrix on (C^2)^{x n} together with the weight of each basis vector.
///
/// The weights make it cheap to check weight conservation ([h, M] = 0) and to
/// slice out blocks of fixed weight.
#[derive(Debug, Clone)]
pub struct DynamicalMatrix {
    entries: DMatrix<C64>,
    weights: Vec<i64>,
}

impl DynamicalMatrix {
    /// Wrap a 2^n x 2^n matrix acting on n two-dimensional factors.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        if !dim.is_power_of_two() || entries.ncols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected a square matrix of power-of-two size, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let weights = (0..dim).map(|i| total_weight(i, n)).collect();
        Ok(Self { entries, weights })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    /// Largest |entry| connecting two different weights; 0 for a
    /// weight-conserving matrix.
    pub fn weight_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if self.weights[r] != self.weights[c] {
                    worst = worst.max(self.entries[(r, c)].norm());
                }
            }
        }
        worst
    }

    /// Block mapping weight-w vectors to weight-w vectors.
    pub fn weight_block(&self, w: i64) -> DMatrix<C64> {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.weights[i] == w).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])])
    }
}

/// Embed a local operator into (C^2)^{x n}, evaluating its parameter at
/// `lambda - 2*eta*(sum of spectator weights)`.
///
/// `op_sites` lists the factors the operator acts on, in the tensor order of
/// the operator's own matrix (which must be 2^{op_sites.len()} square);
/// `shift_sites` lists the spectator factors whose total weight shifts the
/// argument.  `op` is called once per distinct spectator weight.
pub fn embed_shifted<F>(
    n: usize,
    op_sites: &[usize],
    shift_sites: &[usize],
    lambda: C64,
    step: C64,
    mut op: F,
) -> Result<DMatrix<C64>>
where
    F: FnMut(C64) -> Result<DMatrix<C64>>,
{
    let dim = 1usize << n;
    let k = op_sites.len();
    let local_dim = 1usize << k;
    for &s in op_sites.iter().chain(shift_sites) {
        if s >= n {
            return Err(Error::ShapeMismatch(format!(
                "site {s} out of range for {n} factors"
            )));
        }
    }
    let mut cache: HashMap<i64, DMatrix<C64>> = HashMap::new();
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mu: i64 = shift_sites.iter().map(|&s| site_weight(col, s, n)).sum();
        if !cache.contains_key(&mu) {
            let local = op(lambda - step * mu as f64)?;
            if local.nrows() != local_dim || local.ncols() != local_dim {
                return Err(Error::ShapeMismatch(format!(
                    "local operator must be {local_dim}x{local_dim}, got {}x{}",
                    local.nrows(),
                    local.ncols()
                )));
            }
            cache.insert(mu, local);
        }
        let local = &cache[&mu];
        let mut in_sub = 0usize;
        for (r, &s) in op_sites.iter().enumerate() {
            in_sub |= site_bit(col, s, n) << (k - 1 - r);
        }
        for out_sub in 0..local_dim {
            let v = local[(out_sub, in_sub)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let mut row = col;
            for (r, &s) in op_sites.iter().enumerate() {
                let bit = (out_sub >> (k - 1 - r)) & 1;
                let mask = 1usize << (n - 1 - s);
                row = (row & !mask) | (bit << (n - 1 - s));
            }
            out[(row, col)] += v;
        }
    }
    Ok(out)
}

/// Numerical rank of a complex matrix by column-pivoted Gaussian
/// elimination; a pivot below `rel_tol * max_abs_entry` stops the count.
pub fn numerical_rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for _ in 0..rows.min(cols) {
        let mut best = (rank, rank, 0.0f64);
        for r in rank..rows {
            for c in rank..cols {
                let v = a[(r, c)].norm();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        a.swap_rows(rank, best.0);
        a.swap_columns(rank, best.1);
        let pivot = a[(rank, rank)];
        for r in rank + 1..rows {
            let f = a[(r, rank)] / pivot;
            for c in rank..cols {
                let sub = f * a[(rank, c)];
                a[(r, c)] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Partial trace over the first qubit factor: maps 2d x 2d to d x d.
pub fn partial_trace_first(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let dim = m.nrows();
    if m.ncols() != dim || dim % 2 != 0 || dim == 0 {
        return Err(Error::ShapeMismatch(format!(
            "partial trace needs a square matrix of even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d = dim / 2;
    Ok(DMatrix::from_fn(d, d, |r, c| m[(r, c)] + m[(d + r, d + c)]))
}

/// Max |entry| of the difference of two equally sized matrices.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max |entry| of a matrix.
pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
