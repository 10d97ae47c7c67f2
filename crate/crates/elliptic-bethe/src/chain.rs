//! Tensor products of fundamental representations: the L-operator product,
//! its a/b/c/d blocks acting as difference operators on vector-valued
//! functions of the dynamical parameter, the transfer matrix, and the
//! rank test for Bethe-type vectors.
//!
//! All operators act on functions f of lambda by
//! `(O f)(lambda) = sum_k M_k(lambda) f(lambda + 2*eta*k)`; composition and
//! application are pointwise, no grid is ever introduced.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rmatrix::{rmatrix_eval, rs_coeffs};
use crate::tensor::{embed_shifted, numerical_rank, total_weight, zero_weight_indices};
use crate::theta::ModularParams;

/// Coefficient of one shift term: lambda to a matrix.
pub type CoeffFn = Arc<dyn Fn(C64) -> Result<DMatrix<C64>> + Send + Sync>;
/// A vector-valued function of lambda, as fed to difference operators.
pub type VectorFn<'a> = &'a dyn Fn(C64) -> Result<DVector<C64>>;

/// Finite sum of (integer shift, coefficient) terms acting on functions of
/// lambda.  The shift unit is `step` (2*eta everywhere in this crate).
#[derive(Clone)]
pub struct DifferenceOperator {
    step: C64,
    dim: usize,
    terms: Vec<(i64, CoeffFn)>,
}

impl DifferenceOperator {
    /// Single-term operator f(lambda) -> coeff(lambda) f(lambda + step*shift).
    pub fn from_term<F>(step: C64, dim: usize, shift: i64, coeff: F) -> Self
    where
        F: Fn(C64) -> Result<DMatrix<C64>> + Send + Sync + 'static,
    {
        Self {
            step,
            dim,
            terms: vec![(shift, Arc::new(coeff))],
        }
    }

    /// Zero-shift multiplication by a scalar function of lambda.
    pub fn scalar_multiplication<F>(step: C64, dim: usize, f: F) -> Self
    where
        F: Fn(C64) -> Result<C64> + Send + Sync + 'static,
    {
        Self::from_term(step, dim, 0, move |lam| {
            Ok(DMatrix::from_diagonal_element(dim, dim, f(lam)?))
        })
    }

    /// Zero-shift multiplication dispatching on the weight of each basis
    /// vector: entry i is f(lambda, weight_i).  This resolves
    /// operator-valued arguments like `lambda - 2*eta*h` exactly.
    pub fn weight_multiplication<F>(step: C64, weights: Vec<i64>, f: F) -> Self
    where
        F: Fn(C64, i64) -> Result<C64> + Send + Sync + 'static,
    {
        let dim = weights.len();
        Self::from_term(step, dim, 0, move |lam| {
            let mut m = DMatrix::zeros(dim, dim);
            for (i, &w) in weights.iter().enumerate() {
                m[(i, i)] = f(lam, w)?;
            }
            Ok(m)
        })
    }

    pub fn step(&self) -> C64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distinct shifts present, ascending.
    pub fn shifts(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.terms.iter().map(|(k, _)| *k).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Total coefficient matrix of one shift at the given lambda.
    pub fn coefficient(&self, shift: i64, lambda: C64) -> Result<DMatrix<C64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (k, f) in &self.terms {
            if *k == shift {
                m += f(lambda)?;
            }
        }
        Ok(m)
    }

    /// Pointwise application at lambda.
    pub fn apply(&self, f: VectorFn, lambda: C64) -> Result<DVector<C64>> {
        let mut out = DVector::zeros(self.dim);
        for (k, coeff) in &self.terms {
            let v = f(lambda + self.step * *k as f64)?;
            if v.len() != self.dim {
                return Err(Error::ShapeMismatch(format!(
                    "function value has length {}, operator dimension {}",
                    v.len(),
                    self.dim
                )));
            }
            out += coeff(lambda)? * v;
        }
        Ok(out)
    }

    /// Sum of operators (same step and dimension).
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            step: self.step,
            dim: self.dim,
            terms,
        })
    }

    /// Operator composition `self . other` (self applied after other):
    /// shifts add, the right coefficient is evaluated at the shifted
    /// argument.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms: Vec<(i64, CoeffFn)> = Vec::new();
        for (k, mk) in &self.terms {
            for (l, nl) in &other.terms {
                let (k, l) = (*k, *l);
                let mk = mk.clone();
                let nl = nl.clone();
                let step = self.step;
                terms.push((
                    k + l,
                    Arc::new(move |lam: C64| Ok(mk(lam)? * nl(lam + step * k as f64)?)),
                ));
            }
        }
        Ok(Self {
            step: self.step,
            dim: self.dim,
            terms,
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || (self.step - other.step).norm() > 1e-14 {
            return Err(Error::ShapeMismatch(format!(
                "incompatible operators: dims {} vs {}, steps {} vs {}",
                self.dim, other.dim, self.step, other.step
            )));
        }
        Ok(())
    }
}

/// Chain of n fundamental two-dimensional factors with evaluation points
/// z_1..z_n; the auxiliary factor is numbered 0, chain sites 1..n.
#[derive(Debug, Clone)]
pub struct FundamentalChain {
    z_points: Vec<C64>,
    params: ModularParams,
}

impl FundamentalChain {
    pub fn new(z_points: Vec<C64>, params: ModularParams) -> Result<Self> {
        if z_points.is_empty() {
            return Err(Error::ShapeMismatch("chain needs at least one site".into()));
        }
        for i in 0..z_points.len() {
            for j in i + 1..z_points.len() {
                let (d, _, _) = params.lattice_reduce(z_points[i] - z_points[j]);
                if d.norm() < 1e-9 {
                    return Err(Error::CoincidentPoints(z_points[i], z_points[j]));
                }
            }
        }
        Ok(Self { z_points, params })
    }

    pub fn n(&self) -> usize {
        self.z_points.len()
    }

    pub fn z_points(&self) -> &[C64] {
        &self.z_points
    }

    pub fn params(&self) -> &ModularParams {
        &self.params
    }

    /// Dimension 2^n of the chain space W.
    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// Indices of the zero-weight subspace of W, ascending.
    pub fn zero_weight(&self) -> Vec<usize> {
        zero_weight_indices(self.n())
    }

    /// The ordered product
    /// `L(z,lambda) = R^{(01)}(z-z_1, lambda-2eta(h2+..+hn)) ... R^{(0n)}(z-z_n, lambda)`
    /// on V x W (dimension 2^{n+1}).
    pub fn l_operator(&self, z: C64, lambda: C64) -> Result<DMatrix<C64>> {
        let n = self.n();
        let total = n + 1;
        let p = self.params;
        let mut out: Option<DMatrix<C64>> = None;
        for j in 1..=n {
            let spectators: Vec<usize> = (j + 1..=n).collect();
            let zz = z - self.z_points[j - 1];
            let factor = embed_shifted(total, &[0, j], &spectators, lambda, p.step(), |lam| {
                rmatrix_eval(zz, lam, &p)
            })?;
            out = Some(match out {
                None => factor,
                Some(acc) => acc * factor,
            });
        }
        Ok(out.unwrap())
    }

    /// The four End(W) blocks (A, B, C, D) of L(z,lambda) with respect to
    /// the auxiliary basis e[1], e[-1].
    pub fn abcd_blocks(&self, z: C64, lambda: C64) -> Result<[DMatrix<C64>; 4]> {
        let l = self.l_operator(z, lambda)?;
        let d = self.dim();
        let blk = |r0: usize, c0: usize| DMatrix::from_fn(d, d, |r, c| l[(r0 + r, c0 + c)]);
        Ok([blk(0, 0), blk(0, d), blk(d, 0), blk(d, d)])
    }

    fn block_operator(&self, z: C64, which: usize, shift: i64) -> DifferenceOperator {
        let chain = self.clone();
        DifferenceOperator::from_term(self.params.step(), self.dim(), shift, move |lam| {
            let blocks = chain.abcd_blocks(z, lam)?;
            Ok(blocks.into_iter().nth(which).expect("block index"))
        })
    }

    /// a(z): coefficient A(z,lambda), shift -1 (argument lambda - 2eta).
    pub fn op_a(&self, z: C64) -> DifferenceOperator {
        self.block_operator(z, 0, -1)
    }

    /// b(z): coefficient B(z,lambda), shift +1.
    pub fn op_b(&self, z: C64) -> DifferenceOperator {
        self.block_operator(z, 1, 1)
    }

    /// c(z): coefficient C(z,lambda), shift -1.
    pub fn op_c(&self, z: C64) -> DifferenceOperator {
        self.block_operator(z, 2, -1)
    }

    /// d(z): coefficient D(z,lambda), shift +1.
    pub fn op_d(&self, z: C64) -> DifferenceOperator {
        self.block_operator(z, 3, 1)
    }

    /// Transfer matrix T(z) = a(z) + d(z) as a difference operator on W.
    pub fn transfer_op(&self, z: C64) -> DifferenceOperator {
        self.op_a(z).add(&self.op_d(z)).expect("same shape")
    }

    /// Zero-weight blocks (A00, D00) of the a/d coefficients.
    pub fn transfer_blocks(&self, z: C64, lambda: C64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        let [a, _, _, d] = self.abcd_blocks(z, lambda)?;
        let idx = self.zero_weight();
        let restrict =
            |m: &DMatrix<C64>| DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        Ok((restrict(&a), restrict(&d)))
    }

    /// Apply T(z) to a W[0]-valued function:
    /// `A00(z,lambda) f(lambda-2eta) + D00(z,lambda) f(lambda+2eta)`.
    pub fn transfer_apply(&self, z: C64, f: VectorFn, lambda: C64) -> Result<DVector<C64>> {
        let (a00, d00) = self.transfer_blocks(z, lambda)?;
        let step = self.params.step();
        let fm = f(lambda - step)?;
        let fp = f(lambda + step)?;
        let k = a00.nrows();
        if fm.len() != k || fp.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "zero-weight function must have length {k}"
            )));
        }
        Ok(a00 * fm + d00 * fp)
    }

    /// Eigenfunction of d(z) on v0 = e[1]^n:
    /// `theta(lambda-2eta n)/theta(lambda) prod_j theta(z-z_j)/theta(z-z_j-2eta)`
    /// (every local weight 1, so p_j = z_j and q_j = z_j + 2eta).
    pub fn highest_weight_d(&self, z: C64, lambda: C64) -> Result<C64> {
        let p = &self.params;
        let step = p.step();
        let mut val = p.theta(lambda - step * self.n() as f64)? / p.theta_nonzero(lambda)?;
        for &zj in &self.z_points {
            val *= p.theta(z - zj)? / p.theta_nonzero(z - zj - step)?;
        }
        Ok(val)
    }

    /// Residual of `a(w)b(t) = r(t-w,l) b(t)a(w) + s(t-w,l) b(w)a(t)`
    /// applied to a probe function at lambda.
    pub fn commutation_residual_ab(
        &self,
        w: C64,
        t: C64,
        lambda: C64,
        probe: VectorFn,
    ) -> Result<f64> {
        let p = self.params;
        let step = p.step();
        let dim = self.dim();
        let lhs = self.op_a(w).compose(&self.op_b(t))?;
        let r_mul = DifferenceOperator::scalar_multiplication(step, dim, move |lam| {
            Ok(rs_coeffs(t - w, lam, &p)?.0)
        });
        let s_mul = DifferenceOperator::scalar_multiplication(step, dim, move |lam| {
            Ok(rs_coeffs(t - w, lam, &p)?.1)
        });
        let rhs1 = r_mul.compose(&self.op_b(t).compose(&self.op_a(w))?)?;
        let rhs2 = s_mul.compose(&self.op_b(w).compose(&self.op_a(t))?)?;
        let diff = lhs.apply(probe, lambda)? - rhs1.apply(probe, lambda)? - rhs2.apply(probe, lambda)?;
        Ok(diff.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// Residual of
    /// `d(w)b(t) = r(w-t, l-2eta h) b(t)d(w) - s(t-w, l-2eta h) b(w)d(t)`;
    /// the h-dependent coefficients dispatch on the weight of each basis
    /// vector.
    pub fn commutation_residual_db(
        &self,
        w: C64,
        t: C64,
        lambda: C64,
        probe: VectorFn,
    ) -> Result<f64> {
        let p = self.params;
        let step = p.step();
        let n = self.n();
        let weights: Vec<i64> = (0..self.dim()).map(|i| total_weight(i, n)).collect();
        let lhs = self.op_d(w).compose(&self.op_b(t))?;
        let r_mul =
            DifferenceOperator::weight_multiplication(step, weights.clone(), move |lam, mu| {
                Ok(rs_coeffs(w - t, lam - step * mu as f64, &p)?.0)
            });
        let s_mul = DifferenceOperator::weight_multiplication(step, weights, move |lam, mu| {
            Ok(rs_coeffs(t - w, lam - step * mu as f64, &p)?.1)
        });
        let rhs1 = r_mul.compose(&self.op_b(t).compose(&self.op_d(w))?)?;
        let rhs2 = s_mul.compose(&self.op_b(w).compose(&self.op_d(t))?)?;
        let diff = lhs.apply(probe, lambda)? - rhs1.apply(probe, lambda)? + rhs2.apply(probe, lambda)?;
        Ok(diff.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// Rank of the 2^m x 2^m matrix whose columns are the vectors
    /// `(prod_{j in J} b(t_j)) e[1]^m` at lambda, over all subsets J of
    /// {1..m}; requires n = m and expects full rank at generic data.
    pub fn rank_independence_check(&self, t: &[C64], lambda: C64) -> Result<usize> {
        let m = t.len();
        if self.n() != m {
            return Err(Error::ShapeMismatch(format!(
                "rank test needs chain length n = m, got n = {}, m = {m}",
                self.n()
            )));
        }
        for i in 0..m {
            for j in i + 1..m {
                let (d, _, _) = self.params.lattice_reduce(t[i] - t[j]);
                if d.norm() < 1e-6 {
                    return Err(Error::CoincidentPoints(t[i], t[j]));
                }
            }
        }
        let dim = self.dim();
        let v0: DVector<C64> = DVector::from_fn(dim, |r, _| {
            if r == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let constant = move |_lam: C64| Ok(v0.clone());
        let mut matrix = DMatrix::zeros(dim, 1 << m);
        for subset in 0usize..1 << m {
            let mut op: Option<DifferenceOperator> = None;
            for (j, &tj) in t.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    let b = self.op_b(tj);
                    op = Some(match op {
                        None => b,
                        Some(acc) => acc.compose(&b)?,
                    });
                }
            }
            let col = match op {
                None => constant(lambda)?,
                Some(op) => op.apply(&constant, lambda)?,
            };
            matrix.set_column(subset, &col);
        }
        Ok(numerical_rank(&matrix, 1e-8))
    }
}

/// Max-norm residual of the RLL relation on V x V x W:
///
/// ```text
/// R12(z-w, l-2eta hW) L13(z, l) L23(w, l-2eta h1)
///   = L23(w, l) L13(z, l-2eta h2) R12(z-w, l)
/// ```
pub fn rll_residual(chain: &FundamentalChain, z: C64, w: C64, lambda: C64) -> Result<f64> {
    let n = chain.n();
    let total = n + 2;
    let p = *chain.params();
    let step = p.step();
    let chain_sites: Vec<usize> = (2..total).collect();
    let l_sites = |aux: usize| -> Vec<usize> {
        let mut v = vec![aux];
        v.extend(2..total);
        v
    };
    let emb_r = |shift: &[usize]| {
        embed_shifted(total, &[0, 1], shift, lambda, step, |lam| {
            rmatrix_eval(z - w, lam, &p)
        })
    };
    let emb_l = |aux: usize, shift: &[usize], zz: C64| {
        embed_shifted(total, &l_sites(aux), shift, lambda, step, |lam| {
            chain.l_operator(zz, lam)
        })
    };
    let lhs = emb_r(&chain_sites)? * emb_l(0, &[], z)? * emb_l(1, &[0], w)?;
    let rhs = emb_l(1, &[], w)? * emb_l(0, &[1], z)? * emb_r(&[])?;
    Ok(crate::tensor::max_abs_diff(&lhs, &rhs))
}
