//! Bethe ansatz equations for inhomogeneous chains, a damped Newton solver
//! with analytic Jacobian, the transfer-matrix eigenvalue, and the explicit
//! weight-component formula for the eigenvector on fundamental chains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::FundamentalChain;
use crate::error::{Error, Result};
use crate::theta::ModularParams;

/// Newton iteration controls.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Convergence threshold on the max-norm of the residual vector.
    pub tol: f64,
    pub max_iter: usize,
    /// Step-halving attempts per iteration before giving up.
    pub max_halvings: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 30,
        }
    }
}

/// A converged root set together with everything needed to reproduce it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetheSolution {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "Lambda")]
    pub lambda_weights: Vec<i64>,
    pub z: Vec<C64>,
    pub tau: C64,
    pub eta: C64,
    pub c: C64,
    pub t: Vec<C64>,
    pub residual: f64,
}

/// The Bethe system for a chain with site weights Lambda_k and evaluation
/// points z_k: find t_1..t_m with
///
/// ```text
/// prod_{j != i} theta(t_j-t_i-2eta)/theta(t_j-t_i+2eta)
///   * prod_k theta(t_i-q_k)/theta(t_i-p_k) = exp(4 eta c)
/// ```
///
/// where p_k = z_k + eta(-Lambda_k+1), q_k = z_k + eta(Lambda_k+1).
#[derive(Clone, Debug)]
pub struct BetheProblem {
    params: ModularParams,
    lambda_weights: Vec<i64>,
    z_points: Vec<C64>,
    m: usize,
    c: C64,
}

impl BetheProblem {
    pub fn new(
        params: ModularParams,
        lambda_weights: Vec<i64>,
        z_points: Vec<C64>,
        m: usize,
        c: C64,
    ) -> Result<Self> {
        if lambda_weights.len() != z_points.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} site weights but {} evaluation points",
                lambda_weights.len(),
                z_points.len()
            )));
        }
        if lambda_weights.is_empty() {
            return Err(Error::InvalidParameter {
                name: "Lambda",
                reason: "need at least one site".into(),
            });
        }
        if let Some(&bad) = lambda_weights.iter().find(|&&l| l < 1) {
            return Err(Error::InvalidParameter {
                name: "Lambda",
                reason: format!("site weights must be >= 1, got {bad}"),
            });
        }
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "need at least one root".into(),
            });
        }
        Ok(Self {
            params,
            lambda_weights,
            z_points,
            m,
            c,
        })
    }

    /// Convenience constructor for a chain of n fundamental sites.
    pub fn fundamental(
        params: ModularParams,
        z_points: Vec<C64>,
        m: usize,
        c: C64,
    ) -> Result<Self> {
        let n = z_points.len();
        Self::new(params, vec![1; n], z_points, m, c)
    }

    pub fn params(&self) -> &ModularParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.z_points.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn z_points(&self) -> &[C64] {
        &self.z_points
    }

    pub fn lambda_weights(&self) -> &[i64] {
        &self.lambda_weights
    }

    /// Zeros p_k and poles q_k of the highest-weight function of each site.
    pub fn pq(&self) -> (Vec<C64>, Vec<C64>) {
        let eta = self.params.eta();
        let mut p = Vec::with_capacity(self.n());
        let mut q = Vec::with_capacity(self.n());
        for (&zk, &lk) in self.z_points.iter().zip(&self.lambda_weights) {
            let l = lk as f64;
            p.push(zk + eta * (1.0 - l));
            q.push(zk + eta * (1.0 + l));
        }
        (p, q)
    }

    /// Right-hand side exp(4 eta c) of every component.
    pub fn rhs(&self) -> C64 {
        (4.0 * self.params.eta() * self.c).exp()
    }

    fn check_separation(&self, t: &[C64]) -> Result<()> {
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                let (d, _, _) = self.params.lattice_reduce(t[i] - t[j]);
                if d.norm() < 1e-6 {
                    return Err(Error::CoincidentPoints(t[i], t[j]));
                }
            }
        }
        Ok(())
    }

    /// The product side G_i of each equation.
    pub fn bae_components(&self, t: &[C64]) -> Result<Vec<C64>> {
        if t.len() != self.m {
            return Err(Error::ShapeMismatch(format!(
                "expected {} roots, got {}",
                self.m,
                t.len()
            )));
        }
        self.check_separation(t)?;
        let p = &self.params;
        let step = p.step();
        let (pk, qk) = self.pq();
        let mut out = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let mut g = C64::new(1.0, 0.0);
            for j in 0..self.m {
                if j != i {
                    g *= p.theta(t[j] - t[i] - step)? / p.theta_nonzero(t[j] - t[i] + step)?;
                }
            }
            for k in 0..self.n() {
                g *= p.theta(t[i] - qk[k])? / p.theta_nonzero(t[i] - pk[k])?;
            }
            out.push(g);
        }
        Ok(out)
    }

    /// Residual vector G_i - exp(4 eta c).
    pub fn bae_residual(&self, t: &[C64]) -> Result<Vec<C64>> {
        let rhs = self.rhs();
        Ok(self
            .bae_components(t)?
            .into_iter()
            .map(|g| g - rhs)
            .collect())
    }

    pub fn bae_residual_norm(&self, t: &[C64]) -> Result<f64> {
        Ok(max_norm(&self.bae_residual(t)?))
    }

    /// Analytic Jacobian d(G_i)/d(t_j) in terms of theta log-derivatives.
    fn jacobian(&self, t: &[C64]) -> Result<DMatrix<C64>> {
        let p = &self.params;
        let step = p.step();
        let (pk, qk) = self.pq();
        let g = self.bae_components(t)?;
        let ld = |z: C64| p.theta_log_deriv(z);
        let mut jac = DMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            let mut diag = C64::new(0.0, 0.0);
            for j in 0..self.m {
                if j == i {
                    continue;
                }
                let minus = ld(t[j] - t[i] - step)?;
                let plus = ld(t[j] - t[i] + step)?;
                jac[(i, j)] = g[i] * (minus - plus);
                diag += plus - minus;
            }
            for k in 0..self.n() {
                diag += ld(t[i] - qk[k])? - ld(t[i] - pk[k])?;
            }
            jac[(i, i)] = g[i] * diag;
        }
        Ok(jac)
    }

    /// Shift each root into the strip |Re coefficient| <= 1/2 along the
    /// 1-direction of the lattice.  This leaves every equation, the
    /// eigenvalue, and the eigenvector components unchanged; shifts along
    /// tau do not (they require c -> c + pi i / eta adjustments), so they
    /// are never applied.
    pub fn canonicalize(&self, t: &mut [C64]) {
        for ti in t.iter_mut() {
            let (z0, _, n1) = self.params.lattice_reduce(*ti);
            *ti = z0 + self.params.tau() * n1 as f64;
        }
    }

    /// Damped Newton iteration from the given starting roots.
    pub fn solve(&self, t0: &[C64], opts: &SolveOptions) -> Result<BetheSolution> {
        let mut t = t0.to_vec();
        let mut fvec = self.bae_residual(&t)?;
        let mut fnorm = max_norm(&fvec);
        let mut trace = vec![fnorm];
        let mut iterations = 0;
        while fnorm >= opts.tol {
            if iterations >= opts.max_iter {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: fnorm,
                    trace,
                });
            }
            let jac = self.jacobian(&t)?;
            let rhs = DVector::from_vec(fvec.clone());
            let step = jac
                .lu()
                .solve(&rhs)
                .ok_or(Error::SingularJacobian(iterations))?;
            let mut scale = 1.0f64;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let cand: Vec<C64> = t
                    .iter()
                    .zip(step.iter())
                    .map(|(ti, si)| ti - si * scale)
                    .collect();
                match self.bae_residual(&cand) {
                    Ok(fc) => {
                        let fcn = max_norm(&fc);
                        if fcn < fnorm {
                            t = cand;
                            fvec = fc;
                            fnorm = fcn;
                            trace.push(fnorm);
                            accepted = true;
                            break;
                        }
                    }
                    // Walking into a pole or collapsing two roots just
                    // means the step was too long.
                    Err(Error::PoleProximity { .. }) | Err(Error::CoincidentPoints(_, _)) => {}
                    Err(e) => return Err(e),
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: fnorm,
                    trace,
                });
            }
            iterations += 1;
        }
        self.canonicalize(&mut t);
        let residual = self.bae_residual_norm(&t)?;
        Ok(BetheSolution {
            m: self.m,
            n: self.n(),
            lambda_weights: self.lambda_weights.clone(),
            z: self.z_points.clone(),
            tau: self.params.tau(),
            eta: self.params.eta(),
            c: self.c,
            t,
            residual,
        })
    }

    /// Try a list of starting points and return the first that converges.
    pub fn solve_multi_start(
        &self,
        starts: &[Vec<C64>],
        opts: &SolveOptions,
    ) -> Result<BetheSolution> {
        let mut last = None;
        for t0 in starts {
            match self.solve(t0, opts) {
                Ok(sol) => return Ok(sol),
                Err(e @ Error::NoConvergence { .. })
                | Err(e @ Error::SingularJacobian(_))
                | Err(e @ Error::PoleProximity { .. })
                | Err(e @ Error::CoincidentPoints(_, _)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
            trace: vec![],
        }))
    }

    /// Transfer-matrix eigenvalue
    ///
    /// ```text
    /// eps(w) = e^{-2 eta c} prod_j theta(t_j-w-2eta)/theta(t_j-w)
    ///        + e^{ 2 eta c} prod_j theta(t_j-w+2eta)/theta(t_j-w)
    ///          * prod_k theta(w-p_k)/theta(w-q_k)
    /// ```
    pub fn transfer_eigenvalue(&self, t: &[C64], w: C64) -> Result<C64> {
        let p = &self.params;
        let step = p.step();
        let eta = p.eta();
        let (pk, qk) = self.pq();
        let mut first = (-2.0 * eta * self.c).exp();
        let mut second = (2.0 * eta * self.c).exp();
        for &tj in t {
            first *= p.theta(tj - w - step)? / p.theta_nonzero(tj - w)?;
            second *= p.theta(tj - w + step)? / p.theta_nonzero(tj - w)?;
        }
        for k in 0..self.n() {
            second *= p.theta(w - pk[k])? / p.theta_nonzero(w - qk[k])?;
        }
        Ok(first + second)
    }

    /// The chain the problem lives on; requires fundamental site weights.
    pub fn chain(&self) -> Result<FundamentalChain> {
        if self.lambda_weights.iter().any(|&l| l != 1) {
            return Err(Error::ShapeMismatch(
                "operator realization needs all site weights equal to 1".into(),
            ));
        }
        FundamentalChain::new(self.z_points.clone(), self.params)
    }

    /// Explicit eigenvector components on the fundamental chain: for every
    /// basis index carrying m lowered sites, a sum over assignments of the
    /// roots t_1..t_m to those sites of a product of theta ratios, with
    /// prefactor (-1)^m theta(2eta)^m e^{c(lambda + 2 eta m)}.
    ///
    /// The theta(2eta)^m factor puts the components in the basis the
    /// R-matrix action generates: each application of b carries the
    /// theta(2eta) from its off-diagonal coefficient.  With it, the result
    /// equals [`Self::bethe_vector_oracle`] exactly.
    pub fn bethe_vector(&self, t: &[C64], lambda: C64) -> Result<DVector<C64>> {
        if self.lambda_weights.iter().any(|&l| l != 1) {
            return Err(Error::ShapeMismatch(
                "explicit components need all site weights equal to 1".into(),
            ));
        }
        if t.len() != self.m {
            return Err(Error::ShapeMismatch(format!(
                "expected {} roots, got {}",
                self.m,
                t.len()
            )));
        }
        let n = self.n();
        let m = self.m;
        let p = &self.params;
        let step = p.step();
        let (pk, qk) = self.pq();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let prefactor =
            sign * p.theta(step)?.powu(m as u32) * (self.c * (lambda + step * m as f64)).exp();
        let dim = 1usize << n;
        let mut out = DVector::zeros(dim);
        let mut sites = Vec::with_capacity(m);
        for idx in 0..dim {
            sites.clear();
            for site in 1..=n {
                if idx >> (n - site) & 1 == 1 {
                    sites.push(site);
                }
            }
            if sites.len() != m {
                continue;
            }
            // 2 eta m_k - 2 eta sum_{l>k} (Lambda_l - 2 m_l) at each
            // occupied site k.
            let tail_shift: Vec<C64> = sites
                .iter()
                .map(|&k| {
                    let occupied_after = sites.iter().filter(|&&l| l > k).count() as f64;
                    let tail = (n - k) as f64 - 2.0 * occupied_after;
                    step * (1.0 - tail)
                })
                .collect();
            let mut total = C64::new(0.0, 0.0);
            let mut assignment: Vec<usize> = (0..m).collect();
            permutations(&mut assignment, 0, &mut |perm| -> Result<()> {
                // Root perm[pos] occupies sites[pos].
                let mut w = C64::new(1.0, 0.0);
                for (pos, &site) in sites.iter().enumerate() {
                    let ti = t[perm[pos]];
                    for k in site + 1..=n {
                        w *= p.theta(ti - pk[k - 1])? / p.theta_nonzero(ti - qk[k - 1])?;
                    }
                    w *= p.theta(lambda + ti - qk[site - 1] + tail_shift[pos])?
                        / p.theta_nonzero(ti - qk[site - 1])?;
                }
                for pos_a in 0..m {
                    for pos_b in pos_a + 1..m {
                        let (ti, tj) = (t[perm[pos_a]], t[perm[pos_b]]);
                        w *= p.theta(ti - tj - step)? / p.theta_nonzero(ti - tj)?;
                    }
                }
                total += w;
                Ok(())
            })?;
            out[idx] = prefactor * total;
        }
        Ok(out)
    }

    /// Same vector through the operator algebra: apply b(t_1)..b(t_m) to
    /// the highest-weight function e^{c lambda} prod_j theta(lambda-2eta j) v0.
    pub fn bethe_vector_oracle(&self, t: &[C64], lambda: C64) -> Result<DVector<C64>> {
        let chain = self.chain()?;
        let p = self.params;
        let step = p.step();
        let m = self.m;
        let c = self.c;
        let dim = chain.dim();
        let v0 = move |lam: C64| -> Result<DVector<C64>> {
            let mut g = (c * lam).exp();
            for j in 1..=m {
                g *= p.theta(lam - step * j as f64)?;
            }
            let mut v = DVector::zeros(dim);
            v[0] = g;
            Ok(v)
        };
        let mut op = chain.op_b(t[0]);
        for &tj in &t[1..] {
            op = op.compose(&chain.op_b(tj))?;
        }
        op.apply(&v0, lambda)
    }

    /// Max-norm of T(w) psi - eps(w) psi at lambda, relative to the size
    /// of psi, with psi from the explicit component formula.
    pub fn eigen_relation_residual(&self, t: &[C64], w: C64, lambda: C64) -> Result<f64> {
        let chain = self.chain()?;
        let psi = |lam: C64| self.bethe_vector(t, lam);
        let transfer = chain.op_a(w).add(&chain.op_d(w))?;
        let lhs = transfer.apply(&psi, lambda)?;
        let eps = self.transfer_eigenvalue(t, w)?;
        let base = psi(lambda)?;
        let scale = base.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let diff = lhs - base * eps;
        Ok(diff.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale)
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Visit every permutation of `items` (Heap's algorithm, fallible visitor).
fn permutations<F>(items: &mut [usize], k: usize, visit: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    let len = items.len();
    if k == len.saturating_sub(1) || len == 0 {
        return visit(items);
    }
    for i in k..len {
        items.swap(k, i);
        permutations(items, k + 1, visit)?;
        items.swap(k, i);
    }
    Ok(())
}

/// The fixture used by the command-line checks: two fundamental sites at
/// z = (0, 0.4), one root, c = 0, tau = 0.9i, eta = 0.11.
pub fn reference_problem() -> Result<(BetheProblem, Vec<C64>)> {
    let params = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.11, 0.0))?;
    let problem = BetheProblem::fundamental(
        params,
        vec![C64::new(0.0, 0.0), C64::new(0.4, 0.0)],
        1,
        C64::new(0.0, 0.0),
    )?;
    Ok((problem, vec![C64::new(0.2, 0.1)]))
}
