//! The q-deformed Lame operator on scalar functions, its Bethe
//! eigenfunctions and eigenvalues, reflection and multiplier symmetries,
//! difference Wronskians, continuation in the Bloch exponent, and the
//! classical second-order limit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheProblem, SolveOptions};
use crate::error::{Error, Result};
use crate::theta::ModularParams;

/// Scalar function of lambda, as consumed by the difference operator.
pub type ScalarFn<'a> = &'a dyn Fn(C64) -> Result<C64>;

/// The operator
/// `L psi(l) = theta(l+2 eta m)/theta(l) psi(l-2eta)
///           + theta(l-2 eta m)/theta(l) psi(l+2eta)`
/// acting on scalar functions; the zero-weight reduction of the transfer
/// matrix of a single site of weight 2m at z = 0.
#[derive(Clone, Copy, Debug)]
pub struct QLameProblem {
    m: usize,
    params: ModularParams,
}

/// A converged point of the spectral variety.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub m: usize,
    pub tau: C64,
    pub eta: C64,
    pub t: Vec<C64>,
    pub c: C64,
    pub eps: C64,
    pub residual: f64,
}

impl QLameProblem {
    pub fn new(m: usize, params: ModularParams) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "the operator needs m >= 1".into(),
            });
        }
        Ok(Self { m, params })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn params(&self) -> &ModularParams {
        &self.params
    }

    /// Apply the two-term difference operator at lambda.
    pub fn apply(&self, psi: ScalarFn, lambda: C64) -> Result<C64> {
        let p = &self.params;
        let step = p.step();
        let shift = step * self.m as f64;
        let denom = p.theta_nonzero(lambda)?;
        Ok(p.theta(lambda + shift)? / denom * psi(lambda - step)?
            + p.theta(lambda - shift)? / denom * psi(lambda + step)?)
    }

    /// The underlying one-site Bethe system: weight 2m at z = 0, so
    /// p_1 = eta(1-2m) and q_1 = eta(1+2m).
    pub fn bethe_problem(&self, c: C64) -> Result<BetheProblem> {
        BetheProblem::new(
            self.params,
            vec![2 * self.m as i64],
            vec![C64::new(0.0, 0.0)],
            self.m,
            c,
        )
    }

    /// Max-norm of the Bethe residual at (t, c).
    pub fn bae_residual_norm(&self, t: &[C64], c: C64) -> Result<f64> {
        self.bethe_problem(c)?.bae_residual_norm(t)
    }

    /// Closed-form eigenvalue
    /// `e^{-2 eta c} theta(4 eta m)/theta(2 eta m)
    ///  prod_j theta(t_j+(2m-3)eta)/theta(t_j+(2m-1)eta)`.
    pub fn eigenvalue(&self, t: &[C64], c: C64) -> Result<C64> {
        let p = &self.params;
        let eta = p.eta();
        let mf = self.m as f64;
        let mut eps = (-2.0 * eta * c).exp() * p.theta(4.0 * eta * mf)?
            / p.theta_nonzero(2.0 * eta * mf)?;
        for &tj in t {
            eps *= p.theta(tj + (2.0 * mf - 3.0) * eta)?
                / p.theta_nonzero(tj + (2.0 * mf - 1.0) * eta)?;
        }
        Ok(eps)
    }

    /// Eigenvalue recovered from the full transfer matrix at spectral
    /// parameter z: `theta(z-(2m+1)eta)/theta(z-eta) * eps(z)`.  For roots
    /// on shell this is independent of z and equals [`Self::eigenvalue`].
    pub fn eigenvalue_from_transfer(&self, t: &[C64], c: C64, z: C64) -> Result<C64> {
        let p = &self.params;
        let eta = p.eta();
        let scale = p.theta(z - (2.0 * self.m as f64 + 1.0) * eta)? / p.theta_nonzero(z - eta)?;
        Ok(scale * self.bethe_problem(c)?.transfer_eigenvalue(t, z)?)
    }

    /// The eigenfunction `psi(l) = e^{c l} prod_j theta(l + t_j - eta)`.
    pub fn psi(&self, t: &[C64], c: C64, lambda: C64) -> Result<C64> {
        let p = &self.params;
        let eta = p.eta();
        let mut v = (c * lambda).exp();
        for &tj in t {
            v *= p.theta(lambda + tj - eta)?;
        }
        Ok(v)
    }

    /// Newton solve of the one-site equations at fixed c, packaging the
    /// eigenvalue with the roots.
    pub fn solve(&self, c: C64, t0: &[C64], opts: &SolveOptions) -> Result<SpectralPoint> {
        let sol = self.bethe_problem(c)?.solve(t0, opts)?;
        let eps = self.eigenvalue(&sol.t, c)?;
        Ok(SpectralPoint {
            m: self.m,
            tau: self.params.tau(),
            eta: self.params.eta(),
            t: sol.t,
            c,
            eps,
            residual: sol.residual,
        })
    }

    /// For m = 1 the single equation inverts in closed form:
    /// `c = (4 eta)^{-1} log[theta(t1-3eta)/theta(t1+eta)]` (principal
    /// branch; other branches are the c-shift degeneracy).
    pub fn closed_form_c(&self, t1: C64) -> Result<C64> {
        if self.m != 1 {
            return Err(Error::UnsupportedOrder(self.m as u32));
        }
        let p = &self.params;
        let eta = p.eta();
        let ratio = p.theta(t1 - 3.0 * eta)? / p.theta_nonzero(t1 + eta)?;
        Ok(ratio.ln() / (4.0 * eta))
    }

    /// The involution t_j -> 2 eta - t_j, c -> -c; preserves the
    /// eigenvalue, and the eigenfunctions are related by lambda -> -lambda.
    pub fn reflect(&self, point: &SpectralPoint) -> Result<SpectralPoint> {
        let step = self.params.step();
        let t: Vec<C64> = point.t.iter().map(|&tj| step - tj).collect();
        let c = -point.c;
        let eps = self.eigenvalue(&t, c)?;
        let residual = self.bae_residual_norm(&t, c)?;
        Ok(SpectralPoint {
            m: self.m,
            tau: self.params.tau(),
            eta: self.params.eta(),
            t,
            c,
            eps,
            residual,
        })
    }

    /// Follow the solution branch as c moves through the given targets,
    /// bisecting any step the Newton iteration cannot cross directly.
    /// Returns every accepted point, intermediates included.
    pub fn continue_in_c(
        &self,
        start: &SpectralPoint,
        c_targets: &[C64],
        opts: &SolveOptions,
    ) -> Result<Vec<SpectralPoint>> {
        let mut out = vec![start.clone()];
        let mut t = start.t.clone();
        let mut c_prev = start.c;
        for &goal in c_targets {
            self.continuation_step(&mut t, c_prev, goal, opts, 12, &mut out)?;
            c_prev = goal;
        }
        Ok(out)
    }

    fn continuation_step(
        &self,
        t: &mut Vec<C64>,
        c_from: C64,
        c_to: C64,
        opts: &SolveOptions,
        depth: u32,
        out: &mut Vec<SpectralPoint>,
    ) -> Result<()> {
        match self.solve(c_to, t, opts) {
            Ok(point) => {
                *t = point.t.clone();
                out.push(point);
                Ok(())
            }
            Err(e) if depth == 0 => Err(e),
            Err(
                Error::NoConvergence { .. }
                | Error::SingularJacobian(_)
                | Error::PoleProximity { .. }
                | Error::CoincidentPoints(_, _),
            ) => {
                let mid = (c_from + c_to) * 0.5;
                self.continuation_step(t, c_from, mid, opts, depth - 1, out)?;
                self.continuation_step(t, mid, c_to, opts, depth - 1, out)
            }
            Err(e) => Err(e),
        }
    }

    /// Symmetric bilinear form
    /// `(phi, psi) = int phi(l) psi(-l) / prod_j theta(l-2 eta j) theta(l+2 eta j)`
    /// by trapezoid quadrature on the two unit-period segments at heights
    /// +-Im(tau)/2; valid for real eta, where the shift invariance of the
    /// functional is exact on 1-periodic integrands.
    pub fn bilinear_form(&self, phi: ScalarFn, psi: ScalarFn, nodes: usize) -> Result<C64> {
        if self.params.eta().im.abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: "the contour functional needs real eta".into(),
            });
        }
        if nodes < 2 {
            return Err(Error::InvalidParameter {
                name: "nodes",
                reason: "need at least two quadrature nodes".into(),
            });
        }
        let p = &self.params;
        let step = p.step();
        let integrand = |lam: C64| -> Result<C64> {
            let mut denom = C64::new(1.0, 0.0);
            for j in 1..=self.m {
                denom *= p.theta_nonzero(lam - step * j as f64)?
                    * p.theta_nonzero(lam + step * j as f64)?;
            }
            Ok(phi(lam)? * psi(-lam)? / denom)
        };
        let tau = p.tau();
        let mut total = C64::new(0.0, 0.0);
        for (a, b) in [
            (tau * 0.5, tau * 0.5 + 1.0),
            (-tau * 0.5 - 1.0, -tau * 0.5),
        ] {
            let h = (b - a) / nodes as f64;
            let mut seg = (integrand(a)? + integrand(b)?) * 0.5;
            for k in 1..nodes {
                seg += integrand(a + h * k as f64)?;
            }
            total += seg * h;
        }
        Ok(total)
    }
}

/// The difference Wronskian `f(l+2eta) g(l) - f(l) g(l+2eta)`.
pub fn wronskian(f: ScalarFn, g: ScalarFn, lambda: C64, p: &ModularParams) -> Result<C64> {
    let step = p.step();
    Ok(f(lambda + step)? * g(lambda)? - f(lambda)? * g(lambda + step)?)
}

/// Distance between the rescaled operator `(L_eta psi - 2 psi)/(4 eta^2)`
/// and its second-order limit
/// `psi'' - 2m (theta'/theta) psi' + m^2 (theta''/theta) psi`
/// at lambda, one entry per eta; psi derivatives by central differences.
/// Decreases like eta^2.
pub fn classical_limit_residual(
    tau: C64,
    etas: &[f64],
    m: usize,
    lambda: C64,
    psi: ScalarFn,
) -> Result<Vec<f64>> {
    let base = ModularParams::new(tau, C64::new(0.1, 0.0))?;
    let h = 1e-4;
    let psi0 = psi(lambda)?;
    let pp = psi(lambda + h)?;
    let pm = psi(lambda - h)?;
    let d1 = (pp - pm) / (2.0 * h);
    let d2 = (pp - 2.0 * psi0 + pm) / (h * h);
    let log1 = base.theta_deriv(lambda, 1)? / base.theta_nonzero(lambda)?;
    let log2 = base.theta_deriv(lambda, 2)? / base.theta_nonzero(lambda)?;
    let mf = m as f64;
    let target = d2 - 2.0 * mf * log1 * d1 + mf * mf * log2 * psi0;
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let p = ModularParams::new(tau, C64::new(eta, 0.0))?;
        let step = p.step();
        let shift = step * mf;
        let denom = p.theta_nonzero(lambda)?;
        let applied = p.theta(lambda + shift)? / denom * psi(lambda - step)?
            + p.theta(lambda - shift)? / denom * psi(lambda + step)?;
        let rescaled = (applied - 2.0 * psi0) / (4.0 * eta * eta);
        out.push((rescaled - target).norm());
    }
    Ok(out)
}

/// The fixture used by the command-line checks: m = 2, c = 0,
/// tau = 0.9i, eta = 0.1, starting roots (0.25+0.1i, 0.55-0.05i).
pub fn reference_problem() -> Result<(QLameProblem, Vec<C64>)> {
    let params = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.1, 0.0))?;
    let problem = QLameProblem::new(2, params)?;
    Ok((problem, vec![C64::new(0.25, 0.1), C64::new(0.55, -0.05)]))
}

/// A pinned m = 3 starting configuration at the same modular parameters;
/// converges at c = 0 with residual below 1e-12.
pub fn reference_problem_m3() -> Result<(QLameProblem, Vec<C64>)> {
    let params = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.1, 0.0))?;
    let problem = QLameProblem::new(3, params)?;
    Ok((problem, vec![
        C64::new(0.05, 0.1),
        C64::new(0.22, -0.08),
        C64::new(0.45, 0.22),
    ]))
}
