//! Two classical faces of the same transfer matrix: the height-path (IRF)
//! picture, where the dynamical structure turns into face weights around
//! plaquettes, and the eight-vertex picture, reached through the theta
//! intertwiner `S(z,lambda)`.
//!
//! The eight-vertex R-matrix here is built from the characteristic thetas
//! `theta_0`, `theta_1` at doubled modulus.  At rational anisotropy the
//! shift-invariant summation functional turns chain eigenfunctions into
//! honest eigenvectors of the eight-vertex transfer matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheProblem, BetheSolution};
use crate::chain::FundamentalChain;
use crate::error::{Error, Result};
use crate::rmatrix::{boltzmann_weight, height_value, rmatrix_coeffs, rmatrix_eval};
use crate::tensor::{embed_shifted, max_abs_diff, partial_trace_first, zero_weight_indices};
use crate::theta::ModularParams;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

// ---------------------------------------------------------------------------
// Eight-vertex R-matrix
// ---------------------------------------------------------------------------

/// The four eight-vertex coefficients (a, b, c, d) at spectral parameter z:
///
/// ```text
/// a =  theta0(z) theta0(2eta) / (theta0(z-2eta) theta0(0))
/// b =  theta1(z) theta0(2eta) / (theta1(z-2eta) theta0(0))
/// c = -theta0(z) theta1(2eta) / (theta1(z-2eta) theta0(0))
/// d = -theta1(z) theta1(2eta) / (theta0(z-2eta) theta0(0))
/// ```
///
/// The union of zeros of theta0 and theta1 is the full period lattice, so
/// the matrix has a simple pole at z = 2eta mod Z + tau*Z however the
/// representative is chosen; which entries blow up depends on it.
pub fn r8v_coeffs(z: C64, p: &ModularParams) -> Result<(C64, C64, C64, C64)> {
    let step = p.step();
    let den0 = p.theta_char_nonzero(0, z - step)?;
    let den1 = p.theta_char_nonzero(1, z - step)?;
    let norm = p.theta_char(0, C64::new(0.0, 0.0))?;
    let t0z = p.theta_char(0, z)?;
    let t1z = p.theta_char(1, z)?;
    let t0e = p.theta_char(0, step)?;
    let t1e = p.theta_char(1, step)?;
    Ok((
        t0z * t0e / (den0 * norm),
        t1z * t0e / (den1 * norm),
        -t0z * t1e / (den1 * norm),
        -t1z * t1e / (den0 * norm),
    ))
}

/// The 4x4 eight-vertex R-matrix.  In the basis e[1], e[-1] the weight `a`
/// preserves parallel spins, `b` preserves antiparallel spins, `c` exchanges
/// and `d` flips both; `R(0)` is the flip.
pub fn r8v_eval(z: C64, p: &ModularParams) -> Result<DMatrix<C64>> {
    let (a, b, c, d) = r8v_coeffs(z, p)?;
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = a;
    m[(3, 3)] = a;
    m[(1, 1)] = b;
    m[(2, 2)] = b;
    m[(1, 2)] = c;
    m[(2, 1)] = c;
    m[(0, 3)] = d;
    m[(3, 0)] = d;
    Ok(m)
}

/// Two-point Richardson extrapolation of `(z - 2eta) R8V(z)` at
/// `z = 2eta + delta`, estimating the residue at the pole.
pub fn r8v_residue(p: &ModularParams, delta: f64) -> Result<DMatrix<C64>> {
    let step = p.step();
    let at = |d: f64| -> Result<DMatrix<C64>> {
        Ok(r8v_eval(step + C64::new(d, 0.0), p)? * C64::new(d, 0.0))
    };
    let coarse = at(delta)?;
    let fine = at(delta / 2.0)?;
    Ok(fine * C64::new(2.0, 0.0) - coarse)
}

/// Closed form of the residue of `R8V` at z = 2eta:
/// `theta(2eta)/theta'(0)` times the antisymmetriser `1 - P`.  Only the
/// b and c entries are singular there (the a/d entries have their pole at
/// the representative 2eta + tau instead), which places the residue on the
/// antiparallel block with opposite signs on and off its diagonal.
pub fn r8v_residue_target(p: &ModularParams) -> Result<DMatrix<C64>> {
    let scale = p.theta(p.step())? / p.theta_deriv(C64::new(0.0, 0.0), 1)?;
    let mut m = DMatrix::zeros(4, 4);
    m[(1, 1)] = scale;
    m[(2, 2)] = scale;
    m[(1, 2)] = -scale;
    m[(2, 1)] = -scale;
    Ok(m)
}

// ---------------------------------------------------------------------------
// Theta intertwiner
// ---------------------------------------------------------------------------

/// The column `(theta1(x), theta0(x))`: up to scale the unique entire vector
/// with `phi(x+1) = A phi(x)` and `phi(x+tau) = i e^{-i pi (x+tau/2)} B phi(x)`,
/// where `A = diag(-1,1)` and `B` is the spin flip.
pub fn phi_vector(x: C64, p: &ModularParams) -> Result<DVector<C64>> {
    Ok(DVector::from_column_slice(&[
        p.theta_char(1, x)?,
        p.theta_char(0, x)?,
    ]))
}

fn check_sign(sign: i32) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidParameter {
            name: "sign",
            reason: format!("expected +1 or -1, got {sign}"),
        }),
    }
}

/// `phi^{s}(z, lambda) = phi(-s z - lambda + 1/2)`, s = +-1.
pub fn phi_signed(sign: i32, z: C64, lambda: C64, p: &ModularParams) -> Result<DVector<C64>> {
    let s = check_sign(sign)?;
    phi_vector(-s * z - lambda + 0.5, p)
}

/// The 2x2 intertwiner
///
/// ```text
/// S(z,lambda) = 1/theta(lambda) [  theta0(z-lambda+1/2)  -theta0(-z-lambda+1/2) ]
///                               [ -theta1(z-lambda+1/2)   theta1(-z-lambda+1/2) ]
/// ```
pub fn s_matrix(z: C64, lambda: C64, p: &ModularParams) -> Result<DMatrix<C64>> {
    let den = p.theta_nonzero(lambda)?;
    let u = z - lambda + 0.5;
    let v = -z - lambda + 0.5;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            p.theta_char(0, u)?,
            -p.theta_char(0, v)?,
            -p.theta_char(1, u)?,
            p.theta_char(1, v)?,
        ],
    );
    Ok(m / den)
}

/// Companion matrix with columns `phi^+`, `phi^-`; up to a z,lambda-dependent
/// scalar it is the inverse transpose of [`s_matrix`], and
/// `det S_hat = const * theta(z) theta(lambda)`.
pub fn s_hat_matrix(z: C64, lambda: C64, p: &ModularParams) -> Result<DMatrix<C64>> {
    let plus = phi_signed(1, z, lambda, p)?;
    let minus = phi_signed(-1, z, lambda, p)?;
    Ok(DMatrix::from_columns(&[plus, minus]))
}

fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn kron2(u: &DVector<C64>, v: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(u.len() * v.len());
    for i in 0..u.len() {
        for j in 0..v.len() {
            out[i * v.len() + j] = u[i] * v[j];
        }
    }
    out
}

/// Residual of the same-sign column identity
/// `R8V(z-w) phi^s(z,l-2s eta) x phi^s(w,l) = phi^s(z,l) x phi^s(w,l-2s eta)`.
pub fn r8v_phi_same_sign_residual(
    sign: i32,
    z: C64,
    w: C64,
    lambda: C64,
    p: &ModularParams,
) -> Result<f64> {
    let s = check_sign(sign)?;
    let step = p.step();
    let lhs = r8v_eval(z - w, p)?
        * kron2(
            &phi_signed(sign, z, lambda - s * step, p)?,
            &phi_signed(sign, w, lambda, p)?,
        );
    let rhs = kron2(
        &phi_signed(sign, z, lambda, p)?,
        &phi_signed(sign, w, lambda - s * step, p)?,
    );
    Ok(max_abs_vec(&(lhs - rhs)))
}

/// Residual of the mixed-sign column identity
///
/// ```text
/// R8V(z-w) phi^s(z,l+2s eta) x phi^{-s}(w,l)
///   = alpha(z-w, s l) phi^s(z,l) x phi^{-s}(w,l-2s eta)
///   + beta(z-w, s l)  phi^{-s}(z,l) x phi^s(w,l+2s eta)
/// ```
///
/// with alpha, beta the coefficients of the dynamical R-matrix.
pub fn r8v_phi_mixed_sign_residual(
    sign: i32,
    z: C64,
    w: C64,
    lambda: C64,
    p: &ModularParams,
) -> Result<f64> {
    let s = check_sign(sign)?;
    let step = p.step();
    let (alpha, beta) = rmatrix_coeffs(z - w, s * lambda, p)?;
    let lhs = r8v_eval(z - w, p)?
        * kron2(
            &phi_signed(sign, z, lambda + s * step, p)?,
            &phi_signed(-sign, w, lambda, p)?,
        );
    let rhs = kron2(
        &phi_signed(sign, z, lambda, p)?,
        &phi_signed(-sign, w, lambda - s * step, p)?,
    ) * alpha
        + kron2(
            &phi_signed(-sign, z, lambda, p)?,
            &phi_signed(sign, w, lambda + s * step, p)?,
        ) * beta;
    Ok(max_abs_vec(&(lhs - rhs)))
}

/// Max-norm residual of the vertex-IRF transformation on V x V:
///
/// ```text
/// S(w,l)^(2) S(z,l-2eta h^(2))^(1) R(z-w,l)
///   = R8V(z-w) S(z,l)^(1) S(w,l-2eta h^(1))^(2)
/// ```
pub fn vertex_irf_residual(z: C64, w: C64, lambda: C64, p: &ModularParams) -> Result<f64> {
    let step = p.step();
    let emb = |site: usize, shift: &[usize], zz: C64| {
        embed_shifted(2, &[site], shift, lambda, step, |lam| s_matrix(zz, lam, p))
    };
    let lhs = emb(1, &[], w)? * emb(0, &[1], z)? * rmatrix_eval(z - w, lambda, p)?;
    let rhs = r8v_eval(z - w, p)? * emb(0, &[], z)? * emb(1, &[0], w)?;
    Ok(max_abs_diff(&lhs, &rhs))
}

// ---------------------------------------------------------------------------
// Eight-vertex chain
// ---------------------------------------------------------------------------

/// A spin chain carrying the eight-vertex transfer matrix and the chain
/// intertwiner S_n; evaluation points must be distinct mod the lattice.
#[derive(Debug, Clone)]
pub struct EightVertexChain {
    inner: FundamentalChain,
}

impl EightVertexChain {
    pub fn new(z_points: Vec<C64>, params: ModularParams) -> Result<Self> {
        Ok(Self {
            inner: FundamentalChain::new(z_points, params)?,
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn z_points(&self) -> &[C64] {
        self.inner.z_points()
    }

    pub fn params(&self) -> &ModularParams {
        self.inner.params()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// The dynamical chain over the same evaluation points.
    pub fn fundamental(&self) -> &FundamentalChain {
        &self.inner
    }

    /// Ordered product `R8V(z-z_1)^{(01)} ... R8V(z-z_n)^{(0n)}` on the
    /// auxiliary factor 0 plus the n chain factors.
    pub fn monodromy(&self, z: C64) -> Result<DMatrix<C64>> {
        let n = self.n();
        let total = n + 1;
        let p = *self.params();
        let mut out: Option<DMatrix<C64>> = None;
        for j in 1..=n {
            let zz = z - self.z_points()[j - 1];
            let factor = embed_shifted(total, &[0, j], &[], C64::new(0.0, 0.0), p.step(), |_| {
                r8v_eval(zz, &p)
            })?;
            out = Some(match out {
                None => factor,
                Some(acc) => acc * factor,
            });
        }
        Ok(out.unwrap())
    }

    /// Eight-vertex transfer matrix: partial trace of the monodromy over the
    /// auxiliary factor.
    pub fn transfer(&self, z: C64) -> Result<DMatrix<C64>> {
        partial_trace_first(&self.monodromy(z)?)
    }

    fn s_n_inner(&self, lambda: C64, dynamical: bool) -> Result<DMatrix<C64>> {
        let n = self.n();
        let p = *self.params();
        let mut out: Option<DMatrix<C64>> = None;
        for k in (1..=n).rev() {
            let spectators: Vec<usize> = if dynamical { (k..n).collect() } else { Vec::new() };
            let zk = self.z_points()[k - 1];
            let factor = embed_shifted(n, &[k - 1], &spectators, lambda, p.step(), |lam| {
                s_matrix(zk, lam, &p)
            })?;
            out = Some(match out {
                None => factor,
                Some(acc) => acc * factor,
            });
        }
        Ok(out.unwrap())
    }

    /// Chain intertwiner
    /// `S_n(l) = S(z_n,l)^{(n)} S(z_{n-1}, l-2eta h^{(n)})^{(n-1)} ...
    ///  S(z_1, l-2eta sum_{j>=2} h^{(j)})^{(1)}`.
    pub fn s_n(&self, lambda: C64) -> Result<DMatrix<C64>> {
        self.s_n_inner(lambda, true)
    }

    /// `S_n` with the dynamical shifts dropped; the intertwining property
    /// fails badly without them (discrimination check).
    pub fn s_n_unshifted(&self, lambda: C64) -> Result<DMatrix<C64>> {
        self.s_n_inner(lambda, false)
    }
}

fn intertwine_residual_inner(
    chain: &EightVertexChain,
    z: C64,
    lambda: C64,
    dynamical: bool,
) -> Result<f64> {
    if chain.n() % 2 != 0 {
        return Err(Error::ShapeMismatch(
            "zero-weight restriction needs an even chain".into(),
        ));
    }
    let step = chain.params().step();
    let lhs = chain.transfer(z)? * chain.s_n_inner(lambda, dynamical)?;
    let [a_plus, _, _, _] = chain.fundamental().abcd_blocks(z, lambda + step)?;
    let [_, _, _, d_minus] = chain.fundamental().abcd_blocks(z, lambda - step)?;
    let rhs = chain.s_n_inner(lambda + step, dynamical)? * a_plus
        + chain.s_n_inner(lambda - step, dynamical)? * d_minus;
    let mut worst = 0.0f64;
    for &col in &zero_weight_indices(chain.n()) {
        for row in 0..chain.dim() {
            worst = worst.max((lhs[(row, col)] - rhs[(row, col)]).norm());
        }
    }
    Ok(worst)
}

/// Norm of `T8V(z) S_n(l) - S_n(l+2eta) A(z,l+2eta) - S_n(l-2eta) D(z,l-2eta)`
/// over the zero-weight columns, where A and D are the diagonal auxiliary
/// blocks of the chain L-operator.
pub fn t8v_intertwine_residual(chain: &EightVertexChain, z: C64, lambda: C64) -> Result<f64> {
    intertwine_residual_inner(chain, z, lambda, true)
}

/// Same residual with [`EightVertexChain::s_n_unshifted`]; stays large.
pub fn t8v_intertwine_residual_unshifted(
    chain: &EightVertexChain,
    z: C64,
    lambda: C64,
) -> Result<f64> {
    intertwine_residual_inner(chain, z, lambda, false)
}

// ---------------------------------------------------------------------------
// Eight-vertex eigenvectors at rational anisotropy
// ---------------------------------------------------------------------------

/// An eigenvector of the eight-vertex transfer matrix produced by the
/// summation functional, with its provenance data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EightVertexEigenvector {
    pub n: usize,
    pub q: u32,
    pub p: i64,
    pub mu: C64,
    pub z: C64,
    pub eigenvalue: C64,
    pub residual: f64,
    pub vector: Vec<C64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Largest q accepted by the summation functional; the cost per candidate mu
/// is q closed-form vector evaluations.
pub const MAX_FUNCTIONAL_ORDER: u32 = 12;

fn check_rational_eta(p: &ModularParams, p_num: i64, q_den: u32) -> Result<()> {
    if q_den == 0 || q_den > MAX_FUNCTIONAL_ORDER {
        return Err(Error::EtaNotRational(format!(
            "denominator {q_den} outside 1..={MAX_FUNCTIONAL_ORDER}"
        )));
    }
    if gcd(p_num.unsigned_abs(), u64::from(q_den)) != 1 {
        return Err(Error::EtaNotRational(format!(
            "{p_num}/{q_den} is not in lowest terms"
        )));
    }
    let target = p_num as f64 / f64::from(q_den);
    if (p.eta() - target).norm() > 1e-12 {
        return Err(Error::EtaNotRational(format!(
            "eta = {} does not equal {p_num}/{q_den}",
            p.eta()
        )));
    }
    Ok(())
}

fn check_periodic_c(c: C64) -> Result<()> {
    let ratio = c / C64::new(0.0, std::f64::consts::PI);
    if (ratio - ratio.re.round()).norm() > 1e-9 {
        return Err(Error::EtaNotRational(format!(
            "c = {c} is not an integer multiple of i*pi"
        )));
    }
    Ok(())
}

/// Apply the shift-invariant functional `f -> sum_{j=0}^{q-1} f(mu + 2eta j)`
/// to `S_n(lambda) psi(lambda)` for a solved root set: the result is an
/// eigenvector of `T8V(z)` with the chain eigenvalue `eps(z)`.
///
/// Requires eta = p/q in lowest terms (so the sample points fill a period),
/// c in i*pi*Z (so the summand has period 2) and a zero-weight chain
/// (n = 2m).  A mu for which the functional annihilates the vector is
/// reported as [`Error::Degenerate`]; retry with another one.
pub fn t8v_bethe_eigenvector(
    chain: &EightVertexChain,
    sol: &BetheSolution,
    p_num: i64,
    q_den: u32,
    mu: C64,
    z: C64,
) -> Result<EightVertexEigenvector> {
    let p = chain.params();
    check_rational_eta(p, p_num, q_den)?;
    check_periodic_c(sol.c)?;
    if sol.n != chain.n() || sol.z.len() != chain.n() {
        return Err(Error::ShapeMismatch(format!(
            "solution is for {} sites, chain has {}",
            sol.n,
            chain.n()
        )));
    }
    if sol.n != 2 * sol.m {
        return Err(Error::ShapeMismatch(format!(
            "need a zero-weight chain (n = 2m), got n = {}, m = {}",
            sol.n, sol.m
        )));
    }
    if (sol.tau - p.tau()).norm() > 1e-12 || (sol.eta - p.eta()).norm() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "sol",
            reason: "solution parameters do not match the chain".into(),
        });
    }
    for (&zs, &zc) in sol.z.iter().zip(chain.z_points()) {
        if (zs - zc).norm() > 1e-12 {
            return Err(Error::ShapeMismatch(
                "solution evaluation points do not match the chain".into(),
            ));
        }
    }
    let problem = BetheProblem::fundamental(*p, chain.z_points().to_vec(), sol.m, sol.c)?;
    let step = p.step();
    let mut v: DVector<C64> = DVector::zeros(chain.dim());
    let mut largest_term = 0.0f64;
    for j in 0..q_den {
        let lam = mu + step * f64::from(j);
        let term = chain.s_n(lam)? * problem.bethe_vector(&sol.t, lam)?;
        largest_term = largest_term.max(term.norm());
        v += term;
    }
    if v.norm() <= 1e-8 * largest_term.max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(format!(
            "summation functional annihilated the vector at mu = {mu}"
        )));
    }
    let eigenvalue = problem.transfer_eigenvalue(&sol.t, z)?;
    let residual = (chain.transfer(z)? * &v - &v * eigenvalue).norm() / v.norm();
    Ok(EightVertexEigenvector {
        n: chain.n(),
        q: q_den,
        p: p_num,
        mu,
        z,
        eigenvalue,
        residual,
        vector: v.iter().copied().collect(),
    })
}

/// Try [`t8v_bethe_eigenvector`] over candidate mu values, skipping ones the
/// functional annihilates or that hit theta poles.
pub fn t8v_eigenvector_search(
    chain: &EightVertexChain,
    sol: &BetheSolution,
    p_num: i64,
    q_den: u32,
    mus: &[C64],
    z: C64,
) -> Result<EightVertexEigenvector> {
    let mut last = None;
    for &mu in mus {
        match t8v_bethe_eigenvector(chain, sol, p_num, q_den, mu, z) {
            Ok(out) => return Ok(out),
            Err(e @ (Error::Degenerate(_) | Error::PoleProximity { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::Degenerate(
        "no candidate mu values were supplied".into(),
    )))
}

// ---------------------------------------------------------------------------
// Height paths and the IRF transfer matrix
// ---------------------------------------------------------------------------

/// Cyclic height path a_1..a_n over a complex offset: integer levels whose
/// consecutive differences (including the wrap-around) are all +-1.  Such a
/// path labels the delta-supported state
/// `delta(lambda + 2eta a_1) e[a_1-a_2] x ... x e[a_n-a_1]`,
/// and cyclic admissibility forces n to be even.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    levels: Vec<i64>,
    mu: C64,
}

impl PathState {
    pub fn new(levels: Vec<i64>, mu: C64) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::ShapeMismatch(
                "a height path needs at least two sites".into(),
            ));
        }
        for i in 0..levels.len() {
            let j = (i + 1) % levels.len();
            if (levels[i] - levels[j]).abs() != 1 {
                return Err(Error::PathNotAdmissible(i));
            }
        }
        Ok(Self { levels, mu })
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    /// Complex height a_i = mu + level_i.
    pub fn height(&self, i: usize) -> C64 {
        height_value(self.mu, self.levels[i])
    }

    /// Index of `e[a_1-a_2] x ... x e[a_n-a_1]` in the chain basis.
    pub fn basis_index(&self) -> usize {
        let n = self.n();
        let mut idx = 0usize;
        for i in 0..n {
            if self.levels[i] - self.levels[(i + 1) % n] == -1 {
                idx |= 1 << (n - 1 - i);
            }
        }
        idx
    }

    /// The single support point `lambda = -2eta a_1` of the state.
    pub fn support(&self, p: &ModularParams) -> C64 {
        -p.step() * self.height(0)
    }
}

/// Face-weight expansion of the transfer matrix with the spectral argument
/// resolved per site: all admissible output paths b with coefficients
/// `prod_j w(b_j, a_j, a_{j+1}, b_{j+1}; args_j)`.
///
/// Admissible means b_j - a_j = +-1 at every site and b cyclically
/// self-adjacent; the output length is therefore at most 2^n.
pub fn irf_transfer_coeffs_args(
    state: &PathState,
    args: &[C64],
    p: &ModularParams,
) -> Result<Vec<(PathState, C64)>> {
    let n = state.n();
    if args.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} spectral arguments for {} sites",
            args.len(),
            n
        )));
    }
    let a = state.levels();
    let mut out = Vec::new();
    'candidates: for mask in 0..(1usize << n) {
        let b: Vec<i64> = (0..n)
            .map(|i| a[i] + if (mask >> (n - 1 - i)) & 1 == 0 { 1 } else { -1 })
            .collect();
        for i in 0..n {
            if (b[i] - b[(i + 1) % n]).abs() != 1 {
                continue 'candidates;
            }
        }
        let mut coeff = one();
        for j in 0..n {
            coeff *= boltzmann_weight(
                b[j],
                a[j],
                a[(j + 1) % n],
                b[(j + 1) % n],
                args[j],
                state.mu(),
                p,
            )?;
        }
        out.push((PathState::new(b, state.mu())?, coeff));
    }
    Ok(out)
}

/// [`irf_transfer_coeffs_args`] for the row transfer matrix of a chain:
/// site j carries the argument z - z_j.
pub fn irf_transfer_coeffs(
    state: &PathState,
    z: C64,
    chain: &FundamentalChain,
) -> Result<Vec<(PathState, C64)>> {
    if state.n() != chain.n() {
        return Err(Error::ShapeMismatch(format!(
            "path has {} sites, chain has {}",
            state.n(),
            chain.n()
        )));
    }
    let args: Vec<C64> = chain.z_points().iter().map(|&zj| z - zj).collect();
    irf_transfer_coeffs_args(state, &args, chain.params())
}
