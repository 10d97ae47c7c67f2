//! Seeded residual suites over the library's structural identities.
//!
//! Each suite draws its sample points from a deterministic generator, so a
//! run is reproducible from (parameters, seed) alone.  The suites share one
//! result shape and a registry with default tolerances; the command-line
//! `check` run and the integration gate both go through [`run_suites`].

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{rll_residual, FundamentalChain};
use crate::error::{Error, Result};
use crate::lattice::{
    r8v_eval, r8v_residue, r8v_residue_target, s_hat_matrix, t8v_intertwine_residual,
    vertex_irf_residual, EightVertexChain,
};
use crate::rmatrix::{admissible_hexagons, dybe_residual, star_triangle_residual};
use crate::tensor::max_abs_diff;
use crate::theta::ModularParams;

/// Outcome of one residual suite: how many residuals were evaluated, the
/// largest one, and whether it stayed under the tolerance in force.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub count: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SuiteResult {
    fn new(name: &str, count: usize, max_residual: f64, tol: f64) -> Self {
        SuiteResult {
            name: name.to_string(),
            count,
            max_residual,
            tol,
            pass: max_residual <= tol,
        }
    }
}

/// A suite entry point: parameters, seed, tolerance in force.
pub type SuiteFn = fn(&ModularParams, u64, f64) -> Result<SuiteResult>;

/// Registry of all suites with their default tolerances.
pub const SUITES: &[(&str, f64, SuiteFn)] = &[
    ("theta_identities", 1e-12, suite_theta),
    ("dynamical_yang_baxter", 1e-10, suite_dybe),
    ("star_triangle", 1e-10, suite_star_triangle),
    ("rll_exchange", 1e-10, suite_rll),
    ("highest_weight", 1e-10, suite_highest_weight),
    ("operator_commutation", 1e-10, suite_commutation),
    ("transfer_commutation", 1e-10, suite_transfer_commutation),
    ("vertex_irf", 1e-10, suite_vertex_irf),
    ("eight_vertex_intertwining", 1e-9, suite_intertwining),
    ("intertwiner_determinant", 1e-9, suite_determinant),
    ("eight_vertex_structure", 1e-10, suite_r8v_structure),
    ("eight_vertex_residue", 1e-4, suite_r8v_residue),
];

/// Default tolerance of the named suite, if it exists.
pub fn default_tol(name: &str) -> Option<f64> {
    SUITES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, tol, _)| *tol)
}

/// Run every registered suite; `overrides` replaces default tolerances by
/// suite name.  Seeds are derived per suite so the draws decorrelate.
pub fn run_suites(
    p: &ModularParams,
    seed: u64,
    overrides: &HashMap<String, f64>,
) -> Result<Vec<SuiteResult>> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, (name, tol, f))| {
            let tol = overrides.get(*name).copied().unwrap_or(*tol);
            f(p, seed.wrapping_add(1 + i as u64), tol)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// True when `z + k*2eta` stays clear of the period lattice for |k| <= kmax;
/// keeps residuals away from the amplification near theta denominators.
pub(crate) fn well_separated(p: &ModularParams, z: C64, kmax: i32) -> bool {
    (-kmax..=kmax).all(|k| !p.near_lattice(z + p.step() * k as f64, 0.05))
}

/// Uniform draw over the fundamental cell x + y*tau, x,y in (-1/2, 1/2),
/// rejected until `well_separated` with the given shift range.
pub(crate) fn draw_k(rng: &mut ChaCha8Rng, p: &ModularParams, kmax: i32) -> C64 {
    loop {
        let x = rng.gen_range(-0.5..0.5);
        let y = rng.gen_range(-0.5..0.5);
        let z = C64::new(x, 0.0) + p.tau() * y;
        if well_separated(p, z, kmax) {
            return z;
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, p: &ModularParams) -> C64 {
    draw_k(rng, p, 2)
}

/// A pair whose difference is also well separated (spectral arguments of
/// R-type factors are differences).
fn draw_pair(rng: &mut ChaCha8Rng, p: &ModularParams) -> (C64, C64) {
    loop {
        let z = draw(rng, p);
        let w = draw(rng, p);
        if well_separated(p, z - w, 2) {
            return (z, w);
        }
    }
}

/// A draw also separated from every chain evaluation point.
fn draw_for_points(rng: &mut ChaCha8Rng, p: &ModularParams, points: &[C64]) -> C64 {
    loop {
        let z = draw(rng, p);
        if points.iter().all(|&zj| well_separated(p, z - zj, 2)) {
            return z;
        }
    }
}

/// Retry-on-pole loop: runs `f` until `target` residual batches succeed,
/// skipping draws that land too close to a pole of some denominator.
fn collect<F>(name: &str, target: usize, mut f: F) -> Result<(usize, f64)>
where
    F: FnMut() -> Result<(usize, f64)>,
{
    let mut max = 0.0f64;
    let mut count = 0usize;
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < target {
        attempts += 1;
        if attempts > 100 * target + 100 {
            return Err(Error::Degenerate(format!(
                "suite {name}: too many draws rejected near poles"
            )));
        }
        match f() {
            Ok((n, r)) => {
                count += n;
                if r > max {
                    max = r;
                }
                done += 1;
            }
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok((count, max))
}

/// Entire vector probe with generic components, used where an identity is
/// checked through its action on a function of lambda.
fn probe(dim: usize, p: ModularParams) -> impl Fn(C64) -> Result<DVector<C64>> {
    move |lam: C64| {
        Ok(DVector::from_fn(dim, |r, _| {
            p.theta(lam + 0.17 + 0.09 * r as f64).unwrap() * C64::new(1.0 + r as f64 * 0.3, 0.2)
        }))
    }
}

fn chain2(p: &ModularParams) -> Result<FundamentalChain> {
    FundamentalChain::new(vec![C64::new(0.0, 0.0), C64::new(0.4, 0.0)], *p)
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Oddness, both translation laws, and the characteristic product identity,
/// at 100 points of the fundamental cell.
pub fn suite_theta(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = p.tau();
    let cc = p.product_constant();
    let (count, max) = collect("theta_identities", 100, || {
        let z = draw(&mut rng, p);
        let t = p.theta(z)?;
        let mut m = (p.theta(-z)? + t).norm();
        m = m.max((p.theta(z + 1.0)? + t).norm());
        let phase = (-C64::i() * std::f64::consts::PI * (tau + 2.0 * z)).exp();
        m = m.max((p.theta(z + tau)? + phase * t).norm());
        m = m.max((p.theta_char(0, z)? * p.theta_char(1, z)? - cc * t).norm());
        Ok((4, m))
    })?;
    Ok(SuiteResult::new("theta_identities", count, max, tol))
}

/// Dynamical Yang-Baxter residual on V x V x V at 50 seeded draws.
pub fn suite_dybe(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (count, max) = collect("dynamical_yang_baxter", 50, || {
        let (z, w) = draw_pair(&mut rng, p);
        let lambda = draw(&mut rng, p);
        Ok((1, dybe_residual(z, w, lambda, p)?))
    })?;
    Ok(SuiteResult::new("dynamical_yang_baxter", count, max, tol))
}

/// Star-triangle relation over every admissible height hexagon within +-4
/// of the offset, at 10 seeded (z, w, mu) draws.
pub fn suite_star_triangle(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hexes = admissible_hexagons(4);
    let (count, max) = collect("star_triangle", 10, || {
        let (z, w) = draw_pair(&mut rng, p);
        let mu = draw_k(&mut rng, p, 6);
        let mut m = 0.0f64;
        for hex in &hexes {
            m = m.max(star_triangle_residual(*hex, z, w, mu, p)?);
        }
        Ok((hexes.len(), m))
    })?;
    Ok(SuiteResult::new("star_triangle", count, max, tol))
}

/// RLL exchange relation for the two-site fundamental chain at 20 draws.
pub fn suite_rll(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = chain2(p)?;
    let points = chain.z_points().to_vec();
    let (count, max) = collect("rll_exchange", 20, || {
        let z = draw_for_points(&mut rng, p, &points);
        let w = draw_for_points(&mut rng, p, &points);
        if !well_separated(p, z - w, 2) {
            return Err(Error::PoleProximity {
                arg: z - w,
                tol: 0.05,
            });
        }
        let lambda = draw_k(&mut rng, p, 3);
        Ok((1, rll_residual(&chain, z, w, lambda)?))
    })?;
    Ok(SuiteResult::new("rll_exchange", count, max, tol))
}

/// Highest-weight action on e[1]^n: c kills it, a fixes it, d scales it by
/// the closed-form product.
pub fn suite_highest_weight(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = chain2(p)?;
    let points = chain.z_points().to_vec();
    let dim = chain.dim();
    let (count, max) = collect("highest_weight", 20, || {
        let z = draw_for_points(&mut rng, p, &points);
        let lambda = draw(&mut rng, p);
        let [a, _, cblk, d] = chain.abcd_blocks(z, lambda)?;
        let mut v0 = DVector::zeros(dim);
        v0[0] = C64::new(1.0, 0.0);
        let expect = chain.highest_weight_d(z, lambda)?;
        let scale = 1.0 + expect.norm();
        let mut m = (&cblk * &v0).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let av = &a * &v0;
        m = m.max((av[0] - C64::new(1.0, 0.0)).norm());
        m = m.max(av.rows_range(1..).iter().map(|v| v.norm()).fold(0.0, f64::max));
        let dv = &d * &v0;
        m = m.max((dv[0] - expect).norm() / scale);
        m = m.max(dv.rows_range(1..).iter().map(|v| v.norm()).fold(0.0, f64::max));
        Ok((3, m))
    })?;
    Ok(SuiteResult::new("highest_weight", count, max, tol))
}

/// The a-b and d-b exchange relations applied to a probe function.
pub fn suite_commutation(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = chain2(p)?;
    let points = chain.z_points().to_vec();
    let f = probe(chain.dim(), *p);
    let (count, max) = collect("operator_commutation", 10, || {
        let w = draw_for_points(&mut rng, p, &points);
        let t = draw_for_points(&mut rng, p, &points);
        if !well_separated(p, t - w, 2) {
            return Err(Error::PoleProximity {
                arg: t - w,
                tol: 0.05,
            });
        }
        let lambda = draw_k(&mut rng, p, 4);
        let r1 = chain.commutation_residual_ab(w, t, lambda, &f)?;
        let r2 = chain.commutation_residual_db(w, t, lambda, &f)?;
        Ok((2, r1.max(r2)))
    })?;
    Ok(SuiteResult::new("operator_commutation", count, max, tol))
}

/// The transfer family commutes on the zero-weight subspace: the composed
/// coefficient matrices agree per total shift on zero-weight index pairs.
pub fn suite_transfer_commutation(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = chain2(p)?;
    let points = chain.z_points().to_vec();
    let idx = chain.zero_weight();
    let (count, max) = collect("transfer_commutation", 10, || {
        let z = draw_for_points(&mut rng, p, &points);
        let w = draw_for_points(&mut rng, p, &points);
        let lambda = draw_k(&mut rng, p, 4);
        let zw = chain.transfer_op(z).compose(&chain.transfer_op(w))?;
        let wz = chain.transfer_op(w).compose(&chain.transfer_op(z))?;
        let mut m = 0.0f64;
        for shift in [-2i64, 0, 2] {
            let a = zw.coefficient(shift, lambda)?;
            let b = wz.coefficient(shift, lambda)?;
            for &r in &idx {
                for &cc in &idx {
                    m = m.max((a[(r, cc)] - b[(r, cc)]).norm());
                }
            }
        }
        Ok((3, m))
    })?;
    Ok(SuiteResult::new("transfer_commutation", count, max, tol))
}

/// The intertwiner carries the dynamical R-matrix to the eight-vertex one.
pub fn suite_vertex_irf(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (count, max) = collect("vertex_irf", 50, || {
        let (z, w) = draw_pair(&mut rng, p);
        let lambda = draw(&mut rng, p);
        Ok((1, vertex_irf_residual(z, w, lambda, p)?))
    })?;
    Ok(SuiteResult::new("vertex_irf", count, max, tol))
}

/// The iterated intertwiner carries the eight-vertex transfer matrix to the
/// two-term difference action, for chains of two and four sites.
pub fn suite_intertwining(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max = 0.0f64;
    let mut count = 0usize;
    for points in [
        vec![C64::new(0.0, 0.0), C64::new(0.4, 0.0)],
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.4, 0.0),
            C64::new(0.13, 0.0),
            C64::new(-0.27, 0.0),
        ],
    ] {
        let chain = EightVertexChain::new(points.clone(), *p)?;
        let kmax = points.len() as i32 + 1;
        let name = "eight_vertex_intertwining";
        let (c, m) = collect(name, 4, || {
            let z = draw_for_points(&mut rng, p, &points);
            let lambda = draw_k(&mut rng, p, kmax);
            Ok((1, t8v_intertwine_residual(&chain, z, lambda)?))
        })?;
        count += c;
        max = max.max(m);
    }
    Ok(SuiteResult::new("eight_vertex_intertwining", count, max, tol))
}

/// det S-hat stays proportional to theta(z) theta(lambda): the ratio drifts
/// by less than the tolerance (relative) across draws.
pub fn suite_determinant(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratio0: Option<C64> = None;
    let (count, max) = collect("intertwiner_determinant", 20, || {
        let z = draw(&mut rng, p);
        let lambda = draw(&mut rng, p);
        let sh = s_hat_matrix(z, lambda, p)?;
        let det = sh[(0, 0)] * sh[(1, 1)] - sh[(0, 1)] * sh[(1, 0)];
        let ratio = det / (p.theta(z)? * p.theta(lambda)?);
        let drift = match ratio0 {
            None => {
                ratio0 = Some(ratio);
                0.0
            }
            Some(r0) => (ratio - r0).norm() / r0.norm(),
        };
        Ok((1, drift))
    })?;
    Ok(SuiteResult::new("intertwiner_determinant", count, max, tol))
}

/// Eight-vertex structure: flip at z = 0 and conjugation quasi-periodicity
/// under both periods.
pub fn suite_r8v_structure(p: &ModularParams, seed: u64, tol: f64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flip = nalgebra::DMatrix::zeros(4, 4);
    flip[(0, 0)] = C64::new(1.0, 0.0);
    flip[(1, 2)] = C64::new(1.0, 0.0);
    flip[(2, 1)] = C64::new(1.0, 0.0);
    flip[(3, 3)] = C64::new(1.0, 0.0);
    let mut max = max_abs_diff(&r8v_eval(C64::new(0.0, 0.0), p)?, &flip);
    let mut count = 1usize;
    let id = nalgebra::DMatrix::identity(2, 2);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let parity = nalgebra::DMatrix::from_diagonal(&DVector::from_column_slice(&[-one, one]));
    let swap = nalgebra::DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let a1 = parity.kronecker(&id);
    let b1 = swap.kronecker(&id);
    let (c, m) = collect("eight_vertex_structure", 5, || {
        let z = draw(&mut rng, p);
        let r = r8v_eval(z, p)?;
        let r1 = r8v_eval(z + 1.0, p)?;
        let mut local = max_abs_diff(&r1, &(&a1 * &r * &a1));
        let rt = r8v_eval(z + p.tau(), p)?;
        let factor = (-2.0 * std::f64::consts::PI * C64::i() * p.eta()).exp();
        local = local.max(max_abs_diff(&rt, &(&b1 * &r * &b1 * factor)));
        Ok((2, local))
    })?;
    count += c;
    max = max.max(m);
    Ok(SuiteResult::new("eight_vertex_structure", count, max, tol))
}

/// Residue of the eight-vertex matrix at z = 2eta: two-point extrapolation
/// against the closed form (antisymmetriser scale).
pub fn suite_r8v_residue(p: &ModularParams, _seed: u64, tol: f64) -> Result<SuiteResult> {
    let estimate = r8v_residue(p, 1e-5)?;
    let target = r8v_residue_target(p)?;
    let max = max_abs_diff(&estimate, &target);
    Ok(SuiteResult::new("eight_vertex_residue", 1, max, tol))
}
