//! Configuration, report plumbing and subcommand bodies behind the thin
//! binary.
//!
//! A run resolves its parameters from an optional JSON config file with flag
//! overrides on top, executes one subcommand, prints a short human summary
//! and emits a JSON report (to `--out` or stdout).  Reports embed the library
//! version, the resolved parameters and the full effective config, so a
//! result file is reproducible from itself plus the binary.
//!
//! Exit codes: 0 success, 1 a checked identity failed its tolerance,
//! 2 configuration error, 3 numerical failure (non-convergence, degeneracy).

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheProblem, BetheSolution, SolveOptions};
use crate::chain::FundamentalChain;
use crate::error::{Error, Result};
use crate::lattice::{
    irf_transfer_coeffs, t8v_eigenvector_search, EightVertexChain, EightVertexEigenvector,
    PathState,
};
use crate::qlame::{classical_limit_residual, QLameProblem, SpectralPoint};
use crate::rmatrix::height_value;
use crate::theta::ModularParams;
use crate::verify::{self, SuiteResult};

// ---------------------------------------------------------------------------
// Literal parsing
// ---------------------------------------------------------------------------

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse a complex literal: `0.9i`, `-0.4+0.8i`, `1e-3-2e-4i`, `0.11`, `i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return Err(config_err("empty complex literal"));
    }
    let bytes = t.as_bytes();
    let mut split = None;
    for i in 1..bytes.len() {
        let ch = bytes[i] as char;
        if (ch == '+' || ch == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    let terms: Vec<&str> = match split {
        Some(i) => vec![&t[..i], &t[i..]],
        None => vec![&t[..]],
    };
    let mut re = None;
    let mut im = None;
    for term in terms {
        let (value, imaginary) = parse_term(term)?;
        let slot = if imaginary { &mut im } else { &mut re };
        if slot.is_some() {
            return Err(config_err(format!("cannot parse complex literal '{s}'")));
        }
        *slot = Some(value);
    }
    Ok(C64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)))
}

fn parse_term(term: &str) -> Result<(f64, bool)> {
    if let Some(rest) = term.strip_suffix(['i', 'I']) {
        let value = match rest {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => rest
                .parse()
                .map_err(|_| config_err(format!("cannot parse imaginary part '{term}'")))?,
        };
        Ok((value, true))
    } else {
        let value = term
            .parse()
            .map_err(|_| config_err(format!("cannot parse number '{term}'")))?;
        Ok((value, false))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Recognise a real value as p/q with a small denominator, in lowest terms.
pub fn recognize_rational(x: f64) -> Option<(i64, u32)> {
    for q in 1..=crate::lattice::MAX_FUNCTIONAL_ORDER {
        let p = (x * f64::from(q)).round();
        if (x - p / f64::from(q)).abs() <= 1e-12 && p.abs() < 1e6 {
            let p = p as i64;
            let g = gcd(p.unsigned_abs(), u64::from(q)).max(1);
            return Some((p / g as i64, q / g as u32));
        }
    }
    None
}

/// Parse an eta literal: a fraction `p/q` (kept exact) or a complex value.
pub fn parse_eta(s: &str) -> Result<(C64, Option<(i64, u32)>)> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if let Some((num, den)) = t.split_once('/') {
        let p: i64 = num
            .parse()
            .map_err(|_| config_err(format!("eta: bad numerator '{num}'")))?;
        let q: u32 = den
            .parse()
            .map_err(|_| config_err(format!("eta: bad denominator '{den}'")))?;
        if q == 0 {
            return Err(config_err("eta: denominator must be positive"));
        }
        let g = gcd(p.unsigned_abs(), u64::from(q)).max(1);
        let (p, q) = (p / g as i64, q / g as u32);
        Ok((C64::new(p as f64 / f64::from(q), 0.0), Some((p, q))))
    } else {
        let value = parse_complex(&t)?;
        let rational = if value.im == 0.0 {
            recognize_rational(value.re)
        } else {
            None
        };
        Ok((value, rational))
    }
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Eta as it appears in a config file: a `[re, im]` pair, a bare number, or
/// a string literal such as `"1/5"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(C64),
    Real(f64),
    Text(String),
}

impl EtaSpec {
    fn resolve(&self) -> Result<(C64, Option<(i64, u32)>)> {
        match self {
            EtaSpec::Value(v) => {
                let rational = if v.im == 0.0 {
                    recognize_rational(v.re)
                } else {
                    None
                };
                Ok((*v, rational))
            }
            EtaSpec::Real(x) => Ok((C64::new(*x, 0.0), recognize_rational(*x))),
            EtaSpec::Text(s) => parse_eta(s),
        }
    }
}

/// Run parameters: a JSON config file and/or flags; flags win.  Complex
/// numbers serialize as `[re, im]`; unset fields fall back to documented
/// defaults at resolution time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tol_overrides: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_points: Option<Vec<C64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_end: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<Vec<C64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<C64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<i64>>,
}

/// Everything a command body needs, after file + flag merging.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ModularParams,
    pub seed: u64,
    pub eta_rational: Option<(i64, u32)>,
    pub out: Option<PathBuf>,
    pub config: RunConfig,
}

impl Resolved {
    fn tol(&self, name: &str, default: f64) -> f64 {
        self.config
            .tol_overrides
            .get(name)
            .copied()
            .unwrap_or(default)
    }
}

/// Merge a config with defaults (tau = 0.9i, eta = 0.11, seed = 42) and
/// validate the modular parameters; the echoed config carries the resolved
/// values.
pub fn resolve(mut config: RunConfig, out: Option<PathBuf>) -> Result<Resolved> {
    let tau = config.tau.unwrap_or(C64::new(0.0, 0.9));
    let (eta, eta_rational) = match &config.eta {
        Some(spec) => spec.resolve()?,
        None => (C64::new(0.11, 0.0), None),
    };
    let seed = config.seed.unwrap_or(42);
    let params = ModularParams::new(tau, eta)?;
    let out = out.or_else(|| config.output_path.clone());
    config.tau = Some(tau);
    config.eta = Some(match eta_rational {
        Some((p, q)) => EtaSpec::Text(format!("{p}/{q}")),
        None => EtaSpec::Value(eta),
    });
    config.seed = Some(seed);
    config.output_path = out.clone();
    Ok(Resolved {
        params,
        seed,
        eta_rational,
        out,
        config,
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ReportParams {
    pub tau: C64,
    pub eta: C64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_rational: Option<String>,
    pub seed: u64,
}

/// Envelope for every JSON report the binary writes.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub library: &'static str,
    pub version: &'static str,
    pub timestamp: u64,
    pub command: &'static str,
    pub params: ReportParams,
    pub config: RunConfig,
    pub data: T,
}

fn report<T: Serialize>(r: &Resolved, command: &'static str, data: T) -> Report<T> {
    Report {
        library: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        command,
        params: ReportParams {
            tau: r.params.tau(),
            eta: r.params.eta(),
            eta_rational: r.eta_rational.map(|(p, q)| format!("{p}/{q}")),
            seed: r.seed,
        },
        config: r.config.clone(),
        data,
    }
}

fn emit<T: Serialize>(rep: &Report<T>, out: &Option<PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rep)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared numerics helpers
// ---------------------------------------------------------------------------

fn default_z_points(n: usize) -> Vec<C64> {
    const BASE: [f64; 4] = [0.0, 0.31, 0.13, -0.27];
    (0..n)
        .map(|j| {
            if j < BASE.len() {
                C64::new(BASE[j], 0.0)
            } else {
                C64::new(0.37 * j as f64 - 1.0, 0.0)
            }
        })
        .collect()
}

/// Seeded cell draw, separated from the lattice, 2eta shifts of it, and the
/// given reference points.
fn draw_away(rng: &mut ChaCha8Rng, p: &ModularParams, points: &[C64], kmax: i32) -> C64 {
    loop {
        let z = verify::draw_k(rng, p, kmax);
        if points.iter().all(|&zj| verify::well_separated(p, z - zj, kmax)) {
            return z;
        }
    }
}

fn check_distinct(p: &ModularParams, t: &[C64]) -> Result<()> {
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let (d, _, _) = p.lattice_reduce(t[i] - t[j]);
            if d.norm() < 1e-6 {
                return Err(Error::CoincidentPoints(t[i], t[j]));
            }
        }
    }
    Ok(())
}

/// Starting points for the root search: the configured t0 if given, else a
/// seeded family of candidate tuples.
fn starting_roots(r: &Resolved, m: usize, z_points: &[C64]) -> Result<Vec<Vec<C64>>> {
    if let Some(t0) = &r.config.t0 {
        if t0.len() != m {
            return Err(config_err(format!("t0 must list {m} roots, got {}", t0.len())));
        }
        check_distinct(&r.params, t0)?;
        return Ok(vec![t0.clone()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ 0x5eed_0001);
    let mut starts = Vec::new();
    for _ in 0..12 {
        let mut t = Vec::with_capacity(m);
        while t.len() < m {
            let cand = draw_away(&mut rng, &r.params, z_points, 2);
            if t.iter().all(|&u| !r.params.near_lattice(cand - u, 0.05)) {
                t.push(cand);
            }
        }
        starts.push(t);
    }
    Ok(starts)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct CheckData {
    suites: Vec<SuiteResult>,
    all_pass: bool,
}

pub fn run_check(r: &Resolved) -> Result<i32> {
    for name in r.config.tol_overrides.keys() {
        if verify::default_tol(name).is_none() {
            return Err(config_err(format!("tol_overrides: unknown suite '{name}'")));
        }
    }
    let overrides: HashMap<String, f64> = r
        .config
        .tol_overrides
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let suites = verify::run_suites(&r.params, r.seed, &overrides)?;
    for s in &suites {
        println!(
            "suite {:<27} {}  count {:>5}  max {:.3e}  tol {:.1e}",
            s.name,
            if s.pass { "pass" } else { "FAIL" },
            s.count,
            s.max_residual,
            s.tol
        );
    }
    let all_pass = suites.iter().all(|s| s.pass);
    println!(
        "{} of {} suites passed",
        suites.iter().filter(|s| s.pass).count(),
        suites.len()
    );
    let code = if all_pass { 0 } else { 1 };
    emit(&report(r, "check", CheckData { suites, all_pass }), &r.out)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// bethe
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct EigenCheck {
    w: C64,
    lambda: C64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct BetheData {
    solution: BetheSolution,
    eigen_checks: Vec<EigenCheck>,
    eigen_tol: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    eight_vertex: Option<Vec<EightVertexEigenvector>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eight_vertex_tol: Option<f64>,
}

fn solve_configured_bethe(r: &Resolved) -> Result<(BetheProblem, BetheSolution, Vec<C64>)> {
    let n = r.config.n.unwrap_or(2);
    let m = r.config.m.unwrap_or(1);
    let z_points = r
        .config
        .z_points
        .clone()
        .unwrap_or_else(|| default_z_points(n));
    if z_points.len() != n {
        return Err(config_err(format!(
            "z_points lists {} entries for n = {n}",
            z_points.len()
        )));
    }
    let c = r.config.c.unwrap_or(C64::new(0.0, 0.0));
    let problem = BetheProblem::fundamental(r.params, z_points.clone(), m, c)?;
    let starts = starting_roots(r, m, &z_points)?;
    let sol = problem.solve_multi_start(&starts, &SolveOptions::default())?;
    Ok((problem, sol, z_points))
}

pub fn run_bethe(r: &Resolved, eight_vertex: bool) -> Result<i32> {
    let (problem, sol, z_points) = solve_configured_bethe(r)?;
    println!(
        "bethe roots converged: m = {}, residual {:.3e}",
        sol.m, sol.residual
    );

    let eigen_tol = r.tol("eigen_relation", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ 0x5eed_0002);
    let mut eigen_checks = Vec::new();
    let mut attempts = 0;
    while eigen_checks.len() < 3 {
        attempts += 1;
        if attempts > 200 {
            return Err(Error::Degenerate(
                "could not find pole-free eigenvalue sample points".into(),
            ));
        }
        let w = draw_away(&mut rng, &r.params, &z_points, 2);
        let lambda = draw_away(&mut rng, &r.params, &[], 3);
        match problem.eigen_relation_residual(&sol.t, w, lambda) {
            Ok(residual) => {
                println!("  T({w:.4}) residual {residual:.3e}");
                eigen_checks.push(EigenCheck {
                    w,
                    lambda,
                    residual,
                });
            }
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut pass = eigen_checks.iter().all(|e| e.residual < eigen_tol);

    let (eight_vertex, eight_vertex_tol) = if eight_vertex {
        let records = eight_vertex_records(r, &sol, &z_points, 1)?;
        let tol = r.tol("eight_vertex_eigenvector", 1e-8);
        for rec in &records {
            println!(
                "  eight-vertex z = {:.4}: residual {:.3e}",
                rec.z, rec.residual
            );
        }
        pass = pass && records.iter().all(|rec| rec.residual < tol);
        (Some(records), Some(tol))
    } else {
        (None, None)
    };

    let code = if pass { 0 } else { 1 };
    emit(
        &report(
            r,
            "bethe",
            BetheData {
                solution: sol,
                eigen_checks,
                eigen_tol,
                pass,
                eight_vertex,
                eight_vertex_tol,
            },
        ),
        &r.out,
    )?;
    Ok(code)
}

/// Push the solved chain through the summation functional at `samples`
/// spectral points; mu comes from the config or a seeded search.
fn eight_vertex_records(
    r: &Resolved,
    sol: &BetheSolution,
    z_points: &[C64],
    samples: usize,
) -> Result<Vec<EightVertexEigenvector>> {
    let (p_num, q_den) = r.eta_rational.ok_or_else(|| {
        Error::EtaNotRational("the eight-vertex functional needs eta = p/q (try --eta 1/5)".into())
    })?;
    let chain = EightVertexChain::new(z_points.to_vec(), r.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ 0x5eed_0008);
    let mus: Vec<C64> = match r.config.mu {
        Some(mu) => vec![mu],
        None => (0..8)
            .map(|_| verify::draw_k(&mut rng, &r.params, 1))
            .collect(),
    };
    let zs: Vec<C64> = match (samples, r.config.z) {
        (1, Some(z)) => vec![z],
        _ => (0..samples)
            .map(|_| draw_away(&mut rng, &r.params, z_points, 2))
            .collect(),
    };
    zs.iter()
        .map(|&z| t8v_eigenvector_search(&chain, sol, p_num, q_den, &mus, z))
        .collect()
}

// ---------------------------------------------------------------------------
// qlame
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct ClassicalRow {
    eta: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct QlameData {
    m: usize,
    points: Vec<SpectralPoint>,
    eigen_residual_max: f64,
    eigen_tol: f64,
    csv: String,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical: Option<Vec<ClassicalRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical_orders: Option<Vec<f64>>,
}

fn qlame_csv(points: &[SpectralPoint], m: usize) -> String {
    let mut csv = String::from("c_re,c_im");
    for j in 1..=m {
        csv.push_str(&format!(",t{j}_re,t{j}_im"));
    }
    csv.push_str(",eps_re,eps_im\n");
    for pt in points {
        csv.push_str(&format!("{},{}", pt.c.re, pt.c.im));
        for t in &pt.t {
            csv.push_str(&format!(",{},{}", t.re, t.im));
        }
        csv.push_str(&format!(",{},{}\n", pt.eps.re, pt.eps.im));
    }
    csv
}

pub fn run_qlame(r: &Resolved, classical_limit: bool) -> Result<i32> {
    let m = r.config.m.unwrap_or(2);
    let problem = QLameProblem::new(m, r.params)?;
    let c0 = r.config.c.unwrap_or(C64::new(0.0, 0.0));
    let opts = SolveOptions::default();

    let starts = starting_roots(r, m, &[])?;
    let mut start_point = None;
    let mut last_err = None;
    for t0 in &starts {
        match problem.solve(c0, t0, &opts) {
            Ok(pt) => {
                start_point = Some(pt);
                break;
            }
            Err(
                e @ (Error::NoConvergence { .. }
                | Error::SingularJacobian(_)
                | Error::PoleProximity { .. }
                | Error::CoincidentPoints(_, _)),
            ) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let start_point = match start_point {
        Some(pt) => pt,
        None => {
            return Err(last_err.unwrap_or(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
                trace: vec![],
            }))
        }
    };

    // Continuation along a straight c-path, one report entry per target;
    // on failure we still report the prefix that converged.
    let mut points = vec![start_point];
    let mut continuation_error = None;
    if let Some(c_end) = r.config.c_end {
        let steps = r.config.steps.unwrap_or(30).max(1);
        let targets: Vec<C64> = (1..=steps)
            .map(|k| c0 + (c_end - c0) * (k as f64 / steps as f64))
            .collect();
        match problem.continue_in_c(points.last().unwrap(), &targets, &opts) {
            Ok(path) => points = path,
            Err(e) => continuation_error = Some(e),
        }
    }

    // Verify L psi = eps psi on every reported point at seeded lambdas.
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed ^ 0x5eed_0003);
    let eigen_tol = r.tol("qlame_eigen", 1e-10);
    let mut eigen_residual_max = 0.0f64;
    for pt in &points {
        let t = pt.t.clone();
        let c = pt.c;
        let psi = |lam: C64| problem.psi(&t, c, lam);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 5 {
            attempts += 1;
            if attempts > 200 {
                return Err(Error::Degenerate(
                    "could not find pole-free eigenfunction sample points".into(),
                ));
            }
            let lam = draw_away(&mut rng, &r.params, &[], (m + 1) as i32);
            let lhs = match problem.apply(&psi, lam) {
                Ok(v) => v,
                Err(Error::PoleProximity { .. }) => continue,
                Err(e) => return Err(e),
            };
            let value = match psi(lam) {
                Ok(v) => v,
                Err(Error::PoleProximity { .. }) => continue,
                Err(e) => return Err(e),
            };
            let scale = value.norm().max(1e-3);
            eigen_residual_max = eigen_residual_max.max((lhs - pt.eps * value).norm() / scale);
            checked += 1;
        }
    }
    let mut pass = eigen_residual_max < eigen_tol;

    let (classical, classical_orders) = if classical_limit {
        let etas = [0.08, 0.04, 0.02, 0.01];
        let psi = |lam: C64| {
            Ok(r.params.theta(lam + C64::new(0.31, 0.12))?
                * (C64::new(0.4, 0.1) * lam).exp())
        };
        let residuals =
            classical_limit_residual(r.params.tau(), &etas, m, C64::new(0.17, 0.05), &psi)?;
        let orders: Vec<f64> = residuals
            .windows(2)
            .map(|w| (w[0] / w[1]).log2())
            .collect();
        let rows: Vec<ClassicalRow> = etas
            .iter()
            .zip(&residuals)
            .map(|(&eta, &residual)| ClassicalRow { eta, residual })
            .collect();
        pass = pass && orders.iter().all(|o| (o - 2.0).abs() < 0.5);
        (Some(rows), Some(orders))
    } else {
        (None, None)
    };

    let csv = qlame_csv(&points, m);
    println!(
        "qlame m = {m}: {} spectral point(s), final c = {:.4}, eps = {:.6}",
        points.len(),
        points.last().unwrap().c,
        points.last().unwrap().eps
    );
    println!("  max eigen-relation residual {eigen_residual_max:.3e}");
    if let Some(path) = &r.out {
        std::fs::write(path.with_extension("csv"), &csv)?;
    }
    let data = QlameData {
        m,
        points,
        eigen_residual_max,
        eigen_tol,
        csv,
        pass,
        classical,
        classical_orders,
    };
    let code = if pass { 0 } else { 1 };
    emit(&report(r, "qlame", data), &r.out)?;
    match continuation_error {
        Some(e) => Err(e),
        None => Ok(code),
    }
}

// ---------------------------------------------------------------------------
// irf
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct IrfCoefficient {
    levels: Vec<i64>,
    coefficient: C64,
}

#[derive(Debug, Serialize)]
struct IrfData {
    levels: Vec<i64>,
    mu: C64,
    z: C64,
    z_points: Vec<C64>,
    coefficients: Vec<IrfCoefficient>,
    operator_residual: f64,
    tol: f64,
    pass: bool,
}

pub fn run_irf(r: &Resolved) -> Result<i32> {
    let levels = r.config.levels.clone().unwrap_or_else(|| vec![0, 1, 0, 1]);
    let n = levels.len();
    let mu = r.config.mu.unwrap_or(C64::new(0.23, 0.17));
    let z = r.config.z.unwrap_or(C64::new(0.19, 0.11));
    let z_points = r
        .config
        .z_points
        .clone()
        .unwrap_or_else(|| default_z_points(n));
    if z_points.len() != n {
        return Err(config_err(format!(
            "z_points lists {} entries for a path of {n} sites",
            z_points.len()
        )));
    }
    let chain = FundamentalChain::new(z_points.clone(), r.params)?;
    let state = PathState::new(levels.clone(), mu)?;
    let coeffs = irf_transfer_coeffs(&state, z, &chain)?;

    // Oracle: regroup the face expansion by leading height and compare with
    // the difference-operator blocks at the delta support point.
    let step = r.params.step();
    let mut operator_residual = 0.0f64;
    for lead in [levels[0] - 1, levels[0] + 1] {
        let lam = -step * height_value(mu, lead);
        let [blk_a, _, _, blk_d] = chain.abcd_blocks(z, lam)?;
        let block = if lead < levels[0] { blk_a } else { blk_d };
        let mut from_faces = nalgebra::DVector::<C64>::zeros(chain.dim());
        for (b, coeff) in coeffs.iter().filter(|(b, _)| b.levels()[0] == lead) {
            from_faces[b.basis_index()] += *coeff;
        }
        let from_blocks = block.column(state.basis_index()).into_owned();
        let diff = (from_faces - from_blocks)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        operator_residual = operator_residual.max(diff);
    }

    let tol = r.tol("irf_operator", 1e-10);
    let pass = operator_residual < tol;
    println!(
        "irf expansion of |{levels:?}>: {} admissible outputs, operator residual {operator_residual:.3e}",
        coeffs.len()
    );
    let data = IrfData {
        levels,
        mu,
        z,
        z_points,
        coefficients: coeffs
            .into_iter()
            .map(|(state, coefficient)| IrfCoefficient {
                levels: state.levels().to_vec(),
                coefficient,
            })
            .collect(),
        operator_residual,
        tol,
        pass,
    };
    let code = if pass { 0 } else { 1 };
    emit(&report(r, "irf", data), &r.out)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// vertex8
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct Vertex8Data {
    solution: BetheSolution,
    records: Vec<EightVertexEigenvector>,
    tol: f64,
    pass: bool,
}

pub fn run_vertex8(r: &Resolved) -> Result<i32> {
    if r.eta_rational.is_none() {
        return Err(Error::EtaNotRational(
            "vertex8 needs eta = p/q with q <= 12 (try --eta 1/5)".into(),
        ));
    }
    let mut r = r.clone();
    let n = r.config.n.unwrap_or(2);
    if n % 2 != 0 {
        return Err(config_err(format!("vertex8 needs an even chain, got n = {n}")));
    }
    r.config.n = Some(n);
    r.config.m = Some(r.config.m.unwrap_or(n / 2));
    let (_, sol, z_points) = solve_configured_bethe(&r)?;
    let samples = r.config.z_samples.unwrap_or(5).max(1);
    let records = eight_vertex_records(&r, &sol, &z_points, samples)?;
    let tol = r.tol("eight_vertex_eigenvector", 1e-8);
    for rec in &records {
        println!(
            "vertex8 z = {:.4}: eigenvalue {:.6}, residual {:.3e}",
            rec.z, rec.eigenvalue, rec.residual
        );
    }
    let pass = records.iter().all(|rec| rec.residual < tol);
    let code = if pass { 0 } else { 1 };
    emit(
        &report(
            &r,
            "vertex8",
            Vertex8Data {
                solution: sol,
                records,
                tol,
                pass,
            },
        ),
        &r.out,
    )?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "elliptic-bethe",
    version,
    about = "Transfer matrices, Bethe roots and difference spectra for the elliptic sl2 chain"
)]
pub struct Cli {
    /// Modular parameter, e.g. "0.9i" or "0.4+0.8i" (Im tau > 0)
    #[arg(long, global = true)]
    pub tau: Option<String>,
    /// Shift parameter: a number or an exact fraction like "1/5"
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// Seed for all randomised draws
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override, repeatable: --tol name=value
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every residual suite and report pass/fail per suite
    Check,
    /// Solve the Bethe equations and verify the transfer eigen-relation
    Bethe {
        /// Also push the solution through the eight-vertex functional
        #[arg(long = "eight-vertex")]
        eight_vertex: bool,
    },
    /// Solve or continue the two-term difference spectrum
    Qlame {
        /// Also tabulate the second-order limit residuals over small eta
        #[arg(long = "classical-limit")]
        classical_limit: bool,
    },
    /// Expand the face-weight transfer matrix over a height path
    Irf,
    /// Build eight-vertex eigenvectors at rational eta
    Vertex8,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(tau) = &cli.tau {
        config.tau = Some(parse_complex(tau)?);
    }
    if let Some(eta) = &cli.eta {
        parse_eta(eta)?; // validate now so the error names the flag
        config.eta = Some(EtaSpec::Text(eta.clone()));
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    for pair in &cli.tol {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| config_err(format!("--tol expects name=value, got '{pair}'")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| config_err(format!("--tol {name}: bad value '{value}'")))?;
        if value.is_nan() || value <= 0.0 {
            return Err(config_err(format!("--tol {name}: tolerance must be positive")));
        }
        config.tol_overrides.insert(name.to_string(), value);
    }
    Ok(config)
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::CoincidentPoints(_, _)
        | Error::EtaNotRational(_)
        | Error::ShapeMismatch(_)
        | Error::UnsupportedOrder(_)
        | Error::UnsupportedCharacteristic(_)
        | Error::HeightsNotAdjacent(_, _)
        | Error::PathNotAdmissible(_) => 2,
        Error::NonFiniteArgument(_)
        | Error::PoleProximity { .. }
        | Error::NoConvergence { .. }
        | Error::SingularJacobian(_)
        | Error::Degenerate(_) => 3,
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let config = load_config(&cli)?;
    let resolved = resolve(config, cli.out.clone())?;
    match cli.command {
        Command::Check => run_check(&resolved),
        Command::Bethe { eight_vertex } => run_bethe(&resolved, eight_vertex),
        Command::Qlame { classical_limit } => run_qlame(&resolved, classical_limit),
        Command::Irf => run_irf(&resolved),
        Command::Vertex8 => run_vertex8(&resolved),
    }
}

/// Binary entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NoConvergence { trace, .. } = &e {
                eprintln!("residual trace: {trace:?}");
            }
            exit_code_for(&e)
        }
    }
}
