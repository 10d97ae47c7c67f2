//! The two-term difference operator behind the zero-weight transfer matrix:
//! eigenfunctions from Bethe roots, continuation of a spectral branch in the
//! Bloch exponent c, and the symmetries that come for free.
//!
//! Run with `cargo run --example qlame_spectrum`.

use elliptic_bethe::bethe::SolveOptions;
use elliptic_bethe::qlame::{reference_problem, wronskian, QLameProblem};
use elliptic_bethe::{ModularParams, Result};
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let (problem, t0) = reference_problem()?;
    let opts = SolveOptions::default();
    let start = problem.solve(C64::new(0.0, 0.0), &t0, &opts)?;
    println!("m = {}: eps(c=0) = {}", problem.m(), start.eps);
    println!("roots: {:?}", start.t);

    // Follow the branch to c = 0.3 and print a short table.
    let targets: Vec<C64> = (1..=6).map(|k| C64::new(0.05 * k as f64, 0.0)).collect();
    let path = problem.continue_in_c(&start, &targets, &opts)?;
    println!("\n      c          Re eps      Im eps     residual");
    for pt in &path {
        println!(
            "  {:7.4}   {:9.6}  {:9.6}    {:.1e}",
            pt.c.re, pt.eps.re, pt.eps.im, pt.residual
        );
    }

    // Verify the eigen-relation away from the solver: apply the operator to
    // the closed-form eigenfunction at a fresh point.
    let last = path.last().unwrap();
    let (t, c, eps) = (last.t.clone(), last.c, last.eps);
    let psi = |lam: C64| problem.psi(&t, c, lam);
    let lam = C64::new(0.23, 0.11);
    let res = (problem.apply(&psi, lam)? - eps * psi(lam)?).norm();
    println!("\n|L psi - eps psi| at a fresh lambda: {res:.3e}");

    // The reflection t -> 2 eta - t, c -> -c lands on the same eigenvalue.
    let mirrored = problem.reflect(last)?;
    println!(
        "reflection: eps difference {:.3e}, residual {:.1e}",
        (mirrored.eps - eps).norm(),
        mirrored.residual
    );

    // Two eigenfunctions with the same eps: the Bloch pair psi(lambda),
    // psi(-lambda) (generic c).  Their difference Wronskian is 2eta-periodic
    // and detects degeneracy when it vanishes identically.
    let p = *problem.params();
    let psi_neg = |lam: C64| problem.psi(&t, c, -lam);
    let w1 = wronskian(&psi, &psi_neg, lam, &p)?;
    let w2 = wronskian(&psi, &psi_neg, lam + p.step(), &p)?;
    println!("difference Wronskian: {w1:.6} (shifted: {w2:.6})");

    // An m = 1 branch has a closed-form inverse: pick the root, read off c.
    let small = QLameProblem::new(1, ModularParams::new(C64::new(0.0, 0.9), C64::new(0.1, 0.0))?)?;
    let t1 = C64::new(0.31, 0.22);
    let c1 = small.closed_form_c(t1)?;
    println!(
        "\nm = 1 closed form: c = {c1:.6}, equation residual {:.3e}",
        small.bae_residual_norm(&[t1], c1)?
    );
    Ok(())
}
