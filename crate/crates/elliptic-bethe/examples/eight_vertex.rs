//! The eight-vertex side of the story: the non-dynamical R-matrix built
//! from characteristic thetas, the intertwiner that trades the dynamical
//! parameter for it, and — at rational eta — honest eigenvectors of the
//! eight-vertex transfer matrix from Bethe roots via a finite summation
//! functional.
//!
//! Run with `cargo run --example eight_vertex`.

use elliptic_bethe::bethe::{BetheProblem, SolveOptions};
use elliptic_bethe::lattice::{
    r8v_coeffs, r8v_eval, r8v_residue, r8v_residue_target, s_matrix, t8v_bethe_eigenvector,
    t8v_intertwine_residual, vertex_irf_residual, EightVertexChain,
};
use elliptic_bethe::tensor::max_abs_diff;
use elliptic_bethe::{ModularParams, Result};
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    // eta = 1/5: five summation nodes fill a period.
    let p = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.2, 0.0))?;
    let z = C64::new(0.27, 0.09);

    let (a, b, c, d) = r8v_coeffs(z, &p)?;
    println!("eight-vertex weights at z = {z}:");
    println!("  a = {a}\n  b = {b}\n  c = {c}\n  d = {d}");
    println!("  free-fermion check a*b vs c*d: {} vs {}", a * b, c * d);

    // R(0) is the flip, and the pole at z = 2eta carries the antisymmetriser.
    println!(
        "\n||R(0) - P||                  = {:.3e}",
        max_abs_diff(&r8v_eval(C64::new(0.0, 0.0), &p)?, &{
            let mut f = nalgebra::DMatrix::zeros(4, 4);
            f[(0, 0)] = C64::new(1.0, 0.0);
            f[(1, 2)] = C64::new(1.0, 0.0);
            f[(2, 1)] = C64::new(1.0, 0.0);
            f[(3, 3)] = C64::new(1.0, 0.0);
            f
        })
    );
    println!(
        "residue extrapolation error   = {:.3e}",
        max_abs_diff(&r8v_residue(&p, 1e-5)?, &r8v_residue_target(&p)?)
    );

    // The intertwiner S(z, lambda) relates the two R-matrices.
    let w = C64::new(-0.14, 0.21);
    let lambda = C64::new(0.36, -0.12);
    println!("\nS(z, lambda) = {}", s_matrix(z, lambda, &p)?);
    println!(
        "vertex-IRF relation residual  = {:.3e}",
        vertex_irf_residual(z, w, lambda, &p)?
    );

    // Iterated over a chain, the same intertwiner carries the eight-vertex
    // transfer matrix onto the two-term difference action.
    let points = vec![C64::new(0.0, 0.0), C64::new(0.31, 0.0)];
    let chain = EightVertexChain::new(points.clone(), p)?;
    println!(
        "transfer intertwining residual= {:.3e}",
        t8v_intertwine_residual(&chain, z, lambda)?
    );

    // Bethe roots at c = 0, then the five-node summation functional turns
    // the chain eigenfunction into an eigenvector of T_8V.
    let problem = BetheProblem::fundamental(p, points, 1, C64::new(0.0, 0.0))?;
    let sol = problem.solve(&[C64::new(0.155, 0.45)], &SolveOptions::default())?;
    println!("\nBethe root t1 = {}", sol.t[0]);
    let record = t8v_bethe_eigenvector(&chain, &sol, 1, 5, C64::new(0.17, 0.23), z)?;
    println!("eigenvalue eps(z) = {}", record.eigenvalue);
    println!("||T8V v - eps v|| / ||v||     = {:.3e}", record.residual);
    println!("vector components:");
    for (i, v) in record.vector.iter().enumerate() {
        println!("  [{i}] {v}");
    }
    Ok(())
}
