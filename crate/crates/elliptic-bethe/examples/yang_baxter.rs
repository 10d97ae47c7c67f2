//! The dynamical R-matrix and its two defining identities: the dynamical
//! Yang-Baxter equation on three tensor factors, and the star-triangle
//! relation of the face weights extracted from it.
//!
//! Run with `cargo run --example yang_baxter`.

use elliptic_bethe::rmatrix::{
    admissible_hexagons, boltzmann_weight, dybe_residual, rmatrix_coeffs, rmatrix_eval,
    star_triangle_sides,
};
use elliptic_bethe::{ModularParams, Result};
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let p = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.11, 0.0))?;
    let z = C64::new(0.27, 0.08);
    let lambda = C64::new(0.19, -0.06);

    let (alpha, beta) = rmatrix_coeffs(z, lambda, &p)?;
    println!("alpha(z, lambda) = {alpha}");
    println!("beta(z, lambda)  = {beta}");

    let r = rmatrix_eval(z, lambda, &p)?;
    println!("\nR(z, lambda) =");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:>24.4}", r[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
    // Weight preservation: only the middle 2x2 block mixes.
    println!(
        "\ncorner entries: {} and {} (parallel spins pass through)",
        r[(0, 0)],
        r[(3, 3)]
    );

    let w = C64::new(-0.13, 0.17);
    let mu = C64::new(0.35, 0.21);
    println!(
        "\ndynamical Yang-Baxter residual at a generic point: {:.3e}",
        dybe_residual(z, w, lambda, &p)?
    );

    // Face weights live on quadruples of pairwise adjacent heights; the
    // star-triangle relation sums over the internal height of a hexagon.
    println!("\nw(1,0,1,2; z) = {}", boltzmann_weight(1, 0, 1, 2, z, mu, &p)?);
    println!("w(1,2,1,0; z) = {}", boltzmann_weight(1, 2, 1, 0, z, mu, &p)?);

    let hexes = admissible_hexagons(2);
    println!("\nadmissible hexagons within +-2: {}", hexes.len());
    let mut worst = 0.0f64;
    for hex in &hexes {
        let (lhs, rhs) = star_triangle_sides(*hex, z, w, mu, &p)?;
        worst = worst.max((lhs - rhs).norm());
    }
    println!("star-triangle max |LHS - RHS| = {worst:.3e}");
    Ok(())
}
