//! Evaluate the odd Jacobi theta function and its characteristic variants,
//! and watch the structure that everything downstream depends on: the two
//! translation laws, the zero set, and the product identity tying the
//! doubled-modulus characteristics back to theta itself.
//!
//! Run with `cargo run --example theta_functions`.

use elliptic_bethe::{ModularParams, Result};
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let p = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.11, 0.0))?;
    let tau = p.tau();
    let z = C64::new(0.31, 0.14);

    println!("tau = {tau}, eta = {}", p.eta());
    println!("theta(z)       = {}", p.theta(z)?);
    println!("theta'(z)      = {}", p.theta_deriv(z, 1)?);
    println!("theta''(z)     = {}", p.theta_deriv(z, 2)?);

    // The function is odd and vanishes on the period lattice.
    println!("\ntheta(0)       = {:.3e}", p.theta(C64::new(0.0, 0.0))?.norm());
    println!("theta(1+tau)   = {:.3e}", p.theta(C64::new(1.0, 0.0) + tau)?.norm());
    println!(
        "odd residual   = {:.3e}",
        (p.theta(-z)? + p.theta(z)?).norm()
    );

    // Translation by 1 flips the sign; translation by tau multiplies by an
    // exponential factor.  Both hold to full precision.
    let t = p.theta(z)?;
    let by_one = (p.theta(z + 1.0)? + t).norm();
    let phase = (-C64::i() * std::f64::consts::PI * (tau + 2.0 * z)).exp();
    let by_tau = (p.theta(z + tau)? + phase * t).norm();
    println!("\nz+1 residual   = {by_one:.3e}");
    println!("z+tau residual = {by_tau:.3e}");

    // Characteristics at doubled modulus: theta_1 is odd, theta_0 even, and
    // their product is a constant multiple of theta.
    let t0 = p.theta_char(0, z)?;
    let t1 = p.theta_char(1, z)?;
    println!("\ntheta_0(z)     = {t0}");
    println!("theta_1(z)     = {t1}");
    println!(
        "product law    = {:.3e}",
        (t0 * t1 - p.product_constant() * t)
            .norm()
    );

    // Far from the real axis the series needs more terms; the evaluator
    // reduces to the fundamental cell first, so accuracy is uniform.
    let far = z + 7.0 * tau - 4.0;
    let (reduced, m, n) = p.lattice_reduce(far);
    println!("\nlattice_reduce({far}) = {reduced} + ({m})*1 + ({n})*tau");
    let direct = p.theta(far)?;
    println!("theta(far)     = {direct}");
    Ok(())
}
