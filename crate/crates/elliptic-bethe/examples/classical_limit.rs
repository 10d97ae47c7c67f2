//! As the shift parameter goes to zero the rescaled difference operator
//! `(L - 2)/(4 eta^2)` approaches a second-order differential operator of
//! Lame type.  The table below halves eta and watches the residual drop by
//! a factor of four: second-order convergence.
//!
//! Run with `cargo run --example classical_limit`.

use elliptic_bethe::qlame::classical_limit_residual;
use elliptic_bethe::{ModularParams, Result};
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let tau = C64::new(0.0, 0.9);
    let base = ModularParams::new(tau, C64::new(0.1, 0.0))?;
    let lambda = C64::new(0.17, 0.05);

    // Any smooth eta-independent test function does; this one mixes a theta
    // factor with an exponential so no term is accidentally annihilated.
    let psi = |lam: C64| {
        Ok(base.theta(lam + C64::new(0.31, 0.12))? * (C64::new(0.4, 0.1) * lam).exp())
    };

    for m in [1usize, 2, 3] {
        let etas = [0.08, 0.04, 0.02, 0.01];
        let residuals = classical_limit_residual(tau, &etas, m, lambda, &psi)?;
        println!("m = {m}");
        println!("    eta     residual     observed order");
        let mut prev: Option<f64> = None;
        for (eta, res) in etas.iter().zip(&residuals) {
            match prev {
                Some(pr) => println!("  {eta:5.2}   {res:10.3e}   {:.3}", (pr / res).log2()),
                None => println!("  {eta:5.2}   {res:10.3e}        -"),
            }
            prev = Some(*res);
        }
    }
    Ok(())
}
