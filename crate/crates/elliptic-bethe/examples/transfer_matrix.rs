//! From local R-matrices to a spin chain: the L-operator of a two-site
//! fundamental chain, its operator-valued blocks a, b, c, d acting as
//! difference operators in the dynamical parameter, and the commuting
//! transfer family a(z) + d(z).
//!
//! Run with `cargo run --example transfer_matrix`.

use elliptic_bethe::chain::FundamentalChain;
use elliptic_bethe::{ModularParams, Result};
use nalgebra::DVector;
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let p = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.11, 0.0))?;
    let chain = FundamentalChain::new(vec![C64::new(0.0, 0.0), C64::new(0.4, 0.0)], p)?;
    println!(
        "chain: n = {}, dim W = {}, zero-weight indices {:?}",
        chain.n(),
        chain.dim(),
        chain.zero_weight()
    );

    let z = C64::new(0.33, 0.08);
    let lambda = C64::new(0.26, -0.04);
    let l = chain.l_operator(z, lambda)?;
    println!("L(z, lambda) is {}x{}", l.nrows(), l.ncols());

    // The auxiliary-space blocks: a and d preserve the chain weight, b
    // lowers it by 2, c raises it by 2.
    let [a, b, c, d] = chain.abcd_blocks(z, lambda)?;
    println!("|a| = {:.4}, |d| = {:.4}", a.norm(), d.norm());
    println!("|b| = {:.4}, |c| = {:.4}", b.norm(), c.norm());

    // Highest weight vector e[1] x e[1]: c kills it, a fixes it, d scales
    // it by a closed-form product over the sites.
    let mut v0: DVector<C64> = DVector::zeros(chain.dim());
    v0[0] = C64::new(1.0, 0.0);
    let cv = (&c * &v0).norm();
    let av = (&a * &v0)[0];
    let dv = (&d * &v0)[0];
    println!("\n|c v0| = {cv:.3e}");
    println!("a v0 = {av} * v0");
    println!("d v0 = {dv} * v0");
    println!("closed form   {}", chain.highest_weight_d(z, lambda)?);

    // As difference operators the transfer matrices commute; compare the
    // composed shift coefficients both ways on the zero-weight block.
    let w = C64::new(0.11, -0.06);
    let zw = chain.transfer_op(z).compose(&chain.transfer_op(w))?;
    let wz = chain.transfer_op(w).compose(&chain.transfer_op(z))?;
    let idx = chain.zero_weight();
    let mut worst = 0.0f64;
    for shift in [-2i64, 0, 2] {
        let ca = zw.coefficient(shift, lambda)?;
        let cb = wz.coefficient(shift, lambda)?;
        for &r in &idx {
            for &s in &idx {
                worst = worst.max((ca[(r, s)] - cb[(r, s)]).norm());
            }
        }
    }
    println!("\n[T(z), T(w)] restricted to weight zero: {worst:.3e}");
    Ok(())
}
