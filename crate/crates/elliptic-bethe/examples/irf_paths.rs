//! Face (interaction-round-a-face) picture of the transfer matrix: cyclic
//! height paths label delta-supported states, Boltzmann weights fill the
//! plaquettes, and summing rows of faces reproduces the A/D blocks of the
//! difference operator at the support point of the output path.
//!
//! Run with `cargo run --example irf_paths`.

use elliptic_bethe::chain::FundamentalChain;
use elliptic_bethe::lattice::{irf_transfer_coeffs, irf_transfer_coeffs_args, PathState};
use elliptic_bethe::rmatrix::{boltzmann_weight, height_value};
use elliptic_bethe::{ModularParams, Result};
use nalgebra::DVector;
use num_complex::Complex64 as C64;

fn main() -> Result<()> {
    let p = ModularParams::new(C64::new(0.0, 0.9), C64::new(0.1, 0.0))?;
    let mu = C64::new(0.23, 0.17);

    // A four-site cyclic path: consecutive levels differ by one, including
    // around the wrap, so the path closes up.
    let state = PathState::new(vec![0, 1, 2, 1], mu)?;
    println!("path levels  = {:?}", state.levels());
    println!("basis index  = {:#06b}", state.basis_index());
    println!("support at   = {}", state.support(&p));

    // A single plaquette weight: heights around a face, two spectral
    // arguments worth of theta quotients.
    let w = boltzmann_weight(1, 0, 1, 2, C64::new(0.19, 0.11), mu, &p)?;
    println!("w(1,0;1,2)   = {w}");

    // Row of faces = transfer matrix: expand one input path into all
    // admissible outputs.
    let chain = FundamentalChain::new(
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.4, 0.0),
            C64::new(0.13, 0.05),
            C64::new(0.62, -0.04),
        ],
        p,
    )?;
    let z = C64::new(0.19, 0.11);
    let coeffs = irf_transfer_coeffs(&state, z, &chain)?;
    println!("\n{} admissible output paths:", coeffs.len());
    for (b, coeff) in &coeffs {
        println!("  {:?}  coeff {coeff}", b.levels());
    }

    // Group outputs by their leading height and compare against the A and D
    // blocks of the two-term difference operator, evaluated where the output
    // path is supported.
    let step = p.step();
    println!("\nface rows vs operator blocks:");
    for lead in [state.levels()[0] - 1, state.levels()[0] + 1] {
        let lambda = -step * height_value(mu, lead);
        let [blk_a, _, _, blk_d] = chain.abcd_blocks(z, lambda)?;
        let block = if lead < state.levels()[0] { blk_a } else { blk_d };
        let mut from_faces: DVector<C64> = DVector::zeros(chain.dim());
        for (b, coeff) in coeffs.iter().filter(|(b, _)| b.levels()[0] == lead) {
            from_faces[b.basis_index()] += *coeff;
        }
        let diff = from_faces - block.column(state.basis_index());
        let err = diff.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let which = if lead < state.levels()[0] { "A" } else { "D" };
        println!("  lead {lead:+} ({which} block)  residual = {err:.3e}");
    }

    // At zero spectral argument every face weight collapses and the transfer
    // matrix is the cyclic shift of the path.
    let coeffs0 = irf_transfer_coeffs_args(&state, &[C64::new(0.0, 0.0); 4], &p)?;
    println!("\nzero-argument expansion:");
    for (b, coeff) in &coeffs0 {
        if coeff.norm() > 1e-10 {
            println!("  {:?}  coeff {coeff}", b.levels());
        }
    }
    Ok(())
}
