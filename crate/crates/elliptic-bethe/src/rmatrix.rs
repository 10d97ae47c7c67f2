//! The dynamical R-matrix on C^2 x C^2, its coefficient functions, the
//! dynamical Yang-Baxter equation, and the face (Boltzmann) weights it
//! induces together with the star-triangle relation.
//!
//! In the basis e[1]xe[1], e[1]xe[-1], e[-1]xe[1], e[-1]xe[-1] the matrix is
//!
//! ```text
//!            | 1                                  |
//! R(z,l) =   |    alpha(z,l)   beta(z,l)          |
//!            |    beta(z,-l)   alpha(z,-l)        |
//!            |                                  1 |
//! ```
//!
//! with alpha(z,l) = theta(l+2eta)theta(z) / (theta(l)theta(z-2eta)) and
//! beta(z,l) = -theta(l+z)theta(2eta) / (theta(l)theta(z-2eta)).  All
//! denominators go through the pole guard of [`crate::theta`].

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{embed_shifted, max_abs_diff, DynamicalMatrix};
use crate::theta::ModularParams;

/// Coefficients (alpha, beta) of the dynamical R-matrix.
pub fn rmatrix_coeffs(z: C64, lambda: C64, p: &ModularParams) -> Result<(C64, C64)> {
    let step = p.step();
    let den = p.theta_nonzero(lambda)? * p.theta_nonzero(z - step)?;
    let alpha = p.theta(lambda + step)? * p.theta(z)? / den;
    let beta = -p.theta(lambda + z)? * p.theta(step)? / den;
    Ok((alpha, beta))
}

/// Exchange coefficients (r, s) of the a-b and d-b commutation relations:
/// r(t,l) = theta(t-2eta)theta(l) / (theta(t)theta(l-2eta)),
/// s(t,l) = theta(t+l)theta(2eta) / (theta(t)theta(l-2eta)).
pub fn rs_coeffs(t: C64, lambda: C64, p: &ModularParams) -> Result<(C64, C64)> {
    let step = p.step();
    let den = p.theta_nonzero(t)? * p.theta_nonzero(lambda - step)?;
    let r = p.theta(t - step)? * p.theta(lambda)? / den;
    let s = p.theta(t + lambda)? * p.theta(step)? / den;
    Ok((r, s))
}

/// The 4x4 dynamical R-matrix; weight conservation is structural (only the
/// six allowed entries are populated).
pub fn rmatrix_eval(z: C64, lambda: C64, p: &ModularParams) -> Result<DMatrix<C64>> {
    let (a_plus, b_plus) = rmatrix_coeffs(z, lambda, p)?;
    let (a_minus, b_minus) = rmatrix_coeffs(z, -lambda, p)?;
    let mut r = DMatrix::zeros(4, 4);
    let one = C64::new(1.0, 0.0);
    r[(0, 0)] = one;
    r[(3, 3)] = one;
    r[(1, 1)] = a_plus;
    r[(1, 2)] = b_plus;
    r[(2, 1)] = b_minus;
    r[(2, 2)] = a_minus;
    Ok(r)
}

/// As [`rmatrix_eval`], wrapped with its weight grading.
pub fn rmatrix_dynamical(z: C64, lambda: C64, p: &ModularParams) -> Result<DynamicalMatrix> {
    DynamicalMatrix::new(rmatrix_eval(z, lambda, p)?)
}

/// Max-norm residual of the dynamical Yang-Baxter equation on V x V x V:
///
/// ```text
/// R12(z-w, l-2eta h3) R13(z, l) R23(w, l-2eta h1)
///   = R23(w, l) R13(z, l-2eta h2) R12(z-w, l)
/// ```
///
/// The operator-valued argument is resolved block-diagonally over the
/// spectator weight.
pub fn dybe_residual(z: C64, w: C64, lambda: C64, p: &ModularParams) -> Result<f64> {
    let step = p.step();
    let emb = |sites: [usize; 2], shift: &[usize], zz: C64| {
        embed_shifted(3, &sites, shift, lambda, step, |lam| rmatrix_eval(zz, lam, p))
    };
    let lhs = emb([0, 1], &[2], z - w)? * emb([0, 2], &[], z)? * emb([1, 2], &[0], w)?;
    let rhs = emb([1, 2], &[], w)? * emb([0, 2], &[1], z)? * emb([0, 1], &[], z - w)?;
    Ok(max_abs_diff(&lhs, &rhs))
}

/// Complex value of the height with integer level `level` over offset `mu`.
#[inline]
pub fn height_value(mu: C64, level: i64) -> C64 {
    mu + level as f64
}

fn require_adjacent(x: i64, y: i64) -> Result<()> {
    if (x - y).abs() == 1 {
        Ok(())
    } else {
        Err(Error::HeightsNotAdjacent(x, y))
    }
}

/// Face weight w(a,b,c,d;z): the coefficient of e[b-a] x e[a-d] in
/// R(z, -2eta*d)(e[c-d] x e[b-c]).  Heights are integer levels over a common
/// complex offset `mu`, so adjacency is exact.
pub fn boltzmann_weight(
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    z: C64,
    mu: C64,
    p: &ModularParams,
) -> Result<C64> {
    require_adjacent(a, b)?;
    require_adjacent(b, c)?;
    require_adjacent(c, d)?;
    require_adjacent(a, d)?;
    let r = rmatrix_eval(z, -p.step() * height_value(mu, d), p)?;
    let bit = |diff: i64| if diff == 1 { 0usize } else { 1usize };
    let col = (bit(c - d) << 1) | bit(b - c);
    let row = (bit(b - a) << 1) | bit(a - d);
    Ok(r[(row, col)])
}

/// Both sides of the star-triangle relation around the height hexagon
/// (a,b,c,d,e,f); the sums run over the one or two admissible internal
/// heights g on each side.
///
/// ```text
/// sum_g w(a,b,g,f;z-w) w(f,g,d,e;z) w(g,b,c,d;w)
///   = sum_g w(f,a,g,e;w) w(a,b,c,g;z) w(g,c,d,e;z-w)
/// ```
pub fn star_triangle_sides(
    hex: [i64; 6],
    z: C64,
    w: C64,
    mu: C64,
    p: &ModularParams,
) -> Result<(C64, C64)> {
    let [a, b, c, d, e, f] = hex;
    for (x, y) in [(a, b), (b, c), (c, d), (d, e), (e, f), (f, a)] {
        require_adjacent(x, y)?;
    }
    let candidates = |u: i64, v: i64, x: i64| -> Vec<i64> {
        [u - 1, u + 1]
            .into_iter()
            .filter(|g| (g - v).abs() == 1 && (g - x).abs() == 1)
            .collect()
    };
    let mut lhs = C64::new(0.0, 0.0);
    for g in candidates(b, d, f) {
        lhs += boltzmann_weight(a, b, g, f, z - w, mu, p)?
            * boltzmann_weight(f, g, d, e, z, mu, p)?
            * boltzmann_weight(g, b, c, d, w, mu, p)?;
    }
    let mut rhs = C64::new(0.0, 0.0);
    for g in candidates(a, c, e) {
        rhs += boltzmann_weight(f, a, g, e, w, mu, p)?
            * boltzmann_weight(a, b, c, g, z, mu, p)?
            * boltzmann_weight(g, c, d, e, z - w, mu, p)?;
    }
    Ok((lhs, rhs))
}

/// |LHS - RHS| of the star-triangle relation.
pub fn star_triangle_residual(
    hex: [i64; 6],
    z: C64,
    w: C64,
    mu: C64,
    p: &ModularParams,
) -> Result<f64> {
    let (lhs, rhs) = star_triangle_sides(hex, z, w, mu, p)?;
    Ok((lhs - rhs).norm())
}

/// All height hexagons (a..f) with cyclic +-1 steps and every level within
/// `radius` of 0; used by the exhaustive star-triangle suites.
pub fn admissible_hexagons(radius: i64) -> Vec<[i64; 6]> {
    let mut out = Vec::new();
    for a in -radius..=radius {
        for signs in 0..32u32 {
            let mut hex = [a, 0, 0, 0, 0, 0];
            let mut level = a;
            let mut sum = 0i64;
            for k in 0..5 {
                let s = if signs >> k & 1 == 1 { 1 } else { -1 };
                sum += s;
                level += s;
                hex[k + 1] = level;
            }
            // Cyclic closure: the implied sixth step must also be +-1.
            if sum.abs() != 1 {
                continue;
            }
            if hex.iter().all(|h| h.abs() <= radius) {
                out.push(hex);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::total_weight;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params() -> ModularParams {
        ModularParams::new(c(0.0, 0.9), c(0.11, 0.0)).unwrap()
    }

    fn draw(rng: &mut ChaCha8Rng, p: &ModularParams) -> C64 {
        loop {
            let z = c(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5) * p.tau().im,
            );
            if !p.near_lattice(z, 0.08) {
                return z;
            }
        }
    }

    #[test]
    fn coefficients_match_theta_composition() {
        let p = params();
        let (z, lambda) = (c(0.37, 0.05), c(0.21, 0.0));
        let (alpha, beta) = rmatrix_coeffs(z, lambda, &p).unwrap();
        let th = |x: C64| p.theta(x).unwrap();
        let s = p.step();
        let expect_a = th(lambda + s) * th(z) / (th(lambda) * th(z - s));
        let expect_b = -th(lambda + z) * th(s) / (th(lambda) * th(z - s));
        assert!((alpha - expect_a).norm() < 1e-13 * expect_a.norm());
        assert!((beta - expect_b).norm() < 1e-13 * expect_b.norm());
    }

    #[test]
    fn coefficients_at_zero_spectral_parameter() {
        let p = params();
        let lambda = c(0.23, 0.11);
        let (alpha, beta) = rmatrix_coeffs(c(0.0, 0.0), lambda, &p).unwrap();
        assert!(alpha.norm() < 1e-12);
        assert!((beta - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rs_coeffs_zeros_and_composition() {
        let p = params();
        let s = p.step();
        let lambda = c(0.3, 0.0);
        let (r, _) = rs_coeffs(s, lambda, &p).unwrap();
        assert!(r.norm() < 1e-12, "r(2eta, l) should vanish");
        let (_, sv) = rs_coeffs(-lambda + c(0.0, 0.0), lambda, &p).unwrap();
        assert!(sv.norm() < 1e-12, "s(-l, l) should vanish");
        let t = c(0.4, 0.0);
        let (r, sv) = rs_coeffs(t, lambda, &p).unwrap();
        let th = |x: C64| p.theta(x).unwrap();
        assert!((r - th(t - s) * th(lambda) / (th(t) * th(lambda - s))).norm() < 1e-13 * r.norm());
        assert!(
            (sv - th(t + lambda) * th(s) / (th(t) * th(lambda - s))).norm() < 1e-13 * sv.norm()
        );
    }

    #[test]
    fn r_at_zero_is_the_flip() {
        let p = params();
        let r = rmatrix_eval(c(0.0, 0.0), c(0.19, 0.07), &p).unwrap();
        let mut flip = DMatrix::zeros(4, 4);
        flip[(0, 0)] = c(1.0, 0.0);
        flip[(1, 2)] = c(1.0, 0.0);
        flip[(2, 1)] = c(1.0, 0.0);
        flip[(3, 3)] = c(1.0, 0.0);
        assert!(max_abs_diff(&r, &flip) < 1e-12);
    }

    #[test]
    fn weight_conservation_is_structural() {
        let p = params();
        let r = rmatrix_dynamical(c(0.3, 0.1), c(0.22, -0.05), &p).unwrap();
        assert_eq!(r.weight_defect(), 0.0);
        // Corner entries exactly 1, weight-zero block 2x2.
        assert_eq!(r.entries()[(0, 0)], c(1.0, 0.0));
        assert_eq!(r.entries()[(3, 3)], c(1.0, 0.0));
        assert_eq!(r.weight_block(0).shape(), (2, 2));
        assert_eq!(total_weight(1, 2), 0);
    }

    #[test]
    fn pole_guard_on_denominators() {
        let p = params();
        // theta(lambda) ~ 0
        assert!(matches!(
            rmatrix_coeffs(c(0.3, 0.0), c(1e-12, 0.0), &p),
            Err(Error::PoleProximity { .. })
        ));
        // theta(z - 2eta) ~ 0
        let z = p.step() + c(1e-12, 0.0);
        assert!(matches!(
            rmatrix_coeffs(z, c(0.25, 0.0), &p),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn dybe_residual_small_on_seeded_draws() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 20 {
            let (z, w, lambda) = (draw(&mut rng, &p), draw(&mut rng, &p), draw(&mut rng, &p));
            match dybe_residual(z, w, lambda, &p) {
                Ok(res) => {
                    assert!(res < 1e-10, "DYBE residual {res} at ({z}, {w}, {lambda})");
                    done += 1;
                }
                Err(Error::PoleProximity { .. }) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn dybe_specializations() {
        let p = params();
        let (z, lambda) = (c(0.31, 0.0), c(0.23, 0.0));
        let res = dybe_residual(z, c(0.17, 0.2), lambda, &p).unwrap();
        assert!(res < 1e-10);
        // z = w: R12(0) = P, identity still holds.
        let res = dybe_residual(z, z, lambda, &p).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn dybe_discriminates_wrong_shift_sign() {
        // Flipping the dynamical-shift sign must break the equation loudly.
        let p = params();
        let (z, w, lambda) = (c(0.31, 0.0), c(0.17, 0.2), c(0.23, 0.0));
        let step = -p.step(); // wrong sign
        let emb = |sites: [usize; 2], shift: &[usize], zz: C64| {
            embed_shifted(3, &sites, shift, lambda, step, |lam| {
                rmatrix_eval(zz, lam, &p)
            })
            .unwrap()
        };
        let lhs = emb([0, 1], &[2], z - w) * emb([0, 2], &[], z) * emb([1, 2], &[0], w);
        let rhs = emb([1, 2], &[], w) * emb([0, 2], &[1], z) * emb([0, 1], &[], z - w);
        assert!(max_abs_diff(&lhs, &rhs) > 1e-2);
    }

    #[test]
    fn boltzmann_weight_at_zero_is_permutation() {
        let p = params();
        let mu = c(0.05, 0.02);
        // R(0) = P sends e[c-d] x e[b-c] to e[b-c] x e[c-d]: coefficient 1
        // for a = c, 0 for the alternative a = b + d - c when distinct.
        for (b, cc, d) in [(2i64, 1i64, 0i64), (0, 1, 0), (1, 2, 1), (-1, 0, 1)] {
            let w_keep = boltzmann_weight(cc, b, cc, d, c(0.0, 0.0), mu, &p).unwrap();
            assert!(
                (w_keep - c(1.0, 0.0)).norm() < 1e-12,
                "w({cc},{b},{cc},{d};0) != 1"
            );
            let alt = b + d - cc;
            if alt != cc && (alt - b).abs() == 1 && (alt - d).abs() == 1 {
                let w_alt = boltzmann_weight(alt, b, cc, d, c(0.0, 0.0), mu, &p).unwrap();
                assert!(w_alt.norm() < 1e-12, "w({alt},{b},{cc},{d};0) != 0");
            }
        }
    }

    #[test]
    fn boltzmann_weight_matches_rmatrix_entry() {
        let p = params();
        let mu = c(0.07, 0.0);
        let z = c(0.3, 0.1);
        // c - d = +1, b - c = -1: input vector e[1] x e[-1], column 1 of
        // R(z, -2eta*d); the two admissible outputs read off the middle block.
        let (d, cc, b) = (1i64, 2i64, 1i64);
        let r = rmatrix_eval(z, -p.step() * height_value(mu, d), &p).unwrap();
        // a = d+1 = 2: (b-a, a-d) = (-1, +1) -> row 2 -> beta entry.
        let w_up = boltzmann_weight(d + 1, b, cc, d, z, mu, &p).unwrap();
        assert!((w_up - r[(2, 1)]).norm() < 1e-14);
        // a = d-1 = 0: (b-a, a-d) = (+1, -1) -> row 1 -> alpha entry.
        let w_dn = boltzmann_weight(d - 1, b, cc, d, z, mu, &p).unwrap();
        assert!((w_dn - r[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn boltzmann_rejects_bad_adjacency() {
        let p = params();
        assert!(matches!(
            boltzmann_weight(0, 2, 1, 0, c(0.3, 0.0), c(0.05, 0.0), &p),
            Err(Error::HeightsNotAdjacent(0, 2))
        ));
    }

    #[test]
    fn star_triangle_residual_small() {
        let p = params();
        let mu = c(0.05, 0.0);
        let hex = [2, 1, 2, 3, 2, 1];
        let res = star_triangle_residual(hex, c(0.3, 0.0), c(0.17, 0.0), mu, &p).unwrap();
        assert!(res < 1e-10, "star-triangle residual {res}");
        // z = w specialization.
        let res = star_triangle_residual(hex, c(0.3, 0.0), c(0.3, 0.0), mu, &p).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn star_triangle_exhaustive_small_heights() {
        let p = params();
        let mu = c(0.11, 0.03);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hexes = admissible_hexagons(2);
        assert!(!hexes.is_empty());
        for _ in 0..3 {
            let z = draw(&mut rng, &p);
            let w = draw(&mut rng, &p);
            for hex in &hexes {
                match star_triangle_residual(*hex, z, w, mu, &p) {
                    Ok(res) => assert!(res < 1e-10, "residual {res} for {hex:?}"),
                    Err(Error::PoleProximity { .. }) => continue,
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn hexagon_enumeration_is_cyclic_and_bounded() {
        for hex in admissible_hexagons(2) {
            for k in 0..6 {
                let step = hex[(k + 1) % 6] - hex[k];
                assert_eq!(step.abs(), 1, "bad step in {hex:?}");
            }
            assert!(hex.iter().all(|h| h.abs() <= 2));
        }
    }
}
