//! The odd Jacobi theta function and its two companions with characteristics.
//!
//! The basic building block is
//!
//! ```text
//! theta(t) = -sum_{j in Z} exp(pi*i*(j+1/2)^2*tau + 2*pi*i*(j+1/2)*(t+1/2))
//! ```
//!
//! which is odd, entire, has simple zeros exactly on Z + tau*Z and satisfies
//!
//! ```text
//! theta(t+1)   = -theta(t)
//! theta(t+tau) = -exp(-pi*i*(tau+2t)) * theta(t)
//! ```
//!
//! Every evaluation first reduces the argument to the fundamental cell
//! centred at the origin and then restores the exact quasi-periodicity
//! multiplier, so the truncated series is only ever summed where it
//! converges fastest.  The companions are
//!
//! ```text
//! theta_1(t) = theta(t | 2*tau)         (same series, doubled modulus)
//! theta_0(t) = -i * exp(pi*i*(t+tau/2)) * theta_1(t+tau)
//! ```
//!
//! normalised so that `theta_a(t+1) = (-1)^a theta_a(t)` and
//! `theta_a(t+tau) = i*exp(-pi*i*(t+tau/2)) * theta_{1-a}(t)`.  Their
//! product satisfies `theta_0 * theta_1 = C(tau) * theta` with a constant
//! cached per parameter set.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Probe point used to fix the constant in `theta_0 * theta_1 = C * theta`.
const PRODUCT_PROBE: C64 = C64::new(0.23, 0.11);

/// Modular parameter, anisotropy and evaluation policy shared by the whole
/// crate.  Cheap to copy; construct once per (tau, eta) pair.
#[derive(Debug, Clone, Copy)]
pub struct ModularParams {
    tau: C64,
    eta: C64,
    series_tol: f64,
    pole_tol: f64,
    /// Series window for modulus tau: terms j in [-(w+1), w].
    window: i64,
    /// Series window for the doubled modulus 2*tau.
    window_doubled: i64,
    /// Cached constant C(tau) with theta_0 * theta_1 = C * theta.
    product_constant: C64,
}

/// Default absolute truncation target for the theta series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
/// Default guard radius for theta values appearing in denominators.
pub const DEFAULT_POLE_TOL: f64 = 1e-9;

impl ModularParams {
    /// Build a parameter set with the default tolerances.
    pub fn new(tau: C64, eta: C64) -> Result<Self> {
        Self::with_tolerances(tau, eta, DEFAULT_SERIES_TOL, DEFAULT_POLE_TOL)
    }

    /// Build a parameter set with explicit series and pole tolerances.
    pub fn with_tolerances(tau: C64, eta: C64, series_tol: f64, pole_tol: f64) -> Result<Self> {
        if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("Im(tau) must be positive and finite, got {tau}"),
            });
        }
        if !(eta.re.is_finite() && eta.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("eta must be finite, got {eta}"),
            });
        }
        if !(series_tol > 0.0 && series_tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "series_tol",
                reason: format!("must be a positive finite number, got {series_tol}"),
            });
        }
        if !(pole_tol > 0.0 && pole_tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pole_tol",
                reason: format!("must be a positive finite number, got {pole_tol}"),
            });
        }
        let mut p = Self {
            tau,
            eta,
            series_tol,
            pole_tol,
            window: truncation_window(tau.im, series_tol),
            window_doubled: truncation_window(2.0 * tau.im, series_tol),
            product_constant: C64::new(0.0, 0.0),
        };
        let num = p.theta_char(0, PRODUCT_PROBE)? * p.theta_char(1, PRODUCT_PROBE)?;
        p.product_constant = num / p.theta(PRODUCT_PROBE)?;
        Ok(p)
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    /// The elementary shift step `2*eta` of all difference operators.
    pub fn step(&self) -> C64 {
        2.0 * self.eta
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn pole_tol(&self) -> f64 {
        self.pole_tol
    }

    /// Constant `C(tau)` in the product identity `theta_0 theta_1 = C theta`.
    pub fn product_constant(&self) -> C64 {
        self.product_constant
    }

    /// theta(z), reduced to the fundamental cell before summation.
    pub fn theta(&self, z: C64) -> Result<C64> {
        self.theta_deriv(z, 0)
    }

    /// d^order/dz^order theta(z) for order in {0, 1, 2}.
    ///
    /// Derivatives of the quasi-periodicity relation are applied exactly, so
    /// accuracy does not degrade away from the fundamental cell.
    pub fn theta_deriv(&self, z: C64, order: u32) -> Result<C64> {
        if order > 2 {
            return Err(Error::UnsupportedOrder(order));
        }
        check_finite(z)?;
        let (z0, _m, n, mult) = reduce_with_multiplier(z, self.tau);
        let s0 = theta_series(z0, self.tau, self.window, 0);
        if order == 0 {
            return Ok(mult * s0);
        }
        let s1 = theta_series(z0, self.tau, self.window, 1);
        // Writing M(z0) for the multiplier, theta(z0+m+n*tau) = M(z0)*theta(z0)
        // with M'(z0) = -2*pi*i*n*M(z0); differentiate in z0.
        let two_pi_n = 2.0 * PI * n as f64;
        if order == 1 {
            return Ok(mult * (s1 - I * two_pi_n * s0));
        }
        let s2 = theta_series(z0, self.tau, self.window, 2);
        Ok(mult * (s2 - I * 2.0 * two_pi_n * s1 - two_pi_n * two_pi_n * s0))
    }

    /// theta_alpha(z) for alpha in {0, 1}.
    pub fn theta_char(&self, alpha: u32, z: C64) -> Result<C64> {
        check_finite(z)?;
        match alpha {
            1 => {
                let (z0, _m, _n, mult) = reduce_with_multiplier(z, 2.0 * self.tau);
                Ok(mult * theta_series(z0, 2.0 * self.tau, self.window_doubled, 0))
            }
            0 => {
                let phase = -I * (I * PI * (z + self.tau / 2.0)).exp();
                Ok(phase * self.theta_char(1, z + self.tau)?)
            }
            a => Err(Error::UnsupportedCharacteristic(a)),
        }
    }

    /// theta(z), with an error when the value is within `pole_tol` of zero.
    ///
    /// Use this for every theta that ends up in a denominator.
    pub fn theta_nonzero(&self, z: C64) -> Result<C64> {
        let v = self.theta(z)?;
        if v.norm() < self.pole_tol {
            return Err(Error::PoleProximity {
                arg: z,
                tol: self.pole_tol,
            });
        }
        Ok(v)
    }

    /// theta_alpha(z) guarded against denominator zeros, as `theta_nonzero`.
    pub fn theta_char_nonzero(&self, alpha: u32, z: C64) -> Result<C64> {
        let v = self.theta_char(alpha, z)?;
        if v.norm() < self.pole_tol {
            return Err(Error::PoleProximity {
                arg: z,
                tol: self.pole_tol,
            });
        }
        Ok(v)
    }

    /// Logarithmic derivative theta'(z)/theta(z) with pole guard.
    pub fn theta_log_deriv(&self, z: C64) -> Result<C64> {
        let v = self.theta_nonzero(z)?;
        Ok(self.theta_deriv(z, 1)? / v)
    }

    /// Reduce `z` modulo Z + tau*Z to the cell with Re, Im coefficients in
    /// [-1/2, 1/2); returns `(z0, m, n)` with `z = z0 + m + n*tau`.
    pub fn lattice_reduce(&self, z: C64) -> (C64, i64, i64) {
        lattice_reduce(z, self.tau)
    }

    /// Distance-like gauge: |theta(z)| is small iff z is near a lattice point.
    pub fn near_lattice(&self, z: C64, radius: f64) -> bool {
        let (z0, _, _) = self.lattice_reduce(z);
        z0.norm() < radius
    }
}

fn check_finite(z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteArgument(z))
    }
}

/// Smallest window w such that dropping all terms with |j+1/2| > w+1/2 keeps
/// the absolute truncation error below `tol` everywhere on the reduced cell.
///
/// On the cell |Im z| <= Im(tau)/2, a term with k = j+1/2 is bounded by
/// exp(-pi*Im(tau)*(k^2 - |k|)), so it suffices that u^2 - u > B at
/// u = w+1/2 where B = -ln(tol)/(pi*Im(tau)); two extra terms absorb the
/// tail sum.
fn truncation_window(im_tau: f64, tol: f64) -> i64 {
    let b = -(tol.ln()) / (PI * im_tau);
    let u = 0.5 * (1.0 + (1.0 + 4.0 * b).sqrt());
    (u - 0.5).ceil() as i64 + 2
}

/// Write z = z0 + m + n*tau with the coefficients of z0 in [-1/2, 1/2).
fn lattice_reduce(z: C64, tau: C64) -> (C64, i64, i64) {
    let b = z.im / tau.im;
    let a = z.re - b * tau.re;
    let m = (a + 0.5).floor() as i64;
    let n = (b + 0.5).floor() as i64;
    (z - m as f64 - n as f64 * tau, m, n)
}

/// Reduction plus the exact factor with theta(z) = mult * theta(z0).
fn reduce_with_multiplier(z: C64, tau: C64) -> (C64, i64, i64, C64) {
    let (z0, m, n) = lattice_reduce(z, tau);
    let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    let mult = sign * (-I * PI * (nf * nf * tau + 2.0 * nf * z0)).exp();
    (z0, m, n, mult)
}

/// Truncated defining series of theta (or its z-derivative) at modulus tau.
///
/// Terms are accumulated in +-k pairs from the outside in, so the exact
/// pairwise cancellation at lattice points survives truncation.
fn theta_series(z0: C64, tau: C64, window: i64, order: u32) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    for j in (0..=window).rev() {
        let k = j as f64 + 0.5;
        sum += series_term(z0, tau, k, order) + series_term(z0, tau, -k, order);
    }
    -sum
}

fn series_term(z0: C64, tau: C64, k: f64, order: u32) -> C64 {
    let exponent = I * PI * (k * k * tau) + I * 2.0 * PI * k * (z0 + 0.5);
    let base = exponent.exp();
    match order {
        0 => base,
        1 => I * 2.0 * PI * k * base,
        _ => -(2.0 * PI * k) * (2.0 * PI * k) * base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModularParams {
        ModularParams::new(C64::new(0.0, 0.9), C64::new(0.11, 0.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Brute-force reference sum with a much wider window, no reduction.
    fn theta_wide(z: C64, tau: C64, order: u32) -> C64 {
        theta_series(z, tau, 60, order)
    }

    #[test]
    fn matches_wide_direct_series_inside_and_outside_cell() {
        let p = params();
        let pts = [
            c(0.0, 0.0),
            c(0.31, 0.07),
            c(-0.48, 0.44),
            c(1.7, -0.9),
            c(-2.3, 2.05),
            c(3.1, -1.55),
        ];
        for &z in &pts {
            let fast = p.theta(z).unwrap();
            let slow = theta_wide(z, p.tau(), 0);
            assert!(
                (fast - slow).norm() < 1e-11 * (1.0 + slow.norm()),
                "mismatch at {z}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn oddness() {
        let p = params();
        for &z in &[c(0.2, 0.1), c(-0.37, 0.25), c(0.49, -0.44)] {
            let a = p.theta(z).unwrap();
            let b = p.theta(-z).unwrap();
            assert!((a + b).norm() < 1e-13, "theta not odd at {z}");
        }
    }

    #[test]
    fn quasi_periodicity_in_one() {
        let p = params();
        for &z in &[c(0.13, 0.2), c(-0.4, -0.31), c(2.6, 1.2)] {
            let lhs = p.theta(z + 1.0).unwrap();
            let rhs = -p.theta(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn quasi_periodicity_in_tau() {
        let p = params();
        let tau = p.tau();
        for &z in &[c(0.13, 0.2), c(-0.4, -0.31), c(1.1, -0.7)] {
            let lhs = p.theta(z + tau).unwrap();
            let rhs = -(-I * PI * (tau + 2.0 * z)).exp() * p.theta(z).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()),
                "tau-law fails at {z}"
            );
        }
    }

    #[test]
    fn zeros_exactly_on_lattice_and_nowhere_else() {
        let p = params();
        let tau = p.tau();
        for (m, n) in [(0i64, 0i64), (1, 0), (-2, 1), (3, -2)] {
            let z = c(m as f64, 0.0) + n as f64 * tau;
            // Quasi-periodicity amplifies roundoff by |exp(-pi*i*n^2*tau)|.
            let amp = 1.0 + (PI * n as f64 * n as f64 * tau.im).exp();
            assert!(
                p.theta(z).unwrap().norm() < 1e-15 * amp,
                "no zero at {m}+{n}tau"
            );
        }
        // Scan a grid over the cell, away from the corner zeros.
        for i in 0..12 {
            for j in 0..12 {
                let z = c(-0.5 + (i as f64 + 0.5) / 12.0, 0.0)
                    + ((j as f64 + 0.5) / 12.0 - 0.5) * tau;
                let (z0, _, _) = p.lattice_reduce(z);
                if z0.norm() < 0.1 {
                    continue;
                }
                assert!(
                    p.theta(z).unwrap().norm() > 1e-3,
                    "unexpected near-zero at {z}"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = params();
        let h = 1e-5;
        for &z in &[c(0.21, 0.13), c(-0.4, 0.3), c(1.3, -0.8)] {
            let d1 = p.theta_deriv(z, 1).unwrap();
            let fd1 = (p.theta(z + h).unwrap() - p.theta(z - h).unwrap()) / (2.0 * h);
            assert!(
                (d1 - fd1).norm() < 1e-7 * (1.0 + d1.norm()),
                "first derivative off at {z}: {d1} vs {fd1}"
            );
            let d2 = p.theta_deriv(z, 2).unwrap();
            let fd2 = (p.theta(z + h).unwrap() - 2.0 * p.theta(z).unwrap()
                + p.theta(z - h).unwrap())
                / (h * h);
            assert!(
                (d2 - fd2).norm() < 1e-4 * (1.0 + d2.norm()),
                "second derivative off at {z}: {d2} vs {fd2}"
            );
        }
    }

    #[test]
    fn derivative_reconstruction_far_from_cell() {
        // The multiplier correction must reproduce the wide direct series
        // derivative even several lattice steps out.
        let p = params();
        let z = c(2.3, -1.7);
        for order in 0..=2 {
            let fast = p.theta_deriv(z, order).unwrap();
            let slow = theta_wide(z, p.tau(), order);
            assert!(
                (fast - slow).norm() < 1e-9 * (1.0 + slow.norm()),
                "order {order} mismatch: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn characteristic_translation_laws() {
        let p = params();
        let tau = p.tau();
        for &z in &[c(0.2, 0.1), c(-0.33, 0.27), c(0.8, -0.4)] {
            for alpha in 0..2u32 {
                let plus_one = p.theta_char(alpha, z + 1.0).unwrap();
                let sign = if alpha == 0 { 1.0 } else { -1.0 };
                let expect = sign * p.theta_char(alpha, z).unwrap();
                assert!(
                    (plus_one - expect).norm() < 1e-12 * (1.0 + expect.norm()),
                    "z+1 law fails for alpha={alpha} at {z}"
                );
                let plus_tau = p.theta_char(alpha, z + tau).unwrap();
                let expect =
                    I * (-I * PI * (z + tau / 2.0)).exp() * p.theta_char(1 - alpha, z).unwrap();
                assert!(
                    (plus_tau - expect).norm() < 1e-12 * (1.0 + expect.norm()),
                    "z+tau law fails for alpha={alpha} at {z}"
                );
            }
        }
    }

    #[test]
    fn characteristic_parities() {
        // theta_1 inherits oddness from the doubled-modulus series; the
        // translation laws then force theta_0 to be even.
        let p = params();
        for &z in &[c(0.17, 0.05), c(-0.29, 0.31)] {
            let t1p = p.theta_char(1, z).unwrap();
            let t1m = p.theta_char(1, -z).unwrap();
            assert!((t1p + t1m).norm() < 1e-12 * (1.0 + t1p.norm()));
            let t0p = p.theta_char(0, z).unwrap();
            let t0m = p.theta_char(0, -z).unwrap();
            assert!((t0p - t0m).norm() < 1e-12 * (1.0 + t0p.norm()));
        }
    }

    #[test]
    fn product_identity_holds_across_cell() {
        let p = params();
        let c_tau = p.product_constant();
        assert!(c_tau.norm() > 1e-6);
        for i in 0..10 {
            for j in 0..10 {
                let z = c(-0.45 + 0.1 * i as f64, 0.0) + (-0.45 + 0.1 * j as f64) * p.tau();
                let lhs = p.theta_char(0, z).unwrap() * p.theta_char(1, z).unwrap();
                let rhs = c_tau * p.theta(z).unwrap();
                assert!(
                    (lhs - rhs).norm() < 1e-11 * (1.0 + rhs.norm()),
                    "product identity fails at {z}"
                );
            }
        }
    }

    #[test]
    fn theta1_is_theta_at_doubled_modulus() {
        let p = params();
        let doubled = ModularParams::new(2.0 * p.tau(), p.eta()).unwrap();
        for &z in &[c(0.2, 0.1), c(-0.37, 0.22), c(1.4, -0.6)] {
            let a = p.theta_char(1, z).unwrap();
            let b = doubled.theta(z).unwrap();
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn pole_guard_triggers_near_lattice() {
        let p = params();
        let near_zero = c(1e-12, 0.0);
        assert!(matches!(
            p.theta_nonzero(near_zero),
            Err(Error::PoleProximity { .. })
        ));
        assert!(p.theta_nonzero(c(0.3, 0.1)).is_ok());
    }

    #[test]
    fn rejects_bad_parameters_and_arguments() {
        assert!(ModularParams::new(c(0.5, 0.0), c(0.1, 0.0)).is_err());
        assert!(ModularParams::new(c(0.5, -0.9), c(0.1, 0.0)).is_err());
        let p = params();
        assert!(p.theta(c(f64::NAN, 0.0)).is_err());
        assert!(p.theta(c(0.0, f64::INFINITY)).is_err());
        assert!(matches!(
            p.theta_deriv(c(0.1, 0.1), 3),
            Err(Error::UnsupportedOrder(3))
        ));
        assert!(matches!(
            p.theta_char(2, c(0.1, 0.1)),
            Err(Error::UnsupportedCharacteristic(2))
        ));
    }

    #[test]
    fn lattice_reduce_half_open_cell() {
        let p = params();
        let tau = p.tau();
        let (z0, m, n) = p.lattice_reduce(c(0.5, 0.0));
        assert_eq!((m, n), (1, 0));
        assert!((z0 - c(-0.5, 0.0)).norm() < 1e-15);
        let (z0, m, n) = p.lattice_reduce(c(2.25, 0.0) + 3.0 * tau);
        assert_eq!((m, n), (2, 3));
        assert!((z0 - c(0.25, 0.0)).norm() < 1e-13);
        let (z0, m, n) = p.lattice_reduce(c(-0.2, 0.0) - 2.0 * tau + c(0.0, 0.1));
        assert_eq!(n, -2);
        let back = z0 + m as f64 + n as f64 * tau;
        assert!((back - (c(-0.2, 0.1) - 2.0 * tau)).norm() < 1e-13);
    }

    #[test]
    fn series_window_grows_as_im_tau_shrinks() {
        let narrow = truncation_window(0.3, 1e-14);
        let wide = truncation_window(5.0, 1e-14);
        assert!(narrow > wide);
        assert!(narrow >= 5 && narrow < 40);
        assert!(wide >= 1 && wide < 10);
    }
}
