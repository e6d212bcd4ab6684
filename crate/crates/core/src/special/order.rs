//! The Bessel order attached to a Fourier mode of the rotating-flow operator.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Order mu_n(beta) = (n^2 + i n beta)^{1/2} with Re(mu) > 0, plus the shift
/// zeta = mu - 1 that controls the small-beta asymptotics.
#[derive(Debug, Clone, Copy)]
pub struct Order {
    pub beta: f64,
    pub n: i32,
    pub mu: Complex64,
    pub zeta: Complex64,
}

/// Builds the order for mode n in {-1, +1}. beta = 0 is the Stokes limit and
/// degenerates to the integer order mu = 1.
pub fn order_of(beta: f64, n: i32) -> Result<Order> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    if n != 1 && n != -1 {
        return Err(Error::InvalidParameter(format!("|n| must be 1, got {n}")));
    }
    let mu = Complex64::new((n * n) as f64, n as f64 * beta).sqrt();
    debug_assert!(mu.re > 0.0);
    Ok(Order {
        beta,
        n,
        mu,
        zeta: mu - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_is_integer_order() {
        let o = order_of(0.0, 1).unwrap();
        assert_eq!(o.mu, Complex64::new(1.0, 0.0));
        assert_eq!(o.zeta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn square_matches_definition() {
        for &(beta, n) in &[(0.1, 1), (0.05, -1), (0.3, 1), (1e-3, -1)] {
            let o = order_of(beta, n).unwrap();
            let target = Complex64::new(1.0, n as f64 * beta);
            assert!((o.mu * o.mu - target).norm() <= 1e-14 * target.norm());
            assert!(o.mu.re > 0.0);
            assert!((o.zeta - (o.mu - 1.0)).norm() == 0.0);
        }
    }

    #[test]
    fn agrees_with_direct_principal_sqrt() {
        let o = order_of(0.1, 1).unwrap();
        let direct = Complex64::new(1.0, 0.1).sqrt();
        assert!((o.mu - direct).norm() < 1e-14);
    }

    #[test]
    fn small_beta_expansion_window() {
        // Re(mu) = 1 + beta^2/8 + O(beta^4), Im(mu) = n beta/2 + O(beta^3)
        for &beta in &[0.01, 0.05, 0.1, 0.2, 0.3] {
            for &n in &[1, -1] {
                let o = order_of(beta, n).unwrap();
                assert!(
                    (o.mu.re - 1.0 - beta * beta / 8.0).abs() <= beta.powi(4),
                    "beta={beta} n={n}"
                );
                assert!(
                    (o.mu.im - n as f64 * beta / 2.0).abs() <= beta.powi(3),
                    "beta={beta} n={n}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(order_of(1.0, 1).is_err());
        assert!(order_of(-0.1, 1).is_err());
        assert!(order_of(0.1, 2).is_err());
        assert!(order_of(0.1, 0).is_err());
    }

    #[test]
    fn example_beta_01() {
        let o = order_of(0.1, 1).unwrap();
        assert!((o.mu.re - 1.00125).abs() < 1e-4);
    }
}
