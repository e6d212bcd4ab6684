//! Complex-order modified Bessel functions, the complex Gamma function, and
//! the Bessel order mu_n(beta) = (n^2 + i n beta)^{1/2} the solver is built on.

mod bessel;
mod gamma;
mod order;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled, wronskian_residual, BesselMethod,
    BesselValue,
};
pub use gamma::{gamma_c, gamma_recip};
pub use order::{order_of, Order};
