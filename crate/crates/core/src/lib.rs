//! Spectral solver and verification toolkit for the linearized flow around
//! the rotating field `beta * x^perp / |x|^2` in the exterior unit disk.
//!
//! The solver works one Fourier mode at a time in polar coordinates. For a
//! resolvent parameter `lambda` off the negative real axis it evaluates the
//! explicit per-mode solution of
//!
//! ```text
//! lambda w - Delta w + beta U^perp rot w + grad p = f,   div w = 0,   w|_{r=1} = b,
//! ```
//!
//! built from complex-order modified Bessel functions, and exposes on top of
//! it a zero-free-region scanner for the boundary kernel integral, a Dunford
//! contour evaluator for the semigroup `e^{-tA}`, and a harness that
//! spot-checks the inequality inventory the continuous theory relies on.

pub mod biot_savart;
pub mod bounds;
pub mod error;
pub mod force;
pub mod grid;
pub mod polar;
pub mod quad;
pub mod resolvent;
pub mod scan;
pub mod semigroup;
pub mod special;

pub use error::{Error, Result};
pub use force::{ForceMode, SmoothFn};
pub use grid::{RadialGrid, RadialProfile};
pub use polar::ModeField;
pub use resolvent::{ModeSolution, ResolventQuery};

/// Complex scalar used throughout: double precision, principal branches.
pub type Cx = num_complex::Complex64;
