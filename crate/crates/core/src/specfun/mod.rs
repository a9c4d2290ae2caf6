//! Scalar special functions: normalized associated Legendre functions,
//! the angular functions Δ and π, spherical Bessel/Hankel functions and
//! Gauss–Legendre rules.

mod angular;
mod bessel;
mod legendre;
mod quadrature;

pub use angular::{angular_functions, AngularFunctions};
pub use bessel::{spherical_bessel, spherical_bessel_with_derivatives, BesselKind};
pub use legendre::{legendre_table, legendre_table_with_cap, LegendreTable, DEFAULT_OVERFLOW_CAP, MAX_DEGREE};
pub use quadrature::{gauss_legendre, MAX_ORDER as MAX_QUADRATURE_ORDER};

use num_complex::Complex64;

/// Square root on the branch `Im ≤ 0` (so `√(−1) = −j`); when the root is
/// real the non-negative value is returned.
#[inline]
pub fn sqrt_im_nonpositive(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im > 0.0 {
        -r
    } else if r.im == 0.0 && r.re < 0.0 {
        Complex64::new(-r.re, 0.0)
    } else {
        r
    }
}
