//! Fast evaluation of antenna port S-parameters above planar stratified
//! media.
//!
//! The antenna enters through its free-space generalized scattering matrix
//! (blocks Γ, R, T, S over spherical vector waves). The layered medium
//! enters only through the interaction matrix 𝒲, a single contour integral
//! per matrix entry, so changing the ground costs one 𝒲 assembly plus one
//! dense solve.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fit;
pub mod fresnel;
pub mod gsmio;
pub mod interaction;
pub mod oracle;
pub mod output;
pub mod specfun;
pub mod sweep;
pub mod units;
pub mod validate;
pub mod waves;
pub mod wmatrix;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Free-space permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Free-space permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
