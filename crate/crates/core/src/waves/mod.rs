//! Spherical and planar vector wave functions and the transform
//! coefficients linking them.

mod coefficients;
mod fields;
mod index;

pub use coefficients::{azimuthal_factor, azimuthal_integral, azimuthal_norm, b_coefficient, mirror_sign};
pub use fields::{eval_pvwf, eval_svwf, eval_svwf_basis, ContourSegment, PlaneWaveDirection, Vec3, WaveKind};
pub use index::{basis_size, Parity, Polarization, SvwfBasis, SvwfIndex};
