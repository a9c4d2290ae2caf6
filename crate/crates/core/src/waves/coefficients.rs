//! Spherical→planar transform coefficients `B_ni(u)·A_ni(β)` and the
//! analytic azimuthal integral.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::index::{Parity, Polarization, SvwfIndex};
use crate::specfun::AngularFunctions;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// `j^l`, or `(−j)^l` for the daggered variant.
#[inline]
fn j_power(l: usize, dagger: bool) -> Complex64 {
    let base = match l % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => J,
        2 => Complex64::new(-1.0, 0.0),
        _ => -J,
    };
    if dagger {
        base.conj()
    } else {
        base
    }
}

/// `B_ni(u) = j^l [δ_τi · j Δ_l^m(u) + δ_τī · π_l^m(u)]`.
///
/// `dagger = true` gives `B†_ni`, i.e. every explicit `j` replaced by `−j`.
/// The sign of the `π` term is the one for which the plane-wave integral of
/// `B·A·φ` reproduces a closed-form spherical vector wave (see
/// `docs/conventions.md`).
pub fn b_coefficient(n: &SvwfIndex, i: Polarization, table: &AngularFunctions, dagger: bool) -> Complex64 {
    let jl = j_power(n.l, dagger);
    if n.tau == i {
        let jj = if dagger { -J } else { J };
        jl * jj * table.delta(n.l, n.m)
    } else {
        jl * table.pi(n.l, n.m)
    }
}

/// `A_ni(β)`: `cos/sin(mβ)` when `τ = i`, `−sin/cos(mβ)` otherwise
/// (upper form for even parity).
pub fn azimuthal_factor(n: &SvwfIndex, i: Polarization, beta: f64) -> f64 {
    let (s, c) = (n.m as f64 * beta).sin_cos();
    match (n.tau == i, n.parity) {
        (true, Parity::Even) => c,
        (true, Parity::Odd) => s,
        (false, Parity::Even) => -s,
        (false, Parity::Odd) => c,
    }
}

/// `1/√(π(1+δ_m0))`, which makes `N_m·P̃_l^m(cos α)·{cos, sin}(mβ)` unit-norm
/// on the sphere.
pub fn azimuthal_norm(m: usize) -> f64 {
    if m == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

/// `∫₀^{2π} A_ni(β) A_n'i(β) dβ = δ_mm' · I^i_{τσ,τ'σ'}`.
pub fn azimuthal_integral(n: &SvwfIndex, n2: &SvwfIndex, i: Polarization) -> f64 {
    if n.m != n2.m {
        return 0.0;
    }
    let delta_m0 = if n.m == 0 { 1.0 } else { 0.0 };
    let sign = if (i.code() + n.tau.code() + n.parity.code()).is_multiple_of(2) { 1.0 } else { -1.0 };
    if n.tau == n2.tau && n.parity == n2.parity {
        PI * (1.0 + sign * delta_m0)
    } else if n.tau != n2.tau && n.parity != n2.parity {
        PI * (sign + delta_m0)
    } else {
        0.0
    }
}

/// `(−1)^{a'}` with `a' = l' + m' + τ' + i + 1`: the parity picked up by
/// `B†_n'i` under `u → −u`.
pub fn mirror_sign(n2: &SvwfIndex, i: Polarization) -> f64 {
    let a = n2.l + n2.m + n2.tau.code() as usize + i.code() as usize + 1;
    if a.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
