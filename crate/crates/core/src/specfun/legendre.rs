//! Normalized associated Legendre functions for real and complex argument.
//!
//! `P̃_l^m` is normalized so that `∫₋₁¹ (P̃_l^m)² du = 1` and carries the
//! Condon–Shortley phase. The table also stores the quotient
//! `P̃_l^m / √(1−u²)` (for `m ≥ 1`), which stays finite at `u = ±1` and is what
//! the angular functions are built from.

use num_complex::Complex64;

use super::sqrt_im_nonpositive;
use crate::error::{Error, Result};

pub const DEFAULT_OVERFLOW_CAP: f64 = 1e280;
pub const MAX_DEGREE: usize = 64;

#[inline]
pub(crate) fn packed(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

#[derive(Debug, Clone)]
pub struct LegendreTable {
    l_max: usize,
    u: Complex64,
    sin_alpha: Complex64,
    values: Vec<Complex64>,
    derivatives: Vec<Complex64>,
    over_sin: Vec<Complex64>,
}

impl LegendreTable {
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn argument(&self) -> Complex64 {
        self.u
    }

    /// `√(1−u²)` on the `Im ≤ 0` branch.
    pub fn sin_alpha(&self) -> Complex64 {
        self.sin_alpha
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, l: usize, m: usize) -> Complex64 {
        debug_assert!(m <= l && l <= self.l_max);
        self.values[packed(l, m)]
    }

    /// `dP̃_l^m/du`. At `u = ±1` the `m = 1` derivative diverges and is
    /// reported as an infinite real part.
    pub fn derivative(&self, l: usize, m: usize) -> Complex64 {
        debug_assert!(m <= l && l <= self.l_max);
        self.derivatives[packed(l, m)]
    }

    /// `P̃_l^m(u) / √(1−u²)` for `m ≥ 1`; zero for `m = 0`.
    pub fn over_sin(&self, l: usize, m: usize) -> Complex64 {
        debug_assert!(m <= l && l <= self.l_max);
        self.over_sin[packed(l, m)]
    }
}

pub fn legendre_table(u: Complex64, l_max: usize) -> Result<LegendreTable> {
    legendre_table_with_cap(u, l_max, DEFAULT_OVERFLOW_CAP)
}

pub fn legendre_table_with_cap(u: Complex64, l_max: usize, cap: f64) -> Result<LegendreTable> {
    if !(1..=MAX_DEGREE).contains(&l_max) {
        return Err(Error::Domain(format!("Legendre degree cap must lie in 1..={MAX_DEGREE}, got {l_max}")));
    }
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite Legendre argument {u}")));
    }
    if u.im == 0.0 && u.re.abs() > 1.0 {
        return Err(Error::Domain(format!("real Legendre argument {} outside [-1, 1]", u.re)));
    }

    let n = packed(l_max, l_max) + 1;
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut over_sin = vec![Complex64::new(0.0, 0.0); n];
    let w = sqrt_im_nonpositive(Complex64::new(1.0, 0.0) - u * u);

    values[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for m in 1..=l_max {
        let mf = m as f64;
        let diag = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * values[packed(m - 1, m - 1)];
        over_sin[packed(m, m)] = diag;
        values[packed(m, m)] = diag * w;
    }
    for m in 0..=l_max {
        sweep_degree(&mut values, u, m, l_max);
        if m >= 1 {
            sweep_degree(&mut over_sin, u, m, l_max);
        }
    }

    for l in 0..=l_max {
        for m in 0..=l {
            let k = packed(l, m);
            if !(values[k].norm() <= cap && over_sin[k].norm() <= cap) {
                return Err(Error::Overflow { l, m, u, cap });
            }
        }
    }

    let at_pole = w.norm() == 0.0;
    let mut derivatives = vec![Complex64::new(0.0, 0.0); n];
    for l in 1..=l_max {
        let lf = l as f64;
        let s = (lf * (lf + 1.0)).sqrt();
        derivatives[packed(l, 0)] = -s * over_sin[packed(l, 1)];
        for m in 1..=l {
            derivatives[packed(l, m)] = if at_pole {
                pole_derivative(l, m, u.re)
            } else {
                let prev = if l > m { over_sin[packed(l - 1, m)] } else { Complex64::new(0.0, 0.0) };
                (degree_ratio(l, m) * prev - lf * u * over_sin[packed(l, m)]) / w
            };
        }
    }

    Ok(LegendreTable { l_max, u, sin_alpha: w, values, derivatives, over_sin })
}

/// `√((2l+1)/(2l−1) · (l−m)(l+m))`, the coefficient of `P̃_{l−1}^m` in the
/// derivative relation.
#[inline]
pub(crate) fn degree_ratio(l: usize, m: usize) -> f64 {
    let (lf, mf) = (l as f64, m as f64);
    ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf - mf) * (lf + mf)).sqrt()
}

fn sweep_degree(table: &mut [Complex64], u: Complex64, m: usize, l_max: usize) {
    if m + 1 > l_max {
        return;
    }
    let mf = m as f64;
    table[packed(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * u * table[packed(m, m)];
    let a = |l: usize| {
        let lf = l as f64;
        ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt()
    };
    for l in m + 2..=l_max {
        table[packed(l, m)] = a(l) * (u * table[packed(l - 1, m)] - table[packed(l - 2, m)] / a(l - 1));
    }
}

// One-sided limits at u = ±1 (only reached for exactly real endpoints).
// Derivatives obey dP̃(−u) = (−1)^{l+m+1} dP̃(u).
fn pole_derivative(l: usize, m: usize, sign: f64) -> Complex64 {
    let at_plus = match m {
        // P̃_l^1 ~ −c·√(1−u²) with c > 0: slope → +∞ as u → 1⁻.
        1 => f64::INFINITY,
        2 => {
            let lf = l as f64;
            let ratio = (lf + 2.0) * (lf + 1.0) * lf * (lf - 1.0);
            -0.25 * ((2.0 * lf + 1.0) / 2.0 * ratio).sqrt()
        }
        _ => 0.0,
    };
    let parity = if (l + m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::new(if sign > 0.0 { at_plus } else { parity * at_plus }, 0.0)
}
