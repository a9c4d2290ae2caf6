//! Spherical Bessel `j_l` and outgoing spherical Hankel `h_l^(2)` functions
//! (time convention `e^{+jωt}`, so outgoing waves behave like `e^{−jkr}`).

use num_complex::Complex64;

use crate::error::{Error, Result};

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    /// `j_l`, regular at the origin.
    Regular,
    /// `h_l^(2) = j_l − j·y_l`.
    Outgoing,
}

/// Values `z_0(x) … z_{l_max}(x)`.
pub fn spherical_bessel(kind: BesselKind, l_max: usize, x: Complex64) -> Result<Vec<Complex64>> {
    match kind {
        BesselKind::Regular => Ok(regular(l_max, x)),
        BesselKind::Outgoing => outgoing(l_max, x),
    }
}

/// Values and first derivatives, `z_l' = z_{l−1} − (l+1)/x · z_l`
/// (`z_0' = −z_1`).
pub fn spherical_bessel_with_derivatives(
    kind: BesselKind,
    l_max: usize,
    x: Complex64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut z = spherical_bessel(kind, l_max + 1, x)?;
    let mut dz = Vec::with_capacity(l_max + 1);
    if x == Complex64::new(0.0, 0.0) {
        // Only reachable for the regular kind.
        for l in 0..=l_max {
            dz.push(Complex64::new(if l == 1 { 1.0 / 3.0 } else { 0.0 }, 0.0));
        }
    } else {
        dz.push(-z[1]);
        for l in 1..=l_max {
            dz.push(z[l - 1] - (l as f64 + 1.0) / x * z[l]);
        }
    }
    z.truncate(l_max + 1);
    Ok((z, dz))
}

fn regular(l_max: usize, x: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); l_max + 1];
    if x == Complex64::new(0.0, 0.0) {
        out[0] = Complex64::new(1.0, 0.0);
        return out;
    }

    // Miller's downward recurrence, rescaled on the fly, then normalized
    // against whichever of j_0, j_1 is larger in magnitude.
    let start = l_max.max(x.norm().ceil() as usize) + 40;
    let mut next = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-30, 0.0);
    for l in (0..=start).rev() {
        if l <= l_max {
            out[l] = cur;
        }
        if l == 0 {
            break;
        }
        let prev = (2.0 * l as f64 + 1.0) / x * cur - next;
        next = cur;
        cur = prev;
        if cur.norm() > 1e200 {
            let scale = 1e-200;
            cur *= scale;
            next *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    let f1 = if l_max >= 1 { out[1] } else { next };

    let (j0, j1) = closed_j01(x);
    let scale = if j0.norm() >= j1.norm() { j0 / out[0] } else { j1 / f1 };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

fn closed_j01(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.1 {
        let x2 = x * x;
        let j0 = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
        let j1 = x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0))));
        (j0, j1)
    } else {
        let (s, c) = (x.sin(), x.cos());
        (s / x, s / (x * x) - c / x)
    }
}

fn outgoing(l_max: usize, x: Complex64) -> Result<Vec<Complex64>> {
    if x == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("outgoing spherical Hankel function is singular at x = 0".into()));
    }
    let e = (-J * x).exp();
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(J * e / x);
    if l_max >= 1 {
        out.push(e * (J / (x * x) - 1.0 / x));
    }
    for l in 1..l_max {
        let v = (2.0 * l as f64 + 1.0) / x * out[l] - out[l - 1];
        out.push(v);
    }
    Ok(out)
}
