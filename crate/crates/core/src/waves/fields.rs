//! Pointwise evaluation of planar and spherical vector wave functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::coefficients::azimuthal_norm;
use super::index::{Parity, Polarization, SvwfBasis, SvwfIndex};
use crate::error::{Error, Result};
use crate::specfun::{
    angular_functions, legendre_table, spherical_bessel_with_derivatives, sqrt_im_nonpositive, BesselKind,
};

pub type Vec3 = [Complex64; 3];

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Regular (`p = 1`, spherical Bessel) or outgoing (`p = 4`, `h^(2)`) radial
/// dependence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Regular,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourSegment {
    /// Real `u ∈ [−1, 1]`.
    Propagating,
    /// Purely imaginary `u`.
    Evanescent,
    /// Anywhere else in the complex plane.
    General,
}

/// Propagation direction `γ̂(α, β)` with `u = cos α` possibly complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveDirection {
    pub u: Complex64,
    pub beta: f64,
    pub segment: ContourSegment,
}

impl PlaneWaveDirection {
    pub fn new(u: Complex64, beta: f64) -> Self {
        let segment = if u.im == 0.0 && u.re.abs() <= 1.0 {
            ContourSegment::Propagating
        } else if u.re == 0.0 {
            ContourSegment::Evanescent
        } else {
            ContourSegment::General
        };
        PlaneWaveDirection { u, beta, segment }
    }

    pub fn from_angles(alpha: f64, beta: f64) -> Self {
        Self::new(Complex64::new(alpha.cos(), 0.0), beta)
    }

    pub fn sin_alpha(&self) -> Complex64 {
        sqrt_im_nonpositive(Complex64::new(1.0, 0.0) - self.u * self.u)
    }

    /// The mirrored direction `(π − α, β)`.
    pub fn mirrored(&self) -> Self {
        PlaneWaveDirection { u: -self.u, ..*self }
    }

    pub fn alpha_hat(&self) -> Vec3 {
        let (sb, cb) = self.beta.sin_cos();
        [self.u * cb, self.u * sb, -self.sin_alpha()]
    }

    pub fn beta_hat(&self) -> Vec3 {
        let (sb, cb) = self.beta.sin_cos();
        [Complex64::new(-sb, 0.0), Complex64::new(cb, 0.0), ZERO]
    }

    pub fn gamma_hat(&self) -> Vec3 {
        let (sb, cb) = self.beta.sin_cos();
        let sa = self.sin_alpha();
        [sa * cb, sa * sb, self.u]
    }
}

/// `φ_1 = (j/4π) β̂ e^{−jkγ̂·r}` (TE) and `φ_2 = −(1/4π) α̂ e^{−jkγ̂·r}` (TM).
pub fn eval_pvwf(i: Polarization, dir: &PlaneWaveDirection, k: f64, r: [f64; 3]) -> Vec3 {
    let g = dir.gamma_hat();
    let phase = (-J * k * (g[0] * r[0] + g[1] * r[1] + g[2] * r[2])).exp();
    match i {
        Polarization::Te => {
            let c = J / (4.0 * PI) * phase;
            dir.beta_hat().map(|v| c * v)
        }
        Polarization::Tm => {
            let c = -phase / (4.0 * PI);
            dir.alpha_hat().map(|v| c * v)
        }
    }
}

/// Real-harmonic spherical vector wave `u_n^(p)(r)`.
///
/// `τ = 1`: `z_l(kr)·(∇Y_n × r)/√(l(l+1))`; `τ = 2`: `(1/k)∇×` of the `τ = 1`
/// wave. `Y_n = N_m P̃_l^m(cos θ){cos, sin}(mφ)` is unit-norm on the sphere.
pub fn eval_svwf(kind: WaveKind, n: &SvwfIndex, k: f64, r: [f64; 3]) -> Result<Vec3> {
    n.validate()?;
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let rho = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let l = n.l;
    let lf = l as f64;
    let s = (lf * (lf + 1.0)).sqrt();

    if rho == 0.0 {
        if kind == WaveKind::Outgoing {
            return Err(Error::Domain("outgoing spherical wave evaluated at the origin".into()));
        }
        if n.tau == Polarization::Te || l > 1 {
            return Ok([ZERO; 3]);
        }
        // l = 1, τ = 2: constant vector; evaluate along +z with the x → 0 limits.
        let (_, radial, longitudinal) = angular_parts(n, 1.0, 0.0)?;
        let mut out = [ZERO; 3];
        for c in 0..3 {
            out[c] = 2.0 / 3.0 * radial[c] + s / 3.0 * longitudinal[c];
        }
        return Ok(out);
    }

    let cos_t = (r[2] / rho).clamp(-1.0, 1.0);
    let phi = r[1].atan2(r[0]);
    let point = PointTables::new(kind, l, k, rho, cos_t, phi)?;
    Ok(point.eval(n))
}

/// Every function of `basis` at one point, in canonical order. Shares the
/// Legendre and Bessel tables across indices.
pub fn eval_svwf_basis(kind: WaveKind, basis: &SvwfBasis, k: f64, r: [f64; 3]) -> Result<Vec<Vec3>> {
    let rho = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if rho == 0.0 {
        return basis.indices().iter().map(|n| eval_svwf(kind, n, k, r)).collect();
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let cos_t = (r[2] / rho).clamp(-1.0, 1.0);
    let phi = r[1].atan2(r[0]);
    let point = PointTables::new(kind, basis.l_max(), k, rho, cos_t, phi)?;
    Ok(basis.indices().iter().map(|n| point.eval(n)).collect())
}

struct PointTables {
    cos_t: f64,
    phi: f64,
    x: Complex64,
    table: crate::specfun::LegendreTable,
    ang: crate::specfun::AngularFunctions,
    z: Vec<Complex64>,
    dz: Vec<Complex64>,
}

impl PointTables {
    fn new(kind: WaveKind, l_max: usize, k: f64, rho: f64, cos_t: f64, phi: f64) -> Result<Self> {
        let table = legendre_table(Complex64::new(cos_t, 0.0), l_max)?;
        let ang = angular_functions(&table);
        let x = Complex64::new(k * rho, 0.0);
        let bessel = match kind {
            WaveKind::Regular => BesselKind::Regular,
            WaveKind::Outgoing => BesselKind::Outgoing,
        };
        let (z, dz) = spherical_bessel_with_derivatives(bessel, l_max, x)?;
        Ok(PointTables { cos_t, phi, x, table, ang, z, dz })
    }

    fn eval(&self, n: &SvwfIndex) -> Vec3 {
        let l = n.l;
        let lf = l as f64;
        let (a1, a2, a3) = angular_parts_from(n, &self.table, &self.ang, self.cos_t, self.phi);
        let mut out = [ZERO; 3];
        match n.tau {
            Polarization::Te => {
                for c in 0..3 {
                    out[c] = self.z[l] * a1[c];
                }
            }
            Polarization::Tm => {
                let x = self.x;
                let radial = (self.z[l] + x * self.dz[l]) / x;
                let longitudinal = (lf * (lf + 1.0)).sqrt() * self.z[l] / x;
                for c in 0..3 {
                    out[c] = radial * a2[c] + longitudinal * a3[c];
                }
            }
        }
        out
    }
}

// Cartesian vector spherical harmonics A_1n, A_2n and r̂·Y_n at direction (θ, φ).
fn angular_parts(n: &SvwfIndex, cos_t: f64, phi: f64) -> Result<(Vec3, Vec3, Vec3)> {
    let table = legendre_table(Complex64::new(cos_t, 0.0), n.l)?;
    let ang = angular_functions(&table);
    Ok(angular_parts_from(n, &table, &ang, cos_t, phi))
}

fn angular_parts_from(
    n: &SvwfIndex,
    table: &crate::specfun::LegendreTable,
    ang: &crate::specfun::AngularFunctions,
    cos_t: f64,
    phi: f64,
) -> (Vec3, Vec3, Vec3) {
    let norm = azimuthal_norm(n.m);
    let delta = norm * ang.delta(n.l, n.m);
    let pi = norm * ang.pi(n.l, n.m);
    let p = norm * table.value(n.l, n.m);
    let (sm, cm) = (n.m as f64 * phi).sin_cos();

    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let theta_hat = [cos_t * cp, cos_t * sp, -sin_t];
    let phi_hat = [-sp, cp, 0.0];
    let r_hat = [sin_t * cp, sin_t * sp, cos_t];

    let (a1_t, a1_p, a2_t, a2_p, y) = match n.parity {
        Parity::Even => (pi * sm, -delta * cm, delta * cm, pi * sm, p * cm),
        Parity::Odd => (-pi * cm, -delta * sm, delta * sm, -pi * cm, p * sm),
    };
    let mut a1 = [ZERO; 3];
    let mut a2 = [ZERO; 3];
    let mut a3 = [ZERO; 3];
    for c in 0..3 {
        a1[c] = a1_t * theta_hat[c] + a1_p * phi_hat[c];
        a2[c] = a2_t * theta_hat[c] + a2_p * phi_hat[c];
        a3[c] = y * r_hat[c];
    }
    (a1, a2, a3)
}
