//! Plane-wave reflection from a planar stratified medium at complex
//! `u = cos α`: wave impedances, longitudinal wavenumbers and the
//! composite reflection recursion from the deepest interface upward.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::specfun::sqrt_im_nonpositive;
use crate::waves::Polarization;
use crate::{EPS0, MU0};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Homogeneous isotropic medium. `sigma` in S/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub eps_r: f64,
    pub sigma: f64,
    pub mu_r: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Medium::VACUUM
    }
}

impl Medium {
    pub const VACUUM: Medium = Medium { eps_r: 1.0, sigma: 0.0, mu_r: 1.0 };

    pub fn new(eps_r: f64, sigma: f64, mu_r: f64) -> Result<Self> {
        let m = Medium { eps_r, sigma, mu_r };
        m.validate()?;
        Ok(m)
    }

    pub fn dielectric(eps_r: f64, sigma: f64) -> Result<Self> {
        Self::new(eps_r, sigma, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r.is_finite() && self.eps_r >= 1.0) {
            return Err(Error::Validation(format!("relative permittivity must be ≥ 1, got {}", self.eps_r)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Validation(format!("conductivity must be ≥ 0, got {}", self.sigma)));
        }
        if !(self.mu_r.is_finite() && self.mu_r > 0.0) {
            return Err(Error::Validation(format!("relative permeability must be > 0, got {}", self.mu_r)));
        }
        Ok(())
    }

    /// `ε/ε₀ = ε_r − jσ/(ωε₀)`.
    pub fn relative_permittivity(&self, omega: f64) -> Complex64 {
        Complex64::new(self.eps_r, -self.sigma / (omega * EPS0))
    }

    pub fn permittivity(&self, omega: f64) -> Complex64 {
        EPS0 * self.relative_permittivity(omega)
    }

    pub fn permeability(&self) -> f64 {
        self.mu_r * MU0
    }

    /// `k = ω√(εμ)` with `Im k ≤ 0`.
    pub fn wavenumber(&self, omega: f64) -> Complex64 {
        omega * sqrt_im_nonpositive(self.permittivity(omega) * self.permeability())
    }

    fn is_lossless(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Finite-thickness layer (thickness in m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub medium: Medium,
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    HalfSpace(Medium),
    Pec,
    Pmc,
}

/// Top medium (holding the antenna), interior layers from the top interface
/// downward, and the terminating half-space. `z_interface < 0` is the height
/// of the top interface in antenna-centred coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub top: Medium,
    pub layers: Vec<Layer>,
    pub termination: Termination,
    pub z_interface: f64,
}

impl LayerStack {
    pub fn half_space(medium: Medium, z_interface: f64) -> Result<Self> {
        Self::new(Medium::VACUUM, Vec::new(), Termination::HalfSpace(medium), z_interface)
    }

    pub fn pec(z_interface: f64) -> Result<Self> {
        Self::new(Medium::VACUUM, Vec::new(), Termination::Pec, z_interface)
    }

    pub fn new(top: Medium, layers: Vec<Layer>, termination: Termination, z_interface: f64) -> Result<Self> {
        let stack = LayerStack { top, layers, termination, z_interface };
        stack.validate()?;
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        self.top.validate()?;
        if !self.top.is_lossless() {
            return Err(Error::Validation("the antenna's (top) medium must be lossless".into()));
        }
        if !(self.z_interface.is_finite() && self.z_interface < 0.0) {
            return Err(Error::Validation(format!(
                "interface height must be negative (below the antenna), got {}",
                self.z_interface
            )));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            layer.medium.validate()?;
            if !(layer.thickness.is_finite() && layer.thickness > 0.0) {
                return Err(Error::Validation(format!("layer {k} thickness must be > 0, got {}", layer.thickness)));
            }
        }
        if let Termination::HalfSpace(m) = &self.termination {
            m.validate()?;
        }
        Ok(())
    }

    /// Wavenumber of the top medium (real, since it is lossless).
    pub fn top_wavenumber(&self, omega: f64) -> f64 {
        self.top.wavenumber(omega).re
    }

    pub fn interface_count(&self) -> usize {
        self.layers.len() + 1
    }

    /// True when every medium (and the termination) equals the top medium,
    /// i.e. there is no reflection at all.
    pub fn is_homogeneous(&self) -> bool {
        self.layers.iter().all(|l| l.medium == self.top)
            && matches!(self.termination, Termination::HalfSpace(m) if m == self.top)
    }

    /// Reflection coefficient `Γ_i^n` of interface `n` (0 = top interface).
    pub fn interface_gamma(&self, i: Polarization, n: usize, u: Complex64, omega: f64) -> Result<Complex64> {
        if n >= self.interface_count() {
            return Err(Error::Validation(format!(
                "interface {n} out of range (stack has {})",
                self.interface_count()
            )));
        }
        let upper = if n == 0 { &self.top } else { &self.layers[n - 1].medium };
        let lower =
            if n < self.layers.len() { Termination::HalfSpace(self.layers[n].medium) } else { self.termination };
        interface_gamma(i, upper, &lower, &self.top, u, omega)
    }

    /// Stable identifier of the stack parameters (hex).
    pub fn fingerprint(&self) -> String {
        let mut words = Vec::new();
        let medium = |m: &Medium, w: &mut Vec<f64>| w.extend([m.eps_r, m.sigma, m.mu_r]);
        medium(&self.top, &mut words);
        for layer in &self.layers {
            medium(&layer.medium, &mut words);
            words.push(layer.thickness);
        }
        match &self.termination {
            Termination::HalfSpace(m) => {
                words.push(0.0);
                medium(m, &mut words);
            }
            Termination::Pec => words.push(1.0),
            Termination::Pmc => words.push(2.0),
        }
        words.push(self.z_interface);
        fingerprint_words(&words)
    }
}

/// Hex digest (first 16 bytes of SHA-256) over the bit patterns of `words`.
pub(crate) fn fingerprint_words(words: &[f64]) -> String {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.to_bits().to_le_bytes());
    }
    hex16(&h.finalize())
}

pub(crate) fn hex16(bytes: &[u8]) -> String {
    bytes.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

/// `k_z = √(k_n² − k₁² sin²α)`, `sin²α = 1 − u²`, on the `Im k_z ≤ 0` branch.
///
/// Evaluated as `k₁·√(k_n²/k₁² − 1 + u²)` with the ratio formed from the
/// material constants, so `k_z = k₁|u|` holds exactly in the top medium.
pub fn kz(medium: &Medium, top: &Medium, u: Complex64, omega: f64) -> Complex64 {
    let k1 = top.wavenumber(omega).re;
    let ratio = medium.relative_permittivity(omega) * medium.mu_r / (top.relative_permittivity(omega) * top.mu_r);
    k1 * sqrt_im_nonpositive(ratio - 1.0 + u * u)
}

/// `Γ_i = (−1)^{i+1} (Z_i^{lower} − Z_i^{upper}) / (Z_i^{lower} + Z_i^{upper})`
/// with `Z_1 = ωμ/k_z`, `Z_2 = k_z/(ωε)`; PEC has `Z = 0`, PMC `Z → ∞`.
pub fn interface_gamma(
    i: Polarization,
    upper: &Medium,
    lower: &Termination,
    top: &Medium,
    u: Complex64,
    omega: f64,
) -> Result<Complex64> {
    let sign = match i {
        Polarization::Te => 1.0,
        Polarization::Tm => -1.0,
    };
    let lower = match lower {
        Termination::Pec => return Ok(Complex64::new(-sign, 0.0)),
        Termination::Pmc => return Ok(Complex64::new(sign, 0.0)),
        Termination::HalfSpace(m) => m,
    };
    let kz_a = kz(upper, top, u, omega);
    let kz_b = kz(lower, top, u, omega);
    // Cross-multiplied impedance ratio, free of divisions by k_z.
    let (num, den) = match i {
        Polarization::Te => {
            let (mu_a, mu_b) = (upper.mu_r, lower.mu_r);
            (mu_b * kz_a - mu_a * kz_b, mu_b * kz_a + mu_a * kz_b)
        }
        Polarization::Tm => {
            let (eps_a, eps_b) = (upper.relative_permittivity(omega), lower.relative_permittivity(omega));
            (kz_b * eps_a - kz_a * eps_b, kz_b * eps_a + kz_a * eps_b)
        }
    };
    if den.norm() < 1e-300 {
        return Err(Error::Singularity { u, what: "vanishing impedance sum at an interface".into() });
    }
    Ok(sign * num / den)
}

/// Composite reflection coefficient `ρ_i¹(u)` seen from the top medium.
pub fn rho_stack(i: Polarization, stack: &LayerStack, u: Complex64, omega: f64) -> Result<Complex64> {
    let top = &stack.top;
    let n_layers = stack.layers.len();
    let upper_of = |n: usize| if n == 0 { &stack.top } else { &stack.layers[n - 1].medium };

    let mut rho = interface_gamma(i, upper_of(n_layers), &stack.termination, top, u, omega)?;
    for n in (0..n_layers).rev() {
        let layer = &stack.layers[n];
        let gamma = interface_gamma(i, upper_of(n), &Termination::HalfSpace(layer.medium), top, u, omega)?;
        let phase = (-2.0 * J * kz(&layer.medium, top, u, omega) * layer.thickness).exp();
        let den = 1.0 + gamma * rho * phase;
        if den.norm() < 1e-300 {
            return Err(Error::Singularity { u, what: format!("vanishing recursion denominator at interface {n}") });
        }
        rho = (gamma + rho * phase) / den;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const F: f64 = 3.5e9;

    fn omega() -> f64 {
        2.0 * PI * F
    }

    #[test]
    fn kz_top_medium_is_k1_u() {
        let w = omega();
        let k1 = Medium::VACUUM.wavenumber(w).re;
        for u in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let v = kz(&Medium::VACUUM, &Medium::VACUUM, Complex64::new(u, 0.0), w);
            assert!((v.norm() - k1 * u.abs()).abs() < 1e-9 * k1);
        }
    }

    #[test]
    fn kz_dielectric_grazing() {
        let w = omega();
        let k1 = Medium::VACUUM.wavenumber(w).re;
        let m = Medium::dielectric(4.0, 0.0).unwrap();
        let v = kz(&m, &Medium::VACUUM, Complex64::new(0.0, 0.0), w);
        assert!((v - Complex64::new(k1 * 3f64.sqrt(), 0.0)).norm() < 1e-9 * k1);
    }

    #[test]
    fn kz_evanescent_branch() {
        let w = omega();
        let k1 = Medium::VACUUM.wavenumber(w).re;
        let v = kz(&Medium::VACUUM, &Medium::VACUUM, Complex64::new(0.0, 1.0), w);
        assert!((v - Complex64::new(0.0, -k1)).norm() < 1e-9 * k1);
    }

    #[test]
    fn pec_and_pmc_terminations() {
        let u = Complex64::new(-0.4, 0.0);
        let pec = LayerStack::pec(-0.2).unwrap();
        assert_eq!(rho_stack(Polarization::Te, &pec, u, omega()).unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(rho_stack(Polarization::Tm, &pec, u, omega()).unwrap(), Complex64::new(1.0, 0.0));
        let pmc = LayerStack::new(Medium::VACUUM, vec![], Termination::Pmc, -0.2).unwrap();
        assert_eq!(rho_stack(Polarization::Te, &pmc, u, omega()).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(rho_stack(Polarization::Tm, &pmc, u, omega()).unwrap(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn normal_incidence_on_eps4() {
        let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.0).unwrap(), -0.2).unwrap();
        for u in [-1.0, 1.0] {
            let g = stack.interface_gamma(Polarization::Te, 0, Complex64::new(u, 0.0), omega()).unwrap();
            assert!((g - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn half_wave_window_is_transparent() {
        let w = omega();
        let k1 = Medium::VACUUM.wavenumber(w).re;
        // 2·k_z·h = 2π at normal incidence in ε_r = 4.
        let h = PI / (2.0 * k1);
        let slab = Layer { medium: Medium::dielectric(4.0, 0.0).unwrap(), thickness: h };
        let stack = LayerStack::new(Medium::VACUUM, vec![slab], Termination::HalfSpace(Medium::VACUUM), -0.2).unwrap();
        for i in Polarization::BOTH {
            let r = rho_stack(i, &stack, Complex64::new(-1.0, 0.0), w).unwrap();
            assert!(r.norm() < 1e-14, "{r}");
        }
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(LayerStack::pec(0.1).is_err());
        assert!(Medium::dielectric(0.5, 0.0).is_err());
        let bad = Layer { medium: Medium::VACUUM, thickness: 0.0 };
        assert!(LayerStack::new(Medium::VACUUM, vec![bad], Termination::Pec, -0.1).is_err());
    }

    #[test]
    fn homogeneous_stack_reflects_nothing() {
        let stack = LayerStack::half_space(Medium::VACUUM, -0.2).unwrap();
        assert!(stack.is_homogeneous());
        for u in [Complex64::new(-0.5, 0.0), Complex64::new(0.0, 0.8)] {
            for i in Polarization::BOTH {
                assert_eq!(rho_stack(i, &stack, u, omega()).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
    }
}
