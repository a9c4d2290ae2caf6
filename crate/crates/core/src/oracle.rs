//! Brute-force validators for the wave conventions and for 𝒲: the
//! spherical→planar transform identity, the boundary condition on a perfect
//! conductor, and direct contour integration of the reflected field.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fresnel::{rho_stack, Layer, LayerStack, Medium, Termination};
use crate::specfun::{angular_functions, gauss_legendre, legendre_table};
use crate::waves::{
    azimuthal_factor, azimuthal_norm, b_coefficient, eval_pvwf, eval_svwf, eval_svwf_basis, PlaneWaveDirection,
    Polarization, SvwfBasis, SvwfIndex, Vec3, WaveKind,
};
use crate::wmatrix::{ContourSpec, WMatrix};
use crate::{EPS0, MU0};

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn norm(v: &Vec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn tangential_norm(v: &Vec3) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn diff(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Regular wave `u_n^(1)(r)` rebuilt from its propagating plane-wave
/// spectrum: `Σ_i ∫₀^π sin α dα ∫₀^{2π} dβ B_ni(cos α) N_m A_ni(β) φ_i(α, β; r)`,
/// Gauss–Legendre in `α`, trapezoidal (spectrally exact for periodic
/// integrands) in `β`.
pub fn regular_wave_from_spectrum(n: &SvwfIndex, k: f64, r: [f64; 3], quad: (usize, usize)) -> Result<Vec3> {
    n.validate()?;
    let (n_alpha, n_beta) = quad;
    if n_beta == 0 {
        return Err(Error::Validation("β quadrature needs at least one node".into()));
    }
    let (x, w) = gauss_legendre(n_alpha)?;
    let norm_m = azimuthal_norm(n.m);
    let db = 2.0 * PI / n_beta as f64;
    let mut total = [ZERO; 3];
    for (xi, wi) in x.iter().zip(&w) {
        let alpha = 0.5 * PI * (xi + 1.0);
        let wa = 0.5 * PI * wi * alpha.sin();
        let u = Complex64::new(alpha.cos(), 0.0);
        let ang = angular_functions(&legendre_table(u, n.l)?);
        let b = [b_coefficient(n, Polarization::Te, &ang, false), b_coefficient(n, Polarization::Tm, &ang, false)];
        for q in 0..n_beta {
            let beta = q as f64 * db;
            let dir = PlaneWaveDirection::new(u, beta);
            for i in Polarization::BOTH {
                let c = wa * db * norm_m * azimuthal_factor(n, i, beta) * b[i.code() as usize - 1];
                let phi = eval_pvwf(i, &dir, k, r);
                for (t, p) in total.iter_mut().zip(phi) {
                    *t += c * p;
                }
            }
        }
    }
    Ok(total)
}

/// Max relative discrepancy between `u_n^(1)` evaluated directly and via
/// its plane-wave spectrum, over `points`.
pub fn check_transform_identity(n: &SvwfIndex, k: f64, points: &[[f64; 3]], quad: (usize, usize)) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &r in points {
        let direct = eval_svwf(WaveKind::Regular, n, k, r)?;
        let spectral = regular_wave_from_spectrum(n, k, r, quad)?;
        let scale = norm(&direct).max(1e-300);
        worst = worst.max(norm(&diff(&direct, &spectral)) / scale);
    }
    Ok(worst)
}

/// Reflected field predicted by 𝒲 for a unit outgoing source `n`:
/// `Σ_n' 𝒲_{nn'} u_n'^(1)(r)`.
pub fn reflected_field_from_w(w: &WMatrix, source: usize, k: f64, r: [f64; 3]) -> Result<Vec3> {
    let basis = w.basis();
    let waves = eval_svwf_basis(WaveKind::Regular, basis, k, r)?;
    let mut out = [ZERO; 3];
    for (b, wave) in waves.iter().enumerate() {
        if let Some(coef) = w.entry(source, b) {
            for (o, c) in out.iter_mut().zip(wave) {
                *o += coef * c;
            }
        }
    }
    Ok(out)
}

/// Deterministic sample points on the plane `z = z_I` within `radius` of the
/// axis (uniform over the disc).
pub fn interface_sample_points(z_interface: f64, radius: f64, count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rr = radius * rng.random::<f64>().sqrt();
            let ph = 2.0 * PI * rng.random::<f64>();
            [rr * ph.cos(), rr * ph.sin(), z_interface]
        })
        .collect()
}

/// Deterministic points in the spherical shell `r_min ≤ |r| ≤ r_max`.
pub fn shell_sample_points(r_min: f64, r_max: f64, count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rr = r_min + (r_max - r_min) * rng.random::<f64>();
            let cz: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let sz = (1.0 - cz * cz).sqrt();
            let ph = 2.0 * PI * rng.random::<f64>();
            [rr * sz * ph.cos(), rr * sz * ph.sin(), rr * cz]
        })
        .collect()
}

/// Tangential-field residual on a PEC plane at `z = z_I`: for every source,
/// `max |E_tan(u_n^(4) + Σ 𝒲_{nn'} u_n'^(1))| / |E_tan(u_n^(4))|` over the
/// sample points (which must lie on the plane).
pub fn check_pec_boundary(
    w: &WMatrix,
    z_interface: f64,
    k: f64,
    sources: &[SvwfIndex],
    points: &[[f64; 3]],
) -> Result<f64> {
    let basis = w.basis();
    for r in points {
        if (r[2] - z_interface).abs() > 1e-12 * z_interface.abs() {
            return Err(Error::Validation(format!("sample point {r:?} is not on the plane z = {z_interface}")));
        }
    }
    let positions = sources
        .iter()
        .map(|n| basis.position(n).ok_or_else(|| Error::Validation(format!("source {n} outside the basis"))))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for &r in points {
        let regular = eval_svwf_basis(WaveKind::Regular, basis, k, r)?;
        for (n, &a) in sources.iter().zip(&positions) {
            let incident = eval_svwf(WaveKind::Outgoing, n, k, r)?;
            let mut total = incident;
            for (b, wave) in regular.iter().enumerate() {
                if let Some(coef) = w.entry(a, b) {
                    for (t, c) in total.iter_mut().zip(wave) {
                        *t += coef * c;
                    }
                }
            }
            let scale = tangential_norm(&incident).max(1e-300);
            worst = worst.max(tangential_norm(&total) / scale);
        }
    }
    Ok(worst)
}

/// Reflected field of a unit outgoing source by direct contour integration:
/// every downgoing plane wave of the source's spectrum is reflected by the
/// stack into the mirrored direction,
/// `2 Σ_i ∫_C du ∫ dβ B_ni(u) N_m A_ni(β) ρ_i(u) e^{−2jkz_I u} φ_i(−u, β; r)`.
pub fn reflected_field_direct(
    n: &SvwfIndex,
    stack: &LayerStack,
    omega: f64,
    contour: &ContourSpec,
    n_beta: usize,
    r: [f64; 3],
) -> Result<Vec3> {
    n.validate()?;
    let k = stack.top_wavenumber(omega);
    let norm_m = azimuthal_norm(n.m);
    let db = 2.0 * PI / n_beta.max(1) as f64;
    let mut total = [ZERO; 3];
    for (u, du) in contour.nodes()? {
        let ang = angular_functions(&legendre_table(u, n.l)?);
        let phase = (-2.0 * J * k * stack.z_interface * u).exp();
        for i in Polarization::BOTH {
            let b = b_coefficient(n, i, &ang, false);
            let rho = rho_stack(i, stack, u, omega)?;
            let c0 = 2.0 * du * b * rho * phase * norm_m * db;
            if c0 == ZERO {
                continue;
            }
            for q in 0..n_beta {
                let beta = q as f64 * db;
                let a = azimuthal_factor(n, i, beta);
                if a == 0.0 {
                    continue;
                }
                let up = PlaneWaveDirection::new(-u, beta);
                let phi = eval_pvwf(i, &up, k, r);
                for (t, p) in total.iter_mut().zip(phi) {
                    *t += c0 * a * p;
                }
            }
        }
    }
    Ok(total)
}

/// Max relative discrepancy between the 𝒲-expanded reflected field and its
/// direct contour integral over `points`. The discrepancy is normalized by
/// the largest reflected-field magnitude over the point set.
pub fn check_reflected_field(
    n: &SvwfIndex,
    stack: &LayerStack,
    omega: f64,
    w: &WMatrix,
    reference: &ContourSpec,
    n_beta: usize,
    points: &[[f64; 3]],
) -> Result<f64> {
    let k = stack.top_wavenumber(omega);
    let a = w.basis().position(n).ok_or_else(|| Error::Validation(format!("source {n} outside the basis")))?;
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for &r in points {
        let expanded = reflected_field_from_w(w, a, k, r)?;
        let direct = reflected_field_direct(n, stack, omega, reference, n_beta, r)?;
        scale = scale.max(norm(&direct));
        worst = worst.max(norm(&diff(&expanded, &direct)));
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

// Decaying branch of a square root: Im ≤ 0, Re ≥ 0 on the real axis.
fn decaying_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im > 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Stack reflection coefficient by propagating the tangential field and
/// its normal derivative, `(F, F'/p)`, upward from the termination through
/// every layer, with `F = E_y, p = μ` (TE) or `F = H_y, p = ε̃` (TM).
/// Shares no code with the reflection recursion.
pub fn transfer_matrix_reflection(i: Polarization, stack: &LayerStack, u: Complex64, omega: f64) -> Complex64 {
    let eps = |m: &Medium| Complex64::new(EPS0 * m.eps_r, -m.sigma / omega);
    let p = |m: &Medium| match i {
        Polarization::Te => Complex64::new(MU0 * m.mu_r, 0.0),
        Polarization::Tm => eps(m),
    };
    let top = &stack.top;
    // k_z² = ω²(μ ε̃ − μ₁ε₁ sin²α), grouped so that grazing incidence in the
    // top medium does not cancel.
    let mu_eps_top = MU0 * top.mu_r * EPS0 * top.eps_r;
    let kz = |m: &Medium| decaying_sqrt(omega * omega * ((MU0 * m.mu_r * eps(m) - mu_eps_top) + mu_eps_top * u * u));

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // State at the top of the termination (downgoing transmitted wave only).
    let (mut f, mut g) = match (&stack.termination, i) {
        (Termination::HalfSpace(m), _) => (one, J * kz(m) / p(m)),
        (Termination::Pec, Polarization::Te) | (Termination::Pmc, Polarization::Tm) => (zero, one),
        (Termination::Pec, Polarization::Tm) | (Termination::Pmc, Polarization::Te) => (one, zero),
    };
    // Each layer maps (F, G) by [[c, p·s/k], [−k·s/p, c]]; the map is
    // applied divided by whichever of c, s is larger, since only F/G matters
    // and the unscaled form overflows for evanescent waves.
    for layer in stack.layers.iter().rev() {
        let (k, pm, d) = (kz(&layer.medium), p(&layer.medium), layer.thickness);
        let (c, sn) = ((k * d).cos(), (k * d).sin());
        let (f_new, g_new) = if c.norm() >= sn.norm() {
            let t = sn / c;
            let t_over_k = if k.norm() == 0.0 { Complex64::new(d, 0.0) } else { t / k };
            (f + pm * t_over_k * g, -(k * t / pm) * f + g)
        } else {
            let ct = c / sn;
            ((ct * f + pm / k * g), -(k / pm) * f + ct * g)
        };
        let scale = f_new.norm().max(g_new.norm());
        f = f_new / scale;
        g = g_new / scale;
    }
    let h = g * p(top) / (J * kz(top));
    (f - h) / (f + h)
}

/// Random lossy 1–5 layer stack above a random termination.
pub fn random_stack(rng: &mut impl Rng) -> LayerStack {
    let medium = |rng: &mut dyn rand::RngCore| Medium {
        eps_r: 1.0 + 19.0 * rng.random::<f64>(),
        sigma: if rng.random::<f64>() < 0.3 { 0.0 } else { 0.5 * rng.random::<f64>() },
        mu_r: if rng.random::<f64>() < 0.8 { 1.0 } else { 1.0 + 2.0 * rng.random::<f64>() },
    };
    let layers = (0..rng.random_range(1..=5usize))
        .map(|_| Layer { medium: medium(rng), thickness: 1e-3 + 0.1 * rng.random::<f64>() })
        .collect();
    let termination = match rng.random_range(0..5u8) {
        0 => Termination::Pec,
        1 => Termination::Pmc,
        _ => Termination::HalfSpace(medium(rng)),
    };
    LayerStack { top: Medium::VACUUM, layers, termination, z_interface: -0.1 - 0.2 * rng.random::<f64>() }
}

/// Max relative discrepancy between the reflection recursion and the
/// transfer-matrix oracle over `count` random stacks, both polarizations,
/// at every node of a `κ̃ = 1.5` contour and random points along it.
pub fn check_fresnel(count: usize, seed: u64, frequency: f64) -> Result<f64> {
    let omega = 2.0 * PI * frequency;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut us: Vec<Complex64> =
        ContourSpec::new(1.5)?.with_orders(16, 16)?.nodes()?.into_iter().map(|n| n.0).collect();
    us.extend((0..8).map(|_| Complex64::new(-rng.random::<f64>(), 0.0)));
    us.extend((0..8).map(|_| J * 1.5 * rng.random::<f64>()));
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let stack = random_stack(&mut rng);
        stack.validate()?;
        for &u in &us {
            for i in Polarization::BOTH {
                let a = rho_stack(i, &stack, u, omega)?;
                let b = transfer_matrix_reflection(i, &stack, u, omega);
                worst = worst.max((a - b).norm() / b.norm().max(1e-300));
            }
        }
    }
    Ok(worst)
}

/// Basis indices used as default sources by the boundary checks: low-order
/// waves of both polarizations and parities.
pub fn default_sources(basis: &SvwfBasis) -> Vec<SvwfIndex> {
    use crate::waves::Parity::{Even, Odd};
    use crate::waves::Polarization::{Te, Tm};
    [(Te, Even, 0, 1), (Tm, Even, 0, 1), (Te, Even, 1, 1), (Tm, Odd, 1, 2), (Te, Even, 2, 3)]
        .into_iter()
        .filter_map(|(t, s, m, l)| SvwfIndex::new(t, s, m, l).ok())
        .filter(|n| n.l <= basis.l_max())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::Parity;

    #[test]
    fn transform_identity_low_order() {
        let n = SvwfIndex::new(Polarization::Tm, Parity::Odd, 1, 2).unwrap();
        let pts = shell_sample_points(0.5, 1.0, 3, 1);
        let err = check_transform_identity(&n, 2.0, &pts, (48, 48)).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn transfer_matrix_agrees_with_recursion() {
        let err = check_fresnel(10, 5, 3.5e9).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn transfer_matrix_normal_incidence_half_space() {
        let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.0).unwrap(), -0.2).unwrap();
        let g = transfer_matrix_reflection(Polarization::Te, &stack, Complex64::new(-1.0, 0.0), 1e10);
        assert!((g - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sample_points_are_deterministic() {
        assert_eq!(interface_sample_points(-0.2, 0.1, 4, 7), interface_sample_points(-0.2, 0.1, 4, 7));
        for p in interface_sample_points(-0.2, 0.1, 16, 3) {
            assert!(p[0].hypot(p[1]) <= 0.1 && p[2] == -0.2);
        }
    }
}
