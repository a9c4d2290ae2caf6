//! Browser demo: three small views onto the solver, exported through
//! wasm-bindgen. Every export returns a flat `Float64Array`.

use std::f64::consts::PI;

use layered_gsm::fresnel::{rho_stack, Layer, LayerStack, Medium, Termination};
use layered_gsm::gsmio::{synthesize_gsm, SyntheticGsmSpec};
use layered_gsm::interaction::{PreparedGsm, SolveOptions};
use layered_gsm::output::{magnitude_db, phase_deg};
use layered_gsm::waves::{Polarization, SvwfBasis};
use layered_gsm::wmatrix::{ContourSpec, WAssembler, DEFAULT_IOTA};
use layered_gsm::{Complex64, Result, C0};
use wasm_bindgen::prelude::*;

/// Minimum-sphere radius of the synthetic antenna.
pub const R_MIN: f64 = 0.146;
/// Largest degree the page may request; keeps the dense map small.
pub const MAX_DEMO_DEGREE: usize = 17;

fn js(e: layered_gsm::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn omega(freq_ghz: f64) -> f64 {
    2.0 * PI * freq_ghz * 1e9
}

fn slab_stack(eps_r: f64, sigma: f64, slab_eps: f64, slab_mm: f64, z_mm: f64) -> Result<LayerStack> {
    let layers = if slab_mm > 0.0 {
        vec![Layer { medium: Medium::dielectric(slab_eps, 0.0)?, thickness: slab_mm * 1e-3 }]
    } else {
        Vec::new()
    };
    LayerStack::new(Medium::VACUUM, layers, Termination::HalfSpace(Medium::dielectric(eps_r, sigma)?), z_mm * 1e-3)
}

fn check_degree(l_max: usize) -> Result<()> {
    if l_max == 0 || l_max > MAX_DEMO_DEGREE {
        return Err(layered_gsm::Error::Config(format!("degree must be in 1..={MAX_DEMO_DEGREE}, got {l_max}")));
    }
    Ok(())
}

/// `[θ_deg, |ρ_TE|, |ρ_TM|]` for `points` incidence angles in `[0°, 90°)`.
pub fn reflection_curve(
    eps_r: f64,
    sigma: f64,
    slab_eps: f64,
    slab_mm: f64,
    freq_ghz: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let stack = slab_stack(eps_r, sigma, slab_eps, slab_mm, -100.0)?;
    let w = omega(freq_ghz);
    let mut out = Vec::with_capacity(3 * points);
    for s in 0..points {
        let theta = 90.0 * s as f64 / points as f64;
        // Downgoing waves have u = cos α ∈ [−1, 0].
        let u = Complex64::new(-theta.to_radians().cos(), 0.0);
        out.push(theta);
        for i in [Polarization::Te, Polarization::Tm] {
            out.push(rho_stack(i, &stack, u, w)?.norm());
        }
    }
    Ok(out)
}

/// `[ε_r, |Γᶜ| dB, phase °]` of a one-port random antenna over a half-space
/// whose permittivity steps through `[eps_min, eps_max]`.
#[allow(clippy::too_many_arguments)]
pub fn permittivity_sweep(
    l_max: usize,
    eps_min: f64,
    eps_max: f64,
    count: usize,
    sigma: f64,
    z_mm: f64,
    freq_ghz: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_degree(l_max)?;
    let (w, f) = (omega(freq_ghz), freq_ghz * 1e9);
    let k = w / C0;
    let basis = SvwfBasis::new(l_max)?;
    let gsm =
        synthesize_gsm(&SyntheticGsmSpec::RandomPassive { seed, ports: 1, radius: 0.5, kr: k * R_MIN }, &basis, f)?;
    let prepared = PreparedGsm::new(&gsm)?;
    let assembler = WAssembler::new(&basis, &ContourSpec::from_rule(l_max, k * R_MIN, DEFAULT_IOTA)?)?;
    let opts = SolveOptions::default();
    let mut out = Vec::with_capacity(3 * count);
    for s in 0..count {
        let eps = if count > 1 { eps_min + (eps_max - eps_min) * s as f64 / (count - 1) as f64 } else { eps_min };
        let stack = LayerStack::half_space(Medium::dielectric(eps, sigma)?, z_mm * 1e-3)?;
        let g = prepared.gamma_composite(&assembler.assemble(&stack, k, w)?, &opts)?[(0, 0)];
        out.extend([eps, magnitude_db(g), phase_deg(g)]);
    }
    Ok(out)
}

/// `log10|𝒲|` as a dense row-major `j×j` grid (`−∞` where 𝒲 has no entry).
pub fn interaction_map(l_max: usize, eps_r: f64, sigma: f64, z_mm: f64, freq_ghz: f64) -> Result<Vec<f64>> {
    check_degree(l_max)?;
    let w = omega(freq_ghz);
    let k = w / C0;
    let basis = SvwfBasis::new(l_max)?;
    let stack = LayerStack::half_space(Medium::dielectric(eps_r, sigma)?, z_mm * 1e-3)?;
    let wm =
        WAssembler::new(&basis, &ContourSpec::from_rule(l_max, k * R_MIN, DEFAULT_IOTA)?)?.assemble(&stack, k, w)?;
    let j = basis.len();
    let mut out = vec![f64::NEG_INFINITY; j * j];
    for a in 0..j {
        for b in 0..j {
            if let Some(z) = wm.entry(a, b) {
                out[a * j + b] = z.norm().log10();
            }
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = reflectionCurve)]
pub fn reflection_curve_js(
    eps_r: f64,
    sigma: f64,
    slab_eps: f64,
    slab_mm: f64,
    freq_ghz: f64,
    points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    reflection_curve(eps_r, sigma, slab_eps, slab_mm, freq_ghz, points).map_err(js)
}

#[wasm_bindgen(js_name = permittivitySweep)]
#[allow(clippy::too_many_arguments)]
pub fn permittivity_sweep_js(
    l_max: usize,
    eps_min: f64,
    eps_max: f64,
    count: usize,
    sigma: f64,
    z_mm: f64,
    freq_ghz: f64,
    seed: u32,
) -> std::result::Result<Vec<f64>, JsError> {
    permittivity_sweep(l_max, eps_min, eps_max, count, sigma, z_mm, freq_ghz, seed as u64).map_err(js)
}

#[wasm_bindgen(js_name = interactionMap)]
pub fn interaction_map_js(
    l_max: usize,
    eps_r: f64,
    sigma: f64,
    z_mm: f64,
    freq_ghz: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    interaction_map(l_max, eps_r, sigma, z_mm, freq_ghz).map_err(js)
}

#[wasm_bindgen(js_name = basisSize)]
pub fn basis_size(l_max: usize) -> usize {
    layered_gsm::waves::basis_size(l_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_starts_at_normal_incidence() {
        let c = reflection_curve(4.0, 0.0, 1.0, 0.0, 3.5, 9).unwrap();
        assert_eq!(c.len(), 27);
        assert_eq!(c[0], 0.0);
        // |(1 − 2)/(1 + 2)| for ε_r = 4 at normal incidence, both polarizations.
        assert!((c[1] - 1.0 / 3.0).abs() < 1e-12 && (c[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_flat_over_vacuum() {
        let s = permittivity_sweep(4, 1.0, 1.0, 3, 0.0, -200.0, 3.5, 1).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[1], s[4]);
        assert!(permittivity_sweep(40, 1.0, 2.0, 2, 0.0, -200.0, 3.5, 1).is_err());
    }

    #[test]
    fn map_has_only_same_order_entries() {
        let l = 3;
        let j = basis_size(l);
        let m = interaction_map(l, 4.0, 0.01, -200.0, 3.5).unwrap();
        assert_eq!(m.len(), j * j);
        let idx = SvwfBasis::new(l).unwrap().indices().to_vec();
        for a in 0..j {
            for b in 0..j {
                if idx[a].m != idx[b].m {
                    assert_eq!(m[a * j + b], f64::NEG_INFINITY);
                }
            }
        }
        assert!(m.iter().any(|v| v.is_finite()));
    }
}
