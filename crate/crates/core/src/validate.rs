//! Validation suite: the oracle checks at a set of basis degrees, and the
//! (L_max, κ̃) error map against a refined self-convergence reference.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fresnel::{LayerStack, Medium};
use crate::gsmio::{scale_to_feedback_radius, synthesize_gsm, SyntheticGsmSpec};
use crate::interaction::{gamma_composite, max_abs_diff, reflection_order_study, GsmBlocks, SolveOptions};
use crate::oracle::{
    check_fresnel, check_pec_boundary, check_reflected_field, check_transform_identity, default_sources,
    interface_sample_points, shell_sample_points,
};
use crate::waves::{SvwfBasis, SvwfIndex};
use crate::wmatrix::{assemble_w, kappa_rule, lmax_rule, ContourSpec, WAssembler, DEFAULT_IOTA, DEFAULT_QUAD_ORDER};

/// Band-centre frequency and geometry of the default scenario.
pub const DEFAULT_FREQUENCY: f64 = 3.5e9;
pub const DEFAULT_Z_INTERFACE: f64 = -0.2;
pub const DEFAULT_R_MIN: f64 = 0.146;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Fresnel,
    Transform,
    Structure,
    Pec,
    Reflected,
    FreeSpace,
    Neumann,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Fresnel,
        CheckKind::Transform,
        CheckKind::Structure,
        CheckKind::Pec,
        CheckKind::Reflected,
        CheckKind::FreeSpace,
        CheckKind::Neumann,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "fresnel" => CheckKind::Fresnel,
            "transform" => CheckKind::Transform,
            "structure" => CheckKind::Structure,
            "pec" => CheckKind::Pec,
            "reflected" => CheckKind::Reflected,
            "free_space" | "free-space" => CheckKind::FreeSpace,
            "neumann" => CheckKind::Neumann,
            other => return Err(Error::Config(format!("unknown check {other:?}"))),
        })
    }

    // Checks whose outcome depends on the basis degree.
    fn per_degree(self) -> bool {
        matches!(self, CheckKind::Structure | CheckKind::Pec | CheckKind::Reflected | CheckKind::FreeSpace)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationSelection {
    pub checks: Vec<CheckKind>,
    pub l_values: Vec<usize>,
    pub seed: u64,
}

impl Default for ValidationSelection {
    fn default() -> Self {
        ValidationSelection { checks: CheckKind::ALL.to_vec(), l_values: vec![8, 17], seed: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: CheckKind,
    pub name: String,
    pub l_max: Option<usize>,
    pub value: f64,
    pub threshold: f64,
    /// `value ≤ threshold` unless `at_least`, in which case `value ≥ threshold`.
    pub at_least: bool,
    pub passed: bool,
    pub seconds: f64,
}

impl CheckResult {
    fn new(check: CheckKind, name: &str, l_max: Option<usize>, value: f64, threshold: f64, at_least: bool) -> Self {
        let passed = if at_least { value >= threshold } else { value <= threshold };
        CheckResult { check, name: name.into(), l_max, value, threshold, at_least, passed, seconds: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6} {:<44} {:>5} {:>12} {:>12}", "status", "check", "L", "value", "threshold");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<6} {:<44} {:>5} {:>12.3e} {}{:>11.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.l_max.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
                c.value,
                if c.at_least { "≥" } else { "≤" },
                c.threshold
            );
        }
        let n_fail = self.checks.iter().filter(|c| !c.passed).count();
        let _ = write!(s, "{} checks, {} failed", self.checks.len(), n_fail);
        s
    }
}

fn omega() -> f64 {
    2.0 * PI * DEFAULT_FREQUENCY
}

/// Every SVWF index up to degree `l_max`.
pub fn indices_up_to(l_max: usize) -> Result<Vec<SvwfIndex>> {
    Ok(SvwfBasis::new(l_max)?.indices().to_vec())
}

pub fn run_validate(sel: &ValidationSelection) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for &kind in &sel.checks {
        if kind.per_degree() {
            for &l in &sel.l_values {
                checks.extend(timed(|| run_check(kind, Some(l), sel.seed))?);
            }
        } else {
            checks.extend(timed(|| run_check(kind, None, sel.seed))?);
        }
    }
    Ok(ValidationReport { seed: sel.seed, checks })
}

fn timed(f: impl FnOnce() -> Result<Vec<CheckResult>>) -> Result<Vec<CheckResult>> {
    let t = std::time::Instant::now();
    let mut out = f()?;
    let dt = t.elapsed().as_secs_f64() / out.len().max(1) as f64;
    for c in &mut out {
        c.seconds = dt;
    }
    Ok(out)
}

fn run_check(kind: CheckKind, l_max: Option<usize>, seed: u64) -> Result<Vec<CheckResult>> {
    let omega = omega();
    let k = omega / crate::C0;
    let kr = k * DEFAULT_R_MIN;
    let z = DEFAULT_Z_INTERFACE;
    Ok(match kind {
        CheckKind::Fresnel => {
            let e = check_fresnel(100, seed, DEFAULT_FREQUENCY)?;
            vec![CheckResult::new(kind, "reflection recursion vs transfer matrix", None, e, 1e-12, false)]
        }
        CheckKind::Transform => {
            let r_hi = 2.0f64.min(k * z.abs() / 2.0) / k;
            let pts = shell_sample_points(1.0 / k, r_hi, 20, seed);
            let mut worst: f64 = 0.0;
            for n in indices_up_to(3)? {
                worst = worst.max(check_transform_identity(&n, k, &pts, (64, 64))?);
            }
            vec![CheckResult::new(kind, "spherical/planar transform identity", None, worst, 1e-6, false)]
        }
        CheckKind::Structure => {
            let l = l_max.expect("per-degree check");
            let basis = SvwfBasis::new(l)?;
            let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.01)?, z)?;
            let contour = ContourSpec::from_rule(l, kr, DEFAULT_IOTA)?;
            let w = WAssembler::new(&basis, &contour)?.assemble_full(&stack, k, omega)?;
            let rel = w.symmetry_error() / w.max_abs().max(1e-300);
            let idx = basis.indices();
            let off_order = w
                .blocks()
                .iter()
                .flat_map(|b| b.positions.iter().map(move |&p| (b.m, p)))
                .filter(|&(m, p)| idx[p].m != m)
                .count();
            vec![
                CheckResult::new(kind, "W symmetry (relative)", Some(l), rel, 1e-12, false),
                CheckResult::new(kind, "W entries coupling different m", Some(l), off_order as f64, 0.0, false),
            ]
        }
        CheckKind::Pec => {
            let l = l_max.expect("per-degree check");
            let basis = SvwfBasis::new(l)?;
            let stack = LayerStack::pec(z)?;
            let contour = ContourSpec::from_rule(l, kr, DEFAULT_IOTA)?;
            // Inside |r| < 2|z_I|, where the regular-wave expansion of the
            // image field converges.
            let pts = interface_sample_points(z, 0.5 * z.abs(), 24, seed);
            let sources = default_sources(&basis);
            let w = assemble_w(&basis, &stack, k, omega, &contour)?;
            let res = check_pec_boundary(&w, z, k, &sources, &pts)?;
            let flipped = ContourSpec { reverse_evanescent: true, ..contour };
            let wf = assemble_w(&basis, &stack, k, omega, &flipped)?;
            let neg = check_pec_boundary(&wf, z, k, &sources, &pts)?;
            vec![
                CheckResult::new(kind, "PEC tangential residual", Some(l), res, 1e-3, false),
                CheckResult::new(kind, "PEC residual, reversed evanescent leg", Some(l), neg, 0.1, true),
            ]
        }
        CheckKind::Reflected => {
            let l = l_max.expect("per-degree check");
            let basis = SvwfBasis::new(l)?;
            let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.0)?, z)?;
            let contour = ContourSpec::from_rule(l, kr, DEFAULT_IOTA)?;
            let w = assemble_w(&basis, &stack, k, omega, &contour)?;
            let reference = contour.with_orders(2 * DEFAULT_QUAD_ORDER, 2 * DEFAULT_QUAD_ORDER)?;
            let pts = shell_sample_points(1.0 / k, 2.0f64.min(k * z.abs() / 2.0) / k, 20, seed);
            let mut worst: f64 = 0.0;
            for n in default_sources(&basis) {
                worst = worst.max(check_reflected_field(&n, &stack, omega, &w, &reference, 64, &pts)?);
            }
            vec![CheckResult::new(kind, "reflected field vs direct integral", Some(l), worst, 1e-4, false)]
        }
        CheckKind::FreeSpace => {
            let l = l_max.expect("per-degree check");
            let basis = SvwfBasis::new(l)?;
            let gsm = synthesize_gsm(
                &SyntheticGsmSpec::RandomPassive { seed, ports: 2, radius: 0.5, kr },
                &basis,
                DEFAULT_FREQUENCY,
            )?;
            let stack = LayerStack::half_space(Medium::VACUUM, z)?;
            let w = assemble_w(&basis, &stack, k, omega, &ContourSpec::from_rule(l, kr, DEFAULT_IOTA)?)?;
            let g = gamma_composite(&gsm, &w, &SolveOptions::default())?;
            vec![CheckResult::new(
                kind,
                "identical media: composite equals GSM reflection",
                Some(l),
                max_abs_diff(g.as_ref(), gsm.gamma.as_ref()),
                1e-14,
                false,
            )]
        }
        CheckKind::Neumann => {
            let study = neumann_study(seed, 40)?;
            let monotone = study.deviations.windows(2).all(|w| w[1] <= w[0]);
            vec![
                CheckResult::new(
                    kind,
                    "order-40 series vs direct solve",
                    Some(study.l_max),
                    *study.deviations.last().expect("orders"),
                    1e-10,
                    false,
                ),
                CheckResult::new(
                    kind,
                    "series deviation monotone in order",
                    Some(study.l_max),
                    if monotone { 1.0 } else { 0.0 },
                    1.0,
                    true,
                ),
            ]
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NeumannStudy {
    pub l_max: usize,
    pub spectral_radius: f64,
    /// Max |Γᶜ_N − Γᶜ_direct| for N = 1..=max_order.
    pub deviations: Vec<f64>,
}

/// Reflection-order convergence on a degree-3 random GSM whose feedback
/// kernel above a lossy dielectric has spectral radius 0.5.
pub fn neumann_study(seed: u64, max_order: usize) -> Result<NeumannStudy> {
    let l = 3;
    let basis = SvwfBasis::new(l)?;
    let omega = omega();
    let k = omega / crate::C0;
    let stack = LayerStack::half_space(Medium::dielectric(9.0, 0.05)?, -0.05)?;
    let w = assemble_w(&basis, &stack, k, omega, &ContourSpec::from_rule(l, k * 0.02, DEFAULT_IOTA)?)?;
    let gsm = synthesize_gsm(
        &SyntheticGsmSpec::RandomPassive { seed, ports: 2, radius: 0.5, kr: 1.0 },
        &basis,
        DEFAULT_FREQUENCY,
    )?;
    let gsm: GsmBlocks = scale_to_feedback_radius(&gsm, &w, 0.5)?;
    let orders: Vec<usize> = (1..=max_order).collect();
    let study = reflection_order_study(&gsm, &w, &orders)?;
    Ok(NeumannStudy {
        l_max: l,
        spectral_radius: crate::interaction::feedback_spectral_radius(&gsm, &w)?,
        deviations: study.orders.iter().map(|o| o.2).collect(),
    })
}

/// Error-map scenario: a degree-tapered random GSM radiating above a lossy
/// half-space, evaluated over a band.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorMapSpec {
    pub l_values: Vec<usize>,
    pub kappa_values: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub z_interface: f64,
    pub r_min: f64,
    pub eps_r: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for ErrorMapSpec {
    fn default() -> Self {
        ErrorMapSpec {
            l_values: vec![4, 6, 8, 10, 12, 14, 16, 18],
            kappa_values: vec![1.02, 1.1, 1.2, 1.3, 1.5, 2.0],
            frequencies: vec![3.2e9, 3.5e9, 3.8e9],
            z_interface: DEFAULT_Z_INTERFACE,
            r_min: DEFAULT_R_MIN,
            eps_r: 4.0,
            sigma: 0.01,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorMap {
    pub spec: ErrorMapSpec,
    pub reference_l_max: usize,
    pub reference_kappa: f64,
    pub reference_quad_order: usize,
    /// Truncation rule at the lowest frequency (largest wavelength).
    pub rule_l_max: usize,
    pub rule_kappa: f64,
    /// `errors[a][b]`: max over frequencies and port pairs of |ΔΓᶜ| at
    /// `l_values[a]`, `kappa_values[b]`.
    pub errors: Vec<Vec<f64>>,
}

impl ErrorMap {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l_max,kappa,max_abs_error\n");
        for (a, l) in self.spec.l_values.iter().enumerate() {
            for (b, kappa) in self.spec.kappa_values.iter().enumerate() {
                let _ = writeln!(s, "{l},{kappa:?},{:e}", self.errors[a][b]);
            }
        }
        s
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:>6}", "L\\κ");
        for kappa in &self.spec.kappa_values {
            let _ = write!(s, " {kappa:>9.3}");
        }
        for (a, l) in self.spec.l_values.iter().enumerate() {
            let _ = write!(s, "\n{l:>6}");
            for e in &self.errors[a] {
                let _ = write!(s, " {e:>9.1e}");
            }
        }
        let _ = write!(
            s,
            "\nreference: L = {}, κ̃ = {:.3}, {} nodes per leg; rule: L = {}, κ̃ = {:.4}",
            self.reference_l_max, self.reference_kappa, self.reference_quad_order, self.rule_l_max, self.rule_kappa
        );
        s
    }

    /// Column of the grid κ̃ nearest to `kappa`.
    pub fn kappa_column(&self, kappa: f64) -> usize {
        let mut best = 0;
        for (b, k) in self.spec.kappa_values.iter().enumerate() {
            if (k - kappa).abs() < (self.spec.kappa_values[best] - kappa).abs() {
                best = b;
            }
        }
        best
    }
}

/// Shape of the low-error region of an error map for a threshold `tol`.
#[derive(Debug, Clone, Serialize)]
pub struct BasinCheck {
    pub tol: f64,
    /// In every κ̃ column, once a degree reaches the basin all larger
    /// degrees stay in it.
    pub monotone_in_l: bool,
    /// Every grid cell with `L ≥` the rule degree is in the basin.
    pub rule_region_inside: bool,
    /// Every κ̃ column (all exceed 1) reaches the basin.
    pub every_kappa_reaches: bool,
    /// Smallest degree in the basin, per κ̃ column.
    pub entry_degree: Vec<Option<usize>>,
}

impl BasinCheck {
    pub fn passed(&self) -> bool {
        self.monotone_in_l && self.rule_region_inside && self.every_kappa_reaches
    }
}

impl ErrorMap {
    pub fn basin(&self, tol: f64) -> BasinCheck {
        let mut order: Vec<usize> = (0..self.spec.l_values.len()).collect();
        order.sort_by_key(|&a| self.spec.l_values[a]);
        let mut monotone = true;
        let mut rule_inside = true;
        let mut entry = Vec::with_capacity(self.spec.kappa_values.len());
        for b in 0..self.spec.kappa_values.len() {
            let inside: Vec<bool> = order.iter().map(|&a| self.errors[a][b] <= tol).collect();
            if let Some(first) = inside.iter().position(|&x| x) {
                monotone &= inside[first..].iter().all(|&x| x);
                entry.push(Some(self.spec.l_values[order[first]]));
            } else {
                entry.push(None);
            }
            for (&a, &ok) in order.iter().zip(&inside) {
                if self.spec.l_values[a] >= self.rule_l_max && !ok {
                    rule_inside = false;
                }
            }
        }
        BasinCheck {
            tol,
            monotone_in_l: monotone,
            rule_region_inside: rule_inside,
            every_kappa_reaches: entry.iter().all(Option::is_some),
            entry_degree: entry,
        }
    }
}

/// Max |ΔΓᶜ| over the (L_max, κ̃) grid against a reference at
/// `max(L) + 4` with doubled quadrature orders and `κ̃` no smaller than the
/// largest grid value or the rule at the reference degree.
pub fn run_error_map(spec: &ErrorMapSpec) -> Result<ErrorMap> {
    if spec.l_values.is_empty() || spec.kappa_values.is_empty() || spec.frequencies.is_empty() {
        return Err(Error::Config("error map needs degrees, κ̃ values and frequencies".into()));
    }
    let l_top = *spec.l_values.iter().max().expect("non-empty");
    let l_ref = l_top + 4;
    let f_low = spec.frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let kr_low = 2.0 * PI * f_low / crate::C0 * spec.r_min;
    let rule_l = lmax_rule(kr_low)?;
    let rule_kappa = kappa_rule(rule_l, kr_low, DEFAULT_IOTA)?;
    let kappa_ref = spec.kappa_values.iter().copied().fold(kappa_rule(l_ref.min(20), kr_low, DEFAULT_IOTA)?, f64::max);
    let ref_order = 2 * DEFAULT_QUAD_ORDER;
    let stack = LayerStack::half_space(Medium::dielectric(spec.eps_r, spec.sigma)?, spec.z_interface)?;
    let basis_ref = SvwfBasis::new(l_ref)?;

    let mut errors = vec![vec![0.0f64; spec.kappa_values.len()]; spec.l_values.len()];
    for &f in &spec.frequencies {
        let omega = 2.0 * PI * f;
        let k = stack.top_wavenumber(omega);
        let gsm_ref = synthesize_gsm(
            &SyntheticGsmSpec::RandomPassive { seed: spec.seed, ports: 2, radius: 0.5, kr: k * spec.r_min },
            &basis_ref,
            f,
        )?;
        let contour_ref = ContourSpec::new(kappa_ref)?.with_orders(ref_order, ref_order)?;
        let w_ref = assemble_w(&basis_ref, &stack, k, omega, &contour_ref)?;
        let g_ref = gamma_composite(&gsm_ref, &w_ref, &SolveOptions::default())?;
        for (a, &l) in spec.l_values.iter().enumerate() {
            let gsm = gsm_ref.truncate(l)?;
            for (b, &kappa) in spec.kappa_values.iter().enumerate() {
                let w = assemble_w(&gsm.basis, &stack, k, omega, &ContourSpec::new(kappa)?)?;
                let g = gamma_composite(&gsm, &w, &SolveOptions::default())?;
                errors[a][b] = errors[a][b].max(max_abs_diff(g.as_ref(), g_ref.as_ref()));
            }
        }
    }
    Ok(ErrorMap {
        spec: spec.clone(),
        reference_l_max: l_ref,
        reference_kappa: kappa_ref,
        reference_quad_order: ref_order,
        rule_l_max: rule_l,
        rule_kappa,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_check_names() {
        for k in CheckKind::ALL {
            let name = serde_json::to_value(k).unwrap().as_str().unwrap().to_string();
            assert_eq!(CheckKind::parse(&name).unwrap(), k);
        }
        assert!(CheckKind::parse("bogus").is_err());
    }

    #[test]
    fn small_report_is_deterministic() {
        let sel = ValidationSelection {
            checks: vec![CheckKind::Structure, CheckKind::FreeSpace],
            l_values: vec![3],
            seed: 4,
        };
        let a = run_validate(&sel).unwrap();
        let b = run_validate(&sel).unwrap();
        assert!(a.all_passed(), "{}", a.table());
        let values = |r: &ValidationReport| r.checks.iter().map(|c| c.value).collect::<Vec<_>>();
        assert_eq!(values(&a), values(&b));
    }
}
