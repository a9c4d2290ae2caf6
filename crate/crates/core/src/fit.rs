//! Inverse fitting of stack parameters to observed Γᶜ by least squares,
//! `Σ_f Σ_ij |Γᶜ_model − Γᶜ_obs|²`.
//!
//! Free parameters are optimized in box-normalized coordinates `y ∈ [0, 1]`
//! (values outside are clamped to the bounds).

use std::time::Instant;

use faer::{c64, Mat};
use serde::Serialize;

use crate::config::{FitConfig, FitMethod, FreeParameter};
use crate::error::{Error, Result};
use crate::fresnel::LayerStack;
use crate::output::read_csv;
use crate::sweep::{dispatch, Engine, RunOptions};

pub struct FitProblem<'a> {
    engine: &'a Engine,
    template: LayerStack,
    free: Vec<FreeParameter>,
    frequencies: Vec<f64>,
    observed: Vec<Mat<c64>>,
}

impl<'a> FitProblem<'a> {
    pub fn new(
        engine: &'a Engine,
        template: LayerStack,
        free: Vec<FreeParameter>,
        frequencies: Vec<f64>,
        observed: Vec<Mat<c64>>,
    ) -> Result<Self> {
        if frequencies.len() != observed.len() || frequencies.is_empty() {
            return Err(Error::Validation("need one observed matrix per frequency".into()));
        }
        for g in &observed {
            if g.nrows() != engine.ports() || g.ncols() != engine.ports() {
                return Err(Error::Validation(format!(
                    "observed data has {}×{} entries, GSM has {} ports",
                    g.nrows(),
                    g.ncols(),
                    engine.ports()
                )));
            }
        }
        for p in &free {
            p.parameter.get(&template)?;
        }
        Ok(FitProblem { engine, template, free, frequencies, observed })
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    fn to_values(&self, y: &[f64]) -> Vec<f64> {
        self.free.iter().zip(y).map(|(p, &t)| p.lower + t.clamp(0.0, 1.0) * (p.upper - p.lower)).collect()
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().zip(x).map(|(p, &v)| (v - p.lower) / (p.upper - p.lower)).collect()
    }

    /// Stack with the free parameters set to `values`.
    pub fn stack(&self, values: &[f64]) -> Result<LayerStack> {
        let mut s = self.template.clone();
        for (p, &v) in self.free.iter().zip(values) {
            p.parameter.apply(&mut s, v)?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Misfit at physical parameter values.
    pub fn misfit(&self, values: &[f64]) -> Result<f64> {
        let stack = self.stack(values)?;
        let mut total = 0.0;
        for (f, obs) in self.frequencies.iter().zip(&self.observed) {
            let g = self.engine.evaluate(&stack, *f)?.gamma_c;
            for j in 0..g.ncols() {
                for i in 0..g.nrows() {
                    total += (g[(i, j)] - obs[(i, j)]).norm_sqr();
                }
            }
        }
        Ok(total)
    }

    // Unit-coordinate objective; parameter sets the stack rejects score +∞.
    fn objective(&self, y: &[f64]) -> Result<f64> {
        match self.misfit(&self.to_values(y)) {
            Ok(v) => Ok(v),
            Err(Error::Validation(msg)) => {
                log::debug!("rejected trial point: {msg}");
                Ok(f64::INFINITY)
            }
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub parameters: Vec<(String, f64)>,
    pub misfit: f64,
    /// Misfit of every forward evaluation, in order.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    /// Forward solves (one per frequency per evaluation).
    pub forward_solves: usize,
    pub converged: bool,
    pub warning: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    pub method: FitMethod,
    pub max_evaluations: usize,
    pub tolerance: f64,
    pub threads: Option<usize>,
}

struct Tracked<'p, 'a> {
    problem: &'p FitProblem<'a>,
    trace: Vec<f64>,
    best: (f64, Vec<f64>),
}

impl Tracked<'_, '_> {
    fn eval(&mut self, y: &[f64]) -> Result<f64> {
        let v = self.problem.objective(y)?;
        self.record(y, v);
        Ok(v)
    }

    fn record(&mut self, y: &[f64], v: f64) {
        self.trace.push(v);
        if v < self.best.0 {
            self.best = (v, y.to_vec());
        }
    }
}

pub fn fit(problem: &FitProblem<'_>, settings: &OptimizerSettings) -> Result<FitResult> {
    let start = Instant::now();
    let y0 = problem.to_unit(&problem.free.iter().map(|p| p.start).collect::<Vec<_>>());
    let mut t = Tracked { problem, trace: Vec::new(), best: (f64::INFINITY, y0.clone()) };
    let converged = if problem.dimension() == 0 {
        t.eval(&[])?;
        true
    } else {
        match settings.method {
            FitMethod::NelderMead => nelder_mead(&mut t, &y0, 0.1, settings.max_evaluations, settings.tolerance)?,
            FitMethod::GridThenRefine => {
                let d = problem.dimension();
                let per_axis =
                    ((settings.max_evaluations as f64 / 2.0).powf(1.0 / d as f64).floor() as usize).clamp(3, 21);
                let nodes = per_axis.pow(d as u32);
                let grid: Vec<Vec<f64>> = (0..nodes)
                    .map(|mut k| {
                        (0..d)
                            .map(|_| {
                                let c = k % per_axis;
                                k /= per_axis;
                                (c as f64 + 0.5) / per_axis as f64
                            })
                            .collect()
                    })
                    .collect();
                let (values, _) = dispatch(grid.len(), settings.threads, |i| problem.objective(&grid[i]))?;
                for (y, v) in grid.iter().zip(values) {
                    t.record(y, v);
                }
                let from = t.best.1.clone();
                let remaining = settings.max_evaluations.saturating_sub(t.trace.len()).max(d + 2);
                nelder_mead(&mut t, &from, 0.5 / per_axis as f64, remaining, settings.tolerance)?
            }
        }
    };
    let (misfit, y) = t.best.clone();
    let values = problem.to_values(&y);
    let warning = (!converged).then(|| {
        format!(
            "optimizer stopped after {} evaluations without meeting the tolerance; returning best so far",
            t.trace.len()
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(FitResult {
        parameters: problem.free.iter().zip(values).map(|(p, v)| (p.parameter.to_string(), v)).collect(),
        misfit,
        evaluations: t.trace.len(),
        forward_solves: t.trace.len() * problem.frequencies.len(),
        trace: t.trace,
        converged,
        warning,
        seconds: start.elapsed().as_secs_f64(),
    })
}

// Nelder–Mead with standard coefficients. Converged once the simplex
// values agree to `ftol` and its vertices to 1e-7 in unit coordinates,
// or the simplex collapses below 1e-12.
fn nelder_mead(t: &mut Tracked<'_, '_>, y0: &[f64], step: f64, max_evals: usize, ftol: f64) -> Result<bool> {
    let d = y0.len();
    let budget_end = t.trace.len() + max_evals;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((y0.to_vec(), t.eval(y0)?));
    for i in 0..d {
        let mut y = y0.to_vec();
        y[i] += if y[i] + step <= 1.0 { step } else { -step };
        let v = t.eval(&y)?;
        simplex.push((y, v));
    }
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(y, _)| y.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread <= ftol && diameter <= 1e-7) || diameter <= 1e-12 {
            return Ok(true);
        }
        if t.trace.len() >= budget_end {
            return Ok(false);
        }
        let centroid: Vec<f64> =
            (0..d).map(|k| simplex[..d].iter().map(|(y, _)| y[k]).sum::<f64>() / d as f64).collect();
        let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&simplex[d].0).map(|(m, w)| m + c * (m - w)).collect() };
        let yr = along(1.0);
        let fr = t.eval(&yr)?;
        if fr < simplex[0].1 {
            let ye = along(2.0);
            let fe = t.eval(&ye)?;
            simplex[d] = if fe < fr { (ye, fe) } else { (yr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (yr, fr);
        } else {
            let (yc, fc) = if fr < simplex[d].1 {
                let y = along(0.5);
                let f = t.eval(&y)?;
                (y, f)
            } else {
                let y = along(-0.5);
                let f = t.eval(&y)?;
                (y, f)
            };
            if fc < fr.min(simplex[d].1) {
                simplex[d] = (yc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let y: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let f = t.eval(&y)?;
                    *v = (y, f);
                }
            }
        }
    }
}

pub fn run_fit(cfg: &FitConfig, run: &RunOptions) -> Result<FitResult> {
    cfg.validate()?;
    let observed = read_csv(std::fs::File::open(&cfg.fit.observed)?)?;
    let gsm = cfg.gsm.load(&observed.frequencies)?;
    let engine = Engine::new(gsm, cfg.contour.clone(), cfg.solve.options()?)?.with_cache_dir(run.cache_dir.clone())?;
    let problem =
        FitProblem::new(&engine, cfg.stack.build()?, cfg.free_parameters()?, observed.frequencies, observed.gamma_c)?;
    fit(
        &problem,
        &OptimizerSettings {
            method: cfg.fit.method,
            max_evaluations: cfg.fit.max_evaluations,
            tolerance: cfg.fit.tolerance,
            threads: run.threads,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ContourConfig, ParamPath};
    use crate::fresnel::Medium;
    use crate::gsmio::{synthesize_gsm, GsmFile, SyntheticGsmSpec};
    use crate::interaction::SolveOptions;
    use crate::waves::SvwfBasis;

    fn engine(freqs: &[f64]) -> Engine {
        let basis = SvwfBasis::new(3).unwrap();
        let spec = SyntheticGsmSpec::RandomPassive { seed: 11, ports: 1, radius: 0.4, kr: 2.0 };
        let blocks = freqs.iter().map(|&f| synthesize_gsm(&spec, &basis, f).unwrap()).collect();
        Engine::new(GsmFile::new("t", 0.05, blocks).unwrap(), ContourConfig::default(), SolveOptions::default())
            .unwrap()
    }

    #[test]
    fn zero_free_parameters_only_evaluates() {
        let e = engine(&[3.5e9]);
        let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.0).unwrap(), -0.1).unwrap();
        let obs = vec![e.evaluate(&stack, 3.5e9).unwrap().gamma_c];
        let p = FitProblem::new(&e, stack, vec![], vec![3.5e9], obs).unwrap();
        let r = fit(
            &p,
            &OptimizerSettings { method: FitMethod::NelderMead, max_evaluations: 50, tolerance: 1e-12, threads: None },
        )
        .unwrap();
        assert_eq!(r.evaluations, 1);
        assert_eq!(r.misfit, 0.0);
        assert!(r.parameters.is_empty());
    }

    #[test]
    fn budget_exhaustion_warns() {
        let e = engine(&[3.5e9]);
        let truth = LayerStack::half_space(Medium::dielectric(4.0, 0.0).unwrap(), -0.1).unwrap();
        let obs = vec![e.evaluate(&truth, 3.5e9).unwrap().gamma_c];
        let free = vec![FreeParameter {
            parameter: ParamPath::parse("termination.eps_r").unwrap(),
            start: 2.0,
            lower: 1.0,
            upper: 20.0,
        }];
        let p = FitProblem::new(&e, truth, free, vec![3.5e9], obs).unwrap();
        let r = fit(
            &p,
            &OptimizerSettings { method: FitMethod::NelderMead, max_evaluations: 3, tolerance: 0.0, threads: None },
        )
        .unwrap();
        assert!(!r.converged && r.warning.is_some());
        assert!(r.misfit.is_finite());
    }
}
