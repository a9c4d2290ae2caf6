//! Forward-evaluation engine and parameter sweeps.
//!
//! An [`Engine`] holds a GSM prepared for repeated solves, caches contour
//! tables per (degree, contour) and assembled 𝒲 matrices per fingerprint,
//! and optionally persists 𝒲 to a cache directory.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use faer::{c64, Mat};
use serde::Serialize;

use crate::config::{Axis, ContourConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::fresnel::LayerStack;
use crate::gsmio::GsmFile;
use crate::interaction::{PreparedGsm, SolveOptions};
use crate::wmatrix::{wmatrix_fingerprint, ContourSpec, WAssembler, WMatrix};

// Memory-cache size bound; 𝒲 at degree 17 is about 0.5 MB.
const W_CACHE_CAPACITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WSource {
    Assembled,
    Memory,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointTiming {
    pub w_seconds: f64,
    pub solve_seconds: f64,
    pub w_source: WSource,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub gamma_c: Mat<c64>,
    pub rcond: Option<f64>,
    pub w_fingerprint: String,
    pub timing: PointTiming,
}

pub struct Engine {
    gsm: GsmFile,
    prepared: Vec<PreparedGsm>,
    contour: ContourConfig,
    opts: SolveOptions,
    assemblers: Mutex<Vec<(ContourSpec, Arc<WAssembler>)>>,
    w_cache: Mutex<HashMap<String, Arc<WMatrix>>>,
    cache_dir: Option<PathBuf>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("l_max", &self.l_max())
            .field("frequencies", &self.gsm.header.frequencies_hz)
            .field("opts", &self.opts)
            .finish()
    }
}

impl Engine {
    /// Prepare `gsm`, truncated to `contour.l_max` when given.
    pub fn new(gsm: GsmFile, contour: ContourConfig, opts: SolveOptions) -> Result<Self> {
        opts.validate()?;
        let gsm = match contour.l_max {
            Some(l) if l < gsm.header.l_max => {
                let blocks = gsm.blocks.iter().map(|b| b.truncate(l)).collect::<Result<Vec<_>>>()?;
                GsmFile::new(gsm.header.antenna.clone(), gsm.header.r_min_m, blocks)?
            }
            Some(l) if l > gsm.header.l_max => {
                return Err(Error::Config(format!("requested degree {l} exceeds the GSM degree {}", gsm.header.l_max)))
            }
            _ => gsm,
        };
        let prepared = gsm.blocks.iter().map(PreparedGsm::new).collect::<Result<Vec<_>>>()?;
        Ok(Engine {
            gsm,
            prepared,
            contour,
            opts,
            assemblers: Mutex::new(Vec::new()),
            w_cache: Mutex::new(HashMap::new()),
            cache_dir: None,
        })
    }

    pub fn with_cache_dir(mut self, dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        self.cache_dir = dir;
        Ok(self)
    }

    pub fn gsm(&self) -> &GsmFile {
        &self.gsm
    }

    pub fn l_max(&self) -> usize {
        self.gsm.header.l_max
    }

    pub fn ports(&self) -> usize {
        self.gsm.header.ports
    }

    pub fn options(&self) -> &SolveOptions {
        &self.opts
    }

    fn prepared_at(&self, frequency: f64) -> Result<&PreparedGsm> {
        self.prepared.iter().find(|p| (p.frequency() - frequency).abs() <= 1e-9 * frequency.abs()).ok_or_else(|| {
            Error::MissingFrequency { requested: frequency, available: self.gsm.header.frequencies_hz.clone() }
        })
    }

    /// Contour for `stack` at `frequency`: the configured κ̃, or the
    /// truncation rule with `kR_min` from the GSM's minimum sphere.
    pub fn contour_for(&self, stack: &LayerStack, frequency: f64) -> Result<ContourSpec> {
        let k = stack.top_wavenumber(2.0 * PI * frequency);
        self.contour.contour(self.l_max(), k * self.gsm.header.r_min_m)
    }

    fn assembler(&self, contour: &ContourSpec) -> Result<Arc<WAssembler>> {
        if let Some((_, a)) = self.assemblers.lock().expect("poisoned").iter().find(|(c, _)| c == contour) {
            return Ok(a.clone());
        }
        let basis = self.prepared[0].basis();
        let a = Arc::new(WAssembler::new(basis, contour)?);
        let mut list = self.assemblers.lock().expect("poisoned");
        if let Some((_, existing)) = list.iter().find(|(c, _)| c == contour) {
            return Ok(existing.clone());
        }
        list.push((*contour, a.clone()));
        Ok(a)
    }

    fn cache_path(&self, fingerprint: &str) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("w-{fingerprint}.bin")))
    }

    /// 𝒲 for `stack` at `frequency`, from cache when the fingerprint of
    /// (stack, frequency, degree, contour) has been seen.
    pub fn wmatrix(&self, stack: &LayerStack, frequency: f64) -> Result<(Arc<WMatrix>, WSource)> {
        stack.validate()?;
        let contour = self.contour_for(stack, frequency)?;
        let omega = 2.0 * PI * frequency;
        // Assembly records the frequency as ω/2π; key on that same value.
        let key = wmatrix_fingerprint(&stack.fingerprint(), omega / (2.0 * PI), self.l_max(), &contour);
        if let Some(w) = self.w_cache.lock().expect("poisoned").get(&key) {
            return Ok((w.clone(), WSource::Memory));
        }
        let (w, source) = match self.cache_path(&key).filter(|p| p.exists()) {
            Some(path) => (load_cached(&path, &key)?, WSource::Disk),
            None => {
                let w = self.assembler(&contour)?.assemble(stack, stack.top_wavenumber(omega), omega)?;
                if let Some(path) = self.cache_path(&key) {
                    store_cached(&w, &path)?;
                }
                (w, WSource::Assembled)
            }
        };
        let w = Arc::new(w);
        let mut cache = self.w_cache.lock().expect("poisoned");
        if cache.len() >= W_CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, w.clone());
        Ok((w, source))
    }

    /// Γᶜ for one stack and frequency.
    pub fn evaluate(&self, stack: &LayerStack, frequency: f64) -> Result<Evaluation> {
        let prepared = self.prepared_at(frequency)?;
        let t0 = Instant::now();
        let (w, w_source) = self.wmatrix(stack, frequency)?;
        let t1 = Instant::now();
        let sol = prepared.solve(&w, &self.opts)?;
        let t2 = Instant::now();
        Ok(Evaluation {
            gamma_c: sol.gamma_c,
            rcond: sol.rcond,
            w_fingerprint: w.fingerprint(),
            timing: PointTiming {
                w_seconds: (t1 - t0).as_secs_f64(),
                solve_seconds: (t2 - t1).as_secs_f64(),
                w_source,
            },
        })
    }
}

fn load_cached(path: &Path, key: &str) -> Result<WMatrix> {
    let w = WMatrix::read_binary(std::fs::File::open(path)?)?;
    if w.fingerprint() != key {
        return Err(Error::Format(format!("cache file {} holds a different 𝒲", path.display())));
    }
    Ok(w)
}

fn store_cached(w: &WMatrix, path: &Path) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        w.write_binary(&mut out)?;
        std::io::Write::flush(&mut out)?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub index: usize,
    pub frequency: f64,
    /// Values of the swept stack parameters, in axis order.
    pub params: Vec<f64>,
    pub gamma_c: Mat<c64>,
    pub rcond: Option<f64>,
    pub timing: PointTiming,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TimingReport {
    pub points: usize,
    pub threads: usize,
    pub w_assembled: usize,
    pub w_memory_hits: usize,
    pub w_disk_hits: usize,
    pub w_seconds_total: f64,
    pub solve_seconds_total: f64,
    /// Mean 𝒲 time over points where 𝒲 was assembled.
    pub mean_w_assembly_ms: f64,
    pub mean_solve_ms: f64,
    pub max_point_ms: f64,
    pub wall_seconds: f64,
}

impl TimingReport {
    fn from_records(records: &[SweepRecord], threads: usize, wall: f64) -> Self {
        let mut r = TimingReport { points: records.len(), threads, wall_seconds: wall, ..Default::default() };
        let mut assembled_secs = 0.0;
        for rec in records {
            let t = &rec.timing;
            match t.w_source {
                WSource::Assembled => {
                    r.w_assembled += 1;
                    assembled_secs += t.w_seconds;
                }
                WSource::Memory => r.w_memory_hits += 1,
                WSource::Disk => r.w_disk_hits += 1,
            }
            r.w_seconds_total += t.w_seconds;
            r.solve_seconds_total += t.solve_seconds;
            r.max_point_ms = r.max_point_ms.max(1e3 * (t.w_seconds + t.solve_seconds));
        }
        if r.w_assembled > 0 {
            r.mean_w_assembly_ms = 1e3 * assembled_secs / r.w_assembled as f64;
        }
        if r.points > 0 {
            r.mean_solve_ms = 1e3 * r.solve_seconds_total / r.points as f64;
        }
        r
    }
}

impl std::fmt::Display for TimingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "points            {}", self.points)?;
        writeln!(f, "threads           {}", self.threads)?;
        writeln!(
            f,
            "W matrices        {} assembled, {} from memory, {} from disk",
            self.w_assembled, self.w_memory_hits, self.w_disk_hits
        )?;
        writeln!(f, "W assembly        {:.3} ms mean per assembly", self.mean_w_assembly_ms)?;
        writeln!(f, "solve             {:.3} ms mean per point", self.mean_solve_ms)?;
        writeln!(f, "slowest point     {:.3} ms", self.max_point_ms)?;
        write!(f, "wall time         {:.3} s", self.wall_seconds)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub param_names: Vec<String>,
    pub port_labels: Vec<String>,
    pub records: Vec<SweepRecord>,
    pub timing: TimingReport,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; the global pool when `None`.
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
}

/// Sweep points as (frequency, parameter values): the cartesian product of
/// the axes in listed order, with frequency varying fastest.
pub fn sweep_points(frequencies: &[f64], axes: &[Axis]) -> Vec<(f64, Vec<f64>)> {
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    combos.into_iter().flat_map(|c| frequencies.iter().map(move |&f| (f, c.clone()))).collect()
}

pub fn run_sweep(cfg: &SweepConfig, run: &RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let frequencies = cfg.frequencies()?;
    let axes = cfg.axes()?;
    let template = cfg.stack.build()?;
    let gsm = cfg.gsm.load(&frequencies)?;
    let engine = Engine::new(gsm, cfg.contour.clone(), cfg.solve.options()?)?.with_cache_dir(run.cache_dir.clone())?;
    for &f in &frequencies {
        engine.prepared_at(f)?;
    }

    let points = sweep_points(&frequencies, &axes);
    let stacks = points
        .iter()
        .map(|(_, values)| {
            let mut stack = template.clone();
            for (axis, &v) in axes.iter().zip(values) {
                axis.parameter.apply(&mut stack, v)?;
            }
            stack.validate()?;
            Ok(stack)
        })
        .collect::<Result<Vec<_>>>()?;

    let start = Instant::now();
    let eval = |i: usize| -> Result<SweepRecord> {
        let (f, params) = &points[i];
        let e = engine.evaluate(&stacks[i], *f)?;
        Ok(SweepRecord {
            index: i,
            frequency: *f,
            params: params.clone(),
            gamma_c: e.gamma_c,
            rcond: e.rcond,
            timing: e.timing,
        })
    };
    let (records, threads) = dispatch(points.len(), run.threads, eval)?;
    let timing = TimingReport::from_records(&records, threads, start.elapsed().as_secs_f64());
    log::info!("sweep finished: {} points in {:.3} s", records.len(), timing.wall_seconds);
    Ok(SweepResult {
        param_names: axes.iter().map(|a| a.parameter.to_string()).collect(),
        port_labels: engine.gsm().header.port_labels.clone(),
        records,
        timing,
    })
}

/// Evaluate `f(0..n)` on a worker pool, returning results in index order.
#[cfg(feature = "parallel")]
pub fn dispatch<T: Send>(
    n: usize,
    threads: Option<usize>,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<(Vec<T>, usize)> {
    use rayon::prelude::*;
    let work = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<_>>>();
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {t} worker threads: {e}")))?;
            Ok((pool.install(work)?, t))
        }
        None => Ok((work()?, rayon::current_num_threads())),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn dispatch<T: Send>(
    n: usize,
    _threads: Option<usize>,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<(Vec<T>, usize)> {
    Ok(((0..n).map(f).collect::<Result<Vec<_>>>()?, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParamPath;

    #[test]
    fn points_vary_frequency_fastest() {
        let axes = vec![Axis { parameter: ParamPath::ZInterface, values: vec![-0.1, -0.2] }];
        let p = sweep_points(&[1.0, 2.0], &axes);
        assert_eq!(p, vec![(1.0, vec![-0.1]), (2.0, vec![-0.1]), (1.0, vec![-0.2]), (2.0, vec![-0.2])]);
        assert_eq!(sweep_points(&[1.0], &[]), vec![(1.0, vec![])]);
    }

    #[test]
    fn vacuum_point_returns_gsm_gamma() {
        let cfg = SweepConfig::from_toml(
            r#"
[gsm.synthetic]
kind = "random_passive"
seed = 3
l_max = 3
r_min = 0.05
[stack]
z_interface = -0.2
termination = { kind = "half_space" }
[sweep]
frequencies = [3.5e9]
"#,
        )
        .unwrap();
        let res = run_sweep(&cfg, &RunOptions::default()).unwrap();
        let gsm = cfg.gsm.load(&[3.5e9]).unwrap();
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.records[0].gamma_c, gsm.blocks[0].gamma);
    }

    #[test]
    fn disk_cache_reproduces_cold_results_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let basis = crate::waves::SvwfBasis::new(4).unwrap();
        let spec = crate::gsmio::SyntheticGsmSpec::RandomPassive { seed: 2, ports: 2, radius: 0.4, kr: 2.0 };
        let freqs = [3.2e9, 3.35e9, 3.7e9];
        let blocks = freqs.iter().map(|&f| crate::gsmio::synthesize_gsm(&spec, &basis, f).unwrap()).collect();
        let gsm = GsmFile::new("t", 0.05, blocks).unwrap();
        let stack = LayerStack::half_space(crate::fresnel::Medium::dielectric(5.0, 0.02).unwrap(), -0.15).unwrap();
        let make = || {
            Engine::new(gsm.clone(), ContourConfig::default(), SolveOptions::default())
                .unwrap()
                .with_cache_dir(Some(dir.path().to_path_buf()))
                .unwrap()
        };
        let cold = make();
        let warm = make();
        for f in freqs {
            let a = cold.evaluate(&stack, f).unwrap();
            let b = warm.evaluate(&stack, f).unwrap();
            let c = warm.evaluate(&stack, f).unwrap();
            assert_eq!(a.timing.w_source, WSource::Assembled);
            assert_eq!(b.timing.w_source, WSource::Disk);
            assert_eq!(c.timing.w_source, WSource::Memory);
            assert_eq!(a.gamma_c, b.gamma_c);
            assert_eq!(a.gamma_c, c.gamma_c);
        }
    }

    #[test]
    fn missing_frequency_lists_available() {
        let basis = crate::waves::SvwfBasis::new(2).unwrap();
        let spec = crate::gsmio::SyntheticGsmSpec::RandomPassive { seed: 1, ports: 1, radius: 0.3, kr: 1.0 };
        let b = crate::gsmio::synthesize_gsm(&spec, &basis, 1e9).unwrap();
        let engine =
            Engine::new(GsmFile::new("t", 0.05, vec![b]).unwrap(), ContourConfig::default(), SolveOptions::default())
                .unwrap();
        let stack = LayerStack::pec(-0.2).unwrap();
        match engine.evaluate(&stack, 2e9) {
            Err(Error::MissingFrequency { available, .. }) => assert_eq!(available, vec![1e9]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
