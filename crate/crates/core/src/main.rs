use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use layered_gsm::config::{FitConfig, OutputFormat, SweepConfig};
use layered_gsm::fit::run_fit;
use layered_gsm::gsmio::{synthesize_gsm, write_gsm, GsmFile, IndexSpec, SyntheticGsmSpec};
use layered_gsm::output::{touchstone_extension, write_csv, write_touchstone};
use layered_gsm::sweep::{run_sweep, Engine, RunOptions, SweepRecord, SweepResult, TimingReport};
use layered_gsm::units::{parse_quantity, Dimension};
use layered_gsm::validate::{run_error_map, run_validate, CheckKind, ErrorMapSpec, ValidationSelection};
use layered_gsm::waves::SvwfBasis;
use layered_gsm::{Error, Result, C0};

/// Antenna reflection above layered media from a free-space GSM.
#[derive(Parser, Debug)]
#[command(name = "lgsm", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached interaction matrices.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble the interaction matrix for the config's stack at each frequency.
    Wmatrix {
        #[arg(long)]
        config: PathBuf,
        /// Directory to write the matrices to (binary cache format).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Composite reflection for the config's stack (sweep axes ignored).
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the sweep described by the config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Write the timing report as JSON.
        #[arg(long)]
        timing_json: Option<PathBuf>,
    },
    /// Fit free stack parameters to observed data.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Write the result (parameters, misfit trace) as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the oracle checks, or the (L_max, κ̃) error map.
    Validate(ValidateArgs),
    /// Write a synthetic GSM file.
    SynthGsm(SynthArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output path (default: the config's, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    Touchstone,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Comma-separated subset of checks: fresnel, transform, structure, pec,
    /// reflected, free_space, neumann.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Basis degrees for the degree-dependent checks.
    #[arg(long = "lmax", value_delimiter = ',', default_values_t = vec![8usize, 17])]
    l_values: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Sweep (L_max, κ̃) against a refined reference instead.
    #[arg(long)]
    error_map: bool,
    /// κ̃ grid for the error map.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    /// Frequencies for the error map, e.g. `3.2GHz,3.5GHz`.
    #[arg(long, value_delimiter = ',')]
    frequencies: Vec<String>,
    /// Basin threshold for the error map.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Error-map CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SynthKind {
    RandomPassive,
    SingleMode,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "random-passive")]
    kind: SynthKind,
    #[arg(long)]
    l_max: usize,
    /// Minimum-sphere radius, e.g. `146mm`.
    #[arg(long)]
    r_min: String,
    /// Comma-separated frequencies, e.g. `3.2GHz,3.5GHz,3.8GHz`.
    #[arg(long, value_delimiter = ',', required = true)]
    frequencies: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    ports: usize,
    /// Bound on ‖½(S−1)‖₂.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Degree taper kR; defaults to k·r_min at each frequency.
    #[arg(long)]
    kr: Option<f64>,
    /// Radiated SVWF for single-mode GSMs as `tau,sigma,m,l`.
    #[arg(long, value_delimiter = ',')]
    index: Vec<u32>,
    #[arg(long, default_value = "synthetic")]
    antenna: String,
    #[arg(long)]
    out: PathBuf,
}

const EXIT_ERROR: u8 = 1;
const EXIT_CHECKS_FAILED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    let run = RunOptions { threads: cli.threads, cache_dir: cli.cache_dir.clone() };
    match dispatch(cli.command, &run) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECKS_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

// Ok(false) signals failed validation checks.
fn dispatch(cmd: Command, run: &RunOptions) -> Result<bool> {
    match cmd {
        Command::Wmatrix { config, out } => wmatrix(&config, out.as_deref(), run),
        Command::Solve { config, output } => solve(&config, &output, run),
        Command::Sweep { config, output, timing_json } => {
            let cfg = SweepConfig::load(&config)?;
            let result = run_sweep(&cfg, run)?;
            emit(&result, &cfg, &output)?;
            eprintln!("{}", result.timing);
            if let Some(p) = timing_json {
                write_json(&p, &result.timing)?;
            }
            Ok(true)
        }
        Command::Fit { config, json } => {
            let cfg = FitConfig::load(&config)?;
            let r = run_fit(&cfg, run)?;
            for (name, v) in &r.parameters {
                println!("{name} = {v:.9e}");
            }
            println!("misfit = {:.6e}", r.misfit);
            println!("evaluations = {} ({} forward solves, {:.3} s)", r.evaluations, r.forward_solves, r.seconds);
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            if let Some(p) = json {
                write_json(&p, &r)?;
            }
            Ok(true)
        }
        Command::Validate(args) => validate(args),
        Command::SynthGsm(args) => synth(args),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn wmatrix(config: &Path, out: Option<&Path>, run: &RunOptions) -> Result<bool> {
    let cfg = SweepConfig::load(config)?;
    let freqs = cfg.frequencies()?;
    let engine = Engine::new(cfg.gsm.load(&freqs)?, cfg.contour.clone(), cfg.solve.options()?)?
        .with_cache_dir(run.cache_dir.clone())?;
    let stack = cfg.stack.build()?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    for f in freqs {
        let t = std::time::Instant::now();
        let (w, source) = engine.wmatrix(&stack, f)?;
        let ms = 1e3 * t.elapsed().as_secs_f64();
        println!(
            "{f:.6e} Hz  L={} κ̃={:.4}  nnz={}  max|W|={:.3e}  symmetry={:.1e}  {:.3} ms ({source:?})  {}",
            w.basis().l_max(),
            w.contour().kappa_m,
            w.nnz(),
            w.max_abs(),
            w.symmetry_error(),
            ms,
            w.fingerprint()
        );
        if let Some(dir) = out {
            let path = dir.join(format!("w-{}.bin", w.fingerprint()));
            w.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))?;
        }
    }
    Ok(true)
}

fn solve(config: &Path, output: &OutputArgs, run: &RunOptions) -> Result<bool> {
    let mut cfg = SweepConfig::load(config)?;
    if !cfg.sweep.axes.is_empty() {
        log::warn!("`solve` ignores sweep axes; use `sweep` to vary stack parameters");
        cfg.sweep.axes.clear();
    }
    let freqs = cfg.frequencies()?;
    let engine = Engine::new(cfg.gsm.load(&freqs)?, cfg.contour.clone(), cfg.solve.options()?)?
        .with_cache_dir(run.cache_dir.clone())?;
    let stack = cfg.stack.build()?;
    let start = std::time::Instant::now();
    let records = freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let e = engine.evaluate(&stack, f)?;
            log::info!(
                "{f:.6e} Hz: W {:.3} ms, solve {:.3} ms, rcond {:?}",
                1e3 * e.timing.w_seconds,
                1e3 * e.timing.solve_seconds,
                e.rcond
            );
            Ok(SweepRecord {
                index: i,
                frequency: f,
                params: vec![],
                gamma_c: e.gamma_c,
                rcond: e.rcond,
                timing: e.timing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let timing = timing_of(&records, start.elapsed().as_secs_f64());
    let result =
        SweepResult { param_names: vec![], port_labels: engine.gsm().header.port_labels.clone(), records, timing };
    emit(&result, &cfg, output)?;
    eprintln!("{}", result.timing);
    Ok(true)
}

fn timing_of(records: &[SweepRecord], wall: f64) -> TimingReport {
    let mut t = TimingReport { points: records.len(), threads: 1, wall_seconds: wall, ..Default::default() };
    for r in records {
        t.w_assembled += 1;
        t.w_seconds_total += r.timing.w_seconds;
        t.solve_seconds_total += r.timing.solve_seconds;
        t.max_point_ms = t.max_point_ms.max(1e3 * (r.timing.w_seconds + r.timing.solve_seconds));
    }
    if !records.is_empty() {
        t.mean_w_assembly_ms = 1e3 * t.w_seconds_total / records.len() as f64;
        t.mean_solve_ms = 1e3 * t.solve_seconds_total / records.len() as f64;
    }
    t
}

fn emit(result: &SweepResult, cfg: &SweepConfig, args: &OutputArgs) -> Result<()> {
    let format = match args.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Touchstone) => OutputFormat::Touchstone,
        None => cfg.output.format,
    };
    let path = args.out.clone().or_else(|| cfg.output.path.clone());
    let write = |out: &mut dyn Write| -> Result<()> {
        match format {
            OutputFormat::Csv => write_csv(result, out),
            OutputFormat::Touchstone => write_touchstone(result, out),
        }
    };
    match path {
        Some(p) => {
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
            let want = touchstone_extension(result.port_labels.len());
            if matches!(format, OutputFormat::Touchstone) && ext != want {
                log::warn!("Touchstone output for {} port(s) conventionally uses .{want}", result.port_labels.len());
            }
            let mut f = std::io::BufWriter::new(std::fs::File::create(&p)?);
            write(&mut f)?;
            f.flush()?;
            log::info!("wrote {}", p.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool> {
    if args.error_map {
        let mut spec = ErrorMapSpec { seed: args.seed, ..Default::default() };
        if args.l_values != [8, 17] {
            spec.l_values = args.l_values.clone();
        }
        if !args.kappa.is_empty() {
            spec.kappa_values = args.kappa.clone();
        }
        if !args.frequencies.is_empty() {
            spec.frequencies =
                args.frequencies.iter().map(|s| parse_quantity(s, Dimension::Frequency)).collect::<Result<_>>()?;
        }
        let map = run_error_map(&spec)?;
        let basin = map.basin(args.tol);
        println!("{}", map.table());
        println!(
            "basin |ΔΓᶜ| ≤ {:.1e}: monotone in L {}, rule region inside {}, every κ̃ reaches {}",
            args.tol, basin.monotone_in_l, basin.rule_region_inside, basin.every_kappa_reaches
        );
        if let Some(p) = &args.out {
            std::fs::write(p, map.to_csv())?;
        }
        if let Some(p) = &args.json {
            write_json(p, &serde_json::json!({ "map": map, "basin": basin }))?;
        }
        return Ok(basin.passed());
    }
    let checks = if args.only.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        args.only.iter().map(|s| CheckKind::parse(s)).collect::<Result<Vec<_>>>()?
    };
    let report = run_validate(&ValidationSelection { checks, l_values: args.l_values, seed: args.seed })?;
    println!("{}", report.table());
    if let Some(p) = &args.json {
        write_json(p, &report)?;
    }
    Ok(report.all_passed())
}

fn synth(args: SynthArgs) -> Result<bool> {
    let r_min = parse_quantity(&args.r_min, Dimension::Length)?;
    let mut freqs =
        args.frequencies.iter().map(|s| parse_quantity(s, Dimension::Frequency)).collect::<Result<Vec<_>>>()?;
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    let basis = SvwfBasis::new(args.l_max)?;
    let blocks = freqs
        .iter()
        .map(|&f| {
            let spec = match args.kind {
                SynthKind::RandomPassive => SyntheticGsmSpec::RandomPassive {
                    seed: args.seed,
                    ports: args.ports,
                    radius: args.radius,
                    kr: args.kr.unwrap_or(2.0 * std::f64::consts::PI * f / C0 * r_min),
                },
                SynthKind::SingleMode => {
                    let [tau, sigma, m, l] = args.index[..] else {
                        return Err(Error::Config("single-mode GSMs need --index tau,sigma,m,l".into()));
                    };
                    SyntheticGsmSpec::SingleModeRadiator {
                        index: IndexSpec { tau, sigma, m: m as usize, l: l as usize },
                        amplitude: 1.0,
                        gamma_re: 0.0,
                        gamma_im: 0.0,
                    }
                }
            };
            synthesize_gsm(&spec, &basis, f)
        })
        .collect::<Result<Vec<_>>>()?;
    let file = GsmFile::new(args.antenna, r_min, blocks)?;
    write_gsm(&file, &args.out)?;
    println!(
        "wrote {} ({} frequencies, L = {}, {} ports)",
        args.out.display(),
        file.header.frequencies_hz.len(),
        file.header.l_max,
        file.header.ports
    );
    Ok(true)
}
