//! Declarative TOML configs for sweeps and fits.
//!
//! ```toml
//! [gsm]
//! path = "horn.lgsm"
//!
//! [stack]
//! z_interface = "-200 mm"
//! termination = { kind = "half_space", eps_r = 4.0, sigma = "10 mS/m" }
//!
//! [sweep]
//! frequencies = { start = "3.2 GHz", stop = "3.8 GHz", count = 7 }
//! axes = [{ parameter = "termination.eps_r", values = [2, 4, 9, 81] }]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fresnel::{Layer, LayerStack, Medium, Termination};
use crate::gsmio::{read_gsm, synthesize_gsm, GsmFile, SyntheticGsmSpec};
use crate::interaction::{SolveMode, SolveOptions};
use crate::units::{Dimension, Quantity};
use crate::waves::SvwfBasis;
use crate::wmatrix::{ContourSpec, DEFAULT_IOTA, DEFAULT_QUAD_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediumField {
    EpsR,
    Sigma,
    MuR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerField {
    Medium(MediumField),
    Thickness,
}

/// A scalar stack parameter addressable by a sweep axis or a fit:
/// `z_interface`, `top.<f>`, `layers[i].<f>`, `layers[i].thickness`,
/// `termination.<f>` where `<f>` is `eps_r`, `sigma` or `mu_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamPath {
    ZInterface,
    Top(MediumField),
    Layer(usize, LayerField),
    Termination(MediumField),
}

impl ParamPath {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown stack parameter {text:?}"));
        let medium_field = |f: &str| match f {
            "eps_r" => Ok(MediumField::EpsR),
            "sigma" => Ok(MediumField::Sigma),
            "mu_r" => Ok(MediumField::MuR),
            _ => Err(bad()),
        };
        let t = text.trim();
        if t == "z_interface" || t == "z_i" {
            return Ok(ParamPath::ZInterface);
        }
        let (head, field) = t.split_once('.').ok_or_else(bad)?;
        match head {
            "top" => Ok(ParamPath::Top(medium_field(field)?)),
            "termination" => Ok(ParamPath::Termination(medium_field(field)?)),
            _ => {
                let idx = head
                    .strip_prefix("layers[")
                    .and_then(|s| s.strip_suffix(']'))
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(bad)?;
                let f =
                    if field == "thickness" { LayerField::Thickness } else { LayerField::Medium(medium_field(field)?) };
                Ok(ParamPath::Layer(idx, f))
            }
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            ParamPath::ZInterface | ParamPath::Layer(_, LayerField::Thickness) => Dimension::Length,
            ParamPath::Top(MediumField::Sigma)
            | ParamPath::Termination(MediumField::Sigma)
            | ParamPath::Layer(_, LayerField::Medium(MediumField::Sigma)) => Dimension::Conductivity,
            _ => Dimension::Dimensionless,
        }
    }

    /// Set the parameter on `stack`. The result is not validated here.
    pub fn apply(&self, stack: &mut LayerStack, value: f64) -> Result<()> {
        fn set(m: &mut Medium, f: MediumField, v: f64) {
            match f {
                MediumField::EpsR => m.eps_r = v,
                MediumField::Sigma => m.sigma = v,
                MediumField::MuR => m.mu_r = v,
            }
        }
        match *self {
            ParamPath::ZInterface => stack.z_interface = value,
            ParamPath::Top(f) => set(&mut stack.top, f, value),
            ParamPath::Layer(i, f) => {
                let n = stack.layers.len();
                let layer = stack
                    .layers
                    .get_mut(i)
                    .ok_or_else(|| Error::Config(format!("layer {i} does not exist (stack has {n})")))?;
                match f {
                    LayerField::Thickness => layer.thickness = value,
                    LayerField::Medium(f) => set(&mut layer.medium, f, value),
                }
            }
            ParamPath::Termination(f) => match &mut stack.termination {
                Termination::HalfSpace(m) => set(m, f, value),
                _ => return Err(Error::Config("perfect-conductor terminations have no medium parameters".into())),
            },
        }
        Ok(())
    }

    pub fn get(&self, stack: &LayerStack) -> Result<f64> {
        fn get(m: &Medium, f: MediumField) -> f64 {
            match f {
                MediumField::EpsR => m.eps_r,
                MediumField::Sigma => m.sigma,
                MediumField::MuR => m.mu_r,
            }
        }
        Ok(match *self {
            ParamPath::ZInterface => stack.z_interface,
            ParamPath::Top(f) => get(&stack.top, f),
            ParamPath::Layer(i, f) => {
                let layer = stack.layers.get(i).ok_or_else(|| Error::Config(format!("layer {i} does not exist")))?;
                match f {
                    LayerField::Thickness => layer.thickness,
                    LayerField::Medium(f) => get(&layer.medium, f),
                }
            }
            ParamPath::Termination(f) => match &stack.termination {
                Termination::HalfSpace(m) => get(m, f),
                _ => return Err(Error::Config("perfect-conductor terminations have no medium parameters".into())),
            },
        })
    }
}

impl std::fmt::Display for ParamPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let field = |m: MediumField| match m {
            MediumField::EpsR => "eps_r",
            MediumField::Sigma => "sigma",
            MediumField::MuR => "mu_r",
        };
        match *self {
            ParamPath::ZInterface => write!(f, "z_interface"),
            ParamPath::Top(m) => write!(f, "top.{}", field(m)),
            ParamPath::Termination(m) => write!(f, "termination.{}", field(m)),
            ParamPath::Layer(i, LayerField::Thickness) => write!(f, "layers[{i}].thickness"),
            ParamPath::Layer(i, LayerField::Medium(m)) => write!(f, "layers[{i}].{}", field(m)),
        }
    }
}

fn q_one() -> Quantity {
    Quantity::Number(1.0)
}
fn q_zero() -> Quantity {
    Quantity::Number(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    #[serde(default = "q_one")]
    pub eps_r: Quantity,
    #[serde(default = "q_zero")]
    pub sigma: Quantity,
    #[serde(default = "q_one")]
    pub mu_r: Quantity,
}

impl Default for MediumConfig {
    fn default() -> Self {
        MediumConfig { eps_r: q_one(), sigma: q_zero(), mu_r: q_one() }
    }
}

impl MediumConfig {
    pub fn build(&self) -> Result<Medium> {
        Medium::new(
            self.eps_r.si(Dimension::Dimensionless)?,
            self.sigma.si(Dimension::Conductivity)?,
            self.mu_r.si(Dimension::Dimensionless)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    #[serde(default = "q_one")]
    pub eps_r: Quantity,
    #[serde(default = "q_zero")]
    pub sigma: Quantity,
    #[serde(default = "q_one")]
    pub mu_r: Quantity,
    pub thickness: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TerminationConfig {
    HalfSpace {
        #[serde(default = "q_one")]
        eps_r: Quantity,
        #[serde(default = "q_zero")]
        sigma: Quantity,
        #[serde(default = "q_one")]
        mu_r: Quantity,
    },
    Pec,
    Pmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    #[serde(default)]
    pub top: MediumConfig,
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
    pub termination: TerminationConfig,
    pub z_interface: Quantity,
}

impl StackConfig {
    pub fn build(&self) -> Result<LayerStack> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                Ok(Layer {
                    medium: Medium::new(
                        l.eps_r.si(Dimension::Dimensionless)?,
                        l.sigma.si(Dimension::Conductivity)?,
                        l.mu_r.si(Dimension::Dimensionless)?,
                    )?,
                    thickness: l.thickness.si(Dimension::Length)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let termination = match &self.termination {
            TerminationConfig::HalfSpace { eps_r, sigma, mu_r } => Termination::HalfSpace(Medium::new(
                eps_r.si(Dimension::Dimensionless)?,
                sigma.si(Dimension::Conductivity)?,
                mu_r.si(Dimension::Dimensionless)?,
            )?),
            TerminationConfig::Pec => Termination::Pec,
            TerminationConfig::Pmc => Termination::Pmc,
        };
        LayerStack::new(self.top.build()?, layers, termination, self.z_interface.si(Dimension::Length)?)
    }
}

/// Explicit list or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuesConfig {
    List(Vec<Quantity>),
    Range { start: Quantity, stop: Quantity, count: usize },
}

impl ValuesConfig {
    pub fn resolve(&self, dim: Dimension) -> Result<Vec<f64>> {
        let v = match self {
            ValuesConfig::List(xs) => xs.iter().map(|q| q.si(dim)).collect::<Result<Vec<_>>>()?,
            ValuesConfig::Range { start, stop, count } => {
                let (a, b) = (start.si(dim)?, stop.si(dim)?);
                match count {
                    0 => Vec::new(),
                    1 => vec![a],
                    &n => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
                }
            }
        };
        if v.is_empty() {
            return Err(Error::Config("value list is empty".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub parameter: String,
    pub values: ValuesConfig,
}

/// Synthetic GSM: generator spec plus the basis degree and minimum sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    #[serde(flatten)]
    pub spec: SyntheticGsmSpec,
    pub l_max: usize,
    pub r_min: Quantity,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmSource {
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticSource>,
}

impl GsmSource {
    pub fn validate(&self) -> Result<()> {
        match (&self.path, &self.synthetic) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::Config("[gsm] needs exactly one of `path` or `synthetic`".into())),
        }
    }

    /// Load the file, or synthesize blocks at `frequencies`.
    pub fn load(&self, frequencies: &[f64]) -> Result<GsmFile> {
        self.validate()?;
        if let Some(path) = &self.path {
            return read_gsm(path);
        }
        let syn = self.synthetic.as_ref().expect("validated");
        let basis = SvwfBasis::new(syn.l_max)?;
        let mut freqs = frequencies.to_vec();
        freqs.sort_by(f64::total_cmp);
        freqs.dedup();
        let blocks = freqs.iter().map(|&f| synthesize_gsm(&syn.spec, &basis, f)).collect::<Result<Vec<_>>>()?;
        GsmFile::new("synthetic", syn.r_min.si(Dimension::Length)?, blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    /// Fixed κ̃; the truncation rule is used when absent.
    pub kappa: Option<f64>,
    #[serde(default = "default_iota")]
    pub iota: f64,
    #[serde(default = "default_order")]
    pub quad_order_propagating: usize,
    #[serde(default = "default_order")]
    pub quad_order_evanescent: usize,
    /// Truncate the GSM basis to this degree.
    pub l_max: Option<usize>,
}

fn default_iota() -> f64 {
    DEFAULT_IOTA
}
fn default_order() -> usize {
    DEFAULT_QUAD_ORDER
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            kappa: None,
            iota: DEFAULT_IOTA,
            quad_order_propagating: DEFAULT_QUAD_ORDER,
            quad_order_evanescent: DEFAULT_QUAD_ORDER,
            l_max: None,
        }
    }
}

impl ContourConfig {
    pub fn contour(&self, l_max: usize, kr_min: f64) -> Result<ContourSpec> {
        let base = match self.kappa {
            Some(k) => {
                let mut c = ContourSpec::new(k)?;
                c.iota = self.iota;
                c
            }
            None => ContourSpec::from_rule(l_max, kr_min, self.iota)?,
        };
        base.with_orders(self.quad_order_propagating, self.quad_order_evanescent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveModeConfig {
    #[default]
    Direct,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub mode: SolveModeConfig,
    #[serde(default = "default_neumann_order")]
    pub order: usize,
    #[serde(default = "default_rcond_floor")]
    pub rcond_floor: f64,
}

fn default_neumann_order() -> usize {
    5
}
fn default_rcond_floor() -> f64 {
    SolveOptions::default().rcond_floor
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { mode: SolveModeConfig::Direct, order: 5, rcond_floor: default_rcond_floor() }
    }
}

impl SolveConfig {
    pub fn options(&self) -> Result<SolveOptions> {
        let mode = match self.mode {
            SolveModeConfig::Direct => SolveMode::Direct,
            SolveModeConfig::Neumann => SolveMode::Neumann(self.order),
        };
        let opts = SolveOptions { mode, rcond_floor: self.rcond_floor };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Touchstone,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub frequencies: ValuesConfig,
    #[serde(default)]
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gsm: GsmSource,
    pub stack: StackConfig,
    pub sweep: SweepAxes,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Resolved sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub parameter: ParamPath,
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        rebase(&mut cfg.gsm.path, base);
        rebase(&mut cfg.output.path, base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.gsm.validate()?;
        self.stack.build()?;
        self.frequencies()?;
        self.axes()?;
        self.solve.options()?;
        Ok(())
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        let f = self.sweep.frequencies.resolve(Dimension::Frequency)?;
        if f.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Config("frequencies must be positive".into()));
        }
        Ok(f)
    }

    pub fn axes(&self) -> Result<Vec<Axis>> {
        let mut out = Vec::with_capacity(self.sweep.axes.len());
        for a in &self.sweep.axes {
            let parameter = ParamPath::parse(&a.parameter)?;
            if out.iter().any(|b: &Axis| b.parameter == parameter) {
                return Err(Error::Config(format!("parameter {parameter} swept twice")));
            }
            out.push(Axis { parameter, values: a.values.resolve(parameter.dimension())? });
        }
        Ok(out)
    }
}

fn rebase(p: &mut Option<PathBuf>, base: &Path) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    #[default]
    NelderMead,
    GridThenRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameterConfig {
    pub parameter: String,
    pub start: Quantity,
    pub lower: Quantity,
    pub upper: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    /// CSV written by `sweep` over frequency only.
    pub observed: PathBuf,
    #[serde(default)]
    pub method: FitMethod,
    #[serde(default = "default_max_evaluations")]
    pub max_evaluations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub parameters: Vec<FreeParameterConfig>,
}

fn default_max_evaluations() -> usize {
    300
}
fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub gsm: GsmSource,
    pub stack: StackConfig,
    pub fit: FitSettings,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub solve: SolveConfig,
}

/// Resolved free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParameter {
    pub parameter: ParamPath,
    pub start: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FitConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: FitConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        rebase(&mut cfg.gsm.path, base);
        let mut obs = Some(cfg.fit.observed.clone());
        rebase(&mut obs, base);
        cfg.fit.observed = obs.expect("set above");
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.gsm.validate()?;
        self.stack.build()?;
        self.solve.options()?;
        self.free_parameters()?;
        if self.fit.max_evaluations == 0 {
            return Err(Error::Config("max_evaluations must be positive".into()));
        }
        if !(self.fit.tolerance >= 0.0) {
            return Err(Error::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    pub fn free_parameters(&self) -> Result<Vec<FreeParameter>> {
        let mut out: Vec<FreeParameter> = Vec::new();
        for p in &self.fit.parameters {
            let parameter = ParamPath::parse(&p.parameter)?;
            let dim = parameter.dimension();
            let fp =
                FreeParameter { parameter, start: p.start.si(dim)?, lower: p.lower.si(dim)?, upper: p.upper.si(dim)? };
            if !(fp.lower < fp.upper) {
                return Err(Error::Config(format!("bounds for {parameter} are not ordered")));
            }
            if !(fp.lower..=fp.upper).contains(&fp.start) {
                return Err(Error::Config(format!("start value for {parameter} lies outside its bounds")));
            }
            if out.iter().any(|q| q.parameter == parameter) {
                return Err(Error::Config(format!("parameter {parameter} listed twice")));
            }
            out.push(fp);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
[gsm.synthetic]
kind = "single_mode_radiator"
index = { tau = 1, m = 1, l = 1 }
l_max = 3
r_min = "146 mm"

[stack]
z_interface = "-200 mm"
layers = [{ eps_r = 3, thickness = "2 cm" }]
termination = { kind = "half_space", eps_r = 4.0, sigma = "10 mS/m" }

[sweep]
frequencies = { start = "3.2 GHz", stop = "3.8 GHz", count = 4 }
axes = [{ parameter = "layers[0].thickness", values = ["1 cm", "20 mm"] }]
"#;

    #[test]
    fn parses_sweep_with_units() {
        let cfg = SweepConfig::from_toml(SWEEP).unwrap();
        let stack = cfg.stack.build().unwrap();
        assert_eq!(stack.z_interface, -0.2);
        assert_eq!(stack.layers[0].thickness, 0.02);
        let f = cfg.frequencies().unwrap();
        assert_eq!(f.len(), 4);
        assert!((f[3] - 3.8e9).abs() < 1e-3);
        let axes = cfg.axes().unwrap();
        assert_eq!(axes[0].values, vec![0.01, 0.02]);
        let gsm = cfg.gsm.load(&f).unwrap();
        assert_eq!(gsm.header.l_max, 3);
        assert!((gsm.header.r_min_m - 0.146).abs() < 1e-15);
    }

    #[test]
    fn rejects_two_gsm_sources() {
        let text = SWEEP.replace("[gsm.synthetic]", "[gsm]\npath = \"x.lgsm\"\n[gsm.synthetic]");
        assert!(SweepConfig::from_toml(&text).is_err());
    }

    #[test]
    fn param_paths_round_trip() {
        for s in ["z_interface", "top.eps_r", "layers[2].thickness", "layers[0].sigma", "termination.mu_r"] {
            assert_eq!(ParamPath::parse(s).unwrap().to_string(), s);
        }
        assert!(ParamPath::parse("layers[x].eps_r").is_err());
        assert!(ParamPath::parse("termination.thickness").is_err());
    }

    #[test]
    fn apply_and_get() {
        let mut stack = LayerStack::half_space(Medium::dielectric(4.0, 0.0).unwrap(), -0.2).unwrap();
        let p = ParamPath::parse("termination.eps_r").unwrap();
        p.apply(&mut stack, 9.0).unwrap();
        assert_eq!(p.get(&stack).unwrap(), 9.0);
        assert!(ParamPath::parse("layers[0].eps_r").unwrap().apply(&mut stack, 2.0).is_err());
    }

    #[test]
    fn fit_bounds_checked() {
        let text = format!(
            "{}\n[fit]\nobserved = \"obs.csv\"\nparameters = [{{ parameter = \"termination.eps_r\", start = 2, lower = 5, upper = 1 }}]\n",
            SWEEP.split("[sweep]").next().unwrap()
        );
        assert!(FitConfig::from_toml(&text).is_err());
    }
}
