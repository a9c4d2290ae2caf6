//! Free-space GSM files and synthetic GSM generators.
//!
//! File layout (see `docs/gsm-format.md`):
//!
//! ```text
//! LGSM 1\n
//! header-bytes <N>\n
//! <N bytes of JSON header>\n
//! <payload: little-endian f64 (re, im) pairs>
//! ```
//!
//! The payload holds, per frequency in header order, the blocks Γ, R, T, S,
//! each in column-major order. Its length and SHA-256 are recorded in the
//! header.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interaction::{feedback_spectral_radius, GsmBlocks};
use crate::specfun::{spherical_bessel, BesselKind};
use crate::waves::{basis_size, Parity, Polarization, SvwfBasis, SvwfIndex};
use crate::wmatrix::WMatrix;

pub const MAGIC: &str = "LGSM 1";
pub const FORMAT_VERSION: u64 = 1;
const ENCODING: &str = "f64le-interleaved-colmajor";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsmHeader {
    pub format_version: u64,
    pub antenna: String,
    pub frequencies_hz: Vec<f64>,
    pub l_max: usize,
    pub ports: usize,
    pub port_labels: Vec<String>,
    pub r_min_m: f64,
}

/// A GSM over a list of frequencies.
#[derive(Debug, Clone)]
pub struct GsmFile {
    pub header: GsmHeader,
    pub blocks: Vec<GsmBlocks>,
}

impl GsmFile {
    /// Assemble a file from per-frequency blocks sharing one basis and port set.
    pub fn new(antenna: impl Into<String>, r_min_m: f64, blocks: Vec<GsmBlocks>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Validation("GSM file needs at least one frequency".into()))?;
        let header = GsmHeader {
            format_version: FORMAT_VERSION,
            antenna: antenna.into(),
            frequencies_hz: blocks.iter().map(|b| b.frequency).collect(),
            l_max: first.basis.l_max(),
            ports: first.ports(),
            port_labels: first.port_labels.clone(),
            r_min_m,
        };
        let file = GsmFile { header, blocks };
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.frequencies_hz.is_empty() {
            return Err(schema("frequencies_hz", "must list at least one frequency"));
        }
        if h.frequencies_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(schema("frequencies_hz", "must be strictly increasing"));
        }
        if h.port_labels.len() != h.ports {
            return Err(schema("port_labels", &format!("{} labels for {} ports", h.port_labels.len(), h.ports)));
        }
        if !(h.r_min_m > 0.0 && h.r_min_m.is_finite()) {
            return Err(schema("r_min_m", "must be positive"));
        }
        if self.blocks.len() != h.frequencies_hz.len() {
            return Err(Error::Validation(format!(
                "{} block sets for {} frequencies",
                self.blocks.len(),
                h.frequencies_hz.len()
            )));
        }
        for (b, &f) in self.blocks.iter().zip(&h.frequencies_hz) {
            b.validate()?;
            if b.basis.l_max() != h.l_max || b.ports() != h.ports || b.frequency != f {
                return Err(Error::Validation(format!("blocks at {f} Hz disagree with the header")));
            }
        }
        Ok(())
    }

    /// Blocks at `frequency` (exact match within 1e−9 relative).
    pub fn at_frequency(&self, frequency: f64) -> Result<&GsmBlocks> {
        self.blocks.iter().find(|b| (b.frequency - frequency).abs() <= 1e-9 * frequency.abs()).ok_or_else(|| {
            Error::MissingFrequency { requested: frequency, available: self.header.frequencies_hz.clone() }
        })
    }
}

fn schema(path: &str, message: &str) -> Error {
    Error::Schema { path: path.to_string(), message: message.to_string() }
}

fn block_shapes(l_max: usize, e: usize) -> [(&'static str, usize, usize); 4] {
    let j = basis_size(l_max);
    [("gamma", e, e), ("r", e, j), ("t", j, e), ("s", j, j)]
}

fn payload_bytes(l_max: usize, e: usize, n_freq: usize) -> usize {
    let per: usize = block_shapes(l_max, e).iter().map(|(_, r, c)| r * c).sum();
    per * n_freq * 16
}

pub fn write_gsm(file: &GsmFile, path: impl AsRef<Path>) -> Result<()> {
    file.validate()?;
    let h = &file.header;
    let mut payload = Vec::with_capacity(payload_bytes(h.l_max, h.ports, h.frequencies_hz.len()));
    for b in &file.blocks {
        for m in [&b.gamma, &b.r_block, &b.t_block, &b.s_block] {
            for j in 0..m.ncols() {
                for z in m.col(j).iter() {
                    payload.extend_from_slice(&z.re.to_le_bytes());
                    payload.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    let shapes: serde_json::Map<String, Value> =
        block_shapes(h.l_max, h.ports).iter().map(|&(n, r, c)| (n.to_string(), json!([r, c]))).collect();
    let header = json!({
        "format_version": h.format_version,
        "antenna": h.antenna,
        "frequencies_hz": h.frequencies_hz,
        "l_max": h.l_max,
        "ports": h.ports,
        "port_labels": h.port_labels,
        "r_min_m": h.r_min_m,
        "block_shapes": shapes,
        "payload": {
            "encoding": ENCODING,
            "bytes": payload.len(),
            "sha256": hex(&Sha256::digest(&payload)),
        },
    });
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Format(e.to_string()))?;

    let path = path.as_ref();
    let tmp = path.with_extension("lgsm-partial");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "header-bytes {}", text.len())?;
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        out.write_all(&payload)?;
        out.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_gsm(path: impl AsRef<Path>) -> Result<GsmFile> {
    let mut input = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut line = String::new();
    input.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(Error::Format(format!("bad magic line {:?}, expected {MAGIC:?}", line.trim_end())));
    }
    line.clear();
    input.read_line(&mut line)?;
    let n: usize = line
        .trim_end()
        .strip_prefix("header-bytes ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad header length line {:?}", line.trim_end())))?;
    let mut text = vec![0u8; n + 1];
    input.read_exact(&mut text).map_err(|_| Error::Format("file ends inside the header".into()))?;
    if text.pop() != Some(b'\n') {
        return Err(Error::Format("header not terminated by a newline".into()));
    }
    let value: Value = serde_json::from_slice(&text).map_err(|e| Error::Format(format!("header is not JSON: {e}")))?;
    let (header, expected_bytes, checksum) = parse_header(&value)?;

    let mut payload = Vec::with_capacity(expected_bytes);
    input.read_to_end(&mut payload)?;
    if payload.len() != expected_bytes {
        return Err(Error::Format(format!(
            "payload is {} bytes, header declares {expected_bytes} (truncated or padded file)",
            payload.len()
        )));
    }
    if hex(&Sha256::digest(&payload)) != checksum {
        return Err(Error::Format("payload checksum mismatch".into()));
    }

    let basis = SvwfBasis::new(header.l_max)?;
    let mut values = payload.chunks_exact(16).map(|c| {
        let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
        c64::new(re, im)
    });
    let mut take = |rows: usize, cols: usize| {
        let mut m = Mat::<c64>::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = values.next().expect("payload length checked");
            }
        }
        m
    };
    let e = header.ports;
    let j = basis.len();
    let mut blocks = Vec::with_capacity(header.frequencies_hz.len());
    for &f in &header.frequencies_hz {
        let gamma = take(e, e);
        let r = take(e, j);
        let t = take(j, e);
        let s = take(j, j);
        blocks.push(GsmBlocks::new(gamma, r, t, s, f, basis.clone(), header.port_labels.clone())?);
    }
    let file = GsmFile { header, blocks };
    file.validate()?;
    Ok(file)
}

fn field<'a>(v: &'a Value, path: &str) -> Result<&'a Value> {
    let mut cur = v;
    for key in path.split('.') {
        cur = cur.get(key).ok_or_else(|| schema(path, "missing"))?;
    }
    Ok(cur)
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    field(v, path)?.as_u64().map(|x| x as usize).ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    field(v, path)?.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    field(v, path)?.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn parse_header(v: &Value) -> Result<(GsmHeader, usize, String)> {
    let version =
        field(v, "format_version")?.as_u64().ok_or_else(|| schema("format_version", "expected an integer"))?;
    if version != FORMAT_VERSION {
        return Err(schema("format_version", &format!("unsupported version {version}")));
    }
    let freqs = field(v, "frequencies_hz")?
        .as_array()
        .ok_or_else(|| schema("frequencies_hz", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| schema(&format!("frequencies_hz[{i}]"), "expected a number")))
        .collect::<Result<Vec<_>>>()?;
    let l_max = as_usize(v, "l_max")?;
    if l_max < 1 {
        return Err(schema("l_max", "must be ≥ 1"));
    }
    let ports = as_usize(v, "ports")?;
    if ports < 1 {
        return Err(schema("ports", "must be ≥ 1"));
    }
    let labels = field(v, "port_labels")?
        .as_array()
        .ok_or_else(|| schema("port_labels", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str().map(str::to_string).ok_or_else(|| schema(&format!("port_labels[{i}]"), "expected a string"))
        })
        .collect::<Result<Vec<_>>>()?;
    let header = GsmHeader {
        format_version: version,
        antenna: as_str(v, "antenna")?.to_string(),
        frequencies_hz: freqs,
        l_max,
        ports,
        port_labels: labels,
        r_min_m: as_f64(v, "r_min_m")?,
    };
    for (name, rows, cols) in block_shapes(l_max, ports) {
        let path = format!("block_shapes.{name}");
        let dims = field(v, &path)?
            .as_array()
            .filter(|a| a.len() == 2)
            .and_then(|a| Some((a[0].as_u64()? as usize, a[1].as_u64()? as usize)))
            .ok_or_else(|| schema(&path, "expected [rows, cols]"))?;
        if dims != (rows, cols) {
            return Err(schema(
                &path,
                &format!("declared {}×{}, but L_max = {l_max} and {ports} ports require {rows}×{cols}", dims.0, dims.1),
            ));
        }
    }
    if as_str(v, "payload.encoding")? != ENCODING {
        return Err(schema("payload.encoding", &format!("expected {ENCODING:?}")));
    }
    let bytes = as_usize(v, "payload.bytes")?;
    let expected = payload_bytes(l_max, ports, header.frequencies_hz.len());
    if bytes != expected {
        return Err(schema("payload.bytes", &format!("declared {bytes}, block shapes imply {expected}")));
    }
    let checksum = as_str(v, "payload.sha256")?.to_ascii_lowercase();
    Ok((header, bytes, checksum))
}

/// SVWF index as written in configs: `{tau, sigma, m, l}` with
/// `sigma` 0 = even, 1 = odd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSpec {
    pub tau: u32,
    #[serde(default)]
    pub sigma: u32,
    pub m: usize,
    pub l: usize,
}

impl IndexSpec {
    pub fn resolve(&self) -> Result<SvwfIndex> {
        let parity = match self.sigma {
            0 => Parity::Even,
            1 => Parity::Odd,
            s => return Err(Error::Validation(format!("parity code must be 0 or 1, got {s}"))),
        };
        SvwfIndex::new(Polarization::from_code(self.tau)?, parity, self.m, self.l)
    }
}

impl From<SvwfIndex> for IndexSpec {
    fn from(n: SvwfIndex) -> Self {
        IndexSpec { tau: n.tau.code(), sigma: n.parity.code(), m: n.m, l: n.l }
    }
}

/// Diagonal scattering value for all SVWFs with the given `(τ, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalEntry {
    pub tau: u32,
    pub l: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticGsmSpec {
    /// One port radiating a single SVWF; no antenna scattering (S = 1).
    SingleModeRadiator {
        index: IndexSpec,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        gamma_re: f64,
        #[serde(default)]
        gamma_im: f64,
    },
    /// Single-mode radiator plus a diagonal scattering matrix; `(τ, l)`
    /// pairs not listed scatter with `S_nn = 1`.
    DiagonalScatterer {
        index: IndexSpec,
        #[serde(default = "one")]
        amplitude: f64,
        diagonal: Vec<DiagonalEntry>,
    },
    /// Dense random blocks, degree-tapered like a physical antenna of
    /// electrical radius `kr`, with `‖½(S−1)‖₂ ≤ radius`.
    RandomPassive {
        seed: u64,
        #[serde(default = "default_ports")]
        ports: usize,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_kr")]
        kr: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn default_ports() -> usize {
    1
}
fn default_radius() -> f64 {
    0.5
}
fn default_kr() -> f64 {
    3.0
}

const MAX_ATTEMPTS: u64 = 10;

pub fn synthesize_gsm(spec: &SyntheticGsmSpec, basis: &SvwfBasis, frequency: f64) -> Result<GsmBlocks> {
    let j = basis.len();
    match spec {
        SyntheticGsmSpec::SingleModeRadiator { index, amplitude, gamma_re, gamma_im } => {
            let t = single_mode_t(index, *amplitude, basis)?;
            GsmBlocks::new(
                Mat::from_fn(1, 1, |_, _| c64::new(*gamma_re, *gamma_im)),
                t.transpose().to_owned(),
                t,
                Mat::identity(j, j),
                frequency,
                basis.clone(),
                vec!["port1".into()],
            )
        }
        SyntheticGsmSpec::DiagonalScatterer { index, amplitude, diagonal } => {
            let t = single_mode_t(index, *amplitude, basis)?;
            let mut s = Mat::<c64>::identity(j, j);
            for d in diagonal {
                let tau = Polarization::from_code(d.tau)?;
                for (p, n) in basis.indices().iter().enumerate() {
                    if n.tau == tau && n.l == d.l {
                        s[(p, p)] = c64::new(d.re, d.im);
                    }
                }
            }
            GsmBlocks::new(
                Mat::zeros(1, 1),
                t.transpose().to_owned(),
                t,
                s,
                frequency,
                basis.clone(),
                vec!["port1".into()],
            )
        }
        SyntheticGsmSpec::RandomPassive { seed, ports, radius, kr } => {
            if *ports < 1 {
                return Err(Error::Synthesis("random GSM needs at least one port".into()));
            }
            if !(*radius > 0.0 && radius.is_finite()) || !(*kr > 0.0) {
                return Err(Error::Synthesis("radius and kr must be positive".into()));
            }
            for attempt in 0..MAX_ATTEMPTS {
                let gsm = random_passive(*seed, attempt, *ports, *radius, *kr, basis, frequency)?;
                if scattering_norm(&gsm)? <= *radius * (1.0 + 1e-12) {
                    return Ok(gsm);
                }
                log::debug!("random GSM attempt {attempt} violated the norm bound; regenerating");
            }
            Err(Error::Synthesis(format!("norm bound {radius} not met after {MAX_ATTEMPTS} attempts")))
        }
    }
}

fn single_mode_t(index: &IndexSpec, amplitude: f64, basis: &SvwfBasis) -> Result<Mat<c64>> {
    let n = index.resolve()?;
    let p = basis
        .position(&n)
        .ok_or_else(|| Error::Synthesis(format!("excited index {n} outside the degree-{} basis", basis.l_max())))?;
    let mut t = Mat::<c64>::zeros(basis.len(), 1);
    t[(p, 0)] = c64::new(amplitude, 0.0);
    Ok(t)
}

/// `‖½(S−1)‖₂`.
pub fn scattering_norm(gsm: &GsmBlocks) -> Result<f64> {
    let sv = gsm.half_s_minus_one().singular_values().map_err(|e| Error::Synthesis(format!("SVD failed: {e:?}")))?;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

// |j_l(kr)| normalized to its maximum over l, floored to keep every degree
// represented.
fn degree_envelope(l_max: usize, kr: f64) -> Result<Vec<f64>> {
    let j = spherical_bessel(BesselKind::Regular, l_max, Complex64::new(kr, 0.0))?;
    let peak = j.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    Ok(j.iter().map(|z| (z.norm() / peak).max(1e-6)).collect())
}

fn random_passive(
    seed: u64,
    attempt: u64,
    ports: usize,
    radius: f64,
    kr: f64,
    basis: &SvwfBasis,
    frequency: f64,
) -> Result<GsmBlocks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let env = degree_envelope(basis.l_max(), kr)?;
    let j = basis.len();
    let idx = basis.indices();
    let mut gauss = |scale: f64| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re, im) * scale
    };
    let gamma = Mat::from_fn(ports, ports, |_, _| gauss(0.1));
    let t = Mat::from_fn(j, ports, |a, _| gauss(0.3 * env[idx[a].l]));
    let r = Mat::from_fn(ports, j, |_, b| gauss(0.3 * env[idx[b].l]));
    let g = Mat::from_fn(j, j, |a, b| gauss((env[idx[a].l] * env[idx[b].l]).sqrt()));
    let sv = g.singular_values().map_err(|e| Error::Synthesis(format!("SVD failed: {e:?}")))?;
    let norm = sv.iter().copied().fold(0.0, f64::max);
    if !(norm > 0.0) {
        return Err(Error::Synthesis("degenerate random scattering block".into()));
    }
    // S = 1 + 2·radius·G/‖G‖₂ so that ‖½(S−1)‖₂ = radius.
    let scale = 2.0 * radius / norm;
    let s = Mat::from_fn(j, j, |a, b| {
        let d = if a == b { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
        d + g[(a, b)] * scale
    });
    GsmBlocks::new(gamma, r, t, s, frequency, basis.clone(), (1..=ports).map(|p| format!("port{p}")).collect())
}

/// Rescale `S − 1` so that the feedback kernel `½(S−1)𝒲` has the requested
/// spectral radius for this 𝒲.
pub fn scale_to_feedback_radius(gsm: &GsmBlocks, w: &WMatrix, target: f64) -> Result<GsmBlocks> {
    let current = feedback_spectral_radius(gsm, w)?;
    if !(current > 0.0) {
        return Err(Error::Synthesis("feedback kernel is nilpotent or zero; cannot rescale".into()));
    }
    let f = target / current;
    let j = gsm.basis.len();
    let mut out = gsm.clone();
    out.s_block = Mat::from_fn(j, j, |a, b| {
        let d = if a == b { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
        d + (gsm.s_block[(a, b)] - d) * f
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GsmBlocks {
        let basis = SvwfBasis::new(2).unwrap();
        let spec = SyntheticGsmSpec::RandomPassive { seed: 7, ports: 2, radius: 0.4, kr: 1.5 };
        synthesize_gsm(&spec, &basis, 3.3e9).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lgsm");
        let mut b2 = tiny();
        b2.frequency = 3.4e9;
        let file = GsmFile::new("toy", 0.05, vec![tiny(), b2]).unwrap();
        write_gsm(&file, &path).unwrap();
        let back = read_gsm(&path).unwrap();
        assert_eq!(back.header, file.header);
        for (a, b) in back.blocks.iter().zip(&file.blocks) {
            for (x, y) in
                [(&a.gamma, &b.gamma), (&a.r_block, &b.r_block), (&a.t_block, &b.t_block), (&a.s_block, &b.s_block)]
            {
                for j in 0..x.ncols() {
                    for i in 0..x.nrows() {
                        assert_eq!(x[(i, j)].re.to_bits(), y[(i, j)].re.to_bits());
                        assert_eq!(x[(i, j)].im.to_bits(), y[(i, j)].im.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_file_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.lgsm");
        write_gsm(&GsmFile::new("toy", 0.05, vec![tiny()]).unwrap(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_gsm(&path), Err(Error::Format(_))));
        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 1;
        std::fs::write(&path, &flipped).unwrap();
        assert!(matches!(read_gsm(&path), Err(Error::Format(_))));
    }

    #[test]
    fn missing_frequency_lookup() {
        let file = GsmFile::new("toy", 0.05, vec![tiny()]).unwrap();
        assert!(file.at_frequency(3.3e9).is_ok());
        assert!(matches!(file.at_frequency(3.5e9), Err(Error::MissingFrequency { .. })));
    }

    #[test]
    fn random_passive_meets_bound_and_is_deterministic() {
        let basis = SvwfBasis::new(3).unwrap();
        let spec = SyntheticGsmSpec::RandomPassive { seed: 42, ports: 1, radius: 0.5, kr: 2.0 };
        let a = synthesize_gsm(&spec, &basis, 1e9).unwrap();
        let b = synthesize_gsm(&spec, &basis, 1e9).unwrap();
        assert!(scattering_norm(&a).unwrap() <= 0.5 * (1.0 + 1e-12));
        assert_eq!(a.s_block, b.s_block);
    }

    #[test]
    fn single_mode_layout() {
        let basis = SvwfBasis::new(2).unwrap();
        let spec = SyntheticGsmSpec::SingleModeRadiator {
            index: IndexSpec { tau: 2, sigma: 0, m: 0, l: 1 },
            amplitude: 1.0,
            gamma_re: 0.0,
            gamma_im: 0.0,
        };
        let g = synthesize_gsm(&spec, &basis, 1e9).unwrap();
        let nz: usize = (0..basis.len()).filter(|&a| g.t_block[(a, 0)] != c64::new(0.0, 0.0)).count();
        assert_eq!(nz, 1);
        assert_eq!(g.r_block.transpose().to_owned(), g.t_block);
        assert_eq!(g.s_block, Mat::<c64>::identity(basis.len(), basis.len()));
    }
}
