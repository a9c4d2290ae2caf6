//! Result tables: CSV (one row per port pair per sweep point) and a
//! Touchstone `.sNp` writer for frequency sweeps.
//!
//! CSV columns: `frequency_hz`, the swept parameters, `port_i`, `port_j`
//! (1-based), `re`, `im`, `db` (20·log10|Γᶜ|) and `phase_deg`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::sweep::SweepResult;

pub const FIXED_COLUMNS: [&str; 6] = ["port_i", "port_j", "re", "im", "db", "phase_deg"];

pub fn magnitude_db(z: c64) -> f64 {
    20.0 * z.norm().log10()
}

pub fn phase_deg(z: c64) -> f64 {
    z.arg().to_degrees()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("CSV: {other:?}")),
    }
}

pub fn header(param_names: &[String]) -> Vec<String> {
    std::iter::once("frequency_hz".to_string())
        .chain(param_names.iter().cloned())
        .chain(FIXED_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

pub fn write_csv(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&result.param_names)).map_err(csv_err)?;
    for rec in &result.records {
        let g = &rec.gamma_c;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let z = g[(i, j)];
                let mut row = vec![fmt(rec.frequency)];
                row.extend(rec.params.iter().map(|&p| fmt(p)));
                row.extend([
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    fmt(z.re),
                    fmt(z.im),
                    fmt(magnitude_db(z)),
                    fmt(phase_deg(z)),
                ]);
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

// Shortest representation that parses back to the same f64.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

/// Γᶜ per frequency read back from a sweep CSV. All rows must share the
/// same swept-parameter values.
#[derive(Debug, Clone)]
pub struct ObservedData {
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub gamma_c: Vec<Mat<c64>>,
}

pub fn read_csv(input: impl Read) -> Result<ObservedData> {
    let mut r = csv::Reader::from_reader(input);
    let head: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let n = head.len();
    if n < 7 || head[0] != "frequency_hz" || head[n - 6..] != FIXED_COLUMNS {
        return Err(Error::Schema {
            path: "header".into(),
            message: format!("expected frequency_hz, parameters…, {}; got {head:?}", FIXED_COLUMNS.join(", ")),
        });
    }
    let param_names = head[1..n - 6].to_vec();
    let mut params: Option<Vec<f64>> = None;
    // frequency bits → (port_i, port_j) → value
    let mut by_freq: BTreeMap<u64, BTreeMap<(usize, usize), c64>> = BTreeMap::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c).and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Schema {
                path: format!("row {}, column {}", line + 2, head[c]),
                message: "not a number".into(),
            })
        };
        let f = num(0)?;
        if !(f > 0.0) {
            return Err(Error::Schema {
                path: format!("row {}", line + 2),
                message: "frequency must be positive".into(),
            });
        }
        let p = (1..n - 6).map(num).collect::<Result<Vec<_>>>()?;
        match &params {
            None => params = Some(p),
            Some(q) if *q != p => {
                return Err(Error::Schema {
                    path: format!("row {}", line + 2),
                    message: "observed data must hold a single parameter set (frequency sweep only)".into(),
                })
            }
            _ => {}
        }
        let (pi, pj) = (num(n - 6)? as usize, num(n - 5)? as usize);
        if pi == 0 || pj == 0 {
            return Err(Error::Schema {
                path: format!("row {}", line + 2),
                message: "port numbers are 1-based".into(),
            });
        }
        let z = c64::new(num(n - 4)?, num(n - 3)?);
        if by_freq.entry(f.to_bits()).or_default().insert((pi - 1, pj - 1), z).is_some() {
            return Err(Error::Schema { path: format!("row {}", line + 2), message: "duplicate entry".into() });
        }
    }
    if by_freq.is_empty() {
        return Err(Error::Schema { path: "rows".into(), message: "no data".into() });
    }
    let mut frequencies = Vec::new();
    let mut gamma_c = Vec::new();
    let mut ports = None;
    for (bits, entries) in &by_freq {
        let f = f64::from_bits(*bits);
        let e = entries.keys().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0);
        if *ports.get_or_insert(e) != e || entries.len() != e * e {
            return Err(Error::Schema { path: format!("frequency {f}"), message: "incomplete port matrix".into() });
        }
        frequencies.push(f);
        gamma_c.push(Mat::from_fn(e, e, |i, j| entries[&(i, j)]));
    }
    // BTreeMap over bit patterns orders positive floats ascending.
    Ok(ObservedData { param_names, params: params.unwrap_or_default(), frequencies, gamma_c })
}

/// Touchstone v1 file (`# Hz S RI R 50`). Requires a pure frequency sweep.
pub fn write_touchstone(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    if let Some(first) = result.records.first() {
        if result.records.iter().any(|r| r.params != first.params) {
            return Err(Error::Config("Touchstone output needs a sweep over frequency only".into()));
        }
    }
    let e = result.port_labels.len();
    writeln!(out, "! composite port reflection matrix, {} port(s): {}", e, result.port_labels.join(", "))?;
    for (name, v) in result.param_names.iter().zip(result.records.first().map(|r| r.params.clone()).unwrap_or_default())
    {
        writeln!(out, "! {name} = {v:?}")?;
    }
    writeln!(out, "# Hz S RI R 50")?;
    let mut recs: Vec<_> = result.records.iter().collect();
    recs.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    for rec in recs {
        let g = &rec.gamma_c;
        // Two-port files list S11 S21 S12 S22; larger ones are row-major,
        // at most four pairs per line.
        let order: Vec<(usize, usize)> = if e == 2 {
            vec![(0, 0), (1, 0), (0, 1), (1, 1)]
        } else {
            (0..e).flat_map(|i| (0..e).map(move |j| (i, j))).collect()
        };
        write!(out, "{:.9e}", rec.frequency)?;
        for (k, &(i, j)) in order.iter().enumerate() {
            if e > 2 && k > 0 && k % 4 == 0 {
                writeln!(out)?;
            }
            write!(out, " {:.12e} {:.12e}", g[(i, j)].re, g[(i, j)].im)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// File extension for an `e`-port Touchstone file.
pub fn touchstone_extension(ports: usize) -> String {
    format!("s{ports}p")
}
