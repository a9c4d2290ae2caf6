//! Quantities with unit suffixes as accepted in config files and on the
//! command line (`"3.5 GHz"`, `"-200 mm"`, `"10 mS/m"`); bare numbers are SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Length,
    Conductivity,
    Dimensionless,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Frequency => &[("THz", 1e12), ("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)],
            Dimension::Length => &[("km", 1e3), ("mm", 1e-3), ("cm", 1e-2), ("um", 1e-6), ("m", 1.0)],
            Dimension::Conductivity => &[("mS/m", 1e-3), ("uS/m", 1e-6), ("S/m", 1.0)],
            Dimension::Dimensionless => &[],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Length => "length",
            Dimension::Conductivity => "conductivity",
            Dimension::Dimensionless => "dimensionless number",
        }
    }
}

/// Parse `text` as a quantity of the given dimension, returning SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && !(matches!(c, 'e' | 'E') && is_exponent(t, i)))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = (t[..split].trim(), t[split..].trim());
    let value: f64 = num.parse().map_err(|_| Error::Config(format!("cannot read {:?} as a {}", text, dim.name())))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("non-finite {} {:?}", dim.name(), text)));
    }
    if unit.is_empty() {
        return Ok(value);
    }
    dim.units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| value * f)
        .ok_or_else(|| Error::Config(format!("unknown {} unit {unit:?} in {text:?}", dim.name())))
}

// An 'e' that is followed by a digit or sign and preceded by a digit is an
// exponent marker, not the start of a unit.
fn is_exponent(t: &str, i: usize) -> bool {
    let before = t[..i].chars().last().is_some_and(|c| c.is_ascii_digit() || c == '.');
    let after = t[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+');
    before && after
}

/// A config value that is either a bare (SI) number or a string with a
/// unit suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    pub fn si(&self, dim: Dimension) -> Result<f64> {
        match self {
            Quantity::Number(x) if x.is_finite() => Ok(*x),
            Quantity::Number(x) => Err(Error::Config(format!("non-finite {} {x}", dim.name()))),
            Quantity::Text(s) => parse_quantity(s, dim),
        }
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Number(x)
    }
}

impl From<&str> for Quantity {
    fn from(s: &str) -> Self {
        Quantity::Text(s.to_string())
    }
}
