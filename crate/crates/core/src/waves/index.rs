use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// TE (`1`) or TM (`2`). Used both for the SVWF type τ and the PVWF type i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];

    pub fn code(self) -> u32 {
        match self {
            Polarization::Te => 1,
            Polarization::Tm => 2,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            1 => Ok(Polarization::Te),
            2 => Ok(Polarization::Tm),
            _ => Err(Error::Validation(format!("polarization code must be 1 or 2, got {code}"))),
        }
    }

    /// The swapped type, `ī = 3 − i`.
    pub fn swapped(self) -> Self {
        match self {
            Polarization::Te => Polarization::Tm,
            Polarization::Tm => Polarization::Te,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `e → 0`, `o → 1`.
    pub fn code(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Multi-index `n → (τ, σ, m, l)` of a real-harmonic spherical vector wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SvwfIndex {
    pub tau: Polarization,
    pub parity: Parity,
    pub m: usize,
    pub l: usize,
}

impl SvwfIndex {
    pub fn new(tau: Polarization, parity: Parity, m: usize, l: usize) -> Result<Self> {
        let n = SvwfIndex { tau, parity, m, l };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.m > self.l {
            return Err(Error::Validation(format!("invalid SVWF degree/order (l={}, m={})", self.l, self.m)));
        }
        if self.m == 0 && self.parity == Parity::Odd {
            return Err(Error::Validation("odd parity with m = 0 is a null function".into()));
        }
        Ok(())
    }
}

impl std::fmt::Display for SvwfIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = match self.parity {
            Parity::Even => 'e',
            Parity::Odd => 'o',
        };
        write!(f, "(τ={},{p},m={},l={})", self.tau.code(), self.m, self.l)
    }
}

/// Number of SVWFs up to degree `l_max`, `2·L(L+2)`.
pub fn basis_size(l_max: usize) -> usize {
    2 * l_max * (l_max + 2)
}

/// All SVWFs with `1 ≤ l ≤ l_max`, in canonical order: `l` outermost, then
/// `m = 0..=l`, then parity (even only for `m = 0`), then `τ = 1, 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvwfBasis {
    l_max: usize,
    indices: Vec<SvwfIndex>,
}

impl SvwfBasis {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max == 0 || l_max > crate::specfun::MAX_DEGREE {
            return Err(Error::Validation(format!(
                "L_max must lie in 1..={}, got {l_max}",
                crate::specfun::MAX_DEGREE
            )));
        }
        let mut indices = Vec::with_capacity(basis_size(l_max));
        for l in 1..=l_max {
            for m in 0..=l {
                let parities: &[Parity] = if m == 0 { &[Parity::Even] } else { &[Parity::Even, Parity::Odd] };
                for &parity in parities {
                    for tau in Polarization::BOTH {
                        indices.push(SvwfIndex { tau, parity, m, l });
                    }
                }
            }
        }
        Ok(SvwfBasis { l_max, indices })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[SvwfIndex] {
        &self.indices
    }

    pub fn get(&self, position: usize) -> Option<SvwfIndex> {
        self.indices.get(position).copied()
    }

    /// Canonical position of `n`, or `None` if it lies outside the basis.
    pub fn position(&self, n: &SvwfIndex) -> Option<usize> {
        if n.validate().is_err() || n.l > self.l_max {
            return None;
        }
        let before = 2 * (n.l * n.l - 1);
        let within = if n.m == 0 { 0 } else { 2 + 4 * (n.m - 1) + 2 * n.parity.code() as usize };
        Some(before + within + (n.tau.code() as usize - 1))
    }

    /// Positions of every index with azimuthal order `m`, in basis order.
    pub fn positions_with_order(&self, m: usize) -> Vec<usize> {
        self.indices.iter().enumerate().filter(|(_, n)| n.m == m).map(|(k, _)| k).collect()
    }
}
