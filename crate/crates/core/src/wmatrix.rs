//! The interaction matrix 𝒲 mapping outgoing spherical-wave amplitudes to
//! the regular amplitudes of the wave reflected by a layered half-space,
//! assembled as one contour integral per entry.
//!
//! The contour runs along the real axis from `u = −1` to `0` (propagating
//! spectrum) and then up the imaginary axis to `u = jκ̃` (evanescent
//! spectrum), each segment with its own Gauss–Legendre rule.

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fresnel::{fingerprint_words, rho_stack, LayerStack};
use crate::specfun::{angular_functions, gauss_legendre, legendre_table};
use crate::waves::{azimuthal_integral, azimuthal_norm, mirror_sign, Polarization, SvwfBasis, SvwfIndex};

const J: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const DEFAULT_IOTA: f64 = 0.55;
pub const DEFAULT_QUAD_ORDER: usize = 33;

/// `L_max = ⌈kR + 2(kR)^{1/3} + 3⌉`.
pub fn lmax_rule(kr_min: f64) -> Result<usize> {
    if !(kr_min > 0.0 && kr_min.is_finite()) {
        return Err(Error::Domain(format!("kR_min must be positive, got {kr_min}")));
    }
    Ok((kr_min + 2.0 * kr_min.cbrt() + 3.0).ceil() as usize)
}

/// `κ̃ = (ι·L_max + 1)/kR + 0.03·kR`, floored just above 1.
pub fn kappa_rule(l_max: usize, kr_min: f64, iota: f64) -> Result<f64> {
    if l_max < 1 {
        return Err(Error::Domain("L_max must be ≥ 1".into()));
    }
    if !(kr_min > 0.0 && kr_min.is_finite()) {
        return Err(Error::Domain(format!("kR_min must be positive, got {kr_min}")));
    }
    if l_max > 20 {
        log::warn!("truncation rule used with L_max = {l_max} > 20, outside its calibrated range");
    }
    let kappa = (iota * l_max as f64 + 1.0) / kr_min + 0.03 * kr_min;
    Ok(kappa.max(1.0 + 1e-6))
}

/// Truncated-contour parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub kappa_m: f64,
    pub iota: f64,
    pub quad_order_evanescent: usize,
    pub quad_order_propagating: usize,
    /// Traverse the evanescent segment backwards. Only useful as a negative
    /// control: it produces a wrong 𝒲.
    #[serde(default)]
    pub reverse_evanescent: bool,
}

impl ContourSpec {
    pub fn new(kappa_m: f64) -> Result<Self> {
        let spec = ContourSpec {
            kappa_m,
            iota: DEFAULT_IOTA,
            quad_order_evanescent: DEFAULT_QUAD_ORDER,
            quad_order_propagating: DEFAULT_QUAD_ORDER,
            reverse_evanescent: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_rule(l_max: usize, kr_min: f64, iota: f64) -> Result<Self> {
        let mut spec = Self::new(kappa_rule(l_max, kr_min, iota)?)?;
        spec.iota = iota;
        Ok(spec)
    }

    pub fn with_orders(mut self, propagating: usize, evanescent: usize) -> Result<Self> {
        self.quad_order_propagating = propagating;
        self.quad_order_evanescent = evanescent;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_m > 1.0 && self.kappa_m.is_finite()) {
            return Err(Error::Validation(format!("κ̃ must exceed 1, got {}", self.kappa_m)));
        }
        for order in [self.quad_order_evanescent, self.quad_order_propagating] {
            if !(2..=crate::specfun::MAX_QUADRATURE_ORDER).contains(&order) {
                return Err(Error::Validation(format!("quadrature order must lie in 2..=512, got {order}")));
            }
        }
        Ok(())
    }

    /// Quadrature nodes `u` and complex weights `du` along the contour.
    pub fn nodes(&self) -> Result<Vec<(Complex64, Complex64)>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.quad_order_propagating + self.quad_order_evanescent);
        let (x, w) = gauss_legendre(self.quad_order_propagating)?;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((Complex64::new(0.5 * (xi - 1.0), 0.0), Complex64::new(0.5 * wi, 0.0)));
        }
        let (x, w) = gauss_legendre(self.quad_order_evanescent)?;
        let orient = if self.reverse_evanescent { -1.0 } else { 1.0 };
        let half = 0.5 * self.kappa_m;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((J * half * (xi + 1.0), orient * J * half * wi));
        }
        Ok(out)
    }

    fn words(&self) -> [f64; 5] {
        [
            self.kappa_m,
            self.quad_order_evanescent as f64,
            self.quad_order_propagating as f64,
            if self.reverse_evanescent { 1.0 } else { 0.0 },
            self.iota,
        ]
    }
}

/// One azimuthal-order block of 𝒲.
#[derive(Debug, Clone)]
pub struct WBlock {
    pub m: usize,
    /// Basis positions covered by this block, ascending.
    pub positions: Vec<usize>,
    pub values: Mat<c64>,
}

/// 𝒲 stored as dense blocks per azimuthal order `m`; entries coupling
/// different `m` are structurally zero and never stored.
#[derive(Debug, Clone)]
pub struct WMatrix {
    basis: SvwfBasis,
    blocks: Vec<WBlock>,
    // position → (m, local index)
    lookup: Vec<(usize, usize)>,
    frequency: f64,
    stack_fingerprint: String,
    contour: ContourSpec,
}

impl WMatrix {
    /// All-zero 𝒲 (no ground).
    pub fn zeros(basis: &SvwfBasis, frequency: f64, contour: ContourSpec) -> Self {
        let blocks = (0..=basis.l_max())
            .map(|m| {
                let positions = basis.positions_with_order(m);
                let d = positions.len();
                WBlock { m, positions, values: Mat::zeros(d, d) }
            })
            .collect();
        Self::from_blocks(basis.clone(), blocks, frequency, String::new(), contour)
    }

    fn from_blocks(
        basis: SvwfBasis,
        blocks: Vec<WBlock>,
        frequency: f64,
        stack_fingerprint: String,
        contour: ContourSpec,
    ) -> Self {
        let mut lookup = vec![(0, 0); basis.len()];
        for b in &blocks {
            for (local, &p) in b.positions.iter().enumerate() {
                lookup[p] = (b.m, local);
            }
        }
        WMatrix { basis, blocks, lookup, frequency, stack_fingerprint, contour }
    }

    pub fn basis(&self) -> &SvwfBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn stack_fingerprint(&self) -> &str {
        &self.stack_fingerprint
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    pub fn blocks(&self) -> &[WBlock] {
        &self.blocks
    }

    /// Entry `(a, b)` by basis position; `None` when `m ≠ m'` (not stored).
    pub fn entry(&self, a: usize, b: usize) -> Option<Complex64> {
        let (ma, la) = self.lookup[a];
        let (mb, lb) = self.lookup[b];
        (ma == mb).then(|| self.blocks[ma].values[(la, lb)])
    }

    /// Entry `(a, b)`, zero for uncoupled orders.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.entry(a, b).unwrap_or(ZERO)
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(|b| b.positions.len().pow(2)).sum()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.len();
        let mut out = Mat::zeros(n, n);
        for b in &self.blocks {
            for (i, &pi) in b.positions.iter().enumerate() {
                for (j, &pj) in b.positions.iter().enumerate() {
                    out[(pi, pj)] = b.values[(i, j)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| {
                (0..b.values.ncols()).flat_map(move |j| b.values.col(j).iter().map(|z| z.norm()).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max)
    }

    /// `max|𝒲 − 𝒲ᵗ| / max|𝒲|` (zero for the zero matrix).
    pub fn symmetry_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            let d = b.positions.len();
            for i in 0..d {
                for j in i + 1..d {
                    worst = worst.max((b.values[(i, j)] - b.values[(j, i)]).norm());
                }
            }
        }
        worst / scale
    }

    /// `𝒲·x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut y = vec![ZERO; x.len()];
        for b in &self.blocks {
            for (i, &pi) in b.positions.iter().enumerate() {
                y[pi] = b.positions.iter().enumerate().map(|(j, &pj)| b.values[(i, j)] * x[pj]).sum();
            }
        }
        Ok(y)
    }

    /// `𝒲ᵗ·x`.
    pub fn apply_transpose(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut y = vec![ZERO; x.len()];
        for b in &self.blocks {
            for (j, &pj) in b.positions.iter().enumerate() {
                y[pj] = b.positions.iter().enumerate().map(|(i, &pi)| b.values[(i, j)] * x[pi]).sum();
            }
        }
        Ok(y)
    }

    /// `A·𝒲` for a dense `A` with `len()` columns, one product per block.
    pub fn left_mul(&self, a: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_len(a.ncols())?;
        let mut out = Mat::zeros(a.nrows(), a.ncols());
        for b in &self.blocks {
            let cols = Mat::from_fn(a.nrows(), b.positions.len(), |i, j| a[(i, b.positions[j])]);
            let prod = &cols * &b.values;
            for (j, &pj) in b.positions.iter().enumerate() {
                out.col_mut(pj).copy_from(prod.col(j));
            }
        }
        Ok(out)
    }

    /// `𝒲·B` for a dense `B` with `len()` rows.
    pub fn right_mul(&self, bmat: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check_len(bmat.nrows())?;
        let mut out = Mat::zeros(bmat.nrows(), bmat.ncols());
        for b in &self.blocks {
            let rows = Mat::from_fn(b.positions.len(), bmat.ncols(), |i, j| bmat[(b.positions[i], j)]);
            let prod = &b.values * &rows;
            for (i, &pi) in b.positions.iter().enumerate() {
                out.row_mut(pi).copy_from(prod.row(i));
            }
        }
        Ok(out)
    }

    /// Restriction to the leading basis of degree `l_max` (a prefix of the
    /// canonical order).
    pub fn truncate(&self, l_max: usize) -> Result<WMatrix> {
        if l_max > self.basis.l_max() {
            return Err(Error::Validation(format!("cannot truncate 𝒲 of degree {} to {l_max}", self.basis.l_max())));
        }
        let basis = SvwfBasis::new(l_max)?;
        let n = basis.len();
        let blocks = self.blocks[..=l_max]
            .iter()
            .map(|b| {
                let keep = b.positions.iter().take_while(|&&p| p < n).count();
                WBlock {
                    m: b.m,
                    positions: b.positions[..keep].to_vec(),
                    values: b.values.as_ref().submatrix(0, 0, keep, keep).to_owned(),
                }
            })
            .collect();
        Ok(Self::from_blocks(basis, blocks, self.frequency, self.stack_fingerprint.clone(), self.contour))
    }

    /// Identifier tying this matrix to (stack, frequency, basis, contour).
    pub fn fingerprint(&self) -> String {
        wmatrix_fingerprint(&self.stack_fingerprint, self.frequency, self.basis.l_max(), &self.contour)
    }

    /// Serialize for the on-disk cache: one JSON header line, then every
    /// block's values as little-endian `(re, im)` pairs, column-major.
    pub fn write_binary(&self, mut out: impl std::io::Write) -> Result<()> {
        let header = serde_json::json!({
            "format": "lgsm-wmatrix 1",
            "fingerprint": self.fingerprint(),
            "frequency": self.frequency,
            "l_max": self.basis.l_max(),
            "stack_fingerprint": self.stack_fingerprint,
            "contour": self.contour,
        });
        writeln!(out, "{header}")?;
        let mut buf = Vec::with_capacity(16 * self.nnz());
        for b in &self.blocks {
            for j in 0..b.values.ncols() {
                for z in b.values.col(j).iter() {
                    buf.extend_from_slice(&z.re.to_le_bytes());
                    buf.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Inverse of [`WMatrix::write_binary`].
    pub fn read_binary(input: impl std::io::Read) -> Result<WMatrix> {
        use std::io::{BufRead, Read};
        let mut input = std::io::BufReader::new(input);
        let mut line = String::new();
        input.read_line(&mut line)?;
        let header: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Format(format!("𝒲 cache header: {e}")))?;
        if header["format"] != "lgsm-wmatrix 1" {
            return Err(Error::Format("not a 𝒲 cache file".into()));
        }
        let field =
            |k: &str| header.get(k).cloned().ok_or_else(|| Error::Format(format!("𝒲 cache header lacks `{k}`")));
        let parse = |e: serde_json::Error| Error::Format(format!("𝒲 cache header: {e}"));
        let frequency: f64 = serde_json::from_value(field("frequency")?).map_err(parse)?;
        let l_max: usize = serde_json::from_value(field("l_max")?).map_err(parse)?;
        let stack_fingerprint: String = serde_json::from_value(field("stack_fingerprint")?).map_err(parse)?;
        let contour: ContourSpec = serde_json::from_value(field("contour")?).map_err(parse)?;
        let fingerprint: String = serde_json::from_value(field("fingerprint")?).map_err(parse)?;
        let basis = SvwfBasis::new(l_max)?;
        let mut w = WMatrix::zeros(&basis, frequency, contour);
        w.stack_fingerprint = stack_fingerprint;
        if w.fingerprint() != fingerprint {
            return Err(Error::Format("𝒲 cache fingerprint does not match its header".into()));
        }
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * w.nnz() {
            return Err(Error::Format(format!("𝒲 cache payload has {} bytes, expected {}", bytes.len(), 16 * w.nnz())));
        }
        let mut words = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        for b in &mut w.blocks {
            for j in 0..b.values.ncols() {
                for i in 0..b.values.nrows() {
                    let re = words.next().expect("length checked");
                    let im = words.next().expect("length checked");
                    b.values[(i, j)] = c64::new(re, im);
                }
            }
        }
        Ok(w)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::Validation(format!("dimension {n} does not match basis size {}", self.len())));
        }
        Ok(())
    }
}

pub fn wmatrix_fingerprint(stack_fingerprint: &str, frequency: f64, l_max: usize, contour: &ContourSpec) -> String {
    let mut words: Vec<f64> = stack_fingerprint.bytes().map(f64::from).collect();
    words.extend([frequency, l_max as f64]);
    words.extend(contour.words());
    fingerprint_words(&words)
}

// B_ni and B†_ni at every node for one (l, m, τ) depend on τ only through
// whether τ = i, so they are tabulated per (l, m) as [same, cross] pairs.
struct NodeTable {
    u: Complex64,
    weight: Complex64,
    // packed (l, m) → (jΔ-part, π-part) for B, and the same for B†
    b: Vec<[Complex64; 2]>,
    bd: Vec<[Complex64; 2]>,
}

/// Reusable assembly state for one basis degree and contour: quadrature
/// nodes and the transform coefficients at every node. Only the reflection
/// coefficients and phase factor depend on the stack and frequency.
#[derive(Clone)]
pub struct WAssembler {
    basis: SvwfBasis,
    contour: ContourSpec,
    nodes: std::sync::Arc<Vec<NodeTable>>,
}

impl std::fmt::Debug for WAssembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WAssembler")
            .field("l_max", &self.basis.l_max())
            .field("contour", &self.contour)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

#[inline]
fn lm(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

fn j_power(l: usize) -> Complex64 {
    match l % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => J,
        2 => Complex64::new(-1.0, 0.0),
        _ => -J,
    }
}

impl WAssembler {
    pub fn new(basis: &SvwfBasis, contour: &ContourSpec) -> Result<Self> {
        let l_max = basis.l_max();
        let nodes = contour
            .nodes()?
            .into_iter()
            .map(|(u, weight)| {
                let ang = angular_functions(&legendre_table(u, l_max)?);
                let size = lm(l_max, l_max) + 1;
                let mut b = vec![[ZERO; 2]; size];
                let mut bd = vec![[ZERO; 2]; size];
                for l in 1..=l_max {
                    let jl = j_power(l);
                    for m in 0..=l {
                        let (d, p) = (ang.delta(l, m), ang.pi(l, m));
                        b[lm(l, m)] = [jl * J * d, jl * p];
                        bd[lm(l, m)] = [jl.conj() * -J * d, jl.conj() * p];
                    }
                }
                Ok(NodeTable { u, weight, b, bd })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WAssembler { basis: basis.clone(), contour: *contour, nodes: std::sync::Arc::new(nodes) })
    }

    pub fn basis(&self) -> &SvwfBasis {
        &self.basis
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    /// Quadrature nodes `u` along the contour.
    pub fn node_values(&self) -> Vec<Complex64> {
        self.nodes.iter().map(|n| n.u).collect()
    }

    /// Assemble 𝒲, integrating the upper triangle of each block and
    /// mirroring it.
    pub fn assemble(&self, stack: &LayerStack, k: f64, omega: f64) -> Result<WMatrix> {
        self.assemble_impl(stack, k, omega, true)
    }

    /// Assemble every entry independently (no mirroring); used to verify
    /// the symmetry of 𝒲.
    pub fn assemble_full(&self, stack: &LayerStack, k: f64, omega: f64) -> Result<WMatrix> {
        self.assemble_impl(stack, k, omega, false)
    }

    fn assemble_impl(&self, stack: &LayerStack, k: f64, omega: f64, mirror: bool) -> Result<WMatrix> {
        stack.validate()?;
        let k_top = stack.top_wavenumber(omega);
        if !(k > 0.0) || (k - k_top).abs() > 1e-9 * k_top {
            return Err(Error::Validation(format!(
                "wavenumber {k} rad/m inconsistent with the top medium at ω = {omega} rad/s ({k_top} rad/m)"
            )));
        }
        // f_i(u) = du · ρ_i(u) · e^{−2jk z_I u}
        let mut factors = [Vec::with_capacity(self.nodes.len()), Vec::with_capacity(self.nodes.len())];
        for node in self.nodes.iter() {
            let phase = (-2.0 * J * k * stack.z_interface * node.u).exp();
            for i in Polarization::BOTH {
                let rho = rho_stack(i, stack, node.u, omega)?;
                factors[i.code() as usize - 1].push(node.weight * rho * phase);
            }
        }

        let l_max = self.basis.l_max();
        let build = |m: usize| self.block(m, &factors, mirror);
        #[cfg(feature = "parallel")]
        let blocks: Vec<WBlock> = {
            use rayon::prelude::*;
            (0..=l_max).into_par_iter().map(build).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let blocks: Vec<WBlock> = (0..=l_max).map(build).collect();

        let frequency = omega / (2.0 * PI);
        Ok(WMatrix::from_blocks(self.basis.clone(), blocks, frequency, stack.fingerprint(), self.contour))
    }

    fn block(&self, m: usize, factors: &[Vec<Complex64>; 2], mirror: bool) -> WBlock {
        let positions = self.basis.positions_with_order(m);
        let idx: Vec<SvwfIndex> = positions.iter().map(|&p| self.basis.indices()[p]).collect();
        let l_lo = m.max(1);
        let l_max = self.basis.l_max();
        let nl = l_max + 1 - l_lo;
        // Reduced kernels G_i[(l, s), (l', s')] = Σ_q B·f_i·B†, s = 0 for τ = i.
        let nr = 2 * nl;
        let row = |l: usize, same: bool| 2 * (l - l_lo) + usize::from(!same);
        let mut g = [vec![ZERO; nr * nr], vec![ZERO; nr * nr]];
        let mut bq = vec![ZERO; nr];
        let mut bdq = vec![ZERO; nr];
        for (q, node) in self.nodes.iter().enumerate() {
            for l in l_lo..=l_max {
                let [same, cross] = node.b[lm(l, m)];
                bq[row(l, true)] = same;
                bq[row(l, false)] = cross;
                let [same, cross] = node.bd[lm(l, m)];
                bdq[row(l, true)] = same;
                bdq[row(l, false)] = cross;
            }
            for (gi, f) in g.iter_mut().zip(factors) {
                let fq = f[q];
                if fq == ZERO {
                    continue;
                }
                for r in 0..nr {
                    let br = bq[r] * fq;
                    // Rows of equal degree share a 2×2 diagonal tile that is always needed.
                    let lo = if mirror { r & !1 } else { 0 };
                    let dst = &mut gi[r * nr..(r + 1) * nr];
                    for c in lo..nr {
                        dst[c] += br * bdq[c];
                    }
                }
            }
        }

        let d = positions.len();
        let norm2 = 2.0 * azimuthal_norm(m).powi(2);
        let mut values = Mat::<c64>::zeros(d, d);
        for a in 0..d {
            let lo = if mirror { a } else { 0 };
            for b in lo..d {
                let (na, nb) = (&idx[a], &idx[b]);
                let mut acc = ZERO;
                for i in Polarization::BOTH {
                    let ii = azimuthal_integral(na, nb, i);
                    if ii == 0.0 {
                        continue;
                    }
                    let r = row(na.l, na.tau == i);
                    let c = row(nb.l, nb.tau == i);
                    // a ≤ b implies l_a ≤ l_b, so (r, c) lies in the computed band.
                    let gval = g[i.code() as usize - 1][r * nr + c];
                    acc += mirror_sign(nb, i) * ii * gval;
                }
                values[(a, b)] = norm2 * acc;
                if mirror && a != b {
                    values[(b, a)] = values[(a, b)];
                }
            }
        }
        WBlock { m, positions, values }
    }
}

/// One-shot assembly; prefer [`WAssembler`] when the basis and contour are
/// reused across stacks or frequencies.
pub fn assemble_w(basis: &SvwfBasis, stack: &LayerStack, k: f64, omega: f64, contour: &ContourSpec) -> Result<WMatrix> {
    WAssembler::new(basis, contour)?.assemble(stack, k, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fresnel::Medium;
    use crate::C0;

    #[test]
    fn binary_round_trip_is_exact() {
        let basis = SvwfBasis::new(4).unwrap();
        let f = 3.5e9;
        let omega = 2.0 * PI * f;
        let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.01).unwrap(), -0.2).unwrap();
        let w = assemble_w(&basis, &stack, omega / C0, omega, &ContourSpec::new(1.3).unwrap()).unwrap();
        let mut buf = Vec::new();
        w.write_binary(&mut buf).unwrap();
        let back = WMatrix::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.fingerprint(), w.fingerprint());
        for (a, b) in w.blocks().iter().zip(back.blocks()) {
            assert_eq!(a.values, b.values);
        }
        buf.truncate(buf.len() - 3);
        assert!(WMatrix::read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn lmax_rule_examples() {
        assert_eq!(lmax_rule(f64::MIN_POSITIVE).unwrap(), 3);
        assert_eq!(lmax_rule(1.0).unwrap(), 6);
        assert_eq!(lmax_rule(9.785).unwrap(), 18);
    }

    #[test]
    fn kappa_rule_examples() {
        assert!((kappa_rule(17, 1.0, 0.0).unwrap() - 1.03).abs() < 1e-15);
        assert!((kappa_rule(17, 9.785, 0.55).unwrap() - 1.3513).abs() < 1e-4);
        assert!((kappa_rule(20, 20.0, 0.55).unwrap() - 1.2).abs() < 1e-12);
        assert!(kappa_rule(1, 1e6, 0.0).unwrap() > 1.0);
    }

    #[test]
    fn contour_rejects_kappa_at_most_one() {
        assert!(ContourSpec::new(1.0).is_err());
        assert!(ContourSpec::new(1.2).unwrap().with_orders(1, 33).is_err());
    }

    fn setup(l_max: usize) -> (SvwfBasis, f64, f64, ContourSpec) {
        let f = 3.5e9;
        let omega = 2.0 * PI * f;
        let k = omega / C0;
        let basis = SvwfBasis::new(l_max).unwrap();
        let contour = ContourSpec::new(1.5).unwrap();
        (basis, k, omega, contour)
    }

    #[test]
    fn vacuum_stack_gives_exact_zero() {
        let (basis, _, omega, contour) = setup(4);
        let stack = LayerStack::half_space(Medium::VACUUM, -0.2).unwrap();
        let w = assemble_w(&basis, &stack, stack.top_wavenumber(omega), omega, &contour).unwrap();
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn mirrored_matches_full_assembly() {
        let (basis, _, omega, contour) = setup(5);
        let stack = LayerStack::half_space(Medium::dielectric(4.0, 0.01).unwrap(), -0.2).unwrap();
        let k = stack.top_wavenumber(omega);
        let asm = WAssembler::new(&basis, &contour).unwrap();
        let w = asm.assemble(&stack, k, omega).unwrap();
        let full = asm.assemble_full(&stack, k, omega).unwrap();
        assert!(full.symmetry_error() < 1e-12);
        let scale = w.max_abs();
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                assert!((w.get(a, b) - full.get(a, b)).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn wavenumber_mismatch_rejected() {
        let (basis, k, omega, contour) = setup(2);
        let stack = LayerStack::pec(-0.2).unwrap();
        assert!(assemble_w(&basis, &stack, 1.1 * k, omega, &contour).is_err());
    }

    #[test]
    fn block_products_match_dense() {
        let (basis, _, omega, contour) = setup(3);
        let stack = LayerStack::pec(-0.1).unwrap();
        let w = assemble_w(&basis, &stack, stack.top_wavenumber(omega), omega, &contour).unwrap();
        let n = basis.len();
        let a = Mat::<c64>::from_fn(n, n, |i, j| c64::new((i * 7 + j) as f64 % 5.0, (i + 3 * j) as f64 % 3.0));
        let dense = w.to_dense();
        let expect_l = &a * &dense;
        let expect_r = &dense * &a;
        let got_l = w.left_mul(a.as_ref()).unwrap();
        let got_r = w.right_mul(a.as_ref()).unwrap();
        assert!((&expect_l - &got_l).norm_l2() <= 1e-12 * expect_l.norm_l2());
        assert!((&expect_r - &got_r).norm_l2() <= 1e-12 * expect_r.norm_l2());
    }

    #[test]
    fn truncation_keeps_leading_blocks() {
        let (basis, _, omega, contour) = setup(4);
        let stack = LayerStack::pec(-0.2).unwrap();
        let w = assemble_w(&basis, &stack, stack.top_wavenumber(omega), omega, &contour).unwrap();
        let t = w.truncate(2).unwrap();
        assert_eq!(t.len(), 16);
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(t.get(a, b), w.get(a, b));
            }
        }
    }
}
