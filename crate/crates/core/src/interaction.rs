//! Antenna–ground feedback: combines the free-space generalized scattering
//! matrix with 𝒲 into the composite port reflection matrix
//! `Γᶜ = Γ + ½R𝒲[1 − ½(S−1)𝒲]⁻¹T`.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Accum, Mat, MatRef, Par, Scale};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waves::SvwfBasis;
use crate::wmatrix::WMatrix;

/// Free-space GSM blocks at one frequency.
#[derive(Debug, Clone)]
pub struct GsmBlocks {
    /// Port reflection (e×e).
    pub gamma: Mat<c64>,
    /// Receiving (e×j).
    pub r_block: Mat<c64>,
    /// Transmitting (j×e).
    pub t_block: Mat<c64>,
    /// Scattering (j×j).
    pub s_block: Mat<c64>,
    pub frequency: f64,
    pub basis: SvwfBasis,
    pub port_labels: Vec<String>,
}

impl GsmBlocks {
    pub fn new(
        gamma: Mat<c64>,
        r_block: Mat<c64>,
        t_block: Mat<c64>,
        s_block: Mat<c64>,
        frequency: f64,
        basis: SvwfBasis,
        port_labels: Vec<String>,
    ) -> Result<Self> {
        let gsm = GsmBlocks { gamma, r_block, t_block, s_block, frequency, basis, port_labels };
        gsm.validate()?;
        Ok(gsm)
    }

    pub fn ports(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.gamma.nrows();
        let j = self.basis.len();
        let shapes = [
            ("gamma", &self.gamma, (e, e)),
            ("r", &self.r_block, (e, j)),
            ("t", &self.t_block, (j, e)),
            ("s", &self.s_block, (j, j)),
        ];
        if e == 0 {
            return Err(Error::Validation("GSM needs at least one port".into()));
        }
        for (name, m, (rows, cols)) in shapes {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::Validation(format!(
                    "block {name} is {}×{}, expected {rows}×{cols} (e = {e}, j = {j})",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !all_finite(m.as_ref()) {
                return Err(Error::Validation(format!("block {name} has non-finite entries")));
            }
        }
        if self.port_labels.len() != e {
            return Err(Error::Validation(format!("{} port labels for {e} ports", self.port_labels.len())));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::Validation(format!("frequency must be positive, got {}", self.frequency)));
        }
        Ok(())
    }

    /// Restriction to the leading SVWF basis of degree `l_max`.
    pub fn truncate(&self, l_max: usize) -> Result<GsmBlocks> {
        if l_max > self.basis.l_max() {
            return Err(Error::Validation(format!(
                "cannot truncate a degree-{} GSM to degree {l_max}",
                self.basis.l_max()
            )));
        }
        let basis = SvwfBasis::new(l_max)?;
        let j = basis.len();
        let e = self.ports();
        Ok(GsmBlocks {
            gamma: self.gamma.clone(),
            r_block: self.r_block.as_ref().submatrix(0, 0, e, j).to_owned(),
            t_block: self.t_block.as_ref().submatrix(0, 0, j, e).to_owned(),
            s_block: self.s_block.as_ref().submatrix(0, 0, j, j).to_owned(),
            frequency: self.frequency,
            basis,
            port_labels: self.port_labels.clone(),
        })
    }

    /// `½(S − 1)`.
    pub fn half_s_minus_one(&self) -> Mat<c64> {
        let j = self.basis.len();
        Mat::from_fn(j, j, |a, b| {
            let d = if a == b { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            0.5 * (self.s_block[(a, b)] - d)
        })
    }
}

fn all_finite(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| m.col(j).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// LU solve of the feedback system.
    Direct,
    /// First `N` reflection orders: `Σ_{p<N} [½(S−1)𝒲]^p`.
    Neumann(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolveOptions {
    pub mode: SolveMode,
    /// Reject the direct solve when the estimated reciprocal 1-norm
    /// condition number falls below this.
    pub rcond_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: SolveMode::Direct, rcond_floor: 1e-12 }
    }
}

impl SolveOptions {
    pub fn neumann(order: usize) -> Self {
        SolveOptions { mode: SolveMode::Neumann(order), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let SolveMode::Neumann(0) = self.mode {
            return Err(Error::Validation("Neumann order must be ≥ 1".into()));
        }
        if !(self.rcond_floor >= 0.0) {
            return Err(Error::Validation("rcond floor must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of one feedback solve.
#[derive(Debug, Clone)]
pub struct CompositeSolution {
    /// `Γᶜ` (e×e).
    pub gamma_c: Mat<c64>,
    /// Outgoing amplitudes `f` per port excitation (j×e).
    pub outgoing: Mat<c64>,
    /// Estimated reciprocal condition number of the feedback matrix (direct mode).
    pub rcond: Option<f64>,
}

fn check_compatible(gsm: &GsmBlocks, w: &WMatrix) -> Result<()> {
    check_compatible_parts(gsm.basis.l_max(), gsm.frequency, w)
}

fn check_compatible_parts(l_max: usize, frequency: f64, w: &WMatrix) -> Result<()> {
    if l_max != w.basis().l_max() {
        return Err(Error::Validation(format!(
            "GSM basis degree {l_max} differs from 𝒲 basis degree {}",
            w.basis().l_max()
        )));
    }
    let (fa, fb) = (frequency, w.frequency());
    if (fa - fb).abs() > 1e-9 * fa.abs().max(fb.abs()) {
        return Err(Error::Validation(format!("GSM frequency {fa} Hz differs from 𝒲 frequency {fb} Hz")));
    }
    Ok(())
}

/// `K = ½(S−1)𝒲`, formed block by block.
pub fn feedback_kernel(gsm: &GsmBlocks, w: &WMatrix) -> Result<Mat<c64>> {
    check_compatible(gsm, w)?;
    w.left_mul(gsm.half_s_minus_one().as_ref())
}

/// `Γᶜ = Γ + ½R𝒲[1 − ½(S−1)𝒲]⁻¹T`.
pub fn gamma_composite(gsm: &GsmBlocks, w: &WMatrix, opts: &SolveOptions) -> Result<Mat<c64>> {
    Ok(solve_composite(gsm, w, opts)?.gamma_c)
}

/// [`gamma_composite`] returning the intermediate outgoing amplitudes and
/// condition estimate as well.
pub fn solve_composite(gsm: &GsmBlocks, w: &WMatrix, opts: &SolveOptions) -> Result<CompositeSolution> {
    PreparedGsm::new(gsm)?.solve(w, opts)
}

/// A GSM reordered so that SVWFs sharing an azimuthal order are contiguous,
/// which turns every product with 𝒲 into dense block products. Build once
/// per GSM and reuse across stacks.
#[derive(Debug, Clone)]
pub struct PreparedGsm {
    basis: SvwfBasis,
    frequency: f64,
    gamma: Mat<c64>,
    // permuted position → canonical position
    order: Vec<usize>,
    // block m occupies order[ranges[m].0 .. ranges[m].0 + ranges[m].1]
    ranges: Vec<(usize, usize)>,
    half_s1: Mat<c64>,
    t_block: Mat<c64>,
    r_block: Mat<c64>,
}

impl PreparedGsm {
    pub fn new(gsm: &GsmBlocks) -> Result<Self> {
        gsm.validate()?;
        let mut order = Vec::with_capacity(gsm.basis.len());
        let mut ranges = Vec::with_capacity(gsm.basis.l_max() + 1);
        for m in 0..=gsm.basis.l_max() {
            let p = gsm.basis.positions_with_order(m);
            ranges.push((order.len(), p.len()));
            order.extend(p);
        }
        let j = order.len();
        let e = gsm.ports();
        let half_s1 = Mat::from_fn(j, j, |a, b| {
            let (pa, pb) = (order[a], order[b]);
            let d = if pa == pb { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            0.5 * (gsm.s_block[(pa, pb)] - d)
        });
        let t_block = Mat::from_fn(j, e, |a, c| gsm.t_block[(order[a], c)]);
        let r_block = Mat::from_fn(e, j, |c, a| gsm.r_block[(c, order[a])]);
        Ok(PreparedGsm {
            basis: gsm.basis.clone(),
            frequency: gsm.frequency,
            gamma: gsm.gamma.clone(),
            order,
            ranges,
            half_s1,
            t_block,
            r_block,
        })
    }

    pub fn basis(&self) -> &SvwfBasis {
        &self.basis
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn ports(&self) -> usize {
        self.gamma.nrows()
    }

    fn check(&self, w: &WMatrix) -> Result<()> {
        check_compatible_parts(self.basis.l_max(), self.frequency, w)?;
        for (b, &(start, len)) in w.blocks().iter().zip(&self.ranges) {
            if b.positions.as_slice() != &self.order[start..start + len] {
                return Err(Error::Validation("𝒲 block layout does not match the GSM basis".into()));
            }
        }
        Ok(())
    }

    // Block-diagonal 𝒲 times x, in permuted order.
    fn w_times(&self, w: &WMatrix, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for (b, &(start, len)) in w.blocks().iter().zip(&self.ranges) {
            matmul(
                out.as_mut().subrows_mut(start, len),
                Accum::Replace,
                b.values.as_ref(),
                x.subrows(start, len),
                c64::new(1.0, 0.0),
                Par::Seq,
            );
        }
        out
    }

    /// `1 − ½(S−1)𝒲` in permuted order.
    fn feedback_matrix(&self, w: &WMatrix) -> Mat<c64> {
        let j = self.order.len();
        let mut m = Mat::<c64>::identity(j, j);
        for (b, &(start, len)) in w.blocks().iter().zip(&self.ranges) {
            matmul(
                m.as_mut().subcols_mut(start, len),
                Accum::Add,
                self.half_s1.as_ref().subcols(start, len),
                b.values.as_ref(),
                c64::new(-1.0, 0.0),
                Par::Seq,
            );
        }
        m
    }

    // [1 − K]⁻¹ rhs or its Neumann truncation, permuted order throughout.
    fn solve_permuted(
        &self,
        w: &WMatrix,
        rhs: MatRef<'_, c64>,
        opts: &SolveOptions,
    ) -> Result<(Mat<c64>, Option<f64>)> {
        match opts.mode {
            SolveMode::Direct => {
                let m = self.feedback_matrix(w);
                let lu = m.partial_piv_lu();
                let rcond = rcond_estimate(m.as_ref(), &lu);
                if !(rcond >= opts.rcond_floor) {
                    return Err(Error::IllConditioned { rcond, floor: opts.rcond_floor });
                }
                Ok((lu.solve(rhs), Some(rcond)))
            }
            SolveMode::Neumann(order) => {
                let mut term = rhs.to_owned();
                let mut acc = term.clone();
                for _ in 1..order {
                    let wt = self.w_times(w, term.as_ref());
                    term = &self.half_s1 * &wt;
                    acc += &term;
                }
                Ok((acc, None))
            }
        }
    }

    fn unpermute_rows(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = Mat::zeros(x.nrows(), x.ncols());
        for (a, &p) in self.order.iter().enumerate() {
            out.row_mut(p).copy_from(x.row(a));
        }
        out
    }

    pub fn solve(&self, w: &WMatrix, opts: &SolveOptions) -> Result<CompositeSolution> {
        opts.validate()?;
        self.check(w)?;
        let (x, rcond) = self.solve_permuted(w, self.t_block.as_ref(), opts)?;
        let a = self.w_times(w, x.as_ref());
        let gamma_c = &self.gamma + (&self.r_block * &a) * Scale(c64::new(0.5, 0.0));
        Ok(CompositeSolution { gamma_c, outgoing: self.unpermute_rows(x.as_ref()), rcond })
    }

    pub fn gamma_composite(&self, w: &WMatrix, opts: &SolveOptions) -> Result<Mat<c64>> {
        Ok(self.solve(w, opts)?.gamma_c)
    }

    /// Outgoing amplitudes for the right-hand side `T·v`.
    pub fn solve_excitation(&self, w: &WMatrix, v: &[Complex64], opts: &SolveOptions) -> Result<Vec<Complex64>> {
        opts.validate()?;
        self.check(w)?;
        let vcol = Mat::from_fn(v.len(), 1, |i, _| v[i]);
        let tv = &self.t_block * &vcol;
        let (x, _) = self.solve_permuted(w, tv.as_ref(), opts)?;
        Ok(self.unpermute_rows(x.as_ref()).col(0).iter().copied().collect())
    }
}

/// Dense-matrix form of [`gamma_composite`], independent of any basis
/// ordering; `w` is the full j×j interaction matrix.
pub fn gamma_composite_dense(
    gamma: MatRef<'_, c64>,
    r_block: MatRef<'_, c64>,
    t_block: MatRef<'_, c64>,
    s_block: MatRef<'_, c64>,
    w: MatRef<'_, c64>,
    opts: &SolveOptions,
) -> Result<Mat<c64>> {
    opts.validate()?;
    let j = w.nrows();
    if w.ncols() != j || s_block.nrows() != j || s_block.ncols() != j || t_block.nrows() != j || r_block.ncols() != j {
        return Err(Error::Validation("inconsistent block dimensions".into()));
    }
    let half_s1 = Mat::from_fn(j, j, |a, b| {
        0.5 * (s_block[(a, b)] - if a == b { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
    });
    let kernel = &half_s1 * w;
    let (f, _) = solve_feedback(kernel.as_ref(), t_block, opts)?;
    Ok(gamma.to_owned() + (r_block * (w * &f)) * Scale(c64::new(0.5, 0.0)))
}

/// `[1 − K]⁻¹ T` (direct) or `Σ_{p<N} K^p T` (Neumann).
pub fn solve_feedback(
    kernel: MatRef<'_, c64>,
    rhs: MatRef<'_, c64>,
    opts: &SolveOptions,
) -> Result<(Mat<c64>, Option<f64>)> {
    let j = kernel.nrows();
    match opts.mode {
        SolveMode::Direct => {
            let m = Mat::from_fn(j, j, |a, b| {
                let d = if a == b { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                d - kernel[(a, b)]
            });
            let lu = m.partial_piv_lu();
            let rcond = rcond_estimate(m.as_ref(), &lu);
            if !(rcond >= opts.rcond_floor) {
                return Err(Error::IllConditioned { rcond, floor: opts.rcond_floor });
            }
            Ok((lu.solve(rhs), Some(rcond)))
        }
        SolveMode::Neumann(order) => {
            let mut term = rhs.to_owned();
            let mut acc = term.clone();
            for _ in 1..order {
                term = kernel * &term;
                acc += &term;
            }
            Ok((acc, None))
        }
    }
}

/// Operator 1-norm (max column absolute sum).
pub fn norm_one(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols()).map(|j| m.col(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Reciprocal 1-norm condition estimate `1/(‖M‖₁·est‖M⁻¹‖₁)` using the
/// Hager–Higham iteration on an existing LU factorization.
pub fn rcond_estimate(m: MatRef<'_, c64>, lu: &PartialPivLu<c64>) -> f64 {
    let n = m.nrows();
    let anorm = norm_one(m);
    if n == 0 || anorm == 0.0 {
        return 0.0;
    }
    let inv_norm = inverse_norm_one_estimate(lu, n);
    if !inv_norm.is_finite() {
        return 0.0;
    }
    1.0 / (anorm * inv_norm)
}

fn inverse_norm_one_estimate(lu: &PartialPivLu<c64>, n: usize) -> f64 {
    let mut x = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    let mut last_index = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        let y_norm: f64 = y.col(0).iter().map(|z| z.norm()).sum();
        if !y_norm.is_finite() {
            return f64::INFINITY;
        }
        if y_norm <= est {
            break;
        }
        est = y_norm;
        let xi = Mat::<c64>::from_fn(n, 1, |i, _| {
            let z = y[(i, 0)];
            let a = z.norm();
            if a == 0.0 {
                c64::new(1.0, 0.0)
            } else {
                z / a
            }
        });
        let z = lu.solve_adjoint(&xi);
        let (idx, zmax) =
            z.col(0)
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let zx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
        if zmax <= zx || idx == last_index {
            break;
        }
        last_index = idx;
        x = Mat::<c64>::zeros(n, 1);
        x[(idx, 0)] = c64::new(1.0, 0.0);
    }
    // Higham's alternating-sign vector guards against underestimation.
    let alt = Mat::<c64>::from_fn(n, 1, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        c64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
    });
    let y = lu.solve(&alt);
    let alt_est = 2.0 * y.col(0).iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt_est)
}

/// Amplitudes for one port excitation `v`.
#[derive(Debug, Clone)]
pub struct OutgoingSolution {
    /// Outgoing SVWF amplitudes `f`.
    pub f: Vec<Complex64>,
    /// Regular (reflected) amplitudes `a = 𝒲ᵗ f`.
    pub a: Vec<Complex64>,
    /// Reflected port amplitudes `w = Γv + ½Ra`.
    pub w_out: Vec<Complex64>,
}

pub fn solve_outgoing(gsm: &GsmBlocks, w: &WMatrix, v: &[Complex64], opts: &SolveOptions) -> Result<OutgoingSolution> {
    opts.validate()?;
    gsm.validate()?;
    let e = gsm.ports();
    if v.len() != e {
        return Err(Error::Validation(format!("excitation has {} entries for {e} ports", v.len())));
    }
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Validation("excitation has non-finite entries".into()));
    }
    let f = PreparedGsm::new(gsm)?.solve_excitation(w, v, opts)?;
    let vcol = Mat::from_fn(e, 1, |i, _| v[i]);
    let a = w.apply_transpose(&f)?;
    let acol = Mat::from_fn(a.len(), 1, |i, _| a[i]);
    let out = &gsm.gamma * &vcol + (&gsm.r_block * &acol) * Scale(c64::new(0.5, 0.0));
    Ok(OutgoingSolution { f, a, w_out: out.col(0).iter().copied().collect() })
}

/// `Γᶜ` truncated at successive reflection orders, compared with the direct
/// solve.
#[derive(Debug, Clone)]
pub struct ReflectionOrderStudy {
    pub direct: Mat<c64>,
    /// `(N, Γᶜ_N, max |Γᶜ_N − Γᶜ_direct|)` in increasing `N`.
    pub orders: Vec<(usize, Mat<c64>, f64)>,
}

pub fn reflection_order_study(gsm: &GsmBlocks, w: &WMatrix, orders: &[usize]) -> Result<ReflectionOrderStudy> {
    let direct = gamma_composite(gsm, w, &SolveOptions::default())?;
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::with_capacity(sorted.len());
    for n in sorted {
        let g = gamma_composite(gsm, w, &SolveOptions::neumann(n))?;
        let dev = max_abs_diff(g.as_ref(), direct.as_ref());
        out.push((n, g, dev));
    }
    Ok(ReflectionOrderStudy { direct, orders: out })
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Spectral radius of `½(S−1)𝒲` (dense eigenvalue computation; intended
/// for diagnostics on modest bases).
pub fn feedback_spectral_radius(gsm: &GsmBlocks, w: &WMatrix) -> Result<f64> {
    let kernel = feedback_kernel(gsm, w)?;
    spectral_radius(kernel.as_ref())
}

pub fn spectral_radius(m: MatRef<'_, c64>) -> Result<f64> {
    let ev = m.eigenvalues().map_err(|e| Error::Validation(format!("eigenvalue computation failed: {e:?}")))?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
