//! Creutz ratios, decay fits, area/perimeter classification and the local
//! transfer-operator diagnostics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::contraction::WilsonResult;
use crate::error::{Error, Result};
use crate::linalg::{Eigen, ScaledComplex, DEGENERACY_TOL};
use crate::symmetry::C64;
use crate::tensor::GaugeTensor;
use crate::thermo::SpectrumTable;
use crate::transfer::{build_transfer, flux_svd, project, tau0, tau0_blocks, tau0_spectral, FluxSpec, SpectralReduction};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WilsonTable {
    entries: BTreeMap<(usize, usize), ScaledComplex>,
}

impl WilsonTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_results(results: &[((usize, usize), WilsonResult)]) -> Self {
        let mut t = Self::new();
        for (k, w) in results {
            t.insert(k.0, k.1, w.value);
        }
        t
    }

    /// Table holding `exp(log_abs(R1, R2))` for every loop in `loops`.
    pub fn from_log_abs(loops: impl IntoIterator<Item = (usize, usize)>, log_abs: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Self::new();
        for (a, b) in loops {
            t.insert(a, b, ScaledComplex::new(C64::new(1.0, 0.0), log_abs(a, b)));
        }
        t
    }

    pub fn insert(&mut self, r1: usize, r2: usize, w: ScaledComplex) {
        self.entries.insert((r1, r2), w);
    }

    pub fn get(&self, r1: usize, r2: usize) -> Option<ScaledComplex> {
        self.entries.get(&(r1, r2)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), ScaledComplex)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// `ln |W(R1, R2)|`; errors on a missing or vanishing entry.
    pub fn log_abs(&self, r1: usize, r2: usize) -> Result<f64> {
        match self.get(r1, r2) {
            None => Err(Error::Analysis(format!("no Wilson value for ({r1}, {r2})"))),
            Some(w) if w.is_zero() => Err(Error::Analysis(format!("Wilson value for ({r1}, {r2}) vanishes"))),
            Some(w) => Ok(w.log_abs()),
        }
    }

    /// Every entry scaled by `exp(shift)`.
    pub fn rescaled(&self, shift: f64) -> Self {
        let entries = self.entries.iter().map(|(k, w)| (*k, w.mul(&ScaledComplex::new(C64::new(1.0, 0.0), shift)))).collect();
        Self { entries }
    }

    /// Rows `R1,R2,neg_log_abs_w,arg_w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R1,R2,neg_log_abs_w,arg_w\n");
        for ((a, b), w) in &self.entries {
            let (l, arg) = if w.is_zero() { (f64::INFINITY, 0.0) } else { (-w.log_abs(), w.arg()) };
            let _ = writeln!(out, "{a},{b},{},{}", fmt_f64(l), fmt_f64(arg));
        }
        out
    }
}

/// `-ln |W(R1,R2) W(R1-1,R2-1) / (W(R1-1,R2) W(R1,R2-1))|`.
pub fn creutz(t: &WilsonTable, r1: usize, r2: usize) -> Result<f64> {
    if r1 < 2 || r2 < 2 {
        return Err(Error::Analysis("the Creutz ratio needs R1, R2 >= 2".into()));
    }
    Ok(-(t.log_abs(r1, r2)? + t.log_abs(r1 - 1, r2 - 1)? - t.log_abs(r1 - 1, r2)? - t.log_abs(r1, r2 - 1)?))
}

/// Creutz ratios for every loop whose three smaller neighbours are present.
pub fn creutz_table(t: &WilsonTable) -> Vec<((usize, usize), f64)> {
    t.iter().filter_map(|((a, b), _)| creutz(t, a, b).ok().map(|c| ((a, b), c))).collect()
}

pub fn creutz_csv(rows: &[((usize, usize), f64)]) -> String {
    let mut out = String::from("R1,R2,chi\n");
    for ((a, b), c) in rows {
        let _ = writeln!(out, "{a},{b},{}", fmt_f64(*c));
    }
    out
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// `rms` relative to the largest `|y|`.
    pub relative_rms: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::Analysis("a line fit needs at least two points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("rank-deficient fit: all abscissae equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    let scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let relative_rms = if rms == 0.0 {
        0.0
    } else if scale > 0.0 {
        rms / scale
    } else {
        f64::INFINITY
    };
    Ok(LineFit { slope, intercept, rms, relative_rms })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitWindow {
    pub r1: RangeInclusive<usize>,
    pub r2: RangeInclusive<usize>,
}

impl FitWindow {
    /// `R1` in `[2, min(6, N1 - 2)]`; `R2` over five values starting four
    /// past the largest `R1`, clipped to the torus height.
    pub fn default_for(n1: usize, n2: usize) -> Result<Self> {
        let r1_max = 6.min(n1.saturating_sub(2));
        if r1_max < 3 {
            return Err(Error::Analysis(format!("no default fit window for N1 = {n1}")));
        }
        let r2_top = (r1_max + 8).min(n2.saturating_sub(1));
        let r2_start = (r1_max + 4).min(r2_top.saturating_sub(4)).max(2);
        if r2_top < r2_start + 2 {
            return Err(Error::Analysis(format!("no default fit window for N2 = {n2}")));
        }
        Ok(FitWindow { r1: 2..=r1_max, r2: r2_start..=r2_top })
    }

    pub fn loops(&self) -> Vec<(usize, usize)> {
        self.r1.clone().flat_map(|a| self.r2.clone().map(move |b| (a, b))).collect()
    }
}

impl std::fmt::Display for FitWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R1 {}..={}, R2 {}..={}", self.r1.start(), self.r1.end(), self.r2.start(), self.r2.end())
    }
}

/// Fits of `-ln |W| = kappa_A R1 R2 + kappa_P (R1 + R2) - ln W0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub window: FitWindow,
    /// Per `R1`: `f(R2) = f1 R2 + f0`.
    pub per_r1: Vec<(usize, LineFit)>,
    /// `f1(R1) = kappa_A R1 + kappa_P`.
    pub f1_fit: LineFit,
    /// `f0(R1) = kappa_P R1 - ln W0`.
    pub f0_fit: LineFit,
    pub kappa_a: f64,
    pub kappa_p: f64,
    /// `kappa_P` read off the slope of `f0`.
    pub kappa_p_from_f0: f64,
    pub log_w0: f64,
}

impl FitReport {
    pub fn f1(&self) -> Vec<(usize, f64)> {
        self.per_r1.iter().map(|(r, l)| (*r, l.slope)).collect()
    }

    /// Rows `R1,f1,f0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R1,f1,f0\n");
        for (r, l) in &self.per_r1 {
            let _ = writeln!(out, "{r},{},{}", fmt_f64(l.slope), fmt_f64(l.intercept));
        }
        out
    }
}

pub fn fit_decay(t: &WilsonTable, window: &FitWindow) -> Result<FitReport> {
    let r1s: Vec<usize> = window.r1.clone().collect();
    let r2s: Vec<usize> = window.r2.clone().collect();
    if r1s.len() < 2 || r2s.len() < 3 {
        return Err(Error::Analysis(format!("fit window {window} needs at least 2 values of R1 and 3 of R2")));
    }
    let mut per_r1 = Vec::new();
    for &a in &r1s {
        let pts = r2s.iter().map(|&b| Ok((b as f64, -t.log_abs(a, b)?))).collect::<Result<Vec<_>>>()?;
        per_r1.push((a, fit_line(&pts)?));
    }
    let f1_fit = fit_line(&per_r1.iter().map(|(a, l)| (*a as f64, l.slope)).collect::<Vec<_>>())?;
    let f0_fit = fit_line(&per_r1.iter().map(|(a, l)| (*a as f64, l.intercept)).collect::<Vec<_>>())?;
    Ok(FitReport {
        window: window.clone(),
        per_r1,
        kappa_a: f1_fit.slope,
        kappa_p: f1_fit.intercept,
        kappa_p_from_f0: f0_fit.slope,
        log_w0: -f0_fit.intercept,
        f1_fit,
        f0_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `kappa_A` above this counts as an area term.
    pub kappa_a: f64,
    /// Maximum relative RMS residual for `ln |rho'_1(R)|` to count as linear.
    pub linearity: f64,
    /// Maximum `|slope + kappa_A| / kappa_A` between the spectrum and the fit.
    pub slope_match: f64,
    /// Maximum relative spread of `|rho'_1(R)|` to count as R-independent.
    pub r_independence: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { kappa_a: 1e-3, linearity: 1e-2, slope_match: 0.25, r_independence: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    AreaLaw(f64),
    PerimeterLaw(f64),
    Undetermined,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::AreaLaw(k) => write!(f, "area law (kappa_A = {})", fmt_f64(*k)),
            Classification::PerimeterLaw(k) => write!(f, "perimeter law (kappa_P = {})", fmt_f64(*k)),
            Classification::Undetermined => f.write_str("undetermined"),
        }
    }
}

/// Behaviour of `ln |rho'_1(R)|` for `1 <= R <= N1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEvidence {
    pub leading: Vec<(usize, f64)>,
    pub fit: Option<LineFit>,
    /// `(max - min) / max` of `|rho'_1(R)|`.
    pub relative_spread: f64,
}

impl SpectrumEvidence {
    pub fn from_table(s: &SpectrumTable) -> Result<Self> {
        let leading: Vec<(usize, f64)> = s.leading().into_iter().filter(|(r, _)| 2 * r <= s.n1).collect();
        if leading.is_empty() {
            return Err(Error::Analysis("no pierced-row spectrum with R <= N1/2".into()));
        }
        if leading.iter().any(|x| !x.1.is_finite()) {
            return Ok(SpectrumEvidence { leading, fit: None, relative_spread: 1.0 });
        }
        let max = leading.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let min = leading.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let relative_spread = 1.0 - (min - max).exp();
        let pts: Vec<(f64, f64)> = leading.iter().map(|&(r, l)| (r as f64, l)).collect();
        let fit = fit_line(&pts).ok();
        Ok(SpectrumEvidence { leading, fit, relative_spread })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,log_abs_rho1\n");
        for (r, l) in &self.leading {
            let _ = writeln!(out, "{r},{}", fmt_f64(*l));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub classification: Classification,
    pub thresholds: Thresholds,
    pub fit: FitReport,
    pub spectrum: SpectrumEvidence,
    pub creutz: Vec<((usize, usize), f64)>,
    pub local: Option<LocalCriteria>,
    pub notes: Vec<String>,
}

pub fn classify(fit: &FitReport, spectrum: &SpectrumTable, thresholds: Thresholds) -> Result<PhaseReport> {
    let ev = SpectrumEvidence::from_table(spectrum)?;
    let mut notes = Vec::new();
    let ka = fit.kappa_a;
    let classification = if ka > thresholds.kappa_a {
        match ev.fit {
            Some(l) if l.relative_rms <= thresholds.linearity && (l.slope + ka).abs() <= thresholds.slope_match * ka => {
                Classification::AreaLaw(ka)
            }
            Some(l) => {
                notes.push(format!(
                    "kappa_A = {} but ln|rho'_1(R)| has slope {} (relative residual {})",
                    fmt_f64(ka),
                    fmt_f64(l.slope),
                    fmt_f64(l.relative_rms)
                ));
                Classification::Undetermined
            }
            None => {
                notes.push(format!("kappa_A = {} but the pierced-row spectrum vanishes", fmt_f64(ka)));
                Classification::Undetermined
            }
        }
    } else if ka.abs() <= thresholds.kappa_a && ev.relative_spread <= thresholds.r_independence {
        Classification::PerimeterLaw(fit.kappa_p)
    } else {
        notes.push(format!("kappa_A = {} with relative spread {} of |rho'_1(R)|", fmt_f64(ka), fmt_f64(ev.relative_spread)));
        Classification::Undetermined
    };
    Ok(PhaseReport { classification, thresholds, fit: fit.clone(), spectrum: ev, creutz: Vec::new(), local: None, notes })
}

impl PhaseReport {
    pub fn with_creutz(mut self, creutz: Vec<((usize, usize), f64)>) -> Self {
        self.creutz = creutz;
        self
    }

    pub fn with_local(mut self, local: LocalCriteria) -> Self {
        self.local = Some(local);
        self
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.thresholds;
        let f = &self.fit;
        let _ = writeln!(out, "classification: {}", self.classification);
        let _ = writeln!(out, "fit_window: {}", f.window);
        let _ = writeln!(out, "kappa_a: {}", fmt_f64(f.kappa_a));
        let _ = writeln!(out, "kappa_p: {}", fmt_f64(f.kappa_p));
        let _ = writeln!(out, "kappa_p_from_f0: {}", fmt_f64(f.kappa_p_from_f0));
        let _ = writeln!(out, "log_w0: {}", fmt_f64(f.log_w0));
        let _ = writeln!(out, "f1_relative_residual: {}", fmt_f64(f.f1_fit.relative_rms));
        let _ = writeln!(out, "threshold_kappa_a: {}", fmt_f64(t.kappa_a));
        let _ = writeln!(out, "threshold_linearity: {}", fmt_f64(t.linearity));
        let _ = writeln!(out, "threshold_slope_match: {}", fmt_f64(t.slope_match));
        let _ = writeln!(out, "threshold_r_independence: {}", fmt_f64(t.r_independence));
        if let Some(l) = self.spectrum.fit {
            let _ = writeln!(out, "epar_slope: {}", fmt_f64(l.slope));
            let _ = writeln!(out, "epar_relative_residual: {}", fmt_f64(l.relative_rms));
        }
        let _ = writeln!(out, "epar_relative_spread: {}", fmt_f64(self.spectrum.relative_spread));
        if !self.creutz.is_empty() {
            let max = self.creutz.iter().map(|c| c.1.abs()).fold(0.0, f64::max);
            let last = self.creutz.iter().max_by_key(|c| (c.0 .0 + c.0 .1, c.0)).unwrap();
            let _ = writeln!(out, "creutz_max_abs: {}", fmt_f64(max));
            let _ = writeln!(out, "creutz_largest_loop: ({}, {}) {}", last.0 .0, last.0 .1, fmt_f64(last.1));
        }
        if let Some(l) = &self.local {
            out.push_str(&l.to_text());
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// Single-site diagnostics of whether an area law can arise.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCriteria {
    /// Eigenvalues of the flux-free singlet operator, by modulus.
    pub tau0_values: Vec<C64>,
    pub leading_degenerate: bool,
    /// `|lambda_2| / |lambda_1|`.
    pub gap_ratio: f64,
    /// Off-diagonal share of the squared norm of the `k = 0` block.
    pub off_diagonal_weight: f64,
    /// Largest squared entry of the normalized leading eigen-operator; 1 for
    /// a product projector.
    pub leading_purity: Option<f64>,
    /// `|Tr[M_1^T L_1]|` between the leading eigen-operator and the leading
    /// transverse factor of a straight flux line.
    pub flux_overlap: Option<f64>,
    pub area_law_compatible: bool,
}

impl LocalCriteria {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let vals: Vec<String> = self.tau0_values.iter().map(|z| fmt_f64(z.re)).collect();
        let _ = writeln!(out, "tau0_values: {}", vals.join(" "));
        let _ = writeln!(out, "tau0_leading_degenerate: {}", self.leading_degenerate);
        let _ = writeln!(out, "tau0_gap_ratio: {}", fmt_f64(self.gap_ratio));
        let _ = writeln!(out, "tau0_off_diagonal_weight: {}", fmt_f64(self.off_diagonal_weight));
        if let Some(p) = self.leading_purity {
            let _ = writeln!(out, "tau0_leading_purity: {}", fmt_f64(p));
        }
        if let Some(o) = self.flux_overlap {
            let _ = writeln!(out, "flux_leading_overlap: {}", fmt_f64(o));
        }
        let _ = writeln!(out, "local_area_law_compatible: {}", self.area_law_compatible);
        out
    }
}

const PURITY_MIN: f64 = 0.9;
const OVERLAP_MAX: f64 = 0.5;

pub fn local_criteria(tensor: &GaugeTensor) -> Result<LocalCriteria> {
    let g = tensor.group();
    let t0 = tau0(tensor)?;
    let eig = Eigen::new(&t0.matrix)?;
    let tau0_values = eig.values.clone();
    let l1 = tau0_values.first().map_or(0.0, |z| z.norm());
    let l2 = tau0_values.get(1).map_or(0.0, |z| z.norm());
    let leading_degenerate = l1 > 0.0 && (l1 - l2) <= DEGENERACY_TOL * l1;
    let gap_ratio = if l1 > 0.0 { l2 / l1 } else { 0.0 };

    let blocks = tau0_blocks(&t0)?;
    let zero = blocks.iter().find(|b| g.is_trivial(b.k)).expect("k = 0 block");
    let total: f64 = zero.matrix.iter().map(|z| z.norm_sqr()).sum();
    let diag: f64 = (0..zero.matrix.nrows().min(zero.matrix.ncols()))
        .filter(|&i| zero.rows[i].0 == zero.rows[i].1 && zero.cols[i].0 == zero.cols[i].1)
        .map(|i| zero.matrix[(i, i)].norm_sqr())
        .sum();
    let off_diagonal_weight = if total > 0.0 { 1.0 - diag / total } else { 0.0 };

    let mut leading_purity = None;
    let mut flux_overlap = None;
    if let Ok(SpectralReduction::Eigen { operators, .. }) = tau0_spectral(&t0) {
        if let Some(m1) = operators.first() {
            leading_purity = Some(m1.iter().map(|x| x * x).fold(0.0, f64::max));
            let j = g.reduce(1);
            if g.contains(j) && !g.is_trivial(j) {
                let op = build_transfer(tensor, FluxSpec::Right(j))?;
                let r = project(&op, g.conjugate(j)?, g.reduce(0))?;
                if let SpectralReduction::Singular { transverse, .. } = flux_svd(&r)? {
                    flux_overlap = Some(match transverse.first() {
                        Some(l1) => l1.iter().zip(m1.iter()).map(|(z, m)| z * *m).sum::<C64>().norm(),
                        None => 0.0,
                    });
                }
            }
        }
    }
    let area_law_compatible =
        !leading_degenerate && leading_purity.is_none_or(|p| p >= PURITY_MIN) && flux_overlap.is_none_or(|o| o < OVERLAP_MAX);
    Ok(LocalCriteria { tau0_values, leading_degenerate, gap_ratio, off_diagonal_weight, leading_purity, flux_overlap, area_law_compatible })
}
