//! Large-loop Wilson estimates: the spectral (thermodynamic-limit) formula
//! and the closed-form perturbative Z2 result.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::contraction::{Engine, LoopSpec, TorusSpec};
use crate::error::{Error, Result};
use crate::linalg::{group_by_value, matmul, Eigen, ScaledComplex, DEGENERACY_TOL};
use crate::symmetry::{IrrepLabel, C64};
use crate::tensor::Z2Params;

/// Relative size below which an overlap counts as vanishing.
pub const RELEVANCE_TOL: f64 = 1e-10;

/// Relative modulus spread within which eigenvalues of the pierced row
/// matrix form one tier. Splittings this small stay invisible at any loop
/// size the engine can reach.
pub const TIER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoWilson {
    pub value: ScaledComplex,
    /// Index of the modulus tier of the pierced row matrix that couples to
    /// the loop ends; `None` when no tier couples.
    pub tier: Option<usize>,
    /// `ln |rho_1|` of the flux-free row matrix.
    pub log_rho: f64,
    /// `ln |rho'|` of the coupled tier.
    pub log_rho_prime: Option<f64>,
}

impl ThermoWilson {
    pub fn coupled(&self) -> bool {
        self.tier.is_some()
    }
}

fn column_norms(m: &DMatrix<C64>) -> Vec<f64> {
    m.column_iter().map(|c| c.norm()).collect()
}

/// Evaluates `<W> ~ (1/K) sum_j sum_i rho'_j^{R2-1} <w_i|E_b|v'_j><w'_j|E_t|v_i> / rho_1^{R2+1}`,
/// with `i` over the `K` eigenvectors of the flux-free row matrix at its
/// leading eigenvalue and `j` over the leading modulus tier of the pierced
/// row matrix that couples to the loop ends. Phases within a tier are
/// kept, so modulus-degenerate eigenvalues of opposite sign interfere.
pub fn wilson_thermo(engine: &Engine, r1: usize, r2: usize, j: IrrepLabel) -> Result<ThermoWilson> {
    let n1 = engine.torus().n1;
    if r2 < 1 {
        return Err(Error::Geometry("R2 must be at least 1".into()));
    }
    LoopSpec::new(r1, 2, j).check(TorusSpec { n1, n2: 3 })?;
    if engine.tensor().group().is_trivial(j) {
        return Ok(ThermoWilson { value: ScaledComplex::ONE, tier: Some(0), log_rho: 0.0, log_rho_prime: Some(0.0) });
    }
    let rows = engine.loop_rows_for(r1, j)?;
    let e_hat = engine.e_hat();

    let eig = Eigen::new(&e_hat.matrix)?;
    let rho = eig.values[0];
    let top = group_by_value(&eig.values, DEGENERACY_TOL * rho.norm())[0].clone();
    let k = top.len();
    let v = eig.right.columns(top.start, k).into_owned();
    let w = eig.left.columns(top.start, k).into_owned();

    let par = Eigen::new(&rows.middle.matrix)?;
    let max_mod = par.values.first().map_or(0.0, |z| z.norm());
    let moduli: Vec<C64> = par.values.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
    let tiers = group_by_value(&moduli, TIER_TOL * max_mod);

    // <w_i| E_b and E_t |v_i>
    let wb = matmul(&w.adjoint(), &rows.bottom.matrix);
    let tv = matmul(&rows.top.matrix, &v);
    let b_norm = rows.bottom.matrix.norm();
    let t_norm = rows.top.matrix.norm();
    let (wn, vn) = (column_norms(&w), column_norms(&v));

    let rho_s = ScaledComplex::new(rho, e_hat.log_scale);
    for (tier_index, tier) in tiers.iter().enumerate() {
        if max_mod == 0.0 || par.values[tier.start].norm() == 0.0 {
            break;
        }
        let mut sum = ScaledComplex::ZERO;
        let mut relevant = false;
        for jj in tier.clone() {
            let vp = par.right.column(jj);
            let wp = par.left.column(jj);
            let left = &wb * vp;
            let right = wp.adjoint() * &tv;
            let mut c = C64::new(0.0, 0.0);
            let mut bound: f64 = 0.0;
            for i in 0..k {
                c += left[i] * right[(0, i)];
                bound = bound.max(wn[i] * vn[i]);
            }
            let bound = bound * b_norm * t_norm * vp.norm() * wp.norm();
            if c.norm() > RELEVANCE_TOL * bound {
                relevant = true;
            }
            let rho_p = ScaledComplex::new(par.values[jj], rows.middle.log_scale);
            let term = ScaledComplex::new(c, rows.bottom.log_scale + rows.top.log_scale).mul(&rho_p.powi(r2 as i32 - 1));
            sum = sum.add(&term);
        }
        if relevant {
            let value = sum.div(&rho_s.powi(r2 as i32 + 1)).div(&ScaledComplex::from(C64::new(k as f64, 0.0)));
            return Ok(ThermoWilson {
                value,
                tier: Some(tier_index),
                log_rho: rho_s.log_abs(),
                log_rho_prime: Some(ScaledComplex::new(par.values[tier.start], rows.middle.log_scale).log_abs()),
            });
        }
    }
    Ok(ThermoWilson { value: ScaledComplex::ZERO, tier: None, log_rho: rho_s.log_abs(), log_rho_prime: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub r: usize,
    /// Sorted by modulus, descending; true eigenvalues are `values * exp(log_scale)`.
    pub values: Vec<C64>,
    pub log_scale: f64,
}

impl SpectrumEntry {
    /// `ln |rho'_1|`, or `-inf` for a vanishing matrix.
    pub fn leading_log_abs(&self) -> f64 {
        match self.values.first() {
            Some(z) if z.norm() > 0.0 => z.norm().ln() + self.log_scale,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Eigenvalues of the pierced row matrix as a function of the flux-line
/// separation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub n1: usize,
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    pub fn get(&self, r: usize) -> Option<&SpectrumEntry> {
        self.entries.iter().find(|e| e.r == r)
    }

    /// `(R, ln |rho'_1(R)|)` in ascending `R`.
    pub fn leading(&self) -> Vec<(usize, f64)> {
        self.entries.iter().map(|e| (e.r, e.leading_log_abs())).collect()
    }
}

pub fn epar_spectrum(engine: &Engine, rs: &[usize], j: IrrepLabel) -> Result<SpectrumTable> {
    let mut rs = rs.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let entries = rs
        .par_iter()
        .map(|&r| {
            let m = engine.epar(r, j)?;
            let eig = Eigen::new(&m.matrix)?;
            Ok(SpectrumEntry { r, values: eig.values, log_scale: m.log_scale })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { n1: engine.torus().n1, entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticWilson {
    pub value: f64,
    pub log_abs: f64,
    /// Set when the parameters are outside `|beta| << |delta| < |alpha|`.
    pub warnings: Vec<String>,
}

/// Closed-form large-loop result for the Z2 family without straight lines:
/// `2 |a d / b^2|^2 |d/a|^{2 R1 R2} |b^2/(a d)|^{2(R1+R2)}`, multiplied by
/// `Re[(a conj(b)/|a conj(b)|)^4]` for odd `R1 R2`.
pub fn wilson_analytic_z2(p: &Z2Params, r1: usize, r2: usize) -> Result<AnalyticWilson> {
    if p.gamma != C64::new(0.0, 0.0) {
        return Err(Error::Analysis("the closed form requires gamma = 0".into()));
    }
    let (a, b, d) = (p.alpha.norm(), p.beta.norm(), p.delta.norm());
    if a == 0.0 || b == 0.0 || d == 0.0 {
        return Err(Error::Analysis("the closed form requires nonzero alpha, beta and delta".into()));
    }
    let mut warnings = Vec::new();
    if d >= a {
        warnings.push(format!("|delta| = {d} is not below |alpha| = {a}"));
    }
    let small = (b / d).powi(4);
    if small > 1e-2 {
        warnings.push(format!("|beta/delta|^4 = {small:.3e} is not small"));
    }
    let (r1f, r2f) = (r1 as f64, r2 as f64);
    let log_abs = 2.0_f64.ln() + 2.0 * (a * d / (b * b)).ln() + 2.0 * r1f * r2f * (d / a).ln() + 2.0 * (r1f + r2f) * (b * b / (a * d)).ln();
    let mut sign = 1.0;
    if (r1 * r2) % 2 == 1 {
        let u = p.alpha * p.beta.conj();
        sign = (u / u.norm()).powi(4).re;
    }
    let log_abs = if sign == 0.0 { f64::NEG_INFINITY } else { log_abs + sign.abs().ln() };
    Ok(AnalyticWilson { value: sign.signum() * log_abs.exp(), log_abs, warnings })
}
