//! Row transfer matrices and exact contraction on an `N1 x N2` torus.
//!
//! Rows are stacked bottom to top; a row matrix maps the configuration of
//! its lower vertical legs (row index) to that of its upper legs (column
//! index). Column 0 is the most significant digit of a row configuration.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{is_real, matmul, max_abs, rescale, trace_product, ScaledComplex};
use crate::symmetry::{IrrepLabel, C64};
use crate::tensor::GaugeTensor;
use crate::transfer::{build_transfer, project, FluxSpec, LegSpace, ReducedTransfer};

pub const DEFAULT_BUDGET: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusSpec {
    pub n1: usize,
    pub n2: usize,
}

impl TorusSpec {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::Geometry(format!("torus {n1}x{n2}: both sides must be at least 2")));
        }
        Ok(Self { n1, n2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LoopSpec {
    pub r1: usize,
    pub r2: usize,
    pub j: IrrepLabel,
}

impl LoopSpec {
    pub fn new(r1: usize, r2: usize, j: IrrepLabel) -> Self {
        Self { r1, r2, j }
    }

    pub fn check(&self, torus: TorusSpec) -> Result<()> {
        if self.r1 < 1 || self.r1 >= torus.n1 || self.r2 < 1 || self.r2 >= torus.n2 {
            return Err(Error::Geometry(format!("loop {}x{} does not fit a {}x{} torus", self.r1, self.r2, torus.n1, torus.n2)));
        }
        Ok(())
    }
}

/// Bra-minus-ket label shifts on every link crossed by a rectangular loop
/// with lower-left corner at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopShifts {
    pub torus: TorusSpec,
    /// `horizontal[y][x]`: link from site `(x, y)` to `(x+1, y)`.
    pub horizontal: Vec<Vec<i64>>,
    /// `vertical[y][x]`: link from site `(x, y)` to `(x, y+1)`.
    pub vertical: Vec<Vec<i64>>,
}

impl LoopShifts {
    pub fn new(torus: TorusSpec, lp: &LoopSpec, origin: (usize, usize)) -> Self {
        let TorusSpec { n1, n2 } = torus;
        let mut horizontal = vec![vec![0; n1]; n2];
        let mut vertical = vec![vec![0; n1]; n2];
        let j = lp.j.0;
        let (x0, y0) = origin;
        for i in 0..lp.r1 {
            horizontal[y0 % n2][(x0 + i) % n1] += j;
            horizontal[(y0 + lp.r2) % n2][(x0 + i) % n1] -= j;
        }
        for i in 0..lp.r2 {
            vertical[(y0 + i) % n2][(x0 + lp.r1) % n1] += j;
            vertical[(y0 + i) % n2][x0 % n1] -= j;
        }
        Self { torus, horizontal, vertical }
    }

    /// Flux kind and ingoing sectors `(left, down)` at site `(x, y)`.
    pub fn site(&self, g: crate::GroupSpec, j: IrrepLabel, x: usize, y: usize) -> Result<(FluxSpec, IrrepLabel, IrrepLabel)> {
        let TorusSpec { n1, n2 } = self.torus;
        let flux = FluxSpec::from_shifts(g, j, self.horizontal[y][x], self.vertical[y][x])?;
        let left = g.reduce(-self.horizontal[y][(x + n1 - 1) % n1]);
        let down = g.reduce(-self.vertical[(y + n2 - 1) % n2][x]);
        Ok((flux, left, down))
    }
}

/// Dense row operator `matrix * exp(log_scale)` with the leg spaces of its
/// lower (`input`) and upper (`output`) vertical legs.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    pub matrix: DMatrix<C64>,
    pub log_scale: f64,
    pub input: Vec<LegSpace>,
    pub output: Vec<LegSpace>,
}

impl RowMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_zero(&self) -> bool {
        max_abs(&self.matrix) == 0.0
    }

    pub fn identity(profile: Vec<LegSpace>, dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), log_scale: 0.0, input: profile.clone(), output: profile }
    }

    /// Product `self * other` (self below other), rescaled.
    pub fn mul(&self, other: &RowMatrix) -> Result<RowMatrix> {
        if self.output != other.input {
            return Err(Error::SectorMismatch(format!("row profiles do not match: {:?} vs {:?}", self.output, other.input)));
        }
        let mut matrix = matmul(&self.matrix, &other.matrix);
        let s = rescale(&mut matrix).unwrap_or(0.0);
        Ok(RowMatrix { matrix, log_scale: self.log_scale + other.log_scale + s, input: self.input.clone(), output: other.output.clone() })
    }

    pub fn pow(&self, n: usize) -> Result<RowMatrix> {
        let mut result = RowMatrix::identity(self.input.clone(), self.dim());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `Tr[self * other]`.
    pub fn trace_with(&self, other: &RowMatrix) -> Result<ScaledComplex> {
        if self.output != other.input || other.output != self.input {
            return Err(Error::SectorMismatch("trace over mismatched row profiles".into()));
        }
        let t = trace_product(&self.matrix, &other.matrix);
        Ok(ScaledComplex::new(t, self.log_scale + other.log_scale))
    }

    pub fn trace(&self) -> ScaledComplex {
        ScaledComplex::new(self.matrix.trace(), self.log_scale)
    }

    /// The operator with its scale folded back in.
    pub fn unscaled(&self) -> DMatrix<C64> {
        let f = self.log_scale.exp();
        self.matrix.map(|z| z * f)
    }
}

type Entry = (usize, usize, usize, usize, C64);

/// Contracts the horizontal legs of a periodic row of reduced operators.
pub fn build_row(columns: &[&ReducedTransfer]) -> Result<RowMatrix> {
    let Some(first) = columns.first() else {
        return Err(Error::Geometry("empty row".into()));
    };
    let n = columns.len();
    let dim = first.leg_dim;
    for (x, c) in columns.iter().enumerate() {
        if c.leg_dim != dim || c.group != first.group {
            return Err(Error::SectorMismatch(format!("column {x} has a different leg space")));
        }
        let next = columns[(x + 1) % n];
        if c.right() != next.left() {
            return Err(Error::SectorMismatch(format!(
                "column {x} outputs {} to the right but column {} expects {}",
                c.right(),
                (x + 1) % n,
                next.left()
            )));
        }
    }
    let total = dim.checked_pow(n as u32).ok_or_else(|| Error::Geometry("row dimension overflows".into()))?;
    let mut row = DMatrix::<C64>::zeros(total, total);

    // nonzero entries (c, c', d, u) of each column
    let sparse: Vec<Vec<Entry>> = columns
        .iter()
        .map(|op| {
            let mut v = Vec::new();
            for c in 0..dim {
                for cp in 0..dim {
                    for d in 0..dim {
                        for u in 0..dim {
                            let w = op.element(c, cp, d, u);
                            if w != C64::new(0.0, 0.0) {
                                v.push((c, cp, d, u, w));
                            }
                        }
                    }
                }
            }
            v
        })
        .collect();

    for a in 0..dim {
        // cur[c][dacc][uacc] with dacc, uacc in [0, m)
        let mut m = dim;
        let mut cur = vec![C64::new(0.0, 0.0); dim * m * m];
        for &(c, cp, d, u, w) in &sparse[0] {
            if c == a {
                cur[(cp * m + d) * m + u] += w;
            }
        }
        for entries in &sparse[1..] {
            let m2 = m * dim;
            let mut next = vec![C64::new(0.0, 0.0); dim * m2 * m2];
            for &(c, cp, d, u, w) in entries {
                for da in 0..m {
                    let src = &cur[(c * m + da) * m..(c * m + da + 1) * m];
                    let base = (cp * m2 + da * dim + d) * m2 + u;
                    for (ua, &s) in src.iter().enumerate() {
                        next[base + ua * dim] += w * s;
                    }
                }
            }
            cur = next;
            m = m2;
        }
        let block = &cur[a * m * m..(a + 1) * m * m];
        for da in 0..m {
            for ua in 0..m {
                row[(da, ua)] += block[da * m + ua];
            }
        }
    }
    let log_scale = rescale(&mut row).unwrap_or(0.0);
    Ok(RowMatrix {
        matrix: row,
        log_scale,
        input: columns.iter().map(|c| c.down()).collect(),
        output: columns.iter().map(|c| c.up()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Sector-projected operators over spin spaces.
    Sectors,
    /// Full doubled legs, no projection.
    Unprojected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub budget_bytes: u64,
    pub projection: Projection,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { budget_bytes: DEFAULT_BUDGET, projection: Projection::Sectors }
    }
}

/// Rough peak memory of a contraction: row construction plus a working set
/// of dense row matrices.
pub fn estimate_bytes(leg_dim: usize, n1: usize) -> f64 {
    let m = (leg_dim as f64).powi(n1 as i32);
    16.0 * m * m * (leg_dim as f64 + 16.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilsonResult {
    pub value: ScaledComplex,
    /// Set when the loop cannot close because a flux-carrying operator
    /// vanishes identically.
    pub flag: Option<String>,
}

/// Rows of a loop tiling: bottom, middle (repeated `r2 - 1` times) and top.
#[derive(Debug, Clone)]
pub struct LoopRows {
    pub bottom: RowMatrix,
    pub middle: RowMatrix,
    pub top: RowMatrix,
}

/// Contraction engine for one tensor on one torus. Shares its flux-free row
/// matrix and cached powers across concurrent evaluations.
pub struct Engine {
    tensor: GaugeTensor,
    torus: TorusSpec,
    options: EngineOptions,
    e_hat: RowMatrix,
    powers: Mutex<HashMap<usize, Arc<RowMatrix>>>,
    log_norm: f64,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("torus", &self.torus).field("options", &self.options).finish()
    }
}

impl Engine {
    pub fn new(tensor: &GaugeTensor, torus: TorusSpec, options: EngineOptions) -> Result<Self> {
        let d = tensor.group().dim();
        let leg_dim = match options.projection {
            Projection::Sectors => d,
            Projection::Unprojected => d * d,
        };
        let needed = estimate_bytes(leg_dim, torus.n1);
        if needed > options.budget_bytes as f64 {
            return Err(Error::Budget { needed, budget: options.budget_bytes });
        }
        let mut engine = Self {
            tensor: tensor.clone(),
            torus,
            options,
            e_hat: RowMatrix::identity(vec![], 1),
            powers: Mutex::new(HashMap::new()),
            log_norm: 0.0,
        };
        let zero = tensor.group().reduce(0);
        let shifts = LoopShifts::new(torus, &LoopSpec::new(0, 0, zero), (0, 0));
        engine.e_hat = engine.row(&shifts, zero, 0)?;
        if engine.e_hat.is_zero() {
            return Err(Error::Numerical("row transfer matrix vanishes".into()));
        }
        let half = torus.n2 / 2;
        let a = engine.power(half)?;
        let b = engine.power(torus.n2 - half)?;
        let norm = a.trace_with(&b)?;
        if norm.is_zero() || norm.mantissa.re <= 0.0 {
            return Err(Error::Numerical("norm is not positive".into()));
        }
        engine.log_norm = norm.log_abs();
        Ok(engine)
    }

    pub fn torus(&self) -> TorusSpec {
        self.torus
    }

    pub fn tensor(&self) -> &GaugeTensor {
        &self.tensor
    }

    /// `ln <psi|psi>`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Flux-free row transfer matrix.
    pub fn e_hat(&self) -> &RowMatrix {
        &self.e_hat
    }

    fn site_operator(&self, flux: FluxSpec, left: IrrepLabel, down: IrrepLabel) -> Result<ReducedTransfer> {
        let op = build_transfer(&self.tensor, flux)?;
        match self.options.projection {
            Projection::Sectors => project(&op, left, down),
            Projection::Unprojected => Ok(ReducedTransfer::unprojected(&op)),
        }
    }

    fn row(&self, shifts: &LoopShifts, j: IrrepLabel, y: usize) -> Result<RowMatrix> {
        let g = self.tensor.group();
        let ops = (0..self.torus.n1)
            .map(|x| {
                let (flux, left, down) = shifts.site(g, j, x, y)?;
                self.site_operator(flux, left, down)
            })
            .collect::<Result<Vec<_>>>()?;
        build_row(&ops.iter().collect::<Vec<_>>())
    }

    /// `E_hat^n`, cached.
    pub fn power(&self, n: usize) -> Result<Arc<RowMatrix>> {
        let mut cache = self.powers.lock().expect("power cache poisoned");
        if let Some(p) = cache.get(&n) {
            return Ok(p.clone());
        }
        let below = cache.keys().copied().filter(|&k| k <= n).max();
        let p = match below {
            Some(k) if n - k <= 8 => {
                let mut acc = (*cache[&k]).clone();
                for step in k + 1..=n {
                    acc = acc.mul(&self.e_hat)?;
                    cache.entry(step).or_insert_with(|| Arc::new(acc.clone()));
                }
                acc
            }
            _ => self.e_hat.pow(n)?,
        };
        let p = Arc::new(p);
        cache.insert(n, p.clone());
        Ok(p)
    }

    /// Rows of the loop tiling with the lower-left corner at `origin`.
    pub fn loop_rows(&self, lp: &LoopSpec, origin: (usize, usize)) -> Result<LoopRows> {
        lp.check(self.torus)?;
        self.tensor.group().check(lp.j)?;
        let shifts = LoopShifts::new(self.torus, lp, origin);
        let y0 = origin.1 % self.torus.n2;
        Ok(LoopRows {
            bottom: self.row(&shifts, lp.j, y0)?,
            middle: self.row(&shifts, lp.j, (y0 + 1) % self.torus.n2)?,
            top: self.row(&shifts, lp.j, (y0 + lp.r2) % self.torus.n2)?,
        })
    }

    /// Loop rows for width `r1`, independent of the loop height.
    pub fn loop_rows_for(&self, r1: usize, j: IrrepLabel) -> Result<LoopRows> {
        self.tensor.group().check(j)?;
        let tall = TorusSpec { n1: self.torus.n1, n2: 3 };
        let lp = LoopSpec::new(r1, 2, j);
        lp.check(tall)?;
        let shifts = LoopShifts::new(tall, &lp, (0, 0));
        Ok(LoopRows { bottom: self.row(&shifts, j, 0)?, middle: self.row(&shifts, j, 1)?, top: self.row(&shifts, j, 2)? })
    }

    /// Any identically vanishing operator in the loop tiling.
    fn vanishing_site(&self, lp: &LoopSpec, origin: (usize, usize)) -> Result<Option<(usize, usize, FluxSpec)>> {
        let g = self.tensor.group();
        let shifts = LoopShifts::new(self.torus, lp, origin);
        for y in 0..self.torus.n2 {
            for x in 0..self.torus.n1 {
                let (flux, left, down) = shifts.site(g, lp.j, x, y)?;
                if flux != FluxSpec::None && self.site_operator(flux, left, down)?.is_zero() {
                    return Ok(Some((x, y, flux)));
                }
            }
        }
        Ok(None)
    }

    fn vanishing_flag(&self, site: (usize, usize, FluxSpec)) -> String {
        let (x, y, flux) = site;
        let corner = matches!(flux, FluxSpec::CornerLowerLeft(_));
        match self.tensor.z2_params() {
            Some(p) if corner && p.beta == C64::new(0.0, 0.0) => {
                "corner amplitude beta vanishes: the flux line cannot turn, so the loop cannot close".into()
            }
            _ => format!("flux operator {flux:?} at site ({x}, {y}) vanishes identically; the loop cannot close"),
        }
    }

    /// Exact `<W>` for a loop with its lower-left corner at the origin.
    pub fn wilson(&self, lp: &LoopSpec) -> Result<WilsonResult> {
        self.wilson_at(lp, (0, 0))
    }

    pub fn wilson_at(&self, lp: &LoopSpec, origin: (usize, usize)) -> Result<WilsonResult> {
        lp.check(self.torus)?;
        if let Some(site) = self.vanishing_site(lp, origin)? {
            return Ok(WilsonResult { value: ScaledComplex::ZERO, flag: Some(self.vanishing_flag(site)) });
        }
        let rows = self.loop_rows(lp, origin)?;
        let mut x = rows.bottom.clone();
        for _ in 1..lp.r2 {
            x = x.mul(&rows.middle)?;
        }
        let y = rows.top.mul(&*self.power(self.torus.n2 - lp.r2 - 1)?)?;
        Ok(WilsonResult { value: self.normalize(x.trace_with(&y)?), flag: None })
    }

    fn normalize(&self, numerator: ScaledComplex) -> ScaledComplex {
        numerator.div(&ScaledComplex::new(C64::new(1.0, 0.0), self.log_norm))
    }

    /// Wilson loops for many sizes. Loops sharing `r1` share their row
    /// matrices; distinct `r1` are evaluated in parallel on the current
    /// rayon pool.
    pub fn wilson_table(&self, j: IrrepLabel, loops: &[(usize, usize)]) -> Result<Vec<((usize, usize), WilsonResult)>> {
        let mut by_r1: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(r1, r2) in loops {
            LoopSpec::new(r1, r2, j).check(self.torus)?;
            by_r1.entry(r1).or_default().push(r2);
        }
        for &(_, r2) in loops {
            self.power(self.torus.n2 - r2 - 1)?;
        }
        let mut groups: Vec<(usize, Vec<usize>)> = by_r1.into_iter().collect();
        groups.sort();
        let results: Vec<Vec<((usize, usize), WilsonResult)>> = groups
            .into_par_iter()
            .map(|(r1, mut r2s)| {
                r2s.sort_unstable();
                r2s.dedup();
                self.wilson_column(j, r1, &r2s)
            })
            .collect::<Result<_>>()?;
        let mut out: Vec<_> = results.into_iter().flatten().collect();
        out.sort_by_key(|(k, _)| *k);
        Ok(out)
    }

    fn wilson_column(&self, j: IrrepLabel, r1: usize, r2s: &[usize]) -> Result<Vec<((usize, usize), WilsonResult)>> {
        let mut out = Vec::new();
        let Some(&max_r2) = r2s.last() else { return Ok(out) };
        let lp = LoopSpec::new(r1, max_r2, j);
        if let Some(site) = self.vanishing_site(&lp, (0, 0))? {
            let flag = self.vanishing_flag(site);
            return Ok(r2s.iter().map(|&r2| ((r1, r2), WilsonResult { value: ScaledComplex::ZERO, flag: Some(flag.clone()) })).collect());
        }
        let rows = self.loop_rows(&lp, (0, 0))?;
        let mut x = rows.bottom.clone();
        let mut at = 1;
        for &r2 in r2s {
            while at < r2 {
                x = x.mul(&rows.middle)?;
                at += 1;
            }
            let y = rows.top.mul(&*self.power(self.torus.n2 - r2 - 1)?)?;
            out.push(((r1, r2), WilsonResult { value: self.normalize(x.trace_with(&y)?), flag: None }));
        }
        Ok(out)
    }

    /// Row matrix pierced by two vertical flux lines `r` columns apart.
    pub fn epar(&self, r: usize, j: IrrepLabel) -> Result<RowMatrix> {
        Ok(self.loop_rows_for(r, j)?.middle)
    }

    /// Whether the flux-free and pierced row matrices are real.
    pub fn is_real(&self) -> bool {
        is_real(&self.e_hat.matrix)
    }
}

/// `ln <psi|psi>` on the torus.
pub fn norm(tensor: &GaugeTensor, torus: TorusSpec) -> Result<f64> {
    Ok(Engine::new(tensor, torus, EngineOptions::default())?.log_norm())
}

pub fn wilson_exact(tensor: &GaugeTensor, torus: TorusSpec, lp: &LoopSpec) -> Result<WilsonResult> {
    Engine::new(tensor, torus, EngineOptions::default())?.wilson(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Z2Params;
    use crate::transfer::{tau0, tau0_spectral, SpectralReduction};
    use approx::assert_relative_eq;

    fn z2(a: f64, b: f64, g: f64, d: f64) -> GaugeTensor {
        GaugeTensor::z2(Z2Params::real(a, b, g, d)).unwrap()
    }

    #[test]
    fn two_column_row_from_spectral_form() {
        let t = z2(0.8, 0.3, 0.5, 0.6);
        let r = tau0(&t).unwrap();
        let row = build_row(&[&r, &r]).unwrap();
        let SpectralReduction::Eigen { values, operators } = tau0_spectral(&r).unwrap() else { panic!() };
        let mut expect = DMatrix::<f64>::zeros(4, 4);
        for (lm, mm) in values.iter().zip(&operators) {
            for (ln, mn) in values.iter().zip(&operators) {
                // Tr[M_mu M_nu] over the horizontal legs
                let tr = (mm * mn).trace();
                expect += mm.kronecker(mn) * (lm * ln * tr);
            }
        }
        // Mu acts on the lower leg index, Mnu on the upper: M[d, u]
        let got = row.unscaled();
        for i in 0..4 {
            for k in 0..4 {
                assert_relative_eq!(got[(i, k)].re, expect[(i, k)], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn product_state_norm() {
        let t = z2(0.9, 0.0, 0.0, 0.0);
        let torus = TorusSpec::new(4, 7).unwrap();
        assert_relative_eq!(norm(&t, torus).unwrap(), 28.0 * 0.81f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn perturbative_leading_vector() {
        let t = z2(1.0, 0.01, 0.0, 0.9);
        let e = Engine::new(&t, TorusSpec::new(6, 4).unwrap(), EngineOptions::default()).unwrap();
        let eig = crate::linalg::Eigen::new(&e.e_hat().matrix).unwrap();
        let top = eig.right.column(0);
        assert!(top[0].norm() > 0.999);
        let rho = eig.values[0].re * e.e_hat().log_scale.exp();
        assert_relative_eq!(rho, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn sector_mismatch_is_reported() {
        let t = z2(1.0, 0.1, 0.2, 0.9);
        let a = project(&build_transfer(&t, FluxSpec::Right(IrrepLabel(1))).unwrap(), IrrepLabel(1), IrrepLabel(0)).unwrap();
        let b = tau0(&t).unwrap();
        assert!(matches!(build_row(&[&a, &b]), Err(Error::SectorMismatch(_))));
    }

    #[test]
    fn budget_guard() {
        let t = GaugeTensor::zn(crate::GroupSpec::Cyclic(4), &[([0, 0, 0, 0], C64::new(1.0, 0.0))].into()).unwrap();
        let r = Engine::new(&t, TorusSpec::new(20, 4).unwrap(), EngineOptions::default());
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn trivial_flux_is_one() {
        let t = z2(1.0, 0.3, 0.2, 0.7);
        let e = Engine::new(&t, TorusSpec::new(4, 5).unwrap(), EngineOptions::default()).unwrap();
        let w = e.wilson(&LoopSpec::new(2, 3, IrrepLabel(0))).unwrap();
        assert!((w.value.value() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn vanishing_corner_flag() {
        let t = z2(1.0, 0.0, 0.3, 0.7);
        let e = Engine::new(&t, TorusSpec::new(4, 4).unwrap(), EngineOptions::default()).unwrap();
        let w = e.wilson(&LoopSpec::new(1, 1, IrrepLabel(1))).unwrap();
        assert!(w.value.is_zero());
        assert!(w.flag.unwrap().contains("beta"));
    }
}
