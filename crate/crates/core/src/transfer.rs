//! Transfer operators of a site tensor, their projection onto charge sectors
//! of the doubled legs, and spectral reductions.
//!
//! A doubled leg carries a ket label `j` and a bra label `j'`. Its sector is
//! `k = j - j'`; within a fixed sector the state is identified by the spin
//! label `j`. Flux operators act on the ket's physical legs, so a leg
//! crossed by flux `J` has `j' = j + J`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{fix_phase, symmetric_eigen};
use crate::symmetry::{GroupSpec, IrrepLabel, C64};
use crate::tensor::GaugeTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FluxSpec {
    None,
    Right(IrrepLabel),
    Left(IrrepLabel),
    Up(IrrepLabel),
    Down(IrrepLabel),
    /// `U^{t dagger} U^s`: flux enters from above and leaves to the right.
    CornerLowerLeft(IrrepLabel),
}

impl FluxSpec {
    /// Bra-minus-ket label shift on the physical side and top legs.
    pub fn shifts(&self) -> (i64, i64) {
        match *self {
            FluxSpec::None => (0, 0),
            FluxSpec::Right(j) => (j.0, 0),
            FluxSpec::Left(j) => (-j.0, 0),
            FluxSpec::Up(j) => (0, j.0),
            FluxSpec::Down(j) => (0, -j.0),
            FluxSpec::CornerLowerLeft(j) => (j.0, -j.0),
        }
    }

    pub fn label(&self) -> Option<IrrepLabel> {
        match *self {
            FluxSpec::None => None,
            FluxSpec::Right(j) | FluxSpec::Left(j) | FluxSpec::Up(j) | FluxSpec::Down(j) | FluxSpec::CornerLowerLeft(j) => Some(j),
        }
    }

    /// Recovers the flux kind from physical-leg shifts, given the loop's
    /// irrep `j`.
    pub fn from_shifts(g: GroupSpec, j: IrrepLabel, side: i64, top: i64) -> Result<Self> {
        let eq = |a: i64, b: i64| g.reduce(a) == g.reduce(b);
        let z = |a: i64| g.is_trivial(IrrepLabel(a));
        Ok(match () {
            _ if z(side) && z(top) => FluxSpec::None,
            _ if eq(side, j.0) && z(top) => FluxSpec::Right(j),
            _ if eq(side, -j.0) && z(top) => FluxSpec::Left(j),
            _ if z(side) && eq(top, j.0) => FluxSpec::Up(j),
            _ if z(side) && eq(top, -j.0) => FluxSpec::Down(j),
            _ if eq(side, j.0) && eq(top, -j.0) => FluxSpec::CornerLowerLeft(j),
            _ => return Err(Error::SectorMismatch(format!("no flux operator shifts the physical legs by ({side}, {top})"))),
        })
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, FluxSpec::Up(_) | FluxSpec::Down(_))
    }
}

/// Ordered basis of a doubled leg: states `(j, j')` sorted by sector, then
/// spin label.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledLegBasis {
    pub group: GroupSpec,
    pub states: Vec<(IrrepLabel, IrrepLabel)>,
}

impl DoubledLegBasis {
    pub fn new(group: GroupSpec) -> Self {
        let labels = group.labels();
        let mut states: Vec<(IrrepLabel, IrrepLabel)> = labels.iter().flat_map(|&j| labels.iter().map(move |&jp| (j, jp))).collect();
        states.sort_by_key(|&(j, jp)| (sector_order(group, group.diff(j, jp)), j));
        Self { group, states }
    }

    pub fn sector(&self, i: usize) -> IrrepLabel {
        let (j, jp) = self.states[i];
        self.group.diff(j, jp)
    }

    pub fn index_of(&self, j: IrrepLabel, jp: IrrepLabel) -> Option<usize> {
        self.states.iter().position(|&s| s == (j, jp))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn sector_order(g: GroupSpec, k: IrrepLabel) -> (u64, i64) {
    match g {
        GroupSpec::Cyclic(_) => (k.0 as u64, 0),
        GroupSpec::TruncatedU1(_) => (k.0.unsigned_abs(), -k.0.signum()),
    }
}

/// Transfer operator over four doubled legs, stored as a matrix with rows
/// indexed by `(l, r)` and columns by `(d, u)`, each leg enumerated by
/// [`DoubledLegBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOperator {
    pub flux: FluxSpec,
    pub basis: DoubledLegBasis,
    pub matrix: DMatrix<C64>,
}

impl TransferOperator {
    pub fn group(&self) -> GroupSpec {
        self.basis.group
    }

    /// Element `T_{ll', rr', dd', uu'}`.
    pub fn element(&self, l: usize, r: usize, d: usize, u: usize) -> C64 {
        let b = self.basis.len();
        self.matrix[(l * b + r, d * b + u)]
    }
}

/// Builds `T = sum_phys A (flux) conj(A)` for the requested flux insertion.
pub fn build_transfer(t: &GaugeTensor, flux: FluxSpec) -> Result<TransferOperator> {
    let g = t.group();
    let (side_op, top_op) = match flux {
        FluxSpec::None => (g.identity(), g.identity()),
        FluxSpec::Right(j) => (g.flux_operator(j, false)?, g.identity()),
        FluxSpec::Left(j) => (g.flux_operator(j, true)?, g.identity()),
        FluxSpec::Up(j) => (g.identity(), g.flux_operator(j, false)?),
        FluxSpec::Down(j) => (g.identity(), g.flux_operator(j, true)?),
        FluxSpec::CornerLowerLeft(j) => (g.flux_operator(j, false)?, g.flux_operator(j, true)?),
    };
    let basis = DoubledLegBasis::new(g);
    let b = basis.len();
    let idx = |j: i64| g.index_of(IrrepLabel(j)).expect("tensor labels are in range");
    let leg = |j: i64, jp: i64| basis.index_of(IrrepLabel(j), IrrepLabel(jp)).expect("complete basis");
    let mut matrix = DMatrix::zeros(b * b, b * b);
    for (&[r, u, l, d], &ket) in t.elements() {
        for (&[rp, up, lp, dp], &bra) in t.elements() {
            // <s'|O|s> <t'|O|t> with s = r, t = u
            let w = side_op.matrix[(idx(rp), idx(r))] * top_op.matrix[(idx(up), idx(u))];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let row = leg(l, lp) * b + leg(r, rp);
            let col = leg(d, dp) * b + leg(u, up);
            matrix[(row, col)] += ket * bra.conj() * w;
        }
    }
    Ok(TransferOperator { flux, basis, matrix })
}

/// State space of one leg of a reduced operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LegSpace {
    /// Fixed sector; states are spin labels.
    Sector(IrrepLabel),
    /// Every doubled-leg state, unprojected.
    Full,
}

impl std::fmt::Display for LegSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LegSpace::Sector(k) => write!(f, "k{k}"),
            LegSpace::Full => write!(f, "full"),
        }
    }
}

/// Transfer operator restricted to fixed leg spaces. Rows are `(l, r)` and
/// columns `(d, u)`, each leg of dimension `leg_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTransfer {
    pub group: GroupSpec,
    pub flux: FluxSpec,
    /// Leg spaces in the order left, right, down, up.
    pub legs: [LegSpace; 4],
    pub leg_dim: usize,
    pub matrix: DMatrix<C64>,
}

impl ReducedTransfer {
    pub fn left(&self) -> LegSpace {
        self.legs[0]
    }
    pub fn right(&self) -> LegSpace {
        self.legs[1]
    }
    pub fn down(&self) -> LegSpace {
        self.legs[2]
    }
    pub fn up(&self) -> LegSpace {
        self.legs[3]
    }

    pub fn element(&self, l: usize, r: usize, d: usize, u: usize) -> C64 {
        self.matrix[(l * self.leg_dim + r, d * self.leg_dim + u)]
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Whole transfer operator viewed as a reduced operator on full legs.
    pub fn unprojected(op: &TransferOperator) -> Self {
        Self { group: op.group(), flux: op.flux, legs: [LegSpace::Full; 4], leg_dim: op.basis.len(), matrix: op.matrix.clone() }
    }

    fn state_label(&self, leg: usize, i: usize) -> String {
        match self.legs[leg] {
            LegSpace::Sector(k) => format!("{}k{}", self.group.label_at(i), k),
            LegSpace::Full => {
                let basis = DoubledLegBasis::new(self.group);
                let (j, jp) = basis.states[i];
                format!("{j}|{jp}")
            }
        }
    }

    /// Labeled CSV: header row of `(d u)` column labels, then one row per
    /// `(l r)` with real and imaginary parts as `re+imj`.
    pub fn to_csv(&self) -> String {
        let n = self.leg_dim;
        let mut out = String::from("l r \\ d u");
        for d in 0..n {
            for u in 0..n {
                let _ = write!(out, ",{} {}", self.state_label(2, d), self.state_label(3, u));
            }
        }
        out.push('\n');
        for l in 0..n {
            for r in 0..n {
                let _ = write!(out, "{} {}", self.state_label(0, l), self.state_label(1, r));
                for c in 0..n * n {
                    let z = self.matrix[(l * n + r, c)];
                    let _ = write!(out, ",{:.17e}{:+.17e}j", z.re, z.im);
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Projects onto fixed sectors of the ingoing legs (left, down). The
/// outgoing sectors are fixed by the flux.
pub fn project(op: &TransferOperator, left: IrrepLabel, down: IrrepLabel) -> Result<ReducedTransfer> {
    let g = op.group();
    let (ds, dt) = op.flux.shifts();
    let right = g.reduce(-ds);
    let up = g.reduce(-dt);
    if g.reduce(left.0 + down.0) != g.reduce(right.0 + up.0) {
        return Err(Error::SectorMismatch(format!(
            "ingoing sectors ({left}, {down}) cannot combine into outgoing ({right}, {up}) for {:?}",
            op.flux
        )));
    }
    let n = g.dim();
    let b = op.basis.len();
    let sectors = [left, right, down, up];
    // leg state index for spin index i in sector k, if the bra label exists
    let state = |i: usize, k: IrrepLabel| {
        let j = g.label_at(i);
        let jp = g.reduce(j.0 - k.0);
        g.contains(jp).then(|| op.basis.index_of(j, jp)).flatten()
    };
    let mut matrix = DMatrix::zeros(n * n, n * n);
    for l in 0..n {
        for r in 0..n {
            let (Some(sl), Some(sr)) = (state(l, sectors[0]), state(r, sectors[1])) else { continue };
            for d in 0..n {
                for u in 0..n {
                    let (Some(sd), Some(su)) = (state(d, sectors[2]), state(u, sectors[3])) else { continue };
                    matrix[(l * n + r, d * n + u)] = op.matrix[(sl * b + sr, sd * b + su)];
                }
            }
        }
    }
    Ok(ReducedTransfer { group: g, flux: op.flux, legs: sectors.map(LegSpace::Sector), leg_dim: n, matrix })
}

/// Flux-free operator on singlet inputs.
pub fn tau0(t: &GaugeTensor) -> Result<ReducedTransfer> {
    let zero = t.group().reduce(0);
    project(&build_transfer(t, FluxSpec::None)?, zero, zero)
}

/// One block of the singlet-sector flux-free operator: rows `(l, r)` with
/// `l - r = k`, columns `(d, u)` with `u - d = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau0Block {
    pub k: IrrepLabel,
    pub rows: Vec<(IrrepLabel, IrrepLabel)>,
    pub cols: Vec<(IrrepLabel, IrrepLabel)>,
    pub matrix: DMatrix<C64>,
}

pub fn tau0_blocks(r: &ReducedTransfer) -> Result<Vec<Tau0Block>> {
    check_tau0(r)?;
    let g = r.group;
    let n = g.dim();
    let mut ks: Vec<IrrepLabel> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let k = g.diff(g.label_at(a), g.label_at(b));
            if !ks.contains(&k) {
                ks.push(k);
            }
        }
    }
    ks.sort_by_key(|&k| sector_order(g, k));
    let mut out = Vec::new();
    for k in ks {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        for a in 0..n {
            let j = g.label_at(a);
            let other = g.reduce(j.0 - k.0);
            if g.contains(other) {
                rows.push((j, other));
            }
            let other = g.reduce(j.0 + k.0);
            if g.contains(other) {
                cols.push((j, other));
            }
        }
        let at = |x: IrrepLabel| g.index_of(x).unwrap();
        let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, c| {
            let (l, rr) = rows[i];
            let (d, u) = cols[c];
            r.element(at(l), at(rr), at(d), at(u))
        });
        out.push(Tau0Block { k, rows, cols, matrix });
    }
    Ok(out)
}

fn check_tau0(r: &ReducedTransfer) -> Result<()> {
    let zero = LegSpace::Sector(r.group.reduce(0));
    if r.flux != FluxSpec::None || r.legs.iter().any(|&l| l != zero) {
        return Err(Error::SectorMismatch("expected the flux-free singlet-sector operator".into()));
    }
    Ok(())
}

/// Eigenvalues with reshaped eigenvectors `M`, or singular values with
/// factor pairs along and across the flux.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralReduction {
    Eigen {
        values: Vec<f64>,
        /// `M[l, r]`, orthonormal under `Tr[M N^T]`.
        operators: Vec<DMatrix<f64>>,
    },
    Singular {
        values: Vec<f64>,
        /// Factor on the legs the flux runs along.
        along: Vec<DMatrix<C64>>,
        /// Factor on the transverse legs.
        transverse: Vec<DMatrix<C64>>,
        vertical: bool,
    },
}

impl SpectralReduction {
    pub fn values(&self) -> &[f64] {
        match self {
            SpectralReduction::Eigen { values, .. } | SpectralReduction::Singular { values, .. } => values,
        }
    }

    /// `sum_mu w_mu X_mu (x) Y_mu` as a matrix with rows `(l, r)` and columns
    /// `(d, u)`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let outer = |w: f64, a: &DMatrix<C64>, b: &DMatrix<C64>| {
            let va = DVector::from_iterator(a.len(), a.transpose().iter().copied());
            let vb = DVector::from_iterator(b.len(), b.transpose().iter().copied());
            (va * vb.transpose()) * C64::new(w, 0.0)
        };
        match self {
            SpectralReduction::Eigen { values, operators } => {
                let n = operators.first().map_or(0, |m| m.len());
                let mut acc = DMatrix::zeros(n, n);
                for (w, m) in values.iter().zip(operators) {
                    let m = m.map(|x| C64::new(x, 0.0));
                    acc += outer(*w, &m, &m);
                }
                acc
            }
            SpectralReduction::Singular { values, along, transverse, vertical } => {
                let n = along.first().map_or(0, |m| m.len());
                let mut acc = DMatrix::zeros(n, n);
                for ((w, k), l) in values.iter().zip(along).zip(transverse) {
                    acc += if *vertical { outer(*w, l, k) } else { outer(*w, k, l) };
                }
                acc
            }
        }
    }
}

/// Spectral decomposition of the flux-free singlet-sector operator.
pub fn tau0_spectral(r: &ReducedTransfer) -> Result<SpectralReduction> {
    check_tau0(r)?;
    let imag = r.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-12 {
        return Err(Error::NotSymmetric(imag));
    }
    let n = r.leg_dim;
    let (values, vectors) = symmetric_eigen(&r.matrix.map(|z| z.re))?;
    let operators = vectors.iter().map(|v| DMatrix::from_fn(n, n, |l, rr| v[l * n + rr])).collect();
    Ok(SpectralReduction::Eigen { values, operators })
}

/// Singular value decomposition across the along-flux and transverse legs.
/// Zero singular values are kept, so a `D^2 x D^2` input yields `D^2`
/// terms; an all-zero input yields none.
pub fn flux_svd(r: &ReducedTransfer) -> Result<SpectralReduction> {
    if r.flux == FluxSpec::None {
        return Err(Error::SectorMismatch("flux_svd needs a flux-carrying operator".into()));
    }
    let vertical = r.flux.is_vertical();
    let n = r.leg_dim;
    if r.is_zero() {
        return Ok(SpectralReduction::Singular { values: vec![], along: vec![], transverse: vec![], vertical });
    }
    let svd = r.matrix.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut values = Vec::new();
    let mut along = Vec::new();
    let mut transverse = Vec::new();
    for i in order {
        // rows factor over (l, r), columns factor over (d, u)
        let mut rows: DVector<C64> = u.column(i).into_owned();
        let mut cols: DVector<C64> = vt.row(i).transpose();
        let reshape = |v: &DVector<C64>| DMatrix::from_fn(n, n, |a, b| v[a * n + b]);
        let (a, t) = if vertical { (&mut cols, &mut rows) } else { (&mut rows, &mut cols) };
        let phase = fix_phase(a);
        t.iter_mut().for_each(|z| *z /= phase);
        values.push(svd.singular_values[i]);
        along.push(reshape(a));
        transverse.push(reshape(t));
    }
    Ok(SpectralReduction::Singular { values, along, transverse, vertical })
}
