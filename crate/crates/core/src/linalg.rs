//! Dense linear-algebra helpers: fast complex products, scaled scalars and
//! deterministic eigendecompositions.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symmetry::C64;

/// A complex number stored as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: C64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self { mantissa: C64::new(0.0, 0.0), log_scale: 0.0 };
    pub const ONE: Self = Self { mantissa: C64::new(1.0, 0.0), log_scale: 0.0 };

    pub fn new(mantissa: C64, log_scale: f64) -> Self {
        Self { mantissa, log_scale }.normalized()
    }

    fn normalized(self) -> Self {
        let n = self.mantissa.norm();
        if n == 0.0 || !n.is_finite() {
            return Self { mantissa: self.mantissa, log_scale: if n == 0.0 { 0.0 } else { self.log_scale } };
        }
        Self { mantissa: self.mantissa / n, log_scale: self.log_scale + n.ln() }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// `ln |z|`, `-inf` for zero.
    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.log_scale
        }
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain value; over- or underflows for extreme scales.
    pub fn value(&self) -> C64 {
        if self.is_zero() {
            return self.mantissa;
        }
        self.mantissa * self.log_scale.exp()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
    }

    pub fn div(&self, other: &Self) -> Self {
        Self::new(self.mantissa / other.mantissa, self.log_scale - other.log_scale)
    }

    pub fn powi(&self, n: i32) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { *self };
        }
        let m = self.mantissa / self.mantissa.norm();
        Self::new(m.powi(n), n as f64 * self.log_abs())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let s = self.log_scale.max(other.log_scale);
        Self::new(self.mantissa * (self.log_scale - s).exp() + other.mantissa * (other.log_scale - s).exp(), s)
    }
}

impl From<C64> for ScaledComplex {
    fn from(z: C64) -> Self {
        Self::new(z, 0.0)
    }
}

pub fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn re(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

fn im(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.im)
}

fn combine(re: DMatrix<f64>, im: Option<DMatrix<f64>>) -> DMatrix<C64> {
    match im {
        None => re.map(|x| C64::new(x, 0.0)),
        Some(im) => re.zip_map(&im, C64::new),
    }
}

/// Complex matrix product through real GEMMs; a single real product when
/// both operands are real.
pub fn matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, br) = (re(a), re(b));
    match (is_real(a), is_real(b)) {
        (true, true) => combine(&ar * &br, None),
        (true, false) => combine(&ar * &br, Some(&ar * im(b))),
        (false, true) => combine(&ar * &br, Some(im(a) * &br)),
        (false, false) => {
            let (ai, bi) = (im(a), im(b));
            // Gauss: three real products
            let t1 = &ar * &br;
            let t2 = &ai * &bi;
            let t3 = (&ar + &ai) * (&br + &bi);
            let imag = t3 - &t1 - &t2;
            combine(t1 - t2, Some(imag))
        }
    }
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Scales the largest entry to modulus one and returns the log of the factor
/// removed. Zero matrices are left untouched and report `None`.
pub fn rescale(m: &mut DMatrix<C64>) -> Option<f64> {
    let s = max_abs(m);
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    let inv = 1.0 / s;
    m.iter_mut().for_each(|z| *z *= inv);
    Some(s.ln())
}

/// Fixes the phase so the largest-magnitude entry (first among ties) is real
/// positive.
pub fn fix_phase(v: &mut DVector<C64>) -> C64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    v.iter_mut().for_each(|z| *z *= phase);
    phase
}

fn fix_sign_real(v: &mut DVector<f64>) {
    let max = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if let Some(&pivot) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-12)) {
        if pivot < 0.0 {
            v.neg_mut();
        }
    }
}

fn lex_desc(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match y.partial_cmp(x).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub const DEGENERACY_TOL: f64 = 1e-9;

/// Real symmetric eigendecomposition with a deterministic order: descending
/// `|lambda|` (positive first on ties), largest entry of each eigenvector
/// positive, and degenerate groups ordered by descending lexicographic
/// eigenvector entries.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let n = m.nrows();
    let dev = (m - m.transpose()).iter().map(|x| x.abs()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::NotSymmetric(dev));
    }
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|i| {
            let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
            fix_sign_real(&mut v);
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap().then(b.0.partial_cmp(&a.0).unwrap()));
    let scale = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let tol = DEGENERACY_TOL * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end].0 - pairs[start].0).abs() <= tol {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lex_desc(&a.1, &b.1));
        start = end;
    }
    Ok(pairs.into_iter().unzip())
}

/// Eigendecomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted by descending modulus.
    pub values: Vec<C64>,
    /// Right eigenvectors as columns.
    pub right: DMatrix<C64>,
    /// Left eigenvectors as columns, normalized so `left^H right = 1`.
    pub left: DMatrix<C64>,
}

impl Eigen {
    pub fn new(m: &DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::Numerical("eigendecomposition of a non-square matrix".into()));
        }
        let herm_tol = 1e-12 * max_abs(m).max(f64::MIN_POSITIVE);
        if hermitian_deviation(m) <= herm_tol {
            return Ok(Self::hermitian(m));
        }
        Self::general(m)
    }

    fn hermitian(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let (values, vectors): (Vec<f64>, DMatrix<C64>) = if is_real(m) || hermitian_real_part_only(m) {
            let sym = re(m);
            let sym = (&sym + sym.transpose()) * 0.5;
            let e = nalgebra::SymmetricEigen::new(sym);
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
            let e = nalgebra::SymmetricEigen::new(h);
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].abs().partial_cmp(&values[a].abs()).unwrap().then(values[b].partial_cmp(&values[a]).unwrap()));
        let mut right = DMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            let mut v: DVector<C64> = vectors.column(i).into_owned();
            fix_phase(&mut v);
            right.set_column(k, &v);
        }
        Self { values: order.iter().map(|&i| C64::new(values[i], 0.0)).collect(), left: right.clone(), right }
    }

    fn general(m: &DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        let (q, t) = schur.unpack();
        let norm = max_abs(&t).max(f64::MIN_POSITIVE);
        let small = norm * f64::EPSILON * n as f64;
        // eigenvectors of the upper-triangular factor by back substitution
        let mut y = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = C64::new(0.0, 0.0);
                for j in i + 1..=k {
                    s += t[(i, j)] * y[(j, k)];
                }
                let mut den = t[(i, i)] - lambda;
                if den.norm() < small {
                    den = C64::new(small, 0.0);
                }
                y[(i, k)] = -s / den;
            }
            let nrm = y.column(k).norm();
            y.column_mut(k).unscale_mut(nrm);
        }
        let mut right = matmul(&q, &y);
        for k in 0..n {
            let mut v: DVector<C64> = right.column(k).into_owned();
            let nrm = v.norm();
            v.unscale_mut(nrm);
            fix_phase(&mut v);
            right.set_column(k, &v);
        }
        let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[b].norm().partial_cmp(&values[a].norm()).unwrap().then(values[b].re.partial_cmp(&values[a].re).unwrap())
        });
        let right = DMatrix::from_columns(&order.iter().map(|&i| right.column(i)).collect::<Vec<_>>());
        let inv =
            right.clone().try_inverse().ok_or_else(|| Error::Numerical("eigenvector matrix is singular (defective matrix)".into()))?;
        Ok(Self { values: order.iter().map(|&i| values[i]).collect(), left: inv.adjoint(), right })
    }
}

fn hermitian_real_part_only(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im.abs() <= 1e-15 * z.norm().max(1.0))
}

/// Groups consecutive indices of values sorted by descending modulus whose
/// values agree within `tol`.
pub fn group_by_value(values: &[C64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).norm() <= tol {
            end += 1;
        }
        groups.push(start..end);
        start = end;
    }
    groups
}
