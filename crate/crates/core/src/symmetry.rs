//! Abelian gauge groups, irrep arithmetic and link operators in the
//! representation basis.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupSpec {
    /// Z_N with labels 0..N-1.
    Cyclic(u32),
    /// U(1) truncated to labels -cutoff..=cutoff.
    TruncatedU1(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel(pub i64);

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "Z{n}"),
            GroupSpec::TruncatedU1(j) => write!(f, "U1({j})"),
        }
    }
}

impl std::str::FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `Z<N>` and `U1(<Jmax>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidGroup(s.to_string());
        if let Some(n) = s.strip_prefix('Z').or_else(|| s.strip_prefix('z')) {
            return GroupSpec::cyclic(n.parse().map_err(|_| bad())?);
        }
        if let Some(rest) = s.strip_prefix("U1(") {
            let j = rest.strip_suffix(')').ok_or_else(bad)?;
            return GroupSpec::truncated_u1(j.trim().parse().map_err(|_| bad())?);
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkOperatorKind {
    Identity,
    FluxU(IrrepLabel),
    FluxUdagger(IrrepLabel),
    GaugeRotation(i64),
}

/// Operator on one link's representation space, rows and columns indexed by
/// [`GroupSpec::index_of`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOperator {
    pub kind: LinkOperatorKind,
    pub matrix: DMatrix<C64>,
}

impl GroupSpec {
    pub fn cyclic(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!("Z{n}: order must be at least 2")));
        }
        Ok(GroupSpec::Cyclic(n))
    }

    pub fn truncated_u1(cutoff: u32) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidGroup("U1 cutoff must be at least 1".into()));
        }
        Ok(GroupSpec::TruncatedU1(cutoff))
    }

    /// Dimension of a link's representation space.
    pub fn dim(&self) -> usize {
        match *self {
            GroupSpec::Cyclic(n) => n as usize,
            GroupSpec::TruncatedU1(j) => 2 * j as usize + 1,
        }
    }

    pub fn labels(&self) -> Vec<IrrepLabel> {
        (0..self.dim()).map(|i| self.label_at(i)).collect()
    }

    pub fn label_at(&self, index: usize) -> IrrepLabel {
        match *self {
            GroupSpec::Cyclic(_) => IrrepLabel(index as i64),
            GroupSpec::TruncatedU1(j) => IrrepLabel(index as i64 - j as i64),
        }
    }

    pub fn index_of(&self, label: IrrepLabel) -> Option<usize> {
        self.contains(label).then(|| match *self {
            GroupSpec::Cyclic(_) => label.0 as usize,
            GroupSpec::TruncatedU1(j) => (label.0 + j as i64) as usize,
        })
    }

    pub fn contains(&self, label: IrrepLabel) -> bool {
        match *self {
            GroupSpec::Cyclic(n) => (0..n as i64).contains(&label.0),
            GroupSpec::TruncatedU1(j) => label.0.abs() <= j as i64,
        }
    }

    pub fn check(&self, label: IrrepLabel) -> Result<IrrepLabel> {
        if self.contains(label) {
            Ok(label)
        } else {
            Err(Error::LabelOutOfRange { label: label.0, group: self.to_string() })
        }
    }

    /// Reduces an integer charge: modulo N for Z_N, unchanged for U(1).
    pub fn reduce(&self, value: i64) -> IrrepLabel {
        match *self {
            GroupSpec::Cyclic(n) => IrrepLabel(value.rem_euclid(n as i64)),
            GroupSpec::TruncatedU1(_) => IrrepLabel(value),
        }
    }

    /// For U(1) the result may lie outside the cutoff.
    pub fn fuse(&self, a: IrrepLabel, b: IrrepLabel) -> Result<IrrepLabel> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.reduce(a.0 + b.0))
    }

    pub fn conjugate(&self, j: IrrepLabel) -> Result<IrrepLabel> {
        self.check(j)?;
        Ok(self.reduce(-j.0))
    }

    /// `a - b` without range checks; used for sector bookkeeping where U(1)
    /// charges legitimately exceed the link cutoff.
    pub fn diff(&self, a: IrrepLabel, b: IrrepLabel) -> IrrepLabel {
        self.reduce(a.0 - b.0)
    }

    pub fn is_trivial(&self, j: IrrepLabel) -> bool {
        self.reduce(j.0).0 == 0
    }

    /// Number of sample points used for U(1) group elements. Charges on a
    /// site span at most `4*cutoff`, so `4*cutoff+1` angles separate them.
    pub fn element_count(&self) -> i64 {
        match *self {
            GroupSpec::Cyclic(n) => n as i64,
            GroupSpec::TruncatedU1(j) => 4 * j as i64 + 1,
        }
    }

    /// Group elements used to test gauge invariance. For U(1) these are the
    /// angles `2*pi*g/element_count()`.
    pub fn elements(&self) -> Vec<i64> {
        (0..self.element_count()).collect()
    }

    /// Character `exp(i 2 pi j g / N)` of irrep `j` at element `g`.
    pub fn phase(&self, j: IrrepLabel, g: i64) -> C64 {
        let n = self.element_count() as f64;
        let m = (j.0 * g).rem_euclid(self.element_count());
        match m {
            0 => C64::new(1.0, 0.0),
            _ => C64::from_polar(1.0, 2.0 * PI * m as f64 / n),
        }
    }

    pub fn identity(&self) -> LinkOperator {
        LinkOperator { kind: LinkOperatorKind::Identity, matrix: DMatrix::identity(self.dim(), self.dim()) }
    }

    /// `U^j` (or its adjoint) sending `|J>` to `|J+j>`.
    pub fn flux_operator(&self, j: IrrepLabel, dagger: bool) -> Result<LinkOperator> {
        self.check(j)?;
        let shift = if dagger { self.conjugate(j)? } else { j };
        let d = self.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for (col, &label) in self.labels().iter().enumerate() {
            let target = self.reduce(label.0 + shift.0);
            if let Some(row) = self.index_of(target) {
                matrix[(row, col)] = C64::new(1.0, 0.0);
            }
        }
        let kind = if dagger { LinkOperatorKind::FluxUdagger(j) } else { LinkOperatorKind::FluxU(j) };
        Ok(LinkOperator { kind, matrix })
    }

    pub fn gauge_rotation(&self, g: i64) -> Result<LinkOperator> {
        if !(0..self.element_count()).contains(&g) {
            return Err(Error::InvalidGroup(format!("group element {g} out of range for {self}")));
        }
        let diag: Vec<C64> = self.labels().iter().map(|&j| self.phase(j, g)).collect();
        Ok(LinkOperator { kind: LinkOperatorKind::GaugeRotation(g), matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fuse_and_conjugate_examples() {
        let z2 = GroupSpec::cyclic(2).unwrap();
        let z3 = GroupSpec::cyclic(3).unwrap();
        let u1 = GroupSpec::truncated_u1(2).unwrap();
        assert_eq!(z2.fuse(IrrepLabel(1), IrrepLabel(1)).unwrap(), IrrepLabel(0));
        assert_eq!(z3.fuse(IrrepLabel(1), IrrepLabel(2)).unwrap(), IrrepLabel(0));
        assert_eq!(z2.fuse(IrrepLabel(0), IrrepLabel(1)).unwrap(), IrrepLabel(1));
        assert_eq!(z2.conjugate(IrrepLabel(1)).unwrap(), IrrepLabel(1));
        assert_eq!(z3.conjugate(IrrepLabel(1)).unwrap(), IrrepLabel(2));
        assert_eq!(u1.conjugate(IrrepLabel(2)).unwrap(), IrrepLabel(-2));
        assert!(z3.fuse(IrrepLabel(3), IrrepLabel(0)).is_err());
        assert!(u1.conjugate(IrrepLabel(3)).is_err());
    }

    #[test]
    fn flux_operator_examples() {
        let z2 = GroupSpec::cyclic(2).unwrap();
        let x = z2.flux_operator(IrrepLabel(1), false).unwrap().matrix;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]));

        for g in [z2, GroupSpec::Cyclic(5), GroupSpec::TruncatedU1(2)] {
            let u0 = g.flux_operator(IrrepLabel(0), false).unwrap().matrix;
            assert_eq!(u0, g.identity().matrix);
        }

        let z3 = GroupSpec::cyclic(3).unwrap();
        let u = z3.flux_operator(IrrepLabel(1), false).unwrap().matrix;
        for j in 0..3usize {
            for i in 0..3usize {
                let expect = if i == (j + 1) % 3 { one } else { zero };
                assert_eq!(u[(i, j)], expect);
            }
        }
    }

    #[test]
    fn truncated_flux_drops_edge_states() {
        let u1 = GroupSpec::truncated_u1(1).unwrap();
        let u = u1.flux_operator(IrrepLabel(1), false).unwrap().matrix;
        // |1> has nowhere to go
        assert_eq!(u.column(2).iter().map(|z| z.norm()).sum::<f64>(), 0.0);
        assert_eq!(u[(1, 0)], C64::new(1.0, 0.0));
        let ud = u1.flux_operator(IrrepLabel(1), true).unwrap().matrix;
        assert_eq!(ud, u.adjoint());
    }

    #[test]
    fn gauge_rotation_examples() {
        let z2 = GroupSpec::cyclic(2).unwrap();
        let z = z2.gauge_rotation(1).unwrap().matrix;
        assert!((z[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((z[(1, 1)] + 1.0).norm() < 1e-15);
        let z4 = GroupSpec::cyclic(4).unwrap();
        let r = z4.gauge_rotation(1).unwrap().matrix;
        let expect = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for (i, e) in expect.iter().enumerate() {
            assert!((r[(i, i)] - e).norm() < 1e-15);
        }
        assert_eq!(z4.gauge_rotation(0).unwrap().matrix, z4.identity().matrix);
        assert!(z4.gauge_rotation(4).is_err());
    }

    #[test]
    fn parse_group() {
        assert_eq!("Z3".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(3));
        assert_eq!("U1(2)".parse::<GroupSpec>().unwrap(), GroupSpec::TruncatedU1(2));
        assert!("Z1".parse::<GroupSpec>().is_err());
        assert!("SU2".parse::<GroupSpec>().is_err());
    }

    fn group() -> impl Strategy<Value = GroupSpec> {
        prop_oneof![(2u32..8).prop_map(GroupSpec::Cyclic), (1u32..4).prop_map(GroupSpec::TruncatedU1),]
    }

    proptest! {
        #[test]
        fn fusion_laws(g in group(), a in 0usize..64, b in 0usize..64, c in 0usize..64) {
            let d = g.dim();
            let (a, b, c) = (g.label_at(a % d), g.label_at(b % d), g.label_at(c % d));
            let zero = g.reduce(0);
            prop_assert_eq!(g.reduce(a.0 + b.0), g.reduce(b.0 + a.0));
            prop_assert_eq!(g.reduce(g.reduce(a.0 + b.0).0 + c.0), g.reduce(a.0 + g.reduce(b.0 + c.0).0));
            prop_assert_eq!(g.fuse(a, zero).unwrap(), a);
            let ca = g.conjugate(a).unwrap();
            prop_assert_eq!(g.conjugate(ca).unwrap(), a);
            prop_assert_eq!(g.fuse(a, ca).unwrap(), zero);
        }

        #[test]
        fn flux_inverse(n in 2u32..8, j in 0i64..8) {
            let g = GroupSpec::Cyclic(n);
            let j = g.reduce(j);
            let u = g.flux_operator(j, false).unwrap().matrix;
            let v = g.flux_operator(g.conjugate(j).unwrap(), false).unwrap().matrix;
            prop_assert!(max_diff(&(&u * &v), &g.identity().matrix) == 0.0);
        }

        #[test]
        fn truncated_flux_inverse_away_from_edges(cut in 1u32..4, j in 0i64..4) {
            let g = GroupSpec::TruncatedU1(cut);
            let j = IrrepLabel(j.min(cut as i64));
            let u = g.flux_operator(j, false).unwrap().matrix;
            let v = g.flux_operator(g.conjugate(j).unwrap(), false).unwrap().matrix;
            let p = &u * &v;
            for (idx, label) in g.labels().into_iter().enumerate() {
                if g.contains(IrrepLabel(label.0 - j.0)) {
                    prop_assert_eq!(p[(idx, idx)], C64::new(1.0, 0.0));
                }
            }
        }

        #[test]
        fn rotations_compose(g in group(), a in 0i64..64, b in 0i64..64) {
            let n = g.element_count();
            let (a, b) = (a % n, b % n);
            let ra = g.gauge_rotation(a).unwrap().matrix;
            let rb = g.gauge_rotation(b).unwrap().matrix;
            let rab = g.gauge_rotation((a + b) % n).unwrap().matrix;
            prop_assert!(max_diff(&(&ra * &rb), &rab) < 1e-14);
            prop_assert!(max_diff(&(&ra * ra.adjoint()), &g.identity().matrix) < 1e-14);
        }

        #[test]
        fn flux_transforms_covariantly(g in group(), e in 0i64..64, j in 0usize..64) {
            let e = e % g.element_count();
            let j = g.label_at(j % g.dim());
            let theta = g.gauge_rotation(e).unwrap().matrix;
            let u = g.flux_operator(j, false).unwrap().matrix;
            let lhs = theta.adjoint() * &u * &theta;
            let rhs = u.map(|z| z * g.phase(j, e).conj());
            prop_assert!(max_diff(&lhs, &rhs) < 1e-14);
        }
    }
}
