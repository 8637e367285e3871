//! Gauge-invariant PEPS site tensors.
//!
//! Elements are keyed by the virtual labels `(r, u, l, d)`. The physical legs
//! are copies of the outgoing virtual legs (`s = r`, `t = u`), so they are
//! never stored separately.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::symmetry::{GroupSpec, IrrepLabel, C64};

type Side = HashMap<[i64; 6], C64>;

/// Index order of a stored element: right, up, left, down.
pub type Key = [i64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Z2Params {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl Z2Params {
    pub fn new(alpha: C64, beta: C64, gamma: C64, delta: C64) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    pub fn real(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self::new(alpha.into(), beta.into(), gamma.into(), delta.into())
    }

    pub fn is_zero(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.delta].iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Amplitude for a Z2 configuration, by the flux lines it draws through
    /// the site: none, one corner, one straight line, or two lines.
    pub fn amplitude(&self, key: Key) -> Option<C64> {
        let [r, u, l, d] = key;
        if (r + u + l + d) % 2 != 0 {
            return None;
        }
        Some(match (r, u, l, d) {
            (0, 0, 0, 0) => self.alpha,
            (1, 1, 1, 1) => self.delta,
            (1, 0, 1, 0) | (0, 1, 0, 1) => self.gamma,
            _ => self.beta,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTensor {
    group: GroupSpec,
    elements: BTreeMap<Key, C64>,
    z2: Option<Z2Params>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryCondition {
    /// Physical rotation matches rotation of the incoming virtual legs.
    Incoming,
    /// Physical side leg transforms like the right virtual leg.
    Right,
    /// Physical top leg transforms like the up virtual leg.
    Up,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryViolation {
    pub group_element: i64,
    pub condition: SymmetryCondition,
    /// `(s, t, r, u, l, d)`
    pub index: [i64; 6],
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub ok: bool,
    pub violations: Vec<SymmetryViolation>,
}

impl GaugeTensor {
    pub fn z2(p: Z2Params) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroTensor);
        }
        let group = GroupSpec::Cyclic(2);
        let mut elements = BTreeMap::new();
        for bits in 0..16i64 {
            let key = [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1];
            if let Some(a) = p.amplitude(key) {
                if a != C64::new(0.0, 0.0) {
                    elements.insert(key, a);
                }
            }
        }
        Ok(Self { group, elements, z2: Some(p) })
    }

    /// Tensor from representation coefficients keyed by `(j_r, j_u, j_l, j_d)`.
    pub fn zn(group: GroupSpec, coeffs: &BTreeMap<Key, C64>) -> Result<Self> {
        let mut elements = BTreeMap::new();
        for (&key, &c) in coeffs {
            for &j in &key {
                group.check(IrrepLabel(j))?;
            }
            let [r, u, l, d] = key;
            if !group.is_trivial(IrrepLabel(r + u - l - d)) {
                return Err(Error::SelectionRule(r, u, l, d));
            }
            if c != C64::new(0.0, 0.0) {
                elements.insert(key, c);
            }
        }
        if elements.is_empty() {
            return Err(Error::ZeroTensor);
        }
        Ok(Self { group, elements, z2: None })
    }

    /// Tensor taken as given, without the selection rule. Use
    /// [`GaugeTensor::check_gauge_symmetry`] to validate it.
    pub fn from_elements_unchecked(group: GroupSpec, elements: BTreeMap<Key, C64>) -> Result<Self> {
        for key in elements.keys() {
            for &j in key {
                group.check(IrrepLabel(j))?;
            }
        }
        Ok(Self { group, elements, z2: None })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn elements(&self) -> &BTreeMap<Key, C64> {
        &self.elements
    }

    pub fn z2_params(&self) -> Option<&Z2Params> {
        self.z2.as_ref()
    }

    pub fn get(&self, key: Key) -> C64 {
        self.elements.get(&key).copied().unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.elements.len()
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.elements.values_mut() {
            *v *= c;
        }
        out.z2 = self.z2.map(|p| Z2Params::new(p.alpha * c, p.beta * c, p.gamma * c, p.delta * c));
        out
    }

    /// Returns a copy with one element overwritten, bypassing the selection
    /// rule. Mainly for negative tests.
    pub fn with_element_unchecked(&self, key: Key, value: C64) -> Self {
        let mut out = self.clone();
        out.elements.insert(key, value);
        out.z2 = None;
        out
    }

    /// Checks the three transformation conditions of a gauge-invariant site
    /// tensor for every group element by applying the gauge rotation
    /// matrices to the physical and virtual legs.
    pub fn check_gauge_symmetry(&self) -> SymmetryReport {
        const TOL: f64 = 1e-12;
        let g = self.group;
        let idx = |j: i64| g.index_of(IrrepLabel(j)).expect("stored labels are in range");
        let lab = |i: usize| g.label_at(i).0;
        let d = g.dim();
        // full (s,t,r,u,l,d) support with the physical legs materialized
        let dense: HashMap<[i64; 6], C64> = self.elements.iter().map(|(&[r, u, l, dd], &a)| ([r, u, r, u, l, dd], a)).collect();

        let mut violations = Vec::new();
        for e in g.elements() {
            let rot = g.gauge_rotation(e).expect("element in range").matrix;
            let mut sides: [(Side, Side); 3] = Default::default();
            for (&k, &a) in &dense {
                let [s, t, r, u, l, dd] = k;
                for i in 0..d {
                    for j in 0..d {
                        // A^{s't'} D_{s's} D_{t't}
                        let w = a * rot[(idx(s), i)] * rot[(idx(t), j)];
                        *sides[0].0.entry([lab(i), lab(j), r, u, l, dd]).or_default() += w;
                        // D_{ll'} D_{dd'} A_{l'd'}
                        let w = rot[(i, idx(l))] * rot[(j, idx(dd))] * a;
                        *sides[0].1.entry([s, t, r, u, lab(i), lab(j)]).or_default() += w;
                    }
                    // D_{s s'} A^{s'}  vs  A_{r'} D_{r'r}
                    *sides[1].0.entry([lab(i), t, r, u, l, dd]).or_default() += rot[(i, idx(s))] * a;
                    *sides[1].1.entry([s, t, lab(i), u, l, dd]).or_default() += a * rot[(idx(r), i)];
                    *sides[2].0.entry([s, lab(i), r, u, l, dd]).or_default() += rot[(i, idx(t))] * a;
                    *sides[2].1.entry([s, t, r, lab(i), l, dd]).or_default() += a * rot[(idx(u), i)];
                }
            }
            let conditions = [SymmetryCondition::Incoming, SymmetryCondition::Right, SymmetryCondition::Up];
            for ((lhs, rhs), condition) in sides.iter().zip(conditions) {
                let mut keys: Vec<&[i64; 6]> = lhs.keys().chain(rhs.keys()).collect();
                keys.sort_unstable();
                keys.dedup();
                for k in keys {
                    let dev = (lhs.get(k).copied().unwrap_or_default() - rhs.get(k).copied().unwrap_or_default()).norm();
                    if dev > TOL {
                        violations.push(SymmetryViolation { group_element: e, condition, index: *k, deviation: dev });
                    }
                }
            }
        }
        SymmetryReport { ok: violations.is_empty(), violations }
    }

    /// Line format: a `group <spec>` header, then `j_r j_u j_l j_d re im`
    /// per element. `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("group {}\n", self.group);
        for (k, v) in &self.elements {
            let _ = writeln!(out, "{} {} {} {} {:.17e} {:.17e}", k[0], k[1], k[2], k[3], v.re, v.im);
        }
        out
    }

    /// Parses [`GaugeTensor::to_text`] output. The selection rule is not
    /// enforced here.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut group = None;
        let mut elements = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: n + 1, msg };
            if let Some(spec) = line.strip_prefix("group") {
                group = Some(spec.trim().parse::<GroupSpec>().map_err(|e| perr(e.to_string()))?);
                continue;
            }
            let g = group.ok_or_else(|| perr("element before group header".into()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(perr(format!("expected 6 fields, found {}", fields.len())));
            }
            let mut key = [0i64; 4];
            for (slot, f) in key.iter_mut().zip(&fields[..4]) {
                *slot = f.parse().map_err(|_| perr(format!("bad label '{f}'")))?;
                g.check(IrrepLabel(*slot)).map_err(|e| perr(e.to_string()))?;
            }
            let re: f64 = fields[4].parse().map_err(|_| perr(format!("bad number '{}'", fields[4])))?;
            let im: f64 = fields[5].parse().map_err(|_| perr(format!("bad number '{}'", fields[5])))?;
            elements.insert(key, C64::new(re, im));
        }
        let group = group.ok_or(Error::Parse { line: 0, msg: "missing group header".into() })?;
        Self::from_elements_unchecked(group, elements)
    }
}
