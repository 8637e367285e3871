//! Brute-force reference: the physical state of a tiny torus, built link
//! configuration by link configuration.
//!
//! Links are ordered by (row, column, direction), direction 0 pointing right
//! and 1 up; the first link is the most significant digit of a
//! configuration index. Only nonzero amplitudes are stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::contraction::{LoopSpec, TorusSpec};
use crate::error::{Error, Result};
use crate::symmetry::{GroupSpec, IrrepLabel, LinkOperator, C64};
use crate::tensor::GaugeTensor;

/// Largest admissible `dim^links`.
pub const MAX_CONFIGURATIONS: f64 = 4_294_967_296.0;
/// Largest admissible number of nonzero amplitudes.
pub const MAX_NONZERO: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub group: GroupSpec,
    pub torus: TorusSpec,
    pub amplitudes: BTreeMap<u64, C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceViolation {
    pub site: (usize, usize),
    pub group_element: i64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub ok: bool,
    pub violations: Vec<InvarianceViolation>,
}

fn link(torus: TorusSpec, x: usize, y: usize, dir: usize) -> usize {
    ((y % torus.n2) * torus.n1 + (x % torus.n1)) * 2 + dir
}

/// Link positions `(right, up, left, down)` of a site.
fn site_links(torus: TorusSpec, x: usize, y: usize) -> [usize; 4] {
    let TorusSpec { n1, n2 } = torus;
    [link(torus, x, y, 0), link(torus, x, y, 1), link(torus, x + n1 - 1, y, 0), link(torus, x, y + n2 - 1, 1)]
}

impl StateVector {
    pub fn links(&self) -> usize {
        2 * self.torus.n1 * self.torus.n2
    }

    pub fn encode(&self, labels: &[IrrepLabel]) -> Result<u64> {
        let d = self.group.dim() as u64;
        labels.iter().try_fold(0u64, |acc, &j| {
            let i = self.group.index_of(j).ok_or(Error::LabelOutOfRange { label: j.0, group: self.group.to_string() })?;
            Ok(acc * d + i as u64)
        })
    }

    pub fn decode(&self, mut index: u64) -> Vec<IrrepLabel> {
        let d = self.group.dim() as u64;
        let mut out = vec![IrrepLabel(0); self.links()];
        for slot in out.iter_mut().rev() {
            *slot = self.group.label_at((index % d) as usize);
            index /= d;
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn amplitude(&self, labels: &[IrrepLabel]) -> C64 {
        self.encode(labels).ok().and_then(|i| self.amplitudes.get(&i).copied()).unwrap_or_default()
    }

    /// Copy with one amplitude overwritten. For negative tests.
    pub fn with_amplitude(&self, labels: &[IrrepLabel], value: C64) -> Result<Self> {
        let mut out = self.clone();
        out.amplitudes.insert(self.encode(labels)?, value);
        Ok(out)
    }

    /// Applies a product of single-link operators to the state.
    fn apply(&self, ops: &[(usize, &LinkOperator)]) -> BTreeMap<u64, C64> {
        let mut current: BTreeMap<Vec<IrrepLabel>, C64> = self.amplitudes.iter().map(|(&k, &v)| (self.decode(k), v)).collect();
        for &(pos, op) in ops {
            let mut next: BTreeMap<Vec<IrrepLabel>, C64> = BTreeMap::new();
            for (labels, amp) in current {
                let col = self.group.index_of(labels[pos]).expect("valid label");
                for row in 0..self.group.dim() {
                    let w = op.matrix[(row, col)];
                    if w != C64::new(0.0, 0.0) {
                        let mut l = labels.clone();
                        l[pos] = self.group.label_at(row);
                        *next.entry(l).or_default() += w * amp;
                    }
                }
            }
            current = next;
        }
        current.into_iter().map(|(l, v)| (self.encode(&l).expect("valid labels"), v)).collect()
    }

    /// `<psi|W|psi> / <psi|psi>` with `U^J` on the lower and right edges of
    /// the loop and `U^J dagger` on the upper and left edges, lower-left
    /// corner at the origin.
    pub fn direct_wilson(&self, lp: &LoopSpec) -> Result<C64> {
        lp.check(self.torus)?;
        let g = self.group;
        let u = g.flux_operator(lp.j, false)?;
        let ud = g.flux_operator(lp.j, true)?;
        let mut ops = Vec::new();
        for i in 0..lp.r1 {
            ops.push((link(self.torus, i, 0, 0), &u));
            ops.push((link(self.torus, i, lp.r2, 0), &ud));
        }
        for i in 0..lp.r2 {
            ops.push((link(self.torus, lp.r1, i, 1), &u));
            ops.push((link(self.torus, 0, i, 1), &ud));
        }
        let w_psi = self.apply(&ops);
        let mut num = C64::new(0.0, 0.0);
        for (k, v) in w_psi {
            if let Some(a) = self.amplitudes.get(&k) {
                num += a.conj() * v;
            }
        }
        Ok(num / self.norm_sqr())
    }

    /// Applies the gauge transformation at every site for every group
    /// element and compares with the original state.
    pub fn check_gauge_invariance(&self) -> Result<InvarianceReport> {
        const TOL: f64 = 1e-12;
        let g = self.group;
        let scale = self.amplitudes.values().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut violations = Vec::new();
        for y in 0..self.torus.n2 {
            for x in 0..self.torus.n1 {
                let [r, u, l, d] = site_links(self.torus, x, y);
                for e in g.elements().into_iter().skip(1) {
                    let rot = g.gauge_rotation(e)?;
                    let inv = LinkOperator { kind: rot.kind, matrix: rot.matrix.adjoint() };
                    let out = self.apply(&[(r, &rot), (u, &rot), (l, &inv), (d, &inv)]);
                    let mut dev: f64 = 0.0;
                    for (k, v) in &out {
                        dev = dev.max((v - self.amplitudes.get(k).copied().unwrap_or_default()).norm());
                    }
                    for (k, v) in &self.amplitudes {
                        if !out.contains_key(k) {
                            dev = dev.max(v.norm());
                        }
                    }
                    if dev > TOL * scale {
                        violations.push(InvarianceViolation { site: (x, y), group_element: e, deviation: dev / scale });
                    }
                }
            }
        }
        Ok(InvarianceReport { ok: violations.is_empty(), violations })
    }

    /// `configuration,re,im` with the configuration as space-separated labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("configuration,re,im\n");
        for (&k, v) in &self.amplitudes {
            let labels: Vec<String> = self.decode(k).iter().map(|j| j.to_string()).collect();
            let _ = writeln!(out, "{},{:.17e},{:.17e}", labels.join(" "), v.re, v.im);
        }
        out
    }
}

/// Enumerates every link configuration with a nonzero amplitude. The
/// amplitude is the product of the site tensors, each evaluated on its four
/// links since physical labels equal the outgoing virtual labels.
pub fn build_state(tensor: &GaugeTensor, torus: TorusSpec) -> Result<StateVector> {
    let g = tensor.group();
    let d = g.dim();
    let n_links = 2 * torus.n1 * torus.n2;
    let nominal = (d as f64).powi(n_links as i32);
    if nominal > MAX_CONFIGURATIONS {
        return Err(Error::OracleLimit(format!("{}^{} configurations on a {}x{} torus", d, n_links, torus.n1, torus.n2)));
    }
    // sites whose last link is assigned at each position
    let mut completes: Vec<Vec<[usize; 4]>> = vec![Vec::new(); n_links];
    for y in 0..torus.n2 {
        for x in 0..torus.n1 {
            let links = site_links(torus, x, y);
            completes[*links.iter().max().unwrap()].push(links);
        }
    }
    let labels = g.labels();
    let mut state = StateVector { group: g, torus, amplitudes: BTreeMap::new() };
    let mut assignment = vec![0usize; n_links];

    fn dfs(
        pos: usize,
        amp: C64,
        index: u64,
        assignment: &mut Vec<usize>,
        ctx: &(&GaugeTensor, &[IrrepLabel], &[Vec<[usize; 4]>]),
        out: &mut BTreeMap<u64, C64>,
    ) -> Result<()> {
        let (tensor, labels, completes) = *ctx;
        if pos == assignment.len() {
            out.insert(index, amp);
            if out.len() > MAX_NONZERO {
                return Err(Error::OracleLimit(format!("more than {MAX_NONZERO} nonzero amplitudes")));
            }
            return Ok(());
        }
        for (i, _) in labels.iter().enumerate() {
            assignment[pos] = i;
            let mut a = amp;
            for site in &completes[pos] {
                let key = site.map(|p| labels[assignment[p]].0);
                a *= tensor.get(key);
                if a == C64::new(0.0, 0.0) {
                    break;
                }
            }
            if a != C64::new(0.0, 0.0) {
                dfs(pos + 1, a, index * labels.len() as u64 + i as u64, assignment, ctx, out)?;
            }
        }
        Ok(())
    }

    dfs(0, C64::new(1.0, 0.0), 0, &mut assignment, &(tensor, &labels, &completes), &mut state.amplitudes)?;
    if state.amplitudes.is_empty() {
        return Err(Error::Numerical("state vanishes on this torus".into()));
    }
    Ok(state)
}
