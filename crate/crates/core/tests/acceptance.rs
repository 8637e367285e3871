//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see
//! the lines.

use std::collections::BTreeMap;

use gauge_peps::analysis::{classify, creutz, creutz_table, fit_decay, Classification, FitWindow, Thresholds, WilsonTable};
use gauge_peps::contraction::{Engine, EngineOptions, LoopSpec, Projection, TorusSpec};
use gauge_peps::oracle::build_state;
use gauge_peps::thermo::{epar_spectrum, wilson_analytic_z2};
use gauge_peps::transfer::{build_transfer, flux_svd, project, tau0, tau0_spectral, FluxSpec, SpectralReduction};
use gauge_peps::{GaugeTensor, GroupSpec, IrrepLabel, Z2Params, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const J1: IrrepLabel = IrrepLabel(1);

fn report(n: u32, ok: bool, detail: String) {
    println!("{} criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn z2(a: f64, b: f64, g: f64, d: f64) -> GaugeTensor {
    GaugeTensor::z2(Z2Params::real(a, b, g, d)).unwrap()
}

fn engine(t: &GaugeTensor, n1: usize, n2: usize) -> Engine {
    Engine::new(t, TorusSpec::new(n1, n2).unwrap(), EngineOptions::default()).unwrap()
}

fn table(e: &Engine, loops: &[(usize, usize)]) -> WilsonTable {
    WilsonTable::from_results(&e.wilson_table(J1, loops).unwrap())
}

fn grid(r1: std::ops::RangeInclusive<usize>, r2: std::ops::RangeInclusive<usize>) -> Vec<(usize, usize)> {
    r1.flat_map(|a| r2.clone().map(move |b| (a, b))).collect()
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// The ten random Z2 and three random Z3 tensors shared by criteria 7 and 8.
fn random_tensors() -> Vec<GaugeTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for _ in 0..10 {
        let p = Z2Params::new(random_c(&mut rng), random_c(&mut rng), random_c(&mut rng), random_c(&mut rng));
        out.push(GaugeTensor::z2(p).unwrap());
    }
    for _ in 0..3 {
        let mut coeffs = BTreeMap::new();
        for r in 0..3i64 {
            for u in 0..3i64 {
                for l in 0..3i64 {
                    coeffs.insert([r, u, l, (r + u - l).rem_euclid(3)], random_c(&mut rng));
                }
            }
        }
        out.push(GaugeTensor::zn(GroupSpec::Cyclic(3), &coeffs).unwrap());
    }
    out
}

#[test]
fn criterion_01_confining_creutz() {
    let e = engine(&z2(1.0, 0.1, 0.0, 0.95), 8, 100);
    let t = table(&e, &grid(2..=6, 2..=6));
    let target = -2.0 * 0.95f64.ln();
    let diag: Vec<f64> = (3..=6).map(|r| creutz(&t, r, r).unwrap()).collect();
    let all: Vec<f64> = grid(3..=6, 3..=6).iter().map(|&(a, b)| creutz(&t, a, b).unwrap()).collect();
    let dist: Vec<f64> = diag.iter().map(|c| (c - target).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let spread = all.iter().map(|c| (c - target).abs()).fold(0.0, f64::max);
    let chi66 = diag[3];
    let ok = monotone && (chi66 - 0.1026).abs() <= 5e-3;
    report(1, ok, format!("chi(6,6) = {chi66:.6}, target {target:.6}, max |chi - target| over 3..6 = {spread:.2e}, monotone = {monotone}"));
}

#[test]
fn criterion_02_confining_fit() {
    let e = engine(&z2(1.0, 0.1, 0.0, 0.95), 8, 100);
    let w = FitWindow::default_for(8, 100).unwrap();
    let f = fit_decay(&table(&e, &w.loops()), &w).unwrap();
    let f1 = f.f1();
    let min_gap = f1.windows(2).map(|p| (p[1].1 - p[0].1).abs()).fold(f64::INFINITY, f64::min);
    let ok = (0.09..=0.14).contains(&f.kappa_a) && min_gap > 0.05;
    report(2, ok, format!("kappa_A = {:.6}, kappa_P = {:.4}, smallest f1 gap = {min_gap:.4} ({w})", f.kappa_a, f.kappa_p));
}

#[test]
fn criterion_03_confining_spectrum() {
    let e = engine(&z2(1.0, 0.1, 0.0, 0.95), 8, 100);
    let s = epar_spectrum(&e, &(1..8).collect::<Vec<_>>(), J1).unwrap();
    let lead: BTreeMap<usize, f64> = s.leading().into_iter().collect();
    let pts: Vec<(f64, f64)> = (1..=4).map(|r| (r as f64, lead[&r])).collect();
    let fit = gauge_peps::analysis::fit_line(&pts).unwrap();
    let max_dev = pts.iter().map(|p| (p.1 - fit.slope * p.0 - fit.intercept).abs()).fold(0.0, f64::max);
    let asym = (1..=3).map(|r| (lead[&r] - lead[&(8 - r)]).abs()).fold(0.0, f64::max);
    let expect = 2.0 * 0.95f64.ln();
    let ok = (fit.slope - expect).abs() <= 1e-3 && max_dev <= 1e-3 && asym <= 1e-9;
    report(
        3,
        ok,
        format!("slope = {:.6} (expected {expect:.6}), max line deviation {max_dev:.1e}, asymmetry about R=4 {asym:.1e}", fit.slope),
    );
}

#[test]
fn criterion_04_degenerate() {
    let e = engine(&z2(1.0, 0.1, 0.0, 1.0), 8, 100);
    let w = FitWindow::default_for(8, 100).unwrap();
    let f = fit_decay(&table(&e, &w.loops()), &w).unwrap();
    let s = epar_spectrum(&e, &(1..8).collect::<Vec<_>>(), J1).unwrap();
    let lead: Vec<f64> = s.leading().iter().map(|x| x.1).collect();
    let max = lead.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = lead.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = 1.0 - (min - max).exp();
    let f1_dev = f.f1().iter().map(|x| (x.1 - 9.2103).abs()).fold(0.0, f64::max);
    let rep = classify(&f, &s, Thresholds::default()).unwrap();
    let perimeter = matches!(rep.classification, Classification::PerimeterLaw(_));
    let ok = f.kappa_a.abs() <= 1e-3 && f1_dev <= 1e-2 && variation < 1e-10 && perimeter;
    report(
        4,
        ok,
        format!(
            "kappa_A = {:.2e}, max |f1 - 9.2103| = {f1_dev:.1e}, rho'_1 relative variation {variation:.1e}, {}",
            f.kappa_a, rep.classification
        ),
    );
}

#[test]
fn criterion_05_nonperturbative() {
    let t = z2(0.1, 0.1, 1.0, 0.3);
    let tau_vals = tau0_spectral(&tau0(&t).unwrap()).unwrap().values().to_vec();
    let expected_tau = [1.05, -0.95, 0.02, 0.0];
    let tau_dev = tau_vals.iter().zip(expected_tau).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let minus = project(&build_transfer(&t, FluxSpec::Right(J1)).unwrap(), J1, IrrepLabel(0)).unwrap();
    let sv = flux_svd(&minus).unwrap().values().to_vec();
    let expected_sv = [0.2f64.sqrt(), 0.02, 0.0, 0.0];
    let sv_dev = sv.iter().zip(expected_sv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let e = engine(&t, 8, 100);
    let w = FitWindow::default_for(8, 100).unwrap();
    let mut loops = w.loops();
    loops.extend(grid(1..=6, 1..=6));
    let tab = table(&e, &loops);
    let f = fit_decay(&tab, &w).unwrap();
    let in_window: Vec<f64> =
        creutz_table(&tab).into_iter().filter(|((a, b), _)| w.r1.contains(&(a - 1)) && w.r2.contains(&(b - 1))).map(|x| x.1).collect();
    let chi_max = in_window.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let diag: Vec<String> = (2..=6).map(|r| format!("{:.3}", creutz(&tab, r, r).unwrap())).collect();
    println!("info criterion 5: diagonal chi(R,R), R = 2..6: {} (two-sector crossover, see README)", diag.join(" "));
    let s = epar_spectrum(&e, &(1..8).collect::<Vec<_>>(), J1).unwrap();
    let rep = classify(&f, &s, Thresholds::default()).unwrap();
    let perimeter = matches!(rep.classification, Classification::PerimeterLaw(_));
    let ok = tau_dev <= 5e-3 && sv_dev <= 1e-4 && chi_max <= 0.05 && !in_window.is_empty() && perimeter;
    report(
        5,
        ok,
        format!(
            "tau0 {tau_vals:.4?} (max dev {tau_dev:.1e}), tau_- singular values {sv:.4?} (max dev {sv_dev:.1e}), max |chi| = {chi_max:.1e} over {} loops in {w}, {}",
            in_window.len(),
            rep.classification
        ),
    );
}

#[test]
fn criterion_06_analytic() {
    let p = Z2Params::real(1.0, 0.05, 0.0, 0.9);
    let e = engine(&GaugeTensor::z2(p).unwrap(), 8, 60);
    let loops = grid(2..=5, 2..=5);
    let tab = e.wilson_table(J1, &loops).unwrap();
    let mut worst: f64 = 0.0;
    for ((a, b), w) in &tab {
        let exact = w.value.value();
        let an = wilson_analytic_z2(&p, *a, *b).unwrap().value;
        worst = worst.max((exact.re - an).abs() / an.abs() + exact.im.abs() / an.abs());
    }
    report(6, worst <= 0.02, format!("max relative deviation {worst:.2e} over {} loops", tab.len()));
}

#[test]
fn criterion_07_oracle() {
    let torus = TorusSpec::new(3, 3).unwrap();
    let mut worst: f64 = 0.0;
    for t in random_tensors() {
        let state = build_state(&t, torus).unwrap();
        let e = Engine::new(&t, torus, EngineOptions::default()).unwrap();
        let n = state.norm_sqr();
        worst = worst.max((e.log_norm().exp() - n).abs() / n);
        for (a, b) in [(1, 1), (2, 1), (2, 2)] {
            let lp = LoopSpec::new(a, b, J1);
            let d = state.direct_wilson(&lp).unwrap();
            let x = e.wilson(&lp).unwrap().value.value();
            worst = worst.max((x - d).norm() / d.norm());
        }
    }
    report(7, worst <= 1e-10, format!("13 tensors (10 Z2, 3 Z3) on 3x3, max relative deviation {worst:.1e}"));
}

#[test]
fn criterion_08_gauge_invariance() {
    let torus = TorusSpec::new(3, 3).unwrap();
    let mut tensors = random_tensors();
    for p in [(1.0, 0.1, 0.0, 0.95), (1.0, 0.1, 0.0, 1.0), (0.1, 0.1, 1.0, 0.3), (1.0, 0.05, 0.0, 0.9)] {
        tensors.push(z2(p.0, p.1, p.2, p.3));
    }
    let mut invariant = 0;
    for t in &tensors {
        let sym = t.check_gauge_symmetry().ok;
        let inv = build_state(t, torus).unwrap().check_gauge_invariance().unwrap().ok;
        if sym && inv {
            invariant += 1;
        }
    }
    let bad = z2(1.0, 0.3, 0.2, 0.8).with_element_unchecked([1, 0, 0, 0], C64::new(0.4, 0.0));
    let sym_flag = !bad.check_gauge_symmetry().ok;
    let inv_flag = !build_state(&bad, torus).unwrap().check_gauge_invariance().unwrap().ok;
    let ok = invariant == tensors.len() && sym_flag && inv_flag;
    report(
        8,
        ok,
        format!(
            "{invariant}/{} valid tensors invariant at every site; corrupted tensor flagged: symmetry {sym_flag}, statevector {inv_flag}",
            tensors.len()
        ),
    );
}

#[test]
fn criterion_09_spectral_identities() {
    let mut ortho: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for p in [(1.0, 0.1, 0.0, 0.95), (1.0, 0.1, 0.0, 1.0), (0.1, 0.1, 1.0, 0.3), (1.0, 0.05, 0.0, 0.9)] {
        let r = tau0(&z2(p.0, p.1, p.2, p.3)).unwrap();
        let s = tau0_spectral(&r).unwrap();
        let SpectralReduction::Eigen { operators, .. } = &s else { unreachable!() };
        for (i, m) in operators.iter().enumerate() {
            for (j, n) in operators.iter().enumerate() {
                let ip = (m * n.transpose()).trace();
                ortho = ortho.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        recon = recon.max((s.reconstruct() - &r.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = Z2Params::new(random_c(&mut rng), random_c(&mut rng), random_c(&mut rng), random_c(&mut rng));
    let t = GaugeTensor::z2(p).unwrap();
    let torus = TorusSpec::new(4, 6).unwrap();
    let proj = Engine::new(&t, torus, EngineOptions::default()).unwrap();
    let full = Engine::new(&t, torus, EngineOptions { projection: Projection::Unprojected, ..EngineOptions::default() }).unwrap();
    let mut proj_dev: f64 = 0.0;
    for (a, b) in [(1, 1), (2, 3), (3, 2), (3, 4)] {
        let lp = LoopSpec::new(a, b, J1);
        let x = proj.wilson(&lp).unwrap().value.value();
        let y = full.wilson(&lp).unwrap().value.value();
        proj_dev = proj_dev.max((x - y).norm() / x.norm());
    }
    let ok = ortho <= 1e-12 && recon <= 1e-12 && proj_dev <= 1e-10;
    report(9, ok, format!(
            "orthonormality {ortho:.1e}, reconstruction {recon:.1e}, projected (row dim {}) vs unprojected (row dim {}) on 4x6 {proj_dev:.1e}",
            proj.e_hat().dim(),
            full.e_hat().dim()
        ));
}

#[test]
fn criterion_10_trivial_irrep() {
    let mut worst: f64 = 0.0;
    for (p, n2) in [((1.0, 0.1, 0.0, 0.95), 100), ((1.0, 0.1, 0.0, 1.0), 100), ((0.1, 0.1, 1.0, 0.3), 100), ((1.0, 0.05, 0.0, 0.9), 60)] {
        let e = engine(&z2(p.0, p.1, p.2, p.3), 8, n2);
        for (a, b) in [(1, 1), (3, 4), (6, 6)] {
            let w = e.wilson(&LoopSpec::new(a, b, IrrepLabel(0))).unwrap().value.value();
            worst = worst.max((w - C64::new(1.0, 0.0)).norm());
        }
    }
    report(10, worst <= 1e-12, format!("max |W - 1| = {worst:.1e} over 4 scenarios"));
}
