use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use gauge_peps::analysis::{classify, creutz_csv, creutz_table, fit_decay, fmt_f64, local_criteria, Thresholds, WilsonTable};
use gauge_peps::contraction::{Engine, EngineOptions, LoopSpec, Projection};
use gauge_peps::oracle::build_state;
use gauge_peps::thermo::{epar_spectrum, SpectrumTable};
use gauge_peps::{Error, GaugeTensor, Result};

use crate::config::{ScenarioConfig, Task, TensorSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Numerical(_) | Error::OracleLimit(_) | Error::Analysis(_) | Error::NotSymmetric(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Geometry(format!("cannot write {}: {e}", path.display()))
}

fn load_tensor(cfg: &ScenarioConfig) -> Result<GaugeTensor> {
    let t = match &cfg.tensor {
        TensorSource::Z2(p) => GaugeTensor::z2(*p)?,
        TensorSource::File(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Parse { line: 0, msg: format!("cannot read {}: {e}", path.display()) })?;
            GaugeTensor::from_text(&text)?
        }
    };
    if t.group() != cfg.group {
        return Err(Error::InvalidGroup(format!("tensor file holds {} but the config says {}", t.group(), cfg.group)));
    }
    let report = t.check_gauge_symmetry();
    if !report.ok {
        return Err(Error::Parse { line: 0, msg: format!("tensor violates gauge symmetry ({} violations)", report.violations.len()) });
    }
    Ok(t)
}

/// Collects artifacts and writes them from one place.
struct Writer<'a> {
    dir: &'a Path,
    log: &'a mut dyn Write,
}

impl Writer<'_> {
    fn file(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))
    }

    fn line(&mut self, task: Task, msg: impl AsRef<str>) {
        let _ = writeln!(self.log, "{}: {}", task.name(), msg.as_ref());
    }
}

fn spectra_csv(s: &SpectrumTable) -> String {
    let mut out = String::from("R,log_abs_rho1\n");
    for (r, l) in s.leading() {
        let _ = writeln!(out, "{r},{}", fmt_f64(l));
    }
    out
}

/// Runs every configured task, writing artifacts into `cfg.out`, and
/// returns the process exit code.
pub fn run(cfg: &ScenarioConfig, log: &mut (dyn Write + Send)) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(log, "error: cannot start thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| run_tasks(cfg, log)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            exit_code(&e)
        }
    }
}

fn run_tasks(cfg: &ScenarioConfig, log: &mut (dyn Write + Send)) -> Result<i32> {
    let tensor = load_tensor(cfg)?;
    let options = EngineOptions { budget_bytes: cfg.budget_bytes, projection: Projection::Sectors };
    let engine = Engine::new(&tensor, cfg.torus, options)?;
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let mut w = Writer { dir: &cfg.out, log };
    let mut code = EXIT_OK;

    if cfg.has(Task::Norm) {
        let ln = engine.log_norm();
        w.file("norm.csv", &format!("N1,N2,log_norm\n{},{},{}\n", cfg.torus.n1, cfg.torus.n2, fmt_f64(ln)))?;
        w.line(Task::Norm, format!("ln <psi|psi> = {} on {}x{}", fmt_f64(ln), cfg.torus.n1, cfg.torus.n2));
    }

    let needs_table = [Task::Wilson, Task::Creutz, Task::Fit, Task::Classify].iter().any(|&t| cfg.has(t));
    let mut table = WilsonTable::new();
    if needs_table {
        let results = engine.wilson_table(cfg.j, &cfg.loops)?;
        let flags: Vec<String> = results.iter().filter_map(|((a, b), r)| r.flag.as_ref().map(|f| format!("W({a},{b}): {f}"))).collect();
        table = WilsonTable::from_results(&results);
        if cfg.has(Task::Wilson) {
            w.file("wilson.csv", &table.to_csv())?;
            w.line(Task::Wilson, format!("{} loops, J = {}", table.len(), cfg.j));
        }
        if let Some(f) = flags.first() {
            w.line(Task::Wilson, format!("{} vanishing loops; {f}", flags.len()));
            return Err(Error::Numerical(f.clone()));
        }
    }

    let needs_spectra = cfg.has(Task::Spectra) || cfg.has(Task::Classify);
    let spectrum = if needs_spectra {
        let rs: Vec<usize> = (1..cfg.torus.n1).collect();
        let s = epar_spectrum(&engine, &rs, cfg.j)?;
        if cfg.has(Task::Spectra) {
            w.file("spectra.csv", &spectra_csv(&s))?;
            let lead = s.leading();
            w.line(
                Task::Spectra,
                format!("ln|rho'_1(R)| for R = 1..{}: {} .. {}", cfg.torus.n1 - 1, fmt_f64(lead[0].1), fmt_f64(lead[lead.len() - 1].1)),
            );
        }
        Some(s)
    } else {
        None
    };

    let creutz = creutz_table(&table);
    if cfg.has(Task::Creutz) {
        w.file("creutz.csv", &creutz_csv(&creutz))?;
        match creutz.iter().max_by_key(|c| (c.0 .0 + c.0 .1, c.0)) {
            Some(((a, b), c)) => w.line(Task::Creutz, format!("{} ratios, chi({a},{b}) = {}", creutz.len(), fmt_f64(*c))),
            None => w.line(Task::Creutz, "no loop has all three smaller neighbours"),
        }
    }

    if cfg.has(Task::Fit) || cfg.has(Task::Classify) {
        let window = cfg.fit_window.as_ref().ok_or_else(|| Error::Analysis("no fit window".into()))?;
        let fit = fit_decay(&table, window)?;
        if cfg.has(Task::Fit) {
            w.file("fit.csv", &fit.to_csv())?;
            w.line(Task::Fit, format!("kappa_A = {}, kappa_P = {} ({window})", fmt_f64(fit.kappa_a), fmt_f64(fit.kappa_p)));
        }
        if cfg.has(Task::Classify) {
            let s = spectrum.as_ref().expect("spectra computed for classify");
            let mut rep = classify(&fit, s, Thresholds::default())?.with_creutz(creutz.clone());
            if let Ok(local) = local_criteria(&tensor) {
                rep = rep.with_local(local);
            }
            w.file("phase_report.txt", &rep.to_text())?;
            w.line(Task::Classify, rep.classification.to_string());
        }
    }

    if cfg.has(Task::OracleCheck) {
        let torus = cfg.oracle_torus.expect("validated with the config");
        let state = build_state(&tensor, torus)?;
        let small = Engine::new(&tensor, torus, options)?;
        let mut csv = String::from("quantity,engine,oracle,relative_deviation,status\n");
        let mut rows = Vec::new();
        let norm = state.norm_sqr();
        let ours = small.log_norm().exp();
        rows.push(("norm".to_string(), ours, norm, (ours - norm).abs() / norm));
        for a in 1..torus.n1.min(3) {
            for b in 1..torus.n2.min(3) {
                let lp = LoopSpec::new(a, b, cfg.j);
                let d = state.direct_wilson(&lp)?;
                let x = small.wilson(&lp)?.value.value();
                let dev = if d.norm() > 0.0 { (x - d).norm() / d.norm() } else { x.norm() };
                rows.push((format!("W({a};{b})"), x.re, d.re, dev));
            }
        }
        let mut failed = 0;
        for (name, x, d, dev) in rows {
            let ok = dev <= 1e-10;
            failed += usize::from(!ok);
            let status = if ok { "PASS" } else { "FAIL" };
            let _ = writeln!(csv, "{name},{},{},{},{status}", fmt_f64(x), fmt_f64(d), fmt_f64(dev));
            w.line(
                Task::OracleCheck,
                format!("{status} {} on {}x{} (relative deviation {dev:.1e})", name.replace(';', ","), torus.n1, torus.n2),
            );
        }
        w.file("oracle_check.csv", &csv)?;
        if failed > 0 {
            code = EXIT_NUMERICAL;
        }
    }
    Ok(code)
}
