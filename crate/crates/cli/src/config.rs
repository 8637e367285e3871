use std::collections::BTreeMap;
use std::path::PathBuf;

use gauge_peps::analysis::FitWindow;
use gauge_peps::contraction::{LoopSpec, TorusSpec, DEFAULT_BUDGET};
use gauge_peps::oracle::MAX_CONFIGURATIONS;
use gauge_peps::{Error, GroupSpec, IrrepLabel, Result, Z2Params, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Norm,
    Wilson,
    Spectra,
    Creutz,
    Fit,
    Classify,
    OracleCheck,
}

impl Task {
    pub const ALL: [Task; 7] = [Task::Norm, Task::Wilson, Task::Spectra, Task::Creutz, Task::Fit, Task::Classify, Task::OracleCheck];

    pub fn name(self) -> &'static str {
        match self {
            Task::Norm => "norm",
            Task::Wilson => "wilson",
            Task::Spectra => "spectra",
            Task::Creutz => "creutz",
            Task::Fit => "fit",
            Task::Classify => "classify",
            Task::OracleCheck => "oracle-check",
        }
    }

    fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorSource {
    Z2(Z2Params),
    /// Element file in the `group` / `r u l d re im` text format.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub group: GroupSpec,
    pub tensor: TensorSource,
    pub torus: TorusSpec,
    pub j: IrrepLabel,
    /// Sorted, without duplicates; includes the fit window when fitting.
    pub loops: Vec<(usize, usize)>,
    /// In execution order.
    pub tasks: Vec<Task>,
    pub fit_window: Option<FitWindow>,
    pub oracle_torus: Option<TorusSpec>,
    pub out: PathBuf,
    /// 0 means the rayon default.
    pub threads: usize,
    pub budget_bytes: u64,
}

impl ScenarioConfig {
    pub fn has(&self, t: Task) -> bool {
        self.tasks.contains(&t)
    }
}

pub const DEFAULT_TASKS: [Task; 6] = [Task::Norm, Task::Wilson, Task::Spectra, Task::Creutz, Task::Fit, Task::Classify];

const KEYS: [&str; 19] = [
    "group",
    "alpha",
    "beta",
    "gamma",
    "delta",
    "tensor_file",
    "N1",
    "N2",
    "J",
    "loops",
    "tasks",
    "fit_r1",
    "fit_r2",
    "oracle_N1",
    "oracle_N2",
    "out",
    "threads",
    "budget_bytes",
    "name",
];

pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "confining" => "name = confining\ngroup = Z2\nalpha = 1\nbeta = 0.1\ngamma = 0\ndelta = 0.95\n",
        "degenerate" => "name = degenerate\ngroup = Z2\nalpha = 1\nbeta = 0.1\ngamma = 0\ndelta = 1\n",
        "nonperturbative" => "name = nonperturbative\ngroup = Z2\nalpha = 0.1\nbeta = 0.1\ngamma = 1\ndelta = 0.3\n",
        "perturbative" => "name = perturbative\ngroup = Z2\nalpha = 1\nbeta = 0.05\ngamma = 0\ndelta = 0.9\nN2 = 60\n",
        _ => return None,
    })
}

pub const PRESETS: [&str; 4] = ["confining", "degenerate", "nonperturbative", "perturbative"];

struct Entry {
    line: usize,
    value: String,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| perr(line, format!("expected 'key = value', found '{body}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(perr(line, format!("unknown key '{k}'")));
        }
        if v.is_empty() {
            return Err(perr(line, format!("empty value for '{k}'")));
        }
        if let Some(prev) = out.get(k) {
            return Err(perr(line, format!("duplicate key '{k}' (first set on line {})", prev.line)));
        }
        out.insert(k.to_string(), Entry { line, value: v.to_string() });
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(e: &Entry, key: &str) -> Result<T> {
    e.value.parse().map_err(|_| perr(e.line, format!("malformed value '{}' for {key}", e.value)))
}

/// `re` or `re im`.
fn complex(e: &Entry, key: &str) -> Result<C64> {
    let parts: Vec<&str> = e.value.split_whitespace().collect();
    let f = |s: &str| s.parse::<f64>().map_err(|_| perr(e.line, format!("malformed value '{}' for {key}", e.value)));
    let z = match parts.as_slice() {
        [re] => C64::new(f(re)?, 0.0),
        [re, im] => C64::new(f(re)?, f(im)?),
        _ => return Err(perr(e.line, format!("{key} takes 're' or 're im'"))),
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(perr(e.line, format!("{key} must be finite")));
    }
    Ok(z)
}

/// `a..b` (inclusive) or a single `a`.
fn range(s: &str, line: usize) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || perr(line, format!("malformed range '{s}'"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

/// `;`-separated items, each `R1,R2` or `A x B` with ranges `A`, `B`.
fn loops(e: &Entry) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for item in e.value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once('x') {
            let (a, b) = (range(a, e.line)?, range(b, e.line)?);
            out.extend(a.flat_map(|x| b.clone().map(move |y| (x, y))));
        } else if let Some((a, b)) = item.split_once(',') {
            let p = |s: &str| s.trim().parse::<usize>().map_err(|_| perr(e.line, format!("malformed loop '{item}'")));
            out.push((p(a)?, p(b)?));
        } else {
            return Err(perr(e.line, format!("malformed loop '{item}'")));
        }
    }
    Ok(out)
}

fn make_torus(n1: (usize, usize), n2: (usize, usize)) -> Result<TorusSpec> {
    if n1.0 < 2 {
        return Err(perr(n1.1, format!("N1 = {} violates N1 >= 2", n1.0)));
    }
    if n2.0 < 2 {
        return Err(perr(n2.1, format!("N2 = {} violates N2 >= 2", n2.0)));
    }
    TorusSpec::new(n1.0, n2.0)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_layered(None, text)
}

/// Parses `text` on top of `base` (a preset); keys in `text` win. Line
/// numbers refer to `text`, or to the preset for keys it supplies.
pub fn parse_layered(base: Option<&str>, text: &str) -> Result<ScenarioConfig> {
    let mut map = match base {
        Some(b) => entries(b)?,
        None => BTreeMap::new(),
    };
    map.extend(entries(text)?);
    let get = |k: &str| map.get(k);

    let has_z2 = ["alpha", "beta", "gamma", "delta"].iter().any(|k| get(k).is_some());
    if get("group").is_none() || (!has_z2 && get("tensor_file").is_none()) {
        let mut missing = Vec::new();
        if get("group").is_none() {
            missing.push("group");
        }
        if !has_z2 && get("tensor_file").is_none() {
            missing.push("alpha, beta, gamma, delta (or tensor_file)");
        }
        return Err(perr(0, format!("missing required keys: {}", missing.join(", "))));
    }
    let ge = get("group").unwrap();
    let group: GroupSpec = ge.value.parse().map_err(|e: Error| perr(ge.line, e.to_string()))?;

    let tensor = match (has_z2, get("tensor_file")) {
        (true, Some(f)) => return Err(perr(f.line, "give either alpha..delta or tensor_file, not both")),
        (true, None) => {
            if group != GroupSpec::Cyclic(2) {
                return Err(perr(ge.line, "alpha..delta define a Z2 tensor; use tensor_file for other groups"));
            }
            let mut z = [C64::new(0.0, 0.0); 4];
            for (slot, k) in z.iter_mut().zip(["alpha", "beta", "gamma", "delta"]) {
                let e = get(k).ok_or_else(|| perr(0, format!("missing required key {k}")))?;
                *slot = complex(e, k)?;
            }
            TensorSource::Z2(Z2Params::new(z[0], z[1], z[2], z[3]))
        }
        (false, Some(f)) => TensorSource::File(PathBuf::from(&f.value)),
        (false, None) => unreachable!(),
    };

    let n1 = get("N1").map_or(Ok((8, 0)), |e| Ok::<_, Error>((number(e, "N1")?, e.line)))?;
    let n2 = get("N2").map_or(Ok((100, 0)), |e| Ok::<_, Error>((number(e, "N2")?, e.line)))?;
    let torus = make_torus(n1, n2)?;

    let j = match get("J") {
        Some(e) => {
            let j = IrrepLabel(number(e, "J")?);
            group.check(j).map_err(|err| perr(e.line, err.to_string()))?
        }
        None => group.check(IrrepLabel(1)).map_err(|err| perr(0, err.to_string()))?,
    };

    let tasks = match get("tasks") {
        Some(e) => {
            let mut t = Vec::new();
            for name in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                t.push(Task::parse(name).ok_or_else(|| perr(e.line, format!("unknown task '{name}'")))?);
            }
            if t.is_empty() {
                return Err(perr(e.line, "no tasks given"));
            }
            t.sort();
            t.dedup();
            t
        }
        None => DEFAULT_TASKS.to_vec(),
    };
    let fitting = tasks.contains(&Task::Fit) || tasks.contains(&Task::Classify);

    let fit_window = match (get("fit_r1"), get("fit_r2")) {
        (Some(a), Some(b)) => Some(FitWindow { r1: range(&a.value, a.line)?, r2: range(&b.value, b.line)? }),
        (Some(e), None) | (None, Some(e)) => return Err(perr(e.line, "fit_r1 and fit_r2 must be given together")),
        (None, None) => match FitWindow::default_for(torus.n1, torus.n2) {
            Ok(w) => Some(w),
            Err(err) if fitting => return Err(perr(0, format!("{err}; set fit_r1 and fit_r2"))),
            Err(_) => None,
        },
    };
    if let (Some(w), Some(e)) = (&fit_window, get("fit_r1")) {
        if w.r1.clone().count() < 2 || w.r2.clone().count() < 3 || *w.r1.start() < 2 || *w.r2.start() < 2 {
            return Err(perr(e.line, "fit window needs R1, R2 >= 2 with at least 2 values of R1 and 3 of R2"));
        }
    }

    let mut all_loops = match get("loops") {
        Some(e) => {
            let l = loops(e)?;
            for &(a, b) in &l {
                LoopSpec::new(a, b, j).check(torus).map_err(|err| perr(e.line, err.to_string()))?;
            }
            l
        }
        None => {
            let mut l: Vec<(usize, usize)> = Vec::new();
            let m1 = 6.min(torus.n1 - 1);
            let m2 = 6.min(torus.n2 - 1);
            l.extend((1..=m1).flat_map(|a| (1..=m2).map(move |b| (a, b))));
            l
        }
    };
    if fitting || tasks.contains(&Task::Creutz) {
        if let Some(w) = &fit_window {
            let line = get("fit_r1").map_or(0, |e| e.line);
            // the window plus the neighbours its Creutz ratios need
            for a in w.r1.start() - 1..=*w.r1.end() {
                for b in w.r2.start() - 1..=*w.r2.end() {
                    LoopSpec::new(a, b, j).check(torus).map_err(|err| perr(line, format!("fit window: {err}")))?;
                    all_loops.push((a, b));
                }
            }
        }
    }
    all_loops.sort_unstable();
    all_loops.dedup();

    let oracle_torus = match (get("oracle_N1"), get("oracle_N2")) {
        (Some(a), Some(b)) => Some(make_torus((number(a, "oracle_N1")?, a.line), (number(b, "oracle_N2")?, b.line))?),
        (Some(e), None) | (None, Some(e)) => return Err(perr(e.line, "oracle_N1 and oracle_N2 must be given together")),
        (None, None) => None,
    };
    let oracle_torus = if tasks.contains(&Task::OracleCheck) {
        let t = oracle_torus.unwrap_or(torus);
        let nominal = (group.dim() as f64).powi((2 * t.n1 * t.n2) as i32);
        if nominal > MAX_CONFIGURATIONS {
            let line = get("oracle_N1").map_or(0, |e| e.line);
            return Err(perr(
                line,
                format!("oracle-check on a {}x{} torus exceeds the oracle cap; set oracle_N1 and oracle_N2", t.n1, t.n2),
            ));
        }
        Some(t)
    } else {
        oracle_torus
    };

    let out = get("out").map_or_else(|| PathBuf::from("gauge-peps-out"), |e| PathBuf::from(&e.value));
    let threads = get("threads").map_or(Ok(0), |e| number(e, "threads"))?;
    let budget_bytes = get("budget_bytes").map_or(Ok(DEFAULT_BUDGET), |e| number(e, "budget_bytes"))?;

    Ok(ScenarioConfig { group, tensor, torus, j, loops: all_loops, tasks, fit_window, oracle_torus, out, threads, budget_bytes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_line(text: &str) -> (usize, String) {
        match parse_config(text).unwrap_err() {
            Error::Parse { line, msg } => (line, msg),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn scenario_one() {
        let c = parse_config("group = Z2\nalpha = 1\nbeta = 0.1\ngamma = 0\ndelta = 0.95").unwrap();
        assert_eq!(c.tensor, TensorSource::Z2(Z2Params::real(1.0, 0.1, 0.0, 0.95)));
        assert_eq!((c.torus.n1, c.torus.n2, c.j), (8, 100, IrrepLabel(1)));
        assert_eq!(c.tasks, DEFAULT_TASKS.to_vec());
        assert_eq!(c.fit_window, Some(FitWindow { r1: 2..=6, r2: 10..=14 }));
        assert!(c.loops.contains(&(1, 9)) && c.loops.contains(&(6, 14)) && c.loops.contains(&(3, 3)));
        assert!(c.loops.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let (line, msg) = err_line("# nothing\n");
        assert_eq!(line, 0);
        assert!(msg.contains("group") && msg.contains("alpha"), "{msg}");
    }

    #[test]
    fn constraint_and_syntax_errors_carry_lines() {
        let base = "group = Z2\nalpha = 1\nbeta = 0.1\ngamma = 0\ndelta = 0.95\n";
        assert_eq!(err_line(&format!("{base}N1 = 1")).0, 6);
        assert!(err_line(&format!("{base}N1 = 1")).1.contains("N1 >= 2"));
        assert_eq!(err_line(&format!("{base}\ncolour = red")), (7, "unknown key 'colour'".into()));
        assert_eq!(err_line(&format!("{base}N2 = many")).0, 6);
        assert_eq!(err_line(&format!("{base}J = 2")).0, 6);
        assert_eq!(err_line(&format!("{base}loops = 8,1")).0, 6);
        assert_eq!(err_line(&format!("{base}tasks = norm, plot")).0, 6);
        assert_eq!(err_line(&format!("{base}alpha = 2")).0, 6);
        assert_eq!(err_line("group = Z2\nalpha = 1 2 3\nbeta = 0\ngamma = 0\ndelta = 0").0, 2);
        assert_eq!(err_line(&format!("{base}N1 = 4\ntasks = fit")).0, 0);
        assert_eq!(err_line(&format!("{base}tasks = oracle-check")).0, 0);
    }

    #[test]
    fn explicit_values() {
        let text = "group = Z2\nalpha = 0.3 0.4\nbeta = 0.1\ngamma = 0\ndelta = 0.9\nN1 = 4\nN2 = 12\n\
                    loops = 1..2 x 1..3; 3,5\ntasks = wilson, norm, oracle-check\noracle_N1 = 3\noracle_N2 = 3\n\
                    out = /tmp/x\nthreads = 2 # inline comment\n";
        let c = parse_config(text).unwrap();
        let TensorSource::Z2(p) = c.tensor else { panic!() };
        assert_eq!(p.alpha, C64::new(0.3, 0.4));
        assert_eq!(c.tasks, vec![Task::Norm, Task::Wilson, Task::OracleCheck]);
        assert_eq!(c.loops, vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 5)]);
        assert_eq!(c.oracle_torus, Some(TorusSpec::new(3, 3).unwrap()));
        assert_eq!(c.threads, 2);
        assert_eq!(c.out, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn presets_layer() {
        for name in PRESETS {
            assert!(parse_layered(preset(name), "").is_ok(), "{name}");
        }
        let c = parse_layered(preset("perturbative"), "N2 = 40").unwrap();
        assert_eq!(c.torus.n2, 40);
        assert!(preset("nope").is_none());
    }

    #[test]
    fn other_groups_need_a_file() {
        assert!(parse_config("group = Z3\nalpha = 1\nbeta = 0\ngamma = 0\ndelta = 0").is_err());
        let c = parse_config("group = U1(1)\ntensor_file = t.txt\ntasks = norm").unwrap();
        assert_eq!(c.tensor, TensorSource::File("t.txt".into()));
    }
}
