//! The command layer behind the executable: every command returns a
//! [`Report`] whose exit code the binary forwards, and every error maps to
//! an exit code through [`error_exit_code`].

use crate::backend::{bundled, BackendFile, BUNDLED};
use crate::cohomology::{clifford_example_with, cohomology_section, verify_theorem, Floer, TheoremId};
use crate::crossratio::{ExtendedReal, NodalConfig, RiemannPoint, C, TOL};
use crate::error::{Error, Result};
use crate::novikov::{fmt_energy, fmt_q, parse_energy, Energy};
use crate::operators::{bounding_pair_verify, check_axioms, Backend, BoundingPair, BpVerdict, Caps};
use crate::report::{Check, Report, Section};
use crate::signs::{delta_grid, lemma_signs_grid};
use crate::structeq::{suite, EquationId, SuiteCaps, SuiteReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::str::FromStr;

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "FLOER_QKERNEL_THREADS";

/// Seed used by randomized commands when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Sets up the global worker pool from [`THREADS_ENV`], if present.
pub fn init_threads_from_env() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // A pool configured earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// 2 for input errors, 1 for failed invariants or preconditions.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Usage(_) | Error::Config(_) => 2,
        Error::Validation(_) | Error::Precondition(_) => 1,
    }
}

/// Reads a backend from a file path, or from the bundled data when the
/// argument names a bundled backend and no such file exists.
pub fn load_backend(arg: &str) -> Result<BackendFile> {
    match std::fs::read_to_string(arg) {
        Ok(text) => BackendFile::from_json(&text),
        Err(_) if BUNDLED.contains(&arg) => bundled(arg),
        Err(e) => Err(Error::Parse(format!("cannot read `{arg}`: {e}"))),
    }
}

pub fn parse_energy_arg(s: &str) -> Result<Energy> {
    let e = parse_energy(s).map_err(|e| Error::Usage(format!("--energy: {e}")))?;
    if e <= Energy::from_integer(0) {
        return Err(Error::Usage("--energy must be positive".into()));
    }
    Ok(e)
}

/// Suites selectable by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteId {
    All,
    Axioms,
    Equation(EquationId),
    Theorems,
    Signs,
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => SuiteId::All,
            "axioms" => SuiteId::Axioms,
            "theorems" => SuiteId::Theorems,
            "signs" => SuiteId::Signs,
            other => SuiteId::Equation(other.parse().map_err(|_| {
                Error::Usage(format!(
                    "unknown suite `{other}`; expected all, axioms, signs, theorems or one of {}",
                    EquationId::ALL.map(|e| e.to_string()).join(", ")
                ))
            })?),
        })
    }
}

/// Options shared by `verify` and `cohomology`.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub max_k: usize,
    pub max_l: usize,
    pub energy: Energy,
    /// Overrides for the bounding pair declared in the file.
    pub gamma: Option<String>,
    pub b: Option<String>,
    pub exclude_degenerate: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_k: 3,
            max_l: 2,
            energy: Energy::from_integer(10),
            gamma: None,
            b: None,
            exclude_degenerate: false,
        }
    }
}

fn pair_for(file: &BackendFile, be: &Backend, opts: &RunOptions) -> Result<BoundingPair> {
    let mut pair = file.pair(be, opts.energy)?;
    if let Some(g) = &opts.gamma {
        pair.gamma = crate::backend::parse_element(be, &be.x_model, g, opts.energy)?;
    }
    if let Some(b) = &opts.b {
        pair.b = crate::backend::parse_element(be, &be.l_model, b, opts.energy)?;
    }
    Ok(pair)
}

fn witness_list(w: &[String]) -> String {
    let shown: Vec<&str> = w.iter().take(5).map(String::as_str).collect();
    let more = if w.len() > 5 { format!(" (and {} more)", w.len() - 5) } else { String::new() };
    format!("{}{more}", shown.join("; "))
}

fn validation_section(file: &BackendFile, be: &Backend, energy: Energy) -> Result<Section> {
    let mut s = Section::new("validation");
    s.line(format!("backend `{}`, n = {}, class rank {}", be.name, be.n, be.ring.rank()));
    s.line(format!(
        "L-model {} forms, X-model {} forms, {} tables",
        be.l_model.len(),
        be.x_model.len(),
        file.tables.len()
    ));
    let all = be.validate();
    let (adm, rest): (Vec<String>, Vec<String>) =
        all.into_iter().partition(|w| w.starts_with("admissibility") || w.contains("Maslov"));
    let (deg, rest): (Vec<String>, Vec<String>) = rest.into_iter().partition(|w| w.starts_with("degree axiom"));
    for (name, w) in [("models and class data", rest), ("admissibility", adm), ("degree axiom", deg)] {
        s.check(if w.is_empty() { Check::pass(name, "ok") } else { Check::fail(name, witness_list(&w)) });
    }
    if file.bounding_pair.is_some() {
        let pair = file.pair(be, energy)?;
        s.check(match bounding_pair_verify(be, &pair, energy)? {
            BpVerdict::Bounding(c) => Check::pass("declared bounding pair", format!("c = {}", c.render())),
            BpVerdict::NotBounding(w) => Check::fail("declared bounding pair", w),
        });
    }
    Ok(s)
}

/// Parses and validates a backend file.
pub fn cmd_validate(path: &str, energy: Energy) -> Result<Report> {
    let file = load_backend(path)?;
    let be = file.build()?;
    let mut r = Report::new(format!("validate {path}"));
    r.push(validation_section(&file, &be, energy)?);
    Ok(r)
}

fn suite_check(rep: &SuiteReport) -> Check {
    let name = rep.eq.to_string();
    if rep.passed() {
        return Check::pass(name, format!("{} cases, residual 0", rep.cases));
    }
    let w: Vec<String> = rep
        .witnesses
        .iter()
        .map(|w| format!("k={} l={} m={} {}: residual {}", w.k, w.l, w.m, w.inputs, w.residual))
        .collect();
    Check::fail(
        name,
        format!(
            "{} of {} cases fail, max coefficient {}; {}",
            rep.failures,
            rep.cases,
            fmt_q(&rep.max_residual),
            w.join("; ")
        ),
    )
}

fn signs_section() -> Section {
    let mut s = Section::new("signs");
    let lemma = lemma_signs_grid(4, 4);
    s.check(if lemma.failures.is_empty() {
        Check::pass("sign lemma grid", format!("{} cases, residual 0", lemma.cases))
    } else {
        Check::fail(
            "sign lemma grid",
            format!("{} of {} cases, first {:?}", lemma.failures.len(), lemma.cases, lemma.failures[0]),
        )
    });
    let delta = delta_grid(4, 4);
    s.check(if delta.failures.is_empty() {
        Check::pass("delta chain closed form", format!("{} cases", delta.cases))
    } else {
        Check::fail(
            "delta chain closed form",
            format!("{} of {} cases, first {:?}", delta.failures.len(), delta.cases, delta.failures[0]),
        )
    });
    s
}

fn axioms_section(be: &Backend, opts: &RunOptions) -> Result<Section> {
    let mut s = Section::new("axioms");
    let caps = Caps { max_k: opts.max_k, max_l: opts.max_l, energy: opts.energy };
    for rep in check_axioms(be, &caps)? {
        let name = rep.axiom.to_string();
        s.check(if rep.passed() {
            Check::pass(name, format!("{} cells", rep.checked))
        } else {
            Check::fail(name, witness_list(&rep.violations))
        });
    }
    Ok(s)
}

fn equations_section(be: &Backend, pair: &BoundingPair, eqs: &[EquationId], opts: &RunOptions) -> Result<Section> {
    let deformed = !pair.is_zero();
    let mut s = Section::new(if deformed { "structure equations (deformed)" } else { "structure equations" });
    s.line(format!(
        "basis inputs with k <= {}, l <= {}, below energy {}{}",
        opts.max_k,
        opts.max_l,
        fmt_energy(&opts.energy),
        if opts.exclude_degenerate { ", degenerate terms excluded" } else { "" }
    ));
    let caps = SuiteCaps {
        max_k: opts.max_k,
        max_l: opts.max_l,
        max_m: None,
        energy: opts.energy,
        exclude_degenerate: opts.exclude_degenerate,
    };
    for &eq in eqs {
        let rep = suite(eq, be, deformed.then_some(pair), &caps)?;
        for n in &rep.notes {
            s.line(format!("{eq}: {n}"));
        }
        s.check(suite_check(&rep));
    }
    Ok(s)
}

fn theorem_sections(be: &Backend, pair: BoundingPair, energy: Energy, r: &mut Report) -> Result<()> {
    match Floer::new(be, pair, energy) {
        Ok(fl) => {
            for id in TheoremId::ALL {
                r.push(verify_theorem(id, &fl)?);
            }
        }
        Err(Error::Precondition(w)) => {
            let mut s = Section::new("theorems");
            s.check(Check::fail("bounding pair", w));
            r.push(s);
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Runs the selected suites on a backend.
pub fn cmd_verify(path: Option<&str>, suite_id: SuiteId, opts: &RunOptions) -> Result<Report> {
    let mut r = Report::new(format!("verify {} suite={}", path.unwrap_or("-"), suite_name(suite_id)));
    if suite_id == SuiteId::Signs {
        r.push(signs_section());
        return Ok(r);
    }
    let path = path.ok_or_else(|| Error::Usage("this suite needs a backend".into()))?;
    let file = load_backend(path)?;
    let be = file.build()?;
    let pair = pair_for(&file, &be, opts)?;
    let v = validation_section(&file, &be, opts.energy)?;
    let valid = v.checks.iter().all(|c| c.status == crate::report::Status::Pass);
    r.push(v);
    if !valid {
        return Ok(r);
    }
    match suite_id {
        SuiteId::Signs => unreachable!("handled above"),
        SuiteId::Axioms => r.push(axioms_section(&be, opts)?),
        SuiteId::Equation(eq) => r.push(equations_section(&be, &pair, &[eq], opts)?),
        SuiteId::Theorems => theorem_sections(&be, pair, opts.energy, &mut r)?,
        SuiteId::All => {
            r.push(signs_section());
            r.push(axioms_section(&be, opts)?);
            r.push(equations_section(&be, &pair, &EquationId::ALL, opts)?);
            theorem_sections(&be, pair, opts.energy, &mut r)?;
        }
    }
    Ok(r)
}

fn suite_name(s: SuiteId) -> String {
    match s {
        SuiteId::All => "all".into(),
        SuiteId::Axioms => "axioms".into(),
        SuiteId::Equation(e) => e.to_string(),
        SuiteId::Theorems => "theorems".into(),
        SuiteId::Signs => "signs".into(),
    }
}

/// Which cohomology to tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Hf,
    Qh,
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HF" => Ok(Which::Hf),
            "QH" => Ok(Which::Qh),
            _ => Err(Error::Usage(format!("--which takes HF or QH, got `{s}`"))),
        }
    }
}

/// Ranks, generators and product tables of HF or QH.
pub fn cmd_cohomology(path: &str, which: Which, opts: &RunOptions) -> Result<Report> {
    let file = load_backend(path)?;
    let be = file.build()?;
    let pair = pair_for(&file, &be, opts)?;
    let mut r = Report::new(format!("cohomology {path} {}", if which == Which::Hf { "HF" } else { "QH" }));
    let v = validation_section(&file, &be, opts.energy)?;
    let valid = v.checks.iter().all(|c| c.status == crate::report::Status::Pass);
    r.push(v);
    if !valid {
        return Ok(r);
    }
    let fl = Floer::new(&be, pair, opts.energy)?;
    r.push(cohomology_section(&fl, which == Which::Hf)?);
    Ok(r)
}

/// Replays a worked example; only `clifford` exists.
pub fn cmd_example(name: &str, energy: Energy, backend: Option<&str>) -> Result<Report> {
    if name != "clifford" {
        return Err(Error::Usage(format!("unknown example `{name}`; the only example is `clifford`")));
    }
    let file = match backend {
        Some(p) => load_backend(p)?,
        None => bundled("clifford")?,
    };
    let be = file.build()?;
    let pair = file.pair(&be, energy)?;
    clifford_example_with(&be, pair, energy)
}

fn chi_row(cfg: &NodalConfig) -> Result<Vec<String>> {
    let mut cells = vec![];
    if cfg.l() >= 2 {
        cells.push(format!("chi_0 = {}", cfg.chi(0)?));
    }
    if cfg.l() >= 1 {
        for m in 1..=cfg.k() {
            cells.push(format!("chi_{m} = {}", cfg.chi(m)?));
            cells.push(format!("theta_hat_{m} = {}", cfg.theta_hat(m)?));
            cells.push(format!("theta_{m} = {:.12}", cfg.theta(m)? + 0.0));
            if cfg.l() >= 2 {
                cells.push(format!("geodesic_{m} = {}", cfg.predicate_geodesic4(m)?));
            }
        }
    }
    if cfg.components.len() == 1 && cfg.l() >= 2 {
        cells.push(format!("horocycle = {}", cfg.predicate_horocycle()?));
    }
    Ok(cells)
}

/// Cross-ratio tables for a configuration file, or for `samples` random
/// single-disk configurations with `k+1` boundary and two interior marks.
pub fn cmd_crossratio(config: Option<&str>, samples: usize, k: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("cross-ratio tables");
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read `{path}`: {e}")))?;
        let cfg = NodalConfig::from_json(&text)?;
        let mut s = Section::new(format!("configuration {path}"));
        s.line(format!("{} components, k = {}, l = {}", cfg.components.len(), cfg.k(), cfg.l()));
        for c in chi_row(&cfg)? {
            s.line(c);
        }
        r.push(s);
        return Ok(r);
    }
    if k == 0 {
        return Err(Error::Usage("--k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Section::new(format!("{samples} random single-disk configurations, k = {k}, l = 2, seed {seed}"));
    let mut formula_err: f64 = 0.0;
    let mut chart_err: f64 = 0.0;
    for i in 0..samples {
        let cfg = NodalConfig::random_single_disk(&mut rng, k, 2);
        s.line(format!("#{i}: {}", chi_row(&cfg)?.join(", ")));
        let z = |j: usize| cfg.boundary_marks[j].at.finite().map(|z| z.re).unwrap_or(f64::INFINITY);
        let w1 = cfg.interior_marks[0].at.finite().unwrap_or(C::new(0.0, 1.0));
        for m in 1..=k {
            let chi = cfg.chi(m)?;
            let phi = (w1 - z(0)) / (w1 - z(m)) * (z(0) - z(m)).signum();
            let expect = RiemannPoint::new(0.5, -phi.re / (2.0 * phi.im));
            formula_err = formula_err.max(chi.chordal(expect));
            let th = cfg.theta_hat(m)?;
            chart_err = chart_err.max(match th {
                ExtendedReal::Finite(_) => th.pi().chordal(chi),
                _ => 1.0,
            });
        }
    }
    let bound = |name: &str, err: f64| {
        if err < TOL {
            Check::pass(name, format!("max chordal error {err:.3e}"))
        } else {
            Check::fail(name, format!("max chordal error {err:.3e} exceeds {TOL:e}"))
        }
    };
    s.check(bound("chi_m = 1/2 - i x/(2y)", formula_err));
    s.check(bound("pi(theta_hat_m) = chi_m", chart_err));
    r.push(s);
    Ok(r)
}
