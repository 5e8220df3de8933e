//! Command-line frontend: expression parsing, suite runners, report emission.

pub mod expr;

pub use expr::{parse, parse_element, parse_scalar, Expr, ParseError};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::fdbundle::{christensen_suite, random_data_suite, DatumSpec};
use crate::metrics::{ball_total_boundedness, mk_distance, Budget, MetricError, SphereSpan};
use crate::ncalg::{check_local_confluence, AlgError, Presentation};
use crate::repnorms::{self, RepError, SeminormKind, SeminormValue, Seminorms, TruncatedRep};
use crate::report::Check;
use crate::sphere::{sphere_presentation, Sphere};
use crate::suites::{self, Exact};

#[derive(Parser, Debug)]
#[command(name = "qcb", version, about = "Exact and numeric checks for quantum circle bundles over q-spheres")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Rank: the sphere O(S_q^{2r+1}) has r + 1 generators.
    #[arg(long, global = true, env = "QCB_R", default_value_t = 1)]
    pub r: usize,
    /// Numeric deformation parameter, 0 < q < 1.
    #[arg(long, global = true, env = "QCB_Q", default_value_t = 0.5)]
    pub q: f64,
    /// Largest |circle degree| for frames and graded suites.
    #[arg(long = "max-degree", global = true, env = "QCB_MAX_DEGREE", default_value_t = 2)]
    pub max_degree: i32,
    /// Truncation size per shift factor (default: 40, 12, 8 for r = 1, 2, ≥ 3).
    #[arg(long, global = true, env = "QCB_CUTOFF")]
    pub cutoff: Option<usize>,
    /// Seed; required by randomized suites.
    #[arg(long, global = true, env = "QCB_SEED")]
    pub seed: Option<u64>,
    /// Tolerance override for numeric checks.
    #[arg(long, global = true, env = "QCB_TOL")]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "QCB_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "QCB_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run identity suites and report each identity with its status.
    Verify(VerifyArgs),
    /// List and verify the frames of the sphere up to --max-degree.
    Frames,
    /// Tabulate L_ver, L_hor and L_tot of element expressions.
    Seminorm(SeminormArgs),
    /// Lower-bound the Monge–Kantorovich distance between two vector states.
    Metric(MetricArgs),
    /// Build and validate the truncated representation.
    Rep(RepArgs),
    /// Check local confluence of the sphere relations (or a presentation file).
    Confluence(ConfluenceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    SphereIdentities,
    FrameVanishing,
    Hopf,
    TwistedDerivation,
    Fdbundle,
    Representation,
    Seminorms,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suites to run; repeat the flag or give a comma-separated list.
    #[arg(long = "suite", value_enum, value_delimiter = ',', default_value = "all")]
    pub suites: Vec<Suite>,
    /// Random samples per randomized check.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Check these relations (presentation JSON) instead of the built-in ones.
    #[arg(long)]
    pub relations: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SeminormArgs {
    /// Element expressions, e.g. "z1 z2' - q^-1 z2' z1".
    #[arg(required = true)]
    pub exprs: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Ver,
    Tot,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    /// Span of words with at most this many unstarred and starred letters.
    #[arg(long = "span-degree", default_value_t = 1)]
    pub span_degree: usize,
    /// Two vector states: `vac` or `shiftM`.
    #[arg(long, value_delimiter = ',', default_value = "vac,shift1")]
    pub states: Vec<String>,
    #[arg(long, value_enum, default_value_t = Kind::Tot)]
    pub seminorm: Kind,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    /// Starts; without --seed only the deterministic start is used.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Also run the ε-net diagnostic of the unit ball at this ε.
    #[arg(long = "net-eps")]
    pub net_eps: Option<f64>,
    #[arg(long = "net-samples", default_value_t = 200)]
    pub net_samples: usize,
}

#[derive(Args, Debug)]
pub struct RepArgs {
    /// Number of random C*-identity samples (needs --seed).
    #[arg(long = "cstar-samples", default_value_t = 0)]
    pub cstar_samples: usize,
}

#[derive(Args, Debug)]
pub struct ConfluenceArgs {
    /// Overlap length bound for critical pairs.
    #[arg(long, default_value_t = 6)]
    pub bound: usize,
    /// Presentation JSON to check instead of the sphere relations.
    #[arg(long)]
    pub presentation: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            _ => 2,
        }
    }
}

impl From<RepError> for CliError {
    fn from(e: RepError) -> Self {
        match e {
            RepError::AnsatzFailure { .. } => CliError::Math(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Rep(r) => r.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AlgError> for CliError {
    fn from(e: AlgError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// A finished run: the rendered report and whether everything passed.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

pub fn default_cutoff(r: usize) -> usize {
    match r {
        1 => 40,
        2 => 12,
        _ => 8,
    }
}

impl Global {
    pub fn cutoff(&self) -> usize {
        self.cutoff.unwrap_or_else(|| default_cutoff(self.r))
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.r == 0 {
            return Err(CliError::Usage("--r must be at least 1".into()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(CliError::Usage(format!("--q must lie in (0, 1), got {}", self.q)));
        }
        if self.max_degree < 0 {
            return Err(CliError::Usage("--max-degree must be non-negative".into()));
        }
        if self.cutoff.is_some_and(|c| c < 4) {
            return Err(CliError::Usage("--cutoff must be at least 4".into()));
        }
        if self.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        Ok(())
    }

    fn config(&self) -> Value {
        json!({
            "r": self.r,
            "q": self.q,
            "max_degree": self.max_degree,
            "cutoff": self.cutoff(),
            "seed": self.seed,
            "tol": self.tol,
        })
    }

    fn seed_for(&self, what: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage(format!("{what} is randomized: pass --seed or set QCB_SEED")))
    }
}

fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report is serializable") + "\n"
}

fn checks_outcome(g: &Global, command: &str, checks: Vec<Check>) -> Outcome {
    let passed = checks.iter().all(|c| c.passed);
    Outcome { text: render(&json!({ "command": command, "config": g.config(), "passed": passed, "checks": checks })), passed }
}

fn apply_tol(checks: &mut [Check], tol: Option<f64>) {
    let Some(tol) = tol else { return };
    for c in checks {
        if let Some(v) = c.value {
            c.passed = v <= tol && v.is_finite();
            c.tol = Some(tol);
            if c.passed {
                c.counterexample = None;
            } else if c.counterexample.is_none() {
                c.counterexample = Some(format!("{v:e} > {tol:e}"));
            }
        }
    }
}

fn relations_file_check(path: &PathBuf, bound: usize) -> Result<Check, CliError> {
    let pres = Presentation::from_json(&std::fs::read_to_string(path)?)?;
    let rep = check_local_confluence(&pres, bound)?;
    let fail = rep.unresolved.first().map(|p| {
        let word: Vec<&str> = p.word.iter().map(|&l| pres.letters[l as usize].as_str()).collect();
        format!("overlap `{}` (rules {} and {}) resolves to different normal forms; difference {}", word.join(" "), p.rules.0, p.rules.1, p.difference)
    });
    Ok(Check::new("relations-confluence", &format!("all critical pairs of {} resolve", pres.name), 0, None, rep.pairs_checked, fail))
}

pub fn verify(g: &Global, a: &VerifyArgs) -> Result<Outcome, CliError> {
    if let Some(path) = &a.relations {
        return Ok(checks_outcome(g, "verify", vec![relations_file_check(path, 6)?]));
    }
    let mut suites: Vec<Suite> = Vec::new();
    for &s in &a.suites {
        if s == Suite::All {
            suites.extend([
                Suite::SphereIdentities,
                Suite::FrameVanishing,
                Suite::Hopf,
                Suite::TwistedDerivation,
                Suite::Fdbundle,
                Suite::Representation,
                Suite::Seminorms,
            ]);
        } else if !suites.contains(&s) {
            suites.push(s);
        }
    }
    suites.dedup();
    let randomized = suites.iter().any(|&s| s != Suite::FrameVanishing);
    let seed = if randomized { g.seed_for("the selected suite")? } else { g.seed.unwrap_or(0) };
    let (r, n, max_n) = (g.r, a.samples, g.max_degree);
    let exact = suites
        .iter()
        .any(|s| matches!(s, Suite::SphereIdentities | Suite::FrameVanishing | Suite::Hopf | Suite::TwistedDerivation))
        .then(|| Exact::new(r));
    let ex = || exact.as_ref().expect("exact context built");
    let mut checks = Vec::new();
    for s in suites {
        match s {
            Suite::All => unreachable!(),
            Suite::SphereIdentities => checks.extend([
                suites::sphere_confluence(r, 6),
                suites::normal_form_agreement(ex(), 5 * n, seed),
                suites::associativity_and_star(ex(), n, seed),
                suites::frames(ex(), max_n + 1),
                suites::canonical_map(ex(), n, max_n, seed),
            ]),
            Suite::FrameVanishing => checks.push(suites::frame_vanishing(ex(), max_n)),
            Suite::Hopf => checks.extend([
                suites::hopf_axioms(ex(), n, seed),
                suites::action_examples(ex()),
                suites::generator_vanishing(ex()),
                suites::k_eigenvalue(ex(), 3),
            ]),
            Suite::TwistedDerivation => checks.extend([
                suites::twisted_leibniz(ex(), n, seed),
                suites::delta_leibniz(ex(), n, seed),
                suites::dolbeault_squares(ex(), n, seed),
            ]),
            Suite::Fdbundle => {
                checks.extend(random_data_suite(n.min(20), seed, 5, &DatumSpec::default()));
                checks.push(christensen_suite(n, 8, seed, 0.02));
            }
            Suite::Representation => match TruncatedRep::new(r, g.q, g.cutoff()) {
                Ok(rep) => {
                    checks.push(repnorms::relations_check(&rep));
                    checks.push(repnorms::cstar_suite(&rep, &Sphere::new(r), n, seed)?);
                }
                Err(e @ RepError::AnsatzFailure { .. }) => {
                    checks.push(Check::new("rep-relations", "π respects every sphere relation", r, None, 0, Some(e.to_string())));
                }
                Err(e) => return Err(e.into()),
            },
            Suite::Seminorms => {
                let sn = Seminorms::new(r, g.q, g.cutoff())?;
                checks.extend(repnorms::vertical_suite(&sn, n, seed)?);
                checks.push(repnorms::contraction_suite(&sn, n, seed)?);
                if r == 1 {
                    checks.extend(repnorms::horizontal_suite(&sn, n, 16, seed)?);
                }
            }
        }
    }
    apply_tol(&mut checks, g.tol);
    Ok(checks_outcome(g, "verify", checks))
}

pub fn frames(g: &Global) -> Result<Outcome, CliError> {
    let s = Sphere::new(g.r);
    let mut rows = Vec::new();
    let mut passed = true;
    for n in -g.max_degree..=g.max_degree {
        let f = s.frame_for_degree(n);
        let ok = s.verify_frame(&f);
        passed &= ok;
        rows.push(json!({
            "degree": n,
            "size": f.elements.len(),
            "identity": "Σ_j ζ_j ζ_j* = 1",
            "verified": ok,
            "elements": f.elements.iter().map(|e| s.display(e)).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome { text: render(&json!({ "command": "frames", "config": g.config(), "passed": passed, "frames": rows })), passed })
}

#[derive(Serialize)]
#[serde(untagged)]
enum Cell {
    Value(SeminormValue),
    Unsupported(&'static str),
}

impl Cell {
    fn csv(&self) -> [String; 2] {
        match self {
            Cell::Value(v) => [format!("{:.12e}", v.value), v.converged.to_string()],
            Cell::Unsupported(s) => [s.to_string(), String::new()],
        }
    }
}

pub fn seminorm(g: &Global, a: &SeminormArgs) -> Result<Outcome, CliError> {
    let sn = Seminorms::new(g.r, g.q, g.cutoff())?;
    let s = &sn.sphere;
    let mut rows = Vec::new();
    for text in &a.exprs {
        let x = parse_element(text, s.algebra())?;
        let degrees: Vec<i32> = s.decompose(&x).keys().cloned().collect();
        let l_ver = sn.seminorm_ver(&x)?;
        let (l_hor, l_tot) = if g.r == 1 {
            (Cell::Value(sn.seminorm_hor(&x)?), Cell::Value(sn.seminorm_tot(&x)?))
        } else {
            (Cell::Unsupported("UNSUPPORTED"), Cell::Unsupported("UNSUPPORTED"))
        };
        rows.push((text.clone(), s.display(&x), degrees, Cell::Value(l_ver), l_hor, l_tot));
    }
    let text = match g.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(e, nf, d, v, h, t)| json!({ "expr": e, "normal_form": nf, "degrees": d, "l_ver": v, "l_hor": h, "l_tot": t }))
                .collect();
            let note = "L_hor and L_tot use the horizontal surrogate built from d_1 and d_1†";
            render(&json!({ "command": "seminorm", "config": g.config(), "note": note, "rows": rows }))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["expr", "normal_form", "l_ver", "l_ver_converged", "l_hor", "l_hor_converged", "l_tot", "l_tot_converged"])
                .map_err(|e| CliError::Io(e.into()))?;
            for (e, nf, _, v, h, t) in &rows {
                let (v, h, t) = (v.csv(), h.csv(), t.csv());
                w.write_record([e.as_str(), nf.as_str(), &v[0], &v[1], &h[0], &h[1], &t[0], &t[1]]).map_err(|e| CliError::Io(e.into()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?).expect("utf-8")
        }
    };
    Ok(Outcome { text, passed: true })
}

pub fn metric(g: &Global, a: &MetricArgs) -> Result<Outcome, CliError> {
    if a.states.len() != 2 {
        return Err(CliError::Usage("--states takes exactly two states, e.g. vac,shift1".into()));
    }
    if g.r != 1 && a.seminorm == Kind::Tot {
        return Err(CliError::Usage("L_tot is available for r = 1 only; use --seminorm ver".into()));
    }
    let sn = Seminorms::new(g.r, g.q, g.cutoff())?;
    let kind = match a.seminorm {
        Kind::Ver => SeminormKind::Ver,
        Kind::Tot => SeminormKind::Tot,
    };
    let (span, l) = SphereSpan::with_kind(&sn, a.span_degree, kind)?;
    let (mu, nu) = (span.state(&a.states[0])?, span.state(&a.states[1])?);
    let restarts = if g.seed.is_some() { a.restarts.max(1) } else { 1 };
    let seed = g.seed.unwrap_or(0);
    let res = mk_distance(&mu, &nu, &l, Budget { iterations: a.iterations, restarts }, seed)?;
    let mut report = json!({
        "command": "metric",
        "config": g.config(),
        "seminorm": kind,
        "states": a.states,
        "labels": span.labels,
        "bound": res.bound,
        "infinite": res.infinite,
        "witness": res.witness,
        "witness_lipschitz": res.witness_lipschitz,
        "spread": res.spread,
        "iterations": res.iterations,
        "restarts": res.restarts,
        "seed": g.seed,
        "note": "certified lower bound; values for the quantum sphere are exploratory",
    });
    if let Some(eps) = a.net_eps {
        if !(eps > 0.0) {
            return Err(CliError::Usage("--net-eps must be positive".into()));
        }
        let net = ball_total_boundedness(&span, &l, eps, a.net_samples, seed);
        report["net"] = serde_json::to_value(net).expect("serializable");
    }
    Ok(Outcome { text: render(&report), passed: true })
}

pub fn rep(g: &Global, a: &RepArgs) -> Result<Outcome, CliError> {
    let rep = match TruncatedRep::new(g.r, g.q, g.cutoff()) {
        Ok(rep) => rep,
        Err(e @ RepError::AnsatzFailure { .. }) => {
            let text = render(&json!({ "command": "rep", "config": g.config(), "passed": false, "error": e.to_string() }));
            return Ok(Outcome { text, passed: false });
        }
        Err(e) => return Err(e.into()),
    };
    let tol = g.tol.unwrap_or(1e-10);
    let mut passed = rep.validation.max_residual <= tol && rep.validation.circle_action_exact;
    let families: Vec<Value> = rep
        .families
        .iter()
        .map(|f| json!({ "offset": f.offset, "rank": f.rank, "dim": f.dim, "interior": f.interior.len() }))
        .collect();
    let mut report = json!({
        "command": "rep",
        "config": g.config(),
        "depth": rep.depth(),
        "families": families,
        "validation": rep.validation,
        "tol": tol,
    });
    if a.cstar_samples > 0 {
        let seed = g.seed_for("--cstar-samples")?;
        let c = repnorms::cstar_suite(&rep, &Sphere::new(g.r), a.cstar_samples, seed)?;
        passed &= c.passed;
        report["cstar"] = serde_json::to_value(c).expect("serializable");
    }
    report["passed"] = json!(passed);
    Ok(Outcome { text: render(&report), passed })
}

pub fn confluence(g: &Global, a: &ConfluenceArgs) -> Result<Outcome, CliError> {
    let pres = match &a.presentation {
        Some(p) => Presentation::from_json(&std::fs::read_to_string(p)?)?,
        None => sphere_presentation(g.r),
    };
    let rep = check_local_confluence(&pres, a.bound)?;
    let passed = rep.unresolved.is_empty();
    let text = render(&json!({ "command": "confluence", "config": g.config(), "passed": passed, "report": rep }));
    Ok(Outcome { text, passed })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    g.validate()?;
    if g.format == Format::Csv && !matches!(cli.command, Command::Seminorm(_)) {
        return Err(CliError::Usage("--format csv is only available for seminorm tables".into()));
    }
    match &cli.command {
        Command::Verify(a) => verify(g, a),
        Command::Frames => frames(g),
        Command::Seminorm(a) => seminorm(g, a),
        Command::Metric(a) => metric(g, a),
        Command::Rep(a) => rep(g, a),
        Command::Confluence(a) => confluence(g, a),
    }
}

/// Parses arguments, runs, writes the report; returns the exit code
/// (0 pass, 1 mathematical failure, 2 usage or configuration error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.global.out {
        Some(p) => std::fs::write(p, &out.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if out.passed {
        0
    } else {
        1
    }
}
