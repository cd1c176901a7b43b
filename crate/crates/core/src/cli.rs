//! Command-line surface. `run` parses argv and returns the exit code with
//! the text the binary should print, so the whole CLI is testable in-process.
//!
//! Exit codes: 0 success or certified, 1 usage or parse error, 2 refuted,
//! 3 unresolved at the working precision.

use crate::arith::{GammaElement, PadicInt, Prime, DEFAULT_DIGITS};
use crate::commutant::{
    check_commute, default_samples, solvable_digits, solve_commutant, CommuteVerdict,
};
use crate::error::{Error, Result};
use crate::mahler::{
    depth_samples, mahler_coeffs, orbit_fn, orbit_profile, sh_test_mahler, sup_val, w_test_mahler,
    ContinuousFn, FnKind, MahlerExpansion,
};
use crate::phigamma::{
    fixed_point_series, gauge_module, inverse_sh_profile, matrix_sh_profile, minimal_r,
    validate_module, vector_sh_profile, MatrixSeries, ModuleJson, PhiGammaModule,
};
use crate::puiseux::{parse_text, PuiseuxSeries, SeriesJson};
use crate::suites::{find_suite, run_suite, SUITES};
use crate::tate_colmez::{
    colmez_decompose, decomplete, psi_tower_sh_test, sh_level_classify, tate_trace, PsiTower,
    TowerJson, DEFAULT_TOWER_DEPTH,
};
use crate::valuation::{format_q, format_val, Verdict, Q};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "superholder",
    version,
    about = "Exact Puiseux-series computations over F_p"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunConfig {
    /// Prime p; required for text-format series.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Truncation precision as a rational, e.g. `12` or `9/2`.
    #[arg(long, global = true)]
    pub prec: Option<String>,
    /// Level: t for Mahler tables, n for traces.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Depth k of the subgroup 1 + p^k Z_p.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Input file; `-` or absent reads stdin.
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, visible_alias = "name", global = true)]
    pub suite: Option<String>,
    #[arg(long, global = true)]
    pub i_max: Option<u32>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub digits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a series and print its canonical form.
    Series,
    /// Mahler coefficients of a table, or of the orbit function of a series.
    Mahler {
        /// Test val(m_n) >= p^lambda p^i + mu.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        mu: f64,
        /// Use the stronger bound p^lambda n + mu.
        #[arg(long)]
        strong: bool,
    },
    /// Orbit valuation profile and the fitted level.
    Profile,
    /// Tate traces and the Colmez decomposition.
    Trace,
    /// Minimal level of a series, with the orbit classifier's estimate.
    Decomplete,
    #[command(subcommand)]
    Commutant(CommutantCmd),
    #[command(subcommand)]
    Phigamma(PhigammaCmd),
    #[command(subcommand, name = "psi-tower")]
    PsiTower(TowerCmd),
    /// Run a named property suite.
    Suite {
        /// List the registered suites.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum CommutantCmd {
    /// Solve u = γ_b(X^(p^n)) for b and n.
    Solve,
    /// Compare u∘γ_a with γ_a∘u on sample units.
    Check,
}

#[derive(Debug, Subcommand)]
pub enum PhigammaCmd {
    /// Build the module of a gauge matrix U and tabulate its cocycle.
    Gauge,
    /// Check the cocycle law and φ-commutation.
    Validate,
    /// Valuation profile of the cocycle.
    Profile {
        /// Profile the inverse cocycle instead.
        #[arg(long)]
        inverse: bool,
    },
    /// Partial sums of the series for H_g.
    FixedPoint {
        /// Coordinate a of g = 1 + p^k a.
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Profile of a vector x under the Γ-action.
    Vector {
        /// JSON array of series.
        #[arg(long)]
        x: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum TowerCmd {
    /// The tower (m, φ(m), φ²(m), ...) of a series.
    Embed {
        #[arg(long, default_value_t = DEFAULT_TOWER_DEPTH)]
        depth: usize,
    },
    /// Test whether a tower comes from E+.
    Test,
}

/// What the binary should print and the status it should exit with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A report plus the exit code its verdict maps to.
struct Report {
    code: i32,
    body: Value,
}

impl Report {
    fn ok(body: Value) -> Report {
        Report { code: 0, body }
    }
}

pub fn run<I, S>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliOutput {
                        code: 0,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => CliOutput {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let cfg = &cli.config;
    let report = match dispatch(&cli.command, cfg) {
        Ok(r) => r,
        Err(e) => error_report(e),
    };
    let stdout = match cfg.format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string(&report.body).expect("values serialize")
        ),
        Format::Text => render_text(&report.body),
    };
    let stderr = if report.code == 1 {
        report
            .body
            .get("error")
            .and_then(Value::as_str)
            .map(|s| format!("error: {s}\n"))
            .unwrap_or_default()
    } else {
        String::new()
    };
    if report.code == 1 {
        return CliOutput {
            code: 1,
            stdout: String::new(),
            stderr,
        };
    }
    match &cfg.out {
        Some(path) => match std::fs::write(path, &stdout) {
            Ok(()) => CliOutput {
                code: report.code,
                stdout: String::new(),
                stderr,
            },
            Err(e) => CliOutput {
                code: 1,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => CliOutput {
            code: report.code,
            stdout,
            stderr,
        },
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotCommutant(_) | Error::NotPsiCompatible { .. } => 2,
        Error::InsufficientPrecision { .. } | Error::TooFewPoints => 3,
        _ => 1,
    }
}

fn error_report(e: Error) -> Report {
    let code = exit_code(&e);
    let status = match code {
        2 => "refuted",
        3 => "unresolved",
        _ => "error",
    };
    Report {
        code,
        body: json!({ "status": status, "error": e.to_string() }),
    }
}

fn verdict_report<W>(v: &Verdict<W>, witness: impl FnOnce(&W) -> Value, mut body: Value) -> Report {
    body["verdict"] = json!(v.label());
    match v {
        Verdict::Refuted(w) => body["witness"] = witness(w),
        Verdict::Unresolved(why) => body["reason"] = json!(why),
        Verdict::Certified => {}
    }
    Report {
        code: v.exit_code(),
        body,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::PreconditionViolation(msg.into())
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        Command::Series => {
            let f = read_series(cfg)?;
            Ok(Report::ok(series_value(&f)))
        }
        Command::Mahler { lambda, mu, strong } => cmd_mahler(cfg, *lambda, *mu, *strong),
        Command::Profile => {
            let f = read_series(cfg)?;
            let k = need_k(cfg, f.prime())?;
            let i_max = cfg.i_max.unwrap_or(3);
            let profile = orbit_profile(&f, k, i_max)?;
            let est = sh_level_classify(&f, k, i_max)?;
            Ok(Report::ok(json!({
                "k": k,
                "profile": profile,
                "n_hat": est.n,
                "raw": finite_or_string(est.raw),
            })))
        }
        Command::Trace => {
            let f = read_series(cfg)?;
            let decomposition = colmez_decompose(&f)?;
            let levels: Vec<u32> = match cfg.level {
                Some(n) => vec![n],
                None => (0..=f.level()).collect(),
            };
            let traces = levels
                .iter()
                .map(|&n| Ok(json!({ "n": n, "trace": series_value(&tate_trace(&f, n)?) })))
                .collect::<Result<Vec<_>>>()?;
            Ok(Report::ok(json!({
                "traces": traces,
                "inf_val": format_val(&decomposition.inf_val()),
                "decomposition": decomposition.to_json(),
            })))
        }
        Command::Decomplete => {
            let f = read_series(cfg)?;
            let k = need_k(cfg, f.prime())?;
            let d = decomplete(&f, k, cfg.i_max.unwrap_or(3))?;
            let mut body = serde_json::to_value(&d).expect("plain data");
            body["consistent"] = json!(d.consistent());
            Ok(Report::ok(body))
        }
        Command::Commutant(c) => {
            let u = read_series(cfg)?;
            match c {
                CommutantCmd::Solve => {
                    let digits = cfg.digits.unwrap_or_else(|| solvable_digits(&u));
                    Ok(Report::ok(solve_commutant(&u, digits)?.to_json()))
                }
                CommutantCmd::Check => {
                    let digits = cfg.digits.unwrap_or(DEFAULT_DIGITS);
                    let samples = default_samples(u.prime(), digits);
                    Ok(match check_commute(&u, &samples)? {
                        CommuteVerdict::ConsistentToPrec { verified_to } => Report::ok(json!({
                            "verdict": "consistent",
                            "verified_to": format_q(verified_to),
                        })),
                        CommuteVerdict::Refuted { a, exponent } => Report {
                            code: 2,
                            body: json!({
                                "verdict": "refuted",
                                "witness": { "a_digits": a.digits(), "exponent": format_q(exponent) },
                            }),
                        },
                    })
                }
            }
        }
        Command::Phigamma(c) => cmd_phigamma(cfg, c),
        Command::PsiTower(c) => cmd_tower(cfg, c),
        Command::Suite { list } => {
            if *list {
                let names: Vec<Value> = SUITES
                    .iter()
                    .map(|s| json!({ "name": s.name, "alias": s.alias, "description": s.description }))
                    .collect();
                return Ok(Report::ok(Value::Array(names)));
            }
            let name = cfg
                .suite
                .as_deref()
                .ok_or_else(|| usage("suite needs --name"))?;
            let info = find_suite(name).ok_or_else(|| usage(format!("unknown suite {name:?}")))?;
            let primes = cfg.p.map(|p| vec![p]);
            let report = run_suite(info.name, primes.as_deref(), cfg.seed)?;
            let mut body = serde_json::to_value(&report).expect("plain data");
            body["passed"] = json!(report.passed());
            Ok(Report {
                code: if report.passed() { 0 } else { 2 },
                body,
            })
        }
    }
}

fn cmd_mahler(cfg: &RunConfig, lambda: Option<f64>, mu: f64, strong: bool) -> Result<Report> {
    let text = read_input(cfg.input.as_deref())?;
    let (f, orbit_floors) = if looks_like_table(&text) {
        (parse_table(&text)?, None)
    } else {
        let m = parse_series(&text, cfg)?;
        let k = need_k(cfg, m.prime())?;
        let t = cfg
            .level
            .ok_or_else(|| usage("an orbit function needs --level t"))?;
        let o = orbit_fn(&m, k, t)?;
        (o.function, Some(o.floors))
    };
    let n_max = match cfg.n_max {
        Some(n) => n,
        None => {
            (f.prime()
                .checked_pow(f.level())
                .ok_or_else(|| usage("p^t overflows"))?
                - 1) as usize
        }
    };
    let e = mahler_coeffs(&f, n_max)?;
    let mut body = expansion_value(&e);
    if let Some(floors) = orbit_floors {
        body["orbit_floors"] = floors_value(&floors);
    }
    let Some(lambda) = lambda else {
        return Ok(Report::ok(body));
    };
    body["lambda"] = json!(lambda);
    body["mu"] = json!(mu);
    Ok(if strong {
        verdict_report(&w_test_mahler(&e, lambda, mu), |n| json!({ "n": n }), body)
    } else {
        verdict_report(&sh_test_mahler(&e, lambda, mu), |w| json!(w), body)
    })
}

fn cmd_phigamma(cfg: &RunConfig, c: &PhigammaCmd) -> Result<Report> {
    let text = read_input(cfg.input.as_deref())?;
    let i_max = cfg.i_max.unwrap_or(3);
    let m = read_module(&text, cfg)?;
    match c {
        PhigammaCmd::Gauge => {
            let samples = module_samples(&m, i_max)?;
            let j = m.to_json(&samples)?;
            Ok(Report::ok(serde_json::to_value(j).expect("plain data")))
        }
        PhigammaCmd::Validate => {
            let samples = match m.sample_elements() {
                s if s.is_empty() => module_samples(&m, 1)?,
                s => s,
            };
            let r = validate_module(&m, &samples)?;
            Ok(Report {
                code: if r.passes() { 0 } else { 2 },
                body: r.to_json(),
            })
        }
        PhigammaCmd::Profile { inverse } => {
            let profile = if *inverse {
                inverse_sh_profile(&m, i_max)?
            } else {
                matrix_sh_profile(&m, i_max)?
            };
            Ok(Report::ok(json!({ "k": m.depth(), "profile": profile })))
        }
        PhigammaCmd::FixedPoint { a, r } => {
            let g = m.element(*a)?;
            let rep = fixed_point_series(&m, &g, *r, i_max)?;
            let residual = rep.residual()?;
            let code = if residual.is_censored() { 0 } else { 2 };
            Ok(Report {
                code,
                body: json!({
                    "r": rep.r,
                    "r_min": minimal_r(&m)?,
                    "residual": format_val(&residual),
                    "term_vals": rep.term_vals.iter().map(format_val).collect::<Vec<_>>(),
                    "tail_vals": rep.tail_vals.iter().map(format_val).collect::<Vec<_>>(),
                    "sum": rep.sum.to_json(),
                }),
            })
        }
        PhigammaCmd::Vector { x } => {
            let xs = read_vector(x, cfg)?;
            let vp = vector_sh_profile(&m, &xs, i_max)?;
            let mut body = json!({
                "level": vp.level,
                "floors": floors_value(&vp.floors),
            });
            match &vp.estimate {
                Some(est) => {
                    body["n_hat"] = json!(est.n);
                    body["profile"] = json!(est.profile);
                    Ok(Report::ok(body))
                }
                None => {
                    body["status"] = json!("unresolved");
                    Ok(Report { code: 3, body })
                }
            }
        }
    }
}

fn cmd_tower(cfg: &RunConfig, c: &TowerCmd) -> Result<Report> {
    match c {
        TowerCmd::Embed { depth } => {
            let f = read_series(cfg)?;
            let t = PsiTower::embed(&f, *depth)?;
            Ok(Report::ok(
                serde_json::to_value(t.to_json()).expect("plain data"),
            ))
        }
        TowerCmd::Test => {
            let text = read_input(cfg.input.as_deref())?;
            let j: TowerJson = from_json_str(&text)?;
            let t = PsiTower::from_json(j)?;
            let k = need_k(cfg, t.prime())?;
            let v = psi_tower_sh_test(&t, k)?;
            Ok(verdict_report(
                &v,
                |j| json!({ "index": j }),
                json!({ "depth": t.depth() }),
            ))
        }
    }
}

/// Samples for a tabulated module: the profile depths plus the defaults.
fn module_samples(m: &PhiGammaModule, i_max: u32) -> Result<Vec<GammaElement>> {
    let p = m.prime();
    let mut out: Vec<GammaElement> = Vec::new();
    for a in default_samples(p, m.digits()) {
        let a = PadicInt::from_digits(p, a.digits().to_vec())?;
        let g = GammaElement::new(m.depth(), a)?;
        if !out.contains(&g) {
            out.push(g);
        }
    }
    for i in 0..=i_max {
        for g in depth_samples(p, m.depth(), i, m.digits())? {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

fn need_k(cfg: &RunConfig, p: Prime) -> Result<u32> {
    let k = cfg.k.unwrap_or(if p.as_u64() == 2 { 2 } else { 1 });
    GammaElement::identity(p, k, 1)?;
    Ok(k)
}

fn read_input(path: Option<&Path>) -> Result<String> {
    use std::io::Read;
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
            .map_err(|e| usage(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn from_json_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse {
        offset: crate::puiseux::json_offset(s, &e),
        message: e.to_string(),
    })
}

pub fn parse_prec(s: &str) -> Result<Q> {
    let q: Q = s
        .trim()
        .parse()
        .map_err(|_| usage(format!("--prec {s:?} is not a rational number")))?;
    if q <= Q::from_integer(0) {
        return Err(usage("--prec must be positive"));
    }
    Ok(q)
}

fn check_prime(cfg: &RunConfig, p: Prime) -> Result<()> {
    match cfg.p {
        Some(q) if q != p.as_u64() => {
            Err(usage(format!("--p {q} disagrees with the input's p = {p}")))
        }
        _ => Ok(()),
    }
}

/// JSON when the text starts with `{`, else the text grammar with `--p`
/// and `--prec`.
pub fn parse_series(text: &str, cfg: &RunConfig) -> Result<PuiseuxSeries> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let offset = text.len() - trimmed.len();
        let f = PuiseuxSeries::from_json(trimmed).map_err(|e| shift_offset(e, offset))?;
        check_prime(cfg, f.prime())?;
        return match &cfg.prec {
            Some(s) => {
                let prec = parse_prec(s)?;
                if prec > f.prec() {
                    return Err(Error::InsufficientPrecision {
                        needed: format_q(prec),
                        have: format_q(f.prec()),
                    });
                }
                f.truncate(prec)
            }
            None => Ok(f),
        };
    }
    let p = Prime::new(cfg.p.ok_or_else(|| usage("text input needs --p"))?)?;
    let prec = parse_prec(
        cfg.prec
            .as_deref()
            .ok_or_else(|| usage("text input needs --prec"))?,
    )?;
    parse_text(text.trim_end(), p, prec)
}

fn shift_offset(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { offset, message } => Error::Parse {
            offset: offset + by,
            message,
        },
        e => e,
    }
}

fn read_series(cfg: &RunConfig) -> Result<PuiseuxSeries> {
    parse_series(&read_input(cfg.input.as_deref())?, cfg)
}

fn read_vector(path: &Path, cfg: &RunConfig) -> Result<Vec<PuiseuxSeries>> {
    let text = read_input(Some(path))?;
    let js: Vec<SeriesJson> = from_json_str(&text)?;
    js.into_iter()
        .map(|j| {
            let f = PuiseuxSeries::try_from(j)?;
            check_prime(cfg, f.prime())?;
            Ok(f)
        })
        .collect()
}

#[derive(Deserialize)]
struct GaugeInput {
    k: u32,
    #[serde(rename = "U")]
    u: Vec<Vec<SeriesJson>>,
}

/// A module given either as `{"k", "U"}` (gauge) or as a tabulated module.
fn read_module(text: &str, cfg: &RunConfig) -> Result<PhiGammaModule> {
    let v: Value = from_json_str(text)?;
    let m = if v.get("U").is_some() {
        let g: GaugeInput = from_json_str(text)?;
        let k = cfg.k.unwrap_or(g.k);
        gauge_module(&MatrixSeries::from_json(g.u)?, k)?
    } else {
        let j: ModuleJson = from_json_str(text)?;
        PhiGammaModule::from_json(j)?
    };
    check_prime(cfg, m.prime())?;
    Ok(m)
}

#[derive(Deserialize)]
struct TableInput {
    p: u64,
    t: u32,
    #[serde(default)]
    kind: Option<String>,
    values: Vec<SeriesJson>,
}

fn looks_like_table(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .map(|v| v.get("values").is_some())
        .unwrap_or(false)
}

/// `{"p", "t", "kind": "locally_constant" | "samples", "values": [series]}`.
fn parse_table(text: &str) -> Result<ContinuousFn> {
    let j: TableInput = from_json_str(text)?;
    let p = Prime::new(j.p)?;
    let kind = match j.kind.as_deref() {
        None | Some("locally_constant") => FnKind::LocallyConstant,
        Some("samples") => FnKind::Samples,
        Some(other) => return Err(usage(format!("unknown function kind {other:?}"))),
    };
    let values = j
        .values
        .into_iter()
        .map(PuiseuxSeries::try_from)
        .collect::<Result<Vec<_>>>()?;
    ContinuousFn::new(p, j.t, kind, values)
}

fn series_value(f: &PuiseuxSeries) -> Value {
    serde_json::to_value(SeriesJson::from(f)).expect("plain data")
}

fn expansion_value(e: &MahlerExpansion) -> Value {
    json!({
        "p": e.prime().as_u64(),
        "n_max": e.n_max(),
        "sup_val": format_val(&sup_val(e)),
        "coeffs": e.coeffs().iter().map(series_value).collect::<Vec<_>>(),
    })
}

fn floors_value(floors: &std::collections::BTreeMap<u32, crate::valuation::Val<Q>>) -> Value {
    let mut m = serde_json::Map::new();
    for (i, v) in floors {
        m.insert(i.to_string(), json!(v));
    }
    Value::Object(m)
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// One `key: value` line per field; series print in the text grammar.
fn render_text(v: &Value) -> String {
    fn scalar(v: &Value) -> String {
        if let Ok(j) = serde_json::from_value::<SeriesJson>(v.clone()) {
            if let Ok(f) = PuiseuxSeries::try_from(j) {
                return f.to_string();
            }
        }
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    match v {
        Value::Object(m) if m.get("terms").is_none() => m
            .iter()
            .map(|(k, v)| format!("{k}: {}\n", scalar(v)))
            .collect(),
        Value::Array(items) => items.iter().map(|v| format!("{}\n", scalar(v))).collect(),
        other => format!("{}\n", scalar(other)),
    }
}
