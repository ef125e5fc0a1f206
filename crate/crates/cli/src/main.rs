//! `moment`: runs the verification suites and writes JSON reports.
//!
//! Exit status: 0 if every check passes, 1 on a residual failure, 2 on a
//! configuration error, 3 on truncation or non-convergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use moment_core::moment::{
    compare_with_table, main_bracket, mollified_c2_check, mollified_main, mollified_oracle, mollifier_in_range, weight_w,
    CriticalLineTable, WeightSpec,
};
use moment_core::report::{CheckRecord, Report};
use moment_core::suites;
use moment_core::{DirichletCharacter, Error, ShiftTuple, C64};

#[derive(Parser, Debug, Serialize)]
#[command(name = "moment", version, about = "Verification suites for the twisted second moment of zeta(s)L(s,chi)")]
#[command(args_override_self = true)]
struct Cli {
    /// JSON file of subcommand flags; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report destination: a directory receives JSON lines, anything else a JSON file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MOMENT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Exact identities: Gauss sums, twisted sums, Euler products, R/J cancellation.
    Identities(IdentitiesArgs),
    /// The approximate functional equation on a (q, t) grid.
    Afe(AfeArgs),
    /// Voronoi summation with its mutation tests, and the delta-symbol expansion.
    Voronoi(VoronoiArgs),
    /// U_ij closed forms against brute-force double sums.
    Sums(SumsArgs),
    /// Oracle against main term for one (h, k).
    Moment(MomentArgs),
    /// Mollified moment: main-term assembly against the oracle.
    Mollified(MollifiedArgs),
    /// Every suite of the acceptance criteria.
    All(AllArgs),
}

#[derive(Args, Debug, Serialize)]
struct IdentitiesArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u64, 4, 5])]
    q: Vec<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct AfeArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u64, 4, 5])]
    q: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![30.0, 50.0, 80.0])]
    t: Vec<f64>,
    /// Fixed MN_max instead of the V-decay default.
    #[arg(long)]
    mnmax: Option<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct VoronoiArgs {
    /// Restrict the (q, d, c) grid to these moduli.
    #[arg(long, value_delimiter = ',')]
    q: Vec<u64>,
    #[arg(long, default_value_t = 20.0)]
    omega: f64,
    #[arg(long, default_value_t = 50)]
    n_max: i64,
}

#[derive(Args, Debug, Serialize)]
struct SumsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u64, 4, 5])]
    q: Vec<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct CharacterArgs {
    /// Fundamental discriminant of a real character.
    #[arg(long = "D", allow_hyphen_values = true, conflicts_with_all = ["q", "table"])]
    d: Option<i64>,
    /// Modulus of a character given by --table.
    #[arg(long, requires = "table")]
    q: Option<u64>,
    /// JSON list of the values chi(0), ..., chi(q-1), each a number or [re, im].
    #[arg(long, requires = "q")]
    table: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct WeightArgs {
    #[arg(long = "T", default_value_t = 1000.0)]
    t: f64,
    /// Transition width (default 0.4 T).
    #[arg(long = "T0")]
    t0: Option<f64>,
    /// "a,b,c,d", each x or x+yi (default (1,2,3,5)e-2 (1+i/10)).
    #[arg(long, allow_hyphen_values = true)]
    shifts: Option<String>,
    #[arg(long, default_value_t = 0.15)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct MomentArgs {
    #[command(flatten)]
    chi: CharacterArgs,
    #[arg(long, default_value_t = 1)]
    h: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[command(flatten)]
    weight: WeightArgs,
    /// CSV of integrand samples at the quadrature nodes.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MollifiedArgs {
    #[command(flatten)]
    chi: CharacterArgs,
    /// JSON list of [n, a(n)] or [n, re, im].
    #[arg(long)]
    coeffs: PathBuf,
    #[command(flatten)]
    weight: WeightArgs,
    /// Also check the log^2 T coefficient (real characters).
    #[arg(long)]
    c2: bool,
}

#[derive(Args, Debug, Serialize)]
struct AllArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Exit status for an error.
fn status_of(e: &Error) -> u8 {
    match e {
        Error::Truncation(_) | Error::NonConvergence(_) | Error::Overflow(_) => 3,
        _ => 2,
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

/// Splices `--key value` pairs from the config file in front of the
/// subcommand's own flags, so explicit flags override them.
fn merge_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| format!("config {path}: {e}"))?;
    let obj: serde_json::Map<String, Value> = serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))?;
    let names = ["identities", "afe", "voronoi", "sums", "moment", "mollified", "all"];
    let Some(pos) = args.iter().position(|a| names.contains(&a.as_str())) else { return Ok(args) };
    let mut extra = Vec::new();
    for (k, v) in obj {
        let flag = format!("--{k}");
        match v {
            Value::Bool(true) => extra.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                extra.push(format!("{flag}={}", parts.join(",")));
            }
            other => extra.push(format!("{flag}={}", scalar(&other))),
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn complex_of(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => Some(C64::new(n.as_f64()?, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn character(args: &CharacterArgs) -> Result<DirichletCharacter, Error> {
    match (args.d, args.q, &args.table) {
        (Some(d), _, _) => DirichletCharacter::kronecker(d),
        (None, Some(q), Some(path)) => {
            let v = read_json(path)?;
            let items = v.as_array().ok_or_else(|| Error::InvalidTable("expected a JSON list".into()))?;
            let values = items
                .iter()
                .map(|x| complex_of(x).ok_or_else(|| Error::InvalidTable(format!("bad value {x}"))))
                .collect::<Result<Vec<_>, _>>()?;
            DirichletCharacter::from_table(q, values)
        }
        _ => Err(config_error("give --D, or --q with --table")),
    }
}

fn weight_and_shifts(w: &WeightArgs) -> Result<(WeightSpec, ShiftTuple), Error> {
    let spec = WeightSpec::new(w.t, w.t0.unwrap_or(0.4 * w.t))?;
    let sh = match &w.shifts {
        Some(s) => ShiftTuple::parse(s)?,
        None => ShiftTuple::generic(1.0),
    };
    Ok((spec, sh))
}

fn coefficients(path: &Path) -> Result<Vec<(u64, C64)>, Error> {
    let v = read_json(path)?;
    let items = v.as_array().ok_or_else(|| config_error("coefficients: expected a JSON list"))?;
    items
        .iter()
        .map(|x| {
            let a = x.as_array().ok_or_else(|| config_error(format!("coefficient {x} is not a list")))?;
            let n = a.first().and_then(Value::as_u64).ok_or_else(|| config_error(format!("coefficient {x}: bad index")))?;
            let re = a.get(1).and_then(Value::as_f64).ok_or_else(|| config_error(format!("coefficient {x}: bad value")))?;
            let im = a.get(2).and_then(Value::as_f64).unwrap_or(0.0);
            Ok((n, C64::new(re, im)))
        })
        .collect()
}

fn write_csv(
    path: &Path,
    table: &CriticalLineTable,
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
) -> Result<(), Error> {
    let io = |e: std::io::Error| config_error(format!("{}: {e}", path.display()));
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(f, "t,w,integrand_re,integrand_im,main_re,main_im").map_err(io)?;
    let lr = (h as f64 / k as f64).ln();
    for (&t, &v) in table.nodes.iter().zip(&table.values) {
        let w = weight_w(t, spec);
        if w == 0.0 {
            continue;
        }
        let z = v * C64::from_polar(1.0, -t * lr);
        let m = main_bracket(t, h, k, sh, chi)?;
        writeln!(f, "{t},{w:e},{:e},{:e},{:e},{:e}", z.re, z.im, m.re, m.im).map_err(io)?;
    }
    Ok(())
}

fn run_moment(a: &MomentArgs, report: &mut Report) -> Result<(), Error> {
    let chi = character(&a.chi)?;
    let (spec, sh) = weight_and_shifts(&a.weight)?;
    let table = CriticalLineTable::for_weights(&sh, &chi, &[spec], a.h * a.k)?;
    let r = compare_with_table(&table, a.h, a.k, &sh, &chi, &spec)?;
    let details = serde_json::to_value(&r).expect("report serializes");
    report.push(
        CheckRecord::at_most(
            "moment",
            &format!("relative q={} h={} k={} T={}", chi.modulus(), a.h, a.k, spec.t),
            r.relative_residual,
            a.weight.tol,
            "critical-line quadrature",
        )
        .with_details(details),
    );
    if let Some(path) = &a.csv {
        write_csv(path, &table, a.h, a.k, &sh, &chi, &spec)?;
    }
    Ok(())
}

fn run_mollified(a: &MollifiedArgs, report: &mut Report) -> Result<(), Error> {
    let chi = character(&a.chi)?;
    let (spec, sh) = weight_and_shifts(&a.weight)?;
    let coeffs = coefficients(&a.coeffs)?;
    if !mollifier_in_range(&coeffs, spec.t) {
        eprintln!("warning: X^2 > T^(2/11); outside the proven range");
    }
    let max_hk = coeffs.iter().map(|c| c.0).max().unwrap_or(1).pow(2);
    let main = mollified_main(&coeffs, &sh, &chi, &spec)?;
    let table = CriticalLineTable::for_weights(&sh, &chi, &[spec], max_hk)?;
    let oracle = mollified_oracle(&coeffs, &table, &spec)?;
    let rel = (oracle - main).norm() / oracle.norm();
    report.push(
        CheckRecord::at_most("mollified", &format!("relative q={} terms={} T={}", chi.modulus(), coeffs.len(), spec.t), rel, a.weight.tol, "critical-line quadrature")
            .with_details(json!({ "main": [main.re, main.im], "oracle": [oracle.re, oracle.im], "in_range": mollifier_in_range(&coeffs, spec.t) })),
    );
    if a.c2 {
        let c = mollified_c2_check(&coeffs, &chi, &spec)?;
        report.push(
            CheckRecord::at_most("mollified", "c2", c.relative_error, moment_core::tolerances::MOLLIFIED_REL, "predicted c2")
                .with_details(json!({ "extracted": c.extracted, "predicted": c.predicted })),
        );
    }
    Ok(())
}

fn run(cli: &Cli, report: &mut Report) -> Result<(), Error> {
    match &cli.command {
        Command::Identities(a) => report.extend(suites::identities(&a.q, a.seed)?),
        Command::Afe(a) => report.extend(suites::afe_with(&a.q, &a.t, a.seed, a.mnmax)?),
        Command::Voronoi(a) => {
            let grid: Vec<_> = suites::VORONOI_GRID.iter().copied().filter(|c| a.q.is_empty() || a.q.contains(&c.0)).collect();
            report.extend(suites::voronoi(&grid)?);
            report.extend(suites::delta(a.omega, a.n_max)?);
        }
        Command::Sums(a) => {
            for &q in &a.q {
                report.extend(suites::sums(q, a.seed)?);
            }
        }
        Command::Moment(a) => run_moment(a, report)?,
        Command::Mollified(a) => run_mollified(a, report)?,
        Command::All(a) => {
            report.extend(suites::identities(&[3, 4, 5], a.seed)?);
            report.extend(suites::afe(&[3, 4, 5], &[30.0, 50.0, 80.0], a.seed)?);
            report.extend(suites::voronoi(&suites::VORONOI_GRID)?);
            report.extend(suites::delta(20.0, 50)?);
            for q in [3, 4, 5] {
                report.extend(suites::sums(q, a.seed)?);
            }
            report.extend(suites::diagonal(3, &[(1, 1), (2, 1)], &suites::TREND_HEIGHTS)?);
            report.extend(suites::moment(&[3, 4], &[(1, 1), (2, 3)], &suites::TREND_HEIGHTS)?);
            report.extend(suites::motohashi(-3, 2000.0)?);
            report.extend(suites::mollified(-3, 3, 2000.0)?);
        }
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Identities(_) => "identities",
        Command::Afe(_) => "afe",
        Command::Voronoi(_) => "voronoi",
        Command::Sums(_) => "sums",
        Command::Moment(_) => "moment",
        Command::Mollified(_) => "mollified",
        Command::All(_) => "all",
    }
}

/// One row per check.
fn checks_csv(report: &Report) -> String {
    let mut s = String::from("suite,name,residual,tolerance,bound,passed\n");
    for c in &report.checks {
        s += &format!("{},\"{}\",{:e},{:e},{:?},{}\n", c.suite, c.name, c.residual, c.tolerance, c.bound, c.passed);
    }
    s
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => checks_csv(report),
    };
    match out {
        Some(p) if p.is_dir() && format == Format::Json => report.append_jsonl(p),
        Some(p) if p.is_dir() => fs::write(p.join(format!("{}.csv", report.command)), text),
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let args = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: invalid --threads {n}");
            return ExitCode::from(2);
        }
    }
    let config = serde_json::to_value(&cli.command).expect("config serializes");
    let mut report = Report::new(command_name(&cli.command), config);
    let started = std::time::Instant::now();
    let outcome = run(&cli, &mut report);
    report.timing.push((report.command.clone(), started.elapsed().as_secs_f64()));
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
        return ExitCode::from(status_of(e));
    }
    match emit(&report, cli.format, cli.out.as_deref()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(2);
        }
        _ => {}
    }
    for f in report.failures() {
        eprintln!("failed: {} {}: {:.4e} (bound {:.1e})", f.suite, f.name, f.residual, f.tolerance);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
