use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use apn_core::bounds::{self, BoundKind};
use apn_core::diffanal::differential_spectrum;
use apn_core::funcrep::PolyFunc;
use apn_core::geomcrit::{self, GeomError};
use apn_core::gf2m::FieldSpec;
use apn_core::search::{self, Checkpoint, Family, SearchError, SearchJob};
use apn_core::sigma::{self, SigmaError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "apn", version, about = "Analysis of APN polynomial functions over F_2^m")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// seed for commands that sample random polynomials
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[arg(long)]
    m: u32,
    /// defining polynomial as a hex bit mask, e.g. 0x25
    #[arg(long, value_parser = parse_hex)]
    modulus: Option<u64>,
}

impl FieldArgs {
    fn field(&self) -> Result<FieldSpec> {
        Ok(FieldSpec::new(self.m, self.modulus)?)
    }
}

#[derive(Args, Clone)]
struct PolyArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    poly: String,
    /// named coefficient values, e.g. --set a=0x3
    #[arg(long = "set", value_parser = parse_binding)]
    set: Vec<(String, u32)>,
}

impl PolyArgs {
    fn poly(&self) -> Result<PolyFunc> {
        let field = self.field.field()?;
        let bindings: HashMap<String, u32> = self.set.iter().cloned().collect();
        Ok(PolyFunc::parse(&field, &self.poly, &bindings)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// differential spectrum and APN test (exit 0 if APN, 1 if not)
    ApnTest(PolyArgs),
    /// the surface attached to f
    Sigma {
        #[command(subcommand)]
        action: SigmaAction,
    },
    /// point-count bounds
    Bounds {
        #[command(subcommand)]
        action: BoundsAction,
    },
    /// irreducibility and smoothness criteria for degree d (and x^d + a x^r)
    Criteria {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        r: Option<u64>,
    },
    /// exhaustive search over a family with free coefficients A..Z
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = search::DEFAULT_BUDGET)]
        budget: u64,
        /// write the scan position here when the budget runs out
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// continue from the position stored in --checkpoint
        #[arg(long, requires = "checkpoint")]
        resume: bool,
    },
    /// reduced-family classification scans for degree 6, 7 or 9
    Classify {
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = search::DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum SigmaAction {
    /// print the affine equation phi
    Build(PolyArgs),
    /// count rational points (work q^3 must fit the budget)
    Count {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = search::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// x1 + x2 divides d(phi)/dx0; with --samples, on random polynomials
    CheckDivisibility {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 0)]
        samples: u32,
    },
    /// (1:1:1:0) is a singular point of the projective surface
    CheckSingular(PolyArgs),
}

#[derive(Subcommand)]
enum BoundsAction {
    /// m_max table with per-row form provenance
    Mmax {
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// exclusion decision at one (d, m)
    Check {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        m: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Irreducible,
    Isolated,
}

fn parse_hex(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| e.to_string())
}

fn parse_binding(s: &str) -> Result<(String, u32), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v = if v.starts_with("0x") || v.starts_with("0X") { parse_hex(v)? } else { v.parse().map_err(|_| "bad value")? };
    Ok((k.to_string(), u32::try_from(v).map_err(|_| "value too large")?))
}

/// Result of a command: the report and whether its predicate held.
struct Report {
    value: Value,
    text: String,
    ok: bool,
    /// JSON lines printed before `value` (then printed compact)
    stream: Option<Vec<Value>>,
}

impl Report {
    fn new(value: Value, text: impl Into<String>, ok: bool) -> Self {
        Report { value, text: text.into(), ok, stream: None }
    }
}

/// Budget exhaustion, reported with exit code 3.
#[derive(Debug)]
struct OverBudget(Value);

impl std::fmt::Display for OverBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "budget exceeded")
    }
}

impl std::error::Error for OverBudget {}

fn scan_cap(budget: u64) -> u32 {
    // q^3 <= budget
    (63 - budget.max(1).leading_zeros()) / 3
}

fn apn_test(args: &PolyArgs) -> Result<Report> {
    let f = args.poly()?;
    let s = differential_spectrum(&f)?;
    let hist: serde_json::Map<String, Value> = s.histogram.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let value = json!({
        "poly": f.to_string(),
        "m": s.m,
        "modulus": format!("{:#x}", f.field().modulus()),
        "delta": s.delta,
        "spectrum": hist,
        "apn": s.is_apn(),
    });
    let text = format!("{f} over F_2^{}: delta = {}, apn = {}", s.m, s.delta, s.is_apn());
    Ok(Report::new(value, text, s.is_apn()))
}

fn sigma_cmd(action: &SigmaAction, seed: u64) -> Result<Report> {
    match action {
        SigmaAction::Build(p) => {
            let s = sigma::build_sigma(&p.poly()?)?;
            let phi = s.phi.to_string();
            let value = json!({"phi": phi, "degree": s.d.saturating_sub(3), "d": s.d});
            Ok(Report::new(value, phi, true))
        }
        SigmaAction::Count { poly, budget } => {
            let f = poly.poly()?;
            let s = sigma::build_sigma(&f)?;
            let cap = scan_cap(*budget);
            let count = match sigma::count_points(&s, cap) {
                Err(SigmaError::BudgetExceeded { m, cap }) => {
                    return Err(OverBudget(json!({"error": "budget exceeded", "m": m, "max_m": cap})).into())
                }
                other => other?,
            };
            let q = f.field().order();
            let limit = bounds::surface_point_cap(s.d, q);
            let value = json!({
                "poly": f.to_string(),
                "m": f.field().m(),
                "count": count,
                "apn_via_surface": count.affine_off_locus == 0,
                "point_cap": limit.to_string(),
                "within_cap": (count.projective_total as u128) <= limit,
            });
            let text = format!(
                "affine {} (on planes {}, off {}), at infinity {}, projective {}",
                count.affine_total,
                count.affine_on_triple_locus,
                count.affine_off_locus,
                count.infinity_points,
                count.projective_total
            );
            Ok(Report::new(value, text, true))
        }
        SigmaAction::CheckDivisibility { poly, samples } => {
            let f = poly.poly()?;
            let mut checked = vec![(f.to_string(), sigma::divisibility_check(&sigma::build_sigma(&f)?))];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let field = f.field().clone();
            let d = f.degree().unwrap_or(3).max(3);
            while checked.len() <= *samples as usize {
                let g = random_poly(&field, d, &mut rng);
                let Ok(s) = sigma::build_sigma(&g) else { continue };
                checked.push((g.to_string(), sigma::divisibility_check(&s)));
            }
            let all = checked.iter().all(|(_, ok)| *ok);
            let failures: Vec<&String> = checked.iter().filter(|(_, ok)| !ok).map(|(p, _)| p).collect();
            let value = json!({
                "rule": "x1 + x2 divides the x0-partial of phi",
                "checked": checked.len(),
                "holds": all,
                "failures": failures,
            });
            Ok(Report::new(value, format!("{} polynomials checked, holds = {all}", checked.len()), all))
        }
        SigmaAction::CheckSingular(p) => {
            let s = sigma::build_sigma(&p.poly()?)?;
            match sigma::singular_at_infinity_diagonal(&s) {
                Ok(c) => {
                    let ok = c.holds();
                    let value = json!({"point": "(1:1:1:0)", "check": c, "singular": ok});
                    Ok(Report::new(value, format!("(1:1:1:0) singular: {ok}"), ok))
                }
                Err(SigmaError::DiagonalNotConstant { points }) => {
                    let singular = sigma::diagonal_singular_points(&s);
                    let value = json!({
                        "point": "(1:1:1:0)",
                        "diagonal_constant": false,
                        "diagonal_roots": points.iter().map(|u| format!("{u:#x}")).collect::<Vec<_>>(),
                        "affine_singular_points": singular.iter().map(|u| format!("{u:#x}")).collect::<Vec<_>>(),
                    });
                    Ok(Report::new(value, format!("phi(u,u,u) not constant; diagonal roots {points:?}"), false))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Random polynomial of degree d, with nonzero free part.
fn random_poly(field: &FieldSpec, d: u64, rng: &mut ChaCha8Rng) -> PolyFunc {
    let q = field.order() as u32;
    let mut terms = vec![(d, 1)];
    for e in 0..d {
        terms.push((e, rng.gen_range(0..q)));
    }
    PolyFunc::new(field, terms)
}

fn bounds_cmd(action: &BoundsAction, format: Format) -> Result<Report> {
    match action {
        BoundsAction::Mmax { kind } => {
            let kind = match kind {
                KindArg::Irreducible => BoundKind::Irreducible,
                KindArg::Isolated => BoundKind::Isolated,
            };
            let table = bounds::mmax_table(kind);
            let ok = table.mismatches().next().is_none();
            let text = if format == Format::Csv {
                table.to_csv()
            } else {
                let mut t = String::new();
                for r in &table.rows {
                    let forms: Vec<String> = r.by_form.iter().map(|(f, v)| format!("{}={v}", f.name())).collect();
                    t.push_str(&format!(
                        "d <= {:>3}: m_max {:>2} (reference {:>2}) {}{}\n",
                        r.d_max,
                        r.m_max,
                        r.reference,
                        forms.join(" "),
                        if r.flagged { "  FLAGGED" } else { "" }
                    ));
                }
                t
            };
            Ok(Report::new(serde_json::to_value(&table)?, text, ok))
        }
        BoundsAction::Check { d, m } => {
            if *d < 5 {
                bail!("d must be at least 5");
            }
            let r = bounds::irreducible_excludes(*d, *m).1;
            let text = format!(
                "d = {d}, m = {m}: excluded if irreducible {}, excluded if isolated singularities {}",
                r.excluded_irreducible, r.excluded_isolated
            );
            Ok(Report::new(serde_json::to_value(&r)?, text, r.excluded_irreducible))
        }
    }
}

fn criteria_cmd(d: u64, r: Option<u64>) -> Result<Report> {
    let mut out = serde_json::Map::new();
    let mut lines = Vec::new();
    fn record(name: &str, v: &geomcrit::CriterionVerdict, out: &mut serde_json::Map<String, Value>, lines: &mut Vec<String>) {
        lines.push(format!("{name}: {:?} ({})", v.status, v.rule));
        out.insert(name.to_string(), serde_json::to_value(v).expect("serializable"));
    }
    let jmw = geomcrit::jmw_irreducible(d)?;
    record("residue_irreducible", &jmw, &mut out, &mut lines);
    let jw = geomcrit::jw_smooth(d)?;
    record("residue_smooth", &jw, &mut out, &mut lines);
    let curve = sigma::infinity_curve(d)?;
    match geomcrit::absolutely_irreducible(&curve, geomcrit::CURVE_DEGREE_CAP) {
        Ok(v) => record("factorization", &v, &mut out, &mut lines),
        Err(GeomError::DegreeCapExceeded { degree, cap }) => {
            out.insert("factorization".into(), json!({"skipped": format!("degree {degree} above cap {cap}")}));
        }
        Err(e) => return Err(e.into()),
    }
    match geomcrit::curve_singular_points(&curve) {
        Ok(pts) => {
            lines.push(format!("singular points at infinity: {}", pts.len()));
            out.insert(
                "singular_points".into(),
                json!(pts.iter().map(|p| json!({"field_degree": p.field_degree, "coords": p.coords.iter().map(|c| format!("{c:#x}")).collect::<Vec<_>>()})).collect::<Vec<_>>()),
            );
            out.insert("smooth".into(), json!(pts.is_empty()));
        }
        Err(e) => {
            out.insert("singular_points".into(), json!({"skipped": e.to_string()}));
        }
    }
    if let Some(r) = r {
        let b = geomcrit::binomial_criterion(d, r)?;
        record("binomial", &b, &mut out, &mut lines);
        let v = geomcrit::voloch_criterion(d, r)?;
        record("voloch", &v, &mut out, &mut lines);
        if b.is_established() || v.is_established() {
            let m_max = bounds::mmax(BoundKind::Irreducible, bounds::Form::Exact, d);
            lines.push(format!("x^{d} + a x^{r} can only be APN for m <= {m_max}"));
            out.insert("m_max".into(), json!(m_max));
        }
    }
    out.insert("d".into(), json!(d));
    let ok = out.values().any(|v| v.get("status").and_then(Value::as_str) == Some("Established"));
    Ok(Report::new(Value::Object(out), lines.join("\n"), ok))
}

fn search_cmd(
    field: &FieldArgs,
    family: &str,
    budget: u64,
    checkpoint: Option<&PathBuf>,
    resume: bool,
    workers: Option<usize>,
) -> Result<Report> {
    let mut job = SearchJob::new(Family::parse(family)?, field.field()?);
    job.budget = budget;
    job.workers = workers;
    if resume {
        let path = checkpoint.expect("clap enforces --checkpoint");
        job = Checkpoint::load(path).with_context(|| format!("reading {}", path.display()))?.resume(&job)?;
    }
    let result = match search::scan(&job) {
        Ok(r) => r,
        Err(SearchError::BudgetExceeded { partial, needed, budget }) => {
            if let Some(path) = checkpoint {
                Checkpoint::of(&partial).save(path)?;
            }
            let mut v = serde_json::to_value(&*partial)?;
            v["error"] = json!(format!("work {needed} exceeds budget {budget}"));
            return Err(OverBudget(v).into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = checkpoint {
        Checkpoint::of(&result).save(path)?;
    }
    let lines: Vec<String> = result.hits.iter().map(|h| format!("{}  {}", h.poly, h.fingerprint)).collect();
    let ok = !result.hits.is_empty();
    let stream = result.hits.iter().map(serde_json::to_value).collect::<Result<Vec<_>, _>>()?;
    let mut summary = serde_json::to_value(&result)?;
    summary.as_object_mut().expect("object").remove("hits");
    let mut report = Report::new(summary, lines.join("\n"), ok);
    report.stream = Some(stream);
    Ok(report)
}

fn classify_cmd(degree: u32, m: u32, budget: u64) -> Result<Report> {
    let rep = match degree {
        6 => search::classify_degree6(m, budget),
        7 => search::classify_degree7(m, budget),
        9 => search::classify_degree9(m, budget),
        _ => bail!("classification is available for degrees 6, 7 and 9"),
    };
    let rep = match rep {
        Err(SearchError::BudgetExceeded { partial, .. }) => {
            return Err(OverBudget(serde_json::to_value(&*partial)?).into())
        }
        other => other?,
    };
    let mut text = Vec::new();
    for s in &rep.scans {
        text.push(format!("{}: {} hits of {} candidates", s.family, s.hits, s.scanned));
        for (idx, names) in &s.matches {
            text.push(format!("  hit {idx}: fingerprint matches {}", if names.is_empty() { "none".into() } else { names.join(", ") }));
        }
    }
    text.push(format!("note: {}", rep.caveat));
    Ok(Report::new(serde_json::to_value(&rep)?, text.join("\n"), true))
}

fn run(cli: &Cli) -> Result<Report> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Bounds { action: BoundsAction::Mmax { .. } }) {
        bail!("csv output is only available for `bounds mmax`");
    }
    if cli.workers == Some(0) {
        bail!("--workers must be positive");
    }
    match &cli.command {
        Command::ApnTest(p) => apn_test(p),
        Command::Sigma { action } => sigma_cmd(action, cli.seed),
        Command::Bounds { action } => bounds_cmd(action, cli.format),
        Command::Criteria { d, r } => criteria_cmd(*d, *r),
        Command::Search { field, family, budget, checkpoint, resume } => {
            if *budget == 0 {
                bail!("--budget must be positive");
            }
            search_cmd(field, family, *budget, checkpoint.as_ref(), *resume, cli.workers)
        }
        Command::Classify { degree, m, budget } => classify_cmd(*degree, *m, *budget),
    }
}

fn emit(format: Format, r: &Report) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = match (format, &r.stream) {
        (Format::Json, Some(lines)) => lines
            .iter()
            .chain(std::iter::once(&r.value))
            .try_for_each(|v| writeln!(out, "{}", serde_json::to_string(v).expect("serializable"))),
        (Format::Json, None) => writeln!(out, "{}", serde_json::to_string_pretty(&r.value).expect("serializable")),
        _ if r.text.is_empty() || r.text.ends_with('\n') => write!(out, "{}", r.text),
        _ => writeln!(out, "{}", r.text),
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers.filter(|&n| n > 0) {
        // ignore failure: the pool may already be initialized
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(r) => {
            emit(cli.format, &r);
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if let Some(OverBudget(v)) = e.downcast_ref::<OverBudget>() {
                emit(cli.format, &Report::new(v.clone(), "budget exceeded", false));
                eprintln!("error: budget exceeded");
                return ExitCode::from(3);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
