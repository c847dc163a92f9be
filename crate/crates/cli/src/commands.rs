use std::fmt;
use std::fs;
use std::path::Path;

use hyplevel_core::bounds::BoundReport;
use hyplevel_core::convexity::radius_of_convexity_with;
use hyplevel_core::corpus::{parse_corpus, CorpusEntry, MapClass};
use hyplevel_core::curvature::cross_validate;
use hyplevel_core::numeric::fmt_g17;
use hyplevel_core::{
    default_corpus, full_report, measure, parse, trace, verify_section7, Complex64, ConvexityCertificate, LevelProblem,
    MeasureSet, Parametrization, Section7Check, TraceOptions, TracedCurve,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, OutputArgs, ProblemArgs, RadiusArgs, VerifyArgs};
use crate::output::{bounds_csv, push_row, samples_csv, svg, to_json};

/// Inequalities may fail by this much before the run counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    Violation,
}

#[derive(Debug)]
pub enum CliError {
    /// DSL text with the byte offset of the error.
    Dsl { input: String, offset: usize, message: String },
    Core(hyplevel_core::Error),
    Usage(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Dsl { input, offset, message } => {
                writeln!(f, "parse error at byte {offset}: {message}")?;
                writeln!(f, "  {input}")?;
                write!(f, "  {}^", " ".repeat(input[..(*offset).min(input.len())].chars().count()))
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<hyplevel_core::Error> for CliError {
    fn from(e: hyplevel_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: &Command) -> Result<Status> {
    match command {
        Command::Trace(a) => cmd_trace(a),
        Command::Curvature(a) => cmd_curvature(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Measures(a) => cmd_measures(a),
        Command::Radius(a) => cmd_radius(a),
        Command::VerifyAll(a) => cmd_verify_all(a),
    }
}

fn parse_map(text: &str) -> Result<hyplevel_core::HoloMap> {
    parse(text).map_err(|e| match e {
        hyplevel_core::Error::Parse { offset, message } => CliError::Dsl { input: text.to_string(), offset, message },
        other => other.into(),
    })
}

fn problem(a: &ProblemArgs) -> Result<LevelProblem> {
    let f = parse_map(&a.f)?;
    match a.r {
        Some(_) if a.lambda != 1.0 => Err(CliError::Usage("--r studies Ω(rf) at λ = 1; drop --lambda".into())),
        Some(r) => Ok(LevelProblem::scaled(f, r)?),
        None => Ok(LevelProblem::new(f, a.lambda)?),
    }
}

fn traced(p: &LevelProblem, opts: &TraceOptions) -> Result<TracedCurve> {
    let seed = p.find_boundary_seed()?;
    Ok(trace(p, seed, opts)?)
}

fn write_artifact(out: &OutputArgs, name: &str, contents: &str) -> Result<()> {
    let dir = &out.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct CurveSummary {
    map: String,
    lambda: f64,
    r: Option<f64>,
    closed: bool,
    parametrization: &'static str,
    samples: usize,
    raw_len: usize,
    quadrature_check: Option<f64>,
    seed: Complex64,
}

fn curve_summary(map: &str, p: &LevelProblem, curve: &TracedCurve) -> CurveSummary {
    CurveSummary {
        map: map.to_string(),
        lambda: p.lambda(),
        r: p.r(),
        closed: curve.is_closed(),
        parametrization: match curve.parametrization() {
            Parametrization::Arclength => "arclength",
            Parametrization::UniformAngle { .. } => "uniform_angle",
        },
        samples: curve.samples().len(),
        raw_len: curve.raw_len(),
        quadrature_check: curve.quadrature_check(),
        seed: curve.samples()[0].z,
    }
}

fn describe(curve: &TracedCurve) -> String {
    let shape = if curve.is_closed() { "closed curve" } else { "open arc" };
    format!("{shape}, {} samples", curve.samples().len())
}

fn cmd_trace(a: &ProblemArgs) -> Result<Status> {
    let p = problem(a)?;
    let curve = traced(&p, &a.trace.options().map_err(CliError::Usage)?)?;
    let out = &a.output;
    if out.wants(Format::Csv) {
        write_artifact(out, "trace.csv", &samples_csv(&curve))?;
    }
    if out.wants(Format::Json) {
        write_artifact(out, "trace.json", &to_json(&curve_summary(&a.f, &p, &curve)))?;
    }
    if out.wants(Format::Svg) {
        write_artifact(out, "trace.svg", &svg(&p, &curve, out.color_kh))?;
    }
    println!("{}", describe(&curve));
    Ok(Status::Clean)
}

#[derive(Serialize)]
struct CurvatureSummary {
    #[serde(flatten)]
    curve: CurveSummary,
    min_ke: f64,
    max_ke: f64,
    min_kh: f64,
    max_kh: f64,
    /// Largest gap between the implicit curvature and finite differences
    /// of the sample positions.
    cross_validation: f64,
}

fn cmd_curvature(a: &ProblemArgs) -> Result<Status> {
    let p = problem(a)?;
    let curve = traced(&p, &a.trace.options().map_err(CliError::Usage)?)?;
    let range = |k: fn(&hyplevel_core::TracedSample) -> f64| {
        curve.samples().iter().map(k).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (min_ke, max_ke) = range(|s| s.ke);
    let (min_kh, max_kh) = range(|s| s.kh);
    let summary = CurvatureSummary {
        curve: curve_summary(&a.f, &p, &curve),
        min_ke,
        max_ke,
        min_kh,
        max_kh,
        cross_validation: cross_validate(&p, &curve),
    };
    let out = &a.output;
    if out.wants(Format::Csv) {
        write_artifact(out, "curvature.csv", &samples_csv(&curve))?;
    }
    if out.wants(Format::Json) {
        write_artifact(out, "curvature.json", &to_json(&summary))?;
    }
    if out.wants(Format::Svg) {
        write_artifact(out, "curvature.svg", &svg(&p, &curve, true))?;
    }
    println!("{}", describe(&curve));
    println!("ke in [{}, {}]", fmt_g17(min_ke), fmt_g17(max_ke));
    println!("kh in [{}, {}]", fmt_g17(min_kh), fmt_g17(max_kh));
    println!("finite-difference gap {}", fmt_g17(summary.cross_validation));
    Ok(Status::Clean)
}

#[derive(Serialize)]
struct BoundSummary {
    spec_id: &'static str,
    min_margin: f64,
    equality_samples: Vec<Complex64>,
    evaluated: usize,
    skipped: usize,
    holds: bool,
}

fn bound_summaries(reports: &[BoundReport]) -> Vec<BoundSummary> {
    reports
        .iter()
        .map(|r| BoundSummary {
            spec_id: r.id.name(),
            min_margin: r.min_margin,
            equality_samples: r.equality_samples.clone(),
            evaluated: r.rows.len(),
            skipped: r.skipped,
            holds: r.holds(VIOLATION_TOL),
        })
        .collect()
}

fn cmd_bounds(a: &ProblemArgs) -> Result<Status> {
    let p = problem(a)?;
    let curve = traced(&p, &a.trace.options().map_err(CliError::Usage)?)?;
    let reports = full_report(&p, &curve)?;
    let summaries = bound_summaries(&reports);
    let out = &a.output;
    if out.wants(Format::Csv) {
        write_artifact(out, "bounds.csv", &bounds_csv(&reports))?;
    }
    if out.wants(Format::Json) {
        write_artifact(out, "bounds.json", &to_json(&summaries))?;
    }
    if out.wants(Format::Svg) {
        write_artifact(out, "bounds.svg", &svg(&p, &curve, out.color_kh))?;
    }
    println!("{}", describe(&curve));
    for s in &summaries {
        let mark = if s.holds { "ok" } else { "VIOLATED" };
        println!("{:<10} min margin {:>24}  equalities {:>4}  {mark}", s.spec_id, fmt_g17(s.min_margin), s.equality_samples.len());
    }
    Ok(if summaries.iter().all(|s| s.holds) { Status::Clean } else { Status::Violation })
}

#[derive(Serialize)]
struct CheckJson {
    id: &'static str,
    lhs: f64,
    rhs: f64,
    margin: f64,
    equality: bool,
    gated: bool,
}

#[derive(Serialize)]
struct MeasuresJson {
    area_h: f64,
    perimeter_h: f64,
    total_kh: f64,
    gauss_bonnet_residual: f64,
    isoperimetric_residual: f64,
    section7: Vec<CheckJson>,
}

fn measures_json(ms: &MeasureSet, checks: &[Section7Check]) -> MeasuresJson {
    MeasuresJson {
        area_h: ms.area_h,
        perimeter_h: ms.perimeter_h,
        total_kh: ms.total_kh,
        gauss_bonnet_residual: ms.gauss_bonnet_residual(),
        isoperimetric_residual: ms.isoperimetric_residual(),
        section7: checks
            .iter()
            .map(|c| CheckJson {
                id: c.id.name(),
                lhs: c.lhs,
                rhs: c.rhs,
                margin: c.margin,
                equality: c.equality,
                gated: c.id.gated(),
            })
            .collect(),
    }
}

fn violated(c: &Section7Check) -> bool {
    c.id.gated() && c.margin < -VIOLATION_TOL
}

fn cmd_measures(a: &ProblemArgs) -> Result<Status> {
    let p = problem(a)?;
    let curve = traced(&p, &a.trace.options().map_err(CliError::Usage)?)?;
    if !curve.is_closed() {
        return Err(hyplevel_core::Error::OpenCurve.into());
    }
    let ms = measure(&curve)?;
    let checks = verify_section7(&p, &ms)?;
    let json = measures_json(&ms, &checks);
    let out = &a.output;
    if out.wants(Format::Csv) {
        let mut csv = String::from("quantity,value\n");
        for (k, v) in [
            ("area_h", json.area_h),
            ("perimeter_h", json.perimeter_h),
            ("total_kh", json.total_kh),
            ("gauss_bonnet_residual", json.gauss_bonnet_residual),
            ("isoperimetric_residual", json.isoperimetric_residual),
        ] {
            push_row(&mut csv, &[k.to_string(), fmt_g17(v)]);
        }
        write_artifact(out, "measures.csv", &csv)?;
    }
    if out.wants(Format::Json) {
        write_artifact(out, "measures.json", &to_json(&json))?;
    }
    if out.wants(Format::Svg) {
        write_artifact(out, "measures.svg", &svg(&p, &curve, out.color_kh))?;
    }
    println!("area_h      {}", fmt_g17(ms.area_h));
    println!("perimeter_h {}", fmt_g17(ms.perimeter_h));
    println!("total_kh    {}", fmt_g17(ms.total_kh));
    for c in &checks {
        let mark = match (c.margin < -VIOLATION_TOL, c.id.gated()) {
            (false, _) => "ok",
            (true, true) => "VIOLATED",
            (true, false) => "exceeded (not gated)",
        };
        println!("{:<18} margin {:>24}  {mark}", c.id.name(), fmt_g17(c.margin));
    }
    Ok(if checks.iter().any(violated) { Status::Violation } else { Status::Clean })
}

#[derive(Serialize)]
struct RadiusJson {
    map: String,
    omega: f64,
    bracket: (f64, f64),
    capped: bool,
    depth: usize,
    witness: Option<ConvexityCertificate>,
}

fn cmd_radius(a: &RadiusArgs) -> Result<Status> {
    let f = parse_map(&a.f)?;
    let opts = a.trace.options().map_err(CliError::Usage)?;
    let rad = radius_of_convexity_with(&f, &opts)?;
    let out = &a.output;
    if out.wants(Format::Json) {
        let json = RadiusJson {
            map: a.f.clone(),
            omega: rad.omega,
            bracket: rad.bracket,
            capped: rad.capped,
            depth: rad.depth,
            witness: rad.witness,
        };
        write_artifact(out, "radius.json", &to_json(&json))?;
    }
    if out.wants(Format::Csv) {
        let mut csv = String::from("omega,lo,hi,capped\n");
        let cells = [fmt_g17(rad.omega), fmt_g17(rad.bracket.0), fmt_g17(rad.bracket.1), rad.capped.to_string()];
        push_row(&mut csv, &cells);
        write_artifact(out, "radius.csv", &csv)?;
    }
    if out.wants(Format::Svg) {
        let p = LevelProblem::scaled(f, rad.omega)?;
        let curve = traced(&p, &opts)?;
        write_artifact(out, "radius.svg", &svg(&p, &curve, out.color_kh))?;
    }
    println!("omega = {:.6}", rad.omega);
    println!("bracket [{}, {}]", fmt_g17(rad.bracket.0), fmt_g17(rad.bracket.1));
    match rad.witness {
        Some(w) => println!(
            "witness r = {} at z = {} {}i, ke = {}",
            fmt_g17(w.r),
            fmt_g17(w.argmin.re),
            fmt_g17(w.argmin.im),
            fmt_g17(w.min_ke)
        ),
        None if rad.capped => println!("no nonconvex r below the cap"),
        None => println!("no witness"),
    }
    Ok(Status::Clean)
}

#[derive(Serialize)]
struct EntryJson {
    name: String,
    map: String,
    lambda: f64,
    r: Option<f64>,
    class: MapClass,
    closed: bool,
    samples: usize,
    bounds: Vec<BoundSummary>,
    measures: Option<MeasuresJson>,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct VerifyJson {
    corpus: String,
    entries: Vec<EntryJson>,
    violations: usize,
}

fn verify_entry(e: &CorpusEntry, opts: &TraceOptions) -> Result<EntryJson> {
    let p = e.problem()?;
    let curve = traced(&p, opts)?;
    let bounds = bound_summaries(&full_report(&p, &curve)?);
    let mut violations: Vec<String> = bounds.iter().filter(|b| !b.holds).map(|b| b.spec_id.to_string()).collect();
    let measures = if curve.is_closed() {
        let ms = measure(&curve)?;
        let checks = verify_section7(&p, &ms)?;
        violations.extend(checks.iter().filter(|c| violated(c)).map(|c| c.id.name().to_string()));
        Some(measures_json(&ms, &checks))
    } else {
        None
    };
    Ok(EntryJson {
        name: e.name.clone(),
        map: e.source.clone(),
        lambda: p.lambda(),
        r: p.r(),
        class: e.class,
        closed: curve.is_closed(),
        samples: curve.samples().len(),
        bounds,
        measures,
        violations,
    })
}

fn load_corpus(source: &str) -> Result<Vec<CorpusEntry>> {
    if source == "default" {
        return Ok(default_corpus());
    }
    let text = fs::read_to_string(Path::new(source)).map_err(|e| CliError::Io(format!("cannot read {source}: {e}")))?;
    parse_corpus(&text).map_err(|e| match e {
        hyplevel_core::Error::Parse { offset, message } => {
            CliError::Usage(format!("{source}: parse error at byte {offset}: {message}"))
        }
        other => other.into(),
    })
}

fn cmd_verify_all(a: &VerifyArgs) -> Result<Status> {
    let corpus = load_corpus(&a.corpus)?;
    let opts = a.trace.options().map_err(CliError::Usage)?;
    let entries = corpus
        .par_iter()
        .map(|e| verify_entry(e, &opts).map_err(|err| CliError::Usage(format!("{}: {err}", e.name))))
        .collect::<Result<Vec<_>>>()?;
    let violations = entries.iter().map(|e| e.violations.len()).sum();
    let out = &a.output;
    if out.wants(Format::Csv) {
        let mut csv = String::from("name,spec_id,min_margin,equality_samples,holds\n");
        for e in &entries {
            for b in &e.bounds {
                let cells = [
                    e.name.clone(),
                    b.spec_id.to_string(),
                    fmt_g17(b.min_margin),
                    b.equality_samples.len().to_string(),
                    b.holds.to_string(),
                ];
                push_row(&mut csv, &cells);
            }
        }
        write_artifact(out, "verify-all.csv", &csv)?;
    }
    report_entries(&entries);
    println!("{} problems, {violations} violations", entries.len());
    if out.wants(Format::Json) {
        let json = VerifyJson { corpus: a.corpus.clone(), entries, violations };
        write_artifact(out, "verify-all.json", &to_json(&json))?;
    }
    Ok(if violations == 0 { Status::Clean } else { Status::Violation })
}

fn report_entries(entries: &[EntryJson]) {
    for e in entries {
        let shape = if e.closed { "closed" } else { "open" };
        let status = if e.violations.is_empty() { "ok".to_string() } else { e.violations.join(",") };
        println!("{:<24} {shape:<6} {:>5} samples  {status}", e.name, e.samples);
    }
}
