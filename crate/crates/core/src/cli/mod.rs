//! Command-line front end. `run` parses arguments, executes one command and returns its output and exit code.

pub mod render;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimates::{
    achievable_margin, check_regime, hull_membership, region_matches_theorem, region_polytope, theorem_hull, Catalog,
    Mode,
};
use crate::exponents::{inv_q_gamma, inv_q_ls, named_vertex, DimensionParams, Vertex};
use crate::fractal::{
    assouad_spectrum_fit, covering_number_dyadic, minkowski_fit, monotonicity_violations, zj_cover, DilationSet,
};
use crate::geometry::{
    export_mesh_with, fmt_rational, is_watertight, parse_obj, parse_rational, MeshFormat, Membership, Rational,
    Triple,
};
use crate::numerics::{embedding_scan, run_experiment, Example, ExperimentSpec, Exponent};
use crate::sharpness::{classify_facets, equality_matrix, Aux, FacetLabel, SharpnessTest, TestId};
use render::{render_svg, View};

pub const SEED_ENV: &str = "TYPESET_LAB_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "typeset-lab", version, about = "Type-set geometry and scaling experiments for variational spherical maximal estimates")]
pub struct Cli {
    /// Emit the full result as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// JSON file of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Named vertices and critical exponents.
    Exponents(ParamArgs),
    /// Theorem hull mesh, facet labels and grid consistency report.
    Region(RegionArgs),
    /// Achievable margin and hull membership of one point.
    Member(MemberArgs),
    /// Sharpness tests and the vertex equality matrix.
    Sharpness(SharpnessArgs),
    /// Covering numbers and dimension fits of a dilation set.
    Fractal(FractalArgs),
    /// Scaling experiment for one test example.
    Experiment(ExperimentArgs),
    /// SVG projection of an OBJ mesh.
    Render(RenderArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct ParamArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value = "1")]
    pub beta: String,
    /// Defaults to `beta`.
    #[arg(long)]
    pub gamma: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct RegionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value = "main")]
    pub mode: String,
    /// Mesh output path; the format follows the extension unless `--format` is given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// `theorem` (closed-form vertex hull) or `lp` (region cut out by the margin program).
    #[arg(long, default_value = "theorem")]
    pub hull: String,
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct MemberArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value = "main")]
    pub mode: String,
    /// `1/p,1/q,1/r` as rationals.
    #[arg(long)]
    pub point: String,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct SharpnessArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Print the vertex equality matrix as CSV.
    #[arg(long)]
    pub matrix: bool,
    /// Classify one point `1/p,1/q,1/r` against every test.
    #[arg(long)]
    pub point: Option<String>,
    /// Assouad spectrum inputs; both default to the Assouad-regular choice.
    #[arg(long)]
    pub theta: Option<String>,
    #[arg(long)]
    pub gamma_theta: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct FractalArgs {
    #[arg(long, default_value = "cantor:a=7,b=10")]
    pub set: String,
    /// Fit the Minkowski slope and compare it with the nominal dimension.
    #[arg(long)]
    pub dims: bool,
    #[arg(long, default_value_t = 4)]
    pub jmin: u32,
    #[arg(long, default_value_t = 14)]
    pub jmax: u32,
    /// Also fit the Assouad spectrum at this `θ`.
    #[arg(long)]
    pub theta: Option<String>,
    /// Print the cover endpoints at scale `2^{-j}`.
    #[arg(long)]
    pub cover: Option<u32>,
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct ExperimentArgs {
    /// shell, ball, knapp, multishell, multiknapp or embedding.
    #[arg(long, default_value = "shell")]
    pub example: String,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// A rational `>= 1` or `inf`.
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub jmin: Option<u32>,
    #[arg(long)]
    pub jmax: Option<u32>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Random draws (trials for `embedding`).
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Ratio bound for `embedding`.
    #[arg(long, default_value_t = 10.0)]
    pub bound: f64,
    /// Write the per-scale table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub svg: PathBuf,
    /// Azimuth and elevation in degrees.
    #[arg(long, default_value = "35,20")]
    pub view: String,
}

/// Result of one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

fn failure(check: &str, detail: impl Into<String>) -> Failure {
    Failure { check: check.into(), detail: detail.into() }
}

struct Report {
    value: Value,
    text: String,
    failures: Vec<Failure>,
    /// Values filled in from defaults, merged into the echoed config.
    resolved: Map<String, Value>,
}

/// Finds `--config FILE` in raw arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    const NAMES: [&str; 7] = ["exponents", "region", "member", "sharpness", "fractal", "experiment", "render"];
    args.iter().skip(1).position(|a| NAMES.contains(&a.to_string_lossy().as_ref())).map(|i| i + 1)
}

/// Flag tokens for a config object; a nested object under the command name is merged over the top level.
fn config_tokens(path: &Path, command: &str) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
    let Value::Object(top) = root else {
        return Err(Error::Parse("config must be a JSON object".into()));
    };
    let mut merged: Map<String, Value> = Map::new();
    for (k, v) in &top {
        if !v.is_object() {
            merged.insert(k.clone(), v.clone());
        }
    }
    if let Some(Value::Object(sub)) = top.get(command) {
        for (k, v) in sub {
            merged.insert(k.clone(), v.clone());
        }
    }
    let mut out = Vec::new();
    for (k, v) in merged {
        if k == "config" || k == "command" {
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => {
                out.push(flag.into());
                out.push(s.into());
            }
            Value::Number(n) => {
                out.push(flag.into());
                out.push(n.to_string().into());
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string()))
                    .collect();
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            Value::Object(_) => return Err(Error::Parse(format!("config key {k:?} has an object value"))),
        }
    }
    Ok(out)
}

/// Parses, merges the config file and runs; never panics on user input.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let (Some(path), Some(at)) = (config_path(&args), subcommand_index(&args)) {
        let command = args[at].to_string_lossy().to_string();
        match config_tokens(&path, &command) {
            Ok(tokens) => {
                args.splice(at + 1..at + 1, tokens);
            }
            Err(e) => return error_outcome(&e.to_string(), false),
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    execute(&cli)
}

fn error_outcome(msg: &str, json: bool) -> Outcome {
    if json {
        Outcome {
            code: 2,
            stdout: format!("{}\n", json!({ "error": msg })),
            stderr: format!("error: {msg}\n"),
        }
    } else {
        Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let mut config = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let result = match &cli.command {
        Command::Exponents(a) => cmd_exponents(a),
        Command::Region(a) => cmd_region(a),
        Command::Member(a) => cmd_member(a),
        Command::Sharpness(a) => cmd_sharpness(a),
        Command::Fractal(a) => cmd_fractal(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Render(a) => cmd_render(a),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return error_outcome(&e.to_string(), cli.json),
    };
    if let Value::Object(c) = &mut config {
        for (k, v) in &report.resolved {
            c.insert(k.clone(), v.clone());
        }
    }
    let code = if report.failures.is_empty() { 0 } else { 1 };
    let failures = serde_json::to_value(&report.failures).unwrap_or(Value::Null);
    if cli.json {
        let mut body = match report.value {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        body.insert("config".into(), config);
        body.insert("failures".into(), failures);
        let text = serde_json::to_string_pretty(&Value::Object(body)).unwrap_or_default();
        Outcome { code, stdout: format!("{text}\n"), stderr: String::new() }
    } else {
        let mut stderr = format!("config: {config}\n");
        if code != 0 {
            stderr.push_str(&format!("{}\n", json!({ "failures": failures })));
        }
        Outcome { code, stdout: report.text, stderr }
    }
}

fn params(a: &ParamArgs) -> Result<DimensionParams> {
    let beta = parse_rational(&a.beta)?;
    let gamma = match &a.gamma {
        Some(g) => parse_rational(g)?,
        None => beta.clone(),
    };
    DimensionParams::new(a.d, beta, gamma)
}

fn params_relaxed(a: &ParamArgs) -> Result<(DimensionParams, bool)> {
    match params(a) {
        Ok(p) => Ok((p, true)),
        Err(Error::InvalidParams(_)) => {
            let beta = parse_rational(&a.beta)?;
            let gamma = match &a.gamma {
                Some(g) => parse_rational(g)?,
                None => beta.clone(),
            };
            Ok((DimensionParams::relaxed(a.d, beta, gamma)?, false))
        }
        Err(e) => Err(e),
    }
}

fn resolved_gamma(p: &DimensionParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("gamma".into(), json!(fmt_rational(&p.gamma)));
    m
}

fn triple_json(t: &Triple) -> Value {
    json!(t.to_strings())
}

fn cmd_exponents(a: &ParamArgs) -> Result<Report> {
    let (p, valid) = params_relaxed(a)?;
    let mut rows = Vec::new();
    let mut text = format!("# {p}{}\n", if valid { "" } else { " (outside 0 < beta <= gamma <= 1)" });
    text.push_str(&format!("{:<8} {:>14} {:>14} {:>14}  note\n", "vertex", "1/p", "1/q", "1/r"));
    for v in Vertex::ALL {
        match named_vertex(v, &p) {
            Ok(nv) => {
                let s = nv.value.to_strings();
                let note = if nv.flagged { "outside unit cube" } else { "" };
                text.push_str(&format!("{:<8} {:>14} {:>14} {:>14}  {note}\n", v.name(), s[0], s[1], s[2]));
                rows.push(json!({ "name": v.name(), "point": s, "flagged": nv.flagged }));
            }
            Err(e) => {
                text.push_str(&format!("{:<8} {:>14} {:>14} {:>14}  {e}\n", v.name(), "-", "-", "-"));
                rows.push(json!({ "name": v.name(), "error": e.to_string() }));
            }
        }
    }
    let inv = |x: Rational| if x.is_zero() { "inf".to_string() } else { fmt_rational(&x.recip()) };
    let qg = inv(inv_q_gamma(&p));
    let qls = inv(inv_q_ls(&p));
    text.push_str(&format!("q_gamma = {qg}\nq_LS = {qls}\n"));
    Ok(Report {
        value: json!({ "params": p.to_string(), "valid": valid, "vertices": rows, "q_gamma": qg, "q_ls": qls }),
        text,
        failures: Vec::new(),
        resolved: resolved_gamma(&p),
    })
}

fn default_aux(mode: Mode, p: &DimensionParams) -> Option<Aux> {
    (mode == Mode::Main && p.beta < p.gamma).then(|| Aux::assouad_regular(p))
}

fn cmd_region(a: &RegionArgs) -> Result<Report> {
    let p = params(&a.params)?;
    let mode: Mode = a.mode.parse()?;
    check_regime(mode, &p)?;
    let cat = Catalog::new(mode, &p)?;
    let poly = match a.hull.as_str() {
        "theorem" => theorem_hull(mode, &p)?,
        "lp" => region_polytope(&cat)?,
        other => return Err(Error::Parse(format!("unknown hull {other:?} (expected theorem, lp)"))),
    };
    if poly.is_degenerate() {
        return Err(Error::Degenerate(poly.dim));
    }
    let aux = default_aux(mode, &p);
    let labels = classify_facets(&poly, &p, aux.as_ref())?;
    let names: Vec<String> = labels.iter().map(FacetLabel::name).collect();
    let watertight = is_watertight(&poly.triangles());
    let unclassified = labels.iter().filter(|l| **l == FacetLabel::Unclassified).count();
    let report = region_matches_theorem(&cat, mode.theorem_vertices(), a.grid)?;

    let mut failures = Vec::new();
    if !watertight {
        failures.push(failure("watertight", "mesh has unmatched edges"));
    }
    if !report.all_vertices_zero {
        let bad: Vec<String> = report.vertices.iter().filter(|v| !v.zero).map(|v| v.name.to_string()).collect();
        failures.push(failure("vertex_margin_zero", bad.join(",")));
    }
    if !report.disagreements.is_empty() {
        failures.push(failure(
            "grid_agreement",
            format!("{} of {} grid points disagree", report.disagreements.len(), report.grid_points),
        ));
    }
    if unclassified > 1 {
        failures.push(failure("facet_classification", format!("{unclassified} unclassified facets")));
    }

    let mut mesh_path = None;
    if let Some(out) = &a.out {
        let fmt: MeshFormat = match &a.format {
            Some(f) => f.parse()?,
            None => out.extension().and_then(|e| e.to_str()).unwrap_or("obj").parse()?,
        };
        let bytes = export_mesh_with(&poly, fmt, a.precision, Some(&names))?;
        std::fs::write(out, bytes)?;
        mesh_path = Some(out.display().to_string());
    }

    let facets: Vec<Value> = poly
        .facets
        .iter()
        .zip(&labels)
        .map(|(f, l)| {
            let c = f.plane.canonical();
            json!({
                "label": l.name(),
                "color": l.color(),
                "normal": c.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "offset": c.offset.to_string(),
                "vertices": f.vertices.iter().map(|&i| poly.vertices[i].to_strings()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = format!("# {mode} {p}, {} hull\n", a.hull);
    text.push_str(&format!("vertices: {}\nfacets: {}\n", poly.vertices.len(), poly.facets.len()));
    for (l, f) in labels.iter().zip(&poly.facets) {
        let c = f.plane.canonical();
        text.push_str(&format!(
            "  {:<22} {}*1/p + {}*1/q + {}*1/r <= {}\n",
            l.name(),
            c.normal[0],
            c.normal[1],
            c.normal[2],
            c.offset
        ));
    }
    text.push_str("theorem vertices:\n");
    for v in &report.vertices {
        text.push_str(&format!(
            "  {:<8} ({}) margin {}\n",
            v.name.name(),
            v.point.join(", "),
            v.margin.as_deref().unwrap_or("infeasible")
        ));
    }
    text.push_str(&format!(
        "grid {}^3: {} disagreements\nwatertight: {watertight}\nunclassified facets: {unclassified}\n",
        report.grid_n,
        report.disagreements.len()
    ));
    if let Some(m) = &mesh_path {
        text.push_str(&format!("mesh: {m}\n"));
    }
    Ok(Report {
        value: json!({
            "mode": mode.to_string(),
            "params": p.to_string(),
            "hull": a.hull,
            "vertices": poly.vertices.iter().map(Triple::to_strings).collect::<Vec<_>>(),
            "facets": facets,
            "unclassified_facets": unclassified,
            "watertight": watertight,
            "mesh": mesh_path,
            "grid_report": report,
        }),
        text,
        failures,
        resolved: resolved_gamma(&p),
    })
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::Inside => "inside",
        Membership::Boundary => "boundary",
        Membership::Outside => "outside",
    }
}

fn cmd_member(a: &MemberArgs) -> Result<Report> {
    let p = params(&a.params)?;
    let mode: Mode = a.mode.parse()?;
    check_regime(mode, &p)?;
    let x = Triple::parse(&a.point)?;
    if !x.in_unit_cube() {
        return Err(Error::OutOfRange(format!("point {x} outside [0,1]^3")));
    }
    let cat = Catalog::new(mode, &p)?;
    let margin = achievable_margin(&x, &cat)?;
    let (membership, relative) = hull_membership(mode, &p, &x)?;
    let lp_inside = margin.as_ref().is_some_and(|m| m.is_positive());
    let aux = default_aux(mode, &p);
    let mut tests = Vec::new();
    for id in TestId::ALL {
        if id.needs_aux() && aux.is_none() {
            continue;
        }
        let t = SharpnessTest::new(id, &p, aux.as_ref())?;
        tests.push(json!({ "test": id, "status": t.status, "classification": t.classify(&x), "gap": fmt_rational(&t.gap(&x)) }));
    }
    let mut failures = Vec::new();
    if lp_inside != relative {
        failures.push(failure(
            "region_agreement",
            format!("margin positive = {lp_inside}, inside theorem hull = {relative}"),
        ));
    }
    let m = margin.as_ref().map(fmt_rational);
    let text = format!(
        "# {mode} {p}\npoint: ({})\nmargin: {}\nhull: {}\ninside (domain-relative): {relative}\n",
        x.to_strings().join(", "),
        m.as_deref().unwrap_or("infeasible"),
        membership_name(membership)
    );
    Ok(Report {
        value: json!({
            "mode": mode.to_string(),
            "params": p.to_string(),
            "point": triple_json(&x),
            "margin": m,
            "margin_positive": lp_inside,
            "hull": membership_name(membership),
            "inside_relative": relative,
            "tests": tests,
        }),
        text,
        failures,
        resolved: resolved_gamma(&p),
    })
}

fn cmd_sharpness(a: &SharpnessArgs) -> Result<Report> {
    let p = params(&a.params)?;
    let regular = Aux::assouad_regular(&p);
    let aux = Aux {
        theta: match &a.theta {
            Some(t) => parse_rational(t)?,
            None => regular.theta,
        },
        gamma_theta: match &a.gamma_theta {
            Some(g) => parse_rational(g)?,
            None => regular.gamma_theta,
        },
    };
    let m = equality_matrix(&p, Some(&aux))?;
    let mut tests = Vec::new();
    for id in TestId::ALL {
        let t = SharpnessTest::new(id, &p, Some(&aux))?;
        let aff = |f: &crate::sharpness::Affine| {
            json!({ "coef": f.coef.iter().map(fmt_rational).collect::<Vec<_>>(), "constant": fmt_rational(&f.constant) })
        };
        let mut row = json!({
            "test": id,
            "status": t.status,
            "lhs": aff(&t.lhs),
            "rhs": aff(&t.rhs),
            "equality": m.equality_set(id).iter().map(|v| v.name()).collect::<Vec<_>>(),
        });
        if let Some(pt) = &a.point {
            let x = Triple::parse(pt)?;
            row["classification"] = json!(t.classify(&x));
            row["gap"] = json!(fmt_rational(&t.gap(&x)));
        }
        tests.push(row);
    }
    let text = if a.matrix {
        m.to_csv()?
    } else {
        let mut s = format!("# {p}, theta={}, gamma_theta={}\n", m.theta, m.gamma_theta);
        for row in &tests {
            let eq: Vec<&str> = row["equality"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
            s.push_str(&format!("{:<22} {:<12} equality at {{{}}}", row["test"].as_str().unwrap_or(""), row["status"].as_str().unwrap_or(""), eq.join(", ")));
            if let Some(c) = row.get("classification").and_then(Value::as_str) {
                s.push_str(&format!("  point: {c}"));
            }
            s.push('\n');
        }
        s
    };
    Ok(Report {
        value: json!({ "params": p.to_string(), "theta": m.theta, "gamma_theta": m.gamma_theta, "tests": tests, "matrix": m }),
        text,
        failures: Vec::new(),
        resolved: resolved_gamma(&p),
    })
}

fn cmd_fractal(a: &FractalArgs) -> Result<Report> {
    let s = DilationSet::parse_for_scale(&a.set, a.jmax)?;
    let mut value = json!({ "set": s.descriptor(), "intervals": s.len(), "measure": fmt_rational(&s.measure()) });
    let mut text = format!("# {} ({} intervals, measure {})\n", s.descriptor(), s.len(), fmt_rational(&s.measure()));
    let mut failures = Vec::new();
    if a.jmax < a.jmin {
        return Err(Error::InvalidParams(format!("jmax {} < jmin {}", a.jmax, a.jmin)));
    }
    if !a.dims {
        let counts: Vec<(u32, String)> =
            (a.jmin..=a.jmax).map(|j| (j, covering_number_dyadic(&s, j).to_string())).collect();
        text.push_str("j,N\n");
        for (j, c) in &counts {
            text.push_str(&format!("{j},{c}\n"));
        }
        value["counts"] = json!(counts.iter().map(|(j, c)| json!({ "j": j, "n": c })).collect::<Vec<_>>());
    }
    if a.dims {
        let fit = minkowski_fit(&s, a.jmin, a.jmax)?;
        let nominal = crate::geometry::to_f64(&crate::numerics::set_dimension(&s));
        text.push_str("j,N\n");
        for (j, c) in (fit.jmin..=fit.jmax).zip(&fit.counts) {
            text.push_str(&format!("{j},{c}\n"));
        }
        text.push_str(&format!(
            "minkowski slope {:.4} (residual {:.4}, secant {:.4}, nominal {nominal})\n",
            fit.slope, fit.residual, fit.secant_slope
        ));
        if (fit.slope - nominal).abs() > a.tol {
            failures.push(failure(
                "minkowski_slope",
                format!("slope {:.4} differs from {nominal} by more than {}", fit.slope, a.tol),
            ));
        }
        let viol = monotonicity_violations(&s, a.jmin, a.jmax);
        if !viol.is_empty() {
            failures.push(failure("covering_monotonicity", format!("{viol:?}")));
        }
        value["minkowski"] = serde_json::to_value(&fit).unwrap_or(Value::Null);
        value["nominal_dimension"] = json!(nominal);
        value["monotonicity_violations"] = json!(viol);
    }
    if let Some(t) = &a.theta {
        let fit = assouad_spectrum_fit(&s, &parse_rational(t)?, a.jmin, a.jmax)?;
        text.push_str(&format!("assouad spectrum slope {:.4} at theta {}\n", fit.slope, fit.theta));
        value["spectrum"] = serde_json::to_value(&fit).unwrap_or(Value::Null);
    }
    if let Some(j) = a.cover {
        let c = zj_cover(&s, j);
        text.push_str(&format!("cover at 2^-{j}: {} points\n", c.len()));
        value["cover"] = serde_json::to_value(&c).unwrap_or(Value::Null);
    }
    Ok(Report { value, text, failures, resolved: Map::new() })
}

fn reciprocal(s: &str) -> Result<Rational> {
    let e: Exponent = s.parse()?;
    if let Exponent::Finite(x) = &e {
        if x < &Rational::from_integer(1.into()) {
            return Err(Error::InvalidParams(format!("exponent {s} < 1")));
        }
    }
    Ok(e.reciprocal())
}

fn seed_or_default(a: &ExperimentArgs) -> u64 {
    a.seed.unwrap_or(DEFAULT_SEED)
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<Report> {
    if a.example.eq_ignore_ascii_case("embedding") {
        return cmd_embedding(a);
    }
    let example: Example = a.example.parse()?;
    let mut spec = ExperimentSpec::default_for(example);
    if let Some(s) = &a.set {
        spec.set = s.clone();
    }
    if let Some(d) = a.d {
        spec.d = d;
    }
    if let Some(p) = &a.p {
        spec.point.ip = reciprocal(p)?;
    }
    if let Some(q) = &a.q {
        spec.point.iq = reciprocal(q)?;
    }
    if let Some(r) = &a.r {
        spec.point.ir = reciprocal(r)?;
    }
    if let Some(j) = a.jmin {
        spec.jmin = j;
    }
    if let Some(j) = a.jmax {
        spec.jmax = j;
    }
    if let Some(n) = a.nodes {
        spec.nodes = n;
    }
    if let Some(n) = a.draws {
        spec.draws = n;
    }
    spec.seed = seed_or_default(a);
    if let Some(t) = a.tol {
        spec.tolerance = t;
    }
    let report = run_experiment(&spec)?;
    let csv = report.to_csv()?;
    if let Some(path) = &a.csv {
        std::fs::write(path, &csv)?;
    }
    let mut failures = Vec::new();
    let v = &report.verdict;
    if !v.lhs_ok {
        failures.push(failure("lhs_slope", format!("{:.4} vs {:.4}", report.slope_lhs, report.predicted_lhs)));
    }
    if !v.rhs_ok {
        failures.push(failure("rhs_slope", format!("{:.4} vs {:.4}", report.slope_rhs, report.predicted_rhs)));
    }
    if !v.gap_ok {
        failures.push(failure("gap", format!("{:.4} vs {:.4}", report.gap_measured, report.gap_predicted)));
    }
    if v.v_ok == Some(false) {
        failures.push(failure(
            "variation_growth",
            format!("{:.4} vs {:.4}", report.slope_v.unwrap_or(f64::NAN), report.predicted_v.unwrap_or(f64::NAN)),
        ));
    }
    let mut text = csv;
    text.push_str(&format!(
        "# {} ({}): lhs slope {:.4} (predicted {:.4}), rhs slope {:.4} (predicted {:.4}), gap {:.4} (predicted {:.4})",
        example,
        report.test,
        report.slope_lhs,
        report.predicted_lhs,
        report.slope_rhs,
        report.predicted_rhs,
        report.gap_measured,
        report.gap_predicted
    ));
    if let (Some(s), Some(pv)) = (report.slope_v, report.predicted_v) {
        text.push_str(&format!(", variation growth {s:.4} (predicted {pv:.4})"));
    }
    text.push_str(&format!(", {}\n", if v.pass { "pass" } else { "fail" }));
    Ok(Report {
        value: serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?,
        text,
        failures,
        resolved: experiment_resolved(&report),
    })
}

fn experiment_resolved(report: &crate::numerics::ExperimentReport) -> Map<String, Value> {
    let mut m = match serde_json::to_value(&report.spec) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    m.remove("example");
    if let Some(t) = m.remove("tolerance") {
        m.insert("tol".into(), t);
    }
    m
}

fn cmd_embedding(a: &ExperimentArgs) -> Result<Report> {
    let set = a.set.clone().unwrap_or_else(|| "cantor:a=1,b=2".into());
    let (jmin, jmax) = (a.jmin.unwrap_or(4), a.jmax.unwrap_or(10));
    let trials = a.draws.unwrap_or(64);
    let scan = embedding_scan(&set, jmin, jmax, trials, seed_or_default(a), a.bound)?;
    let mut csv = String::from("j,cover,samples,max_ratio,mean_ratio\n");
    for r in &scan.rows {
        csv.push_str(&format!("{},{},{},{},{}\n", r.j, r.cover_len, r.samples, r.max_ratio, r.mean_ratio));
    }
    if let Some(path) = &a.csv {
        std::fs::write(path, &csv)?;
    }
    let mut failures = Vec::new();
    if !scan.bounded {
        failures.push(failure("bounded", format!("max ratio {:.4} > {}", scan.max_ratio, scan.bound)));
    }
    if !scan.trend_clean {
        failures.push(failure("trend", format!("slope {:.4}", scan.trend_slope)));
    }
    let mut text = csv;
    text.push_str(&format!(
        "# embedding (heuristic surrogate): max ratio {:.4}, trend slope {:.4}\n",
        scan.max_ratio, scan.trend_slope
    ));
    Ok(Report {
        value: serde_json::to_value(&scan).map_err(|e| Error::Io(e.to_string()))?,
        text,
        failures,
        resolved: json!({ "set": set, "jmin": jmin, "jmax": jmax, "draws": trials, "seed": seed_or_default(a) }).as_object().cloned().unwrap_or_default(),
    })
}

fn cmd_render(a: &RenderArgs) -> Result<Report> {
    let view: View = a.view.parse()?;
    let text = std::fs::read_to_string(&a.input)?;
    let mesh = parse_obj(&text)?;
    let svg = render_svg(&mesh, view)?;
    std::fs::write(&a.svg, &svg)?;
    Ok(Report {
        value: json!({ "input": a.input.display().to_string(), "svg": a.svg.display().to_string(), "faces": mesh.faces.len(), "bytes": svg.len() }),
        text: format!("wrote {} ({} faces)\n", a.svg.display(), mesh.faces.len()),
        failures: Vec::new(),
        resolved: Map::new(),
    })
}
