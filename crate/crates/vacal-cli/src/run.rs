//! Command engine behind the binary.
//!
//! Every command loads one instance file, computes exactly, and emits JSON.
//! The suite runner replays a directory of instances in sorted filename
//! order, checks recorded expectations, optionally cross-examines results
//! with the sampling oracles, and writes a canonical report whose bytes do
//! not depend on timing, thread count, or platform.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde_json::{json, Value};

use vacal_core::calculus_rules::{self as rules, OptValueInstance, RuleError, RuleReport, Verdict};
use vacal_core::normal_cones::{
    clarke_directional_derivative, clarke_normal_union, clarke_subdifferential,
    clarke_tangent_union, cover_gap, frechet_normal_union, limiting_normal_union,
    limiting_subdifferential, regular_subdifferential, singular_subdifferential, PolyUnion,
};
use vacal_core::oracle::{
    clarke_dirderiv_estimate, frechet_normal_reject, limiting_sample_agrees, sample_vectors,
    subgradient_membership_exact, FrechetCheck, SamplingConfig,
};
use vacal_core::pl_functions::CellPL;
use vacal_core::polyhedra::Cone;
use vacal_core::scalar::{format_scalar, Scalar};

use crate::instance::{
    parse_matrix, parse_point, ExpectedSpec, InstanceFile, Kind, ProbeSpec, RuleSpec, SchemaError,
};
use crate::report::{
    qc_label, relation_label, rule_report_json, union_json, verdict_label,
};

pub struct CmdOutput {
    pub body: Value,
    pub exit: i32,
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input: file errors, JSON syntax, schema
    /// violations, missing rule fields, unknown variants. Exit code 2.
    Input { location: String, message: String },
    /// The computation itself is undefined for this data (unbounded
    /// marginal, violated precondition). Exit code 3, structured object.
    Math { kind: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Math { .. } => 3,
        }
    }

    /// Print the error the way the command contract specifies: input
    /// problems go to stderr, mathematical failures become a structured
    /// object on stdout.
    pub fn emit(&self) {
        match self {
            CliError::Input { location, message } => {
                eprintln!("error at {location}: {message}");
            }
            CliError::Math { kind, message } => {
                let body = json!({ "error": { "kind": kind, "message": message } });
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            }
        }
    }
}

fn input_err(location: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Input {
        location: location.into(),
        message: message.into(),
    }
}

fn schema_err(ctx: &str, e: SchemaError) -> CliError {
    input_err(ctx, e.to_string())
}

fn math_err(e: RuleError) -> CliError {
    let kind = match &e {
        RuleError::Precondition(_) => "precondition",
        RuleError::UnboundedBelow => "unbounded-below",
        RuleError::NotMonotone => "not-monotone",
        RuleError::Function(_) => "function",
    };
    CliError::Math {
        kind,
        message: e.to_string(),
    }
}

pub fn load_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(path.display().to_string(), format!("cannot read file: {e}")))?;
    let inst: InstanceFile = serde_json::from_str(&text).map_err(|e| {
        input_err(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })?;
    inst.validate_version()
        .map_err(|e| schema_err(&path.display().to_string(), e))?;
    Ok(inst)
}

/// Comma-separated rational coordinates from the command line.
pub fn split_point_arg(s: &str) -> Vec<String> {
    s.split(',').map(|c| c.trim().to_string()).collect()
}

fn cone_to_union(c: &Cone) -> PolyUnion {
    if c.is_empty_marker() {
        PolyUnion::new(c.dim(), Vec::new())
    } else {
        PolyUnion::from_poly(c.as_poly().clone())
    }
}

/// Compute whatever a probe asks of a set, function, or mapping instance.
/// The result is always a union of polyhedra in the appropriate dual space.
fn compute_probe(
    inst: &InstanceFile,
    probe: &ProbeSpec,
    ctx: &str,
) -> Result<PolyUnion, CliError> {
    match inst.kind {
        Kind::Set => {
            let spec = inst.set_payload().map_err(|e| schema_err(ctx, e))?;
            let u = spec.to_union().map_err(|e| schema_err(ctx, e))?;
            let x = parse_point(&probe.point, spec.dim).map_err(|e| schema_err(ctx, e))?;
            match probe.variant.as_str() {
                "convex" => {
                    let p = spec.to_single().map_err(|e| schema_err(ctx, e))?;
                    Ok(cone_to_union(&p.normal_cone_convex(&x)))
                }
                "frechet" => Ok(cone_to_union(&frechet_normal_union(&u, &x))),
                "limiting" => Ok(limiting_normal_union(&u, &x).to_poly_union()),
                "clarke" => Ok(cone_to_union(&clarke_normal_union(&u, &x))),
                "tangent" => Ok(cone_to_union(&clarke_tangent_union(&u, &x))),
                other => Err(input_err(
                    ctx,
                    format!(
                        "unknown set variant \"{other}\" (expected convex, frechet, limiting, clarke, or tangent)"
                    ),
                )),
            }
        }
        Kind::Function => {
            let spec = inst.function_payload().map_err(|e| schema_err(ctx, e))?;
            let x = parse_point(&probe.point, spec.dim).map_err(|e| schema_err(ctx, e))?;
            match probe.variant.as_str() {
                "convex" => {
                    let f = spec.to_convex().map_err(|e| schema_err(ctx, e))?;
                    Ok(PolyUnion::from_poly(f.subdifferential(&x)))
                }
                "frechet" => {
                    let f = spec.to_cell().map_err(|e| schema_err(ctx, e))?;
                    Ok(PolyUnion::from_poly(regular_subdifferential(&f, &x)))
                }
                "limiting" => {
                    let f = spec.to_cell().map_err(|e| schema_err(ctx, e))?;
                    Ok(limiting_subdifferential(&f, &x))
                }
                "clarke" => {
                    let f = spec.to_cell().map_err(|e| schema_err(ctx, e))?;
                    Ok(PolyUnion::from_poly(clarke_subdifferential(&f, &x)))
                }
                "singular" => {
                    let f = spec.to_cell().map_err(|e| schema_err(ctx, e))?;
                    Ok(singular_subdifferential(&f, &x).to_poly_union())
                }
                other => Err(input_err(
                    ctx,
                    format!(
                        "unknown function variant \"{other}\" (expected convex, frechet, limiting, clarke, or singular)"
                    ),
                )),
            }
        }
        Kind::Mapping => {
            let spec = inst.mapping_payload().map_err(|e| schema_err(ctx, e))?;
            let m = spec.to_mapping().map_err(|e| schema_err(ctx, e))?;
            let x = parse_point(&probe.point, spec.dim_in).map_err(|e| schema_err(ctx, e))?;
            let y_raw = probe
                .output
                .as_ref()
                .ok_or_else(|| input_err(ctx, "mapping probes need an output point"))?;
            let y = parse_point(y_raw, spec.dim_out).map_err(|e| schema_err(ctx, e))?;
            let ys_raw = probe
                .y_star
                .as_ref()
                .ok_or_else(|| input_err(ctx, "mapping probes need a y_star vector"))?;
            let ys = parse_point(ys_raw, spec.dim_out).map_err(|e| schema_err(ctx, e))?;
            match probe.variant.as_str() {
                "limiting" => Ok(m.coderivative(&x, &y, &ys)),
                "clarke" => Ok(PolyUnion::from_poly(m.clarke_coderivative(&x, &y, &ys))),
                other => Err(input_err(
                    ctx,
                    format!("unknown mapping variant \"{other}\" (expected limiting or clarke)"),
                )),
            }
        }
        Kind::RuleInstance => Err(input_err(
            ctx,
            "rule instances are checked with the rule command, not probed",
        )),
    }
}

pub fn cmd_eval(path: &Path, point: &str) -> Result<CmdOutput, CliError> {
    let ctx = path.display().to_string();
    let inst = load_instance(path)?;
    let spec = inst.function_payload().map_err(|e| schema_err(&ctx, e))?;
    let f = spec.to_cell().map_err(|e| schema_err(&ctx, e))?;
    let coords = split_point_arg(point);
    let x = parse_point(&coords, f.dim()).map_err(|e| schema_err(&ctx, e))?;
    let value = f.eval(&x);
    Ok(CmdOutput {
        body: json!({ "value": value.map(|v| format_scalar(&v)) }),
        exit: 0,
    })
}

pub fn cmd_subdiff(path: &Path, point: &str, variant: &str) -> Result<CmdOutput, CliError> {
    probe_command(path, Kind::Function, point, variant, None, None)
}

pub fn cmd_normal_cone(path: &Path, point: &str, variant: &str) -> Result<CmdOutput, CliError> {
    probe_command(path, Kind::Set, point, variant, None, None)
}

pub fn cmd_coderiv(
    path: &Path,
    point: &str,
    output: &str,
    y_star: &str,
    variant: &str,
) -> Result<CmdOutput, CliError> {
    probe_command(path, Kind::Mapping, point, variant, Some(output), Some(y_star))
}

fn probe_command(
    path: &Path,
    want: Kind,
    point: &str,
    variant: &str,
    output: Option<&str>,
    y_star: Option<&str>,
) -> Result<CmdOutput, CliError> {
    let ctx = path.display().to_string();
    let inst = load_instance(path)?;
    if inst.kind != want {
        return Err(input_err(
            &ctx,
            format!(
                "this command expects a {} instance, the file holds a {}",
                want.label(),
                inst.kind.label()
            ),
        ));
    }
    let probe = ProbeSpec {
        variant: variant.to_string(),
        point: split_point_arg(point),
        output: output.map(split_point_arg),
        y_star: y_star.map(split_point_arg),
    };
    let computed = compute_probe(&inst, &probe, &ctx)?;
    Ok(CmdOutput {
        body: union_json(&computed),
        exit: 0,
    })
}

pub fn cmd_rule(rule_id: &str, path: &Path, assume: bool) -> Result<CmdOutput, CliError> {
    let ctx = path.display().to_string();
    let inst = load_instance(path)?;
    let spec = inst.rule_payload().map_err(|e| schema_err(&ctx, e))?;
    if spec.rule_id != rule_id {
        return Err(input_err(
            &ctx,
            format!(
                "the file is an instance of rule \"{}\", not \"{rule_id}\"",
                spec.rule_id
            ),
        ));
    }
    let report = run_rule(&spec, assume, &ctx)?;
    let exit = if matches!(report.verdict, Verdict::Refuted(_)) {
        1
    } else {
        0
    };
    Ok(CmdOutput {
        body: rule_report_json(&report),
        exit,
    })
}

fn need<'a, T>(
    field: &'a Option<T>,
    rule: &str,
    name: &str,
    ctx: &str,
) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| input_err(ctx, format!("rule {rule} requires field {name}")))
}

fn point_field(
    field: &Option<Vec<String>>,
    dim: usize,
    rule: &str,
    name: &str,
    ctx: &str,
) -> Result<Vec<Scalar>, CliError> {
    let raw = need(field, rule, name, ctx)?;
    parse_point(raw, dim).map_err(|e| input_err(ctx, format!("{name}: {e}")))
}

/// Dispatch a rule instance to the calculus layer. Field extraction reports
/// exactly which field a rule is missing; dimension checks beyond counting
/// coordinates are left to the rules themselves.
pub fn run_rule(spec: &RuleSpec, assume_flag: bool, ctx: &str) -> Result<RuleReport, CliError> {
    let assume = assume_flag || spec.assume_isc.unwrap_or(false);
    let id = spec.rule_id.as_str();
    let report = match id {
        "optimal-value" => {
            let mapping = need(&spec.mapping, id, "mapping", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let objective = need(&spec.objective, id, "objective", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, mapping.dim_in(), id, "x_bar", ctx)?;
            let y = point_field(&spec.y_bar, mapping.dim_out(), id, "y_bar", ctx)?;
            let inst = OptValueInstance::new(mapping, objective, x, y).map_err(math_err)?;
            rules::optimal_value_subdifferential(&inst).map_err(math_err)?
        }
        "chain-scalar" => {
            let f = need(&spec.inner_function, id, "inner_function", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let outer = need(&spec.outer_function, id, "outer_function", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, f.dim(), id, "x_bar", ctx)?;
            rules::chain_rule_scalar(&f, &outer, &x).map_err(math_err)?
        }
        "chain-vector" => {
            let comps = need(&spec.components, id, "components", ctx)?
                .iter()
                .map(|c| c.to_convex())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| schema_err(ctx, e))?;
            let outer = need(&spec.outer_function, id, "outer_function", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let d = comps.first().map(|c| c.dim()).unwrap_or(0);
            let x = point_field(&spec.x_bar, d, id, "x_bar", ctx)?;
            rules::chain_rule_vector(&comps, &outer, &x).map_err(math_err)?
        }
        "constrained-marginal" => {
            let objective = need(&spec.objective, id, "objective", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let constraint = need(&spec.constraint, id, "constraint", ctx)?
                .to_single()
                .map_err(|e| schema_err(ctx, e))?;
            let dx = objective.dim().saturating_sub(constraint.dim());
            let x = point_field(&spec.x_bar, dx, id, "x_bar", ctx)?;
            let y = point_field(&spec.y_bar, constraint.dim(), id, "y_bar", ctx)?;
            rules::constrained_marginal_rule(&objective, &constraint, &x, &y).map_err(math_err)?
        }
        "affine-preimage" => {
            let objective = need(&spec.objective, id, "objective", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let raw_map = need(&spec.map, id, "map", ctx)?;
            let map = parse_matrix(raw_map, objective.dim()).map_err(|e| schema_err(ctx, e))?;
            let n = map.len();
            let offset = point_field(&spec.offset, n, id, "offset", ctx)?;
            let x = point_field(&spec.x_bar, n, id, "x_bar", ctx)?;
            let y = point_field(&spec.y_bar, objective.dim(), id, "y_bar", ctx)?;
            rules::affine_preimage_rule(&objective, &map, &offset, &x, &y).map_err(math_err)?
        }
        "inf-convolution" => {
            let f1 = need(&spec.f1, id, "f1", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let f2 = need(&spec.f2, id, "f2", ctx)?
                .to_convex()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, f1.dim(), id, "x_bar", ctx)?;
            rules::inf_convolution_rule(&f1, &f2, &x).map_err(math_err)?
        }
        "coderivative-sum" => {
            let m1 = need(&spec.mapping1, id, "mapping1", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let m2 = need(&spec.mapping2, id, "mapping2", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, m1.dim_in(), id, "x_bar", ctx)?;
            let y1 = point_field(&spec.y1_bar, m1.dim_out(), id, "y1_bar", ctx)?;
            let y2 = point_field(&spec.y2_bar, m2.dim_out(), id, "y2_bar", ctx)?;
            let ys = point_field(&spec.y_star, m1.dim_out(), id, "y_star", ctx)?;
            rules::clarke_coderivative_sum_rule(&m1, &m2, &x, &y1, &y2, &ys, assume)
                .map_err(math_err)?
        }
        "normal-intersection" => {
            let u1 = need(&spec.set1, id, "set1", ctx)?
                .to_union()
                .map_err(|e| schema_err(ctx, e))?;
            let u2 = need(&spec.set2, id, "set2", ctx)?
                .to_union()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, u1.dim(), id, "x_bar", ctx)?;
            rules::clarke_intersection_rule(&u1, &u2, &x).map_err(math_err)?
        }
        "subdifferential-sum" => {
            let terms: Vec<CellPL> = need(&spec.terms, id, "terms", ctx)?
                .iter()
                .map(|t| t.to_cell())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| schema_err(ctx, e))?;
            let d = terms.first().map(|t| t.dim()).unwrap_or(0);
            let x = point_field(&spec.x_bar, d, id, "x_bar", ctx)?;
            rules::clarke_subdifferential_sum_rule(&terms, &x).map_err(math_err)?
        }
        "coderivative-chain" => {
            let inner = need(&spec.inner_mapping, id, "inner_mapping", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let outer = need(&spec.outer_mapping, id, "outer_mapping", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, inner.dim_in(), id, "x_bar", ctx)?;
            let y = point_field(&spec.y_bar, inner.dim_out(), id, "y_bar", ctx)?;
            let z = point_field(&spec.z_bar, outer.dim_out(), id, "z_bar", ctx)?;
            let zs = point_field(&spec.z_star, outer.dim_out(), id, "z_star", ctx)?;
            rules::clarke_chain_rule(&inner, &outer, &x, &y, &z, &zs, assume).map_err(math_err)?
        }
        "set-preimage" => {
            let mapping = need(&spec.mapping, id, "mapping", ctx)?
                .to_mapping()
                .map_err(|e| schema_err(ctx, e))?;
            let target = need(&spec.target, id, "target", ctx)?
                .to_union()
                .map_err(|e| schema_err(ctx, e))?;
            let x = point_field(&spec.x_bar, mapping.dim_in(), id, "x_bar", ctx)?;
            let y = point_field(&spec.y_bar, mapping.dim_out(), id, "y_bar", ctx)?;
            rules::clarke_preimage_rule(&mapping, &target, &x, &y, assume).map_err(math_err)?
        }
        "affine-composition" => {
            let outer = need(&spec.outer_function, id, "outer_function", ctx)?
                .to_cell()
                .map_err(|e| schema_err(ctx, e))?;
            let raw_map = need(&spec.map, id, "map", ctx)?;
            let raw_x = need(&spec.x_bar, id, "x_bar", ctx)?;
            let map = parse_matrix(raw_map, raw_x.len()).map_err(|e| schema_err(ctx, e))?;
            let offset = point_field(&spec.offset, outer.dim(), id, "offset", ctx)?;
            let x = point_field(&spec.x_bar, raw_x.len(), id, "x_bar", ctx)?;
            rules::clarke_affine_composition_rule(&outer, &map, &offset, &x).map_err(math_err)?
        }
        other => {
            return Err(input_err(
                ctx,
                format!(
                    "unknown rule id \"{other}\" (known: optimal-value, chain-scalar, chain-vector, \
                     constrained-marginal, affine-preimage, inf-convolution, coderivative-sum, \
                     normal-intersection, subdifferential-sum, coderivative-chain, set-preimage, \
                     affine-composition)"
                ),
            ))
        }
    };
    Ok(report)
}

// ----- suite verification -----

pub struct VerifyOptions {
    pub suite: PathBuf,
    pub oracle: bool,
    pub jobs: usize,
    pub report_path: Option<PathBuf>,
}

struct InstanceOutcome {
    file: String,
    status: &'static str,
    kind: &'static str,
    millis: u128,
    input_error: bool,
    entry: Value,
}

pub fn cmd_verify(opts: &VerifyOptions) -> Result<CmdOutput, CliError> {
    let files = list_suite(&opts.suite)?;
    let results = run_parallel(&files, opts.oracle, opts.jobs.max(1));

    for r in &results {
        eprintln!("{:8} {:13} {} ({} ms)", r.status, r.kind, r.file, r.millis);
    }

    let mut pass = 0usize;
    let mut mismatch = 0usize;
    let mut refuted = 0usize;
    let mut errors = 0usize;
    let mut confirmed = 0usize;
    let mut skipped = 0usize;
    let mut any_input_error = false;
    for r in &results {
        match r.status {
            "pass" => pass += 1,
            "mismatch" => mismatch += 1,
            "refuted" => refuted += 1,
            _ => errors += 1,
        }
        any_input_error |= r.input_error;
        match r.entry.get("verdict").and_then(Value::as_str) {
            Some("confirmed") => confirmed += 1,
            Some("skipped") => skipped += 1,
            _ => {}
        }
    }

    let summary = json!({
        "total": results.len(),
        "pass": pass,
        "mismatch": mismatch,
        "refuted": refuted,
        "error": errors,
        "rule_verdicts": {
            "confirmed": confirmed,
            "skipped": skipped,
            "refuted": refuted,
        },
    });
    let report = json!({
        "schema_version": "1",
        "instances": results.iter().map(|r| r.entry.clone()).collect::<Vec<_>>(),
        "summary": summary,
    });

    let exit = if any_input_error {
        2
    } else if mismatch + refuted + errors > 0 {
        1
    } else {
        0
    };
    eprintln!(
        "{} instances: {pass} pass, {mismatch} mismatch, {refuted} refuted, {errors} error",
        results.len()
    );

    if let Some(path) = &opts.report_path {
        let text = serde_json::to_string_pretty(&report).expect("serializable");
        fs::write(path, text + "\n").map_err(|e| {
            input_err(
                path.display().to_string(),
                format!("cannot write report: {e}"),
            )
        })?;
        Ok(CmdOutput {
            body: summary,
            exit,
        })
    } else {
        Ok(CmdOutput { body: report, exit })
    }
}

fn list_suite(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| {
        input_err(
            dir.display().to_string(),
            format!("cannot read suite directory: {e}"),
        )
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(input_err(
            dir.display().to_string(),
            "the suite directory holds no .json instances",
        ));
    }
    Ok(files)
}

/// Fixed-order work queue: workers pull indices, results land by index, so
/// the report is identical for any job count.
fn run_parallel(files: &[PathBuf], oracle_on: bool, jobs: usize) -> Vec<InstanceOutcome> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<InstanceOutcome>>> =
        Mutex::new((0..files.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(files.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let outcome = run_one(&files[i], oracle_on);
                slots.lock().expect("worker panicked")[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|s| s.expect("every slot filled"))
        .collect()
}

fn run_one(path: &Path, oracle_on: bool) -> InstanceOutcome {
    let started = Instant::now();
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    match run_one_inner(path, &file, oracle_on) {
        Ok(mut outcome) => {
            outcome.millis = started.elapsed().as_millis();
            outcome
        }
        Err(e) => {
            let (kind_label, message) = match &e {
                CliError::Input { location, message } => {
                    ("input", format!("{location}: {message}"))
                }
                CliError::Math { kind, message } => (*kind, message.clone()),
            };
            let entry = json!({
                "file": file,
                "status": "error",
                "error": { "kind": kind_label, "message": message },
            });
            InstanceOutcome {
                file,
                status: "error",
                kind: "?",
                millis: started.elapsed().as_millis(),
                input_error: matches!(e, CliError::Input { .. }),
                entry,
            }
        }
    }
}

fn run_one_inner(path: &Path, file: &str, oracle_on: bool) -> Result<InstanceOutcome, CliError> {
    let ctx = path.display().to_string();
    let inst = load_instance(path)?;
    let kind = inst.kind.label();
    let name = inst.name.clone().unwrap_or_default();

    if inst.kind == Kind::RuleInstance {
        let spec = inst.rule_payload().map_err(|e| schema_err(&ctx, e))?;
        let report = run_rule(&spec, false, &ctx)?;
        let mut checks = Vec::new();
        let mut ok = true;
        if let Some(exp) = &inst.expected {
            ok &= check_rule_expected(&report, exp, &mut checks, &ctx)?;
        }
        let status = if matches!(report.verdict, Verdict::Refuted(_)) {
            "refuted"
        } else if ok {
            "pass"
        } else {
            "mismatch"
        };
        let entry = json!({
            "file": file,
            "name": name,
            "kind": kind,
            "status": status,
            "verdict": verdict_label(&report.verdict),
            "detail": rule_report_json(&report),
            "checks": checks,
        });
        return Ok(InstanceOutcome {
            file: file.to_string(),
            status,
            kind,
            millis: 0,
            input_error: false,
            entry,
        });
    }

    let Some(probe) = inst.probe.as_ref() else {
        // Data-only instance: parsing it is the whole check.
        let entry = json!({
            "file": file,
            "name": name,
            "kind": kind,
            "status": "pass",
            "detail": { "note": "no probe; the instance only has to parse" },
            "checks": [],
        });
        return Ok(InstanceOutcome {
            file: file.to_string(),
            status: "pass",
            kind,
            millis: 0,
            input_error: false,
            entry,
        });
    };

    let computed = compute_probe(&inst, probe, &ctx)?;
    let mut checks = Vec::new();
    let mut ok = true;
    if let Some(exp) = &inst.expected {
        if let Some(result) = &exp.result {
            let expected = result.to_union().map_err(|e| schema_err(&ctx, e))?;
            let same = computed.set_equal(&expected);
            checks.push(json!({
                "check": "expected-result",
                "outcome": if same { "pass" } else { "fail" },
            }));
            ok &= same;
        }
    }
    if oracle_on {
        ok &= run_oracle_checks(&inst, probe, &mut checks, &ctx)?;
    }
    let status = if ok { "pass" } else { "mismatch" };
    let entry = json!({
        "file": file,
        "name": name,
        "kind": kind,
        "status": status,
        "detail": { "computed": union_json(&computed) },
        "checks": checks,
    });
    Ok(InstanceOutcome {
        file: file.to_string(),
        status,
        kind,
        millis: 0,
        input_error: false,
        entry,
    })
}

fn check_rule_expected(
    report: &RuleReport,
    exp: &ExpectedSpec,
    checks: &mut Vec<Value>,
    ctx: &str,
) -> Result<bool, CliError> {
    let mut ok = true;
    let mut push = |name: &str, pass: bool, got: Value| {
        checks.push(json!({
            "check": name,
            "outcome": if pass { "pass" } else { "fail" },
            "got": got,
        }));
        pass
    };
    if let Some(want) = &exp.verdict {
        let got = verdict_label(&report.verdict);
        ok &= push("expected-verdict", got == want, json!(got));
    }
    if let Some(want) = &exp.qc {
        let got = qc_label(&report.qc);
        ok &= push("expected-qc", got == want, json!(got));
    }
    if let Some(want) = &exp.relation {
        let got = relation_label(report.relation);
        ok &= push("expected-relation", got == want, json!(got));
    }
    if let Some(want) = &exp.lhs {
        let want_u = want.to_union().map_err(|e| schema_err(ctx, e))?;
        ok &= push("expected-lhs", report.lhs.set_equal(&want_u), json!("set"));
    }
    if let Some(want) = &exp.rhs {
        let want_u = want.to_union().map_err(|e| schema_err(ctx, e))?;
        ok &= push("expected-rhs", report.rhs.set_equal(&want_u), json!("set"));
    }
    if exp.strict == Some(true) {
        let strict = report.rhs.subset_witness(&report.lhs).is_some();
        ok &= push("expected-strict-inclusion", strict, json!(strict));
    }
    Ok(ok)
}

/// Cross-examine a probe result with the sampling oracles where they apply:
/// subgradient membership on convex functions, directional derivative
/// estimates on functions defined everywhere, and limiting normal sampling
/// on low-dimensional sets.
fn run_oracle_checks(
    inst: &InstanceFile,
    probe: &ProbeSpec,
    checks: &mut Vec<Value>,
    ctx: &str,
) -> Result<bool, CliError> {
    let cfg = SamplingConfig::default();
    let mut ok = true;
    match inst.kind {
        Kind::Function => {
            let spec = inst.function_payload().map_err(|e| schema_err(ctx, e))?;
            let x = parse_point(&probe.point, spec.dim).map_err(|e| schema_err(ctx, e))?;
            if spec.is_convex_form() {
                let f = spec.to_convex().map_err(|e| schema_err(ctx, e))?;
                if f.eval(&x).is_some() {
                    let sub = f.subdifferential(&x);
                    let mut candidates = sample_vectors(f.dim(), 25, &cfg);
                    candidates.extend(sub.vertices().iter().cloned());
                    let agree = candidates
                        .iter()
                        .all(|c| subgradient_membership_exact(&f, &x, c) == sub.contains(c));
                    checks.push(json!({
                        "check": "membership-biconditional",
                        "candidates": candidates.len(),
                        "outcome": if agree { "pass" } else { "fail" },
                    }));
                    ok &= agree;
                }
            }
            let cell = spec.to_cell().map_err(|e| schema_err(ctx, e))?;
            if cover_gap(&cell).is_none() {
                let mut dirs: Vec<Vec<Scalar>> = Vec::new();
                for i in 0..cell.dim() {
                    let mut v = vacal_core::linalg::zeros(cell.dim());
                    v[i] = vacal_core::scalar::one();
                    dirs.push(v.clone());
                    dirs.push(v.iter().map(|c| -c.clone()).collect());
                }
                dirs.push(vec![vacal_core::scalar::one(); cell.dim()]);
                let mut within = true;
                for v in &dirs {
                    let est = clarke_dirderiv_estimate(&cell, &x, v, &cfg);
                    match clarke_directional_derivative(&cell, &x, v) {
                        Some(exact) => {
                            let gap = exact.clone() - est.clone();
                            within &= est <= exact && gap <= cfg.tolerance;
                        }
                        None => within = false,
                    }
                }
                checks.push(json!({
                    "check": "dirderiv-estimate",
                    "directions": dirs.len(),
                    "outcome": if within { "pass" } else { "fail" },
                }));
                ok &= within;
            }
        }
        Kind::Set => {
            let spec = inst.set_payload().map_err(|e| schema_err(ctx, e))?;
            if spec.dim <= 3 {
                let u = spec.to_union().map_err(|e| schema_err(ctx, e))?;
                let x = parse_point(&probe.point, spec.dim).map_err(|e| schema_err(ctx, e))?;
                if u.contains(&x) {
                    let agrees = limiting_sample_agrees(&u, &x, &cfg)
                        .expect("dimension was checked above");
                    checks.push(json!({
                        "check": "limiting-normal-sample",
                        "outcome": if agrees { "pass" } else { "fail" },
                    }));
                    ok &= agrees;

                    let f = frechet_normal_union(&u, &x);
                    if !f.is_empty_marker() {
                        let mut dirs: Vec<Vec<Scalar>> = f.rays().to_vec();
                        for l in f.lineality() {
                            dirs.push(l.clone());
                            dirs.push(l.iter().map(|c| -c.clone()).collect());
                        }
                        let consistent = dirs.iter().all(|d| {
                            matches!(
                                frechet_normal_reject(&u, &x, d, &cfg),
                                FrechetCheck::Consistent
                            )
                        });
                        checks.push(json!({
                            "check": "frechet-consistency",
                            "directions": dirs.len(),
                            "outcome": if consistent { "pass" } else { "fail" },
                        }));
                        ok &= consistent;
                    }
                }
            }
        }
        _ => {}
    }
    Ok(ok)
}
