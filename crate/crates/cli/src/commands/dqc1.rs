use std::path::Path;

use catalyst_core::catalytic::read_circuit;
use catalyst_core::compile::{cycle_wrap, Backend, FlipScheme};
use catalyst_core::dqc1::{
    cl_pipeline, decide_estimate, exact_probabilities, from_unitary_catalytic, sample, Method, OutcomeEstimate, PipelineReport,
    Verdict,
};
use catalyst_core::regprog::{gate_program, threshold_program, GateKind, RegisterProgram};
use catalyst_core::Limits;
use serde_json::{json, Value};

use super::{bit_string, display, parse_bits, read_program, to_value};
use crate::error::CliError;
use crate::report::{Outcome, Report, Table};

/// CSV column order for `run-dqc1`.
pub const COLUMNS: &[&str] = &["target", "method", "p0", "p1", "shots", "standard_error", "verdict"];

/// Built-in programs accepted in pipeline targets.
pub const PROGRAMS: [&str; 4] = ["maj3", "and2", "or2", "xor2"];

fn builtin_program(name: &str) -> Option<RegisterProgram> {
    let prog = match name {
        "maj3" => threshold_program(3, 2, 5),
        "and2" => gate_program(GateKind::And, 2, 3),
        "or2" => gate_program(GateKind::Or, 2, 3),
        "xor2" => gate_program(GateKind::Xor, 2, 3),
        _ => return None,
    };
    Some(prog.expect("built-in programs are valid"))
}

struct Pipeline<'a> {
    program: &'a str,
    bits: &'a str,
    cycles: usize,
    truncate: Option<usize>,
}

/// `pipeline:PROG:BITS:L[:T]`; PROG is a built-in name or a program file.
fn parse_pipeline(spec: &str) -> Result<Option<Pipeline<'_>>, CliError> {
    let Some(rest) = spec.strip_prefix("pipeline:") else {
        return Ok(None);
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let bad = || CliError::Input(format!("pipeline target {spec:?} must look like pipeline:PROG:BITS:L[:T]"));
    if !(3..=4).contains(&parts.len()) || parts[0].is_empty() {
        return Err(bad());
    }
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| CliError::Input(format!("pipeline {what} {s:?} is not a count")));
    let cycles = num(parts[2], "cycle count")?;
    let truncate = parts.get(3).map(|t| num(t, "truncation")).transpose()?;
    Ok(Some(Pipeline { program: parts[0], bits: parts[1], cycles, truncate }))
}

fn load_pipeline_program(p: &Pipeline) -> Result<(RegisterProgram, Vec<bool>), CliError> {
    let prog = match builtin_program(p.program) {
        Some(prog) => prog,
        None if Path::new(p.program).is_file() => read_program(Path::new(p.program))?,
        None => return Err(CliError::Input(format!("pipeline program {:?} is neither a built-in ({}) nor a file", p.program, PROGRAMS.join("|")))),
    };
    let x = parse_bits(p.bits, prog.num_inputs())?;
    Ok((prog, x))
}

fn estimate_json(est: &OutcomeEstimate) -> Value {
    json!({
        "method": est.method,
        "p0": est.p0,
        "p1": est.p1,
        "shots": est.shots,
        "standard_error": est.standard_error,
    })
}

fn contradicts(verdict: Verdict, expected: bool) -> bool {
    matches!((verdict, expected), (Verdict::Yes, false) | (Verdict::No, true))
}

pub fn run(target: &str, shots: Option<u64>, seed: u64, q_bound: Option<f64>, backend: Backend, limits: &Limits) -> Result<Outcome, CliError> {
    if let Some(q) = q_bound {
        if !(q > 0.0) {
            return Err(CliError::Input(format!("q bound must be positive, got {q}")));
        }
    }
    if shots == Some(0) {
        return Err(CliError::Input("--shots must be positive".into()));
    }
    let pipeline = parse_pipeline(target)?;
    let (instance, exact, extra, expected) = match &pipeline {
        Some(p) => {
            let (prog, x) = load_pipeline_program(p)?;
            let t = match p.truncate {
                Some(t) => t,
                None => cycle_wrap(&prog, p.cycles, FlipScheme::PerBlock).map_err(CliError::from)?.len(),
            };
            let r = cl_pipeline(&prog, &x, p.cycles, t, backend, limits)?;
            let extra = pipeline_json(&r, &x, q_bound);
            let census_ok = r.census.wrong == 0 && q_bound.is_none_or(|q| !contradicts(decide_estimate(&census_estimate(&r), q).verdict, r.expected));
            (r.instance, Some(r.dqc), Some((extra, census_ok)), Some(r.expected))
        }
        None => {
            let path = Path::new(target);
            let circuit = read_circuit(path).map_err(|e| CliError::from(e).in_file(display(path)))?;
            (from_unitary_catalytic(&circuit)?, None, None, None)
        }
    };
    let est = match shots {
        Some(n) => sample(&instance, n, seed, limits)?,
        None => match exact {
            Some(e) => e,
            None => exact_probabilities(&instance, limits)?,
        },
    };
    let decision = q_bound.map(|q| decide_estimate(&est, q));

    let config = json!({
        "target": target,
        "method": if shots.is_some() { Method::Sampled } else { Method::Exact },
        "shots": shots,
        "q_bound": q_bound,
        "backend": backend,
        "limits": to_value(limits),
    });
    let mut report = Report::new("run-dqc1", config, seed);
    let mut item = estimate_json(&est);
    item["target"] = json!(target);
    item["clean_qubits"] = json!(instance.clean_count());
    item["mixed_qubits"] = json!(instance.mixed_count());
    if let Some(d) = &decision {
        item["verdict"] = to_value(&d.verdict);
        item["margin_bound"] = json!(d.margin_bound);
    }
    let mut passed = true;
    if let Some((extra, ok)) = extra {
        item["pipeline"] = extra;
        passed = ok;
    }
    report.results.push(item);
    report.aggregate = json!({
        "passed": passed,
        "p1": est.p1,
        "expected": expected,
        "verdict": decision.as_ref().map(|d| to_value(&d.verdict)),
    });

    let mut table = Table::new(COLUMNS);
    let opt = |v: Option<String>| v.unwrap_or_default();
    table.push(vec![
        target.to_string(),
        to_value(&est.method).as_str().unwrap_or_default().to_string(),
        est.p0.to_string(),
        est.p1.to_string(),
        opt(est.shots.map(|s| s.to_string())),
        opt(est.standard_error.map(|s| s.to_string())),
        opt(decision.map(|d| to_value(&d.verdict).as_str().unwrap_or_default().to_string())),
    ]);
    Ok(Outcome { report, table, passed })
}

/// Census success read as the probability of answering `f(x)`.
fn census_estimate(r: &PipelineReport) -> OutcomeEstimate {
    let s = r.census.success;
    let p1 = if r.expected { s } else { 1.0 - s };
    OutcomeEstimate { p0: 1.0 - p1, p1, method: Method::Exact, shots: None, standard_error: None }
}

fn pipeline_json(r: &PipelineReport, x: &[bool], q_bound: Option<f64>) -> Value {
    let mut v = json!({
        "input": bit_string(x),
        "expected": r.expected,
        "cycles": r.cycles,
        "truncate": r.truncate,
        "cycle_length": r.cycle_length,
        "stream_length": r.stream_length,
        "census": to_value(&r.census),
        "predicted_bound": r.predicted_bound,
        "markov_bound": r.markov_bound,
    });
    if let Some(q) = q_bound {
        v["census_verdict"] = to_value(&decide_estimate(&census_estimate(r), q).verdict);
    }
    v
}
