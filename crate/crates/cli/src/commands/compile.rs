use std::path::Path;

use catalyst_core::catalytic::{verify_epr, write_circuit, DEFAULT_TOLERANCE};
use catalyst_core::compile::{compile, Backend, CompileOptions};
use catalyst_core::Limits;
use serde_json::{json, Value};

use super::{bit_string, display, parse_bits, read_program, to_value};
use crate::error::CliError;
use crate::report::{Outcome, Report, Table};

/// CSV column order for `compile`.
pub const COLUMNS: &[&str] = &["program", "input", "backend", "qubits", "work_qubits", "catalytic_qubits", "gates", "stream_length", "cycle_length"];

pub struct Args<'a> {
    pub program: &'a Path,
    pub input: &'a str,
    pub backend: Backend,
    pub cycles: Option<usize>,
    pub truncate: Option<usize>,
    pub out: Option<&'a Path>,
    pub check: bool,
}

pub fn run(args: &Args, limits: &Limits) -> Result<Outcome, CliError> {
    let prog = read_program(args.program)?;
    let x = parse_bits(args.input, prog.num_inputs())?;
    let opts = CompileOptions { backend: args.backend, cycles: args.cycles, truncate: args.truncate, ..Default::default() };
    let art = compile(&prog, &x, &opts, limits)?;
    let circ = &art.circuit;

    let side_files = match args.out {
        Some(out) => write_circuit(circ, out)?.iter().map(|p| display(p)).collect(),
        None => Vec::new(),
    };
    let check = if args.check { Some(verify_epr(circ, DEFAULT_TOLERANCE, limits)?) } else { None };
    let passed = check.as_ref().is_none_or(|r| r.passed);

    let config = json!({
        "program": display(args.program),
        "input": args.input,
        "backend": args.backend,
        "cycles": args.cycles,
        "truncate": args.truncate,
        "out": args.out.map(display),
        "check": args.check,
        "limits": to_value(limits),
    });
    let mut report = Report::new("compile", config, 0);
    report.results.push(json!({
        "program": display(args.program),
        "program_hash": art.program_hash,
        "input": bit_string(&x),
        "backend": args.backend,
        "qubits": circ.num_qubits(),
        "work_qubits": circ.work_width(),
        "catalytic_qubits": circ.catalytic_width(),
        "output_qubit": circ.output_qubit(),
        "gates": circ.len(),
        "gate_counts": to_value(&circ.gate_counts()),
        "stream_length": art.steps.len(),
        "cycle_length": art.cycle_length,
        "layout": to_value(&art.layout),
        "circuit_file": args.out.map(display),
        "side_files": side_files,
        "check": check.as_ref().map(to_value).unwrap_or(Value::Null),
    }));
    report.aggregate = json!({ "passed": passed, "gates": circ.len() });

    let mut table = Table::new(COLUMNS);
    table.push(vec![
        display(args.program),
        bit_string(&x),
        to_value(&args.backend).as_str().unwrap_or_default().to_string(),
        circ.num_qubits().to_string(),
        circ.work_width().to_string(),
        circ.catalytic_width().to_string(),
        circ.len().to_string(),
        art.steps.len().to_string(),
        art.cycle_length.map(|c| c.to_string()).unwrap_or_default(),
    ]);
    Ok(Outcome { report, table, passed })
}
