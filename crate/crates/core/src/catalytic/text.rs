//! Line-oriented circuit files.
//!
//! ```text
//! # comment
//! WORK 2
//! CAT 1
//! OUTPUT 0
//! MODE unitary          # optional; MEASURE lines imply general
//! GATE H 0
//! GATE CNOT 0 2
//! GATE PERM swap.perm 1 2
//! MEASURE 1
//! ```
//!
//! `PERM` reads a side-file (resolved relative to the circuit file) holding
//! a `QUBITS k` header and `i j` index pairs; unlisted indices are fixed.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::circuit::{CatalyticCircuit, CircuitMode, Step};
use super::gate::{Gate, Permutation};
use super::CircuitError;

fn parse_err(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, message: message.into() }
}

fn fixed_gate(name: &str) -> Option<Gate> {
    Some(match name.to_ascii_uppercase().as_str() {
        "X" => Gate::X,
        "Y" => Gate::Y,
        "Z" => Gate::Z,
        "H" => Gate::H,
        "S" => Gate::S,
        "SDG" => Gate::Sdg,
        "T" => Gate::T,
        "TDG" => Gate::Tdg,
        "CNOT" | "CX" => Gate::Cnot,
        "CZ" => Gate::Cz,
        "SWAP" => Gate::Swap,
        "TOFFOLI" | "CCX" => Gate::Toffoli,
        _ => return None,
    })
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize, CircuitError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

/// Parses circuit text; `resolve` loads the permutation named on a PERM line.
pub fn parse_circuit(
    text: &str,
    mut resolve: impl FnMut(&str) -> Result<Permutation, String>,
) -> Result<CatalyticCircuit, CircuitError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty())
        .collect();

    let mut work = None;
    let mut cat = None;
    let mut output = None;
    let mut mode = None;
    let mut first_step = lines.len();
    for (idx, (line, toks)) in lines.iter().enumerate() {
        let key = toks[0].to_ascii_uppercase();
        match key.as_str() {
            "WORK" | "CAT" | "OUTPUT" | "MODE" if idx > first_step => {
                return Err(parse_err(*line, format!("{key} must precede all steps")));
            }
            "WORK" => work = Some(parse_usize(toks.get(1).copied(), *line, "work width")?),
            "CAT" => cat = Some(parse_usize(toks.get(1).copied(), *line, "catalytic width")?),
            "OUTPUT" => output = Some(parse_usize(toks.get(1).copied(), *line, "output qubit")?),
            "MODE" => {
                mode = Some(match toks.get(1).map(|s| s.to_ascii_lowercase()).as_deref() {
                    Some("unitary") => CircuitMode::Unitary,
                    Some("general") => CircuitMode::General,
                    _ => return Err(parse_err(*line, "MODE must be unitary or general")),
                })
            }
            "GATE" | "MEASURE" => first_step = first_step.min(idx),
            other => return Err(parse_err(*line, format!("unknown directive {other:?}"))),
        }
    }
    let header_line = lines.first().map_or(1, |l| l.0);
    let work = work.ok_or_else(|| parse_err(header_line, "missing WORK header"))?;
    let cat = cat.ok_or_else(|| parse_err(header_line, "missing CAT header"))?;
    let output = output.unwrap_or(0);
    let has_measure = lines.iter().any(|(_, t)| t[0].eq_ignore_ascii_case("MEASURE"));
    let mode = mode.unwrap_or(if has_measure { CircuitMode::General } else { CircuitMode::Unitary });
    let mut circuit = CatalyticCircuit::new(work, cat, output, mode).map_err(|e| parse_err(header_line, e.to_string()))?;

    let mut perm_cache: HashMap<String, std::sync::Arc<Permutation>> = HashMap::new();
    for (line, toks) in &lines[first_step..] {
        let step = if toks[0].eq_ignore_ascii_case("MEASURE") {
            if toks.len() != 2 {
                return Err(parse_err(*line, "MEASURE takes one qubit"));
            }
            Step::Measure { qubit: parse_usize(toks.get(1).copied(), *line, "qubit")? }
        } else {
            let name = toks.get(1).ok_or_else(|| parse_err(*line, "GATE needs a name"))?;
            let (gate, rest) = if name.eq_ignore_ascii_case("PERM") {
                let file = toks.get(2).ok_or_else(|| parse_err(*line, "PERM needs a permutation file"))?;
                let perm = match perm_cache.get(*file) {
                    Some(p) => p.clone(),
                    None => {
                        let p = std::sync::Arc::new(resolve(file).map_err(|e| parse_err(*line, format!("{file}: {e}")))?);
                        perm_cache.insert(file.to_string(), p.clone());
                        p
                    }
                };
                (Gate::Perm(perm), &toks[3..])
            } else {
                let gate = fixed_gate(name).ok_or_else(|| parse_err(*line, format!("unknown gate {name:?}")))?;
                (gate, &toks[2..])
            };
            let targets = rest
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(*line, format!("invalid qubit {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Step::Gate { gate, targets }
        };
        circuit.push(step).map_err(|e| parse_err(*line, e.to_string()))?;
    }
    Ok(circuit)
}

/// Reads a circuit file, resolving PERM side-files next to it.
pub fn read_circuit(path: &Path) -> Result<CatalyticCircuit, CircuitError> {
    let text = fs::read_to_string(path).map_err(|e| CircuitError::Io(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_circuit(&text, |name| {
        let p = dir.join(name);
        let body = fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        Permutation::parse(&body)
    })
}

/// Renders the circuit; `name_perm` returns the side-file name for each
/// distinct permutation.
pub fn circuit_to_text(
    circuit: &CatalyticCircuit,
    mut name_perm: impl FnMut(&Permutation) -> String,
) -> Result<String, CircuitError> {
    let mut out = format!(
        "WORK {}\nCAT {}\nOUTPUT {}\nMODE {}\n",
        circuit.work_width(),
        circuit.catalytic_width(),
        circuit.output_qubit(),
        match circuit.mode() {
            CircuitMode::Unitary => "unitary",
            CircuitMode::General => "general",
        }
    );
    let join = |t: &[usize]| t.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
    for (i, step) in circuit.steps().iter().enumerate() {
        match step {
            Step::Gate { gate: Gate::Perm(p), targets } => {
                out.push_str(&format!("GATE PERM {} {}\n", name_perm(p), join(targets)));
            }
            Step::Gate { gate: Gate::Unitary(_), .. } | Step::Channel { .. } => {
                return Err(CircuitError::NotSerializable { step: i });
            }
            Step::Gate { gate, targets } => out.push_str(&format!("GATE {} {}\n", gate.name(), join(targets))),
            Step::Measure { qubit } => out.push_str(&format!("MEASURE {qubit}\n")),
        }
    }
    Ok(out)
}

/// Writes `path` plus one `<stem>.perm<k>.txt` side-file per distinct
/// permutation. Returns the side-file paths.
pub fn write_circuit(circuit: &CatalyticCircuit, path: &Path) -> Result<Vec<std::path::PathBuf>, CircuitError> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit").to_string();
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut names: HashMap<Permutation, String> = HashMap::new();
    let mut files = Vec::new();
    let text = circuit_to_text(circuit, |p| {
        if let Some(n) = names.get(p) {
            return n.clone();
        }
        let n = format!("{stem}.perm{}.txt", names.len());
        files.push((dir.join(&n), p.to_text()));
        names.insert(p.clone(), n.clone());
        n
    })?;
    let io = |e: std::io::Error, p: &Path| CircuitError::Io(format!("{}: {e}", p.display()));
    fs::write(path, text).map_err(|e| io(e, path))?;
    let mut written = Vec::new();
    for (p, body) in files {
        fs::write(&p, body).map_err(|e| io(e, &p))?;
        written.push(p);
    }
    Ok(written)
}
