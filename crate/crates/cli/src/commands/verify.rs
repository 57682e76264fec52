use std::path::Path;

use catalyst_core::catalytic::{read_circuit, verify, CatalyticSet, VerifyOptions};
use catalyst_core::Limits;
use serde_json::json;

use super::{display, to_value};
use crate::error::CliError;
use crate::report::{Outcome, Report, Table};

/// CSV column order for `verify-catalytic`.
pub const COLUMNS: &[&str] = &["circuit", "set", "passed", "max_reset_deviation", "max_output_deviation", "states_tested", "tolerance"];

pub fn run(path: &Path, set: CatalyticSet, tol: f64, trials: usize, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    if !(tol >= 0.0) {
        return Err(CliError::Input(format!("tolerance must be non-negative, got {tol}")));
    }
    let circuit = read_circuit(path).map_err(|e| CliError::from(e).in_file(display(path)))?;
    let opts = VerifyOptions { tolerance: tol, trials, seed, limits: *limits };
    let r = verify(&circuit, set, &opts)?;

    let config = json!({
        "circuit": display(path),
        "set": set,
        "tol": tol,
        "trials": trials,
        "limits": to_value(limits),
    });
    let mut report = Report::new("verify-catalytic", config, seed);
    let mut item = to_value(&r);
    item["circuit"] = json!(display(path));
    item["set"] = to_value(&set);
    item["work_qubits"] = json!(circuit.work_width());
    item["catalytic_qubits"] = json!(circuit.catalytic_width());
    report.results.push(item);
    report.aggregate = json!({ "passed": r.passed, "circuits": 1 });

    let mut table = Table::new(COLUMNS);
    table.push(vec![
        display(path),
        to_value(&set).as_str().unwrap_or_default().to_string(),
        r.passed.to_string(),
        r.max_reset_deviation.to_string(),
        r.max_output_deviation.to_string(),
        r.states_tested.to_string(),
        tol.to_string(),
    ]);
    Ok(Outcome { report, table, passed: r.passed })
}
