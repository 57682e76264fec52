use std::collections::BTreeMap;

use catalyst_core::census::{builtin, runtime_census, CensusReport, BUILTINS};
use catalyst_core::Limits;
use serde_json::json;

use super::to_value;
use crate::error::CliError;
use crate::report::{Outcome, Report, Table};

/// CSV column order for `census`.
pub const COLUMNS: &[&str] = &[
    "automaton",
    "clean_bits",
    "catalytic_bits",
    "configurations",
    "sum",
    "mean",
    "max",
    "mean_bound",
    "distinct_configurations",
    "disjoint",
    "restored",
    "passed",
];

fn row(r: &CensusReport) -> Vec<String> {
    vec![
        r.automaton.clone(),
        r.clean_bits.to_string(),
        r.catalytic_bits.to_string(),
        r.configurations.to_string(),
        r.sum.to_string(),
        r.mean.to_string(),
        r.max.to_string(),
        r.mean_bound.to_string(),
        r.distinct_configurations.to_string(),
        r.disjoint.to_string(),
        r.restored.to_string(),
        r.passed().to_string(),
    ]
}

pub fn run(automaton: Option<&str>, clean: usize, tape: usize, limits: &Limits) -> Result<Outcome, CliError> {
    let names: Vec<&str> = match automaton {
        Some(name) => vec![name],
        None => BUILTINS.to_vec(),
    };
    let config = json!({
        "automata": names,
        "clean": clean,
        "tape": tape,
        "limits": to_value(limits),
    });
    let mut report = Report::new("census", config, 0);
    let mut table = Table::new(COLUMNS);
    let mut passed = true;
    for name in names {
        let aut = builtin(name, clean, tape)?;
        let r = runtime_census(&aut, limits)?;
        passed &= r.passed();
        table.push(row(&r));
        let mut item = to_value(&r);
        // Per-tape times are long; keep the histogram instead.
        item.as_object_mut().expect("struct").remove("times");
        let mut hist = BTreeMap::<u64, u64>::new();
        for &t in &r.times {
            *hist.entry(t).or_default() += 1;
        }
        item["time_histogram"] = json!(hist.into_iter().map(|(t, n)| json!([t, n])).collect::<Vec<_>>());
        item["passed"] = json!(r.passed());
        report.results.push(item);
    }
    report.aggregate = json!({ "passed": passed, "automata": report.results.len() });
    Ok(Outcome { report, table, passed })
}
