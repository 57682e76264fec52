pub mod census;
pub mod compile;
pub mod dqc1;
pub mod verify;

use std::fs;
use std::path::Path;

use catalyst_core::regprog::{parse_program, RegisterProgram};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub(crate) fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub(crate) fn display(path: &Path) -> String {
    path.display().to_string()
}

pub(crate) fn read_program(path: &Path) -> Result<RegisterProgram, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| CliError::from(e).in_file(display(path)))
}

/// `"101"` to `[true, false, true]`, checked against the input count.
pub(crate) fn parse_bits(s: &str, expected: usize) -> Result<Vec<bool>, CliError> {
    let bits = s
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Input(format!("input {s:?} must be a string of 0s and 1s"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if bits.len() != expected {
        return Err(CliError::Input(format!("input {s:?} has {} bits, program takes {expected}", bits.len())));
    }
    Ok(bits)
}

pub(crate) fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
