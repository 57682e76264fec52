//! `--config` files.
//!
//! ```text
//! # applies to every subcommand that has the flag
//! timing = false
//!
//! [verify-catalytic]
//! set = epr
//! tol = 1e-10
//! ```
//!
//! Keys are long flag names (`_` and `-` both work). Flags given on the
//! command line win over the file. Boolean flags take `true` or `false`.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub section: Option<String>,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut section = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| CliError::Input(format!("line {line}: unterminated section header")))?;
            section = Some(name.trim().to_string());
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| CliError::Input(format!("line {line}: expected `key = value`")))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Input(format!("line {line}: empty key")));
        }
        out.push(Entry { line, section: section.clone(), key, value: value.trim().to_string() });
    }
    Ok(out)
}

fn flag_action(cmd: &Command, key: &str) -> Option<ArgAction> {
    cmd.get_arguments().find(|a| a.get_long() == Some(key)).map(|a| a.get_action().clone())
}

fn given(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let prefix = format!("{long}=");
    args.iter().filter_map(|a| a.to_str()).any(|a| a == long || a.starts_with(&prefix))
}

/// Appends the file's flags for `sub` to `args`, skipping any already given.
pub fn merge(root: &Command, sub: &str, path: &Path, mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let entries = parse(&text).map_err(|e| e.in_file(path.display()))?;
    let sub_cmd = root.find_subcommand(sub).ok_or_else(|| CliError::Input(format!("unknown subcommand {sub:?}")))?;
    let lookup = |key: &str| flag_action(sub_cmd, key).or_else(|| flag_action(root, key));
    let mut extra = Vec::new();
    for e in entries {
        let err = |m: String| CliError::Input(format!("{}: line {}: {m}", path.display(), e.line));
        if e.key == "config" {
            return Err(err("config files cannot include other config files".into()));
        }
        match &e.section {
            Some(s) if root.find_subcommand(s).is_none() => return Err(err(format!("unknown section [{s}]"))),
            Some(s) if s != sub => continue,
            _ => {}
        }
        let Some(action) = lookup(&e.key) else {
            let known_elsewhere = root.get_subcommands().any(|c| flag_action(c, &e.key).is_some());
            if e.section.is_none() && known_elsewhere {
                continue;
            }
            return Err(err(format!("unknown flag {:?}", e.key)));
        };
        if given(&args, &e.key) {
            continue;
        }
        match action {
            ArgAction::SetTrue => match e.value.as_str() {
                "true" => extra.push(OsString::from(format!("--{}", e.key))),
                "false" => {}
                v => return Err(err(format!("{} takes true or false, found {v:?}", e.key))),
            },
            _ => extra.push(OsString::from(format!("--{}={}", e.key, e.value))),
        }
    }
    args.extend(extra);
    Ok(args)
}
