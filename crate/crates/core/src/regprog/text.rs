//! Program files.
//!
//! ```text
//! MODULUS 5
//! REGISTERS 3
//! INPUTS 2
//! ADDPOLY r1 r2*r3          # R1 += R2 R3
//! ADD r2 x1
//! SUBPOLY r1 2*r2^2*r3 + 4
//! SUB r2 x1
//! ```
//!
//! Terms are joined by `+` or `-`; a factor is an integer or `r<j>[^e]`.

use super::{Instruction, Monomial, Polynomial, RegProgError, RegisterProgram, Sign};

fn perr(line: usize, message: impl Into<String>) -> RegProgError {
    RegProgError::Parse { line, message: message.into() }
}

fn index(tok: &str, prefix: char, line: usize) -> Result<usize, RegProgError> {
    let body = tok
        .strip_prefix(prefix)
        .or_else(|| tok.strip_prefix(prefix.to_ascii_uppercase()))
        .ok_or_else(|| perr(line, format!("expected {prefix}<index>, found {tok:?}")))?;
    match body.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k - 1),
        _ => Err(perr(line, format!("bad index in {tok:?} (indices start at 1)"))),
    }
}

fn parse_poly(text: &str, p: u64, line: usize) -> Result<Polynomial, RegProgError> {
    let mut terms = Vec::new();
    let mut negative = false;
    let mut current = String::new();
    let flush = |current: &mut String, negative: bool, terms: &mut Vec<Monomial>| -> Result<(), RegProgError> {
        let t = current.trim();
        if t.is_empty() {
            return Err(perr(line, "empty polynomial term"));
        }
        let mut coeff: i128 = 1;
        let mut factors = Vec::new();
        for f in t.split('*').map(str::trim) {
            if let Ok(v) = f.parse::<i128>() {
                coeff *= v;
            } else {
                let (reg, exp) = match f.split_once('^') {
                    Some((r, e)) => (r, e.trim().parse::<u32>().map_err(|_| perr(line, format!("bad exponent in {f:?}")))?),
                    None => (f, 1),
                };
                factors.push((index(reg.trim(), 'r', line)?, exp));
            }
        }
        if negative {
            coeff = -coeff;
        }
        terms.push(Monomial::new(coeff.rem_euclid(p as i128) as u64, factors));
        current.clear();
        Ok(())
    };
    let trimmed = text.trim();
    for (i, ch) in trimmed.char_indices() {
        match ch {
            '+' | '-' if i == 0 => negative = ch == '-',
            '+' | '-' => {
                flush(&mut current, negative, &mut terms)?;
                negative = ch == '-';
            }
            _ => current.push(ch),
        }
    }
    flush(&mut current, negative, &mut terms)?;
    Ok(Polynomial::new(terms))
}

pub fn parse_program(text: &str) -> Result<RegisterProgram, RegProgError> {
    let mut modulus = None;
    let mut registers = None;
    let mut inputs = None;
    let mut instructions = Vec::new();
    let mut lines_of = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        let number = |what: &str| rest.parse::<u64>().map_err(|_| perr(line, format!("{what} needs a number")));
        match key.to_ascii_uppercase().as_str() {
            "MODULUS" => modulus = Some(number("MODULUS")?),
            "REGISTERS" => registers = Some(number("REGISTERS")? as usize),
            "INPUTS" => inputs = Some(number("INPUTS")? as usize),
            kw @ ("ADD" | "SUB" | "ADDPOLY" | "SUBPOLY") => {
                let p = modulus.ok_or_else(|| perr(line, "MODULUS must precede instructions"))?;
                let sign = if kw.starts_with("ADD") { Sign::Plus } else { Sign::Minus };
                let (reg, arg) = rest.split_once(char::is_whitespace).ok_or_else(|| perr(line, format!("{kw} needs two operands")))?;
                let target = index(reg.trim(), 'r', line)?;
                let ins = if kw.ends_with("POLY") {
                    Instruction::AddPoly { target, poly: parse_poly(arg, p, line)?, sign }
                } else {
                    let arg = arg.trim();
                    if arg.split_whitespace().count() != 1 {
                        return Err(perr(line, format!("{kw} takes one input operand")));
                    }
                    Instruction::AddInput { target, input: index(arg, 'x', line)?, sign }
                };
                instructions.push(ins);
                lines_of.push(line);
            }
            other => return Err(perr(line, format!("unknown directive {other:?}"))),
        }
    }
    let p = modulus.ok_or_else(|| perr(1, "missing MODULUS"))?;
    let m = registers.ok_or_else(|| perr(1, "missing REGISTERS"))?;
    let n = inputs.unwrap_or(0);
    RegisterProgram::new(p, m, n, instructions).map_err(|e| {
        let line = match &e {
            RegProgError::SelfReference { instruction, .. } => lines_of[*instruction],
            _ => 1,
        };
        perr(line, e.to_string())
    })
}

pub(crate) fn instruction_to_text(ins: &Instruction) -> String {
    match ins {
        Instruction::AddInput { target, input, sign } => {
            let kw = if *sign == Sign::Plus { "ADD" } else { "SUB" };
            format!("{kw} r{} x{}", target + 1, input + 1)
        }
        Instruction::AddPoly { target, poly, sign } => {
            let kw = if *sign == Sign::Plus { "ADDPOLY" } else { "SUBPOLY" };
            let body = if poly.terms.is_empty() {
                "0".to_string()
            } else {
                poly.terms
                    .iter()
                    .map(|m| {
                        let mut parts: Vec<String> = Vec::new();
                        if m.coeff != 1 || m.factors.is_empty() {
                            parts.push(m.coeff.to_string());
                        }
                        for &(r, e) in &m.factors {
                            parts.push(if e == 1 { format!("r{}", r + 1) } else { format!("r{}^{e}", r + 1) });
                        }
                        parts.join("*")
                    })
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            format!("{kw} r{} {body}", target + 1)
        }
    }
}

pub fn program_to_text(prog: &RegisterProgram) -> String {
    let mut out = format!("MODULUS {}\nREGISTERS {}\nINPUTS {}\n", prog.modulus(), prog.num_registers(), prog.num_inputs());
    for ins in prog.instructions() {
        out.push_str(&instruction_to_text(ins));
        out.push('\n');
    }
    out
}
