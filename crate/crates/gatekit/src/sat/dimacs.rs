//! DIMACS CNF reader and writer.

use super::{Cnf, SatError};
use std::collections::BTreeMap;

pub fn parse_dimacs(text: &str) -> Result<Cnf, SatError> {
    let mut num_vars = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(SatError::MalformedDimacs {
                    line: lineno + 1,
                    message: format!("bad problem line {line:?}"),
                });
            }
            num_vars = Some(fields[2].parse::<usize>().map_err(|_| {
                SatError::MalformedDimacs {
                    line: lineno + 1,
                    message: "bad variable count".into(),
                }
            })?);
            declared_clauses = fields[3].parse::<usize>().map_err(|_| {
                SatError::MalformedDimacs {
                    line: lineno + 1,
                    message: "bad clause count".into(),
                }
            })?;
            continue;
        }
        let nv = num_vars.ok_or(SatError::MalformedDimacs {
            line: lineno + 1,
            message: "clause before problem line".into(),
        })?;
        for tok in line.split_ascii_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| SatError::MalformedDimacs {
                line: lineno + 1,
                message: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(SatError::MalformedClause(format!(
                        "empty clause at line {}",
                        lineno + 1
                    )));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > nv {
                    return Err(SatError::MalformedDimacs {
                        line: lineno + 1,
                        message: format!("literal {lit} exceeds {nv} vars"),
                    });
                }
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let num_vars = num_vars.ok_or(SatError::MalformedDimacs {
        line: 0,
        message: "missing problem line".into(),
    })?;
    let _ = declared_clauses; // tolerated when it disagrees, like most tools
    Ok(Cnf {
        num_vars,
        clauses,
        var_of_node: BTreeMap::new(),
    })
}

pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}
