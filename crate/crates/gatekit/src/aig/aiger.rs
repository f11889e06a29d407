//! ASCII AIGER (`aag`) reader and writer for combinational circuits.
//!
//! Complemented (odd) literals are materialized as explicit NOT nodes,
//! deduplicated so each source node has at most one NOT child. Constant
//! literals and latches are rejected. The binary `aig` variant is not
//! supported.

use super::{Aig, AigBuilder, AigError, NodeId};
use std::collections::HashMap;

struct AndDef {
    rhs0: u64,
    rhs1: u64,
}

pub fn parse_aiger(text: &str) -> Result<Aig, AigError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AigError::MalformedHeader("empty input".into()))?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some("aag") {
        return Err(AigError::MalformedHeader(format!(
            "expected 'aag M I L O A', got {header:?}"
        )));
    }
    let mut next_num = || -> Result<u64, AigError> {
        fields
            .next()
            .ok_or_else(|| AigError::MalformedHeader("missing header field".into()))?
            .parse::<u64>()
            .map_err(|_| AigError::MalformedHeader("non-numeric header field".into()))
    };
    let max_var = next_num()?;
    let num_in = next_num()?;
    let num_latch = next_num()?;
    let num_out = next_num()?;
    let num_and = next_num()?;
    if fields.next().is_some() {
        return Err(AigError::MalformedHeader("trailing header fields".into()));
    }
    if num_latch > 0 {
        return Err(AigError::LatchesUnsupported(num_latch as usize));
    }
    if num_in + num_and > max_var {
        return Err(AigError::MalformedHeader(format!(
            "M = {max_var} < I + A = {}",
            num_in + num_and
        )));
    }

    let check_lit = |lit: u64| -> Result<(), AigError> {
        if lit <= 1 {
            return Err(AigError::ConstantLiteralUnsupported(lit));
        }
        if lit > 2 * max_var + 1 {
            return Err(AigError::LiteralOutOfRange { lit, max_var });
        }
        Ok(())
    };

    let mut body = lines.filter(|l| !l.trim().is_empty());
    let mut next_line = |what: &str| -> Result<&str, AigError> {
        body.next()
            .ok_or_else(|| AigError::MalformedBody(format!("missing {what} line")))
    };

    // var -> PI index
    let mut input_of_var: HashMap<u64, usize> = HashMap::new();
    for k in 0..num_in {
        let line = next_line("input")?;
        let lit: u64 = line
            .trim()
            .parse()
            .map_err(|_| AigError::MalformedBody(format!("bad input literal {line:?}")))?;
        check_lit(lit)?;
        if !lit.is_multiple_of(2) {
            return Err(AigError::MalformedBody(format!(
                "input literal {lit} must be even"
            )));
        }
        if input_of_var.insert(lit / 2, k as usize).is_some() {
            return Err(AigError::DuplicateDefinition(lit / 2));
        }
    }

    let mut output_lits = Vec::with_capacity(num_out as usize);
    for _ in 0..num_out {
        let line = next_line("output")?;
        let lit: u64 = line
            .trim()
            .parse()
            .map_err(|_| AigError::MalformedBody(format!("bad output literal {line:?}")))?;
        check_lit(lit)?;
        output_lits.push(lit);
    }

    let mut and_of_var: HashMap<u64, AndDef> = HashMap::new();
    let mut and_vars = Vec::with_capacity(num_and as usize);
    for _ in 0..num_and {
        let line = next_line("and")?;
        let mut nums = line.split_ascii_whitespace().map(|s| {
            s.parse::<u64>()
                .map_err(|_| AigError::MalformedBody(format!("bad and line {line:?}")))
        });
        let mut field = |what: &str| -> Result<u64, AigError> {
            nums.next()
                .transpose()?
                .ok_or_else(|| AigError::MalformedBody(format!("and line missing {what}")))
        };
        let lhs = field("lhs")?;
        let rhs0 = field("rhs0")?;
        let rhs1 = field("rhs1")?;
        check_lit(lhs)?;
        check_lit(rhs0)?;
        check_lit(rhs1)?;
        if lhs % 2 != 0 {
            return Err(AigError::MalformedBody(format!(
                "and output literal {lhs} must be even"
            )));
        }
        let var = lhs / 2;
        if input_of_var.contains_key(&var) {
            return Err(AigError::DuplicateDefinition(var));
        }
        if and_of_var.insert(var, AndDef { rhs0, rhs1 }).is_some() {
            return Err(AigError::DuplicateDefinition(var));
        }
        and_vars.push(var);
    }
    // Symbol table and comments, if present, are ignored.

    let mut builder = AigBuilder::new();
    // PIs take ids 0..I in declaration order.
    let mut node_of_var: HashMap<u64, NodeId> = HashMap::new();
    let mut pi_nodes = vec![usize::MAX; num_in as usize];
    for (&var, &k) in &input_of_var {
        pi_nodes[k] = usize::MAX; // placeholder; assigned below in order
        let _ = var;
    }
    {
        // add in declaration order
        let mut vars: Vec<(usize, u64)> =
            input_of_var.iter().map(|(&v, &k)| (k, v)).collect();
        vars.sort_unstable();
        for (k, var) in vars {
            let id = builder.add_pi();
            pi_nodes[k] = id;
            node_of_var.insert(var, id);
        }
    }

    // NOT dedup: at most one NOT child per source node.
    let mut not_of: HashMap<NodeId, NodeId> = HashMap::new();

    // Iterative DFS over AND definitions; detects cycles and resolves
    // out-of-order definitions.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        OnStack,
        Done,
    }
    let mut mark: HashMap<u64, Mark> = HashMap::new();

    fn resolve_lit(
        lit: u64,
        node_of_var: &HashMap<u64, NodeId>,
        not_of: &mut HashMap<NodeId, NodeId>,
        builder: &mut AigBuilder,
    ) -> NodeId {
        let base = *node_of_var
            .get(&(lit / 2))
            .expect("resolved before use by DFS order");
        if lit.is_multiple_of(2) {
            base
        } else {
            *not_of
                .entry(base)
                .or_insert_with(|| builder.add_not(base).expect("source precedes NOT"))
        }
    }

    for &start in &and_vars {
        if matches!(mark.get(&start), Some(Mark::Done)) {
            continue;
        }
        // Explicit stack of (var, fanins_visited_yet).
        let mut stack: Vec<(u64, bool)> = vec![(start, false)];
        while let Some((var, expanded)) = stack.pop() {
            match mark.get(&var).copied().unwrap_or(Mark::Unvisited) {
                Mark::Done => continue,
                Mark::OnStack if !expanded => return Err(AigError::CyclicDefinition(var)),
                _ => {}
            }
            let def = and_of_var
                .get(&var)
                .ok_or(AigError::UndefinedLiteral(2 * var))?;
            if !expanded {
                mark.insert(var, Mark::OnStack);
                stack.push((var, true));
                for rhs in [def.rhs0, def.rhs1] {
                    let rhs_var = rhs / 2;
                    if input_of_var.contains_key(&rhs_var) {
                        continue;
                    }
                    match mark.get(&rhs_var).copied().unwrap_or(Mark::Unvisited) {
                        Mark::Done => {}
                        Mark::OnStack => return Err(AigError::CyclicDefinition(rhs_var)),
                        Mark::Unvisited => {
                            if !and_of_var.contains_key(&rhs_var) {
                                return Err(AigError::UndefinedLiteral(rhs));
                            }
                            stack.push((rhs_var, false));
                        }
                    }
                }
            } else {
                let a = resolve_lit(def.rhs0, &node_of_var, &mut not_of, &mut builder);
                let b = resolve_lit(def.rhs1, &node_of_var, &mut not_of, &mut builder);
                let id = builder.add_and(a, b).expect("fanins resolved first");
                node_of_var.insert(var, id);
                mark.insert(var, Mark::Done);
            }
        }
    }

    let mut pos = Vec::with_capacity(output_lits.len());
    for lit in output_lits {
        let var = lit / 2;
        if !node_of_var.contains_key(&var) {
            return Err(AigError::UndefinedLiteral(lit));
        }
        pos.push(resolve_lit(lit, &node_of_var, &mut not_of, &mut builder));
    }

    builder.finish(pos)
}

/// Serialize to ASCII AIGER. NOT nodes fold back into complement bits on
/// the literals of their consumers, so NOT chains collapse modulo 2; a
/// freshly parsed Aig (where NOT sources are never NOTs) round-trips to an
/// isomorphic graph.
pub fn write_aiger(aig: &Aig) -> String {
    use super::Gate;
    // Assign AIGER variables to PIs and ANDs in topological id order.
    let mut var_of_node = vec![0u64; aig.len()];
    let mut next_var = 1u64;
    for (n, gate) in aig.gates().iter().enumerate() {
        if matches!(gate, Gate::Pi | Gate::And(..)) {
            var_of_node[n] = next_var;
            next_var += 1;
        }
    }
    // Literal of a node, collapsing NOT chains.
    fn lit_of(aig: &Aig, var_of_node: &[u64], mut n: NodeId) -> u64 {
        let mut neg = 0u64;
        loop {
            match aig.gate(n) {
                Gate::Not(a) => {
                    neg ^= 1;
                    n = a;
                }
                _ => return 2 * var_of_node[n] + neg,
            }
        }
    }
    let num_in = aig.num_pis() as u64;
    let num_and = aig.num_ands() as u64;
    let max_var = next_var - 1;
    let mut out = String::new();
    out.push_str(&format!(
        "aag {max_var} {num_in} 0 {} {num_and}\n",
        aig.pos().len()
    ));
    for &pi in aig.pis() {
        out.push_str(&format!("{}\n", 2 * var_of_node[pi]));
    }
    for &po in aig.pos() {
        out.push_str(&format!("{}\n", lit_of(aig, &var_of_node, po)));
    }
    for (n, gate) in aig.gates().iter().enumerate() {
        if let Gate::And(a, b) = *gate {
            out.push_str(&format!(
                "{} {} {}\n",
                2 * var_of_node[n],
                lit_of(aig, &var_of_node, a),
                lit_of(aig, &var_of_node, b)
            ));
        }
    }
    out
}
