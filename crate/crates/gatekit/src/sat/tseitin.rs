//! Circuit-to-CNF translation.
//!
//! The standard gate clauses make each encoded variable equivalent to its
//! gate's function, so assignments restricted to PI variables are exactly
//! the input patterns producing the asserted behavior:
//!
//! - `AND(a, b) = c`: `(!c | a) (!c | b) (c | !a | !b)`
//! - `NOT(a) = c`:    `(!c | !a) (c | a)`

use super::{Cnf, SatError};
use crate::aig::{Aig, Gate, NodeId};
use std::collections::BTreeMap;

/// Encode the fan-in cones of `roots`, sharing variables, and return the
/// CNF plus the clause set. Variables are assigned to cone nodes in
/// ascending node-id order starting at 1.
fn encode_cones(aig: &Aig, roots: &[NodeId]) -> Result<Cnf, SatError> {
    for &r in roots {
        if r >= aig.len() {
            return Err(SatError::UnknownNode(r));
        }
    }
    let mut in_cone = vec![false; aig.len()];
    let mut stack: Vec<NodeId> = roots.to_vec();
    while let Some(n) = stack.pop() {
        if !in_cone[n] {
            in_cone[n] = true;
            stack.extend(aig.gate(n).fanins());
        }
    }
    let mut var_of_node = BTreeMap::new();
    let mut next = 1usize;
    for n in 0..aig.len() {
        if in_cone[n] {
            var_of_node.insert(n, next);
            next += 1;
        }
    }
    let mut clauses = Vec::new();
    for (&n, &c) in &var_of_node {
        let c = c as i32;
        match aig.gate(n) {
            Gate::Pi => {}
            Gate::Not(a) => {
                let a = var_of_node[&a] as i32;
                clauses.push(vec![-c, -a]);
                clauses.push(vec![c, a]);
            }
            Gate::And(a, b) => {
                let a = var_of_node[&a] as i32;
                let b = var_of_node[&b] as i32;
                clauses.push(vec![-c, a]);
                clauses.push(vec![-c, b]);
                clauses.push(vec![c, -a, -b]);
            }
        }
    }
    Ok(Cnf {
        num_vars: next - 1,
        clauses,
        var_of_node,
    })
}

/// CNF whose models (projected to PI variables) are exactly the PI
/// patterns making `assert_node` evaluate to `assert_value`.
pub fn tseitin(aig: &Aig, assert_node: NodeId, assert_value: bool) -> Result<Cnf, SatError> {
    let mut cnf = encode_cones(aig, &[assert_node])?;
    let v = cnf.var_of_node[&assert_node] as i32;
    cnf.clauses.push(vec![if assert_value { v } else { -v }]);
    Ok(cnf)
}

/// Miter: satisfiable iff some PI pattern distinguishes `g1` from `g2`;
/// UNSAT proves functional equivalence. The two cones share PI variables.
pub fn miter(aig: &Aig, g1: NodeId, g2: NodeId) -> Result<Cnf, SatError> {
    if g1 == g2 {
        return Err(SatError::IdenticalNodes(g1));
    }
    let mut cnf = encode_cones(aig, &[g1, g2])?;
    let v1 = cnf.var_of_node[&g1] as i32;
    let v2 = cnf.var_of_node[&g2] as i32;
    // XOR asserted true: outputs must differ.
    cnf.clauses.push(vec![v1, v2]);
    cnf.clauses.push(vec![-v1, -v2]);
    Ok(cnf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;
    use crate::sat::{solve, SolveLimits, SolveStatus};

    /// Enumerate all models over the full variable set by brute force.
    fn enumerate_models(cnf: &Cnf) -> Vec<Vec<bool>> {
        let n = cnf.num_vars;
        assert!(n <= 20);
        let mut out = Vec::new();
        for bits in 0u64..(1 << n) {
            let assignment: Vec<bool> = (0..n).map(|i| (bits >> i) & 1 == 1).collect();
            if cnf.is_satisfied_by(&assignment) {
                out.push(assignment);
            }
        }
        out
    }

    #[test]
    fn and_asserted_true_has_single_pi_model() {
        let mut b = AigBuilder::new();
        let x1 = b.add_pi();
        let x2 = b.add_pi();
        let g = b.add_and(x1, x2).unwrap();
        let aig = b.finish(vec![g]).unwrap();
        let cnf = tseitin(&aig, g, true).unwrap();
        let models = enumerate_models(&cnf);
        assert_eq!(models.len(), 1);
        // all three vars true: x1, x2, g
        assert_eq!(models[0], vec![true, true, true]);
    }

    #[test]
    fn not_chain_asserts_source() {
        let mut b = AigBuilder::new();
        let x = b.add_pi();
        let n1 = b.add_not(x).unwrap();
        let n2 = b.add_not(n1).unwrap();
        let aig = b.finish(vec![n2]).unwrap();
        let cnf = tseitin(&aig, n2, true).unwrap();
        let models = enumerate_models(&cnf);
        assert_eq!(models.len(), 1);
        let xv = cnf.var_of_node[&x];
        assert!(models[0][xv - 1], "source PI must be 1");
    }

    #[test]
    fn miter_of_double_negation_is_unsat() {
        let mut b = AigBuilder::new();
        let x1 = b.add_pi();
        let x2 = b.add_pi();
        let g = b.add_and(x1, x2).unwrap();
        let n1 = b.add_not(g).unwrap();
        let n2 = b.add_not(n1).unwrap();
        let aig = b.finish(vec![n2]).unwrap();
        let cnf = miter(&aig, g, n2).unwrap();
        let res = solve(&cnf, None, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Unsat);
    }

    #[test]
    fn miter_of_complement_always_differs() {
        let mut b = AigBuilder::new();
        let x1 = b.add_pi();
        let x2 = b.add_pi();
        let g = b.add_and(x1, x2).unwrap();
        let n = b.add_not(g).unwrap();
        let aig = b.finish(vec![n]).unwrap();
        let cnf = miter(&aig, g, n).unwrap();
        for model in enumerate_models(&cnf) {
            let vg = cnf.var_of_node[&g];
            let vn = cnf.var_of_node[&n];
            assert_ne!(model[vg - 1], model[vn - 1]);
        }
        let res = solve(&cnf, None, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Sat);
    }

    #[test]
    fn tseitin_solution_set_matches_simulation() {
        // For random circuits, the CNF restricted to any full PI pattern
        // must be satisfiable exactly when the node takes the asserted
        // value under that pattern (the gate clauses are equivalences, so
        // this pins the whole PI-projected solution set).
        use crate::aig::{random_aig, RandomAigConfig};
        use crate::sim::evaluate_pattern;
        for seed in 0..50u64 {
            let num_pi = 3 + (seed % 8) as usize; // 3..=10
            let aig = random_aig(&RandomAigConfig {
                num_pi,
                num_gates: 15 + (seed % 20) as usize,
                seed: 4_000 + seed,
                ..RandomAigConfig::default()
            });
            let node = aig.len() - 1;
            let assert_value = seed % 2 == 0;
            let cnf = tseitin(&aig, node, assert_value).unwrap();
            for bits in 0..(1usize << num_pi) {
                let pattern: Vec<bool> = (0..num_pi).map(|i| (bits >> i) & 1 == 1).collect();
                let expected = evaluate_pattern(&aig, &pattern)[node] == assert_value;
                let mut fixed = cnf.clone();
                for (k, &pi) in aig.pis().iter().enumerate() {
                    if let Some(&var) = cnf.var_of_node.get(&pi) {
                        let v = var as i32;
                        fixed.clauses.push(vec![if pattern[k] { v } else { -v }]);
                    }
                }
                let res = solve(&fixed, None, &SolveLimits::default()).unwrap();
                assert_eq!(
                    res.status == SolveStatus::Sat,
                    expected,
                    "seed {seed} pattern {bits:b}"
                );
            }
        }
    }

    #[test]
    fn miter_rejects_identical_nodes() {
        let mut b = AigBuilder::new();
        let x = b.add_pi();
        let aig = b.finish(vec![x]).unwrap();
        assert_eq!(miter(&aig, x, x), Err(SatError::IdenticalNodes(x)));
    }

    #[test]
    fn unknown_node_rejected() {
        let mut b = AigBuilder::new();
        let x = b.add_pi();
        let aig = b.finish(vec![x]).unwrap();
        assert_eq!(tseitin(&aig, 7, true), Err(SatError::UnknownNode(7)));
    }
}
