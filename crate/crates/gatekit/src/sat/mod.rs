//! CNF types, Tseitin encoding, DIMACS interop, and an embedded CDCL
//! solver with a functionality-aware decision hook.
//!
//! Literals are signed variable indices in the DIMACS convention: variable
//! `v` in `1..=num_vars`, literal `v` positive, `-v` negated.

mod dimacs;
mod solver;
mod tseitin;

pub use dimacs::{parse_dimacs, write_dimacs};
pub use solver::{solve, SolveLimits, SolveResult, SolveStats, SolveStatus};
pub use tseitin::{miter, tseitin};

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SatError {
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("nodes must be distinct, got {0} twice")]
    IdenticalNodes(usize),
    #[error("malformed clause: {0}")]
    MalformedClause(String),
    #[error("malformed DIMACS at line {line}: {message}")]
    MalformedDimacs { line: usize, message: String },
}

/// A clause database. `var_of_node` records which AIG node each variable
/// encodes when the CNF came from a circuit (Tseitin auxiliaries and
/// DIMACS inputs leave it partial or empty).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
    pub var_of_node: BTreeMap<usize, usize>,
}

impl Cnf {
    pub fn validate(&self) -> Result<(), SatError> {
        for clause in &self.clauses {
            if clause.is_empty() {
                return Err(SatError::MalformedClause("empty clause".into()));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > self.num_vars {
                    return Err(SatError::MalformedClause(format!(
                        "literal {lit} out of range for {} vars",
                        self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }

    /// True iff `assignment` (indexed by var-1) satisfies every clause.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let v = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    v
                } else {
                    !v
                }
            })
        })
    }
}

/// Precomputed per-variable neighbor lists: for each variable, the other
/// variables whose source-gate embeddings have cosine similarity above
/// `1 - delta`. Symmetric, no self-entries; variables without an embedding
/// have empty lists.
#[derive(Debug, Clone)]
pub struct SimilarityIndex {
    neighbors: Vec<Vec<usize>>,
    pub delta: f64,
}

pub const DEFAULT_DELTA: f64 = 1e-5;

impl SimilarityIndex {
    /// Build from (variable, embedding) pairs. Quadratic in the number of
    /// embedded variables.
    pub fn build(num_vars: usize, var_embeddings: &[(usize, Vec<f64>)], delta: f64) -> Self {
        let mut neighbors = vec![Vec::new(); num_vars + 1];
        let norms: Vec<f64> = var_embeddings
            .iter()
            .map(|(_, e)| e.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        for a in 0..var_embeddings.len() {
            for b in (a + 1)..var_embeddings.len() {
                let (va, ea) = &var_embeddings[a];
                let (vb, eb) = &var_embeddings[b];
                if va == vb || norms[a] == 0.0 || norms[b] == 0.0 {
                    continue;
                }
                let dot: f64 = ea.iter().zip(eb.iter()).map(|(x, y)| x * y).sum();
                let sim = dot / (norms[a] * norms[b]);
                if sim > 1.0 - delta {
                    neighbors[*va].push(*vb);
                    neighbors[*vb].push(*va);
                }
            }
        }
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        SimilarityIndex { neighbors, delta }
    }

    /// Direct construction from explicit neighbor pairs (tests, tooling).
    pub fn from_pairs(num_vars: usize, pairs: &[(usize, usize)], delta: f64) -> Self {
        let mut neighbors = vec![Vec::new(); num_vars + 1];
        for &(a, b) in pairs {
            if a != b && a >= 1 && b >= 1 && a <= num_vars && b <= num_vars {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        SimilarityIndex { neighbors, delta }
    }

    pub fn neighbors_of(&self, var: usize) -> &[usize] {
        &self.neighbors[var]
    }

    pub fn num_vars(&self) -> usize {
        self.neighbors.len().saturating_sub(1)
    }
}
