//! SAT sweeping: merge formally equivalent gates.
//!
//! Candidate equivalence classes come from signature-identical nodes under
//! initial simulation. Candidate pairs are then discharged one at a time
//! with miter SAT calls, highest embedding similarity first when a model
//! is available: UNSAT proves equivalence and merges the pair, SAT yields
//! a counterexample pattern that refines every class incrementally. Every
//! merge is therefore justified by a proof, and the swept circuit is
//! re-verified against the original before returning.

use crate::aig::{Aig, AigBuilder, Gate, NodeId};
use crate::model::{functional_embeddings, ModelError, ModelParams};
use crate::sat::{miter, solve, SatError, SolveLimits, SolveStatus};
use crate::sim::{
    evaluate_pattern, exhaustive_patterns, random_patterns, simulate, SimConfig, SimError,
    Signature,
};
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("counterexample pattern assigns {got} PIs, circuit has {expected}")]
    IncompletePattern { expected: usize, got: usize },
    #[error("model embeddings cover {got} nodes, circuit has {expected}")]
    ModelEmbeddingMissing { expected: usize, got: usize },
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct SweepBudgets {
    /// Conflict budget per miter call; exceeding it defers the pair.
    pub pair_conflicts: u64,
    /// Overall cap on SAT calls; exceeding it returns the partial result
    /// with `budget_exhausted` set.
    pub max_sat_calls: Option<u64>,
}

impl Default for SweepBudgets {
    fn default() -> Self {
        SweepBudgets {
            pair_conflicts: 10_000,
            max_sat_calls: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepStats {
    pub sat_calls: u64,
    pub sat_sat: u64,
    pub sat_unsat: u64,
    pub sat_unknown: u64,
    pub merges: u64,
    pub refinements: u64,
    pub initial_classes: usize,
    pub initial_and_count: usize,
    pub final_and_count: usize,
    pub budget_exhausted: bool,
    pub runtime_secs: f64,
}

pub struct SweepOutcome {
    pub aig: Aig,
    pub stats: SweepStats,
}

/// Working state of a sweep: the original circuit, the merge map, the live
/// candidate classes, and the accumulated pattern store.
pub struct SweepState {
    pub aig: Aig,
    /// merged node -> representative (identity when alive). Resolution is
    /// transitive; representatives always carry lower node ids.
    repr: Vec<NodeId>,
    classes: Vec<Vec<NodeId>>,
    class_of: Vec<Option<usize>>,
    /// Per-node signatures over everything simulated so far.
    pub signatures: Vec<Signature>,
    /// Counterexample patterns appended after the initial simulation.
    pub pattern_store: Vec<Vec<bool>>,
    pub stats: SweepStats,
}

impl SweepState {
    pub fn find(&self, mut n: NodeId) -> NodeId {
        while self.repr[n] != n {
            n = self.repr[n];
        }
        n
    }

    pub fn is_alive(&self, n: NodeId) -> bool {
        self.repr[n] == n
    }

    /// Live classes (each with at least two members).
    pub fn classes(&self) -> impl Iterator<Item = &[NodeId]> {
        self.classes.iter().filter(|c| c.len() >= 2).map(|c| c.as_slice())
    }

    pub fn class_index_of(&self, n: NodeId) -> Option<usize> {
        self.class_of[n]
    }

    fn drop_from_class(&mut self, n: NodeId) {
        if let Some(ci) = self.class_of[n].take() {
            self.classes[ci].retain(|&m| m != n);
            if self.classes[ci].len() < 2 {
                for m in std::mem::take(&mut self.classes[ci]) {
                    self.class_of[m] = None;
                }
            }
        }
    }

    /// Record a proven equivalence: the higher id joins the lower one.
    fn merge(&mut self, i: NodeId, j: NodeId) {
        let (rep, merged) = (i.min(j), i.max(j));
        self.repr[merged] = rep;
        self.drop_from_class(merged);
        self.stats.merges += 1;
    }
}

/// Group signature-identical nodes into candidate classes; singletons are
/// dropped. Deterministic for a fixed simulation config.
pub fn initial_classes(aig: &Aig, sim_config: &SimConfig) -> Result<SweepState, SweepError> {
    let plan = sim_config.patterns_for(aig.num_pis());
    let pi_sigs = plan.generate(aig.num_pis());
    let signatures = simulate(aig, &pi_sigs)?;
    let mut groups: HashMap<&Signature, Vec<NodeId>> = HashMap::new();
    for (n, sig) in signatures.iter().enumerate() {
        groups.entry(sig).or_default().push(n);
    }
    let mut classes: Vec<Vec<NodeId>> = groups
        .into_values()
        .filter(|members| members.len() >= 2)
        .collect();
    classes.sort_unstable_by_key(|c| c[0]);
    let mut class_of = vec![None; aig.len()];
    for (ci, members) in classes.iter().enumerate() {
        for &m in members {
            class_of[m] = Some(ci);
        }
    }
    let stats = SweepStats {
        initial_classes: classes.len(),
        initial_and_count: aig.num_ands(),
        ..SweepStats::default()
    };
    Ok(SweepState {
        aig: aig.clone(),
        repr: (0..aig.len()).collect(),
        classes,
        class_of,
        signatures,
        pattern_store: Vec::new(),
        stats,
    })
}

/// All intra-class candidate pairs, ranked. With embeddings: descending
/// cosine similarity of the pair's functional embeddings, ties broken by
/// lower level sum then lexicographic ids. Without: deterministic
/// lexicographic order (the baseline mode).
pub fn rank_candidate_pairs(
    state: &SweepState,
    embeddings: Option<&[Vec<f64>]>,
) -> Result<Vec<(NodeId, NodeId)>, SweepError> {
    if let Some(e) = embeddings {
        if e.len() != state.aig.len() {
            return Err(SweepError::ModelEmbeddingMissing {
                expected: state.aig.len(),
                got: e.len(),
            });
        }
    }
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for class in state.classes() {
        for (a, &i) in class.iter().enumerate() {
            for &j in &class[a + 1..] {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    match embeddings {
        None => pairs.sort_unstable(),
        Some(embeddings) => {
            let cosine = |a: &[f64], b: &[f64]| -> f64 {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    -1.0
                } else {
                    dot / (na * nb)
                }
            };
            let mut keyed: Vec<(f64, u64, (NodeId, NodeId))> = pairs
                .into_iter()
                .map(|(i, j)| {
                    let sim = cosine(&embeddings[i], &embeddings[j]);
                    let level_sum = state.aig.level(i) as u64 + state.aig.level(j) as u64;
                    (sim, level_sum, (i, j))
                })
                .collect();
            keyed.sort_unstable_by(|a, b| {
                b.0.total_cmp(&a.0)
                    .then(a.1.cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });
            pairs = keyed.into_iter().map(|(_, _, p)| p).collect();
        }
    }
    Ok(pairs)
}

/// Append one simulation pattern and split every class by the new bit.
/// Subgroups that fall below two members dissolve.
pub fn refine_with_counterexample(
    state: &mut SweepState,
    pattern: &[bool],
) -> Result<(), SweepError> {
    if pattern.len() != state.aig.num_pis() {
        return Err(SweepError::IncompletePattern {
            expected: state.aig.num_pis(),
            got: pattern.len(),
        });
    }
    let vals = evaluate_pattern(&state.aig, pattern);
    for (sig, &v) in state.signatures.iter_mut().zip(vals.iter()) {
        sig.push_bit(v);
    }
    state.pattern_store.push(pattern.to_vec());
    let num_classes = state.classes.len();
    for ci in 0..num_classes {
        if state.classes[ci].len() < 2 {
            continue;
        }
        let members = std::mem::take(&mut state.classes[ci]);
        let (zeros, ones): (Vec<NodeId>, Vec<NodeId>) =
            members.into_iter().partition(|&m| !vals[m]);
        let place = |state: &mut SweepState, group: Vec<NodeId>, reuse: Option<usize>| {
            if group.len() < 2 {
                for m in group {
                    state.class_of[m] = None;
                }
            } else if let Some(ci) = reuse {
                for &m in &group {
                    state.class_of[m] = Some(ci);
                }
                state.classes[ci] = group;
            } else {
                let ci = state.classes.len();
                for &m in &group {
                    state.class_of[m] = Some(ci);
                }
                state.classes.push(group);
            }
        };
        place(state, zeros, Some(ci));
        place(state, ones, None);
    }
    state.stats.refinements += 1;
    Ok(())
}

/// Extract the merged-resolved cones of `roots` as a standalone circuit.
/// Returns the sub-circuit (roots as POs, in order) and the new-to-old map.
fn extract_resolved(state: &SweepState, roots: &[NodeId]) -> (Aig, Vec<NodeId>) {
    let aig = &state.aig;
    let mut in_cone = vec![false; aig.len()];
    let mut stack: Vec<NodeId> = roots.iter().map(|&r| state.find(r)).collect();
    while let Some(n) = stack.pop() {
        if !in_cone[n] {
            in_cone[n] = true;
            stack.extend(aig.gate(n).fanins().map(|f| state.find(f)));
        }
    }
    let node_map: Vec<NodeId> = (0..aig.len()).filter(|&n| in_cone[n]).collect();
    let mut new_id = vec![usize::MAX; aig.len()];
    for (new, &old) in node_map.iter().enumerate() {
        new_id[old] = new;
    }
    let mut b = AigBuilder::new();
    for &old in &node_map {
        match aig.gate(old) {
            Gate::Pi => {
                b.add_pi();
            }
            Gate::Not(a) => {
                b.add_not(new_id[state.find(a)]).expect("resolved order");
            }
            Gate::And(x, y) => {
                b.add_and(new_id[state.find(x)], new_id[state.find(y)])
                    .expect("resolved order");
            }
        }
    }
    let pos: Vec<NodeId> = roots.iter().map(|&r| new_id[state.find(r)]).collect();
    (b.finish(pos).expect("resolved graph is acyclic"), node_map)
}

/// Rebuild the final swept circuit: all original PIs, merged fan-ins
/// resolved, NOT nodes deduplicated per source, only PO-reachable logic.
fn rebuild(state: &SweepState) -> Aig {
    let aig = &state.aig;
    let mut in_cone = vec![false; aig.len()];
    let mut stack: Vec<NodeId> = aig.pos().iter().map(|&r| state.find(r)).collect();
    while let Some(n) = stack.pop() {
        if !in_cone[n] {
            in_cone[n] = true;
            stack.extend(aig.gate(n).fanins().map(|f| state.find(f)));
        }
    }
    // Keep every PI regardless of reachability so interfaces match.
    for &pi in aig.pis() {
        in_cone[pi] = true;
    }
    let mut new_id = vec![usize::MAX; aig.len()];
    let mut b = AigBuilder::new();
    let mut not_of: HashMap<NodeId, NodeId> = HashMap::new();
    for n in 0..aig.len() {
        if !in_cone[n] {
            continue;
        }
        match aig.gate(n) {
            Gate::Pi => new_id[n] = b.add_pi(),
            Gate::Not(a) => {
                let src = new_id[state.find(a)];
                let id = *not_of
                    .entry(src)
                    .or_insert_with(|| b.add_not(src).expect("order"));
                new_id[n] = id;
            }
            Gate::And(x, y) => {
                new_id[n] = b
                    .add_and(new_id[state.find(x)], new_id[state.find(y)])
                    .expect("order");
            }
        }
    }
    let pos: Vec<NodeId> = aig.pos().iter().map(|&p| new_id[state.find(p)]).collect();
    b.finish(pos).expect("acyclic")
}

/// Check PO-for-PO functional equivalence: exhaustively up to 16 PIs,
/// otherwise with one million random patterns.
pub fn verify_equivalence(a: &Aig, b: &Aig, seed: u64) -> Result<bool, SweepError> {
    if a.num_pis() != b.num_pis() || a.pos().len() != b.pos().len() {
        return Ok(false);
    }
    let pi_sigs = if a.num_pis() <= 16 {
        exhaustive_patterns(a.num_pis())
    } else {
        random_patterns(
            a.num_pis(),
            &SimConfig {
                num_patterns: 1_000_000,
                seed,
                exhaustive_when_small: false,
            },
        )
    };
    let sa = simulate(a, &pi_sigs)?;
    let sb = simulate(b, &pi_sigs)?;
    Ok(a.pos()
        .iter()
        .zip(b.pos().iter())
        .all(|(&pa, &pb)| sa[pa] == sb[pb]))
}

/// Full sweep. With a model, candidate pairs are tried in descending
/// functional-embedding similarity (embeddings computed once on the input
/// circuit); without one, in deterministic baseline order.
pub fn sweep(
    aig: &Aig,
    model: Option<&ModelParams>,
    sim_config: &SimConfig,
    budgets: &SweepBudgets,
) -> Result<SweepOutcome, SweepError> {
    let started = std::time::Instant::now();
    let embeddings = match model {
        Some(m) => Some(functional_embeddings(aig, m)?),
        None => None,
    };
    let mut state = initial_classes(aig, sim_config)?;
    let ranked = rank_candidate_pairs(&state, embeddings.as_deref())?;
    let mut queue: std::collections::VecDeque<((NodeId, NodeId), bool)> =
        ranked.into_iter().map(|p| (p, false)).collect();
    while let Some(((i, j), deferred)) = queue.pop_front() {
        if !state.is_alive(i) || !state.is_alive(j) {
            continue;
        }
        match (state.class_of[i], state.class_of[j]) {
            (Some(a), Some(b)) if a == b => {}
            _ => continue,
        }
        if let Some(max) = budgets.max_sat_calls {
            if state.stats.sat_calls >= max {
                state.stats.budget_exhausted = true;
                break;
            }
        }
        let (cone, node_map) = extract_resolved(&state, &[i, j]);
        let (m1, m2) = (cone.pos()[0], cone.pos()[1]);
        let cnf = miter(&cone, m1, m2)?;
        state.stats.sat_calls += 1;
        let result = solve(&cnf, None, &SolveLimits::conflicts(budgets.pair_conflicts))?;
        match result.status {
            SolveStatus::Unsat => {
                state.stats.sat_unsat += 1;
                state.merge(i, j);
            }
            SolveStatus::Sat => {
                state.stats.sat_sat += 1;
                let model_vals = result.model.expect("SAT result carries a model");
                // Lift the cone-level PI assignment to the full circuit.
                let mut pattern = vec![false; aig.num_pis()];
                let mut old_pi_index = vec![usize::MAX; aig.len()];
                for (k, &pi) in aig.pis().iter().enumerate() {
                    old_pi_index[pi] = k;
                }
                for &new_pi in cone.pis() {
                    let old = node_map[new_pi];
                    if let Some(&var) = cnf.var_of_node.get(&new_pi) {
                        pattern[old_pi_index[old]] = model_vals[var - 1];
                    }
                }
                refine_with_counterexample(&mut state, &pattern)?;
            }
            SolveStatus::Unknown => {
                state.stats.sat_unknown += 1;
                if deferred {
                    // Second strike: give up on this pair.
                    state.stats.budget_exhausted = true;
                } else {
                    queue.push_back(((i, j), true));
                }
            }
        }
    }
    let swept = rebuild(&state);
    assert!(
        verify_equivalence(aig, &swept, sim_config.seed)?,
        "internal error: swept circuit is not equivalent to its input"
    );
    let mut stats = state.stats;
    stats.final_and_count = swept.num_ands();
    debug_assert!(stats.final_and_count <= stats.initial_and_count);
    stats.runtime_secs = started.elapsed().as_secs_f64();
    Ok(SweepOutcome { aig: swept, stats })
}
