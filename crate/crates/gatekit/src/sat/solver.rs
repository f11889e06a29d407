//! Conflict-driven clause learning solver.
//!
//! Standard architecture: two watched literals, first-UIP conflict
//! analysis with non-chronological backjumping, exponential VSIDS decision
//! activities with phase saving, and Luby-sequence restarts.
//!
//! The similarity hook: right after an activity-heap decision `s = v`,
//! every still-unassigned variable in the index's neighbor list of `s` is
//! decided `!v`, each at its own decision level, before the heap is
//! consulted again. Opposing values on behaviorally similar variables
//! provoke conflicts early; since hook assignments are ordinary revocable
//! decisions, the SAT/UNSAT answer is unaffected.

use super::{Cnf, SatError, SimilarityIndex};
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Sat,
    Unsat,
    /// Conflict budget exhausted before an answer.
    Unknown,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub hook_assignments: u64,
    pub learned_clauses: u64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Complete assignment indexed by `var - 1`, present when SAT.
    pub model: Option<Vec<bool>>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct SolveLimits {
    pub max_conflicts: Option<u64>,
}


impl SolveLimits {
    pub fn conflicts(n: u64) -> Self {
        SolveLimits {
            max_conflicts: Some(n),
        }
    }
}

/// Literal in the solver's internal encoding: `var << 1 | negated`,
/// variables 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, negated: bool) -> Lit {
        Lit(((var as u32) << 1) | negated as u32)
    }
    fn from_dimacs(l: i32) -> Lit {
        Lit::new(l.unsigned_abs() as usize - 1, l < 0)
    }
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }
    fn negated(self) -> bool {
        self.0 & 1 == 1
    }
    fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }
    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Undef,
    True,
    False,
}

struct Clause {
    lits: Vec<Lit>,
}

/// Indexed binary max-heap over variable activities.
struct VarOrder {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(n: usize) -> Self {
        VarOrder {
            heap: (0..n).collect(),
            pos: (0..n).map(Some).collect(),
        }
    }

    fn with_heapify(n: usize, act: &[f64]) -> Self {
        let mut o = VarOrder::new(n);
        if n > 1 {
            for i in (0..n / 2).rev() {
                o.sift_down(i, act);
            }
        }
        o
    }

    fn less(&self, a: usize, b: usize, act: &[f64]) -> bool {
        // max-heap: higher activity first; ties by lower var index.
        (act[self.heap[a]], std::cmp::Reverse(self.heap[a]))
            > (act[self.heap[b]], std::cmp::Reverse(self.heap[b]))
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.less(i, parent, act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && self.less(l, best, act) {
                best = l;
            }
            if r < self.heap.len() && self.less(r, best, act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = Some(a);
        self.pos[self.heap[b]] = Some(b);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.len() - 1;
        self.swap(0, last);
        self.heap.pop();
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn insert(&mut self, var: usize, act: &[f64]) {
        if self.pos[var].is_none() {
            self.heap.push(var);
            self.pos[var] = Some(self.heap.len() - 1);
            self.sift_up(self.heap.len() - 1, act);
        }
    }

    fn bumped(&mut self, var: usize, act: &[f64]) {
        if let Some(i) = self.pos[var] {
            self.sift_up(i, act);
        }
    }
}

struct Solver<'a> {
    num_vars: usize,
    clauses: Vec<Clause>,
    first_learnt: usize,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    index: Option<&'a SimilarityIndex>,
    pending: VecDeque<Lit>,
    stats: SolveStats,
    unsat: bool,
}

const VAR_DECAY: f64 = 0.95;
const RESTART_BASE: u64 = 128;

fn luby(mut k: u64) -> u64 {
    // Luby sequence 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < k + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != k {
        size = (size - 1) / 2;
        seq -= 1;
        k %= size;
    }
    1u64 << seq
}

impl<'a> Solver<'a> {
    fn new(cnf: &Cnf, index: Option<&'a SimilarityIndex>) -> Result<Self, SatError> {
        cnf.validate()?;
        let n = cnf.num_vars;
        let activity = vec![0.0; n];
        let mut solver = Solver {
            num_vars: n,
            clauses: Vec::with_capacity(cnf.clauses.len()),
            first_learnt: 0,
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Undef; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            order: VarOrder::with_heapify(n, &activity),
            activity,
            var_inc: 1.0,
            phase: vec![false; n],
            seen: vec![false; n],
            index,
            pending: VecDeque::new(),
            stats: SolveStats::default(),
            unsat: false,
        };
        for clause in &cnf.clauses {
            let mut lits: Vec<Lit> = clause.iter().map(|&l| Lit::from_dimacs(l)).collect();
            lits.sort_unstable_by_key(|l| l.0);
            lits.dedup();
            if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
                continue; // tautology: contains l and !l
            }
            solver.add_clause(lits);
            if solver.unsat {
                break;
            }
        }
        solver.first_learnt = solver.clauses.len();
        Ok(solver)
    }

    fn value(&self, l: Lit) -> Value {
        match (self.assigns[l.var()], l.negated()) {
            (Value::Undef, _) => Value::Undef,
            (Value::True, false) | (Value::False, true) => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn add_clause(&mut self, lits: Vec<Lit>) -> usize {
        match lits.len() {
            0 => {
                self.unsat = true;
                usize::MAX
            }
            1 => {
                debug_assert_eq!(self.decision_level(), 0);
                match self.value(lits[0]) {
                    Value::False => self.unsat = true,
                    Value::Undef => self.enqueue(lits[0], None),
                    Value::True => {}
                }
                usize::MAX
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[lits[0].negate().index()].push(idx);
                self.watches[lits[1].negate().index()].push(idx);
                self.clauses.push(Clause { lits });
                idx
            }
        }
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        debug_assert_eq!(self.value(l), Value::Undef);
        self.assigns[l.var()] = if l.negated() {
            Value::False
        } else {
            Value::True
        };
        self.level[l.var()] = self.decision_level();
        self.reason[l.var()] = reason;
        self.trail.push(l);
        self.stats.propagations += 1;
    }

    /// Unit propagation. Returns the conflicting clause index, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            // Clauses watching !p (registered under p) may become unit or
            // conflicting now that !p is false.
            let false_lit = p.negate();
            let watchers = std::mem::take(&mut self.watches[p.index()]);
            let mut keep = Vec::with_capacity(watchers.len());
            let mut conflict = None;
            let mut i = 0;
            while i < watchers.len() {
                let ci = watchers[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                // Normalize: false_lit at position 1.
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                debug_assert_eq!(clause.lits[1], false_lit);
                let first = clause.lits[0];
                if matches!(
                    match (self.assigns[first.var()], first.negated()) {
                        (Value::Undef, _) => Value::Undef,
                        (Value::True, false) | (Value::False, true) => Value::True,
                        _ => Value::False,
                    },
                    Value::True
                ) {
                    keep.push(ci);
                    continue;
                }
                // Look for a replacement watch.
                let mut moved = false;
                for k in 2..clause.lits.len() {
                    let cand = clause.lits[k];
                    let val = match (self.assigns[cand.var()], cand.negated()) {
                        (Value::Undef, _) => Value::Undef,
                        (Value::True, false) | (Value::False, true) => Value::True,
                        _ => Value::False,
                    };
                    if val != Value::False {
                        clause.lits.swap(1, k);
                        self.watches[clause.lits[1].negate().index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                // Unit or conflict.
                keep.push(ci);
                if self.value(first) == Value::False {
                    // Conflict: retain the remaining watchers untouched.
                    keep.extend_from_slice(&watchers[i..]);
                    conflict = Some(ci);
                    break;
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            self.watches[p.index()] = keep;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, var: usize) {
        self.activity[var] += self.var_inc;
        if self.activity[var] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(var, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot 0 for the asserting literal
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut confl = Some(confl);
        let current = self.decision_level();
        loop {
            let ci = confl.expect("implication graph is connected");
            let start = usize::from(p.is_some());
            // Bumping happens per distinct variable seen in the analysis.
            let lits: Vec<Lit> = self.clauses[ci].lits[start..].to_vec();
            for q in lits {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Next marked literal on the trail.
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            self.seen[pl.var()] = false;
            counter -= 1;
            p = Some(pl);
            if counter == 0 {
                break;
            }
            confl = self.reason[pl.var()];
        }
        learnt[0] = p.expect("first UIP exists").negate();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        // Backjump to the second-highest level; move that literal to slot 1
        // so it becomes the other watch.
        let mut backjump = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            backjump = self.level[learnt[1].var()];
        }
        (learnt, backjump)
    }

    fn cancel_until(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target as usize];
        while self.trail.len() > bound {
            let l = self.trail.pop().expect("trail bounded");
            let v = l.var();
            self.phase[v] = !l.negated();
            self.assigns[v] = Value::Undef;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail_lim.truncate(target as usize);
        self.qhead = self.trail.len();
    }

    fn decide(&mut self, l: Lit) {
        self.trail_lim.push(self.trail.len());
        self.stats.decisions += 1;
        self.enqueue(l, None);
    }

    /// Next decision: drain the pending hook queue first, then the heap.
    /// Heap decisions refill the queue from the similarity index; hook
    /// decisions do not (a single non-recursive pass per trigger).
    fn next_decision(&mut self) -> Option<Lit> {
        while let Some(l) = self.pending.pop_front() {
            if self.value(l) == Value::Undef {
                self.stats.hook_assignments += 1;
                return Some(l);
            }
        }
        loop {
            let var = self.order.pop(&self.activity)?;
            if self.assigns[var] == Value::Undef {
                let decision = Lit::new(var, !self.phase[var]);
                if let Some(index) = self.index {
                    let assigned_value = !decision.negated();
                    for &nv in index.neighbors_of(var + 1) {
                        let nv0 = nv - 1;
                        if nv0 < self.num_vars && self.assigns[nv0] == Value::Undef {
                            // Opposite value: neighbor = !v.
                            self.pending.push_back(Lit::new(nv0, assigned_value));
                        }
                    }
                }
                return Some(decision);
            }
        }
    }

    fn search(&mut self, limits: &SolveLimits) -> SolveStatus {
        if self.unsat {
            return SolveStatus::Unsat;
        }
        let mut conflicts_since_restart = 0u64;
        let mut restart_budget = luby(self.stats.restarts) * RESTART_BASE;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return SolveStatus::Unsat;
                }
                if let Some(max) = limits.max_conflicts {
                    if self.stats.conflicts >= max {
                        return SolveStatus::Unknown;
                    }
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                self.pending.clear();
                let asserting = learnt[0];
                if learnt.len() == 1 {
                    self.enqueue(asserting, None);
                } else {
                    let ci = self.add_clause(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                self.stats.learned_clauses += 1;
                self.var_inc /= VAR_DECAY;
            } else {
                if self.trail.len() == self.num_vars {
                    return SolveStatus::Sat;
                }
                if conflicts_since_restart >= restart_budget {
                    self.stats.restarts += 1;
                    conflicts_since_restart = 0;
                    restart_budget = luby(self.stats.restarts) * RESTART_BASE;
                    self.cancel_until(0);
                    self.pending.clear();
                    continue;
                }
                let decision = self.next_decision().expect("unassigned var exists");
                self.decide(decision);
            }
        }
    }

    fn learned_clauses(&self) -> Vec<Vec<i32>> {
        self.clauses[self.first_learnt..]
            .iter()
            .map(|c| {
                c.lits
                    .iter()
                    .map(|l| {
                        let v = (l.var() + 1) as i32;
                        if l.negated() {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Solve a CNF. `index` enables the similarity decision hook; `limits`
/// bounds the conflict count (exceeding it yields `Unknown`, not an error).
/// SAT models are self-checked against every input clause before returning.
pub fn solve(
    cnf: &Cnf,
    index: Option<&SimilarityIndex>,
    limits: &SolveLimits,
) -> Result<SolveResult, SatError> {
    let (result, _) = solve_with_learned(cnf, index, limits)?;
    Ok(result)
}

/// Like [`solve`], additionally returning the learned clauses (used by the
/// soundness property tests).
pub fn solve_with_learned(
    cnf: &Cnf,
    index: Option<&SimilarityIndex>,
    limits: &SolveLimits,
) -> Result<(SolveResult, Vec<Vec<i32>>), SatError> {
    let mut solver = Solver::new(cnf, index)?;
    let status = solver.search(limits);
    let model = if status == SolveStatus::Sat {
        let model: Vec<bool> = solver
            .assigns
            .iter()
            .map(|v| matches!(v, Value::True))
            .collect();
        assert!(
            cnf.is_satisfied_by(&model),
            "internal error: model fails self-check"
        );
        Some(model)
    } else {
        None
    };
    let learned = solver.learned_clauses();
    Ok((
        SolveResult {
            status,
            model,
            stats: solver.stats,
        },
        learned,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use std::collections::BTreeMap;

    fn cnf(num_vars: usize, clauses: Vec<Vec<i32>>) -> Cnf {
        Cnf {
            num_vars,
            clauses,
            var_of_node: BTreeMap::new(),
        }
    }

    /// Bit-parallel brute force: column bitsets over all 2^n assignments.
    pub fn brute_force_sat(c: &Cnf) -> bool {
        let n = c.num_vars;
        assert!(n <= 20);
        let total = 1usize << n;
        let words = total.div_ceil(64);
        // column[v][w] bit b = value of var v+1 in assignment w*64+b
        let column = |v: usize| -> Vec<u64> {
            let mut col = vec![0u64; words];
            if v < 6 {
                let stripes = [
                    0xAAAA_AAAA_AAAA_AAAAu64,
                    0xCCCC_CCCC_CCCC_CCCC,
                    0xF0F0_F0F0_F0F0_F0F0,
                    0xFF00_FF00_FF00_FF00,
                    0xFFFF_0000_FFFF_0000,
                    0xFFFF_FFFF_0000_0000,
                ];
                col.fill(stripes[v]);
            } else {
                for (w, word) in col.iter_mut().enumerate() {
                    if (w >> (v - 6)) & 1 == 1 {
                        *word = !0u64;
                    }
                }
            }
            col
        };
        let mut acc = vec![!0u64; words];
        if !total.is_multiple_of(64) {
            acc[words - 1] = (1u64 << (total % 64)) - 1;
        }
        for clause in &c.clauses {
            let mut sat = vec![0u64; words];
            for &lit in clause {
                let col = column(lit.unsigned_abs() as usize - 1);
                for (s, cw) in sat.iter_mut().zip(col.iter()) {
                    *s |= if lit > 0 { *cw } else { !*cw };
                }
            }
            for (a, s) in acc.iter_mut().zip(sat.iter()) {
                *a &= s;
            }
            if acc.iter().all(|&w| w == 0) {
                return false;
            }
        }
        acc.iter().any(|&w| w != 0)
    }

    #[test]
    fn contradiction_is_unsat() {
        let c = cnf(1, vec![vec![1], vec![-1]]);
        let res = solve(&c, None, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Unsat);
    }

    #[test]
    fn single_unit_is_sat() {
        let c = cnf(1, vec![vec![1]]);
        let res = solve(&c, None, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Sat);
        assert_eq!(res.model.unwrap(), vec![true]);
    }

    #[test]
    fn empty_clause_rejected() {
        let c = cnf(1, vec![vec![]]);
        assert!(solve(&c, None, &SolveLimits::default()).is_err());
    }

    fn random_3cnf(rng: &mut SplitMix64, num_vars: usize, num_clauses: usize) -> Cnf {
        let clauses = (0..num_clauses)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        let v = rng.next_below(num_vars) as i32 + 1;
                        if rng.next_bool() {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        cnf(num_vars, clauses)
    }

    #[test]
    fn random_3cnf_statuses_match_brute_force() {
        let mut rng = SplitMix64::new(2024);
        for trial in 0..200 {
            let nv = 4 + rng.next_below(13);
            let nc = (nv as f64 * (2.0 + rng.next_f64() * 4.0)) as usize;
            let c = random_3cnf(&mut rng, nv, nc.max(1));
            let expected = brute_force_sat(&c);
            let res = solve(&c, None, &SolveLimits::default()).unwrap();
            assert_ne!(res.status, SolveStatus::Unknown);
            assert_eq!(
                res.status == SolveStatus::Sat,
                expected,
                "trial {trial}: {c:?}"
            );
        }
    }

    #[test]
    fn hook_preserves_status_on_random_instances() {
        let mut rng = SplitMix64::new(777);
        for _ in 0..100 {
            let nv = 5 + rng.next_below(10);
            let nc = nv * 4;
            let c = random_3cnf(&mut rng, nv, nc);
            // Random neighbor structure.
            let pairs: Vec<(usize, usize)> = (0..nv)
                .map(|_| (1 + rng.next_below(nv), 1 + rng.next_below(nv)))
                .collect();
            let idx = SimilarityIndex::from_pairs(nv, &pairs, 1e-5);
            let plain = solve(&c, None, &SolveLimits::default()).unwrap();
            let hooked = solve(&c, Some(&idx), &SolveLimits::default()).unwrap();
            assert_eq!(plain.status, hooked.status);
            if let Some(m) = hooked.model {
                assert!(c.is_satisfied_by(&m));
            }
        }
    }

    #[test]
    fn hook_records_assignments() {
        // Two mutually-neighboring free variables; deciding one assigns the
        // other to the opposite value through the hook.
        let c = cnf(3, vec![vec![1, 2, 3], vec![-1, -2]]);
        let idx = SimilarityIndex::from_pairs(3, &[(1, 2)], 1e-5);
        let res = solve(&c, Some(&idx), &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Sat);
        assert!(res.stats.hook_assignments > 0, "stats: {:?}", res.stats);
    }

    #[test]
    fn budget_returns_unknown() {
        // A formula hard enough to need more than 1 conflict: pigeonhole-ish.
        let mut clauses = Vec::new();
        let n = 6; // vars 1..=12 as 4 pigeons x 3 holes
        let var = |p: usize, h: usize| (p * 3 + h + 1) as i32;
        for p in 0..4 {
            clauses.push((0..3).map(|h| var(p, h)).collect::<Vec<_>>());
        }
        for h in 0..3 {
            for p1 in 0..4 {
                for p2 in (p1 + 1)..4 {
                    clauses.push(vec![-var(p1, h), -var(p2, h)]);
                }
            }
        }
        let c = cnf(n * 2, clauses);
        let full = solve(&c, None, &SolveLimits::default()).unwrap();
        assert_eq!(full.status, SolveStatus::Unsat);
        let budgeted = solve(&c, None, &SolveLimits::conflicts(1)).unwrap();
        assert_eq!(budgeted.status, SolveStatus::Unknown);
    }

    #[test]
    fn learned_clauses_are_consequences() {
        // Every learned clause must be satisfied by every model of the
        // original formula.
        let mut rng = SplitMix64::new(31337);
        for _ in 0..30 {
            let nv = 5 + rng.next_below(6);
            let c = random_3cnf(&mut rng, nv, nv * 4);
            let (res, learned) =
                solve_with_learned(&c, None, &SolveLimits::default()).unwrap();
            let _ = res;
            let total = 1usize << nv;
            for bits in 0..total {
                let assignment: Vec<bool> = (0..nv).map(|i| (bits >> i) & 1 == 1).collect();
                if c.is_satisfied_by(&assignment) {
                    for lc in &learned {
                        let ok = lc.iter().any(|&lit| {
                            let v = assignment[lit.unsigned_abs() as usize - 1];
                            if lit > 0 {
                                v
                            } else {
                                !v
                            }
                        });
                        assert!(ok, "learned clause {lc:?} not implied");
                    }
                }
            }
        }
    }

    #[test]
    fn all_vars_assigned_in_model() {
        // Vars absent from clauses still get values.
        let c = cnf(5, vec![vec![1, 2]]);
        let res = solve(&c, None, &SolveLimits::default()).unwrap();
        assert_eq!(res.model.unwrap().len(), 5);
    }

    #[test]
    fn luby_sequence_prefix() {
        let expect = [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(luby(k as u64), e, "k={k}");
        }
    }
}
