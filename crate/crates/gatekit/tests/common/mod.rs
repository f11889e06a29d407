//! Shared fixtures and independent oracles for the integration suites.

#![allow(dead_code)]

use gatekit::aig::{random_aig, Aig, AigBuilder, Gate, NodeId, RandomAigConfig};
use gatekit::dataset::CircuitRecord;
use gatekit::rng::SplitMix64;
use gatekit::sim::SimConfig;

/// Naive recursive per-pattern evaluator: the simulator oracle.
pub fn naive_eval(aig: &Aig, node: NodeId, pattern: &[bool]) -> bool {
    match aig.gate(node) {
        Gate::Pi => {
            let k = aig.pis().iter().position(|&p| p == node).expect("pi");
            pattern[k]
        }
        Gate::Not(a) => !naive_eval(aig, a, pattern),
        Gate::And(a, b) => naive_eval(aig, a, pattern) && naive_eval(aig, b, pattern),
    }
}

/// Corpus circuit: a random AIG with controlled redundancy.
///
/// Positives come from injected reassociated AND trees (equivalent but
/// structurally different) and duplicated minterm cones; hard negatives
/// come from near-miss cones (functions differing on a few patterns) and
/// from minterm cones whose structure is identical but whose PI-to-slot
/// wiring is permuted, so only PI identity separates them from the true
/// duplicates.
pub fn corpus_circuit(seed: u64) -> Aig {
    let mut rng = SplitMix64::new(seed);
    let num_pi = 4 + rng.next_below(5); // 4..=8
    let num_gates = 10 + rng.next_below(17); // 10..=26
    let base = nand_style_random(num_pi, num_gates, rng.next_u64());
    let with_dups = inject_reassociations(&base, 2, rng.next_u64());
    let with_twins = inject_wiring_twins(&with_dups, rng.next_u64());
    enrich_with_near_misses(&with_twins, 3, rng.next_u64())
}

/// Append four structurally identical 4-literal minterm cones: two wired
/// with PI assignment sigma1 (mutually equivalent) and two with sigma2,
/// which swaps a negated slot with a plain slot (equivalent to each other,
/// inequivalent to the sigma1 pair). The cross pairs differ on exactly two
/// of the 2^4 support patterns, so their truth-table distance is small and
/// passes the extreme-distance filter, yet no structural cue tells the
/// wirings apart: only the PI identities do.
fn inject_wiring_twins(base: &Aig, seed: u64) -> Aig {
    let mut rng = SplitMix64::new(seed);
    if base.num_pis() < 4 {
        return base.clone();
    }
    let mut b = AigBuilder::new();
    for gate in base.gates() {
        match *gate {
            Gate::Pi => {
                b.add_pi();
            }
            Gate::Not(a) => {
                b.add_not(a).expect("order");
            }
            Gate::And(x, y) => {
                b.add_and(x, y).expect("order");
            }
        }
    }
    // Four distinct PIs.
    let mut chosen: Vec<NodeId> = Vec::new();
    while chosen.len() < 4 {
        let pi = base.pis()[rng.next_below(base.num_pis())];
        if !chosen.contains(&pi) {
            chosen.push(pi);
        }
    }
    let (q0, q1, q2, q3) = (chosen[0], chosen[1], chosen[2], chosen[3]);
    // Shared negated leaves so the copies carry no private NOT structure.
    let mut not_of: std::collections::HashMap<NodeId, NodeId> = Default::default();
    let mut leaf = |b: &mut AigBuilder, pi: NodeId, negated: bool| -> NodeId {
        if negated {
            *not_of
                .entry(pi)
                .or_insert_with(|| b.add_not(pi).expect("order"))
        } else {
            pi
        }
    };
    // Slot polarity is fixed (slots 1 and 3 negated); the wiring permutes
    // which PI sits in which slot. sigma1 = (q0,q1,q2,q3); sigma2 swaps
    // the negated slot 1 with the plain slot 2.
    let sigma1 = [q0, q1, q2, q3];
    let sigma2 = [q0, q2, q1, q3];
    let build_cone = |b: &mut AigBuilder,
                      not_of: &mut dyn FnMut(&mut AigBuilder, NodeId, bool) -> NodeId,
                      wiring: &[NodeId; 4]|
     -> NodeId {
        let l0 = not_of(b, wiring[0], false);
        let l1 = not_of(b, wiring[1], true);
        let l2 = not_of(b, wiring[2], false);
        let l3 = not_of(b, wiring[3], true);
        let c1 = b.add_and(l0, l1).expect("order");
        let c2 = b.add_and(c1, l2).expect("order");
        b.add_and(c2, l3).expect("order")
    };
    let mut leaf_fn = |b: &mut AigBuilder, pi: NodeId, neg: bool| leaf(b, pi, neg);
    let roots = [
        build_cone(&mut b, &mut leaf_fn, &sigma1),
        build_cone(&mut b, &mut leaf_fn, &sigma1),
        build_cone(&mut b, &mut leaf_fn, &sigma2),
        build_cone(&mut b, &mut leaf_fn, &sigma2),
    ];
    let mut pos: Vec<NodeId> = base.pos().to_vec();
    pos.extend(roots);
    b.finish(pos).expect("acyclic")
}

/// Random AIG discipline mirroring optimized circuits: ANDs over distinct
/// fan-ins, NOT never applied to another NOT, and no gate whose exhaustive
/// truth table is constant or duplicates an existing node's function. The
/// base is therefore irredundant; all equivalent pairs are injected
/// deliberately afterwards.
fn nand_style_random(num_pi: usize, num_gates: usize, seed: u64) -> Aig {
    let mut rng = SplitMix64::new(seed);
    let mut b = AigBuilder::new();
    for _ in 0..num_pi {
        b.add_pi();
    }
    let pi_sigs = gatekit::sim::exhaustive_patterns(num_pi);
    let total_bits = 1usize << num_pi;
    let mut sigs: Vec<Vec<u64>> = pi_sigs.iter().map(|s| s.words().to_vec()).collect();
    let mut seen_sigs: std::collections::HashSet<Vec<u64>> =
        sigs.iter().cloned().collect();
    let tail_mask = if total_bits.is_multiple_of(64) {
        !0u64
    } else {
        (1u64 << (total_bits % 64)) - 1
    };
    let all_ones = {
        let mut v = vec![!0u64; total_bits.div_ceil(64)];
        *v.last_mut().expect("nonempty") = tail_mask;
        v
    };
    let is_const = |s: &[u64]| s.iter().all(|&w| w == 0) || s == &all_ones[..];
    let mut is_not: Vec<bool> = vec![false; num_pi];
    let mut consumed = vec![false; num_pi];
    let mut created = 0;
    let mut attempts = 0;
    while created < num_gates && attempts < num_gates * 40 {
        attempts += 1;
        let len = b.len();
        let pick = |rng: &mut SplitMix64| -> NodeId {
            if len > num_pi && rng.next_f64() < 0.6 {
                len / 2 + rng.next_below(len - len / 2)
            } else {
                rng.next_below(len)
            }
        };
        if rng.next_f64() < 0.3 {
            let a = pick(&mut rng);
            if is_not[a] {
                continue;
            }
            let mut sig: Vec<u64> = sigs[a].iter().map(|w| !w).collect();
            *sig.last_mut().expect("nonempty") &= tail_mask;
            if is_const(&sig) || !seen_sigs.insert(sig.clone()) {
                continue;
            }
            b.add_not(a).expect("order");
            sigs.push(sig);
            is_not.push(true);
            consumed[a] = true;
            consumed.push(false);
        } else {
            let a = pick(&mut rng);
            let c = pick(&mut rng);
            if a == c {
                continue;
            }
            let sig: Vec<u64> = sigs[a]
                .iter()
                .zip(sigs[c].iter())
                .map(|(x, y)| x & y)
                .collect();
            if is_const(&sig) || !seen_sigs.insert(sig.clone()) {
                continue;
            }
            b.add_and(a, c).expect("order");
            sigs.push(sig);
            is_not.push(false);
            consumed[a] = true;
            consumed[c] = true;
            consumed.push(false);
        }
        created += 1;
    }
    let pos: Vec<NodeId> = (0..b.len()).filter(|&i| !consumed[i]).collect();
    b.finish(pos).expect("acyclic")
}

/// Inject up to `t` reassociated copies of 3-input AND chains: where the
/// circuit computes AND(AND(a,b),c), add AND(a,AND(b,c)) as a new PO. The
/// copy is functionally identical with a different structure.
fn inject_reassociations(base: &Aig, t: usize, seed: u64) -> Aig {
    let mut rng = SplitMix64::new(seed);
    let mut b = AigBuilder::new();
    for gate in base.gates() {
        match *gate {
            Gate::Pi => {
                b.add_pi();
            }
            Gate::Not(a) => {
                b.add_not(a).expect("order");
            }
            Gate::And(x, y) => {
                b.add_and(x, y).expect("order");
            }
        }
    }
    // Find AND(AND(a,b), c) shapes.
    let mut shapes: Vec<(NodeId, NodeId, NodeId, NodeId)> = Vec::new();
    for n in 0..base.len() {
        if let Gate::And(x, y) = base.gate(n) {
            for (inner, other) in [(x, y), (y, x)] {
                if let Gate::And(a, bb) = base.gate(inner) {
                    shapes.push((n, a, bb, other));
                }
            }
        }
    }
    let mut extra_pos = Vec::new();
    for _ in 0..t {
        if shapes.is_empty() {
            break;
        }
        let (_, a, bb, c) = shapes[rng.next_below(shapes.len())];
        // AND(a, AND(b, c)) -- same function, reassociated.
        let inner = b.add_and(bb, c).expect("order");
        let outer = b.add_and(a, inner).expect("order");
        extra_pos.push(outer);
    }
    let mut pos: Vec<NodeId> = base.pos().to_vec();
    pos.extend(extra_pos);
    b.finish(pos).expect("acyclic")
}

/// Append up to `t` near-miss cones: for a random gate `g`, add
/// `g' = AND(g, NOT(minterm))` with the minterm drawn from `g`'s own
/// support. `g'` agrees with `g` everywhere except where the minterm
/// holds, giving pairs with small nonzero truth-table distance.
pub fn enrich_with_near_misses(base: &Aig, t: usize, seed: u64) -> Aig {
    let mut rng = SplitMix64::new(seed);
    let mut b = AigBuilder::new();
    for gate in base.gates() {
        match *gate {
            Gate::Pi => {
                b.add_pi();
            }
            Gate::Not(a) => {
                b.add_not(a).expect("order");
            }
            Gate::And(x, y) => {
                b.add_and(x, y).expect("order");
            }
        }
    }
    let masks = base.support_masks();
    let candidates: Vec<NodeId> = (0..base.len())
        .filter(|&n| {
            base.gate(n).kind() == gatekit::aig::GateKind::And
                && masks[n].iter().map(|w| w.count_ones()).sum::<u32>() >= 3
        })
        .collect();
    let mut extra_pos = Vec::new();
    if !candidates.is_empty() {
        for _ in 0..t {
            let g = candidates[rng.next_below(candidates.len())];
            let support: Vec<NodeId> = base
                .support(g)
                .expect("valid node")
                .support
                .into_iter()
                .collect();
            let k = 2 + rng.next_below(2); // 2..=3 literals
            let mut lits = Vec::new();
            let mut chosen = std::collections::BTreeSet::new();
            while chosen.len() < k.min(support.len()) {
                chosen.insert(support[rng.next_below(support.len())]);
            }
            for pi in chosen {
                if rng.next_bool() {
                    lits.push(b.add_not(pi).expect("order"));
                } else {
                    lits.push(pi);
                }
            }
            let mut minterm = lits[0];
            for &l in &lits[1..] {
                minterm = b.add_and(minterm, l).expect("order");
            }
            let guard = b.add_not(minterm).expect("order");
            let near = b.add_and(g, guard).expect("order");
            extra_pos.push(near);
        }
    }
    let mut pos: Vec<NodeId> = base.pos().to_vec();
    pos.extend(extra_pos);
    b.finish(pos).expect("acyclic")
}

/// The acceptance corpus: 200 random AIGs (<= 8 PIs, <= 60 gates) with
/// exhaustive signatures.
pub fn training_corpus(n: usize, max_pairs: usize, seed: u64) -> Vec<CircuitRecord> {
    (0..n as u64)
        .map(|i| {
            let aig = corpus_circuit(seed.wrapping_mul(1_000_003) + i);
            CircuitRecord::build(aig, &SimConfig::default(), max_pairs, seed + i)
                .expect("simulation succeeds")
        })
        .collect()
}

/// A circuit with `k` injected duplicate cones: a base random AIG plus
/// structural copies of `k` internal cones (same PIs, fresh gates). Returns
/// the fixture and the AND count of the deduplicated reference (the base).
pub fn duplicate_fixture(seed: u64, k: usize) -> (Aig, usize) {
    let mut rng = SplitMix64::new(seed);
    loop {
        let num_pi = 5 + rng.next_below(3);
        let base = random_aig(&RandomAigConfig {
            num_pi,
            num_gates: 15 + rng.next_below(16),
            not_prob: 0.25,
            locality: 0.5,
            strash: true,
            seed: rng.next_u64(),
        });
        // The reference count is only exact when the base itself carries no
        // internal equivalences: require all-distinct exhaustive signatures.
        let pi_sigs = gatekit::sim::exhaustive_patterns(base.num_pis());
        let sigs = gatekit::sim::simulate(&base, &pi_sigs).expect("sim");
        let mut seen = std::collections::HashSet::new();
        if !sigs.iter().all(|s| seen.insert(s.words().to_vec())) {
            continue; // resample: base has an internal duplicate
        }
        // Duplicate k internal cones structurally.
        let mut b = AigBuilder::new();
        for gate in base.gates() {
            match *gate {
                Gate::Pi => {
                    b.add_pi();
                }
                Gate::Not(a) => {
                    b.add_not(a).expect("order");
                }
                Gate::And(x, y) => {
                    b.add_and(x, y).expect("order");
                }
            }
        }
        let gates_only: Vec<NodeId> = (0..base.len())
            .filter(|&n| base.gate(n).kind() != gatekit::aig::GateKind::Pi)
            .collect();
        let mut extra_pos = Vec::new();
        for _ in 0..k {
            let root = gates_only[rng.next_below(gates_only.len())];
            let cone = base.support(root).expect("cone");
            // Copy cone gates in id order with fresh ids.
            let mut remap: std::collections::HashMap<NodeId, NodeId> =
                std::collections::HashMap::new();
            for &n in &cone.gates {
                match base.gate(n) {
                    Gate::Pi => {
                        remap.insert(n, n); // PIs shared
                    }
                    Gate::Not(a) => {
                        let id = b.add_not(remap[&a]).expect("order");
                        remap.insert(n, id);
                    }
                    Gate::And(x, y) => {
                        let id = b.add_and(remap[&x], remap[&y]).expect("order");
                        remap.insert(n, id);
                    }
                }
            }
            extra_pos.push(remap[&root]);
        }
        let mut pos: Vec<NodeId> = base.pos().to_vec();
        pos.extend(extra_pos);
        let fixture = b.finish(pos).expect("acyclic");
        return (fixture, base.num_ands());
    }
}
