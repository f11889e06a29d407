//! Seeded random AIG generation for synthetic corpora and fixtures.

use super::{Aig, AigBuilder, NodeId};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct RandomAigConfig {
    pub num_pi: usize,
    /// Number of non-PI nodes to create (ANDs and NOTs combined).
    pub num_gates: usize,
    /// Probability that a new gate is a NOT rather than an AND.
    pub not_prob: f64,
    /// Bias toward recently created nodes when picking fan-ins; higher
    /// values produce deeper circuits with more reconvergence.
    pub locality: f64,
    /// Structural hashing during generation: never create two syntactically
    /// identical gates (duplicates still arise semantically).
    pub strash: bool,
    pub seed: u64,
}

impl Default for RandomAigConfig {
    fn default() -> Self {
        RandomAigConfig {
            num_pi: 8,
            num_gates: 40,
            not_prob: 0.3,
            locality: 0.5,
            strash: false,
            seed: 0,
        }
    }
}

/// Generate a random combinational AIG. Every node without fan-out becomes
/// a PO, so the whole graph is PO-reachable. Deterministic in the config.
pub fn random_aig(cfg: &RandomAigConfig) -> Aig {
    assert!(cfg.num_pi >= 1, "need at least one PI");
    let mut rng = SplitMix64::new(cfg.seed);
    let mut b = AigBuilder::new();
    let mut consumed = vec![false; cfg.num_pi + cfg.num_gates];
    let mut seen_and: std::collections::HashSet<(NodeId, NodeId)> = Default::default();
    let mut seen_not: std::collections::HashSet<NodeId> = Default::default();
    for _ in 0..cfg.num_pi {
        b.add_pi();
    }
    let pick = |rng: &mut SplitMix64, len: usize| -> NodeId {
        if len > cfg.num_pi && rng.next_f64() < cfg.locality {
            let lo = len / 2;
            lo + rng.next_below(len - lo)
        } else {
            rng.next_below(len)
        }
    };
    let mut created = 0usize;
    let mut attempts = 0usize;
    while created < cfg.num_gates && attempts < cfg.num_gates * 20 {
        attempts += 1;
        let len = b.len();
        if rng.next_f64() < cfg.not_prob {
            let a = pick(&mut rng, len);
            if cfg.strash && !seen_not.insert(a) {
                continue;
            }
            b.add_not(a).expect("in range");
            consumed[a] = true;
        } else {
            let a = pick(&mut rng, len);
            let c = pick(&mut rng, len);
            if cfg.strash && !seen_and.insert((a.min(c), a.max(c))) {
                continue;
            }
            b.add_and(a, c).expect("in range");
            consumed[a] = true;
            consumed[c] = true;
        }
        created += 1;
    }
    consumed.truncate(b.len());
    let pos: Vec<NodeId> = (0..b.len()).filter(|&i| !consumed[i]).collect();
    b.finish(pos).expect("acyclic by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = RandomAigConfig::default();
        assert_eq!(random_aig(&cfg), random_aig(&cfg));
    }

    #[test]
    fn sizes_match_config() {
        let cfg = RandomAigConfig {
            num_pi: 6,
            num_gates: 33,
            ..RandomAigConfig::default()
        };
        let aig = random_aig(&cfg);
        assert_eq!(aig.num_pis(), 6);
        assert_eq!(aig.len(), 6 + 33);
        assert!(!aig.pos().is_empty());
    }

    #[test]
    fn all_nodes_po_reachable() {
        let aig = random_aig(&RandomAigConfig::default());
        let mut seen = vec![false; aig.len()];
        let mut stack: Vec<NodeId> = aig.pos().to_vec();
        while let Some(n) = stack.pop() {
            if !seen[n] {
                seen[n] = true;
                stack.extend(aig.gate(n).fanins());
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
