//! Bit-parallel random simulation: incomplete truth tables (signatures),
//! logic probabilities, and pairwise normalized Hamming distances.
//!
//! A [`Signature`] packs one bit per simulated pattern into 64-bit words;
//! AND gates become word-wise `&`, NOT gates word-wise complement under the
//! terminal mask, so simulating `P` patterns over the whole circuit is a
//! single topological pass of word operations.

use crate::aig::{Aig, Gate};
use crate::rng::SplitMix64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("signature length mismatch: {0} vs {1} patterns")]
    SignatureLengthMismatch(usize, usize),
    #[error("expected {expected} PI signatures, got {got}")]
    PiCountMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Number of random patterns. 15000 packs into 234 full words plus a
    /// 24-bit terminal word.
    pub num_patterns: usize,
    pub seed: u64,
    /// When `2^num_pi <= num_patterns`, simulate all input combinations
    /// instead of sampling: signatures become complete truth tables.
    pub exhaustive_when_small: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_patterns: 15_000,
            seed: 0,
            exhaustive_when_small: true,
        }
    }
}

impl SimConfig {
    /// Effective pattern source for a circuit with `num_pi` inputs.
    pub fn patterns_for(&self, num_pi: usize) -> PatternPlan {
        if self.exhaustive_when_small
            && num_pi < usize::BITS as usize
            && (1usize << num_pi) <= self.num_patterns
        {
            PatternPlan::Exhaustive { num_pi }
        } else {
            PatternPlan::Random {
                num_patterns: self.num_patterns,
                seed: self.seed,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternPlan {
    Exhaustive { num_pi: usize },
    Random { num_patterns: usize, seed: u64 },
}

impl PatternPlan {
    pub fn generate(&self, num_pi: usize) -> Vec<Signature> {
        match *self {
            PatternPlan::Exhaustive { .. } => exhaustive_patterns(num_pi),
            PatternPlan::Random { num_patterns, seed } => random_patterns(
                num_pi,
                &SimConfig {
                    num_patterns,
                    seed,
                    exhaustive_when_small: false,
                },
            ),
        }
    }
}

/// Bit-packed incomplete truth table over `len_bits` simulated patterns.
/// Bit `k` of the signature of node `g` is the value of `g` under pattern
/// `k`. Bits beyond `len_bits` in the last word are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    words: Vec<u64>,
    len_bits: usize,
}

impl Signature {
    pub fn zeros(len_bits: usize) -> Self {
        Signature {
            words: vec![0; len_bits.div_ceil(64)],
            len_bits,
        }
    }

    pub fn from_words(words: Vec<u64>, len_bits: usize) -> Self {
        assert_eq!(words.len(), len_bits.div_ceil(64));
        let mut sig = Signature { words, len_bits };
        sig.mask_tail();
        sig
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn len_bits(&self) -> usize {
        self.len_bits
    }

    pub fn bit(&self, k: usize) -> bool {
        debug_assert!(k < self.len_bits);
        (self.words[k / 64] >> (k % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, k: usize, v: bool) {
        debug_assert!(k < self.len_bits);
        let m = 1u64 << (k % 64);
        if v {
            self.words[k / 64] |= m;
        } else {
            self.words[k / 64] &= !m;
        }
    }

    /// Append one pattern bit (grows by a word when needed).
    pub fn push_bit(&mut self, v: bool) {
        if self.len_bits.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len_bits += 1;
        self.set_bit(self.len_bits - 1, v);
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn tail_mask(&self) -> u64 {
        let rem = self.len_bits % 64;
        if rem == 0 {
            !0
        } else {
            (1u64 << rem) - 1
        }
    }

    fn mask_tail(&mut self) {
        let mask = self.tail_mask();
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    fn check_len(&self, other: &Signature) -> Result<(), SimError> {
        if self.len_bits != other.len_bits {
            Err(SimError::SignatureLengthMismatch(
                self.len_bits,
                other.len_bits,
            ))
        } else {
            Ok(())
        }
    }
}

/// Independent fair-coin patterns per PI, deterministic in the config.
/// Words are drawn PI-major (all words of PI 0, then PI 1, ...).
pub fn random_patterns(num_pi: usize, config: &SimConfig) -> Vec<Signature> {
    assert!(num_pi >= 1);
    assert!(config.num_patterns >= 1);
    let words = config.num_patterns.div_ceil(64);
    let mut rng = SplitMix64::new(config.seed);
    (0..num_pi)
        .map(|_| {
            let ws: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
            Signature::from_words(ws, config.num_patterns)
        })
        .collect()
}

/// All `2^num_pi` input combinations; pattern `k` assigns bit `(k >> i) & 1`
/// to PI `i`, so signatures are complete truth tables in standard order.
pub fn exhaustive_patterns(num_pi: usize) -> Vec<Signature> {
    assert!(num_pi >= 1 && num_pi < usize::BITS as usize);
    let p = 1usize << num_pi;
    (0..num_pi)
        .map(|i| {
            let mut sig = Signature::zeros(p);
            if i < 6 {
                let stripe = match i {
                    0 => 0xAAAA_AAAA_AAAA_AAAAu64,
                    1 => 0xCCCC_CCCC_CCCC_CCCC,
                    2 => 0xF0F0_F0F0_F0F0_F0F0,
                    3 => 0xFF00_FF00_FF00_FF00,
                    4 => 0xFFFF_0000_FFFF_0000,
                    _ => 0xFFFF_FFFF_0000_0000,
                };
                for w in sig.words.iter_mut() {
                    *w = stripe;
                }
            } else {
                for (w, word) in sig.words.iter_mut().enumerate() {
                    if (w >> (i - 6)) & 1 == 1 {
                        *word = !0;
                    }
                }
            }
            sig.mask_tail();
            sig
        })
        .collect()
}

/// Word-parallel simulation of every node, in topological order.
pub fn simulate(aig: &Aig, pi_signatures: &[Signature]) -> Result<Vec<Signature>, SimError> {
    if pi_signatures.len() != aig.num_pis() {
        return Err(SimError::PiCountMismatch {
            expected: aig.num_pis(),
            got: pi_signatures.len(),
        });
    }
    if let Some(first) = pi_signatures.first() {
        for s in pi_signatures {
            first.check_len(s)?;
        }
    }
    let len_bits = pi_signatures.first().map(|s| s.len_bits).unwrap_or(0);
    let mut out: Vec<Signature> = Vec::with_capacity(aig.len());
    let mut pi_iter = pi_signatures.iter();
    for gate in aig.gates() {
        let sig = match *gate {
            Gate::Pi => pi_iter.next().expect("count checked").clone(),
            Gate::Not(a) => {
                let mut s = Signature {
                    words: out[a].words.iter().map(|w| !w).collect(),
                    len_bits,
                };
                s.mask_tail();
                s
            }
            Gate::And(a, b) => {
                let (sa, sb) = (&out[a], &out[b]);
                Signature {
                    words: sa
                        .words
                        .iter()
                        .zip(sb.words.iter())
                        .map(|(x, y)| x & y)
                        .collect(),
                    len_bits,
                }
            }
        };
        out.push(sig);
    }
    Ok(out)
}

/// Evaluate a single pattern (one bool per PI) through the circuit.
pub fn evaluate_pattern(aig: &Aig, pattern: &[bool]) -> Vec<bool> {
    assert_eq!(pattern.len(), aig.num_pis());
    let mut vals: Vec<bool> = Vec::with_capacity(aig.len());
    let mut pi_iter = pattern.iter();
    for gate in aig.gates() {
        let v = match *gate {
            Gate::Pi => *pi_iter.next().expect("count checked"),
            Gate::Not(a) => !vals[a],
            Gate::And(a, b) => vals[a] && vals[b],
        };
        vals.push(v);
    }
    vals
}

/// Multi-threaded simulation over disjoint word ranges. Bit-identical to
/// the single-threaded path.
pub fn simulate_threaded(
    aig: &Aig,
    pi_signatures: &[Signature],
    threads: usize,
) -> Result<Vec<Signature>, SimError> {
    if threads <= 1 || pi_signatures.is_empty() {
        return simulate(aig, pi_signatures);
    }
    let total_words = pi_signatures[0].words.len();
    let len_bits = pi_signatures[0].len_bits;
    let chunk = total_words.div_ceil(threads).max(1);
    let ranges: Vec<(usize, usize)> = (0..total_words)
        .step_by(chunk)
        .map(|lo| (lo, (lo + chunk).min(total_words)))
        .collect();
    let mut parts: Vec<Result<Vec<Vec<u64>>, SimError>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(lo, hi)| {
                scope.spawn(move || {
                    let sub: Vec<Signature> = pi_signatures
                        .iter()
                        .map(|s| {
                            let bits = ((hi - lo) * 64).min(len_bits.saturating_sub(lo * 64));
                            Signature::from_words(s.words[lo..hi].to_vec(), bits)
                        })
                        .collect();
                    simulate(aig, &sub).map(|sigs| {
                        sigs.into_iter().map(|s| s.words).collect::<Vec<_>>()
                    })
                })
            })
            .collect();
        for h in handles {
            parts.push(h.join().expect("simulation worker panicked"));
        }
    });
    let mut merged: Vec<Signature> = (0..aig.len()).map(|_| Signature::zeros(len_bits)).collect();
    for (part, &(lo, _hi)) in parts.into_iter().zip(ranges.iter()) {
        let part = part?;
        for (node, words) in part.into_iter().enumerate() {
            merged[node].words[lo..lo + words.len()].copy_from_slice(&words);
        }
    }
    for m in merged.iter_mut() {
        m.mask_tail();
    }
    Ok(merged)
}

/// Fraction of patterns under which the node is logic-1.
pub fn logic_prob(sig: &Signature) -> f64 {
    sig.popcount() as f64 / sig.len_bits as f64
}

/// Normalized truth-table Hamming distance in `[0, 1]`.
pub fn tt_distance(a: &Signature, b: &Signature) -> Result<f64, SimError> {
    a.check_len(b)?;
    let diff: u64 = a
        .words
        .iter()
        .zip(b.words.iter())
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum();
    Ok(diff as f64 / a.len_bits as f64)
}
