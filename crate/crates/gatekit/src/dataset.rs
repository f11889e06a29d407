//! Training-label construction and corpus serialization.
//!
//! A [`CircuitRecord`] bundles a circuit with its simulated signatures,
//! per-node logic probabilities, sampled functionality pairs and sampled
//! reconvergence pairs. Corpora persist as line-delimited JSON with a
//! versioned header.

use crate::aig::{parse_aiger, write_aiger, Aig, NodeId};
use crate::rng::{Fnv1a64, SplitMix64};
use crate::sim::{logic_prob, simulate, tt_distance, Signature, SimConfig};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Pair-sampling constraints: max |prob_i - prob_j|.
pub const MAX_PROB_GAP: f64 = 0.05;
/// Pair-sampling constraints: max |level_i - level_j|.
pub const MAX_LEVEL_GAP: u32 = 5;
/// Pair-sampling constraints: keep only extreme distances,
/// dist <= LOW or dist >= HIGH.
pub const DIST_LOW: f64 = 0.20;
pub const DIST_HIGH: f64 = 0.80;

/// Default cap on sampled pairs per circuit.
pub const DEFAULT_MAX_PAIRS: usize = 1000;

pub const DATASET_HEADER: &str = "{\"gatekit_dataset\": 1}";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("version mismatch: expected header {expected:?}, got {got:?}")]
    VersionMismatch { expected: String, got: String },
    #[error("checksum mismatch on record {index}")]
    ChecksumMismatch { index: usize },
    #[error("record {index} is not valid JSON: {source}")]
    MalformedRecord {
        index: usize,
        source: serde_json::Error,
    },
    #[error("record {index} AIG: {source}")]
    BadAig {
        index: usize,
        source: crate::aig::AigError,
    },
}

/// A sampled gate pair labeled with normalized truth-table distance.
/// `is_equivalent` holds exactly when the distance over the simulated
/// patterns is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub i: NodeId,
    pub j: NodeId,
    pub dist_tt: f64,
    pub is_equivalent: bool,
}

/// A sampled gate pair labeled with common-predecessor (reconvergence)
/// ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcSample {
    pub i: NodeId,
    pub j: NodeId,
    pub label: bool,
}

/// One circuit with everything training needs.
#[derive(Debug, Clone)]
pub struct CircuitRecord {
    pub aig: Aig,
    pub signatures: Vec<Signature>,
    pub probs: Vec<f64>,
    pub pairs: Vec<PairSample>,
    pub rc_pairs: Vec<RcSample>,
}

impl CircuitRecord {
    /// Simulate and sample labels in one step.
    pub fn build(
        aig: Aig,
        sim_config: &SimConfig,
        max_pairs: usize,
        seed: u64,
    ) -> Result<CircuitRecord, crate::sim::SimError> {
        let plan = sim_config.patterns_for(aig.num_pis());
        let pi_sigs = plan.generate(aig.num_pis());
        let signatures = simulate(&aig, &pi_sigs)?;
        let probs = signatures.iter().map(logic_prob).collect();
        let mut record = CircuitRecord {
            aig,
            signatures,
            probs,
            pairs: Vec::new(),
            rc_pairs: Vec::new(),
        };
        record.pairs = sample_function_pairs(&record, max_pairs, seed);
        record.rc_pairs = sample_rc_pairs(&record, max_pairs, seed ^ 0x5eed);
        Ok(record)
    }
}

/// Sample gate pairs satisfying all four constraints:
/// (1) identical PI support, (2) logic probabilities within 5%,
/// (3) logic levels within 5, (4) truth-table distance <= 20% or >= 80%.
/// Canonically ordered `i < j`, without replacement, deterministic in the
/// seed. Empty when nothing qualifies.
pub fn sample_function_pairs(
    record: &CircuitRecord,
    max_pairs: usize,
    seed: u64,
) -> Vec<PairSample> {
    let aig = &record.aig;
    let masks = aig.support_masks();
    // Group nodes by support set; only same-support nodes are comparable.
    let mut groups: HashMap<&[u64], Vec<NodeId>> = HashMap::new();
    for n in 0..aig.len() {
        groups.entry(&masks[n]).or_default().push(n);
    }
    let mut group_lists: Vec<Vec<NodeId>> = groups
        .into_values()
        .filter(|g| g.len() >= 2)
        .collect();
    // Node ids within a group ascend already; order groups deterministically.
    group_lists.sort_unstable_by_key(|g| g[0]);

    let mut eligible: Vec<PairSample> = Vec::new();
    for group in &group_lists {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                if (record.probs[i] - record.probs[j]).abs() > MAX_PROB_GAP {
                    continue;
                }
                if aig.level(i).abs_diff(aig.level(j)) > MAX_LEVEL_GAP {
                    continue;
                }
                let dist = tt_distance(&record.signatures[i], &record.signatures[j])
                    .expect("uniform lengths");
                if dist > DIST_LOW && dist < DIST_HIGH {
                    continue;
                }
                eligible.push(PairSample {
                    i,
                    j,
                    dist_tt: dist,
                    is_equivalent: dist == 0.0,
                });
            }
        }
    }
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut eligible);
    eligible.truncate(max_pairs);
    eligible
}

/// Sample reconvergence pairs: drawn from node pairs with level difference
/// <= 5, class-balanced between positives and negatives when both classes
/// exist, deterministic in the seed.
pub fn sample_rc_pairs(record: &CircuitRecord, max_pairs: usize, seed: u64) -> Vec<RcSample> {
    let aig = &record.aig;
    let n = aig.len();
    if n < 2 {
        return Vec::new();
    }
    let mut rng = SplitMix64::new(seed);
    let mut candidates: Vec<(NodeId, NodeId)> = Vec::new();
    // Full enumeration for small circuits, seeded draws for large ones.
    if n * (n - 1) / 2 <= 200_000 {
        for i in 0..n {
            for j in (i + 1)..n {
                if aig.level(i).abs_diff(aig.level(j)) <= MAX_LEVEL_GAP {
                    candidates.push((i, j));
                }
            }
        }
    } else {
        let mut seen = std::collections::BTreeSet::new();
        let want = max_pairs.saturating_mul(20);
        let mut attempts = 0usize;
        while seen.len() < want && attempts < want * 4 {
            attempts += 1;
            let i = rng.next_below(n);
            let j = rng.next_below(n);
            if i == j {
                continue;
            }
            let (i, j) = (i.min(j), i.max(j));
            if aig.level(i).abs_diff(aig.level(j)) <= MAX_LEVEL_GAP {
                seen.insert((i, j));
            }
        }
        candidates.extend(seen);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, j) in candidates {
        let label = aig.has_common_predecessor(i, j).expect("valid nodes");
        if label {
            pos.push(RcSample { i, j, label });
        } else {
            neg.push(RcSample { i, j, label });
        }
    }
    rng.shuffle(&mut pos);
    rng.shuffle(&mut neg);
    let mut out = Vec::new();
    if pos.is_empty() || neg.is_empty() {
        let mut all = if pos.is_empty() { neg } else { pos };
        all.truncate(max_pairs);
        out = all;
    } else {
        let per_class = (max_pairs / 2).max(1).min(pos.len()).min(neg.len());
        out.extend(pos.into_iter().take(per_class));
        out.extend(neg.into_iter().take(per_class));
    }
    out.sort_unstable_by_key(|s| (s.i, s.j));
    out
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    aig: String,
    num_patterns: usize,
    sig_words: Vec<Vec<u64>>,
    probs: Vec<f64>,
    pairs: Vec<PairSample>,
    rc_pairs: Vec<RcSample>,
    checksum: u64,
}

fn record_checksum(aiger: &str, num_patterns: usize, sig_words: &[Vec<u64>]) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(aiger.as_bytes());
    h.write_u64(num_patterns as u64);
    for words in sig_words {
        for &w in words {
            h.write_u64(w);
        }
    }
    h.finish()
}

pub fn write_dataset(records: &[CircuitRecord], path: &Path) -> Result<(), DatasetError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{DATASET_HEADER}")?;
    for record in records {
        let aiger = write_aiger(&record.aig);
        let num_patterns = record
            .signatures
            .first()
            .map(|s| s.len_bits())
            .unwrap_or(0);
        let sig_words: Vec<Vec<u64>> =
            record.signatures.iter().map(|s| s.words().to_vec()).collect();
        let checksum = record_checksum(&aiger, num_patterns, &sig_words);
        let json = RecordJson {
            aig: aiger,
            num_patterns,
            sig_words,
            probs: record.probs.clone(),
            pairs: record.pairs.clone(),
            rc_pairs: record.rc_pairs.clone(),
            checksum,
        };
        serde_json::to_writer(&mut file, &json).map_err(std::io::Error::other)?;
        writeln!(file)?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<CircuitRecord>, DatasetError> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != DATASET_HEADER {
        return Err(DatasetError::VersionMismatch {
            expected: DATASET_HEADER.to_string(),
            got: header,
        });
    }
    let mut records = Vec::new();
    for (index, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let json: RecordJson = serde_json::from_str(&line)
            .map_err(|source| DatasetError::MalformedRecord { index, source })?;
        if record_checksum(&json.aig, json.num_patterns, &json.sig_words) != json.checksum {
            return Err(DatasetError::ChecksumMismatch { index });
        }
        let aig = parse_aiger(&json.aig).map_err(|source| DatasetError::BadAig { index, source })?;
        let signatures = json
            .sig_words
            .into_iter()
            .map(|w| Signature::from_words(w, json.num_patterns))
            .collect();
        records.push(CircuitRecord {
            aig,
            signatures,
            probs: json.probs,
            pairs: json.pairs,
            rc_pairs: json.rc_pairs,
        });
    }
    Ok(records)
}
