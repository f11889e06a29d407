//! One-round levelized GNN over AIGs.
//!
//! Each node carries a structural embedding `hs` and a functional embedding
//! `hf`, both of dimension `dim`. PIs are initialized specially: orthogonal
//! rows for `hs` (unique identities, zero pairwise dot products) and one
//! shared learned vector for `hf` (all PIs behave identically under random
//! stimulus). Gates then aggregate their fan-ins once, level by level, with
//! four attention aggregators (AND/NOT x structural/functional):
//!
//! - structural stream: `hs_g = aggr(hs_j | j in fanins)`
//! - functional stream: `hf_g = aggr([hs_j, hf_j] | j in fanins)`
//!
//! Two MLP heads read the embeddings out: a logic-probability predictor on
//! `hf` and a reconvergence predictor on pairs of `hs`. Functional
//! similarity between nodes is the cosine of their `hf` rows.

use crate::aig::{Aig, GateKind, NodeId};
use crate::grad::{GradError, Graph, Tensor, TensorId};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error("attention over an empty message list")]
    EmptyMessageList,
    #[error("checkpoint io: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
}

pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    /// Embedding dimension for both hs and hf.
    pub dim: usize,
    /// Hidden width of the two MLP heads.
    pub hidden: usize,
    /// PI encoding: orthogonal structural init per PI. Disabling it gives
    /// every PI the same structural row (the ablation baseline).
    pub pie_enabled: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 64,
            hidden: 32,
            pie_enabled: true,
            seed: 0,
        }
    }
}

/// Weights of one attention aggregator (Wq applies to the learned query
/// seed; Wk/Wv apply to incoming messages of width `msg_width`).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub query_seed: Tensor, // 1 x dim
    pub wq: Tensor,         // dim x dim
    pub wk: Tensor,         // msg_width x dim
    pub wv: Tensor,         // msg_width x dim
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub w1: Tensor, // in x hidden
    pub b1: Tensor, // 1 x hidden
    pub w2: Tensor, // hidden x 1
    pub b2: Tensor, // 1 x 1
}

/// All learnable parameters plus the fixed orthonormal PI basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// Indexed by (kind, stream): [and_s, and_f, not_s, not_f].
    pub aggregators: [AttentionParams; 4],
    pub pi_functional_init: Tensor, // 1 x dim
    pub mlp_prob: MlpParams,        // dim -> hidden -> 1
    pub mlp_rc: MlpParams,          // 2*dim -> hidden -> 1
    /// Fixed (non-learned) orthonormal rows assigned to PIs when PIE is on.
    pub pie_basis: Tensor, // dim x dim
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Structural,
    Functional,
}

fn aggregator_index(kind: GateKind, stream: Stream) -> usize {
    match (kind, stream) {
        (GateKind::And, Stream::Structural) => 0,
        (GateKind::And, Stream::Functional) => 1,
        (GateKind::Not, Stream::Structural) => 2,
        (GateKind::Not, Stream::Functional) => 3,
        (GateKind::Pi, _) => unreachable!("PIs are initialized, not aggregated"),
    }
}

const AGGREGATOR_NAMES: [&str; 4] = ["and_s", "and_f", "not_s", "not_f"];

fn glorot(rng: &mut SplitMix64, rows: usize, cols: usize) -> Tensor {
    let scale = (2.0 / (rows + cols) as f64).sqrt();
    Tensor::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.next_normal() * scale).collect(),
    )
}

/// Random orthonormal rows via modified Gram-Schmidt with one
/// re-orthogonalization pass.
fn random_orthonormal(rng: &mut SplitMix64, n: usize, dim: usize) -> Tensor {
    assert!(n <= dim);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
        for _ in 0..2 {
            for r in &rows {
                let dot: f64 = v.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
                for (vi, ri) in v.iter_mut().zip(r.iter()) {
                    *vi -= dot * ri;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue; // degenerate draw, resample
        }
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        rows.push(v);
    }
    Tensor::new(n, dim, rows.concat())
}

impl ModelParams {
    pub fn init(config: &ModelConfig) -> Self {
        let d = config.dim;
        let h = config.hidden;
        let mut rng = SplitMix64::new(config.seed);
        let attention = |msg_width: usize, rng: &mut SplitMix64| AttentionParams {
            query_seed: glorot(rng, 1, d),
            wq: glorot(rng, d, d),
            wk: glorot(rng, msg_width, d),
            wv: glorot(rng, msg_width, d),
        };
        let aggregators = [
            attention(d, &mut rng),     // and_s
            attention(2 * d, &mut rng), // and_f
            attention(d, &mut rng),     // not_s
            attention(2 * d, &mut rng), // not_f
        ];
        let mlp = |input: usize, rng: &mut SplitMix64| MlpParams {
            w1: glorot(rng, input, h),
            b1: Tensor::zeros(1, h),
            w2: glorot(rng, h, 1),
            b2: Tensor::zeros(1, 1),
        };
        let pi_functional_init = glorot(&mut rng, 1, d);
        let mlp_prob = mlp(d, &mut rng);
        let mlp_rc = mlp(2 * d, &mut rng);
        let pie_basis = random_orthonormal(&mut rng, d, d);
        ModelParams {
            config: config.clone(),
            aggregators,
            pi_functional_init,
            mlp_prob,
            mlp_rc,
            pie_basis,
        }
    }

    pub fn aggregator(&self, kind: GateKind, stream: Stream) -> &AttentionParams {
        &self.aggregators[aggregator_index(kind, stream)]
    }

    /// Stable name -> tensor listing; order defines the optimizer layout.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (idx, name) in AGGREGATOR_NAMES.iter().enumerate() {
            let a = &self.aggregators[idx];
            out.push((format!("aggr.{name}.query_seed"), &a.query_seed));
            out.push((format!("aggr.{name}.wq"), &a.wq));
            out.push((format!("aggr.{name}.wk"), &a.wk));
            out.push((format!("aggr.{name}.wv"), &a.wv));
        }
        out.push(("pi_functional_init".to_string(), &self.pi_functional_init));
        for (prefix, mlp) in [("mlp_prob", &self.mlp_prob), ("mlp_rc", &self.mlp_rc)] {
            out.push((format!("{prefix}.w1"), &mlp.w1));
            out.push((format!("{prefix}.b1"), &mlp.b1));
            out.push((format!("{prefix}.w2"), &mlp.w2));
            out.push((format!("{prefix}.b2"), &mlp.b2));
        }
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out: Vec<(String, &mut Tensor)> = Vec::new();
        for (idx, a) in self.aggregators.iter_mut().enumerate() {
            let name = AGGREGATOR_NAMES[idx];
            out.push((format!("aggr.{name}.query_seed"), &mut a.query_seed));
            out.push((format!("aggr.{name}.wq"), &mut a.wq));
            out.push((format!("aggr.{name}.wk"), &mut a.wk));
            out.push((format!("aggr.{name}.wv"), &mut a.wv));
        }
        out.push((
            "pi_functional_init".to_string(),
            &mut self.pi_functional_init,
        ));
        for (prefix, mlp) in [
            ("mlp_prob", &mut self.mlp_prob),
            ("mlp_rc", &mut self.mlp_rc),
        ] {
            out.push((format!("{prefix}.w1"), &mut mlp.w1));
            out.push((format!("{prefix}.b1"), &mut mlp.b1));
            out.push((format!("{prefix}.w2"), &mut mlp.w2));
            out.push((format!("{prefix}.b2"), &mut mlp.b2));
        }
        out
    }

    /// PI structural init rows. PIE on: orthonormal basis rows (exactly
    /// orthogonal when `num_pi <= dim`; quasi-orthogonal random unit rows
    /// beyond that, flagged). PIE off: the same uniform unit vector for all.
    pub fn init_pi_embeddings(&self, num_pi: usize) -> PiInit {
        let d = self.config.dim;
        if !self.config.pie_enabled {
            let row = vec![1.0 / (d as f64).sqrt(); d];
            return PiInit {
                hs_rows: vec![row; num_pi],
                quasi_orthogonal: false,
            };
        }
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(num_pi);
        for k in 0..num_pi.min(d) {
            rows.push(self.pie_basis.data[k * d..(k + 1) * d].to_vec());
        }
        let quasi = num_pi > d;
        if quasi {
            // More PIs than dimensions: fall back to random unit rows.
            let mut rng = SplitMix64::new(self.config.seed ^ 0x70e6_1a11);
            for _ in d..num_pi {
                let mut v: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                rows.push(v);
            }
        }
        PiInit {
            hs_rows: rows,
            quasi_orthogonal: quasi,
        }
    }
}

/// PI structural initialization, plus a flag recording when exact
/// orthogonality was impossible (more PIs than dimensions).
#[derive(Debug, Clone)]
pub struct PiInit {
    pub hs_rows: Vec<Vec<f64>>,
    pub quasi_orthogonal: bool,
}

/// Parameter leaves bound into one graph; reused by every circuit in a
/// batch so gradients accumulate across the whole batch.
pub struct BoundParams {
    pub config: ModelConfig,
    pub aggregators: [BoundAttention; 4],
    pub pi_functional_init: TensorId,
    pub mlp_prob: BoundMlp,
    pub mlp_rc: BoundMlp,
    pub ordered_ids: Vec<TensorId>,
}

pub struct BoundAttention {
    pub query_seed: TensorId,
    pub wq: TensorId,
    pub wk: TensorId,
    pub wv: TensorId,
}

pub struct BoundMlp {
    pub w1: TensorId,
    pub b1: TensorId,
    pub w2: TensorId,
    pub b2: TensorId,
}

impl ModelParams {
    /// Insert every parameter as a leaf. `trainable` controls whether the
    /// graph will track gradients through them.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> Result<BoundParams, ModelError> {
        let mut ordered_ids = Vec::new();
        let bind_t = |g: &mut Graph, t: &Tensor, ids: &mut Vec<TensorId>| {
            let id = g.leaf(t, trainable)?;
            ids.push(id);
            Ok::<TensorId, GradError>(id)
        };
        let mut aggs = Vec::with_capacity(4);
        for a in &self.aggregators {
            aggs.push(BoundAttention {
                query_seed: bind_t(g, &a.query_seed, &mut ordered_ids)?,
                wq: bind_t(g, &a.wq, &mut ordered_ids)?,
                wk: bind_t(g, &a.wk, &mut ordered_ids)?,
                wv: bind_t(g, &a.wv, &mut ordered_ids)?,
            });
        }
        let pi_functional_init = bind_t(g, &self.pi_functional_init, &mut ordered_ids)?;
        let bind_mlp = |g: &mut Graph, m: &MlpParams, ids: &mut Vec<TensorId>| {
            Ok::<BoundMlp, GradError>(BoundMlp {
                w1: bind_t(g, &m.w1, ids)?,
                b1: bind_t(g, &m.b1, ids)?,
                w2: bind_t(g, &m.w2, ids)?,
                b2: bind_t(g, &m.b2, ids)?,
            })
        };
        let mlp_prob = bind_mlp(g, &self.mlp_prob, &mut ordered_ids)?;
        let mlp_rc = bind_mlp(g, &self.mlp_rc, &mut ordered_ids)?;
        let aggregators = match <[BoundAttention; 4]>::try_from(aggs) {
            Ok(a) => a,
            Err(_) => unreachable!("exactly four aggregators"),
        };
        Ok(BoundParams {
            config: self.config.clone(),
            aggregators,
            pi_functional_init,
            mlp_prob,
            mlp_rc,
            ordered_ids,
        })
    }
}

impl BoundParams {
    pub fn aggregator(&self, kind: GateKind, stream: Stream) -> &BoundAttention {
        &self.aggregators[aggregator_index(kind, stream)]
    }
}

/// Per-node embeddings produced by [`forward`], as graph handles.
pub struct EmbeddingState {
    pub hs: Vec<TensorId>,
    pub hf: Vec<TensorId>,
    /// Total attention-aggregator invocations during the forward pass;
    /// exactly two per non-PI node (the one-round contract).
    pub aggregator_calls: usize,
    pub quasi_orthogonal_pis: bool,
}

/// Scaled-dot-product attention of Eq-style form: the query comes from the
/// learned per-(kind, stream) seed, keys/values from the messages.
pub fn attention_aggregate(
    g: &mut Graph,
    params: &BoundAttention,
    messages: &[TensorId],
    dim: usize,
) -> Result<TensorId, ModelError> {
    if messages.is_empty() {
        return Err(ModelError::EmptyMessageList);
    }
    let q = g.matmul(params.query_seed, params.wq)?; // 1 x d
    let m = g.concat_rows(messages)?; // k x w
    let keys = g.matmul(m, params.wk)?; // k x d
    let keys_t = g.transpose(keys)?; // d x k
    let logits = g.matmul(q, keys_t)?; // 1 x k
    let scaled = g.scale(logits, 1.0 / (dim as f64).sqrt())?;
    let alpha = g.softmax_rows(scaled)?; // 1 x k
    let values = g.matmul(m, params.wv)?; // k x d
    Ok(g.matmul(alpha, values)?) // 1 x d
}

/// One-round levelized forward pass. Nodes appear in topological order, so
/// a single sweep visits each level after everything it depends on.
pub fn forward(
    g: &mut Graph,
    aig: &Aig,
    model: &ModelParams,
    bound: &BoundParams,
) -> Result<EmbeddingState, ModelError> {
    let d = bound.config.dim;
    let init = model.init_pi_embeddings(aig.num_pis());
    let mut hs: Vec<TensorId> = Vec::with_capacity(aig.len());
    let mut hf: Vec<TensorId> = Vec::with_capacity(aig.len());
    let mut aggregator_calls = 0usize;
    let mut pi_index = 0usize;
    for (n, gate) in aig.gates().iter().enumerate() {
        match gate.kind() {
            GateKind::Pi => {
                hs.push(g.constant_row(&init.hs_rows[pi_index])?);
                hf.push(bound.pi_functional_init);
                pi_index += 1;
            }
            kind @ (GateKind::And | GateKind::Not) => {
                let fanins: Vec<NodeId> = gate.fanins().collect();
                let hs_msgs: Vec<TensorId> = fanins.iter().map(|&f| hs[f]).collect();
                let s = attention_aggregate(
                    g,
                    bound.aggregator(kind, Stream::Structural),
                    &hs_msgs,
                    d,
                )?;
                aggregator_calls += 1;
                let hf_msgs: Vec<TensorId> = fanins
                    .iter()
                    .map(|&f| g.concat_cols(&[hs[f], hf[f]]))
                    .collect::<Result<_, _>>()?;
                let f = attention_aggregate(
                    g,
                    bound.aggregator(kind, Stream::Functional),
                    &hf_msgs,
                    d,
                )?;
                aggregator_calls += 1;
                hs.push(s);
                hf.push(f);
            }
        }
        debug_assert_eq!(hs.len(), n + 1);
    }
    Ok(EmbeddingState {
        hs,
        hf,
        aggregator_calls,
        quasi_orthogonal_pis: init.quasi_orthogonal,
    })
}

fn mlp_apply(g: &mut Graph, mlp: &BoundMlp, input: TensorId) -> Result<TensorId, GradError> {
    let h = g.matmul(input, mlp.w1)?;
    let h = g.add(h, mlp.b1)?;
    let h = g.relu(h)?;
    let o = g.matmul(h, mlp.w2)?;
    let o = g.add(o, mlp.b2)?;
    g.sigmoid(o)
}

/// Logic-probability prediction for one node: sigmoid MLP over hf.
pub fn predict_prob(
    g: &mut Graph,
    bound: &BoundParams,
    state: &EmbeddingState,
    i: NodeId,
) -> Result<TensorId, GradError> {
    mlp_apply(g, &bound.mlp_prob, state.hf[i])
}

/// Reconvergence prediction for a node pair: sigmoid MLP over [hs_i, hs_j].
pub fn predict_rc(
    g: &mut Graph,
    bound: &BoundParams,
    state: &EmbeddingState,
    i: NodeId,
    j: NodeId,
) -> Result<TensorId, GradError> {
    let cat = g.concat_cols(&[state.hs[i], state.hs[j]])?;
    mlp_apply(g, &bound.mlp_rc, cat)
}

/// Functional similarity of a node pair: cosine of hf rows.
pub fn predict_similarity(
    g: &mut Graph,
    state: &EmbeddingState,
    i: NodeId,
    j: NodeId,
) -> Result<TensorId, GradError> {
    g.cosine(state.hf[i], state.hf[j])
}

/// All three heads at once.
pub fn predict_heads(
    g: &mut Graph,
    bound: &BoundParams,
    state: &EmbeddingState,
    i: NodeId,
    j: NodeId,
) -> Result<(TensorId, TensorId, TensorId), GradError> {
    let prob = predict_prob(g, bound, state, i)?;
    let rc = predict_rc(g, bound, state, i, j)?;
    let sim = predict_similarity(g, state, i, j)?;
    Ok((prob, rc, sim))
}

/// Inference convenience: plain per-node hf vectors (for similarity
/// indexing and sweep ranking) without keeping the graph around.
pub fn functional_embeddings(aig: &Aig, model: &ModelParams) -> Result<Vec<Vec<f64>>, ModelError> {
    let mut g = Graph::new();
    let bound = model.bind(&mut g, false)?;
    let state = forward(&mut g, aig, model, &bound)?;
    Ok(state.hf.iter().map(|&id| g.value(id).to_vec()).collect())
}

/// Inference convenience: per-node predicted logic probabilities.
pub fn predict_probs(aig: &Aig, model: &ModelParams) -> Result<Vec<f64>, ModelError> {
    let mut g = Graph::new();
    let bound = model.bind(&mut g, false)?;
    let state = forward(&mut g, aig, model, &bound)?;
    let mut out = Vec::with_capacity(aig.len());
    for n in 0..aig.len() {
        if aig.gate(n).kind() == GateKind::Pi {
            out.push(0.5);
        } else {
            let p = predict_prob(&mut g, &bound, &state, n)?;
            out.push(g.scalar(p));
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CheckpointJson {
    gatekit_checkpoint: u64,
    config: ModelConfig,
    tensors: BTreeMap<String, TensorJson>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Save parameters (including the PIE basis buffer) as versioned JSON.
/// f64 values serialize via shortest-roundtrip formatting, so the file is
/// bit-exact on reload.
pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<(), ModelError> {
    let mut tensors: BTreeMap<String, TensorJson> = BTreeMap::new();
    for (name, t) in params.named_tensors() {
        tensors.insert(
            name,
            TensorJson {
                rows: t.rows,
                cols: t.cols,
                data: t.data.clone(),
            },
        );
    }
    tensors.insert(
        "pie_basis".to_string(),
        TensorJson {
            rows: params.pie_basis.rows,
            cols: params.pie_basis.cols,
            data: params.pie_basis.data.clone(),
        },
    );
    let ckpt = CheckpointJson {
        gatekit_checkpoint: CHECKPOINT_VERSION,
        config: params.config.clone(),
        tensors,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut file, &ckpt).map_err(std::io::Error::other)?;
    file.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: CheckpointJson = serde_json::from_str(&text)
        .map_err(|e| ModelError::MalformedCheckpoint(e.to_string()))?;
    if ckpt.gatekit_checkpoint != CHECKPOINT_VERSION {
        return Err(ModelError::MalformedCheckpoint(format!(
            "version {} unsupported",
            ckpt.gatekit_checkpoint
        )));
    }
    let mut params = ModelParams::init(&ckpt.config);
    let take = |name: &str| -> Result<Tensor, ModelError> {
        let t = ckpt
            .tensors
            .get(name)
            .ok_or_else(|| ModelError::MalformedCheckpoint(format!("missing tensor {name}")))?;
        if t.data.len() != t.rows * t.cols {
            return Err(ModelError::MalformedCheckpoint(format!(
                "tensor {name} has {} values for {}x{}",
                t.data.len(),
                t.rows,
                t.cols
            )));
        }
        Ok(Tensor::new(t.rows, t.cols, t.data.clone()))
    };
    for (name, tensor) in params.named_tensors_mut() {
        let loaded = take(&name)?;
        if (loaded.rows, loaded.cols) != (tensor.rows, tensor.cols) {
            return Err(ModelError::MalformedCheckpoint(format!(
                "tensor {name} shape mismatch"
            )));
        }
        *tensor = loaded;
    }
    params.pie_basis = take("pie_basis")?;
    Ok(params)
}
