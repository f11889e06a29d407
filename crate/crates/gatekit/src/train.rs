//! Loss functions, the two-stage training curriculum, and evaluation
//! metrics (prediction error, ROC-thresholded equivalence classification).
//!
//! Stage 1 trains the two easy tasks: logic-probability regression (L1)
//! and reconvergence classification (BCE). Stage 2 continues with the
//! functionality loss added: per sampled pair, the embedding distance
//! `1 - cos(hf_i, hf_j)` should match the truth-table distance up to a
//! batch-level offset, enforced by zero-centering both before an L1 sum.

use crate::aig::GateKind;
use crate::dataset::CircuitRecord;
use crate::grad::{AdamConfig, AdamState, GradError, Graph, Tensor, TensorId};
use crate::model::{
    forward, predict_prob, predict_rc, predict_similarity, BoundParams, ModelError, ModelParams,
};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("functionality loss needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("batch is missing labels: {0}")]
    MissingLabels(&'static str),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("divergence detected at epoch {epoch}: non-finite loss")]
    DivergenceDetected { epoch: usize },
    #[error("no positive pairs: recall is undefined")]
    NoPositivePairs,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("gradient engine: {0}")]
    Grad(#[from] GradError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub epochs_stage1: usize,
    pub epochs_stage2: usize,
    pub batch_size: usize,
    pub w_prob: f64,
    pub w_rc: f64,
    pub w_func: f64,
    pub lr: f64,
    pub weight_decay: f64,
    /// Off: all three losses from epoch 1 for the full epoch budget
    /// (the single-stage ablation).
    pub multistage_enabled: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs_stage1: 20,
            epochs_stage2: 40,
            batch_size: 16,
            w_prob: 1.0,
            w_rc: 1.0,
            w_func: 1.0,
            lr: 1e-4,
            weight_decay: 1e-10,
            multistage_enabled: true,
            seed: 0,
        }
    }
}

/// Per-epoch log row; the training metrics CSV serializes these.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub stage: u8,
    pub l_prob: f64,
    pub l_rc: f64,
    pub l_func: f64,
    pub pe: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
}

/// Evaluation report: probability prediction error plus ROC-thresholded
/// equivalence-classification metrics over labeled pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub pe: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub auc: f64,
    pub threshold: f64,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub num_pairs: usize,
}

pub struct TrainOutcome {
    pub params: ModelParams,
    /// Checkpoint at the stage-1/stage-2 boundary.
    pub stage1_params: ModelParams,
    pub history: Vec<EpochStats>,
}

/// The functionality-aware loss over one batch's pairs: both distance
/// vectors are zero-centered over the batch, then compared with an L1 sum,
/// so any constant offset between embedding distance and truth-table
/// distance costs nothing.
pub fn loss_functionality(
    g: &mut Graph,
    pairs: &[(f64, TensorId)],
) -> Result<TensorId, TrainError> {
    if pairs.len() < 2 {
        return Err(TrainError::TooFewPairs(pairs.len()));
    }
    let d_t: Vec<f64> = pairs.iter().map(|&(d, _)| d).collect();
    let d_t = g.constant_row(&d_t)?;
    let sims: Vec<TensorId> = pairs.iter().map(|&(_, s)| s).collect();
    let sims = g.concat_cols(&sims)?;
    let ones = g.constant_row(&vec![1.0; pairs.len()])?;
    let d_h = g.sub(ones, sims)?;
    let d_t_c = g.center(d_t)?;
    let d_h_c = g.center(d_h)?;
    let diff = g.sub(d_t_c, d_h_c)?;
    let a = g.abs(diff)?;
    Ok(g.sum_all(a)?)
}

/// Everything a batch contributes to the loss, as graph handles.
struct BatchPredictions {
    prob_preds: Vec<TensorId>,
    prob_targets: Vec<f64>,
    rc_preds: Vec<TensorId>,
    rc_targets: Vec<f64>,
    /// (truth-table distance, similarity prediction) per function pair.
    pair_sims: Vec<(f64, TensorId)>,
}

fn forward_batch(
    g: &mut Graph,
    batch: &[&CircuitRecord],
    params: &ModelParams,
    bound: &BoundParams,
) -> Result<BatchPredictions, TrainError> {
    let mut preds = BatchPredictions {
        prob_preds: Vec::new(),
        prob_targets: Vec::new(),
        rc_preds: Vec::new(),
        rc_targets: Vec::new(),
        pair_sims: Vec::new(),
    };
    for record in batch {
        let state = forward(g, &record.aig, params, bound)?;
        for n in 0..record.aig.len() {
            if record.aig.gate(n).kind() == GateKind::Pi {
                continue;
            }
            preds.prob_preds.push(predict_prob(g, bound, &state, n)?);
            preds.prob_targets.push(record.probs[n]);
        }
        for rc in &record.rc_pairs {
            preds.rc_preds.push(predict_rc(g, bound, &state, rc.i, rc.j)?);
            preds.rc_targets.push(if rc.label { 1.0 } else { 0.0 });
        }
        for pair in &record.pairs {
            let sim = predict_similarity(g, &state, pair.i, pair.j)?;
            preds.pair_sims.push((pair.dist_tt, sim));
        }
    }
    Ok(preds)
}

/// Combined stage loss over one batch: `w_prob*L_prob + w_rc*L_rc`, plus
/// `w_func*L_func` in stage 2. Returns the scalar loss handle and the
/// individual loss values for logging.
fn loss_stage_from_preds(
    g: &mut Graph,
    preds: &BatchPredictions,
    stage: u8,
    config: &TrainConfig,
) -> Result<(TensorId, f64, f64, f64), TrainError> {
    if preds.prob_preds.is_empty() {
        return Err(TrainError::MissingLabels("logic probabilities"));
    }
    let pred_row = g.concat_cols(&preds.prob_preds)?;
    let target_row = g.constant_row(&preds.prob_targets)?;
    let l_prob = g.l1_loss(pred_row, target_row)?;
    let l_rc = if preds.rc_preds.is_empty() {
        None
    } else {
        let rc_row = g.concat_cols(&preds.rc_preds)?;
        let rc_target = g.constant_row(&preds.rc_targets)?;
        Some(g.bce_loss(rc_row, rc_target)?)
    };
    let mut total = g.scale(l_prob, config.w_prob)?;
    if let Some(l_rc) = l_rc {
        let w = g.scale(l_rc, config.w_rc)?;
        total = g.add(total, w)?;
    }
    let mut l_func_val = 0.0;
    if stage == 2 && preds.pair_sims.len() >= 2 {
        let l_func = loss_functionality(g, &preds.pair_sims)?;
        l_func_val = g.scalar(l_func);
        let w = g.scale(l_func, config.w_func)?;
        total = g.add(total, w)?;
    }
    let l_rc_val = l_rc.map(|id| g.scalar(id)).unwrap_or(0.0);
    Ok((total, g.scalar(l_prob), l_rc_val, l_func_val))
}

/// Public single-batch stage loss (stage 1 omits the functionality term).
pub fn loss_stage(
    g: &mut Graph,
    batch: &[&CircuitRecord],
    params: &ModelParams,
    bound: &BoundParams,
    stage: u8,
    config: &TrainConfig,
) -> Result<TensorId, TrainError> {
    assert!(stage == 1 || stage == 2, "stage must be 1 or 2");
    let preds = forward_batch(g, batch, params, bound)?;
    if stage == 2 && preds.pair_sims.len() == 1 {
        return Err(TrainError::TooFewPairs(1));
    }
    let (total, _, _, _) = loss_stage_from_preds(g, &preds, stage, config)?;
    Ok(total)
}

/// Two-stage curriculum with Adam. Deterministic in (corpus, params,
/// config): data order, shuffles and updates all derive from the seed.
pub fn train_multistage(
    train_records: &[CircuitRecord],
    val_records: &[CircuitRecord],
    mut params: ModelParams,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if train_records.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let sizes: Vec<usize> = params.named_tensors().iter().map(|(_, t)| t.len()).collect();
    let adam_cfg = AdamConfig {
        lr: config.lr,
        weight_decay: config.weight_decay,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(adam_cfg, &sizes);
    let total_epochs = config.epochs_stage1 + config.epochs_stage2;
    let rng = SplitMix64::new(config.seed);
    let mut history = Vec::with_capacity(total_epochs);
    let mut stage1_params: Option<ModelParams> = None;
    let mut order: Vec<usize> = (0..train_records.len()).collect();

    for epoch in 0..total_epochs {
        let stage: u8 = if config.multistage_enabled && epoch < config.epochs_stage1 {
            1
        } else {
            2
        };
        let mut epoch_rng = rng.fork(epoch as u64);
        epoch_rng.shuffle(&mut order);
        let mut sums = (0.0, 0.0, 0.0);
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size.max(1)) {
            let batch: Vec<&CircuitRecord> = chunk.iter().map(|&i| &train_records[i]).collect();
            let mut g = Graph::new();
            let bound = params.bind(&mut g, true)?;
            let preds = match forward_batch(&mut g, &batch, &params, &bound) {
                Ok(p) => p,
                Err(TrainError::Grad(GradError::NonFiniteInput(_)))
                | Err(TrainError::Model(ModelError::Grad(GradError::NonFiniteInput(_)))) => {
                    return Err(TrainError::DivergenceDetected { epoch })
                }
                Err(e) => return Err(e),
            };
            let (total, lp, lr_, lf) = loss_stage_from_preds(&mut g, &preds, stage, config)?;
            if !g.scalar(total).is_finite() {
                return Err(TrainError::DivergenceDetected { epoch });
            }
            let grads = g.backward(total)?;
            let grad_slices: Vec<&[f64]> =
                bound.ordered_ids.iter().map(|&id| grads.get(id)).collect();
            let mut tensors = params.named_tensors_mut();
            let mut tensor_refs: Vec<&mut Tensor> =
                tensors.iter_mut().map(|(_, t)| &mut **t).collect();
            adam.step(&mut tensor_refs, &grad_slices)?;
            sums.0 += lp;
            sums.1 += lr_;
            sums.2 += lf;
            batches += 1;
        }
        let (pe, f1, auc_v) = if val_records.is_empty() {
            (None, None, None)
        } else {
            match evaluate(&params, val_records, val_records) {
                Ok(report) => (Some(report.pe), Some(report.f1), Some(report.auc)),
                Err(TrainError::NoPositivePairs) => (None, None, None),
                Err(e) => return Err(e),
            }
        };
        history.push(EpochStats {
            epoch,
            stage,
            l_prob: sums.0 / batches as f64,
            l_rc: sums.1 / batches as f64,
            l_func: sums.2 / batches as f64,
            pe,
            f1,
            auc: auc_v,
        });
        if config.multistage_enabled && epoch + 1 == config.epochs_stage1 {
            stage1_params = Some(params.clone());
        }
    }
    Ok(TrainOutcome {
        stage1_params: stage1_params.unwrap_or_else(|| params.clone()),
        params,
        history,
    })
}

/// Scored pair for ROC computation: (similarity, is_positive).
pub type ScoredPair = (f64, bool);

/// Rank-based AUC (Mann-Whitney) with tie correction.
pub fn auc(scored: &[ScoredPair]) -> f64 {
    let pos = scored.iter().filter(|&&(_, p)| p).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return f64::NAN;
    }
    let mut sorted: Vec<&ScoredPair> = scored.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Average ranks over ties.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let avg_rank = ((i + 1 + j) as f64) / 2.0; // ranks are 1-based
        for item in &sorted[i..j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    (rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0) / (pos as f64 * neg as f64)
}

/// Pick the threshold maximizing Youden's J (TPR - FPR) along the ROC.
/// Candidates are midpoints between consecutive distinct scores plus
/// sentinels beyond both extremes; classification is strict `sim > theta`.
pub fn select_threshold(scored: &[ScoredPair]) -> Result<f64, TrainError> {
    let pos = scored.iter().filter(|&&(_, p)| p).count() as f64;
    let neg = scored.len() as f64 - pos;
    if pos == 0.0 {
        return Err(TrainError::NoPositivePairs);
    }
    let mut sorted: Vec<ScoredPair> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    let mut candidates = vec![sorted[0].0 + 1.0];
    for w in sorted.windows(2) {
        if w[0].0 != w[1].0 {
            candidates.push((w[0].0 + w[1].0) / 2.0);
        }
    }
    candidates.push(sorted[sorted.len() - 1].0 - 1.0);
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for &theta in &candidates {
        let mut tp = 0.0;
        let mut fp = 0.0;
        for &(s, p) in &sorted {
            if s > theta {
                if p {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        let tpr = tp / pos;
        let fpr = if neg > 0.0 { fp / neg } else { 0.0 };
        let j = tpr - fpr;
        // Ties resolve toward the larger (more conservative) threshold.
        if j > best.0 + 1e-15 {
            best = (j, theta);
        }
    }
    Ok(best.1)
}

fn pair_scores(
    params: &ModelParams,
    records: &[CircuitRecord],
) -> Result<Vec<ScoredPair>, TrainError> {
    let mut scored = Vec::new();
    for record in records {
        if record.pairs.is_empty() {
            continue;
        }
        let mut g = Graph::new();
        let bound = params.bind(&mut g, false)?;
        let state = forward(&mut g, &record.aig, params, &bound)?;
        for pair in &record.pairs {
            let sim = predict_similarity(&mut g, &state, pair.i, pair.j)?;
            scored.push((g.scalar(sim), pair.is_equivalent));
        }
    }
    Ok(scored)
}

/// Evaluate on `eval_records`, with the similarity threshold selected on
/// `val_records` (ROC / Youden's J). PE averages |P - P_hat| over every
/// non-PI gate of the evaluation circuits.
pub fn evaluate(
    params: &ModelParams,
    val_records: &[CircuitRecord],
    eval_records: &[CircuitRecord],
) -> Result<EvalReport, TrainError> {
    let mut abs_err = 0.0;
    let mut gate_count = 0usize;
    for record in eval_records {
        let mut g = Graph::new();
        let bound = params.bind(&mut g, false)?;
        let state = forward(&mut g, &record.aig, params, &bound)?;
        for n in 0..record.aig.len() {
            if record.aig.gate(n).kind() == GateKind::Pi {
                continue;
            }
            let p = predict_prob(&mut g, &bound, &state, n)?;
            abs_err += (g.scalar(p) - record.probs[n]).abs();
            gate_count += 1;
        }
    }
    let pe = abs_err / gate_count.max(1) as f64;

    let same_split = std::ptr::eq(val_records.as_ptr(), eval_records.as_ptr())
        && val_records.len() == eval_records.len();
    let val_scored = pair_scores(params, val_records)?;
    let eval_scored = if same_split {
        val_scored.clone()
    } else {
        pair_scores(params, eval_records)?
    };
    if !eval_scored.iter().any(|&(_, p)| p) {
        return Err(TrainError::NoPositivePairs);
    }
    let threshold = select_threshold(&val_scored)?;
    let mut tp = 0usize;
    let mut tn = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for &(s, p) in &eval_scored {
        match (p, s > threshold) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
        }
    }
    let recall = tp as f64 / (tp + fn_) as f64;
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        pe,
        recall,
        precision,
        f1,
        auc: auc(&eval_scored),
        threshold,
        tp,
        tn,
        fp,
        fn_,
        num_pairs: eval_scored.len(),
    })
}

/// Render the per-epoch history as the metrics CSV.
pub fn history_to_csv(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch,stage,l_prob,l_rc,l_func,pe,f1,auc\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.epoch,
            row.stage,
            row.l_prob,
            row.l_rc,
            row.l_func,
            opt(row.pe),
            opt(row.f1),
            opt(row.auc)
        ));
    }
    out
}
