//! Minimal dense-tensor reverse-mode differentiation engine.
//!
//! [`Graph`] is a build-once tape: each operation appends a node holding
//! its forward value, so node order is already topological and backward is
//! a single reverse sweep. Tensors are 2-D row-major `f64`. Any non-finite
//! value produced by an op raises [`GradError::NonFiniteInput`] instead of
//! propagating silently.

mod adam;

pub use adam::{AdamConfig, AdamState};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GradError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("cosine similarity of a zero vector")]
    ZeroVectorCosine,
    #[error("non-finite value produced by {0}")]
    NonFiniteInput(&'static str),
    #[error("backward requires a scalar loss, got {0}x{1}")]
    NonScalarLoss(usize, usize),
    #[error("{0} requires at least one input")]
    EmptyInputList(&'static str),
}

/// Plain owned tensor used for parameters and checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Tensor { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(TensorId, TensorId),
    Add(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Mul(TensorId, TensorId),
    Scale(TensorId, f64),
    Transpose(TensorId),
    ConcatCols(Vec<TensorId>),
    ConcatRows(Vec<TensorId>),
    SoftmaxRows(TensorId),
    Relu(TensorId),
    Sigmoid(TensorId),
    Abs(TensorId),
    MeanAll(TensorId),
    SumAll(TensorId),
    /// Subtract the mean over all elements (batch zero-centering).
    Center(TensorId),
    /// Binary cross-entropy of predictions against constant targets.
    Bce(TensorId, TensorId),
    /// Cosine similarity of two equal-shape vectors, scalar output.
    Cosine(TensorId, TensorId),
}

struct Node {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    op: Op,
    requires_grad: bool,
}

/// Build-once computation tape.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, id: TensorId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, id: TensorId) -> &[f64] {
        &self.nodes[id.0].data
    }

    pub fn scalar(&self, id: TensorId) -> f64 {
        debug_assert_eq!(self.shape(id), (1, 1));
        self.nodes[id.0].data[0]
    }

    fn push(&mut self, rows: usize, cols: usize, data: Vec<f64>, op: Op) -> Result<TensorId, GradError> {
        debug_assert_eq!(data.len(), rows * cols);
        let op_name = op_name(&op);
        if !data.iter().all(|v| v.is_finite()) {
            return Err(GradError::NonFiniteInput(op_name));
        }
        let requires_grad = match &op {
            Op::Leaf => false, // set by leaf()
            other => op_inputs(other).iter().any(|id| self.nodes[id.0].requires_grad),
        };
        self.nodes.push(Node {
            rows,
            cols,
            data,
            op,
            requires_grad,
        });
        Ok(TensorId(self.nodes.len() - 1))
    }

    /// Insert a leaf tensor. Only leaves may require gradients.
    pub fn leaf(&mut self, t: &Tensor, requires_grad: bool) -> Result<TensorId, GradError> {
        let id = self.push(t.rows, t.cols, t.data.clone(), Op::Leaf)?;
        self.nodes[id.0].requires_grad = requires_grad;
        Ok(id)
    }

    pub fn constant(&mut self, rows: usize, cols: usize, data: Vec<f64>) -> Result<TensorId, GradError> {
        self.leaf(&Tensor::new(rows, cols, data), false)
    }

    pub fn constant_row(&mut self, data: &[f64]) -> Result<TensorId, GradError> {
        self.constant(1, data.len(), data.to_vec())
    }

    pub fn scalar_const(&mut self, v: f64) -> Result<TensorId, GradError> {
        self.constant(1, 1, vec![v])
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, GradError> {
        let (ar, ac) = self.shape(a);
        let (br, bc) = self.shape(b);
        if ac != br {
            return Err(GradError::ShapeMismatch {
                op: "matmul",
                lhs: (ar, ac),
                rhs: (br, bc),
            });
        }
        let mut out = vec![0.0; ar * bc];
        let da = &self.nodes[a.0].data;
        let db = &self.nodes[b.0].data;
        for i in 0..ar {
            for k in 0..ac {
                let aik = da[i * ac + k];
                if aik == 0.0 {
                    continue;
                }
                let brow = &db[k * bc..(k + 1) * bc];
                let orow = &mut out[i * bc..(i + 1) * bc];
                for (o, &bv) in orow.iter_mut().zip(brow.iter()) {
                    *o += aik * bv;
                }
            }
        }
        self.push(ar, bc, out, Op::MatMul(a, b))
    }

    fn zip_elementwise(
        &mut self,
        a: TensorId,
        b: TensorId,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
        name: &'static str,
    ) -> Result<TensorId, GradError> {
        let (ar, ac) = self.shape(a);
        let (br, bc) = self.shape(b);
        if (ar, ac) != (br, bc) {
            return Err(GradError::ShapeMismatch {
                op: name,
                lhs: (ar, ac),
                rhs: (br, bc),
            });
        }
        let data = self.nodes[a.0]
            .data
            .iter()
            .zip(self.nodes[b.0].data.iter())
            .map(|(&x, &y)| f(x, y))
            .collect();
        self.push(ar, ac, data, op)
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, GradError> {
        self.zip_elementwise(a, b, Op::Add(a, b), |x, y| x + y, "add")
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, GradError> {
        self.zip_elementwise(a, b, Op::Sub(a, b), |x, y| x - y, "sub")
    }

    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, GradError> {
        self.zip_elementwise(a, b, Op::Mul(a, b), |x, y| x * y, "mul")
    }

    pub fn scale(&mut self, a: TensorId, c: f64) -> Result<TensorId, GradError> {
        let (r, ccols) = self.shape(a);
        let data = self.nodes[a.0].data.iter().map(|&x| x * c).collect();
        self.push(r, ccols, data, Op::Scale(a, c))
    }

    pub fn transpose(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = self.nodes[a.0].data[i * c + j];
            }
        }
        self.push(c, r, data, Op::Transpose(a))
    }

    /// Concatenate along columns; inputs must share the row count.
    pub fn concat_cols(&mut self, parts: &[TensorId]) -> Result<TensorId, GradError> {
        if parts.is_empty() {
            return Err(GradError::EmptyInputList("concat_cols"));
        }
        let rows = self.shape(parts[0]).0;
        let mut cols = 0;
        for &p in parts {
            let (r, c) = self.shape(p);
            if r != rows {
                return Err(GradError::ShapeMismatch {
                    op: "concat_cols",
                    lhs: (rows, 0),
                    rhs: (r, c),
                });
            }
            cols += c;
        }
        let mut data = vec![0.0; rows * cols];
        let mut offset = 0;
        for &p in parts {
            let (_, c) = self.shape(p);
            for i in 0..rows {
                let src = &self.nodes[p.0].data[i * c..(i + 1) * c];
                data[i * cols + offset..i * cols + offset + c].copy_from_slice(src);
            }
            offset += c;
        }
        self.push(rows, cols, data, Op::ConcatCols(parts.to_vec()))
    }

    /// Stack along rows; inputs must share the column count.
    pub fn concat_rows(&mut self, parts: &[TensorId]) -> Result<TensorId, GradError> {
        if parts.is_empty() {
            return Err(GradError::EmptyInputList("concat_rows"));
        }
        let cols = self.shape(parts[0]).1;
        let mut rows = 0;
        for &p in parts {
            let (r, c) = self.shape(p);
            if c != cols {
                return Err(GradError::ShapeMismatch {
                    op: "concat_rows",
                    lhs: (0, cols),
                    rhs: (r, c),
                });
            }
            rows += r;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for &p in parts {
            data.extend_from_slice(&self.nodes[p.0].data);
        }
        self.push(rows, cols, data, Op::ConcatRows(parts.to_vec()))
    }

    /// Numerically stable softmax applied independently per row.
    pub fn softmax_rows(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = &self.nodes[a.0].data[i * c..(i + 1) * c];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (j, &x) in row.iter().enumerate() {
                let e = (x - max).exp();
                data[i * c + j] = e;
                sum += e;
            }
            for v in &mut data[i * c..(i + 1) * c] {
                *v /= sum;
            }
        }
        self.push(r, c, data, Op::SoftmaxRows(a))
    }

    pub fn relu(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let data = self.nodes[a.0].data.iter().map(|&x| x.max(0.0)).collect();
        self.push(r, c, data, Op::Relu(a))
    }

    pub fn sigmoid(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let data = self.nodes[a.0]
            .data
            .iter()
            .map(|&x| 1.0 / (1.0 + (-x).exp()))
            .collect();
        self.push(r, c, data, Op::Sigmoid(a))
    }

    pub fn abs(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let data = self.nodes[a.0].data.iter().map(|&x| x.abs()).collect();
        self.push(r, c, data, Op::Abs(a))
    }

    pub fn mean_all(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let n = self.nodes[a.0].data.len();
        let m = self.nodes[a.0].data.iter().sum::<f64>() / n as f64;
        self.push(1, 1, vec![m], Op::MeanAll(a))
    }

    pub fn sum_all(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let s = self.nodes[a.0].data.iter().sum::<f64>();
        self.push(1, 1, vec![s], Op::SumAll(a))
    }

    /// Zero-center: subtract the mean over all elements.
    pub fn center(&mut self, a: TensorId) -> Result<TensorId, GradError> {
        let (r, c) = self.shape(a);
        let n = (r * c) as f64;
        let m = self.nodes[a.0].data.iter().sum::<f64>() / n;
        let data = self.nodes[a.0].data.iter().map(|&x| x - m).collect();
        self.push(r, c, data, Op::Center(a))
    }

    /// Mean L1 error between two equal-shape tensors.
    pub fn l1_loss(&mut self, pred: TensorId, target: TensorId) -> Result<TensorId, GradError> {
        let d = self.sub(pred, target)?;
        let a = self.abs(d)?;
        self.mean_all(a)
    }

    /// Mean binary cross-entropy of predictions in (0,1) against constant
    /// targets. Predictions are clamped to [1e-12, 1-1e-12] in the loss
    /// value only; sigmoid outputs never reach the clamp in practice.
    pub fn bce_loss(&mut self, pred: TensorId, target: TensorId) -> Result<TensorId, GradError> {
        let (pr, pc) = self.shape(pred);
        let (tr, tc) = self.shape(target);
        if (pr, pc) != (tr, tc) {
            return Err(GradError::ShapeMismatch {
                op: "bce",
                lhs: (pr, pc),
                rhs: (tr, tc),
            });
        }
        let n = (pr * pc) as f64;
        let mut total = 0.0;
        for (&p, &t) in self.nodes[pred.0]
            .data
            .iter()
            .zip(self.nodes[target.0].data.iter())
        {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        }
        self.push(1, 1, vec![total / n], Op::Bce(pred, target))
    }

    /// Cosine similarity of two equal-shape vectors (any 1xN or Nx1).
    pub fn cosine(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, GradError> {
        let (ar, ac) = self.shape(a);
        let (br, bc) = self.shape(b);
        if (ar, ac) != (br, bc) || ar.min(ac) != 1 {
            return Err(GradError::ShapeMismatch {
                op: "cosine",
                lhs: (ar, ac),
                rhs: (br, bc),
            });
        }
        let da = &self.nodes[a.0].data;
        let db = &self.nodes[b.0].data;
        let dot: f64 = da.iter().zip(db.iter()).map(|(x, y)| x * y).sum();
        let na: f64 = da.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = db.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(GradError::ZeroVectorCosine);
        }
        self.push(1, 1, vec![dot / (na * nb)], Op::Cosine(a, b))
    }

    /// Reverse-mode sweep from a scalar loss. Returns one gradient buffer
    /// per node; entries for nodes not requiring grad stay empty.
    pub fn backward(&mut self, loss: TensorId) -> Result<Gradients, GradError> {
        let (r, c) = self.shape(loss);
        if (r, c) != (1, 1) {
            return Err(GradError::NonScalarLoss(r, c));
        }
        let mut grads: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|n| {
                if n.requires_grad {
                    vec![0.0; n.data.len()]
                } else {
                    Vec::new()
                }
            })
            .collect();
        if !self.nodes[loss.0].requires_grad {
            // Loss does not depend on any parameter; all grads are zero.
            return Ok(Gradients { grads });
        }
        grads[loss.0][0] = 1.0;
        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].requires_grad || grads[idx].is_empty() {
                continue;
            }
            let op = self.nodes[idx].op.clone();
            // Split borrows: take the output grad out, put it back after.
            let gout = std::mem::take(&mut grads[idx]);
            self.backprop_one(idx, &op, &gout, &mut grads);
            grads[idx] = gout;
        }
        Ok(Gradients { grads })
    }

    fn backprop_one(&self, idx: usize, op: &Op, gout: &[f64], grads: &mut [Vec<f64>]) {
        let needs = |id: TensorId| -> bool { self.nodes[id.0].requires_grad };
        match *op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ar, ac) = (self.nodes[a.0].rows, self.nodes[a.0].cols);
                let bc = self.nodes[b.0].cols;
                if needs(a) {
                    // dA = G * B^T
                    let db = &self.nodes[b.0].data;
                    let ga = &mut grads[a.0];
                    for i in 0..ar {
                        for k in 0..ac {
                            let mut acc = 0.0;
                            let grow = &gout[i * bc..(i + 1) * bc];
                            let brow = &db[k * bc..(k + 1) * bc];
                            for (g, bv) in grow.iter().zip(brow.iter()) {
                                acc += g * bv;
                            }
                            ga[i * ac + k] += acc;
                        }
                    }
                }
                if needs(b) {
                    // dB = A^T * G
                    let da = &self.nodes[a.0].data;
                    let gb = &mut grads[b.0];
                    for k in 0..ac {
                        for i in 0..ar {
                            let aik = da[i * ac + k];
                            if aik == 0.0 {
                                continue;
                            }
                            let grow = &gout[i * bc..(i + 1) * bc];
                            let gbrow = &mut gb[k * bc..(k + 1) * bc];
                            for (gb_v, g) in gbrow.iter_mut().zip(grow.iter()) {
                                *gb_v += aik * g;
                            }
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                if needs(a) {
                    for (g, &go) in grads[a.0].iter_mut().zip(gout) {
                        *g += go;
                    }
                }
                if needs(b) {
                    for (g, &go) in grads[b.0].iter_mut().zip(gout) {
                        *g += go;
                    }
                }
            }
            Op::Sub(a, b) => {
                if needs(a) {
                    for (g, &go) in grads[a.0].iter_mut().zip(gout) {
                        *g += go;
                    }
                }
                if needs(b) {
                    for (g, &go) in grads[b.0].iter_mut().zip(gout) {
                        *g -= go;
                    }
                }
            }
            Op::Mul(a, b) => {
                if needs(a) {
                    let db = self.nodes[b.0].data.clone();
                    for ((g, &go), &y) in grads[a.0].iter_mut().zip(gout).zip(db.iter()) {
                        *g += go * y;
                    }
                }
                if needs(b) {
                    let da = &self.nodes[a.0].data;
                    for ((g, &go), &x) in grads[b.0].iter_mut().zip(gout).zip(da.iter()) {
                        *g += go * x;
                    }
                }
            }
            Op::Scale(a, c) => {
                if needs(a) {
                    for (g, &go) in grads[a.0].iter_mut().zip(gout) {
                        *g += c * go;
                    }
                }
            }
            Op::Transpose(a) => {
                if needs(a) {
                    let (r, c) = (self.nodes[a.0].rows, self.nodes[a.0].cols);
                    let ga = &mut grads[a.0];
                    for i in 0..r {
                        for j in 0..c {
                            ga[i * c + j] += gout[j * r + i];
                        }
                    }
                }
            }
            Op::ConcatCols(ref parts) => {
                let rows = self.nodes[idx].rows;
                let cols = self.nodes[idx].cols;
                let mut offset = 0;
                for &p in parts {
                    let c = self.nodes[p.0].cols;
                    if needs(p) {
                        let gp = &mut grads[p.0];
                        for i in 0..rows {
                            for j in 0..c {
                                gp[i * c + j] += gout[i * cols + offset + j];
                            }
                        }
                    }
                    offset += c;
                }
            }
            Op::ConcatRows(ref parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.nodes[p.0].data.len();
                    if needs(p) {
                        let gp = &mut grads[p.0];
                        for (g, &go) in gp.iter_mut().zip(&gout[offset..offset + len]) {
                            *g += go;
                        }
                    }
                    offset += len;
                }
            }
            Op::SoftmaxRows(a) => {
                if needs(a) {
                    let (r, c) = (self.nodes[idx].rows, self.nodes[idx].cols);
                    let y = &self.nodes[idx].data;
                    let ga = &mut grads[a.0];
                    for i in 0..r {
                        let yrow = &y[i * c..(i + 1) * c];
                        let grow = &gout[i * c..(i + 1) * c];
                        let dot: f64 = yrow.iter().zip(grow.iter()).map(|(&yv, &gv)| yv * gv).sum();
                        for j in 0..c {
                            ga[i * c + j] += yrow[j] * (grow[j] - dot);
                        }
                    }
                }
            }
            Op::Relu(a) => {
                if needs(a) {
                    let x = &self.nodes[a.0].data;
                    for ((g, &go), &xv) in grads[a.0].iter_mut().zip(gout).zip(x.iter()) {
                        if xv > 0.0 {
                            *g += go;
                        }
                    }
                }
            }
            Op::Sigmoid(a) => {
                if needs(a) {
                    let y = &self.nodes[idx].data;
                    for ((g, &go), &yv) in grads[a.0].iter_mut().zip(gout).zip(y.iter()) {
                        *g += go * yv * (1.0 - yv);
                    }
                }
            }
            Op::Abs(a) => {
                if needs(a) {
                    let x = &self.nodes[a.0].data;
                    for ((g, &go), &xv) in grads[a.0].iter_mut().zip(gout).zip(x.iter()) {
                        *g += go * if xv > 0.0 {
                            1.0
                        } else if xv < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                    }
                }
            }
            Op::MeanAll(a) => {
                if needs(a) {
                    let n = self.nodes[a.0].data.len() as f64;
                    let go = gout[0] / n;
                    for g in grads[a.0].iter_mut() {
                        *g += go;
                    }
                }
            }
            Op::SumAll(a) => {
                if needs(a) {
                    let go = gout[0];
                    for g in grads[a.0].iter_mut() {
                        *g += go;
                    }
                }
            }
            Op::Center(a) => {
                if needs(a) {
                    let n = self.nodes[a.0].data.len() as f64;
                    let gmean: f64 = gout.iter().sum::<f64>() / n;
                    for (g, &go) in grads[a.0].iter_mut().zip(gout) {
                        *g += go - gmean;
                    }
                }
            }
            Op::Bce(p, t) => {
                if needs(p) {
                    let n = self.nodes[p.0].data.len() as f64;
                    let go = gout[0];
                    let dt = self.nodes[t.0].data.clone();
                    let dp = self.nodes[p.0].data.clone();
                    for ((g, &pv), &tv) in grads[p.0].iter_mut().zip(dp.iter()).zip(dt.iter()) {
                        let pv = pv.clamp(1e-12, 1.0 - 1e-12);
                        *g += go * (pv - tv) / (pv * (1.0 - pv)) / n;
                    }
                }
                debug_assert!(
                    !self.nodes[t.0].requires_grad,
                    "bce targets must be constants"
                );
            }
            Op::Cosine(a, b) => {
                let da = &self.nodes[a.0].data;
                let db = &self.nodes[b.0].data;
                let dot: f64 = da.iter().zip(db.iter()).map(|(x, y)| x * y).sum();
                let na: f64 = da.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = db.iter().map(|x| x * x).sum::<f64>().sqrt();
                let cos = dot / (na * nb);
                let go = gout[0];
                if needs(a) {
                    let da = da.clone();
                    let db = db.clone();
                    for ((g, &u), &v) in grads[a.0].iter_mut().zip(da.iter()).zip(db.iter()) {
                        *g += go * (v / (na * nb) - cos * u / (na * na));
                    }
                }
                if needs(b) {
                    let da = self.nodes[a.0].data.clone();
                    let db = self.nodes[b.0].data.clone();
                    for ((g, &v), &u) in grads[b.0].iter_mut().zip(db.iter()).zip(da.iter()) {
                        *g += go * (u / (na * nb) - cos * v / (nb * nb));
                    }
                }
            }
        }
    }
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::MatMul(..) => "matmul",
        Op::Add(..) => "add",
        Op::Sub(..) => "sub",
        Op::Mul(..) => "mul",
        Op::Scale(..) => "scale",
        Op::Transpose(..) => "transpose",
        Op::ConcatCols(..) => "concat_cols",
        Op::ConcatRows(..) => "concat_rows",
        Op::SoftmaxRows(..) => "softmax",
        Op::Relu(..) => "relu",
        Op::Sigmoid(..) => "sigmoid",
        Op::Abs(..) => "abs",
        Op::MeanAll(..) => "mean",
        Op::SumAll(..) => "sum",
        Op::Center(..) => "center",
        Op::Bce(..) => "bce",
        Op::Cosine(..) => "cosine",
    }
}

fn op_inputs(op: &Op) -> Vec<TensorId> {
    match op {
        Op::Leaf => vec![],
        Op::MatMul(a, b)
        | Op::Add(a, b)
        | Op::Sub(a, b)
        | Op::Mul(a, b)
        | Op::Bce(a, b)
        | Op::Cosine(a, b) => vec![*a, *b],
        Op::Scale(a, _)
        | Op::Transpose(a)
        | Op::SoftmaxRows(a)
        | Op::Relu(a)
        | Op::Sigmoid(a)
        | Op::Abs(a)
        | Op::MeanAll(a)
        | Op::SumAll(a)
        | Op::Center(a) => vec![*a],
        Op::ConcatCols(parts) | Op::ConcatRows(parts) => parts.clone(),
    }
}

/// Per-node gradient buffers produced by [`Graph::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, id: TensorId) -> &[f64] {
        &self.grads[id.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_single_element_row() {
        let mut g = Graph::new();
        let x = g.constant_row(&[3.7]).unwrap();
        let y = g.softmax_rows(x).unwrap();
        assert_eq!(g.value(y), &[1.0]);
    }

    #[test]
    fn cosine_self_similarity() {
        let mut g = Graph::new();
        let v = g.constant_row(&[0.3, -1.2, 0.5]).unwrap();
        let c = g.cosine(v, v).unwrap();
        assert!((g.scalar(c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vector_is_error() {
        let mut g = Graph::new();
        let v = g.constant_row(&[0.0, 0.0]).unwrap();
        let u = g.constant_row(&[1.0, 2.0]).unwrap();
        assert_eq!(g.cosine(v, u), Err(GradError::ZeroVectorCosine));
    }

    #[test]
    fn bce_half_is_ln2() {
        let mut g = Graph::new();
        let p = g.constant_row(&[0.5]).unwrap();
        let t = g.constant_row(&[1.0]).unwrap();
        let l = g.bce_loss(p, t).unwrap();
        assert!((g.scalar(l) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn quadratic_gradient() {
        let mut g = Graph::new();
        let x = g.leaf(&Tensor::new(1, 1, vec![3.0]), true).unwrap();
        let sq = g.mul(x, x).unwrap();
        let loss = g.sum_all(sq).unwrap();
        let grads = g.backward(loss).unwrap();
        assert_eq!(grads.get(x), &[6.0]);
    }

    #[test]
    fn cosine_gradient_vanishes_at_parallel_vectors() {
        let mut g = Graph::new();
        let u = g.leaf(&Tensor::new(1, 3, vec![0.5, -1.0, 2.0]), true).unwrap();
        let v = g.constant_row(&[0.5, -1.0, 2.0]).unwrap();
        let c = g.cosine(u, v).unwrap();
        let grads = g.backward(c).unwrap();
        for &gv in grads.get(u) {
            assert!(gv.abs() < 1e-12, "grad {gv}");
        }
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut g = Graph::new();
        let x = g.leaf(&Tensor::new(1, 2, vec![1.0, 2.0]), true).unwrap();
        assert_eq!(
            g.backward(x).unwrap_err(),
            GradError::NonScalarLoss(1, 2)
        );
    }

    #[test]
    fn nonfinite_raises() {
        let mut g = Graph::new();
        let x = g.constant_row(&[1e308]).unwrap();
        let y = g.constant_row(&[1e308]).unwrap();
        let s = g.add(x, y);
        assert_eq!(s, Err(GradError::NonFiniteInput("add")));
    }

    #[test]
    fn center_is_offset_invariant() {
        let mut g = Graph::new();
        let x = g.constant_row(&[1.0, 2.0, 6.0]).unwrap();
        let y = g.constant_row(&[1.3, 2.3, 6.3]).unwrap();
        let cx = g.center(x).unwrap();
        let cy = g.center(y).unwrap();
        let cx_v: Vec<f64> = g.value(cx).to_vec();
        let cy_v: Vec<f64> = g.value(cy).to_vec();
        for (a, b) in cx_v.iter().zip(cy_v.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Central finite differences on an arbitrary scalar-valued builder.
    fn finite_diff_check(
        build: impl Fn(&mut Graph, &Tensor) -> TensorId,
        init: Tensor,
    ) {
        let mut g = Graph::new();
        let loss = build(&mut g, &init);
        // analytic: find the leaf id 0 (convention: first leaf is the param)
        let grads = g.backward(loss).unwrap();
        let analytic = grads.get(TensorId(0)).to_vec();
        let h = 1e-5;
        for k in 0..init.data.len() {
            let mut plus = init.clone();
            plus.data[k] += h;
            let mut minus = init.clone();
            minus.data[k] -= h;
            let mut gp = Graph::new();
            let lp = build(&mut gp, &plus);
            let mut gm = Graph::new();
            let lm = build(&mut gm, &minus);
            let fd = (gp.scalar(lp) - gm.scalar(lm)) / (2.0 * h);
            let denom = analytic[k].abs().max(fd.abs()).max(1e-3);
            assert!(
                (analytic[k] - fd).abs() / denom < 1e-4,
                "param {k}: analytic {} vs fd {fd}",
                analytic[k]
            );
        }
    }

    #[test]
    fn finite_difference_composed_ops() {
        // Exercises matmul, concat, softmax, relu, sigmoid, center, abs,
        // bce and mean in one composed expression.
        let build = |g: &mut Graph, w: &Tensor| -> TensorId {
            let w_id = g.leaf(w, true).unwrap();
            let x = g.constant(2, 3, vec![0.4, -0.2, 0.9, 1.1, 0.3, -0.7]).unwrap();
            let xw = g.matmul(x, w_id).unwrap(); // 2x2
            let act = g.relu(xw).unwrap();
            let sm = g.softmax_rows(xw).unwrap();
            let both = g.concat_cols(&[act, sm]).unwrap(); // 2x4
            let tb = g.transpose(both).unwrap(); // 4x2
            let prod = g.matmul(both, tb).unwrap(); // 2x2
            let sig = g.sigmoid(prod).unwrap();
            let target = g.constant(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
            let bce = g.bce_loss(sig, target).unwrap();
            let centered = g.center(xw).unwrap();
            let ab = g.abs(centered).unwrap();
            let l1 = g.mean_all(ab).unwrap();
            let sum = g.add(bce, l1).unwrap();
            g.scale(sum, 1.7).unwrap()
        };
        finite_diff_check(
            build,
            Tensor::new(3, 2, vec![0.21, -0.43, 0.55, 0.17, -0.88, 0.32]),
        );
    }

    #[test]
    fn finite_difference_cosine_path() {
        let build = |g: &mut Graph, w: &Tensor| -> TensorId {
            let w_id = g.leaf(w, true).unwrap();
            let u = g.constant_row(&[0.5, 1.5, -0.4]).unwrap();
            let uw = g.matmul(u, w_id).unwrap(); // 1x3
            let v = g.constant_row(&[0.9, -0.3, 0.6]).unwrap();
            let c = g.cosine(uw, v).unwrap();
            let one = g.scalar_const(1.0).unwrap();
            let d = g.sub(one, c).unwrap();
            g.sum_all(d).unwrap()
        };
        finite_diff_check(
            build,
            Tensor::new(3, 3, vec![0.3, 0.1, -0.2, 0.7, -0.5, 0.4, 0.2, 0.9, -0.1]),
        );
    }
}
