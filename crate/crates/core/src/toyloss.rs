//! Desk-scale reference of the joint objective: s-MLM cross-entropy over the
//! target positions plus e-CLS cross-entropy on position 0, computed by a
//! one-layer, one-head encoder with hand-written gradients.
//!
//! Architecture, for a sequence of ids `t_0..t_{n-1}`:
//!
//! ```text
//! x_i     = E[t_i] + P[i]
//! q, k, v = x Wq, x Wk, x Wv
//! A       = softmax_rows(q kᵀ / sqrt(d))
//! h       = x + (A v) Wo
//! mlm_i   = h_i Eᵀ + b          (output projection tied to E)
//! cls     = h_0 Wc + bc
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, LossError};
use crate::shards::{ShardSet, TrainingRecord, IGNORE};
use crate::tokenizer::MAX_SEQ_LEN;

pub const DEFAULT_WIDTH: usize = 16;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn add_assign(&mut self, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `a · b`
fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.cols, b.rows);
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let o = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            for (oj, bkj) in o.iter_mut().zip(b.row(k)) {
                *oj += aik * bkj;
            }
        }
    }
    out
}

/// `aᵀ · b`
fn matmul_tn(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.rows, b.rows);
    let mut out = Matrix::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        for (i, &aki) in a.row(k).iter().enumerate() {
            let o = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (oj, bkj) in o.iter_mut().zip(b.row(k)) {
                *oj += aki * bkj;
            }
        }
    }
    out
}

/// `a · bᵀ`
fn matmul_nt(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.cols, b.cols);
    let mut out = Matrix::zeros(a.rows, b.rows);
    for i in 0..a.rows {
        for j in 0..b.rows {
            out.data[i * b.rows + j] = dot(a.row(i), b.row(j));
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax in place, returning log-sum-exp.
fn softmax_in_place(z: &mut [f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

/// Encoder parameters. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyEncoderParams {
    pub tok_emb: Matrix,
    pub pos_emb: Matrix,
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub mlm_bias: Vec<f64>,
    pub cls_w: Matrix,
    pub cls_b: Vec<f64>,
}

pub const TENSOR_NAMES: [&str; 9] = ["tok_emb", "pos_emb", "wq", "wk", "wv", "wo", "mlm_bias", "cls_w", "cls_b"];

impl TinyEncoderParams {
    pub fn zeros(vocab_size: usize, width: usize) -> Self {
        TinyEncoderParams {
            tok_emb: Matrix::zeros(vocab_size, width),
            pos_emb: Matrix::zeros(MAX_SEQ_LEN, width),
            wq: Matrix::zeros(width, width),
            wk: Matrix::zeros(width, width),
            wv: Matrix::zeros(width, width),
            wo: Matrix::zeros(width, width),
            mlm_bias: vec![0.0; vocab_size],
            cls_w: Matrix::zeros(width, 2),
            cls_b: vec![0.0; 2],
        }
    }

    /// Uniform entries in `[-scale, scale]`.
    pub fn random(vocab_size: usize, width: usize, scale: f64, seed: u64) -> Self {
        let mut p = Self::zeros(vocab_size, width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.gen_range(-scale..=scale);
            }
        }
        p
    }

    pub fn vocab_size(&self) -> usize {
        self.tok_emb.rows
    }

    pub fn width(&self) -> usize {
        self.tok_emb.cols
    }

    /// Parameter tensors in [`TENSOR_NAMES`] order.
    pub fn tensors(&self) -> [&[f64]; 9] {
        [
            &self.tok_emb.data,
            &self.pos_emb.data,
            &self.wq.data,
            &self.wk.data,
            &self.wv.data,
            &self.wo.data,
            &self.mlm_bias,
            &self.cls_w.data,
            &self.cls_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 9] {
        [
            &mut self.tok_emb.data,
            &mut self.pos_emb.data,
            &mut self.wq.data,
            &mut self.wk.data,
            &mut self.wv.data,
            &mut self.wo.data,
            &mut self.mlm_bias,
            &mut self.cls_w.data,
            &mut self.cls_b,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Global L2 norm over every tensor.
    pub fn norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: f64, other: &TinyEncoderParams) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLossValue {
    pub l_smlm: f64,
    pub l_ecls: f64,
    pub total: f64,
}

/// Loss weights. The default is the unweighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointObjective {
    pub ecls_weight: f64,
}

impl Default for JointObjective {
    fn default() -> Self {
        JointObjective { ecls_weight: 1.0 }
    }
}

struct Forward {
    x: Matrix,
    q: Matrix,
    k: Matrix,
    v: Matrix,
    attn: Matrix,
    a: Matrix,
    h: Matrix,
    // (position, target, softmax over vocab)
    mlm: Vec<(usize, usize, Vec<f64>)>,
    cls_probs: Vec<f64>,
    loss: JointLossValue,
}

fn check_record(params: &TinyEncoderParams, record: &TrainingRecord) -> Result<(), LossError> {
    let n = record.input_ids.len();
    let vocab = params.vocab_size();
    if n != record.mlm_targets.len() {
        return Err(LossError::Shape { inputs: n, targets: record.mlm_targets.len() });
    }
    if n > MAX_SEQ_LEN {
        return Err(LossError::TooLong { len: n, max: MAX_SEQ_LEN });
    }
    for (pos, &id) in record.input_ids.iter().enumerate() {
        if id as usize >= vocab {
            return Err(LossError::TokenOutOfRange { id, pos, vocab });
        }
    }
    for (pos, &t) in record.mlm_targets.iter().enumerate() {
        if t != IGNORE && (t < 0 || t as usize >= vocab) {
            return Err(LossError::TokenOutOfRange { id: t as u32, pos, vocab });
        }
    }
    if record.num_targets() == 0 {
        return Err(LossError::NoTargets);
    }
    Ok(())
}

impl JointObjective {
    fn run(&self, p: &TinyEncoderParams, record: &TrainingRecord) -> Result<Forward, LossError> {
        check_record(p, record)?;
        let n = record.input_ids.len();
        let d = p.width();
        let mut x = Matrix::zeros(n, d);
        for (i, &id) in record.input_ids.iter().enumerate() {
            for ((o, e), pe) in x.row_mut(i).iter_mut().zip(p.tok_emb.row(id as usize)).zip(p.pos_emb.row(i)) {
                *o = e + pe;
            }
        }
        let q = matmul(&x, &p.wq);
        let k = matmul(&x, &p.wk);
        let v = matmul(&x, &p.wv);
        let scale = 1.0 / (d as f64).sqrt();
        let mut attn = matmul_nt(&q, &k);
        for i in 0..n {
            let row = attn.row_mut(i);
            row.iter_mut().for_each(|s| *s *= scale);
            softmax_in_place(row);
        }
        let a = matmul(&attn, &v);
        let mut h = matmul(&a, &p.wo);
        h.add_assign(&x);

        let mut mlm = Vec::new();
        let mut mlm_sum = 0.0;
        for (pos, &t) in record.mlm_targets.iter().enumerate() {
            if t == IGNORE {
                continue;
            }
            let hp = h.row(pos);
            let mut logits: Vec<f64> =
                (0..p.vocab_size()).map(|w| dot(hp, p.tok_emb.row(w)) + p.mlm_bias[w]).collect();
            let target = t as usize;
            let correct = logits[target];
            let lse = softmax_in_place(&mut logits);
            mlm_sum += lse - correct;
            mlm.push((pos, target, logits));
        }
        let l_smlm = mlm_sum / mlm.len() as f64;

        let h0 = h.row(0);
        let mut cls_probs: Vec<f64> =
            (0..2).map(|c| (0..d).map(|j| h0[j] * p.cls_w.get(j, c)).sum::<f64>() + p.cls_b[c]).collect();
        let label = usize::from(record.cls_label.min(1));
        let correct = cls_probs[label];
        let l_ecls = softmax_in_place(&mut cls_probs) - correct;

        let loss = JointLossValue { l_smlm, l_ecls, total: l_smlm + self.ecls_weight * l_ecls };
        Ok(Forward { x, q, k, v, attn, a, h, mlm, cls_probs, loss })
    }

    pub fn forward(&self, params: &TinyEncoderParams, record: &TrainingRecord) -> Result<JointLossValue, LossError> {
        Ok(self.run(params, record)?.loss)
    }

    /// Loss and exact gradient of `total` with respect to every parameter.
    pub fn backward(
        &self,
        params: &TinyEncoderParams,
        record: &TrainingRecord,
    ) -> Result<(JointLossValue, TinyEncoderParams), LossError> {
        let f = self.run(params, record)?;
        let (grad, _) = self.gradients(params, record, &f, 1.0, self.ecls_weight);
        Ok((f.loss, grad))
    }

    /// Returns the full gradient and, separately, the token-embedding gradient
    /// that flows through the input side only.
    fn gradients(
        &self,
        p: &TinyEncoderParams,
        record: &TrainingRecord,
        f: &Forward,
        w_mlm: f64,
        w_cls: f64,
    ) -> (TinyEncoderParams, Matrix) {
        let n = record.input_ids.len();
        let d = p.width();
        let mut g = TinyEncoderParams::zeros(p.vocab_size(), d);
        let mut dh = Matrix::zeros(n, d);

        // s-MLM head (tied projection)
        let inv_m = w_mlm / f.mlm.len() as f64;
        for (pos, target, probs) in &f.mlm {
            let hp = f.h.row(*pos);
            for (w, &prob) in probs.iter().enumerate() {
                let dz = inv_m * (prob - if w == *target { 1.0 } else { 0.0 });
                if dz == 0.0 {
                    continue;
                }
                g.mlm_bias[w] += dz;
                for (ge, hv) in g.tok_emb.row_mut(w).iter_mut().zip(hp) {
                    *ge += dz * hv;
                }
                for (dhv, ev) in dh.row_mut(*pos).iter_mut().zip(p.tok_emb.row(w)) {
                    *dhv += dz * ev;
                }
            }
        }

        // e-CLS head
        let label = usize::from(record.cls_label.min(1));
        let dcls: Vec<f64> = (0..2).map(|c| w_cls * (f.cls_probs[c] - if c == label { 1.0 } else { 0.0 })).collect();
        let h0 = f.h.row(0).to_vec();
        for (j, &hj) in h0.iter().enumerate() {
            for (c, &dc) in dcls.iter().enumerate() {
                g.cls_w.data[j * 2 + c] += hj * dc;
                dh.data[j] += p.cls_w.get(j, c) * dc;
            }
        }
        for (b, dc) in g.cls_b.iter_mut().zip(&dcls) {
            *b += dc;
        }

        // h = x + a Wo
        let mut dx = dh.clone();
        g.wo = matmul_tn(&f.a, &dh);
        let da = matmul_nt(&dh, &p.wo);

        // a = A v
        let d_attn = matmul_nt(&da, &f.v);
        let dv = matmul_tn(&f.attn, &da);

        // A = softmax(S), S = q kᵀ / sqrt(d)
        let scale = 1.0 / (d as f64).sqrt();
        let mut ds = Matrix::zeros(n, n);
        for i in 0..n {
            let a_row = f.attn.row(i);
            let da_row = d_attn.row(i);
            let inner = dot(a_row, da_row);
            for ((o, &aij), &daij) in ds.row_mut(i).iter_mut().zip(a_row).zip(da_row) {
                *o = aij * (daij - inner) * scale;
            }
        }
        let dq = matmul(&ds, &f.k);
        let dk = matmul_tn(&ds, &f.q);

        g.wq = matmul_tn(&f.x, &dq);
        g.wk = matmul_tn(&f.x, &dk);
        g.wv = matmul_tn(&f.x, &dv);
        dx.add_assign(&matmul_nt(&dq, &p.wq));
        dx.add_assign(&matmul_nt(&dk, &p.wk));
        dx.add_assign(&matmul_nt(&dv, &p.wv));

        // x_i = E[t_i] + P[i]
        let mut input_side = Matrix::zeros(p.vocab_size(), d);
        for (i, &id) in record.input_ids.iter().enumerate() {
            for ((ge, gp), dxv) in input_side.row_mut(id as usize).iter_mut().zip(g.pos_emb.row_mut(i)).zip(dx.row(i)) {
                *ge += dxv;
                *gp += dxv;
            }
        }
        g.tok_emb.add_assign(&input_side);
        (g, input_side)
    }
}

pub fn forward(params: &TinyEncoderParams, record: &TrainingRecord) -> Result<JointLossValue, LossError> {
    JointObjective::default().forward(params, record)
}

pub fn backward(params: &TinyEncoderParams, record: &TrainingRecord) -> Result<(JointLossValue, TinyEncoderParams), LossError> {
    JointObjective::default().backward(params, record)
}

/// Index of the larger CLS logit: 1 entailment, 0 contradiction.
pub fn predict_cls(params: &TinyEncoderParams, record: &TrainingRecord) -> Result<u8, LossError> {
    let f = JointObjective::default().run(params, record)?;
    Ok(u8::from(f.cls_probs[1] > f.cls_probs[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub width: usize,
    /// Records per gradient step, taken consecutively in shard order.
    pub batch_size: usize,
    pub init_scale: f64,
    /// Rescale each batch gradient to at most this global L2 norm.
    pub clip_norm: Option<f64>,
    pub objective: JointObjective,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            steps: 2000,
            learning_rate: 1.0,
            seed: 0,
            width: DEFAULT_WIDTH,
            batch_size: 8,
            init_scale: 0.1,
            clip_norm: Some(1.0),
            objective: JointObjective::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub step: usize,
    pub loss: JointLossValue,
}

/// Mean losses and e-CLS accuracy over a record set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: JointLossValue,
    pub cls_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct ToyRun {
    pub params: TinyEncoderParams,
    /// Mean batch loss at each step, measured before that step's update.
    pub curve: Vec<LossPoint>,
    pub initial: Evaluation,
    pub final_eval: Evaluation,
}

pub fn evaluate(params: &TinyEncoderParams, records: &[TrainingRecord], objective: &JointObjective) -> Result<Evaluation, LossError> {
    if records.is_empty() {
        return Err(LossError::EmptyShards);
    }
    let (mut sm, mut ec, mut correct) = (0.0, 0.0, 0usize);
    for r in records {
        let f = objective.run(params, r)?;
        sm += f.loss.l_smlm;
        ec += f.loss.l_ecls;
        correct += usize::from(u8::from(f.cls_probs[1] > f.cls_probs[0]) == r.cls_label);
    }
    let n = records.len() as f64;
    let (l_smlm, l_ecls) = (sm / n, ec / n);
    Ok(Evaluation {
        loss: JointLossValue { l_smlm, l_ecls, total: l_smlm + objective.ecls_weight * l_ecls },
        cls_accuracy: correct as f64 / n,
    })
}

/// Plain gradient descent over `records` in order, wrapping around.
pub fn train_records(records: &[TrainingRecord], vocab_size: usize, cfg: &ToyConfig) -> Result<ToyRun, LossError> {
    if records.is_empty() {
        return Err(LossError::EmptyShards);
    }
    let batch = cfg.batch_size.max(1);
    let mut params = TinyEncoderParams::random(vocab_size, cfg.width, cfg.init_scale, cfg.seed);
    let initial = evaluate(&params, records, &cfg.objective)?;
    let mut curve = Vec::with_capacity(cfg.steps);
    let mut cursor = 0;
    for step in 0..cfg.steps {
        let mut grad = TinyEncoderParams::zeros(vocab_size, cfg.width);
        let (mut sm, mut ec) = (0.0, 0.0);
        for _ in 0..batch {
            let (loss, g) = cfg.objective.backward(&params, &records[cursor])?;
            cursor = (cursor + 1) % records.len();
            grad.axpy(1.0, &g);
            sm += loss.l_smlm;
            ec += loss.l_ecls;
        }
        let b = batch as f64;
        let (l_smlm, l_ecls) = (sm / b, ec / b);
        curve.push(LossPoint {
            step,
            loss: JointLossValue { l_smlm, l_ecls, total: l_smlm + cfg.objective.ecls_weight * l_ecls },
        });
        let mut scale = cfg.learning_rate / b;
        if let Some(max) = cfg.clip_norm {
            let norm = grad.norm() / b;
            if norm > max {
                scale *= max / norm;
            }
        }
        if scale != 0.0 {
            params.axpy(-scale, &grad);
        }
    }
    let final_eval = evaluate(&params, records, &cfg.objective)?;
    Ok(ToyRun { params, curve, initial, final_eval })
}

/// Reads every record of a shard directory and trains on them.
pub fn train_toy(shards_dir: &Path, cfg: &ToyConfig) -> Result<ToyRun, Error> {
    let set = ShardSet::open(shards_dir)?;
    let records = set.read_all()?;
    Ok(train_records(&records, set.manifest().config.schema.vocab_size, cfg)?)
}

/// `step,l_smlm,l_ecls,total` rows.
pub fn curve_csv(curve: &[LossPoint]) -> String {
    let mut s = String::from("step,l_smlm,l_ecls,total\n");
    for p in curve {
        let _ = writeln!(s, "{},{},{},{}", p.step, p.loss.l_smlm, p.loss.l_ecls, p.loss.total);
    }
    s
}
