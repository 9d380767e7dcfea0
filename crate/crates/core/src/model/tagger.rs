//! The bidirectional tagging network: embedding lookup plus sparse
//! feature projection into a shared input vector, one LSTM scan per
//! direction from zero initial state, and a per-position softmax over
//! tags on the concatenated hidden states. Positions are decoded
//! independently; there is deliberately no sequence-level search.

use std::collections::BTreeSet;

use ndarray::{concatenate, Axis};

use crate::error::{Error, Result};
use crate::model::lstm::{CellTrace, LstmCell};
use crate::nn::{self, softmax_inplace, uniform_init, zeros_col, Differentiable, Matrix, Parameter, RngState};
use crate::text::{encode_tokens, EncodedSentence, ExtraFeatureSpec, SparseFeatures, TagSet, Token, Vocabulary};

const INIT_LO: f64 = -0.1;
const INIT_HI: f64 = 0.1;

// Probabilities are clamped here before the log so the loss stays finite.
const LOG_FLOOR: f64 = 1e-300;

/// Architecture knobs fixed at construction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    /// LSTM units per direction.
    pub hidden: usize,
    pub embed_dim: usize,
    pub peepholes: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { hidden: 100, embed_dim: 100, peepholes: true }
    }
}

/// Word-embedding lookup table: one row per vocabulary entry.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub w1: Parameter,
}

/// Projection of the sparse extra features into embedding space: one row
/// per feature slot.
#[derive(Debug, Clone)]
pub struct FeatureProjection {
    pub w2: Parameter,
}

/// One LSTM cell per scan direction; identical sizes.
#[derive(Debug, Clone)]
pub struct BlstmLayer {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

/// Output layer: logits = W_out^T . [h_fwd; h_bwd] + b_out.
#[derive(Debug, Clone)]
pub struct SoftmaxOutput {
    pub w_out: Parameter,
    pub b_out: Parameter,
}

/// Everything one forward pass computed, kept for the backward pass:
/// per-position input vectors, both directions' gate records, and the
/// (n x m) matrix of output distributions.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub inputs: Vec<Matrix>,
    pub fwd: Vec<CellTrace>,
    /// Indexed by sentence position; the scan itself ran right to left.
    pub bwd: Vec<CellTrace>,
    pub probs: Matrix,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct TaggerModel {
    pub embedding: EmbeddingTable,
    pub feature_proj: FeatureProjection,
    pub blstm: BlstmLayer,
    pub output: SoftmaxOutput,
    config: NetConfig,
    vocab: Vocabulary,
    tags: TagSet,
    feature_spec: ExtraFeatureSpec,
    // Rows of W1 with pending gradient; lets the optimizer step skip the
    // untouched bulk of the embedding table.
    w1_touched: BTreeSet<usize>,
}

impl TaggerModel {
    /// Fresh model with weights drawn uniformly from [-0.1, 0.1) in a
    /// fixed order (W1, W2, forward cell, backward cell, W_out); output
    /// biases start at zero.
    pub fn new(
        vocab: Vocabulary,
        tags: TagSet,
        feature_spec: ExtraFeatureSpec,
        config: NetConfig,
        rng: &mut RngState,
    ) -> Result<Self> {
        if config.hidden == 0 || config.embed_dim == 0 {
            return Err(Error::InvalidConfig(
                "hidden size and embedding dimension must be positive".into(),
            ));
        }
        let (v, e, h, m) = (vocab.size(), config.embed_dim, config.hidden, tags.size());
        let embedding = EmbeddingTable {
            w1: Parameter::new("w1", uniform_init(v, e, INIT_LO, INIT_HI, rng)?),
        };
        let feature_proj = FeatureProjection {
            w2: Parameter::new(
                "w2",
                uniform_init(feature_spec.dimension(), e, INIT_LO, INIT_HI, rng)?,
            ),
        };
        let blstm = BlstmLayer {
            fwd: LstmCell::new("fwd", e, h, config.peepholes, rng)?,
            bwd: LstmCell::new("bwd", e, h, config.peepholes, rng)?,
        };
        let output = SoftmaxOutput {
            w_out: Parameter::new("w_out", uniform_init(2 * h, m, INIT_LO, INIT_HI, rng)?),
            b_out: Parameter::new("b_out", Matrix::zeros((m, 1))),
        };
        TaggerModel::from_parts(vocab, tags, feature_spec, config, embedding, feature_proj, blstm, output)
    }

    /// Assemble from already-built parts, checking every inter-layer
    /// dimension. The loader goes through here.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        tags: TagSet,
        feature_spec: ExtraFeatureSpec,
        config: NetConfig,
        embedding: EmbeddingTable,
        feature_proj: FeatureProjection,
        blstm: BlstmLayer,
        output: SoftmaxOutput,
    ) -> Result<Self> {
        let (v, e, h, m) = (vocab.size(), config.embed_dim, config.hidden, tags.size());
        let f = feature_spec.dimension();
        let checks = [
            (embedding.w1.value.dim(), (v, e), "w1"),
            (feature_proj.w2.value.dim(), (f, e), "w2"),
            (output.w_out.value.dim(), (2 * h, m), "w_out"),
            (output.b_out.value.dim(), (m, 1), "b_out"),
        ];
        for (got, want, what) in checks {
            if got != want {
                return Err(Error::ShapeMismatch(format!(
                    "{what}: expected {want:?}, found {got:?}"
                )));
            }
        }
        blstm.fwd.validate(e, h)?;
        blstm.bwd.validate(e, h)?;
        Ok(TaggerModel {
            embedding,
            feature_proj,
            blstm,
            output,
            config,
            vocab,
            tags,
            feature_spec,
            w1_touched: BTreeSet::new(),
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tags
    }

    pub fn feature_spec(&self) -> &ExtraFeatureSpec {
        &self.feature_spec
    }

    /// The shared input vector I = W1[word] + sum of W2 rows of the
    /// active feature slots, as an (embed dim, 1) column.
    pub fn input_vector(&self, word_id: usize, features: &SparseFeatures) -> Result<Matrix> {
        if word_id >= self.vocab.size() {
            return Err(Error::WordIdOutOfRange { id: word_id, size: self.vocab.size() });
        }
        if features.dim() != self.feature_proj.w2.rows() {
            return Err(Error::ShapeMismatch(format!(
                "feature vector dim {} vs projection rows {}",
                features.dim(),
                self.feature_proj.w2.rows()
            )));
        }
        let mut x = self.embedding.w1.value.row(word_id).to_owned();
        for &k in features.active() {
            x += &self.feature_proj.w2.value.row(k);
        }
        Ok(x.insert_axis(Axis(1)))
    }

    /// Run both scans and the output layer over a nonempty sentence.
    pub fn forward(&self, encoded: &EncodedSentence) -> Result<ForwardTrace> {
        let n = encoded.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let h = self.config.hidden;
        let m = self.tags.size();

        let mut inputs = Vec::with_capacity(n);
        for t in 0..n {
            inputs.push(self.input_vector(encoded.word_ids[t], &encoded.extra[t])?);
        }

        let mut fwd = Vec::with_capacity(n);
        let (mut hs, mut cs) = (zeros_col(h), zeros_col(h));
        for x in &inputs {
            let tr = self.blstm.fwd.step(x, &hs, &cs);
            hs = tr.h.clone();
            cs = tr.c.clone();
            fwd.push(tr);
        }

        let mut bwd = Vec::with_capacity(n);
        let (mut hs, mut cs) = (zeros_col(h), zeros_col(h));
        for x in inputs.iter().rev() {
            let tr = self.blstm.bwd.step(x, &hs, &cs);
            hs = tr.h.clone();
            cs = tr.c.clone();
            bwd.push(tr);
        }
        bwd.reverse();

        let mut probs = Matrix::zeros((n, m));
        for t in 0..n {
            let hcat = concatenate(Axis(0), &[fwd[t].h.view(), bwd[t].h.view()]).unwrap();
            let mut z = self.output.w_out.value.t().dot(&hcat) + &self.output.b_out.value;
            softmax_inplace(z.as_slice_mut().unwrap());
            probs.row_mut(t).assign(&z.column(0));
        }
        Ok(ForwardTrace { inputs, fwd, bwd, probs })
    }

    /// Negative log-likelihood of the gold tags under an existing trace.
    pub fn nll_from_trace(&self, trace: &ForwardTrace, tag_ids: &[usize]) -> Result<f64> {
        let n = trace.len();
        let m = self.tags.size();
        if tag_ids.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} tags for a sentence of length {n}",
                tag_ids.len()
            )));
        }
        let mut loss = 0.0;
        for (t, &y) in tag_ids.iter().enumerate() {
            if y >= m {
                return Err(Error::TagIdOutOfRange { id: y, size: m });
            }
            loss -= trace.probs[(t, y)].max(LOG_FLOOR).ln();
        }
        Ok(loss)
    }

    /// Forward pass plus loss in one call.
    pub fn sentence_nll(&self, encoded: &EncodedSentence, tag_ids: &[usize]) -> Result<(f64, ForwardTrace)> {
        let trace = self.forward(encoded)?;
        let loss = self.nll_from_trace(&trace, tag_ids)?;
        Ok((loss, trace))
    }

    /// Backpropagate through time, accumulating gradients for every
    /// parameter; only the W1 rows of words present in the sentence are
    /// touched.
    pub fn backward(&mut self, encoded: &EncodedSentence, trace: &ForwardTrace, tag_ids: &[usize]) -> Result<()> {
        let n = encoded.len();
        let h = self.config.hidden;
        let m = self.tags.size();
        let e = self.config.embed_dim;
        if trace.len() != n || trace.fwd.len() != n || trace.bwd.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "trace length {} vs sentence length {n}",
                trace.len()
            )));
        }
        if trace.probs.dim() != (n, m) {
            return Err(Error::ShapeMismatch(format!(
                "trace probabilities {:?} vs expected ({n}, {m})",
                trace.probs.dim()
            )));
        }
        if tag_ids.len() != n {
            return Err(Error::ShapeMismatch(format!("{} tags for length {n}", tag_ids.len())));
        }
        if let Some(&bad) = tag_ids.iter().find(|&&y| y >= m) {
            return Err(Error::TagIdOutOfRange { id: bad, size: m });
        }

        // Output layer: the logit gradient at each position is P - onehot.
        let mut dh_f = Vec::with_capacity(n);
        let mut dh_b = Vec::with_capacity(n);
        for t in 0..n {
            let mut delta = trace.probs.row(t).to_owned().insert_axis(Axis(1));
            delta[(tag_ids[t], 0)] -= 1.0;
            let hcat = concatenate(Axis(0), &[trace.fwd[t].h.view(), trace.bwd[t].h.view()]).unwrap();
            self.output.w_out.grad += &hcat.dot(&delta.t());
            self.output.b_out.grad += &delta;
            let dhcat = self.output.w_out.value.dot(&delta);
            dh_f.push(dhcat.slice(ndarray::s![..h, ..]).to_owned());
            dh_b.push(dhcat.slice(ndarray::s![h.., ..]).to_owned());
        }

        let zero = zeros_col(h);
        let mut dinputs = vec![Matrix::zeros((e, 1)); n];

        // Forward cell runs t = n..1 in reverse.
        let (mut dh_carry, mut dc_carry) = (zeros_col(h), zeros_col(h));
        for t in (0..n).rev() {
            let (h_prev, c_prev) = if t == 0 {
                (&zero, &zero)
            } else {
                (&trace.fwd[t - 1].h, &trace.fwd[t - 1].c)
            };
            let dh = &dh_f[t] + &dh_carry;
            let (dx, dhp, dcp) = self.blstm.fwd.step_backward(
                &trace.inputs[t], h_prev, c_prev, &trace.fwd[t], &dh, &dc_carry,
            );
            dinputs[t] += &dx;
            dh_carry = dhp;
            dc_carry = dcp;
        }

        // Backward cell's internal time order is reversed, so its BPTT
        // walks positions left to right.
        let (mut dh_carry, mut dc_carry) = (zeros_col(h), zeros_col(h));
        for t in 0..n {
            let (h_prev, c_prev) = if t + 1 == n {
                (&zero, &zero)
            } else {
                (&trace.bwd[t + 1].h, &trace.bwd[t + 1].c)
            };
            let dh = &dh_b[t] + &dh_carry;
            let (dx, dhp, dcp) = self.blstm.bwd.step_backward(
                &trace.inputs[t], h_prev, c_prev, &trace.bwd[t], &dh, &dc_carry,
            );
            dinputs[t] += &dx;
            dh_carry = dhp;
            dc_carry = dcp;
        }

        for t in 0..n {
            let id = encoded.word_ids[t];
            let di = dinputs[t].column(0);
            let mut w1_row = self.embedding.w1.grad.row_mut(id);
            w1_row += &di;
            self.w1_touched.insert(id);
            for &k in encoded.extra[t].active() {
                let mut w2_row = self.feature_proj.w2.grad.row_mut(k);
                w2_row += &di;
            }
        }
        Ok(())
    }

    /// Independent per-position argmax decoding; ties go to the lowest
    /// tag id.
    pub fn predict(&self, encoded: &EncodedSentence) -> Result<Vec<usize>> {
        let trace = self.forward(encoded)?;
        Ok(trace
            .probs
            .rows()
            .into_iter()
            .map(|row| argmax(row.as_slice().unwrap()))
            .collect())
    }

    /// Encode raw tokens with the model's own vocabulary and feature
    /// spec, then decode to tag strings.
    pub fn tag_tokens(&self, tokens: &[Token]) -> Result<Vec<String>> {
        let encoded = encode_tokens(tokens, &self.vocab, &self.feature_spec);
        let ids = self.predict(&encoded)?;
        ids.iter()
            .map(|&id| self.tags.tag(id).map(String::from))
            .collect()
    }

    /// One SGD step over the accumulated gradients, then zero them. The
    /// embedding table only visits rows touched since the last step.
    /// Nothing is updated if any gradient entry is non-finite.
    pub fn sgd_step(&mut self, lr: f64) -> Result<()> {
        for &id in &self.w1_touched {
            if !self.embedding.w1.grad.row(id).iter().all(|v| v.is_finite()) {
                return Err(Error::GradientBlowup("w1".into()));
            }
        }
        nn::sgd_step(self.dense_params_mut(), lr)?;
        let Parameter { value, grad, .. } = &mut self.embedding.w1;
        for &id in &self.w1_touched {
            let g = grad.row(id);
            value.row_mut(id).scaled_add(-lr, &g);
            grad.row_mut(id).fill(0.0);
        }
        self.w1_touched.clear();
        Ok(())
    }

    /// Euclidean norm of the full gradient (touched W1 rows plus all
    /// dense parameters).
    pub fn grad_norm(&self) -> f64 {
        let mut sum = 0.0;
        for &id in &self.w1_touched {
            sum += self.embedding.w1.grad.row(id).iter().map(|v| v * v).sum::<f64>();
        }
        for p in self.dense_params() {
            sum += p.grad.iter().map(|v| v * v).sum::<f64>();
        }
        sum.sqrt()
    }

    /// Scale every pending gradient in place (global-norm clipping).
    pub fn scale_grads(&mut self, factor: f64) {
        let touched: Vec<usize> = self.w1_touched.iter().copied().collect();
        for id in touched {
            self.embedding.w1.grad.row_mut(id).mapv_inplace(|v| v * factor);
        }
        for p in self.dense_params_mut() {
            p.grad.mapv_inplace(|v| v * factor);
        }
    }

    pub fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
        self.w1_touched.clear();
    }

    /// All parameters in the fixed order used by serialization and
    /// gradient checking: W1, W2, forward cell, backward cell, output.
    pub fn params(&self) -> Vec<&Parameter> {
        let mut v = vec![&self.embedding.w1, &self.feature_proj.w2];
        v.extend(self.blstm.fwd.params());
        v.extend(self.blstm.bwd.params());
        v.push(&self.output.w_out);
        v.push(&self.output.b_out);
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Parameter> {
        let mut v = vec![&mut self.embedding.w1, &mut self.feature_proj.w2];
        v.extend(self.blstm.fwd.params_mut());
        v.extend(self.blstm.bwd.params_mut());
        v.push(&mut self.output.w_out);
        v.push(&mut self.output.b_out);
        v
    }

    fn dense_params(&self) -> Vec<&Parameter> {
        let mut v = vec![&self.feature_proj.w2];
        v.extend(self.blstm.fwd.params());
        v.extend(self.blstm.bwd.params());
        v.push(&self.output.w_out);
        v.push(&self.output.b_out);
        v
    }

    fn dense_params_mut(&mut self) -> Vec<&mut Parameter> {
        let mut v = vec![&mut self.feature_proj.w2];
        v.extend(self.blstm.fwd.params_mut());
        v.extend(self.blstm.bwd.params_mut());
        v.push(&mut self.output.w_out);
        v.push(&mut self.output.b_out);
        v
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Adapter exposing one sentence's NLL to the finite-difference gradient
/// checker.
pub struct NllObjective<'a> {
    model: &'a mut TaggerModel,
    encoded: EncodedSentence,
    tag_ids: Vec<usize>,
}

impl<'a> NllObjective<'a> {
    pub fn new(model: &'a mut TaggerModel, encoded: EncodedSentence, tag_ids: Vec<usize>) -> Result<Self> {
        if encoded.len() != tag_ids.len() || encoded.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} tokens vs {} tags",
                encoded.len(),
                tag_ids.len()
            )));
        }
        Ok(NllObjective { model, encoded, tag_ids })
    }
}

impl Differentiable for NllObjective<'_> {
    fn params(&mut self) -> Vec<&mut Parameter> {
        self.model.params_mut()
    }

    fn loss(&self) -> f64 {
        let (loss, _) = self.model.sentence_nll(&self.encoded, &self.tag_ids).unwrap();
        loss
    }

    fn loss_and_grad(&mut self) -> f64 {
        self.model.zero_grads();
        let (loss, trace) = self.model.sentence_nll(&self.encoded, &self.tag_ids).unwrap();
        self.model.backward(&self.encoded, &trace, &self.tag_ids).unwrap();
        loss
    }
}
