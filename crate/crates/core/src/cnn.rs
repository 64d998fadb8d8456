//! Two-branch convolutional classifier for the neutral/stance stage.
//!
//! Each branch convolves an embedded token matrix with `f` filters of width
//! `eta`, max-pools every filter over time, appends four sentiment scores and
//! applies a ReLU dense layer. The two dense outputs are concatenated and fed
//! to a two-way softmax. Class 0 is Neutral, class 1 is Stance.
// Backpropagation loops index several tensors at once.
#![allow(clippy::needless_range_loop)]
use std::io::Write;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::features::LEAD_SENTENCES;
use crate::num::Scalar;
use crate::persist;
use crate::sentiment::SentimentLexicon;
use crate::textproc::{leading_sentences, tokenize};

const KIND: &str = "cnn";
const MIN_PROB: f64 = 1e-12;

pub const NEUTRAL: usize = 0;
pub const STANCE: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnConfig {
    /// Embedding dimension.
    pub d: usize,
    /// Filter width in tokens.
    pub eta: usize,
    /// Filters per branch.
    pub filters: usize,
    /// Claim length cap in tokens.
    pub k: usize,
    /// Document length cap in tokens.
    pub p: usize,
    /// Dense width per branch.
    pub hidden: usize,
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl CnnConfig {
    pub fn with_dim(d: usize) -> Self {
        CnnConfig {
            d,
            eta: 3,
            filters: 64,
            k: 32,
            p: 256,
            hidden: 64,
            l2_lambda: 1e-4,
            learning_rate: 0.01,
            epochs: 20,
            batch_size: 32,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d", self.d),
            ("eta", self.eta),
            ("filters", self.filters),
            ("k", self.k),
            ("p", self.p),
            ("hidden", self.hidden),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("cnn {name} must be positive")));
            }
        }
        if self.eta > self.k || self.eta > self.p {
            return Err(Error::InvalidArgument(format!(
                "cnn filter width {} exceeds k={} or p={}",
                self.eta, self.k, self.p
            )));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidArgument("cnn l2_lambda must be >= 0".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("cnn learning_rate must be >= 0".into()));
        }
        Ok(())
    }
}

/// Row-major tensor with an explicit shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Tensor<T: Scalar> {
    pub shape: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); shape.iter().product()],
        }
    }

    fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        Tensor {
            shape: shape.to_vec(),
            data: (0..shape.iter().product::<usize>())
                .map(|_| T::of(dist.sample(rng)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Every trainable tensor; also used for gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CnnParams<T: Scalar> {
    /// `f × eta × d`
    pub claim_filters: Tensor<T>,
    pub claim_filter_bias: Tensor<T>,
    pub doc_filters: Tensor<T>,
    pub doc_filter_bias: Tensor<T>,
    /// `m × (f + 4)`
    pub claim_dense: Tensor<T>,
    pub claim_dense_bias: Tensor<T>,
    pub doc_dense: Tensor<T>,
    pub doc_dense_bias: Tensor<T>,
    /// `2 × 2m`
    pub output: Tensor<T>,
    pub output_bias: Tensor<T>,
}

pub type Gradients<T> = CnnParams<T>;

pub const TENSOR_NAMES: [&str; 10] = [
    "claim_filters",
    "claim_filter_bias",
    "doc_filters",
    "doc_filter_bias",
    "claim_dense",
    "claim_dense_bias",
    "doc_dense",
    "doc_dense_bias",
    "output",
    "output_bias",
];

impl<T: Scalar> CnnParams<T> {
    pub fn zeros(c: &CnnConfig) -> Self {
        let (f, m) = (c.filters, c.hidden);
        CnnParams {
            claim_filters: Tensor::zeros(&[f, c.eta, c.d]),
            claim_filter_bias: Tensor::zeros(&[f]),
            doc_filters: Tensor::zeros(&[f, c.eta, c.d]),
            doc_filter_bias: Tensor::zeros(&[f]),
            claim_dense: Tensor::zeros(&[m, f + 4]),
            claim_dense_bias: Tensor::zeros(&[m]),
            doc_dense: Tensor::zeros(&[m, f + 4]),
            doc_dense_bias: Tensor::zeros(&[m]),
            output: Tensor::zeros(&[2, 2 * m]),
            output_bias: Tensor::zeros(&[2]),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(c: &CnnConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, m) = (c.filters, c.hidden);
        let mut p = Self::zeros(c);
        p.claim_filters = Tensor::glorot(&[f, c.eta, c.d], c.eta * c.d, c.eta * f, &mut rng);
        p.doc_filters = Tensor::glorot(&[f, c.eta, c.d], c.eta * c.d, c.eta * f, &mut rng);
        p.claim_dense = Tensor::glorot(&[m, f + 4], f + 4, m, &mut rng);
        p.doc_dense = Tensor::glorot(&[m, f + 4], f + 4, m, &mut rng);
        p.output = Tensor::glorot(&[2, 2 * m], 2 * m, 2, &mut rng);
        p
    }

    pub fn tensors(&self) -> [&Tensor<T>; 10] {
        [
            &self.claim_filters,
            &self.claim_filter_bias,
            &self.doc_filters,
            &self.doc_filter_bias,
            &self.claim_dense,
            &self.claim_dense_bias,
            &self.doc_dense,
            &self.doc_dense_bias,
            &self.output,
            &self.output_bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 10] {
        [
            &mut self.claim_filters,
            &mut self.claim_filter_bias,
            &mut self.doc_filters,
            &mut self.doc_filter_bias,
            &mut self.claim_dense,
            &mut self.claim_dense_bias,
            &mut self.doc_dense,
            &mut self.doc_dense_bias,
            &mut self.output,
            &mut self.output_bias,
        ]
    }

    pub fn squared_norm(&self) -> T {
        self.tensors()
            .iter()
            .flat_map(|t| t.data.iter())
            .fold(T::zero(), |acc, &v| acc + v * v)
    }

    /// `self += scale * other`, coordinate-wise.
    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, &y) in a.data.iter_mut().zip(&b.data) {
                *x += scale * y;
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    fn shapes_match(&self, c: &CnnConfig) -> bool {
        let expected = Self::zeros(c);
        let matches = self
            .tensors()
            .iter()
            .zip(expected.tensors())
            .all(|(a, b)| a.shape == b.shape && a.data.len() == b.data.len());
        matches
    }
}

/// Embedded claim and document matrices plus their sentiment scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPair<T: Scalar> {
    /// `k × d`
    pub claim: Vec<T>,
    /// `p × d`
    pub doc: Vec<T>,
    pub claim_sentiment: [T; 4],
    pub doc_sentiment: [T; 4],
}

/// Token rows by embedding-table index, ready to embed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPair {
    pub claim_rows: Vec<Option<usize>>,
    pub doc_rows: Vec<Option<usize>>,
    pub claim_sentiment: [f64; 4],
    pub doc_sentiment: [f64; 4],
}

/// Tokens the document branch sees: the first sentences, capped at `p`.
pub fn doc_tokens(body: &str, p: usize) -> Vec<String> {
    tokenize(&leading_sentences(body, LEAD_SENTENCES))
        .truncated(p)
        .tokens()
        .to_vec()
}

pub fn encode_pair(
    table: &EmbeddingTable,
    sentiment: &SentimentLexicon,
    claim: &str,
    body: &str,
    config: &CnnConfig,
) -> Result<EncodedPair> {
    if table.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            found: table.dim(),
        });
    }
    let lead = leading_sentences(body, LEAD_SENTENCES);
    let rows = |text: &str, cap: usize| -> Vec<Option<usize>> {
        tokenize(text)
            .truncated(cap)
            .tokens()
            .iter()
            .map(|t| table.index_of(t))
            .collect()
    };
    Ok(EncodedPair {
        claim_rows: rows(claim, config.k),
        doc_rows: rows(&lead, config.p),
        claim_sentiment: sentiment.analyze(claim).to_array(),
        doc_sentiment: sentiment.analyze(&lead).to_array(),
    })
}

fn embed_rows<T: Scalar>(table: &EmbeddingTable, rows: &[Option<usize>], cap: usize) -> Vec<T> {
    let d = table.dim();
    let mut out = vec![T::zero(); cap * d];
    for (r, row) in rows.iter().take(cap).enumerate() {
        if let Some(i) = row {
            for (o, &v) in out[r * d..(r + 1) * d].iter_mut().zip(table.row(*i)) {
                *o = T::of(v as f64);
            }
        }
    }
    out
}

impl EncodedPair {
    pub fn embed<T: Scalar>(&self, table: &EmbeddingTable, config: &CnnConfig) -> EmbeddedPair<T> {
        EmbeddedPair {
            claim: embed_rows(table, &self.claim_rows, config.k),
            doc: embed_rows(table, &self.doc_rows, config.p),
            claim_sentiment: self.claim_sentiment.map(T::of),
            doc_sentiment: self.doc_sentiment.map(T::of),
        }
    }
}

/// Truncates/pads claim and document to `k`/`p` rows; OOV tokens are zero rows.
pub fn embed_inputs<T: Scalar>(
    table: &EmbeddingTable,
    sentiment: &SentimentLexicon,
    claim: &str,
    body: &str,
    config: &CnnConfig,
) -> Result<EmbeddedPair<T>> {
    Ok(encode_pair(table, sentiment, claim, body, config)?.embed(table, config))
}

/// One branch's intermediate values.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrace<T: Scalar> {
    /// Convolution activations, `windows × f`.
    pub conv: Vec<T>,
    pub conv_pre: Vec<T>,
    /// Pooled maxima and their window index per filter.
    pub pooled: Vec<T>,
    pub argmax: Vec<usize>,
    /// Pooled vector merged with sentiment, length `f + 4`.
    pub merged: Vec<T>,
    pub dense_pre: Vec<T>,
    pub dense: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T: Scalar> {
    pub input: EmbeddedPair<T>,
    pub claim: BranchTrace<T>,
    pub doc: BranchTrace<T>,
    pub logits: [T; 2],
    pub probabilities: [T; 2],
}

fn relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

struct Branch<'a, T: Scalar> {
    filters: &'a Tensor<T>,
    filter_bias: &'a Tensor<T>,
    dense: &'a Tensor<T>,
    dense_bias: &'a Tensor<T>,
}

impl<T: Scalar> Branch<'_, T> {
    fn forward(&self, x: &[T], rows: usize, sentiment: &[T; 4], c: &CnnConfig) -> BranchTrace<T> {
        let (d, eta, f, m) = (c.d, c.eta, c.filters, c.hidden);
        let windows = rows - eta + 1;
        let nonzero: Vec<bool> = (0..rows)
            .map(|r| x[r * d..(r + 1) * d].iter().any(|v| *v != T::zero()))
            .collect();
        let mut conv_pre = vec![T::zero(); windows * f];
        for s in 0..windows {
            for k in 0..f {
                let w = &self.filters.data[k * eta * d..(k + 1) * eta * d];
                let mut acc = self.filter_bias.data[k];
                for i in 0..eta {
                    if !nonzero[s + i] {
                        continue;
                    }
                    let row = &x[(s + i) * d..(s + i + 1) * d];
                    let wi = &w[i * d..(i + 1) * d];
                    for j in 0..d {
                        acc += wi[j] * row[j];
                    }
                }
                conv_pre[s * f + k] = acc;
            }
        }
        let conv: Vec<T> = conv_pre.iter().map(|&v| relu(v)).collect();
        let mut pooled = vec![T::zero(); f];
        let mut argmax = vec![0usize; f];
        for k in 0..f {
            let mut best = conv[k];
            for s in 1..windows {
                if conv[s * f + k] > best {
                    best = conv[s * f + k];
                    argmax[k] = s;
                }
            }
            pooled[k] = best;
        }
        let mut merged = pooled.clone();
        merged.extend_from_slice(sentiment);
        let width = f + 4;
        let dense_pre: Vec<T> = (0..m)
            .map(|o| {
                let w = &self.dense.data[o * width..(o + 1) * width];
                w.iter()
                    .zip(&merged)
                    .fold(self.dense_bias.data[o], |a, (&wi, &xi)| a + wi * xi)
            })
            .collect();
        let dense = dense_pre.iter().map(|&v| relu(v)).collect();
        BranchTrace {
            conv,
            conv_pre,
            pooled,
            argmax,
            merged,
            dense_pre,
            dense,
        }
    }
}

struct BranchGrads<'a, T: Scalar> {
    filters: &'a mut Tensor<T>,
    filter_bias: &'a mut Tensor<T>,
    dense: &'a mut Tensor<T>,
    dense_bias: &'a mut Tensor<T>,
}

fn branch_backward<T: Scalar>(
    dense_w: &Tensor<T>,
    trace: &BranchTrace<T>,
    x: &[T],
    d_out: &[T],
    c: &CnnConfig,
    g: BranchGrads<'_, T>,
) {
    let (d, eta, f, m) = (c.d, c.eta, c.filters, c.hidden);
    let width = f + 4;
    let mut d_merged = vec![T::zero(); width];
    for o in 0..m {
        if trace.dense_pre[o] <= T::zero() {
            continue;
        }
        let delta = d_out[o];
        g.dense_bias.data[o] += delta;
        for i in 0..width {
            g.dense.data[o * width + i] += delta * trace.merged[i];
            d_merged[i] += delta * dense_w.data[o * width + i];
        }
    }
    for k in 0..f {
        let s = trace.argmax[k];
        if trace.conv_pre[s * f + k] <= T::zero() {
            continue;
        }
        let delta = d_merged[k];
        g.filter_bias.data[k] += delta;
        for i in 0..eta {
            let row = &x[(s + i) * d..(s + i + 1) * d];
            let base = k * eta * d + i * d;
            for j in 0..d {
                g.filters.data[base + j] += delta * row[j];
            }
        }
    }
}

/// `−ln γ̂_target`, clamped at `−ln 1e−12`.
pub fn cnn_loss<T: Scalar>(probabilities: [T; 2], target: usize) -> Result<T> {
    if target > 1 {
        return Err(Error::InvalidArgument(format!(
            "cnn target must be 0 or 1, got {target}"
        )));
    }
    Ok(-(probabilities[target].max(T::of(MIN_PROB))).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CnnModel<T: Scalar> {
    pub config: CnnConfig,
    pub params: CnnParams<T>,
}

/// Per-epoch losses from [`train_cnn`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    /// Zero-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl TrainLog {
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "epoch,train_loss,validation_loss")?;
        for (e, l) in self.train_loss.iter().enumerate() {
            match self.validation_loss.get(e) {
                Some(v) => writeln!(out, "{},{l},{v}", e + 1)?,
                None => writeln!(out, "{},{l},", e + 1)?,
            }
        }
        Ok(())
    }
}

impl<T: Scalar> CnnModel<T> {
    pub fn new(config: CnnConfig) -> Result<Self> {
        config.validate()?;
        Ok(CnnModel {
            params: CnnParams::init(&config, config.seed),
            config,
        })
    }

    pub fn zeros(config: CnnConfig) -> Result<Self> {
        config.validate()?;
        Ok(CnnModel {
            params: CnnParams::zeros(&config),
            config,
        })
    }

    fn check_input(&self, input: &EmbeddedPair<T>) -> Result<()> {
        let c = &self.config;
        for (len, expected) in [(input.claim.len(), c.k * c.d), (input.doc.len(), c.p * c.d)] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, found: len });
            }
        }
        Ok(())
    }

    pub fn forward(&self, input: EmbeddedPair<T>) -> Result<ForwardTrace<T>> {
        self.check_input(&input)?;
        let (c, p) = (&self.config, &self.params);
        let claim = Branch {
            filters: &p.claim_filters,
            filter_bias: &p.claim_filter_bias,
            dense: &p.claim_dense,
            dense_bias: &p.claim_dense_bias,
        }
        .forward(&input.claim, c.k, &input.claim_sentiment, c);
        let doc = Branch {
            filters: &p.doc_filters,
            filter_bias: &p.doc_filter_bias,
            dense: &p.doc_dense,
            dense_bias: &p.doc_dense_bias,
        }
        .forward(&input.doc, c.p, &input.doc_sentiment, c);
        let m = c.hidden;
        let mut logits = [T::zero(); 2];
        for (n, logit) in logits.iter_mut().enumerate() {
            let w = &p.output.data[n * 2 * m..(n + 1) * 2 * m];
            let mut acc = p.output_bias.data[n];
            for i in 0..m {
                acc += w[i] * claim.dense[i] + w[m + i] * doc.dense[i];
            }
            *logit = acc;
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cnn logits".into()));
        }
        let top = logits[0].max(logits[1]);
        let e = [(logits[0] - top).exp(), (logits[1] - top).exp()];
        let z = e[0] + e[1];
        Ok(ForwardTrace {
            input,
            claim,
            doc,
            logits,
            probabilities: [e[0] / z, e[1] / z],
        })
    }

    /// `(λ/2)‖θ‖²`
    pub fn regularizer(&self) -> T {
        T::of(self.config.l2_lambda / 2.0) * self.params.squared_norm()
    }

    /// Cross-entropy plus the L2 term for one example.
    pub fn loss(&self, input: EmbeddedPair<T>, target: usize) -> Result<T> {
        let trace = self.forward(input)?;
        Ok(cnn_loss(trace.probabilities, target)? + self.regularizer())
    }

    /// Gradient of the cross-entropy only.
    fn data_gradients(&self, trace: &ForwardTrace<T>, target: usize) -> Result<Gradients<T>> {
        if target > 1 {
            return Err(Error::InvalidArgument(format!(
                "cnn target must be 0 or 1, got {target}"
            )));
        }
        let c = &self.config;
        if trace.claim.argmax.len() != c.filters
            || trace.claim.dense.len() != c.hidden
            || trace.doc.dense.len() != c.hidden
        {
            return Err(Error::InvalidArgument("trace does not match this model".into()));
        }
        self.check_input(&trace.input)?;
        let m = c.hidden;
        let mut g = CnnParams::zeros(c);
        let mut d_logits = trace.probabilities;
        d_logits[target] -= T::one();
        let mut d_claim = vec![T::zero(); m];
        let mut d_doc = vec![T::zero(); m];
        for n in 0..2 {
            let delta = d_logits[n];
            g.output_bias.data[n] += delta;
            let row = n * 2 * m;
            for i in 0..m {
                g.output.data[row + i] += delta * trace.claim.dense[i];
                g.output.data[row + m + i] += delta * trace.doc.dense[i];
                d_claim[i] += delta * self.params.output.data[row + i];
                d_doc[i] += delta * self.params.output.data[row + m + i];
            }
        }
        branch_backward(
            &self.params.claim_dense,
            &trace.claim,
            &trace.input.claim,
            &d_claim,
            c,
            BranchGrads {
                filters: &mut g.claim_filters,
                filter_bias: &mut g.claim_filter_bias,
                dense: &mut g.claim_dense,
                dense_bias: &mut g.claim_dense_bias,
            },
        );
        branch_backward(
            &self.params.doc_dense,
            &trace.doc,
            &trace.input.doc,
            &d_doc,
            c,
            BranchGrads {
                filters: &mut g.doc_filters,
                filter_bias: &mut g.doc_filter_bias,
                dense: &mut g.doc_dense,
                dense_bias: &mut g.doc_dense_bias,
            },
        );
        Ok(g)
    }

    /// Exact gradient of cross-entropy plus `(λ/2)‖θ‖²`.
    pub fn backward(&self, trace: &ForwardTrace<T>, target: usize) -> Result<Gradients<T>> {
        let mut g = self.data_gradients(trace, target)?;
        g.add_scaled(&self.params, T::of(self.config.l2_lambda));
        Ok(g)
    }

    /// Softmax output, `[Neutral, Stance]`.
    pub fn probabilities(&self, input: EmbeddedPair<T>) -> Result<[T; 2]> {
        Ok(self.forward(input)?.probabilities)
    }

    /// `(class, probability)`; a tie goes to Stance.
    pub fn predict(&self, input: EmbeddedPair<T>) -> Result<(usize, T)> {
        let [p0, p1] = self.probabilities(input)?;
        Ok(if p1 >= p0 { (STANCE, p1) } else { (NEUTRAL, p0) })
    }

    pub fn to_json(&self) -> Result<String> {
        persist::to_string(KIND, T::NAME, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: CnnModel<T> = persist::from_str(KIND, T::NAME, text)?;
        model.config.validate()?;
        if !model.params.shapes_match(&model.config) {
            return Err(Error::Format("cnn tensor shapes do not match its config".into()));
        }
        if !model.params.all_finite() {
            return Err(Error::Format("cnn parameters are not finite".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Training examples with binary targets (`true` = Stance).
pub struct CnnData<'a> {
    pub pairs: &'a [EncodedPair],
    pub targets: &'a [bool],
}

fn mean_loss<T: Scalar>(model: &CnnModel<T>, data: &CnnData<'_>, table: &EmbeddingTable) -> Result<f64> {
    let losses = (0..data.pairs.len())
        .into_par_iter()
        .map(|i| {
            let trace = model.forward(data.pairs[i].embed(table, &model.config))?;
            Ok(cnn_loss(trace.probabilities, data.targets[i] as usize)?.to_f64_lossy())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
}

/// Mini-batch gradient descent with step `lr / (1 + epoch)`. With a validation
/// set the parameters of the lowest-validation-loss epoch are returned.
pub fn train_cnn<T: Scalar>(
    train: &CnnData<'_>,
    validation: Option<&CnnData<'_>>,
    table: &EmbeddingTable,
    config: &CnnConfig,
) -> Result<(CnnModel<T>, TrainLog)> {
    config.validate()?;
    if table.dim() != config.d {
        return Err(Error::DimensionMismatch {
            expected: config.d,
            found: table.dim(),
        });
    }
    if train.pairs.len() != train.targets.len() {
        return Err(Error::DimensionMismatch {
            expected: train.pairs.len(),
            found: train.targets.len(),
        });
    }
    let pos = train.targets.iter().filter(|&&t| t).count();
    if pos == 0 || pos == train.targets.len() {
        return Err(Error::SingleClass {
            stage: "cnn".into(),
            present: if pos == 0 {
                "Neutral".into()
            } else {
                "Stance".into()
            },
        });
    }
    let mut model = CnnModel::<T>::new(config.clone())?;
    let mut log = TrainLog::default();
    let mut best: Option<(f64, CnnParams<T>)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train.pairs.len()).collect();
    let lambda = T::of(config.l2_lambda);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let eta = T::of(config.learning_rate / (1.0 + epoch as f64));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| {
                    let trace = model.forward(train.pairs[i].embed(table, config))?;
                    let target = train.targets[i] as usize;
                    let loss = cnn_loss(trace.probabilities, target)?;
                    Ok((loss, model.data_gradients(&trace, target)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut sum = CnnParams::zeros(config);
            for (loss, g) in &results {
                epoch_loss += loss.to_f64_lossy();
                sum.add_scaled(g, T::one());
            }
            sum.add_scaled(&model.params, lambda * T::of(batch.len() as f64));
            model.params.add_scaled(&sum, -eta / T::of(batch.len() as f64));
        }
        let mean = epoch_loss / train.pairs.len() as f64 + model.regularizer().to_f64_lossy();
        if !mean.is_finite() || !model.params.all_finite() {
            return Err(Error::TrainingAborted(format!(
                "cnn loss became non-finite in epoch {}; lower the learning rate",
                epoch + 1
            )));
        }
        log.train_loss.push(mean);
        log::debug!("cnn epoch {} train loss {mean:.6}", epoch + 1);
        match validation {
            Some(v) => {
                let vl = mean_loss(&model, v, table)?;
                log.validation_loss.push(vl);
                if best.as_ref().is_none_or(|(b, _)| vl < *b) {
                    best = Some((vl, model.params.clone()));
                    log.best_epoch = epoch;
                }
            }
            None => log.best_epoch = epoch,
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CnnConfig {
        CnnConfig {
            d: 2,
            eta: 2,
            filters: 2,
            k: 3,
            p: 4,
            hidden: 2,
            ..CnnConfig::with_dim(2)
        }
    }

    fn input(c: &CnnConfig, fill: f64) -> EmbeddedPair<f64> {
        EmbeddedPair {
            claim: (0..c.k * c.d).map(|i| fill * (i as f64 + 1.0) / 7.0).collect(),
            doc: (0..c.p * c.d)
                .map(|i| fill * ((i % 5) as f64 - 2.0) / 3.0)
                .collect(),
            claim_sentiment: [0.2, 0.1, 0.7, 0.3],
            doc_sentiment: [0.0, 0.4, 0.6, -0.5],
        }
    }

    #[test]
    fn zero_model_is_uniform_and_ties_to_stance() {
        let m = CnnModel::<f64>::zeros(tiny()).unwrap();
        let t = m.forward(input(&tiny(), 1.0)).unwrap();
        assert_eq!(t.probabilities, [0.5, 0.5]);
        assert_eq!(m.predict(input(&tiny(), 1.0)).unwrap(), (STANCE, 0.5));
    }

    #[test]
    fn loss_examples() {
        assert!((cnn_loss([0.5f64, 0.5], 0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(cnn_loss([1.0f64, 0.0], 0).unwrap(), 0.0);
        assert!((cnn_loss([0.9f64, 0.1], 1).unwrap() - std::f64::consts::LN_10).abs() < 1e-12);
        assert!((cnn_loss([1.0f64, 0.0], 1).unwrap() - 1e12f64.ln()).abs() < 1e-9);
        assert!(cnn_loss([0.5f64, 0.5], 2).is_err());
    }

    #[test]
    fn max_pool_records_constructed_maximum() {
        let mut c = tiny();
        c.k = 10;
        c.eta = 1;
        c.filters = 1;
        let mut m = CnnModel::<f64>::zeros(c.clone()).unwrap();
        m.params.claim_filters.data = vec![1.0, 0.0];
        let mut x = input(&c, 0.0);
        x.claim[7 * c.d] = 3.0;
        let t = m.forward(x).unwrap();
        assert_eq!(t.claim.argmax[0], 7);
        assert_eq!(t.claim.pooled[0], 3.0);
    }

    #[test]
    fn regularizer_shifts_gradient_by_lambda_param() {
        let mut c = tiny();
        c.l2_lambda = 0.0;
        let m0 = CnnModel::<f64>::new(c.clone()).unwrap();
        let mut m1 = m0.clone();
        m1.config.l2_lambda = 0.1;
        let t = m0.forward(input(&c, 1.0)).unwrap();
        let g0 = m0.backward(&t, 1).unwrap();
        let g1 = m1.backward(&t, 1).unwrap();
        for ((a, b), p) in g0.tensors().iter().zip(g1.tensors()).zip(m0.params.tensors()) {
            for ((x, y), w) in a.data.iter().zip(&b.data).zip(&p.data) {
                assert!((y - x - 0.1 * w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn serialization_round_trip() {
        let m = CnnModel::<f64>::new(tiny()).unwrap();
        let back = CnnModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let mut bad = m.clone();
        bad.params.output.data.pop();
        assert!(CnnModel::<f64>::from_json(&bad.to_json().unwrap()).is_err());
    }
}
