//! The form-context model and its attentive variant.
//!
//! An embedding for `(word, contexts)` is built from two halves: the mean of
//! the word's character n-gram embeddings (form) and a weighted mean of its
//! context vectors (context). A sigmoid gate mixes `A · context` with the
//! form half. With attention disabled every context gets the same weight;
//! with attention enabled a context's weight is its summed scaled dot-product
//! similarity to all contexts of the word, normalized to sum to one.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::corpus::{Context, ContextSet};
use crate::embedding::{EmbeddingSpace, Vector};
use crate::error::{Error, Result};
use crate::ngram::{self, FormEmbedding, NgramVocab};

pub const NGRAM_INIT_STD: f64 = 0.01;
pub const DEFAULT_F_CAP: f64 = 32.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Full,
    ContextOnly,
    FormOnly,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "context-only" => Ok(Mode::ContextOnly),
            "form-only" => Ok(Mode::FormOnly),
            other => Err(Error::Invalid(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::ContextOnly => "context-only",
            Mode::FormOnly => "form-only",
        })
    }
}

/// Learnable tensors. Also used to hold gradients of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub ngrams: Array2<f64>,
    pub a: Array2<f64>,
    pub u: Array1<f64>,
    pub b: f64,
    pub m: Array2<f64>,
}

impl Params {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Params {
            ngrams: Array2::zeros((rows, dim)),
            a: Array2::zeros((dim, dim)),
            u: Array1::zeros(2 * dim),
            b: 0.0,
            m: Array2::zeros((dim, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn all_finite(&self) -> bool {
        self.ngrams.iter().all(|x| x.is_finite())
            && self.a.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.b.is_finite()
            && self.m.iter().all(|x| x.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    vocab: NgramVocab,
    params: Params,
    attention: bool,
}

impl Model {
    /// n-gram rows ~ N(0, 0.01²), `A = M = I`, `u = 0`, `b = 0`.
    pub fn new<R: Rng>(vocab: NgramVocab, dim: usize, attention: bool, rng: &mut R) -> Self {
        let ngrams = ngram::init_table(vocab.len(), dim, NGRAM_INIT_STD, rng);
        let params = Params {
            ngrams,
            a: Array2::eye(dim),
            u: Array1::zeros(2 * dim),
            b: 0.0,
            m: Array2::eye(dim),
        };
        Model {
            vocab,
            params,
            attention,
        }
    }

    pub fn from_parts(vocab: NgramVocab, params: Params, attention: bool) -> Result<Self> {
        let d = params.dim();
        if params.a.ncols() != d
            || params.m.dim() != (d, d)
            || params.u.len() != 2 * d
            || params.ngrams.dim() != (vocab.len(), d)
        {
            return Err(Error::Invalid("inconsistent parameter shapes".into()));
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(Model {
            vocab,
            params,
            attention,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn attention(&self) -> bool {
        self.attention
    }

    pub fn vocab(&self) -> &NgramVocab {
        &self.vocab
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn form(&self, word: &str) -> FormEmbedding {
        ngram::form_embedding(word, &self.vocab, self.params.ngrams.view())
    }

    /// Resolve `contexts` against `space` and run [`Model::forward`].
    /// Contexts without any known word are dropped.
    pub fn infer(&self, word: &str, contexts: &ContextSet, space: &EmbeddingSpace, mode: Mode) -> Result<ForwardTrace> {
        let vectors: Vec<Vector> = contexts
            .contexts
            .iter()
            .filter_map(|c| context_vector(c, space))
            .collect();
        self.forward(word, vectors, mode)
    }

    /// Forward pass over precomputed context vectors.
    ///
    /// `Full` degrades to `FormOnly` without contexts and to `ContextOnly`
    /// for formless words; the trace records the mode actually used.
    pub fn forward(&self, word: &str, context_vectors: Vec<Vector>, mode: Mode) -> Result<ForwardTrace> {
        let form = self.form(word);
        let effective = match mode {
            Mode::Full if context_vectors.is_empty() && form.is_formless() => {
                return Err(Error::Degenerate(word.to_string()))
            }
            Mode::Full if context_vectors.is_empty() => Mode::FormOnly,
            Mode::Full if form.is_formless() => Mode::ContextOnly,
            Mode::ContextOnly if context_vectors.is_empty() => return Err(Error::NoContexts(word.to_string())),
            Mode::FormOnly if form.is_formless() => return Err(Error::Degenerate(word.to_string())),
            other => other,
        };
        for v in &context_vectors {
            if v.len() != self.dim() {
                return Err(Error::Dimension {
                    expected: self.dim(),
                    actual: v.len(),
                });
            }
        }

        let p = &self.params;
        let (weights, attention) = if effective == Mode::FormOnly {
            (Vec::new(), None)
        } else {
            self.weigh(&context_vectors)
        };
        let context = (!weights.is_empty())
            .then(|| context_embedding(&context_vectors, &weights))
            .transpose()?;

        let (alpha, output) = match effective {
            Mode::FormOnly => (None, form.vector.clone()),
            Mode::ContextOnly => (None, p.a.dot(context.as_ref().expect("context branch"))),
            Mode::Full => {
                let c = context.as_ref().expect("context branch");
                let alpha = gate(c.view(), form.vector.view(), p.u.view(), p.b);
                (Some(alpha), combine(c.view(), form.vector.view(), alpha, p.a.view()))
            }
        };
        Ok(ForwardTrace {
            word: word.to_string(),
            mode: effective,
            context_vectors,
            weights,
            attention,
            context,
            form,
            alpha,
            output,
        })
    }

    fn weigh(&self, vectors: &[Vector]) -> (Vec<f64>, Option<AttentionCache>) {
        let m = vectors.len();
        if !self.attention || m == 1 {
            return (vec![1.0 / m as f64; m], None);
        }
        let projected: Vec<Vector> = vectors.iter().map(|v| self.params.m.dot(v)).collect();
        let scale = (self.dim() as f64).sqrt();
        let total: Vector = projected.iter().fold(Vector::zeros(self.dim()), |acc, q| acc + q);
        let raw: Vec<f64> = projected.iter().map(|q| q.dot(&total) / scale).collect();
        let z: f64 = raw.iter().sum();
        if z.abs() < uniform_threshold(m) {
            return (vec![1.0 / m as f64; m], None);
        }
        let weights = raw.iter().map(|r| r / z).collect();
        (weights, Some(AttentionCache { projected, total, z }))
    }

    /// Squared-distance loss and its gradient for one traced forward pass.
    /// Context vectors are inputs and receive no gradient.
    pub fn backward(&self, trace: &ForwardTrace, target: ArrayView1<'_, f64>) -> (f64, Gradients) {
        let p = &self.params;
        let d = self.dim();
        let diff = &trace.output - &target;
        let loss = diff.dot(&diff);
        let g = diff * 2.0;
        let mut grads = Gradients::zeros(d);

        let (g_form, g_context) = match trace.mode {
            Mode::FormOnly => (Some(g.clone()), None),
            Mode::ContextOnly => {
                let c = trace.context.as_ref().expect("context branch");
                grads.a = outer(g.view(), c.view());
                (None, Some(p.a.t().dot(&g)))
            }
            Mode::Full => {
                let c = trace.context.as_ref().expect("context branch");
                let f = &trace.form.vector;
                let alpha = trace.alpha.expect("gate value");
                let ac = p.a.dot(c);
                let g_alpha = g.dot(&(&ac - f));
                let g_score = g_alpha * alpha * (1.0 - alpha);
                grads.a = outer(g.view(), c.view()) * alpha;
                grads.u.slice_mut(ndarray::s![..d]).assign(&(c * g_score));
                grads.u.slice_mut(ndarray::s![d..]).assign(&(f * g_score));
                grads.b = g_score;
                let g_form = &g * (1.0 - alpha) + &p.u.slice(ndarray::s![d..]) * g_score;
                let g_context = p.a.t().dot(&g) * alpha + &p.u.slice(ndarray::s![..d]) * g_score;
                (Some(g_form), Some(g_context))
            }
        };

        if let Some(g_form) = g_form {
            let k = trace.form.ids.len() as f64;
            for &id in &trace.form.ids {
                grads.add_ngram_row(id, (&g_form / k).view());
            }
        }

        if let (Some(g_context), Some(cache)) = (g_context, trace.attention.as_ref()) {
            let g_weight: Vec<f64> = trace.context_vectors.iter().map(|v| g_context.dot(v)).collect();
            let mean: f64 = g_weight.iter().zip(&trace.weights).map(|(g, w)| g * w).sum();
            let g_raw: Vec<f64> = g_weight.iter().map(|g| (g - mean) / cache.z).collect();
            let scale = (d as f64).sqrt();
            let mut shared = Vector::zeros(d);
            for (q, gr) in cache.projected.iter().zip(&g_raw) {
                shared.scaled_add(*gr, q);
            }
            for (v, gr) in trace.context_vectors.iter().zip(&g_raw) {
                let g_q = (&cache.total * *gr + &shared) / scale;
                grads.m += &outer(g_q.view(), v.view());
            }
        }

        (loss, grads)
    }
}

/// Below this `|Z|`, attention weights fall back to uniform.
pub fn uniform_threshold(m: usize) -> f64 {
    1e-8 * (m * m) as f64
}

#[derive(Clone, Debug, PartialEq)]
struct AttentionCache {
    projected: Vec<Vector>,
    total: Vector,
    z: f64,
}

/// Everything computed by one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub word: String,
    /// The mode actually used after degrading.
    pub mode: Mode,
    pub context_vectors: Vec<Vector>,
    /// One weight per context vector; empty in form-only mode.
    pub weights: Vec<f64>,
    attention: Option<AttentionCache>,
    pub context: Option<Vector>,
    pub form: FormEmbedding,
    pub alpha: Option<f64>,
    pub output: Vector,
}

impl ForwardTrace {
    /// Whether the weights came from attention rather than the uniform rule.
    pub fn attended(&self) -> bool {
        self.attention.is_some()
    }

    /// One `index<TAB>weight` line per context.
    pub fn write_weights<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for (i, w) in self.weights.iter().enumerate() {
            writeln!(writer, "{i}\t{}", crate::embedding::format_component(*w))?;
        }
        Ok(())
    }
}

/// Gradients: sparse over n-gram rows, dense elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub ngram_rows: BTreeMap<usize, Vector>,
    pub a: Array2<f64>,
    pub u: Array1<f64>,
    pub b: f64,
    pub m: Array2<f64>,
}

impl Gradients {
    pub fn zeros(dim: usize) -> Self {
        Gradients {
            ngram_rows: BTreeMap::new(),
            a: Array2::zeros((dim, dim)),
            u: Array1::zeros(2 * dim),
            b: 0.0,
            m: Array2::zeros((dim, dim)),
        }
    }

    fn add_ngram_row(&mut self, id: usize, g: ArrayView1<'_, f64>) {
        self.ngram_rows
            .entry(id)
            .and_modify(|row| *row += &g)
            .or_insert_with(|| g.to_owned());
    }

    /// `self += scale * other`
    pub fn accumulate(&mut self, other: &Gradients, scale: f64) {
        for (&id, row) in &other.ngram_rows {
            self.add_ngram_row(id, (row * scale).view());
        }
        self.a.scaled_add(scale, &other.a);
        self.u.scaled_add(scale, &other.u);
        self.b += scale * other.b;
        self.m.scaled_add(scale, &other.m);
    }

    pub fn all_finite(&self) -> bool {
        self.ngram_rows.values().flatten().all(|x| x.is_finite())
            && self.a.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.b.is_finite()
            && self.m.iter().all(|x| x.is_finite())
    }

    /// Dense copy with `rows` n-gram rows.
    pub fn to_params(&self, rows: usize) -> Params {
        let mut ngrams = Array2::zeros((rows, self.a.nrows()));
        for (&id, row) in &self.ngram_rows {
            ngrams.row_mut(id).assign(row);
        }
        Params {
            ngrams,
            a: self.a.clone(),
            u: self.u.clone(),
            b: self.b,
            m: self.m.clone(),
        }
    }
}

fn outer(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Array2<f64> {
    let a2 = a.insert_axis(ndarray::Axis(1));
    let b2 = b.insert_axis(ndarray::Axis(0));
    a2.dot(&b2)
}

/// Mean embedding of the context words known to `space`; `None` when no
/// word of the context is known.
pub fn context_vector(context: &Context, space: &EmbeddingSpace) -> Option<Vector> {
    let mut sum = Vector::zeros(space.dim());
    let mut n = 0usize;
    for token in context.tokens() {
        if let Some(v) = space.get(token) {
            sum += &v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// `(M v1) · (M v2) / sqrt(d)`
pub fn context_similarity(v1: ArrayView1<'_, f64>, v2: ArrayView1<'_, f64>, m: ArrayView2<'_, f64>) -> f64 {
    let d = m.nrows() as f64;
    m.dot(&v1).dot(&m.dot(&v2)) / d.sqrt()
}

/// Reliability weights `rho_j = sum_i s(v_j, v_i) / Z` with
/// `Z = sum_i sum_j s(v_i, v_j)`, self-similarity included. Falls back to
/// uniform weights when `|Z|` is tiny; the flag reports the fallback.
pub fn reliability_weights(vectors: &[Vector], m: ArrayView2<'_, f64>) -> (Vec<f64>, bool) {
    let count = vectors.len();
    if count == 1 {
        return (vec![1.0], false);
    }
    let raw: Vec<f64> = vectors
        .iter()
        .map(|vj| {
            vectors
                .iter()
                .map(|vi| context_similarity(vj.view(), vi.view(), m))
                .sum()
        })
        .collect();
    let z: f64 = raw.iter().sum();
    if z.abs() < uniform_threshold(count) {
        return (vec![1.0 / count as f64; count], true);
    }
    (raw.iter().map(|r| r / z).collect(), false)
}

/// `sum_i w_i v_i`
pub fn context_embedding(vectors: &[Vector], weights: &[f64]) -> Result<Vector> {
    if vectors.len() != weights.len() {
        return Err(Error::Dimension {
            expected: vectors.len(),
            actual: weights.len(),
        });
    }
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let mut out = Vector::zeros(first.len());
    for (v, &w) in vectors.iter().zip(weights) {
        out.scaled_add(w, v);
    }
    Ok(out)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(u · [context; form] + b)`
pub fn gate(context: ArrayView1<'_, f64>, form: ArrayView1<'_, f64>, u: ArrayView1<'_, f64>, b: f64) -> f64 {
    let d = context.len();
    let score = u.slice(ndarray::s![..d]).dot(&context) + u.slice(ndarray::s![d..]).dot(&form) + b;
    sigmoid(score)
}

/// `alpha · A context + (1 - alpha) · form`
pub fn combine(context: ArrayView1<'_, f64>, form: ArrayView1<'_, f64>, alpha: f64, a: ArrayView2<'_, f64>) -> Vector {
    a.dot(&context) * alpha + &form * (1.0 - alpha)
}

/// `beta = max(0, 1 - f / f_cap)`: weight of the inferred embedding in
/// [`combine_with_original`].
pub fn blend_weight(frequency: f64, f_cap: f64) -> f64 {
    (1.0 - frequency / f_cap).max(0.0)
}

/// Blend an inferred embedding with the word's original one by frequency:
/// `beta · inferred + (1 - beta) · original`, `beta` from [`blend_weight`].
pub fn combine_with_original(
    inferred: ArrayView1<'_, f64>,
    original: Option<ArrayView1<'_, f64>>,
    frequency: f64,
    f_cap: f64,
) -> Result<Vector> {
    if frequency.is_nan() || frequency < 0.0 || f_cap.is_nan() || f_cap <= 0.0 {
        return Err(Error::Invalid(format!("frequency {frequency}, f_cap {f_cap}")));
    }
    let beta = blend_weight(frequency, f_cap);
    if beta == 1.0 {
        return Ok(inferred.to_owned());
    }
    let original = original.ok_or_else(|| Error::MissingEmbedding("original embedding".into()))?;
    if beta == 0.0 {
        return Ok(original.to_owned());
    }
    Ok(&inferred * beta + &original * (1.0 - beta))
}
