//! Sentence encoders: word averaging, word summing, and the word linear
//! operator (WLO) model in which every word scales and translates a
//! diagonal Gaussian.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{self, DiagonalGaussian};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    WordAvg,
    WordSum,
    Wlo,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::WordAvg, ModelKind::WordSum, ModelKind::Wlo];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::WordAvg => "wordavg",
            ModelKind::WordSum => "wordsum",
            ModelKind::Wlo => "wlo",
        }
    }

    pub fn is_probabilistic(self) -> bool {
        self == ModelKind::Wlo
    }

    /// Parameters stored per word for a model of dimension `dim`.
    pub fn row_width(self, dim: usize) -> usize {
        match self {
            ModelKind::Wlo => 2 * dim,
            _ => dim,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wordavg" => Ok(ModelKind::WordAvg),
            "wordsum" => Ok(ModelKind::WordSum),
            "wlo" => Ok(ModelKind::Wlo),
            other => Err(Error::InvalidConfig(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Dense row-major table with one fixed-width row per vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTable {
    width: usize,
    data: Vec<f64>,
}

impl ParamTable {
    pub fn zeros(rows: usize, width: usize) -> Self {
        Self { width, data: vec![0.0; rows * width] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, width: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.len() != width {
                return Err(Error::DimMismatch { expected: width, found: r.len() });
            }
            data.extend(r);
        }
        Ok(Self { width, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.width..(id + 1) * self.width]
    }

    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.data[id * self.width..(id + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Diagonal scale `a` and translation `b` of one word: `z -> a ⊙ (z + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WloOperator {
    pub scale: Vec<f64>,
    pub translate: Vec<f64>,
}

impl WloOperator {
    pub fn identity(dim: usize) -> Self {
        Self { scale: vec![1.0; dim], translate: vec![0.0; dim] }
    }

    /// The operator applied once to N(0, I).
    pub fn apply_to_standard(&self) -> DiagonalGaussian {
        let mean = self.scale.iter().zip(&self.translate).map(|(a, b)| a * b).collect();
        let var = self.scale.iter().map(|a| a * a).collect();
        DiagonalGaussian::new(mean, var)
    }
}

/// A sentence representation: a point for deterministic models, a Gaussian for WLO.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Vector(Vec<f64>),
    Gaussian(DiagonalGaussian),
}

impl Representation {
    /// Training similarity: cosine for vectors, expected log inner product for Gaussians.
    pub fn similarity(&self, other: &Representation) -> f64 {
        match (self, other) {
            (Representation::Vector(a), Representation::Vector(b)) => gauss::cosine(a, b),
            (Representation::Gaussian(a), Representation::Gaussian(b)) => {
                gauss::expected_log_inner_product(a, b)
            }
            _ => panic!("mixed representation kinds"),
        }
    }

    /// Higher is more specific: negative entropy for Gaussians, Euclidean norm for vectors.
    pub fn specificity(&self) -> f64 {
        match self {
            Representation::Vector(v) => gauss::norm(v),
            Representation::Gaussian(g) => -g.entropy(),
        }
    }

    /// Vector compared by cosine for similarity scoring (`[mean, var]` for Gaussians).
    pub fn similarity_vector(&self) -> Vec<f64> {
        match self {
            Representation::Vector(v) => v.clone(),
            Representation::Gaussian(g) => g.concat(),
        }
    }
}

/// Intermediate states of the WLO fold, kept for back-propagation.
/// `means[i]`, `vars[i]` hold the state before token `i` is applied.
#[derive(Debug, Clone)]
pub(crate) struct WloTrace {
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
    pub out: DiagonalGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kind: ModelKind,
    dim: usize,
    vocab: Vocabulary,
    params: ParamTable,
}

impl Model {
    pub fn new(kind: ModelKind, dim: usize, vocab: Vocabulary, params: ParamTable) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if params.width() != kind.row_width(dim) {
            return Err(Error::DimMismatch { expected: kind.row_width(dim), found: params.width() });
        }
        if params.rows() != vocab.len() {
            return Err(Error::InvalidConfig(format!(
                "parameter table has {} rows for a vocabulary of {}",
                params.rows(),
                vocab.len()
            )));
        }
        Ok(Self { kind, dim, vocab, params })
    }

    /// Embedding model (`WordAvg` or `WordSum`) from one row per vocabulary id.
    pub fn from_embeddings(kind: ModelKind, vocab: Vocabulary, rows: Vec<Vec<f64>>) -> Result<Self> {
        if kind == ModelKind::Wlo {
            return Err(Error::KindMismatch { expected: ModelKind::WordAvg, found: kind });
        }
        let dim = rows.first().map_or(0, Vec::len);
        let params = ParamTable::from_rows(rows, dim)?;
        Self::new(kind, dim, vocab, params)
    }

    pub fn from_operators(vocab: Vocabulary, ops: Vec<WloOperator>) -> Result<Self> {
        let dim = ops.first().map_or(0, |o| o.scale.len());
        let rows = ops
            .into_iter()
            .map(|o| {
                if o.scale.len() != dim || o.translate.len() != dim {
                    return Err(Error::DimMismatch { expected: dim, found: o.scale.len().max(o.translate.len()) });
                }
                let mut r = o.scale;
                r.extend(o.translate);
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        let params = ParamTable::from_rows(rows, 2 * dim)?;
        Self::new(ModelKind::Wlo, dim, vocab, params)
    }

    /// Random initialization: embeddings ~ U(-0.1, 0.1); WLO scale ~ 1 + U(-0.05, 0.05),
    /// translate ~ U(-0.05, 0.05).
    pub fn init_random<R: Rng>(kind: ModelKind, dim: usize, vocab: Vocabulary, rng: &mut R) -> Result<Self> {
        let width = kind.row_width(dim);
        let mut params = ParamTable::zeros(vocab.len(), width);
        for id in 0..vocab.len() {
            let row = params.row_mut(id);
            match kind {
                ModelKind::Wlo => {
                    for a in &mut row[..dim] {
                        *a = 1.0 + rng.gen_range(-0.05..0.05);
                    }
                    for b in &mut row[dim..] {
                        *b = rng.gen_range(-0.05..0.05);
                    }
                }
                _ => {
                    for e in row.iter_mut() {
                        *e = rng.gen_range(-0.1..0.1);
                    }
                }
            }
        }
        Self::new(kind, dim, vocab, params)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &ParamTable {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamTable {
        &mut self.params
    }

    /// Copies corpus frequencies from `counts` onto this model's vocabulary
    /// (checkpoints do not store them). Tokens unknown to `counts` get 0.
    pub fn attach_frequencies(&mut self, counts: &Vocabulary) {
        let freq = self
            .vocab
            .tokens()
            .iter()
            .map(|t| if counts.contains(t) { counts.frequency(counts.id(t)) } else { 0 })
            .collect();
        self.vocab = Vocabulary::with_frequencies(self.vocab.tokens().to_vec(), freq)
            .expect("same token list as an existing vocabulary");
    }

    fn expect_kind(&self, kinds: &[ModelKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: kinds[0], found: self.kind })
        }
    }

    pub fn embedding(&self, id: usize) -> &[f64] {
        debug_assert!(self.kind != ModelKind::Wlo);
        self.params.row(id)
    }

    pub fn scale(&self, id: usize) -> &[f64] {
        debug_assert!(self.kind == ModelKind::Wlo);
        &self.params.row(id)[..self.dim]
    }

    pub fn translate(&self, id: usize) -> &[f64] {
        debug_assert!(self.kind == ModelKind::Wlo);
        &self.params.row(id)[self.dim..]
    }

    pub fn operator(&self, id: usize) -> Result<WloOperator> {
        self.expect_kind(&[ModelKind::Wlo])?;
        Ok(WloOperator { scale: self.scale(id).to_vec(), translate: self.translate(id).to_vec() })
    }

    pub fn ids<T: AsRef<str>>(&self, tokens: &[T]) -> Vec<usize> {
        self.vocab.ids(tokens)
    }

    pub fn encode_avg<T: AsRef<str>>(&self, tokens: &[T]) -> Result<Vec<f64>> {
        self.expect_kind(&[ModelKind::WordAvg])?;
        self.pool_ids(&self.ids(tokens), true)
    }

    pub fn encode_sum<T: AsRef<str>>(&self, tokens: &[T]) -> Result<Vec<f64>> {
        self.expect_kind(&[ModelKind::WordSum])?;
        self.pool_ids(&self.ids(tokens), false)
    }

    pub fn encode_wlo<T: AsRef<str>>(&self, tokens: &[T]) -> Result<DiagonalGaussian> {
        self.expect_kind(&[ModelKind::Wlo])?;
        self.fold_ids(&self.ids(tokens))
    }

    /// Distribution of the single-word sentence `[token]`.
    pub fn word_distribution(&self, token: &str) -> Result<DiagonalGaussian> {
        Ok(self.operator(self.vocab.id(token))?.apply_to_standard())
    }

    pub fn encode<T: AsRef<str>>(&self, tokens: &[T]) -> Result<Representation> {
        self.encode_ids(&self.ids(tokens))
    }

    pub fn encode_ids(&self, ids: &[usize]) -> Result<Representation> {
        match self.kind {
            ModelKind::WordAvg => self.pool_ids(ids, true).map(Representation::Vector),
            ModelKind::WordSum => self.pool_ids(ids, false).map(Representation::Vector),
            ModelKind::Wlo => self.fold_ids(ids).map(Representation::Gaussian),
        }
    }

    fn pool_ids(&self, ids: &[usize], average: bool) -> Result<Vec<f64>> {
        if ids.is_empty() {
            return Err(Error::EmptySentence);
        }
        let mut out = vec![0.0; self.dim];
        for &id in ids {
            for (o, e) in out.iter_mut().zip(self.params.row(id)) {
                *o += e;
            }
        }
        if average {
            let n = ids.len() as f64;
            out.iter_mut().for_each(|o| *o /= n);
        }
        Ok(out)
    }

    fn fold_ids(&self, ids: &[usize]) -> Result<DiagonalGaussian> {
        if ids.is_empty() {
            return Err(Error::EmptySentence);
        }
        let mut mean = vec![0.0; self.dim];
        let mut var = vec![1.0; self.dim];
        for &id in ids {
            self.apply(id, &mut mean, &mut var);
        }
        Ok(DiagonalGaussian::new(mean, self.canonical_var(ids)))
    }

    #[inline]
    fn apply(&self, id: usize, mean: &mut [f64], var: &mut [f64]) {
        let (a, b) = self.params.row(id).split_at(self.dim);
        for j in 0..self.dim {
            mean[j] = a[j] * (mean[j] + b[j]);
            var[j] *= a[j] * a[j];
        }
    }

    /// `∏ a²` per coordinate, multiplied in sorted order so the result is
    /// bitwise independent of token order.
    fn canonical_var(&self, ids: &[usize]) -> Vec<f64> {
        let mut sq = Vec::with_capacity(ids.len());
        (0..self.dim)
            .map(|j| {
                sq.clear();
                sq.extend(ids.iter().map(|&id| self.params.row(id)[j] * self.params.row(id)[j]));
                sq.sort_by(f64::total_cmp);
                sq.iter().product()
            })
            .collect()
    }

    pub(crate) fn fold_trace(&self, ids: &[usize]) -> Result<WloTrace> {
        if ids.is_empty() {
            return Err(Error::EmptySentence);
        }
        let mut means = Vec::with_capacity(ids.len());
        let mut vars = Vec::with_capacity(ids.len());
        let mut mean = vec![0.0; self.dim];
        let mut var = vec![1.0; self.dim];
        for &id in ids {
            means.push(mean.clone());
            vars.push(var.clone());
            self.apply(id, &mut mean, &mut var);
        }
        Ok(WloTrace { means, vars, out: DiagonalGaussian::new(mean, self.canonical_var(ids)) })
    }
}
