//! Training loop with mega-batch negative selection and sparse Adam.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::{self, Example, GradientTable};
use crate::model::{Model, ModelKind, ParamTable, Representation};
use crate::vocab::Vocabulary;

/// Values tried by [`tune_lambda`].
pub const LAMBDA_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Mini-batches pooled per mega-batch.
    pub megabatch_size: usize,
    pub margin: f64,
    pub lambda_kl: f64,
    pub lambda_l2: f64,
    pub scramble_p: f64,
    pub epochs: usize,
    pub seed: u64,
    pub min_count: u64,
}

impl TrainConfig {
    /// Defaults for a model kind: margin 1.0 and scrambling 0.4 for WLO,
    /// margin 0.4 and no scrambling for the embedding baselines.
    pub fn for_kind(kind: ModelKind) -> Self {
        let wlo = kind == ModelKind::Wlo;
        Self {
            dim: 50,
            lr: 0.001,
            batch_size: 100,
            megabatch_size: 20,
            margin: if wlo { 1.0 } else { 0.4 },
            lambda_kl: 1e-3,
            lambda_l2: 1e-3,
            scramble_p: if wlo { 0.4 } else { 0.0 },
            epochs: 10,
            seed: 0,
            min_count: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        if self.margin.is_nan() || self.margin <= 0.0 {
            return bad("margin must be > 0");
        }
        if self.batch_size < 2 {
            return bad("batch_size must be >= 2");
        }
        if self.megabatch_size < 1 {
            return bad("megabatch_size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.scramble_p) {
            return bad("scramble_p must lie in [0, 1]");
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return bad("lr must be > 0");
        }
        if !(self.lambda_kl >= 0.0 && self.lambda_l2 >= 0.0) {
            return bad("regularization weights must be >= 0");
        }
        if self.min_count < 1 {
            return bad("min_count must be >= 1");
        }
        Ok(())
    }
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Init = 1,
    Shuffle = 2,
    Scramble = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphrasePair {
    pub s1: Vec<String>,
    pub s2: Vec<String>,
}

impl ParaphrasePair {
    pub fn new<T: AsRef<str>>(s1: &[T], s2: &[T]) -> Self {
        let own = |s: &[T]| s.iter().map(|t| t.as_ref().to_owned()).collect();
        Self { s1: own(s1), s2: own(s2) }
    }
}

/// Pairs of one mega-batch with representations cached under the
/// parameters current at construction. Sentence `2i` is the first member
/// of pair `i`, sentence `2i + 1` the second.
#[derive(Debug, Clone)]
pub struct MegaBatch {
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub reps: Vec<Representation>,
}

impl MegaBatch {
    pub fn new(model: &Model, pairs: Vec<(Vec<usize>, Vec<usize>)>) -> Result<Self> {
        let reps = pairs
            .par_iter()
            .map(|(a, b)| Ok([model.encode_ids(a)?, model.encode_ids(b)?]))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(Self { pairs, reps })
    }

    pub fn sentence(&self, idx: usize) -> &[usize] {
        let (a, b) = &self.pairs[idx / 2];
        if idx.is_multiple_of(2) {
            a
        } else {
            b
        }
    }
}

fn most_similar(reps: &[Representation], query: usize, exclude: [usize; 2]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (t, rep) in reps.iter().enumerate() {
        if exclude.contains(&t) {
            continue;
        }
        let s = reps[query].similarity(rep);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((t, s));
        }
    }
    best.expect("mega-batch holds at least two pairs").0
}

/// For pair `i`, the mega-batch sentences most similar to each member,
/// excluding both members; ties go to the lowest index.
pub fn select_negatives(mb: &MegaBatch) -> Result<Vec<(usize, usize)>> {
    if mb.pairs.len() < 2 {
        return Err(Error::MegaBatchTooSmall);
    }
    Ok((0..mb.pairs.len())
        .into_par_iter()
        .map(|i| {
            let excl = [2 * i, 2 * i + 1];
            (most_similar(&mb.reps, 2 * i, excl), most_similar(&mb.reps, 2 * i + 1, excl))
        })
        .collect())
}

/// With probability `p`, a uniformly random permutation of `tokens`.
pub fn scramble<T: Clone, R: Rng>(tokens: &[T], p: f64, rng: &mut R) -> Vec<T> {
    let mut out = tokens.to_vec();
    if p > 0.0 && rng.gen_bool(p) {
        out.shuffle(rng);
    }
    out
}

/// First and second moment estimates, one row per vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ParamTable,
    pub v: ParamTable,
}

impl AdamState {
    pub fn new(rows: usize, width: usize) -> Self {
        Self { m: ParamTable::zeros(rows, width), v: ParamTable::zeros(rows, width) }
    }
}

/// One Adam update at step `t` (1-based). Rows absent from `grads` keep
/// their parameters and moments.
pub fn adam_step(params: &mut ParamTable, grads: &GradientTable, state: &mut AdamState, lr: f64, t: u64) {
    assert!(t >= 1, "adam step index is 1-based");
    let bc1 = 1.0 - ADAM_BETA1.powf(t as f64);
    let bc2 = 1.0 - ADAM_BETA2.powf(t as f64);
    for (id, g) in grads.iter() {
        let m = state.m.row_mut(id);
        let v = state.v.row_mut(id);
        let p = params.row_mut(id);
        for j in 0..g.len() {
            m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * g[j];
            v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Total objective per training pair, averaged over the epoch.
    pub mean_loss: f64,
    /// Mean `KL(word ‖ N(0,I))` over the vocabulary at epoch end (WLO only).
    pub mean_kl: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn to_json_lines(&self) -> String {
        self.epochs
            .iter()
            .map(|r| serde_json::to_string(r).expect("epoch record serializes") + "\n")
            .collect()
    }

    /// Same losses and KL values, ignoring wall-clock times.
    pub fn same_trajectory(&self, other: &TrainingLog) -> bool {
        self.epochs.len() == other.epochs.len()
            && self
                .epochs
                .iter()
                .zip(&other.epochs)
                .all(|(a, b)| a.epoch == b.epoch && a.mean_loss == b.mean_loss && a.mean_kl == b.mean_kl)
    }
}

/// Mean word-level `KL(N(μ(w),Σ(w)) ‖ N(0,I))` over the vocabulary.
pub fn mean_word_kl(model: &Model) -> Result<f64> {
    let d = grad::word_distributions(model)?;
    Ok(d.iter().map(|g| g.kl_to_standard()).sum::<f64>() / d.len() as f64)
}

fn ingest(pairs: &[ParaphrasePair]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::MegaBatchTooSmall);
    }
    if pairs.iter().any(|p| p.s1.is_empty() || p.s2.is_empty()) {
        return Err(Error::EmptySentence);
    }
    Ok(())
}

/// Vocabulary over both sides of every pair.
pub fn corpus_vocab(pairs: &[ParaphrasePair], min_count: u64) -> Result<Vocabulary> {
    Vocabulary::build(pairs.iter().flat_map(|p| [&p.s1, &p.s2]), min_count)
}

/// Splits `n` items into mega-batch ranges; a trailing single pair joins
/// the previous mega-batch so every mega-batch has a negative candidate.
fn megabatch_ranges(n: usize, size: usize) -> Vec<std::ops::Range<usize>> {
    let mut out: Vec<std::ops::Range<usize>> = (0..n).step_by(size).map(|s| s..(s + size).min(n)).collect();
    if out.len() > 1 && out.last().is_some_and(|r| r.len() == 1) {
        let last = out.pop().expect("non-empty");
        out.last_mut().expect("non-empty").end = last.end;
    }
    out
}

/// Trains a model of the given kind on paraphrase pairs.
pub fn train(pairs: &[ParaphrasePair], config: &TrainConfig, kind: ModelKind) -> Result<(Model, TrainingLog)> {
    config.validate()?;
    ingest(pairs)?;
    let vocab = corpus_vocab(pairs, config.min_count)?;
    let mut init = stream_rng(config.seed, Stream::Init);
    let model = Model::init_random(kind, config.dim, vocab, &mut init)?;
    train_from(model, pairs, config)
}

/// Continues training an existing model; its vocabulary is kept.
pub fn train_from(mut model: Model, pairs: &[ParaphrasePair], config: &TrainConfig) -> Result<(Model, TrainingLog)> {
    config.validate()?;
    ingest(pairs)?;
    if model.dim() != config.dim {
        return Err(Error::DimMismatch { expected: config.dim, found: model.dim() });
    }
    let ids: Vec<(Vec<usize>, Vec<usize>)> = pairs.iter().map(|p| (model.ids(&p.s1), model.ids(&p.s2))).collect();
    let mut shuffle_rng = stream_rng(config.seed, Stream::Shuffle);
    let mut scramble_rng = stream_rng(config.seed, Stream::Scramble);
    let width = model.params().width();
    let mut adam = AdamState::new(model.vocab().len(), width);
    let mut t = 0u64;
    let mut log = TrainingLog::default();
    let mb_pairs = config.batch_size * config.megabatch_size;

    for epoch in 1..=config.epochs {
        let start = Instant::now();
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.shuffle(&mut shuffle_rng);
        let epoch_pairs: Vec<(Vec<usize>, Vec<usize>)> = order
            .iter()
            .map(|&i| {
                let (a, b) = &ids[i];
                (scramble(a, config.scramble_p, &mut scramble_rng), scramble(b, config.scramble_p, &mut scramble_rng))
            })
            .collect();

        let mut total = 0.0;
        for range in megabatch_ranges(epoch_pairs.len(), mb_pairs) {
            let mb = MegaBatch::new(&model, epoch_pairs[range].to_vec())?;
            let negatives = select_negatives(&mb)?;
            let examples: Vec<Example> = negatives
                .iter()
                .enumerate()
                .map(|(i, &(n1, n2))| Example {
                    s1: mb.pairs[i].0.clone(),
                    s2: mb.pairs[i].1.clone(),
                    n1: mb.sentence(n1).to_vec(),
                    n2: mb.sentence(n2).to_vec(),
                })
                .collect();
            for batch in examples.chunks(config.batch_size) {
                let (loss, grads) = grad::loss_and_gradients(&model, batch, config)?;
                total += loss;
                t += 1;
                adam_step(model.params_mut(), &grads, &mut adam, config.lr, t);
            }
        }
        let mean_kl = if model.kind() == ModelKind::Wlo { Some(mean_word_kl(&model)?) } else { None };
        log.epochs.push(EpochRecord {
            epoch,
            mean_loss: total / ids.len() as f64,
            mean_kl,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok((model, log))
}

/// Outcome of a λ sweep scored on a held-out similarity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub best_lambda: f64,
    /// `(λ, pearson)` per grid value; failed evaluations are omitted.
    pub scores: Vec<(f64, f64)>,
}

/// Trains one model per grid value of `lambda_kl` (WLO) or `lambda_l2`
/// (baselines) and keeps the one with the highest similarity Pearson.
pub fn tune_lambda(
    pairs: &[ParaphrasePair],
    held_out: &[crate::eval::StsItem],
    base: &TrainConfig,
    kind: ModelKind,
    grid: &[f64],
) -> Result<LambdaSweep> {
    let mut scores = Vec::new();
    for &lam in grid {
        let mut c = base.clone();
        if kind == ModelKind::Wlo {
            c.lambda_kl = lam;
        } else {
            c.lambda_l2 = lam;
        }
        let (model, _) = train(pairs, &c, kind)?;
        if let Ok(report) = crate::eval::eval_sts(&model, held_out) {
            scores.push((lam, report.metric("pearson").expect("sts reports pearson")));
        }
    }
    let best = scores
        .iter()
        .copied()
        .fold(None, |acc: Option<(f64, f64)>, (l, s)| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((l, s)),
        })
        .ok_or(Error::ConstantPredictions)?;
    Ok(LambdaSweep { best_lambda: best.0, scores })
}
