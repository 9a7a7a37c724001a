//! Analytic gradients of the margin objective plus prior/L2 regularization,
//! and a central-difference checker for them.
//!
//! For one example `(s1, s2, n1, n2)` the loss is
//!
//! ```text
//! max(0, δ - d(s1,s2) + d(s1,n1)) + max(0, δ - d(s1,s2) + d(s2,n2)) + reg
//! ```
//!
//! where `d` is cosine for embedding models and the expected log inner
//! product for WLO. `reg` is `λ Σ KL(word ‖ N(0,I))` over every word
//! occurrence of all four sentences (WLO) or `λ2 Σ ‖emb‖²` (baselines).
//! Negatives are fixed inputs; their parameters still receive gradient.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{self, DiagonalGaussian, VAR_FLOOR};
use crate::model::{Model, ModelKind, ParamTable, Representation, WloTrace};
use crate::train::TrainConfig;
use crate::vocab::{Vocabulary, UNK};

/// One training example as vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

impl Example {
    pub fn sentences(&self) -> [&[usize]; 4] {
        [&self.s1, &self.s2, &self.n1, &self.n2]
    }
}

/// Sparse gradient: one row per vocabulary id touched by the batch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientTable {
    width: usize,
    rows: BTreeMap<usize, Vec<f64>>,
}

impl GradientTable {
    pub fn new(width: usize) -> Self {
        Self { width, rows: BTreeMap::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row_mut(&mut self, id: usize) -> &mut Vec<f64> {
        let w = self.width;
        self.rows.entry(id).or_insert_with(|| vec![0.0; w])
    }

    pub fn get(&self, id: usize) -> Option<&[f64]> {
        self.rows.get(&id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.rows.iter().map(|(&id, r)| (id, r.as_slice()))
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.values().flatten().fold(0.0, |m, g| m.max(g.abs()))
    }

    fn accumulate(&mut self, other: &GradientTable) {
        for (&id, row) in &other.rows {
            for (a, g) in self.row_mut(id).iter_mut().zip(row) {
                *a += g;
            }
        }
    }
}

/// Gradient with respect to a sentence representation.
enum RepGrad {
    Vector(Vec<f64>),
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
}

impl RepGrad {
    fn zeros(kind: ModelKind, dim: usize) -> Self {
        match kind {
            ModelKind::Wlo => RepGrad::Gaussian { mean: vec![0.0; dim], var: vec![0.0; dim] },
            _ => RepGrad::Vector(vec![0.0; dim]),
        }
    }
}

/// Forward state of one sentence.
enum Forward {
    Vector(Vec<f64>),
    Gaussian(WloTrace),
}

impl Forward {
    fn run(model: &Model, ids: &[usize]) -> Result<Self> {
        match model.kind() {
            ModelKind::Wlo => model.fold_trace(ids).map(Forward::Gaussian),
            _ => match model.encode_ids(ids)? {
                Representation::Vector(v) => Ok(Forward::Vector(v)),
                Representation::Gaussian(_) => unreachable!(),
            },
        }
    }

    fn similarity(&self, other: &Forward) -> f64 {
        match (self, other) {
            (Forward::Vector(a), Forward::Vector(b)) => gauss::cosine(a, b),
            (Forward::Gaussian(a), Forward::Gaussian(b)) => gauss::expected_log_inner_product(&a.out, &b.out),
            _ => unreachable!(),
        }
    }

    /// Adds `coef * ∂d(self, other)` into the two representation gradients.
    fn similarity_grad(&self, other: &Forward, coef: f64, gs: &mut RepGrad, go: &mut RepGrad) {
        match (self, other, gs, go) {
            (Forward::Vector(a), Forward::Vector(b), RepGrad::Vector(ga), RepGrad::Vector(gb)) => {
                for (g, d) in ga.iter_mut().zip(gauss::cosine_grad_first(a, b)) {
                    *g += coef * d;
                }
                for (g, d) in gb.iter_mut().zip(gauss::cosine_grad_first(b, a)) {
                    *g += coef * d;
                }
            }
            (
                Forward::Gaussian(a),
                Forward::Gaussian(b),
                RepGrad::Gaussian { mean: ma, var: va },
                RepGrad::Gaussian { mean: mb, var: vb },
            ) => {
                let e = gauss::expected_log_inner_product_grad(&a.out, &b.out);
                for j in 0..ma.len() {
                    ma[j] += coef * e.d_mean1[j];
                    va[j] += coef * e.d_var1[j];
                    mb[j] += coef * e.d_mean2[j];
                    vb[j] += coef * e.d_var2[j];
                }
            }
            _ => unreachable!(),
        }
    }
}

fn check_config(model: &Model, config: &TrainConfig) -> Result<()> {
    if model.dim() != config.dim {
        return Err(Error::DimMismatch { expected: config.dim, found: model.dim() });
    }
    Ok(())
}

/// KL of a word's single-step distribution, straight from its `(a, b)`.
fn word_kl(model: &Model, id: usize) -> f64 {
    let a = model.scale(id);
    let b = model.translate(id);
    a.iter()
        .zip(b)
        .map(|(&a, &b)| {
            let v = a * a;
            let m = a * b;
            v + m * m - 1.0 - gauss::floor_var(v).ln()
        })
        .sum::<f64>()
        * 0.5
}

fn regularizer(model: &Model, id: usize, config: &TrainConfig) -> f64 {
    match model.kind() {
        ModelKind::Wlo => config.lambda_kl * word_kl(model, id),
        _ => config.lambda_l2 * gauss::dot(model.embedding(id), model.embedding(id)),
    }
}

fn regularizer_grad(model: &Model, id: usize, config: &TrainConfig, out: &mut [f64]) {
    let k = model.dim();
    match model.kind() {
        ModelKind::Wlo => {
            let lam = config.lambda_kl;
            if lam == 0.0 {
                return;
            }
            let a = model.scale(id);
            let b = model.translate(id);
            for j in 0..k {
                let log_term = if a[j] * a[j] > VAR_FLOOR { 1.0 / a[j] } else { 0.0 };
                out[j] += lam * (a[j] + a[j] * b[j] * b[j] - log_term);
                out[k + j] += lam * a[j] * a[j] * b[j];
            }
        }
        _ => {
            let lam = config.lambda_l2;
            for (o, e) in out.iter_mut().zip(model.embedding(id)) {
                *o += 2.0 * lam * e;
            }
        }
    }
}

/// Back-propagates a representation gradient into per-word rows.
fn backprop(model: &Model, ids: &[usize], fwd: &Forward, grad: &RepGrad, table: &mut GradientTable) {
    let k = model.dim();
    match (fwd, grad) {
        (Forward::Vector(_), RepGrad::Vector(g)) => {
            let scale = if model.kind() == ModelKind::WordAvg { 1.0 / ids.len() as f64 } else { 1.0 };
            for &id in ids {
                for (r, gj) in table.row_mut(id).iter_mut().zip(g) {
                    *r += scale * gj;
                }
            }
        }
        (Forward::Gaussian(trace), RepGrad::Gaussian { mean, var }) => {
            let mut gm = mean.clone();
            let mut gv = var.clone();
            for (i, &id) in ids.iter().enumerate().rev() {
                let a = model.scale(id);
                let b = model.translate(id);
                let m_prev = &trace.means[i];
                let v_prev = &trace.vars[i];
                let row = table.row_mut(id);
                for j in 0..k {
                    row[j] += gm[j] * (m_prev[j] + b[j]) + gv[j] * 2.0 * a[j] * v_prev[j];
                    row[k + j] += gm[j] * a[j];
                    gm[j] *= a[j];
                    gv[j] *= a[j] * a[j];
                }
            }
        }
        _ => unreachable!(),
    }
}

fn example_loss_and_grad(model: &Model, ex: &Example, config: &TrainConfig) -> Result<(f64, GradientTable)> {
    let sentences = ex.sentences();
    let fwd = sentences.iter().map(|s| Forward::run(model, s)).collect::<Result<Vec<_>>>()?;
    let d12 = fwd[0].similarity(&fwd[1]);
    let d1n = fwd[0].similarity(&fwd[2]);
    let d2n = fwd[1].similarity(&fwd[3]);
    let h1 = config.margin - d12 + d1n;
    let h2 = config.margin - d12 + d2n;
    let active1 = h1 > 0.0;
    let active2 = h2 > 0.0;
    let mut loss = h1.max(0.0) + h2.max(0.0);

    let kind = model.kind();
    let k = model.dim();
    let mut grads: Vec<RepGrad> = (0..4).map(|_| RepGrad::zeros(kind, k)).collect();
    {
        let (g01, g23) = grads.split_at_mut(2);
        let (g0, g1) = g01.split_at_mut(1);
        let (g2, g3) = g23.split_at_mut(1);
        let c12 = -(active1 as u8 as f64) - (active2 as u8 as f64);
        if c12 != 0.0 {
            fwd[0].similarity_grad(&fwd[1], c12, &mut g0[0], &mut g1[0]);
        }
        if active1 {
            fwd[0].similarity_grad(&fwd[2], 1.0, &mut g0[0], &mut g2[0]);
        }
        if active2 {
            fwd[1].similarity_grad(&fwd[3], 1.0, &mut g1[0], &mut g3[0]);
        }
    }

    let mut table = GradientTable::new(kind.row_width(k));
    for ((ids, f), g) in sentences.iter().zip(&fwd).zip(&grads) {
        backprop(model, ids, f, g, &mut table);
    }
    for ids in sentences {
        for &id in ids {
            loss += regularizer(model, id, config);
            regularizer_grad(model, id, config, table.row_mut(id));
        }
    }
    Ok((loss, table))
}

fn example_loss(model: &Model, ex: &Example, config: &TrainConfig) -> Result<f64> {
    let sentences = ex.sentences();
    let reps = sentences.iter().map(|s| model.encode_ids(s)).collect::<Result<Vec<_>>>()?;
    let d12 = reps[0].similarity(&reps[1]);
    let h1 = config.margin - d12 + reps[0].similarity(&reps[2]);
    let h2 = config.margin - d12 + reps[1].similarity(&reps[3]);
    let mut loss = h1.max(0.0) + h2.max(0.0);
    for ids in sentences {
        for &id in ids {
            loss += regularizer(model, id, config);
        }
    }
    Ok(loss)
}

/// Total loss over the batch and its exact gradient.
///
/// Per-example work runs in parallel; the reduction is in batch order, so
/// the result does not depend on the number of worker threads.
pub fn loss_and_gradients(model: &Model, batch: &[Example], config: &TrainConfig) -> Result<(f64, GradientTable)> {
    check_config(model, config)?;
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    let parts = batch
        .par_iter()
        .map(|ex| example_loss_and_grad(model, ex, config))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    let mut table = GradientTable::new(model.kind().row_width(model.dim()));
    for (loss, g) in &parts {
        total += loss;
        table.accumulate(g);
    }
    Ok((total, table))
}

/// Loss only, evaluated in batch order.
pub fn batch_loss(model: &Model, batch: &[Example], config: &TrainConfig) -> Result<f64> {
    check_config(model, config)?;
    batch.iter().map(|ex| example_loss(model, ex, config)).sum()
}

/// `λ`-weighted regularizer part of [`batch_loss`], before weighting.
pub fn regularizer_sum(model: &Model, batch: &[Example]) -> f64 {
    batch
        .iter()
        .flat_map(|ex| ex.sentences())
        .flatten()
        .map(|&id| match model.kind() {
            ModelKind::Wlo => word_kl(model, id),
            _ => gauss::dot(model.embedding(id), model.embedding(id)),
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub word: String,
    /// `embedding`, `scale` or `translate`.
    pub param: String,
    pub coord: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    pub failures: Vec<CheckFailure>,
    pub checked: usize,
    pub passed: bool,
}

/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

fn param_name(kind: ModelKind, dim: usize, col: usize) -> (&'static str, usize) {
    match kind {
        ModelKind::Wlo if col < dim => ("scale", col),
        ModelKind::Wlo => ("translate", col - dim),
        _ => ("embedding", col),
    }
}

/// Compares analytic gradients against central differences on every
/// coordinate touched by the batch.
pub fn finite_difference_check(
    model: &Model,
    batch: &[Example],
    config: &TrainConfig,
    step: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    let (_, analytic) = loss_and_gradients(model, batch, config)?;
    compare_with_numeric(model, batch, config, &analytic, step, tolerance)
}

/// Checks a supplied gradient table against central differences.
pub fn compare_with_numeric(
    model: &Model,
    batch: &[Example],
    config: &TrainConfig,
    analytic: &GradientTable,
    step: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    if !(1e-6..=1e-4).contains(&step) {
        return Err(Error::InvalidConfig(format!("finite-difference step {step} outside [1e-6, 1e-4]")));
    }
    let mut probe = model.clone();
    let mut failures = Vec::new();
    let mut max_rel: f64 = 0.0;
    let mut sum_rel = 0.0;
    let mut checked = 0;
    for (id, row) in analytic.iter() {
        for (col, &a) in row.iter().enumerate() {
            let orig = probe.params().row(id)[col];
            probe.params_mut().row_mut(id)[col] = orig + step;
            let up = batch_loss(&probe, batch, config)?;
            probe.params_mut().row_mut(id)[col] = orig - step;
            let down = batch_loss(&probe, batch, config)?;
            probe.params_mut().row_mut(id)[col] = orig;
            let numeric = (up - down) / (2.0 * step);
            let rel = relative_error(a, numeric);
            max_rel = max_rel.max(rel);
            sum_rel += rel;
            checked += 1;
            if rel > tolerance {
                let (param, coord) = param_name(model.kind(), model.dim(), col);
                failures.push(CheckFailure {
                    word: model.vocab().token(id).to_owned(),
                    param: param.to_owned(),
                    coord,
                    analytic: a,
                    numeric,
                });
            }
        }
    }
    Ok(CheckReport {
        max_rel_err: max_rel,
        mean_rel_err: if checked > 0 { sum_rel / checked as f64 } else { 0.0 },
        passed: failures.is_empty(),
        failures,
        checked,
    })
}

/// A randomly generated model and batch for gradient checking.
#[derive(Debug, Clone)]
pub struct GradCheckProblem {
    pub model: Model,
    pub batch: Vec<Example>,
    pub config: TrainConfig,
}

/// Random model of `vocab_size` words (plus unk) and `n_pairs` examples with
/// sentence lengths 1..=6. WLO scales are drawn from ±[0.5, 1.5].
pub fn random_problem(
    kind: ModelKind,
    dim: usize,
    vocab_size: usize,
    n_pairs: usize,
    lambda: f64,
    seed: u64,
) -> Result<GradCheckProblem> {
    if vocab_size == 0 || n_pairs == 0 {
        return Err(Error::InvalidConfig("vocab_size and n_pairs must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens = vec![UNK.to_owned()];
    tokens.extend((0..vocab_size).map(|i| format!("w{i:03}")));
    let vocab = Vocabulary::from_tokens(tokens)?;
    let width = kind.row_width(dim);
    let mut params = ParamTable::zeros(vocab.len(), width);
    for id in 0..vocab.len() {
        for (col, p) in params.row_mut(id).iter_mut().enumerate() {
            *p = if kind == ModelKind::Wlo && col < dim {
                let sign = if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
                sign * rng.gen_range(0.5..1.5)
            } else {
                rng.gen_range(-1.0..1.0)
            };
        }
    }
    let model = Model::new(kind, dim, vocab, params)?;
    let sentence = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        let len = rng.gen_range(1..=6);
        (0..len).map(|_| rng.gen_range(0..=vocab_size)).collect()
    };
    let pool: Vec<Vec<usize>> = (0..2 * n_pairs + 2).map(|_| sentence(&mut rng)).collect();
    let mut batch = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let others: Vec<usize> = (0..pool.len()).filter(|&j| j / 2 != i).collect();
        let n1 = *others.choose(&mut rng).expect("pool has other sentences");
        let n2 = *others.choose(&mut rng).expect("pool has other sentences");
        batch.push(Example {
            s1: pool[2 * i].clone(),
            s2: pool[2 * i + 1].clone(),
            n1: pool[n1].clone(),
            n2: pool[n2].clone(),
        });
    }
    let mut config = TrainConfig::for_kind(kind);
    config.dim = dim;
    config.lambda_kl = lambda;
    config.lambda_l2 = lambda;
    Ok(GradCheckProblem { model, batch, config })
}

/// Doubles the coordinate with the largest absolute gradient; returns its
/// `(id, column)`.
pub fn corrupt_largest(grads: &mut GradientTable) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (id, row) in grads.iter() {
        for (col, g) in row.iter().enumerate() {
            if best.is_none_or(|(_, _, b)| g.abs() > b) {
                best = Some((id, col, g.abs()));
            }
        }
    }
    let (id, col, _) = best?;
    grads.row_mut(id)[col] *= 2.0;
    Some((id, col))
}

/// Distribution of the single-word sentence for every id of a WLO model.
pub fn word_distributions(model: &Model) -> Result<Vec<DiagonalGaussian>> {
    (0..model.vocab().len()).map(|id| Ok(model.operator(id)?.apply_to_standard())).collect()
}
