//! Synthetic paraphrase corpus with planted specificity.
//!
//! Two token classes: *markers* (`m000`, `m001`, ...) carry the content of
//! a pair and appear in both members; *fillers* (`f000`, ...) are drawn
//! independently for each member, so they carry no pairing signal. A
//! trained model should learn to make markers precise (negative entropy
//! contribution) relative to fillers.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{EntailmentLabel, EntailmentTriple, LabeledSentence};
use crate::model::ModelKind;
use crate::train::{ParaphrasePair, TrainConfig};

/// Token used to pad hypotheses in synthetic entailment triples.
pub const PAD: &str = "<pad>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Markers plus fillers.
    pub vocab_size: usize,
    pub n_markers: usize,
    pub n_pairs: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Markers per pair are drawn from `1..=max_markers`.
    pub max_markers: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { vocab_size: 200, n_markers: 100, n_pairs: 2000, min_len: 4, max_len: 8, max_markers: 3, seed: 0 }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.n_markers == 0 || self.n_markers >= self.vocab_size {
            return bad("need at least one marker and one filler");
        }
        if self.max_markers == 0 || self.max_markers > self.n_markers {
            return bad("max_markers must lie in 1..=n_markers");
        }
        if self.min_len <= self.max_markers || self.min_len > self.max_len {
            return bad("lengths must satisfy max_markers < min_len <= max_len");
        }
        Ok(())
    }
}

/// WLO settings for the default corpus: dim 10, ten epochs, and small
/// mega-batches so that a hard negative seldom carries the same markers.
pub fn train_config() -> TrainConfig {
    TrainConfig {
        dim: 10,
        lr: 0.003,
        batch_size: 25,
        megabatch_size: 4,
        epochs: 10,
        ..TrainConfig::for_kind(ModelKind::Wlo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub markers: Vec<String>,
    pub fillers: Vec<String>,
    pub pairs: Vec<ParaphrasePair>,
}

impl SynthCorpus {
    pub fn generate(config: SynthConfig) -> Result<Self> {
        config.validate()?;
        let markers: Vec<String> = (0..config.n_markers).map(|i| format!("m{i:03}")).collect();
        let fillers: Vec<String> = (0..config.vocab_size - config.n_markers).map(|i| format!("f{i:03}")).collect();
        let mut corpus = Self { config, markers, fillers, pairs: Vec::new() };
        let mut rng = ChaCha8Rng::seed_from_u64(corpus.config.seed);
        corpus.pairs = (0..corpus.config.n_pairs)
            .map(|_| {
                let content = corpus.pick_markers(&mut rng);
                ParaphrasePair { s1: corpus.sentence(&content, &mut rng), s2: corpus.sentence(&content, &mut rng) }
            })
            .collect();
        Ok(corpus)
    }

    pub fn is_marker(&self, token: &str) -> bool {
        token.starts_with('m') && self.markers.iter().any(|m| m == token)
    }

    fn pick_markers(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let c = rng.gen_range(1..=self.config.max_markers);
        index::sample(rng, self.markers.len(), c).into_iter().map(|i| self.markers[i].clone()).collect()
    }

    fn fillers(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        (0..n).map(|_| self.fillers.choose(rng).expect("fillers non-empty").clone()).collect()
    }

    /// Random length; `content` tokens placed among fresh fillers.
    fn sentence(&self, content: &[String], rng: &mut ChaCha8Rng) -> Vec<String> {
        let len = rng.gen_range(self.config.min_len..=self.config.max_len);
        let mut s = self.fillers(len - content.len(), rng);
        s.extend_from_slice(content);
        s.shuffle(rng);
        s
    }

    /// Balanced binary set: label 1 iff the sentence contains a marker.
    pub fn labeled_set(&self, n: usize, seed: u64) -> Vec<LabeledSentence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<LabeledSentence> = (0..n)
            .map(|i| {
                let specific = i % 2 == 0;
                let content = if specific { self.pick_markers(&mut rng) } else { Vec::new() };
                LabeledSentence { tokens: self.sentence(&content, &mut rng), label: if specific { 1.0 } else { 0.0 } }
            })
            .collect();
        out.shuffle(&mut rng);
        out
    }

    /// Equal-length triples per label: the premise appends one marker to a
    /// filler base, the hypothesis appends [`PAD`] to the same base.
    pub fn entailment_triples(&self, n_per_label: usize, seed: u64) -> Vec<EntailmentTriple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(3 * n_per_label);
        for label in EntailmentLabel::ALL {
            for _ in 0..n_per_label {
                let len = rng.gen_range(self.config.min_len..=self.config.max_len);
                let base = self.fillers(len - 1, &mut rng);
                let mut premise = base.clone();
                premise.push(self.markers.choose(&mut rng).expect("markers non-empty").clone());
                let mut hypothesis = base;
                hypothesis.push(PAD.to_owned());
                out.push(EntailmentTriple { label, premise, hypothesis });
            }
        }
        out
    }
}
