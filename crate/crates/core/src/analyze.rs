//! Lexical and sentential specificity analysis.
//!
//! A WLO word's effect on sentence entropy is additive: appending it adds
//! `Σ_j log|a_j|` regardless of context. Its translation norm measures how
//! far it moves the sentence mean.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{self, floor_var};
use crate::model::{Model, ModelKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordProfile {
    pub token: String,
    pub translate_norm: f64,
    pub delta_entropy: f64,
    pub corpus_frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceProfile {
    pub tokens: Vec<String>,
    pub length: usize,
    /// Entropy for WLO, vector norm for the embedding models.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    SmallNormSmallAbsEnt,
    SmallNormSmallEnt,
    LargeNormSmallAbsEnt,
    LargeNormSmallEnt,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::SmallNormSmallAbsEnt,
        Criterion::SmallNormSmallEnt,
        Criterion::LargeNormSmallAbsEnt,
        Criterion::LargeNormSmallEnt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::SmallNormSmallAbsEnt => "small_norm_small_abs_ent",
            Criterion::SmallNormSmallEnt => "small_norm_small_ent",
            Criterion::LargeNormSmallAbsEnt => "large_norm_small_abs_ent",
            Criterion::LargeNormSmallEnt => "large_norm_small_ent",
        }
    }

    fn large_norm(self) -> bool {
        matches!(self, Criterion::LargeNormSmallAbsEnt | Criterion::LargeNormSmallEnt)
    }

    fn absolute(self) -> bool {
        matches!(self, Criterion::SmallNormSmallAbsEnt | Criterion::LargeNormSmallAbsEnt)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown criterion {s:?}")))
    }
}

/// `Σ_j log|a_j|` with the variance floor applied to `a_j²`.
pub fn delta_entropy(scale: &[f64]) -> f64 {
    0.5 * scale.iter().map(|a| floor_var(a * a).ln()).sum::<f64>()
}

pub fn word_profiles(model: &Model) -> Result<Vec<WordProfile>> {
    if model.kind() != ModelKind::Wlo {
        return Err(Error::KindMismatch { expected: ModelKind::Wlo, found: model.kind() });
    }
    let vocab = model.vocab();
    Ok((0..vocab.len())
        .map(|id| WordProfile {
            token: vocab.token(id).to_owned(),
            translate_norm: gauss::norm(model.translate(id)),
            delta_entropy: delta_entropy(model.scale(id)),
            corpus_frequency: vocab.frequency(id),
        })
        .collect())
}

/// Splits words at the median translation norm, then ranks the chosen half
/// by `|delta_entropy|` (abs criteria) or by `delta_entropy` ascending.
/// The token is the final tie-break, so output does not depend on
/// vocabulary order.
pub fn rank_words(model: &Model, criterion: Criterion, top_n: usize) -> Result<Vec<WordProfile>> {
    let mut profiles = word_profiles(model)?;
    profiles.sort_by(|a, b| a.translate_norm.total_cmp(&b.translate_norm).then_with(|| a.token.cmp(&b.token)));
    let half = profiles.len().div_ceil(2);
    let mut pool = if criterion.large_norm() {
        profiles.split_off(half)
    } else {
        profiles.truncate(half);
        profiles
    };
    let key = |p: &WordProfile| if criterion.absolute() { p.delta_entropy.abs() } else { p.delta_entropy };
    pool.sort_by(|a, b| key(a).total_cmp(&key(b)).then_with(|| a.token.cmp(&b.token)));
    pool.truncate(top_n);
    Ok(pool)
}

fn sentence_score<T: AsRef<str>>(model: &Model, tokens: &[T]) -> Result<f64> {
    let rep = model.encode(tokens)?;
    Ok(match model.kind() {
        ModelKind::Wlo => -rep.specificity(),
        _ => rep.specificity(),
    })
}

/// Most specific and most general sentences of exactly `length` tokens.
///
/// Specific means low entropy (WLO) or large norm; ties keep corpus order.
pub fn extreme_sentences(
    model: &Model,
    corpus: &[Vec<String>],
    length: usize,
    k_extremes: usize,
) -> Result<(Vec<SentenceProfile>, Vec<SentenceProfile>)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut profiles = corpus
        .iter()
        .filter(|s| s.len() == length && length > 0)
        .map(|s| Ok(SentenceProfile { tokens: s.clone(), length, score: sentence_score(model, s)? }))
        .collect::<Result<Vec<_>>>()?;
    let specific_first = |a: &SentenceProfile, b: &SentenceProfile| -> Ordering {
        match model.kind() {
            ModelKind::Wlo => a.score.total_cmp(&b.score),
            _ => b.score.total_cmp(&a.score),
        }
    };
    profiles.sort_by(specific_first);
    let specific: Vec<_> = profiles.iter().take(k_extremes).cloned().collect();
    // stable sort again so ties stay in corpus order at the general end too
    profiles.sort_by(|a, b| specific_first(b, a));
    let general: Vec<_> = profiles.into_iter().take(k_extremes).collect();
    Ok((specific, general))
}

pub fn word_profiles_tsv(profiles: &[WordProfile]) -> String {
    let mut out = String::from("token\ttranslate_norm\tdelta_entropy\tcorpus_frequency\n");
    for p in profiles {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", p.token, p.translate_norm, p.delta_entropy, p.corpus_frequency));
    }
    out
}

pub fn sentence_profiles_tsv(extreme: &str, profiles: &[SentenceProfile]) -> String {
    profiles
        .iter()
        .map(|p| format!("{extreme}\t{}\t{}\t{}\n", p.length, p.score, p.tokens.join(" ")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WloOperator;
    use crate::vocab::{Vocabulary, UNK};

    fn wlo(words: &[(&str, f64, f64)], dim: usize) -> Model {
        let mut tokens = vec![UNK.to_owned()];
        let mut ops = vec![WloOperator { scale: vec![1.3; dim], translate: vec![0.4; dim] }];
        for &(w, a, b) in words {
            tokens.push(w.to_owned());
            ops.push(WloOperator { scale: vec![a; dim], translate: vec![b; dim] });
        }
        Model::from_operators(Vocabulary::from_tokens(tokens).unwrap(), ops).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identity_word_ranks_first() {
        let m = wlo(&[("id", 1.0, 0.0), ("x", 0.9, 0.1), ("y", 1.2, 2.0), ("z", 0.8, 3.0)], 3);
        let top = rank_words(&m, Criterion::SmallNormSmallAbsEnt, 1).unwrap();
        assert_eq!(top[0].token, "id");
        assert_eq!(top[0].translate_norm, 0.0);
        assert_eq!(top[0].delta_entropy, 0.0);
    }

    #[test]
    fn sharp_word_tops_small_entropy() {
        let m = wlo(&[("sharp", 0.1, 5.0), ("x", 0.9, 6.0), ("y", 1.2, 0.1), ("z", 1.0, 0.0)], 4);
        let top = rank_words(&m, Criterion::LargeNormSmallEnt, 2).unwrap();
        assert_eq!(top[0].token, "sharp");
        assert!((top[0].delta_entropy - 4.0 * 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn top_n_beyond_vocab_returns_half() {
        let m = wlo(&[("a", 1.0, 0.0), ("b", 1.0, 1.0), ("c", 1.0, 2.0)], 2);
        assert_eq!(rank_words(&m, Criterion::SmallNormSmallEnt, 100).unwrap().len(), 2);
        assert_eq!(rank_words(&m, Criterion::LargeNormSmallEnt, 100).unwrap().len(), 2);
    }

    #[test]
    fn delta_entropy_matches_single_word_entropy() {
        let m = wlo(&[("a", 0.37, 1.0), ("b", 2.5, -1.0)], 3);
        let base = crate::gauss::DiagonalGaussian::standard(3).entropy();
        for p in word_profiles(&m).unwrap() {
            let e = m.encode_wlo(&[p.token.as_str()]).unwrap().entropy();
            assert!((p.delta_entropy - (e - base)).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_sentence_examples() {
        let m = wlo(&[("id", 1.0, 0.0), ("sharp", 0.5, 0.0)], 2);
        let corpus = vec![toks("id id"), toks("id sharp"), toks("id")];
        let (spec, gen) = extreme_sentences(&m, &corpus, 2, 1).unwrap();
        assert_eq!(spec[0].tokens, toks("id sharp"));
        assert_eq!(gen[0].tokens, toks("id id"));
        let (spec, gen) = extreme_sentences(&m, &corpus, 1, 3).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec, gen);
        let (spec, gen) = extreme_sentences(&m, &corpus, 7, 3).unwrap();
        assert!(spec.is_empty() && gen.is_empty());
    }

    #[test]
    fn wordsum_repeated_rare_word_most_specific() {
        let v = Vocabulary::from_tokens(vec![UNK.into(), "the".into(), "rare".into()]).unwrap();
        let m = Model::from_embeddings(ModelKind::WordSum, v, vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![0.0, 3.0]])
            .unwrap();
        let corpus = vec![toks("the the rare"), toks("rare the rare"), toks("the the the")];
        let (spec, gen) = extreme_sentences(&m, &corpus, 3, 1).unwrap();
        assert_eq!(spec[0].tokens, toks("rare the rare"));
        assert_eq!(gen[0].tokens, toks("the the the"));
    }

    #[test]
    fn rejects_embedding_models() {
        let v = Vocabulary::from_tokens(vec![UNK.into()]).unwrap();
        let m = Model::from_embeddings(ModelKind::WordAvg, v, vec![vec![1.0]]).unwrap();
        assert!(rank_words(&m, Criterion::SmallNormSmallEnt, 3).is_err());
    }

    #[test]
    fn criterion_parse_roundtrip() {
        for c in Criterion::ALL {
            assert_eq!(c.as_str().parse::<Criterion>().unwrap(), c);
        }
    }
}
