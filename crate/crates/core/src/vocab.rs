//! Tokenization and the vocabulary shared by every model.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const UNK_ID: usize = 0;

/// Lowercases and splits on runs of whitespace.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

/// Token ↔ id mapping with corpus frequencies.
///
/// Id 0 is always the unknown symbol. Remaining ids are assigned by
/// descending frequency, then by token, so construction is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    frequency: Vec<u64>,
}

impl Vocabulary {
    pub fn build<I, S, T>(corpus: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        if min_count < 1 {
            return Err(Error::InvalidConfig("min_count must be >= 1".into()));
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for sentence in corpus {
            for tok in sentence {
                *counts.entry(tok.as_ref().to_owned()).or_default() += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut unk_count = counts.remove(UNK).unwrap_or(0);
        let mut kept: Vec<(String, u64)> = Vec::with_capacity(counts.len());
        for (tok, c) in counts {
            if c >= min_count {
                kept.push((tok, c));
            } else {
                unk_count += c;
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut id_to_token = vec![UNK.to_owned()];
        let mut frequency = vec![unk_count];
        for (tok, c) in kept {
            id_to_token.push(tok);
            frequency.push(c);
        }
        Ok(Self::assemble(id_to_token, frequency))
    }

    /// Vocabulary from an ordered token list; `tokens[0]` must be the unknown symbol.
    /// Frequencies are unknown and set to zero.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.first().map(String::as_str) != Some(UNK) {
            return Err(Error::InvalidConfig(format!("first vocabulary entry must be {UNK}")));
        }
        let n = tokens.len();
        let v = Self::assemble(tokens, vec![0; n]);
        if v.token_to_id.len() != n {
            return Err(Error::InvalidConfig("duplicate token in vocabulary".into()));
        }
        Ok(v)
    }

    /// Same as [`Vocabulary::from_tokens`] but with explicit frequencies.
    pub fn with_frequencies(tokens: Vec<String>, frequency: Vec<u64>) -> Result<Self> {
        if tokens.len() != frequency.len() {
            return Err(Error::LengthMismatch(tokens.len(), frequency.len()));
        }
        let mut v = Self::from_tokens(tokens)?;
        v.frequency = frequency;
        Ok(v)
    }

    fn assemble(id_to_token: Vec<String>, frequency: Vec<u64>) -> Self {
        let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { token_to_id, id_to_token, frequency }
    }

    /// Number of entries, including the unknown symbol.
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn ids<T: AsRef<str>>(&self, tokens: &[T]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.id_to_token[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn frequency(&self, id: usize) -> u64 {
        self.frequency[id]
    }

    /// Frequency ranks per id: rank 1 is the most frequent entry; ties share
    /// their average rank.
    pub fn frequency_ranks(&self) -> Vec<f64> {
        let freqs: Vec<f64> = self.frequency.iter().map(|&f| -(f as f64)).collect();
        crate::stats::average_ranks(&freqs)
    }
}
