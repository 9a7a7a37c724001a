//! Specificity, entailment-direction and similarity evaluation protocols.
//!
//! Every protocol takes a [`Scorer`], where a higher score means a more
//! specific sentence. Models score by negative entropy (WLO) or vector
//! norm (WordAvg/WordSum); the length and word-frequency baselines are
//! scorers too, and any closure `Fn(&[String]) -> Result<f64>` works.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gauss;
use crate::model::Model;
use crate::stats;
use crate::vocab::Vocabulary;

pub trait Scorer {
    fn score(&self, tokens: &[String]) -> Result<f64>;
}

impl Scorer for Model {
    fn score(&self, tokens: &[String]) -> Result<f64> {
        specificity_score(self, tokens)
    }
}

impl<F> Scorer for F
where
    F: Fn(&[String]) -> Result<f64>,
{
    fn score(&self, tokens: &[String]) -> Result<f64> {
        self(tokens)
    }
}

/// `-entropy` for WLO, Euclidean norm for the embedding models.
pub fn specificity_score<T: AsRef<str>>(model: &Model, tokens: &[T]) -> Result<f64> {
    Ok(model.encode(tokens)?.specificity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Length,
    FreqSum,
    FreqAvg,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(BaselineKind::Length),
            "freq_sum" | "freq-sum" => Ok(BaselineKind::FreqSum),
            "freq_avg" | "freq-avg" => Ok(BaselineKind::FreqAvg),
            other => Err(Error::InvalidConfig(format!("unknown baseline {other:?}"))),
        }
    }
}

/// Length and word-frequency-rank baselines. Rank 1 is the most frequent
/// word; unknown words take the rank of the unknown symbol.
#[derive(Debug, Clone)]
pub struct BaselineScorer<'a> {
    kind: BaselineKind,
    vocab: &'a Vocabulary,
    ranks: Vec<f64>,
}

impl<'a> BaselineScorer<'a> {
    pub fn new(kind: BaselineKind, vocab: &'a Vocabulary) -> Self {
        Self { kind, vocab, ranks: vocab.frequency_ranks() }
    }
}

impl Scorer for BaselineScorer<'_> {
    fn score(&self, tokens: &[String]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        let rank_sum = || tokens.iter().map(|t| self.ranks[self.vocab.id(t)]).sum::<f64>();
        Ok(match self.kind {
            BaselineKind::Length => tokens.len() as f64,
            BaselineKind::FreqSum => rank_sum(),
            BaselineKind::FreqAvg => rank_sum() / tokens.len() as f64,
        })
    }
}

pub fn baseline_score<T: AsRef<str>>(kind: BaselineKind, vocab: &Vocabulary, tokens: &[T]) -> Result<f64> {
    let owned: Vec<String> = tokens.iter().map(|t| t.as_ref().to_owned()).collect();
    BaselineScorer::new(kind, vocab).score(&owned)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    /// `0`/`1` (general/specific) for classification, any real for correlation.
    pub label: f64,
}

impl LabeledSentence {
    pub fn new<T: AsRef<str>>(tokens: &[T], label: f64) -> Self {
        Self { tokens: tokens.iter().map(|t| t.as_ref().to_owned()).collect(), label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntailmentLabel {
    Entailment,
    Neutral,
    Contradiction,
}

impl EntailmentLabel {
    pub const ALL: [EntailmentLabel; 3] =
        [EntailmentLabel::Entailment, EntailmentLabel::Neutral, EntailmentLabel::Contradiction];

    pub fn as_str(self) -> &'static str {
        match self {
            EntailmentLabel::Entailment => "entailment",
            EntailmentLabel::Neutral => "neutral",
            EntailmentLabel::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for EntailmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntailmentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entailment" => Ok(EntailmentLabel::Entailment),
            "neutral" => Ok(EntailmentLabel::Neutral),
            "contradiction" => Ok(EntailmentLabel::Contradiction),
            other => Err(Error::InvalidConfig(format!("unknown entailment label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentTriple {
    pub label: EntailmentLabel,
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsItem {
    pub gold: f64,
    pub s1: Vec<String>,
    pub s2: Vec<String>,
}

fn ser_threshold<S: Serializer>(t: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        None => s.serialize_none(),
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(v) if *v > 0.0 => s.serialize_str("inf"),
        Some(_) => s.serialize_str("-inf"),
    }
}

/// Metric bundle produced by every protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task: String,
    pub n: usize,
    pub metrics: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_threshold")]
    pub threshold: Option<f64>,
}

impl EvalReport {
    fn new(task: &str, n: usize) -> Self {
        Self { task: task.to_owned(), n, metrics: BTreeMap::new(), threshold: None }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_owned(), value);
        self
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two aligned columns, `field<TAB>value`.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![("task".into(), self.task.clone()), ("n".into(), self.n.to_string())];
        if let Some(t) = self.threshold {
            rows.push(("threshold".into(), t.to_string()));
        }
        rows.extend(self.metrics.iter().map(|(k, v)| (k.clone(), v.to_string())));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}\t{v}\n")).collect()
    }
}

fn score_all<S: Scorer + ?Sized>(scorer: &S, sentences: &[LabeledSentence]) -> Result<Vec<f64>> {
    sentences.iter().map(|s| scorer.score(&s.tokens)).collect()
}

fn binary_labels(sentences: &[LabeledSentence]) -> Result<Vec<bool>> {
    sentences
        .iter()
        .map(|s| match s.label {
            0.0 => Ok(false),
            1.0 => Ok(true),
            l => Err(Error::InvalidConfig(format!("binary label expected, got {l}"))),
        })
        .collect()
}

fn accuracy_at(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let correct = scores.iter().zip(labels).filter(|(&s, &l)| (s > threshold) == l).count();
    correct as f64 / scores.len() as f64
}

/// Threshold maximizing training accuracy for "specific iff score > threshold".
///
/// Candidates are `-inf`, midpoints between consecutive distinct scores, and
/// `+inf`; ties go to the smallest threshold.
pub fn tune_threshold(scores: &[f64], labels: &[bool]) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n = scores.len();
    // threshold -inf: everything predicted specific
    let mut correct = positives;
    let mut best = (f64::NEG_INFINITY, correct);
    let mut i = 0;
    while i < n {
        let s = scores[order[i]];
        while i < n && scores[order[i]] == s {
            // item moves from "specific" to "general"
            if labels[order[i]] {
                correct -= 1;
            } else {
                correct += 1;
            }
            i += 1;
        }
        let threshold = if i < n { 0.5 * (s + scores[order[i]]) } else { f64::INFINITY };
        if correct > best.1 {
            best = (threshold, correct);
        }
    }
    Ok((best.0, best.1 as f64 / n as f64))
}

fn f1(scores: &[f64], labels: &[bool], threshold: f64) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s > threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
}

fn majority_rate(labels: &[bool]) -> f64 {
    let p = labels.iter().filter(|&&l| l).count();
    p.max(labels.len() - p) as f64 / labels.len() as f64
}

/// Threshold tuned on `train`, accuracy and F1 ("specific" positive) on `test`.
pub fn eval_news<S: Scorer + ?Sized>(
    scorer: &S,
    train: &[LabeledSentence],
    test: &[LabeledSentence],
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::TooFewInstances { needed: 1, got: 0 });
    }
    let train_labels = binary_labels(train)?;
    let test_labels = binary_labels(test)?;
    let (threshold, train_acc) = tune_threshold(&score_all(scorer, train)?, &train_labels)?;
    let test_scores = score_all(scorer, test)?;
    let mut r = EvalReport::new("news", test.len())
        .with("accuracy", accuracy_at(&test_scores, &test_labels, threshold))
        .with("f1", f1(&test_scores, &test_labels, threshold))
        .with("train_accuracy", train_acc)
        .with("majority", majority_rate(&test_labels));
    r.threshold = Some(threshold);
    Ok(r)
}

/// Spearman correlation between scores and real-valued labels.
pub fn eval_correlation<S: Scorer + ?Sized>(scorer: &S, test: &[LabeledSentence]) -> Result<EvalReport> {
    if test.len() < 3 {
        return Err(Error::TooFewInstances { needed: 3, got: test.len() });
    }
    let scores = score_all(scorer, test)?;
    let labels: Vec<f64> = test.iter().map(|s| s.label).collect();
    Ok(EvalReport::new("correlation", test.len()).with("spearman", stats::spearman(&scores, &labels)?))
}

/// Scores and labels grouped by sentence length.
type ByLength = BTreeMap<usize, (Vec<f64>, Vec<bool>)>;

/// Thresholds tuned on training sentences of length `k` and applied to test
/// sentences of length `k - 1`, pooled over every usable `k`.
pub fn length_normalized_eval<S: Scorer + ?Sized>(
    scorer: &S,
    train: &[LabeledSentence],
    test: &[LabeledSentence],
) -> Result<EvalReport> {
    let group = |set: &[LabeledSentence]| -> Result<ByLength> {
        let labels = binary_labels(set)?;
        let mut g = ByLength::new();
        for (s, l) in set.iter().zip(labels) {
            let e = g.entry(s.tokens.len()).or_default();
            e.0.push(scorer.score(&s.tokens)?);
            e.1.push(l);
        }
        Ok(g)
    };
    let train_groups = group(train)?;
    let test_groups = group(test)?;
    let (mut correct, mut total, mut groups) = (0usize, 0usize, 0usize);
    let mut pooled_labels = Vec::new();
    for (&k, (scores, labels)) in &train_groups {
        let Some((test_scores, test_labels)) = k.checked_sub(1).and_then(|j| test_groups.get(&j)) else {
            continue;
        };
        let Ok((threshold, _)) = tune_threshold(scores, labels) else {
            continue;
        };
        groups += 1;
        total += test_scores.len();
        correct += test_scores.iter().zip(test_labels).filter(|(&s, &l)| (s > threshold) == l).count();
        pooled_labels.extend_from_slice(test_labels);
    }
    if total == 0 {
        return Err(Error::NoUsableGroups);
    }
    Ok(EvalReport::new("length-norm", total)
        .with("accuracy", correct as f64 / total as f64)
        .with("majority", majority_rate(&pooled_labels))
        .with("groups", groups as f64))
}

/// Among equal-length pairs, the percentage per category where the
/// hypothesis scores strictly less specific than the premise.
pub fn eval_entailment<S: Scorer + ?Sized>(scorer: &S, triples: &[EntailmentTriple]) -> Result<EvalReport> {
    let mut counts: HashMap<EntailmentLabel, (usize, usize)> = HashMap::new();
    let mut kept = 0;
    for t in triples.iter().filter(|t| t.premise.len() == t.hypothesis.len()) {
        let more_general = scorer.score(&t.hypothesis)? < scorer.score(&t.premise)?;
        let c = counts.entry(t.label).or_default();
        c.0 += more_general as usize;
        c.1 += 1;
        kept += 1;
    }
    let mut r = EvalReport::new("entailment", kept);
    for label in EntailmentLabel::ALL {
        let (hits, n) = counts.get(&label).copied().unwrap_or_default();
        r.metrics.insert(format!("{label}_n"), n as f64);
        if n > 0 {
            r.metrics.insert(format!("{label}_pct"), 100.0 * hits as f64 / n as f64);
        }
    }
    Ok(r)
}

/// Cosine similarity used for similarity scoring: sentence vectors for the
/// embedding models, `[mean, var]` for WLO.
pub fn sts_similarity<T: AsRef<str>>(model: &Model, s1: &[T], s2: &[T]) -> Result<f64> {
    let a = model.encode(s1)?.similarity_vector();
    let b = model.encode(s2)?.similarity_vector();
    Ok(gauss::cosine(&a, &b))
}

/// Pearson correlation between gold scores and model similarities.
pub fn eval_sts(model: &Model, items: &[StsItem]) -> Result<EvalReport> {
    eval_sts_with(|a: &[String], b: &[String]| sts_similarity(model, a, b), items)
}

pub fn eval_sts_with<F>(similarity: F, items: &[StsItem]) -> Result<EvalReport>
where
    F: Fn(&[String], &[String]) -> Result<f64>,
{
    if items.len() < 3 {
        return Err(Error::TooFewInstances { needed: 3, got: items.len() });
    }
    let preds = items.iter().map(|it| similarity(&it.s1, &it.s2)).collect::<Result<Vec<_>>>()?;
    let gold: Vec<f64> = items.iter().map(|it| it.gold).collect();
    Ok(EvalReport::new("sts", items.len()).with("pearson", stats::pearson(&preds, &gold)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, WloOperator};
    use crate::vocab::UNK;
    use proptest::prelude::*;

    fn brute_threshold(scores: &[f64], labels: &[bool]) -> f64 {
        let mut sorted: Vec<f64> = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let mut cands = vec![f64::NEG_INFINITY];
        cands.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        cands.push(f64::INFINITY);
        cands.iter().map(|&t| accuracy_at(scores, labels, t)).fold(0.0, f64::max)
    }

    #[test]
    fn threshold_example() {
        let (t, acc) = tune_threshold(&[0.1, 0.4, 0.9], &[false, false, true]).unwrap();
        assert!((t - 0.65).abs() < 1e-15);
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn inverted_scores_get_majority_rate() {
        let (_, acc) = tune_threshold(&[1.0, 2.0, 3.0, 4.0, 5.0], &[true, true, false, false, false]).unwrap();
        assert_eq!(acc, 0.6);
    }

    #[test]
    fn constant_scores_use_sentinel() {
        let (t, acc) = tune_threshold(&[2.0; 4], &[false, false, false, true]).unwrap();
        assert_eq!(t, f64::INFINITY);
        assert_eq!(acc, 0.75);
        let (t, _) = tune_threshold(&[2.0; 4], &[true, true, false, true]).unwrap();
        assert_eq!(t, f64::NEG_INFINITY);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(tune_threshold(&[1.0, 2.0], &[true, true]), Err(Error::DegenerateLabels)));
    }

    proptest! {
        #[test]
        fn threshold_matches_brute_force(data in prop::collection::vec((0i32..20, any::<bool>()), 2..60)) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0) * 0.5).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let (t, acc) = tune_threshold(&scores, &labels).unwrap();
            prop_assert_eq!(acc, brute_threshold(&scores, &labels));
            prop_assert_eq!(acc, accuracy_at(&scores, &labels, t));
        }
    }

    fn wlo(words: &[(&str, f64)], dim: usize) -> Model {
        let mut tokens = vec![UNK.to_owned()];
        let mut ops = vec![WloOperator::identity(dim)];
        for &(w, a) in words {
            tokens.push(w.to_owned());
            ops.push(WloOperator { scale: vec![a; dim], translate: vec![0.1; dim] });
        }
        Model::from_operators(Vocabulary::from_tokens(tokens).unwrap(), ops).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn specificity_examples() {
        let m = wlo(&[("id", 1.0), ("sharp", 0.5)], 3);
        let base = specificity_score(&m, &toks("id id")).unwrap();
        assert!((base + 3.0 * gauss::unit_entropy()).abs() < 1e-12);
        let more = specificity_score(&m, &toks("id id sharp")).unwrap();
        assert!((more - base - (-3.0 * 0.5f64.ln())).abs() < 1e-12);

        let v = Vocabulary::from_tokens(vec![UNK.into(), "w1".into()]).unwrap();
        let s = Model::from_embeddings(ModelKind::WordSum, v, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(specificity_score(&s, &toks("w1 w1")).unwrap(), 2.0);
    }

    #[test]
    fn baseline_examples() {
        let v = Vocabulary::with_frequencies(
            vec![UNK.into(), "the".into(), "cat".into(), "asteroid".into()],
            vec![0, 100, 5, 1],
        )
        .unwrap();
        assert_eq!(baseline_score(BaselineKind::Length, &v, &toks("a b c d e")).unwrap(), 5.0);
        assert_eq!(baseline_score(BaselineKind::FreqSum, &v, &toks("the asteroid")).unwrap(), 4.0);
        assert_eq!(baseline_score(BaselineKind::FreqAvg, &v, &toks("the asteroid")).unwrap(), 2.0);
        // unknown word takes the unk rank (frequency 0, so last)
        assert_eq!(baseline_score(BaselineKind::FreqSum, &v, &toks("zzz")).unwrap(), 4.0);
        assert!(baseline_score(BaselineKind::Length, &v, &toks("")).is_err());
    }

    fn labeled(scores: &[(f64, f64)]) -> Vec<LabeledSentence> {
        // the score is smuggled in as the single token
        scores.iter().map(|&(s, l)| LabeledSentence::new(&[s.to_string()], l)).collect()
    }

    fn parse_score(t: &[String]) -> Result<f64> {
        Ok(t[0].parse().unwrap())
    }

    #[test]
    fn news_separable_and_constant() {
        let train = labeled(&[(0.1, 0.0), (0.2, 0.0), (0.8, 1.0), (0.9, 1.0)]);
        let test = labeled(&[(0.15, 0.0), (0.85, 1.0), (0.7, 1.0)]);
        let r = eval_news(&parse_score, &train, &test).unwrap();
        assert_eq!(r.metric("accuracy"), Some(1.0));
        assert_eq!(r.metric("f1"), Some(1.0));
        assert_eq!(r.threshold, Some(0.5));

        let constant = |_: &[String]| Ok(3.0);
        let r = eval_news(&constant, &train, &test).unwrap();
        // ties pick -inf: everything specific
        assert!((r.metric("accuracy").unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn news_rejects_non_binary() {
        let train = labeled(&[(0.1, 0.5), (0.2, 1.0)]);
        assert!(eval_news(&parse_score, &train, &train).is_err());
    }

    #[test]
    fn correlation_report() {
        let test = labeled(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        let rho = |t: &[LabeledSentence]| eval_correlation(&parse_score, t).unwrap().metric("spearman").unwrap();
        assert!((rho(&test) - 1.0).abs() < 1e-12);
        let test = labeled(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]);
        assert!((rho(&test) + 1.0).abs() < 1e-12);
        assert!(eval_correlation(&parse_score, &test[..2]).is_err());
    }

    fn len_labeled(len: usize, score: f64, label: f64) -> LabeledSentence {
        let mut tokens = vec![score.to_string()];
        tokens.resize(len, "pad".to_owned());
        LabeledSentence { tokens, label }
    }

    #[test]
    fn length_normalized_single_group() {
        let train = vec![len_labeled(3, 0.1, 0.0), len_labeled(3, 0.9, 1.0)];
        let test = vec![len_labeled(2, 0.2, 0.0), len_labeled(2, 0.8, 1.0), len_labeled(5, 0.8, 0.0)];
        let r = length_normalized_eval(&parse_score, &train, &test).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.metric("accuracy"), Some(1.0));
    }

    #[test]
    fn length_normalized_skips_single_class_groups() {
        let train = vec![len_labeled(3, 0.1, 1.0), len_labeled(3, 0.9, 1.0)];
        let test = vec![len_labeled(2, 0.2, 0.0)];
        assert!(matches!(length_normalized_eval(&parse_score, &train, &test), Err(Error::NoUsableGroups)));
    }

    #[test]
    fn length_normalized_constant_gives_majority() {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for k in 2..6 {
            train.push(len_labeled(k, 0.0, 0.0));
            train.push(len_labeled(k, 0.0, 0.0));
            train.push(len_labeled(k, 0.0, 1.0));
            test.push(len_labeled(k - 1, 0.0, 0.0));
            test.push(len_labeled(k - 1, 0.0, 1.0));
            test.push(len_labeled(k - 1, 0.0, 0.0));
        }
        let r = length_normalized_eval(&parse_score, &train, &test).unwrap();
        assert_eq!(r.metric("accuracy"), r.metric("majority"));
    }

    fn triple(label: EntailmentLabel, p: &str, h: &str) -> EntailmentTriple {
        EntailmentTriple { label, premise: toks(p), hypothesis: toks(h) }
    }

    #[test]
    fn entailment_filters_and_counts() {
        let m = wlo(&[("id", 1.0), ("sharp", 0.5), ("x", 1.0)], 2);
        let triples = vec![
            triple(EntailmentLabel::Entailment, "x sharp", "x id"),
            triple(EntailmentLabel::Entailment, "x sharp id", "x"),
            triple(EntailmentLabel::Neutral, "x id", "id x"),
        ];
        let r = eval_entailment(&m, &triples).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.metric("entailment_n"), Some(1.0));
        assert_eq!(r.metric("entailment_pct"), Some(100.0));
        // permutation: equal entropy fails the strict comparison
        assert_eq!(r.metric("neutral_pct"), Some(0.0));
        assert_eq!(r.metric("contradiction_n"), Some(0.0));
        assert_eq!(r.metric("contradiction_pct"), None);
    }

    #[test]
    fn entailment_invariant_to_monotone_transform() {
        let m = wlo(&[("a", 0.7), ("b", 1.3), ("c", 0.9), ("d", 1.1)], 2);
        let triples: Vec<_> = ["a b", "c d", "b c", "a d"]
            .iter()
            .zip(["b b", "a a", "d d", "c c"])
            .map(|(p, h)| triple(EntailmentLabel::Neutral, p, h))
            .collect();
        let base = eval_entailment(&m, &triples).unwrap();
        let f = |t: &[String]| Ok((specificity_score(&m, t)? * 0.3).exp());
        assert_eq!(base.metrics, eval_entailment(&f, &triples).unwrap().metrics);
    }

    #[test]
    fn sts_cases() {
        let v = Vocabulary::from_tokens(vec![UNK.into(), "a".into(), "b".into(), "c".into()]).unwrap();
        let m = Model::from_embeddings(
            ModelKind::WordSum,
            v,
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let item = |g: f64, a: &str, b: &str| StsItem { gold: g, s1: toks(a), s2: toks(b) };
        let same = vec![item(1.0, "a", "a"), item(2.0, "b", "b"), item(3.0, "c", "c")];
        assert!(matches!(eval_sts(&m, &same), Err(Error::ConstantPredictions)));
        // cosines 0, 1/sqrt2, 1 against gold proportional to them
        let r = 0.5f64.sqrt();
        let items = vec![item(0.0, "a", "b"), item(5.0 * r, "a", "c"), item(5.0, "a", "a")];
        assert!((eval_sts(&m, &items).unwrap().metric("pearson").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wlo_identical_distributions_have_unit_cosine() {
        let m = wlo(&[("a", 0.7), ("b", 0.7)], 2);
        assert!((sts_similarity(&m, &toks("a b"), &toks("b a")).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_serialization() {
        let mut r = EvalReport::new("news", 3).with("accuracy", 0.5);
        r.threshold = Some(f64::INFINITY);
        let j: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(j["threshold"], "inf");
        assert_eq!(j["metrics"]["accuracy"], 0.5);
        let tsv = r.to_tsv();
        assert!(tsv.contains("accuracy \t0.5"));
        assert!(tsv.lines().all(|l| l.split('\t').count() == 2));
    }
}
