//! Specificity protocols on synthetic labeled sentences: thresholded
//! accuracy, rank correlation and the length-normalized variant, for a
//! trained model and for the length and word-frequency baselines.

use probsent::eval::{self, BaselineKind, BaselineScorer, Scorer};
use probsent::synth::{self, SynthConfig, SynthCorpus};
use probsent::train::{self, corpus_vocab};
use probsent::ModelKind;

fn main() -> probsent::Result<()> {
    let corpus = SynthCorpus::generate(SynthConfig::default())?;
    let (model, _) = train::train(&corpus.pairs, &synth::train_config(), ModelKind::Wlo)?;
    let counts = corpus_vocab(&corpus.pairs, 1)?;
    let train_set = corpus.labeled_set(1000, 1);
    let test_set = corpus.labeled_set(1000, 2);

    let length = BaselineScorer::new(BaselineKind::Length, &counts);
    let freq_sum = BaselineScorer::new(BaselineKind::FreqSum, &counts);
    let freq_avg = BaselineScorer::new(BaselineKind::FreqAvg, &counts);
    let scorers: [(&str, &dyn Scorer); 4] =
        [("wlo", &model), ("length", &length), ("freq_sum", &freq_sum), ("freq_avg", &freq_avg)];

    println!("{:<10} {:>8} {:>8} {:>8} {:>12}", "scorer", "acc", "f1", "spearman", "len-norm acc");
    for (name, s) in scorers {
        let news = eval::eval_news(s, &train_set, &test_set)?;
        let corr = eval::eval_correlation(s, &test_set)?;
        let norm = eval::length_normalized_eval(s, &train_set, &test_set)?;
        println!(
            "{name:<10} {:>8.3} {:>8.3} {:>8.3} {:>12.3}",
            news.metric("accuracy").unwrap(),
            news.metric("f1").unwrap(),
            corr.metric("spearman").unwrap(),
            norm.metric("accuracy").unwrap(),
        );
    }
    println!("{}", eval::eval_news(&model, &train_set, &test_set)?.to_json());
    Ok(())
}
