//! Graded similarity: cosine over sentence vectors (embedding models) or
//! over concatenated mean and variance (WLO), scored by Pearson r.

use probsent::eval::{eval_sts, sts_similarity, StsItem};
use probsent::synth::{self, SynthConfig, SynthCorpus};
use probsent::{train, ModelKind};

fn main() -> probsent::Result<()> {
    let corpus = SynthCorpus::generate(SynthConfig::default())?;
    let (model, _) = train(&corpus.pairs, &synth::train_config(), ModelKind::Wlo)?;

    // gold score = fraction of shared markers between two sentences
    let pool = corpus.labeled_set(400, 5);
    let markers = |s: &[String]| -> Vec<String> { s.iter().filter(|t| corpus.is_marker(t)).cloned().collect() };
    let items: Vec<StsItem> = pool
        .chunks(2)
        .map(|c| {
            let (a, b) = (&c[0].tokens, &c[1].tokens);
            let (ma, mb) = (markers(a), markers(b));
            let shared = ma.iter().filter(|m| mb.contains(m)).count() as f64;
            let gold = if ma.is_empty() && mb.is_empty() { 0.0 } else { shared / ma.len().max(mb.len()) as f64 };
            StsItem { gold, s1: a.clone(), s2: b.clone() }
        })
        .chain(corpus.pairs.iter().take(200).map(|p| StsItem { gold: 1.0, s1: p.s1.clone(), s2: p.s2.clone() }))
        .collect();

    let p = &corpus.pairs[0];
    println!("paraphrase cosine: {:.4}", sts_similarity(&model, &p.s1, &p.s2)?);
    println!("unrelated cosine:  {:.4}", sts_similarity(&model, &p.s1, &corpus.pairs[1].s2)?);
    println!("{}", eval_sts(&model, &items)?.to_tsv());
    Ok(())
}
