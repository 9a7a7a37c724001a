//! Which words make a sentence more specific? Rank words within the small
//! and large translation-norm halves, then list the most specific and most
//! general sentences of one length.

use probsent::analyze::{extreme_sentences, rank_words, Criterion};
use probsent::synth::{self, SynthConfig, SynthCorpus};
use probsent::train::{self, corpus_vocab};
use probsent::ModelKind;

fn main() -> probsent::Result<()> {
    let corpus = SynthCorpus::generate(SynthConfig::default())?;
    let (mut model, _) = train::train(&corpus.pairs, &synth::train_config(), ModelKind::Wlo)?;
    model.attach_frequencies(&corpus_vocab(&corpus.pairs, 1)?);

    for criterion in Criterion::ALL {
        let words = rank_words(&model, criterion, 6)?;
        let shown: Vec<String> = words.iter().map(|w| format!("{}({:+.2})", w.token, w.delta_entropy)).collect();
        println!("{criterion:<26} {}", shown.join(" "));
    }

    let sentences: Vec<Vec<String>> = corpus.pairs.iter().map(|p| p.s1.clone()).collect();
    let (specific, general) = extreme_sentences(&model, &sentences, 6, 3)?;
    for (name, list) in [("specific", specific), ("general", general)] {
        for s in list {
            println!("{name:<9} entropy {:>8.3}  {}", s.score, s.tokens.join(" "));
        }
    }
    Ok(())
}
