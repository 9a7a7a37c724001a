//! Does the hypothesis come out more general than its premise? A premise
//! gains one marker word, the hypothesis a padding token with the identity
//! operator. A coin-flip scorer sits near 50%.

use probsent::eval::{eval_entailment, EntailmentLabel};
use probsent::synth::{SynthConfig, SynthCorpus, PAD};
use probsent::{Model, Vocabulary, WloOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> probsent::Result<()> {
    let corpus = SynthCorpus::generate(SynthConfig::default())?;
    let triples = corpus.entailment_triples(300, 0);

    let mut tokens = vec!["<unk>".to_owned(), PAD.to_owned()];
    tokens.extend(corpus.markers.iter().cloned());
    tokens.extend(corpus.fillers.iter().cloned());
    let k = 4;
    let ops = tokens
        .iter()
        .map(|t| match t {
            t if corpus.is_marker(t) => WloOperator { scale: vec![0.5; k], translate: vec![0.3; k] },
            t if t.starts_with('f') => WloOperator { scale: vec![0.9; k], translate: vec![-0.1; k] },
            _ => WloOperator::identity(k),
        })
        .collect();
    let model = Model::from_operators(Vocabulary::from_tokens(tokens)?, ops)?;
    let report = eval_entailment(&model, &triples)?;
    println!("hand-built model:\n{}", report.to_tsv());

    let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(0));
    let random = |_: &[String]| -> probsent::Result<f64> { Ok(rng.borrow_mut().gen()) };
    let report = eval_entailment(&random, &triples)?;
    for label in EntailmentLabel::ALL {
        println!("random scorer {label}: {:.1}%", report.metric(&format!("{label}_pct")).unwrap());
    }
    Ok(())
}
