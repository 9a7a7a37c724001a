//! Train WLO on the synthetic marker/filler corpus and watch markers become
//! precise while fillers stay close to the identity operator.

use probsent::analyze::word_profiles;
use probsent::synth::{self, SynthConfig, SynthCorpus};
use probsent::train::{self, mean_word_kl};
use probsent::ModelKind;

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn main() -> probsent::Result<()> {
    let corpus = SynthCorpus::generate(SynthConfig::default())?;
    println!("{} pairs, e.g. {:?} / {:?}", corpus.pairs.len(), corpus.pairs[0].s1, corpus.pairs[0].s2);

    let config = synth::train_config();
    let (model, log) = train::train(&corpus.pairs, &config, ModelKind::Wlo)?;
    for r in &log.epochs {
        println!("epoch {:>2}  loss {:.4}  mean word kl {:.4}", r.epoch, r.mean_loss, r.mean_kl.unwrap_or(f64::NAN));
    }

    let profiles = word_profiles(&model)?;
    let markers = mean(profiles.iter().filter(|p| corpus.is_marker(&p.token)).map(|p| p.delta_entropy));
    let fillers = mean(profiles.iter().filter(|p| corpus.fillers.contains(&p.token)).map(|p| p.delta_entropy));
    println!("mean delta entropy: markers {markers:.4}, fillers {fillers:.4}");
    println!("final mean word kl {:.4}", mean_word_kl(&model)?);
    Ok(())
}
