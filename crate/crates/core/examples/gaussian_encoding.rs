//! Encode sentences as Gaussians with a hand-built operator vocabulary and
//! compare entropy, KL to the prior, and the expected log inner product.

use probsent::gauss;
use probsent::vocab::UNK;
use probsent::{Model, Vocabulary, WloOperator};

fn main() -> probsent::Result<()> {
    let vocab = Vocabulary::from_tokens(["<unk>", "the", "cat", "siamese"].map(String::from).to_vec())?;
    assert_eq!(vocab.token(0), UNK);
    let ops = vec![
        WloOperator::identity(2),
        WloOperator { scale: vec![1.0, 1.0], translate: vec![0.1, 0.0] },
        WloOperator { scale: vec![0.8, 0.9], translate: vec![1.0, -0.5] },
        // narrow scale: a word that pins the meaning down
        WloOperator { scale: vec![0.3, 0.4], translate: vec![1.2, -0.8] },
    ];
    let model = Model::from_operators(vocab, ops)?;

    let sentences = [vec!["the", "cat"], vec!["the", "siamese", "cat"], vec!["cat", "the"]];
    let encoded: Vec<_> = sentences.iter().map(|s| model.encode_wlo(s)).collect::<Result<_, _>>()?;
    for (s, g) in sentences.iter().zip(&encoded) {
        println!(
            "{:<20} mean={:?} var={:?} entropy={:.4} kl={:.4}",
            s.join(" "),
            g.mean.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            g.var.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            g.entropy(),
            g.kl_to_standard(),
        );
    }
    // variance ignores word order, the mean does not
    assert_eq!(encoded[0].var, encoded[2].var);

    println!("unit entropy (k=1): {:.6}", gauss::unit_entropy());
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        println!(
            "elip({}, {}) = {:.4}",
            sentences[i].join(" "),
            sentences[j].join(" "),
            gauss::expected_log_inner_product(&encoded[i], &encoded[j])
        );
    }
    Ok(())
}
