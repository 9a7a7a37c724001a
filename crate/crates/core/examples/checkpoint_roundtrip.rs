//! Save a trained model as a text checkpoint, load it back and confirm the
//! parameters match bit for bit.

use probsent::checkpoint::{checkpoint_string, load_checkpoint, read_checkpoint, save_checkpoint};
use probsent::train::ParaphrasePair;
use probsent::{tokenize, train, ModelKind, TrainConfig};

fn main() -> probsent::Result<()> {
    let pairs: Vec<ParaphrasePair> = [
        ("a man is playing a guitar", "a person plays the guitar"),
        ("the cat sat on the mat", "a cat is sitting on a rug"),
        ("two dogs run in a field", "a pair of dogs running on grass"),
        ("she is cooking dinner", "a woman prepares a meal"),
    ]
    .iter()
    .map(|(a, b)| ParaphrasePair::new(&tokenize(a), &tokenize(b)))
    .collect();
    let config = TrainConfig { dim: 4, batch_size: 2, megabatch_size: 2, epochs: 3, ..TrainConfig::for_kind(ModelKind::Wlo) };
    let (model, _) = train(&pairs, &config, ModelKind::Wlo)?;

    let text = checkpoint_string(&model);
    println!("{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));

    let dir = std::env::temp_dir().join(format!("probsent-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| probsent::Error::InvalidConfig(e.to_string()))?;
    let path = dir.join("model.ckpt");
    save_checkpoint(&model, &path)?;
    let loaded = load_checkpoint(&path)?;
    assert_eq!(loaded.params().as_slice(), model.params().as_slice());
    assert_eq!(checkpoint_string(&loaded), text);
    println!("round trip ok: {} rows", loaded.vocab().len());

    let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
    match read_checkpoint(truncated.as_bytes()) {
        Err(e) => println!("truncated file rejected: {e}"),
        Ok(_) => unreachable!("truncated checkpoint parsed"),
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
