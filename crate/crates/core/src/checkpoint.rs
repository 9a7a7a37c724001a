//! Line-oriented text checkpoints.
//!
//! ```text
//! PROBSENT v1 kind=wlo dim=2 vocab=3
//! <unk> a_1 a_2 b_1 b_2
//! the a_1 a_2 b_1 b_2
//! cat a_1 a_2 b_1 b_2
//! ```
//!
//! Embedding models store one `dim`-wide row per token instead. Floats are
//! written with Rust's shortest round-trip formatting, so `load(save(m))`
//! reproduces `m` bit for bit. Corpus frequencies are not stored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Model, ModelKind, ParamTable};
use crate::vocab::Vocabulary;

pub const MAGIC: &str = "PROBSENT";
pub const VERSION: &str = "v1";

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Checkpoint { line, msg: msg.into() }
}

pub fn header(model: &Model) -> String {
    format!("{MAGIC} {VERSION} kind={} dim={} vocab={}", model.kind(), model.dim(), model.vocab().len())
}

pub fn write_checkpoint<W: Write>(model: &Model, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", header(model))?;
    let params = model.params();
    for (id, tok) in model.vocab().tokens().iter().enumerate() {
        w.write_all(tok.as_bytes())?;
        for x in params.row(id) {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn checkpoint_string(model: &Model) -> String {
    let mut buf = Vec::new();
    write_checkpoint(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("checkpoint is UTF-8")
}

fn field<'a>(part: Option<&'a str>, key: &str) -> Result<&'a str> {
    part.and_then(|p| p.strip_prefix(key)).and_then(|p| p.strip_prefix('=')).ok_or_else(|| bad(1, format!("missing {key}=")))
}

fn parse_header(line: &str) -> Result<(ModelKind, usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(bad(1, format!("not a {MAGIC} checkpoint")));
    }
    match parts.next() {
        Some(VERSION) => {}
        Some(v) => return Err(bad(1, format!("unsupported version {v}, expected {VERSION}"))),
        None => return Err(bad(1, "missing version")),
    }
    let kind: ModelKind = field(parts.next(), "kind")?.parse().map_err(|e: Error| bad(1, e.to_string()))?;
    let dim: usize = field(parts.next(), "dim")?.parse().map_err(|_| bad(1, "dim is not an integer"))?;
    let vocab: usize = field(parts.next(), "vocab")?.parse().map_err(|_| bad(1, "vocab is not an integer"))?;
    if dim == 0 {
        return Err(bad(1, "dim must be >= 1"));
    }
    if parts.next().is_some() {
        return Err(bad(1, "trailing header fields"));
    }
    Ok((kind, dim, vocab))
}

pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Model> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| bad(1, "empty checkpoint"))?
        .map_err(|e| bad(1, e.to_string()))?;
    let (kind, dim, n) = parse_header(&head)?;
    let width = kind.row_width(dim);
    let mut tokens = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let lineno = i + 2;
        let line = lines
            .next()
            .ok_or_else(|| bad(lineno, format!("truncated: expected {n} vocabulary rows, found {i}")))?
            .map_err(|e| bad(lineno, e.to_string()))?;
        let mut parts = line.split(' ');
        let tok = parts.next().filter(|t| !t.is_empty()).ok_or_else(|| bad(lineno, "missing token"))?;
        let row = parts
            .map(|p| p.parse::<f64>().map_err(|_| bad(lineno, format!("bad number {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(bad(lineno, format!("expected {width} values for dim={dim}, found {}", row.len())));
        }
        tokens.push(tok.to_owned());
        rows.push(row);
    }
    for (i, rest) in lines.enumerate() {
        let rest = rest.map_err(|e| bad(n + 2 + i, e.to_string()))?;
        if !rest.trim().is_empty() {
            return Err(bad(n + 2 + i, "unexpected content after the last vocabulary row"));
        }
    }
    let vocab = Vocabulary::from_tokens(tokens).map_err(|e| bad(2, e.to_string()))?;
    Model::new(kind, dim, vocab, ParamTable::from_rows(rows, width)?)
}

pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_checkpoint(model, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(f))
}
