//! Tab-separated dataset files.
//!
//! | file        | row format                          |
//! |-------------|-------------------------------------|
//! | pairs       | `sentence1 \t sentence2`            |
//! | labeled     | `label \t sentence`                 |
//! | entailment  | `label \t premise \t hypothesis`    |
//! | sts         | `score \t sentence1 \t sentence2`   |
//!
//! Sentences are tokenized with [`tokenize`]. Blank lines are skipped;
//! malformed rows and empty sentences fail with their line number.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{EntailmentTriple, LabeledSentence, StsItem};
use crate::train::ParaphrasePair;
use crate::vocab::tokenize;

struct Rows {
    path: PathBuf,
}

impl Rows {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, msg: msg.into() }
    }

    fn fields<'a>(&self, line: usize, text: &'a str, n: usize) -> Result<Vec<&'a str>> {
        let f: Vec<&str> = text.split('\t').collect();
        if f.len() != n {
            return Err(self.err(line, format!("expected {n} tab-separated fields, found {}", f.len())));
        }
        Ok(f)
    }

    fn sentence(&self, line: usize, text: &str) -> Result<Vec<String>> {
        let t = tokenize(text);
        if t.is_empty() {
            return Err(self.err(line, "empty sentence"));
        }
        Ok(t)
    }

    fn number(&self, line: usize, text: &str) -> Result<f64> {
        text.trim().parse().map_err(|_| self.err(line, format!("not a number: {text:?}")))
    }
}

fn read_rows<R, T, F>(reader: R, path: &Path, mut parse: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(&Rows, usize, &str) -> Result<T>,
{
    let rows = Rows { path: path.to_owned() };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&rows, i + 1, line)?);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn parse_pairs<R: BufRead>(reader: R, path: &Path) -> Result<Vec<ParaphrasePair>> {
    read_rows(reader, path, |r, n, line| {
        let f = r.fields(n, line, 2)?;
        Ok(ParaphrasePair { s1: r.sentence(n, f[0])?, s2: r.sentence(n, f[1])? })
    })
}

pub fn parse_labeled<R: BufRead>(reader: R, path: &Path) -> Result<Vec<LabeledSentence>> {
    read_rows(reader, path, |r, n, line| {
        let f = r.fields(n, line, 2)?;
        Ok(LabeledSentence { label: r.number(n, f[0])?, tokens: r.sentence(n, f[1])? })
    })
}

pub fn parse_entailment<R: BufRead>(reader: R, path: &Path) -> Result<Vec<EntailmentTriple>> {
    read_rows(reader, path, |r, n, line| {
        let f = r.fields(n, line, 3)?;
        let label = f[0].trim().parse().map_err(|e: Error| r.err(n, e.to_string()))?;
        Ok(EntailmentTriple { label, premise: r.sentence(n, f[1])?, hypothesis: r.sentence(n, f[2])? })
    })
}

pub fn parse_sts<R: BufRead>(reader: R, path: &Path) -> Result<Vec<StsItem>> {
    read_rows(reader, path, |r, n, line| {
        let f = r.fields(n, line, 3)?;
        Ok(StsItem { gold: r.number(n, f[0])?, s1: r.sentence(n, f[1])?, s2: r.sentence(n, f[2])? })
    })
}

/// Every tab-separated field of every line as one sentence.
pub fn parse_sentences<R: BufRead>(reader: R, path: &Path) -> Result<Vec<Vec<String>>> {
    let nested = read_rows(reader, path, |r, n, line| {
        line.split('\t').map(|f| r.sentence(n, f)).collect::<Result<Vec<_>>>()
    })?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<ParaphrasePair>> {
    let p = path.as_ref();
    parse_pairs(open(p)?, p)
}

pub fn read_labeled(path: impl AsRef<Path>) -> Result<Vec<LabeledSentence>> {
    let p = path.as_ref();
    parse_labeled(open(p)?, p)
}

pub fn read_entailment(path: impl AsRef<Path>) -> Result<Vec<EntailmentTriple>> {
    let p = path.as_ref();
    parse_entailment(open(p)?, p)
}

pub fn read_sts(path: impl AsRef<Path>) -> Result<Vec<StsItem>> {
    let p = path.as_ref();
    parse_sts(open(p)?, p)
}

pub fn read_sentences(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let p = path.as_ref();
    parse_sentences(open(p)?, p)
}

pub fn write_pairs<W: Write>(mut w: W, pairs: &[ParaphrasePair]) -> std::io::Result<()> {
    for p in pairs {
        writeln!(w, "{}\t{}", p.s1.join(" "), p.s2.join(" "))?;
    }
    Ok(())
}

pub fn write_labeled<W: Write>(mut w: W, items: &[LabeledSentence]) -> std::io::Result<()> {
    for s in items {
        writeln!(w, "{}\t{}", s.label, s.tokens.join(" "))?;
    }
    Ok(())
}

pub fn write_entailment<W: Write>(mut w: W, items: &[EntailmentTriple]) -> std::io::Result<()> {
    for t in items {
        writeln!(w, "{}\t{}\t{}", t.label, t.premise.join(" "), t.hypothesis.join(" "))?;
    }
    Ok(())
}
