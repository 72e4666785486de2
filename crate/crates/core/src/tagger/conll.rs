//! CoNLL-like tagged text.
//!
//! One token per line, tab separated. Three-column lines are
//! `index surface tag`; lines with four or more columns are read as CoNLL-U
//! (`ID FORM LEMMA UPOS ...`), skipping multiword and empty-node rows. Blank
//! lines end a sentence. A `# text = ...` comment attaches the raw text to
//! the following sentence; other comments are ignored.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tags::PosTag;
use crate::text::{TaggedSentence, TaggedToken, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedDocument {
    /// Raw text from a `# text = ` comment, if any.
    pub text: Option<String>,
    pub sentence: TaggedSentence,
}

pub fn read_tagged(r: impl Read, origin: &str) -> Result<Vec<TaggedDocument>> {
    let mut docs = Vec::new();
    let mut text: Option<String> = None;
    let mut tokens: Vec<TaggedToken> = Vec::new();

    let mut flush = |text: &mut Option<String>, tokens: &mut Vec<TaggedToken>| {
        if !tokens.is_empty() {
            docs.push(TaggedDocument {
                text: text.take(),
                sentence: TaggedSentence::new(std::mem::take(tokens)),
            });
        }
    };

    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut text, &mut tokens);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(raw) = comment.trim_start().strip_prefix("text =") {
                text = Some(raw.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (id, surface, label) = match fields.len() {
            3 => (fields[0], fields[1], fields[2]),
            n if n >= 4 => (fields[0], fields[1], fields[3]),
            n => {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected 3 tab-separated columns, found {n}"),
                ))
            }
        };
        if fields.len() >= 4 && (id.contains('-') || id.contains('.')) {
            continue;
        }
        if id.trim().parse::<usize>().is_err() {
            return Err(Error::parse(origin, lineno, format!("bad token index `{id}`")));
        }
        let surface = surface.trim();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::parse(
                origin,
                lineno,
                "token surface is empty or contains whitespace",
            ));
        }
        tokens.push(TaggedToken {
            token: Token::new(surface),
            tag: PosTag::from_label(label),
        });
    }
    flush(&mut text, &mut tokens);
    Ok(docs)
}

pub fn load_tagged_documents(path: &Path) -> Result<Vec<TaggedDocument>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tagged(file, &path.display().to_string())
}

pub fn load_tagged(path: &Path) -> Result<Vec<TaggedSentence>> {
    Ok(load_tagged_documents(path)?.into_iter().map(|d| d.sentence).collect())
}

/// Writes documents in the three-column form accepted by [`read_tagged`].
pub fn write_tagged(mut w: impl Write, docs: &[TaggedDocument]) -> std::io::Result<()> {
    for doc in docs {
        if let Some(text) = &doc.text {
            writeln!(w, "# text = {}", text.replace('\n', " "))?;
        }
        for (i, t) in doc.sentence.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}", i + 1, t.token.surface(), t.tag)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
