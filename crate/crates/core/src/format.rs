//! Line-oriented text formats for presentations, keys and ciphertexts.
//!
//! Words are written as space-separated nonzero signed generator indices.
//! `#` starts a comment; blank lines are ignored. Writers emit a canonical
//! form that parses back to the same value and re-serializes byte for byte.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::Ciphertext;
use crate::keygen::{PrivateKey, PublicKey};
use crate::presentations::Presentation;
use crate::tietze::SubstitutionTable;
use crate::words::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input after line {line}: expected {expected}")]
    Truncated { line: usize, expected: String },
    #[error("private key does not belong to this public key")]
    HashMismatch,
}

struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let body = raw.split('#').next().unwrap_or("");
                let toks: Vec<&str> = body.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.items.get(self.pos.wrapping_sub(1)).map_or(0, |x| x.0)
    }

    fn peek(&self) -> Option<&str> {
        self.items.get(self.pos).map(|(_, t)| t[0])
    }

    /// Next line, which must start with `key`. Returns its line number and the remaining tokens.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        match self.items.get(self.pos) {
            None => Err(FormatError::Truncated {
                line: self.last_line(),
                expected: format!("`{key}`"),
            }),
            Some((line, toks)) if toks[0] == key => {
                self.pos += 1;
                Ok((*line, toks[1..].to_vec()))
            }
            Some((line, toks)) => Err(syntax(*line, format!("expected `{key}`, found `{}`", toks[0]))),
        }
    }

    fn expect_header(&mut self, magic: &str) -> Result<(), FormatError> {
        let (line, rest) = self.expect(magic)?;
        if rest != ["1"] {
            return Err(syntax(line, format!("unsupported {magic} version")));
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), FormatError> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some((line, toks)) => Err(syntax(*line, format!("unexpected `{}`", toks[0]))),
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn one_number<T: std::str::FromStr>(line: usize, toks: &[&str], what: &str) -> Result<T, FormatError> {
    match toks {
        [t] => t.parse().map_err(|_| syntax(line, format!("bad {what} `{t}`"))),
        _ => Err(syntax(line, format!("expected a single {what}"))),
    }
}

fn parse_signed(line: usize, toks: &[&str], gens: usize) -> Result<Word, FormatError> {
    let vals = toks
        .iter()
        .map(|t| t.parse::<i32>().map_err(|_| syntax(line, format!("bad letter `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let w = Word::from_signed(&vals).map_err(|e| syntax(line, e.to_string()))?;
    w.check_gens(gens).map_err(|e| syntax(line, e.to_string()))?;
    Ok(w)
}

fn write_word(out: &mut String, key: &str, w: &Word) {
    out.push_str(key);
    for v in w.to_signed() {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

fn write_presentation_block(out: &mut String, p: &Presentation) {
    out.push_str("wpp 1\n");
    let _ = writeln!(out, "generators {}", p.gens());
    for r in p.relators() {
        write_word(out, "rel", r);
    }
}

fn read_presentation_block(lines: &mut Lines) -> Result<Presentation, FormatError> {
    lines.expect_header("wpp")?;
    let (line, rest) = lines.expect("generators")?;
    let gens: usize = one_number(line, &rest, "generator count")?;
    let mut rels = Vec::new();
    let mut first = None;
    while lines.peek() == Some("rel") {
        let (line, rest) = lines.expect("rel")?;
        first.get_or_insert(line);
        let r = parse_signed(line, &rest, gens)?;
        if !r.is_cyclically_reduced() || r.is_empty() {
            return Err(syntax(line, "relator must be non-empty and cyclically reduced"));
        }
        rels.push(r);
    }
    Presentation::new(gens, rels).map_err(|e| syntax(first.unwrap_or(line), e.to_string()))
}

pub fn write_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    write_presentation_block(&mut out, p);
    out
}

pub fn parse_presentation(text: &str) -> Result<Presentation, FormatError> {
    let mut lines = Lines::new(text);
    let p = read_presentation_block(&mut lines)?;
    lines.finish()?;
    Ok(p)
}

pub fn write_public(key: &PublicKey) -> String {
    let mut out = String::from("wpub 1\n");
    write_presentation_block(&mut out, &key.presentation);
    let _ = writeln!(out, "special {}", key.special);
    out
}

fn check_special(line: usize, special: u32, gens: usize) -> Result<u32, FormatError> {
    if special == 0 || special as usize > gens {
        Err(syntax(line, format!("special generator {special} out of range")))
    } else {
        Ok(special)
    }
}

pub fn parse_public(text: &str) -> Result<PublicKey, FormatError> {
    let mut lines = Lines::new(text);
    lines.expect_header("wpub")?;
    let presentation = read_presentation_block(&mut lines)?;
    let (line, rest) = lines.expect("special")?;
    let special = check_special(line, one_number(line, &rest, "generator index")?, presentation.gens())?;
    lines.finish()?;
    Ok(PublicKey { presentation, special })
}

/// SHA-256 of the canonical public key text.
pub fn public_hash(key: &PublicKey) -> [u8; 32] {
    Sha256::digest(write_public(key).as_bytes()).into()
}

pub fn write_private(key: &PrivateKey) -> String {
    let mut out = String::from("wprv 1\n");
    write_presentation_block(&mut out, key.presentation());
    let _ = writeln!(out, "special {}", key.special());
    for (j, e) in key.psi().entries().iter().enumerate() {
        write_word(&mut out, &format!("sub {}", j + 1), e);
    }
    let _ = writeln!(out, "pubhash {}", hex::encode(key.pubhash()));
    out
}

pub fn parse_private(text: &str) -> Result<PrivateKey, FormatError> {
    let mut lines = Lines::new(text);
    lines.expect_header("wprv")?;
    let presentation = read_presentation_block(&mut lines)?;
    let (special_line, rest) = lines.expect("special")?;
    let special: u32 = one_number(special_line, &rest, "generator index")?;
    let mut entries = Vec::new();
    while lines.peek() == Some("sub") {
        let (line, rest) = lines.expect("sub")?;
        let j: usize = rest
            .first()
            .ok_or_else(|| syntax(line, "missing generator index"))?
            .parse()
            .map_err(|_| syntax(line, "bad generator index"))?;
        if j != entries.len() + 1 {
            return Err(syntax(line, format!("expected sub {}, found sub {j}", entries.len() + 1)));
        }
        entries.push(parse_signed(line, &rest[1..], presentation.gens())?);
    }
    check_special(special_line, special, entries.len())?;
    let (line, rest) = lines.expect("pubhash")?;
    let mut pubhash = [0u8; 32];
    match rest.as_slice() {
        [h] => hex::decode_to_slice(h, &mut pubhash).map_err(|_| syntax(line, "bad pubhash"))?,
        _ => return Err(syntax(line, "expected a single pubhash")),
    }
    lines.finish()?;
    PrivateKey::new(presentation, special, SubstitutionTable::from_entries(entries), pubhash)
        .map_err(|e| syntax(1, e.to_string()))
}

pub fn write_ciphertext(ct: &Ciphertext) -> String {
    let mut out = String::from("wct 1\n");
    let _ = writeln!(out, "bits {}", ct.words.len());
    for w in &ct.words {
        write_word(&mut out, "w", w);
    }
    out
}

/// Generator indices are only checked for being nonzero; range checks need a key.
pub fn parse_ciphertext(text: &str) -> Result<Ciphertext, FormatError> {
    let mut lines = Lines::new(text);
    lines.expect_header("wct")?;
    let (line, rest) = lines.expect("bits")?;
    let n: usize = one_number(line, &rest, "bit count")?;
    let mut words = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let (line, rest) = lines.expect("w")?;
        words.push(parse_signed(line, &rest, i32::MAX as usize)?);
    }
    lines.finish()?;
    Ok(Ciphertext { words })
}

/// Plaintext bits: `0`/`1` characters, whitespace ignored.
pub fn parse_bits(text: &str) -> Result<Vec<bool>, FormatError> {
    let mut bits = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(syntax(i + 1, format!("bad bit `{c}`"))),
            }
        }
    }
    Ok(bits)
}

pub fn write_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A word typed on the command line: signed indices, or letters `a`-`t`
/// (`A`-`T` for inverses).
pub fn parse_word(text: &str, gens: usize) -> Result<Word, FormatError> {
    let t = text.trim();
    if t.chars().any(|c| c.is_ascii_digit()) {
        let toks: Vec<&str> = t.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        return parse_signed(1, &toks, gens);
    }
    let w = Word::from_compact(&t.replace(char::is_whitespace, "")).map_err(|e| syntax(1, e.to_string()))?;
    w.check_gens(gens).map_err(|e| syntax(1, e.to_string()))?;
    Ok(w)
}
