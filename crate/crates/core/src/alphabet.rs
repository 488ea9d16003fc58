//! Ordered token alphabets and word parsing.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Index of a symbol inside its alphabet.
pub type Sym = usize;

/// An ordered list of distinct tokens. The order drives every canonical enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, Sym>,
}

impl serde::Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.symbols.serialize(s)
    }
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Alphabet("alphabet is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.contains(char::is_whitespace) || s.contains('|') {
                return Err(Error::Alphabet(format!("bad token `{s}`")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Alphabet(format!("duplicate token `{s}`")));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// Tokens `0`, `1`, ..., `n-1`.
    pub fn numeric(n: usize) -> Self {
        Alphabet::new((0..n).map(|i| i.to_string())).expect("numeric alphabet")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn token(&self, s: Sym) -> &str {
        &self.symbols[s]
    }

    pub fn tokens(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, token: &str) -> Option<Sym> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    fn single_chars(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Renders a word: tokens are concatenated when all are one character wide,
    /// separated by spaces otherwise.
    pub fn format_word(&self, word: &[Sym]) -> String {
        let sep = if self.single_chars() { "" } else { " " };
        word.iter().map(|&s| self.token(s)).collect::<Vec<_>>().join(sep)
    }

    /// Parses a word. Whitespace separates tokens when present; otherwise the
    /// text must split into tokens in exactly one way.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Sym>> {
        self.parse_pattern(text, None)?
            .into_iter()
            .map(|s| s.ok_or_else(|| Error::syntax("word", "wildcard not allowed here")))
            .collect()
    }

    /// Like [`Alphabet::parse_word`] but `wildcard` (when not a token) parses to `None`.
    pub fn parse_pattern(&self, text: &str, wildcard: Option<&str>) -> Result<Vec<Option<Sym>>> {
        let wildcard = wildcard.filter(|w| !self.contains(w));
        let lookup = |tok: &str| -> Option<Option<Sym>> {
            if Some(tok) == wildcard {
                Some(None)
            } else {
                self.index_of(tok).map(Some)
            }
        };
        if text.contains(char::is_whitespace) {
            return text
                .split_whitespace()
                .map(|tok| {
                    lookup(tok).ok_or_else(|| Error::UnknownSymbol {
                        symbol: tok.to_string(),
                        alphabet: self.describe(),
                    })
                })
                .collect();
        }
        let mut candidates: Vec<&str> = self.symbols.iter().map(String::as_str).collect();
        if let Some(w) = wildcard {
            candidates.push(w);
        }
        let n = text.len();
        // ways[i]: number of segmentations of text[i..], capped at 2.
        let mut ways = vec![0u8; n + 1];
        let mut choice: Vec<Option<&str>> = vec![None; n + 1];
        ways[n] = 1;
        for i in (0..n).rev() {
            if !text.is_char_boundary(i) {
                continue;
            }
            for tok in &candidates {
                if text[i..].starts_with(tok) && ways[i + tok.len()] > 0 {
                    ways[i] = (ways[i] + ways[i + tok.len()]).min(2);
                    choice[i] = Some(tok);
                }
            }
        }
        match ways[0] {
            0 => Err(Error::UnknownSymbol { symbol: text.to_string(), alphabet: self.describe() }),
            1 => {
                let mut out = Vec::new();
                let mut i = 0;
                while i < n {
                    let tok = choice[i].expect("segmentation");
                    out.push(lookup(tok).expect("known token"));
                    i += tok.len();
                }
                Ok(out)
            }
            _ => Err(Error::syntax(
                "word",
                format!("`{text}` splits into tokens in more than one way; separate tokens with spaces"),
            )),
        }
    }

    fn describe(&self) -> String {
        format!("{{{}}}", self.symbols.join(","))
    }

    /// Alphabet of tuples over `parts`, enumerated lexicographically (last part fastest).
    pub fn product(parts: &[&Alphabet]) -> Result<Self> {
        let mut words: Vec<Vec<Sym>> = vec![Vec::new()];
        for part in parts {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..part.len()).map(move |s| {
                        let mut w = w.clone();
                        w.push(s);
                        w
                    })
                })
                .collect();
        }
        Alphabet::new(words.iter().map(|w| {
            let toks: Vec<&str> = w.iter().zip(parts).map(|(&s, a)| a.token(s)).collect();
            product_token(&toks)
        }))
    }

    /// Alphabet of blocks of length `m` over `self`.
    pub fn power(&self, m: usize) -> Result<Self> {
        if m == 1 {
            return Ok(self.clone());
        }
        let parts: Vec<&Alphabet> = std::iter::repeat(self).take(m).collect();
        Alphabet::product(&parts)
    }
}

/// Token of a tuple: `(ab)` when every part is one character wide, `(a,b)` otherwise.
/// A one-element tuple is the element itself.
pub fn product_token(parts: &[&str]) -> String {
    if parts.len() == 1 {
        return parts[0].to_string();
    }
    let sep = if parts.iter().all(|p| p.chars().count() == 1) { "" } else { "," };
    format!("({})", parts.join(sep))
}

/// Mixed-radix index of a word whose symbols are all `< base` (first symbol most significant).
pub fn word_index(word: &[Sym], base: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * base + s)
}

/// Inverse of [`word_index`].
pub fn index_word(mut index: usize, base: usize, len: usize) -> Vec<Sym> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// `base^exp` with overflow reported as `None`.
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
