//! Text normalization and tokenization.
//!
//! Text is lowercased, decomposed canonically (NFD) with combining marks
//! dropped, and every character that is neither a letter nor a digit becomes
//! a token boundary.

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// An ordered sequence of normalized tokens.
///
/// Tokens are non-empty, lowercase, accent-free and made only of letters and
/// digits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Wraps already-normalized tokens. Empty strings are dropped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenSeq(tokens.into_iter().map(Into::into).filter(|t: &String| !t.is_empty()).collect())
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Keeps tokens for which `keep` holds, preserving order.
    pub fn retain(mut self, keep: impl FnMut(&String) -> bool) -> Self {
        self.0.retain(keep);
        self
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl FromIterator<String> for TokenSeq {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        TokenSeq::from_tokens(iter)
    }
}

/// Lowercases, strips accents and punctuation, and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut pending_space = false;
    for ch in lowered.nfd().filter(|c| !is_combining_mark(*c)) {
        // some decompositions expose an uppercase base letter
        for ch in ch.to_lowercase() {
            // uppercase letters without a lowercase form act as separators
            if ch.is_alphanumeric() && !ch.is_uppercase() {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(ch);
            } else {
                pending_space = true;
            }
        }
    }
    out
}

/// Splits normalized text on spaces.
pub fn tokenize(text: &str) -> TokenSeq {
    text.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// `tokenize(normalize(text))`.
pub fn normalize_tokens(text: &str) -> TokenSeq {
    tokenize(&normalize(text))
}

/// Removes every digit from every token, dropping tokens left empty.
pub fn strip_digits(tokens: TokenSeq) -> TokenSeq {
    tokens.into_inner().into_iter().map(|t| t.chars().filter(|c| !c.is_numeric()).collect::<String>()).collect()
}
