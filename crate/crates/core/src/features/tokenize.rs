//! Lowercasing tokenizer with punctuation tokens and Porter-family stems.

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Original casing, used for capitalization counts and tagging.
    pub surface: String,
    pub lower: String,
    /// Stem of `lower`; equals `lower` for numbers and punctuation.
    pub stem: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn is_wordlike(&self) -> bool {
        self.kind != TokenKind::Punct
    }
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

pub fn stem(word: &str) -> String {
    stemmer().stem(word).into_owned()
}

/// Split text into word, number and single-character punctuation tokens.
///
/// Apostrophes between letters stay inside a word (`don't`); `.` and `,`
/// between digits stay inside a number (`1,200.50`).
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                if c.is_alphanumeric() {
                    i += 1;
                    continue;
                }
                let next = chars.get(i + 1).copied();
                let prev = chars[i - 1];
                let joins = match c {
                    '\'' | '\u{2019}' => prev.is_alphabetic() && next.is_some_and(char::is_alphabetic),
                    '.' | ',' => prev.is_ascii_digit() && next.is_some_and(|n| n.is_ascii_digit()),
                    _ => false,
                };
                if joins {
                    i += 1;
                } else {
                    break;
                }
            }
            let surface: String = chars[start..i]
                .iter()
                .map(|&c| if c == '\u{2019}' { '\'' } else { c })
                .collect();
            let lower = surface.to_lowercase();
            let numeric = surface.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',');
            let (kind, stem) = if numeric {
                (TokenKind::Number, lower.clone())
            } else {
                (TokenKind::Word, stem(&lower))
            };
            tokens.push(Token {
                surface,
                lower,
                stem,
                kind,
            });
        } else {
            let s = c.to_string();
            tokens.push(Token {
                surface: s.clone(),
                lower: s.clone(),
                stem: s,
                kind: TokenKind::Punct,
            });
            i += 1;
        }
    }
    tokens
}
