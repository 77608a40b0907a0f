//! Standard readability formulas. Empty text scores 0 everywhere.

use std::collections::HashSet;
use std::sync::OnceLock;

const EASY_WORDS: &str = include_str!("../../resources/easy_words.txt");

/// The bundled Dale-Chall familiar-word list.
pub fn bundled_easy_words() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        EASY_WORDS
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub const SCORE_NAMES: [&str; 9] = [
    "flesch-reading-ease",
    "smog-index",
    "flesch-kincaid-grade",
    "coleman-liau-index",
    "automated-readability-index",
    "dale-chall-readability-score",
    "is-difficult",
    "linsear-write-formula",
    "gunning-fog",
];

/// Vowel groups, minus a silent final `e`; at least one for any word.
pub fn syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if w.is_empty() {
        return if word.chars().any(|c| c.is_ascii_digit()) { 1 } else { 0 };
    }
    let vowel = |c: char| "aeiouy".contains(c);
    let mut count = 0;
    let mut prev = false;
    for &c in &w {
        let v = vowel(c);
        if v && !prev {
            count += 1;
        }
        prev = v;
    }
    let n = w.len();
    if count > 1 && w[n - 1] == 'e' && !(n >= 3 && w[n - 2] == 'l' && !vowel(w[n - 3])) {
        count -= 1;
    }
    count.max(1)
}

fn words_of(sentence: &str) -> Vec<&str> {
    sentence
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .collect()
}

/// Split on runs of `.`, `!`, `?` and on line breaks.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if matches!(c, b'.' | b'!' | b'?' | b'\n') {
            let mut j = i + 1;
            while j < bytes.len() && matches!(bytes[j], b'.' | b'!' | b'?') {
                j += 1;
            }
            // a dot inside a number is not a boundary
            let in_number = c == b'.'
                && i > 0
                && bytes[i - 1].is_ascii_digit()
                && bytes.get(i + 1).is_some_and(u8::is_ascii_digit);
            if !in_number {
                let s = text[start..i].trim();
                if !s.is_empty() {
                    out.push(s);
                }
                start = j;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    let s = text[start..].trim();
    if !s.is_empty() {
        out.push(s);
    }
    out
}

/// Sentence count ignoring fragments of two words or fewer, at least one
/// for nonempty text.
pub fn sentence_count(text: &str) -> usize {
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return 0;
    }
    let real = sentences.iter().filter(|s| words_of(s).len() > 2).count();
    real.max(1)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TextStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    /// Letters and digits.
    pub characters: usize,
    /// Words of three or more syllables.
    pub polysyllables: usize,
    /// Words of two or more syllables outside the familiar-word list.
    pub difficult: usize,
}

impl TextStats {
    pub fn compute(text: &str, easy: &HashSet<String>) -> Self {
        let words = words_of(text);
        let mut s = TextStats {
            words: words.len(),
            sentences: sentence_count(text),
            ..TextStats::default()
        };
        for w in &words {
            let syl = syllables(w);
            s.syllables += syl;
            s.characters += w.chars().filter(|c| c.is_alphanumeric()).count();
            if syl >= 3 {
                s.polysyllables += 1;
            }
            let lower = w.to_lowercase();
            if syl >= 2 && !easy.contains(&lower) && !lower.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
                s.difficult += 1;
            }
        }
        s
    }
}

/// Scores in [`SCORE_NAMES`] order.
pub fn scores(text: &str, easy: &HashSet<String>) -> [f64; 9] {
    let st = TextStats::compute(text, easy);
    if st.words == 0 || st.sentences == 0 {
        return [0.0; 9];
    }
    let words = st.words as f64;
    let sentences = st.sentences as f64;
    let wps = words / sentences;
    let spw = st.syllables as f64 / words;

    let flesch = 206.835 - 1.015 * wps - 84.6 * spw;
    let smog = 1.043 * (30.0 * st.polysyllables as f64 / sentences).sqrt() + 3.1291;
    let fk = 0.39 * wps + 11.8 * spw - 15.59;
    let letters_per_100 = st.characters as f64 / words * 100.0;
    let sentences_per_100 = sentences / words * 100.0;
    let coleman = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
    let ari = 4.71 * (st.characters as f64 / words) + 0.5 * wps - 21.43;
    let pct_difficult = st.difficult as f64 / words * 100.0;
    let mut dale = 0.1579 * pct_difficult + 0.0496 * wps;
    if pct_difficult > 5.0 {
        dale += 3.6365;
    }
    let fog = 0.4 * (wps + 100.0 * st.polysyllables as f64 / words);
    [
        flesch,
        smog,
        fk,
        coleman,
        ari,
        dale,
        st.difficult as f64,
        linsear_write(text),
        fog,
    ]
}

/// Linsear Write over the first hundred words: one point per word under
/// three syllables, three per longer word, divided by sentences.
pub fn linsear_write(text: &str) -> f64 {
    let mut points = 0usize;
    let mut taken = 0usize;
    let mut sentences = 0usize;
    for piece in split_sentences(text) {
        if taken >= 100 {
            break;
        }
        let ws = words_of(piece);
        if ws.is_empty() {
            continue;
        }
        sentences += 1;
        for w in ws.iter().take(100 - taken) {
            points += if syllables(w) < 3 { 1 } else { 3 };
            taken += 1;
        }
    }
    if taken == 0 {
        return 0.0;
    }
    let mut r = points as f64 / sentences as f64;
    if r <= 20.0 {
        r -= 2.0;
    }
    r / 2.0
}
