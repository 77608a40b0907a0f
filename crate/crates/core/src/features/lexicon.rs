//! Word lists and scored lexicons in a small tab-separated format.
//!
//! ```text
//! # bargain-lexicon v1 kind=categories name=liwc
//! money<TAB>Money<TAB>Reward
//! negotiat*<TAB>Work
//! ```
//!
//! Scored lexicons name their score columns in the header and allow `NA`:
//!
//! ```text
//! # bargain-lexicon v1 kind=scored name=warriner scores=valence,arousal,dominance
//! happy<TAB>8.47<TAB>6.05<TAB>7.21
//! ```
//!
//! A token matches an entry when its lowercase form equals the entry, its
//! stem equals the entry's stem, or (for `*` entries) it starts with the
//! prefix.

use std::collections::HashMap;
use std::path::Path;

use super::tokenize::{stem, Token, TokenKind};
use crate::error::{Error, Result};

pub const HEADER_MAGIC: &str = "# bargain-lexicon v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    Categories,
    Scored,
}

#[derive(Debug, Clone)]
enum Payload {
    Cats(Vec<usize>),
    Scores(Vec<Option<f64>>),
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    name: String,
    kind: LexiconKind,
    /// Category names, or score column names for scored lexicons.
    labels: Vec<String>,
    exact: HashMap<String, Payload>,
    stems: HashMap<String, Payload>,
    prefixes: HashMap<String, Payload>,
}

fn merge(slot: &mut Payload, incoming: &Payload) {
    if let (Payload::Cats(have), Payload::Cats(add)) = (slot, incoming) {
        for c in add {
            if !have.contains(c) {
                have.push(*c);
            }
        }
    }
}

impl Lexicon {
    fn empty(name: &str, kind: LexiconKind, labels: Vec<String>) -> Self {
        Lexicon {
            name: name.to_string(),
            kind,
            labels,
            exact: HashMap::new(),
            stems: HashMap::new(),
            prefixes: HashMap::new(),
        }
    }

    fn insert(&mut self, term: &str, payload: Payload) {
        let term = term.to_lowercase();
        if let Some(prefix) = term.strip_suffix('*') {
            self.prefixes
                .entry(prefix.to_string())
                .and_modify(|p| merge(p, &payload))
                .or_insert(payload);
            return;
        }
        self.stems
            .entry(stem(&term))
            .and_modify(|p| merge(p, &payload))
            .or_insert_with(|| payload.clone());
        self.exact.entry(term).and_modify(|p| merge(p, &payload)).or_insert(payload);
    }

    /// Build a category lexicon from `(term, categories)` pairs.
    pub fn from_categories<'a>(name: &str, entries: impl IntoIterator<Item = (&'a str, &'a [&'a str])>) -> Self {
        let mut lex = Lexicon::empty(name, LexiconKind::Categories, Vec::new());
        for (term, cats) in entries {
            let idx = cats.iter().map(|c| lex.label_index_or_insert(c)).collect();
            lex.insert(term, Payload::Cats(idx));
        }
        lex
    }

    /// Build a scored lexicon from `(term, scores)` rows.
    pub fn from_scores<'a>(
        name: &str,
        score_names: &[&str],
        entries: impl IntoIterator<Item = (&'a str, Vec<Option<f64>>)>,
    ) -> Self {
        let labels = score_names.iter().map(|s| s.to_string()).collect();
        let mut lex = Lexicon::empty(name, LexiconKind::Scored, labels);
        for (term, scores) in entries {
            lex.insert(term, Payload::Scores(scores));
        }
        lex
    }

    fn label_index_or_insert(&mut self, label: &str) -> usize {
        match self.labels.iter().position(|l| l == label) {
            Some(i) => i,
            None => {
                self.labels.push(label.to_string());
                self.labels.len() - 1
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty lexicon".into()))?;
        let rest = header
            .strip_prefix(HEADER_MAGIC)
            .ok_or_else(|| Error::Format(format!("bad lexicon header `{header}`")))?;
        let mut kind = None;
        let mut name = None;
        let mut scores = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("kind", "categories")) => kind = Some(LexiconKind::Categories),
                Some(("kind", "scored")) => kind = Some(LexiconKind::Scored),
                Some(("name", n)) => name = Some(n.to_string()),
                Some(("scores", s)) => scores = Some(s.split(',').map(str::to_string).collect::<Vec<_>>()),
                _ => return Err(Error::Format(format!("unknown lexicon header field `{field}`"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Format("lexicon header lacks kind=".into()))?;
        let name = name.ok_or_else(|| Error::Format("lexicon header lacks name=".into()))?;
        let labels = match kind {
            LexiconKind::Scored => {
                scores.ok_or_else(|| Error::Format("scored lexicon lacks scores=".into()))?
            }
            LexiconKind::Categories => Vec::new(),
        };
        let width = labels.len();
        let mut lex = Lexicon::empty(&name, kind, labels);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let term = cols.next().unwrap_or_default().trim();
            if term.is_empty() {
                continue;
            }
            let payload = match kind {
                LexiconKind::Categories => {
                    let idx = cols
                        .filter(|c| !c.is_empty())
                        .map(|c| lex.label_index_or_insert(c.trim()))
                        .collect();
                    Payload::Cats(idx)
                }
                LexiconKind::Scored => {
                    let vals = cols
                        .map(|c| match c.trim() {
                            "NA" | "" => Ok(None),
                            v => v.parse::<f64>().map(Some),
                        })
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Format(format!("{name} line {}: {e}", lineno + 2)))?;
                    if vals.len() != width {
                        return Err(Error::Format(format!(
                            "{name} line {}: expected {width} scores, found {}",
                            lineno + 2,
                            vals.len()
                        )));
                    }
                    Payload::Scores(vals)
                }
            };
            lex.insert(term, payload);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(e).with_context(format!("reading lexicon {}", path.display())))?;
        Lexicon::parse(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> LexiconKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lookup(&self, token: &Token) -> Vec<&Payload> {
        if token.kind == TokenKind::Punct {
            return Vec::new();
        }
        let mut hits = Vec::new();
        if let Some(p) = self.exact.get(&token.lower) {
            hits.push(p);
        }
        if let Some(p) = self.stems.get(&token.stem) {
            hits.push(p);
        }
        if !self.prefixes.is_empty() {
            for (end, _) in token.lower.char_indices().skip(1).chain([(token.lower.len(), ' ')]) {
                if let Some(p) = self.prefixes.get(&token.lower[..end]) {
                    hits.push(p);
                }
            }
        }
        hits
    }

    /// Distinct category indices a token belongs to.
    pub fn categories_of(&self, token: &Token) -> Vec<usize> {
        let mut out = Vec::new();
        for p in self.lookup(token) {
            if let Payload::Cats(cs) = p {
                for c in cs {
                    if !out.contains(c) {
                        out.push(*c);
                    }
                }
            }
        }
        out
    }

    /// Per-category match counts over a token sequence; each token counts at
    /// most once per category.
    pub fn count(&self, tokens: &[Token]) -> Vec<f64> {
        let mut counts = vec![0.0; self.labels.len()];
        for t in tokens {
            for c in self.categories_of(t) {
                counts[c] += 1.0;
            }
        }
        counts
    }

    /// Scores for a token, preferring exact matches over stem and prefix matches.
    pub fn scores_of(&self, token: &Token) -> Option<&[Option<f64>]> {
        self.lookup(token).into_iter().find_map(|p| match p {
            Payload::Scores(s) => Some(s.as_slice()),
            Payload::Cats(_) => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::tokenize::tokenize;

    #[test]
    fn parses_categories_with_wildcards() {
        let text = "# bargain-lexicon v1 kind=categories name=t\nmoney\tMoney\tReward\nnegotiat*\tWork\n\n";
        let lex = Lexicon::parse(text).unwrap();
        assert_eq!(lex.labels(), ["Money", "Reward", "Work"]);
        let counts = lex.count(&tokenize("Money money negotiation talk"));
        assert_eq!(counts, vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn stem_union_matches() {
        let lex = Lexicon::from_categories("t", [("negotiate", &["Work"][..])]);
        for text in ["negotiating", "negotiated", "negotiate"] {
            assert_eq!(lex.count(&tokenize(text)), vec![1.0], "{text}");
        }
    }

    #[test]
    fn token_counts_once_per_category() {
        // "deals" matches exactly and through the stem of "deal"
        let lex = Lexicon::from_categories("t", [("deal", &["Agreement"][..]), ("deals", &["Agreement"][..])]);
        assert_eq!(lex.count(&tokenize("deals")), vec![1.0]);
    }

    #[test]
    fn parses_scores() {
        let text = "# bargain-lexicon v1 kind=scored name=w scores=valence,arousal\nhappy\t8.5\tNA\n";
        let lex = Lexicon::parse(text).unwrap();
        let t = &tokenize("happy")[0];
        assert_eq!(lex.scores_of(t).unwrap(), &[Some(8.5), None]);
        assert!(Lexicon::parse("# bargain-lexicon v1 kind=scored name=w scores=a\nx\t1\t2\n").is_err());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(Lexicon::parse("term\tcat\n").is_err());
        assert!(Lexicon::parse("# bargain-lexicon v1 name=x\n").is_err());
        assert!(Lexicon::parse("# bargain-lexicon v1 kind=categories name=x flavor=y\n").is_err());
    }
}
