//! Language features: syntactic statistics, lexicon counts and readability,
//! computed separately over the buyer's and the seller's visible text.

use std::collections::HashSet;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use super::lexicon::{Lexicon, LexiconKind};
use super::readability;
use super::tagger::{EntityKind, Pos, Tagger};
use super::tokenize::{tokenize, Token, TokenKind};
use super::FeatureVector;
use crate::corpus::{PartialDialogue, Role};
use crate::error::Result;

pub const SYNTACTIC: [&str; 44] = [
    "Number of turns",
    "Number of words",
    "Word-length",
    "I",
    "You",
    "We",
    "They",
    "Is-question",
    "Exclaimation",
    "Dot",
    "Caps",
    "Thank",
    "Number of Sentences",
    "Is-alpha",
    "Is-numeric",
    "Is-high-quantifier",
    "Is-low-quantifier",
    "Agreement",
    "Disagreement",
    "Has-if",
    "Is-stress-word",
    "Has-final",
    "Apology words",
    "Number of verb",
    "Number of adj",
    "Number of noun",
    "Number of pron",
    "Number of adv",
    "Number of adp",
    "Number of conj",
    "Number of det",
    "Number of punct",
    "Number of person",
    "Number of org",
    "Number of gpe",
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

/// Syntactic features backed by the word-list lexicon, in `SYNTACTIC` order.
const WORDLIST_FEATURES: [(usize, &str); 13] = [
    (3, "I"),
    (4, "You"),
    (5, "We"),
    (6, "They"),
    (11, "Thank"),
    (15, "Is-high-quantifier"),
    (16, "Is-low-quantifier"),
    (17, "Agreement"),
    (18, "Disagreement"),
    (19, "Has-if"),
    (20, "Is-stress-word"),
    (21, "Has-final"),
    (22, "Apology words"),
];

const POS_FEATURES: [Pos; 9] = [
    Pos::Verb,
    Pos::Adj,
    Pos::Noun,
    Pos::Pron,
    Pos::Adv,
    Pos::Adp,
    Pos::Conj,
    Pos::Det,
    Pos::Punct,
];

pub const FORMALITY: [&str; 2] = ["Formal", "Informal"];
pub const TEMPORAL: [&str; 3] = ["Is-present", "Is-past", "Is-future"];
pub const WARRINER: [&str; 9] = [
    "Valence-low",
    "Valence-high",
    "Arousal-low",
    "Arousal-high",
    "Dominance-low",
    "Dominance-high",
    "Valence-score",
    "Arousal-score",
    "Dominance-score",
];
pub const WARRINER_SCORES: [&str; 3] = ["valence", "arousal", "dominance"];
/// Scores below the low cut or above the high cut (1-9 scale) are bucketed.
pub const WARRINER_LOW: f64 = 4.0;
pub const WARRINER_HIGH: f64 = 6.0;
pub const PERMA: [&str; 10] = [
    "Neg-P", "Neg-E", "Neg-R", "Neg-M", "Neg-A", "Pos-P", "Pos-E", "Pos-R", "Pos-M", "Pos-A",
];
pub const EMOLEX: [&str; 10] = [
    "Anger",
    "Anticipation",
    "Disgust",
    "Fear",
    "Joy",
    "Negative",
    "Positive",
    "Sadness",
    "Surprise",
    "Trust",
];
pub const LIWC: [&str; 73] = [
    "Achievement",
    "Adjectives",
    "Adverbs",
    "Affect",
    "Affiliation",
    "Anger",
    "Anx",
    "Articles",
    "Assent",
    "Auxiliary Verbs",
    "Biological Processes",
    "Body",
    "Causal",
    "Certainty",
    "Cognitive Processes",
    "Comparisons",
    "Conjunctions",
    "Death",
    "Differentiation",
    "Discrepancies",
    "Drives",
    "Family",
    "Feel",
    "Female",
    "Filler Words",
    "Future Focus",
    "Past Focus",
    "Present Focus",
    "Friends",
    "Function Words",
    "Health",
    "Hear",
    "Home",
    "I",
    "Informal Language",
    "Ingest",
    "Insight",
    "Interrogatives",
    "Impersonal Pronouns",
    "Leisure",
    "Male",
    "Money",
    "Motion",
    "Negations",
    "Negative Emotions",
    "Netspeak",
    "Nonfluencies",
    "Numbers",
    "Perceptual Processes",
    "Positive Emotions",
    "Power",
    "Personal Pronouns",
    "Prepositions",
    "Pronouns",
    "Quantifiers",
    "Relativity",
    "Religion",
    "Reward",
    "Risk",
    "Sad",
    "See",
    "Sexual",
    "She-He",
    "Social",
    "Space",
    "Swear",
    "Tentative",
    "They",
    "Time",
    "Verbs",
    "We",
    "Work",
    "You",
];

/// Language-feature families, in vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Syntactic,
    Formality,
    Temporal,
    Warriner,
    Perma,
    Emolex,
    Liwc,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Syntactic,
        Family::Formality,
        Family::Temporal,
        Family::Warriner,
        Family::Perma,
        Family::Emolex,
        Family::Liwc,
    ];

    /// Feature-name prefix, e.g. `liwc` in `liwc:Money(B)`.
    pub fn prefix(self) -> &'static str {
        match self {
            Family::Syntactic => "syntactic",
            Family::Formality => "formality",
            Family::Temporal => "temporal",
            Family::Warriner => "warriner",
            Family::Perma => "perma",
            Family::Emolex => "emolex",
            Family::Liwc => "liwc",
        }
    }

    pub fn features(self) -> &'static [&'static str] {
        match self {
            Family::Syntactic => &SYNTACTIC,
            Family::Formality => &FORMALITY,
            Family::Temporal => &TEMPORAL,
            Family::Warriner => &WARRINER,
            Family::Perma => &PERMA,
            Family::Emolex => &EMOLEX,
            Family::Liwc => &LIWC,
        }
    }
}

pub fn feature_name(family: Family, feature: &str, role: Role) -> String {
    format!("{}:{}({})", family.prefix(), feature, role.tag())
}

/// All 302 language-feature names: families in order, each feature for the
/// buyer then the seller.
pub fn lf_names() -> Arc<Vec<String>> {
    static NAMES: OnceLock<Arc<Vec<String>>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            let mut names = Vec::new();
            for fam in Family::ALL {
                for feat in fam.features() {
                    for role in Role::BOTH {
                        names.push(feature_name(fam, feat, role));
                    }
                }
            }
            Arc::new(names)
        })
        .clone()
}

/// Everything language-feature extraction reads besides the dialogue.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    /// Word lists behind the list-based syntactic features.
    pub wordlists: Option<Lexicon>,
    pub formality: Option<Lexicon>,
    pub temporal: Option<Lexicon>,
    pub warriner: Option<Lexicon>,
    pub perma: Option<Lexicon>,
    pub emolex: Option<Lexicon>,
    pub liwc: Option<Lexicon>,
    /// Familiar words for Dale-Chall and the difficult-word count.
    pub easy_words: HashSet<String>,
}

macro_rules! bundled {
    ($name:literal) => {
        include_str!(concat!("../../resources/lexicons/", $name, ".tsv"))
    };
}

impl LexiconSet {
    /// The open substitute lexicons shipped with the crate.
    pub fn bundled() -> Self {
        let parse = |text: &str| Some(Lexicon::parse(text).expect("bundled lexicon parses"));
        LexiconSet {
            wordlists: parse(bundled!("wordlists")),
            formality: parse(bundled!("formality")),
            temporal: parse(bundled!("temporal")),
            warriner: parse(bundled!("warriner")),
            perma: parse(bundled!("perma")),
            emolex: parse(bundled!("emolex")),
            liwc: parse(bundled!("liwc")),
            easy_words: readability::bundled_easy_words().clone(),
        }
    }

    /// Start from the bundled set and replace every lexicon for which
    /// `dir/<name>.tsv` exists (`wordlists`, `formality`, `temporal`,
    /// `warriner`, `perma`, `emolex`, `liwc`), plus `easy_words.txt`.
    pub fn bundled_with_overrides(dir: &Path) -> Result<Self> {
        let mut set = LexiconSet::bundled();
        let slots: [(&str, &mut Option<Lexicon>); 7] = [
            ("wordlists", &mut set.wordlists),
            ("formality", &mut set.formality),
            ("temporal", &mut set.temporal),
            ("warriner", &mut set.warriner),
            ("perma", &mut set.perma),
            ("emolex", &mut set.emolex),
            ("liwc", &mut set.liwc),
        ];
        for (name, slot) in slots {
            let path = dir.join(format!("{name}.tsv"));
            if path.exists() {
                *slot = Some(Lexicon::load(&path)?);
            }
        }
        let easy = dir.join("easy_words.txt");
        if easy.exists() {
            set.easy_words = std::fs::read_to_string(&easy)?
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect();
        }
        Ok(set)
    }

    fn slot(&self, family: Family) -> Option<&Lexicon> {
        match family {
            Family::Syntactic => self.wordlists.as_ref(),
            Family::Formality => self.formality.as_ref(),
            Family::Temporal => self.temporal.as_ref(),
            Family::Warriner => self.warriner.as_ref(),
            Family::Perma => self.perma.as_ref(),
            Family::Emolex => self.emolex.as_ref(),
            Family::Liwc => self.liwc.as_ref(),
        }
    }

    /// Problems that make some features constant zero.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for fam in Family::ALL {
            match self.slot(fam) {
                None => out.push(format!("missing lexicon for family {}", fam.prefix())),
                Some(lex) if fam == Family::Warriner => {
                    if lex.kind() != LexiconKind::Scored {
                        out.push("warriner lexicon is not a scored lexicon".to_string());
                    }
                    for s in WARRINER_SCORES {
                        if lex.label_index(s).is_none() {
                            out.push(format!("warriner lexicon lacks score column {s}"));
                        }
                    }
                }
                Some(lex) => {
                    let missing: Vec<_> = category_features(fam)
                        .into_iter()
                        .filter(|c| lex.label_index(c).is_none())
                        .collect();
                    if !missing.is_empty() {
                        out.push(format!(
                            "{} lexicon lacks categories {:?}",
                            fam.prefix(),
                            missing
                        ));
                    }
                }
            }
        }
        if self.easy_words.is_empty() {
            out.push("empty familiar-word list".to_string());
        }
        out
    }
}

fn category_features(family: Family) -> Vec<&'static str> {
    match family {
        Family::Syntactic => WORDLIST_FEATURES.iter().map(|(_, n)| *n).collect(),
        f => f.features().to_vec(),
    }
}

fn lexicon_counts(lex: Option<&Lexicon>, names: &[&str], tokens: &[Token]) -> Vec<f64> {
    let Some(lex) = lex else {
        return vec![0.0; names.len()];
    };
    let counts = lex.count(tokens);
    names
        .iter()
        .map(|n| lex.label_index(n).map_or(0.0, |i| counts[i]))
        .collect()
}

fn warriner_features(lex: Option<&Lexicon>, tokens: &[Token]) -> Vec<f64> {
    let mut out = vec![0.0; 9];
    let Some(lex) = lex else {
        return out;
    };
    let cols: Vec<Option<usize>> = WARRINER_SCORES.iter().map(|s| lex.label_index(s)).collect();
    let mut sums = [0.0; 3];
    let mut seen = [0usize; 3];
    for t in tokens {
        let Some(scores) = lex.scores_of(t) else {
            continue;
        };
        for (dim, col) in cols.iter().enumerate() {
            if let Some(v) = col.and_then(|c| scores.get(c).copied().flatten()) {
                if v < WARRINER_LOW {
                    out[2 * dim] += 1.0;
                }
                if v > WARRINER_HIGH {
                    out[2 * dim + 1] += 1.0;
                }
                sums[dim] += v;
                seen[dim] += 1;
            }
        }
    }
    for dim in 0..3 {
        if seen[dim] > 0 {
            out[6 + dim] = sums[dim] / seen[dim] as f64;
        }
    }
    out
}

fn syntactic_features(
    messages: &[&str],
    text: &str,
    tokens: &[Token],
    lex: &LexiconSet,
    tagger: &dyn Tagger,
) -> Vec<f64> {
    let mut out = vec![0.0; SYNTACTIC.len()];
    let words: Vec<&Token> = tokens.iter().filter(|t| t.is_wordlike()).collect();
    out[0] = messages.len() as f64;
    out[1] = words.len() as f64;
    if !words.is_empty() {
        out[2] = words.iter().map(|t| t.surface.chars().count()).sum::<usize>() as f64 / words.len() as f64;
    }
    let punct = |p: &str| tokens.iter().filter(|t| t.kind == TokenKind::Punct && t.lower == p).count() as f64;
    out[7] = punct("?");
    out[8] = punct("!");
    out[9] = punct(".");
    out[10] = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word && t.surface.chars().next().is_some_and(char::is_uppercase))
        .count() as f64;
    out[12] = readability::sentence_count(text) as f64;
    out[13] = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word && t.lower.chars().all(char::is_alphabetic))
        .count() as f64;
    out[14] = tokens.iter().filter(|t| t.kind == TokenKind::Number).count() as f64;

    let names: Vec<&str> = WORDLIST_FEATURES.iter().map(|(_, n)| *n).collect();
    let counts = lexicon_counts(lex.wordlists.as_ref(), &names, tokens);
    for ((slot, _), c) in WORDLIST_FEATURES.iter().zip(counts) {
        out[*slot] = c;
    }

    let tags = tagger.pos_tags(tokens);
    for (k, pos) in POS_FEATURES.iter().enumerate() {
        out[23 + k] = tags.iter().filter(|t| *t == pos).count() as f64;
    }
    let ents = tagger.entities(tokens);
    for (k, kind) in [EntityKind::Person, EntityKind::Org, EntityKind::Gpe].iter().enumerate() {
        out[32 + k] = ents.iter().filter(|e| *e == kind).count() as f64;
    }
    let scores = readability::scores(text, &lex.easy_words);
    out[35..44].copy_from_slice(&scores);
    out
}

/// Features for one role, family by family, in `Family::ALL` order.
fn role_features(messages: &[&str], lex: &LexiconSet, tagger: &dyn Tagger) -> Vec<Vec<f64>> {
    let text = messages.join("\n");
    let tokens = tokenize(&text);
    Family::ALL
        .iter()
        .map(|fam| match fam {
            Family::Syntactic => syntactic_features(messages, &text, &tokens, lex, tagger),
            Family::Warriner => warriner_features(lex.warriner.as_ref(), &tokens),
            f => lexicon_counts(lex.slot(*f), f.features(), &tokens),
        })
        .collect()
}

/// The 302 language features of a partial dialogue.
pub fn extract_lf(partial: &PartialDialogue, lex: &LexiconSet, tagger: &dyn Tagger) -> FeatureVector {
    let per_role: Vec<Vec<Vec<f64>>> = Role::BOTH
        .iter()
        .map(|r| {
            let msgs: Vec<&str> = partial.messages_by(*r).map(|m| m.text.as_str()).collect();
            role_features(&msgs, lex, tagger)
        })
        .collect();
    let mut values = Vec::with_capacity(302);
    for f in 0..Family::ALL.len() {
        for k in 0..per_role[0][f].len() {
            values.push(per_role[0][f][k]);
            values.push(per_role[1][f][k]);
        }
    }
    let mut v = FeatureVector::new(lf_names(), values);
    v.warnings = lex.warnings();
    v
}
