//! Part-of-speech and named-entity tagging behind a small trait, with a
//! rule-based default built from closed-class word lists, suffix rules and
//! gazetteers.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::tokenize::{Token, TokenKind};

/// Universal part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Verb,
    Adj,
    Noun,
    Pron,
    Adv,
    Adp,
    Conj,
    Det,
    Num,
    Prt,
    Punct,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Person,
    Org,
    Gpe,
}

pub trait Tagger: Send + Sync {
    /// One tag per token.
    fn pos_tags(&self, tokens: &[Token]) -> Vec<Pos>;
    /// Entity mentions; one entry per (possibly multi-token) mention.
    fn entities(&self, tokens: &[Token]) -> Vec<EntityKind>;
}

fn set(words: &'static str) -> HashSet<&'static str> {
    words.split_whitespace().collect()
}

struct Lists {
    pron: HashSet<&'static str>,
    det: HashSet<&'static str>,
    adp: HashSet<&'static str>,
    conj: HashSet<&'static str>,
    prt: HashSet<&'static str>,
    verb: HashSet<&'static str>,
    adj: HashSet<&'static str>,
    adv: HashSet<&'static str>,
    gpe: HashSet<&'static str>,
    org: HashSet<&'static str>,
    person: HashSet<&'static str>,
}

fn lists() -> &'static Lists {
    static LISTS: OnceLock<Lists> = OnceLock::new();
    LISTS.get_or_init(|| Lists {
        pron: set("i me my mine myself you your yours yourself we us our ours ourselves they them their theirs \
                   he him his she her hers it its itself who whom whose what which anyone someone everyone \
                   something anything nothing everything i'm you're we're they're it's i've i'll i'd"),
        det: set("a an the this that these those each every some any no another all both either neither"),
        adp: set("of in on at by for with about against between into through during before after above \
                  below to from up down over under around near without within along across behind beyond \
                  upon toward towards per than"),
        conj: set("and or but nor so yet because although though while if unless whereas since"),
        prt: set("not n't off out"),
        verb: set("is am are was were be been being have has had do does did will would shall should can \
                   could may might must get got go going went come came sell sold buy bought pay paid want \
                   need take took make made give gave offer think know see saw like love look looks let \
                   meet pick deliver work works say said tell told call use used ask include includes \
                   don't doesn't didn't can't won't isn't aren't wasn't couldn't wouldn't"),
        adj: set("good new old great nice big small cheap expensive used little best better fair low high \
                  excellent perfect firm interested sure fine happy brand lowest highest final last ready \
                  available clean broken wrong free able glad"),
        adv: set("very really just so too also now then here there well still only even already again \
                  almost maybe probably definitely actually pretty quite tonight today tomorrow soon \
                  honestly usually never always"),
        gpe: set("america usa us california texas florida york francisco chicago boston seattle la \
                  oakland berkeley jose portland denver atlanta miami dallas houston austin canada \
                  mexico china japan germany england london"),
        org: set("apple samsung ikea honda toyota ford chevy bmw audi craigslist verizon sony dell hp \
                  lenovo microsoft google amazon ebay walmart target trek schwinn specialized bianchi \
                  iphone galaxy macbook ikea att sprint nissan subaru"),
        person: set("john mike michael david james robert mary sarah jessica jennifer chris bob tom \
                     alex sam dan joe steve mark paul lisa anna emily kate amy"),
    })
}

/// Closed-class lists plus suffix heuristics; entities are capitalized
/// tokens found in the gazetteers, or capitalized tokens away from the start
/// of a sentence that are not known words.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleTagger;

impl RuleTagger {
    fn word_tag(lower: &str) -> Pos {
        let l = lists();
        if l.pron.contains(lower) {
            Pos::Pron
        } else if l.det.contains(lower) {
            Pos::Det
        } else if l.adp.contains(lower) {
            Pos::Adp
        } else if l.conj.contains(lower) {
            Pos::Conj
        } else if l.prt.contains(lower) {
            Pos::Prt
        } else if l.verb.contains(lower) {
            Pos::Verb
        } else if l.adj.contains(lower) {
            Pos::Adj
        } else if l.adv.contains(lower) {
            Pos::Adv
        } else if lower.len() > 4 && lower.ends_with("ly") {
            Pos::Adv
        } else if lower.len() > 4 && (lower.ends_with("ing") || lower.ends_with("ed")) {
            Pos::Verb
        } else if lower.len() > 4
            && ["ous", "ful", "able", "ible", "ive", "less", "ic", "ish"]
                .iter()
                .any(|s| lower.ends_with(s))
        {
            Pos::Adj
        } else {
            Pos::Noun
        }
    }
}

impl Tagger for RuleTagger {
    fn pos_tags(&self, tokens: &[Token]) -> Vec<Pos> {
        tokens
            .iter()
            .map(|t| match t.kind {
                TokenKind::Punct => Pos::Punct,
                TokenKind::Number => Pos::Num,
                TokenKind::Word => RuleTagger::word_tag(&t.lower),
            })
            .collect()
    }

    fn entities(&self, tokens: &[Token]) -> Vec<EntityKind> {
        let l = lists();
        let mut out = Vec::new();
        let mut sentence_start = true;
        let mut prev: Option<EntityKind> = None;
        for t in tokens {
            if t.kind == TokenKind::Punct {
                if matches!(t.lower.as_str(), "." | "!" | "?") {
                    sentence_start = true;
                }
                prev = None;
                continue;
            }
            let capitalized = t.kind == TokenKind::Word
                && t.surface.chars().next().is_some_and(char::is_uppercase)
                && t.lower != "i"
                && !t.lower.starts_with("i'");
            let kind = if !capitalized {
                None
            } else if l.gpe.contains(t.lower.as_str()) {
                Some(EntityKind::Gpe)
            } else if l.org.contains(t.lower.as_str()) {
                Some(EntityKind::Org)
            } else if l.person.contains(t.lower.as_str()) {
                Some(EntityKind::Person)
            } else if !sentence_start && RuleTagger::word_tag(&t.lower) == Pos::Noun {
                Some(EntityKind::Person)
            } else {
                None
            };
            match kind {
                // consecutive capitalized tokens of one class form one mention
                Some(k) if prev == Some(k) => {}
                Some(k) => out.push(k),
                None => {}
            }
            prev = kind;
            sentence_start = false;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::tokenize::tokenize;

    #[test]
    fn tags_closed_classes() {
        let toks = tokenize("I can do $200 quickly.");
        let tags = RuleTagger.pos_tags(&toks);
        assert_eq!(
            tags,
            [Pos::Pron, Pos::Verb, Pos::Verb, Pos::Punct, Pos::Num, Pos::Adv, Pos::Punct]
        );
    }

    #[test]
    fn finds_entities() {
        let toks = tokenize("I live in San Francisco and bought it at Ikea from John.");
        let ents = RuleTagger.entities(&toks);
        assert!(ents.contains(&EntityKind::Org));
        assert!(ents.contains(&EntityKind::Person));
        assert!(!RuleTagger.entities(&tokenize("Hi. Is it new?")).contains(&EntityKind::Person));
    }
}
