//! Negotiation dialogues: parsing, filtering, price normalization and
//! per-fraction truncation.
//!
//! The on-disk format is JSON lines, one dialogue per line. See
//! `docs/formats.md` for the exact key names.

mod cocoa;
mod parse;
mod preprocess;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cocoa::import_cocoa;
pub use parse::{parse_corpus, read_corpus, write_corpus};
pub use preprocess::{
    preprocess, preprocess_with_audit, write_audit_csv, DropReason, DropRecord, LOWER_RATIO,
    NOISE_KEYWORDS, UPPER_RATIO,
};
pub use store::{CorpusStore, Stage};

/// Product category of a posting. Declaration order is alphabetical and is
/// the one-hot order used by the task-specific features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bike,
    Car,
    Electronics,
    Furniture,
    Housing,
    Phone,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Bike,
        Category::Car,
        Category::Electronics,
        Category::Furniture,
        Category::Housing,
        Category::Phone,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Bike => "bike",
            Category::Car => "car",
            Category::Electronics => "electronics",
            Category::Furniture => "furniture",
            Category::Housing => "housing",
            Category::Phone => "phone",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Buyer,
    Seller,
}

impl Role {
    pub const BOTH: [Role; 2] = [Role::Buyer, Role::Seller];

    /// Suffix letter used in feature names.
    pub fn tag(self) -> char {
        match self {
            Role::Buyer => 'B',
            Role::Seller => 'S',
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Buyer => "Buyer",
            Role::Seller => "Seller",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Posting metadata visible to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub category: Category,
    pub title: String,
    pub listing_price: f64,
    pub target_price: f64,
}

/// What happened in one event. The payload is tied to the kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Message(String),
    Offer(f64),
    Accept,
    Reject,
    Quit,
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Message(_) => "message",
            Action::Offer(_) => "offer",
            Action::Accept => "accept",
            Action::Reject => "reject",
            Action::Quit => "quit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub sender: Role,
    pub action: Action,
}

impl Event {
    pub fn message(sender: Role, text: impl Into<String>) -> Self {
        Event {
            sender,
            action: Action::Message(text.into()),
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.action {
            Action::Message(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    pub id: String,
    pub scenario: Scenario,
    pub events: Vec<Event>,
    pub agreed_price: Option<f64>,
    pub split: Split,
}

impl Dialogue {
    pub fn messages(&self) -> impl Iterator<Item = Message> + '_ {
        self.events.iter().filter_map(|e| match &e.action {
            Action::Message(t) => Some(Message {
                sender: e.sender,
                text: t.clone(),
            }),
            _ => None,
        })
    }

    pub fn message_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.action, Action::Message(_)))
            .count()
    }

    /// Agreed price divided by listing price, if an agreement exists.
    pub fn normalized_agreed(&self) -> Option<f64> {
        self.agreed_price
            .map(|p| p / self.scenario.listing_price)
    }
}

/// A message event with its payload extracted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub sender: Role,
    pub text: String,
}

/// Share of message events visible to a model, stored in tenths so the
/// truncation arithmetic is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction(u8);

impl Fraction {
    pub const GRID: [Fraction; 5] = [
        Fraction(2),
        Fraction(4),
        Fraction(6),
        Fraction(8),
        Fraction(10),
    ];
    pub const FULL: Fraction = Fraction(10);

    pub fn new(f: f64) -> Result<Self> {
        Fraction::GRID
            .into_iter()
            .find(|g| (g.value() - f).abs() < 1e-9)
            .ok_or_else(|| Error::domain(format!("fraction {f} is not on the grid 0.2..1.0")))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    /// `ceil(f * total)`, at least one.
    pub fn visible(self, total: usize) -> usize {
        let tenths = usize::from(self.0);
        ((tenths * total).div_ceil(10)).max(1)
    }

    /// Grid fractions up to and including this one.
    pub fn up_to(self) -> Vec<Fraction> {
        Fraction::GRID.into_iter().filter(|g| *g <= self).collect()
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.value())
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Fraction::new(v).map_err(serde::de::Error::custom)
    }
}

/// The first `f` share of a dialogue's messages.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDialogue {
    pub id: String,
    pub scenario: Scenario,
    pub messages: Vec<Message>,
    pub fraction: Fraction,
    pub agreed_price: Option<f64>,
    pub split: Split,
}

impl PartialDialogue {
    pub fn messages_by(&self, role: Role) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.sender == role)
    }

    pub fn normalized_agreed(&self) -> Option<f64> {
        self.agreed_price.map(|p| p / self.scenario.listing_price)
    }
}

/// `price / listing`.
pub fn normalize_price(price: f64, listing: f64) -> Result<f64> {
    if !(listing > 0.0) {
        return Err(Error::domain(format!("listing price must be positive, got {listing}")));
    }
    Ok(price / listing)
}

/// Keep the first `ceil(f * M)` message events (minimum one).
pub fn truncate(dialogue: &Dialogue, fraction: Fraction) -> Result<PartialDialogue> {
    let total = dialogue.message_count();
    if total == 0 {
        return Err(Error::domain(format!(
            "dialogue {} has no message events",
            dialogue.id
        )));
    }
    let keep = fraction.visible(total);
    Ok(PartialDialogue {
        id: dialogue.id.clone(),
        scenario: dialogue.scenario.clone(),
        messages: dialogue.messages().take(keep).collect(),
        fraction,
        agreed_price: dialogue.agreed_price,
        split: dialogue.split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn dialogue_with_messages(n: usize) -> Dialogue {
        let events = (0..n)
            .map(|i| {
                let role = if i % 2 == 0 { Role::Buyer } else { Role::Seller };
                Event::message(role, format!("message {i}"))
            })
            .collect();
        Dialogue {
            id: "d".into(),
            scenario: Scenario {
                category: Category::Bike,
                title: "t".into(),
                listing_price: 300.0,
                target_price: 150.0,
            },
            events,
            agreed_price: Some(200.0),
            split: Split::Train,
        }
    }

    #[test]
    fn normalize_examples() {
        assert!((normalize_price(200.0, 300.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(normalize_price(300.0, 300.0).unwrap(), 1.0);
        assert_eq!(normalize_price(0.0, 300.0).unwrap(), 0.0);
        assert!(normalize_price(10.0, 0.0).is_err());
        assert!(normalize_price(10.0, -5.0).is_err());
    }

    #[test]
    fn truncate_examples() {
        let ten = dialogue_with_messages(10);
        let p = truncate(&ten, Fraction::new(0.2).unwrap()).unwrap();
        assert_eq!(p.messages.len(), 2);
        assert_eq!(truncate(&ten, Fraction::FULL).unwrap().messages.len(), 10);

        let three = dialogue_with_messages(3);
        assert_eq!(truncate(&three, Fraction::new(0.2).unwrap()).unwrap().messages.len(), 1);
    }

    #[test]
    fn truncate_skips_non_message_events() {
        let mut d = dialogue_with_messages(4);
        d.events.insert(
            1,
            Event {
                sender: Role::Seller,
                action: Action::Offer(250.0),
            },
        );
        d.events.push(Event {
            sender: Role::Buyer,
            action: Action::Accept,
        });
        let p = truncate(&d, Fraction::new(0.6).unwrap()).unwrap();
        assert_eq!(p.messages.len(), 3);
        assert_eq!(p.messages[1].text, "message 1");
    }

    #[test]
    fn truncate_rejects_empty() {
        let d = dialogue_with_messages(0);
        assert!(matches!(truncate(&d, Fraction::FULL), Err(Error::Domain(_))));
    }

    #[test]
    fn fraction_rejects_off_grid() {
        assert!(Fraction::new(0.3).is_err());
        assert_eq!(Fraction::new(0.8).unwrap().to_string(), "0.8");
        assert_eq!(Fraction::new(0.4).unwrap().up_to().len(), 2);
    }

    /// Prefix oracle: the visible count is the smallest k with k/M >= f.
    fn oracle_visible(f: f64, m: usize) -> usize {
        (1..=m).find(|&k| k as f64 / m as f64 >= f - 1e-12).unwrap_or(m)
    }

    proptest! {
        #[test]
        fn ceil_rule_matches_oracle(m in 1usize..200, fi in 0usize..5) {
            let f = Fraction::GRID[fi];
            prop_assert_eq!(f.visible(m), oracle_visible(f.value(), m));
        }

        #[test]
        fn prefix_monotone(m in 1usize..60, a in 0usize..5, b in 0usize..5) {
            let d = dialogue_with_messages(m);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p1 = truncate(&d, Fraction::GRID[lo]).unwrap();
            let p2 = truncate(&d, Fraction::GRID[hi]).unwrap();
            prop_assert!(p1.messages.len() <= p2.messages.len());
            prop_assert_eq!(&p2.messages[..p1.messages.len()], &p1.messages[..]);
        }

        #[test]
        fn normalization_round_trip(p in 0.0f64..1e7, l in 1e-3f64..1e7) {
            let r = normalize_price(p, l).unwrap() * l;
            prop_assert!((r - p).abs() <= 1e-9 * p.abs().max(1e-300));
        }
    }
}
