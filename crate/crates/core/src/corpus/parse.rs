use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Action, Category, Dialogue, Event, Role, Scenario, Split};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct RawDialogue {
    #[serde(default)]
    id: Option<String>,
    scenario: RawScenario,
    events: Vec<RawEvent>,
    #[serde(default)]
    agreed_price: Option<f64>,
    split: Split,
}

#[derive(Deserialize)]
struct RawScenario {
    category: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    listing_price: Option<f64>,
    #[serde(default)]
    target_price: Option<f64>,
}

#[derive(Deserialize)]
struct RawEvent {
    sender: Role,
    kind: String,
    #[serde(default)]
    data: Value,
}

#[derive(Serialize)]
struct OutDialogue<'a> {
    id: &'a str,
    scenario: &'a Scenario,
    events: Vec<OutEvent>,
    agreed_price: Option<f64>,
    split: Split,
}

#[derive(Serialize)]
struct OutEvent {
    sender: Role,
    kind: &'static str,
    data: Value,
}

fn convert(raw: RawDialogue, record: usize) -> Result<Dialogue> {
    let parse_err = |message: String| Error::Parse { record, message };
    let category: Category = raw
        .scenario
        .category
        .parse()
        .map_err(|category| Error::UnknownCategory { record, category })?;
    let listing_price = raw
        .scenario
        .listing_price
        .ok_or_else(|| parse_err("missing listing_price".into()))?;
    if !(listing_price > 0.0) {
        return Err(parse_err(format!("listing_price must be positive, got {listing_price}")));
    }
    let target_price = raw
        .scenario
        .target_price
        .ok_or_else(|| parse_err("missing target_price".into()))?;
    if !(target_price > 0.0) {
        return Err(parse_err(format!("target_price must be positive, got {target_price}")));
    }
    if raw.events.is_empty() {
        return Err(parse_err("events must be nonempty".into()));
    }
    if let Some(p) = raw.agreed_price {
        if !(p > 0.0) {
            return Err(parse_err(format!("agreed_price must be positive, got {p}")));
        }
    }

    let mut events = Vec::with_capacity(raw.events.len());
    for (i, e) in raw.events.into_iter().enumerate() {
        let action = match (e.kind.as_str(), e.data) {
            ("message", Value::String(s)) => Action::Message(s),
            ("offer", Value::Number(n)) => Action::Offer(
                n.as_f64()
                    .ok_or_else(|| parse_err(format!("event {i}: offer price out of range")))?,
            ),
            ("accept", Value::Null) => Action::Accept,
            ("reject", Value::Null) => Action::Reject,
            ("quit", Value::Null) => Action::Quit,
            (kind @ ("message" | "offer" | "accept" | "reject" | "quit"), data) => {
                return Err(parse_err(format!(
                    "event {i}: data {data} does not match kind `{kind}`"
                )))
            }
            (kind, _) => return Err(parse_err(format!("event {i}: unknown kind `{kind}`"))),
        };
        events.push(Event {
            sender: e.sender,
            action,
        });
    }

    Ok(Dialogue {
        id: raw.id.unwrap_or_else(|| format!("record-{record}")),
        scenario: Scenario {
            category,
            title: raw.scenario.title,
            listing_price,
            target_price,
        },
        events,
        agreed_price: raw.agreed_price,
        split: raw.split,
    })
}

/// Parse a JSON-lines corpus. Blank lines are skipped; record indices
/// count non-blank lines from zero.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Dialogue>> {
    let mut out = Vec::new();
    let mut record = 0usize;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDialogue = serde_json::from_str(&line).map_err(|e| Error::Parse {
            record,
            message: e.to_string(),
        })?;
        out.push(convert(raw, record)?);
        record += 1;
    }
    Ok(out)
}

pub fn read_corpus(path: &std::path::Path) -> Result<Vec<Dialogue>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(e).with_context(format!("opening {}", path.display())))?;
    parse_corpus(std::io::BufReader::new(file))
}

/// Write dialogues in the same JSON-lines format `parse_corpus` reads.
pub fn write_corpus<W: Write>(dialogues: &[Dialogue], mut w: W) -> Result<()> {
    for d in dialogues {
        let events = d
            .events
            .iter()
            .map(|e| OutEvent {
                sender: e.sender,
                kind: e.action.kind(),
                data: match &e.action {
                    Action::Message(t) => Value::String(t.clone()),
                    Action::Offer(p) => serde_json::json!(p),
                    _ => Value::Null,
                },
            })
            .collect();
        let out = OutDialogue {
            id: &d.id,
            scenario: &d.scenario,
            events,
            agreed_price: d.agreed_price,
            split: d.split,
        };
        serde_json::to_writer(&mut w, &out)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
