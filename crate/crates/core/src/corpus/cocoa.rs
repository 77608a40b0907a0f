//! Importer for the original Craigslist Bargaining release, where each file
//! is a JSON array of records with `scenario.kbs`, `events` and `outcome`.

use serde::Deserialize;
use serde_json::Value;

use super::{Action, Category, Dialogue, Event, Role, Scenario, Split};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Record {
    #[serde(default)]
    uuid: Option<String>,
    scenario: RawScenario,
    events: Vec<RawEvent>,
    #[serde(default)]
    outcome: Option<Outcome>,
}

#[derive(Deserialize)]
struct RawScenario {
    kbs: Vec<Kb>,
}

#[derive(Deserialize)]
struct Kb {
    item: Item,
    personal: Personal,
}

#[derive(Deserialize)]
#[serde(rename_all = "PascalCase")]
struct Item {
    category: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    price: Option<f64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "PascalCase")]
struct Personal {
    role: String,
    #[serde(default)]
    target: Option<f64>,
}

#[derive(Deserialize)]
struct RawEvent {
    agent: usize,
    action: String,
    #[serde(default)]
    data: Value,
}

#[derive(Deserialize)]
struct Outcome {
    #[serde(default)]
    reward: Option<f64>,
    #[serde(default)]
    offer: Option<OfferData>,
}

#[derive(Deserialize)]
struct OfferData {
    #[serde(default)]
    price: Option<f64>,
}

fn parse_role(s: &str) -> Option<Role> {
    match s.to_ascii_lowercase().as_str() {
        "buyer" => Some(Role::Buyer),
        "seller" => Some(Role::Seller),
        _ => None,
    }
}

fn convert(rec: Record, record: usize, split: Split) -> Result<Dialogue> {
    let err = |message: String| Error::Parse { record, message };
    if rec.scenario.kbs.len() != 2 {
        return Err(err(format!("expected 2 knowledge bases, found {}", rec.scenario.kbs.len())));
    }
    let mut roles = [Role::Buyer; 2];
    for (i, kb) in rec.scenario.kbs.iter().enumerate() {
        roles[i] = parse_role(&kb.personal.role)
            .ok_or_else(|| err(format!("unknown role `{}`", kb.personal.role)))?;
    }
    let buyer = rec
        .scenario
        .kbs
        .iter()
        .find(|kb| parse_role(&kb.personal.role) == Some(Role::Buyer))
        .ok_or_else(|| err("no buyer knowledge base".into()))?;
    let category: Category = buyer
        .item
        .category
        .parse()
        .map_err(|category| Error::UnknownCategory { record, category })?;
    let listing_price = buyer
        .item
        .price
        .filter(|p| *p > 0.0)
        .ok_or_else(|| err("missing listing price".into()))?;
    let target_price = buyer
        .personal
        .target
        .filter(|p| *p > 0.0)
        .ok_or_else(|| err("missing buyer target".into()))?;

    let mut events = Vec::with_capacity(rec.events.len());
    for (i, e) in rec.events.into_iter().enumerate() {
        let sender = *roles
            .get(e.agent)
            .ok_or_else(|| err(format!("event {i}: agent {} out of range", e.agent)))?;
        let action = match e.action.as_str() {
            "message" => match e.data {
                Value::String(s) => Action::Message(s),
                other => return Err(err(format!("event {i}: message data {other}"))),
            },
            "offer" => match e.data.get("price").and_then(Value::as_f64) {
                Some(p) => Action::Offer(p),
                None => {
                    log::warn!("record {record} event {i}: offer without price skipped");
                    continue;
                }
            },
            "accept" => Action::Accept,
            "reject" => Action::Reject,
            "quit" => Action::Quit,
            other => {
                log::warn!("record {record} event {i}: action `{other}` skipped");
                continue;
            }
        };
        events.push(Event { sender, action });
    }
    if events.is_empty() {
        return Err(err("no usable events".into()));
    }

    let agreed_price = rec.outcome.and_then(|o| {
        if o.reward.unwrap_or(0.0) >= 1.0 {
            o.offer.and_then(|p| p.price).filter(|p| *p > 0.0)
        } else {
            None
        }
    });

    Ok(Dialogue {
        id: rec.uuid.unwrap_or_else(|| format!("{split}-{record}")),
        scenario: Scenario {
            category,
            title: buyer.item.title.clone(),
            listing_price,
            target_price,
        },
        events,
        agreed_price,
        split,
    })
}

/// Convert one release file (a JSON array of records) into dialogues tagged
/// with `split`. Records that cannot be converted are returned separately
/// with their index rather than aborting the import.
pub fn import_cocoa(json: &str, split: Split) -> Result<(Vec<Dialogue>, Vec<Error>)> {
    let records: Vec<Value> = serde_json::from_str(json)?;
    let mut kept = Vec::with_capacity(records.len());
    let mut rejected = Vec::new();
    for (i, v) in records.into_iter().enumerate() {
        let converted = serde_json::from_value::<Record>(v)
            .map_err(|e| Error::Parse {
                record: i,
                message: e.to_string(),
            })
            .and_then(|r| convert(r, i, split));
        match converted {
            Ok(d) => kept.push(d),
            Err(e) => rejected.push(e),
        }
    }
    Ok((kept, rejected))
}
