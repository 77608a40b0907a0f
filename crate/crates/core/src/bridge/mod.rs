//! Inputs for external text encoders and the combiner over their
//! per-fraction predictions.

pub mod ensemble;
pub mod predictions;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{Fraction, Message, PartialDialogue, Role, Scenario};
use crate::error::{Error, Result};
use crate::features::prices::quoted_price_mentions;

pub use ensemble::{ensemble_train, EnsembleConfig, EnsembleModel, EnsembleOutcome};
pub use predictions::{read_predictions, write_predictions, PredictionMatrix, PredictionRecord};

/// Marker written between segments in the export file.
pub const SEPARATOR: &str = "[SEP]";

/// A price as an integer token: round(price / listing, 3) · 1000, half-up.
pub fn render_price(price: f64, listing: f64) -> Result<u64> {
    if !(listing > 0.0) || !listing.is_finite() {
        return Err(Error::domain(format!("listing price must be positive, got {listing}")));
    }
    if !(price >= 0.0) || !price.is_finite() {
        return Err(Error::domain(format!("price must be a nonnegative number, got {price}")));
    }
    let scaled = price / listing * 1000.0;
    // absorb representation error so exact halves (e.g. 0.0005) round up
    let guarded = (scaled * 1e6).round() / 1e6;
    Ok((guarded + 0.5).floor() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub text: String,
    pub segment_id: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlattenOptions {
    /// Also render every quoted price inside messages as an integer token.
    pub rewrite_message_prices: bool,
}

fn rewrite_prices(text: &str, listing: f64) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for m in quoted_price_mentions(text, listing) {
        out.push_str(&text[last..m.start]);
        match render_price(m.value, listing) {
            Ok(v) => out.push_str(&v.to_string()),
            Err(_) => out.push_str(&text[m.start..m.end]),
        }
        last = m.end;
    }
    out.push_str(&text[last..]);
    out
}

/// Scenario sentence (segment 0) followed by one segment per message with
/// ids alternating 1, 0, 1, ...
pub fn flatten(scenario: &Scenario, messages: &[Message], opts: FlattenOptions) -> Result<Vec<Segment>> {
    let target = render_price(scenario.target_price, scenario.listing_price)?;
    let mut segs = vec![Segment {
        text: format!(
            "Category is {}. Target Price is {}. Title is {}.",
            scenario.category, target, scenario.title
        ),
        segment_id: 0,
    }];
    for (i, m) in messages.iter().enumerate() {
        let text = if opts.rewrite_message_prices {
            rewrite_prices(&m.text, scenario.listing_price)
        } else {
            m.text.clone()
        };
        let who = match m.sender {
            Role::Buyer => "Buyer",
            Role::Seller => "Seller",
        };
        segs.push(Segment {
            text: format!("{who}: {text}"),
            segment_id: ((i + 1) % 2) as u8,
        });
    }
    Ok(segs)
}

/// One line of the flattened export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlattenedInput {
    pub id: String,
    pub segments: Vec<Segment>,
    pub fraction: Fraction,
    pub target_normalized: Option<f64>,
    #[serde(default = "default_separator")]
    pub separator: String,
}

fn default_separator() -> String {
    SEPARATOR.to_string()
}

impl FlattenedInput {
    pub fn from_partial(p: &PartialDialogue, opts: FlattenOptions) -> Result<Self> {
        Ok(FlattenedInput {
            id: p.id.clone(),
            segments: flatten(&p.scenario, &p.messages, opts)?,
            fraction: p.fraction,
            target_normalized: p.normalized_agreed(),
            separator: default_separator(),
        })
    }

    /// Segments joined with the separator marker.
    pub fn joined(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(&format!(" {} ", self.separator))
    }
}

pub fn write_flattened<W: Write>(items: &[FlattenedInput], mut w: W) -> Result<()> {
    for it in items {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_flattened<R: BufRead>(r: R) -> Result<Vec<FlattenedInput>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            record: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::truncate;
    use crate::fixtures::bianchi_dialogue;
    use proptest::prelude::*;

    #[test]
    fn render_examples() {
        assert_eq!(render_price(150.0, 300.0).unwrap(), 500);
        assert_eq!(render_price(200.0, 300.0).unwrap(), 667);
        assert_eq!(render_price(300.0, 300.0).unwrap(), 1000);
        assert_eq!(render_price(1.0, 2000.0).unwrap(), 1); // 0.0005 rounds up
        assert!(render_price(1.0, 0.0).is_err());
    }

    #[test]
    fn bianchi_scenario_sentence() {
        let d = bianchi_dialogue();
        let p = truncate(&d, Fraction::new(0.2).unwrap()).unwrap();
        let segs = flatten(&p.scenario, &p.messages, FlattenOptions::default()).unwrap();
        assert_eq!(
            segs[0].text,
            "Category is bike. Target Price is 500. Title is Single speed bianchi practically new."
        );
        assert_eq!(segs[1].text, "Buyer: Hi. I am interested in your bicycle. How long have you had it for?");
        assert_eq!(segs.iter().map(|s| s.segment_id).collect::<Vec<_>>(), vec![0, 1, 0]);
        assert!(flatten(&p.scenario, &[], FlattenOptions::default()).unwrap().len() == 1);
    }

    #[test]
    fn message_price_rewrite() {
        let d = bianchi_dialogue();
        let p = truncate(&d, Fraction::FULL).unwrap();
        let on = FlattenOptions {
            rewrite_message_prices: true,
        };
        let segs = flatten(&p.scenario, &p.messages, on).unwrap();
        assert!(segs[6].text.ends_with("I will not go as low as 500 I can do 750 though."), "{}", segs[6].text);
        let off = flatten(&p.scenario, &p.messages, FlattenOptions::default()).unwrap();
        assert!(off[6].text.contains("$225"));
    }

    #[test]
    fn jsonl_key_order_and_round_trip() {
        let p = truncate(&bianchi_dialogue(), Fraction::new(0.2).unwrap()).unwrap();
        let item = FlattenedInput::from_partial(&p, FlattenOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_flattened(std::slice::from_ref(&item), &mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.starts_with("{\"id\":\"bianchi\",\"segments\":[{\"text\":\"Category is bike."));
        assert!(line.contains("\"fraction\":0.2,\"target_normalized\":0.6666666666666666,\"separator\":\"[SEP]\"}"));
        assert_eq!(read_flattened(&buf[..]).unwrap(), vec![item]);
    }

    /// round-half-up of 1000·p/l for integer p and l, in exact arithmetic.
    fn render_oracle(p: u64, l: u64) -> u64 {
        (2000 * p + l) / (2 * l)
    }

    proptest! {
        #[test]
        fn render_matches_exact_rounding(p in 0u64..100_000, l in 1u64..100_000) {
            prop_assert_eq!(render_price(p as f64, l as f64).unwrap(), render_oracle(p, l));
        }

        #[test]
        fn render_monotone(a in 0.0f64..1e5, b in 0.0f64..1e5, l in 1.0f64..1e5) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(render_price(lo, l).unwrap() <= render_price(hi, l).unwrap());
        }

        #[test]
        fn segment_ids_alternate(m in 0usize..40) {
            let mut s = bianchi_dialogue().scenario;
            s.title = "x".into();
            let msgs: Vec<Message> = (0..m)
                .map(|i| Message { sender: if i % 2 == 0 { Role::Buyer } else { Role::Seller }, text: "ok".into() })
                .collect();
            let ids: Vec<u8> = flatten(&s, &msgs, FlattenOptions::default()).unwrap().iter().map(|g| g.segment_id).collect();
            let mut want = vec![0u8];
            want.extend((0..m).map(|i| if i % 2 == 0 { 1 } else { 0 }));
            prop_assert_eq!(ids, want);
        }
    }
}
