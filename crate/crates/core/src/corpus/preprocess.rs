use std::io::Write;

use super::Dialogue;
use crate::error::Result;

/// Normalized agreed prices outside `[LOWER_RATIO, UPPER_RATIO]` are outliers.
pub const LOWER_RATIO: f64 = 0.3;
pub const UPPER_RATIO: f64 = 2.0;

/// Substrings marking dialogues where workers discussed the task itself.
/// `negotiat` is a stem on purpose.
pub const NOISE_KEYWORDS: [&str; 4] = ["hit", "negotiat", "requester", "turk"];

#[derive(Debug, Clone, PartialEq)]
pub enum DropReason {
    NoAgreement,
    Outlier { ratio: f64 },
    Noise { keyword: &'static str },
}

impl DropReason {
    pub fn code(&self) -> &'static str {
        match self {
            DropReason::NoAgreement => "no_agreement",
            DropReason::Outlier { .. } => "outlier",
            DropReason::Noise { .. } => "noise_keyword",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            DropReason::NoAgreement => String::new(),
            DropReason::Outlier { ratio } => format!("{ratio:.6}"),
            DropReason::Noise { keyword } => (*keyword).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropRecord {
    pub id: String,
    pub reason: DropReason,
}

fn drop_reason(d: &Dialogue) -> Option<DropReason> {
    let Some(ratio) = d.normalized_agreed() else {
        return Some(DropReason::NoAgreement);
    };
    if !(LOWER_RATIO..=UPPER_RATIO).contains(&ratio) {
        return Some(DropReason::Outlier { ratio });
    }
    for m in d.messages() {
        let lower = m.text.to_lowercase();
        if let Some(keyword) = NOISE_KEYWORDS.iter().find(|k| lower.contains(*k)) {
            return Some(DropReason::Noise { keyword });
        }
    }
    None
}

/// Filter a corpus and report why each dropped dialogue was removed.
pub fn preprocess_with_audit(dialogues: Vec<Dialogue>) -> (Vec<Dialogue>, Vec<DropRecord>) {
    let mut kept = Vec::with_capacity(dialogues.len());
    let mut dropped = Vec::new();
    for d in dialogues {
        match drop_reason(&d) {
            None => kept.push(d),
            Some(reason) => dropped.push(DropRecord { id: d.id, reason }),
        }
    }
    (kept, dropped)
}

/// Keep agreed, in-band, noise-free dialogues; order is preserved.
pub fn preprocess(dialogues: Vec<Dialogue>) -> Vec<Dialogue> {
    preprocess_with_audit(dialogues).0
}

pub fn write_audit_csv<W: Write>(records: &[DropRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "reason", "detail"])?;
    for r in records {
        out.write_record([r.id.as_str(), r.reason.code(), &r.reason.detail()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Category, Event, Role, Scenario, Split};
    use proptest::prelude::*;

    fn dialogue(id: &str, listing: f64, agreed: Option<f64>, texts: &[&str]) -> Dialogue {
        Dialogue {
            id: id.into(),
            scenario: Scenario {
                category: Category::Furniture,
                title: "Hitachi table".into(),
                listing_price: listing,
                target_price: listing * 0.7,
            },
            events: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Event::message(if i % 2 == 0 { Role::Buyer } else { Role::Seller }, *t))
                .collect(),
            agreed_price: agreed,
            split: Split::Train,
        }
    }

    #[test]
    fn drops_low_outlier() {
        let (kept, dropped) = preprocess_with_audit(vec![dialogue("a", 300.0, Some(50.0), &["hi"])]);
        assert!(kept.is_empty());
        assert_eq!(dropped[0].reason.code(), "outlier");
    }

    #[test]
    fn band_is_inclusive() {
        let kept = preprocess(vec![
            dialogue("lo", 100.0, Some(30.0), &["hi"]),
            dialogue("hi", 100.0, Some(200.0), &["hi"]),
            dialogue("over", 100.0, Some(200.5), &["hi"]),
        ]);
        let ids: Vec<_> = kept.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["lo", "hi"]);
    }

    #[test]
    fn drops_keyword_and_no_agreement() {
        let (kept, dropped) = preprocess_with_audit(vec![
            dialogue("k", 300.0, Some(200.0), &["ok", "don't reject the hit please"]),
            dialogue("n", 300.0, None, &["bye"]),
            dialogue("ok", 300.0, Some(200.0), &["I'd like it", "Sure"]),
            dialogue("case", 300.0, Some(200.0), &["Let's NEGOTIATE"]),
        ]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "ok");
        assert_eq!(dropped[0].reason, DropReason::Noise { keyword: "hit" });
        assert_eq!(dropped[1].reason, DropReason::NoAgreement);
        assert_eq!(dropped[2].reason, DropReason::Noise { keyword: "negotiat" });
    }

    #[test]
    fn title_not_scanned() {
        // the scenario title contains "hit" but messages do not
        assert_eq!(preprocess(vec![dialogue("t", 300.0, Some(250.0), &["nice"])]).len(), 1);
    }

    #[test]
    fn audit_csv_layout() {
        let (_, dropped) = preprocess_with_audit(vec![dialogue("a", 300.0, Some(50.0), &["hi"])]);
        let mut buf = Vec::new();
        write_audit_csv(&dropped, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,reason,detail\na,outlier,0.166667\n");
    }

    fn arb_dialogue() -> impl Strategy<Value = Dialogue> {
        let words = prop::sample::select(vec!["deal", "hit", "turk", "fine", "price", "Requester", "ok"]);
        (
            1.0f64..1000.0,
            prop::option::of(0.0f64..3.0),
            prop::collection::vec(prop::collection::vec(words, 1..4), 1..5),
        )
            .prop_map(|(listing, ratio, msgs)| {
                let texts: Vec<String> = msgs.into_iter().map(|w| w.join(" ")).collect();
                let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
                dialogue("p", listing, ratio.map(|r| r * listing), &refs)
            })
    }

    proptest! {
        #[test]
        fn idempotent_and_survivors_clean(ds in prop::collection::vec(arb_dialogue(), 0..20)) {
            let once = preprocess(ds);
            let twice = preprocess(once.clone());
            prop_assert_eq!(&once, &twice);
            for d in &once {
                let r = d.normalized_agreed().unwrap();
                prop_assert!((LOWER_RATIO..=UPPER_RATIO).contains(&r));
                for m in d.messages() {
                    let l = m.text.to_lowercase();
                    prop_assert!(NOISE_KEYWORDS.iter().all(|k| !l.contains(k)));
                }
            }
        }
    }
}
