use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dialogue, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Baseline {
    /// Mean agreed price over training dialogues.
    #[serde(rename = "AAP")]
    Aap,
    /// Mean listing-normalized agreed price, rescaled by the instance listing.
    #[serde(rename = "AAP_n")]
    AapN,
    #[serde(rename = "Listing")]
    Listing,
    #[serde(rename = "Target")]
    Target,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [Baseline::Aap, Baseline::AapN, Baseline::Listing, Baseline::Target];

    pub fn label(self) -> &'static str {
        match self {
            Baseline::Aap => "AAP",
            Baseline::AapN => "AAP-n",
            Baseline::Listing => "Listing",
            Baseline::Target => "Target",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Baseline {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "aap" => Ok(Baseline::Aap),
            "aap_n" => Ok(Baseline::AapN),
            "listing" => Ok(Baseline::Listing),
            "target" => Ok(Baseline::Target),
            _ => Err(format!("unknown baseline `{s}`")),
        }
    }
}

/// A baseline with whatever training statistic it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub kind: Baseline,
    pub mean_agreed: f64,
    pub mean_normalized: f64,
}

impl BaselineModel {
    pub fn fit(kind: Baseline, train: &[&Dialogue]) -> Result<Self> {
        let agreed: Vec<(f64, f64)> = train
            .iter()
            .filter_map(|d| d.agreed_price.map(|p| (p, p / d.scenario.listing_price)))
            .collect();
        let needs_train = matches!(kind, Baseline::Aap | Baseline::AapN);
        if needs_train && agreed.is_empty() {
            return Err(Error::domain(format!("{kind} needs a nonempty training corpus")));
        }
        let n = agreed.len().max(1) as f64;
        Ok(BaselineModel {
            kind,
            mean_agreed: agreed.iter().map(|a| a.0).sum::<f64>() / n,
            mean_normalized: agreed.iter().map(|a| a.1).sum::<f64>() / n,
        })
    }

    /// Predicted agreed price in currency.
    pub fn predict(&self, scenario: &Scenario) -> f64 {
        match self.kind {
            Baseline::Aap => self.mean_agreed,
            Baseline::AapN => self.mean_normalized * scenario.listing_price,
            Baseline::Listing => scenario.listing_price,
            Baseline::Target => scenario.target_price,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::bianchi_dialogue;

    #[test]
    fn examples() {
        let mut a = bianchi_dialogue();
        a.agreed_price = Some(150.0);
        let mut b = bianchi_dialogue();
        b.agreed_price = Some(210.0);
        let train = [&a, &b];
        let s = &bianchi_dialogue().scenario;
        let aapn = BaselineModel::fit(Baseline::AapN, &train).unwrap();
        assert!((aapn.predict(s) - 180.0).abs() < 1e-9);
        assert_eq!(BaselineModel::fit(Baseline::Aap, &train).unwrap().predict(s), 180.0);
        assert_eq!(BaselineModel::fit(Baseline::Listing, &[]).unwrap().predict(s), 300.0);
        assert_eq!(BaselineModel::fit(Baseline::Target, &[]).unwrap().predict(s), 150.0);
        assert!(BaselineModel::fit(Baseline::Aap, &[]).is_err());
    }
}
