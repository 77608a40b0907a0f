use std::sync::{Arc, OnceLock};

use super::prices::quoted_prices;
use super::FeatureVector;
use crate::corpus::{Category, PartialDialogue, Role};

pub const PREFIX: &str = "tsf";

pub fn tsf_names() -> Arc<Vec<String>> {
    static NAMES: OnceLock<Arc<Vec<String>>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            let mut names: Vec<String> = Category::ALL
                .iter()
                .map(|c| format!("{PREFIX}:Is-{c}"))
                .collect();
            names.push(format!("{PREFIX}:Buyer target price"));
            names.push(format!("{PREFIX}:Buyer last price quoted"));
            names.push(format!("{PREFIX}:Seller last price quoted"));
            Arc::new(names)
        })
        .clone()
}

/// Most recent price quoted by `role` in the visible messages.
pub fn last_quoted(partial: &PartialDialogue, role: Role) -> Option<f64> {
    let listing = partial.scenario.listing_price;
    partial
        .messages_by(role)
        .filter_map(|m| quoted_prices(&m.text, listing).last().copied())
        .last()
}

/// Category one-hot, then target, last buyer quote and last seller quote,
/// all normalized by the listing price. A role with no visible quote falls
/// back to the target (buyer) or the listing (seller).
pub fn extract_tsf(partial: &PartialDialogue) -> FeatureVector {
    let s = &partial.scenario;
    let listing = s.listing_price;
    let mut values = vec![0.0; 9];
    values[s.category.index()] = 1.0;
    let target = s.target_price / listing;
    values[6] = target;
    values[7] = last_quoted(partial, Role::Buyer).map_or(target, |p| p / listing);
    values[8] = last_quoted(partial, Role::Seller).map_or(1.0, |p| p / listing);
    FeatureVector::new(tsf_names(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{truncate, Fraction};
    use crate::fixtures::bianchi_dialogue;

    #[test]
    fn bianchi_fractions() {
        let d = bianchi_dialogue();
        let at = |f: f64| extract_tsf(&truncate(&d, Fraction::new(f).unwrap()).unwrap()).values;

        let early = at(0.2);
        assert_eq!(&early[..6], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(early[6], 0.5);
        assert_eq!(early[7], 0.5);
        assert_eq!(early[8], 1.0);

        // buyer's last visible quote is $150, seller's is $225
        let mid = at(0.6);
        assert_eq!(mid[7], 0.5);
        assert_eq!(mid[8], 0.75);

        let late = at(0.8);
        assert!((late[7] - 2.0 / 3.0).abs() < 1e-12);
        assert!((late[8] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn housing_one_hot() {
        let mut d = bianchi_dialogue();
        d.scenario.category = Category::Housing;
        let v = extract_tsf(&truncate(&d, Fraction::FULL).unwrap()).values;
        assert_eq!(&v[..6], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(tsf_names()[4], "tsf:Is-housing");
    }
}
