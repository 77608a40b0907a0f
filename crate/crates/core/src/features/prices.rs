//! Currency mentions in free text.

/// A number found in a message, with its byte span (including any `$`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceMention {
    pub value: f64,
    pub start: usize,
    pub end: usize,
    pub dollar: bool,
}

/// Bare numbers count as prices only within this multiple of the listing.
pub const BARE_RANGE: (f64, f64) = (0.2, 3.0);

/// Parse `\d+(,\d{3})*(\.\d+)?` starting at `i`; returns (end, digits, value).
fn scan_number(b: &[u8], i: usize) -> Option<(usize, usize, f64)> {
    let mut j = i;
    let mut digits = 0;
    while j < b.len() && b[j].is_ascii_digit() {
        j += 1;
        digits += 1;
    }
    if digits == 0 {
        return None;
    }
    // thousands groups
    while j + 3 < b.len() && b[j] == b',' && b[j + 1..j + 4].iter().all(u8::is_ascii_digit)
        && !b.get(j + 4).is_some_and(u8::is_ascii_digit)
    {
        j += 4;
        digits += 3;
    }
    if j + 1 < b.len() && b[j] == b'.' && b[j + 1].is_ascii_digit() {
        j += 1;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
            digits += 1;
        }
    }
    let text: String = b[i..j].iter().filter(|c| **c != b',').map(|c| *c as char).collect();
    text.parse().ok().map(|v| (j, digits, v))
}

/// All currency-like numbers in order: `$`-prefixed numbers of any width and
/// bare numbers with at least two digits. Numbers glued to letters
/// (`iphone6`, `2br`) are skipped.
pub fn extract_price_mentions(text: &str) -> Vec<PriceMention> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'$' {
            let mut j = i + 1;
            while j < b.len() && b[j] == b' ' {
                j += 1;
            }
            if let Some((end, _, value)) = scan_number(b, j) {
                if !b.get(end).is_some_and(u8::is_ascii_alphabetic) {
                    out.push(PriceMention {
                        value,
                        start: i,
                        end,
                        dollar: true,
                    });
                }
                i = end;
                continue;
            }
            i += 1;
            continue;
        }
        if b[i].is_ascii_digit() {
            let glued_left = i > 0 && (b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'.');
            let (end, digits, value) = match scan_number(b, i) {
                Some(n) => n,
                None => {
                    i += 1;
                    continue;
                }
            };
            let glued_right = b.get(end).is_some_and(u8::is_ascii_alphabetic);
            if !glued_left && !glued_right && digits >= 2 {
                out.push(PriceMention {
                    value,
                    start: i,
                    end,
                    dollar: false,
                });
            }
            i = end;
            continue;
        }
        i += 1;
    }
    out
}

pub fn extract_prices(text: &str) -> Vec<f64> {
    extract_price_mentions(text).into_iter().map(|m| m.value).collect()
}

/// Mentions that count as quoted prices for a posting: every `$` mention if
/// the message has one, otherwise bare numbers within [`BARE_RANGE`] of the
/// listing price.
pub fn quoted_price_mentions(text: &str, listing: f64) -> Vec<PriceMention> {
    let all = extract_price_mentions(text);
    if all.iter().any(|m| m.dollar) {
        all.into_iter().filter(|m| m.dollar).collect()
    } else {
        let (lo, hi) = BARE_RANGE;
        all.into_iter()
            .filter(|m| m.value >= lo * listing && m.value <= hi * listing)
            .collect()
    }
}

pub fn quoted_prices(text: &str, listing: f64) -> Vec<f64> {
    quoted_price_mentions(text, listing).into_iter().map(|m| m.value).collect()
}
