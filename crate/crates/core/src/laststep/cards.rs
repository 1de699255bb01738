//! FITS 80-column header cards with string values and the CONTINUE
//! long-string convention.

use super::LastStepError;

pub const CARD_LEN: usize = 80;
pub const CONTINUE: &str = "CONTINUE";
/// Longest quoted payload on one card: 80 columns minus keyword and `= `,
/// minus the two quotes.
const SINGLE_MAX: usize = CARD_LEN - 10 - 2;
/// Payload per card when the value is split: room for the trailing `&`.
const CHUNK_MAX: usize = SINGLE_MAX - 1;

/// FITS keyword grammar: 1 to 8 characters from `A-Z0-9_-`.
pub fn valid_keyword(keyword: &str) -> bool {
    !keyword.is_empty()
        && keyword.len() <= 8
        && keyword
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

fn pad(mut card: String) -> String {
    while card.len() < CARD_LEN {
        card.push(' ');
    }
    card
}

fn escape(text: &str) -> String {
    text.replace('\'', "''")
}

/// Splits `value` into escaped chunks no longer than `max` columns, never
/// separating a doubled quote.
fn chunks(value: &str) -> Vec<String> {
    let escaped = escape(value);
    if escaped.len() <= SINGLE_MAX {
        return vec![escaped];
    }
    let mut out = Vec::new();
    let mut current = String::new();
    for c in value.chars() {
        let piece = if c == '\'' { "''".to_owned() } else { c.to_string() };
        if current.len() + piece.len() > CHUNK_MAX {
            out.push(std::mem::take(&mut current));
        }
        current.push_str(&piece);
    }
    out.push(current);
    out
}

/// Card images for a string-valued keyword. The comment is dropped when it
/// does not fit on the final card.
pub fn string_cards(keyword: &str, value: &str, comment: Option<&str>) -> Result<Vec<String>, LastStepError> {
    if !valid_keyword(keyword) {
        return Err(LastStepError::InvalidRecord(format!("bad keyword {keyword:?}")));
    }
    if let Some(c) = value.chars().find(|c| !(' '..='~').contains(c)) {
        return Err(LastStepError::InvalidRecord(format!(
            "{keyword} value contains non-printable or non-ASCII character {c:?}"
        )));
    }
    let parts = chunks(value);
    let last = parts.len() - 1;
    let mut cards = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate() {
        let head = if i == 0 {
            format!("{keyword:<8}= ")
        } else {
            format!("{CONTINUE}  ")
        };
        let amp = if i < last { "&" } else { "" };
        let mut card = format!("{head}'{part}{amp}'");
        if i == last {
            if let Some(c) = comment {
                if card.len() + 3 + c.len() <= CARD_LEN {
                    card.push_str(" / ");
                    card.push_str(c);
                }
            }
        }
        cards.push(pad(card));
    }
    Ok(cards)
}

/// Fixed-format logical or integer card, value right-aligned at column 30.
pub fn fixed_card(keyword: &str, value: &str, comment: Option<&str>) -> String {
    let mut card = format!("{keyword:<8}= {value:>20}");
    if let Some(c) = comment {
        card.push_str(" / ");
        card.push_str(c);
    }
    card.truncate(CARD_LEN);
    pad(card)
}

pub fn end_card() -> String {
    pad("END".to_owned())
}

/// One parsed card.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Card {
    /// `KEYWORD = 'text'`; `text` still carries a trailing `&` if present.
    String { keyword: String, text: String },
    Continue { text: String },
    /// Anything else: other value types, commentary keywords, blanks.
    Other { keyword: String },
}

/// Reads a quoted FITS string starting at `rest[0] == '\''`. Returns the
/// unescaped text and whatever follows the closing quote.
fn quoted(rest: &str) -> Result<(String, &str), String> {
    let bytes = rest.as_bytes();
    if bytes.first() != Some(&b'\'') {
        return Err("string value must start with a quote".into());
    }
    let mut out = String::new();
    let mut i = 1;
    while i < bytes.len() {
        if bytes[i] == b'\'' {
            if bytes.get(i + 1) == Some(&b'\'') {
                out.push('\'');
                i += 2;
                continue;
            }
            return Ok((out, &rest[i + 1..]));
        }
        out.push(bytes[i] as char);
        i += 1;
    }
    Err("unterminated string".into())
}

fn after_value(tail: &str) -> Result<(), String> {
    let t = tail.trim_start();
    if t.is_empty() || t.starts_with('/') {
        Ok(())
    } else {
        Err(format!("unexpected text after value: {t:?}"))
    }
}

/// Parses one card image. Lines shorter than 80 columns are treated as
/// blank-padded.
pub fn parse_card(index: usize, raw: &str) -> Result<Card, LastStepError> {
    let malformed = |detail: String| LastStepError::MalformedCard { index, detail };
    if raw.len() > CARD_LEN {
        return Err(malformed(format!("card is {} columns long", raw.len())));
    }
    if !raw.is_ascii() {
        return Err(malformed("card contains non-ASCII bytes".into()));
    }
    let keyword = raw.get(..8.min(raw.len())).unwrap_or("").trim_end().to_owned();
    let rest = raw.get(8..).unwrap_or("");
    if keyword == CONTINUE {
        let value = rest.trim_start();
        if !value.starts_with('\'') {
            return Ok(Card::Other { keyword });
        }
        let (text, tail) = quoted(value).map_err(malformed)?;
        after_value(tail).map_err(malformed)?;
        return Ok(Card::Continue { text });
    }
    if !rest.starts_with("= ") {
        return Ok(Card::Other { keyword });
    }
    let value = rest[2..].trim_start();
    if !value.starts_with('\'') {
        return Ok(Card::Other { keyword });
    }
    if !valid_keyword(&keyword) {
        return Err(malformed(format!("invalid keyword {keyword:?}")));
    }
    let (text, tail) = quoted(value).map_err(malformed)?;
    after_value(tail).map_err(malformed)?;
    Ok(Card::String { keyword, text })
}

/// String-valued keywords with CONTINUE cards joined, in header order.
/// Non-string cards are skipped. Each entry keeps the index of its first
/// card.
pub fn string_values(cards: &[String]) -> Result<Vec<(usize, String, String)>, LastStepError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    let mut open = false;
    for (index, raw) in cards.iter().enumerate() {
        match parse_card(index, raw)? {
            Card::String { keyword, text } => {
                open = text.ends_with('&');
                out.push((index, keyword, text));
            }
            Card::Continue { text } if open => {
                let last = out.last_mut().expect("open implies a previous value");
                last.2.pop();
                open = text.ends_with('&');
                last.2.push_str(&text);
            }
            Card::Continue { .. } | Card::Other { .. } => open = false,
        }
    }
    // a dangling '&' with no CONTINUE after it is literal text
    Ok(out)
}
