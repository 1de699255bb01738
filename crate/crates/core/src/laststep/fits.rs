//! Just enough FITS to read a primary header and to write a header-only
//! file around a set of provenance cards.

use super::cards::{end_card, fixed_card, CARD_LEN};
use super::LastStepError;

pub const BLOCK_LEN: usize = 2880;
const CARDS_PER_BLOCK: usize = BLOCK_LEN / CARD_LEN;

/// Card images of the primary header, up to but excluding `END`.
pub fn read_primary_header(bytes: &[u8]) -> Result<Vec<String>, LastStepError> {
    if !bytes.starts_with(b"SIMPLE  =") {
        return Err(LastStepError::NotFits("missing SIMPLE card".into()));
    }
    let mut cards = Vec::new();
    for (n, chunk) in bytes.chunks(CARD_LEN).enumerate() {
        if chunk.len() < CARD_LEN {
            break;
        }
        let card = std::str::from_utf8(chunk)
            .ok()
            .filter(|c| c.is_ascii())
            .ok_or_else(|| LastStepError::MalformedCard {
                index: n,
                detail: "card contains non-ASCII bytes".into(),
            })?;
        if card.trim_end() == "END" {
            return Ok(cards);
        }
        cards.push(card.to_owned());
    }
    Err(LastStepError::NotFits("no END card in header".into()))
}

/// A header-only FITS file: mandatory cards, `extra` cards, `END`, padded
/// to whole 2880-byte blocks.
pub fn minimal_fits(extra: &[String]) -> Vec<u8> {
    let mut cards = vec![
        fixed_card("SIMPLE", "T", Some("conforms to FITS standard")),
        fixed_card("BITPIX", "8", Some("array data type")),
        fixed_card("NAXIS", "0", Some("no data array")),
    ];
    cards.extend(extra.iter().cloned());
    cards.push(end_card());
    let blocks = cards.len().div_ceil(CARDS_PER_BLOCK);
    let mut bytes = Vec::with_capacity(blocks * BLOCK_LEN);
    for card in &cards {
        bytes.extend_from_slice(card.as_bytes());
    }
    bytes.resize(blocks * BLOCK_LEN, b' ');
    bytes
}

/// Cards from a text file with one card per line. Blank lines are skipped.
pub fn read_card_text(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect()
}
