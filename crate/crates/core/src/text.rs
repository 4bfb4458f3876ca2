//! Sentence segmentation, token normalisation and sentence fingerprints.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Splits text into sentences.
///
/// A sentence ends at `.`, `!` or `?` when the next character is whitespace
/// or the end of the text, and at every newline. Segments are trimmed and
/// empty ones dropped. The terminator stays with its sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let end = if c == '\n' {
            Some((i, i + 1))
        } else if is_terminator(c) && chars.peek().is_none_or(|&(_, n)| n.is_whitespace()) {
            Some((i + c.len_utf8(), i + c.len_utf8()))
        } else {
            None
        };
        if let Some((seg_end, next_start)) = end {
            push_trimmed(&mut out, &text[start..seg_end]);
            start = next_start;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, seg: &str) {
    let seg = seg.trim();
    if !seg.is_empty() {
        out.push(seg.to_string());
    }
}

/// Lowercases a sentence and returns its word tokens.
///
/// Alphanumeric characters are kept; an apostrophe is kept (as `'`) when the
/// next character is alphanumeric, so `'n` and `don't` survive; every other
/// character separates tokens.
pub fn normalize_sentence(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = sentence.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c) && chars.peek().is_some_and(|n| n.is_alphanumeric()) {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// 64-bit FNV-1a hash of a normalised token sequence. Stable across
/// platforms and releases, unlike `std`'s default hasher.
pub fn fingerprint(tokens: &[String]) -> u64 {
    let mut h = FNV_OFFSET;
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            h = fnv_step(h, b' ');
        }
        for &b in tok.as_bytes() {
            h = fnv_step(h, b);
        }
    }
    h
}

#[inline]
fn fnv_step(h: u64, b: u8) -> u64 {
    (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
}

/// Whole-text normal form: the normalised tokens of the text joined by single
/// spaces. Used to compare review bodies for mechanical duplication.
pub fn normalize_text(text: &str) -> String {
    normalize_sentence(text).join(" ")
}
