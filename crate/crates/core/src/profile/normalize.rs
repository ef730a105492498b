//! Attribute text normalization.
//!
//! Lowercases, folds accents and compatibility forms to their base letters,
//! strips everything that is not alphanumeric, then applies a single plural
//! rule: a trailing `s` is dropped unless the word ends in `ss` or the `s` is
//! the only character left.

use alloc::string::String;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::ProfileError;

pub fn normalize_attribute(raw: &str) -> Result<String, ProfileError> {
    let mut folded = fold(raw);
    // Lowercasing can expose new decompositions (and vice versa); iterate to
    // a fixpoint so the transform is idempotent.
    for _ in 0..4 {
        let again = fold(&folded);
        if again == folded {
            break;
        }
        folded = again;
    }
    strip_plural(&mut folded);
    if folded.is_empty() {
        return Err(ProfileError::EmptyAfterNormalization);
    }
    Ok(folded)
}

fn fold(s: &str) -> String {
    s.chars()
        .flat_map(char::to_lowercase)
        .nfkd()
        .filter(|c| !is_combining_mark(*c) && c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        // Uppercase symbols without a lowercase mapping (e.g. circled letters).
        .filter(|c| !c.is_uppercase())
        .collect()
}

fn strip_plural(s: &mut String) {
    let b = s.as_bytes();
    if b.len() >= 2 && b[b.len() - 1] == b's' && b[b.len() - 2] != b's' {
        s.pop();
    }
}
