use alloc::string::String;

/// Trims and collapses internal whitespace runs to a single space.
pub(crate) fn collapse_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Identifier accepted as a PlantUML alias: `[A-Za-z_][A-Za-z0-9_]*`.
pub(crate) fn is_alias(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Character (not byte) range of the first occurrence of `needle` in `hay`.
pub(crate) fn find_char_span(hay: &str, needle: &str) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    let byte = hay.find(needle)?;
    let start = hay[..byte].chars().count();
    Some((start, start + needle.chars().count()))
}
