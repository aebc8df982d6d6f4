//! The shared tokenizer used for token counts, BM25, and every n-gram metric.
//!
//! Text is lowercased and split on whitespace. Leading and trailing
//! punctuation characters of each whitespace chunk become tokens of their own,
//! one character per token; punctuation inside a word ("mail-in", "don't",
//! "3.5") stays attached.

/// Tokenize `text` into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let start = chars.iter().position(|c| c.is_alphanumeric());
        let Some(start) = start else {
            tokens.extend(chars.iter().map(|c| lower(&c.to_string())));
            continue;
        };
        // `start` exists, so a last alphanumeric exists too.
        let end = chars.iter().rposition(|c| c.is_alphanumeric()).unwrap() + 1;
        tokens.extend(chars[..start].iter().map(|c| lower(&c.to_string())));
        tokens.push(lower(&chars[start..end].iter().collect::<String>()));
        tokens.extend(chars[end..].iter().map(|c| lower(&c.to_string())));
    }
    tokens
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

/// Number of tokens in `text` under [`tokenize`].
pub fn token_count(text: &str) -> usize {
    tokenize(text).len()
}
