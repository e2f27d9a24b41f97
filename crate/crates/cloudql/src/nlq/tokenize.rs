//! Query/document tokenization.
//!
//! Tokens are maximal lowercase runs of `[a-z0-9._-]`, so resource ids like
//! `ins-cloud-host-1427` survive as single tokens. A fixed small stopword
//! list is flagged (not removed): cue phrases still match across stopwords,
//! while content accounting and keyword matching skip them.

/// Stopwords: articles, query verbs, and glue words that carry no retrieval
/// signal on their own. Kept short on purpose; cue phrases may still contain
/// them.
pub const STOPWORDS: &[&str] = &[
    "a", "all", "an", "and", "are", "as", "at", "be", "been", "by", "did", "do", "does", "find",
    "for", "from", "get", "give", "had", "has", "have", "i", "in", "is", "it", "its", "list", "me",
    "my", "of", "on", "or", "our", "show", "that", "the", "their", "them", "there", "these",
    "they", "this", "those", "to", "was", "were", "what", "which", "who", "with",
];

/// One token with its character span in the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub stopword: bool,
}

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

/// Splits text into lowercase tokens, keeping `._-` inside tokens and
/// flagging stopwords.
pub fn tokenize(text: &str) -> Vec<Token> {
    let lower = text.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (idx, c) in lower.char_indices() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' {
            if current.is_empty() {
                start = idx;
            }
            current.push(c);
        } else if !current.is_empty() {
            push_token(&mut tokens, std::mem::take(&mut current), start);
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, current, start);
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, raw: String, start: usize) {
    // Trim punctuation-only leftovers like a bare "-" and surrounding dots
    // that come from sentence punctuation rather than identifiers.
    let text = raw
        .trim_matches(|c| c == '.' || c == '-' || c == '_')
        .to_owned();
    if text.is_empty() {
        return;
    }
    let stopword = is_stopword(&text);
    tokens.push(Token {
        text,
        start,
        stopword,
    });
}

/// Non-stopword token texts, for indexing and keyword matching.
pub fn content_terms(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !t.stopword)
        .map(|t| t.text)
        .collect()
}
