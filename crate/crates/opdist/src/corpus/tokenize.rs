//! Rule-based tokenizer and sentence splitter.
//!
//! Deterministic by construction: sentences end at `.`, `!` or `?` followed by
//! whitespace (or end of text); tokens split on Unicode whitespace and
//! punctuation, keeping `-` and `'` word-internal so hyphenated shifters stay
//! one token, and emitting the English contraction suffixes `n't` / `'s` as
//! separate tokens so they are matchable as shifter/lexicon entries.

use super::{Sentence, Token};

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '\''
}

fn push_token(tokens: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    debug_assert!(start < end);
    let surface = &text[start..end];
    tokens.push(Token {
        surface: surface.to_string(),
        normalized: surface.to_lowercase(),
        char_span: (start, end),
    });
}

/// Split a word run at contraction suffixes. Returns byte split point
/// relative to the run, if any.
fn contraction_split(run: &str) -> Option<usize> {
    let lower = run.to_lowercase();
    // "isn't" -> is + n't; "can't" -> ca + n't
    if lower.ends_with("n't") && lower.len() > 3 {
        return Some(run.len() - 3);
    }
    if lower.ends_with("'s") && lower.len() > 2 {
        return Some(run.len() - 2);
    }
    None
}

/// Tokenize and sentence-split `text`. Empty text yields no sentences.
pub fn tokenize(text: &str) -> Vec<Sentence> {
    let mut flat: Vec<Token> = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        if is_word_char(c) {
            let mut end = start;
            let mut has_alnum = false;
            while let Some(&(i, ch)) = iter.peek() {
                if is_word_char(ch) {
                    has_alnum |= ch.is_alphanumeric();
                    end = i + ch.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            let run = &text[start..end];
            if !has_alnum {
                // run of bare apostrophes/hyphens: punctuation, one per char
                for (off, ch) in run.char_indices() {
                    push_token(&mut flat, text, start + off, start + off + ch.len_utf8());
                }
            } else if let Some(split) = contraction_split(run) {
                push_token(&mut flat, text, start, start + split);
                push_token(&mut flat, text, start + split, end);
            } else {
                push_token(&mut flat, text, start, end);
            }
        } else {
            // punctuation/symbol: single-char token
            iter.next();
            push_token(&mut flat, text, start, start + c.len_utf8());
        }
    }

    // Sentence boundaries: terminal punctuation followed by whitespace or EOF.
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for tok in flat {
        let terminal = matches!(tok.surface.as_str(), "." | "!" | "?");
        let span_end = tok.char_span.1;
        current.push(tok);
        if terminal {
            let followed_by_ws = text[span_end..]
                .chars()
                .next()
                .map_or(true, |c| c.is_whitespace());
            if followed_by_ws {
                sentences.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
        .into_iter()
        .enumerate()
        .map(|(index, tokens)| Sentence { index, tokens })
        .collect()
}
