//! Character-offset helpers. Every offset in this crate counts Unicode scalar
//! values, never bytes.

use alloc::vec::Vec;

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Byte offset of every character boundary, with the total byte length appended.
#[derive(Debug, Clone)]
pub struct CharIndex {
    bytes: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { bytes }
    }

    pub fn char_len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn byte_offset(&self, char_offset: usize) -> usize {
        self.bytes[char_offset]
    }

    /// Slice `text` by character range. Panics if the range is out of bounds.
    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> &'a str {
        &text[self.bytes[start]..self.bytes[end]]
    }

    /// Convert a byte offset that falls on a character boundary to a character offset.
    pub fn char_offset(&self, byte_offset: usize) -> Option<usize> {
        self.bytes.binary_search(&byte_offset).ok()
    }
}

/// Slice `text` by character range `[start, end)`.
pub fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    CharIndex::new(text).slice(text, start, end)
}

/// A maximal run of non-whitespace characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Split on Unicode whitespace, keeping character offsets.
pub fn whitespace_tokens(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut pos = 0;
    for (byte, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some((cs, bs)) = start.take() {
                tokens.push(Token {
                    text: &text[bs..byte],
                    start: cs,
                    end: pos,
                });
            }
        } else if start.is_none() {
            start = Some((pos, byte));
        }
        pos += 1;
    }
    if let Some((cs, bs)) = start {
        tokens.push(Token {
            text: &text[bs..],
            start: cs,
            end: pos,
        });
    }
    tokens
}

/// Length of the intersection of two half-open intervals.
pub fn overlap(a: (usize, usize), b: (usize, usize)) -> usize {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    hi.saturating_sub(lo)
}
