use alloc::string::String;
use alloc::vec::Vec;

use super::dates::CaseStyle;
use super::key::{KeyedStream, SurrogateKey};
use super::pools;
use crate::{Category, Error, Result};

const MAX_ROUNDS: u32 = 64;

/// Release band for an age in years: 0-17, 18-29, 30-44, 45-59, 60-74, 75-89, 90+.
pub fn age_band(years: u32) -> &'static str {
    match years {
        0..=17 => "0-17",
        18..=29 => "18-29",
        30..=44 => "30-44",
        45..=59 => "45-59",
        60..=74 => "60-74",
        75..=89 => "75-89",
        _ => "90+",
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Alpha,
    Digit,
    Other,
}

fn class(c: char) -> Class {
    if c.is_alphabetic() {
        Class::Alpha
    } else if c.is_ascii_digit() {
        Class::Digit
    } else {
        Class::Other
    }
}

/// Maximal runs of one character class, in order.
fn runs(text: &str) -> Vec<(Class, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut current: Option<Class> = None;
    for (i, c) in text.char_indices() {
        let k = class(c);
        if current != Some(k) {
            if let Some(prev) = current {
                out.push((prev, &text[start..i]));
            }
            start = i;
            current = Some(k);
        }
    }
    if let Some(prev) = current {
        out.push((prev, &text[start..]));
    }
    out
}

/// Keyed pool entry for `word`, never equal to it (ignoring case) unless the
/// pool offers nothing else.
fn pick<'p, S: AsRef<str>>(key: &SurrogateKey, domain: &str, word: &str, pool: &'p [S]) -> &'p str {
    let lower = word.to_lowercase();
    let start = key.index(domain, lower.as_bytes(), pool.len());
    (0..pool.len())
        .map(|k| pool[(start + k) % pool.len()].as_ref())
        .find(|w| w.to_lowercase() != lower)
        .unwrap_or(pool[start].as_ref())
}

fn styled(replacement: &str, original: &str) -> String {
    CaseStyle::of(original).apply(replacement)
}

/// Keyed stream output of the same shape as `original` that differs from it.
fn redraw(original: &str, domain: &str, key: &SurrogateKey, mut draw: impl FnMut(&mut KeyedStream, char) -> char) -> String {
    let mut last = String::from(original);
    for round in 0..MAX_ROUNDS {
        let mut s = KeyedStream::new(key, domain, original.as_bytes(), round);
        last = original.chars().map(|c| draw(&mut s, c)).collect();
        if last != original {
            break;
        }
    }
    last
}

fn digits(run: &str, key: &SurrogateKey) -> String {
    redraw(run, "digits", key, |s, _| s.digit())
}

fn initial(letter: &str, key: &SurrogateKey) -> String {
    let lower = letter.to_lowercase();
    let new = redraw(&lower, "initial", key, |s, _| s.letter());
    styled(&new, letter)
}

fn names(text: &str, key: &SurrogateKey) -> String {
    let parts = runs(text);
    let alpha: Vec<usize> = parts
        .iter()
        .enumerate()
        .filter(|(_, (k, _))| *k == Class::Alpha)
        .map(|(i, _)| i)
        .collect();
    // "Last, First" puts the surname first; otherwise it comes last.
    let last_at = match alpha.first() {
        Some(&first) if parts[first + 1..].first().is_some_and(|(_, s)| s.trim_start().starts_with(',')) => Some(first),
        _ => alpha.last().copied(),
    };
    let mut out = String::with_capacity(text.len());
    for (i, (k, s)) in parts.iter().enumerate() {
        match k {
            Class::Alpha if s.chars().count() == 1 => out.push_str(&initial(s, key)),
            Class::Alpha if Some(i) == last_at => out.push_str(&styled(pick(key, "last", s, &key.last_names), s)),
            Class::Alpha => out.push_str(&styled(pick(key, "first", s, &key.first_names), s)),
            Class::Digit => out.push_str(&digits(s, key)),
            Class::Other => out.push_str(s),
        }
    }
    out
}

/// Alphabetic runs through `word`, digit runs rehashed, everything else kept.
fn template(text: &str, key: &SurrogateKey, mut word: impl FnMut(&str) -> String) -> String {
    runs(text)
        .into_iter()
        .map(|(k, s)| match k {
            Class::Alpha => word(s),
            Class::Digit => digits(s, key),
            Class::Other => String::from(s),
        })
        .collect()
}

fn location(text: &str, key: &SurrogateKey) -> String {
    template(text, key, |s| {
        if s.chars().count() == 2 && s.chars().all(|c| c.is_uppercase()) {
            String::from(pick(key, "region", s, pools::REGION_CODES))
        } else {
            styled(pick(key, "place", s, pools::PLACE_WORDS), s)
        }
    })
}

fn web(text: &str, key: &SurrogateKey) -> String {
    template(text, key, |s| {
        if pools::WEB_KEEP.contains(&s.to_lowercase().as_str()) {
            String::from(s)
        } else {
            styled(pick(key, "web", s, pools::WEB_WORDS), s)
        }
    })
}

fn identifier(text: &str, key: &SurrogateKey) -> String {
    let upper = !text.chars().any(|c| c.is_lowercase());
    redraw(text, "id", key, |s, c| {
        if c.is_alphanumeric() {
            let h = s.hex();
            if upper {
                h.to_ascii_uppercase()
            } else {
                h
            }
        } else {
            c
        }
    })
}

fn phone(text: &str, key: &SurrogateKey) -> String {
    redraw(text, "phone", key, |s, c| if c.is_ascii_digit() { s.digit() } else { c })
}

/// Letters and digits redrawn, case and punctuation kept.
fn shape(text: &str, key: &SurrogateKey) -> String {
    redraw(text, "shape", key, |s, c| {
        if c.is_ascii_digit() {
            s.digit()
        } else if c.is_alphabetic() {
            let l = s.letter();
            if c.is_uppercase() {
                l.to_ascii_uppercase()
            } else {
                l
            }
        } else {
            c
        }
    })
}

fn age(text: &str, key: &SurrogateKey) -> String {
    let parts = runs(text);
    if !parts.iter().any(|(k, _)| *k == Class::Digit) {
        return shape(text, key);
    }
    let mut out = String::new();
    let mut skip_plus = false;
    for (k, s) in parts {
        match k {
            Class::Digit => {
                let years = s.parse::<u32>().unwrap_or(u32::MAX);
                out.push_str(age_band(years));
                skip_plus = true;
            }
            // "90+" is already a band marker once the number is banded
            Class::Other if skip_plus && s.starts_with('+') => {
                out.push_str(&s[1..]);
                skip_plus = false;
            }
            _ => {
                out.push_str(s);
                skip_plus = false;
            }
        }
    }
    out
}

/// Keyed surrogate for one non-date PHI span.
///
/// Output depends only on `(span_text, category, key)`, so a repeated name
/// maps to the same surrogate everywhere under one key.
pub fn surrogate_for(span_text: &str, category: Category, key: &SurrogateKey) -> Result<String> {
    Ok(match category {
        Category::Patient | Category::Doctor => names(span_text, key),
        Category::Id => identifier(span_text, key),
        Category::Phone => {
            if span_text.chars().any(|c| c.is_ascii_digit()) {
                phone(span_text, key)
            } else {
                shape(span_text, key)
            }
        }
        Category::Location => location(span_text, key),
        Category::Hospital => template(span_text, key, |s| styled(pick(key, "hospital", s, pools::INSTITUTION_WORDS), s)),
        Category::Web => web(span_text, key),
        Category::Age => age(span_text, key),
        Category::Other => shape(span_text, key),
        Category::Date => return Err(Error::UnsupportedCategory(category)),
    })
}
