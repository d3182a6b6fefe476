//! Date recognition and format-preserving day shifts.
//!
//! Recognized shapes: `MM/DD/YYYY` and `M/D/YYYY` (also with `-`),
//! `M/D/YY`, partial `M/D`, ISO `YYYY-MM-DD` (including the date part of a
//! timestamp) and `Month DD, YYYY` / `Month DD YYYY` with full or three-letter
//! month names. Times, weekday names and relative words are never matched.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate, TimeDelta};

use crate::{Error, Result};

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

/// Leap year used to validate dates that carry no year.
const LEAP_REFERENCE: i32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YearStyle {
    Four,
    /// Two digits; 00-49 read as 20xx, 50-99 as 19xx.
    Two,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStyle {
    Upper,
    Lower,
    Title,
}

impl CaseStyle {
    pub(crate) fn of(word: &str) -> CaseStyle {
        if word.chars().all(|c| !c.is_lowercase()) {
            CaseStyle::Upper
        } else if word.chars().all(|c| !c.is_uppercase()) {
            CaseStyle::Lower
        } else {
            CaseStyle::Title
        }
    }

    pub(crate) fn apply(self, word: &str) -> String {
        match self {
            CaseStyle::Upper => word.to_uppercase(),
            CaseStyle::Lower => word.to_lowercase(),
            CaseStyle::Title => {
                let mut cs = word.chars();
                match cs.next() {
                    Some(f) => f.to_uppercase().chain(cs.flat_map(char::to_lowercase)).collect(),
                    None => String::new(),
                }
            }
        }
    }
}

/// Surface shape of a recognized date, enough to re-render it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DateFormat {
    /// Month first, numeric, `sep` between fields.
    Numeric {
        sep: char,
        month_pad: bool,
        day_pad: bool,
        year: YearStyle,
    },
    /// `YYYY-MM-DD`.
    Iso,
    /// Month name, day, year, with the original separators kept verbatim.
    MonthName {
        abbreviated: bool,
        period: bool,
        case: CaseStyle,
        day_pad: bool,
        before_day: String,
        before_year: String,
    },
}

/// A date found in text. Offsets are character offsets into the scanned text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDate {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub year: Option<i32>,
    pub month: u32,
    pub day: u32,
    pub format: DateFormat,
}

fn valid(year: Option<i32>, month: u32, day: u32) -> bool {
    NaiveDate::from_ymd_opt(year.unwrap_or(LEAP_REFERENCE), month, day).is_some()
}

fn digits_at(chars: &[char], i: usize) -> usize {
    chars[i..].iter().take_while(|c| c.is_ascii_digit()).count()
}

fn number(chars: &[char], i: usize, n: usize) -> u32 {
    chars[i..i + n].iter().fold(0, |acc, c| acc * 10 + c.to_digit(10).unwrap_or(0))
}

fn collect(chars: &[char], start: usize, end: usize) -> String {
    chars[start..end].iter().collect()
}

/// Padding is explicit when the field has a leading zero or a single digit;
/// otherwise it follows the sibling field, defaulting to padded.
fn padding(field: &[char], sibling: &[char]) -> bool {
    match (field.len(), field.first(), sibling.len(), sibling.first()) {
        (1, ..) => false,
        (2, Some('0'), ..) => true,
        (_, _, 1, _) => false,
        _ => true,
    }
}

fn scan_iso(chars: &[char], i: usize) -> Option<ParsedDate> {
    let n = chars.len();
    if i + 10 > n || digits_at(chars, i) != 4 || chars[i + 4] != '-' || chars[i + 7] != '-' {
        return None;
    }
    if digits_at(chars, i + 5) != 2 || digits_at(chars, i + 8) != 2 {
        return None;
    }
    if i + 10 < n && chars[i + 10].is_ascii_digit() {
        return None;
    }
    let (y, m, d) = (number(chars, i, 4) as i32, number(chars, i + 5, 2), number(chars, i + 8, 2));
    valid(Some(y), m, d).then(|| ParsedDate {
        text: collect(chars, i, i + 10),
        start: i,
        end: i + 10,
        year: Some(y),
        month: m,
        day: d,
        format: DateFormat::Iso,
    })
}

fn scan_numeric(chars: &[char], i: usize) -> Option<ParsedDate> {
    let n = chars.len();
    let ml = digits_at(chars, i);
    if !(1..=2).contains(&ml) || i + ml >= n {
        return None;
    }
    let sep = chars[i + ml];
    if sep != '/' && sep != '-' {
        return None;
    }
    let ds = i + ml + 1;
    let dl = if ds < n { digits_at(chars, ds) } else { 0 };
    if !(1..=2).contains(&dl) {
        return None;
    }
    let mut end = ds + dl;
    let mut year = None;
    let mut style = YearStyle::Absent;
    if end + 1 < n && chars[end] == sep && chars[end + 1].is_ascii_digit() {
        let yl = digits_at(chars, end + 1);
        let y = number(chars, end + 1, yl.min(4)) as i32;
        match yl {
            4 => {
                year = Some(y);
                style = YearStyle::Four;
            }
            2 => {
                year = Some(if y < 50 { 2000 + y } else { 1900 + y });
                style = YearStyle::Two;
            }
            _ => return None,
        }
        end += 1 + yl;
    } else if end < n && (chars[end] == sep || chars[end].is_ascii_digit()) {
        return None;
    }
    if style == YearStyle::Absent && sep != '/' {
        return None;
    }
    // Reject tails that continue a numeric expression: "1/2.5", "4/12:30".
    if end + 1 < n && matches!(chars[end], '.' | ':' | ',' | '/') && chars[end + 1].is_ascii_digit() {
        return None;
    }
    let (m, d) = (number(chars, i, ml), number(chars, ds, dl));
    if !valid(year, m, d) {
        return None;
    }
    let month_field = &chars[i..i + ml];
    let day_field = &chars[ds..ds + dl];
    Some(ParsedDate {
        text: collect(chars, i, end),
        start: i,
        end,
        year,
        month: m,
        day: d,
        format: DateFormat::Numeric {
            sep,
            month_pad: padding(month_field, day_field),
            day_pad: padding(day_field, month_field),
            year: style,
        },
    })
}

fn month_from_word(word: &str) -> Option<(u32, bool)> {
    let lower = word.to_lowercase();
    MONTHS.iter().enumerate().find_map(|(k, full)| {
        if lower == *full {
            Some((k as u32 + 1, false))
        } else if lower.len() == 3 && full.starts_with(lower.as_str()) {
            Some((k as u32 + 1, true))
        } else {
            None
        }
    })
}

fn scan_month_name(chars: &[char], i: usize) -> Option<ParsedDate> {
    let n = chars.len();
    let wl = chars[i..].iter().take_while(|c| c.is_alphabetic()).count();
    let word = collect(chars, i, i + wl);
    let (month, abbreviated) = month_from_word(&word)?;
    let mut p = i + wl;
    let period = abbreviated && p < n && chars[p] == '.';
    if period {
        p += 1;
    }
    let gap_start = p;
    while p < n && (chars[p] == ' ' || chars[p] == '\u{a0}') {
        p += 1;
    }
    if p == gap_start || p >= n {
        return None;
    }
    let before_day = collect(chars, gap_start, p);
    let dl = digits_at(chars, p);
    if !(1..=2).contains(&dl) {
        return None;
    }
    let day_field = &chars[p..p + dl];
    let day = number(chars, p, dl);
    p += dl;
    let gap_start = p;
    if p < n && chars[p] == ',' {
        p += 1;
    }
    let spaces = p;
    while p < n && (chars[p] == ' ' || chars[p] == '\u{a0}') {
        p += 1;
    }
    if p == spaces || p >= n || digits_at(chars, p) != 4 {
        return None;
    }
    let before_year = collect(chars, gap_start, p);
    let year = number(chars, p, 4) as i32;
    p += 4;
    if p < n && chars[p].is_ascii_digit() {
        return None;
    }
    valid(Some(year), month, day).then(|| ParsedDate {
        text: collect(chars, i, p),
        start: i,
        end: p,
        year: Some(year),
        month,
        day,
        format: DateFormat::MonthName {
            abbreviated,
            period,
            case: CaseStyle::of(&word),
            day_pad: dl == 2 && day_field[0] == '0',
            before_day,
            before_year,
        },
    })
}

/// Every date in `text`, left to right, non-overlapping.
pub fn parse_dates(text: &str) -> Vec<ParsedDate> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prev = i.checked_sub(1).map(|k| chars[k]);
        let found = if c.is_ascii_digit() {
            let boundary = !matches!(prev, Some(p) if p.is_alphanumeric() || matches!(p, '/' | '-' | '.' | ':' | ','));
            if boundary {
                scan_iso(&chars, i).or_else(|| scan_numeric(&chars, i))
            } else {
                None
            }
        } else if c.is_alphabetic() && !matches!(prev, Some(p) if p.is_alphabetic()) {
            scan_month_name(&chars, i)
        } else {
            None
        };
        match found {
            Some(d) => {
                i = d.end;
                out.push(d);
            }
            None if c.is_alphabetic() => {
                // skip the rest of the word
                while i < chars.len() && chars[i].is_alphabetic() {
                    i += 1;
                }
            }
            None => i += 1,
        }
    }
    out
}

fn pad(v: u32, padded: bool) -> String {
    if padded {
        format!("{v:02}")
    } else {
        v.to_string()
    }
}

fn render(format: &DateFormat, date: NaiveDate) -> String {
    let (y, m, d) = (date.year(), date.month(), date.day());
    match format {
        DateFormat::Iso => format!("{y:04}-{m:02}-{d:02}"),
        DateFormat::Numeric { sep, month_pad, day_pad, year } => {
            let md = format!("{}{sep}{}", pad(m, *month_pad), pad(d, *day_pad));
            match year {
                YearStyle::Four => format!("{md}{sep}{y:04}"),
                YearStyle::Two => format!("{md}{sep}{:02}", y.rem_euclid(100)),
                YearStyle::Absent => md,
            }
        }
        DateFormat::MonthName {
            abbreviated,
            period,
            case,
            day_pad,
            before_day,
            before_year,
        } => {
            let full = MONTHS[m as usize - 1];
            let name = if *abbreviated { &full[..3] } else { full };
            let dot = if *period { "." } else { "" };
            format!("{}{dot}{before_day}{}{before_year}{y:04}", case.apply(name), pad(d, *day_pad))
        }
    }
}

/// Shift `d` by `jitter` days and render it in its original format.
///
/// Dates without a year are resolved against `reference_year` for the
/// arithmetic and rendered without a year again.
pub fn shift_date(d: &ParsedDate, jitter: i64, reference_year: Option<i32>) -> Result<String> {
    let year = d
        .year
        .or(reference_year)
        .ok_or_else(|| Error::UnresolvableDate(d.text.clone()))?;
    let date = NaiveDate::from_ymd_opt(year, d.month, d.day).ok_or_else(|| Error::UnresolvableDate(d.text.clone()))?;
    let shifted = date
        .checked_add_signed(TimeDelta::days(jitter))
        .ok_or_else(|| Error::UnresolvableDate(d.text.clone()))?;
    Ok(render(&d.format, shifted))
}
