//! API cost of running an extraction model over a text volume.
//!
//! All currency arithmetic is exact decimal; rounding happens only when a
//! value is reported.

use alloc::format;
use alloc::string::String;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MILLION: Decimal = Decimal::from_parts(1_000_000, 0, 0, false, 0);

/// Reported amounts at or above this are shown in whole dollars.
const WHOLE_DOLLAR_FROM: Decimal = Decimal::from_parts(1000, 0, 0, false, 0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSheet {
    /// Dollars per million input tokens.
    pub input_per_million: Decimal,
    /// Dollars per million output tokens.
    pub output_per_million: Decimal,
    pub chars_per_token: Decimal,
}

impl PriceSheet {
    pub fn new(input_per_million: Decimal, output_per_million: Decimal, chars_per_token: Decimal) -> Result<Self> {
        let sheet = PriceSheet {
            input_per_million,
            output_per_million,
            chars_per_token,
        };
        sheet.validate()?;
        Ok(sheet)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("input price", self.input_per_million),
            ("output price", self.output_per_million),
            ("chars per token", self.chars_per_token),
        ] {
            if v <= Decimal::ZERO {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Batch tier: $0.15 in, $1.25 out, 4 chars per token.
    pub fn flex() -> Self {
        PriceSheet {
            input_per_million: Decimal::new(15, 2),
            output_per_million: Decimal::new(125, 2),
            chars_per_token: Decimal::from(4),
        }
    }

    /// On-demand tier: $0.30 in, $2.50 out.
    pub fn standard() -> Self {
        PriceSheet {
            input_per_million: Decimal::new(30, 2),
            output_per_million: Decimal::new(250, 2),
            ..Self::flex()
        }
    }

    /// $0.54 in, $4.50 out.
    pub fn priority() -> Self {
        PriceSheet {
            input_per_million: Decimal::new(54, 2),
            output_per_million: Decimal::new(450, 2),
            ..Self::flex()
        }
    }
}

impl Default for PriceSheet {
    fn default() -> Self {
        Self::flex()
    }
}

/// Input volume, either raw characters or already-counted tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputVolume {
    Chars(Decimal),
    Tokens(Decimal),
}

/// Exact (unrounded) cost lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub input_tokens: Decimal,
    pub output_tokens: Decimal,
    pub input_cost: Decimal,
    pub output_cost: Decimal,
    pub total: Decimal,
}

impl CostEstimate {
    /// Total at reporting precision.
    pub fn reported_total(&self) -> Decimal {
        report(self.total)
    }
}

fn non_negative(name: &str, v: Decimal) -> Result<Decimal> {
    if v.is_sign_negative() && !v.is_zero() {
        Err(Error::NegativeCount(format!("{name} = {v}")))
    } else {
        Ok(v)
    }
}

pub fn estimate_cost(input: InputVolume, output_tokens: Decimal, sheet: &PriceSheet) -> Result<CostEstimate> {
    sheet.validate()?;
    let input_tokens = match input {
        InputVolume::Chars(c) => non_negative("input chars", c)? / sheet.chars_per_token,
        InputVolume::Tokens(t) => non_negative("input tokens", t)?,
    };
    let output_tokens = non_negative("output tokens", output_tokens)?;
    let input_cost = input_tokens * sheet.input_per_million / MILLION;
    let output_cost = output_tokens * sheet.output_per_million / MILLION;
    Ok(CostEstimate {
        input_tokens,
        output_tokens,
        input_cost,
        output_cost,
        total: input_cost + output_cost,
    })
}

/// Half-up rounding to cents, or to whole dollars from $1,000 up.
pub fn report(amount: Decimal) -> Decimal {
    let dp = if amount.abs() >= WHOLE_DOLLAR_FROM { 0 } else { 2 };
    amount.round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero)
}

/// `$23,738` or `$10.08`.
pub fn format_usd(amount: Decimal) -> String {
    let r = report(amount);
    let sign = if r.is_sign_negative() && !r.is_zero() { "-" } else { "" };
    let r = r.abs();
    if r >= WHOLE_DOLLAR_FROM {
        format!("{sign}${}", group_thousands(&format!("{r:.0}")))
    } else {
        format!("{sign}${r:.2}")
    }
}

fn group_thousands(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// `a / b`.
pub fn reduction_factor(a: Decimal, b: Decimal) -> Result<Decimal> {
    a.checked_div(b).ok_or(Error::DivisionByZero)
}

/// Round to `digits` significant figures, half-up.
pub fn round_significant(v: Decimal, digits: u32) -> Decimal {
    v.round_sf_with_strategy(digits, RoundingStrategy::MidpointAwayFromZero)
        .unwrap_or(v)
}
