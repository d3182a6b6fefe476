use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// The unified PHI label set shared by every corpus after mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Age,
    Date,
    Doctor,
    Hospital,
    Id,
    Location,
    Other,
    Patient,
    Phone,
    Web,
}

impl Category {
    /// All ten members in alphabetical order of their names.
    pub const ALL: [Category; 10] = [
        Category::Age,
        Category::Date,
        Category::Doctor,
        Category::Hospital,
        Category::Id,
        Category::Location,
        Category::Other,
        Category::Patient,
        Category::Phone,
        Category::Web,
    ];

    /// The nine categories that enter evaluation aggregates (everything but OTHER).
    pub const EVALUATED: [Category; 9] = [
        Category::Age,
        Category::Date,
        Category::Doctor,
        Category::Hospital,
        Category::Id,
        Category::Location,
        Category::Patient,
        Category::Phone,
        Category::Web,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            Category::Age => "AGE",
            Category::Date => "DATE",
            Category::Doctor => "DOCTOR",
            Category::Hospital => "HOSPITAL",
            Category::Id => "ID",
            Category::Location => "LOCATION",
            Category::Other => "OTHER",
            Category::Patient => "PATIENT",
            Category::Phone => "PHONE",
            Category::Web => "WEB",
        }
    }

    /// Position in [`Category::ALL`].
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn is_evaluated(self) -> bool {
        !matches!(self, Category::Other)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl AsRef<str> for Category {
    fn as_ref(&self) -> &str {
        self.as_str()
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = alloc::string::String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
