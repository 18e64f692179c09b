use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four test smells handled by the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmellKind {
    EagerTest,
    MysteryGuest,
    ResourceOptimism,
    TestRedundancy,
}

impl SmellKind {
    pub const ALL: [SmellKind; 4] = [
        SmellKind::EagerTest,
        SmellKind::MysteryGuest,
        SmellKind::ResourceOptimism,
        SmellKind::TestRedundancy,
    ];

    /// Short name used on the command line and in detection CSVs.
    pub fn short_name(self) -> &'static str {
        match self {
            SmellKind::EagerTest => "eager",
            SmellKind::MysteryGuest => "mystery",
            SmellKind::ResourceOptimism => "resource_optimism",
            SmellKind::TestRedundancy => "redundancy",
        }
    }

    /// Column holding this smell's label in a labeled CSV.
    pub fn label_column(self) -> &'static str {
        match self {
            SmellKind::EagerTest => "label_eager",
            SmellKind::MysteryGuest => "label_mystery",
            SmellKind::ResourceOptimism => "label_resource_optimism",
            SmellKind::TestRedundancy => "label_redundancy",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SmellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SmellKind::ALL
            .into_iter()
            .find(|k| k.short_name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown smell `{s}`")))
    }
}
