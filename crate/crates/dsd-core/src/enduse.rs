//! Residential end uses and fixed-order end-use sets.
//!
//! The six end uses are a closed enumeration. Their order is fixed so that
//! output columns, driver indices, and serialized tables stay stable across
//! runs and versions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the six residential end uses, in fixed column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndUse {
    SpaceCooling,
    SpaceHeating,
    Lighting,
    WaterHeating,
    Cooking,
    AppliancesOthers,
}

/// Number of end uses. Arrays indexed by [`EndUse::index`] have this length.
pub const END_USE_COUNT: usize = 6;

impl EndUse {
    /// All six end uses in canonical order.
    pub const ALL: [EndUse; END_USE_COUNT] = [
        EndUse::SpaceCooling,
        EndUse::SpaceHeating,
        EndUse::Lighting,
        EndUse::WaterHeating,
        EndUse::Cooking,
        EndUse::AppliancesOthers,
    ];

    /// Stable position of this end use in canonical order.
    pub const fn index(self) -> usize {
        self as usize
    }

    /// Snake-case label used in CSV headers and serialized output.
    pub const fn label(self) -> &'static str {
        match self {
            EndUse::SpaceCooling => "space_cooling",
            EndUse::SpaceHeating => "space_heating",
            EndUse::Lighting => "lighting",
            EndUse::WaterHeating => "water_heating",
            EndUse::Cooking => "cooking",
            EndUse::AppliancesOthers => "appliances_others",
        }
    }
}

impl fmt::Display for EndUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EndUse {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EndUse::ALL
            .iter()
            .copied()
            .find(|u| u.label() == s)
            .ok_or_else(|| format!("unknown end use '{s}'"))
    }
}

/// Subset of end uses, stored as a bitmask over the canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EndUseSet(u8);

impl EndUseSet {
    pub const EMPTY: EndUseSet = EndUseSet(0);

    /// The full set of all six end uses.
    pub fn all() -> Self {
        EndUseSet((1 << END_USE_COUNT) - 1)
    }

    pub fn from_slice(uses: &[EndUse]) -> Self {
        let mut mask = 0u8;
        for u in uses {
            mask |= 1 << u.index();
        }
        EndUseSet(mask)
    }

    pub fn insert(&mut self, u: EndUse) {
        self.0 |= 1 << u.index();
    }

    pub fn contains(self, u: EndUse) -> bool {
        self.0 & (1 << u.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in canonical order.
    pub fn iter(self) -> impl Iterator<Item = EndUse> {
        EndUse::ALL.into_iter().filter(move |u| self.contains(*u))
    }
}

impl Serialize for EndUseSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for EndUseSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let uses = Vec::<EndUse>::deserialize(deserializer)?;
        Ok(EndUseSet::from_slice(&uses))
    }
}
