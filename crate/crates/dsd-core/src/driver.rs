//! The sixteen exogenous drivers of carbon-intensity change.
//!
//! Four scalar drivers (energy intensity, household size, GDP per capita,
//! expenditure share) plus one emission-factor driver and one share-shift
//! driver per end use. Drivers for inactive end uses exist but always carry
//! zero deltas and zero contributions.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, END_USE_COUNT};

/// Identifier of one exogenous driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DriverId {
    /// Total HCE-related energy intensity, e.
    EnergyIntensity,
    /// Household size, p = P/H.
    HouseholdSize,
    /// GDP per capita, g = G/P.
    GdpPerCapita,
    /// Household expenditure index, s = S/G.
    ExpenditureShare,
    /// Emission factor of one end use, k_u.
    EmissionFactor(EndUse),
    /// Share-shift component of one end use, F_u.
    ShareShift(EndUse),
}

/// Number of drivers.
pub const DRIVER_COUNT: usize = 4 + 2 * END_USE_COUNT;

impl DriverId {
    /// All sixteen drivers in canonical column order:
    /// e, p, g, s, k per end use, F per end use.
    pub fn all() -> [DriverId; DRIVER_COUNT] {
        let mut out = [DriverId::EnergyIntensity; DRIVER_COUNT];
        out[1] = DriverId::HouseholdSize;
        out[2] = DriverId::GdpPerCapita;
        out[3] = DriverId::ExpenditureShare;
        for u in EndUse::ALL {
            out[4 + u.index()] = DriverId::EmissionFactor(u);
            out[4 + END_USE_COUNT + u.index()] = DriverId::ShareShift(u);
        }
        out
    }

    /// Stable column index in the exogenous vector.
    pub const fn index(self) -> usize {
        match self {
            DriverId::EnergyIntensity => 0,
            DriverId::HouseholdSize => 1,
            DriverId::GdpPerCapita => 2,
            DriverId::ExpenditureShare => 3,
            DriverId::EmissionFactor(u) => 4 + u.index(),
            DriverId::ShareShift(u) => 4 + END_USE_COUNT + u.index(),
        }
    }

    pub fn label(self) -> String {
        match self {
            DriverId::EnergyIntensity => "energy_intensity".to_string(),
            DriverId::HouseholdSize => "household_size".to_string(),
            DriverId::GdpPerCapita => "gdp_per_capita".to_string(),
            DriverId::ExpenditureShare => "expenditure_share".to_string(),
            DriverId::EmissionFactor(u) => format!("emission_factor_{}", u.label()),
            DriverId::ShareShift(u) => format!("share_shift_{}", u.label()),
        }
    }
}

impl fmt::Display for DriverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One f64 per driver, indexed by [`DriverId`].
///
/// Serializes as a map keyed by driver label, in canonical driver order.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DriverVec(pub [f64; DRIVER_COUNT]);

impl DriverVec {
    pub fn zeros() -> Self {
        DriverVec([0.0; DRIVER_COUNT])
    }

    pub fn iter(&self) -> impl Iterator<Item = (DriverId, f64)> + '_ {
        DriverId::all().into_iter().map(|d| (d, self.0[d.index()]))
    }

    /// Sum over all sixteen drivers.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of absolute values.
    pub fn abs_total(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.0 {
            *v *= factor;
        }
    }

    pub fn add_assign(&mut self, other: &DriverVec) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }
}

impl Index<DriverId> for DriverVec {
    type Output = f64;
    fn index(&self, id: DriverId) -> &f64 {
        &self.0[id.index()]
    }
}

impl IndexMut<DriverId> for DriverVec {
    fn index_mut(&mut self, id: DriverId) -> &mut f64 {
        &mut self.0[id.index()]
    }
}

impl Serialize for DriverVec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(DRIVER_COUNT))?;
        for (id, v) in self.iter() {
            map.serialize_entry(&id.label(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DriverVec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let entries = std::collections::BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut out = DriverVec::zeros();
        for (key, value) in entries {
            let id = DriverId::all()
                .into_iter()
                .find(|d| d.label() == key)
                .ok_or_else(|| D::Error::custom(format!("unknown driver '{key}'")))?;
            out[id] = value;
        }
        Ok(out)
    }
}
