//! Input unit declarations and conversion to base units.
//!
//! Base units after normalization: persons and households as raw counts,
//! currency in millions of constant currency units, energy in petajoules,
//! emissions in kilotonnes CO2, floor area in square meters.
//!
//! A sidecar TOML file maps each dimensional CSV column to its input unit.
//! The group keys `energy` and `emis` declare a default for all six columns
//! of their kind; a per-column entry overrides the group default:
//!
//! ```toml
//! population = "persons"
//! households = "count"
//! gdp = "billion"
//! hce = "billion"
//! floor_area = "million_m2"
//! energy = "Mtce"
//! emis = "MtCO2"
//! energy_space_cooling = "TWh"   # overrides the group default
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::DatasetError;

/// Carbon intensity is stored internally as ktCO2 per household; reported
/// intensities are kgCO2 per household.
pub const KG_PER_KT: f64 = 1.0e6;

/// Kilotonnes per megatonne, for MtCO2-scale totals.
pub const KT_PER_MT: f64 = 1.0e3;

/// Dimension of a CSV column, selecting which unit table applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Count,
    Currency,
    Energy,
    Emissions,
    Area,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Count => "count",
            Dimension::Currency => "currency",
            Dimension::Energy => "energy",
            Dimension::Emissions => "emissions",
            Dimension::Area => "area",
        }
    }
}

// (unit label, factor to base unit) per dimension. Mtce and Mtoe use the
// conventional 29.3076 GJ/tce and 41.868 GJ/toe equivalents.
const COUNT_UNITS: &[(&str, f64)] = &[
    ("persons", 1.0),
    ("count", 1.0),
    ("thousand", 1.0e3),
    ("million", 1.0e6),
];

const CURRENCY_UNITS: &[(&str, f64)] = &[
    ("unit", 1.0e-6),
    ("thousand", 1.0e-3),
    ("million", 1.0),
    ("billion", 1.0e3),
    ("trillion", 1.0e6),
];

const ENERGY_UNITS: &[(&str, f64)] = &[
    ("GJ", 1.0e-6),
    ("TJ", 1.0e-3),
    ("PJ", 1.0),
    ("EJ", 1.0e3),
    ("GWh", 3.6e-3),
    ("TWh", 3.6),
    ("Mtce", 29.3076),
    ("Mtoe", 41.868),
];

const EMISSION_UNITS: &[(&str, f64)] = &[
    ("kgCO2", 1.0e-6),
    ("tCO2", 1.0e-3),
    ("ktCO2", 1.0),
    ("MtCO2", 1.0e3),
    ("GtCO2", 1.0e6),
];

const AREA_UNITS: &[(&str, f64)] = &[
    ("m2", 1.0),
    ("thousand_m2", 1.0e3),
    ("million_m2", 1.0e6),
    ("km2", 1.0e6),
    ("billion_m2", 1.0e9),
];

fn table(dim: Dimension) -> &'static [(&'static str, f64)] {
    match dim {
        Dimension::Count => COUNT_UNITS,
        Dimension::Currency => CURRENCY_UNITS,
        Dimension::Energy => ENERGY_UNITS,
        Dimension::Emissions => EMISSION_UNITS,
        Dimension::Area => AREA_UNITS,
    }
}

/// Look up the base-unit conversion factor for `unit` within a dimension.
pub fn conversion_factor(dim: Dimension, unit: &str) -> Option<f64> {
    table(dim)
        .iter()
        .find(|(label, _)| *label == unit)
        .map(|(_, f)| *f)
}

/// Parsed sidecar unit declarations.
#[derive(Clone, Debug, Default)]
pub struct UnitConfig {
    entries: BTreeMap<String, String>,
}

impl UnitConfig {
    /// Unit config with every column already in base units. Used when
    /// reloading normalized output.
    pub fn base_units() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("population".to_string(), "persons".to_string());
        entries.insert("households".to_string(), "count".to_string());
        entries.insert("gdp".to_string(), "million".to_string());
        entries.insert("hce".to_string(), "million".to_string());
        entries.insert("floor_area".to_string(), "m2".to_string());
        entries.insert("energy".to_string(), "PJ".to_string());
        entries.insert("emis".to_string(), "ktCO2".to_string());
        UnitConfig { entries }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DatasetError> {
        let entries: BTreeMap<String, String> = toml::from_str(text).map_err(|e| {
            DatasetError::Unit {
                column: "<sidecar>".to_string(),
                message: format!("cannot parse unit declarations: {e}"),
            }
        })?;
        Ok(UnitConfig { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Resolve the conversion factor for one column, honoring group defaults.
    ///
    /// `group` is `Some("energy")` or `Some("emis")` for the per-end-use
    /// columns and `None` for scalar columns.
    pub fn factor(
        &self,
        column: &str,
        group: Option<&str>,
        dim: Dimension,
    ) -> Result<f64, DatasetError> {
        let declared = self
            .entries
            .get(column)
            .or_else(|| group.and_then(|g| self.entries.get(g)));
        let unit = declared.ok_or_else(|| DatasetError::Unit {
            column: column.to_string(),
            message: "no unit declared (add a per-column or group entry to the units file)"
                .to_string(),
        })?;
        conversion_factor(dim, unit).ok_or_else(|| DatasetError::Unit {
            column: column.to_string(),
            message: format!(
                "unit '{unit}' is not convertible as a {} unit",
                dim.name()
            ),
        })
    }
}
