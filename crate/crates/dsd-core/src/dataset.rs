//! Country time-series ingestion: CSV schema, validation, unit
//! normalization, linear year interpolation, and factor-state derivation.
//!
//! The CSV schema is fixed, one row per year:
//!
//! ```text
//! year,population,households,gdp,hce,floor_area,
//! energy_space_cooling,...,energy_appliances_others,
//! emis_space_cooling,...,emis_appliances_others
//! ```
//!
//! `floor_area` may be empty. All other cells must parse. After loading,
//! every value is in base units (see [`crate::units`]).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
use crate::error::DatasetError;
use crate::factors::FactorState;
use crate::units::{Dimension, UnitConfig};

/// One country-year of raw observations, in base units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YearRecord {
    pub year: i32,
    /// Population, persons.
    pub population: f64,
    /// Family households, count.
    pub households: f64,
    /// GDP, million constant currency units.
    pub gdp: f64,
    /// Household consumption expenditure, million constant currency units.
    pub hce: f64,
    /// Residential floor area, square meters. Optional.
    pub floor_area: Option<f64>,
    /// Energy consumption per end use, PJ.
    pub energy: [f64; END_USE_COUNT],
    /// Carbon emissions per end use, ktCO2.
    pub emissions: [f64; END_USE_COUNT],
}

impl YearRecord {
    /// Total end-use energy, PJ.
    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// Total emissions, ktCO2.
    pub fn total_emissions(&self) -> f64 {
        self.emissions.iter().sum()
    }

    fn check(&self, row: usize) -> Result<(), DatasetError> {
        let fail = |message: String| DatasetError::Validation {
            row,
            year: Some(self.year),
            message,
        };
        let positive = [
            ("population", self.population),
            ("households", self.households),
            ("gdp", self.gdp),
            ("hce", self.hce),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(fail(format!("column '{name}' must be positive (got {value})")));
            }
        }
        if let Some(fa) = self.floor_area {
            if !fa.is_finite() || fa <= 0.0 {
                return Err(fail(format!(
                    "column 'floor_area' must be positive when present (got {fa})"
                )));
            }
        }
        for u in EndUse::ALL {
            let e = self.energy[u.index()];
            let c = self.emissions[u.index()];
            if !e.is_finite() || e < 0.0 {
                return Err(fail(format!(
                    "column 'energy_{}' must be nonnegative (got {e})",
                    u.label()
                )));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(fail(format!(
                    "column 'emis_{}' must be nonnegative (got {c})",
                    u.label()
                )));
            }
            if c > 0.0 && e == 0.0 {
                return Err(fail(format!(
                    "end use '{}' has emissions without energy",
                    u.label()
                )));
            }
        }
        Ok(())
    }
}

/// A validated, unit-normalized country time series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub country: String,
    /// Records sorted ascending by year, unique years.
    pub records: Vec<YearRecord>,
    /// End uses with nonzero energy in at least one record.
    pub active_uses: EndUseSet,
}

const SCALAR_COLUMNS: [&str; 6] = [
    "year",
    "population",
    "households",
    "gdp",
    "hce",
    "floor_area",
];

/// The exact expected CSV header, in order.
pub fn csv_header() -> Vec<String> {
    let mut header: Vec<String> = SCALAR_COLUMNS.iter().map(|s| s.to_string()).collect();
    for u in EndUse::ALL {
        header.push(format!("energy_{}", u.label()));
    }
    for u in EndUse::ALL {
        header.push(format!("emis_{}", u.label()));
    }
    header
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64, DatasetError> {
    let trimmed = raw.trim();
    trimmed.parse::<f64>().map_err(|_| DatasetError::Parse {
        row,
        column: column.to_string(),
        message: format!("cannot parse '{trimmed}' as a number"),
    })
}

/// Load a dataset from CSV bytes, converting every dimensional column to
/// base units according to `units`.
pub fn load_dataset(
    source: impl Read,
    units: &UnitConfig,
    country: &str,
) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(source);

    let expected = csv_header();
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Schema(format!("cannot read header: {e}")))?
        .clone();
    let found: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    for col in &expected {
        if !found.contains(&col.as_str()) {
            return Err(DatasetError::Schema(format!("missing column '{col}'")));
        }
    }
    for col in &found {
        if !expected.iter().any(|e| e == col) {
            return Err(DatasetError::Schema(format!("unknown column '{col}'")));
        }
    }
    for (i, col) in expected.iter().enumerate() {
        if found[i] != col {
            return Err(DatasetError::Schema(format!(
                "column '{}' found where '{col}' was expected (position {})",
                found[i],
                i + 1
            )));
        }
    }

    // Resolve conversion factors up front. Floor area may stay undeclared as
    // long as the column is empty everywhere.
    let f_pop = units.factor("population", None, Dimension::Count)?;
    let f_house = units.factor("households", None, Dimension::Count)?;
    let f_gdp = units.factor("gdp", None, Dimension::Currency)?;
    let f_hce = units.factor("hce", None, Dimension::Currency)?;
    let f_floor = units.factor("floor_area", None, Dimension::Area).ok();
    let mut f_energy = [1.0; END_USE_COUNT];
    let mut f_emis = [1.0; END_USE_COUNT];
    for u in EndUse::ALL {
        f_energy[u.index()] = units.factor(
            &format!("energy_{}", u.label()),
            Some("energy"),
            Dimension::Energy,
        )?;
        f_emis[u.index()] = units.factor(
            &format!("emis_{}", u.label()),
            Some("emis"),
            Dimension::Emissions,
        )?;
    }

    let mut records = Vec::new();
    for (idx, result) in reader.records().enumerate() {
        let row = idx + 1;
        let record = result.map_err(|e| DatasetError::Parse {
            row,
            column: "<row>".to_string(),
            message: e.to_string(),
        })?;
        if record.len() != expected.len() {
            return Err(DatasetError::Parse {
                row,
                column: "<row>".to_string(),
                message: format!("expected {} cells, found {}", expected.len(), record.len()),
            });
        }
        let cell = |i: usize| record.get(i).unwrap_or("");

        let year_raw = cell(0).trim();
        let year: i32 = year_raw.parse().map_err(|_| DatasetError::Parse {
            row,
            column: "year".to_string(),
            message: format!("cannot parse '{year_raw}' as a year"),
        })?;

        let floor_area = match cell(5).trim() {
            "" => None,
            raw => {
                let factor = f_floor.ok_or_else(|| DatasetError::Unit {
                    column: "floor_area".to_string(),
                    message: "no unit declared but values are present".to_string(),
                })?;
                Some(parse_cell(raw, row, "floor_area")? * factor)
            }
        };

        let mut energy = [0.0; END_USE_COUNT];
        let mut emissions = [0.0; END_USE_COUNT];
        for u in EndUse::ALL {
            let i = u.index();
            energy[i] = parse_cell(cell(6 + i), row, &format!("energy_{}", u.label()))?
                * f_energy[i];
            emissions[i] = parse_cell(cell(12 + i), row, &format!("emis_{}", u.label()))?
                * f_emis[i];
        }

        let rec = YearRecord {
            year,
            population: parse_cell(cell(1), row, "population")? * f_pop,
            households: parse_cell(cell(2), row, "households")? * f_house,
            gdp: parse_cell(cell(3), row, "gdp")? * f_gdp,
            hce: parse_cell(cell(4), row, "hce")? * f_hce,
            floor_area,
            energy,
            emissions,
        };
        rec.check(row)?;
        records.push(rec);
    }

    records.sort_by_key(|r| r.year);
    for pair in records.windows(2) {
        if pair[0].year == pair[1].year {
            return Err(DatasetError::Validation {
                row: 0,
                year: Some(pair[0].year),
                message: format!("duplicate year {}", pair[0].year),
            });
        }
    }

    let active_uses = infer_active(&records);
    Ok(Dataset {
        country: country.to_string(),
        records,
        active_uses,
    })
}

fn infer_active(records: &[YearRecord]) -> EndUseSet {
    let mut active = EndUseSet::EMPTY;
    for u in EndUse::ALL {
        if records.iter().any(|r| r.energy[u.index()] > 0.0) {
            active.insert(u);
        }
    }
    active
}

/// Fill every missing interior year by linear interpolation of each raw
/// column independently. Endpoint records are unchanged.
pub fn interpolate_years(ds: &Dataset) -> Result<Dataset, DatasetError> {
    if ds.records.len() < 2 {
        return Err(DatasetError::TooFewRecords(ds.records.len()));
    }
    let mut records = Vec::new();
    for pair in ds.records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        records.push(a.clone());
        for year in (a.year + 1)..b.year {
            let t = f64::from(year - a.year) / f64::from(b.year - a.year);
            let lerp = |x: f64, y: f64| x + t * (y - x);
            let floor_area = match (a.floor_area, b.floor_area) {
                (Some(x), Some(y)) => Some(lerp(x, y)),
                _ => None,
            };
            let mut energy = [0.0; END_USE_COUNT];
            let mut emissions = [0.0; END_USE_COUNT];
            for i in 0..END_USE_COUNT {
                energy[i] = lerp(a.energy[i], b.energy[i]);
                emissions[i] = lerp(a.emissions[i], b.emissions[i]);
            }
            let rec = YearRecord {
                year,
                population: lerp(a.population, b.population),
                households: lerp(a.households, b.households),
                gdp: lerp(a.gdp, b.gdp),
                hce: lerp(a.hce, b.hce),
                floor_area,
                energy,
                emissions,
            };
            rec.check(0)?;
            records.push(rec);
        }
    }
    records.push(ds.records.last().unwrap().clone());
    Ok(Dataset {
        country: ds.country.clone(),
        active_uses: ds.active_uses,
        records,
    })
}

impl Dataset {
    pub fn first_year(&self) -> Option<i32> {
        self.records.first().map(|r| r.year)
    }

    pub fn last_year(&self) -> Option<i32> {
        self.records.last().map(|r| r.year)
    }

    pub fn record(&self, year: i32) -> Option<&YearRecord> {
        self.records.iter().find(|r| r.year == year)
    }

    /// Derive the factor state for one year.
    ///
    /// For an active end use with zero energy in this particular record, the
    /// emission factor is carried from the nearest record where that use has
    /// energy (ties break toward the earlier year), so factor paths stay
    /// continuous while the use's share term contributes exactly zero.
    pub fn factor_state(&self, year: i32) -> Result<FactorState, DatasetError> {
        let record = self
            .record(year)
            .ok_or(DatasetError::YearOutOfRange(year))?;
        let mut carried = [None; END_USE_COUNT];
        for u in self.active_uses.iter() {
            let i = u.index();
            if record.energy[i] == 0.0 {
                carried[i] = self.nearest_emission_factor(year, u);
            }
        }
        FactorState::from_record(record, self.active_uses, &carried)
            .map_err(|e| DatasetError::Validation {
                row: 0,
                year: Some(year),
                message: e.to_string(),
            })
    }

    fn nearest_emission_factor(&self, year: i32, u: EndUse) -> Option<f64> {
        let i = u.index();
        self.records
            .iter()
            .filter(|r| r.energy[i] > 0.0)
            .min_by_key(|r| ((r.year - year).abs(), r.year > year))
            .map(|r| r.emissions[i] / r.energy[i])
    }

    /// Write the dataset back out in schema order, full precision, base units.
    pub fn write_csv(&self, mut w: impl Write) -> Result<(), DatasetError> {
        writeln!(w, "{}", csv_header().join(","))?;
        for r in &self.records {
            let mut cells: Vec<String> = vec![
                r.year.to_string(),
                format!("{}", r.population),
                format!("{}", r.households),
                format!("{}", r.gdp),
                format!("{}", r.hce),
                r.floor_area.map(|v| format!("{v}")).unwrap_or_default(),
            ];
            for v in r.energy {
                cells.push(format!("{v}"));
            }
            for v in r.emissions {
                cells.push(format!("{v}"));
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
