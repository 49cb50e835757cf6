//! Decarbonization scales derived from chained decomposition results.
//!
//! Decarbonization here means avoided emissions: the negative driver
//! contributions to intensity change, scaled by households. Efficiency is
//! the avoided share of the counterfactual total, D / (C + D). Both are
//! reconstructed definitions; they are recorded in output metadata so
//! downstream consumers know which convention produced the numbers.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, YearRecord};
use crate::driver::DriverId;
use crate::engine::DecompositionResult;
use crate::error::MetricsError;
use crate::units::KT_PER_MT;

/// Which negative drivers count toward decarbonization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeDriverPolicy {
    /// Every driver with a negative contribution.
    All,
    /// Only energy intensity and the per-end-use emission factors.
    IntensityFactor,
}

impl NegativeDriverPolicy {
    pub fn label(self) -> &'static str {
        match self {
            NegativeDriverPolicy::All => "all",
            NegativeDriverPolicy::IntensityFactor => "intensity-factor",
        }
    }

    fn counts(self, id: DriverId) -> bool {
        match self {
            NegativeDriverPolicy::All => true,
            NegativeDriverPolicy::IntensityFactor => matches!(
                id,
                DriverId::EnergyIntensity | DriverId::EmissionFactor(_)
            ),
        }
    }
}

/// The reportable decarbonization scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    PerHousehold,
    PerCapita,
    PerFloorArea,
    PerExpenditure,
}

impl Scale {
    pub const ALL: [Scale; 4] = [
        Scale::PerHousehold,
        Scale::PerCapita,
        Scale::PerFloorArea,
        Scale::PerExpenditure,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scale::PerHousehold => "per_household",
            Scale::PerCapita => "per_capita",
            Scale::PerFloorArea => "per_floor_area",
            Scale::PerExpenditure => "per_expenditure",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scale::ALL
            .iter()
            .copied()
            .find(|scale| scale.label() == s)
            .ok_or_else(|| format!("unknown scale '{s}'"))
    }
}

/// Decarbonization quantities for one year step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecarbYear {
    /// End year of the step.
    pub year: i32,
    /// Avoided emissions, MtCO2.
    pub decarbonization_mt: f64,
    /// D / (C + D), in [0, 1).
    pub efficiency: f64,
    /// kgCO2 per household.
    pub per_household_kg: f64,
    /// kgCO2 per person.
    pub per_capita_kg: f64,
    /// kgCO2 per square meter; present when floor area is observed.
    pub per_floor_area_kg: Option<f64>,
    /// kgCO2 per thousand currency units of HCE.
    pub per_expenditure_kg: f64,
}

/// Share of cumulative decarbonization accrued in one stage.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageShare {
    pub start: i32,
    pub end: i32,
    pub decarbonization_mt: f64,
    pub share_pct: f64,
}

/// Yearly decarbonization series plus cumulative totals and stage shares.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecarbSeries {
    pub years: Vec<DecarbYear>,
    pub cumulative_mt: f64,
    pub stage_shares: Vec<StageShare>,
    pub policy: NegativeDriverPolicy,
    /// Convention note carried into every output.
    pub definition: String,
}

/// Avoided emissions of one year step, MtCO2: the negative contributions
/// (kgCO2 per household, filtered by `policy`) times end-year households.
pub fn annual_decarbonization(
    yearly: &DecompositionResult,
    record_end: &YearRecord,
    policy: NegativeDriverPolicy,
) -> Result<f64, MetricsError> {
    if let Some((_, end_year)) = yearly.interval {
        if end_year != record_end.year {
            return Err(MetricsError::Misaligned(record_end.year));
        }
    }
    let avoided_kg_per_household: f64 = yearly
        .contributions
        .iter()
        .filter(|(id, v)| policy.counts(*id) && *v < 0.0)
        .map(|(_, v)| -v)
        .sum();
    Ok(avoided_kg_per_household * record_end.households / 1.0e9)
}

/// D / (C + D): the avoided share of the counterfactual emission total.
pub fn decarbonization_efficiency(d_mt: f64, c_mt: f64) -> Result<f64, MetricsError> {
    if c_mt <= 0.0 {
        return Err(MetricsError::NonpositiveEmissions(c_mt));
    }
    Ok(d_mt / (c_mt + d_mt))
}

/// Default stage breaks: four near-equal stages over the span when it is
/// at least four years long, otherwise a single stage.
pub fn default_breaks(from: i32, to: i32) -> Vec<i32> {
    let span = to - from;
    if span >= 4 {
        (0..=4).map(|k| from + (span * k + 2) / 4).collect()
    } else {
        vec![from, to]
    }
}

/// Compute the full decarbonization series over a yearly chain.
///
/// `requested` lists the scales that must be present; asking for the
/// per-floor-area scale fails when any covered year lacks floor area.
/// Scales that are computable are filled in whether requested or not.
pub fn scale_series(
    chain: &[DecompositionResult],
    ds: &Dataset,
    breaks: &[i32],
    requested: &[Scale],
    policy: NegativeDriverPolicy,
) -> Result<DecarbSeries, MetricsError> {
    if chain.is_empty() {
        return Err(MetricsError::EmptyChain);
    }
    let mut years = Vec::with_capacity(chain.len());
    for yearly in chain {
        let (_, end_year) = yearly
            .interval
            .ok_or(MetricsError::EmptyChain)?;
        let record = ds
            .record(end_year)
            .ok_or(MetricsError::Misaligned(end_year))?;
        let d_mt = annual_decarbonization(yearly, record, policy)?;
        let c_mt = record.total_emissions() / KT_PER_MT;
        let efficiency = decarbonization_efficiency(d_mt, c_mt)?;
        let d_kg = d_mt * 1.0e9;
        let per_floor_area_kg = record.floor_area.map(|fa| d_kg / fa);
        if requested.contains(&Scale::PerFloorArea) && per_floor_area_kg.is_none() {
            return Err(MetricsError::FloorAreaUnavailable(end_year));
        }
        years.push(DecarbYear {
            year: end_year,
            decarbonization_mt: d_mt,
            efficiency,
            per_household_kg: d_kg / record.households,
            per_capita_kg: d_kg / record.population,
            per_floor_area_kg,
            // HCE is in millions; a thousand currency units is 1e-3 million.
            per_expenditure_kg: d_kg / (record.hce * 1.0e3),
        });
    }

    let cumulative_mt: f64 = years.iter().map(|y| y.decarbonization_mt).sum();
    let mut stage_shares = Vec::new();
    if cumulative_mt > 0.0 && breaks.len() >= 2 {
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let stage_mt: f64 = years
                .iter()
                .filter(|y| y.year > lo && y.year <= hi)
                .map(|y| y.decarbonization_mt)
                .sum();
            stage_shares.push(StageShare {
                start: lo,
                end: hi,
                decarbonization_mt: stage_mt,
                share_pct: 100.0 * stage_mt / cumulative_mt,
            });
        }
    }

    Ok(DecarbSeries {
        years,
        cumulative_mt,
        stage_shares,
        policy,
        definition:
            "decarbonization = negative driver contributions x households; \
             efficiency = D / (C + D); reconstructed convention"
                .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::DriverVec;
    use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
    use crate::engine::{IntegrationSettings, RunDiagnostics};

    fn result_with(contribs: &[(DriverId, f64)], interval: (i32, i32)) -> DecompositionResult {
        let mut contributions = DriverVec::zeros();
        for (id, v) in contribs {
            contributions[*id] = *v;
        }
        let delta_c = contributions.total();
        DecompositionResult {
            interval: Some(interval),
            delta_c,
            contributions,
            settings: IntegrationSettings::default(),
            active_uses: EndUseSet::all(),
            diagnostics: RunDiagnostics {
                integrated_delta_c: delta_c,
                max_share_closure_residual: 0.0,
                max_abs_slack: 0.0,
                terminal_shares: [0.0; END_USE_COUNT],
            },
        }
    }

    fn record(year: i32, households: f64) -> YearRecord {
        YearRecord {
            year,
            population: households * 2.5,
            households,
            gdp: 1.0e6,
            hce: 4.0e5,
            floor_area: Some(households * 80.0),
            energy: [100.0, 100.0, 100.0, 100.0, 100.0, 100.0],
            emissions: [150.0, 160.0, 150.0, 160.0, 150.0, 180.0],
        }
    }

    #[test]
    fn decarbonization_is_negative_sum_times_households() {
        // Negative contributions summing to -50 kg/household, H = 1e6.
        let yearly = result_with(
            &[
                (DriverId::EnergyIntensity, -30.0),
                (DriverId::EmissionFactor(EndUse::Lighting), -20.0),
                (DriverId::GdpPerCapita, 90.0),
            ],
            (2000, 2001),
        );
        let d = annual_decarbonization(&yearly, &record(2001, 1.0e6), NegativeDriverPolicy::All)
            .unwrap();
        assert!((d - 0.05).abs() < 1e-15); // 50 kt = 0.05 Mt
    }

    #[test]
    fn no_negative_contributions_means_zero() {
        let yearly = result_with(&[(DriverId::GdpPerCapita, 90.0)], (2000, 2001));
        let d = annual_decarbonization(&yearly, &record(2001, 1.0e6), NegativeDriverPolicy::All)
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn policy_restricts_the_driver_set() {
        let yearly = result_with(
            &[
                (DriverId::HouseholdSize, -10.0),
                (DriverId::EmissionFactor(EndUse::Cooking), -20.0),
            ],
            (2000, 2001),
        );
        let rec = record(2001, 1.0e6);
        let all = annual_decarbonization(&yearly, &rec, NegativeDriverPolicy::All).unwrap();
        let restricted =
            annual_decarbonization(&yearly, &rec, NegativeDriverPolicy::IntensityFactor).unwrap();
        assert!((all - 0.03).abs() < 1e-15);
        assert!((restricted - 0.02).abs() < 1e-15);
    }

    #[test]
    fn efficiency_arithmetic() {
        assert!((decarbonization_efficiency(0.05, 0.95).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(decarbonization_efficiency(0.0, 1.0).unwrap(), 0.0);
        assert!((decarbonization_efficiency(2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(decarbonization_efficiency(0.1, 0.0).is_err());
    }

    #[test]
    fn efficiency_monotonicity() {
        let base = decarbonization_efficiency(1.0, 10.0).unwrap();
        assert!(decarbonization_efficiency(1.5, 10.0).unwrap() > base);
        assert!(decarbonization_efficiency(1.0, 12.0).unwrap() < base);
    }

    #[test]
    fn per_capita_scale_example() {
        // D = 50 kt = 0.05 Mt, P = 2.5e6 -> 20 kg per capita.
        let yearly = result_with(&[(DriverId::EnergyIntensity, -50.0)], (2000, 2001));
        let ds = Dataset {
            country: "t".to_string(),
            records: vec![record(2000, 1.0e6), record(2001, 1.0e6)],
            active_uses: EndUseSet::all(),
        };
        let series = scale_series(
            &[yearly],
            &ds,
            &default_breaks(2000, 2001),
            &[Scale::PerCapita],
            NegativeDriverPolicy::All,
        )
        .unwrap();
        assert!((series.years[0].per_capita_kg - 20.0).abs() < 1e-12);
        assert!((series.years[0].per_household_kg - 50.0).abs() < 1e-12);
    }

    #[test]
    fn missing_floor_area_errors_only_when_requested() {
        let yearly = result_with(&[(DriverId::EnergyIntensity, -50.0)], (2000, 2001));
        let mut rec = record(2001, 1.0e6);
        rec.floor_area = None;
        let ds = Dataset {
            country: "t".to_string(),
            records: vec![record(2000, 1.0e6), rec],
            active_uses: EndUseSet::all(),
        };
        let ok = scale_series(
            std::slice::from_ref(&yearly),
            &ds,
            &[2000, 2001],
            &[Scale::PerCapita],
            NegativeDriverPolicy::All,
        )
        .unwrap();
        assert!(ok.years[0].per_floor_area_kg.is_none());

        let err = scale_series(
            std::slice::from_ref(&yearly),
            &ds,
            &[2000, 2001],
            &[Scale::PerFloorArea],
            NegativeDriverPolicy::All,
        )
        .unwrap_err();
        assert!(matches!(err, MetricsError::FloorAreaUnavailable(2001)));
    }

    #[test]
    fn equal_stages_share_equally() {
        let mut chain = Vec::new();
        let mut records = vec![record(2000, 1.0e6)];
        for year in 2001..=2004 {
            chain.push(result_with(&[(DriverId::EnergyIntensity, -40.0)], (year - 1, year)));
            records.push(record(year, 1.0e6));
        }
        let ds = Dataset {
            country: "t".to_string(),
            records,
            active_uses: EndUseSet::all(),
        };
        let series = scale_series(
            &chain,
            &ds,
            &default_breaks(2000, 2004),
            &[],
            NegativeDriverPolicy::All,
        )
        .unwrap();
        assert_eq!(series.stage_shares.len(), 4);
        for share in &series.stage_shares {
            assert!((share.share_pct - 25.0).abs() < 1e-9);
        }
        let total: f64 = series.stage_shares.iter().map(|s| s.share_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn default_breaks_recover_five_year_stages() {
        assert_eq!(default_breaks(2000, 2020), vec![2000, 2005, 2010, 2015, 2020]);
        assert_eq!(default_breaks(2000, 2002), vec![2000, 2002]);
    }
}
