//! Reporting shapes over engine output: yearly chains, stage aggregates,
//! contribution rates, and per-end-use breakdowns.
//!
//! Chain results carry intensities in kgCO2 per household (converted from
//! the base-unit factor states).

use serde::{Deserialize, Serialize};

use crate::dataset::{interpolate_years, Dataset};
use crate::driver::{DriverId, DriverVec};
use crate::enduse::{EndUse, END_USE_COUNT};
use crate::engine::{run_dsd, DecompositionResult, IntegrationSettings};
use crate::error::DecompositionError;
use crate::exec;
use crate::units::KG_PER_KT;

pub use crate::engine::DecompositionResult as IntervalResult;

fn year_states(
    ds: &Dataset,
    from: i32,
    to: i32,
) -> Result<Vec<(i32, crate::factors::FactorState)>, DecompositionError> {
    if from >= to {
        return Err(DecompositionError::BadInterval { from, to });
    }
    let filled = interpolate_years(ds)?;
    for year in [from, to] {
        if filled.record(year).is_none() {
            return Err(DecompositionError::YearOutOfRange(year));
        }
    }
    let mut states = Vec::with_capacity((to - from + 1) as usize);
    for year in from..=to {
        states.push((year, filled.factor_state(year)?));
    }
    Ok(states)
}

fn run_pair(
    pair: &[(i32, crate::factors::FactorState)],
    settings: &IntegrationSettings,
) -> Result<DecompositionResult, DecompositionError> {
    let (year_a, ref a) = pair[0];
    let (year_b, ref b) = pair[1];
    let mut result = run_dsd(a, b, settings)?;
    result.interval = Some((year_a, year_b));
    result.scale_intensity(KG_PER_KT);
    Ok(result)
}

fn chain_yearly_impl(
    ds: &Dataset,
    from: i32,
    to: i32,
    settings: &IntegrationSettings,
    sequential: bool,
) -> Result<Vec<DecompositionResult>, DecompositionError> {
    let states = year_states(ds, from, to)?;
    let pairs: Vec<&[(i32, crate::factors::FactorState)]> = states.windows(2).collect();
    let runner = |pair: &&[(i32, crate::factors::FactorState)]| run_pair(pair, settings);
    let results = if sequential {
        exec::map_ordered_seq(&pairs, runner)
    } else {
        exec::map_ordered(&pairs, runner)
    };
    results.into_iter().collect()
}

/// One decomposition per consecutive year pair over [from, to].
///
/// Interior years missing from the dataset are filled by interpolation
/// first. Year pairs run concurrently when the `parallel` feature is on;
/// output order and values are identical either way.
pub fn chain_yearly(
    ds: &Dataset,
    from: i32,
    to: i32,
    settings: &IntegrationSettings,
) -> Result<Vec<DecompositionResult>, DecompositionError> {
    chain_yearly_impl(ds, from, to, settings, false)
}

/// Sequential variant of [`chain_yearly`], for benchmarking and callers
/// that must avoid the thread pool.
pub fn chain_yearly_seq(
    ds: &Dataset,
    from: i32,
    to: i32,
    settings: &IntegrationSettings,
) -> Result<Vec<DecompositionResult>, DecompositionError> {
    chain_yearly_impl(ds, from, to, settings, true)
}

/// Single decomposition straight from the `from` state to the `to` state.
pub fn decompose_endpoint(
    ds: &Dataset,
    from: i32,
    to: i32,
    settings: &IntegrationSettings,
) -> Result<DecompositionResult, DecompositionError> {
    if from >= to {
        return Err(DecompositionError::BadInterval { from, to });
    }
    let filled = interpolate_years(ds)?;
    for year in [from, to] {
        if filled.record(year).is_none() {
            return Err(DecompositionError::YearOutOfRange(year));
        }
    }
    let a = filled.factor_state(from)?;
    let b = filled.factor_state(to)?;
    let mut result = run_dsd(&a, &b, settings)?;
    result.interval = Some((from, to));
    result.scale_intensity(KG_PER_KT);
    Ok(result)
}

/// Sum a contiguous run of yearly results into per-stage results delimited
/// by `breaks`. Yearly results outside the breaks are ignored.
pub fn aggregate_stages(
    chain: &[DecompositionResult],
    breaks: &[i32],
) -> Result<Vec<DecompositionResult>, DecompositionError> {
    if breaks.len() < 2 {
        return Err(DecompositionError::BadBreaks);
    }
    for pair in breaks.windows(2) {
        if pair[0] == pair[1] {
            return Err(DecompositionError::EmptyStage(pair[0], pair[1]));
        }
        if pair[0] > pair[1] {
            return Err(DecompositionError::BadBreaks);
        }
    }
    let chain_start = chain
        .first()
        .and_then(|r| r.interval)
        .ok_or(DecompositionError::BadBreaks)?
        .0;
    let chain_end = chain
        .last()
        .and_then(|r| r.interval)
        .ok_or(DecompositionError::BadBreaks)?
        .1;
    for &b in breaks {
        if b < chain_start || b > chain_end {
            return Err(DecompositionError::BreakOutOfRange(b));
        }
    }

    let mut stages = Vec::with_capacity(breaks.len() - 1);
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let members: Vec<&DecompositionResult> = chain
            .iter()
            .filter(|r| {
                r.interval
                    .map(|(a, b)| a >= lo && b <= hi)
                    .unwrap_or(false)
            })
            .collect();
        if members.is_empty() {
            return Err(DecompositionError::EmptyStage(lo, hi));
        }
        let mut contributions = DriverVec::zeros();
        let mut delta_c = 0.0;
        let mut integrated = 0.0;
        let mut max_closure = 0.0f64;
        let mut max_slack = 0.0f64;
        for m in &members {
            contributions.add_assign(&m.contributions);
            delta_c += m.delta_c;
            integrated += m.diagnostics.integrated_delta_c;
            max_closure = max_closure.max(m.diagnostics.max_share_closure_residual);
            max_slack = max_slack.max(m.diagnostics.max_abs_slack);
        }
        let last = members.last().unwrap();
        stages.push(DecompositionResult {
            interval: Some((lo, hi)),
            delta_c,
            contributions,
            settings: last.settings,
            active_uses: last.active_uses,
            diagnostics: crate::engine::RunDiagnostics {
                integrated_delta_c: integrated,
                max_share_closure_residual: max_closure,
                max_abs_slack: max_slack,
                terminal_shares: last.diagnostics.terminal_shares,
            },
        });
    }
    Ok(stages)
}

/// Contribution rates relative to the interval's total change.
///
/// When the total change is too close to zero for percentages to be
/// meaningful, only the absolute contributions stand (signalled in-band).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "rates")]
pub enum RateReport {
    /// Percent of delta_c per driver; sums to 100 within rounding.
    Percent(DriverVec),
    /// delta_c is degenerate; rates are undefined.
    AbsoluteOnly,
}

/// Threshold factor for the near-zero delta_c guard.
pub const RATE_DEGENERACY_FACTOR: f64 = 1e-9;

pub fn contribution_rates(result: &DecompositionResult) -> RateReport {
    let scale = result.contributions.abs_total();
    if result.delta_c.abs() <= RATE_DEGENERACY_FACTOR * scale {
        return RateReport::AbsoluteOnly;
    }
    let mut rates = DriverVec::zeros();
    for (id, v) in result.contributions.iter() {
        rates[id] = 100.0 * v / result.delta_c;
    }
    RateReport::Percent(rates)
}

/// Per-end-use split of the emission-factor and structure effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndUseBreakdown {
    /// Emission-factor contribution per end use, kgCO2 per household.
    pub dk: [f64; END_USE_COUNT],
    /// Structure (share) contribution per end use, kgCO2 per household.
    pub dw: [f64; END_USE_COUNT],
}

impl EndUseBreakdown {
    pub fn dk_total(&self) -> f64 {
        self.dk.iter().sum()
    }

    pub fn dw_total(&self) -> f64 {
        self.dw.iter().sum()
    }
}

pub fn enduse_breakdown(result: &DecompositionResult) -> EndUseBreakdown {
    let mut dk = [0.0; END_USE_COUNT];
    let mut dw = [0.0; END_USE_COUNT];
    for u in EndUse::ALL {
        dk[u.index()] = result.contributions[DriverId::EmissionFactor(u)];
        dw[u.index()] = result.contributions[DriverId::ShareShift(u)];
    }
    EndUseBreakdown { dk, dw }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::YearRecord;
    use crate::enduse::EndUseSet;
    use crate::engine::RunDiagnostics;

    fn constant_dataset(years: std::ops::RangeInclusive<i32>) -> Dataset {
        let energy = [20.0, 30.0, 10.0, 10.0, 10.0, 20.0];
        let records = years
            .map(|year| YearRecord {
                year,
                population: 1000.0,
                households: 400.0,
                gdp: 5000.0,
                hce: 2000.0,
                floor_area: None,
                energy,
                emissions: energy,
            })
            .collect();
        Dataset {
            country: "const".to_string(),
            records,
            active_uses: EndUseSet::all(),
        }
    }

    fn small_settings() -> IntegrationSettings {
        IntegrationSettings::with_segments(200)
    }

    #[test]
    fn chain_telescopes_to_endpoint_delta() {
        let ds = crate::fixtures::china_like();
        let chain = chain_yearly(&ds, 2000, 2003, &small_settings()).unwrap();
        assert_eq!(chain.len(), 3);
        let sum: f64 = chain.iter().map(|r| r.delta_c).sum();
        let c0 = ds.factor_state(2000).unwrap().c * KG_PER_KT;
        let c3 = ds.factor_state(2003).unwrap().c * KG_PER_KT;
        assert!((sum - (c3 - c0)).abs() <= 1e-9 * (c3 - c0).abs());
        assert_eq!(chain[0].interval, Some((2000, 2001)));
        assert_eq!(chain[2].interval, Some((2002, 2003)));
    }

    #[test]
    fn constant_dataset_contributes_nothing() {
        let ds = constant_dataset(2000..=2004);
        let chain = chain_yearly(&ds, 2000, 2004, &small_settings()).unwrap();
        for r in &chain {
            assert_eq!(r.delta_c, 0.0);
            assert!(r.contributions.iter().all(|(_, v)| v == 0.0));
        }
    }

    #[test]
    fn degenerate_interval_rejected() {
        let ds = constant_dataset(2000..=2004);
        assert!(matches!(
            chain_yearly(&ds, 2002, 2002, &small_settings()),
            Err(DecompositionError::BadInterval { .. })
        ));
        assert!(matches!(
            chain_yearly(&ds, 2000, 2010, &small_settings()),
            Err(DecompositionError::YearOutOfRange(2010))
        ));
    }

    #[test]
    fn parallel_and_sequential_chains_are_identical() {
        let ds = crate::fixtures::china_like();
        let a = chain_yearly(&ds, 2000, 2006, &small_settings()).unwrap();
        let b = chain_yearly_seq(&ds, 2000, 2006, &small_settings()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.delta_c.to_bits(), y.delta_c.to_bits());
            for i in 0..crate::driver::DRIVER_COUNT {
                assert_eq!(x.contributions.0[i].to_bits(), y.contributions.0[i].to_bits());
            }
        }
    }

    #[test]
    fn stages_partition_the_chain() {
        let ds = crate::fixtures::china_like();
        let chain = chain_yearly(&ds, 2000, 2020, &small_settings()).unwrap();
        let stages =
            aggregate_stages(&chain, &[2000, 2005, 2010, 2015, 2020]).unwrap();
        assert_eq!(stages.len(), 4);
        assert_eq!(stages[0].interval, Some((2000, 2005)));

        // Aggregating then summing equals summing all yearly results.
        let stage_total: f64 = stages.iter().map(|s| s.delta_c).sum();
        let yearly_total: f64 = chain.iter().map(|r| r.delta_c).sum();
        assert!((stage_total - yearly_total).abs() < 1e-12 * yearly_total.abs().max(1.0));
        for id in DriverId::all() {
            let a: f64 = stages.iter().map(|s| s.contributions[id]).sum();
            let b: f64 = chain.iter().map(|r| r.contributions[id]).sum();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }

        // Single stage spanning the whole chain equals the elementwise sum.
        let whole = aggregate_stages(&chain, &[2000, 2020]).unwrap();
        assert_eq!(whole.len(), 1);
        assert!((whole[0].delta_c - yearly_total).abs() < 1e-12 * yearly_total.abs().max(1.0));
    }

    #[test]
    fn bad_breaks_rejected() {
        let ds = crate::fixtures::china_like();
        let chain = chain_yearly(&ds, 2000, 2005, &small_settings()).unwrap();
        assert!(matches!(
            aggregate_stages(&chain, &[2000, 2000]),
            Err(DecompositionError::EmptyStage(2000, 2000))
        ));
        assert!(matches!(
            aggregate_stages(&chain, &[1999, 2005]),
            Err(DecompositionError::BreakOutOfRange(1999))
        ));
        assert!(matches!(
            aggregate_stages(&chain, &[2000]),
            Err(DecompositionError::BadBreaks)
        ));
    }

    fn synthetic_result(delta_c: f64, gdp: f64) -> DecompositionResult {
        let mut contributions = DriverVec::zeros();
        contributions[DriverId::GdpPerCapita] = gdp;
        contributions[DriverId::EnergyIntensity] = delta_c - gdp;
        DecompositionResult {
            interval: Some((2000, 2020)),
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

    #[test]
    fn rates_echo_the_percentage_convention() {
        // delta_c = 367 with a gdp contribution of 831.0 reads as 226.4%.
        let result = synthetic_result(367.0, 831.0);
        match contribution_rates(&result) {
            RateReport::Percent(rates) => {
                assert!((rates[DriverId::GdpPerCapita] - 226.4).abs() < 0.05);
                let sum: f64 = rates.0.iter().sum();
                assert!((sum - 100.0).abs() < 1e-6);
            }
            RateReport::AbsoluteOnly => panic!("expected percentages"),
        }
    }

    #[test]
    fn zero_delta_with_offsetting_contributions_is_absolute_only() {
        let result = synthetic_result(0.0, 500.0);
        assert_eq!(contribution_rates(&result), RateReport::AbsoluteOnly);
    }

    #[test]
    fn breakdown_extracts_per_use_columns() {
        let mut result = synthetic_result(10.0, 4.0);
        result.contributions[DriverId::EmissionFactor(EndUse::SpaceCooling)] = -3.0;
        result.contributions[DriverId::ShareShift(EndUse::Lighting)] = 1.5;
        let b = enduse_breakdown(&result);
        assert_eq!(b.dk[EndUse::SpaceCooling.index()], -3.0);
        assert_eq!(b.dw[EndUse::Lighting.index()], 1.5);
        assert_eq!(b.dk_total(), -3.0);
        assert_eq!(b.dw_total(), 1.5);
    }
}
