//! Property tests over randomized datasets and states.

use proptest::prelude::*;

use dsd_core::dataset::Dataset;
use dsd_core::engine::{run_dsd, IntegrationSettings, SlackScheme};
use dsd_core::units::KG_PER_KT;
use dsd_core::{
    chain_yearly, contribution_rates, decarbonization_efficiency, fixtures, load_dataset,
    oracle, DriverId, RateReport, UnitConfig, DRIVER_COUNT,
};

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    any::<u64>().prop_map(fixtures::randomized)
}

/// Small segment counts keep the property suite quick; the acceptance suite
/// runs the full default.
fn quick_settings(slack: SlackScheme) -> IntegrationSettings {
    IntegrationSettings {
        segments: 400,
        slack,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn additivity_holds_on_every_interval(ds in dataset_strategy(), uniform in any::<bool>()) {
        let slack = if uniform { SlackScheme::Uniform } else { SlackScheme::Proportional };
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let chain = chain_yearly(&ds, from, to, &quick_settings(slack)).unwrap();
        for r in &chain {
            let tol = 1e-9 * r.delta_c.abs().max(1.0);
            prop_assert!(r.additivity_gap() <= tol,
                "gap {} beyond {tol} on {:?}", r.additivity_gap(), r.interval);
        }
    }

    #[test]
    fn chain_telescopes(ds in dataset_strategy()) {
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let chain = chain_yearly(&ds, from, to, &quick_settings(SlackScheme::Uniform)).unwrap();
        let sum: f64 = chain.iter().map(|r| r.delta_c).sum();
        let c0 = ds.factor_state(from).unwrap().c * KG_PER_KT;
        let c1 = ds.factor_state(to).unwrap().c * KG_PER_KT;
        let total = c1 - c0;
        prop_assert!((sum - total).abs() <= 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn energy_rescale_leaves_contributions_unchanged(
        ds in dataset_strategy(),
        lambda in 0.05f64..20.0,
    ) {
        let mut scaled = ds.clone();
        for r in &mut scaled.records {
            for e in &mut r.energy {
                *e *= lambda;
            }
        }
        let settings = quick_settings(SlackScheme::Uniform);
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let a = chain_yearly(&ds, from, to, &settings).unwrap();
        let b = chain_yearly(&scaled, from, to, &settings).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            for i in 0..DRIVER_COUNT {
                let (p, q) = (x.contributions.0[i], y.contributions.0[i]);
                prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-12),
                    "driver {i}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn currency_rescale_leaves_contributions_unchanged(
        ds in dataset_strategy(),
        mu in 0.05f64..20.0,
        hce_only in any::<bool>(),
    ) {
        let mut scaled = ds.clone();
        for r in &mut scaled.records {
            r.hce *= mu;
            if !hce_only {
                r.gdp *= mu;
            }
        }
        let settings = quick_settings(SlackScheme::Uniform);
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let a = chain_yearly(&ds, from, to, &settings).unwrap();
        let b = chain_yearly(&scaled, from, to, &settings).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            for i in 0..DRIVER_COUNT {
                let (p, q) = (x.contributions.0[i], y.contributions.0[i]);
                prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-12),
                    "driver {i}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn rates_sum_to_hundred_or_flag_degeneracy(ds in dataset_strategy()) {
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let chain = chain_yearly(&ds, from, to, &quick_settings(SlackScheme::Uniform)).unwrap();
        for r in &chain {
            match contribution_rates(r) {
                RateReport::Percent(rates) => {
                    let sum: f64 = rates.0.iter().sum();
                    prop_assert!((sum - 100.0).abs() < 1e-6, "rates sum {sum}");
                }
                RateReport::AbsoluteOnly => {
                    prop_assert!(r.delta_c.abs() <= 1e-9 * r.contributions.abs_total());
                }
            }
        }
    }

    #[test]
    fn lmdi_is_perfectly_additive(ds in dataset_strategy()) {
        let from = ds.first_year().unwrap();
        let to = ds.last_year().unwrap();
        let start = ds.factor_state(from).unwrap();
        let end = ds.factor_state(to).unwrap();
        // LMDI needs strictly positive factors; randomized fixtures keep
        // active uses positive throughout.
        let lmdi = oracle::lmdi_decompose(&start, &end).unwrap();
        let defect = (lmdi.total() - lmdi.delta_c).abs();
        // Relative to the intensity scale, since delta_c itself may sit
        // near zero on offsetting paths.
        let scale = start.c.abs() + end.c.abs();
        prop_assert!(defect <= 1e-12 * scale, "defect {defect} at scale {scale}");
    }

    #[test]
    fn single_driver_runs_are_exact(ds in dataset_strategy(), pick in 0usize..16) {
        let from = ds.first_year().unwrap();
        let start = ds.factor_state(from).unwrap();
        let drivers = DriverId::all();
        let id = drivers[pick];
        // Perturb exactly one driver; skip structure drivers (a lone share
        // shift changes other shares through closure) and inactive uses.
        let mut end = start.clone();
        match id {
            DriverId::EnergyIntensity => {
                for u in end.active.iter() {
                    end.e_i[u.index()] *= 1.3;
                }
                end.e *= 1.3;
            }
            DriverId::HouseholdSize => end.p *= 1.2,
            DriverId::GdpPerCapita => end.g *= 1.4,
            DriverId::ExpenditureShare => end.s *= 0.8,
            DriverId::EmissionFactor(u) => {
                if !end.active.contains(u) {
                    return Ok(());
                }
                end.k[u.index()] *= 1.5;
            }
            DriverId::ShareShift(_) => return Ok(()),
        }
        // Re-derive c so the end state satisfies the identity.
        end.c = end.identity_intensity();
        let result = run_dsd(&start, &end, &quick_settings(SlackScheme::Uniform)).unwrap();
        let dc = end.c - start.c;
        prop_assert_eq!(result.contributions[id], dc);
        for (other, v) in result.contributions.iter() {
            if other != id {
                prop_assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn efficiency_is_monotone(d in 0.0f64..1e4, c in 1e-6f64..1e4, bump in 1e-6f64..1e3) {
        let base = decarbonization_efficiency(d, c).unwrap();
        prop_assert!(decarbonization_efficiency(d + bump, c).unwrap() > base);
        prop_assert!(decarbonization_efficiency(d, c + bump).unwrap() < base || d == 0.0);
        prop_assert!((0.0..1.0).contains(&base));
    }

    #[test]
    fn normalized_dataset_round_trips_bitwise(ds in dataset_strategy()) {
        let mut buffer = Vec::new();
        ds.write_csv(&mut buffer).unwrap();
        let reloaded = load_dataset(buffer.as_slice(), &UnitConfig::base_units(), &ds.country)
            .unwrap();
        prop_assert_eq!(ds.records.len(), reloaded.records.len());
        for (a, b) in ds.records.iter().zip(reloaded.records.iter()) {
            prop_assert_eq!(a.year, b.year);
            prop_assert_eq!(a.population.to_bits(), b.population.to_bits());
            prop_assert_eq!(a.households.to_bits(), b.households.to_bits());
            prop_assert_eq!(a.gdp.to_bits(), b.gdp.to_bits());
            prop_assert_eq!(a.hce.to_bits(), b.hce.to_bits());
            prop_assert_eq!(
                a.floor_area.map(f64::to_bits),
                b.floor_area.map(f64::to_bits)
            );
            for i in 0..6 {
                prop_assert_eq!(a.energy[i].to_bits(), b.energy[i].to_bits());
                prop_assert_eq!(a.emissions[i].to_bits(), b.emissions[i].to_bits());
            }
        }
        prop_assert_eq!(ds.active_uses, reloaded.active_uses);
    }
}
