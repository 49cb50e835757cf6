//! Synthetic datasets and toy factor states.
//!
//! The deterministic `china_like` and `india_like` series have smooth
//! growth curves with endpoint carbon intensities calibrated to 1125 -> 1492
//! and 744 -> 1216 kgCO2 per household respectively; they stand in for the
//! unpublished national data in tests, benchmarks, and CLI smoke runs.
//! `randomized` produces small valid datasets from a seed for property and
//! batch testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, YearRecord};
use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
use crate::factors::FactorState;
use crate::units::KG_PER_KT;

/// Single-active-use state with unit emission factor: c = e * p * g * s.
pub fn scalar_state(e: f64, p: f64, g: f64, s: f64) -> FactorState {
    let mut e_i = [0.0; END_USE_COUNT];
    e_i[0] = e;
    FactorState::from_parts(
        e_i,
        [1.0; END_USE_COUNT],
        p,
        g,
        s,
        EndUseSet::from_slice(&[EndUse::SpaceCooling]),
    )
    .expect("scalar toy state is valid")
}

/// Two active uses (space cooling, space heating) with given per-use
/// intensities and emission factors.
pub fn two_use_state(e_i2: [f64; 2], k2: [f64; 2], p: f64, g: f64, s: f64) -> FactorState {
    let mut e_i = [0.0; END_USE_COUNT];
    let mut k = [0.0; END_USE_COUNT];
    e_i[0] = e_i2[0];
    e_i[1] = e_i2[1];
    k[0] = k2[0];
    k[1] = k2[1];
    FactorState::from_parts(
        e_i,
        k,
        p,
        g,
        s,
        EndUseSet::from_slice(&[EndUse::SpaceCooling, EndUse::SpaceHeating]),
    )
    .expect("two-use toy state is valid")
}

struct GrowthSpec {
    country: &'static str,
    population0: f64,
    population_rate: f64,
    households0: f64,
    households_rate: f64,
    gdp0: f64,
    gdp_rate: f64,
    hce_share0: f64,
    hce_share_rate: f64,
    energy0: f64,
    energy_rate: f64,
    floor_area0: f64,
    floor_area_rate: f64,
    shares_start: [f64; END_USE_COUNT],
    shares_end: [f64; END_USE_COUNT],
    emission_factor0: [f64; END_USE_COUNT],
    emission_factor_decline: [f64; END_USE_COUNT],
    intensity_start_kg: f64,
    intensity_end_kg: f64,
}

fn build_calibrated(spec: &GrowthSpec) -> Dataset {
    let years: Vec<i32> = (2000..=2020).collect();
    let span = (years.len() - 1) as f64;

    // First pass: raw curves.
    let mut raw: Vec<YearRecord> = Vec::with_capacity(years.len());
    for (step, &year) in years.iter().enumerate() {
        let t = step as f64;
        let frac = t / span;
        let population = spec.population0 * spec.population_rate.powf(t);
        let households = spec.households0 * spec.households_rate.powf(t);
        let gdp = spec.gdp0 * spec.gdp_rate.powf(t);
        let hce = spec.hce_share0 * spec.hce_share_rate.powf(t) * gdp;
        let total_energy = spec.energy0 * spec.energy_rate.powf(t);
        let mut energy = [0.0; END_USE_COUNT];
        let mut emissions = [0.0; END_USE_COUNT];
        for i in 0..END_USE_COUNT {
            let share =
                spec.shares_start[i] + frac * (spec.shares_end[i] - spec.shares_start[i]);
            energy[i] = total_energy * share;
            let k = spec.emission_factor0[i]
                * (1.0 - spec.emission_factor_decline[i]).powf(t);
            emissions[i] = energy[i] * k;
        }
        raw.push(YearRecord {
            year,
            population,
            households,
            gdp,
            hce,
            floor_area: Some(spec.floor_area0 * spec.floor_area_rate.powf(t)),
            energy,
            emissions,
        });
    }

    // Second pass: rescale emissions per year so intensity endpoints land on
    // the calibration targets, blending the scale factor linearly between.
    let intensity_kg = |r: &YearRecord| KG_PER_KT * r.total_emissions() / r.households;
    let alpha_start = spec.intensity_start_kg / intensity_kg(&raw[0]);
    let alpha_end = spec.intensity_end_kg / intensity_kg(raw.last().unwrap());
    for (step, record) in raw.iter_mut().enumerate() {
        let frac = step as f64 / span;
        let alpha = alpha_start + frac * (alpha_end - alpha_start);
        for c in &mut record.emissions {
            *c *= alpha;
        }
    }

    let mut active = EndUseSet::EMPTY;
    for u in EndUse::ALL {
        if raw.iter().any(|r| r.energy[u.index()] > 0.0) {
            active.insert(u);
        }
    }
    Dataset {
        country: spec.country.to_string(),
        records: raw,
        active_uses: active,
    }
}

/// 2000-2020 series shaped like a large, coal-heavy economy with all six
/// end uses active. Intensity runs from 1125 to 1492 kgCO2 per household.
pub fn china_like() -> Dataset {
    build_calibrated(&GrowthSpec {
        country: "china_like",
        population0: 1.27e9,
        population_rate: 1.005,
        households0: 3.40e8,
        households_rate: 1.015,
        gdp0: 1.2e7,
        gdp_rate: 1.085,
        hce_share0: 0.38,
        hce_share_rate: 1.002,
        energy0: 3800.0,
        energy_rate: 1.04,
        floor_area0: 2.4e10,
        floor_area_rate: 1.035,
        shares_start: [0.07, 0.32, 0.10, 0.16, 0.22, 0.13],
        shares_end: [0.12, 0.26, 0.08, 0.15, 0.14, 0.25],
        emission_factor0: [95.0, 110.0, 88.0, 92.0, 100.0, 85.0],
        emission_factor_decline: [0.012, 0.018, 0.010, 0.008, 0.006, 0.015],
        intensity_start_kg: 1125.0,
        intensity_end_kg: 1492.0,
    })
}

/// 2000-2020 series shaped like a warm-climate economy with no space
/// heating demand (five active uses). Intensity runs from 744 to 1216
/// kgCO2 per household.
pub fn india_like() -> Dataset {
    build_calibrated(&GrowthSpec {
        country: "india_like",
        population0: 1.05e9,
        population_rate: 1.013,
        households0: 2.3e8,
        households_rate: 1.02,
        gdp0: 3.5e6,
        gdp_rate: 1.065,
        hce_share0: 0.60,
        hce_share_rate: 1.0,
        energy0: 2600.0,
        energy_rate: 1.035,
        floor_area0: 1.6e10,
        floor_area_rate: 1.04,
        shares_start: [0.06, 0.0, 0.16, 0.18, 0.38, 0.22],
        shares_end: [0.11, 0.0, 0.12, 0.16, 0.30, 0.31],
        emission_factor0: [92.0, 0.0, 95.0, 98.0, 112.0, 88.0],
        emission_factor_decline: [0.015, 0.0, 0.004, 0.003, 0.002, 0.012],
        intensity_start_kg: 744.0,
        intensity_end_kg: 1216.0,
    })
}

/// Look up a bundled fixture by name.
pub fn by_name(name: &str) -> Option<Dataset> {
    match name {
        "china_like" => Some(china_like()),
        "india_like" => Some(india_like()),
        _ => None,
    }
}

/// A small random valid dataset: 3-6 consecutive years, at least two active
/// end uses, smooth multiplicative year-to-year movement. Deterministic in
/// the seed.
pub fn randomized(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_years = rng.gen_range(3..=6);

    let mut active = EndUseSet::EMPTY;
    for u in EndUse::ALL {
        if rng.gen_bool(0.85) {
            active.insert(u);
        }
    }
    while active.len() < 2 {
        active.insert(EndUse::ALL[rng.gen_range(0..END_USE_COUNT)]);
    }

    let population = 10f64.powf(rng.gen_range(6.7..9.3));
    let household_size = rng.gen_range(2.0..6.0);
    let gdp_per_capita = rng.gen_range(1.0e-3..0.05);
    let hce_share = rng.gen_range(0.3..0.7);
    let with_floor_area = rng.gen_bool(0.7);
    let floor_per_household = rng.gen_range(20.0..120.0);

    let mut energy = [0.0; END_USE_COUNT];
    let mut factor = [0.0; END_USE_COUNT];
    for u in active.iter() {
        energy[u.index()] = rng.gen_range(50.0..2000.0);
        factor[u.index()] = rng.gen_range(20.0..120.0);
    }

    let mut records = Vec::with_capacity(n_years);
    let mut p = population;
    let mut h = population / household_size;
    let mut g = gdp_per_capita * population;
    let mut s_share = hce_share;
    let mut e = energy;
    let mut k = factor;
    for step in 0..n_years {
        let mut emissions = [0.0; END_USE_COUNT];
        for u in active.iter() {
            emissions[u.index()] = e[u.index()] * k[u.index()];
        }
        records.push(YearRecord {
            year: 2000 + step as i32,
            population: p,
            households: h,
            gdp: g,
            hce: s_share * g,
            floor_area: with_floor_area.then(|| h * floor_per_household),
            energy: e,
            emissions,
        });

        p *= rng.gen_range(0.9..1.12);
        h *= rng.gen_range(0.9..1.12);
        g *= rng.gen_range(0.9..1.12);
        s_share = (s_share * rng.gen_range(0.95..1.05)).clamp(0.1, 0.9);
        for u in active.iter() {
            e[u.index()] *= rng.gen_range(0.9..1.12);
            k[u.index()] *= rng.gen_range(0.9..1.12);
        }
    }

    Dataset {
        country: format!("synthetic_{seed}"),
        records,
        active_uses: active,
    }
}
