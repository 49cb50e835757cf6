//! The derived identity state at one point on an integration path.
//!
//! Carbon intensity per household factors as
//!
//! ```text
//! c = sum_u  e * k_u * w_u * p * g * s
//! ```
//!
//! with e the total expenditure-related energy intensity, k_u per-end-use
//! emission factors, w_u end-use energy shares, p household size, g GDP per
//! capita, and s the household expenditure index. All values are raw ratios
//! of base-unit observations, so with energy in PJ and emissions in ktCO2
//! the emission factors are kgCO2 per GJ and c is ktCO2 per household;
//! reporting layers convert c-scale quantities to kgCO2 per household.

use serde::{Deserialize, Serialize};

use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
use crate::error::FactorError;

/// Relative tolerance for the algebraic-consistency invariants.
pub const IDENTITY_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorState {
    /// Expenditure-related energy intensity per end use, e_u = E_u / S.
    pub e_i: [f64; END_USE_COUNT],
    /// Total expenditure-related energy intensity, e = sum of e_u.
    pub e: f64,
    /// Emission factor per end use, k_u = C_u / E_u (zero for inactive uses).
    pub k: [f64; END_USE_COUNT],
    /// End-use energy structure share, w_u = E_u / E.
    pub w: [f64; END_USE_COUNT],
    /// Household size, p = P / H.
    pub p: f64,
    /// GDP per capita, g = G / P.
    pub g: f64,
    /// Household expenditure index, s = S / G.
    pub s: f64,
    /// Carbon intensity, c = C / H.
    pub c: f64,
    pub active: EndUseSet,
}

impl FactorState {
    /// Derive the state from one raw record.
    ///
    /// `carried_k` supplies replacement emission factors for active uses
    /// whose energy is zero in this record (their share term contributes
    /// zero either way; carrying k keeps driver paths continuous).
    pub fn from_record(
        record: &crate::dataset::YearRecord,
        active: EndUseSet,
        carried_k: &[Option<f64>; END_USE_COUNT],
    ) -> Result<FactorState, FactorError> {
        if active.is_empty() {
            return Err(FactorError::EmptyActiveSet);
        }
        let total_energy: f64 = active.iter().map(|u| record.energy[u.index()]).sum();
        if total_energy <= 0.0 {
            return Err(FactorError::ZeroTotalEnergy);
        }

        let mut e_i = [0.0; END_USE_COUNT];
        let mut k = [0.0; END_USE_COUNT];
        let mut w = [0.0; END_USE_COUNT];
        for u in active.iter() {
            let i = u.index();
            e_i[i] = record.energy[i] / record.hce;
            w[i] = record.energy[i] / total_energy;
            k[i] = if record.energy[i] > 0.0 {
                record.emissions[i] / record.energy[i]
            } else {
                carried_k[i].unwrap_or(0.0)
            };
        }
        let total_emissions: f64 = active.iter().map(|u| record.emissions[u.index()]).sum();

        let state = FactorState {
            e_i,
            e: e_i.iter().sum(),
            k,
            w,
            p: record.population / record.households,
            g: record.gdp / record.population,
            s: record.hce / record.gdp,
            c: total_emissions / record.households,
            active,
        };
        state.validate()?;
        Ok(state)
    }

    /// Build a state directly from per-use intensities and factors, deriving
    /// the shares and intensity so the identity holds by construction.
    /// Intended for synthetic states in tests and cross-check tooling.
    pub fn from_parts(
        e_i: [f64; END_USE_COUNT],
        k: [f64; END_USE_COUNT],
        p: f64,
        g: f64,
        s: f64,
        active: EndUseSet,
    ) -> Result<FactorState, FactorError> {
        if active.is_empty() {
            return Err(FactorError::EmptyActiveSet);
        }
        let e: f64 = active.iter().map(|u| e_i[u.index()]).sum();
        if e <= 0.0 {
            return Err(FactorError::ZeroTotalEnergy);
        }
        let mut w = [0.0; END_USE_COUNT];
        let mut e_masked = [0.0; END_USE_COUNT];
        let mut k_masked = [0.0; END_USE_COUNT];
        for u in active.iter() {
            let i = u.index();
            w[i] = e_i[i] / e;
            e_masked[i] = e_i[i];
            k_masked[i] = k[i];
        }
        let kw: f64 = active.iter().map(|u| k[u.index()] * w[u.index()]).sum();
        let state = FactorState {
            e_i: e_masked,
            e,
            k: k_masked,
            w,
            p,
            g,
            s,
            c: e * p * g * s * kw,
            active,
        };
        state.validate()?;
        Ok(state)
    }

    /// Weighted mean emission factor, sum of k_u * w_u over active uses.
    pub fn mean_emission_factor(&self) -> f64 {
        self.active
            .iter()
            .map(|u| self.k[u.index()] * self.w[u.index()])
            .sum()
    }

    /// Carbon intensity recomputed from the factors rather than read from
    /// the stored field.
    pub fn identity_intensity(&self) -> f64 {
        self.e * self.p * self.g * self.s * self.mean_emission_factor()
    }

    /// Check every invariant: finiteness, signs, share closure, and the
    /// algebraic consistency of the identity.
    pub fn validate(&self) -> Result<(), FactorError> {
        let fail = |msg: String| Err(FactorError::Invariant(msg));

        let scalars = [
            ("e", self.e),
            ("p", self.p),
            ("g", self.g),
            ("s", self.s),
        ];
        for (name, v) in scalars {
            if !v.is_finite() || v <= 0.0 {
                return fail(format!("{name} must be finite and positive (got {v})"));
            }
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return fail(format!("c must be finite and nonnegative (got {})", self.c));
        }
        for u in EndUse::ALL {
            let i = u.index();
            for (name, v) in [("e_i", self.e_i[i]), ("k", self.k[i]), ("w", self.w[i])] {
                if !v.is_finite() || v < 0.0 {
                    return fail(format!("{name}[{u}] must be finite and nonnegative (got {v})"));
                }
            }
            if !self.active.contains(u)
                && (self.e_i[i] != 0.0 || self.k[i] != 0.0 || self.w[i] != 0.0)
            {
                return fail(format!("inactive end use {u} carries nonzero factors"));
            }
        }

        let w_sum: f64 = self.active.iter().map(|u| self.w[u.index()]).sum();
        if (w_sum - 1.0).abs() > 1e-9 {
            return fail(format!("shares sum to {w_sum}, expected 1"));
        }
        for u in self.active.iter() {
            let i = u.index();
            let lhs = self.e * self.w[i];
            if (lhs - self.e_i[i]).abs() > 1e-9 * self.e_i[i].abs().max(f64::MIN_POSITIVE) {
                return fail(format!(
                    "e * w[{u}] = {lhs} inconsistent with e_i[{u}] = {}",
                    self.e_i[i]
                ));
            }
        }
        let identity = self.identity_intensity();
        if (identity - self.c).abs() > IDENTITY_REL_TOL * self.c.abs().max(f64::MIN_POSITIVE) {
            return fail(format!(
                "identity product {identity} inconsistent with c = {}",
                self.c
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::YearRecord;

    const NO_CARRY: [Option<f64>; END_USE_COUNT] = [None; END_USE_COUNT];

    fn record(energy: [f64; 6], emissions: [f64; 6]) -> YearRecord {
        YearRecord {
            year: 2000,
            population: 1000.0,
            households: 400.0,
            gdp: 5000.0,
            hce: 2000.0,
            floor_area: None,
            energy,
            emissions,
        }
    }

    #[test]
    fn direct_ratios_match_hand_values() {
        let e = [20.0, 30.0, 10.0, 10.0, 10.0, 20.0];
        let r = record(e, e);
        let state = FactorState::from_record(&r, EndUseSet::all(), &NO_CARRY).unwrap();
        assert_eq!(state.p, 2.5);
        assert_eq!(state.g, 5.0);
        assert_eq!(state.s, 0.4);
        assert_eq!(state.e, 0.05);
        assert_eq!(state.w, [0.2, 0.3, 0.1, 0.1, 0.1, 0.2]);
        assert!(state.k.iter().all(|&k| k == 1.0));
        assert_eq!(state.c, 0.25); // C / H = 100 / 400
        assert!((state.identity_intensity() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn emission_factor_is_direct_ratio() {
        let mut emis = [20.0, 30.0, 10.0, 10.0, 10.0, 20.0];
        emis[EndUse::SpaceCooling.index()] = 40.0;
        let r = record([20.0, 30.0, 10.0, 10.0, 10.0, 20.0], emis);
        let state = FactorState::from_record(&r, EndUseSet::all(), &NO_CARRY).unwrap();
        assert_eq!(state.k[EndUse::SpaceCooling.index()], 2.0);
    }

    #[test]
    fn excluded_use_leaves_shares_normalized() {
        let mut energy = [20.0, 0.0, 10.0, 10.0, 10.0, 20.0];
        let mut emis = energy;
        energy[EndUse::SpaceHeating.index()] = 0.0;
        emis[EndUse::SpaceHeating.index()] = 0.0;
        let active = EndUseSet::from_slice(&[
            EndUse::SpaceCooling,
            EndUse::Lighting,
            EndUse::WaterHeating,
            EndUse::Cooking,
            EndUse::AppliancesOthers,
        ]);
        let r = record(energy, emis);
        let state = FactorState::from_record(&r, active, &NO_CARRY).unwrap();
        let w_sum: f64 = active.iter().map(|u| state.w[u.index()]).sum();
        assert!((w_sum - 1.0).abs() < 1e-12);
        assert_eq!(state.w[EndUse::SpaceHeating.index()], 0.0);
        assert_eq!(state.k[EndUse::SpaceHeating.index()], 0.0);
    }

    #[test]
    fn scale_consistency_under_energy_rescale() {
        let e = [20.0, 30.0, 10.0, 10.0, 10.0, 20.0];
        let r = record(e, e);
        let base = FactorState::from_record(&r, EndUseSet::all(), &NO_CARRY).unwrap();

        let lambda = 3.5;
        let scaled_energy = e.map(|v| v * lambda);
        let r2 = record(scaled_energy, e);
        let scaled = FactorState::from_record(&r2, EndUseSet::all(), &NO_CARRY).unwrap();

        assert!((scaled.e - lambda * base.e).abs() < 1e-12);
        for i in 0..END_USE_COUNT {
            assert!((scaled.e_i[i] - lambda * base.e_i[i]).abs() < 1e-12);
            assert!((scaled.k[i] - base.k[i] / lambda).abs() < 1e-12);
            assert!((scaled.w[i] - base.w[i]).abs() < 1e-12);
        }
        assert_eq!(scaled.p, base.p);
        assert_eq!(scaled.g, base.g);
        assert_eq!(scaled.s, base.s);
        assert!((scaled.c - base.c).abs() < 1e-12 * base.c);
    }

    #[test]
    fn zero_total_energy_is_degenerate() {
        let r = record([0.0; 6], [0.0; 6]);
        assert!(matches!(
            FactorState::from_record(&r, EndUseSet::all(), &NO_CARRY),
            Err(FactorError::ZeroTotalEnergy)
        ));
    }

    #[test]
    fn from_parts_builds_consistent_state() {
        let mut e_i = [0.0; 6];
        e_i[0] = 1.0;
        let state = FactorState::from_parts(e_i, [1.0; 6], 1.0, 2.0, 3.0,
            EndUseSet::from_slice(&[EndUse::SpaceCooling])).unwrap();
        assert_eq!(state.w[0], 1.0);
        assert_eq!(state.c, 6.0);
        state.validate().unwrap();
    }
}
