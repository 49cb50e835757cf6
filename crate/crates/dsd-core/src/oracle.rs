//! Independent verification implementations.
//!
//! Three cross-checks for the integration engine, all implemented without
//! touching the engine's matrix path:
//!
//! * closed-form line integrals of small product identities along linear
//!   paths (exact polynomial integration),
//! * a fine-step Euler reference written in direct scalar algebra, run at
//!   a much larger segment count,
//! * an LMDI-I decomposition of the per-end-use identity, which is exactly
//!   additive by construction.

use crate::driver::{DriverId, DriverVec};
use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
use crate::engine::{
    DecompositionResult, IntegrationSettings, RunDiagnostics, SlackScheme,
};
use crate::error::OracleError;
use crate::factors::FactorState;
use crate::fixtures;

/// A product identity of up to four factors with linear endpoint paths.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyIdentity {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl ToyIdentity {
    pub fn new(start: Vec<f64>, end: Vec<f64>) -> Result<Self, OracleError> {
        if start.len() != end.len() {
            return Err(OracleError::MismatchedFactors(start.len(), end.len()));
        }
        if start.is_empty() || start.len() > 4 {
            return Err(OracleError::UnsupportedFactorCount(start.len()));
        }
        for (place, values) in [("start", &start), ("end", &end)] {
            if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                return Err(OracleError::NonpositiveFactor {
                    place: place.to_string(),
                    value: bad,
                });
            }
        }
        Ok(ToyIdentity { start, end })
    }

    pub fn factor_count(&self) -> usize {
        self.start.len()
    }

    /// Value of the product at the start and end.
    pub fn delta(&self) -> f64 {
        self.end.iter().product::<f64>() - self.start.iter().product::<f64>()
    }
}

/// Exact per-factor contributions along the straight path, by closed-form
/// polynomial integration of the partial derivatives.
pub fn analytic_line_integral(toy: &ToyIdentity) -> Result<Vec<f64>, OracleError> {
    let m = toy.factor_count();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        // Product over the other factors of (a_j + d_j t): polynomial of
        // degree at most 3 for m <= 4.
        let mut coef = vec![1.0f64];
        for j in 0..m {
            if j == i {
                continue;
            }
            let a = toy.start[j];
            let d = toy.end[j] - toy.start[j];
            let mut next = vec![0.0f64; coef.len() + 1];
            for (deg, &c) in coef.iter().enumerate() {
                next[deg] += c * a;
                next[deg + 1] += c * d;
            }
            coef = next;
        }
        let d_i = toy.end[i] - toy.start[i];
        let integral: f64 = coef
            .iter()
            .enumerate()
            .map(|(deg, &c)| c / (deg as f64 + 1.0))
            .sum();
        out.push(d_i * integral);
    }
    Ok(out)
}

/// Drivers a toy identity's factors map onto when embedded into a factor
/// state: g; (g, s); (p, g, s); (e, p, g, s).
pub fn toy_driver_ids(factor_count: usize) -> Result<&'static [DriverId], OracleError> {
    const ONE: [DriverId; 1] = [DriverId::GdpPerCapita];
    const TWO: [DriverId; 2] = [DriverId::GdpPerCapita, DriverId::ExpenditureShare];
    const THREE: [DriverId; 3] = [
        DriverId::HouseholdSize,
        DriverId::GdpPerCapita,
        DriverId::ExpenditureShare,
    ];
    const FOUR: [DriverId; 4] = [
        DriverId::EnergyIntensity,
        DriverId::HouseholdSize,
        DriverId::GdpPerCapita,
        DriverId::ExpenditureShare,
    ];
    match factor_count {
        1 => Ok(&ONE),
        2 => Ok(&TWO),
        3 => Ok(&THREE),
        4 => Ok(&FOUR),
        other => Err(OracleError::UnsupportedFactorCount(other)),
    }
}

/// Embed a toy identity into a pair of factor states (single active use,
/// unit emission factor, unused scalars frozen at one).
pub fn toy_states(toy: &ToyIdentity) -> Result<(FactorState, FactorState), OracleError> {
    let m = toy.factor_count();
    let fill = |values: &[f64]| {
        let mut scalars = [1.0f64; 4]; // e, p, g, s
        let offset = 4 - m;
        for (slot, &v) in scalars[offset..].iter_mut().zip(values.iter()) {
            *slot = v;
        }
        fixtures::scalar_state(scalars[0], scalars[1], scalars[2], scalars[3])
    };
    Ok((fill(&toy.start), fill(&toy.end)))
}

/// Fine-step Euler reference: the same recursion as the engine, written in
/// direct scalar algebra (no matrix assembly or generic solve), intended to
/// run at a much larger segment count than the engine under test.
pub fn fine_step_reference(
    start: &FactorState,
    end: &FactorState,
    segments: u32,
    slack: SlackScheme,
) -> Result<DecompositionResult, OracleError> {
    start.validate().map_err(crate::error::EngineError::from)?;
    end.validate().map_err(crate::error::EngineError::from)?;
    if start.active != end.active {
        return Err(OracleError::Engine(
            crate::error::EngineError::ActiveSetMismatch,
        ));
    }
    let active = start.active;
    let n = f64::from(segments);

    let de = (end.e - start.e) / n;
    let dp = (end.p - start.p) / n;
    let dg = (end.g - start.g) / n;
    let ds = (end.s - start.s) / n;
    let mut dk = [0.0; END_USE_COUNT];
    let mut df_shift = [0.0; END_USE_COUNT];
    for u in active.iter() {
        let i = u.index();
        dk[i] = (end.k[i] - start.k[i]) / n;
        df_shift[i] = (end.w[i] - start.w[i]) / n;
    }
    let shift_sum: f64 = active.iter().map(|u| df_shift[u.index()]).sum();

    let mut e = start.e;
    let mut p = start.p;
    let mut g = start.g;
    let mut s = start.s;
    let mut k = start.k;
    let mut w = start.w;
    let mut cum = DriverVec::zeros();
    let mut integrated = 0.0;
    let mut slack_path = 0.0;
    let mut max_closure = 0.0f64;
    let mut max_slack = 0.0f64;

    for _ in 0..segments {
        let pgs = p * g * s;
        let mut kw = 0.0;
        let mut k_sigma = 0.0;
        let mut sigma_sum = 0.0;
        for u in active.iter() {
            let i = u.index();
            let sigma = match slack {
                SlackScheme::Uniform => 1.0,
                SlackScheme::Proportional => w[i],
            };
            kw += k[i] * w[i];
            k_sigma += k[i] * sigma;
            sigma_sum += sigma;
        }
        let df = -shift_sum / sigma_sum;
        let slack_mean = k_sigma / sigma_sum;

        cum[DriverId::EnergyIntensity] += kw * pgs * de;
        cum[DriverId::HouseholdSize] += e * kw * g * s * dp;
        cum[DriverId::GdpPerCapita] += e * kw * p * s * dg;
        cum[DriverId::ExpenditureShare] += e * kw * p * g * ds;
        let mut dc = kw * pgs * de
            + e * kw * g * s * dp
            + e * kw * p * s * dg
            + e * kw * p * g * ds;
        for u in active.iter() {
            let i = u.index();
            let k_term = e * w[i] * pgs * dk[i];
            let f_term = e * pgs * (k[i] - slack_mean) * df_shift[i];
            cum[DriverId::EmissionFactor(u)] += k_term;
            cum[DriverId::ShareShift(u)] += f_term;
            dc += k_term + f_term;
        }
        integrated += dc;
        slack_path += df;

        let mut dw_sum = 0.0;
        for u in active.iter() {
            let i = u.index();
            let sigma = match slack {
                SlackScheme::Uniform => 1.0,
                SlackScheme::Proportional => w[i],
            };
            let dw = df_shift[i] + sigma * df;
            w[i] += dw;
            dw_sum += dw;
        }
        e += de;
        p += dp;
        g += dg;
        s += ds;
        for u in active.iter() {
            k[u.index()] += dk[u.index()];
        }
        max_closure = max_closure.max(dw_sum.abs());
        max_slack = max_slack.max(slack_path.abs());
    }

    // Same residual-closing rule as the engine, re-stated independently.
    let delta_c = end.c - start.c;
    let abs_total: f64 = cum.0.iter().map(|v| v.abs()).sum();
    if abs_total > 0.0 {
        let residual = delta_c - cum.0.iter().sum::<f64>();
        for v in &mut cum.0 {
            *v += residual * v.abs() / abs_total;
        }
    }

    Ok(DecompositionResult {
        interval: None,
        delta_c,
        contributions: cum,
        settings: IntegrationSettings { segments, slack },
        active_uses: active,
        diagnostics: RunDiagnostics {
            integrated_delta_c: integrated,
            max_share_closure_residual: max_closure,
            max_abs_slack: max_slack,
            terminal_shares: w,
        },
    })
}

/// LMDI-I contributions for the per-end-use identity c_u = e_u k_u p g s.
#[derive(Clone, Debug)]
pub struct LmdiDecomposition {
    pub delta_c: f64,
    /// Per-end-use effect of the expenditure-related energy intensity e_u.
    pub energy_intensity: [f64; END_USE_COUNT],
    /// Per-end-use effect of the emission factor k_u.
    pub emission_factor: [f64; END_USE_COUNT],
    pub household_size: f64,
    pub gdp_per_capita: f64,
    pub expenditure_share: f64,
    pub active: EndUseSet,
}

impl LmdiDecomposition {
    pub fn total(&self) -> f64 {
        self.energy_intensity.iter().sum::<f64>()
            + self.emission_factor.iter().sum::<f64>()
            + self.household_size
            + self.gdp_per_capita
            + self.expenditure_share
    }

    /// Aggregate e_u effect; comparable to the engine's energy-intensity
    /// driver plus all share-shift drivers combined (e_u = e * w_u, and
    /// LMDI has no slack concept to separate the two).
    pub fn energy_intensity_total(&self) -> f64 {
        self.energy_intensity.iter().sum()
    }

    pub fn emission_factor_total(&self) -> f64 {
        self.emission_factor.iter().sum()
    }

    /// Contributions arranged on the engine's driver axis, with the e_u
    /// effects pooled into the energy-intensity slot. Useful for totals and
    /// scalar-driver comparisons; structure drivers stay at zero.
    pub fn as_driver_vec(&self) -> DriverVec {
        let mut v = DriverVec::zeros();
        v[DriverId::EnergyIntensity] = self.energy_intensity_total();
        v[DriverId::HouseholdSize] = self.household_size;
        v[DriverId::GdpPerCapita] = self.gdp_per_capita;
        v[DriverId::ExpenditureShare] = self.expenditure_share;
        for u in EndUse::ALL {
            v[DriverId::EmissionFactor(u)] = self.emission_factor[u.index()];
        }
        v
    }
}

/// Logarithmic mean with L(a, a) = a.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

/// LMDI-I decomposition of a multiplicative identity along its factors.
pub fn lmdi_product(start: &[f64], end: &[f64]) -> Result<Vec<f64>, OracleError> {
    if start.len() != end.len() {
        return Err(OracleError::MismatchedFactors(start.len(), end.len()));
    }
    for (place, values) in [("start", start), ("end", end)] {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(OracleError::NonpositiveFactor {
                place: place.to_string(),
                value: bad,
            });
        }
    }
    let v0: f64 = start.iter().product();
    let v1: f64 = end.iter().product();
    let weight = log_mean(v1, v0);
    Ok(start
        .iter()
        .zip(end.iter())
        .map(|(&a, &b)| weight * (b / a).ln())
        .collect())
}

/// Apply LMDI-I per active end use and aggregate the scalar factors.
///
/// Every factor of every active use must be strictly positive at both
/// endpoints (the logarithmic mean is undefined otherwise).
pub fn lmdi_decompose(
    start: &FactorState,
    end: &FactorState,
) -> Result<LmdiDecomposition, OracleError> {
    if start.active != end.active {
        return Err(OracleError::Engine(
            crate::error::EngineError::ActiveSetMismatch,
        ));
    }
    let mut out = LmdiDecomposition {
        delta_c: end.c - start.c,
        energy_intensity: [0.0; END_USE_COUNT],
        emission_factor: [0.0; END_USE_COUNT],
        household_size: 0.0,
        gdp_per_capita: 0.0,
        expenditure_share: 0.0,
        active: start.active,
    };
    for u in start.active.iter() {
        let i = u.index();
        let factors_start = [start.e_i[i], start.k[i], start.p, start.g, start.s];
        let factors_end = [end.e_i[i], end.k[i], end.p, end.g, end.s];
        let parts = lmdi_product(&factors_start, &factors_end).map_err(|err| match err {
            OracleError::NonpositiveFactor { place, value } => OracleError::NonpositiveFactor {
                place: format!("{place} ({u})"),
                value,
            },
            other => other,
        })?;
        out.energy_intensity[i] = parts[0];
        out.emission_factor[i] = parts[1];
        out.household_size += parts[2];
        out.gdp_per_capita += parts[3];
        out.expenditure_share += parts[4];
    }
    Ok(out)
}
