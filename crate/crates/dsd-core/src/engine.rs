//! The shift/slack differential system and the N-segment Euler recursion.
//!
//! The endogenous vector is y = (c, F_slack), the exogenous vector z holds
//! the sixteen drivers. At each valid state the total differential of the
//! intensity identity condenses into `A . dy = B . dz`, with the second row
//! enforcing that end-use shares keep summing to one whenever share shifts
//! occur. Exogenous paths are linear: each driver advances by delta_z / N
//! per segment, the system is re-assembled at the start of every segment,
//! and the per-driver contributions `D = sum_n A^-1 B diag(dz)` accumulate
//! row 1 into the decomposition.
//!
//! Euler integration leaves a first-order residual between the accumulated
//! intensity change and the analytic endpoint difference. For historical
//! runs the residual is closed by distributing it over drivers in
//! proportion to their absolute accumulated contributions, which keeps the
//! decomposition exactly additive and leaves single-driver runs exact.

use serde::{Deserialize, Serialize};

use crate::driver::{DriverId, DriverVec, DRIVER_COUNT};
use crate::enduse::{EndUse, EndUseSet, END_USE_COUNT};
use crate::error::EngineError;
use crate::factors::FactorState;

/// Guard on |det A| before inverting the 2x2 system.
pub const DET_GUARD: f64 = 1e-12;

/// How the slack component is spread over end uses when closing shares.
///
/// `Uniform` applies the slack term identically to every active use
/// (dw_u = dF_u + dF); `Proportional` weights it by the current share
/// (dw_u = dF_u + w_u * dF).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlackScheme {
    Uniform,
    Proportional,
}

impl SlackScheme {
    pub fn label(self) -> &'static str {
        match self {
            SlackScheme::Uniform => "uniform",
            SlackScheme::Proportional => "proportional",
        }
    }
}

impl std::str::FromStr for SlackScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SlackScheme::Uniform),
            "proportional" => Ok(SlackScheme::Proportional),
            other => Err(format!("unknown slack scheme '{other}'")),
        }
    }
}

/// Integration settings: segment count and slack scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub segments: u32,
    pub slack: SlackScheme,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            segments: 16_000,
            slack: SlackScheme::Uniform,
        }
    }
}

impl IntegrationSettings {
    pub fn with_segments(segments: u32) -> Self {
        IntegrationSettings {
            segments,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.segments == 0 {
            return Err(EngineError::InvalidSettings(
                "segments must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// The condensed differential system at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrices {
    /// 2x2 over the endogenous vector (c, F_slack).
    pub a: [[f64; 2]; 2],
    /// 2x16 over the exogenous drivers in canonical order.
    pub b: [[f64; DRIVER_COUNT]; 2],
}

impl SystemMatrices {
    /// Per-driver first-row entries of `A^-1 B diag(dz)` together with the
    /// endogenous increments (dc, dF).
    fn apply(
        &self,
        dz: &[f64; DRIVER_COUNT],
        segment: u32,
    ) -> Result<([f64; DRIVER_COUNT], f64, f64), EngineError> {
        let det = self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0];
        if det.abs() <= DET_GUARD {
            return Err(EngineError::Singular { segment, det });
        }
        let inv = [
            [self.a[1][1] / det, -self.a[0][1] / det],
            [-self.a[1][0] / det, self.a[0][0] / det],
        ];
        let mut row = [0.0; DRIVER_COUNT];
        let mut dc = 0.0;
        let mut df = 0.0;
        for col in 0..DRIVER_COUNT {
            let top = inv[0][0] * self.b[0][col] + inv[0][1] * self.b[1][col];
            let bottom = inv[1][0] * self.b[0][col] + inv[1][1] * self.b[1][col];
            row[col] = top * dz[col];
            dc += row[col];
            df += bottom * dz[col];
        }
        Ok((row, dc, df))
    }
}

/// Assemble A and B at a state given by raw factor values.
fn assemble(
    e: f64,
    p: f64,
    g: f64,
    s: f64,
    k: &[f64; END_USE_COUNT],
    w: &[f64; END_USE_COUNT],
    active: EndUseSet,
    slack: SlackScheme,
) -> SystemMatrices {
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

    let mut a = [[0.0; 2]; 2];
    a[0][0] = 1.0;
    a[0][1] = -e * pgs * k_sigma;
    a[1][0] = 0.0;
    a[1][1] = sigma_sum;

    let mut b = [[0.0; DRIVER_COUNT]; 2];
    b[0][DriverId::EnergyIntensity.index()] = kw * pgs;
    b[0][DriverId::HouseholdSize.index()] = e * kw * g * s;
    b[0][DriverId::GdpPerCapita.index()] = e * kw * p * s;
    b[0][DriverId::ExpenditureShare.index()] = e * kw * p * g;
    for u in active.iter() {
        let i = u.index();
        b[0][DriverId::EmissionFactor(u).index()] = e * w[i] * pgs;
        b[0][DriverId::ShareShift(u).index()] = e * k[i] * pgs;
        b[1][DriverId::ShareShift(u).index()] = -1.0;
    }
    SystemMatrices { a, b }
}

/// Assemble the differential system at a factor state.
pub fn build_system_matrices(state: &FactorState, slack: SlackScheme) -> SystemMatrices {
    assemble(
        state.e,
        state.p,
        state.g,
        state.s,
        &state.k,
        &state.w,
        state.active,
        slack,
    )
}

/// Numerical provenance of one run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// Intensity change accumulated by the recursion itself, before any
    /// residual closing.
    pub integrated_delta_c: f64,
    /// Largest |sum of dw over active uses| seen at any segment.
    pub max_share_closure_residual: f64,
    /// Largest |slack path value| seen at any segment.
    pub max_abs_slack: f64,
    /// End-use shares at the terminal state of the integration.
    pub terminal_shares: [f64; END_USE_COUNT],
}

/// Per-driver cumulative contributions to an intensity change.
///
/// Intensity quantities are in the same units as the input states' `c`
/// (ktCO2 per household for dataset-derived states; reporting layers
/// rescale to kgCO2 per household).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionResult {
    /// (start year, end year) when the run came from dataset years.
    pub interval: Option<(i32, i32)>,
    /// Total intensity change the contributions sum to.
    pub delta_c: f64,
    pub contributions: DriverVec,
    pub settings: IntegrationSettings,
    pub active_uses: EndUseSet,
    pub diagnostics: RunDiagnostics,
}

impl DecompositionResult {
    /// |sum of contributions - delta_c|, the additivity defect.
    pub fn additivity_gap(&self) -> f64 {
        (self.contributions.total() - self.delta_c).abs()
    }

    /// Rescale every intensity quantity (unit change, e.g. kt to kg per
    /// household). Preserves additivity exactly.
    pub fn scale_intensity(&mut self, factor: f64) {
        self.delta_c *= factor;
        self.contributions.scale(factor);
        self.diagnostics.integrated_delta_c *= factor;
    }
}

struct Integration {
    contributions: DriverVec,
    integrated_delta_c: f64,
    max_share_closure_residual: f64,
    max_abs_slack: f64,
    terminal_shares: [f64; END_USE_COUNT],
}

/// Core Euler recursion over `segments` equal exogenous increments.
fn integrate(
    start: &FactorState,
    dz_total: &[f64; DRIVER_COUNT],
    settings: &IntegrationSettings,
    check_share_range: bool,
) -> Result<Integration, EngineError> {
    let n = settings.segments;
    let active = start.active;
    let mut dz = [0.0; DRIVER_COUNT];
    for i in 0..DRIVER_COUNT {
        dz[i] = dz_total[i] / f64::from(n);
    }

    let mut e = start.e;
    let mut p = start.p;
    let mut g = start.g;
    let mut s = start.s;
    let mut k = start.k;
    let mut w = start.w;
    let mut slack_path = 0.0;
    let mut integrated = 0.0;
    let mut cum = DriverVec::zeros();
    let mut max_closure = 0.0f64;
    let mut max_slack = 0.0f64;

    for segment in 1..=n {
        let matrices = assemble(e, p, g, s, &k, &w, active, settings.slack);
        let (row, dc, df) = matrices.apply(&dz, segment)?;
        for i in 0..DRIVER_COUNT {
            cum.0[i] += row[i];
        }
        integrated += dc;
        slack_path += df;

        // Advance the exogenous state along its linear path; shares follow
        // their shift plus the slack reallocation at the pre-update sigma.
        let mut dw_sum = 0.0;
        for u in active.iter() {
            let i = u.index();
            let sigma = match settings.slack {
                SlackScheme::Uniform => 1.0,
                SlackScheme::Proportional => w[i],
            };
            let dw = dz[DriverId::ShareShift(u).index()] + sigma * df;
            w[i] += dw;
            dw_sum += dw;
        }
        e += dz[DriverId::EnergyIntensity.index()];
        p += dz[DriverId::HouseholdSize.index()];
        g += dz[DriverId::GdpPerCapita.index()];
        s += dz[DriverId::ExpenditureShare.index()];
        for u in active.iter() {
            let i = u.index();
            k[i] += dz[DriverId::EmissionFactor(u).index()];
        }

        max_closure = max_closure.max(dw_sum.abs());
        max_slack = max_slack.max(slack_path.abs());

        if check_share_range {
            for u in active.iter() {
                let v = w[u.index()];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return Err(EngineError::ShareRange {
                        segment,
                        end_use: u,
                        value: v,
                    });
                }
            }
        }

        let finite = integrated.is_finite()
            && slack_path.is_finite()
            && e.is_finite()
            && p.is_finite()
            && g.is_finite()
            && s.is_finite()
            && w.iter().chain(k.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(EngineError::NonFinite { segment });
        }
    }

    Ok(Integration {
        contributions: cum,
        integrated_delta_c: integrated,
        max_share_closure_residual: max_closure,
        max_abs_slack: max_slack,
        terminal_shares: w,
    })
}

/// Distribute the Euler residual `target - sum(contributions)` over drivers
/// in proportion to |contribution|, making the decomposition exactly
/// additive against `target`.
fn close_residual(contributions: &mut DriverVec, target: f64) {
    let denom = contributions.abs_total();
    if denom > 0.0 {
        let residual = target - contributions.total();
        for v in &mut contributions.0 {
            *v += residual * v.abs() / denom;
        }
    }
}

/// Decompose the intensity change between two observed states.
///
/// Exogenous totals are endpoint differences; the share-shift gauge is
/// historical (delta_F_u = delta_w_u, zero aggregate shift), under which the
/// slack path stays identically zero. Contributions sum to the analytic
/// `end.c - start.c` exactly.
pub fn run_dsd(
    start: &FactorState,
    end: &FactorState,
    settings: &IntegrationSettings,
) -> Result<DecompositionResult, EngineError> {
    settings.validate()?;
    start.validate()?;
    end.validate()?;
    if start.active != end.active {
        return Err(EngineError::ActiveSetMismatch);
    }

    let mut dz = [0.0; DRIVER_COUNT];
    dz[DriverId::EnergyIntensity.index()] = end.e - start.e;
    dz[DriverId::HouseholdSize.index()] = end.p - start.p;
    dz[DriverId::GdpPerCapita.index()] = end.g - start.g;
    dz[DriverId::ExpenditureShare.index()] = end.s - start.s;
    for u in start.active.iter() {
        let i = u.index();
        dz[DriverId::EmissionFactor(u).index()] = end.k[i] - start.k[i];
        dz[DriverId::ShareShift(u).index()] = end.w[i] - start.w[i];
    }

    let run = integrate(start, &dz, settings, false)?;
    let delta_c = end.c - start.c;
    let mut contributions = run.contributions;
    close_residual(&mut contributions, delta_c);

    Ok(DecompositionResult {
        interval: None,
        delta_c,
        contributions,
        settings: *settings,
        active_uses: start.active,
        diagnostics: RunDiagnostics {
            integrated_delta_c: run.integrated_delta_c,
            max_share_closure_residual: run.max_share_closure_residual,
            max_abs_slack: run.max_abs_slack,
            terminal_shares: run.terminal_shares,
        },
    })
}

/// Integrate a share-shift scenario at a fixed state: only the share-shift
/// drivers move, and the slack mechanism reallocates whatever the shifts
/// leave open. Shares are checked against [0, 1] at every segment.
///
/// `delta_c` is the integrated intensity change of the scenario (there is
/// no observed endpoint to close against).
pub fn counterfactual_share_shift(
    state: &FactorState,
    shifts: &[f64; END_USE_COUNT],
    settings: &IntegrationSettings,
) -> Result<DecompositionResult, EngineError> {
    settings.validate()?;
    state.validate()?;
    for u in EndUse::ALL {
        if !state.active.contains(u) && shifts[u.index()] != 0.0 {
            return Err(EngineError::InactiveShift(u));
        }
    }

    let mut dz = [0.0; DRIVER_COUNT];
    for u in state.active.iter() {
        dz[DriverId::ShareShift(u).index()] = shifts[u.index()];
    }

    let run = integrate(state, &dz, settings, true)?;
    Ok(DecompositionResult {
        interval: None,
        delta_c: run.integrated_delta_c,
        contributions: run.contributions,
        settings: *settings,
        active_uses: state.active,
        diagnostics: RunDiagnostics {
            integrated_delta_c: run.integrated_delta_c,
            max_share_closure_residual: run.max_share_closure_residual,
            max_abs_slack: run.max_abs_slack,
            terminal_shares: run.terminal_shares,
        },
    })
}
