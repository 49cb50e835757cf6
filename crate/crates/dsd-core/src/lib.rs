//! Driver decomposition of residential-building operational carbon
//! intensity.
//!
//! The intensity identity `c = sum_u e * k_u * w_u * p * g * s` is
//! integrated along linear driver paths with an N-segment Euler recursion
//! over a shift/slack differential system, attributing the observed change
//! in carbon intensity per household to sixteen exogenous drivers. On top
//! of the engine sit reporting shapes (yearly chains, stage aggregates,
//! contribution rates, per-end-use breakdowns), decarbonization scales,
//! and independent verification oracles (closed-form line integrals, a
//! fine-step reference, and LMDI-I).
//!
//! Chains of independent year-pair runs execute in parallel via rayon when
//! the `parallel` feature (default) is enabled; disabling it yields a fully
//! sequential build with identical results.

pub mod dataset;
pub mod decomposition;
pub mod driver;
pub mod enduse;
pub mod engine;
pub mod error;
pub mod exec;
pub mod factors;
pub mod fixtures;
pub mod metrics;
pub mod oracle;
pub mod units;

pub use dataset::{interpolate_years, load_dataset, Dataset, YearRecord};
pub use decomposition::{
    aggregate_stages, chain_yearly, chain_yearly_seq, contribution_rates, decompose_endpoint,
    enduse_breakdown, EndUseBreakdown, RateReport,
};
pub use driver::{DriverId, DriverVec, DRIVER_COUNT};
pub use enduse::{EndUse, EndUseSet, END_USE_COUNT};
pub use engine::{
    build_system_matrices, counterfactual_share_shift, run_dsd, DecompositionResult,
    IntegrationSettings, SlackScheme, SystemMatrices,
};
pub use factors::FactorState;
pub use metrics::{
    annual_decarbonization, decarbonization_efficiency, scale_series, DecarbSeries,
    NegativeDriverPolicy, Scale,
};
pub use units::UnitConfig;
