//! Monte Carlo harness: source laws, bandwidth rules, the excess-risk rate
//! experiment and the smoothing-bias experiment.

pub mod bandwidth;
pub mod bias;
pub mod rate;
pub mod source;

pub use bandwidth::{cv_bandwidth, rate_exponent, theoretical_bandwidth, CvOutcome, CvSetup};
pub use bias::{run_bias_experiment, BiasConfig, BiasOutcome};
pub use rate::{run_rate_experiment, BandwidthRule, PairedComparison, RateConfig, RateFit, RateOutcome, RateRow};
pub use source::{contaminate, SourceKind, SourceModel};
