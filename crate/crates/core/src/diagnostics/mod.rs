//! Variance measurements, the one-step SGD noise oracle, and density estimates.

pub mod comparison;
pub mod entropy;
pub mod kde;
pub mod lemma1;
pub mod variance;

pub use comparison::{variance_comparison, AgentKind, ComparisonSetup, VariancePair};
pub use entropy::action_entropy;
pub use kde::{kde_density, linspace, trapezoid, Bandwidth, DensityGrid};
pub use lemma1::{lemma1_oracle, Lemma1Report};
pub use variance::{output_variance, trajectory_variance, VarianceReport};
