//! Experiment sweeps over the `markov-aloha` evaluation routes, driven by TOML
//! specs and written as CSV.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csv;
pub mod experiment;
pub mod presets;
pub mod spec;

pub use experiment::{run_experiment, ExperimentOutput, Metric, PointError, Row};
pub use spec::{parse_spec, parse_spec_with, ExperimentSpec, Route, SpecError, StrategyKind};
