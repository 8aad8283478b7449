//! Receiver-side estimators of the reference source state.
//!
//! All MAP estimators track the APP log-ratio
//! `lambda_n = ln P[X_n = 0 | y^n] / P[X_n = 1 | y^n]` and decide 0 iff it is
//! strictly positive.

mod forward;
mod oracle;
mod recursion;

pub use forward::{hmm_forward_step, llr_from_forward, ForwardState, ReactiveHmm};
pub use oracle::{brute_force_posterior, ORACLE_MAX_LEN, ORACLE_MAX_SOURCES};
pub use recursion::{step_myopic, step_random, MyopicRecursion, RandomRecursion};

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::observation::Observation;
use crate::policy::{Strategy, SystemConfig};
use crate::source::Bit;

/// Saturation bound for log-ratios, in nats. `entropy_from_llr(LLR_MAX)` is
/// about 2e-16 bits.
pub const LLR_MAX: f64 = 40.0;

/// APP log-ratio saturated to `[-LLR_MAX, LLR_MAX]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct LogRatio(f64);

impl LogRatio {
    pub const ZERO: LogRatio = LogRatio(0.0);
    pub const MAX: LogRatio = LogRatio(LLR_MAX);
    pub const MIN: LogRatio = LogRatio(-LLR_MAX);

    /// Clamps to the saturation range; infinities map to the bounds.
    pub fn saturating(value: f64) -> Self {
        assert!(!value.is_nan(), "log-ratio is NaN");
        LogRatio(value.clamp(-LLR_MAX, LLR_MAX))
    }

    /// Log-ratio of certainty in `x`.
    pub fn certain(x: Bit) -> Self {
        match x {
            Bit::Zero => Self::MAX,
            Bit::One => Self::MIN,
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Posterior `(P[X = 0], P[X = 1])`.
    #[inline]
    pub fn posterior(self) -> [f64; 2] {
        [1.0 / (1.0 + (-self.0).exp()), 1.0 / (1.0 + self.0.exp())]
    }

    /// `ln(num / den)` of two nonnegative masses, saturated.
    pub(crate) fn from_masses(num: f64, den: f64) -> Option<Self> {
        match (num > 0.0, den > 0.0) {
            (true, true) => Some(Self::saturating((num / den).ln())),
            (true, false) => Some(Self::MAX),
            (false, true) => Some(Self::MIN),
            (false, false) => None,
        }
    }
}

/// Entropy of the posterior encoded by `lambda`, in bits.
pub fn entropy_from_llr(lambda: LogRatio) -> f64 {
    let a = lambda.value().abs();
    let tail = (-a).exp();
    let small = tail / (1.0 + tail);
    let log_term = tail.ln_1p();
    ((1.0 - small) * log_term + small * (a + log_term)) / LN_2
}

/// MAP threshold test; ties go to 1.
#[inline]
pub fn map_decision(lambda: LogRatio) -> Bit {
    if lambda.value() > 0.0 {
        Bit::Zero
    } else {
        Bit::One
    }
}

/// Decode-and-hold estimate: the last reference state seen on the channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DhEstimate {
    pub est: Bit,
}

impl Default for DhEstimate {
    fn default() -> Self {
        Self { est: Bit::Zero }
    }
}

pub fn dh_step(prev: DhEstimate, y: Observation) -> DhEstimate {
    match y.reference_state() {
        Some(est) => DhEstimate { est },
        None => prev,
    }
}

/// MAP filter matched to a system configuration.
#[derive(Clone, Debug)]
pub enum MapFilter {
    Random(RandomRecursion, LogRatio),
    Myopic(MyopicRecursion, LogRatio),
    Exact(Box<ReactiveHmm>, ForwardState),
}

impl MapFilter {
    /// The exact filter of each strategy: the scalar recursion for random
    /// access, the 2M-state forward filter for reactive access.
    pub fn for_config(cfg: &SystemConfig) -> Result<Self> {
        match cfg.strategy() {
            Strategy::Random { .. } => Ok(MapFilter::Random(
                RandomRecursion::new(cfg)?,
                LogRatio::ZERO,
            )),
            Strategy::Reactive => Self::exact(cfg),
        }
    }

    /// The myopic recursion under the surrogate model; reactive strategy only.
    pub fn myopic(cfg: &SystemConfig) -> Result<Self> {
        Ok(MapFilter::Myopic(
            MyopicRecursion::new(cfg)?,
            LogRatio::ZERO,
        ))
    }

    /// The exact 2M-state forward filter; reactive strategy only.
    pub fn exact(cfg: &SystemConfig) -> Result<Self> {
        let hmm = ReactiveHmm::new(cfg)?;
        let init = hmm.initial();
        Ok(MapFilter::Exact(Box::new(hmm), init))
    }

    pub fn step(&mut self, y: Observation) -> Result<LogRatio> {
        match self {
            MapFilter::Random(rec, lambda) => *lambda = rec.step(*lambda, y)?,
            MapFilter::Myopic(rec, lambda) => *lambda = rec.step(*lambda, y)?,
            MapFilter::Exact(hmm, f) => *f = hmm.step(f, y)?,
        }
        Ok(self.llr())
    }

    pub fn llr(&self) -> LogRatio {
        match self {
            MapFilter::Random(_, lambda) | MapFilter::Myopic(_, lambda) => *lambda,
            MapFilter::Exact(_, f) => llr_from_forward(f),
        }
    }
}
