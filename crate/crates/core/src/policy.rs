//! Channel access strategies and their per-slot delivery statistics.

use crate::error::{Error, Result};
use crate::observation::binomial_tail;
use crate::source::{check_open_unit, stationary_distribution, SourceParams};

/// How a node decides to transmit in a slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Transmit i.i.d. with the given activation probability, independent of the source.
    Random { alpha: f64 },
    /// Transmit exactly in the slots where the source changes state.
    Reactive,
}

impl Strategy {
    pub fn random(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(Strategy::Random { alpha })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random { .. } => "random",
            Strategy::Reactive => "reactive",
        }
    }
}

/// `M` independent, identically parameterized sources sharing one channel.
/// Source 0 is the reference source tracked by the receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemConfig {
    sources: usize,
    source: SourceParams,
    strategy: Strategy,
}

impl SystemConfig {
    pub fn new(sources: usize, source: SourceParams, strategy: Strategy) -> Result<Self> {
        if sources == 0 {
            return Err(Error::TooFewSources { min: 1, got: 0 });
        }
        if let Strategy::Random { alpha } = strategy {
            check_open_unit("alpha", alpha)?;
        }
        Ok(Self {
            sources,
            source,
            strategy,
        })
    }

    /// Number of sources `M`.
    #[inline]
    pub fn sources(&self) -> usize {
        self.sources
    }

    #[inline]
    pub fn source(&self) -> &SourceParams {
        &self.source
    }

    #[inline]
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn activation_probability(&self) -> f64 {
        activation_probability(&self.strategy, &self.source)
    }

    pub fn delivery_probability(&self) -> f64 {
        delivery_probability(&self.strategy, &self.source, self.sources)
    }
}

/// `alpha` for the random strategy; the stationary probability of a state
/// change, `2 q01 q10 / (q01 + q10)`, for the reactive one.
pub fn activation_probability(s: &Strategy, p: &SourceParams) -> f64 {
    match *s {
        Strategy::Random { alpha } => alpha,
        Strategy::Reactive => {
            let (pi0, pi1) = stationary_distribution(p);
            pi0 * p.q01() + pi1 * p.q10()
        }
    }
}

/// Probability that the reference source delivers an update in a slot,
/// `a (1 - a)^(M - 1)`. Exact for the random strategy and for symmetric
/// reactive sources; the myopic approximation otherwise.
pub fn delivery_probability(s: &Strategy, p: &SourceParams, sources: usize) -> f64 {
    success_probability(activation_probability(s, p), sources)
}

/// `a (1 - a)^(M - 1)` for a raw activation probability.
pub fn success_probability(a: f64, sources: usize) -> f64 {
    a * (1.0 - a).powi(sources as i32 - 1)
}

/// Average age of information in slots, `1/2 + 1/omega`. Returns
/// `f64::INFINITY` when `omega == 0` (no deliveries).
pub fn average_aoi(omega: f64) -> f64 {
    if omega <= 0.0 {
        f64::INFINITY
    } else {
        0.5 + 1.0 / omega
    }
}

/// Likelihood ratio `P[X_n = X_{n-1}, Y_n = C] / P[X_n != X_{n-1}, Y_n = C]`
/// under the myopic model with per-node activation probability `a`.
pub fn collision_likelihood_ratio(a: f64, sources: usize) -> Result<f64> {
    if sources < 2 {
        return Err(Error::TooFewSources {
            min: 2,
            got: sources,
        });
    }
    check_open_unit("a", a)?;
    let others = sources as i32 - 1;
    // at least two of the others when the reference holds, at least one when it flips
    let at_least_two = binomial_tail(others as usize, a, 2);
    let at_least_one = -(others as f64 * (-a).ln_1p()).exp_m1();
    Ok((1.0 - a) * at_least_two / (a * at_least_one))
}
