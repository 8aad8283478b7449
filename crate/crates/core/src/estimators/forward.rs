//! Exact forward filter over the `2M` joint states `(x, s)` of the reactive
//! HMM, where `s` counts the other sources in state 0.

use crate::error::{Error, Result};
use crate::estimators::LogRatio;
use crate::observation::{binomial, CountModel, HmmState, Observation};
use crate::policy::{Strategy, SystemConfig};
use crate::source::{stationary_distribution, Bit};

/// Normalized forward probabilities `P(sigma_n | y^n)`, indexed `x * M + s`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardState {
    counts: usize,
    probs: Vec<f64>,
}

impl ForwardState {
    /// Builds a state from raw nonnegative weights, normalizing them.
    pub fn from_weights(counts: usize, mut probs: Vec<f64>) -> Option<Self> {
        if probs.len() != 2 * counts || probs.iter().any(|&p| !(p >= 0.0)) {
            return None;
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Some(Self { counts, probs })
    }

    #[inline]
    pub fn counts(&self) -> usize {
        self.counts
    }

    #[inline]
    pub fn get(&self, state: HmmState) -> f64 {
        self.probs[state.x.index() * self.counts + state.s]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal of the reference state.
    pub fn reference_marginal(&self) -> [f64; 2] {
        let (zero, one) = self.probs.split_at(self.counts);
        [zero.iter().sum(), one.iter().sum()]
    }
}

/// Reactive HMM with precomputed count tables. Each step costs `O(M^2)` on
/// collisions and `O(M)` otherwise.
#[derive(Clone, Debug)]
pub struct ReactiveHmm {
    model: CountModel,
}

impl ReactiveHmm {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        if cfg.strategy() != Strategy::Reactive {
            return Err(Error::WrongStrategy {
                expected: "reactive",
            });
        }
        Ok(Self {
            model: CountModel::new(cfg.source(), cfg.sources())?,
        })
    }

    pub fn model(&self) -> &CountModel {
        &self.model
    }

    /// Uniform over the reference state, stationary binomial law for the count.
    pub fn initial(&self) -> ForwardState {
        let m = self.model.counts();
        let (pi0, pi1) = stationary_distribution(self.model.params());
        let others = m - 1;
        let mut probs = vec![0.0; 2 * m];
        for s in 0..m {
            let w = 0.5 * binomial(others, s) * pi0.powi(s as i32) * pi1.powi((others - s) as i32);
            probs[s] = w;
            probs[m + s] = w;
        }
        ForwardState::from_weights(m, probs).expect("initial law has positive mass")
    }

    /// `f(sigma) = sum_{sigma'} P(y | sigma', sigma) P(sigma | sigma') f_prev(sigma')`,
    /// renormalized.
    pub fn step(&self, prev: &ForwardState, y: Observation) -> Result<ForwardState> {
        let m = self.model.counts();
        debug_assert_eq!(prev.counts, m);
        let p = self.model.params();
        let mut out = vec![0.0; 2 * m];
        for x in Bit::BOTH {
            for x_now in Bit::BOTH {
                let flipped = x != x_now;
                let t = p.q(x, x_now);
                let src = &prev.probs[x.index() * m..(x.index() + 1) * m];
                let dst = &mut out[x_now.index() * m..(x_now.index() + 1) * m];
                for (s, &f) in src.iter().enumerate() {
                    let w = f * t;
                    if w == 0.0 {
                        continue;
                    }
                    match (y, flipped) {
                        (Observation::Collision, _) => {
                            let row = self.model.collide_row(flipped, s);
                            for (d, &r) in dst.iter_mut().zip(row) {
                                *d += w * r;
                            }
                        }
                        (Observation::Idle, false) => dst[s] += w * self.model.still(s),
                        (Observation::OtherOne, false) if s > 0 => {
                            dst[s - 1] += w * self.model.single_up(s)
                        }
                        (Observation::OtherZero, false) if s + 1 < m => {
                            dst[s + 1] += w * self.model.single_down(s)
                        }
                        (Observation::Zero | Observation::One, true)
                            if y == Observation::letter(x_now) =>
                        {
                            dst[s] += w * self.model.still(s)
                        }
                        _ => {}
                    }
                }
            }
        }
        ForwardState::from_weights(m, out).ok_or(Error::ImpossibleObservation(y))
    }
}

/// One forward step; builds the count tables on every call.
pub fn hmm_forward_step(
    cfg: &SystemConfig,
    prev: &ForwardState,
    y: Observation,
) -> Result<ForwardState> {
    ReactiveHmm::new(cfg)?.step(prev, y)
}

/// `ln sum_s f(0, s) / sum_s f(1, s)`, saturated.
pub fn llr_from_forward(f: &ForwardState) -> LogRatio {
    let [zero, one] = f.reference_marginal();
    LogRatio::from_masses(zero, one).expect("forward state has positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{step_myopic, MyopicRecursion};
    use crate::source::SourceParams;

    fn reactive(m: usize, q01: f64, q10: f64) -> SystemConfig {
        SystemConfig::new(m, SourceParams::new(q01, q10).unwrap(), Strategy::Reactive).unwrap()
    }

    #[test]
    fn llr_examples() {
        let f = ForwardState::from_weights(3, vec![1.0; 6]).unwrap();
        assert_eq!(llr_from_forward(&f), LogRatio::ZERO);
        let f = ForwardState::from_weights(3, vec![0.2, 0.3, 0.1, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(llr_from_forward(&f), LogRatio::MAX);
        assert!(ForwardState::from_weights(2, vec![0.0; 4]).is_none());
    }

    #[test]
    fn collision_after_known_states_reveals_double_flip() {
        // M = 2: reference known in 1, the other known in 1
        let cfg = reactive(2, 0.3, 0.3);
        let hmm = ReactiveHmm::new(&cfg).unwrap();
        let known = ForwardState::from_weights(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let f = hmm.step(&known, Observation::Collision).unwrap();
        assert_eq!(f.get(HmmState::new(Bit::Zero, 1)), 1.0);
        assert_eq!(llr_from_forward(&f), LogRatio::MAX);
    }

    #[test]
    fn symmetric_trace_matches_myopic() {
        let cfg = reactive(2, 0.2, 0.2);
        let hmm = ReactiveHmm::new(&cfg).unwrap();
        let trace = [
            Observation::Idle,
            Observation::OtherOne,
            Observation::Collision,
            Observation::Zero,
            Observation::Collision,
        ];
        let mut f = hmm.initial();
        let mut l = LogRatio::ZERO;
        for y in trace {
            f = hmm.step(&f, y).unwrap();
            l = step_myopic(&cfg, l, y).unwrap();
            assert!((llr_from_forward(&f).value() - l.value()).abs() < 1e-12);
        }
    }

    #[test]
    fn free_function_matches_model() {
        let cfg = reactive(4, 0.05, 0.3);
        let hmm = ReactiveHmm::new(&cfg).unwrap();
        let f0 = hmm.initial();
        let a = hmm.step(&f0, Observation::Collision).unwrap();
        let b = hmm_forward_step(&cfg, &f0, Observation::Collision).unwrap();
        assert_eq!(a, b);
        let _ = MyopicRecursion::new(&cfg).unwrap();
    }

    #[test]
    fn impossible_observation_is_reported() {
        let cfg = reactive(1, 0.2, 0.4);
        let hmm = ReactiveHmm::new(&cfg).unwrap();
        assert!(matches!(
            hmm.step(&hmm.initial(), Observation::OtherZero),
            Err(Error::ImpossibleObservation(_))
        ));
    }
}
