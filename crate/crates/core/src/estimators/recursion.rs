//! Scalar log-ratio recursions with complexity independent of `M`.

use crate::error::{Error, Result};
use crate::estimators::LogRatio;
use crate::observation::{myopic_obs_dist, random_obs_dist, Observation};
use crate::policy::{Strategy, SystemConfig};
use crate::source::{Bit, SourceParams};

/// Channel term `ln P(y|0) / P(y|1)` per letter; `None` marks a letter the
/// model cannot produce.
#[derive(Clone, Debug)]
pub struct RandomRecursion {
    params: SourceParams,
    channel: [Option<f64>; 6],
}

impl RandomRecursion {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let d0 = random_obs_dist(cfg, Bit::Zero)?;
        let d1 = random_obs_dist(cfg, Bit::One)?;
        let mut channel = [None; 6];
        for y in Observation::ALL {
            let (p0, p1) = (d0.prob(y), d1.prob(y));
            channel[y.index()] = match (p0 > 0.0, p1 > 0.0) {
                (true, true) => Some((p0 / p1).ln()),
                (true, false) => Some(f64::INFINITY),
                (false, true) => Some(f64::NEG_INFINITY),
                (false, false) => None,
            };
        }
        Ok(Self {
            params: *cfg.source(),
            channel,
        })
    }

    /// `f(y, lambda_prev)`: channel term plus the one-step prediction
    /// `ln (q00 + q10 e^-l) / (q01 + q11 e^-l)`.
    pub fn step(&self, prev: LogRatio, y: Observation) -> Result<LogRatio> {
        let channel = self.channel[y.index()].ok_or(Error::ImpossibleObservation(y))?;
        if channel.is_infinite() {
            return Ok(LogRatio::saturating(channel));
        }
        let p = &self.params;
        let e = (-prev.value()).exp();
        let predict = ((p.q00() + p.q10() * e) / (p.q01() + p.q11() * e)).ln();
        Ok(LogRatio::saturating(channel + predict))
    }
}

/// One step of the random-strategy recursion.
pub fn step_random(cfg: &SystemConfig, prev: LogRatio, y: Observation) -> Result<LogRatio> {
    RandomRecursion::new(cfg)?.step(prev, y)
}

/// Myopic recursion for the reactive strategy: the other sources are treated
/// as i.i.d. transmitters with the stationary flip probability.
#[derive(Clone, Debug)]
pub struct MyopicRecursion {
    /// `weights[y][x_prev][x_now] = P(y | x_prev, x_now) q_{x_prev x_now}`
    weights: [[[f64; 2]; 2]; 6],
}

impl MyopicRecursion {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        if cfg.strategy() != Strategy::Reactive {
            return Err(Error::WrongStrategy {
                expected: "reactive",
            });
        }
        let a = cfg.activation_probability();
        let p = cfg.source();
        let mut weights = [[[0.0; 2]; 2]; 6];
        for prev in Bit::BOTH {
            for now in Bit::BOTH {
                let d = myopic_obs_dist(cfg.sources(), a, prev, now);
                for y in Observation::ALL {
                    weights[y.index()][prev.index()][now.index()] = d.prob(y) * p.q(prev, now);
                }
            }
        }
        Ok(Self { weights })
    }

    /// `g(y, lambda_prev)`.
    pub fn step(&self, prev: LogRatio, y: Observation) -> Result<LogRatio> {
        let [w0, w1] = prev.posterior();
        let t = &self.weights[y.index()];
        let num = t[0][0] * w0 + t[1][0] * w1;
        let den = t[0][1] * w0 + t[1][1] * w1;
        LogRatio::from_masses(num, den).ok_or(Error::ImpossibleObservation(y))
    }

    pub(crate) fn weights(&self, y: Observation) -> &[[f64; 2]; 2] {
        &self.weights[y.index()]
    }
}

/// One step of the myopic recursion.
pub fn step_myopic(cfg: &SystemConfig, prev: LogRatio, y: Observation) -> Result<LogRatio> {
    MyopicRecursion::new(cfg)?.step(prev, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, q01: f64, q10: f64, strategy: Strategy) -> SystemConfig {
        SystemConfig::new(m, SourceParams::new(q01, q10).unwrap(), strategy).unwrap()
    }

    #[test]
    fn random_examples() {
        let c = cfg(5, 0.05, 0.05, Strategy::random(0.2).unwrap());
        let l = step_random(&c, LogRatio::ZERO, Observation::Idle).unwrap();
        assert_eq!(l.value(), 0.0);
        let l = step_random(&c, LogRatio::saturating(-3.0), Observation::Zero).unwrap();
        assert_eq!(l, LogRatio::MAX);

        let c = cfg(4, 0.01, 0.1, Strategy::random(0.25).unwrap());
        let l = step_random(&c, LogRatio::ZERO, Observation::Idle).unwrap();
        assert!((l.value() - (1.09f64 / 0.91).ln()).abs() < 1e-14);
        assert!((l.value() - 0.180_488_375_712_294).abs() < 1e-12);
    }

    #[test]
    fn random_rejects_impossible_letters() {
        let c = cfg(1, 0.1, 0.1, Strategy::random(0.5).unwrap());
        assert!(matches!(
            step_random(&c, LogRatio::ZERO, Observation::OtherZero),
            Err(Error::ImpossibleObservation(Observation::OtherZero))
        ));
    }

    #[test]
    fn myopic_examples() {
        let c = cfg(6, 0.2, 0.2, Strategy::Reactive);
        let l = step_myopic(&c, LogRatio::ZERO, Observation::Collision).unwrap();
        assert!(l.value().abs() < 1e-15);

        let c = cfg(3, 0.1, 0.1, Strategy::Reactive);
        let l = step_myopic(&c, LogRatio::saturating(9f64.ln()), Observation::Collision).unwrap();
        let want = (0.011_111_111_111_111_11f64 / 0.02).ln();
        assert!((l.value() - want).abs() < 1e-12, "{}", l.value());
        assert!((l.value() + 0.5878).abs() < 1e-4);

        let l = step_myopic(&c, LogRatio::saturating(2.0), Observation::One).unwrap();
        assert_eq!(l, LogRatio::MIN);
    }

    #[test]
    fn myopic_requires_reactive() {
        let c = cfg(3, 0.1, 0.1, Strategy::random(0.1).unwrap());
        assert!(step_myopic(&c, LogRatio::ZERO, Observation::Idle).is_err());
    }
}
