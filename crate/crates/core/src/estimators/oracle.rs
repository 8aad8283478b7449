//! Exhaustive posterior used to check the recursive filters.
//!
//! Tracks every source individually, so the joint state space has `2^M`
//! configurations, and derives each slot's channel output from the transmit
//! set. The sum over all trajectories is accumulated slot by slot.

use crate::error::{Error, Result};
use crate::estimators::LogRatio;
use crate::observation::Observation;
use crate::policy::{Strategy, SystemConfig};
use crate::source::stationary_distribution;

pub const ORACLE_MAX_SOURCES: usize = 4;
pub const ORACLE_MAX_LEN: usize = 10;

fn output(tx: u32, states: u32) -> Observation {
    match tx.count_ones() {
        0 => Observation::Idle,
        1 => {
            let k = tx.trailing_zeros();
            let zero = (states >> k) & 1 == 0;
            match (k == 0, zero) {
                (true, true) => Observation::Zero,
                (true, false) => Observation::One,
                (false, true) => Observation::OtherZero,
                (false, false) => Observation::OtherOne,
            }
        }
        _ => Observation::Collision,
    }
}

/// `ln P[X_n = 0 | y^n] / P[X_n = 1 | y^n]` by summing over all joint
/// trajectories of the `M` sources, starting from a uniform reference state
/// and stationary other sources before the first slot.
pub fn brute_force_posterior(cfg: &SystemConfig, trace: &[Observation]) -> Result<LogRatio> {
    let m = cfg.sources();
    if m > ORACLE_MAX_SOURCES || trace.len() > ORACLE_MAX_LEN {
        return Err(Error::OracleTooLarge {
            sources: m,
            len: trace.len(),
            max_sources: ORACLE_MAX_SOURCES,
            max_len: ORACLE_MAX_LEN,
        });
    }
    let p = cfg.source();
    let configs = 1usize << m;
    let (pi0, pi1) = stationary_distribution(p);
    let q = |from: u32, to: u32| -> f64 {
        match (from, to) {
            (0, 0) => 1.0 - p.q01(),
            (0, _) => p.q01(),
            (_, 0) => p.q10(),
            _ => 1.0 - p.q10(),
        }
    };

    let mut weight: Vec<f64> = (0..configs as u32)
        .map(|c| (1..m).fold(0.5, |w, k| w * if (c >> k) & 1 == 0 { pi0 } else { pi1 }))
        .collect();

    for &y in trace {
        let mut next = vec![0.0; configs];
        for (c, &w) in weight.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let c = c as u32;
            for (c2, slot) in next.iter_mut().enumerate() {
                let c2 = c2 as u32;
                let trans: f64 = (0..m).map(|k| q((c >> k) & 1, (c2 >> k) & 1)).product();
                let like = match cfg.strategy() {
                    Strategy::Reactive => {
                        if output(c ^ c2, c2) == y {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Strategy::Random { alpha } => (0..configs as u32)
                        .filter(|&tx| output(tx, c2) == y)
                        .map(|tx| {
                            let k = tx.count_ones() as i32;
                            alpha.powi(k) * (1.0 - alpha).powi(m as i32 - k)
                        })
                        .sum(),
                };
                *slot += w * trans * like;
            }
        }
        let total: f64 = next.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ImpossibleObservation(y));
        }
        next.iter_mut().for_each(|v| *v /= total);
        weight = next;
    }

    let (mut zero, mut one) = (0.0, 0.0);
    for (c, &w) in weight.iter().enumerate() {
        if c & 1 == 0 {
            zero += w;
        } else {
            one += w;
        }
    }
    Ok(LogRatio::from_masses(zero, one).expect("posterior has positive mass"))
}
