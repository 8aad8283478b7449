//! Per-slot channel output statistics under each access strategy.
//!
//! The receiver sees one of six letters per slot: the reference source's
//! state (`Zero`/`One`) when it is the only transmitter, `Idle`, `Collision`,
//! or the state reported by another source transmitting alone
//! (`OtherZero`/`OtherOne`).

use crate::error::{Error, Result};
use crate::policy::{Strategy, SystemConfig};
use crate::source::{stationary_distribution, Bit, SourceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    Zero = 0,
    One = 1,
    Idle = 2,
    Collision = 3,
    OtherZero = 4,
    OtherOne = 5,
}

impl Observation {
    pub const ALL: [Observation; 6] = [
        Observation::Zero,
        Observation::One,
        Observation::Idle,
        Observation::Collision,
        Observation::OtherZero,
        Observation::OtherOne,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Collision-free observation of the reference source.
    #[inline]
    pub fn letter(x: Bit) -> Self {
        match x {
            Bit::Zero => Observation::Zero,
            Bit::One => Observation::One,
        }
    }

    /// Collision-free observation of some other source.
    #[inline]
    pub fn other(x: Bit) -> Self {
        match x {
            Bit::Zero => Observation::OtherZero,
            Bit::One => Observation::OtherOne,
        }
    }

    /// The reference state revealed by this letter, if any.
    #[inline]
    pub fn reference_state(self) -> Option<Bit> {
        match self {
            Observation::Zero => Some(Bit::Zero),
            Observation::One => Some(Bit::One),
            _ => None,
        }
    }
}

/// Probability of each observation letter.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObsDistribution([f64; 6]);

impl ObsDistribution {
    #[inline]
    pub fn prob(&self, y: Observation) -> f64 {
        self.0[y.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Observation, f64)> + '_ {
        Observation::ALL
            .iter()
            .map(move |&y| (y, self.0[y.index()]))
    }

    fn set(&mut self, y: Observation, p: f64) {
        self.0[y.index()] = p;
    }
}

/// `P(y | x)` under the random strategy. Every letter except the reference
/// letters is independent of `x`.
pub fn random_obs_dist(cfg: &SystemConfig, x: Bit) -> Result<ObsDistribution> {
    let Strategy::Random { alpha } = cfg.strategy() else {
        return Err(Error::WrongStrategy { expected: "random" });
    };
    let m = cfg.sources() as i32;
    let (pi0, pi1) = stationary_distribution(cfg.source());
    let omega = alpha * (1.0 - alpha).powi(m - 1);
    let idle = (1.0 - alpha).powi(m);
    let other_single = (m - 1) as f64 * omega;

    let mut d = ObsDistribution::default();
    d.set(Observation::Idle, idle);
    d.set(
        Observation::Collision,
        (1.0 - idle - m as f64 * omega).max(0.0),
    );
    d.set(Observation::OtherZero, other_single * pi0);
    d.set(Observation::OtherOne, other_single * pi1);
    d.set(Observation::letter(x), omega);
    Ok(d)
}

/// `P(Bin(n, a) >= k_min)`. Small tails are summed term by term so that they
/// do not cancel against 1; large tails come from the complement.
pub(crate) fn binomial_tail(n: usize, a: f64, k_min: usize) -> f64 {
    if k_min > n {
        return 0.0;
    }
    if k_min == 0 || a >= 1.0 {
        return 1.0;
    }
    if a <= 0.0 {
        return 0.0;
    }
    let (ln_a, ln_b) = (a.ln(), (-a).ln_1p());
    let mut ln_choose = 0.0;
    let mut lower = 0.0;
    for k in 0..k_min {
        lower += (ln_choose + k as f64 * ln_a + (n - k) as f64 * ln_b).exp();
        ln_choose += ((n - k) as f64 / (k + 1) as f64).ln();
    }
    if lower < 0.5 {
        return 1.0 - lower;
    }
    let ratio = a / (1.0 - a);
    let mut pmf = (n as f64 * ln_b).exp();
    let mut tail = 0.0;
    for k in 0..=n {
        if k >= k_min {
            tail += pmf;
        }
        pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
    }
    tail
}

/// `P(y | x_prev, x_now)` in the surrogate model where the reference source
/// is reactive and the `M - 1` others transmit i.i.d. with probability `a`,
/// reporting either state with probability one half.
pub fn myopic_obs_dist(sources: usize, a: f64, x_prev: Bit, x_now: Bit) -> ObsDistribution {
    let others = sources.saturating_sub(1);
    let n = others as i32;
    let mut d = ObsDistribution::default();
    if x_prev == x_now {
        let single = if others == 0 {
            0.0
        } else {
            others as f64 * 0.5 * a * (1.0 - a).powi(n - 1)
        };
        d.set(Observation::Idle, (1.0 - a).powi(n));
        d.set(Observation::OtherZero, single);
        d.set(Observation::OtherOne, single);
        d.set(Observation::Collision, binomial_tail(others, a, 2));
    } else {
        d.set(Observation::letter(x_now), (1.0 - a).powi(n));
        d.set(
            Observation::Collision,
            -(others as f64 * (-a).ln_1p()).exp_m1(),
        );
    }
    d
}

/// `P(y | x_prev, x_now)` for reactive symmetric sources, where the surrogate
/// model is exact.
pub fn reactive_symmetric_obs_dist(
    cfg: &SystemConfig,
    x_prev: Bit,
    x_now: Bit,
) -> Result<ObsDistribution> {
    if cfg.strategy() != Strategy::Reactive {
        return Err(Error::WrongStrategy {
            expected: "reactive",
        });
    }
    let p = cfg.source();
    if !p.is_symmetric() {
        return Err(Error::AsymmetricSource {
            q01: p.q01(),
            q10: p.q10(),
        });
    }
    Ok(myopic_obs_dist(
        cfg.sources(),
        cfg.activation_probability(),
        x_prev,
        x_now,
    ))
}

/// State of the exact reactive HMM: reference state and the number of other
/// sources currently in state 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HmmState {
    pub x: Bit,
    pub s: usize,
}

impl HmmState {
    pub fn new(x: Bit, s: usize) -> Self {
        Self { x, s }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that, out of `s` sources in 0 and `s_bar` in 1, the zero
/// count moves to `s_next` with at least `min_flips` flips in total.
fn pattern_mass(p: &SourceParams, s: usize, s_bar: usize, s_next: usize, min_flips: usize) -> f64 {
    let mut total = 0.0;
    // `up` sources leave 0, `down` sources enter 0: s_next = s - up + down
    for up in 0..=s {
        let Some(down) = (s_next + up).checked_sub(s) else {
            continue;
        };
        if down > s_bar || up + down < min_flips {
            continue;
        }
        total += binomial(s, up)
            * p.q01().powi(up as i32)
            * p.q00().powi((s - up) as i32)
            * binomial(s_bar, down)
            * p.q10().powi(down as i32)
            * p.q11().powi((s_bar - down) as i32);
    }
    total
}

/// `P[S_n = s_next | S_{n-1} = s]` for the count of the `M - 1` other
/// sources in state 0.
pub fn count_kernel(p: &SourceParams, sources: usize, s: usize, s_next: usize) -> Result<f64> {
    let max = check_count(sources, s)?;
    check_count(sources, s_next)?;
    Ok(pattern_mass(p, s, max - s, s_next, 0))
}

fn check_count(sources: usize, count: usize) -> Result<usize> {
    if sources == 0 {
        return Err(Error::TooFewSources { min: 1, got: 0 });
    }
    let max = sources - 1;
    if count > max {
        Err(Error::CountOutOfRange { count, max })
    } else {
        Ok(max)
    }
}

/// Precomputed joint laws `P(y, s' | x, x', s)` of the exact reactive HMM.
///
/// Joint masses avoid dividing by the count kernel; collision masses are
/// summed over the flip patterns that produce them.
#[derive(Clone, Debug)]
pub struct CountModel {
    params: SourceParams,
    counts: usize,
    kernel: Vec<f64>,
    /// no other source flips
    still: Vec<f64>,
    /// exactly one source leaves 0, nothing else flips (s' = s - 1)
    single_up: Vec<f64>,
    /// exactly one source enters 0, nothing else flips (s' = s + 1)
    single_down: Vec<f64>,
    /// at least two flips among the others
    collide_hold: Vec<f64>,
    /// at least one flip among the others
    collide_flip: Vec<f64>,
}

impl CountModel {
    pub fn new(p: &SourceParams, sources: usize) -> Result<Self> {
        if sources == 0 {
            return Err(Error::TooFewSources { min: 1, got: 0 });
        }
        let counts = sources;
        let others = sources - 1;
        let mut kernel = vec![0.0; counts * counts];
        let mut collide_hold = vec![0.0; counts * counts];
        let mut collide_flip = vec![0.0; counts * counts];
        let mut still = vec![0.0; counts];
        let mut single_up = vec![0.0; counts];
        let mut single_down = vec![0.0; counts];
        for s in 0..counts {
            let s_bar = others - s;
            for s_next in 0..counts {
                let at = s * counts + s_next;
                kernel[at] = pattern_mass(p, s, s_bar, s_next, 0);
                collide_flip[at] = pattern_mass(p, s, s_bar, s_next, 1);
                collide_hold[at] = pattern_mass(p, s, s_bar, s_next, 2);
            }
            still[s] = p.q00().powi(s as i32) * p.q11().powi(s_bar as i32);
            if s > 0 {
                single_up[s] =
                    s as f64 * p.q01() * p.q00().powi(s as i32 - 1) * p.q11().powi(s_bar as i32);
            }
            if s_bar > 0 {
                single_down[s] = s_bar as f64
                    * p.q10()
                    * p.q11().powi(s_bar as i32 - 1)
                    * p.q00().powi(s as i32);
            }
        }
        Ok(Self {
            params: *p,
            counts,
            kernel,
            still,
            single_up,
            single_down,
            collide_hold,
            collide_flip,
        })
    }

    #[inline]
    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    /// Number of count values, `M`.
    #[inline]
    pub fn counts(&self) -> usize {
        self.counts
    }

    #[inline]
    pub fn kernel(&self, s: usize, s_next: usize) -> f64 {
        self.kernel[s * self.counts + s_next]
    }

    /// `P(y, S_n = s_next | S_{n-1} = s)` for a given reference transition.
    pub fn joint(&self, y: Observation, flipped: bool, x_now: Bit, s: usize, s_next: usize) -> f64 {
        let at = s * self.counts + s_next;
        if flipped {
            match y {
                Observation::Collision => self.collide_flip[at],
                _ if y == Observation::letter(x_now) && s_next == s => self.still[s],
                _ => 0.0,
            }
        } else {
            match y {
                Observation::Idle if s_next == s => self.still[s],
                Observation::OtherOne if s_next + 1 == s => self.single_up[s],
                Observation::OtherZero if s_next == s + 1 => self.single_down[s],
                Observation::Collision => self.collide_hold[at],
                _ => 0.0,
            }
        }
    }

    #[inline]
    pub(crate) fn still(&self, s: usize) -> f64 {
        self.still[s]
    }

    #[inline]
    pub(crate) fn single_up(&self, s: usize) -> f64 {
        self.single_up[s]
    }

    #[inline]
    pub(crate) fn single_down(&self, s: usize) -> f64 {
        self.single_down[s]
    }

    #[inline]
    pub(crate) fn collide_row(&self, flipped: bool, s: usize) -> &[f64] {
        let table = if flipped {
            &self.collide_flip
        } else {
            &self.collide_hold
        };
        &table[s * self.counts..(s + 1) * self.counts]
    }

    /// `P(y | sigma_prev, sigma_now)`; undefined when the count transition
    /// has zero probability.
    pub fn obs_dist(&self, prev: HmmState, now: HmmState) -> Result<ObsDistribution> {
        check_count(self.counts, prev.s)?;
        check_count(self.counts, now.s)?;
        let k = self.kernel(prev.s, now.s);
        if k <= 0.0 {
            return Err(Error::UndefinedConditional {
                from: prev.s,
                to: now.s,
            });
        }
        let flipped = prev.x != now.x;
        let mut d = ObsDistribution::default();
        for y in Observation::ALL {
            d.set(y, self.joint(y, flipped, now.x, prev.s, now.s) / k);
        }
        Ok(d)
    }
}

/// `P(y | sigma_prev, sigma_now)` for the exact reactive HMM with possibly
/// asymmetric sources. Builds the count tables on every call; use
/// [`CountModel`] when evaluating many cells.
pub fn reactive_asymmetric_obs_dist(
    cfg: &SystemConfig,
    prev: HmmState,
    now: HmmState,
) -> Result<ObsDistribution> {
    if cfg.strategy() != Strategy::Reactive {
        return Err(Error::WrongStrategy {
            expected: "reactive",
        });
    }
    CountModel::new(cfg.source(), cfg.sources())?.obs_dist(prev, now)
}
