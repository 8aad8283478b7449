//! Slot-level Monte Carlo of `M` sources on the collision channel.
//!
//! Source 0 is the reference source tracked by the receiver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{dh_step, entropy_from_llr, map_decision, DhEstimate, MapFilter};
use crate::observation::Observation;
use crate::policy::{Strategy, SystemConfig};
use crate::source::{sample_next, sample_stationary, Bit};

pub const DEFAULT_BURN_IN: u64 = 10_000;
pub const DEFAULT_HORIZON: u64 = 1_000_000 + DEFAULT_BURN_IN;
pub const DEFAULT_REPLICATIONS: usize = 10;

/// Which estimators are stepped. SEE and the MAP error need the MAP filter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EstimatorChoice {
    Map,
    Dh,
    #[default]
    Both,
}

impl EstimatorChoice {
    pub fn map(self) -> bool {
        matches!(self, EstimatorChoice::Map | EstimatorChoice::Both)
    }

    pub fn dh(self) -> bool {
        matches!(self, EstimatorChoice::Dh | EstimatorChoice::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub system: SystemConfig,
    /// Total slots per replication, burn-in included.
    pub horizon: u64,
    pub burn_in: u64,
    pub replications: usize,
    pub master_seed: u64,
    pub estimators: EstimatorChoice,
}

impl SimConfig {
    pub fn new(system: SystemConfig) -> Self {
        Self {
            system,
            horizon: DEFAULT_HORIZON,
            burn_in: DEFAULT_BURN_IN,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 0,
            estimators: EstimatorChoice::Both,
        }
    }

    /// Sets `horizon = burn_in + slots`.
    pub fn with_measured_slots(mut self, slots: u64) -> Self {
        self.horizon = self.burn_in + slots;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.horizon {
            return Err(Error::InvalidSimulation(format!(
                "burn-in ({}) must be shorter than the horizon ({})",
                self.burn_in, self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidSimulation(
                "at least one replication is required".into(),
            ));
        }
        Ok(())
    }

    pub fn measured_slots(&self) -> u64 {
        self.horizon.saturating_sub(self.burn_in)
    }
}

/// Counter-based seed of replication `index`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Channel letter produced by a transmit set. `states` are the current states,
/// index 0 being the reference source.
pub fn channel_output(transmitting: &[bool], states: &[Bit]) -> Observation {
    let mut count = 0;
    let mut who = 0;
    for (i, &t) in transmitting.iter().enumerate() {
        if t {
            count += 1;
            who = i;
        }
    }
    match count {
        0 => Observation::Idle,
        1 if who == 0 => Observation::letter(states[0]),
        1 => Observation::other(states[who]),
        _ => Observation::Collision,
    }
}

/// Per-replication sums over the measured slots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplicationSums {
    pub slots: u64,
    pub seed: u64,
    /// Sum of `h(lambda_n)` in bits.
    pub see: f64,
    /// Sum of the slot-averaged age.
    pub aoi: f64,
    pub map_errors: u64,
    pub dh_errors: u64,
    pub deliveries: u64,
    /// Count of each channel letter, indexed by [`Observation::index`].
    pub letters: [u64; 6],
}

impl ReplicationSums {
    fn per_slot(&self, total: f64) -> f64 {
        total / self.slots as f64
    }

    pub fn see_mean(&self) -> f64 {
        self.per_slot(self.see)
    }

    pub fn aoi_mean(&self) -> f64 {
        self.per_slot(self.aoi)
    }

    pub fn pe_map(&self) -> f64 {
        self.per_slot(self.map_errors as f64)
    }

    pub fn pe_dh(&self) -> f64 {
        self.per_slot(self.dh_errors as f64)
    }

    pub fn delivery_rate(&self) -> f64 {
        self.per_slot(self.deliveries as f64)
    }
}

/// The `M` sources and the collision channel, without any receiver.
#[derive(Clone, Debug)]
pub struct ChannelSim {
    system: SystemConfig,
    states: Vec<Bit>,
    transmitting: Vec<bool>,
    rng: ChaCha8Rng,
}

impl ChannelSim {
    /// All sources start from the stationary law.
    pub fn new(system: SystemConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = system.source();
        let states = (0..system.sources())
            .map(|_| sample_stationary(p, &mut rng))
            .collect();
        Self {
            system,
            states,
            transmitting: vec![false; system.sources()],
            rng,
        }
    }

    pub fn states(&self) -> &[Bit] {
        &self.states
    }

    /// Current state of the reference source.
    pub fn reference(&self) -> Bit {
        self.states[0]
    }

    /// Advances every source one slot and returns the channel letter.
    pub fn slot(&mut self) -> Observation {
        let p = self.system.source();
        let rng = &mut self.rng;
        match self.system.strategy() {
            Strategy::Random { alpha } => {
                for (x, t) in self.states.iter_mut().zip(self.transmitting.iter_mut()) {
                    *x = sample_next(p, *x, rng);
                    *t = rng.gen::<f64>() < alpha;
                }
            }
            Strategy::Reactive => {
                for (x, t) in self.states.iter_mut().zip(self.transmitting.iter_mut()) {
                    let next = sample_next(p, *x, rng);
                    *t = next != *x;
                    *x = next;
                }
            }
        }
        channel_output(&self.transmitting, &self.states)
    }
}

/// A channel trace of `len` slots with the reference states behind it.
pub fn sample_trace(system: &SystemConfig, len: usize, seed: u64) -> (Vec<Observation>, Vec<Bit>) {
    let mut ch = ChannelSim::new(*system, seed);
    (0..len).map(|_| (ch.slot(), ch.reference())).unzip()
}

/// Simulates one replication. The sources start from the stationary law, the
/// receiver from no knowledge.
pub fn run_replication(cfg: &SimConfig, seed: u64) -> Result<ReplicationSums> {
    cfg.validate()?;
    let sys = &cfg.system;
    let mut ch = ChannelSim::new(*sys, seed);
    let mut filter = if cfg.estimators.map() {
        Some(MapFilter::for_config(sys)?)
    } else {
        None
    };
    let mut dh = DhEstimate::default();
    let mut age: u64 = 1;
    let mut sums = ReplicationSums {
        seed,
        ..ReplicationSums::default()
    };

    for n in 0..cfg.horizon {
        let y = ch.slot();
        let lambda = match filter.as_mut() {
            Some(f) => Some(f.step(y)?),
            None => None,
        };
        dh = dh_step(dh, y);
        let delivered = y.reference_state().is_some();
        age = if delivered { 1 } else { age + 1 };

        if n < cfg.burn_in {
            continue;
        }
        let x = ch.reference();
        sums.slots += 1;
        sums.letters[y.index()] += 1;
        sums.aoi += age as f64 + 0.5;
        sums.deliveries += u64::from(delivered);
        if let Some(l) = lambda {
            sums.see += entropy_from_llr(l);
            sums.map_errors += u64::from(map_decision(l) != x);
        }
        if cfg.estimators.dh() {
            sums.dh_errors += u64::from(dh.est != x);
        }
    }
    Ok(sums)
}

/// Mean across replications with its standard error; the error is absent for
/// a single replication.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    /// Order-independent: values are sorted before summation.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let stderr = (v.len() > 1).then(|| {
            let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
            dev.sort_by(f64::total_cmp);
            (dev.iter().sum::<f64>() / (n - 1.0) / n).sqrt()
        });
        Estimate { mean, stderr }
    }

    /// `|mean - target| <= k * stderr`; false without a standard error.
    pub fn within(&self, target: f64, k: f64) -> bool {
        self.stderr
            .is_some_and(|s| (self.mean - target).abs() <= k * s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    /// Bits; present when the MAP filter ran.
    pub see: Option<Estimate>,
    /// Slots.
    pub aoi: Estimate,
    pub pe_map: Option<Estimate>,
    pub pe_dh: Option<Estimate>,
    pub delivery_rate: Estimate,
    pub slots_simulated: u64,
    pub replications: usize,
}

/// Combines per-replication sums into per-slot means and standard errors.
pub fn summarize(estimators: EstimatorChoice, reps: &[ReplicationSums]) -> MetricsReport {
    let collect = |f: fn(&ReplicationSums) -> f64| {
        Estimate::from_samples(&reps.iter().map(f).collect::<Vec<_>>())
    };
    MetricsReport {
        see: estimators.map().then(|| collect(ReplicationSums::see_mean)),
        aoi: collect(ReplicationSums::aoi_mean),
        pe_map: estimators.map().then(|| collect(ReplicationSums::pe_map)),
        pe_dh: estimators.dh().then(|| collect(ReplicationSums::pe_dh)),
        delivery_rate: collect(ReplicationSums::delivery_rate),
        slots_simulated: reps.iter().map(|r| r.slots).sum(),
        replications: reps.len(),
    }
}

/// Runs all replications (in parallel) and summarizes them.
pub fn aggregate(cfg: &SimConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let reps = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|i| run_replication(cfg, replication_seed(cfg.master_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg.estimators, &reps))
}
