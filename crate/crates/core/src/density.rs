//! Quantized density evolution of the joint law `P(lambda_n, x_n)`.
//!
//! The log-ratio lives on a uniform grid over `[-LLR_MAX, LLR_MAX]`. Each
//! step pushes every grid point through the filter recursion for every
//! channel letter and projects the image back onto the grid.

use crate::error::{Error, Result};
use crate::estimators::{entropy_from_llr, LogRatio, MyopicRecursion, RandomRecursion, LLR_MAX};
use crate::observation::{random_obs_dist, Observation};
use crate::policy::{Strategy, SystemConfig};
use crate::source::Bit;

pub const DEFAULT_POINTS: usize = 4001;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Uniform log-ratio grid with an odd number of points, so that 0 and both
/// saturation values are grid points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LlrGrid {
    llr_max: f64,
    points: usize,
}

impl Default for LlrGrid {
    fn default() -> Self {
        Self {
            llr_max: LLR_MAX,
            points: DEFAULT_POINTS,
        }
    }
}

impl LlrGrid {
    pub fn new(llr_max: f64, points: usize) -> Result<Self> {
        if points < 3 || points % 2 == 0 || !(llr_max > 0.0) || llr_max > LLR_MAX {
            return Err(Error::InvalidGrid { points, llr_max });
        }
        Ok(Self { llr_max, points })
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn llr_max(&self) -> f64 {
        self.llr_max
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.llr_max / (self.points - 1) as f64
    }

    #[inline]
    pub fn zero_index(&self) -> usize {
        (self.points - 1) / 2
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        (i as f64 - self.zero_index() as f64) * self.spacing()
    }

    /// Grid with `2B - 1` points over the same range (spacing halved).
    pub fn refined(&self) -> Self {
        Self {
            llr_max: self.llr_max,
            points: 2 * self.points - 1,
        }
    }
}

/// How an off-grid image is mapped back onto the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Projection {
    /// All mass to the nearest grid point.
    Nearest,
    /// Mass split linearly between the two neighbouring grid points, except
    /// that a nonzero image never sends mass to the `lambda = 0` point, so
    /// the MAP decision of every image is kept.
    #[default]
    SignPreservingSplit,
}

#[derive(Clone, Copy, Debug)]
enum Target {
    At(usize),
    /// `(j, f)`: `1 - f` of the mass to `j`, `f` to `j + 1`.
    Split(usize, f64),
}

fn project(grid: &LlrGrid, v: f64, rule: Projection) -> Target {
    let last = grid.points() - 1;
    let u = ((v + grid.llr_max()) / grid.spacing()).clamp(0.0, last as f64);
    match rule {
        Projection::Nearest => Target::At(u.round() as usize),
        Projection::SignPreservingSplit => {
            let j = (u.floor() as usize).min(last);
            let frac = u - j as f64;
            let zero = grid.zero_index();
            if frac <= 0.0 || j == last {
                if j == zero && v != 0.0 {
                    // only reachable through rounding of tiny images
                    Target::At(if v > 0.0 { zero + 1 } else { zero - 1 })
                } else {
                    Target::At(j)
                }
            } else if v > 0.0 && j == zero {
                Target::At(zero + 1)
            } else if v < 0.0 && j + 1 == zero {
                Target::At(zero - 1)
            } else {
                Target::Split(j, frac)
            }
        }
    }
}

/// Joint mass `P[i][x]` over grid point `i` and source state `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDensity {
    mass: Vec<[f64; 2]>,
}

impl JointDensity {
    pub fn mass(&self) -> &[[f64; 2]] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().map(|m| m[0] + m[1]).sum()
    }

    /// Marginal law of the source state.
    pub fn state_marginal(&self) -> [f64; 2] {
        self.mass
            .iter()
            .fold([0.0, 0.0], |acc, m| [acc[0] + m[0], acc[1] + m[1]])
    }

    /// `E[h(Lambda)]` in bits.
    pub fn entropy(&self, grid: &LlrGrid) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| (m[0] + m[1]) * entropy_from_llr(LogRatio::saturating(grid.value(i))))
            .sum()
    }

    /// MAP error probability; `lambda = 0` decides 1.
    pub fn map_error(&self, grid: &LlrGrid) -> f64 {
        let zero = grid.zero_index();
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| if i > zero { m[1] } else { m[0] })
            .sum()
    }

    /// Total-variation distance to another density on the same grid.
    pub fn tv_distance(&self, other: &JointDensity) -> f64 {
        0.5 * self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs())
            .sum::<f64>()
    }
}

/// No knowledge of the state: all mass at `lambda = 0`, half per state.
pub fn de_init(grid: &LlrGrid) -> JointDensity {
    let mut mass = vec![[0.0; 2]; grid.points()];
    mass[grid.zero_index()] = [0.5, 0.5];
    JointDensity { mass }
}

struct Branch {
    /// `weights[x_prev][x_now] = P(y | x_prev, x_now) q_{x_prev x_now}`
    weights: [[f64; 2]; 2],
    targets: Vec<Target>,
}

/// Density evolution for one system configuration. The per-letter images of
/// every grid point are computed once.
pub struct DensityEvolution {
    grid: LlrGrid,
    branches: Vec<Branch>,
    entropy_table: Vec<f64>,
    density: JointDensity,
    iterations: usize,
}

impl DensityEvolution {
    pub fn new(cfg: &SystemConfig, grid: LlrGrid) -> Result<Self> {
        Self::with_projection(cfg, grid, Projection::default())
    }

    /// Random strategy: exact recursion. Reactive strategy: myopic recursion
    /// under the surrogate model.
    pub fn with_projection(cfg: &SystemConfig, grid: LlrGrid, rule: Projection) -> Result<Self> {
        let p = cfg.source();
        let mut branches = Vec::new();
        match cfg.strategy() {
            Strategy::Random { .. } => {
                let rec = RandomRecursion::new(cfg)?;
                let d = [
                    random_obs_dist(cfg, Bit::Zero)?,
                    random_obs_dist(cfg, Bit::One)?,
                ];
                for y in Observation::ALL {
                    let mut weights = [[0.0; 2]; 2];
                    for prev in Bit::BOTH {
                        for now in Bit::BOTH {
                            weights[prev.index()][now.index()] =
                                d[now.index()].prob(y) * p.q(prev, now);
                        }
                    }
                    if weights.iter().flatten().all(|&w| w == 0.0) {
                        continue;
                    }
                    let targets = (0..grid.points())
                        .map(|i| {
                            rec.step(LogRatio::saturating(grid.value(i)), y)
                                .map(|l| project(&grid, l.value(), rule))
                        })
                        .collect::<Result<_>>()?;
                    branches.push(Branch { weights, targets });
                }
            }
            Strategy::Reactive => {
                let rec = MyopicRecursion::new(cfg)?;
                for y in Observation::ALL {
                    let weights = *rec.weights(y);
                    if weights.iter().flatten().all(|&w| w == 0.0) {
                        continue;
                    }
                    let targets = (0..grid.points())
                        .map(|i| {
                            rec.step(LogRatio::saturating(grid.value(i)), y)
                                .map(|l| project(&grid, l.value(), rule))
                        })
                        .collect::<Result<_>>()?;
                    branches.push(Branch { weights, targets });
                }
            }
        }
        let entropy_table = (0..grid.points())
            .map(|i| entropy_from_llr(LogRatio::saturating(grid.value(i))))
            .collect();
        Ok(Self {
            grid,
            branches,
            entropy_table,
            density: de_init(&grid),
            iterations: 0,
        })
    }

    /// Restart from an arbitrary density on the same grid.
    pub fn set_density(&mut self, density: JointDensity) {
        assert_eq!(density.mass.len(), self.grid.points());
        self.density = density;
        self.iterations = 0;
    }

    pub fn grid(&self) -> &LlrGrid {
        &self.grid
    }

    pub fn density(&self) -> &JointDensity {
        &self.density
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Average SEE of the current density, in bits.
    pub fn entropy(&self) -> f64 {
        self.density
            .mass
            .iter()
            .zip(&self.entropy_table)
            .map(|(m, h)| (m[0] + m[1]) * h)
            .sum()
    }

    /// Applies one slot and returns the new density.
    pub fn apply(&self, d: &JointDensity) -> JointDensity {
        let mut out = vec![[0.0; 2]; self.grid.points()];
        for b in &self.branches {
            let w = &b.weights;
            for (m, target) in d.mass.iter().zip(&b.targets) {
                if m[0] == 0.0 && m[1] == 0.0 {
                    continue;
                }
                let v0 = w[0][0] * m[0] + w[1][0] * m[1];
                let v1 = w[0][1] * m[0] + w[1][1] * m[1];
                match *target {
                    Target::At(j) => {
                        out[j][0] += v0;
                        out[j][1] += v1;
                    }
                    Target::Split(j, f) => {
                        out[j][0] += (1.0 - f) * v0;
                        out[j][1] += (1.0 - f) * v1;
                        out[j + 1][0] += f * v0;
                        out[j + 1][1] += f * v1;
                    }
                }
            }
        }
        JointDensity { mass: out }
    }

    /// Advances one slot; returns the total-variation change.
    pub fn step(&mut self) -> f64 {
        let next = self.apply(&self.density);
        let change = next.tv_distance(&self.density);
        self.density = next;
        self.iterations += 1;
        change
    }

    /// Iterates until successive densities differ by less than `tol` in total
    /// variation, or `max_iter` steps have been taken.
    pub fn run(&mut self, tol: f64, max_iter: usize) -> Result<DeOutcome> {
        let mut change = f64::INFINITY;
        while self.iterations < max_iter {
            change = self.step();
            if change < tol {
                break;
            }
        }
        let outcome = DeOutcome {
            see: self.entropy(),
            pe_map: self.density.map_error(&self.grid),
            iterations: self.iterations,
            last_change: change,
            converged: change < tol,
            density: self.density.clone(),
        };
        if outcome.converged {
            Ok(outcome)
        } else {
            Err(Error::NotConverged(Box::new(outcome)))
        }
    }
}

/// Steady-state quantities from a density-evolution run.
#[derive(Clone, Debug)]
pub struct DeOutcome {
    /// Average state estimation entropy, bits.
    pub see: f64,
    /// MAP error probability.
    pub pe_map: f64,
    pub iterations: usize,
    pub last_change: f64,
    pub converged: bool,
    pub density: JointDensity,
}

fn require(cfg: &SystemConfig, random: bool) -> Result<()> {
    match (cfg.strategy(), random) {
        (Strategy::Random { .. }, true) | (Strategy::Reactive, false) => Ok(()),
        (_, true) => Err(Error::WrongStrategy { expected: "random" }),
        (_, false) => Err(Error::WrongStrategy {
            expected: "reactive",
        }),
    }
}

/// One density-evolution step for the random strategy.
pub fn de_step_random(
    cfg: &SystemConfig,
    d: &JointDensity,
    grid: &LlrGrid,
) -> Result<JointDensity> {
    require(cfg, true)?;
    Ok(DensityEvolution::new(cfg, *grid)?.apply(d))
}

/// One density-evolution step for the reactive strategy (myopic surrogate).
pub fn de_step_myopic(
    cfg: &SystemConfig,
    d: &JointDensity,
    grid: &LlrGrid,
) -> Result<JointDensity> {
    require(cfg, false)?;
    Ok(DensityEvolution::new(cfg, *grid)?.apply(d))
}

/// Runs density evolution from [`de_init`] to its fixed point. A run that
/// does not converge is returned inside [`Error::NotConverged`].
pub fn de_run(cfg: &SystemConfig, grid: &LlrGrid, tol: f64, max_iter: usize) -> Result<DeOutcome> {
    DensityEvolution::new(cfg, *grid)?.run(tol, max_iter)
}
