//! Sweep execution: every (strategy, source, M) point through the requested
//! routes.

use std::cmp::Ordering;
use std::fmt;

use markov_aloha::analytic::pe_dh;
use markov_aloha::density::DensityEvolution;
use markov_aloha::policy::average_aoi;
use markov_aloha::sim::{aggregate, Estimate, SimConfig};
use markov_aloha::{SourceParams, Strategy, SystemConfig};
use rayon::prelude::*;

use crate::spec::{ExperimentSpec, Route, StrategyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Aoi,
    PeDh,
    PeMap,
    See,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Aoi => "aoi",
            Metric::PeDh => "pe_dh",
            Metric::PeMap => "pe_map",
            Metric::See => "see",
        }
    }

    /// Documented value range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::Aoi => (1.0, f64::INFINITY),
            Metric::PeDh | Metric::PeMap | Metric::See => (0.0, 1.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub strategy: StrategyKind,
    pub nodes: usize,
    pub q01: f64,
    pub q10: f64,
    /// `alpha` for random access, the activation estimate for reactive access.
    pub alpha: f64,
    pub route: Route,
    pub metric: Metric,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n_slots: Option<u64>,
    pub seed: Option<u64>,
}

impl Row {
    /// Sort key order: strategy, q01, q10, M, route, metric.
    pub fn sort_cmp(&self, other: &Row) -> Ordering {
        self.strategy
            .cmp(&other.strategy)
            .then(self.q01.total_cmp(&other.q01))
            .then(self.q10.total_cmp(&other.q10))
            .then(self.nodes.cmp(&other.nodes))
            .then(self.route.cmp(&other.route))
            .then(self.metric.cmp(&other.metric))
    }
}

/// One sweep coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub strategy: StrategyKind,
    pub nodes: usize,
    pub source: SourceParams,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "strategy={} M={} q01={} q10={}",
            self.strategy.name(),
            self.nodes,
            self.source.q01(),
            self.source.q10()
        )
    }
}

/// A failure at one sweep point.
#[derive(Debug, thiserror::Error)]
#[error("{point} route={route}: {source}")]
pub struct PointError {
    pub point: Point,
    pub route: Route,
    #[source]
    pub source: markov_aloha::Error,
}

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    /// Sorted by [`Row::sort_cmp`].
    pub rows: Vec<Row>,
    /// Points whose route failed (including non-converged density evolution);
    /// their rows for that route are absent.
    pub failures: Vec<PointError>,
}

/// All sweep points in sweep order.
pub fn sweep_points(spec: &ExperimentSpec) -> Vec<Point> {
    let mut points = Vec::new();
    for &strategy in &spec.strategies {
        for &source in &spec.sources {
            for &nodes in &spec.nodes {
                points.push(Point {
                    strategy,
                    nodes,
                    source,
                });
            }
        }
    }
    points
}

fn system(spec: &ExperimentSpec, p: &Point) -> markov_aloha::Result<SystemConfig> {
    let strategy = match p.strategy {
        StrategyKind::Random => Strategy::random(spec.alpha.value(p.nodes))?,
        StrategyKind::Reactive => Strategy::Reactive,
    };
    SystemConfig::new(p.nodes, p.source, strategy)
}

struct RowBuilder<'a> {
    point: &'a Point,
    alpha: f64,
    route: Route,
}

impl RowBuilder<'_> {
    fn row(&self, metric: Metric, value: f64) -> Row {
        Row {
            strategy: self.point.strategy,
            nodes: self.point.nodes,
            q01: self.point.source.q01(),
            q10: self.point.source.q10(),
            alpha: self.alpha,
            route: self.route,
            metric,
            value,
            stderr: None,
            n_slots: None,
            seed: None,
        }
    }

    fn sim_row(&self, metric: Metric, e: Estimate, n_slots: u64, seed: u64) -> Row {
        Row {
            stderr: e.stderr,
            n_slots: Some(n_slots),
            seed: Some(seed),
            ..self.row(metric, e.mean)
        }
    }
}

fn run_route(
    spec: &ExperimentSpec,
    point: &Point,
    cfg: &SystemConfig,
    route: Route,
) -> markov_aloha::Result<Vec<Row>> {
    let b = RowBuilder {
        point,
        alpha: cfg.activation_probability(),
        route,
    };
    Ok(match route {
        Route::Analytic => vec![
            b.row(Metric::Aoi, average_aoi(cfg.delivery_probability())),
            b.row(Metric::PeDh, pe_dh(cfg).pe),
        ],
        Route::De => {
            let mut de = DensityEvolution::with_projection(cfg, spec.de.grid, spec.de.projection)?;
            let o = de.run(spec.de.tol, spec.de.max_iter)?;
            vec![b.row(Metric::See, o.see), b.row(Metric::PeMap, o.pe_map)]
        }
        Route::Simulate => {
            let sim = SimConfig {
                system: *cfg,
                horizon: spec.sim.horizon,
                burn_in: spec.sim.burn_in,
                replications: spec.sim.replications,
                master_seed: spec.sim.seed,
                estimators: spec.sim.estimators,
            };
            let r = aggregate(&sim)?;
            let (n, seed) = (r.slots_simulated, spec.sim.seed);
            let mut rows = vec![b.sim_row(Metric::Aoi, r.aoi, n, seed)];
            for (metric, e) in [
                (Metric::See, r.see),
                (Metric::PeMap, r.pe_map),
                (Metric::PeDh, r.pe_dh),
            ] {
                if let Some(e) = e {
                    rows.push(b.sim_row(metric, e, n, seed));
                }
            }
            rows
        }
    })
}

fn run_point(spec: &ExperimentSpec, point: &Point) -> (Vec<Row>, Vec<PointError>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let cfg = match system(spec, point) {
        Ok(c) => c,
        Err(source) => {
            for &route in &spec.routes {
                failures.push(PointError {
                    point: *point,
                    route,
                    source: source.clone(),
                });
            }
            return (rows, failures);
        }
    };
    for &route in &spec.routes {
        match run_route(spec, point, &cfg, route) {
            Ok(r) => rows.extend(r),
            Err(source) => failures.push(PointError {
                point: *point,
                route,
                source,
            }),
        }
    }
    (rows, failures)
}

/// Runs every sweep point (in parallel) and returns the sorted rows. The
/// result depends only on the configuration, not on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> ExperimentOutput {
    let results: Vec<_> = sweep_points(spec)
        .par_iter()
        .map(|p| run_point(spec, p))
        .collect();
    let mut out = ExperimentOutput::default();
    for (rows, failures) in results {
        out.rows.extend(rows);
        out.failures.extend(failures);
    }
    out.rows.sort_by(Row::sort_cmp);
    out
}
