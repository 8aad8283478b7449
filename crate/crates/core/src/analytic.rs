//! Closed-form decode-and-hold error probability, with the underlying
//! four-state `(X_n, X̂_n)` chains for numerical cross-checks.

use nalgebra::{Matrix4, Vector4};

use crate::policy::{activation_probability, Strategy, SystemConfig};
use crate::source::{Bit, SourceParams};

/// Stationary decode-and-hold error masses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeReport {
    pub pe: f64,
    /// Mass of `X = 0, X̂ = 1`.
    pub pi_01: f64,
    /// Mass of `X = 1, X̂ = 0`.
    pub pi_10: f64,
}

/// Random access with per-slot delivery probability `omega`.
pub fn pe_dh_random(p: &SourceParams, omega: f64) -> PeReport {
    debug_assert!((0.0..=1.0).contains(&omega));
    let (q01, q10) = (p.q01(), p.q10());
    let s = q01 + q10;
    let pi = q01 * q10 * (1.0 - omega) / (s * (omega + (1.0 - omega) * s));
    PeReport {
        pe: 2.0 * pi,
        pi_01: pi,
        pi_10: pi,
    }
}

/// Reactive access with `sources` nodes. A state change is delivered iff none
/// of the other nodes changes state in the same slot.
pub fn pe_dh_reactive(p: &SourceParams, sources: usize) -> PeReport {
    let beta = blocking_free(p, sources);
    let (q01, q10) = (p.q01(), p.q10());
    let scale = (1.0 - beta) / ((q01 + q10) * (2.0 - beta));
    let pi_01 = q10 * scale;
    let pi_10 = q01 * scale;
    PeReport {
        pe: pi_01 + pi_10,
        pi_01,
        pi_10,
    }
}

/// Dispatches on the strategy of `cfg`.
pub fn pe_dh(cfg: &SystemConfig) -> PeReport {
    match cfg.strategy() {
        Strategy::Random { .. } => pe_dh_random(cfg.source(), cfg.delivery_probability()),
        Strategy::Reactive => pe_dh_reactive(cfg.source(), cfg.sources()),
    }
}

fn blocking_free(p: &SourceParams, sources: usize) -> f64 {
    let a = activation_probability(&Strategy::Reactive, p);
    (1.0 - a).powi(sources.saturating_sub(1) as i32)
}

/// Index of `(x, x_hat)` in the chain matrices.
#[inline]
pub fn chain_index(x: Bit, x_hat: Bit) -> usize {
    2 * x.index() + x_hat.index()
}

fn build_chain(p: &SourceParams, delivered: impl Fn(Bit, Bit) -> f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for x in Bit::BOTH {
        for e in Bit::BOTH {
            for x2 in Bit::BOTH {
                let q = p.q(x, x2);
                let d = delivered(x, x2);
                m[(chain_index(x, e), chain_index(x2, x2))] += q * d;
                m[(chain_index(x, e), chain_index(x2, e))] += q * (1.0 - d);
            }
        }
    }
    m
}

/// Row-stochastic transition matrix of `(X_n, X̂_n)` under random access.
pub fn dh_chain_random(p: &SourceParams, omega: f64) -> Matrix4<f64> {
    build_chain(p, |_, _| omega)
}

/// Row-stochastic transition matrix of `(X_n, X̂_n)` under reactive access.
pub fn dh_chain_reactive(p: &SourceParams, sources: usize) -> Matrix4<f64> {
    let beta = blocking_free(p, sources);
    build_chain(p, |x, x2| if x == x2 { 0.0 } else { beta })
}

/// Stationary law of a row-stochastic matrix by Grassmann-Taksar-Heyman
/// elimination, which involves no subtractions and stays accurate for nearly
/// decomposable chains. `None` if the chain is reducible.
pub fn chain_stationary(m: &Matrix4<f64>) -> Option<Vector4<f64>> {
    let mut a = *m;
    for n in (1..4).rev() {
        let s: f64 = (0..n).map(|j| a[(n, j)]).sum();
        if !(s > 0.0) {
            return None;
        }
        for i in 0..n {
            a[(i, n)] /= s;
        }
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += a[(i, n)] * a[(n, j)];
            }
        }
    }
    let mut pi = Vector4::zeros();
    pi[0] = 1.0;
    for n in 1..4 {
        pi[n] = (0..n).map(|i| pi[i] * a[(i, n)]).sum();
    }
    Some(pi / pi.sum())
}

/// Same as [`chain_stationary`] through an LU solve of the balance equations
/// with one row replaced by normalization.
pub fn chain_stationary_lu(m: &Matrix4<f64>) -> Option<Vector4<f64>> {
    let mut a = m.transpose() - Matrix4::identity();
    a.row_mut(3).fill(1.0);
    a.lu().solve(&Vector4::new(0.0, 0.0, 0.0, 1.0))
}

/// Error masses of a stationary `(X_n, X̂_n)` law.
pub fn pe_from_stationary(pi: &Vector4<f64>) -> PeReport {
    let pi_01 = pi[chain_index(Bit::Zero, Bit::One)];
    let pi_10 = pi[chain_index(Bit::One, Bit::Zero)];
    PeReport {
        pe: pi_01 + pi_10,
        pi_01,
        pi_10,
    }
}
