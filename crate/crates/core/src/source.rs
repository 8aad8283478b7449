//! Two-state stationary Markov source.

use rand::Rng;

use crate::error::{Error, Result};

/// State of a binary source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bit {
    Zero = 0,
    One = 1,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Bit {
        if i == 0 {
            Bit::Zero
        } else {
            Bit::One
        }
    }
}

/// 2x2 row-stochastic matrix, `m[from][to]`.
pub type Transition = [[f64; 2]; 2];

/// Per-slot transition probabilities of a two-state source.
///
/// Both flip probabilities are kept strictly inside (0, 1) so the chain is
/// ergodic and its stationary law is unique.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceParams {
    q01: f64,
    q10: f64,
}

impl SourceParams {
    pub fn new(q01: f64, q10: f64) -> Result<Self> {
        check_open_unit("q01", q01)?;
        check_open_unit("q10", q10)?;
        Ok(Self { q01, q10 })
    }

    /// Same flip probability in both directions.
    pub fn symmetric(q: f64) -> Result<Self> {
        Self::new(q, q)
    }

    #[inline]
    pub fn q01(&self) -> f64 {
        self.q01
    }

    #[inline]
    pub fn q10(&self) -> f64 {
        self.q10
    }

    #[inline]
    pub fn q00(&self) -> f64 {
        1.0 - self.q01
    }

    #[inline]
    pub fn q11(&self) -> f64 {
        1.0 - self.q10
    }

    /// `P[X_n = to | X_{n-1} = from]`.
    #[inline]
    pub fn q(&self, from: Bit, to: Bit) -> f64 {
        match (from, to) {
            (Bit::Zero, Bit::Zero) => self.q00(),
            (Bit::Zero, Bit::One) => self.q01,
            (Bit::One, Bit::Zero) => self.q10,
            (Bit::One, Bit::One) => self.q11(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.q01 - self.q10).abs() <= 1e-12
    }

    pub fn one_step(&self) -> Transition {
        [[self.q00(), self.q01], [self.q10, self.q11()]]
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

/// Stationary law `(pi0, pi1)`.
pub fn stationary_distribution(p: &SourceParams) -> (f64, f64) {
    let total = p.q01 + p.q10;
    (p.q10 / total, p.q01 / total)
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(prob: f64) -> f64 {
    let term = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    term(prob) + term(1.0 - prob)
}

/// Entropy of the stationary law, in bits.
pub fn source_entropy(p: &SourceParams) -> f64 {
    let (_, pi1) = stationary_distribution(p);
    binary_entropy(pi1)
}

pub fn mat_mul(a: &Transition, b: &Transition) -> Transition {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `k`-th power of the one-step matrix by repeated squaring. `k = 0` gives
/// the identity.
pub fn k_step_transition(p: &SourceParams, k: u64) -> Transition {
    let mut result = [[1.0, 0.0], [0.0, 1.0]];
    let mut base = p.one_step();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        k >>= 1;
    }
    result
}

/// Draw the next state of the source.
pub fn sample_next<R: Rng + ?Sized>(p: &SourceParams, x: Bit, rng: &mut R) -> Bit {
    let flip = match x {
        Bit::Zero => p.q01,
        Bit::One => p.q10,
    };
    if rng.gen::<f64>() < flip {
        x.flip()
    } else {
        x
    }
}

/// Draw a state from the stationary law.
pub fn sample_stationary<R: Rng + ?Sized>(p: &SourceParams, rng: &mut R) -> Bit {
    let (_, pi1) = stationary_distribution(p);
    if rng.gen::<f64>() < pi1 {
        Bit::One
    } else {
        Bit::Zero
    }
}
