//! Alternating multi-circle configurations on thin cylinders and their
//! quadratic forms under `d^{2H}`.
//!
//! The basic block is a circle of perimeter 1 carrying `4N` equispaced
//! points with coefficients `(−1)^i`:
//!
//! * `A_N`: the form of one such circle,
//! * `B_N(z)`: the cross term between two copies at height distance `z`,
//! * `Q_N`: `⌊N^β⌋` copies stacked at spacing `N^{−γ}`.
//!
//! `Q_N > 0` certifies that `d^{2H}` is not negative definite. All sums are
//! second differences that cancel to many digits; see [`kernel`] for the
//! rewriting that keeps them accurate.

mod config;
pub mod kernel;
mod sums;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

pub use config::{
    crossover_scan, cylinder_witness_search, paper_configuration, perturbed_q_n, Crossover,
    CylinderWitness, MultiCircle,
};
pub use kernel::PowerDerivatives;
pub use sums::{
    a_n_circle, b_n_limit, b_n_two_circles, expansion_term, q_n_multi, series_s, ExpansionNotation,
    SeriesReport,
};

/// `4N·z` above which `B_N(z)` is taken from its Euler–Boole expansion; the
/// neglected remainder is of order `e^{−π·4Nz}`.
pub const ASYMPTOTIC_SWITCH: f64 = 24.0;

/// How a sum was (or should be) evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    /// The O(N) second-difference form.
    #[serde(alias = "reduced")]
    Reordered,
    /// The literal double sum over all points.
    #[serde(alias = "brute")]
    BruteForce,
    /// Closed-form tails (Euler–Boole) where they are exponentially
    /// accurate, reordered sums elsewhere.
    Asymptotic,
}

impl SumMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            SumMethod::Reordered => "reordered",
            SumMethod::BruteForce => "brute_force",
            SumMethod::Asymptotic => "asymptotic",
        }
    }
}

impl std::str::FromStr for SumMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reordered" | "reduced" => Ok(SumMethod::Reordered),
            "brute_force" | "brute-force" | "brute" => Ok(SumMethod::BruteForce),
            "asymptotic" => Ok(SumMethod::Asymptotic),
            other => invalid(format!("unknown sum method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SumsReport<T> {
    pub value: T,
    pub n_terms: u64,
    pub method: SumMethod,
    pub error_estimate: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Parameters of the stacked-circle configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WitnessParams<T> {
    #[serde(rename = "H")]
    pub h: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: T,
    pub gamma: T,
    /// Enforce `β > 1 − 2H`, the regime in which `Q_N → +∞`. Without it only
    /// `0 < β < γ < 1` is required, which still defines a valid
    /// configuration.
    #[serde(default = "yes")]
    pub strict: bool,
}

fn yes() -> bool {
    true
}

impl<T: Scalar> WitnessParams<T> {
    pub fn new(h: T, n: usize, beta: T, gamma: T) -> Self {
        Self {
            h,
            n,
            beta,
            gamma,
            strict: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (zero, one, half) = (T::zero(), T::one(), T::lit(0.5));
        if !(self.h > zero && self.h < half) {
            return Err(Error::OutOfDomain(format!(
                "H = {} outside (0, 1/2)",
                self.h
            )));
        }
        if self.n == 0 {
            return invalid("N must be at least 1");
        }
        if !(zero < self.beta && self.beta < self.gamma && self.gamma < one) {
            return invalid(format!(
                "need 0 < beta < gamma < 1, got beta = {}, gamma = {}",
                self.beta, self.gamma
            ));
        }
        if self.strict && !(self.beta > one - self.h - self.h) {
            return invalid(format!(
                "need beta > 1 - 2H = {}, got {}",
                one - self.h - self.h,
                self.beta
            ));
        }
        Ok(())
    }

    /// `⌊N^β⌋`, the number of stacked circles.
    pub fn circles(&self) -> usize {
        floor_power(self.n, self.beta)
    }

    /// Height step `N^{−γ}`.
    pub fn spacing(&self) -> T {
        (-self.gamma * T::from_usize_exact(self.n).ln()).exp()
    }
}

/// `⌊N^e⌋`, robust to `N^e` landing a hair below an integer.
pub(crate) fn floor_power<T: Scalar>(n: usize, e: T) -> usize {
    let v = (e * T::from_usize_exact(n).ln()).exp().to_f64_lossy();
    let f = (v * (1.0 + 1e-12)).floor();
    (f as usize).max(1)
}
