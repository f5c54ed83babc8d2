//! Tunable constants and hypothesis bookkeeping.
//!
//! The guarantees implemented here hold for "large enough" constants that are
//! never pinned down. They are collected in [`Constants`] and only ever used
//! to evaluate hypotheses and emit warnings.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// `c` in the probe-count and oracle-accuracy hypotheses.
    pub c: f64,
    /// `c′`, reserved for the list-learning accuracy bound.
    pub c_prime: f64,
    /// `c₀` in the latent polytope noise bound.
    pub c0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c: 20.0,
            c_prime: 100.0,
            c0: 20.0,
        }
    }
}

/// Outcome of evaluating one inequality hypothesis `lhs ≥ rhs` (or `lhs ≤ rhs`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    pub held: bool,
}

impl HypothesisCheck {
    pub fn at_least(name: &str, statement: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(name, statement, lhs, rhs, lhs >= rhs)
    }

    pub fn at_most(name: &str, statement: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(name, statement, lhs, rhs, lhs <= rhs)
    }

    pub fn greater(name: &str, statement: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(name, statement, lhs, rhs, lhs > rhs)
    }

    fn new(name: &str, statement: &str, lhs: f64, rhs: f64, held: bool) -> Self {
        let check = Self {
            name: name.to_string(),
            statement: statement.to_string(),
            lhs,
            rhs,
            held,
        };
        if !held {
            log::warn!(
                "hypothesis `{}` does not hold: {} (lhs = {:.6e}, rhs = {:.6e})",
                check.name,
                check.statement,
                lhs,
                rhs
            );
        }
        check
    }
}

pub fn all_held(checks: &[HypothesisCheck]) -> bool {
    checks.iter().all(|c| c.held)
}
