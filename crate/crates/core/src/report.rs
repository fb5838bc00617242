use serde::{Deserialize, Serialize};

use crate::rational::{serde_rat, Rational};

/// Outcome of checking an inequality or identity on concrete data.
///
/// `lhs` and `rhs` hold the compared quantities (one entry for scalar
/// checks, one per node for nodewise measure checks); `witnesses` names
/// whatever violated the check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub pass: bool,
    #[serde(with = "serde_rat::vec")]
    pub lhs: Vec<Rational>,
    #[serde(with = "serde_rat::vec")]
    pub rhs: Vec<Rational>,
    pub witnesses: Vec<String>,
}

impl Report {
    /// Scalar `lhs <= rhs`.
    pub fn le(lhs: Rational, rhs: Rational) -> Self {
        let pass = lhs <= rhs;
        Report { pass, lhs: vec![lhs], rhs: vec![rhs], witnesses: Vec::new() }
    }

    /// Nodewise `lhs[i] <= rhs[i]`; failing indices become witnesses.
    pub fn le_nodewise(lhs: Vec<Rational>, rhs: Vec<Rational>) -> Self {
        let witnesses: Vec<String> = lhs
            .iter()
            .zip(&rhs)
            .enumerate()
            .filter(|(_, (a, b))| a > b)
            .map(|(i, _)| format!("node {i}"))
            .collect();
        Report { pass: witnesses.is_empty(), lhs, rhs, witnesses }
    }
}
