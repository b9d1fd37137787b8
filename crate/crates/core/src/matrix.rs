//! Dense row-stochastic matrices over exact rationals.

use num_traits::{One, Zero};

use crate::scalar::ExactScalar;
use crate::{Error, Result};

/// Square row-stochastic matrix with exact entries.
///
/// Construction checks that every entry lies in `[0, 1]` and that each row
/// sums to exactly one, so a value of this type is always a valid kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<ExactScalar>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Domain("transition matrix must be non-empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Domain(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| *x < ExactScalar::zero() || *x > ExactScalar::one()) {
                return Err(Error::InvariantViolation(format!(
                    "entry ({i}, {j}) = {} is not a probability",
                    row[j]
                )));
            }
            let sum: ExactScalar = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::InvariantViolation(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactScalar {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<ExactScalar>] {
        &self.rows
    }

    /// Non-zero entries of row `i` as `(column, probability)`.
    pub fn support(&self, i: usize) -> impl Iterator<Item = (usize, &ExactScalar)> {
        self.rows[i].iter().enumerate().filter(|(_, x)| !x.is_zero())
    }
}
