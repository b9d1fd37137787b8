//! Dense Gaussian elimination over exact rationals.

use num_traits::Zero;

use crate::scalar::ExactScalar;
use crate::{Error, Result};

/// Solves `a · x = b` exactly. Pivots on the first row with a non-zero entry
/// in the current column, so the elimination order is deterministic.
pub fn solve(mut a: Vec<Vec<ExactScalar>>, mut b: Vec<ExactScalar>) -> Result<Vec<ExactScalar>> {
    let dim = b.len();
    if a.len() != dim || a.iter().any(|row| row.len() != dim) {
        return Err(Error::Domain(format!("expected a {dim}x{dim} system")));
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        b.swap(col, pivot);

        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for j in col..dim {
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    row[j] -= delta;
                }
            }
            let delta = &factor * &b[col];
            b[col + 1 + offset] -= delta;
        }
    }

    let mut x = vec![ExactScalar::zero(); dim];
    for i in (0..dim).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..dim {
            if !a[i][j].is_zero() {
                acc -= &a[i][j] * &x[j];
            }
        }
        x[i] = acc / &a[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{from_int, ratio};

    #[test]
    fn solves_small_system() {
        // 2x + y = 3, x + 3y = 5  =>  x = 4/5, y = 7/5
        let a = vec![vec![from_int(2), from_int(1)], vec![from_int(1), from_int(3)]];
        let x = solve(a, vec![from_int(3), from_int(5)]).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![from_int(0), from_int(1)], vec![from_int(1), from_int(0)]];
        assert_eq!(solve(a, vec![from_int(2), from_int(3)]).unwrap(), vec![from_int(3), from_int(2)]);
    }

    #[test]
    fn reports_singular() {
        let a = vec![vec![from_int(1), from_int(2)], vec![from_int(2), from_int(4)]];
        assert!(matches!(solve(a, vec![from_int(1), from_int(1)]), Err(Error::Singular(_))));
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(solve(vec![vec![from_int(1)]], vec![from_int(1), from_int(2)]).is_err());
    }
}
