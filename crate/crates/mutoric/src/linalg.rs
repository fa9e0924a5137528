//! Exact rational linear algebra: just enough Gaussian elimination to decide
//! feasibility of the affine systems that coefficient searches assemble.

use crate::geometry::Rat;
use num_traits::Zero;

/// Outcome of solving `A·x = b` exactly over the rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    /// A particular solution (free variables set to zero).
    Solvable(Vec<Rat>),
    Inconsistent,
}

/// Row-reduces the augmented system and back-substitutes with free variables
/// set to zero.
pub fn solve(mut rows: Vec<Vec<Rat>>, mut rhs: Vec<Rat>, unknowns: usize) -> Solution {
    debug_assert_eq!(rows.len(), rhs.len());
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = rows[r][col].clone().recip();
        for c in col..unknowns {
            let v = &rows[r][c] * &inv;
            rows[r][c] = v;
        }
        let v = &rhs[r] * &inv;
        rhs[r] = v;
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for c in col..unknowns {
                    let delta = &factor * &rows[r][c];
                    rows[i][c] -= delta;
                }
                let delta = &factor * &rhs[r];
                rhs[i] -= delta;
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    for i in r..rows.len() {
        if !rhs[i].is_zero() {
            return Solution::Inconsistent;
        }
    }
    let mut x = vec![Rat::zero(); unknowns];
    for (row, &col) in pivot_cols.iter().enumerate() {
        x[col] = rhs[row].clone();
    }
    Solution::Solvable(x)
}
