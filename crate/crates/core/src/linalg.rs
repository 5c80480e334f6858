//! Exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::rat::Rat;

/// Rank by fraction-free (Bareiss) elimination with row pivoting.
pub fn rank(matrix: &[Vec<Rat>]) -> usize {
    let mut a: Vec<Vec<Rat>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = Rat::one();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, pivot);
        for i in (r + 1)..rows {
            for j in (col + 1)..cols {
                let v = (&a[r][col] * &a[i][j] - &a[i][col] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = Rat::zero();
        }
        prev = a[r][col].clone();
        r += 1;
    }
    r
}

pub fn is_antisymmetric(matrix: &[Vec<Rat>]) -> bool {
    let n = matrix.len();
    (0..n).all(|i| matrix[i].len() == n && (0..n).all(|j| matrix[i][j] == -matrix[j][i].clone()))
}
