use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{range, variance};
use crate::eventmatrix::JumpEventMatrix;
use crate::scalar::Scalar;

/// One accepted column rearrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaUpdate<T> {
    pub sweep: usize,
    pub column: usize,
    /// Row-sum variance after the update.
    pub variance: T,
    pub range: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaResult<T> {
    /// Row-major, target in the last column.
    pub rows: Vec<Vec<T>>,
    pub row_sums: Vec<T>,
    pub initial_variance: T,
    pub variance: T,
    pub range: T,
    pub sweeps: usize,
    pub converged: bool,
    pub updates: Vec<RaUpdate<T>>,
}

/// Column-wise state of the classic rearrangement algorithm. The last column
/// is the target and is never touched.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementAlgorithm<T> {
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> RearrangementAlgorithm<T> {
    pub fn new(j: &JumpEventMatrix<T>) -> Self {
        Self {
            columns: (0..j.q()).map(|l| j.column(l)).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let q = rows.first().map_or(0, Vec::len);
        Self {
            columns: (0..q).map(|l| rows.iter().map(|r| r[l]).collect()).collect(),
        }
    }

    pub fn h(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn q(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.h())
            .map(|i| self.columns.iter().map(|c| c[i]).collect())
            .collect()
    }

    /// Target first, then the other columns left to right.
    pub fn row_sums(&self) -> Vec<T> {
        let q = self.q();
        (0..self.h())
            .map(|i| {
                self.columns[..q - 1]
                    .iter()
                    .fold(self.columns[q - 1][i], |acc, c| acc + c[i])
            })
            .collect()
    }

    /// Row sums over every column except `l`.
    pub fn others(&self, l: usize) -> Vec<T> {
        let q = self.q();
        (0..self.h())
            .map(|i| {
                self.columns[..q - 1]
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| *m != l)
                    .fold(self.columns[q - 1][i], |acc, (_, c)| acc + c[i])
            })
            .collect()
    }

    /// Randomly permutes every non-target column.
    pub fn shuffle(&mut self, rng: &mut ChaCha8Rng) {
        let q = self.q();
        for c in &mut self.columns[..q.saturating_sub(1)] {
            c.shuffle(rng);
        }
    }

    pub fn is_oppositely_ordered(&self, l: usize) -> bool {
        let col = &self.columns[l];
        let other = self.others(l);
        for i in 0..col.len() {
            for k in i + 1..col.len() {
                let a = col[i] - col[k];
                let b = other[i] - other[k];
                if (a > T::zero() && b > T::zero()) || (a < T::zero() && b < T::zero()) {
                    return false;
                }
            }
        }
        true
    }

    /// Sorts column `l` oppositely to the sum of the others if it is not
    /// already; returns whether it changed.
    pub fn rearrange_column(&mut self, l: usize) -> bool {
        if l + 1 >= self.q() || self.is_oppositely_ordered(l) {
            return false;
        }
        let other = self.others(l);
        let mut by_other: Vec<usize> = (0..self.h()).collect();
        by_other.sort_by(|&a, &b| other[b].partial_cmp(&other[a]).expect("finite row sums"));
        let mut values = self.columns[l].clone();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
        for (&row, v) in by_other.iter().zip(values) {
            self.columns[l][row] = v;
        }
        true
    }

    /// Is every non-target column oppositely ordered to the rest?
    pub fn is_converged(&self) -> bool {
        (0..self.q().saturating_sub(1)).all(|l| self.is_oppositely_ordered(l))
    }
}

/// Shuffles the jump columns, then sweeps over them re-sorting each one
/// oppositely to the sum of the others until a sweep changes nothing.
pub fn vanilla_ra<T: Scalar>(j: &JumpEventMatrix<T>, rng_seed: u64, max_iters: usize) -> RaResult<T> {
    let mut ra = RearrangementAlgorithm::new(j);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    ra.shuffle(&mut rng);
    run(ra, max_iters)
}

pub(crate) fn run<T: Scalar>(mut ra: RearrangementAlgorithm<T>, max_iters: usize) -> RaResult<T> {
    let initial_variance = variance(&ra.row_sums());
    let mut updates = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_iters {
        sweeps += 1;
        let mut changed = false;
        for l in 0..ra.q() - 1 {
            if ra.rearrange_column(l) {
                changed = true;
                let sums = ra.row_sums();
                updates.push(RaUpdate {
                    sweep: sweeps,
                    column: l,
                    variance: variance(&sums),
                    range: range(&sums),
                });
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let row_sums = ra.row_sums();
    RaResult {
        rows: ra.rows(),
        variance: variance(&row_sums),
        range: range(&row_sums),
        row_sums,
        initial_variance,
        sweeps,
        converged,
        updates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn toy() -> JumpEventMatrix<Rational64> {
        let m = |x: i64| Rational64::new(x, 1000);
        JumpEventMatrix::from_dense(
            &[
                vec![m(0), m(0), m(0), m(-2)],
                vec![m(0), m(0), m(0), m(3)],
                vec![m(0), m(0), m(0), m(-807)],
                vec![m(210), m(0), m(400), m(4)],
                vec![m(0), m(217), m(0), m(-28)],
            ],
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn first_column_matches_etf_row() {
        let j = toy();
        for seed in 0..20 {
            let mut ra = RearrangementAlgorithm::new(&j);
            ra.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            ra.rearrange_column(0);
            let row = ra.columns[0].iter().position(|&x| x != Rational64::from_integer(0));
            assert_eq!(row, Some(2), "seed {seed}");
        }
    }

    #[test]
    fn converges_with_monotone_variance() {
        let j = toy();
        for seed in 0..20 {
            let out = vanilla_ra(&j, seed, 100);
            assert!(out.converged);
            let mut prev = out.initial_variance;
            for u in &out.updates {
                assert!(u.variance <= prev);
                prev = u.variance;
            }
            assert_eq!(out.rows.iter().map(|r| r[3]).collect::<Vec<_>>(), j.target);
        }
    }

    #[test]
    fn single_column_goes_to_most_negative_target() {
        let rows = vec![
            vec![0.0, 0.3],
            vec![0.5, -0.1],
            vec![0.0, -0.9],
            vec![0.0, 0.2],
        ];
        let mut ra = RearrangementAlgorithm::from_dense(&rows);
        assert!(ra.rearrange_column(0));
        assert_eq!(ra.columns[0], vec![0.0, 0.0, 0.5, 0.0]);
        assert!(!ra.rearrange_column(0));
        assert!(!ra.rearrange_column(1));
    }

    #[test]
    fn converged_matrix_is_a_fixed_point() {
        let rows = vec![vec![0.0, 0.0, 0.3], vec![0.5, 0.2, -0.9]];
        let ra = RearrangementAlgorithm::from_dense(&rows);
        assert!(ra.is_converged());
        let out = run(ra, 10);
        assert!(out.updates.is_empty());
        assert_eq!(out.sweeps, 1);
        assert!(out.converged);
    }
}
