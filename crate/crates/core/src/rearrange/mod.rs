//! Rearranging jump-event matrices.
//!
//! # The program
//!
//! For an `h x q` jump-event matrix `J` with entries `g_{il}` the
//! rearrangement program chooses binary variables `p_{lii'}` (one `h x h`
//! permutation matrix per column) and two reals `L`, `U`:
//!
//! ```text
//! minimize    U - L
//! subject to  L <= sum_l sum_i' p_{lii'} g_{i'l} <= U        for every row i
//!             sum_l sum_i sum_i' p_{lii'} = h q
//!             sum_i' p_{lii'} = 1                            for every l, i
//!             sum_i  p_{lii'} = 1                            for every l, i'
//!             p_{qii} = 1                                    for every i (target fixed)
//!             sum_{i <= i'} p_{lii'} d_{ii'} [i' = r_l] <= c_l  for every jump column l
//!             p_{lii'} = 0 for i > i' = r_l                  (no forward moves)
//! ```
//!
//! with `d_{ii'} = |i - i'|` and `r_l` the original row of the single
//! nonzero entry in column `l`. At the optimum `L` and `U` equal the smallest
//! and largest row sum.
//!
//! Because every jump column carries one nonzero entry, the row sums depend
//! on a column's permutation only through the destination row of that entry.
//! The program therefore reduces exactly to choosing one backward shift
//! `s_l in [0, c_l]` per jump; the zeros displaced by the move are completed
//! cyclically (see [`Permutation::backward_move`]). [`solve_rlp`] searches
//! the shift space by depth-first branch and bound, and
//! [`brute_force_oracle`] enumerates it.
//!
//! Among range-optimal solutions the solver prefers more jumps landing on an
//! ETF jump row, then a smaller total distance travelled, then the
//! lexicographically smallest shift vector.

mod oracle;
mod ra;
mod rlp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventmatrix::JumpEventMatrix;
use crate::scalar::Scalar;

pub use oracle::{brute_force_oracle, OracleSolution, ORACLE_LIMIT};
pub use ra::{vanilla_ra, RaResult, RaUpdate, RearrangementAlgorithm};
pub use rlp::{solve_rlp, trace, RearrangementSolution, RlpConstraints, Trace, TracePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RearrangeError {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("infeasible constraints on jump column {column}: {reason}")]
    Infeasible { column: usize, reason: String },
    #[error("search space of {0} shift vectors exceeds the oracle limit")]
    SearchSpaceTooLarge(u128),
}

pub type Result<T> = std::result::Result<T, RearrangeError>;

/// Zero-based permutation: position `i` of the rearranged column takes the
/// element at original position `self[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(h: usize) -> Self {
        Self((0..h).collect())
    }

    pub fn new(map: Vec<usize>) -> Result<Self> {
        let h = map.len();
        let mut seen = vec![false; h];
        for &m in &map {
            if m >= h || seen[m] {
                return Err(RearrangeError::InvalidPermutation(format!(
                    "{map:?} is not a bijection on 0..{h}"
                )));
            }
            seen[m] = true;
        }
        Ok(Self(map))
    }

    /// From the one-based vector notation `(pi(1), ..., pi(h))`.
    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        if map.contains(&0) {
            return Err(RearrangeError::InvalidPermutation("one-based index 0".into()));
        }
        Self::new(map.iter().map(|m| m - 1).collect())
    }

    /// Moves the element at `from` up by `shift` rows; the elements in
    /// between slide down one row each.
    pub fn backward_move(h: usize, from: usize, shift: usize) -> Result<Self> {
        if from >= h || shift > from {
            return Err(RearrangeError::InvalidPermutation(format!(
                "cannot move row {from} back by {shift} in a window of {h}"
            )));
        }
        let to = from - shift;
        let mut map: Vec<usize> = (0..h).collect();
        map[to] = from;
        for (i, m) in map.iter_mut().enumerate().take(from + 1).skip(to + 1) {
            *m = i - 1;
        }
        Ok(Self(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// New position of the element originally at `row`.
    pub fn destination(&self, row: usize) -> Option<usize> {
        self.0.iter().position(|&m| m == row)
    }

    pub fn apply<T: Copy>(&self, column: &[T]) -> Vec<T> {
        self.0.iter().map(|&m| column[m]).collect()
    }

    pub fn to_matrix(&self) -> PermutationMatrix {
        let h = self.len();
        let mut entries = vec![0u8; h * h];
        for (i, &m) in self.0.iter().enumerate() {
            entries[i * h + m] = 1;
        }
        PermutationMatrix { h, entries }
    }
}

/// Dense `h x h` 0/1 matrix with `p_{ii'} = 1` iff `i' = pi(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationMatrix {
    h: usize,
    entries: Vec<u8>,
}

impl PermutationMatrix {
    pub fn identity(h: usize) -> Self {
        Permutation::identity(h).to_matrix()
    }

    /// Wraps row-major entries; validity is checked by [`Self::validate`].
    pub fn from_entries(h: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != h * h {
            return Err(RearrangeError::DimensionMismatch(format!(
                "{} entries for a {h}x{h} matrix",
                entries.len()
            )));
        }
        Ok(Self { h, entries })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.h + j]
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.entries
            .chunks(self.h.max(1))
            .map(|r| r.iter().map(|&x| x as usize).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.h)
            .map(|j| (0..self.h).map(|i| self.get(i, j) as usize).sum())
            .collect()
    }

    pub fn ones(&self) -> usize {
        self.entries.iter().map(|&x| x as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.h)
    }

    /// Binary entries, unit row sums and unit column sums.
    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|&x| x > 1) {
            return Err(RearrangeError::InvalidPermutation("non-binary entry".into()));
        }
        if self.row_sums().iter().any(|&s| s != 1) {
            return Err(RearrangeError::InvalidPermutation("row sum differs from 1".into()));
        }
        if self.col_sums().iter().any(|&s| s != 1) {
            return Err(RearrangeError::InvalidPermutation("column sum differs from 1".into()));
        }
        Ok(())
    }

    pub fn to_permutation(&self) -> Result<Permutation> {
        self.validate()?;
        Permutation::new(
            (0..self.h)
                .map(|i| (0..self.h).position(|j| self.get(i, j) == 1).expect("validated"))
                .collect(),
        )
    }

    /// `P x column`.
    pub fn mul_column<T: Scalar>(&self, column: &[T]) -> Vec<T> {
        (0..self.h)
            .map(|i| {
                (0..self.h)
                    .filter(|&j| self.get(i, j) == 1)
                    .fold(T::zero(), |acc, j| acc + column[j])
            })
            .collect()
    }
}

/// One permutation matrix per column of the jump-event matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoPermutation {
    pub matrices: Vec<PermutationMatrix>,
}

impl CoPermutation {
    pub fn identity(h: usize, q: usize) -> Self {
        Self {
            matrices: vec![PermutationMatrix::identity(h); q],
        }
    }

    /// Co-permutation that moves jump `l` from `from_rows[l]` to `to_rows[l]`.
    pub fn from_moves(h: usize, from_rows: &[usize], to_rows: &[usize]) -> Result<Self> {
        let mut matrices = from_rows
            .iter()
            .zip(to_rows)
            .map(|(&f, &t)| {
                if t > f {
                    return Err(RearrangeError::InvalidPermutation(format!(
                        "forward move from row {f} to {t}"
                    )));
                }
                Ok(Permutation::backward_move(h, f, f - t)?.to_matrix())
            })
            .collect::<Result<Vec<_>>>()?;
        matrices.push(PermutationMatrix::identity(h));
        Ok(Self { matrices })
    }

    pub fn q(&self) -> usize {
        self.matrices.len()
    }

    pub fn h(&self) -> usize {
        self.matrices.first().map_or(0, PermutationMatrix::h)
    }

    /// Every block is a permutation matrix, the blocks hold `h q` ones in
    /// total and the last block is the identity.
    pub fn validate(&self) -> Result<()> {
        let h = self.h();
        if self.matrices.is_empty() {
            return Err(RearrangeError::DimensionMismatch("empty co-permutation".into()));
        }
        if self.matrices.iter().any(|m| m.h() != h) {
            return Err(RearrangeError::DimensionMismatch("blocks of different sizes".into()));
        }
        for m in &self.matrices {
            m.validate()?;
        }
        let ones: usize = self.matrices.iter().map(PermutationMatrix::ones).sum();
        if ones != h * self.q() {
            return Err(RearrangeError::InvalidPermutation(format!(
                "{ones} ones, expected {}",
                h * self.q()
            )));
        }
        if !self.matrices[self.q() - 1].is_identity() {
            return Err(RearrangeError::InvalidPermutation(
                "the target column must not be rearranged".into(),
            ));
        }
        Ok(())
    }
}

/// `|i - i'|` distances with an optional mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    h: usize,
    entries: Vec<usize>,
}

impl DistanceMatrix {
    pub fn new(h: usize) -> Self {
        let entries = (0..h * h).map(|k| (k / h).abs_diff(k % h)).collect();
        Self { h, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.h + j]
    }

    /// Keeps only column `jump_row`, the one tracking the jump.
    pub fn masked(mut self, jump_row: usize) -> Self {
        for (k, d) in self.entries.iter_mut().enumerate() {
            if k % self.h != jump_row {
                *d = 0;
            }
        }
        self
    }

    /// Keeps the part on and above the diagonal: upward, i.e. backward, moves.
    pub fn upper_triangular(mut self) -> Self {
        for (k, d) in self.entries.iter_mut().enumerate() {
            if k / self.h > k % self.h {
                *d = 0;
            }
        }
        self
    }

    /// `vecr(P) . vecr(D)`.
    pub fn dot(&self, p: &PermutationMatrix) -> usize {
        self.entries
            .iter()
            .enumerate()
            .map(|(k, &d)| d * p.get(k / self.h, k % self.h) as usize)
            .sum()
    }
}

/// Distance travelled by the jump originally at `jump_row`.
pub fn jump_distance(p: &PermutationMatrix, jump_row: usize) -> Result<usize> {
    if jump_row >= p.h() {
        return Err(RearrangeError::DimensionMismatch(format!(
            "jump row {jump_row} outside window of {}",
            p.h()
        )));
    }
    Ok(DistanceMatrix::new(p.h()).masked(jump_row).dot(p))
}

/// Backward part of the distance travelled by the jump at `jump_row`; equals
/// [`jump_distance`] unless the jump moved forward.
pub fn backward_distance(p: &PermutationMatrix, jump_row: usize) -> Result<usize> {
    if jump_row >= p.h() {
        return Err(RearrangeError::DimensionMismatch(format!(
            "jump row {jump_row} outside window of {}",
            p.h()
        )));
    }
    Ok(DistanceMatrix::new(p.h())
        .upper_triangular()
        .masked(jump_row)
        .dot(p))
}

/// Dense rearranged matrix with its row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedMatrix<T> {
    /// Row-major, target in the last column.
    pub rows: Vec<Vec<T>>,
    pub row_sums: Vec<T>,
}

/// Premultiplies each column of `j` by its block of `pi`.
pub fn apply<T: Scalar>(j: &JumpEventMatrix<T>, pi: &CoPermutation) -> Result<RearrangedMatrix<T>> {
    pi.validate()?;
    if pi.h() != j.h || pi.q() != j.q() {
        return Err(RearrangeError::DimensionMismatch(format!(
            "co-permutation is {}x{}, matrix is {}x{}",
            pi.h(),
            pi.q(),
            j.h,
            j.q()
        )));
    }
    let q = j.q();
    let columns: Vec<Vec<T>> = (0..q).map(|l| pi.matrices[l].mul_column(&j.column(l))).collect();
    let rows: Vec<Vec<T>> = (0..j.h).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    // target first, then jump columns left to right
    let row_sums = rows
        .iter()
        .map(|r| r[..q - 1].iter().fold(r[q - 1], |acc, &v| acc + v))
        .collect();
    Ok(RearrangedMatrix { rows, row_sums })
}

/// Largest minus smallest entry; zero for an empty slice.
pub fn range<T: Scalar>(row_sums: &[T]) -> T {
    match row_sums.split_first() {
        None => T::zero(),
        Some((&first, rest)) => {
            let (lo, hi) = rest
                .iter()
                .fold((first, first), |(lo, hi), &x| (lo.min_val(x), hi.max_val(x)));
            hi - lo
        }
    }
}

/// Variance of the row sums around their mean.
pub fn variance<T: Scalar>(row_sums: &[T]) -> T {
    if row_sums.is_empty() {
        return T::zero();
    }
    let n = T::from_count(row_sums.len());
    let mean = row_sums.iter().fold(T::zero(), |a, &x| a + x) / n;
    row_sums
        .iter()
        .fold(T::zero(), |a, &x| a + (x - mean) * (x - mean))
        / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> JumpEventMatrix<f64> {
        JumpEventMatrix::from_dense(
            &[
                vec![0.0, 0.0, 0.0, -0.002],
                vec![0.0, 0.0, 0.0, 0.003],
                vec![0.0, 0.0, 0.0, -0.807],
                vec![0.210, 0.0, 0.400, 0.004],
                vec![0.0, 0.217, 0.0, -0.028],
            ],
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        let p = Permutation::from_one_based(&[1, 2, 4, 3, 5]).unwrap();
        assert_eq!(p.as_slice(), &[0, 1, 3, 2, 4]);
        assert_eq!(p.destination(3), Some(2));
    }

    #[test]
    fn paper_swap_matrix() {
        let p = Permutation::from_one_based(&[1, 2, 4, 3, 5]).unwrap().to_matrix();
        assert_eq!(p.get(2, 3), 1);
        assert_eq!(p.get(3, 2), 1);
        assert_eq!(p.get(2, 2), 0);
        p.validate().unwrap();
        assert_eq!(p.ones(), 5);
        assert_eq!(jump_distance(&p, 3).unwrap(), 1);
        assert_eq!(backward_distance(&p, 3).unwrap(), 1);
        // the zero that moved forward is not a backward move
        assert_eq!(jump_distance(&p, 2).unwrap(), 1);
        assert_eq!(backward_distance(&p, 2).unwrap(), 0);
    }

    #[test]
    fn distances() {
        let id = PermutationMatrix::identity(6);
        assert_eq!(jump_distance(&id, 4).unwrap(), 0);
        let up3 = Permutation::backward_move(6, 4, 3).unwrap().to_matrix();
        assert_eq!(jump_distance(&up3, 4).unwrap(), 3);
        assert_eq!(backward_distance(&up3, 4).unwrap(), 3);
        assert!(jump_distance(&up3, 6).is_err());
        let d = DistanceMatrix::new(4);
        for i in 0..4 {
            assert_eq!(d.get(i, i), 0);
            for j in 0..4 {
                assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
    }

    #[test]
    fn backward_move_is_cyclic() {
        let p = Permutation::backward_move(5, 4, 2).unwrap();
        assert_eq!(p.as_slice(), &[0, 1, 4, 2, 3]);
        assert_eq!(p.apply(&[10, 11, 12, 13, 14]), vec![10, 11, 14, 12, 13]);
        assert!(Permutation::backward_move(5, 1, 2).is_err());
        assert_eq!(Permutation::backward_move(5, 3, 0).unwrap(), Permutation::identity(5));
    }

    #[test]
    fn matrix_round_trip_and_invalid_entries() {
        let p = Permutation::backward_move(5, 4, 2).unwrap();
        assert_eq!(p.to_matrix().to_permutation().unwrap(), p);
        let bad = PermutationMatrix::from_entries(2, vec![1, 1, 0, 0]).unwrap();
        assert!(bad.validate().is_err());
        let bad = PermutationMatrix::from_entries(2, vec![1, 0, 1, 0]).unwrap();
        assert!(bad.validate().is_err());
        assert!(PermutationMatrix::from_entries(2, vec![1, 0, 0]).is_err());
    }

    #[test]
    fn identity_apply_keeps_matrix() {
        let j = toy();
        let out = apply(&j, &CoPermutation::identity(5, 4)).unwrap();
        assert_eq!(out.rows, j.dense());
        assert_eq!(out.row_sums, j.row_sums());
    }

    #[test]
    fn paper_swap_row_sums() {
        let j = toy();
        let mut pi = CoPermutation::identity(5, 4);
        pi.matrices[0] = Permutation::from_one_based(&[1, 2, 4, 3, 5]).unwrap().to_matrix();
        let out = apply(&j, &pi).unwrap();
        let expected = [-0.002, 0.003, -0.597, 0.404, 0.189];
        for (a, b) in out.row_sums.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn apply_rejects_bad_co_permutations() {
        let j = toy();
        let mut pi = CoPermutation::identity(5, 4);
        pi.matrices[3] = Permutation::backward_move(5, 1, 1).unwrap().to_matrix();
        assert!(apply(&j, &pi).is_err());
        assert!(apply(&j, &CoPermutation::identity(5, 3)).is_err());
        let mut pi = CoPermutation::identity(5, 4);
        pi.matrices[1] = PermutationMatrix::from_entries(5, vec![0; 25]).unwrap();
        assert!(apply(&j, &pi).is_err());
    }

    #[test]
    fn best_paper_arrangement() {
        let j = toy();
        let pi = CoPermutation::from_moves(5, &j.original_rows(), &[2, 2, 2]).unwrap();
        pi.validate().unwrap();
        let out = apply(&j, &pi).unwrap();
        assert!((range(&out.row_sums) - 0.048).abs() < 1e-12);
        assert!(CoPermutation::from_moves(5, &[2], &[3]).is_err());
    }

    #[test]
    fn range_and_variance() {
        assert_eq!(range(&[0.5; 4]), 0.0);
        assert_eq!(range::<f64>(&[]), 0.0);
        assert!((range(&toy().row_sums()) - 1.421).abs() < 1e-12);
        assert!((range(&[-0.807f64, 0.1, 0.614]) - 1.421).abs() < 1e-12);
        assert_eq!(variance(&[1.0, 1.0]), 0.0);
        assert_eq!(variance(&[0.0, 2.0]), 1.0);
    }
}
