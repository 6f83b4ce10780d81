use super::rlp::RlpConstraints;
use super::{RearrangeError, Result};
use crate::eventmatrix::JumpEventMatrix;
use crate::scalar::Scalar;

/// Largest number of shift vectors the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution<T> {
    pub shifts: Vec<usize>,
    pub row_sums: Vec<T>,
    pub range: T,
    pub matched_count: usize,
    pub total_distance: usize,
    pub feasible_count: u64,
}

fn feasible<T>(j: &JumpEventMatrix<T>, budget: usize, cons: &RlpConstraints, shifts: &[usize]) -> bool {
    let first_etf = j.etf_jump_rows.iter().min();
    for (l, (col, &s)) in j.columns.iter().zip(shifts).enumerate() {
        if s > budget || s > col.row {
            return false;
        }
        if cons.column_budgets.as_ref().is_some_and(|b| s > b[l]) {
            return false;
        }
        if cons.freeze_matched && s > 0 && j.etf_jump_rows.contains(&col.row) {
            return false;
        }
        if cons.no_earlier_than_etf && s > 0 {
            if let Some(&e) = first_etf {
                if col.row < e || col.row - s < e {
                    return false;
                }
            }
        }
    }
    cons.fixed_shifts.iter().all(|&(l, s)| shifts.get(l) == Some(&s))
}

/// Exhaustive enumeration of all shift vectors with each shift in
/// `0..=min(budget, row)`, applying the same tie-breaking as the solver.
pub fn brute_force_oracle<T: Scalar>(
    j: &JumpEventMatrix<T>,
    budget: usize,
    constraints: &RlpConstraints,
) -> Result<OracleSolution<T>> {
    let n = j.n_jumps();
    if let Some(b) = &constraints.column_budgets {
        if b.len() != n {
            return Err(RearrangeError::DimensionMismatch("column budget count".into()));
        }
    }
    let radix: Vec<usize> = j.columns.iter().map(|c| budget.min(c.row) + 1).collect();
    let total: u128 = radix.iter().map(|&r| r as u128).product();
    if total > ORACLE_LIMIT {
        return Err(RearrangeError::SearchSpaceTooLarge(total));
    }
    let mut shifts = vec![0usize; n];
    let mut best: Option<OracleSolution<T>> = None;
    let mut feasible_count = 0u64;
    loop {
        if feasible(j, budget, constraints, &shifts) {
            feasible_count += 1;
            let mut sums = j.target.clone();
            let mut matched = 0;
            for (col, &s) in j.columns.iter().zip(&shifts) {
                let r = col.row - s;
                sums[r] = sums[r] + col.value;
                if j.etf_jump_rows.contains(&r) {
                    matched += 1;
                }
            }
            let mut lo = sums[0];
            let mut hi = sums[0];
            for &x in &sums[1..] {
                if x < lo {
                    lo = x;
                }
                if x > hi {
                    hi = x;
                }
            }
            let range = hi - lo;
            let distance: usize = shifts.iter().sum();
            // enumeration is lexicographic, so ties keep the earlier vector
            let wins = match &best {
                None => true,
                Some(b) => {
                    range < b.range
                        || (range == b.range
                            && (matched > b.matched_count
                                || (matched == b.matched_count && distance < b.total_distance)))
                }
            };
            if wins {
                best = Some(OracleSolution {
                    shifts: shifts.clone(),
                    row_sums: sums,
                    range,
                    matched_count: matched,
                    total_distance: distance,
                    feasible_count: 0,
                });
            }
        }
        // odometer increment, last column fastest
        let mut k = n;
        loop {
            if k == 0 {
                let mut out = best.ok_or(RearrangeError::Infeasible {
                    column: 0,
                    reason: "no feasible shift vector".into(),
                })?;
                out.feasible_count = feasible_count;
                return Ok(out);
            }
            k -= 1;
            shifts[k] += 1;
            if shifts[k] < radix[k] {
                break;
            }
            shifts[k] = 0;
        }
    }
}
