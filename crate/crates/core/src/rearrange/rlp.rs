use std::cmp::Ordering;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{range, CoPermutation, RearrangeError, Result};
use crate::eventmatrix::JumpEventMatrix;
use crate::scalar::Scalar;

/// Side constraints on the backward shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlpConstraints {
    /// Per-jump-column caps applied on top of the global budget.
    pub column_budgets: Option<Vec<usize>>,
    /// Jumps already on an ETF jump row stay put.
    pub freeze_matched: bool,
    /// No jump may end up before the first ETF jump of the window; jumps
    /// that already precede it stay put.
    pub no_earlier_than_etf: bool,
    /// `(column, shift)` pairs that must be used exactly.
    pub fixed_shifts: Vec<(usize, usize)>,
    /// Maximum number of expanded search nodes.
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for RlpConstraints {
    fn default() -> Self {
        Self {
            column_budgets: None,
            freeze_matched: false,
            no_earlier_than_etf: false,
            fixed_shifts: Vec::new(),
            node_limit: Some(5_000_000),
            time_limit: None,
        }
    }
}

impl RlpConstraints {
    /// Frozen matched jumps and nothing earlier than the ETF.
    pub fn empirical() -> Self {
        Self {
            freeze_matched: true,
            no_earlier_than_etf: true,
            ..Self::default()
        }
    }
}

/// Optimal per-jump backward shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementSolution<T> {
    pub h: usize,
    pub budget: usize,
    pub shifts: Vec<usize>,
    pub original_rows: Vec<usize>,
    pub new_rows: Vec<usize>,
    pub row_sums: Vec<T>,
    pub range: T,
    /// Smallest row sum.
    pub lower: T,
    /// Largest row sum.
    pub upper: T,
    pub initial_range: T,
    pub matched_count: usize,
    pub initial_matched: usize,
    pub total_distance: usize,
    /// False when a node or time limit stopped the search early.
    pub optimal: bool,
    pub nodes: u64,
}

impl<T: Scalar> RearrangementSolution<T> {
    pub fn co_permutation(&self) -> CoPermutation {
        CoPermutation::from_moves(self.h, &self.original_rows, &self.new_rows)
            .expect("solver shifts are backward and in range")
    }

    pub fn is_identity(&self) -> bool {
        self.shifts.iter().all(|&s| s == 0)
    }

    pub fn rearranged(&self, j: &JumpEventMatrix<T>) -> JumpEventMatrix<T> {
        j.with_rows(&self.new_rows).expect("rows inside the window")
    }
}

/// Inclusive shift bounds per jump column.
pub(crate) fn shift_bounds<T: Scalar>(
    j: &JumpEventMatrix<T>,
    budget: usize,
    cons: &RlpConstraints,
) -> Result<Vec<(usize, usize)>> {
    let n = j.n_jumps();
    if let Some(b) = &cons.column_budgets {
        if b.len() != n {
            return Err(RearrangeError::DimensionMismatch(format!(
                "{} column budgets for {n} jump columns",
                b.len()
            )));
        }
    }
    let first_etf = j.etf_jump_rows.iter().min().copied();
    let mut bounds = Vec::with_capacity(n);
    for (l, col) in j.columns.iter().enumerate() {
        let mut hi = budget.min(col.row);
        if let Some(b) = &cons.column_budgets {
            hi = hi.min(b[l]);
        }
        if cons.freeze_matched && j.etf_jump_rows.contains(&col.row) {
            hi = 0;
        }
        if cons.no_earlier_than_etf {
            if let Some(e) = first_etf {
                hi = if col.row >= e { hi.min(col.row - e) } else { 0 };
            }
        }
        bounds.push((0, hi));
    }
    for &(l, s) in &cons.fixed_shifts {
        let Some(&(_, hi)) = bounds.get(l) else {
            return Err(RearrangeError::Infeasible {
                column: l,
                reason: "no such jump column".into(),
            });
        };
        if s > hi {
            return Err(RearrangeError::Infeasible {
                column: l,
                reason: format!("forced shift {s} exceeds the allowed maximum {hi}"),
            });
        }
        bounds[l] = (s, s);
    }
    Ok(bounds)
}

#[derive(Debug, Clone)]
struct Candidate<T> {
    shifts: Vec<usize>,
    range: T,
    matched: usize,
    distance: usize,
}

fn evaluate<T: Scalar>(j: &JumpEventMatrix<T>, shifts: &[usize]) -> Candidate<T> {
    let rows: Vec<usize> = j.columns.iter().zip(shifts).map(|(c, &s)| c.row - s).collect();
    let sums = j.row_sums_at(&rows);
    Candidate {
        shifts: shifts.to_vec(),
        range: range(&sums),
        matched: rows.iter().filter(|r| j.etf_jump_rows.contains(r)).count(),
        distance: shifts.iter().sum(),
    }
}

fn better<T: Scalar>(a: &Candidate<T>, b: &Candidate<T>) -> bool {
    if a.range != b.range {
        return a.range < b.range;
    }
    if a.matched != b.matched {
        return a.matched > b.matched;
    }
    if a.distance != b.distance {
        return a.distance < b.distance;
    }
    a.shifts < b.shifts
}

fn greedy<T: Scalar>(j: &JumpEventMatrix<T>, bounds: &[(usize, usize)]) -> Candidate<T> {
    let lows: Vec<usize> = bounds.iter().map(|b| b.0).collect();
    let mut cur = evaluate(j, &lows);
    for _ in 0..100 {
        let mut improved = false;
        for (l, &(lo, hi)) in bounds.iter().enumerate() {
            for s in lo..=hi {
                if s == cur.shifts[l] {
                    continue;
                }
                let mut shifts = cur.shifts.clone();
                shifts[l] = s;
                let cand = evaluate(j, &shifts);
                if better(&cand, &cur) {
                    cur = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    cur
}

struct Node<T> {
    bound: T,
    depth: usize,
    rows: Vec<usize>,
    partial: Vec<T>,
    matched: usize,
    distance: usize,
}

struct Search<'a, T> {
    j: &'a JumpEventMatrix<T>,
    bounds: &'a [(usize, usize)],
    order: Vec<usize>,
    /// Most negative / most positive mass unassigned jumps can still add to a row.
    neg: Vec<Vec<T>>,
    pos: Vec<Vec<T>>,
    reach: Vec<Vec<usize>>,
    can_match: Vec<usize>,
    min_extra: Vec<usize>,
    tol: T,
}

enum Verdict<T> {
    Prune,
    Keep(T),
}

impl<'a, T: Scalar> Search<'a, T> {
    fn new(j: &'a JumpEventMatrix<T>, bounds: &'a [(usize, usize)]) -> Self {
        let n = j.n_jumps();
        let h = j.h;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            j.columns[b]
                .value
                .abs_val()
                .partial_cmp(&j.columns[a].value.abs_val())
                .unwrap_or(Ordering::Equal)
        });
        let mut neg = vec![vec![T::zero(); h]; n + 1];
        let mut pos = vec![vec![T::zero(); h]; n + 1];
        let mut reach = vec![vec![0usize; h]; n + 1];
        let mut can_match = vec![0usize; n + 1];
        let mut min_extra = vec![0usize; n + 1];
        for d in (0..n).rev() {
            let l = order[d];
            let col = &j.columns[l];
            let (lo, hi) = bounds[l];
            neg[d] = neg[d + 1].clone();
            pos[d] = pos[d + 1].clone();
            reach[d] = reach[d + 1].clone();
            let mut matchable = false;
            for s in lo..=hi {
                let r = col.row - s;
                reach[d][r] += 1;
                if col.value < T::zero() {
                    neg[d][r] = neg[d][r] + col.value;
                } else {
                    pos[d][r] = pos[d][r] + col.value;
                }
                matchable |= j.etf_jump_rows.contains(&r);
            }
            can_match[d] = can_match[d + 1] + usize::from(matchable);
            min_extra[d] = min_extra[d + 1] + lo;
        }
        let magnitude = j
            .columns
            .iter()
            .map(|c| c.value.abs_val())
            .chain(j.target.iter().map(|t| t.abs_val()))
            .fold(T::zero(), |a, x| a + x);
        let tol = T::from_count(8 * (n + 2)) * T::unit_roundoff() * magnitude;
        Self {
            j,
            bounds,
            order,
            neg,
            pos,
            reach,
            can_match,
            min_extra,
            tol,
        }
    }

    fn settled_sum(&self, rows: &[usize], r: usize) -> T {
        self.j
            .columns
            .iter()
            .zip(rows)
            .filter(|(_, &row)| row == r)
            .fold(self.j.target[r], |acc, (c, _)| acc + c.value)
    }

    fn judge(
        &self,
        depth: usize,
        rows: &[usize],
        partial: &[T],
        matched: usize,
        distance: usize,
        inc: &Candidate<T>,
    ) -> Verdict<T> {
        let h = self.j.h;
        let mut lo_max: Option<T> = None;
        let mut hi_min: Option<T> = None;
        let mut set_max: Option<T> = None;
        let mut set_min: Option<T> = None;
        for r in 0..h {
            let lo = partial[r] + self.neg[depth][r];
            let hi = partial[r] + self.pos[depth][r];
            lo_max = Some(lo_max.map_or(lo, |m| m.max_val(lo)));
            hi_min = Some(hi_min.map_or(hi, |m| m.min_val(hi)));
            if self.reach[depth][r] == 0 {
                let v = self.settled_sum(rows, r);
                set_max = Some(set_max.map_or(v, |m| m.max_val(v)));
                set_min = Some(set_min.map_or(v, |m| m.min_val(v)));
            }
        }
        let interval = (lo_max.unwrap_or(T::zero()) - hi_min.unwrap_or(T::zero())).max_val(T::zero());
        if interval > inc.range + self.tol {
            return Verdict::Prune;
        }
        let mut sure = match (set_max, set_min) {
            (Some(a), Some(b)) => a - b,
            _ => T::zero(),
        };
        if self.tol == T::zero() {
            sure = sure.max_val(interval);
        }
        if sure > inc.range {
            return Verdict::Prune;
        }
        if sure >= inc.range {
            let best_matched = matched + self.can_match[depth];
            let best_distance = distance + self.min_extra[depth];
            if best_matched < inc.matched
                || (best_matched == inc.matched && best_distance > inc.distance)
            {
                return Verdict::Prune;
            }
        }
        Verdict::Keep(interval)
    }

    fn run(&self, mut inc: Candidate<T>, cons: &RlpConstraints) -> (Candidate<T>, bool, u64) {
        let n = self.order.len();
        let j = self.j;
        let started = Instant::now();
        let mut stack = Vec::new();
        let root_rows = vec![usize::MAX; n];
        if let Verdict::Keep(bound) = self.judge(0, &root_rows, &j.target, 0, 0, &inc) {
            stack.push(Node {
                bound,
                depth: 0,
                rows: root_rows,
                partial: j.target.clone(),
                matched: 0,
                distance: 0,
            });
        }
        let mut nodes = 0u64;
        let mut children = Vec::new();
        while let Some(node) = stack.pop() {
            if let Verdict::Prune =
                self.judge(node.depth, &node.rows, &node.partial, node.matched, node.distance, &inc)
            {
                continue;
            }
            nodes += 1;
            if cons.node_limit.is_some_and(|lim| nodes > lim)
                || (nodes.is_multiple_of(1024) && cons.time_limit.is_some_and(|t| started.elapsed() > t))
            {
                log::warn!("branch and bound stopped after {nodes} nodes; returning incumbent");
                return (inc, false, nodes);
            }
            let l = self.order[node.depth];
            let col = &j.columns[l];
            let (lo, hi) = self.bounds[l];
            for s in lo..=hi {
                let r = col.row - s;
                let mut rows = node.rows.clone();
                rows[l] = r;
                let depth = node.depth + 1;
                if depth == n {
                    let shifts: Vec<usize> =
                        j.columns.iter().zip(&rows).map(|(c, &row)| c.row - row).collect();
                    let cand = evaluate(j, &shifts);
                    if better(&cand, &inc) {
                        inc = cand;
                    }
                    continue;
                }
                let mut partial = node.partial.clone();
                partial[r] = partial[r] + col.value;
                let matched = node.matched + usize::from(j.etf_jump_rows.contains(&r));
                let distance = node.distance + s;
                if let Verdict::Keep(bound) = self.judge(depth, &rows, &partial, matched, distance, &inc) {
                    children.push(Node {
                        bound,
                        depth,
                        rows,
                        partial,
                        matched,
                        distance,
                    });
                }
            }
            // depth first, most promising child on top
            children.sort_by(|a, b| b.bound.partial_cmp(&a.bound).unwrap_or(Ordering::Equal));
            stack.append(&mut children);
        }
        (inc, true, nodes)
    }
}

/// Minimizes the range of the row sums over backward shifts of at most
/// `budget` rows per jump.
pub fn solve_rlp<T: Scalar>(
    j: &JumpEventMatrix<T>,
    budget: usize,
    constraints: &RlpConstraints,
) -> Result<RearrangementSolution<T>> {
    let bounds = shift_bounds(j, budget, constraints)?;
    let incumbent = greedy(j, &bounds);
    let (best, optimal, nodes) = if j.n_jumps() == 0 {
        (incumbent, true, 0)
    } else {
        Search::new(j, &bounds).run(incumbent, constraints)
    };
    let original_rows = j.original_rows();
    let new_rows: Vec<usize> = original_rows.iter().zip(&best.shifts).map(|(r, s)| r - s).collect();
    let row_sums = j.row_sums_at(&new_rows);
    let lower = row_sums.iter().copied().fold(row_sums[0], T::min_val);
    let upper = row_sums.iter().copied().fold(row_sums[0], T::max_val);
    let initial_matched = original_rows
        .iter()
        .filter(|r| j.etf_jump_rows.contains(r))
        .count();
    Ok(RearrangementSolution {
        h: j.h,
        budget,
        shifts: best.shifts,
        original_rows,
        new_rows,
        row_sums,
        range: best.range,
        lower,
        upper,
        initial_range: range(&j.row_sums()),
        matched_count: best.matched,
        initial_matched,
        total_distance: best.distance,
        optimal,
        nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub budget: usize,
    pub range: T,
    pub matched_count: usize,
    pub total_distance: usize,
    pub shifts: Vec<usize>,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub points: Vec<TracePoint<T>>,
    /// Smallest budget reaching the minimal range.
    pub best_budget: usize,
    /// Among budgets with the minimal range, the smallest one with the most
    /// matched jumps.
    pub best_matched_budget: usize,
}

impl<T: Scalar> Trace<T> {
    pub fn best(&self) -> &TracePoint<T> {
        &self.points[self.best_budget]
    }

    pub fn best_matched(&self) -> &TracePoint<T> {
        &self.points[self.best_matched_budget]
    }
}

/// Solves the program for every budget `0..=c_max`.
pub fn trace<T: Scalar>(
    j: &JumpEventMatrix<T>,
    c_max: usize,
    constraints: &RlpConstraints,
) -> Result<Trace<T>> {
    let points = (0..=c_max)
        .map(|c| {
            solve_rlp(j, c, constraints).map(|s| TracePoint {
                budget: c,
                range: s.range,
                matched_count: s.matched_count,
                total_distance: s.total_distance,
                shifts: s.shifts,
                optimal: s.optimal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best_budget = 0;
    for (c, p) in points.iter().enumerate() {
        if p.range < points[best_budget].range {
            best_budget = c;
        }
    }
    let magnitude = j
        .target
        .iter()
        .map(|t| t.abs_val())
        .chain(j.columns.iter().map(|c| c.value.abs_val()))
        .fold(T::zero(), |a, x| a + x);
    let tol = T::from_count(64) * T::unit_roundoff() * magnitude;
    let floor = points[best_budget].range;
    let mut best_matched_budget = best_budget;
    for (c, p) in points.iter().enumerate() {
        if p.range <= floor + tol && p.matched_count > points[best_matched_budget].matched_count {
            best_matched_budget = c;
        }
    }
    Ok(Trace {
        points,
        best_budget,
        best_matched_budget,
    })
}
