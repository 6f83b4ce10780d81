use jumpsync::eventmatrix::{build_jump_event_matrix, ClassifiedReturns, JumpEventMatrix, PricePanel};
use jumpsync::rearrange::{apply, brute_force_oracle, range, solve_rlp, variance, vanilla_ra, RlpConstraints};
use jumpsync::Rational64;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    dense: Vec<Vec<f64>>,
    etf_rows: Vec<usize>,
    budget: usize,
    freeze: bool,
    no_earlier: bool,
}

impl Case {
    fn matrix(&self) -> JumpEventMatrix<f64> {
        JumpEventMatrix::from_dense(&self.dense, self.etf_rows.clone()).unwrap()
    }

    fn constraints(&self) -> RlpConstraints {
        RlpConstraints {
            freeze_matched: self.freeze,
            no_earlier_than_etf: self.no_earlier,
            ..RlpConstraints::default()
        }
    }
}

// small integers keep every sum exact in f64
fn case() -> impl Strategy<Value = Case> {
    (2usize..=9, 0usize..=5).prop_flat_map(|(h, n)| {
        let jumps = prop::collection::vec((0..h, prop_oneof![-5i32..=-1, 1i32..=5]), n);
        let target = prop::collection::vec(-6i32..=6, h);
        let etf = prop::collection::btree_set(0..h, 0..=2);
        (jumps, target, etf, 0usize..=4, any::<bool>(), any::<bool>()).prop_map(
            move |(jumps, target, etf, budget, freeze, no_earlier)| {
                let mut dense = vec![vec![0.0; n + 1]; h];
                for (l, &(row, v)) in jumps.iter().enumerate() {
                    dense[row][l] = f64::from(v);
                }
                for (i, &t) in target.iter().enumerate() {
                    dense[i][n] = f64::from(t);
                }
                Case {
                    dense,
                    etf_rows: etf.into_iter().collect(),
                    budget,
                    freeze,
                    no_earlier,
                }
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_oracle(c in case()) {
        let j = c.matrix();
        let cons = c.constraints();
        let s = solve_rlp(&j, c.budget, &cons).unwrap();
        let o = brute_force_oracle(&j, c.budget, &cons).unwrap();
        prop_assert!(s.optimal);
        prop_assert_eq!(s.range, o.range);
        prop_assert_eq!(&s.shifts, &o.shifts);
        prop_assert_eq!(s.matched_count, o.matched_count);
        prop_assert_eq!(s.total_distance, o.total_distance);
    }

    #[test]
    fn range_is_monotone_in_budget(c in case()) {
        let j = c.matrix();
        let cons = c.constraints();
        let mut prev = f64::INFINITY;
        for b in 0..=4 {
            let s = solve_rlp(&j, b, &cons).unwrap();
            prop_assert!(s.range <= prev);
            prev = s.range;
        }
    }

    #[test]
    fn solutions_are_valid_moves(c in case()) {
        let j = c.matrix();
        let s = solve_rlp(&j, c.budget, &c.constraints()).unwrap();
        for (l, col) in j.columns.iter().enumerate() {
            prop_assert!(s.shifts[l] <= c.budget);
            prop_assert_eq!(s.new_rows[l] + s.shifts[l], col.row);
        }
        let pi = s.co_permutation();
        prop_assert!(pi.validate().is_ok());
        let applied = apply(&j, &pi).unwrap();
        prop_assert_eq!(&applied.row_sums, &s.row_sums);
        prop_assert_eq!(range(&s.row_sums), s.range);
    }

    #[test]
    fn moves_conserve_the_total(c in case()) {
        let j = c.matrix();
        let s = solve_rlp(&j, c.budget, &c.constraints()).unwrap();
        let before: f64 = j.row_sums().iter().sum();
        let after: f64 = s.row_sums.iter().sum();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn shifts_are_scale_invariant(c in case(), k in 1i32..=4) {
        let j = c.matrix();
        let scaled: Vec<Vec<f64>> = c
            .dense
            .iter()
            .map(|r| r.iter().map(|v| v * f64::from(k)).collect())
            .collect();
        let js = JumpEventMatrix::from_dense(&scaled, c.etf_rows.clone()).unwrap();
        let cons = c.constraints();
        let a = solve_rlp(&j, c.budget, &cons).unwrap();
        let b = solve_rlp(&js, c.budget, &cons).unwrap();
        prop_assert_eq!(&a.shifts, &b.shifts);
        prop_assert_eq!(b.range, a.range * f64::from(k));
    }

    #[test]
    fn ra_variance_never_rises(c in case(), seed in any::<u64>()) {
        let j = c.matrix();
        let ra = vanilla_ra(&j, seed, 200);
        let mut prev = ra.initial_variance;
        for u in &ra.updates {
            prop_assert!(u.variance <= prev + 1e-12);
            prev = u.variance;
        }
        prop_assert!(ra.converged);
        prop_assert!(ra.variance <= ra.initial_variance + 1e-12);
        prop_assert_eq!(variance(&ra.row_sums), ra.variance);
        let target: Vec<f64> = ra.rows.iter().map(|r| *r.last().unwrap()).collect();
        prop_assert_eq!(target, j.target.clone());
    }
}

fn rational_panel() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<Vec<bool>>, usize)> {
    (1usize..=3, 8usize..=14).prop_flat_map(|(p, n)| {
        (
            prop::collection::vec(prop::collection::vec(-20i64..=20, n), p),
            prop::collection::vec(-20i64..=20, n),
            prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.2), n), p),
            2..n - 2,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn window_rows_sum_to_spreads((stocks, etf, flags, r) in rational_panel()) {
        let p = stocks.len();
        let n = etf.len();
        let q = |v: i64| Rational64::new(v, 1000);
        let returns: Vec<Vec<Rational64>> = stocks.iter().map(|s| s.iter().map(|&v| q(v)).collect()).collect();
        let weights = vec![vec![Rational64::new(1, p as i64); n]; p];
        let etf_r: Vec<Rational64> = etf.iter().map(|&v| q(v)).collect();
        let ids = (0..p).map(|k| format!("S{k}")).collect();
        let panel = PricePanel::from_returns(ids, &returns, &weights, "E", &etf_r, n).unwrap();
        let mut etf_flags = vec![false; n];
        etf_flags[r] = true;
        let classified = ClassifiedReturns::new(&panel, flags, etf_flags).unwrap();
        let j = build_jump_event_matrix(&classified, &[r], 2, 2).unwrap();
        let sums = j.row_sums();
        for (i, s) in sums.iter().enumerate() {
            let t = j.window_start + i;
            prop_assert_eq!(*s, classified.spread(t));
            let parts = (0..p).fold(classified.target(t), |acc, k| acc + classified.weighted_jump(k, t));
            prop_assert_eq!(parts, classified.spread(t));
        }
    }
}
