//! Exact solver for small two-player zero-sum matrix games.
//!
//! The row player maximizes. After shifting the payoffs to be strictly
//! positive, the column player's problem is the LP
//! `max Σ y  s.t.  A y ≤ 1, y ≥ 0`, solved by a dense tableau simplex with
//! Bland's rule. The row player's optimal strategy is read off the reduced
//! costs of the slack columns.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

/// Solves `max_x min_y xᵀ A y` over mixed strategies.
///
/// `payoff` must be a non-empty rectangular matrix of finite entries.
pub fn solve_zero_sum(payoff: &[Vec<f64>]) -> GameSolution {
    let rows = payoff.len();
    let cols = payoff[0].len();
    debug_assert!(payoff.iter().all(|r| r.len() == cols));

    let min = payoff
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // Tableau: `rows` constraint rows plus one objective row; columns are
    // y (cols), slacks (rows), rhs.
    let width = cols + rows + 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for i in 0..rows {
        for j in 0..cols {
            t[i][j] = payoff[i][j] + shift;
        }
        t[i][cols + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    t[rows][..cols].fill(-1.0);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Bland: lowest-index column with negative reduced cost.
    while let Some(enter) = (0..cols + rows).find(|&j| t[rows][j] < -PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        for i in 0..rows {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        if ratio < best - PIVOT_EPS
                            || (ratio <= best + PIVOT_EPS && basis[i] < basis[l])
                        {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        // The feasible region is bounded (A > 0), so a leaving row exists.
        let leave = leave.expect("bounded game LP");
        let pivot = t[leave][enter];
        for x in t[leave].iter_mut() {
            *x /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            let factor = row[enter];
            if factor != 0.0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        basis[leave] = enter;
    }

    let total = t[rows][width - 1];
    let shifted_value = 1.0 / total;
    let mut col_strategy = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            col_strategy[b] = t[i][width - 1] * shifted_value;
        }
    }
    let row_strategy: Vec<f64> = (0..rows)
        .map(|i| (t[rows][cols + i] * shifted_value).max(0.0))
        .collect();

    GameSolution {
        value: shifted_value - shift,
        row_strategy: normalized(row_strategy),
        col_strategy: normalized(col_strategy),
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn guaranteed(payoff: &[Vec<f64>], x: &[f64]) -> f64 {
        (0..payoff[0].len())
            .map(|j| (0..payoff.len()).map(|i| x[i] * payoff[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn cyclic_game() {
        // Known value 1/12 with row strategy (1/4, 1/3, 5/12).
        let a = vec![
            vec![0.0, 2.0, -1.0],
            vec![-1.0, 0.0, 1.0],
            vec![1.0, -1.0, 0.0],
        ];
        let s = solve_zero_sum(&a);
        assert!((s.value - 1.0 / 12.0).abs() < 1e-12);
        let expect = [0.25, 1.0 / 3.0, 5.0 / 12.0];
        for (x, e) in s.row_strategy.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_point_and_single_row() {
        let a = vec![vec![3.0, 1.0], vec![4.0, 2.0]];
        let s = solve_zero_sum(&a);
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.row_strategy[1] - 1.0).abs() < 1e-12);
        let s = solve_zero_sum(&[vec![5.0, -2.0, 7.0]]);
        assert!((s.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies_subgood_shape() {
        let a = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        let s = solve_zero_sum(&a);
        assert!((s.value - 0.25).abs() < 1e-12);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn strategies_certify_the_value(
            (r, c, entries) in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), prop::collection::vec(-5.0f64..5.0, r * c))
            })
        ) {
            let a: Vec<Vec<f64>> = entries.chunks(c).map(<[f64]>::to_vec).collect();
            prop_assert_eq!(a.len(), r);
            let s = solve_zero_sum(&a);
            // Row strategy guarantees at least the value.
            prop_assert!(guaranteed(&a, &s.row_strategy) >= s.value - 1e-9);
            // Column strategy holds every row to at most the value.
            for row in &a {
                let payoff: f64 = row.iter().zip(&s.col_strategy).map(|(x, y)| x * y).sum();
                prop_assert!(payoff <= s.value + 1e-9);
            }
        }
    }
}
