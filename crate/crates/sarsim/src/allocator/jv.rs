//! Minimum-cost rectangular assignment (shortest augmenting path with dual
//! potentials, the Jonker-Volgenant scheme).
//!
//! Costs are `f64`; `f64::INFINITY` marks a forbidden pairing. Forbidden
//! edges are never matched — a row whose reachable columns are exhausted
//! simply stays unmatched, so the result is a minimum-cost matching that
//! pairs as many rows as the finite edges allow.

/// Match rows to columns minimizing total cost. Returns the matched column
/// per row, `None` for unmatched rows. When there are more rows than
/// columns the problem is solved transposed, so every column that can be
/// matched is.
pub fn assign(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    if cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> =
            (0..cols).map(|c| (0..rows).map(|r| cost[r][c]).collect()).collect();
        let m = assign(&transposed);
        let mut out = vec![None; rows];
        for (c, r) in m.iter().enumerate() {
            if let Some(r) = r {
                out[*r] = Some(c);
            }
        }
        return out;
    }

    const FREE: usize = usize::MAX;
    let mut u = vec![0.0f64; rows]; // row potentials
    let mut v = vec![0.0f64; cols + 1]; // col potentials; [0] is the virtual column
    let mut matched_row = vec![FREE; cols + 1]; // 1-based columns

    for start in 0..rows {
        matched_row[0] = start;
        let mut j0 = 0usize;
        let mut min_to = vec![f64::INFINITY; cols + 1];
        let mut prev = vec![0usize; cols + 1];
        let mut used = vec![false; cols + 1];
        // Grow the alternating tree column by column until a free column is
        // reached (augmenting path found) or no finite edge remains.
        let reached_free = loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0][j - 1] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    prev[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                break false;
            }
            for j in 0..=cols {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == FREE {
                break true;
            }
        };
        if reached_free {
            loop {
                let j1 = prev[j0];
                matched_row[j0] = matched_row[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        matched_row[0] = FREE;
    }

    let mut out = vec![None; rows];
    for j in 1..=cols {
        if matched_row[j] != FREE {
            out[matched_row[j]] = Some(j - 1);
        }
    }
    out
}

/// Total cost of a matching (for tests and diagnostics).
pub fn total_cost(cost: &[Vec<f64>], matching: &[Option<usize>]) -> f64 {
    matching
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[r][c]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive minimum over all injective row→column maps.
    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            // A row may also stay unmatched when everything is forbidden,
            // but for the finite matrices used here some column always works.
            for c in 0..cost[row].len() {
                if !used[c] && cost[row][c].is_finite() {
                    used[c] = true;
                    let rest = go(cost, row + 1, used);
                    used[c] = false;
                    best = best.min(cost[row][c] + rest);
                }
            }
            best
        }
        go(cost, 0, &mut vec![false; cost[0].len()])
    }

    #[test]
    fn single_cell() {
        assert_eq!(assign(&[vec![3.5]]), vec![Some(0)]);
    }

    #[test]
    fn two_by_two_prefers_the_diagonal() {
        let cost = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let m = assign(&cost);
        assert_eq!(m, vec![Some(0), Some(1)]);
        assert_eq!(total_cost(&cost, &m), 2.0);
    }

    #[test]
    fn matches_brute_force_on_random_square_matrices() {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=6);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..100) as f64).collect())
                .collect();
            let m = assign(&cost);
            assert!(m.iter().all(|c| c.is_some()), "seed {seed}: unmatched row");
            let mut cols: Vec<usize> = m.iter().map(|c| c.unwrap()).collect();
            cols.sort_unstable();
            cols.dedup();
            assert_eq!(cols.len(), n, "seed {seed}: duplicate column");
            let total = total_cost(&cost, &m);
            let want = brute_force(&cost);
            assert_eq!(total, want, "seed {seed}: {total} vs {want}\n{cost:?}");
        }
    }

    #[test]
    fn rectangular_matches_every_row() {
        for seed in 100..140u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.gen_range(2..=5);
            let c = rng.gen_range(r..=7);
            // Integer costs keep both optimal totals exactly representable
            // regardless of summation order.
            let cost: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(0..500) as f64).collect())
                .collect();
            let m = assign(&cost);
            assert!(m.iter().all(|x| x.is_some()));
            assert_eq!(total_cost(&cost, &m), brute_force(&cost), "seed {seed}");
        }
    }

    #[test]
    fn more_rows_than_columns_matches_every_column() {
        let cost = vec![vec![1.0, 10.0], vec![2.0, 1.0], vec![3.0, 5.0]];
        let m = assign(&cost);
        assert_eq!(m, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn forbidden_row_stays_unmatched() {
        let inf = f64::INFINITY;
        let m = assign(&[vec![inf, inf], vec![1.0, 2.0]]);
        assert_eq!(m, vec![None, Some(0)]);
    }

    #[test]
    fn forbidden_column_is_never_matched() {
        let inf = f64::INFINITY;
        let m = assign(&[vec![1.0, inf], vec![2.0, inf]]);
        assert_eq!(m, vec![Some(0), None]);
    }

    #[test]
    fn forbidden_edges_force_the_detour() {
        // Cheap diagonal is blocked; the solver must take the expensive
        // anti-diagonal rather than matching a forbidden edge.
        let inf = f64::INFINITY;
        let cost = vec![vec![inf, 5.0], vec![4.0, inf]];
        assert_eq!(assign(&cost), vec![Some(1), Some(0)]);
    }

    #[test]
    fn never_beaten_by_greedy_row_order_assignment() {
        for seed in 200..260u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.gen_range(2..=6);
            let c = rng.gen_range(2..=6);
            let cost: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(0.0..20.0)).collect())
                .collect();
            let m = assign(&cost);
            let mut greedy_total = 0.0;
            let mut taken = vec![false; c];
            for row in &cost {
                let mut best: Option<(f64, usize)> = None;
                for (j, &x) in row.iter().enumerate() {
                    if !taken[j] && best.map_or(true, |(b, _)| x < b) {
                        best = Some((x, j));
                    }
                }
                if let Some((x, j)) = best {
                    taken[j] = true;
                    greedy_total += x;
                }
            }
            assert!(
                total_cost(&cost, &m) <= greedy_total + 1e-9,
                "seed {seed}: optimal worse than greedy"
            );
        }
    }
}
