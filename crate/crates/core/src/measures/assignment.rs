//! Exact maximum-weight partial assignment with deterministic tie-breaking.
//!
//! Weights are integers so optimal values compare exactly. `None` marks a
//! forbidden pair; every source may instead stay unassigned at weight 0.

/// Minimum-cost assignment of every row to a distinct column (Hungarian
/// method with potentials, O(n²m)). Requires `rows <= cols`.
fn hungarian(cost: &[Vec<i128>], cols: usize) -> (i128, Vec<usize>) {
    let n = cost.len();
    debug_assert!(n <= cols);
    const INF: i128 = i128::MAX / 4;
    // 1-based with a virtual column 0
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; cols + 1];
    let mut row_of = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=cols {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| cost[i][col_of[i]]).sum();
    (total, col_of)
}

/// Best total weight when `rows` pick distinct targets among `cols`.
fn best_value(weights: &[Vec<Option<i128>>], rows: &[usize], cols: &[usize]) -> i128 {
    let rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| cols.iter().any(|&c| weights[r][c].is_some()))
        .collect();
    if rows.is_empty() {
        return 0;
    }
    let cols: Vec<usize> = cols
        .iter()
        .copied()
        .filter(|&c| rows.iter().any(|&r| weights[r][c].is_some()))
        .collect();
    // one private "unassigned" column per row
    let width = cols.len() + rows.len();
    let cost: Vec<Vec<i128>> = rows
        .iter()
        .map(|&r| {
            let mut row: Vec<i128> = cols
                .iter()
                .map(|&c| weights[r][c].map_or(1, |w| -w))
                .collect();
            row.extend(std::iter::repeat_n(0, rows.len()));
            row
        })
        .collect();
    -hungarian(&cost, width).0
}

/// Maximum-weight injective partial assignment of sources to targets.
///
/// Among optimal assignments, returns the lexicographically smallest vector
/// of targets in source order, with "unassigned" ordered after every target.
pub fn max_weight_assignment(weights: &[Vec<Option<i128>>], targets: usize) -> Vec<Option<usize>> {
    let n = weights.len();
    let all_rows: Vec<usize> = (0..n).collect();
    let all_cols: Vec<usize> = (0..targets).collect();
    let optimum = best_value(weights, &all_rows, &all_cols);

    let mut taken = vec![false; targets];
    let mut fixed_value: i128 = 0;
    let mut out = vec![None; n];
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let candidates: Vec<usize> = (0..targets)
            .filter(|&t| !taken[t] && weights[i][t].is_some())
            .collect();
        let mut chosen = None;
        for &t in &candidates {
            let free: Vec<usize> = (0..targets).filter(|&c| !taken[c] && c != t).collect();
            let w = weights[i][t].unwrap_or(0);
            if fixed_value + w + best_value(weights, &rest, &free) == optimum {
                chosen = Some((t, w));
                break;
            }
        }
        if let Some((t, w)) = chosen {
            taken[t] = true;
            fixed_value += w;
            out[i] = Some(t);
        }
    }
    debug_assert_eq!(fixed_value, optimum);
    out
}
