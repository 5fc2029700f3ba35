//! Hungarian method (shortest augmenting path with potentials) for rectangular weight matrices.

/// Maximum-weight assignment of rows to columns.
///
/// The matrix is padded to square with zero weight. Returns the total weight and, for each row,
/// the assigned column (or `None` when the row landed on a padding column).
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = weights.len();
    if rows == 0 {
        return (0.0, Vec::new());
    }
    let cols = weights[0].len();
    assert!(weights.iter().all(|r| r.len() == cols), "ragged weight matrix");
    let n = rows.max(cols);
    let max_w = weights
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::max);
    // Minimize max_w - w to keep every cost non-negative; padding gets weight 0.
    let cost = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            max_w - weights[r][c]
        } else {
            max_w
        }
    };

    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for r in 1..=n {
        row_of_col[0] = r;
        let mut col = 0usize;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col] = true;
            let r0 = row_of_col[col];
            let mut delta = f64::INFINITY;
            let mut next_col = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost(r0 - 1, c - 1) - u[r0] - v[c];
                if reduced < min_v[c] {
                    min_v[c] = reduced;
                    way[c] = col;
                }
                if min_v[c] < delta {
                    delta = min_v[c];
                    next_col = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_v[c] -= delta;
                }
            }
            col = next_col;
            if row_of_col[col] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col];
            row_of_col[col] = row_of_col[prev];
            col = prev;
            if col == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = 0.0;
    for c in 1..=n {
        let r = row_of_col[c];
        if r >= 1 && r <= rows && c <= cols {
            assignment[r - 1] = Some(c - 1);
            total += weights[r - 1][c - 1];
        }
    }
    (total, assignment)
}
