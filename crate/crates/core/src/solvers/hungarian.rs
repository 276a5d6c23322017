//! O(n³) Hungarian method on integer costs, followed by a pass that moves to
//! the lexicographically smallest optimal assignment.

/// Optimal assignment minimizing `cost`; `row_to_col[i]` is row `i`'s column.
///
/// Among all optimal assignments the one with the lexicographically smallest
/// `row_to_col` is returned.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based potentials and matching, column 0 is the virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
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
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| cost[i][j] - u[i + 1] - v[j + 1] == 0).collect())
        .collect();
    lexicographic_refine(&tight, row_to_col)
}

/// Rewrites a perfect matching of the tight graph into the lexicographically
/// smallest one, fixing rows in order.
fn lexicographic_refine(tight: &[Vec<bool>], mut row_to_col: Vec<usize>) -> Vec<usize> {
    let n = tight.len();
    let mut col_owner = vec![0usize; n];
    for (i, &j) in row_to_col.iter().enumerate() {
        col_owner[j] = i;
    }
    for i in 0..n {
        let target = row_to_col[i];
        // rows (other than i, unfrozen) from which an alternating path reaches `target`
        let mut reach = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for r in i + 1..n {
            if tight[r][target] {
                reach[r] = true;
                stack.push(r);
            }
        }
        while let Some(r) = stack.pop() {
            // a row q reaches r if q has a tight edge into r's column
            let col = row_to_col[r];
            for q in i + 1..n {
                if !reach[q] && tight[q][col] {
                    reach[q] = true;
                    stack.push(q);
                }
            }
        }
        let better = (0..target).find(|&j| tight[i][j] && col_owner[j] > i && reach[col_owner[j]]);
        if let Some(j) = better {
            // BFS from the owner of j to a row adjacent to `target`
            let start = col_owner[j];
            let mut parent: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut queue = std::collections::VecDeque::from([start]);
            let mut end = None;
            while let Some(r) = queue.pop_front() {
                if tight[r][target] {
                    end = Some(r);
                    break;
                }
                for c in 0..n {
                    if c == j || c == target || !tight[r][c] {
                        continue;
                    }
                    let q = col_owner[c];
                    if q <= i || seen[q] {
                        continue;
                    }
                    seen[q] = true;
                    parent[q] = Some(r);
                    queue.push_back(q);
                }
            }
            let mut r = end.expect("reachability was established");
            let mut next_col = target;
            loop {
                let old = row_to_col[r];
                row_to_col[r] = next_col;
                col_owner[next_col] = r;
                next_col = old;
                match parent[r] {
                    Some(p) => r = p,
                    None => break,
                }
            }
            debug_assert_eq!(next_col, j);
            row_to_col[i] = j;
            col_owner[j] = i;
        }
    }
    row_to_col
}
