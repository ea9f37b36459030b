//! Transportation simplex (MODI / stepping-stone) on a dense cost matrix.
//!
//! The basis is a spanning tree of the bipartite supply/demand graph with
//! exactly `m + n - 1` cells, degenerate zero-flow cells included. Each
//! iteration recomputes the dual potentials on the tree, prices every
//! nonbasic cell and pivots around the unique tree cycle of the entering cell.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Cell {
    r: usize,
    c: usize,
    flow: f64,
}

/// Returns the optimal flow matrix (row-major `m × n`).
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Vec<f64>> {
    let m = supply.len();
    let n = demand.len();
    debug_assert_eq!(cost.len(), m * n);
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("empty transport marginal".into()));
    }

    let mut basis = northwest_corner(supply, demand);
    let mut is_basic = vec![false; m * n];
    for cell in &basis {
        is_basic[cell.r * n + cell.c] = true;
    }

    let scale = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let tol = 1e-12 * scale;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut degenerate_run = 0usize;
    let max_iter = 200 * (m + n) * (m + n) + 1000;

    for _ in 0..max_iter {
        potentials(&basis, m, n, cost, &mut u, &mut v);

        // Dantzig pricing; after a long run of degenerate pivots fall back
        // to first-improving pricing to break stalling.
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for r in 0..m {
            for c in 0..n {
                if is_basic[r * n + c] {
                    continue;
                }
                let red = cost[r * n + c] - u[r] - v[c];
                if red < -tol && entering.is_none_or(|(_, _, best)| red < best) {
                    entering = Some((r, c, red));
                    if degenerate_run > 50 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((er, ec, _)) = entering else {
            let mut flow = vec![0.0; m * n];
            for cell in &basis {
                flow[cell.r * n + cell.c] = cell.flow.max(0.0);
            }
            return Ok(flow);
        };

        let path = tree_path(&basis, m, n, er, ec);
        // Edges along the path from the entering row to the entering column
        // alternate −, +, −, ...; both end edges lose flow.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &bi) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = basis[bi].flow;
                if f < theta || (f == theta && bi < leave) {
                    theta = f;
                    leave = bi;
                }
            }
        }
        for (k, &bi) in path.iter().enumerate() {
            if k % 2 == 0 {
                basis[bi].flow -= theta;
            } else {
                basis[bi].flow += theta;
            }
        }
        degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };
        let old = basis[leave];
        is_basic[old.r * n + old.c] = false;
        basis[leave] = Cell { r: er, c: ec, flow: theta };
        is_basic[er * n + ec] = true;
    }
    Err(Error::Internal("transportation simplex did not terminate".into()))
}

fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<Cell> {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]).max(0.0);
        cells.push(Cell { r: i, c: j, flow: x });
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

fn potentials(basis: &[Cell], m: usize, n: usize, cost: &[f64], u: &mut [f64], v: &mut [f64]) {
    let mut row_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut col_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, cell) in basis.iter().enumerate() {
        row_adj[cell.r].push(k);
        col_adj[cell.c].push(k);
    }
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    row_done[0] = true;
    queue.push_back((true, 0usize));
    while let Some((is_row, idx)) = queue.pop_front() {
        if is_row {
            for &k in &row_adj[idx] {
                let c = basis[k].c;
                if !col_done[c] {
                    v[c] = cost[idx * n + c] - u[idx];
                    col_done[c] = true;
                    queue.push_back((false, c));
                }
            }
        } else {
            for &k in &col_adj[idx] {
                let r = basis[k].r;
                if !row_done[r] {
                    u[r] = cost[r * n + idx] - v[idx];
                    row_done[r] = true;
                    queue.push_back((true, r));
                }
            }
        }
    }
}

/// Basis indices of the tree path from row node `r0` to column node `c0`,
/// ordered starting at the edge incident to `r0`.
fn tree_path(basis: &[Cell], m: usize, n: usize, r0: usize, c0: usize) -> Vec<usize> {
    // Nodes: rows 0..m, columns m..m+n.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    for (k, cell) in basis.iter().enumerate() {
        adj[cell.r].push((m + cell.c, k));
        adj[m + cell.c].push((cell.r, k));
    }
    let target = m + c0;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::new();
    seen[r0] = true;
    queue.push_back(r0);
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for &(next, k) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, k));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = target;
    while node != r0 {
        let (prev, k) = parent[node].expect("basis spans all nodes");
        path.push(k);
        node = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn northwest_corner_has_tree_size() {
        let cells = northwest_corner(&[0.5, 0.5], &[0.5, 0.25, 0.25]);
        assert_eq!(cells.len(), 4);
        let total: f64 = cells.iter().map(|c| c.flow).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classic_instance() {
        // Supplies 20, 30, 25 / demands 10, 35, 30 (scaled to unit mass).
        let s: Vec<f64> = [20.0, 30.0, 25.0].iter().map(|x| x / 75.0).collect();
        let d: Vec<f64> = [10.0, 35.0, 30.0].iter().map(|x| x / 75.0).collect();
        let cost = [8.0, 6.0, 10.0, 9.0, 12.0, 13.0, 14.0, 9.0, 16.0];
        let flow = solve(&s, &d, &cost).unwrap();
        let total: f64 = flow.iter().zip(&cost).map(|(f, c)| f * c).sum();
        for r in 0..3 {
            let row: f64 = (0..3).map(|c| flow[r * 3 + c]).sum();
            assert!((row - s[r]).abs() < 1e-12);
        }
        for c in 0..3 {
            let col: f64 = (0..3).map(|r| flow[r * 3 + c]).sum();
            assert!((col - d[c]).abs() < 1e-12);
        }
        // 735 / 75
        assert!((total - 9.8).abs() < 1e-12);
    }
}
