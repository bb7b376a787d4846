//! Exact linear assignment by shortest augmenting paths (the
//! Jonker-Volgenant / Hungarian family), O(n^3) over dense f64 costs.
//!
//! Ties on reduced costs break toward the lowest column index (the forward
//! scan keeps the first minimizer), so the solution is deterministic.

/// Minimum-cost perfect matching on a dense n x n cost matrix (row-major).
/// Returns (assignment, total cost) where `assignment[i]` is the column
/// matched to row i.
pub fn solve(costs: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(costs.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return (Vec::new(), 0.0);
    }

    let inf = f64::INFINITY;
    // potentials and matching over 1-based columns; p[j] = row matched to j
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];

        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;

            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }

            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * n + j])
        .sum();
    (assignment, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_integer_instance() {
        let costs = vec![4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (assignment, total) = solve(&costs, 3);
        assert_eq!(assignment.len(), 3);
        assert_eq!(total, 5.0);
    }

    #[test]
    fn identity_is_optimal_on_diagonally_dominant_costs() {
        let n = 5;
        let mut costs = vec![10.0; n * n];
        for i in 0..n {
            costs[i * n + i] = 0.0;
        }
        let (assignment, total) = solve(&costs, n);
        assert_eq!(total, 0.0);
        for (i, j) in assignment.iter().enumerate() {
            assert_eq!(i, *j);
        }
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let stream = crate::rng::CounterStream::new(100, 0);
        for trial in 0..100u64 {
            let n = 2 + (stream.at(1000 + trial) % 5) as usize; // 2..=6
            let sub = stream.substream(trial);
            let costs: Vec<f64> = (0..n * n).map(|i| sub.uniform(i as u64)).collect();
            let (_, total) = solve(&costs, n);
            let best = brute_force_min(&costs, n);
            assert!(
                (total - best).abs() <= 1e-12 * best.max(1.0),
                "n={n} trial {trial}: {total} vs {best}"
            );
        }
    }

    fn brute_force_min(costs: &[f64], n: usize) -> f64 {
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut cols, 0, &mut |perm| {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| costs[i * n + j]).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }
}
