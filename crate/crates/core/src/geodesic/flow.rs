//! Minimum-weight vertex cover of a bipartite graph via max-flow.

/// Capacities below this are treated as saturated.
const RESIDUAL_EPS: f64 = 1e-15;

/// Minimum-weight vertex cover of the bipartite graph whose edges are given by
/// `adj[i]`, a bitmask over right-hand vertices adjacent to left vertex `i`.
///
/// Returns `(weight, left_in_cover, right_in_cover)` with the cover pruned to
/// be inclusion-minimal.
pub(crate) fn min_vertex_cover(left: &[f64], right: &[f64], adj: &[u64]) -> (f64, Vec<bool>, Vec<bool>) {
    let m = left.len();
    let n = right.len();
    let size = m + n + 2;
    let s = m + n;
    let t = s + 1;
    let mut cap = vec![0.0f64; size * size];
    for (i, &w) in left.iter().enumerate() {
        cap[s * size + i] = w;
        let mut bits = adj[i];
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            cap[i * size + m + j] = f64::INFINITY;
        }
    }
    for (j, &w) in right.iter().enumerate() {
        cap[(m + j) * size + t] = w;
    }

    let mut flow = 0.0;
    let mut prev = vec![usize::MAX; size];
    let mut queue = Vec::with_capacity(size);
    loop {
        prev.iter_mut().for_each(|p| *p = usize::MAX);
        prev[s] = s;
        queue.clear();
        queue.push(s);
        let mut head = 0;
        while head < queue.len() && prev[t] == usize::MAX {
            let u = queue[head];
            head += 1;
            for v in 0..size {
                if prev[v] == usize::MAX && cap[u * size + v] > RESIDUAL_EPS {
                    prev[v] = u;
                    queue.push(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v];
            bottleneck = bottleneck.min(cap[u * size + v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            cap[u * size + v] -= bottleneck;
            cap[v * size + u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }

    // Min cut: source side is whatever the last BFS reached.
    let reached: Vec<bool> = prev.iter().map(|&p| p != usize::MAX).collect();
    let mut in_left: Vec<bool> = (0..m).map(|i| !reached[i]).collect();
    let mut in_right: Vec<bool> = (0..n).map(|j| reached[m + j]).collect();

    // Drop redundant vertices, heaviest first, so ties cannot leave extras.
    let mut order: Vec<(f64, bool, usize)> = (0..m)
        .filter(|&i| in_left[i])
        .map(|i| (left[i], true, i))
        .chain((0..n).filter(|&j| in_right[j]).map(|j| (right[j], false, j)))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, is_left, k) in order {
        if is_left {
            let uncovered = adj[k] & !mask_of(&in_right);
            if uncovered == 0 {
                in_left[k] = false;
            }
        } else {
            let needed = (0..m).any(|i| !in_left[i] && adj[i] >> k & 1 == 1);
            if !needed {
                in_right[k] = false;
            }
        }
    }
    let weight = (0..m).filter(|&i| in_left[i]).map(|i| left[i]).sum::<f64>()
        + (0..n).filter(|&j| in_right[j]).map(|j| right[j]).sum::<f64>();
    debug_assert!(weight <= flow + 1e-9 || flow.is_nan());
    (weight, in_left, in_right)
}

fn mask_of(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |m, (j, _)| m | 1u64 << j)
}
