//! Fill-reducing orderings.
//!
//! Nested dissection with level-structure separators: a BFS rooted at a
//! pseudo-peripheral vertex splits each connected piece at its thinnest
//! middle level; the two halves are ordered recursively and the separator
//! goes last.

use std::collections::VecDeque;

const LEAF_SIZE: usize = 64;
const UNVISITED: usize = usize::MAX;

/// Returns `perm` with `perm[k]` = original index eliminated k-th.
///
/// `ptr`/`adj` is a symmetric adjacency structure without self loops.
pub fn nested_dissection(ptr: &[usize], adj: &[usize]) -> Vec<usize> {
    let n = ptr.len() - 1;
    let mut part = vec![0u32; n];
    let mut next_label = 1u32;
    let mut order = Vec::with_capacity(n);
    let mut level = vec![UNVISITED; n];
    let mut queue = VecDeque::new();

    // Stack entries: (label, vertices, separator-to-emit-after).
    enum Task {
        Split(u32, Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split(0, (0..n).collect())];

    while let Some(task) = stack.pop() {
        let (label, verts) = match task {
            Task::Emit(sep) => {
                order.extend(sep);
                continue;
            }
            Task::Split(l, v) => (l, v),
        };
        if verts.len() <= LEAF_SIZE {
            order.extend(bfs_order(ptr, adj, &part, label, &verts, &mut level, &mut queue));
            continue;
        }
        // Split off connected components first.
        let comps = components(ptr, adj, &part, label, &verts, &mut level, &mut queue);
        if comps.len() > 1 {
            for comp in comps.into_iter().rev() {
                let l = next_label;
                next_label += 1;
                for &v in &comp {
                    part[v] = l;
                }
                stack.push(Task::Split(l, comp));
            }
            continue;
        }
        let root = pseudo_peripheral(ptr, adj, &part, label, verts[0], &mut level, &mut queue, &verts);
        let levels = bfs_levels(ptr, adj, &part, label, root, &mut level, &mut queue);
        reset(&mut level, &verts);
        if levels.len() < 3 {
            order.extend(bfs_order(ptr, adj, &part, label, &verts, &mut level, &mut queue));
            continue;
        }
        // Choose the smallest level whose cumulative count is near the middle.
        let total = verts.len();
        let mut cum = 0usize;
        let mut best: Option<(usize, usize)> = None;
        for (li, lv) in levels.iter().enumerate() {
            let before = cum;
            cum += lv.len();
            if li == 0 || li + 1 == levels.len() {
                continue;
            }
            let lo = before as f64 / total as f64;
            let hi = (total - cum) as f64 / total as f64;
            if lo >= 0.3 && hi >= 0.3 {
                let cand = (lv.len(), li);
                best = Some(match best {
                    Some(b) if b.0 <= cand.0 => b,
                    _ => cand,
                });
            }
        }
        let sep_level = match best {
            Some((_, li)) => li,
            None => {
                // Fall back to the median level.
                let mut c = 0;
                let mut pick = 1;
                for (li, lv) in levels.iter().enumerate() {
                    c += lv.len();
                    if 2 * c >= total {
                        pick = li.clamp(1, levels.len() - 2);
                        break;
                    }
                }
                pick
            }
        };
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (li, lv) in levels.iter().enumerate() {
            if li < sep_level {
                left.extend_from_slice(lv);
            } else if li > sep_level {
                right.extend_from_slice(lv);
            }
        }
        let sep = levels[sep_level].clone();
        let (l1, l2) = (next_label, next_label + 1);
        next_label += 2;
        for &v in &left {
            part[v] = l1;
        }
        for &v in &right {
            part[v] = l2;
        }
        for &v in &sep {
            part[v] = u32::MAX;
        }
        stack.push(Task::Emit(sep));
        stack.push(Task::Split(l2, right));
        stack.push(Task::Split(l1, left));
    }
    debug_assert_eq!(order.len(), n);
    order
}

fn reset(level: &mut [usize], verts: &[usize]) {
    for &v in verts {
        level[v] = UNVISITED;
    }
}

fn bfs_levels(
    ptr: &[usize],
    adj: &[usize],
    part: &[u32],
    label: u32,
    root: usize,
    level: &mut [usize],
    queue: &mut VecDeque<usize>,
) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = vec![vec![root]];
    level[root] = 0;
    queue.clear();
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let lv = level[v];
        for &w in &adj[ptr[v]..ptr[v + 1]] {
            if part[w] == label && level[w] == UNVISITED {
                level[w] = lv + 1;
                if levels.len() <= lv + 1 {
                    levels.push(Vec::new());
                }
                levels[lv + 1].push(w);
                queue.push_back(w);
            }
        }
    }
    levels
}

#[allow(clippy::too_many_arguments)]
fn pseudo_peripheral(
    ptr: &[usize],
    adj: &[usize],
    part: &[u32],
    label: u32,
    start: usize,
    level: &mut [usize],
    queue: &mut VecDeque<usize>,
    verts: &[usize],
) -> usize {
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(ptr, adj, part, label, root, level, queue);
        reset(level, verts);
        let depth = levels.len() - 1;
        if depth <= ecc && root != start {
            break;
        }
        ecc = depth;
        // Lowest-degree vertex of the last level.
        let last = levels.last().unwrap();
        let cand = *last
            .iter()
            .min_by_key(|&&v| (ptr[v + 1] - ptr[v], v))
            .unwrap();
        if cand == root {
            break;
        }
        root = cand;
    }
    root
}

fn components(
    ptr: &[usize],
    adj: &[usize],
    part: &[u32],
    label: u32,
    verts: &[usize],
    level: &mut [usize],
    queue: &mut VecDeque<usize>,
) -> Vec<Vec<usize>> {
    let mut comps = Vec::new();
    for &s in verts {
        if level[s] != UNVISITED {
            continue;
        }
        let lv = bfs_levels(ptr, adj, part, label, s, level, queue);
        comps.push(lv.concat());
    }
    reset(level, verts);
    comps
}

fn bfs_order(
    ptr: &[usize],
    adj: &[usize],
    part: &[u32],
    label: u32,
    verts: &[usize],
    level: &mut [usize],
    queue: &mut VecDeque<usize>,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(verts.len());
    for &s in verts {
        if level[s] != UNVISITED {
            continue;
        }
        let lv = bfs_levels(ptr, adj, part, label, s, level, queue);
        out.extend(lv.into_iter().flatten());
    }
    reset(level, verts);
    out
}
