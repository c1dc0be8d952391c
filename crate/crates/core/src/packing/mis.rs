//! Maximum independent set by branch-and-bound.
//!
//! The search looks for a maximum clique of the compatibility graph (pairs at
//! distance `> t`) with the greedy-coloring bound. Vertices are relabelled by
//! decreasing conflict degree and the incumbent starts from the greedy
//! farthest-point set.

/// Maximum vertex count handled by the bitset search.
pub const MAX_VERTICES: usize = 128;

struct Search {
    compat: Vec<u128>,
    best: usize,
}

impl Search {
    fn color_order(&self, mut p: u128) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(p.count_ones() as usize);
        let mut color = 0;
        while p != 0 {
            color += 1;
            let mut q = p;
            while q != 0 {
                let v = q.trailing_zeros() as usize;
                q &= !(1u128 << v);
                q &= !self.compat[v];
                p &= !(1u128 << v);
                out.push((v, color));
            }
        }
        out
    }

    fn expand(&mut self, size: usize, mut p: u128) {
        let order = self.color_order(p);
        for &(v, color) in order.iter().rev() {
            if size + color <= self.best {
                return;
            }
            let np = p & self.compat[v];
            if np == 0 {
                self.best = self.best.max(size + 1);
            } else {
                self.expand(size + 1, np);
            }
            p &= !(1u128 << v);
        }
    }
}

/// Size of a maximum independent set of the conflict graph.
///
/// `conflict(i, j)` is queried for `i < j`; `lower` must be the size of some
/// independent set.
pub fn max_independent(n: usize, conflict: impl Fn(usize, usize) -> bool, lower: usize) -> usize {
    assert!(n <= MAX_VERTICES);
    if n == 0 {
        return 0;
    }
    let mut c = vec![vec![false; n]; n];
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if conflict(i, j) {
                c[i][j] = true;
                c[j][i] = true;
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let mut compat = vec![0u128; n];
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            if a != b && !c[i][j] {
                compat[a] |= 1u128 << b;
            }
        }
    }
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut s = Search {
        compat,
        best: lower.max(1),
    };
    s.expand(0, all);
    s.best
}
