//! Minimum covers by closed balls of radius `t`.
//!
//! A group of points fits in one ball when its minimum enclosing ball has
//! radius at most `t`. Centers are unrestricted for coordinate spaces; an
//! explicit distance matrix has no ambient space, so centers are then taken
//! among its own points.

use std::collections::HashMap;

use crate::metric::{Metric, PointSet};
use crate::TOL;

/// Whether the points of `mask` fit in one closed ball of radius `t`.
pub struct GroupTest<'a> {
    space: &'a PointSet,
    t: f64,
    memo: HashMap<u64, bool>,
}

impl<'a> GroupTest<'a> {
    pub fn new(space: &'a PointSet, t: f64) -> Self {
        GroupTest {
            space,
            t,
            memo: HashMap::new(),
        }
    }

    fn members(&self, mask: u64) -> Vec<usize> {
        (0..self.space.len()).filter(|&i| mask >> i & 1 == 1).collect()
    }

    pub fn fits(&mut self, mask: u64) -> bool {
        if mask.count_ones() <= 1 {
            return true;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        let v = self.decide(mask);
        self.memo.insert(mask, v);
        v
    }

    fn decide(&self, mask: u64) -> bool {
        let m = self.members(mask);
        let t = self.t;
        let s = self.space;
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                if s.dist(i, j) > 2.0 * t {
                    return false;
                }
            }
        }
        if (0..s.len()).any(|c| m.iter().all(|&i| s.dist(c, i) <= t + TOL)) {
            return true;
        }
        match (s.metric(), s.dim()) {
            (None, _) => false,
            (Some(Metric::Wrap1d), _) => {
                let pts: Vec<f64> = m.iter().map(|&i| s.point(i).unwrap()[0]).collect();
                arc_radius(&pts) <= t + TOL
            }
            (Some(Metric::Chebyshev), Some(d)) | (Some(Metric::Euclidean), Some(d @ 1)) => {
                (0..d).all(|k| {
                    let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &i| {
                        let x = s.point(i).unwrap()[k];
                        (acc.0.min(x), acc.1.max(x))
                    });
                    (hi - lo) / 2.0 <= t + TOL
                })
            }
            (Some(Metric::Euclidean), Some(_)) => {
                let pts: Vec<&[f64]> = m.iter().map(|&i| s.point(i).unwrap()).collect();
                euclidean_fits(&pts, t)
            }
            (Some(_), None) => false,
        }
    }
}

/// Radius of the shortest arc of the unit circle containing all positions.
pub fn arc_radius(pts: &[f64]) -> f64 {
    let mut p: Vec<f64> = pts.iter().map(|x| x.rem_euclid(1.0)).collect();
    p.sort_by(f64::total_cmp);
    let mut gap = 1.0 - (p[p.len() - 1] - p[0]);
    for w in p.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    ((1.0 - gap) / 2.0).min(0.5)
}

/// Center of the smallest ball with all of `support` on its boundary and
/// its center in their affine hull; `None` when affinely dependent.
pub fn circumcenter(support: &[&[f64]]) -> Option<Vec<f64>> {
    let p0 = support[0];
    let k = support.len() - 1;
    if k == 0 {
        return Some(p0.to_vec());
    }
    let v: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // 2 G lambda = |v_i|^2
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| 2.0 * dot(&v[i], &v[j])).collect();
            row.push(dot(&v[i], &v[i]));
            row
        })
        .collect();
    let scale = a.iter().map(|r| r[..k].iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(0.0, f64::max);
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let lambda: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
    let mut c = p0.to_vec();
    for (l, vi) in lambda.iter().zip(&v) {
        for (ck, x) in c.iter_mut().zip(vi) {
            *ck += l * x;
        }
    }
    Some(c)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    Metric::Euclidean.dist(a, b)
}

/// Decides `meb(pts) <= t` by trying every support set of at most `d + 1`
/// points; the enclosing ball is the circumball of one of them.
pub fn euclidean_fits(pts: &[&[f64]], t: f64) -> bool {
    let d = pts[0].len();
    let n = pts.len();
    let mut idx: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        left: usize,
        idx: &mut Vec<usize>,
        pts: &[&[f64]],
        t: f64,
    ) -> bool {
        if !idx.is_empty() {
            let support: Vec<&[f64]> = idx.iter().map(|&i| pts[i]).collect();
            if let Some(c) = circumcenter(&support) {
                let r = euclid(&c, support[0]);
                if r <= t + TOL && pts.iter().all(|p| euclid(&c, p) <= t + TOL) {
                    return true;
                }
            }
        }
        if left == 0 {
            return false;
        }
        for i in start..pts.len() {
            idx.push(i);
            if rec(i + 1, left - 1, idx, pts, t) {
                return true;
            }
            idx.pop();
        }
        false
    }
    rec(0, (d + 1).min(n), &mut idx, pts, t)
}

/// Exact minimum number of balls, by assigning points to groups in order.
pub fn min_cover(space: &PointSet, t: f64, upper: usize) -> usize {
    let n = space.len();
    let mut test = GroupTest::new(space, t);
    let mut best = upper;
    let mut groups: Vec<u64> = Vec::new();
    fn rec(i: usize, n: usize, groups: &mut Vec<u64>, best: &mut usize, test: &mut GroupTest) {
        if groups.len() >= *best {
            return;
        }
        if i == n {
            *best = groups.len();
            return;
        }
        for g in 0..groups.len() {
            let m = groups[g] | 1u64 << i;
            if test.fits(m) {
                let old = groups[g];
                groups[g] = m;
                rec(i + 1, n, groups, best, test);
                groups[g] = old;
            }
        }
        if groups.len() + 1 < *best {
            groups.push(1u64 << i);
            rec(i + 1, n, groups, best, test);
            groups.pop();
        }
    }
    rec(0, n, &mut groups, &mut best, &mut test);
    best
}

/// Greedy set cover with balls centered at the points themselves.
pub fn greedy_cover(space: &PointSet, t: f64) -> usize {
    let n = space.len();
    let mut covered = vec![false; n];
    let mut left = n;
    let mut count = 0;
    while left > 0 {
        let (c, _) = (0..n)
            .map(|c| {
                let gain = (0..n)
                    .filter(|&i| !covered[i] && space.dist(c, i) <= t + TOL)
                    .count();
                (c, gain)
            })
            .fold((0, 0), |best, x| if x.1 > best.1 { x } else { best });
        for i in 0..n {
            if !covered[i] && space.dist(c, i) <= t + TOL {
                covered[i] = true;
                left -= 1;
            }
        }
        count += 1;
    }
    count
}
