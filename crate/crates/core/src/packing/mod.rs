//! Packing numbers `M(B, t)`, covering numbers `N(B, t)` and packing profiles.
//!
//! Two points are separated at scale `t` when their distance is strictly
//! greater than `t`; a pair at distance exactly `t` conflicts.

pub mod cover;
pub mod mis;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::metric::PointSet;

pub const DEFAULT_PACKING_CAP: usize = 64;
pub const DEFAULT_COVERING_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingMode {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    Exact,
    UpperBound,
}

/// Size limits of the exact modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub packing: usize,
    pub covering: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            packing: DEFAULT_PACKING_CAP,
            covering: DEFAULT_COVERING_CAP,
        }
    }
}

impl Caps {
    pub fn validate(&self) -> Result<()> {
        if self.packing == 0 || self.packing > mis::MAX_VERTICES {
            return arg(format!(
                "packing cap must lie in 1..={}, got {}",
                mis::MAX_VERTICES,
                self.packing
            ));
        }
        if self.covering == 0 || self.covering > 64 {
            return arg(format!("covering cap must lie in 1..=64, got {}", self.covering));
        }
        Ok(())
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return arg(format!("scale t must be positive and finite, got {t}"));
    }
    Ok(())
}

fn capacity(what: &'static str, count: usize, cap: usize) -> Error {
    Error::Capacity {
        what,
        count: count as u128,
        cap: cap as u128,
    }
}

/// Sorted coordinates of a line set.
fn sorted_line(b: &PointSet) -> Option<Vec<f64>> {
    if !b.is_line() {
        return None;
    }
    let mut xs = b.coords()?.to_vec();
    xs.sort_by(f64::total_cmp);
    Some(xs)
}

/// Exact packing number of sorted points on a line: the leftmost greedy
/// sweep is optimal.
pub fn line_packing(xs: &[f64], t: f64) -> usize {
    let mut count = 1;
    let mut last = xs[0];
    for &x in &xs[1..] {
        if x - last > t {
            count += 1;
            last = x;
        }
    }
    count
}

/// Index of the lexicographically smallest point (index 0 for matrices).
fn lex_first(b: &PointSet) -> usize {
    if b.dim().is_none() {
        return 0;
    }
    (1..b.len()).fold(0, |best, i| {
        let (p, q) = (b.point(i).unwrap(), b.point(best).unwrap());
        let less = p
            .iter()
            .zip(q)
            .find(|(x, y)| x != y)
            .is_some_and(|(x, y)| x < y);
        if less {
            i
        } else {
            best
        }
    })
}

/// Greedy farthest-point `t`-separated set, started at the smallest point.
pub fn greedy_separated(b: &PointSet, t: f64) -> Vec<usize> {
    let n = b.len();
    let start = lex_first(b);
    let mut chosen = vec![start];
    let mut gap: Vec<f64> = (0..n).map(|i| b.dist(start, i)).collect();
    loop {
        let mut pick = None;
        let mut far = t;
        for (i, &g) in gap.iter().enumerate() {
            if g > far {
                far = g;
                pick = Some(i);
            }
        }
        let Some(p) = pick else { break };
        chosen.push(p);
        for (i, g) in gap.iter_mut().enumerate() {
            *g = g.min(b.dist(p, i));
        }
    }
    chosen
}

fn exact_packing(b: &PointSet, t: f64, cap: usize) -> Result<usize> {
    if let Some(xs) = sorted_line(b) {
        return Ok(line_packing(&xs, t));
    }
    let n = b.len();
    if n > cap {
        return Err(capacity("exact packing", n, cap));
    }
    let lower = greedy_separated(b, t).len();
    Ok(mis::max_independent(n, |i, j| b.dist(i, j) <= t, lower))
}

/// `M(B, t)`: the largest subset with pairwise distances strictly above `t`.
///
/// Sets on a line are solved exactly at any size; other sets need
/// `|B| <= cap` in exact mode.
pub fn packing_number(b: &PointSet, t: f64, mode: PackingMode, cap: usize) -> Result<usize> {
    check_t(t)?;
    match mode {
        PackingMode::Exact => exact_packing(b, t, cap),
        PackingMode::LowerBound => Ok(greedy_separated(b, t).len()),
    }
}

/// `N(B, t)`: the fewest closed balls of radius `t` covering `B`.
pub fn covering_number(b: &PointSet, t: f64, mode: CoverMode, cap: usize) -> Result<usize> {
    check_t(t)?;
    let upper = cover::greedy_cover(b, t);
    match mode {
        CoverMode::UpperBound => Ok(upper),
        CoverMode::Exact => {
            let n = b.len();
            if n > cap.min(64) {
                return Err(capacity("exact covering", n, cap.min(64)));
            }
            Ok(cover::min_cover(b, t, upper))
        }
    }
}

/// Checks `M(B, 2t) <= N(B, t) <= M(B, t)` on exact values.
pub fn comparison_check(b: &PointSet, t: f64, caps: Caps) -> Result<bool> {
    let m2 = packing_number(b, 2.0 * t, PackingMode::Exact, caps.packing)?;
    let n = covering_number(b, t, CoverMode::Exact, caps.covering)?;
    let m1 = packing_number(b, t, PackingMode::Exact, caps.packing)?;
    Ok(m2 <= n && n <= m1)
}

/// Right-continuous step function `t -> M(B, t)` on `(0, inf)`.
///
/// `values[0]` holds on `(0, breakpoints[0])` and `values[k]` on
/// `[breakpoints[k-1], breakpoints[k])`. Only scales where the value changes
/// are kept, so consecutive values differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingProfile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<usize>,
    pub n: usize,
}

impl PackingProfile {
    pub fn point() -> Self {
        PackingProfile {
            breakpoints: Vec::new(),
            values: vec![1],
            n: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return arg("profile needs exactly one more value than breakpoints");
        }
        if self.values[0] != self.n || *self.values.last().unwrap() != 1 {
            return arg("profile must start at n and end at 1");
        }
        if self.breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0))
            || self.breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return arg("profile breakpoints must be positive and strictly increasing");
        }
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return arg("profile values must be non-increasing");
        }
        Ok(())
    }

    /// `M(B, t)`.
    pub fn eval(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.values[k]
    }
}

struct Builder<F: FnMut(f64) -> usize> {
    m: F,
    breakpoints: Vec<f64>,
    values: Vec<usize>,
}

impl<F: FnMut(f64) -> usize> Builder<F> {
    fn push(&mut self, at: f64, v: usize) {
        self.breakpoints.push(at);
        self.values.push(v);
    }

    /// Breakpoints among `scales[lo+1..=hi]`, given the values at both ends.
    fn over_list(&mut self, scales: &[f64], lo: usize, hi: usize, vlo: usize, vhi: usize) {
        if vlo == vhi {
            return;
        }
        if hi == lo + 1 {
            self.push(scales[hi], vhi);
            return;
        }
        let mid = (lo + hi) / 2;
        let vmid = (self.m)(scales[mid]);
        self.over_list(scales, lo, mid, vlo, vmid);
        self.over_list(scales, mid, hi, vmid, vhi);
    }

    /// Breakpoints in `(lo, hi]` over positive doubles, bisecting bit patterns.
    fn over_bits(&mut self, lo: u64, hi: u64, vlo: usize, vhi: usize) {
        if vlo == vhi {
            return;
        }
        if hi == lo + 1 {
            self.push(f64::from_bits(hi), vhi);
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let vmid = (self.m)(f64::from_bits(mid));
        self.over_bits(lo, mid, vlo, vmid);
        self.over_bits(mid, hi, vmid, vhi);
    }
}

/// Exact packing profile.
pub fn packing_profile(b: &PointSet, cap: usize) -> Result<PackingProfile> {
    let n = b.len();
    if n == 1 {
        return Ok(PackingProfile::point());
    }
    if let Some(xs) = sorted_line(b) {
        let span = xs[n - 1] - xs[0];
        let mut builder = Builder {
            m: |t: f64| line_packing(&xs, t),
            breakpoints: Vec::new(),
            values: vec![n],
        };
        builder.over_bits(0.0f64.to_bits(), span.to_bits(), n, 1);
        return Ok(PackingProfile {
            breakpoints: builder.breakpoints,
            values: builder.values,
            n,
        });
    }
    if n > cap {
        return Err(capacity("exact packing", n, cap));
    }
    let mut scales: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            scales.push(b.dist(i, j));
        }
    }
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let mut builder = Builder {
        m: |t: f64| exact_packing(b, t, cap).expect("size checked above"),
        breakpoints: Vec::new(),
        values: vec![n],
    };
    let first = (builder.m)(scales[0]);
    if first < n {
        builder.push(scales[0], first);
    }
    let last = scales.len() - 1;
    builder.over_list(&scales, 0, last, first, 1);
    Ok(PackingProfile {
        breakpoints: builder.breakpoints,
        values: builder.values,
        n,
    })
}
