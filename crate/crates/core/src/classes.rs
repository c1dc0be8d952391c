//! Parametric set classes, closed membership, empirical mass and the
//! candidate search space of the localization solver.
//!
//! Candidates come out sorted by their encoded parameters
//! ([`SetDescriptor::key`]); the solver's first-minimum tie-break relies on
//! that order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::metric::{Metric, PointSet};
use crate::TOL;

/// Default combinatorial budget of [`enumerate_candidates`].
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Largest number of components in a separated union.
pub const MAX_UNION_COMPONENTS: usize = 3;

/// A closed ball, also used as a component of separated unions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A closed set of one of the implemented parametric families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SetDescriptor {
    Interval {
        lo: f64,
        hi: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    SeparatedUnion {
        components: Vec<Ball>,
        separation: f64,
    },
    Finite {
        indices: Vec<usize>,
    },
}

impl SetDescriptor {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        SetDescriptor::Ball { center, radius }
    }

    /// Checks the structural invariants of the descriptor against `space`.
    pub fn validate(&self, space: &PointSet) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            SetDescriptor::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return arg(format!("interval needs finite lo <= hi, got [{lo}, {hi}]"));
                }
            }
            SetDescriptor::Ball { center, radius } => {
                space.require_coords(center.len())?;
                if !finite(center) || !(radius.is_finite() && *radius >= 0.0) {
                    return arg("ball needs a finite center and a radius >= 0");
                }
            }
            SetDescriptor::Box { min, max } => {
                space.require_coords(min.len())?;
                if min.len() != max.len() || !finite(min) || !finite(max) {
                    return arg("box corners must be finite and of equal dimension");
                }
                if min.iter().zip(max).any(|(a, b)| a > b) {
                    return arg("box min-corner must not exceed max-corner");
                }
            }
            SetDescriptor::SeparatedUnion {
                components,
                separation,
            } => {
                if components.is_empty() {
                    return arg("separated union needs at least one component");
                }
                if !(*separation > 0.0) {
                    return arg("separation must be positive");
                }
                for c in components {
                    SetDescriptor::ball(c.center.clone(), c.radius).validate(space)?;
                }
                let metric = space.require_coords(components[0].center.len())?;
                if !separation_ok(components, *separation, metric) {
                    return arg("union components violate the separation constraint");
                }
            }
            SetDescriptor::Finite { indices } => {
                if indices.is_empty() {
                    return arg("finite subset must be non-empty");
                }
                let mut sorted = indices.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != indices.len() {
                    return arg("finite subset indices must be distinct");
                }
                if let Some(&bad) = sorted.iter().find(|&&i| i >= space.len()) {
                    return arg(format!("finite subset index {bad} out of range"));
                }
            }
        }
        Ok(())
    }

    /// `inf_{y in B} d(x, y)`.
    pub fn distance_to(&self, x: &[f64], space: &PointSet) -> Result<f64> {
        match self {
            SetDescriptor::Interval { lo, hi } => {
                let metric = interval_metric(space, x)?;
                let p = x[0];
                if metric == Metric::Wrap1d {
                    if (*lo..=*hi).contains(&p) {
                        return Ok(0.0);
                    }
                    return Ok(metric.dist(x, &[*lo]).min(metric.dist(x, &[*hi])));
                }
                Ok((lo - p).max(p - hi).max(0.0))
            }
            SetDescriptor::Ball { center, radius } => {
                let metric = space.require_coords(x.len())?;
                check_dim(center.len(), x.len())?;
                Ok((metric.dist(x, center) - radius).max(0.0))
            }
            SetDescriptor::Box { min, max } => {
                let metric = space.require_coords(x.len())?;
                check_dim(min.len(), x.len())?;
                let excess = x
                    .iter()
                    .zip(min.iter().zip(max))
                    .map(|(&p, (&a, &b))| (a - p).max(p - b).max(0.0));
                Ok(match metric {
                    Metric::Chebyshev => excess.fold(0.0, f64::max),
                    Metric::Euclidean => excess.map(|e| e * e).sum::<f64>().sqrt(),
                    Metric::Wrap1d => {
                        return SetDescriptor::Interval {
                            lo: min[0],
                            hi: max[0],
                        }
                        .distance_to(x, space)
                    }
                })
            }
            SetDescriptor::SeparatedUnion { components, .. } => {
                let mut best = f64::INFINITY;
                for c in components {
                    best = best.min(
                        SetDescriptor::ball(c.center.clone(), c.radius).distance_to(x, space)?,
                    );
                }
                Ok(best)
            }
            SetDescriptor::Finite { indices } => {
                let mut best = f64::INFINITY;
                for &i in indices {
                    best = best.min(space.dist_to(i, x)?);
                }
                if best.is_infinite() {
                    return arg("finite subset must be non-empty");
                }
                Ok(best)
            }
        }
    }

    /// Closed membership of an arbitrary point.
    pub fn contains(&self, x: &[f64], space: &PointSet) -> Result<bool> {
        match self {
            SetDescriptor::Interval { lo, hi } => {
                interval_metric(space, x)?;
                Ok(x[0] >= lo - TOL && x[0] <= hi + TOL)
            }
            SetDescriptor::Ball { center, radius } => {
                let metric = space.require_coords(x.len())?;
                check_dim(center.len(), x.len())?;
                Ok(metric.dist(x, center) <= radius + TOL)
            }
            SetDescriptor::Box { min, max } => {
                space.require_coords(x.len())?;
                check_dim(min.len(), x.len())?;
                Ok(x
                    .iter()
                    .zip(min.iter().zip(max))
                    .all(|(&p, (&a, &b))| p >= a - TOL && p <= b + TOL))
            }
            SetDescriptor::SeparatedUnion { components, .. } => {
                let metric = space.require_coords(x.len())?;
                for c in components {
                    check_dim(c.center.len(), x.len())?;
                    if metric.dist(x, &c.center) <= c.radius + TOL {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            SetDescriptor::Finite { .. } => Ok(self.distance_to(x, space)? <= TOL),
        }
    }

    /// Membership of point `i` of `space`.
    pub fn contains_index(&self, i: usize, space: &PointSet) -> Result<bool> {
        match self {
            SetDescriptor::Finite { indices } => Ok(indices.contains(&i)),
            _ => {
                let p = space.point(i).ok_or_else(|| {
                    Error::Argument(format!("point {i} has no coordinates in this space"))
                })?;
                self.contains(p, space)
            }
        }
    }

    /// The descriptor as a closed interval of the real line, when it is one.
    pub fn as_line_interval(&self, space: &PointSet) -> Option<(f64, f64)> {
        if !space.is_line() {
            return None;
        }
        match self {
            SetDescriptor::Interval { lo, hi } => Some((*lo, *hi)),
            SetDescriptor::Ball { center, radius } if center.len() == 1 => {
                Some((center[0] - radius, center[0] + radius))
            }
            SetDescriptor::Box { min, max } if min.len() == 1 => Some((min[0], max[0])),
            _ => None,
        }
    }

    /// Encoded parameters; candidates are ordered lexicographically by it.
    pub fn key(&self) -> Vec<f64> {
        match self {
            SetDescriptor::Interval { lo, hi } => vec![*lo, *hi],
            SetDescriptor::Ball { center, radius } => {
                let mut k = center.clone();
                k.push(*radius);
                k
            }
            SetDescriptor::Box { min, max } => min.iter().chain(max).copied().collect(),
            SetDescriptor::SeparatedUnion { components, .. } => components
                .iter()
                .flat_map(|c| c.center.iter().copied().chain(std::iter::once(c.radius)))
                .collect(),
            SetDescriptor::Finite { indices } => indices.iter().map(|&i| i as f64).collect(),
        }
    }

    /// Coordinate bounding box, used by grid discretization.
    pub fn bounding_box(&self, space: &PointSet) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            SetDescriptor::Interval { lo, hi } => Ok((vec![*lo], vec![*hi])),
            SetDescriptor::Ball { center, radius } => Ok((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            SetDescriptor::Box { min, max } => Ok((min.clone(), max.clone())),
            SetDescriptor::SeparatedUnion { components, .. } => {
                let d = components[0].center.len();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for c in components {
                    for k in 0..d {
                        lo[k] = lo[k].min(c.center[k] - c.radius);
                        hi[k] = hi[k].max(c.center[k] + c.radius);
                    }
                }
                Ok((lo, hi))
            }
            SetDescriptor::Finite { indices } => {
                let d = space
                    .dim()
                    .ok_or_else(|| Error::Argument("finite subset has no coordinates".into()))?;
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for &i in indices {
                    let p = space.point(i).ok_or_else(|| {
                        Error::Argument(format!("finite subset index {i} out of range"))
                    })?;
                    for k in 0..d {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                Ok((lo, hi))
            }
        }
    }

    /// Defining points that belong to the set (ball centers, corners).
    pub fn anchors(&self) -> Vec<Vec<f64>> {
        match self {
            SetDescriptor::Interval { lo, hi } => vec![vec![*lo], vec![*hi]],
            SetDescriptor::Ball { center, .. } => vec![center.clone()],
            SetDescriptor::Box { min, max } => vec![min.clone(), max.clone()],
            SetDescriptor::SeparatedUnion { components, .. } => {
                components.iter().map(|c| c.center.clone()).collect()
            }
            SetDescriptor::Finite { .. } => Vec::new(),
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return arg(format!("dimension mismatch: descriptor {expected}, point {got}"));
    }
    Ok(())
}

fn interval_metric(space: &PointSet, x: &[f64]) -> Result<Metric> {
    if x.len() != 1 {
        return arg("intervals live on the real line; point must be 1-D");
    }
    space.require_coords(1)
}

/// Lexicographic comparison of encoded parameters.
pub fn cmp_keys(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Whether a mass meets the constraint `mass >= 1 - alpha`.
#[inline]
pub fn meets(mass: f64, alpha: f64) -> bool {
    mass + TOL >= 1.0 - alpha
}

/// `mu(B)`: total weight of the support points contained in `b`.
pub fn mass(b: &SetDescriptor, mu: &EmpiricalMeasure) -> Result<f64> {
    let space = mu.support();
    if let SetDescriptor::Finite { indices } = b {
        b.validate(space)?;
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        return Ok(mu.mass_of_sorted(&sorted));
    }
    let mut inside = Vec::new();
    for i in 0..space.len() {
        if b.contains_index(i, space)? {
            inside.push(i);
        }
    }
    Ok(mu.mass_of_sorted(&inside))
}

/// Pairwise gap condition `d(c1, c2) - r1 - r2 >= eps` (closed).
pub fn separation_ok(components: &[Ball], eps: f64, metric: Metric) -> bool {
    components.iter().enumerate().all(|(i, a)| {
        components[i + 1..]
            .iter()
            .all(|b| metric.dist(&a.center, &b.center) - a.radius - b.radius >= eps - TOL)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Intervals,
    Balls,
    Boxes,
    SeparatedUnion { k: usize, eps: f64 },
    FiniteSubsets,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Intervals => "intervals",
            Family::Balls => "balls",
            Family::Boxes => "boxes",
            Family::SeparatedUnion { .. } => "separated-union",
            Family::FiniteSubsets => "finite-subsets",
        }
    }
}

/// How candidates are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CandidatePolicy {
    /// Emit every parameter combination instead of only the mass-feasible,
    /// locally minimal ones.
    pub exhaustive: bool,
    /// Extra ball centers on a grid of this step over the sample bounding box.
    pub center_grid: Option<f64>,
    /// Upper bound on interval length, ball radius and box side.
    pub max_extent: Option<f64>,
    pub budget: u64,
}

impl Default for CandidatePolicy {
    fn default() -> Self {
        CandidatePolicy {
            exhaustive: false,
            center_grid: None,
            max_extent: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub policy: CandidatePolicy,
}

impl ClassSpec {
    pub fn new(family: Family) -> Self {
        ClassSpec {
            family,
            policy: CandidatePolicy::default(),
        }
    }

    pub fn exhaustive(mut self) -> Self {
        self.policy.exhaustive = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::SeparatedUnion { k, eps } = self.family {
            if k == 0 || k > MAX_UNION_COMPONENTS {
                return arg(format!(
                    "separated unions need 1 <= k <= {MAX_UNION_COMPONENTS}, got {k}"
                ));
            }
            if !(eps > 0.0) {
                return arg("separation eps must be positive");
            }
        }
        if let Some(step) = self.policy.center_grid {
            if !(step > 0.0) {
                return arg("center grid step must be positive");
            }
        }
        if let Some(e) = self.policy.max_extent {
            if !(e >= 0.0) {
                return arg("max extent must be non-negative");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub descriptor: SetDescriptor,
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Largest mass reachable within the class and policy.
    pub max_mass: f64,
}

/// Enumerates the candidate stream of `spec` on the support of `mu`.
///
/// With the default policy only mass-feasible candidates whose parameters
/// cannot be shrunk to the next sample-determined value without losing
/// feasibility are emitted. Since every implemented size is monotone in the
/// parameters, the stream still contains a minimizer.
pub fn enumerate_candidates(
    spec: &ClassSpec,
    mu: &EmpiricalMeasure,
    alpha: f64,
) -> Result<CandidateSet> {
    spec.validate()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let mut set = match &spec.family {
        Family::Intervals => intervals(&spec.policy, mu, alpha)?,
        Family::Balls => balls(&spec.policy, mu, alpha)?,
        Family::Boxes => boxes(&spec.policy, mu, alpha)?,
        Family::SeparatedUnion { k, eps } => unions(&spec.policy, mu, alpha, *k, *eps)?,
        Family::FiniteSubsets => finite_subsets(&spec.policy, mu, alpha)?,
    };
    set.candidates
        .sort_by(|a, b| cmp_keys(&a.descriptor.key(), &b.descriptor.key()));
    Ok(set)
}

fn budget_check(count: u128, policy: &CandidatePolicy) -> Result<()> {
    if count > policy.budget as u128 {
        return Err(Error::Capacity {
            what: "candidate enumeration",
            count,
            cap: policy.budget as u128,
        });
    }
    Ok(())
}

fn within_extent(extent: f64, policy: &CandidatePolicy) -> bool {
    policy.max_extent.map_or(true, |m| extent <= m + TOL)
}

/// Support indices sorted along the line.
fn line_order(mu: &EmpiricalMeasure) -> Result<(Vec<usize>, Vec<f64>)> {
    let space = mu.support();
    if !space.is_line() {
        return arg("intervals need a 1-D sample under a line metric");
    }
    let coords = space.coords().expect("line geometry has coordinates");
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
    let xs = order.iter().map(|&i| coords[i]).collect();
    Ok((order, xs))
}

/// Mass of contiguous runs of a sorted order.
struct RunMass<'a> {
    mu: &'a EmpiricalMeasure,
    prefix: Vec<f64>,
}

impl<'a> RunMass<'a> {
    fn new(mu: &'a EmpiricalMeasure, order: &[usize]) -> Self {
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &i in order {
            acc += mu.weights()[i];
            prefix.push(acc);
        }
        RunMass { mu, prefix }
    }

    /// Mass of sorted positions `i..=j`.
    fn of(&self, i: usize, j: usize) -> f64 {
        if self.mu.is_uniform() {
            (j + 1 - i) as f64 / self.mu.len() as f64
        } else {
            self.prefix[j + 1] - self.prefix[i]
        }
    }
}

fn intervals(policy: &CandidatePolicy, mu: &EmpiricalMeasure, alpha: f64) -> Result<CandidateSet> {
    let (order, xs) = line_order(mu)?;
    let n = xs.len();
    let run = RunMass::new(mu, &order);
    let mut candidates = Vec::new();
    let mut max_mass: f64 = 0.0;
    let push = |i: usize, j: usize, m: f64, out: &mut Vec<Candidate>| {
        out.push(Candidate {
            descriptor: SetDescriptor::Interval {
                lo: xs[i],
                hi: xs[j],
            },
            mass: m,
        })
    };
    if policy.exhaustive {
        budget_check((n as u128) * (n as u128 + 1) / 2, policy)?;
        for i in 0..n {
            for j in i..n {
                if !within_extent(xs[j] - xs[i], policy) {
                    break;
                }
                let m = run.of(i, j);
                max_mass = max_mass.max(m);
                push(i, j, m, &mut candidates);
            }
        }
        return Ok(CandidateSet {
            candidates,
            max_mass,
        });
    }
    budget_check(n as u128, policy)?;
    let mut j = 0;
    for i in 0..n {
        j = j.max(i);
        while j < n && !meets(run.of(i, j), alpha) {
            j += 1;
        }
        if j == n {
            break;
        }
        if !within_extent(xs[j] - xs[i], policy) {
            continue;
        }
        if i < j && meets(run.of(i + 1, j), alpha) {
            continue;
        }
        push(i, j, run.of(i, j), &mut candidates);
    }
    if candidates.is_empty() {
        // longest admissible run starting at each position
        let mut j = 0;
        for i in 0..n {
            j = j.max(i);
            while j + 1 < n && within_extent(xs[j + 1] - xs[i], policy) {
                j += 1;
            }
            max_mass = max_mass.max(run.of(i, j));
        }
    } else {
        max_mass = candidates.iter().map(|c| c.mass).fold(0.0, f64::max);
    }
    Ok(CandidateSet {
        candidates,
        max_mass,
    })
}

/// Ball centers: the support points, then optional grid points.
fn ball_centers(policy: &CandidatePolicy, space: &PointSet) -> Result<Vec<Vec<f64>>> {
    let d = space
        .dim()
        .ok_or_else(|| Error::Argument("balls need coordinates".into()))?;
    let mut centers: Vec<Vec<f64>> = (0..space.len())
        .map(|i| space.point(i).unwrap().to_vec())
        .collect();
    if let Some(step) = policy.center_grid {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in &centers {
            for k in 0..d {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        let axes: Vec<Vec<f64>> = (0..d).map(|k| grid_axis(lo[k], hi[k], step)).collect();
        let count: u128 = axes.iter().map(|a| a.len() as u128).product();
        budget_check(count, policy)?;
        for p in cartesian(&axes) {
            if !centers.iter().any(|c| c == &p) {
                centers.push(p);
            }
        }
    }
    Ok(centers)
}

/// Multiples of `step` inside `[lo, hi]` (grid anchored at the origin).
pub fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = ((lo - TOL) / step).ceil() as i64;
    let last = ((hi + TOL) / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// For one center: support indices sorted by distance, with the distances.
fn by_distance(space: &PointSet, metric: Metric, center: &[f64]) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> = (0..space.len())
        .map(|i| (metric.dist(center, space.point(i).unwrap()), i))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// All distinct radii of balls around `center` with their masses.
fn radius_ladder(mu: &EmpiricalMeasure, sorted: &[(f64, usize)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut inside: Vec<usize> = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let r = sorted[k].0;
        while k < sorted.len() && sorted[k].0 <= r + TOL {
            inside.push(sorted[k].1);
            k += 1;
        }
        let mut idx = inside.clone();
        idx.sort_unstable();
        out.push((r, mu.mass_of_sorted(&idx)));
    }
    out
}

/// Smallest number of points whose uniform mass meets the constraint.
fn required_count(n: usize, alpha: f64) -> usize {
    let nf = n as f64;
    let mut k = (((1.0 - alpha) - TOL) * nf).ceil().max(1.0) as usize;
    while k > 1 && meets((k - 1) as f64 / nf, alpha) {
        k -= 1;
    }
    while k < n && !meets(k as f64 / nf, alpha) {
        k += 1;
    }
    k.min(n)
}

fn balls(policy: &CandidatePolicy, mu: &EmpiricalMeasure, alpha: f64) -> Result<CandidateSet> {
    let space = mu.support();
    let metric = space
        .metric()
        .ok_or_else(|| Error::Argument("balls need coordinates".into()))?;
    let centers = ball_centers(policy, space)?;
    let n = space.len();
    let mut candidates = Vec::new();
    let mut max_mass: f64 = 0.0;
    if policy.exhaustive {
        budget_check(centers.len() as u128 * n as u128, policy)?;
    } else {
        budget_check(centers.len() as u128, policy)?;
    }
    for c in centers {
        if policy.exhaustive {
            let sorted = by_distance(space, metric, &c);
            for (r, m) in radius_ladder(mu, &sorted) {
                if !within_extent(r, policy) {
                    break;
                }
                max_mass = max_mass.max(m);
                candidates.push(Candidate {
                    descriptor: SetDescriptor::ball(c.clone(), r),
                    mass: m,
                });
            }
            continue;
        }
        let found = if mu.is_uniform() {
            let k = required_count(n, alpha);
            let mut d: Vec<f64> = (0..n)
                .map(|i| metric.dist(&c, space.point(i).unwrap()))
                .collect();
            let (_, r, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            let r = *r;
            let count = d.iter().filter(|&&x| x <= r + TOL).count();
            Some((r, count as f64 / n as f64))
        } else {
            let sorted = by_distance(space, metric, &c);
            radius_ladder(mu, &sorted)
                .into_iter()
                .find(|&(_, m)| meets(m, alpha))
        };
        match found {
            Some((r, m)) if within_extent(r, policy) && meets(m, alpha) => {
                candidates.push(Candidate {
                    descriptor: SetDescriptor::ball(c, r),
                    mass: m,
                });
            }
            _ => {
                if let Some(cap) = policy.max_extent {
                    let inside: Vec<usize> = (0..n)
                        .filter(|&i| metric.dist(&c, space.point(i).unwrap()) <= cap + TOL)
                        .collect();
                    max_mass = max_mass.max(mu.mass_of_sorted(&inside));
                }
            }
        }
    }
    if !policy.exhaustive && !candidates.is_empty() {
        max_mass = candidates.iter().map(|c| c.mass).fold(0.0, f64::max);
    }
    Ok(CandidateSet {
        candidates,
        max_mass,
    })
}

fn boxes(policy: &CandidatePolicy, mu: &EmpiricalMeasure, alpha: f64) -> Result<CandidateSet> {
    let space = mu.support();
    let d = space
        .dim()
        .ok_or_else(|| Error::Argument("boxes need coordinates".into()))?;
    if space.metric() == Some(Metric::Wrap1d) {
        return arg("boxes are not defined under the wrap-1d metric");
    }
    let n = space.len();
    let values: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut v: Vec<f64> = (0..n).map(|i| space.point(i).unwrap()[k]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let count: u128 = values
        .iter()
        .map(|v| v.len() as u128 * (v.len() as u128 + 1) / 2)
        .product();
    budget_check(count, policy)?;
    let mass_of = |lo: &[usize], hi: &[usize]| -> f64 {
        let inside: Vec<usize> = (0..n)
            .filter(|&i| {
                let p = space.point(i).unwrap();
                (0..d).all(|k| p[k] >= values[k][lo[k]] - TOL && p[k] <= values[k][hi[k]] + TOL)
            })
            .collect();
        mu.mass_of_sorted(&inside)
    };
    let pairs: Vec<Vec<(usize, usize)>> = values
        .iter()
        .map(|v| {
            (0..v.len())
                .flat_map(|i| (i..v.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| within_extent(v[j] - v[i], policy))
                .collect()
        })
        .collect();
    let mut candidates = Vec::new();
    let mut max_mass: f64 = 0.0;
    let mut digits = vec![0usize; d];
    if pairs.iter().any(Vec::is_empty) {
        return Ok(CandidateSet {
            candidates,
            max_mass,
        });
    }
    loop {
        let lo: Vec<usize> = (0..d).map(|k| pairs[k][digits[k]].0).collect();
        let hi: Vec<usize> = (0..d).map(|k| pairs[k][digits[k]].1).collect();
        let m = mass_of(&lo, &hi);
        max_mass = max_mass.max(m);
        let keep = policy.exhaustive
            || (meets(m, alpha)
                && (0..d).all(|k| {
                    if lo[k] == hi[k] {
                        return true;
                    }
                    let mut l = lo.clone();
                    l[k] += 1;
                    let mut h = hi.clone();
                    h[k] -= 1;
                    !meets(mass_of(&l, &hi), alpha) && !meets(mass_of(&lo, &h), alpha)
                }));
        if keep {
            candidates.push(Candidate {
                descriptor: SetDescriptor::Box {
                    min: (0..d).map(|k| values[k][lo[k]]).collect(),
                    max: (0..d).map(|k| values[k][hi[k]]).collect(),
                },
                mass: m,
            });
        }
        let mut k = 0;
        loop {
            if k == d {
                return Ok(CandidateSet {
                    candidates,
                    max_mass,
                });
            }
            digits[k] += 1;
            if digits[k] < pairs[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn unions(
    policy: &CandidatePolicy,
    mu: &EmpiricalMeasure,
    alpha: f64,
    k: usize,
    eps: f64,
) -> Result<CandidateSet> {
    let space = mu.support();
    let metric = space
        .metric()
        .ok_or_else(|| Error::Argument("separated unions need coordinates".into()))?;
    let centers = ball_centers(policy, space)?;
    budget_check(centers.len() as u128 * space.len() as u128, policy)?;
    // (ball, mass, index of the next smaller ball on the same center)
    let mut base: Vec<(Ball, f64, Option<usize>)> = Vec::new();
    for c in centers {
        let sorted = by_distance(space, metric, &c);
        let mut prev = None;
        for (r, m) in radius_ladder(mu, &sorted) {
            if !within_extent(r, policy) {
                break;
            }
            base.push((
                Ball {
                    center: c.clone(),
                    radius: r,
                },
                m,
                prev,
            ));
            prev = Some(base.len() - 1);
        }
    }
    let nb = base.len() as u128;
    let count: u128 = (1..=k as u128).map(|j| binomial(nb, j)).sum();
    budget_check(count, policy)?;

    let separated = |i: usize, j: usize| -> bool {
        separation_ok(&[base[i].0.clone(), base[j].0.clone()], eps, metric)
    };
    let mut candidates = Vec::new();
    let mut max_mass: f64 = 0.0;
    let mut combo: Vec<usize> = Vec::with_capacity(k);
    let emit = |combo: &[usize], out: &mut Vec<Candidate>, max_mass: &mut f64| {
        let m: f64 = combo.iter().map(|&i| base[i].1).sum();
        *max_mass = max_mass.max(m);
        let keep = policy.exhaustive
            || (meets(m, alpha)
                && combo.iter().all(|&i| {
                    let without = m - base[i].1;
                    let shrunk = base[i].2.map_or(without, |p| without + base[p].1);
                    (combo.len() == 1 || !meets(without, alpha)) && !meets(shrunk, alpha)
                })
                && !(combo.len() == 1 && base[combo[0]].2.is_some_and(|p| meets(base[p].1, alpha))));
        if keep {
            out.push(Candidate {
                descriptor: SetDescriptor::SeparatedUnion {
                    components: combo.iter().map(|&i| base[i].0.clone()).collect(),
                    separation: eps,
                },
                mass: m,
            });
        }
    };
    fn rec(
        start: usize,
        k: usize,
        nb: usize,
        combo: &mut Vec<usize>,
        separated: &dyn Fn(usize, usize) -> bool,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        for i in start..nb {
            if combo.iter().all(|&j| separated(j, i)) {
                combo.push(i);
                emit(combo);
                if combo.len() < k {
                    rec(i + 1, k, nb, combo, separated, emit);
                }
                combo.pop();
            }
        }
    }
    {
        let mut sink = |c: &[usize]| emit(c, &mut candidates, &mut max_mass);
        rec(0, k, base.len(), &mut combo, &separated, &mut sink);
    }
    Ok(CandidateSet {
        candidates,
        max_mass,
    })
}

fn finite_subsets(
    policy: &CandidatePolicy,
    mu: &EmpiricalMeasure,
    alpha: f64,
) -> Result<CandidateSet> {
    let n = mu.len();
    let count = if n >= 127 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    budget_check(count, policy)?;
    let w = mu.weights();
    let mut candidates = Vec::new();
    if policy.exhaustive {
        let mut current = Vec::new();
        fn all(
            start: usize,
            n: usize,
            current: &mut Vec<usize>,
            mu: &EmpiricalMeasure,
            out: &mut Vec<Candidate>,
        ) {
            for i in start..n {
                current.push(i);
                out.push(Candidate {
                    descriptor: SetDescriptor::Finite {
                        indices: current.clone(),
                    },
                    mass: mu.mass_of_sorted(current),
                });
                all(i + 1, n, current, mu, out);
                current.pop();
            }
        }
        all(0, n, &mut current, mu, &mut candidates);
        return Ok(CandidateSet {
            candidates,
            max_mass: 1.0,
        });
    }
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + w[i];
    }
    struct Walk<'a> {
        mu: &'a EmpiricalMeasure,
        alpha: f64,
        suffix: Vec<f64>,
        out: Vec<Candidate>,
    }
    impl Walk<'_> {
        fn go(&mut self, start: usize, current: &mut Vec<usize>) {
            let n = self.mu.len();
            for i in start..n {
                current.push(i);
                let m = self.mu.mass_of_sorted(current);
                if meets(m, self.alpha) {
                    let lightest = current
                        .iter()
                        .map(|&j| self.mu.weights()[j])
                        .fold(f64::INFINITY, f64::min);
                    let minimal = current.len() == 1 || {
                        let lighter: Vec<usize> = {
                            let drop = current
                                .iter()
                                .position(|&j| self.mu.weights()[j] == lightest)
                                .unwrap();
                            let mut v = current.clone();
                            v.remove(drop);
                            v
                        };
                        !meets(self.mu.mass_of_sorted(&lighter), self.alpha)
                    };
                    if minimal {
                        self.out.push(Candidate {
                            descriptor: SetDescriptor::Finite {
                                indices: current.clone(),
                            },
                            mass: m,
                        });
                    }
                } else if m + self.suffix[i + 1] + 1e-9 >= 1.0 - self.alpha {
                    self.go(i + 1, current);
                }
                current.pop();
            }
        }
    }
    let mut walk = Walk {
        mu,
        alpha,
        suffix,
        out: Vec::new(),
    };
    walk.go(0, &mut Vec::new());
    candidates = walk.out;
    Ok(CandidateSet {
        candidates,
        max_mass: 1.0,
    })
}
