//! Finite metric spaces, neighborhoods and Hausdorff contrast.
//!
//! A [`PointSet`] is either a list of coordinates under one of the supported
//! metrics or an explicit distance matrix. All continuous sets are handled
//! through [`SetDescriptor`]s evaluated against a point set, which supplies the
//! metric (and the points a finite-subset descriptor refers to).
//!
//! Neighborhoods are open: `x` lies in the `eps`-neighborhood of `B` iff
//! `d(x, B) < eps`. Comparisons use the crate-wide tolerance [`TOL`].

use serde::{Deserialize, Serialize};

use crate::classes::SetDescriptor;
use crate::error::{arg, Error, Result};
use crate::TOL;

/// Tolerance for the triangle-inequality and symmetry checks on explicit
/// distance matrices.
pub const MATRIX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    Chebyshev,
    /// Circle of circumference one: `min(|x - y| mod 1, 1 - |x - y| mod 1)`.
    #[serde(rename = "wrap-1d")]
    Wrap1d,
}

impl Metric {
    /// Distance between two coordinate vectors of equal length.
    #[inline]
    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Wrap1d => {
                let d = (a[0] - b[0]).rem_euclid(1.0);
                d.min(1.0 - d)
            }
            _ if a.len() == 1 => (a[0] - b[0]).abs(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "chebyshev" => Ok(Metric::Chebyshev),
            "wrap-1d" | "wrap1d" => Ok(Metric::Wrap1d),
            other => arg(format!("unknown metric `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Geometry {
    Coords {
        dim: usize,
        coords: Vec<f64>,
        metric: Metric,
    },
    Matrix {
        n: usize,
        dist: Vec<f64>,
    },
}

/// A finite, non-empty set of distinct points of a metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    geometry: Geometry,
}

impl PointSet {
    /// Builds a coordinate point set, checking the invariants (n >= 1,
    /// consistent dimension, finite coordinates, distinct points).
    pub fn from_coords(dim: usize, points: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return arg(format!("point {i} has {} coordinates, expected {dim}", p.len()));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, metric)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return arg("dimension must be at least 1");
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return arg("a point set needs at least one point with `dim` coordinates");
        }
        if metric == Metric::Wrap1d && dim != 1 {
            return arg("the wrap-1d metric requires dimension 1");
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return arg(format!("non-finite coordinate at flat offset {bad}"));
        }
        let set = PointSet {
            geometry: Geometry::Coords {
                dim,
                coords,
                metric,
            },
        };
        set.check_distinct()?;
        Ok(set)
    }

    /// One-dimensional Euclidean point set.
    pub fn line(xs: &[f64]) -> Result<Self> {
        Self::from_flat(1, xs.to_vec(), Metric::Euclidean)
    }

    /// Builds a point set from an explicit distance matrix.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return arg("distance matrix must have at least one row");
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return arg(format!("matrix row {i} has length {}, expected {n}", r.len()));
            }
            dist.extend_from_slice(r);
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return arg(format!("matrix diagonal entry {i} is not zero"));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return arg(format!("matrix entry ({i},{j}) is not a non-negative real"));
                }
                if (d - dist[j * n + i]).abs() > MATRIX_TOL {
                    return arg(format!("matrix is not symmetric at ({i},{j})"));
                }
                if i != j && d == 0.0 {
                    return arg(format!("points {i} and {j} coincide"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i * n + j] > dist[i * n + k] + dist[k * n + j] + MATRIX_TOL {
                        return arg(format!("triangle inequality fails for ({i},{j}) via {k}"));
                    }
                }
            }
        }
        Ok(PointSet {
            geometry: Geometry::Matrix { n, dist },
        })
    }

    fn check_distinct(&self) -> Result<()> {
        let Geometry::Coords { dim, coords, metric } = &self.geometry else {
            return Ok(());
        };
        let n = coords.len() / dim;
        let key = |i: usize| -> Vec<f64> {
            let p = &coords[i * dim..(i + 1) * dim];
            if *metric == Metric::Wrap1d {
                vec![p[0].rem_euclid(1.0)]
            } else {
                p.to_vec()
            }
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            key(a)
                .iter()
                .zip(key(b).iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if self.dist(w[0], w[1]) == 0.0 {
                return arg(format!("points {} and {} coincide", w[0], w[1]));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.geometry {
            Geometry::Coords { dim, coords, .. } => coords.len() / dim,
            Geometry::Matrix { n, .. } => *n,
        }
    }

    /// Always false: point sets hold at least one point.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate dimension, `None` for matrix geometry.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Coords { dim, .. } => Some(*dim),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn metric(&self) -> Option<Metric> {
        match &self.geometry {
            Geometry::Coords { metric, .. } => Some(*metric),
            Geometry::Matrix { .. } => None,
        }
    }

    /// True for 1-D coordinates under an order-compatible metric, where the
    /// distance is `|x - y|`.
    pub fn is_line(&self) -> bool {
        matches!(
            self.geometry,
            Geometry::Coords { dim: 1, metric, .. } if metric != Metric::Wrap1d
        )
    }

    pub fn point(&self, i: usize) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Coords { dim, coords, .. } if i < coords.len() / dim => {
                Some(&coords[i * dim..(i + 1) * dim])
            }
            _ => None,
        }
    }

    pub(crate) fn coords(&self) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Coords { coords, .. } => Some(coords),
            Geometry::Matrix { .. } => None,
        }
    }

    /// Distance matrix rows, when the geometry is explicit.
    pub fn matrix_rows(&self) -> Option<Vec<Vec<f64>>> {
        match &self.geometry {
            Geometry::Matrix { n, dist } => Some(dist.chunks(*n).map(<[f64]>::to_vec).collect()),
            Geometry::Coords { .. } => None,
        }
    }

    /// Checked distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if i >= n || j >= n {
            return arg(format!("point index out of range: ({i}, {j}) with {n} points"));
        }
        Ok(self.dist(i, j))
    }

    /// Unchecked distance; panics on out-of-range indices.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.geometry {
            Geometry::Coords { dim, coords, metric } => metric.dist(
                &coords[i * dim..(i + 1) * dim],
                &coords[j * dim..(j + 1) * dim],
            ),
            Geometry::Matrix { n, dist } => dist[i * n + j],
        }
    }

    /// Distance from point `i` to an arbitrary coordinate vector.
    pub fn dist_to(&self, i: usize, x: &[f64]) -> Result<f64> {
        let metric = self.require_coords(x.len())?;
        let p = self
            .point(i)
            .ok_or_else(|| Error::Argument(format!("point index {i} out of range")))?;
        Ok(metric.dist(p, x))
    }

    /// Returns the metric after checking that the geometry has coordinates of
    /// dimension `dim`.
    pub fn require_coords(&self, dim: usize) -> Result<Metric> {
        match &self.geometry {
            Geometry::Coords { dim: d, metric, .. } if *d == dim => Ok(*metric),
            Geometry::Coords { dim: d, .. } => {
                arg(format!("dimension mismatch: point set has {d}, argument has {dim}"))
            }
            Geometry::Matrix { .. } => {
                arg("operation needs coordinates but the point set is an explicit matrix")
            }
        }
    }

    /// The sub-point-set on the given (valid, distinct, non-empty) indices.
    pub fn subset(&self, idx: &[usize]) -> Result<PointSet> {
        let n = self.len();
        if idx.is_empty() {
            return arg("subset must be non-empty");
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return arg(format!("subset index {bad} out of range"));
        }
        let geometry = match &self.geometry {
            Geometry::Coords { dim, coords, metric } => Geometry::Coords {
                dim: *dim,
                coords: idx
                    .iter()
                    .flat_map(|&i| coords[i * dim..(i + 1) * dim].iter().copied())
                    .collect(),
                metric: *metric,
            },
            Geometry::Matrix { n, dist } => Geometry::Matrix {
                n: idx.len(),
                dist: idx
                    .iter()
                    .flat_map(|&i| idx.iter().map(move |&j| dist[i * n + j]))
                    .collect(),
            },
        };
        let set = PointSet { geometry };
        if let Geometry::Matrix { n, dist } = &set.geometry {
            for i in 0..*n {
                for j in 0..i {
                    if dist[i * n + j] == 0.0 {
                        return arg("subset repeats a point");
                    }
                }
            }
        } else {
            set.check_distinct()?;
        }
        Ok(set)
    }

    /// `Haus(A|B)` for index lists into this point set.
    pub fn haus_contrast(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.check_indices(a)?;
        self.check_indices(b)?;
        haus_contrast(a, b, |&i, &j| self.dist(i, j))
    }

    /// Hausdorff metric for index lists into this point set.
    pub fn haus_metric(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        Ok(self.haus_contrast(a, b)?.max(self.haus_contrast(b, a)?))
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.len()) {
            Some(bad) => arg(format!("point index {bad} out of range")),
            None => Ok(()),
        }
    }
}

/// Hausdorff contrast `Haus(A|B) = max_{a in A} min_{b in B} d(a, b)`.
pub fn haus_contrast<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return arg("Hausdorff contrast needs non-empty sets");
    }
    Ok(a.iter()
        .map(|x| b.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// Hausdorff metric `Haus(A|B) v Haus(B|A)`.
pub fn haus_metric<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> Result<f64> {
    Ok(haus_contrast(a, b, &dist)?.max(haus_contrast(b, a, &dist)?))
}

/// Whether `x` lies in the open `eps`-neighborhood of `b`.
pub fn in_neighborhood(space: &PointSet, x: &[f64], b: &SetDescriptor, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return arg(format!("neighborhood radius must be positive, got {eps}"));
    }
    Ok(b.distance_to(x, space)? < eps - TOL)
}

/// Hausdorff metric between two descriptors.
///
/// Intervals use the endpoint formula and pairs of finite subsets are exact;
/// everything else is discretized on `probe`, a point set covering both sets.
pub fn descriptor_haus(
    space: &PointSet,
    a: &SetDescriptor,
    b: &SetDescriptor,
    probe: &PointSet,
) -> Result<f64> {
    if let (Some((a0, a1)), Some((b0, b1))) = (a.as_line_interval(space), b.as_line_interval(space))
    {
        return Ok((a0 - b0).abs().max((a1 - b1).abs()));
    }
    if let (SetDescriptor::Finite { indices: ia }, SetDescriptor::Finite { indices: ib }) = (a, b) {
        return space.haus_metric(ia, ib);
    }
    let trace = |d: &SetDescriptor, name: &str| -> Result<Vec<usize>> {
        let mut hits = Vec::new();
        for i in 0..probe.len() {
            let p = probe
                .point(i)
                .ok_or_else(|| Error::Argument("probe must carry coordinates".into()))?;
            if d.contains(p, space)? {
                hits.push(i);
            }
        }
        if hits.is_empty() {
            return Err(Error::DegenerateProbe(format!(
                "descriptor {name} intersects no probe point"
            )));
        }
        Ok(hits)
    };
    let ta = trace(a, "A")?;
    let tb = trace(b, "B")?;
    probe.haus_metric(&ta, &tb)
}

/// Finite-horizon approximation of `x in lim_n B_n`: true iff
/// `d(x, B_n) < eps` for every `n` in `tail_start..=tail_end`.
pub fn limit_membership(
    space: &PointSet,
    x: &[f64],
    sequence: impl Fn(usize) -> SetDescriptor,
    eps: f64,
    tail_start: usize,
    tail_end: usize,
) -> Result<bool> {
    if tail_start >= tail_end {
        return arg("tail_start must be smaller than tail_end");
    }
    if !(eps > 0.0) {
        return arg("eps must be positive");
    }
    for n in tail_start..=tail_end {
        if sequence(n).distance_to(x, space)? >= eps - TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_dist(x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    #[test]
    fn distances() {
        let p = PointSet::from_coords(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]], Metric::Euclidean)
            .unwrap();
        assert_eq!(p.distance(0, 1).unwrap(), 5.0);
        assert_eq!(p.distance(1, 0).unwrap(), 5.0);
        assert_eq!(p.distance(1, 1).unwrap(), 0.0);
        assert!(matches!(p.distance(0, 2), Err(Error::Argument(_))));

        let w = PointSet::from_flat(1, vec![0.1, 0.9], Metric::Wrap1d).unwrap();
        assert!((w.distance(0, 1).unwrap() - 0.2).abs() < 1e-12);

        let c = PointSet::from_coords(2, vec![vec![0.0, 0.0], vec![3.0, -4.0]], Metric::Chebyshev)
            .unwrap();
        assert_eq!(c.distance(0, 1).unwrap(), 4.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PointSet::line(&[]).is_err());
        assert!(PointSet::line(&[1.0, 1.0]).is_err());
        assert!(PointSet::from_flat(1, vec![0.25, 1.25], Metric::Wrap1d).is_err());
        assert!(PointSet::from_flat(2, vec![0.0, 0.0], Metric::Wrap1d).is_err());
        assert!(PointSet::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(PointSet::from_matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        let bad_triangle = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(PointSet::from_matrix(bad_triangle).is_err());
        let ok = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let m = PointSet::from_matrix(ok).unwrap();
        assert_eq!(m.distance(0, 2).unwrap(), 2.0);
        assert_eq!(m.dim(), None);
    }

    #[test]
    fn neighborhood_is_open() {
        let space = PointSet::line(&[1.0]).unwrap();
        let b = SetDescriptor::Finite { indices: vec![0] };
        assert!(!in_neighborhood(&space, &[0.0], &b, 1.0).unwrap());
        assert!(in_neighborhood(&space, &[0.0], &b, 1.1).unwrap());
        let ball = SetDescriptor::Ball {
            center: vec![2.0],
            radius: 1.0,
        };
        assert!(in_neighborhood(&space, &[0.0], &ball, 1.5).unwrap());
        assert!(!in_neighborhood(&space, &[0.0], &ball, 1.0).unwrap());
        assert!(in_neighborhood(&space, &[0.0], &ball, 0.0).is_err());
        assert!(in_neighborhood(&space, &[0.0], &ball, -1.0).is_err());
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(haus_contrast(&[0.0], &[0.0, 5.0], line_dist).unwrap(), 0.0);
        assert_eq!(haus_contrast(&[0.0, 5.0], &[0.0], line_dist).unwrap(), 5.0);
        // brute force: d(0,B)=0.5, d(1,B)=0.5, d(2,B)=0.5
        assert_eq!(
            haus_contrast(&[0.0, 1.0, 2.0], &[0.5, 2.5], line_dist).unwrap(),
            0.5
        );
        assert!(haus_contrast(&[] as &[f64], &[1.0], line_dist).is_err());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(haus_metric(&[0.0], &[0.0, 5.0], line_dist).unwrap(), 5.0);
        assert_eq!(haus_metric(&[1.0, 2.0], &[2.0, 1.0], line_dist).unwrap(), 0.0);
        // A->B: max(0.2, 0.3) = 0.3; B->A: max(0.2, 0.3) = 0.3
        let d = haus_metric(&[0.0, 1.0], &[0.2, 1.3], line_dist).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn descriptor_haus_examples() {
        let space = PointSet::line(&[0.0]).unwrap();
        let a = SetDescriptor::Interval { lo: 0.0, hi: 1.0 };
        let b = SetDescriptor::Interval { lo: 0.2, hi: 1.0 };
        let probe = PointSet::line(&[0.0]).unwrap();
        assert!((descriptor_haus(&space, &a, &b, &probe).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(descriptor_haus(&space, &a, &a, &probe).unwrap(), 0.0);

        let plane = PointSet::from_coords(2, vec![vec![0.0, 0.0]], Metric::Euclidean).unwrap();
        let step = 0.05;
        let mut grid = Vec::new();
        for i in -45..=45 {
            for j in -45..=45 {
                grid.push(vec![i as f64 * step, j as f64 * step]);
            }
        }
        let probe = PointSet::from_coords(2, grid, Metric::Euclidean).unwrap();
        let small = SetDescriptor::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let big = SetDescriptor::Ball {
            center: vec![0.0, 0.0],
            radius: 2.0,
        };
        let d = descriptor_haus(&plane, &small, &big, &probe).unwrap();
        assert!((d - 1.0).abs() <= step, "grid Hausdorff {d}");
        assert_eq!(descriptor_haus(&plane, &big, &big, &probe).unwrap(), 0.0);

        let far = SetDescriptor::Ball {
            center: vec![10.0, 10.0],
            radius: 0.01,
        };
        assert!(matches!(
            descriptor_haus(&plane, &small, &far, &probe),
            Err(Error::DegenerateProbe(_))
        ));
    }

    #[test]
    fn limit_membership_examples() {
        let space = PointSet::line(&[0.0]).unwrap();
        let shrinking = |n: usize| SetDescriptor::Ball {
            center: vec![0.0],
            radius: 1.0 + 1.0 / n as f64,
        };
        assert!(limit_membership(&space, &[1.0005], shrinking, 0.01, 1000, 2000).unwrap());

        let line: Vec<f64> = (0..=200).map(f64::from).collect();
        let space = PointSet::line(&line).unwrap();
        let escaping = |n: usize| SetDescriptor::Finite { indices: vec![n] };
        for x in [0.0, 3.0, 7.5] {
            assert!(!limit_membership(&space, &[x], escaping, 0.5, 10, 100).unwrap());
        }

        let fixed = |_: usize| SetDescriptor::Interval { lo: 0.0, hi: 1.0 };
        for eps in [1e-9, 0.1, 3.0] {
            assert!(limit_membership(&space, &[0.5], fixed, eps, 1, 50).unwrap());
        }
        assert!(limit_membership(&space, &[0.5], fixed, 0.1, 5, 5).is_err());
    }

    #[test]
    fn contrast_zero_iff_subset() {
        let a = [0.0, 2.0];
        let b = [0.0, 1.0, 2.0];
        assert_eq!(haus_contrast(&a, &b, line_dist).unwrap(), 0.0);
        assert!(haus_contrast(&b, &a, line_dist).unwrap() > 0.0);
    }
}
