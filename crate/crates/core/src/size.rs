//! Packing sizes `tau(B) = integral over (0, t_max] of phi(t) M(B, t) dt`.

use serde::{Deserialize, Serialize};

use crate::classes::{cartesian, grid_axis, Family, SetDescriptor};
use crate::error::{arg, Error, Result};
use crate::metric::{Metric, PointSet};
use crate::packing::{packing_profile, PackingProfile};
use crate::TOL;

/// Largest number of grid points the grid backend will materialize.
pub const GRID_POINT_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// `phi(t) = t`
    Linear,
    /// `phi(t) = 1`
    Constant,
    /// `phi(t) = t^p`, `p > 0`
    Power(f64),
}

impl Weight {
    /// Exponent `p` with `phi(t) = t^p`.
    pub fn exponent(self) -> f64 {
        match self {
            Weight::Linear => 1.0,
            Weight::Constant => 0.0,
            Weight::Power(p) => p,
        }
    }

    pub fn phi(self, t: f64) -> f64 {
        match self {
            Weight::Linear => t,
            Weight::Constant => 1.0,
            Weight::Power(p) => t.powf(p),
        }
    }

    /// `Phi(t) = integral of phi over (0, t]`.
    pub fn antiderivative(self, t: f64) -> f64 {
        match self {
            Weight::Linear => 0.5 * t * t,
            Weight::Constant => t,
            Weight::Power(p) => t.powf(p + 1.0) / (p + 1.0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FunctionalRepr {
    weight: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default = "default_t_max")]
    t_max: f64,
}

fn default_t_max() -> f64 {
    1.0
}

/// Weight `phi` and cutoff `t_max`. JSON: `{"weight":"linear","t_max":1.0}`,
/// with `"p"` for `"power"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalRepr", into = "FunctionalRepr")]
pub struct SizeFunctional {
    pub weight: Weight,
    pub t_max: f64,
}

impl Default for SizeFunctional {
    fn default() -> Self {
        SizeFunctional {
            weight: Weight::Linear,
            t_max: 1.0,
        }
    }
}

impl TryFrom<FunctionalRepr> for SizeFunctional {
    type Error = Error;
    fn try_from(r: FunctionalRepr) -> Result<Self> {
        let weight = Weight::parse(&r.weight, r.p)?;
        let f = SizeFunctional {
            weight,
            t_max: r.t_max,
        };
        f.validate()?;
        Ok(f)
    }
}

impl From<SizeFunctional> for FunctionalRepr {
    fn from(f: SizeFunctional) -> Self {
        let (weight, p) = match f.weight {
            Weight::Linear => ("linear", None),
            Weight::Constant => ("constant", None),
            Weight::Power(p) => ("power", Some(p)),
        };
        FunctionalRepr {
            weight: weight.into(),
            p,
            t_max: f.t_max,
        }
    }
}

impl Weight {
    /// `linear`, `constant`, `power` (with `p`) or `power:<p>`.
    pub fn parse(s: &str, p: Option<f64>) -> Result<Weight> {
        let w = match (s, p) {
            ("linear", None) => Weight::Linear,
            ("constant", None) => Weight::Constant,
            ("power", Some(p)) => Weight::Power(p),
            (other, None) if other.starts_with("power:") => {
                let p = other["power:".len()..]
                    .parse::<f64>()
                    .map_err(|_| Error::Argument(format!("bad power exponent in {other:?}")))?;
                Weight::Power(p)
            }
            ("power", None) => return arg("power weight needs an exponent p"),
            (other, _) => return arg(format!("unknown weight {other:?}")),
        };
        if let Weight::Power(p) = w {
            if !(p > 0.0 && p.is_finite()) {
                return arg(format!("power exponent must be positive, got {p}"));
            }
        }
        Ok(w)
    }
}

impl SizeFunctional {
    pub fn new(weight: Weight, t_max: f64) -> Result<Self> {
        let f = SizeFunctional { weight, t_max };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return arg(format!("t_max must be positive, got {}", self.t_max));
        }
        if let Weight::Power(p) = self.weight {
            if !(p > 0.0 && p.is_finite()) {
                return arg(format!("power exponent must be positive, got {p}"));
            }
        }
        Ok(())
    }

    /// Size of a single point: `Phi(t_max)`.
    pub fn point_value(&self) -> f64 {
        self.weight.antiderivative(self.t_max)
    }

    fn phi_cap(&self, t: f64) -> f64 {
        self.weight.antiderivative(t.min(self.t_max))
    }
}

/// Exact piecewise integral of a profile.
pub fn tau_of_profile(profile: &PackingProfile, f: &SizeFunctional) -> f64 {
    let mut lo = 0.0;
    let mut total = 0.0;
    for (k, &v) in profile.values.iter().enumerate() {
        if lo >= f.t_max {
            break;
        }
        let hi = profile.breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
        total += v as f64 * (f.phi_cap(hi) - f.phi_cap(lo));
        lo = hi;
    }
    total
}

/// Hurwitz zeta `sum_{k >= 0} (q + k)^(-s)` for `s > 1`, `q > 0`, by
/// Euler-Maclaurin summation after shifting `q` past 10.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    // B_{2j} / (2j)!
    const B2J: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    const N: usize = 10;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times a^(-s-2j+1)
    let mut fac = s;
    let mut pow = a.powf(-s - 1.0);
    for (j, b) in B2J.iter().enumerate() {
        sum += b * fac * pow;
        let m = 2.0 * j as f64 + s;
        fac *= (m + 1.0) * (m + 2.0);
        pow /= a * a;
    }
    sum
}

/// `tau([0, L])`, using `M([0, L], t) = max(1, ceil(L / t))`.
///
/// Layer by layer, `tau = Phi(t_max) + sum_{k >= 1} Phi(min(t_max, L/k))`.
pub fn tau_interval(length: f64, f: &SizeFunctional) -> Result<f64> {
    if !(length >= 0.0 && length.is_finite()) {
        return arg(format!("interval length must be finite and >= 0, got {length}"));
    }
    if length == 0.0 {
        return Ok(f.point_value());
    }
    let p = f.weight.exponent();
    if p == 0.0 {
        return Err(Error::Divergent(format!(
            "constant weight gives infinite size to an interval of length {length}"
        )));
    }
    // layers with L/k >= t_max contribute Phi(t_max) each
    let j = (length / f.t_max).floor();
    let head = (1.0 + j) * f.point_value();
    let tail = length.powf(p + 1.0) / (p + 1.0) * hurwitz_zeta(p + 1.0, j + 1.0);
    Ok(head + tail)
}

/// How a descriptor's size is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum Backend {
    /// Exact profile of a finite subset.
    Finite,
    /// Closed form for intervals of the real line.
    IntervalExact,
    /// Exact profile of the descriptor's trace on the grid `step * Z^d`.
    Grid { step: f64 },
    /// Exact profile of the descriptor's trace on the sample support.
    Sample,
}

impl Backend {
    /// `finite`, `interval-exact`, `sample`, or `grid:<step>`.
    pub fn parse(s: &str) -> Result<Backend> {
        Ok(match s {
            "finite" => Backend::Finite,
            "interval-exact" => Backend::IntervalExact,
            "sample" => Backend::Sample,
            other if other.starts_with("grid:") => {
                let step = other[5..]
                    .parse::<f64>()
                    .map_err(|_| Error::Argument(format!("bad grid step in {other:?}")))?;
                if !(step > 0.0 && step.is_finite()) {
                    return arg("grid step must be positive");
                }
                Backend::Grid { step }
            }
            other => return arg(format!("unknown backend {other:?}")),
        })
    }

    pub fn label(&self) -> String {
        match self {
            Backend::Finite => "finite".into(),
            Backend::IntervalExact => "interval-exact".into(),
            Backend::Sample => "sample".into(),
            Backend::Grid { step } => format!("grid:{step}"),
        }
    }

    /// Default backend of a family on a given support.
    pub fn default_for(family: &Family, space: &PointSet) -> Backend {
        match family {
            Family::FiniteSubsets => Backend::Finite,
            Family::SeparatedUnion { .. } => Backend::Sample,
            Family::Intervals | Family::Balls | Family::Boxes if space.is_line() => {
                Backend::IntervalExact
            }
            _ => Backend::Grid { step: 0.1 },
        }
    }

    /// Absolute tolerance for comparing sizes computed with this backend.
    pub fn tolerance(&self) -> f64 {
        match self {
            Backend::Grid { step } => 5.0 * step,
            _ => 1e-9,
        }
    }
}

/// Points of `step * Z^d` inside `b`, plus its anchors, as a point set.
pub fn grid_trace(b: &SetDescriptor, space: &PointSet, step: f64) -> Result<PointSet> {
    if !(step > 0.0 && step.is_finite()) {
        return arg("grid step must be positive");
    }
    let (lo, hi) = b.bounding_box(space)?;
    let d = lo.len();
    let axes: Vec<Vec<f64>> = (0..d).map(|k| grid_axis(lo[k], hi[k], step)).collect();
    let count: u128 = axes.iter().map(|a| a.len() as u128).product();
    if count > GRID_POINT_CAP {
        return Err(Error::Capacity {
            what: "grid points",
            count,
            cap: GRID_POINT_CAP,
        });
    }
    let metric = space.metric().unwrap_or(Metric::Euclidean);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for p in cartesian(&axes) {
        if b.contains(&p, space)? {
            pts.push(p);
        }
    }
    for a in b.anchors() {
        if b.contains(&a, space)? && !pts.iter().any(|p| metric.dist(p, &a) <= TOL) {
            pts.push(a);
        }
    }
    if pts.is_empty() {
        return Err(Error::DegenerateProbe(
            "descriptor contains no grid point".into(),
        ));
    }
    PointSet::from_coords(d, pts, metric)
}

/// Support points of `space` inside `b`, as a subset.
pub fn sample_trace(b: &SetDescriptor, space: &PointSet) -> Result<PointSet> {
    let mut idx = Vec::new();
    for i in 0..space.len() {
        if b.contains_index(i, space)? {
            idx.push(i);
        }
    }
    if idx.is_empty() {
        return Err(Error::DegenerateProbe(
            "descriptor contains no sample point".into(),
        ));
    }
    space.subset(&idx)
}

/// `tau(B)` under the chosen backend. `space` is the ambient sample: finite
/// subsets index into it and the sample backend intersects with it.
pub fn tau_of_descriptor(
    b: &SetDescriptor,
    space: &PointSet,
    f: &SizeFunctional,
    backend: &Backend,
    packing_cap: usize,
) -> Result<f64> {
    f.validate()?;
    match backend {
        Backend::Finite => match b {
            SetDescriptor::Finite { indices } => {
                b.validate(space)?;
                let sub = space.subset(indices)?;
                Ok(tau_of_profile(&packing_profile(&sub, packing_cap)?, f))
            }
            _ => arg("finite backend needs a finite-subset descriptor"),
        },
        Backend::IntervalExact => {
            if space.metric() == Some(Metric::Wrap1d) {
                return arg("interval-exact backend does not apply under the wrap-1d metric");
            }
            let (lo, hi) = match b {
                SetDescriptor::Interval { lo, hi } => (*lo, *hi),
                SetDescriptor::Ball { center, radius } if center.len() == 1 => {
                    (center[0] - radius, center[0] + radius)
                }
                SetDescriptor::Box { min, max } if min.len() == 1 => (min[0], max[0]),
                _ => return arg("interval-exact backend needs a 1-D interval"),
            };
            b.validate(space)?;
            tau_interval(hi - lo, f)
        }
        Backend::Grid { step } => {
            b.validate(space)?;
            let trace = grid_trace(b, space, *step)?;
            Ok(tau_of_profile(&packing_profile(&trace, packing_cap)?, f))
        }
        Backend::Sample => {
            b.validate(space)?;
            let trace = sample_trace(b, space)?;
            Ok(tau_of_profile(&packing_profile(&trace, packing_cap)?, f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lin() -> SizeFunctional {
        SizeFunctional::default()
    }

    fn line(xs: &[f64]) -> PointSet {
        PointSet::line(xs).unwrap()
    }

    // Simpson's rule on each piece between consecutive breakpoints L/k, with
    // the remainder near 0 bounded by ceil(L/t) in [L/t, L/t + 1]
    fn quadrature_interval(len: f64, f: &SizeFunctional) -> f64 {
        let p = f.weight.exponent();
        let mut total = 0.0;
        let mut hi = f.t_max;
        let mut k = (len / f.t_max).ceil().max(1.0);
        while k < 20_000.0 {
            let lo = (len / k).min(hi);
            let pieces = 64;
            let h = (hi - lo) / pieces as f64;
            // M is constant on the open piece; read it at the midpoint
            let m = (len / (0.5 * (lo + hi))).ceil().max(1.0);
            for i in 0..pieces {
                let a = lo + i as f64 * h;
                let w = &f.weight;
                total += m * h / 6.0 * (w.phi(a) + 4.0 * w.phi(a + 0.5 * h) + w.phi(a + h));
            }
            hi = lo;
            k += 1.0;
        }
        total + len * hi.powf(p) / p + 0.5 * f.weight.antiderivative(hi)
    }

    #[test]
    fn profile_integrals() {
        assert_eq!(tau_of_profile(&PackingProfile::point(), &lin()), 0.5);
        let two = packing_profile(&line(&[0.0, 0.5]), 64).unwrap();
        assert!((tau_of_profile(&two, &lin()) - 0.625).abs() < 1e-15);
        let far = packing_profile(&line(&[0.0, 1.5]), 64).unwrap();
        assert_eq!(tau_of_profile(&far, &lin()), 1.0);
    }

    #[test]
    fn interval_closed_form() {
        assert_eq!(tau_interval(0.0, &lin()).unwrap(), 0.5);
        let v = tau_interval(1.0, &lin()).unwrap();
        assert!((v - (0.5 + PI * PI / 12.0)).abs() < 1e-13, "{v}");
        let half = tau_interval(0.5, &lin()).unwrap();
        assert!(half > 0.5 && half < v);
        assert!(tau_interval(-1.0, &lin()).is_err());
        let c = SizeFunctional::new(Weight::Constant, 1.0).unwrap();
        assert!(matches!(tau_interval(0.3, &c), Err(Error::Divergent(_))));
        assert_eq!(tau_interval(0.0, &c).unwrap(), 1.0);
    }

    #[test]
    fn interval_matches_quadrature() {
        for &(len, w, tmax) in &[
            (1.0, Weight::Linear, 1.0),
            (0.37, Weight::Linear, 1.0),
            (2.5, Weight::Linear, 0.7),
            (0.8, Weight::Power(2.0), 1.0),
            (1.3, Weight::Power(0.5), 2.0),
        ] {
            let f = SizeFunctional::new(w, tmax).unwrap();
            let exact = tau_interval(len, &f).unwrap();
            let quad = quadrature_interval(len, &f);
            assert!((exact - quad).abs() < 1e-6, "{len} {w:?}: {exact} vs {quad}");
        }
    }

    #[test]
    fn zeta_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        let direct: f64 = (0..2_000_000).map(|k| (3.5 + k as f64).powf(-3.0)).sum();
        assert!((hurwitz_zeta(3.0, 3.5) - direct).abs() < 1e-12);
    }

    #[test]
    fn interval_is_monotone_and_continuous() {
        let mut prev = tau_interval(0.0, &lin()).unwrap();
        for i in 1..=1000 {
            let v = tau_interval(i as f64 * 1e-3, &lin()).unwrap();
            assert!(v > prev);
            // slope is L * zeta(2, J + 1) <= pi^2 / 6 on (0, 1]
            assert!(v - prev < 1.7e-3);
            prev = v;
        }
    }

    #[test]
    fn descriptor_routes() {
        let s = line(&[0.0, 1.0, 2.0]);
        let exact = tau_of_descriptor(
            &SetDescriptor::Interval { lo: 0.2, hi: 1.2 },
            &s,
            &lin(),
            &Backend::IntervalExact,
            64,
        )
        .unwrap();
        assert!((exact - 1.322_467_0).abs() < 1e-7);
        let fin = tau_of_descriptor(
            &SetDescriptor::Finite {
                indices: vec![0, 1, 2],
            },
            &s,
            &lin(),
            &Backend::Finite,
            64,
        )
        .unwrap();
        assert_eq!(fin, 1.5);
        let grid = tau_of_descriptor(
            &SetDescriptor::ball(vec![0.0], 0.5),
            &s,
            &lin(),
            &Backend::Grid { step: 1e-3 },
            64,
        )
        .unwrap();
        assert!((grid - 1.322_467_0).abs() < 5e-3, "{grid}");
        assert!(tau_of_descriptor(
            &SetDescriptor::ball(vec![0.0], 0.5),
            &s,
            &lin(),
            &Backend::Finite,
            64
        )
        .is_err());
    }

    #[test]
    fn functional_json() {
        let f: SizeFunctional = serde_json::from_str(r#"{"weight":"linear","t_max":1.0}"#).unwrap();
        assert_eq!(f, lin());
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"weight":"linear","t_max":1.0}"#);
        let p: SizeFunctional =
            serde_json::from_str(r#"{"weight":"power","p":2.0,"t_max":0.5}"#).unwrap();
        assert_eq!(p.weight, Weight::Power(2.0));
        assert!(serde_json::from_str::<SizeFunctional>(r#"{"weight":"power","p":-1}"#).is_err());
        assert_eq!(Backend::parse("grid:0.05").unwrap(), Backend::Grid { step: 0.05 });
    }
}
