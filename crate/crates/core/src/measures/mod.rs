//! Empirical measures, seeded generators and analytic 1-D measures.

pub mod rng;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::classes::SetDescriptor;
use crate::error::{arg, Result};
use crate::metric::{Metric, PointSet};
use crate::TOL;

pub use rng::SplitMix64;

/// Tolerance on the total weight of an empirical measure.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Weighted point set with weights summing to one.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    support: PointSet,
    weights: Vec<f64>,
    uniform: bool,
}

impl EmpiricalMeasure {
    pub fn uniform(support: PointSet) -> Self {
        let n = support.len();
        EmpiricalMeasure {
            support,
            weights: vec![1.0 / n as f64; n],
            uniform: true,
        }
    }

    pub fn weighted(support: PointSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != support.len() {
            return arg(format!(
                "{} weights for {} points",
                weights.len(),
                support.len()
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return arg("weights must be finite and non-negative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return arg(format!("weights sum to {total}, expected 1"));
        }
        Ok(EmpiricalMeasure {
            support,
            weights,
            uniform: false,
        })
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Uniform measures report masses as exact ratios `count / n`.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Mass of a set of support indices given in increasing order.
    pub fn mass_of_sorted(&self, idx: &[usize]) -> f64 {
        if self.uniform {
            idx.len() as f64 / self.len() as f64
        } else {
            idx.iter().map(|&i| self.weights[i]).sum()
        }
    }

    /// Restriction to the first `n` points, renormalized uniformly.
    pub fn prefix(&self, n: usize) -> Result<EmpiricalMeasure> {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        Ok(EmpiricalMeasure::uniform(self.support.subset(&idx)?))
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Inverse CDF of the tilted density `1 + x/n` on `(-1/2, 1/2)`.
pub fn tilted_inverse(n: f64, u: f64) -> f64 {
    let c = u - 0.5 + 1.0 / (8.0 * n);
    2.0 * c / (1.0 + (1.0 + 2.0 * c / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Distribution {
    /// Uniform on the box `[lo, hi]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Isotropic Gaussian.
    Gaussian { mean: Vec<f64>, sd: f64 },
    Mixture { components: Vec<MixtureComponent> },
    /// Uniform on the circle of the given radius around the origin.
    Circle { radius: f64 },
    Tilted { n: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub component: Distribution,
}

impl Distribution {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::UniformBox { lo, .. } => lo.len(),
            Distribution::Gaussian { mean, .. } => mean.len(),
            Distribution::Mixture { components } => {
                components.first().map_or(0, |c| c.component.dim())
            }
            Distribution::Circle { .. } => 2,
            Distribution::Tilted { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::UniformBox { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return arg("uniform box needs corners of equal, positive dimension");
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
                    return arg("uniform box needs finite lo < hi in every coordinate");
                }
            }
            Distribution::Gaussian { mean, sd } => {
                if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
                    return arg("gaussian needs a finite, non-empty mean");
                }
                if !(sd.is_finite() && *sd > 0.0) {
                    return arg("gaussian needs sd > 0");
                }
            }
            Distribution::Mixture { components } => {
                if components.is_empty() {
                    return arg("mixture needs at least one component");
                }
                let d = components[0].component.dim();
                let mut total = 0.0;
                for c in components {
                    c.component.validate()?;
                    if c.component.dim() != d {
                        return arg("mixture components must share a dimension");
                    }
                    if !(c.weight.is_finite() && c.weight >= 0.0) {
                        return arg("mixture weights must be non-negative");
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return arg(format!("mixture weights sum to {total}, expected 1"));
                }
            }
            Distribution::Circle { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return arg("circle needs radius > 0");
                }
            }
            Distribution::Tilted { n } => {
                if !(n.is_finite() && *n >= 1.0) {
                    return arg("tilted density needs n >= 1");
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut SplitMix64, out: &mut Vec<f64>) {
        match self {
            Distribution::UniformBox { lo, hi } => {
                for (a, b) in lo.iter().zip(hi) {
                    out.push(a + (b - a) * rng.next_open01());
                }
            }
            Distribution::Gaussian { mean, sd } => {
                for m in mean {
                    out.push(m + sd * normal_quantile(rng.next_open01()));
                }
            }
            Distribution::Mixture { components } => {
                let u = rng.next_open01();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                components[pick].component.draw(rng, out);
            }
            Distribution::Circle { radius } => {
                let theta = std::f64::consts::TAU * rng.next_open01();
                out.push(radius * theta.cos());
                out.push(radius * theta.sin());
            }
            Distribution::Tilted { n } => out.push(tilted_inverse(*n, rng.next_open01())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Chain {
    #[default]
    Iid,
    /// Gaussian AR(1), coordinatewise: `X' = rho X + sqrt(1 - rho^2) Z`.
    Ar1 { rho: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub distribution: Distribution,
    #[serde(default)]
    pub chain: Chain,
    pub seed: u64,
}

impl Generator {
    pub fn iid(distribution: Distribution, seed: u64) -> Self {
        Generator {
            distribution,
            chain: Chain::Iid,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Generator {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if let Chain::Ar1 { rho } = self.chain {
            if !(rho.is_finite() && rho.abs() < 1.0) {
                return arg("ar1 needs |rho| < 1");
            }
            if !matches!(self.distribution, Distribution::Gaussian { .. }) {
                return arg("ar1 chains are defined for gaussian distributions only");
            }
        }
        Ok(())
    }

    /// Flat coordinates of the first `n` states; prefixes agree across `n`.
    pub fn draw_flat(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if n == 0 {
            return arg("sample size must be at least 1");
        }
        let d = self.distribution.dim();
        let mut rng = SplitMix64::new(self.seed);
        let mut out = Vec::with_capacity(n * d);
        match (&self.chain, &self.distribution) {
            (Chain::Iid, dist) => {
                for _ in 0..n {
                    dist.draw(&mut rng, &mut out);
                }
            }
            (Chain::Ar1 { rho }, Distribution::Gaussian { mean, sd }) => {
                let innov = (1.0 - rho * rho).sqrt();
                let mut y: Vec<f64> = Vec::with_capacity(d);
                for _ in 0..d {
                    y.push(normal_quantile(rng.next_open01()));
                }
                for step in 0..n {
                    if step > 0 {
                        for yk in y.iter_mut() {
                            *yk = rho * *yk + innov * normal_quantile(rng.next_open01());
                        }
                    }
                    out.extend(mean.iter().zip(&y).map(|(m, yk)| m + sd * yk));
                }
            }
            (Chain::Ar1 { .. }, _) => unreachable!("rejected by validate"),
        }
        Ok(out)
    }
}

/// Draws `n` points and returns their uniform empirical measure.
pub fn sample(gen: &Generator, n: usize) -> Result<EmpiricalMeasure> {
    let flat = gen.draw_flat(n)?;
    let support = PointSet::from_flat(gen.distribution.dim(), flat, Metric::Euclidean)?;
    Ok(EmpiricalMeasure::uniform(support))
}

/// A 1-D probability measure with closed-form CDF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "density", rename_all = "kebab-case")]
pub enum Analytic1DMeasure {
    Uniform { a: f64, b: f64 },
    /// Density `1 + x/n` on `(-1/2, 1/2)`.
    Tilted { n: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl Analytic1DMeasure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Analytic1DMeasure::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return arg("uniform density needs finite a < b");
                }
            }
            Analytic1DMeasure::Tilted { n } => {
                if !(n.is_finite() && n >= 1.0) {
                    return arg("tilted density needs n >= 1");
                }
            }
            Analytic1DMeasure::Gaussian { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
                    return arg("gaussian needs finite mean and sd > 0");
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Analytic1DMeasure::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Analytic1DMeasure::Tilted { n } => {
                let x = x.clamp(-0.5, 0.5);
                (x + 0.5) + (x * x - 0.25) / (2.0 * n)
            }
            Analytic1DMeasure::Gaussian { mean, sd } => normal_cdf((x - mean) / sd),
        }
    }

    /// Log-density; `-inf` off the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Analytic1DMeasure::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Analytic1DMeasure::Tilted { n } => {
                if (-0.5..=0.5).contains(&x) {
                    (x / n).ln_1p()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Analytic1DMeasure::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - 0.5 * (std::f64::consts::TAU).ln()
            }
        }
    }

    /// Bounded range outside of which the mass is negligible (or zero).
    pub fn search_range(&self) -> (f64, f64) {
        match *self {
            Analytic1DMeasure::Uniform { a, b } => (a, b),
            Analytic1DMeasure::Tilted { .. } => (-0.5, 0.5),
            Analytic1DMeasure::Gaussian { mean, sd } => (mean - 40.0 * sd, mean + 40.0 * sd),
        }
    }

    /// `mu([a, b])`.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return arg(format!("interval needs a <= b, got [{a}, {b}]"));
        }
        Ok((self.cdf(b) - self.cdf(a)).max(0.0))
    }

    pub fn generator_for(&self, seed: u64) -> Generator {
        let distribution = match *self {
            Analytic1DMeasure::Uniform { a, b } => Distribution::UniformBox {
                lo: vec![a],
                hi: vec![b],
            },
            Analytic1DMeasure::Tilted { n } => Distribution::Tilted { n },
            Analytic1DMeasure::Gaussian { mean, sd } => Distribution::Gaussian {
                mean: vec![mean],
                sd,
            },
        };
        Generator::iid(distribution, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallestInterval {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    /// Set when the shortest interval is not unique (flat densities).
    pub non_unique: bool,
}

impl SmallestInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Interval {
            lo: self.lo,
            hi: self.hi,
        }
    }
}

/// Left endpoint maximizing `mu([a, a + len])` for a unimodal density.
///
/// The mass is maximal where the density is equal at both ends, so the
/// search bisects on the sign of `log f(a + len) - log f(a)`. On plateaus the
/// leftmost endpoint wins.
fn best_left(m: &Analytic1DMeasure, len: f64) -> f64 {
    let (slo, shi) = m.search_range();
    let right = (shi - len).max(slo);
    let slope = |a: f64| m.log_pdf(a + len) - m.log_pdf(a);
    if !(slope(slo) > 0.0) {
        return slo;
    }
    if slope(right) >= 0.0 {
        return right;
    }
    let (mut lo, mut hi) = (slo, right);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Shortest interval with mass at least `target`, by bisection on the length
/// with a best-placement sweep of the left endpoint for each trial length.
pub fn smallest_interval(
    m: &Analytic1DMeasure,
    target: f64,
    tol: f64,
) -> Result<SmallestInterval> {
    m.validate()?;
    if !(target > 0.0 && target < 1.0) {
        return arg(format!("target mass must lie in (0, 1), got {target}"));
    }
    if !(tol > 0.0) {
        return arg("tol must be positive");
    }
    let (slo, shi) = m.search_range();
    let placed = |len: f64| {
        let a = best_left(m, len);
        (a, m.cdf(a + len) - m.cdf(a))
    };
    let (mut lo, mut hi) = (0.0, shi - slo);
    let limit = (tol * 1e-3).max(f64::EPSILON * (shi - slo));
    while hi - lo > limit {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if placed(mid).1 >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (a, mass) = placed(hi);
    Ok(SmallestInterval {
        lo: a,
        hi: a + hi,
        mass,
        non_unique: matches!(m, Analytic1DMeasure::Uniform { .. }),
    })
}

/// Whether the analytic interval's mass clears `1 - alpha` within tolerance.
pub fn analytic_meets(m: &Analytic1DMeasure, lo: f64, hi: f64, alpha: f64) -> bool {
    m.interval_mass(lo, hi).map_or(false, |x| x + TOL >= 1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn uniform_box_mean() {
        let g = Generator::iid(
            Distribution::UniformBox {
                lo: vec![0.0],
                hi: vec![1.0],
            },
            7,
        );
        let xs = g.draw_flat(10_000).unwrap();
        let m = mean(&xs);
        assert!((0.48..=0.52).contains(&m), "{m}");
    }

    #[test]
    fn mixture_fraction() {
        let tight = |c: f64| MixtureComponent {
            weight: 0.5,
            component: Distribution::Gaussian {
                mean: vec![c],
                sd: 0.01,
            },
        };
        let g = Generator::iid(
            Distribution::Mixture {
                components: vec![tight(0.0), tight(10.0)],
            },
            11,
        );
        let xs = g.draw_flat(1000).unwrap();
        let near = xs.iter().filter(|x| x.abs() <= 1.0).count() as f64 / 1000.0;
        assert!((0.45..=0.55).contains(&near), "{near}");
    }

    fn gaussian(chain: Chain, seed: u64) -> Generator {
        Generator {
            distribution: Distribution::Gaussian {
                mean: vec![0.0],
                sd: 1.0,
            },
            chain,
            seed,
        }
    }

    #[test]
    fn ar1_stationary_variance() {
        let xs = gaussian(Chain::Ar1 { rho: 0.9 }, 5)
            .draw_flat(100_000)
            .unwrap();
        let m = mean(&xs);
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((0.95..=1.05).contains(&v), "{v}");
    }

    #[test]
    fn ar1_without_correlation_is_iid() {
        let a = gaussian(Chain::Ar1 { rho: 0.0 }, 9).draw_flat(500).unwrap();
        let b = gaussian(Chain::Iid, 9).draw_flat(500).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn prefixes_and_reproducibility() {
        let g = gaussian(Chain::Ar1 { rho: 0.5 }, 1);
        let long = g.draw_flat(200).unwrap();
        let short = g.draw_flat(50).unwrap();
        assert_eq!(&long[..50], &short[..]);
        assert_eq!(g.draw_flat(200).unwrap(), long);
    }

    #[test]
    fn normal_functions_agree_with_statrs() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::standard();
        for &p in &[1e-10, 0.01, 0.25, 0.5, 0.875, 0.999] {
            let z = normal_quantile(p);
            assert!((n.cdf(z) - p).abs() < 1e-12 * p.max(1e-3) * 1e3, "{p}");
        }
        assert!((normal_cdf(1.0) - n.cdf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn tilted_sampler_matches_mass() {
        let n = 2.0;
        let m = Analytic1DMeasure::Tilted { n };
        let xs = Generator::iid(Distribution::Tilted { n }, 3)
            .draw_flat(100_000)
            .unwrap();
        for &(a, b) in &[(-0.5, 0.0), (0.1, 0.4), (-0.3, 0.45)] {
            let emp = xs.iter().filter(|&&x| a <= x && x <= b).count() as f64 / 1e5;
            assert!((emp - m.interval_mass(a, b).unwrap()).abs() < 0.01);
        }
        for &u in &[1e-9, 0.3, 0.5, 0.999_999] {
            assert!((m.cdf(tilted_inverse(n, u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_mass_examples() {
        let u = Analytic1DMeasure::Uniform { a: 0.0, b: 1.0 };
        assert!((u.interval_mass(0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
        for n in [1.0, 3.0, 50.0] {
            let t = Analytic1DMeasure::Tilted { n };
            assert!((t.interval_mass(-0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        }
        let t1 = Analytic1DMeasure::Tilted { n: 1.0 };
        assert!((t1.interval_mass(0.0, 0.5).unwrap() - 0.625).abs() < 1e-15);
        assert!(u.interval_mass(0.7, 0.2).is_err());
        let g = Analytic1DMeasure::Gaussian { mean: 0.0, sd: 1.0 };
        let ab = g.interval_mass(-1.0, 0.3).unwrap();
        let split = g.interval_mass(-1.0, -0.2).unwrap() + g.interval_mass(-0.2, 0.3).unwrap();
        assert!((ab - split).abs() < 1e-15);
    }

    #[test]
    fn smallest_uniform_is_leftmost() {
        let u = Analytic1DMeasure::Uniform { a: 0.0, b: 1.0 };
        let s = smallest_interval(&u, 0.75, 1e-12).unwrap();
        assert!((s.length() - 0.75).abs() < 1e-12);
        assert!(s.lo.abs() < 1e-12);
        assert!(s.non_unique);
    }

    #[test]
    fn smallest_tilted_is_rightmost() {
        let n = 5.0;
        let t = Analytic1DMeasure::Tilted { n };
        let s = smallest_interval(&t, 0.75, 1e-12).unwrap();
        // the left endpoint solves F(x) = 1/4, found here by plain bisection
        let (mut lo, mut hi) = (-0.5f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (mid + 0.5) + (mid * mid - 0.25) / (2.0 * n) < 0.25 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((s.hi - 0.5).abs() < 1e-12);
        assert!((s.lo - hi).abs() < 1e-10, "{} vs {hi}", s.lo);
        let delta = s.lo + 0.25;
        assert!(delta > 0.019 && delta < 0.02, "{delta}");
        assert!(!s.non_unique);
    }

    #[test]
    fn smallest_gaussian_is_symmetric() {
        let g = Analytic1DMeasure::Gaussian { mean: 0.0, sd: 1.0 };
        let s = smallest_interval(&g, 0.5, 1e-12).unwrap();
        let q = 0.674_489_750_196_081_7;
        assert!((s.lo + q).abs() < 1e-9 && (s.hi - q).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn generator_json() {
        let g = gaussian(Chain::Ar1 { rho: 0.5 }, 3);
        let s = serde_json::to_string(&g).unwrap();
        let back: Generator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let plain: Generator = serde_json::from_str(
            r#"{"distribution":{"kind":"circle","radius":2.0},"seed":4}"#,
        )
        .unwrap();
        assert_eq!(plain.chain, Chain::Iid);
    }
}
