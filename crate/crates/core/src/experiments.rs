//! Desk-scale checks of the asymptotic behaviour of empirical minimizers:
//! consistency sweeps, the size sandwich, continuity in `alpha` and the
//! tilted-density counterexample.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{ClassSpec, SetDescriptor};
use crate::error::{arg, Error, Result};
use crate::localize::{solve, LocalizationProblem, MeasureInput, DEFAULT_SLACK, TIE_TOL};
use crate::measures::{
    rng::stream_seed, smallest_interval, Analytic1DMeasure, Chain, Distribution, EmpiricalMeasure,
    Generator,
};
use crate::metric::{haus_contrast, Metric, PointSet};
use crate::packing::Caps;
use crate::size::{tau_interval, tau_of_descriptor, Backend, SizeFunctional};

/// Stream index of the high-n reference run.
const REFERENCE_STREAM: u64 = u64::MAX;

/// Intervals `[c, c + len]` for `c` in `[cmin, cmax]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub len: f64,
    pub cmin: f64,
    pub cmax: f64,
}

/// Hausdorff distance between two intervals.
pub fn interval_haus(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

impl IntervalFamily {
    pub fn single(lo: f64, hi: f64) -> Self {
        IntervalFamily {
            len: hi - lo,
            cmin: lo,
            cmax: lo,
        }
    }

    /// `inf` over the family of the distance to `[a, b]`. The objective is
    /// convex in `c` with its minimum where both endpoint gaps balance.
    pub fn dist_from(&self, (a, b): (f64, f64)) -> f64 {
        let c = (0.5 * (a + b - self.len)).clamp(self.cmin, self.cmax);
        interval_haus((a, b), (c, c + self.len))
    }

    /// `Haus(self | other)`: the supremum of a convex function of `c` sits
    /// at an end of the range.
    pub fn contrast_to(&self, other: &IntervalFamily) -> f64 {
        [self.cmin, self.cmax]
            .iter()
            .map(|&c| other.dist_from((c, c + self.len)))
            .fold(0.0, f64::max)
    }
}

/// Minimizer family of an analytic measure at level `alpha`.
pub fn population_family(m: &Analytic1DMeasure, alpha: f64) -> Result<IntervalFamily> {
    let s = smallest_interval(m, 1.0 - alpha, 1e-12)?;
    Ok(match *m {
        Analytic1DMeasure::Uniform { b, .. } => IntervalFamily {
            len: s.length(),
            cmin: s.lo,
            cmax: b - s.length(),
        },
        _ => IntervalFamily::single(s.lo, s.hi),
    })
}

fn as_intervals(sets: &[SetDescriptor], space: &PointSet) -> Result<Vec<(f64, f64)>> {
    sets.iter()
        .map(|b| {
            b.as_line_interval(space).ok_or_else(|| {
                Error::Argument("contrast to a population family needs 1-D intervals".into())
            })
        })
        .collect()
}

/// `Haus(A | B)` between two near-minimizer sets of the same sample:
/// closed interval form on a line, Hausdorff distance of index sets for
/// finite subsets.
pub fn set_family_contrast(a: &[SetDescriptor], b: &[SetDescriptor], space: &PointSet) -> Result<f64> {
    if let (Ok(ia), Ok(ib)) = (as_intervals(a, space), as_intervals(b, space)) {
        return haus_contrast(&ia, &ib, |x, y| interval_haus(*x, *y));
    }
    let finite = |s: &[SetDescriptor]| -> Option<Vec<Vec<usize>>> {
        s.iter()
            .map(|d| match d {
                SetDescriptor::Finite { indices } => Some(indices.clone()),
                _ => None,
            })
            .collect()
    };
    match (finite(a), finite(b)) {
        (Some(fa), Some(fb)) => haus_contrast(&fa, &fb, |x, y| {
            space.haus_metric(x, y).expect("indices validated by the solver")
        }),
        _ => arg("near-minimizer contrast needs intervals or finite subsets"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub generator: Generator,
    pub class: ClassSpec,
    #[serde(default)]
    pub functional: SizeFunctional,
    pub alpha: f64,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Population measure; derived from the generator when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Analytic1DMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
}

fn default_slack() -> f64 {
    DEFAULT_SLACK
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.class.validate()?;
        self.functional.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return arg(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return arg("n_list must be non-empty with positive sizes");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return arg("n_list must be strictly increasing");
        }
        if self.replications == 0 {
            return arg("replications must be at least 1");
        }
        if !(self.slack >= 0.0) {
            return arg("slack must be >= 0");
        }
        Ok(())
    }

    pub fn max_n(&self) -> usize {
        *self.n_list.last().unwrap()
    }

    /// Generator of replicate `r`.
    pub fn replicate(&self, r: usize) -> Generator {
        self.generator.with_seed(stream_seed(self.seed, r as u64))
    }

    /// The invariant law of the generator, when it is an analytic 1-D law.
    pub fn population_measure(&self) -> Option<Analytic1DMeasure> {
        if self.population.is_some() {
            return self.population.clone();
        }
        match &self.generator.distribution {
            Distribution::UniformBox { lo, hi } if lo.len() == 1 => {
                Some(Analytic1DMeasure::Uniform { a: lo[0], b: hi[0] })
            }
            Distribution::Gaussian { mean, sd } if mean.len() == 1 => {
                Some(Analytic1DMeasure::Gaussian {
                    mean: mean[0],
                    sd: *sd,
                })
            }
            Distribution::Tilted { n } => Some(Analytic1DMeasure::Tilted { n: *n }),
            _ => None,
        }
    }

    fn problem(&self, mu: EmpiricalMeasure, alpha: f64) -> LocalizationProblem {
        let mut p = LocalizationProblem::empirical(mu, self.class.clone(), alpha);
        p.functional = self.functional;
        if let Some(b) = self.backend {
            p.backend = b;
        }
        p.caps = Caps::default();
        p
    }

    fn sample(&self, gen: &Generator, n: usize) -> Result<EmpiricalMeasure> {
        let d = gen.distribution.dim();
        let flat = gen.draw_flat(n)?;
        Ok(EmpiricalMeasure::uniform(PointSet::from_flat(
            d,
            flat,
            Metric::Euclidean,
        )?))
    }
}

/// What empirical minimizers are compared against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Reference {
    Analytic { family: IntervalFamily, tau: f64 },
    /// Near-minimizers of a sample ten times larger than the largest `n`.
    Approximate { intervals: Vec<(f64, f64)>, tau: f64 },
}

impl Reference {
    pub fn tau(&self) -> f64 {
        match self {
            Reference::Analytic { tau, .. } | Reference::Approximate { tau, .. } => *tau,
        }
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self, Reference::Approximate { .. })
    }

    /// `Haus(found | reference)`.
    pub fn contrast(&self, found: &[(f64, f64)]) -> Result<f64> {
        match self {
            Reference::Analytic { family, .. } => {
                if found.is_empty() {
                    return arg("empty near-minimizer set");
                }
                Ok(found.iter().map(|&i| family.dist_from(i)).fold(0.0, f64::max))
            }
            Reference::Approximate { intervals, .. } => {
                haus_contrast(found, intervals, |x, y| interval_haus(*x, *y))
            }
        }
    }
}

pub fn reference(cfg: &SweepConfig) -> Result<Reference> {
    if let Some(m) = cfg.population_measure() {
        let family = population_family(&m, cfg.alpha)?;
        let tau = tau_interval(family.len, &cfg.functional)?;
        return Ok(Reference::Analytic { family, tau });
    }
    let gen = cfg.generator.with_seed(stream_seed(cfg.seed, REFERENCE_STREAM));
    let mu = cfg.sample(&gen, 10 * cfg.max_n())?;
    let r = solve(&cfg.problem(mu.clone(), cfg.alpha), DEFAULT_SLACK)?;
    Ok(Reference::Approximate {
        intervals: as_intervals(&r.near_minimizers, mu.support())?,
        tau: r.tau,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub replicate: usize,
    /// `Haus(S_n | S)` with the configured slack.
    pub haus: f64,
    /// Same, restricted to exact minimizers.
    pub haus_exact: f64,
    pub tau_n: f64,
    pub tau_ref: f64,
    pub ms: u64,
}

fn run_one(
    cfg: &SweepConfig,
    reference: &Reference,
    r: usize,
    n: usize,
    timing: bool,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let mu = cfg.sample(&cfg.replicate(r), n)?;
    let p = cfg.problem(mu, cfg.alpha);
    let res = solve(&p, cfg.slack).map_err(|e| match e {
        Error::Infeasible { required, max_mass } => Error::Argument(format!(
            "replicate {r}, n = {n}: no feasible candidate (need {required}, max mass {max_mass})"
        )),
        other => other,
    })?;
    let MeasureInput::Empirical(mu) = &p.measure else {
        unreachable!()
    };
    let space = mu.support();
    let mut exact = Vec::new();
    for b in &res.near_minimizers {
        let t = tau_of_descriptor(b, space, &p.functional, &p.backend, p.caps.packing)?;
        if t <= res.tau + TIE_TOL {
            exact.push(b.clone());
        }
    }
    let haus = reference.contrast(&as_intervals(&res.near_minimizers, space)?)?;
    let haus_exact = reference.contrast(&as_intervals(&exact, space)?)?;
    Ok(SweepRecord {
        n,
        replicate: r,
        haus,
        haus_exact,
        tau_n: res.tau,
        tau_ref: reference.tau(),
        ms: if timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Samples, solves and compares every `(n, replicate)` pair. Replicate `r`
/// uses stream `r` of the seed and each `n` is a prefix of that stream.
pub fn consistency_sweep(cfg: &SweepConfig, timing: bool) -> Result<(Reference, Vec<SweepRecord>)> {
    cfg.validate()?;
    let reference = reference(cfg)?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();
    let out: Vec<Result<SweepRecord>> = jobs
        .par_iter()
        .map(|&(n, r)| run_one(cfg, &reference, r, n, timing))
        .collect();
    let mut records = out.into_iter().collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.n, r.replicate));
    Ok((reference, records))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: Vec<usize>,
    pub median_haus: Vec<f64>,
    pub median_haus_exact: Vec<f64>,
    pub median_tau_n: Vec<f64>,
    pub tau_ref: f64,
    /// Medians strictly decrease along the n-list.
    pub median_decreasing: bool,
    pub reference: String,
    pub chain: String,
}

pub fn summarize(cfg: &SweepConfig, reference: &Reference, records: &[SweepRecord]) -> SweepSummary {
    let by_n = |n: usize, f: fn(&SweepRecord) -> f64| -> f64 {
        median(
            &records
                .iter()
                .filter(|r| r.n == n)
                .map(f)
                .collect::<Vec<_>>(),
        )
    };
    let median_haus: Vec<f64> = cfg.n_list.iter().map(|&n| by_n(n, |r| r.haus)).collect();
    SweepSummary {
        n: cfg.n_list.clone(),
        median_decreasing: median_haus.windows(2).all(|w| w[1] < w[0]),
        median_haus,
        median_haus_exact: cfg.n_list.iter().map(|&n| by_n(n, |r| r.haus_exact)).collect(),
        median_tau_n: cfg.n_list.iter().map(|&n| by_n(n, |r| r.tau_n)).collect(),
        tau_ref: reference.tau(),
        reference: if reference.is_approximate() {
            "approximate (10x largest n, slack 1e-9)".into()
        } else {
            "analytic".into()
        },
        chain: match cfg.generator.chain {
            Chain::Iid => "iid".into(),
            Chain::Ar1 { rho } => format!("ar1(rho={rho}), an instance of an ergodic chain"),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub n: usize,
    pub eps: f64,
    pub tol: f64,
    /// `tau^alpha`
    pub lower: f64,
    /// `tau^(alpha - eps)`
    pub upper: f64,
    pub tau_n: Vec<f64>,
    pub violations: usize,
    pub violation_fraction: f64,
    /// Set when the sample is a single point and the check is skipped.
    pub small_n: bool,
}

/// Checks `tau^alpha - tol <= tau(B_n) <= tau^(alpha - eps) + tol` for each
/// replicate at the largest `n`.
pub fn sandwich_check(cfg: &SweepConfig, eps: f64, tol: f64) -> Result<SandwichReport> {
    cfg.validate()?;
    if !(eps > 0.0 && eps < cfg.alpha) {
        return arg(format!("eps must lie in (0, alpha), got {eps}"));
    }
    let m = cfg
        .population_measure()
        .ok_or_else(|| Error::Argument("sandwich bounds need an analytic population".into()))?;
    let lower = tau_interval(population_family(&m, cfg.alpha)?.len, &cfg.functional)?;
    let upper = tau_interval(population_family(&m, cfg.alpha - eps)?.len, &cfg.functional)?;
    let n = cfg.max_n();
    let taus: Vec<Result<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mu = cfg.sample(&cfg.replicate(r), n)?;
            Ok(solve(&cfg.problem(mu, cfg.alpha), 0.0)?.tau)
        })
        .collect();
    let tau_n = taus.into_iter().collect::<Result<Vec<_>>>()?;
    let small_n = n == 1;
    let violations = if small_n {
        0
    } else {
        tau_n
            .iter()
            .filter(|&&t| t < lower - tol || t > upper + tol)
            .count()
    };
    Ok(SandwichReport {
        n,
        eps,
        tol,
        lower,
        upper,
        violation_fraction: violations as f64 / tau_n.len() as f64,
        tau_n,
        violations,
        small_n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub alpha: f64,
    pub tau: f64,
    pub tau_shifted: f64,
    /// `Haus(S^(alpha + delta) | S^alpha)`
    pub haus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub delta: f64,
    pub rows: Vec<ContinuityRow>,
    pub max_tau_gap: f64,
    pub max_haus: f64,
}

/// Compares `tau^alpha` and the minimizer sets at `alpha` and `alpha + delta`.
pub fn alpha_continuity(
    p: &LocalizationProblem,
    alphas: &[f64],
    delta: f64,
    slack: f64,
) -> Result<ContinuityReport> {
    if !(delta > 0.0) {
        return arg("delta must be positive");
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &a in alphas {
        if !(a > 0.0 && a + delta < 1.0) {
            return arg(format!("alpha {a} + delta must stay inside (0, 1)"));
        }
        let (r0, r1) = (solve(&p.with_alpha(a), slack)?, solve(&p.with_alpha(a + delta), slack)?);
        let haus = match &p.measure {
            MeasureInput::Analytic(m) => {
                population_family(m, a + delta)?.contrast_to(&population_family(m, a)?)
            }
            MeasureInput::Empirical(mu) => {
                set_family_contrast(&r1.near_minimizers, &r0.near_minimizers, mu.support())?
            }
        };
        rows.push(ContinuityRow {
            alpha: a,
            tau: r0.tau,
            tau_shifted: r1.tau,
            haus,
        });
    }
    Ok(ContinuityReport {
        delta,
        max_tau_gap: rows
            .iter()
            .map(|r| (r.tau_shifted - r.tau).abs())
            .fold(0.0, f64::max),
        max_haus: rows.iter().map(|r| r.haus).fold(0.0, f64::max),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverseRow {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    /// `Haus(S_n | S)`
    pub haus_to_limit: f64,
    /// `Haus(S | S_n)`
    pub haus_from_limit: f64,
}

/// Minimizers of the tilted densities `1 + x/n` against the minimizer family
/// of their uniform limit on `(-1/2, 1/2)`.
pub fn converse_demo(alpha: f64, n_list: &[usize]) -> Result<Vec<ConverseRow>> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return arg(format!("alpha must lie in (0, 1/2), got {alpha}"));
    }
    let limit = population_family(&Analytic1DMeasure::Uniform { a: -0.5, b: 0.5 }, alpha)?;
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return arg("n must be at least 1");
            }
            let s = smallest_interval(&Analytic1DMeasure::Tilted { n: n as f64 }, 1.0 - alpha, 1e-12)?;
            let sn = IntervalFamily::single(s.lo, s.hi);
            Ok(ConverseRow {
                n,
                lo: s.lo,
                hi: s.hi,
                haus_to_limit: sn.contrast_to(&limit),
                haus_from_limit: limit.contrast_to(&sn),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::Family;

    fn uniform_cfg(n_list: Vec<usize>, replications: usize) -> SweepConfig {
        SweepConfig {
            generator: Generator::iid(
                Distribution::UniformBox {
                    lo: vec![0.0],
                    hi: vec![1.0],
                },
                0,
            ),
            class: ClassSpec::new(Family::Intervals),
            functional: SizeFunctional::default(),
            alpha: 0.25,
            n_list,
            replications,
            seed: 2024,
            slack: DEFAULT_SLACK,
            population: None,
            backend: None,
        }
    }

    #[test]
    fn family_contrasts() {
        let f = IntervalFamily {
            len: 0.75,
            cmin: 0.0,
            cmax: 0.25,
        };
        assert!(f.dist_from((0.1, 0.85)).abs() < 1e-15);
        assert!((f.dist_from((0.3, 1.0)) - 0.05).abs() < 1e-15);
        // brute force over a fine grid of family members
        let brute = |a: f64, b: f64| {
            (0..=10_000)
                .map(|k| {
                    let c = 0.25 * k as f64 / 1e4;
                    interval_haus((a, b), (c, c + 0.75))
                })
                .fold(f64::INFINITY, f64::min)
        };
        for &(a, b) in &[(0.02, 0.7), (0.5, 0.6), (-0.1, 1.2), (0.2, 0.99)] {
            assert!((f.dist_from((a, b)) - brute(a, b)).abs() < 1e-4);
        }
    }

    #[test]
    fn converse_rows() {
        let rows = converse_demo(0.25, &[100, 1000, 1_000_000]).unwrap();
        for r in &rows {
            assert!(r.haus_to_limit < 0.01);
            // the leftmost limit member [-0.5, 0.25] is farthest: 0.25 + delta_n
            assert!((r.haus_from_limit - (0.5 + r.lo)).abs() < 1e-12);
            assert!(r.haus_from_limit >= 0.25);
        }
        assert!(rows[0].haus_from_limit > rows[1].haus_from_limit);
        assert!((rows[2].haus_from_limit - 0.25).abs() < 1e-6);
        let tiny = converse_demo(1e-4, &[100]).unwrap();
        assert!(tiny[0].haus_to_limit < 1e-3 && tiny[0].haus_from_limit < 1e-3);
        assert!(converse_demo(0.6, &[10]).is_err());
    }

    #[test]
    fn sweep_is_reproducible_and_sorted() {
        let cfg = uniform_cfg(vec![50, 200], 3);
        let (reference, a) = consistency_sweep(&cfg, false).unwrap();
        let (_, b) = consistency_sweep(&cfg, false).unwrap();
        assert_eq!(a, b);
        assert!(!reference.is_approximate());
        assert_eq!(a.len(), 6);
        assert!(a.windows(2).all(|w| (w[0].n, w[0].replicate) < (w[1].n, w[1].replicate)));
        assert!(a.iter().all(|r| r.haus >= 0.0 && r.haus_exact <= r.haus));
        let s = summarize(&cfg, &reference, &a);
        assert_eq!(s.n, vec![50, 200]);
    }

    #[test]
    fn approximate_reference_for_circles() {
        let mut cfg = uniform_cfg(vec![20], 1);
        cfg.generator.distribution = Distribution::Mixture {
            components: vec![
                crate::measures::MixtureComponent {
                    weight: 0.5,
                    component: Distribution::UniformBox {
                        lo: vec![0.0],
                        hi: vec![1.0],
                    },
                },
                crate::measures::MixtureComponent {
                    weight: 0.5,
                    component: Distribution::UniformBox {
                        lo: vec![0.0],
                        hi: vec![1.0],
                    },
                },
            ],
        };
        let r = reference(&cfg).unwrap();
        assert!(r.is_approximate());
    }

    #[test]
    fn sandwich_small() {
        let cfg = uniform_cfg(vec![1], 2);
        let rep = sandwich_check(&cfg, 0.05, 1e-6).unwrap();
        assert!(rep.small_n);
        assert_eq!(rep.tau_n, vec![0.5, 0.5]);
        let analytic = LocalizationProblem::analytic(Analytic1DMeasure::Uniform { a: 0.0, b: 1.0 }, 0.25);
        let r = solve(&analytic, 0.0).unwrap();
        assert_eq!(r.tau, tau_interval(0.75, &SizeFunctional::default()).unwrap());
    }

    #[test]
    fn continuity_reports() {
        let u = LocalizationProblem::analytic(Analytic1DMeasure::Uniform { a: 0.0, b: 1.0 }, 0.25);
        let mut last = f64::INFINITY;
        for delta in [0.01, 0.005, 0.001] {
            let rep = alpha_continuity(&u, &[0.25], delta, 0.0).unwrap();
            assert!(rep.max_tau_gap <= 3.0 * delta);
            assert!(rep.max_tau_gap < last);
            last = rep.max_tau_gap;
        }
        let two = EmpiricalMeasure::uniform(PointSet::line(&[0.0, 3.0]).unwrap());
        let p = LocalizationProblem::empirical(two, ClassSpec::new(Family::Intervals), 0.45);
        let rep = alpha_continuity(&p, &[0.45], 0.1, 0.0).unwrap();
        assert!(rep.max_tau_gap > 0.4, "{rep:?}");
    }
}
