//! Minimize `tau` over a class subject to `mu(B) >= 1 - alpha`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{cmp_keys, enumerate_candidates, meets, ClassSpec, Family, SetDescriptor};
use crate::error::{arg, Error, Result};
use crate::measures::{smallest_interval, Analytic1DMeasure, EmpiricalMeasure};
use crate::metric::PointSet;
use crate::packing::{packing_profile, Caps};
use crate::size::{tau_interval, tau_of_descriptor, tau_of_profile, Backend, SizeFunctional};

/// Sizes closer than this count as equal when picking the first minimizer.
pub const TIE_TOL: f64 = 1e-12;

/// Default near-minimizer slack for exact backends.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Largest space handled by [`oracle_min`].
pub const ORACLE_CAP: usize = 20;

#[derive(Clone, Debug)]
pub enum MeasureInput {
    Empirical(EmpiricalMeasure),
    Analytic(Analytic1DMeasure),
}

#[derive(Clone, Debug)]
pub struct LocalizationProblem {
    pub measure: MeasureInput,
    pub class: ClassSpec,
    pub alpha: f64,
    pub functional: SizeFunctional,
    pub backend: Backend,
    pub caps: Caps,
}

impl LocalizationProblem {
    /// Problem on a sample with the family's default backend.
    pub fn empirical(mu: EmpiricalMeasure, class: ClassSpec, alpha: f64) -> Self {
        let backend = Backend::default_for(&class.family, mu.support());
        LocalizationProblem {
            measure: MeasureInput::Empirical(mu),
            class,
            alpha,
            functional: SizeFunctional::default(),
            backend,
            caps: Caps::default(),
        }
    }

    pub fn analytic(m: Analytic1DMeasure, alpha: f64) -> Self {
        LocalizationProblem {
            measure: MeasureInput::Analytic(m),
            class: ClassSpec::new(Family::Intervals),
            alpha,
            functional: SizeFunctional::default(),
            backend: Backend::IntervalExact,
            caps: Caps::default(),
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        LocalizationProblem {
            alpha,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub minimizer: SetDescriptor,
    pub tau: f64,
    pub mass: f64,
    pub near_minimizers: Vec<SetDescriptor>,
    pub candidate_count: usize,
    pub slack: f64,
    /// Set when the minimizer is known not to be unique.
    #[serde(default)]
    pub non_unique: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn check_slack(slack: f64) -> Result<()> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return arg(format!("slack must be finite and >= 0, got {slack}"));
    }
    Ok(())
}

/// Index of the first value within [`TIE_TOL`] of the minimum.
fn first_min(taus: &[f64]) -> usize {
    let m = taus.iter().copied().fold(f64::INFINITY, f64::min);
    taus.iter().position(|&t| t <= m + TIE_TOL).unwrap()
}

/// Scans the candidate stream for the first feasible minimizer of `tau`.
pub fn solve(p: &LocalizationProblem, slack: f64) -> Result<LocalizationResult> {
    check_alpha(p.alpha)?;
    check_slack(slack)?;
    p.functional.validate()?;
    p.caps.validate()?;
    let mu = match &p.measure {
        MeasureInput::Analytic(m) => return solve_analytic(p, m),
        MeasureInput::Empirical(mu) => mu,
    };
    let set = enumerate_candidates(&p.class, mu, p.alpha)?;
    let feasible: Vec<_> = set
        .candidates
        .into_iter()
        .filter(|c| meets(c.mass, p.alpha))
        .collect();
    if feasible.is_empty() {
        return Err(Error::Infeasible {
            required: 1.0 - p.alpha,
            max_mass: set.max_mass,
        });
    }
    let space = mu.support();
    let taus: Vec<Result<f64>> = feasible
        .par_iter()
        .map(|c| {
            tau_of_descriptor(
                &c.descriptor,
                space,
                &p.functional,
                &p.backend,
                p.caps.packing,
            )
        })
        .collect();
    let taus: Vec<f64> = taus.into_iter().collect::<Result<_>>()?;
    let best = first_min(&taus);
    let bound = taus[best] + slack + TIE_TOL;
    let near_minimizers = feasible
        .iter()
        .zip(&taus)
        .filter(|(_, &t)| t <= bound)
        .map(|(c, _)| c.descriptor.clone())
        .collect();
    Ok(LocalizationResult {
        minimizer: feasible[best].descriptor.clone(),
        tau: taus[best],
        mass: feasible[best].mass,
        near_minimizers,
        candidate_count: feasible.len(),
        slack,
        non_unique: false,
    })
}

fn solve_analytic(p: &LocalizationProblem, m: &Analytic1DMeasure) -> Result<LocalizationResult> {
    if p.class.family != Family::Intervals {
        return arg("analytic measures are localized over intervals only");
    }
    let s = smallest_interval(m, 1.0 - p.alpha, 1e-12)?;
    let tau = tau_interval(s.length(), &p.functional)?;
    Ok(LocalizationResult {
        minimizer: s.descriptor(),
        tau,
        mass: s.mass,
        near_minimizers: vec![s.descriptor()],
        candidate_count: 1,
        slack: 0.0,
        non_unique: s.non_unique,
    })
}

/// Brute force over all non-empty subsets of a space of at most
/// [`ORACLE_CAP`] points, with exact packing profiles.
pub fn oracle_min(
    space: &PointSet,
    weights: Option<&[f64]>,
    alpha: f64,
    f: &SizeFunctional,
    slack: f64,
) -> Result<LocalizationResult> {
    check_alpha(alpha)?;
    check_slack(slack)?;
    f.validate()?;
    let n = space.len();
    if n > ORACLE_CAP {
        return Err(Error::Capacity {
            what: "oracle subsets",
            count: n as u128,
            cap: ORACLE_CAP as u128,
        });
    }
    let mu = match weights {
        Some(w) => EmpiricalMeasure::weighted(space.clone(), w.to_vec())?,
        None => EmpiricalMeasure::uniform(space.clone()),
    };
    let subsets: Vec<Result<Option<(Vec<usize>, f64, f64)>>> = (1u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let m = mu.mass_of_sorted(&idx);
            if !meets(m, alpha) {
                return Ok(None);
            }
            let profile = packing_profile(&space.subset(&idx)?, ORACLE_CAP)?;
            Ok(Some((idx, tau_of_profile(&profile, f), m)))
        })
        .collect();
    let mut feasible = Vec::new();
    for s in subsets {
        if let Some(x) = s? {
            feasible.push(x);
        }
    }
    feasible.sort_by(|a, b| a.0.cmp(&b.0));
    let taus: Vec<f64> = feasible.iter().map(|x| x.1).collect();
    let best = first_min(&taus);
    let bound = taus[best] + slack + TIE_TOL;
    let near_minimizers = feasible
        .iter()
        .filter(|x| x.1 <= bound)
        .map(|x| SetDescriptor::Finite {
            indices: x.0.clone(),
        })
        .collect();
    Ok(LocalizationResult {
        minimizer: SetDescriptor::Finite {
            indices: feasible[best].0.clone(),
        },
        tau: feasible[best].1,
        mass: feasible[best].2,
        near_minimizers,
        candidate_count: feasible.len(),
        slack,
        non_unique: false,
    })
}

/// One solve per level; `alphas` must be ascending.
pub fn tau_alpha_curve(p: &LocalizationProblem, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if alphas.windows(2).any(|w| w[0] > w[1]) {
        return arg("alpha levels must be sorted ascending");
    }
    alphas
        .iter()
        .map(|&a| Ok((a, solve(&p.with_alpha(a), 0.0)?.tau)))
        .collect()
}

/// Candidates ordered as the solver scans them.
pub fn order_descriptors(v: &mut [SetDescriptor]) {
    v.sort_by(|a, b| cmp_keys(&a.key(), &b.key()));
}
