use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{provenance, resolve, Flags, PROVENANCE_PREFIX};
use super::*;
use crate::classes::{ClassSpec, Family, SetDescriptor};
use crate::error::{arg, Error, Result};
use crate::experiments::{
    alpha_continuity, consistency_sweep, converse_demo, sandwich_check, summarize, SweepConfig,
    SweepRecord,
};
use crate::io::read_points;
use crate::localize::{solve, tau_alpha_curve, LocalizationProblem, MeasureInput, DEFAULT_SLACK};
use crate::measures::{sample, Analytic1DMeasure, Generator};
use crate::metric::{descriptor_haus, haus_contrast, Metric, PointSet};
use crate::packing::{
    covering_number, packing_number, packing_profile, Caps, CoverMode, PackingMode,
    DEFAULT_COVERING_CAP, DEFAULT_PACKING_CAP,
};
use crate::size::{tau_interval, tau_of_descriptor, Backend, SizeFunctional, Weight};

pub(super) fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Pack(a) => pack(a),
        Command::Cover(a) => cover(a),
        Command::Profile(a) => profile(a),
        Command::Tau(a) => tau(a),
        Command::Haus(a) => haus(a),
        Command::Localize(a) => localize(a),
        Command::Sweep(a) => sweep(a),
        Command::Sandwich(a) => sandwich(a),
        Command::AlphaCurve(a) => alpha_curve(a),
        Command::Converse(a) => converse(a),
    }
}

// ---- flag helpers

fn json_flag(name: &str, s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| Error::Argument(format!("--{name}: {e}")))
}

fn enum_flag<T: DeserializeOwned>(name: &str, s: &str) -> Result<T> {
    serde_json::from_value(Value::String(s.into()))
        .map_err(|_| Error::Argument(format!("--{name}: unknown value {s:?}")))
}

fn list_flag<T: FromStr>(name: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Argument(format!("--{name}: bad entry {x:?}")))
        })
        .collect()
}

fn input_flags(f: &mut Flags, a: &InputArgs) -> Result<()> {
    f.set(&["input"], a.input.as_ref())?;
    if let Some(m) = &a.metric {
        f.set(&["metric"], Some(Metric::parse(m)?))?;
    }
    Ok(())
}

fn class_flags(f: &mut Flags, a: &ClassArgs) -> Result<()> {
    let union = match (a.class.as_deref(), a.union_k) {
        (Some("separated-union"), _) | (Some("balls") | None, Some(_)) => true,
        (Some(_), Some(_)) => return arg("--union-k applies to balls only"),
        _ => false,
    };
    if union {
        let k = a
            .union_k
            .ok_or_else(|| Error::Argument("separated unions need --union-k".into()))?;
        let eps = a
            .union_eps
            .ok_or_else(|| Error::Argument("separated unions need --union-eps".into()))?;
        let fam = Family::SeparatedUnion { k, eps };
        f.set(&["class"], Some(serde_json::to_value(ClassSpec::new(fam))?))?;
    } else if let Some(name) = &a.class {
        let fam: Value = json!({ "family": name });
        serde_json::from_value::<Family>(fam.clone())
            .map_err(|_| Error::Argument(format!("--class: unknown class {name:?}")))?;
        f.set(&["class", "family"], Some(name))?;
    } else if a.union_eps.is_some() {
        return arg("--union-eps needs --union-k");
    }
    if a.exhaustive {
        f.set(&["class", "policy", "exhaustive"], Some(true))?;
    }
    f.set(&["class", "policy", "max_extent"], a.max_extent)?;
    f.set(&["class", "policy", "center_grid"], a.center_grid)?;
    f.set(&["class", "policy", "budget"], a.budget)?;
    Ok(())
}

fn functional_flags(f: &mut Flags, a: &FunctionalArgs) -> Result<()> {
    if let Some(w) = &a.weight {
        let weight = Weight::parse(w, None)?;
        let v = serde_json::to_value(SizeFunctional { weight, t_max: 1.0 })?;
        f.set(&["functional", "weight"], v.get("weight"))?;
        f.set(&["functional", "p"], v.get("p"))?;
    }
    f.set(&["functional", "t_max"], a.tmax)
}

fn backend_flag(f: &mut Flags, s: &Option<String>) -> Result<()> {
    match s {
        Some(s) => f.set(&["backend"], Some(Backend::parse(s)?)),
        None => Ok(()),
    }
}

/// A bare distribution is wrapped as an iid generator.
fn generator_flag(f: &mut Flags, s: &Option<String>, seed: Option<u64>) -> Result<()> {
    let Some(s) = s else {
        if seed.is_some() {
            f.set(&["generator", "seed"], seed)?;
        }
        return Ok(());
    };
    let mut v = json_flag("generator", s)?;
    if v.get("distribution").is_none() {
        v = json!({ "distribution": v });
    }
    if let Some(seed) = seed {
        v["seed"] = json!(seed);
    } else if v.get("seed").is_none() {
        v["seed"] = json!(0);
    }
    f.set(&["generator"], Some(v))
}

fn functional_default() -> Value {
    serde_json::to_value(SizeFunctional::default()).expect("serializable")
}

// ---- path and output helpers

fn need_file(p: &Path) -> Result<()> {
    if !p.is_file() {
        return arg(format!("input file {} does not exist", p.display()));
    }
    Ok(())
}

fn need_out(p: &Option<PathBuf>) -> Result<()> {
    let Some(p) = p else { return Ok(()) };
    if p.is_dir() {
        return arg(format!("output {} is a directory", p.display()));
    }
    if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !d.is_dir() {
            return arg(format!("output directory {} does not exist", d.display()));
        }
    }
    Ok(())
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
        }
    }
    Ok(())
}

fn json_text(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// `body` (an object) with the provenance block appended.
fn document(body: impl Serialize, prov: Value) -> Result<Value> {
    let mut v = serde_json::to_value(body)?;
    match v.as_object_mut() {
        Some(m) => {
            m.insert("provenance".into(), prov);
            Ok(v)
        }
        None => Ok(json!({ "result": v, "provenance": prov })),
    }
}

fn points(input: &Path, metric: Metric) -> Result<PointSet> {
    Ok(read_points(input, metric)?.points)
}

// ---- pack, cover, profile

#[derive(Serialize, Deserialize)]
struct PackConfig {
    input: PathBuf,
    metric: Metric,
    t: f64,
    mode: PackingMode,
    cap: usize,
}

fn pack(a: PackArgs) -> Result<()> {
    let mut f = Flags::default();
    input_flags(&mut f, &a.input)?;
    f.set(&["t"], a.t)?;
    if let Some(m) = &a.mode {
        f.set(&["mode"], Some(enum_flag::<PackingMode>("mode", m)?))?;
    }
    f.set(&["cap"], a.cap)?;
    let defaults = json!({"metric": "euclidean", "mode": "exact", "cap": DEFAULT_PACKING_CAP});
    let (cfg, norm): (PackConfig, _) = resolve("pack", defaults, f, a.common.config.as_deref())?;
    need_file(&cfg.input)?;
    need_out(&a.common.out)?;
    let value = packing_number(&points(&cfg.input, cfg.metric)?, cfg.t, cfg.mode, cfg.cap)?;
    println!("{value}");
    if let Some(out) = &a.common.out {
        let doc = document(json!({ "value": value }), provenance("pack", &norm, None))?;
        write_bytes(Some(out), &json_text(&doc)?)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CoverConfig {
    input: PathBuf,
    metric: Metric,
    t: f64,
    mode: CoverMode,
    cap: usize,
}

fn cover(a: CoverArgs) -> Result<()> {
    let mut f = Flags::default();
    input_flags(&mut f, &a.input)?;
    f.set(&["t"], a.t)?;
    if let Some(m) = &a.mode {
        f.set(&["mode"], Some(enum_flag::<CoverMode>("mode", m)?))?;
    }
    f.set(&["cap"], a.cap)?;
    let defaults = json!({"metric": "euclidean", "mode": "exact", "cap": DEFAULT_COVERING_CAP});
    let (cfg, norm): (CoverConfig, _) = resolve("cover", defaults, f, a.common.config.as_deref())?;
    need_file(&cfg.input)?;
    need_out(&a.common.out)?;
    let value = covering_number(&points(&cfg.input, cfg.metric)?, cfg.t, cfg.mode, cfg.cap)?;
    println!("{value}");
    if let Some(out) = &a.common.out {
        let doc = document(json!({ "value": value }), provenance("cover", &norm, None))?;
        write_bytes(Some(out), &json_text(&doc)?)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProfileConfig {
    input: PathBuf,
    metric: Metric,
    cap: usize,
}

fn profile(a: ProfileArgs) -> Result<()> {
    let mut f = Flags::default();
    input_flags(&mut f, &a.input)?;
    f.set(&["cap"], a.cap)?;
    let defaults = json!({"metric": "euclidean", "cap": DEFAULT_PACKING_CAP});
    let (cfg, norm): (ProfileConfig, _) =
        resolve("profile", defaults, f, a.common.config.as_deref())?;
    need_file(&cfg.input)?;
    need_out(&a.common.out)?;
    let p = packing_profile(&points(&cfg.input, cfg.metric)?, cfg.cap)?;
    let doc = document(p, provenance("profile", &norm, None))?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

// ---- tau, haus

#[derive(Serialize, Deserialize)]
struct TauConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    descriptor: Option<SetDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    functional: SizeFunctional,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    backend: Option<Backend>,
    cap: usize,
}

fn tau(a: TauArgs) -> Result<()> {
    let mut f = Flags::default();
    input_flags(&mut f, &a.input)?;
    if let Some(d) = &a.descriptor {
        f.set(&["descriptor"], Some(json_flag("descriptor", d)?))?;
    }
    f.set(&["length"], a.length)?;
    functional_flags(&mut f, &a.functional)?;
    backend_flag(&mut f, &a.backend)?;
    f.set(&["cap"], a.cap)?;
    let defaults = json!({
        "metric": "euclidean",
        "functional": functional_default(),
        "cap": DEFAULT_PACKING_CAP,
    });
    let (cfg, norm): (TauConfig, _) = resolve("tau", defaults, f, a.common.config.as_deref())?;
    need_out(&a.common.out)?;
    let (value, backend) = match (&cfg.length, &cfg.input) {
        (Some(_), Some(_)) => return arg("give either --length or --input, not both"),
        (Some(len), None) => {
            if cfg.descriptor.is_some() {
                return arg("--descriptor needs --input");
            }
            if cfg.backend.is_some_and(|b| b != Backend::IntervalExact) {
                return arg("--length is evaluated with the interval-exact backend only");
            }
            (tau_interval(*len, &cfg.functional)?, Backend::IntervalExact)
        }
        (None, Some(input)) => {
            need_file(input)?;
            let space = points(input, cfg.metric)?;
            let d = cfg.descriptor.clone().unwrap_or(SetDescriptor::Finite {
                indices: (0..space.len()).collect(),
            });
            let backend = cfg.backend.unwrap_or(match &d {
                SetDescriptor::Finite { .. } => Backend::Finite,
                d if d.as_line_interval(&space).is_some() => Backend::IntervalExact,
                _ => Backend::Sample,
            });
            let v = tau_of_descriptor(&d, &space, &cfg.functional, &backend, cfg.cap)?;
            (v, backend)
        }
        (None, None) => return arg("tau needs --input or --length"),
    };
    let doc = document(
        json!({ "tau": value, "backend": backend.label() }),
        provenance("tau", &norm, None),
    )?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

#[derive(Serialize, Deserialize)]
struct HausConfig {
    input: PathBuf,
    metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    other: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<SetDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<SetDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probe: Option<PathBuf>,
}

fn coords(s: &PointSet) -> Result<Vec<&[f64]>> {
    (0..s.len())
        .map(|i| {
            s.point(i)
                .ok_or_else(|| Error::Argument("point-set contrasts need coordinates".into()))
        })
        .collect()
}

fn haus(a: HausArgs) -> Result<()> {
    let mut f = Flags::default();
    input_flags(&mut f, &a.input)?;
    f.set(&["other"], a.other.as_ref())?;
    if let Some(d) = &a.a {
        f.set(&["a"], Some(json_flag("a", d)?))?;
    }
    if let Some(d) = &a.b {
        f.set(&["b"], Some(json_flag("b", d)?))?;
    }
    f.set(&["probe"], a.probe.as_ref())?;
    let (cfg, norm): (HausConfig, _) =
        resolve("haus", json!({"metric": "euclidean"}), f, a.common.config.as_deref())?;
    need_file(&cfg.input)?;
    for p in cfg.other.iter().chain(&cfg.probe) {
        need_file(p)?;
    }
    need_out(&a.common.out)?;
    let space = points(&cfg.input, cfg.metric)?;
    let body = match (&cfg.other, &cfg.a, &cfg.b) {
        (Some(other), None, None) => {
            let b = points(other, cfg.metric)?;
            if b.dim() != space.dim() {
                return arg("both point files must have the same dimension");
            }
            let metric = space.metric().expect("coordinates checked");
            let (xa, xb) = (coords(&space)?, coords(&b)?);
            let ab = haus_contrast(&xa, &xb, |x, y| metric.dist(x, y))?;
            let ba = haus_contrast(&xb, &xa, |x, y| metric.dist(x, y))?;
            json!({ "contrast_ab": ab, "contrast_ba": ba, "haus": ab.max(ba) })
        }
        (None, Some(da), Some(db)) => {
            da.validate(&space)?;
            db.validate(&space)?;
            let probe = match &cfg.probe {
                Some(p) => points(p, cfg.metric)?,
                None => space.clone(),
            };
            json!({ "haus": descriptor_haus(&space, da, db, &probe)? })
        }
        _ => return arg("haus needs either --other or both --a and --b"),
    };
    let doc = document(body, provenance("haus", &norm, None))?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

// ---- localize, alpha-curve

#[derive(Serialize, Deserialize)]
struct ProblemSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    analytic: Option<Analytic1DMeasure>,
    class: ClassSpec,
    functional: SizeFunctional,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    backend: Option<Backend>,
    caps: Caps,
}

fn source_defaults() -> Value {
    json!({
        "metric": "euclidean",
        "class": ClassSpec::new(Family::Intervals),
        "functional": functional_default(),
        "caps": Caps::default(),
    })
}

fn source_flags(f: &mut Flags, a: &SourceArgs) -> Result<()> {
    input_flags(f, &a.input)?;
    generator_flag(f, &a.generator, a.seed)?;
    f.set(&["n"], a.n)?;
    if let Some(s) = &a.analytic {
        f.set(&["analytic"], Some(json_flag("analytic", s)?))?;
    }
    class_flags(f, &a.class)?;
    functional_flags(f, &a.functional)?;
    backend_flag(f, &a.backend)?;
    f.set(&["caps", "packing"], a.caps.packing_cap)?;
    f.set(&["caps", "covering"], a.caps.covering_cap)
}

impl ProblemSource {
    fn check_paths(&self) -> Result<()> {
        let sources = [
            self.input.is_some(),
            self.generator.is_some(),
            self.analytic.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return arg("give exactly one of --input, --generator or --analytic");
        }
        if self.generator.is_some() != self.n.is_some() {
            return arg("--n goes together with --generator");
        }
        match &self.input {
            Some(p) => need_file(p),
            None => Ok(()),
        }
    }

    fn seed(&self) -> Option<u64> {
        self.generator.as_ref().map(|g| g.seed)
    }

    fn problem(&self, alpha: f64) -> Result<LocalizationProblem> {
        let mut p = if let Some(m) = &self.analytic {
            if self.class.family != Family::Intervals {
                return arg("analytic measures are localized over intervals only");
            }
            LocalizationProblem::analytic(m.clone(), alpha)
        } else {
            let mu = match (&self.input, &self.generator, self.n) {
                (Some(path), _, _) => read_points(path, self.metric)?.measure()?,
                (None, Some(g), Some(n)) => sample(g, n)?,
                _ => unreachable!("checked by check_paths"),
            };
            LocalizationProblem::empirical(mu, self.class.clone(), alpha)
        };
        p.functional = self.functional;
        p.caps = self.caps;
        if let Some(b) = self.backend {
            p.backend = b;
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct LocalizeConfig {
    #[serde(flatten)]
    source: ProblemSource,
    alpha: f64,
    slack: f64,
}

fn localize(a: LocalizeArgs) -> Result<()> {
    let mut f = Flags::default();
    source_flags(&mut f, &a.source)?;
    f.set(&["alpha"], a.alpha)?;
    f.set(&["slack"], a.slack)?;
    let mut defaults = source_defaults();
    defaults["slack"] = json!(DEFAULT_SLACK);
    let (cfg, norm): (LocalizeConfig, _) =
        resolve("localize", defaults, f, a.common.config.as_deref())?;
    cfg.source.check_paths()?;
    need_out(&a.common.out)?;
    let p = cfg.source.problem(cfg.alpha)?;
    let r = solve(&p, cfg.slack)?;
    let mut body = serde_json::to_value(&r)?;
    body["backend"] = json!(p.backend.label());
    body["caps"] = serde_json::to_value(p.caps)?;
    body["candidate_class"] = json!(p.class.family.name());
    let doc = document(body, provenance("localize", &norm, cfg.source.seed()))?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

#[derive(Serialize, Deserialize)]
struct AlphaCurveConfig {
    #[serde(flatten)]
    source: ProblemSource,
    alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    slack: f64,
}

fn alpha_curve(a: AlphaCurveArgs) -> Result<()> {
    let mut f = Flags::default();
    source_flags(&mut f, &a.source)?;
    if let Some(s) = &a.alphas {
        f.set(&["alphas"], Some(list_flag::<f64>("alphas", s)?))?;
    }
    f.set(&["delta"], a.delta)?;
    f.set(&["slack"], a.slack)?;
    let mut defaults = source_defaults();
    defaults["slack"] = json!(DEFAULT_SLACK);
    let (cfg, norm): (AlphaCurveConfig, _) =
        resolve("alpha-curve", defaults, f, a.common.config.as_deref())?;
    cfg.source.check_paths()?;
    need_out(&a.common.out)?;
    let Some(&first) = cfg.alphas.first() else {
        return arg("--alphas must list at least one level");
    };
    let p = cfg.source.problem(first)?;
    let curve: Vec<Value> = tau_alpha_curve(&p, &cfg.alphas)?
        .into_iter()
        .map(|(alpha, tau)| json!({ "alpha": alpha, "tau": tau }))
        .collect();
    let mut body = json!({ "curve": curve, "backend": p.backend.label() });
    if let Some(d) = cfg.delta {
        body["continuity"] = serde_json::to_value(alpha_continuity(&p, &cfg.alphas, d, cfg.slack)?)?;
    }
    body["measure"] = json!(match p.measure {
        MeasureInput::Empirical(_) => "empirical",
        MeasureInput::Analytic(_) => "analytic",
    });
    let doc = document(body, provenance("alpha-curve", &norm, cfg.source.seed()))?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

// ---- sweep, sandwich, converse

fn sweep_defaults() -> Value {
    json!({
        "generator": {
            "distribution": {"kind": "uniform-box", "lo": [0.0], "hi": [1.0]},
            "seed": 0,
        },
        "class": ClassSpec::new(Family::Intervals),
        "functional": functional_default(),
        "alpha": 0.25,
        "n_list": [100, 500, 2500, 12500],
        "replications": 20,
        "seed": 0,
        "slack": DEFAULT_SLACK,
    })
}

fn sweep_flags(f: &mut Flags, a: &SweepCommon) -> Result<()> {
    generator_flag(f, &a.generator, None)?;
    if let Some(s) = &a.population {
        f.set(&["population"], Some(json_flag("population", s)?))?;
    }
    class_flags(f, &a.class)?;
    functional_flags(f, &a.functional)?;
    backend_flag(f, &a.backend)?;
    f.set(&["alpha"], a.alpha)?;
    if let Some(s) = &a.n_list {
        f.set(&["n_list"], Some(list_flag::<usize>("n-list", s)?))?;
    }
    f.set(&["replications"], a.replications)?;
    f.set(&["seed"], a.seed)?;
    f.set(&["slack"], a.slack)
}

#[derive(Serialize, Deserialize)]
struct SweepCli {
    #[serde(flatten)]
    sweep: SweepConfig,
    timing: bool,
}

fn records_csv(prov: &Value, records: &[SweepRecord]) -> Result<Vec<u8>> {
    let mut buf = format!("{PROVENANCE_PREFIX}{prov}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["n", "replicate", "haus", "tau_n", "tau_ref", "ms"])?;
        for r in records {
            w.write_record([
                r.n.to_string(),
                r.replicate.to_string(),
                format!("{:?}", r.haus),
                format!("{:?}", r.tau_n),
                format!("{:?}", r.tau_ref),
                r.ms.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut f = Flags::default();
    sweep_flags(&mut f, &a.sweep)?;
    if a.timing {
        f.set(&["timing"], Some(true))?;
    }
    let mut defaults = sweep_defaults();
    defaults["timing"] = json!(false);
    let (cfg, norm): (SweepCli, _) =
        resolve("sweep", defaults, f, a.sweep.common.config.as_deref())?;
    need_out(&a.sweep.common.out)?;
    need_out(&a.summary)?;
    if a.summary.is_some() && a.summary == a.sweep.common.out {
        return arg("--summary and --out must differ");
    }
    cfg.sweep.validate()?;
    let (reference, records) = consistency_sweep(&cfg.sweep, cfg.timing)?;
    let prov = provenance("sweep", &norm, Some(cfg.sweep.seed));
    write_bytes(a.sweep.common.out.as_deref(), &records_csv(&prov, &records)?)?;
    if let Some(path) = &a.summary {
        let mut body = serde_json::to_value(summarize(&cfg.sweep, &reference, &records))?;
        body["reference_set"] = serde_json::to_value(&reference)?;
        let doc = document(body, prov)?;
        write_bytes(Some(path), &json_text(&doc)?)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SandwichCli {
    #[serde(flatten)]
    sweep: SweepConfig,
    eps: f64,
    tol: f64,
}

fn sandwich(a: SandwichArgs) -> Result<()> {
    let mut f = Flags::default();
    sweep_flags(&mut f, &a.sweep)?;
    f.set(&["eps"], a.eps)?;
    f.set(&["tol"], a.tol)?;
    let mut defaults = sweep_defaults();
    defaults["n_list"] = json!([12500]);
    defaults["replications"] = json!(50);
    defaults["eps"] = json!(0.05);
    defaults["tol"] = json!(1e-6);
    let (cfg, norm): (SandwichCli, _) =
        resolve("sandwich", defaults, f, a.sweep.common.config.as_deref())?;
    need_out(&a.sweep.common.out)?;
    let report = sandwich_check(&cfg.sweep, cfg.eps, cfg.tol)?;
    let doc = document(report, provenance("sandwich", &norm, Some(cfg.sweep.seed)))?;
    write_bytes(a.sweep.common.out.as_deref(), &json_text(&doc)?)
}

#[derive(Serialize, Deserialize)]
struct ConverseConfig {
    alpha: f64,
    n_list: Vec<usize>,
}

fn converse(a: ConverseArgs) -> Result<()> {
    let mut f = Flags::default();
    f.set(&["alpha"], a.alpha)?;
    if let Some(s) = &a.n_list {
        f.set(&["n_list"], Some(list_flag::<usize>("n-list", s)?))?;
    }
    let defaults = json!({"alpha": 0.25, "n_list": [100, 1000, 10000, 100000, 1000000]});
    let (cfg, norm): (ConverseConfig, _) =
        resolve("converse", defaults, f, a.common.config.as_deref())?;
    need_out(&a.common.out)?;
    let rows = converse_demo(cfg.alpha, &cfg.n_list)?;
    let doc = document(json!({ "rows": rows }), provenance("converse", &norm, None))?;
    write_bytes(a.common.out.as_deref(), &json_text(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_flags_map_unions() {
        let mut f = Flags::default();
        let a = ClassArgs {
            class: Some("balls".into()),
            union_k: Some(2),
            union_eps: Some(0.5),
            ..Default::default()
        };
        class_flags(&mut f, &a).unwrap();
        let v = f.into_value();
        let spec: ClassSpec = serde_json::from_value(v["class"].clone()).unwrap();
        assert_eq!(spec.family, Family::SeparatedUnion { k: 2, eps: 0.5 });
        let mut f = Flags::default();
        let bad = ClassArgs {
            class: Some("boxes".into()),
            union_k: Some(2),
            ..Default::default()
        };
        assert!(class_flags(&mut f, &bad).is_err());
        let unknown = ClassArgs {
            class: Some("ellipsoids".into()),
            ..Default::default()
        };
        assert!(class_flags(&mut Flags::default(), &unknown).is_err());
    }

    #[test]
    fn weight_flag_round_trips() {
        let mut f = Flags::default();
        functional_flags(
            &mut f,
            &FunctionalArgs {
                weight: Some("power:2".into()),
                tmax: Some(0.5),
            },
        )
        .unwrap();
        let v = f.into_value();
        let sf: SizeFunctional = serde_json::from_value(v["functional"].clone()).unwrap();
        assert_eq!(sf.weight, Weight::Power(2.0));
        assert_eq!(sf.t_max, 0.5);
    }

    #[test]
    fn bare_distribution_becomes_generator() {
        let mut f = Flags::default();
        generator_flag(&mut f, &Some(r#"{"kind":"tilted","n":5}"#.into()), Some(9)).unwrap();
        let g: Generator = serde_json::from_value(f.into_value()["generator"].clone()).unwrap();
        assert_eq!(g.seed, 9);
        assert_eq!(list_flag::<usize>("n", "1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(list_flag::<usize>("n", "1,x").is_err());
    }
}
