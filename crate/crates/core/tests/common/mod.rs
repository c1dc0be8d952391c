#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use masslock::measures::SplitMix64;
use masslock::packing::packing_profile;
use masslock::size::tau_of_profile;
use masslock::{Metric, PointSet, SizeFunctional};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_masslock")
}

/// A golden CLI invocation. `{out}` in an argument is replaced by a scratch
/// directory; `files` are read back from it after the run.
pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub files: &'static [&'static str],
}

pub const CASES: &[Case] = &[
    Case {
        name: "pack",
        args: &["pack", "--input", "tests/fixtures/line3.csv", "--t", "0.5", "--out", "{out}/pack.json"],
        files: &["pack.json"],
    },
    Case {
        name: "cover",
        args: &["cover", "--input", "tests/fixtures/plane12.csv", "--t", "0.3", "--out", "{out}/cover.json"],
        files: &["cover.json"],
    },
    Case {
        name: "profile",
        args: &["profile", "--input", "tests/fixtures/plane12.csv"],
        files: &[],
    },
    Case {
        name: "tau_length",
        args: &["tau", "--length", "1"],
        files: &[],
    },
    Case {
        name: "tau_grid",
        args: &[
            "tau",
            "--input",
            "tests/fixtures/line3.csv",
            "--descriptor",
            r#"{"type":"ball","center":[0.0],"radius":0.5}"#,
            "--backend",
            "grid:0.001",
        ],
        files: &[],
    },
    Case {
        name: "haus",
        args: &["haus", "--input", "tests/fixtures/line3.csv", "--other", "tests/fixtures/line3_other.csv"],
        files: &[],
    },
    Case {
        name: "localize_sample",
        args: &["localize", "--input", "tests/fixtures/uniform200.csv", "--alpha", "0.2", "--out", "{out}/result.json"],
        files: &["result.json"],
    },
    Case {
        name: "localize_weighted",
        args: &["localize", "--input", "tests/fixtures/weighted.json", "--class", "balls", "--alpha", "0.35"],
        files: &[],
    },
    Case {
        name: "localize_union",
        args: &[
            "localize",
            "--input",
            "tests/fixtures/clusters.csv",
            "--class",
            "balls",
            "--union-k",
            "2",
            "--union-eps",
            "0.5",
            "--alpha",
            "0.4",
        ],
        files: &[],
    },
    Case {
        name: "localize_ar1",
        args: &[
            "localize",
            "--generator",
            r#"{"distribution":{"kind":"gaussian","mean":[0.0],"sd":1.0},"chain":{"kind":"ar1","rho":0.5}}"#,
            "--n",
            "300",
            "--seed",
            "5",
            "--class",
            "balls",
            "--alpha",
            "0.1",
        ],
        files: &[],
    },
    Case {
        name: "alpha_curve",
        args: &[
            "alpha-curve",
            "--input",
            "tests/fixtures/uniform200.csv",
            "--alphas",
            "0.1,0.2,0.3",
            "--delta",
            "0.05",
        ],
        files: &[],
    },
    Case {
        name: "sweep",
        args: &[
            "sweep",
            "--n-list",
            "100,400",
            "--replications",
            "6",
            "--seed",
            "11",
            "--out",
            "{out}/records.csv",
            "--summary",
            "{out}/summary.json",
        ],
        files: &["records.csv", "summary.json"],
    },
    Case {
        name: "sweep_ar1_balls",
        args: &[
            "sweep",
            "--generator",
            r#"{"distribution":{"kind":"gaussian","mean":[0.0],"sd":1.0},"chain":{"kind":"ar1","rho":0.5}}"#,
            "--class",
            "balls",
            "--alpha",
            "0.1",
            "--n-list",
            "200,800",
            "--replications",
            "4",
            "--seed",
            "3",
        ],
        files: &[],
    },
    Case {
        name: "sandwich",
        args: &["sandwich", "--n-list", "1000", "--replications", "8", "--seed", "2"],
        files: &[],
    },
    Case {
        name: "converse",
        args: &["converse", "--n-list", "100,1000,10000"],
        files: &[],
    },
];

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
    /// Output files in `Case::files` order.
    pub files: Vec<Vec<u8>>,
}

pub fn command(args: &[String], threads: Option<usize>) -> Output {
    let mut c = Command::new(bin());
    c.args(args).current_dir(manifest_dir());
    match threads {
        Some(t) => c.env("MASSLOCK_THREADS", t.to_string()),
        None => c.env_remove("MASSLOCK_THREADS"),
    };
    c.output().expect("binary runs")
}

fn substitute(args: &[&str], out: &Path) -> Vec<String> {
    args.iter()
        .map(|a| a.replace("{out}", out.to_str().unwrap()))
        .collect()
}

pub fn run_case(case: &Case, threads: Option<usize>) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let o = command(&substitute(case.args, dir.path()), threads);
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: o.stdout,
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        files: case
            .files
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap_or_default())
            .collect(),
    }
}

/// Golden files of a case: stdout first, then each output file.
pub fn golden_paths(case: &Case) -> Vec<PathBuf> {
    let dir = manifest_dir().join("tests/golden");
    let mut v = vec![dir.join(format!("{}.stdout", case.name))];
    v.extend(case.files.iter().map(|f| dir.join(format!("{}.{f}", case.name))));
    v
}

/// Compares a run against its golden files; `MASSLOCK_BLESS=1` rewrites them.
pub fn check_golden(case: &Case, run: &Run) -> Result<(), String> {
    if run.code != 0 {
        return Err(format!("{}: exit {} ({})", case.name, run.code, run.stderr.trim()));
    }
    let got: Vec<&[u8]> = std::iter::once(&run.stdout[..])
        .chain(run.files.iter().map(|f| &f[..]))
        .collect();
    let bless = std::env::var("MASSLOCK_BLESS").is_ok_and(|v| v == "1");
    for (path, bytes) in golden_paths(case).iter().zip(got) {
        if bless {
            std::fs::write(path, bytes).unwrap();
            continue;
        }
        let want = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        if want != bytes {
            return Err(format!("{} differs from {}", case.name, path.display()));
        }
    }
    Ok(())
}

// ---- random and constructed point sets

pub fn random_points(rng: &mut SplitMix64, n: usize, d: usize) -> PointSet {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.next_open01()).collect())
        .collect();
    PointSet::from_coords(d, pts, Metric::Euclidean).unwrap()
}

pub fn coords_of(s: &PointSet) -> Vec<Vec<f64>> {
    (0..s.len()).map(|i| s.point(i).unwrap().to_vec()).collect()
}

pub fn set_of(pts: Vec<Vec<f64>>) -> PointSet {
    let d = pts[0].len();
    PointSet::from_coords(d, pts, Metric::Euclidean).unwrap()
}

/// `tau` with `phi(t) = t`, `t_max = 1`, from the exact profile.
pub fn tau_lin(s: &PointSet) -> f64 {
    tau_of_profile(&packing_profile(s, 64).unwrap(), &SizeFunctional::default())
}

/// A random subset of `1..=n` points on the grid `k / 64` of `[0, 1]^d`.
/// Dyadic coordinates keep every distance computation exact enough for
/// isometry checks.
pub fn dyadic_points(rng: &mut SplitMix64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < n {
        let p: Vec<f64> = (0..d).map(|_| (rng.next_u64() % 65) as f64 / 64.0).collect();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Decreasing sequence `A_k = A ∪ {-2^-m e_1 : k <= m <= depth}` with limit
/// `A`, where `A` holds the origin.
pub fn decreasing_sequence(rng: &mut SplitMix64, d: usize, depth: usize) -> (PointSet, Vec<PointSet>) {
    let n = 2 + (rng.next_u64() % 7) as usize;
    let mut base = dyadic_points(rng, n, d);
    let origin = vec![0.0; d];
    if !base.contains(&origin) {
        base.push(origin);
    }
    let seq = (1..=depth)
        .map(|k| {
            let mut pts = base.clone();
            for m in k..=depth {
                let mut p = vec![0.0; d];
                p[0] = -(2f64).powi(-(m as i32));
                pts.push(p);
            }
            set_of(pts)
        })
        .collect();
    (set_of(base), seq)
}

/// Sequences whose limit is `A`: a point escaping to infinity (its Kuratowski
/// limit drops the point) or a uniform expansion `(1 + 2^-k) A` (Hausdorff
/// convergent). In both, every pairwise distance of `A_k` dominates `A`'s.
pub fn lsc_sequence(rng: &mut SplitMix64, escaping: bool, depth: usize) -> (PointSet, Vec<PointSet>) {
    let d = 1 + (rng.next_u64() % 2) as usize;
    let n = 3 + (rng.next_u64() % 6) as usize;
    let base = dyadic_points(rng, n, d);
    let seq = (1..=depth)
        .map(|k| {
            if escaping {
                let mut pts = base.clone();
                let mut far = vec![0.0; d];
                far[0] = 2.0 + k as f64;
                pts.push(far);
                set_of(pts)
            } else {
                let c = 1.0 + (2f64).powi(-(k as i32));
                set_of(base.iter().map(|p| p.iter().map(|x| x * c).collect()).collect())
            }
        })
        .collect();
    (set_of(base), seq)
}
