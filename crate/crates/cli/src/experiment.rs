//! Config-driven experiments with CSV/JSON artifacts and a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tasep_core::lpp::{corner_limit_samples, scaled_limit_samples};
use tasep_core::rng::derive_seed;
use tasep_core::sim::{envelope_check, run_replicas, EnvelopeOptions};
use tasep_core::twophase::{entropy_check, profile, v_closed};
use tasep_core::variational::gamma_q;
use tasep_core::{Estimate, InitialProfile, SimConfig, SpeedFunction};

use crate::commands::Initial;
use crate::input::Grid;

pub const SCHEMA: &str = r#"CONFIG FILE (JSON)
  {
    "seed": 42,                      optional; else --seed / TASEP_SEED
    "output": "results/run1",        optional; --out overrides
    "experiment": { "kind": "<kind>", "params": { ... } }
  }
  Replica r of a run uses seed derive_seed(seed, r). Unknown fields are errors.

KINDS AND PARAMS (defaults in brackets)
  lpp-convergence   speed {"rates": [..], "breakpoints": [..]}, x, y, q [0],
                    corner [false], n [list], reps, max_rel_error [none]
                    -> lpp-convergence.csv  n,reps,mean,stderr,limit,abs_error,rel_error
                    check: |rel_error| at the largest n <= max_rel_error
                    corner = true samples G(nx, ny) with Y(a,b) ~ Exp(c((a-b)/n))
  hydro-compare     c1, c2, rho, n, t [1], reps, bins "x0:x1:dx",
                    initial ["bernoulli"|"deterministic"], exclusion [0.1],
                    tolerance [0.05], currents [list of x, empty],
                    current_tolerance [0.02]
                    -> hydro-compare.csv  bin_lo,bin_hi,empirical,closed,delta,excluded
                       hydro-compare-currents.csv  x,empirical,closed,delta
                       hydro-compare-summary.json
                    check: max delta over bins farther than exclusion from a
                    break <= tolerance, and every current delta <= current_tolerance
  profile-table     c1, c2, rhos [list], t [1], grid "x0:x1:dx"
                    -> profile-table.csv  rho,x,density ; profile-table.json
  entropy-report    c1, c2, rhos [list], t [1], flux_tol [1e-10]
                    -> entropy-report.json ; check: every profile passes
  envelope-audit    speed, n, t_end, initial {"breakpoints": [..], "values": [..]},
                    observe [a, b], window [i_min, i_max] [padded from observe],
                    sites [i_lo, i_hi] [observed sites], reps, max_events [1000],
                    decoupled [false]
                    -> envelope-audit.csv  rep,seed,events,checks,violations,status
                    check: every replica certifies the identity

OUTPUT
  CSV/JSON bodies depend only on the config and the seed. manifest.json adds
  the config SHA-256, seed, tool version, wall time and file hashes."#;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    LppConvergence(LppConvergence),
    HydroCompare(HydroCompare),
    ProfileTable(ProfileTable),
    EntropyReport(EntropyParams),
    EnvelopeAudit(EnvelopeAudit),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::LppConvergence(_) => "lpp-convergence",
            Experiment::HydroCompare(_) => "hydro-compare",
            Experiment::ProfileTable(_) => "profile-table",
            Experiment::EntropyReport(_) => "entropy-report",
            Experiment::EnvelopeAudit(_) => "envelope-audit",
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LppConvergence {
    speed: SpeedFunction,
    x: f64,
    y: f64,
    #[serde(default)]
    q: f64,
    #[serde(default)]
    corner: bool,
    n: Vec<u64>,
    reps: usize,
    #[serde(default)]
    max_rel_error: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroCompare {
    c1: f64,
    c2: f64,
    rho: f64,
    n: u64,
    #[serde(default = "one")]
    t: f64,
    reps: u64,
    bins: Grid,
    #[serde(default = "HydroCompare::bernoulli")]
    initial: Initial,
    #[serde(default = "HydroCompare::exclusion")]
    exclusion: f64,
    #[serde(default = "HydroCompare::tolerance")]
    tolerance: f64,
    #[serde(default)]
    currents: Vec<f64>,
    #[serde(default = "HydroCompare::current_tolerance")]
    current_tolerance: f64,
}

impl HydroCompare {
    fn bernoulli() -> Initial {
        Initial::Bernoulli
    }
    fn exclusion() -> f64 {
        0.1
    }
    fn tolerance() -> f64 {
        0.05
    }
    fn current_tolerance() -> f64 {
        0.02
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTable {
    c1: f64,
    c2: f64,
    rhos: Vec<f64>,
    #[serde(default = "one")]
    t: f64,
    grid: Grid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyParams {
    c1: f64,
    c2: f64,
    rhos: Vec<f64>,
    #[serde(default = "one")]
    t: f64,
    #[serde(default = "EntropyParams::flux_tol")]
    flux_tol: f64,
}

impl EntropyParams {
    fn flux_tol() -> f64 {
        1e-10
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeAudit {
    speed: SpeedFunction,
    n: u64,
    t_end: f64,
    initial: InitialProfile,
    observe: (f64, f64),
    #[serde(default)]
    window: Option<(i64, i64)>,
    #[serde(default)]
    sites: Option<(i64, i64)>,
    reps: u64,
    #[serde(default = "EnvelopeAudit::max_events")]
    max_events: u64,
    #[serde(default)]
    decoupled: bool,
}

impl EnvelopeAudit {
    fn max_events() -> u64 {
        1000
    }
}

/// Artifacts of one run: file bodies and the gate result.
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub passed: bool,
    pub summary: String,
}

/// Parses a config, reporting the file and serde's line/column on failure.
pub fn load(path: &Path) -> Result<(ExperimentConfig, Vec<u8>)> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        bail!(
            "config {} is empty; see `tasep experiment run --help` for the schema",
            path.display()
        );
    }
    let config = serde_json::from_slice(&bytes).with_context(|| format!("invalid config {}", path.display()))?;
    Ok((config, bytes))
}

pub fn execute(experiment: &Experiment, seed: u64) -> Result<Artifacts> {
    match experiment {
        Experiment::LppConvergence(p) => lpp_convergence(p, seed),
        Experiment::HydroCompare(p) => hydro_compare(p, seed),
        Experiment::ProfileTable(p) => profile_table(p),
        Experiment::EntropyReport(p) => entropy_report(p),
        Experiment::EnvelopeAudit(p) => envelope_audit(p, seed),
    }
}

fn lpp_convergence(p: &LppConvergence, seed: u64) -> Result<Artifacts> {
    if p.n.is_empty() {
        bail!("lpp-convergence: `n` must list at least one scale");
    }
    let limit = if p.corner {
        if p.q != 0.0 {
            bail!("lpp-convergence: `q` must be 0 with `corner`");
        }
        // G(m, rows) equals the wedge passage time to (m - rows, rows).
        gamma_q(p.x - p.y, p.y, &p.speed, 0.0)?.value
    } else {
        gamma_q(p.x, p.y, &p.speed, p.q)?.value
    };
    let mut csv = String::from("n,reps,mean,stderr,limit,abs_error,rel_error\n");
    let mut rel = Vec::with_capacity(p.n.len());
    for &n in &p.n {
        let s = derive_seed(seed, n);
        let samples = if p.corner {
            corner_limit_samples(p.x, p.y, n, p.reps, &p.speed, s)?
        } else {
            scaled_limit_samples(p.x, p.y, n, p.reps, &p.speed, p.q, s, None)?
        };
        let e = Estimate::from_samples(&samples);
        let r = (e.mean - limit) / limit;
        log::info!("n = {n}: mean {} (limit {limit})", e.mean);
        writeln!(csv, "{n},{},{},{},{limit},{},{r}", p.reps, e.mean, e.stderr, (e.mean - limit).abs())?;
        rel.push((n, r));
    }
    let (n_max, r) = rel.iter().copied().max_by_key(|&(n, _)| n).unwrap();
    let detail = format!("relative error {r:.4e} at n = {n_max}");
    let (passed, summary) = match p.max_rel_error {
        Some(tol) => (r.abs() <= tol, format!("{detail} (tolerance {tol})")),
        None => (true, format!("{detail}; no tolerance set")),
    };
    Ok(Artifacts {
        files: vec![("lpp-convergence.csv".into(), csv)],
        passed,
        summary,
    })
}

fn hydro_compare(p: &HydroCompare, seed: u64) -> Result<Artifacts> {
    let speed = SpeedFunction::two_phase(p.c1, p.c2)?;
    let (case, prof) = profile(p.rho, p.c1, p.c2, p.t)?;
    let (lo, hi) = (p.bins.lo, p.bins.hi);
    let xs_lo = p.currents.iter().copied().fold(lo, f64::min);
    let xs_hi = p.currents.iter().copied().fold(hi, f64::max);
    let init = p.initial.build(InitialProfile::constant(p.rho)?);
    let config = SimConfig::new(p.n, speed, p.t, seed, init, (xs_lo, xs_hi))?;
    log::info!("hydro-compare: {} sites x {} replicas", config.sites(), p.reps);
    let runs = run_replicas(&config, p.reps, &[p.t])?;
    let reps = p.reps as f64;
    let breaks = prof.breakpoints();

    let mut csv = String::from("bin_lo,bin_hi,empirical,closed,delta,excluded\n");
    let (mut worst, mut compared) = (0.0f64, 0);
    for (a, b) in p.bins.bins() {
        let w = b - a;
        let mut emp = 0.0;
        for snaps in &runs {
            emp += snaps[0].empirical_density(a, b)? / w;
        }
        emp /= reps;
        let closed = prof.integral(a, b) / w;
        let delta = (emp - closed).abs();
        let excluded = breaks.iter().any(|&e| e > a - p.exclusion && e < b + p.exclusion);
        if !excluded {
            worst = worst.max(delta);
            compared += 1;
        }
        writeln!(csv, "{a},{b},{emp},{closed},{delta},{excluded}")?;
    }

    let mut cur_csv = String::from("x,empirical,closed,delta\n");
    let mut cur_worst = 0.0f64;
    let nf = p.n as f64;
    for &x in &p.currents {
        let i = (nf * x).floor() as i64;
        let mut emp = 0.0;
        for snaps in &runs {
            emp += snaps[0].current_at(i)? as f64 / nf;
        }
        emp /= reps;
        let closed = p.rho * x - v_closed(x, p.t, p.rho, p.c1, p.c2)?;
        let delta = (emp - closed).abs();
        cur_worst = cur_worst.max(delta);
        writeln!(cur_csv, "{x},{emp},{closed},{delta}")?;
    }

    let passed = compared > 0 && worst <= p.tolerance && cur_worst <= p.current_tolerance;
    let summary_json = json!({
        "case": case,
        "breakpoints": breaks,
        "bins_compared": compared,
        "max_delta": worst,
        "tolerance": p.tolerance,
        "max_current_delta": if p.currents.is_empty() { Value::Null } else { json!(cur_worst) },
        "current_tolerance": p.current_tolerance,
        "passed": passed,
    });
    let mut files = vec![
        ("hydro-compare.csv".to_string(), csv),
        ("hydro-compare-summary.json".to_string(), pretty(&summary_json)?),
    ];
    if !p.currents.is_empty() {
        files.push(("hydro-compare-currents.csv".into(), cur_csv));
    }
    Ok(Artifacts {
        files,
        passed,
        summary: format!(
            "max bin delta {worst:.4} over {compared} bins (tolerance {}); max current delta {cur_worst:.4}",
            p.tolerance
        ),
    })
}

fn profile_table(p: &ProfileTable) -> Result<Artifacts> {
    let mut csv = String::from("rho,x,density\n");
    let mut cases = Vec::new();
    for &rho in &p.rhos {
        let (case, prof) = profile(rho, p.c1, p.c2, p.t)?;
        for x in p.grid.points() {
            writeln!(csv, "{rho},{x},{}", prof.eval(x))?;
        }
        cases.push(json!({ "rho": rho, "case": case, "breakpoints": prof.breakpoints(), "jumps": prof.jumps() }));
    }
    Ok(Artifacts {
        files: vec![
            ("profile-table.csv".into(), csv),
            ("profile-table.json".into(), pretty(&Value::Array(cases))?),
        ],
        passed: true,
        summary: format!("{} profiles on {} points", p.rhos.len(), p.grid.len()),
    })
}

fn entropy_report(p: &EntropyParams) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for &rho in &p.rhos {
        let (case, prof) = profile(rho, p.c1, p.c2, p.t)?;
        let report = entropy_check(&prof, p.c1, p.c2)?;
        let passed = report.passes(p.flux_tol);
        if !passed {
            failed.push(rho);
        }
        let mut row = serde_json::to_value(&report)?;
        row["rho"] = json!(rho);
        row["case"] = json!(case);
        row["passed"] = json!(passed);
        rows.push(row);
    }
    Ok(Artifacts {
        files: vec![("entropy-report.json".into(), pretty(&Value::Array(rows))?)],
        passed: failed.is_empty(),
        summary: if failed.is_empty() {
            format!("all {} profiles pass", p.rhos.len())
        } else {
            format!("entropy conditions fail at rho {failed:?}")
        },
    })
}

fn envelope_audit(p: &EnvelopeAudit, seed: u64) -> Result<Artifacts> {
    let init = tasep_core::InitialCondition::Bernoulli(p.initial.clone());
    let mut base = SimConfig::new(p.n, p.speed.clone(), p.t_end, seed, init, p.observe)?;
    if let Some((a, b)) = p.window {
        base = base.with_window(a, b)?;
    }
    let reports = (0..p.reps)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, r);
            let opts = EnvelopeOptions {
                sites: p.sites,
                k_range: None,
                max_events: p.max_events,
                decoupled_seed: p.decoupled.then(|| derive_seed(s, 0xdec)),
            };
            envelope_check(&base.with_seed(s), &opts).map(|rep| (s, rep))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("rep,seed,events,checks,violations,status\n");
    let mut certified = 0;
    for (r, (s, rep)) in reports.iter().enumerate() {
        let status = if rep.passes() {
            certified += 1;
            "exact"
        } else if rep.inconclusive.is_some() {
            "inconclusive"
        } else {
            "violated"
        };
        writeln!(csv, "{r},{s},{},{},{},{status}", rep.events, rep.checks, rep.violation_count)?;
    }
    Ok(Artifacts {
        files: vec![("envelope-audit.csv".into(), csv)],
        passed: certified == reports.len(),
        summary: format!("identity certified on {certified}/{} replicas", reports.len()),
    })
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the experiment in `path`, writes its artifacts and manifest into
/// the output directory and returns whether the gate passed.
pub fn run(path: &Path, out: Option<PathBuf>, default_seed: u64, jobs: usize) -> Result<bool> {
    let (config, raw) = load(path)?;
    let seed = config.seed.unwrap_or(default_seed);
    let kind = config.experiment.kind();
    let dir = out
        .or(config.output.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(kind));
    let started = SystemTime::now();
    let clock = Instant::now();
    log::info!("running {kind} with seed {seed}");
    let artifacts = execute(&config.experiment, seed)?;
    let wall = clock.elapsed().as_secs_f64();

    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut outputs = Vec::new();
    for (name, body) in &artifacts.files {
        let file = dir.join(name);
        std::fs::write(&file, body).with_context(|| format!("cannot write {}", file.display()))?;
        outputs.push(json!({ "file": name, "sha256": sha256_hex(body.as_bytes()) }));
    }
    let manifest = json!({
        "tool": "tasep",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind,
        "config": path.display().to_string(),
        "config_sha256": sha256_hex(&raw),
        "seed": seed,
        "jobs": jobs,
        "started_unix": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "wall_time_seconds": wall,
        "outputs": outputs,
        "check": { "passed": artifacts.passed, "summary": artifacts.summary },
    });
    std::fs::write(dir.join("manifest.json"), pretty(&manifest)?)?;
    eprintln!(
        "{kind}: {} ({}); artifacts in {}",
        if artifacts.passed { "pass" } else { "FAIL" },
        artifacts.summary,
        dir.display()
    );
    Ok(artifacts.passed)
}
