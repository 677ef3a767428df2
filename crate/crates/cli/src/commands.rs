//! One-shot subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use tasep_core::lpp::scaled_limit_samples;
use tasep_core::rng::derive_seed;
use tasep_core::sim::{run_replicas, OccupationSnapshot};
use tasep_core::twophase::{entropy_check, entropy_check_samples, profile};
use tasep_core::variational::{gamma_q, hydro_v, hydro_v_with, HydroOptions};
use tasep_core::{InitialCondition, InitialProfile, SimConfig};

use crate::input::{self, Grid};

/// Opens `path` for writing; `-` is stdout.
pub fn sink(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    /// Independent sites with P(occupied) = rho0(i/n).
    Bernoulli,
    /// Site i occupied iff floor(n v0((i+1)/n)) > floor(n v0(i/n)).
    Deterministic,
}

impl Initial {
    pub fn build(self, p: InitialProfile) -> InitialCondition {
        match self {
            Initial::Bernoulli => InitialCondition::Bernoulli(p),
            Initial::Deterministic => InitialCondition::Deterministic(p),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Speed: JSON file, inline JSON, const:<c> or two-phase:<c1>,<c2>.
    #[arg(long)]
    speed: String,
    /// Initial density: const:<rho>, inline JSON or a file.
    #[arg(long)]
    rho0: String,
    #[arg(long)]
    n: u64,
    /// Macroscopic time.
    #[arg(long)]
    t: f64,
    /// Bin edges x0:x1:dx in macroscopic units.
    #[arg(long, allow_hyphen_values = true)]
    bins: Grid,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, value_enum, default_value = "bernoulli")]
    initial: Initial,
    /// Density CSV `rep,bin_lo,bin_hi,density`; `-` for stdout.
    #[arg(long, default_value = "-")]
    density: PathBuf,
    /// Current CSV `rep,site,current` over the sites spanned by the bins.
    #[arg(long)]
    currents: Option<PathBuf>,
    /// Directory for binary occupation snapshots `rep<r>.tsnp`.
    #[arg(long)]
    snapshots: Option<PathBuf>,
}

pub fn simulate(a: SimulateArgs, seed: u64) -> Result<()> {
    let speed = input::speed(&a.speed)?;
    let rho0 = input::profile(&a.rho0)?;
    if a.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let config = SimConfig::new(a.n, speed, a.t, seed, a.initial.build(rho0), (a.bins.lo, a.bins.hi))?;
    log::info!("simulating {} sites x {} replicas", config.sites(), a.reps);
    let runs = run_replicas(&config, a.reps, &[a.t])?;

    let mut out = sink(&a.density)?;
    writeln!(out, "rep,bin_lo,bin_hi,density")?;
    for (r, snaps) in runs.iter().enumerate() {
        for (lo, hi) in a.bins.bins() {
            let d = snaps[0].empirical_density(lo, hi)? / (hi - lo);
            writeln!(out, "{r},{lo},{hi},{d}")?;
        }
    }
    out.flush()?;

    if let Some(path) = &a.currents {
        let mut out = sink(path)?;
        writeln!(out, "rep,site,current")?;
        for (r, snaps) in runs.iter().enumerate() {
            for i in config.observe.0..=config.observe.1 {
                writeln!(out, "{r},{i},{}", snaps[0].current_at(i)?)?;
            }
        }
        out.flush()?;
    }

    if let Some(dir) = &a.snapshots {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (r, snaps) in runs.iter().enumerate() {
            let path = dir.join(format!("rep{r}.tsnp"));
            OccupationSnapshot::from(&snaps[0]).write_to(BufWriter::new(File::create(&path)?))?;
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct LppArgs {
    #[arg(long)]
    speed: String,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Starting point: column weights use c((i + floor(nq)) / n).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    q: f64,
    /// Keep interior path sites in the columns floor(n x0)..=floor(n x1).
    #[arg(long, value_parser = input::pair, allow_hyphen_values = true)]
    constrain: Option<(f64, f64)>,
}

/// CSV `n,rep,seed,T_over_n` for `T^{n, floor(nq)}(floor(nx), floor(ny)) / n`.
pub fn lpp(a: LppArgs, seed: u64) -> Result<()> {
    let speed = input::speed(&a.speed)?;
    let samples = scaled_limit_samples(a.x, a.y, a.n, a.reps, &speed, a.q, seed, a.constrain)?;
    let mut out = sink(Path::new("-"))?;
    writeln!(out, "n,rep,seed,T_over_n")?;
    for (r, t) in samples.iter().enumerate() {
        writeln!(out, "{},{r},{},{t}", a.n, derive_seed(seed, r as u64))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Subcommand)]
pub enum VariationalCommand {
    /// Gamma^q(x, y) and a maximizing macroscopic path, as JSON.
    GammaQ {
        #[arg(long)]
        speed: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// v(x, t) from the envelope formula, as JSON.
    V {
        #[arg(long)]
        speed: String,
        #[arg(long)]
        rho0: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        t: f64,
    },
    /// CSV `x,v,rho` on a grid; rho is the central difference of v, clipped to [0, 1].
    Profile {
        #[arg(long)]
        speed: String,
        #[arg(long)]
        rho0: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long)]
        t: f64,
        /// Difference step for rho.
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
    },
}

pub fn variational(cmd: VariationalCommand) -> Result<()> {
    match cmd {
        VariationalCommand::GammaQ { speed, q, x, y } => {
            let speed = input::speed(&speed)?;
            let g = gamma_q(x, y, &speed, q)?;
            print_json(&json!({
                "x": x,
                "y": y,
                "q": q,
                "value": g.value,
                "converged": g.converged,
                "path": g.path,
            }))
        }
        VariationalCommand::V { speed, rho0, x, t } => {
            let speed = input::speed(&speed)?;
            let rho0 = input::profile(&rho0)?;
            let r = hydro_v_with(x, t, &speed, &rho0, &HydroOptions::default())?;
            print_json(&json!({ "x": x, "t": t, "v": r.v, "q_star": r.q_star }))
        }
        VariationalCommand::Profile { speed, rho0, grid, t, h } => {
            let speed = input::speed(&speed)?;
            let rho0 = input::profile(&rho0)?;
            if !(h > 0.0) {
                bail!("--h must be positive");
            }
            let v = |x: f64, t: f64| hydro_v(x, t, &speed, &rho0);
            let mut out = sink(Path::new("-"))?;
            writeln!(out, "x,v,rho")?;
            for x in grid.points() {
                let (vx, vm, vp) = (v(x, t)?, v(x - h, t)?, v(x + h, t)?);
                let rho = ((vp - vm) / (2.0 * h)).clamp(0.0, 1.0);
                writeln!(out, "{x},{vx},{rho}")?;
            }
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    c1: f64,
    #[arg(long)]
    c2: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, allow_hyphen_values = true)]
    grid: Grid,
}

/// Closed-form two-phase density as CSV `x,rho`.
pub fn profile_table(a: ProfileArgs) -> Result<()> {
    let (case, p) = profile(a.rho, a.c1, a.c2, a.t)?;
    log::info!("case {case:?}, breakpoints {:?}", p.breakpoints());
    let mut out = sink(Path::new("-"))?;
    writeln!(out, "x,rho")?;
    for x in a.grid.points() {
        writeln!(out, "{x},{}", p.eval(x))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Entropy conditions of the two-phase solution, as JSON
    /// {ei_violations, flux_residual, eb_case, ...}. With --samples the
    /// profile is read from a CSV `bin_lo,bin_hi,density` instead.
    Entropy {
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Binned densities, e.g. averaged `simulate` output.
        #[arg(long, conflicts_with = "rho")]
        samples: Option<PathBuf>,
        /// Characteristic speeds within this of 0 count as 0 (samples only).
        #[arg(long, default_value_t = 0.05)]
        sign_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        flux_tol: f64,
        /// Exit with status 2 unless every condition holds.
        #[arg(long)]
        check: bool,
    },
}

/// Returns whether the check passed.
pub fn verify(cmd: VerifyCommand) -> Result<bool> {
    let VerifyCommand::Entropy {
        rho,
        c1,
        c2,
        t,
        samples,
        sign_tol,
        flux_tol,
        check,
    } = cmd;
    let report = match (rho, samples) {
        (Some(rho), None) => entropy_check(&profile(rho, c1, c2, t)?.1, c1, c2)?,
        (None, Some(path)) => {
            let (edges, values) = read_bins(&path)?;
            entropy_check_samples(t, &edges, &values, c1, c2, sign_tol)?
        }
        _ => bail!("give either --rho or --samples"),
    };
    let passed = report.passes(flux_tol);
    let mut value = serde_json::to_value(&report)?;
    value["passed"] = json!(passed);
    print_json(&value)?;
    Ok(passed || !check)
}

/// Reads `bin_lo,bin_hi,density` rows (an optional leading `rep` column is
/// averaged over) into contiguous edges and values.
fn read_bins(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().context("empty samples file")?.split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("samples file lacks a `{name}` column"))
    };
    let (lo, hi, d) = (col("bin_lo")?, col("bin_hi")?, col("density")?);
    let mut bins: Vec<(f64, f64, f64, u32)> = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let num = |c: usize| -> Result<f64> {
            let cell = cells.get(c).with_context(|| format!("line {}: missing column", k + 2))?;
            cell.trim().parse().with_context(|| format!("line {}: `{cell}` is not a number", k + 2))
        };
        let (a, b, v) = (num(lo)?, num(hi)?, num(d)?);
        match bins.iter_mut().find(|e| e.0 == a && e.1 == b) {
            Some(e) => {
                e.2 += v;
                e.3 += 1;
            }
            None => bins.push((a, b, v, 1)),
        }
    }
    bins.sort_by(|p, q| p.0.total_cmp(&q.0));
    if bins.is_empty() {
        bail!("no bins in {}", path.display());
    }
    for w in bins.windows(2) {
        if w[0].1 != w[1].0 {
            bail!("bins are not contiguous at {}", w[0].1);
        }
    }
    let mut edges: Vec<f64> = bins.iter().map(|b| b.0).collect();
    edges.push(bins.last().unwrap().1);
    let values = bins.iter().map(|b| b.2 / b.3 as f64).collect();
    Ok((edges, values))
}
