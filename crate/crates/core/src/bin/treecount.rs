use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use treecount::harness::output;
use treecount::harness::sweep::{self, ModelOverrides, SimOverrides};
use treecount::harness::{FileConfig, SweepSpec};
use treecount::{model, sim, Error, ModelParams, Result, SimConfig};

#[derive(Parser)]
#[command(
    name = "treecount",
    version,
    about = "Tree-based counting under churn: model and simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic model for one parameter point.
    Solve(Common),
    /// Simulate one parameter point.
    Simulate(Common),
    /// Model versus simulation table over a grid (runs missing points).
    Compare(Common),
    /// Run a resumable grid of model evaluations and simulations.
    Sweep(Common),
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err(format!("{s} is not a positive finite number")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err(format!("{s} is not a non-negative finite number")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Network size N (comma-separated list for compare/sweep).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    nodes: Vec<usize>,
    /// Mean join degree.
    #[arg(long, value_delimiter = ',', value_parser = positive, allow_negative_numbers = true)]
    degree: Vec<f64>,
    /// Ratio of protocol cycle rate to failure rate.
    #[arg(long, value_delimiter = ',', value_parser = positive, allow_negative_numbers = true)]
    ratio: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of samples to record.
    #[arg(long)]
    samples: Option<usize>,
    /// Simulated time discarded before sampling.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    warmup: Option<f64>,
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    sample_interval: Option<f64>,
    /// Levels above this are pooled into an overflow count.
    #[arg(long)]
    max_level: Option<usize>,
    /// Output file (solve, simulate) or directory (compare, sweep).
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file supplying defaults for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Concurrent simulations in a sweep.
    #[arg(long)]
    parallel: Option<usize>,
}

/// Flag values merged over the config file.
struct Resolved {
    nodes: Vec<usize>,
    degrees: Vec<f64>,
    ratios: Vec<f64>,
    sim: SimOverrides,
    model: ModelOverrides,
    out: Option<PathBuf>,
    parallel: usize,
}

fn pick<T>(flag: Vec<T>, file: Option<Vec<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.unwrap_or_default()
    } else {
        flag
    }
}

impl Common {
    fn resolve(self) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let resolved = Resolved {
            nodes: pick(self.nodes, file.nodes.map(|v| v.to_vec())),
            degrees: pick(self.degree, file.degree.map(|v| v.to_vec())),
            ratios: pick(self.ratio, file.ratio.map(|v| v.to_vec())),
            sim: SimOverrides {
                seed: self.seed.or(file.seed),
                num_samples: self.samples.or(file.samples),
                warmup_time: self.warmup.or(file.warmup),
                sample_interval: self.sample_interval.or(file.sample_interval),
                max_level: self.max_level.or(file.max_level),
                fail_rate: file.fail_rate,
            },
            model: ModelOverrides {
                epsilon: file.epsilon,
                max_iter: file.max_iter,
                fp_tol: file.tol,
            },
            out: self.out.or(file.out),
            parallel: self.parallel.or(file.parallel).unwrap_or(1),
        };
        for (name, empty) in [
            ("--nodes", resolved.nodes.is_empty()),
            ("--degree", resolved.degrees.is_empty()),
            ("--ratio", resolved.ratios.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidConfig(format!("{name} is required")));
            }
        }
        Ok(resolved)
    }

    fn single(self) -> Result<(Resolved, usize, f64, f64)> {
        let r = self.resolve()?;
        match (
            r.nodes.as_slice(),
            r.degrees.as_slice(),
            r.ratios.as_slice(),
        ) {
            (&[n], &[d], &[ratio]) => Ok((r, n, d, ratio)),
            _ => Err(Error::InvalidConfig(
                "solve and simulate take exactly one value per parameter".into(),
            )),
        }
    }
}

impl Resolved {
    fn spec(self, default_dir: &str) -> SweepSpec {
        SweepSpec {
            nodes: self.nodes,
            degrees: self.degrees,
            ratios: self.ratios,
            sim: self.sim,
            model: self.model,
            out_dir: self.out.unwrap_or_else(|| PathBuf::from(default_dir)),
            parallel: self.parallel,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn solve(args: Common) -> Result<()> {
    let (r, n, d, ratio) = args.single()?;
    let params = r.model.apply(ModelParams::new(n as f64, d, ratio));
    params.validate()?;
    let sol = model::predict(&params)?;
    match &r.out {
        Some(p) => output::write_model_csv(create(p)?, &params, &sol)?,
        None => output::write_model_csv(io::stdout().lock(), &params, &sol)?,
    }
    if !sol.converged {
        return Err(Error::NotConverged {
            iterations: sol.iterations,
            last_delta: sol.last_delta,
        });
    }
    Ok(())
}

fn samples_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.samples.csv"))
}

fn simulate(args: Common) -> Result<()> {
    let (r, n, d, ratio) = args.single()?;
    let cfg = r.sim.apply(SimConfig::new(n, d, ratio));
    cfg.validate()?;
    let start = Instant::now();
    let (res, samples) = sim::run_with_samples(&cfg)?;
    let wall = Some(start.elapsed());
    match &r.out {
        Some(p) => {
            output::write_sim_csv(create(p)?, &res, wall)?;
            output::write_samples_csv(create(&samples_path(p))?, &samples)?;
        }
        None => output::write_sim_csv(io::stdout().lock(), &res, wall)?,
    }
    Ok(())
}

fn compare(args: Common) -> Result<bool> {
    let spec = args.resolve()?.spec("compare");
    let (table, report) = sweep::compare(&spec)?;
    table.write_csv(create(&spec.out_dir.join("comparison.csv"))?)?;
    let mut stdout = io::stdout().lock();
    stdout.write_all(table.to_text().as_bytes())?;
    stdout.flush()?;
    Ok(report.failed.is_empty() && table.missing.is_empty())
}

fn run_sweep(args: Common) -> Result<bool> {
    let spec = args.resolve()?.spec("sweep");
    let report = sweep::run_sweep(&spec)?;
    println!(
        "executed {} skipped {} failed {}",
        report.executed.len(),
        report.skipped.len(),
        report.failed.len()
    );
    for (key, err) in &report.failed {
        eprintln!("{key}: {err}");
    }
    Ok(report.failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a).map(|()| true),
        Command::Simulate(a) => simulate(a).map(|()| true),
        Command::Compare(a) => compare(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
