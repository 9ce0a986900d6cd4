//! Resumable parameter sweeps.
//!
//! Each grid point writes `<key>.model.csv`, `<key>.sim.csv` and
//! `<key>.samples.csv` into the output directory and appends one JSON record to
//! `manifest.jsonl`. A point whose latest record is `ok`, whose hash matches
//! the current configuration and whose files are present is skipped on rerun.
//! Workers run points concurrently; only the coordinating thread touches the
//! manifest.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::compare::{ComparisonRow, ComparisonTable};
use super::output;
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::sim::{self, SimConfig};

pub const MANIFEST: &str = "manifest.jsonl";

/// Optional overrides applied to every point's default [`SimConfig`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOverrides {
    pub seed: Option<u64>,
    pub num_samples: Option<usize>,
    pub warmup_time: Option<f64>,
    pub sample_interval: Option<f64>,
    pub max_level: Option<usize>,
    pub fail_rate: Option<f64>,
}

impl SimOverrides {
    pub fn apply(&self, mut c: SimConfig) -> SimConfig {
        c.seed = self.seed.unwrap_or(c.seed);
        c.num_samples = self.num_samples.unwrap_or(c.num_samples);
        c.warmup_time = self.warmup_time.unwrap_or(c.warmup_time);
        c.sample_interval = self.sample_interval.unwrap_or(c.sample_interval);
        c.max_level = self.max_level.unwrap_or(c.max_level);
        c.fail_rate = self.fail_rate.unwrap_or(c.fail_rate);
        c
    }
}

/// Solver controls applied to every point's default [`ModelParams`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelOverrides {
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub fp_tol: Option<f64>,
}

impl ModelOverrides {
    pub fn apply(&self, mut p: ModelParams) -> ModelParams {
        p.epsilon = self.epsilon.unwrap_or(p.epsilon);
        p.max_iter = self.max_iter.unwrap_or(p.max_iter);
        p.fp_tol = self.fp_tol.unwrap_or(p.fp_tol);
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub nodes: Vec<usize>,
    pub degrees: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sim: SimOverrides,
    pub model: ModelOverrides,
    pub out_dir: PathBuf,
    pub parallel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sim: SimConfig,
    pub model: ModelParams,
}

impl SweepPoint {
    /// File stem, e.g. `n1000_d8_r100_s0`.
    pub fn key(&self) -> String {
        format!(
            "n{}_d{}_r{}_s{}",
            self.sim.nodes, self.sim.mean_degree, self.sim.ratio, self.sim.seed
        )
    }

    /// Hash over both configurations and the crate version.
    pub fn hash(&self) -> String {
        let body = serde_json::json!({
            "sim": self.sim,
            "model": self.model,
            "version": crate::VERSION,
        });
        let digest = Sha256::digest(body.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn files(&self, dir: &Path) -> [PathBuf; 3] {
        let k = self.key();
        [
            dir.join(format!("{k}.model.csv")),
            dir.join(format!("{k}.sim.csv")),
            dir.join(format!("{k}.samples.csv")),
        ]
    }
}

impl SweepSpec {
    /// The validated cross product of the grid.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        if self.nodes.is_empty() || self.degrees.is_empty() || self.ratios.is_empty() {
            return Err(Error::InvalidConfig("sweep grid is empty".into()));
        }
        let mut out = Vec::new();
        for &n in &self.nodes {
            for &d in &self.degrees {
                for &r in &self.ratios {
                    let sim = self.sim.apply(SimConfig::new(n, d, r));
                    sim.validate()?;
                    let model = self.model.apply(ModelParams::new(n as f64, d, r));
                    model.validate()?;
                    out.push(SweepPoint { sim, model });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub key: String,
    pub hash: String,
    pub version: String,
    pub status: Status,
    pub sim: SimConfig,
    pub model: ModelParams,
    pub model_a0: Option<f64>,
    pub sim_a0: Option<f64>,
    pub sim_a0_se: Option<f64>,
    pub error: Option<String>,
}

/// Reads the manifest, keeping the last record per key. A torn final line
/// (from an interrupted write) is ignored.
pub fn read_manifest(dir: &Path) -> Result<HashMap<String, ManifestRecord>> {
    let path = dir.join(MANIFEST);
    let mut latest = HashMap::new();
    let Ok(file) = File::open(&path) else {
        return Ok(latest);
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rec) = serde_json::from_str::<ManifestRecord>(&line) {
            latest.insert(rec.key.clone(), rec);
        }
    }
    Ok(latest)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
    pub failed: Vec<(String, String)>,
}

fn is_complete(point: &SweepPoint, dir: &Path, manifest: &HashMap<String, ManifestRecord>) -> bool {
    manifest.get(&point.key()).is_some_and(|rec| {
        rec.status == Status::Ok
            && rec.hash == point.hash()
            && point.files(dir).iter().all(|f| f.exists())
    })
}

fn execute(point: &SweepPoint, dir: &Path) -> ManifestRecord {
    let mut rec = ManifestRecord {
        key: point.key(),
        hash: point.hash(),
        version: crate::VERSION.to_string(),
        status: Status::Failed,
        sim: point.sim.clone(),
        model: point.model,
        model_a0: None,
        sim_a0: None,
        sim_a0_se: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let [model_path, sim_path, samples_path] = point.files(dir);
        let sol = model::predict_converged(&point.model)?;
        rec.model_a0 = Some(sol.a0);
        output::write_model_csv(
            BufWriter::new(File::create(model_path)?),
            &point.model,
            &sol,
        )?;
        let start = Instant::now();
        let (res, samples) = sim::run_with_samples(&point.sim)?;
        let wall = start.elapsed();
        let (a0, se) = res.summary.a0();
        rec.sim_a0 = Some(a0);
        rec.sim_a0_se = Some(se);
        output::write_samples_csv(BufWriter::new(File::create(samples_path)?), &samples)?;
        output::write_sim_csv(BufWriter::new(File::create(sim_path)?), &res, Some(wall))?;
        Ok(())
    })();
    match outcome {
        Ok(()) => rec.status = Status::Ok,
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs every incomplete grid point and appends its record to the manifest.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    let points = spec.points()?;
    fs::create_dir_all(&spec.out_dir)?;
    let manifest = read_manifest(&spec.out_dir)?;
    let mut report = SweepReport::default();
    let mut todo = Vec::new();
    for p in points {
        if is_complete(&p, &spec.out_dir, &manifest) {
            report.skipped.push(p.key());
        } else {
            todo.push(p);
        }
    }

    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(spec.out_dir.join(MANIFEST))?;
    let next = AtomicUsize::new(0);
    let workers = spec.parallel.clamp(1, todo.len().max(1));
    let (tx, rx) = mpsc::channel::<ManifestRecord>();
    let write_result = std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, todo, dir) = (&next, &todo, &spec.out_dir);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(point) = todo.get(i) else { break };
                if tx.send(execute(point, dir)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for rec in rx {
            writeln!(log, "{}", serde_json::to_string(&rec)?)?;
            log.flush()?;
            match rec.status {
                Status::Ok => report.executed.push(rec.key),
                Status::Failed => report.failed.push((rec.key, rec.error.unwrap_or_default())),
            }
        }
        Ok(())
    });
    write_result?;
    Ok(report)
}

/// Runs (or resumes) the sweep and tabulates `A_0 / N` for every grid point.
pub fn compare(spec: &SweepSpec) -> Result<(ComparisonTable, SweepReport)> {
    let report = run_sweep(spec)?;
    let manifest = read_manifest(&spec.out_dir)?;
    let mut table = ComparisonTable::default();
    for p in spec.points()? {
        let key = p.key();
        match manifest.get(&key) {
            Some(ManifestRecord {
                status: Status::Ok,
                model_a0: Some(m),
                sim_a0: Some(s),
                sim_a0_se: Some(se),
                ..
            }) => table.rows.push(ComparisonRow::new(
                p.sim.nodes,
                p.sim.mean_degree,
                p.sim.ratio,
                *m,
                *s,
                *se,
            )),
            Some(rec) => table.missing.push(format!(
                "{key}: {}",
                rec.error.as_deref().unwrap_or("incomplete record")
            )),
            None => table.missing.push(format!("{key}: no result")),
        }
    }
    Ok((table, report))
}
