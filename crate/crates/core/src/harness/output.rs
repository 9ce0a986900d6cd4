//! CSV schemas.
//!
//! Every file starts with `#`-prefixed metadata lines of comma-separated
//! `key=value` pairs, followed by a header row and one data row per level (or
//! per sample). Floats are written in shortest round-trip form.
//!
//! * model: `x,pmin,nx,nxus,ax`
//! * simulation: `x,nx_mean,nx_se,axn_mean,axn_se,nxus_frac_mean,nxus_frac_se`
//! * raw samples: `t,size,overflow,n_0..n_L,a_0..a_L,us_0..us_L`

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ModelSolution};
use crate::sim::{LevelSample, SimResult};

pub const MODEL_HEADER: [&str; 5] = ["x", "pmin", "nx", "nxus", "ax"];
pub const SIM_HEADER: [&str; 7] = [
    "x",
    "nx_mean",
    "nx_se",
    "axn_mean",
    "axn_se",
    "nxus_frac_mean",
    "nxus_frac_se",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub x: usize,
    pub pmin: f64,
    pub nx: f64,
    pub nxus: f64,
    pub ax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub x: usize,
    pub nx_mean: f64,
    pub nx_se: f64,
    pub axn_mean: f64,
    pub axn_se: f64,
    pub nxus_frac_mean: f64,
    pub nxus_frac_se: f64,
}

/// Metadata lines of a CSV file, flattened into one map.
pub type Metadata = BTreeMap<String, String>;

/// A parsed CSV: metadata plus typed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<R> {
    pub meta: Metadata,
    pub rows: Vec<R>,
}

impl<R> Table<R> {
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        self.meta.get(key)?.parse().ok()
    }
}

fn meta_line(pairs: &[(&str, String)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# {}\n", body.join(","))
}

pub fn model_rows(sol: &ModelSolution) -> Vec<ModelRow> {
    let p = &sol.profile;
    (0..=p.x_max())
        .map(|x| ModelRow {
            x,
            pmin: p.pmin[x],
            nx: p.nx[x],
            nxus: p.nxus[x],
            ax: sol.ax[x],
        })
        .collect()
}

pub fn sim_rows(res: &SimResult) -> Vec<SimRow> {
    res.summary
        .levels
        .iter()
        .enumerate()
        .map(|(x, l)| SimRow {
            x,
            nx_mean: l.nx_mean,
            nx_se: l.nx_se,
            axn_mean: l.axn_mean,
            axn_se: l.axn_se,
            nxus_frac_mean: l.nxus_frac_mean,
            nxus_frac_se: l.nxus_frac_se,
        })
        .collect()
}

fn write_rows<W: Write, R: Serialize>(mut out: W, meta: &str, rows: &[R]) -> Result<()> {
    out.write_all(meta.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_model_csv<W: Write>(out: W, params: &ModelParams, sol: &ModelSolution) -> Result<()> {
    let mut meta = String::from("# treecount model\n");
    meta += &meta_line(&[
        ("nodes", params.nodes.to_string()),
        ("degree", params.mean_degree.to_string()),
        ("ratio", params.ratio.to_string()),
        ("epsilon", params.epsilon.to_string()),
        ("max_iter", params.max_iter.to_string()),
        ("fp_tol", params.fp_tol.to_string()),
    ]);
    meta += &meta_line(&[
        ("a0", sol.a0.to_string()),
        ("residual", sol.profile.residual.to_string()),
        ("iterations", sol.iterations.to_string()),
        ("converged", sol.converged.to_string()),
    ]);
    write_rows(out, &meta, &model_rows(sol))
}

/// Writes the reduced simulation. `wall` goes on its own metadata line so that
/// runs differ only there.
pub fn write_sim_csv<W: Write>(out: W, res: &SimResult, wall: Option<Duration>) -> Result<()> {
    let c = &res.config;
    let s = &res.summary;
    let e = &res.events;
    let mut meta = String::from("# treecount simulation\n");
    meta += &meta_line(&[
        ("nodes", c.nodes.to_string()),
        ("degree", c.mean_degree.to_string()),
        ("ratio", c.ratio.to_string()),
        ("fail_rate", c.fail_rate.to_string()),
        ("seed", c.seed.to_string()),
        ("warmup", c.warmup_time.to_string()),
        ("sample_interval", c.sample_interval.to_string()),
        ("samples", c.num_samples.to_string()),
        ("max_level", c.max_level.to_string()),
    ]);
    let (a0, a0_se) = s.a0();
    meta += &meta_line(&[
        ("mean_size", s.mean_size.to_string()),
        ("size_se", s.size_se.to_string()),
        ("a0", a0.to_string()),
        ("a0_se", a0_se.to_string()),
        ("overflow_frac", s.overflow_frac.to_string()),
        ("a0_lag1_autocorr", s.a0_lag1_autocorr.to_string()),
    ]);
    meta += &meta_line(&[
        ("joins", e.joins.to_string()),
        ("failures", e.failures.to_string()),
        ("cycles", e.cycles.to_string()),
        ("root_cycles", e.root_cycles.to_string()),
        ("stale", e.stale.to_string()),
    ]);
    if let Some(w) = wall {
        meta += &meta_line(&[("wall_time_s", format!("{:.3}", w.as_secs_f64()))]);
    }
    write_rows(out, &meta, &sim_rows(res))
}

pub fn write_samples_csv<W: Write>(out: W, samples: &[LevelSample]) -> Result<()> {
    let levels = samples.iter().map(|s| s.n.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "size".into(), "overflow".into()];
    for prefix in ["n", "a", "us"] {
        header.extend((0..levels).map(|x| format!("{prefix}_{x}")));
    }
    w.write_record(&header)?;
    for s in samples {
        let mut rec = vec![s.t.to_string(), s.size.to_string(), s.overflow.to_string()];
        for col in [&s.n, &s.a_total, &s.n_us] {
            rec.extend((0..levels).map(|x| col.get(x).copied().unwrap_or(0).to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Raw sample rows as `(size, overflow, per-level counts)`.
pub fn read_samples_csv(path: &Path) -> Result<Vec<(u64, u64, Vec<u64>)>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let n_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("n_"))
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<u64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| malformed(path, format!("bad field {i}")))
        };
        let counts = n_cols
            .iter()
            .map(|&i| field(i))
            .collect::<Result<Vec<_>>>()?;
        out.push((field(1)?, field(2)?, counts));
    }
    Ok(out)
}

fn malformed(path: &Path, reason: String) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        reason,
    }
}

fn read_table<R: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Table<R>> {
    let file = fs::File::open(path)?;
    let mut meta = Metadata::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        for pair in body.trim().split(',') {
            if let Some((k, v)) = pair.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(malformed(path, format!("unexpected header {got:?}")));
    }
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()?;
    Ok(Table { meta, rows })
}

pub fn read_model_csv(path: &Path) -> Result<Table<ModelRow>> {
    read_table(path, &MODEL_HEADER)
}

pub fn read_sim_csv(path: &Path) -> Result<Table<SimRow>> {
    read_table(path, &SIM_HEADER)
}
