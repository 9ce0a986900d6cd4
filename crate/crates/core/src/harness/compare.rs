//! Model-versus-simulation comparison of the root's normalised count `A_0 / N`.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub nodes: usize,
    pub degree: f64,
    pub ratio: f64,
    pub model_a0: f64,
    pub sim_a0: f64,
    pub sim_a0_se: f64,
    /// `|model - sim| / sim`.
    pub rel_error: f64,
}

impl ComparisonRow {
    pub fn new(
        nodes: usize,
        degree: f64,
        ratio: f64,
        model_a0: f64,
        sim_a0: f64,
        sim_a0_se: f64,
    ) -> Self {
        Self {
            nodes,
            degree,
            ratio,
            model_a0,
            sim_a0,
            sim_a0_se,
            rel_error: relative_error(model_a0, sim_a0),
        }
    }
}

/// `|predicted - measured| / |measured|`; infinite when the measurement is zero
/// and the prediction is not.
pub fn relative_error(predicted: f64, measured: f64) -> f64 {
    let diff = (predicted - measured).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / measured.abs()
    }
}

/// Comparison rows plus the grid points that had no usable result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub missing: Vec<String>,
}

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width text rendering, one row per grid point.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>8} {:>6} {:>8} {:>10} {:>10} {:>9} {:>8}\n",
            "N", "degree", "r", "model_a0", "sim_a0", "sim_se", "rel_err"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>8} {:>6} {:>8} {:>10.4} {:>10.4} {:>9.4} {:>8.3}",
                r.nodes, r.degree, r.ratio, r.model_a0, r.sim_a0, r.sim_a0_se, r.rel_error
            );
        }
        for m in &self.missing {
            let _ = writeln!(s, "missing: {m}");
        }
        s
    }
}
