//! Result persistence: per-cell rows, aggregates, slope fits, and the
//! on-disk layout (summary.json + rows.csv + incremental cell files).
//!
//! Timing metrics go to a separate metrics.json so that every other output
//! byte is a pure function of config and master seed.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// One experiment cell: a (size, seed) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    /// schedule coordinate (particle count, mode count or epsilon index)
    pub n: usize,
    pub seed_index: usize,
    pub seed: u64,
    /// the cell's headline statistic; None when the cell blew up
    pub statistic: Option<f64>,
    /// sup-in-time ensemble-average squared L2 norm
    pub sup_second_moment: f64,
    /// time integral of the first particle's dissipation norm
    pub dissipation_integral: f64,
    pub blow_up: bool,
}

/// Per-size aggregate over seeds, recomputable from the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub cells: usize,
    pub mean: f64,
    pub std_err: f64,
    pub mean_sup_second_moment: f64,
}

/// The deterministic experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub kind: String,
    pub rows: Vec<CellRow>,
    pub aggregates: Vec<Aggregate>,
    /// least-squares slope of log mean statistic against log n
    pub slope: Option<f64>,
    /// experiment-specific named scalars
    pub extra: BTreeMap<String, f64>,
}

impl ResultRecord {
    pub fn new(config_hash: String, kind: &str, mut rows: Vec<CellRow>) -> Self {
        rows.sort_by_key(|r| (r.n, r.seed_index));
        let aggregates = aggregate(&rows);
        let slope = fit_log_slope(&aggregates);
        ResultRecord {
            config_hash,
            kind: kind.to_string(),
            rows,
            aggregates,
            slope,
            extra: BTreeMap::new(),
        }
    }

    /// Mean statistic per schedule entry, in schedule order.
    pub fn means(&self) -> Vec<(usize, f64)> {
        self.aggregates.iter().map(|a| (a.n, a.mean)).collect()
    }

    /// Recompute aggregates from rows and cross-check the stored copies.
    /// Comparison allows a few ulps: the recomputation may run through a
    /// differently optimized inlining of the same arithmetic.
    pub fn verify_aggregates(&self) -> Result<()> {
        let fresh = aggregate(&self.rows);
        let ok = fresh.len() == self.aggregates.len()
            && fresh.iter().zip(self.aggregates.iter()).all(|(a, b)| {
                a.n == b.n
                    && a.cells == b.cells
                    && close(a.mean, b.mean)
                    && close(a.std_err, b.std_err)
                    && close(a.mean_sup_second_moment, b.mean_sup_second_moment)
            });
        if !ok {
            return Err(Error::config(
                "stored aggregates disagree with per-seed rows",
            ));
        }
        let fresh_slope = fit_log_slope(&fresh);
        let slope_ok = match (fresh_slope, self.slope) {
            (None, None) => true,
            (Some(a), Some(b)) => close(a, b),
            _ => false,
        };
        if !slope_ok {
            return Err(Error::config("stored slope disagrees with rows"));
        }
        Ok(())
    }

    pub fn write_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        atomic_write(&dir.join("summary.json"), json.as_bytes())?;

        let mut csv = String::new();
        csv.push_str("n,seed_index,seed,statistic,sup_second_moment,dissipation_integral,blow_up\n");
        for r in &self.rows {
            let stat = r.statistic.map(|s| s.to_string()).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.seed_index, r.seed, stat, r.sup_second_moment, r.dissipation_integral,
                r.blow_up
            ));
        }
        atomic_write(&dir.join("rows.csv"), csv.as_bytes())?;
        Ok(())
    }

    pub fn read_from(dir: &Path) -> Result<ResultRecord> {
        let text = std::fs::read_to_string(dir.join("summary.json"))?;
        let record: ResultRecord =
            serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))?;
        record.verify_aggregates()?;
        Ok(record)
    }
}

fn close(a: f64, b: f64) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    (a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(b.abs())
}

fn aggregate(rows: &[CellRow]) -> Vec<Aggregate> {
    let mut by_n: BTreeMap<usize, Vec<&CellRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n
        .into_iter()
        .map(|(n, cells)| {
            let ok: Vec<f64> = cells.iter().filter_map(|c| c.statistic).collect();
            let count = ok.len();
            let mean = if count > 0 {
                ok.iter().sum::<f64>() / count as f64
            } else {
                f64::NAN
            };
            let std_err = if count > 1 {
                let var =
                    ok.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
                (var / count as f64).sqrt()
            } else {
                0.0
            };
            let mean_moment =
                cells.iter().map(|c| c.sup_second_moment).sum::<f64>() / cells.len() as f64;
            Aggregate {
                n,
                cells: count,
                mean,
                std_err,
                mean_sup_second_moment: mean_moment,
            }
        })
        .collect()
}

/// Least-squares slope of ln(mean) against ln(n) over entries with positive
/// finite means; None with fewer than two usable points.
fn fit_log_slope(aggregates: &[Aggregate]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = aggregates
        .iter()
        .filter(|a| a.mean.is_finite() && a.mean > 0.0 && a.cells > 0)
        .map(|a| ((a.n as f64).ln(), a.mean.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Timing and throughput, written beside the deterministic outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub wall_seconds: f64,
    /// particle x retained-mode x step work units per second
    pub particle_mode_steps_per_second: f64,
    pub worker_threads: usize,
}

impl RunMetrics {
    pub fn write_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        atomic_write(&dir.join("metrics.json"), json.as_bytes())?;
        Ok(())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn cell_path(dir: &Path, n: usize, seed_index: usize) -> PathBuf {
    dir.join("cells").join(format!("n{n}_s{seed_index}.json"))
}

#[derive(Debug, Serialize, Deserialize)]
struct StoredCell {
    config_hash: String,
    row: CellRow,
}

/// Persist one finished cell (atomic), keyed by the config hash.
pub fn store_cell(dir: &Path, config_hash: &str, row: &CellRow) -> Result<()> {
    let path = cell_path(dir, row.n, row.seed_index);
    std::fs::create_dir_all(path.parent().unwrap())?;
    let json = serde_json::to_string(&StoredCell {
        config_hash: config_hash.to_string(),
        row: row.clone(),
    })
    .map_err(|e| Error::Serialize(e.to_string()))?;
    atomic_write(&path, json.as_bytes())
}

/// A previously finished cell, if one exists for this exact config.
pub fn load_cell(dir: &Path, config_hash: &str, n: usize, seed_index: usize) -> Option<CellRow> {
    let path = cell_path(dir, n, seed_index);
    let text = std::fs::read_to_string(path).ok()?;
    let stored: StoredCell = serde_json::from_str(&text).ok()?;
    (stored.config_hash == config_hash).then_some(stored.row)
}
