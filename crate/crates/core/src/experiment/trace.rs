//! Per-realization traces, run summaries and reference files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One CSV row: the network after `sweep` sweeps (0 is the initial state).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep: usize,
    pub energy: f64,
    /// `|energy - reference|`, empty without a reference.
    pub abs_error: Option<f64>,
    pub vqe_iters: usize,
    pub tomography_settings: u64,
    /// Wall-clock seconds of the sweep; zero unless timing is recorded.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TraceStatus {
    Complete,
    Failed { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub config_hash: String,
    pub seed: u64,
    pub outcome: TraceStatus,
    pub reference: Option<f64>,
    /// Converged energy of the classical pre-optimization, if any.
    pub classical_energy: Option<f64>,
    /// Fidelity of the initial circuit mapping, if any.
    pub init_fidelity: Option<f64>,
    pub rows: Vec<SweepRow>,
    /// Measured VQE loss per optimizer iteration, one list per sweep.
    pub vqe_losses: Vec<Vec<f64>>,
}

impl SweepTrace {
    pub fn final_energy(&self) -> Option<f64> {
        self.rows.last().map(|r| r.energy)
    }

    pub fn is_complete(&self) -> bool {
        self.outcome == TraceStatus::Complete
    }

    /// Sweep indices start at 0 and increase by one.
    pub fn sweeps_are_monotone(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| r.sweep == i)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes `trace_<seed>.csv` and `trace_<seed>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let stem = format!("trace_{}", self.seed);
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        write_atomic(&csv_path, self.to_csv()?.as_bytes())?;
        write_atomic(&json_path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok((csv_path, json_path))
    }

    /// Reads a trace from its JSON file, or from the JSON next to a CSV.
    pub fn read(path: &Path) -> Result<Self> {
        let json = if path.extension().is_some_and(|e| e == "csv") {
            path.with_extension("json")
        } else {
            path.to_path_buf()
        };
        let t: Self = serde_json::from_str(&fs::read_to_string(&json)?)?;
        if !t.sweeps_are_monotone() {
            return Err(Error::Config(format!("{}: sweep indices are not consecutive", json.display())));
        }
        Ok(t)
    }
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceMethod {
    Dense,
    Lanczos,
    /// Frustration-free sum of commuting stabilizers: `-sum |c|`.
    Stabilizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub config_hash: String,
    pub energy: f64,
    pub method: ReferenceMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub seed: u64,
    pub complete: bool,
    pub final_energy: Option<f64>,
    pub abs_error: Option<f64>,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub reference: Option<f64>,
    pub realizations: Vec<RealizationSummary>,
    /// Seed of the lowest final energy; ties go to the lowest seed.
    pub best_seed: Option<u64>,
    pub best_energy: Option<f64>,
    /// Total wall-clock seconds, only when timing is recorded.
    pub seconds: Option<f64>,
}

/// Seed and final energy of the best trace: lowest energy, then lowest seed.
/// Traces without rows are skipped.
pub fn best_of<'a>(traces: impl IntoIterator<Item = &'a SweepTrace>) -> Option<(u64, f64)> {
    traces
        .into_iter()
        .filter_map(|t| t.final_energy().map(|e| (t.seed, e)))
        .filter(|(_, e)| e.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Per-sweep `|E - E_ref|` for each trace, as CSV with one column per trace.
/// Refuses traces whose config hash differs from the reference's.
pub fn compare(traces: &[(String, SweepTrace)], reference: &Reference) -> Result<String> {
    for (name, t) in traces {
        if t.config_hash != reference.config_hash {
            return Err(Error::Config(format!(
                "{name}: config hash {} does not match reference {}",
                t.config_hash, reference.config_hash
            )));
        }
    }
    let sweeps = traces.iter().map(|(_, t)| t.rows.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sweep".to_string()];
    header.extend(traces.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for s in 0..sweeps {
        let mut rec = vec![s.to_string()];
        for (_, t) in traces {
            rec.push(
                t.rows
                    .get(s)
                    .map(|r| format!("{:e}", (r.energy - reference.energy).abs()))
                    .unwrap_or_default(),
            );
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(seed: u64, energies: &[f64]) -> SweepTrace {
        SweepTrace {
            config_hash: "h".into(),
            seed,
            outcome: TraceStatus::Complete,
            reference: Some(-2.0),
            classical_energy: None,
            init_fidelity: None,
            rows: energies
                .iter()
                .enumerate()
                .map(|(i, &e)| SweepRow {
                    sweep: i,
                    energy: e,
                    abs_error: Some((e + 2.0).abs()),
                    vqe_iters: 0,
                    tomography_settings: 0,
                    seconds: 0.0,
                })
                .collect(),
            vqe_losses: vec![],
        }
    }

    #[test]
    fn best_prefers_lower_energy_then_lower_seed() {
        let ts = [trace(3, &[-1.0, -1.5]), trace(1, &[-1.5]), trace(2, &[-1.2])];
        assert_eq!(best_of(&ts), Some((1, -1.5)));
        assert_eq!(best_of(&[]), None);
    }

    #[test]
    fn csv_has_the_fixed_columns() {
        let csv = trace(0, &[-1.0]).to_csv().unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "sweep,energy,abs_error,vqe_iters,tomography_settings,seconds"
        );
        assert_eq!(csv.lines().nth(1).unwrap(), "0,-1.0,1.0,0,0,0.0");
    }

    #[test]
    fn round_trip_and_compare() {
        let dir = tempfile::tempdir().unwrap();
        let t = trace(7, &[-1.0, -1.9]);
        let (csv, _) = t.write(dir.path()).unwrap();
        assert_eq!(SweepTrace::read(&csv).unwrap(), t);
        let r = Reference {
            config_hash: "h".into(),
            energy: -2.0,
            method: ReferenceMethod::Dense,
        };
        let out = compare(&[("a".into(), t.clone())], &r).unwrap();
        assert_eq!(out.lines().map(String::from).collect::<Vec<_>>(), ["sweep,a".to_string(), "0,1e0".into(), format!("1,{:e}", (-1.9f64 + 2.0).abs())]);
        let bad = Reference {
            config_hash: "other".into(),
            ..r
        };
        assert!(matches!(compare(&[("a".into(), t)], &bad), Err(Error::Config(_))));
    }
}
