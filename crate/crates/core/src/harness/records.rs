use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const RECORDS_HEADER: &str = "experiment_id,trial_index,halting_time,converged,final_value,wall_time_ms";

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment_id: String,
    pub trial_index: u64,
    pub halting_time: u64,
    pub converged: bool,
    /// Final residual norm, energy per spin, or training cost.
    pub final_value: f64,
    pub wall_time_ms: u64,
}

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:?},{}\n",
            r.experiment_id, r.trial_index, r.halting_time, r.converged, r.final_value, r.wall_time_ms
        ));
    }
    out
}

pub fn parse_records_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RECORDS_HEADER => {}
        _ => return Err(Error::Csv(format!("expected header {RECORDS_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Csv(format!("line {}: bad {what} in {line:?}", lineno + 1));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad("field count"));
        }
        out.push(TrialRecord {
            experiment_id: fields[0].to_string(),
            trial_index: fields[1].parse().map_err(|_| bad("trial_index"))?,
            halting_time: fields[2].parse().map_err(|_| bad("halting_time"))?,
            converged: fields[3].parse().map_err(|_| bad("converged"))?,
            final_value: fields[4].parse().map_err(|_| bad("final_value"))?,
            wall_time_ms: fields[5].parse().map_err(|_| bad("wall_time_ms"))?,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records_csv(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
