use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub t: u64,
    /// `None` during burn-in.
    pub score: Option<f64>,
    pub detected: bool,
}

/// Per-timestep scores and the change points emitted from them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub records: Vec<ScoreRecord>,
    pub detections: Vec<u64>,
}

impl ScoreSeries {
    pub fn from_records(records: Vec<ScoreRecord>) -> Self {
        let detections = records.iter().filter(|r| r.detected).map(|r| r.t).collect();
        Self { records, detections }
    }

    /// Thresholds a raw score track: fires when `score >= threshold` and at
    /// least `cooldown` steps have passed since the previous detection.
    pub fn from_scores(times: &[u64], scores: &[Option<f64>], threshold: f64, cooldown: usize) -> Self {
        let detections = apply_threshold(times, scores, threshold, cooldown);
        let mut next = detections.iter().peekable();
        let records = times
            .iter()
            .zip(scores)
            .map(|(&t, &score)| {
                let detected = next.next_if(|&&d| d == t).is_some();
                ScoreRecord { t, score, detected }
            })
            .collect();
        Self { records, detections }
    }

    pub fn times(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn scores(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.score).collect()
    }
}

/// Detection times for `score >= threshold` with a cooldown between alarms.
pub fn apply_threshold(times: &[u64], scores: &[Option<f64>], threshold: f64, cooldown: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut prev: Option<u64> = None;
    for (&t, score) in times.iter().zip(scores) {
        let Some(s) = *score else { continue };
        if s >= threshold && prev.is_none_or(|p| t - p >= cooldown as u64) {
            out.push(t);
            prev = Some(t);
        }
    }
    out
}

/// `t,score,detected` with an empty score during burn-in and `detected` as
/// 0/1.
pub fn write_score_csv(path: impl AsRef<Path>, series: &ScoreSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "score", "detected"])?;
    for r in &series.records {
        let score = r.score.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([r.t.to_string(), score, u8::from(r.detected).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_score_csv(path: impl AsRef<Path>) -> Result<ScoreSeries> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut records = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let t = rec[0].parse().map_err(|e| bad(line, format!("{e}")))?;
        let score = match &rec[1] {
            "" => None,
            s => Some(s.parse().map_err(|e| bad(line, format!("{e}")))?),
        };
        let detected = match &rec[2] {
            "0" => false,
            "1" => true,
            other => return Err(bad(line, format!("bad detected flag {other:?}"))),
        };
        records.push(ScoreRecord { t, score, detected });
    }
    Ok(ScoreSeries::from_records(records))
}

/// Detection list as a JSON array of integers.
pub fn write_detections_json(path: impl AsRef<Path>, detections: &[u64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, detections)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
