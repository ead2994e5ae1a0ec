use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::GraphSnapshot;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotLine {
    t: u64,
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// Snapshots read from a JSON Lines stream, with cleanup counts.
#[derive(Debug, Clone)]
pub struct LoadedStream {
    pub snapshots: Vec<GraphSnapshot>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Reads `{"t":..,"n":..,"edges":[[u,v],..]}` lines; blank lines are skipped.
pub fn load_snapshot_stream(path: impl AsRef<Path>) -> Result<LoadedStream> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_snapshot_stream(BufReader::new(file), path)
}

pub fn read_snapshot_stream(reader: impl BufRead, origin: &Path) -> Result<LoadedStream> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut out = LoadedStream {
        snapshots: Vec::new(),
        self_loops_dropped: 0,
        duplicates_dropped: 0,
    };
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SnapshotLine = serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        if rec.t == 0 {
            return Err(parse_err(lineno, "timestep must be >= 1".into()));
        }
        if let Some(prev) = out.snapshots.last() {
            if rec.t <= prev.t() {
                return Err(parse_err(
                    lineno,
                    format!("non-increasing timestep {} after {}", rec.t, prev.t()),
                ));
            }
        }
        let (g, report) =
            GraphSnapshot::build(rec.t, rec.n, rec.edges.iter().map(|e| (e[0], e[1]))).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("line {lineno}: {msg}")),
                other => other,
            })?;
        out.self_loops_dropped += report.self_loops;
        out.duplicates_dropped += report.duplicates;
        out.snapshots.push(g);
    }
    if out.self_loops_dropped > 0 {
        log::warn!("{}: dropped {} self-loop(s)", origin.display(), out.self_loops_dropped);
    }
    Ok(out)
}

pub fn write_snapshot_stream(path: impl AsRef<Path>, snapshots: &[GraphSnapshot]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for g in snapshots {
        let line = SnapshotLine {
            t: g.t(),
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u as usize, v as usize]).collect(),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
