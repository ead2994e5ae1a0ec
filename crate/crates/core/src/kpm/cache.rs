use std::path::Path;

use super::{MomentSeries, MomentVector};
use crate::{Error, Result};

/// Writes `t,mu_1,...,mu_K`. Values use the shortest round-trip decimal
/// form, so reading the file back is bit-exact.
pub fn write_moment_cache(path: impl AsRef<Path>, series: &MomentSeries) -> Result<()> {
    let order = series.order();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=order).map(|j| format!("mu_{j}")));
    w.write_record(&header)?;
    for (t, m) in series.iter() {
        let mut row = vec![t.to_string()];
        row.extend(m.values()[..order].iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_moment_cache(path: impl AsRef<Path>) -> Result<MomentSeries> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    if header.get(0) != Some("t") {
        return Err(parse_err(1, "first column must be `t`".into()));
    }
    for (j, name) in header.iter().enumerate().skip(1) {
        if name != format!("mu_{j}") {
            return Err(parse_err(1, format!("unexpected column {name:?}")));
        }
    }
    let mut times = Vec::new();
    let mut moments = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let t = rec[0]
            .parse()
            .map_err(|e| parse_err(line, format!("bad timestep: {e}")))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(line, format!("bad moment: {e}")))?;
        times.push(t);
        moments.push(MomentVector::from_values(values));
    }
    MomentSeries::new(times, moments)
}
