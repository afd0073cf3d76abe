//! Attenuation time-series ingestion.
//!
//! Format: `timestamp_iso8601,attenuation_db` per line, optional header,
//! 1-minute cadence. Timestamps must be strictly increasing; gaps are
//! tolerated and reported.

use chrono::{DateTime, FixedOffset, SecondsFormat};
use rainbound::{Error, Result};
use std::path::Path;

/// A gap in the 1-minute cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    /// Index of the sample after the gap.
    pub index: usize,
    /// Gap length in minutes (cadence would be 1).
    pub minutes: f64,
}

/// Validated attenuation series.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedSeries {
    pub timestamps: Vec<DateTime<FixedOffset>>,
    pub attenuation_db: Vec<f64>,
    pub gaps: Vec<Gap>,
}

pub fn ingest_series(path: &Path) -> Result<IngestedSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<IngestedSeries> {
    let mut timestamps: Vec<DateTime<FixedOffset>> = Vec::new();
    let mut attenuation = Vec::new();
    let mut gaps = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (ts_str, a_str) = line.split_once(',').ok_or_else(|| {
            Error::Config(format!("line {}: expected `timestamp,attenuation_db`, got `{line}`", lineno + 1))
        })?;
        let ts = match DateTime::parse_from_rfc3339(ts_str.trim()) {
            Ok(ts) => ts,
            Err(e) => {
                // The first non-empty line may be a header.
                if timestamps.is_empty() && attenuation.is_empty() && a_str.trim().parse::<f64>().is_err() {
                    continue;
                }
                return Err(Error::Config(format!("line {}: bad timestamp `{}`: {e}", lineno + 1, ts_str.trim())));
            }
        };
        let a: f64 = a_str
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("line {}: bad attenuation `{}`: {e}", lineno + 1, a_str.trim())))?;
        if !a.is_finite() {
            return Err(Error::Config(format!("line {}: attenuation must be finite", lineno + 1)));
        }
        if let Some(prev) = timestamps.last() {
            let dt = ts.signed_duration_since(*prev);
            let minutes = dt.num_milliseconds() as f64 / 60_000.0;
            if minutes <= 0.0 {
                return Err(Error::Config(format!(
                    "line {}: timestamps must be strictly increasing ({} after {})",
                    lineno + 1,
                    ts.to_rfc3339(),
                    prev.to_rfc3339()
                )));
            }
            if minutes > 1.5 {
                gaps.push(Gap { index: attenuation.len(), minutes });
            }
        }
        timestamps.push(ts);
        attenuation.push(a);
    }
    if attenuation.is_empty() {
        return Err(Error::Config("series file holds no samples".into()));
    }
    Ok(IngestedSeries { timestamps, attenuation_db: attenuation, gaps })
}

/// Export a synthetic 1-minute series in the ingestion format.
pub fn export_series(
    path: &Path,
    start: DateTime<FixedOffset>,
    attenuation_db: &[f64],
) -> Result<()> {
    let mut text = String::from("timestamp_iso8601,attenuation_db\n");
    for (i, a) in attenuation_db.iter().enumerate() {
        let ts = start + chrono::Duration::minutes(i as i64);
        text.push_str(&ts.to_rfc3339_opts(SecondsFormat::Secs, true));
        text.push(',');
        text.push_str(&format!("{a}"));
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
