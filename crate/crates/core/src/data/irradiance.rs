use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, Timelike};

use super::{IrradianceDay, GHI_CEILING, MINUTES_PER_DAY};
use crate::error::DataError;

pub const HEADER: &str = "timestamp,ghi_wm2";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// Longest run of missing minutes that is filled by interpolation.
pub const MAX_GAP_MINUTES: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedDay {
    pub date: NaiveDate,
    pub longest_gap: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrradianceLoad {
    pub days: Vec<IrradianceDay>,
    pub excluded: Vec<ExcludedDay>,
}

pub fn load_irradiance(path: &Path) -> Result<IrradianceLoad, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_irradiance(&text)
}

/// Parses the canonical `timestamp,ghi_wm2` format. Empty or `NaN` values
/// count as missing; absent rows likewise.
pub fn parse_irradiance(text: &str) -> Result<IrradianceLoad, DataError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        Some((_, h)) => {
            return Err(DataError::Malformed {
                line: 1,
                msg: format!("expected header {HEADER:?}, got {:?}", h.trim()),
            })
        }
        None => return Err(DataError::Empty),
    }

    let mut raw: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    let mut previous: Option<NaiveDateTime> = None;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (ts, value) = line.split_once(',').ok_or_else(|| DataError::Malformed {
            line: line_no,
            msg: "expected two comma-separated fields".into(),
        })?;
        let ts = ts.trim();
        let stamp = NaiveDateTime::parse_from_str(ts, TIMESTAMP_FORMAT).map_err(|e| DataError::Malformed {
            line: line_no,
            msg: format!("bad timestamp {ts:?}: {e}"),
        })?;
        if let Some(prev) = previous {
            if stamp == prev {
                return Err(DataError::Duplicate { line: line_no, timestamp: ts.into() });
            }
            if stamp < prev {
                return Err(DataError::NonMonotonic { line: line_no, timestamp: ts.into() });
            }
        }
        previous = Some(stamp);

        let value = value.trim();
        let ghi = if value.is_empty() || value.eq_ignore_ascii_case("nan") {
            None
        } else {
            let v: f64 = value.parse().map_err(|_| DataError::Malformed {
                line: line_no,
                msg: format!("bad GHI value {value:?}"),
            })?;
            if !(0.0..=GHI_CEILING).contains(&v) {
                return Err(DataError::OutOfRange {
                    line: line_no,
                    field: "ghi_wm2",
                    value: v,
                    lo: 0.0,
                    hi: GHI_CEILING,
                });
            }
            Some(v)
        };
        let minute = (stamp.hour() * 60 + stamp.minute()) as usize;
        raw.entry(stamp.date()).or_insert_with(|| vec![None; MINUTES_PER_DAY])[minute] = ghi;
    }

    let mut out = IrradianceLoad::default();
    for (&date, samples) in &raw {
        let prev_last = date
            .pred_opt()
            .and_then(|d| raw.get(&d))
            .and_then(|s| s[MINUTES_PER_DAY - 1]);
        let next_first = date.succ_opt().and_then(|d| raw.get(&d)).and_then(|s| s[0]);
        match fill_gaps(samples, prev_last, next_first) {
            Ok((values, mask)) => out.days.push(IrradianceDay { date, samples: values, gap_mask: mask }),
            Err(longest_gap) => out.excluded.push(ExcludedDay { date, longest_gap }),
        }
    }
    Ok(out)
}

/// Linearly interpolates runs of at most [`MAX_GAP_MINUTES`] missing samples
/// between their neighbours, borrowing the adjacent day's edge sample where
/// a run touches midnight. A run with only one neighbour holds that value.
/// Returns the longest run on failure.
fn fill_gaps(
    samples: &[Option<f64>],
    before: Option<f64>,
    after: Option<f64>,
) -> Result<(Vec<f64>, Vec<bool>), usize> {
    let n = samples.len();
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    let mut longest = 0;
    let mut i = 0;
    while i < n {
        if let Some(v) = samples[i] {
            values[i] = v;
            i += 1;
            continue;
        }
        let start = i;
        while i < n && samples[i].is_none() {
            i += 1;
        }
        let len = i - start;
        longest = longest.max(len);
        if len > MAX_GAP_MINUTES {
            continue;
        }
        let left = if start == 0 { before } else { samples[start - 1] };
        let right = if i == n { after } else { samples[i] };
        for (k, j) in (start..i).enumerate() {
            values[j] = match (left, right) {
                (Some(a), Some(b)) => a + (b - a) * (k + 1) as f64 / (len + 1) as f64,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("a run shorter than a day has a neighbour"),
            };
            mask[j] = true;
        }
    }
    if longest > MAX_GAP_MINUTES {
        Err(longest)
    } else {
        Ok((values, mask))
    }
}

/// Writes days in the canonical format; values use the shortest decimal
/// representation that round-trips.
pub fn write_canonical<W: Write>(days: &[IrradianceDay], mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for day in days {
        for (minute, v) in day.samples.iter().enumerate() {
            writeln!(out, "{}T{:02}:{:02},{}", day.date.format("%Y-%m-%d"), minute / 60, minute % 60, v)?;
        }
    }
    Ok(())
}
