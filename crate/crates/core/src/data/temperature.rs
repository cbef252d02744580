use std::path::Path;

use chrono::NaiveDate;

use crate::error::DataError;

pub const HEADER: &str = "date,tmax_c";
const T_BOUNDS: (f64, f64) = (-60.0, 60.0);

/// Daily maximum temperature, applied to every minute of the day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureDay {
    pub date: NaiveDate,
    pub t_max: f64,
    /// Carried forward from the previous date because the row was missing.
    pub filled: bool,
}

pub fn load_temperature(path: &Path) -> Result<Vec<TemperatureDay>, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_temperature(&text)
}

pub fn parse_temperature(text: &str) -> Result<Vec<TemperatureDay>, DataError> {
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

    let mut out: Vec<TemperatureDay> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (d, t) = line.split_once(',').ok_or_else(|| DataError::Malformed {
            line: line_no,
            msg: "expected date,tmax_c".into(),
        })?;
        let date = NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d").map_err(|e| DataError::Malformed {
            line: line_no,
            msg: format!("bad date {:?}: {e}", d.trim()),
        })?;
        let t_max: f64 = t.trim().parse().map_err(|_| DataError::Malformed {
            line: line_no,
            msg: format!("bad temperature {:?}", t.trim()),
        })?;
        if !(T_BOUNDS.0..=T_BOUNDS.1).contains(&t_max) {
            return Err(DataError::OutOfRange {
                line: line_no,
                field: "tmax_c",
                value: t_max,
                lo: T_BOUNDS.0,
                hi: T_BOUNDS.1,
            });
        }
        if let Some(last) = out.last().copied() {
            if date == last.date {
                return Err(DataError::Duplicate { line: line_no, timestamp: d.trim().into() });
            }
            if date < last.date {
                return Err(DataError::NonMonotonic { line: line_no, timestamp: d.trim().into() });
            }
            let mut fill = last.date.succ_opt();
            while let Some(missing) = fill.filter(|&f| f < date) {
                out.push(TemperatureDay { date: missing, t_max: last.t_max, filled: true });
                fill = missing.succ_opt();
            }
        }
        out.push(TemperatureDay { date, t_max, filled: false });
    }
    Ok(out)
}
