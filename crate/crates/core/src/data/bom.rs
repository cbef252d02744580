//! Conversion from Bureau of Meteorology one-minute solar CSV exports.
//!
//! Those files carry one row per minute with the date split over several
//! columns in local standard time, followed by a block of irradiance
//! statistics. Only the mean global irradiance column is used. Column
//! positions are found from the header text, which varies between products.

use std::fmt::Write as _;

use crate::error::DataError;

fn find(header: &[&str], needles: &[&str]) -> Option<usize> {
    header.iter().position(|h| {
        let h = h.to_ascii_lowercase();
        needles.iter().all(|n| h.contains(n))
    })
}

/// Rewrites a BoM export as canonical `timestamp,ghi_wm2` text. Blank
/// irradiance values are kept as empty fields so the loader treats them as
/// gaps.
pub fn convert_bom(text: &str) -> Result<String, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DataError::Empty)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let missing = |what: &str| DataError::Malformed { line: 1, msg: format!("no {what} column in BoM header") };
    let year = find(&cols, &["year"]).ok_or_else(|| missing("year"))?;
    let month = find(&cols, &["month"]).ok_or_else(|| missing("month"))?;
    let day = find(&cols, &["day"]).ok_or_else(|| missing("day"))?;
    let hour = find(&cols, &["hour"]).ok_or_else(|| missing("hour"))?;
    let minute = find(&cols, &["minute"]).ok_or_else(|| missing("minute"))?;
    let ghi = find(&cols, &["mean", "global"]).ok_or_else(|| missing("mean global irradiance"))?;

    let mut out = String::from("timestamp,ghi_wm2\n");
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |idx: usize| {
            f.get(idx).copied().ok_or_else(|| DataError::Malformed {
                line: i + 1,
                msg: format!("row has {} fields, need {}", f.len(), idx + 1),
            })
        };
        let num = |idx: usize| -> Result<u32, DataError> {
            let s = field(idx)?;
            s.parse().map_err(|_| DataError::Malformed { line: i + 1, msg: format!("bad integer {s:?}") })
        };
        let value = field(ghi)?;
        writeln!(
            out,
            "{:04}-{:02}-{:02}T{:02}:{:02},{}",
            num(year)?,
            num(month)?,
            num(day)?,
            num(hour)?,
            num(minute)?,
            value
        )
        .expect("writing to a String");
    }
    Ok(out)
}
