//! Input types and the on-disk formats they are read from.

mod bom;
mod irradiance;
mod site;
mod synth;
mod temperature;

pub use bom::convert_bom;
pub use irradiance::{load_irradiance, parse_irradiance, write_canonical, ExcludedDay, IrradianceLoad, MAX_GAP_MINUTES};
pub use site::{load_site, parse_site, SiteMeta};
pub use synth::{synthesize_day, synthetic_year, Profile, SyntheticYear};
pub use temperature::{load_temperature, parse_temperature, TemperatureDay};

use chrono::NaiveDate;

use crate::error::DataError;

pub const MINUTES_PER_DAY: usize = 1440;

/// Physical ceiling used to reject corrupt GHI readings, W/m².
pub const GHI_CEILING: f64 = 1600.0;

/// One day of 1-minute global horizontal irradiance, W/m².
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceDay {
    pub date: NaiveDate,
    pub samples: Vec<f64>,
    /// `true` where the sample was interpolated across a gap.
    pub gap_mask: Vec<bool>,
}

impl IrradianceDay {
    pub fn new(date: NaiveDate, samples: Vec<f64>) -> Result<Self, DataError> {
        let gap_mask = vec![false; samples.len()];
        Self::with_mask(date, samples, gap_mask)
    }

    pub fn with_mask(date: NaiveDate, samples: Vec<f64>, gap_mask: Vec<bool>) -> Result<Self, DataError> {
        if samples.len() != MINUTES_PER_DAY || gap_mask.len() != MINUTES_PER_DAY {
            return Err(DataError::Malformed {
                line: 0,
                msg: format!("{date}: expected {MINUTES_PER_DAY} samples, got {}", samples.len()),
            });
        }
        if let Some((i, &v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && **v <= GHI_CEILING))
        {
            return Err(DataError::Malformed {
                line: 0,
                msg: format!("{date} minute {i}: GHI {v} outside [0, {GHI_CEILING}]"),
            });
        }
        Ok(IrradianceDay { date, samples, gap_mask })
    }

    pub fn imputed(&self) -> usize {
        self.gap_mask.iter().filter(|&&g| g).count()
    }
}
