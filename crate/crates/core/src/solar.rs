//! Clear-sky irradiance and the daily solar irradiance variability index.

use chrono::{Datelike, NaiveDate};

use crate::data::{IrradianceDay, SiteMeta, MINUTES_PER_DAY};
use crate::error::NumericError;

/// Clear-sky GHI for one date at one site, one value per minute.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearSkyProfile {
    pub date: NaiveDate,
    pub samples: Vec<f64>,
}

/// A model producing clear-sky GHI from solar geometry.
pub trait ClearSkyModel: Sync {
    /// GHI in W/m² for a solar zenith angle given as its cosine.
    fn ghi(&self, cos_zenith: f64) -> f64;
}

/// Haurwitz: `1098 cos z exp(-0.057 / cos z)` above the horizon.
#[derive(Debug, Clone, Copy, Default)]
pub struct Haurwitz;

impl ClearSkyModel for Haurwitz {
    fn ghi(&self, cos_zenith: f64) -> f64 {
        if cos_zenith <= 0.0 {
            0.0
        } else {
            1098.0 * cos_zenith * (-0.057 / cos_zenith).exp()
        }
    }
}

/// Declination (rad) and equation of time (minutes) from Spencer's Fourier
/// series, for fractional day of year `day` (1 = Jan 1 00:00).
fn declination_and_eot(day: f64) -> (f64, f64) {
    let g = 2.0 * std::f64::consts::PI * (day - 1.0) / 365.0;
    let (s1, c1) = g.sin_cos();
    let (s2, c2) = (2.0 * g).sin_cos();
    let (s3, c3) = (3.0 * g).sin_cos();
    let decl = 0.006918 - 0.399912 * c1 + 0.070257 * s1 - 0.006758 * c2 + 0.000907 * s2 - 0.002697 * c3
        + 0.00148 * s3;
    let eot = 229.18 * (0.000075 + 0.001868 * c1 - 0.032077 * s1 - 0.014615 * c2 - 0.040849 * s2);
    (decl, eot)
}

/// Cosine of the solar zenith angle at `minute` past local standard midnight.
pub fn cos_zenith(site: &SiteMeta, date: NaiveDate, minute: f64) -> f64 {
    let day = date.ordinal() as f64 + minute / MINUTES_PER_DAY as f64;
    let (decl, eot) = declination_and_eot(day);
    let solar_minutes = minute + 4.0 * (site.longitude - 15.0 * site.utc_offset) + eot;
    let hour_angle = (solar_minutes / 4.0 - 180.0).to_radians();
    let lat = site.latitude.to_radians();
    lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos()
}

/// Solar zenith angle in degrees.
pub fn zenith_deg(site: &SiteMeta, date: NaiveDate, minute: f64) -> f64 {
    cos_zenith(site, date, minute).clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn clear_sky_with<M: ClearSkyModel + ?Sized>(model: &M, site: &SiteMeta, date: NaiveDate) -> ClearSkyProfile {
    let samples = (0..MINUTES_PER_DAY)
        .map(|m| model.ghi(cos_zenith(site, date, m as f64)))
        .collect();
    ClearSkyProfile { date, samples }
}

/// Haurwitz clear-sky profile.
pub fn clear_sky(site: &SiteMeta, date: NaiveDate) -> ClearSkyProfile {
    clear_sky_with(&Haurwitz, site, date)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiviResult {
    pub date: NaiveDate,
    pub sivi: f64,
    /// Sample spacing, minutes.
    pub delta_t: f64,
    pub n_samples: usize,
}

/// Summed segment lengths of a series plotted against time with spacing `dt`.
pub fn path_length(series: &[f64], dt: f64) -> f64 {
    series
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            (d * d + dt * dt).sqrt()
        })
        .sum()
}

/// Ratio of path lengths of a measured series and its clear-sky reference.
/// Irradiance differences (W/m²) and `dt` (minutes) are combined as-is.
pub fn sivi_of(ghi: &[f64], clear: &[f64], dt: f64) -> Result<f64, NumericError> {
    if ghi.len() != clear.len() {
        return Err(NumericError::LengthMismatch(ghi.len(), clear.len()));
    }
    if ghi.len() < 2 {
        return Err(NumericError::TooFewSamples { need: 2, got: ghi.len() });
    }
    if clear.iter().all(|&v| v == 0.0) {
        return Err(NumericError::ZeroClearSky);
    }
    let denom = path_length(clear, dt);
    if denom <= 0.0 {
        return Err(NumericError::ZeroClearSky);
    }
    Ok(path_length(ghi, dt) / denom)
}

pub fn sivi(day: &IrradianceDay, cs: &ClearSkyProfile) -> Result<SiviResult, NumericError> {
    let value = sivi_of(&day.samples, &cs.samples, 1.0)?;
    Ok(SiviResult {
        date: day.date,
        sivi: value,
        delta_t: 1.0,
        n_samples: day.samples.len(),
    })
}
