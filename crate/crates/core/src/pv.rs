//! Simplified PV array model: irradiance and ambient temperature to AC power.

use crate::data::{IrradianceDay, TemperatureDay};
use crate::error::{DataError, NumericError};

/// Irradiance at standard test conditions, W/m².
pub const STC_IRRADIANCE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvParams {
    /// Nominal rating, Wp.
    pub p_nom: f64,
    /// Environmental (soiling) derating.
    pub k_e: f64,
    /// Manufacturer tolerance derating.
    pub k_m: f64,
    /// Power-temperature coefficient, per °C.
    pub k_pt: f64,
    pub eta_inv: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        PvParams {
            p_nom: 1000.0,
            k_e: 0.90,
            k_m: 0.95,
            k_pt: 0.0038,
            eta_inv: 0.95,
        }
    }
}

impl PvParams {
    pub fn kwp(&self) -> f64 {
        self.p_nom / 1000.0
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        let frac = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(NumericError::InvalidParameter(format!("{name} = {v} must be in (0, 1]")))
            }
        };
        frac("k_e", self.k_e)?;
        frac("k_m", self.k_m)?;
        frac("eta_inv", self.eta_inv)?;
        if !(0.0..=0.02).contains(&self.k_pt) {
            return Err(NumericError::InvalidParameter(format!("k_pt = {} must be in [0, 0.02]", self.k_pt)));
        }
        if !(self.p_nom > 0.0 && self.p_nom.is_finite()) {
            return Err(NumericError::InvalidParameter(format!("p_nom = {} must be > 0", self.p_nom)));
        }
        Ok(())
    }
}

/// AC output in W. GHI is taken per unit of [`STC_IRRADIANCE`]; the
/// temperature term uses ambient temperature directly.
pub fn pv_power(ghi: f64, t_amb: f64, p: &PvParams) -> f64 {
    let w = ghi / STC_IRRADIANCE * p.p_nom * p.k_e * p.k_m * (1.0 - p.k_pt * t_amb) * p.eta_inv;
    w.max(0.0)
}

/// Per-minute power with the day's maximum temperature held all day.
pub fn pv_day(day: &IrradianceDay, temp: &TemperatureDay, p: &PvParams) -> Result<Vec<f64>, DataError> {
    if day.date != temp.date {
        return Err(DataError::DateMismatch(day.date, temp.date));
    }
    Ok(day.samples.iter().map(|&g| pv_power(g, temp.t_max, p)).collect())
}

/// Per-minute power with an explicit temperature for every sample.
pub fn pv_series(ghi: &[f64], t_amb: &[f64], p: &PvParams) -> Result<Vec<f64>, NumericError> {
    if ghi.len() != t_amb.len() {
        return Err(NumericError::LengthMismatch(ghi.len(), t_amb.len()));
    }
    Ok(ghi.iter().zip(t_amb).map(|(&g, &t)| pv_power(g, t, p)).collect())
}
