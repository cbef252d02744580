//! Target output and battery commands for moving-average and ramp-rate
//! smoothing. Power is in W; positive battery power means discharge.

use crate::error::NumericError;

/// Which previous value the ramp-rate limiter measures a ramp against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RampReference {
    /// The previous limited output, so consecutive outputs never differ by
    /// more than the limit.
    #[default]
    PreviousSmoothed,
    /// The previous raw PV sample.
    PreviousRaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoother {
    /// Lagging mean over `window` samples, including the current one.
    MovingAverage { window: usize },
    /// Per-step change capped at `limit` × nominal power.
    RampRate { limit: f64, reference: RampReference },
}

impl Smoother {
    pub fn moving_average(window: usize) -> Self {
        Smoother::MovingAverage { window }
    }

    pub fn ramp_rate(limit: f64) -> Self {
        Smoother::RampRate { limit, reference: RampReference::PreviousSmoothed }
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        match *self {
            Smoother::MovingAverage { window } if window < 1 => {
                Err(NumericError::InvalidParameter("moving-average window must be >= 1".into()))
            }
            Smoother::RampRate { limit, .. } if !(limit > 0.0 && limit <= 1.0) => Err(
                NumericError::InvalidParameter(format!("ramp-rate limit {limit} must be in (0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, p_pv: &[f64], p_nom: f64) -> SmoothedDay {
        match *self {
            Smoother::MovingAverage { window } => ma_smooth(p_pv, window),
            Smoother::RampRate { limit, reference } => rr_smooth(p_pv, limit, p_nom, reference),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDay {
    pub p_target: Vec<f64>,
    /// `p_target - p_pv` at every step.
    pub p_sb: Vec<f64>,
}

impl SmoothedDay {
    fn from_target(p_pv: &[f64], p_target: Vec<f64>) -> Self {
        let p_sb = p_target.iter().zip(p_pv).map(|(t, p)| t - p).collect();
        SmoothedDay { p_target, p_sb }
    }
}

/// Lagging moving average; samples before the start of the series count as 0.
pub fn ma_smooth(p_pv: &[f64], n_w: usize) -> SmoothedDay {
    let n_w = n_w.max(1);
    if n_w == 1 {
        return SmoothedDay::from_target(p_pv, p_pv.to_vec());
    }
    let mut target = Vec::with_capacity(p_pv.len());
    for t in 0..p_pv.len() {
        let lo = (t + 1).saturating_sub(n_w);
        // summed fresh each step so results do not depend on accumulated roundoff
        let sum: f64 = p_pv[lo..=t].iter().sum();
        target.push(sum / n_w as f64);
    }
    SmoothedDay::from_target(p_pv, target)
}

/// Ramp-rate limiter with `max_step = k_rrl * p_nom`. The first output equals
/// the first PV sample.
pub fn rr_smooth(p_pv: &[f64], k_rrl: f64, p_nom: f64, reference: RampReference) -> SmoothedDay {
    let max_step = k_rrl * p_nom;
    let mut target: Vec<f64> = Vec::with_capacity(p_pv.len());
    for (t, &p) in p_pv.iter().enumerate() {
        let value = if t == 0 {
            p
        } else {
            let base = match reference {
                RampReference::PreviousSmoothed => target[t - 1],
                RampReference::PreviousRaw => p_pv[t - 1],
            };
            let delta = p - base;
            if delta.abs() <= max_step {
                p
            } else if delta < 0.0 {
                base - max_step
            } else {
                base + max_step
            }
        };
        target.push(value);
    }
    SmoothedDay::from_target(p_pv, target)
}
