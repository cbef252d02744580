//! Deterministic synthetic irradiance for fixtures and demonstrations.

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::{IrradianceDay, SiteMeta, TemperatureDay, GHI_CEILING};
use crate::solar::clear_sky;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Exactly the clear-sky profile.
    Clear,
    /// Clear sky cut by seeded cloud transients.
    Mixed,
    /// A quarter of clear sky all day.
    Overcast,
    /// Clear sky for half of each period, a fifth of it for the other half.
    SquareWave { period: u32 },
}

impl Profile {
    pub const OVERCAST_FRACTION: f64 = 0.25;
    pub const SQUARE_LOW_FRACTION: f64 = 0.2;
}

/// Builds one synthetic day. Pure in its arguments.
pub fn synthesize_day(profile: Profile, seed: u64, site: &SiteMeta, date: NaiveDate) -> IrradianceDay {
    let cs = clear_sky(site, date).samples;
    let samples: Vec<f64> = match profile {
        Profile::Clear => cs,
        Profile::Overcast => cs.iter().map(|v| v * Profile::OVERCAST_FRACTION).collect(),
        Profile::SquareWave { period } => {
            let half = (period / 2).max(1) as usize;
            cs.iter()
                .enumerate()
                .map(|(m, v)| if (m / half) % 2 == 0 { *v } else { v * Profile::SQUARE_LOW_FRACTION })
                .collect()
        }
        Profile::Mixed => {
            let factor = cloud_transmittance(seed, &cs);
            cs.iter().zip(&factor).map(|(v, f)| (v * f).min(GHI_CEILING)).collect()
        }
    };
    IrradianceDay::new(date, samples).expect("synthetic samples stay within physical bounds")
}

/// Per-minute transmittance from a seeded set of cloud passages over the
/// daylight window.
fn cloud_transmittance(seed: u64, cs: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cs.len();
    let mut factor = vec![1.0; n];
    let (Some(rise), Some(set)) = (cs.iter().position(|&v| v > 0.0), cs.iter().rposition(|&v| v > 0.0)) else {
        return factor;
    };

    let cloudiness: f64 = rng.gen_range(0.05..1.0);
    let haze = 1.0 - 0.15 * cloudiness * rng.gen::<f64>();
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    let events = (90.0 * (0.6 * z).exp()).round().min(600.0) as usize;
    // busier skies break into shorter passages
    let duration = Exp::new(1.0 / (8.0 * (-0.4 * z).exp())).unwrap();
    for f in factor.iter_mut() {
        *f = haze;
    }
    for _ in 0..events {
        let start = rng.gen_range(rise..=set) as f64;
        let length: f64 = (2.0 + duration.sample(&mut rng)).min(60.0);
        let depth: f64 = rng.gen_range(0.15..0.7);
        let edge: f64 = rng.gen_range(1.0..3.0);
        let lo = start.floor() as usize;
        let hi = ((start + length + edge).ceil() as usize).min(n - 1);
        for (m, f) in factor.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let t = m as f64;
            // trapezoid: ramp in over `edge` minutes, hold, ramp out
            let into = ((t - start) / edge).clamp(0.0, 1.0);
            let out = ((start + length + edge - t) / edge).clamp(0.0, 1.0);
            let cover = into.min(out);
            let tau = 1.0 - cover * (1.0 - depth);
            *f *= tau;
        }
    }
    for f in factor.iter_mut() {
        *f = f.max(0.05 * haze);
    }
    factor
}

#[derive(Debug, Clone)]
pub struct SyntheticYear {
    pub site: SiteMeta,
    pub days: Vec<IrradianceDay>,
    pub temps: Vec<TemperatureDay>,
}

/// A full calendar year mixing clear, overcast and cloudy days with a
/// seasonal daily-maximum temperature.
pub fn synthetic_year(site: &SiteMeta, year: i32, seed: u64) -> SyntheticYear {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let south = site.latitude < 0.0;
    let mut days = Vec::new();
    let mut temps = Vec::new();
    let mut date = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    while date.year() == year {
        let pick: f64 = rng.gen();
        let day_seed: u64 = rng.gen();
        let profile = if pick < 0.35 {
            Profile::Clear
        } else if pick < 0.45 {
            Profile::Overcast
        } else {
            Profile::Mixed
        };
        days.push(synthesize_day(profile, day_seed, site, date));

        let phase = 2.0 * std::f64::consts::PI * (date.ordinal() as f64 - 15.0) / 365.0;
        let seasonal = if south { phase.cos() } else { -phase.cos() };
        let t = 24.0 + 8.0 * seasonal + noise.sample(&mut rng);
        temps.push(TemperatureDay {
            date,
            t_max: (t * 10.0).round() / 10.0,
            filled: false,
        });
        date = date.succ_opt().expect("date in range");
    }
    SyntheticYear { site: site.clone(), days, temps }
}
