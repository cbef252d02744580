//! Chronological simulation and capacity optimisation of a smoothing battery.
//!
//! Each day is simulated at 1-minute steps from a fresh battery; the smallest
//! capacity that can always supply the smoothing command is found by
//! bisection. Charge refused by a full battery is curtailed PV and does not
//! count against a capacity; running out of available charge or reaching the
//! SoC floor does. Capacities are in kWh per kWp of PV so results transfer
//! between array sizes.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::battery::{fresh_state, soc, step, BatteryConfig, Clip};
use crate::data::{IrradianceDay, SiteMeta, TemperatureDay};
use crate::empirical::{pearson, EmpiricalCdf};
use crate::error::{DataError, NumericError};
use crate::pv::{pv_day, PvParams};
use crate::smoothing::Smoother;
use crate::solar::{clear_sky, sivi};

pub const MINUTE_HOURS: f64 = 1.0 / 60.0;

/// PONE levels always reported alongside the requested one.
pub const STANDARD_PONE: [f64; 6] = [0.50, 0.75, 0.90, 0.95, 0.99, 1.00];

/// Bisection bounds, kWh per kWp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBounds {
    pub tol: f64,
    pub upper: f64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { tol: 1e-4, upper: 2.0 }
    }
}

impl SearchBounds {
    /// Year-long hourly runs carry converter losses with no nightly reset and
    /// need a much wider bracket.
    pub const HOURLY: SearchBounds = SearchBounds { tol: 1e-3, upper: 1000.0 };
}

/// Everything that stays fixed while a capacity is searched for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingSetup {
    pub smoother: Smoother,
    /// Battery template; `e_nom` is overwritten by the search.
    pub battery: BatteryConfig,
    pub pv: PvParams,
    pub search: SearchBounds,
}

impl Default for SizingSetup {
    fn default() -> Self {
        SizingSetup {
            smoother: Smoother::moving_average(10),
            battery: BatteryConfig::default(),
            pv: PvParams::default(),
            search: SearchBounds::default(),
        }
    }
}

impl SizingSetup {
    pub fn validate(&self) -> Result<(), NumericError> {
        self.smoother.validate()?;
        self.battery.validate()?;
        self.pv.validate()?;
        if !(self.search.tol > 0.0 && self.search.upper > self.search.tol) {
            return Err(NumericError::InvalidParameter(format!(
                "need 0 < tol < upper, got tol {} upper {}",
                self.search.tol, self.search.upper
            )));
        }
        Ok(())
    }
}

/// A day reduced to what the sizing routines need.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDay {
    pub date: NaiveDate,
    pub sivi: f64,
    /// AC PV power per minute, W.
    pub power: Vec<f64>,
}

/// Computes SIVI and PV power for every irradiance day that has a matching
/// temperature record.
pub fn prepare_days(
    site: &SiteMeta,
    days: &[IrradianceDay],
    temps: &[TemperatureDay],
    pv: &PvParams,
) -> Result<Vec<PreparedDay>, PrepareError> {
    days.par_iter()
        .map(|day| {
            let temp = temps
                .binary_search_by_key(&day.date, |t| t.date)
                .map(|i| &temps[i])
                .map_err(|_| PrepareError::MissingTemperature(day.date))?;
            let cs = clear_sky(site, day.date);
            let s = sivi(day, &cs)?.sivi;
            let power = pv_day(day, temp, pv)?;
            Ok(PreparedDay { date: day.date, sivi: s, power })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum PrepareError {
    #[error("no temperature record for {0}")]
    MissingTemperature(NaiveDate),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayOutcome {
    pub feasible: bool,
    pub min_soc: f64,
    pub max_soc: f64,
    pub any_clip: bool,
}

/// Drives the battery through a sequence of AC commands (W, positive =
/// discharge) starting from `fresh_state`. Stops early at the first
/// violation when `stop_early` is set.
pub fn simulate_commands(p_sb: &[f64], cfg: &BatteryConfig, dt: f64, stop_early: bool) -> DayOutcome {
    let mut state = fresh_state(cfg);
    let mut outcome = DayOutcome {
        feasible: true,
        min_soc: cfg.soc_init,
        max_soc: cfg.soc_init,
        any_clip: false,
    };
    for &p in p_sb {
        let out = step(&state, p, dt, cfg);
        state = out.state;
        let s = soc(&state, cfg);
        outcome.min_soc = outcome.min_soc.min(s);
        outcome.max_soc = outcome.max_soc.max(s);
        let violated = match out.clip {
            Some(Clip::Empty | Clip::Floor) => true,
            Some(Clip::Full) => false,
            None => s <= cfg.soc_min || s > cfg.soc_max,
        };
        if out.clipped() {
            outcome.any_clip = true;
        }
        if violated {
            outcome.feasible = false;
            if stop_early {
                break;
            }
        }
    }
    outcome
}

/// Runs one day of 1-minute PV power through the smoother and the battery.
pub fn simulate_day(day_power: &[f64], smoother: &Smoother, cfg: &BatteryConfig, p_nom: f64) -> DayOutcome {
    let smoothed = smoother.apply(day_power, p_nom);
    simulate_commands(&smoothed.p_sb, cfg, MINUTE_HOURS, false)
}

/// Result of a bisection on capacity, in kWh per kWp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitySearch {
    pub sboc: f64,
    pub feasible_at_cap: bool,
    pub iterations: u32,
}

/// Smallest capacity (kWh/kWp) for which `feasible` holds, to within `tol`.
/// The lower end of the bracket is never evaluated.
pub fn bisect_capacity<F: Fn(f64) -> bool>(feasible: F, search: SearchBounds) -> CapacitySearch {
    let mut iterations = 1;
    if !feasible(search.upper) {
        return CapacitySearch { sboc: search.upper, feasible_at_cap: false, iterations };
    }
    let (mut lo, mut hi) = (0.0, search.upper);
    while hi - lo >= search.tol {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    CapacitySearch { sboc: hi, feasible_at_cap: true, iterations }
}

/// Feasibility of a capacity given per kWp, for precomputed commands.
pub fn feasible_per_kwp(p_sb: &[f64], setup: &SizingSetup, per_kwp: f64, dt: f64) -> bool {
    let cfg = setup.battery.with_capacity(per_kwp * setup.pv.kwp());
    simulate_commands(p_sb, &cfg, dt, true).feasible
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailySizingResult {
    pub date: NaiveDate,
    pub sivi: f64,
    /// kWh per kWp.
    pub sboc: f64,
    pub feasible_at_cap: bool,
    pub iterations: u32,
}

pub fn optimize_day(day: &PreparedDay, setup: &SizingSetup) -> DailySizingResult {
    let smoothed = setup.smoother.apply(&day.power, setup.pv.p_nom);
    let found = bisect_capacity(
        |c| feasible_per_kwp(&smoothed.p_sb, setup, c, MINUTE_HOURS),
        setup.search,
    );
    DailySizingResult {
        date: day.date,
        sivi: day.sivi,
        sboc: found.sboc,
        feasible_at_cap: found.feasible_at_cap,
        iterations: found.iterations,
    }
}

#[derive(Debug, Clone)]
pub struct YearSizingReport {
    pub per_day: Vec<DailySizingResult>,
    pub cdf: EmpiricalCdf,
    /// Requested PONE level and the capacity selected at it.
    pub pone: f64,
    pub sboc: f64,
    /// (level, capacity) for [`STANDARD_PONE`] plus the requested level.
    pub sboc_at_pone: Vec<(f64, f64)>,
    /// `None` when either series is constant.
    pub pearson_r: Option<f64>,
}

impl YearSizingReport {
    pub fn mean_sboc(&self) -> f64 {
        self.per_day.iter().map(|d| d.sboc).sum::<f64>() / self.per_day.len() as f64
    }
}

pub fn size_year(days: &[PreparedDay], setup: &SizingSetup, pone: f64) -> Result<YearSizingReport, NumericError> {
    if days.is_empty() {
        return Err(NumericError::Empty);
    }
    if !(pone > 0.0 && pone <= 1.0) {
        return Err(NumericError::InvalidParameter(format!("PONE level {pone} must be in (0, 1]")));
    }
    setup.validate()?;
    let mut per_day: Vec<DailySizingResult> = days.par_iter().map(|d| optimize_day(d, setup)).collect();
    per_day.sort_by_key(|d| d.date);

    let cdf = EmpiricalCdf::new(per_day.iter().map(|d| d.sboc).collect())?;
    let mut levels: Vec<f64> = STANDARD_PONE.to_vec();
    if !levels.contains(&pone) {
        levels.push(pone);
        levels.sort_by(f64::total_cmp);
    }
    let sboc_at_pone = levels
        .iter()
        .map(|&l| cdf.quantile(l).map(|v| (l, v)))
        .collect::<Result<Vec<_>, _>>()?;
    let sboc = cdf.quantile(pone)?;
    let xs: Vec<f64> = per_day.iter().map(|d| d.sivi).collect();
    let ys: Vec<f64> = per_day.iter().map(|d| d.sboc).collect();
    let pearson_r = pearson(&xs, &ys).ok();
    Ok(YearSizingReport { per_day, cdf, pone, sboc, sboc_at_pone, pearson_r })
}

/// Fraction of days that stay feasible at a fixed capacity (kWh/kWp).
pub fn coverage(days: &[PreparedDay], setup: &SizingSetup, per_kwp: f64) -> f64 {
    if days.is_empty() {
        return 0.0;
    }
    let ok = days
        .par_iter()
        .filter(|d| {
            let smoothed = setup.smoother.apply(&d.power, setup.pv.p_nom);
            feasible_per_kwp(&smoothed.p_sb, setup, per_kwp, MINUTE_HOURS)
        })
        .count();
    ok as f64 / days.len() as f64
}

/// Range of the cumulative AC energy exchanged over one day, kWh per kWp.
pub fn day_energy_range(p_sb: &[f64], dt: f64, kwp: f64) -> f64 {
    let mut running = 0.0;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for &p in p_sb {
        running += p * dt / 1000.0;
        lo = lo.min(running);
        hi = hi.max(running);
    }
    (hi - lo) / kwp
}

/// Largest daily range of cumulative exchange over the dataset, kWh/kWp.
/// Ignores converter losses and the SoC window.
pub fn peak_energy_exchange(days: &[PreparedDay], smoother: &Smoother, pv: &PvParams) -> Result<f64, NumericError> {
    if days.is_empty() {
        return Err(NumericError::Empty);
    }
    Ok(days
        .iter()
        .map(|d| day_energy_range(&smoother.apply(&d.power, pv.p_nom).p_sb, MINUTE_HOURS, pv.kwp()))
        .fold(0.0, f64::max))
}

/// Hourly means of a 1-minute series.
pub fn hourly_means(power: &[f64]) -> Vec<f64> {
    power.chunks(60).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// Sizing from hourly means with one continuous simulation over all days and
/// no nightly reset. Smoothing parameters are applied per hourly step.
pub fn hourly_year_sizing(days: &[PreparedDay], setup: &SizingSetup) -> Result<CapacitySearch, NumericError> {
    if days.is_empty() {
        return Err(NumericError::Empty);
    }
    setup.validate()?;
    let mut ordered: Vec<&PreparedDay> = days.iter().collect();
    ordered.sort_by_key(|d| d.date);
    let hourly: Vec<f64> = ordered.iter().flat_map(|d| hourly_means(&d.power)).collect();
    let smoothed = setup.smoother.apply(&hourly, setup.pv.p_nom);
    Ok(bisect_capacity(|c| feasible_per_kwp(&smoothed.p_sb, setup, c, 1.0), setup.search))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    MaWindow,
    RrLimit,
    Dod,
    SocInit,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ma_window" | "ma-window" => Ok(SweepAxis::MaWindow),
            "rr_limit" | "rr-limit" => Ok(SweepAxis::RrLimit),
            "dod" => Ok(SweepAxis::Dod),
            "soc_init" | "soc-init" => Ok(SweepAxis::SocInit),
            other => Err(format!("unknown sweep axis {other:?} (ma_window, rr_limit, dod, soc_init)")),
        }
    }
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::MaWindow => "ma_window",
            SweepAxis::RrLimit => "rr_limit",
            SweepAxis::Dod => "dod",
            SweepAxis::SocInit => "soc_init",
        }
    }

    /// The base setup with only this axis changed.
    pub fn apply(&self, base: &SizingSetup, value: f64) -> Result<SizingSetup, NumericError> {
        let mut s = *base;
        match self {
            SweepAxis::MaWindow => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(NumericError::InvalidParameter(format!("MA window {value} must be a positive integer")));
                }
                s.smoother = Smoother::moving_average(value as usize);
            }
            SweepAxis::RrLimit => {
                let reference = match base.smoother {
                    Smoother::RampRate { reference, .. } => reference,
                    _ => Default::default(),
                };
                s.smoother = Smoother::RampRate { limit: value, reference };
            }
            SweepAxis::Dod => s.battery = base.battery.with_dod(value),
            SweepAxis::SocInit => s.battery.soc_init = value,
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_sboc: f64,
    pub sboc_at_pone: f64,
    /// Standard error of the SIVI regression; `None` if it cannot be fitted.
    pub sigma: Option<f64>,
    pub pearson_r: Option<f64>,
}

pub fn sensitivity_sweep(
    days: &[PreparedDay],
    base: &SizingSetup,
    axis: SweepAxis,
    values: &[f64],
    pone: f64,
) -> Result<Vec<SweepRow>, NumericError> {
    if values.is_empty() {
        return Err(NumericError::InvalidParameter("no sweep values".into()));
    }
    let setups = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .iter()
        .zip(&setups)
        .map(|(&value, setup)| {
            let report = size_year(days, setup, pone)?;
            let points: Vec<(f64, f64)> = report.per_day.iter().map(|d| (d.sivi, d.sboc)).collect();
            let sigma = crate::empirical::fit_regression(&points).ok().map(|m| m.sigma);
            Ok(SweepRow {
                value,
                mean_sboc: report.mean_sboc(),
                sboc_at_pone: report.sboc,
                sigma,
                pearson_r: report.pearson_r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_brackets_threshold() {
        let r = bisect_capacity(|c| c >= 0.3217, SearchBounds { tol: 1e-4, upper: 2.0 });
        assert!(r.feasible_at_cap);
        assert!(r.sboc >= 0.3217 && r.sboc - 0.3217 < 1e-4);
    }

    #[test]
    fn bisection_reports_infeasible_cap() {
        let r = bisect_capacity(|c| c > 5.0, SearchBounds { tol: 1e-4, upper: 2.0 });
        assert!(!r.feasible_at_cap);
        assert_eq!(r.sboc, 2.0);
    }

    #[test]
    fn zero_commands_need_no_capacity() {
        let r = bisect_capacity(
            |c| feasible_per_kwp(&[0.0; 1440], &SizingSetup::default(), c, MINUTE_HOURS),
            SearchBounds::default(),
        );
        assert!(r.sboc <= 1e-4);
    }

    #[test]
    fn energy_range_hand_example() {
        let mut p = vec![100.0; 30];
        p.extend(vec![-100.0; 30]);
        assert!((day_energy_range(&p, MINUTE_HOURS, 1.0) - 0.05).abs() < 1e-12);
        assert_eq!(day_energy_range(&[0.0; 10], MINUTE_HOURS, 1.0), 0.0);
    }

    #[test]
    fn hourly_means_of_ramp() {
        let p: Vec<f64> = (0..120).map(|i| i as f64).collect();
        assert_eq!(hourly_means(&p), vec![29.5, 89.5]);
    }

    #[test]
    fn sweep_axis_parsing_and_validation() {
        assert_eq!("dod".parse::<SweepAxis>(), Ok(SweepAxis::Dod));
        assert!("tilt".parse::<SweepAxis>().is_err());
        let base = SizingSetup::default();
        assert!(SweepAxis::Dod.apply(&base, 1.5).is_err());
        assert!(SweepAxis::MaWindow.apply(&base, 2.5).is_err());
        assert!(SweepAxis::SocInit.apply(&base, 0.2).is_err());
        assert_eq!(SweepAxis::Dod.apply(&base, 0.5).unwrap().battery.soc_min, 0.5);
    }

    #[test]
    fn empty_inputs_are_errors() {
        let s = SizingSetup::default();
        assert_eq!(size_year(&[], &s, 0.95).unwrap_err(), NumericError::Empty);
        assert_eq!(peak_energy_exchange(&[], &s.smoother, &s.pv).unwrap_err(), NumericError::Empty);
        assert_eq!(hourly_year_sizing(&[], &s).unwrap_err(), NumericError::Empty);
    }
}
