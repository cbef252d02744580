//! Empirical distributions, correlation and the SIVI-based capacity estimator.

use std::fmt;
use std::str::FromStr;

use crate::error::NumericError;
use crate::sizing::{coverage, hourly_year_sizing, peak_energy_exchange, size_year, PreparedDay, SizingSetup};

/// Sorted samples with nearest-rank quantiles.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self, NumericError> {
        if samples.is_empty() {
            return Err(NumericError::Empty);
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(NumericError::InvalidParameter("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Value at rank `ceil(level * n)` (1-based).
    pub fn quantile(&self, level: f64) -> Result<f64, NumericError> {
        if !(level > 0.0 && level <= 1.0) {
            return Err(NumericError::InvalidParameter(format!("level {level} must be in (0, 1]")));
        }
        let n = self.sorted.len();
        // guard against 0.95 * 20 = 19.000000000000004 style roundoff
        let rank = ((level * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
        Ok(self.sorted[rank - 1])
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Step points `(value, rank / n)` for plotting or export.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.sorted.len() as f64;
        self.sorted.iter().enumerate().map(move |(i, &v)| (v, (i + 1) as f64 / n))
    }
}

pub fn pone_quantile(cdf: &EmpiricalCdf, level: f64) -> Result<f64, NumericError> {
    cdf.quantile(level)
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, NumericError> {
    if xs.len() != ys.len() {
        return Err(NumericError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(NumericError::TooFewSamples { need: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(NumericError::Constant);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `sboc ≈ alpha * sivi + beta`, with `sigma` the RMS residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionModel {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub n_samples: usize,
}

impl RegressionModel {
    pub fn predict(&self, sivi: f64) -> f64 {
        self.alpha * sivi + self.beta
    }
}

impl fmt::Display for RegressionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "beta={}", self.beta)?;
        writeln!(f, "sigma={}", self.sigma)?;
        writeln!(f, "n={}", self.n_samples)
    }
}

impl FromStr for RegressionModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut alpha, mut beta, mut sigma, mut n) = (None, None, None, None);
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let v = v.trim();
            let num = || v.parse::<f64>().map_err(|_| format!("line {}: bad number {v:?}", i + 1));
            match k.trim() {
                "alpha" => alpha = Some(num()?),
                "beta" => beta = Some(num()?),
                "sigma" => sigma = Some(num()?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| format!("line {}: bad count {v:?}", i + 1))?),
                other => return Err(format!("line {}: unknown key {other:?}", i + 1)),
            }
        }
        let model = RegressionModel {
            alpha: alpha.ok_or("missing alpha")?,
            beta: beta.ok_or("missing beta")?,
            sigma: sigma.ok_or("missing sigma")?,
            n_samples: n.unwrap_or(0),
        };
        if model.sigma < 0.0 {
            return Err("sigma must be >= 0".into());
        }
        Ok(model)
    }
}

/// Ordinary least squares of `sboc` on `sivi`. The residual scale divides by
/// the sample count, not by the degrees of freedom.
pub fn fit_regression(points: &[(f64, f64)]) -> Result<RegressionModel, NumericError> {
    if points.len() < 2 {
        return Err(NumericError::TooFewSamples { need: 2, got: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(NumericError::Constant);
    }
    let alpha = sxy / sxx;
    let beta = my - alpha * mx;
    let mut model = RegressionModel { alpha, beta, sigma: 0.0, n_samples: points.len() };
    model.sigma = residual_scale(&model, points);
    Ok(model)
}

/// RMS residual of `points` about the model's line.
pub fn residual_scale(model: &RegressionModel, points: &[(f64, f64)]) -> f64 {
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - model.predict(x);
            r * r
        })
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// `alpha * sivi + beta + sigma`, floored at zero.
pub fn estimate_sboc(model: &RegressionModel, sivi: f64) -> f64 {
    (model.predict(sivi) + model.sigma).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PeakEnergyExchange,
    HourlyYear,
    Detailed,
    Approximate,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::PeakEnergyExchange => "peak_energy_exchange",
            Method::HourlyYear => "hourly_chronological",
            Method::Detailed => "detailed",
            Method::Approximate => "approximate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRow {
    pub method: Method,
    /// kWh per kWp.
    pub sboc: f64,
    /// Fraction of days feasible at this capacity under 1-minute simulation.
    pub coverage: f64,
}

/// Sizes the dataset with all four methods and measures each capacity's
/// coverage. Without supplied coefficients the estimator is fitted on the
/// dataset itself; it is evaluated at the SIVI quantile for `pone`.
pub fn compare_methods(
    days: &[PreparedDay],
    setup: &SizingSetup,
    pone: f64,
    coefficients: Option<RegressionModel>,
    hourly: &SizingSetup,
) -> Result<Vec<MethodRow>, NumericError> {
    if days.is_empty() {
        return Err(NumericError::Empty);
    }
    let report = size_year(days, setup, pone)?;
    let peak = peak_energy_exchange(days, &setup.smoother, &setup.pv)?;
    let hourly = hourly_year_sizing(days, hourly)?.sboc;
    let model = match coefficients {
        Some(m) => m,
        None => {
            let points: Vec<(f64, f64)> = report.per_day.iter().map(|d| (d.sivi, d.sboc)).collect();
            fit_regression(&points)?
        }
    };
    let sivi_cdf = EmpiricalCdf::new(days.iter().map(|d| d.sivi).collect())?;
    let approx = estimate_sboc(&model, sivi_cdf.quantile(pone)?);

    Ok([
        (Method::PeakEnergyExchange, peak),
        (Method::HourlyYear, hourly),
        (Method::Detailed, report.sboc),
        (Method::Approximate, approx),
    ]
    .into_iter()
    .map(|(method, sboc)| MethodRow { method, sboc, coverage: coverage(days, setup, sboc) })
    .collect())
}
