use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use pvsmooth::battery::{capacity_at, fit_kibam, DischargePoint};
use pvsmooth::data::{
    load_irradiance, load_site, load_temperature, synthesize_day, synthetic_year, write_canonical, IrradianceLoad,
    Profile, SiteMeta, SyntheticYear,
};
use pvsmooth::empirical::{compare_methods, estimate_sboc, fit_regression, EmpiricalCdf, RegressionModel};
use pvsmooth::sizing::{prepare_days, sensitivity_sweep, size_year, PreparedDay, SizingSetup, SweepAxis};
use pvsmooth::smoothing::{RampReference, Smoother};
use pvsmooth::solar::{clear_sky, sivi};

use crate::args::{DataArgs, EstimateArgs, ModelArgs, OutArgs, ProfileArg, SynthArgs};
use crate::config::{self, format_kibam, DataPaths, FileConfig, Model};
use crate::error::{CliError, CliResult};
use crate::plot::{cdf_staircase, Chart, Series};

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))?;
    Ok(path)
}

fn report_excluded(load: &IrradianceLoad) {
    for x in &load.excluded {
        eprintln!("excluded {} (gap of {} min)", x.date, x.longest_gap);
    }
}

fn level_name(level: f64) -> String {
    format!("p{}", (level * 1000.0).round() / 10.0)
}

fn smoother_summary(s: &Smoother) -> String {
    match *s {
        Smoother::MovingAverage { window } => format!("method=ma\nma_window={window}\n"),
        Smoother::RampRate { limit, reference } => {
            let r = match reference {
                RampReference::PreviousSmoothed => "smoothed",
                RampReference::PreviousRaw => "raw",
            };
            format!("method=rr\nrr_limit={limit}\nrr_reference={r}\n")
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

struct Dataset {
    days: Vec<PreparedDay>,
    excluded: usize,
}

fn load_dataset(paths: &DataPaths, model: &Model) -> CliResult<Dataset> {
    let site = load_site(&paths.site)?;
    let load = load_irradiance(&paths.irradiance)?;
    report_excluded(&load);
    let temps = load_temperature(&paths.temperature)?;
    let days = prepare_days(&site, &load.days, &temps, &model.setup.pv)?;
    if days.is_empty() {
        return Err(CliError::data(anyhow::anyhow!("{}: no usable days", paths.irradiance.display())));
    }
    Ok(Dataset { days, excluded: load.excluded.len() })
}

pub fn sivi_cmd(data: &DataArgs, out: &OutArgs, cfg: &FileConfig) -> CliResult<()> {
    let paths = config::data_paths(data, cfg)?;
    let out = config::output(out, cfg);
    let site = load_site(&paths.site)?;
    let load = load_irradiance(&paths.irradiance)?;
    report_excluded(&load);
    if load.days.is_empty() {
        return Err(CliError::data(anyhow::anyhow!("{}: no usable days", paths.irradiance.display())));
    }
    let results = load
        .days
        .par_iter()
        .map(|d| sivi(d, &clear_sky(&site, d.date)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = String::from("date,sivi\n");
    for r in &results {
        let _ = writeln!(csv, "{},{:.6}", r.date, r.sivi);
    }
    write_file(&out.dir, "sivi.csv", &csv)?;

    let cdf = EmpiricalCdf::new(results.iter().map(|r| r.sivi).collect())?;
    let mut summary = format!("days={}\nexcluded_days={}\n", results.len(), load.excluded.len());
    for level in pvsmooth::sizing::STANDARD_PONE {
        let _ = writeln!(summary, "sivi_{}={:.4}", level_name(level), cdf.quantile(level)?);
    }
    print!("{summary}");
    if out.plot {
        let steps: Vec<(f64, f64)> = cdf.steps().collect();
        let stairs = cdf_staircase(&steps);
        let chart = Chart {
            title: "Empirical CDF of daily SIVI",
            x_label: "SIVI",
            y_label: "CDF",
            series: vec![Series::Line(&stairs, "#1f77b4")],
        };
        write_file(&out.dir, "sivi_cdf.svg", &chart.render())?;
    }
    Ok(())
}

pub fn size_cmd(data: &DataArgs, model: &ModelArgs, out: &OutArgs, cfg: &FileConfig) -> CliResult<()> {
    let m = config::model(model, cfg)?;
    let paths = config::data_paths(data, cfg)?;
    let out = config::output(out, cfg);
    let ds = load_dataset(&paths, &m)?;
    let report = size_year(&ds.days, &m.setup, m.pone)?;

    let mut scatter = String::from("date,sivi,sboc_kwh_per_kwp\n");
    for d in &report.per_day {
        let _ = writeln!(scatter, "{},{:.6},{:.6}", d.date, d.sivi, d.sboc);
    }
    write_file(&out.dir, "scatter.csv", &scatter)?;
    let mut cdf = String::from("sboc,cdf\n");
    let steps: Vec<(f64, f64)> = report.cdf.steps().collect();
    for (x, p) in &steps {
        let _ = writeln!(cdf, "{x:.6},{p:.6}");
    }
    write_file(&out.dir, "cdf.csv", &cdf)?;

    let points: Vec<(f64, f64)> = report.per_day.iter().map(|d| (d.sivi, d.sboc)).collect();
    let regression = fit_regression(&points).ok();
    if let Some(r) = &regression {
        write_file(&out.dir, "regression.txt", &r.to_string())?;
    }

    let mut summary = format!("days={}\nexcluded_days={}\n", report.per_day.len(), ds.excluded);
    summary.push_str(&smoother_summary(&m.setup.smoother));
    let b = &m.setup.battery;
    let _ = writeln!(summary, "dod={}\nsoc_init={}\neta_conv={}", b.dod(), b.soc_init, b.eta_conv);
    let _ = writeln!(summary, "pone={}", m.pone);
    let _ = writeln!(summary, "sboc_kwh_per_kwp={:.6}", report.sboc);
    for (level, v) in &report.sboc_at_pone {
        let _ = writeln!(summary, "sboc_{}={v:.6}", level_name(*level));
    }
    let _ = writeln!(summary, "mean_sboc={:.6}", report.mean_sboc());
    let _ = writeln!(summary, "pearson_r={}", opt(report.pearson_r));
    let capped = report.per_day.iter().filter(|d| !d.feasible_at_cap).count();
    let _ = writeln!(summary, "days_infeasible_at_upper={capped}");
    if let Some(r) = &regression {
        let _ = writeln!(summary, "alpha={:.6}\nbeta={:.6}\nsigma={:.6}", r.alpha, r.beta, r.sigma);
    }
    write_file(&out.dir, "summary.txt", &summary)?;
    print!("{summary}");
    if capped > 0 {
        eprintln!("warning: {capped} day(s) infeasible at --upper {}", m.setup.search.upper);
    }

    if out.plot {
        let mut series = vec![Series::Points(&points)];
        let fit_line;
        if let Some(r) = &regression {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
            fit_line = [(lo, r.predict(lo) + r.sigma), (hi, r.predict(hi) + r.sigma)];
            series.push(Series::Line(&fit_line, "#d62728"));
        }
        let chart = Chart {
            title: "Optimal capacity per day",
            x_label: "SIVI",
            y_label: "SBOC (kWh/kWp)",
            series,
        };
        write_file(&out.dir, "scatter.svg", &chart.render())?;
        let stairs = cdf_staircase(&steps);
        let chart = Chart {
            title: "Empirical CDF of daily SBOC",
            x_label: "SBOC (kWh/kWp)",
            y_label: "CDF",
            series: vec![Series::Line(&stairs, "#1f77b4")],
        };
        write_file(&out.dir, "cdf.svg", &chart.render())?;
        write_file(&out.dir, "timeseries.svg", &timeseries(&ds.days, &m.setup))?;
    }
    Ok(())
}

/// PV and smoothed output over the most variable day.
fn timeseries(days: &[PreparedDay], setup: &SizingSetup) -> String {
    let day = days
        .iter()
        .max_by(|a, b| a.sivi.total_cmp(&b.sivi).then(b.date.cmp(&a.date)))
        .expect("non-empty dataset");
    let smoothed = setup.smoother.apply(&day.power, setup.pv.p_nom);
    let hours = |v: &[f64]| -> Vec<(f64, f64)> { v.iter().enumerate().map(|(m, p)| (m as f64 / 60.0, p / 1000.0)).collect() };
    let (pv, target, sb) = (hours(&day.power), hours(&smoothed.p_target), hours(&smoothed.p_sb));
    let title = format!("{} (SIVI {:.2})", day.date, day.sivi);
    Chart {
        title: &title,
        x_label: "hour",
        y_label: "kW per kWp",
        series: vec![
            Series::Line(&pv, "#7f7f7f"),
            Series::Line(&target, "#1f77b4"),
            Series::Line(&sb, "#d62728"),
        ],
    }
    .render()
}

fn read_coeffs(path: &Path) -> CliResult<RegressionModel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|m: String| CliError::data(anyhow::anyhow!("{}: {m}", path.display())))
}

pub fn estimate_cmd(args: &EstimateArgs) -> CliResult<()> {
    let model = match (&args.coeffs, args.alpha, args.beta, args.sigma) {
        (Some(p), None, None, None) => read_coeffs(p)?,
        (None, Some(alpha), Some(beta), Some(sigma)) => {
            if sigma < 0.0 {
                return Err(CliError::usage("--sigma must be >= 0"));
            }
            RegressionModel { alpha, beta, sigma, n_samples: 0 }
        }
        _ => return Err(CliError::usage("give either --coeffs FILE or all of --alpha --beta --sigma")),
    };
    if !(args.sivi.is_finite() && args.sivi >= 0.0) {
        return Err(CliError::usage(format!("--sivi {} must be >= 0", args.sivi)));
    }
    println!("{:.4}", estimate_sboc(&model, args.sivi));
    Ok(())
}

pub fn compare_cmd(
    data: &DataArgs,
    model: &ModelArgs,
    coeffs: Option<&Path>,
    out: &OutArgs,
    cfg: &FileConfig,
) -> CliResult<()> {
    let m = config::model(model, cfg)?;
    let paths = config::data_paths(data, cfg)?;
    let out = config::output(out, cfg);
    let coefficients = coeffs.map(read_coeffs).transpose()?;
    let ds = load_dataset(&paths, &m)?;
    let rows = compare_methods(&ds.days, &m.setup, m.pone, coefficients, &m.hourly)?;
    let mut csv = String::from("method,sboc_kwh_per_kwp,coverage\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{:.6},{:.4}", r.method.name(), r.sboc, r.coverage);
    }
    write_file(&out.dir, "compare.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

pub fn sensitivity_cmd(
    data: &DataArgs,
    model: &ModelArgs,
    axis: &str,
    values: &[f64],
    out: &OutArgs,
    cfg: &FileConfig,
) -> CliResult<()> {
    let axis: SweepAxis = axis.parse().map_err(CliError::Usage)?;
    let m = config::model(model, cfg)?;
    if axis == SweepAxis::RrLimit && !matches!(m.setup.smoother, Smoother::RampRate { .. }) {
        return Err(CliError::usage("the rr_limit axis needs --method rr"));
    }
    if axis == SweepAxis::MaWindow && !matches!(m.setup.smoother, Smoother::MovingAverage { .. }) {
        return Err(CliError::usage("the ma_window axis needs --method ma"));
    }
    for &v in values {
        axis.apply(&m.setup, v).map_err(|e| CliError::usage(e.to_string()))?;
    }
    let paths = config::data_paths(data, cfg)?;
    let out = config::output(out, cfg);
    let ds = load_dataset(&paths, &m)?;
    let rows = sensitivity_sweep(&ds.days, &m.setup, axis, values, m.pone)?;
    let mut csv = format!(
        "{},mean_sboc_kwh_per_kwp,sboc_{}_kwh_per_kwp,sigma,pearson_r\n",
        axis.name(),
        level_name(m.pone)
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{},{}",
            r.value,
            r.mean_sboc,
            r.sboc_at_pone,
            opt(r.sigma),
            opt(r.pearson_r)
        );
    }
    write_file(&out.dir, "sensitivity.csv", &csv)?;
    print!("{csv}");
    if out.plot {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.value, r.mean_sboc)).collect();
        let chart = Chart {
            title: "Sensitivity of mean SBOC",
            x_label: axis.name(),
            y_label: "mean SBOC (kWh/kWp)",
            series: vec![Series::Line(&pts, "#1f77b4"), Series::Points(&pts)],
        };
        write_file(&out.dir, "sensitivity.svg", &chart.render())?;
    }
    Ok(())
}

fn parse_curve(text: &str) -> Result<Vec<DischargePoint>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "hours,amps" => {}
        _ => return Err("line 1: expected header `hours,amps`".into()),
    }
    lines
        .map(|(i, l)| {
            let (h, a) = l.split_once(',').ok_or_else(|| format!("line {}: expected two fields", i + 1))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("line {}: bad number {s:?}", i + 1));
            Ok(DischargePoint { hours: num(h)?, amps: num(a)? })
        })
        .collect()
}

pub fn fit_battery_cmd(curve: &Path, output: Option<&Path>) -> CliResult<()> {
    let text = fs::read_to_string(curve).map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", curve.display())))?;
    let points = parse_curve(&text).map_err(|m| CliError::data(anyhow::anyhow!("{}: {m}", curve.display())))?;
    let constants = fit_kibam(&points)?;
    let body = format_kibam(&constants);
    for p in &points {
        let fitted = capacity_at(p.hours, &constants);
        eprintln!(
            "{:>6} h  table {:>8.2} Ah  fitted {:>8.2} Ah  ({:+.2}%)",
            p.hours,
            p.delivered_ah(),
            fitted,
            100.0 * (fitted / p.delivered_ah() - 1.0)
        );
    }
    match output {
        Some(path) => {
            fs::write(path, &body).map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn default_site() -> SiteMeta {
    SiteMeta::new("synthetic", "Synthetic arid inland site", -23.698, 133.88, 9.5).expect("valid site")
}

pub fn synth_cmd(args: &SynthArgs) -> CliResult<()> {
    let site = match &args.site {
        Some(p) => load_site(p)?,
        None => default_site(),
    };
    if NaiveDate::from_ymd_opt(args.year, 1, 1).is_none() {
        return Err(CliError::usage(format!("--year {} out of range", args.year)));
    }
    let mut year = synthetic_year(&site, args.year, args.seed);
    if args.profile != ProfileArg::Year {
        let profile = match args.profile {
            ProfileArg::Clear => Profile::Clear,
            ProfileArg::Mixed => Profile::Mixed,
            ProfileArg::Overcast => Profile::Overcast,
            ProfileArg::SquareWave => Profile::SquareWave { period: args.period.max(2) },
            ProfileArg::Year => unreachable!(),
        };
        year.days = year
            .days
            .iter()
            .enumerate()
            .map(|(i, d)| synthesize_day(profile, args.seed.wrapping_add(i as u64), &site, d.date))
            .collect();
    }
    if let Some(n) = args.days {
        if n == 0 {
            return Err(CliError::usage("--days must be >= 1"));
        }
        year.days.truncate(n);
        year.temps.truncate(n);
    }
    write_dataset(&year, &args.out)?;
    println!("wrote {} days to {}", year.days.len(), args.out.display());
    Ok(())
}

fn write_dataset(year: &SyntheticYear, dir: &Path) -> CliResult<()> {
    write_file(dir, "site.txt", &year.site.to_file_string())?;
    let mut irr = Vec::new();
    write_canonical(&year.days, &mut irr).map_err(CliError::data)?;
    write_file(dir, "irradiance.csv", &String::from_utf8(irr).expect("ascii output"))?;
    let mut temps = String::from("date,tmax_c\n");
    for t in &year.temps {
        let _ = writeln!(temps, "{},{:.1}", t.date, t.t_max);
    }
    write_file(dir, "temperature.csv", &temps)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_names() {
        assert_eq!(level_name(0.95), "p95");
        assert_eq!(level_name(1.0), "p100");
        assert_eq!(level_name(0.975), "p97.5");
    }

    #[test]
    fn curve_parsing() {
        let pts = parse_curve("hours,amps\n1,242.4\n3,115.7\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].amps, 115.7);
        assert!(parse_curve("h,a\n1,2\n").is_err());
        assert!(parse_curve("hours,amps\n1;2\n").is_err());
    }
}
