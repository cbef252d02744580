//! Merging of the optional config file with command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use pvsmooth::battery::{BatteryConfig, KibamConstants};
use pvsmooth::pv::PvParams;
use pvsmooth::sizing::{SearchBounds, SizingSetup};
use pvsmooth::smoothing::{RampReference, Smoother};

use crate::args::{DataArgs, MethodArg, ModelArgs, OutArgs, ReferenceArg};
use crate::error::{CliError, CliResult};

const DEFAULT_MA_WINDOW: usize = 10;
const DEFAULT_RR_LIMIT: f64 = 0.05;
const DEFAULT_PONE: f64 = 0.95;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub site: Option<PathBuf>,
    pub irradiance: Option<PathBuf>,
    pub temperature: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub plot: Option<bool>,
    pub jobs: Option<usize>,

    pub method: Option<MethodArg>,
    pub ma_window: Option<usize>,
    pub rr_limit: Option<f64>,
    pub rr_reference: Option<ReferenceArg>,
    pub pone: Option<f64>,
    pub dod: Option<f64>,
    pub soc_init: Option<f64>,
    pub soc_max: Option<f64>,
    pub eta_conv: Option<f64>,
    pub kibam: Option<PathBuf>,
    pub p_nom: Option<f64>,
    pub k_e: Option<f64>,
    pub k_m: Option<f64>,
    pub k_pt: Option<f64>,
    pub eta_inv: Option<f64>,
    pub tol: Option<f64>,
    pub upper: Option<f64>,
    pub hourly_upper: Option<f64>,
}

impl FileConfig {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's own directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.data,
            &mut cfg.site,
            &mut cfg.irradiance,
            &mut cfg.temperature,
            &mut cfg.out,
            &mut cfg.kibam,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub struct DataPaths {
    pub site: PathBuf,
    pub irradiance: PathBuf,
    pub temperature: PathBuf,
}

pub fn data_paths(flags: &DataArgs, cfg: &FileConfig) -> CliResult<DataPaths> {
    let dir = flags.data.clone().or_else(|| cfg.data.clone());
    let pick = |flag: &Option<PathBuf>, file: &Option<PathBuf>, name: &str| {
        flag.clone()
            .or_else(|| file.clone())
            .or_else(|| dir.as_ref().map(|d| d.join(name)))
            .ok_or_else(|| CliError::usage(format!("no {name}: pass --data DIR or the file path")))
    };
    Ok(DataPaths {
        site: pick(&flags.site, &cfg.site, "site.txt")?,
        irradiance: pick(&flags.irradiance, &cfg.irradiance, "irradiance.csv")?,
        temperature: pick(&flags.temperature, &cfg.temperature, "temperature.csv")?,
    })
}

pub struct Output {
    pub dir: PathBuf,
    pub plot: bool,
}

pub fn output(flags: &OutArgs, cfg: &FileConfig) -> Output {
    Output {
        dir: flags.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
        plot: flags.plot || cfg.plot.unwrap_or(false),
    }
}

pub struct Model {
    pub setup: SizingSetup,
    pub hourly: SizingSetup,
    pub pone: f64,
}

fn smoother(flags: &ModelArgs, cfg: &FileConfig) -> CliResult<Smoother> {
    let method = match (flags.method, flags.ma_window, flags.rr_limit) {
        (Some(m), _, _) => m,
        (None, Some(_), _) => MethodArg::Ma,
        (None, None, Some(_)) => MethodArg::Rr,
        (None, None, None) => match (cfg.method, cfg.ma_window, cfg.rr_limit) {
            (Some(m), _, _) => m,
            (None, None, Some(_)) => MethodArg::Rr,
            _ => MethodArg::Ma,
        },
    };
    match method {
        MethodArg::Ma => {
            if flags.rr_limit.is_some() || flags.rr_reference.is_some() {
                return Err(CliError::usage("--rr-limit/--rr-reference need --method rr"));
            }
            Ok(Smoother::moving_average(flags.ma_window.or(cfg.ma_window).unwrap_or(DEFAULT_MA_WINDOW)))
        }
        MethodArg::Rr => {
            if flags.ma_window.is_some() {
                return Err(CliError::usage("--ma-window needs --method ma"));
            }
            let reference = match flags.rr_reference.or(cfg.rr_reference) {
                Some(ReferenceArg::Raw) => RampReference::PreviousRaw,
                _ => RampReference::PreviousSmoothed,
            };
            Ok(Smoother::RampRate {
                limit: flags.rr_limit.or(cfg.rr_limit).unwrap_or(DEFAULT_RR_LIMIT),
                reference,
            })
        }
    }
}

pub fn read_kibam(path: &Path) -> CliResult<KibamConstants> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(anyhow::anyhow!("{}: {e}", path.display())))?;
    parse_kibam(&text).map_err(|m| CliError::data(anyhow::anyhow!("{}: {m}", path.display())))
}

pub fn parse_kibam(text: &str) -> Result<KibamConstants, String> {
    let (mut k1, mut k2, mut q) = (None, None, None);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("line {}: bad number", i + 1))?;
        match k.trim() {
            "k1" => k1 = Some(v),
            "k2" => k2 = Some(v),
            "q_max_ah" => q = Some(v),
            other => return Err(format!("line {}: unknown key {other:?}", i + 1)),
        }
    }
    let c = KibamConstants {
        k1: k1.ok_or("missing k1")?,
        k2: k2.ok_or("missing k2")?,
        q_max_ref: q.ok_or("missing q_max_ah")?,
    };
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

pub fn format_kibam(c: &KibamConstants) -> String {
    format!("k1={:.6}\nk2={:.6}\nq_max_ah={:.3}\n", c.k1, c.k2, c.q_max_ref)
}

pub fn model(flags: &ModelArgs, cfg: &FileConfig) -> CliResult<Model> {
    let smoother = smoother(flags, cfg)?;
    let constants = match flags.kibam.as_ref().or(cfg.kibam.as_ref()) {
        Some(p) => read_kibam(p)?,
        None => KibamConstants::DEFAULT,
    };
    let d = BatteryConfig::default();
    let mut battery = BatteryConfig {
        constants,
        soc_init: flags.soc_init.or(cfg.soc_init).unwrap_or(d.soc_init),
        soc_max: flags.soc_max.or(cfg.soc_max).unwrap_or(d.soc_max),
        eta_conv: flags.eta_conv.or(cfg.eta_conv).unwrap_or(d.eta_conv),
        ..d
    };
    if let Some(dod) = flags.dod.or(cfg.dod) {
        battery = battery.with_dod(dod);
    }
    let p = PvParams::default();
    let pv = PvParams {
        p_nom: flags.p_nom.or(cfg.p_nom).unwrap_or(p.p_nom),
        k_e: flags.k_e.or(cfg.k_e).unwrap_or(p.k_e),
        k_m: flags.k_m.or(cfg.k_m).unwrap_or(p.k_m),
        k_pt: flags.k_pt.or(cfg.k_pt).unwrap_or(p.k_pt),
        eta_inv: flags.eta_inv.or(cfg.eta_inv).unwrap_or(p.eta_inv),
    };
    let s = SearchBounds::default();
    let search = SearchBounds {
        tol: flags.tol.or(cfg.tol).unwrap_or(s.tol),
        upper: flags.upper.or(cfg.upper).unwrap_or(s.upper),
    };
    let setup = SizingSetup { smoother, battery, pv, search };
    let hourly = SizingSetup {
        search: SearchBounds {
            tol: SearchBounds::HOURLY.tol.max(search.tol),
            upper: flags.hourly_upper.or(cfg.hourly_upper).unwrap_or(SearchBounds::HOURLY.upper),
        },
        ..setup
    };
    setup.validate().map_err(|e| CliError::usage(e.to_string()))?;
    hourly.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let pone = flags.pone.or(cfg.pone).unwrap_or(DEFAULT_PONE);
    if !(pone > 0.0 && pone <= 1.0) {
        return Err(CliError::usage(format!("--pone {pone} must be in (0, 1]")));
    }
    Ok(Model { setup, hourly, pone })
}
