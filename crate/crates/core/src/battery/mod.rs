//! Kinetic battery model (KiBaM) in the energy domain.
//!
//! Charge is split into an available well `q1` and a bound well `q2`, both in
//! kWh. The bound well feeds the available one at rate `k1` (1/h) and `k2` is
//! the available fraction of the total at equilibrium. Since the model is
//! linear in charge and current, an Ah-domain fit maps onto kWh by a constant
//! nominal voltage without changing `k1` or `k2`.

mod fit;

pub use fit::{capacity_at, fit_kibam, DischargePoint};

use crate::error::NumericError;

/// Nominal voltage of the reference cell used to express fitted Ah in kWh.
pub const REFERENCE_CELL_VOLTS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KibamConstants {
    /// Rate constant, 1/h.
    pub k1: f64,
    /// Available-to-total capacity ratio.
    pub k2: f64,
    /// Asymptotic capacity of the reference cell, Ah.
    pub q_max_ref: f64,
}

impl KibamConstants {
    /// Constants fitted to the bundled lead-acid discharge curve
    /// (see `fit_kibam` and the `default_constants_match_fit` test).
    pub const DEFAULT: KibamConstants = KibamConstants {
        k1: 1.121_060,
        k2: 0.320_482,
        q_max_ref: 552.883,
    };

    pub fn validate(&self) -> Result<(), NumericError> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(NumericError::InvalidParameter(format!("k1 = {} must be > 0", self.k1)));
        }
        if !(self.k2 > 0.0 && self.k2 < 1.0) {
            return Err(NumericError::InvalidParameter(format!("k2 = {} must be in (0, 1)", self.k2)));
        }
        if !(self.q_max_ref > 0.0) {
            return Err(NumericError::InvalidParameter(format!(
                "q_max_ref = {} must be > 0",
                self.q_max_ref
            )));
        }
        Ok(())
    }

    /// Reference-cell capacity in kWh at [`REFERENCE_CELL_VOLTS`].
    pub fn q_max_ref_kwh(&self) -> f64 {
        self.q_max_ref * REFERENCE_CELL_VOLTS / 1000.0
    }
}

impl Default for KibamConstants {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    /// Nominal capacity, kWh.
    pub e_nom: f64,
    pub constants: KibamConstants,
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_init: f64,
    /// Bi-directional converter efficiency, applied once per direction.
    pub eta_conv: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            e_nom: 1.0,
            constants: KibamConstants::DEFAULT,
            soc_min: 1.0 - 0.70,
            soc_max: 1.0,
            soc_init: 0.80,
            eta_conv: 0.94,
        }
    }
}

impl BatteryConfig {
    pub fn with_capacity(&self, e_nom: f64) -> Self {
        BatteryConfig { e_nom, ..*self }
    }

    /// Sets `soc_min = 1 - dod`.
    pub fn with_dod(&self, dod: f64) -> Self {
        BatteryConfig { soc_min: 1.0 - dod, ..*self }
    }

    pub fn dod(&self) -> f64 {
        1.0 - self.soc_min
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        self.constants.validate()?;
        let ordered = 0.0 <= self.soc_min
            && self.soc_min < self.soc_init
            && self.soc_init <= self.soc_max
            && self.soc_max <= 1.0;
        if !ordered {
            return Err(NumericError::InvalidParameter(format!(
                "need 0 <= soc_min < soc_init <= soc_max <= 1, got {} / {} / {}",
                self.soc_min, self.soc_init, self.soc_max
            )));
        }
        if !(self.eta_conv > 0.0 && self.eta_conv <= 1.0) {
            return Err(NumericError::InvalidParameter(format!(
                "eta_conv = {} must be in (0, 1]",
                self.eta_conv
            )));
        }
        if !(self.e_nom > 0.0 && self.e_nom.is_finite()) {
            return Err(NumericError::InvalidParameter(format!("e_nom = {} must be > 0", self.e_nom)));
        }
        Ok(())
    }
}

/// Available (`q1`) and bound (`q2`) charge, kWh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub q1: f64,
    pub q2: f64,
}

impl BatteryState {
    pub fn total(&self) -> f64 {
        self.q1 + self.q2
    }
}

/// Which limit cut a request short.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clip {
    /// Available well would have gone negative.
    Empty,
    /// State of charge would have reached `soc_min`.
    Floor,
    /// State of charge would have exceeded `soc_max`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: BatteryState,
    /// AC-side power actually exchanged, W (positive = discharge).
    pub p_delivered: f64,
    pub clip: Option<Clip>,
}

impl StepOutcome {
    pub fn clipped(&self) -> bool {
        self.clip.is_some()
    }
}

pub fn soc(state: &BatteryState, cfg: &BatteryConfig) -> f64 {
    state.total() / cfg.e_nom
}

/// Charge at `soc_init`, split at equilibrium.
pub fn fresh_state(cfg: &BatteryConfig) -> BatteryState {
    let total = cfg.soc_init * cfg.e_nom;
    let q1 = cfg.constants.k2 * total;
    BatteryState { q1, q2: total - q1 }
}

/// Linear coefficients of the end-of-step available charge,
/// `q1_end = free - slope * current`.
fn available_coefficients(state: &BatteryState, k: f64, c: f64, dt: f64) -> (f64, f64) {
    let decay = (-k * dt).exp();
    let one_minus = -(-k * dt).exp_m1();
    let free = state.q1 * decay + c * state.total() * one_minus;
    let slope = (1.0 - c) * one_minus / k + c * dt;
    (free, slope)
}

/// Exact solution of the two-well equations over `dt` hours under a constant
/// battery-side current `current` (kW, positive = discharge).
pub fn propagate(state: &BatteryState, current: f64, dt: f64, constants: &KibamConstants) -> BatteryState {
    let (free, slope) = available_coefficients(state, constants.k1, constants.k2, dt);
    let q1 = free - slope * current;
    let total = state.total() - current * dt;
    BatteryState { q1, q2: total - q1 }
}

/// Advances the battery by one step under an AC-side request `p_request` (W,
/// positive = discharge). Requests that would empty the available well or
/// leave the SoC window are reduced to the binding limit and flagged.
pub fn step(state: &BatteryState, p_request: f64, dt: f64, cfg: &BatteryConfig) -> StepOutcome {
    let eta = cfg.eta_conv;
    let request_kw = p_request / 1000.0;
    let mut current = if request_kw > 0.0 { request_kw / eta } else { request_kw * eta };
    let mut clip = None;

    if current > 0.0 {
        let (free, slope) = available_coefficients(state, cfg.constants.k1, cfg.constants.k2, dt);
        let empty_limit = (free / slope).max(0.0);
        let floor_limit = ((state.total() - cfg.soc_min * cfg.e_nom) / dt).max(0.0);
        if current > empty_limit || current > floor_limit {
            if empty_limit <= floor_limit {
                current = empty_limit;
                clip = Some(Clip::Empty);
            } else {
                current = floor_limit;
                clip = Some(Clip::Floor);
            }
        }
    } else if current < 0.0 {
        let full_limit = ((cfg.soc_max * cfg.e_nom - state.total()) / dt).max(0.0);
        if -current > full_limit {
            current = -full_limit;
            clip = Some(Clip::Full);
        }
    }

    let mut next = propagate(state, current, dt, &cfg.constants);
    if clip == Some(Clip::Empty) {
        // the limit puts q1 at zero up to roundoff
        next.q2 += next.q1;
        next.q1 = 0.0;
    }
    let delivered_kw = if current > 0.0 { current * eta } else { current / eta };
    StepOutcome {
        state: next,
        p_delivered: delivered_kw * 1000.0,
        clip,
    }
}
