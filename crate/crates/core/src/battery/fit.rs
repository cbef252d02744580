use super::KibamConstants;
use crate::error::NumericError;

/// One row of a constant-current discharge table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargePoint {
    /// Time to cutoff, hours.
    pub hours: f64,
    /// Constant discharge current, A.
    pub amps: f64,
}

impl DischargePoint {
    pub fn delivered_ah(&self) -> f64 {
        self.hours * self.amps
    }
}

/// Capacity per unit `q_max` delivered at constant current when the cutoff is
/// reached after `t` hours.
fn shape(t: f64, k: f64, c: f64) -> f64 {
    let kt = k * t;
    let one_minus = -(-kt).exp_m1();
    // kt - 1 + e^-kt, expanded for small kt
    let tail = if kt < 1e-4 {
        kt * kt / 2.0 - kt * kt * kt / 6.0
    } else {
        kt - one_minus
    };
    k * c * t / (one_minus + c * tail)
}

/// Constant-current capacity (Ah) predicted by the two-well model for a
/// discharge lasting `hours`.
pub fn capacity_at(hours: f64, constants: &KibamConstants) -> f64 {
    constants.q_max_ref * shape(hours, constants.k1, constants.k2)
}

struct Profiled {
    sse: f64,
    q_max: f64,
}

/// Least-squares `q_max` for fixed (k, c), and the resulting residual sum.
fn profile(points: &[DischargePoint], k: f64, c: f64) -> Profiled {
    let mut sff = 0.0;
    let mut sfy = 0.0;
    for p in points {
        let f = shape(p.hours, k, c);
        sff += f * f;
        sfy += f * p.delivered_ah();
    }
    let q_max = if sff > 0.0 { sfy / sff } else { 0.0 };
    let sse = points
        .iter()
        .map(|p| {
            let r = p.delivered_ah() - q_max * shape(p.hours, k, c);
            r * r
        })
        .sum();
    Profiled { sse, q_max }
}

fn unpack(x: [f64; 2]) -> (f64, f64) {
    let k = x[0].exp();
    let c = 1.0 / (1.0 + (-x[1]).exp());
    (k, c)
}

/// Fits (k1, k2, q_max) to a discharge table by least squares on delivered
/// capacity. A coarse log-k / c grid seeds a Nelder-Mead refinement in
/// (ln k, logit c); `q_max` is eliminated in closed form at every point.
pub fn fit_kibam(points: &[DischargePoint]) -> Result<KibamConstants, NumericError> {
    if points.len() < 3 {
        return Err(NumericError::TooFewSamples { need: 3, got: points.len() });
    }
    for p in points {
        if !(p.hours > 0.0 && p.amps > 0.0 && p.hours.is_finite() && p.amps.is_finite()) {
            return Err(NumericError::InvalidParameter(format!(
                "discharge point ({}, {}) must be positive",
                p.hours, p.amps
            )));
        }
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.hours.total_cmp(&b.hours));
    for w in sorted.windows(2) {
        if w[1].hours == w[0].hours {
            return Err(NumericError::Degenerate(format!("repeated discharge time {} h", w[0].hours)));
        }
        if w[1].delivered_ah() <= w[0].delivered_ah() {
            return Err(NumericError::Degenerate(
                "delivered capacity must increase with discharge time".into(),
            ));
        }
    }

    let objective = |x: [f64; 2]| {
        let (k, c) = unpack(x);
        profile(&sorted, k, c).sse
    };

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..=120 {
        let ln_k = (1e-3f64).ln() + (1e3f64 / 1e-3).ln() * i as f64 / 120.0;
        for j in 1..100 {
            let c = j as f64 / 100.0;
            let x = [ln_k, (c / (1.0 - c)).ln()];
            let v = objective(x);
            if v < best.1 {
                best = (x, v);
            }
        }
    }

    let x = nelder_mead(objective, best.0, [0.1, 0.1], 1e-14, 20_000).ok_or(NumericError::NoConvergence)?;
    let (k1, k2) = unpack(x);
    let q_max_ref = profile(&sorted, k1, k2).q_max;
    let fitted = KibamConstants { k1, k2, q_max_ref };
    if fitted.validate().is_err() || !q_max_ref.is_finite() {
        return Err(NumericError::NoConvergence);
    }
    Ok(fitted)
}

/// Downhill simplex in two dimensions. Returns `None` if the iteration budget
/// runs out before the simplex collapses.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    scale: [f64; 2],
    ftol: f64,
    max_iter: usize,
) -> Option<[f64; 2]> {
    let mut simplex = [
        start,
        [start[0] + scale[0], start[1]],
        [start[0], start[1] + scale[1]],
    ];
    let mut values = simplex.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = (values[2] - values[0]).abs();
        let size = (simplex[2][0] - simplex[0][0]).abs().max((simplex[2][1] - simplex[0][1]).abs())
            .max((simplex[1][0] - simplex[0][0]).abs().max((simplex[1][1] - simplex[0][1]).abs()));
        if spread <= ftol * (values[0].abs() + 1e-300) + 1e-300 && size < 1e-10 || size < 1e-13 {
            return Some(simplex[0]);
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let p = lerp(centroid, reflected, 0.5);
                (p, f(p))
            } else {
                let p = lerp(centroid, simplex[2], 0.5);
                (p, f(p))
            };
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    None
}
