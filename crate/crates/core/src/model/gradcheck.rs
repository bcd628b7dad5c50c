//! Central-difference gradient checking over flat parameter vectors.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Denominator floor for the relative error, so coordinates whose true gradient is
/// essentially zero are judged on absolute error.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// Smallest coordinate sample a checked-subset run may use.
pub const MIN_SAMPLED_COORDS: usize = 200;

#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    pub epsilon: f64,
    pub tolerance: f64,
    /// Check at most this many coordinates, sampled without replacement.
    /// `None` checks every coordinate. Values below [`MIN_SAMPLED_COORDS`] are raised to it.
    pub max_coords: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { epsilon: 1e-5, tolerance: 1e-4, max_coords: None, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub passed: bool,
}

/// `|a − n| / max(|a|, |n|, REL_ERROR_FLOOR)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares `analytic` with central differences of `loss` around `point`.
pub fn grad_check<F>(
    loss: F,
    point: &[f64],
    analytic: &[f64],
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if cfg.epsilon.is_nan() || cfg.epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {}",
            cfg.epsilon
        )));
    }
    if point.len() != analytic.len() {
        return Err(Error::Shape(format!(
            "{} coordinates but {} gradient entries",
            point.len(),
            analytic.len()
        )));
    }
    let coords: Vec<usize> = match cfg.max_coords {
        Some(m) if m.max(MIN_SAMPLED_COORDS) < point.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut idx = sample(&mut rng, point.len(), m.max(MIN_SAMPLED_COORDS)).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..point.len()).collect(),
    };

    let eval = |x: &[f64]| -> Result<f64> {
        let v = loss(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("loss during gradient check".into()))
        }
    };
    eval(point)?;

    let mut probe = point.to_vec();
    let mut report = GradCheckReport {
        checked: coords.len(),
        max_rel_error: 0.0,
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        passed: true,
    };
    for &i in &coords {
        let orig = probe[i];
        probe[i] = orig + cfg.epsilon;
        let up = eval(&probe)?;
        probe[i] = orig - cfg.epsilon;
        let down = eval(&probe)?;
        probe[i] = orig;
        let numeric = (up - down) / (2.0 * cfg.epsilon);
        let err = relative_error(analytic[i], numeric);
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_index = i;
            report.worst_analytic = analytic[i];
            report.worst_numeric = numeric;
        }
    }
    report.passed = report.max_rel_error <= cfg.tolerance;
    Ok(report)
}
