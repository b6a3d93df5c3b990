//! Self-consistency checks run by `cosmo-qfi verify`.
//!
//! Each check compares two independent routes to the same quantity over a
//! parameter grid and reports the worst relative disagreement.

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{
    coefficients, default_fd_step, dx_deps_analytic, dx_deps_fd, gamma_sq_sinh, Branch,
};
use crate::cosmology::ModelParams;
use crate::ode::{integrate_mode, wronskian_drift, IntegrationConfig};
use crate::probe::{probe, ProbeState};
use crate::qfi::{classical_fisher, qfi_spectral, SpectralFamily};
use crate::{Error, Result};

pub const IDENTITY_TOL: f64 = 1e-10;
pub const QFI_FORM_TOL: f64 = 1e-10;
pub const OPTIMALITY_TOL: f64 = 1e-10;
pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const ODE_TOL: f64 = 1e-4;
pub const WRONSKIAN_TOL: f64 = 1e-8;

/// Parameter points for the mode-equation comparison, spread over
/// `eps in [0.01, 5]`, `m, k in [0.1, 5]`.
pub const ODE_POINTS: [(f64, f64, f64); 8] = [
    (1.0, 1.0, 1.0),
    (0.01, 2.0, 0.5),
    (2.0, 0.5, 3.0),
    (5.0, 0.1, 0.1),
    (0.3, 0.7, 2.0),
    (4.0, 3.0, 0.5),
    (0.05, 5.0, 0.2),
    (2.5, 1.5, 5.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        let all_finite = errors.iter().all(|e| e.is_finite());
        Self {
            name: name.to_string(),
            cases: errors.len(),
            max_error,
            tolerance,
            passed: all_finite && !errors.is_empty() && max_error <= tolerance,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// `n^3` points with each of `eps, m, k` linearly spaced over `[0.1, 5]`.
pub fn parameter_grid(n: usize) -> Vec<ModelParams> {
    let axis: Vec<f64> = if n == 1 {
        vec![1.0]
    } else {
        (0..n)
            .map(|i| 0.1 + 4.9 * i as f64 / (n - 1) as f64)
            .collect()
    };
    let mut out = Vec::with_capacity(n * n * n);
    for &e in &axis {
        for &m in &axis {
            for &k in &axis {
                out.push(ModelParams {
                    eps: e,
                    m_tilde: m,
                    k_tilde: k,
                });
            }
        }
    }
    out
}

pub fn check_gamma_identity(grid: &[ModelParams]) -> Result<CheckReport> {
    let errors = grid
        .iter()
        .map(|p| {
            Ok(rel(
                coefficients(p, Branch::Minus)?.ratio_sq(),
                gamma_sq_sinh(p)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(
        "gamma/sinh identity",
        &errors,
        IDENTITY_TOL,
    ))
}

pub fn check_qfi_forms(grid: &[ModelParams]) -> Result<CheckReport> {
    let errors = grid
        .iter()
        .map(|p| {
            let s = probe(p)?;
            Ok(rel(s.qfi_literal(), s.qfi_simplified()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(
        "QFI literal vs simplified",
        &errors,
        QFI_FORM_TOL,
    ))
}

/// Classical Fisher information of the eigenprojector outcomes against the
/// spectral QFI of the probe family.
pub fn measurement_optimality_error(s: &ProbeState) -> Result<f64> {
    let (d0, d1) = s.dprobs();
    let family = SpectralFamily::diagonal(vec![s.p0, s.p1], vec![d0, d1])?;
    let fc = classical_fisher(&s.outcome_distribution()?)?;
    Ok(rel(fc, qfi_spectral(&family)))
}

pub fn check_measurement_optimality(grid: &[ModelParams]) -> Result<CheckReport> {
    let errors = grid
        .iter()
        .map(|p| measurement_optimality_error(&probe(p)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(
        "eigenprojector saturates QFI",
        &errors,
        OPTIMALITY_TOL,
    ))
}

pub fn check_derivatives(grid: &[ModelParams]) -> Result<CheckReport> {
    let errors = grid
        .iter()
        .map(|p| {
            Ok(rel(
                dx_deps_analytic(p)?,
                dx_deps_fd(p, default_fd_step(p.eps))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(
        "analytic vs Richardson dX/deps",
        &errors,
        DERIVATIVE_TOL,
    ))
}

/// Mode-equation ratio against the closed form at the first `points`
/// entries of [`ODE_POINTS`], plus the Wronskian drift at the same points.
pub fn check_ode(points: usize, rel_tol: f64) -> Result<(CheckReport, CheckReport)> {
    if points == 0 || points > ODE_POINTS.len() {
        return Err(Error::InvalidParameter(format!(
            "ode points must be in 1..={}, got {points}",
            ODE_POINTS.len()
        )));
    }
    let cfg = IntegrationConfig::default().with_rel_tol(rel_tol);
    cfg.validate()?;
    let mut ratio_errors = Vec::with_capacity(points);
    let mut drifts = Vec::with_capacity(points);
    for &(e, m, k) in &ODE_POINTS[..points] {
        let p = ModelParams::new(e, m, k)?;
        let r = integrate_mode(&p, &cfg)?;
        ratio_errors.push(rel(r.ratio_sq, gamma_sq_sinh(&p)?));
        drifts.push(wronskian_drift(&p, &cfg)?);
    }
    Ok((
        CheckReport::new("mode equation vs closed form", &ratio_errors, ODE_TOL),
        CheckReport::new("Wronskian drift", &drifts, WRONSKIAN_TOL),
    ))
}

/// All checks, in a fixed order.
pub fn run_all(grid_size: usize, ode_points: usize, rel_tol: f64) -> Result<Vec<CheckReport>> {
    if grid_size == 0 {
        return Err(Error::InvalidParameter(
            "grid size must be at least 1".into(),
        ));
    }
    let grid = parameter_grid(grid_size);
    let (ode, wronskian) = check_ode(ode_points, rel_tol)?;
    Ok(vec![
        check_gamma_identity(&grid)?,
        check_qfi_forms(&grid)?,
        check_measurement_optimality(&grid)?,
        check_derivatives(&grid)?,
        ode,
        wronskian,
    ])
}
