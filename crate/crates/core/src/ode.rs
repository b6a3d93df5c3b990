//! Mode-equation oracle for the Bogoliubov layer.
//!
//! Integrates
//!
//! ```text
//! psi'' + [k^2 + m^2 a(eta)^2 ± i m a'(eta)] psi = 0      (rho = 1)
//! ```
//!
//! from deep in the past, where the in-mode is the plane wave
//! `e^{-i w_in eta}`, to deep in the future, and decomposes the result into
//! out-region plane waves `A e^{-i w_out eta} + B e^{+i w_out eta}`. Nothing
//! here touches Gamma functions, so `|B/A|^2` is an independent check of the
//! closed forms in [`crate::bogoliubov`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::Branch;
use crate::cosmology::{frequencies, scale_factor, scale_factor_rate, ModelParams};
use crate::{Error, Result};

/// Largest allowed relative deviation of `a(±T)` from its asymptote.
const WINDOW_DEVIATION_TOL: f64 = 1e-10;

/// Matching is checked against the solution this far before the endpoint.
const RESIDUAL_LOOKBACK: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Half-width `T` of the window `[-T, T]`.
    pub eta_span: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub branch: Branch,
    /// Start at `-T - start_offset` instead of `-T`.
    pub start_offset: f64,
    pub max_steps: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            eta_span: 15.0,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            branch: Branch::Minus,
            start_offset: 0.0,
            max_steps: 5_000_000,
        }
    }
}

impl IntegrationConfig {
    pub fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let tol_ok = |t: f64| t > 0.0 && t <= 1e-6;
        if !tol_ok(self.rel_tol) || !tol_ok(self.abs_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must lie in (0, 1e-6], got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.eta_span.is_finite() && self.eta_span > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eta_span must be positive, got {}",
                self.eta_span
            )));
        }
        if !(self.start_offset.is_finite() && self.start_offset >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "start_offset must be non-negative, got {}",
                self.start_offset
            )));
        }
        Ok(())
    }

    fn check_window(&self, eps: f64) -> Result<()> {
        // 1 - tanh T, without cancellation
        let tail = 2.0 / ((2.0 * self.eta_span).exp() + 1.0);
        let deviation = eps * tail / (1.0 + 2.0 * eps);
        if deviation > WINDOW_DEVIATION_TOL {
            return Err(Error::WindowTooSmall { deviation });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub a: Complex64,
    pub b: Complex64,
    /// `|B/A|^2`
    pub ratio_sq: f64,
    /// Mismatch, relative to `|A|`, between the fitted plane waves and the
    /// integrated solution one unit before the endpoint.
    pub fit_residual: f64,
    pub steps: usize,
}

/// `psi'' = -Q(eta) psi` for the given branch.
struct ModeEquation {
    k2: f64,
    m: f64,
    eps: f64,
    sign: f64,
}

impl ModeEquation {
    fn new(p: &ModelParams, branch: Branch) -> Self {
        Self {
            k2: p.k_tilde * p.k_tilde,
            m: p.m_tilde,
            eps: p.eps,
            sign: match branch {
                Branch::Plus => 1.0,
                Branch::Minus => -1.0,
            },
        }
    }

    fn q(&self, eta: f64) -> Complex64 {
        let a = scale_factor(eta, self.eps, 1.0);
        let da = scale_factor_rate(eta, self.eps, 1.0);
        Complex64::new(self.k2 + self.m * self.m * a * a, self.sign * self.m * da)
    }
}

fn plane_wave(omega: f64, sign: f64, eta: f64) -> [Complex64; 2] {
    // e^{-i sign omega eta} and its derivative
    let psi = Complex64::from_polar(1.0, -sign * omega * eta);
    [psi, Complex64::new(0.0, -sign * omega) * psi]
}

/// Coefficients of `e^{-i w eta}` and `e^{+i w eta}` reproducing `(psi, psi')`.
fn decompose(omega: f64, eta: f64, psi: Complex64, dpsi: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let a = (i * dpsi + omega * psi) * Complex64::from_polar(1.0, omega * eta) / (2.0 * omega);
    let b = (-i * dpsi + omega * psi) * Complex64::from_polar(1.0, -omega * eta) / (2.0 * omega);
    (a, b)
}

fn prepare(p: &ModelParams, cfg: &IntegrationConfig) -> Result<()> {
    p.validate()?;
    cfg.validate()?;
    if p.is_massless() {
        return Err(Error::InvalidParameter(
            "the mode-equation oracle needs m_tilde > 0".into(),
        ));
    }
    cfg.check_window(p.eps)
}

/// Integrate the in-mode across the expansion and match it to out-region
/// plane waves.
pub fn integrate_mode(p: &ModelParams, cfg: &IntegrationConfig) -> Result<MatchResult> {
    prepare(p, cfg)?;
    let f = frequencies(p);
    let eq = ModeEquation::new(p, cfg.branch);
    let rhs = |eta: f64, y: &[Complex64; 2]| [y[1], -eq.q(eta) * y[0]];
    let solver = Dopri5::new(cfg.rel_tol, cfg.abs_tol, cfg.max_steps);

    let start = -cfg.eta_span - cfg.start_offset;
    let end = cfg.eta_span;
    let probe_at = end - RESIDUAL_LOOKBACK;
    let y0 = plane_wave(f.omega_in, 1.0, start);

    let (y_probe, s1) = solver.integrate(rhs, start, y0, probe_at, |_, _| {})?;
    let (y_end, s2) = solver.integrate(rhs, probe_at, y_probe, end, |_, _| {})?;

    let (a, b) = decompose(f.omega_out, end, y_end[0], y_end[1]);
    let refit = a * plane_wave(f.omega_out, 1.0, probe_at)[0]
        + b * plane_wave(f.omega_out, -1.0, probe_at)[0];
    let fit_residual = (refit - y_probe[0]).norm() / a.norm();

    Ok(MatchResult {
        a,
        b,
        ratio_sq: (b.norm() / a.norm()).powi(2),
        fit_residual,
        steps: s1 + s2,
    })
}

/// Largest relative change of the Wronskian `psi1 psi2' - psi2 psi1'` of two
/// independent solutions over the window. It is exactly conserved by the
/// mode equation, so any drift is integrator error.
pub fn wronskian_drift(p: &ModelParams, cfg: &IntegrationConfig) -> Result<f64> {
    prepare(p, cfg)?;
    let f = frequencies(p);
    let eq = ModeEquation::new(p, cfg.branch);
    let rhs = |eta: f64, y: &[Complex64; 4]| {
        let q = eq.q(eta);
        [y[1], -q * y[0], y[3], -q * y[2]]
    };
    let start = -cfg.eta_span - cfg.start_offset;
    let [u, du] = plane_wave(f.omega_in, 1.0, start);
    let [v, dv] = plane_wave(f.omega_in, -1.0, start);
    let wronskian = |y: &[Complex64; 4]| y[0] * y[3] - y[2] * y[1];
    let w0 = wronskian(&[u, du, v, dv]);

    let mut drift: f64 = 0.0;
    Dopri5::new(cfg.rel_tol, cfg.abs_tol, cfg.max_steps).integrate(
        rhs,
        start,
        [u, du, v, dv],
        cfg.eta_span,
        |_, y| drift = drift.max((wronskian(y) - w0).norm() / w0.norm()),
    )?;
    Ok(drift)
}

/// Dormand-Prince 5(4) with FSAL and a standard I-controller.
struct Dopri5 {
    rel_tol: f64,
    abs_tol: f64,
    max_steps: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    fn new(rel_tol: f64, abs_tol: f64, max_steps: usize) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_steps,
        }
    }

    /// Integrate from `t0` to `t1 > t0`, calling `observe` after every
    /// accepted step. Returns the final state and the number of accepted
    /// steps.
    fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        t0: f64,
        y0: [Complex64; N],
        t1: f64,
        mut observe: O,
    ) -> Result<([Complex64; N], usize)>
    where
        F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
        O: FnMut(f64, &[Complex64; N]),
    {
        let zero = [Complex64::new(0.0, 0.0); N];
        let mut t = t0;
        let mut y = y0;
        let mut k = [zero; 7];
        k[0] = f(t, &y);
        let mut h = initial_step(&y, &k[0], self.rel_tol, self.abs_tol).min(t1 - t0);
        let mut accepted = 0;
        let mut attempts = 0;

        while t < t1 {
            attempts += 1;
            if attempts > self.max_steps {
                return Err(Error::StepFailure { eta: t, step: h });
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for (yi, ki) in ys.iter_mut().zip(kj) {
                            *yi += h * a * ki;
                        }
                    }
                }
                k[s] = f(t + C[s] * h, &ys);
            }
            // stage 7 was evaluated at the 5th-order solution (FSAL)
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let b = A[6][j];
                for (yi, ki) in y_new.iter_mut().zip(kj) {
                    *yi += h * b * ki;
                }
            }
            let mut err_sq = 0.0;
            for i in 0..N {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let scale = self.abs_tol + self.rel_tol * y[i].norm().max(y_new[i].norm());
                err_sq += (h * e.norm() / scale).powi(2);
            }
            let err = (err_sq / N as f64).sqrt();

            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y = y_new;
                k[0] = k[6];
                accepted += 1;
                observe(t, &y);
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
            if h <= 1e-13 * t.abs().max(1.0) {
                return Err(Error::StepFailure { eta: t, step: h });
            }
        }
        Ok((y, accepted))
    }
}

fn initial_step<const N: usize>(
    y: &[Complex64; N],
    dy: &[Complex64; N],
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (yi, di) in y.iter().zip(dy) {
        let scale = abs_tol + rel_tol * yi.norm();
        d0 = d0.max(yi.norm() / scale);
        d1 = d1.max(di.norm() / scale);
    }
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{coefficients, gamma_sq_sinh};

    fn params(e: f64, m: f64, k: f64) -> ModelParams {
        ModelParams::new(e, m, k).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dopri5_solves_harmonic_oscillator() {
        let solver = Dopri5::new(1e-10, 1e-12, 1_000_000);
        let omega = 3.0;
        let rhs = |_t: f64, y: &[Complex64; 2]| [y[1], -omega * omega * y[0]];
        let y0 = plane_wave(omega, 1.0, 0.0);
        let (y, steps) = solver.integrate(rhs, 0.0, y0, 10.0, |_, _| {}).unwrap();
        let want = plane_wave(omega, 1.0, 10.0);
        assert!((y[0] - want[0]).norm() < 1e-8);
        assert!((y[1] - want[1]).norm() < 3e-8);
        assert!(steps > 10);
    }

    #[test]
    fn decompose_inverts_plane_waves() {
        let (w, eta) = (2.3, 4.1);
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(-0.05, 0.7);
        let [u, du] = plane_wave(w, 1.0, eta);
        let [v, dv] = plane_wave(w, -1.0, eta);
        let (ga, gb) = decompose(w, eta, a * u + b * v, a * du + b * dv);
        assert!((ga - a).norm() < 1e-14 && (gb - b).norm() < 1e-14);
    }

    #[test]
    fn unit_point_matches_closed_form() {
        let p = params(1.0, 1.0, 1.0);
        let r = integrate_mode(&p, &IntegrationConfig::default()).unwrap();
        assert!(rel(r.ratio_sq, gamma_sq_sinh(&p).unwrap()) < 1e-4, "{r:?}");
        assert!(r.fit_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn plus_branch_matches_plus_coefficients() {
        let p = params(1.0, 1.0, 1.0);
        let cfg = IntegrationConfig::default().with_branch(Branch::Plus);
        let r = integrate_mode(&p, &cfg).unwrap();
        let closed = coefficients(&p, Branch::Plus).unwrap().ratio_sq();
        assert!(rel(r.ratio_sq, closed) < 1e-4, "{} vs {closed}", r.ratio_sq);
    }

    #[test]
    fn second_grid_point() {
        let p = params(0.01, 2.0, 0.5);
        let r = integrate_mode(&p, &IntegrationConfig::default().with_rel_tol(1e-12)).unwrap();
        assert!(rel(r.ratio_sq, gamma_sq_sinh(&p).unwrap()) < 1e-4, "{r:?}");
    }

    #[test]
    fn near_conformal_mode_is_not_mixed() {
        let r = integrate_mode(&params(1.0, 1e-6, 1.0), &IntegrationConfig::default()).unwrap();
        assert!(r.ratio_sq < 1e-10, "{r:?}");
    }

    #[test]
    fn initial_phase_does_not_matter() {
        let p = params(1.0, 1.0, 1.0);
        let base = integrate_mode(&p, &IntegrationConfig::default().with_rel_tol(1e-12))
            .unwrap()
            .ratio_sq;
        for delta in [0.1, 0.37, 1.0] {
            let cfg = IntegrationConfig {
                start_offset: delta,
                ..IntegrationConfig::default().with_rel_tol(1e-12)
            };
            let r = integrate_mode(&p, &cfg).unwrap().ratio_sq;
            assert!(rel(r, base) < 1e-8, "delta = {delta}: {r} vs {base}");
        }
    }

    #[test]
    fn wronskian_is_conserved() {
        let p = params(1.0, 1.0, 1.0);
        let cfg = IntegrationConfig::default();
        let drift = wronskian_drift(&p, &cfg).unwrap();
        assert!(drift < 1e-8, "drift {drift}");
        let wide = IntegrationConfig {
            eta_span: 30.0,
            ..cfg
        };
        let drift_wide = wronskian_drift(&p, &wide).unwrap();
        assert!(
            drift_wide < 10.0 * drift.max(1e-12),
            "{drift_wide} vs {drift}"
        );
    }

    #[test]
    fn wronskian_in_plane_wave_regime() {
        // explicit RK dissipates the Wronskian at roughly the tolerance level
        let cfg = IntegrationConfig {
            abs_tol: 1e-16,
            ..IntegrationConfig::default().with_rel_tol(1e-14)
        };
        let drift = wronskian_drift(&params(1e-12, 1.0, 1.0), &cfg).unwrap();
        assert!(drift < 1e-12, "drift {drift}");
    }

    #[test]
    fn contract_errors() {
        let p = params(1.0, 1.0, 1.0);
        let narrow = IntegrationConfig {
            eta_span: 8.0,
            ..IntegrationConfig::default()
        };
        assert!(matches!(
            integrate_mode(&p, &narrow),
            Err(Error::WindowTooSmall { .. })
        ));
        let loose = IntegrationConfig::default().with_rel_tol(1e-3);
        assert!(matches!(
            integrate_mode(&p, &loose),
            Err(Error::InvalidConfig(_))
        ));
        assert!(integrate_mode(&params(1.0, 0.0, 1.0), &IntegrationConfig::default()).is_err());
        let starved = IntegrationConfig {
            max_steps: 10,
            ..IntegrationConfig::default()
        };
        assert!(matches!(
            integrate_mode(&p, &starved),
            Err(Error::StepFailure { .. })
        ));
    }
}
