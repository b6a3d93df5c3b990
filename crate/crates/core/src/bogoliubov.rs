//! Bogoliubov mixing between in- and out-region Dirac modes.
//!
//! The coefficients `A`, `B` are products of Gamma functions of imaginary
//! arguments. Their squared ratio on the minus branch collapses, via
//! `|Gamma(i y)|^2 = pi / (y sinh(pi y))`, to a ratio of `sinh` factors, the
//! creation factor `|gamma|^2`. Combined with the spinor factor this gives
//! the probe variable `X = |gamma chi|^2`, the only quantity that enters the
//! particle-mode state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cosmology::{d_omega_out_deps, frequencies, FrequencySet, ModelParams};
use crate::specfun::{coth, d_ln_sinhc_pi, ln_gamma, ln_sinh_abs, ln_sinhc_pi};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

/// How `dX/deps` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    Analytic,
    FiniteDifference,
}

impl std::fmt::Display for DerivativeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DerivativeMethod::Analytic => "analytic",
            DerivativeMethod::FiniteDifference => "finite_difference",
        })
    }
}

/// Log-magnitudes and phases of `(A, B)` for one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovPair {
    pub branch: Branch,
    pub log_abs_a: f64,
    pub log_abs_b: f64,
    pub phase_a: f64,
    pub phase_b: f64,
}

impl BogoliubovPair {
    /// `|B / A|^2`
    pub fn ratio_sq(&self) -> f64 {
        (2.0 * (self.log_abs_b - self.log_abs_a)).exp()
    }

    pub fn a(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs_a.exp(), self.phase_a)
    }

    pub fn b(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs_b.exp(), self.phase_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreationFactor {
    pub gamma_sq: f64,
    pub x: f64,
    pub dx_deps: f64,
    pub derivative_method: DerivativeMethod,
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn ln_gamma_im(re: f64, im: f64) -> Result<Complex64> {
    ln_gamma(Complex64::new(re, im))
}

/// Bogoliubov coefficients of one branch, assembled from `ln Gamma`.
///
/// ```text
/// A± = sqrt(w_out/w_in) Γ(1 - i w_in) Γ(-i w_out) / (Γ(1 - i ζ₊^∓) Γ(-i ζ₊^±))
/// B± = sqrt(w_out/w_in) Γ(1 - i w_in) Γ( i w_out) / (Γ(1 + i ζ₋^±) Γ( i ζ₋^∓))
/// ```
pub fn coefficients(p: &ModelParams, branch: Branch) -> Result<BogoliubovPair> {
    p.validate()?;
    let f = frequencies(p);
    let prefactor = 0.5 * (f.omega_out / f.omega_in).ln();
    let common = ln_gamma_im(1.0, -f.omega_in)?;

    let (zp_a1, zp_a2, zm_b1, zm_b2) = match branch {
        Branch::Plus => (f.zeta_pm, f.zeta_pp, f.zeta_mp, f.zeta_mm),
        Branch::Minus => (f.zeta_pp, f.zeta_pm, f.zeta_mm, f.zeta_mp),
    };
    let ln_a = common + ln_gamma_im(0.0, -f.omega_out)?
        - ln_gamma_im(1.0, -zp_a1)?
        - ln_gamma_im(0.0, -zp_a2)?;
    let ln_b = common + ln_gamma_im(0.0, f.omega_out)?
        - ln_gamma_im(1.0, zm_b1)?
        - ln_gamma_im(0.0, zm_b2)?;

    Ok(BogoliubovPair {
        branch,
        log_abs_a: prefactor + ln_a.re,
        log_abs_b: prefactor + ln_b.re,
        phase_a: wrap_phase(ln_a.im),
        phase_b: wrap_phase(ln_b.im),
    })
}

/// `ln |gamma|^2` from the closed `sinh` form, `-inf` when a factor vanishes
/// (massless modes).
///
/// ```text
/// |γ|² = (ζ₋⁺ ζ₊⁺)/(ζ₋⁻ ζ₊⁻) · sinh(πζ₋⁻) sinh(πζ₋⁺) / (sinh(πζ₊⁺) sinh(πζ₊⁻))
/// ```
///
/// `ζ₋⁻` is non-positive and vanishes as `k -> 0` or `eps -> 0`; the pair
/// `sinh(πζ₋⁻)/ζ₋⁻` is evaluated as one removable-singularity factor.
pub fn ln_gamma_sq(f: &FrequencySet) -> f64 {
    if f.zeta_mp == 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_sinh = |z: f64| ln_sinh_abs(PI * z).expect("zeta_pp, zeta_pm, zeta_mp are positive");
    f.zeta_mp.ln() + f.zeta_pp.ln() - f.zeta_pm.ln() + ln_sinhc_pi(f.zeta_mm) + ln_sinh(f.zeta_mp)
        - ln_sinh(f.zeta_pp)
        - ln_sinh(f.zeta_pm)
}

/// `|gamma|^2`; exactly zero for a massless mode.
pub fn gamma_sq_sinh(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    Ok(ln_gamma_sq(&frequencies(p)).exp())
}

/// `ln X = ln |gamma|^2 + ln |chi|^2`.
pub fn ln_probe_x(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let f = frequencies(p);
    Ok(ln_gamma_sq(&f) + 2.0 * f.chi_abs.ln())
}

/// The probe variable `X = |gamma chi|^2`.
pub fn probe_x(p: &ModelParams) -> Result<f64> {
    let x = ln_probe_x(p)?.exp();
    if !x.is_finite() {
        return Err(Error::Degenerate(format!("X overflowed at {p:?}")));
    }
    Ok(x)
}

/// Exact `d ln X / d eps` by the chain rule through every `zeta` and `chi`.
pub fn dln_x_deps(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if p.is_massless() {
        return Err(Error::Degenerate(
            "d ln X/d eps is undefined for a massless mode (X = 0)".into(),
        ));
    }
    let m = p.m_tilde;
    let f = frequencies(p);
    let dw = d_omega_out_deps(p, &f);
    let up = 0.5 * dw + m; // d zeta_pp, d zeta_mp
    let down = -m * (f.omega_out - f.mu_out) / f.omega_out; // 0.5 dw - m, d zeta_pm, d zeta_mm

    let pi_coth = |z: f64| PI * coth(PI * z).expect("positive zeta");
    let d_ln_gamma_sq = up / f.zeta_mp + up / f.zeta_pp - down / f.zeta_pm
        + d_ln_sinhc_pi(f.zeta_mm) * down
        + pi_coth(f.zeta_mp) * up
        - pi_coth(f.zeta_pp) * up
        - pi_coth(f.zeta_pm) * down;
    // ln chi^2 = 2 ln k - 2 ln(omega_out + mu_out)
    let d_ln_chi_sq = -2.0 * (dw + 2.0 * m) / (f.omega_out + f.mu_out);
    Ok(d_ln_gamma_sq + d_ln_chi_sq)
}

/// `dX/deps = X d ln X / d eps`.
pub fn dx_deps_analytic(p: &ModelParams) -> Result<f64> {
    let x = probe_x(p)?;
    if x == 0.0 {
        return Err(Error::Degenerate(format!(
            "X = 0 at {p:?}; the analytic derivative needs X > 0"
        )));
    }
    Ok(x * dln_x_deps(p)?)
}

/// Default finite-difference step, `1e-5 max(eps, 1)`.
pub fn default_fd_step(eps: f64) -> f64 {
    1e-5 * eps.max(1.0)
}

/// Central difference of `X` in `eps` at steps `h` and `h/2`, combined by
/// one Richardson extrapolation (error `O(h^4)`).
pub fn dx_deps_fd(p: &ModelParams, h: f64) -> Result<f64> {
    p.validate()?;
    if !(h.is_finite() && h >= 1e-12 * p.eps) {
        return Err(Error::StepUnderflow { h, eps: p.eps });
    }
    if p.eps - 2.0 * h <= 0.0 {
        return Err(Error::Degenerate(format!(
            "finite-difference stencil eps - 2h = {} leaves the domain eps > 0",
            p.eps - 2.0 * h
        )));
    }
    let x_at = |eps: f64| probe_x(&p.with_eps(eps));
    let central = |h: f64| -> Result<f64> { Ok((x_at(p.eps + h)? - x_at(p.eps - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `X` and `dX/deps` by the requested method. Massless modes give
/// `X = dX = 0` for either method.
pub fn creation_factor(p: &ModelParams, method: DerivativeMethod) -> Result<CreationFactor> {
    p.validate()?;
    let gamma_sq = gamma_sq_sinh(p)?;
    let x = probe_x(p)?;
    let dx_deps = match method {
        _ if p.is_massless() => 0.0,
        DerivativeMethod::Analytic => x * dln_x_deps(p)?,
        DerivativeMethod::FiniteDifference => dx_deps_fd(p, default_fd_step(p.eps))?,
    };
    if !dx_deps.is_finite() {
        return Err(Error::Degenerate(format!("dX/deps is not finite at {p:?}")));
    }
    Ok(CreationFactor {
        gamma_sq,
        x,
        dx_deps,
        derivative_method: method,
    })
}
