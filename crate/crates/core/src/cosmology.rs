//! Expansion model and the dimensionless kinematics of a Dirac mode.
//!
//! Every quantity is measured in units of the expansion rate `rho`, which
//! only reappears in [`scale_factor`] for the mode-equation integrator.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `a(eta) = 1 + eps (1 + tanh(rho eta))`.
pub fn scale_factor(eta: f64, eps: f64, rho: f64) -> f64 {
    1.0 + eps * (1.0 + (rho * eta).tanh())
}

/// `da/deta = eps rho sech^2(rho eta)`.
pub fn scale_factor_rate(eta: f64, eps: f64, rho: f64) -> f64 {
    let sech = 1.0 / (rho * eta).cosh();
    eps * rho * sech * sech
}

/// Volume ratio and the dimensionless mass and wave number of the probe mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps: f64,
    pub m_tilde: f64,
    pub k_tilde: f64,
}

impl ModelParams {
    pub fn new(eps: f64, m_tilde: f64, k_tilde: f64) -> Result<Self> {
        let p = Self {
            eps,
            m_tilde,
            k_tilde,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive and finite, got {}",
                self.eps
            )));
        }
        if !(self.m_tilde.is_finite() && self.m_tilde >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "m_tilde must be non-negative and finite, got {}",
                self.m_tilde
            )));
        }
        if !(self.k_tilde.is_finite() && self.k_tilde > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_tilde must be positive and finite, got {}",
                self.k_tilde
            )));
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    pub fn with_m_tilde(self, m_tilde: f64) -> Self {
        Self { m_tilde, ..self }
    }

    pub fn with_k_tilde(self, k_tilde: f64) -> Self {
        Self { k_tilde, ..self }
    }

    /// Massless modes are conformally coupled and see no particle creation.
    pub fn is_massless(&self) -> bool {
        self.m_tilde == 0.0
    }
}

/// Asymptotic frequencies and their combinations for one mode.
///
/// `zeta_{(s)}^{t} = omega_{(s)} + t * m eps` with `omega_{(+/-)} =
/// (omega_out +/- omega_in) / 2`. The two combinations that are small
/// differences of large terms (`zeta_pm`, `zeta_mm`) are evaluated in
/// rearranged forms without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub omega_in: f64,
    pub omega_out: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub zeta_pp: f64,
    pub zeta_pm: f64,
    pub zeta_mp: f64,
    pub zeta_mm: f64,
    pub mu_out: f64,
    /// `|chi| = (omega_out - mu_out) / k`
    pub chi_abs: f64,
}

pub fn frequencies(p: &ModelParams) -> FrequencySet {
    let ModelParams {
        eps,
        m_tilde: m,
        k_tilde: k,
    } = *p;
    let mu_out = m * (1.0 + 2.0 * eps);
    let omega_in = k.hypot(m);
    let omega_out = k.hypot(mu_out);
    let omega_plus = 0.5 * (omega_out + omega_in);
    // omega_out^2 - omega_in^2 = 4 m^2 eps (1 + eps)
    let omega_minus = 2.0 * m * m * eps * (1.0 + eps) / (omega_out + omega_in);

    let k2 = k * k;
    // omega_out - mu_out and omega_in - m, both as k^2 / (sum)
    let gap_out = k2 / (omega_out + mu_out);
    let gap_in = k2 / (omega_in + m);

    let zeta_pp = omega_plus + m * eps;
    let zeta_pm = m + 0.5 * (gap_out + gap_in);
    let zeta_mp = omega_minus + m * eps;
    // zeta_mm = (gap_out - gap_in) / 2, rearranged to factor out zeta_mp
    let zeta_mm = -zeta_mp * k2 / ((omega_out + mu_out) * (omega_in + m));

    FrequencySet {
        omega_in,
        omega_out,
        omega_plus,
        omega_minus,
        zeta_pp,
        zeta_pm,
        zeta_mp,
        zeta_mm,
        mu_out,
        chi_abs: gap_out / k,
    }
}

/// `d omega_out / d eps = 2 m mu_out / omega_out`.
pub fn d_omega_out_deps(p: &ModelParams, f: &FrequencySet) -> f64 {
    2.0 * p.m_tilde * f.mu_out / f.omega_out
}
