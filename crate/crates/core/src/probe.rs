//! The particle-mode probe state and its estimation figures of merit.
//!
//! Tracing the antiparticle out of the created pair leaves the diagonal state
//! `diag(1, X) / (1 + X)` in the out-region Fock basis, with `X = |gamma
//! chi|^2`. Its eigenvectors do not depend on `eps`, so the QFI reduces to
//! the classical Fisher information of the eigenvalues and the
//! eigenprojector measurement saturates it.

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{creation_factor, DerivativeMethod};
use crate::cosmology::ModelParams;
use crate::qfi::{classical_fisher, OutcomeDistribution};
use crate::{Error, Result};

/// Number of repetitions used for the bound when none is given.
pub const DEFAULT_TRIALS: f64 = 1e11;

/// Relative agreement required between the two QFI forms.
const QFI_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    /// Vacuum weight `1 / (1 + X)`.
    pub p0: f64,
    /// One-particle weight `X / (1 + X)`.
    pub p1: f64,
    pub x: f64,
    pub dx: f64,
    pub derivative_method: DerivativeMethod,
}

impl ProbeState {
    pub fn from_x(x: f64, dx: f64, derivative_method: DerivativeMethod) -> Self {
        let p0 = 1.0 / (1.0 + x);
        Self {
            p0,
            p1: x * p0,
            x,
            dx,
            derivative_method,
        }
    }

    /// `(d p0, d p1) = (-dX, dX) / (1 + X)^2`.
    pub fn dprobs(&self) -> (f64, f64) {
        let d = self.dx * self.p0 * self.p0;
        (-d, d)
    }

    /// The eigenprojector outcome distribution `(p0, p1)` with derivatives.
    pub fn outcome_distribution(&self) -> Result<OutcomeDistribution> {
        let (d0, d1) = self.dprobs();
        OutcomeDistribution::new(vec![self.p0, self.p1], vec![d0, d1])
    }

    /// QFI written directly in the weights:
    /// `(1+X) [d(1/(1+X))]^2 + ((1+X)/X) [d(X/(1+X))]^2`.
    pub fn qfi_literal(&self) -> f64 {
        if self.x == 0.0 {
            return 0.0;
        }
        let (d0, d1) = self.dprobs();
        let one_plus_x = 1.0 + self.x;
        one_plus_x * d0 * d0 + one_plus_x / self.x * d1 * d1
    }

    /// `(dX)^2 / (X (1 + X)^2)`, taken as zero at `X = 0`.
    pub fn qfi_simplified(&self) -> f64 {
        if self.x == 0.0 {
            return 0.0;
        }
        (self.dx / self.x) * self.dx * self.p0 * self.p0
    }

    /// Natural-log von Neumann entropy `-p0 ln p0 - p1 ln p1`.
    pub fn entropy(&self) -> f64 {
        binary_entropy_from_x(self.x)
    }
}

/// Binary entropy of `(1, X) / (1 + X)`, evaluated without forming `1 - p1`.
pub fn binary_entropy_from_x(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_one_plus_x = x.ln_1p();
    // -p0 ln p0 - p1 ln p1 = ln(1+X) - X ln X / (1+X)
    ln_one_plus_x - x * x.ln() / (1.0 + x)
}

pub fn binary_entropy(p0: f64, p1: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(p0) + term(p1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub qfi: f64,
    pub classical_fisher: f64,
    /// `1 / (trials * qfi)`, `+inf` when the QFI vanishes.
    pub bound: f64,
    pub trials: f64,
    pub derivative_method: DerivativeMethod,
}

impl EstimationResult {
    pub fn is_bounded(&self) -> bool {
        self.bound.is_finite()
    }

    pub fn with_trials(self, trials: f64) -> Result<Self> {
        validate_trials(trials)?;
        Ok(Self {
            bound: cramer_rao_bound(self.qfi, trials),
            trials,
            ..self
        })
    }
}

fn validate_trials(trials: f64) -> Result<()> {
    if !(trials.is_finite() && trials >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "trials must be a finite number >= 1, got {trials}"
        )));
    }
    Ok(())
}

/// Quantum Cramér-Rao bound on the variance, `1 / (N F_Q)`.
pub fn cramer_rao_bound(qfi: f64, trials: f64) -> f64 {
    if qfi > 0.0 {
        1.0 / (trials * qfi)
    } else {
        f64::INFINITY
    }
}

pub fn probe_with(p: &ModelParams, method: DerivativeMethod) -> Result<ProbeState> {
    let cf = creation_factor(p, method)?;
    Ok(ProbeState::from_x(cf.x, cf.dx_deps, method))
}

/// The reduced particle-mode state, with the analytic `dX/deps`.
pub fn probe(p: &ModelParams) -> Result<ProbeState> {
    probe_with(p, DerivativeMethod::Analytic)
}

/// QFI of the probe in `eps`, bounded for [`DEFAULT_TRIALS`] repetitions.
pub fn qfi_eps(p: &ModelParams, method: DerivativeMethod) -> Result<EstimationResult> {
    let state = probe_with(p, method)?;
    estimate(&state, DEFAULT_TRIALS)
}

/// Quantum Cramér-Rao bound for `trials` repetitions.
pub fn bound(p: &ModelParams, trials: f64, method: DerivativeMethod) -> Result<EstimationResult> {
    validate_trials(trials)?;
    let state = probe_with(p, method)?;
    estimate(&state, trials)
}

/// Fisher quantities of a probe state. The literal weight form and the
/// simplified form of the QFI are both evaluated and must agree.
pub fn estimate(state: &ProbeState, trials: f64) -> Result<EstimationResult> {
    validate_trials(trials)?;
    let qfi = state.qfi_simplified();
    let literal = state.qfi_literal();
    // the literal form underflows well before the simplified one
    if literal.is_normal() && ((literal - qfi) / qfi).abs() > QFI_FORM_TOL {
        return Err(Error::Degenerate(format!(
            "QFI forms disagree: literal {literal:e} vs simplified {qfi:e}"
        )));
    }
    if !qfi.is_finite() {
        return Err(Error::Degenerate(format!("QFI is not finite: {qfi}")));
    }
    let classical = classical_fisher(&state.outcome_distribution()?)?;
    Ok(EstimationResult {
        qfi,
        classical_fisher: classical,
        bound: cramer_rao_bound(qfi, trials),
        trials,
        derivative_method: state.derivative_method,
    })
}

pub fn entanglement_entropy(p: &ModelParams) -> Result<f64> {
    Ok(binary_entropy_from_x(crate::bogoliubov::probe_x(p)?))
}
