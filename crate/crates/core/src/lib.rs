//! Quantum Fisher information and Cramér-Rao bounds for estimating the
//! volume ratio `eps` of a 2D Robertson-Walker universe with scale factor
//! `a(eta) = 1 + eps (1 + tanh(rho eta))`, using the Dirac-field pairs
//! created by the expansion as the probe.
//!
//! All kinematic quantities are dimensionless (divided by the expansion
//! rate `rho`). The layers, bottom-up:
//!
//! * [`specfun`]: complex log-Gamma and log-domain `sinh` helpers.
//! * [`cosmology`]: model parameters, asymptotic frequencies, `zeta`
//!   combinations and the spinor factor `chi`.
//! * [`bogoliubov`]: mixing coefficients from Gamma functions, the closed
//!   `sinh` form of the creation factor, the probe variable
//!   `X = |gamma chi|^2` and its `eps`-derivative.
//! * [`qfi`]: classical and spectral quantum Fisher information.
//! * [`probe`]: the reduced particle-mode state, its QFI, entropy and bound.
//! * [`ode`]: an independent mode-equation integrator used as an oracle.
//! * [`estimation`]: parameter sweeps and bounded scalar optimisation.
//! * [`verify`]: the self-consistency checks behind `cosmo-qfi verify`.

pub mod bogoliubov;
pub mod cosmology;
mod error;
pub mod estimation;
pub mod ode;
pub mod probe;
pub mod qfi;
pub mod specfun;
pub mod verify;

pub use bogoliubov::{BogoliubovPair, Branch, CreationFactor, DerivativeMethod};
pub use cosmology::{FrequencySet, ModelParams};
pub use error::{Error, Result};
pub use estimation::{Optimum, Spacing, SweepRow, SweepSpec, SweepVariable};
pub use num_complex::Complex64;
pub use ode::{IntegrationConfig, MatchResult};
pub use probe::{EstimationResult, ProbeState, DEFAULT_TRIALS};
pub use qfi::{OutcomeDistribution, SpectralFamily};
