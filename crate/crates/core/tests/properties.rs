use std::f64::consts::PI;

use cosmo_qfi_core::bogoliubov::{
    default_fd_step, dx_deps_analytic, dx_deps_fd, gamma_sq_sinh, probe_x,
};
use cosmo_qfi_core::estimation::sweep;
use cosmo_qfi_core::probe::{bound, probe};
use cosmo_qfi_core::qfi::{classical_fisher, qfi_spectral, OutcomeDistribution, SpectralFamily};
use cosmo_qfi_core::specfun::{ln_abs_gamma_sq_imag, ln_gamma};
use cosmo_qfi_core::{Complex64, DerivativeMethod, ModelParams, Spacing, SweepSpec, SweepVariable};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0).prop_map(|(e, m, k)| ModelParams::new(e, m, k).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Wrap an angle difference into (-pi, pi].
fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ln_gamma_recurrence(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let z = Complex64::new(re, im);
        // stay clear of the poles at non-positive integers
        prop_assume!(im.abs() > 1e-3 || re > 0.5 || (re - re.round()).abs() > 1e-3);
        let lhs = ln_gamma(z + 1.0).unwrap();
        let rhs = ln_gamma(z).unwrap() + z.ln();
        let scale = lhs.norm().max(1.0);
        prop_assert!((lhs.re - rhs.re).abs() < 1e-11 * scale, "{z}: {lhs} vs {rhs}");
        prop_assert!(wrap(lhs.im - rhs.im).abs() < 1e-11 * scale, "{z}: {lhs} vs {rhs}");
    }

    #[test]
    fn imaginary_axis_identity(y in 0.01f64..40.0) {
        let direct = 2.0 * ln_gamma(Complex64::new(0.0, y)).unwrap().re;
        let closed = ln_abs_gamma_sq_imag(y, false).unwrap();
        prop_assert!((direct - closed).abs() < 1e-11 * closed.abs().max(1.0), "y = {y}");
        let shifted = 2.0 * ln_gamma(Complex64::new(1.0, y)).unwrap().re;
        let closed1 = ln_abs_gamma_sq_imag(y, true).unwrap();
        prop_assert!((shifted - closed1).abs() < 1e-11 * closed1.abs().max(1.0), "y = {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn creation_factor_is_a_probability_weight(p in params()) {
        let g = gamma_sq_sinh(&p).unwrap();
        prop_assert!(g >= 0.0 && g.is_finite());
        let x = probe_x(&p).unwrap();
        prop_assert!(x >= 0.0 && x.is_finite());
        let s = probe(&p).unwrap();
        prop_assert!((s.p0 + s.p1 - 1.0).abs() < 1e-14);
        prop_assert!(s.p0 > 0.0 && s.p1 >= 0.0);
    }

    #[test]
    fn analytic_derivative_matches_richardson(p in params()) {
        let a = dx_deps_analytic(&p).unwrap();
        let fd = dx_deps_fd(&p, default_fd_step(p.eps)).unwrap();
        prop_assert!(rel(a, fd) < 1e-6, "{p:?}: {a:e} vs {fd:e}");
    }

    #[test]
    fn qfi_forms_agree(p in params()) {
        let s = probe(&p).unwrap();
        prop_assert!(rel(s.qfi_literal(), s.qfi_simplified()) < 1e-10, "{p:?}");
    }

    #[test]
    fn bound_is_inverse_of_trials_times_qfi(p in params(), log_n in 0.0f64..15.0) {
        let n = 10f64.powf(log_n);
        let r = bound(&p, n, DerivativeMethod::Analytic).unwrap();
        prop_assert!((r.bound * r.trials * r.qfi - 1.0).abs() < 1e-14);
        let r10 = bound(&p, 10.0 * n, DerivativeMethod::Analytic).unwrap();
        prop_assert!(rel(r10.bound * 10.0, r.bound) < 1e-15);
        prop_assert_eq!(r10.qfi, r.qfi);
    }

    #[test]
    fn eigenprojector_saturates_qfi(p in params()) {
        let s = probe(&p).unwrap();
        let (d0, d1) = s.dprobs();
        let fam = SpectralFamily::diagonal(vec![s.p0, s.p1], vec![d0, d1]).unwrap();
        let fc = classical_fisher(&s.outcome_distribution().unwrap()).unwrap();
        prop_assert!(rel(fc, qfi_spectral(&fam)) < 1e-10);
    }

    #[test]
    fn coarse_grained_measurement_never_beats_qfi(
        weights in prop::collection::vec(0.05f64..1.0, 2..6),
        slopes in prop::collection::vec(-1.0f64..1.0, 6),
        effects in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mean: f64 = slopes[..n].iter().sum::<f64>() / n as f64;
        let dprobs: Vec<f64> = slopes[..n].iter().map(|s| s - mean).collect();
        let qfi = qfi_spectral(&SpectralFamily::diagonal(probs.clone(), dprobs.clone()).unwrap());

        // two-outcome POVM E0 = diag(a), E1 = 1 - E0
        let q0: f64 = probs.iter().zip(&effects).map(|(p, a)| p * a).sum();
        let dq0: f64 = dprobs.iter().zip(&effects).map(|(d, a)| d * a).sum();
        prop_assume!(q0 > 1e-9 && q0 < 1.0 - 1e-9);
        let dist = OutcomeDistribution::new(vec![q0, 1.0 - q0], vec![dq0, -dq0]).unwrap();
        let fc = classical_fisher(&dist).unwrap();
        prop_assert!(fc <= qfi + 1e-10, "{fc} > {qfi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweeps_are_deterministic(
        lo in 0.1f64..1.0,
        width in 0.5f64..5.0,
        points in 2usize..60,
        fixed in params(),
    ) {
        let spec = SweepSpec {
            variable: SweepVariable::MTilde,
            lo,
            hi: lo + width,
            points,
            fixed,
            trials: 1e11,
            spacing: Spacing::Linear,
            method: DerivativeMethod::Analytic,
        };
        let a = sweep(&spec).unwrap();
        let b = sweep(&spec).unwrap();
        prop_assert_eq!(a.len(), points);
        for (ra, rb) in a.iter().zip(&b) {
            prop_assert_eq!(ra.value.to_bits(), rb.value.to_bits());
            prop_assert_eq!(ra.qfi.to_bits(), rb.qfi.to_bits());
            prop_assert_eq!(ra.bound.to_bits(), rb.bound.to_bits());
        }
        prop_assert_eq!(a[0].value, lo);
        prop_assert_eq!(a[points - 1].value, lo + width);
    }
}
