//! Parameter sweeps and optimal-probe search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::DerivativeMethod;
use crate::cosmology::ModelParams;
use crate::probe::{bound, EstimationResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    MTilde,
    KTilde,
    Eps,
}

impl SweepVariable {
    pub fn apply(self, fixed: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepVariable::MTilde => fixed.with_m_tilde(value),
            SweepVariable::KTilde => fixed.with_k_tilde(value),
            SweepVariable::Eps => fixed.with_eps(value),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::MTilde => "m_tilde",
            SweepVariable::KTilde => "k_tilde",
            SweepVariable::Eps => "eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Values of the parameters that are not swept.
    pub fixed: ModelParams,
    pub trials: f64,
    pub spacing: Spacing,
    pub method: DerivativeMethod,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.hi > self.lo) {
            return Err(Error::InvalidParameter(format!(
                "sweep range must satisfy 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "a sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Ascending sweep coordinates, endpoints included exactly.
    pub fn grid(&self) -> Vec<f64> {
        grid(self.lo, self.hi, self.points, self.spacing)
    }
}

fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == 0 {
                return lo;
            }
            if i + 1 == points {
                return hi;
            }
            let t = i as f64 / last;
            match spacing {
                Spacing::Linear => lo + (hi - lo) * t,
                Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
            }
        })
        .collect()
}

/// One sweep point. Points whose evaluation failed carry `NaN` in `qfi`,
/// `entropy` and `p1` and an infinite `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub qfi: f64,
    pub bound: f64,
    pub entropy: f64,
    pub p1: f64,
}

impl SweepRow {
    pub fn failed(value: f64) -> Self {
        Self {
            value,
            qfi: f64::NAN,
            bound: f64::INFINITY,
            entropy: f64::NAN,
            p1: f64::NAN,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.qfi.is_nan()
    }
}

fn evaluate_row(
    variable: SweepVariable,
    fixed: ModelParams,
    value: f64,
    trials: f64,
    method: DerivativeMethod,
) -> SweepRow {
    let eval = || -> Result<SweepRow> {
        let p = variable.apply(fixed, value);
        p.validate()?;
        let state = crate::probe::probe_with(&p, method)?;
        let r = crate::probe::estimate(&state, trials)?;
        Ok(SweepRow {
            value,
            qfi: r.qfi,
            bound: r.bound,
            entropy: state.entropy(),
            p1: state.p1,
        })
    };
    eval().unwrap_or_else(|_| SweepRow::failed(value))
}

/// Evaluate the probe at every coordinate of the spec. Points are computed
/// in parallel; row order follows the grid.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    sweep_values(
        spec.variable,
        &spec.grid(),
        spec.fixed,
        spec.trials,
        spec.method,
    )
}

/// Sweep over explicit coordinates, which need not be valid parameters;
/// invalid or degenerate points become failed rows.
pub fn sweep_values(
    variable: SweepVariable,
    values: &[f64],
    fixed: ModelParams,
    trials: f64,
    method: DerivativeMethod,
) -> Result<Vec<SweepRow>> {
    if !(trials.is_finite() && trials >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "trials must be a finite number >= 1, got {trials}"
        )));
    }
    Ok(values
        .par_iter()
        .map(|&v| evaluate_row(variable, fixed, v, trials, method))
        .collect())
}

/// Number of grid points scanned before the bracketed refinement.
pub const PRESCAN_POINTS: usize = 1000;
/// Absolute tolerance of the refined coordinate.
pub const OPTIMIZE_XTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub variable: SweepVariable,
    pub coordinate: f64,
    pub result: EstimationResult,
    /// The minimiser sits within tolerance of `lo` or `hi`.
    pub boundary_warning: bool,
    pub grid_argmin: f64,
    pub grid_step: f64,
}

/// Coordinate in `[lo, hi]` minimising the Cramér-Rao bound, i.e.
/// maximising the QFI.
///
/// A linear pre-scan locates the best grid cell; Brent's method then refines
/// inside the two neighbouring cells. The result is never worse than the
/// best pre-scan point.
pub fn optimize(
    variable: SweepVariable,
    lo: f64,
    hi: f64,
    fixed: ModelParams,
    trials: f64,
    method: DerivativeMethod,
) -> Result<Optimum> {
    let spec = SweepSpec {
        variable,
        lo,
        hi,
        points: PRESCAN_POINTS,
        fixed,
        trials,
        spacing: Spacing::Linear,
        method,
    };
    spec.validate()?;
    let xs = spec.grid();
    let rows = sweep_values(variable, &xs, fixed, trials, method)?;
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.bound.is_finite())
        .min_by(|a, b| a.1.bound.total_cmp(&b.1.bound))
        .map(|(i, _)| i)
        .ok_or_else(|| {
            Error::Degenerate(format!(
                "the bound is infinite everywhere on [{lo}, {hi}] for {}",
                variable.name()
            ))
        })?;

    let objective = |x: f64| {
        let r = evaluate_row(variable, fixed, x, trials, method);
        if r.is_failed() {
            f64::INFINITY
        } else {
            r.bound
        }
    };
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(xs.len() - 1)];
    let (x_refined, f_refined) = brent_minimize(objective, a, b, OPTIMIZE_XTOL);
    let coordinate = if f_refined <= rows[best].bound {
        x_refined
    } else {
        xs[best]
    };

    let result = bound(&variable.apply(fixed, coordinate), trials, method)?;
    Ok(Optimum {
        variable,
        coordinate,
        result,
        boundary_warning: coordinate - lo <= OPTIMIZE_XTOL || hi - coordinate <= OPTIMIZE_XTOL,
        grid_argmin: xs[best],
        grid_step: xs[1] - xs[0],
    })
}

/// Brent's bounded minimiser (golden section with parabolic steps) on
/// `[a, b]`, to absolute tolerance `xtol`. Returns `(x, f(x))`.
pub fn brent_minimize<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..500 {
        let mid = 0.5 * (a + b);
        let tol1 = f64::EPSILON.sqrt() * x.abs() + xtol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (x, fx) = brent_minimize(|x| (x - 0.3).powi(2) + 2.0, -1.0, 4.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 2.0).abs() < 1e-15);
        // monotone function: minimum at the boundary
        let (x, _) = brent_minimize(|x| x, 1.0, 2.0, 1e-9);
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_spacing() {
        let g = grid(0.1, 10.0, 5, Spacing::Log);
        assert!((g[2] - 1.0).abs() < 1e-15);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[4], 10.0);
        let g = grid(1.0, 2.0, 3, Spacing::Linear);
        assert_eq!(g, vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec {
            variable: SweepVariable::MTilde,
            lo: 0.1,
            hi: 10.0,
            points: 1,
            fixed: fixed(),
            trials: 1e11,
            spacing: Spacing::Linear,
            method: DerivativeMethod::Analytic,
        };
        assert!(sweep(&spec).is_err());
        spec.points = 3;
        spec.lo = 10.0;
        assert!(sweep(&spec).is_err());
        spec.lo = 0.0;
        assert!(sweep(&spec).is_err());
        spec.lo = 0.1;
        assert_eq!(sweep(&spec).unwrap().len(), 3);
    }

    #[test]
    fn degenerate_points_become_sentinels() {
        let rows = sweep_values(
            SweepVariable::MTilde,
            &[0.0, 0.5, 1.0],
            fixed(),
            1e11,
            DerivativeMethod::Analytic,
        )
        .unwrap();
        assert_eq!(rows[0].qfi, 0.0);
        assert_eq!(rows[0].bound, f64::INFINITY);
        assert!(rows[1].bound.is_finite() && rows[2].bound.is_finite());

        let rows = sweep_values(
            SweepVariable::KTilde,
            &[-1.0, 1.0],
            fixed(),
            1e11,
            DerivativeMethod::Analytic,
        )
        .unwrap();
        assert!(rows[0].is_failed() && rows[0].bound.is_infinite());
        assert!(!rows[1].is_failed());
    }

    #[test]
    fn trials_scale_the_bound_exactly() {
        let spec = SweepSpec {
            variable: SweepVariable::KTilde,
            lo: 0.2,
            hi: 3.0,
            points: 17,
            fixed: fixed(),
            trials: 1e11,
            spacing: Spacing::Log,
            method: DerivativeMethod::Analytic,
        };
        let a = sweep(&spec).unwrap();
        let b = sweep(&SweepSpec {
            trials: 4e11,
            ..spec
        })
        .unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.qfi, rb.qfi);
            assert!(((ra.bound / 4.0 - rb.bound) / rb.bound).abs() < 1e-15);
        }
    }

    #[test]
    fn optimizer_beats_prescan() {
        let opt = optimize(
            SweepVariable::KTilde,
            0.05,
            20.0,
            fixed(),
            1e11,
            DerivativeMethod::Analytic,
        )
        .unwrap();
        assert!(!opt.boundary_warning);
        assert!((opt.coordinate - opt.grid_argmin).abs() <= opt.grid_step);
        let grid_best = bound(
            &fixed().with_k_tilde(opt.grid_argmin),
            1e11,
            DerivativeMethod::Analytic,
        )
        .unwrap()
        .bound;
        assert!(opt.result.bound <= grid_best);
    }

    #[test]
    fn optimizer_flags_boundary_minimum() {
        // X decays with k far past the peak, so the bound is smallest at lo
        let opt = optimize(
            SweepVariable::KTilde,
            5.0,
            8.0,
            fixed(),
            1e11,
            DerivativeMethod::Analytic,
        )
        .unwrap();
        assert!(opt.boundary_warning);
        assert!((opt.coordinate - 5.0).abs() <= OPTIMIZE_XTOL);
    }
}
