//! Special functions used by the Bogoliubov and Fisher-information layers.
//!
//! Everything here is evaluated in log-domain where the linear value could
//! overflow: `sinh(pi zeta)` leaves `f64` range near `zeta ~ 230`, and `zeta`
//! grows linearly in the volume ratio.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `0.5 * ln(2 pi)`
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Principal-sheet `ln Gamma(z)`, continuous on the right half-plane.
///
/// Uses the Lanczos approximation (g = 7, 9 terms) for `Re z >= 0.5` and the
/// reflection formula otherwise. The reflection's `ln sin(pi z)` is expanded
/// around the dominant exponential so that large `|Im z|` does not overflow.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain {
            function: "ln_gamma",
            arg: if z.re.is_finite() { z.im } else { z.re },
        });
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(z.re));
    }
    if z.im < 0.0 {
        return ln_gamma(z.conj()).map(|w| w.conj());
    }
    if z.re < 0.5 {
        let one = Complex64::new(1.0, 0.0);
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_lanczos(one - z))
    } else {
        Ok(ln_gamma_lanczos(z))
    }
}

fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + HALF_LN_2PI + series.ln()
}

/// `ln sin(pi z)` for `Im z >= 0`, written as
/// `-i pi z + ln(1 - e^{2 i pi z}) - ln 2 + i pi / 2`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let w = (2.0 * PI * i * z).exp();
    -i * PI * z + (Complex64::new(1.0, 0.0) - w).ln() + Complex64::new(-LN_2, PI / 2.0)
}

/// `ln |Gamma(i y)|^2` (or `ln |Gamma(1 + i y)|^2` when `shifted`) from the
/// reflection identity `|Gamma(i y)|^2 = pi / (y sinh(pi y))`.
pub fn ln_abs_gamma_sq_imag(y: f64, shifted: bool) -> Result<f64> {
    if y == 0.0 || !y.is_finite() {
        return Err(Error::Domain {
            function: "ln_abs_gamma_sq_imag",
            arg: y,
        });
    }
    let ln_y = y.abs().ln();
    let ln_sinh = ln_sinh_abs(PI * y)?;
    Ok(if shifted {
        PI.ln() + ln_y - ln_sinh
    } else {
        PI.ln() - ln_y - ln_sinh
    })
}

/// `ln |sinh x|` as `|x| + ln(1 - e^{-2|x|}) - ln 2`, finite for any
/// non-zero finite `x`.
pub fn ln_sinh_abs(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            function: "ln_sinh_abs",
            arg: x,
        });
    }
    let a = x.abs();
    Ok(a + (-(-2.0 * a).exp_m1()).ln() - LN_2)
}

pub fn coth(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::Domain {
            function: "coth",
            arg: x,
        });
    }
    if x.abs() > 20.0 {
        return Ok(x.signum());
    }
    Ok(1.0 / x.tanh())
}

/// Below this `|pi z|` the `sinh(pi z) / z` helpers switch to series.
const SINHC_SERIES_CUTOFF: f64 = 0.1;

/// `ln(sinh(pi z) / z)`, the removable-singularity form of a `1/zeta`
/// prefactor paired with a `sinh(pi zeta)` factor. Even in `z`, equal to
/// `ln pi` at `z = 0`.
pub fn ln_sinhc_pi(z: f64) -> f64 {
    let x = PI * z;
    if x.abs() < SINHC_SERIES_CUTOFF {
        let x2 = x * x;
        // ln(sinh x / x) = x^2/6 - x^4/180 + x^6/2835 - x^8/37800
        let s = x2 * (1.0 / 6.0 + x2 * (-1.0 / 180.0 + x2 * (1.0 / 2835.0 - x2 / 37800.0)));
        PI.ln() + s
    } else {
        // x != 0 here
        ln_sinh_abs(x).expect("nonzero argument") - z.abs().ln()
    }
}

/// `d/dz ln(sinh(pi z) / z) = pi coth(pi z) - 1/z`, regular at `z = 0`.
pub fn d_ln_sinhc_pi(z: f64) -> f64 {
    let x = PI * z;
    if x.abs() < SINHC_SERIES_CUTOFF {
        let x2 = x * x;
        // coth x - 1/x = x/3 - x^3/45 + 2x^5/945 - x^7/4725 + 2x^9/93555
        let s = x
            * (1.0 / 3.0
                + x2 * (-1.0 / 45.0
                    + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * 2.0 / 93555.0))));
        PI * s
    } else {
        PI * coth(x).expect("nonzero argument") - 1.0 / z
    }
}
