//! Number formatting shared by the JSON and CSV writers.
//!
//! Finite doubles are written in shortest round-trip form; non-finite values
//! become the string sentinels `inf`, `-inf` and `nan`.

use serde::Serializer;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}

/// serde helper: finite values as JSON numbers, the rest as sentinel strings.
pub fn num<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}
