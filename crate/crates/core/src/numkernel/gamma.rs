//! Complex log-Gamma and Gamma.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// B_2, B_4, ..., B_24.
pub(crate) const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_MIN_ABS: f64 = 10.0;

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// ln(1+u) without cancellation for small u.
pub(crate) fn ln_1p(u: C64) -> C64 {
    let v = C64::new(1.0, 0.0) + u;
    let d = v - 1.0;
    if d == C64::new(0.0, 0.0) {
        return u;
    }
    v.ln() * (u / d)
}

fn stirling_ok(z: C64, min_abs: f64) -> bool {
    z.norm() >= min_abs && (z.re >= 0.0 || z.im.abs() >= z.re.abs())
}

/// Stirling series, valid once |z| is large enough.
fn stirling(z: C64) -> C64 {
    let mut acc = (z - 0.5) * z.ln() - z + LN_SQRT_2PI;
    let zinv = z.inv();
    let z2inv = zinv * zinv;
    let mut zp = zinv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        acc += zp * (b / (n * (n - 1.0)));
        zp *= z2inv;
    }
    acc
}

/// ln sin(pi z) on some branch; stable for large |Im z|.
pub(crate) fn ln_sin_pi(z: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i)
        let e = (i * 2.0 * PI * z).exp();
        -i * PI * z + ((e - 1.0) / (2.0 * i)).ln()
    } else {
        let e = (-i * 2.0 * PI * z).exp();
        i * PI * z + ((1.0 - e) / (2.0 * i)).ln()
    }
}

/// A logarithm of Gamma(z). The imaginary part is not normalised to the
/// principal branch, so only exp() of the result is meaningful.
pub fn ln_gamma(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("Gamma at {}", z.re)));
    }
    if stirling_ok(z, STIRLING_MIN_ABS) {
        return Ok(stirling(z));
    }
    if z.re < 0.5 {
        let refl = C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(C64::new(1.0, 0.0) - z)?;
        return Ok(refl);
    }
    let mut shift = C64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN_ABS {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

/// ln Gamma(z+w) - ln Gamma(z), accurate when |w| is small next to |z|.
pub fn ln_gamma_ratio(z: C64, w: C64) -> Result<C64> {
    if stirling_ok(z, 20.0) && stirling_ok(z + w, 20.0) && w.norm() <= 0.25 * z.norm() {
        let zw = z + w;
        // (zw - 1/2) ln zw - (z - 1/2) ln z - w + series difference
        let l = ln_1p(w / z);
        let mut acc = (z - 0.5) * l + w * zw.ln() - w;
        let (mut pa, mut pb) = (zw.inv(), z.inv());
        let (a2, b2) = (pa * pa, pb * pb);
        for (k, b) in BERNOULLI.iter().enumerate() {
            let n = 2.0 * (k as f64 + 1.0);
            acc += (pa - pb) * (b / (n * (n - 1.0)));
            pa *= a2;
            pb *= b2;
        }
        return Ok(acc);
    }
    Ok(ln_gamma(z + w)? - ln_gamma(z)?)
}

/// Gamma(s).
pub fn complex_gamma(s: C64) -> Result<C64> {
    let l = ln_gamma(s)?;
    if l.re > 709.0 {
        return Err(Error::Overflow(format!("|Gamma({s})| exceeds f64 range")));
    }
    Ok(l.exp())
}
