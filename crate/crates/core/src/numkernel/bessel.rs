//! Bessel functions J, Y, K and the parity-dependent combination B for
//! small complex order |nu| <= 0.2 and real argument x > 0.
//!
//! Small x uses ascending series (with the reflection formulas for Y and K),
//! moderate x uses Schläfli/Basset integrals, large x the Hankel expansion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::complex_gamma;
use super::quad::composite_gauss_legendre;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselKind {
    J,
    Y,
    K,
    B,
}

pub const MAX_ORDER: f64 = 0.2;
const NEAR_INTEGER: f64 = 1e-4;
const SERIES_MAX_X: f64 = 8.0;
const HANKEL_MIN_X: f64 = 25.0;
const K_SERIES_MAX_X: f64 = 2.0;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// sum_k (sign)^k (x/2)^{2k+nu} / (k! Gamma(k+nu+1))
fn ascending(nu: C64, x: f64, sign: f64) -> Result<C64> {
    let h = 0.5 * x;
    let mut term = (nu * h.ln()).exp() / complex_gamma(nu + 1.0)?;
    let mut acc = term;
    let q = sign * h * h;
    for k in 1..200 {
        term *= q / (k as f64 * (nu + k as f64));
        acc += term;
        if term.norm() < 1e-17 * acc.norm() {
            break;
        }
    }
    Ok(acc)
}

fn sin_pi_checked(nu: C64) -> Result<C64> {
    let s = (nu * PI).sin();
    if s.norm() < 1e-8 {
        return Err(Error::Domain(format!("degenerate Bessel order {nu}")));
    }
    Ok(s)
}

/// Hankel asymptotic (P, Q) with J = sqrt(2/pi x)(P cos w - Q sin w).
fn hankel_pq(nu: C64, x: f64) -> (C64, C64) {
    let mu = nu * nu * 4.0;
    let mut p = c(1.0);
    let mut q = C64::new(0.0, 0.0);
    let mut a = c(1.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kk = k as f64;
        a *= (mu - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x);
        let mag = a.norm();
        if mag > last || mag < 1e-18 {
            break;
        }
        last = mag;
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    (p, q)
}

fn jy_hankel(nu: C64, x: f64) -> (C64, C64) {
    let (p, q) = hankel_pq(nu, x);
    let w = c(x) - nu * (PI / 2.0) - PI / 4.0;
    let amp = (2.0 / (PI * x)).sqrt();
    let (cw, sw) = (w.cos(), w.sin());
    (amp * (p * cw - q * sw), amp * (p * sw + q * cw))
}

fn jy_integral(nu: C64, x: f64) -> (C64, C64) {
    let (th, wth) = composite_gauss_legendre(0.0, PI, 8, 24);
    let mut j1 = C64::new(0.0, 0.0);
    let mut y1 = C64::new(0.0, 0.0);
    for (t, w) in th.iter().zip(&wth) {
        let arg = nu * *t - x * t.sin();
        j1 += arg.cos() * *w;
        y1 -= arg.sin() * *w;
    }
    let tmax = (45.0 / x).asinh() + 0.5;
    let (ts, wts) = composite_gauss_legendre(0.0, tmax, 6, 24);
    let mut j2 = C64::new(0.0, 0.0);
    let mut y2 = C64::new(0.0, 0.0);
    let cpi = (nu * PI).cos();
    for (t, w) in ts.iter().zip(&wts) {
        let e = (-x * t.sinh()).exp();
        let ep = (nu * *t).exp();
        let em = (-nu * *t).exp();
        j2 += em * e * *w;
        y2 += (ep + em * cpi) * e * *w;
    }
    let j = (j1 - (nu * PI).sin() * j2) / PI;
    let y = (y1 - y2) / PI;
    (j, y)
}

fn bessel_j_raw(nu: C64, x: f64) -> Result<C64> {
    if x <= SERIES_MAX_X {
        ascending(nu, x, -1.0)
    } else if x < HANKEL_MIN_X {
        Ok(jy_integral(nu, x).0)
    } else {
        Ok(jy_hankel(nu, x).0)
    }
}

fn bessel_y_raw(nu: C64, x: f64) -> Result<C64> {
    if x <= SERIES_MAX_X {
        let s = sin_pi_checked(nu)?;
        let jp = ascending(nu, x, -1.0)?;
        let jm = ascending(-nu, x, -1.0)?;
        Ok((jp * (nu * PI).cos() - jm) / s)
    } else if x < HANKEL_MIN_X {
        Ok(jy_integral(nu, x).1)
    } else {
        Ok(jy_hankel(nu, x).1)
    }
}

fn bessel_k_raw(nu: C64, x: f64) -> Result<C64> {
    if x <= K_SERIES_MAX_X {
        let s = sin_pi_checked(nu)?;
        let ip = ascending(nu, x, 1.0)?;
        let im = ascending(-nu, x, 1.0)?;
        return Ok((im - ip) * (PI / 2.0) / s);
    }
    // K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
    let tmax = (1.0 + 45.0 / x).acosh() + 0.5;
    let (ts, ws) = composite_gauss_legendre(0.0, tmax, 8, 24);
    let mut acc = C64::new(0.0, 0.0);
    for (t, w) in ts.iter().zip(&ws) {
        acc += (nu * *t).cosh() * (-x * t.cosh()).exp() * *w;
    }
    Ok(acc)
}

fn near_integer(nu: C64) -> bool {
    (nu - c(nu.re.round())).norm() < NEAR_INTEGER
}

/// Symmetric averages at nu +- eps and nu +- 2 eps, combined so the
/// O(eps^2) bias cancels.
fn averaged(nu: C64, x: f64, f: fn(C64, f64) -> Result<C64>) -> Result<C64> {
    let a1 = (f(nu + NEAR_INTEGER, x)? + f(nu - NEAR_INTEGER, x)?) * 0.5;
    let a2 = (f(nu + 2.0 * NEAR_INTEGER, x)? + f(nu - 2.0 * NEAR_INTEGER, x)?) * 0.5;
    Ok((a1 * 4.0 - a2) / 3.0)
}

/// Evaluate f at nu, or average f(nu +- eps) when nu is within eps of an
/// integer and the reflection formula would divide by ~0.
fn with_averaging(nu: C64, x: f64, f: fn(C64, f64) -> Result<C64>) -> Result<C64> {
    if near_integer(nu) && x <= SERIES_MAX_X {
        return averaged(nu, x, f);
    }
    f(nu, x)
}

fn check_args(nu: C64, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument x={x} must be positive")));
    }
    if nu.norm() > MAX_ORDER + 3.0 * NEAR_INTEGER {
        return Err(Error::Domain(format!("Bessel order {nu} outside |nu| <= {MAX_ORDER}")));
    }
    Ok(())
}

pub fn bessel_j(nu: C64, x: f64) -> Result<C64> {
    check_args(nu, x)?;
    bessel_j_raw(nu, x)
}

pub fn bessel_y(nu: C64, x: f64) -> Result<C64> {
    check_args(nu, x)?;
    with_averaging(nu, x, bessel_y_raw)
}

pub fn bessel_k(nu: C64, x: f64) -> Result<C64> {
    check_args(nu, x)?;
    if x <= K_SERIES_MAX_X && near_integer(nu) {
        return averaged(nu, x, bessel_k_raw);
    }
    bessel_k_raw(nu, x)
}

/// B_nu: cos(pi nu/2) Y + sin(pi nu/2) J for even characters,
/// i cos(pi nu/2) J - i sin(pi nu/2) Y for odd ones.
pub fn bessel_b(nu: C64, x: f64, parity: u8) -> Result<C64> {
    let j = bessel_j(nu, x)?;
    let y = bessel_y(nu, x)?;
    let (cs, sn) = ((nu * (PI / 2.0)).cos(), (nu * (PI / 2.0)).sin());
    if parity == 0 {
        Ok(cs * y + sn * j)
    } else {
        let i = C64::new(0.0, 1.0);
        Ok(i * cs * j - i * sn * y)
    }
}

pub fn bessel(kind: BesselKind, nu: C64, x: f64, parity: u8) -> Result<C64> {
    match kind {
        BesselKind::J => bessel_j(nu, x),
        BesselKind::Y => bessel_y(nu, x),
        BesselKind::K => bessel_k(nu, x),
        BesselKind::B => bessel_b(nu, x, parity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: f64, tol: f64) -> bool {
        (a - c(b)).norm() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn order_zero_values() {
        assert!(close(bessel_j(c(0.0), 1.0).unwrap(), 0.765_197_686_557_966_6, 1e-13));
        assert!(close(bessel_y(c(0.0), 1.0).unwrap(), 0.088_256_964_215_676_96, 1e-8));
        assert!(close(bessel_k(c(0.0), 1.0).unwrap(), 0.421_024_438_240_708_3, 1e-8));
        assert!(close(bessel_k(c(0.0), 3.0).unwrap(), 0.034_739_504_386_279_99, 1e-12));
    }

    #[test]
    fn regimes_are_continuous() {
        let nu = C64::new(0.07, 0.03);
        for &(x0, kind) in &[
            (SERIES_MAX_X, BesselKind::J),
            (SERIES_MAX_X, BesselKind::Y),
            (HANKEL_MIN_X, BesselKind::J),
            (HANKEL_MIN_X, BesselKind::Y),
        ] {
            let f = |x: f64| match kind {
                BesselKind::J => bessel_j_raw(nu, x).unwrap(),
                _ => bessel_y_raw(nu, x).unwrap(),
            };
            let below = f(x0);
            let above = f(x0 + 1e-9);
            assert!((below - above).norm() < 1e-9, "{kind:?} jump at {x0}: {below} vs {above}");
        }
        let lo = bessel_k_raw(nu, K_SERIES_MAX_X).unwrap();
        let hi = bessel_k_raw(nu, K_SERIES_MAX_X + 1e-12).unwrap();
        assert!((lo - hi).norm() < 1e-12);
    }

    #[test]
    fn arguments_rejected() {
        assert!(bessel_j(c(0.1), 0.0).is_err());
        assert!(bessel_j(c(0.5), 1.0).is_err());
    }
}
