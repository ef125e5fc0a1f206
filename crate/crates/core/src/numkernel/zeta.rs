//! Riemann, Hurwitz and Dirichlet series by Euler–Maclaurin summation.

use std::f64::consts::PI;

use super::gamma::{complex_gamma, BERNOULLI};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::C64;

/// (2k)! for k = 1..=12.
const FACT_2K: [f64; 12] = [
    2.0,
    24.0,
    720.0,
    40320.0,
    3628800.0,
    479001600.0,
    87178291200.0,
    20922789888000.0,
    6402373705728000.0,
    2432902008176640000.0,
    1.1240007277776077e21,
    6.204484017332394e23,
];

/// Start index of the Euler–Maclaurin tail for argument s.
pub fn em_cutoff(s: C64) -> usize {
    let target = 1.3 * s.im.abs() + 30.0;
    let mut n = (target - s.re).max(1.0).ceil() as usize;
    while (s + n as f64).norm() <= target {
        n += 1;
    }
    n
}

/// Euler–Maclaurin remainder sum_{n>=0} (x+n)^{-s} for large |x|.
pub(crate) fn em_tail(s: C64, x: f64) -> C64 {
    let xs = (-s * x.ln()).exp();
    xs * x / (s - 1.0) + em_tail_regular(s, x)
}

/// em_tail without the pole term x^{1-s}/(s-1).
fn em_tail_regular(s: C64, x: f64) -> C64 {
    let xs = (-s * x.ln()).exp();
    let mut acc = xs * 0.5;
    // term_k = B_2k/(2k)! s(s+1)...(s+2k-2) x^{-s-2k+1}
    let mut rising = s;
    let mut xp = xs / x;
    let x2 = 1.0 / (x * x);
    for k in 0..12 {
        acc += rising * xp * (BERNOULLI[k] / FACT_2K[k]);
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        xp *= x2;
    }
    acc
}

/// (e^z - 1)/z.
fn expm1_over(z: C64) -> C64 {
    if z.norm() < 1e-3 {
        C64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Hurwitz zeta(s, a) for 0 < a <= 1.
pub fn hurwitz_zeta(s: C64, a: f64) -> Result<C64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("Hurwitz parameter a={a} outside (0,1]")));
    }
    if s == C64::new(1.0, 0.0) {
        return Err(Error::Pole("zeta at s=1".into()));
    }
    let n = em_cutoff(s);
    let mut head = C64::new(0.0, 0.0);
    for j in 0..n {
        head += (-s * (j as f64 + a).ln()).exp();
    }
    Ok(head + em_tail(s, n as f64 + a))
}

/// Riemann zeta(s).
pub fn riemann_zeta(s: C64) -> Result<C64> {
    hurwitz_zeta(s, 1.0)
}

/// L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q).
pub fn dirichlet_l(s: C64, chi: &DirichletCharacter) -> Result<C64> {
    let q = chi.modulus();
    if q == 1 {
        return riemann_zeta(s);
    }
    if s == C64::new(1.0, 0.0) && chi.is_principal() {
        return Err(Error::Pole("principal L at s=1".into()));
    }
    // Sum over n directly up to the cutoff, then one tail per residue class.
    let m = em_cutoff(s);
    let qf = q as f64;
    let mut acc = C64::new(0.0, 0.0);
    for n in 1..(m as u64 * q) {
        let c = chi.value(n);
        if c != C64::new(0.0, 0.0) {
            acc += c * (-s * (n as f64).ln()).exp();
        }
    }
    // The characters sum to zero, so the 1/(s-1) parts of the tails cancel;
    // what remains is sum chi(a) (x_a^{1-s} - 1)/(s-1).
    let qs = (-s * qf.ln()).exp();
    let u = s - 1.0;
    let principal = chi.is_principal();
    for a in 1..=q {
        let c = chi.value(a);
        if c != C64::new(0.0, 0.0) {
            let x = m as f64 + a as f64 / qf;
            let lx = x.ln();
            acc += if principal { c * qs * em_tail(s, x) } else { c * qs * (em_tail_regular(s, x) - lx * expm1_over(-u * lx)) };
        }
    }
    Ok(acc)
}

/// Lambda(s) = pi^{-s/2} Gamma(s/2) zeta(s).
pub fn completed_zeta(s: C64) -> Result<C64> {
    if s == C64::new(0.0, 0.0) || s == C64::new(1.0, 0.0) {
        return Err(Error::Pole(format!("Lambda at {s}")));
    }
    Ok((-s * 0.5 * PI.ln()).exp() * complex_gamma(s * 0.5)? * riemann_zeta(s)?)
}

/// xi(s, chi) = (pi/q)^{-(s+a)/2} Gamma((s+a)/2) L(s, chi).
pub fn completed_l(s: C64, chi: &DirichletCharacter) -> Result<C64> {
    let a = chi.parity() as f64;
    let q = chi.modulus() as f64;
    let u = (s + a) * 0.5;
    Ok((-u * (PI / q).ln()).exp() * complex_gamma(u)? * dirichlet_l(s, chi)?)
}

/// (Lambda(s), xi(s, chi)).
pub fn completed_pair(s: C64, chi: &DirichletCharacter) -> Result<(C64, C64)> {
    Ok((completed_zeta(s)?, completed_l(s, chi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zeta_classical() {
        assert_relative_eq!(riemann_zeta(c(2.0, 0.0)).unwrap().re, PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(riemann_zeta(c(0.0, 0.0)).unwrap().re, -0.5, max_relative = 1e-14);
        assert_relative_eq!(riemann_zeta(c(-1.0, 0.0)).unwrap().re, -1.0 / 12.0, max_relative = 1e-11);
        assert!(matches!(riemann_zeta(c(1.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn hurwitz_half() {
        let v = hurwitz_zeta(c(2.0, 0.0), 0.5).unwrap();
        assert_relative_eq!(v.re, PI * PI / 2.0, max_relative = 1e-14);
        assert!(hurwitz_zeta(c(2.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn em_cutoff_rule() {
        let s = c(0.5, 100.0);
        let n = em_cutoff(s);
        assert!((s + n as f64).norm() > 160.0);
        assert!(n <= 160);
    }

    #[test]
    fn l_at_one() {
        let chi = DirichletCharacter::kronecker(-4).unwrap();
        assert_relative_eq!(dirichlet_l(c(1.0, 0.0), &chi).unwrap().re, PI / 4.0, max_relative = 1e-13);
        let near = dirichlet_l(c(1.0 + 1e-9, 0.0), &chi).unwrap().re;
        assert_relative_eq!(near, PI / 4.0, max_relative = 1e-8);
        let p3 = DirichletCharacter::principal(3);
        let two = dirichlet_l(c(2.0, 0.0), &p3).unwrap().re;
        assert_relative_eq!(two, PI * PI / 6.0 * (1.0 - 1.0 / 9.0), max_relative = 1e-13);
    }
}
