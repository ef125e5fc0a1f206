//! Finite Euler products and the factor functions of the main term:
//! A, B, Z, A′, B′, Z′, Q₁₁/Q₂₂, C₁₁/C₂₂/C₁₂/C₂₁, M, the residue terms
//! R/R′/J, and the leading coefficient c₂ for real characters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, FactoredInt};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::numkernel::{dirichlet_l, riemann_zeta};
use crate::shifts::ShiftTuple;
use crate::C64;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// p^x.
pub fn pw(p: u64, x: C64) -> C64 {
    (x * (p as f64).ln()).exp()
}

/// L(1 - x + y, chi).
pub fn l_xy(x: C64, y: C64, chi: &DirichletCharacter) -> Result<C64> {
    dirichlet_l(one() - x + y, chi)
}

fn primes_of(q: u64) -> Vec<u64> {
    factorize(q).primes().collect()
}

fn check_coprime(h: &FactoredInt, k: &FactoredInt) -> Result<()> {
    if gcd(h.n, k.n) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({},{})", h.n, k.n)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFactorReport {
    pub prime: u64,
    pub closed_form: C64,
    pub series_value: C64,
    pub terms_used: usize,
    pub residual: f64,
}

/// A_{α,β,γ,δ}(s).
pub fn a_factor(sh: &ShiftTuple, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let chib = chi.conj();
    let num = riemann_zeta(one() + a + g + s)?
        * riemann_zeta(one() + b + d + s)?
        * dirichlet_l(one() + b + g + s, chi)?
        * dirichlet_l(one() + a + d + s, &chib)?;
    let den = riemann_zeta(2.0 + sh.sum() + s * 2.0)?;
    Ok(num / den * a_q_product(sh, chi.modulus(), s))
}

fn a_q_product(sh: &ShiftTuple, q: u64, s: C64) -> C64 {
    let mut acc = one();
    for p in primes_of(q) {
        acc *= (one() - pw(p, -(one() + s + sh.beta + sh.delta))) / (one() - pw(p, -(2.0 + s * 2.0 + sh.sum())));
    }
    acc
}

/// Which zeta factor of A carries the pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum APole {
    /// ζ(1+α+γ+s), at s = −α−γ.
    AlphaGamma,
    /// ζ(1+β+δ+s), at s = −β−δ.
    BetaDelta,
}

/// Residue of A(s) at the pole of the chosen zeta factor.
pub fn a_residue(sh: &ShiftTuple, chi: &DirichletCharacter, pole: APole) -> Result<(C64, C64)> {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let chib = chi.conj();
    let (s, other) = match pole {
        APole::AlphaGamma => {
            let s = -(a + g);
            (s, riemann_zeta(one() + b + d + s)?)
        }
        APole::BetaDelta => {
            let s = -(b + d);
            (s, riemann_zeta(one() + a + g + s)?)
        }
    };
    let num = other * dirichlet_l(one() + b + g + s, chi)? * dirichlet_l(one() + a + d + s, &chib)?;
    let den = riemann_zeta(2.0 + sh.sum() + s * 2.0)?;
    Ok((s, num / den * a_q_product(sh, chi.modulus(), s)))
}

/// Local factor of B_{a,b,c,d,n}(s, χ̄₁) at p: the ratio of
/// Σ_j f_{a,b}(p^j,χ₁) f_{c,d}(p^{m+j},χ̄₁) p^{−j(1+s)} to its m = 0 value,
/// in closed form.
fn b_local_closed(sh: &ShiftTuple, p: u64, m: u32, x1: C64, s: C64) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: c, delta: d } = *sh;
    let x2 = x1.conj();
    let ab = x1.norm_sqr();
    let mf = m as f64;
    let b0 = pw(p, -c * (mf + 1.0)) - x2.powu(m + 1) * pw(p, -d * (mf + 1.0));
    let b1 = x2 * pw(p, -c - d) * (pw(p, -a) + x1 * pw(p, -b)) * (pw(p, -c * mf) - x2.powu(m) * pw(p, -d * mf)) * pw(p, -s);
    let b2 = ab * pw(p, -(a + b + c + d)) * (x2 * pw(p, -d - c * mf) - x2.powu(m) * pw(p, -c - d * mf)) * pw(p, -s * 2.0);
    let pf = p as f64;
    let num = b0 - b1 / pf + b2 / (pf * pf);
    let den = (pw(p, -c) - x2 * pw(p, -d)) * (one() - ab * pw(p, -(2.0 + a + b + c + d + s * 2.0)));
    num / den
}

fn f_pp(a: C64, b: C64, p: u64, m: u32, x: C64) -> C64 {
    crate::arith::f_prime_power(a, b, p, m, x)
}

fn series_terms(p: u64, s: C64) -> usize {
    // p^{-j(1+Re s)} below 1e-18 with polynomial headroom.
    let rate = (1.0 + s.re).max(0.05) * (p as f64).ln();
    ((18.0 * 10f64.ln() + 10.0) / rate).ceil() as usize + 4
}

fn b_local_series(sh: &ShiftTuple, p: u64, m: u32, x1: C64, s: C64, terms: usize) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: c, delta: d } = *sh;
    let x2 = x1.conj();
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for j in 0..terms as u32 {
        let w = pw(p, -(one() + s) * j as f64);
        let fa = f_pp(a, b, p, j, x1);
        num += fa * f_pp(c, d, p, m + j, x2) * w;
        den += fa * f_pp(c, d, p, j, x2) * w;
    }
    num / den
}

/// B_{a,b,c,d,n}(s, χ̄₁) as a product over p | n.
fn b_half(sh: &ShiftTuple, n: &FactoredInt, chi1: &DirichletCharacter, s: C64) -> C64 {
    n.factors.iter().map(|&(p, e)| b_local_closed(sh, p, e, chi1.value(p), s)).fold(one(), |x, y| x * y)
}

/// B_{α,β,γ,δ,h,k}(s) = B_{α,β,γ,δ,h}(s,χ̄) B_{γ,δ,α,β,k}(s,χ), closed form.
pub fn b_factor(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    check_coprime(h, k)?;
    Ok(b_half(sh, h, chi, s) * b_half(&sh.exchange(), k, &chi.conj(), s))
}

/// B by truncated series with `terms` per prime (None: chosen from the
/// geometric rate), plus the per-prime report.
pub fn b_factor_series(
    sh: &ShiftTuple,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    s: C64,
    terms: Option<usize>,
) -> Result<(C64, Vec<LocalFactorReport>)> {
    check_coprime(h, k)?;
    let mut acc = one();
    let mut reports = Vec::new();
    let halves = [(*sh, h, chi.clone()), (sh.exchange(), k, chi.conj())];
    for (shx, n, c1) in halves.iter() {
        for &(p, e) in &n.factors {
            let j = terms.unwrap_or_else(|| series_terms(p, s));
            let ser = b_local_series(shx, p, e, c1.value(p), s, j);
            let clo = b_local_closed(shx, p, e, c1.value(p), s);
            acc *= ser;
            reports.push(LocalFactorReport {
                prime: p,
                closed_form: clo,
                series_value: ser,
                terms_used: j,
                residual: (clo - ser).norm(),
            });
        }
    }
    Ok((acc, reports))
}

/// Z = A·B.
pub fn z_factor(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    Ok(a_factor(sh, chi, s)? * b_factor(sh, h, k, chi, s)?)
}

/// Residue of u ↦ Z(u) at the chosen pole.
pub fn z_residue(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, pole: APole) -> Result<C64> {
    let (u, ares) = a_residue(sh, chi, pole)?;
    Ok(ares * b_factor(sh, h, k, chi, u)?)
}

/// A′_{α,β,γ,δ}(s,χ), with L(·,χ²) for χ² taken as a character mod q.
pub fn a_prime_factor(sh: &ShiftTuple, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let num = dirichlet_l(one() + a + g + s, chi)?
        * dirichlet_l(one() + b + d + s, chi)?
        * dirichlet_l(one() + a + d + s, chi)?
        * dirichlet_l(one() + b + g + s, chi)?;
    Ok(num / dirichlet_l(2.0 + sh.sum() + s * 2.0, &chi.square())?)
}

fn bp_local_closed(sh: &ShiftTuple, p: u64, m: u32, x: C64, s: C64) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: c, delta: d } = *sh;
    let mf = m as f64;
    let b0 = pw(p, -c * (mf + 1.0)) - pw(p, -d * (mf + 1.0));
    let b1 = x * pw(p, -c - d) * (pw(p, -a) + pw(p, -b)) * (pw(p, -c * mf) - pw(p, -d * mf)) * pw(p, -s);
    let b2 = x * x * pw(p, -(a + b + c + d)) * (pw(p, -d - c * mf) - pw(p, -c - d * mf)) * pw(p, -s * 2.0);
    let pf = p as f64;
    let num = b0 - b1 / pf + b2 / (pf * pf);
    let den = (pw(p, -c) - pw(p, -d)) * (one() - x * x * pw(p, -(2.0 + a + b + c + d + s * 2.0)));
    num / den
}

fn bp_local_series(sh: &ShiftTuple, p: u64, m: u32, x: C64, s: C64, terms: usize) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: c, delta: d } = *sh;
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for j in 0..terms as u32 {
        let w = x.powu(j) * pw(p, -(one() + s) * j as f64);
        let sa = f_pp(a, b, p, j, one());
        num += sa * f_pp(c, d, p, m + j, one()) * w;
        den += sa * f_pp(c, d, p, j, one()) * w;
    }
    num / den
}

/// B′_{α,β,γ,δ,h,k}(s,χ) = B′_{α,β,γ,δ,h}(s,χ) B′_{γ,δ,α,β,k}(s,χ), closed form.
pub fn b_prime_factor(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    check_coprime(h, k)?;
    let ex = sh.exchange();
    let mut acc = one();
    for &(p, e) in &h.factors {
        acc *= bp_local_closed(sh, p, e, chi.value(p), s);
    }
    for &(p, e) in &k.factors {
        acc *= bp_local_closed(&ex, p, e, chi.value(p), s);
    }
    Ok(acc)
}

/// B′ by truncated series, with per-prime reports.
pub fn b_prime_factor_series(
    sh: &ShiftTuple,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    s: C64,
    terms: Option<usize>,
) -> Result<(C64, Vec<LocalFactorReport>)> {
    check_coprime(h, k)?;
    let mut acc = one();
    let mut reports = Vec::new();
    for (shx, n) in [(*sh, h), (sh.exchange(), k)] {
        for &(p, e) in &n.factors {
            let j = terms.unwrap_or_else(|| series_terms(p, s));
            let ser = bp_local_series(&shx, p, e, chi.value(p), s, j);
            let clo = bp_local_closed(&shx, p, e, chi.value(p), s);
            acc *= ser;
            reports.push(LocalFactorReport {
                prime: p,
                closed_form: clo,
                series_value: ser,
                terms_used: j,
                residual: (clo - ser).norm(),
            });
        }
    }
    Ok((acc, reports))
}

/// Z′ = conj(G(χ)) A′ B′.
pub fn z_prime_factor(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, s: C64) -> Result<C64> {
    Ok(chi.gauss_sum().conj() * a_prime_factor(sh, chi, s)? * b_prime_factor(sh, h, k, chi, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QKind {
    Q11,
    Q22,
}

/// Q₁₁(s) = Π_{p|q} (1 − p^{−1−β−δ−2s}) / (1 − p^{−2+α−β+γ−δ}); Q₂₂(s) = Q₁₁ at (−γ,−δ,−α,−β), −s.
pub fn q_factor(which: QKind, sh: &ShiftTuple, q: u64, s: C64) -> C64 {
    let (sh, s) = match which {
        QKind::Q11 => (*sh, s),
        QKind::Q22 => (sh.swap(), -s),
    };
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = sh;
    let mut acc = one();
    for p in primes_of(q) {
        acc *= (one() - pw(p, -(one() + b + d + s * 2.0))) / (one() - pw(p, -2.0 + a - b + g - d));
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CKind {
    C11,
    C22,
    C12,
    C21,
}

/// Local factor of C₁₁_{α,β,γ,δ,h}(s, ψ) at p, with x = ψ(p).
fn c11_local(sh: &ShiftTuple, p: u64, m: u32, x: C64, s: C64) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let mf = m as f64;
    let e = a + d + s * 2.0;
    let ph = x.powu(m) * pw(p, -e * mf);
    let c0 = one() - x.powu(m + 1) * pw(p, -e * (mf + 1.0));
    let c1 = (x * pw(p, g - d) + pw(p, -b - d - s * 2.0)) * (one() - ph);
    let c2 = x * pw(p, -b + g - d * 2.0 - s * 2.0) - ph * pw(p, a - b + g - d);
    let pf = p as f64;
    (c0 - c1 / pf + c2 / (pf * pf)) / ((one() - x * pw(p, -e)) * (one() - pw(p, -2.0 + a - b + g - d)))
}

/// Local factor of C₂₂_{α,β,γ,δ,h}(s, ψ) at p, with x = ψ(p).
fn c22_local(sh: &ShiftTuple, p: u64, m: u32, x: C64, s: C64) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let mf = m as f64;
    let e = b + g + s * 2.0;
    let ph = pw(p, -e * mf);
    let c0 = ph - x.powu(m + 1) * pw(p, e);
    let c1 = (ph - x.powu(m)) * (pw(p, b + d + s * 2.0) + x * pw(p, -a + b));
    let c2 = ph * x * pw(p, -a + b * 2.0 + d + s * 2.0) - x.powu(m) * pw(p, -a + b - g + d);
    let pf = p as f64;
    (c0 - c1 / pf + c2 / (pf * pf)) / ((one() - x * pw(p, e)) * (one() - pw(p, -2.0 - a + b - g + d)))
}

/// Local factor of C₁₂_{α,β,γ,δ,h}(s) at p, with x = χ(p).
fn c12_local(sh: &ShiftTuple, p: u64, m: u32, x: C64, s: C64) -> C64 {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let mf = m as f64;
    let e = a + g + s * 2.0;
    let c0 = one() - pw(p, -e * (mf + 1.0));
    let c1 = x * (pw(p, d - g) + pw(p, -b - g - s * 2.0)) * (one() - pw(p, -e * mf));
    let c2 = x * x * pw(p, d - b) * (pw(p, -(g + s) * 2.0) - pw(p, (a + s) * 2.0) * pw(p, -e * (mf + 1.0)));
    let pf = p as f64;
    (c0 - c1 / pf + c2 / (pf * pf)) / ((one() - pw(p, -e)) * (one() - x * x * pw(p, -2.0 + a - b - g + d)))
}

fn prod_nq<F: Fn(u64, u32) -> C64>(n: &FactoredInt, q: u64, f: F) -> C64 {
    n.factors.iter().filter(|&&(p, _)| q % p != 0).map(|&(p, e)| f(p, e)).fold(one(), |x, y| x * y)
}

/// The C-factors of the four U-sums.
pub fn c_factor(
    which: CKind,
    sh: &ShiftTuple,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    s: C64,
) -> Result<C64> {
    check_coprime(h, k)?;
    let q = chi.modulus();
    let ex = sh.exchange();
    Ok(match which {
        CKind::C11 => {
            let chib = chi.conj();
            prod_nq(h, q, |p, e| c11_local(sh, p, e, chib.value(p), s))
                * prod_nq(k, q, |p, e| c11_local(&ex, p, e, chi.value(p), s))
        }
        CKind::C22 => {
            let chib = chi.conj();
            let hq = h.q_split(q).q_part;
            let kq = k.q_split(q).q_part;
            pw(hq, -(sh.beta + sh.gamma + s * 2.0))
                * pw(kq, -(sh.alpha + sh.delta + s * 2.0))
                * prod_nq(h, q, |p, e| c22_local(sh, p, e, chib.value(p), s))
                * prod_nq(k, q, |p, e| c22_local(&ex, p, e, chi.value(p), s))
        }
        CKind::C12 => {
            let rev = ShiftTuple::new(sh.delta, sh.gamma, sh.beta, sh.alpha);
            prod_nq(h, q, |p, e| c12_local(sh, p, e, chi.value(p), s))
                * prod_nq(k, q, |p, e| c12_local(&rev, p, e, chi.value(p), s))
        }
        CKind::C21 => c_factor(CKind::C12, &sh.exchange(), k, h, &chi.conj(), s)?,
    })
}

/// M_{α,γ,h}(s) = Σ_{m | h(q)/q} m^{−α−γ−2s}; q must divide h.
pub fn m_sum(alpha: C64, gamma: C64, h: &FactoredInt, q: u64, s: C64) -> Result<C64> {
    if h.n % q != 0 {
        return Err(Error::Precondition(format!("q={q} does not divide h={}", h.n)));
    }
    let hq = h.q_split(q).q_part / q;
    Ok(factorize(hq).divisors().into_iter().map(|m| pw(m, -(alpha + gamma + s * 2.0))).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Identity {
    C11Fe,
    C11FePerm,
    C12Fe,
    C21Fe,
    BridgeLem1,
    BridgeLem1Perm,
    Bridge912H,
    Bridge912K,
}

impl Identity {
    pub const ALL: [Identity; 8] = [
        Identity::C11Fe,
        Identity::C11FePerm,
        Identity::C12Fe,
        Identity::C21Fe,
        Identity::BridgeLem1,
        Identity::BridgeLem1Perm,
        Identity::Bridge912H,
        Identity::Bridge912K,
    ];

    /// Whether the identity applies to (h, k) for modulus q.
    pub fn applies(&self, h: u64, k: u64, q: u64) -> bool {
        match self {
            Identity::C12Fe | Identity::Bridge912H => h % q == 0,
            Identity::C21Fe | Identity::Bridge912K => k % q == 0,
            _ => true,
        }
    }
}

/// Both sides of a named identity.
pub fn functional_identity_sides(
    which: Identity,
    sh: &ShiftTuple,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    s: C64,
) -> Result<(C64, C64)> {
    check_coprime(h, k)?;
    let q = chi.modulus();
    if !which.applies(h.n, k.n, q) {
        return Err(Error::Precondition(format!("{which:?} needs q | h or q | k (q={q}, h={}, k={})", h.n, k.n)));
    }
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let (hh, kk) = (h.n, k.n);
    let hk = hh * kk;
    let sw = sh.swap();
    let zero = C64::new(0.0, 0.0);
    let qq = |x: C64| pw(q, -x);
    Ok(match which {
        Identity::C11Fe => (
            pw(hh, a) * pw(kk, g) * pw(hk, -s) * c_factor(CKind::C11, sh, h, k, chi, -s)?,
            pw(hh, -d) * pw(kk, -b) * pw(hk, s) * c_factor(CKind::C22, &sw, h, k, chi, s)?,
        ),
        Identity::C11FePerm => (
            pw(hh, b) * pw(kk, d) * pw(hk, -s) * c_factor(CKind::C22, sh, h, k, chi, -s)?,
            pw(hh, -g) * pw(kk, -a) * pw(hk, s) * c_factor(CKind::C11, &sw, h, k, chi, s)?,
        ),
        Identity::C12Fe => (
            qq(a + d - s)
                * m_sum(a, g, h, q, -s)?
                * pw(hh, a)
                * pw(kk, d)
                * pw(hk, -s)
                * c_factor(CKind::C12, sh, h, k, chi, -s)?,
            qq(b + d)
                * qq(-b - g + s)
                * m_sum(-g, -a, h, q, s)?
                * pw(hh, -g)
                * pw(kk, -b)
                * pw(hk, s)
                * c_factor(CKind::C12, &sw, h, k, chi, s)?,
        ),
        Identity::C21Fe => (
            qq(b + g - s)
                * m_sum(a, g, k, q, -s)?
                * pw(hh, b)
                * pw(kk, g)
                * pw(hk, -s)
                * c_factor(CKind::C21, sh, h, k, chi, -s)?,
            qq(b + d)
                * qq(-a - d + s)
                * m_sum(-g, -a, k, q, s)?
                * pw(hh, -d)
                * pw(kk, -a)
                * pw(hk, s)
                * c_factor(CKind::C21, &sw, h, k, chi, s)?,
        ),
        Identity::BridgeLem1 => {
            (pw(hh, a) * pw(kk, g) * c_factor(CKind::C11, sh, h, k, chi, zero)?, b_factor(&sh.swap_ag(), h, k, chi, zero)?)
        }
        Identity::BridgeLem1Perm => {
            (pw(hh, b) * pw(kk, d) * c_factor(CKind::C22, sh, h, k, chi, zero)?, b_factor(&sh.swap_bd(), h, k, chi, zero)?)
        }
        Identity::Bridge912H => (
            qq(a) * m_sum(a, g, h, q, zero)? * pw(hh, a) * pw(kk, d) * c_factor(CKind::C12, sh, h, k, chi, zero)?,
            b_prime_factor(&sh.swap_ad(), &factorize(hh / q), k, chi, zero)?,
        ),
        Identity::Bridge912K => (
            qq(g) * m_sum(a, g, k, q, zero)? * pw(hh, b) * pw(kk, g) * c_factor(CKind::C21, sh, h, k, chi, zero)?,
            b_prime_factor(&sh.swap_bg(), h, &factorize(kk / q), &chi.conj(), zero)?,
        ),
    })
}

/// |LHS − RHS| of a named identity.
pub fn functional_identity_residual(
    which: Identity,
    sh: &ShiftTuple,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    s: C64,
) -> Result<f64> {
    let (l, r) = functional_identity_sides(which, sh, h, k, chi, s)?;
    Ok((l - r).norm())
}

/// δ(m) of the leading coefficient for a real character.
pub fn leading_delta(m: &FactoredInt, chi_d: &DirichletCharacter) -> f64 {
    let mut acc = 1.0;
    for &(p, e) in &m.factors {
        let x = chi_d.value(p).re.round() as i32;
        match x {
            -1 if e % 2 == 1 => return 0.0,
            1 => {
                let pf = p as f64;
                acc *= 1.0 + e as f64 * (1.0 - 1.0 / pf) / (1.0 + 1.0 / pf);
            }
            _ => {}
        }
    }
    acc
}

/// c₂(h,k) = (6/π²) L(1,χ)² Π_{p|D}(1+1/p)^{−1} δ(h_{(k)}) δ(k_{(h)}).
pub fn leading_c2(h: &FactoredInt, k: &FactoredInt, chi_d: &DirichletCharacter) -> Result<f64> {
    if !chi_d.is_real() {
        return Err(Error::Precondition("c2 needs a real character".into()));
    }
    let l1 = dirichlet_l(one(), chi_d)?.re;
    let ram: f64 = primes_of(chi_d.modulus()).into_iter().map(|p| 1.0 / (1.0 + 1.0 / p as f64)).product();
    let g = gcd(h.n, k.n);
    let hk = factorize(h.n / g);
    let kh = factorize(k.n / g);
    Ok(6.0 / (PI * PI) * l1 * l1 * ram * leading_delta(&hk, chi_d) * leading_delta(&kh, chi_d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh() -> ShiftTuple {
        ShiftTuple::new(C64::new(0.01, 0.003), C64::new(0.02, -0.004), C64::new(0.03, 0.002), C64::new(0.05, 0.001))
    }

    #[test]
    fn b_trivial_and_series() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        let one_f = FactoredInt::one();
        assert_eq!(b_factor(&sh(), &one_f, &one_f, &chi, C64::new(0.0, 0.0)).unwrap(), one());
        let (ser, rep) = b_factor_series(&sh(), &factorize(2), &one_f, &chi, C64::new(0.0, 0.0), Some(60)).unwrap();
        let clo = b_factor(&sh(), &factorize(2), &one_f, &chi, C64::new(0.0, 0.0)).unwrap();
        assert!((ser - clo).norm() < 1e-12 * clo.norm(), "{ser} {clo}");
        assert_eq!(rep.len(), 1);
    }

    #[test]
    fn b_prime_series() {
        let chi = DirichletCharacter::kronecker(5).unwrap();
        let s = C64::new(0.0, 0.0);
        let (ser, _) = b_prime_factor_series(&sh(), &factorize(8), &factorize(3), &chi, s, Some(60)).unwrap();
        let clo = b_prime_factor(&sh(), &factorize(8), &factorize(3), &chi, s).unwrap();
        assert!((ser - clo).norm() < 1e-12 * clo.norm(), "{ser} {clo}");
    }

    #[test]
    fn q_and_m() {
        assert_eq!(q_factor(QKind::Q11, &sh(), 1, C64::new(0.2, 0.0)), one());
        let m = m_sum(C64::new(0.02, 0.0), C64::new(0.01, 0.0), &factorize(9), 3, C64::new(0.1, 0.0)).unwrap();
        assert!((m - (one() + pw(3, C64::new(-0.23, 0.0)))).norm() < 1e-14);
        assert!(m_sum(one(), one(), &factorize(4), 3, one()).is_err());
    }

    #[test]
    fn delta_and_c2() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert_eq!(leading_delta(&FactoredInt::one(), &chi), 1.0);
        assert_eq!(leading_delta(&factorize(2), &chi), 0.0);
        assert_eq!(leading_delta(&factorize(4), &chi), 1.0);
        assert!((leading_delta(&factorize(7), &chi) - 1.75).abs() < 1e-14);
        let chi4 = DirichletCharacter::kronecker(-4).unwrap();
        let c2 = leading_c2(&FactoredInt::one(), &FactoredInt::one(), &chi4).unwrap();
        assert!((c2 - 0.25).abs() < 1e-10, "{c2}");
    }
}

#[cfg(test)]
mod identity_tests {
    use super::*;
    use crate::characters::quartic_mod5;

    fn sh() -> ShiftTuple {
        ShiftTuple::new(C64::new(0.013, 0.004), C64::new(0.021, -0.006), C64::new(0.034, 0.002), C64::new(0.047, 0.003))
    }

    fn run(chi: &DirichletCharacter, pairs: &[(u64, u64)]) {
        let s = C64::new(0.11, 0.07);
        for &(h, k) in pairs {
            let (hf, kf) = (factorize(h), factorize(k));
            for id in Identity::ALL {
                if !id.applies(h, k, chi.modulus()) {
                    continue;
                }
                let (l, r) = functional_identity_sides(id, &sh(), &hf, &kf, chi, s).unwrap();
                assert!((l - r).norm() < 1e-11 * l.norm().max(1.0), "{id:?} h={h} k={k}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn identities_real() {
        run(&DirichletCharacter::kronecker(-3).unwrap(), &[(1, 1), (2, 5), (12, 7), (9, 4), (4, 9), (27, 10), (5, 18)]);
    }

    #[test]
    fn identities_complex() {
        run(&quartic_mod5(), &[(1, 1), (2, 3), (10, 3), (25, 6), (7, 50), (4, 75)]);
    }
}
