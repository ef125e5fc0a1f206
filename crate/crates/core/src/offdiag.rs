//! The arithmetical sums S_ij(h,k,r) and U_ij(s) = Σ_r S_ij(h,k,r) r^{−a_i−b_j−2s}:
//! brute-force evaluation with certified truncation tails, and the closed forms.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{classify_pij, factorize, gcd, smallest_prime_factors, twisted_ramanujan, FactoredInt};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::eulerprod::{c_factor, l_xy, m_sum, pw, q_factor, CKind, QKind};
use crate::numkernel::{dirichlet_l, riemann_zeta};
use crate::shifts::ShiftTuple;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumTruncation {
    pub r_max: u64,
    pub d_max: u64,
    /// Filled in by the evaluators.
    pub tail_bound: f64,
}

impl SumTruncation {
    pub fn new(r_max: u64, d_max: u64) -> Self {
        SumTruncation { r_max, d_max, tail_bound: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumValue {
    pub value: C64,
    pub tail_bound: f64,
    pub r_tail: f64,
    pub d_tail: f64,
    pub terms: u64,
}

/// Which character twists the Ramanujan sum in S_ij.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Twist {
    None,
    Chi,
    ChiBar,
}

/// Static data of one of the four sums.
struct Pair {
    i: u8,
    j: u8,
    /// a_i + b_j.
    ab: C64,
    /// Exponents of d_(h) and d_(k).
    x: C64,
    y: C64,
    prefactor: C64,
    twist: Twist,
}

fn check_ij(i: u8, j: u8) -> Result<()> {
    if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
        return Err(Error::Precondition(format!("(i,j)=({i},{j}) must lie in {{1,2}}²")));
    }
    Ok(())
}

fn pair(i: u8, j: u8, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<Pair> {
    check_ij(i, j)?;
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let q = chi.modulus();
    let chib = chi.conj();
    let one = C64::new(1.0, 0.0);
    Ok(match (i, j) {
        (1, 1) => Pair {
            i,
            j,
            ab: a + g,
            x: one - a + b,
            y: one - g + d,
            prefactor: l_xy(a, b, chi)? * l_xy(g, d, &chib)?,
            twist: Twist::None,
        },
        (1, 2) => Pair {
            i,
            j,
            ab: a + d,
            x: one - a + b,
            y: one + g - d,
            prefactor: chi.value_i(-1) * chib.gauss_sum() * l_xy(a, b, chi)? * l_xy(-g, -d, chi)? * pw(q, g - d),
            twist: Twist::Chi,
        },
        (2, 1) => Pair {
            i,
            j,
            ab: b + g,
            x: one + a - b,
            y: one - g + d,
            prefactor: chi.gauss_sum() * l_xy(-a, -b, &chib)? * l_xy(g, d, &chib)? * pw(q, a - b),
            twist: Twist::ChiBar,
        },
        _ => Pair {
            i,
            j,
            ab: b + d,
            x: one + a - b,
            y: one + g - d,
            prefactor: l_xy(-a, -b, &chib)? * l_xy(-g, -d, chi)? * pw(q, one - b + a - d + g),
            twist: Twist::None,
        },
    })
}

impl Pair {
    /// Character factor times d_(h)^{−x} d_(k)^{−y}.
    fn weight(&self, d: u64, h: u64, k: u64, chi: &DirichletCharacter) -> C64 {
        let dh = d / gcd(d, h);
        let dk = d / gcd(d, k);
        let hd = h / gcd(h, d);
        let kd = k / gcd(k, d);
        let chib = || chi.conj();
        let ch = match (self.i, self.j) {
            (1, 1) => chi.value(dh) * chi.value(dk).conj(),
            (1, 2) => chi.value(dh) * chi.value(kd),
            (2, 1) => chib().value(hd) * chib().value(dk),
            _ => chi.value(hd).conj() * chi.value(kd),
        };
        if ch == C64::new(0.0, 0.0) {
            return ch;
        }
        ch * pw(dh, -self.x) * pw(dk, -self.y)
    }

    fn psi(&self, chi: &DirichletCharacter) -> Option<DirichletCharacter> {
        match self.twist {
            Twist::None => None,
            Twist::Chi => Some(chi.clone()),
            Twist::ChiBar => Some(chi.conj()),
        }
    }

    /// Σ_{d > D, ab | d} bound of |weight(d)|, from (h,d)^x (k,d)^y ≤ Σ_{a|h, b|k} a^x b^y.
    fn d_tail_weight(&self, h: u64, k: u64, dmax: u64) -> f64 {
        let (xr, yr) = (self.x.re, self.y.re);
        let rho = xr + yr;
        let mut acc = 0.0;
        for a in factorize(h).divisors() {
            for b in factorize(k).divisors() {
                let m = (a * b) as f64;
                acc += (a as f64).powf(xr) * (b as f64).powf(yr) * m.powf(-rho) * zeta_tail(rho, dmax as f64 / m);
            }
        }
        acc
    }
}

/// Σ_{n > x} n^{−σ} bound, σ > 1.
fn zeta_tail(sigma: f64, x: f64) -> f64 {
    let n = x.floor();
    if n < 1.0 {
        // 1 + ∫_1^∞
        return 1.0 + 1.0 / (sigma - 1.0);
    }
    n.powf(1.0 - sigma) / (sigma - 1.0)
}

fn q_part(d: u64, q: u64) -> u64 {
    let mut out = 1;
    let mut rest = d;
    for p in factorize(q).primes() {
        while rest % p == 0 {
            rest /= p;
            out *= p;
        }
    }
    out
}

fn primes_from_spf(mut n: u64, spf: &[u32]) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 1 {
        let p = spf[n as usize] as u64;
        out.push(p);
        while n % p == 0 {
            n /= p;
        }
    }
    out
}

fn divisors_from_spf(n: u64, spf: &[u32]) -> Vec<u64> {
    let mut divs = vec![1u64];
    let mut m = n;
    while m > 1 {
        let p = spf[m as usize] as u64;
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs
}

fn euler_phi_spf(n: u64, spf: &[u32]) -> u64 {
    let mut out = n;
    for p in primes_from_spf(n, spf) {
        out = out / p * (p - 1);
    }
    out
}

/// S_ij(h, k, r) with the d-sum truncated at trunc.d_max; c_d(r, ψ) by direct summation.
pub fn s_ij_sum(
    i: u8,
    j: u8,
    h: &FactoredInt,
    k: &FactoredInt,
    r: i64,
    chi: &DirichletCharacter,
    sh: &ShiftTuple,
    trunc: &SumTruncation,
) -> Result<SumValue> {
    if r == 0 {
        return Err(Error::Precondition("r must be nonzero".into()));
    }
    let q = chi.modulus();
    if gcd(h.n, k.n) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({},{})", h.n, k.n)));
    }
    if (i, j) == (1, 2) && h.n % q != 0 || (i, j) == (2, 1) && k.n % q != 0 {
        return Err(Error::Precondition(format!("P_{i}{j} is empty for q={q}, h={}, k={}", h.n, k.n)));
    }
    let pr = pair(i, j, sh, chi)?;
    let psi = pr.psi(chi).unwrap_or_else(|| DirichletCharacter::principal(q));
    let mut acc = C64::new(0.0, 0.0);
    let mut terms = 0;
    for d in 1..=trunc.d_max {
        if classify_pij(d, h.n, k.n, q)? != (i, j) {
            continue;
        }
        let c = if pr.twist == Twist::None {
            C64::new(crate::arith::ramanujan_sum_mobius(d, r) as f64, 0.0)
        } else {
            twisted_ramanujan(d, r, &psi)
        };
        acc += c * pr.weight(d, h.n, k.n, chi);
        terms += 1;
    }
    // |c_d(r, ψ)| ≤ φ-free bound √q (r, d) ≤ √q |r|.
    let cmax = if pr.twist == Twist::None { 1.0 } else { (q as f64).sqrt() } * r.unsigned_abs() as f64;
    let d_tail = pr.prefactor.norm() * cmax * pr.d_tail_weight(h.n, k.n, trunc.d_max);
    Ok(SumValue { value: pr.prefactor * acc, tail_bound: d_tail, r_tail: 0.0, d_tail, terms })
}

/// U_ij(s) by brute force: the truncated double sum Σ_{d ≤ D, d ∈ P_ij} Σ_{r ≤ R}.
///
/// c_d(r, ψ) is split by CRT into ψ(d*) c_{d(q)}(r, ψ) c_{d*}(r), and the
/// Ramanujan factor is opened as Σ_{e | (d*, r)} e μ(d*/e); this regroups the
/// same finite double sum so that D can be large.
pub fn u_ij_brute(
    i: u8,
    j: u8,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    sh: &ShiftTuple,
    s: C64,
    trunc: &SumTruncation,
) -> Result<SumValue> {
    let q = chi.modulus();
    if gcd(h.n, k.n) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({},{})", h.n, k.n)));
    }
    let pr = pair(i, j, sh, chi)?;
    let w = pr.ab + s * 2.0;
    let sigma = w.re;
    if sigma < 2.2 || pr.x.re + pr.y.re < 1.3 {
        return Err(Error::Domain(format!("U_{i}{j} brute sum needs Re(a_i+b_j+2s) >= 2.2, got {sigma}")));
    }
    if (i, j) == (1, 2) && h.n % q != 0 || (i, j) == (2, 1) && k.n % q != 0 {
        return Ok(SumValue { value: C64::new(0.0, 0.0), tail_bound: 0.0, r_tail: 0.0, d_tail: 0.0, terms: 0 });
    }
    let (rmax, dmax) = (trunc.r_max as usize, trunc.d_max as usize);
    let spf = smallest_prime_factors(dmax.max(rmax).max(2));
    let mut rpow = vec![C64::new(0.0, 0.0); rmax + 1];
    for (r, v) in rpow.iter_mut().enumerate().skip(1) {
        *v = (-w * (r as f64).ln()).exp();
    }
    let psi = pr.psi(chi);
    // H(e) = Σ_{r ≤ R, e | r} r^{−w}
    let mut hvec = vec![C64::new(0.0, 0.0); if psi.is_none() { rmax + 1 } else { 0 }];
    for (e, h) in hvec.iter_mut().enumerate().skip(1) {
        *h = rpow.iter().skip(e).step_by(e).sum();
    }
    // Per q-part d1: table of c_{d1}(j, ψ), j mod d1, and K_{d1}(e) = Σ_{r ≤ R, e | r} c_{d1}(r, ψ) r^{−w}.
    struct QPart {
        table: Vec<C64>,
        max_abs: f64,
        k_cache: HashMap<u64, C64>,
    }
    let mut parts: HashMap<u64, QPart> = HashMap::new();
    let kval = |part: &mut QPart, d1: u64, e: u64| -> C64 {
        if let Some(v) = part.k_cache.get(&e) {
            return *v;
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut r = e;
        while r as usize <= rmax {
            acc += part.table[(r % d1) as usize] * rpow[r as usize];
            r += e;
        }
        part.k_cache.insert(e, acc);
        acc
    };
    let mut acc = C64::new(0.0, 0.0);
    let mut r_tail = 0.0;
    let mut terms = 0u64;
    let mut max_c1: f64 = 1.0;
    for d in 1..=dmax as u64 {
        if classify_pij(d, h.n, k.n, q)? != (i, j) {
            continue;
        }
        let wt = pr.weight(d, h.n, k.n, chi);
        terms += 1;
        // Untwisted: split nothing; twisted: d = d1 · l with d1 = d(q).
        let (d1, l) = match &psi {
            None => (1, d),
            Some(_) => {
                let d1 = q_part(d, q);
                (d1, d / d1)
            }
        };
        let primes = primes_from_spf(l, &spf);
        let mut inner = C64::new(0.0, 0.0);
        let (c1max, twist_l) = match &psi {
            None => (1.0, C64::new(1.0, 0.0)),
            Some(p) => {
                let part = parts.entry(d1).or_insert_with(|| {
                    let table: Vec<C64> = (0..d1).map(|jj| twisted_ramanujan(d1, jj as i64, p)).collect();
                    let max_abs = table.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    QPart { table, max_abs, k_cache: HashMap::new() }
                });
                (part.max_abs, p.value(l))
            }
        };
        max_c1 = max_c1.max(c1max);
        if wt != C64::new(0.0, 0.0) && twist_l != C64::new(0.0, 0.0) {
            // e = l / t over squarefree t | rad(l).
            for mask in 0u32..(1 << primes.len()) {
                let mut t = 1u64;
                for (b, p) in primes.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        t *= p;
                    }
                }
                let e = l / t;
                if e as usize > rmax {
                    continue;
                }
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let kv = match &psi {
                    None => hvec[e as usize],
                    Some(_) => {
                        let part = parts.get_mut(&d1).expect("q-part table");
                        kval(part, d1, e)
                    }
                };
                inner += kv * (sign * e as f64);
            }
            acc += wt * twist_l * inner;
        }
        // r-tail: |c_d(r,ψ)| ≤ max|c_{d1}| (r, l) and Σ_{r>R} (r,l) r^{−σ} ≤ Σ_{e|l} φ(e) e^{−σ} Σ_{n > R/e} n^{−σ}.
        let wn = wt.norm();
        if wn > 0.0 {
            let mut tl = 0.0;
            for e in divisors_from_spf(l, &spf) {
                let ef = e as f64;
                tl += euler_phi_spf(e, &spf) as f64 * ef.powf(-sigma) * zeta_tail(sigma, rmax as f64 / ef);
            }
            r_tail += wn * c1max * tl;
        }
    }
    let pn = pr.prefactor.norm();
    // d-tail: Σ_r (r,l) r^{−σ} = ζ(σ) Σ_{e|l} φ(e) e^{−σ} ≤ ζ(σ) ζ(σ−1).
    let zs = riemann_zeta(C64::new(sigma, 0.0))?.re * riemann_zeta(C64::new(sigma - 1.0, 0.0))?.re;
    let max_c1 = match &psi {
        None => 1.0,
        Some(p) => {
            // every admissible d(q) divides q h(q) k(q); bound by the largest table seen or the direct maximum
            let big = q * q_part(h.n, q) * q_part(k.n, q);
            let direct = factorize(big)
                .divisors()
                .into_iter()
                .filter(|d1| d1 % q == 0)
                .map(|d1| (0..d1).map(|jj| twisted_ramanujan(d1, jj as i64, p).norm()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            direct.max(max_c1)
        }
    };
    let d_tail = pn * max_c1 * zs * pr.d_tail_weight(h.n, k.n, trunc.d_max);
    let r_tail = pn * r_tail;
    Ok(SumValue { value: pr.prefactor * acc, tail_bound: r_tail + d_tail, r_tail, d_tail, terms })
}

/// How the U₁₂ closed form is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum U12Form {
    /// With the factor χ(−1) that G(χ̄)·conj(G(χ̄)) = χ(−1) q produces.
    Parity,
    /// Without χ(−1); agrees only for even χ.
    NoParity,
}

fn zeta(s: C64) -> Result<C64> {
    riemann_zeta(s)
}

fn u12_closed(h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, sh: &ShiftTuple, s: C64, form: U12Form) -> Result<C64> {
    let q = chi.modulus();
    if h.n % q != 0 {
        return Err(Error::Precondition(format!("U_12 needs q | h (q={q}, h={})", h.n)));
    }
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let one = C64::new(1.0, 0.0);
    let chib = chi.conj();
    let ll = l_xy(a, b, chi)? * l_xy(-g, -d, chi)?;
    let lq = dirichlet_l(a + d + s * 2.0, &chib)? * dirichlet_l(one + b + g + s * 2.0, chi)?
        / dirichlet_l(2.0 - a + b + g - d, &chi.square())?;
    let parity = match form {
        U12Form::Parity => chi.value_i(-1),
        U12Form::NoParity => one,
    };
    Ok(parity * ll * chi.value(k.n) * lq * m_sum(a, g, h, q, s)? * c_factor(CKind::C12, sh, h, k, chi, s)?)
}

/// U_ij(s) in closed form. U₂₁ is obtained from U₁₂ by exchanging (α,β,h) with (γ,δ,k) and χ with χ̄.
pub fn u_ij_closed(
    i: u8,
    j: u8,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    sh: &ShiftTuple,
    s: C64,
) -> Result<C64> {
    u_ij_closed_with(i, j, h, k, chi, sh, s, U12Form::Parity)
}

/// u_ij_closed with an explicit U₁₂ normalisation.
#[allow(clippy::too_many_arguments)]
pub fn u_ij_closed_with(
    i: u8,
    j: u8,
    h: &FactoredInt,
    k: &FactoredInt,
    chi: &DirichletCharacter,
    sh: &ShiftTuple,
    s: C64,
    form: U12Form,
) -> Result<C64> {
    check_ij(i, j)?;
    if gcd(h.n, k.n) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({},{})", h.n, k.n)));
    }
    let q = chi.modulus();
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let one = C64::new(1.0, 0.0);
    let chib = chi.conj();
    match (i, j) {
        (1, 1) => Ok(l_xy(a, b, chi)? * l_xy(g, d, &chib)? * zeta(a + g + s * 2.0)? * zeta(one + b + d + s * 2.0)?
            / zeta(2.0 - a + b - g + d)?
            * q_factor(QKind::Q11, sh, q, s)
            * c_factor(CKind::C11, sh, h, k, chi, s)?),
        (2, 2) => Ok(l_xy(-a, -b, &chib)?
            * l_xy(-g, -d, chi)?
            * pw(q, -(b + d + s * 2.0))
            * zeta(b + d + s * 2.0)?
            * zeta(one + a + g + s * 2.0)?
            / zeta(2.0 + a - b + g - d)?
            * q_factor(QKind::Q22, sh, q, s)
            * c_factor(CKind::C22, sh, h, k, chi, s)?),
        (1, 2) => u12_closed(h, k, chi, sh, s, form),
        _ => {
            if k.n % q != 0 {
                return Err(Error::Precondition(format!("U_21 needs q | k (q={q}, k={})", k.n)));
            }
            Ok(chi.value_i(-1) * u12_closed(k, h, &chib, &sh.exchange(), s, form)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh() -> ShiftTuple {
        ShiftTuple::new(C64::new(0.013, 0.004), C64::new(0.021, -0.006), C64::new(0.034, 0.002), C64::new(0.047, 0.003))
    }

    #[test]
    fn empty_sets() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        let t = SumTruncation::new(100, 100);
        assert!(s_ij_sum(1, 2, &factorize(2), &factorize(1), 1, &chi, &sh(), &t).is_err());
        let v = u_ij_brute(2, 1, &factorize(2), &factorize(1), &chi, &sh(), C64::new(1.5, 0.0), &t).unwrap();
        assert_eq!(v.value, C64::new(0.0, 0.0));
    }

    #[test]
    fn brute_matches_closed_small() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        let s = C64::new(1.5, 0.2);
        let t = SumTruncation::new(20_000, 200_000);
        for &(i, j, h, k) in &[(1u8, 1u8, 1u64, 1u64), (2, 2, 2, 3), (1, 2, 3, 2), (2, 1, 2, 3)] {
            let (hf, kf) = (factorize(h), factorize(k));
            let b = u_ij_brute(i, j, &hf, &kf, &chi, &sh(), s, &t).unwrap();
            let c = u_ij_closed(i, j, &hf, &kf, &chi, &sh(), s).unwrap();
            let tol = (10.0 * b.tail_bound).max(1e-5);
            assert!((b.value - c).norm() <= tol, "U{i}{j} h={h} k={k}: brute {} closed {c} tail {}", b.value, b.tail_bound);
        }
    }
}
