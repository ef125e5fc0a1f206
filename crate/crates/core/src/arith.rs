//! Integer structure and the finite arithmetical sums: shifted divisor sums,
//! twisted sigma sums, Ramanujan, Kloosterman and Salié-type sums, and the
//! P_ij classification of moduli.

use serde::{Deserialize, Serialize};

use crate::characters::{e_d, DirichletCharacter};
use crate::error::{Error, Result};
use crate::numkernel::dirichlet_l;
use crate::C64;

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_i(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Inverse of a modulo m (m >= 1), in [0, m).
pub fn mod_inverse(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, a.rem_euclid(m as i64) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInt {
    pub n: u64,
    /// (prime, exponent), primes strictly increasing.
    pub factors: Vec<(u64, u32)>,
}

/// Complete factorization: trial division to 10^6, then Pollard rho.
pub fn factorize(n: u64) -> FactoredInt {
    assert!(n >= 1, "factorize needs n >= 1");
    let mut m = n;
    let mut primes: Vec<u64> = Vec::new();
    let mut p = 2u64;
    while p <= 1_000_000 && p * p <= m {
        while m % p == 0 {
            primes.push(p);
            m /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![m];
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if is_prime(x) {
            primes.push(x);
            continue;
        }
        let d = pollard_rho(x);
        stack.push(d);
        stack.push(x / d);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    FactoredInt { n, factors }
}

impl FactoredInt {
    pub fn new(n: u64) -> Self {
        factorize(n)
    }

    pub fn one() -> Self {
        Self { n: 1, factors: Vec::new() }
    }

    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn mu(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut ds = vec![1u64];
        for &(p, e) in &self.factors {
            let cur = ds.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..cur {
                    ds.push(ds[i] * pk);
                }
            }
        }
        ds.sort_unstable();
        ds
    }

    pub fn q_split(&self, q: u64) -> QSplit {
        q_split(self, q)
    }

    /// Euler phi.
    pub fn phi(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSplit {
    pub n: FactoredInt,
    /// n(q): the part of n built from primes dividing q.
    pub q_part: u64,
    /// n* = n / n(q).
    pub non_q_part: u64,
}

pub fn q_split(n: &FactoredInt, q: u64) -> QSplit {
    let q_part: u64 = n.factors.iter().filter(|&&(p, _)| q % p == 0).map(|&(p, e)| p.pow(e)).product();
    QSplit { n: n.clone(), q_part, non_q_part: n.n / q_part }
}

/// n_{(m)} = n / (n, m).
pub fn coprime_quotient(m: u64, n: u64) -> u64 {
    n / gcd(n, m)
}

/// p^{-x} for real p.
pub fn pow_neg(p: f64, x: C64) -> C64 {
    (-x * p.ln()).exp()
}

/// f_{alpha,beta}(p^m, chi) given chi(p).
pub fn f_prime_power(alpha: C64, beta: C64, p: u64, m: u32, chi_p: C64) -> C64 {
    let a = pow_neg(p as f64, alpha);
    let b = chi_p * pow_neg(p as f64, beta);
    let den = a - b;
    if den.norm() < 1e-8 {
        // sum_{j=0}^m a^{m-j} b^j, exact for every a, b
        let mut acc = C64::new(0.0, 0.0);
        let mut t = a.powu(m);
        let ratio = if a.norm() > 0.0 { b / a } else { C64::new(0.0, 0.0) };
        for _ in 0..=m {
            acc += t;
            t *= ratio;
        }
        return acc;
    }
    (a.powu(m + 1) - b.powu(m + 1)) / den
}

/// f_{alpha,beta}(n, chi) = sum_{n1 n2 = n} n1^{-alpha} n2^{-beta} chi(n2).
pub fn shifted_divisor_f(alpha: C64, beta: C64, n: &FactoredInt, chi: &DirichletCharacter) -> C64 {
    n.factors.iter().map(|&(p, e)| f_prime_power(alpha, beta, p, e, chi.value(p))).fold(C64::new(1.0, 0.0), |a, b| a * b)
}

/// sigma_{alpha,beta}(n) = f_{alpha,beta}(n, 1).
pub fn shifted_divisor_sigma(alpha: C64, beta: C64, n: &FactoredInt) -> C64 {
    n.factors.iter().map(|&(p, e)| f_prime_power(alpha, beta, p, e, C64::new(1.0, 0.0))).fold(C64::new(1.0, 0.0), |a, b| a * b)
}

/// Direct divisor-sum evaluation, used as an oracle.
pub fn shifted_divisor_f_direct(alpha: C64, beta: C64, n: u64, chi: &DirichletCharacter) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for n1 in 1..=n {
        if n % n1 == 0 {
            let n2 = n / n1;
            acc += pow_neg(n1 as f64, alpha) * pow_neg(n2 as f64, beta) * chi.value(n2);
        }
    }
    acc
}

/// Table f_{alpha,beta}(n, chi) for n = 0..=limit (index 0 unused), by a
/// multiplicative sieve.
pub fn shifted_divisor_table(alpha: C64, beta: C64, chi: &DirichletCharacter, limit: usize) -> Vec<C64> {
    let spf = smallest_prime_factors(limit);
    let mut out = vec![C64::new(0.0, 0.0); limit + 1];
    if limit >= 1 {
        out[1] = C64::new(1.0, 0.0);
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let mut m = n;
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        out[n] = out[m] * f_prime_power(alpha, beta, p as u64, e, chi.value(p as u64));
    }
    out
}

/// Smallest prime factor for 0..=limit.
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Moebius function for 0..=limit.
pub fn mobius_table(limit: usize) -> Vec<i8> {
    let spf = smallest_prime_factors(limit);
    let mut mu = vec![0i8; limit + 1];
    if limit >= 1 {
        mu[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let m = n / p;
        mu[n] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

fn divisors_of(n: u64) -> Vec<u64> {
    factorize(n).divisors()
}

fn rho_and_d1(d: u64, q: u64) -> (u64, u64) {
    let rho = gcd(d, q);
    (rho, d * q / rho)
}

/// sigma_{alpha,beta}(n, c/d, chi) by direct evaluation of the defining
/// double sum over uv = n and b in [1, d1] with b = cu (mod d).
pub fn twisted_sigma(alpha: C64, beta: C64, n: u64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<C64> {
    if gcd_i(c, d as i64) != 1 {
        return Err(Error::NonCoprime(format!("(c,d)=({c},{d})")));
    }
    let q = chi.modulus();
    let (_, d1) = rho_and_d1(d, q);
    let mut acc = C64::new(0.0, 0.0);
    for u in divisors_of(n) {
        let v = n / u;
        let target = (c as i128 * u as i128).rem_euclid(d as i128) as u64;
        let mut inner = C64::new(0.0, 0.0);
        let mut b = if target == 0 { d } else { target };
        while b <= d1 {
            let phase = (b as u128 * v as u128 % d1 as u128) as i64;
            inner += chi.value(b) * e_d(phase, d1);
            b += d;
        }
        acc += pow_neg(u as f64, alpha) * pow_neg(v as f64, beta) * inner;
    }
    Ok(acc)
}

/// The closed forms for sigma_{alpha,beta}(n, c/d, chi): the two
/// f-type expressions when rho is 1 or q, the m-sum expression when
/// 1 < rho < q. `qbar` overrides the representative of Q^{-1} mod D used
/// in the last case (default: least positive).
pub fn twisted_sigma_closed(
    alpha: C64,
    beta: C64,
    n: u64,
    c: i64,
    d: u64,
    chi: &DirichletCharacter,
    qbar: Option<i64>,
) -> Result<C64> {
    if gcd_i(c, d as i64) != 1 {
        return Err(Error::NonCoprime(format!("(c,d)=({c},{d})")));
    }
    let q = chi.modulus();
    let (rho, _) = rho_and_d1(d, q);
    let nf = factorize(n);
    if rho == 1 {
        let qinv = mod_inverse(q as i64, d).expect("q invertible mod d") as i64;
        let phase = ((c as i128 * qinv as i128 % d as i128) * (n as i128 % d as i128)).rem_euclid(d as i128) as i64;
        return Ok(chi.value(d) * e_d(phase, d) * chi.gauss_sum() * shifted_divisor_f(alpha, beta, &nf, &chi.conj()));
    }
    if rho == q {
        let phase = (c as i128 * n as i128).rem_euclid(d as i128) as i64;
        return Ok(chi.value_i(c) * e_d(phase, d) * shifted_divisor_f(beta, alpha, &nf, chi));
    }
    let big_q = q / rho;
    let big_d = d / rho;
    let qb = match qbar {
        Some(x) => {
            if (x as i128 * big_q as i128 - 1).rem_euclid(big_d as i128) != 0 {
                return Err(Error::Precondition(format!("{x} is not an inverse of {big_q} mod {big_d}")));
            }
            x
        }
        None => mod_inverse(big_q as i64, big_d).expect("Q invertible mod D") as i64,
    };
    // Q Qbar = 1 + w D
    let w = (big_q as i128 * qb as i128 - 1) / big_d as i128;
    let phase = (n as i128 * c as i128 % d as i128 * qb as i128).rem_euclid(d as i128) as i64;
    let pre = e_d(phase, d) * chi.gauss_sum() / rho as f64;
    let chib = chi.conj();
    let mut acc = C64::new(0.0, 0.0);
    for u in nf.divisors() {
        let v = n / u;
        let mut inner = C64::new(0.0, 0.0);
        for m in 1..=rho {
            let arg = (m as i128 * big_q as i128 - v as i128 * w).rem_euclid(q as i128) as u64;
            let ph = (-(m as i128) * c as i128 * u as i128).rem_euclid(rho as i128) as i64;
            inner += chib.value(arg) * e_d(ph, rho);
        }
        acc += pow_neg(u as f64, alpha) * pow_neg(v as f64, beta) * inner;
    }
    Ok(pre * acc)
}

fn near_integer(z: C64, what: &str) -> Result<i64> {
    let r = z.re.round();
    if (z - C64::new(r, 0.0)).norm() > 1e-9 * (1.0 + r.abs()) {
        return Err(Error::Domain(format!("{what} not integral: {z}")));
    }
    Ok(r as i64)
}

/// c_d(r) = sum_{(c,d)=1} e_d(cr), rounded to the integer it must be.
pub fn ramanujan_sum(d: u64, r: i64) -> Result<i64> {
    if d == 0 {
        return Err(Error::Precondition("d must be positive".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for c in 1..=d {
        if gcd(c, d) == 1 {
            acc += e_d((c as i128 * r as i128).rem_euclid(d as i128) as i64, d);
        }
    }
    near_integer(acc, "Ramanujan sum")
}

/// c_d(r) through the Moebius formula sum_{n | (d,r)} n mu(d/n).
pub fn ramanujan_sum_mobius(d: u64, r: i64) -> i64 {
    let g = gcd(d, r.unsigned_abs());
    let g = if r == 0 { d } else { g };
    divisors_of(g).into_iter().map(|n| n as i64 * factorize(d / n).mu()).sum()
}

/// c_d(r, chi) = sum_{(c,d)=1} chi(c) e_d(-cr), by direct summation.
pub fn twisted_ramanujan(d: u64, r: i64, chi: &DirichletCharacter) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in 1..=d {
        if gcd(c, d) == 1 {
            acc += chi.value(c) * e_d((-(c as i128) * r as i128).rem_euclid(d as i128) as i64, d);
        }
    }
    acc
}

/// Closed form of c_d(r, chi) for q | d:
/// conj(G(conj chi)) sum_{n | r, n | d/q} mu((d/q)/n) chi((d/q)/n) conj chi(r/n) n.
pub fn twisted_ramanujan_closed(d: u64, r: i64, chi: &DirichletCharacter) -> Result<C64> {
    let q = chi.modulus();
    if d % q != 0 {
        return Err(Error::Precondition(format!("closed form needs q | d (q={q}, d={d})")));
    }
    let dq = d / q;
    let gbar = chi.conj().gauss_sum().conj();
    let chib = chi.conj();
    let mut acc = C64::new(0.0, 0.0);
    for n in divisors_of(dq) {
        if r % n as i64 != 0 {
            continue;
        }
        let m = dq / n;
        acc += chi.value(m) * chib.value_i(r / n as i64) * (factorize(m).mu() * n as i64) as f64;
    }
    Ok(gbar * acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesComparison {
    pub truncated: C64,
    pub tail_bound: f64,
    pub closed: C64,
}

/// Both sides of sum_r c_d(r, chi) r^{-s} = conj(G(conj chi)) L(s, conj chi) (q/d)^{s-1} sum_{n | d/q} mu(n) chi(n) n^{s-1},
/// the left truncated at r <= r_max.
pub fn dirichlet_series_of_twisted_ramanujan(d: u64, chi: &DirichletCharacter, s: C64, r_max: u64) -> Result<SeriesComparison> {
    let q = chi.modulus();
    if d % q != 0 {
        return Err(Error::Precondition(format!("q={q} must divide d={d}")));
    }
    if s.re <= 1.0 {
        return Err(Error::Domain(format!("Re s = {} must exceed 1", s.re)));
    }
    let table: Vec<C64> = (0..d).map(|j| twisted_ramanujan(d, j as i64, chi)).collect();
    let cmax = table.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut truncated = C64::new(0.0, 0.0);
    for r in 1..=r_max {
        truncated += table[(r % d) as usize] * (-s * (r as f64).ln()).exp();
    }
    let tail_bound = cmax * (r_max as f64).powf(1.0 - s.re) / (s.re - 1.0);
    let chib = chi.conj();
    let mut g = C64::new(0.0, 0.0);
    for n in divisors_of(d / q) {
        let mu = factorize(n).mu();
        if mu != 0 {
            g += chi.value(n) * mu as f64 * ((s - 1.0) * (n as f64).ln()).exp();
        }
    }
    let closed = chib.gauss_sum().conj() * dirichlet_l(s, &chib)? * ((s - 1.0) * (q as f64 / d as f64).ln()).exp() * g;
    Ok(SeriesComparison { truncated, tail_bound, closed })
}

/// S(r, t, d) = sum_{(c,d)=1} e_d(rc + t cbar).
pub fn kloosterman(r: i64, t: i64, d: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Precondition("d must be positive".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for c in 1..=d {
        if let Some(cb) = mod_inverse(c as i64, d) {
            if gcd(c, d) != 1 {
                continue;
            }
            let ph = (r as i128 * c as i128 + t as i128 * cb as i128).rem_euclid(d as i128) as i64;
            acc += e_d(ph, d);
        }
    }
    if acc.im.abs() > 1e-9 * (1.0 + acc.re.abs()) {
        return Err(Error::Domain(format!("Kloosterman sum not real: {acc}")));
    }
    Ok(acc.re)
}

/// S_chi(r, t, d) = sum_{(c,d)=1} chi(c) e_d(cr + cbar t), for q | d.
pub fn salie_chi(r: i64, t: i64, d: u64, chi: &DirichletCharacter) -> Result<C64> {
    if d % chi.modulus() != 0 {
        return Err(Error::Precondition(format!("q={} must divide d={d}", chi.modulus())));
    }
    let mut acc = C64::new(0.0, 0.0);
    for c in 1..=d {
        if gcd(c, d) != 1 {
            continue;
        }
        let cb = mod_inverse(c as i64, d).expect("unit");
        let ph = (r as i128 * c as i128 + t as i128 * cb as i128).rem_euclid(d as i128) as i64;
        acc += chi.value(c) * e_d(ph, d);
    }
    Ok(acc)
}

/// Which of the P_ij a modulus d belongs to (i, j in 1..=3).
pub fn classify_pij(d: u64, h: u64, k: u64, q: u64) -> Result<(u8, u8)> {
    if gcd(h, k) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({h},{k})")));
    }
    let cls = |x: u64| {
        let g = gcd(x, q);
        if g == 1 {
            1
        } else if g == q {
            2
        } else {
            3
        }
    };
    Ok((cls(coprime_quotient(h, d)), cls(coprime_quotient(k, d))))
}

/// Elements of P_ij up to `limit` by brute classification.
pub fn enumerate_pij_brute(i: u8, j: u8, h: u64, k: u64, q: u64, limit: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for d in 1..=limit {
        if classify_pij(d, h, k, q)? == (i, j) {
            out.push(d);
        }
    }
    Ok(out)
}

/// Elements of P_ij up to `limit` from the explicit parametrisations
/// (available for i, j in {1, 2}).
pub fn enumerate_pij_param(i: u8, j: u8, h: u64, k: u64, q: u64, limit: u64) -> Result<Vec<u64>> {
    if gcd(h, k) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({h},{k})")));
    }
    let hq = factorize(h).q_split(q).q_part;
    let kq = factorize(k).q_split(q).q_part;
    let mut out: Vec<u64> = match (i, j) {
        (1, 1) => (1..=limit).filter(|&d| gcd(d, q) == 1).collect(),
        (2, 2) => {
            let base = q * hq * kq;
            (1..=limit / base).map(|l| base * l).collect()
        }
        (1, 2) | (2, 1) => {
            let (x, xq) = if (i, j) == (1, 2) { (h, hq) } else { (k, kq) };
            if q == 1 || x % q != 0 {
                Vec::new()
            } else {
                let mut v = Vec::new();
                for m in divisors_of(xq / q) {
                    let base = q * m;
                    for l in 1..=limit / base {
                        if gcd(l, q) == 1 {
                            v.push(base * l);
                        }
                    }
                }
                v
            }
        }
        _ => return Err(Error::Precondition(format!("no parametrisation for P_{i}{j}"))),
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Both generators of P_ij; an error if they disagree.
pub fn enumerate_pij(i: u8, j: u8, h: u64, k: u64, q: u64, limit: u64) -> Result<Vec<u64>> {
    let a = enumerate_pij_brute(i, j, h, k, q, limit)?;
    let b = enumerate_pij_param(i, j, h, k, q, limit)?;
    if a != b {
        return Err(Error::Domain(format!("P_{i}{j} generators disagree for q={q}, h={h}, k={k}")));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn factorization_examples() {
        assert!(factorize(1).factors.is_empty());
        assert_eq!(factorize(360).factors, vec![(2, 3), (3, 2), (5, 1)]);
        let m61 = (1u64 << 61) - 1;
        assert_eq!(factorize(m61).factors, vec![(m61, 1)]);
        let big = 1_000_003u64 * 998_244_353;
        assert_eq!(factorize(big).factors, vec![(1_000_003, 1), (998_244_353, 1)]);
    }

    #[test]
    fn q_split_examples() {
        let s = factorize(12).q_split(10);
        assert_eq!((s.q_part, s.non_q_part), (4, 3));
        let s = factorize(7).q_split(4);
        assert_eq!((s.q_part, s.non_q_part), (1, 7));
        let s = factorize(100).q_split(20);
        assert_eq!((s.q_part, s.non_q_part), (100, 1));
    }

    #[test]
    fn coprime_quotient_examples() {
        assert_eq!(coprime_quotient(10, 4), 2);
        assert_eq!(coprime_quotient(1, 17), 17);
        assert_eq!(coprime_quotient(12, 18), 3);
    }

    #[test]
    fn divisor_sum_examples() {
        let triv = DirichletCharacter::trivial();
        assert!((shifted_divisor_f(c(0.0), c(0.0), &factorize(6), &triv) - 4.0).norm() < 1e-14);
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert!((shifted_divisor_f(c(0.0), c(0.0), &factorize(4), &chi) - 1.0).norm() < 1e-14);
        assert!((shifted_divisor_sigma(c(0.0), c(0.0), &factorize(12)) - 6.0).norm() < 1e-14);
        assert!((shifted_divisor_sigma(c(0.0), c(-1.0), &factorize(6)) - 12.0).norm() < 1e-13);
        let (a, b) = (C64::new(0.02, 0.01), C64::new(0.03, -0.02));
        let p = 7u64;
        let want = (-a * 7f64.ln()).exp() + chi.value(p) * (-b * 7f64.ln()).exp();
        assert!((shifted_divisor_f(a, b, &factorize(p), &chi) - want).norm() < 1e-14);
    }

    #[test]
    fn confluent_prime_power() {
        let chi = DirichletCharacter::trivial();
        let a = C64::new(0.1, 0.0);
        let v = f_prime_power(a, a, 3, 4, chi.value(3));
        let want = 3f64.powf(-0.4) * 5.0;
        assert!((v - want).norm() < 1e-13);
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan_sum(1, 5).unwrap(), 1);
        assert_eq!(ramanujan_sum(4, 2).unwrap(), -2);
        assert_eq!(ramanujan_sum(6, 1).unwrap(), 1);
        for d in 1..40 {
            for r in -10..10 {
                assert_eq!(ramanujan_sum(d, r).unwrap(), ramanujan_sum_mobius(d, r));
            }
        }
    }

    #[test]
    fn twisted_ramanujan_examples() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        let direct = twisted_ramanujan(3, 1, &chi);
        assert!((direct - C64::new(0.0, -3f64.sqrt())).norm() < 1e-12);
        assert!((twisted_ramanujan_closed(3, 1, &chi).unwrap() - direct).norm() < 1e-12);
        let d6 = twisted_ramanujan(6, 2, &chi);
        assert!((twisted_ramanujan_closed(6, 2, &chi).unwrap() - d6).norm() < 1e-12);
        let chi4 = DirichletCharacter::kronecker(-4).unwrap();
        let a = twisted_ramanujan(8, -3, &chi4);
        let b = twisted_ramanujan(8, 3, &chi4) * chi4.sign();
        assert!((a - b).norm() < 1e-12);
        assert!(twisted_ramanujan_closed(4, 1, &chi).is_err());
    }

    #[test]
    fn kloosterman_examples() {
        let s = kloosterman(1, 1, 5).unwrap();
        assert!((s - (2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos())).abs() < 1e-12);
        assert!((kloosterman(3, 7, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((kloosterman(0, 0, 12).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn salie_examples() {
        let chi = DirichletCharacter::kronecker(-4).unwrap();
        let a = salie_chi(1, 3, 8, &chi).unwrap();
        let b = salie_chi(3, 1, 8, &chi.conj()).unwrap();
        assert!((a - b).norm() < 1e-12);
        let chi3 = DirichletCharacter::kronecker(-3).unwrap();
        let s = salie_chi(2, 0, 6, &chi3).unwrap();
        assert!((s - twisted_ramanujan(6, -2, &chi3)).norm() < 1e-12);
        assert!(salie_chi(1, 1, 4, &chi3).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_pij(10, 5, 1, 5).unwrap(), (1, 2));
        assert_eq!(classify_pij(7, 2, 5, 3).unwrap(), (1, 1));
        assert_eq!(classify_pij(2, 1, 1, 6).unwrap(), (3, 3));
        assert!(classify_pij(2, 2, 4, 3).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let p22 = enumerate_pij(2, 2, 1, 1, 3, 30).unwrap();
        assert_eq!(p22, (1..=10).map(|l| 3 * l).collect::<Vec<_>>());
        assert!(enumerate_pij(1, 2, 2, 1, 3, 100).unwrap().is_empty());
        let p12 = enumerate_pij(1, 2, 9, 2, 3, 30).unwrap();
        assert!(!p12.is_empty());
    }

    #[test]
    fn twisted_sigma_cases() {
        let (a, b) = (C64::new(0.03, 0.01), C64::new(-0.02, 0.02));
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        for (d, cc, n) in [(3u64, 1i64, 2u64), (2, 1, 1), (6, 5, 12)] {
            let x = twisted_sigma(a, b, n, cc, d, &chi).unwrap();
            let y = twisted_sigma_closed(a, b, n, cc, d, &chi, None).unwrap();
            assert!((x - y).norm() < 1e-12, "d={d} n={n}: {x} vs {y}");
        }
        let chi4 = DirichletCharacter::kronecker(-4).unwrap();
        let x = twisted_sigma(a, b, 6, 1, 2, &chi4).unwrap();
        let y = twisted_sigma_closed(a, b, 6, 1, 2, &chi4, None).unwrap();
        assert!((x - y).norm() < 1e-12, "{x} vs {y}");
    }
}
