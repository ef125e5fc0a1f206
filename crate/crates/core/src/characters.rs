//! Dirichlet characters as explicit value tables, Kronecker symbols and
//! Gauss sums.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::C64;

const TABLE_TOL: f64 = 1e-9;
const INDUCED_SEARCH_LIMIT: u64 = 10_000;

/// e(x) = exp(2 pi i x).
pub fn e1(x: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * x)
}

/// e_d(c) = exp(2 pi i c/d), with c reduced first to keep the phase exact.
pub fn e_d(c: i64, d: u64) -> C64 {
    let r = c.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletCharacter {
    q: u64,
    values: Vec<C64>,
    parity: u8,
    primitive: bool,
    gauss: C64,
}

/// Jacobi symbol (a|n) for odd n > 0.
fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut k = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Kronecker symbol (d|n) for n >= 1.
pub fn kronecker_symbol(d: i64, n: u64) -> i32 {
    let mut n = n as i64;
    let mut k = 1;
    while n % 2 == 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = d.rem_euclid(8);
        if r == 3 || r == 5 {
            k = -k;
        }
        n /= 2;
    }
    k * jacobi(d, n)
}

fn squarefree(m: u64) -> bool {
    let mut m = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

impl DirichletCharacter {
    /// The real primitive character n -> (D|n) mod |D|.
    pub fn kronecker(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) || d.unsigned_abs() > 1_000_000 {
            return Err(Error::NotFundamental(d));
        }
        let q = d.unsigned_abs();
        let values = (0..q)
            .map(|n| {
                if q == 1 {
                    C64::new(1.0, 0.0)
                } else if n == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(kronecker_symbol(d, n) as f64, 0.0)
                }
            })
            .collect();
        let chi = Self::from_table(q, values)?;
        if !chi.primitive {
            return Err(Error::InvalidTable(format!("Kronecker character for D={d} is not primitive")));
        }
        Ok(chi)
    }

    /// The principal character mod q (primitive only for q = 1).
    pub fn principal(q: u64) -> Self {
        let values = (0..q).map(|n| if gcd(n, q) == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
        Self::from_table(q, values).expect("principal table is valid")
    }

    pub fn trivial() -> Self {
        Self::principal(1)
    }

    /// Validate a table chi(0), ..., chi(q-1).
    pub fn from_table(q: u64, values: Vec<C64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidTable("modulus must be positive".into()));
        }
        if values.len() as u64 != q {
            return Err(Error::InvalidTable(format!("expected {q} values, got {}", values.len())));
        }
        if q > 1_000_000 {
            return Err(Error::InvalidTable("modulus above 10^6".into()));
        }
        for (n, v) in values.iter().enumerate() {
            let coprime = gcd(n as u64, q) == 1;
            if coprime && (v.norm() - 1.0).abs() > TABLE_TOL {
                return Err(Error::InvalidTable(format!("support: |chi({n})| != 1 for a unit")));
            }
            if !coprime && v.norm() > TABLE_TOL {
                return Err(Error::InvalidTable(format!("support: chi({n}) != 0 for a non-unit")));
            }
        }
        if (values[(1 % q) as usize] - 1.0).norm() > TABLE_TOL {
            return Err(Error::InvalidTable("chi(1) != 1".into()));
        }
        let stride = if q <= 2000 { 1 } else { (q / 500).max(1) };
        for m in (0..q).step_by(stride as usize) {
            for n in 0..q {
                let mn = ((m as u128 * n as u128) % q as u128) as usize;
                if (values[mn] - values[m as usize] * values[n as usize]).norm() > TABLE_TOL {
                    return Err(Error::InvalidTable(format!("multiplicativity fails at ({m},{n})")));
                }
            }
        }
        let minus_one = values[((q - 1) % q) as usize];
        let parity = if q <= 2 || (minus_one - 1.0).norm() < TABLE_TOL {
            0
        } else if (minus_one + 1.0).norm() < TABLE_TOL {
            1
        } else {
            return Err(Error::InvalidTable("chi(-1) is not +-1".into()));
        };
        let gauss = (1..=q).fold(C64::new(0.0, 0.0), |acc, m| acc + values[(m % q) as usize] * e_d(m as i64, q));
        let primitive = (gauss.norm_sqr() - q as f64).abs() < 1e-8 * q as f64;
        let mut chi = Self { q, values, parity, primitive, gauss };
        if q <= INDUCED_SEARCH_LIMIT && chi.induced_from_proper_divisor() == primitive {
            return Err(Error::InvalidTable("Gauss-sum and conductor primitivity tests disagree".into()));
        }
        chi.primitive = primitive;
        Ok(chi)
    }

    /// True if chi is trivial on units congruent to 1 modulo a proper divisor of q.
    fn induced_from_proper_divisor(&self) -> bool {
        let q = self.q;
        (1..q).filter(|d| q % d == 0).any(|d| {
            (1..q).step_by(d as usize).filter(|&n| gcd(n, q) == 1).all(|n| (self.values[n as usize] - 1.0).norm() < TABLE_TOL)
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn gauss_sum(&self) -> C64 {
        self.gauss
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, n: u64) -> C64 {
        self.values[(n % self.q) as usize]
    }

    pub fn value_i(&self, n: i64) -> C64 {
        self.values[n.rem_euclid(self.q as i64) as usize]
    }

    pub fn is_principal(&self) -> bool {
        self.values.iter().all(|v| v.norm() < TABLE_TOL || (v - 1.0).norm() < TABLE_TOL)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < TABLE_TOL)
    }

    /// chi(-1) as a number.
    pub fn sign(&self) -> f64 {
        if self.parity == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            q: self.q,
            values: self.values.iter().map(|v| v.conj()).collect(),
            parity: self.parity,
            primitive: self.primitive,
            gauss: self.gauss_of(|v| v.conj()),
        }
    }

    /// chi^2 as a (possibly imprimitive) character mod q.
    pub fn square(&self) -> Self {
        let values = self.values.iter().map(|v| v * v).collect();
        Self::from_table(self.q, values).expect("square of a character is a character")
    }

    fn gauss_of(&self, f: impl Fn(C64) -> C64) -> C64 {
        (1..=self.q).fold(C64::new(0.0, 0.0), |acc, m| acc + f(self.value(m)) * e_d(m as i64, self.q))
    }

    /// G(n, chi) = sum_{m=1}^q chi(m) e_q(nm), by direct summation.
    pub fn gauss_sum_twisted(&self, n: i64) -> C64 {
        (1..=self.q).fold(C64::new(0.0, 0.0), |acc, m| {
            acc + self.value(m) * e_d((m as i128 * n as i128).rem_euclid(self.q as i128) as i64, self.q)
        })
    }
}

#[derive(Serialize, Deserialize)]
struct CharacterJson {
    q: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    codes: Option<Vec<i8>>,
}

impl Serialize for DirichletCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = if self.is_real() {
            CharacterJson { q: self.q, values: None, codes: Some(self.values.iter().map(|v| v.re.round() as i8).collect()) }
        } else {
            CharacterJson { q: self.q, values: Some(self.values.iter().map(|v| (v.re, v.im)).collect()), codes: None }
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirichletCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CharacterJson::deserialize(d)?;
        let values: Vec<C64> = match (j.values, j.codes) {
            (Some(v), _) => v.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
            (None, Some(c)) => c.into_iter().map(|x| C64::new(x as f64, 0.0)).collect(),
            (None, None) => return Err(serde::de::Error::custom("character needs values or codes")),
        };
        DirichletCharacter::from_table(j.q, values).map_err(serde::de::Error::custom)
    }
}

/// The order-4 character mod 5 with chi(2) = i.
pub fn quartic_mod5() -> DirichletCharacter {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    DirichletCharacter::from_table(5, vec![zero, one, i, -i, -one]).expect("valid table")
}

/// All primitive characters of modulus q, built from the group structure by
/// brute-force search over generator images. Intended for q <= 50.
pub fn primitive_characters(q: u64) -> Vec<DirichletCharacter> {
    if q == 1 {
        return vec![DirichletCharacter::trivial()];
    }
    let units: Vec<u64> = (1..q).filter(|&n| gcd(n, q) == 1).collect();
    let phi = units.len() as u64;
    // Express every character through discrete logs on a generating set.
    let mut chars: Vec<Vec<C64>> = vec![{
        let mut v = vec![C64::new(0.0, 0.0); q as usize];
        for &u in &units {
            v[u as usize] = C64::new(1.0, 0.0);
        }
        v
    }];
    let mut span: Vec<u64> = vec![1];
    for &g in &units {
        if span.contains(&g) {
            continue;
        }
        // order of g modulo the current subgroup
        let mut ord = 1u64;
        let mut x = g;
        while !span.contains(&x) {
            x = x * g % q;
            ord += 1;
        }
        let mut next = Vec::new();
        for base in &chars {
            // chi(g)^ord must equal chi(x) with x in the span
            let target = base[x as usize];
            for r in 0..ord {
                let root = (target.ln() / ord as f64).exp() * e1(r as f64 / ord as f64);
                let mut v = base.clone();
                for &s in &span {
                    let mut y = s;
                    let mut p = C64::new(1.0, 0.0);
                    for _ in 0..ord {
                        v[y as usize] = base[s as usize] * p;
                        y = y * g % q;
                        p *= root;
                    }
                }
                next.push(v);
            }
        }
        chars = next;
        let mut new_span = Vec::new();
        for &s in &span {
            let mut y = s;
            for _ in 0..ord {
                new_span.push(y);
                y = y * g % q;
            }
        }
        new_span.sort_unstable();
        new_span.dedup();
        span = new_span;
        if span.len() as u64 == phi {
            break;
        }
    }
    chars.into_iter().filter_map(|v| DirichletCharacter::from_table(q, v).ok()).filter(|c| c.is_primitive()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_minus_four() {
        let chi = DirichletCharacter::kronecker(-4).unwrap();
        assert_eq!(chi.modulus(), 4);
        assert_eq!(chi.parity(), 1);
        let v: Vec<f64> = chi.values().iter().map(|v| v.re).collect();
        assert_eq!(v, vec![0.0, 1.0, 0.0, -1.0]);
        assert!((chi.gauss_sum() - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn kronecker_minus_three_and_five() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert!((chi.gauss_sum() - C64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        let chi = DirichletCharacter::kronecker(5).unwrap();
        assert_eq!(chi.value(2).re, -1.0);
        assert_eq!(chi.parity(), 0);
    }

    #[test]
    fn not_fundamental() {
        for d in [-1, 0, 2, 3, 20, -16, 9] {
            assert!(matches!(DirichletCharacter::kronecker(d), Err(Error::NotFundamental(_))), "{d}");
        }
    }

    #[test]
    fn table_validation() {
        let chi = quartic_mod5();
        assert_eq!(chi.parity(), 1);
        assert!(chi.is_primitive());
        assert!((chi.gauss_sum().norm_sqr() - 5.0).abs() < 1e-12);
        let p4 = DirichletCharacter::principal(4);
        assert!(!p4.is_primitive());
        let t = DirichletCharacter::trivial();
        assert!(t.is_primitive() && t.parity() == 0 && (t.gauss_sum() - 1.0).norm() < 1e-15);
        let bad = DirichletCharacter::from_table(
            5,
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0)],
        );
        assert!(matches!(bad, Err(Error::InvalidTable(_))));
    }

    #[test]
    fn twisted_gauss_examples() {
        let chi = DirichletCharacter::kronecker(-4).unwrap();
        assert!((chi.gauss_sum_twisted(1) - C64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(chi.gauss_sum_twisted(2).norm() < 1e-12);
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert!((chi.gauss_sum_twisted(2) - C64::new(0.0, -3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn primitive_counts() {
        // number of primitive characters mod q
        for (q, n) in [(3, 1), (4, 1), (5, 3), (7, 5), (8, 2), (12, 1), (15, 3), (16, 4)] {
            assert_eq!(primitive_characters(q).len(), n, "q={q}");
        }
    }

    #[test]
    fn json_roundtrip() {
        for chi in [DirichletCharacter::kronecker(-3).unwrap(), quartic_mod5()] {
            let s = serde_json::to_string(&chi).unwrap();
            let back: DirichletCharacter = serde_json::from_str(&s).unwrap();
            assert_eq!(back.modulus(), chi.modulus());
            assert!((back.gauss_sum() - chi.gauss_sum()).norm() < 1e-12);
        }
    }
}
