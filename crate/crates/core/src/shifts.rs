//! The shift tuple (alpha, beta, gamma, delta) and the permutations that
//! appear in the six main terms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{EPS_SHIFT, MAX_SHIFT};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftTuple {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl ShiftTuple {
    pub fn new(alpha: C64, beta: C64, gamma: C64, delta: C64) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0, 0.0, 0.0, 0.0)
    }

    /// (1,2,3,5)·10⁻²·(1+i/10) scaled by `scale`.
    pub fn generic(scale: f64) -> Self {
        let u = C64::new(1.0, 0.1) * 1e-2 * scale;
        Self::new(u, u * 2.0, u * 3.0, u * 5.0)
    }

    /// Uniform shifts with |Re|, |Im| ≤ size, resampled until generic.
    pub fn random<R: Rng>(rng: &mut R, size: f64) -> Self {
        loop {
            let mut draw = || C64::new(rng.gen_range(-size..size), rng.gen_range(-size..size));
            let sh = Self::new(draw(), draw(), draw(), draw());
            if sh.check_generic(EPS_SHIFT).is_ok() {
                return sh;
            }
        }
    }

    pub fn as_array(&self) -> [C64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn sum(&self) -> C64 {
        self.alpha + self.beta + self.gamma + self.delta
    }

    /// (−γ, −δ, −α, −β).
    pub fn swap(&self) -> Self {
        Self::new(-self.gamma, -self.delta, -self.alpha, -self.beta)
    }

    /// (−γ, β, −α, δ).
    pub fn swap_ag(&self) -> Self {
        Self::new(-self.gamma, self.beta, -self.alpha, self.delta)
    }

    /// (α, −δ, γ, −β).
    pub fn swap_bd(&self) -> Self {
        Self::new(self.alpha, -self.delta, self.gamma, -self.beta)
    }

    /// (−δ, β, γ, −α).
    pub fn swap_ad(&self) -> Self {
        Self::new(-self.delta, self.beta, self.gamma, -self.alpha)
    }

    /// (α, −γ, −β, δ).
    pub fn swap_bg(&self) -> Self {
        Self::new(self.alpha, -self.gamma, -self.beta, self.delta)
    }

    /// (γ, δ, α, β).
    pub fn exchange(&self) -> Self {
        Self::new(self.gamma, self.delta, self.alpha, self.beta)
    }

    /// Complex conjugate of every shift.
    pub fn conj(&self) -> Self {
        Self::new(self.alpha.conj(), self.beta.conj(), self.gamma.conj(), self.delta.conj())
    }

    pub fn scale(&self, f: f64) -> Self {
        Self::new(self.alpha * f, self.beta * f, self.gamma * f, self.delta * f)
    }

    /// Checks the size bound and that α+γ, β+δ, α+δ, β+γ, α+β+γ+δ all stay
    /// at least `eps` from 0.
    pub fn check_generic(&self, eps: f64) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)] {
            if v.norm() > MAX_SHIFT * std::f64::consts::SQRT_2 {
                return Err(Error::Precondition(format!("{name}={v} too large")));
            }
        }
        let sums = [
            ("alpha+gamma", self.alpha + self.gamma),
            ("beta+delta", self.beta + self.delta),
            ("alpha+delta", self.alpha + self.delta),
            ("beta+gamma", self.beta + self.gamma),
            ("alpha+beta+gamma+delta", self.sum()),
        ];
        for (name, v) in sums {
            if v.norm() < eps {
                return Err(Error::Pole(format!("{name}={v} within {eps} of a pole")));
            }
        }
        Ok(())
    }

    /// Parses "a,b,c,d" where each entry is `x` or `x+yi`/`x-yi`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Precondition(format!("expected four shifts, got {s:?}")));
        }
        let mut v = [C64::new(0.0, 0.0); 4];
        for (slot, p) in v.iter_mut().zip(parts) {
            *slot = p.parse::<C64>().map_err(|_| Error::Precondition(format!("bad shift {p:?}")))?;
        }
        Ok(Self::new(v[0], v[1], v[2], v[3]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn permutations() {
        let sh = ShiftTuple::real(1.0, 2.0, 3.0, 4.0).scale(0.01);
        assert_eq!(sh.swap().swap(), sh);
        assert_eq!(sh.swap_ag().swap_ag(), sh);
        assert_eq!(sh.swap_bd().swap_bd(), sh);
        assert_eq!(sh.swap().alpha, C64::new(-0.03, 0.0));
    }

    #[test]
    fn generic_check() {
        assert!(ShiftTuple::zero().check_generic(EPS_SHIFT).is_err());
        assert!(ShiftTuple::generic(1.0).check_generic(EPS_SHIFT).is_ok());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert!(ShiftTuple::random(&mut rng, 0.05).check_generic(EPS_SHIFT).is_ok());
        }
    }

    #[test]
    fn parse_shifts() {
        let sh = ShiftTuple::parse("0.01,0.02+0.01i,0.03,-0.05").unwrap();
        assert_eq!(sh.beta, C64::new(0.02, 0.01));
        assert!(ShiftTuple::parse("1,2").is_err());
    }
}
