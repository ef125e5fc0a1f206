//! The twisted second moment I(h,k): the smooth weight, a quadrature oracle
//! on the critical line, the six-term main term, the diagonal terms with
//! their J residues, the R/R′ residue terms, and the mollified assembly.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::afe::{x_factor, KernelSpec, VInterp, VNodes};
use crate::arith::{factorize, gcd, pow_neg, shifted_divisor_table, FactoredInt};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::eulerprod::{
    a_factor, c_factor, l_xy, leading_c2, pw, q_factor, z_factor, z_prime_factor, z_residue, APole, CKind, QKind,
};
use crate::numkernel::{adaptive_integral_on, composite_gauss_legendre, dirichlet_l, em_tail, riemann_zeta, QuadratureSpec};
use crate::shifts::ShiftTuple;
use crate::tolerances::EPS_SHIFT;
use crate::C64;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// The weight w: 0 outside [T/2, 4T], rising over [T/2, T/2+T0], 1 on the
/// plateau, falling over [4T−T0, 4T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub t: f64,
    pub t0: f64,
}

impl WeightSpec {
    pub fn new(t: f64, t0: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 10.0) {
            return Err(Error::Precondition(format!("T={t} must be finite and >= 10")));
        }
        if !(t0 >= t.powf(0.6) && t0 <= t) {
            return Err(Error::Precondition(format!("T0={t0} outside [T^0.6, T] = [{:.1}, {t}]", t.powf(0.6))));
        }
        Ok(Self { t, t0 })
    }

    /// T0 = 0.4 T.
    pub fn standard(t: f64) -> Result<Self> {
        Self::new(t, 0.4 * t)
    }

    pub fn support(&self) -> (f64, f64) {
        (0.5 * self.t, 4.0 * self.t)
    }

    /// Support ends and the ends of the two transitions.
    pub fn breakpoints(&self) -> [f64; 4] {
        let (lo, hi) = self.support();
        [lo, lo + self.t0, hi - self.t0, hi]
    }

    /// Whether w ≡ 1 on [T, 2T].
    pub fn has_plateau(&self) -> bool {
        0.5 * self.t + self.t0 <= self.t
    }

    /// The same weight shape at another height.
    pub fn rescaled(&self, t: f64) -> Self {
        Self { t, t0: self.t0 * t / self.t }
    }
}

pub fn weight_w(t: f64, spec: &WeightSpec) -> f64 {
    let [a, b, c, d] = spec.breakpoints();
    if t <= a || t >= d {
        0.0
    } else if t < b {
        smooth_step((t - a) / spec.t0)
    } else if t <= c {
        1.0
    } else {
        smooth_step((d - t) / spec.t0)
    }
}

fn weight_quad() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-10, rel_tol: 1e-13, ..QuadratureSpec::default() }
}

/// ∫ w(t) (t/2π)^{−x} dt.
pub fn weight_moment(spec: &WeightSpec, x: C64) -> Result<C64> {
    let [a, b, c, d] = spec.breakpoints();
    let mut bps = vec![a];
    for j in 1..=4 {
        bps.push(a + (b - a) * j as f64 / 4.0);
    }
    bps.push(c);
    for j in 1..=4 {
        bps.push(c + (d - c) * j as f64 / 4.0);
    }
    bps.dedup_by(|u, v| (*u - *v).abs() < 1e-9);
    let f = |t: f64| pow_neg(t / (2.0 * PI), x) * weight_w(t, spec);
    Ok(adaptive_integral_on(f, &bps, &weight_quad())?.value)
}

/// A term coeff · ∫ w(t) (t/2π)^{−exponent} dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: C64,
    pub exponent: C64,
}

impl PowerTerm {
    fn absent() -> Self {
        Self { coeff: zero(), exponent: zero() }
    }

    pub fn at(&self, t: f64) -> C64 {
        self.coeff * pow_neg(t / (2.0 * PI), self.exponent)
    }

    pub fn integrate(&self, spec: &WeightSpec) -> Result<C64> {
        if self.coeff == zero() {
            return Ok(zero());
        }
        Ok(self.coeff * weight_moment(spec, self.exponent)?)
    }
}

// ---------------------------------------------------------------------------
// Critical-line oracle

/// ζ(1/2+α+it) L(1/2+β+it,χ) ζ(1/2+γ−it) L(1/2+δ−it,χ̄) from the library
/// zeta and L routines.
pub fn critical_product(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    let half = C64::new(0.5, t);
    let halfc = C64::new(0.5, -t);
    Ok(riemann_zeta(half + sh.alpha)?
        * dirichlet_l(half + sh.beta, chi)?
        * riemann_zeta(halfc + sh.gamma)?
        * dirichlet_l(halfc + sh.delta, &chi.conj())?)
}

/// Euler–Maclaurin split point for height t.
fn em_split(t: f64) -> usize {
    (0.6 * t.abs() + 40.0).ceil() as usize
}

/// Coefficient tables for evaluating the four series at many heights with
/// one n^{−it} per n.
struct SeriesBank {
    q: usize,
    chi: Vec<C64>,
    ln: Vec<f64>,
    za: Vec<C64>,
    zg: Vec<C64>,
    lb: Vec<C64>,
    ld: Vec<C64>,
    sh: ShiftTuple,
}

impl SeriesBank {
    fn new(sh: &ShiftTuple, chi: &DirichletCharacter, t_max: f64) -> Self {
        let q = chi.modulus() as usize;
        let n_max = q * em_split(t_max) + 1;
        let chiv: Vec<C64> = (0..q).map(|a| chi.value(a as u64)).collect();
        let ln: Vec<f64> = (0..=n_max).map(|n| if n == 0 { 0.0 } else { (n as f64).ln() }).collect();
        let tab = |x: C64, twist: bool| -> Vec<C64> {
            (0..=n_max)
                .map(|n| {
                    if n == 0 {
                        return zero();
                    }
                    let c = if twist { chiv[n % q] } else { one() };
                    c * (-(x + 0.5) * ln[n]).exp()
                })
                .collect()
        };
        Self {
            q,
            za: tab(sh.alpha, false),
            zg: tab(sh.gamma.conj(), false),
            lb: tab(sh.beta, true),
            ld: tab(sh.delta.conj(), true),
            chi: chiv,
            ln,
            sh: *sh,
        }
    }

    fn eval(&self, t: f64) -> C64 {
        let m = em_split(t);
        let q = self.q;
        let (mut sa, mut sg, mut lb, mut ld) = (zero(), zero(), zero(), zero());
        for n in 1..=q * m {
            let (s, c) = (t * self.ln[n]).sin_cos();
            let e = C64::new(c, -s);
            if n < m {
                sa += self.za[n] * e;
                sg += self.zg[n] * e;
            }
            lb += self.lb[n] * e;
            ld += self.ld[n] * e;
        }
        let s_of = |x: C64| C64::new(0.5, t) + x;
        let (s_a, s_g, s_b, s_d) =
            (s_of(self.sh.alpha), s_of(self.sh.gamma.conj()), s_of(self.sh.beta), s_of(self.sh.delta.conj()));
        sa += em_tail(s_a, m as f64);
        sg += em_tail(s_g, m as f64);
        let qf = q as f64;
        let lnq = qf.ln();
        for a in 1..=q {
            let c = self.chi[a % q];
            if c == zero() {
                continue;
            }
            let x = m as f64 + a as f64 / qf;
            lb += c * (-s_b * lnq).exp() * em_tail(s_b, x);
            ld += c * (-s_d * lnq).exp() * em_tail(s_d, x);
        }
        sa * lb * (sg * ld).conj()
    }
}

/// Nodes per unit t needed to resolve the integrand up to height t_max:
/// spacing 2π/(10 log(t_max q hk)).
pub fn node_density(t_max: f64, q: u64, hk: u64) -> f64 {
    10.0 * (t_max * q as f64 * hk as f64).ln() / (2.0 * PI)
}

const TABLE_ORDER: usize = 16;

/// The critical-line product tabulated on composite Gauss–Legendre nodes.
/// One table serves every (h, k) and every weight supported inside it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalLineTable {
    pub lo: f64,
    pub hi: f64,
    pub panel_width: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<C64>,
    pub seconds: f64,
}

impl CriticalLineTable {
    /// `density` is the node count per unit t; panels of 16 nodes.
    pub fn new(sh: &ShiftTuple, chi: &DirichletCharacter, lo: f64, hi: f64, density: f64) -> Result<Self> {
        if !(lo > 1.0 && hi > lo && density > 0.5) {
            return Err(Error::Precondition(format!("bad table range [{lo}, {hi}] or density {density}")));
        }
        if hi > 40_000.0 {
            return Err(Error::Precondition(format!("table height {hi} beyond the supported 4e4")));
        }
        let start = Instant::now();
        let panels = ((hi - lo) * density / TABLE_ORDER as f64).ceil() as usize;
        let (nodes, weights) = composite_gauss_legendre(lo, hi, panels, TABLE_ORDER);
        let bank = SeriesBank::new(sh, chi, hi);
        let values: Vec<C64> = nodes.par_iter().with_min_len(64).map(|&t| bank.eval(t)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence("non-finite critical-line value".into()));
        }
        Ok(Self {
            lo,
            hi,
            panel_width: (hi - lo) / panels as f64,
            nodes,
            weights,
            values,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Table covering the supports of every weight in `specs`.
    pub fn for_weights(sh: &ShiftTuple, chi: &DirichletCharacter, specs: &[WeightSpec], max_hk: u64) -> Result<Self> {
        let lo = specs.iter().map(|s| s.support().0).fold(f64::INFINITY, f64::min);
        let hi = specs.iter().map(|s| s.support().1).fold(0.0, f64::max);
        Self::new(sh, chi, lo, hi, node_density(hi, chi.modulus(), max_hk))
    }

    /// ∫ (h/k)^{−it} P(t) w(t) dt.
    pub fn integrate(&self, h: u64, k: u64, spec: &WeightSpec) -> Result<C64> {
        let (a, b) = spec.support();
        if a < self.lo - 1e-9 || b > self.hi + 1e-9 {
            return Err(Error::Precondition(format!("weight support [{a}, {b}] outside table [{}, {}]", self.lo, self.hi)));
        }
        let lr = (h as f64 / k as f64).ln();
        // Sequential sum so the result does not depend on the thread count.
        let mut acc = zero();
        for ((&t, &wt), &v) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let w = weight_w(t, spec);
            if w != 0.0 {
                let (s, c) = (t * lr).sin_cos();
                acc += v * C64::new(c, -s) * (w * wt);
            }
        }
        Ok(acc)
    }
}

fn check_hk(h: u64, k: u64) -> Result<()> {
    if h == 0 || k == 0 {
        return Err(Error::Precondition("h and k must be positive".into()));
    }
    if gcd(h, k) != 1 {
        return Err(Error::NonCoprime(format!("(h,k)=({h},{k})")));
    }
    Ok(())
}

fn check_moment_chi(chi: &DirichletCharacter) -> Result<()> {
    if chi.modulus() < 2 || !chi.is_primitive() {
        return Err(Error::Precondition("the moment needs a primitive character mod q >= 2".into()));
    }
    Ok(())
}

/// I(h,k) by quadrature on the critical line.
pub fn i_hk_oracle(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<C64> {
    check_hk(h, k)?;
    check_moment_chi(chi)?;
    if spec.t > 5000.0 {
        return Err(Error::Precondition(format!("T={} beyond the desk-scale limit 5000", spec.t)));
    }
    let table = CriticalLineTable::for_weights(sh, chi, &[*spec], h * k)?;
    table.integrate(h, k, spec)
}

/// I(h,k) by composite Simpson with step `step`, an independent check on
/// the tabulated oracle.
pub fn i_hk_simpson(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec, step: f64) -> Result<C64> {
    check_hk(h, k)?;
    let (a, b) = spec.support();
    let n = (((b - a) / step).ceil() as usize + 1) & !1;
    let hs = (b - a) / n as f64;
    let bank = SeriesBank::new(sh, chi, b);
    let lr = (h as f64 / k as f64).ln();
    let vals: Vec<C64> = (0..n + 1)
        .into_par_iter()
        .with_min_len(64)
        .map(|j| {
            let t = a + j as f64 * hs;
            let w = weight_w(t, spec);
            if w == 0.0 {
                return zero();
            }
            let c = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (s, co) = (t * lr).sin_cos();
            bank.eval(t) * C64::new(co, -s) * (w * c)
        })
        .collect();
    Ok(vals.iter().sum::<C64>() * (hs / 3.0))
}

// ---------------------------------------------------------------------------
// Main term

/// The six (t/2π)-power terms of the main term, each including 1/√(hk).
/// Terms 5 and 6 have zero coefficient unless q | h (resp. q | k). Term 5
/// carries χ(−1), from G(χ̄) = χ(−1)·conj(G(χ)).
pub fn main_term_terms(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<[PowerTerm; 6]> {
    check_hk(h, k)?;
    check_moment_chi(chi)?;
    let q = chi.modulus();
    let (hf, kf) = (factorize(h), factorize(k));
    let pre = 1.0 / ((h * k) as f64).sqrt();
    let s0 = zero();
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let qbd = pw(q, -(b + d));
    let mut out = [PowerTerm::absent(); 6];
    out[0] = PowerTerm { coeff: z_factor(sh, &hf, &kf, chi, s0)? * pre, exponent: s0 };
    out[1] = PowerTerm { coeff: qbd * z_factor(&sh.swap(), &hf, &kf, chi, s0)? * pre, exponent: sh.sum() };
    out[2] = PowerTerm { coeff: z_factor(&sh.swap_ag(), &hf, &kf, chi, s0)? * pre, exponent: a + g };
    out[3] = PowerTerm { coeff: qbd * z_factor(&sh.swap_bd(), &hf, &kf, chi, s0)? * pre, exponent: b + d };
    if h % q == 0 {
        let zp = z_prime_factor(&sh.swap_ad(), &factorize(h / q), &kf, chi, s0)?;
        // χ(−1) turns conj G(χ) inside Z′ into G(χ̄), the mirror image of term 6.
        out[4] = PowerTerm { coeff: chi.value(q - 1) * chi.value(k) * pw(q, -d) * zp * pre, exponent: a + d };
    }
    if k % q == 0 {
        let chib = chi.conj();
        let zp = z_prime_factor(&sh.swap_bg(), &hf, &factorize(k / q), &chib, s0)?;
        out[5] = PowerTerm { coeff: chib.value(h) * pw(q, -b) * zp * pre, exponent: b + g };
    }
    Ok(out)
}

/// The main-term integrand at height t, without w(t).
pub fn main_bracket(t: f64, h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    Ok(main_term_terms(h, k, sh, chi)?.iter().map(|p| p.at(t)).sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainTerm {
    pub value: C64,
    pub per_term: [C64; 6],
}

pub fn main_term(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<MainTerm> {
    sh.check_generic(EPS_SHIFT)?;
    main_term_unchecked(h, k, sh, chi, spec)
}

fn main_term_unchecked(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<MainTerm> {
    let terms = main_term_terms(h, k, sh, chi)?;
    let mut per_term = [zero(); 6];
    for (p, t) in per_term.iter_mut().zip(&terms) {
        *p = t.integrate(spec)?;
    }
    Ok(MainTerm { value: per_term.iter().sum(), per_term })
}

// ---------------------------------------------------------------------------
// Residue terms

/// J⁽¹⁾ and J⁽²⁾ at (α,γ) and (β,δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JTerms {
    pub j1_ag: PowerTerm,
    pub j1_bd: PowerTerm,
    pub j2_ag: PowerTerm,
    pub j2_bd: PowerTerm,
}

/// R(−(α+γ)/2), R(−(β+δ)/2), R′(−(α+γ)/2), R′(−(β+δ)/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RTerms {
    pub r_ag: PowerTerm,
    pub r_bd: PowerTerm,
    pub rp_ag: PowerTerm,
    pub rp_bd: PowerTerm,
}

/// Residue in s of Z(2s) at 2s = the pole: half the residue in u of Z(u).
fn half_residue(sh: &ShiftTuple, h: &FactoredInt, k: &FactoredInt, chi: &DirichletCharacter, pole: APole) -> Result<C64> {
    Ok(z_residue(sh, h, k, chi, pole)? * 0.5)
}

pub fn j_terms(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, kernel: &KernelSpec) -> Result<JTerms> {
    check_hk(h, k)?;
    let q = chi.modulus();
    let (hf, kf) = (factorize(h), factorize(k));
    let hk = (h * k) as f64;
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let j1 = |x: C64, pole: APole| -> Result<PowerTerm> {
        let u = -x * 0.5;
        let coeff = pw(q, u) * half_residue(sh, &hf, &kf, chi, pole)? / pow_neg(hk, x * 0.5 - 0.5) * kernel.g(u) / u;
        Ok(PowerTerm { coeff, exponent: x })
    };
    let sw = sh.swap();
    let j2 = |x: C64, pole: APole| -> Result<PowerTerm> {
        let u = x * 0.5;
        let coeff =
            pw(q, -(b + d)) * pw(q, u) * half_residue(&sw, &hf, &kf, chi, pole)? / pow_neg(hk, -0.5 - u) * kernel.g(u) / u;
        Ok(PowerTerm { coeff, exponent: sh.sum() - x })
    };
    Ok(JTerms {
        j1_ag: j1(a + g, APole::AlphaGamma)?,
        j1_bd: j1(b + d, APole::BetaDelta)?,
        j2_ag: j2(a + g, APole::AlphaGamma)?,
        j2_bd: j2(b + d, APole::BetaDelta)?,
    })
}

pub fn r_terms(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, kernel: &KernelSpec) -> Result<RTerms> {
    check_hk(h, k)?;
    let q = chi.modulus();
    let chib = chi.conj();
    let (hf, kf) = (factorize(h), factorize(k));
    let (hh, kk) = (h as f64, k as f64);
    let sq = (hh * kk).sqrt();
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d } = *sh;
    let lead = l_xy(a, b, chi)? * l_xy(g, d, &chib)? * riemann_zeta(one() - a + b - g + d)? / riemann_zeta(2.0 - a + b - g + d)?;
    let lead_p =
        l_xy(-g, -d, chi)? * l_xy(-a, -b, &chib)? * riemann_zeta(one() + a - b + g - d)? / riemann_zeta(2.0 + a - b + g - d)?;
    let r = |u: C64| -> Result<PowerTerm> {
        let coeff = pw(q, u) * 0.5 / sq * lead * kernel.g(u) / u
            * pow_neg(hh, -a)
            * pow_neg(kk, -g)
            * pow_neg(hh * kk, -u)
            * q_factor(QKind::Q11, sh, q, u)
            * c_factor(CKind::C11, sh, &hf, &kf, chi, u)?;
        Ok(PowerTerm { coeff, exponent: a + g })
    };
    let rp = |u: C64| -> Result<PowerTerm> {
        let coeff = pw(q, -u - b - d) * 0.5 / sq * lead_p * kernel.g(u) / u
            * pow_neg(hh, -b)
            * pow_neg(kk, -d)
            * pow_neg(hh * kk, -u)
            * q_factor(QKind::Q22, sh, q, u)
            * c_factor(CKind::C22, sh, &hf, &kf, chi, u)?;
        Ok(PowerTerm { coeff, exponent: b + d })
    };
    let (uag, ubd) = (-(a + g) * 0.5, -(b + d) * 0.5);
    Ok(RTerms { r_ag: r(uag)?, r_bd: r(ubd)?, rp_ag: rp(uag)?, rp_bd: rp(ubd)? })
}

/// Residuals of R(−(α+γ)/2) = J⁽¹⁾_{α,γ}, R′(−(β+δ)/2) = J⁽¹⁾_{β,δ},
/// R(−(β+δ)/2) = −J⁽²⁾_{β,δ}, R′(−(α+γ)/2) = −J⁽²⁾_{α,γ}, relative to the
/// size of the terms. Exponents must agree exactly.
pub fn rj_cancellation_residuals(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    kernel: &KernelSpec,
) -> Result<[f64; 4]> {
    let r = r_terms(h, k, sh, chi, kernel)?;
    let j = j_terms(h, k, sh, chi, kernel)?;
    let cmp = |x: PowerTerm, y: PowerTerm, sign: f64| -> f64 {
        if (x.exponent - y.exponent).norm() > 1e-15 {
            return f64::INFINITY;
        }
        (x.coeff - y.coeff * sign).norm() / x.coeff.norm().max(y.coeff.norm()).max(1e-300)
    };
    Ok([cmp(r.r_ag, j.j1_ag, 1.0), cmp(r.rp_bd, j.j1_bd, 1.0), cmp(r.r_bd, j.j2_bd, -1.0), cmp(r.rp_ag, j.j2_ag, -1.0)])
}

/// Residue of G(s)/s (q t²/4π²hk)^s Z(2s) at s = −(a+b)/2 by the trapezoid
/// rule on a small circle; the J⁽¹⁾ coefficient is this at t = 2π divided
/// by √(hk).
pub fn j1_residue_numeric(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    kernel: &KernelSpec,
    pole: APole,
    radius: f64,
) -> Result<C64> {
    check_hk(h, k)?;
    let (hf, kf) = (factorize(h), factorize(k));
    let q = chi.modulus() as f64;
    let hk = (h * k) as f64;
    let x = match pole {
        APole::AlphaGamma => sh.alpha + sh.gamma,
        APole::BetaDelta => sh.beta + sh.delta,
    };
    let c = -x * 0.5;
    let n = 64;
    let mut acc = zero();
    for j in 0..n {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let s = c + e * radius;
        let f = kernel.g(s) / s * pow_neg(q / hk, -s) * z_factor(sh, &hf, &kf, chi, s * 2.0)?;
        acc += f * e * radius;
    }
    Ok(acc / n as f64 / hk.sqrt())
}

/// Main term assembled with the J and R residue terms left in; they cancel,
/// so the result does not depend on the kernel.
pub fn main_term_via_residues(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
    kernel: &KernelSpec,
) -> Result<C64> {
    let mut acc = main_term_unchecked(h, k, sh, chi, spec)?.value;
    let j = j_terms(h, k, sh, chi, kernel)?;
    let r = r_terms(h, k, sh, chi, kernel)?;
    for (p, sign) in [
        (j.j1_ag, 1.0),
        (j.j1_bd, 1.0),
        (j.j2_ag, 1.0),
        (j.j2_bd, 1.0),
        (r.r_ag, -1.0),
        (r.r_bd, 1.0),
        (r.rp_ag, 1.0),
        (r.rp_bd, -1.0),
    ] {
        acc += p.integrate(spec)? * sign;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Diagonal terms

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalParts {
    pub first: C64,
    pub second: C64,
}

impl DiagonalParts {
    pub fn total(&self) -> C64 {
        self.first + self.second
    }
}

/// Closed form of the diagonal: the Z(0) integrals plus the four J terms.
pub fn diagonal_closed(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
    kernel: &KernelSpec,
) -> Result<DiagonalParts> {
    let terms = main_term_terms(h, k, sh, chi)?;
    let j = j_terms(h, k, sh, chi, kernel)?;
    let first = terms[0].integrate(spec)? + j.j1_ag.integrate(spec)? + j.j1_bd.integrate(spec)?;
    let second = terms[1].integrate(spec)? + j.j2_ag.integrate(spec)? + j.j2_bd.integrate(spec)?;
    Ok(DiagonalParts { first, second })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalBrute {
    pub parts: DiagonalParts,
    /// Largest l used at the top of the support.
    pub l_max: u64,
    /// Largest |V| at the truncation point over all t nodes.
    pub v_at_cut: f64,
    pub t_nodes: usize,
}

/// |V| below which the l-sum is cut.
const DIAG_V_CUT: f64 = 1e-13;
const DIAG_PANELS: usize = 4;

fn diag_t_nodes(spec: &WeightSpec, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let [a, b, c, d] = spec.breakpoints();
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for (u, v) in [(a, b), (b, c), (c, d)] {
        if v > u {
            let (x, w) = composite_gauss_legendre(u, v, panels, TABLE_ORDER);
            xs.extend(x);
            ws.extend(w);
        }
    }
    (xs, ws)
}

/// ln x where |V(x)| first drops below the cut, scanning up from t²/4.
fn v_cut_ln(v: &VNodes, t: f64) -> Result<(f64, f64)> {
    let base = (t * t / 4.0).ln();
    for j in 0..80 {
        let lx = base + 0.5 * j as f64;
        let val = v.eval_ln(lx).norm();
        if val < DIAG_V_CUT {
            return Ok((lx, val));
        }
    }
    Err(Error::Truncation(format!("V did not decay below {DIAG_V_CUT} at t={t}")))
}

/// The diagonal terms hm = kn of the two AFE double sums, summed over l
/// with the exact weight V and the exact factor X.
pub fn diagonal_brute(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
    kernel: &KernelSpec,
) -> Result<DiagonalBrute> {
    diagonal_brute_with(h, k, sh, chi, spec, kernel, DIAG_PANELS)
}

pub fn diagonal_brute_with(
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
    kernel: &KernelSpec,
    panels: usize,
) -> Result<DiagonalBrute> {
    check_hk(h, k)?;
    check_moment_chi(chi)?;
    let q = chi.modulus() as f64;
    let parity = chi.parity();
    let hk = (h * k) as f64;
    let c = PI * PI * hk / q;
    let (ts, ws) = diag_t_nodes(spec, panels);
    let sw = sh.swap();

    // V at the top of the support fixes the l range for the coefficient tables.
    let t_top = spec.support().1;
    let (lx_top, _) = v_cut_ln(&VNodes::new(t_top, sh, parity, kernel)?, t_top)?;
    let (lx_top2, _) = v_cut_ln(&VNodes::new(t_top, &sw, parity, kernel)?, t_top)?;
    let l_max = (((lx_top.max(lx_top2) - c.ln()) * 0.5).exp().ceil() as u64).max(1);
    let hk_max = h.max(k) as usize * l_max as usize;
    let chib = chi.conj();
    let fab = shifted_divisor_table(sh.alpha, sh.beta, chi, hk_max);
    let fgd = shifted_divisor_table(sh.gamma, sh.delta, &chib, hk_max);
    let fgd2 = shifted_divisor_table(-sh.gamma, -sh.delta, chi, hk_max);
    let fab2 = shifted_divisor_table(-sh.alpha, -sh.beta, &chib, hk_max);
    let (hu, ku) = (h as usize, k as usize);
    let a1: Vec<C64> = (0..=l_max as usize).map(|l| if l == 0 { zero() } else { fab[ku * l] * fgd[hu * l] / l as f64 }).collect();
    let a2: Vec<C64> =
        (0..=l_max as usize).map(|l| if l == 0 { zero() } else { fgd2[ku * l] * fab2[hu * l] / l as f64 }).collect();
    let ln_l: Vec<f64> = (0..=l_max as usize).map(|l| if l == 0 { 0.0 } else { (l as f64).ln() }).collect();

    let lc = c.ln();
    let sum_at = |t: f64, shx: &ShiftTuple, coef: &[C64]| -> Result<(C64, f64)> {
        let v = VNodes::new(t, shx, parity, kernel)?;
        let (lx_cut, vc) = v_cut_ln(&v, t)?;
        let interp = VInterp::new(&v, lc, lx_cut);
        let lm = (((lx_cut - lc) * 0.5).exp().floor() as usize).min(l_max as usize);
        let mut acc = zero();
        for l in 1..=lm {
            acc += coef[l] * interp.eval(lc + 2.0 * ln_l[l]);
        }
        Ok((acc, vc))
    };
    let per_node: Vec<(C64, C64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let w = weight_w(t, spec);
            if w == 0.0 {
                return Ok((zero(), zero(), 0.0));
            }
            let (s1, v1) = sum_at(t, sh, &a1)?;
            let (s2, v2) = sum_at(t, &sw, &a2)?;
            let x = x_factor(t, sh, chi)?;
            Ok((s1 * w, s2 * x * w, v1.max(v2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let pre = 1.0 / hk.sqrt();
    let mut first = zero();
    let mut second = zero();
    let mut vmax = 0.0f64;
    for ((a, b, v), wt) in per_node.iter().zip(&ws) {
        first += a * *wt;
        second += b * *wt;
        vmax = vmax.max(*v);
    }
    Ok(DiagonalBrute {
        parts: DiagonalParts { first: first * pre, second: second * pre },
        l_max,
        v_at_cut: vmax,
        t_nodes: ts.len(),
    })
}

// ---------------------------------------------------------------------------
// Comparison with the oracle

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub h: u64,
    pub k: u64,
    pub q: u64,
    pub weight: WeightSpec,
    pub shifts: ShiftTuple,
    pub oracle: C64,
    pub main_term: C64,
    pub per_term: [C64; 6],
    pub residual: f64,
    pub relative_residual: f64,
    pub oracle_nodes: usize,
    pub node_density: f64,
    pub oracle_seconds: f64,
    pub main_term_seconds: f64,
}

/// Oracle against main term using a precomputed table.
pub fn compare_with_table(
    table: &CriticalLineTable,
    h: u64,
    k: u64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    spec: &WeightSpec,
) -> Result<MomentReport> {
    let t1 = Instant::now();
    let oracle = table.integrate(h, k, spec)?;
    let oracle_seconds = table.seconds + t1.elapsed().as_secs_f64();
    let t2 = Instant::now();
    let mt = main_term(h, k, sh, chi, spec)?;
    let residual = (oracle - mt.value).norm();
    Ok(MomentReport {
        h,
        k,
        q: chi.modulus(),
        weight: *spec,
        shifts: *sh,
        oracle,
        main_term: mt.value,
        per_term: mt.per_term,
        residual,
        relative_residual: residual / oracle.norm(),
        oracle_nodes: table.nodes.len(),
        node_density: table.nodes.len() as f64 / (table.hi - table.lo),
        oracle_seconds,
        main_term_seconds: t2.elapsed().as_secs_f64(),
    })
}

pub fn compare(h: u64, k: u64, sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<MomentReport> {
    check_hk(h, k)?;
    check_moment_chi(chi)?;
    sh.check_generic(EPS_SHIFT)?;
    let table = CriticalLineTable::for_weights(sh, chi, &[*spec], h * k)?;
    compare_with_table(&table, h, k, sh, chi, spec)
}

// ---------------------------------------------------------------------------
// Zero-shift limit and the leading coefficient

/// Shift scales of the zero-shift extrapolation.
pub const CONFLUENCE_SCALES: [f64; 2] = [1e-2, 1e-3];

/// Zero-shift limit of a function holomorphic in the shifts: even parts at
/// ε·dir for the two scales, then Richardson in ε².
pub fn zero_shift_limit<F: Fn(&ShiftTuple) -> Result<C64>>(dir: &ShiftTuple, f: F) -> Result<C64> {
    let even = |e: f64| -> Result<C64> { Ok((f(&dir.scale(e))? + f(&dir.scale(-e))?) * 0.5) };
    let [e1, e2] = CONFLUENCE_SCALES;
    let (v1, v2) = (even(e1)?, even(e2)?);
    let r = (e1 / e2).powi(2);
    Ok((v2 * r - v1) / (r - 1.0))
}

/// Direction of the confluence probe: the generic tuple at unit scale.
pub fn confluence_direction() -> ShiftTuple {
    ShiftTuple::generic(100.0)
}

/// Zero-shift main term.
pub fn main_term_zero_shift(h: u64, k: u64, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<C64> {
    zero_shift_limit(&confluence_direction(), |s| Ok(main_term_unchecked(h, k, s, chi, spec)?.value))
}

/// (6/π²) L(1,χ)² Π_{p|q} (1+1/p)^{−1}.
pub fn motohashi_constant(chi: &DirichletCharacter) -> Result<f64> {
    leading_c2(&FactoredInt::one(), &FactoredInt::one(), chi)
}

/// Second difference of f(T)/(T·∫W) in log T with step ln 2, where W is
/// the weight shape; exact for a quadratic polynomial in log T.
fn log2_coefficient<F: Fn(&WeightSpec) -> Result<C64>>(spec: &WeightSpec, f: F) -> Result<C64> {
    let mass = weight_moment(spec, zero())?.re / spec.t;
    let m = |s: &WeightSpec| -> Result<C64> { Ok(f(s)? / s.t) };
    let (lo, mid, hi) = (m(&spec.rescaled(spec.t / 2.0))?, m(spec)?, m(&spec.rescaled(spec.t * 2.0))?);
    let l2 = 2.0f64.ln();
    Ok((hi - mid * 2.0 + lo) / (2.0 * l2 * l2 * mass))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeadingCoefficientCheck {
    pub t: f64,
    /// log² T coefficient of the zero-shift main term by T-differencing.
    pub extracted: f64,
    pub predicted: f64,
    pub relative_error: f64,
    /// Zero-shift main term over predicted · ∫ w log²(t/2π).
    pub literal_ratio: f64,
}

/// Leading coefficient of the zero-shift moment for h = k = 1 against the
/// constant (6/π²) L(1,χ)² Π_{p|q}(1+1/p)^{−1}.
pub fn motohashi_check(chi: &DirichletCharacter, spec: &WeightSpec) -> Result<LeadingCoefficientCheck> {
    if !chi.is_real() {
        return Err(Error::Precondition("the leading constant needs a real character".into()));
    }
    let predicted = motohashi_constant(chi)?;
    let extracted = log2_coefficient(spec, |s| main_term_zero_shift(1, 1, chi, s))?;
    let m0 = main_term_zero_shift(1, 1, chi, spec)?.re;
    let [a, _, _, d] = spec.breakpoints();
    let log2 = adaptive_integral_on(
        |t| C64::new(weight_w(t, spec) * (t / (2.0 * PI)).ln().powi(2), 0.0),
        &[a, spec.breakpoints()[1], spec.breakpoints()[2], d],
        &weight_quad(),
    )?
    .value
    .re;
    Ok(LeadingCoefficientCheck {
        t: spec.t,
        extracted: extracted.re,
        predicted,
        relative_error: (extracted.re - predicted).abs() / predicted,
        literal_ratio: m0 / (predicted * log2),
    })
}

// ---------------------------------------------------------------------------
// Mollified moment

fn check_coeffs(coeffs: &[(u64, C64)]) -> Result<()> {
    if coeffs.is_empty() || coeffs.iter().any(|&(n, _)| n == 0) {
        return Err(Error::Precondition("mollifier coefficients need indices n >= 1".into()));
    }
    Ok(())
}

/// Whether X² ≤ T^{2/11}, where the main term is proven. Outside it the
/// assembly is still computed.
pub fn mollifier_in_range(coeffs: &[(u64, C64)], t: f64) -> bool {
    let x = coeffs.iter().map(|c| c.0).max().unwrap_or(1) as f64;
    x * x <= t.powf(2.0 / 11.0)
}

/// Σ_{h,k} a(h) conj(a(k)) (hk)^{−1/2} F(h/g, k/g) with g = (h,k).
fn assemble<F: FnMut(u64, u64) -> Result<C64>>(coeffs: &[(u64, C64)], mut f: F) -> Result<C64> {
    check_coeffs(coeffs)?;
    let mut acc = zero();
    for &(h, ah) in coeffs {
        for &(k, ak) in coeffs {
            let g = gcd(h, k);
            acc += ah * ak.conj() / ((h * k) as f64).sqrt() * f(h / g, k / g)?;
        }
    }
    Ok(acc)
}

/// Main term of ∫ |ζ L(1/2+it)|² |M(1/2+it)|² w(t) dt (shifted), with
/// M(s) = Σ a(n) n^{−s}. Non-coprime pairs are reduced by their gcd.
pub fn mollified_main(coeffs: &[(u64, C64)], sh: &ShiftTuple, chi: &DirichletCharacter, spec: &WeightSpec) -> Result<C64> {
    sh.check_generic(EPS_SHIFT)?;
    assemble(coeffs, |h, k| Ok(main_term_unchecked(h, k, sh, chi, spec)?.value))
}

/// The same assembly of oracle values from a table.
pub fn mollified_oracle(coeffs: &[(u64, C64)], table: &CriticalLineTable, spec: &WeightSpec) -> Result<C64> {
    assemble(coeffs, |h, k| table.integrate(h, k, spec))
}

pub fn mollified_main_zero_shift(coeffs: &[(u64, C64)], chi: &DirichletCharacter, spec: &WeightSpec) -> Result<C64> {
    assemble(coeffs, |h, k| main_term_zero_shift(h, k, chi, spec))
}

/// Σ_{h,k} c₂(h,k) a(h) conj(a(k)) (h,k)/(hk).
pub fn mollified_c2_prediction(coeffs: &[(u64, C64)], chi: &DirichletCharacter) -> Result<C64> {
    check_coeffs(coeffs)?;
    let mut acc = zero();
    for &(h, ah) in coeffs {
        for &(k, ak) in coeffs {
            let g = gcd(h, k);
            let c2 = leading_c2(&factorize(h), &factorize(k), chi)?;
            acc += ah * ak.conj() * (c2 * g as f64 / (h * k) as f64);
        }
    }
    Ok(acc)
}

/// log² T coefficient of the zero-shift mollified main term by
/// T-differencing, against the predicted c₂ sum.
pub fn mollified_c2_check(coeffs: &[(u64, C64)], chi: &DirichletCharacter, spec: &WeightSpec) -> Result<LeadingCoefficientCheck> {
    if !chi.is_real() {
        return Err(Error::Precondition("c2 needs a real character".into()));
    }
    let predicted = mollified_c2_prediction(coeffs, chi)?.re;
    let extracted = log2_coefficient(spec, |s| mollified_main_zero_shift(coeffs, chi, s))?.re;
    Ok(LeadingCoefficientCheck {
        t: spec.t,
        extracted,
        predicted,
        relative_error: (extracted - predicted).abs() / predicted.abs(),
        literal_ratio: f64::NAN,
    })
}

/// a(n) = μ(n) for n ≤ x.
pub fn mobius_mollifier(x: u64) -> Vec<(u64, C64)> {
    (1..=x).map(|n| (n, C64::new(factorize(n).mu() as f64, 0.0))).filter(|c| c.1 != zero()).collect()
}

/// A(0) of the diagonal Dirichlet series, exposed for the h = k = 1 check
/// that B = 1 inside Z.
pub fn diagonal_series_at_zero(sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    a_factor(sh, chi, zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afe::Kernel;

    fn chi3() -> DirichletCharacter {
        DirichletCharacter::kronecker(-3).unwrap()
    }

    #[test]
    fn weight_shape() {
        let spec = WeightSpec::new(1000.0, 300.0).unwrap();
        assert_eq!(weight_w(400.0, &spec), 0.0);
        assert_eq!(weight_w(4100.0, &spec), 0.0);
        assert_eq!(weight_w(2000.0, &spec), 1.0);
        assert!(spec.has_plateau());
        let h = 1e-3;
        for j in 0..200 {
            let t = 500.0 + 300.0 * j as f64 / 200.0;
            let d = (weight_w(t + h, &spec) - weight_w(t - h, &spec)) / (2.0 * h);
            assert!(d.abs() <= 4.0 / 300.0);
        }
        assert!(WeightSpec::new(1000.0, 10.0).is_err());
        assert!(WeightSpec::new(1000.0, 1500.0).is_err());
    }

    #[test]
    fn weight_moment_at_zero_is_mass() {
        let spec = WeightSpec::standard(1000.0).unwrap();
        let m = weight_moment(&spec, zero()).unwrap();
        // Each transition contributes T0/2 by the symmetry of the smooth step.
        let want = 3.5 * spec.t - spec.t0;
        assert!((m.re - want).abs() < 1e-8 * want, "{m}");
    }

    #[test]
    fn indicator_terms() {
        let sh = ShiftTuple::generic(1.0);
        let t = main_term_terms(1, 1, &sh, &chi3()).unwrap();
        assert_eq!(t[4].coeff, zero());
        assert_eq!(t[5].coeff, zero());
        let t = main_term_terms(3, 2, &sh, &chi3()).unwrap();
        assert!(t[4].coeff.norm() > 0.0);
        assert_eq!(t[5].coeff, zero());
        let chi5 = DirichletCharacter::kronecker(5).unwrap();
        let t = main_term_terms(2, 3, &sh, &chi5).unwrap();
        assert_eq!(t[4].coeff, zero());
        assert_eq!(t[5].coeff, zero());
    }

    #[test]
    fn rj_identities() {
        let g = KernelSpec::new(Kernel::Gaussian);
        for (h, k) in [(1, 1), (2, 3), (3, 4), (9, 5)] {
            let r = rj_cancellation_residuals(h, k, &ShiftTuple::generic(1.0), &chi3(), &g).unwrap();
            assert!(r.iter().all(|&x| x < 1e-10), "{h},{k}: {r:?}");
        }
    }

    #[test]
    fn kernel_independence() {
        let sh = ShiftTuple::generic(1.0);
        let spec = WeightSpec::standard(1000.0).unwrap();
        for (h, k) in [(1, 1), (3, 2)] {
            let m = main_term(h, k, &sh, &chi3(), &spec).unwrap().value;
            for kern in [Kernel::Gaussian, Kernel::HalfGaussian] {
                let v = main_term_via_residues(h, k, &sh, &chi3(), &spec, &KernelSpec::new(kern)).unwrap();
                assert!((v - m).norm() < 1e-9 * m.norm());
            }
        }
    }

    #[test]
    fn j_residue_matches_contour() {
        let sh = ShiftTuple::generic(1.0);
        let g = KernelSpec::new(Kernel::Gaussian);
        let j = j_terms(2, 1, &sh, &chi3(), &g).unwrap();
        let num = j1_residue_numeric(2, 1, &sh, &chi3(), &g, APole::AlphaGamma, 5e-3).unwrap();
        // At t = 2π the t-power is 1; the coefficient carries 1/√(hk) already.
        assert!((num - j.j1_ag.coeff).norm() < 1e-10 * j.j1_ag.coeff.norm(), "{num} {}", j.j1_ag.coeff);
        let num = j1_residue_numeric(2, 1, &sh, &chi3(), &g, APole::BetaDelta, 5e-3).unwrap();
        assert!((num - j.j1_bd.coeff).norm() < 1e-10 * j.j1_bd.coeff.norm());
    }

    #[test]
    fn conjugate_symmetric_main_term_is_real() {
        let (a, b) = (C64::new(0.013, 0.004), C64::new(0.021, -0.007));
        let sh = ShiftTuple::new(a, b, a.conj(), b.conj());
        let spec = WeightSpec::standard(1000.0).unwrap();
        let m = main_term(1, 1, &sh, &chi3(), &spec).unwrap().value;
        assert!(m.im.abs() < 1e-9 * m.norm(), "{m}");
    }

    #[test]
    fn zero_shift_limit_of_polynomial() {
        let dir = confluence_direction();
        let v = zero_shift_limit(&dir, |s| Ok(s.alpha * s.alpha + s.beta * 3.0 + 2.0)).unwrap();
        assert!((v - 2.0).norm() < 1e-12);
    }

    #[test]
    fn trivial_mollifier_is_main_term() {
        let sh = ShiftTuple::generic(1.0);
        let spec = WeightSpec::standard(1000.0).unwrap();
        let m = main_term(1, 1, &sh, &chi3(), &spec).unwrap().value;
        let v = mollified_main(&[(1, one())], &sh, &chi3(), &spec).unwrap();
        assert!((v - m).norm() < 1e-12 * m.norm());
        assert_eq!(mobius_mollifier(3).len(), 3);
        assert!(mollifier_in_range(&[(1, one())], 1000.0));
        assert!(!mollifier_in_range(&mobius_mollifier(3), 1000.0));
    }

    #[test]
    fn preconditions() {
        let sh = ShiftTuple::generic(1.0);
        let spec = WeightSpec::standard(1000.0).unwrap();
        assert!(matches!(main_term(2, 4, &sh, &chi3(), &spec), Err(Error::NonCoprime(_))));
        let zero_sh = ShiftTuple::generic(0.0);
        assert!(main_term(1, 1, &zero_sh, &chi3(), &spec).is_err());
        let big = WeightSpec::standard(6000.0).unwrap();
        assert!(i_hk_oracle(1, 1, &sh, &chi3(), &big).is_err());
    }
}
