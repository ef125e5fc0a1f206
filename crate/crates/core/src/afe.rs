//! Approximate functional equation for zeta(s) L(s, chi) zeta(s) L(s, conj chi)
//! at height t: the weight V, the factors g and X, and the identity itself as
//! a residual.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::shifted_divisor_table;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::numkernel::{
    completed_l, completed_zeta, composite_gauss_legendre, dirichlet_l, ln_gamma, ln_gamma_ratio, riemann_zeta,
    vertical_line_integral, QuadResult, QuadratureSpec,
};
use crate::shifts::ShiftTuple;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// G(s) = e^{s^2}.
    Gaussian,
    /// G(s) = e^{s^2/2}.
    HalfGaussian,
}

impl Kernel {
    fn scale(self) -> f64 {
        match self {
            Kernel::Gaussian => 1.0,
            Kernel::HalfGaussian => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kernel: Kernel,
    pub sigma: f64,
    pub quad: QuadratureSpec,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::new(Kernel::Gaussian)
    }
}

impl KernelSpec {
    pub fn new(kernel: Kernel) -> Self {
        // Height where |G| on the line sigma = 1 has fallen below ~1e-15.
        let height = (1.0 + 35.0 / kernel.scale()).sqrt();
        let quad = QuadratureSpec { truncation_height: height.max(6.0), ..QuadratureSpec::default() };
        Self { kernel, sigma: 1.0, quad }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn g(&self, s: C64) -> C64 {
        (s * s * self.kernel.scale()).exp()
    }
}

/// Arguments of the four Gamma factors at s = 0.
fn gamma_args(sh: &ShiftTuple, t: f64, parity: u8) -> [C64; 4] {
    let a = parity as f64;
    let it = C64::new(0.0, t);
    [(sh.alpha + 0.5 + it) * 0.5, (sh.beta + 0.5 + it + a) * 0.5, (sh.gamma + 0.5 - it) * 0.5, (sh.delta + 0.5 - it + a) * 0.5]
}

/// ln g(s, t) as a sum of four log-Gamma differences.
fn ln_g(s: C64, t: f64, sh: &ShiftTuple, parity: u8) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for z in gamma_args(sh, t, parity) {
        acc += ln_gamma_ratio(z, s * 0.5)?;
    }
    Ok(acc)
}

/// g(s, t): the normalized four-Gamma ratio.
pub fn g_factor(s: C64, t: f64, sh: &ShiftTuple, parity: u8) -> Result<C64> {
    Ok(ln_g(s, t, sh, parity)?.exp())
}

/// X with an explicit modulus and parity.
pub fn x_factor_raw(t: f64, sh: &ShiftTuple, q: u64, parity: u8) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("x_factor needs t > 0, got {t}")));
    }
    let mut acc = sh.sum() * PI.ln() - (sh.beta + sh.delta) * (q as f64).ln();
    for (num, den) in gamma_args(&sh.swap(), t, parity).into_iter().zip(gamma_args(sh, t, parity)) {
        acc += ln_gamma(num)? - ln_gamma(den)?;
    }
    Ok(acc.exp())
}

pub fn x_factor(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    x_factor_raw(t, sh, chi.modulus(), chi.parity())
}

/// q^{-beta-delta} (t/2 pi)^{-alpha-beta-gamma-delta}.
pub fn x_factor_stirling(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("x_factor needs t > 0, got {t}")));
    }
    let q = chi.modulus() as f64;
    Ok((-(sh.beta + sh.delta) * q.ln() - sh.sum() * (t / (2.0 * PI)).ln()).exp())
}

/// (1/2 pi) int |G(s)/s g(s,t)| du on Re s = sigma; |V(x)| is at most this times x^{-sigma}.
pub fn v_line_constant(t: f64, sh: &ShiftTuple, parity: u8, kernel: &KernelSpec, sigma: f64) -> Result<f64> {
    let a = kernel.kernel.scale();
    let h = (sigma * sigma + 40.0 / a).sqrt();
    let (us, ws) = composite_gauss_legendre(-h, h, (4.0 * h).ceil() as usize, 12);
    let mut acc = 0.0;
    for (u, w) in us.iter().zip(&ws) {
        let s = C64::new(sigma, *u);
        acc += w * (kernel.g(s) / s * ln_g(s, t, sh, parity)?.exp()).norm();
    }
    Ok(acc / (2.0 * PI))
}

/// V(x) by adaptive quadrature on the line Re s = kernel.sigma.
pub fn v_weight(x: f64, t: f64, sh: &ShiftTuple, parity: u8, kernel: &KernelSpec) -> Result<QuadResult> {
    if !(x > 0.0) {
        return Err(Error::Precondition(format!("v_weight needs x > 0, got {x}")));
    }
    if !(kernel.sigma > 0.0) {
        return Err(Error::Precondition("v_weight needs sigma > 0".into()));
    }
    let lx = x.ln();
    let failed = RefCell::new(None);
    let f = |s: C64| match ln_g(s, t, sh, parity) {
        Ok(l) => kernel.g(s) / s * (l - s * lx).exp(),
        Err(e) => {
            failed.borrow_mut().get_or_insert(e);
            C64::new(0.0, 0.0)
        }
    };
    // Cancellation across the line limits the attainable absolute error to
    // a multiple of the L1 norm of the integrand.
    let l1 = v_line_constant(t, sh, parity, kernel, kernel.sigma)? * (-kernel.sigma * lx).exp();
    let mut quad = kernel.quad;
    quad.abs_tol = quad.abs_tol.max(1e-12 * l1);
    let r = vertical_line_integral(f, kernel.sigma, &quad)?;
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Fixed-node form of V: V(x) = sum_k c_k x^{-s_k}.
pub(crate) struct VNodes {
    s: Vec<C64>,
    c: Vec<C64>,
}

impl VNodes {
    pub(crate) fn new(t: f64, sh: &ShiftTuple, parity: u8, kernel: &KernelSpec) -> Result<Self> {
        let h = kernel.quad.truncation_height;
        let panels = (4.0 * h).ceil() as usize;
        let (us, ws) = composite_gauss_legendre(-h, h, panels, 20);
        let s: Vec<C64> = us.iter().map(|&u| C64::new(kernel.sigma, u)).collect();
        let c = s
            .par_iter()
            .zip(&ws)
            .map(|(&s, &w)| Ok(kernel.g(s) / s * ln_g(s, t, sh, parity)?.exp() * (w / (2.0 * PI))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { s, c })
    }

    pub(crate) fn eval_ln(&self, lx: f64) -> C64 {
        self.s.iter().zip(&self.c).map(|(s, c)| c * (-s * lx).exp()).sum()
    }
}

const CHEB_DEGREE: usize = 20;
const CHEB_PANEL: f64 = 0.5;

/// Piecewise Chebyshev interpolant of L -> V(e^L).
pub(crate) struct VInterp {
    lo: f64,
    panels: Vec<Vec<C64>>,
    nodes: Vec<f64>,
    bw: Vec<f64>,
}

impl VInterp {
    pub(crate) fn new(v: &VNodes, lo: f64, hi: f64) -> Self {
        let n = CHEB_DEGREE;
        let nodes: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
        let bw: Vec<f64> = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let count = (((hi - lo) / CHEB_PANEL).ceil() as usize).max(1);
        let panels = (0..count)
            .into_par_iter()
            .map(|p| {
                let c = lo + (p as f64 + 0.5) * CHEB_PANEL;
                nodes.iter().map(|x| v.eval_ln(c + 0.5 * CHEB_PANEL * x)).collect()
            })
            .collect();
        Self { lo, panels, nodes, bw }
    }

    pub(crate) fn eval(&self, l: f64) -> C64 {
        let p = (((l - self.lo) / CHEB_PANEL).floor().max(0.0) as usize).min(self.panels.len() - 1);
        let c = self.lo + (p as f64 + 0.5) * CHEB_PANEL;
        let x = (l - c) / (0.5 * CHEB_PANEL);
        let f = &self.panels[p];
        let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
        for ((&node, &bw), &fj) in self.nodes.iter().zip(&self.bw).zip(f.iter()) {
            let d = x - node;
            if d == 0.0 {
                return fj;
            }
            let w = bw / d;
            num += fj * w;
            den += w;
        }
        num / den
    }
}

/// Phase convention of the double sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AfePhase {
    /// (m/n)^{+it}, matching the Dirichlet expansion.
    Expansion,
    /// (m/n)^{-it}, the conjugate phase; kept for a negative test.
    Conjugate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AfeEvaluation {
    pub lhs: C64,
    pub rhs: C64,
    pub first: C64,
    pub second: C64,
    pub x: C64,
    pub residual: f64,
    pub mn_max: u64,
    pub terms: u64,
    pub tail_estimate: f64,
}

/// Product of the four L-values at s = 0.
pub fn afe_lhs(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    let it = C64::new(0.0, t);
    Ok(riemann_zeta(sh.alpha + 0.5 + it)?
        * dirichlet_l(sh.beta + 0.5 + it, chi)?
        * riemann_zeta(sh.gamma + 0.5 - it)?
        * dirichlet_l(sh.delta + 0.5 - it, &chi.conj())?)
}

/// sum_{mn <= M} f_{a,b}(n,chi) f_{g,d}(m, conj chi) (mn)^{-1/2} (m/n)^{+-it} V(pi^2 mn/q),
/// returned together with the same sum cut at M/2.
fn double_sum(
    t: f64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    m_max: usize,
    phase: AfePhase,
    kernel: &KernelSpec,
) -> Result<(C64, C64)> {
    let q = chi.modulus() as f64;
    let nodes = VNodes::new(t, sh, chi.parity(), kernel)?;
    let l0 = (PI * PI / q).ln();
    let interp = VInterp::new(&nodes, l0, l0 + (m_max as f64).ln() + 1e-9);
    let tt = match phase {
        AfePhase::Expansion => t,
        AfePhase::Conjugate => -t,
    };
    let mut a = shifted_divisor_table(sh.alpha, sh.beta, chi, m_max);
    let mut b = shifted_divisor_table(sh.gamma, sh.delta, &chi.conj(), m_max);
    a.par_iter_mut().enumerate().skip(1).for_each(|(n, v)| *v *= C64::from_polar(1.0, -tt * (n as f64).ln()));
    b.par_iter_mut().enumerate().skip(1).for_each(|(m, v)| *v *= C64::from_polar(1.0, tt * (m as f64).ln()));
    let w: Vec<C64> = (0..=m_max)
        .into_par_iter()
        .map(|n| if n == 0 { C64::new(0.0, 0.0) } else { interp.eval(l0 + (n as f64).ln()) / (n as f64).sqrt() })
        .collect();
    let half = m_max / 2;
    // Fixed chunks summed in order keep the result independent of thread count.
    const CHUNK: usize = 256;
    let partial: Vec<(C64, C64)> = (1..=m_max)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ns| {
            let (mut full, mut low) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for &n in ns {
                let cut = half / n;
                let mut inner = C64::new(0.0, 0.0);
                for m in 1..=cut {
                    inner += b[m] * w[n * m];
                }
                low += a[n] * inner;
                for m in cut + 1..=m_max / n {
                    inner += b[m] * w[n * m];
                }
                full += a[n] * inner;
            }
            (full, low)
        })
        .collect();
    Ok(partial.into_iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |acc, p| (acc.0 + p.0, acc.1 + p.1)))
}

/// (t sqrt(q) / 2 pi)^2.
pub fn conductor_length(t: f64, q: u64) -> f64 {
    let c = t * (q as f64).sqrt() / (2.0 * PI);
    c * c
}

/// Threshold on |V| at the cut used to pick the default MN_max. The
/// measured residual is a few tens of times |V(pi^2 M/q)|.
pub const AFE_V_CUT: f64 = 1e-10;
/// Largest truncation accepted (memory bound of the coefficient tables).
pub const AFE_MAX_TERMS: u64 = 50_000_000;

/// max of |V(pi^2 M/q)| over the two weights of the identity.
pub fn v_at_cut(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter, m_max: u64, kernel: &KernelSpec) -> Result<f64> {
    let lx = (PI * PI * m_max as f64 / chi.modulus() as f64).ln();
    let a = VNodes::new(t, sh, chi.parity(), kernel)?.eval_ln(lx).norm();
    let b = VNodes::new(t, &sh.swap(), chi.parity(), kernel)?.eval_ln(lx).norm();
    Ok(a.max(b))
}

/// Smallest M = 10 * 2^j * (t sqrt q / 2 pi)^2 with both |V| below `v_cut` at the cut.
pub fn default_mn_max(t: f64, sh: &ShiftTuple, chi: &DirichletCharacter, kernel: &KernelSpec, v_cut: f64) -> Result<u64> {
    let base = 10.0 * conductor_length(t, chi.modulus());
    for j in 0..24 {
        let m = (base * f64::powi(2.0, j)).ceil() as u64;
        if m > AFE_MAX_TERMS {
            break;
        }
        if v_at_cut(t, sh, chi, m, kernel)? <= v_cut {
            return Ok(m);
        }
    }
    Err(Error::Truncation(format!("|V| does not fall below {v_cut:.1e} for MN_max <= {AFE_MAX_TERMS}")))
}

fn check_afe_inputs(t: f64, chi: &DirichletCharacter, m_max: u64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("AFE needs t > 0, got {t}")));
    }
    if !chi.is_primitive() || chi.is_principal() {
        return Err(Error::Precondition("AFE needs a primitive non-principal character".into()));
    }
    if !(2..=AFE_MAX_TERMS).contains(&m_max) {
        return Err(Error::Precondition(format!("MN_max {m_max} outside 2..={AFE_MAX_TERMS}")));
    }
    Ok(())
}

/// Both sides of the identity with an explicit phase convention. The tail
/// estimate is |RHS(M) - RHS(M/2)|.
pub fn afe_evaluate(
    t: f64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    m_max: u64,
    kernel: &KernelSpec,
    phase: AfePhase,
) -> Result<AfeEvaluation> {
    check_afe_inputs(t, chi, m_max)?;
    let lhs = afe_lhs(t, sh, chi)?;
    let x = x_factor(t, sh, chi)?;
    let m = m_max as usize;
    let (first, first_half) = double_sum(t, sh, chi, m, phase, kernel)?;
    let (second, second_half) = double_sum(t, &sh.swap(), chi, m, phase, kernel)?;
    let rhs = first + x * second;
    let tail_estimate = (rhs - first_half - x * second_half).norm();
    let terms = 2 * (1..=m_max).map(|n| m_max / n).sum::<u64>();
    Ok(AfeEvaluation { lhs, rhs, first, second, x, residual: (lhs - rhs).norm(), mn_max: m_max, terms, tail_estimate })
}

/// |LHS - RHS| of the identity. Fails with a truncation error when the tail
/// estimate at M exceeds `tol`.
pub fn afe_residual(
    t: f64,
    sh: &ShiftTuple,
    chi: &DirichletCharacter,
    m_max: u64,
    kernel: &KernelSpec,
    tol: f64,
) -> Result<AfeEvaluation> {
    let e = afe_evaluate(t, sh, chi, m_max, kernel, AfePhase::Expansion)?;
    if e.tail_estimate > tol {
        return Err(Error::Truncation(format!("MN_max = {m_max}: tail estimate {:.3e} exceeds {tol:.1e}", e.tail_estimate)));
    }
    Ok(e)
}

/// Xi_{sh,t}(s, chi).
pub fn xi_product(s: C64, t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<C64> {
    let it = C64::new(0.0, t);
    Ok(completed_zeta(sh.alpha + 0.5 + s + it)?
        * completed_l(sh.beta + 0.5 + s + it, chi)?
        * completed_zeta(sh.gamma + 0.5 + s - it)?
        * completed_l(sh.delta + 0.5 + s - it, &chi.conj())?)
}

/// |Xi_{sh,t}(-s) - Xi_{swap sh,t}(s)| relative to the larger side.
pub fn xi_symmetry_residual(s: C64, t: f64, sh: &ShiftTuple, chi: &DirichletCharacter) -> Result<f64> {
    if !chi.is_primitive() {
        return Err(Error::Precondition("Xi symmetry needs a primitive character".into()));
    }
    let a = xi_product(-s, t, sh, chi)?;
    let b = xi_product(s, t, &sh.swap(), chi)?;
    let scale = a.norm().max(b.norm());
    Ok(if scale == 0.0 { 0.0 } else { (a - b).norm() / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn g_basics() {
        let sh = ShiftTuple::generic(1.0);
        assert_eq!(g_factor(c(0.0, 0.0), 37.0, &sh, 1).unwrap(), c(1.0, 0.0));
        let s = c(0.3, -0.4);
        let a = g_factor(s, 40.0, &sh, 0).unwrap();
        let b = g_factor(s.conj(), 40.0, &sh.conj(), 0).unwrap().conj();
        // Conjugation maps t to -t; the swap of t-signs is compensated by
        // exchanging the roles of (alpha, beta) and (gamma, delta).
        let swapped = ShiftTuple::new(sh.gamma, sh.delta, sh.alpha, sh.beta);
        let b2 = g_factor(s.conj(), 40.0, &swapped.conj(), 0).unwrap().conj();
        assert!((a - b2).norm() < 1e-13 * a.norm());
        assert!((a - b).norm() > 1e-6 * a.norm());
    }

    #[test]
    fn g_stirling() {
        let s = c(0.5, 0.3);
        let dev = |t: f64, sh: &ShiftTuple| (g_factor(s, t, sh, 0).unwrap() / (s * 2.0 * (t / 2.0).ln()).exp() - 1.0).norm();
        // With alpha = gamma and beta = delta the 1/t terms cancel in pairs.
        let zero = ShiftTuple::zero();
        let ratio = dev(100.0, &zero) / dev(1000.0, &zero);
        assert!(ratio > 80.0 && ratio < 120.0, "ratio {ratio}");
        let sh = ShiftTuple::generic(1.0);
        let ratio = dev(100.0, &sh) / dev(1000.0, &sh);
        assert!(ratio > 8.0 && ratio < 12.0, "ratio {ratio}");
    }

    #[test]
    fn x_values() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert!((x_factor(50.0, &ShiftTuple::zero(), &chi).unwrap() - 1.0).norm() < 1e-14);
        let sh = ShiftTuple::generic(1.0);
        let err = |t: f64| (x_factor(t, &sh, &chi).unwrap() / x_factor_stirling(t, &sh, &chi).unwrap() - 1.0).norm();
        let ratio = err(100.0) / err(1000.0);
        assert!(ratio > 8.0 && ratio < 12.0, "ratio {ratio}");
        let r = x_factor_raw(50.0, &sh, 3, 1).unwrap() / x_factor_raw(50.0, &sh, 1, 1).unwrap();
        let want = (-(sh.beta + sh.delta) * 3f64.ln()).exp();
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn v_limits_and_contour() {
        let k = KernelSpec::default();
        let sh = ShiftTuple::zero();
        let v = v_weight(1.0, 100.0, &sh, 0, &k).unwrap().value;
        assert!((v - 1.0).norm() <= 0.05);
        let far = v_weight(1e7, 50.0, &sh, 0, &k.with_sigma(3.0)).unwrap().value;
        assert!(far.norm() <= 1e-6);
        let sh = ShiftTuple::generic(1.0);
        let vals: Vec<C64> =
            [0.6, 0.7, 1.0, 1.5, 1.8].iter().map(|&s| v_weight(100.0, 50.0, &sh, 1, &k.with_sigma(s)).unwrap().value).collect();
        for v in &vals[1..] {
            assert!((v - vals[0]).norm() < 1e-9, "{v} vs {}", vals[0]);
        }
    }

    #[test]
    fn interpolant_matches_quadrature() {
        let k = KernelSpec::default();
        let sh = ShiftTuple::generic(1.0);
        let nodes = VNodes::new(50.0, &sh, 1, &k).unwrap();
        let interp = VInterp::new(&nodes, 1.0, 16.0);
        for l in [1.0f64, 2.37, 5.5, 7.123, 11.9, 15.99] {
            let exact = v_weight(l.exp(), 50.0, &sh, 1, &k).unwrap().value;
            assert!((nodes.eval_ln(l) - exact).norm() < 1e-11, "nodes at {l}");
            assert!((interp.eval(l) - exact).norm() < 1e-11, "interp at {l}");
        }
    }

    #[test]
    fn xi_symmetry() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        assert!(xi_symmetry_residual(c(0.2, 0.0), 30.0, &ShiftTuple::zero(), &chi).unwrap() <= 1e-9);
        let sh = ShiftTuple::real(0.03, 0.01, -0.03, -0.01);
        assert!(xi_symmetry_residual(c(0.0, 0.0), 30.0, &sh, &chi).unwrap() <= 1e-12);
        let chi = DirichletCharacter::kronecker(5).unwrap();
        let sh = ShiftTuple::generic(1.3);
        assert!(xi_symmetry_residual(c(0.1, 0.4), 40.0, &sh, &chi).unwrap() <= 1e-9);
    }

    #[test]
    fn identity_small() {
        let chi = DirichletCharacter::kronecker(-3).unwrap();
        let sh = ShiftTuple::real(0.01, 0.02, 0.03, 0.05);
        let k = KernelSpec::default();
        let m = default_mn_max(50.0, &sh, &chi, &k, AFE_V_CUT).unwrap();
        let e = afe_residual(50.0, &sh, &chi, m, &k, 1e-6).unwrap();
        assert!(e.residual <= 1e-6, "{e:?}");
        let tiny = afe_residual(50.0, &sh, &chi, 50, &k, 1e-6);
        assert!(matches!(tiny, Err(Error::Truncation(_))));
        // The conductor length alone is far too short for this kernel.
        let short = (10.0 * conductor_length(50.0, 3)).ceil() as u64;
        assert!(matches!(afe_residual(50.0, &sh, &chi, short, &k, 1e-6), Err(Error::Truncation(_))));
    }

    #[test]
    fn conjugate_phase_fails() {
        let chi = crate::characters::quartic_mod5();
        let sh = ShiftTuple::generic(1.0);
        let k = KernelSpec::default();
        let m = default_mn_max(30.0, &sh, &chi, &k, AFE_V_CUT).unwrap();
        let good = afe_evaluate(30.0, &sh, &chi, m, &k, AfePhase::Expansion).unwrap();
        let lit = afe_evaluate(30.0, &sh, &chi, m, &k, AfePhase::Conjugate).unwrap();
        assert!(good.residual <= 1e-6, "{good:?}");
        assert!(lit.residual > 1e-2 * lit.lhs.norm(), "{lit:?}");
    }
}
