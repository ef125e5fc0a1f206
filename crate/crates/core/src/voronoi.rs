//! The additively twisted series E_{alpha,beta}(s, c/d, chi), its poles and
//! functional equation, the Voronoi summation formula, and the delta-symbol
//! expansion through Ramanujan sums.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, gcd_i, mod_inverse, pow_neg, ramanujan_sum_mobius, shifted_divisor_table, twisted_sigma};
use crate::characters::{e_d, DirichletCharacter};
use crate::error::{Error, Result};
use crate::numkernel::{adaptive_integral_on, bessel_b, bessel_k, complex_gamma, dirichlet_l, hurwitz_zeta, QuadratureSpec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpKind {
    /// exp(-((x - center)/width)^2 / 2), cut where it drops below 1e-17.
    GaussianWindow,
    /// 1 on the middle half of [center - width, center + width], with
    /// exp(-1/x) transitions to 0 at the ends.
    SmoothedIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center: f64,
    pub width: f64,
    pub kind: BumpKind,
    /// Multiplies every value; used to normalize.
    pub scale: f64,
}

const GAUSS_CUT: f64 = 9.0;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

impl BumpFunction {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Self { center, width, kind: BumpKind::GaussianWindow, scale: 1.0 }
    }

    pub fn indicator(center: f64, width: f64) -> Self {
        Self { center, width, kind: BumpKind::SmoothedIndicator, scale: 1.0 }
    }

    pub fn support(&self) -> (f64, f64) {
        let h = match self.kind {
            BumpKind::GaussianWindow => GAUSS_CUT * self.width,
            BumpKind::SmoothedIndicator => self.width,
        };
        (self.center - h, self.center + h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            return 0.0;
        }
        let v = match self.kind {
            BumpKind::GaussianWindow => {
                let u = (x - self.center) / self.width;
                (-0.5 * u * u).exp()
            }
            BumpKind::SmoothedIndicator => {
                let ramp = 0.5 * self.width;
                smooth_step((x - lo) / ramp) * smooth_step((hi - x) / ramp)
            }
        };
        v * self.scale
    }

    /// Copy rescaled so that the values at the integers sum to 1.
    pub fn normalized_on_integers(&self) -> Result<Self> {
        let (lo, hi) = self.support();
        let total: f64 = (lo.ceil().max(1.0) as u64..=hi.floor() as u64).map(|n| self.eval(n as f64)).sum();
        if !(total > 0.0) {
            return Err(Error::Precondition("bump has no mass on the integers".into()));
        }
        Ok(Self { scale: self.scale / total, ..*self })
    }

    fn breakpoints(&self, panels: usize) -> Vec<f64> {
        let (lo, hi) = self.support();
        (0..=panels).map(|j| lo + (hi - lo) * j as f64 / panels as f64).collect()
    }
}

fn check_coprime(c: i64, d: u64) -> Result<()> {
    if d == 0 || gcd_i(c, d as i64) != 1 {
        return Err(Error::NonCoprime(format!("(c,d)=({c},{d})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: C64,
    pub tail_estimate: f64,
}

/// Partial sum of E_{alpha,beta}(s, c/d, chi) up to n_max with a divisor-bound
/// tail estimate.
pub fn e_series(alpha: C64, beta: C64, s: C64, c: i64, d: u64, chi: &DirichletCharacter, n_max: usize) -> Result<SeriesValue> {
    check_coprime(c, d)?;
    let theta = (-alpha.re).max(-beta.re).max(0.0);
    let a = s.re - theta;
    if a <= 1.05 {
        return Err(Error::Domain(format!("E series needs Re s - max(0, -Re alpha, -Re beta) > 1.05, got {a}")));
    }
    let f = shifted_divisor_table(alpha, beta, chi, n_max);
    let value = (1..=n_max)
        .into_par_iter()
        .map(|n| f[n] * e_d(((c as i128 * n as i128).rem_euclid(d as i128)) as i64, d) * pow_neg(n as f64, s))
        .sum::<C64>();
    // sum_{n > N} tau(n) n^{-a} ~ N^{1-a} ((ln N + 2 gamma)/(a-1) + 1/(a-1)^2)
    let nf = n_max as f64;
    let b = a - 1.0;
    let tail_estimate = nf.powf(-b) * ((nf.ln() + 1.1544) / b + 1.0 / (b * b));
    Ok(SeriesValue { value, tail_estimate })
}

/// d1 = lcm(d, q) and rho = (d, q).
fn rho_d1(d: u64, q: u64) -> (u64, u64) {
    let rho = gcd(d, q);
    (rho, d / rho * q)
}

/// a^{-s} zeta(s, j/a) for j = 1..=a.
fn hurwitz_row(s: C64, a: u64) -> Result<Vec<C64>> {
    let scale = pow_neg(a as f64, s);
    (1..=a).into_par_iter().map(|j| Ok(scale * hurwitz_zeta(s, j as f64 / a as f64)?)).collect()
}

/// E_{alpha,beta}(s, c/d, chi) for any s off the poles, by splitting n = ab
/// into residue classes a mod d and b mod lcm(d,q):
/// sum chi(b0) e_d(c a0 b0) d^{-alpha-s} zeta(s+alpha, a0/d) d1^{-beta-s} zeta(s+beta, b0/d1).
pub fn e_continued(alpha: C64, beta: C64, s: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<C64> {
    check_coprime(c, d)?;
    let (_, d1) = rho_d1(d, chi.modulus());
    let za = hurwitz_row(s + alpha, d)?;
    let zb = hurwitz_row(s + beta, d1)?;
    let mut acc = C64::new(0.0, 0.0);
    for b0 in 1..=d1 {
        let x = chi.value(b0);
        if x == C64::new(0.0, 0.0) {
            continue;
        }
        let mut inner = C64::new(0.0, 0.0);
        for a0 in 1..=d {
            let ph = (c as i128 * a0 as i128 % d as i128 * b0 as i128).rem_euclid(d as i128) as i64;
            inner += e_d(ph, d) * za[(a0 - 1) as usize];
        }
        acc += x * inner * zb[(b0 - 1) as usize];
    }
    Ok(acc)
}

/// S(u, v) = sum_{b = cu (mod d), 1 <= b <= d1} chi(b) e_{d1}(bv) for u mod d, v mod d1.
fn sigma_kernel(c: i64, d: u64, chi: &DirichletCharacter) -> Vec<Vec<C64>> {
    let (_, d1) = rho_d1(d, chi.modulus());
    (1..=d)
        .map(|u| {
            let target = (c as i128 * u as i128).rem_euclid(d as i128) as u64;
            let start = if target == 0 { d } else { target };
            (1..=d1)
                .map(|v| {
                    let mut acc = C64::new(0.0, 0.0);
                    let mut b = start;
                    while b <= d1 {
                        acc += chi.value(b) * e_d((b as u128 * v as u128 % d1 as u128) as i64, d1);
                        b += d;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// The dual series sum_n sigma_{alpha,beta}(n, c/d, chi) n^{-s}, continued by
/// the same residue-class splitting (u mod d, v mod lcm(d,q)).
pub fn e_tilde_continued(alpha: C64, beta: C64, s: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<C64> {
    check_coprime(c, d)?;
    let (_, d1) = rho_d1(d, chi.modulus());
    let kern = sigma_kernel(c, d, chi);
    let zu = hurwitz_row(s + alpha, d)?;
    let zv = hurwitz_row(s + beta, d1)?;
    let mut acc = C64::new(0.0, 0.0);
    for (u, row) in kern.iter().enumerate() {
        let inner: C64 = row.iter().zip(&zv).map(|(k, z)| k * z).sum();
        acc += zu[u] * inner;
    }
    Ok(acc)
}

/// Partial sum of the dual series up to n_max, by direct evaluation of sigma.
pub fn e_tilde_series(alpha: C64, beta: C64, s: C64, c: i64, d: u64, chi: &DirichletCharacter, n_max: u64) -> Result<C64> {
    check_coprime(c, d)?;
    (1..=n_max).into_par_iter().map(|n| Ok(twisted_sigma(alpha, beta, n, c, d, chi)? * pow_neg(n as f64, s))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EPoles {
    /// (location, residue) pairs; empty when E is entire.
    pub poles: Vec<(C64, C64)>,
}

impl EPoles {
    pub fn is_entire(&self) -> bool {
        self.poles.is_empty()
    }
}

/// Poles of E_{alpha,beta}(s, c/d, chi) and their residues in closed form.
/// For q = 1 both cases apply at once and E has two simple poles.
pub fn e_residue(alpha: C64, beta: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<EPoles> {
    check_coprime(c, d)?;
    let q = chi.modulus();
    let (rho, _) = rho_d1(d, q);
    let mut poles = Vec::new();
    if rho == 1 {
        let e = C64::new(1.0, 0.0) - alpha + beta;
        poles.push((1.0 - alpha, chi.value(d) * dirichlet_l(e, chi)? * pow_neg(d as f64, e)));
    }
    if rho == q {
        let e = C64::new(1.0, 0.0) + alpha - beta;
        let chib = chi.conj();
        let v =
            chib.value_i(c) * chi.gauss_sum() * dirichlet_l(e, &chib)? * pow_neg(q as f64, beta - alpha) * pow_neg(d as f64, e);
        poles.push((1.0 - beta, v));
    }
    Ok(EPoles { poles })
}

/// Residues at 1 - alpha and 1 - beta read off the residue-class splitting.
pub fn e_residue_continued(alpha: C64, beta: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<(C64, C64)> {
    check_coprime(c, d)?;
    let (_, d1) = rho_d1(d, chi.modulus());
    let one = C64::new(1.0, 0.0);
    let zb = hurwitz_row(one - alpha + beta, d1)?;
    let za = hurwitz_row(one - beta + alpha, d)?;
    let (mut ra, mut rb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for b0 in 1..=d1 {
        let x = chi.value(b0);
        for a0 in 1..=d {
            let ph = (c as i128 * a0 as i128 % d as i128 * b0 as i128).rem_euclid(d as i128) as i64;
            let w = x * e_d(ph, d);
            ra += w * zb[(b0 - 1) as usize] / d as f64;
            rb += w * za[(a0 - 1) as usize] / d1 as f64;
        }
    }
    Ok((ra, rb))
}

/// theta(s) = e^{pi i (s + (alpha+beta)/2)} + chi(-1) e^{-pi i (s + (alpha+beta)/2)}.
pub fn theta(s: C64, alpha: C64, beta: C64, chi: &DirichletCharacter) -> C64 {
    let z = C64::new(0.0, PI) * (s + (alpha + beta) * 0.5);
    let sign = if chi.parity() == 0 { 1.0 } else { -1.0 };
    z.exp() + sign * (-z).exp()
}

/// The constant in front of the first dual series: theta(-alpha). For even
/// chi this equals theta(-beta); for odd chi it is -theta(-beta).
pub fn theta_constant(alpha: C64, beta: C64, chi: &DirichletCharacter) -> C64 {
    theta(-alpha, alpha, beta, chi)
}

/// Which constant multiplies the first dual series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaForm {
    /// theta(-alpha), which the residual test confirms for both parities.
    Verified,
    /// theta(-beta); differs by χ(−1).
    Beta,
}

/// H_{alpha,beta}(s, d, q).
pub fn h_factor(s: C64, alpha: C64, beta: C64, d: u64, q: u64) -> Result<C64> {
    let (rho, _) = rho_d1(d, q);
    let one = C64::new(1.0, 0.0);
    let two_pi = (2.0 * PI).ln();
    let l = (s * 2.0 - 2.0 + alpha + beta) * two_pi - (s * 2.0 - 1.0 + alpha + beta) * (d as f64).ln()
        + (s + beta) * (rho as f64 / q as f64).ln();
    Ok(l.exp() * complex_gamma(one - s - alpha)? * complex_gamma(one - s - beta)?)
}

/// Relative residual of the functional equation of E at s, both sides
/// evaluated through the residue-class splitting.
pub fn functional_e_residual(alpha: C64, beta: C64, s: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<f64> {
    functional_e_residual_with(alpha, beta, s, c, d, chi, ThetaForm::Verified)
}

pub fn functional_e_residual_with(
    alpha: C64,
    beta: C64,
    s: C64,
    c: i64,
    d: u64,
    chi: &DirichletCharacter,
    form: ThetaForm,
) -> Result<f64> {
    check_coprime(c, d)?;
    let cbar = mod_inverse(c, d).ok_or_else(|| Error::NonCoprime(format!("({c},{d})")))? as i64;
    let one = C64::new(1.0, 0.0);
    let lhs = e_continued(alpha, beta, s, c, d, chi)?;
    let th0 = match form {
        ThetaForm::Verified => theta_constant(alpha, beta, chi),
        ThetaForm::Beta => theta(-beta, alpha, beta, chi),
    };
    let ths = theta(s, alpha, beta, chi);
    let plus = e_tilde_continued(-alpha, -beta, one - s, cbar, d, chi)?;
    let minus = e_tilde_continued(-alpha, -beta, one - s, -cbar, d, chi)?;
    let rhs = h_factor(s, alpha, beta, d, chi.modulus())? * (th0 * plus - ths * minus);
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300))
}

/// Deliberate corruptions of the summation formula, used to check that the
/// residual test has power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VoronoiMutation {
    None,
    DropResidue,
    SwapBesselKinds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VoronoiReport {
    pub lhs: C64,
    pub rhs_residue_term: C64,
    pub rhs_plus: C64,
    pub rhs_minus: C64,
    pub residual: f64,
    pub dual_terms: u64,
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-13, ..QuadratureSpec::default() }
}

/// int g(x) kernel(4 pi sqrt(rho x y / q)/d) (x y)^{-(alpha+beta)/2} dx.
fn bessel_transform<F: Fn(f64) -> Result<C64> + Sync>(
    g: &BumpFunction,
    y: f64,
    rho: u64,
    q: u64,
    d: u64,
    alpha: C64,
    beta: C64,
    kernel: F,
) -> Result<C64> {
    let k = 4.0 * PI * (rho as f64 * y / q as f64).sqrt() / d as f64;
    let failed = std::sync::Mutex::new(None);
    let f = |x: f64| {
        let gx = g.eval(x);
        if gx == 0.0 {
            return C64::new(0.0, 0.0);
        }
        match kernel(k * x.sqrt()) {
            Ok(b) => b * gx * pow_neg(x * y, (alpha + beta) * 0.5),
            Err(e) => {
                failed.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let r = adaptive_integral_on(f, &g.breakpoints(72), &quad_spec())?;
    if let Some(e) = failed.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    Ok(r.value)
}

/// Both sides of the Voronoi summation formula for a Gaussian window.
pub fn voronoi_evaluate(
    g: &BumpFunction,
    alpha: C64,
    beta: C64,
    c: i64,
    d: u64,
    chi: &DirichletCharacter,
    mutation: VoronoiMutation,
) -> Result<VoronoiReport> {
    check_coprime(c, d)?;
    if g.kind != BumpKind::GaussianWindow {
        return Err(Error::Precondition("Voronoi residual needs a Gaussian window".into()));
    }
    let (lo, hi) = g.support();
    if lo < 1.0 || hi > 1e4 {
        return Err(Error::Precondition(format!("window support [{lo}, {hi}] not inside [1, 1e4]")));
    }
    if (alpha - beta).norm() < 1e-6 {
        return Err(Error::Precondition("Voronoi needs alpha != beta (simple poles)".into()));
    }
    let q = chi.modulus();
    let (rho, _) = rho_d1(d, q);
    let parity = chi.parity();

    let n_hi = hi.floor() as usize;
    let f = shifted_divisor_table(alpha, beta, chi, n_hi);
    let lhs: C64 = (lo.ceil() as usize..=n_hi)
        .map(|n| f[n] * e_d(((c as i128 * n as i128).rem_euclid(d as i128)) as i64, d) * g.eval(n as f64))
        .sum();

    let mut rhs_residue_term = C64::new(0.0, 0.0);
    if mutation != VoronoiMutation::DropResidue {
        for (z, r) in e_residue(alpha, beta, c, d, chi)?.poles {
            let m = adaptive_integral_on(|x| pow_neg(x, C64::new(1.0, 0.0) - z) * g.eval(x), &g.breakpoints(72), &quad_spec())?;
            rhs_residue_term += r * m.value;
        }
    }

    let cbar = mod_inverse(c, d).ok_or_else(|| Error::NonCoprime(format!("({c},{d})")))? as i64;
    let th = theta_constant(alpha, beta, chi);
    let pre = pow_neg(rho as f64 / q as f64, (alpha - beta) * 0.5 - 1.0) * (2.0 / d as f64);
    let nu_k = beta - alpha;
    let nu_b = alpha - beta;
    // Window bandwidth: its Fourier transform is below e^{-72} past 12/width.
    // The Bessel phase has x-frequency (2 pi/d) sqrt(rho y/(q x)).
    let omega = 12.0 / g.width;
    let y_cut = (omega * d as f64 / (2.0 * PI)).powi(2) * q as f64 * hi / rho as f64;
    let n_dual = y_cut.ceil() as u64 + 2;
    let k_kind = |z: f64| bessel_k(nu_k, z);
    let b_kind = |z: f64| bessel_b(nu_b, z, parity);
    let terms: Vec<(C64, C64)> = (1..=n_dual)
        .into_par_iter()
        .map(|n| {
            let y = n as f64;
            let (gp, gm) = match mutation {
                VoronoiMutation::SwapBesselKinds => (
                    bessel_transform(g, y, rho, q, d, alpha, beta, |z| bessel_b(nu_k, z, parity))?,
                    bessel_transform(g, y, rho, q, d, alpha, beta, |z| bessel_k(nu_b, z))?,
                ),
                _ => (
                    bessel_transform(g, y, rho, q, d, alpha, beta, k_kind)?,
                    bessel_transform(g, y, rho, q, d, alpha, beta, b_kind)?,
                ),
            };
            let sp = twisted_sigma(-alpha, -beta, n, cbar, d, chi)?;
            let sm = twisted_sigma(-alpha, -beta, n, -cbar, d, chi)?;
            Ok((sp * gp * th * pre, -sm * gm * PI * pre))
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs_plus: C64 = terms.iter().map(|t| t.0).sum();
    let rhs_minus: C64 = terms.iter().map(|t| t.1).sum();
    let rhs = rhs_residue_term + rhs_plus + rhs_minus;
    Ok(VoronoiReport { lhs, rhs_residue_term, rhs_plus, rhs_minus, residual: (lhs - rhs).norm(), dual_terms: n_dual })
}

pub fn voronoi_residual(g: &BumpFunction, alpha: C64, beta: C64, c: i64, d: u64, chi: &DirichletCharacter) -> Result<f64> {
    Ok(voronoi_evaluate(g, alpha, beta, c, d, chi, VoronoiMutation::None)?.residual)
}

/// The weight omega of the delta method: a smoothed indicator of [Omega, 2 Omega]
/// normalized to unit sum over the integers.
pub fn delta_omega(omega: f64) -> Result<BumpFunction> {
    if !(omega >= 2.0) {
        return Err(Error::Precondition(format!("Omega must be at least 2, got {omega}")));
    }
    BumpFunction::indicator(1.5 * omega, 0.5 * omega).normalized_on_integers()
}

/// Delta_d(u) = sum_m (dm)^{-1} (omega(dm) - omega(|u|/(dm))).
pub fn delta_weight(d: u64, u: i64, omega: &BumpFunction) -> f64 {
    delta_weight_with(d, u.unsigned_abs() as f64, omega)
}

fn delta_weight_with(d: u64, u: f64, omega: &BumpFunction) -> f64 {
    let (_, hi) = omega.support();
    let (lo, _) = omega.support();
    let m_max = ((hi / d as f64).max(u / (lo * d as f64))).ceil() as u64 + 1;
    (1..=m_max)
        .map(|m| {
            let dm = (d * m) as f64;
            (omega.eval(dm) - omega.eval(u / dm)) / dm
        })
        .sum()
}

/// |delta(n) - sum_{d <= d_max} Delta_d(n) c_d(n)|.
pub fn delta_symbol_residual(n: i64, omega: &BumpFunction, d_max: u64) -> Result<f64> {
    delta_residual_with(n, omega, d_max, false)
}

fn delta_residual_with(n: i64, omega: &BumpFunction, d_max: u64, signed: bool) -> Result<f64> {
    let total: f64 = (1..=omega.support().1.ceil() as u64).map(|m| omega.eval(m as f64)).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("omega sums to {total} over the integers, not 1")));
    }
    let u = if signed { n as f64 } else { n.unsigned_abs() as f64 };
    let s: f64 = (1..=d_max).map(|d| delta_weight_with(d, u, omega) * ramanujan_sum_mobius(d, n) as f64).sum();
    let target = if n == 0 { 1.0 } else { 0.0 };
    Ok((s - target).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::quartic_mod5;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn chi_for(q: u64) -> DirichletCharacter {
        match q {
            1 => DirichletCharacter::trivial(),
            3 => DirichletCharacter::kronecker(-3).unwrap(),
            4 => DirichletCharacter::kronecker(-4).unwrap(),
            5 => quartic_mod5(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn series_against_products() {
        let one = DirichletCharacter::trivial();
        let z = c(0.0, 0.0);
        let s = c(2.5, 0.0);
        let v = e_series(z, z, s, 1, 1, &one, 100_000).unwrap();
        let want = crate::numkernel::riemann_zeta(s).unwrap().powi(2);
        assert!((v.value - want).norm() < 1e-5);
        let chi = chi_for(3);
        let (a, b) = (c(0.01, 0.0), c(0.03, 0.0));
        let v = e_series(a, b, s, 1, 1, &chi, 100_000).unwrap();
        let want = crate::numkernel::riemann_zeta(s + a).unwrap() * dirichlet_l(s + b, &chi).unwrap();
        assert!((v.value - want).norm() < 1e-5);
        assert!(e_series(z, z, c(1.04, 0.0), 1, 1, &one, 10).is_err());
        assert!(e_series(z, z, s, 2, 4, &one, 10).is_err());
    }

    #[test]
    fn continuation_matches_series() {
        let (a, b) = (c(0.02, 0.01), c(-0.03, 0.02));
        let s = c(2.2, 0.7);
        for (q, d, cc) in [(3, 2, 1), (3, 3, 2), (4, 2, 1), (5, 7, 3), (5, 5, 4)] {
            let chi = chi_for(q);
            let dir = e_series(a, b, s, cc, d, &chi, 200_000).unwrap();
            let hur = e_continued(a, b, s, cc, d, &chi).unwrap();
            assert!((dir.value - hur).norm() < 1e-5, "E at q={q} d={d}");
            let ds = e_tilde_series(a, b, s, cc, d, &chi, 20_000).unwrap();
            let dh = e_tilde_continued(a, b, s, cc, d, &chi).unwrap();
            assert!((ds - dh).norm() < 1e-3 * dh.norm().max(1.0), "E~ at q={q} d={d}: {ds} {dh}");
        }
    }

    #[test]
    fn residues() {
        let z = c(0.0, 0.0);
        let chi = chi_for(3);
        let p = e_residue(z, z, 1, 2, &chi).unwrap();
        let want = chi.value(2) * dirichlet_l(c(1.0, 0.0), &chi).unwrap() / 2.0;
        assert_eq!(p.poles.len(), 1);
        assert!((p.poles[0].1 - want).norm() < 1e-14);
        let p = e_residue(z, z, 1, 3, &chi).unwrap();
        let want = chi.gauss_sum() * dirichlet_l(c(1.0, 0.0), &chi.conj()).unwrap() / 3.0;
        assert!((p.poles[0].1 - want).norm() < 1e-14);
        assert!(e_residue(z, z, 1, 2, &chi_for(4)).unwrap().is_entire());
        // Against the residue-class splitting.
        let (a, b) = (c(0.02, 0.01), c(-0.03, 0.02));
        for (q, d, cc) in [(3, 2, 1), (3, 3, 2), (4, 2, 1), (4, 4, 3), (5, 5, 2), (5, 3, 1), (1, 3, 2)] {
            let chi = chi_for(q);
            let (ra, rb) = e_residue_continued(a, b, cc, d, &chi).unwrap();
            let poles = e_residue(a, b, cc, d, &chi).unwrap().poles;
            let at = |z: C64| poles.iter().find(|p| (p.0 - z).norm() < 1e-12).map(|p| p.1).unwrap_or(c(0.0, 0.0));
            let one = c(1.0, 0.0);
            assert!((ra - at(one - a)).norm() < 1e-10, "q={q} d={d}: {ra} vs {}", at(one - a));
            assert!((rb - at(one - b)).norm() < 1e-10, "q={q} d={d}: {rb} vs {}", at(one - b));
        }
    }

    #[test]
    fn theta_and_h() {
        let (a, b) = (c(0.01, 0.02), c(0.03, -0.01));
        let s = c(-0.3, 0.4);
        let u = (s + (a + b) * 0.5) * PI;
        assert!((theta(s, a, b, &chi_for(3)) - c(0.0, 2.0) * u.sin()).norm() < 1e-13);
        let even = DirichletCharacter::kronecker(5).unwrap();
        assert!((theta(s, a, b, &even) - u.cos() * 2.0).norm() < 1e-13);
        let r = h_factor(s, a, b, 6, 3).unwrap() / h_factor(s, a, b, 3, 3).unwrap();
        let want = pow_neg(2.0, s * 2.0 - 1.0 + a + b);
        assert!((r - want).norm() < 1e-13);
    }

    #[test]
    fn functional_equation() {
        let (a, b) = (c(0.02, 0.01), c(-0.03, 0.02));
        for (q, d, cc) in [(1, 1, 1), (1, 4, 3), (3, 2, 1), (3, 3, 2), (4, 2, 1), (4, 4, 3), (5, 5, 2), (5, 3, 1), (5, 10, 3)] {
            for s in [c(-0.3, 0.4), c(-0.15, -1.2)] {
                let r = functional_e_residual(a, b, s, cc, d, &chi_for(q)).unwrap();
                assert!(r < 1e-10, "q={q} d={d} s={s}: {r}");
                let lit = functional_e_residual_with(a, b, s, cc, d, &chi_for(q), ThetaForm::Beta).unwrap();
                if chi_for(q).parity() == 1 {
                    assert!(lit > 1e-3, "q={q} d={d}: {lit}");
                } else {
                    assert!(lit < 1e-10);
                }
            }
        }
    }

    #[test]
    fn delta_expansion() {
        let omega = delta_omega(20.0).unwrap();
        assert!((delta_symbol_residual(0, &omega, 60).unwrap()) < 1e-8);
        assert!(delta_symbol_residual(7, &omega, 60).unwrap() < 1e-8);
        for n in -50..=50 {
            assert!(delta_symbol_residual(n, &omega, 60).unwrap() < 1e-8, "n={n}");
        }
        for d in 40..60 {
            for u in [-400i64, -17, 0, 3, 400] {
                assert_eq!(delta_weight(d, u, &omega), 0.0);
            }
        }
        // Without |u| the expansion fails for negative n with a divisor in (Omega, 2 Omega).
        assert!(delta_residual_with(-30, &omega, 60, true).unwrap() > 1e-3);
    }

    #[test]
    fn summation_formula() {
        let g = BumpFunction::gaussian(500.0, 20.0);
        let (a, b) = (c(0.01, 0.0), c(0.03, 0.0));
        let chi = chi_for(3);
        let r = voronoi_evaluate(&g, a, b, 1, 2, &chi, VoronoiMutation::None).unwrap();
        assert!(r.residual < 1e-6, "{}", r.residual);
        assert!(r.rhs_minus.norm() > 1e-2);
        for m in [VoronoiMutation::DropResidue, VoronoiMutation::SwapBesselKinds] {
            let bad = voronoi_evaluate(&g, a, b, 1, 2, &chi, m).unwrap();
            assert!(bad.residual > 1e-2, "{m:?}: {}", bad.residual);
        }
        assert!(voronoi_evaluate(&BumpFunction::indicator(500.0, 20.0), a, b, 1, 2, &chi, VoronoiMutation::None).is_err());
        assert!(voronoi_evaluate(&g, a, a, 1, 2, &chi, VoronoiMutation::None).is_err());
    }
}
