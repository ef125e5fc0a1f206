//! Adaptive Gauss–Kronrod quadrature on the real axis and on vertical lines.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Half-height of the truncated vertical line.
    pub truncation_height: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 20_000, truncation_height: 6.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Precondition("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Precondition("max_subdivisions must be at least 1".into()));
        }
        if !(self.truncation_height > 0.0) {
            return Err(Error::Precondition("truncation_height must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn gk15<F: Fn(f64) -> C64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [C64::new(0.0, 0.0); 15];
    fv[7] = f(c);
    for j in 0..7 {
        fv[j] = f(c - h * XGK[j]);
        fv[14 - j] = f(c + h * XGK[j]);
    }
    let mut k = fv[7] * WGK[7];
    let mut g = fv[7] * WG[3];
    for j in 0..7 {
        k += (fv[j] + fv[14 - j]) * WGK[j];
        if j % 2 == 1 {
            g += (fv[j] + fv[14 - j]) * WG[j / 2];
        }
    }
    let mean = k * 0.5;
    let mut asc = WGK[7] * (fv[7] - mean).norm();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).norm() + (fv[14 - j] - mean).norm());
    }
    let diff = ((k - g) * h).norm();
    let asc = asc * h.abs();
    let mut err = diff;
    if asc > 0.0 && diff > 0.0 {
        err = asc * (200.0 * diff / asc).powf(1.5).min(1.0);
    }
    // never trust an estimate below the rounding floor of the panel
    err = err.max(50.0 * f64::EPSILON * (k * h).norm());
    Panel { a, b, value: k * h, error: err }
}

fn total(panels: &[Panel]) -> (C64, f64) {
    let mut v = C64::new(0.0, 0.0);
    let mut comp = C64::new(0.0, 0.0);
    let mut e = 0.0;
    for p in panels {
        // Kahan summation for reproducibility at large panel counts
        let y = p.value - comp;
        let t = v + y;
        comp = (t - v) - y;
        v = t;
        e += p.error;
    }
    (v, e)
}

fn check_breakpoints(bp: &[f64]) -> Result<()> {
    if bp.len() < 2 {
        return Err(Error::Precondition("need at least two breakpoints".into()));
    }
    if bp.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// int_a^b f(t) dt by globally adaptive GK15.
pub fn adaptive_integral<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    adaptive_integral_on(f, &[a, b], spec)
}

/// As [`adaptive_integral`] with a caller-supplied initial partition.
pub fn adaptive_integral_on<F: Fn(f64) -> C64>(f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    check_breakpoints(breakpoints)?;
    let mut panels: Vec<Panel> = breakpoints.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evals = 15 * panels.len();
    let mut splits = 0;
    loop {
        let (v, e) = total(&panels);
        if e <= spec.abs_tol.max(spec.rel_tol * v.norm()) {
            return Ok(QuadResult { value: v, error: e, evaluations: evals });
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::NonConvergence(format!("adaptive quadrature: error {e:.3e} after {splits} subdivisions")));
        }
        let (idx, _) = panels.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("non-empty");
        let p = panels[idx];
        let m = 0.5 * (p.a + p.b);
        panels[idx] = gk15(&f, p.a, m);
        panels.insert(idx + 1, gk15(&f, m, p.b));
        evals += 30;
        splits += 1;
    }
}

/// Parallel variant for expensive integrands. Panels are refined in
/// rounds and summed in positional order, so the result does not depend
/// on the thread count.
pub fn adaptive_integral_par<F: Fn(f64) -> C64 + Sync>(f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    check_breakpoints(breakpoints)?;
    let mut panels: Vec<Panel> = breakpoints.par_windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evals = 15 * panels.len();
    let mut splits = 0;
    loop {
        let (v, e) = total(&panels);
        let tol = spec.abs_tol.max(spec.rel_tol * v.norm());
        if e <= tol {
            return Ok(QuadResult { value: v, error: e, evaluations: evals });
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::NonConvergence(format!("parallel quadrature: error {e:.3e} after {splits} subdivisions")));
        }
        let per = tol / panels.len() as f64;
        let refine: Vec<bool> = panels.iter().map(|p| p.error > per).collect();
        let halves: Vec<(f64, f64)> = panels
            .iter()
            .zip(&refine)
            .filter(|(_, r)| **r)
            .flat_map(|(p, _)| {
                let m = 0.5 * (p.a + p.b);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        let fresh: Vec<Panel> = halves.par_iter().map(|&(a, b)| gk15(&f, a, b)).collect();
        evals += 15 * fresh.len();
        splits += fresh.len() / 2;
        let mut next = Vec::with_capacity(panels.len() + fresh.len() / 2);
        let mut it = fresh.into_iter();
        for (p, r) in panels.into_iter().zip(refine) {
            if r {
                next.push(it.next().expect("left half"));
                next.push(it.next().expect("right half"));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

/// (1/2 pi i) int_{(sigma)} f(s) ds, truncated to |Im s| <= H. The error
/// carries a Gaussian tail estimate built from |f| at the cut.
pub fn vertical_line_integral<F: Fn(C64) -> C64>(f: F, sigma: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    let h = spec.truncation_height;
    let n = (2.0 * h).ceil() as usize;
    let bp: Vec<f64> = (0..=n).map(|j| -h + 2.0 * h * j as f64 / n as f64).collect();
    let g = |u: f64| f(C64::new(sigma, u));
    let mut r = adaptive_integral_on(g, &bp, spec)?;
    r.value /= 2.0 * PI;
    r.error /= 2.0 * PI;
    let edge = f(C64::new(sigma, h)).norm() + f(C64::new(sigma, -h)).norm();
    r.error += edge / (2.0 * h) / (2.0 * PI);
    Ok(r)
}

#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn build_gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

/// Cached n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(build_gauss_legendre(n))).clone()
}

/// Composite Gauss–Legendre nodes and weights on [a, b].
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(order);
    let w = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * w;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(c + 0.5 * w * x);
            ws.push(0.5 * w * wt);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_period() {
        let spec = QuadratureSpec::default();
        let r = adaptive_integral(|t| C64::new(t, 0.0), 0.0, 1.0, &spec).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-15);
        let r = adaptive_integral(|t| C64::new(0.0, t).exp(), 0.0, 2.0 * PI, &spec).unwrap();
        assert!(r.value.norm() < 1e-13);
    }

    #[test]
    fn gaussian_on_line() {
        let spec = QuadratureSpec::default();
        let r = vertical_line_integral(|s| (s * s).exp(), 0.0, &spec).unwrap();
        assert!((r.value.re - 0.5 / PI.sqrt()).abs() < 1e-14);
        let r = vertical_line_integral(|s| (s * s).exp() * s, 0.0, &spec).unwrap();
        assert!(r.value.norm() < 1e-15);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let r = gauss_legendre(20);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn nonconvergence_reported() {
        let spec = QuadratureSpec { max_subdivisions: 3, ..QuadratureSpec::default() };
        let r = adaptive_integral(|t| C64::new((1.0 / t).sin(), 0.0), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn parallel_matches_serial() {
        let spec = QuadratureSpec::default();
        let f = |t: f64| C64::new(0.0, 3.0 * t).exp() * (-t * t).exp();
        let bp: Vec<f64> = (0..=10).map(|j| -5.0 + j as f64).collect();
        let a = adaptive_integral_on(f, &bp, &spec).unwrap();
        let b = adaptive_integral_par(f, &bp, &spec).unwrap();
        assert!((a.value - b.value).norm() < 1e-13);
    }
}
