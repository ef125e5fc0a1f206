//! Verification suites: each runs one family of checks and returns the
//! residuals as check records. Shared by the CLI and the acceptance test.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::afe::{afe_evaluate, default_mn_max, AfePhase, Kernel, KernelSpec, AFE_V_CUT};
use crate::arith::{
    enumerate_pij_brute, enumerate_pij_param, factorize, gcd, twisted_ramanujan, twisted_ramanujan_closed, twisted_sigma,
    twisted_sigma_closed,
};
use crate::characters::{primitive_characters, quartic_mod5, DirichletCharacter};
use crate::error::{Error, Result};
use crate::eulerprod::{b_factor, b_factor_series, b_prime_factor, b_prime_factor_series, functional_identity_sides, Identity};
use crate::moment::{
    compare_with_table, diagonal_brute, diagonal_closed, mobius_mollifier, mollified_c2_check, motohashi_check,
    rj_cancellation_residuals, CriticalLineTable, WeightSpec,
};
use crate::offdiag::{u_ij_brute, u_ij_closed, SumTruncation};
use crate::report::CheckRecord;
use crate::shifts::ShiftTuple;
use crate::tolerances::*;
use crate::voronoi::{delta_omega, delta_symbol_residual, e_residue, voronoi_evaluate, BumpFunction, VoronoiMutation};
use crate::C64;

/// The character used for modulus q throughout the suites: the real odd
/// characters mod 3 and 4, the quartic character mod 5, trivial for q = 1.
pub fn standard_character(q: u64) -> Result<DirichletCharacter> {
    match q {
        1 => Ok(DirichletCharacter::trivial()),
        3 => DirichletCharacter::kronecker(-3),
        4 => DirichletCharacter::kronecker(-4),
        5 => Ok(quartic_mod5()),
        _ => primitive_characters(q)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Precondition(format!("no primitive character mod {q}"))),
    }
}

/// |a − b| / max(1, |a|, |b|).
fn mixed(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// Running maximum of a residual family.
struct Family {
    worst: f64,
    count: usize,
    at: String,
}

impl Family {
    fn new() -> Self {
        Self { worst: 0.0, count: 0, at: String::new() }
    }

    fn add(&mut self, r: f64, at: impl FnOnce() -> String) {
        self.count += 1;
        if r > self.worst || r.is_nan() {
            self.worst = if r.is_nan() { f64::INFINITY } else { r };
            self.at = at();
        }
    }

    fn record(self, suite: &str, name: &str, tol: f64, oracle: &str) -> CheckRecord {
        CheckRecord::at_most(suite, name, self.worst, tol, oracle)
            .with_details(json!({ "cases": self.count, "worst_at": self.at }))
    }
}

fn random_coprime_pairs(rng: &mut ChaCha8Rng, q: u64, n: usize, max: u64) -> Vec<(u64, u64)> {
    let mut out = vec![(1, 1), (q, 1), (1, q), (2 * q, 5), (7, 3 * q)];
    while out.len() < n {
        let mut h = rng.gen_range(1..=max);
        let mut k = rng.gen_range(1..=max);
        match out.len() % 3 {
            0 => h = q * rng.gen_range(1..=max / q),
            1 => k = q * rng.gen_range(1..=max / q),
            _ => {}
        }
        if gcd(h, k) == 1 {
            out.push((h, k));
        }
    }
    out.retain(|&(h, k)| gcd(h, k) == 1 && h <= max && k <= max);
    out
}

fn random_s(rng: &mut ChaCha8Rng, size: f64) -> C64 {
    C64::new(rng.gen_range(-size..size), rng.gen_range(-size..size))
}

/// Criterion 1: exact identities with no quadrature.
pub fn identities(qs: &[u64], seed: u64) -> Result<Vec<CheckRecord>> {
    let suite = "identities";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &q in qs {
        let tag = |s: &str| format!("{s} q={q}");

        let mut modulus = Family::new();
        let mut product = Family::new();
        for (j, chi) in primitive_characters(q).iter().enumerate() {
            let g = chi.gauss_sum();
            modulus.add((g.norm_sqr() - q as f64).abs() / q as f64, || format!("character {j}"));
            let want = chi.value_i(-1) * q as f64;
            product.add(mixed(g * chi.conj().gauss_sum(), want), || format!("character {j}"));
        }
        out.push(modulus.record(suite, &tag("gauss_sum_modulus"), EXACT_IDENTITY, "direct character sum"));
        out.push(product.record(suite, &tag("gauss_sum_product"), EXACT_IDENTITY, "direct character sum"));

        let chi = standard_character(q)?;
        let mut sigma = Family::new();
        let mut qbar = Family::new();
        for _ in 0..60 {
            let sh = ShiftTuple::random(&mut rng, 0.05);
            let d = rng.gen_range(1..=40u64);
            let c = loop {
                let c = rng.gen_range(-40..=40i64);
                if gcd(c.unsigned_abs(), d) == 1 {
                    break c;
                }
            };
            let n = rng.gen_range(1..=60u64);
            let brute = twisted_sigma(sh.alpha, sh.beta, n, c, d, &chi)?;
            let closed = twisted_sigma_closed(sh.alpha, sh.beta, n, c, d, &chi, None)?;
            sigma.add(mixed(brute, closed), || format!("n={n} c={c} d={d}"));
            // Second representative of the inverse in the intermediate case.
            let rho = gcd(d, q);
            if rho > 1 && rho < q {
                let (big_q, big_d) = (q / rho, d / rho);
                if let Some(inv) = crate::arith::mod_inverse(big_q as i64, big_d) {
                    let other = twisted_sigma_closed(sh.alpha, sh.beta, n, c, d, &chi, Some(inv as i64 + big_d as i64))?;
                    qbar.add(mixed(other, closed), || format!("n={n} c={c} d={d}"));
                }
            }
        }
        out.push(sigma.record(suite, &tag("twisted_sigma_closed_form"), EXACT_IDENTITY, "divisor-sum brute force"));
        if qbar.count > 0 {
            out.push(qbar.record(suite, &tag("twisted_sigma_inverse_choice"), EXACT_IDENTITY, "second representative"));
        }

        let mut ram = Family::new();
        for d in 1..=60u64 {
            for r in -12..=12i64 {
                if r == 0 {
                    continue;
                }
                match twisted_ramanujan_closed(d, r, &chi) {
                    Ok(v) => ram.add(mixed(v, twisted_ramanujan(d, r, &chi)), || format!("d={d} r={r}")),
                    Err(Error::Precondition(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        out.push(ram.record(suite, &tag("twisted_ramanujan_closed_form"), EXACT_IDENTITY, "direct exponential sum"));

        let pairs = random_coprime_pairs(&mut rng, q, 16, 100);
        let mut pij = Family::new();
        for &(h, k) in &pairs {
            for (i, j) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)] {
                let a = enumerate_pij_brute(i, j, h, k, q, 2000)?;
                let b = enumerate_pij_param(i, j, h, k, q, 2000)?;
                pij.add(if a == b { 0.0 } else { 1.0 }, || format!("P{i}{j} h={h} k={k}"));
            }
        }
        out.push(pij.record(suite, &tag("pij_generation"), EXACT_IDENTITY, "brute classification"));

        let mut bser = Family::new();
        let mut bpser = Family::new();
        let mut ids: Vec<(Identity, Family)> = Identity::ALL.iter().map(|&i| (i, Family::new())).collect();
        for &(h, k) in &pairs {
            let (hf, kf) = (factorize(h), factorize(k));
            let sh = ShiftTuple::random(&mut rng, 0.05);
            let s = random_s(&mut rng, 0.2);
            let closed = b_factor(&sh, &hf, &kf, &chi, s)?;
            let (series, _) = b_factor_series(&sh, &hf, &kf, &chi, s, None)?;
            bser.add(mixed(closed, series), || format!("h={h} k={k} s={s}"));
            let closed = b_prime_factor(&sh, &hf, &kf, &chi, s)?;
            let (series, _) = b_prime_factor_series(&sh, &hf, &kf, &chi, s, None)?;
            bpser.add(mixed(closed, series), || format!("h={h} k={k} s={s}"));
            for (id, fam) in ids.iter_mut() {
                if id.applies(h, k, q) {
                    let (l, r) = functional_identity_sides(*id, &sh, &hf, &kf, &chi, s)?;
                    fam.add(mixed(l, r), || format!("h={h} k={k} s={s}"));
                }
            }
        }
        out.push(bser.record(suite, &tag("b_closed_vs_series"), EXACT_IDENTITY, "truncated Euler series"));
        out.push(bpser.record(suite, &tag("b_prime_closed_vs_series"), EXACT_IDENTITY, "truncated Euler series"));
        for (id, fam) in ids {
            if fam.count > 0 {
                out.push(fam.record(suite, &tag(&format!("{id:?}")), EXACT_IDENTITY, "both sides of the identity"));
            }
        }

        if q > 1 {
            let kernel = KernelSpec::new(Kernel::Gaussian);
            let mut rj = Family::new();
            for j in 0..20 {
                let (h, k) = pairs[j % pairs.len()];
                let sh = ShiftTuple::random(&mut rng, 0.05);
                let r = rj_cancellation_residuals(h, k, &sh, &chi, &kernel)?;
                rj.add(r.iter().cloned().fold(0.0, f64::max), || format!("h={h} k={k}"));
            }
            out.push(rj.record(suite, &tag("rj_cancellation"), EXACT_IDENTITY, "dual evaluation of R and J"));
        }
    }
    Ok(out)
}

/// Criterion 2: the AFE on the q × t grid, and independence of the kernel.
pub fn afe(qs: &[u64], ts: &[f64], seed: u64) -> Result<Vec<CheckRecord>> {
    afe_with(qs, ts, seed, None)
}

/// [`afe`] with every double sum cut at a fixed `mn_max` instead of the
/// V-decay default.
pub fn afe_with(qs: &[u64], ts: &[f64], seed: u64, mn_max: Option<u64>) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let g1 = KernelSpec::new(Kernel::Gaussian);
    let g2 = KernelSpec::new(Kernel::HalfGaussian);
    for &q in qs {
        let chi = standard_character(q)?;
        for &t in ts {
            let sh = ShiftTuple::random(&mut rng, 0.05);
            let m1 = match mn_max {
                Some(m) => m,
                None => default_mn_max(t, &sh, &chi, &g1, AFE_V_CUT)?,
            };
            let e1 = afe_evaluate(t, &sh, &chi, m1, &g1, AfePhase::Expansion)?;
            if e1.tail_estimate > AFE_RESIDUAL {
                return Err(Error::Truncation(format!("q={q} t={t}: tail estimate {:.2e}", e1.tail_estimate)));
            }
            let m2 = match mn_max {
                Some(m) => m,
                None => default_mn_max(t, &sh, &chi, &g2, AFE_V_CUT)?,
            };
            let e2 = afe_evaluate(t, &sh, &chi, m2, &g2, AfePhase::Expansion)?;
            let details = json!({ "lhs": [e1.lhs.re, e1.lhs.im], "mn_max": m1, "tail_estimate": e1.tail_estimate });
            out.push(
                CheckRecord::at_most("afe", &format!("identity q={q} t={t}"), e1.residual, AFE_RESIDUAL, "zeta and L values")
                    .with_details(details),
            );
            out.push(CheckRecord::at_most(
                "afe",
                &format!("kernel_independence q={q} t={t}"),
                (e1.rhs - e2.rhs).norm(),
                KERNEL_INDEPENDENCE,
                "second kernel",
            ));
        }
    }
    Ok(out)
}

/// (q, d, c) cases of the Voronoi grid.
pub const VORONOI_GRID: [(u64, u64, i64); 6] = [(1, 1, 1), (3, 2, 1), (3, 3, 1), (4, 4, 1), (5, 2, 1), (5, 5, 2)];

/// Criterion 3: the Voronoi formula with a Gaussian window, and its two
/// mutations.
pub fn voronoi(grid: &[(u64, u64, i64)]) -> Result<Vec<CheckRecord>> {
    let g = BumpFunction::gaussian(500.0, 20.0);
    let (a, b) = (C64::new(0.01, 0.0), C64::new(0.03, 0.0));
    let mut out = Vec::new();
    for &(q, d, c) in grid {
        let chi = standard_character(q)?;
        let r = voronoi_evaluate(&g, a, b, c, d, &chi, VoronoiMutation::None)?;
        let details = json!({ "lhs": [r.lhs.re, r.lhs.im], "dual_terms": r.dual_terms });
        out.push(
            CheckRecord::at_most("voronoi", &format!("dual_side q={q} d={d} c={c}"), r.residual, VORONOI_RESIDUAL, "direct sum")
                .with_details(details),
        );
        if !e_residue(a, b, c, d, &chi)?.is_entire() {
            let m = voronoi_evaluate(&g, a, b, c, d, &chi, VoronoiMutation::DropResidue)?;
            out.push(CheckRecord::at_least(
                "voronoi",
                &format!("mutation_drop_residue q={q} d={d}"),
                m.residual,
                MUTATION_FLOOR,
                "direct sum",
            ));
        }
        if q > 1 {
            let m = voronoi_evaluate(&g, a, b, c, d, &chi, VoronoiMutation::SwapBesselKinds)?;
            out.push(CheckRecord::at_least(
                "voronoi",
                &format!("mutation_swap_bessel q={q} d={d}"),
                m.residual,
                MUTATION_FLOOR,
                "direct sum",
            ));
        }
    }
    Ok(out)
}

/// Criterion 4: the δ-symbol expansion for |n| ≤ n_max.
pub fn delta(omega: f64, n_max: i64) -> Result<Vec<CheckRecord>> {
    let w = delta_omega(omega)?;
    let d_max = (3.0 * omega).ceil() as u64;
    let mut fam = Family::new();
    for n in -n_max..=n_max {
        fam.add(delta_symbol_residual(n, &w, d_max)?, || format!("n={n}"));
    }
    Ok(vec![fam.record("delta", &format!("delta_expansion omega={omega}"), DELTA_RESIDUAL, "Kronecker delta")])
}

/// Points of absolute convergence used for the sum formulas.
pub const SUM_POINTS: [(f64, f64); 5] = [(1.5, 0.0), (1.5, 0.7), (1.6, -1.1), (1.8, 2.3), (2.0, -0.4)];

/// Criterion 5: the U_ij closed forms against their brute-force double sums.
pub fn sums(q: u64, seed: u64) -> Result<Vec<CheckRecord>> {
    let chi = standard_character(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sh = ShiftTuple::random(&mut rng, 0.05);
    let trunc = SumTruncation::new(20_000, 200_000);
    let cases: [(u8, u8, u64, u64); 4] = [(1, 1, 2, 5), (2, 2, 7, 2), (1, 2, q, q + 1), (2, 1, q + 1, q)];
    let mut out = Vec::new();
    for (i, j, h, k) in cases {
        if gcd(h, k) != 1 {
            continue;
        }
        let (hf, kf) = (factorize(h), factorize(k));
        for (re, im) in SUM_POINTS {
            let s = C64::new(re, im);
            let b = u_ij_brute(i, j, &hf, &kf, &chi, &sh, s, &trunc)?;
            let c = u_ij_closed(i, j, &hf, &kf, &chi, &sh, s)?;
            let tol = SUM_FORMULA_FLOOR.max(SUM_FORMULA_TAIL_FACTOR * b.tail_bound);
            out.push(
                CheckRecord::at_most(
                    "sums",
                    &format!("U{i}{j} q={q} h={h} k={k} s={re}{im:+}i"),
                    (b.value - c).norm(),
                    tol,
                    "truncated double sum",
                )
                .with_details(json!({ "tail_bound": b.tail_bound, "closed": [c.re, c.im] })),
            );
        }
    }
    Ok(out)
}

/// Heights of the trend criteria.
pub const TREND_HEIGHTS: [f64; 3] = [500.0, 1000.0, 2000.0];

/// Criterion 6: |closed − brute| of the diagonal, relative, and its decay
/// factor under doubling T.
pub fn diagonal(q: u64, pairs: &[(u64, u64)], heights: &[f64]) -> Result<Vec<CheckRecord>> {
    let chi = standard_character(q)?;
    let sh = ShiftTuple::generic(1.0);
    let kernel = KernelSpec::new(Kernel::Gaussian);
    let mut out = Vec::new();
    for &(h, k) in pairs {
        let mut rels = Vec::new();
        for &t in heights {
            let spec = WeightSpec::standard(t)?;
            let c = diagonal_closed(h, k, &sh, &chi, &spec, &kernel)?;
            let b = diagonal_brute(h, k, &sh, &chi, &spec, &kernel)?;
            rels.push((c.total() - b.parts.total()).norm() / c.total().norm());
        }
        for (w, pair) in rels.windows(2).enumerate() {
            out.push(
                CheckRecord::at_least(
                    "diagonal",
                    &format!("decay q={q} h={h} k={k} T={}->{}", heights[w], heights[w + 1]),
                    pair[0] / pair[1],
                    DIAGONAL_DECAY_FACTOR,
                    "l-sum with exact V and X",
                )
                .with_details(json!({ "relative_residuals": rels })),
            );
        }
    }
    Ok(out)
}

/// Criterion 7: oracle against the main term.
pub fn moment(qs: &[u64], pairs: &[(u64, u64)], heights: &[f64]) -> Result<Vec<CheckRecord>> {
    let sh = ShiftTuple::generic(1.0);
    let specs: Vec<WeightSpec> = heights.iter().map(|&t| WeightSpec::standard(t)).collect::<Result<_>>()?;
    let max_hk = pairs.iter().map(|&(h, k)| h * k).max().unwrap_or(1);
    let mut out = Vec::new();
    for &q in qs {
        let chi = standard_character(q)?;
        let start = Instant::now();
        let table = CriticalLineTable::for_weights(&sh, &chi, &specs, max_hk)?;
        for &(h, k) in pairs {
            let mut rels = Vec::new();
            for spec in &specs {
                let r = compare_with_table(&table, h, k, &sh, &chi, spec)?;
                let details = json!({
                    "oracle": [r.oracle.re, r.oracle.im],
                    "main_term": [r.main_term.re, r.main_term.im],
                    "oracle_nodes": r.oracle_nodes,
                    "node_density": r.node_density,
                });
                if spec.t == 1000.0 || spec.t == 2000.0 {
                    let tol = if spec.t == 1000.0 { MOMENT_REL_T1000 } else { MOMENT_REL_T2000 };
                    out.push(
                        CheckRecord::at_most(
                            "moment",
                            &format!("relative q={q} h={h} k={k} T={}", spec.t),
                            r.relative_residual,
                            tol,
                            "critical-line quadrature",
                        )
                        .with_details(details),
                    );
                }
                rels.push(r.relative_residual);
            }
            let worst = rels.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            let mut rec =
                CheckRecord::at_most("moment", &format!("decreasing q={q} h={h} k={k}"), worst, 1.0, "critical-line quadrature")
                    .with_details(json!({ "relative_residuals": rels, "heights": heights }));
            rec.passed = worst < 1.0;
            out.push(rec);
        }
        out.push(CheckRecord::at_most(
            "moment",
            &format!("runtime q={q}"),
            start.elapsed().as_secs_f64(),
            15.0 * 60.0,
            "wall clock",
        ));
    }
    Ok(out)
}

/// Criterion 8: the log² T coefficient of the zero-shift main term.
pub fn motohashi(d: i64, t: f64) -> Result<Vec<CheckRecord>> {
    let chi = DirichletCharacter::kronecker(d)?;
    let c = motohashi_check(&chi, &WeightSpec::standard(t)?)?;
    Ok(vec![CheckRecord::at_most(
        "motohashi",
        &format!("leading_constant D={d} T={t}"),
        c.relative_error,
        MOTOHASHI_REL,
        "zero-shift extrapolation",
    )
    .with_details(json!({ "extracted": c.extracted, "predicted": c.predicted, "literal_ratio": c.literal_ratio }))])
}

/// Criterion 9: c₂ of the mollified main term with a(n) = μ(n), n ≤ x.
pub fn mollified(d: i64, x: u64, t: f64) -> Result<Vec<CheckRecord>> {
    let chi = DirichletCharacter::kronecker(d)?;
    let coeffs = mobius_mollifier(x);
    mollified_coeffs(&chi, &coeffs, t)
}

pub fn mollified_coeffs(chi: &DirichletCharacter, coeffs: &[(u64, C64)], t: f64) -> Result<Vec<CheckRecord>> {
    let c = mollified_c2_check(coeffs, chi, &WeightSpec::standard(t)?)?;
    Ok(vec![CheckRecord::at_most(
        "mollified",
        &format!("c2 q={} terms={} T={t}", chi.modulus(), coeffs.len()),
        c.relative_error,
        MOLLIFIED_REL,
        "predicted c2",
    )
    .with_details(json!({ "extracted": c.extracted, "predicted": c.predicted }))])
}
