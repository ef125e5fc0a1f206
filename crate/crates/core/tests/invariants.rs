use proptest::prelude::*;

use moment_core::afe::{Kernel, KernelSpec};
use moment_core::arith::{factorize, gcd, twisted_ramanujan, twisted_ramanujan_closed};
use moment_core::characters::primitive_characters;
use moment_core::eulerprod::{b_factor, b_factor_series, b_prime_factor, b_prime_factor_series};
use moment_core::moment::{main_term, main_term_via_residues, rj_cancellation_residuals, weight_moment, weight_w, WeightSpec};
use moment_core::{DirichletCharacter, ShiftTuple, C64};

fn chi(q: u64) -> DirichletCharacter {
    match q {
        3 => DirichletCharacter::kronecker(-3).unwrap(),
        4 => DirichletCharacter::kronecker(-4).unwrap(),
        _ => moment_core::characters::quartic_mod5(),
    }
}

fn shift() -> impl Strategy<Value = C64> {
    (-0.05..0.05f64, -0.05..0.05f64).prop_map(|(a, b)| C64::new(a, b))
}

fn shifts() -> impl Strategy<Value = ShiftTuple> {
    (shift(), shift(), shift(), shift())
        .prop_map(|(a, b, c, d)| ShiftTuple::new(a, b, c, d))
        .prop_filter("generic", |s| s.check_generic(moment_core::tolerances::EPS_SHIFT).is_ok())
}

fn coprime_pair() -> impl Strategy<Value = (u64, u64)> {
    (1..40u64, 1..40u64).prop_filter("coprime", |&(h, k)| gcd(h, k) == 1)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_sums_have_modulus_sqrt_q(q in 3..40u64) {
        for c in primitive_characters(q) {
            prop_assert!((c.gauss_sum().norm_sqr() - q as f64).abs() < 1e-9 * q as f64);
        }
    }

    #[test]
    fn characters_are_completely_multiplicative(q in prop::sample::select(vec![3u64, 4, 5]), m in 1..200u64, n in 1..200u64) {
        let c = chi(q);
        prop_assert!((c.value(m * n) - c.value(m) * c.value(n)).norm() < 1e-12);
        prop_assert!((c.value(m + q) - c.value(m)).norm() < 1e-12);
    }

    #[test]
    fn twisted_ramanujan_matches_closed_form(d in 1..60u64, r in -60..60i64) {
        let c = chi(5);
        if let Ok(closed) = twisted_ramanujan_closed(d, r, &c) {
            prop_assert!(rel(closed, twisted_ramanujan(d, r, &c)) < 1e-10);
        }
    }

    #[test]
    fn local_factors_match_their_series(q in prop::sample::select(vec![3u64, 4, 5]), (h, k) in coprime_pair(), sh in shifts(), s in shift()) {
        let c = chi(q);
        let (hf, kf) = (factorize(h), factorize(k));
        let (series, _) = b_factor_series(&sh, &hf, &kf, &c, s, None).unwrap();
        prop_assert!(rel(b_factor(&sh, &hf, &kf, &c, s).unwrap(), series) < 1e-10);
        let (series, _) = b_prime_factor_series(&sh, &hf, &kf, &c, s, None).unwrap();
        prop_assert!(rel(b_prime_factor(&sh, &hf, &kf, &c, s).unwrap(), series) < 1e-10);
    }

    #[test]
    fn residue_terms_cancel(q in prop::sample::select(vec![3u64, 4, 5]), (h, k) in coprime_pair(), sh in shifts()) {
        let r = rj_cancellation_residuals(h, k, &sh, &chi(q), &KernelSpec::new(Kernel::Gaussian)).unwrap();
        for x in r {
            prop_assert!(x < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn residue_assembly_is_kernel_independent(q in prop::sample::select(vec![3u64, 4]), (h, k) in coprime_pair(), sh in shifts(), t in 300.0..3000.0f64) {
        let spec = WeightSpec::standard(t).unwrap();
        let c = chi(q);
        let a = main_term_via_residues(h, k, &sh, &c, &spec, &KernelSpec::new(Kernel::Gaussian)).unwrap();
        let b = main_term_via_residues(h, k, &sh, &c, &spec, &KernelSpec::new(Kernel::HalfGaussian)).unwrap();
        prop_assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn main_term_respects_conjugation(q in prop::sample::select(vec![3u64, 4, 5]), (h, k) in coprime_pair(), sh in shifts()) {
        let spec = WeightSpec::standard(1000.0).unwrap();
        let c = chi(q);
        let flipped = ShiftTuple::new(sh.gamma.conj(), sh.delta.conj(), sh.alpha.conj(), sh.beta.conj());
        let a = main_term(h, k, &sh, &c, &spec).unwrap().value;
        let b = main_term(k, h, &flipped, &c, &spec).unwrap().value;
        prop_assert!(rel(a.conj(), b) < 1e-10, "{a} {b}");
    }

    #[test]
    fn weight_is_a_unit_plateau(t in 10.0..1e5f64, frac in 0.0..1.0f64, x in 0.0..4.0f64) {
        let spec = WeightSpec::new(t, t.powf(0.6) + frac * (t - t.powf(0.6))).unwrap();
        let w = weight_w(x * t, &spec);
        prop_assert!((0.0..=1.0).contains(&w));
        let mass = weight_moment(&spec, C64::new(0.0, 0.0)).unwrap();
        prop_assert!((mass.re - (3.5 * t - spec.t0)).abs() < 1e-9 * t);
    }
}
