use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use moment_core::afe::{afe_evaluate, default_mn_max, AfePhase, Kernel, KernelSpec, AFE_V_CUT};
use moment_core::arith::factorize;
use moment_core::eulerprod::z_factor;
use moment_core::moment::{critical_product, main_term, CriticalLineTable, WeightSpec};
use moment_core::numkernel::{bessel, dirichlet_l, ln_gamma, riemann_zeta, BesselKind};
use moment_core::voronoi::{voronoi_evaluate, BumpFunction, VoronoiMutation};
use moment_core::{DirichletCharacter, ShiftTuple, C64};

fn special_functions(c: &mut Criterion) {
    let chi = DirichletCharacter::kronecker(-3).unwrap();
    let s = C64::new(0.51, 1000.0);
    c.bench_function("ln_gamma t=1000", |b| b.iter(|| ln_gamma(black_box(s))));
    c.bench_function("zeta t=1000", |b| b.iter(|| riemann_zeta(black_box(s))));
    c.bench_function("L(s, chi_-3) t=1000", |b| b.iter(|| dirichlet_l(black_box(s), &chi)));
    let nu = C64::new(0.02, 0.01);
    for (kind, x) in [(BesselKind::J, 5.0), (BesselKind::Y, 15.0), (BesselKind::K, 4.0), (BesselKind::J, 60.0)] {
        c.bench_function(&format!("bessel {kind:?} x={x}"), |b| b.iter(|| bessel(kind, black_box(nu), black_box(x), 0)));
    }
}

fn euler_products(c: &mut Criterion) {
    let chi = DirichletCharacter::kronecker(-4).unwrap();
    let sh = ShiftTuple::generic(1.0);
    let (h, k) = (factorize(12), factorize(35));
    c.bench_function("z_factor h=12 k=35", |b| b.iter(|| z_factor(&sh, &h, &k, &chi, black_box(C64::new(0.01, 0.02)))));
    let spec = WeightSpec::standard(1000.0).unwrap();
    c.bench_function("main_term T=1000", |b| b.iter(|| main_term(2, 3, &sh, &chi, black_box(&spec))));
}

fn critical_line(c: &mut Criterion) {
    let chi = DirichletCharacter::kronecker(-3).unwrap();
    let sh = ShiftTuple::generic(1.0);
    c.bench_function("critical_product t=1000", |b| b.iter(|| critical_product(black_box(1000.0), &sh, &chi)));
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let spec = WeightSpec::standard(200.0).unwrap();
    g.bench_function("table T=200", |b| b.iter(|| CriticalLineTable::for_weights(&sh, &chi, &[spec], 6)));
    let table = CriticalLineTable::for_weights(&sh, &chi, &[spec], 6).unwrap();
    g.bench_function("integrate h=2 k=3 T=200", |b| b.iter(|| table.integrate(2, 3, black_box(&spec))));
    g.finish();
}

fn summation(c: &mut Criterion) {
    let chi = DirichletCharacter::kronecker(-3).unwrap();
    let mut g = c.benchmark_group("summation");
    g.sample_size(10);
    let sh = ShiftTuple::generic(1.0);
    let kernel = KernelSpec::new(Kernel::Gaussian);
    let m = default_mn_max(30.0, &sh, &chi, &kernel, AFE_V_CUT).unwrap();
    g.bench_function("afe t=30", |b| b.iter(|| afe_evaluate(black_box(30.0), &sh, &chi, m, &kernel, AfePhase::Expansion)));
    let w = BumpFunction::gaussian(500.0, 20.0);
    let (a, bb) = (C64::new(0.01, 0.0), C64::new(0.03, 0.0));
    g.bench_function("voronoi q=3 d=2", |b| b.iter(|| voronoi_evaluate(&w, a, bb, 1, black_box(2), &chi, VoronoiMutation::None)));
    g.finish();
}

criterion_group!(benches, special_functions, euler_products, critical_line, summation);
criterion_main!(benches);
