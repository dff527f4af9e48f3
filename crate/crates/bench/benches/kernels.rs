use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sli_core::linear::{greens_apply, wave_solution};
use sli_core::perturb::{build_hierarchy, taylor_oracle_i};
use sli_core::{DualJet, Field, GreensChoice, Jet, ModelParams, Profile, Region, ScalarKind, Site, VectorKind, Window};

fn setup() -> (ModelParams, Window, Jet, Jet) {
    let p = ModelParams::default();
    let w = Window::new(-40, 40, -80, 80).unwrap();
    let u = wave_solution(&Profile::bump(2, 2, 1.0), &Profile::bump(-3, 2, 0.5), &w).unwrap();
    let v = wave_solution(&Profile::bump(-1, 3, 0.8), &Profile::bump(1, 1, -0.6), &w).unwrap();
    (p, w, u, v)
}

fn greens(c: &mut Criterion) {
    let (p, w, _, _) = setup();
    let mut b = Field::zeros(w);
    let mut wp = Field::zeros(w);
    for t in -3..=3 {
        for x in -3..=3 {
            b.set(Site::new(t, x), (t * 7 + x) as f64 * 0.1);
            wp.set(Site::new(t, x), (x - t) as f64 * 0.1);
        }
    }
    let d = DualJet::new(b, wp);
    for (name, kind) in [("banded", ScalarKind::BandedSolve), ("frequency", ScalarKind::Frequency)] {
        let choice = GreensChoice::new(VectorKind::Retarded, kind);
        c.bench_function(&format!("greens_apply/{name}"), |bch| {
            bch.iter(|| greens_apply(&choice, black_box(&d), &p, &w).unwrap())
        });
    }
}

fn hierarchy(c: &mut Criterion) {
    let (p, w, u, v) = setup();
    let choices = [GreensChoice::default()];
    let mut g = c.benchmark_group("hierarchy");
    g.sample_size(10);
    for order in [2, 3] {
        g.bench_function(format!("build/P={order}"), |bch| {
            bch.iter(|| build_hierarchy(black_box(&u), &v, order, &choices, &p, &w).unwrap())
        });
    }
    let hier = build_hierarchy(&u, &v, 3, &choices, &p, &w).unwrap();
    let omega = Region::slab(w, -4, 3).unwrap();
    g.bench_function("taylor_oracle/m=3,p=3", |bch| {
        bch.iter(|| taylor_oracle_i(black_box(&hier), &omega, 3, 3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, greens, hierarchy);
criterion_main!(benches);
