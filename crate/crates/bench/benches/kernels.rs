use criterion::{criterion_group, criterion_main, Criterion};
use loglattice::catalog::{bidisc, curve_catalog, disc};
use loglattice::charclass::kclass_report;
use loglattice::derham::check_alpha;
use loglattice::rees::rees_checks;
use loglattice::{closed_form_tower, dm_lattice, q, tower, Settings, TwistDivisor, WeightWindow};

fn towers(c: &mut Criterion) {
    let conn = bidisc([2, 3]);
    let seed = dm_lattice(&conn).unwrap();
    c.bench_function("tower bidisc depth 4", |b| b.iter(|| tower(&seed, 4).unwrap()));
    c.bench_function("closed form bidisc depth 4", |b| b.iter(|| closed_form_tower(&conn, 4)));
}

fn graded_pieces(c: &mut Criterion) {
    let s = Settings::default();
    let conn = disc(3, q(1, 1), q(0, 1));
    let t = tower(&dm_lattice(&conn).unwrap(), 4).unwrap();
    let w = WeightWindow::cube(1, -12, 12);
    c.bench_function("alpha x^-3 window 12", |b| {
        b.iter(|| check_alpha(&t, &TwistDivisor::zero(1), &w, &s).unwrap())
    });
}

fn rees(c: &mut Criterion) {
    let s = Settings::default();
    let conn = disc(2, q(1, 1), q(1, 2));
    let t = tower(&dm_lattice(&conn).unwrap(), 3).unwrap();
    c.bench_function("rees checks x^-2 top 12", |b| {
        b.iter(|| rees_checks(&t, &TwistDivisor::zero(1), &[12], &s).unwrap())
    });
}

fn classes(c: &mut Criterion) {
    let curves = curve_catalog();
    c.bench_function("kclass curve catalog", |b| {
        b.iter(|| {
            for (_, conn) in &curves {
                kclass_report(conn).unwrap();
            }
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = towers, graded_pieces, rees, classes
}
criterion_main!(benches);
