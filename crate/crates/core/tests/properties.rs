use proptest::prelude::*;

use loglattice::algebra::{
    complex_cohomology, log_derivation, nullspace, q, rank_q, series_mul, FiniteComplex, Poly, Rational, SparseMatrixQ,
    TruncatedLaurentSeries, WeightWindow,
};
use loglattice::catalog::{random_catalog, RANDOM_RESIDUES};
use loglattice::charclass::{
    cohomology_report, global_tower, hypercohomology, kclass_report, standard_twists, total_irregularity,
};
use loglattice::connection::{
    dm_lattice, kummer_invariants, local_formal_type_of, zero_matrix, CurveConnection, ElementaryModel,
    ExponentialFactor, FormalConnection, KummerData, RankOneForm, RegularBlock,
};
use loglattice::derham::{log_complex, Truncation};
use loglattice::geometry::{
    k0_class, line_bundle_cohomology, log_forms, BoundaryDivisor, K0Class, LineBundleP1, LocalBoundary, Point,
    SheafTerm, TwistDivisor,
};
use loglattice::rees::rees_checks;
use loglattice::settings::Settings;
use loglattice::tower::{closed_form_tower, irregularity, is_regular_singular, tower};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=3).prop_map(|(a, b)| q(a, b))
}

fn series(n: usize, w: WeightWindow) -> impl Strategy<Value = TruncatedLaurentSeries> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, n), small_rational()), 0..6)
        .prop_map(move |terms| TruncatedLaurentSeries::from_terms(w.clone(), terms).unwrap())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrixQ> {
    prop::collection::vec((0..rows, 0..cols, -2i64..=2), 0..(rows * cols + 1)).prop_map(move |t| {
        SparseMatrixQ::from_triplets(
            rows,
            cols,
            t.into_iter()
                .map(|(i, j, v)| (i, j, Rational::int(v)))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    })
}

fn residue() -> impl Strategy<Value = Rational> {
    prop::sample::select(RANDOM_RESIDUES.to_vec()).prop_map(|(a, b)| q(a, b))
}

/// Disc blocks `c·x^{−m}` with a normalized regular part of rank ≤ 2.
fn disc_block() -> impl Strategy<Value = ElementaryModel> {
    (
        0u32..=3,
        prop::sample::select(vec![-2i64, -1, 1, 2]),
        residue(),
        1usize..=2,
        any::<bool>(),
    )
        .prop_map(|(m, c, lambda, rank, jordan)| {
            let mut n = zero_matrix(rank);
            if jordan && rank == 2 {
                n[0][1] = q(1, 1);
            }
            let phi = if m == 0 {
                ExponentialFactor::zero(1)
            } else {
                ExponentialFactor::monomial(vec![m], Rational::int(c)).unwrap()
            };
            ElementaryModel::new(phi, RegularBlock::new(rank, vec![lambda], vec![n]).unwrap()).unwrap()
        })
}

fn disc(blocks: Vec<ElementaryModel>) -> FormalConnection {
    FormalConnection::new(LocalBoundary::new(1, 1).unwrap(), blocks).unwrap()
}

/// `w dx` with poles of order ≤ 3 at `0` (and at `1` when `three`), polynomial part of degree ≤ 1.
fn curve() -> impl Strategy<Value = CurveConnection> {
    (
        prop::collection::vec(small_rational(), 1..=3),
        prop::collection::vec(small_rational(), 1..=2),
        prop::collection::vec(small_rational(), 0..=2),
        any::<bool>(),
    )
        .prop_map(|(at0, at1, poly, three)| {
            let mut form = RankOneForm::new(Poly::new(poly)).with_pole(q(0, 1), at0);
            let mut points = vec![Point::Finite(q(0, 1)), Point::Infinity];
            if three {
                form = form.with_pole(q(1, 1), at1);
                points.push(Point::Finite(q(1, 1)));
            }
            CurveConnection::new(BoundaryDivisor::new(points).unwrap(), vec![form]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_product_commutes_and_distributes(
        a in series(2, WeightWindow::cube(2, -3, 3)),
        b in series(2, WeightWindow::cube(2, -3, 3)),
        c in series(2, WeightWindow::cube(2, -3, 3)),
    ) {
        let w = WeightWindow::cube(2, -4, 4);
        prop_assert_eq!(series_mul(&a, &b, &w).unwrap(), series_mul(&b, &a, &w).unwrap());
        let lhs = series_mul(&a, &b.add(&c).unwrap(), &w).unwrap();
        let rhs = series_mul(&a, &b, &w).unwrap().add(&series_mul(&a, &c, &w).unwrap()).unwrap();
        prop_assert_eq!(lhs.terms().collect::<Vec<_>>(), rhs.terms().collect::<Vec<_>>());
    }

    #[test]
    fn log_derivation_is_a_derivation(
        f in series(2, WeightWindow::cube(2, -3, 3)),
        g in series(2, WeightWindow::cube(2, -3, 3)),
        i in 0usize..2,
    ) {
        let w = WeightWindow::cube(2, -6, 6);
        let fg = series_mul(&f, &g, &w).unwrap();
        let lhs = log_derivation(&fg, i).unwrap();
        let rhs = series_mul(&log_derivation(&f, i).unwrap(), &g, &w).unwrap()
            .add(&series_mul(&f, &log_derivation(&g, i).unwrap(), &w).unwrap()).unwrap();
        prop_assert_eq!(lhs.terms().collect::<Vec<_>>(), rhs.terms().collect::<Vec<_>>());
    }

    #[test]
    fn rank_is_transpose_and_permutation_invariant(m in matrix(5, 4), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let r = rank_q(&m);
        prop_assert_eq!(r, rank_q(&m.transpose()));
        let permuted = SparseMatrixQ::from_triplets(5, 4, m.entries().map(|(i, j, v)| (perm[i], j, v.clone())).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(r, rank_q(&permuted));
    }

    #[test]
    fn cohomology_has_the_euler_characteristic_of_the_complex(b in matrix(2, 4), extra in matrix(3, 3)) {
        // d₁ has columns in ker d₂, so d₂∘d₁ = 0
        let kernel = nullspace(&b);
        let k = kernel.len();
        let coeffs = extra.transpose().select_columns(&(0..k.min(3)).collect::<Vec<_>>()).transpose();
        let d1 = match k {
            0 => SparseMatrixQ::zero(4, 3),
            _ => SparseMatrixQ::from_columns(4, &kernel[..k.min(3)]).unwrap().mul(&coeffs).unwrap(),
        };
        let c = FiniteComplex::from_dims(-1, &[d1.cols(), 4, 2], vec![d1, b]).unwrap();
        let h = complex_cohomology(&c).unwrap();
        let chi: i64 = h.iter().map(|(d, v)| if d.rem_euclid(2) == 0 { *v as i64 } else { -(*v as i64) }).sum();
        prop_assert_eq!(chi, c.euler_characteristic());
    }

    #[test]
    fn k0_class_is_additive(a in -6i64..=6, b in -6i64..=6, len in 0u64..4) {
        let (x, y) = (SheafTerm::Bundle(LineBundleP1::o(a)), SheafTerm::Bundle(LineBundleP1::o(b)));
        let s = SheafTerm::Skyscraper { length: len };
        prop_assert_eq!(k0_class(&[x.clone(), y.clone(), s.clone()]), k0_class(&[x]) + k0_class(&[y]) + k0_class(&[s]));
    }

    #[test]
    fn local_type_lowers_the_pole_order(coeffs in prop::collection::vec(small_rational(), 2..=5), top in 1i64..=4) {
        let mut c = coeffs;
        c.push(Rational::int(top));
        let k = c.len();
        let form = RankOneForm::zero().with_pole(q(0, 1), c);
        let lf = local_formal_type_of(&form, &Point::Finite(q(0, 1)));
        prop_assert_eq!(lf.irregularity() as usize, k - 1);
        prop_assert!(lf.regular.is_normalized());
        let at_inf = local_formal_type_of(&form, &Point::Infinity);
        prop_assert!(at_inf.regular.is_normalized());
    }

    #[test]
    fn dm_lattice_is_additive_and_idempotent(a in disc_block(), b in disc_block()) {
        let both = disc(vec![a.clone(), b.clone()]);
        prop_assume!(both.check_good().is_ok());
        let s = dm_lattice(&both).unwrap();
        let sa = dm_lattice(&disc(vec![a])).unwrap();
        let sb = dm_lattice(&disc(vec![b])).unwrap();
        prop_assert_eq!(s.shifts.clone(), [sa.shifts, sb.shifts].concat());
        prop_assert_eq!(dm_lattice(&s.connection).unwrap(), s);
    }

    #[test]
    fn kummer_covers_compose(r1 in 1u32..=4, r2 in 1u32..=4, s in -8i64..=8, w in -8i64..=8) {
        let data = |rho: u32, s: i64, w: i64| KummerData { rho: vec![rho], shifts: vec![vec![s]], weights: vec![vec![w]], residues: None };
        let one = kummer_invariants(&data(1, s, w)).unwrap();
        prop_assert_eq!(one.shifts, vec![vec![s]]);
        let first = kummer_invariants(&data(r2, s, w)).unwrap();
        let r = first.basis_twist[0][0];
        let second = kummer_invariants(&data(r1, first.shifts[0][0], (w - r) / r2 as i64)).unwrap();
        let direct = kummer_invariants(&data(r1 * r2, s, w)).unwrap();
        prop_assert_eq!(second.shifts, direct.shifts);
    }

    #[test]
    fn towers_agree_with_the_closed_form(seed in any::<u64>()) {
        for (_, c) in random_catalog(seed, 3) {
            let t = tower(&dm_lattice(&c).unwrap(), 4).unwrap();
            prop_assert!(t.is_nested());
            for d in 0..=4 {
                prop_assert_eq!(&tower(&dm_lattice(&c).unwrap(), d).unwrap().levels, &closed_form_tower(&c, d).levels);
            }
            if let Some(i) = t.levels.windows(2).position(|w| w[0] == w[1]) {
                prop_assert!(t.levels[i..].iter().all(|l| *l == t.levels[i]));
            }
        }
    }

    #[test]
    fn irregularity_is_additive(a in disc_block(), b in disc_block()) {
        let both = disc(vec![a.clone(), b.clone()]);
        prop_assume!(both.check_good().is_ok());
        let ia = irregularity(&disc(vec![a.clone()])).unwrap();
        let ib = irregularity(&disc(vec![b])).unwrap();
        prop_assert_eq!(irregularity(&both).unwrap(), ia + ib);
        prop_assert_eq!(ia == 0, is_regular_singular(&disc(vec![a])).unwrap());
    }

    #[test]
    fn log_complexes_are_complexes_with_stable_euler_characteristic(a in disc_block(), delta in 0u32..=2, shift in 0usize..=2) {
        let c = disc(vec![a]);
        let t = tower(&dm_lattice(&c).unwrap(), 4).unwrap();
        let trunc = Truncation::from_window(&WeightWindow::cube(1, -8, 8), 1);
        let s = Settings::default();
        let base = log_complex(&t, 0, &trunc, &s).unwrap();
        base.check_d_squared().unwrap();
        let twisted = log_complex(&t.with_delta(TwistDivisor::new(vec![delta])).unwrap(), 0, &trunc, &s).unwrap();
        let moved = log_complex(&t.shifted(shift).unwrap(), 0, &trunc, &s).unwrap();
        let chi = |c: &FiniteComplex| {
            complex_cohomology(c).unwrap().iter().map(|(d, v)| if d % 2 == 0 { *v as i64 } else { -(*v as i64) }).sum::<i64>()
        };
        prop_assert_eq!(chi(&base), chi(&twisted));
        prop_assert_eq!(chi(&base), chi(&moved));
    }
}

#[test]
fn line_bundle_euler_characteristic() {
    for k in -10..=10 {
        let (h0, h1) = line_bundle_cohomology(k);
        assert_eq!(h0 as i64 - h1 as i64, k + 1);
    }
}

#[test]
fn log_forms_times_dual() {
    let d = BoundaryDivisor::new(vec![Point::Finite(q(0, 1)), Point::Finite(q(2, 1)), Point::Infinity]).unwrap();
    let l = log_forms(&d);
    assert_eq!(k0_class(&[SheafTerm::Bundle(l.tensor(&l.dual()))]), K0Class::new(1, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rees_pipeline_on_discs(a in disc_block(), delta in 0u32..=1) {
        let c = disc(vec![a]);
        let t = tower(&dm_lattice(&c).unwrap(), 3).unwrap();
        let r = rees_checks(&t, &TwistDivisor::new(vec![delta]), &[5], &Settings::default()).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn curve_identities(c in curve()) {
        let s = Settings::default();
        let report = cohomology_report(&c, 8, &s).unwrap();
        prop_assert!(report.pass, "{:?}", report);
        let t = global_tower(&c, 1).unwrap();
        let hs: Vec<_> = standard_twists(&c.boundary).iter().map(|d| hypercohomology(&t, d).unwrap()).collect();
        prop_assert!(hs.iter().all(|h| *h == hs[0]));
        let chi = 2 - c.boundary.len() as i64 - total_irregularity(&c) as i64;
        prop_assert_eq!(hs[0].chi, chi);
        let k = kclass_report(&c).unwrap();
        prop_assert!(k.pass, "{:?}", k);
        prop_assert_eq!(k.rhs, K0Class::new(0, -chi));
    }
}
