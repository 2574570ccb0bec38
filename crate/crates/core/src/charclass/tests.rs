use super::*;
use crate::algebra::{Poly, WeightWindow};
use crate::connection::FormalConnection;

fn zero() -> Point {
    Point::Finite(q(0, 1))
}

fn gm() -> BoundaryDivisor {
    BoundaryDivisor::new(vec![zero(), Point::Infinity]).unwrap()
}

fn curve(d: BoundaryDivisor, forms: Vec<RankOneForm>) -> CurveConnection {
    CurveConnection::new(d, forms).unwrap()
}

/// `d + d(1/x)`.
fn exp_inv_x() -> CurveConnection {
    curve(
        gm(),
        vec![RankOneForm::zero().with_pole(q(0, 1), vec![q(0, 1), q(-1, 1)])],
    )
}

fn trivial_gm() -> CurveConnection {
    curve(gm(), vec![RankOneForm::zero()])
}

fn kummer_half() -> CurveConnection {
    curve(gm(), vec![RankOneForm::zero().with_pole(q(0, 1), vec![q(1, 2)])])
}

/// `d + dx` on the affine line.
fn d_plus_dx() -> CurveConnection {
    curve(
        BoundaryDivisor::new(vec![Point::Infinity]).unwrap(),
        vec![RankOneForm::new(Poly::constant(q(1, 1)))],
    )
}

fn h(c: &CurveConnection, k: u32) -> Hypercohomology {
    let t = global_tower(c, 1).unwrap();
    hypercohomology(&t, &TwistDivisor::multiple_of_boundary(c.boundary.len(), k)).unwrap()
}

#[test]
fn global_towers() {
    let t = global_tower(&exp_inv_x(), 2).unwrap();
    assert_eq!(t.levels[0][0].degree(), 0);
    assert_eq!(t.levels[1][0].degree(), 1);
    assert_eq!(t.levels[2][0].degree(), 2);
    let t = global_tower(&d_plus_dx(), 1).unwrap();
    assert_eq!(t.levels[1][0], LineBundleP1::o(1));
    let t = global_tower(&kummer_half(), 1).unwrap();
    assert_eq!(t.levels[0][0].shift_at(&zero()), 1);
}

#[test]
fn hypercohomology_examples() {
    for k in 0..3 {
        let e = h(&exp_inv_x(), k);
        assert_eq!((e.h0, e.h1, e.h2, e.chi), (0, 1, 0, -1));
        let e = h(&trivial_gm(), k);
        assert_eq!((e.h0, e.h1, e.h2), (1, 1, 0));
        let e = h(&kummer_half(), k);
        assert_eq!((e.h0, e.h1, e.h2), (0, 0, 0));
        let e = h(&d_plus_dx(), k);
        assert_eq!((e.h0, e.h1, e.h2), (0, 0, 0));
    }
}

#[test]
fn oracle_on_u() {
    let s = Settings::default();
    for (c, want) in [
        (exp_inv_x(), (0, 1)),
        (trivial_gm(), (1, 1)),
        (kummer_half(), (0, 0)),
        (d_plus_dx(), (0, 0)),
    ] {
        let o = de_rham_oracle_u(&c, 4, &s).unwrap();
        assert!(o.stable);
        assert_eq!(o.value, want);
        assert!(cohomology_report(&c, 4, &s).unwrap().pass);
    }
}

#[test]
fn oracle_small_pole_bound_is_not_the_answer() {
    // trivial connection, no poles allowed: only constants and dx/x missing
    assert_eq!(de_rham_on_u_at(&trivial_gm(), 0).unwrap(), (1, 1));
    assert_eq!(de_rham_on_u_at(&exp_inv_x(), 0).unwrap(), (0, 1));
}

#[test]
fn both_classes() {
    for (c, want, slope) in [
        (exp_inv_x(), K0Class::new(0, 1), 3),
        (trivial_gm(), K0Class::new(0, 0), 2),
        (kummer_half(), K0Class::new(0, 0), 2),
        (d_plus_dx(), K0Class::new(0, 0), 2),
    ] {
        let r = kclass_report(&c).unwrap();
        assert_eq!(r.rhs, want);
        assert_eq!(r.lhs.class, want);
        assert_eq!(r.lhs.slope, slope);
        assert!(r.pass);
    }
}

#[test]
fn rhs_counts_boundary_and_irregularity() {
    let c = curve(
        gm(),
        vec![
            RankOneForm::new(Poly::constant(q(1, 1))).with_pole(q(0, 1), vec![q(1, 3), q(0, 1), q(1, 1)]),
            RankOneForm::zero(),
        ],
    );
    let t = global_tower(&c, 1).unwrap();
    assert_eq!(rhs_k_class(&t).unwrap(), K0Class::new(0, total_irregularity(&c) as i64));
    assert_eq!(total_irregularity(&c), 3);
}

#[test]
fn p0_stops_with_two_acyclic_pieces() {
    for c in [exp_inv_x(), trivial_gm(), kummer_half(), d_plus_dx()] {
        let t = global_tower(&c, 1).unwrap();
        let f = coherent_filtration(&t, 8).unwrap();
        let p = p0_search(&c, &t, &f).unwrap();
        assert!(p.found);
        assert!(p.p0 <= p.cap);
        let ok = |k: usize| p.checked.iter().any(|&(q, a)| q == k && a);
        assert!(ok(p.p0 + 1) && ok(p.p0 + 2));
    }
}

fn disc(form: RankOneForm) -> FormalConnection {
    local_formal_type_of(&form, &zero()).to_formal()
}

#[test]
fn spencer_matches_de_rham() {
    let s = Settings::default();
    let w = WeightWindow::cube(1, -6, 6);
    for form in [
        RankOneForm::zero(),
        RankOneForm::zero().with_pole(q(0, 1), vec![q(1, 2)]),
        RankOneForm::zero().with_pole(q(0, 1), vec![q(0, 1), q(-1, 1)]),
        RankOneForm::zero().with_pole(q(0, 1), vec![q(0, 1), q(0, 1), q(1, 1)]),
    ] {
        let r = spencer_side_change_check(&disc(form), &TwistDivisor::zero(1), &w, 3, &s).unwrap();
        assert_eq!(r.levels.len(), 3);
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn spencer_complex_shape() {
    let conn = disc(RankOneForm::zero().with_pole(q(0, 1), vec![q(0, 1), q(-1, 1)]));
    let t = crate::derham::standard_tower(&conn).unwrap();
    let c = spencer_complex(&t, 1, false, 5).unwrap();
    assert_eq!((c.start(), c.dim(-1), c.dim(0)), (-1, 5, 5));
    assert!(spencer_complex(&t, 2, false, 5).is_err());
}
