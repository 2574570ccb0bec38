use super::*;
use crate::algebra::{complex_cohomology, q, WeightWindow};
use crate::connection::{zero_matrix, ElementaryModel, ExponentialFactor, FormalConnection, RegularBlock};
use crate::geometry::LocalBoundary;
use crate::tower::closed_form_tower;

fn disc_phi(m: u32, residue: Rational) -> FormalConnection {
    let phi = if m == 0 {
        ExponentialFactor::zero(1)
    } else {
        ExponentialFactor::monomial(vec![m], q(1, 1)).unwrap()
    };
    let r = RegularBlock::with_arbitrary_residues(1, vec![residue], vec![zero_matrix(1)]).unwrap();
    FormalConnection::disc(phi, r).unwrap()
}

fn bidisc(m: [u32; 2]) -> FormalConnection {
    let phi = ExponentialFactor::monomial(m.to_vec(), q(1, 1)).unwrap();
    let b = ElementaryModel::new(phi, RegularBlock::trivial(1, 2)).unwrap();
    FormalConnection::new(LocalBoundary::new(2, 2).unwrap(), vec![b]).unwrap()
}

fn module(c: &FormalConnection, depth: usize, top: i64) -> GradedReesModule {
    let t = closed_form_tower(c, depth);
    let z = TwistDivisor::zero(c.ell());
    rees_of_tower(&t, &z, &vec![top; c.n_vars()], &Settings::default()).unwrap()
}

#[test]
fn tower_module_pieces_and_relations() {
    let m = module(&disc_phi(1, q(0, 1)), 4, 5);
    m.check_relations().unwrap();
    for p in 0..=4 {
        let low = m.pieces[p].iter().map(|l| l.exp[0]).min().unwrap();
        assert_eq!(low, -(p as i64) - 1);
    }
    let r = strictness_check(&m).unwrap();
    assert!(r.strict);
    assert_eq!(r.torsion_length, 0);
    let b = module(&bidisc([1, 2]), 3, 3);
    b.check_relations().unwrap();
    assert!(strictness_check(&b).unwrap().strict);
}

#[test]
fn torsion_controls() {
    let m = module(&disc_phi(1, q(0, 1)), 6, 4);
    let point = m.with_point_summand(1).unwrap();
    point.check_relations().unwrap();
    let r = strictness_check(&point).unwrap();
    assert!(!r.strict);
    assert_eq!(r.z_kernel[1], 1);
    assert_eq!(r.torsion_length, 1);
    assert!(k0_torsion_cancellation(&point).unwrap().cancels);

    for k in 1..=2 {
        let quo = m.quotient_by_z_power(k).unwrap();
        quo.check_relations().unwrap();
        let r = strictness_check(&quo).unwrap();
        assert_eq!(r.torsion_length, k);
        assert!(!r.cap_reached);
        let k0 = k0_torsion_cancellation(&quo).unwrap();
        assert!(k0.cancels, "{k0:?}");
        assert_eq!(k0.layers.len(), k);
    }
    assert!(k0_torsion_cancellation(&m).unwrap().layers.is_empty());
}

#[test]
fn regular_sequences() {
    let m = module(&bidisc([1, 2]), 2, 3);
    let seqs = boundary_subsequences(2);
    assert_eq!(seqs.len(), 3);
    assert!(regular_sequence_check(&m, &seqs).unwrap().pass);
    let bad = m.with_killed_summand(0).unwrap();
    bad.check_relations().unwrap();
    let r = regular_sequence_check(&bad, &seqs).unwrap();
    assert!(!r.pass);
    assert!(r.failures.iter().all(|f| f.var == 0));
    assert!(regular_sequence_check(&bad, &[vec![1]]).unwrap().pass);
}

#[test]
fn gr_koszul() {
    let m = module(&bidisc([2, 1]), 2, 3);
    assert!(gr_koszul_acyclicity(&m).unwrap().pass);
    let bad = m.with_killed_summand(1).unwrap();
    let r = gr_koszul_acyclicity(&bad).unwrap();
    assert!(!r.pass);
    assert!(r.per_degree.iter().all(|h| h[&-1] > 0));
}

#[test]
fn koszul_tensor_on_disc() {
    let s = Settings::default();
    for c in [disc_phi(0, q(0, 1)), disc_phi(1, q(0, 1)), disc_phi(2, q(1, 2))] {
        let m = module(&c, 3, 4);
        let r = koszul_tensor_check(&m, &s).unwrap();
        assert!(r.pass, "{r:?}");
    }
    let m = module(&disc_phi(0, q(0, 1)), 3, 4);
    let r = koszul_tensor_check(&m.with_point_summand(1).unwrap(), &s).unwrap();
    assert!(!r.negative_vanish && !r.strict_h0);
    let r = koszul_tensor_check(&m.quotient_by_z_power(1).unwrap(), &s).unwrap();
    assert!(r.negative_vanish && !r.strict_h0);
}

#[test]
fn koszul_tensor_without_boundary_is_the_module() {
    let c = FormalConnection::new(
        LocalBoundary::new(1, 0).unwrap(),
        vec![ElementaryModel::new(ExponentialFactor::zero(0), RegularBlock::trivial(1, 0)).unwrap()],
    )
    .unwrap();
    let m = module(&c, 3, 4);
    for p in 0..=3 {
        let h = complex_cohomology(&koszul_tensor_complex(&m, p, &Settings::default()).unwrap()).unwrap();
        assert_eq!(h[&-1], 0);
        assert_eq!(h[&0], m.dim(p));
    }
}

#[test]
fn koszul_tensor_on_bidisc() {
    let m = module(&bidisc([1, 1]), 2, 2);
    let r = koszul_tensor_check(&m, &Settings::default()).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn euler_examples() {
    let z = TwistDivisor::zero(1);
    let w = WeightWindow::cube(1, -8, 8);
    for c in [disc_phi(0, q(0, 1)), disc_phi(0, q(1, 2)), disc_phi(0, q(1, 1))] {
        assert!(euler_bijectivity(&c, &z, &[0], 0, 8, &w).unwrap().pass);
    }
    let irr = euler_bijectivity(&disc_phi(2, q(0, 1)), &z, &[0], 0, 8, &w).unwrap();
    assert_eq!(irr.vacuous_blocks, vec![0]);
    assert!(irr.pass);
    let bad = euler_bijectivity(&disc_phi(0, q(-1, 1)), &z, &[0], 0, 8, &w).unwrap();
    assert_eq!(bad.singular.iter().map(|s| s.k).collect::<Vec<_>>(), vec![1]);
}

#[test]
fn euler_on_bidisc() {
    let w = WeightWindow::cube(2, -4, 4);
    let c = FormalConnection::new(
        LocalBoundary::new(2, 2).unwrap(),
        vec![ElementaryModel::new(
            ExponentialFactor::monomial(vec![1, 0], q(1, 1)).unwrap(),
            RegularBlock::trivial(1, 2),
        )
        .unwrap()],
    )
    .unwrap();
    let r = euler_bijectivity(&c, &TwistDivisor::zero(2), &[1], 1, 8, &w).unwrap();
    assert!(r.vacuous_blocks.is_empty());
    assert!(r.pass);
    assert!(r.bands_checked > 0);
    let r = euler_bijectivity(&c, &TwistDivisor::zero(2), &[0, 1], 1, 8, &w).unwrap();
    assert_eq!(r.vacuous_blocks, vec![0]);
}

#[test]
fn localization_examples() {
    let z = TwistDivisor::zero(1);
    let w = WeightWindow::cube(1, -12, 12);
    let r = localization_check(&disc_phi(1, q(0, 1)), &z, &w).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.image_poles[&0][..4], [1, 3, 5, 7]);
    let r = localization_check(&disc_phi(0, q(1, 2)), &z, &w).unwrap();
    assert!(r.pass, "{r:?}");
    let r = localization_check(&disc_phi(0, q(-1, 1)), &z, &w).unwrap();
    assert!(!r.pass);
    assert_eq!(r.singular.first().map(|s| s.2), Some(1));
}

#[test]
fn all_rees_checks_on_bidisc() {
    let c = bidisc([1, 2]);
    let t = closed_form_tower(&c, 2);
    let r = rees_checks(&t, &TwistDivisor::new(vec![1, 0]), &[2, 2], &Settings::default()).unwrap();
    assert!(r.pass, "{r:?}");
}
