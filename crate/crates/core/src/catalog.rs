//! Named example connections, seeded random good blocks, and negative controls.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{q, Poly, Rational};
use crate::connection::{
    zero_matrix, CurveConnection, ElementaryModel, ExponentialFactor, FormalConnection, RankOneForm, RegularBlock,
};
use crate::geometry::{BoundaryDivisor, LocalBoundary, Point};

pub const RANDOM_RESIDUES: [(i64, i64); 3] = [(0, 1), (1, 3), (1, 2)];

fn elementary(alpha: Vec<u32>, c: Rational, regular: RegularBlock) -> ElementaryModel {
    let phi = if alpha.iter().all(|&a| a == 0) {
        ExponentialFactor::zero(alpha.len())
    } else {
        ExponentialFactor::monomial(alpha, c).expect("nonzero exponent")
    };
    ElementaryModel::new(phi, regular).expect("matching ℓ")
}

fn on_polydisc(ell: usize, blocks: Vec<ElementaryModel>) -> FormalConnection {
    FormalConnection::new(LocalBoundary::new(ell, ell).expect("ℓ ≤ n"), blocks).expect("matching ℓ")
}

/// One block `c·x^{−m}` on a disc with scalar residue `λ` (any rational).
pub fn disc(m: u32, c: Rational, lambda: Rational) -> FormalConnection {
    let r = RegularBlock::with_arbitrary_residues(1, vec![lambda], vec![zero_matrix(1)]).expect("rank one");
    on_polydisc(1, vec![elementary(vec![m], c, r)])
}

/// `x₁^{−m₁} x₂^{−m₂}` with trivial regular part.
pub fn bidisc(m: [u32; 2]) -> FormalConnection {
    on_polydisc(2, vec![elementary(m.to_vec(), q(1, 1), RegularBlock::trivial(1, 2))])
}

/// Regular disc block of residue `−1`: breaks the normalization `λ ∈ [0, 1)`.
pub fn lambda_minus_one() -> FormalConnection {
    disc(0, q(1, 1), q(-1, 1))
}

/// Good formal blocks used by every local check, keyed by name.
pub fn formal_catalog() -> Vec<(String, FormalConnection)> {
    let jordan = RegularBlock::new(
        2,
        vec![q(1, 3)],
        vec![vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]],
    )
    .expect("nilpotent");
    vec![
        ("regular".into(), disc(0, q(1, 1), q(0, 1))),
        ("kummer_half".into(), disc(0, q(1, 1), q(1, 2))),
        (
            "regular_jordan_third".into(),
            on_polydisc(1, vec![elementary(vec![0], q(1, 1), jordan)]),
        ),
        ("x^-1".into(), disc(1, q(1, 1), q(0, 1))),
        ("x^-2".into(), disc(2, q(1, 1), q(0, 1))),
        ("x^-3".into(), disc(3, q(1, 1), q(0, 1))),
        ("x^-1_third".into(), disc(1, q(-2, 1), q(1, 3))),
        (
            "x^-1+half".into(),
            on_polydisc(
                1,
                vec![
                    elementary(vec![1], q(1, 1), RegularBlock::trivial(1, 1)),
                    elementary(
                        vec![0],
                        q(1, 1),
                        RegularBlock::semisimple(1, vec![q(1, 2)]).expect("λ in [0, 1)"),
                    ),
                ],
            ),
        ),
        ("bidisc_1_1".into(), bidisc([1, 1])),
        ("bidisc_1_2".into(), bidisc([1, 2])),
    ]
}

/// `count` good blocks with `ℓ ∈ {1, 2}`, pole exponents in `{1, 2, 3}^ℓ`,
/// residues in `{0, 1/3, 1/2}` and regular parts of rank at most 2.
pub fn random_catalog(seed: u64, count: usize) -> Vec<(String, FormalConnection)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let ell = rng.random_range(1..=2usize);
            let alpha: Vec<u32> = (0..ell).map(|_| rng.random_range(1..=3)).collect();
            let c = Rational::int(*[-3, -2, -1, 1, 2, 3].choose(&mut rng).expect("nonempty"));
            let residues: Vec<Rational> = (0..ell)
                .map(|_| {
                    let (a, b) = *RANDOM_RESIDUES.choose(&mut rng).expect("nonempty");
                    q(a, b)
                })
                .collect();
            let rank = rng.random_range(1..=2usize);
            let jordan = rank == 2 && rng.random_bool(0.5);
            let nilpotent = (0..ell)
                .map(|j| {
                    let mut n = zero_matrix(rank);
                    if jordan && j == 0 {
                        n[0][1] = q(1, 1);
                    }
                    n
                })
                .collect();
            let regular = RegularBlock::new(rank, residues, nilpotent).expect("normalized residues");
            (
                format!("random_{seed}_{i:02}"),
                on_polydisc(ell, vec![elementary(alpha, c, regular)]),
            )
        })
        .collect()
}

fn gm() -> BoundaryDivisor {
    BoundaryDivisor::new(vec![Point::Finite(q(0, 1)), Point::Infinity]).expect("distinct points")
}

fn on_gm(form: RankOneForm) -> CurveConnection {
    CurveConnection::new(gm(), vec![form]).expect("poles on the boundary")
}

/// Rank-one connections `d + w dx` on complements of points in P¹.
pub fn curve_catalog() -> Vec<(String, CurveConnection)> {
    let origin = q(0, 1);
    let line = BoundaryDivisor::new(vec![Point::Infinity]).expect("one point");
    vec![
        (
            "exp_1_over_x".into(),
            on_gm(RankOneForm::zero().with_pole(origin.clone(), vec![q(0, 1), q(-1, 1)])),
        ),
        ("trivial_gm".into(), on_gm(RankOneForm::zero())),
        (
            "kummer_half".into(),
            on_gm(RankOneForm::zero().with_pole(origin.clone(), vec![q(1, 2)])),
        ),
        (
            "d_plus_dx".into(),
            CurveConnection::new(line.clone(), vec![RankOneForm::new(Poly::constant(q(1, 1)))]).expect("pole at ∞"),
        ),
        (
            "exp_1_over_x2".into(),
            on_gm(RankOneForm::zero().with_pole(origin.clone(), vec![q(0, 1), q(0, 1), q(-2, 1)])),
        ),
        (
            "exp_1_over_x_plus_x".into(),
            on_gm(RankOneForm::new(Poly::constant(q(1, 1))).with_pole(origin.clone(), vec![q(0, 1), q(-1, 1)])),
        ),
        (
            "exp_1_over_x_third".into(),
            on_gm(RankOneForm::zero().with_pole(origin, vec![q(1, 3), q(-1, 1)])),
        ),
        (
            "exp_x2".into(),
            CurveConnection::new(line, vec![RankOneForm::new(Poly::new(vec![q(0, 1), q(2, 1)]))]).expect("pole at ∞"),
        ),
    ]
}

/// `items` in a seed-determined order; the identity for `None`.
pub fn permuted<T>(mut items: Vec<T>, seed: Option<u64>) -> Vec<T> {
    if let Some(s) = seed {
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogs_are_good_and_reproducible() {
        for (_, c) in formal_catalog() {
            c.check_good().unwrap();
        }
        let a = random_catalog(7, 30);
        assert_eq!(a, random_catalog(7, 30));
        assert_ne!(a, random_catalog(8, 30));
        assert!(a.iter().any(|(_, c)| c.ell() == 2));
        assert!(a.iter().any(|(_, c)| c.rank() == 2));
        for (_, c) in &a {
            c.check_good().unwrap();
        }
        assert!(curve_catalog().len() >= 6);
    }

    #[test]
    fn permutation_keeps_items() {
        let v: Vec<u32> = (0..10).collect();
        let mut p = permuted(v.clone(), Some(3));
        assert_ne!(p, v);
        p.sort_unstable();
        assert_eq!(p, v);
        assert_eq!(permuted(v.clone(), None), v);
    }
}
