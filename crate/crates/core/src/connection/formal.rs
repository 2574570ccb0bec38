//! Unramified formal connections on a polydisc as direct sums of elementary models.

use serde::{Deserialize, Serialize};

use super::factor::{factor_difference, polar_part_is_good, ExponentialFactor};
use super::regular::RegularBlock;
use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::geometry::LocalBoundary;

/// `L_φ ⊗ R_φ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryModel {
    pub phi: ExponentialFactor,
    pub regular: RegularBlock,
}

impl ElementaryModel {
    pub fn new(phi: ExponentialFactor, regular: RegularBlock) -> Result<Self> {
        if phi.ell() != regular.ell() {
            return Err(Error::VarMismatch {
                expected: regular.ell(),
                found: phi.ell(),
            });
        }
        Ok(ElementaryModel { phi, regular })
    }

    pub fn rank(&self) -> usize {
        self.regular.rank()
    }

    pub fn is_regular(&self) -> bool {
        self.phi.is_zero()
    }

    pub fn pole_divisor(&self) -> Vec<u32> {
        self.phi.pole_divisor()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalConnection {
    pub boundary: LocalBoundary,
    pub blocks: Vec<ElementaryModel>,
}

impl FormalConnection {
    pub fn new(boundary: LocalBoundary, blocks: Vec<ElementaryModel>) -> Result<Self> {
        for b in &blocks {
            if b.phi.ell() != boundary.ell {
                return Err(Error::VarMismatch {
                    expected: boundary.ell,
                    found: b.phi.ell(),
                });
            }
        }
        Ok(FormalConnection { boundary, blocks })
    }

    /// One block on the disc with `D = {x = 0}`.
    pub fn disc(phi: ExponentialFactor, regular: RegularBlock) -> Result<Self> {
        FormalConnection::new(LocalBoundary::new(1, 1)?, vec![ElementaryModel::new(phi, regular)?])
    }

    pub fn n_vars(&self) -> usize {
        self.boundary.n_vars
    }

    pub fn ell(&self) -> usize {
        self.boundary.ell
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(ElementaryModel::rank).sum()
    }

    /// Componentwise maximum of the pole divisors.
    pub fn max_pole(&self) -> Vec<u32> {
        let mut m = vec![0; self.ell()];
        for b in &self.blocks {
            for (mi, pi) in m.iter_mut().zip(b.pole_divisor()) {
                *mi = (*mi).max(pi);
            }
        }
        m
    }

    /// Every factor good, every pairwise difference good.
    pub fn check_good(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            b.phi
                .check_good()
                .map_err(|reason| Error::NotGood { block: i, reason })?;
        }
        for i in 0..self.blocks.len() {
            for j in i + 1..self.blocks.len() {
                let d = factor_difference(&self.blocks[i].phi, &self.blocks[j].phi);
                if !polar_part_is_good(&d) {
                    return Err(Error::NotGood {
                        block: j,
                        reason: format!("difference with block {i} has no dominant pole"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn action(&self) -> ConnectionAction {
        ConnectionAction::new(self)
    }
}

type Terms = Vec<(Vec<i64>, Rational)>;

#[derive(Clone, Debug)]
struct BlockAction {
    rank: usize,
    /// `x_i∂_iφ` per boundary variable, exponents padded to `n_vars`.
    logder: Vec<Terms>,
    residues: Vec<Rational>,
    /// Per boundary variable, entries `(k, l, c)` of `N_i`.
    nilpotent: Vec<Vec<(usize, usize, Rational)>>,
}

/// Precomputed action of `∇` on monomial basis vectors `x^γ e_c` of each block.
#[derive(Clone, Debug)]
pub struct ConnectionAction {
    boundary: LocalBoundary,
    blocks: Vec<BlockAction>,
}

/// A vector `Σ c · x^γ e_k` in sparse form.
pub type BlockVector = Vec<(Vec<i64>, usize, Rational)>;

impl ConnectionAction {
    pub fn new(conn: &FormalConnection) -> Self {
        let n = conn.n_vars();
        let blocks = conn
            .blocks
            .iter()
            .map(|b| {
                let logder = (0..conn.ell())
                    .map(|i| {
                        b.phi
                            .log_derivative(i)
                            .expect("index below ell")
                            .into_iter()
                            .map(|(mut e, c)| {
                                e.resize(n, 0);
                                (e, c)
                            })
                            .collect()
                    })
                    .collect();
                let nilpotent = (0..conn.ell())
                    .map(|i| {
                        let m = b.regular.nilpotent(i);
                        let mut out = Vec::new();
                        for (k, row) in m.iter().enumerate() {
                            for (l, c) in row.iter().enumerate() {
                                if !c.is_zero() {
                                    out.push((k, l, c.clone()));
                                }
                            }
                        }
                        out
                    })
                    .collect();
                BlockAction {
                    rank: b.rank(),
                    logder,
                    residues: b.regular.residues().to_vec(),
                    nilpotent,
                }
            })
            .collect();
        ConnectionAction {
            boundary: conn.boundary,
            blocks,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.boundary.n_vars
    }

    pub fn ell(&self) -> usize {
        self.boundary.ell
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_rank(&self, block: usize) -> usize {
        self.blocks[block].rank
    }

    /// `∇_θ(x^γ e_c)` with `θ = x_i∂_i` on boundary variables and `∂_i` otherwise.
    pub fn theta(&self, block: usize, i: usize, exp: &[i64], comp: usize) -> BlockVector {
        let b = &self.blocks[block];
        let mut out = Vec::new();
        if i >= self.boundary.ell {
            if exp[i] != 0 {
                let mut e = exp.to_vec();
                e[i] -= 1;
                out.push((e, comp, Rational::int(exp[i])));
            }
            return out;
        }
        let diag = Rational::int(exp[i]) - &b.residues[i];
        if !diag.is_zero() {
            out.push((exp.to_vec(), comp, diag));
        }
        for (k, l, c) in &b.nilpotent[i] {
            if *l == comp {
                out.push((exp.to_vec(), *k, c.clone()));
            }
        }
        for (e, c) in &b.logder[i] {
            let sum: Vec<i64> = exp.iter().zip(e).map(|(a, b)| a + b).collect();
            out.push((sum, comp, c.clone()));
        }
        out
    }

    /// `∇_{∂_i}(x^γ e_c)`, the full derivation.
    pub fn derivation(&self, block: usize, i: usize, exp: &[i64], comp: usize) -> BlockVector {
        let mut v = self.theta(block, i, exp, comp);
        if i < self.boundary.ell {
            for (e, _, _) in v.iter_mut() {
                e[i] -= 1;
            }
        }
        v
    }
}

/// The seed `E₀`: per block a shift vector over the boundary variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSeed {
    pub connection: FormalConnection,
    pub shifts: Vec<Vec<i64>>,
}

/// Deligne–Malgrange lattice: every block with shift 0.
pub fn dm_lattice(f: &FormalConnection) -> Result<LatticeSeed> {
    f.check_good()?;
    for (i, b) in f.blocks.iter().enumerate() {
        if !b.regular.is_normalized() {
            return Err(Error::NotGood {
                block: i,
                reason: format!("residues {:?} not in [0, 1)", b.regular.residues()),
            });
        }
    }
    Ok(LatticeSeed {
        connection: f.clone(),
        shifts: vec![vec![0; f.ell()]; f.blocks.len()],
    })
}

/// The connection a seed presents, with the seed as its standard lattice.
pub fn presented_by(seed: &LatticeSeed) -> FormalConnection {
    seed.connection.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    #[test]
    fn theta_on_irregular_block() {
        let phi = ExponentialFactor::monomial(vec![2], q(1, 1)).unwrap();
        let c = FormalConnection::disc(phi, RegularBlock::trivial(1, 1)).unwrap();
        let a = c.action();
        let v = a.theta(0, 0, &[3], 0);
        assert!(v.contains(&(vec![3], 0, q(3, 1))));
        assert!(v.contains(&(vec![1], 0, q(-2, 1))));
        let d = a.derivation(0, 0, &[3], 0);
        assert!(d.contains(&(vec![2], 0, q(3, 1))));
        assert!(d.contains(&(vec![0], 0, q(-2, 1))));
    }

    #[test]
    fn theta_residue_and_nilpotent() {
        let n = vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]];
        let r = RegularBlock::new(2, vec![q(1, 2)], vec![n]).unwrap();
        let c = FormalConnection::disc(ExponentialFactor::zero(1), r).unwrap();
        let v = c.action().theta(0, 0, &[0], 1);
        assert!(v.contains(&(vec![0], 1, q(-1, 2))));
        assert!(v.contains(&(vec![0], 0, q(1, 1))));
    }

    #[test]
    fn smooth_variable_is_plain_derivative() {
        let b = LocalBoundary::new(2, 1).unwrap();
        let m = ElementaryModel::new(ExponentialFactor::zero(1), RegularBlock::trivial(1, 1)).unwrap();
        let c = FormalConnection::new(b, vec![m]).unwrap();
        let v = c.action().theta(0, 1, &[0, 2], 0);
        assert_eq!(v, vec![(vec![0, 1], 0, q(2, 1))]);
    }

    #[test]
    fn dm_lattice_rejects_bad_blocks() {
        let bad = ExponentialFactor::new(
            2,
            vec![
                super::super::factor::Term {
                    exp: vec![1, 0],
                    coeff: q(1, 1),
                },
                super::super::factor::Term {
                    exp: vec![0, 1],
                    coeff: q(1, 1),
                },
            ],
            None,
        )
        .unwrap();
        let m = ElementaryModel::new(bad, RegularBlock::trivial(1, 2)).unwrap();
        let c = FormalConnection::new(LocalBoundary::new(2, 2).unwrap(), vec![m]).unwrap();
        assert!(matches!(dm_lattice(&c), Err(Error::NotGood { block: 0, .. })));
    }
}
