//! Regular parts: residues per boundary branch plus commuting nilpotent matrices.

use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{Error, Result};

pub type DenseMatrix = Vec<Vec<Rational>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RegularRepr {
    rank: usize,
    residues: Vec<Rational>,
    #[serde(default)]
    nilpotent: Option<Vec<DenseMatrix>>,
}

/// On the residue line the basis satisfies
/// `x_j∂_j e_l = −λ_j e_l + Σ_k N_j[k][l] e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RegularRepr", into = "RegularRepr")]
pub struct RegularBlock {
    rank: usize,
    residues: Vec<Rational>,
    nilpotent: Vec<DenseMatrix>,
}

impl TryFrom<RegularRepr> for RegularBlock {
    type Error = Error;
    fn try_from(r: RegularRepr) -> Result<Self> {
        let ell = r.residues.len();
        let nil = r.nilpotent.unwrap_or_else(|| vec![zero_matrix(r.rank); ell]);
        RegularBlock::new(r.rank, r.residues, nil)
    }
}

impl From<RegularBlock> for RegularRepr {
    fn from(b: RegularBlock) -> Self {
        let trivial = b.nilpotent.iter().all(is_zero_matrix);
        RegularRepr {
            rank: b.rank,
            residues: b.residues,
            nilpotent: (!trivial).then_some(b.nilpotent),
        }
    }
}

pub fn zero_matrix(n: usize) -> DenseMatrix {
    vec![vec![Rational::zero(); n]; n]
}

fn is_zero_matrix(m: &DenseMatrix) -> bool {
    m.iter().flatten().all(Rational::is_zero)
}

fn mat_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.len();
    let mut out = zero_matrix(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &(&a[i][k] * &b[k][j]);
            }
        }
    }
    out
}

impl RegularBlock {
    /// τ-normalized data: every residue in `[0, 1)`.
    pub fn new(rank: usize, residues: Vec<Rational>, nilpotent: Vec<DenseMatrix>) -> Result<Self> {
        if let Some(l) = residues.iter().find(|l| l.is_negative() || *l >= &Rational::one()) {
            return Err(Error::Invalid(format!("residue {l} outside [0, 1)")));
        }
        Self::with_arbitrary_residues(rank, residues, nilpotent)
    }

    /// Same checks except the residue range; used for negative controls.
    pub fn with_arbitrary_residues(rank: usize, residues: Vec<Rational>, nilpotent: Vec<DenseMatrix>) -> Result<Self> {
        if nilpotent.len() != residues.len() {
            return Err(Error::Invalid(format!(
                "{} residues but {} nilpotent matrices",
                residues.len(),
                nilpotent.len()
            )));
        }
        for m in &nilpotent {
            if m.len() != rank || m.iter().any(|r| r.len() != rank) {
                return Err(Error::Invalid(format!("nilpotent matrix is not {rank}×{rank}")));
            }
            let mut p = m.clone();
            for _ in 1..rank.max(1) {
                p = mat_mul(&p, m);
            }
            if !is_zero_matrix(&p) {
                return Err(Error::Invalid("matrix is not nilpotent".into()));
            }
        }
        for (i, a) in nilpotent.iter().enumerate() {
            for b in &nilpotent[i + 1..] {
                if mat_mul(a, b) != mat_mul(b, a) {
                    return Err(Error::Invalid("nilpotent matrices do not commute".into()));
                }
            }
        }
        Ok(RegularBlock {
            rank,
            residues,
            nilpotent,
        })
    }

    /// Rank `rank`, residues `λ`, no nilpotent part.
    pub fn semisimple(rank: usize, residues: Vec<Rational>) -> Result<Self> {
        let ell = residues.len();
        Self::new(rank, residues, vec![zero_matrix(rank); ell])
    }

    pub fn trivial(rank: usize, ell: usize) -> Self {
        Self::semisimple(rank, vec![Rational::zero(); ell]).expect("zero residues")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ell(&self) -> usize {
        self.residues.len()
    }

    pub fn residues(&self) -> &[Rational] {
        &self.residues
    }

    pub fn nilpotent(&self, j: usize) -> &DenseMatrix {
        &self.nilpotent[j]
    }

    pub fn is_normalized(&self) -> bool {
        self.residues.iter().all(|l| !l.is_negative() && l < &Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn jordan(c: i64) -> DenseMatrix {
        vec![vec![q(0, 1), q(c, 1)], vec![q(0, 1), q(0, 1)]]
    }

    #[test]
    fn validation() {
        assert!(RegularBlock::semisimple(1, vec![q(1, 2)]).is_ok());
        assert!(RegularBlock::semisimple(1, vec![q(1, 1)]).is_err());
        assert!(RegularBlock::semisimple(1, vec![q(-1, 3)]).is_err());
        assert!(RegularBlock::with_arbitrary_residues(1, vec![q(-1, 1)], vec![zero_matrix(1)]).is_ok());
        assert!(RegularBlock::new(2, vec![q(0, 1), q(1, 3)], vec![jordan(1), jordan(2)]).is_ok());
        let not_nil = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(0, 1)]];
        assert!(RegularBlock::new(2, vec![q(0, 1)], vec![not_nil]).is_err());
        let lower = vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)]];
        assert!(RegularBlock::new(2, vec![q(0, 1), q(0, 1)], vec![jordan(1), lower]).is_err());
    }

    #[test]
    fn serde_defaults_nilpotent() {
        let b: RegularBlock = serde_json::from_str(r#"{"rank":2,"residues":["1/3"]}"#).unwrap();
        assert_eq!(b, RegularBlock::semisimple(2, vec![q(1, 3)]).unwrap());
        assert!(serde_json::from_str::<RegularBlock>(r#"{"rank":1,"residues":["3/2"]}"#).is_err());
    }
}
