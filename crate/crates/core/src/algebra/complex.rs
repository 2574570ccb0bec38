//! Finite cochain complexes of ℚ-vector spaces with monomial bases.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rational::Rational;
use super::sparse::{rank_q, SparseMatrixQ};
use crate::error::{Error, Result};

/// A basis vector `x^exp · e_comp` of block `block`, decorated by `tag`
/// (a frame mask, an operator multi-index, ...).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonomialLabel {
    pub block: usize,
    pub tag: Vec<i64>,
    pub exp: Vec<i64>,
    pub comp: usize,
}

impl MonomialLabel {
    pub fn plain(exp: Vec<i64>) -> Self {
        MonomialLabel {
            block: 0,
            tag: Vec::new(),
            exp,
            comp: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteComplex {
    start: i64,
    bases: Vec<Vec<MonomialLabel>>,
    /// `diffs[k]` maps degree `start + k` to `start + k + 1`.
    diffs: Vec<SparseMatrixQ>,
}

impl FiniteComplex {
    /// Shapes are checked; `d∘d = 0` is checked by [`complex_cohomology`].
    pub fn new(start: i64, bases: Vec<Vec<MonomialLabel>>, diffs: Vec<SparseMatrixQ>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::Invalid("complex with no degrees".into()));
        }
        if diffs.len() + 1 != bases.len() {
            return Err(Error::Invalid(format!(
                "{} spaces need {} differentials, got {}",
                bases.len(),
                bases.len() - 1,
                diffs.len()
            )));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.cols() != bases[k].len() || d.rows() != bases[k + 1].len() {
                return Err(Error::Invalid(format!(
                    "differential at degree {} is {}×{}, expected {}×{}",
                    start + k as i64,
                    d.rows(),
                    d.cols(),
                    bases[k + 1].len(),
                    bases[k].len()
                )));
            }
        }
        Ok(FiniteComplex { start, bases, diffs })
    }

    /// A complex from bare dimensions with anonymous labels.
    pub fn from_dims(start: i64, dims: &[usize], diffs: Vec<SparseMatrixQ>) -> Result<Self> {
        let bases = dims
            .iter()
            .map(|&n| (0..n as i64).map(|i| MonomialLabel::plain(vec![i])).collect())
            .collect();
        Self::new(start, bases, diffs)
    }

    pub fn zero() -> Self {
        FiniteComplex {
            start: 0,
            bases: vec![Vec::new()],
            diffs: Vec::new(),
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn degrees(&self) -> std::ops::Range<i64> {
        self.start..self.start + self.bases.len() as i64
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.index(degree).map_or(0, |k| self.bases[k].len())
    }

    pub fn basis(&self, degree: i64) -> &[MonomialLabel] {
        self.index(degree).map_or(&[], |k| &self.bases[k])
    }

    /// Differential leaving `degree`, if both ends are represented.
    pub fn differential(&self, degree: i64) -> Option<&SparseMatrixQ> {
        self.index(degree).and_then(|k| self.diffs.get(k))
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(Vec::len).sum()
    }

    fn index(&self, degree: i64) -> Option<usize> {
        let k = degree - self.start;
        (k >= 0 && (k as usize) < self.bases.len()).then_some(k as usize)
    }

    /// Exact check of `d∘d = 0`; reports the first offending source degree.
    pub fn check_d_squared(&self) -> Result<()> {
        for k in 0..self.diffs.len().saturating_sub(1) {
            let dd = self.diffs[k + 1].mul(&self.diffs[k])?;
            if !dd.is_zero() {
                return Err(Error::NotAComplex {
                    degree: self.start + k as i64,
                });
            }
        }
        Ok(())
    }

    /// `Σ (−1)^k dim C^k`.
    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|d| sign(d) * self.dim(d) as i64).sum()
    }
}

fn sign(d: i64) -> i64 {
    if d.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `dim H^k = dim ker d_k − rank d_{k−1}` for every represented degree.
pub fn complex_cohomology(c: &FiniteComplex) -> Result<BTreeMap<i64, usize>> {
    c.check_d_squared()?;
    let ranks: Vec<usize> = c.diffs.iter().map(rank_q).collect();
    let mut out = BTreeMap::new();
    for (k, basis) in c.bases.iter().enumerate() {
        let out_rank = ranks.get(k).copied().unwrap_or(0);
        let in_rank = if k > 0 { ranks[k - 1] } else { 0 };
        out.insert(c.start + k as i64, basis.len() - out_rank - in_rank);
    }
    Ok(out)
}

pub fn is_acyclic(c: &FiniteComplex) -> Result<bool> {
    Ok(complex_cohomology(c)?.values().all(|&h| h == 0))
}

/// Mapping cone of a chain map `f: A → B` given degreewise on the union of degrees.
/// `cone^k = A^{k+1} ⊕ B^k`, `d(a, b) = (−d a, f a + d b)`.
/// `f` is keyed by degree; missing degrees mean the zero map.
pub fn mapping_cone(a: &FiniteComplex, b: &FiniteComplex, f: &BTreeMap<i64, SparseMatrixQ>) -> Result<FiniteComplex> {
    for (deg, m) in f {
        if m.cols() != a.dim(*deg) || m.rows() != b.dim(*deg) {
            return Err(Error::Invalid(format!(
                "chain map at degree {deg} has shape {}×{}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let lo = (a.start - 1).min(b.start);
    let hi = (a.degrees().end - 1).max(b.degrees().end);
    let mut bases = Vec::new();
    for k in lo..hi {
        let mut basis: Vec<MonomialLabel> = a.basis(k + 1).iter().map(|l| tagged(l, 0)).collect();
        basis.extend(b.basis(k).iter().map(|l| tagged(l, 1)));
        bases.push(basis);
    }
    let mut diffs = Vec::new();
    for k in lo..hi - 1 {
        let (na1, nb0) = (a.dim(k + 1), b.dim(k));
        let (na2, nb1) = (a.dim(k + 2), b.dim(k + 1));
        let mut trip = Vec::new();
        if let Some(da) = a.differential(k + 1) {
            for (i, j, v) in da.entries() {
                trip.push((i, j, -v));
            }
        }
        if let Some(fk) = f.get(&(k + 1)) {
            for (i, j, v) in fk.entries() {
                trip.push((na2 + i, j, v.clone()));
            }
        }
        if let Some(db) = b.differential(k) {
            for (i, j, v) in db.entries() {
                trip.push((na2 + i, na1 + j, v.clone()));
            }
        }
        diffs.push(SparseMatrixQ::from_triplets(na2 + nb1, na1 + nb0, trip)?);
    }
    FiniteComplex::new(lo, bases, diffs)
}

fn tagged(l: &MonomialLabel, side: i64) -> MonomialLabel {
    let mut t = l.clone();
    t.tag.insert(0, side);
    t
}

/// Check that `f` commutes with the differentials.
pub fn is_chain_map(a: &FiniteComplex, b: &FiniteComplex, f: &BTreeMap<i64, SparseMatrixQ>) -> Result<bool> {
    let zero = |r: usize, c: usize| SparseMatrixQ::zero(r, c);
    for k in a.degrees().start.min(b.degrees().start)..a.degrees().end.max(b.degrees().end) {
        let fk = f.get(&k).cloned().unwrap_or_else(|| zero(b.dim(k), a.dim(k)));
        let fk1 = f
            .get(&(k + 1))
            .cloned()
            .unwrap_or_else(|| zero(b.dim(k + 1), a.dim(k + 1)));
        let da = a
            .differential(k)
            .cloned()
            .unwrap_or_else(|| zero(a.dim(k + 1), a.dim(k)));
        let db = b
            .differential(k)
            .cloned()
            .unwrap_or_else(|| zero(b.dim(k + 1), b.dim(k)));
        let lhs = fk1.mul(&da)?;
        let rhs = db.mul(&fk)?;
        let neg: Vec<(usize, usize, Rational)> = rhs.entries().map(|(i, j, v)| (i, j, -v)).collect();
        let diff = SparseMatrixQ::from_triplets(
            lhs.rows(),
            lhs.cols(),
            lhs.entries().map(|(i, j, v)| (i, j, v.clone())).chain(neg),
        )?;
        if !diff.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::q;

    #[test]
    fn two_term_examples() {
        let c = FiniteComplex::from_dims(0, &[1, 1], vec![SparseMatrixQ::zero(1, 1)]).unwrap();
        let h = complex_cohomology(&c).unwrap();
        assert_eq!(h[&0], 1);
        assert_eq!(h[&1], 1);

        let c = FiniteComplex::from_dims(0, &[1, 1], vec![SparseMatrixQ::identity(1)]).unwrap();
        assert!(is_acyclic(&c).unwrap());
    }

    /// Koszul complex of `x` on ℚ[x]/(x³), independent of any lattice code.
    #[test]
    fn koszul_on_truncated_polynomials() {
        let mult_x = SparseMatrixQ::from_triplets(3, 3, [(1, 0, q(1, 1)), (2, 1, q(1, 1))]).unwrap();
        let c = FiniteComplex::from_dims(-1, &[3, 3], vec![mult_x]).unwrap();
        let h = complex_cohomology(&c).unwrap();
        assert_eq!(h[&-1], 1);
        assert_eq!(h[&0], 1);
    }

    #[test]
    fn d_squared_violation_reported() {
        let one = SparseMatrixQ::identity(1);
        let c = FiniteComplex::from_dims(3, &[1, 1, 1], vec![one.clone(), one]).unwrap();
        assert_eq!(complex_cohomology(&c).unwrap_err(), Error::NotAComplex { degree: 3 });
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let c = FiniteComplex::from_dims(0, &[2, 2], vec![SparseMatrixQ::zero(2, 2)]).unwrap();
        let f: BTreeMap<i64, SparseMatrixQ> = [(0, SparseMatrixQ::identity(2)), (1, SparseMatrixQ::identity(2))].into();
        assert!(is_chain_map(&c, &c, &f).unwrap());
        let cone = mapping_cone(&c, &c, &f).unwrap();
        assert!(is_acyclic(&cone).unwrap());
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(FiniteComplex::from_dims(0, &[2, 1], vec![SparseMatrixQ::zero(2, 2)]).is_err());
    }
}
