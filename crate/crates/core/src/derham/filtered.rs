//! Complexes with named filtrations by basis subsets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebra::{FiniteComplex, MonomialLabel, SparseMatrixQ};
use crate::error::{Error, Result};

/// Level `p` → per degree (offset from the complex start) the sorted basis indices in the level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    pub levels: BTreeMap<i64, Vec<Vec<usize>>>,
}

impl Filtration {
    /// Build from a membership predicate on labels for each listed level.
    pub fn from_predicate<F>(c: &FiniteComplex, levels: impl IntoIterator<Item = i64>, member: F) -> Self
    where
        F: Fn(i64, i64, &MonomialLabel) -> bool,
    {
        let mut out = BTreeMap::new();
        for p in levels {
            let per_degree = c
                .degrees()
                .map(|k| {
                    c.basis(k)
                        .iter()
                        .enumerate()
                        .filter(|(_, l)| member(p, k, l))
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect();
            out.insert(p, per_degree);
        }
        Filtration { levels: out }
    }
}

/// Per boundary variable the number of kept exponents above each lattice bound,
/// per smooth variable the top degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub lengths: Vec<i64>,
    pub smooth_hi: Vec<i64>,
}

impl Truncation {
    pub fn from_window(w: &crate::algebra::WeightWindow, ell: usize) -> Self {
        Truncation {
            lengths: (0..ell).map(|j| w.hi[j] - w.lo[j] + 1).collect(),
            smooth_hi: w.hi[ell..].to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredComplex {
    pub base: FiniteComplex,
    /// Keys `"F"` (increasing), `"sigma"` and `"P"` (decreasing).
    pub filtrations: BTreeMap<String, Filtration>,
    /// Truncation certified free of edge effects: every term is a staggered box.
    pub truncation: Truncation,
}

impl FilteredComplex {
    pub fn level(&self, name: &str, p: i64) -> Option<&Vec<Vec<usize>>> {
        self.filtrations.get(name)?.levels.get(&p)
    }

    fn level_or_err(&self, name: &str, p: i64) -> Result<&Vec<Vec<usize>>> {
        self.level(name, p)
            .ok_or_else(|| Error::Invalid(format!("filtration {name} has no level {p}")))
    }

    /// Every level of every filtration is preserved by the differential.
    pub fn check_levels(&self) -> Result<()> {
        for (name, f) in &self.filtrations {
            for (p, per_degree) in &f.levels {
                for (k, idx) in per_degree.iter().enumerate().take(per_degree.len() - 1) {
                    let deg = self.base.start() + k as i64;
                    let Some(d) = self.base.differential(deg) else {
                        continue;
                    };
                    let inside: BTreeSet<usize> = idx.iter().copied().collect();
                    let target: BTreeSet<usize> = per_degree[k + 1].iter().copied().collect();
                    for (i, j, _) in d.entries() {
                        if inside.contains(&j) && !target.contains(&i) {
                            return Err(Error::Invalid(format!(
                                "filtration {name} level {p} is not a subcomplex at degree {deg}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The level itself as a complex.
    pub fn subcomplex(&self, name: &str, p: i64) -> Result<FiniteComplex> {
        let keep = self.level_or_err(name, p)?;
        let empty = vec![Vec::new(); keep.len()];
        self.quotient_of(keep, &empty)
    }

    /// `level(keep) / level(kill)`; `kill = None` means the zero subcomplex.
    pub fn subquotient(&self, name: &str, keep: i64, kill: Option<i64>) -> Result<FiniteComplex> {
        let u = self.level_or_err(name, keep)?;
        let empty = vec![Vec::new(); u.len()];
        let b = match kill {
            Some(p) => self.level_or_err(name, p)?,
            None => &empty,
        };
        self.quotient_of(u, b)
    }

    fn quotient_of(&self, u: &[Vec<usize>], b: &[Vec<usize>]) -> Result<FiniteComplex> {
        let c = &self.base;
        let mut kept: Vec<Vec<usize>> = Vec::new();
        for (k, (uk, bk)) in u.iter().zip(b).enumerate() {
            let bset: BTreeSet<usize> = bk.iter().copied().collect();
            let uset: BTreeSet<usize> = uk.iter().copied().collect();
            if !bset.is_subset(&uset) {
                return Err(Error::Invalid(format!(
                    "killed level is not contained in kept level at degree offset {k}"
                )));
            }
            kept.push(uk.iter().copied().filter(|i| !bset.contains(i)).collect());
        }
        let bases: Vec<Vec<MonomialLabel>> = kept
            .iter()
            .enumerate()
            .map(|(k, idx)| {
                let basis = c.basis(c.start() + k as i64);
                idx.iter().map(|&i| basis[i].clone()).collect()
            })
            .collect();
        let mut diffs = Vec::new();
        for k in 0..kept.len().saturating_sub(1) {
            let deg = c.start() + k as i64;
            let col_of: HashMap<usize, usize> = kept[k].iter().enumerate().map(|(n, &o)| (o, n)).collect();
            let row_of: HashMap<usize, usize> = kept[k + 1].iter().enumerate().map(|(n, &o)| (o, n)).collect();
            let mut trip = Vec::new();
            if let Some(d) = c.differential(deg) {
                for (i, j, v) in d.entries() {
                    if let (Some(&r), Some(&s)) = (row_of.get(&i), col_of.get(&j)) {
                        trip.push((r, s, v.clone()));
                    }
                }
            }
            diffs.push(SparseMatrixQ::from_triplets(kept[k + 1].len(), kept[k].len(), trip)?);
        }
        FiniteComplex::new(c.start(), bases, diffs)
    }
}

/// Degreewise matrix sending each label of `a` to the equal label of `b` (zero if absent).
pub fn label_inclusion(a: &FiniteComplex, b: &FiniteComplex) -> Result<BTreeMap<i64, SparseMatrixQ>> {
    let mut out = BTreeMap::new();
    for k in a.degrees() {
        let index: HashMap<&MonomialLabel, usize> = b.basis(k).iter().enumerate().map(|(i, l)| (l, i)).collect();
        let trip = a
            .basis(k)
            .iter()
            .enumerate()
            .filter_map(|(j, l)| index.get(l).map(|&i| (i, j, crate::algebra::Rational::one())));
        out.insert(k, SparseMatrixQ::from_triplets(b.dim(k), a.dim(k), trip)?);
    }
    Ok(out)
}
