//! Windowed Koszul-type complexes `⊕_J frame_J ⊗ (block lattices)` with the connection differential.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{box_points, FiniteComplex, MonomialLabel, SparseMatrixQ};
use crate::connection::ConnectionAction;
use crate::error::{Error, Result};
use crate::settings::Settings;

/// `Log`: `dx_i/x_i` on boundary variables with `θ_i = x_i∂_i`.
/// `Plain`: `dx_i` everywhere with the full derivations; the box of a boundary
/// variable in the frame is lowered by one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frames {
    Log,
    Plain,
}

/// Exponent box of one term on the boundary variables, plus an optional
/// lattice `x^{exclude}·𝒪` that is quotiented out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermShape {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub exclude: Option<Vec<i64>>,
}

impl TermShape {
    /// Lattice `x^{−shift}·𝒪` truncated to `lengths` exponents per variable.
    pub fn staggered(shift: &[i64], lengths: &[i64]) -> Self {
        TermShape {
            lo: shift.iter().map(|s| -s).collect(),
            hi: shift.iter().zip(lengths).map(|(s, l)| -s + l - 1).collect(),
            exclude: None,
        }
    }

    pub fn excluding(mut self, shift: Option<Vec<i64>>) -> Self {
        self.exclude = shift.map(|s| s.iter().map(|x| -x).collect());
        self
    }

    fn excludes(&self, exp: &[i64]) -> bool {
        match &self.exclude {
            Some(ex) => ex.iter().zip(exp).all(|(a, e)| e >= a),
            None => false,
        }
    }
}

/// Subsets of `{0..n}` of size `k`, as bit masks in increasing order.
pub fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

pub fn mask_indices(mask: u32) -> Vec<i64> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i as i64).collect()
}

fn mask_of(tag: &[i64]) -> u32 {
    tag.iter().fold(0, |m, &i| m | 1 << i)
}

pub(crate) struct Layout<'a> {
    pub action: &'a ConnectionAction,
    pub frames: Frames,
    /// Degree bound per smooth variable; frame `dx_j` lowers it by one.
    pub smooth_hi: Vec<i64>,
}

impl Layout<'_> {
    fn bounds(&self, shape: &TermShape, mask: u32) -> (Vec<i64>, Vec<i64>) {
        let ell = self.action.ell();
        let n = self.action.n_vars();
        let mut lo = shape.lo.clone();
        let mut hi = shape.hi.clone();
        if self.frames == Frames::Plain {
            for j in (0..ell).filter(|j| mask >> j & 1 == 1) {
                lo[j] -= 1;
                hi[j] -= 1;
            }
        }
        for j in ell..n {
            lo.push(0);
            hi.push(self.smooth_hi[j - ell] - (mask >> j & 1) as i64);
        }
        (lo, hi)
    }

    /// Assemble degrees `0..=n`; `shape(k, b)` is the term of block `b` in degree `k`,
    /// `None` for a zero term.
    pub fn assemble<F>(&self, settings: &Settings, shape: F) -> Result<FiniteComplex>
    where
        F: Fn(usize, usize) -> Option<TermShape>,
    {
        let n = self.action.n_vars();
        let ell = self.action.ell();
        let nb = self.action.n_blocks();
        let shapes: Vec<Vec<Option<TermShape>>> = (0..=n).map(|k| (0..nb).map(|b| shape(k, b)).collect()).collect();
        let mut bases: Vec<Vec<MonomialLabel>> = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for (k, row) in shapes.iter().enumerate() {
            let mut basis = Vec::new();
            for mask in subsets(n, k) {
                let tag = mask_indices(mask);
                for (b, sh) in row.iter().enumerate() {
                    let Some(sh) = sh else { continue };
                    let (lo, hi) = self.bounds(sh, mask);
                    for exp in box_points(&lo, &hi) {
                        if sh.excludes(&exp[..ell]) {
                            continue;
                        }
                        for comp in 0..self.action.block_rank(b) {
                            basis.push(MonomialLabel {
                                block: b,
                                tag: tag.clone(),
                                exp: exp.clone(),
                                comp,
                            });
                        }
                    }
                }
            }
            total += basis.len();
            settings.check_dim(total)?;
            bases.push(basis);
        }
        let mut diffs = Vec::with_capacity(n);
        for k in 0..n {
            let index: HashMap<&MonomialLabel, usize> = bases[k + 1].iter().enumerate().map(|(i, l)| (l, i)).collect();
            let mut trip = Vec::new();
            for (col, l) in bases[k].iter().enumerate() {
                let mask = mask_of(&l.tag);
                for i in (0..n).filter(|i| mask >> i & 1 == 0) {
                    let negate = (mask & ((1 << i) - 1)).count_ones() % 2 == 1;
                    let target_mask = mask | 1 << i;
                    let sh = shapes[k + 1][l.block].as_ref().ok_or_else(|| {
                        Error::WindowOverflow(format!("block {} has no term in degree {}", l.block, k + 1))
                    })?;
                    let (lo, hi) = self.bounds(sh, target_mask);
                    let v = match self.frames {
                        Frames::Log => self.action.theta(l.block, i, &l.exp, l.comp),
                        Frames::Plain => self.action.derivation(l.block, i, &l.exp, l.comp),
                    };
                    for (exp, comp, c) in v {
                        if (0..n).any(|j| exp[j] > hi[j]) || sh.excludes(&exp[..ell]) {
                            continue;
                        }
                        if let Some(j) = (0..n).find(|&j| exp[j] < lo[j]) {
                            return Err(Error::WindowOverflow(format!(
                                "differential leaves the lattice of block {} in variable {j} at degree {}",
                                l.block,
                                k + 1
                            )));
                        }
                        let target = MonomialLabel {
                            block: l.block,
                            tag: mask_indices(target_mask),
                            exp,
                            comp,
                        };
                        let row = *index
                            .get(&target)
                            .ok_or_else(|| Error::WindowOverflow(format!("missing target {target:?}")))?;
                        trip.push((row, col, if negate { -c } else { c }));
                    }
                }
            }
            diffs.push(SparseMatrixQ::from_triplets(bases[k + 1].len(), bases[k].len(), trip)?);
        }
        let c = FiniteComplex::new(0, bases, diffs)?;
        c.check_d_squared()?;
        Ok(c)
    }
}
