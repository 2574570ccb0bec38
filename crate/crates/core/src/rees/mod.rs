//! Graded Rees modules `Ñ = ⊕_p N_p z^p` over `D̃_X(log D)`, presented on
//! sub-boxes `{exp ≤ top}` with exact lower ends, and the checks run on them.
//!
//! The generators act by sparse matrices: `z` and `ξ̃_i` raise the z-degree by
//! one, `x_i` preserves it. `ξ̃_i = z·x_i∂_i` on boundary variables and `z·∂_i`
//! on smooth ones. Terms pushed above `top` are dropped, so every algorithm only
//! reads the action on sub-boxes where it is exact.

mod euler;
mod koszul;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use euler::{euler_bijectivity, localization_check, EulerReport, LocalizationReport, SingularBand};
pub use koszul::{
    boundary_subsequences, gr_koszul_acyclicity, koszul_tensor_check, koszul_tensor_complex, rees_checks,
    regular_sequence_check, GrKoszulReport, KoszulTensorReport, ReesChecks, RegularSequenceReport, SequenceStep,
};

use crate::algebra::{box_points, nullspace, rank_of_vectors, MonomialLabel, Rational, SparseMatrixQ};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::settings::Settings;
use crate::tower::LatticeTower;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedReesModule {
    pub n_vars: usize,
    pub ell: usize,
    /// Every label satisfies `exp ≤ top`.
    pub top: Vec<i64>,
    /// `pieces[p]` is a basis of `N_p` on the sub-box.
    pub pieces: Vec<Vec<MonomialLabel>>,
    /// `z[p]: N_p → N_{p+1}`.
    pub z: Vec<SparseMatrixQ>,
    /// `x[i][p]: N_p → N_p`.
    pub x: Vec<Vec<SparseMatrixQ>>,
    /// `xi[i][p]: N_p → N_{p+1}`.
    pub xi: Vec<Vec<SparseMatrixQ>>,
}

fn index_of(labels: &[MonomialLabel]) -> HashMap<&MonomialLabel, usize> {
    labels.iter().enumerate().map(|(i, l)| (l, i)).collect()
}

fn unit(i: usize) -> Vec<(usize, Rational)> {
    vec![(i, Rational::one())]
}

fn block_diag(a: &SparseMatrixQ, b: &SparseMatrixQ) -> Result<SparseMatrixQ> {
    let trip = a
        .entries()
        .map(|(i, j, v)| (i, j, v.clone()))
        .chain(b.entries().map(|(i, j, v)| (i + a.rows(), j + a.cols(), v.clone())))
        .collect::<Vec<_>>();
    SparseMatrixQ::from_triplets(a.rows() + b.rows(), a.cols() + b.cols(), trip)
}

fn restrict(m: &SparseMatrixQ, rows: &[usize], cols: &[usize]) -> SparseMatrixQ {
    m.select_columns(cols).transpose().select_columns(rows).transpose()
}

impl GradedReesModule {
    /// Highest z-degree represented.
    pub fn depth(&self) -> usize {
        self.pieces.len() - 1
    }

    pub fn dim(&self, p: usize) -> usize {
        self.pieces[p].len()
    }

    /// Indices of the basis of `N_p` with `exp ≤ bound`.
    pub fn below(&self, p: usize, bound: &[i64]) -> Vec<usize> {
        self.pieces[p]
            .iter()
            .enumerate()
            .filter(|(_, l)| l.exp.iter().zip(bound).all(|(e, b)| e <= b))
            .map(|(i, _)| i)
            .collect()
    }

    /// `top − Σ_{i∈vars} e_i`.
    pub fn lowered(&self, vars: &[usize]) -> Vec<i64> {
        let mut b = self.top.clone();
        for &i in vars {
            b[i] -= 1;
        }
        b
    }

    /// `z^k: N_p → N_{p+k}`.
    pub fn z_power(&self, p: usize, k: usize) -> Result<SparseMatrixQ> {
        let mut m = SparseMatrixQ::identity(self.dim(p));
        for q in p..p + k {
            m = self.z[q].mul(&m)?;
        }
        Ok(m)
    }

    fn check_shapes(&self) -> Result<()> {
        let d = self.pieces.len();
        let bad = self.z.len() + 1 != d
            || self.x.len() != self.n_vars
            || self.xi.len() != self.n_vars
            || self.x.iter().any(|v| v.len() != d)
            || self.xi.iter().any(|v| v.len() + 1 != d);
        if bad {
            return Err(Error::Invalid(
                "graded Rees module with inconsistent operator lists".into(),
            ));
        }
        Ok(())
    }

    /// The defining relations of `D̃(log)` on columns at distance two from `top`:
    /// commuting `z`, `x`, `ξ̃`, except `[ξ̃_i, x_i] = z·x_i` (boundary) or `z` (smooth).
    pub fn check_relations(&self) -> Result<()> {
        self.check_shapes()?;
        let n = self.n_vars;
        let inner: Vec<i64> = self.top.iter().map(|t| t - 2).collect();
        let fail = |what: String| Err(Error::Invalid(format!("relation fails: {what}")));
        for p in 0..=self.depth() {
            let cols = self.below(p, &inner);
            let eq = |a: &SparseMatrixQ, b: &SparseMatrixQ| a.select_columns(&cols) == b.select_columns(&cols);
            for i in 0..n {
                for j in 0..n {
                    if !eq(&self.x[i][p].mul(&self.x[j][p])?, &self.x[j][p].mul(&self.x[i][p])?) {
                        return fail(format!("x_{i} x_{j} in degree {p}"));
                    }
                }
                if p == self.depth() {
                    continue;
                }
                if !eq(&self.z[p].mul(&self.x[i][p])?, &self.x[i][p + 1].mul(&self.z[p])?) {
                    return fail(format!("z x_{i} in degree {p}"));
                }
                for j in 0..n {
                    let lhs = self.xi[i][p].mul(&self.x[j][p])?;
                    let rhs = self.x[j][p + 1].mul(&self.xi[i][p])?;
                    let mut expect: Vec<(usize, usize, Rational)> =
                        rhs.entries().map(|(a, b, v)| (a, b, v.clone())).collect();
                    if i == j {
                        let extra = if i < self.ell {
                            self.z[p].mul(&self.x[i][p])?
                        } else {
                            self.z[p].clone()
                        };
                        expect.extend(extra.entries().map(|(a, b, v)| (a, b, v.clone())));
                    }
                    let expect = SparseMatrixQ::from_triplets(rhs.rows(), rhs.cols(), expect)?;
                    if !eq(&lhs, &expect) {
                        return fail(format!("[ξ̃_{i}, x_{j}] in degree {p}"));
                    }
                }
                if p + 1 == self.depth() {
                    continue;
                }
                if !eq(&self.z[p + 1].mul(&self.xi[i][p])?, &self.xi[i][p + 1].mul(&self.z[p])?) {
                    return fail(format!("z ξ̃_{i} in degree {p}"));
                }
                for j in 0..n {
                    if !eq(
                        &self.xi[i][p + 1].mul(&self.xi[j][p])?,
                        &self.xi[j][p + 1].mul(&self.xi[i][p])?,
                    ) {
                        return fail(format!("ξ̃_{i} ξ̃_{j} in degree {p}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Ñ ⊕ ℚ·v` with `v` in degree `p` and every generator acting by zero on `v`.
    pub fn with_point_summand(&self, p: usize) -> Result<Self> {
        if p > self.depth() {
            return Err(Error::Invalid(format!("degree {p} beyond depth {}", self.depth())));
        }
        let label = MonomialLabel {
            block: usize::MAX,
            tag: vec![-1],
            exp: vec![0; self.n_vars],
            comp: 0,
        };
        let d = self.depth();
        let extra = |q: usize| usize::from(q == p);
        let pieces = (0..=d)
            .map(|q| {
                let mut v = self.pieces[q].clone();
                if q == p {
                    v.push(label.clone());
                }
                v
            })
            .collect();
        let pad =
            |m: &SparseMatrixQ, src: usize, tgt: usize| block_diag(m, &SparseMatrixQ::zero(extra(tgt), extra(src)));
        Ok(GradedReesModule {
            n_vars: self.n_vars,
            ell: self.ell,
            top: self.top.clone(),
            pieces,
            z: (0..d).map(|q| pad(&self.z[q], q, q + 1)).collect::<Result<_>>()?,
            x: self
                .x
                .iter()
                .map(|v| (0..=d).map(|q| pad(&v[q], q, q)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
            xi: self
                .xi
                .iter()
                .map(|v| (0..d).map(|q| pad(&v[q], q, q + 1)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        })
    }

    /// `Ñ ⊕ (𝒪/x_var)[z]`: the quotient of the trivial Rees module by `x_var`,
    /// on exponents `[0, top]` with `γ_var = 0`, the same in every degree.
    pub fn with_killed_summand(&self, var: usize) -> Result<Self> {
        if var >= self.ell {
            return Err(Error::IndexOutOfRange {
                index: var,
                n_vars: self.ell,
            });
        }
        let mut hi = self.top.clone();
        hi[var] = 0;
        let labels: Vec<MonomialLabel> = box_points(&vec![0; self.n_vars], &hi)
            .into_iter()
            .map(|exp| MonomialLabel {
                block: usize::MAX,
                tag: vec![-2],
                exp,
                comp: 0,
            })
            .collect();
        let idx = index_of(&labels);
        let k = labels.len();
        let d = self.depth();
        let x: Vec<SparseMatrixQ> = (0..self.n_vars)
            .map(|i| {
                let trip = labels.iter().enumerate().filter_map(|(c, l)| {
                    if i == var {
                        return None;
                    }
                    let mut e = l.exp.clone();
                    e[i] += 1;
                    let target = MonomialLabel { exp: e, ..l.clone() };
                    idx.get(&target).map(|&r| (r, c, Rational::one()))
                });
                SparseMatrixQ::from_triplets(k, k, trip.collect::<Vec<_>>())
            })
            .collect::<Result<_>>()?;
        let xi: Vec<SparseMatrixQ> = (0..self.n_vars)
            .map(|i| {
                let trip = labels.iter().enumerate().filter_map(|(c, l)| {
                    if i < self.ell {
                        (i != var && l.exp[i] != 0).then(|| (c, c, Rational::int(l.exp[i])))
                    } else {
                        let mut e = l.exp.clone();
                        e[i] -= 1;
                        let target = MonomialLabel { exp: e, ..l.clone() };
                        idx.get(&target).map(|&r| (r, c, Rational::int(l.exp[i])))
                    }
                });
                SparseMatrixQ::from_triplets(k, k, trip.collect::<Vec<_>>())
            })
            .collect::<Result<_>>()?;
        let id = SparseMatrixQ::identity(k);
        Ok(GradedReesModule {
            n_vars: self.n_vars,
            ell: self.ell,
            top: self.top.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|v| v.iter().cloned().chain(labels.iter().cloned()).collect())
                .collect(),
            z: (0..d).map(|q| block_diag(&self.z[q], &id)).collect::<Result<_>>()?,
            x: (0..self.n_vars)
                .map(|i| (0..=d).map(|q| block_diag(&self.x[i][q], &x[i])).collect::<Result<_>>())
                .collect::<Result<_>>()?,
            xi: (0..self.n_vars)
                .map(|i| {
                    (0..d)
                        .map(|q| block_diag(&self.xi[i][q], &xi[i]))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?,
        })
    }

    /// `Ñ / z^k Ñ`, for modules where `z` maps basis vectors to basis vectors.
    pub fn quotient_by_z_power(&self, k: usize) -> Result<Self> {
        let d = self.depth();
        let mut keep: Vec<Vec<usize>> = Vec::with_capacity(d + 1);
        for p in 0..=d {
            let mut hit = vec![false; self.dim(p)];
            if p >= k {
                let zk = self.z_power(p - k, k)?;
                for col in zk.columns() {
                    match col.as_slice() {
                        [] => {}
                        [(r, v)] if v.is_one() => hit[*r] = true,
                        _ => return Err(Error::Invalid("z does not map basis vectors to basis vectors".into())),
                    }
                }
            }
            keep.push((0..self.dim(p)).filter(|&i| !hit[i]).collect());
        }
        let sub = |m: &SparseMatrixQ, src: usize, tgt: usize| restrict(m, &keep[tgt], &keep[src]);
        Ok(GradedReesModule {
            n_vars: self.n_vars,
            ell: self.ell,
            top: self.top.clone(),
            pieces: (0..=d)
                .map(|p| keep[p].iter().map(|&i| self.pieces[p][i].clone()).collect())
                .collect(),
            z: (0..d).map(|p| sub(&self.z[p], p, p + 1)).collect(),
            x: self
                .x
                .iter()
                .map(|v| (0..=d).map(|p| sub(&v[p], p, p)).collect())
                .collect(),
            xi: self
                .xi
                .iter()
                .map(|v| (0..d).map(|p| sub(&v[p], p, p + 1)).collect())
                .collect(),
        })
    }

    /// Basis of `ker(z^k: N_p → N_{p+k})`.
    fn torsion_basis(&self, p: usize, k: usize) -> Result<Vec<Vec<(usize, Rational)>>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        Ok(nullspace(&self.z_power(p, k)?))
    }
}

/// `Ñ = ⊕_p E_p(D + Δ) z^p` on the sub-box `exp ≤ top`, degrees `0..=depth`.
pub fn rees_of_tower(
    t: &LatticeTower,
    delta: &TwistDivisor,
    top: &[i64],
    settings: &Settings,
) -> Result<GradedReesModule> {
    let conn = &t.connection;
    let (n, ell) = (conn.n_vars(), conn.ell());
    if top.len() != n {
        return Err(Error::VarMismatch {
            expected: n,
            found: top.len(),
        });
    }
    let t = t.with_delta(delta.clone())?;
    let action = conn.action();
    let d = t.depth();
    let mut pieces: Vec<Vec<MonomialLabel>> = Vec::with_capacity(d + 1);
    let mut lows: Vec<Vec<Vec<i64>>> = Vec::with_capacity(d + 1);
    let mut total = 0;
    for p in 0..=d {
        let mut labels = Vec::new();
        let mut low = Vec::new();
        for b in 0..action.n_blocks() {
            let s = t.shift(p as i64, b).expect("nonnegative level");
            let lo: Vec<i64> = (0..n).map(|j| if j < ell { -s[j] - 1 } else { 0 }).collect();
            for exp in box_points(&lo, top) {
                for comp in 0..action.block_rank(b) {
                    labels.push(MonomialLabel {
                        block: b,
                        tag: Vec::new(),
                        exp: exp.clone(),
                        comp,
                    });
                }
            }
            low.push(lo);
        }
        total += labels.len();
        settings.check_dim(total)?;
        pieces.push(labels);
        lows.push(low);
    }
    let indices: Vec<HashMap<&MonomialLabel, usize>> = pieces.iter().map(|v| index_of(v)).collect();
    let place = |p: usize, l: MonomialLabel| -> Result<Option<usize>> {
        if let Some(&i) = indices[p].get(&l) {
            return Ok(Some(i));
        }
        if l.exp.iter().zip(top).any(|(e, t)| e > t) {
            return Ok(None);
        }
        Err(Error::WindowOverflow(format!(
            "{l:?} leaves the lattice in degree {p} (lower end {:?})",
            lows[p][l.block]
        )))
    };
    let z = (0..d)
        .map(|p| {
            let mut trip = Vec::new();
            for (c, l) in pieces[p].iter().enumerate() {
                if let Some(r) = place(p + 1, l.clone())? {
                    trip.push((r, c, Rational::one()));
                }
            }
            SparseMatrixQ::from_triplets(pieces[p + 1].len(), pieces[p].len(), trip)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut x = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    for i in 0..n {
        let mut xs = Vec::with_capacity(d + 1);
        for (p, piece) in pieces.iter().enumerate().take(d + 1) {
            let mut trip = Vec::new();
            for (c, l) in piece.iter().enumerate() {
                let mut e = l.exp.clone();
                e[i] += 1;
                if let Some(r) = place(p, MonomialLabel { exp: e, ..l.clone() })? {
                    trip.push((r, c, Rational::one()));
                }
            }
            xs.push(SparseMatrixQ::from_triplets(pieces[p].len(), pieces[p].len(), trip)?);
        }
        x.push(xs);
        let mut xis = Vec::with_capacity(d);
        for p in 0..d {
            let mut trip = Vec::new();
            for (c, l) in pieces[p].iter().enumerate() {
                for (exp, comp, v) in action.theta(l.block, i, &l.exp, l.comp) {
                    let target = MonomialLabel {
                        block: l.block,
                        tag: Vec::new(),
                        exp,
                        comp,
                    };
                    if let Some(r) = place(p + 1, target)? {
                        trip.push((r, c, v));
                    }
                }
            }
            xis.push(SparseMatrixQ::from_triplets(
                pieces[p + 1].len(),
                pieces[p].len(),
                trip,
            )?);
        }
        xi.push(xis);
    }
    Ok(GradedReesModule {
        n_vars: n,
        ell,
        top: top.to_vec(),
        pieces,
        z,
        x,
        xi,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    /// `dim ker(z: N_p → N_{p+1})` for `p < depth`.
    pub z_kernel: Vec<usize>,
    /// `layers[k−1][p] = dim ker(z^k)` on `N_p`, for `p + k ≤ depth`.
    pub layers: Vec<Vec<usize>>,
    /// Largest `k` with `ker z^k ≠ ker z^{k−1}` somewhere.
    pub torsion_length: usize,
    /// The torsion filtration still grows at the deepest computable power.
    pub cap_reached: bool,
    pub strict: bool,
}

/// z-torsion of `Ñ`: strict iff `z` is injective in every degree.
pub fn strictness_check(m: &GradedReesModule) -> Result<TorsionReport> {
    m.check_shapes()?;
    let d = m.depth();
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut torsion_length = 0;
    let mut cap_reached = false;
    for k in 1..=d {
        let dims: Vec<usize> = (0..=d - k)
            .map(|p| m.dim(p) - crate::algebra::rank_q(&m.z_power(p, k).expect("composable")))
            .collect();
        let grew = dims
            .iter()
            .enumerate()
            .any(|(p, &dk)| dk > layers.last().map_or(0, |prev| prev[p]));
        if grew {
            torsion_length = k;
            cap_reached = k == d;
        }
        layers.push(dims);
    }
    let z_kernel = layers.first().cloned().unwrap_or_default();
    Ok(TorsionReport {
        strict: z_kernel.iter().all(|&k| k == 0),
        z_kernel,
        layers,
        torsion_length,
        cap_reached,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerBalance {
    pub layer: usize,
    /// Degrees `p` of the bands.
    pub degrees: Vec<usize>,
    /// `dim ker(z: G_p → G_{p+1})` with `G = ker z^k / ker z^{k−1}`.
    pub kernel: Vec<usize>,
    /// `dim coker(z: G_{p−1} → G_p)`.
    pub cokernel: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct K0TorsionReport {
    pub layers: Vec<LayerBalance>,
    /// `Σ (kernel − cokernel)` over all layers and bands.
    pub total: i64,
    pub cancels: bool,
}

/// `rank(z: G_p → G_{p+1})` on `G = ker z^k / ker z^{k−1}`.
fn layer_rank(m: &GradedReesModule, k: usize, p: usize) -> Result<usize> {
    let upper = m.torsion_basis(p, k)?;
    let lower = m.torsion_basis(p + 1, k - 1)?;
    let mut vecs: Vec<Vec<(usize, Rational)>> = upper.iter().map(|v| m.z[p].apply(v)).collect();
    vecs.extend(lower.iter().cloned());
    Ok(rank_of_vectors(vecs.iter().map(|v| v.as_slice())) - rank_of_vectors(lower.iter().map(|v| v.as_slice())))
}

/// Per torsion layer `G`, `z` has equal kernel and cokernel on every band, so
/// `[Li_z^* G] = 0` and the torsion contributes nothing to the class.
pub fn k0_torsion_cancellation(m: &GradedReesModule) -> Result<K0TorsionReport> {
    let report = strictness_check(m)?;
    let d = m.depth();
    let mut layers = Vec::new();
    let mut total = 0i64;
    for k in 1..=report.torsion_length {
        let dim_g = |p: usize| -> Result<usize> { Ok(m.torsion_basis(p, k)?.len() - m.torsion_basis(p, k - 1)?.len()) };
        let mut bal = LayerBalance {
            layer: k,
            degrees: Vec::new(),
            kernel: Vec::new(),
            cokernel: Vec::new(),
        };
        for p in 1..d.saturating_sub(k) {
            let g = dim_g(p)?;
            let kernel = g - layer_rank(m, k, p)?;
            let cokernel = g - layer_rank(m, k, p - 1)?;
            total += kernel as i64 - cokernel as i64;
            bal.degrees.push(p);
            bal.kernel.push(kernel);
            bal.cokernel.push(cokernel);
        }
        layers.push(bal);
    }
    let cancels = total == 0 && layers.iter().all(|l| l.kernel == l.cokernel);
    Ok(K0TorsionReport { layers, total, cancels })
}

#[cfg(test)]
mod tests;
