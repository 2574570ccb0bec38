//! The coherent filtration `F_p = Σ_{j+k≤p} F_jD·E_k(D)` on P¹, detection of
//! `p₀` by local acyclicity of `gr_p DR`, and the class `−[ω⁻¹⊗F_{p₀}] + [F_{p₀+1}]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{rank_q, Rational, SparseMatrixQ};
use crate::connection::{local_formal_type_of, BlockVector, ConnectionAction, CurveConnection};
use crate::error::{Error, Result};
use crate::geometry::{k0_class, K0Class, LineBundleP1, SheafTerm};
use crate::tower::monomial_span;

use super::GlobalTower;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoherentFiltration {
    /// `levels[p][k]`: `F_p` of summand `k`.
    pub levels: Vec<Vec<LineBundleP1>>,
    /// `deg F_p` summed over summands.
    pub degrees: Vec<i64>,
    /// Growth `deg F_p − deg F_{p−1}` once constant.
    pub slope: i64,
    pub stabilized_from: usize,
    /// `local[k][j][p]`: pole order of `F_p` at boundary point `j` relative to the seed.
    pub local: Vec<Vec<Vec<i64>>>,
}

/// Pole orders of `F_jD·L` for `j = 0..=steps`, `L = z^{start}·𝒪̂` on a disc.
fn derivative_chain(action: &ConnectionAction, start: i64, steps: usize, guard: i64) -> Result<Vec<i64>> {
    let rank = action.block_rank(0);
    let mut a = vec![start];
    for _ in 0..steps {
        let cur = *a.last().expect("nonempty");
        let mut gens: Vec<BlockVector> = Vec::new();
        for c in 0..rank {
            gens.push(vec![(vec![cur], c, Rational::one())]);
            gens.push(action.derivation(0, 0, &[cur], c));
        }
        match monomial_span(&gens, rank, &[cur + 2], &[guard])? {
            Some(m) => a.push(m[0]),
            None => return Err(Error::NotLocallyFree(format!("F_{}D·E on a disc", a.len()))),
        }
    }
    Ok(a.iter().map(|e| -e).collect())
}

pub fn coherent_filtration(t: &GlobalTower, p_max: usize) -> Result<CoherentFiltration> {
    if p_max < 3 {
        return Err(Error::Invalid(
            "the filtration needs at least three levels to certify growth".into(),
        ));
    }
    let points = t.boundary.points();
    let mut levels = vec![Vec::with_capacity(t.summands.len()); p_max + 1];
    let mut local = Vec::with_capacity(t.summands.len());
    for (k, form) in t.summands.iter().enumerate() {
        let mut per_point = Vec::with_capacity(points.len());
        let mut shifts = vec![Vec::with_capacity(points.len()); p_max + 1];
        for (j, p) in points.iter().enumerate() {
            let lf = local_formal_type_of(form, p);
            let action = lf.to_formal().action();
            let ts = &t.local[k][j];
            let m = lf.irregularity() as i64;
            let guard = -(ts.iter().max().copied().unwrap_or(0) + 4 + p_max as i64 * (m + 1));
            let chains = ts
                .iter()
                .map(|s| derivative_chain(&action, -(s + 1), p_max, guard))
                .collect::<Result<Vec<_>>>()?;
            let poles: Vec<i64> = (0..=p_max)
                .map(|pp| {
                    (0..=pp.min(ts.len() - 1))
                        .map(|kk| chains[kk][pp - kk])
                        .max()
                        .expect("k = 0 present")
                })
                .collect();
            for (pp, s) in poles.iter().enumerate() {
                shifts[pp].push((p.clone(), lf.shift + s));
            }
            per_point.push(poles);
        }
        for (pp, s) in shifts.into_iter().enumerate() {
            levels[pp].push(LineBundleP1::from_shifts(s));
        }
        local.push(per_point);
    }
    let degrees: Vec<i64> = levels
        .iter()
        .map(|v| v.iter().map(LineBundleP1::degree).sum())
        .collect();
    let diffs: Vec<i64> = degrees.windows(2).map(|w| w[1] - w[0]).collect();
    let last = *diffs.last().expect("p_max ≥ 3");
    let from = diffs.iter().rposition(|&d| d != last).map_or(0, |i| i + 1);
    if diffs.len() - from < 2 {
        return Err(Error::NoStabilization { cap: p_max });
    }
    Ok(CoherentFiltration {
        levels,
        degrees,
        slope: last,
        stabilized_from: from + 1,
        local,
    })
}

/// `gr_p 𝒪̂ → gr_{p+1} 𝒪̂` induced by `∂` is bijective, given the pole orders of `F_{p−1}, F_p, F_{p+1}`.
fn local_gr_acyclic(action: &ConnectionAction, poles: &[i64], p: usize) -> Result<bool> {
    let rank = action.block_rank(0);
    let (lo_src, hi_src) = (-poles[p], -poles[p - 1] - 1);
    let (lo_tgt, hi_tgt) = (-poles[p + 1], -poles[p] - 1);
    let n_src = ((hi_src - lo_src + 1).max(0) as usize) * rank;
    let n_tgt = ((hi_tgt - lo_tgt + 1).max(0) as usize) * rank;
    if n_src != n_tgt {
        return Ok(false);
    }
    let mut trip = Vec::new();
    for g in lo_src..=hi_src {
        for c in 0..rank {
            let col = (g - lo_src) as usize * rank + c;
            for (e, cc, v) in action.derivation(0, 0, &[g], c) {
                if e[0] > hi_tgt {
                    continue;
                }
                if e[0] < lo_tgt {
                    return Err(Error::WindowOverflow(format!("∂F_{p} leaves F_{}", p + 1)));
                }
                trip.push(((e[0] - lo_tgt) as usize * rank + cc, col, v));
            }
        }
    }
    Ok(rank_q(&SparseMatrixQ::from_triplets(n_tgt, n_src, trip)?) == n_src)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct P0Report {
    pub p0: usize,
    pub cap: usize,
    pub found: bool,
    /// `(p, gr_p DR locally acyclic at every boundary point)`.
    pub checked: Vec<(usize, bool)>,
}

/// Smallest `p₀ ≤ cap` with `gr_{p₀+1}` and `gr_{p₀+2}` acyclic; cap `2 + max pole · rank`.
pub fn p0_search(c: &CurveConnection, t: &GlobalTower, f: &CoherentFiltration) -> Result<P0Report> {
    let max_pole = t
        .summands
        .iter()
        .flat_map(|form| {
            t.boundary
                .points()
                .iter()
                .map(move |p| local_formal_type_of(form, p).irregularity())
        })
        .max()
        .unwrap_or(0) as usize;
    let cap = 2 + max_pole * c.rank();
    let mut checked = Vec::new();
    let acyclic = |p: usize| -> Result<bool> {
        if p + 1 >= f.degrees.len() {
            return Err(Error::P0NotFound { cap });
        }
        for (k, form) in t.summands.iter().enumerate() {
            for (j, pt) in t.boundary.points().iter().enumerate() {
                let action = local_formal_type_of(form, pt).to_formal().action();
                if !local_gr_acyclic(&action, &f.local[k][j], p)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    for p0 in 0..=cap {
        for p in [p0 + 1, p0 + 2] {
            if !checked.iter().any(|(q, _)| *q == p) {
                checked.push((p, acyclic(p)?));
            }
        }
        let ok = |p: usize| checked.iter().any(|&(q, a)| q == p && a);
        if ok(p0 + 1) && ok(p0 + 2) {
            return Ok(P0Report {
                p0,
                cap,
                found: true,
                checked,
            });
        }
    }
    Ok(P0Report {
        p0: cap,
        cap,
        found: false,
        checked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhsReport {
    pub p0: P0Report,
    pub slope: i64,
    pub degrees: Vec<i64>,
    pub class: K0Class,
}

/// `Σ_k −[ω⁻¹ ⊗ F_{p₀}] + [F_{p₀+1}]`.
pub fn lhs_k_class(c: &CurveConnection, t: &GlobalTower) -> Result<LhsReport> {
    let max_pole: usize = t
        .summands
        .iter()
        .flat_map(|form| {
            t.boundary
                .points()
                .iter()
                .map(move |p| local_formal_type_of(form, p).irregularity() as usize)
        })
        .max()
        .unwrap_or(0);
    let f = coherent_filtration(t, 2 + max_pole * c.rank() + 4)?;
    let p0 = p0_search(c, t, &f)?;
    if !p0.found {
        return Err(Error::P0NotFound { cap: p0.cap });
    }
    let inv = LineBundleP1::canonical().dual();
    let class = f.levels[p0.p0]
        .iter()
        .zip(&f.levels[p0.p0 + 1])
        .map(|(a, b)| k0_class(&[SheafTerm::Bundle(b.clone())]) - k0_class(&[SheafTerm::Bundle(inv.tensor(a))]))
        .sum();
    Ok(LhsReport {
        p0,
        slope: f.slope,
        degrees: f.degrees,
        class,
    })
}
