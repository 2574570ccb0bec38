//! Bijectivity of `Eu_j + k` on restrictions of `ω ⊗ V^{−1}` and the
//! localization steps `∂_j^k: N/x_jN → x_j^{−k}N / x_j^{−k+1}N`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{box_points, rank_q, Rational, SparseMatrixQ, WeightWindow};
use crate::connection::{BlockVector, ConnectionAction, FormalConnection};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::tower::{monomial_span, v0_on_window};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularBand {
    pub k: i64,
    pub block: usize,
    /// Exponents of the band off the restricted variables.
    pub exp: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerReport {
    pub set: Vec<usize>,
    pub var: usize,
    pub k_max: i64,
    /// Blocks with `supp I_φ ∩ I ≠ ∅`; the restriction vanishes there.
    pub vacuous_blocks: Vec<usize>,
    pub bands_checked: usize,
    pub singular: Vec<SingularBand>,
    pub pass: bool,
}

fn check_window(conn: &FormalConnection, w: &WeightWindow) -> Result<()> {
    if w.n_vars() != conn.n_vars() {
        return Err(Error::VarMismatch {
            expected: conn.n_vars(),
            found: w.n_vars(),
        });
    }
    Ok(())
}

fn supported_on(conn: &FormalConnection, b: usize, vars: &[usize]) -> bool {
    let poles = conn.blocks[b].pole_divisor();
    vars.iter().any(|&i| poles[i] > 0)
}

/// The slice of `V^{−1}` of block `b` with `γ_i = −(s_i + 1)` for `i ∈ set`,
/// the other exponents running over the window.
fn slice_points(conn: &FormalConnection, s: &[i64], w: &WeightWindow, set: &[usize]) -> Vec<Vec<i64>> {
    let ell = conn.ell();
    let n = conn.n_vars();
    let lo: Vec<i64> = (0..n)
        .map(|j| {
            if set.contains(&j) {
                -s[j] - 1
            } else if j < ell {
                (-s[j] - 1).max(w.lo[j])
            } else {
                0
            }
        })
        .collect();
    let hi: Vec<i64> = (0..n).map(|j| if set.contains(&j) { lo[j] } else { w.hi[j] }).collect();
    box_points(&lo, &hi)
}

/// Matrix of `v ↦ Σ terms of f(v)` lying on the slice, on the basis `points × comps`.
fn slice_matrix<F>(points: &[Vec<i64>], rank: usize, f: F) -> Result<SparseMatrixQ>
where
    F: Fn(&[i64], usize) -> BlockVector,
{
    let index: BTreeMap<(&[i64], usize), usize> = points
        .iter()
        .enumerate()
        .flat_map(|(i, e)| (0..rank).map(move |c| ((e.as_slice(), c), i * rank + c)))
        .collect();
    let mut trip = Vec::new();
    for (i, e) in points.iter().enumerate() {
        for c in 0..rank {
            for (exp, comp, v) in f(e, c) {
                if let Some(&r) = index.get(&(exp.as_slice(), comp)) {
                    trip.push((r, i * rank + c, v));
                }
            }
        }
    }
    SparseMatrixQ::from_triplets(points.len() * rank, points.len() * rank, trip)
}

/// `Eu_j + k`, with `Eu_j` the right action of `x_j∂_j` on `ω ⊗ V^{−1}`, is
/// invertible on `i^*_{D_I}` for `1 ≤ k ≤ k_max`; per band off `I`.
pub fn euler_bijectivity(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    set: &[usize],
    var: usize,
    k_max: i64,
    w: &WeightWindow,
) -> Result<EulerReport> {
    check_window(conn, w)?;
    if let Some(&bad) = set.iter().find(|&&i| i >= conn.ell()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            n_vars: conn.ell(),
        });
    }
    if !set.contains(&var) {
        return Err(Error::Invalid(format!("Euler variable {var} not in {set:?}")));
    }
    let v0 = v0_on_window(conn, w, delta)?;
    let action = conn.action();
    let mut report = EulerReport {
        set: set.to_vec(),
        var,
        k_max,
        vacuous_blocks: Vec::new(),
        bands_checked: 0,
        singular: Vec::new(),
        pass: true,
    };
    for (b, s) in v0.shifts().iter().enumerate() {
        if supported_on(conn, b, set) {
            report.vacuous_blocks.push(b);
            continue;
        }
        let rank = action.block_rank(b);
        for point in slice_points(conn, s, w, set) {
            let eu = slice_matrix(std::slice::from_ref(&point), rank, |e, c| {
                let mut v: BlockVector = action.theta(b, var, e, c);
                v.push((e.to_vec(), c, Rational::one()));
                v.into_iter().map(|(e, c, x)| (e, c, -x)).collect()
            })?;
            for k in 1..=k_max {
                let m = SparseMatrixQ::from_triplets(
                    rank,
                    rank,
                    eu.entries()
                        .map(|(i, j, v)| (i, j, v.clone()))
                        .chain((0..rank).map(|i| (i, i, Rational::int(k))))
                        .collect::<Vec<_>>(),
                )?;
                report.bands_checked += 1;
                if rank_q(&m) < rank {
                    report.singular.push(SingularBand {
                        k,
                        block: b,
                        exp: point.clone(),
                    });
                }
            }
        }
    }
    report.pass = report.singular.is_empty();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub k_max: i64,
    /// `(var, block)` with `x_var` invertible on `V⁰` of the block.
    pub vacuous: Vec<(usize, usize)>,
    /// `(var, block, k)` where `∂^k` is not bijective on the slice.
    pub singular: Vec<(usize, usize, i64)>,
    /// On a disc: per block the pole orders of `F_kD·E₀(D + Δ)`, `k = 0, 1, …`.
    pub image_poles: BTreeMap<usize, Vec<i64>>,
    /// Expected growth per step: pole order plus one, or one on regular blocks.
    pub expected_slope: BTreeMap<usize, i64>,
    pub pass: bool,
}

fn derivation_power(action: &ConnectionAction, b: usize, j: usize, e: &[i64], c: usize, k: i64) -> BlockVector {
    let mut v: BlockVector = vec![(e.to_vec(), c, Rational::one())];
    for _ in 0..k {
        let mut next: BTreeMap<(Vec<i64>, usize), Rational> = BTreeMap::new();
        for (e, c, x) in &v {
            for (e2, c2, y) in action.derivation(b, j, e, *c) {
                *next.entry((e2, c2)).or_insert_with(Rational::zero) += &(x * &y);
            }
        }
        v = next
            .into_iter()
            .filter(|(_, x)| !x.is_zero())
            .map(|((e, c), x)| (e, c, x))
            .collect();
    }
    v
}

/// Pole orders of `F_kD·E₀` for a disc block until the window is exhausted.
fn image_poles(action: &ConnectionAction, b: usize, start: i64, w: &WeightWindow) -> Result<Vec<i64>> {
    let rank = action.block_rank(b);
    let mut a = vec![start];
    loop {
        let cur = *a.last().expect("nonempty");
        let mut gens: Vec<BlockVector> = Vec::new();
        for c in 0..rank {
            gens.push(vec![(vec![cur], c, Rational::one())]);
            gens.push(action.derivation(b, 0, &[cur], c));
        }
        match monomial_span(&gens, rank, &w.hi, &w.lo) {
            Ok(Some(m)) => {
                if m[0] == cur {
                    a.push(cur);
                    return Ok(a.iter().map(|e| -e).collect());
                }
                a.push(m[0]);
            }
            Ok(None) => return Err(Error::NotLocallyFree(format!("image of F_{}D on block {b}", a.len()))),
            Err(Error::WindowOverflow(_)) => return Ok(a.iter().map(|e| -e).collect()),
            Err(e) => return Err(e),
        }
    }
}

/// Steps of `j_*` along every boundary variable, plus pole growth of `F_kD·E₀` on a disc.
pub fn localization_check(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
) -> Result<LocalizationReport> {
    check_window(conn, w)?;
    let ell = conn.ell();
    let v0 = v0_on_window(conn, w, delta)?;
    let action = conn.action();
    let k_max = (0..ell).map(|j| -w.lo[j]).min().unwrap_or(0);
    let mut report = LocalizationReport {
        k_max,
        vacuous: Vec::new(),
        singular: Vec::new(),
        image_poles: BTreeMap::new(),
        expected_slope: BTreeMap::new(),
        pass: true,
    };
    for j in 0..ell {
        for (b, s) in v0.shifts().iter().enumerate() {
            if supported_on(conn, b, &[j]) {
                report.vacuous.push((j, b));
                continue;
            }
            let rank = action.block_rank(b);
            let base = -s[j] - 1;
            for k in 1..=k_max {
                for point in slice_points(conn, s, w, &[j]) {
                    let m = slice_matrix(std::slice::from_ref(&point), rank, |e, c| {
                        derivation_power(&action, b, j, e, c, k)
                            .into_iter()
                            .filter(|(x, _, _)| {
                                x[j] == base - k && x.iter().enumerate().all(|(i, v)| i == j || *v == e[i])
                            })
                            .map(|(mut x, c, v)| {
                                x[j] = base;
                                (x, c, v)
                            })
                            .collect()
                    })?;
                    if rank_q(&m) < rank {
                        report.singular.push((j, b, k));
                        break;
                    }
                }
            }
        }
    }
    if conn.n_vars() == 1 && ell == 1 {
        for (b, block) in conn.blocks.iter().enumerate() {
            let m = block.pole_divisor()[0] as i64;
            let poles = image_poles(&action, b, -1 - delta.get(0), w)?;
            report.expected_slope.insert(b, if m > 0 { m + 1 } else { 1 });
            report.image_poles.insert(b, poles);
        }
    }
    let slopes_ok = report.image_poles.iter().all(|(b, poles)| {
        let e = report.expected_slope[b];
        poles.windows(2).all(|p| p[1] - p[0] == e) && poles.len() > 1
    });
    report.pass = report.singular.is_empty() && slopes_ok;
    Ok(report)
}
