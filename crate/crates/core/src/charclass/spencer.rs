//! The Spencer complex of `N = ω ⊗ M` on a disc, filtered by `F_p Sp(N) =
//! [F_{p−1}N ⊗ Θ → F_pN]`, against the log de Rham complex shifted by one.

use serde::{Deserialize, Serialize};

use crate::algebra::{complex_cohomology, FiniteComplex, MonomialLabel, Rational, SparseMatrixQ, WeightWindow};
use crate::connection::{FormalConnection, LatticeSeed};
use crate::derham::{graded_f_direct, log_complex, Cohomology, Truncation};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::settings::{stabilize, Settings, Stabilized};
use crate::tower::{tower, LatticeTower};

/// `F_p Sp(N)` with `F_pN = dx ⊗ x^{−1}E_p`, or its graded piece when `graded`.
/// The right action of `θ` on `dx ⊗ m` is `−dx ⊗ (θ + 1)m`.
pub fn spencer_complex(t: &LatticeTower, p: usize, graded: bool, length: i64) -> Result<FiniteComplex> {
    let conn = &t.connection;
    if conn.n_vars() != 1 || conn.ell() != 1 {
        return Err(Error::Invalid("the Spencer comparison runs on a disc".into()));
    }
    if p == 0 || p > t.depth() {
        return Err(Error::TowerTooShallow {
            need: p,
            have: t.depth(),
        });
    }
    let action = conn.action();
    let lo = |i: i64, b: usize| t.shift(i, b).map(|s| -s[0] - 1);
    // (block, exponent, component) per term
    let term = |i: i64| -> Vec<(usize, i64, usize)> {
        let mut v = Vec::new();
        for b in 0..t.n_blocks() {
            let start = lo(i, b).expect("level within depth");
            let stop = if graded {
                lo(i - 1, b).map_or(start + length, |e| e.min(start + length))
            } else {
                start + length
            };
            for g in start..stop {
                for c in 0..action.block_rank(b) {
                    v.push((b, g, c));
                }
            }
        }
        v
    };
    let src = term(p as i64 - 1);
    let tgt = term(p as i64);
    let index = |b: usize, g: i64, c: usize| tgt.iter().position(|&x| x == (b, g, c));
    let mut trip = Vec::new();
    for (col, &(b, g, c)) in src.iter().enumerate() {
        let mut v = action.theta(b, 0, &[g], c);
        v.push((vec![g], c, Rational::one()));
        for (e, cc, x) in v {
            if x.is_zero() {
                continue;
            }
            if let Some(row) = index(b, e[0], cc) {
                trip.push((row, col, -x));
            } else if e[0] < lo(p as i64, b).expect("level within depth") {
                return Err(Error::WindowOverflow(format!("δ leaves F_{p}N")));
            }
        }
    }
    let d = SparseMatrixQ::from_triplets(tgt.len(), src.len(), trip)?;
    let labels = |v: &[(usize, i64, usize)]| {
        v.iter()
            .map(|&(b, g, c)| MonomialLabel {
                block: b,
                comp: c,
                ..MonomialLabel::plain(vec![g])
            })
            .collect::<Vec<_>>()
    };
    FiniteComplex::new(-1, vec![labels(&src), labels(&tgt)], vec![d])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpencerLevel {
    pub p: usize,
    pub spencer: Stabilized<Cohomology>,
    /// `H^{•+1}` of `DR_log E_{p−1+•}`.
    pub de_rham: Stabilized<Cohomology>,
    pub graded_spencer: Stabilized<Cohomology>,
    pub graded_de_rham: Stabilized<Cohomology>,
    /// Degrees of `Sp` where the filtered or graded cohomology differs.
    pub mismatches: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpencerReport {
    pub levels: Vec<SpencerLevel>,
    pub stable: bool,
    pub pass: bool,
}

fn shifted_down(h: Cohomology) -> Cohomology {
    h.into_iter().map(|(d, v)| (d - 1, v)).collect()
}

fn mismatch_degrees(a: &Cohomology, b: &Cohomology) -> Vec<i64> {
    let degrees: std::collections::BTreeSet<i64> = a.keys().chain(b.keys()).copied().collect();
    degrees
        .into_iter()
        .filter(|d| a.get(d).copied().unwrap_or(0) != b.get(d).copied().unwrap_or(0))
        .collect()
}

/// For `p = 1..=depth`, `H^•(F_p Sp(N)) = H^{•+1}(DR_log E_{p−1+•})` and the same on graded pieces.
pub fn spencer_side_change_check(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    depth: usize,
    settings: &Settings,
) -> Result<SpencerReport> {
    if conn.n_vars() != 1 || conn.ell() != 1 {
        return Err(Error::Invalid("the Spencer comparison runs on a disc".into()));
    }
    if w.n_vars() != 1 {
        return Err(Error::VarMismatch {
            expected: 1,
            found: w.n_vars(),
        });
    }
    let seed = LatticeSeed {
        connection: conn.clone(),
        shifts: vec![vec![0]; conn.blocks.len()],
    };
    let t = tower(&seed, depth.max(1))?.with_delta(delta.clone())?;
    let mut levels = Vec::new();
    for p in 1..=depth.max(1) {
        let len = |w: &WeightWindow| w.hi[0] - w.lo[0] + 1;
        let spencer = stabilize(settings, w, |w| {
            complex_cohomology(&spencer_complex(&t, p, false, len(w))?)
        })?;
        let graded_spencer = stabilize(settings, w, |w| {
            complex_cohomology(&spencer_complex(&t, p, true, len(w))?)
        })?;
        let de_rham = stabilize(settings, w, |w| {
            complex_cohomology(&log_complex(&t, p - 1, &Truncation::from_window(w, 1), settings)?).map(shifted_down)
        })?;
        let graded_de_rham = stabilize(settings, w, |w| {
            complex_cohomology(&graded_f_direct(&t, p - 1, &Truncation::from_window(w, 1), settings)?).map(shifted_down)
        })?;
        let mut mismatches = mismatch_degrees(&spencer.value, &de_rham.value);
        for (a, b) in graded_spencer.evidence.iter().zip(&graded_de_rham.evidence) {
            mismatches.extend(mismatch_degrees(a, b));
        }
        mismatches.sort_unstable();
        mismatches.dedup();
        levels.push(SpencerLevel {
            p,
            spencer,
            de_rham,
            graded_spencer,
            graded_de_rham,
            mismatches,
        });
    }
    // gr_1 contains all of gr_0 N = F_0 N, so it grows with the window; it is compared per window only
    let stable = levels.iter().all(|l| {
        l.spencer.stable && l.de_rham.stable && (l.p == 1 || (l.graded_spencer.stable && l.graded_de_rham.stable))
    });
    let pass = stable && levels.iter().all(|l| l.mismatches.is_empty());
    Ok(SpencerReport { levels, stable, pass })
}
