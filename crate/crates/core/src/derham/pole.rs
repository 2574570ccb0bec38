//! The pole-order filtration on a disc and its comparison with the stupid
//! filtration of `DR_log V⁰`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::assemble::{Layout, TermShape};
use super::filtered::{label_inclusion, FilteredComplex, Filtration, Truncation};
use super::{check_window, Cohomology, Frames};
use crate::algebra::{complex_cohomology, is_chain_map, mapping_cone, Rational, WeightWindow};
use crate::connection::{BlockVector, FormalConnection};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::settings::{stabilize_by, Settings};
use crate::tower::{monomial_span, v0_on_window};

/// Per block the `V⁰𝓔(Δ)` shift on the window and whether the block fills the window.
fn v0_blocks(conn: &FormalConnection, delta: &TwistDivisor, w: &WeightWindow) -> Result<Vec<(Vec<i64>, bool)>> {
    let v0 = v0_on_window(conn, w, delta)?;
    Ok(v0
        .shifts()
        .iter()
        .zip(&conn.blocks)
        .map(|(s, b)| {
            let sat = b
                .pole_divisor()
                .iter()
                .zip(s)
                .enumerate()
                .any(|(j, (&m, &x))| m > 0 && x >= -w.lo[j]);
            (s.clone(), sat)
        })
        .collect())
}

/// Box of block `b` in degree `k`: `[−s, hi]` lowered by `k·I_φ`.
fn v0_shape(s: &[i64], poles: &[u32], w: &WeightWindow, k: usize) -> TermShape {
    TermShape {
        lo: s.iter().zip(poles).map(|(x, &m)| -x - k as i64 * m as i64).collect(),
        hi: poles
            .iter()
            .enumerate()
            .map(|(j, &m)| w.hi[j] - k as i64 * m as i64)
            .collect(),
        exclude: None,
    }
}

/// `DR_log V⁰𝓔(Δ)` on the window with the stupid filtration at levels `p_min..=n+1`.
pub fn v0_log_complex(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    p_min: i64,
    settings: &Settings,
) -> Result<FilteredComplex> {
    check_window(conn, w)?;
    let ell = conn.ell();
    let blocks = v0_blocks(conn, delta, w)?;
    let poles: Vec<Vec<u32>> = conn.blocks.iter().map(|b| b.pole_divisor()).collect();
    let action = conn.action();
    let layout = Layout {
        action: &action,
        frames: Frames::Log,
        smooth_hi: w.hi[ell..].to_vec(),
    };
    let base = layout.assemble(settings, |k, b| Some(v0_shape(&blocks[b].0, &poles[b], w, k)))?;
    let n = conn.n_vars() as i64;
    let sigma = Filtration::from_predicate(&base, p_min..=n + 1, |p, k, _| k >= p);
    Ok(FilteredComplex {
        base,
        filtrations: [("sigma".to_string(), sigma)].into_iter().collect(),
        truncation: Truncation::from_window(w, ell),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleFiltration {
    /// `DR 𝓔` in the frame `dx/x`; degree 1 of level `p` is `dx/x ⊗ x·P^{p−1}`.
    pub complex: FilteredComplex,
    /// Levels `p` whose graded piece is free of window effects.
    pub tested: Vec<i64>,
    /// Blocks whose `V⁰` is the whole window (irregular blocks).
    pub saturated: Vec<usize>,
    /// Per regular block, lowest exponent of `P⁰, P⁻¹, …`.
    pub starts: BTreeMap<usize, Vec<i64>>,
}

impl PoleFiltration {
    /// `dim P^p / P^{p+1}` on the window.
    pub fn quotient_length(&self, p: i64) -> Option<usize> {
        let a = self.complex.level("P", p)?[0].len();
        let b = self.complex.level("P", p + 1)?[0].len();
        Some(a - b)
    }
}

/// `P⁰ = V⁰𝓔(D + Δ)`, `P^{−k−1} = P^{−k} + 𝒪·∂P^{−k}`, `P¹ = 0`, on a disc.
pub fn pole_filtration(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<PoleFiltration> {
    check_window(conn, w)?;
    if conn.n_vars() != 1 || conn.ell() != 1 {
        return Err(Error::Invalid("the pole filtration is implemented on a disc".into()));
    }
    let (lo, hi) = (w.lo[0], w.hi[0]);
    let blocks = v0_blocks(conn, delta, w)?;
    let action = conn.action();
    let max_levels = (hi - lo + 2) as usize;
    let mut starts: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    let mut saturated = Vec::new();
    let mut k_min = max_levels;
    for (b, (s, sat)) in blocks.iter().enumerate() {
        if *sat {
            saturated.push(b);
            continue;
        }
        let rank = action.block_rank(b);
        let mut a = vec![-s[0] - 1];
        if a[0] < lo {
            return Err(Error::WindowOverflow(format!(
                "P⁰ of block {b} starts at {} below the window",
                a[0]
            )));
        }
        let mut grown = 0;
        while a.len() < max_levels {
            let cur = *a.last().expect("nonempty");
            let mut gens: Vec<BlockVector> = Vec::new();
            for c in 0..rank {
                gens.push(vec![(vec![cur], c, Rational::one())]);
                gens.push(action.derivation(b, 0, &[cur], c));
            }
            match monomial_span(&gens, rank, &[hi], &[lo]) {
                Ok(Some(m)) => {
                    a.push(m[0]);
                    if m[0] < cur {
                        grown += 1;
                    } else {
                        grown = max_levels;
                    }
                }
                Ok(None) => {
                    return Err(Error::NotLocallyFree(format!(
                        "pole filtration level {} of block {b}",
                        -(a.len() as i64)
                    )))
                }
                Err(Error::WindowOverflow(_)) => break,
                Err(e) => return Err(e),
            }
        }
        k_min = k_min.min(grown.min(a.len() - 1));
        while a.len() < max_levels {
            let last = *a.last().expect("nonempty");
            a.push(last);
        }
        starts.insert(b, a);
    }
    let k = k_min as i64;
    let poles: Vec<Vec<u32>> = conn.blocks.iter().map(|b| b.pole_divisor()).collect();
    let layout = Layout {
        action: &action,
        frames: Frames::Log,
        smooth_hi: Vec::new(),
    };
    let base = layout.assemble(settings, |deg, b| {
        if blocks[b].1 {
            Some(v0_shape(&blocks[b].0, &poles[b], w, deg))
        } else {
            Some(TermShape {
                lo: vec![lo],
                hi: vec![hi],
                exclude: None,
            })
        }
    })?;
    let member = |p: i64, deg: i64, block: usize, e: i64| -> bool {
        let level = p - deg;
        if level >= 1 {
            return false;
        }
        match starts.get(&block) {
            None => true,
            Some(a) => e >= a[(-level) as usize] + deg,
        }
    };
    let levels = (-k + 1)..=2;
    let p = Filtration::from_predicate(&base, levels, |p, deg, l| member(p, deg, l.block, l.exp[0]));
    let complex = FilteredComplex {
        base,
        filtrations: [("P".to_string(), p)].into_iter().collect(),
        truncation: Truncation::from_window(w, 1),
    };
    complex.check_levels()?;
    Ok(PoleFiltration {
        complex,
        tested: ((-k + 1)..=1).collect(),
        saturated,
        starts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PSigmaReport {
    pub tested: Vec<i64>,
    /// Cohomology of the cone of `gr^p_σ → gr^p_P`.
    pub cones: BTreeMap<i64, Cohomology>,
    /// Levels where the map is not a chain map or the cone is not acyclic.
    pub failing: Vec<i64>,
    pub saturated_blocks: Vec<usize>,
    pub stable: bool,
    pub pass: bool,
}

type ConeMap = BTreeMap<i64, Option<Cohomology>>;

fn p_sigma_cones(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<(ConeMap, Vec<usize>)> {
    let pf = pole_filtration(conn, delta, w, settings)?;
    let p_min = pf.tested.first().copied().unwrap_or(0);
    let v0 = v0_log_complex(conn, delta, w, p_min, settings)?;
    let mut out = BTreeMap::new();
    for &p in &pf.tested {
        let a = v0.subquotient("sigma", p, Some(p + 1))?;
        let b = pf.complex.subquotient("P", p, Some(p + 1))?;
        let f = label_inclusion(&a, &b)?;
        let verdict = if is_chain_map(&a, &b, &f)? {
            Some(complex_cohomology(&mapping_cone(&a, &b, &f)?)?)
        } else {
            None
        };
        out.insert(p, verdict);
    }
    Ok((out, pf.saturated))
}

/// `gr^p_σ DR_log V⁰𝓔(Δ) → gr^p_P DR 𝓔` is a quasi-isomorphism for every tested `p`.
pub fn check_filtered_qis_p_sigma(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<PSigmaReport> {
    let st = stabilize_by(
        settings,
        w,
        |w| p_sigma_cones(conn, delta, w, settings),
        |base, other| base.0.iter().all(|(p, v)| other.0.get(p).is_none_or(|o| o == v)),
    )?;
    let (cones, saturated) = st.value;
    let tested: Vec<i64> = cones.keys().copied().collect();
    let failing: Vec<i64> = cones
        .iter()
        .filter(|(_, v)| v.as_ref().is_none_or(|c| c.values().any(|&h| h > 0)))
        .map(|(&p, _)| p)
        .collect();
    let pass = failing.is_empty() && st.stable;
    Ok(PSigmaReport {
        tested,
        cones: cones.into_iter().map(|(p, v)| (p, v.unwrap_or_default())).collect(),
        failing,
        saturated_blocks: saturated,
        stable: st.stable,
        pass,
    })
}
