//! Logarithmic de Rham complexes of lattice towers on weight windows, their
//! filtrations and graded pieces, and the comparison checks.

mod assemble;
mod filtered;
mod pole;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use assemble::{mask_indices, subsets, Frames, TermShape};
pub use filtered::{label_inclusion, FilteredComplex, Filtration, Truncation};
pub use pole::{check_filtered_qis_p_sigma, pole_filtration, v0_log_complex, PSigmaReport, PoleFiltration};

use crate::algebra::{complex_cohomology, FiniteComplex, WeightWindow};
use crate::connection::{FormalConnection, LatticeSeed};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::settings::{stabilize, Settings, Stabilized};
use crate::tower::{tower, LatticeTower};
use assemble::Layout;

pub type Cohomology = BTreeMap<i64, usize>;

fn check_truncation(conn: &FormalConnection, t: &Truncation) -> Result<()> {
    let (n, ell) = (conn.n_vars(), conn.ell());
    if t.lengths.len() != ell || t.smooth_hi.len() != n - ell {
        return Err(Error::VarMismatch {
            expected: n,
            found: t.lengths.len() + t.smooth_hi.len(),
        });
    }
    if let Some(l) = t.lengths.iter().find(|&&l| l < 1) {
        return Err(Error::Invalid(format!("truncation length {l} < 1")));
    }
    Ok(())
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

/// `DR_log` with degree `k` carrying `E_{q0+k}(Δ)` of the tower, each term a staggered box.
pub fn log_complex(t: &LatticeTower, q0: usize, trunc: &Truncation, settings: &Settings) -> Result<FiniteComplex> {
    let conn = &t.connection;
    check_truncation(conn, trunc)?;
    let n = conn.n_vars();
    if t.depth() < q0 + n {
        return Err(Error::TowerTooShallow {
            need: q0 + n,
            have: t.depth(),
        });
    }
    let action = conn.action();
    let layout = Layout {
        action: &action,
        frames: Frames::Log,
        smooth_hi: trunc.smooth_hi.clone(),
    };
    layout.assemble(settings, |k, b| {
        t.shift((q0 + k) as i64, b)
            .map(|s| TermShape::staggered(&s, &trunc.lengths))
    })
}

/// The de Rham complex of the localization with plain frames: the term `dx_J`
/// carries `x^{−(A + |J|·I_φ + 1_J)}·𝒪` per block.
pub fn localization_complex(
    conn: &FormalConnection,
    depth: &[i64],
    trunc: &Truncation,
    settings: &Settings,
) -> Result<FiniteComplex> {
    check_truncation(conn, trunc)?;
    let action = conn.action();
    let layout = Layout {
        action: &action,
        frames: Frames::Plain,
        smooth_hi: trunc.smooth_hi.clone(),
    };
    let poles: Vec<Vec<u32>> = conn.blocks.iter().map(|b| b.pole_divisor()).collect();
    layout.assemble(settings, |k, b| {
        let s: Vec<i64> = depth
            .iter()
            .zip(&poles[b])
            .map(|(a, &m)| a + k as i64 * m as i64)
            .collect();
        Some(TermShape::staggered(&s, &trunc.lengths))
    })
}

/// `DR_log E_{q_top+•}(Δ)` with `q_top = depth − n`, the increasing filtration
/// `F_q` (degree `k` in `E_{q+k}(Δ)`) for `0 ≤ q ≤ q_top` and the stupid filtration.
pub fn build_log_complex(
    t: &LatticeTower,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<FilteredComplex> {
    let conn = &t.connection;
    check_window(conn, w)?;
    let n = conn.n_vars();
    let ell = conn.ell();
    let t = t.with_delta(delta.clone())?;
    if t.depth() < n {
        return Err(Error::TowerTooShallow {
            need: n,
            have: t.depth(),
        });
    }
    let q_top = t.depth() - n;
    let trunc = Truncation::from_window(w, ell);
    let base = log_complex(&t, q_top, &trunc, settings)?;
    let f = Filtration::from_predicate(&base, 0..=q_top as i64, |q, k, l| match t.shift(q + k, l.block) {
        Some(s) => (0..ell).all(|j| l.exp[j] >= -s[j]),
        None => false,
    });
    let sigma = Filtration::from_predicate(&base, 0..=n as i64 + 1, |p, k, _| k >= p);
    let mut filtrations = BTreeMap::new();
    filtrations.insert("F".to_string(), f);
    filtrations.insert("sigma".to_string(), sigma);
    Ok(FilteredComplex {
        base,
        filtrations,
        truncation: trunc,
    })
}

/// `F_q / F_{q−1}`.
pub fn graded_f_piece(c: &FilteredComplex, q: i64) -> Result<FiniteComplex> {
    if q < 0 {
        return Err(Error::Invalid(format!("graded piece index {q} < 0")));
    }
    c.subquotient("F", q, (q > 0).then_some(q - 1))
}

/// `E_{q+•}(Δ) / E_{q−1+•}(Δ)` built directly on boxes starting at `E_{q+•}`.
pub fn graded_f_direct(t: &LatticeTower, q: usize, trunc: &Truncation, settings: &Settings) -> Result<FiniteComplex> {
    let conn = &t.connection;
    check_truncation(conn, trunc)?;
    let n = conn.n_vars();
    if t.depth() < q + n {
        return Err(Error::TowerTooShallow {
            need: q + n,
            have: t.depth(),
        });
    }
    let action = conn.action();
    let layout = Layout {
        action: &action,
        frames: Frames::Log,
        smooth_hi: trunc.smooth_hi.clone(),
    };
    layout.assemble(settings, |k, b| {
        let s = t.shift((q + k) as i64, b)?;
        Some(TermShape::staggered(&s, &trunc.lengths).excluding(t.shift(q as i64 + k as i64 - 1, b)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedPiece {
    pub q: i64,
    /// Cohomology of the subquotient of the filtered complex.
    pub cohomology: Cohomology,
    /// Cohomology of the directly assembled graded piece.
    pub direct: Cohomology,
    pub acyclic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub q_max: i64,
    pub pieces: Vec<GradedPiece>,
    /// Per window of the enlargement policy, the cohomology of every piece.
    pub evidence: Vec<Vec<Cohomology>>,
    pub stable: bool,
    pub pass: bool,
}

impl AlphaReport {
    /// `(q, degree)` of every nonzero cohomology group.
    pub fn failures(&self) -> Vec<(i64, i64)> {
        self.pieces
            .iter()
            .flat_map(|p| {
                p.cohomology
                    .iter()
                    .chain(&p.direct)
                    .filter(|(_, &h)| h > 0)
                    .map(move |(&d, _)| (p.q, d))
            })
            .collect()
    }
}

/// Every `gr^F_q`, `1 ≤ q ≤ depth − n`, is acyclic on every window of the policy.
pub fn check_alpha(
    t: &LatticeTower,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<AlphaReport> {
    let n = t.connection.n_vars();
    let q_max = t.depth().saturating_sub(n) as i64;
    let graded = |w: &WeightWindow| -> Result<Vec<Cohomology>> {
        let c = build_log_complex(t, delta, w, settings)?;
        (1..=q_max)
            .map(|q| complex_cohomology(&graded_f_piece(&c, q)?))
            .collect()
    };
    let st: Stabilized<Vec<Cohomology>> = stabilize(settings, w, graded)?;
    let twisted = t.with_delta(delta.clone())?;
    let trunc = Truncation::from_window(w, t.connection.ell());
    let mut pieces = Vec::new();
    for (i, coh) in st.value.iter().enumerate() {
        let q = i as i64 + 1;
        let direct = complex_cohomology(&graded_f_direct(&twisted, q as usize, &trunc, settings)?)?;
        let acyclic = coh.values().all(|&h| h == 0) && direct.values().all(|&h| h == 0);
        pieces.push(GradedPiece {
            q,
            cohomology: coh.clone(),
            direct,
            acyclic,
        });
    }
    let pass = st.stable && pieces.iter().all(|p| p.acyclic);
    Ok(AlphaReport {
        q_max,
        pieces,
        evidence: st.evidence,
        stable: st.stable,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaReport {
    /// `H^•(DR_log E_•(Δ))`.
    pub lattice: Stabilized<Cohomology>,
    /// `H^•` of the localization.
    pub localization: Stabilized<Cohomology>,
    /// The filtered comparison, on discs only.
    pub p_sigma: Option<PSigmaReport>,
    pub agree: bool,
    pub pass: bool,
}

/// Tower of depth `n` grown from the lattice with all shifts zero.
pub fn standard_tower(conn: &FormalConnection) -> Result<LatticeTower> {
    let seed = LatticeSeed {
        connection: conn.clone(),
        shifts: vec![vec![0; conn.ell()]; conn.blocks.len()],
    };
    tower(&seed, conn.n_vars())
}

/// Cohomology of `DR_log E_•(Δ)` against the localization, plus the P/σ comparison on discs.
pub fn check_beta(
    conn: &FormalConnection,
    delta: &TwistDivisor,
    w: &WeightWindow,
    settings: &Settings,
) -> Result<BetaReport> {
    check_window(conn, w)?;
    let ell = conn.ell();
    let t = standard_tower(conn)?.with_delta(delta.clone())?;
    let lattice = stabilize(settings, w, |w| {
        complex_cohomology(&log_complex(&t, 0, &Truncation::from_window(w, ell), settings)?)
    })?;
    let localization = stabilize(settings, w, |w| {
        let trunc = Truncation::from_window(w, ell);
        let depth: Vec<i64> = trunc.lengths.iter().map(|l| l / 2).collect();
        complex_cohomology(&localization_complex(conn, &depth, &trunc, settings)?)
    })?;
    let p_sigma = if conn.n_vars() == 1 && ell == 1 {
        Some(check_filtered_qis_p_sigma(conn, delta, w, settings)?)
    } else {
        None
    };
    let agree = lattice.value == localization.value;
    let pass = agree && lattice.stable && localization.stable && p_sigma.as_ref().is_none_or(|r| r.pass);
    Ok(BetaReport {
        lattice,
        localization,
        p_sigma,
        agree,
        pass,
    })
}
