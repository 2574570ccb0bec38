//! Lattice towers `E₀ ⊂ E₁ ⊂ …`, their closed form, V⁰ on windows and irregularity.

use serde::{Deserialize, Serialize};

use crate::algebra::{box_points, Echelon, Rational, WeightWindow};
use crate::connection::{BlockVector, ConnectionAction, FormalConnection, LatticeSeed};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;

/// `levels[i][b]` is the shift vector of block `b` at level `i`:
/// `E_i = ⊕_b x^{−levels[i][b]}·(block b)`. The twist `Δ` is kept separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeTower {
    pub connection: FormalConnection,
    pub delta: TwistDivisor,
    pub levels: Vec<Vec<Vec<i64>>>,
}

impl LatticeTower {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n_blocks(&self) -> usize {
        self.connection.blocks.len()
    }

    /// Shift of block `b` in `E_i(Δ)`; levels beyond the depth repeat the last one,
    /// negative levels give `None` (`E_{−1} = 0`).
    pub fn shift(&self, i: i64, b: usize) -> Option<Vec<i64>> {
        if i < 0 {
            return None;
        }
        let i = (i as usize).min(self.depth());
        Some(
            self.levels[i][b]
                .iter()
                .enumerate()
                .map(|(j, s)| s + self.delta.get(j))
                .collect(),
        )
    }

    pub fn with_delta(&self, delta: TwistDivisor) -> Result<Self> {
        delta.check_components(self.connection.ell())?;
        Ok(LatticeTower { delta, ..self.clone() })
    }

    /// The tower `E'_i = E_{i+a}`.
    pub fn shifted(&self, a: usize) -> Result<Self> {
        if a > self.depth() {
            return Err(Error::TowerTooShallow {
                need: a,
                have: self.depth(),
            });
        }
        Ok(LatticeTower {
            levels: self.levels[a..].to_vec(),
            ..self.clone()
        })
    }

    /// Nesting `E_i ⊆ E_{i+1}` blockwise.
    pub fn is_nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            w[0].iter()
                .zip(&w[1])
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
        })
    }
}

/// Multiply `v` by `x^β` and drop terms above `hi`.
fn shifted(v: &BlockVector, beta: &[i64], hi: &[i64]) -> BlockVector {
    v.iter()
        .filter_map(|(e, k, c)| {
            let s: Vec<i64> = e.iter().zip(beta).map(|(a, b)| a + b).collect();
            s.iter().zip(hi).all(|(a, h)| a <= h).then(|| (s, *k, c.clone()))
        })
        .collect()
}

fn merge(v: BlockVector) -> BlockVector {
    let mut m: std::collections::BTreeMap<(Vec<i64>, usize), Rational> = Default::default();
    for (e, k, c) in v {
        *m.entry((e, k)).or_insert_with(Rational::zero) += &c;
    }
    m.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((e, k), c)| (e, k, c))
        .collect()
}

/// The 𝒪-span of `gens` modulo monomials above `hi`. Returns the componentwise
/// minimal exponent when the span is exactly a monomial lattice `x^{min}·𝒪^rank`
/// (modulo the top truncation), `None` otherwise.
pub(crate) fn monomial_span(
    gens: &[BlockVector],
    rank: usize,
    hi: &[i64],
    lo_guard: &[i64],
) -> Result<Option<Vec<i64>>> {
    let n = hi.len();
    let gens: Vec<BlockVector> = gens.iter().map(|g| merge(g.clone())).collect();
    let mut rows = Vec::new();
    for g in gens.iter().filter(|g| !g.is_empty()) {
        let mut gmin = vec![i64::MAX; n];
        for (e, _, _) in g {
            for j in 0..n {
                gmin[j] = gmin[j].min(e[j]);
            }
        }
        let top: Vec<i64> = (0..n).map(|j| hi[j] - gmin[j]).collect();
        for beta in box_points(&vec![0; n], &top) {
            let r = shifted(g, &beta, hi);
            if !r.is_empty() {
                rows.push(r);
            }
        }
    }
    let mut lo = hi.iter().map(|h| h + 1).collect::<Vec<_>>();
    for r in &rows {
        for (e, _, _) in r {
            for j in 0..n {
                lo[j] = lo[j].min(e[j]);
            }
        }
    }
    if let Some(j) = (0..n).find(|&j| lo[j] < lo_guard[j]) {
        return Err(Error::WindowOverflow(format!(
            "span reaches exponent {} in variable {j}, window starts at {}",
            lo[j], lo_guard[j]
        )));
    }
    if rows.is_empty() {
        return Ok((rank == 0).then(|| vec![0; n]));
    }
    let width: Vec<i64> = (0..n).map(|j| hi[j] - lo[j] + 1).collect();
    let index = |e: &[i64], k: usize| -> usize {
        let mut idx = 0usize;
        for j in 0..n {
            idx = idx * width[j] as usize + (e[j] - lo[j]) as usize;
        }
        idx * rank + k
    };
    let expected: usize = width.iter().map(|w| *w as usize).product::<usize>() * rank;
    let mut ech = Echelon::new();
    let mut sparse: Vec<Vec<(usize, Rational)>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<(usize, Rational)> = r.iter().map(|(e, k, c)| (index(e, *k), c.clone())).collect();
            v.sort_by_key(|(j, _)| *j);
            v
        })
        .collect();
    sparse.sort_by_key(Vec::len);
    for v in &sparse {
        ech.insert(v);
        if ech.rank() == expected {
            break;
        }
    }
    Ok((ech.rank() == expected).then_some(lo))
}

/// Verification window used by [`step`]: boundary variables in `[lo, hi]`, smooth ones in `[0, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl StepWindow {
    /// Room for `levels` more steps above a shift of `from`.
    pub fn for_connection(conn: &FormalConnection, from: i64, levels: usize, hi: i64) -> Self {
        let m = conn.max_pole();
        let n = conn.n_vars();
        let lo = (0..n)
            .map(|j| match m.get(j) {
                Some(&p) => -(from + (levels as i64 + 1) * p as i64) - 1,
                None => 0,
            })
            .collect();
        StepWindow { lo, hi: vec![hi; n] }
    }
}

/// One step `E ↦ E + Θ(log D)·E`, computed on generators and certified to be
/// a monomial lattice on the window.
pub fn step(
    conn: &FormalConnection,
    action: &ConnectionAction,
    shifts: &[Vec<i64>],
    w: &StepWindow,
) -> Result<Vec<Vec<i64>>> {
    let n = conn.n_vars();
    let ell = conn.ell();
    let mut out = Vec::with_capacity(shifts.len());
    for (b, s) in shifts.iter().enumerate() {
        let rank = action.block_rank(b);
        let base: Vec<i64> = (0..n).map(|j| if j < ell { -s[j] } else { 0 }).collect();
        let mut gens: Vec<BlockVector> = Vec::new();
        for k in 0..rank {
            gens.push(vec![(base.clone(), k, Rational::one())]);
            for i in 0..n {
                gens.push(action.theta(b, i, &base, k));
            }
        }
        let lo = monomial_span(&gens, rank, &w.hi, &w.lo)?
            .ok_or_else(|| Error::NotLocallyFree(format!("block {b}: span of E + Θ·E is not a monomial lattice")))?;
        out.push(lo[..ell].iter().map(|x| -x).collect());
    }
    Ok(out)
}

/// Iterate [`step`] from the seed.
pub fn tower(seed: &LatticeSeed, depth: usize) -> Result<LatticeTower> {
    let conn = &seed.connection;
    let action = conn.action();
    let from = seed.shifts.iter().flatten().copied().max().unwrap_or(0);
    let w = StepWindow::for_connection(conn, from, depth, 3);
    let mut levels = vec![seed.shifts.clone()];
    for _ in 0..depth {
        let next = step(conn, &action, levels.last().expect("nonempty"), &w)?;
        levels.push(next);
    }
    Ok(LatticeTower {
        connection: conn.clone(),
        delta: TwistDivisor::zero(conn.ell()),
        levels,
    })
}

/// Level `i` is `⊕ L_φ(i·I_φ) ⊗ R_φ`.
pub fn closed_form_tower(conn: &FormalConnection, depth: usize) -> LatticeTower {
    let levels = (0..=depth as i64)
        .map(|i| {
            conn.blocks
                .iter()
                .map(|b| b.pole_divisor().iter().map(|&m| i * m as i64).collect())
                .collect()
        })
        .collect();
    LatticeTower {
        connection: conn.clone(),
        delta: TwistDivisor::zero(conn.ell()),
        levels,
    }
}

/// Length of `E₁/E₀` on a disc, from one certified step.
pub fn irregularity(conn: &FormalConnection) -> Result<u64> {
    if conn.n_vars() != 1 || conn.ell() != 1 {
        return Err(Error::Invalid("irregularity is defined here for a disc".into()));
    }
    let action = conn.action();
    let seed = vec![vec![0]; conn.blocks.len()];
    let w = StepWindow::for_connection(conn, 0, 1, 2);
    let next = step(conn, &action, &seed, &w)?;
    Ok(next
        .iter()
        .zip(&conn.blocks)
        .map(|(s, b)| s[0] as u64 * b.rank() as u64)
        .sum())
}

/// `E₁ = E₀`.
pub fn is_regular_singular(conn: &FormalConnection) -> Result<bool> {
    let action = conn.action();
    let seed = vec![vec![0; conn.ell()]; conn.blocks.len()];
    let w = StepWindow::for_connection(conn, 0, 1, 2);
    Ok(step(conn, &action, &seed, &w)? == seed)
}

/// `V⁰𝓔(Δ)` restricted to a window: the union of the clipped levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct V0Module {
    pub window: WeightWindow,
    /// Clipped shifts per level until stabilization, `Δ` included.
    pub levels: Vec<Vec<Vec<i64>>>,
    pub stabilization_index: usize,
    pub cap: usize,
}

impl V0Module {
    pub fn shifts(&self) -> &[Vec<i64>] {
        &self.levels[self.stabilization_index]
    }
}

/// Default cap `1 + ⌊depth / min pole⌋`.
pub fn v0_cap(conn: &FormalConnection, w: &WeightWindow) -> usize {
    let depth = w.depth()[..conn.ell()].iter().copied().max().unwrap_or(0);
    let min_pole = conn
        .blocks
        .iter()
        .flat_map(|b| b.pole_divisor())
        .filter(|&m| m > 0)
        .min();
    match min_pole {
        Some(m) => 1 + (depth / m as i64) as usize,
        None => 1,
    }
}

pub fn v0_on_window(conn: &FormalConnection, w: &WeightWindow, delta: &TwistDivisor) -> Result<V0Module> {
    v0_on_window_with_cap(conn, w, delta, v0_cap(conn, w))
}

pub fn v0_on_window_with_cap(
    conn: &FormalConnection,
    w: &WeightWindow,
    delta: &TwistDivisor,
    cap: usize,
) -> Result<V0Module> {
    if w.n_vars() != conn.n_vars() {
        return Err(Error::VarMismatch {
            expected: conn.n_vars(),
            found: w.n_vars(),
        });
    }
    delta.check_components(conn.ell())?;
    let ell = conn.ell();
    let clip = |s: &[Vec<i64>]| -> Vec<Vec<i64>> {
        s.iter()
            .map(|v| v.iter().enumerate().map(|(j, x)| (*x).min(-w.lo[j])).collect())
            .collect()
    };
    let action = conn.action();
    let m = conn.max_pole();
    let sw = StepWindow {
        lo: (0..conn.n_vars())
            .map(|j| if j < ell { w.lo[j] - m[j] as i64 - 1 } else { 0 })
            .collect(),
        hi: w.hi.clone(),
    };
    let seed: Vec<Vec<i64>> = conn
        .blocks
        .iter()
        .map(|_| (0..ell).map(|j| delta.get(j)).collect())
        .collect();
    let mut levels = vec![clip(&seed)];
    for i in 0..=cap {
        let next = clip(&step(conn, &action, &levels[i], &sw)?);
        if next == levels[i] {
            return Ok(V0Module {
                window: w.clone(),
                levels,
                stabilization_index: i,
                cap,
            });
        }
        levels.push(next);
    }
    Err(Error::NoStabilization { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use crate::connection::{dm_lattice, ElementaryModel, ExponentialFactor, RegularBlock};
    use crate::geometry::LocalBoundary;

    fn disc(m: u32) -> FormalConnection {
        let phi = if m == 0 {
            ExponentialFactor::zero(1)
        } else {
            ExponentialFactor::monomial(vec![m], q(1, 1)).unwrap()
        };
        FormalConnection::disc(phi, RegularBlock::trivial(1, 1)).unwrap()
    }

    #[test]
    fn step_examples() {
        let c = disc(2);
        let a = c.action();
        let w = StepWindow::for_connection(&c, 4, 1, 2);
        assert_eq!(step(&c, &a, &[vec![4]], &w).unwrap(), vec![vec![6]]);
        let r = disc(0);
        let w = StepWindow::for_connection(&r, 0, 1, 2);
        assert_eq!(step(&r, &r.action(), &[vec![0]], &w).unwrap(), vec![vec![0]]);
        let phi = ExponentialFactor::monomial(vec![1, 1], q(1, 1)).unwrap();
        let m = ElementaryModel::new(phi, RegularBlock::trivial(1, 2)).unwrap();
        let c2 = FormalConnection::new(LocalBoundary::new(2, 2).unwrap(), vec![m]).unwrap();
        let w = StepWindow::for_connection(&c2, 1, 1, 2);
        assert_eq!(step(&c2, &c2.action(), &[vec![1, 1]], &w).unwrap(), vec![vec![2, 2]]);
    }

    #[test]
    fn tower_examples() {
        let t = tower(&dm_lattice(&disc(0)).unwrap(), 2).unwrap();
        assert_eq!(t.levels, vec![vec![vec![0]]; 3]);
        let t = tower(&dm_lattice(&disc(1)).unwrap(), 2).unwrap();
        assert_eq!(t.levels, vec![vec![vec![0]], vec![vec![1]], vec![vec![2]]]);
        assert_eq!(closed_form_tower(&disc(3), 2).levels[2], vec![vec![6]]);
    }

    #[test]
    fn mixed_sum() {
        let b = LocalBoundary::new(1, 1).unwrap();
        let c = FormalConnection::new(
            b,
            vec![
                ElementaryModel::new(
                    ExponentialFactor::monomial(vec![1], q(1, 1)).unwrap(),
                    RegularBlock::trivial(1, 1),
                )
                .unwrap(),
                ElementaryModel::new(
                    ExponentialFactor::zero(1),
                    RegularBlock::semisimple(1, vec![q(1, 2)]).unwrap(),
                )
                .unwrap(),
            ],
        )
        .unwrap();
        let t = tower(&dm_lattice(&c).unwrap(), 1).unwrap();
        assert_eq!(t.levels[1], vec![vec![1], vec![0]]);
        assert_eq!(irregularity(&c).unwrap(), 1);
        assert!(!is_regular_singular(&c).unwrap());
    }

    #[test]
    fn v0_examples() {
        let w = WeightWindow::cube(1, -5, 5);
        let z = TwistDivisor::zero(1);
        assert_eq!(v0_on_window(&disc(0), &w, &z).unwrap().stabilization_index, 0);
        assert_eq!(v0_on_window(&disc(1), &w, &z).unwrap().stabilization_index, 5);
        assert_eq!(v0_on_window(&disc(2), &w, &z).unwrap().stabilization_index, 3);
        assert!(matches!(
            v0_on_window_with_cap(&disc(1), &w, &z, 3),
            Err(Error::NoStabilization { cap: 3 })
        ));
    }

    #[test]
    fn regular_and_empty() {
        assert!(is_regular_singular(&disc(0)).unwrap());
        let empty = FormalConnection::new(LocalBoundary::new(1, 1).unwrap(), vec![]).unwrap();
        assert!(is_regular_singular(&empty).unwrap());
        assert_eq!(irregularity(&empty).unwrap(), 0);
        assert_eq!(irregularity(&disc(3)).unwrap(), 3);
    }
}
