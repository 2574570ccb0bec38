//! Invariants of a cyclic Kummer cover `x_i = t_i^{ρ_i}` acting diagonally on a monomial lattice.

use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{Error, Result};

/// Upstairs data: basis `e_k` spans `t^{−S_k}·𝒪̂`, the generator of `μ_{ρ_i}`
/// acts by `t_i ↦ ζ t_i`, `e_k ↦ ζ^{w_{k,i}} e_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KummerData {
    pub rho: Vec<u32>,
    pub shifts: Vec<Vec<i64>>,
    pub weights: Vec<Vec<i64>>,
    /// Optional upstairs residues of `e_k` per branch.
    #[serde(default)]
    pub residues: Option<Vec<Vec<Rational>>>,
}

/// Downstairs lattice on the invariant basis `f_k = t^{−r_k} e_k`, `r_k = w_k mod ρ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KummerLattice {
    pub shifts: Vec<Vec<i64>>,
    pub basis_twist: Vec<Vec<i64>>,
    pub residues: Option<Vec<Vec<Rational>>>,
}

pub fn kummer_invariants(up: &KummerData) -> Result<KummerLattice> {
    let ell = up.rho.len();
    if let Some(i) = up.rho.iter().position(|&r| r == 0) {
        return Err(Error::IncompatibleAction(format!("ρ_{i} = 0")));
    }
    if up.weights.len() != up.shifts.len() {
        return Err(Error::IncompatibleAction(format!(
            "{} weight vectors for {} basis vectors",
            up.weights.len(),
            up.shifts.len()
        )));
    }
    let bad_len = up.shifts.iter().chain(&up.weights).any(|v| v.len() != ell);
    if bad_len {
        return Err(Error::VarMismatch {
            expected: ell,
            found: up
                .shifts
                .iter()
                .chain(&up.weights)
                .map(Vec::len)
                .find(|&l| l != ell)
                .unwrap_or(ell),
        });
    }
    if let Some(res) = &up.residues {
        if res.len() != up.shifts.len() || res.iter().any(|v| v.len() != ell) {
            return Err(Error::IncompatibleAction("residue data has the wrong shape".into()));
        }
    }
    let mut shifts = Vec::new();
    let mut twist = Vec::new();
    for (s, w) in up.shifts.iter().zip(&up.weights) {
        let r: Vec<i64> = w.iter().zip(&up.rho).map(|(wi, &p)| wi.rem_euclid(p as i64)).collect();
        shifts.push(
            s.iter()
                .zip(&r)
                .zip(&up.rho)
                .map(|((si, ri), &p)| (si - ri).div_euclid(p as i64))
                .collect(),
        );
        twist.push(r);
    }
    // x∂_x = ρ⁻¹ t∂_t, and f = t^{−r} e
    let residues = up.residues.as_ref().map(|res| {
        res.iter()
            .zip(&twist)
            .map(|(lam, r)| {
                lam.iter()
                    .zip(r)
                    .zip(&up.rho)
                    .map(|((l, ri), &p)| (l + &Rational::int(*ri)) / Rational::int(p as i64))
                    .collect()
            })
            .collect()
    });
    Ok(KummerLattice {
        shifts,
        basis_twist: twist,
        residues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn data(rho: u32, s: i64, w: i64) -> KummerData {
        KummerData {
            rho: vec![rho],
            shifts: vec![vec![s]],
            weights: vec![vec![w]],
            residues: None,
        }
    }

    #[test]
    fn trivial_cover_is_identity() {
        let d = data(1, 3, 5);
        let k = kummer_invariants(&d).unwrap();
        assert_eq!(k.shifts, vec![vec![3]]);
        assert_eq!(k.basis_twist, vec![vec![0]]);
    }

    #[test]
    fn even_pole_descends() {
        assert_eq!(kummer_invariants(&data(2, 2, 0)).unwrap().shifts, vec![vec![1]]);
    }

    #[test]
    fn half_residue_descends() {
        let mut d = data(2, 0, 1);
        d.residues = Some(vec![vec![q(0, 1)]]);
        let k = kummer_invariants(&d).unwrap();
        assert_eq!(k.basis_twist, vec![vec![1]]);
        assert_eq!(k.shifts, vec![vec![-1]]);
        assert_eq!(k.residues.unwrap(), vec![vec![q(1, 2)]]);
    }

    #[test]
    fn malformed_actions() {
        assert!(kummer_invariants(&data(0, 0, 0)).is_err());
        let mut d = data(2, 0, 0);
        d.weights.push(vec![1]);
        assert!(kummer_invariants(&d).is_err());
    }
}
