//! Exponential factors `φ = u · Σ c_α x^{−α}` in the boundary variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{Error, Result};

/// One coefficient of a sparse polynomial or Laurent polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<u32>,
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FactorRepr {
    #[serde(default)]
    ell: Option<usize>,
    #[serde(default)]
    terms: Vec<Term>,
    #[serde(default)]
    unit: Option<Vec<Term>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FactorRepr", into = "FactorRepr")]
pub struct ExponentialFactor {
    ell: usize,
    /// `α ↦ c_α`, pole exponents.
    terms: BTreeMap<Vec<u32>, Rational>,
    /// Polynomial unit `u`; `None` means `u = 1`.
    unit: Option<BTreeMap<Vec<u32>, Rational>>,
}

fn collect_terms(ell: usize, terms: Vec<Term>, what: &str) -> Result<BTreeMap<Vec<u32>, Rational>> {
    let mut out: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for t in terms {
        if t.exp.len() != ell {
            return Err(Error::Invalid(format!(
                "{what} exponent {:?} has {} entries, expected {ell}",
                t.exp,
                t.exp.len()
            )));
        }
        *out.entry(t.exp).or_insert_with(Rational::zero) += &t.coeff;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

impl TryFrom<FactorRepr> for ExponentialFactor {
    type Error = Error;
    fn try_from(r: FactorRepr) -> Result<Self> {
        let ell = r
            .ell
            .or_else(|| r.terms.first().map(|t| t.exp.len()))
            .or_else(|| r.unit.as_ref().and_then(|u| u.first()).map(|t| t.exp.len()))
            .unwrap_or(1);
        ExponentialFactor::new(ell, r.terms, r.unit)
    }
}

impl From<ExponentialFactor> for FactorRepr {
    fn from(f: ExponentialFactor) -> Self {
        let list = |m: &BTreeMap<Vec<u32>, Rational>| {
            m.iter()
                .map(|(e, c)| Term {
                    exp: e.clone(),
                    coeff: c.clone(),
                })
                .collect()
        };
        FactorRepr {
            ell: Some(f.ell),
            terms: list(&f.terms),
            unit: f.unit.as_ref().map(list),
        }
    }
}

impl ExponentialFactor {
    pub fn new(ell: usize, terms: Vec<Term>, unit: Option<Vec<Term>>) -> Result<Self> {
        let terms = collect_terms(ell, terms, "pole")?;
        if terms.keys().any(|a| a.iter().all(|&x| x == 0)) {
            return Err(Error::Invalid("exponential factor has a constant term".into()));
        }
        let unit = unit.map(|u| collect_terms(ell, u, "unit")).transpose()?;
        Ok(ExponentialFactor { ell, terms, unit })
    }

    pub fn zero(ell: usize) -> Self {
        ExponentialFactor {
            ell,
            terms: BTreeMap::new(),
            unit: None,
        }
    }

    /// `c · x^{−α}`.
    pub fn monomial(alpha: Vec<u32>, c: Rational) -> Result<Self> {
        let ell = alpha.len();
        ExponentialFactor::new(ell, vec![Term { exp: alpha, coeff: c }], None)
    }

    pub fn with_unit(mut self, unit: Vec<Term>) -> Result<Self> {
        self.unit = Some(collect_terms(self.ell, unit, "unit")?);
        Ok(self)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.unit.as_ref().is_some_and(|u| u.is_empty())
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn unit(&self) -> Option<&BTreeMap<Vec<u32>, Rational>> {
        self.unit.as_ref()
    }

    /// `I_φ`: componentwise maximum pole exponent.
    pub fn pole_divisor(&self) -> Vec<u32> {
        let mut m = vec![0; self.ell];
        if self.is_zero() {
            return m;
        }
        for a in self.terms.keys() {
            for (mi, ai) in m.iter_mut().zip(a) {
                *mi = (*mi).max(*ai);
            }
        }
        m
    }

    fn unit_constant(&self) -> Rational {
        match &self.unit {
            None => Rational::one(),
            Some(u) => u.get(&vec![0; self.ell]).cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// `Ok` when a single monomial dominates every pole exponent and `u(0) ≠ 0`.
    pub fn check_good(&self) -> std::result::Result<(), String> {
        if self.is_zero() {
            return Ok(());
        }
        let m = self.pole_divisor();
        if !self.terms.contains_key(&m) {
            return Err(format!("no dominant monomial: x^-{m:?} has coefficient 0"));
        }
        if self.unit_constant().is_zero() {
            return Err("unit vanishes at the origin".into());
        }
        Ok(())
    }

    pub fn is_good(&self) -> bool {
        self.check_good().is_ok()
    }

    /// `u · Σ c_α x^{−α}` as a Laurent polynomial in the boundary variables.
    pub fn expansion(&self) -> BTreeMap<Vec<i64>, Rational> {
        let mut out: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        let one: BTreeMap<Vec<u32>, Rational> = [(vec![0; self.ell], Rational::one())].into();
        let unit = self.unit.as_ref().unwrap_or(&one);
        for (a, c) in &self.terms {
            for (b, d) in unit {
                let e: Vec<i64> = a.iter().zip(b).map(|(&ai, &bi)| bi as i64 - ai as i64).collect();
                *out.entry(e).or_insert_with(Rational::zero) += &(c * d);
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `x_i ∂_{x_i} φ` as a Laurent polynomial.
    pub fn log_derivative(&self, i: usize) -> Result<BTreeMap<Vec<i64>, Rational>> {
        if i >= self.ell {
            return Err(Error::IndexOutOfRange {
                index: i,
                n_vars: self.ell,
            });
        }
        let mut out = self.expansion();
        for (e, c) in out.iter_mut() {
            *c = &*c * &Rational::int(e[i]);
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }
}

/// Polar part of a Laurent polynomial (terms with some negative exponent)
/// is of the form `x^{−m}·(unit)`, or vanishes.
pub fn polar_part_is_good(f: &BTreeMap<Vec<i64>, Rational>) -> bool {
    let polar: Vec<(&Vec<i64>, &Rational)> = f
        .iter()
        .filter(|(e, c)| !c.is_zero() && e.iter().any(|&x| x < 0))
        .collect();
    let Some((first, _)) = polar.first() else {
        return true;
    };
    let mut m = vec![0i64; first.len()];
    for (e, _) in &polar {
        for (mi, &ei) in m.iter_mut().zip(e.iter()) {
            *mi = (*mi).max(-ei);
        }
    }
    let corner: Vec<i64> = m.iter().map(|x| -x).collect();
    f.get(&corner).is_some_and(|c| !c.is_zero())
}

/// `φ − ψ` as Laurent polynomials.
pub fn factor_difference(phi: &ExponentialFactor, psi: &ExponentialFactor) -> BTreeMap<Vec<i64>, Rational> {
    let mut out = phi.expansion();
    for (e, c) in psi.expansion() {
        *out.entry(e).or_insert_with(Rational::zero) -= &c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn t(exp: &[u32], c: i64) -> Term {
        Term {
            exp: exp.to_vec(),
            coeff: Rational::int(c),
        }
    }

    #[test]
    fn pole_divisor_and_goodness() {
        let f = ExponentialFactor::new(2, vec![t(&[2, 1], 1), t(&[1, 0], 3)], None).unwrap();
        assert_eq!(f.pole_divisor(), vec![2, 1]);
        assert!(f.is_good());
        let g = ExponentialFactor::new(2, vec![t(&[1, 0], 1), t(&[0, 1], 1)], None).unwrap();
        assert!(!g.is_good());
        let h = ExponentialFactor::monomial(vec![1], q(1, 1))
            .unwrap()
            .with_unit(vec![t(&[1], 1)])
            .unwrap();
        assert!(!h.is_good());
    }

    #[test]
    fn expansion_with_unit() {
        let f = ExponentialFactor::monomial(vec![2], q(1, 1))
            .unwrap()
            .with_unit(vec![t(&[0], 1), t(&[1], 1)])
            .unwrap();
        let e = f.expansion();
        assert_eq!(e[&vec![-2]], q(1, 1));
        assert_eq!(e[&vec![-1]], q(1, 1));
        let d = f.log_derivative(0).unwrap();
        assert_eq!(d[&vec![-2]], q(-2, 1));
        assert_eq!(d[&vec![-1]], q(-1, 1));
    }

    #[test]
    fn rejects_constant_term() {
        assert!(ExponentialFactor::new(1, vec![t(&[0], 1)], None).is_err());
        assert!(ExponentialFactor::new(1, vec![t(&[1, 0], 1)], None).is_err());
    }

    #[test]
    fn differences() {
        let a = ExponentialFactor::monomial(vec![1, 0], q(1, 1)).unwrap();
        let b = ExponentialFactor::monomial(vec![0, 1], q(1, 1)).unwrap();
        assert!(!polar_part_is_good(&factor_difference(&a, &b)));
        let c = ExponentialFactor::monomial(vec![1, 1], q(1, 1)).unwrap();
        assert!(polar_part_is_good(&factor_difference(&c, &a)));
        assert!(polar_part_is_good(&factor_difference(&a, &a)));
    }

    #[test]
    fn serde_roundtrip() {
        let f = ExponentialFactor::new(2, vec![t(&[2, 1], 1)], Some(vec![t(&[0, 0], 1)])).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: ExponentialFactor = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
