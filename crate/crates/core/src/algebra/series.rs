//! Multivariate Laurent polynomials confined to a weight window.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rational::Rational;
use super::window::WeightWindow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedLaurentSeries {
    window: WeightWindow,
    coeffs: BTreeMap<Vec<i64>, Rational>,
    /// Set when some term was discarded for falling outside the window.
    overflow: bool,
}

impl TruncatedLaurentSeries {
    pub fn zero(window: WeightWindow) -> Self {
        TruncatedLaurentSeries {
            window,
            coeffs: BTreeMap::new(),
            overflow: false,
        }
    }

    /// Build from terms; terms outside the window are dropped and flagged.
    pub fn from_terms(window: WeightWindow, terms: impl IntoIterator<Item = (Vec<i64>, Rational)>) -> Result<Self> {
        let mut s = TruncatedLaurentSeries::zero(window);
        for (e, c) in terms {
            s.check_len(&e)?;
            s.add_term(e, c);
        }
        Ok(s)
    }

    pub fn monomial(window: WeightWindow, exp: Vec<i64>, c: Rational) -> Result<Self> {
        Self::from_terms(window, [(exp, c)])
    }

    pub fn constant(window: WeightWindow, c: Rational) -> Self {
        let n = window.n_vars();
        Self::from_terms(window, [(vec![0; n], c)]).expect("arity matches")
    }

    fn check_len(&self, e: &[i64]) -> Result<()> {
        if e.len() != self.window.n_vars() {
            return Err(Error::VarMismatch {
                expected: self.window.n_vars(),
                found: e.len(),
            });
        }
        Ok(())
    }

    fn add_term(&mut self, e: Vec<i64>, c: Rational) {
        if c.is_zero() {
            return;
        }
        if !self.window.contains(&e) {
            self.overflow = true;
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn window(&self) -> &WeightWindow {
        &self.window
    }

    pub fn n_vars(&self) -> usize {
        self.window.n_vars()
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: &[i64]) -> Rational {
        self.coeffs.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rational)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_arity(other)?;
        let mut out = self.clone();
        out.overflow |= other.overflow;
        for (e, c) in &other.coeffs {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = TruncatedLaurentSeries::zero(self.window.clone());
        out.overflow = self.overflow;
        for (e, v) in &self.coeffs {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Rational::int(-1)))
    }

    /// Re-truncate onto another window of the same arity.
    pub fn restrict(&self, w: &WeightWindow) -> Result<Self> {
        if w.n_vars() != self.n_vars() {
            return Err(Error::VarMismatch {
                expected: self.n_vars(),
                found: w.n_vars(),
            });
        }
        let mut out = Self::from_terms(w.clone(), self.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())))?;
        out.overflow |= self.overflow;
        Ok(out)
    }

    fn same_arity(&self, other: &Self) -> Result<()> {
        if self.n_vars() != other.n_vars() {
            return Err(Error::VarMismatch {
                expected: self.n_vars(),
                found: other.n_vars(),
            });
        }
        Ok(())
    }
}

/// Exact product with every exponent outside `w` discarded.
pub fn series_mul(
    a: &TruncatedLaurentSeries,
    b: &TruncatedLaurentSeries,
    w: &WeightWindow,
) -> Result<TruncatedLaurentSeries> {
    a.same_arity(b)?;
    if w.n_vars() != a.n_vars() {
        return Err(Error::VarMismatch {
            expected: a.n_vars(),
            found: w.n_vars(),
        });
    }
    let mut out = TruncatedLaurentSeries::zero(w.clone());
    out.overflow = a.overflow || b.overflow;
    for (ea, ca) in &a.coeffs {
        for (eb, cb) in &b.coeffs {
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            out.add_term(e, ca * cb);
        }
    }
    Ok(out)
}

/// `x_i ∂/∂x_i`: scales `x^α` by `α_i`. Never leaves the window.
pub fn log_derivation(f: &TruncatedLaurentSeries, i: usize) -> Result<TruncatedLaurentSeries> {
    if i >= f.n_vars() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n_vars: f.n_vars(),
        });
    }
    let mut out = TruncatedLaurentSeries::zero(f.window.clone());
    out.overflow = f.overflow;
    for (e, c) in &f.coeffs {
        out.add_term(e.clone(), c * &Rational::int(e[i]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::q;

    fn w1() -> WeightWindow {
        WeightWindow::cube(1, -5, 5)
    }

    fn mono(e: i64, c: Rational) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::monomial(w1(), vec![e], c).unwrap()
    }

    #[test]
    fn mul_examples() {
        let p = series_mul(&mono(-1, q(1, 1)), &mono(2, q(1, 1)), &w1()).unwrap();
        assert_eq!(p, mono(1, q(1, 1)));

        let a = mono(0, q(1, 1)).add(&mono(1, q(1, 1))).unwrap();
        let b = mono(0, q(1, 1)).sub(&mono(1, q(1, 1))).unwrap();
        let p = series_mul(&a, &b, &w1()).unwrap();
        assert_eq!(p.coeff(&[0]), q(1, 1));
        assert_eq!(p.coeff(&[1]), q(0, 1));
        assert_eq!(p.coeff(&[2]), q(-1, 1));
        assert_eq!(p.len(), 2);

        let p = series_mul(&mono(4, q(1, 1)), &mono(3, q(1, 1)), &w1()).unwrap();
        assert!(p.is_zero());
        assert!(p.overflowed());
    }

    #[test]
    fn mul_arity_mismatch() {
        let a = mono(0, q(1, 1));
        let b = TruncatedLaurentSeries::constant(WeightWindow::cube(2, -1, 1), q(1, 1));
        assert!(series_mul(&a, &b, &w1()).is_err());
    }

    #[test]
    fn log_derivation_examples() {
        let w = WeightWindow::cube(2, -5, 5);
        let f = TruncatedLaurentSeries::monomial(w.clone(), vec![-2, 1], q(1, 1)).unwrap();
        let g = log_derivation(&f, 0).unwrap();
        assert_eq!(g.coeff(&[-2, 1]), q(-2, 1));

        assert!(log_derivation(&TruncatedLaurentSeries::constant(w.clone(), q(1, 1)), 1)
            .unwrap()
            .is_zero());

        let f = mono(2, q(3, 1)).add(&mono(-1, q(1, 1))).unwrap();
        let g = log_derivation(&f, 0).unwrap();
        assert_eq!(g.coeff(&[2]), q(6, 1));
        assert_eq!(g.coeff(&[-1]), q(-1, 1));
        assert!(log_derivation(&f, 1).is_err());
    }

    #[test]
    fn no_stored_zeros() {
        let s = mono(1, q(1, 2)).add(&mono(1, q(-1, 2))).unwrap();
        assert!(s.is_zero());
    }
}
