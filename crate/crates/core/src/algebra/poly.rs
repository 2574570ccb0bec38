//! Dense univariate polynomials over ℚ.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(k: usize, c: Rational) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `x − a`.
    pub fn linear(a: &Rational) -> Self {
        Poly::new(vec![-a, Rational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &Rational::int(k as i64))
                .collect(),
        )
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::Invalid("division by the zero polynomial".into()))?;
        let inv = d.lead().recip();
        let mut r = self.0.clone();
        let mut quot = vec![Rational::zero(); self.0.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = &r[r.len() - 1] * &inv;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    r[k + j] -= &(&c * dj);
                }
                quot[k] = c;
            }
            r.pop();
        }
        Ok((Poly::new(quot), Poly::new(r)))
    }

    /// Order of vanishing at `a` (`None` for zero).
    pub fn order_at(&self, a: &Rational) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let lin = Poly::linear(a);
        let mut p = self.clone();
        let mut k = 0;
        loop {
            let (qt, r) = p.divrem(&lin).expect("nonzero divisor");
            if !r.is_zero() {
                return Some(k);
            }
            p = qt;
            k += 1;
        }
    }

    /// Taylor coefficients at `a`: `self(a + t) = Σ c_k t^k`.
    pub fn taylor_at(&self, a: &Rational) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.0.len());
        let lin = Poly::linear(a);
        let mut p = self.clone();
        while !p.is_zero() {
            let (qt, r) = p.divrem(&lin).expect("nonzero divisor");
            out.push(r.coeff(0));
            p = qt;
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::q;

    fn p(v: &[i64]) -> Poly {
        Poly::new(v.iter().map(|&c| Rational::int(c)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[1, -1]);
        assert_eq!(a.mul(&b), p(&[1, 0, -1]));
        assert_eq!(a.add(&b), p(&[2]));
        assert_eq!(a.sub(&a), Poly::zero());
        assert_eq!(p(&[3, 0, 2]).derivative(), p(&[0, 4]));
        assert_eq!(p(&[1, 2, 1]).eval(&q(1, 2)), q(9, 4));
    }

    #[test]
    fn division() {
        let (qt, r) = p(&[-1, 0, 1]).divrem(&p(&[-1, 1])).unwrap();
        assert_eq!(qt, p(&[1, 1]));
        assert!(r.is_zero());
        let (qt, r) = p(&[1, 0, 1]).divrem(&p(&[0, 2])).unwrap();
        assert_eq!(qt, Poly::new(vec![q(0, 1), q(1, 2)]));
        assert_eq!(r, p(&[1]));
        assert!(p(&[1]).divrem(&Poly::zero()).is_err());
    }

    #[test]
    fn orders_and_taylor() {
        let f = p(&[-1, 1]).pow(3).mul(&p(&[2, 1]));
        assert_eq!(f.order_at(&q(1, 1)), Some(3));
        assert_eq!(f.order_at(&q(0, 1)), Some(0));
        let t = p(&[0, 0, 1]).taylor_at(&q(1, 1));
        assert_eq!(t, vec![q(1, 1), q(2, 1), q(1, 1)]);
    }
}
