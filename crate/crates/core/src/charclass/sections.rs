//! Global sections of line bundles on P¹ as spaces of rational functions, and
//! first-order operators `f ↦ s·f' + w·f` between them.

use crate::algebra::{rank_of_vectors, Poly, Rational};
use crate::error::{Error, Result};
use crate::geometry::{LineBundleP1, Point};

/// `H⁰(𝒪(Σ s_p p))` with basis `v·x^k / q`, `0 ≤ k < dim`, where `q` carries
/// the finite poles and `v` the finite zeros.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    q: Poly,
    v: Poly,
    dim: usize,
}

impl SectionSpace {
    pub fn new(l: &LineBundleP1) -> Self {
        let mut q = Poly::constant(Rational::one());
        let mut v = Poly::constant(Rational::one());
        for (p, &s) in l.shifts() {
            if let Point::Finite(a) = p {
                let lin = Poly::linear(a).pow(s.unsigned_abs() as u32);
                if s > 0 {
                    q = q.mul(&lin);
                } else {
                    v = v.mul(&lin);
                }
            }
        }
        SectionSpace {
            q,
            v,
            dim: (l.degree() + 1).max(0) as usize,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(numerator, denominator)` of the `k`-th basis function.
    pub fn basis(&self, k: usize) -> (Poly, Poly) {
        (self.v.mul(&Poly::monomial(k, Rational::one())), self.q.clone())
    }

    /// Coordinates of `num/den`; errors if it is not a section.
    pub fn coords(&self, num: &Poly, den: &Poly) -> Result<Vec<(usize, Rational)>> {
        if num.is_zero() {
            return Ok(Vec::new());
        }
        let not_section = || Error::Invalid("rational function is not a section of the bundle".into());
        let (a, r) = num.mul(&self.q).divrem(den)?;
        if !r.is_zero() {
            return Err(not_section());
        }
        let (b, r) = a.divrem(&self.v)?;
        if !r.is_zero() || b.degree().is_some_and(|d| d >= self.dim) {
            return Err(not_section());
        }
        Ok(b.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.clone()))
            .collect())
    }
}

/// `f ↦ sign·f' + w·f` for `w = wn/wd`, as `(numerator, denominator)`.
pub fn apply_operator(f: &(Poly, Poly), sign: &Rational, wn: &Poly, wd: &Poly) -> (Poly, Poly) {
    let (fnum, fden) = f;
    let deriv = fnum.derivative().mul(fden).sub(&fnum.mul(&fden.derivative()));
    let num = deriv.mul(wd).scale(sign).add(&wn.mul(fnum).mul(fden));
    (num, fden.mul(fden).mul(wd))
}

/// `(dim source, rank)` of `f ↦ sign·f' + w·f` from `H⁰(src)` to `H⁰(tgt)`.
pub fn operator_rank(
    src: &LineBundleP1,
    tgt: &LineBundleP1,
    sign: &Rational,
    w: &(Poly, Poly),
) -> Result<(usize, usize)> {
    let s = SectionSpace::new(src);
    let t = SectionSpace::new(tgt);
    let images = (0..s.dim())
        .map(|k| {
            let (n, d) = apply_operator(&s.basis(k), sign, &w.0, &w.1);
            t.coords(&n, &d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((s.dim(), rank_of_vectors(images.iter().map(|v| v.as_slice()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    #[test]
    fn section_counts() {
        let l = LineBundleP1::from_shifts([(Point::Finite(q(0, 1)), 2), (Point::Infinity, -1)]);
        let s = SectionSpace::new(&l);
        assert_eq!(s.dim(), 2);
        let (n, d) = s.basis(1);
        assert_eq!(s.coords(&n, &d).unwrap(), vec![(1, q(1, 1))]);
        // x has a pole at ∞, not allowed
        assert!(s.coords(&Poly::monomial(1, q(1, 1)), &Poly::constant(q(1, 1))).is_err());
        let neg = LineBundleP1::from_shifts([(Point::Finite(q(1, 1)), -1), (Point::Infinity, 2)]);
        let s = SectionSpace::new(&neg);
        assert_eq!(s.dim(), 2);
        assert!(s.coords(&Poly::constant(q(1, 1)), &Poly::constant(q(1, 1))).is_err());
    }

    #[test]
    fn derivative_on_laurent_polynomials() {
        // d: span{x^{-2..2}} → span{x^{-3..1}}dx has rank 4
        let zero = Point::Finite(q(0, 1));
        let src = LineBundleP1::from_shifts([(zero.clone(), 2), (Point::Infinity, 2)]);
        let tgt = LineBundleP1::from_shifts([(zero, 3), (Point::Infinity, 1)]);
        let w = (Poly::zero(), Poly::constant(q(1, 1)));
        assert_eq!(operator_rank(&src, &tgt, &q(1, 1), &w).unwrap(), (5, 4));
    }
}
