//! Connections on open subsets of P¹ given by rank-one forms `w(x)dx`, and their local formal types.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::factor::{ExponentialFactor, Term};
use super::formal::FormalConnection;
use super::regular::RegularBlock;
use crate::algebra::{Poly, Rational};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryDivisor, Point};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarPart {
    pub at: Rational,
    /// `a_1, a_2, …` of `Σ a_j (x − at)^{−j}`.
    pub coeffs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FormRepr {
    #[serde(default)]
    poles: Vec<PolarPart>,
    #[serde(default)]
    poly: Vec<Rational>,
}

/// `w(x)dx` with `w = Σ_p Σ_j a_{p,j}(x − p)^{−j} + b(x)` in partial fractions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "FormRepr", into = "FormRepr")]
pub struct RankOneForm {
    poles: BTreeMap<Rational, Vec<Rational>>,
    poly: Poly,
}

impl From<FormRepr> for RankOneForm {
    fn from(r: FormRepr) -> Self {
        let mut f = RankOneForm::new(Poly::new(r.poly));
        for p in r.poles {
            f = f.with_pole(p.at, p.coeffs);
        }
        f
    }
}

impl From<RankOneForm> for FormRepr {
    fn from(f: RankOneForm) -> Self {
        FormRepr {
            poles: f
                .poles
                .into_iter()
                .map(|(at, coeffs)| PolarPart { at, coeffs })
                .collect(),
            poly: f.poly.coeffs().to_vec(),
        }
    }
}

impl RankOneForm {
    pub fn new(poly: Poly) -> Self {
        RankOneForm {
            poles: BTreeMap::new(),
            poly,
        }
    }

    pub fn zero() -> Self {
        RankOneForm::new(Poly::zero())
    }

    /// Add `Σ_j coeffs[j−1] (x − at)^{−j}`.
    pub fn with_pole(mut self, at: Rational, coeffs: Vec<Rational>) -> Self {
        let e = self.poles.entry(at.clone()).or_default();
        if e.len() < coeffs.len() {
            e.resize(coeffs.len(), Rational::zero());
        }
        for (a, c) in e.iter_mut().zip(coeffs) {
            *a += &c;
        }
        while e.last().is_some_and(Rational::is_zero) {
            e.pop();
        }
        if e.is_empty() {
            self.poles.remove(&at);
        }
        self
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn finite_poles(&self) -> &BTreeMap<Rational, Vec<Rational>> {
        &self.poles
    }

    /// Polar coefficients `a_1, a_2, …` at `p` in the local coordinate
    /// (`x − p`, or `y = 1/x` at ∞).
    pub fn polar_coeffs(&self, p: &Point) -> Vec<Rational> {
        let mut a = match p {
            Point::Finite(c) => self.poles.get(c).cloned().unwrap_or_default(),
            Point::Infinity => {
                let res: Rational = self.poles.values().filter_map(|v| v.first()).sum();
                // b_k x^k dx = −b_k y^{−k−2} dy
                let mut a = vec![-res];
                a.extend(self.poly.coeffs().iter().map(|b| -b));
                a
            }
        };
        while a.last().is_some_and(Rational::is_zero) {
            a.pop();
        }
        a
    }

    /// Pole order of `w dx` at `p` (0 when holomorphic).
    pub fn pole_order(&self, p: &Point) -> usize {
        self.polar_coeffs(p).len()
    }

    /// Points (finite ones and possibly ∞) where `w dx` has a pole.
    pub fn pole_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.poles.keys().cloned().map(Point::Finite).collect();
        if self.pole_order(&Point::Infinity) > 0 {
            out.push(Point::Infinity);
        }
        out
    }

    /// `(numerator, denominator)` of `w` over ℚ.
    pub fn as_fraction(&self) -> (Poly, Poly) {
        let mut den = Poly::constant(Rational::one());
        for (p, a) in &self.poles {
            den = den.mul(&Poly::linear(p).pow(a.len() as u32));
        }
        let mut num = self.poly.mul(&den);
        for (p, a) in &self.poles {
            let lin = Poly::linear(p);
            let (rest, _) = den.divrem(&lin.pow(a.len() as u32)).expect("nonzero divisor");
            for (j, c) in a.iter().enumerate() {
                let j = j + 1;
                let factor = rest.mul(&lin.pow((a.len() - j) as u32)).scale(c);
                num = num.add(&factor);
            }
        }
        (num, den)
    }
}

/// A rank-`rank` block declared as the pushforward of `φ = Σ c_q x^{q}` (rational `q < 0`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuiseuxBlock {
    pub point: Point,
    pub rank: usize,
    pub phi: Vec<(Rational, Rational)>,
    #[serde(default)]
    pub residue: Rational,
}

impl PuiseuxBlock {
    /// Pullback along `x = t^ρ`.
    pub fn pullback(&self, rho: u32) -> PuiseuxBlock {
        let r = Rational::int(rho as i64);
        PuiseuxBlock {
            point: self.point.clone(),
            rank: self.rank,
            phi: self.phi.iter().map(|(e, c)| (e * &r, c.clone())).collect(),
            residue: &self.residue * &r,
        }
    }

    fn local_type(&self) -> Result<LocalFormalType> {
        let mut terms = Vec::new();
        for (e, c) in &self.phi {
            let k = e.to_i64().ok_or_else(|| Error::Ramified {
                point: self.point.to_string(),
                reason: format!("exponent {e} is not an integer"),
            })?;
            if k >= 0 {
                continue;
            }
            terms.push(Term {
                exp: vec![(-k) as u32],
                coeff: c.clone(),
            });
        }
        let phi = ExponentialFactor::new(1, terms, None)?;
        Ok(LocalFormalType::from_residue(
            self.point.clone(),
            phi,
            self.residue.clone(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveConnection {
    pub boundary: BoundaryDivisor,
    /// Diagonal connection matrix: one rank-one form per summand.
    pub summands: Vec<RankOneForm>,
    #[serde(default)]
    pub puiseux: Vec<PuiseuxBlock>,
}

impl CurveConnection {
    pub fn new(boundary: BoundaryDivisor, summands: Vec<RankOneForm>) -> Result<Self> {
        let c = CurveConnection {
            boundary,
            summands,
            puiseux: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_puiseux(mut self, blocks: Vec<PuiseuxBlock>) -> Result<Self> {
        self.puiseux = blocks;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.summands.iter().enumerate() {
            for p in f.pole_points() {
                if !self.boundary.contains(&p) {
                    return Err(Error::Invalid(format!(
                        "summand {k} has a pole at {p} outside the boundary"
                    )));
                }
            }
        }
        for b in &self.puiseux {
            if !self.boundary.contains(&b.point) {
                return Err(Error::Invalid(format!(
                    "declared block at {} outside the boundary",
                    b.point
                )));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.summands.len() + self.puiseux.iter().map(|b| b.rank).sum::<usize>()
    }
}

/// Local formal type of a rank-one summand at a boundary point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFormalType {
    pub point: Point,
    pub phi: ExponentialFactor,
    pub regular: RegularBlock,
    /// Raw residue `a_1`.
    pub residue: Rational,
    /// Integral shift `⌈a_1⌉`: the seed is `z^{−shift}·𝒪̂`.
    pub shift: i64,
}

impl LocalFormalType {
    fn from_residue(point: Point, phi: ExponentialFactor, a1: Rational) -> Self {
        let shift = a1.ceil_i64();
        let lambda = Rational::int(shift) - &a1;
        LocalFormalType {
            point,
            phi,
            regular: RegularBlock::semisimple(1, vec![lambda]).expect("λ in [0, 1)"),
            residue: a1,
            shift,
        }
    }

    pub fn irregularity(&self) -> u32 {
        self.phi.pole_divisor()[0]
    }

    pub fn to_formal(&self) -> FormalConnection {
        FormalConnection::disc(self.phi.clone(), self.regular.clone()).expect("ℓ = 1")
    }
}

/// Local type of `w dx` at `p`: `φ = Σ_{j≥1} (−a_{j+1}/j) z^{−j}`, `λ = ⌈a_1⌉ − a_1`.
pub fn local_formal_type_of(form: &RankOneForm, p: &Point) -> LocalFormalType {
    let a = form.polar_coeffs(p);
    let terms = a
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| Term {
            exp: vec![j as u32],
            coeff: -c / &Rational::int(j as i64),
        })
        .collect();
    let phi = ExponentialFactor::new(1, terms, None).expect("positive exponents");
    let a1 = a.first().cloned().unwrap_or_else(Rational::zero);
    LocalFormalType::from_residue(p.clone(), phi, a1)
}

/// Local types of every summand and every declared block at `p`.
pub fn local_formal_type(c: &CurveConnection, p: &Point) -> Result<Vec<LocalFormalType>> {
    if !c.boundary.contains(p) {
        return Err(Error::Invalid(format!("{p} is not a boundary point")));
    }
    let mut out: Vec<LocalFormalType> = c.summands.iter().map(|f| local_formal_type_of(f, p)).collect();
    for b in c.puiseux.iter().filter(|b| &b.point == p) {
        let t = b.local_type()?;
        out.extend(std::iter::repeat_n(t, b.rank));
    }
    Ok(out)
}

/// Smallest divisor `ρ` of `bound` whose pullback `x = t^ρ` makes every local type at `p` unramified.
pub fn ramification_index(c: &CurveConnection, p: &Point, bound: u32) -> Result<u32> {
    if bound == 0 {
        return Err(Error::Invalid("ramification bound must be positive".into()));
    }
    for rho in (1..=bound).filter(|r| bound.is_multiple_of(*r)) {
        let ok = c
            .puiseux
            .iter()
            .filter(|b| &b.point == p)
            .all(|b| b.pullback(rho).local_type().is_ok());
        if ok {
            return Ok(rho);
        }
    }
    Err(Error::NoRamificationIndex { bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn zero() -> Point {
        Point::Finite(q(0, 1))
    }

    fn gm() -> BoundaryDivisor {
        BoundaryDivisor::new(vec![zero(), Point::Infinity]).unwrap()
    }

    #[test]
    fn double_pole_gives_simple_pole_factor() {
        let w = RankOneForm::zero().with_pole(q(0, 1), vec![q(0, 1), q(-1, 1)]);
        let t = local_formal_type_of(&w, &zero());
        assert_eq!(t.phi, ExponentialFactor::monomial(vec![1], q(1, 1)).unwrap());
        assert_eq!(t.regular.residues(), &[q(0, 1)]);
        let at_inf = local_formal_type_of(&w, &Point::Infinity);
        assert!(at_inf.phi.is_zero());
        assert_eq!(at_inf.regular.residues(), &[q(0, 1)]);
    }

    #[test]
    fn half_residue() {
        let w = RankOneForm::zero().with_pole(q(0, 1), vec![q(1, 2)]);
        let t = local_formal_type_of(&w, &zero());
        assert!(t.phi.is_zero());
        assert_eq!(t.regular.residues(), &[q(1, 2)]);
        assert_eq!(t.shift, 1);
        let s = local_formal_type_of(&w, &Point::Infinity);
        assert_eq!(s.residue, q(-1, 2));
        assert_eq!(s.regular.residues(), &[q(1, 2)]);
        assert_eq!(s.shift, 0);
    }

    #[test]
    fn polynomial_part_lives_at_infinity() {
        let w = RankOneForm::new(Poly::constant(q(1, 1)));
        assert_eq!(w.polar_coeffs(&Point::Infinity), vec![q(0, 1), q(-1, 1)]);
        let t = local_formal_type_of(&w, &Point::Infinity);
        assert_eq!(t.phi, ExponentialFactor::monomial(vec![1], q(1, 1)).unwrap());
        let w2 = RankOneForm::new(Poly::new(vec![q(0, 1), q(2, 1)]));
        assert_eq!(w2.pole_order(&Point::Infinity), 3);
    }

    #[test]
    fn fraction_form() {
        let w = RankOneForm::new(Poly::constant(q(1, 1)))
            .with_pole(q(0, 1), vec![q(1, 2), q(-1, 1)])
            .with_pole(q(1, 1), vec![q(2, 1)]);
        let (n, d) = w.as_fraction();
        for x in [q(3, 1), q(-2, 1), q(1, 3)] {
            let direct = q(1, 1) + q(1, 2) / x.clone() - q(1, 1) / (&x * &x) + q(2, 1) / (&x - &q(1, 1));
            assert_eq!(n.eval(&x) / d.eval(&x), direct);
        }
    }

    #[test]
    fn poles_must_lie_on_boundary() {
        let w = RankOneForm::zero().with_pole(q(1, 1), vec![q(1, 1)]);
        assert!(CurveConnection::new(gm(), vec![w]).is_err());
    }

    #[test]
    fn ramification_examples() {
        let c = CurveConnection::new(gm(), vec![RankOneForm::zero()]).unwrap();
        assert_eq!(ramification_index(&c, &zero(), 6).unwrap(), 1);
        let b = PuiseuxBlock {
            point: zero(),
            rank: 2,
            phi: vec![(q(-3, 2), q(1, 1))],
            residue: q(0, 1),
        };
        let c = c.with_puiseux(vec![b]).unwrap();
        assert!(local_formal_type(&c, &zero()).is_err());
        assert_eq!(ramification_index(&c, &zero(), 2).unwrap(), 2);
        assert_eq!(ramification_index(&c, &zero(), 6).unwrap(), 2);
        assert!(matches!(
            ramification_index(&c, &zero(), 3),
            Err(Error::NoRamificationIndex { bound: 3 })
        ));
    }
}
