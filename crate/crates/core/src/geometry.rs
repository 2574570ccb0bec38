//! Points, divisors and line bundles on P¹, local boundary charts, and K₀(𝒪_{P¹}).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::Rational;
use crate::error::{Error, Result};

/// A point of P¹: a rational coordinate or ∞.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Finite(Rational),
    Infinity,
}

impl Point {
    pub fn finite(a: Rational) -> Self {
        Point::Finite(a)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(a) => write!(f, "{a}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Point::Infinity),
            t => t
                .parse::<Rational>()
                .map(Point::Finite)
                .map_err(|e| Error::Invalid(format!("bad point {s:?}: {}", e.0))),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Point;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a rational \"p/q\", an integer, or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Point, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Point, E> {
                Ok(Point::Finite(Rational::int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Point, E> {
                i64::try_from(v)
                    .map(|v| Point::Finite(Rational::int(v)))
                    .map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Reduced boundary divisor on P¹.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct BoundaryDivisor {
    points: Vec<Point>,
}

impl BoundaryDivisor {
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Invalid(format!("boundary point {} repeated", w[0])));
        }
        Ok(BoundaryDivisor { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn has_infinity(&self) -> bool {
        self.points.last().is_some_and(Point::is_infinity)
    }
}

impl TryFrom<Vec<Point>> for BoundaryDivisor {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        BoundaryDivisor::new(v)
    }
}

impl From<BoundaryDivisor> for Vec<Point> {
    fn from(d: BoundaryDivisor) -> Self {
        d.points
    }
}

/// Formal-local boundary `D = {x₁⋯x_ℓ = 0}` in `n_vars` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalBoundary {
    pub n_vars: usize,
    pub ell: usize,
}

impl LocalBoundary {
    pub fn new(n_vars: usize, ell: usize) -> Result<Self> {
        if ell > n_vars {
            return Err(Error::Invalid(format!("{ell} boundary branches in {n_vars} variables")));
        }
        Ok(LocalBoundary { n_vars, ell })
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i < self.ell
    }
}

/// Effective divisor supported on the boundary: one multiplicity per component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwistDivisor {
    pub multiplicities: Vec<u32>,
}

impl TwistDivisor {
    pub fn new(multiplicities: Vec<u32>) -> Self {
        TwistDivisor { multiplicities }
    }

    pub fn zero(components: usize) -> Self {
        TwistDivisor::new(vec![0; components])
    }

    /// `k·D` for a boundary with `components` components.
    pub fn multiple_of_boundary(components: usize, k: u32) -> Self {
        TwistDivisor::new(vec![k; components])
    }

    pub fn get(&self, i: usize) -> i64 {
        self.multiplicities.get(i).copied().unwrap_or(0) as i64
    }

    pub fn check_components(&self, components: usize) -> Result<()> {
        if self.multiplicities.len() != components {
            return Err(Error::VarMismatch {
                expected: components,
                found: self.multiplicities.len(),
            });
        }
        Ok(())
    }
}

/// `𝒪(Σ shift_p · p)`: sections may have poles of order `shift_p` at `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundleP1 {
    shifts: BTreeMap<Point, i64>,
}

impl LineBundleP1 {
    pub fn from_shifts(shifts: impl IntoIterator<Item = (Point, i64)>) -> Self {
        let mut out = LineBundleP1::default();
        for (p, s) in shifts {
            out.add_at(p, s);
        }
        out
    }

    /// `𝒪(k)`, trivialized away from ∞.
    pub fn o(k: i64) -> Self {
        LineBundleP1::from_shifts([(Point::Infinity, k)])
    }

    /// `ω_{P¹} = 𝒪(−2·∞)` through `f ↦ f·dx`.
    pub fn canonical() -> Self {
        LineBundleP1::o(-2)
    }

    fn add_at(&mut self, p: Point, s: i64) {
        let e = self.shifts.entry(p).or_insert(0);
        *e += s;
        if *e == 0 {
            self.shifts.retain(|_, v| *v != 0);
        }
    }

    pub fn degree(&self) -> i64 {
        self.shifts.values().sum()
    }

    pub fn shift_at(&self, p: &Point) -> i64 {
        self.shifts.get(p).copied().unwrap_or(0)
    }

    pub fn shifts(&self) -> &BTreeMap<Point, i64> {
        &self.shifts
    }

    pub fn tensor(&self, other: &LineBundleP1) -> LineBundleP1 {
        let mut out = self.clone();
        for (p, s) in &other.shifts {
            out.add_at(p.clone(), *s);
        }
        out
    }

    pub fn dual(&self) -> LineBundleP1 {
        LineBundleP1::from_shifts(self.shifts.iter().map(|(p, s)| (p.clone(), -s)))
    }

    pub fn cohomology(&self) -> (u64, u64) {
        line_bundle_cohomology(self.degree())
    }
}

/// `(h⁰, h¹)` of `𝒪(k)` on P¹.
pub fn line_bundle_cohomology(k: i64) -> (u64, u64) {
    ((k + 1).max(0) as u64, (-k - 1).max(0) as u64)
}

/// `Ω¹(log D)`, of degree `#D − 2`.
pub fn log_forms(d: &BoundaryDivisor) -> LineBundleP1 {
    LineBundleP1::canonical().tensor(&LineBundleP1::from_shifts(d.points().iter().map(|p| (p.clone(), 1))))
}

/// A class in `K₀(𝒪_{P¹}) ≅ ℤ²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct K0Class {
    pub rank: i64,
    pub degree: i64,
}

impl K0Class {
    pub fn new(rank: i64, degree: i64) -> Self {
        K0Class { rank, degree }
    }
}

impl fmt::Display for K0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.rank, self.degree)
    }
}

impl Add for K0Class {
    type Output = K0Class;
    fn add(self, o: K0Class) -> K0Class {
        K0Class::new(self.rank + o.rank, self.degree + o.degree)
    }
}

impl Sub for K0Class {
    type Output = K0Class;
    fn sub(self, o: K0Class) -> K0Class {
        K0Class::new(self.rank - o.rank, self.degree - o.degree)
    }
}

impl Neg for K0Class {
    type Output = K0Class;
    fn neg(self) -> K0Class {
        K0Class::new(-self.rank, -self.degree)
    }
}

impl std::iter::Sum for K0Class {
    fn sum<I: Iterator<Item = K0Class>>(it: I) -> K0Class {
        it.fold(K0Class::default(), Add::add)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafTerm {
    Bundle(LineBundleP1),
    Skyscraper { length: u64 },
}

/// Class of a direct sum of line bundles and skyscrapers.
pub fn k0_class(terms: &[SheafTerm]) -> K0Class {
    terms
        .iter()
        .map(|t| match t {
            SheafTerm::Bundle(l) => K0Class::new(1, l.degree()),
            SheafTerm::Skyscraper { length } => K0Class::new(0, *length as i64),
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn pt(n: i64) -> Point {
        Point::Finite(Rational::int(n))
    }

    #[test]
    fn k0_examples() {
        assert_eq!(k0_class(&[SheafTerm::Bundle(LineBundleP1::o(4))]), K0Class::new(1, 4));
        assert_eq!(k0_class(&[SheafTerm::Skyscraper { length: 3 }]), K0Class::new(0, 3));
        let s = [
            SheafTerm::Bundle(LineBundleP1::o(1)),
            SheafTerm::Bundle(LineBundleP1::o(-1)),
        ];
        assert_eq!(k0_class(&s), K0Class::new(2, 0));
    }

    #[test]
    fn cohomology_examples() {
        assert_eq!(line_bundle_cohomology(0), (1, 0));
        assert_eq!(line_bundle_cohomology(-1), (0, 0));
        assert_eq!(line_bundle_cohomology(-3), (0, 2));
    }

    #[test]
    fn log_forms_examples() {
        let d = |v: Vec<Point>| BoundaryDivisor::new(v).unwrap();
        assert_eq!(log_forms(&d(vec![pt(0), Point::Infinity])).degree(), 0);
        assert_eq!(log_forms(&d(vec![pt(0)])).degree(), -1);
        assert_eq!(log_forms(&d(vec![pt(0), pt(1), Point::Infinity])).degree(), 1);
    }

    #[test]
    fn divisor_rejects_repeats() {
        assert!(BoundaryDivisor::new(vec![pt(0), pt(0)]).is_err());
        let d = BoundaryDivisor::new(vec![Point::Infinity, Point::Finite(q(1, 2))]).unwrap();
        assert!(d.has_infinity());
        assert_eq!(d.index_of(&Point::Finite(q(1, 2))), Some(0));
    }

    #[test]
    fn point_serde() {
        let p: Point = serde_json::from_str("\"-1/2\"").unwrap();
        assert_eq!(p, Point::Finite(q(-1, 2)));
        let p: Point = serde_json::from_str("3").unwrap();
        assert_eq!(p, pt(3));
        let p: Point = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"inf\"");
    }
}
