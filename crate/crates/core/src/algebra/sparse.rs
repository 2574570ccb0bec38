//! Sparse matrices over ℚ and exact rank by fraction-free row elimination.
//!
//! Rows are scaled to primitive integer vectors; elimination replaces a row by
//! `p·row − a·pivot_row` and divides out the content gcd, so no fractions are
//! ever formed. Arithmetic runs in `i128` and restarts in `BigInt` on overflow.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Row-major sparse matrix; each row is sorted by column and holds no zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrixQ {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrixQ {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrixQ {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i].push((i, Rational::one()));
        }
        m
    }

    /// Duplicate positions are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut acc: Vec<HashMap<usize, Rational>> = vec![HashMap::new(); rows];
        for (i, j, v) in entries {
            if i >= rows || j >= cols {
                return Err(Error::Invalid(format!(
                    "entry ({i}, {j}) outside a {rows}×{cols} matrix"
                )));
            }
            *acc[i].entry(j).or_insert_with(Rational::zero) += &v;
        }
        let data = acc
            .into_iter()
            .map(|r| {
                let mut v: Vec<(usize, Rational)> = r.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                v.sort_by_key(|(j, _)| *j);
                v
            })
            .collect();
        Ok(SparseMatrixQ { rows, cols, data })
    }

    /// Build from column vectors given as sparse `(row, value)` lists.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, Rational)>]) -> Result<Self> {
        let trip = columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, v.clone())));
        Self::from_triplets(rows, columns.len(), trip)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .map(|k| self.data[i][k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![Vec::new(); self.cols];
        for (i, j, v) in self.entries() {
            data[j].push((i, v.clone()));
        }
        SparseMatrixQ {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Columns as sparse `(row, value)` lists.
    pub fn columns(&self) -> Vec<Vec<(usize, Rational)>> {
        self.transpose().data
    }

    /// `self · other`.
    pub fn mul(&self, other: &SparseMatrixQ) -> Result<SparseMatrixQ> {
        if self.cols != other.rows {
            return Err(Error::Invalid(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            let mut acc: HashMap<usize, Rational> = HashMap::new();
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    *acc.entry(*j).or_insert_with(Rational::zero) += &(a * b);
                }
            }
            let mut v: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
            v.sort_by_key(|(j, _)| *j);
            data.push(v);
        }
        Ok(SparseMatrixQ {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Rows restricted to the listed column indices, renumbered in order.
    pub fn select_columns(&self, keep: &[usize]) -> SparseMatrixQ {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let data = self
            .data
            .iter()
            .map(|r| {
                let mut v: Vec<(usize, Rational)> = r
                    .iter()
                    .filter_map(|(j, x)| pos.get(j).map(|&k| (k, x.clone())))
                    .collect();
                v.sort_by_key(|(j, _)| *j);
                v
            })
            .collect();
        SparseMatrixQ {
            rows: self.rows,
            cols: keep.len(),
            data,
        }
    }

    /// Apply to a sparse vector indexed by columns.
    pub fn apply(&self, v: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        let cols = self.columns();
        let mut acc: HashMap<usize, Rational> = HashMap::new();
        for (j, x) in v {
            for (i, a) in &cols[*j] {
                *acc.entry(*i).or_insert_with(Rational::zero) += &(a * x);
            }
        }
        let mut out: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        out.sort_by_key(|(i, _)| *i);
        out
    }
}

/// Exact rank over ℚ.
pub fn rank_q(m: &SparseMatrixQ) -> usize {
    rank_of_vectors(m.data.iter().map(|r| r.as_slice()))
}

/// Basis of the right kernel `{v : m·v = 0}`, from the reduced row echelon form.
pub fn nullspace(m: &SparseMatrixQ) -> Vec<Vec<(usize, Rational)>> {
    let mut pivots: Vec<(usize, Vec<(usize, Rational)>)> = Vec::new();
    for row in &m.data {
        let mut r = row.clone();
        for (pc, prow) in &pivots {
            if let Some(c) = r.iter().find(|(j, _)| j == pc).map(|(_, c)| c.clone()) {
                r = axpy(&r, &(-c), prow);
            }
        }
        let Some((lead, lc)) = r.first().cloned() else { continue };
        let inv = lc.recip();
        let r: Vec<(usize, Rational)> = r.into_iter().map(|(j, x)| (j, x * &inv)).collect();
        for (_, prow) in pivots.iter_mut() {
            if let Some(c) = prow.iter().find(|(j, _)| *j == lead).map(|(_, c)| c.clone()) {
                *prow = axpy(prow, &(-c), &r);
            }
        }
        pivots.push((lead, r));
    }
    let pivot_cols: HashMap<usize, usize> = pivots.iter().enumerate().map(|(i, (c, _))| (*c, i)).collect();
    (0..m.cols)
        .filter(|j| !pivot_cols.contains_key(j))
        .map(|f| {
            let mut v = vec![(f, Rational::one())];
            for (pc, prow) in &pivots {
                if let Some((_, c)) = prow.iter().find(|(j, _)| *j == f) {
                    v.push((*pc, -c));
                }
            }
            v.sort_by_key(|(j, _)| *j);
            v
        })
        .collect()
}

/// `a + c·b` for sorted sparse vectors.
fn axpy(a: &[(usize, Rational)], c: &Rational, b: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() || k < b.len() {
        let ja = a.get(i).map_or(usize::MAX, |x| x.0);
        let jb = b.get(k).map_or(usize::MAX, |x| x.0);
        if ja < jb {
            out.push(a[i].clone());
            i += 1;
        } else if jb < ja {
            out.push((jb, c * &b[k].1));
            k += 1;
        } else {
            let v = &a[i].1 + &(c * &b[k].1);
            if !v.is_zero() {
                out.push((ja, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

/// Rank of a family of sparse rational vectors. Rows sharing no column
/// (transitively) are eliminated independently.
pub fn rank_of_vectors<'a>(vectors: impl IntoIterator<Item = &'a [(usize, Rational)]>) -> usize {
    let rows: Vec<Vec<(usize, BigInt)>> = vectors.into_iter().filter(|v| !v.is_empty()).map(integer_row).collect();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    fn find(parent: &mut HashMap<usize, usize>, x: usize) -> usize {
        let mut root = x;
        while let Some(&p) = parent.get(&root) {
            if p == root {
                break;
            }
            root = p;
        }
        let mut cur = x;
        while cur != root {
            let next = parent[&cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    for r in &rows {
        let a = find(&mut parent, r[0].0);
        parent.entry(a).or_insert(a);
        for (j, _) in &r[1..] {
            let b = find(&mut parent, *j);
            parent.entry(b).or_insert(b);
            if a != b {
                parent.insert(b, a);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<Vec<(usize, BigInt)>>> = HashMap::new();
    for r in rows {
        let root = find(&mut parent, r[0].0);
        groups.entry(root).or_default().push(r);
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort_by_key(Vec::len);
            let mut ech = Echelon::new();
            for r in g {
                ech.insert_int(r);
            }
            ech.rank()
        })
        .sum()
}

/// Clear denominators of a rational row; the result is a primitive integer row.
pub fn integer_row(v: &[(usize, Rational)]) -> Vec<(usize, BigInt)> {
    let den = Rational::common_denominator(v.iter().map(|(_, x)| x));
    let mut out: Vec<(usize, BigInt)> = v
        .iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| (*j, x.numer() * (&den / x.denom())))
        .collect();
    out.sort_by_key(|(j, _)| *j);
    make_primitive_big(&mut out);
    out
}

fn make_primitive_big(row: &mut [(usize, BigInt)]) {
    let mut g = BigInt::zero();
    for (_, x) in row.iter() {
        g = g.gcd(x);
        if g == BigInt::from(1) {
            break;
        }
    }
    if row.first().is_some_and(|(_, x)| x.is_negative()) {
        g = -g;
    }
    if !g.is_zero() && g != BigInt::from(1) {
        for (_, x) in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

#[derive(Clone, Debug)]
enum Row {
    Small(Vec<(usize, i128)>),
    Big(Vec<(usize, BigInt)>),
}

impl Row {
    fn lead(&self) -> Option<usize> {
        match self {
            Row::Small(r) => r.first().map(|(j, _)| *j),
            Row::Big(r) => r.first().map(|(j, _)| *j),
        }
    }

    fn to_big(&self) -> Vec<(usize, BigInt)> {
        match self {
            Row::Small(r) => r.iter().map(|(j, x)| (*j, BigInt::from(*x))).collect(),
            Row::Big(r) => r.clone(),
        }
    }

    fn from_big(r: Vec<(usize, BigInt)>) -> Row {
        let small: Option<Vec<(usize, i128)>> = r.iter().map(|(j, x)| x.to_i128().map(|v| (*j, v))).collect();
        match small {
            Some(s) if s.iter().all(|(_, v)| v.unsigned_abs() < (1u128 << 62)) => Row::Small(s),
            _ => Row::Big(r),
        }
    }
}

/// Incrementally built semi-echelon form: one stored row per pivot column.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<Row>,
    pivot_of: HashMap<usize, usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Insert a rational vector; returns true if it enlarged the span.
    pub fn insert(&mut self, v: &[(usize, Rational)]) -> bool {
        if v.is_empty() {
            return false;
        }
        self.insert_int(integer_row(v))
    }

    /// True if `v` lies in the current span.
    pub fn contains(&self, v: &[(usize, Rational)]) -> bool {
        if v.is_empty() {
            return true;
        }
        self.reduce(Row::from_big(integer_row(v))).is_none()
    }

    fn insert_int(&mut self, r: Vec<(usize, BigInt)>) -> bool {
        match self.reduce(Row::from_big(r)) {
            None => false,
            Some(row) => {
                let lead = row.lead().expect("nonzero row");
                self.pivot_of.insert(lead, self.rows.len());
                self.rows.push(row);
                true
            }
        }
    }

    /// Reduce against stored rows until the lead is a fresh column or the row vanishes.
    fn reduce(&self, mut row: Row) -> Option<Row> {
        loop {
            let lead = row.lead()?;
            let Some(&k) = self.pivot_of.get(&lead) else {
                return Some(row);
            };
            row = eliminate(&row, &self.rows[k]);
        }
    }
}

/// `p·row − a·piv` (with the common gcd of `p, a` removed), made primitive.
fn eliminate(row: &Row, piv: &Row) -> Row {
    if let (Row::Small(r), Row::Small(p)) = (row, piv) {
        if let Some(out) = eliminate_small(r, p) {
            return Row::Small(out);
        }
    }
    let r = row.to_big();
    let p = piv.to_big();
    Row::from_big(eliminate_big(&r, &p))
}

fn eliminate_small(r: &[(usize, i128)], p: &[(usize, i128)]) -> Option<Vec<(usize, i128)>> {
    let a = r[0].1;
    let b = p[0].1;
    let g = a.gcd(&b);
    let (mr, mp) = (b / g, a / g);
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (1, 1);
    while i < r.len() || j < p.len() {
        let ci = r.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cj = p.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        let (col, val) = if ci < cj {
            i += 1;
            (ci, r[i - 1].1.checked_mul(mr)?)
        } else if cj < ci {
            j += 1;
            (cj, p[j - 1].1.checked_mul(mp)?.checked_neg()?)
        } else {
            i += 1;
            j += 1;
            let x = r[i - 1].1.checked_mul(mr)?;
            let y = p[j - 1].1.checked_mul(mp)?;
            (ci, x.checked_sub(y)?)
        };
        if val != 0 {
            out.push((col, val));
        }
    }
    let mut g: i128 = 0;
    for (_, x) in &out {
        g = g.gcd(x);
        if g == 1 {
            break;
        }
    }
    if out.first().is_some_and(|(_, x)| *x < 0) {
        g = -g;
    }
    if g != 0 && g != 1 {
        for (_, x) in out.iter_mut() {
            *x /= g;
        }
    }
    if out.iter().any(|(_, x)| x.unsigned_abs() >= (1u128 << 62)) {
        return None;
    }
    Some(out)
}

fn eliminate_big(r: &[(usize, BigInt)], p: &[(usize, BigInt)]) -> Vec<(usize, BigInt)> {
    let a = &r[0].1;
    let b = &p[0].1;
    let g = a.gcd(b);
    let (mr, mp) = (b / &g, a / &g);
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (1, 1);
    while i < r.len() || j < p.len() {
        let ci = r.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cj = p.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        let (col, val) = if ci < cj {
            i += 1;
            (ci, &r[i - 1].1 * &mr)
        } else if cj < ci {
            j += 1;
            (cj, -(&p[j - 1].1 * &mp))
        } else {
            i += 1;
            j += 1;
            (ci, &r[i - 1].1 * &mr - &p[j - 1].1 * &mp)
        };
        if !val.is_zero() {
            out.push((col, val));
        }
    }
    make_primitive_big(&mut out);
    out
}
