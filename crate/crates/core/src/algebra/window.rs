use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A box of exponent vectors `lo ≤ γ ≤ hi` (componentwise).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl WeightWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::VarMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::Invalid(format!(
                "window lo[{i}] = {} exceeds hi[{i}] = {}",
                lo[i], hi[i]
            )));
        }
        Ok(WeightWindow { lo, hi })
    }

    /// The same interval `[lo, hi]` in each of `n` variables.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Self {
        WeightWindow::new(vec![lo; n], vec![hi; n]).expect("lo <= hi")
    }

    pub fn n_vars(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, exp: &[i64]) -> bool {
        exp.len() == self.lo.len()
            && exp
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(e, (l, h))| l <= e && e <= h)
    }

    /// Enlarge by `k` in every direction.
    pub fn grow(&self, k: i64) -> Self {
        WeightWindow {
            lo: self.lo.iter().map(|l| l - k).collect(),
            hi: self.hi.iter().map(|h| h + k).collect(),
        }
    }

    /// Number of exponent vectors in the box.
    pub fn size(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    /// Pole depth `max(0, −lo)` in each variable.
    pub fn depth(&self) -> Vec<i64> {
        self.lo.iter().map(|l| (-l).max(0)).collect()
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        box_points(&self.lo, &self.hi)
    }
}

/// All integer vectors in the box `[lo, hi]`, lexicographic order. Empty if any `lo > hi`.
pub fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let n = lo.len();
    if (0..n).any(|i| lo[i] > hi[i]) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                cur[i + 1..n].copy_from_slice(&lo[i + 1..n]);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted() {
        assert!(WeightWindow::new(vec![1], vec![0]).is_err());
        assert!(WeightWindow::new(vec![0, 0], vec![1]).is_err());
    }

    #[test]
    fn points_and_size() {
        let w = WeightWindow::cube(2, -1, 1);
        assert_eq!(w.size(), 9);
        assert_eq!(w.points().len(), 9);
        assert!(w.contains(&[-1, 1]));
        assert!(!w.contains(&[2, 0]));
        assert_eq!(box_points(&[], &[]), vec![Vec::<i64>::new()]);
    }
}
