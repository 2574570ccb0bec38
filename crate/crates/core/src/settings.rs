//! Window enlargement policy and the stabilization wrapper used by every
//! window-certified computation.

use serde::{Deserialize, Serialize};

use crate::algebra::WeightWindow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    /// Number of enlargements beyond the base window.
    pub grow_rounds: usize,
    /// Growth per round in every direction.
    pub grow_step: i64,
    /// Largest total dimension a single complex may have.
    pub max_dim: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grow_rounds: 2,
            grow_step: 2,
            max_dim: 250_000,
        }
    }
}

impl Settings {
    /// The base window followed by its enlargements.
    pub fn windows(&self, w: &WeightWindow) -> Vec<WeightWindow> {
        (0..=self.grow_rounds)
            .map(|r| w.grow(r as i64 * self.grow_step))
            .collect()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            return Err(Error::DimensionCap { dim, cap: self.max_dim });
        }
        Ok(())
    }
}

/// A value computed on the base window together with its values on the
/// enlarged windows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilized<T> {
    pub value: T,
    pub evidence: Vec<T>,
    pub stable: bool,
}

/// Evaluate `f` on every window of the policy; stable iff all values agree.
pub fn stabilize<T, F>(settings: &Settings, w: &WeightWindow, f: F) -> Result<Stabilized<T>>
where
    T: PartialEq + Clone,
    F: Fn(&WeightWindow) -> Result<T>,
{
    stabilize_by(settings, w, f, |a, b| a == b)
}

/// As [`stabilize`] with a custom agreement test between the base value and each enlargement.
pub fn stabilize_by<T, F, E>(settings: &Settings, w: &WeightWindow, f: F, agree: E) -> Result<Stabilized<T>>
where
    T: Clone,
    F: Fn(&WeightWindow) -> Result<T>,
    E: Fn(&T, &T) -> bool,
{
    let evidence = settings.windows(w).iter().map(&f).collect::<Result<Vec<T>>>()?;
    let value = evidence[0].clone();
    let stable = evidence[1..].iter().all(|v| agree(&value, v));
    Ok(Stabilized {
        value,
        evidence,
        stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_grow_by_step() {
        let s = Settings::default();
        let ws = s.windows(&WeightWindow::cube(1, -3, 3));
        assert_eq!(ws.len(), 3);
        assert_eq!(ws[2].lo, vec![-7]);
        assert_eq!(ws[1].hi, vec![5]);
    }

    #[test]
    fn detects_drift() {
        let s = Settings::default();
        let w = WeightWindow::cube(1, -3, 3);
        let st = stabilize(&s, &w, |w| Ok(w.size() > 0)).unwrap();
        assert!(st.stable);
        let drift = stabilize(&s, &w, |w| Ok(w.size())).unwrap();
        assert!(!drift.stable);
        assert_eq!(drift.value, 7);
    }
}
