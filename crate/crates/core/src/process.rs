//! Discrete processes on a finite space and random times.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::space::Filtration;

/// Measurability claim carried by a [`Process`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Adapted,
    Predictable,
    Ambient,
}

/// Values `X_t(ω)` stored time-major: `values[t][atom]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    values: Vec<Vec<Q>>,
    tag: Tag,
}

impl Process {
    pub fn new(values: Vec<Vec<Q>>, tag: Tag) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("process needs at least one time".into()));
        }
        let n = values[0].len();
        if values.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension("ragged process values".into()));
        }
        Ok(Self { values, tag })
    }

    /// Builds from a per-time closure.
    pub fn from_fn(horizon: usize, n_atoms: usize, tag: Tag, f: impl Fn(usize, usize) -> Q) -> Self {
        let values = (0..=horizon)
            .map(|t| (0..n_atoms).map(|a| f(t, a)).collect())
            .collect();
        Self { values, tag }
    }

    pub fn constant(horizon: usize, n_atoms: usize, c: Q) -> Self {
        Self::from_fn(horizon, n_atoms, Tag::Adapted, |_, _| c.clone())
    }

    /// Same values, different measurability claim.
    pub fn with_tag(mut self, tag: Tag) -> Self {
        self.tag = tag;
        self
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn n_atoms(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, t: usize, atom: usize) -> &Q {
        &self.values[t][atom]
    }

    /// `X_{t-}`, i.e. `X_{t-1}` with `X_{0-} = X_0`.
    pub fn left(&self, t: usize, atom: usize) -> &Q {
        &self.values[t.saturating_sub(1)][atom]
    }

    /// `ΔX_t = X_t - X_{t-}`; zero at `t = 0`.
    pub fn delta(&self, t: usize, atom: usize) -> Q {
        if t == 0 {
            Q::zero()
        } else {
            &self.values[t][atom] - &self.values[t - 1][atom]
        }
    }

    /// Increment with the origin convention `X_{0-} = 0`, used for
    /// processes that start from zero before time 0 (`A`, `K`, `D`).
    pub fn jump_from_origin(&self, t: usize, atom: usize) -> Q {
        if t == 0 {
            self.values[0][atom].clone()
        } else {
            self.delta(t, atom)
        }
    }

    pub fn row(&self, t: usize) -> &[Q] {
        &self.values[t]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.values
    }

    /// Path of one atom, `t = 0..=T`.
    pub fn path(&self, atom: usize) -> Vec<Q> {
        self.values.iter().map(|row| row[atom].clone()).collect()
    }

    pub fn map(&self, f: impl Fn(&Q) -> Q) -> Self {
        Self {
            values: self.values.iter().map(|r| r.iter().map(&f).collect()).collect(),
            tag: self.tag,
        }
    }

    /// Pointwise combination; the tag of `self` is kept.
    pub fn zip_with(&self, other: &Process, f: impl Fn(&Q, &Q) -> Q) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
                .collect(),
            tag: self.tag,
        })
    }

    pub fn mul(&self, other: &Process) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `X^σ_t = X_{σ ∧ t}`.
    pub fn stopped(&self, sigma: &StoppingMap) -> Self {
        Self::from_fn(self.horizon(), self.n_atoms(), self.tag, |t, a| {
            self.values[t.min(sigma.get(a))][a].clone()
        })
    }

    /// `X^{σ-}`: frozen at `X_{σ-1}` from `σ` on (`X^{0-} = X_0`).
    pub fn stopped_before(&self, sigma: &StoppingMap) -> Self {
        Self::from_fn(self.horizon(), self.n_atoms(), self.tag, |t, a| {
            let s = sigma.get(a);
            if t < s {
                self.values[t][a].clone()
            } else {
                self.values[s.saturating_sub(1)][a].clone()
            }
        })
    }

    pub fn same_shape(&self, other: &Process) -> Result<()> {
        if self.horizon() != other.horizon() || self.n_atoms() != other.n_atoms() {
            return Err(Error::Dimension(format!(
                "process shapes ({}, {}) vs ({}, {})",
                self.horizon(),
                self.n_atoms(),
                other.horizon(),
                other.n_atoms()
            )));
        }
        Ok(())
    }

    /// Checks the process against its tag in `filtration`; the ambient tag
    /// imposes nothing beyond shape.
    pub fn check_measurable(&self, filtration: &Filtration) -> Result<()> {
        self.check_tag(filtration, self.tag)
    }

    pub fn check_tag(&self, filtration: &Filtration, tag: Tag) -> Result<()> {
        if self.horizon() != filtration.horizon() || self.n_atoms() != filtration.n_atoms() {
            return Err(Error::Dimension("process does not match filtration".into()));
        }
        for t in 0..=self.horizon() {
            let partition = match tag {
                Tag::Ambient => return Ok(()),
                Tag::Adapted => filtration.at(t),
                Tag::Predictable if t == 0 => {
                    let row = &self.values[0];
                    if row.iter().any(|v| v != &row[0]) {
                        return Err(Error::NotMeasurable {
                            what: "predictable process at t = 0".into(),
                            t: 0,
                            cell: 0,
                        });
                    }
                    continue;
                }
                Tag::Predictable => filtration.at(t - 1),
            };
            if let Some(cell) = partition.first_non_constant(&self.values[t]) {
                let what = match tag {
                    Tag::Adapted => "adapted process",
                    _ => "predictable process",
                };
                return Err(Error::NotMeasurable {
                    what: what.into(),
                    t,
                    cell,
                });
            }
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().flatten().all(|v| !num_traits::Signed::is_negative(v))
    }

    /// True when every path is nondecreasing in time.
    pub fn is_nondecreasing(&self) -> bool {
        (1..=self.horizon()).all(|t| (0..self.n_atoms()).all(|a| self.values[t][a] >= self.values[t - 1][a]))
    }
}

/// A random time with values in `{0, …, T} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingMap {
    values: Vec<usize>,
}

impl StoppingMap {
    /// Sentinel for `∞`; compares greater than every finite time.
    pub const INFINITY: usize = usize::MAX;

    pub fn new(values: Vec<usize>) -> Self {
        Self { values }
    }

    pub fn constant(n_atoms: usize, t: usize) -> Self {
        Self::new(vec![t; n_atoms])
    }

    pub fn never(n_atoms: usize) -> Self {
        Self::constant(n_atoms, Self::INFINITY)
    }

    pub fn get(&self, atom: usize) -> usize {
        self.values[atom]
    }

    pub fn is_finite(&self, atom: usize) -> bool {
        self.values[atom] != Self::INFINITY
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn n_atoms(&self) -> usize {
        self.values.len()
    }

    /// Checks `{σ ≤ t}` is a union of `t`-cells for every `t`.
    pub fn is_stopping_time(&self, filtration: &Filtration) -> bool {
        self.first_stopping_violation(filtration).is_none()
    }

    pub(crate) fn first_stopping_violation(&self, filtration: &Filtration) -> Option<(usize, usize)> {
        for t in 0..=filtration.horizon() {
            let hit: Vec<bool> = self.values.iter().map(|&s| s <= t).collect();
            if let Some(cell) = filtration.at(t).first_non_constant(&hit) {
                return Some((t, cell));
            }
        }
        None
    }

    /// `𝟙⟦σ,∞⟦` as an adapted 0/1 path.
    pub fn indicator(&self, horizon: usize) -> Process {
        Process::from_fn(horizon, self.n_atoms(), Tag::Adapted, |t, a| {
            if self.values[a] <= t {
                crate::rational::one()
            } else {
                Q::zero()
            }
        })
    }

    /// `σ_B = σ on B, ∞ elsewhere`.
    pub fn restricted(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self::new(
            (0..self.n_atoms())
                .map(|a| if keep(a) { self.values[a] } else { Self::INFINITY })
                .collect(),
        )
    }

    /// Renders `"inf"` for the sentinel.
    pub fn display(&self, atom: usize) -> String {
        if self.is_finite(atom) {
            self.values[atom].to_string()
        } else {
            "inf".to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::space::Partition;

    fn w1_filtration() -> Filtration {
        Filtration::new(vec![Partition::trivial(2), Partition::trivial(2), Partition::discrete(2)]).unwrap()
    }

    #[test]
    fn tags_are_enforced() {
        let f = w1_filtration();
        let s = Process::new(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]], Tag::Adapted).unwrap();
        assert!(s.check_measurable(&f).is_ok());
        // Predictable would need X_2 to be F_1-measurable.
        let err = s.clone().with_tag(Tag::Predictable).check_measurable(&f).unwrap_err();
        assert!(matches!(err, Error::NotMeasurable { t: 2, .. }));
        let bad = Process::new(vec![vec![qi(0), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]], Tag::Adapted).unwrap();
        assert!(bad.check_measurable(&f).is_err());
    }

    #[test]
    fn stopping_operations() {
        let s = Process::new(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]], Tag::Adapted).unwrap();
        let eta = StoppingMap::new(vec![2, StoppingMap::INFINITY]);
        let before = s.stopped_before(&eta);
        assert_eq!(before.path(0), vec![qi(1), qi(1), qi(1)]);
        assert_eq!(before.path(1), vec![qi(1), qi(1), qi(2)]);
        let tau = StoppingMap::new(vec![1, 2]);
        assert_eq!(s.stopped(&tau).path(0), vec![qi(1), qi(1), qi(1)]);
        assert_eq!(s.delta(2, 1), qi(1));
        assert_eq!(s.delta(0, 1), q(0, 1));
    }

    #[test]
    fn stopping_time_check() {
        let f = w1_filtration();
        assert!(StoppingMap::new(vec![2, StoppingMap::INFINITY]).is_stopping_time(&f));
        assert!(!StoppingMap::new(vec![1, 2]).is_stopping_time(&f));
        assert!(StoppingMap::constant(2, 1).is_stopping_time(&f));
    }
}
