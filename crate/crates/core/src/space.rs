//! Finite filtered probability spaces.
//!
//! Atoms are indexed `0..n`. A filtration is one partition of the atom set
//! per time step `0..=T`, each refining its predecessor; `F_{0-}` is the
//! trivial sigma-field.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_q, Q};

/// A partition of `0..n` into non-empty cells.
///
/// Cells are kept in order of their smallest atom, so two partitions with the
/// same blocks compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    pub fn from_cells(n: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidPartition {
            context: "cells".into(),
            reason,
        };
        let mut cell_of = vec![usize::MAX; n];
        for (i, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(invalid(format!("cell {i} is empty")));
            }
            for &a in cell {
                if a >= n {
                    return Err(invalid(format!("atom {a} out of range")));
                }
                if cell_of[a] != usize::MAX {
                    return Err(invalid(format!("atom {a} appears twice")));
                }
                cell_of[a] = i;
            }
        }
        if let Some(a) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(invalid(format!("atom {a} is not covered")));
        }
        Ok(Self::normalized(cells))
    }

    /// Groups atoms by equal key.
    pub fn from_keys<K: Eq + Hash>(keys: &[K]) -> Self {
        let mut index: HashMap<&K, usize> = HashMap::new();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for (a, k) in keys.iter().enumerate() {
            let c = *index.entry(k).or_insert_with(|| {
                cells.push(Vec::new());
                cells.len() - 1
            });
            cells[c].push(a);
        }
        Self::normalized(cells)
    }

    pub fn trivial(n: usize) -> Self {
        Self::normalized(vec![(0..n).collect()])
    }

    pub fn discrete(n: usize) -> Self {
        Self::normalized((0..n).map(|a| vec![a]).collect())
    }

    fn normalized(mut cells: Vec<Vec<usize>>) -> Self {
        for c in &mut cells {
            c.sort_unstable();
        }
        cells.sort_unstable_by_key(|c| c[0]);
        let n = cells.iter().map(Vec::len).sum();
        let mut cell_of = vec![0; n];
        for (i, c) in cells.iter().enumerate() {
            for &a in c {
                cell_of[a] = i;
            }
        }
        Self { cells, cell_of }
    }

    pub fn n_atoms(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    pub fn cell_of(&self, atom: usize) -> usize {
        self.cell_of[atom]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True if every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n_atoms() == coarser.n_atoms()
            && self.cells.iter().all(|c| {
                let k = coarser.cell_of(c[0]);
                c.iter().all(|&a| coarser.cell_of(a) == k)
            })
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Partition {
        let keys: Vec<(usize, usize)> = (0..self.n_atoms())
            .map(|a| (self.cell_of(a), other.cell_of(a)))
            .collect();
        Partition::from_keys(&keys)
    }

    /// Index of the first cell on which `values` is not constant.
    pub fn first_non_constant<T: PartialEq>(&self, values: &[T]) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.iter().any(|&a| values[a] != values[c[0]]))
    }

    pub fn is_measurable<T: PartialEq>(&self, values: &[T]) -> bool {
        self.first_non_constant(values).is_none()
    }

    /// Cells of `finer` contained in cell `i` of `self`.
    pub fn children(&self, i: usize, finer: &Partition) -> Vec<usize> {
        let mut out: Vec<usize> = self.cells[i].iter().map(|&a| finer.cell_of(a)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A refining sequence of partitions indexed by `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    steps: Vec<Partition>,
}

impl Filtration {
    pub fn new(steps: Vec<Partition>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Dimension("filtration needs at least one step".into()));
        }
        let n = steps[0].n_atoms();
        for (t, p) in steps.iter().enumerate() {
            if p.n_atoms() != n {
                return Err(Error::Dimension(format!(
                    "partition at t = {t} covers {} atoms, expected {n}",
                    p.n_atoms()
                )));
            }
            if t > 0 && !p.refines(&steps[t - 1]) {
                return Err(Error::NotRefining { t, prev: t - 1 });
            }
        }
        Ok(Self { steps })
    }

    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn n_atoms(&self) -> usize {
        self.steps[0].n_atoms()
    }

    pub fn at(&self, t: usize) -> &Partition {
        &self.steps[t]
    }

    pub fn steps(&self) -> &[Partition] {
        &self.steps
    }

    /// True if `self` is at least as fine as `coarser` at every time.
    pub fn refines(&self, coarser: &Filtration) -> bool {
        self.steps.len() == coarser.steps.len()
            && self.steps.iter().zip(&coarser.steps).all(|(f, c)| f.refines(c))
    }

    pub(crate) fn check_time(&self, t: usize) -> Result<()> {
        if t > self.horizon() {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }
}

/// Finite probability space with a filtration and an ambient sigma-field.
#[derive(Debug, Clone, PartialEq)]
pub struct FinSpace {
    probs: Vec<Q>,
    filtration: Filtration,
    ambient: Partition,
}

impl FinSpace {
    /// Builds a space whose ambient sigma-field is `F_T`; use
    /// [`FinSpace::refine_ambient`] to add a random time or a signal.
    pub fn new(probs: Vec<Q>, filtration: Filtration) -> Result<Self> {
        if probs.len() != filtration.n_atoms() {
            return Err(Error::Dimension(format!(
                "{} probabilities for {} atoms",
                probs.len(),
                filtration.n_atoms()
            )));
        }
        if let Some(atom) = probs.iter().position(|p| !p.is_positive()) {
            return Err(Error::NonPositiveProbability { atom });
        }
        let sum: Q = probs.iter().sum();
        if !sum.is_one() {
            return Err(Error::ProbabilitiesDoNotSumToOne {
                sum: format_q(&sum),
            });
        }
        let ambient = filtration.at(filtration.horizon()).clone();
        Ok(Self {
            probs,
            filtration,
            ambient,
        })
    }

    /// Refines the ambient partition by the level sets of `keys`.
    pub fn refine_ambient<K: Eq + Hash>(mut self, keys: &[K]) -> Result<Self> {
        if keys.len() != self.n_atoms() {
            return Err(Error::Dimension("ambient keys".into()));
        }
        self.ambient = self.ambient.meet(&Partition::from_keys(keys));
        Ok(self)
    }

    pub fn probs(&self) -> &[Q] {
        &self.probs
    }

    pub fn prob(&self, atom: usize) -> &Q {
        &self.probs[atom]
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn ambient(&self) -> &Partition {
        &self.ambient
    }

    pub fn horizon(&self) -> usize {
        self.filtration.horizon()
    }

    pub fn n_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn at(&self, t: usize) -> &Partition {
        self.filtration.at(t)
    }

    /// `E[X]` under this space's measure.
    pub fn expect(&self, x: &[Q]) -> Q {
        self.probs.iter().zip(x).map(|(p, v)| p * v).sum()
    }

    /// Probability of the atom set where `pred` holds.
    pub fn prob_where(&self, pred: impl Fn(usize) -> bool) -> Q {
        (0..self.n_atoms())
            .filter(|&a| pred(a))
            .map(|a| &self.probs[a])
            .sum()
    }

    /// The same filtered space under the equivalent measure `dQ = density dP`.
    pub fn change_measure(&self, density: &[Q]) -> Result<Self> {
        if density.len() != self.n_atoms() {
            return Err(Error::Dimension("density length".into()));
        }
        if let Some(atom) = density.iter().position(|d| !d.is_positive()) {
            return Err(Error::NonPositiveDensity { atom });
        }
        let mass = self.expect(density);
        if !mass.is_one() {
            return Err(Error::DensityNotNormalized {
                mass: format_q(&mass),
            });
        }
        let probs = self.probs.iter().zip(density).map(|(p, d)| p * d).collect();
        Ok(Self {
            probs,
            filtration: self.filtration.clone(),
            ambient: self.ambient.clone(),
        })
    }
}

pub(crate) fn cell_mass(probs: &[Q], cell: &[usize]) -> Q {
    let mut m = Q::zero();
    for &a in cell {
        m += &probs[a];
    }
    m
}
