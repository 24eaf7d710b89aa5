//! Conditional expectations and martingale classification.
//!
//! On a finite space with a finite horizon every local martingale is a true
//! martingale (any localizing sequence is eventually `T`), so every "local
//! martingale" statement in this crate is checked as [`Kind::Martingale`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::Q;
use crate::space::{cell_mass, FinSpace, Filtration, Partition};

/// `E[X | σ(partition)]`, returned per atom.
pub fn cond_exp_on(probs: &[Q], partition: &Partition, x: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::default(); x.len()];
    for cell in partition.cells() {
        let mass = cell_mass(probs, cell);
        let mut acc = Q::default();
        for &a in cell {
            acc += &probs[a] * &x[a];
        }
        let v = acc / mass;
        for &a in cell {
            out[a] = v.clone();
        }
    }
    out
}

impl FinSpace {
    /// `E[X | F_t]` for an ambient-measurable `X`.
    pub fn cond_exp(&self, x: &[Q], t: usize) -> Result<Vec<Q>> {
        self.filtration().check_time(t)?;
        if x.len() != self.n_atoms() {
            return Err(Error::Dimension("cond_exp input length".into()));
        }
        Ok(cond_exp_on(self.probs(), self.at(t), x))
    }

    /// `E[X | F_σ]` for a stopping time `σ`; on `{σ = ∞}` the conditioning is
    /// on the ambient sigma-field, i.e. `X` is returned unchanged.
    pub fn cond_exp_at_stopping(&self, x: &[Q], sigma: &StoppingMap) -> Result<Vec<Q>> {
        if let Some((t, cell)) = sigma.first_stopping_violation(self.filtration()) {
            return Err(Error::NotMeasurable {
                what: "stopping time".into(),
                t,
                cell,
            });
        }
        let keys: Vec<(usize, usize)> = (0..self.n_atoms())
            .map(|a| {
                let s = sigma.get(a);
                if sigma.is_finite(a) {
                    (s, self.at(s).cell_of(a))
                } else {
                    (usize::MAX, a)
                }
            })
            .collect();
        Ok(cond_exp_on(self.probs(), &Partition::from_keys(&keys), x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Martingale,
    Supermartingale,
    Submartingale,
    None,
}

/// Result of [`classify`]: each field is the first `(t, cell)` (cell of the
/// partition at `t`) where the corresponding one-step property fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    pub not_martingale: Option<(usize, usize)>,
    pub not_supermartingale: Option<(usize, usize)>,
    pub not_submartingale: Option<(usize, usize)>,
}

impl Classification {
    pub fn is_martingale(&self) -> bool {
        self.kind == Kind::Martingale
    }

    /// Martingales count as supermartingales.
    pub fn is_supermartingale(&self) -> bool {
        matches!(self.kind, Kind::Martingale | Kind::Supermartingale)
    }
}

/// Compares `E[X_{t+1} | F_t]` with `X_t` on every cell, exactly.
pub fn classify(probs: &[Q], filtration: &Filtration, x: &Process) -> Result<Classification> {
    x.check_tag(filtration, Tag::Adapted)?;
    let mut not_mart = None;
    let mut not_super = None;
    let mut not_sub = None;
    for t in 0..filtration.horizon() {
        let partition = filtration.at(t);
        let next = cond_exp_on(probs, partition, x.row(t + 1));
        for (i, cell) in partition.cells().iter().enumerate() {
            let a = cell[0];
            let (e, cur) = (&next[a], x.get(t, a));
            if e != cur && not_mart.is_none() {
                not_mart = Some((t, i));
            }
            if e > cur && not_super.is_none() {
                not_super = Some((t, i));
            }
            if e < cur && not_sub.is_none() {
                not_sub = Some((t, i));
            }
        }
    }
    let kind = match (not_mart, not_super, not_sub) {
        (None, _, _) => Kind::Martingale,
        (_, None, _) => Kind::Supermartingale,
        (_, _, None) => Kind::Submartingale,
        _ => Kind::None,
    };
    Ok(Classification {
        kind,
        not_martingale: not_mart,
        not_supermartingale: not_super,
        not_submartingale: not_sub,
    })
}

impl FinSpace {
    pub fn classify(&self, x: &Process) -> Result<Classification> {
        classify(self.probs(), self.filtration(), x)
    }
}

/// Projects a process adapted to the finer filtration `g` onto `f`.
pub fn optional_projection(probs: &[Q], g: &Filtration, f: &Filtration, x: &Process) -> Result<Process> {
    if !g.refines(f) {
        return Err(Error::InvalidPartition {
            context: "optional projection".into(),
            reason: "the larger filtration does not refine the smaller one".into(),
        });
    }
    x.check_tag(g, Tag::Adapted)?;
    let rows = (0..=f.horizon()).map(|t| cond_exp_on(probs, f.at(t), x.row(t))).collect();
    Process::new(rows, Tag::Adapted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::w1_space;
    use crate::rational::{q, qi};

    fn path(rows: Vec<Vec<Q>>) -> Process {
        Process::new(rows, Tag::Adapted).unwrap()
    }

    #[test]
    fn cond_exp_examples() {
        let s = w1_space();
        let x = vec![qi(0), qi(2)];
        assert_eq!(s.cond_exp(&x, 1).unwrap(), vec![qi(1), qi(1)]);
        assert_eq!(s.cond_exp(&x, 2).unwrap(), x);
        let c = vec![q(5, 3), q(5, 3)];
        assert_eq!(s.cond_exp(&c, 0).unwrap(), c);
        assert!(matches!(s.cond_exp(&x, 3), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn classify_examples() {
        let s = w1_space();
        let one = Process::constant(2, 2, qi(1));
        assert_eq!(s.classify(&one).unwrap().kind, Kind::Martingale);

        let mart = path(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]]);
        assert_eq!(s.classify(&mart).unwrap().kind, Kind::Martingale);

        let sup = path(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(1)]]);
        let c = s.classify(&sup).unwrap();
        assert_eq!(c.kind, Kind::Supermartingale);
        assert_eq!(c.not_supermartingale, None);
        assert_eq!(c.not_martingale, Some((1, 0)));

        let sub = sup.map(|v| -v);
        assert_eq!(s.classify(&sub).unwrap().kind, Kind::Submartingale);
    }

    #[test]
    fn classify_rejects_non_adapted() {
        let s = w1_space();
        let x = path(vec![vec![qi(0), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]]);
        assert!(s.classify(&x).is_err());
    }

    #[test]
    fn projection_examples() {
        let s = w1_space();
        let g = Filtration::new(vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)]).unwrap();
        let x = path(vec![vec![qi(3), qi(3)], vec![qi(0), qi(2)], vec![qi(0), qi(2)]]);
        let y = optional_projection(s.probs(), &g, s.filtration(), &x).unwrap();
        assert_eq!(y.row(1), &[qi(1), qi(1)]);
        assert_eq!(y.row(2), &[qi(0), qi(2)]);
        let adapted = path(vec![vec![qi(1), qi(1)], vec![qi(1), qi(1)], vec![qi(0), qi(2)]]);
        assert_eq!(optional_projection(s.probs(), &g, s.filtration(), &adapted).unwrap(), adapted);
        // Reversed roles: F does not refine G.
        assert!(optional_projection(s.probs(), s.filtration(), &g, &adapted).is_err());
    }

    #[test]
    fn cond_exp_at_stopping_time() {
        let s = w1_space();
        let sigma = StoppingMap::new(vec![2, 1]);
        // {σ ≤ 1} = {ω2} is not F_1-measurable.
        assert!(s.cond_exp_at_stopping(&[qi(0), qi(2)], &sigma).is_err());
        let sigma = StoppingMap::constant(2, 1);
        assert_eq!(s.cond_exp_at_stopping(&[qi(0), qi(2)], &sigma).unwrap(), vec![qi(1), qi(1)]);
    }
}
