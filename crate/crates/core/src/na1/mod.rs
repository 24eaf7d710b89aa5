//! NA₁ decisions on finite trees.
//!
//! On a finite space a strictly positive deflator `Y` exists iff every
//! one-period conditional market admits strictly positive martingale
//! weights: chaining the weights gives `Y`, and `dQ = Y_T dP` is then an
//! equivalent martingale measure. Conversely a node without such weights
//! carries a one-step arbitrage by Stiemke's lemma, and holding that
//! position for one period from the node is an arbitrage of the first kind
//! because the wealth `x + H·ΔS` never drops below the initial capital `x`.

pub mod brute;
mod simplex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gmarket::GMarket;
use crate::process::{Process, StoppingMap, Tag};
use crate::progressive::{check_deflator, truncate_before_eta, ZetaLevel};
use crate::rational::Q;
use crate::space::{cell_mass, FinSpace, Filtration};
use simplex::Stiemke;

/// The conditional one-period market below one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OneStepMarket {
    /// Conditional probabilities of the children.
    pub q: Vec<Q>,
    /// `increments[c][i]` is the increment of asset `i` on child `c`.
    pub increments: Vec<Vec<Q>>,
}

impl OneStepMarket {
    pub fn new(q: Vec<Q>, increments: Vec<Vec<Q>>) -> Result<Self> {
        if q.is_empty() || q.len() != increments.len() {
            return Err(Error::Dimension("one increment row per child expected".into()));
        }
        let n_assets = increments[0].len();
        if increments.iter().any(|r| r.len() != n_assets) {
            return Err(Error::Dimension("ragged increments".into()));
        }
        if let Some(c) = q.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositiveProbability { atom: c });
        }
        let sum: Q = q.iter().sum();
        if !sum.is_one() {
            return Err(Error::ProbabilitiesDoNotSumToOne {
                sum: crate::rational::format_q(&sum),
            });
        }
        Ok(Self { q, increments })
    }

    pub fn n_assets(&self) -> usize {
        self.increments[0].len()
    }

    /// `H · ΔS_c` for every child.
    pub fn gains(&self, h: &[Q]) -> Vec<Q> {
        self.increments
            .iter()
            .map(|row| row.iter().zip(h).map(|(d, x)| d * x).sum())
            .collect()
    }
}

/// Result of [`check_one_step`].
#[derive(Debug, Clone, PartialEq)]
pub enum OneStep {
    /// `y_c > 0` with `Σ q_c y_c = 1` and `Σ q_c y_c ΔS_c = 0`.
    Weights(Vec<Q>),
    /// `H` with `H · ΔS_c ≥ 0` on every child and `> 0` on some child.
    Arbitrage(Vec<Q>),
}

pub fn check_one_step(m: &OneStepMarket) -> OneStep {
    let k = m.q.len();
    let rows: Vec<Vec<Q>> = (0..m.n_assets())
        .map(|i| (0..k).map(|c| &m.q[c] * &m.increments[c][i]).collect())
        .collect();
    match simplex::solve(&rows, k) {
        Stiemke::Feasible(y) => {
            let mass: Q = y.iter().zip(&m.q).map(|(a, b)| a * b).sum();
            OneStep::Weights(y.into_iter().map(|v| v / &mass).collect())
        }
        Stiemke::Infeasible(u) => {
            let scale = u.iter().map(Signed::abs).max().expect("infeasible needs a row");
            OneStep::Arbitrage(u.into_iter().map(|v| -v / &scale).collect())
        }
    }
}

/// A first-kind arbitrage found at node `(t, cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub t: usize,
    /// Index of the cell in the partition at `t`.
    pub cell: usize,
    pub atoms: Vec<usize>,
    /// Position held over `(t, t + 1]` on the cell.
    pub position: Vec<Q>,
    /// Children at `t + 1`, as atom lists.
    pub children: Vec<Vec<usize>>,
    /// `H · ΔS` on each child.
    pub wealth_increments: Vec<Q>,
    /// Terminal claim `χ` per atom: `H · ΔS_{t+1}` on the cell, 0 elsewhere.
    pub claim: Vec<Q>,
}

impl Certificate {
    /// The predictable integrand, one process per asset.
    pub fn strategy(&self, horizon: usize, n_atoms: usize) -> Vec<Process> {
        let on_cell: Vec<bool> = (0..n_atoms).map(|a| self.atoms.contains(&a)).collect();
        self.position
            .iter()
            .map(|h| {
                Process::from_fn(horizon, n_atoms, Tag::Predictable, |s, a| {
                    if s == self.t + 1 && on_cell[a] {
                        h.clone()
                    } else {
                        Q::zero()
                    }
                })
            })
            .collect()
    }

    /// Wealth `X^x = x + 𝟙{cell, s > t} χ` from initial capital `x`.
    pub fn wealth(&self, x: &Q, horizon: usize) -> Process {
        Process::from_fn(horizon, self.claim.len(), Tag::Adapted, |s, a| {
            if s > self.t {
                x + &self.claim[a]
            } else {
                x.clone()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Na1Verdict {
    pub holds: bool,
    pub deflator: Option<Process>,
    /// First violating node in time-major, cell-minor order.
    pub certificate: Option<Certificate>,
    /// Every violating node `(t, cell)`.
    pub violations: Vec<(usize, usize)>,
}

impl Na1Verdict {
    /// NA₁ on `[0, horizon]`: no violating node before `horizon`.
    pub fn holds_up_to(&self, horizon: usize) -> bool {
        self.violations.iter().all(|&(t, _)| t >= horizon)
    }
}

struct Node {
    t: usize,
    cell: usize,
    children: Vec<Vec<usize>>,
    market: OneStepMarket,
}

fn nodes(probs: &[Q], filtration: &Filtration, assets: &[Process]) -> Vec<Node> {
    let mut out = Vec::new();
    for t in 0..filtration.horizon() {
        let part = filtration.at(t);
        let next = filtration.at(t + 1);
        for ci in 0..part.len() {
            let mass = cell_mass(probs, part.cell(ci));
            let children: Vec<Vec<usize>> = part
                .children(ci, next)
                .into_iter()
                .map(|c| next.cell(c).to_vec())
                .collect();
            let q = children.iter().map(|c| cell_mass(probs, c) / &mass).collect();
            let increments = children
                .iter()
                .map(|c| assets.iter().map(|s| s.delta(t + 1, c[0])).collect())
                .collect();
            out.push(Node {
                t,
                cell: ci,
                children,
                market: OneStepMarket { q, increments },
            });
        }
    }
    out
}

/// Decides NA₁ for `assets` in `filtration`; with `stop` the assets are
/// frozen from that time on.
pub fn check_na1(probs: &[Q], filtration: &Filtration, assets: &[Process], stop: Option<&StoppingMap>) -> Result<Na1Verdict> {
    let assets: Vec<Process> = match stop {
        Some(s) => assets.iter().map(|x| x.stopped(s)).collect(),
        None => assets.to_vec(),
    };
    for s in &assets {
        s.check_tag(filtration, Tag::Adapted)?;
    }
    let n = filtration.n_atoms();
    let horizon = filtration.horizon();
    let nodes = nodes(probs, filtration, &assets);
    let outcomes: Vec<OneStep> = nodes.par_iter().map(|nd| check_one_step(&nd.market)).collect();

    let mut violations = Vec::new();
    let mut certificate = None;
    for (nd, out) in nodes.iter().zip(&outcomes) {
        if let OneStep::Arbitrage(h) = out {
            violations.push((nd.t, nd.cell));
            if certificate.is_none() {
                let gains = nd.market.gains(h);
                let mut claim = vec![Q::zero(); n];
                for (child, g) in nd.children.iter().zip(&gains) {
                    for &a in child {
                        claim[a] = g.clone();
                    }
                }
                certificate = Some(Certificate {
                    t: nd.t,
                    cell: nd.cell,
                    atoms: filtration.at(nd.t).cell(nd.cell).to_vec(),
                    position: h.clone(),
                    children: nd.children.clone(),
                    wealth_increments: gains,
                    claim,
                });
            }
        }
    }
    if certificate.is_some() {
        return Ok(Na1Verdict {
            holds: false,
            deflator: None,
            certificate,
            violations,
        });
    }

    let mut rows = vec![vec![Q::one(); n]];
    for t in 0..horizon {
        let mut next = rows[t].clone();
        for (nd, out) in nodes.iter().zip(&outcomes).filter(|(nd, _)| nd.t == t) {
            let OneStep::Weights(y) = out else { unreachable!() };
            for (child, w) in nd.children.iter().zip(y) {
                for &a in child {
                    next[a] *= w;
                }
            }
        }
        rows.push(next);
    }
    Ok(Na1Verdict {
        holds: true,
        deflator: Some(Process::new(rows, Tag::Adapted)?),
        certificate: None,
        violations,
    })
}

/// NA₁ of an enlarged market, with its assets stopped at `τ` when present.
pub fn check_na1_market(space: &FinSpace, gm: &GMarket) -> Result<Na1Verdict> {
    check_na1(space.probs(), &gm.filtration, &gm.assets, gm.tau.as_ref())
}

/// True iff `y` is a strictly positive martingale starting at 1 that turns
/// every asset into a martingale.
pub fn verify_deflator(probs: &[Q], filtration: &Filtration, y: &Process, assets: &[Process]) -> bool {
    check_deflator(probs, filtration, y, assets).is_ok()
}

/// Verdict for `S̃^{ζ_n}` at one localizing level.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedVerdict {
    pub n: BigInt,
    pub verdict: Na1Verdict,
}

/// Checks NA₁ in `F` of `S̃ = S^{η−}` stopped at each `ζ_n`.
pub fn check_na1_localized(
    space: &FinSpace,
    assets: &[Process],
    eta: &StoppingMap,
    levels: &[ZetaLevel],
) -> Result<Vec<LocalizedVerdict>> {
    let truncated: Vec<Process> = assets.iter().map(|s| truncate_before_eta(s, eta)).collect();
    levels
        .iter()
        .map(|level| {
            Ok(LocalizedVerdict {
                n: level.n.clone(),
                verdict: check_na1(space.probs(), space.filtration(), &truncated, Some(&level.time))?,
            })
        })
        .collect()
}
