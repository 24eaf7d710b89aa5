//! Initial enlargement `G_t = F_t ∨ σ(J)` with a signal `J` taking finitely
//! many labels.
//!
//! With a finite label set every conditional law of `J` is absolutely
//! continuous with respect to its law `γ`, and the conditional densities
//! `p^x_t = P[J = x | F_t] / γ(x)` form a finite table of martingales.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::calculus::{compensator_of, stoch_exp_inverse_killed};
use crate::error::{Error, Result};
use crate::gmarket::GMarket;
use crate::martingale::classify;
use crate::progressive::{check_deflator, martingale_generators, EquivalenceReport};
use crate::process::{Process, StoppingMap, Tag};
use crate::rational::{format_q, Q};
use crate::space::{FinSpace, Filtration, Partition};

/// The signal `J` and its law `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    /// Label names, sorted; label index `x` refers to `names[x]`.
    names: Vec<String>,
    of_atom: Vec<usize>,
    gamma: Vec<Q>,
}

impl Signal {
    /// Signal with `γ` taken as the law of `J` under `P`.
    pub fn from_labels<S: AsRef<str>>(space: &FinSpace, labels: &[S]) -> Result<Self> {
        if labels.len() != space.n_atoms() {
            return Err(Error::Dimension(format!(
                "{} labels for {} atoms",
                labels.len(),
                space.n_atoms()
            )));
        }
        let mut names: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let of_atom: Vec<usize> = labels
            .iter()
            .map(|l| names.binary_search_by(|n| n.as_str().cmp(l.as_ref())).expect("present"))
            .collect();
        let mut gamma = vec![Q::zero(); names.len()];
        for (a, &x) in of_atom.iter().enumerate() {
            gamma[x] += space.prob(a);
        }
        Ok(Self { names, of_atom, gamma })
    }

    /// Like [`Signal::from_labels`] but validates a user-supplied `γ`, which
    /// must equal the law of `J`.
    pub fn with_gamma<S: AsRef<str>>(space: &FinSpace, labels: &[S], gamma: &BTreeMap<String, Q>) -> Result<Self> {
        let signal = Self::from_labels(space, labels)?;
        for (name, given) in gamma {
            let actual = signal.label(name).map(|x| signal.gamma[x].clone()).unwrap_or_else(Q::zero);
            if *given != actual {
                return Err(Error::InconsistentSignal {
                    label: name.clone(),
                    given: format_q(given),
                    actual: format_q(&actual),
                });
            }
        }
        for (x, name) in signal.names.iter().enumerate() {
            if !gamma.contains_key(name) {
                return Err(Error::InconsistentSignal {
                    label: name.clone(),
                    given: "0".into(),
                    actual: format_q(&signal.gamma[x]),
                });
            }
        }
        Ok(signal)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn n_labels(&self) -> usize {
        self.names.len()
    }

    /// Label index of `J(ω)`.
    pub fn of(&self, atom: usize) -> usize {
        self.of_atom[atom]
    }

    pub fn labels(&self) -> &[usize] {
        &self.of_atom
    }

    pub fn gamma(&self) -> &[Q] {
        &self.gamma
    }
}

fn check_signal(space: &FinSpace, signal: &Signal) -> Result<()> {
    if signal.of_atom.len() != space.n_atoms() {
        return Err(Error::Dimension("signal does not match the space".into()));
    }
    if !space.ambient().is_measurable(signal.labels()) {
        return Err(Error::NotAmbientMeasurable { what: "signal".into() });
    }
    for (x, g) in signal.gamma.iter().enumerate() {
        let actual = space.prob_where(|a| signal.of(a) == x);
        if *g != actual || !g.is_positive() {
            return Err(Error::InconsistentSignal {
                label: signal.names[x].clone(),
                given: format_q(g),
                actual: format_q(&actual),
            });
        }
    }
    Ok(())
}

/// The conditional density table `p^x_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySystem {
    pub gamma: Vec<Q>,
    /// One `F`-martingale per label.
    pub p: Vec<Process>,
}

impl DensitySystem {
    /// `p^{J(ω)}_t(ω)`.
    pub fn p_j(&self, signal: &Signal) -> Process {
        let p0 = &self.p[0];
        Process::from_fn(p0.horizon(), p0.n_atoms(), Tag::Adapted, |t, a| {
            self.p[signal.of(a)].get(t, a).clone()
        })
    }
}

pub fn density_system(space: &FinSpace, signal: &Signal) -> Result<DensitySystem> {
    check_signal(space, signal)?;
    let mut p = Vec::with_capacity(signal.n_labels());
    for (x, g) in signal.gamma.iter().enumerate() {
        let hit: Vec<Q> = (0..space.n_atoms())
            .map(|a| if signal.of(a) == x { Q::one() } else { Q::zero() })
            .collect();
        let mut rows = Vec::with_capacity(space.horizon() + 1);
        for t in 0..=space.horizon() {
            rows.push(space.cond_exp(&hit, t)?.into_iter().map(|v| v / g).collect());
        }
        p.push(Process::new(rows, Tag::Adapted)?);
    }
    Ok(DensitySystem {
        gamma: signal.gamma.clone(),
        p,
    })
}

/// First zero `ζ` of a nonnegative martingale `m`, the event
/// `Λ = {ζ < ∞, m_{ζ−} > 0}` (with `m_{0−} = m_0`) and `η = ζ_Λ`.
pub fn jump_to_zero_of(m: &Process) -> (StoppingMap, Vec<bool>, StoppingMap) {
    let n = m.n_atoms();
    let zeta = StoppingMap::new(
        (0..n)
            .map(|a| {
                (0..=m.horizon())
                    .find(|&t| m.get(t, a).is_zero())
                    .unwrap_or(StoppingMap::INFINITY)
            })
            .collect(),
    );
    let lambda: Vec<bool> = (0..n)
        .map(|a| zeta.is_finite(a) && m.left(zeta.get(a), a).is_positive())
        .collect();
    let eta = zeta.restricted(|a| lambda[a]);
    (zeta, lambda, eta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelEta {
    pub zeta: StoppingMap,
    pub eta: StoppingMap,
    pub d: Process,
    /// `S^x = ℰ(−D^x)^{-1} 𝟙⟦0,η^x⟦`.
    pub s: Process,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaFamily {
    pub per_label: Vec<LabelEta>,
    /// `S^{J(ω)}(ω)`, adapted to `G`.
    pub s_j: Process,
}

impl EtaFamily {
    /// `D^{J(ω)}(ω)`.
    pub fn d_j(&self, signal: &Signal) -> Process {
        let d0 = &self.per_label[0].d;
        Process::from_fn(d0.horizon(), d0.n_atoms(), Tag::Adapted, |t, a| {
            self.per_label[signal.of(a)].d.get(t, a).clone()
        })
    }
}

pub fn eta_family(space: &FinSpace, signal: &Signal, ds: &DensitySystem) -> Result<EtaFamily> {
    let mut per_label = Vec::with_capacity(ds.p.len());
    for p in &ds.p {
        let (zeta, _, eta) = jump_to_zero_of(p);
        let d = compensator_of(space, &eta)?;
        let s = stoch_exp_inverse_killed(&d, &eta)?;
        per_label.push(LabelEta { zeta, eta, d, s });
    }
    let s_j = Process::from_fn(space.horizon(), space.n_atoms(), Tag::Adapted, |t, a| {
        per_label[signal.of(a)].s.get(t, a).clone()
    });
    Ok(EtaFamily { per_label, s_j })
}

/// `G_t = F_t ∨ σ(J)`.
pub fn initial_filtration(space: &FinSpace, signal: &Signal) -> Result<Filtration> {
    check_signal(space, signal)?;
    let j = Partition::from_keys(signal.labels());
    Filtration::new((0..=space.horizon()).map(|t| space.at(t).meet(&j)).collect())
}

pub fn enlarge_initial(space: &FinSpace, signal: &Signal, assets: &[Process]) -> Result<GMarket> {
    for s in assets {
        s.check_tag(space.filtration(), Tag::Adapted)?;
    }
    Ok(GMarket {
        filtration: initial_filtration(space, signal)?,
        assets: assets.to_vec(),
        tau: None,
    })
}

/// `X^J / p^J` for a label-indexed family.
pub fn over_p_j(family: &[Process], signal: &Signal, ds: &DensitySystem) -> Result<Process> {
    if family.len() != signal.n_labels() {
        return Err(Error::Dimension("one process per label expected".into()));
    }
    let h = family[0].horizon();
    let n = family[0].n_atoms();
    let mut rows = Vec::with_capacity(h + 1);
    for t in 0..=h {
        let mut row = Vec::with_capacity(n);
        for a in 0..n {
            let x = signal.of(a);
            let p = ds.p[x].get(t, a);
            if !p.is_positive() {
                return Err(Error::Invariant(format!("p^J vanishes at (t = {t}, atom {a})")));
            }
            row.push(family[x].get(t, a) / p);
        }
        rows.push(row);
    }
    Process::new(rows, Tag::Adapted)
}

/// Lifts an `F`-deflator `Y` to the `G`-deflator `M^J / p^J`, with
/// `M^x = Y ℰ(−D^x)^{-1} 𝟙⟦0,η^x⟦`, normalized by `p^J_0` so that it starts
/// at 1 when `F_0` is informative about `J`.
pub fn lift_deflator_initial(
    space: &FinSpace,
    y: &Process,
    assets: &[Process],
    signal: &Signal,
    ds: &DensitySystem,
    fam: &EtaFamily,
) -> Result<Process> {
    check_deflator(space.probs(), space.filtration(), y, assets)?;
    for (x, le) in fam.per_label.iter().enumerate() {
        if !ds.gamma[x].is_positive() {
            continue;
        }
        for a in 0..space.n_atoms() {
            let t = le.eta.get(a);
            if t > space.horizon() {
                continue;
            }
            for (i, s) in assets.iter().enumerate() {
                if !s.delta(t, a).is_zero() {
                    return Err(Error::JumpAtEta {
                        label: Some(signal.names()[x].clone()),
                        asset: i,
                        t,
                        atom: a,
                    });
                }
            }
            if !y.delta(t, a).is_zero() {
                return Err(Error::DeflatorJumpAtEta {
                    label: Some(signal.names()[x].clone()),
                    t,
                    atom: a,
                });
            }
        }
    }
    let m: Vec<Process> = fam.per_label.iter().map(|le| y.mul(&le.s)).collect::<Result<_>>()?;
    let w = over_p_j(&m, signal, ds)?;
    let p_j = ds.p_j(signal);
    Ok(Process::from_fn(w.horizon(), w.n_atoms(), Tag::Adapted, |t, a| {
        w.get(t, a) * p_j.get(0, a)
    }))
}

/// Both sides of `E[f^J_t] = E[Σ_x f^x_t p^x_t γ(x)]`, where `f[x][ω]` is an
/// `F_t`-measurable value per label.
pub fn exp_init_check(space: &FinSpace, signal: &Signal, ds: &DensitySystem, f: &[Vec<Q>], t: usize) -> Result<(Q, Q)> {
    space.filtration().check_time(t)?;
    if f.len() != signal.n_labels() || f.iter().any(|row| row.len() != space.n_atoms()) {
        return Err(Error::Dimension("one row of atom values per label expected".into()));
    }
    for row in f {
        if let Some(cell) = space.at(t).first_non_constant(row) {
            return Err(Error::NotMeasurable {
                what: "test function".into(),
                t,
                cell,
            });
        }
    }
    let lhs = (0..space.n_atoms())
        .map(|a| space.prob(a) * &f[signal.of(a)][a])
        .sum();
    let mut rhs = Q::zero();
    for (x, row) in f.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            rhs += space.prob(a) * v * ds.p[x].get(t, a) * &ds.gamma[x];
        }
    }
    Ok((lhs, rhs))
}

/// Single-asset arbitrage built from a label set `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaB {
    /// `P[J ∈ B | F_t] / γ(B)`.
    pub martingale: Process,
    pub eta: StoppingMap,
    pub d: Process,
    /// `ℰ(−D^B)^{-1} 𝟙⟦0,η^B⟦`, an `F`-martingale.
    pub asset: Process,
    /// Gains of the buy-and-hold position `𝟙{J ∈ B}` in `asset`.
    pub wealth: Process,
}

pub fn eta_b(space: &FinSpace, signal: &Signal, ds: &DensitySystem, subset: &[usize]) -> Result<EtaB> {
    let mut in_b = vec![false; signal.n_labels()];
    for &x in subset {
        if x >= signal.n_labels() {
            return Err(Error::Dimension(format!("label index {x} out of range")));
        }
        in_b[x] = true;
    }
    let gamma_b: Q = (0..signal.n_labels()).filter(|&x| in_b[x]).map(|x| &ds.gamma[x]).sum();
    if !gamma_b.is_positive() {
        return Err(Error::NullLabelSet);
    }
    let martingale = Process::from_fn(space.horizon(), space.n_atoms(), Tag::Adapted, |t, a| {
        let mut v = Q::zero();
        for x in (0..signal.n_labels()).filter(|&x| in_b[x]) {
            v += &ds.gamma[x] * ds.p[x].get(t, a);
        }
        v / &gamma_b
    });
    let (_, _, eta) = jump_to_zero_of(&martingale);
    let d = compensator_of(space, &eta)?;
    let asset = stoch_exp_inverse_killed(&d, &eta)?;
    let wealth = Process::from_fn(space.horizon(), space.n_atoms(), Tag::Adapted, |t, a| {
        if in_b[signal.of(a)] {
            asset.get(t, a) - asset.get(0, a)
        } else {
            Q::zero()
        }
    });
    Ok(EtaB {
        martingale,
        eta,
        d,
        asset,
        wealth,
    })
}

/// The three equivalent statements: `Σ_x γ(x) P[η^x < ∞] = 0`, `1/p^J` is a
/// `G`-martingale, and `X^J / p^J` is a `G`-martingale for every family of
/// nonnegative `F`-martingales (checked on the generators of that cone).
pub fn equivalence_report_initial(space: &FinSpace, signal: &Signal) -> Result<EquivalenceReport> {
    let ds = density_system(space, signal)?;
    let g = initial_filtration(space, signal)?;
    let mut weighted = Q::zero();
    for (x, p) in ds.p.iter().enumerate() {
        let (_, _, eta) = jump_to_zero_of(p);
        weighted += &ds.gamma[x] * space.prob_where(|a| eta.is_finite(a));
    }
    let ones: Vec<Process> = (0..signal.n_labels())
        .map(|_| Process::constant(space.horizon(), space.n_atoms(), Q::one()))
        .collect();
    let recip = over_p_j(&ones, signal, &ds)?;
    let reciprocal_is_g_martingale = classify(space.probs(), &g, &recip)?.is_martingale();

    let zero = Process::constant(space.horizon(), space.n_atoms(), Q::zero());
    let generators = martingale_generators(space);
    let mut all_lifts = true;
    'outer: for x in 0..signal.n_labels() {
        for gen in &generators {
            let mut family = vec![zero.clone(); signal.n_labels()];
            family[x] = gen.clone();
            let lifted = over_p_j(&family, signal, &ds)?;
            if !classify(space.probs(), &g, &lifted)?.is_martingale() {
                all_lifts = false;
                break 'outer;
            }
        }
    }
    Ok(EquivalenceReport {
        eta_finite_prob: weighted,
        reciprocal_is_g_martingale,
        all_lifts_are_g_martingales: all_lifts,
    })
}

/// Every `η^x` recomputed under `dQ = density dP`.
pub fn eta_family_under_measure(space: &FinSpace, signal: &Signal, density: &[Q]) -> Result<Vec<StoppingMap>> {
    let q_space = space.change_measure(density)?;
    let names: Vec<&str> = (0..space.n_atoms()).map(|a| signal.names()[signal.of(a)].as_str()).collect();
    let q_signal = Signal::from_labels(&q_space, &names)?;
    let ds = density_system(&q_space, &q_signal)?;
    Ok(ds.p.iter().map(|p| jump_to_zero_of(p).2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{w2_signal, w2_space};
    use crate::rational::{q, qi};

    const INF: usize = StoppingMap::INFINITY;

    #[test]
    fn constant_signal() {
        let s = w2_space();
        let sig = Signal::from_labels(&s, &["c", "c"]).unwrap();
        let ds = density_system(&s, &sig).unwrap();
        assert_eq!(ds.p.len(), 1);
        assert!(ds.p[0].rows().iter().flatten().all(One::is_one));
        let fam = eta_family(&s, &sig, &ds).unwrap();
        assert_eq!(fam.per_label[0].eta, StoppingMap::never(2));
        assert!(fam.s_j.rows().iter().flatten().all(One::is_one));
        let gm = enlarge_initial(&s, &sig, &[]).unwrap();
        assert_eq!(&gm.filtration, s.filtration());
        let r = equivalence_report_initial(&s, &sig).unwrap();
        assert_eq!((r.eta_finite_prob.clone(), r.reciprocal_is_g_martingale, r.all_lifts_are_g_martingales), (qi(0), true, true));
    }

    #[test]
    fn w2_density_and_eta() {
        let s = w2_space();
        let sig = w2_signal();
        assert_eq!(sig.gamma(), &[q(1, 2), q(1, 2)]);
        let ds = density_system(&s, &sig).unwrap();
        assert_eq!(ds.p[0].path(0), vec![qi(1), qi(2)]);
        assert_eq!(ds.p[0].path(1), vec![qi(1), qi(0)]);
        assert_eq!(ds.p[1].path(0), vec![qi(1), qi(0)]);
        assert_eq!(ds.p[1].path(1), vec![qi(1), qi(2)]);

        let fam = eta_family(&s, &sig, &ds).unwrap();
        assert_eq!(fam.per_label[0].eta.values(), &[INF, 1]);
        assert_eq!(fam.per_label[1].eta.values(), &[1, INF]);
        assert_eq!(fam.per_label[0].d.delta(1, 0), q(1, 2));
        assert_eq!(fam.per_label[1].d.delta(1, 1), q(1, 2));
        assert_eq!(fam.per_label[0].s.row(1), &[qi(2), qi(0)]);
        assert_eq!(fam.per_label[1].s.row(1), &[qi(0), qi(2)]);
        assert_eq!(fam.s_j.path(0), vec![qi(1), qi(2)]);
        assert_eq!(fam.s_j.path(1), vec![qi(1), qi(2)]);
    }

    #[test]
    fn w2_initial_filtration() {
        let s = w2_space();
        let gm = enlarge_initial(&s, &w2_signal(), &[]).unwrap();
        assert_eq!(gm.filtration.at(0), &Partition::discrete(2));
    }

    #[test]
    fn f0_measurable_signal_adds_nothing() {
        let f = Filtration::new(vec![Partition::from_keys(&[0, 0, 1]), Partition::discrete(3)]).unwrap();
        let s = FinSpace::new(vec![q(1, 3), q(1, 3), q(1, 3)], f).unwrap();
        let sig = Signal::from_labels(&s, &["u", "u", "v"]).unwrap();
        assert_eq!(&initial_filtration(&s, &sig).unwrap(), s.filtration());
    }

    #[test]
    fn w2_lift() {
        let s = w2_space();
        let sig = w2_signal();
        let ds = density_system(&s, &sig).unwrap();
        let fam = eta_family(&s, &sig, &ds).unwrap();
        let one = Process::constant(1, 2, qi(1));
        let w = lift_deflator_initial(&s, &one, &[one.clone()], &sig, &ds, &fam).unwrap();
        assert!(w.rows().iter().flatten().all(One::is_one));
        let g = initial_filtration(&s, &sig).unwrap();
        assert!(classify(s.probs(), &g, &w).unwrap().is_martingale());

        let s_a = fam.per_label[0].s.clone();
        let err = lift_deflator_initial(&s, &one, &[s_a], &sig, &ds, &fam).unwrap_err();
        assert_eq!(
            err,
            Error::JumpAtEta {
                label: Some("a".into()),
                asset: 0,
                t: 1,
                atom: 1
            }
        );
    }

    #[test]
    fn constant_signal_lift_is_identity() {
        let s = w2_space();
        let sig = Signal::from_labels(&s, &["c", "c"]).unwrap();
        let ds = density_system(&s, &sig).unwrap();
        let fam = eta_family(&s, &sig, &ds).unwrap();
        let y = Process::new(vec![vec![qi(1), qi(1)], vec![q(1, 2), q(3, 2)]], Tag::Adapted).unwrap();
        assert_eq!(lift_deflator_initial(&s, &y, &[], &sig, &ds, &fam).unwrap(), y);
    }

    #[test]
    fn exp_init_examples() {
        let s = w2_space();
        let sig = w2_signal();
        let ds = density_system(&s, &sig).unwrap();
        let fam = eta_family(&s, &sig, &ds).unwrap();
        let ones = vec![vec![qi(1), qi(1)]; 2];
        assert_eq!(exp_init_check(&s, &sig, &ds, &ones, 0).unwrap(), (qi(1), qi(1)));
        let f: Vec<Vec<Q>> = fam.per_label.iter().map(|le| le.s.row(1).to_vec()).collect();
        assert_eq!(exp_init_check(&s, &sig, &ds, &f, 1).unwrap(), (qi(2), qi(2)));
        // Not F_0-measurable.
        assert!(exp_init_check(&s, &sig, &ds, &f, 0).is_err());
    }

    #[test]
    fn eta_b_examples() {
        let s = w2_space();
        let sig = w2_signal();
        let ds = density_system(&s, &sig).unwrap();
        let fam = eta_family(&s, &sig, &ds).unwrap();

        let all = eta_b(&s, &sig, &ds, &[0, 1]).unwrap();
        assert!(all.martingale.rows().iter().flatten().all(One::is_one));
        assert_eq!(all.eta, StoppingMap::never(2));

        let a = eta_b(&s, &sig, &ds, &[0]).unwrap();
        assert_eq!(a.eta, fam.per_label[0].eta);
        assert_eq!(a.asset, fam.per_label[0].s);
        assert!(a.wealth.is_nondecreasing());
        assert_eq!(a.wealth.path(0), vec![qi(0), qi(1)]);
        assert_eq!(a.wealth.path(1), vec![qi(0), qi(0)]);

        assert!(matches!(eta_b(&s, &sig, &ds, &[]), Err(Error::NullLabelSet)));
    }

    #[test]
    fn equivalence_w2() {
        let r = equivalence_report_initial(&w2_space(), &w2_signal()).unwrap();
        assert_eq!((r.eta_finite_prob.clone(), r.reciprocal_is_g_martingale, r.all_lifts_are_g_martingales), (q(1, 2), false, false));
    }

    #[test]
    fn measure_invariance_w2() {
        let s = w2_space();
        let sig = w2_signal();
        let base = eta_family_under_measure(&s, &sig, &[qi(1), qi(1)]).unwrap();
        let moved = eta_family_under_measure(&s, &sig, &[q(3, 2), q(1, 2)]).unwrap();
        assert_eq!(base, moved);
        assert_eq!(base[0].values(), &[INF, 1]);
    }

    #[test]
    fn inconsistent_gamma_rejected() {
        let s = w2_space();
        let mut gamma = BTreeMap::new();
        gamma.insert("a".to_string(), q(1, 3));
        gamma.insert("b".to_string(), q(2, 3));
        assert!(matches!(
            Signal::with_gamma(&s, &["a", "b"], &gamma),
            Err(Error::InconsistentSignal { .. })
        ));
        gamma.insert("a".to_string(), q(1, 2));
        gamma.insert("b".to_string(), q(1, 2));
        assert!(Signal::with_gamma(&s, &["a", "b"], &gamma).is_ok());
        // A label with positive mass but γ = 0.
        gamma.remove("b");
        assert!(Signal::with_gamma(&s, &["a", "b"], &gamma).is_err());
    }
}
