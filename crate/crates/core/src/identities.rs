//! Exact identity ledgers for one progressive or initial enlargement.
//!
//! Each row compares two sides computed independently. Pointwise identities
//! over tables report how many entries agree against how many were checked.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::initial::{density_system, equivalence_report_initial, eta_b, eta_family, exp_init_check, Signal};
use crate::martingale::classify;
use crate::process::{Process, StoppingMap};
use crate::progressive::{
    azema, equivalence_report, eta_analysis, optional_decomposition, AzemaBundle, OptionalPair,
};
use crate::rational::{format_q, Q};
use crate::space::FinSpace;

#[derive(Debug, Clone, PartialEq)]
pub enum Side {
    Scalar(Q),
    Flag(bool),
    Count(usize),
}

impl Side {
    pub fn render(&self) -> String {
        match self {
            Side::Scalar(x) => format_q(x),
            Side::Flag(b) => b.to_string(),
            Side::Count(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub name: String,
    pub lhs: Side,
    pub rhs: Side,
}

impl Identity {
    pub fn pass(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn row(&self) -> IdentityRow {
        IdentityRow {
            name: self.name.clone(),
            lhs: self.lhs.render(),
            rhs: self.rhs.render(),
            pass: self.pass(),
        }
    }
}

/// Serializable form of an [`Identity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

#[derive(Default)]
struct Ledger(Vec<Identity>);

impl Ledger {
    fn scalar(&mut self, name: &str, lhs: Q, rhs: Q) {
        self.push(name, Side::Scalar(lhs), Side::Scalar(rhs));
    }

    fn flag(&mut self, name: &str, lhs: bool, rhs: bool) {
        self.push(name, Side::Flag(lhs), Side::Flag(rhs));
    }

    /// Counts the entries of `checks` that hold.
    fn count(&mut self, name: &str, checks: impl IntoIterator<Item = bool>) {
        let (mut ok, mut total) = (0, 0);
        for c in checks {
            total += 1;
            ok += usize::from(c);
        }
        self.push(name, Side::Count(ok), Side::Count(total));
    }

    fn push(&mut self, name: &str, lhs: Side, rhs: Side) {
        self.0.push(Identity {
            name: name.to_string(),
            lhs,
            rhs,
        });
    }
}

fn grid(p: &Process) -> impl Iterator<Item = (usize, usize)> {
    let n = p.n_atoms();
    (0..=p.horizon()).flat_map(move |t| (0..n).map(move |a| (t, a)))
}

/// Identity ledger for a progressive enlargement by `τ`.
pub fn progressive_identities(space: &FinSpace, tau: &StoppingMap) -> Result<Vec<Identity>> {
    progressive_identities_with(space, tau, optional_decomposition)
}

/// Same as [`progressive_identities`] with a caller-supplied decomposition,
/// so that a deliberately broken one can be shown to be caught.
pub fn progressive_identities_with(
    space: &FinSpace,
    tau: &StoppingMap,
    decompose: fn(&AzemaBundle) -> OptionalPair,
) -> Result<Vec<Identity>> {
    let b = azema(space, tau)?;
    let pair = decompose(&b);
    let e = eta_analysis(space, &b)?;
    let horizon = space.horizon();
    let n = space.n_atoms();
    let probs = space.probs();
    let f = space.filtration();
    let mut led = Ledger::default();

    led.count(
        "z_equals_l_times_one_minus_k",
        grid(&b.z).map(|(t, a)| *b.z.get(t, a) == pair.l.get(t, a) * (Q::one() - pair.k.get(t, a))),
    );
    led.count(
        "l_delta_k_equals_delta_a",
        grid(&b.z).map(|(t, a)| pair.l.get(t, a) * pair.delta_k(t, a) == b.delta_a(t, a)),
    );
    led.count(
        "z_tilde_equals_z_plus_delta_a",
        grid(&b.z).map(|(t, a)| *b.z_tilde.get(t, a) == b.z.get(t, a) + b.delta_a(t, a)),
    );
    led.flag("mu_is_martingale", classify(probs, f, &b.mu)?.is_martingale(), true);
    led.flag("l_is_martingale", classify(probs, f, &pair.l)?.is_martingale(), true);
    led.count(
        "no_dl_where_k_left_is_one",
        grid(&b.z).map(|(t, a)| !pair.k_left(t, a).is_one() || pair.l.delta(t, a).is_zero()),
    );
    led.count(
        "no_dk_where_l_is_zero",
        grid(&b.z).map(|(t, a)| !pair.l.get(t, a).is_zero() || pair.delta_k(t, a).is_zero()),
    );

    // E[V_τ] = E[Σ_t V_t L_t ΔK_t] over the basis V = 𝟙_C 𝟙_{s = t}.
    let mut main = Vec::new();
    for t in 0..=horizon {
        let part = space.at(t);
        for ci in 0..part.len() {
            let in_cell = |a: usize| part.cell_of(a) == ci;
            let lhs = space.prob_where(|a| in_cell(a) && tau.get(a) == t);
            let rhs: Q = (0..n)
                .filter(|&a| in_cell(a))
                .map(|a| space.prob(a) * pair.l.get(t, a) * pair.delta_k(t, a))
                .sum();
            main.push(lhs == rhs);
        }
    }
    led.count("expectation_at_tau_via_l_dk", main);

    // L_σ(1 − K_σ) = E[Σ_{t>σ} L_t ΔK_t | F_σ] at constant times and at every ζ_n.
    let mut sigmas: Vec<StoppingMap> = (0..=horizon).map(|t| StoppingMap::constant(n, t)).collect();
    sigmas.extend(e.zeta_levels.iter().map(|l| l.time.clone()));
    let mut cond = Vec::new();
    for sigma in &sigmas {
        let at = |a: usize| sigma.get(a).min(horizon);
        let tail: Vec<Q> = (0..n)
            .map(|a| {
                let from = if sigma.is_finite(a) { sigma.get(a) + 1 } else { horizon + 1 };
                (from..=horizon).map(|t| pair.l.get(t, a) * pair.delta_k(t, a)).sum()
            })
            .collect();
        let rhs = space.cond_exp_at_stopping(&tail, sigma)?;
        cond.extend((0..n).map(|a| pair.l.get(at(a), a) * (Q::one() - pair.k.get(at(a), a)) == rhs[a]));
    }
    led.count("conditional_tail_at_stopping_levels", cond);

    led.count(
        "l_positive_up_to_tau",
        grid(&b.z).map(|(t, a)| t > tau.get(a) || pair.l.get(t, a).is_positive()),
    );
    led.count(
        "lambda_event_via_k_and_l",
        (0..n).map(|a| {
            let z = e.zeta.get(a);
            let rhs = e.zeta.is_finite(a)
                && pair.k_left(z, a) < Q::one()
                && pair.l.left(z, a).is_positive()
                && pair.delta_k(z, a).is_zero();
            e.lambda[a] == rhs
        }),
    );
    led.count(
        "l_vanishes_at_zeta_on_lambda",
        (0..n).map(|a| !e.lambda[a] || pair.l.get(e.zeta.get(a), a).is_zero()),
    );
    led.count("eta_at_least_one", (0..n).map(|a| e.eta.get(a) >= 1));
    led.count("delta_d_below_one", grid(&e.d).map(|(t, a)| e.d.jump_from_origin(t, a) < Q::one()));
    let h = e.eta.indicator(horizon);
    let h_minus_d = h.zip_with(&e.d, |x, y| x - y)?;
    led.flag("eta_indicator_minus_d_is_martingale", classify(probs, f, &h_minus_d)?.is_martingale(), true);
    led.flag("s_arb_is_martingale", classify(probs, f, &e.s_arb)?.is_martingale(), true);
    led.flag("s_arb_stopped_at_tau_nondecreasing", e.s_arb.stopped(tau).is_nondecreasing(), true);
    led.flag(
        "s_arb_gains_at_tau_iff_eta_finite",
        space.prob_where(|a| *e.s_arb.get(tau.get(a), a) > Q::one()).is_positive(),
        space.prob_where(|a| e.eta.is_finite(a)).is_positive(),
    );
    led.scalar(
        "expected_d_at_tau",
        (0..n).map(|a| space.prob(a) * e.d.get(tau.get(a), a)).sum(),
        (0..n)
            .filter(|&a| e.eta.is_finite(a))
            .map(|a| space.prob(a) * b.z_left(e.eta.get(a), a))
            .sum(),
    );
    let eq = equivalence_report(space, tau)?;
    led.flag("equivalence_triple_agrees", eq.agrees(), true);
    Ok(led.0)
}

/// Identity ledger for the initial enlargement by `signal`.
pub fn initial_identities(space: &FinSpace, signal: &Signal) -> Result<Vec<Identity>> {
    let ds = density_system(space, signal)?;
    let fam = eta_family(space, signal, &ds)?;
    let horizon = space.horizon();
    let n = space.n_atoms();
    let probs = space.probs();
    let f = space.filtration();
    let mut led = Ledger::default();
    let p_j = ds.p_j(signal);

    led.count(
        "gamma_weighted_densities_sum_to_one",
        grid(&p_j).map(|(t, a)| {
            ds.p.iter().zip(&ds.gamma).map(|(p, g)| p.get(t, a) * g).sum::<Q>().is_one()
        }),
    );
    led.count("density_of_realized_label_positive", grid(&p_j).map(|(t, a)| p_j.get(t, a).is_positive()));
    let mut mart = Vec::new();
    for p in &ds.p {
        mart.push(classify(probs, f, p)?.is_martingale());
    }
    led.count("each_density_is_martingale", mart);

    let mut basis = Vec::new();
    for t in 0..=horizon {
        let part = space.at(t);
        for x in 0..signal.n_labels() {
            for ci in 0..part.len() {
                let mut fx = vec![vec![Q::zero(); n]; signal.n_labels()];
                for a in part.cell(ci) {
                    fx[x][*a] = Q::one();
                }
                let (lhs, rhs) = exp_init_check(space, signal, &ds, &fx, t)?;
                basis.push(lhs == rhs);
            }
        }
    }
    led.count("expectation_of_label_function", basis);

    led.count(
        "eta_per_label_at_least_one",
        fam.per_label.iter().flat_map(|le| (0..n).map(move |a| le.eta.get(a) >= 1)),
    );
    led.count(
        "delta_d_per_label_below_one",
        fam.per_label
            .iter()
            .flat_map(|le| grid(&le.d).map(move |(t, a)| le.d.jump_from_origin(t, a) < Q::one())),
    );
    let mut s_mart = Vec::new();
    for le in &fam.per_label {
        s_mart.push(classify(probs, f, &le.s)?.is_martingale());
    }
    led.count("s_per_label_is_martingale", s_mart);
    led.flag("s_j_nondecreasing", fam.s_j.is_nondecreasing(), true);
    led.count(
        "eta_of_realized_label_is_infinite",
        (0..n).map(|a| !fam.per_label[signal.of(a)].eta.is_finite(a)),
    );

    let d_j = fam.d_j(signal);
    let mut rhs = Q::zero();
    for (x, le) in fam.per_label.iter().enumerate() {
        for a in (0..n).filter(|&a| le.eta.is_finite(a)) {
            rhs += &ds.gamma[x] * space.prob(a) * ds.p[x].left(le.eta.get(a), a);
        }
    }
    led.scalar(
        "expected_terminal_d_of_realized_label",
        (0..n).map(|a| space.prob(a) * d_j.get(horizon, a)).sum(),
        rhs,
    );
    let full: Vec<usize> = (0..signal.n_labels()).collect();
    let eb = eta_b(space, signal, &ds, &full)?;
    led.flag("eta_of_full_label_set_is_infinite", eb.eta == StoppingMap::never(n), true);
    let eq = equivalence_report_initial(space, signal)?;
    led.flag("equivalence_triple_agrees", eq.agrees(), true);
    Ok(led.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{w1_space, w1_tau, w2_signal, w2_space};
    use crate::progressive::optional_decomposition_tampered;
    use crate::rational::{q, qi};

    fn find<'a>(ids: &'a [Identity], name: &str) -> &'a Identity {
        ids.iter().find(|i| i.name == name).unwrap()
    }

    #[test]
    fn w1_ledger_passes() {
        let ids = progressive_identities(&w1_space(), &w1_tau()).unwrap();
        assert!(ids.iter().all(Identity::pass), "{ids:?}");
        let d = find(&ids, "expected_d_at_tau");
        assert_eq!(d.lhs, Side::Scalar(q(1, 4)));
    }

    #[test]
    fn tampered_decomposition_is_caught() {
        let ids = progressive_identities_with(&w1_space(), &w1_tau(), optional_decomposition_tampered).unwrap();
        assert!(ids.iter().any(|i| !i.pass()));
    }

    #[test]
    fn w2_ledger_passes() {
        let ids = initial_identities(&w2_space(), &w2_signal()).unwrap();
        assert!(ids.iter().all(Identity::pass), "{ids:?}");
        let d = find(&ids, "expected_terminal_d_of_realized_label");
        assert_eq!(d.lhs, Side::Scalar(q(1, 2)));
        assert_eq!(d.rhs.render(), "1/2");
        assert_eq!(Side::Count(3).render(), "3");
        assert_eq!(Side::Scalar(qi(2)).render(), "2");
    }
}
