//! Randomized invariant suites shared by `selftest` and the acceptance run.
//!
//! Every case draws from its own ChaCha8 stream (`seed`, case index), so a
//! suite's outcome does not depend on thread scheduling.

use std::collections::BTreeMap;

use enlarge_core::identities::{initial_identities, progressive_identities_with, Identity};
use enlarge_core::initial::{density_system, enlarge_initial, eta_family, eta_family_under_measure, lift_deflator_initial};
use enlarge_core::na1::{brute, check_na1, verify_deflator};
use enlarge_core::process::{Process, StoppingMap};
use enlarge_core::progressive::{
    azema, enlarge_progressive, eta_analysis, eta_under_measure, lift_deflator, optional_decomposition, AzemaBundle,
    OptionalPair,
};
use enlarge_core::random::{
    random_adapted, random_density, random_martingale, random_martingale_avoiding, random_space, with_random_signal,
    with_random_tau,
};
use enlarge_core::space::FinSpace;
use enlarge_core::Error;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Decompose = fn(&AzemaBundle) -> OptionalPair;

/// Pass/fail counts for one named check.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
    /// Case index and detail of the first failure.
    pub first_failure: Option<(usize, String)>,
}

impl CheckTally {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally(pub BTreeMap<String, CheckTally>);

impl Tally {
    pub fn record(&mut self, case: usize, name: &str, pass: bool, detail: impl FnOnce() -> String) {
        let e = self.0.entry(name.to_string()).or_default();
        if pass {
            e.passed += 1;
        } else {
            e.failed += 1;
            if e.first_failure.is_none() {
                e.first_failure = Some((case, detail()));
            }
        }
    }

    fn identities(&mut self, case: usize, prefix: &str, rows: &[Identity]) {
        for r in rows {
            self.record(case, &format!("{prefix}.{}", r.name), r.pass(), || {
                format!("lhs {} rhs {}", r.lhs.render(), r.rhs.render())
            });
        }
    }

    /// Merges in case order so the first failure is the lowest case index.
    pub fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.0 {
            let e = self.0.entry(k).or_default();
            e.passed += v.passed;
            e.failed += v.failed;
            match (&e.first_failure, v.first_failure) {
                (Some((i, _)), Some((j, d))) if j < *i => e.first_failure = Some((j, d)),
                (None, f) => e.first_failure = f,
                _ => {}
            }
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&CheckTally> {
        self.0.get(name)
    }

    pub fn ok(&self) -> bool {
        !self.0.is_empty() && self.0.values().all(CheckTally::ok)
    }

    pub fn failures(&self) -> usize {
        self.0.values().map(|t| t.failed).sum()
    }
}

/// Sizes of a random corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corpus {
    pub seed: u64,
    pub cases: usize,
    pub max_atoms: usize,
    pub max_horizon: usize,
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

fn run_cases(c: Corpus, f: impl Fn(usize, &mut ChaCha8Rng, &mut Tally) + Sync) -> Tally {
    (0..c.cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(c.seed, i);
            let mut t = Tally::default();
            f(i, &mut rng, &mut t);
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge)
}

fn error_row(t: &mut Tally, case: usize, name: &str, e: &Error) {
    t.record(case, name, false, || e.to_string());
}

/// Progressive identity ledger on random `(space, τ)`; keys `progressive.<row>`.
pub fn progressive_suite(c: Corpus, decompose: Decompose) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let (space, tau) = with_random_tau(rng, space);
        match progressive_identities_with(&space, &tau, decompose) {
            Ok(rows) => t.identities(i, "progressive", &rows),
            Err(e) => error_row(t, i, "progressive.computes", &e),
        }
    })
}

/// Initial identity ledger on random `(space, J)`; keys `initial.<row>`.
pub fn initial_suite(c: Corpus, max_labels: usize) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let (space, signal) = with_random_signal(rng, space, max_labels);
        match initial_identities(&space, &signal) {
            Ok(rows) => t.identities(i, "initial", &rows),
            Err(e) => error_row(t, i, "initial.computes", &e),
        }
    })
}

fn jumps_at(x: &Process, times: &[&StoppingMap]) -> bool {
    times.iter().any(|s| {
        (0..x.n_atoms()).any(|a| {
            let t = s.get(a);
            t <= x.horizon() && !x.delta(t, a).is_zero()
        })
    })
}

/// A deflator `Y` (normalized to start at 1) that never jumps at `avoid`, and
/// `S = M / Y` for a martingale `M` that avoids those times only on half of
/// the cases, so both the lift and its guard get exercised.
fn deflated_asset(rng: &mut ChaCha8Rng, space: &FinSpace, avoid: &[StoppingMap]) -> (Process, Process) {
    let y = random_martingale_avoiding(rng, space, avoid);
    let y = Process::from_fn(y.horizon(), y.n_atoms(), y.tag(), |t, a| y.get(t, a) / y.get(0, a));
    let m = if rng.random_bool(0.5) {
        random_martingale_avoiding(rng, space, avoid)
    } else {
        random_martingale(rng, space)
    };
    let s = m.zip_with(&y, |a, b| a / b).expect("same shape");
    (y, s)
}

/// Progressive deflator lift: keys `lift.progressive.{verified,guard}`.
pub fn progressive_lift_suite(c: Corpus) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let (space, tau) = with_random_tau(rng, space);
        let run = |rng: &mut ChaCha8Rng, t: &mut Tally| -> enlarge_core::Result<()> {
            let b = azema(&space, &tau)?;
            let pair = optional_decomposition(&b);
            let e = eta_analysis(&space, &b)?;
            let (y, s) = deflated_asset(rng, &space, std::slice::from_ref(&e.eta));
            let assets = std::slice::from_ref(&s);
            let gm = enlarge_progressive(&space, &tau, assets)?;
            let jumps = jumps_at(&s, &[&e.eta]);
            match lift_deflator(&space, &y, assets, &gm, &pair, &e) {
                Ok(w) => {
                    t.record(i, "lift.progressive.guard", !jumps, || "lift accepted an asset that jumps at eta".into());
                    let ok = verify_deflator(space.probs(), &gm.filtration, &w, &gm.assets);
                    t.record(i, "lift.progressive.verified", ok, || "lifted deflator fails in G".into());
                }
                Err(err) => {
                    let guard = matches!(err, Error::JumpAtEta { .. });
                    t.record(i, "lift.progressive.guard", jumps && guard, || format!("unexpected refusal: {err}"));
                }
            }
            Ok(())
        };
        if let Err(e) = run(rng, t) {
            error_row(t, i, "lift.progressive.computes", &e);
        }
    })
}

/// Initial deflator lift: keys `lift.initial.{verified,guard}`.
pub fn initial_lift_suite(c: Corpus, max_labels: usize) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let (space, signal) = with_random_signal(rng, space, max_labels);
        let run = |rng: &mut ChaCha8Rng, t: &mut Tally| -> enlarge_core::Result<()> {
            let ds = density_system(&space, &signal)?;
            let fam = eta_family(&space, &signal, &ds)?;
            let weighted: Vec<StoppingMap> = fam
                .per_label
                .iter()
                .zip(&ds.gamma)
                .filter(|(_, g)| g.is_positive())
                .map(|(le, _)| le.eta.clone())
                .collect();
            let (y, s) = deflated_asset(rng, &space, &weighted);
            let assets = std::slice::from_ref(&s);
            let gm = enlarge_initial(&space, &signal, assets)?;
            let jumps = jumps_at(&s, &weighted.iter().collect::<Vec<_>>());
            match lift_deflator_initial(&space, &y, assets, &signal, &ds, &fam) {
                Ok(w) => {
                    t.record(i, "lift.initial.guard", !jumps, || "lift accepted an asset that jumps at eta".into());
                    let ok = verify_deflator(space.probs(), &gm.filtration, &w, &gm.assets);
                    t.record(i, "lift.initial.verified", ok, || "lifted deflator fails in G".into());
                }
                Err(err) => {
                    let guard = matches!(err, Error::JumpAtEta { .. });
                    t.record(i, "lift.initial.guard", jumps && guard, || format!("unexpected refusal: {err}"));
                }
            }
            Ok(())
        };
        if let Err(e) = run(rng, t) {
            error_row(t, i, "lift.initial.computes", &e);
        }
    })
}

/// `η` and every `η^x` under `densities` random equivalent measures per
/// space: keys `invariance.{eta,eta_per_label}`.
pub fn invariance_suite(c: Corpus, densities: usize, max_labels: usize) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let (space, tau) = with_random_tau(rng, space);
        let (space, signal) = with_random_signal(rng, space, max_labels);
        let run = |rng: &mut ChaCha8Rng, t: &mut Tally| -> enlarge_core::Result<()> {
            let eta = eta_analysis(&space, &azema(&space, &tau)?)?.eta;
            let ds = density_system(&space, &signal)?;
            let etas: Vec<StoppingMap> = eta_family(&space, &signal, &ds)?.per_label.into_iter().map(|l| l.eta).collect();
            let mut same_eta = true;
            let mut same_family = true;
            for _ in 0..densities {
                let d = random_density(rng, &space);
                same_eta &= eta_under_measure(&space, &tau, &d)? == eta;
                same_family &= eta_family_under_measure(&space, &signal, &d)? == etas;
            }
            t.record(i, "invariance.eta", same_eta, || "eta moved under a change of measure".into());
            t.record(i, "invariance.eta_per_label", same_family, || "some eta^x moved under a change of measure".into());
            Ok(())
        };
        if let Err(e) = run(rng, t) {
            error_row(t, i, "invariance.computes", &e);
        }
    })
}

/// NA₁ kernel against the exhaustive oracle on small markets; keys
/// `na1.{agrees_with_oracle,deflator_verified,certificate_sound}`.
pub fn na1_oracle_suite(c: Corpus) -> Tally {
    run_cases(c, |i, rng, t| {
        let space = random_space(rng, c.max_atoms, c.max_horizon);
        let k = rng.random_range(1..=2);
        // Martingales keep both verdicts well represented.
        let assets: Vec<Process> = (0..k)
            .map(|_| {
                if rng.random_bool(0.5) {
                    random_martingale(rng, &space)
                } else {
                    random_adapted(rng, space.filtration(), 3)
                }
            })
            .collect();
        let stop = if rng.random_bool(0.3) {
            let (_, tau) = with_random_tau(rng, space.clone());
            tau.is_stopping_time(space.filtration()).then_some(tau)
        } else {
            None
        };
        let run = |t: &mut Tally| -> enlarge_core::Result<()> {
            let v = check_na1(space.probs(), space.filtration(), &assets, stop.as_ref())?;
            let oracle = brute::na1_holds(space.filtration(), &assets, stop.as_ref())?;
            t.record(i, "na1.agrees_with_oracle", v.holds == oracle, || {
                format!("kernel says {}, oracle says {}", v.holds, oracle)
            });
            if let Some(y) = &v.deflator {
                let stopped: Vec<Process> = match &stop {
                    Some(s) => assets.iter().map(|a| a.stopped(s)).collect(),
                    None => assets.clone(),
                };
                let ok = verify_deflator(space.probs(), space.filtration(), y, &stopped);
                t.record(i, "na1.deflator_verified", ok, || "deflator fails verification".into());
            }
            if let Some(cert) = &v.certificate {
                let sound = cert.claim.iter().all(|x| !x.is_negative()) && cert.claim.iter().any(Signed::is_positive);
                t.record(i, "na1.certificate_sound", sound, || "claim is not a nonzero nonnegative payoff".into());
            }
            Ok(())
        };
        if let Err(e) = run(t) {
            error_row(t, i, "na1.computes", &e);
        }
    })
}

/// Descriptive result name and the checks that exercise it.
pub const COVERAGE: &[(&str, &[&str])] = &[
    (
        "Azéma supermartingale and dual optional projection",
        &["progressive.z_tilde_equals_z_plus_delta_a", "progressive.mu_is_martingale"],
    ),
    (
        "optional multiplicative decomposition Z = L(1-K)",
        &[
            "progressive.z_equals_l_times_one_minus_k",
            "progressive.l_delta_k_equals_delta_a",
            "progressive.l_is_martingale",
            "progressive.no_dl_where_k_left_is_one",
            "progressive.no_dk_where_l_is_zero",
        ],
    ),
    ("expectation at tau through L dK", &["progressive.expectation_at_tau_via_l_dk"]),
    ("conditional tail of tau at stopping levels", &["progressive.conditional_tail_at_stopping_levels"]),
    (
        "zero time of L and the event Lambda",
        &[
            "progressive.l_positive_up_to_tau",
            "progressive.lambda_event_via_k_and_l",
            "progressive.l_vanishes_at_zeta_on_lambda",
        ],
    ),
    (
        "eta and its compensator D",
        &[
            "progressive.eta_at_least_one",
            "progressive.delta_d_below_one",
            "progressive.eta_indicator_minus_d_is_martingale",
            "progressive.expected_d_at_tau",
        ],
    ),
    (
        "arbitrage asset S_arb in the progressive enlargement",
        &[
            "progressive.s_arb_is_martingale",
            "progressive.s_arb_stopped_at_tau_nondecreasing",
            "progressive.s_arb_gains_at_tau_iff_eta_finite",
        ],
    ),
    ("martingale preservation under progressive enlargement", &["progressive.equivalence_triple_agrees"]),
    ("deflator lift for progressive enlargement", &["lift.progressive.verified", "lift.progressive.guard"]),
    (
        "density system of an initial signal",
        &[
            "initial.gamma_weighted_densities_sum_to_one",
            "initial.density_of_realized_label_positive",
            "initial.each_density_is_martingale",
        ],
    ),
    ("expectations of label functions in the initial enlargement", &["initial.expectation_of_label_function"]),
    (
        "per-label eta, D and arbitrage asset",
        &[
            "initial.eta_per_label_at_least_one",
            "initial.delta_d_per_label_below_one",
            "initial.s_per_label_is_martingale",
            "initial.s_j_nondecreasing",
            "initial.eta_of_realized_label_is_infinite",
            "initial.expected_terminal_d_of_realized_label",
        ],
    ),
    ("label-set arbitrage normalization", &["initial.eta_of_full_label_set_is_infinite"]),
    ("martingale preservation under initial enlargement", &["initial.equivalence_triple_agrees"]),
    ("deflator lift for initial enlargement", &["lift.initial.verified", "lift.initial.guard"]),
    ("invariance of eta under equivalent measures", &["invariance.eta", "invariance.eta_per_label"]),
    (
        "NA1 kernel against exhaustive search",
        &["na1.agrees_with_oracle", "na1.deflator_verified", "na1.certificate_sound"],
    ),
];
