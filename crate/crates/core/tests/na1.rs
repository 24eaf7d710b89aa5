use enlarge_core::calculus::stoch_integral;
use enlarge_core::initial::{density_system, enlarge_initial, eta_family, lift_deflator_initial};
use enlarge_core::na1::{brute, check_na1, check_na1_localized, check_na1_market, verify_deflator};
use enlarge_core::process::Process;
use enlarge_core::progressive::{azema, enlarge_progressive, eta_analysis, lift_deflator, optional_decomposition};
use enlarge_core::random::{
    random_adapted, random_martingale_avoiding, random_space, with_random_signal, with_random_tau,
};
use enlarge_core::{Error, Q};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deflator `Y` and asset `S = M / Y` with neither jumping at the `avoid` times.
fn deflated_pair(rng: &mut ChaCha8Rng, space: &enlarge_core::space::FinSpace, avoid: &[enlarge_core::process::StoppingMap]) -> (Process, Process) {
    let y = random_martingale_avoiding(rng, space, avoid);
    let y = Process::from_fn(y.horizon(), y.n_atoms(), y.tag(), |t, a| y.get(t, a) / y.get(0, a));
    let m = random_martingale_avoiding(rng, space, avoid);
    let s = m.zip_with(&y, |a, b| a / b).unwrap();
    (y, s)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kernel_agrees_with_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 6, 3);
        let k = rng.random_range(1..=2);
        let assets: Vec<Process> = (0..k).map(|_| random_adapted(&mut rng, space.filtration(), 3)).collect();
        let v = check_na1(space.probs(), space.filtration(), &assets, None).unwrap();
        prop_assert_eq!(v.holds, brute::na1_holds(space.filtration(), &assets, None).unwrap());
        if let Some(y) = &v.deflator {
            prop_assert!(verify_deflator(space.probs(), space.filtration(), y, &assets));
        }
        if let Some(c) = &v.certificate {
            prop_assert!(c.wealth_increments.iter().all(|g| !g.is_negative()));
            prop_assert!(c.wealth_increments.iter().any(Signed::is_positive));
            let gains = stoch_integral(space.filtration(), &c.strategy(space.horizon(), space.n_atoms()), &assets).unwrap();
            let x = Q::new(1.into(), 1000.into());
            let w = c.wealth(&x, space.horizon());
            for t in 0..=space.horizon() {
                for a in 0..space.n_atoms() {
                    prop_assert_eq!(w.get(t, a), &(&x + gains.get(t, a)));
                    prop_assert!(*w.get(t, a) >= x);
                }
            }
            prop_assert!(c.claim.iter().all(|v| !v.is_negative()));
            prop_assert!(c.claim.iter().any(Signed::is_positive));
        }
    }

    #[test]
    fn progressive_lift_and_verdicts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 10, 4);
        let (space, tau) = with_random_tau(&mut rng, space);
        let b = azema(&space, &tau).unwrap();
        let pair = optional_decomposition(&b);
        let e = eta_analysis(&space, &b).unwrap();

        let (y, s) = deflated_pair(&mut rng, &space, std::slice::from_ref(&e.eta));
        let gm = enlarge_progressive(&space, &tau, std::slice::from_ref(&s)).unwrap();
        let w = lift_deflator(&space, &y, std::slice::from_ref(&s), &gm, &pair, &e).unwrap();
        prop_assert!(verify_deflator(space.probs(), &gm.filtration, &w, &gm.assets));
        prop_assert!(check_na1_market(&space, &gm).unwrap().holds);
        let local = check_na1_localized(&space, std::slice::from_ref(&s), &e.eta, &e.zeta_levels).unwrap();
        prop_assert!(local.iter().all(|l| l.verdict.holds));

        let eta_finite = (0..space.n_atoms()).any(|a| e.eta.is_finite(a));
        let arb = enlarge_progressive(&space, &tau, std::slice::from_ref(&e.s_arb)).unwrap();
        prop_assert_eq!(check_na1_market(&space, &arb).unwrap().holds, !eta_finite);
        if eta_finite {
            // S_arb jumps at η, so the lift must refuse it.
            let one = Process::constant(space.horizon(), space.n_atoms(), Q::one());
            let err = lift_deflator(&space, &one, std::slice::from_ref(&e.s_arb), &arb, &pair, &e).unwrap_err();
            let is_jump_at_eta = matches!(err, Error::JumpAtEta { .. });
            prop_assert!(is_jump_at_eta);
        }
    }

    #[test]
    fn initial_lift_and_verdicts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 10, 4);
        let (space, signal) = with_random_signal(&mut rng, space, 3);
        let ds = density_system(&space, &signal).unwrap();
        let fam = eta_family(&space, &signal, &ds).unwrap();
        let etas: Vec<_> = fam.per_label.iter().map(|le| le.eta.clone()).collect();

        let (y, s) = deflated_pair(&mut rng, &space, &etas);
        let gm = enlarge_initial(&space, &signal, std::slice::from_ref(&s)).unwrap();
        let w = lift_deflator_initial(&space, &y, std::slice::from_ref(&s), &signal, &ds, &fam).unwrap();
        prop_assert!(verify_deflator(space.probs(), &gm.filtration, &w, &gm.assets));
        prop_assert!(check_na1_market(&space, &gm).unwrap().holds);

        let weighted = fam.per_label.iter().enumerate().any(|(x, le)| {
            !ds.gamma[x].is_zero() && (0..space.n_atoms()).any(|a| le.eta.is_finite(a))
        });
        let insider = check_na1(space.probs(), &gm.filtration, std::slice::from_ref(&fam.s_j), None).unwrap();
        prop_assert_eq!(insider.holds, !weighted);
    }
}
