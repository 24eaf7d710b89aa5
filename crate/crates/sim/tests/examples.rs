use enlarge_sim::{simulate, Example, SimConfig, SimError};

fn report(example: Example, lambda: f64, horizon: f64, paths: u64, seed: u64) -> enlarge_sim::MCReport {
    simulate(&SimConfig::new(example, lambda, horizon, paths, seed)).unwrap()
}

#[test]
fn exp_time_matches_oracles() {
    let r = report(Example::ExpTime, 1.0, 1.0, 100_000, 42);
    for s in &r.statistics {
        println!("{} {:.5} ± {:.5} (oracle {}, z {:.2})", s.name, s.estimate, s.se, s.oracle, s.z);
    }
    assert!(r.passes());
    assert_eq!(r.statistic("E[S_tau]").unwrap().oracle, 2.0);
    let c = r.path_check("S_stopped_at_tau_strictly_increasing").unwrap();
    assert_eq!((c.passed, c.total), (100_000, 100_000));
}

#[test]
fn exp_time_other_rate() {
    let r = report(Example::ExpTime, 2.5, 1.0, 50_000, 7);
    assert!(r.statistic("E[S_0.5]").unwrap().passes());
    assert!(r.path_checks.iter().all(|c| c.passes()));
}

#[test]
fn discrete_time_matches_oracles() {
    let r = report(Example::DiscreteTime, 1.0, 4.0, 100_000, 42);
    assert_eq!(r.statistics.len(), 5);
    for s in &r.statistics {
        assert_eq!(s.oracle, 0.5);
    }
    assert!(r.passes());
}

#[test]
fn poisson_insider_matches_oracles() {
    let r = report(Example::PoissonInsider, 1.0, 1.0, 100_000, 42);
    for s in &r.statistics {
        println!("{} {:.5} ± {:.5} (oracle {:.5}, z {:.2})", s.name, s.estimate, s.se, s.oracle, s.z);
    }
    assert!(r.passes());
    assert!(r.statistic("E[p^1_0.5]").is_some());
    for name in ["sigma_before_T", "insider_wealth_nondecreasing", "insider_wealth_matches_closed_form"] {
        let c = r.path_check(name).unwrap();
        assert_eq!(c.passed, c.total, "{name}");
    }
    assert!(r.path_check("density_vanishes_at_price_jump").unwrap().passed > 0);
}

#[test]
fn reports_are_deterministic() {
    let a = report(Example::PoissonInsider, 1.5, 2.0, 9_000, 5);
    let b = report(Example::PoissonInsider, 1.5, 2.0, 9_000, 5);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = report(Example::PoissonInsider, 1.5, 2.0, 9_000, 6);
    assert_ne!(a.statistics[0].estimate, c.statistics[0].estimate);
    // Thread count does not change the bits.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let d = pool.install(|| report(Example::PoissonInsider, 1.5, 2.0, 9_000, 5));
    assert_eq!(a, d);
}

#[test]
fn invalid_configs() {
    let mut cfg = SimConfig::new(Example::ExpTime, 1.0, 1.0, 0, 1);
    assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
    cfg.paths = 10;
    cfg.lambda = -1.0;
    assert!(simulate(&cfg).is_err());
    let mut d = SimConfig::new(Example::DiscreteTime, 1.0, 3.0, 10, 1);
    d.ratio = 1.0;
    assert!(matches!(simulate(&d), Err(SimError::NonSummable(_))));
    assert!("nope".parse::<Example>().is_err());
}

#[test]
fn csv_has_header_and_rows() {
    let r = report(Example::DiscreteTime, 1.0, 2.0, 100, 1);
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("statistic,estimate,se,oracle,z"));
    assert_eq!(lines.count(), r.statistics.len());
}
